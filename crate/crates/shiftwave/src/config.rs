//! Experiment configuration: TOML in, validated core objects out.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use shiftwave_core::asymptotics::{geometric_times, HarnessSettings};
use shiftwave_core::laxoleinik::SolverSettings;
use shiftwave_core::profiles::SampledSegment;
use shiftwave_core::{CompositeInitialData, FluxKind, FluxModel, MiddlePart, PeriodicProfile};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub flux: FluxSpec,
    pub states: States,
    #[serde(default)]
    pub left_profile: ProfileSpec,
    #[serde(default)]
    pub right_profile: ProfileSpec,
    #[serde(default)]
    pub middle: MiddleSpec,
    #[serde(default)]
    pub study: StudySpec,
    pub times: TimeSpec,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub compare: Option<CompareSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase", tag = "name", deny_unknown_fields)]
pub enum FluxSpec {
    Burgers,
    Quartic,
    Cosh,
    Poly24 { quadratic: f64, quartic: f64 },
}

impl FluxSpec {
    pub fn kind(&self) -> FluxKind {
        match *self {
            FluxSpec::Burgers => FluxKind::Burgers,
            FluxSpec::Quartic => FluxKind::Quartic,
            FluxSpec::Cosh => FluxKind::Cosh,
            FluxSpec::Poly24 { quadratic, quartic } => FluxKind::Poly24 { quadratic, quartic },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct States {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    #[default]
    Zero,
    Sine,
    Cosine,
    Sawtooth,
    Samples,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default)]
    pub shape: Shape,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
    /// One period of values for `shape = "samples"`; the average is removed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            shape: Shape::Zero,
            amplitude: 0.0,
            period: 1.0,
            phase: 0.0,
            samples: vec![],
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MiddleKind {
    #[default]
    Zero,
    Bump,
    Deviation,
    Absolute,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MiddleSpec {
    #[serde(default)]
    pub kind: MiddleKind,
    /// `N`: the middle part lives on `[-N, N]`.
    #[serde(default = "one")]
    pub half_width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub bump_half_width: f64,
    #[serde(default)]
    pub mass: f64,
    /// Uniform samples spanning `[-N, N]` for `deviation` and `absolute`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

impl Default for MiddleSpec {
    fn default() -> Self {
        MiddleSpec {
            kind: MiddleKind::Zero,
            half_width: 1.0,
            center: 0.0,
            bump_half_width: 1.0,
            mass: 0.0,
            samples: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Shock,
    Rarefaction,
    Constant,
    Periodic,
    Invariants,
    Envelope,
    Gluing,
    Merge,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Shock => "shock",
            StudyKind::Rarefaction => "rarefaction",
            StudyKind::Constant => "constant",
            StudyKind::Periodic => "periodic",
            StudyKind::Invariants => "invariants",
            StudyKind::Envelope => "envelope",
            StudyKind::Gluing => "gluing",
            StudyKind::Merge => "merge",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default)]
    pub kinds: Vec<StudyKind>,
    /// Threshold checks feed the exit status when set.
    #[serde(default = "yes")]
    pub assert: bool,
    /// Divide index `K` for shock and invariant studies; sized automatically
    /// when absent.
    pub k: Option<i64>,
    /// Fits drop times below `transient_factor * merge time`; 0 disables.
    #[serde(default = "four")]
    pub transient_factor: f64,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            kinds: vec![],
            assert: true,
            k: None,
            transient_factor: 4.0,
        }
    }
}

fn yes() -> bool {
    true
}

fn four() -> f64 {
    4.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub list: Vec<f64>,
    pub t0: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
}

impl TimeSpec {
    pub fn resolve(&self) -> anyhow::Result<Vec<f64>> {
        let times = match (self.list.is_empty(), self.t0, self.ratio, self.count) {
            (false, None, None, None) => self.list.clone(),
            (true, Some(t0), Some(r), Some(c)) => {
                if !(t0 > 0.0 && r > 1.0 && c > 0) {
                    bail!("[times] needs t0 > 0, ratio > 1 and count > 0");
                }
                geometric_times(t0, r, c)
            }
            _ => bail!("[times] takes either `list` or all of `t0`, `ratio`, `count`"),
        };
        shiftwave_core::asymptotics::check_schedule(&times).context("[times]")?;
        Ok(times)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    #[serde(default = "ppp")]
    pub points_per_period: usize,
    #[serde(default = "scan")]
    pub scan_resolution: f64,
    #[serde(default = "lattice")]
    pub lattice_refinement: usize,
    /// `W`; defaults to four times the longest period.
    pub window_margin: Option<f64>,
    #[serde(default = "merge")]
    pub merge_samples: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            points_per_period: ppp(),
            scan_resolution: scan(),
            lattice_refinement: lattice(),
            window_margin: None,
            merge_samples: merge(),
        }
    }
}

fn ppp() -> usize {
    64
}
fn scan() -> f64 {
    256.0
}
fn lattice() -> usize {
    16
}
fn merge() -> usize {
    64
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "m085")]
    pub shock_slope_max: f64,
    #[serde(default = "r5e3")]
    pub shock_final_residual: f64,
    #[serde(default = "yes")]
    pub shock_monotone: bool,
    #[serde(default = "m085")]
    pub side_slope_max: f64,
    #[serde(default = "m045")]
    pub decay_slope_max: f64,
    #[serde(default = "yes")]
    pub rarefaction_sqrt_envelope: bool,
    #[serde(default = "periodic_slope")]
    pub periodic_slope: [f64; 2],
    #[serde(default = "rel20")]
    pub periodic_amplitude_rel: f64,
    #[serde(default = "ole")]
    pub oleinik_max: f64,
    #[serde(default = "five")]
    pub invariant_factor: f64,
    #[serde(default = "glue")]
    pub gluing_max: f64,
    #[serde(default = "three")]
    pub l1_factor: f64,
    #[serde(default = "order")]
    pub gap_ratio: [f64; 2],
}

impl Default for Thresholds {
    fn default() -> Self {
        toml::from_str("").expect("all threshold fields have defaults")
    }
}

fn m085() -> f64 {
    -0.85
}
fn m045() -> f64 {
    -0.45
}
fn r5e3() -> f64 {
    5e-3
}
fn periodic_slope() -> [f64; 2] {
    [-1.15, -0.85]
}
fn rel20() -> f64 {
    0.2
}
fn ole() -> f64 {
    1.05
}
fn five() -> f64 {
    5.0
}
fn glue() -> f64 {
    1e-6
}
fn three() -> f64 {
    3.0
}
fn order() -> [f64; 2] {
    [1.5, 2.5]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    /// Comparison region; both ends must be multiples of every `dx`.
    pub window: [f64; 2],
    pub dx: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    #[serde(default = "cfl")]
    pub cfl: f64,
    /// Computational domain; sized from the wave speeds when absent.
    pub domain: Option<[f64; 2]>,
}

fn cfl() -> f64 {
    shiftwave_core::godunov::DEFAULT_CFL
}

/// Everything a run needs, built and checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub flux: FluxModel,
    pub data: CompositeInitialData,
    pub times: Vec<f64>,
    pub settings: HarnessSettings,
    /// Averages removed from sampled profiles, `(left, right)`.
    pub removed_average: (f64, f64),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn build(self) -> anyhow::Result<Experiment> {
        let times = self.times.resolve()?;
        let (left, la) = build_profile(&self.left_profile).context("[left_profile]")?;
        let (right, ra) = build_profile(&self.right_profile).context("[right_profile]")?;
        let middle = build_middle(&self.middle).context("[middle]")?;
        let (ul, ur) = (self.states.left, self.states.right);
        if !(ul.is_finite() && ur.is_finite()) {
            bail!("[states] must be finite");
        }
        let data = CompositeInitialData::new(ul, ur, left, right, self.middle.half_width, middle)
            .context("[middle]")?;
        let (lo, hi) = data.total_range();
        let flux = FluxModel::for_range(self.flux.kind(), lo, hi)
            .context("[flux] is not strictly convex on the range of the initial data")?;

        let r = &self.resolution;
        if r.points_per_period < 2 || r.lattice_refinement == 0 || !(r.scan_resolution > 0.0) || r.merge_samples == 0 {
            bail!("[resolution] values must be positive (points_per_period >= 2)");
        }
        if !(self.study.transient_factor >= 0.0) {
            bail!("[study] transient_factor must be non-negative");
        }
        let settings = HarnessSettings {
            solver: SolverSettings {
                scan_resolution: r.scan_resolution,
                refine_tolerance: 1e-12,
                lattice_refinement: r.lattice_refinement,
            },
            window_margin: r.window_margin,
            points_per_period: r.points_per_period,
            deviation_threshold: 1e-4,
            transient_factor: self.study.transient_factor,
            merge_samples: r.merge_samples,
        };
        for kind in &self.study.kinds {
            let ok = match kind {
                StudyKind::Shock | StudyKind::Merge => ul > ur,
                StudyKind::Rarefaction => ul < ur,
                StudyKind::Constant => ul == ur,
                StudyKind::Invariants | StudyKind::Envelope => ul <= ur,
                StudyKind::Periodic | StudyKind::Gluing => true,
            };
            if !ok {
                bail!(
                    "[study] `{}` does not fit the states left = {ul}, right = {ur}",
                    kind.name()
                );
            }
        }
        if let Some(c) = &self.compare {
            check_compare(c, &times)?;
        }
        let mut kinds = self.study.kinds.clone();
        kinds.sort();
        kinds.dedup();
        let mut config = self;
        config.study.kinds = kinds;
        Ok(Experiment {
            config,
            flux,
            data,
            times,
            settings,
            removed_average: (la, ra),
        })
    }
}

fn build_profile(p: &ProfileSpec) -> anyhow::Result<(PeriodicProfile, f64)> {
    if p.shape != Shape::Samples && !p.samples.is_empty() {
        bail!("`samples` only applies to shape = \"samples\"");
    }
    let profile = match p.shape {
        Shape::Zero => PeriodicProfile::zero(p.period)?,
        Shape::Sine => PeriodicProfile::sine(p.amplitude, p.period, p.phase)?,
        Shape::Cosine => PeriodicProfile::cosine(p.amplitude, p.period, p.phase)?,
        Shape::Sawtooth => PeriodicProfile::sawtooth(p.amplitude, p.period, p.phase)?,
        Shape::Samples => {
            let n = PeriodicProfile::normalize_zero_average(&p.samples, p.period)?;
            return Ok((n.profile, n.removed_average));
        }
    };
    Ok((profile, 0.0))
}

fn build_middle(m: &MiddleSpec) -> anyhow::Result<MiddlePart> {
    if !(m.half_width > 0.0) {
        bail!("half_width must be positive");
    }
    let seg = || SampledSegment::new(-m.half_width, m.half_width, m.samples.clone());
    Ok(match m.kind {
        MiddleKind::Zero => MiddlePart::Zero,
        MiddleKind::Bump => MiddlePart::Bump {
            center: m.center,
            half_width: m.bump_half_width,
            mass: m.mass,
        },
        MiddleKind::Deviation => MiddlePart::Deviation(seg()?),
        MiddleKind::Absolute => MiddlePart::Absolute(seg()?),
    })
}

fn check_compare(c: &CompareSpec, times: &[f64]) -> anyhow::Result<()> {
    let [a, b] = c.window;
    if !(a < b) {
        bail!("[compare] window must satisfy a < b");
    }
    if c.dx.is_empty() || c.dx.iter().any(|dx| !(*dx > 0.0)) {
        bail!("[compare] dx must be a non-empty list of positive spacings");
    }
    for dx in &c.dx {
        for end in [a, b] {
            let k = end / dx;
            if (k - k.round()).abs() > 1e-9 * k.abs().max(1.0) {
                bail!("[compare] window end {end} is not a multiple of dx = {dx}");
            }
        }
    }
    if !(c.cfl > 0.0 && c.cfl <= 1.0) {
        bail!("[compare] cfl must lie in (0, 1]");
    }
    let ts = if c.times.is_empty() { times } else { &c.times };
    shiftwave_core::asymptotics::check_schedule(ts).context("[compare] times")?;
    if let Some([da, db]) = c.domain {
        if !(da <= a && db >= b) {
            bail!("[compare] domain must contain the window");
        }
    }
    Ok(())
}

impl Experiment {
    pub fn compare_times(&self) -> Vec<f64> {
        match &self.config.compare {
            Some(c) if !c.times.is_empty() => c.times.clone(),
            _ => self.times.clone(),
        }
    }
}
