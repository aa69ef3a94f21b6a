//! CSV and summary writers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Value};

use crate::config::Experiment;
use crate::study::{StudyOutcome, Table};

/// 17 significant digits: enough to reread every `f64` bit for bit.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn table_bytes(table: &Table) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format_number(*x)))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn summary(command: &str, e: &Experiment, outcomes: &[StudyOutcome]) -> Value {
    let enabled = e.config.study.assert;
    let studies: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "name": o.name,
                "pass": o.pass(),
                "metrics": o.metrics,
                "checks": o.checks,
                "files": o.tables.iter().map(|t| t.file.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "command": command,
        "config": e.config,
        "resolved": {
            "times": e.times,
            "dx": e.data.min_period() / e.settings.points_per_period as f64,
            "window_margin": e.settings.window_margin.unwrap_or(4.0 * e.data.max_period()),
            "deviation_threshold": e.settings.deviation_threshold,
            "removed_average": [e.removed_average.0, e.removed_average.1],
            "flux_working_range": e.flux.working_range(),
            "data_range": e.data.total_range(),
        },
        "assertions_enabled": enabled,
        "studies": studies,
        "pass": overall_pass(e, outcomes),
    })
}

/// Failed checks count only when assertions are enabled.
pub fn overall_pass(e: &Experiment, outcomes: &[StudyOutcome]) -> bool {
    !e.config.study.assert || outcomes.iter().all(|o| o.pass())
}

/// Writes every table and `summary.json` into `dir`. Files are staged under
/// temporary names and renamed once all of them are on disk.
pub fn write_all(dir: &Path, outcomes: &[StudyOutcome], summary: &Value) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<(String, Vec<u8>)> = vec![];
    for o in outcomes {
        for t in &o.tables {
            files.push((t.file.clone(), table_bytes(t)?));
        }
    }
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    files.push(("summary.json".into(), text.into_bytes()));

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = vec![];
    for (name, bytes) in &files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(err) = fs::write(&tmp, bytes) {
            for (p, _) in &staged {
                let _ = fs::remove_file(p);
            }
            return Err(err).with_context(|| format!("writing {}", tmp.display()));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = vec![];
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest).with_context(|| format!("renaming into {}", dest.display()))?;
        written.push(dest);
    }
    Ok(written)
}
