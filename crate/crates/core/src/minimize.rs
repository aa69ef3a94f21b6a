//! One-dimensional minimisation helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x, f(x))` for the best point seen. Stops when the bracket is
/// narrower than `tol` (or than a few ulps of the bracket ends).
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let fa = f(lo);
    let fb = f(hi);
    let mut best = if fa <= fb { (lo, fa) } else { (hi, fb) };

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        let scale = 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()));
        if hi - lo <= tol.max(scale) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }
    best
}

/// Newton iteration for `g(x) = 0` on a bracket `[lo, hi]` with `g(lo) <= 0 <= g(hi)`
/// and `g` increasing. Falls back to bisection whenever a Newton step leaves the
/// bracket or fails to shrink it.
pub fn newton_bisect<G, D>(mut g: G, mut dg: D, lo: f64, hi: f64, tol: f64, max_iter: usize) -> f64
where
    G: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let mut next = if d > 0.0 { x - gx / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= tol || hi - lo <= tol {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 2.0, -1.0, 2.0, 1e-12);
        // G is flat at the vertex, so only ~sqrt(eps) is attainable.
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_kink_minimum() {
        let (x, _) = golden_section(|x| (x - 0.25).abs(), -1.0, 1.0, 1e-13);
        assert!((x - 0.25).abs() < 1e-12);
    }

    #[test]
    fn newton_bisect_cube_root() {
        let r = newton_bisect(|u| u * u * u - 2.0, |u| 3.0 * u * u, 0.0, 2.0, 1e-14, 100);
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }
}
