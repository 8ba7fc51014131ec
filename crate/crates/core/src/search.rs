//! One-dimensional searches shared by the exponent and large-deviation code.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`; the endpoints are compared against the interior
/// optimum so boundary maxima are reported exactly.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Golden-section search for the minimizer; see [`golden_section_max`].
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_section_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Bisection for the root of an increasing function with `g(lo) <= 0 <= g(hi)`.
pub fn bisect_increasing(mut g: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_reports_boundary_maximum() {
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 1.0);
        let (x, _) = golden_section_min(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn bisection_root() {
        let r = bisect_increasing(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }
}
