//! One-dimensional maximization.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search, stopping
/// once the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
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
    }
    // Endpoints are never evaluated inside the loop; check them so a maximum
    // on the boundary is returned exactly.
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let x = golden_section_max(|x| -(x - 1.234).powi(2), -8.0, 8.0, 1e-10);
        assert!((x - 1.234).abs() < 1e-8);
    }

    #[test]
    fn finds_boundary_maximum() {
        let x = golden_section_max(|x| x, -8.0, 8.0, 1e-8);
        assert_eq!(x, 8.0);
        let x = golden_section_max(|x| -x, -8.0, 8.0, 1e-8);
        assert_eq!(x, -8.0);
    }
}
