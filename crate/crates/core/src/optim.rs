//! Bounded one-dimensional minimisation used by the calibration fits.

/// Result of a bounded scalar minimisation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MinResult {
    pub x: f64,
    pub fx: f64,
    pub evals: usize,
}

/// Brent-style bounded minimiser: golden-section steps refined by successive
/// parabolic interpolation. Derivative-free; assumes `f` is continuous on
/// `[lo, hi]` with an interior or boundary minimum.
pub(crate) fn brent_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> MinResult {
    debug_assert!(lo <= hi);
    let golden = 0.5 * (3.0 - 5.0_f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut evals = 0usize;
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    evals += 1;
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-15;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut take_golden = true;
        if e.abs() > tol1 {
            // parabola through (x, w, v)
            let r = (x - w) * (fx - fv);
            let q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            let mut q2 = 2.0 * (q - r);
            if q2 > 0.0 {
                p = -p;
            }
            q2 = q2.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q2 * e_prev).abs() && p > q2 * (a - x) && p < q2 * (b - x) {
                d = p / q2;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid > x { tol1 } else { -tol1 };
                }
                take_golden = false;
            }
        }
        if take_golden {
            e = if x < mid { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + if d > 0.0 { tol1 } else { -tol1 }
        };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    MinResult { x, fx, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        // function-value methods resolve the minimiser to about √ε·|x|
        let r = brent_min(|x| (x - 1.7).powi(2) + 3.0, -10.0, 10.0, 1e-12, 200);
        assert!((r.x - 1.7).abs() < 1e-7, "x = {}", r.x);
        assert!((r.fx - 3.0).abs() < 1e-14);
    }

    #[test]
    fn respects_bounds() {
        // minimum of (x-5)^2 on [0, 2] is at the boundary
        let r = brent_min(|x| (x - 5.0).powi(2), 0.0, 2.0, 1e-10, 200);
        assert!((r.x - 2.0).abs() < 1e-6, "x = {}", r.x);
    }

    #[test]
    fn handles_flat_objective() {
        let r = brent_min(|_| 1.0, 0.0, 1.0, 1e-10, 200);
        assert_eq!(r.fx, 1.0);
    }
}
