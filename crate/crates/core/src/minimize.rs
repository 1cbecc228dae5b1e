//! One-dimensional minimization and root finding.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search with parabolic acceleration (Brent) on `[a, b]`.
///
/// `tol` is an absolute tolerance on the argument. Non-finite objective values
/// are treated as `+inf`, so the search simply steers away from them.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };

    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = eval(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let tol = tol.max(1e-300);

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = 1e-15 * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u);

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
    Minimum { x, fx, evaluations }
}

/// Root of `f` on `[a, b]` given a sign change, by bisection safeguarded
/// regula falsi (Illinois variant). Returns `None` without a sign change.
pub fn find_root<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        // Fall back to bisection when the secant step leaves the bracket.
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return Some(c);
        }
        if !fc.is_finite() {
            return None;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    Some(if fa.abs() < fb.abs() { a } else { b })
}

/// Plain bisection to an absolute tolerance. Kept separate from [`find_root`]
/// so closed-form oracles do not share code with the main solver.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let left_negative = fa < 0.0;
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if (fm < 0.0) == left_negative {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_quadratic_minimum() {
        let m = brent(|x| (x - 1.234).powi(2), -10.0, 10.0, 1e-10, 200);
        assert!((m.x - 1.234).abs() < 1e-8);
        // With an offset the location is only resolvable to ~sqrt(eps).
        let m = brent(|x| (x - 1.234).powi(2) + 3.0, -10.0, 10.0, 1e-10, 200);
        assert!((m.x - 1.234).abs() < 1e-7);
        assert!((m.fx - 3.0).abs() < 1e-14);
    }

    #[test]
    fn brent_handles_kinked_objective() {
        let m = brent(
            |x: f64| if x < 0.4 { 2.0 * (0.4 - x) } else { x - 0.4 },
            -3.0,
            5.0,
            1e-10,
            500,
        );
        assert!((m.x - 0.4).abs() < 1e-8);
    }

    #[test]
    fn brent_avoids_infinite_region() {
        let m = brent(
            |x: f64| {
                if x < 0.0 {
                    f64::INFINITY
                } else {
                    (x - 2.0).powi(2)
                }
            },
            -5.0,
            5.0,
            1e-10,
            200,
        );
        assert!((m.x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn roots() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        let b = bisect(|x| x.cos() - x, 0.0, 1.0, 1e-14).unwrap();
        assert!((b.cos() - b).abs() < 1e-13);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }
}
