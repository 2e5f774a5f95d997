//! One-dimensional root finding, minimization and line fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

/// Least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual of the fit.
    pub residual: T,
}

/// Ordinary least squares on paired samples. Needs at least two distinct `x`.
pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("line fit needs at least two points".into()));
    }
    let n = count::<T>(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::InvalidParameter("line fit with constant abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum::<T>();
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Brent's method on a bracket with a sign change.
pub fn brent<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, xtol: T, max_iter: usize) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BadBracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
        });
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = lit::<T>(3.0) * m * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
    }
    Ok(b)
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_min<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, iterations: usize) -> (T, T) {
    let inv_phi = lit::<T>(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Cyclic coordinate golden-section descent in a box of half-width `radius`
/// around `start`. Never returns a point worse than `start`.
pub fn coordinate_polish<T: Real>(
    f: impl Fn(&[T]) -> T,
    start: &[T],
    radius: T,
    sweeps: usize,
    iterations: usize,
) -> (Vec<T>, T) {
    let mut best = start.to_vec();
    let mut best_val = f(&best);
    for _ in 0..sweeps {
        for axis in 0..start.len() {
            let centre = best[axis];
            let mut probe = best.clone();
            let (arg, val) = golden_min(
                |t| {
                    probe[axis] = t;
                    f(&probe)
                },
                centre - radius,
                centre + radius,
                iterations,
            );
            if val < best_val {
                best[axis] = arg;
                best_val = val;
            }
        }
    }
    (best, best_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn line_fit_rejects_degenerate_input() {
        assert!(fit_line(&[1.0], &[2.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn brent_finds_sqrt_two() {
        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_bracket_without_sign_change() {
        assert!(matches!(
            brent(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(Error::BadBracket { .. })
        ));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, v) = golden_min(|x: f64| (x - 0.3).powi(2) + 1.0, -1.0, 1.0, 100);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polish_improves_two_dimensional_minimum() {
        let f = |p: &[f64]| (p[0] - 0.1).powi(2) + (p[1] + 0.05).powi(2);
        let (x, v) = coordinate_polish(f, &[0.0, 0.0], 0.2, 3, 80);
        assert!(v < 1e-12, "v = {v}, x = {x:?}");
    }
}
