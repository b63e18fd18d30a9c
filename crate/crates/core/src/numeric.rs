//! Shared numeric kernels: adaptive quadrature, improper integrals with a
//! power-law tail estimate, monotone bisection, and golden-section
//! minimization.

use crate::error::{Error, Result};
use crate::real::Real;

/// Upper truncation point for improper integrals.
pub fn z_max<R: Real>() -> R {
    R::lit(1e12)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<R: Real, F: Fn(R) -> R>(f: &F, a: R, b: R, tol: R) -> R {
    if a == b {
        return R::zero();
    }
    let c = (a + b).half();
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = simpson(a, b, fa, fc, fb);
    adaptive(f, a, b, fa, fc, fb, whole, tol, 50)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fc: R, fb: R) -> R {
    (b - a) / R::lit(6.0) * (fa + R::lit(4.0) * fc + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<R: Real, F: Fn(R) -> R>(
    f: &F,
    a: R,
    b: R,
    fa: R,
    fc: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
) -> R {
    let c = (a + b).half();
    let d = (a + c).half();
    let e = (c + b).half();
    let fd = f(d);
    let fe = f(e);
    let left = simpson(a, c, fa, fd, fc);
    let right = simpson(c, b, fc, fe, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= R::lit(15.0) * tol {
        left + right + delta / R::lit(15.0)
    } else {
        let half_tol = tol.half();
        adaptive(f, a, c, fa, fd, fc, left, half_tol, depth - 1)
            + adaptive(f, c, b, fc, fe, fb, right, half_tol, depth - 1)
    }
}

/// Result of an improper integral over `[a, \u{221e})`.
#[derive(Debug, Clone, Copy)]
pub struct TailIntegral<R> {
    pub value: R,
    /// Local power-law exponent fitted at the truncation point.
    pub tail_exponent: R,
}

/// Integrates `f` over `[a, \u{221e})` with relative tolerance `rel_tol`.
///
/// The range is covered by dyadic panels; once the running tail estimate is
/// negligible the remainder is added from a local power-law fit
/// `f(z) ~ c z^e`, `e < -1`. Fails with [`Error::DivergentTail`] when the
/// fitted exponent says the integral cannot converge before the truncation
/// point `z_max` is reached.
pub fn improper_integral<R: Real, F: Fn(R) -> R>(f: &F, a: R, rel_tol: R) -> Result<TailIntegral<R>> {
    if a <= R::zero() || !a.is_finite() {
        return Err(Error::OutOfDomain { arg: a.as_f64() });
    }
    let mut lo = a;
    let mut total = R::zero();
    // dyadic panels keep each adaptive pass to one octave, so integrands
    // with power-law growth near a small left endpoint stay cheap
    let mut hi = a.two_times();
    loop {
        // scale the absolute panel tolerance by the panel's own rough size,
        // not just the running total: early panels can dwarf it
        let rough = simpson(lo, hi, f(lo), f((lo + hi).half()), f(hi));
        let panel_tol =
            rel_tol * (total.abs() + rough.abs() + R::one()) * R::lit(1e-3);
        total += integrate(f, lo, hi, panel_tol);
        let (tail, exponent) = tail_estimate(f, hi);
        let scale = total.abs().max(R::lit(1e-300));
        if tail.is_finite() && tail <= rel_tol * scale * R::lit(0.1) {
            return Ok(TailIntegral {
                value: total + tail,
                tail_exponent: exponent,
            });
        }
        if hi >= z_max() {
            // Truncation point reached; accept the extrapolated tail only
            // when the fitted exponent is clearly summable.
            return if exponent < -R::one() - R::lit(1e-3) && tail.is_finite() {
                Ok(TailIntegral {
                    value: total + tail,
                    tail_exponent: exponent,
                })
            } else {
                Err(Error::DivergentTail(format!(
                    "tail exponent {:.4} at z = {:.3e}",
                    exponent.as_f64(),
                    hi.as_f64()
                )))
            };
        }
        lo = hi;
        hi = hi.two_times();
    }
}

/// Fits `f(z) ~ c z^e` at `z` and returns `(remaining integral, e)`.
fn tail_estimate<R: Real, F: Fn(R) -> R>(f: &F, z: R) -> (R, R) {
    let f1 = f(z.half());
    let f2 = f(z);
    if f2 <= R::zero() || f1 <= R::zero() {
        return (R::zero(), R::neg_infinity());
    }
    let e = (f2 / f1).ln() / R::lit(2.0).ln();
    if e < -R::one() {
        ((f2 * z) / (-R::one() - e), e)
    } else {
        (R::infinity(), e)
    }
}

/// Least-squares fit of the exponent in `f(z) ~ c z^e` over a geometric grid
/// `[z_lo, z_hi]`.
pub fn fit_tail_exponent<R: Real, F: Fn(R) -> R>(f: &F, z_lo: R, z_hi: R, points: usize) -> R {
    let n = points.max(2);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let ratio = (z_hi / z_lo).ln() / R::from_usize(n - 1).unwrap();
    for i in 0..n {
        let z = z_lo * (ratio * R::from_usize(i).unwrap()).exp();
        let v = f(z);
        if v > R::zero() && v.is_finite() {
            xs.push(z.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 2 {
        return R::neg_infinity();
    }
    let m = R::from_usize(xs.len()).unwrap();
    let sx: R = xs.iter().cloned().sum();
    let sy: R = ys.iter().cloned().sum();
    let sxx: R = xs.iter().map(|&x| x * x).sum();
    let sxy: R = xs.iter().zip(&ys).map(|(&x, &y)| x * y).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

/// Solves `f(x) = target` for a strictly increasing `f` by bisection to
/// relative tolerance `rel_tol`. The bracket is grown geometrically from 1.
pub fn bisect_increasing<R: Real, F: Fn(R) -> R>(f: &F, target: R, rel_tol: R) -> Result<R> {
    let mut lo = R::one();
    let mut hi = R::one();
    let mut iter = 0;
    while f(hi) < target {
        hi = hi.two_times();
        iter += 1;
        if iter > 2000 || !hi.is_finite() {
            return Err(Error::InverseOutOfRange {
                target: target.as_f64(),
            });
        }
    }
    iter = 0;
    while f(lo) > target {
        lo = lo.half();
        iter += 1;
        if iter > 2000 || lo <= R::zero() {
            return Err(Error::InverseOutOfRange {
                target: target.as_f64(),
            });
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi).half();
        if (hi - lo) <= rel_tol * mid.abs().max(R::lit(1e-300)) {
            return Ok(mid);
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi).half())
}

/// Minimum of a continuous `f` on `[a, b]`: coarse presample followed by a
/// golden-section refinement around the best cell, compared with both
/// endpoints.
pub fn minimize<R: Real, F: Fn(R) -> R>(f: &F, a: R, b: R) -> R {
    const SAMPLES: usize = 64;
    let mut best_x = a;
    let mut best = f(a);
    let fb = f(b);
    if fb < best {
        best = fb;
        best_x = b;
    }
    let step = (b - a) / R::from_usize(SAMPLES).unwrap();
    for i in 1..SAMPLES {
        let x = a + step * R::from_usize(i).unwrap();
        let v = f(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let lo = (best_x - step).max(a);
    let hi = (best_x + step).min(b);
    best.min(golden_section(f, lo, hi))
}

fn golden_section<R: Real, F: Fn(R) -> R>(f: &F, mut a: R, mut b: R) -> R {
    let inv_phi = R::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if (b - a).abs() <= R::lit(1e-13) * (a.abs() + b.abs() + R::one()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

trait TwoTimes {
    fn two_times(self) -> Self;
}

impl<R: Real> TwoTimes for R {
    fn two_times(self) -> Self {
        self * R::two()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubic() {
        let v: f64 = integrate(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
    }

    #[test]
    fn improper_power_tail() {
        // \u{222b}_1^\u{221e} 2 z^{-3/2} dz = 4
        let r = improper_integral(&|z: f64| 2.0 * z.powf(-1.5), 1.0, 1e-8).unwrap();
        assert!((r.value - 4.0).abs() < 1e-6, "got {}", r.value);
    }

    #[test]
    fn improper_divergent_detected() {
        let r = improper_integral(&|z: f64| 1.0 / z, 1.0, 1e-6);
        assert!(r.is_err());
    }

    #[test]
    fn bisect_square_root() {
        let x = bisect_increasing(&|x: f64| x * x, 9.0, 1e-12).unwrap();
        assert!((x - 3.0).abs() < 1e-9);
    }

    #[test]
    fn minimize_parabola() {
        let m = minimize(&|x: f64| (x - 2.0) * (x - 2.0) + 1.0, 1.0, 4.0);
        assert!((m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_fit_recovers_exponent() {
        let e = fit_tail_exponent(&|z: f64| 3.0 * z.powf(-2.5), 1e5, 1e9, 9);
        assert!((e + 2.5).abs() < 1e-6);
    }
}
