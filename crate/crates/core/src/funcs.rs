//! One-dimensional structure functions.
//!
//! Every function the analysis consumes (the state-variable bounds `g`, `h`,
//! the spatial weight `p`, and the gradient bounds of the first-order term)
//! is a member of a closed family of positive functions on `(0, \u{221e})`.
//! Keeping the family closed lets the classifier do exact exponent
//! arithmetic on tails instead of guessing from samples.
//!
//! Two shift conventions coexist: state-variable functions are evaluated at
//! `\u{3b6}` directly (log shift defaults to 1), spatial functions at
//! `1 + |x|` with log shift 2. The shifts are explicit fields, so both
//! conventions are just different constructor defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::real::Real;

fn zero<R: Real>() -> R {
    R::zero()
}

fn is_zero<R: Real>(x: &R) -> bool {
    *x == R::zero()
}

/// A positive function of one variable in a closed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalarFunction<R: Real> {
    /// `c0 (base_shift + \u{3b6})^a`
    Power {
        c0: R,
        a: R,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        base_shift: R,
    },
    /// `c0 (base_shift + \u{3b6})^a log^s(shift + \u{3b6})`
    PowerLog {
        c0: R,
        a: R,
        s: R,
        shift: R,
        #[serde(default = "zero", skip_serializing_if = "is_zero")]
        base_shift: R,
    },
    /// Piecewise log-log linear interpolation through `(x, y)` nodes;
    /// extrapolates by freezing the first/last log-log slope.
    TabulatedMonotone { nodes: Vec<(R, R)> },
    /// Functional inverse of a strictly increasing base.
    InverseOf { base: Box<ScalarFunction<R>> },
    Compose {
        outer: Box<ScalarFunction<R>>,
        inner: Box<ScalarFunction<R>>,
    },
    ScaledBy {
        factor: R,
        base: Box<ScalarFunction<R>>,
    },
    MinOf { items: Vec<ScalarFunction<R>> },
}

/// Monotonicity of a function on `(0, \u{221e})`, when derivable from its
/// structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
}

/// Asymptotic behavior `f(\u{3b6}) ~ c \u{3b6}^exponent log^log_exponent \u{3b6}`
/// as `\u{3b6} \u{2192} \u{221e}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSignature<R> {
    pub exponent: R,
    pub log_exponent: R,
}

impl<R: Real> ScalarFunction<R> {
    pub fn power(c0: R, a: R) -> Self {
        ScalarFunction::Power {
            c0,
            a,
            base_shift: R::zero(),
        }
    }

    pub fn power_log(c0: R, a: R, s: R, shift: R) -> Self {
        ScalarFunction::PowerLog {
            c0,
            a,
            s,
            shift,
            base_shift: R::zero(),
        }
    }

    /// Spatial weight `c0 (1 + r)^l`.
    pub fn spatial_power(c0: R, l: R) -> Self {
        ScalarFunction::Power {
            c0,
            a: l,
            base_shift: R::one(),
        }
    }

    /// Spatial weight `c0 (1 + r)^l log^m(2 + r)`.
    pub fn spatial_power_log(c0: R, l: R, m: R) -> Self {
        ScalarFunction::PowerLog {
            c0,
            a: l,
            s: m,
            shift: R::two(),
            base_shift: R::one(),
        }
    }

    pub fn constant(c: R) -> Self {
        Self::power(c, R::zero())
    }

    pub fn identity() -> Self {
        Self::power(R::one(), R::one())
    }

    pub fn inverse_of(base: ScalarFunction<R>) -> Self {
        ScalarFunction::InverseOf { base: Box::new(base) }
    }

    pub fn compose(outer: ScalarFunction<R>, inner: ScalarFunction<R>) -> Self {
        ScalarFunction::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn scaled_by(factor: R, base: ScalarFunction<R>) -> Self {
        ScalarFunction::ScaledBy {
            factor,
            base: Box::new(base),
        }
    }

    pub fn min_of(items: Vec<ScalarFunction<R>>) -> Self {
        ScalarFunction::MinOf { items }
    }

    /// Checks the structural invariants of the description.
    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFunction::Power { c0, base_shift, .. } => {
                if *c0 <= R::zero() {
                    return Err(Error::InvalidFunction("c0 must be positive".into()));
                }
                if *base_shift < R::zero() {
                    return Err(Error::InvalidFunction("base_shift must be \u{2265} 0".into()));
                }
            }
            ScalarFunction::PowerLog {
                c0, shift, base_shift, ..
            } => {
                if *c0 <= R::zero() {
                    return Err(Error::InvalidFunction("c0 must be positive".into()));
                }
                if *shift < R::one() {
                    return Err(Error::InvalidFunction("log shift must be \u{2265} 1".into()));
                }
                if *base_shift < R::zero() {
                    return Err(Error::InvalidFunction("base_shift must be \u{2265} 0".into()));
                }
            }
            ScalarFunction::TabulatedMonotone { nodes } => {
                if nodes.is_empty() {
                    return Err(Error::InvalidFunction("empty node table".into()));
                }
                for w in nodes.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidFunction(
                            "node abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                for (x, y) in nodes {
                    if *x <= R::zero() || *y <= R::zero() {
                        return Err(Error::InvalidFunction(
                            "nodes must have positive coordinates".into(),
                        ));
                    }
                }
            }
            ScalarFunction::InverseOf { base } => {
                base.validate()?;
                if !base.is_strictly_increasing() {
                    return Err(Error::InvalidFunction(
                        "inverse requires a strictly increasing base".into(),
                    ));
                }
            }
            ScalarFunction::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
            }
            ScalarFunction::ScaledBy { factor, base } => {
                if *factor <= R::zero() {
                    return Err(Error::InvalidFunction("scale factor must be positive".into()));
                }
                base.validate()?;
            }
            ScalarFunction::MinOf { items } => {
                if items.is_empty() {
                    return Err(Error::InvalidFunction("empty min list".into()));
                }
                for f in items {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Evaluates the function at `zeta > 0`.
    pub fn eval(&self, zeta: R) -> Result<R> {
        if !(zeta > R::zero()) || !zeta.is_finite() {
            return Err(Error::OutOfDomain { arg: zeta.as_f64() });
        }
        self.value(zeta)
    }

    fn value(&self, z: R) -> Result<R> {
        match self {
            ScalarFunction::Power { c0, a, base_shift } => Ok(*c0 * (*base_shift + z).powf(*a)),
            ScalarFunction::PowerLog {
                c0,
                a,
                s,
                shift,
                base_shift,
            } => Ok(*c0 * (*base_shift + z).powf(*a) * (*shift + z).ln().powf(*s)),
            ScalarFunction::TabulatedMonotone { nodes } => Ok(tabulated_value(nodes, z)),
            ScalarFunction::InverseOf { base } => {
                let b = base.as_ref();
                let root = numeric::bisect_increasing(
                    &|x| b.value(x).unwrap_or_else(|_| R::nan()),
                    z,
                    R::lit(1e-12),
                )?;
                Ok(root)
            }
            ScalarFunction::Compose { outer, inner } => {
                let y = inner.value(z)?;
                if !(y > R::zero()) {
                    return Err(Error::OutOfDomain { arg: y.as_f64() });
                }
                outer.value(y)
            }
            ScalarFunction::ScaledBy { factor, base } => Ok(*factor * base.value(z)?),
            ScalarFunction::MinOf { items } => {
                let mut best = R::infinity();
                for f in items {
                    best = best.min(f.value(z)?);
                }
                Ok(best)
            }
        }
    }

    /// Structural monotonicity on `(0, \u{221e})`, if derivable.
    pub fn monotonicity(&self) -> Option<Monotonicity> {
        use Monotonicity::*;
        match self {
            ScalarFunction::Power { a, .. } => Some(if *a > R::zero() {
                Increasing
            } else if *a < R::zero() {
                Decreasing
            } else {
                Constant
            }),
            ScalarFunction::PowerLog { a, s, .. } => {
                if *a == R::zero() && *s == R::zero() {
                    Some(Constant)
                } else if *a >= R::zero() && *s >= R::zero() {
                    Some(Increasing)
                } else if *a <= R::zero() && *s <= R::zero() {
                    Some(Decreasing)
                } else {
                    None
                }
            }
            ScalarFunction::TabulatedMonotone { nodes } => {
                let incr = nodes.windows(2).all(|w| w[1].1 >= w[0].1);
                let decr = nodes.windows(2).all(|w| w[1].1 <= w[0].1);
                match (incr, decr) {
                    (true, true) => Some(Constant),
                    (true, false) => Some(Increasing),
                    (false, true) => Some(Decreasing),
                    (false, false) => None,
                }
            }
            ScalarFunction::InverseOf { .. } => Some(Increasing),
            ScalarFunction::Compose { outer, inner } => {
                match (outer.monotonicity()?, inner.monotonicity()?) {
                    (Constant, _) | (_, Constant) => Some(Constant),
                    (Increasing, Increasing) | (Decreasing, Decreasing) => Some(Increasing),
                    _ => Some(Decreasing),
                }
            }
            ScalarFunction::ScaledBy { base, .. } => base.monotonicity(),
            ScalarFunction::MinOf { items } => {
                let mut all = items.iter().map(|f| f.monotonicity());
                let first = all.next()??;
                for m in all {
                    match (first, m?) {
                        (a, b) if a == b => {}
                        (_, Constant) | (Constant, _) => return None,
                        _ => return None,
                    }
                }
                Some(first)
            }
        }
    }

    fn is_strictly_increasing(&self) -> bool {
        match self {
            ScalarFunction::Power { a, .. } => *a > R::zero(),
            ScalarFunction::PowerLog { a, s, .. } => {
                *a >= R::zero() && *s >= R::zero() && (*a > R::zero() || *s > R::zero())
            }
            ScalarFunction::TabulatedMonotone { nodes } => {
                nodes.windows(2).all(|w| w[1].1 > w[0].1)
            }
            ScalarFunction::InverseOf { base } => base.is_strictly_increasing(),
            ScalarFunction::Compose { outer, inner } => {
                outer.is_strictly_increasing() && inner.is_strictly_increasing()
            }
            ScalarFunction::ScaledBy { base, .. } => base.is_strictly_increasing(),
            ScalarFunction::MinOf { items } => items.iter().all(|f| f.is_strictly_increasing()),
        }
    }

    /// `inf` of the function over the window `(\u{3b6}/\u{3b8}, \u{3b8}\u{3b6})`.
    ///
    /// Closed form (an endpoint limit) for monotone structure, node scan for
    /// tables, sampled golden-section search otherwise. Open-interval infima
    /// coincide with the closed-interval ones for every continuous family
    /// supported here.
    pub fn theta_inf(&self, theta: R, zeta: R) -> Result<R> {
        if !(theta > R::one()) {
            return Err(Error::Precondition(format!(
                "\u{3b8} must exceed 1, got {}",
                theta.as_f64()
            )));
        }
        if !(zeta > R::zero()) || !zeta.is_finite() {
            return Err(Error::OutOfDomain { arg: zeta.as_f64() });
        }
        let lo = zeta / theta;
        let hi = zeta * theta;
        if let ScalarFunction::MinOf { items } = self {
            let mut best = R::infinity();
            for f in items {
                best = best.min(f.theta_inf(theta, zeta)?);
            }
            return Ok(best);
        }
        match self.monotonicity() {
            Some(Monotonicity::Increasing) => self.eval(lo),
            Some(Monotonicity::Decreasing) => self.eval(hi),
            Some(Monotonicity::Constant) => self.eval(zeta),
            None => match self {
                ScalarFunction::TabulatedMonotone { nodes } => {
                    let mut best = self.eval(lo)?.min(self.eval(hi)?);
                    for (x, y) in nodes {
                        if *x > lo && *x < hi {
                            best = best.min(*y);
                        }
                    }
                    Ok(best)
                }
                _ => Ok(numeric::minimize(
                    &|x| self.value(x).unwrap_or_else(|_| R::infinity()),
                    lo,
                    hi,
                )),
            },
        }
    }

    /// `q(r) = inf` of the function over `(0, r]` (the spatial weight over
    /// the ball of radius `r`). Closed form for monotone structure, a
    /// 10\u{2074}-point grid scan otherwise.
    pub fn radial_inf(&self, r: R) -> Result<R> {
        if !(r > R::zero()) || !r.is_finite() {
            return Err(Error::OutOfDomain { arg: r.as_f64() });
        }
        if let ScalarFunction::MinOf { items } = self {
            let mut best = R::infinity();
            for f in items {
                best = best.min(f.radial_inf(r)?);
            }
            return Ok(best);
        }
        match self.monotonicity() {
            Some(Monotonicity::Decreasing) | Some(Monotonicity::Constant) => self.eval(r),
            Some(Monotonicity::Increasing) => self.eval(r.min(R::one()) * R::lit(1e-14)),
            None => {
                const GRID: usize = 10_000;
                let mut best = self.eval(r)?;
                let mut best_x = r;
                let step = r / R::from_usize(GRID).unwrap();
                for i in 1..GRID {
                    let x = step * R::from_usize(i).unwrap();
                    let v = self.value(x)?;
                    if v < best {
                        best = v;
                        best_x = x;
                    }
                }
                // the ball includes its center, so sample next to 0 too
                best = best.min(self.value(r.min(R::one()) * R::lit(1e-14))?);
                // refine around the best cell so the infimum does not
                // depend on where r falls relative to the grid
                best = best.min(numeric::minimize(
                    &|x| self.value(x).unwrap_or_else(|_| R::infinity()),
                    (best_x - step).max(step * R::lit(1e-3)),
                    (best_x + step).min(r),
                ));
                if let ScalarFunction::TabulatedMonotone { nodes } = self {
                    for (x, y) in nodes {
                        if *x <= r {
                            best = best.min(*y);
                        }
                    }
                }
                Ok(best)
            }
        }
    }

    /// Exact tail exponents as `\u{3b6} \u{2192} \u{221e}`, when the structure
    /// admits them. Tables go through the numeric tail fit instead.
    pub fn tail_signature(&self) -> Option<TailSignature<R>> {
        match self {
            ScalarFunction::Power { a, .. } => Some(TailSignature {
                exponent: *a,
                log_exponent: R::zero(),
            }),
            ScalarFunction::PowerLog { a, s, .. } => Some(TailSignature {
                exponent: *a,
                log_exponent: *s,
            }),
            ScalarFunction::TabulatedMonotone { .. } => None,
            ScalarFunction::InverseOf { base } => {
                let sig = base.tail_signature()?;
                if sig.exponent > R::zero() {
                    Some(TailSignature {
                        exponent: sig.exponent.recip(),
                        log_exponent: -sig.log_exponent / sig.exponent,
                    })
                } else {
                    None
                }
            }
            ScalarFunction::Compose { outer, inner } => {
                let o = outer.tail_signature()?;
                let i = inner.tail_signature()?;
                if i.exponent > R::zero() {
                    Some(TailSignature {
                        exponent: o.exponent * i.exponent,
                        log_exponent: o.exponent * i.log_exponent + o.log_exponent,
                    })
                } else if i.exponent == R::zero() && i.log_exponent == R::zero() {
                    // inner tends to a constant, so does the composition
                    Some(TailSignature {
                        exponent: R::zero(),
                        log_exponent: R::zero(),
                    })
                } else {
                    None
                }
            }
            ScalarFunction::ScaledBy { base, .. } => base.tail_signature(),
            ScalarFunction::MinOf { items } => {
                let mut best: Option<TailSignature<R>> = None;
                for f in items {
                    let sig = f.tail_signature()?;
                    best = Some(match best {
                        None => sig,
                        Some(b) => {
                            if sig.exponent < b.exponent
                                || (sig.exponent == b.exponent && sig.log_exponent < b.log_exponent)
                            {
                                sig
                            } else {
                                b
                            }
                        }
                    });
                }
                best
            }
        }
    }
}

fn tabulated_value<R: Real>(nodes: &[(R, R)], z: R) -> R {
    if nodes.len() == 1 {
        return nodes[0].1;
    }
    let seg = match nodes.iter().position(|(x, _)| *x > z) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => nodes.len() - 2,
    };
    let (x0, y0) = nodes[seg];
    let (x1, y1) = nodes[seg + 1];
    let slope = (y1.ln() - y0.ln()) / (x1.ln() - x0.ln());
    (y0.ln() + slope * (z.ln() - x0.ln())).exp()
}

/// The data Theorem-style stabilization analysis consumes: the state bounds
/// `g`, `h`, the radial spatial weight `p`, and the window parameter
/// `\u{3b8} > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTriple<R: Real> {
    pub g: ScalarFunction<R>,
    pub h: ScalarFunction<R>,
    pub p_radial: ScalarFunction<R>,
    pub theta: R,
}

impl<R: Real> StructureTriple<R> {
    pub fn new(
        g: ScalarFunction<R>,
        h: ScalarFunction<R>,
        p_radial: ScalarFunction<R>,
        theta: R,
    ) -> Result<Self> {
        let triple = StructureTriple { g, h, p_radial, theta };
        triple.validate()?;
        Ok(triple)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > R::one()) {
            return Err(Error::Precondition(format!(
                "\u{3b8} must exceed 1, got {}",
                self.theta.as_f64()
            )));
        }
        self.g.validate()?;
        self.h.validate()?;
        self.p_radial.validate()?;
        // Positivity spot check on a compact range; exact for the closed
        // families, meaningful for tables.
        for f in [&self.g, &self.h] {
            for i in 1..=32 {
                let z = R::lit(0.25) * R::from_i32(i).unwrap();
                if f.eval(z)? <= R::zero() {
                    return Err(Error::InvalidFunction(format!(
                        "function not positive at {}",
                        z.as_f64()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = ScalarFunction<f64>;

    #[test]
    fn power_eval() {
        assert_eq!(F::power(1.0, 2.0).eval(3.0).unwrap(), 9.0);
    }

    #[test]
    fn inverse_of_square() {
        let f = F::inverse_of(F::power(1.0, 2.0));
        let v = f.eval(9.0).unwrap();
        assert!((v - 3.0).abs() < 1e-9);
    }

    #[test]
    fn power_log_eval() {
        let f = F::power_log(2.0, 1.0, 1.0, 1.0);
        let z = std::f64::consts::E - 1.0;
        let v = f.eval(z).unwrap();
        assert!((v - 2.0 * z).abs() < 1e-12, "log(1+e-1) = 1, got {v}");
    }

    #[test]
    fn eval_rejects_nonpositive() {
        assert!(F::power(1.0, 2.0).eval(0.0).is_err());
        assert!(F::power(1.0, 2.0).eval(-1.0).is_err());
    }

    #[test]
    fn theta_inf_increasing_left_endpoint() {
        let f = F::power(1.0, 2.0);
        assert!((f.theta_inf(2.0, 4.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn theta_inf_decreasing_right_endpoint() {
        let f = F::power(1.0, -1.0);
        assert!((f.theta_inf(2.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn theta_inf_general_vs_grid() {
        // mixed signs force the sampled search
        let f = F::power_log(1.0, -1.0, 2.0, 1.0);
        let (theta, zeta) = (3.0, 5.0);
        let got = f.theta_inf(theta, zeta).unwrap();
        let (lo, hi) = (zeta / theta, zeta * theta);
        let brute = (0..=100_000)
            .map(|i| lo + (hi - lo) * i as f64 / 100_000.0)
            .map(|x| f.eval(x).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((got - brute).abs() / brute < 1e-6, "{got} vs {brute}");
    }

    #[test]
    fn radial_inf_shifted_power() {
        let p = F::spatial_power(1.0, -2.0);
        let r = 3.0;
        assert!((p.radial_inf(r).unwrap() - (1.0 + r).powi(-2)).abs() < 1e-12);
        let flat = F::spatial_power(1.0, 0.0);
        assert_eq!(flat.radial_inf(10.0).unwrap(), 1.0);
    }

    #[test]
    fn radial_inf_tabulated_scan() {
        let p = F::TabulatedMonotone {
            nodes: vec![(1.0, 3.0), (2.0, 1.0), (4.0, 2.0)],
        };
        assert!((p.radial_inf(4.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_requires_increasing_base() {
        let f = F::inverse_of(F::power(1.0, -1.0));
        assert!(f.validate().is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let json = r#"{"family":"power_log","c0":1.0,"a":2.0,"s":0.0,"shift":1.0}"#;
        let f: F = serde_json::from_str(json).unwrap();
        assert_eq!(f, F::power_log(1.0, 2.0, 0.0, 1.0));
        let nested = r#"{"family":"inverse_of","base":{"family":"power","c0":1.0,"a":3.0}}"#;
        let g: F = serde_json::from_str(nested).unwrap();
        assert!((g.eval(8.0).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn tail_signature_of_inverse_compose() {
        // h = \u{3c6}\u{207b}\u{b9} \u{2218} \u{3c8} with \u{3c6} = \u{3b6}\u{b3}, \u{3c8} = \u{3b6}\u{b2}: tail exponent 2/3
        let h = F::compose(F::inverse_of(F::power(1.0, 3.0)), F::power(1.0, 2.0));
        let sig = h.tail_signature().unwrap();
        assert!((sig.exponent - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(sig.log_exponent, 0.0);
    }
}
