//! Classification of the three improper integrals that make up the
//! stabilization criterion, plus closed-form checkers for the worked
//! equation families.
//!
//! The criterion is sufficient only: a failed or inconclusive
//! classification yields `Unknown`, never "does not stabilize".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{ScalarFunction, StructureTriple};
use crate::numeric;
use crate::real::Real;

/// Half-width of the refusal band around a critical tail exponent for the
/// numeric classifier. Quadrature cannot distinguish log-critical tails.
pub const CRITICAL_BAND: f64 = 0.05;

/// Relative error target for reported integral values.
pub const VALUE_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegralStatus {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Verdict on one improper integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: serde::Serialize",
    deserialize = "R: serde::Deserialize<'de>"
))]
pub struct IntegralVerdict<R: Real> {
    pub status: IntegralStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<R>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub diagnostic: String,
}

impl<R: Real> IntegralVerdict<R> {
    fn convergent(value: R, diagnostic: String) -> Self {
        IntegralVerdict {
            status: IntegralStatus::Convergent,
            value: Some(value),
            diagnostic,
        }
    }

    fn divergent(diagnostic: String) -> Self {
        IntegralVerdict {
            status: IntegralStatus::Divergent,
            value: None,
            diagnostic,
        }
    }

    fn inconclusive(diagnostic: String) -> Self {
        IntegralVerdict {
            status: IntegralStatus::Inconclusive,
            value: None,
            diagnostic,
        }
    }

    pub fn is_convergent(&self) -> bool {
        self.status == IntegralStatus::Convergent
    }

    pub fn is_divergent(&self) -> bool {
        self.status == IntegralStatus::Divergent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stabilizes,
    Unknown,
}

/// Assembled report for the three-integral criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport<R: Real> {
    #[serde(rename = "q")]
    pub q_integral: IntegralVerdict<R>,
    #[serde(rename = "g")]
    pub g_integral: IntegralVerdict<R>,
    #[serde(rename = "h")]
    pub h_integral: IntegralVerdict<R>,
    pub verdict: Verdict,
    pub theta: R,
}

impl<R: Real> StabilizationReport<R> {
    pub fn stabilizes(&self) -> bool {
        self.verdict == Verdict::Stabilizes
    }
}

/// Which route the classifier takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyMethod {
    /// Closed-form tail arithmetic when the function structure admits it,
    /// numeric tail fit otherwise.
    Auto,
    /// Force the quadrature + tail-fit route (independent cross-check).
    Numeric,
}

/// Classifies `\u{222b}\u{2081}^\u{221e} r q(r) dr` where `q(r)` is the
/// running infimum of the spatial weight.
pub fn classify_q_integral<R: Real>(p_radial: &ScalarFunction<R>) -> Result<IntegralVerdict<R>> {
    classify_q_integral_with(p_radial, ClassifyMethod::Auto)
}

pub fn classify_q_integral_with<R: Real>(
    p_radial: &ScalarFunction<R>,
    method: ClassifyMethod,
) -> Result<IntegralVerdict<R>> {
    p_radial.validate()?;
    let integrand = |r: R| r * p_radial.radial_inf(r).unwrap_or_else(|_| R::nan());
    if method == ClassifyMethod::Auto {
        if let Some(sig) = q_tail_signature(p_radial)? {
            let (a, s) = (sig.0, sig.1);
            // integrand ~ r^{a+1} log^s r; divergent iff a > -2, or a = -2, s >= -1
            let diag = format!("closed form: q tail exponent {}, log {}", a.as_f64(), s.as_f64());
            return if a > -R::two() || (a == -R::two() && s >= -R::one()) {
                Ok(IntegralVerdict::divergent(diag))
            } else {
                let v = numeric::improper_integral(&integrand, R::one(), R::lit(VALUE_REL_TOL))?;
                Ok(IntegralVerdict::convergent(v.value, diag))
            };
        }
    }
    numeric_classify(&integrand, "q integrand r\u{b7}q(r)")
}

/// Classifies `\u{222b}\u{2081}^\u{221e} (g_\u{3b8}(\u{3b6}) \u{3b6})^{-1/2} d\u{3b6}`.
pub fn classify_g_integral<R: Real>(
    g: &ScalarFunction<R>,
    theta: R,
) -> Result<IntegralVerdict<R>> {
    classify_g_integral_with(g, theta, ClassifyMethod::Auto)
}

pub fn classify_g_integral_with<R: Real>(
    g: &ScalarFunction<R>,
    theta: R,
    method: ClassifyMethod,
) -> Result<IntegralVerdict<R>> {
    g.validate()?;
    if !(theta > R::one()) {
        return Err(Error::Precondition("\u{3b8} must exceed 1".into()));
    }
    let integrand =
        |z: R| (g.theta_inf(theta, z).unwrap_or_else(|_| R::nan()) * z).powf(-R::lit(0.5));
    if method == ClassifyMethod::Auto {
        if let Some(sig) = g.tail_signature() {
            let (a, s) = (sig.exponent, sig.log_exponent);
            let diag = format!("closed form: g ~ \u{3b6}^{} log^{}", a.as_f64(), s.as_f64());
            // convergent iff a > 1, or a = 1 and s > 2
            return if a > R::one() || (a == R::one() && s > R::two()) {
                let v = numeric::improper_integral(&integrand, R::one(), R::lit(VALUE_REL_TOL))?;
                Ok(IntegralVerdict::convergent(v.value, diag))
            } else {
                Ok(IntegralVerdict::divergent(diag))
            };
        }
    }
    numeric_classify(&integrand, "g integrand (g_\u{3b8} \u{3b6})^{-1/2}")
}

/// Classifies `\u{222b}\u{2081}^\u{221e} d\u{3b6} / h_\u{3b8}(\u{3b6})`.
pub fn classify_h_integral<R: Real>(
    h: &ScalarFunction<R>,
    theta: R,
) -> Result<IntegralVerdict<R>> {
    classify_h_integral_with(h, theta, ClassifyMethod::Auto)
}

pub fn classify_h_integral_with<R: Real>(
    h: &ScalarFunction<R>,
    theta: R,
    method: ClassifyMethod,
) -> Result<IntegralVerdict<R>> {
    h.validate()?;
    if !(theta > R::one()) {
        return Err(Error::Precondition("\u{3b8} must exceed 1".into()));
    }
    let integrand = |z: R| h.theta_inf(theta, z).unwrap_or_else(|_| R::nan()).recip();
    if method == ClassifyMethod::Auto {
        if let Some(sig) = h.tail_signature() {
            let (a, s) = (sig.exponent, sig.log_exponent);
            let diag = format!("closed form: h ~ \u{3b6}^{} log^{}", a.as_f64(), s.as_f64());
            // convergent iff a > 1, or a = 1 and s > 1
            return if a > R::one() || (a == R::one() && s > R::one()) {
                let v = numeric::improper_integral(&integrand, R::one(), R::lit(VALUE_REL_TOL))?;
                Ok(IntegralVerdict::convergent(v.value, diag))
            } else {
                Ok(IntegralVerdict::divergent(diag))
            };
        }
    }
    numeric_classify(&integrand, "h integrand 1/h_\u{3b8}")
}

/// Numeric route: least-squares tail-exponent fit with an `Inconclusive`
/// refusal band around the critical exponent -1, then quadrature for the
/// value when convergent.
fn numeric_classify<R: Real, F: Fn(R) -> R>(
    integrand: &F,
    label: &str,
) -> Result<IntegralVerdict<R>> {
    let e = numeric::fit_tail_exponent(integrand, R::lit(1e5), R::lit(1e9), 9);
    let band = R::lit(CRITICAL_BAND);
    if !e.is_finite() && e != R::neg_infinity() {
        return Ok(IntegralVerdict::inconclusive(format!(
            "{label}: tail fit failed"
        )));
    }
    let diag = format!("numeric tail fit: exponent {:.4}", e.as_f64());
    if (e + R::one()).abs() < band {
        Ok(IntegralVerdict::inconclusive(format!(
            "{diag} within \u{b1}{CRITICAL_BAND} of critical"
        )))
    } else if e > -R::one() {
        Ok(IntegralVerdict::divergent(diag))
    } else {
        match numeric::improper_integral(integrand, R::one(), R::lit(VALUE_REL_TOL)) {
            Ok(v) => Ok(IntegralVerdict::convergent(v.value, diag)),
            Err(_) => Ok(IntegralVerdict::inconclusive(format!(
                "{diag}; quadrature disagreed with the fit"
            ))),
        }
    }
}

/// Tail signature of `q(r) = inf_{(0, r]} p`, derived from the signature of
/// the weight itself. A weight that does not decay makes `q` eventually
/// constant; a constant zero infimum classifies as convergent downstream.
fn q_tail_signature<R: Real>(p_radial: &ScalarFunction<R>) -> Result<Option<(R, R)>> {
    let sig = match p_radial.tail_signature() {
        Some(s) => s,
        None => return Ok(None),
    };
    if sig.exponent < R::zero() || (sig.exponent == R::zero() && sig.log_exponent < R::zero()) {
        // decaying tail eventually dominates the running infimum
        Ok(Some((sig.exponent, sig.log_exponent)))
    } else {
        // q settles to the global infimum
        let floor = p_radial.radial_inf(R::lit(1e6))?;
        if floor > R::zero() {
            Ok(Some((R::zero(), R::zero())))
        } else {
            // infimum is 0: r\u{b7}q(r) is eventually 0, integral finite
            Ok(Some((R::neg_infinity(), R::zero())))
        }
    }
}

/// Full three-integral verdict for a structure triple.
pub fn theorem_verdict<R: Real>(triple: &StructureTriple<R>) -> Result<StabilizationReport<R>> {
    theorem_verdict_with(triple, ClassifyMethod::Auto)
}

pub fn theorem_verdict_with<R: Real>(
    triple: &StructureTriple<R>,
    method: ClassifyMethod,
) -> Result<StabilizationReport<R>> {
    triple.validate()?;
    let q = classify_q_integral_with(&triple.p_radial, method)?;
    let g = classify_g_integral_with(&triple.g, triple.theta, method)?;
    let h = classify_h_integral_with(&triple.h, triple.theta, method)?;
    let verdict = if q.is_divergent() && g.is_convergent() && h.is_convergent() {
        Verdict::Stabilizes
    } else {
        Verdict::Unknown
    };
    Ok(StabilizationReport {
        q_integral: q,
        g_integral: g,
        h_integral: h,
        verdict,
        theta: triple.theta,
    })
}

/// Exponent check for the pure power-law family
/// `u_t = \u{394}u + b - c(x)|u|^{\u{3c3}-1}u` with
/// `|b| \u{2264} b\u{2080}(1+|x|)^k u^\u{3bc} |Du|^\u{3b1}` and
/// `c \u{2265} c\u{2080}(1+|x|)^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFamilyCheck<R> {
    pub passes: bool,
    /// Exponent of the induced spatial weight, `min{(l-k)/\u{3b1} - 1, l}`.
    pub p_exponent: R,
}

pub fn example_power_check<R: Real>(
    alpha: R,
    mu: R,
    sigma: R,
    k: R,
    l: R,
) -> Result<PowerFamilyCheck<R>> {
    if !(alpha > R::zero()) {
        return Err(Error::Precondition("\u{3b1} must be positive".into()));
    }
    let spatial = (l - k + alpha).min(l + R::two());
    let passes = spatial >= R::zero() && sigma > R::one().max(alpha + mu);
    let p_exponent = ((l - k) / alpha - R::one()).min(l);
    Ok(PowerFamilyCheck { passes, p_exponent })
}

/// Check for the log-perturbed family at the critical spatial exponents
/// (`min{l-k+\u{3b1}, l+2} = 0`): computes the log exponent `\u{3b3}` of the
/// induced weight `(1+|x|)^{-2} log^\u{3b3}(2+|x|)` and the verdict
/// `\u{3b3} \u{2265} -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSpatialCheck<R> {
    pub gamma: R,
    pub passes: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn example_critical_spatial_check<R: Real>(
    alpha: R,
    k: R,
    s: R,
    l: R,
    m: R,
    sigma: R,
    mu: R,
) -> Result<CriticalSpatialCheck<R>> {
    if !(alpha > R::zero()) {
        return Err(Error::Precondition("\u{3b1} must be positive".into()));
    }
    let lhs = (l - k + alpha).min(l + R::two());
    if lhs.abs() > R::lit(1e-12) {
        return Err(Error::Precondition(format!(
            "min{{l-k+\u{3b1}, l+2}} = {} is not 0: outside the critical manifold",
            lhs.as_f64()
        )));
    }
    let diff = (l + R::two()) - (l - k + alpha);
    let gamma = if diff < R::zero() {
        m
    } else if diff == R::zero() {
        ((m - s) / alpha).min(m)
    } else {
        (m - s) / alpha
    };
    let passes = gamma >= -R::one() && sigma > R::one().max(alpha + mu);
    Ok(CriticalSpatialCheck { gamma, passes })
}

/// Check for the log-strengthened absorption family at the critical state
/// exponent `\u{3c3} = max{1, \u{3b1}+\u{3bc}}`: returns the threshold the
/// log exponent `\u{3bd}` must exceed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAbsorptionCheck<R> {
    pub threshold: R,
    pub passes: bool,
}

pub fn example_critical_absorption_check<R: Real>(
    alpha: R,
    mu: R,
    nu: R,
    k: R,
    l: R,
) -> Result<CriticalAbsorptionCheck<R>> {
    if !(alpha > R::zero()) {
        return Err(Error::Precondition("\u{3b1} must be positive".into()));
    }
    let am = alpha + mu;
    let threshold = if am < R::one() {
        R::two()
    } else if am == R::one() {
        R::two().max(alpha)
    } else {
        alpha
    };
    let passes = nu > threshold && (l - k + alpha).min(l + R::two()) >= R::zero();
    Ok(CriticalAbsorptionCheck { threshold, passes })
}

/// Verdict for the gradient-absorption family `u_t = \u{394}u + b(x, Du) - c(x, u)`
/// with `|b| \u{2264} \u{3c6}(|Du|)`, `c\u{b7}sign u \u{2265} \u{3c8}(|u|)`:
/// builds `g = \u{3c8}`, `h = \u{3c6}\u{207b}\u{b9}(\u{3b5}\u{3c8})`, constant
/// weight `\u{3b5}`, and runs the three-integral verdict. The spatial integral
/// is divergent by construction.
pub fn example_gradient_absorption_check<R: Real>(
    phi: &ScalarFunction<R>,
    psi: &ScalarFunction<R>,
    epsilon: R,
    theta: R,
) -> Result<StabilizationReport<R>> {
    if !(epsilon > R::zero()) {
        return Err(Error::Precondition("\u{3b5} must be positive".into()));
    }
    let h = ScalarFunction::compose(
        ScalarFunction::inverse_of(phi.clone()),
        ScalarFunction::scaled_by(epsilon, psi.clone()),
    );
    h.validate()?;
    let triple = StructureTriple::new(
        psi.clone(),
        h,
        ScalarFunction::constant(epsilon),
        theta,
    )?;
    theorem_verdict(&triple)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = ScalarFunction<f64>;

    #[test]
    fn q_integral_cases() {
        // (1+r)^{-2}: logarithmically divergent
        let v = classify_q_integral(&F::spatial_power(1.0, -2.0)).unwrap();
        assert!(v.is_divergent(), "{v:?}");
        // (1+r)^{-3}: convergent
        let v = classify_q_integral(&F::spatial_power(1.0, -3.0)).unwrap();
        assert!(v.is_convergent(), "{v:?}");
        // (1+r)^{-2} log^{-2}(2+r): convergent
        let v = classify_q_integral(&F::spatial_power_log(1.0, -2.0, -2.0)).unwrap();
        assert!(v.is_convergent(), "{v:?}");
    }

    #[test]
    fn g_integral_cases() {
        let v = classify_g_integral(&F::power(1.0, 2.0), 2.0).unwrap();
        assert!(v.is_convergent());
        let val = v.value.unwrap();
        assert!((val - 4.0).abs() < 1e-5, "expected 4, got {val}");

        let v = classify_g_integral(&F::power(1.0, 1.0), 2.0).unwrap();
        assert!(v.is_divergent());

        let v = classify_g_integral(&F::power_log(1.0, 1.0, 3.0, 1.0), 2.0).unwrap();
        assert!(v.is_convergent());
    }

    #[test]
    fn h_integral_cases() {
        let v = classify_h_integral(&F::power(1.0, 2.0), 2.0).unwrap();
        assert!(v.is_convergent());
        let val = v.value.unwrap();
        assert!((val - 4.0).abs() < 1e-5, "expected 4, got {val}");

        let v = classify_h_integral(&F::power(1.0, 1.0), 2.0).unwrap();
        assert!(v.is_divergent());

        let v = classify_h_integral(&F::power_log(1.0, 1.0, 2.0, 1.0), 2.0).unwrap();
        assert!(v.is_convergent());
    }

    #[test]
    fn verdict_assembly() {
        let ok = StructureTriple::new(
            F::power(1.0, 2.0),
            F::power(1.0, 2.0),
            F::constant(1.0),
            2.0,
        )
        .unwrap();
        assert!(theorem_verdict(&ok).unwrap().stabilizes());

        let g_div = StructureTriple::new(
            F::power(1.0, 1.0),
            F::power(1.0, 2.0),
            F::constant(1.0),
            2.0,
        )
        .unwrap();
        assert!(!theorem_verdict(&g_div).unwrap().stabilizes());

        let q_conv = StructureTriple::new(
            F::power(1.0, 2.0),
            F::power(1.0, 2.0),
            F::spatial_power(1.0, -3.0),
            2.0,
        )
        .unwrap();
        assert!(!theorem_verdict(&q_conv).unwrap().stabilizes());
    }

    #[test]
    fn power_family_check() {
        let r = example_power_check(1.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        assert!(r.passes);
        assert_eq!(r.p_exponent, -1.0);

        assert!(!example_power_check(1.0, 0.0, 1.0, 0.0, 0.0).unwrap().passes);
        assert!(!example_power_check(1.0, 0.0, 2.0, 0.0, -3.0).unwrap().passes);
    }

    #[test]
    fn critical_spatial_check() {
        let r = example_critical_spatial_check(1.0, -1.0, 0.0, -2.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(r.gamma, 0.0);
        assert!(r.passes);

        let r = example_critical_spatial_check(2.0, 0.0, 2.0, -2.0, 1.0, 4.0, 0.0).unwrap();
        assert_eq!(r.gamma, -0.5);
        assert!(r.passes);

        let r = example_critical_spatial_check(1.0, 0.0, 3.0, -1.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(r.gamma, -3.0);
        assert!(!r.passes);

        assert!(example_critical_spatial_check(1.0, 5.0, 0.0, 0.0, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn critical_absorption_check() {
        let r = example_critical_absorption_check(0.5, 0.0, 3.0, 0.0, 0.0).unwrap();
        assert_eq!(r.threshold, 2.0);

        let r = example_critical_absorption_check(3.0, -2.0, 4.0, 0.0, 0.0).unwrap();
        assert_eq!(r.threshold, 3.0);

        let r = example_critical_absorption_check(1.0, 0.5, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(r.threshold, 1.0);
    }

    #[test]
    fn gradient_absorption_check() {
        let id = F::identity();
        let sq = F::power(1.0, 2.0);
        let cube = F::power(1.0, 3.0);

        let r = example_gradient_absorption_check(&id, &sq, 1.0, 2.0).unwrap();
        assert!(r.stabilizes(), "{r:?}");

        let r = example_gradient_absorption_check(&cube, &sq, 1.0, 2.0).unwrap();
        assert!(!r.stabilizes(), "h ~ \u{3b6}^{{2/3}} must fail: {r:?}");

        let r = example_gradient_absorption_check(&id, &id, 1.0, 2.0).unwrap();
        assert!(!r.stabilizes(), "g = \u{3b6} must fail: {r:?}");
    }

    #[test]
    fn report_json_schema() {
        let triple = StructureTriple::new(
            F::power(1.0, 2.0),
            F::power(1.0, 2.0),
            F::constant(1.0),
            2.0,
        )
        .unwrap();
        let report = theorem_verdict(&triple).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["verdict"], "stabilizes");
        assert_eq!(json["q"]["status"], "divergent");
        assert_eq!(json["g"]["status"], "convergent");
        assert!(json["g"]["value"].is_number());
        assert_eq!(json["theta"], 2.0);
    }
}
