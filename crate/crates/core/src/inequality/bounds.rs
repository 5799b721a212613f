//! Explicit continuity constants, read off the displayed steps of the
//! continuity proofs rather than re-derived.

use super::{InequalityError, Result};

fn pre(msg: String) -> InequalityError {
    InequalityError::Precondition(msg)
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(pre(format!("exponent p = {p} must lie in [1, ∞]")))
    }
}

fn check_unit(name: &str, e: f64) -> Result<()> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(pre(format!("{name} = {e} must lie in [0, 1]")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(pre(format!("{name} = {v} must be positive and finite")))
    }
}

/// `d^{1−1/p}|ε log ε| + d^{1−1/p} ε (1 + (1−1/p)|log d| + |log d| + 2|log r|)`
/// with `r = 2h/λ`: bounds `|H(x) − H(y)|` for PSD `x, y` with traces at most
/// `h` and `‖x − y‖_p ≤ ε`.
pub fn continuity_bound(d: f64, lambda: f64, h: f64, p: f64, eps: f64) -> Result<f64> {
    check_positive("d", d)?;
    check_positive("λ", lambda)?;
    check_positive("h", h)?;
    check_exponent(p)?;
    check_unit("ε", eps)?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let a = d.powf(1.0 - inv_p);
    let r = 2.0 * h / lambda;
    let ld = d.ln().abs();
    Ok(a * (eps * eps.ln()).abs() + a * eps * (1.0 + (1.0 - inv_p) * ld + ld + 2.0 * r.ln().abs()))
}

/// Bound on `|H(x∗y) − H(z∗w)|` for PSD inputs with traces at most `h`,
/// `‖x − z‖_p ≤ ε`, `‖y − w‖_q ≤ η` and `ε + η ≤ 1/(kh(d+1))`.
///
/// Young and Hölder give `‖x∗y − z∗w‖₁ ≤ E = kh(d^{1−1/p}ε + d^{1−1/q}η) ≤ 1`,
/// and both convolutions have trace at most `kh²`; the single-entropy bound is
/// then applied with `p = 1`, distance `E`, and trace bound `kh²`.
pub fn conv_continuity_bound(d: f64, lambda: f64, h: f64, k: f64, p: f64, q: f64, eps: f64, eta: f64) -> Result<f64> {
    check_positive("d", d)?;
    check_positive("λ", lambda)?;
    check_positive("h", h)?;
    check_positive("k", k)?;
    check_exponent(p)?;
    check_exponent(q)?;
    check_unit("ε", eps)?;
    check_unit("η", eta)?;
    let limit = 1.0 / (k * h * (d + 1.0));
    if eps + eta > limit * (1.0 + 1e-12) {
        return Err(pre(format!(
            "ε+η ≤ 1/(kh(d+1)) = {limit} is required (got ε+η = {})",
            eps + eta
        )));
    }
    let exp = |s: f64| if s.is_infinite() { d } else { d.powf(1.0 - 1.0 / s) };
    let e = (k * h * (exp(p) * eps + exp(q) * eta)).min(1.0);
    continuity_bound(d, lambda, k * h * h, 1.0, e)
}

/// Checks the smooth entropic convolution precondition
/// `ε+η ≤ 1/((d+1)(1+k(d+1)))` and returns the bound.
pub fn smooth_qeci_precondition(d: f64, k: f64, eps: f64, eta: f64) -> Result<f64> {
    check_unit("ε", eps)?;
    check_unit("η", eta)?;
    let limit = 1.0 / ((d + 1.0) * (1.0 + k * (d + 1.0)));
    if eps + eta > limit * (1.0 + 1e-12) {
        return Err(pre(format!(
            "ε+η ≤ 1/((d+1)(1+k(d+1))) = {limit} is required (got ε+η = {}, d = {d}, k = {k})",
            eps + eta
        )));
    }
    Ok(limit)
}

/// Both sides of `|t log t − s log s| ≤ −(t−s) log(t−s) + 2|log r|(t−s)`
/// for `0 ≤ s ≤ t ≤ r`, `t − s ≤ r/2`.
pub fn tlogt_bound(s: f64, t: f64, r: f64) -> Result<(f64, f64)> {
    if !(0.0 <= s && s <= t && t <= r && t - s <= r / 2.0 && r.is_finite()) {
        return Err(pre(format!(
            "0 ≤ s ≤ t ≤ r and t − s ≤ r/2 are required (s = {s}, t = {t}, r = {r})"
        )));
    }
    let xl = crate::scalar::xlogx::<f64>;
    let g = t - s;
    Ok(((xl(t) - xl(s)).abs(), -xl(g) + 2.0 * r.ln().abs() * g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_bound_examples() {
        assert_eq!(continuity_bound(2.0, 1.0, 1.0, 1.0, 0.0).unwrap(), 0.0);
        let l2 = 2f64.ln();
        let want = 0.1 * 10f64.ln() + 0.1 * (1.0 + l2 + 2.0 * l2);
        assert!((continuity_bound(2.0, 1.0, 1.0, 1.0, 0.1).unwrap() - want).abs() < 1e-15);
        assert!(continuity_bound(2.0, 1.0, 1.0, 1.0, 1.5).is_err());
        assert!(continuity_bound(2.0, 1.0, 1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn tlogt_examples() {
        assert_eq!(tlogt_bound(0.3, 0.3, 1.0).unwrap(), (0.0, 0.0));
        let (l, r) = tlogt_bound(0.0, 0.5, 1.0).unwrap();
        assert!((l - 0.5 * 2f64.ln()).abs() < 1e-15 && (r - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(tlogt_bound(0.0, 0.6, 1.0).is_err());
    }

    #[test]
    fn smooth_precondition_names_the_bound() {
        let e = smooth_qeci_precondition(2.0, 1.0, 0.5, 0.5).unwrap_err();
        assert!(e.to_string().contains("ε+η ≤ 1/((d+1)(1+k(d+1)))"));
        assert!((smooth_qeci_precondition(2.0, 1.0, 0.0, 0.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    }
}
