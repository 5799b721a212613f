//! Verification and falsification engines for the convolution inequalities:
//! Young and its phase version, reverse Young, the sum-set estimate, entropic
//! convolution inequalities, entropy continuity, and smooth entropies.
//!
//! Every check produces an [`InequalityReport`] whose worst witness can be
//! re-evaluated from its serialized inputs alone.

mod bounds;
mod entropy;
mod smooth;
mod young;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, ElementJson};
use crate::convolution::{ConvolutionError, ConvolutionStructure, Elem, FnAlgebra, Spec};
use crate::fusion::Verdict;

pub use bounds::{continuity_bound, conv_continuity_bound, smooth_qeci_precondition, tlogt_bound};
pub use entropy::{
    continuity_sweep, conv_continuity_sweep, qeci_check, qeci_sweep, qeci_triple_check, qeci_weighted_check,
    qeci_weighted_sweep, reverse_young2_check,
    reverse_young2_sweep, sumset_check, sumset_sweep, AssociationOrder, REVERSE_YOUNG_TRIPLES,
};
pub use smooth::{
    project_feasible, smooth_conv_entropy, smooth_entropy, smooth_qeci_check, SmoothConvEntropy, SmoothEntropy,
    SMOOTH_ENTROPY_MAX_STARTS,
};
pub use young::{admissible_pairs, phase_young_check, young_ratio, young_sweep, SweepConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("outside the inequality's scope: {0}")]
    OutOfScope(String),
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("input lists are empty or of unequal length")]
    BadInputLists,
    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),
    #[error("witness has {got} inputs, expected {expected}")]
    WitnessArity { got: usize, expected: usize },
    #[error(transparent)]
    Convolution(#[from] ConvolutionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T, E = InequalityError> = std::result::Result<T, E>;

/// Anything carrying a convolution; FN algebras additionally expose their antipode.
pub trait ConvolutionAlgebra: Sync {
    fn structure(&self) -> &ConvolutionStructure;

    fn fn_algebra(&self) -> Option<&FnAlgebra> {
        None
    }

    fn spec(&self) -> &Arc<Spec> {
        self.structure().spec()
    }
}

impl ConvolutionAlgebra for ConvolutionStructure {
    fn structure(&self) -> &ConvolutionStructure {
        self
    }
}

impl ConvolutionAlgebra for FnAlgebra {
    fn structure(&self) -> &ConvolutionStructure {
        FnAlgebra::structure(self)
    }

    fn fn_algebra(&self) -> Option<&FnAlgebra> {
        Some(self)
    }
}

/// JSON has no infinity; exponents serialize `∞` as the string `"inf"`.
pub mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    fn parse<E: de::Error>(raw: Raw) -> Result<f64, E> {
        match raw {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => other.parse().map_err(|_| E::custom(format!("bad exponent {s:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(Raw::deserialize(d)?)
    }

    pub mod vec {
        use serde::ser::SerializeSeq;

        use super::*;

        pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
            struct One(f64);
            impl serde::Serialize for One {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    super::serialize(&self.0, s)
                }
            }
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for &x in xs {
                seq.serialize_element(&One(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Raw>::deserialize(d)?.into_iter().map(parse).collect()
        }
    }
}

/// Formats an exponent for labels.
pub(crate) fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// One concrete inequality instance: which inequality, at which parameters.
/// Together with the input elements it determines both sides exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Case {
    /// `‖x∗y‖_r ≤ k‖x‖_p‖y‖_q`; inputs `[x, y]`.
    Young {
        #[serde(with = "exponent")]
        p: f64,
        #[serde(with = "exponent")]
        q: f64,
        #[serde(with = "exponent")]
        r: f64,
    },
    /// `‖Σ xᵢ∗yᵢ‖_r ≤ max_t k‖Σ e^{2πijt}xⱼ‖_p‖Σ e^{−2πilt}yₗ‖_q`; inputs `[x₁..xₙ, y₁..yₙ]`.
    PhaseYoung {
        #[serde(with = "exponent")]
        p: f64,
        #[serde(with = "exponent")]
        q: f64,
        #[serde(with = "exponent")]
        r: f64,
        t_grid_size: usize,
    },
    /// `‖x^r∗y^r‖_r ≥ λ^{1/r−r} k‖x‖_t^r‖y‖_s^r`; inputs `[x, y]`.
    ReverseYoung2 { r: f64, s: f64, t: f64 },
    /// `S(R(x)∗R(y)) ≥ max{S(x), S(y)}`; inputs `[x, y]`.
    Sumset { rank_tol: f64 },
    /// `H(x∗y) ≥ max{H(x), H(y)}`; inputs `[x, y]`.
    Qeci,
    /// `H(x∗y) ≥ θH(x) + (1−θ)H(y)` at one fixed `θ`; inputs `[x, y]`. For
    /// convolutions without an antipode only a structure-specific `θ` is claimed.
    QeciWeighted { theta: f64 },
    /// `H` of the triple convolution against `max H(xᵢ)`; inputs `[x₁, x₂, x₃]`.
    QeciTriple { order: AssociationOrder },
    /// `|H(x) − H(y)| ≤ continuity_bound(d, λ, h, p, ‖x−y‖_p)`; inputs `[x, y]`.
    Continuity {
        #[serde(with = "exponent")]
        p: f64,
        h: f64,
    },
    /// `|H(x∗y) − H(z∗w)| ≤ conv_continuity_bound(…, ‖x−z‖_p, ‖y−w‖_q)`; inputs `[x, y, z, w]`.
    ConvContinuity {
        #[serde(with = "exponent")]
        p: f64,
        #[serde(with = "exponent")]
        q: f64,
        h: f64,
    },
    /// `H(z∗w) ≥ θ·H_ε(x) + (1−θ)·H_η(y) − budget`; inputs `[z, w]`. The smooth
    /// entropies are best-found lower bounds on the suprema and are carried as data.
    SmoothQeci {
        theta: f64,
        smooth_x: f64,
        smooth_y: f64,
        budget: f64,
    },
}

impl Case {
    pub fn label(&self) -> String {
        match self {
            Case::Young { p, q, r } => format!("young p={} q={} r={}", fmt_exp(*p), fmt_exp(*q), fmt_exp(*r)),
            Case::PhaseYoung { p, q, r, t_grid_size } => format!(
                "phase_young p={} q={} r={} grid={t_grid_size}",
                fmt_exp(*p),
                fmt_exp(*q),
                fmt_exp(*r)
            ),
            Case::ReverseYoung2 { r, s, t } => format!("reverse_young r={r} s={s} t={t}"),
            Case::Sumset { rank_tol } => format!("sumset rank_tol={rank_tol:e}"),
            Case::Qeci => "qeci".into(),
            Case::QeciWeighted { theta } => format!("qeci theta={theta}"),
            Case::QeciTriple { order } => format!("qeci_triple {order:?}").to_lowercase(),
            Case::Continuity { p, h } => format!("continuity p={} h={h}", fmt_exp(*p)),
            Case::ConvContinuity { p, q, h } => {
                format!("conv_continuity p={} q={} h={h}", fmt_exp(*p), fmt_exp(*q))
            }
            Case::SmoothQeci { theta, .. } => format!("smooth_qeci theta={theta}"),
        }
    }

    /// `true` for upper-bound inequalities `lhs ≤ rhs`.
    fn is_upper(&self) -> bool {
        matches!(
            self,
            Case::Young { .. } | Case::PhaseYoung { .. } | Case::Continuity { .. } | Case::ConvContinuity { .. }
        )
    }

    /// Young-type cases are judged by the ratio `lhs / rhs`.
    fn is_ratio(&self) -> bool {
        matches!(self, Case::Young { .. } | Case::PhaseYoung { .. })
    }

    /// Signed margin: nonnegative iff the inequality holds exactly.
    /// Ratio cases use `1 − lhs/rhs`; the rest use `rhs − lhs` (upper) or
    /// `lhs − rhs` (lower).
    pub fn slack(&self, lhs: f64, rhs: f64) -> f64 {
        if self.is_ratio() {
            if rhs > 0.0 {
                1.0 - lhs / rhs
            } else if lhs <= 0.0 {
                0.0
            } else {
                f64::MIN
            }
        } else if self.is_upper() {
            rhs - lhs
        } else {
            lhs - rhs
        }
    }

    /// Ratio cases pass iff `lhs/rhs ≤ 1 + tol`; the rest iff the slack is at
    /// least `−tol · max(1, |lhs|, |rhs|)`.
    pub fn passes(&self, lhs: f64, rhs: f64, tol: f64) -> bool {
        let s = self.slack(lhs, rhs);
        if self.is_ratio() {
            s >= -tol
        } else {
            s >= -tol * 1f64.max(lhs.abs()).max(rhs.abs())
        }
    }

    fn arity(&self, inputs: usize) -> Option<usize> {
        match self {
            Case::PhaseYoung { .. } => (inputs >= 2 && inputs % 2 == 0).then_some(inputs),
            Case::QeciTriple { .. } => Some(3),
            Case::ConvContinuity { .. } => Some(4),
            _ => Some(2),
        }
    }

    /// Both sides of the inequality at `inputs`.
    pub fn evaluate(&self, a: &dyn ConvolutionAlgebra, inputs: &[Elem]) -> Result<(f64, f64)> {
        match self.arity(inputs.len()) {
            Some(n) if n == inputs.len() => {}
            other => {
                return Err(InequalityError::WitnessArity {
                    got: inputs.len(),
                    expected: other.unwrap_or(2),
                })
            }
        }
        let (lhs, rhs) = match self {
            Case::Young { p, q, r } => young::young_sides(a.structure(), &inputs[0], &inputs[1], *p, *q, *r)?,
            Case::PhaseYoung { p, q, r, t_grid_size } => {
                let n = inputs.len() / 2;
                young::phase_sides(a.structure(), &inputs[..n], &inputs[n..], *p, *q, *r, *t_grid_size)?
            }
            Case::ReverseYoung2 { r, s, t } => {
                entropy::reverse_young2_sides(a.structure(), &inputs[0], &inputs[1], *r, *s, *t)?
            }
            Case::Sumset { rank_tol } => entropy::sumset_sides(a.structure(), &inputs[0], &inputs[1], *rank_tol)?,
            Case::Qeci => entropy::qeci_sides(a.structure(), &inputs[0], &inputs[1])?,
            Case::QeciWeighted { theta } => {
                entropy::qeci_weighted_sides(a.structure(), &inputs[0], &inputs[1], *theta)?
            }
            Case::QeciTriple { order } => entropy::qeci_triple_sides(a.structure(), &inputs[..3], *order)?,
            Case::Continuity { p, h } => entropy::continuity_sides(a.spec(), &inputs[0], &inputs[1], *p, *h)?,
            Case::ConvContinuity { p, q, h } => entropy::conv_continuity_sides(a.structure(), inputs, *p, *q, *h)?,
            Case::SmoothQeci {
                theta,
                smooth_x,
                smooth_y,
                budget,
            } => {
                let v = a.structure().convolve(&inputs[0], &inputs[1])?.entropy()?;
                (v, theta * smooth_x + (1.0 - theta) * smooth_y - budget)
            }
        };
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(InequalityError::NonFinite(self.label()));
        }
        Ok((lhs, rhs))
    }
}

/// Inputs and both sides of the worst instance found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityWitness {
    pub case: Case,
    pub inputs: Vec<ElementJson>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityWitness {
    /// Recomputes `(lhs, rhs, slack)` from the serialized inputs.
    pub fn reevaluate(&self, a: &dyn ConvolutionAlgebra) -> Result<(f64, f64, f64)> {
        let inputs = self
            .inputs
            .iter()
            .map(|j| j.to_element(a.spec()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let (l, r) = self.case.evaluate(a, &inputs)?;
        Ok((l, r, self.case.slack(l, r)))
    }
}

/// Slack statistics for one case over all its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub case: Case,
    pub label: String,
    pub count: usize,
    pub min_slack: f64,
    pub mean_slack: f64,
    /// Largest `lhs / rhs` (ratio cases only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub verdict: Verdict,
    /// How to read a pass (e.g. "no counterexample found within budget").
    pub semantics: String,
    pub tolerance: f64,
    pub seed: u64,
    pub evaluations: usize,
    pub cases: Vec<CaseStats>,
    /// Instance with the smallest slack over all cases (the first failing one,
    /// if any case fails).
    pub worst: Option<InequalityWitness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest `lhs / rhs` over ratio cases.
    pub fn max_ratio(&self) -> Option<f64> {
        self.cases.iter().filter_map(|c| c.max_ratio).reduce(f64::max)
    }

    pub fn min_slack(&self) -> f64 {
        self.cases.iter().map(|c| c.min_slack).fold(f64::INFINITY, f64::min)
    }
}

/// One evaluated instance.
pub(crate) struct Record {
    pub case: usize,
    pub inputs: Vec<Elem>,
    pub lhs: f64,
    pub rhs: f64,
}

pub(crate) const SEMANTICS_VERIFY: &str = "verification: pass means every sampled instance satisfied the inequality";

/// Evaluates `(case, inputs)` jobs in parallel, in order.
pub(crate) fn evaluate_all(
    a: &dyn ConvolutionAlgebra,
    cases: &[Case],
    jobs: Vec<(usize, Vec<Elem>)>,
) -> Result<Vec<Record>> {
    jobs.into_par_iter()
        .map(|(case, inputs)| {
            let (lhs, rhs) = cases[case].evaluate(a, &inputs)?;
            Ok(Record { case, inputs, lhs, rhs })
        })
        .collect()
}

/// Folds evaluated records into a report.
pub(crate) fn aggregate(
    name: &str,
    semantics: &str,
    cases: &[Case],
    records: &[Record],
    tol: f64,
    seed: u64,
) -> InequalityReport {
    let mut stats: Vec<CaseStats> = cases
        .iter()
        .map(|c| CaseStats {
            case: c.clone(),
            label: c.label(),
            count: 0,
            min_slack: f64::INFINITY,
            mean_slack: 0.0,
            max_ratio: c.is_ratio().then_some(0.0),
            passed: true,
        })
        .collect();
    // worst = first failing record, else smallest slack
    let mut worst: Option<(bool, f64, usize)> = None;
    for (idx, rec) in records.iter().enumerate() {
        let c = &cases[rec.case];
        let slack = c.slack(rec.lhs, rec.rhs);
        let ok = c.passes(rec.lhs, rec.rhs, tol);
        let st = &mut stats[rec.case];
        st.count += 1;
        st.min_slack = st.min_slack.min(slack);
        st.mean_slack += slack;
        st.passed &= ok;
        if let Some(m) = st.max_ratio.as_mut() {
            if rec.rhs > 0.0 {
                *m = m.max(rec.lhs / rec.rhs);
            }
        }
        let better = match worst {
            None => true,
            Some((wok, ws, _)) => (!ok && wok) || (ok == wok && slack < ws),
        };
        if better {
            worst = Some((ok, slack, idx));
        }
    }
    for st in &mut stats {
        if st.count > 0 {
            st.mean_slack /= st.count as f64;
        } else {
            st.min_slack = 0.0;
        }
    }
    let passed = stats.iter().all(|s| s.passed);
    let worst = worst.map(|(_, slack, idx)| {
        let rec = &records[idx];
        InequalityWitness {
            case: cases[rec.case].clone(),
            inputs: rec.inputs.iter().map(ElementJson::from_element).collect(),
            lhs: rec.lhs,
            rhs: rec.rhs,
            slack,
        }
    });
    InequalityReport {
        inequality: name.into(),
        verdict: if passed { Verdict::Pass } else { Verdict::Violation },
        semantics: semantics.into(),
        tolerance: tol,
        seed,
        evaluations: records.len(),
        cases: stats,
        worst,
        notes: Vec::new(),
    }
}

/// Rejects elements that are not PSD within the kernel tolerance.
pub(crate) fn require_psd(x: &Elem, what: &str) -> Result<()> {
    x.check_psd()
        .map_err(|e| InequalityError::Precondition(format!("{what} must be positive semidefinite ({e})")))
}

/// Rejects PSD elements whose trace is not `1/k` within `1e-10`.
pub(crate) fn require_normalized(x: &Elem, k: f64, what: &str) -> Result<()> {
    require_psd(x, what)?;
    let t = x.trace().re;
    if (t - 1.0 / k).abs() > 1e-10 {
        return Err(InequalityError::Precondition(format!(
            "{what} must satisfy ‖{what}‖₁ = 1/k = {} within 1e-10 (got {t}); normalize with normalize_trace",
            1.0 / k
        )));
    }
    Ok(())
}
