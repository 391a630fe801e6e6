//! The frequency subgroup `Z_mu = p_mu Z` and the three regimes it selects.
//!
//! `p` belongs to `Z_mu` when, for some `k`, `prod_{j <= k} |fourier(mu_j, p)|`
//! is positive. `p_mu = 0` gives uniqueness in law (C1), `p_mu = 1` the
//! existence of strong solutions (C2), and `p_mu >= 2` neither (C3).

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::sequence::{LogProductVerdict, MeanRule, MeasureSequence, TailRule};
use crate::torus::{Coord, TorusMeasure, TorusPoint};

pub const DEFAULT_SCAN_BOUND: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("scanned members {members:?} are not the multiples of {p_mu} up to {scan_bound}")]
    SubgroupViolation {
        members: Vec<u32>,
        p_mu: u32,
        scan_bound: u32,
    },
    #[error("no constructive centering: {0}")]
    NoConstructiveCentering(String),
    #[error("scan bound must be at least 1")]
    InvalidScanBound,
    #[error("centering index {0} must be <= 0")]
    PositiveIndex(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubgroupEvidence {
    pub scan_bound: u32,
    /// Members of `Z_mu` in `1..=scan_bound`, ascending.
    pub members: Vec<u32>,
    /// Zero encodes `Z_mu = {0}` (at least within the scan bound).
    pub p_mu: u32,
    pub per_p: BTreeMap<u32, LogProductVerdict>,
    pub fully_certified: bool,
    /// The tail rule proves that no `p >= 1` belongs to `Z_mu`.
    pub zero_beyond_scan: bool,
}

impl SubgroupEvidence {
    /// A `p_mu = 0` verdict that only holds up to the scan bound.
    pub fn zero_within_scan_only(&self) -> bool {
        self.p_mu == 0 && !self.zero_beyond_scan
    }
}

/// Deterministic centering `alpha_l = frac(-sum_{l <= j <= 0} m_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteringSpec {
    prefix_means: Vec<Coord>,
    tail: TailMeans,
}

#[derive(Clone, Debug, PartialEq)]
enum TailMeans {
    Constant(Coord),
    Rule(MeanRule),
}

impl CenteringSpec {
    pub fn from_sequence(seq: &MeasureSequence) -> Result<Self, ClassifyError> {
        let prefix_means = seq
            .prefix()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.mean_direction().ok_or_else(|| {
                    ClassifyError::NoConstructiveCentering(format!(
                        "prefix measure at k = -{i} has no mean direction"
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match seq.tail() {
            TailRule::WrappedGaussianTail { means, .. } => TailMeans::Rule(*means),
            TailRule::Iid(law) => match law {
                TorusMeasure::WrappedGaussian(g) => TailMeans::Constant(Coord::real(g.mean())),
                _ => TailMeans::Constant(law.point_mass().ok_or_else(|| {
                    ClassifyError::NoConstructiveCentering(format!(
                        "iid law {} has no closed-form centering",
                        law.describe()
                    ))
                })?),
            },
            TailRule::ScaledDensityTail(_) => {
                return Err(ClassifyError::NoConstructiveCentering(
                    "scaled density tails have no closed-form centering".into(),
                ))
            }
        };
        Ok(CenteringSpec { prefix_means, tail })
    }

    /// `alpha_l` as an exact coordinate when every mean involved is rational.
    pub fn alpha_coord(&self, l: i64) -> Coord {
        let depth = l.unsigned_abs();
        let k = self.prefix_means.len() as u64;
        let mut sum = Coord::zero();
        for m in self.prefix_means.iter().take((depth + 1).min(k) as usize) {
            sum = sum.plus(m);
        }
        if depth >= k {
            let tail_sum = match &self.tail {
                TailMeans::Constant(x) => x.times((depth - k + 1) as i64),
                TailMeans::Rule(MeanRule::Zero) => Coord::zero(),
                TailMeans::Rule(rule) => Coord::real(rule.sum_abs_range(k, depth)),
            };
            sum = sum.plus(&tail_sum);
        }
        sum.neg()
    }

    pub fn alpha(&self, l: i64) -> TorusPoint {
        self.alpha_coord(l).to_point()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trichotomy {
    /// Uniqueness in law; the only solution is the uniform one.
    C1,
    /// Strong solutions exist; `centering` is absent when no closed form is known.
    C2 { centering: Option<CenteringSpec> },
    /// Neither uniqueness nor a strong solution.
    C3 { p: u32 },
}

impl Trichotomy {
    pub fn label(&self) -> &'static str {
        match self {
            Trichotomy::C1 => "C1",
            Trichotomy::C2 { .. } => "C2",
            Trichotomy::C3 { .. } => "C3",
        }
    }
}

impl fmt::Display for Trichotomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trichotomy::C3 { p } => write!(f, "C3({p})"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrichotomyResult {
    pub case: Trichotomy,
    pub evidence: SubgroupEvidence,
}

/// Whether `p` lies in `Z_mu`, with the log-product verdict that decided it.
pub fn membership(seq: &MeasureSequence, p: u32) -> (bool, LogProductVerdict) {
    let verdict = seq.tail_log_product(p as i64);
    (verdict.is_finite(), verdict)
}

pub fn compute_p_mu(seq: &MeasureSequence, scan_bound: u32) -> Result<SubgroupEvidence, ClassifyError> {
    if scan_bound == 0 {
        return Err(ClassifyError::InvalidScanBound);
    }
    let verdicts: Vec<(u32, LogProductVerdict)> = (1..=scan_bound)
        .into_par_iter()
        .map(|p| (p, membership(seq, p).1))
        .collect();
    let members: Vec<u32> = verdicts
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(p, _)| *p)
        .collect();
    let p_mu = members.first().copied().unwrap_or(0);
    if let Some(multiples) = scan_bound.checked_div(p_mu) {
        let expected: Vec<u32> = (1..=multiples).map(|m| m * p_mu).collect();
        if members != expected {
            return Err(ClassifyError::SubgroupViolation {
                members,
                p_mu,
                scan_bound,
            });
        }
    }
    let fully_certified = verdicts.iter().all(|(_, v)| v.certified);
    Ok(SubgroupEvidence {
        scan_bound,
        members,
        p_mu,
        per_p: verdicts.into_iter().collect(),
        fully_certified,
        zero_beyond_scan: p_mu == 0 && seq.excludes_all_frequencies(),
    })
}

pub fn classify(seq: &MeasureSequence, scan_bound: u32) -> Result<TrichotomyResult, ClassifyError> {
    let evidence = compute_p_mu(seq, scan_bound)?;
    let case = match evidence.p_mu {
        0 => Trichotomy::C1,
        1 => Trichotomy::C2 {
            centering: CenteringSpec::from_sequence(seq).ok(),
        },
        p => Trichotomy::C3 { p },
    };
    Ok(TrichotomyResult { case, evidence })
}

/// `alpha_l = frac(-sum_{l <= j <= 0} m_j)` for families with a closed-form mean.
pub fn centering(seq: &MeasureSequence, l: i64) -> Result<TorusPoint, ClassifyError> {
    if l > 0 {
        return Err(ClassifyError::PositiveIndex(l));
    }
    Ok(CenteringSpec::from_sequence(seq)?.alpha(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::VarianceRule;
    use crate::torus::Coord;

    fn half_atoms() -> TorusMeasure {
        TorusMeasure::atoms(vec![(Coord::ratio(0, 1), 0.5), (Coord::ratio(1, 2), 0.5)]).unwrap()
    }

    fn wg_tail(means: MeanRule, variances: VarianceRule) -> MeasureSequence {
        MeasureSequence::new(vec![], TailRule::WrappedGaussianTail { means, variances }).unwrap()
    }

    #[test]
    fn membership_examples() {
        let c1 = MeasureSequence::iid(TorusMeasure::wrapped_gaussian(0.0, 0.5).unwrap());
        for p in [1, 2, 7, 64] {
            assert!(!membership(&c1, p).0);
        }
        let c2 = MeasureSequence::iid(TorusMeasure::dirac(Coord::ratio(1, 3)));
        assert!(membership(&c2, 1).0);
        let c3 = MeasureSequence::iid(half_atoms());
        assert!(!membership(&c3, 1).0);
        assert!(membership(&c3, 2).0);
    }

    #[test]
    fn p_mu_examples() {
        let ev = compute_p_mu(&MeasureSequence::iid(half_atoms()), 64).unwrap();
        assert_eq!(ev.p_mu, 2);
        assert_eq!(ev.members, (1..=32).map(|m| 2 * m).collect::<Vec<_>>());
        assert!(ev.fully_certified);

        let ev = compute_p_mu(&wg_tail(MeanRule::Zero, VarianceRule::Geometric { c: 0.25, r: 0.5 }), 64).unwrap();
        assert_eq!(ev.p_mu, 1);
        assert_eq!(ev.members, (1..=64).collect::<Vec<_>>());
    }

    #[test]
    fn irrational_atoms_have_trivial_subgroup() {
        let law = TorusMeasure::atoms(vec![
            (Coord::ratio(0, 1), 0.5),
            (Coord::real(2f64.sqrt()), 0.5),
        ])
        .unwrap();
        // oracle: |cos(π p √2)| stays below 1 - 1e-9 for every scanned p
        for p in 1..=64 {
            let modulus = (std::f64::consts::PI * p as f64 * 2f64.sqrt()).cos().abs();
            assert!(modulus < 1.0 - 1e-9);
        }
        let ev = compute_p_mu(&MeasureSequence::iid(law), 64).unwrap();
        assert_eq!(ev.p_mu, 0);
        assert!(!ev.fully_certified);
        assert!(ev.zero_within_scan_only());
    }

    #[test]
    fn classify_examples() {
        let c1 = classify(&MeasureSequence::iid(TorusMeasure::wrapped_gaussian(0.0, 0.5).unwrap()), 64).unwrap();
        assert_eq!(c1.case, Trichotomy::C1);
        assert!(c1.evidence.zero_beyond_scan);

        let third = MeasureSequence::iid(TorusMeasure::dirac(Coord::ratio(1, 3)));
        match classify(&third, 64).unwrap().case {
            Trichotomy::C2 { centering: Some(spec) } => {
                for l in -12..=0i64 {
                    let want = Coord::ratio(-(l.abs() + 1), 3);
                    assert_eq!(spec.alpha_coord(l), want);
                }
            }
            other => panic!("expected C2 with centering, got {other:?}"),
        }

        assert_eq!(
            classify(&MeasureSequence::iid(half_atoms()), 64).unwrap().case,
            Trichotomy::C3 { p: 2 }
        );
    }

    #[test]
    fn centering_examples() {
        let zero = wg_tail(MeanRule::Zero, VarianceRule::Constant(0.5));
        for l in [0, -1, -10] {
            assert_eq!(centering(&zero, l).unwrap(), TorusPoint::ZERO);
        }
        let third = MeasureSequence::iid(TorusMeasure::dirac(Coord::ratio(1, 3)));
        assert_eq!(centering(&third, -2).unwrap(), TorusPoint::ZERO);
        let drift = wg_tail(MeanRule::Constant(0.1), VarianceRule::Geometric { c: 0.25, r: 0.5 });
        assert!(centering(&drift, -4).unwrap().circular_distance(TorusPoint::HALF) < 1e-12);
        assert!(matches!(
            centering(&MeasureSequence::iid(half_atoms()), -1),
            Err(ClassifyError::NoConstructiveCentering(_))
        ));
        assert_eq!(centering(&third, 1), Err(ClassifyError::PositiveIndex(1)));
    }

    #[test]
    fn prefix_means_enter_centering() {
        let seq = MeasureSequence::new(
            vec![
                TorusMeasure::dirac(Coord::ratio(1, 4)),
                TorusMeasure::wrapped_gaussian(0.125, 0.01).unwrap(),
            ],
            TailRule::Iid(TorusMeasure::dirac(Coord::ratio(1, 8))),
        )
        .unwrap();
        // -(1/4 + 1/8 + 3 * 1/8) = -3/4
        let a = centering(&seq, -4).unwrap();
        assert!(a.circular_distance(TorusPoint::new(0.25)) < 1e-15);
    }

    #[test]
    fn gaussian_tails_never_reach_c3() {
        for variances in [
            VarianceRule::Constant(0.2),
            VarianceRule::Geometric { c: 1.0, r: 0.9 },
            VarianceRule::PowerLaw { c: 0.3, s: 0.5 },
            VarianceRule::PowerLaw { c: 0.3, s: 2.0 },
        ] {
            let r = classify(&wg_tail(MeanRule::Alternating(0.2), variances), 32).unwrap();
            let want = if variances.summable() { "C2" } else { "C1" };
            assert_eq!(r.case.label(), want, "{variances:?}");
        }
    }
}
