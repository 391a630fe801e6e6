//! The evolution law `mu = (mu_k)_{k <= 0}` over the whole negative axis.
//!
//! A sequence is a finite prefix of explicit measures for `k = 0, -1, ...,
//! -(len - 1)` followed by a tail rule in closed form. Only families whose
//! Fourier log-products can be summed symbolically are representable.

use std::f64::consts::PI;

use thiserror::Error;

use crate::torus::{ArithmeticStructure, MeasureError, PiecewiseDensity, TorusMeasure, ZERO_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("index {0} is outside the negative time axis")]
    IndexOutOfDomain(i64),
    #[error("invalid tail rule: {0}")]
    InvalidTail(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Means `m_j` of a wrapped Gaussian tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanRule {
    Zero,
    Constant(f64),
    /// `m_j = m (-1)^|j|`.
    Alternating(f64),
}

impl MeanRule {
    pub fn mean_at(&self, j: i64) -> f64 {
        match *self {
            MeanRule::Zero => 0.0,
            MeanRule::Constant(m) => m,
            MeanRule::Alternating(m) => {
                if j.unsigned_abs().is_multiple_of(2) {
                    m
                } else {
                    -m
                }
            }
        }
    }

    /// `sum m_j` over `from <= |j| <= to`.
    pub fn sum_abs_range(&self, from: u64, to: u64) -> f64 {
        if to < from {
            return 0.0;
        }
        let count = to - from + 1;
        match *self {
            MeanRule::Zero => 0.0,
            MeanRule::Constant(m) => m * count as f64,
            MeanRule::Alternating(m) => {
                let evens = to / 2 - from.div_ceil(2) + 1;
                let odds = count - evens;
                m * (evens as f64 - odds as f64)
            }
        }
    }
}

/// Variances `sigma_j^2` of a wrapped Gaussian tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarianceRule {
    /// `c r^|j|`.
    Geometric { c: f64, r: f64 },
    /// `c / |j|^s`; the index `j = 0` uses `|j| = 1`.
    PowerLaw { c: f64, s: f64 },
    Constant(f64),
}

impl VarianceRule {
    fn validate(&self) -> Result<(), SequenceError> {
        let bad = |msg: &str| Err(SequenceError::InvalidTail(msg.to_string()));
        match *self {
            VarianceRule::Geometric { c, r } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad("geometric c must be positive");
                }
                if !(r > 0.0 && r < 1.0) {
                    return bad("geometric r must lie in (0, 1)");
                }
            }
            VarianceRule::PowerLaw { c, s } => {
                if !(c > 0.0 && c.is_finite()) || !(s > 0.0 && s.is_finite()) {
                    return bad("power law needs c > 0 and s > 0");
                }
            }
            VarianceRule::Constant(c) => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad("constant variance must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn variance_at(&self, j: i64) -> f64 {
        let a = j.unsigned_abs();
        match *self {
            VarianceRule::Geometric { c, r } => c * r.powf(a as f64),
            VarianceRule::PowerLaw { c, s } => c / (a.max(1) as f64).powf(s),
            VarianceRule::Constant(c) => c,
        }
    }

    /// Decided from the family alone.
    pub fn summable(&self) -> bool {
        match *self {
            VarianceRule::Geometric { .. } => true,
            VarianceRule::PowerLaw { s, .. } => s > 1.0,
            VarianceRule::Constant(_) => false,
        }
    }

    /// `sum sigma_j^2` over `|j| >= from`, infinite when not summable.
    pub fn tail_sum(&self, from: u64) -> f64 {
        if !self.summable() {
            return f64::INFINITY;
        }
        match *self {
            VarianceRule::Geometric { c, r } => c * r.powf(from as f64) / (1.0 - r),
            VarianceRule::PowerLaw { c, s } => {
                let head = if from == 0 { c } else { 0.0 };
                head + c * power_tail(s, from.max(1))
            }
            VarianceRule::Constant(_) => unreachable!(),
        }
    }

    /// `sum sigma_j^2` over `from <= |j| <= to`.
    pub fn range_sum(&self, from: u64, to: u64) -> f64 {
        if to < from {
            return 0.0;
        }
        match *self {
            VarianceRule::Constant(c) => c * (to - from + 1) as f64,
            VarianceRule::Geometric { c, r } => {
                c * (r.powf(from as f64) - r.powf((to + 1) as f64)) / (1.0 - r)
            }
            VarianceRule::PowerLaw { .. } if to - from <= 100_000 => {
                (from..=to).map(|a| self.variance_at(-(a as i64))).sum()
            }
            VarianceRule::PowerLaw { .. } => self.tail_sum(from) - self.tail_sum(to + 1),
        }
    }
}

/// `sum_{n >= n0} n^{-s}` for `s > 1` (Hurwitz zeta at integer offset):
/// a direct head plus an Euler-Maclaurin remainder.
fn power_tail(s: f64, n0: u64) -> f64 {
    const HEAD: u64 = 2_000;
    let big = (n0 + HEAD) as f64;
    let head: f64 = (n0..n0 + HEAD).map(|n| (n as f64).powf(-s)).sum();
    let rest = big.powf(1.0 - s) / (s - 1.0) + 0.5 * big.powf(-s) + s * big.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * big.powf(-s - 3.0) / 720.0;
    head + rest
}

/// Closed-form description of `mu_k` for every `k` beyond the prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum TailRule {
    Iid(TorusMeasure),
    WrappedGaussianTail { means: MeanRule, variances: VarianceRule },
    /// `mu_j` is the law of `frac(j * gamma)` with `gamma` distributed by the density.
    ScaledDensityTail(PiecewiseDensity),
}

impl TailRule {
    pub fn measure_at(&self, k: i64) -> TorusMeasure {
        match self {
            TailRule::Iid(law) => law.clone(),
            TailRule::WrappedGaussianTail { means, variances } => {
                TorusMeasure::wrapped_gaussian(means.mean_at(k), variances.variance_at(k))
                    .expect("validated tail parameters")
            }
            TailRule::ScaledDensityTail(density) => density.pushforward_scaled(k),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TailRule::Iid(law) => format!("iid {}", law.describe()),
            TailRule::WrappedGaussianTail { means, variances } => {
                format!("wrapped gaussian tail, means {means:?}, variances {variances:?}")
            }
            TailRule::ScaledDensityTail(d) => {
                format!("scaled density tail ({} pieces)", d.densities().len())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogProductStatus {
    /// `sum -log|fourier(mu_j, p)|` over the nonzero factors converges.
    Finite { tail_log_sum: f64, zero_factor_count: usize },
    Infinite,
    InfinitelyManyZeroFactors,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogProductVerdict {
    pub status: LogProductStatus,
    /// False when a floating-point tolerance took part in the decision.
    pub certified: bool,
}

impl LogProductVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self.status, LogProductStatus::Finite { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSequence {
    prefix: Vec<TorusMeasure>,
    tail: TailRule,
}

impl MeasureSequence {
    /// `prefix[i]` is `mu_{-i}`; the tail rule covers `k < -(prefix.len() - 1)`.
    pub fn new(prefix: Vec<TorusMeasure>, tail: TailRule) -> Result<Self, SequenceError> {
        match &tail {
            TailRule::WrappedGaussianTail { means, variances } => {
                variances.validate()?;
                let m = match *means {
                    MeanRule::Zero => 0.0,
                    MeanRule::Constant(m) | MeanRule::Alternating(m) => m,
                };
                if !m.is_finite() {
                    return Err(SequenceError::InvalidTail("mean must be finite".into()));
                }
            }
            TailRule::Iid(_) | TailRule::ScaledDensityTail(_) => {}
        }
        Ok(MeasureSequence { prefix, tail })
    }

    pub fn iid(law: TorusMeasure) -> Self {
        MeasureSequence {
            prefix: Vec::new(),
            tail: TailRule::Iid(law),
        }
    }

    pub fn prefix(&self) -> &[TorusMeasure] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// Number of prefix entries; the tail starts at `|k| = prefix_len()`.
    pub fn prefix_len(&self) -> u64 {
        self.prefix.len() as u64
    }

    pub fn measure_at(&self, k: i64) -> Result<TorusMeasure, SequenceError> {
        if k > 0 {
            return Err(SequenceError::IndexOutOfDomain(k));
        }
        Ok(match self.prefix.get(k.unsigned_abs() as usize) {
            Some(m) => m.clone(),
            None => self.tail.measure_at(k),
        })
    }

    /// `mu_{-depth}, ..., mu_0` in ascending time order.
    pub fn window(&self, depth: u64) -> Vec<TorusMeasure> {
        (-(depth as i64)..=0)
            .map(|k| self.measure_at(k).expect("k <= 0"))
            .collect()
    }

    /// Decides whether `sum_{j <= 0} -log|fourier(mu_j, p)|` converges once
    /// finitely many zero factors are set aside.
    pub fn tail_log_product(&self, p: i64) -> LogProductVerdict {
        assert!(p >= 1, "tail_log_product needs p >= 1");
        let mut prefix_sum = 0.0;
        let mut zeros = 0usize;
        for m in &self.prefix {
            let modulus = m.fourier(p).norm();
            if modulus <= ZERO_TOLERANCE {
                zeros += 1;
            } else {
                prefix_sum -= modulus.ln();
            }
        }
        let start = self.prefix_len();
        let finite = |extra: f64, certified| LogProductVerdict {
            status: LogProductStatus::Finite {
                tail_log_sum: prefix_sum + extra,
                zero_factor_count: zeros,
            },
            certified,
        };
        match &self.tail {
            TailRule::Iid(law) => {
                let verdict = law.arithmetic_structure(p);
                match verdict.structure {
                    ArithmeticStructure::ModulusOne(_) => finite(0.0, verdict.exact),
                    ArithmeticStructure::StrictlyLess => {
                        let status = if law.fourier(p).norm() <= ZERO_TOLERANCE {
                            LogProductStatus::InfinitelyManyZeroFactors
                        } else {
                            LogProductStatus::Infinite
                        };
                        LogProductVerdict {
                            status,
                            certified: verdict.exact,
                        }
                    }
                }
            }
            TailRule::WrappedGaussianTail { variances, .. } => {
                if variances.summable() {
                    let pf = p as f64;
                    finite(2.0 * PI * PI * pf * pf * variances.tail_sum(start), true)
                } else {
                    LogProductVerdict {
                        status: LogProductStatus::Infinite,
                        certified: true,
                    }
                }
            }
            TailRule::ScaledDensityTail(density) => {
                // |phi(jp)| <= V / (2π|jp|) with V the jump variation, so
                // infinitely many factors are at most 1/2; V = 0 means the
                // density is flat and every factor with j != 0 vanishes.
                let status = if density.jump_variation() == 0.0 {
                    LogProductStatus::InfinitelyManyZeroFactors
                } else {
                    LogProductStatus::Infinite
                };
                LogProductVerdict {
                    status,
                    certified: true,
                }
            }
        }
    }

    /// True when the tail rule excludes every `p >= 1` from `Z_mu` by a
    /// symbolic argument, independent of any scan bound.
    pub fn excludes_all_frequencies(&self) -> bool {
        match &self.tail {
            TailRule::Iid(law) => law.is_absolutely_continuous(),
            TailRule::WrappedGaussianTail { variances, .. } => !variances.summable(),
            TailRule::ScaledDensityTail(_) => true,
        }
    }

    /// Sum of the real-line variances of `mu_j` for `from <= |j| <= to`,
    /// when every such law is a point mass or a wrapped Gaussian.
    pub fn variance_sum(&self, from: u64, to: Option<u64>) -> Option<f64> {
        fn lift_variance(m: &TorusMeasure) -> Option<f64> {
            match m {
                TorusMeasure::WrappedGaussian(g) => Some(g.variance()),
                _ if m.point_mass().is_some() => Some(0.0),
                _ => None,
            }
        }
        let start = self.prefix_len();
        let prefix_end = to.map_or(start, |t| t.saturating_add(1).min(start));
        let mut total = 0.0;
        for a in from..prefix_end {
            total += lift_variance(&self.prefix[a as usize])?;
        }
        let tail_from = from.max(start);
        if let Some(t) = to {
            if t < tail_from {
                return Some(total);
            }
        }
        let tail = match &self.tail {
            TailRule::Iid(law) => {
                let v = lift_variance(law)?;
                match to {
                    Some(t) => v * (t - tail_from + 1) as f64,
                    None if v == 0.0 => 0.0,
                    None => f64::INFINITY,
                }
            }
            TailRule::WrappedGaussianTail { variances, .. } => match to {
                Some(t) => variances.range_sum(tail_from, t),
                None => variances.tail_sum(tail_from),
            },
            TailRule::ScaledDensityTail(_) => return None,
        };
        Some(total + tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Coord;

    fn half_atoms() -> TorusMeasure {
        TorusMeasure::atoms(vec![(Coord::ratio(0, 1), 0.5), (Coord::ratio(1, 2), 0.5)]).unwrap()
    }

    fn geometric() -> MeasureSequence {
        MeasureSequence::new(
            vec![],
            TailRule::WrappedGaussianTail {
                means: MeanRule::Zero,
                variances: VarianceRule::Geometric { c: 0.25, r: 0.5 },
            },
        )
        .unwrap()
    }

    #[test]
    fn measure_at_examples() {
        let seq = MeasureSequence::new(
            vec![TorusMeasure::dirac(Coord::Real(0.1))],
            TailRule::Iid(TorusMeasure::Uniform),
        )
        .unwrap();
        assert_eq!(seq.measure_at(0).unwrap(), TorusMeasure::dirac(Coord::Real(0.1)));
        assert_eq!(seq.measure_at(-7).unwrap(), TorusMeasure::Uniform);
        assert_eq!(seq.measure_at(1), Err(SequenceError::IndexOutOfDomain(1)));
        assert_eq!(
            geometric().measure_at(-3).unwrap(),
            TorusMeasure::wrapped_gaussian(0.0, 0.031_25).unwrap()
        );
    }

    #[test]
    fn log_product_examples() {
        let v = MeasureSequence::iid(TorusMeasure::dirac(Coord::ratio(1, 3))).tail_log_product(5);
        assert_eq!(
            v.status,
            LogProductStatus::Finite {
                tail_log_sum: 0.0,
                zero_factor_count: 0
            }
        );
        assert!(v.certified);

        let constant = MeasureSequence::new(
            vec![],
            TailRule::WrappedGaussianTail {
                means: MeanRule::Zero,
                variances: VarianceRule::Constant(0.5),
            },
        )
        .unwrap();
        let v = constant.tail_log_product(1);
        assert_eq!(v.status, LogProductStatus::Infinite);
        assert!(v.certified);

        match geometric().tail_log_product(1).status {
            LogProductStatus::Finite {
                tail_log_sum,
                zero_factor_count,
            } => {
                assert!((tail_log_sum - PI * PI).abs() < 1e-12);
                assert_eq!(zero_factor_count, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prefix_zero_factors_are_counted() {
        let seq = MeasureSequence::new(
            vec![half_atoms()],
            TailRule::Iid(TorusMeasure::dirac(Coord::ratio(1, 3))),
        )
        .unwrap();
        match seq.tail_log_product(1).status {
            LogProductStatus::Finite { zero_factor_count, .. } => assert_eq!(zero_factor_count, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iid_zero_character_gives_zero_factors() {
        let v = MeasureSequence::iid(half_atoms()).tail_log_product(1);
        assert_eq!(v.status, LogProductStatus::InfinitelyManyZeroFactors);
        assert!(v.certified);
    }

    #[test]
    fn power_law_sums() {
        let rule = VarianceRule::PowerLaw { c: 1.0, s: 2.0 };
        // sum_{n>=1} 1/n^2 = π²/6, plus c at j = 0
        assert!((rule.tail_sum(0) - (1.0 + PI * PI / 6.0)).abs() < 1e-12);
        assert!((rule.tail_sum(1) - PI * PI / 6.0).abs() < 1e-12);
        let direct: f64 = (3..=10u64).map(|n| 1.0 / (n * n) as f64).sum();
        assert!((rule.range_sum(3, 10) - direct).abs() < 1e-15);
        assert!(!VarianceRule::PowerLaw { c: 1.0, s: 1.0 }.summable());
    }

    #[test]
    fn alternating_mean_sums() {
        let rule = MeanRule::Alternating(0.1);
        for (from, to) in [(0u64, 0u64), (0, 5), (1, 4), (3, 9), (2, 2)] {
            let direct: f64 = (from..=to).map(|a| rule.mean_at(-(a as i64))).sum();
            assert!((rule.sum_abs_range(from, to) - direct).abs() < 1e-15, "{from}..{to}");
        }
    }

    #[test]
    fn geometric_tail_variance() {
        let tv = geometric().variance_sum(21, None).unwrap();
        assert!((tv - 0.25 * 2f64.powi(-20)).abs() < 1e-20);
        let window = geometric().variance_sum(21, Some(30)).unwrap();
        let direct: f64 = (21..=30).map(|a| 0.25 * 0.5f64.powi(a)).sum();
        assert!((window - direct).abs() < 1e-20);
    }

    #[test]
    fn invalid_tails_are_rejected() {
        let bad = MeasureSequence::new(
            vec![],
            TailRule::WrappedGaussianTail {
                means: MeanRule::Zero,
                variances: VarianceRule::Geometric { c: 1.0, r: 1.5 },
            },
        );
        assert!(matches!(bad, Err(SequenceError::InvalidTail(_))));
    }
}
