//! Pass/fail statistics on samples of the circle.
//!
//! All distributional checks are phrased through empirical characters
//! `(1/n) sum exp(2iπ p theta_i)`. Under the null each complex mean is close
//! to a centered Gaussian with total variance `1/n`, and the fixed threshold
//! `4/sqrt(n)` keeps the false alarm rate per test near `exp(-16)`.
//!
//! Sums are accumulated chunk by chunk in a fixed order so every report is a
//! bit-stable function of its input.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::classifier::{self, ClassifyError, Trichotomy};
use crate::sequence::MeasureSequence;
use crate::simulator::{self, Anchor, ChainConfig, ChainEnsemble, SimError};
use crate::torus::{CyclicDistribution, TorusPoint};

const CHUNK: usize = 8192;
/// Significance of the bucket chi-square test.
pub const BUCKET_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample arrays have different lengths ({0} vs {1})")]
    ShapeMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sequence is classified {found}, expected C3({expected})")]
    NotC3 { expected: u32, found: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// `4 / sqrt(n)`.
pub fn threshold(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}

fn ordered_mean<F>(n: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let partials: Vec<Complex64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&term).sum())
        .collect();
    partials.into_iter().sum::<Complex64>() / n as f64
}

/// Empirical character `(1/n) sum exp(2iπ p theta_i)`.
pub fn ecf(samples: &[TorusPoint], p: i64) -> Complex64 {
    ordered_mean(samples.len(), |i| samples[i].character(p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EcfEntry {
    pub p: i64,
    pub value: Complex64,
    pub modulus: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EcfReport {
    pub n: usize,
    pub entries: Vec<EcfEntry>,
    pub pass: bool,
}

impl EcfReport {
    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.modulus).fold(0.0, f64::max)
    }
}

pub fn uniformity(samples: &[TorusPoint], p_max: u32) -> Result<EcfReport, StatsError> {
    uniformity_with_bias(samples, p_max, |_| 0.0)
}

/// Uniformity check with a known model bias per frequency added to `4/sqrt(n)`.
pub fn uniformity_with_bias(
    samples: &[TorusPoint],
    p_max: u32,
    bias: impl Fn(i64) -> f64,
) -> Result<EcfReport, StatsError> {
    if samples.len() < 100 {
        return Err(StatsError::TooFewSamples {
            need: 100,
            got: samples.len(),
        });
    }
    let n = samples.len();
    let entries: Vec<EcfEntry> = (1..=p_max as i64)
        .map(|p| {
            let value = ecf(samples, p);
            let modulus = value.norm();
            let threshold = threshold(n) + bias(p);
            EcfEntry {
                p,
                value,
                modulus,
                threshold,
                pass: modulus <= threshold,
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    Ok(EcfReport { n, entries, pass })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCharEntry {
    pub p: i64,
    pub q: i64,
    pub j: i64,
    pub modulus: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCharReport {
    pub n: usize,
    pub entries: Vec<CrossCharEntry>,
    pub pass: bool,
}

impl CrossCharReport {
    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.modulus).fold(0.0, f64::max)
    }
}

/// A noise column `xi_j` across samples, tagged with its index `j`.
pub type NoiseColumn = (i64, Vec<TorusPoint>);

/// Cross characters `(1/n) sum exp(2iπ(p theta_i - q xi_{j,i}))`.
pub fn independence(
    theta: &[TorusPoint],
    noise: &[NoiseColumn],
    p_list: &[i64],
    q_list: &[i64],
) -> Result<CrossCharReport, StatsError> {
    independence_with_bias(theta, noise, p_list, q_list, |_, _| 0.0)
}

/// As [`independence`], with a model bias `bias(p, j)` added to each threshold.
pub fn independence_with_bias(
    theta: &[TorusPoint],
    noise: &[NoiseColumn],
    p_list: &[i64],
    q_list: &[i64],
    bias: impl Fn(i64, i64) -> f64,
) -> Result<CrossCharReport, StatsError> {
    let n = theta.len();
    if n == 0 {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    if let Some((_, col)) = noise.iter().find(|(_, c)| c.len() != n) {
        return Err(StatsError::ShapeMismatch(n, col.len()));
    }
    let mut entries = Vec::new();
    for &p in p_list {
        for &q in q_list {
            for (j, col) in noise {
                let value = ordered_mean(n, |i| theta[i].scale(p).character(1) * col[i].character(-q));
                let modulus = value.norm();
                let threshold = threshold(n) + bias(p, *j);
                entries.push(CrossCharEntry {
                    p,
                    q,
                    j: *j,
                    modulus,
                    threshold,
                    pass: modulus <= threshold,
                });
            }
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(CrossCharReport { n, entries, pass })
}

/// `|(1/n) sum exp(2iπ(p theta_i - sum_m q_m xi_{m,i}))|` over several noise
/// columns at once.
pub fn joint_character(
    theta: &[TorusPoint],
    p: i64,
    columns: &[&[TorusPoint]],
    qs: &[i64],
) -> Result<f64, StatsError> {
    let n = theta.len();
    if columns.len() != qs.len() {
        return Err(StatsError::InvalidArgument("one q per column".into()));
    }
    if let Some(col) = columns.iter().find(|c| c.len() != n) {
        return Err(StatsError::ShapeMismatch(n, col.len()));
    }
    if n == 0 {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    Ok(ordered_mean(n, |i| {
        let mut x = theta[i].scale(p);
        for (col, &q) in columns.iter().zip(qs) {
            x = x - col[i].scale(q);
        }
        x.character(1)
    })
    .norm())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketReport {
    pub p: u64,
    pub counts: Vec<u64>,
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Chi-square test that `floor(p theta)` is uniform on `{0, ..., p-1}`.
pub fn bucket_uniformity(samples: &[TorusPoint], p: u64) -> Result<BucketReport, StatsError> {
    if p < 2 {
        return Err(StatsError::InvalidArgument("bucket test needs p >= 2".into()));
    }
    let need = 100 * p as usize;
    if samples.len() < need {
        return Err(StatsError::TooFewSamples {
            need,
            got: samples.len(),
        });
    }
    let mut counts = vec![0u64; p as usize];
    for s in samples {
        counts[s.bucket(p) as usize] += 1;
    }
    let expected = samples.len() as f64 / p as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((p - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - BUCKET_SIGNIFICANCE);
    Ok(BucketReport {
        p,
        counts,
        statistic,
        critical,
        pass: statistic <= critical,
    })
}

#[derive(Clone, Debug)]
pub struct MeasurabilityOptions {
    pub depth: u64,
    pub samples: usize,
    pub seed: u64,
    /// Anchor of the first run.
    pub base: TorusPoint,
    /// Shift of the second anchor; `1/p` keeps it in the same coset.
    pub offset: TorusPoint,
    pub scan_bound: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurabilityReport {
    pub p: u32,
    /// Max over samples and `k` of the arc distance between `frac(p eta_k)` in the two runs.
    pub max_discrepancy: f64,
    pub pass: bool,
}

/// Runs the chain twice on the same noise from two anchors and compares
/// `frac(p eta_k)`; agreement shows it is a function of the noise alone.
pub fn measurability_check(
    seq: &MeasureSequence,
    p: u32,
    options: &MeasurabilityOptions,
) -> Result<MeasurabilityReport, StatsError> {
    match classifier::classify(seq, options.scan_bound)?.case {
        Trichotomy::C3 { p: found } if found == p => {}
        other => {
            return Err(StatsError::NotC3 {
                expected: p,
                found: other.to_string(),
            })
        }
    }
    let run = |anchor: TorusPoint| {
        simulator::simulate(&ChainConfig {
            seq: seq.clone(),
            depth: options.depth,
            anchor: Anchor::Deterministic(anchor),
            samples: options.samples,
            seed: options.seed,
        })
    };
    let a = run(options.base)?;
    let b = run(options.base + options.offset)?;
    let max_discrepancy = (0..a.samples())
        .into_par_iter()
        .map(|i| {
            a.state_row(i)
                .iter()
                .zip(b.state_row(i))
                .map(|(x, y)| x.scale(p as i64).circular_distance(y.scale(p as i64)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(MeasurabilityReport {
        p,
        max_discrepancy,
        pass: max_discrepancy <= 1e-9,
    })
}

/// `max_{1 <= p <= p_max} |ECF_A(p) - ECF_B(p)|`.
pub fn two_sample_ecf_distance(a: &[TorusPoint], b: &[TorusPoint], p_max: u32) -> f64 {
    (1..=p_max as i64)
        .map(|p| (ecf(a, p) - ecf(b, p)).norm())
        .fold(0.0, f64::max)
}

/// Empirical law on `(1/q)Z`, each sample rounded to its nearest grid point.
pub fn empirical_cyclic(samples: &[TorusPoint], q: usize) -> CyclicDistribution {
    let mut counts = vec![0u64; q];
    let half_cell = (u64::MAX / q as u64) / 2;
    for s in samples {
        let idx = TorusPoint::from_bits(s.bits().wrapping_add(half_cell)).bucket(q as u64);
        counts[idx as usize] += 1;
    }
    let n = samples.len() as f64;
    CyclicDistribution::new(counts.into_iter().map(|c| c as f64 / n).collect())
        .expect("empirical frequencies sum to one")
}

/// Joint witness that intersection and join of sigma-fields do not commute.
#[derive(Clone, Debug, PartialEq)]
pub struct NonInterchangeReport {
    /// `eta_0 = eta_j + sum_{j < k <= 0} xi_k` exactly for every `j` and sample.
    pub determinism_exact: bool,
    /// `eta_0` against individual noise values.
    pub independence: CrossCharReport,
    pub holds: bool,
}

pub fn non_interchange_witness(
    ensemble: &ChainEnsemble,
    js: &[i64],
    p_list: &[i64],
    q_list: &[i64],
) -> Result<NonInterchangeReport, StatsError> {
    let depth = ensemble.depth() as i64;
    let determinism_exact = (0..ensemble.samples()).into_par_iter().all(|i| {
        let eta0 = ensemble.state(i, 0);
        let mut acc = TorusPoint::ZERO;
        for j in (-depth - 1..0).rev() {
            acc += ensemble.noise(i, j + 1);
            if ensemble.state(i, j) + acc != eta0 {
                return false;
            }
        }
        true
    });
    let theta = ensemble.eta0();
    let columns: Vec<NoiseColumn> = js
        .iter()
        .filter(|j| **j >= -depth && **j <= 0)
        .map(|&j| (j, ensemble.noise_column(j)))
        .collect();
    let config = ensemble.config();
    let independence = independence_with_bias(&theta, &columns, p_list, q_list, |p, j| config.cross_bias(p, j))?;
    let holds = determinism_exact && independence.pass;
    Ok(NonInterchangeReport {
        determinism_exact,
        independence,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::MeasureSequence;
    use crate::simulator::substream;
    use crate::simulator::Stream;
    use crate::torus::{Coord, TorusMeasure};

    fn uniform_draws(n: usize, seed: u64) -> Vec<TorusPoint> {
        let mut rng = substream(seed, Stream::Noise, 0);
        (0..n).map(|_| TorusMeasure::Uniform.sample(&mut rng)).collect()
    }

    #[test]
    fn grid_cancels_exactly() {
        let n = 1000;
        let grid: Vec<TorusPoint> = (0..n).map(|i| Coord::ratio(i, n).to_point()).collect();
        let r = uniformity(&grid, 10).unwrap();
        assert!(r.pass);
        assert!(r.max_modulus() < 1e-12);
    }

    #[test]
    fn seeded_uniform_passes() {
        let draws = uniform_draws(100_000, 42);
        let r = uniformity(&draws, 10).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_modulus() < 0.0127);
    }

    #[test]
    fn point_mass_fails() {
        let same = vec![TorusPoint::new(0.7); 500];
        let r = uniformity(&same, 5).unwrap();
        assert!(!r.pass);
        assert!(r.entries.iter().all(|e| (e.modulus - 1.0).abs() < 1e-12));
        assert!(matches!(
            uniformity(&same[..50], 5),
            Err(StatsError::TooFewSamples { need: 100, got: 50 })
        ));
    }

    #[test]
    fn independence_controls() {
        let theta = uniform_draws(100_000, 1);
        let other = uniform_draws(100_000, 2);
        let r = independence(&theta, &[(0, other)], &[1, 2], &[1, 2]).unwrap();
        assert!(r.pass);
        let r = independence(&theta, &[(0, theta.clone())], &[1], &[1]).unwrap();
        assert!(!r.pass);
        assert!((r.max_modulus() - 1.0).abs() < 1e-12);
        assert!(matches!(
            independence(&theta, &[(0, vec![TorusPoint::ZERO; 3])], &[1], &[1]),
            Err(StatsError::ShapeMismatch(100_000, 3))
        ));
    }

    #[test]
    fn bucket_controls() {
        let draws = uniform_draws(10_000, 3);
        assert!(bucket_uniformity(&draws, 2).unwrap().pass);
        let stuck = vec![TorusPoint::new(0.1); 1000];
        let r = bucket_uniformity(&stuck, 2).unwrap();
        assert_eq!(r.counts, vec![1000, 0]);
        assert!(!r.pass);
        assert!(matches!(bucket_uniformity(&stuck, 1), Err(StatsError::InvalidArgument(_))));
        assert!(matches!(bucket_uniformity(&stuck[..150], 2), Err(StatsError::TooFewSamples { .. })));
        // chi-square critical value for one degree of freedom at 1e-3
        assert!((r.critical - 10.827_566_170_662_733).abs() < 1e-6);
    }

    #[test]
    fn ecf_distance_controls() {
        let a = uniform_draws(100_000, 5);
        let b = uniform_draws(100_000, 6);
        assert_eq!(two_sample_ecf_distance(&a, &a, 5), 0.0);
        assert!(two_sample_ecf_distance(&a, &b, 5) < 0.02);
        let zeros = vec![TorusPoint::ZERO; 100_000];
        assert!((two_sample_ecf_distance(&a, &zeros, 1) - 1.0).abs() < 0.02);
    }

    #[test]
    fn measurability_guard() {
        let seq = MeasureSequence::iid(TorusMeasure::dirac(Coord::ratio(1, 3)));
        let opts = MeasurabilityOptions {
            depth: 5,
            samples: 10,
            seed: 0,
            base: TorusPoint::ZERO,
            offset: TorusPoint::ZERO,
            scan_bound: 16,
        };
        assert!(matches!(
            measurability_check(&seq, 1, &opts),
            Err(StatsError::NotC3 { expected: 1, .. })
        ));
    }

    #[test]
    fn empirical_cyclic_rounds_to_grid() {
        let pts = vec![
            TorusPoint::new(0.249_999_999),
            TorusPoint::new(0.999_999_999_9),
            TorusPoint::new(0.5),
            TorusPoint::new(0.75),
        ];
        assert_eq!(empirical_cyclic(&pts, 4).weights(), &[0.25, 0.25, 0.25, 0.25]);
    }
}
