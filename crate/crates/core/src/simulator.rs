//! Seeded Monte Carlo engine for solution chains on the circle.
//!
//! Every sample owns counter-derived random substreams keyed by
//! `(seed, purpose, sample index)`, so results are bit-identical whatever the
//! number of rayon workers. Noise for a sample is always drawn from `k = 0`
//! downwards, which couples runs of different depth on their common indices.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{self, ClassifyError, Trichotomy};
use crate::sequence::{MeasureSequence, SequenceError};
use crate::torus::{Coord, CyclicDistribution, MeasureError, TorusMeasure, TorusPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("sequence is classified {0}, not C2")]
    NotC2(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Purpose tag mixed into each substream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Noise = 1,
    Anchor = 2,
    MixtureAnchor = 3,
    Skeleton = 4,
}

/// Counter-keyed ChaCha stream for `(seed, purpose, index)`.
pub fn substream(seed: u64, purpose: Stream, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Seed for an independent companion run.
pub fn derived_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Law of the state `eta_{-N-1}` the chain starts from.
#[derive(Clone, Debug, PartialEq)]
pub enum Anchor {
    Deterministic(TorusPoint),
    Uniform,
    Law(TorusMeasure),
}

impl Anchor {
    fn draw(&self, seed: u64, index: u64) -> TorusPoint {
        match self {
            Anchor::Deterministic(v) => *v,
            Anchor::Uniform => TorusMeasure::Uniform.sample(&mut substream(seed, Stream::Anchor, index)),
            Anchor::Law(mu) => mu.sample(&mut substream(seed, Stream::Anchor, index)),
        }
    }

    /// `|E exp(2iπ p V)|`.
    pub fn character_modulus(&self, p: i64) -> f64 {
        match self {
            Anchor::Deterministic(_) => 1.0,
            Anchor::Uniform => {
                if p == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Anchor::Law(mu) => mu.fourier(p).norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub seq: MeasureSequence,
    /// Simulated noise indices are `-depth..=0`.
    pub depth: u64,
    pub anchor: Anchor,
    pub samples: usize,
    pub seed: u64,
}

impl ChainConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.depth == 0 {
            return Err(SimError::InvalidConfig("depth must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(SimError::InvalidConfig("samples must be at least 1".into()));
        }
        Ok(())
    }

    /// `|E exp(2iπ p eta_0)|` implied by the finite window and the anchor:
    /// the gap between the simulated law and the uniform one at frequency `p`.
    pub fn ecf_bias(&self, p: i64) -> f64 {
        window_product(&self.seq.window(self.depth), p, None) * self.anchor.character_modulus(p)
    }

    /// Bias of the cross character `exp(2iπ(p eta_0 - q xi_j))` under independence:
    /// the window product with the factor at `j` removed.
    pub fn cross_bias(&self, p: i64, j: i64) -> f64 {
        let idx = (j + self.depth as i64) as usize;
        window_product(&self.seq.window(self.depth), p, Some(idx)) * self.anchor.character_modulus(p)
    }
}

/// `prod |fourier(mu, p)|` over a window, optionally skipping one index.
pub fn window_product(window: &[TorusMeasure], p: i64, skip: Option<usize>) -> f64 {
    window
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, m)| m.fourier(p).norm())
        .product()
}

/// Solution paths over the window `[-N, 0]`, row-major by sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainEnsemble {
    config: ChainConfig,
    /// `xi_{-N}, ..., xi_0` per sample.
    noise: Vec<TorusPoint>,
    /// `eta_{-N-1}, ..., eta_0` per sample.
    states: Vec<TorusPoint>,
    anchors: Vec<TorusPoint>,
}

/// Outcome of the pathwise algebra checks on an ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathwiseReport {
    /// `eta_k == eta_{k-1} + xi_k` bit for bit.
    pub recursion_exact: bool,
    /// Max arc distance between `eta_0` and `anchor + sum xi_k`.
    pub telescope_error: f64,
    /// Max arc distance between `eta_k - eta_{k-1}` and `xi_k`.
    pub noise_recovery_error: f64,
}

impl PathwiseReport {
    pub fn holds(&self) -> bool {
        self.recursion_exact && self.telescope_error <= 1e-9 && self.noise_recovery_error <= 1e-12
    }
}

impl ChainEnsemble {
    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn samples(&self) -> usize {
        self.anchors.len()
    }

    pub fn depth(&self) -> u64 {
        self.config.depth
    }

    fn width(&self) -> usize {
        self.config.depth as usize + 1
    }

    pub fn anchors(&self) -> &[TorusPoint] {
        &self.anchors
    }

    /// `xi_k` of sample `i`, `-N <= k <= 0`.
    pub fn noise(&self, i: usize, k: i64) -> TorusPoint {
        self.noise[i * self.width() + (k + self.config.depth as i64) as usize]
    }

    /// `eta_k` of sample `i`, `-N-1 <= k <= 0`.
    pub fn state(&self, i: usize, k: i64) -> TorusPoint {
        self.states[i * (self.width() + 1) + (k + self.config.depth as i64 + 1) as usize]
    }

    pub fn noise_row(&self, i: usize) -> &[TorusPoint] {
        let w = self.width();
        &self.noise[i * w..(i + 1) * w]
    }

    pub fn state_row(&self, i: usize) -> &[TorusPoint] {
        let w = self.width() + 1;
        &self.states[i * w..(i + 1) * w]
    }

    pub fn noise_column(&self, k: i64) -> Vec<TorusPoint> {
        (0..self.samples()).map(|i| self.noise(i, k)).collect()
    }

    pub fn state_column(&self, k: i64) -> Vec<TorusPoint> {
        (0..self.samples()).map(|i| self.state(i, k)).collect()
    }

    pub fn eta0(&self) -> Vec<TorusPoint> {
        self.state_column(0)
    }

    pub fn pathwise_report(&self) -> PathwiseReport {
        let mut recursion_exact = true;
        let mut telescope_error: f64 = 0.0;
        let mut noise_recovery_error: f64 = 0.0;
        for i in 0..self.samples() {
            let states = self.state_row(i);
            let noise = self.noise_row(i);
            let mut sum = TorusPoint::ZERO;
            for (k, xi) in noise.iter().enumerate() {
                if states[k + 1] != states[k] + *xi {
                    recursion_exact = false;
                }
                noise_recovery_error = noise_recovery_error.max((states[k + 1] - states[k]).circular_distance(*xi));
                sum += *xi;
            }
            telescope_error = telescope_error.max(states[states.len() - 1].circular_distance(self.anchors[i] + sum));
        }
        PathwiseReport {
            recursion_exact,
            telescope_error,
            noise_recovery_error,
        }
    }
}

fn draw_noise_descending(window: &[TorusMeasure], rng: &mut ChaCha8Rng, row: &mut [TorusPoint]) {
    for idx in (0..window.len()).rev() {
        row[idx] = window[idx].sample(rng);
    }
}

/// Simulates `eta_k = xi_k + eta_{k-1}` for `k = -N..=0` from the anchor.
pub fn simulate(config: &ChainConfig) -> Result<ChainEnsemble, SimError> {
    config.validate()?;
    let anchors: Vec<TorusPoint> = (0..config.samples as u64)
        .into_par_iter()
        .map(|i| config.anchor.draw(config.seed, i))
        .collect();
    Ok(run_paths(config.clone(), anchors))
}

fn run_paths(config: ChainConfig, anchors: Vec<TorusPoint>) -> ChainEnsemble {
    let window = config.seq.window(config.depth);
    let width = window.len();
    let n = anchors.len();
    let mut noise = vec![TorusPoint::ZERO; n * width];
    let mut states = vec![TorusPoint::ZERO; n * (width + 1)];
    noise
        .par_chunks_mut(width)
        .zip(states.par_chunks_mut(width + 1))
        .zip(anchors.par_iter())
        .enumerate()
        .for_each(|(i, ((noise_row, state_row), anchor))| {
            let mut rng = substream(config.seed, Stream::Noise, i as u64);
            draw_noise_descending(&window, &mut rng, noise_row);
            state_row[0] = *anchor;
            for k in 0..width {
                state_row[k + 1] = state_row[k] + noise_row[k];
            }
        });
    ChainEnsemble {
        config,
        noise,
        states,
        anchors,
    }
}

/// Runs one path per given anchor, sample `i` starting from `anchors[i]`.
/// `anchor_law` is only recorded in the config echo.
pub fn simulate_with_anchors(
    seq: &MeasureSequence,
    depth: u64,
    anchor_law: Anchor,
    anchors: Vec<TorusPoint>,
    seed: u64,
) -> Result<ChainEnsemble, SimError> {
    let config = ChainConfig {
        seq: seq.clone(),
        depth,
        anchor: anchor_law,
        samples: anchors.len(),
        seed,
    };
    config.validate()?;
    Ok(run_paths(config, anchors))
}

/// Adds `g` to every state (noise untouched).
pub fn translate(ensemble: &ChainEnsemble, g: TorusPoint) -> ChainEnsemble {
    let mut out = ensemble.clone();
    out.states.par_iter_mut().for_each(|s| *s += g);
    out.anchors.iter_mut().for_each(|a| *a += g);
    out.config.anchor = match &ensemble.config.anchor {
        Anchor::Deterministic(v) => Anchor::Deterministic(*v + g),
        Anchor::Uniform => Anchor::Uniform,
        Anchor::Law(mu) => Anchor::Law(mu.shifted(&Coord::real(g.value()))),
    };
    out
}

/// The two sides of the integral representation of a mixed solution.
#[derive(Clone, Debug)]
pub struct MixturePair {
    /// One run with `eta_{-N-1} ~ mu_V`.
    pub mixed: ChainEnsemble,
    /// `v ~ mu_V` drawn first, then one path per `v` from `Deterministic(v)`.
    pub disintegrated: ChainEnsemble,
}

pub fn mixture_check(
    seq: &MeasureSequence,
    mu_v: &TorusMeasure,
    depth: u64,
    samples: usize,
    seed: u64,
) -> Result<MixturePair, SimError> {
    let mixed = simulate(&ChainConfig {
        seq: seq.clone(),
        depth,
        anchor: Anchor::Law(mu_v.clone()),
        samples,
        seed,
    })?;
    let seed_b = derived_seed(seed, 0x6d69_7874);
    let anchors: Vec<TorusPoint> = (0..samples as u64)
        .into_par_iter()
        .map(|i| mu_v.sample(&mut substream(seed_b, Stream::MixtureAnchor, i)))
        .collect();
    let disintegrated = simulate_with_anchors(seq, depth, Anchor::Law(mu_v.clone()), anchors, seed_b)?;
    Ok(MixturePair { mixed, disintegrated })
}

/// Truncated strong solution `alpha_{-L} + sum_{j=-L}^0 xi_j + g`.
#[derive(Clone, Debug)]
pub struct StrongLimit {
    pub samples: Vec<TorusPoint>,
    pub truncation: u64,
    pub centering: TorusPoint,
    /// `sum_{j < -L} sigma_j^2` on the real-line lift, when known in closed form.
    pub tail_variance: Option<f64>,
}

impl StrongLimit {
    /// Chebyshev bound on `P(|truncation error| > eps)`.
    pub fn error_bound(&self, eps: f64) -> f64 {
        match self.tail_variance {
            Some(v) => (v / (eps * eps)).min(1.0),
            None => 1.0,
        }
    }
}

pub fn strong_limit(
    seq: &MeasureSequence,
    g: TorusPoint,
    truncation: u64,
    samples: usize,
    seed: u64,
    scan_bound: u32,
) -> Result<StrongLimit, SimError> {
    let result = classifier::classify(seq, scan_bound)?;
    let spec = match result.case {
        Trichotomy::C2 { centering: Some(spec) } => spec,
        Trichotomy::C2 { centering: None } => {
            return Err(ClassifyError::NoConstructiveCentering("C2 sequence without closed-form means".into()).into())
        }
        other => return Err(SimError::NotC2(other.to_string())),
    };
    if samples == 0 {
        return Err(SimError::InvalidConfig("samples must be at least 1".into()));
    }
    let centering = spec.alpha(-(truncation as i64));
    let window = seq.window(truncation);
    let draws: Vec<TorusPoint> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Stream::Noise, i);
            let mut sum = centering + g;
            for m in window.iter().rev() {
                sum += m.sample(&mut rng);
            }
            sum
        })
        .collect();
    Ok(StrongLimit {
        samples: draws,
        truncation,
        centering,
        tail_variance: seq.variance_sum(truncation + 1, None),
    })
}

#[derive(Clone, Debug)]
pub struct CenteredProducts {
    pub k: i64,
    pub l: i64,
    pub samples: Vec<TorusPoint>,
    pub centering: TorusPoint,
    /// False when no closed-form centering exists and zero was used instead.
    pub constructive: bool,
}

/// Samples of `frac(xi_k + ... + xi_l + alpha_l)` for each `l` in `ls`, all
/// from the same noise draws.
pub fn centered_products_multi(
    seq: &MeasureSequence,
    k: i64,
    ls: &[i64],
    samples: usize,
    seed: u64,
) -> Result<Vec<CenteredProducts>, SimError> {
    if k > 0 {
        return Err(SequenceError::IndexOutOfDomain(k).into());
    }
    if let Some(bad) = ls.iter().find(|l| **l >= k) {
        return Err(SimError::InvalidConfig(format!("l = {bad} must be below k = {k}")));
    }
    let deepest = ls.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0);
    let window = seq.window(deepest);
    let spec = classifier::CenteringSpec::from_sequence(seq).ok();
    let centerings: Vec<TorusPoint> = ls
        .iter()
        .map(|&l| spec.as_ref().map_or(TorusPoint::ZERO, |s| s.alpha(l)))
        .collect();
    // per sample, partial sums at each requested depth
    let rows: Vec<Vec<TorusPoint>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Stream::Noise, i);
            let mut partial = vec![TorusPoint::ZERO; ls.len()];
            let mut sum = TorusPoint::ZERO;
            for (idx, m) in window.iter().enumerate().rev() {
                let j = idx as i64 - deepest as i64;
                let xi = m.sample(&mut rng);
                if j <= k {
                    sum += xi;
                }
                for (slot, &l) in ls.iter().enumerate() {
                    if l == j {
                        partial[slot] = sum;
                    }
                }
            }
            partial
        })
        .collect();
    Ok(ls
        .iter()
        .enumerate()
        .map(|(slot, &l)| CenteredProducts {
            k,
            l,
            samples: rows.iter().map(|r| r[slot] + centerings[slot]).collect(),
            centering: centerings[slot],
            constructive: spec.is_some(),
        })
        .collect())
}

pub fn centered_products(
    seq: &MeasureSequence,
    k: i64,
    l: i64,
    samples: usize,
    seed: u64,
) -> Result<CenteredProducts, SimError> {
    Ok(centered_products_multi(seq, k, &[l], samples, seed)?.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HaarVerdict {
    ConvergesToHaar,
    DoesNotConverge,
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionPowerRow {
    pub p: i64,
    pub modulus: f64,
    /// `|fourier(nu, p)| = 1`: this row never decays.
    pub modulus_one: bool,
    /// `|fourier(nu, p)| < 1` decided without tolerance.
    pub certified_below_one: bool,
}

impl ConvolutionPowerRow {
    pub fn value(&self, n: u32) -> f64 {
        if self.modulus_one {
            1.0
        } else {
            self.modulus.powi(n as i32)
        }
    }

    /// Smallest `n` with `|fourier|^n < threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<u64> {
        if self.modulus_one || self.modulus >= 1.0 {
            return None;
        }
        if self.modulus < threshold {
            return Some(1);
        }
        if self.modulus == 0.0 {
            return Some(1);
        }
        let n = (threshold.ln() / self.modulus.ln()).floor() as u64;
        (n.saturating_sub(1).max(1)..=n + 2).find(|&m| self.modulus.powf(m as f64) < threshold)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionPowerTable {
    pub n_max: u32,
    pub rows: Vec<ConvolutionPowerRow>,
    pub verdict: HaarVerdict,
}

/// Decay of `|fourier(nu, p)|^n`, the Fourier picture of `nu^{*n}`.
pub fn convolution_power(nu: &TorusMeasure, n_max: u32, p_max: u32) -> ConvolutionPowerTable {
    const DECAYED: f64 = 1e-6;
    let rows: Vec<ConvolutionPowerRow> = (1..=p_max as i64)
        .map(|p| {
            let verdict = nu.arithmetic_structure(p);
            ConvolutionPowerRow {
                p,
                modulus: nu.fourier(p).norm(),
                modulus_one: verdict.is_modulus_one(),
                certified_below_one: verdict.exact && !verdict.is_modulus_one(),
            }
        })
        .collect();
    let verdict = if rows.iter().any(|r| r.modulus_one) {
        HaarVerdict::DoesNotConverge
    } else if rows
        .iter()
        .all(|r| r.certified_below_one || r.value(n_max) < DECAYED)
    {
        HaarVerdict::ConvergesToHaar
    } else {
        HaarVerdict::Undecided
    };
    ConvolutionPowerTable { n_max, rows, verdict }
}

/// Discrete skeleton on the grid `t_k = 2^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeletonConfig {
    /// The chain starts from `{eta_{-K}} = 0`.
    pub depth: u64,
    pub samples: usize,
    pub seed: u64,
}

impl SkeletonConfig {
    pub fn time(k: i64) -> f64 {
        2f64.powi(k as i32)
    }

    /// Variance of `xi_k = (B_{t_{k+1}} - B_{t_k}) / (t_{k+1} - t_k)`.
    pub fn noise_variance(k: i64) -> f64 {
        1.0 / (Self::time(k + 1) - Self::time(k))
    }

    /// `|E exp(2iπ p {eta_0})|` left by starting from 0 at `-K`.
    pub fn ecf_bias(&self, p: i64) -> f64 {
        let total: f64 = (-(self.depth as i64) + 1..=0).map(Self::noise_variance).sum();
        let pf = p as f64;
        (-2.0 * std::f64::consts::PI.powi(2) * pf * pf * total).exp()
    }
}

#[derive(Clone, Debug)]
pub struct SkeletonSamples {
    pub config: SkeletonConfig,
    /// `{eta_0}` per sample.
    pub eta0: Vec<TorusPoint>,
    /// `xi_k` for `k = -K+1..=0`, row-major by sample.
    xi: Vec<f64>,
}

impl SkeletonSamples {
    pub fn steps(&self) -> usize {
        self.config.depth as usize
    }

    /// Real `xi_j` of sample `i`.
    pub fn xi(&self, i: usize, j: i64) -> f64 {
        self.xi[i * self.steps() + (j + self.config.depth as i64 - 1) as usize]
    }

    /// Brownian increment `B_{t_{j+1}} - B_{t_j}` of sample `i`.
    pub fn brownian_increment(&self, i: usize, j: i64) -> f64 {
        self.xi(i, j) * (SkeletonConfig::time(j + 1) - SkeletonConfig::time(j))
    }

    /// `xi_j mod 1` across samples.
    pub fn xi_column(&self, j: i64) -> Vec<TorusPoint> {
        (0..self.eta0.len()).map(|i| TorusPoint::new(self.xi(i, j))).collect()
    }
}

/// Simulates `eta_k = xi_k + {eta_{k-1}}` on the grid `t_k = 2^k`.
pub fn skeleton(config: SkeletonConfig) -> Result<SkeletonSamples, SimError> {
    if config.depth < 2 {
        return Err(SimError::InvalidConfig("skeleton depth must be at least 2".into()));
    }
    if config.samples == 0 {
        return Err(SimError::InvalidConfig("samples must be at least 1".into()));
    }
    let steps = config.depth as usize;
    let ks: Vec<i64> = (-(config.depth as i64) + 1..=0).collect();
    let mut xi = vec![0.0; config.samples * steps];
    let mut eta0 = vec![TorusPoint::ZERO; config.samples];
    xi.par_chunks_mut(steps)
        .zip(eta0.par_iter_mut())
        .enumerate()
        .for_each(|(i, (row, out))| {
            let mut rng = substream(config.seed, Stream::Skeleton, i as u64);
            for (idx, &k) in ks.iter().enumerate().rev() {
                let dt = SkeletonConfig::time(k + 1) - SkeletonConfig::time(k);
                let z: f64 = StandardNormal.sample(&mut rng);
                row[idx] = z * dt.sqrt() / dt;
            }
            let mut frac = TorusPoint::ZERO;
            for x in row.iter() {
                frac = TorusPoint::new(*x) + frac;
            }
            *out = frac;
        });
    Ok(SkeletonSamples { config, eta0, xi })
}

/// Exact law of `eta_0` from a deterministic on-grid anchor, when every
/// window measure is a rational atom measure. Returns `None` off-grid.
pub fn exact_cyclic_law(
    seq: &MeasureSequence,
    depth: u64,
    anchor: Coord,
    max_order: u64,
) -> Result<Option<CyclicDistribution>, SimError> {
    let window = seq.window(depth);
    let Some(anchor_order) = TorusMeasure::dirac(anchor).cyclic_order() else {
        return Ok(None);
    };
    let mut q = anchor_order;
    for m in &window {
        match m.cyclic_order() {
            Some(order) => q = crate::torus::lcm(q, order),
            None => return Ok(None),
        }
        if q > max_order {
            return Ok(None);
        }
    }
    let mut law = TorusMeasure::dirac(anchor).to_cyclic(q)?;
    for m in &window {
        law = law.convolve(&m.to_cyclic(q)?)?;
    }
    Ok(Some(law))
}

/// `E exp(2iπ p eta_0)` in closed form, for comparison with empirical values.
pub fn predicted_character(config: &ChainConfig, p: i64) -> Complex64 {
    let anchor = match &config.anchor {
        Anchor::Deterministic(v) => v.character(p),
        Anchor::Uniform => {
            if p == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        Anchor::Law(mu) => mu.fourier(p),
    };
    config
        .seq
        .window(config.depth)
        .iter()
        .fold(anchor, |acc, m| acc * m.fourier(p))
}
