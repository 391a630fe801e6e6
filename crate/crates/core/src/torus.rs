//! Probability measures on the circle `T = [0, 1)`.
//!
//! The group is written additively: a point `x` stands for the unit complex
//! number `exp(2iπx)` and the group product becomes addition mod 1.
//!
//! Points are stored in 64-bit fixed point (`x = bits / 2^64`), so addition,
//! negation and integer scaling are exact and associative. Measures come in a
//! handful of closed-form families whose Fourier coefficients are known
//! exactly; atom locations may carry an exact rational value so that
//! arithmetic structure can be decided without tolerances.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Tolerance for weights and densities summing to one.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Tolerance under which two real atom locations are considered equal mod 1.
pub const MERGE_TOLERANCE: f64 = 1e-12;
/// Below this modulus a Fourier coefficient is treated as a zero factor.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Inexact `|fourier| >= 1 - ARITHMETIC_TOLERANCE` counts as modulus one.
pub const ARITHMETIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom list is empty")]
    EmptyAtoms,
    #[error("atom weights must be positive and finite (got {0})")]
    NonPositiveWeight(f64),
    #[error("weights sum to {0}, expected 1")]
    WeightsDoNotSumToOne(f64),
    #[error("atom locations {0} and {1} coincide mod 1")]
    DuplicateLocation(f64, f64),
    #[error("variance must be finite and nonnegative (got {0})")]
    InvalidVariance(f64),
    #[error("value must be finite (got {0})")]
    NonFinite(f64),
    #[error("breakpoints must start at 0, end at 1 and increase strictly")]
    InvalidBreaks,
    #[error("expected {expected} densities for the given breakpoints, got {got}")]
    DensityCountMismatch { expected: usize, got: usize },
    #[error("densities must be finite and nonnegative (got {0})")]
    NegativeDensity(f64),
    #[error("density integrates to {0}, expected 1")]
    DensityMass(f64),
    #[error("no closed-form convolution for {0} * {1}")]
    IncompatiblePair(&'static str, &'static str),
    #[error("{0} is not supported on the cyclic grid (1/{1})Z")]
    NotSupportedOnCyclicGrid(String, u64),
    #[error("cyclic orders differ: {0} vs {1}")]
    CyclicOrderMismatch(usize, usize),
    #[error("cyclic order must be positive")]
    ZeroOrder,
}

/// A point of the circle, held as `bits / 2^64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TorusPoint(u64);

impl TorusPoint {
    pub const ZERO: TorusPoint = TorusPoint(0);
    pub const HALF: TorusPoint = TorusPoint(1 << 63);

    /// Reduces any finite real mod 1.
    pub fn new(x: f64) -> Self {
        let f = x - x.floor();
        let scaled = (f * TWO_POW_64).round();
        if !scaled.is_finite() || !(0.0..TWO_POW_64).contains(&scaled) {
            TorusPoint(0)
        } else {
            TorusPoint(scaled as u64)
        }
    }

    /// Nearest fixed-point representative of the rational `r` mod 1.
    pub fn from_ratio(r: &Rational64) -> Self {
        let (num, den) = frac_parts(r);
        let scaled = ((num as u128) << 64) / den as u128;
        let rem = ((num as u128) << 64) % den as u128;
        let rounded = if 2 * rem >= den as u128 { scaled + 1 } else { scaled };
        TorusPoint(rounded as u64)
    }

    pub const fn from_bits(bits: u64) -> Self {
        TorusPoint(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Representative in `[0, 1)`; uses the top 53 bits so it never rounds up to 1.
    pub fn value(self) -> f64 {
        (self.0 >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn signed_value(self) -> f64 {
        (self.0 as i64) as f64 / TWO_POW_64
    }

    /// `frac(p * x)`, exact.
    pub fn scale(self, p: i64) -> Self {
        TorusPoint(self.0.wrapping_mul(p as u64))
    }

    /// Arc distance to `other`, in `[0, 1/2]`.
    pub fn circular_distance(self, other: TorusPoint) -> f64 {
        (self - other).signed_value().abs()
    }

    /// `exp(2iπ p x)`.
    pub fn character(self, p: i64) -> Complex64 {
        let angle = 2.0 * PI * self.scale(p).signed_value();
        let (s, c) = angle.sin_cos();
        Complex64::new(c, s)
    }

    /// Index of the bucket `floor(q x)` among `q` equal arcs.
    pub fn bucket(self, q: u64) -> u64 {
        ((self.0 as u128 * q as u128) >> 64) as u64
    }
}

impl Add for TorusPoint {
    type Output = TorusPoint;
    fn add(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint(self.0.wrapping_add(rhs.0))
    }
}

impl AddAssign for TorusPoint {
    fn add_assign(&mut self, rhs: TorusPoint) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl Sub for TorusPoint {
    type Output = TorusPoint;
    fn sub(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for TorusPoint {
    type Output = TorusPoint;
    fn neg(self) -> TorusPoint {
        TorusPoint(self.0.wrapping_neg())
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusPoint({})", self.value())
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Numerator and denominator of `frac(r)`, with `0 <= num < den`.
fn frac_parts(r: &Rational64) -> (i128, i128) {
    let num = *r.numer() as i128;
    let den = *r.denom() as i128;
    (num.rem_euclid(den), den)
}

fn reduce_ratio(num: i128, den: i128) -> Rational64 {
    let n = num.rem_euclid(den);
    let g = gcd(n, den);
    Rational64::new_raw((n / g) as i64, (den / g) as i64)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A location on the circle, exact when it came from a rational literal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coord {
    Exact(Rational64),
    Real(f64),
}

impl Coord {
    /// The rational `r` reduced mod 1.
    pub fn exact(r: Rational64) -> Self {
        let (num, den) = frac_parts(&r);
        Coord::Exact(reduce_ratio(num, den))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Coord::exact(Rational64::new(num, den))
    }

    /// The real `x` reduced mod 1.
    pub fn real(x: f64) -> Self {
        Coord::Real(x - x.floor()).normalized()
    }

    fn normalized(self) -> Self {
        match self {
            Coord::Real(x) if !(0.0..1.0).contains(&x) => Coord::Real(0.0),
            other => other,
        }
    }

    pub fn zero() -> Self {
        Coord::Exact(Rational64::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coord::Exact(_))
    }

    pub fn as_ratio(&self) -> Option<Rational64> {
        match self {
            Coord::Exact(r) => Some(*r),
            Coord::Real(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coord::Exact(r) => {
                let (n, d) = frac_parts(r);
                n as f64 / d as f64
            }
            Coord::Real(x) => *x,
        }
    }

    pub fn to_point(&self) -> TorusPoint {
        match self {
            Coord::Exact(r) => TorusPoint::from_ratio(r),
            Coord::Real(x) => TorusPoint::new(*x),
        }
    }

    /// `frac(p * self)`, exact for rational coordinates.
    pub fn times(&self, p: i64) -> Coord {
        match self {
            Coord::Exact(r) => {
                let (n, d) = frac_parts(r);
                Coord::Exact(reduce_ratio((n * p as i128).rem_euclid(d), d))
            }
            Coord::Real(x) => Coord::real(x * p as f64),
        }
    }

    pub fn neg(&self) -> Coord {
        self.times(-1)
    }

    /// Sum mod 1; stays exact only when both sides are exact.
    pub fn plus(&self, other: &Coord) -> Coord {
        match (self, other) {
            (Coord::Exact(a), Coord::Exact(b)) => {
                let (an, ad) = frac_parts(a);
                let (bn, bd) = frac_parts(b);
                let den = ad / gcd(ad, bd) * bd;
                let num = an * (den / ad) + bn * (den / bd);
                Coord::Exact(reduce_ratio(num, den))
            }
            _ => Coord::real(self.to_f64() + other.to_f64()),
        }
    }

    /// `exp(2iπ p x)`; the phase `frac(p x)` is computed exactly for rationals.
    pub fn character(&self, p: i64) -> Complex64 {
        let phase = match self.times(p) {
            Coord::Exact(r) => {
                let (n, d) = frac_parts(&r);
                n as f64 / d as f64
            }
            Coord::Real(_) => (self.to_f64() * p as f64).rem_euclid(1.0),
        };
        let (s, c) = (2.0 * PI * phase).sin_cos();
        Complex64::new(c, s)
    }

    fn same_location(&self, other: &Coord) -> bool {
        match (self, other) {
            (Coord::Exact(a), Coord::Exact(b)) => a == b,
            _ => {
                let d = (self.to_f64() - other.to_f64()).rem_euclid(1.0);
                d.min(1.0 - d) <= MERGE_TOLERANCE
            }
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Exact(r) => write!(f, "{r}"),
            Coord::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub location: Coord,
    pub weight: f64,
}

/// Finitely many atoms with positive weights summing to one, distinct mod 1.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomList(Vec<Atom>);

impl AtomList {
    pub fn new(atoms: Vec<(Coord, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyAtoms);
        }
        let mut list: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut total = 0.0;
        for (location, weight) in atoms {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(MeasureError::NonPositiveWeight(weight));
            }
            let location = match location {
                Coord::Exact(r) => Coord::exact(r),
                Coord::Real(x) if x.is_finite() => Coord::real(x),
                Coord::Real(x) => return Err(MeasureError::NonFinite(x)),
            };
            if let Some(prev) = list.iter().find(|a| a.location.same_location(&location)) {
                return Err(MeasureError::DuplicateLocation(
                    prev.location.to_f64(),
                    location.to_f64(),
                ));
            }
            total += weight;
            list.push(Atom { location, weight });
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::WeightsDoNotSumToOne(total));
        }
        Ok(AtomList(list))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_exact(&self) -> bool {
        self.0.iter().all(|a| a.location.is_exact())
    }
}

/// Wrapped normal law: a real `N(mean, variance)` reduced mod 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WrappedGaussian {
    mean: f64,
    variance: f64,
}

impl WrappedGaussian {
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Piecewise-constant density on `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseDensity {
    breaks: Vec<f64>,
    densities: Vec<f64>,
}

impl PiecewiseDensity {
    /// `breaks` runs from 0 to 1 strictly increasing; piece `i` is
    /// `[breaks[i], breaks[i+1])` with density `densities[i]`.
    pub fn new(breaks: Vec<f64>, densities: Vec<f64>) -> Result<Self, MeasureError> {
        if breaks.len() < 2
            || breaks[0] != 0.0
            || *breaks.last().unwrap() != 1.0
            || breaks.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(MeasureError::InvalidBreaks);
        }
        if densities.len() != breaks.len() - 1 {
            return Err(MeasureError::DensityCountMismatch {
                expected: breaks.len() - 1,
                got: densities.len(),
            });
        }
        if let Some(&d) = densities.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(MeasureError::NegativeDensity(d));
        }
        let density = PiecewiseDensity { breaks, densities };
        let mass = density.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::DensityMass(mass));
        }
        Ok(density)
    }

    /// Builds from cells that may carry rounding error, rescaling to unit mass.
    fn normalized(breaks: Vec<f64>, mut densities: Vec<f64>) -> Self {
        let mut density = PiecewiseDensity {
            breaks,
            densities: densities.clone(),
        };
        let mass = density.mass();
        for d in &mut densities {
            *d /= mass;
        }
        density.densities = densities;
        density
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breaks
            .windows(2)
            .zip(&self.densities)
            .map(|(w, &d)| (w[0], w[1], d))
    }

    fn mass(&self) -> f64 {
        self.pieces().map(|(a, b, d)| d * (b - a)).sum()
    }

    pub fn density_at(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        let idx = self.breaks.partition_point(|&b| b <= x);
        self.densities[idx.saturating_sub(1).min(self.densities.len() - 1)]
    }

    /// Closed form `sum_i d_i (e(p b_{i+1}) - e(p b_i)) / (2iπp)`.
    pub fn fourier(&self, p: i64) -> Complex64 {
        if p == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let denom = Complex64::new(0.0, 2.0 * PI * p as f64);
        let sum: Complex64 = self
            .pieces()
            .map(|(a, b, d)| (Coord::Real(b).character(p) - Coord::Real(a).character(p)) * d)
            .sum();
        sum / denom
    }

    /// Sum of the absolute jumps of the density around the circle.
    ///
    /// For integer `t != 0`, `|fourier(t)| <= jump_variation() / (2π|t|)`.
    pub fn jump_variation(&self) -> f64 {
        let n = self.densities.len();
        (0..n)
            .map(|i| (self.densities[i] - self.densities[(i + n - 1) % n]).abs())
            .sum()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = None;
        for (a, b, d) in self.pieces() {
            if d <= 0.0 {
                continue;
            }
            let m = d * (b - a);
            if u < acc + m {
                return TorusPoint::new(a + (u - acc) / d);
            }
            acc += m;
            last = Some((a, b));
        }
        // u landed in the rounding gap above the accumulated mass
        let (_, b) = last.expect("density has positive mass");
        TorusPoint::new(b - f64::EPSILON)
    }

    /// The law of `frac(x + shift)`.
    pub fn rotate(&self, shift: f64) -> PiecewiseDensity {
        let shift = shift.rem_euclid(1.0);
        let cuts = self.breaks[..self.breaks.len() - 1]
            .iter()
            .map(|b| (b + shift).rem_euclid(1.0));
        let breaks = cell_breaks(cuts);
        let densities = breaks
            .windows(2)
            .map(|w| self.density_at(0.5 * (w[0] + w[1]) - shift))
            .collect();
        PiecewiseDensity::normalized(breaks, densities)
    }

    /// The law of `frac(k x)` for integer `k`; piecewise constant again.
    pub fn pushforward_scaled(&self, k: i64) -> TorusMeasure {
        if k == 0 {
            return TorusMeasure::Dirac(Coord::zero());
        }
        let kf = k as f64;
        let cuts = self.breaks.iter().map(|b| (b * kf).rem_euclid(1.0));
        let breaks = cell_breaks(cuts);
        let densities = breaks
            .windows(2)
            .map(|w| {
                let y = 0.5 * (w[0] + w[1]);
                self.pieces()
                    .map(|(a, b, d)| {
                        // number of integers m with (y + m) / k in [a, b)
                        let count = if k > 0 {
                            (kf * b - y).ceil() - (kf * a - y).ceil()
                        } else {
                            (kf * a - y).floor() - (kf * b - y).floor()
                        };
                        d * count
                    })
                    .sum::<f64>()
                    / kf.abs()
            })
            .collect();
        TorusMeasure::Piecewise(PiecewiseDensity::normalized(breaks, densities))
    }
}

fn cell_breaks(cuts: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut breaks: Vec<f64> = cuts.chain([0.0, 1.0]).filter(|b| *b < 1.0).collect();
    breaks.push(1.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    if *breaks.last().unwrap() != 1.0 {
        *breaks.last_mut().unwrap() = 1.0;
    }
    breaks
}

/// A probability law on the circle in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusMeasure {
    Dirac(Coord),
    Atoms(AtomList),
    WrappedGaussian(WrappedGaussian),
    Uniform,
    Piecewise(PiecewiseDensity),
}

/// Whether `|fourier(mu, p)| = 1`, i.e. `mu` sits on a coset `x + (1/p)Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithmeticStructure {
    /// `fourier(mu, p) = exp(2iπ phase)`.
    ModulusOne(TorusPoint),
    StrictlyLess,
}

/// An [`ArithmeticStructure`] together with how it was decided.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArithmeticVerdict {
    pub structure: ArithmeticStructure,
    /// False when a floating-point tolerance settled the answer.
    pub exact: bool,
}

impl ArithmeticVerdict {
    pub fn is_modulus_one(&self) -> bool {
        matches!(self.structure, ArithmeticStructure::ModulusOne(_))
    }
}

impl TorusMeasure {
    pub fn dirac(x: Coord) -> Self {
        TorusMeasure::Dirac(match x {
            Coord::Exact(r) => Coord::exact(r),
            Coord::Real(v) => Coord::real(v),
        })
    }

    pub fn atoms(atoms: Vec<(Coord, f64)>) -> Result<Self, MeasureError> {
        AtomList::new(atoms).map(TorusMeasure::Atoms)
    }

    /// Zero variance collapses to a point mass at `frac(mean)`.
    pub fn wrapped_gaussian(mean: f64, variance: f64) -> Result<Self, MeasureError> {
        if !mean.is_finite() {
            return Err(MeasureError::NonFinite(mean));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(MeasureError::InvalidVariance(variance));
        }
        if variance == 0.0 {
            return Ok(TorusMeasure::Dirac(Coord::real(mean)));
        }
        Ok(TorusMeasure::WrappedGaussian(WrappedGaussian { mean, variance }))
    }

    pub fn piecewise(breaks: Vec<f64>, densities: Vec<f64>) -> Result<Self, MeasureError> {
        PiecewiseDensity::new(breaks, densities).map(TorusMeasure::Piecewise)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TorusMeasure::Dirac(_) => "dirac",
            TorusMeasure::Atoms(_) => "atoms",
            TorusMeasure::WrappedGaussian(_) => "wrapped_gaussian",
            TorusMeasure::Uniform => "uniform",
            TorusMeasure::Piecewise(_) => "piecewise",
        }
    }

    /// `∫ exp(2iπ p x) mu(dx)`; exactly 1 at `p = 0`.
    pub fn fourier(&self, p: i64) -> Complex64 {
        if p == 0 {
            return Complex64::new(1.0, 0.0);
        }
        match self {
            TorusMeasure::Dirac(x) => x.character(p),
            TorusMeasure::Atoms(atoms) => atoms
                .iter()
                .map(|a| a.location.character(p) * a.weight)
                .sum(),
            TorusMeasure::WrappedGaussian(g) => {
                let pf = p as f64;
                Coord::Real(g.mean).character(p) * (-2.0 * PI * PI * pf * pf * g.variance).exp()
            }
            TorusMeasure::Uniform => Complex64::zero(),
            TorusMeasure::Piecewise(d) => d.fourier(p),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        match self {
            TorusMeasure::Dirac(x) => x.to_point(),
            TorusMeasure::Atoms(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for atom in atoms.iter() {
                    acc += atom.weight;
                    if u < acc {
                        return atom.location.to_point();
                    }
                }
                atoms.0.last().unwrap().location.to_point()
            }
            TorusMeasure::WrappedGaussian(g) => {
                let z: f64 = rng.sample(StandardNormal);
                TorusPoint::new(g.mean + g.variance.sqrt() * z)
            }
            TorusMeasure::Uniform => TorusPoint::from_bits(rng.random()),
            TorusMeasure::Piecewise(d) => d.sample(rng),
        }
    }

    /// The single support point, if this is a point mass.
    pub fn point_mass(&self) -> Option<Coord> {
        match self {
            TorusMeasure::Dirac(x) => Some(*x),
            TorusMeasure::Atoms(a) if a.len() == 1 => Some(a.0[0].location),
            _ => None,
        }
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        matches!(
            self,
            TorusMeasure::WrappedGaussian(_) | TorusMeasure::Uniform | TorusMeasure::Piecewise(_)
        )
    }

    /// Circular mean direction `arg(fourier(1)) / 2π`; the location parameter
    /// for point masses and wrapped Gaussians. `None` when `fourier(1) = 0`.
    pub fn mean_direction(&self) -> Option<Coord> {
        if let Some(x) = self.point_mass() {
            return Some(x);
        }
        if let TorusMeasure::WrappedGaussian(g) = self {
            return Some(Coord::real(g.mean));
        }
        let f = self.fourier(1);
        (f.norm() > ZERO_TOLERANCE).then(|| Coord::real(f.arg() / (2.0 * PI)))
    }

    /// Law of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &TorusMeasure) -> Result<TorusMeasure, MeasureError> {
        use TorusMeasure::*;
        match (self, other) {
            (Uniform, _) | (_, Uniform) => Ok(Uniform),
            (Dirac(x), m) | (m, Dirac(x)) => Ok(m.shifted(x)),
            (Atoms(a), Atoms(b)) => {
                let mut merged: Vec<Atom> = Vec::with_capacity(a.len() * b.len());
                for u in a.iter() {
                    for v in b.iter() {
                        let location = u.location.plus(&v.location);
                        let weight = u.weight * v.weight;
                        match merged.iter_mut().find(|m| m.location.same_location(&location)) {
                            Some(m) => m.weight += weight,
                            None => merged.push(Atom { location, weight }),
                        }
                    }
                }
                Ok(Atoms(AtomList(merged)))
            }
            (WrappedGaussian(g), WrappedGaussian(h)) => Ok(WrappedGaussian(self::WrappedGaussian {
                mean: (g.mean + h.mean).rem_euclid(1.0),
                variance: g.variance + h.variance,
            })),
            _ => Err(MeasureError::IncompatiblePair(self.kind(), other.kind())),
        }
    }

    /// Law of `frac(X + x)` for `X ~ self`.
    pub fn shifted(&self, x: &Coord) -> TorusMeasure {
        match self {
            TorusMeasure::Dirac(y) => TorusMeasure::Dirac(y.plus(x)),
            TorusMeasure::Atoms(a) => TorusMeasure::Atoms(AtomList(
                a.iter()
                    .map(|atom| Atom {
                        location: atom.location.plus(x),
                        weight: atom.weight,
                    })
                    .collect(),
            )),
            TorusMeasure::WrappedGaussian(g) => TorusMeasure::WrappedGaussian(WrappedGaussian {
                mean: (g.mean + x.to_f64()).rem_euclid(1.0),
                variance: g.variance,
            }),
            TorusMeasure::Uniform => TorusMeasure::Uniform,
            TorusMeasure::Piecewise(d) => TorusMeasure::Piecewise(d.rotate(x.to_f64())),
        }
    }

    /// Decides whether `|fourier(self, p)| = 1` for `p >= 1`.
    ///
    /// Point masses, rational atoms and absolutely continuous laws are
    /// decided exactly; atoms with real locations fall back to the
    /// tolerance `ARITHMETIC_TOLERANCE`.
    pub fn arithmetic_structure(&self, p: i64) -> ArithmeticVerdict {
        assert!(p >= 1, "arithmetic_structure needs p >= 1");
        let exact = |structure| ArithmeticVerdict {
            structure,
            exact: true,
        };
        match self {
            TorusMeasure::Dirac(x) => {
                let phase = x.times(p);
                ArithmeticVerdict {
                    structure: ArithmeticStructure::ModulusOne(phase.to_point()),
                    exact: x.is_exact(),
                }
            }
            TorusMeasure::Atoms(a) if a.all_exact() => {
                let base = a.0[0].location.as_ratio().unwrap();
                let on_coset = a.iter().all(|atom| {
                    let diff = (atom.location.as_ratio().unwrap() - base) * Rational64::from(p);
                    diff.is_integer()
                });
                if on_coset {
                    exact(ArithmeticStructure::ModulusOne(a.0[0].location.times(p).to_point()))
                } else {
                    exact(ArithmeticStructure::StrictlyLess)
                }
            }
            TorusMeasure::Atoms(_) => {
                let f = self.fourier(p);
                let structure = if f.norm() >= 1.0 - ARITHMETIC_TOLERANCE {
                    ArithmeticStructure::ModulusOne(TorusPoint::new(f.arg() / (2.0 * PI)))
                } else {
                    ArithmeticStructure::StrictlyLess
                };
                ArithmeticVerdict {
                    structure,
                    exact: false,
                }
            }
            // absolutely continuous laws never have a unit-modulus character
            TorusMeasure::WrappedGaussian(_) | TorusMeasure::Uniform | TorusMeasure::Piecewise(_) => {
                exact(ArithmeticStructure::StrictlyLess)
            }
        }
    }

    /// Pushforward onto the cyclic grid `(1/q)Z`; every atom must lie on it exactly.
    pub fn to_cyclic(&self, q: u64) -> Result<CyclicDistribution, MeasureError> {
        if q == 0 {
            return Err(MeasureError::ZeroOrder);
        }
        let off_grid = || MeasureError::NotSupportedOnCyclicGrid(self.describe(), q);
        let grid_index = |c: &Coord| -> Option<usize> {
            let r = c.as_ratio()?;
            let scaled = r * Rational64::from(q as i64);
            scaled
                .is_integer()
                .then(|| scaled.to_integer().rem_euclid(q as i64) as usize)
        };
        let mut weights = vec![0.0; q as usize];
        match self {
            TorusMeasure::Dirac(x) => weights[grid_index(x).ok_or_else(off_grid)?] = 1.0,
            TorusMeasure::Atoms(a) => {
                for atom in a.iter() {
                    weights[grid_index(&atom.location).ok_or_else(off_grid)?] += atom.weight;
                }
            }
            _ => return Err(off_grid()),
        }
        Ok(CyclicDistribution { weights })
    }

    /// Smallest `q` such that every atom lies on `(1/q)Z`, if the measure is
    /// a rational atom measure.
    pub fn cyclic_order(&self) -> Option<u64> {
        let denominators: Vec<i64> = match self {
            TorusMeasure::Dirac(x) => vec![*x.as_ratio()?.denom()],
            TorusMeasure::Atoms(a) => a
                .iter()
                .map(|atom| atom.location.as_ratio().map(|r| *r.denom()))
                .collect::<Option<_>>()?,
            _ => return None,
        };
        Some(denominators.into_iter().fold(1u64, |acc, d| lcm(acc, d as u64)))
    }

    pub fn describe(&self) -> String {
        match self {
            TorusMeasure::Dirac(x) => format!("Dirac({x})"),
            TorusMeasure::Atoms(a) => {
                let parts: Vec<String> = a
                    .iter()
                    .map(|atom| format!("({}, {})", atom.location, atom.weight))
                    .collect();
                format!("Atoms{{{}}}", parts.join(", "))
            }
            TorusMeasure::WrappedGaussian(g) => {
                format!("WrappedGaussian({}, {})", g.mean, g.variance)
            }
            TorusMeasure::Uniform => "Uniform".to_string(),
            TorusMeasure::Piecewise(d) => format!("Piecewise({} pieces)", d.densities.len()),
        }
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    let g = gcd(a as i128, b as i128) as u64;
    a / g * b
}

/// A law on the cyclic subgroup `{0, 1/q, ..., (q-1)/q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicDistribution {
    weights: Vec<f64>,
}

impl CyclicDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, MeasureError> {
        if weights.is_empty() {
            return Err(MeasureError::ZeroOrder);
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(MeasureError::NonPositiveWeight(w));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::WeightsDoNotSumToOne(total));
        }
        Ok(CyclicDistribution { weights })
    }

    /// Point mass at `index / q`.
    pub fn point(q: usize, index: usize) -> Self {
        let mut weights = vec![0.0; q];
        weights[index % q] = 1.0;
        CyclicDistribution { weights }
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Circular convolution of weight vectors.
    pub fn convolve(&self, other: &CyclicDistribution) -> Result<CyclicDistribution, MeasureError> {
        let q = self.order();
        if other.order() != q {
            return Err(MeasureError::CyclicOrderMismatch(q, other.order()));
        }
        let mut weights = vec![0.0; q];
        for (i, &a) in self.weights.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.weights.iter().enumerate() {
                weights[(i + j) % q] += a * b;
            }
        }
        Ok(CyclicDistribution { weights })
    }

    /// Same law viewed on the finer grid `(1/q')Z`, `q | q'`.
    pub fn refine(&self, q_fine: usize) -> Option<CyclicDistribution> {
        let q = self.order();
        if !q_fine.is_multiple_of(q) {
            return None;
        }
        let step = q_fine / q;
        let mut weights = vec![0.0; q_fine];
        for (i, &w) in self.weights.iter().enumerate() {
            weights[i * step] = w;
        }
        Some(CyclicDistribution { weights })
    }

    pub fn total_variation(&self, other: &CyclicDistribution) -> f64 {
        0.5 * self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn to_measure(&self) -> Result<TorusMeasure, MeasureError> {
        let q = self.order() as i64;
        TorusMeasure::atoms(
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(i, &w)| (Coord::ratio(i as i64, q), w))
                .collect(),
        )
    }
}
