//! Classification and Monte Carlo verification of the stochastic equation
//! `eta_k = xi_k + eta_{k-1}` (`k <= 0`) on the circle `T = R/Z`.
//!
//! Given the laws `mu_k` of the independent noise `xi_k`, the frequency
//! subgroup `Z_mu = p_mu Z` decides whether the equation has a unique solution
//! in law (`p_mu = 0`), admits strong solutions (`p_mu = 1`), or neither
//! (`p_mu >= 2`). The [`simulator`] and [`stats`] modules turn each of these
//! regimes into reproducible numerical experiments.

pub mod classifier;
pub mod sequence;
pub mod simulator;
pub mod stats;
pub mod torus;

pub use classifier::{classify, compute_p_mu, CenteringSpec, SubgroupEvidence, Trichotomy, TrichotomyResult};
pub use sequence::{LogProductStatus, LogProductVerdict, MeanRule, MeasureSequence, TailRule, VarianceRule};
pub use simulator::{Anchor, ChainConfig, ChainEnsemble};
pub use torus::{Coord, CyclicDistribution, TorusMeasure, TorusPoint};
