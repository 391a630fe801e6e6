//! Scenarios shipped with the binary.

use tsirelson::torus::PiecewiseDensity;
use tsirelson::{Coord, MeanRule, MeasureSequence, TailRule, TorusMeasure, VarianceRule};

use crate::scenario::{Defaults, Scenario};

struct Builtin {
    name: &'static str,
    description: &'static str,
    build: fn() -> (MeasureSequence, Defaults),
}

const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "c1_wrapped_gaussian",
        description: "iid WrappedGaussian(0, 1/2): infinite variance sum, unique solution in law",
        build: || iid(TorusMeasure::wrapped_gaussian(0.0, 0.5).unwrap()),
    },
    Builtin {
        name: "c1_constant_gaussian",
        description: "WrappedGaussian tail with zero means and constant variance 0.05",
        build: || {
            gaussian_tail(MeanRule::Zero, VarianceRule::Constant(0.05), Defaults::default())
        },
    },
    Builtin {
        name: "c1_roulette",
        description: "law of frac(|k| gamma) for a piecewise-constant density of gamma",
        build: || {
            let density = PiecewiseDensity::new(vec![0.0, 0.3, 0.7, 1.0], vec![0.5, 1.75, 0.5]).unwrap();
            (
                MeasureSequence::new(vec![], TailRule::ScaledDensityTail(density)).unwrap(),
                Defaults::default(),
            )
        },
    },
    Builtin {
        name: "c1_irrational_atoms",
        description: "iid Atoms{(0,1/2),(sqrt2-1,1/2)}: non-arithmetic, slow Fourier decay",
        build: || {
            let (seq, mut d) = iid(irrational_atoms());
            d.depth = 600;
            d.samples = 20_000;
            (seq, d)
        },
    },
    Builtin {
        name: "c1_uniform_tail_dirac_prefix",
        description: "Dirac(1/3) at k = 0 followed by an iid uniform tail",
        build: || {
            let seq = MeasureSequence::new(
                vec![TorusMeasure::dirac(Coord::ratio(1, 3))],
                TailRule::Iid(TorusMeasure::Uniform),
            )
            .unwrap();
            (seq, Defaults::default())
        },
    },
    Builtin {
        name: "c2_dirac_third",
        description: "iid Dirac(1/3): deterministic noise, strong solutions without uniqueness",
        build: || iid(TorusMeasure::dirac(Coord::ratio(1, 3))),
    },
    Builtin {
        name: "c2_geometric_gaussian",
        description: "WrappedGaussian tail, zero means, variances (1/4) 2^-|j|",
        build: || {
            gaussian_tail(
                MeanRule::Zero,
                VarianceRule::Geometric { c: 0.25, r: 0.5 },
                Defaults::default(),
            )
        },
    },
    Builtin {
        name: "c2_mean_drift",
        description: "WrappedGaussian tail, constant mean 0.1, variances (1/4) 2^-|j|",
        build: || {
            gaussian_tail(
                MeanRule::Constant(0.1),
                VarianceRule::Geometric { c: 0.25, r: 0.5 },
                Defaults::default(),
            )
        },
    },
    Builtin {
        name: "c3_half_atoms",
        description: "iid Atoms{(0,1/2),(1/2,1/2)}: p_mu = 2, neither unique nor strong",
        build: || iid(half_atoms()),
    },
    Builtin {
        name: "c3_eighth_grid",
        description: "iid atoms on (1/8)Z with a Dirac(3/8) at k = 0; p_mu = 8",
        build: || {
            let law = TorusMeasure::atoms(vec![
                (Coord::ratio(0, 1), 0.4),
                (Coord::ratio(1, 8), 0.35),
                (Coord::ratio(3, 4), 0.25),
            ])
            .unwrap();
            let seq = MeasureSequence::new(vec![TorusMeasure::dirac(Coord::ratio(3, 8))], TailRule::Iid(law))
                .unwrap();
            let defaults = Defaults {
                depth: 12,
                ..Defaults::default()
            };
            (seq, defaults)
        },
    },
];

fn iid(law: TorusMeasure) -> (MeasureSequence, Defaults) {
    (MeasureSequence::iid(law), Defaults::default())
}

fn gaussian_tail(means: MeanRule, variances: VarianceRule, defaults: Defaults) -> (MeasureSequence, Defaults) {
    let seq = MeasureSequence::new(vec![], TailRule::WrappedGaussianTail { means, variances }).unwrap();
    (seq, defaults)
}

pub fn half_atoms() -> TorusMeasure {
    TorusMeasure::atoms(vec![(Coord::ratio(0, 1), 0.5), (Coord::ratio(1, 2), 0.5)]).unwrap()
}

pub fn irrational_atoms() -> TorusMeasure {
    TorusMeasure::atoms(vec![
        (Coord::ratio(0, 1), 0.5),
        (Coord::real(std::f64::consts::SQRT_2 - 1.0), 0.5),
    ])
    .unwrap()
}

/// Names and descriptions of all built-in scenarios, in listing order.
pub fn list() -> Vec<(&'static str, &'static str)> {
    BUILTINS.iter().map(|b| (b.name, b.description)).collect()
}

pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| {
        let (sequence, defaults) = (b.build)();
        Scenario {
            name: b.name.to_string(),
            description: b.description.to_string(),
            sequence,
            defaults,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsirelson::{classify, Trichotomy};

    #[test]
    fn every_builtin_builds_and_names_match_regime() {
        for (name, _) in list() {
            let s = builtin(name).unwrap();
            let case = classify(&s.sequence, s.defaults.pmax).unwrap().case;
            let expected = &name[..2];
            assert_eq!(case.label().to_lowercase(), expected, "{name}: {case}");
        }
    }

    #[test]
    fn regime_parameters() {
        let c3 = classify(&builtin("c3_half_atoms").unwrap().sequence, 64).unwrap();
        assert_eq!(c3.case, Trichotomy::C3 { p: 2 });
        let c3 = classify(&builtin("c3_eighth_grid").unwrap().sequence, 64).unwrap();
        assert_eq!(c3.case, Trichotomy::C3 { p: 8 });
        assert!(builtin("nope").is_none());
    }
}
