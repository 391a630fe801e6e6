//! Regime-dependent test batteries and their reports.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use tsirelson::classifier::ClassifyError;
use tsirelson::simulator::{self, SimError};
use tsirelson::stats::{self, NoiseColumn, StatsError};
use tsirelson::torus::MeasureError;
use tsirelson::{classify, ChainConfig, ChainEnsemble, Coord, TorusMeasure, TorusPoint, Trichotomy};

use crate::scenario::{AnchorSpec, Scenario};

/// Frequencies checked by the ECF batteries.
pub const ECF_PMAX: u32 = 5;
/// Noise indices used by the cross-character batteries.
pub const CROSS_JS: [i64; 3] = [0, -5, -10];
pub const CROSS_PQ: [i64; 2] = [1, 2];
/// Largest cyclic grid on which the exact law is compared.
pub const ORACLE_MAX_ORDER: u64 = 1024;
/// Pathwise tolerance in the strong-limit Cauchy test.
pub const CAUCHY_EPS: f64 = 0.01;
/// Noise window for the dependence exhibit.
pub const EXHIBIT_WINDOW: u64 = 10;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Invalid(String),
}

/// Run parameters after merging scenario defaults with overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub depth: u64,
    pub samples: usize,
    pub seed: u64,
    pub pmax: u32,
    pub anchor: AnchorSpec,
    pub truncation: u64,
}

impl RunOptions {
    pub fn from_scenario(s: &Scenario) -> Self {
        RunOptions {
            depth: s.defaults.depth,
            samples: s.defaults.samples,
            seed: s.defaults.seed,
            pmax: s.defaults.pmax,
            anchor: s.defaults.anchor.clone(),
            truncation: 20,
        }
    }

    pub fn chain(&self, s: &Scenario) -> ChainConfig {
        ChainConfig {
            seq: s.sequence.clone(),
            depth: self.depth,
            anchor: self.anchor.to_anchor(),
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl TestResult {
    pub fn at_most(name: &str, statistic: f64, threshold: f64, note: impl Into<String>) -> Self {
        TestResult {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            note: note.into(),
        }
    }

    pub fn above(name: &str, statistic: f64, threshold: f64, note: impl Into<String>) -> Self {
        TestResult {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic > threshold,
            note: note.into(),
        }
    }

    pub fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        TestResult {
            name: name.into(),
            statistic: f64::NAN,
            threshold: f64::NAN,
            pass: false,
            note: format!("error: {err}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: String,
    pub verdict: String,
    pub p_mu: Option<u32>,
    pub certified: bool,
    pub options: RunOptions,
    pub tests: Vec<TestResult>,
    pub pass: bool,
    /// Not part of the rendered report, so reports stay reproducible.
    pub wall_time: Duration,
}

impl RunReport {
    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn header(&self) -> String {
        format!(
            "scenario={} case={} p_mu={} certified={} depth={} samples={} seed={} anchor={} pass={}",
            self.scenario,
            self.verdict,
            self.p_mu.map_or("?".into(), |p| p.to_string()),
            self.certified,
            self.options.depth,
            self.options.samples,
            self.options.seed,
            self.options.anchor,
            self.pass
        )
    }

    pub fn to_csv(&self) -> String {
        render_csv(&self.header(), &self.tests)
    }

    pub fn to_text(&self) -> String {
        render_text(&self.header(), &self.tests, self.pass)
    }
}

/// CSV with a single header comment line.
pub fn render_csv(header: &str, tests: &[TestResult]) -> String {
    let mut out = format!("# {header}; columns: test,statistic,threshold,pass,note\n");
    out.push_str("test,statistic,threshold,pass,note\n");
    for t in tests {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t.name,
            fmt_num(t.statistic),
            fmt_num(t.threshold),
            t.pass,
            t.note.replace(',', ";")
        );
    }
    out
}

pub fn render_text(header: &str, tests: &[TestResult], pass: bool) -> String {
    let mut out = format!("{header}\n");
    let width = tests.iter().map(|t| t.name.len()).max().unwrap_or(4);
    for t in tests {
        let _ = writeln!(
            out,
            "  [{}] {:width$}  {:>13}  vs {:>13}  {}",
            if t.pass { "PASS" } else { "FAIL" },
            t.name,
            fmt_num(t.statistic),
            fmt_num(t.threshold),
            t.note,
        );
    }
    let _ = writeln!(out, "overall: {}", if pass { "PASS" } else { "FAIL" });
    out
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.6e}")
    }
}

/// Classifies the scenario and runs the battery for its regime.
pub fn run_suite(scenario: &Scenario, options: &RunOptions) -> RunReport {
    let start = Instant::now();
    let mut tests = Vec::new();
    let (verdict, p_mu, certified, case) = match classify(&scenario.sequence, options.pmax) {
        Ok(r) => (
            r.case.to_string(),
            Some(r.evidence.p_mu),
            r.evidence.fully_certified,
            Some(r.case),
        ),
        Err(e) => {
            tests.push(TestResult::failed("classify", e));
            ("unclassified".into(), None, false, None)
        }
    };

    match simulator::simulate(&options.chain(scenario)) {
        Ok(ensemble) => {
            tests.extend(pathwise_battery(scenario, options, &ensemble));
            match &case {
                Some(Trichotomy::C1) => tests.extend(c1_battery(scenario, options, &ensemble)),
                Some(Trichotomy::C2 { .. }) => tests.extend(c2_battery(scenario, options, &ensemble)),
                Some(Trichotomy::C3 { p }) => tests.extend(c3_battery(scenario, options, *p)),
                None => {}
            }
        }
        Err(e) => tests.push(TestResult::failed("simulate", e)),
    }

    let pass = tests.iter().all(|t| t.pass);
    RunReport {
        scenario: scenario.name.clone(),
        verdict,
        p_mu,
        certified,
        options: options.clone(),
        tests,
        pass,
        wall_time: start.elapsed(),
    }
}

pub fn capture(name: &str, f: impl FnOnce() -> Result<TestResult, SuiteError>) -> TestResult {
    f().unwrap_or_else(|e| TestResult::failed(name, e))
}

/// Law used as the mixing measure in the integral-representation check.
pub fn mixing_law() -> TorusMeasure {
    TorusMeasure::wrapped_gaussian(0.25, 0.02).expect("valid variance")
}

/// Shift used in the translation check.
pub fn translation() -> Coord {
    Coord::ratio(2, 7)
}

pub fn pathwise_battery(scenario: &Scenario, options: &RunOptions, ensemble: &ChainEnsemble) -> Vec<TestResult> {
    let n = options.samples;
    let report = ensemble.pathwise_report();
    let mut out = vec![
        TestResult::at_most(
            "pathwise_recursion",
            if report.recursion_exact { 0.0 } else { 1.0 },
            0.0,
            "1 if any eta_k != xi_k + eta_{k-1}",
        ),
        TestResult::at_most(
            "pathwise_telescope",
            report.telescope_error,
            1e-9,
            "max |eta_0 - eta_{-N-1} - sum xi_k|",
        ),
        TestResult::at_most(
            "pathwise_noise_recovery",
            report.noise_recovery_error,
            1e-12,
            "max |xi_k - (eta_k - eta_{k-1})|",
        ),
    ];
    out.push(capture("translate_equals_shifted_anchor", || {
        let g = translation().to_point();
        let moved = simulator::translate(ensemble, g);
        let shifted: Vec<TorusPoint> = ensemble.anchors().iter().map(|a| *a + g).collect();
        let direct = simulator::simulate_with_anchors(
            &scenario.sequence,
            options.depth,
            moved.config().anchor.clone(),
            shifted,
            options.seed,
        )?;
        let width = options.depth as usize + 2;
        let gap = (0..n)
            .flat_map(|i| (0..width).map(move |k| (i, k as i64 - options.depth as i64 - 1)))
            .map(|(i, k)| moved.state(i, k).circular_distance(direct.state(i, k)))
            .fold(0.0, f64::max);
        Ok(TestResult::at_most(
            "translate_equals_shifted_anchor",
            gap,
            0.0,
            "g = 2/7; max over all k and samples",
        ))
    }));
    out.push(capture("mixture_representation", || {
        let pair = simulator::mixture_check(&scenario.sequence, &mixing_law(), options.depth, n, options.seed)?;
        let d = stats::two_sample_ecf_distance(&pair.mixed.eta0(), &pair.disintegrated.eta0(), ECF_PMAX);
        Ok(TestResult::at_most(
            "mixture_representation",
            d,
            2.0 * stats::threshold(n),
            "max_p<=5 ECF distance; mixing law WrappedGaussian(1/4; 1/50)",
        ))
    }));
    if let AnchorSpec::Deterministic(anchor) = &options.anchor {
        if let Ok(Some(exact)) =
            simulator::exact_cyclic_law(&scenario.sequence, options.depth, *anchor, ORACLE_MAX_ORDER)
        {
            let q = exact.order();
            let empirical = stats::empirical_cyclic(&ensemble.eta0(), q);
            out.push(TestResult::at_most(
                "exact_oracle_tv",
                empirical.total_variation(&exact),
                3.0 * (q as f64 / n as f64).sqrt(),
                format!("total variation on (1/{q})Z"),
            ));
        }
    }
    out
}

fn noise_columns(ensemble: &ChainEnsemble, js: &[i64]) -> Vec<NoiseColumn> {
    let depth = ensemble.depth() as i64;
    js.iter()
        .filter(|j| **j >= -depth)
        .map(|&j| (j, ensemble.noise_column(j)))
        .collect()
}

pub fn c1_battery(scenario: &Scenario, options: &RunOptions, ensemble: &ChainEnsemble) -> Vec<TestResult> {
    let config = ensemble.config();
    let theta = ensemble.eta0();
    let mut out = Vec::new();
    out.push(capture("uniformity", || {
        let r = stats::uniformity_with_bias(&theta, ECF_PMAX, |p| config.ecf_bias(p))?;
        Ok(excess_row("uniformity", r.n, r.entries.iter().map(|e| (e.modulus, e.threshold)), r.pass, "eta_0; p = 1..5"))
    }));
    out.push(capture("independence", || {
        let cols = noise_columns(ensemble, &CROSS_JS);
        let r = stats::independence_with_bias(&theta, &cols, &CROSS_PQ, &CROSS_PQ, |p, j| config.cross_bias(p, j))?;
        Ok(excess_row(
            "independence",
            r.n,
            r.entries.iter().map(|e| (e.modulus, e.threshold)),
            r.pass,
            "eta_0 vs xi_j; p;q in {1;2}; j in {0;-5;-10}",
        ))
    }));
    out.push(capture("centered_decay", || {
        let l = -(options.depth as i64);
        let products = simulator::centered_products(&scenario.sequence, 0, l, options.samples, options.seed)?;
        let window = scenario.sequence.window(options.depth);
        let r = stats::uniformity_with_bias(&products.samples, ECF_PMAX, |p| {
            simulator::window_product(&window, p, None)
        })?;
        Ok(excess_row(
            "centered_decay",
            r.n,
            r.entries.iter().map(|e| (e.modulus, e.threshold)),
            r.pass,
            format!("xi_0 + ... + xi_{l} + alpha_{l}; p = 1..5"),
        ))
    }));
    out.push(capture("non_interchange", || {
        let w = stats::non_interchange_witness(ensemble, &CROSS_JS, &CROSS_PQ, &CROSS_PQ)?;
        let mut row = excess_row(
            "non_interchange",
            w.independence.n,
            w.independence.entries.iter().map(|e| (e.modulus, e.threshold)),
            w.holds,
            format!("determinism_exact={}", w.determinism_exact),
        );
        row.pass = w.holds;
        Ok(row)
    }));
    out
}

/// One row for a family of `modulus <= 4/sqrt(n) + bias` checks: the
/// statistic is the largest modulus net of its bias.
pub fn excess_row(
    name: &str,
    n: usize,
    entries: impl Iterator<Item = (f64, f64)>,
    pass: bool,
    note: impl Into<String>,
) -> TestResult {
    let base = stats::threshold(n);
    let statistic = entries.map(|(m, t)| m - (t - base)).fold(f64::NEG_INFINITY, f64::max);
    TestResult {
        name: name.into(),
        statistic,
        threshold: base,
        pass,
        note: format!("{} (modulus minus window bias)", note.into()),
    }
}

pub fn c2_battery(scenario: &Scenario, options: &RunOptions, ensemble: &ChainEnsemble) -> Vec<TestResult> {
    let mut out = Vec::new();
    out.push(capture("strong_limit_cauchy", || {
        let (short, long) = strong_limit_pair(scenario, options)?;
        let far = short
            .samples
            .iter()
            .zip(&long.samples)
            .filter(|(a, b)| a.circular_distance(**b) > CAUCHY_EPS)
            .count();
        let bound = short.error_bound(CAUCHY_EPS);
        Ok(TestResult::at_most(
            "strong_limit_cauchy",
            far as f64 / options.samples as f64,
            (2.0 * bound).max(0.005),
            format!(
                "fraction with |L={} minus L={}| > {CAUCHY_EPS}; Chebyshev bound {}",
                short.truncation,
                long.truncation,
                fmt_num(bound)
            ),
        ))
    }));
    out.push(capture("dependence_exhibit", || {
        let w = EXHIBIT_WINDOW.min(options.depth.saturating_sub(1));
        let cols: Vec<Vec<TorusPoint>> = (0..=w as i64).map(|j| ensemble.noise_column(-j)).collect();
        let refs: Vec<&[TorusPoint]> = cols.iter().map(|c| c.as_slice()).collect();
        let m = stats::joint_character(&ensemble.eta0(), 1, &refs, &vec![1; refs.len()])?;
        Ok(TestResult::above(
            "dependence_exhibit",
            m,
            stats::threshold(options.samples),
            format!("|E exp(2iπ(eta_0 - xi_0 - ... - xi_-{w}))|; dependence expected"),
        ))
    }));
    out
}

/// Truncated strong solutions at `L` and `L + 10` from the same noise.
pub fn strong_limit_pair(
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<(simulator::StrongLimit, simulator::StrongLimit), SuiteError> {
    let run = |l: u64| {
        simulator::strong_limit(
            &scenario.sequence,
            TorusPoint::ZERO,
            l,
            options.samples,
            options.seed,
            options.pmax,
        )
    };
    Ok((run(options.truncation)?, run(options.truncation + 10)?))
}

pub fn c3_battery(scenario: &Scenario, options: &RunOptions, p: u32) -> Vec<TestResult> {
    let mut out = Vec::new();
    out.push(capture("bucket_uniformity", || {
        let uniform = simulator::simulate(&ChainConfig {
            anchor: tsirelson::Anchor::Uniform,
            ..options.chain(scenario)
        })?;
        let r = stats::bucket_uniformity(&uniform.eta0(), p as u64)?;
        Ok(TestResult::at_most(
            "bucket_uniformity",
            r.statistic,
            r.critical,
            format!("chi-square of floor({p} eta_0); uniform anchor; significance 1e-3"),
        ))
    }));
    let check = |offset: Coord| {
        stats::measurability_check(
            &scenario.sequence,
            p,
            &stats::MeasurabilityOptions {
                depth: options.depth,
                samples: options.samples,
                seed: options.seed,
                base: TorusPoint::ZERO,
                offset: offset.to_point(),
                scan_bound: options.pmax,
            },
        )
    };
    out.push(capture("measurability", || {
        let r = check(Coord::ratio(1, p as i64))?;
        Ok(TestResult::at_most(
            "measurability",
            r.max_discrepancy,
            1e-9,
            format!("max |frac({p} eta_k)| gap between anchors 0 and 1/{p}"),
        ))
    }));
    out.push(capture("measurability_negative_control", || {
        let r = check(Coord::ratio(1, 2 * p as i64))?;
        Ok(TestResult::above(
            "measurability_negative_control",
            r.max_discrepancy,
            1e-9,
            format!("anchors 0 and 1/{}; must disagree", 2 * p),
        ))
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin;

    fn small(name: &str) -> (Scenario, RunOptions) {
        let s = builtin(name).unwrap();
        let mut o = RunOptions::from_scenario(&s);
        o.samples = 4000;
        (s, o)
    }

    #[test]
    fn reports_render_without_wall_time() {
        let (s, o) = small("c3_half_atoms");
        let r = run_suite(&s, &o);
        assert_eq!(r.verdict, "C3(2)");
        let csv = r.to_csv();
        assert_eq!(csv.lines().filter(|l| l.starts_with('#')).count(), 1);
        assert!(!csv.contains("wall"));
        assert_eq!(r.pass, r.tests.iter().all(|t| t.pass));
    }

    #[test]
    fn errors_become_failed_rows() {
        let (s, mut o) = small("c1_wrapped_gaussian");
        o.samples = 50;
        let r = run_suite(&s, &o);
        assert!(!r.pass);
        assert!(r.tests.iter().any(|t| t.note.starts_with("error:")));
    }
}
