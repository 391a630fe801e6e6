//! Command-line surface and the implementation of each subcommand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tsirelson::sequence::LogProductStatus;
use tsirelson::simulator::{self, HaarVerdict, SkeletonConfig};
use tsirelson::stats::{self, NoiseColumn};
use tsirelson::{classify, TorusPoint, Trichotomy};

use crate::builtins;
use crate::plot::{self, PlotError};
use crate::scenario::{self, AnchorSpec, Scenario, ScenarioError};
use crate::suite::{self, fmt_num, RunOptions, SuiteError, TestResult, CROSS_JS, CROSS_PQ, ECF_PMAX};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "TSIRELSON_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "tsirelson", version, about = "Classify, simulate and test eta_k = xi_k + eta_{k-1} on the circle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Scenario file (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Scenario name inside a multi-scenario file
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// Built-in scenario
    #[arg(long, global = true, value_name = "NAME")]
    pub builtin: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(short = 'n', long, global = true)]
    pub samples: Option<usize>,
    #[arg(short = 'N', long, global = true)]
    pub depth: Option<u64>,
    /// Frequency scan bound for classification
    #[arg(long, global = true)]
    pub pmax: Option<u32>,
    /// det:<x>, uniform or law:<measure json>
    #[arg(long, global = true)]
    pub anchor: Option<String>,
    /// Strong-limit truncation L (compared with L + 10)
    #[arg(long, global = true, default_value_t = 20)]
    pub truncation: u64,
    /// Directory for CSV outputs
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Sample CSV written by `simulate` or `skeleton`
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// List built-in scenarios
    #[arg(long)]
    pub list: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute p_mu and the trichotomy case
    Classify,
    /// Simulate the chain from its anchor at depth N
    Simulate,
    /// Truncated strong solutions at L and L + 10
    Limit,
    /// Centered products and their Fourier decay
    Centered,
    /// Fourier moduli of convolution powers of the tail law
    Convpower {
        #[arg(long, default_value_t = plot::CONVPOWER_NMAX)]
        n_max: u32,
        #[arg(long, default_value_t = plot::CONVPOWER_PMAX)]
        p_max: u32,
    },
    /// Discrete skeleton of the SDE on t_k = 2^k
    Skeleton,
    /// ECF uniformity test of eta_0
    Uniformity,
    /// Cross characters of eta_0 against noise values
    Independence,
    /// Chi-square test of floor(p eta_0)
    Buckets {
        #[arg(long)]
        p: Option<u64>,
    },
    /// Noise-measurability of frac(p eta_k)
    Measurable,
    /// Full regime-dependent battery
    Suite,
    /// List built-in scenarios
    List,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

macro_rules! impl_from_suite {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Suite(e.into())
            }
        })*
    };
}

impl_from_suite!(
    tsirelson::simulator::SimError,
    tsirelson::stats::StatsError,
    tsirelson::classifier::ClassifyError,
    tsirelson::torus::MeasureError
);

/// What a command prints and whether it counts as passing.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

impl Cli {
    fn scenario(&self) -> Result<Scenario, CliError> {
        match (&self.scenario, &self.builtin) {
            (Some(_), Some(_)) => Err(CliError::Usage("use either --scenario or --builtin".into())),
            (Some(path), None) => Ok(scenario::load_scenario(path, self.name.as_deref())?),
            (None, Some(name)) => builtins::builtin(name)
                .ok_or_else(|| CliError::Scenario(ScenarioError::NotFound(name.clone()))),
            (None, None) => Err(CliError::Usage("a scenario is required: --scenario PATH or --builtin NAME".into())),
        }
    }

    fn options(&self, s: &Scenario) -> Result<RunOptions, CliError> {
        let mut o = RunOptions::from_scenario(s);
        if let Some(v) = self.depth {
            o.depth = v;
        }
        if let Some(v) = self.samples {
            o.samples = v;
        }
        if let Some(v) = self.seed {
            o.seed = v;
        }
        if let Some(v) = self.pmax {
            o.pmax = v;
        }
        if let Some(a) = &self.anchor {
            o.anchor = a.parse().map_err(CliError::Usage)?;
        }
        o.truncation = self.truncation;
        if o.depth == 0 || o.samples == 0 || o.pmax == 0 {
            return Err(CliError::Usage("depth, samples and pmax must be positive".into()));
        }
        Ok(o)
    }

    fn write_out(&self, name: &str, body: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }

    fn render(&self, header: &str, tests: &[TestResult]) -> Outcome {
        let pass = tests.iter().all(|t| t.pass);
        let stdout = match self.format {
            Format::Csv => suite::render_csv(header, tests),
            Format::Text => suite::render_text(header, tests, pass),
        };
        Outcome { stdout, pass }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.list {
        return Ok(list());
    }
    match &cli.command {
        None => Err(CliError::Usage("no command given; try --help".into())),
        Some(Command::List) => Ok(list()),
        Some(Command::Classify) => classify_cmd(cli),
        Some(Command::Simulate) => simulate_cmd(cli),
        Some(Command::Limit) => limit_cmd(cli),
        Some(Command::Centered) => centered_cmd(cli),
        Some(Command::Convpower { n_max, p_max }) => convpower_cmd(cli, *n_max, *p_max),
        Some(Command::Skeleton) => skeleton_cmd(cli),
        Some(Command::Uniformity) => uniformity_cmd(cli),
        Some(Command::Independence) => independence_cmd(cli),
        Some(Command::Buckets { p }) => buckets_cmd(cli, *p),
        Some(Command::Measurable) => measurable_cmd(cli),
        Some(Command::Suite) => suite_cmd(cli),
    }
}

fn list() -> Outcome {
    let mut stdout = String::new();
    for (name, description) in builtins::list() {
        let _ = writeln!(stdout, "{name:30} {description}");
    }
    Outcome { stdout, pass: true }
}

fn classify_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let pmax = cli.pmax.unwrap_or(s.defaults.pmax);
    let r = classify(&s.sequence, pmax)?;
    let ev = &r.evidence;
    let header = format!(
        "scenario={} case={} p_mu={} certified={} scan_bound={}",
        s.name, r.case, ev.p_mu, ev.fully_certified, ev.scan_bound
    );
    let mut rows = Vec::new();
    for (p, v) in &ev.per_p {
        let (zeros, sum) = match v.status {
            LogProductStatus::Finite {
                tail_log_sum,
                zero_factor_count,
            } => (zero_factor_count.to_string(), format!("{tail_log_sum:e}")),
            LogProductStatus::Infinite => ("0".into(), "inf".into()),
            LogProductStatus::InfinitelyManyZeroFactors => ("inf".into(), "inf".into()),
        };
        rows.push([p.to_string(), v.is_finite().to_string(), zeros, sum, v.certified.to_string()]);
    }
    let mut stdout = String::new();
    match cli.format {
        Format::Csv => {
            let _ = writeln!(stdout, "# {header}; columns: p,member,zero_factors,tail_log_sum,certified");
            stdout.push_str("p,member,zero_factors,tail_log_sum,certified\n");
            for r in &rows {
                let _ = writeln!(stdout, "{}", r.join(","));
            }
        }
        Format::Text => {
            let _ = writeln!(stdout, "{header}");
            if let Trichotomy::C2 { centering } = &r.case {
                let _ = writeln!(stdout, "constructive centering: {}", centering.is_some());
            }
            let _ = writeln!(stdout, "{:>5} {:>7} {:>13} {:>14} {:>10}", "p", "member", "zero_factors", "tail_log_sum", "certified");
            for r in &rows {
                let _ = writeln!(stdout, "{:>5} {:>7} {:>13} {:>14} {:>10}", r[0], r[1], r[2], r[3], r[4]);
            }
        }
    }
    cli.write_out("classify.csv", &{
        let mut csv = format!("# {header}; columns: p,member,zero_factors,tail_log_sum,certified\n");
        csv.push_str("p,member,zero_factors,tail_log_sum,certified\n");
        for r in &rows {
            let _ = writeln!(csv, "{}", r.join(","));
        }
        csv
    })?;
    Ok(Outcome { stdout, pass: true })
}

/// One row per sample: anchor, eta_0, then xi_0, xi_-1, ..., xi_-N.
fn chain_csv(ensemble: &tsirelson::ChainEnsemble) -> String {
    let depth = ensemble.depth() as i64;
    let mut out = String::from("# one row per sample; torus values in [0;1); columns: sample,anchor,eta_0,xi_0..xi_-N\n");
    out.push_str("sample,anchor,eta_0");
    for k in (-depth..=0).rev() {
        let _ = write!(out, ",xi_{k}");
    }
    out.push('\n');
    for i in 0..ensemble.samples() {
        let _ = write!(out, "{i},{},{}", ensemble.anchors()[i].value(), ensemble.state(i, 0).value());
        for k in (-depth..=0).rev() {
            let _ = write!(out, ",{}", ensemble.noise(i, k).value());
        }
        out.push('\n');
    }
    out
}

fn simulate_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let o = cli.options(&s)?;
    let config = o.chain(&s);
    let ensemble = simulator::simulate(&config)?;
    let pw = ensemble.pathwise_report();
    let theta = ensemble.eta0();
    let mut tests = vec![
        TestResult::at_most("pathwise_recursion", if pw.recursion_exact { 0.0 } else { 1.0 }, 0.0, ""),
        TestResult::at_most("pathwise_telescope", pw.telescope_error, 1e-9, ""),
        TestResult::at_most("pathwise_noise_recovery", pw.noise_recovery_error, 1e-12, ""),
    ];
    for p in 1..=ECF_PMAX as i64 {
        let predicted = simulator::predicted_character(&config, p);
        let gap = (stats::ecf(&theta, p) - predicted).norm();
        tests.push(TestResult::at_most(
            &format!("ecf_vs_closed_form[p={p}]"),
            gap,
            stats::threshold(o.samples),
            format!("predicted modulus {}", fmt_num(predicted.norm())),
        ));
    }
    if cli.out.is_some() {
        cli.write_out("chain.csv", &chain_csv(&ensemble))?;
        cli.write_out("histogram.csv", &plot::histogram_csv(&theta, plot::HISTOGRAM_BINS))?;
    }
    let header = format!("simulate scenario={} depth={} samples={} seed={} anchor={}", s.name, o.depth, o.samples, o.seed, o.anchor);
    Ok(cli.render(&header, &tests))
}

fn limit_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let o = cli.options(&s)?;
    let (short, long) = suite::strong_limit_pair(&s, &o)?;
    let far = short
        .samples
        .iter()
        .zip(&long.samples)
        .filter(|(a, b)| a.circular_distance(**b) > suite::CAUCHY_EPS)
        .count();
    let bound = short.error_bound(suite::CAUCHY_EPS);
    let tests = vec![TestResult::at_most(
        "strong_limit_cauchy",
        far as f64 / o.samples as f64,
        (2.0 * bound).max(0.005),
        format!("Chebyshev bound {}", fmt_num(bound)),
    )];
    if cli.out.is_some() {
        let mut csv = format!(
            "# truncated strong solutions from the same noise; columns: sample,eta_L{},eta_L{}\n",
            short.truncation, long.truncation
        );
        let _ = writeln!(csv, "sample,eta_L{},eta_L{}", short.truncation, long.truncation);
        for (i, (a, b)) in short.samples.iter().zip(&long.samples).enumerate() {
            let _ = writeln!(csv, "{i},{},{}", a.value(), b.value());
        }
        cli.write_out("limit.csv", &csv)?;
    }
    let header = format!(
        "limit scenario={} L={} samples={} seed={} centering={}",
        s.name,
        o.truncation,
        o.samples,
        o.seed,
        short.centering.value()
    );
    Ok(cli.render(&header, &tests))
}

fn centered_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let o = cli.options(&s)?;
    let csv = plot::ecf_decay_csv(&s.sequence, &o)?;
    cli.write_out("ecf_decay.csv", &csv)?;
    let stdout = match cli.format {
        Format::Csv => csv,
        Format::Text => {
            let mut t = format!("centered scenario={} depth={} samples={} seed={}\n", s.name, o.depth, o.samples, o.seed);
            let _ = writeln!(t, "{:>6} {:>3} {:>14} {:>14}", "depth", "p", "predicted", "empirical");
            for line in csv.lines().skip(2) {
                let f: Vec<&str> = line.split(',').collect();
                let _ = writeln!(t, "{:>6} {:>3} {:>14} {:>14}", f[0], f[1], f[2], f[3]);
            }
            t
        }
    };
    Ok(Outcome { stdout, pass: true })
}

fn convpower_cmd(cli: &Cli, n_max: u32, p_max: u32) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let law = plot::convpower_law(&s.sequence);
    let table = simulator::convolution_power(&law, n_max, p_max);
    let csv = plot::convpower_csv(&table);
    cli.write_out("convpower.csv", &csv)?;
    let mut stdout = format!(
        "convpower scenario={} law={} n_max={} verdict={:?}\n",
        s.name,
        law.describe(),
        n_max,
        table.verdict
    );
    let _ = writeln!(stdout, "{:>4} {:>14} {:>11} {:>20}", "p", "modulus", "modulus_one", "first_n_below_1e-3");
    for row in &table.rows {
        let first = row.first_below(1e-3).map_or("never".into(), |n| n.to_string());
        let _ = writeln!(
            stdout,
            "{:>4} {:>14} {:>11} {:>20}",
            row.p,
            fmt_num(row.modulus),
            row.modulus_one,
            first
        );
    }
    if cli.format == Format::Csv {
        stdout = csv;
    }
    Ok(Outcome {
        stdout,
        pass: table.verdict != HaarVerdict::Undecided,
    })
}

fn skeleton_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let config = SkeletonConfig {
        depth: cli.depth.unwrap_or(12),
        samples: cli.samples.unwrap_or(scenario::DEFAULT_SAMPLES),
        seed: cli.seed.unwrap_or(scenario::DEFAULT_SEED),
    };
    let sk = simulator::skeleton(config)?;
    let n = config.samples;
    let uni = stats::uniformity_with_bias(&sk.eta0, ECF_PMAX, |p| config.ecf_bias(p))?;
    let cols: Vec<NoiseColumn> = [0i64, -3, -6]
        .into_iter()
        .filter(|j| -*j < config.depth as i64)
        .map(|j| (j, sk.xi_column(j)))
        .collect();
    let ind = stats::independence(&sk.eta0, &cols, &CROSS_PQ, &CROSS_PQ)?;
    let tests = vec![
        suite::excess_row("skeleton_uniformity", n, uni.entries.iter().map(|e| (e.modulus, e.threshold)), uni.pass, "frac(eta_0); p = 1..5"),
        TestResult::at_most(
            "skeleton_independence",
            ind.max_modulus(),
            stats::threshold(n),
            "frac(eta_0) vs xi_j; j in {0;-3;-6}",
        ),
    ];
    if cli.out.is_some() {
        let mut csv = String::from("# skeleton on t_k = 2^k; eta_0 as a torus value; columns: sample,eta_0,xi_0..xi_-K+1 (real)\n");
        csv.push_str("sample,eta_0");
        let js: Vec<i64> = (0..sk.steps() as i64).map(|j| -j).collect();
        for j in &js {
            let _ = write!(csv, ",xi_{j}");
        }
        csv.push('\n');
        for i in 0..n {
            let _ = write!(csv, "{i},{}", sk.eta0[i].value());
            for j in &js {
                let _ = write!(csv, ",{}", sk.xi(i, *j));
            }
            csv.push('\n');
        }
        cli.write_out("skeleton.csv", &csv)?;
    }
    let header = format!("skeleton K={} samples={} seed={}", config.depth, n, config.seed);
    Ok(cli.render(&header, &tests))
}

/// Columns of a sample CSV by name.
struct SampleTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl SampleTable {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let names: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Usage(format!("{}: empty sample file", path.display())))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() {
                return Err(CliError::Usage(format!("{}: row {} has {} fields", path.display(), row + 1, fields.len())));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{}: `{f}` is not a number", path.display())))?;
                col.push(v);
            }
        }
        Ok(SampleTable { names, columns })
    }

    fn points(&self, name: &str) -> Option<Vec<TorusPoint>> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(self.columns[idx].iter().map(|x| TorusPoint::new(*x)).collect())
    }

    fn theta(&self) -> Result<Vec<TorusPoint>, CliError> {
        self.points("eta_0")
            .ok_or_else(|| CliError::Usage("sample file has no eta_0 column".into()))
    }
}

fn uniformity_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let (header, report) = if let Some(path) = &cli.input {
        let table = SampleTable::read(path)?;
        let r = stats::uniformity(&table.theta()?, ECF_PMAX)?;
        (format!("uniformity input={}", path.display()), r)
    } else {
        let s = cli.scenario()?;
        let o = cli.options(&s)?;
        let config = o.chain(&s);
        let e = simulator::simulate(&config)?;
        let r = stats::uniformity_with_bias(&e.eta0(), ECF_PMAX, |p| config.ecf_bias(p))?;
        (format!("uniformity scenario={} depth={} samples={} seed={} anchor={}", s.name, o.depth, o.samples, o.seed, o.anchor), r)
    };
    let tests: Vec<TestResult> = report
        .entries
        .iter()
        .map(|e| TestResult::at_most(&format!("ecf[p={}]", e.p), e.modulus, e.threshold, ""))
        .collect();
    let out = cli.render(&header, &tests);
    cli.write_out("uniformity.csv", &suite::render_csv(&header, &tests))?;
    Ok(out)
}

fn independence_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let (header, report) = if let Some(path) = &cli.input {
        let table = SampleTable::read(path)?;
        let theta = table.theta()?;
        let cols: Vec<NoiseColumn> = CROSS_JS
            .iter()
            .filter_map(|&j| table.points(&format!("xi_{j}")).map(|c| (j, c)))
            .collect();
        if cols.is_empty() {
            return Err(CliError::Usage("sample file has no xi_j columns for j in {0, -5, -10}".into()));
        }
        let r = stats::independence(&theta, &cols, &CROSS_PQ, &CROSS_PQ)?;
        (format!("independence input={}", path.display()), r)
    } else {
        let s = cli.scenario()?;
        let o = cli.options(&s)?;
        let config = o.chain(&s);
        let e = simulator::simulate(&config)?;
        let cols: Vec<NoiseColumn> = CROSS_JS
            .iter()
            .filter(|j| -**j <= o.depth as i64)
            .map(|&j| (j, e.noise_column(j)))
            .collect();
        let r = stats::independence_with_bias(&e.eta0(), &cols, &CROSS_PQ, &CROSS_PQ, |p, j| config.cross_bias(p, j))?;
        (format!("independence scenario={} depth={} samples={} seed={} anchor={}", s.name, o.depth, o.samples, o.seed, o.anchor), r)
    };
    let tests: Vec<TestResult> = report
        .entries
        .iter()
        .map(|e| TestResult::at_most(&format!("cross[p={};q={};j={}]", e.p, e.q, e.j), e.modulus, e.threshold, ""))
        .collect();
    let out = cli.render(&header, &tests);
    cli.write_out("independence.csv", &suite::render_csv(&header, &tests))?;
    Ok(out)
}

fn buckets_cmd(cli: &Cli, p: Option<u64>) -> Result<Outcome, CliError> {
    let (header, samples, p) = if let Some(path) = &cli.input {
        let p = p.ok_or_else(|| CliError::Usage("--p is required with --input".into()))?;
        (format!("buckets input={}", path.display()), SampleTable::read(path)?.theta()?, p)
    } else {
        let s = cli.scenario()?;
        let mut o = cli.options(&s)?;
        if cli.anchor.is_none() {
            o.anchor = AnchorSpec::Uniform;
        }
        let p = match p {
            Some(p) => p,
            None => classify(&s.sequence, o.pmax)?.evidence.p_mu as u64,
        };
        let e = simulator::simulate(&o.chain(&s))?;
        (format!("buckets scenario={} depth={} samples={} seed={} anchor={}", s.name, o.depth, o.samples, o.seed, o.anchor), e.eta0(), p)
    };
    let r = stats::bucket_uniformity(&samples, p)?;
    let tests = vec![TestResult::at_most(
        &format!("chi_square[p={p}]"),
        r.statistic,
        r.critical,
        format!("counts {:?}", r.counts).replace(", ", " "),
    )];
    let out = cli.render(&header, &tests);
    cli.write_out("buckets.csv", &suite::render_csv(&header, &tests))?;
    Ok(out)
}

fn measurable_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.input.is_some() {
        return Err(CliError::Usage("measurable runs paired simulations; --input is not supported".into()));
    }
    let s = cli.scenario()?;
    let o = cli.options(&s)?;
    let p = match classify(&s.sequence, o.pmax)?.case {
        Trichotomy::C3 { p } => p,
        other => return Err(CliError::Usage(format!("measurable needs a C3 scenario, found {other}"))),
    };
    let tests = suite::c3_battery(&s, &o, p)
        .into_iter()
        .filter(|t| t.name.starts_with("measurability"))
        .collect::<Vec<_>>();
    let header = format!("measurable scenario={} p={p} depth={} samples={} seed={}", s.name, o.depth, o.samples, o.seed);
    let out = cli.render(&header, &tests);
    cli.write_out("measurable.csv", &suite::render_csv(&header, &tests))?;
    Ok(out)
}

fn suite_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let s = cli.scenario()?;
    let o = cli.options(&s)?;
    let report = suite::run_suite(&s, &o);
    eprintln!("wall time: {:.3} s", report.wall_time.as_secs_f64());
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), report.to_csv())?;
        let e = simulator::simulate(&o.chain(&s))?;
        plot::emit_plot_data(&s.sequence, &o, &e.eta0(), dir)?;
    }
    let stdout = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    Ok(Outcome {
        stdout,
        pass: report.pass,
    })
}
