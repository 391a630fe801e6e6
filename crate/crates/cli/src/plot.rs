//! Plot-ready CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tsirelson::simulator::{self, ConvolutionPowerTable};
use tsirelson::{stats, MeasureSequence, TorusMeasure, TorusPoint};

use crate::suite::{RunOptions, SuiteError, ECF_PMAX};

pub const HISTOGRAM_BINS: u64 = 50;
pub const CONVPOWER_NMAX: u32 = 10_000;
pub const CONVPOWER_PMAX: u32 = 10;

/// Depths `1..=10`, then roughly geometric up to `depth`.
pub fn decay_depths(depth: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=depth.min(10)).collect();
    let mut d = 10.0f64;
    while (d as u64) < depth {
        d *= 1.5;
        let next = (d.round() as u64).min(depth);
        if next > *out.last().unwrap_or(&0) {
            out.push(next);
        }
    }
    out
}

/// `|E exp(2iπ p S_d)|` for `S_d = xi_0 + ... + xi_{-d} + alpha_{-d}`,
/// closed form next to the Monte Carlo estimate.
pub fn ecf_decay_csv(seq: &MeasureSequence, options: &RunOptions) -> Result<String, SuiteError> {
    let depths = decay_depths(options.depth);
    let ls: Vec<i64> = depths.iter().map(|d| -(*d as i64)).collect();
    let products = simulator::centered_products_multi(seq, 0, &ls, options.samples, options.seed)?;
    let window = seq.window(options.depth);
    let mut out = String::from(
        "# centered products xi_0 + ... + xi_-depth + alpha_-depth; columns: depth,p,predicted,empirical\n",
    );
    out.push_str("depth,p,predicted,empirical\n");
    for (d, prod) in depths.iter().zip(&products) {
        let sub = &window[window.len() - *d as usize - 1..];
        for p in 1..=ECF_PMAX as i64 {
            let predicted = simulator::window_product(sub, p, None);
            let empirical = stats::ecf(&prod.samples, p).norm();
            let _ = writeln!(out, "{d},{p},{predicted:e},{empirical:e}");
        }
    }
    Ok(out)
}

/// `n = 1, 2, 5, 10, 20, 50, ...` up to `n_max`.
pub fn power_grid(n_max: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut scale = 1u32;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = m * scale;
            if n > n_max {
                break 'outer;
            }
            out.push(n);
        }
        scale = match scale.checked_mul(10) {
            Some(s) => s,
            None => break,
        };
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

pub fn convpower_csv(table: &ConvolutionPowerTable) -> String {
    let mut out = format!(
        "# |fourier(nu, p)|^n by frequency; verdict={:?}; columns: p,n,value\n",
        table.verdict
    );
    out.push_str("p,n,value\n");
    for row in &table.rows {
        for n in power_grid(table.n_max) {
            let _ = writeln!(out, "{},{n},{:e}", row.p, row.value(n));
        }
    }
    out
}

/// Counts per bin of `[0, 1)` with the uniform expectation.
pub fn histogram_csv(samples: &[TorusPoint], bins: u64) -> String {
    let mut counts = vec![0u64; bins as usize];
    for s in samples {
        counts[s.bucket(bins) as usize] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let mut out = String::from("# histogram of eta_0 on [0;1); columns: bin,lo,hi,count,expected\n");
    out.push_str("bin,lo,hi,count,expected\n");
    for (b, c) in counts.iter().enumerate() {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        let _ = writeln!(out, "{b},{lo},{hi},{c},{expected}");
    }
    out
}

/// The law whose convolution powers are tabulated: the first tail measure.
pub fn convpower_law(seq: &MeasureSequence) -> TorusMeasure {
    seq.measure_at(-(seq.prefix_len() as i64))
        .expect("prefix length is a valid index")
}

/// Writes `ecf_decay.csv`, `convpower.csv` and `histogram.csv`.
pub fn emit_plot_data(
    seq: &MeasureSequence,
    options: &RunOptions,
    eta0: &[TorusPoint],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PlotError> {
    fs::create_dir_all(out_dir)?;
    let table = simulator::convolution_power(&convpower_law(seq), CONVPOWER_NMAX, CONVPOWER_PMAX);
    let files = [
        ("ecf_decay.csv", ecf_decay_csv(seq, options)?),
        ("convpower.csv", convpower_csv(&table)),
        ("histogram.csv", histogram_csv(eta0, HISTOGRAM_BINS)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

impl From<simulator::SimError> for PlotError {
    fn from(e: simulator::SimError) -> Self {
        PlotError::Suite(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{builtin, half_atoms};
    use tsirelson::simulator::Stream;

    #[test]
    fn grids() {
        assert_eq!(power_grid(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(power_grid(30), vec![1, 2, 5, 10, 20, 30]);
        let d = decay_depths(30);
        assert_eq!(&d[..10], &(1..=10).collect::<Vec<_>>()[..]);
        assert_eq!(*d.last().unwrap(), 30);
        assert!(d.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ecf_decay_predicted_is_monotone() {
        let s = builtin("c1_wrapped_gaussian").unwrap();
        let mut o = RunOptions::from_scenario(&s);
        o.samples = 1000;
        let csv = ecf_decay_csv(&s.sequence, &o).unwrap();
        let mut last = [f64::INFINITY; 6];
        for line in csv.lines().skip(2) {
            let f: Vec<&str> = line.split(',').collect();
            let p: usize = f[1].parse().unwrap();
            let predicted: f64 = f[2].parse().unwrap();
            assert!(predicted <= last[p]);
            last[p] = predicted;
        }
    }

    #[test]
    fn uniform_histogram_within_binomial_band() {
        let n = 100_000usize;
        let mut rng = simulator::substream(5, Stream::Noise, 0);
        let draws: Vec<TorusPoint> = (0..n).map(|_| TorusMeasure::Uniform.sample(&mut rng)).collect();
        let csv = histogram_csv(&draws, HISTOGRAM_BINS);
        let e = n as f64 / 50.0;
        for line in csv.lines().skip(2) {
            let count: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            assert!((count - e).abs() <= 4.0 * e.sqrt(), "{line}");
        }
    }

    #[test]
    fn arithmetic_row_is_constant_one() {
        let table = simulator::convolution_power(&half_atoms(), 1000, 4);
        let csv = convpower_csv(&table);
        for line in csv.lines().skip(2).filter(|l| l.starts_with("2,")) {
            assert_eq!(line.split(',').nth(2).unwrap(), "1e0");
        }
    }
}
