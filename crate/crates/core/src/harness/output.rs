//! CSV and plot-data writers.
//!
//! Result files start with the resolved config, one line per TOML line, each
//! prefixed by [`CONFIG_PREFIX`]. [`embedded_config`] recovers it, so a result
//! file can be passed back as a config.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::schemes::{MetrologyResult, SchemeKind};

pub const CONFIG_PREFIX: &str = "#| ";

pub const RESULTS_HEADER: [&str; 7] = [
    "scheme",
    "T_s",
    "qfi_s2",
    "sensitivity",
    "evals",
    "seed",
    "converged",
];

pub const NMR_HEADER: [&str; 10] = [
    "scheme",
    "T_s",
    "T_over_T2",
    "qfi_theo_s2",
    "qfi_fidelity_s2",
    "sensitivity",
    "evals",
    "seed",
    "converged",
    "t2_s",
];

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// The prefixed config block of a result file, or the whole text when there
/// is none.
pub fn embedded_config(text: &str) -> String {
    let marker = CONFIG_PREFIX.trim_end();
    let block: Vec<&str> = text
        .lines()
        .filter_map(|l| {
            l.strip_prefix(CONFIG_PREFIX)
                .or_else(|| (l == marker).then_some(""))
        })
        .collect();
    if block.is_empty() {
        text.to_owned()
    } else {
        block.join("\n") + "\n"
    }
}

fn write_config_block(out: &mut impl Write, config_toml: &str) -> io::Result<()> {
    for line in config_toml.lines() {
        if line.is_empty() {
            writeln!(out, "{}", CONFIG_PREFIX.trim_end())?;
        } else {
            writeln!(out, "{CONFIG_PREFIX}{line}")?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_results(
    mut out: impl Write,
    config_toml: &str,
    results: &[MetrologyResult],
) -> io::Result<()> {
    write_config_block(&mut out, config_toml)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for r in results {
        w.write_record([
            r.scheme.name().to_owned(),
            fmt_float(r.t),
            fmt_float(r.qfi),
            fmt_float(r.sensitivity),
            r.evaluations.to_string(),
            r.seed.to_string(),
            r.converged.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// One row of an NMR-protocol result file.
#[derive(Debug, Clone, PartialEq)]
pub struct NmrRow {
    pub scheme: SchemeKind,
    pub t: f64,
    pub t_over_t2: f64,
    /// Spectral QFI.
    pub qfi_theo: f64,
    /// Fidelity-based QFI at the configured frequency shift.
    pub qfi_fidelity: f64,
    pub sensitivity: f64,
    pub evaluations: usize,
    pub seed: u64,
    pub converged: bool,
    pub t2: f64,
}

pub fn write_nmr(
    mut out: impl Write,
    config_toml: &str,
    comments: &[String],
    rows: &[NmrRow],
) -> io::Result<()> {
    write_config_block(&mut out, config_toml)?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NMR_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.scheme.name().to_owned(),
            fmt_float(r.t),
            fmt_float(r.t_over_t2),
            fmt_float(r.qfi_theo),
            fmt_float(r.qfi_fidelity),
            fmt_float(r.sensitivity),
            r.evaluations.to_string(),
            r.seed.to_string(),
            r.converged.to_string(),
            fmt_float(r.t2),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// Path of the plot-data file for `scheme` next to `csv_path`.
pub fn plot_data_path(csv_path: &Path, scheme: SchemeKind) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    csv_path.with_file_name(format!("{stem}.{}.dat", scheme.name()))
}

/// Two-column `T QFI` files, one per scheme present in `results`.
pub fn write_plot_data(csv_path: &Path, results: &[MetrologyResult]) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for scheme in SchemeKind::ALL {
        let rows: Vec<&MetrologyResult> = results.iter().filter(|r| r.scheme == scheme).collect();
        if rows.is_empty() {
            continue;
        }
        let path = plot_data_path(csv_path, scheme);
        let mut f = io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(f, "# {}: T_s qfi_s2", scheme.name())?;
        for r in rows {
            writeln!(f, "{} {}", fmt_float(r.t), fmt_float(r.qfi))?;
        }
        f.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub t: f64,
    pub qfi: f64,
    pub sensitivity: f64,
    pub evaluations: usize,
    pub seed: u64,
    pub converged: bool,
}

/// Read the data rows of a file written by [`write_results`].
pub fn read_results(text: &str) -> Result<Vec<ResultRow>, csv::Error> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let num = |i: usize| field(i).parse::<f64>().unwrap_or(f64::NAN);
            Ok(ResultRow {
                scheme: field(0).to_owned(),
                t: num(1),
                qfi: num(2),
                sensitivity: num(3),
                evaluations: field(4).parse().unwrap_or(0),
                seed: field(5).parse().unwrap_or(0),
                converged: field(6) == "true",
            })
        })
        .collect()
}
