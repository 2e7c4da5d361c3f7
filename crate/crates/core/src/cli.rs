//! Command-line front end. Everything except argument parsing and printing
//! is exposed as plain functions so the verification battery can call the
//! same code paths.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{
    gauge_alpha, mean_fidelity_nk, mean_root_fidelity_nk, moment_root_fidelity_series, pdf_fidelity_2k_closed, pdf_pure_induced,
    pdf_pure_pure, x_route_provenance, Provenance, SeriesConfig,
};
use crate::curve::{midpoint_grid, DistributionCurve, TabulatedCdf};
use crate::distnum::{pdf_fidelity_2k_integral, pdf_pure_bures, WConfig, WPipelineState};
use crate::error::{Error, Result};
use crate::montecarlo::{ks_statistic, run_experiment, ExperimentSpec, KsResult, Statistic};
use crate::quad::QuadConfig;
use crate::samplers::{sample_bures_many, sample_measure, BuresMcmcConfig, MeasureSpec, RngStream};
use crate::state::{validate_state, CMatrix, DensityMatrix, C64};
use crate::verify::{run_all, Suite, VerifyOptions};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "randfid", version, about = "Fidelity statistics between random density matrices")]
pub struct Cli {
    /// Worker threads for Monte Carlo (falls back to FID_THREADS).
    #[arg(long, env = "FID_THREADS", global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureArg {
    Fs,
    Induced,
    Hs,
    Bures,
    RealInduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Closed,
    Series,
    Mc,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticArg {
    F,
    Sqrtf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PurePure,
    PureInduced,
    PureHs,
    PureBures,
    #[value(name = "sym-2k")]
    Sym2k,
    SymNk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Fast,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample density matrices and write them as JSON.
    Sample {
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long)]
        n_dim: usize,
        /// Environment dimension (induced and real-induced only).
        #[arg(long)]
        k_dim: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean fidelity (or root fidelity) of two μ_{N,K} states. N and K accept
    /// single values, comma lists or inclusive ranges like 2..6.
    Mean {
        #[arg(long)]
        n_dim: String,
        #[arg(long)]
        k_dim: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = StatisticArg::F)]
        statistic: StatisticArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fidelity density on a midpoint grid of [0, 1], optionally with a
    /// Monte Carlo histogram on the same bins.
    Dist {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        n_dim: usize,
        #[arg(long)]
        k_dim: Option<f64>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Number of Monte Carlo pairs for the overlay.
        #[arg(long)]
        mc_overlay: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the acceptance battery; exit 4 if anything fails.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Multiplies every tolerance (values below 1 tighten the battery).
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// The gauge α = (F̃ − ⟨F⟩)/√(⟨F²⟩ − ⟨F⟩²) for two μ_{N,K} states.
    Gauge {
        #[arg(long)]
        n_dim: usize,
        #[arg(long)]
        k_dim: f64,
        #[arg(long)]
        f_tilde: f64,
    },
}

/// The JSON envelope shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub parameters: Value,
    pub results: Value,
}

impl OutputRecord {
    pub fn new(command: &str, parameters: Value, results: Value) -> Self {
        OutputRecord { schema_version: SCHEMA_VERSION.into(), command: command.into(), parameters, results }
    }
}

/// Errors split into usage (exit 2) and computation (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::Domain(_) | Error::UnsupportedK(..) => CliError::Usage(e.to_string()),
            e => CliError::Compute(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

// ---------------------------------------------------------------- sample

pub fn measure_spec(measure: MeasureArg, n: usize, k: Option<usize>) -> CliResult<MeasureSpec> {
    let need_k = || k.ok_or_else(|| CliError::Usage("--k-dim is required for this measure".into()));
    let m = match measure {
        MeasureArg::Fs => MeasureSpec::FubiniStudyPure { n },
        MeasureArg::Hs => MeasureSpec::HilbertSchmidt { n },
        MeasureArg::Bures => MeasureSpec::Bures { n },
        MeasureArg::Induced => MeasureSpec::Induced { n, k: need_k()? },
        MeasureArg::RealInduced => MeasureSpec::RealInduced { n, k: need_k()? },
    };
    m.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(m)
}

pub fn matrix_json(rho: &DensityMatrix) -> Value {
    let m = rho.matrix();
    let n = rho.dim();
    let entries: Vec<[f64; 2]> = (0..n).flat_map(|i| (0..n).map(move |j| [m[(i, j)].re, m[(i, j)].im])).collect();
    json!({ "dim": n, "entries": entries })
}

/// Inverse of [`matrix_json`]; the result is validated as a density matrix.
pub fn matrix_from_json(v: &Value) -> Result<DensityMatrix> {
    let bad = |m: &str| Error::InvalidSpec(format!("matrix JSON: {m}"));
    let n = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
    let e = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing entries"))?;
    if e.len() != n * n {
        return Err(bad("entry count is not dim^2"));
    }
    let mut vals = Vec::with_capacity(n * n);
    for x in e {
        let pair: [f64; 2] = serde_json::from_value(x.clone()).map_err(|_| bad("entry is not [re, im]"))?;
        vals.push(C64::new(pair[0], pair[1]));
    }
    validate_state(&CMatrix::from_row_slice(n, n, &vals))
}

/// Read every matrix of a `sample` output record.
pub fn matrices_from_record(rec: &OutputRecord) -> Result<Vec<DensityMatrix>> {
    let list = rec.results.get("matrices").and_then(Value::as_array).ok_or_else(|| Error::InvalidSpec("record has no matrices".into()))?;
    list.iter().map(matrix_from_json).collect()
}

pub fn sample_record(measure: MeasureArg, n: usize, k: Option<usize>, count: usize, seed: u64) -> CliResult<OutputRecord> {
    let spec = measure_spec(measure, n, k)?;
    let cfg = BuresMcmcConfig::default();
    let states = if let MeasureSpec::Bures { n } = spec {
        // one chain for the whole batch
        sample_bures_many(n, count, &mut RngStream::new(seed, 0).rng(), &cfg)?
    } else {
        (0..count).map(|i| sample_measure(&spec, &mut RngStream::new(seed, i as u64).rng(), &cfg)).collect::<Result<Vec<_>>>()?
    };
    let params = json!({ "measure": measure, "n_dim": n, "k_dim": k, "count": count, "seed": seed, "rng": "chacha8" });
    let mats: Vec<Value> = states.iter().map(matrix_json).collect();
    Ok(OutputRecord::new("sample", params, json!({ "matrices": mats, "provenance": Provenance::MonteCarlo })))
}

// ---------------------------------------------------------------- mean

/// "3", "1,2,5" or "2..6" (inclusive, integer steps).
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (i64, i64) = match (a.trim().parse(), b.trim().parse()) {
                (Ok(a), Ok(b)) if a <= b => (a, b),
                _ => return usage(format!("bad range '{part}'")),
            };
            out.extend((a..=b).map(|v| v as f64));
        } else {
            match part.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return usage(format!("bad number '{part}'")),
            }
        }
    }
    if out.is_empty() {
        return usage("empty list");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub n: usize,
    pub k: f64,
    pub statistic: String,
    pub value: f64,
    pub error: f64,
    pub provenance: Provenance,
}

fn as_dim(v: f64, name: &str) -> CliResult<usize> {
    if v >= 1.0 && v == v.round() {
        Ok(v as usize)
    } else {
        usage(format!("{name} must be a positive integer, got {v}"))
    }
}

pub fn mean_rows(ns: &[f64], ks: &[f64], method: MethodArg, statistic: StatisticArg, samples: usize, seed: u64) -> CliResult<Vec<MeanRow>> {
    let (m, stat, name) = match statistic {
        StatisticArg::F => (2, Statistic::Fidelity, "fidelity"),
        StatisticArg::Sqrtf => (1, Statistic::RootFidelity, "root_fidelity"),
    };
    let methods: &[MethodArg] = match method {
        MethodArg::All => &[MethodArg::Closed, MethodArg::Series, MethodArg::Mc],
        _ => std::slice::from_ref(&method),
    };
    let mut rows = Vec::new();
    for (i, &nf) in ns.iter().enumerate() {
        let n = as_dim(nf, "--n-dim")?;
        for (j, &k) in ks.iter().enumerate() {
            if !(k > 0.0) {
                return usage(format!("--k-dim must be positive, got {k}"));
            }
            for &meth in methods {
                let row = |value, error, provenance| MeanRow { n, k, statistic: name.into(), value, error, provenance };
                rows.push(match meth {
                    MethodArg::Closed => {
                        let v = if m == 1 { mean_root_fidelity_nk(n, k)? } else { mean_fidelity_nk(n, k)? };
                        row(v, 0.0, x_route_provenance(n, k))
                    }
                    MethodArg::Series => {
                        let t = moment_root_fidelity_series(n, k, m, &SeriesConfig::default())?;
                        let e = t.entry(m).expect("requested moment");
                        row(e.value, e.error, e.provenance)
                    }
                    MethodArg::Mc => {
                        let kd = as_dim(k, "--k-dim (Monte Carlo)")?;
                        let cell_seed = seed.wrapping_add((i * ks.len() + j) as u64);
                        let r = run_experiment(&ExperimentSpec::symmetric(MeasureSpec::Induced { n, k: kd }, samples, cell_seed, stat))?;
                        row(r.mean, r.stderr, Provenance::MonteCarlo)
                    }
                    MethodArg::All => unreachable!(),
                });
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------- dist

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistOutput {
    /// Absent for families without an analytic or quadrature curve.
    pub curve: Option<DistributionCurve>,
    pub histogram: Option<DistributionCurve>,
    pub ks: Option<KsResult>,
}

/// Reference density of F for a family, or None where only Monte Carlo is
/// available (symmetric anti-Wishart, 2 ≤ K < N).
pub struct Reference {
    pub pdf: Box<dyn Fn(f64) -> Result<f64> + Sync>,
    pub provenance: Provenance,
    pub label: String,
    /// Cells for the KS reference table; sym-nk tabulates in √F.
    root_variable: bool,
    w: Option<std::sync::Arc<WPipelineState>>,
}

fn family_k(family: Family, n: usize, k: Option<f64>) -> CliResult<f64> {
    match family {
        Family::PurePure => Ok(1.0),
        Family::PureHs => Ok(n as f64),
        Family::PureBures => Ok(f64::NAN),
        _ => match k {
            Some(k) if k > 0.0 => Ok(k),
            Some(k) => usage(format!("--k-dim must be positive, got {k}")),
            None => usage("--k-dim is required for this family"),
        },
    }
}

pub fn reference(family: Family, n: usize, k: Option<f64>) -> CliResult<Option<Reference>> {
    if n < 2 {
        return usage("--n-dim must be at least 2");
    }
    let kk = family_k(family, n, k)?;
    let quad = QuadConfig::default().with_tol(1e-12, 1e-10);
    let mk = |pdf: Box<dyn Fn(f64) -> Result<f64> + Sync>, provenance, label: String| {
        Some(Reference { pdf, provenance, label, root_variable: false, w: None })
    };
    Ok(match family {
        Family::PurePure => mk(Box::new(move |f| pdf_pure_pure(n, f)), Provenance::ClosedForm, format!("pure-pure(N={n})")),
        Family::PureInduced | Family::PureHs => {
            mk(Box::new(move |f| pdf_pure_induced(n, kk, f)), Provenance::ClosedForm, format!("pure-induced(N={n},K={kk})"))
        }
        Family::PureBures => {
            let prov = if n == 2 { Provenance::ClosedForm } else { Provenance::Quadrature };
            mk(Box::new(move |f| pdf_pure_bures(n, f, &quad)), prov, format!("pure-bures(N={n})"))
        }
        Family::Sym2k => {
            if !(kk >= 1.0) {
                return usage("sym-2k needs K >= 1");
            }
            if kk == 1.0 || pdf_fidelity_2k_closed(0.5, kk).is_err() {
                mk(Box::new(move |f| pdf_fidelity_2k_integral(f, kk, &quad)), Provenance::Quadrature, format!("sym-2k(K={kk})"))
            } else {
                mk(Box::new(move |f| pdf_fidelity_2k_closed(f, kk)), Provenance::ClosedForm, format!("sym-2k(K={kk})"))
            }
        }
        Family::SymNk => {
            let kd = as_dim(kk, "--k-dim")?;
            if kd == 1 {
                mk(Box::new(move |f| pdf_pure_pure(n, f)), Provenance::ClosedForm, format!("sym-nk(N={n},K=1)"))
            } else if n == 2 {
                mk(Box::new(move |f| pdf_fidelity_2k_closed(f, kk)), Provenance::ClosedForm, format!("sym-nk(N=2,K={kd})"))
            } else if kd >= n {
                let st = std::sync::Arc::new(WPipelineState::new(n, kd, WConfig::default())?);
                let s2 = st.clone();
                Some(Reference {
                    pdf: Box::new(move |f| s2.pdf(f)),
                    provenance: Provenance::Quadrature,
                    label: format!("sym-nk(N={n},K={kd})"),
                    root_variable: true,
                    w: Some(st),
                })
            } else {
                None
            }
        }
    })
}

impl Reference {
    /// CDF of F, tabulated by cumulative quadrature.
    pub fn cdf_table(&self) -> Result<Box<dyn Fn(f64) -> f64>> {
        if self.root_variable {
            let st = self.w.clone().expect("pipeline state");
            let t = TabulatedCdf::from_pdf(|s| st.w_raw(s), 0.0, 1.0, 400)?;
            Ok(Box::new(move |f: f64| t.cdf(f.max(0.0).sqrt())))
        } else {
            let t = TabulatedCdf::from_pdf(&self.pdf, 0.0, 1.0, 400)?;
            Ok(Box::new(move |f| t.cdf(f)))
        }
    }
}

/// The pair of measures whose fidelity follows a family's law.
pub fn family_measures(family: Family, n: usize, k: Option<f64>) -> CliResult<(MeasureSpec, MeasureSpec)> {
    let kk = family_k(family, n, k)?;
    let fs = MeasureSpec::FubiniStudyPure { n };
    let int_k = |k: f64| as_dim(k, "--k-dim (Monte Carlo)");
    Ok(match family {
        Family::PurePure => (fs, fs),
        Family::PureHs => (fs, MeasureSpec::HilbertSchmidt { n }),
        Family::PureInduced => (fs, MeasureSpec::Induced { n, k: int_k(kk)? }),
        Family::PureBures => (fs, MeasureSpec::Bures { n }),
        Family::Sym2k => {
            let m = if kk == 1.5 { MeasureSpec::Bures { n: 2 } } else { MeasureSpec::Induced { n: 2, k: int_k(kk)? } };
            (m, m)
        }
        Family::SymNk => {
            let m = MeasureSpec::Induced { n, k: int_k(kk)? };
            (m, m)
        }
    })
}

pub fn dist_output(family: Family, n: usize, k: Option<f64>, grid: usize, overlay: Option<usize>, seed: u64) -> CliResult<DistOutput> {
    if grid == 0 {
        return usage("--grid must be positive");
    }
    let n = if family == Family::Sym2k { 2 } else { n };
    let reference = reference(family, n, k)?;
    let fgrid = midpoint_grid(grid);
    let curve = match &reference {
        Some(r) => {
            let mut pdf = Vec::with_capacity(grid);
            for &f in &fgrid {
                pdf.push((r.pdf)(f)?);
            }
            let mut c = DistributionCurve::new(r.label.clone(), fgrid.clone(), pdf, r.provenance);
            if let Some(st) = &r.w {
                c.normalization = st.normalization()?;
            }
            Some(c)
        }
        None if overlay.is_none() => {
            return usage("no analytic curve for symmetric K < N; pass --mc-overlay for a histogram");
        }
        None => None,
    };
    let (histogram, ks) = match overlay {
        None => (None, None),
        Some(samples) => {
            let (a, b) = family_measures(family, n, k)?;
            let mut spec = ExperimentSpec::new(a, b, samples, seed, Statistic::Fidelity);
            spec.histogram_bins = grid;
            let r = run_experiment(&spec)?;
            let ks = match &reference {
                Some(rf) => Some(ks_statistic(&r.samples, rf.cdf_table()?)?),
                None => None,
            };
            (Some(r.histogram), ks)
        }
    };
    Ok(DistOutput { curve, histogram, ks })
}

/// CSV with a header and columns F, pdf, pdf_err, hist, hist_err (absent
/// columns dropped), 12 significant digits.
pub fn dist_csv(d: &DistOutput) -> String {
    let mut cols: Vec<(&str, &Vec<f64>)> = Vec::new();
    let f = d.curve.as_ref().or(d.histogram.as_ref()).map(|c| &c.f);
    let Some(f) = f else { return String::new() };
    cols.push(("F", f));
    if let Some(c) = &d.curve {
        cols.push(("pdf", &c.pdf));
        if let Some(e) = &c.pdf_err {
            cols.push(("pdf_err", e));
        }
    }
    if let Some(h) = &d.histogram {
        cols.push(("hist", &h.pdf));
        if let Some(e) = &h.pdf_err {
            cols.push(("hist_err", e));
        }
    }
    let mut out = cols.iter().map(|c| c.0).collect::<Vec<_>>().join(",");
    out.push('\n');
    for i in 0..f.len() {
        let line: Vec<String> = cols.iter().map(|c| fmt12(c.1[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn mean_csv(rows: &[MeanRow]) -> String {
    let mut out = String::from("N,K,statistic,value,error,provenance\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.k, r.statistic, fmt12(r.value), fmt12(r.error), r.provenance.as_str()));
    }
    out
}

/// 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let v: f64 = s.parse().expect("round trip");
    let mag = v.abs().log10().floor() as i32;
    if (-5..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let t = format!("{:.*}", decimals, v);
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        s
    }
}

// ---------------------------------------------------------------- gauge

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeOutput {
    pub alpha: f64,
    pub mean_f: f64,
    pub mean_f2: f64,
    pub provenance: Provenance,
    pub error: f64,
}

/// α from the series moments ⟨F⟩ = ⟨(√F)²⟩ and ⟨F²⟩ = ⟨(√F)⁴⟩.
pub fn gauge_output(n: usize, k: f64, f_tilde: f64) -> CliResult<GaugeOutput> {
    if n == 0 || !(k > 0.0) {
        return usage("need --n-dim >= 1 and --k-dim > 0");
    }
    if !(0.0..=1.0).contains(&f_tilde) {
        return usage("--f-tilde must lie in [0, 1]");
    }
    let t = moment_root_fidelity_series(n, k, 4, &SeriesConfig::default())?;
    let e2 = t.entry(2).expect("m=2");
    let e4 = t.entry(4).expect("m=4");
    let alpha = gauge_alpha(f_tilde, e2.value, e4.value).map_err(CliError::Compute)?;
    Ok(GaugeOutput { alpha, mean_f: e2.value, mean_f2: e4.value, provenance: e2.provenance, error: e2.error.max(e4.error) })
}

// ---------------------------------------------------------------- driver

fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn record_text(rec: &OutputRecord) -> String {
    let mut s = serde_json::to_string_pretty(rec).expect("serializable record");
    s.push('\n');
    s
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Sample { measure, n_dim, k_dim, count, seed, out } => {
            let rec = sample_record(measure, n_dim, k_dim, count, seed)?;
            let text = record_text(&rec);
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?,
                None => emit(&text)?,
            }
        }
        Command::Mean { n_dim, k_dim, method, statistic, samples, seed, format } => {
            let ns = parse_list(&n_dim)?;
            let ks = parse_list(&k_dim)?;
            if samples == 0 {
                return usage("--samples must be positive");
            }
            let rows = mean_rows(&ns, &ks, method, statistic, samples, seed)?;
            match format {
                Format::Csv => emit(&mean_csv(&rows))?,
                Format::Json => {
                    let params = json!({ "n_dim": n_dim, "k_dim": k_dim, "method": method, "statistic": statistic, "samples": samples, "seed": seed });
                    emit(&record_text(&OutputRecord::new("mean", params, json!({ "rows": rows }))))?
                }
            }
        }
        Command::Dist { family, n_dim, k_dim, grid, mc_overlay, seed, format } => {
            let d = dist_output(family, n_dim, k_dim, grid, mc_overlay, seed)?;
            if let Some(ks) = &d.ks {
                eprintln!("ks: D = {:.6}, p = {:.6}, n = {}", ks.d, ks.p_value, ks.n);
            }
            match format {
                Format::Csv => emit(&dist_csv(&d))?,
                Format::Json => {
                    let params = json!({ "family": family, "n_dim": n_dim, "k_dim": k_dim, "grid": grid, "mc_overlay": mc_overlay, "seed": seed });
                    emit(&record_text(&OutputRecord::new("dist", params, serde_json::to_value(&d).expect("serializable"))))?
                }
            }
        }
        Command::Verify { suite, seed, tol_scale } => {
            if !(tol_scale >= 0.0) {
                return usage("--tol-scale must be non-negative");
            }
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let reports = run_all(&VerifyOptions { suite, seed, tol_scale });
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!("{}\n", r.line()));
                for c in r.checks.iter().filter(|c| !c.passed) {
                    text.push_str(&format!("    failed: {} ({})\n", c.name, c.detail));
                }
            }
            emit(&text)?;
            if reports.iter().any(|r| !r.passed()) {
                return Ok(EXIT_VERIFY);
            }
        }
        Command::Gauge { n_dim, k_dim, f_tilde } => {
            let g = gauge_output(n_dim, k_dim, f_tilde)?;
            let params = json!({ "n_dim": n_dim, "k_dim": k_dim, "f_tilde": f_tilde });
            emit(&record_text(&OutputRecord::new("gauge", params, serde_json::to_value(&g).expect("serializable"))))?;
        }
    }
    Ok(EXIT_OK)
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads;
    let go = move || match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            EXIT_COMPUTE
        }
    };
    match threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            EXIT_USAGE
        }
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(go),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                EXIT_COMPUTE
            }
        },
        None => go(),
    }
}
