//! Command-line front end: channel-spec loading, run configuration, and
//! deterministic CSV/JSON output for every computation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{cyclic_sequence, ordering_check, BoundSetup};
use crate::channel::{preset, ProbabilityVector, SymmetricCqChannel};
use crate::divergence::mutual_information_and_capacity;
use crate::error::{Error, Result};
use crate::exponent::{closed_form_sigma, ns_pairs, saddle_fixed_point, ChannelContext, Tolerances};
use crate::largedev::{cumulants, cumulants_dual, legendre};
use crate::oracle::{min_type1, type_errors, TestOperator};
use crate::qcore::{cmatrix_from_pairs, trace_distance, validate, SUPPORT_CUTOFF};
use crate::value::ExtendedReal;

#[derive(Debug, Parser)]
#[command(name = "cqsp", version, about = "Sphere-packing exponents and finite-n bounds for symmetric c-q channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Capacity,
    Exponent,
    Saddle,
    Bound,
    Oracle,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity and R_inf.
    Capacity(RunArgs),
    /// E_sp(R), s* and alpha* over a rate grid.
    Exponent(RunArgs),
    /// Saddle point sigma* with its certification residuals.
    Saddle(RunArgs),
    /// Finite-n bound reports over an n grid.
    Bound(RunArgs),
    /// Exact Neyman-Pearson values against the bound for small n.
    Oracle(RunArgs),
    /// Runs the invariant suite; exits nonzero on any failure.
    Verify(RunArgs),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Capacity(a) => (CommandKind::Capacity, a),
            Command::Exponent(a) => (CommandKind::Exponent, a),
            Command::Saddle(a) => (CommandKind::Saddle, a),
            Command::Bound(a) => (CommandKind::Bound, a),
            Command::Oracle(a) => (CommandKind::Oracle, a),
            Command::Verify(a) => (CommandKind::Verify, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON channel spec.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Preset channel name (bsc, bec, pure-hadamard, mixed-hadamard).
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    /// Rate grid `a:b:steps` (inclusive, evenly spaced).
    #[arg(long)]
    pub rates: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Blocklength grid `a:b:steps` (inclusive, rounded to integers).
    #[arg(long = "n-range")]
    pub n_range: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long = "tol-fixed-point")]
    pub tol_fixed_point: Option<f64>,
    #[arg(long = "tol-search")]
    pub tol_search: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub channel: Option<PathBuf>,
    pub preset: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub rate: Option<f64>,
    pub rates: Option<Vec<f64>>,
    pub rate_grid: Option<String>,
    pub n: Option<Vec<u64>>,
    pub n_range: Option<String>,
    pub gamma: Option<f64>,
    pub xi: Option<f64>,
    pub tolerances: Option<ToleranceConfig>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub fixed_point: Option<f64>,
    pub search: Option<f64>,
    pub support_cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    File(PathBuf),
    Preset { name: String, params: BTreeMap<String, f64> },
    /// No channel given: `verify` runs on the shipped presets, other commands refuse.
    Unspecified,
}

/// Resolved configuration after applying flags > config file > defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: ChannelSource,
    pub tolerances: Tolerances,
    pub support_cutoff: f64,
    pub gamma: f64,
    pub xi: Option<f64>,
    /// Explicit rates; `None` means the command's default grid.
    pub rates: Option<Vec<f64>>,
    pub ns: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

fn parse_grid(spec: &str, what: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("{what} grid `{spec}` must be a:b:steps")));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("{what} grid `{spec}`: `{s}` is not a number")));
    let steps = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{what} grid `{spec}`: steps must be a positive integer")))?;
    if steps == 0 {
        return Err(Error::Config(format!("{what} grid `{spec}`: steps must be >= 1")));
    }
    Ok((num(parts[0])?, num(parts[1])?, steps))
}

fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![a];
    }
    (0..steps).map(|k| a + (b - a) * k as f64 / (steps - 1) as f64).collect()
}

/// `a:b:steps` as evenly spaced reals.
pub fn parse_rate_grid(spec: &str) -> Result<Vec<f64>> {
    let (a, b, steps) = parse_grid(spec, "rate")?;
    Ok(linspace(a, b, steps))
}

/// `a:b:steps` as evenly spaced integers, duplicates removed.
pub fn parse_n_grid(spec: &str) -> Result<Vec<u64>> {
    let (a, b, steps) = parse_grid(spec, "n")?;
    if a < 1.0 || b < 1.0 {
        return Err(Error::Config(format!("n grid `{spec}` must stay >= 1")));
    }
    let mut out: Vec<u64> = linspace(a, b, steps).into_iter().map(|x| x.round() as u64).collect();
    out.dedup();
    Ok(out)
}

fn parse_param(kv: &str) -> Result<(String, f64)> {
    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--param `{kv}` must be key=value")))?;
    let v = v.trim().parse::<f64>().map_err(|_| Error::Config(format!("--param `{kv}`: value is not a number")))?;
    Ok((k.trim().to_string(), v))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Resolves flags over the config file over defaults.
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
                serde_json::from_str::<ConfigFile>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };

        let mut params = file.params.clone();
        for kv in &args.params {
            let (k, v) = parse_param(kv)?;
            params.insert(k, v);
        }
        let channel = if let Some(p) = &args.channel {
            ChannelSource::File(p.clone())
        } else if let Some(name) = &args.preset {
            ChannelSource::Preset { name: name.clone(), params }
        } else if let Some(p) = &file.channel {
            ChannelSource::File(p.clone())
        } else if let Some(name) = &file.preset {
            ChannelSource::Preset { name: name.clone(), params }
        } else {
            ChannelSource::Unspecified
        };
        if args.channel.is_some() && args.preset.is_some() {
            return Err(Error::Config("--channel and --preset are mutually exclusive".into()));
        }

        let ftol = file.tolerances.clone().unwrap_or_default();
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            fixed_point: positive("tol-fixed-point", args.tol_fixed_point.or(ftol.fixed_point).unwrap_or(defaults.fixed_point))?,
            search: positive("tol-search", args.tol_search.or(ftol.search).unwrap_or(defaults.search))?,
        };
        let support_cutoff = positive("support_cutoff", ftol.support_cutoff.unwrap_or(SUPPORT_CUTOFF))?;
        if support_cutoff != SUPPORT_CUTOFF {
            return Err(Error::Config(format!("support_cutoff is fixed at {SUPPORT_CUTOFF:e} in this build")));
        }

        let rates = if let Some(r) = args.rate {
            Some(vec![r])
        } else if let Some(g) = &args.rates {
            Some(parse_rate_grid(g)?)
        } else if let Some(r) = file.rate {
            Some(vec![r])
        } else if let Some(r) = &file.rates {
            Some(r.clone())
        } else if let Some(g) = &file.rate_grid {
            Some(parse_rate_grid(g)?)
        } else {
            None
        };
        let ns = if let Some(n) = args.n {
            Some(vec![n])
        } else if let Some(g) = &args.n_range {
            Some(parse_n_grid(g)?)
        } else if let Some(n) = &file.n {
            Some(n.clone())
        } else if let Some(g) = &file.n_range {
            Some(parse_n_grid(g)?)
        } else {
            None
        };
        if let Some(ns) = &ns {
            if ns.is_empty() || ns.contains(&0) {
                return Err(Error::Config("blocklengths must be >= 1".into()));
            }
        }
        let gamma = positive("gamma", args.gamma.or(file.gamma).unwrap_or(1.0))?;
        let xi = match args.xi.or(file.xi) {
            Some(x) => Some(positive("xi", x)?),
            None => None,
        };
        let jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        Ok(Self { channel, tolerances, support_cutoff, gamma, xi, rates, ns, out: args.out.clone().or(file.out), jobs })
    }

    fn context(&self) -> Result<ChannelContext> {
        let ch = match &self.channel {
            ChannelSource::File(p) => load_channel_spec(p)?,
            ChannelSource::Preset { name, params } => preset(name, params)?,
            ChannelSource::Unspecified => {
                return Err(Error::Config("no channel given; use --channel PATH or --preset NAME".into()))
            }
        };
        Ok(ChannelContext::new(ch)?.with_tolerances(self.tolerances))
    }

    /// Explicit rates, checked against `[0, C)`, or `default` when none were given.
    fn rates_or(&self, ctx: &ChannelContext, default: Vec<f64>) -> Result<Vec<f64>> {
        let rates = self.rates.clone().unwrap_or(default);
        for &r in &rates {
            if !(r >= 0.0 && r < ctx.capacity) {
                return Err(Error::RateOutOfDomain { rate: r, lo: 0.0, hi: ctx.capacity });
            }
        }
        Ok(rates)
    }
}

/// Matrix entry in a channel spec: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn pair(self) -> [f64; 2] {
        match self {
            Entry::Real(re) => [re, 0.0],
            Entry::Complex(z) => z,
        }
    }
}

fn pairs(rows: Vec<Vec<Entry>>) -> Vec<Vec<[f64; 2]>> {
    rows.into_iter().map(|r| r.into_iter().map(Entry::pair).collect()).collect()
}

/// On-disk channel spec: a preset reference or explicit matrices.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpecFile {
    Preset {
        preset: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Explicit {
        dim: usize,
        #[serde(alias = "K", alias = "alphabet")]
        k: usize,
        #[serde(rename = "W1")]
        w1: Vec<Vec<Entry>>,
        #[serde(rename = "V")]
        v: Vec<Vec<Entry>>,
        #[serde(default)]
        label: Option<String>,
    },
}

impl ChannelSpecFile {
    pub fn into_channel(self) -> Result<SymmetricCqChannel> {
        match self {
            ChannelSpecFile::Preset { preset: name, params } => preset(&name, &params),
            ChannelSpecFile::Explicit { dim, k, w1, v, label } => {
                let w1 = cmatrix_from_pairs(&pairs(w1))?;
                let v = cmatrix_from_pairs(&pairs(v))?;
                if w1.nrows() != dim {
                    return Err(Error::Validation(vec![crate::error::Violation::DimensionMismatch {
                        expected: dim,
                        found: w1.nrows(),
                    }]));
                }
                let (state, unitary) = validate(&w1, &v, k)?;
                let ch = SymmetricCqChannel::new(state, unitary)?;
                Ok(match label {
                    Some(l) => ch.with_label(l),
                    None => ch.with_label(format!("explicit-d{dim}-k{k}")),
                })
            }
        }
    }
}

pub fn parse_channel_spec(text: &str) -> Result<SymmetricCqChannel> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let spec: ChannelSpecFile = serde_json::from_value(value)
        .map_err(|_| Error::Parse("expected {preset, params} or {dim, K, W1, V} with real or [re, im] entries".into()))?;
    spec.into_channel()
}

pub fn load_channel_spec(path: &Path) -> Result<SymmetricCqChannel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_channel_spec(&text)
}

/// `x` with 12 significant digits, shortest form, `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn fmt_ext(x: ExtendedReal) -> String {
    fmt_num(x.to_f64())
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(&self.header).map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(Error::CheckFailed(format!("row has {} cells, schema has {}", row.len(), self.header.len())));
            }
            w.write_record(row).map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })?;
        }
        w.into_inner().map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })
    }
}

/// Writes `bytes` through a sibling temporary file and a rename, so readers
/// never see a partial file and failures leave nothing behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    let name = path.file_name().ok_or_else(|| Error::Io { path: path.display().to_string(), message: "not a file path".into() })?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    write_atomic(path, &table.to_csv_bytes()?)
}

fn par_map<T: Sync, U: Send>(pool: &rayon::ThreadPool, items: &[T], f: impl Fn(&T) -> Result<U> + Sync) -> Result<Vec<U>> {
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>()).into_iter().collect()
}

fn default_interior_rates(ctx: &ChannelContext, count: usize) -> Vec<f64> {
    (1..=count).map(|k| ctx.r_inf + (ctx.capacity - ctx.r_inf) * k as f64 / (count + 1) as f64).collect()
}

pub fn capacity_table(ctx: &ChannelContext) -> Result<Table> {
    let cap = mutual_information_and_capacity(&ctx.channel)?;
    let mut t = Table::new(&["channel", "capacity", "r_inf", "mutual_information_uniform", "sampled_max"]);
    t.rows.push(vec![
        ctx.channel.label().to_string(),
        fmt_num(cap.capacity),
        fmt_num(ctx.r_inf),
        fmt_num(cap.mutual_information_uniform),
        fmt_num(cap.sampled_max),
    ]);
    Ok(t)
}

pub fn exponent_table(ctx: &ChannelContext, rates: &[f64], pool: &rayon::ThreadPool) -> Result<Table> {
    let pts = par_map(pool, rates, |&r| ctx.esp_point(r))?;
    let mut t = Table::new(&["rate", "esp", "s_star", "alpha_star"]);
    for p in pts {
        t.rows.push(vec![fmt_num(p.rate), fmt_ext(p.esp), fmt_ext(p.s_star), fmt_num(p.alpha_star())]);
    }
    Ok(t)
}

pub fn saddle_table(ctx: &ChannelContext, rates: &[f64], pool: &rayon::ThreadPool) -> Result<Table> {
    let d = ctx.channel.dim();
    let mut header: Vec<String> =
        ["rate", "alpha_star", "s_star", "esp", "fixed_point_residual", "equalization_gap", "closed_form_gap"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    for i in 1..=d {
        for j in 1..=d {
            header.push(format!("sigma_{i}_{j}_re"));
            header.push(format!("sigma_{i}_{j}_im"));
        }
    }
    let u = ctx.channel.uniform();
    let rows = par_map(pool, rates, |&r| {
        let sp = ctx.sigma_star(r)?;
        let iterated = saddle_fixed_point(
            &ctx.channel,
            &u,
            sp.alpha_star,
            &crate::qcore::DensityOperator::maximally_mixed(d),
            ctx.tol.fixed_point,
        )?;
        let closed_gap = trace_distance(iterated.sigma.as_hermitian(), sp.sigma_star.as_hermitian())?;
        let mut row = vec![
            fmt_num(r),
            fmt_num(sp.alpha_star),
            fmt_num(sp.s_star),
            fmt_num(sp.esp),
            fmt_num(sp.fixed_point_residual),
            fmt_num(sp.equalization_gap),
            fmt_num(closed_gap),
        ];
        let m = sp.sigma_star.matrix();
        for i in 0..d {
            for j in 0..d {
                row.push(fmt_num(m[(i, j)].re));
                row.push(fmt_num(m[(i, j)].im));
            }
        }
        Ok(row)
    })?;
    Ok(Table { header, rows })
}

pub const BOUND_COLUMNS: &[&str] = &[
    "rate", "n", "gamma", "xi", "gamma_n", "rate_n", "esp_rn", "esp_r", "s_star_r", "v_min", "v_max", "t_max", "k_max",
    "log_a", "upsilon", "n1", "n2", "n3", "n0", "direct_bound", "log_direct_bound", "theorem_bound", "log_theorem_bound",
    "correction", "log_correction", "valid",
];

pub fn bound_table(setup: &BoundSetup, ns: &[u64], pool: &rayon::ThreadPool) -> Result<Table> {
    let reports = par_map(pool, ns, |&n| setup.report(n))?;
    let mut t = Table::new(BOUND_COLUMNS);
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for r in reports {
        let c = r.constants;
        let th = r.thresholds;
        t.rows.push(vec![
            fmt_num(r.rate),
            r.n.to_string(),
            fmt_num(r.gamma),
            fmt_num(r.xi),
            fmt_num(r.gamma_n),
            fmt_num(r.rate_n),
            fmt_ext(r.esp_rn),
            fmt_ext(r.esp_r),
            fmt_ext(r.s_star_r),
            opt(c.map(|c| c.v_min)),
            opt(c.map(|c| c.v_max)),
            opt(c.map(|c| c.t_max)),
            opt(c.map(|c| c.k_max)),
            opt(c.map(|c| c.log_a())),
            opt(r.upsilon),
            opt(th.map(|t| t.n1)),
            opt(th.map(|t| t.n2)),
            opt(th.map(|t| t.n3)),
            opt(th.map(|t| t.n0)),
            fmt_num(r.direct_bound),
            fmt_num(r.log_direct_bound),
            fmt_num(r.theorem_bound),
            fmt_num(r.log_theorem_bound),
            fmt_num(r.correction),
            fmt_num(r.log_correction),
            r.valid.to_string(),
        ]);
    }
    Ok(t)
}

/// Random tests drawn per blocklength in the `oracle` command.
pub const ORACLE_RANDOM_TESTS: usize = 100;

pub fn oracle_table(setup: &BoundSetup, k: usize, ns: &[u64], pool: &rayon::ThreadPool) -> Result<Table> {
    let reports =
        par_map(pool, ns, |&n| ordering_check(setup, &cyclic_sequence(k, n as usize), ORACLE_RANDOM_TESTS, 0xC0FFEE ^ n))?;
    let mut t = Table::new(&[
        "n", "rate", "rate_n", "mu", "alpha_hat", "direct_bound", "valid", "phi_n", "delta", "alpha_u", "beta_u",
        "nagaoka_half", "min_random_objective", "holds",
    ]);
    for r in reports {
        t.rows.push(vec![
            r.n.to_string(),
            fmt_num(r.rate),
            fmt_num(r.rate_n),
            fmt_num(r.mu),
            fmt_num(r.alpha_hat),
            fmt_num(r.direct_bound),
            r.valid.to_string(),
            fmt_ext(r.nagaoka.phi_n),
            fmt_num(r.nagaoka.delta),
            fmt_num(r.nagaoka.alpha_u),
            fmt_num(r.nagaoka.beta_u),
            fmt_num(r.nagaoka_half),
            fmt_num(r.min_random_objective),
            r.holds.to_string(),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub passed: usize,
    pub failed: usize,
    pub details: Vec<CheckResult>,
}

fn check(out: &mut Vec<CheckResult>, name: String, result: Result<(bool, String)>) {
    let (passed, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("{}: {e}", e.code())),
    };
    out.push(CheckResult { name, passed, detail });
}

/// The invariant suite on one channel.
pub fn verify_channel(ctx: &ChannelContext) -> Vec<CheckResult> {
    let label = ctx.channel.label().to_string();
    let mut out = Vec::new();
    let u = ctx.channel.uniform();
    let rates = default_interior_rates(ctx, 3);

    check(&mut out, format!("{label}/capacity_at_uniform"), (|| {
        let cap = mutual_information_and_capacity(&ctx.channel)?;
        let ok = cap.sampled_max <= cap.mutual_information_uniform + 1e-9;
        Ok((ok, format!("I(U) = {}, sampled max = {}", cap.mutual_information_uniform, cap.sampled_max)))
    })());

    check(&mut out, format!("{label}/esp_endpoints_and_monotonicity"), (|| {
        let at_c = ctx.esp_point(ctx.capacity)?.esp.to_f64();
        let grid = default_interior_rates(ctx, 8);
        let vals: Vec<f64> = grid.iter().map(|&r| ctx.esp_point(r).map(|p| p.esp.to_f64())).collect::<Result<_>>()?;
        let monotone = vals.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        Ok((at_c <= 1e-8 && monotone, format!("E_sp(C) = {at_c:e}, monotone = {monotone}")))
    })());

    for &r in &rates {
        check(&mut out, format!("{label}/saddle@{}", fmt_num(r)), (|| {
            let sp = ctx.sigma_star(r)?;
            let closed = closed_form_sigma(&ctx.channel, &u, sp.alpha_star)?;
            let it = saddle_fixed_point(
                &ctx.channel,
                &u,
                sp.alpha_star,
                &crate::qcore::DensityOperator::maximally_mixed(ctx.channel.dim()),
                1e-13,
            )?;
            let gap = trace_distance(closed.as_hermitian(), it.sigma.as_hermitian())?;
            let ok = sp.fixed_point_residual <= 1e-10 && sp.equalization_gap <= 1e-8 && gap <= 1e-9;
            Ok((ok, format!("residual {:e}, equalization {:e}, closed-vs-iterated {gap:e}", sp.fixed_point_residual, sp.equalization_gap)))
        })());

        check(&mut out, format!("{label}/invariance@{}", fmt_num(r)), (|| {
            let esp = ctx.esp_point(r)?.esp.to_f64();
            let mut rng = ChaCha8Rng::seed_from_u64(r.to_bits());
            let mut worst = 0.0f64;
            for _ in 0..5 {
                let p = ProbabilityVector::sample(ctx.channel.alphabet_size(), &mut rng);
                worst = worst.max((ctx.invariance_check(&p, r)? - esp).abs());
            }
            Ok((worst <= 1e-8, format!("max |F - E_sp| = {worst:e}")))
        })());

        check(&mut out, format!("{label}/legendre@{}", fmt_num(r)), (|| {
            let sp = ctx.sigma_star(r)?;
            let ns = ns_pairs(&ctx.channel, &sp.sigma_star)?;
            let l0 = legendre(&ns, &u, 0, sp.esp - r)?;
            let l1 = legendre(&ns, &u, 1, r - sp.esp)?;
            let t = sp.s_star / (1.0 + sp.s_star);
            let e = [(l0.value - sp.esp).abs(), (l1.value - r).abs(), (l0.t_star - t).abs()];
            Ok((e.iter().all(|&x| x <= 1e-8), format!("errors {e:?}")))
        })());
    }

    check(&mut out, format!("{label}/cumulant_duality"), (|| {
        let sp = ctx.sigma_star(rates[1])?;
        let ns = ns_pairs(&ctx.channel, &sp.sigma_star)?;
        let mut worst = 0.0f64;
        for pair in &ns {
            for k in 0..=100 {
                let t = k as f64 / 100.0;
                worst = worst.max((cumulants(pair, t)?.lambda - cumulants_dual(pair, 1.0 - t)?.lambda).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max |L0(t) - L1(1-t)| = {worst:e}")))
    })());

    check(&mut out, format!("{label}/np_optimality"), (|| {
        let sp = ctx.sigma_star(rates[1])?;
        let rho = ctx.channel.output(1)?;
        let mu = 0.1;
        let best = min_type1(rho, &sp.sigma_star, mu)?;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut violations = 0;
        for _ in 0..100 {
            let q = TestOperator::random(rho.dim(), &mut rng);
            let (a, b) = type_errors(&q, rho, &sp.sigma_star)?;
            if b <= mu && a < best.alpha_hat - 1e-9 {
                violations += 1;
            }
        }
        Ok((violations == 0, format!("alpha_hat = {}, violations = {violations}", best.alpha_hat)))
    })());

    check(&mut out, format!("{label}/nagaoka_chain"), (|| {
        let setup = BoundSetup::new(ctx, rates[1], 1.0, None)?;
        let n = if ctx.channel.dim() > 2 { 3 } else { 4 };
        let rep = ordering_check(&setup, &cyclic_sequence(ctx.channel.alphabet_size(), n), 50, 3)?;
        Ok((rep.holds, format!("n = {n}, min objective {} vs half {}", rep.min_random_objective, rep.nagaoka_half)))
    })());

    out
}

/// Channels the `verify` command runs on when none is given.
pub fn shipped_presets() -> Vec<SymmetricCqChannel> {
    let p = |name: &str, kv: &[(&str, f64)]| {
        let params: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        preset(name, &params).expect("shipped preset")
    };
    vec![
        p("bsc", &[("p", 0.1)]),
        p("bec", &[("e", 0.3)]),
        p("pure-hadamard", &[]),
        p("mixed-hadamard", &[("eps", 0.1)]),
    ]
}

pub fn verify(config: &RunConfig) -> Result<VerifySummary> {
    let contexts = match config.channel {
        ChannelSource::Unspecified => shipped_presets()
            .into_iter()
            .map(|ch| Ok(ChannelContext::new(ch)?.with_tolerances(config.tolerances)))
            .collect::<Result<Vec<_>>>()?,
        _ => vec![config.context()?],
    };
    let details: Vec<CheckResult> = contexts.iter().flat_map(verify_channel).collect();
    let passed = details.iter().filter(|d| d.passed).count();
    Ok(VerifySummary { passed, failed: details.len() - passed, details })
}

/// What a command produced.
#[derive(Debug, Clone)]
pub enum Output {
    Csv(Table),
    Json(String),
}

impl Output {
    pub fn bytes(&self) -> Result<Vec<u8>> {
        match self {
            Output::Csv(t) => t.to_csv_bytes(),
            Output::Json(s) => Ok(format!("{s}\n").into_bytes()),
        }
    }
}

/// Runs a command. Returns the output and whether it counts as success.
pub fn run(kind: CommandKind, config: &RunConfig) -> Result<(Output, bool)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    if kind == CommandKind::Verify {
        let summary = verify(config)?;
        let ok = summary.failed == 0;
        let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::CheckFailed(e.to_string()))?;
        return Ok((Output::Json(json), ok));
    }
    let ctx = config.context()?;
    let mid = 0.5 * (ctx.r_inf + ctx.capacity);
    let table = match kind {
        CommandKind::Capacity => capacity_table(&ctx)?,
        CommandKind::Exponent => {
            let rates = config.rates_or(&ctx, default_interior_rates(&ctx, 10))?;
            exponent_table(&ctx, &rates, &pool)?
        }
        CommandKind::Saddle => {
            let rates = config.rates_or(&ctx, default_interior_rates(&ctx, 5))?;
            saddle_table(&ctx, &rates, &pool)?
        }
        CommandKind::Bound => {
            let rate = config.rates_or(&ctx, vec![mid])?;
            let ns = config.ns.clone().unwrap_or_else(|| (1..=6).map(|k| 10u64.pow(k)).collect());
            let mut t = Table::new(BOUND_COLUMNS);
            for r in rate {
                let setup = BoundSetup::new(&ctx, r, config.gamma, config.xi)?;
                t.rows.extend(bound_table(&setup, &ns, &pool)?.rows);
            }
            t
        }
        CommandKind::Oracle => {
            let rate = config.rates_or(&ctx, vec![mid])?;
            let ns = config.ns.clone().unwrap_or_else(|| (2..=8).collect());
            let mut t = Table::default();
            for r in rate {
                let setup = BoundSetup::new(&ctx, r, config.gamma, config.xi)?;
                let part = oracle_table(&setup, ctx.channel.alphabet_size(), &ns, &pool)?;
                t.header = part.header;
                t.rows.extend(part.rows);
            }
            t
        }
        CommandKind::Verify => unreachable!(),
    };
    Ok((Output::Csv(table), true))
}

/// Full CLI entry point. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (kind, args) = cli.command.split();
    let outcome = RunConfig::resolve(args).and_then(|cfg| {
        let (out, ok) = run(kind, &cfg)?;
        let bytes = out.bytes()?;
        match &cfg.out {
            Some(path) => write_atomic(path, &bytes)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(&bytes)
                    .map_err(|e| Error::Io { path: "<stdout>".into(), message: e.to_string() })?;
            }
        }
        Ok(ok)
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.368064), "0.368064");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(3.78137256783e-51), "3.78137256783e-51");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(9.9999999999996), "10");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn grids() {
        let g = parse_rate_grid("0.1:0.3:3").unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.iter().zip([0.1, 0.2, 0.3]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(parse_n_grid("2:8:7").unwrap(), vec![2, 3, 4, 5, 6, 7, 8]);
        assert!(parse_rate_grid("0.1:0.3").is_err());
        assert!(parse_n_grid("0:3:2").is_err());
    }

    #[test]
    fn channel_specs() {
        let bsc = parse_channel_spec(r#"{"preset":"bsc","params":{"p":0.1}}"#).unwrap();
        assert_eq!(bsc.alphabet_size(), 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = format!(
            r#"{{"dim":2,"K":2,"W1":[[[1,0],[0,0]],[[0,0],[0,0]]],"V":[[[{s},0],[{s},0]],[[{s},0],[{m},0]]]}}"#,
            m = -s
        );
        assert!(parse_channel_spec(&hadamard).is_ok());
        let mixed = r#"{"dim":2,"K":2,"W1":[[0.9,[0,0]],[0,0.1]],"V":[[0,1],[1,0]],"label":"b"}"#;
        assert_eq!(parse_channel_spec(mixed).unwrap().label(), "b");
        let bad_v = r#"{"dim":2,"K":2,"W1":[[[1,0],[0,0]],[[0,0],[0,0]]],"V":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#;
        let err = parse_channel_spec(bad_v).unwrap_err();
        assert_eq!(err.code(), "V_NOT_UNITARY");
        assert_eq!(parse_channel_spec("{").unwrap_err().code(), "PARSE");
        assert_eq!(parse_channel_spec(r#"{"preset":"nope"}"#).unwrap_err().code(), "UNKNOWN_PRESET");
    }

    #[test]
    fn csv_shapes() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv_bytes().unwrap(), b"a,b\n");
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(String::from_utf8(t.to_csv_bytes().unwrap()).unwrap(), "a,b\n1,\"x,y\"\n");
        t.rows.push(vec!["1".into()]);
        assert!(t.to_csv_bytes().is_err());
    }

    #[test]
    fn precedence_flags_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        fs::write(&cfg, r#"{"preset":"bsc","params":{"p":0.2},"gamma":2.0,"rates":[0.1,0.2],"jobs":3}"#).unwrap();
        let args = RunArgs { config: Some(cfg.clone()), gamma: Some(0.5), ..Default::default() };
        let rc = RunConfig::resolve(&args).unwrap();
        assert_eq!(rc.gamma, 0.5);
        assert_eq!(rc.jobs, 3);
        assert_eq!(rc.rates, Some(vec![0.1, 0.2]));
        assert_eq!(rc.channel, ChannelSource::Preset { name: "bsc".into(), params: [("p".to_string(), 0.2)].into() });
        let args = RunArgs { config: Some(cfg), params: vec!["p=0.05".into()], rate: Some(0.3), ..Default::default() };
        let rc = RunConfig::resolve(&args).unwrap();
        assert_eq!(rc.rates, Some(vec![0.3]));
        assert_eq!(rc.channel, ChannelSource::Preset { name: "bsc".into(), params: [("p".to_string(), 0.05)].into() });
        let bad = RunArgs { tol_search: Some(-1.0), ..Default::default() };
        assert_eq!(RunConfig::resolve(&bad).unwrap_err().code(), "CONFIG");
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing_dir").join("out.csv");
        assert!(write_atomic(&target, b"x").is_err());
        assert!(!target.exists());
        let ok = dir.path().join("out.csv");
        write_atomic(&ok, b"a\n").unwrap();
        assert_eq!(fs::read(&ok).unwrap(), b"a\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
