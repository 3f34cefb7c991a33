//! Command implementations for the `slmdecay` binary.
//!
//! Every command renders its complete output into a `String` before anything
//! is written, so a failure never leaves partial output behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use slmdecay::dynamics::{
    instantaneous_velocity_expectation, lifetime_closed_form, lifetime_numeric, mean_inverse_energy, shirokov_time,
    survival_curve, velocity_eigenstate_survival, velocity_expectation_and_spread, SlmLabel, DEFAULT_HBAR,
};
use slmdecay::fmt::format_f64;
use slmdecay::minkowski::{
    eta_from_velocity, time_gap_between_parallel, FourVector, Hyperplane, UnitTimelike, Velocity3, DEFAULT_RANK_TOL,
};
use slmdecay::relations::{classify_triple, classify_velocity_pair, support_condition_check};
use slmdecay::spectra::{
    make_breit_wigner, make_gaussian, make_tabulated_with_nodes, parse_tabulated, SpectralDensity, DEFAULT_BW_SUPPORT,
    DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES,
};

pub type CliResult<T> = std::result::Result<T, String>;

fn lib<T>(r: slmdecay::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "slmdecay", version, about = "Relativistic decay kinematics of unstable quantons")]
pub struct Cli {
    /// JSON file of flat run settings.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "X")]
    pub hbar: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Survival amplitude on a uniform tau grid.
    Survival(SurvivalArgs),
    /// Closed-form and numeric lifetimes over a list of s = -p^2.
    Lifetime(LifetimeArgs),
    /// Shirokov contraction against the hyperplane geometry.
    Shirokov(ShirokovArgs),
    /// Relations among three no-decay hyperplane normals.
    Classify(ClassifyArgs),
    /// Time dependence between two velocity eigenstates.
    VelocityPair(VelocityPairArgs),
    /// Velocity expectations for a grid of space-like momentum labels.
    Expectations(ExpectationsArgs),
}

#[derive(Debug, Args)]
pub struct SurvivalArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = 101)]
    pub n_points: usize,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1,3")]
    pub s_values: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
}

#[derive(Debug, Args)]
pub struct ShirokovArgs {
    /// Speeds along x.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.3,0.6,0.9")]
    pub u_values: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true)]
    pub u: Option<String>,
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true)]
    pub u2: Option<String>,
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true)]
    pub u3: Option<String>,
    #[arg(long, value_name = "T,X,Y,Z", allow_hyphen_values = true)]
    pub eta: Option<String>,
    #[arg(long, value_name = "T,X,Y,Z", allow_hyphen_values = true)]
    pub eta2: Option<String>,
    #[arg(long, value_name = "T,X,Y,Z", allow_hyphen_values = true)]
    pub eta3: Option<String>,
    #[arg(long, value_name = "T,X,Y,Z", allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, value_name = "T,X,Y,Z", allow_hyphen_values = true)]
    pub p2: Option<String>,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VelocityPairArgs {
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true)]
    pub u2: String,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExpectationsArgs {
    /// Velocity of the no-decay hyperplane's normal.
    #[arg(long, value_name = "UX,UY,UZ", allow_hyphen_values = true, default_value = "0,0,0")]
    pub u: String,
    /// Rest-frame momentum magnitudes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.5,1")]
    pub q_values: Vec<f64>,
    /// Rest-frame momentum direction; normalized.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true, default_value = "1,0,0")]
    pub direction: String,
}

/// Settings read from `--config`. Keys are flat; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `breit-wigner` (default), `gaussian` or `tabulated`.
    pub spectrum: Option<String>,
    pub mass: Option<f64>,
    pub gamma: Option<f64>,
    pub width: Option<f64>,
    /// Truncation in units of the half-width (Breit-Wigner) or width (Gaussian).
    pub support: Option<f64>,
    pub nodes: Option<usize>,
    /// Two-column `mu sigma` file; relative paths resolve against the
    /// config file's directory.
    pub table: Option<PathBuf>,
    pub hbar: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(table), Some(dir)) = (&cfg.table, path.parent()) {
            if table.is_relative() {
                cfg.table = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar.unwrap_or(DEFAULT_HBAR)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn density(&self) -> CliResult<SpectralDensity> {
        let kind = self.spectrum.as_deref().unwrap_or("breit-wigner");
        let nodes = self.nodes.unwrap_or(DEFAULT_NODES);
        let reject = |key: &str, present: bool| {
            if present {
                Err(format!("config: key `{key}` does not apply to a {kind} spectrum"))
            } else {
                Ok(())
            }
        };
        match kind {
            "breit-wigner" => {
                reject("width", self.width.is_some())?;
                reject("table", self.table.is_some())?;
                lib(make_breit_wigner(
                    self.mass.unwrap_or(1.0),
                    self.gamma.unwrap_or(0.05),
                    self.support.unwrap_or(DEFAULT_BW_SUPPORT),
                    nodes,
                ))
            }
            "gaussian" => {
                reject("gamma", self.gamma.is_some())?;
                reject("table", self.table.is_some())?;
                lib(make_gaussian(
                    self.mass.unwrap_or(1.0),
                    self.width.unwrap_or(0.02),
                    self.support.unwrap_or(DEFAULT_GAUSSIAN_SUPPORT),
                    nodes,
                ))
            }
            "tabulated" => {
                for (key, present) in [
                    ("mass", self.mass.is_some()),
                    ("gamma", self.gamma.is_some()),
                    ("width", self.width.is_some()),
                    ("support", self.support.is_some()),
                ] {
                    reject(key, present)?;
                }
                let path = self.table.as_ref().ok_or("config: a tabulated spectrum needs `table`")?;
                let text = std::fs::read_to_string(path).map_err(|e| format!("table {}: {e}", path.display()))?;
                lib(make_tabulated_with_nodes(lib(parse_tabulated(&text))?, nodes))
            }
            other => Err(format!("config: unknown spectrum `{other}` (breit-wigner, gaussian, tabulated)")),
        }
    }
}

/// Config file values with command-line flags applied on top.
pub fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.hbar.is_some() {
        cfg.hbar = cli.hbar;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns the rendered output.
pub fn run(cli: &Cli) -> CliResult<(String, Option<PathBuf>)> {
    let cfg = resolve_config(cli)?;
    let out = match &cli.command {
        Command::Survival(a) => cmd_survival(&cfg, a.s, a.t_max, a.n_points)?,
        Command::Lifetime(a) => cmd_lifetime(&cfg, &a.s_values, a.rel_tol)?,
        Command::Shirokov(a) => cmd_shirokov(&cfg, &a.u_values)?,
        Command::Classify(a) => cmd_classify(&cfg, a)?,
        Command::VelocityPair(a) => {
            cmd_velocity_pair(&cfg, &parse_triple(&a.u, "u")?, &parse_triple(&a.u2, "u2")?, a.tol)?
        }
        Command::Expectations(a) => {
            cmd_expectations(&cfg, &parse_triple(&a.u, "u")?, &a.q_values, parse_triple(&a.direction, "direction")?)?
        }
    };
    Ok((out, cfg.out))
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    footer: Option<(&'static str, f64)>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), footer: None }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                if let Some((key, v)) = self.footer {
                    let _ = writeln!(out, "# {key}={}", format_f64(v));
                }
            }
            Format::Jsonl => {
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| format!("{}:{}", json_string(k), format_f64(*c)))
                        .collect();
                    let _ = writeln!(out, "{{{}}}", fields.join(","));
                }
                if let Some((key, v)) = self.footer {
                    let _ = writeln!(out, "{{{}:{}}}", json_string(key), format_f64(v));
                }
            }
        }
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// `key: value` lines as one JSON object with string values.
fn record_to_json(record: &str) -> String {
    let fields: Vec<String> = record
        .lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
        .collect();
    format!("{{{}}}\n", fields.join(","))
}

fn parse_list(text: &str, what: &str, n: usize) -> CliResult<Vec<f64>> {
    let values = text
        .split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|e| format!("--{what}: {f:?}: {e}")))
        .collect::<CliResult<Vec<f64>>>()?;
    if values.len() != n {
        return Err(format!("--{what}: expected {n} comma-separated numbers, found {}", values.len()));
    }
    Ok(values)
}

fn parse_triple(text: &str, what: &str) -> CliResult<[f64; 3]> {
    let v = parse_list(text, what, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn parse_four(text: &str, what: &str) -> CliResult<FourVector> {
    let v = parse_list(text, what, 4)?;
    lib(FourVector::new(v[0], v[1], v[2], v[3]))
}

fn velocity(u: [f64; 3]) -> CliResult<Velocity3> {
    lib(Velocity3::from_array(u))
}

pub fn cmd_survival(cfg: &RunConfig, s: f64, t_max: f64, n_points: usize) -> CliResult<String> {
    if n_points == 0 {
        return Err("--n-points must be at least 1".into());
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(format!("--t-max must be finite and non-negative, got {t_max}"));
    }
    let d = cfg.density()?;
    let taus: Vec<f64> = if n_points == 1 {
        vec![0.0]
    } else {
        (0..n_points).map(|i| t_max * i as f64 / (n_points - 1) as f64).collect()
    };
    let curve = lib(survival_curve(&d, s, &taus, cfg.hbar()))?;
    let mut table = Table::new(&["tau", "re", "im", "prob"]);
    for ((t, a), p) in curve.times.iter().zip(&curve.amplitudes).zip(&curve.probabilities) {
        table.push(vec![*t, a.re, a.im, *p]);
    }
    Ok(table.render(cfg.format()))
}

/// One row per `s`; the trailing comment row carries the largest relative
/// difference between the two lifetime evaluations.
pub fn cmd_lifetime(cfg: &RunConfig, s_values: &[f64], rel_tol: f64) -> CliResult<String> {
    if s_values.is_empty() {
        return Err("--s-values is empty".into());
    }
    let d = cfg.density()?;
    let hbar = cfg.hbar();
    let m = d.nominal_mass();
    let mut table = Table::new(&["s", "T_closed", "T_numeric", "gamma_sharp"]);
    let mut worst = 0.0f64;
    for &s in s_values {
        let closed = lib(lifetime_closed_form(&d, s, hbar))?.value;
        let numeric = lib(lifetime_numeric(&d, s, hbar, rel_tol))?.value;
        worst = worst.max((numeric - closed).abs() / closed);
        table.push(vec![s, closed, numeric, (m * m + s).sqrt() / m]);
    }
    table.footer = Some(("max_rel_diff", worst));
    Ok(table.render(cfg.format()))
}

/// First coordinate time at which the velocity eigenstate's survival
/// probability falls to one half.
pub fn half_life(d: &SpectralDensity, u: &Velocity3, hbar: f64, scale: f64) -> CliResult<f64> {
    let prob = |t: f64| lib(velocity_eigenstate_survival(d, u, t, hbar)).map(|a| a.norm_sqr());
    let step = 0.01 * scale;
    let (mut lo, mut hi) = (0.0, step);
    let mut k = 1;
    while prob(hi)? > 0.5 {
        k += 1;
        if k > 100_000 {
            return Err("survival probability never reaches one half".into());
        }
        lo = hi;
        hi = k as f64 * step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if prob(mid)? > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn cmd_shirokov(cfg: &RunConfig, u_values: &[f64]) -> CliResult<String> {
    if u_values.is_empty() {
        return Err("--u-values is empty".into());
    }
    let d = cfg.density()?;
    let hbar = cfg.hbar();
    let tau0 = lib(lifetime_closed_form(&d, 0.0, hbar))?.value;
    let mut table = Table::new(&["u", "eta0", "t_S_formula", "t_S_geometric", "half_life_coordinate_time"]);
    for &ux in u_values {
        let u = velocity([ux, 0.0, 0.0])?;
        let eta = eta_from_velocity(&u);
        let formula = lib(shirokov_time(tau0, &u))?;
        let geometric =
            lib(time_gap_between_parallel(&lib(Hyperplane::new(eta, 0.0))?, &lib(Hyperplane::new(eta, tau0))?))?;
        let half = half_life(&d, &u, hbar, formula)?;
        table.push(vec![ux, eta.gamma(), formula, geometric, half]);
    }
    Ok(table.render(cfg.format()))
}

fn eta_slot(u: &Option<String>, eta: &Option<String>, n: &str) -> CliResult<UnitTimelike> {
    match (u, eta) {
        (Some(u), None) => Ok(eta_from_velocity(&velocity(parse_triple(u, &format!("u{n}"))?)?)),
        (None, Some(e)) => lib(UnitTimelike::new(parse_four(e, &format!("eta{n}"))?)),
        (Some(_), Some(_)) => Err(format!("give only one of --u{n} and --eta{n}")),
        (None, None) => Err(format!("missing --u{n} or --eta{n}")),
    }
}

/// The case report, followed by the support check when `--p` and `--p2` are
/// both given.
pub fn cmd_classify(cfg: &RunConfig, a: &ClassifyArgs) -> CliResult<String> {
    let e1 = eta_slot(&a.u, &a.eta, "")?;
    let e2 = eta_slot(&a.u2, &a.eta2, "2")?;
    let e3 = eta_slot(&a.u3, &a.eta3, "3")?;
    let report = lib(classify_triple(&e1, &e2, &e3, a.tol))?;
    let mut record = report.to_record();
    match (&a.p, &a.p2) {
        (Some(p), Some(p2)) => {
            let ok = support_condition_check(&report, &parse_four(p, "p")?, &parse_four(p2, "p2")?, a.tol);
            let _ = writeln!(record, "support_condition_satisfied: {ok}");
        }
        (None, None) => {}
        _ => return Err("--p and --p2 go together".into()),
    }
    Ok(match cfg.format() {
        Format::Csv => record,
        Format::Jsonl => record_to_json(&record),
    })
}

pub fn cmd_velocity_pair(cfg: &RunConfig, u: &[f64; 3], u2: &[f64; 3], tol: f64) -> CliResult<String> {
    let verdict = lib(classify_velocity_pair(&velocity(*u)?, &velocity(*u2)?, tol))?;
    let record = verdict.to_record();
    Ok(match cfg.format() {
        Format::Csv => record,
        Format::Jsonl => record_to_json(&record),
    })
}

pub fn cmd_expectations(cfg: &RunConfig, u: &[f64; 3], q_values: &[f64], direction: [f64; 3]) -> CliResult<String> {
    if q_values.is_empty() {
        return Err("--q-values is empty".into());
    }
    let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err("--direction must be a finite nonzero vector".into());
    }
    let n = direction.map(|c| c / norm);
    let d = cfg.density()?;
    let eta = eta_from_velocity(&velocity(*u)?);
    let mut table = Table::new(&[
        "q",
        "s",
        "mean_inverse_energy",
        "velocity_mean_t",
        "velocity_mean_x",
        "velocity_mean_y",
        "velocity_mean_z",
        "velocity_spread",
        "u_inst_x",
        "u_inst_y",
        "u_inst_z",
    ]);
    for &q in q_values {
        let label = lib(SlmLabel::from_rest_frame_momentum(eta, n.map(|c| q * c), "alpha"))?;
        let s = label.s();
        let inv = lib(mean_inverse_energy(&d, s))?;
        let (mean, spread) = lib(velocity_expectation_and_spread(&d, &label))?;
        let inst = lib(instantaneous_velocity_expectation(&d, &label))?.components();
        let mut row = vec![q, s, inv];
        row.extend(mean.components());
        row.push(spread);
        row.extend(inst);
        table.push(row);
    }
    Ok(table.render(cfg.format()))
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| format!("stdout: {e}"))
        }
    }
}
