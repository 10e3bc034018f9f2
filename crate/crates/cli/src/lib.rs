//! Argument and config-file handling for the `ppife` driver.

use std::path::{Path, PathBuf};

use clap::Parser;
use ppife_core::{InitialMode, RunConfig};
use thiserror::Error;

/// Meshes added by `--extended` beyond the default study.
pub const EXTENDED_MESHES: [usize; 3] = [320, 640, 1280];

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 16] = [
    "preset",
    "ns",
    "study",
    "extended",
    "theta",
    "epsilon",
    "sigma0",
    "alpha",
    "beta_minus",
    "beta_plus",
    "dt_ratio",
    "t_final",
    "init",
    "tol",
    "csv",
    "export",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config file {path}: {source}")]
    ConfigIo { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] ppife_core::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Convergence studies of partially penalized immersed finite elements on
/// the elliptical-interface benchmark.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "ppife", version, allow_negative_numbers = true)]
pub struct Args {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Named parameter set (be-nonsym, be-sym, cn-nonsym, cn-sym, be-contrast, cn-contrast).
    #[arg(long)]
    pub preset: Option<String>,
    /// Single mesh with this many elements per side.
    #[arg(long)]
    pub ns: Option<usize>,
    /// Comma-separated, strictly increasing mesh sizes.
    #[arg(long)]
    pub study: Option<String>,
    /// Append 320, 640 and 1280 to the study.
    #[arg(long)]
    pub extended: bool,
    /// 1 for backward Euler, 0.5 for Crank-Nicolson.
    #[arg(long)]
    pub theta: Option<f64>,
    /// -1 symmetric, 0 incomplete, 1 nonsymmetric.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta_minus: Option<f64>,
    #[arg(long)]
    pub beta_plus: Option<f64>,
    /// `c` in `dt = c h`.
    #[arg(long)]
    pub dt_ratio: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// interpolation or projection.
    #[arg(long)]
    pub init: Option<String>,
    /// Relative residual tolerance of the linear solves.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV output path, rewritten after every mesh.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Field dump of the finest mesh's final state.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

/// Everything the driver needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub csv: Option<PathBuf>,
    pub export: Option<PathBuf>,
}

#[derive(Debug, Default)]
struct Overrides {
    preset: Option<String>,
    ns: Option<usize>,
    study: Option<Vec<usize>>,
    extended: Option<bool>,
    theta: Option<f64>,
    epsilon: Option<f64>,
    sigma0: Option<f64>,
    alpha: Option<f64>,
    beta_minus: Option<f64>,
    beta_plus: Option<f64>,
    dt_ratio: Option<f64>,
    t_final: Option<f64>,
    init: Option<InitialMode>,
    tol: Option<f64>,
    csv: Option<PathBuf>,
    export: Option<PathBuf>,
}

impl Overrides {
    /// Values of `other` win.
    fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            preset: other.preset.or(self.preset),
            ns: other.ns.or(self.ns),
            study: other.study.or(self.study),
            extended: other.extended.or(self.extended),
            theta: other.theta.or(self.theta),
            epsilon: other.epsilon.or(self.epsilon),
            sigma0: other.sigma0.or(self.sigma0),
            alpha: other.alpha.or(self.alpha),
            beta_minus: other.beta_minus.or(self.beta_minus),
            beta_plus: other.beta_plus.or(self.beta_plus),
            dt_ratio: other.dt_ratio.or(self.dt_ratio),
            t_final: other.t_final.or(self.t_final),
            init: other.init.or(self.init),
            tol: other.tol.or(self.tol),
            csv: other.csv.or(self.csv),
            export: other.export.or(self.export),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_study(value: &str) -> Result<Vec<usize>, CliError> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num("study", s))
        .collect()
}

fn parse_init(value: &str) -> Result<InitialMode, CliError> {
    value.trim().parse().map_err(|e: ppife_core::Error| usage(e.to_string()))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(usage(format!("invalid value `{other}` for `{key}`"))),
    }
}

fn from_args(args: &Args) -> Result<Overrides, CliError> {
    Ok(Overrides {
        preset: args.preset.clone(),
        ns: args.ns,
        study: args.study.as_deref().map(parse_study).transpose()?,
        extended: args.extended.then_some(true),
        theta: args.theta,
        epsilon: args.epsilon,
        sigma0: args.sigma0,
        alpha: args.alpha,
        beta_minus: args.beta_minus,
        beta_plus: args.beta_plus,
        dt_ratio: args.dt_ratio,
        t_final: args.t_final,
        init: args.init.as_deref().map(parse_init).transpose()?,
        tol: args.tol,
        csv: args.csv.clone(),
        export: args.export.clone(),
    })
}

/// Parses `key = value` lines; `#` starts a comment.
fn parse_config_text(text: &str) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "preset" => o.preset = Some(value.to_string()),
            "ns" => o.ns = Some(parse_num(key, value)?),
            "study" => o.study = Some(parse_study(value)?),
            "extended" => o.extended = Some(parse_bool(key, value)?),
            "theta" => o.theta = Some(parse_num(key, value)?),
            "epsilon" => o.epsilon = Some(parse_num(key, value)?),
            "sigma0" => o.sigma0 = Some(parse_num(key, value)?),
            "alpha" => o.alpha = Some(parse_num(key, value)?),
            "beta_minus" => o.beta_minus = Some(parse_num(key, value)?),
            "beta_plus" => o.beta_plus = Some(parse_num(key, value)?),
            "dt_ratio" => o.dt_ratio = Some(parse_num(key, value)?),
            "t_final" => o.t_final = Some(parse_num(key, value)?),
            "init" => o.init = Some(parse_init(value)?),
            "tol" => o.tol = Some(parse_num(key, value)?),
            "csv" => o.csv = Some(PathBuf::from(value)),
            "export" => o.export = Some(PathBuf::from(value)),
            other => {
                return Err(usage(format!(
                    "line {}: unknown key `{other}`; valid keys: {}",
                    lineno + 1,
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
    }
    Ok(o)
}

fn read_config(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo { path: path.to_path_buf(), source })?;
    parse_config_text(&text)
}

/// Combines preset, config file and flags (in increasing precedence) into
/// validated settings.
pub fn settings_from(args: &Args) -> Result<Settings, CliError> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => Overrides::default(),
    };
    let o = file.merge(from_args(args)?);

    let mut run = match &o.preset {
        Some(name) => RunConfig::preset(name)
            .ok_or_else(|| usage(format!("unknown preset `{name}`; valid presets: {}", RunConfig::PRESETS.join(", "))))?,
        None => RunConfig::default(),
    };
    if o.ns.is_some() && o.study.is_some() {
        return Err(usage("give either `ns` or `study`, not both"));
    }
    if let Some(n) = o.ns {
        run.study = vec![n];
    }
    if let Some(study) = o.study {
        run.study = study;
    }
    if o.extended == Some(true) {
        let last = run.study.last().copied().unwrap_or(0);
        run.study.extend(EXTENDED_MESHES.iter().filter(|&&n| n > last));
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = o.$field { run.$field = v; } )* };
    }
    set!(theta, epsilon, sigma0, alpha, beta_minus, beta_plus, dt_ratio, t_final, init, tol);

    run.validate().map_err(|e| usage(e.to_string()))?;
    Ok(Settings { run, csv: o.csv, export: o.export })
}

/// Parses `argv` (including the program name) into settings.
pub fn parse_config<I, T>(argv: I) -> Result<Settings, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    settings_from(&args)
}
