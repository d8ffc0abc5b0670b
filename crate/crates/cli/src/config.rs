//! Run configuration: an optional JSON file, overridden field by field by
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use ep_holonomy::io::{FamilyDescriptor, LoopDescriptor};
use ep_holonomy::tracker::Axis;
use ep_holonomy::verify::Suite;
use ep_holonomy::{HamiltonianFamily, ParameterLoop, Region};
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// A configuration problem; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// `{"family": "paper3x3" | "path.json" | {...}, "region": [a0, a1, b0, b1],
///   "grid": [na, nb], "loop": {...}, "cycles": k, "track_vectors": bool,
///   "axis": "alpha" | "beta", "only": "algebra", "algebra": {...},
///   "out": "path", "format": "json" | "csv"}`
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<serde_json::Value>,
    pub region: Option<[f64; 4]>,
    pub grid: Option<[usize; 2]>,
    #[serde(rename = "loop")]
    pub loop_: Option<serde_json::Value>,
    pub cycles: Option<usize>,
    pub track_vectors: Option<bool>,
    pub axis: Option<Axis>,
    pub only: Option<Suite>,
    pub algebra: Option<AlgebraConfig>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Generator sets for the `algebra` tables.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub signed: bool,
}

/// Parse JSON, naming the offending key on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> ConfigResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            ConfigError(format!("{what}: {inner}"))
        } else {
            ConfigError(format!("{what}: key `{path}`: {inner}"))
        }
    })
}

fn read(path: &Path, what: &str) -> ConfigResult<String> {
    fs::read_to_string(path).map_err(|e| ConfigError(format!("{what}: cannot read {}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> ConfigResult<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => parse_json(&read(p, "config")?, &format!("config {}", p.display())),
    }
}

/// Built-in name, or a path to a family descriptor file.
pub fn family_from_arg(arg: &str) -> ConfigResult<HamiltonianFamily> {
    if matches!(arg, "paper3x3" | "paper2x2" | "tep3x3") {
        return HamiltonianFamily::builtin(arg).map_err(|e| ConfigError(e.to_string()));
    }
    let path = Path::new(arg);
    let what = format!("family {}", path.display());
    let d: FamilyDescriptor = parse_json(&read(path, &what)?, &what)?;
    d.to_family().map_err(|e| ConfigError(format!("{what}: {e}")))
}

fn family_from_value(v: &serde_json::Value) -> ConfigResult<HamiltonianFamily> {
    match v {
        serde_json::Value::String(s) => family_from_arg(s),
        other => {
            let d: FamilyDescriptor = parse_json(&other.to_string(), "config key `family`")?;
            d.to_family().map_err(|e| ConfigError(format!("config key `family`: {e}")))
        }
    }
}

pub fn resolve_family(flag: Option<&str>, cfg: &RunConfig) -> ConfigResult<HamiltonianFamily> {
    match (flag, &cfg.family) {
        (Some(arg), _) => family_from_arg(arg),
        (None, Some(v)) => family_from_value(v),
        (None, None) => Err(ConfigError("no family given (use --family or the `family` config key)".into())),
    }
}

pub fn resolve_optional_family(flag: Option<&str>, cfg: &RunConfig) -> ConfigResult<Option<HamiltonianFamily>> {
    if flag.is_none() && cfg.family.is_none() {
        return Ok(None);
    }
    resolve_family(flag, cfg).map(Some)
}

/// `a0,a1,b0,b1` / `NA,NB` style lists.
pub fn parse_list<T: std::str::FromStr, const N: usize>(text: &str, flag: &str) -> ConfigResult<[T; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(ConfigError(format!("--{flag}: expected {N} comma-separated values, got `{text}`")));
    }
    let mut out = Vec::with_capacity(N);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| ConfigError(format!("--{flag}: cannot parse `{p}`")))?);
    }
    out.try_into().map_err(|_| ConfigError(format!("--{flag}: wrong length")))
}

pub const DEFAULT_GRID: [usize; 2] = [200, 120];

pub fn resolve_region(region: Option<&str>, grid: Option<&str>, cfg: &RunConfig) -> ConfigResult<Region> {
    let bounds = match region {
        Some(text) => parse_list::<f64, 4>(text, "region")?,
        None => {
            cfg.region.ok_or_else(|| ConfigError("no region given (use --region or the `region` config key)".into()))?
        }
    };
    let grid = match grid {
        Some(text) => parse_list::<usize, 2>(text, "grid")?,
        None => cfg.grid.unwrap_or(DEFAULT_GRID),
    };
    Region::new((bounds[0], bounds[1]), (bounds[2], bounds[3]), (grid[0], grid[1]))
        .map_err(|e| ConfigError(format!("region: {e}")))
}

pub fn resolve_loop(flag: Option<&Path>, cycles: Option<usize>, cfg: &RunConfig) -> ConfigResult<ParameterLoop> {
    let d: LoopDescriptor = match (flag, &cfg.loop_) {
        (Some(path), _) => {
            let what = format!("loop {}", path.display());
            parse_json(&read(path, &what)?, &what)?
        }
        (None, Some(v)) => parse_json(&v.to_string(), "config key `loop`")?,
        (None, None) => return Err(ConfigError("no loop given (use --loop or the `loop` config key)".into())),
    };
    let mut l = d.to_loop().map_err(|e| ConfigError(format!("loop: {e}")))?;
    if let Some(k) = cycles.or(cfg.cycles) {
        l = l.with_cycles(k);
        l.validate().map_err(|e| ConfigError(format!("loop: {e}")))?;
    }
    Ok(l)
}
