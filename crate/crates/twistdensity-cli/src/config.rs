//! Run configuration: a `key = value` file with `[section]` headers (TOML),
//! validated into a [`RunConfig`].

use crate::error::CliError;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use twistdensity::curve::{classify_bad_reduction, known, validate_curve, CurveSpec, RawCurve, Reduction};
use twistdensity::family::MAX_X;
use twistdensity::testfn::{TestFnKind, WeightKind};
use twistdensity::Error;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    curve: Option<CurveSection>,
    #[serde(default)]
    family: FamilySection,
    #[serde(default)]
    compute: ComputeSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSection {
    a: i64,
    b: i64,
    conductor: u64,
    root_number: i64,
    #[serde(default)]
    bad_primes: Vec<u64>,
    #[serde(default)]
    reduction: BTreeMap<String, String>,
    #[serde(default)]
    small_ap: BTreeMap<String, i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySection {
    x: Option<Vec<f64>>,
    sigma: Option<f64>,
    testfn: Option<String>,
    weight: Option<String>,
    weight_file: Option<PathBuf>,
    squarefree_only: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComputeSection {
    prime_cutoff: Option<u64>,
    workers: Option<usize>,
    zeros_height: Option<f64>,
    twists: Option<Vec<i64>>,
    #[serde(default)]
    tolerance: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub curve: CurveSpec,
    pub xs: Vec<f64>,
    pub sigma: f64,
    pub testfn: TestFnKind,
    pub weight: WeightKind,
    pub squarefree_only: bool,
    /// Euler-product cutoff P for the symmetric square and arithmetic factor.
    pub prime_cutoff: u64,
    pub workers: Option<usize>,
    pub zeros_height: f64,
    pub twists: Vec<i64>,
    /// Limits replacing the defaults of the named `verify` checks.
    pub tolerances: BTreeMap<String, f64>,
    pub out_dir: PathBuf,
    pub format: Format,
}

/// Overrides from the command line; they win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub xs: Vec<f64>,
    pub sigma: Option<f64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const DEFAULT_PRIME_CUTOFF: u64 = 100_000;
pub const MAX_PRIME_CUTOFF: u64 = 10_000_000;

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let (raw, base) = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
            (parse_str(&text)?, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (RawConfig::default(), PathBuf::new()),
    };
    build(raw, &base, overrides)
}

fn parse_str(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Lib(Error::Config(e.to_string())))
}

#[cfg(test)]
/// Parses and validates configuration text; relative paths resolve against `base`.
pub fn from_str(text: &str, base: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    build(parse_str(text)?, base, overrides)
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::Config(msg.into()))
}

fn curve_from(section: Option<CurveSection>) -> Result<CurveSpec, CliError> {
    let Some(c) = section else {
        return Ok(known::curve_11a());
    };
    let mut types = BTreeMap::new();
    for (key, value) in &c.reduction {
        let p: u64 = key.parse().map_err(|_| config_err(format!("reduction key `{key}` is not a prime")))?;
        types.insert(p, value.parse::<Reduction>()?);
    }
    let mut primes = c.bad_primes.clone();
    primes.extend(types.keys().copied());
    primes.sort_unstable();
    primes.dedup();
    let bad_primes = primes
        .into_iter()
        .map(|p| match types.get(&p) {
            Some(&r) => Ok((p, r)),
            None if p > 3 => Ok((p, classify_bad_reduction(c.a, c.b, p)?)),
            None => Err(config_err(format!("reduction type at p = {p} must be given in [curve.reduction]"))),
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let small_good_ap = c
        .small_ap
        .iter()
        .map(|(k, &v)| k.parse::<u64>().map(|p| (p, v)).map_err(|_| config_err(format!("small_ap key `{k}` is not a prime"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(validate_curve(&RawCurve { a: c.a, b: c.b, conductor: c.conductor, root_number: c.root_number, bad_primes, small_good_ap })?)
}

/// `x w` or `x,w` per line; `#` starts a comment.
fn read_samples(path: &Path) -> Result<WeightKind, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: Vec<f64> = fields.iter().filter_map(|f| f.parse().ok()).collect();
        if fields.len() != 2 || parsed.len() != 2 {
            return Err(config_err(format!("{}:{}: expected `x w`", path.display(), i + 1)));
        }
        xs.push(parsed[0]);
        ws.push(parsed[1]);
    }
    Ok(WeightKind::Samples { xs, ws })
}

fn build(raw: RawConfig, base: &Path, ov: &Overrides) -> Result<RunConfig, CliError> {
    let curve = curve_from(raw.curve)?;
    let fam = raw.family;
    let xs = if ov.xs.is_empty() { fam.x.unwrap_or_else(|| vec![1e3, 1e4]) } else { ov.xs.clone() };
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err("X list must be strictly increasing"));
    }
    if let Some(&x) = xs.iter().find(|&&x| !(1.0..=MAX_X).contains(&x)) {
        return Err(config_err(format!("X = {x} outside [1, {MAX_X}]")));
    }
    let sigma = ov.sigma.or(fam.sigma).unwrap_or(0.3);
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(config_err(format!("sigma = {sigma} outside (0, 1]")));
    }
    let testfn = fam.testfn.as_deref().unwrap_or("fejer").parse::<TestFnKind>()?;
    let weight = match (fam.weight.as_deref().unwrap_or("gaussian"), fam.weight_file) {
        ("gaussian", None) => WeightKind::Gaussian,
        ("samples", Some(file)) => read_samples(&base.join(file))?,
        ("samples", None) => return Err(config_err("weight = \"samples\" needs weight_file")),
        ("gaussian", Some(_)) => return Err(config_err("weight_file is only read for weight = \"samples\"")),
        (other, _) => return Err(config_err(format!("unknown weight `{other}`"))),
    };
    let compute = raw.compute;
    let prime_cutoff = compute.prime_cutoff.unwrap_or(DEFAULT_PRIME_CUTOFF);
    if !(100..=MAX_PRIME_CUTOFF).contains(&prime_cutoff) {
        return Err(config_err(format!("prime_cutoff = {prime_cutoff} outside [100, {MAX_PRIME_CUTOFF}]")));
    }
    let workers = ov.workers.or(compute.workers);
    if workers == Some(0) {
        return Err(config_err("workers must be at least 1"));
    }
    let zeros_height = compute.zeros_height.unwrap_or(25.0);
    let twists = compute.twists.unwrap_or_else(|| vec![1, -3, 5]);
    for (name, &limit) in &compute.tolerance {
        if !crate::verify::TOLERANCE_NAMES.contains(&name.as_str()) {
            return Err(config_err(format!("no check named `{name}` takes a tolerance")));
        }
        if !(limit > 0.0 && limit.is_finite()) {
            return Err(config_err(format!("tolerance {name} = {limit} must be positive")));
        }
    }
    let format = match (ov.format, raw.output.format) {
        (Some(f), _) => f,
        (None, Some(s)) => s.parse()?,
        (None, None) => Format::Csv,
    };
    let out_dir = ov.out_dir.clone().or(raw.output.dir.map(|d| base.join(d))).unwrap_or_else(|| PathBuf::from("twistdensity-out"));
    Ok(RunConfig {
        curve,
        xs,
        sigma,
        testfn,
        weight,
        squarefree_only: fam.squarefree_only.unwrap_or(false),
        prime_cutoff,
        workers,
        zeros_height,
        twists,
        tolerances: compute.tolerance,
        out_dir,
        format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[curve]
a = -16
b = 16
conductor = 37
root_number = -1
small_ap = { 2 = -2, 3 = -3 }

[family]
x = [1000, 1e4]
sigma = 0.4
testfn = "smooth_bump"
squarefree_only = true

[compute]
prime_cutoff = 20000
twists = [1, 5]

[compute.tolerance]
poisson_gap = 1e-6

[output]
dir = "out"
format = "both"
"#;

    #[test]
    fn parses_every_section() {
        let cfg = from_str(FULL, Path::new("/tmp/base"), &Overrides::default()).unwrap();
        assert_eq!(cfg.curve.conductor(), 37);
        assert_eq!(cfg.xs, vec![1e3, 1e4]);
        assert_eq!(cfg.testfn, TestFnKind::SmoothBump);
        assert!(cfg.squarefree_only);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/base/out"));
        assert_eq!(cfg.format, Format::Both);
        assert_eq!(cfg.twists, vec![1, 5]);
        assert_eq!(cfg.tolerances.get("poisson_gap"), Some(&1e-6));
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { xs: vec![500.0], sigma: Some(0.2), format: Some(Format::Json), ..Default::default() };
        let cfg = from_str(FULL, Path::new("."), &ov).unwrap();
        assert_eq!((cfg.xs.as_slice(), cfg.sigma, cfg.format), (&[500.0][..], 0.2, Format::Json));
    }

    #[test]
    fn defaults_without_file() {
        let cfg = load(None, &Overrides::default()).unwrap();
        assert_eq!(cfg.curve.conductor(), 11);
        assert_eq!(cfg.sigma, 0.3);
        assert_eq!(cfg.testfn, TestFnKind::Fejer);
    }

    #[test]
    fn rejects_bad_input() {
        let singular = "[curve]\na = 0\nb = 0\nconductor = 1\nroot_number = 1\n";
        let err = from_str(singular, Path::new("."), &Overrides::default()).unwrap_err();
        assert_eq!(err.code(), "SINGULAR_CURVE");
        for text in ["[family]\nx = [1e4, 1e3]\n", "[family]\nx = [2e6]\n", "[family]\nsigma = 1.5\n", "[family]\nunknown = 1\n", "[family]\nweight = \"samples\"\n", "[compute.tolerance]\nhasse_ratio = 2.0\n"] {
            assert_eq!(from_str(text, Path::new("."), &Overrides::default()).unwrap_err().code(), "CONFIG", "{text}");
        }
        let missing = "[family]\nweight = \"samples\"\nweight_file = \"/nonexistent/w.txt\"\n";
        assert_eq!(from_str(missing, Path::new("."), &Overrides::default()).unwrap_err().code(), "IO");
    }
}
