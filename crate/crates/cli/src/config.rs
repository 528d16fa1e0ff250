//! Flat `key = value` configuration files merged under command-line flags.

use std::path::Path;

use clap::ValueEnum;
use hiercc_core::SystemConfig;

use crate::args::{InstanceArgs, ModeChoice, SchemeChoice};
use crate::CliError;

/// Effective settings after merging a config file with flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub k1: usize,
    pub k2: usize,
    pub n: usize,
    pub l: usize,
    pub prime: Option<u32>,
    pub seed: u64,
    pub scheme: Option<SchemeChoice>,
    pub mode: Option<ModeChoice>,
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub budget: Option<u64>,
}

/// Values read from a config file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileConfig {
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub prime: Option<u32>,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeChoice>,
    pub mode: Option<ModeChoice>,
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub budget: Option<u64>,
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
}

fn choice<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let mut c = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", idx + 1)))?;
        match key {
            "k1" => c.k1 = Some(number(key, value)?),
            "k2" => c.k2 = Some(number(key, value)?),
            "n" => c.n = Some(number(key, value)?),
            "l" => c.l = Some(number(key, value)?),
            "prime" => c.prime = Some(number(key, value)?),
            "seed" => c.seed = Some(number(key, value)?),
            "trials" => c.trials = Some(number(key, value)?),
            "workers" => c.workers = Some(number(key, value)?),
            "budget" => c.budget = Some(number(key, value)?),
            "scheme" => c.scheme = Some(choice(key, value)?),
            "mode" => c.mode = Some(choice(key, value)?),
            other => return Err(CliError::Usage(format!("config line {}: unknown key `{other}`", idx + 1))),
        }
    }
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

impl Settings {
    /// Flags over config file; `K1`, `K2` and `N` are mandatory.
    pub fn resolve(args: &InstanceArgs) -> Result<Self, CliError> {
        Self::merge(args, None)
    }

    /// As [`Settings::resolve`], falling back to `(K1, K2, N)` defaults.
    pub fn resolve_with_defaults(args: &InstanceArgs, defaults: (usize, usize, usize)) -> Result<Self, CliError> {
        Self::merge(args, Some(defaults))
    }

    fn merge(args: &InstanceArgs, defaults: Option<(usize, usize, usize)>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => load_config(path)?,
            None => FileConfig::default(),
        };
        let pick = |flag: Option<usize>, from_file: Option<usize>, default: Option<usize>, name: &str| {
            flag.or(from_file)
                .or(default)
                .ok_or_else(|| CliError::Usage(format!("--{name} is required (flag or config file)")))
        };
        Ok(Self {
            k1: pick(args.k1, file.k1, defaults.map(|d| d.0), "k1")?,
            k2: pick(args.k2, file.k2, defaults.map(|d| d.1), "k2")?,
            n: pick(args.n, file.n, defaults.map(|d| d.2), "n")?,
            l: args.l.or(file.l).unwrap_or(1),
            prime: args.prime.or(file.prime),
            seed: args.seed.or(file.seed).unwrap_or(0),
            scheme: file.scheme,
            mode: file.mode,
            trials: file.trials,
            workers: file.workers,
            budget: file.budget,
        })
    }

    pub fn config(&self) -> Result<SystemConfig, CliError> {
        SystemConfig::new(self.k1, self.k2, self.n, self.l, self.prime).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c = parse_config("# instance\nk1 = 3\nk2=2\n\nn = 6 # files\nscheme = both\nmode = random\nseed = 9\n")
            .unwrap();
        assert_eq!((c.k1, c.k2, c.n, c.seed), (Some(3), Some(2), Some(6), Some(9)));
        assert_eq!(c.scheme, Some(SchemeChoice::Both));
        assert_eq!(c.mode, Some(ModeChoice::Random));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(parse_config("k3 = 1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config("k1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config("k1 = two"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config("scheme = 3"), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("hiercc-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("instance.conf");
        std::fs::write(&path, "k1 = 2\nk2 = 2\nn = 3\nprime = 5\n").unwrap();
        let args = InstanceArgs { config: Some(path), n: Some(4), ..InstanceArgs::default() };
        let s = Settings::resolve(&args).unwrap();
        assert_eq!((s.k1, s.k2, s.n, s.prime, s.l), (2, 2, 4, Some(5), 1));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn missing_dimensions_are_usage_errors() {
        let args = InstanceArgs { k1: Some(2), ..InstanceArgs::default() };
        assert!(matches!(Settings::resolve(&args), Err(CliError::Usage(_))));
        let s = Settings::resolve_with_defaults(&args, (3, 2, 6)).unwrap();
        assert_eq!((s.k1, s.k2, s.n), (2, 2, 6));
    }
}
