use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{IgtError, Result};

/// Keys whose values are filesystem paths; they are made absolute when the
/// configuration is built, relative to the config file for file entries and
/// to the working directory for overrides.
const PATH_KEYS: [&str; 3] = ["dataset", "datasets", "out"];

/// Keys every command accepts.
const GLOBAL_KEYS: [&str; 2] = ["seed", "out"];

/// Parameters of one command run: a plain-text `key = value` file, then
/// `key=value` overrides, then `--seed` / `--out`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    entries: BTreeMap<String, String>,
    pub seed: u64,
    pub out_dir: PathBuf,
    echo: String,
}

fn parse_line(line: &str) -> Option<std::result::Result<(String, String), String>> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return None;
    }
    Some(match body.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected `key = value`, got `{body}`")),
    })
}

fn resolve(base: &Path, key: &str, value: &str) -> String {
    if !PATH_KEYS.contains(&key) {
        return value.to_string();
    }
    value
        .split(',')
        .map(|p| {
            let p = Path::new(p.trim());
            if p.is_absolute() { p.to_path_buf() } else { base.join(p) }.display().to_string()
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn new(
        command: &str,
        file: Option<&Path>,
        overrides: &[String],
        seed: Option<u64>,
        out: Option<&Path>,
    ) -> Result<Self> {
        let cwd = std::env::current_dir()?;
        let mut entries = BTreeMap::new();
        let mut echo = String::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| IgtError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let base = path.parent().map_or_else(|| cwd.clone(), |p| cwd.join(p));
            for (i, line) in text.lines().enumerate() {
                if let Some(kv) = parse_line(line) {
                    let (k, v) = kv.map_err(|message| IgtError::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message,
                    })?;
                    let v = resolve(&base, &k, &v);
                    entries.insert(k, v);
                }
            }
            let _ = writeln!(echo, "# config file {}", path.display());
            echo.push_str(&text);
            if !text.ends_with('\n') {
                echo.push('\n');
            }
        }
        if !overrides.is_empty() {
            echo.push_str("# command-line overrides\n");
        }
        for o in overrides {
            let (k, v) = match parse_line(o) {
                Some(Ok(kv)) => kv,
                _ => return Err(IgtError::Config(format!("override `{o}` is not `key=value`"))),
            };
            let _ = writeln!(echo, "{k} = {v}");
            let v = resolve(&cwd, &k, &v);
            entries.insert(k, v);
        }
        if let Some(s) = seed {
            let _ = writeln!(echo, "# --seed {s}");
            entries.insert("seed".into(), s.to_string());
        }
        if let Some(o) = out {
            let _ = writeln!(echo, "# --out {}", o.display());
            entries.insert("out".into(), resolve(&cwd, "out", &o.display().to_string()));
        }
        let mut config = Self {
            command: command.to_string(),
            entries,
            seed: 0,
            out_dir: PathBuf::new(),
            echo,
        };
        config.seed = config.get("seed", 0u64)?;
        config.out_dir = match config.entries.get("out") {
            Some(p) => PathBuf::from(p),
            None => cwd.join("results").join(command),
        };
        Ok(config)
    }

    /// Configuration built from `key=value` pairs only, for tests and
    /// programmatic runs.
    pub fn from_pairs(command: &str, pairs: &[(&str, &str)]) -> Result<Self> {
        let overrides: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        Self::new(command, None, &overrides, None, None)
    }

    /// The configuration as given, file text first, then overrides.
    pub fn echo(&self) -> &str {
        &self.echo
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Rejects keys the command does not read, so typos fail loudly.
    pub fn ensure_known(&self, keys: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !keys.contains(k) && !GLOBAL_KEYS.contains(k))
            .collect();
        if unknown.is_empty() {
            return Ok(());
        }
        let mut known: Vec<&str> = keys.iter().chain(GLOBAL_KEYS.iter()).copied().collect();
        known.sort_unstable();
        Err(IgtError::Config(format!(
            "unknown key(s) {} for `{}`; accepted: {}",
            unknown.join(", "),
            self.command,
            known.join(", ")
        )))
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| IgtError::Config(format!("cannot parse `{key} = {v}`"))),
        }
    }

    /// Comma-separated list; an `a..b` entry expands to the inclusive range.
    pub fn get_list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        let Some(v) = self.entries.get(key) else {
            return Ok(default.to_vec());
        };
        let bad = || IgtError::Config(format!("cannot parse list `{key} = {v}`"));
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some((a, b)) = item.split_once("..") {
                let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                for i in a..=b {
                    out.push(i.to_string().parse().map_err(|_| bad())?);
                }
            } else {
                out.push(item.parse().map_err(|_| bad())?);
            }
        }
        if out.is_empty() {
            return Err(bad());
        }
        Ok(out)
    }

    pub fn require_paths(&self, key: &str) -> Result<Vec<PathBuf>> {
        self.entries
            .get(key)
            .map(|v| v.split(',').map(PathBuf::from).collect())
            .ok_or_else(|| IgtError::Config(format!("`{}` needs `{key} = <dataset directory>`", self.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sweep\nseeds = 3\nn = 100 # small\ndataset = data/cora\nseed = 4\n").unwrap();
        let c = RunConfig::new("bench", Some(&path), &["n=200".into()], Some(9), None).unwrap();
        assert_eq!(c.get("seeds", 0usize).unwrap(), 3);
        assert_eq!(c.get("n", 0usize).unwrap(), 200);
        assert_eq!(c.seed, 9);
        assert_eq!(c.require_paths("dataset").unwrap(), vec![dir.path().join("data/cora")]);
        assert!(c.echo().contains("n = 100 # small"));
        assert!(c.echo().contains("n = 200"));
        assert!(c.out_dir.ends_with("results/bench"));
    }

    #[test]
    fn lists_and_errors() {
        let c = RunConfig::from_pairs("x", &[("orders", "0..3"), ("ds", "0.5, 1.5"), ("bad", "a")]).unwrap();
        assert_eq!(c.get_list::<usize>("orders", &[]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(c.get_list::<f64>("ds", &[]).unwrap(), vec![0.5, 1.5]);
        assert_eq!(c.get_list::<usize>("missing", &[7]).unwrap(), vec![7]);
        assert!(c.get::<f64>("bad", 0.0).is_err());
        assert!(c.ensure_known(&["orders", "ds"]).is_err());
        assert!(c.ensure_known(&["orders", "ds", "bad"]).is_ok());
        assert!(RunConfig::from_pairs("x", &[("novalue", "")]).unwrap().get::<u64>("novalue", 0).is_err());
        assert!(RunConfig::new("x", None, &["oops".into()], None, None).is_err());
    }

    #[test]
    fn malformed_file_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "a = 1\njust words\n").unwrap();
        let err = RunConfig::new("x", Some(&path), &[], None, None).unwrap_err();
        assert!(matches!(err, IgtError::Parse { line: 2, .. }), "{err}");
    }
}
