//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Environment variable that overrides `output_dir` from the config file.
pub const OUTPUT_DIR_ENV: &str = "FOSC_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: f64,
    pub omega: f64,
    pub a: Option<f64>,
    pub beta_abs: f64,
    pub beta_phase_deg: f64,
    pub fock_dim_cap: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tolerances = [("ode_rel".to_string(), 1e-12), ("ode_abs".to_string(), 1e-14)].into_iter().collect();
        Self {
            m: 1.0,
            omega: 1.0,
            a: None,
            beta_abs: 1.0,
            beta_phase_deg: 0.0,
            fock_dim_cap: 64,
            tolerances,
            output_dir: PathBuf::from("."),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value.trim().parse::<f64>().map_err(|_| format!("{key}: expected a number, got '{value}'"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "m" => self.m = parse_f64(key, value)?,
            "omega" => self.omega = parse_f64(key, value)?,
            "a" => self.a = Some(parse_f64(key, value)?),
            "beta_abs" => self.beta_abs = parse_f64(key, value)?,
            "beta_phase_deg" => self.beta_phase_deg = parse_f64(key, value)?,
            "fock_dim_cap" => {
                self.fock_dim_cap =
                    value.parse().map_err(|_| format!("fock_dim_cap: expected an integer, got '{value}'"))?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => match key.strip_prefix("tol.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    self.tolerances.insert(name.to_string(), parse_f64(key, value)?);
                }
                _ => return Err(format!("unknown config key '{key}'")),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(format!("m must be positive, got {}", self.m));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(format!("omega must be positive, got {}", self.omega));
        }
        if let Some(a) = self.a {
            if !(a > 0.0 && a.is_finite()) {
                return Err(format!("a must be positive, got {a}"));
            }
        }
        if !(self.beta_abs >= 0.0 && self.beta_abs.is_finite()) {
            return Err(format!("beta_abs must be >= 0, got {}", self.beta_abs));
        }
        if !self.beta_phase_deg.is_finite() {
            return Err("beta_phase_deg must be finite".into());
        }
        if self.fock_dim_cap < 16 {
            return Err(format!("fock_dim_cap must be >= 16, got {}", self.fock_dim_cap));
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {k} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Everything that can change results, one `key=value` per line, sorted.
    /// Output location and thread count are left out.
    pub fn canonical(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("m".into(), format!("{:e}", self.m));
        map.insert("omega".into(), format!("{:e}", self.omega));
        map.insert("a".into(), self.a.map_or("unset".into(), |a| format!("{a:e}")));
        map.insert("beta_abs".into(), format!("{:e}", self.beta_abs));
        map.insert("beta_phase_deg".into(), format!("{:e}", self.beta_phase_deg));
        map.insert("fock_dim_cap".into(), self.fock_dim_cap.to_string());
        for (k, v) in &self.tolerances {
            map.insert(format!("tol.{k}"), format!("{v:e}"));
        }
        map
    }
}

/// SHA-256 over the canonical config plus command arguments.
pub fn config_hash(cfg: &RunConfig, command: &BTreeMap<String, String>) -> String {
    let mut text = String::new();
    for (k, v) in cfg.canonical() {
        let _ = writeln!(text, "{k}={v}");
    }
    for (k, v) in command {
        let _ = writeln!(text, "cmd.{k}={v}");
    }
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
