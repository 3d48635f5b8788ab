//! Sweep configuration and the flat `key = value` file format.
//!
//! ```text
//! # comments run to end of line
//! model = "ou_cosine"
//! epsilons = 0.4, 0.2, 0.1
//! radius = 5
//! ```

use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::rhs::rhs_by_name;

/// Overrides `out_dir` when set.
pub const OUT_DIR_ENV: &str = "LANGEVIN_HOMOG_OUT_DIR";

pub const DEFAULT_EPSILONS: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: String,
    pub rhs: String,
    pub epsilons: Vec<f64>,
    pub radius: f64,
    pub sigma: f64,
    pub eta: f64,
    pub n_pairs: usize,
    /// Fixed mesh size; `None` means `h = ε²`.
    pub h: Option<f64>,
    pub out_dir: PathBuf,
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: "ou_cosine".into(),
            rhs: "linear".into(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            radius: 5.0,
            sigma: 1.0,
            eta: 1.0,
            n_pairs: 5,
            h: None,
            out_dir: PathBuf::from("out"),
            parallel: true,
        }
    }
}

impl SweepConfig {
    pub fn mesh_size(&self, epsilon: f64) -> f64 {
        self.h.unwrap_or(epsilon * epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if self.epsilons.is_empty() {
            return bad("epsilons must not be empty".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("epsilon {e} is not a positive number"));
        }
        if let Some(w) = self.epsilons.windows(2).find(|w| w[1] >= w[0]) {
            return bad(format!(
                "epsilons must be strictly decreasing ({} then {})",
                w[0], w[1]
            ));
        }
        for (name, v) in [
            ("radius", self.radius),
            ("sigma", self.sigma),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("h must be positive, got {h}"));
            }
        }
        if self.n_pairs == 0 {
            return bad("n_pairs must be at least 1".into());
        }
        if rhs_by_name(&self.rhs).is_none() {
            return bad(format!("unknown rhs '{}'", self.rhs));
        }
        Ok(())
    }

    /// Applies `key = value` assignments from config text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (line, key, value) in parse_pairs(text)? {
            self.set(&key, &value)
                .map_err(|message| HarnessError::Config { line, message })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "model" => self.model = value.to_string(),
            "rhs" => self.rhs = value.to_string(),
            "epsilons" => {
                self.epsilons = value
                    .split(',')
                    .map(|s| parse_f64(key, s))
                    .collect::<std::result::Result<_, _>>()?
            }
            "radius" => self.radius = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "eta" => self.eta = parse_f64(key, value)?,
            "h" => self.h = Some(parse_f64(key, value)?),
            "n_pairs" => {
                self.n_pairs = value
                    .parse()
                    .map_err(|_| format!("n_pairs: '{value}' is not a count"))?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "parallel" => {
                self.parallel = value
                    .parse()
                    .map_err(|_| format!("parallel: '{value}' is not true/false"))?
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }
}

fn parse_f64(key: &str, s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("{key}: '{}' is not a number", s.trim()))
}

/// Splits config text into `(line number, key, value)` triples. Values may be
/// wrapped in double quotes.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| HarnessError::Config {
            line,
            message: format!("expected key = value, got '{body}'"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(HarnessError::Config {
                line,
                message: "empty key".into(),
            });
        }
        let value = value.trim();
        let value = match value.strip_prefix('"') {
            Some(rest) => rest.strip_suffix('"').ok_or_else(|| HarnessError::Config {
                line,
                message: "unterminated string".into(),
            })?,
            None => value,
        };
        out.push((line, key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}
