//! Declarative run configuration: one TOML section per subcommand.
//!
//! ```toml
//! [converge]
//! d = 1
//! n = 128
//! alpha = 0.7
//! t_final = 0.5
//! m_ref = 8192
//! coarse_steps = [32, 64, 128, 256, 512, 1024]
//! samples = 50
//! preset = "cos_half"
//! initial = "sin(pi*x)"
//! seed = 2024
//! ```
//!
//! Unknown sections and unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::covariance::{NoiseMode, RieszAlpha};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::GridSpec;
use crate::harness::{ErrorNorm, ReferencePolicy, StudyConfig};
use crate::integrators::{Coefficients, SchemeKind};

pub const SECTIONS: [&str; 4] = ["covariance", "simulate", "converge", "bench"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Riesz,
    White,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceOutput {
    /// One row per distinct offset.
    #[default]
    Offsets,
    /// Every `(row, col, value)` entry.
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub output: CovarianceOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub noise: NoiseKind,
    pub t_final: f64,
    pub steps: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Snapshot times; defaults to `[0, t_final]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_times: Option<Vec<f64>>,
    /// Alternatively, snapshot every this many steps (plus the final step).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sample_index: u64,
    /// Also write the noise increments as `noise.bin`.
    #[serde(default)]
    pub dump_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub noise: NoiseKind,
    pub t_final: f64,
    pub m_ref: usize,
    pub coarse_steps: Vec<usize>,
    pub samples: usize,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferencePolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<ErrorNorm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_scheme() -> String {
    "SEXP".into()
}

fn default_schemes() -> Vec<String> {
    SchemeKind::ALL.iter().map(|s| s.to_string()).collect()
}

/// Named coefficient sets `(drift, diffusion)`.
pub fn preset(name: &str) -> Option<(&'static str, &'static str)> {
    match name {
        "cos_half" => Some(("1 + 0.5*cos(u)", "1 + 0.5*cos(u)")),
        "cos" => Some(("1 + cos(u)", "1 + cos(u)")),
        "affine" => Some(("2 + sin(u)", "u + 2")),
        "heat" => Some(("0", "0")),
        _ => None,
    }
}

pub fn default_initial(d: usize) -> &'static str {
    if d == 1 {
        "sin(pi*x)"
    } else {
        "sin(pi*x)*sin(pi*y)"
    }
}

pub fn grid(d: usize, n: usize) -> Result<GridSpec> {
    GridSpec::new(d, n)
}

pub fn noise_mode(kind: NoiseKind, alpha: Option<f64>, d: usize) -> Result<NoiseMode> {
    match kind {
        NoiseKind::White => Ok(NoiseMode::White),
        NoiseKind::Riesz => {
            let a = alpha.ok_or_else(|| Error::Config("riesz noise needs 'alpha'".into()))?;
            Ok(NoiseMode::Riesz(RieszAlpha::new(a, d)?))
        }
    }
}

/// Builds coefficient closures from a preset name or explicit expressions.
pub fn coefficients(
    d: usize,
    preset_name: Option<&str>,
    drift: Option<&str>,
    diffusion: Option<&str>,
    initial: Option<&str>,
) -> Result<Coefficients> {
    let (b, s) = match (preset_name, drift, diffusion) {
        (Some(p), None, None) => {
            preset(p).ok_or_else(|| Error::Config(format!("unknown coefficient preset '{p}'")))?
        }
        (None, Some(b), Some(s)) => (b, s),
        (Some(_), _, _) => {
            return Err(Error::Config("give either 'preset' or 'drift'/'diffusion', not both".into()))
        }
        _ => {
            return Err(Error::Config(
                "coefficients need a 'preset' or both 'drift' and 'diffusion'".into(),
            ))
        }
    };
    let b = Expr::parse(b)?;
    let s = Expr::parse(s)?;
    let u0 = Expr::parse(initial.unwrap_or(default_initial(d)))?;
    if u0.depends_on_state() {
        return Err(Error::Config(format!("initial datum '{u0}' may only use x and y")));
    }
    Ok(Coefficients::new(
        move |t, x, u| b.eval(t, x, u),
        move |t, x, u| s.eval(t, x, u),
        move |x| u0.eval(0.0, x, 0.0),
    ))
}

impl StudySection {
    pub fn schemes(&self) -> Result<Vec<SchemeKind>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn to_study(&self) -> Result<StudyConfig> {
        let grid = grid(self.d, self.n)?;
        let config = StudyConfig {
            grid,
            noise: noise_mode(self.noise, self.alpha, self.d)?,
            t_final: self.t_final,
            m_ref: self.m_ref,
            coarse_steps: self.coarse_steps.clone(),
            samples: self.samples,
            schemes: self.schemes()?,
            reference: self.reference.unwrap_or(ReferencePolicy::SharedSexp),
            seed: self.seed,
            norm: self.norm.unwrap_or(ErrorNorm::SupOverTimes),
            coefficients: coefficients(
                self.d,
                self.preset.as_deref(),
                self.drift.as_deref(),
                self.diffusion.as_deref(),
                self.initial.as_deref(),
            )?,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses a config file and returns the table for `section`, with `--set`
/// overrides applied. Missing sections yield an empty table.
pub fn load_section(
    text: Option<&str>,
    section: &str,
    overrides: &[(String, String)],
) -> Result<toml::Table> {
    let mut root: toml::Table = match text {
        Some(t) => t
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("invalid config file: {e}")))?,
        None => toml::Table::new(),
    };
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown config section '{key}' (expected one of {SECTIONS:?})"
            )));
        }
    }
    let mut table = match root.remove(section) {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(Error::Config(format!("'{section}' must be a table"))),
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k.clone(), parse_override(v));
    }
    Ok(table)
}

/// Interprets an override as a TOML value, falling back to a bare string.
pub fn parse_override(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

pub fn from_table<T: serde::de::DeserializeOwned>(table: toml::Table, section: &str) -> Result<T> {
    T::deserialize(toml::Value::Table(table))
        .map_err(|e| Error::Config(format!("[{section}]: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_and_sections_rejected() {
        let t = load_section(Some("[covariance]\nd = 1\nn = 4\nalpa = 0.5\n"), "covariance", &[]).unwrap();
        let r: Result<CovarianceSection> = from_table(t, "covariance");
        assert!(r.unwrap_err().to_string().contains("alpa"));
        assert!(load_section(Some("[simulat]\nd = 1\n"), "simulate", &[]).is_err());
    }

    #[test]
    fn overrides_apply() {
        let t = load_section(
            Some("[covariance]\nd = 1\nn = 4\nalpha = 0.5\n"),
            "covariance",
            &[("n".into(), "8".into()), ("output".into(), "matrix".into())],
        )
        .unwrap();
        let c: CovarianceSection = from_table(t, "covariance").unwrap();
        assert_eq!(c.n, 8);
        assert_eq!(c.output, CovarianceOutput::Matrix);
    }

    #[test]
    fn presets_resolve() {
        let c = coefficients(1, Some("affine"), None, None, None).unwrap();
        assert_eq!((c.drift)(0.0, &[0.5], 0.0), 2.0);
        assert_eq!((c.diffusion)(0.0, &[0.5], 1.0), 3.0);
        assert!(((c.initial)(&[0.5]) - 1.0).abs() < 1e-15);
        assert!(coefficients(1, Some("nope"), None, None, None).is_err());
        assert!(coefficients(1, Some("cos"), Some("u"), None, None).is_err());
        assert!(coefficients(1, None, Some("u"), None, None).is_err());
        assert!(coefficients(1, Some("cos"), None, None, Some("u")).is_err());
    }

    #[test]
    fn non_dyadic_coarse_steps_rejected() {
        let t = load_section(
            Some(
                "[converge]\nd=1\nn=8\nalpha=0.5\nt_final=1.0\nm_ref=64\ncoarse_steps=[4,6]\nsamples=2\npreset=\"cos\"\n",
            ),
            "converge",
            &[],
        )
        .unwrap();
        let s: StudySection = from_table(t, "converge").unwrap();
        assert!(s.to_study().is_err());
    }
}
