//! Run configuration in a plain `key = value` text format.
//!
//! Unknown keys are rejected. `#` starts a comment. The canonical form lists
//! every key in sorted order with shortest round-trip number formatting; its
//! SHA-256 is the config hash embedded in encrypted outputs.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::array::ArrayConfig;
use crate::pixel::PixelParams;
use crate::variation::VariationSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub pixel: PixelParams,
    pub levels: u32,
    pub pva_min: f64,
    pub pva_max: f64,
    pub half_select_kappa: f64,
    pub variation: VariationSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let array = ArrayConfig::new(1, 1);
        RunConfig {
            pixel: PixelParams::default(),
            levels: array.levels,
            pva_min: array.pva_min,
            pva_max: array.pva_max,
            half_select_kappa: array.half_select_kappa,
            variation: VariationSpec::default(),
        }
    }
}

/// Every accepted key, sorted.
pub const KEYS: &[&str] = &[
    "array.half_select_kappa",
    "array.levels",
    "array.pva_max",
    "array.pva_min",
    "fe.g_max",
    "fe.g_min",
    "fe.mu_c",
    "fe.sigma_c",
    "fe.v_reset",
    "pixel.beta_p",
    "pixel.c_pd",
    "pixel.i_dark",
    "pixel.v_dd",
    "pixel.v_tp",
    "variation.clamp_at",
    "variation.enabled",
    "variation.thickness_nominal",
    "variation.thickness_rel_sigma",
    "variation.vth_sigma",
];

impl RunConfig {
    /// Array geometry for a `rows x cols` sensor under this configuration.
    pub fn array_config(&self, rows: usize, cols: usize) -> ArrayConfig {
        ArrayConfig {
            rows,
            cols,
            levels: self.levels,
            pva_min: self.pva_min,
            pva_max: self.pva_max,
            half_select_kappa: self.half_select_kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pixel.validate()?;
        self.array_config(1, 1).validate()?;
        self.variation.validate()
    }

    /// Applies one `key = value` setting. `line` is only used in errors.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |reason: String| Error::MalformedConfig { line, reason };
        let num = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("`{key}` needs a finite number, got `{value}`")))
        };
        match key {
            "array.half_select_kappa" => self.half_select_kappa = num()?,
            "array.levels" => {
                self.levels = value
                    .parse()
                    .map_err(|_| bad(format!("`{key}` needs a positive integer, got `{value}`")))?
            }
            "array.pva_max" => self.pva_max = num()?,
            "array.pva_min" => self.pva_min = num()?,
            "fe.g_max" => self.pixel.fe.g_max = num()?,
            "fe.g_min" => self.pixel.fe.g_min = num()?,
            "fe.mu_c" => self.pixel.fe.mu_c = num()?,
            "fe.sigma_c" => self.pixel.fe.sigma_c = num()?,
            "fe.v_reset" => self.pixel.fe.v_reset = num()?,
            "pixel.beta_p" => self.pixel.beta_p = num()?,
            "pixel.c_pd" => self.pixel.c_pd = num()?,
            "pixel.i_dark" => self.pixel.i_dark = num()?,
            "pixel.v_dd" => self.pixel.v_dd = num()?,
            "pixel.v_tp" => self.pixel.v_tp = num()?,
            "variation.clamp_at" => self.variation.clamp_at = num()?,
            "variation.enabled" => {
                self.variation.enabled = match value {
                    "true" | "1" | "yes" | "on" => true,
                    "false" | "0" | "no" | "off" => false,
                    _ => return Err(bad(format!("`{key}` needs true or false, got `{value}`"))),
                }
            }
            "variation.thickness_nominal" => self.variation.thickness_nominal = num()?,
            "variation.thickness_rel_sigma" => self.variation.thickness_rel_sigma = num()?,
            "variation.vth_sigma" => self.variation.vth_sigma = num()?,
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment, as given on a command line.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::MalformedConfig {
                line: 0,
                reason: format!("expected key=value, got `{assignment}`"),
            })?;
        self.set(k.trim(), v.trim(), 0)
    }

    /// Layers the settings in `text` over `self`. Does not validate.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::MalformedConfig {
                line: i + 1,
                reason: format!("expected key = value, got `{line}`"),
            })?;
            self.set(k.trim(), v.trim(), i + 1)?;
        }
        Ok(())
    }

    /// Defaults overlaid with `text`, validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let f = |v: f64| Some(format!("{v}"));
        match key {
            "array.half_select_kappa" => f(self.half_select_kappa),
            "array.levels" => Some(self.levels.to_string()),
            "array.pva_max" => f(self.pva_max),
            "array.pva_min" => f(self.pva_min),
            "fe.g_max" => f(self.pixel.fe.g_max),
            "fe.g_min" => f(self.pixel.fe.g_min),
            "fe.mu_c" => f(self.pixel.fe.mu_c),
            "fe.sigma_c" => f(self.pixel.fe.sigma_c),
            "fe.v_reset" => f(self.pixel.fe.v_reset),
            "pixel.beta_p" => f(self.pixel.beta_p),
            "pixel.c_pd" => f(self.pixel.c_pd),
            "pixel.i_dark" => f(self.pixel.i_dark),
            "pixel.v_dd" => f(self.pixel.v_dd),
            "pixel.v_tp" => f(self.pixel.v_tp),
            "variation.clamp_at" => f(self.variation.clamp_at),
            "variation.enabled" => Some(self.variation.enabled.to_string()),
            "variation.thickness_nominal" => f(self.variation.thickness_nominal),
            "variation.thickness_rel_sigma" => f(self.variation.thickness_rel_sigma),
            "variation.vth_sigma" => f(self.variation.vth_sigma),
            _ => None,
        }
    }

    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key is readable");
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
