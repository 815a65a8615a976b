//! Per-level Monte Carlo statistics of programmed polarization and
//! conductance under process variation.
//!
//! Sample `i` uses the variation draw of pixel `(0, i)`, so every level sees
//! the same devices and results do not depend on evaluation order.

use rayon::prelude::*;

use crate::array::{pva_for_level, ArrayConfig};
use crate::fefet::{self, PolarizationState, ProgrammingPulse};
use crate::metrics::fmt_sig;
use crate::pixel::PixelParams;
use crate::variation::{sample_pixel, VariationSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let std = if values.len() > 1 {
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Some(Moments {
            mean,
            std,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub level: u32,
    pub pva: f64,
    pub samples: usize,
    pub p: Moments,
    pub g: Moments,
}

pub const CSV_HEADER: &str = "level,pva,samples,p_mean,p_std,p_min,p_max,g_mean,g_std,g_min,g_max";

pub fn level_statistics(
    params: &PixelParams,
    config: &ArrayConfig,
    spec: &VariationSpec,
    samples: usize,
    seed: u64,
) -> Result<Vec<LevelStats>> {
    if samples == 0 {
        return Err(Error::EmptyBatch);
    }
    let draws: Vec<_> = (0..samples)
        .into_par_iter()
        .map(|i| sample_pixel(seed, 0, i, spec))
        .collect();
    (1..=config.levels)
        .map(|level| {
            let pva = pva_for_level(level, config)?;
            let pulse = ProgrammingPulse::after_reset(pva)?;
            let pg = draws
                .par_iter()
                .map(|var| {
                    let s = fefet::apply_program_pulse(
                        PolarizationState::RESET,
                        &pulse,
                        &params.fe,
                        var.thickness_factor,
                    )?;
                    Ok((s.p(), fefet::conductance(s, &params.fe, var.dvth_fe)))
                })
                .collect::<Result<Vec<_>>>()?;
            let (p, g): (Vec<f64>, Vec<f64>) = pg.into_iter().unzip();
            Ok(LevelStats {
                level,
                pva,
                samples,
                p: Moments::of(&p).expect("samples > 0"),
                g: Moments::of(&g).expect("samples > 0"),
            })
        })
        .collect()
}

pub fn to_csv(stats: &[LevelStats]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for s in stats {
        let cols = [
            s.level.to_string(),
            fmt_sig(s.pva),
            s.samples.to_string(),
            fmt_sig(s.p.mean),
            fmt_sig(s.p.std),
            fmt_sig(s.p.min),
            fmt_sig(s.p.max),
            fmt_sig(s.g.mean),
            fmt_sig(s.g.std),
            fmt_sig(s.g.min),
            fmt_sig(s.g.max),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}
