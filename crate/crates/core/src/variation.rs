//! Counter-based per-pixel process variation.
//!
//! Every pixel's sample is a pure function of `(seed, row, col)`, so frames
//! can be generated in any order or in parallel with identical results.
//!
//! The derivation is fixed bit-for-bit:
//!
//! 1. `key = splitmix64_finalize(seed ^ (row << 32).wrapping_add(col))`.
//! 2. A SplitMix64 stream starts at state `key`; each draw adds
//!    `0x9E3779B97F4A7C15` to the state and returns the finalized state.
//! 3. A draw `x` becomes the open-interval uniform `((x >> 11) + 0.5) * 2^-53`.
//! 4. Four uniforms `u1..u4` feed two Box-Muller pairs:
//!    `z0 = r1 cos(2 pi u2)`, `z1 = r1 sin(2 pi u2)`, `z2 = r2 cos(2 pi u4)`
//!    with `r = sqrt(-2 ln u)`.
//! 5. `z0` drives thickness, `z1` the X_P threshold, `z2` the FeFET
//!    threshold. Each is clamped to `[-clamp_at, clamp_at]` before scaling.

use crate::pixel::VariationSample;
use crate::{Error, Grid, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationSpec {
    /// Nominal FeCap thickness (m). Informational; the model works in ratios.
    pub thickness_nominal: f64,
    /// Relative thickness sigma (0.03 puts the 3-sigma bound at 9 %).
    pub thickness_rel_sigma: f64,
    /// Threshold-voltage sigma for X_P and the FeFET (V).
    pub vth_sigma: f64,
    /// Clamp, in sigmas.
    pub clamp_at: f64,
    pub enabled: bool,
}

impl Default for VariationSpec {
    fn default() -> Self {
        VariationSpec {
            thickness_nominal: 4e-9,
            thickness_rel_sigma: 0.03,
            vth_sigma: 0.05,
            clamp_at: 3.0,
            enabled: true,
        }
    }
}

impl VariationSpec {
    pub fn disabled() -> Self {
        VariationSpec {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thickness_rel_sigma >= 0.0 && self.vth_sigma >= 0.0) {
            return Err(Error::InvalidParams(
                "variation sigmas must be non-negative".into(),
            ));
        }
        if !(self.clamp_at > 0.0 && self.clamp_at.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "clamp_at must be positive, got {}",
                self.clamp_at
            )));
        }
        if self.thickness_rel_sigma * self.clamp_at >= 1.0 {
            return Err(Error::InvalidParams(
                "thickness_rel_sigma * clamp_at must stay below 1 so thickness remains positive"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Short human-readable description used in image metadata.
    pub fn summary(&self) -> String {
        if self.enabled {
            format!(
                "thickness_rel_sigma={},vth_sigma={},clamp_at={}",
                self.thickness_rel_sigma, self.vth_sigma, self.clamp_at
            )
        } else {
            "off".to_string()
        }
    }
}

/// SplitMix64 output finalizer.
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream key for one pixel.
pub fn pixel_key(seed: u64, row: usize, col: usize) -> u64 {
    let counter = ((row as u64) << 32).wrapping_add(col as u64);
    splitmix64_finalize(seed ^ counter)
}

/// SplitMix64 stream, used here only as a per-pixel substream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        SplitMix64 { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix64_finalize(self.state)
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Box-Muller pair of independent standard normals.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}

/// The three raw (unclamped) standard normals behind a pixel's sample.
pub fn pixel_normals(seed: u64, row: usize, col: usize) -> [f64; 3] {
    let mut stream = SplitMix64::new(pixel_key(seed, row, col));
    let (z0, z1) = stream.next_normal_pair();
    let (z2, _) = stream.next_normal_pair();
    [z0, z1, z2]
}

pub fn sample_pixel(seed: u64, row: usize, col: usize, spec: &VariationSpec) -> VariationSample {
    if !spec.enabled {
        return VariationSample::NOMINAL;
    }
    let [z0, z1, z2] = pixel_normals(seed, row, col);
    let clamp = |z: f64| z.clamp(-spec.clamp_at, spec.clamp_at);
    VariationSample {
        thickness_factor: 1.0 + spec.thickness_rel_sigma * clamp(z0),
        dvth_p: spec.vth_sigma * clamp(z1),
        dvth_fe: spec.vth_sigma * clamp(z2),
    }
}

pub fn sample_frame(
    seed: u64,
    rows: usize,
    cols: usize,
    spec: &VariationSpec,
) -> Grid<VariationSample> {
    Grid::par_from_fn(rows, cols, |r, c| sample_pixel(seed, r, c, spec))
}
