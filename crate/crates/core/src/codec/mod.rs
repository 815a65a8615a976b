//! Encryption and decryption pipeline.
//!
//! ```text
//! 8-bit code -> photodiode drop -> programmed array capture -> current -> 8-bit code
//! ```
//!
//! Decryption runs the same chain backwards through per-level inverse lookup
//! tables built from variation-free transfer curves. The receiver never sees
//! the sender's variation draw.

pub mod keyfile;
pub mod netpbm;

use crate::array::{ArrayConfig, DisturbReport, KeyMatrix, PixelArray};
use crate::config::RunConfig;
use crate::fefet::{self, PolarizationState, ProgrammingPulse};
use crate::lut::TransferLut;
use crate::pixel::{self, PixelParams, VariationSample};
use crate::variation::VariationSpec;
use crate::{Error, Grid, Result};

pub use keyfile::KeyFile;
pub use netpbm::{Channels, ImageFrame};

/// Grid size of the inverse lookup tables.
pub const INVERSE_LUT_POINTS: usize = 1024;

/// Affine map from an 8-bit code to a photodiode drop: 255 maps to 0 V,
/// 0 maps to `v_swing = v_dd - v_tp`.
pub fn code_to_voltage(code: u32, params: &PixelParams) -> Result<f64> {
    if code > 255 {
        return Err(Error::CodeOutOfRange(code));
    }
    Ok((1.0 - code as f64 / 255.0) * params.v_swing())
}

/// Inverse of [`code_to_voltage`], rounded and clamped to `0..=255`.
pub fn voltage_to_code(delta_vpd: f64, params: &PixelParams) -> u8 {
    let code = 255.0 * (1.0 - delta_vpd / params.v_swing());
    round_half_up(code.clamp(0.0, 255.0)) as u8
}

/// `round(255 * min(1, i / i_fullscale))` with halves rounded up.
pub fn quantize_current(i: f64, i_fullscale: f64) -> u8 {
    round_half_up(255.0 * normalized_current(i, i_fullscale)) as u8
}

fn normalized_current(i: f64, i_fullscale: f64) -> f64 {
    (i / i_fullscale).clamp(0.0, 1.0)
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Nominal polarization reached by a level under this configuration.
pub fn nominal_level_state(
    level: u32,
    params: &PixelParams,
    config: &ArrayConfig,
) -> Result<PolarizationState> {
    let pva = crate::array::pva_for_level(level, config)?;
    fefet::apply_program_pulse(
        PolarizationState::RESET,
        &ProgrammingPulse::after_reset(pva)?,
        &params.fe,
        1.0,
    )
}

/// Quantizer full scale: nominal top-level current at zero photodiode drop.
pub fn full_scale_current(params: &PixelParams, config: &ArrayConfig) -> Result<f64> {
    let top = nominal_level_state(config.levels, params, config)?;
    pixel::readout_current(0.0, top, &VariationSample::NOMINAL, params)
}

/// Nominal transfer curve for `level` over the image gamut `[0, v_swing]`.
pub fn nominal_curve(
    level: u32,
    params: &PixelParams,
    config: &ArrayConfig,
    n_points: usize,
) -> Result<TransferLut> {
    let state = nominal_level_state(level, params, config)?;
    let lut = pixel::sample_curve(
        state,
        &VariationSample::NOMINAL,
        params,
        params.v_swing(),
        n_points,
    )
    .map_err(|e| match e {
        Error::NonMonotoneCurve { index, .. } => Error::NonMonotoneCurve { level, index },
        other => other,
    })?;
    Ok(lut.with_level(level))
}

/// Code-to-drop table for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseLut {
    level: u32,
    delta: [f64; 256],
}

impl InverseLut {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Estimated photodiode drop for an encrypted code.
    pub fn delta_for(&self, code: u8) -> f64 {
        self.delta[code as usize]
    }

    pub fn table(&self) -> &[f64; 256] {
        &self.delta
    }
}

pub fn build_inverse_lut(
    level: u32,
    params: &PixelParams,
    config: &ArrayConfig,
    n_points: usize,
) -> Result<InverseLut> {
    if n_points < 256 {
        return Err(Error::TooFewPoints {
            min: 256,
            got: n_points,
        });
    }
    let i_fs = full_scale_current(params, config)?;
    let lut = nominal_curve(level, params, config, n_points)?;
    let scale = |i: f64| 255.0 * normalized_current(i, i_fs);
    // Each code stands for the drops whose current rounds to it; take the
    // middle of that interval. Code 0 is pinned to the dark endpoint.
    let mut delta = [0.0; 256];
    delta[0] = lut.invert_scaled(0.0, scale);
    for (code, slot) in delta.iter_mut().enumerate().skip(1) {
        let q = code as f64;
        let bright = lut.invert_scaled((q + 0.5).min(255.0), scale);
        let dark = lut.invert_scaled(q - 0.5, scale);
        *slot = 0.5 * (bright + dark);
    }
    for slot in &mut delta {
        *slot = slot.clamp(0.0, params.v_swing());
    }
    Ok(InverseLut { level, delta })
}

/// Provenance written alongside an encrypted image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptionMetadata {
    pub seed: Option<u64>,
    pub variation: String,
    pub config_hash: String,
}

impl EncryptionMetadata {
    pub fn comments(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(seed) = self.seed {
            out.push(format!("securepix-seed={seed}"));
        }
        out.push(format!("securepix-config={}", self.config_hash));
        out.push(format!("securepix-variation={}", self.variation));
        out
    }

    pub fn from_comments(comments: &[String]) -> Option<Self> {
        let field = |name: &str| {
            comments
                .iter()
                .find_map(|c| c.trim().strip_prefix(name).map(str::to_string))
        };
        Some(EncryptionMetadata {
            seed: field("securepix-seed=").and_then(|s| s.parse().ok()),
            config_hash: field("securepix-config=")?,
            variation: field("securepix-variation=").unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Encrypted {
    pub image: ImageFrame,
    pub metadata: EncryptionMetadata,
    /// Half-select disturb seen while programming the key.
    pub disturb: DisturbReport,
}

impl Encrypted {
    pub fn to_netpbm(&self) -> Vec<u8> {
        netpbm::encode(&self.image, &self.metadata.comments())
    }
}

/// Encryption and decryption under one run configuration.
#[derive(Debug, Clone)]
pub struct Codec {
    config: RunConfig,
}

impl Codec {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Codec { config })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn array_config(&self, key: &KeyFile) -> ArrayConfig {
        key.array_config(self.config.half_select_kappa)
    }

    /// Builds the programmed array for `key`, optionally with a variation
    /// draw. Programming happens once per key.
    pub fn programmed_array(
        &self,
        key: &KeyFile,
        variation_seed: Option<u64>,
        spec: &VariationSpec,
    ) -> Result<(PixelArray, DisturbReport)> {
        let cfg = self.array_config(key);
        let mut array = match variation_seed {
            Some(seed) if spec.enabled => {
                PixelArray::with_variation(cfg, self.config.pixel, seed, spec)?
            }
            _ => PixelArray::nominal(cfg, self.config.pixel)?,
        };
        let report = array.program_array(&key.key)?;
        Ok((array, report))
    }

    /// Encrypts with the run configuration's variation spec.
    pub fn encrypt(
        &self,
        image: &ImageFrame,
        key: &KeyFile,
        variation_seed: Option<u64>,
    ) -> Result<Encrypted> {
        self.encrypt_with(image, key, variation_seed, &self.config.variation)
    }

    pub fn encrypt_with(
        &self,
        image: &ImageFrame,
        key: &KeyFile,
        variation_seed: Option<u64>,
        spec: &VariationSpec,
    ) -> Result<Encrypted> {
        check_dims(image, &key.key)?;
        let params = &self.config.pixel;
        let cfg = self.array_config(key);
        let (array, disturb) = self.programmed_array(key, variation_seed, spec)?;
        let i_fs = full_scale_current(params, &cfg)?;

        let mut out = ImageFrame::blank(image.rows(), image.cols(), image.channels());
        for ch in 0..image.channels().count() {
            let plane = image.plane(ch);
            let mut volts = Vec::with_capacity(plane.as_slice().len());
            for &code in plane.as_slice() {
                volts.push(code_to_voltage(code as u32, params)?);
            }
            let volts = Grid::from_vec(plane.rows(), plane.cols(), volts).expect("plane dims");
            let currents = array.capture(&volts)?;
            out.set_plane(ch, &currents.map(|&i| quantize_current(i, i_fs)));
        }

        let enabled = variation_seed.is_some() && spec.enabled;
        Ok(Encrypted {
            image: out,
            metadata: EncryptionMetadata {
                seed: variation_seed.filter(|_| enabled),
                variation: if enabled {
                    spec.summary()
                } else {
                    "off".into()
                },
                config_hash: self.config.hash(),
            },
            disturb,
        })
    }

    /// Per-level inverse tables for a key's configuration, indexed by `level - 1`.
    pub fn inverse_luts(&self, key: &KeyFile) -> Result<Vec<InverseLut>> {
        let cfg = self.array_config(key);
        (1..=cfg.levels)
            .map(|level| build_inverse_lut(level, &self.config.pixel, &cfg, INVERSE_LUT_POINTS))
            .collect()
    }

    pub fn decrypt(&self, encrypted: &ImageFrame, key: &KeyFile) -> Result<ImageFrame> {
        check_dims(encrypted, &key.key)?;
        let luts = self.inverse_luts(key)?;
        let params = &self.config.pixel;
        let mut out = ImageFrame::blank(encrypted.rows(), encrypted.cols(), encrypted.channels());
        for ch in 0..encrypted.channels().count() {
            let plane = encrypted.plane(ch);
            let decoded = Grid::from_fn(plane.rows(), plane.cols(), |r, c| {
                let lut = &luts[(key.key.level(r, c) - 1) as usize];
                voltage_to_code(lut.delta_for(plane[(r, c)]), params)
            });
            out.set_plane(ch, &decoded);
        }
        Ok(out)
    }
}

fn check_dims(image: &ImageFrame, key: &KeyMatrix) -> Result<()> {
    if (image.rows(), image.cols()) != (key.rows(), key.cols()) {
        return Err(Error::mismatch(
            format!("{}x{} image (key size)", key.rows(), key.cols()),
            format!("{}x{}", image.rows(), image.cols()),
        ));
    }
    Ok(())
}
