//! One SecurePix pixel: photodiode reset, light integration, and the
//! encrypted readout current through the X_P source follower in series with
//! the FeFET channel.
//!
//! X_P is a square-law device with gate at `V_PD` and threshold `v_tp`. The
//! FeFET behaves as a linear conductance `G` below it, so the branch current
//! `I` satisfies
//!
//! ```text
//! I = (beta_p / 2) * max(0, V_PD - I / G - v_tp)^2
//! ```
//!
//! Writing `u = V_PD - v_tp - I / G` for the X_P overdrive gives the
//! quadratic `k u^2 + G u - G V_ov = 0` with `k = beta_p / 2` and
//! `V_ov = V_PD - v_tp`, whose non-negative root is taken in the
//! cancellation-free form `u = 2 G V_ov / (G + sqrt(G^2 + 4 k G V_ov))`.

use crate::fefet::{self, FeDeviceParams, PolarizationState};
use crate::lut::TransferLut;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelParams {
    /// Supply and reset level (V).
    pub v_dd: f64,
    /// Photodiode capacitance (F).
    pub c_pd: f64,
    /// Dark current added during integration (A).
    pub i_dark: f64,
    /// X_P threshold magnitude (V).
    pub v_tp: f64,
    /// X_P transconductance coefficient (A/V^2).
    pub beta_p: f64,
    pub fe: FeDeviceParams,
}

impl Default for PixelParams {
    fn default() -> Self {
        PixelParams {
            v_dd: 1.0,
            c_pd: 10e-15,
            i_dark: 0.0,
            v_tp: 0.3,
            beta_p: 200e-6,
            fe: FeDeviceParams::default(),
        }
    }
}

impl PixelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_dd > 0.0 && self.v_dd.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "v_dd must be positive, got {}",
                self.v_dd
            )));
        }
        if !(self.c_pd > 0.0 && self.c_pd.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "c_pd must be positive, got {}",
                self.c_pd
            )));
        }
        if !(self.v_tp > 0.0 && self.v_tp < self.v_dd) {
            return Err(Error::InvalidParams(format!(
                "v_tp must lie in (0, v_dd), got {}",
                self.v_tp
            )));
        }
        if !(self.beta_p > 0.0 && self.beta_p.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "beta_p must be positive, got {}",
                self.beta_p
            )));
        }
        if !(self.i_dark >= 0.0 && self.i_dark.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "i_dark must be non-negative, got {}",
                self.i_dark
            )));
        }
        self.fe.validate()
    }

    /// Photodiode drop that brings the X_P gate exactly to threshold under
    /// nominal conditions; the usable signal range is `[0, v_swing]`.
    pub fn v_swing(&self) -> f64 {
        self.v_dd - self.v_tp
    }

    /// Upper bound on any readout current, `(beta_p / 2) * v_dd^2`.
    pub fn max_current(&self) -> f64 {
        0.5 * self.beta_p * self.v_dd * self.v_dd
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelState {
    v_pd: f64,
    pub fe_state: PolarizationState,
}

impl PixelState {
    /// Freshly reset photodiode with an unprogrammed FeFET.
    pub fn new(params: &PixelParams) -> Self {
        PixelState {
            v_pd: params.v_dd,
            fe_state: PolarizationState::RESET,
        }
    }

    pub fn with_voltage(
        v_pd: f64,
        fe_state: PolarizationState,
        params: &PixelParams,
    ) -> Result<Self> {
        if !(0.0..=params.v_dd).contains(&v_pd) {
            return Err(Error::OutOfRange {
                value: v_pd,
                max: params.v_dd,
            });
        }
        Ok(PixelState { v_pd, fe_state })
    }

    pub fn v_pd(&self) -> f64 {
        self.v_pd
    }

    /// Accumulated drop `v_dd - v_pd`.
    pub fn delta_vpd(&self, params: &PixelParams) -> f64 {
        params.v_dd - self.v_pd
    }
}

/// Per-pixel process perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationSample {
    /// FeCap thickness relative to nominal.
    pub thickness_factor: f64,
    /// X_P threshold shift (V).
    pub dvth_p: f64,
    /// FeFET threshold shift (V).
    pub dvth_fe: f64,
}

impl VariationSample {
    pub const NOMINAL: VariationSample = VariationSample {
        thickness_factor: 1.0,
        dvth_p: 0.0,
        dvth_fe: 0.0,
    };
}

impl Default for VariationSample {
    fn default() -> Self {
        Self::NOMINAL
    }
}

/// Full-rail PMOS reset of the photodiode node; polarization is untouched.
pub fn reset(state: PixelState, params: &PixelParams) -> PixelState {
    PixelState {
        v_pd: params.v_dd,
        ..state
    }
}

/// Discharges the photodiode for `t` seconds, clamping at ground.
pub fn integrate(state: PixelState, i_pd: f64, t: f64, params: &PixelParams) -> Result<PixelState> {
    if !(i_pd >= 0.0) {
        return Err(Error::NegativePhotocurrent(i_pd));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeDuration(t));
    }
    let drop = (i_pd + params.i_dark) * t / params.c_pd;
    Ok(PixelState {
        v_pd: (state.v_pd - drop).max(0.0),
        ..state
    })
}

pub fn readout_current(
    delta_vpd: f64,
    fe_state: PolarizationState,
    var: &VariationSample,
    params: &PixelParams,
) -> Result<f64> {
    if !(0.0..=params.v_dd).contains(&delta_vpd) {
        return Err(Error::OutOfRange {
            value: delta_vpd,
            max: params.v_dd,
        });
    }
    let g = fefet::conductance(fe_state, &params.fe, var.dvth_fe);
    // v_gate - v_th = (v_dd - delta) - (v_tp + dvth_p), grouped so the dark
    // endpoint delta = v_swing gives exactly zero overdrive
    let v_ov = (params.v_swing() - delta_vpd) - var.dvth_p;
    Ok(stack_current(v_ov, g, params.beta_p))
}

/// Closed-form series-stack current for X_P overdrive `v_ov` and FeFET
/// conductance `g`.
pub fn stack_current(v_ov: f64, g: f64, beta: f64) -> f64 {
    if v_ov <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * beta;
    let u = 2.0 * g * v_ov / (g + (g * g + 4.0 * k * g * v_ov).sqrt());
    k * u * u
}

/// Samples `readout_current` on a uniform grid over `[0, v_dd]`.
pub fn transfer_curve(
    level_p: PolarizationState,
    var: &VariationSample,
    params: &PixelParams,
    n_points: usize,
) -> Result<TransferLut> {
    sample_curve(level_p, var, params, params.v_dd, n_points)
}

/// Samples the curve on `[0, span]`; the codec uses `span = v_swing`.
pub(crate) fn sample_curve(
    level_p: PolarizationState,
    var: &VariationSample,
    params: &PixelParams,
    span: f64,
    n_points: usize,
) -> Result<TransferLut> {
    if n_points < 2 {
        return Err(Error::TooFewPoints {
            min: 2,
            got: n_points,
        });
    }
    let last = (n_points - 1) as f64;
    let mut delta = Vec::with_capacity(n_points);
    let mut current = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let d = if k == n_points - 1 {
            span
        } else {
            span * k as f64 / last
        };
        delta.push(d);
        current.push(readout_current(d, level_p, var, params)?);
    }
    TransferLut::new(None, delta, current)
}
