//! Behavioral multidomain FeFET.
//!
//! The ferroelectric film is treated as an ensemble of independent domains
//! whose coercive voltages are normally distributed with mean `mu_c` and
//! spread `sigma_c`. A positive gate pulse of amplitude `V` switches every
//! domain whose coercive voltage lies below `V`, so the switched fraction is
//! `Phi((V - mu_c * t) / sigma_c)` where `t` is the film-thickness factor.
//! Domains never switch back except through a full negative reset, which
//! gives the ratchet semantics used by program and disturb pulses alike.

use crate::{Error, Result};

/// Overdrive around which a FeFET threshold shift is linearized into a
/// multiplicative conductance change.
pub const VTH_LINEARIZATION_OVERDRIVE: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeDeviceParams {
    /// Mean coercive voltage of the domain distribution (V).
    pub mu_c: f64,
    /// Spread of the coercive voltages (V).
    pub sigma_c: f64,
    /// Channel conductance with no domain switched (S).
    pub g_min: f64,
    /// Channel conductance with every domain switched (S).
    pub g_max: f64,
    /// Magnitude of the negative baseline-reset pulse (V).
    pub v_reset: f64,
}

impl Default for FeDeviceParams {
    fn default() -> Self {
        FeDeviceParams {
            mu_c: 2.05,
            sigma_c: 0.35,
            g_min: 0.13e-6,
            g_max: 0.4e-6,
            v_reset: 3.5,
        }
    }
}

impl FeDeviceParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu_c,
            self.sigma_c,
            self.g_min,
            self.g_max,
            self.v_reset,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams(
                "FeFET parameters must be finite".into(),
            ));
        }
        if self.sigma_c <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "sigma_c must be positive, got {}",
                self.sigma_c
            )));
        }
        if !(self.g_max > self.g_min && self.g_min > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need g_max > g_min > 0, got g_min={} g_max={}",
                self.g_min, self.g_max
            )));
        }
        if self.v_reset < self.mu_c + 4.0 * self.sigma_c {
            return Err(Error::InvalidParams(format!(
                "reset pulse {} V does not clear the coercive distribution (needs >= {} V)",
                self.v_reset,
                self.mu_c + 4.0 * self.sigma_c
            )));
        }
        Ok(())
    }

    /// Fraction of domains a pulse of `amplitude` volts switches on a film
    /// with the given thickness factor.
    pub fn switched_fraction(&self, amplitude: f64, thickness_factor: f64) -> f64 {
        if amplitude <= 0.0 {
            return 0.0;
        }
        normal_cdf((amplitude - self.mu_c * thickness_factor) / self.sigma_c)
    }
}

/// Switched-domain fraction, the stand-in for remnant polarization.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct PolarizationState {
    p: f64,
}

impl PolarizationState {
    pub const RESET: PolarizationState = PolarizationState { p: 0.0 };

    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(PolarizationState { p })
        } else {
            Err(Error::InvalidParams(format!(
                "switched fraction must lie in [0, 1], got {p}"
            )))
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgrammingPulse {
    amplitude: f64,
    pub preceded_by_reset: bool,
}

impl ProgrammingPulse {
    /// A key-programming pulse: baseline reset followed by a positive pulse.
    pub fn after_reset(amplitude: f64) -> Result<Self> {
        Self::new(amplitude, true)
    }

    pub fn new(amplitude: f64, preceded_by_reset: bool) -> Result<Self> {
        if amplitude > 0.0 && amplitude.is_finite() {
            Ok(ProgrammingPulse {
                amplitude,
                preceded_by_reset,
            })
        } else {
            Err(Error::InvalidParams(format!(
                "programming amplitude must be positive, got {amplitude}"
            )))
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

/// Applies the negative baseline-reset pulse: every domain returns to the
/// unswitched orientation regardless of history.
pub fn reset_state(_params: &FeDeviceParams) -> PolarizationState {
    PolarizationState::RESET
}

pub fn apply_program_pulse(
    state: PolarizationState,
    pulse: &ProgrammingPulse,
    params: &FeDeviceParams,
    thickness_factor: f64,
) -> Result<PolarizationState> {
    if !(thickness_factor > 0.0) {
        return Err(Error::NonPositiveThickness(thickness_factor));
    }
    let base = if pulse.preceded_by_reset {
        reset_state(params)
    } else {
        state
    };
    let switched = params.switched_fraction(pulse.amplitude, thickness_factor);
    Ok(PolarizationState {
        p: base.p.max(switched),
    })
}

/// Sub-threshold pulse seen by an unselected device. Negative or zero
/// effective voltages leave the state untouched.
pub fn apply_disturb(
    state: PolarizationState,
    v_effective: f64,
    params: &FeDeviceParams,
    thickness_factor: f64,
) -> PolarizationState {
    debug_assert!(thickness_factor > 0.0);
    let switched = params.switched_fraction(v_effective, thickness_factor);
    PolarizationState {
        p: state.p.max(switched),
    }
}

/// Channel conductance for a polarization state and a FeFET threshold shift.
pub fn conductance(state: PolarizationState, params: &FeDeviceParams, dvth_fe: f64) -> f64 {
    let nominal = params.g_min + state.p * (params.g_max - params.g_min);
    let g = nominal * (1.0 - dvth_fe / VTH_LINEARIZATION_OVERDRIVE);
    g.max(params.g_min / 100.0)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
