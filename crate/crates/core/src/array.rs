//! Pixel array with shared row and column control lines.
//!
//! Programming proceeds one row at a time. The selected row has its SL and
//! Dis lines asserted, so its FeFET sources sit at ground and each device
//! sees the full column gate voltage `V_G` after a baseline reset. Every
//! other row keeps its FeFET sources floating at an elevated level; those
//! devices see only `half_select_kappa * V_G`, applied as a disturb pulse.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fefet::{self, PolarizationState, ProgrammingPulse};
use crate::pixel::{self, PixelParams, PixelState, VariationSample};
use crate::variation::{self, VariationSpec};
use crate::{Error, Grid, Result};

/// Gate drive seen by every FeFET during the readout subphase (V).
pub const READ_GATE_VOLTAGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Number of programmable levels `L`.
    pub levels: u32,
    pub pva_min: f64,
    pub pva_max: f64,
    /// Fraction of `V_G` that reaches unselected FeFETs as effective amplitude.
    pub half_select_kappa: f64,
}

impl ArrayConfig {
    pub fn new(rows: usize, cols: usize) -> Self {
        ArrayConfig {
            rows,
            cols,
            levels: 16,
            pva_min: 1.3,
            pva_max: 2.8,
            half_select_kappa: 0.4,
        }
    }

    pub fn with_levels(self, levels: u32) -> Self {
        ArrayConfig { levels, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParams(format!(
                "array must have at least one row and column, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.levels < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 levels, got {}",
                self.levels
            )));
        }
        if !(self.pva_min > 0.0 && self.pva_min < self.pva_max && self.pva_max.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need 0 < pva_min < pva_max, got [{}, {}]",
                self.pva_min, self.pva_max
            )));
        }
        if !(0.0..1.0).contains(&self.half_select_kappa) {
            return Err(Error::InvalidParams(format!(
                "half_select_kappa must lie in [0, 1), got {}",
                self.half_select_kappa
            )));
        }
        if self.half_select_kappa * self.pva_max >= self.pva_min {
            return Err(Error::InvalidParams(format!(
                "half-select amplitude {} V reaches the lowest programming level {} V",
                self.half_select_kappa * self.pva_max,
                self.pva_min
            )));
        }
        Ok(())
    }
}

/// Programming amplitude for a 1-based level, linear over `[pva_min, pva_max]`.
pub fn pva_for_level(level: u32, config: &ArrayConfig) -> Result<f64> {
    if level == 0 || level > config.levels {
        return Err(Error::LevelOutOfRange {
            level,
            levels: config.levels,
        });
    }
    if config.levels == 1 {
        return Ok(config.pva_max);
    }
    if level == config.levels {
        return Ok(config.pva_max);
    }
    let step = (config.pva_max - config.pva_min) / (config.levels - 1) as f64;
    Ok(config.pva_min + (level - 1) as f64 * step)
}

/// Per-pixel programming level in `1..=L`: the symmetric key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMatrix {
    levels: u32,
    grid: Grid<u32>,
}

impl KeyMatrix {
    pub fn new(grid: Grid<u32>, levels: u32) -> Result<Self> {
        if let Some(((r, c), &bad)) = grid.iter().find(|(_, &v)| v == 0 || v > levels) {
            return Err(Error::InvalidParams(format!(
                "key entry ({r}, {c}) = {bad} outside 1..={levels}"
            )));
        }
        Ok(KeyMatrix { levels, grid })
    }

    pub fn uniform(rows: usize, cols: usize, level: u32, levels: u32) -> Result<Self> {
        Self::new(Grid::filled(rows, cols, level), levels)
    }

    /// i.i.d. uniform levels from a ChaCha8 stream seeded with `seed`,
    /// drawn in row-major order.
    pub fn random(rows: usize, cols: usize, levels: u32, seed: u64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParams("need at least one level".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::from_fn(rows, cols, |_, _| rng.random_range(1..=levels));
        Ok(KeyMatrix { levels, grid })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn grid(&self) -> &Grid<u32> {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn level(&self, row: usize, col: usize) -> u32 {
        self.grid[(row, col)]
    }
}

/// Line states for one protocol step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignals {
    pub rst: Vec<bool>,
    pub sl: Vec<bool>,
    pub dis: Vec<bool>,
    pub v_g: Vec<f64>,
}

impl ControlSignals {
    /// Programming step for `row`: SL and Dis asserted on that row only.
    pub fn programming(rows: usize, row: usize, v_g: &[f64]) -> Self {
        let only = |r: usize| r == row;
        ControlSignals {
            rst: vec![false; rows],
            sl: (0..rows).map(only).collect(),
            dis: (0..rows).map(only).collect(),
            v_g: v_g.to_vec(),
        }
    }

    /// Readout: every row selected in turn, Dis held low everywhere, gates
    /// driven at [`READ_GATE_VOLTAGE`].
    pub fn imaging(rows: usize, cols: usize) -> Self {
        ControlSignals {
            rst: vec![false; rows],
            sl: vec![true; rows],
            dis: vec![false; rows],
            v_g: vec![READ_GATE_VOLTAGE; cols],
        }
    }

    pub fn is_programming(&self, row: usize) -> bool {
        self.sl[row] && self.dis[row]
    }

    pub fn discharge_active(&self) -> bool {
        self.dis.iter().any(|&d| d)
    }
}

/// Worst polarization change seen on unselected pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbReport {
    /// Max |dp| over every unselected pixel, programmed or not.
    pub max_abs_dp: f64,
    pub worst_pixel: Option<(usize, usize)>,
    /// Max |dp| restricted to pixels whose row had already been programmed.
    pub max_programmed_drift: f64,
    pub disturb_pulses: usize,
}

impl DisturbReport {
    pub fn merge(&mut self, other: &DisturbReport) {
        if other.worst_pixel.is_some()
            && (self.worst_pixel.is_none() || other.max_abs_dp > self.max_abs_dp)
        {
            self.max_abs_dp = other.max_abs_dp;
            self.worst_pixel = other.worst_pixel;
        }
        self.max_programmed_drift = self.max_programmed_drift.max(other.max_programmed_drift);
        self.disturb_pulses += other.disturb_pulses;
    }
}

#[derive(Debug, Clone)]
pub struct PixelArray {
    config: ArrayConfig,
    params: PixelParams,
    pixels: Grid<PixelState>,
    variations: Grid<VariationSample>,
    programmed: Vec<bool>,
}

impl PixelArray {
    pub fn new(
        config: ArrayConfig,
        params: PixelParams,
        variations: Grid<VariationSample>,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if variations.dims() != (config.rows, config.cols) {
            return Err(Error::mismatch(
                format!("{}x{} variation grid", config.rows, config.cols),
                format!("{}x{}", variations.rows(), variations.cols()),
            ));
        }
        if let Some(((r, c), v)) = variations.iter().find(|(_, v)| !(v.thickness_factor > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "pixel ({r}, {c}) has thickness factor {}",
                v.thickness_factor
            )));
        }
        Ok(PixelArray {
            config,
            params,
            pixels: Grid::filled(config.rows, config.cols, PixelState::new(&params)),
            variations,
            programmed: vec![false; config.rows],
        })
    }

    pub fn nominal(config: ArrayConfig, params: PixelParams) -> Result<Self> {
        let variations = Grid::filled(config.rows, config.cols, VariationSample::NOMINAL);
        Self::new(config, params, variations)
    }

    pub fn with_variation(
        config: ArrayConfig,
        params: PixelParams,
        seed: u64,
        spec: &VariationSpec,
    ) -> Result<Self> {
        spec.validate()?;
        let variations = variation::sample_frame(seed, config.rows, config.cols, spec);
        Self::new(config, params, variations)
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    pub fn params(&self) -> &PixelParams {
        &self.params
    }

    pub fn pixels(&self) -> &Grid<PixelState> {
        &self.pixels
    }

    pub fn variations(&self) -> &Grid<VariationSample> {
        &self.variations
    }

    pub fn polarization(&self) -> Grid<f64> {
        self.pixels.map(|px| px.fe_state.p())
    }

    pub fn programmed_rows(&self) -> &[bool] {
        &self.programmed
    }

    pub fn program_row(&mut self, row: usize, pva: &[f64]) -> Result<DisturbReport> {
        let cfg = self.config;
        if row >= cfg.rows {
            return Err(Error::RowOutOfRange {
                row,
                rows: cfg.rows,
            });
        }
        if pva.len() != cfg.cols {
            return Err(Error::mismatch(
                format!("{} column voltages", cfg.cols),
                pva.len(),
            ));
        }
        let pulses = pva
            .iter()
            .map(|&v| {
                if (cfg.pva_min..=cfg.pva_max).contains(&v) {
                    ProgrammingPulse::after_reset(v)
                } else {
                    Err(Error::AmplitudeOutOfRange {
                        value: v,
                        min: cfg.pva_min,
                        max: cfg.pva_max,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let signals = ControlSignals::programming(cfg.rows, row, pva);
        let fe = self.params.fe;
        let kappa = cfg.half_select_kappa;
        let programmed = &self.programmed;
        let variations = &self.variations;

        // (max |dp|, col, max drift on programmed rows) per row
        let per_row: Vec<Result<(f64, usize, f64)>> = self
            .pixels
            .rows_mut()
            .enumerate()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(r, cells)| {
                let var_row = variations.row(r);
                if signals.is_programming(r) {
                    for (c, cell) in cells.iter_mut().enumerate() {
                        cell.fe_state = fefet::apply_program_pulse(
                            cell.fe_state,
                            &pulses[c],
                            &fe,
                            var_row[c].thickness_factor,
                        )?;
                    }
                    return Ok((0.0, 0, 0.0));
                }
                let mut worst = (0.0f64, 0usize);
                for (c, cell) in cells.iter_mut().enumerate() {
                    let before = cell.fe_state.p();
                    cell.fe_state = fefet::apply_disturb(
                        cell.fe_state,
                        kappa * signals.v_g[c],
                        &fe,
                        var_row[c].thickness_factor,
                    );
                    let dp = (cell.fe_state.p() - before).abs();
                    if dp > worst.0 {
                        worst = (dp, c);
                    }
                }
                let drift = if programmed[r] { worst.0 } else { 0.0 };
                Ok((worst.0, worst.1, drift))
            })
            .collect();

        let mut report = DisturbReport::default();
        for (r, res) in per_row.into_iter().enumerate() {
            let (dp, c, drift) = res?;
            if r == row {
                continue;
            }
            report.disturb_pulses += cfg.cols;
            if report.worst_pixel.is_none() || dp > report.max_abs_dp {
                report.max_abs_dp = dp;
                report.worst_pixel = Some((r, c));
            }
            report.max_programmed_drift = report.max_programmed_drift.max(drift);
        }
        self.programmed[row] = true;
        Ok(report)
    }

    /// Programs every row top to bottom with the key's amplitudes.
    pub fn program_array(&mut self, key: &KeyMatrix) -> Result<DisturbReport> {
        self.program_rows(key, 0..self.config.rows)
    }

    /// Programs rows in the given order; [`program_array`](Self::program_array)
    /// is the protocol order.
    pub fn program_rows(
        &mut self,
        key: &KeyMatrix,
        order: impl IntoIterator<Item = usize>,
    ) -> Result<DisturbReport> {
        if (key.rows(), key.cols()) != (self.config.rows, self.config.cols) {
            return Err(Error::mismatch(
                format!("{}x{} key", self.config.rows, self.config.cols),
                format!("{}x{}", key.rows(), key.cols()),
            ));
        }
        if key.levels() != self.config.levels {
            return Err(Error::mismatch(
                format!("key with L={}", self.config.levels),
                format!("L={}", key.levels()),
            ));
        }
        let mut total = DisturbReport::default();
        for row in order {
            if row >= self.config.rows {
                return Err(Error::RowOutOfRange {
                    row,
                    rows: self.config.rows,
                });
            }
            let pva = (0..self.config.cols)
                .map(|c| pva_for_level(key.level(row, c), &self.config))
                .collect::<Result<Vec<_>>>()?;
            let report = self.program_row(row, &pva)?;
            total.merge(&report);
        }
        Ok(total)
    }

    /// Reads a frame of photodiode drops out as currents. Polarization is
    /// never modified; if the readout gate drive would move any state the
    /// capture fails with [`Error::ReadDisturb`].
    pub fn capture(&self, voltage_frame: &Grid<f64>) -> Result<Grid<f64>> {
        let (rows, cols) = (self.config.rows, self.config.cols);
        if voltage_frame.dims() != (rows, cols) {
            return Err(Error::mismatch(
                format!("{rows}x{cols} frame"),
                format!("{}x{}", voltage_frame.rows(), voltage_frame.cols()),
            ));
        }
        let signals = ControlSignals::imaging(rows, cols);
        debug_assert!(!signals.discharge_active());
        let fe = &self.params.fe;

        let currents: Vec<Result<f64>> = (0..rows * cols)
            .into_par_iter()
            .map(|i| {
                let (r, c) = (i / cols, i % cols);
                let state = self.pixels[(r, c)].fe_state;
                let var = &self.variations[(r, c)];
                let after = fefet::apply_disturb(state, signals.v_g[c], fe, var.thickness_factor);
                if after != state {
                    return Err(Error::ReadDisturb {
                        row: r,
                        col: c,
                        delta_p: after.p() - state.p(),
                    });
                }
                pixel::readout_current(voltage_frame[(r, c)], state, var, &self.params)
            })
            .collect();
        let data = currents.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Grid::from_vec(rows, cols, data).expect("dimensions checked above"))
    }

    /// Polarization state the key's level would give this pixel if it were
    /// programmed in isolation.
    pub fn isolated_state(&self, row: usize, col: usize, level: u32) -> Result<PolarizationState> {
        let pulse = ProgrammingPulse::after_reset(pva_for_level(level, &self.config)?)?;
        fefet::apply_program_pulse(
            PolarizationState::RESET,
            &pulse,
            &self.params.fe,
            self.variations[(row, col)].thickness_factor,
        )
    }
}
