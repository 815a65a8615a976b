//! Test-only oracles, kept independent of the library's numerical routes.

#![allow(dead_code)]

use std::path::PathBuf;

use securepix::array::{ArrayConfig, KeyMatrix};
use securepix::codec::{netpbm, ImageFrame};
use securepix::fefet::FeDeviceParams;
use securepix::Grid;

/// Standard normal CDF from the Taylor series of the integral of the
/// density, `Phi(z) = 1/2 + phi(z) * sum z^(2n+1) / (1 * 3 * ... * (2n+1))`,
/// summed until terms vanish. Accurate to ~1e-15 absolute for |z| < 8.
pub fn normal_cdf_series(z: f64) -> f64 {
    let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut term = z;
    let mut sum = z;
    let mut n = 1.0;
    while term.abs() > 1e-300 && n < 2000.0 {
        term *= z * z / (2.0 * n + 1.0);
        sum += term;
        n += 1.0;
        if term.abs() < sum.abs() * 1e-18 {
            break;
        }
    }
    0.5 + density * sum
}

/// Switched fraction from the series CDF.
pub fn switched_fraction_oracle(amplitude: f64, fe: &FeDeviceParams, thickness: f64) -> f64 {
    if amplitude <= 0.0 {
        return 0.0;
    }
    normal_cdf_series((amplitude - fe.mu_c * thickness) / fe.sigma_c)
}

/// Root of `I = (beta/2) max(0, v_ov - I/g)^2` by bisection on
/// `[0, (beta/2) v_max^2]`, run until the bracket stops shrinking.
pub fn stack_current_bisect(v_ov: f64, g: f64, beta: f64, v_max: f64) -> f64 {
    if v_ov <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * beta;
    let residual = |i: f64| i - k * (v_ov - i / g).max(0.0).powi(2);
    let (mut lo, mut hi) = (0.0_f64, k * v_max * v_max);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Replays the row-by-row protocol on one device in isolation: at each
/// step the device is either the selected one (reset, then full pulse) or a
/// half-selected bystander (ratchet to the kappa-scaled pulse).
pub fn replay_device(
    row: usize,
    col: usize,
    key: &KeyMatrix,
    cfg: &ArrayConfig,
    fe: &FeDeviceParams,
    thickness: f64,
    order: &[usize],
) -> f64 {
    let step = (cfg.pva_max - cfg.pva_min) / (cfg.levels - 1) as f64;
    let pva = |level: u32| {
        if level == cfg.levels {
            cfg.pva_max
        } else {
            cfg.pva_min + (level - 1) as f64 * step
        }
    };
    let mut p: f64 = 0.0;
    for &r in order {
        let v = pva(key.level(r, col));
        if r == row {
            p = switched_fraction_oracle(v, fe, thickness);
        } else {
            p = p.max(switched_fraction_oracle(
                cfg.half_select_kappa * v,
                fe,
                thickness,
            ));
        }
    }
    p
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> ImageFrame {
    netpbm::read(fixture_dir().join(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
        .image
}

pub const NATURAL_FIXTURES: [&str; 10] = [
    "camera64.pgm",
    "astronaut64.pgm",
    "coffee64.pgm",
    "chelsea64.pgm",
    "coins64.pgm",
    "moon64.pgm",
    "rocket64.pgm",
    "brick64.pgm",
    "grass64.pgm",
    "clock64.pgm",
];

pub fn gray_image(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> u8) -> ImageFrame {
    ImageFrame::gray(&Grid::from_fn(rows, cols, f))
}
