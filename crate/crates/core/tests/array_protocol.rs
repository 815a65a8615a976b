mod common;

use securepix::array::{ArrayConfig, KeyMatrix, PixelArray};
use securepix::fefet::PolarizationState;
use securepix::pixel::PixelParams;
use securepix::variation::VariationSpec;
use securepix::{Error, Grid};

use common::replay_device;

fn params() -> PixelParams {
    PixelParams::default()
}

#[test]
fn two_row_column_sees_the_top_level_half_select() {
    let cfg = ArrayConfig::new(2, 1);
    let mut array = PixelArray::nominal(cfg, params()).unwrap();
    // row 0 at level 1, then row 1 at level 16: the unprogrammed row 1 sees
    // nothing for row 0, and row 0 sees 0.4 * 2.8 V for row 1.
    let key = KeyMatrix::new(Grid::from_vec(2, 1, vec![1, 16]).unwrap(), 16).unwrap();
    let report = array.program_array(&key).unwrap();
    assert_eq!(report.max_programmed_drift, 0.0);

    let mut fresh = PixelArray::nominal(cfg, params()).unwrap();
    let report = fresh.program_row(1, &[2.8]).unwrap();
    let p = fresh.polarization()[(0, 0)];
    assert!((p - 0.003_940_302_036_674_36).abs() < 1e-12, "{p}");
    assert!((report.max_abs_dp - p).abs() < 1e-15);
    assert_eq!(report.worst_pixel, Some((0, 0)));
}

#[test]
fn four_by_four_random_key_matches_device_replay() {
    let spec = VariationSpec::default();
    for seed in 0..20u64 {
        let cfg = ArrayConfig::new(4, 4);
        let key = KeyMatrix::random(4, 4, 16, seed).unwrap();
        let mut array =
            PixelArray::with_variation(cfg, params(), seed.wrapping_mul(31), &spec).unwrap();
        let order: Vec<usize> = (0..4).collect();
        array.program_rows(&key, order.iter().copied()).unwrap();
        let pol = array.polarization();
        for r in 0..4 {
            for c in 0..4 {
                let t = array.variations()[(r, c)].thickness_factor;
                let expected = replay_device(r, c, &key, &cfg, &params().fe, t, &order);
                assert!(
                    (pol[(r, c)] - expected).abs() <= 1e-12,
                    "seed {seed} ({r},{c}): {} vs {expected}",
                    pol[(r, c)]
                );
            }
        }
    }
}

#[test]
fn reverse_order_programming_matches_replay() {
    let cfg = ArrayConfig::new(6, 5);
    let key = KeyMatrix::random(6, 5, 16, 9).unwrap();
    let mut array = PixelArray::nominal(cfg, params()).unwrap();
    let order: Vec<usize> = (0..6).rev().collect();
    array.program_rows(&key, order.iter().copied()).unwrap();
    for ((r, c), &p) in array.polarization().iter() {
        let expected = replay_device(r, c, &key, &cfg, &params().fe, 1.0, &order);
        assert!((p - expected).abs() <= 1e-12);
    }
}

#[test]
fn programmed_pixels_drift_below_bound_on_64x64() {
    let cfg = ArrayConfig::new(64, 64);
    let key = KeyMatrix::random(64, 64, 16, 2024).unwrap();
    let mut array =
        PixelArray::with_variation(cfg, params(), 5, &VariationSpec::default()).unwrap();
    let report = array.program_array(&key).unwrap();
    assert!(report.max_programmed_drift < 0.005, "{report:?}");
    for ((r, c), &p) in array.polarization().iter() {
        let iso = array.isolated_state(r, c, key.level(r, c)).unwrap();
        assert!((p - iso.p()).abs() < 0.005, "({r},{c})");
    }
}

#[test]
fn capture_is_order_independent_and_non_destructive() {
    let cfg = ArrayConfig::new(8, 8);
    let key = KeyMatrix::random(8, 8, 16, 3).unwrap();
    let mut array =
        PixelArray::with_variation(cfg, params(), 17, &VariationSpec::default()).unwrap();
    array.program_array(&key).unwrap();
    let before = array.polarization();
    let frame = Grid::from_fn(8, 8, |r, c| ((r * 8 + c) as f64 / 63.0) * 0.7);
    let a = array.capture(&frame).unwrap();
    let b = array.capture(&frame).unwrap();
    assert_eq!(a, b);
    assert_eq!(array.polarization(), before);
    // pixel by pixel, in reverse order, against the device function
    for r in (0..8).rev() {
        for c in (0..8).rev() {
            let i = securepix::pixel::readout_current(
                frame[(r, c)],
                array.pixels()[(r, c)].fe_state,
                &array.variations()[(r, c)],
                &params(),
            )
            .unwrap();
            assert_eq!(a[(r, c)], i);
        }
    }
}

#[test]
fn capture_on_unprogrammed_array_reports_read_disturb() {
    let array = PixelArray::nominal(ArrayConfig::new(2, 2), params()).unwrap();
    let err = array.capture(&Grid::filled(2, 2, 0.0)).unwrap_err();
    assert!(matches!(err, Error::ReadDisturb { .. }));
}

#[test]
fn uniform_key_programs_every_pixel_identically() {
    let cfg = ArrayConfig::new(5, 7);
    let mut array = PixelArray::nominal(cfg, params()).unwrap();
    array
        .program_array(&KeyMatrix::uniform(5, 7, 9, 16).unwrap())
        .unwrap();
    let expected = array.isolated_state(0, 0, 9).unwrap();
    assert!(array
        .pixels()
        .as_slice()
        .iter()
        .all(|px| px.fe_state == expected));
    assert_ne!(expected, PolarizationState::RESET);
}

#[test]
fn mismatched_key_is_rejected() {
    let mut array = PixelArray::nominal(ArrayConfig::new(4, 4), params()).unwrap();
    let key = KeyMatrix::random(4, 3, 16, 0).unwrap();
    assert!(matches!(
        array.program_array(&key),
        Err(Error::DimensionMismatch { .. })
    ));
    let key = KeyMatrix::random(4, 4, 8, 0).unwrap();
    assert!(matches!(
        array.program_array(&key),
        Err(Error::DimensionMismatch { .. })
    ));
}
