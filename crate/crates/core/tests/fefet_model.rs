mod common;

use proptest::prelude::*;
use securepix::array::{pva_for_level, ArrayConfig};
use securepix::fefet::{
    apply_disturb, apply_program_pulse, conductance, normal_cdf, FeDeviceParams, PolarizationState,
    ProgrammingPulse,
};

use common::{normal_cdf_series, switched_fraction_oracle};

fn fe() -> FeDeviceParams {
    FeDeviceParams::default()
}

#[test]
fn normal_cdf_matches_series_oracle() {
    for i in -600..=600 {
        let z = i as f64 / 100.0;
        let (a, b) = (normal_cdf(z), normal_cdf_series(z));
        assert!((a - b).abs() < 1e-13, "z={z}: {a} vs {b}");
    }
}

#[test]
fn half_select_fraction_at_top_level() {
    // 0.4 * 2.8 V against mu_c = 2.05 V, sigma_c = 0.35 V
    let p = fe().switched_fraction(1.12, 1.0);
    assert!((p - 0.003_940_302_036_674_36).abs() < 1e-12, "{p}");
    assert!((p - switched_fraction_oracle(1.12, &fe(), 1.0)).abs() < 1e-14);
}

#[test]
fn read_gate_fraction() {
    let p = fe().switched_fraction(1.0, 1.0);
    assert!((p - normal_cdf_series(-3.0)).abs() < 1e-14);
    assert!((p - 0.001_349_898_031_630_095).abs() < 1e-12);
}

#[test]
fn reset_then_program_ignores_history() {
    let pulse = ProgrammingPulse::after_reset(1.5).unwrap();
    let from_high =
        apply_program_pulse(PolarizationState::new(0.9).unwrap(), &pulse, &fe(), 1.0).unwrap();
    let from_reset = apply_program_pulse(PolarizationState::RESET, &pulse, &fe(), 1.0).unwrap();
    assert_eq!(from_high, from_reset);
}

#[test]
fn non_positive_thickness_is_rejected() {
    let pulse = ProgrammingPulse::after_reset(2.0).unwrap();
    for t in [0.0, -1.0, f64::NAN] {
        assert!(apply_program_pulse(PolarizationState::RESET, &pulse, &fe(), t).is_err());
    }
}

#[test]
fn level_states_are_strictly_ordered() {
    let cfg = ArrayConfig::new(1, 1);
    let mut prev = -1.0;
    for level in 1..=cfg.levels {
        let v = pva_for_level(level, &cfg).unwrap();
        let p = fe().switched_fraction(v, 1.0);
        assert!(p > prev, "level {level}");
        prev = p;
    }
}

/// For each adjacent level pair, the nominal conductance gap and the largest
/// shift either level sees when its thickness moves by `rel`.
fn gaps_and_perturbations(rel: f64) -> Vec<(u32, f64, f64)> {
    let cfg = ArrayConfig::new(1, 1);
    let g = |level: u32, t: f64| {
        let v = pva_for_level(level, &cfg).unwrap();
        let s = PolarizationState::new(fe().switched_fraction(v, t)).unwrap();
        conductance(s, &fe(), 0.0)
    };
    let shift = |level: u32| {
        let nominal = g(level, 1.0);
        (g(level, 1.0 + rel) - nominal)
            .abs()
            .max((g(level, 1.0 - rel) - nominal).abs())
    };
    (2..=cfg.levels)
        .map(|l| (l, g(l, 1.0) - g(l - 1, 1.0), shift(l).max(shift(l - 1))))
        .collect()
}

#[test]
fn level_gap_exceeds_one_sigma_thickness_shift() {
    for (level, gap, shift) in gaps_and_perturbations(0.03) {
        assert!(gap > shift, "level {level}: gap {gap:e} vs shift {shift:e}");
    }
}

#[test]
fn three_sigma_thickness_shift_exceeds_level_gap() {
    // A 9 % coercive shift is 0.18 V against a 0.1 V PVA step, so a 3-sigma
    // device can land on a neighbouring level's conductance. Decryption
    // relies on the nominal curves, not on per-device separability.
    let cfg = ArrayConfig::new(1, 1);
    let step = (cfg.pva_max - cfg.pva_min) / (cfg.levels - 1) as f64;
    assert!(0.09 * fe().mu_c > step);
    for (level, gap, shift) in gaps_and_perturbations(0.09) {
        assert!(shift > gap, "level {level}: gap {gap:e} vs shift {shift:e}");
    }
}

#[test]
fn repeated_disturbs_equal_one() {
    let mut s = PolarizationState::RESET;
    for _ in 0..100 {
        s = apply_disturb(s, 1.12, &fe(), 1.0);
    }
    assert_eq!(s, apply_disturb(PolarizationState::RESET, 1.12, &fe(), 1.0));
}

proptest! {
    #[test]
    fn switched_fraction_monotone_in_amplitude(a in 0.0f64..4.0, b in 0.0f64..4.0, t in 0.91f64..1.09) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fe().switched_fraction(lo, t) <= fe().switched_fraction(hi, t));
    }

    #[test]
    fn programmed_state_stays_in_unit_interval(p0 in 0.0f64..=1.0, v in 0.0f64..5.0, t in 0.5f64..1.5, reset in any::<bool>()) {
        let s = apply_program_pulse(PolarizationState::new(p0).unwrap(), &ProgrammingPulse::new(v, reset).unwrap(), &fe(), t).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.p()));
        if !reset {
            prop_assert!(s.p() >= p0);
        }
    }

    #[test]
    fn disturb_is_a_ratchet(p0 in 0.0f64..=1.0, v in -2.0f64..2.0, t in 0.91f64..1.09) {
        let s0 = PolarizationState::new(p0).unwrap();
        let s1 = apply_disturb(s0, v, &fe(), t);
        prop_assert!(s1.p() >= s0.p());
        prop_assert_eq!(apply_disturb(s1, v, &fe(), t), s1);
        if v <= 0.0 {
            prop_assert_eq!(s1, s0);
        }
    }

    #[test]
    fn disturb_below_programming_amplitude_is_a_no_op(v_prog in 1.3f64..2.8, ratio in 0.0f64..1.0, t in 0.91f64..1.09) {
        let s = apply_program_pulse(PolarizationState::RESET, &ProgrammingPulse::after_reset(v_prog).unwrap(), &fe(), t).unwrap();
        prop_assert_eq!(apply_disturb(s, ratio * v_prog, &fe(), t), s);
    }

    #[test]
    fn conductance_bounds(p in 0.0f64..=1.0, dvth in -0.15f64..0.15) {
        let params = fe();
        let g = conductance(PolarizationState::new(p).unwrap(), &params, 0.0);
        prop_assert!(g >= params.g_min && g <= params.g_max);
        prop_assert!(conductance(PolarizationState::new(p).unwrap(), &params, dvth) > 0.0);
    }

    #[test]
    fn switched_fraction_matches_oracle(v in 0.0f64..4.0, t in 0.9f64..1.1) {
        let a = fe().switched_fraction(v, t);
        prop_assert!((a - switched_fraction_oracle(v, &fe(), t)).abs() < 1e-13);
    }
}
