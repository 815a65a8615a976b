use securepix::pixel::VariationSample;
use securepix::variation::{pixel_normals, sample_frame, sample_pixel, SplitMix64, VariationSpec};

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn splitmix_reference_stream() {
    let mut s = SplitMix64::new(1_234_567);
    assert_eq!(s.next_u64(), 6_457_827_717_110_365_317);
    assert_eq!(s.next_u64(), 3_203_168_211_198_807_973);
    assert_eq!(s.next_u64(), 9_817_491_932_198_370_423);
}

#[test]
fn thickness_moments_over_ten_thousand_pixels() {
    let spec = VariationSpec::default();
    let frame = sample_frame(42, 100, 100, &spec);
    let t: Vec<f64> = frame
        .as_slice()
        .iter()
        .map(|s| s.thickness_factor)
        .collect();
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let sd = (t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 1.0).abs() <= 0.001, "mean {mean}");
    assert!((sd - 0.03).abs() <= 0.003, "sd {sd}");
}

#[test]
fn threshold_moments_over_ten_thousand_pixels() {
    let frame = sample_frame(7, 100, 100, &VariationSpec::default());
    for pick in [
        |s: &VariationSample| s.dvth_p,
        |s: &VariationSample| s.dvth_fe,
    ] {
        let v: Vec<f64> = frame.as_slice().iter().map(pick).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.002, "mean {mean}");
        assert!((sd - 0.05).abs() < 0.005, "sd {sd}");
    }
}

#[test]
fn every_sample_respects_the_clamp() {
    let spec = VariationSpec::default();
    for s in sample_frame(1, 200, 200, &spec).as_slice() {
        assert!((s.thickness_factor - 1.0).abs() <= 0.09 + 1e-15);
        assert!(s.dvth_p.abs() <= 0.15 + 1e-15);
        assert!(s.dvth_fe.abs() <= 0.15 + 1e-15);
        assert!(s.thickness_factor > 0.0);
    }
}

#[test]
fn neighbouring_seeds_give_different_frames() {
    let spec = VariationSpec::default();
    for seed in [0u64, 1, 99, u64::MAX - 1] {
        let a = sample_frame(seed, 32, 32, &spec);
        let b = sample_frame(seed.wrapping_add(1), 32, 32, &spec);
        let differing = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .filter(|(x, y)| x != y)
            .count();
        assert!(
            differing as f64 >= 0.99 * 1024.0,
            "seed {seed}: {differing}"
        );
    }
}

#[test]
fn adjacent_pixels_are_uncorrelated() {
    let (rows, cols) = (100, 100);
    let z: Vec<[f64; 3]> = (0..rows * cols)
        .map(|i| pixel_normals(11, i / cols, i % cols))
        .collect();
    for k in 0..3 {
        let comp: Vec<f64> = z.iter().map(|v| v[k]).collect();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut up = Vec::new();
        let mut down = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    left.push(comp[r * cols + c]);
                    right.push(comp[r * cols + c + 1]);
                }
                if r + 1 < rows {
                    up.push(comp[r * cols + c]);
                    down.push(comp[(r + 1) * cols + c]);
                }
            }
        }
        assert!(pearson(&left, &right).abs() < 0.05);
        assert!(pearson(&up, &down).abs() < 0.05);
    }
}

#[test]
fn frames_are_order_independent() {
    let spec = VariationSpec::default();
    let frame = sample_frame(5, 20, 30, &spec);
    for r in (0..20).rev() {
        for c in (0..30).rev() {
            assert_eq!(frame[(r, c)], sample_pixel(5, r, c, &spec));
        }
    }
}

#[test]
fn zero_sigma_gives_nominal_samples() {
    let spec = VariationSpec {
        thickness_rel_sigma: 0.0,
        vth_sigma: 0.0,
        ..VariationSpec::default()
    };
    assert!(sample_frame(3, 10, 10, &spec)
        .as_slice()
        .iter()
        .all(|s| *s == VariationSample::NOMINAL));
}
