use proptest::prelude::*;
use securepix::codec::netpbm::{decode, encode};
use securepix::codec::{Channels, ImageFrame, KeyFile};
use securepix::config::{RunConfig, KEYS};
use securepix::Error;

fn image_strategy() -> impl Strategy<Value = ImageFrame> {
    (1usize..20, 1usize..20, any::<bool>()).prop_flat_map(|(r, c, rgb)| {
        let ch = if rgb { Channels::Rgb } else { Channels::Gray };
        prop::collection::vec(any::<u8>(), r * c * ch.count())
            .prop_map(move |data| ImageFrame::new(r, c, ch, data).unwrap())
    })
}

proptest! {
    #[test]
    fn netpbm_round_trips(img in image_strategy(), comments in prop::collection::vec("[ -~]{0,30}", 0..4)) {
        let d = decode(&encode(&img, &comments)).unwrap();
        prop_assert_eq!(d.image, img);
        let trimmed: Vec<String> = comments.iter().map(|c| c.trim().to_string()).collect();
        prop_assert_eq!(d.comments, trimmed);
    }

    #[test]
    fn netpbm_decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = decode(&bytes);
        let mut prefixed = b"P5\n".to_vec();
        prefixed.extend(bytes);
        let _ = decode(&prefixed);
    }

    #[test]
    fn key_files_round_trip(rows in 1usize..20, cols in 1usize..20, levels in 2u32..64, seed in any::<u64>(), keep_seed in any::<bool>(),
                            lo in 0.5f64..2.0, span in 0.1f64..2.0) {
        let mut k = KeyFile::generate(rows, cols, levels, lo, lo + span, seed).unwrap();
        if !keep_seed {
            k.seed = None;
        }
        prop_assert_eq!(KeyFile::parse(&k.serialize()).unwrap(), k);
    }

    #[test]
    fn key_parse_never_panics(text in "[0-9a-zA-Z \\-.\n]{0,80}") {
        let _ = KeyFile::parse(&text);
        let _ = KeyFile::parse(&format!("SECUREPIX-KEY 1\n{text}"));
    }

    #[test]
    fn configs_round_trip(kappa in 0.0f64..0.46, mu in 1.5f64..2.1, vtp in 0.1f64..0.5, enabled in any::<bool>(), sigma in 0.0f64..0.1) {
        let mut cfg = RunConfig { half_select_kappa: kappa, ..RunConfig::default() };
        cfg.pixel.fe.mu_c = mu;
        cfg.pixel.v_tp = vtp;
        cfg.variation.enabled = enabled;
        cfg.variation.thickness_rel_sigma = sigma;
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        prop_assert_eq!(again.hash(), cfg.hash());
        prop_assert_eq!(again, cfg);
    }

    #[test]
    fn config_parse_never_panics(text in "[a-z_.=0-9# \n]{0,80}") {
        let _ = RunConfig::parse(&text);
    }
}

#[test]
fn every_key_is_settable() {
    let defaults = RunConfig::default();
    for key in KEYS {
        let mut cfg = RunConfig::default();
        let value = defaults.get(key).unwrap();
        cfg.apply_assignment(&format!("{key}={value}")).unwrap();
        assert_eq!(cfg, defaults, "{key}");
    }
}

#[test]
fn key_with_single_level_is_rejected_by_generate() {
    assert!(matches!(
        KeyFile::generate(4, 4, 1, 1.3, 2.8, 0),
        Err(Error::InvalidParams(_))
    ));
}
