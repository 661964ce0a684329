use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use depthopt_core::allowable::{exhaustive_interval, shifted_interval, zero_error_interval};
use depthopt_core::cost::{group_cost, group_distortion, group_rate};
use depthopt_core::optimizer::{brute_force, dp_optimize};
use depthopt_core::{AllowableInterval, CameraConfig, DepthLevel, PixelTables, ProbabilityTable};

const POOL: usize = 16;

fn pool() -> &'static [CameraConfig] {
    static CONFIGS: OnceLock<Vec<CameraConfig>> = OnceLock::new();
    CONFIGS.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        (0..POOL)
            .map(|_| {
                let zn = rng.random_range(0.02..1.0);
                let n = [1u32, 2, 4][rng.random_range(0..3)];
                let o = rng.random_bool(0.5).then(|| rng.random_range(0.05..=1.0) / f64::from(n));
                CameraConfig::new(
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.5..2.0),
                    zn,
                    zn * rng.random_range(2.0..50.0),
                    n,
                    o,
                )
                .unwrap()
            })
            .collect()
    })
}

fn config() -> impl Strategy<Value = &'static CameraConfig> {
    (0..POOL).prop_map(|i| &pool()[i])
}

fn level_and_error() -> impl Strategy<Value = (u8, i32)> {
    (0u8..=255).prop_flat_map(|v| {
        let v32 = i32::from(v);
        (Just(v), (-16i32).max(-v32)..=16i32.min(255 - v32))
    })
}

fn pixel() -> impl Strategy<Value = PixelTables> {
    (1i32..=5).prop_flat_map(|m| {
        (
            0..m,
            0..m,
            prop::collection::vec(0.0f64..16.0, m as usize),
            prop::collection::vec(0.0f64..8.0, m as usize),
        )
            .prop_map(move |(shift, k, d, r)| {
                let c = AllowableInterval::new(-shift, m - 1 - shift).unwrap();
                PixelTables::new(100, k - shift, c, ProbabilityTable::uniform(c), d, r).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn shifted_matches_scan(cfg in config(), (v, dv_k) in level_and_error()) {
        let v = DepthLevel::from(v);
        let fast = shifted_interval(v, dv_k, cfg).unwrap();
        prop_assert_eq!(fast, exhaustive_interval(v, dv_k, cfg).unwrap());
        prop_assert!(fast.contains(dv_k));
        let e = cfg.disparity_error(v, dv_k).unwrap();
        for dv in fast.iter() {
            prop_assert_eq!(cfg.disparity_error(v, dv).unwrap(), e);
        }
    }

    #[test]
    fn zero_interval_nests(cfg in config(), v in 0u8..=255) {
        let v = DepthLevel::from(v);
        let z = zero_error_interval(v, cfg);
        prop_assert_eq!(z, shifted_interval(v, 0, cfg).unwrap());
        prop_assert!(z.contains(0));
        prop_assert!(v.value() + z.lo() >= 0 && v.value() + z.hi() <= 255);
    }

    #[test]
    fn members_round_alike(cfg in config(), (v, dv_k) in level_and_error()) {
        let v = DepthLevel::from(v);
        let want = cfg.rounded_disparity(v.offset(dv_k).unwrap());
        for dv in shifted_interval(v, dv_k, cfg).unwrap().iter() {
            prop_assert_eq!(cfg.rounded_disparity(v.offset(dv).unwrap()), want);
        }
    }

    #[test]
    fn dp_matches_brute_force_uniform(group in prop::collection::vec(pixel(), 1..=4), lambda in 0.0f64..10.0) {
        let dp = dp_optimize(&group, lambda).unwrap();
        let bf = brute_force(&group, lambda).unwrap();
        prop_assert!((dp.true_cost - bf.true_cost).abs() <= 1e-9 * bf.true_cost.abs().max(1.0));
        prop_assert!((dp.recursion_cost - dp.true_cost).abs() <= 1e-9 * dp.true_cost.abs().max(1.0));
    }

    #[test]
    fn cost_splits_into_distortion_and_rate(group in prop::collection::vec(pixel(), 1..=4), lambda in 0.0f64..10.0) {
        let dv: Vec<i32> = group.iter().map(|t| t.dv_k).collect();
        let whole = group_cost(&group, &dv, lambda);
        let parts = group_distortion(&group, &dv) + lambda * group_rate(&group, &dv);
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0));
    }
}
