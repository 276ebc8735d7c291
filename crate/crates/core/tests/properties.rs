//! Property tests for the invariants the modules promise.

use proptest::prelude::*;

use vbq_core::codec::{
    ac_decode, ac_encode, concat_decode, concat_encode, information_content, read_container,
    write_container, FrequencyTable, TableMode,
};
use vbq_core::dyadic::{neighbors_at_rate, shortest_in_interval, CodePoint};
use vbq_core::prior::PriorModel;
use vbq_core::quantizer::{optimize_dimension, GaussianPosterior, RdConfig};

fn arb_code_point() -> impl Strategy<Value = CodePoint> {
    (1u8..=16).prop_flat_map(|rate| {
        let max_n = (1u64 << rate) - 1;
        (0..=(max_n / 2)).prop_map(move |h| CodePoint::new(2 * h + 1, rate).unwrap())
    })
}

proptest! {
    #[test]
    fn code_point_bits_roundtrip(cp in arb_code_point()) {
        let bits = cp.to_bits();
        prop_assert_eq!(*bits.last().unwrap(), 1);
        prop_assert_eq!(CodePoint::from_bits(&bits).unwrap(), cp);
        prop_assert_eq!(bits.len(), cp.rate() as usize);
    }

    #[test]
    fn neighbors_bracket_target(target in 1e-9f64..1.0, r in 1u8..=40) {
        prop_assume!(target < 1.0);
        let (left, right) = neighbors_at_rate(target, r);
        let step = 1.0 / (1u64 << r) as f64;
        let lv = left.point().map(|c| c.value()).unwrap_or(0.0);
        let rv = right.point().map(|c| c.value()).unwrap_or(1.0);
        prop_assert!(lv <= target && target <= rv);
        prop_assert!(rv - lv <= step + 1e-15);
    }

    #[test]
    fn theorem_bound_on_interval_rate(lo in 0.0f64..1.0, width in 1e-12f64..1.0) {
        let hi = (lo + width).min(1.0);
        prop_assume!(lo < hi);
        let cp = shortest_in_interval(lo, hi).unwrap();
        let bound = (-(hi - lo).log2()).floor() as i64 + 1;
        prop_assert!(
            i64::from(cp.rate()) <= bound,
            "rate {} exceeds bound {} for [{}, {})", cp.rate(), bound, lo, hi
        );
        prop_assert!(cp.value() >= lo && cp.value() < hi);
    }

    #[test]
    fn prior_cdf_monotone_and_symmetric(z1 in -8.0f64..8.0, z2 in -8.0f64..8.0) {
        let p = PriorModel::StandardNormal;
        let (a, b) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        prop_assert!(p.cdf(a).unwrap() <= p.cdf(b).unwrap());
        let s = p.cdf(z1).unwrap() + p.cdf(-z1).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ac_roundtrip_and_slack(symbol_ids in prop::collection::vec(0usize..6, 1..400)) {
        let alphabet = [
            CodePoint::new(1, 1).unwrap(),
            CodePoint::new(1, 2).unwrap(),
            CodePoint::new(3, 2).unwrap(),
            CodePoint::new(5, 3).unwrap(),
            CodePoint::new(7, 3).unwrap(),
            CodePoint::new(11, 4).unwrap(),
        ];
        let symbols: Vec<CodePoint> = symbol_ids.iter().map(|&i| alphabet[i]).collect();
        let table = FrequencyTable::from_symbols(&symbols);
        let bits = ac_encode(&symbols, &table).unwrap();
        prop_assert_eq!(ac_decode(&bits, &table, symbols.len()).unwrap(), symbols.clone());
        let h = information_content(&symbols, &table).unwrap();
        prop_assert!(bits.bit_len() as f64 - h <= 32.0);
    }

    #[test]
    fn concat_roundtrip(symbol_ids in prop::collection::vec(0usize..6, 0..200)) {
        let alphabet = [
            CodePoint::new(1, 1).unwrap(),
            CodePoint::new(1, 2).unwrap(),
            CodePoint::new(3, 2).unwrap(),
            CodePoint::new(5, 3).unwrap(),
            CodePoint::new(7, 3).unwrap(),
            CodePoint::new(173, 9).unwrap(),
        ];
        let symbols: Vec<CodePoint> = symbol_ids.iter().map(|&i| alphabet[i]).collect();
        let (rate_stream, payload) = concat_encode(&symbols);
        prop_assert_eq!(concat_decode(&rate_stream, &payload, symbols.len()).unwrap(), symbols);
    }

    #[test]
    fn container_roundtrip(symbol_ids in prop::collection::vec(0usize..4, 1..120), external in any::<bool>()) {
        let alphabet = [
            CodePoint::new(1, 1).unwrap(),
            CodePoint::new(3, 2).unwrap(),
            CodePoint::new(5, 3).unwrap(),
            CodePoint::new(9, 4).unwrap(),
        ];
        let symbols: Vec<CodePoint> = symbol_ids.iter().map(|&i| alphabet[i]).collect();
        let table = FrequencyTable::from_symbols(&symbols);
        let mode = if external { TableMode::ExternalTable } else { TableMode::HeaderTable };
        let bytes = write_container(&PriorModel::StandardNormal, &symbols, &table, mode).unwrap();
        let container = read_container(&bytes).unwrap();
        let ext = external.then_some(&table);
        prop_assert_eq!(container.decode_symbols(ext).unwrap(), symbols);
        // Serialization is canonical: writing again gives identical bytes.
        let again = write_container(&PriorModel::StandardNormal, &container.decode_symbols(ext).unwrap(), &table, mode).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn lambda_monotonicity_per_dimension(
        mu in -4.0f64..4.0,
        sigma2 in 1e-4f64..4.0,
    ) {
        let prior = PriorModel::StandardNormal;
        let post = GaussianPosterior::new(mu, sigma2);
        let mut last_rate = u8::MAX;
        let mut last_dist = -1.0f64;
        for e in -10..6 {
            let lambda = (2.0f64).powi(e);
            let (cp, _) = optimize_dimension(&post, &prior, &RdConfig::new(lambda)).unwrap();
            let z = prior.quantile(cp.value()).unwrap();
            let dist = (z - mu) * (z - mu);
            prop_assert!(cp.rate() <= last_rate, "rate must not increase with lambda");
            prop_assert!(dist >= last_dist - 1e-15, "distortion must not decrease");
            last_rate = cp.rate();
            last_dist = dist;
        }
    }

    #[test]
    fn rate_nonincreasing_in_sigma2(mu in -4.0f64..4.0, lambda in 1e-3f64..10.0) {
        let prior = PriorModel::StandardNormal;
        let mut last_rate = u8::MAX;
        for e in 0..8 {
            let sigma2 = 1e-4 * (4.0f64).powi(e);
            let post = GaussianPosterior::new(mu, sigma2);
            let (cp, _) = optimize_dimension(&post, &prior, &RdConfig::new(lambda)).unwrap();
            prop_assert!(cp.rate() <= last_rate);
            last_rate = cp.rate();
        }
    }

    #[test]
    fn search_respects_rate_cap(
        mu in -4.0f64..4.0,
        sigma2 in 1e-6f64..4.0,
        lambda in 1e-6f64..1e3,
    ) {
        let prior = PriorModel::StandardNormal;
        let post = GaussianPosterior::new(mu, sigma2);
        let (cp, diag) = optimize_dimension(&post, &prior, &RdConfig::new(lambda)).unwrap();
        prop_assert!(diag.terminal_r <= RdConfig::DEFAULT_RATE_CAP);
        prop_assert!(cp.rate() <= RdConfig::DEFAULT_RATE_CAP);
    }
}
