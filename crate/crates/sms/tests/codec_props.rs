//! Property tests for the three spike codecs.

use proptest::prelude::*;
use sms::spike_codec::{
    decode, decode_float32, decode_rate, encode, encode_float32, encode_rate, EncoderKind,
    NormRange, RangeSet,
};

fn range_strategy() -> impl Strategy<Value = NormRange> {
    (-1e3f64..1e3, 1e-6f64..1e3).prop_map(|(lo, span)| NormRange::new(lo, lo + span).unwrap())
}

fn values_in(r: NormRange, n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(r.lo..=r.hi, 1..=n)
}

proptest! {
    #[test]
    fn all_encoders_emit_binary_trains(
        r in range_strategy(),
        steps in 1usize..64,
        seed in 0u64..1000,
        frac in proptest::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let vals: Vec<f64> = frac.iter().map(|f| r.lo + f * r.span()).collect();
        let rs = RangeSet::Shared(r);
        for kind in [EncoderKind::LowerTriangular, EncoderKind::Rate { seed }, EncoderKind::Float32] {
            let t = encode(&vals, kind, &rs, steps);
            prop_assert!(t.is_binary());
        }
    }

    #[test]
    fn lower_triangular_quantization_bound(
        r in range_strategy(),
        steps in 1usize..200,
        frac in proptest::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let vals: Vec<f64> = frac.iter().map(|f| r.lo + f * r.span()).collect();
        let rs = RangeSet::Shared(r);
        let t = encode(&vals, EncoderKind::LowerTriangular, &rs, steps);
        let back = decode(&t, EncoderKind::LowerTriangular, &rs);
        let bound = r.span() / (2.0 * steps as f64) + 1e-9 * r.span();
        for (v, b) in vals.iter().zip(&back) {
            prop_assert!((v - b).abs() <= bound, "v={v} b={b} bound={bound}");
        }
    }

    #[test]
    fn lower_triangular_deterministic(
        r in range_strategy(),
        steps in 1usize..64,
        frac in proptest::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let vals: Vec<f64> = frac.iter().map(|f| r.lo + f * r.span()).collect();
        let rs = RangeSet::Shared(r);
        let a = encode(&vals, EncoderKind::LowerTriangular, &rs, steps);
        let b = encode(&vals, EncoderKind::LowerTriangular, &rs, steps);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rate_same_seed_same_train(
        seed in 0u64..10_000,
        steps in 1usize..64,
        frac in proptest::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let rs = RangeSet::Shared(NormRange::new(0.0, 1.0).unwrap());
        let a = encode_rate(&frac, &rs, steps, seed);
        let b = encode_rate(&frac, &rs, steps, seed);
        prop_assert_eq!(a, b);
    }
}

/// Bit-exact float32 round trip over 1e5 random bit patterns (finite ones;
/// NaN payloads are not required to survive an f32 -> f64 -> f32 trip).
#[test]
fn float32_bit_exact_on_random_patterns() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0usize;
    while checked < 100_000 {
        let bits: u32 = rng.gen();
        let v = f32::from_bits(bits);
        if !v.is_finite() {
            continue;
        }
        let t = encode_float32(&[v as f64]);
        let back = decode_float32(&t);
        assert_eq!((back[0] as f32).to_bits(), bits, "bits={bits:08x}");
        checked += 1;
    }
}

/// The decoded rate-coded value is an unbiased estimator of the input:
/// the mean spike count over 100 seeds stays within 3 binomial standard
/// errors of #T * p.
#[test]
fn rate_unbiased_within_three_sigma() {
    let rs = RangeSet::Shared(NormRange::new(0.0, 1.0).unwrap());
    let steps = 64usize;
    let n_seeds = 100usize;
    for &p in &[0.1, 0.25, 0.5, 0.7, 0.9] {
        let mut total_ones = 0usize;
        for seed in 0..n_seeds as u64 {
            let t = encode_rate(&[p], &rs, steps, seed);
            total_ones += t.ones_in_channel(0);
        }
        let n = (steps * n_seeds) as f64;
        let mean = total_ones as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!(
            (mean - p).abs() <= 3.0 * sigma,
            "p={p} mean={mean} sigma={sigma}"
        );
        // And decode averages back to the same estimate.
        let dec: f64 = (0..n_seeds as u64)
            .map(|s| decode_rate(&encode_rate(&[p], &rs, steps, s), &rs)[0])
            .sum::<f64>()
            / n_seeds as f64;
        assert!((dec - mean).abs() < 1e-12);
    }
}
