use proptest::prelude::*;
use spiketfhe_core::encoding::canonical;
use spiketfhe_core::lwe::{lwe_decrypt, lwe_decrypt_with, lwe_encrypt, lwe_encrypt_with, lwe_linear, LweCiphertext, LweSecretKey};
use spiketfhe_core::random::rng_from_seed;
use spiketfhe_core::FheParams;

#[test]
fn round_trip_exhaustive_toy() {
    let params = FheParams::toy();
    let p = params.plaintext_modulus as i64;
    for seed in 0..4 {
        let mut rng = rng_from_seed(seed);
        let key = LweSecretKey::generate(params.lwe_dimension, &mut rng);
        for m in -p / 2 + 1..=p / 2 {
            let ct = lwe_encrypt(&key, m, &params, &mut rng).unwrap();
            assert_eq!(lwe_decrypt(&key, &ct, &params), m);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn round_trip_sampled_paper_modulus(seed in any::<u64>(), m in -8191i64..=8192) {
        let params = FheParams::paper();
        let mut rng = rng_from_seed(seed);
        let key = LweSecretKey::generate(params.lwe_dimension, &mut rng);
        let ct = lwe_encrypt(&key, m, &params, &mut rng).unwrap();
        prop_assert_eq!(lwe_decrypt(&key, &ct, &params), m);
    }

    #[test]
    fn linear_combination_decrypts_to_weighted_sum(
        seed in any::<u64>(),
        terms in prop::collection::vec((-100i64..100, -50i64..50), 1..40),
    ) {
        let p = 1u64 << 14;
        let mut rng = rng_from_seed(seed);
        let key = LweSecretKey::generate(64, &mut rng);
        let std = 2f64.powi(-40);
        let cts: Vec<LweCiphertext> = terms
            .iter()
            .map(|&(m, _)| lwe_encrypt_with(&key, m, p, std, &mut rng).unwrap())
            .collect();
        let refs: Vec<&LweCiphertext> = cts.iter().collect();
        let weights: Vec<i64> = terms.iter().map(|&(_, w)| w).collect();
        let sum = lwe_linear(&refs, &weights).unwrap();
        let expected: i64 = terms.iter().map(|&(m, w)| m * w).sum();
        prop_assert_eq!(lwe_decrypt_with(&key, &sum, p), canonical(expected, p));
    }
}

#[test]
fn linear_rejects_bad_input() {
    let a = LweCiphertext::zero(4);
    let b = LweCiphertext::zero(5);
    assert!(lwe_linear(&[], &[]).is_err());
    assert!(lwe_linear(&[&a, &b], &[1, 1]).is_err());
    assert!(lwe_linear(&[&a], &[1, 2]).is_err());
}
