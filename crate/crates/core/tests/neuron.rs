use proptest::prelude::*;
use spiketfhe_core::bootstrap::keygen;
use spiketfhe_core::lwe::{lwe_decrypt_with, lwe_encrypt_with};
use spiketfhe_core::neuron::{lif_step_plain, BootstrapCounter, LifParams, NeuronCircuit, Tau};
use spiketfhe_core::random::rng_from_seed;
use spiketfhe_core::FheParams;

#[test]
fn exhaustive_oracle_equivalence_at_toy() {
    let params = FheParams::toy();
    let p = params.plaintext_modulus;
    let half = (p / 2) as i64;
    let (lwe, _, bsk) = keygen(&params, 3).unwrap();
    let mut rng = rng_from_seed(4);
    let mut buf = bsk.buffers();
    let counter = BootstrapCounter::new();
    let mut steps = 0u64;
    for (tau, theta) in [(Tau::Finite(2), 10), (Tau::Finite(3), 5), (Tau::Finite(4), 5), (Tau::Infinite, 20)] {
        let lif = LifParams::new(tau, theta).unwrap();
        let circuit = NeuronCircuit::new(lif, p, p, &bsk).unwrap();
        for v in 0..=lif.max_post_reset() {
            for h in lif.v_th_hat - half..half {
                let i = h - v;
                let ct_v = lwe_encrypt_with(&lwe, v, p, params.noise_std, &mut rng).unwrap();
                let ct_i = lwe_encrypt_with(&lwe, i, p, params.noise_std, &mut rng).unwrap();
                let (s, v_new) = circuit.step(&ct_v, &ct_i, &bsk, &mut buf, &counter).unwrap();
                let spike = lwe_decrypt_with(&lwe, &s, p);
                assert!(spike == 0 || spike == 2, "spike {spike}");
                assert_eq!((spike, lwe_decrypt_with(&lwe, &v_new, p)), lif_step_plain(v, i, &lif), "{tau} {theta} v={v} i={i}");
                steps += 1;
            }
        }
    }
    assert_eq!(counter.get(), 2 * steps);
}

#[test]
fn threshold_must_fit_the_message_space() {
    let params = FheParams::toy();
    let (_, _, bsk) = keygen(&params, 1).unwrap();
    let lif = LifParams::new(Tau::Finite(4), 8).unwrap();
    assert!(NeuronCircuit::new(lif, 64, 64, &bsk).is_err());
}

fn tau_strategy() -> impl Strategy<Value = Tau> {
    prop_oneof![(2u32..16).prop_map(Tau::Finite), Just(Tau::Infinite)]
}

proptest! {
    #[test]
    fn post_reset_range(tau in tau_strategy(), theta in 1i64..200, v in 0i64..10_000, i in -20_000i64..20_000) {
        let lif = LifParams::new(tau, theta).unwrap();
        let v = v % (lif.max_post_reset() + 1);
        let (s, v_new) = lif_step_plain(v, i, &lif);
        prop_assert!(s == 0 || s == 2);
        prop_assert!((0..=lif.max_post_reset()).contains(&v_new));
        let bound = match tau {
            Tau::Finite(t) => ((t as f64 - 1.0) / t as f64 * (lif.v_th_hat - 1) as f64).round() as i64,
            Tau::Infinite => lif.v_th_hat - 1,
        };
        prop_assert_eq!(lif.max_post_reset(), bound);
    }

    #[test]
    fn if_mode_integrates_without_leak(theta in 1i64..200, v in 0i64..200, i in -400i64..400) {
        let lif = LifParams::new(Tau::Infinite, theta).unwrap();
        let v = v % theta;
        let h = v + i;
        let expected = if h >= theta { (2, 0) } else if h >= 0 { (0, h) } else { (0, 0) };
        prop_assert_eq!(lif_step_plain(v, i, &lif), expected);
    }

    #[test]
    fn leak_matches_float_dynamics(tau in 2u32..16, h in 0i64..100_000) {
        let lif = LifParams::new(Tau::Finite(tau), 1).unwrap();
        let exact = h as f64 * (tau as f64 - 1.0) / tau as f64;
        prop_assert!((lif.leak(h) as f64 - exact).abs() <= 0.5);
    }
}
