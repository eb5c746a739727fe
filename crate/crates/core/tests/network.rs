use proptest::prelude::*;
use rand_core::RngCore;
use spiketfhe_core::analysis::{bootstrap_count, probe_plain, select_moduli};
use spiketfhe_core::discretize::{discretize_model, DiscreteModel};
use spiketfhe_core::model::{ConvSpec, FcSpec, LayerSpec, Model, NetworkSpec, PoolSpec, Shape};
use spiketfhe_core::network::encrypted::{encrypt_image, forward_encrypted, network_keygen, Sequential};
use spiketfhe_core::network::{classify, forward_plain};
use spiketfhe_core::neuron::{BootstrapCounter, Tau};
use spiketfhe_core::random::rng_from_seed;
use spiketfhe_core::FheParams;

fn tiny_spec(timesteps: usize, tau: Tau) -> NetworkSpec {
    NetworkSpec {
        input_shape: Shape::new(1, 6, 6),
        layers: vec![
            LayerSpec::Conv(ConvSpec { in_channels: 1, out_channels: 2, kernel: 3, stride: 1, padding: 1 }),
            LayerSpec::Spiking,
            LayerSpec::AvgPoolSum(PoolSpec { kernel: 2, stride: 2 }),
            LayerSpec::Flatten,
            LayerSpec::Fc(FcSpec { inputs: 18, outputs: 8 }),
            LayerSpec::Spiking,
            LayerSpec::Fc(FcSpec { inputs: 8, outputs: 3 }),
            LayerSpec::Spiking,
        ],
        timesteps,
        tau,
    }
}

fn random_model(spec: NetworkSpec, theta: i64, seed: u64) -> DiscreteModel {
    let mut rng = rng_from_seed(seed);
    let weights = spec
        .layers
        .iter()
        .map(|l| (0..l.weight_count()).map(|_| (rng.next_u32() % 2001) as f64 / 1000.0 - 0.8).collect())
        .collect();
    discretize_model(&Model::new(spec, weights).unwrap(), theta).unwrap()
}

fn random_images(count: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| (0..36).map(|_| (rng.next_u32() & 1) as u8).collect()).collect()
}

#[test]
fn encrypted_matches_plain_oracle() {
    for (tau, seed) in [(Tau::Finite(2), 1), (Tau::Finite(4), 2), (Tau::Infinite, 3)] {
        let model = random_model(tiny_spec(3, tau), 4, seed);
        let images = random_images(40, seed + 10);
        let audit = probe_plain(&model, &images).unwrap();
        let moduli = select_moduli(&audit, model.lif.v_th_hat, model.spec().timesteps, 1.0);
        for (a, &p) in audit.layers.iter().zip(&moduli) {
            let half = (p / 2) as i64;
            assert!(a.max_h < half && a.min_h >= model.lif.v_th_hat - half);
        }
        let params: Vec<_> = moduli.iter().map(|&p| FheParams::desk(p).unwrap()).collect();
        let (client, server, _) = network_keygen(&params, seed).unwrap();
        let mut rng = rng_from_seed(seed + 20);
        let counter = BootstrapCounter::new();
        for image in images.iter().take(4) {
            let ct = encrypt_image(&client, image, model.spec().input_shape, &mut rng).unwrap();
            let scores = client.decrypt_scores(&forward_encrypted(&model, &server, &ct, &Sequential, &counter).unwrap());
            let (expected, _) = forward_plain(&model, image).unwrap();
            assert_eq!(scores, expected, "{tau}");
            assert_eq!(classify(&scores), classify(&expected));
        }
        assert_eq!(counter.get(), 4 * bootstrap_count(model.spec()).unwrap());
    }
}

#[test]
fn zero_timesteps_give_zero_scores() {
    let model = random_model(tiny_spec(0, Tau::Finite(2)), 4, 5);
    let params = vec![FheParams::desk(64).unwrap(); 3];
    let (client, server, _) = network_keygen(&params, 5).unwrap();
    let ct = encrypt_image(&client, &random_images(1, 0)[0], model.spec().input_shape, &mut rng_from_seed(0)).unwrap();
    let counter = BootstrapCounter::new();
    let scores = client.decrypt_scores(&forward_encrypted(&model, &server, &ct, &Sequential, &counter).unwrap());
    assert_eq!(scores, vec![0; 3]);
    assert_eq!(classify(&scores), 0);
    assert_eq!(counter.get(), 0);
}

#[test]
fn keygen_is_deterministic() {
    let params = vec![FheParams::desk(64).unwrap(), FheParams::desk(128).unwrap(), FheParams::desk(64).unwrap()];
    let (a, sa, _) = network_keygen(&params, 9).unwrap();
    let (b, sb, _) = network_keygen(&params, 9).unwrap();
    let (c, _, _) = network_keygen(&params, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.lwe, c.lwe);
    assert_eq!(sa.moduli(), vec![64, 128, 64]);
    assert_eq!(sa.moduli(), sb.moduli());
}

#[test]
fn mismatched_key_layers_are_rejected() {
    let model = random_model(tiny_spec(1, Tau::Finite(2)), 4, 6);
    let (client, server, _) = network_keygen(&[FheParams::desk(64).unwrap(); 2], 6).unwrap();
    let ct = encrypt_image(&client, &random_images(1, 0)[0], model.spec().input_shape, &mut rng_from_seed(0)).unwrap();
    assert!(forward_encrypted(&model, &server, &ct, &Sequential, &BootstrapCounter::new()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selected_moduli_hold_the_audit(seed in 0u64..1000, theta in 1i64..12, t in 1usize..5, margin in 1.0f64..1.5) {
        let model = random_model(tiny_spec(t, Tau::Finite(3)), theta, seed);
        let audit = probe_plain(&model, &random_images(8, seed)).unwrap();
        let moduli = select_moduli(&audit, model.lif.v_th_hat, t, margin);
        prop_assert!(moduli.iter().all(|p| p.is_power_of_two()));
        prop_assert_eq!(audit.first_violation(model.lif.v_th_hat, &moduli), None);
        prop_assert!((moduli[2] / 2) as i64 > 2 * t as i64);
    }

    #[test]
    fn plain_scores_are_even_and_bounded(seed in 0u64..1000, t in 0usize..6) {
        let model = random_model(tiny_spec(t, Tau::Infinite), 3, seed);
        let (scores, _) = forward_plain(&model, &random_images(1, seed)[0]).unwrap();
        prop_assert!(scores.iter().all(|&s| s % 2 == 0 && (0..=2 * t as i64).contains(&s)));
    }
}
