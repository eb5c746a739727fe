use proptest::prelude::*;
use spiketfhe::core::lwe::{LweCiphertext, LweSecretKey};
use spiketfhe::core::model::{NetworkSpec, Shape};
use spiketfhe::core::network::encrypted::CipherTensor;
use spiketfhe::core::neuron::Tau;
use spiketfhe::core::FheParams;
use spiketfhe::formats::binary::{self, Kind};
use spiketfhe::formats::exchange::{TensorJson, WeightExchangeFile};
use spiketfhe::formats::idx::{images_to_bytes, labels_to_bytes, parse_images, parse_labels, IdxImages};

fn ct_strategy(dim: usize) -> impl Strategy<Value = LweCiphertext> {
    (prop::collection::vec(any::<u64>(), dim), any::<u64>()).prop_map(|(a, b)| LweCiphertext { a, b })
}

proptest! {
    #[test]
    fn lwe_key_round_trip(bits in prop::collection::vec(0u64..2, 1..300)) {
        let params = FheParams::toy();
        let key = LweSecretKey { coeffs: bits };
        let bytes = binary::lwe_secret_key_to_bytes(&key, &params);
        prop_assert_eq!(binary::peek_kind(&bytes).unwrap(), Kind::LweSecretKey);
        prop_assert_eq!(binary::lwe_secret_key_from_bytes(&bytes).unwrap(), (params, key));
    }

    #[test]
    fn ciphertext_list_round_trip(cts in prop::collection::vec(ct_strategy(8), 0..20)) {
        let params = FheParams::desk(256).unwrap();
        let bytes = binary::ciphertexts_to_bytes(&cts, &params);
        prop_assert_eq!(binary::ciphertexts_from_bytes(&bytes).unwrap(), (params, cts));
    }

    #[test]
    fn cipher_tensor_round_trip(c in 1usize..3, h in 1usize..4, w in 1usize..4, seed in any::<u64>()) {
        let params = FheParams::toy();
        let data = (0..c * h * w)
            .map(|i| LweCiphertext { a: vec![seed ^ i as u64; 32], b: seed.rotate_left(i as u32) })
            .collect();
        let t = CipherTensor::new(Shape::new(c, h, w), data).unwrap();
        let (p, back) = binary::cipher_tensor_from_bytes(&binary::cipher_tensor_to_bytes(&t, &params)).unwrap();
        prop_assert_eq!(p, params);
        prop_assert_eq!(back.shape, t.shape);
        prop_assert_eq!(back.data, t.data);
    }

    #[test]
    fn random_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = binary::peek_kind(&bytes);
        let _ = binary::lwe_secret_key_from_bytes(&bytes);
        let _ = binary::ciphertexts_from_bytes(&bytes);
        let _ = binary::cipher_tensor_from_bytes(&bytes);
        let _ = binary::client_key_from_bytes(&bytes);
        let _ = binary::server_key_from_bytes(&bytes);
        let _ = binary::bootstrap_key_from_bytes(&bytes);
        let _ = parse_images(&bytes);
        let _ = parse_labels(&bytes);
    }

    #[test]
    fn corrupted_header_bytes_never_panic(ct in ct_strategy(8), at in 0usize..64, byte in any::<u8>()) {
        let params = FheParams::desk(64).unwrap();
        let mut bytes = binary::lwe_ciphertext_to_bytes(&ct, &params);
        let at = at % bytes.len();
        bytes[at] = byte;
        let _ = binary::lwe_ciphertext_from_bytes(&bytes);
        bytes.truncate(at);
        prop_assert!(binary::lwe_ciphertext_from_bytes(&bytes).is_err());
    }

    #[test]
    fn base64_tensor_round_trip(values in prop::collection::vec(-1e6f64..1e6, 0..64)) {
        let t = TensorJson::from_f64(vec![values.len()], &values);
        let json = serde_json::to_string(&t).unwrap();
        let back: TensorJson = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.to_f64().unwrap(), values);
    }

    #[test]
    fn idx_round_trip(rows in 1usize..6, cols in 1usize..6, count in 0usize..5, seed in any::<u8>()) {
        let images: Vec<Vec<u8>> = (0..count).map(|i| (0..rows * cols).map(|j| seed.wrapping_add((i * 31 + j) as u8)).collect()).collect();
        let labels: Vec<u8> = (0..count as u8).collect();
        let data = IdxImages { rows, cols, images };
        prop_assert_eq!(parse_images(&images_to_bytes(&data)).unwrap(), data);
        prop_assert_eq!(parse_labels(&labels_to_bytes(&labels)).unwrap(), labels);
    }
}

#[test]
fn nested_tensor_must_match_shape() {
    let t: TensorJson = serde_json::from_str(r#"{"shape": [2, 2], "data": [[1, 2], [3, 4]]}"#).unwrap();
    assert_eq!(t.to_f64().unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    let bad: TensorJson = serde_json::from_str(r#"{"shape": [2, 3], "data": [[1, 2], [3, 4]]}"#).unwrap();
    assert!(bad.to_f64().is_err());
    let unknown: TensorJson = serde_json::from_str(r#"{"shape": [1], "encoding": "npy", "data": "x"}"#).unwrap();
    assert!(unknown.to_f64().is_err());
}

#[test]
fn exchange_file_round_trips_through_json() {
    let spec = NetworkSpec::default_architecture(4, Tau::Infinite);
    let weights = spec.layers.iter().map(|l| (0..l.weight_count()).map(|i| (i % 17) as f64 * 0.01 - 0.08).collect()).collect();
    let model = spiketfhe::core::model::Model::new(spec, weights).unwrap();
    let file = WeightExchangeFile::from_model(&model, Default::default());
    let json = serde_json::to_string(&file).unwrap();
    assert!(json.contains(r#""tau":"inf""#));
    let back: WeightExchangeFile = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_model().unwrap(), model);
}

#[test]
fn exchange_file_rejects_other_neuron_constants() {
    let spec = NetworkSpec::default_architecture(1, Tau::Finite(2));
    let weights = spec.layers.iter().map(|l| vec![0.0; l.weight_count()]).collect();
    let model = spiketfhe::core::model::Model::new(spec, weights).unwrap();
    let mut file = WeightExchangeFile::from_model(&model, Default::default());
    file.v_th = 0.5;
    assert!(file.to_model().is_err());
    file.v_th = 1.0;
    file.format_version = 2;
    assert!(file.to_model().is_err());
}
