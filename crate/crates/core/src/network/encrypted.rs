//! Encrypted forward pass. Every spiking layer has its own message modulus
//! and bootstrap key; all keys share one LWE secret.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::bootstrap::{keygen_for, BootstrapKey};
use crate::discretize::DiscreteModel;
use crate::encoding::{decode, encode};
use crate::error::{Error, Result};
use crate::lwe::{lwe_decrypt_with, lwe_encrypt_with, lwe_phase, LweCiphertext, LweSecretKey};
use crate::model::{LayerSpec, Shape};
use crate::network::ops::{avgpool_sum, conv2d, fully_connected};
use crate::neuron::{BootstrapCounter, NeuronCircuit};
use crate::params::FheParams;
use crate::random::{fork, rng_from_seed};
use crate::rlwe::RingSecretKey;

/// A shaped tensor of LWE ciphertexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherTensor {
    pub shape: Shape,
    pub data: Vec<LweCiphertext>,
}

impl CipherTensor {
    pub fn new(shape: Shape, data: Vec<LweCiphertext>) -> Result<Self> {
        if data.len() != shape.numel() {
            return Err(Error::DimensionMismatch { expected: shape.numel(), found: data.len() });
        }
        Ok(CipherTensor { shape, data })
    }
}

/// Runs independent per-item work, possibly in parallel. `init` builds one
/// scratch value per worker. Output order matches input order.
pub trait Executor: Sync {
    fn workers(&self) -> usize;

    fn map_init<T, R, S, I, F>(&self, items: &[T], init: I, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &T) -> R + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn workers(&self) -> usize {
        1
    }

    fn map_init<T, R, S, I, F>(&self, items: &[T], init: I, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &T) -> R + Sync + Send,
    {
        let mut scratch = init();
        items.iter().map(|t| f(&mut scratch, t)).collect()
    }
}

/// The client's secret: the LWE key and the message modulus of every
/// spiking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientKey {
    pub lwe: LweSecretKey,
    pub moduli: Vec<u64>,
    pub noise_std: f64,
}

impl ClientKey {
    pub fn input_modulus(&self) -> u64 {
        self.moduli[0]
    }

    pub fn output_modulus(&self) -> u64 {
        *self.moduli.last().expect("at least one layer")
    }

    pub fn decrypt_scores(&self, scores: &[LweCiphertext]) -> Vec<i64> {
        let p = self.output_modulus();
        scores.iter().map(|ct| lwe_decrypt_with(&self.lwe, ct, p)).collect()
    }

    /// Signed phase error of `ct` against `m` under modulus `p`.
    pub fn phase_error(&self, ct: &LweCiphertext, m: i64, p: u64) -> i64 {
        lwe_phase(&self.lwe, ct).wrapping_sub(encode(m, p)) as i64
    }

    pub fn decrypt(&self, ct: &LweCiphertext, p: u64) -> i64 {
        decode(lwe_phase(&self.lwe, ct), p)
    }
}

/// Public evaluation keys: distinct bootstrap keys plus the key index used
/// by each spiking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerKey {
    pub keys: Vec<BootstrapKey>,
    pub layer_key: Vec<usize>,
}

impl ServerKey {
    pub fn layer(&self, l: usize) -> &BootstrapKey {
        &self.keys[self.layer_key[l]]
    }

    pub fn layers(&self) -> usize {
        self.layer_key.len()
    }

    pub fn moduli(&self) -> Vec<u64> {
        (0..self.layers()).map(|l| self.layer(l).params.plaintext_modulus).collect()
    }

    pub fn lwe_dimension(&self) -> usize {
        self.keys[0].lwe_dimension()
    }
}

/// Keys for a network whose spiking layer `l` runs under `layer_params[l]`.
/// Layers with identical parameters share a bootstrap key.
pub fn network_keygen(layer_params: &[FheParams], seed: u64) -> Result<(ClientKey, ServerKey, Vec<RingSecretKey>)> {
    let first = layer_params.first().ok_or(Error::EmptyInput)?;
    for p in layer_params {
        p.validate()?;
        if p.lwe_dimension != first.lwe_dimension || p.noise_std != first.noise_std {
            return Err(Error::InvalidParams("all layers must share the LWE dimension and noise".into()));
        }
    }
    let mut rng = rng_from_seed(seed);
    let lwe = LweSecretKey::generate(first.lwe_dimension, &mut rng);
    let mut distinct: Vec<FheParams> = Vec::new();
    let mut layer_key = Vec::with_capacity(layer_params.len());
    for p in layer_params {
        match distinct.iter().position(|d| d == p) {
            Some(i) => layer_key.push(i),
            None => {
                layer_key.push(distinct.len());
                distinct.push(*p);
            }
        }
    }
    let mut keys = Vec::with_capacity(distinct.len());
    let mut ring_keys = Vec::with_capacity(distinct.len());
    for p in &distinct {
        let mut child = fork(&mut rng);
        let (ring, bsk) = keygen_for(p, &lwe, &mut child)?;
        keys.push(bsk);
        ring_keys.push(ring);
    }
    let client = ClientKey {
        lwe,
        moduli: layer_params.iter().map(|p| p.plaintext_modulus).collect(),
        noise_std: first.noise_std,
    };
    Ok((client, ServerKey { keys, layer_key }, ring_keys))
}

/// Encrypt a binary image under the first layer's modulus.
pub fn encrypt_image(client: &ClientKey, image: &[u8], shape: Shape, rng: &mut impl RngCore) -> Result<CipherTensor> {
    let p = client.input_modulus();
    let data = image
        .iter()
        .map(|&x| {
            if x > 1 {
                return Err(Error::Shape("input image must be binary".into()));
            }
            lwe_encrypt_with(&client.lwe, x as i64, p, client.noise_std, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    CipherTensor::new(shape, data)
}

fn mac(acc: &mut LweCiphertext, x: &LweCiphertext, w: i64) {
    if w != 0 {
        acc.add_scaled_assign(x, w);
    }
}

/// Evaluate `model` on an encrypted image over `T` timesteps, reusing the
/// same input each step. Returns the encrypted score vector.
pub fn forward_encrypted<E: Executor>(
    model: &DiscreteModel,
    server: &ServerKey,
    image: &CipherTensor,
    executor: &E,
    counter: &BootstrapCounter,
) -> Result<Vec<LweCiphertext>> {
    let spec = model.spec();
    let shapes = spec.shapes()?;
    let sizes = spec.spiking_sizes()?;
    if image.shape != spec.input_shape {
        return Err(Error::Shape(format!("image shape {:?} does not match {:?}", image.shape, spec.input_shape)));
    }
    if server.layers() != sizes.len() {
        return Err(Error::DimensionMismatch { expected: sizes.len(), found: server.layers() });
    }
    let n = server.lwe_dimension();
    if let Some(ct) = image.data.first() {
        if ct.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ct.dimension() });
        }
    }
    let moduli = server.moduli();
    let circuits = (0..sizes.len())
        .map(|l| {
            let out = *moduli.get(l + 1).unwrap_or(&moduli[l]);
            NeuronCircuit::new(model.lif, moduli[l], out, server.layer(l))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut states: Vec<Vec<LweCiphertext>> = sizes.iter().map(|&k| vec![LweCiphertext::zero(n); k]).collect();
    let mut scores = vec![LweCiphertext::zero(n); spec.output_size()?];
    let zero = || LweCiphertext::zero(n);
    for _ in 0..spec.timesteps {
        let mut x = image.data.clone();
        let mut spiking = 0;
        for (li, layer) in spec.layers.iter().enumerate() {
            x = match layer {
                LayerSpec::Conv(c) => conv2d(&x, shapes[li], c, &model.weights()[li], zero, mac)?,
                LayerSpec::Fc(f) => fully_connected(&x, f, &model.weights()[li], zero, mac)?,
                LayerSpec::AvgPoolSum(p) => avgpool_sum(&x, shapes[li], p, |a, b| a.add_assign(b))?,
                LayerSpec::Flatten => x,
                LayerSpec::Spiking => {
                    let bsk = server.layer(spiking);
                    let circuit = &circuits[spiking];
                    let state = &states[spiking];
                    let pairs: Vec<(&LweCiphertext, &LweCiphertext)> = state.iter().zip(&x).collect();
                    let results = executor.map_init(
                        &pairs,
                        || bsk.buffers(),
                        |buf, (v, i)| circuit.step(v, i, bsk, buf, counter),
                    );
                    let mut spikes = Vec::with_capacity(results.len());
                    let mut new_state = Vec::with_capacity(results.len());
                    for r in results {
                        let (s, v) = r?;
                        spikes.push(s);
                        new_state.push(v);
                    }
                    states[spiking] = new_state;
                    spiking += 1;
                    spikes
                }
            };
        }
        for (s, o) in scores.iter_mut().zip(&x) {
            s.add_assign(o);
        }
    }
    Ok(scores)
}
