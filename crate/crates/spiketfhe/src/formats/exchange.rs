//! The float weight-exchange file written by the trainer.

use std::collections::BTreeMap;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use spiketfhe_core::model::{FloatModel, Model, NetworkSpec};
use spiketfhe_core::neuron::Tau;

use super::spec::{architecture_json, build_spec, flatten_numbers, shape_to_array, tau_serde, LayerJson};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const ENCODING_BASE64: &str = "base64-f64le";
pub const ENCODING_NESTED: &str = "nested";

/// One weight tensor. `data` is a base64 string of little-endian `f64`
/// when `encoding` is `base64-f64le`, or nested JSON lists when `nested`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub shape: Vec<usize>,
    #[serde(default = "default_encoding")]
    pub encoding: String,
    pub data: serde_json::Value,
}

fn default_encoding() -> String {
    ENCODING_NESTED.into()
}

impl TensorJson {
    pub fn from_f64(shape: Vec<usize>, values: &[f64]) -> Self {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        TensorJson { shape, encoding: ENCODING_BASE64.into(), data: STANDARD.encode(bytes).into() }
    }

    pub fn to_f64(&self) -> Result<Vec<f64>> {
        let values = match self.encoding.as_str() {
            ENCODING_BASE64 => {
                let text = self.data.as_str().ok_or_else(|| Error::Format("base64 tensor data must be a string".into()))?;
                let bytes = STANDARD.decode(text).map_err(|e| Error::Format(format!("base64: {e}")))?;
                if bytes.len() % 8 != 0 {
                    return Err(Error::Format("base64 tensor length is not a multiple of 8 bytes".into()));
                }
                bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
            }
            ENCODING_NESTED => {
                let mut out = Vec::new();
                flatten_numbers(&self.data, &mut out)?;
                out
            }
            other => return Err(Error::Format(format!("unknown tensor encoding {other:?}"))),
        };
        let expected: usize = self.shape.iter().product();
        if values.len() != expected {
            return Err(Error::Format(format!("tensor of shape {:?} holds {} values", self.shape, values.len())));
        }
        Ok(values)
    }
}

/// Free-form training metadata; unknown keys are preserved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    #[serde(default)]
    pub dataset: String,
    #[serde(default)]
    pub epochs: u32,
    #[serde(default)]
    pub final_accuracy: f64,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightExchangeFile {
    pub format_version: u32,
    pub architecture: Vec<LayerJson>,
    pub input_shape: [usize; 3],
    #[serde(with = "tau_serde")]
    pub tau: Tau,
    pub timesteps: usize,
    pub v_th: f64,
    pub v_reset: f64,
    pub weights: BTreeMap<String, TensorJson>,
    #[serde(default)]
    pub training: TrainingMeta,
}

impl WeightExchangeFile {
    pub fn from_model(model: &FloatModel, training: TrainingMeta) -> Self {
        let architecture = architecture_json(&model.spec);
        let mut weights = BTreeMap::new();
        for (layer, (json, w)) in model.spec.layers.iter().zip(architecture.iter().zip(&model.weights)) {
            if let Some(name) = json.weight_name() {
                weights.insert(name.to_string(), TensorJson::from_f64(weight_shape(layer), w));
            }
        }
        WeightExchangeFile {
            format_version: FORMAT_VERSION,
            architecture,
            input_shape: shape_to_array(model.spec.input_shape),
            tau: model.spec.tau,
            timesteps: model.spec.timesteps,
            v_th: 1.0,
            v_reset: 0.0,
            weights,
            training,
        }
    }

    pub fn spec(&self) -> Result<NetworkSpec> {
        build_spec(self.input_shape, &self.architecture, self.timesteps, self.tau)
    }

    pub fn to_model(&self) -> Result<FloatModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported exchange format version {}", self.format_version)));
        }
        if self.v_th != 1.0 || self.v_reset != 0.0 {
            return Err(Error::Format(format!(
                "expected v_th = 1 and v_reset = 0, found {} and {}",
                self.v_th, self.v_reset
            )));
        }
        let spec = self.spec()?;
        let weights = load_weights(&self.architecture, &spec, &self.weights, |t| t.to_f64())?;
        let model = Model::new(spec, weights)?;
        model.check_finite()?;
        Ok(model)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Tensor shape of a weighted layer: `[out, in, k, k]` or `[out, in]`.
pub fn weight_shape(layer: &spiketfhe_core::model::LayerSpec) -> Vec<usize> {
    use spiketfhe_core::model::LayerSpec;
    match layer {
        LayerSpec::Conv(c) => vec![c.out_channels, c.in_channels, c.kernel, c.kernel],
        LayerSpec::Fc(f) => vec![f.outputs, f.inputs],
        _ => Vec::new(),
    }
}

/// Collect per-layer weights by name, checking each tensor's shape.
pub(crate) fn load_weights<T, W>(
    architecture: &[LayerJson],
    spec: &NetworkSpec,
    tensors: &BTreeMap<String, T>,
    decode: impl Fn(&T) -> Result<Vec<W>>,
) -> Result<Vec<Vec<W>>>
where
    T: HasShape,
{
    architecture
        .iter()
        .zip(&spec.layers)
        .map(|(json, layer)| {
            if !layer.is_weighted() {
                return Ok(Vec::new());
            }
            let name = json
                .weight_name()
                .ok_or_else(|| Error::Format(format!("{} layer has no weight name", layer.name())))?;
            let tensor = tensors.get(name).ok_or_else(|| Error::Format(format!("missing weight tensor {name:?}")))?;
            let expected = weight_shape(layer);
            if tensor.shape() != expected.as_slice() {
                return Err(Error::Format(format!(
                    "weight {name:?} has shape {:?}, expected {expected:?}",
                    tensor.shape()
                )));
            }
            decode(tensor)
        })
        .collect()
}

pub(crate) trait HasShape {
    fn shape(&self) -> &[usize];
}

impl HasShape for TensorJson {
    fn shape(&self) -> &[usize] {
        &self.shape
    }
}
