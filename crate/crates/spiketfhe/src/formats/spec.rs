//! JSON description of the layer pipeline, shared by the network-spec,
//! weight-exchange and discretized-model files.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use spiketfhe_core::model::{ConvSpec, FcSpec, LayerSpec, NetworkSpec, PoolSpec, Shape};
use spiketfhe_core::neuron::Tau;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LayerJson {
    Conv {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<String>,
    },
    Spiking,
    Avgpool {
        kernel: usize,
        stride: usize,
    },
    Flatten,
    Fc {
        in_features: usize,
        out_features: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<String>,
    },
}

fn one() -> usize {
    1
}

impl LayerJson {
    pub fn to_spec(&self) -> LayerSpec {
        match *self {
            LayerJson::Conv { in_channels, out_channels, kernel, stride, padding, .. } => {
                LayerSpec::Conv(ConvSpec { in_channels, out_channels, kernel, stride, padding })
            }
            LayerJson::Spiking => LayerSpec::Spiking,
            LayerJson::Avgpool { kernel, stride } => LayerSpec::AvgPoolSum(PoolSpec { kernel, stride }),
            LayerJson::Flatten => LayerSpec::Flatten,
            LayerJson::Fc { in_features, out_features, .. } => {
                LayerSpec::Fc(FcSpec { inputs: in_features, outputs: out_features })
            }
        }
    }

    pub fn weight_name(&self) -> Option<&str> {
        match self {
            LayerJson::Conv { weight, .. } | LayerJson::Fc { weight, .. } => weight.as_deref(),
            _ => None,
        }
    }

    /// JSON form of `spec`; weighted layers get the name `name`.
    pub fn from_spec(spec: &LayerSpec, name: Option<String>) -> Self {
        match *spec {
            LayerSpec::Conv(c) => LayerJson::Conv {
                in_channels: c.in_channels,
                out_channels: c.out_channels,
                kernel: c.kernel,
                stride: c.stride,
                padding: c.padding,
                weight: name,
            },
            LayerSpec::Spiking => LayerJson::Spiking,
            LayerSpec::AvgPoolSum(p) => LayerJson::Avgpool { kernel: p.kernel, stride: p.stride },
            LayerSpec::Flatten => LayerJson::Flatten,
            LayerSpec::Fc(f) => LayerJson::Fc { in_features: f.inputs, out_features: f.outputs, weight: name },
        }
    }
}

/// Default weight names: `conv1`, `fc1`, `fc2`, ... in layer order.
pub fn default_weight_names(layers: &[LayerSpec]) -> Vec<Option<String>> {
    let (mut conv, mut fc) = (0, 0);
    layers
        .iter()
        .map(|l| match l {
            LayerSpec::Conv(_) => {
                conv += 1;
                Some(format!("conv{conv}"))
            }
            LayerSpec::Fc(_) => {
                fc += 1;
                Some(format!("fc{fc}"))
            }
            _ => None,
        })
        .collect()
}

pub fn architecture_json(spec: &NetworkSpec) -> Vec<LayerJson> {
    spec.layers
        .iter()
        .zip(default_weight_names(&spec.layers))
        .map(|(l, n)| LayerJson::from_spec(l, n))
        .collect()
}

pub fn shape_from_array(s: [usize; 3]) -> Shape {
    Shape::new(s[0], s[1], s[2])
}

pub fn shape_to_array(s: Shape) -> [usize; 3] {
    [s.channels, s.height, s.width]
}

/// `tau` is written as an integer, or the string `"inf"` for IF neurons.
pub mod tau_serde {
    use super::*;

    pub fn serialize<S: Serializer>(tau: &Tau, s: S) -> std::result::Result<S::Ok, S::Error> {
        match tau {
            Tau::Finite(t) => s.serialize_u32(*t),
            Tau::Infinite => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Tau, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) if x.fract() == 0.0 && x >= 2.0 && x <= u32::MAX as f64 => Ok(Tau::Finite(x as u32)),
            Raw::Num(x) => Err(serde::de::Error::custom(format!("tau must be an integer >= 2 or \"inf\", got {x}"))),
            Raw::Text(s) => parse_tau(&s).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_tau(s: &str) -> std::result::Result<Tau, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("if") {
        return Ok(Tau::Infinite);
    }
    match s.parse::<u32>() {
        Ok(t) if t >= 2 => Ok(Tau::Finite(t)),
        _ => Err(format!("tau must be an integer >= 2 or \"inf\", got {s:?}")),
    }
}

/// A standalone network description, as referenced by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpecFile {
    pub input_shape: [usize; 3],
    pub layers: Vec<LayerJson>,
    pub timesteps: usize,
    #[serde(with = "tau_serde")]
    pub tau: Tau,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<i64>,
}

impl NetworkSpecFile {
    pub fn from_spec(spec: &NetworkSpec, theta: Option<i64>) -> Self {
        NetworkSpecFile {
            input_shape: shape_to_array(spec.input_shape),
            layers: architecture_json(spec),
            timesteps: spec.timesteps,
            tau: spec.tau,
            theta,
        }
    }

    pub fn to_spec(&self) -> Result<NetworkSpec> {
        build_spec(self.input_shape, &self.layers, self.timesteps, self.tau)
    }
}

pub fn build_spec(input_shape: [usize; 3], layers: &[LayerJson], timesteps: usize, tau: Tau) -> Result<NetworkSpec> {
    let spec = NetworkSpec {
        input_shape: shape_from_array(input_shape),
        layers: layers.iter().map(LayerJson::to_spec).collect(),
        timesteps,
        tau,
    };
    spec.validate()?;
    Ok(spec)
}

/// Flatten a nested JSON number array in row-major order.
pub fn flatten_numbers(v: &serde_json::Value, out: &mut Vec<f64>) -> Result<()> {
    match v {
        serde_json::Value::Array(items) => items.iter().try_for_each(|x| flatten_numbers(x, out)),
        serde_json::Value::Number(n) => {
            out.push(n.as_f64().ok_or_else(|| Error::Format(format!("bad number {n}")))?);
            Ok(())
        }
        other => Err(Error::Format(format!("expected a number or array, found {other}"))),
    }
}
