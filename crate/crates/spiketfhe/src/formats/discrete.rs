//! The discretized-model file: the exchange envelope with integer weights,
//! the scale plan and an optional probe audit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spiketfhe_core::discretize::{plan_scales, DiscreteModel};
use spiketfhe_core::model::{Model, NetworkSpec};
use spiketfhe_core::network::{Audit, LayerAudit};
use spiketfhe_core::neuron::{LifParams, Tau};

use super::exchange::{load_weights, weight_shape, HasShape, TrainingMeta};
use super::spec::{architecture_json, build_spec, shape_to_array, tau_serde, LayerJson};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntTensorJson {
    pub shape: Vec<usize>,
    pub data: Vec<i64>,
}

impl HasShape for IntTensorJson {
    fn shape(&self) -> &[usize] {
        &self.shape
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleEntryJson {
    pub layer: usize,
    pub divisor: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerAuditJson {
    pub neurons: usize,
    pub max_abs_input: i64,
    pub max_h: i64,
    pub min_h: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditJson {
    pub probes: usize,
    pub layers: Vec<LayerAuditJson>,
}

impl AuditJson {
    pub fn from_audit(audit: &Audit, probes: usize) -> Self {
        AuditJson {
            probes,
            layers: audit
                .layers
                .iter()
                .map(|l| LayerAuditJson {
                    neurons: l.neurons,
                    max_abs_input: l.max_abs_input,
                    max_h: l.max_h,
                    min_h: l.min_h,
                })
                .collect(),
        }
    }

    pub fn to_audit(&self) -> Audit {
        Audit {
            layers: self
                .layers
                .iter()
                .map(|l| LayerAudit { neurons: l.neurons, max_abs_input: l.max_abs_input, max_h: l.max_h, min_h: l.min_h })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModelFile {
    pub format_version: u32,
    pub architecture: Vec<LayerJson>,
    pub input_shape: [usize; 3],
    #[serde(with = "tau_serde")]
    pub tau: Tau,
    pub timesteps: usize,
    pub v_th: f64,
    pub v_reset: f64,
    pub theta: i64,
    pub v_th_hat: i64,
    pub scale_plan: Vec<ScaleEntryJson>,
    pub weights: BTreeMap<String, IntTensorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditJson>,
    #[serde(default)]
    pub training: TrainingMeta,
}

impl DiscreteModelFile {
    pub fn from_model(model: &DiscreteModel, audit: Option<AuditJson>, training: TrainingMeta) -> Self {
        let spec = model.spec();
        let architecture = architecture_json(spec);
        let mut weights = BTreeMap::new();
        for (layer, (json, w)) in spec.layers.iter().zip(architecture.iter().zip(model.weights())) {
            if let Some(name) = json.weight_name() {
                weights.insert(name.to_string(), IntTensorJson { shape: weight_shape(layer), data: w.clone() });
            }
        }
        DiscreteModelFile {
            format_version: FORMAT_VERSION,
            architecture,
            input_shape: shape_to_array(spec.input_shape),
            tau: spec.tau,
            timesteps: spec.timesteps,
            v_th: 1.0,
            v_reset: 0.0,
            theta: model.theta,
            v_th_hat: model.lif.v_th_hat,
            scale_plan: model.plan.entries.iter().map(|e| ScaleEntryJson { layer: e.layer, divisor: e.divisor }).collect(),
            weights,
            audit,
            training,
        }
    }

    pub fn spec(&self) -> Result<NetworkSpec> {
        build_spec(self.input_shape, &self.architecture, self.timesteps, self.tau)
    }

    /// Rebuild the model, checking the stored scale plan and threshold
    /// against the ones implied by `theta` and `tau`.
    pub fn to_model(&self) -> Result<DiscreteModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported discrete format version {}", self.format_version)));
        }
        let spec = self.spec()?;
        let plan = plan_scales(&spec, self.theta)?;
        let stored: Vec<(usize, i64)> = self.scale_plan.iter().map(|e| (e.layer, e.divisor)).collect();
        let derived: Vec<(usize, i64)> = plan.entries.iter().map(|e| (e.layer, e.divisor)).collect();
        if stored != derived {
            return Err(Error::Format(format!("scale plan {stored:?} disagrees with the architecture ({derived:?})")));
        }
        let lif = LifParams::new(self.tau, self.theta)?;
        if lif.v_th_hat != self.v_th_hat {
            return Err(Error::Format(format!("v_th_hat {} should be {}", self.v_th_hat, lif.v_th_hat)));
        }
        let weights = load_weights(&self.architecture, &spec, &self.weights, |t| Ok(t.data.clone()))?;
        Ok(DiscreteModel { model: Model::new(spec, weights)?, theta: self.theta, plan, lif })
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

#[cfg(test)]
mod tests {
    use super::*;
    use spiketfhe_core::discretize::discretize_model;
    use spiketfhe_core::model::FloatModel;

    fn float_model() -> FloatModel {
        let spec = NetworkSpec::default_architecture(2, Tau::Finite(4));
        let weights = spec
            .layers
            .iter()
            .map(|l| (0..l.weight_count()).map(|i| ((i * 37 % 101) as f64 - 50.0) / 200.0).collect())
            .collect();
        Model::new(spec, weights).unwrap()
    }

    #[test]
    fn round_trip() {
        let model = discretize_model(&float_model(), 40).unwrap();
        let audit = AuditJson { probes: 3, layers: vec![LayerAuditJson { neurons: 1, max_abs_input: 5, max_h: 9, min_h: -2 }] };
        let file = DiscreteModelFile::from_model(&model, Some(audit.clone()), TrainingMeta::default());
        assert_eq!(file.v_th_hat, 160);
        let text = serde_json::to_string(&file).unwrap();
        let back: DiscreteModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_model().unwrap(), model);
        assert_eq!(back.audit, Some(audit));
    }

    #[test]
    fn tampered_plan_is_rejected() {
        let model = discretize_model(&float_model(), 40).unwrap();
        let mut file = DiscreteModelFile::from_model(&model, None, TrainingMeta::default());
        file.scale_plan[1].divisor = 4;
        assert!(file.to_model().is_err());
        let mut file = DiscreteModelFile::from_model(&model, None, TrainingMeta::default());
        file.v_th_hat = 40;
        assert!(file.to_model().is_err());
    }
}
