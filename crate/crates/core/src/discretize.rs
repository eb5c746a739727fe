//! Float-to-integer weight conversion with per-layer scales.
//!
//! A weighted layer fed by doubled spikes (`2S`) needs half the scale, and
//! one fed by a `k x k` window sum needs `1/k^2` of it. The divisors of all
//! spiking and pooling layers since the previous weighted layer multiply.

use alloc::format;
use alloc::vec::Vec;

use crate::encoding::round_half_away;
use crate::error::{Error, Result};
use crate::model::{FloatModel, LayerSpec, Model, NetworkSpec};
use crate::neuron::LifParams;

/// `round(x * theta / divisor)`, ties away from zero.
pub fn discret(x: f64, theta: i64, divisor: i64) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if divisor <= 0 {
        return Err(Error::InvalidParams(format!("divisor must be positive, got {divisor}")));
    }
    let v = round_half_away(x * theta as f64 / divisor as f64);
    if v.abs() >= 9.0e15 {
        return Err(Error::InvalidParams(format!("discretized value {v} exceeds the integer range")));
    }
    Ok(v as i64)
}

/// Divisor of one weighted layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleEntry {
    pub layer: usize,
    pub divisor: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalePlan {
    pub theta: i64,
    pub entries: Vec<ScaleEntry>,
}

impl ScalePlan {
    pub fn divisor(&self, layer: usize) -> Option<i64> {
        self.entries.iter().find(|e| e.layer == layer).map(|e| e.divisor)
    }
}

pub fn plan_scales(spec: &NetworkSpec, theta: i64) -> Result<ScalePlan> {
    spec.validate()?;
    let mut entries = Vec::new();
    let mut divisor = 1i64;
    for (i, layer) in spec.layers.iter().enumerate() {
        match layer {
            LayerSpec::Conv(_) | LayerSpec::Fc(_) => {
                entries.push(ScaleEntry { layer: i, divisor });
                divisor = 1;
            }
            LayerSpec::Spiking => divisor *= 2,
            LayerSpec::AvgPoolSum(p) => divisor *= (p.kernel * p.kernel) as i64,
            LayerSpec::Flatten => {}
        }
    }
    Ok(ScalePlan { theta, entries })
}

/// Integer weights, the scale plan that produced them and the neuron
/// parameters of every spiking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    pub model: Model<i64>,
    pub theta: i64,
    pub plan: ScalePlan,
    pub lif: LifParams,
}

impl DiscreteModel {
    pub fn spec(&self) -> &NetworkSpec {
        &self.model.spec
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.model.weights
    }

    /// `true` when every weight is zero.
    pub fn is_degenerate(&self) -> bool {
        self.model.weights.iter().flatten().all(|&w| w == 0)
    }
}

pub fn discretize_model(model: &FloatModel, theta: i64) -> Result<DiscreteModel> {
    if theta < 1 {
        return Err(Error::InvalidParams(format!("theta must be >= 1, got {theta}")));
    }
    model.check_finite()?;
    let plan = plan_scales(&model.spec, theta)?;
    let mut weights = Vec::with_capacity(model.weights.len());
    for (i, w) in model.weights.iter().enumerate() {
        let d = plan.divisor(i).unwrap_or(1);
        weights.push(w.iter().map(|&x| discret(x, theta, d)).collect::<Result<Vec<_>>>()?);
    }
    let lif = LifParams::new(model.spec.tau, theta)?;
    Ok(DiscreteModel { model: Model::new(model.spec.clone(), weights)?, theta, plan, lif })
}
