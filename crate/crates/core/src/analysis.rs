//! Pre-flight vetting: message-space bound, noise estimate and bootstrap
//! accounting.

use alloc::vec::Vec;

use crate::discretize::DiscreteModel;
use crate::error::{Error, Result};
use crate::model::{FloatModel, LayerSpec, NetworkSpec};
use crate::network::plain::{forward_float, forward_plain, Audit, FloatAudit};
use crate::neuron::Tau;

/// Bound verdict for one spiking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikingBound {
    pub layer: usize,
    /// Unscaled threshold `V_th^tau` (`tau`, or 1 in IF mode).
    pub v_th: f64,
    pub max_abs_input: f64,
    /// `V_th^tau + max_t |I[t]|`.
    pub value: f64,
    /// `round(theta * value)`.
    pub scaled: i64,
    pub half_modulus: i64,
    pub pass: bool,
}

/// Noise estimate for one weighted layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub layer: usize,
    /// `max` over output neurons of `sum_j |w_j|`.
    pub max_l1: f64,
    /// `theta * sigma * max_l1`, as a fraction of `q`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theta: i64,
    pub tau: Tau,
    pub probes: usize,
    pub layers: Vec<SpikingBound>,
    pub noise: Vec<NoiseEstimate>,
    pub max_noise_bound: f64,
    pub bootstrap_count: u64,
    pub pass: bool,
}

/// `2 * (sum of spiking layer sizes) * T`.
pub fn bootstrap_count(spec: &NetworkSpec) -> Result<u64> {
    let neurons: usize = spec.spiking_sizes()?.iter().sum();
    Ok(2 * neurons as u64 * spec.timesteps as u64)
}

fn broadcast(moduli: &[u64], layers: usize) -> Result<Vec<u64>> {
    match moduli.len() {
        0 => Err(Error::EmptyInput),
        1 => Ok(alloc::vec![moduli[0]; layers]),
        n if n == layers => Ok(moduli.to_vec()),
        n => Err(Error::DimensionMismatch { expected: layers, found: n }),
    }
}

/// Judge measured per-layer `max |I|` against `p/2`. `moduli` holds one
/// modulus per spiking layer or a single shared one.
pub fn bounds_from_maxima(max_abs_inputs: &[f64], tau: Tau, theta: i64, moduli: &[u64]) -> Result<Vec<SpikingBound>> {
    let moduli = broadcast(moduli, max_abs_inputs.len())?;
    let v_th = tau.threshold_multiplier() as f64;
    Ok(max_abs_inputs
        .iter()
        .zip(&moduli)
        .enumerate()
        .map(|(layer, (&m, &p))| {
            let value = v_th + m;
            let scaled = libm::round(theta as f64 * value) as i64;
            let half_modulus = (p / 2) as i64;
            SpikingBound { layer, v_th, max_abs_input: m, value, scaled, half_modulus, pass: scaled <= half_modulus }
        })
        .collect())
}

/// Largest row sum of `|w|` of every weighted layer.
pub fn weight_l1(model: &FloatModel) -> Vec<(usize, f64)> {
    model
        .spec
        .layers
        .iter()
        .enumerate()
        .filter_map(|(i, layer)| {
            let w = &model.weights[i];
            let rows: Vec<f64> = match layer {
                LayerSpec::Fc(f) => w.chunks_exact(f.inputs).map(|r| r.iter().map(|x| x.abs()).sum()).collect(),
                LayerSpec::Conv(c) => w
                    .chunks_exact(c.in_channels * c.kernel * c.kernel)
                    .map(|r| r.iter().map(|x| x.abs()).sum())
                    .collect(),
                _ => return None,
            };
            Some((i, rows.into_iter().fold(0.0, f64::max)))
        })
        .collect()
}

/// `theta * sigma * max sum |w|` per weighted layer.
pub fn noise_bound(model: &FloatModel, theta: i64, sigma: f64) -> Vec<NoiseEstimate> {
    weight_l1(model)
        .into_iter()
        .map(|(layer, max_l1)| NoiseEstimate { layer, max_l1, bound: theta as f64 * sigma * max_l1 })
        .collect()
}

/// Float forward over the probe set, recording `max_t |I[t]|` per spiking
/// layer.
pub fn probe_float(model: &FloatModel, probes: &[Vec<u8>]) -> Result<FloatAudit> {
    if probes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut audit = FloatAudit::default();
    for img in probes {
        audit.merge(&forward_float(model, img)?.1);
    }
    Ok(audit)
}

/// Integer forward over the probe set.
pub fn probe_plain(model: &DiscreteModel, probes: &[Vec<u8>]) -> Result<Audit> {
    if probes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut audit = Audit::default();
    for img in probes {
        audit.merge(&forward_plain(model, img)?.1);
    }
    Ok(audit)
}

/// Assemble a report from measured input maxima.
pub fn report_from_maxima(
    model: &FloatModel,
    max_abs_inputs: &[f64],
    probes: usize,
    theta: i64,
    moduli: &[u64],
    sigma: f64,
) -> Result<BoundReport> {
    let layers = bounds_from_maxima(max_abs_inputs, model.spec.tau, theta, moduli)?;
    let noise = noise_bound(model, theta, sigma);
    let max_noise_bound = noise.iter().map(|n| n.bound).fold(0.0, f64::max);
    Ok(BoundReport {
        theta,
        tau: model.spec.tau,
        probes,
        pass: layers.iter().all(|l| l.pass),
        layers,
        noise,
        max_noise_bound,
        bootstrap_count: bootstrap_count(&model.spec)?,
    })
}

/// Measure the probe set and check `theta * (V_th + max |I|) <= p/2` for
/// every spiking layer.
pub fn message_bound_check(
    model: &FloatModel,
    probes: &[Vec<u8>],
    theta: i64,
    moduli: &[u64],
    sigma: f64,
) -> Result<BoundReport> {
    let audit = probe_float(model, probes)?;
    report_from_maxima(model, &audit.max_abs_input, probes.len(), theta, moduli, sigma)
}

/// Pass/fail of the bound check for each `theta`, reusing one probe run.
pub fn theta_sweep(model: &FloatModel, probes: &[Vec<u8>], thetas: &[i64], moduli: &[u64]) -> Result<Vec<(i64, bool)>> {
    let audit = probe_float(model, probes)?;
    thetas
        .iter()
        .map(|&t| {
            let layers = bounds_from_maxima(&audit.max_abs_input, model.spec.tau, t, moduli)?;
            Ok((t, layers.iter().all(|l| l.pass)))
        })
        .collect()
}

/// Smallest power-of-two modulus per spiking layer that holds the observed
/// integer range `[min H, max H]` with `margin` headroom, keeps the
/// threshold below `p/2`, and (last layer) holds scores up to `2T`.
pub fn select_moduli(audit: &Audit, v_th_hat: i64, timesteps: usize, margin: f64) -> Vec<u64> {
    let last = audit.layers.len().saturating_sub(1);
    audit
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut need = (l.max_h + 1).max(v_th_hat - l.min_h).max(v_th_hat + 1);
            if i == last {
                need = need.max(2 * timesteps as i64 + 1);
            }
            let half = libm::ceil(need as f64 * margin.max(1.0)) as u64;
            (2 * half).next_power_of_two().max(4)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use alloc::vec;

    #[test]
    fn table_rows() {
        let pass = bounds_from_maxima(&[27.6, 68.0, 22.9], Tau::Finite(2), 40, &[1 << 14]).unwrap();
        assert_eq!(pass[1].value, 70.0);
        assert_eq!(pass[1].scaled, 2800);
        assert!(pass[1].pass);
        let fail = bounds_from_maxima(&[81.2, 171.0, 20.0], Tau::Finite(4), 100, &[1 << 14]).unwrap();
        assert_eq!(fail[1].scaled, 17500);
        assert!(!fail[1].pass);
    }

    #[test]
    fn counts() {
        assert_eq!(bootstrap_count(&NetworkSpec::default_architecture(4, Tau::Finite(4))).unwrap(), 64080);
        assert_eq!(bootstrap_count(&NetworkSpec::default_architecture(1, Tau::Finite(4))).unwrap(), 16020);
        let empty = NetworkSpec { layers: vec![], ..NetworkSpec::default_architecture(4, Tau::Finite(4)) };
        assert_eq!(bootstrap_count(&empty).unwrap(), 0);
    }

    #[test]
    fn zero_model_bound_is_threshold() {
        let spec = NetworkSpec::default_architecture(2, Tau::Finite(2));
        let weights = spec.layers.iter().map(|l| vec![0.0; l.weight_count()]).collect();
        let model = Model::new(spec, weights).unwrap();
        let report = message_bound_check(&model, &[vec![1; 784]], 40, &[1 << 14], 0.0).unwrap();
        assert!(report.pass);
        assert!(report.layers.iter().all(|l| l.scaled == 80));
        assert_eq!(report.max_noise_bound, 0.0);
    }

    #[test]
    fn moduli_cover_range() {
        let audit = Audit {
            layers: vec![
                crate::network::LayerAudit { neurons: 1, max_abs_input: 400, max_h: 470, min_h: -300 },
                crate::network::LayerAudit { neurons: 1, max_abs_input: 10, max_h: 100, min_h: -10 },
            ],
        };
        assert_eq!(select_moduli(&audit, 160, 4, 1.0), vec![1024, 512]);
        assert_eq!(select_moduli(&audit, 160, 4, 1.25), vec![2048, 512]);
    }
}
