//! Float reference forward pass and the exact integer oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::discretize::DiscreteModel;
use crate::error::{Error, Result};
use crate::model::{FloatModel, LayerSpec, NetworkSpec};
use crate::network::ops::{avgpool_sum, conv2d, fully_connected};
use crate::neuron::{lif_step_plain, Tau};

/// Extremes observed at one spiking layer of the integer backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LayerAudit {
    pub neurons: usize,
    pub max_abs_input: i64,
    pub max_h: i64,
    pub min_h: i64,
}

/// Per-spiking-layer extremes of `I_hat[t]` and `H_hat[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Audit {
    pub layers: Vec<LayerAudit>,
}

impl Audit {
    pub fn merge(&mut self, other: &Audit) {
        if self.layers.is_empty() {
            self.layers = other.layers.clone();
            return;
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.max_abs_input = a.max_abs_input.max(b.max_abs_input);
            a.max_h = a.max_h.max(b.max_h);
            a.min_h = a.min_h.min(b.min_h);
        }
    }

    /// Index of the first layer whose `H_hat` left `[v_th - p/2, p/2)`.
    pub fn first_violation(&self, v_th_hat: i64, moduli: &[u64]) -> Option<usize> {
        self.layers.iter().zip(moduli).position(|(l, &p)| {
            let half = (p / 2) as i64;
            l.max_h >= half || l.min_h < v_th_hat - half
        })
    }
}

/// Per-spiking-layer `max_t |I[t]|` of the float model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatAudit {
    pub max_abs_input: Vec<f64>,
}

impl FloatAudit {
    pub fn merge(&mut self, other: &FloatAudit) {
        if self.max_abs_input.is_empty() {
            self.max_abs_input = other.max_abs_input.clone();
            return;
        }
        for (a, b) in self.max_abs_input.iter_mut().zip(&other.max_abs_input) {
            *a = a.max(*b);
        }
    }
}

fn check_image(spec: &NetworkSpec, image: &[u8]) -> Result<()> {
    if image.len() != spec.input_shape.numel() {
        return Err(Error::DimensionMismatch { expected: spec.input_shape.numel(), found: image.len() });
    }
    if image.iter().any(|&x| x > 1) {
        return Err(Error::Shape("input image must be binary".into()));
    }
    Ok(())
}

/// Integer forward pass over `T` timesteps with a static input. Returns
/// the summed doubled spikes of the last layer.
pub fn forward_plain(model: &DiscreteModel, image: &[u8]) -> Result<(Vec<i64>, Audit)> {
    let spec = model.spec();
    check_image(spec, image)?;
    let shapes = spec.shapes()?;
    let sizes = spec.spiking_sizes()?;
    let mut states: Vec<Vec<i64>> = sizes.iter().map(|&n| vec![0; n]).collect();
    let mut audit = Audit {
        layers: sizes
            .iter()
            .map(|&n| LayerAudit { neurons: n, max_abs_input: 0, max_h: i64::MIN, min_h: i64::MAX })
            .collect(),
    };
    let mut scores = vec![0i64; spec.output_size()?];
    let input: Vec<i64> = image.iter().map(|&x| x as i64).collect();
    let mac = |a: &mut i64, x: &i64, w: i64| *a += x * w;
    for _ in 0..spec.timesteps {
        let mut x = input.clone();
        let mut spiking = 0;
        for (li, layer) in spec.layers.iter().enumerate() {
            x = match layer {
                LayerSpec::Conv(c) => conv2d(&x, shapes[li], c, &model.weights()[li], || 0, mac)?,
                LayerSpec::Fc(f) => fully_connected(&x, f, &model.weights()[li], || 0, mac)?,
                LayerSpec::AvgPoolSum(p) => avgpool_sum(&x, shapes[li], p, |a, b| *a += b)?,
                LayerSpec::Flatten => x,
                LayerSpec::Spiking => {
                    let a = &mut audit.layers[spiking];
                    let state = &mut states[spiking];
                    let mut out = Vec::with_capacity(x.len());
                    for (v, &i) in state.iter_mut().zip(&x) {
                        let h = *v + i;
                        a.max_abs_input = a.max_abs_input.max(i.abs());
                        a.max_h = a.max_h.max(h);
                        a.min_h = a.min_h.min(h);
                        let (s, v_new) = lif_step_plain(*v, i, &model.lif);
                        *v = v_new;
                        out.push(s);
                    }
                    spiking += 1;
                    out
                }
            };
        }
        for (s, &o) in scores.iter_mut().zip(&x) {
            *s += o;
        }
    }
    if spec.timesteps == 0 {
        for l in &mut audit.layers {
            l.max_h = 0;
            l.min_h = 0;
        }
    }
    Ok((scores, audit))
}

/// Float forward pass with `V_th = 1`, `V_reset = 0`: `H = V + (I - V)/tau`
/// (or `V + I`), `S = [H >= 1]`, `V = max(H (1 - S), 0)`. Returns spike
/// counts of the last layer.
pub fn forward_float(model: &FloatModel, image: &[u8]) -> Result<(Vec<i64>, FloatAudit)> {
    let spec = &model.spec;
    check_image(spec, image)?;
    let shapes = spec.shapes()?;
    let sizes = spec.spiking_sizes()?;
    let mut states: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n]).collect();
    let mut audit = FloatAudit { max_abs_input: vec![0.0; sizes.len()] };
    let mut scores = vec![0i64; spec.output_size()?];
    let input: Vec<f64> = image.iter().map(|&x| x as f64).collect();
    let mac = |a: &mut f64, x: &f64, w: f64| *a += x * w;
    for _ in 0..spec.timesteps {
        let mut x = input.clone();
        let mut spiking = 0;
        for (li, layer) in spec.layers.iter().enumerate() {
            x = match layer {
                LayerSpec::Conv(c) => conv2d(&x, shapes[li], c, &model.weights[li], || 0.0, mac)?,
                LayerSpec::Fc(f) => fully_connected(&x, f, &model.weights[li], || 0.0, mac)?,
                LayerSpec::AvgPoolSum(p) => {
                    let norm = 1.0 / (p.kernel * p.kernel) as f64;
                    let mut y = avgpool_sum(&x, shapes[li], p, |a, b| *a += b)?;
                    y.iter_mut().for_each(|v| *v *= norm);
                    y
                }
                LayerSpec::Flatten => x,
                LayerSpec::Spiking => {
                    let max_in = &mut audit.max_abs_input[spiking];
                    let state = &mut states[spiking];
                    let mut out = Vec::with_capacity(x.len());
                    for (v, &i) in state.iter_mut().zip(&x) {
                        *max_in = max_in.max(i.abs());
                        let h = match spec.tau {
                            Tau::Finite(t) => *v + (i - *v) / t as f64,
                            Tau::Infinite => *v + i,
                        };
                        let s = if h >= 1.0 { 1.0 } else { 0.0 };
                        *v = (h * (1.0 - s)).max(0.0);
                        out.push(s);
                    }
                    spiking += 1;
                    out
                }
            };
        }
        for (s, &o) in scores.iter_mut().zip(&x) {
            *s += o as i64;
        }
    }
    Ok((scores, audit))
}
