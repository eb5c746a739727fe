//! Network descriptions: layer kinds, shapes and float-weight models.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::neuron::Tau;

/// Channel-major tensor shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape { channels, height, width }
    }

    pub const fn flat(len: usize) -> Self {
        Shape { channels: len, height: 1, width: 1 }
    }

    pub const fn numel(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvSpec {
    pub fn weight_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel * self.kernel
    }

    /// Weight index for `[out][in][ky][kx]`.
    pub fn weight_index(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + i) * self.kernel + ky) * self.kernel + kx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    pub kernel: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FcSpec {
    pub inputs: usize,
    pub outputs: usize,
}

/// One pipeline stage. Spiking layers share the network's neuron model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv(ConvSpec),
    /// Window sum; the averaging division is folded into downstream scales.
    AvgPoolSum(PoolSpec),
    Flatten,
    Fc(FcSpec),
    Spiking,
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Conv(_) => "conv",
            LayerSpec::AvgPoolSum(_) => "avgpool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Fc(_) => "fc",
            LayerSpec::Spiking => "spiking",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, LayerSpec::Conv(_) | LayerSpec::Fc(_))
    }

    pub fn weight_count(&self) -> usize {
        match self {
            LayerSpec::Conv(c) => c.weight_count(),
            LayerSpec::Fc(f) => f.inputs * f.outputs,
            _ => 0,
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        match *self {
            LayerSpec::Conv(c) => {
                if input.channels != c.in_channels {
                    return Err(Error::Shape(format!(
                        "conv expects {} input channels, got {}",
                        c.in_channels, input.channels
                    )));
                }
                if c.kernel == 0 || c.stride == 0 {
                    return Err(Error::Shape("conv kernel and stride must be positive".into()));
                }
                let out = |d: usize| -> Result<usize> {
                    let padded = d + 2 * c.padding;
                    if padded < c.kernel {
                        return Err(Error::Shape(format!("conv kernel {} larger than padded input {padded}", c.kernel)));
                    }
                    Ok((padded - c.kernel) / c.stride + 1)
                };
                Ok(Shape::new(c.out_channels, out(input.height)?, out(input.width)?))
            }
            LayerSpec::AvgPoolSum(p) => {
                if p.kernel == 0 || p.stride == 0 {
                    return Err(Error::Shape("pool kernel and stride must be positive".into()));
                }
                if !input.height.is_multiple_of(p.stride) || !input.width.is_multiple_of(p.stride) {
                    return Err(Error::Shape(format!(
                        "pool stride {} does not divide {}x{}",
                        p.stride, input.height, input.width
                    )));
                }
                if input.height < p.kernel || input.width < p.kernel {
                    return Err(Error::Shape("pool window larger than input".into()));
                }
                let out = |d: usize| (d - p.kernel) / p.stride + 1;
                Ok(Shape::new(input.channels, out(input.height), out(input.width)))
            }
            LayerSpec::Flatten => Ok(Shape::flat(input.numel())),
            LayerSpec::Fc(f) => {
                if input.numel() != f.inputs {
                    return Err(Error::Shape(format!("fc expects {} inputs, got {}", f.inputs, input.numel())));
                }
                Ok(Shape::flat(f.outputs))
            }
            LayerSpec::Spiking => Ok(input),
        }
    }
}

/// Layer pipeline plus simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input_shape: Shape,
    pub layers: Vec<LayerSpec>,
    pub timesteps: usize,
    pub tau: Tau,
}

impl NetworkSpec {
    /// Conv(1->10, 3x3, s1, p1) -> Spiking -> AvgPoolSum(2, 2) -> Flatten ->
    /// FC(1960->160) -> Spiking -> FC(160->10) -> Spiking.
    pub fn default_architecture(timesteps: usize, tau: Tau) -> Self {
        NetworkSpec {
            input_shape: Shape::new(1, 28, 28),
            layers: alloc::vec![
                LayerSpec::Conv(ConvSpec { in_channels: 1, out_channels: 10, kernel: 3, stride: 1, padding: 1 }),
                LayerSpec::Spiking,
                LayerSpec::AvgPoolSum(PoolSpec { kernel: 2, stride: 2 }),
                LayerSpec::Flatten,
                LayerSpec::Fc(FcSpec { inputs: 1960, outputs: 160 }),
                LayerSpec::Spiking,
                LayerSpec::Fc(FcSpec { inputs: 160, outputs: 10 }),
                LayerSpec::Spiking,
            ],
            timesteps,
            tau,
        }
    }

    /// Input shape of every layer followed by the final output shape.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        let mut cur = self.input_shape;
        shapes.push(cur);
        for layer in &self.layers {
            cur = layer.output_shape(cur)?;
            shapes.push(cur);
        }
        Ok(shapes)
    }

    /// Neuron count of each spiking layer, in order.
    pub fn spiking_sizes(&self) -> Result<Vec<usize>> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Spiking))
            .map(|(i, _)| shapes[i].numel())
            .collect())
    }

    pub fn output_size(&self) -> Result<usize> {
        Ok(self.shapes()?.last().map(|s| s.numel()).unwrap_or(0))
    }

    /// Shapes chain, every weighted layer is followed by a spiking layer
    /// before the next weighted layer, and the last layer is spiking.
    pub fn validate(&self) -> Result<()> {
        self.shapes()?;
        if self.layers.is_empty() {
            return Ok(());
        }
        let mut pending_weighted = false;
        for layer in &self.layers {
            if layer.is_weighted() {
                if pending_weighted {
                    return Err(Error::UnsupportedLayer("two weighted layers without a spiking layer between".into()));
                }
                pending_weighted = true;
            } else if matches!(layer, LayerSpec::Spiking) {
                pending_weighted = false;
            }
        }
        if !matches!(self.layers.last(), Some(LayerSpec::Spiking)) {
            return Err(Error::UnsupportedLayer("the last layer must be spiking".into()));
        }
        Ok(())
    }
}

/// Weights for every layer of a spec (empty for unweighted layers).
#[derive(Debug, Clone, PartialEq)]
pub struct Model<W> {
    pub spec: NetworkSpec,
    pub weights: Vec<Vec<W>>,
}

impl<W> Model<W> {
    pub fn new(spec: NetworkSpec, weights: Vec<Vec<W>>) -> Result<Self> {
        spec.validate()?;
        if weights.len() != spec.layers.len() {
            return Err(Error::DimensionMismatch { expected: spec.layers.len(), found: weights.len() });
        }
        for (layer, w) in spec.layers.iter().zip(&weights) {
            if w.len() != layer.weight_count() {
                return Err(Error::Shape(format!(
                    "{} layer needs {} weights, got {}",
                    layer.name(),
                    layer.weight_count(),
                    w.len()
                )));
            }
        }
        Ok(Model { spec, weights })
    }
}

/// Trained float weights; spiking layers use `V_th = 1`, `V_reset = 0`.
pub type FloatModel = Model<f64>;

impl FloatModel {
    pub fn check_finite(&self) -> Result<()> {
        for w in self.weights.iter().flatten() {
            if !w.is_finite() {
                return Err(Error::NonFinite(*w));
            }
        }
        Ok(())
    }
}
