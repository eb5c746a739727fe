//! Shape-generic linear stages shared by every backend.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ConvSpec, FcSpec, PoolSpec, Shape};

/// 2-D convolution; `mac(acc, x, w)` adds `w * x` into `acc`. Padding taps
/// are skipped.
pub fn conv2d<T, W: Copy>(
    input: &[T],
    shape: Shape,
    spec: &ConvSpec,
    weights: &[W],
    mut zero: impl FnMut() -> T,
    mut mac: impl FnMut(&mut T, &T, W),
) -> Result<Vec<T>> {
    check_len(input.len(), shape.numel())?;
    check_len(weights.len(), spec.weight_count())?;
    if shape.channels != spec.in_channels {
        return Err(Error::DimensionMismatch { expected: spec.in_channels, found: shape.channels });
    }
    let k = spec.kernel;
    let out_h = (shape.height + 2 * spec.padding - k) / spec.stride + 1;
    let out_w = (shape.width + 2 * spec.padding - k) / spec.stride + 1;
    let mut out = Vec::with_capacity(spec.out_channels * out_h * out_w);
    for o in 0..spec.out_channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = zero();
                for i in 0..spec.in_channels {
                    for ky in 0..k {
                        let y = (oy * spec.stride + ky) as isize - spec.padding as isize;
                        if y < 0 || y >= shape.height as isize {
                            continue;
                        }
                        for kx in 0..k {
                            let x = (ox * spec.stride + kx) as isize - spec.padding as isize;
                            if x < 0 || x >= shape.width as isize {
                                continue;
                            }
                            let w = weights[spec.weight_index(o, i, ky, kx)];
                            mac(&mut acc, &input[shape.index(i, y as usize, x as usize)], w);
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

/// Dense layer with row-major `[outputs][inputs]` weights.
pub fn fully_connected<T, W: Copy>(
    input: &[T],
    spec: &FcSpec,
    weights: &[W],
    mut zero: impl FnMut() -> T,
    mut mac: impl FnMut(&mut T, &T, W),
) -> Result<Vec<T>> {
    check_len(input.len(), spec.inputs)?;
    check_len(weights.len(), spec.inputs * spec.outputs)?;
    Ok(weights
        .chunks_exact(spec.inputs)
        .map(|row| {
            let mut acc = zero();
            for (x, &w) in input.iter().zip(row) {
                mac(&mut acc, x, w);
            }
            acc
        })
        .collect())
}

/// Sum over each pooling window (no division).
pub fn avgpool_sum<T: Clone>(
    input: &[T],
    shape: Shape,
    spec: &PoolSpec,
    mut add: impl FnMut(&mut T, &T),
) -> Result<Vec<T>> {
    check_len(input.len(), shape.numel())?;
    if spec.stride == 0 || !shape.height.is_multiple_of(spec.stride) || !shape.width.is_multiple_of(spec.stride) {
        return Err(Error::Shape(alloc::format!(
            "pool stride {} does not divide {}x{}",
            spec.stride,
            shape.height,
            shape.width
        )));
    }
    let out_h = (shape.height - spec.kernel) / spec.stride + 1;
    let out_w = (shape.width - spec.kernel) / spec.stride + 1;
    let mut out = Vec::with_capacity(shape.channels * out_h * out_w);
    for c in 0..shape.channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let (y0, x0) = (oy * spec.stride, ox * spec.stride);
                let mut acc = input[shape.index(c, y0, x0)].clone();
                for ky in 0..spec.kernel {
                    for kx in 0..spec.kernel {
                        if ky == 0 && kx == 0 {
                            continue;
                        }
                        add(&mut acc, &input[shape.index(c, y0 + ky, x0 + kx)]);
                    }
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn int_conv(input: &[i64], shape: Shape, spec: &ConvSpec, w: &[i64]) -> Vec<i64> {
        conv2d(input, shape, spec, w, || 0, |a, x, w| *a += x * w).unwrap()
    }

    #[test]
    fn ones_kernel_center_is_nine() {
        let spec = ConvSpec { in_channels: 1, out_channels: 1, kernel: 3, stride: 1, padding: 1 };
        let out = int_conv(&[1; 9], Shape::new(1, 3, 3), &spec, &[1; 9]);
        assert_eq!(out, vec![4, 6, 4, 6, 9, 6, 4, 6, 4]);
        assert!(int_conv(&[1; 9], Shape::new(1, 3, 3), &spec, &[0; 9]).iter().all(|&x| x == 0));
    }

    #[test]
    fn pool_sums_windows() {
        let out = avgpool_sum(&[2i64, 0, 2, 0], Shape::new(1, 2, 2), &PoolSpec { kernel: 2, stride: 2 }, |a, b| *a += b)
            .unwrap();
        assert_eq!(out, vec![4]);
        assert!(avgpool_sum(&[0i64; 9], Shape::new(1, 3, 3), &PoolSpec { kernel: 2, stride: 2 }, |a, b| *a += b).is_err());
    }

    #[test]
    fn fc_identity() {
        let spec = FcSpec { inputs: 3, outputs: 3 };
        let eye = [1i64, 0, 0, 0, 1, 0, 0, 0, 1];
        let out = fully_connected(&[5i64, -2, 7], &spec, &eye, || 0, |a, x, w| *a += x * w).unwrap();
        assert_eq!(out, vec![5, -2, 7]);
    }
}
