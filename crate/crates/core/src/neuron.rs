//! The discretized LIF/IF neuron: an exact integer oracle and the encrypted
//! Fire/Reset bootstrap pair.

use alloc::format;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::bootstrap::{bootstrap_with, BootstrapBuffers, BootstrapKey, ProgramFunction, TestVector};
use crate::encoding::{div_round, encode};
use crate::error::{Error, Result};
use crate::lwe::LweCiphertext;

/// Leak constant: a finite `tau >= 2` (LIF) or no leak (IF).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau {
    Finite(u32),
    Infinite,
}

impl Tau {
    /// Threshold of the unscaled dynamics after multiplying through by `tau`:
    /// `tau` for LIF, 1 for IF.
    pub fn threshold_multiplier(self) -> i64 {
        match self {
            Tau::Finite(t) => t as i64,
            Tau::Infinite => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Tau::Finite(t) => t as f64,
            Tau::Infinite => f64::INFINITY,
        }
    }
}

impl core::fmt::Display for Tau {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Tau::Finite(t) => write!(f, "{t}"),
            Tau::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifParams {
    pub tau: Tau,
    pub theta: i64,
    pub v_th_hat: i64,
    pub v_reset_hat: i64,
}

impl LifParams {
    pub fn new(tau: Tau, theta: i64) -> Result<Self> {
        if theta <= 0 {
            return Err(Error::InvalidParams(format!("theta must be positive, got {theta}")));
        }
        if let Tau::Finite(t) = tau {
            if t < 2 {
                return Err(Error::InvalidParams(format!("tau must be >= 2, got {t}")));
            }
        }
        Ok(LifParams { tau, theta, v_th_hat: theta * tau.threshold_multiplier(), v_reset_hat: 0 })
    }

    /// Membrane value kept below threshold: `round((tau-1)/tau * h)`, or `h`
    /// in IF mode. `h >= 0`.
    pub fn leak(&self, h: i64) -> i64 {
        match self.tau {
            Tau::Finite(t) => div_round((t as i64 - 1) * h, t as i64),
            Tau::Infinite => h,
        }
    }

    /// Largest membrane potential that can survive a step.
    pub fn max_post_reset(&self) -> i64 {
        self.leak(self.v_th_hat - 1)
    }
}

/// One plaintext step. Returns `(2S, V')`.
pub fn lif_step_plain(v_hat: i64, i_hat: i64, params: &LifParams) -> (i64, i64) {
    let h = v_hat + i_hat;
    if h >= params.v_th_hat {
        (2, params.v_reset_hat)
    } else if h >= 0 {
        (0, params.leak(h))
    } else {
        (0, 0)
    }
}

/// Sign function: 1 on `[0, p/2)`, -1 elsewhere.
pub fn make_fire_program(input_modulus: u64, output_modulus: u64) -> Result<ProgramFunction> {
    ProgramFunction::from_half(input_modulus, output_modulus, |_| 1)
}

/// 0 on `[v_th, p/2]`, the leak on `[0, v_th)`, 0 on `[v_th - p/2, 0)` and
/// the negacyclic image of the leak below that.
pub fn make_reset_program(params: &LifParams, modulus: u64) -> Result<ProgramFunction> {
    if params.v_th_hat >= (modulus / 2) as i64 {
        return Err(Error::InvalidParams(format!(
            "threshold {} does not fit below p/2 = {}",
            params.v_th_hat,
            modulus / 2
        )));
    }
    let g = ProgramFunction::from_half(modulus, modulus, |m| if m < params.v_th_hat { params.leak(m) } else { 0 })?;
    Ok(g)
}

/// Counts bootstraps performed through it.
#[derive(Debug, Default)]
pub struct BootstrapCounter(AtomicU64);

impl BootstrapCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed)
    }

    fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// Fire and Reset compiled for one spiking layer and one bootstrap key.
/// `input_modulus` is the layer's message space and `output_modulus` the
/// space the spikes are emitted in.
#[derive(Debug, Clone)]
pub struct NeuronCircuit {
    pub params: LifParams,
    pub input_modulus: u64,
    pub output_modulus: u64,
    fire: TestVector,
    reset: TestVector,
    threshold_phase: u64,
    one_phase: u64,
}

impl NeuronCircuit {
    pub fn new(params: LifParams, input_modulus: u64, output_modulus: u64, bsk: &BootstrapKey) -> Result<Self> {
        let n = bsk.ring_dimension();
        let fire = make_fire_program(input_modulus, output_modulus)?.test_vector(n)?;
        let reset = make_reset_program(&params, input_modulus)?.test_vector(n)?;
        Ok(NeuronCircuit {
            params,
            input_modulus,
            output_modulus,
            fire,
            reset,
            threshold_phase: encode(params.v_th_hat, input_modulus),
            one_phase: encode(1, output_modulus),
        })
    }

    /// `ct_h = ct_v + ct_i`, then Fire and Reset. Exactly two bootstraps.
    pub fn step(
        &self,
        ct_v: &LweCiphertext,
        ct_i: &LweCiphertext,
        bsk: &BootstrapKey,
        buf: &mut BootstrapBuffers,
        counter: &BootstrapCounter,
    ) -> Result<(LweCiphertext, LweCiphertext)> {
        let mut h = ct_v.clone();
        h.add_assign(ct_i);
        let mut shifted = h.clone();
        shifted.sub_phase(self.threshold_phase);
        let mut spike = bootstrap_with(&shifted, &self.fire, bsk, buf)?;
        counter.bump();
        spike.add_phase(self.one_phase);
        let v_new = bootstrap_with(&h, &self.reset, bsk, buf)?;
        counter.bump();
        Ok((spike, v_new))
    }
}

/// Single-neuron convenience: message space and spike space both `p` of
/// the key's parameters.
pub fn fhe_lif_step(
    ct_v: &LweCiphertext,
    ct_i: &LweCiphertext,
    params: &LifParams,
    bsk: &BootstrapKey,
) -> Result<(LweCiphertext, LweCiphertext)> {
    let p = bsk.params.plaintext_modulus;
    let circuit = NeuronCircuit::new(*params, p, p, bsk)?;
    circuit.step(ct_v, ct_i, bsk, &mut bsk.buffers(), &BootstrapCounter::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lif(tau: u32, theta: i64) -> LifParams {
        LifParams::new(Tau::Finite(tau), theta).unwrap()
    }

    #[test]
    fn plain_examples() {
        let p = lif(2, 20);
        assert_eq!(p.v_th_hat, 40);
        assert_eq!(lif_step_plain(10, 35, &p), (2, 0));
        assert_eq!(lif_step_plain(10, 20, &p), (0, 15));
        assert_eq!(lif_step_plain(0, -5, &p), (0, 0));
    }

    #[test]
    fn if_mode_keeps_membrane() {
        let p = LifParams::new(Tau::Infinite, 40).unwrap();
        assert_eq!(p.v_th_hat, 40);
        assert_eq!(lif_step_plain(10, 25, &p), (0, 35));
        assert_eq!(lif_step_plain(10, 30, &p), (2, 0));
    }

    #[test]
    fn fire_program_values() {
        let g = make_fire_program(64, 64).unwrap();
        assert_eq!(g.eval(0), 1);
        assert_eq!(g.eval(-1), -1);
        assert_eq!(g.eval(31), 1);
        assert_eq!(g.eval(32), -1);
        for v in -31..=32 {
            assert_eq!(g.eval(v + 32), -g.eval(v));
        }
    }

    #[test]
    fn reset_program_values() {
        let p = lif(4, 40);
        let g = make_reset_program(&p, 1 << 14).unwrap();
        assert_eq!(g.eval(200), 0);
        assert_eq!(g.eval(100), 75);
        assert_eq!(g.eval(-50), 0);
        assert_eq!(g.eval(159), 119);
        assert_eq!(g.eval(8192), 0);
        assert!(make_reset_program(&p, 256).is_err());
    }

    #[test]
    fn reset_program_agrees_with_oracle_on_safe_range() {
        for tau in [Tau::Finite(2), Tau::Finite(3), Tau::Infinite] {
            let p = LifParams::new(tau, 20).unwrap();
            let modulus = 256u64;
            let g = make_reset_program(&p, modulus).unwrap();
            for h in (p.v_th_hat - 128)..128 {
                assert_eq!(g.eval(h), lif_step_plain(h, 0, &p).1, "tau={tau} h={h}");
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LifParams::new(Tau::Finite(1), 10).is_err());
        assert!(LifParams::new(Tau::Finite(2), 0).is_err());
    }
}
