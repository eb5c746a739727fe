//! Human-readable and JSON renderings of analysis, inference and benchmark
//! results.

use std::fmt::Write;

use serde::Serialize;
use spiketfhe_core::analysis::BoundReport;

#[derive(Debug, Clone, Serialize)]
pub struct SpikingBoundJson {
    pub layer: usize,
    pub v_th: f64,
    pub max_abs_input: f64,
    pub value: f64,
    pub scaled: i64,
    pub half_modulus: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseJson {
    pub layer: usize,
    pub max_l1: f64,
    pub bound: f64,
}

/// JSON schema of `analyze` output.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReportJson {
    pub theta: i64,
    pub tau: String,
    pub probes: usize,
    pub spiking_layers: Vec<SpikingBoundJson>,
    pub noise: Vec<NoiseJson>,
    pub max_noise_bound: f64,
    pub bootstrap_count: u64,
    pub pass: bool,
}

impl From<&BoundReport> for BoundReportJson {
    fn from(r: &BoundReport) -> Self {
        BoundReportJson {
            theta: r.theta,
            tau: r.tau.to_string(),
            probes: r.probes,
            spiking_layers: r
                .layers
                .iter()
                .map(|l| SpikingBoundJson {
                    layer: l.layer,
                    v_th: l.v_th,
                    max_abs_input: l.max_abs_input,
                    value: l.value,
                    scaled: l.scaled,
                    half_modulus: l.half_modulus,
                    pass: l.pass,
                })
                .collect(),
            noise: r.noise.iter().map(|n| NoiseJson { layer: n.layer, max_l1: n.max_l1, bound: n.bound }).collect(),
            max_noise_bound: r.max_noise_bound,
            bootstrap_count: r.bootstrap_count,
            pass: r.pass,
        }
    }
}

pub fn bound_report_text(r: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "theta = {}, tau = {}, probes = {}", r.theta, r.tau, r.probes);
    let _ = writeln!(s, "{:<6} {:>8} {:>10} {:>10} {:>10} {:>10}  verdict", "layer", "V_th", "max|I|", "V_th+max", "scaled", "p/2");
    for l in &r.layers {
        let _ = writeln!(
            s,
            "{:<6} {:>8.2} {:>10.2} {:>10.2} {:>10} {:>10}  {}",
            l.layer + 1,
            l.v_th,
            l.max_abs_input,
            l.value,
            l.scaled,
            l.half_modulus,
            if l.pass { "pass" } else { "FAIL" }
        );
    }
    for n in &r.noise {
        let _ = writeln!(
            s,
            "weighted layer {}: max sum|w| = {:.2}, noise bound = {:.3e} q (log2 {:.1})",
            n.layer,
            n.max_l1,
            n.bound,
            if n.bound > 0.0 { n.bound.log2() } else { f64::NEG_INFINITY }
        );
    }
    let _ = writeln!(s, "bootstraps per image: {}", r.bootstrap_count);
    let _ = writeln!(s, "message bound: {}", if r.pass { "PASS" } else { "FAIL" });
    s
}

/// Output of `infer` (and `decrypt` when a client key is supplied).
#[derive(Debug, Clone, Default, Serialize)]
pub struct InferReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<i64>>,
    pub wall_seconds: f64,
    pub bootstraps: u64,
    pub expected_bootstraps: u64,
    pub workers: usize,
}

pub fn infer_text(r: &InferReport) -> String {
    let mut s = String::new();
    if let (Some(c), Some(scores)) = (r.class, &r.scores) {
        let _ = writeln!(s, "class: {c}");
        let _ = writeln!(s, "scores: {scores:?}");
    }
    let _ = writeln!(s, "bootstraps: {} (expected {})", r.bootstraps, r.expected_bootstraps);
    let _ = writeln!(s, "workers: {}", r.workers);
    let _ = writeln!(s, "wall time: {:.3} s", r.wall_seconds);
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    pub neurons: usize,
    pub bootstraps: u64,
    pub seconds: f64,
    pub bootstraps_per_second: f64,
    /// Projected latency of one full image at this throughput.
    pub image_seconds: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub preset: String,
    pub ring_dimension: usize,
    pub lwe_dimension: usize,
    pub plaintext_modulus: u64,
    pub bootstraps_per_image: u64,
    pub available_cores: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Speedup of the widest row over the single-worker row.
    pub fn best_speedup(&self) -> f64 {
        self.rows.iter().map(|r| r.speedup).fold(0.0, f64::max)
    }
}

pub fn bench_text(r: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "preset {} (n = {}, N = {}, p = {}), {} bootstraps per image, {} cores available",
        r.preset, r.lwe_dimension, r.ring_dimension, r.plaintext_modulus, r.bootstraps_per_image, r.available_cores
    );
    let _ = writeln!(s, "{:>8} {:>8} {:>10} {:>10} {:>12} {:>12} {:>8}", "workers", "neurons", "bootstraps", "seconds", "boot/s", "image s", "speedup");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{:>8} {:>8} {:>10} {:>10.3} {:>12.1} {:>12.1} {:>8.2}",
            row.workers, row.neurons, row.bootstraps, row.seconds, row.bootstraps_per_second, row.image_seconds, row.speedup
        );
    }
    s
}
