//! Subcommand implementations. Each takes fully parsed arguments and
//! returns a printable result, so the binary stays a thin wrapper.

use std::path::{Path, PathBuf};
use std::time::Instant;

use spiketfhe_core::analysis::{bootstrap_count, message_bound_check, probe_plain, select_moduli, BoundReport};
use spiketfhe_core::bootstrap::keygen;
use spiketfhe_core::discretize::{discretize_model, DiscreteModel};
use spiketfhe_core::lwe::lwe_encrypt_with;
use spiketfhe_core::model::Shape;
use spiketfhe_core::network::{
    binarize, classify, encrypt_image, forward_encrypted, network_keygen, ClientKey, Executor, ServerKey,
};
use spiketfhe_core::neuron::{BootstrapCounter, LifParams, NeuronCircuit, Tau};
use spiketfhe_core::random::rng_from_seed;
use spiketfhe_core::{FheParams, Preset};
use rand_core::RngCore;

use crate::config::{default_moduli, key_sizes, layer_params};
use crate::error::{Error, Result};
use crate::formats::binary;
use crate::formats::discrete::{AuditJson, DiscreteModelFile};
use crate::formats::exchange::WeightExchangeFile;
use crate::formats::idx;
use crate::parallel::RayonExecutor;
use crate::report::{BenchReport, BenchRow, InferReport};

pub const CLIENT_KEY_FILE: &str = "client.key";
pub const SERVER_KEY_FILE: &str = "server.key";

fn check_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::Config(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

/// Binarized images `[start, start + count)` of an IDX file.
pub fn load_images(path: &Path, start: usize, count: usize) -> Result<(Shape, Vec<Vec<u8>>)> {
    let data = idx::read_images(path)?;
    let end = start.checked_add(count).filter(|&e| e <= data.images.len()).ok_or_else(|| {
        Error::Config(format!("{} holds {} images, requested {start}..{}", path.display(), data.images.len(), start + count))
    })?;
    let shape = Shape::new(1, data.rows, data.cols);
    Ok((shape, data.images[start..end].iter().map(|i| binarize(i)).collect()))
}

/// Up to `count` leading probe images; fewer if the file is shorter.
pub fn load_probes(path: &Path, count: usize) -> Result<Vec<Vec<u8>>> {
    let data = idx::read_images(path)?;
    if data.images.is_empty() || count == 0 {
        return Err(Error::Config(format!("no probe images in {}", path.display())));
    }
    Ok(data.images.iter().take(count).map(|i| binarize(i)).collect())
}

pub fn load_discrete(path: &Path) -> Result<(DiscreteModel, Option<AuditJson>)> {
    let file = DiscreteModelFile::read(path)?;
    Ok((file.to_model()?, file.audit))
}

pub struct KeygenArgs {
    pub out_dir: PathBuf,
    pub preset: Preset,
    /// Explicit per-layer moduli; otherwise derived from the model audit,
    /// otherwise the preset's modulus for every layer.
    pub moduli: Option<Vec<u64>>,
    pub model: Option<PathBuf>,
    pub layers: usize,
    pub margin: f64,
    pub seed: u64,
    pub force: bool,
}

#[derive(Debug, Clone)]
pub struct KeygenSummary {
    pub params: Vec<FheParams>,
    pub client_path: PathBuf,
    pub server_path: PathBuf,
    pub client_bytes: usize,
    pub server_bytes: usize,
}

impl KeygenSummary {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (l, p) in self.params.iter().enumerate() {
            let k = key_sizes(p);
            s += &format!(
                "layer {}: n = {}, N = {}, p = {}, bsk 2^{} x {}, ksk 2^{} x {}; bootstrap key {} B, key-switching key {} B\n",
                l + 1,
                p.lwe_dimension,
                p.ring_dimension,
                p.plaintext_modulus,
                p.bsk_base_log,
                p.bsk_levels,
                p.ksk_base_log,
                p.ksk_levels,
                k.bootstrap,
                k.key_switch
            );
        }
        s += &format!("{}: {} B\n{}: {} B\n", self.client_path.display(), self.client_bytes, self.server_path.display(), self.server_bytes);
        s
    }
}

pub fn keygen_cmd(args: &KeygenArgs) -> Result<KeygenSummary> {
    let client_path = args.out_dir.join(CLIENT_KEY_FILE);
    let server_path = args.out_dir.join(SERVER_KEY_FILE);
    check_writable(&client_path, args.force)?;
    check_writable(&server_path, args.force)?;
    let moduli = match (&args.moduli, &args.model) {
        (Some(m), _) => m.clone(),
        (None, Some(path)) => {
            let (model, audit) = load_discrete(path)?;
            match audit {
                Some(a) => select_moduli(&a.to_audit(), model.lif.v_th_hat, model.spec().timesteps, args.margin),
                None => default_moduli(args.preset, model.spec().spiking_sizes()?.len())?,
            }
        }
        (None, None) => default_moduli(args.preset, args.layers)?,
    };
    let params = layer_params(args.preset, &moduli)?;
    let (client, server, _) = network_keygen(&params, args.seed)?;
    let client_bytes = binary::client_key_to_bytes(&client, &params[0]);
    let server_bytes = binary::server_key_to_bytes(&server);
    binary::write_file(&client_path, &client_bytes)?;
    binary::write_file(&server_path, &server_bytes)?;
    Ok(KeygenSummary {
        params,
        client_path,
        server_path,
        client_bytes: client_bytes.len(),
        server_bytes: server_bytes.len(),
    })
}

pub fn read_client_key(dir: &Path) -> Result<(FheParams, ClientKey)> {
    binary::client_key_from_bytes(&binary::read_file(&dir.join(CLIENT_KEY_FILE))?)
}

pub fn read_server_key(dir: &Path) -> Result<ServerKey> {
    binary::server_key_from_bytes(&binary::read_file(&dir.join(SERVER_KEY_FILE))?)
}

pub struct EncryptArgs {
    pub keys: PathBuf,
    pub images: PathBuf,
    pub index: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub force: bool,
}

pub fn encrypt_cmd(args: &EncryptArgs) -> Result<usize> {
    check_writable(&args.out, args.force)?;
    let (params, client) = read_client_key(&args.keys)?;
    let (shape, images) = load_images(&args.images, args.index, 1)?;
    let mut rng = rng_from_seed(args.seed);
    let tensor = encrypt_image(&client, &images[0], shape, &mut rng)?;
    let bytes = binary::cipher_tensor_to_bytes(&tensor, &params);
    binary::write_file(&args.out, &bytes)?;
    Ok(bytes.len())
}

pub struct InferArgs {
    pub keys: PathBuf,
    pub model: PathBuf,
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub allow_unsafe: bool,
    pub force: bool,
}

/// Refuse a model/key pair whose probe audit leaves the message space,
/// unless `allow_unsafe`.
pub fn check_model_against_keys(
    model: &DiscreteModel,
    audit: Option<&AuditJson>,
    moduli: &[u64],
    allow_unsafe: bool,
) -> Result<()> {
    let layers = model.spec().spiking_sizes()?.len();
    if moduli.len() != layers {
        return Err(Error::Config(format!("keys cover {} spiking layers, the model has {layers}", moduli.len())));
    }
    if allow_unsafe {
        return Ok(());
    }
    let audit = audit.ok_or_else(|| {
        Error::Bound("the model carries no probe audit (discretize with --images) and --unsafe was not given".into())
    })?;
    if let Some(l) = audit.to_audit().first_violation(model.lif.v_th_hat, moduli) {
        let a = &audit.layers[l];
        return Err(Error::Bound(format!(
            "spiking layer {}: observed H in [{}, {}] does not fit [{} - p/2, p/2) with p = {}",
            l + 1,
            a.min_h,
            a.max_h,
            model.lif.v_th_hat,
            moduli[l]
        )));
    }
    Ok(())
}

pub fn infer_cmd(args: &InferArgs) -> Result<InferReport> {
    if let Some(out) = &args.out {
        check_writable(out, args.force)?;
    }
    let server = read_server_key(&args.keys)?;
    let (model, audit) = load_discrete(&args.model)?;
    check_model_against_keys(&model, audit.as_ref(), &server.moduli(), args.allow_unsafe)?;
    let (params, image) = binary::cipher_tensor_from_bytes(&binary::read_file(&args.input)?)?;
    let executor = RayonExecutor::new(args.workers)?;
    let counter = BootstrapCounter::new();
    let start = Instant::now();
    let scores = forward_encrypted(&model, &server, &image, &executor, &counter)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    if let Some(out) = &args.out {
        binary::write_file(out, &binary::ciphertexts_to_bytes(&scores, &params))?;
    }
    let mut report = InferReport {
        wall_seconds,
        bootstraps: counter.get(),
        expected_bootstraps: bootstrap_count(model.spec())?,
        workers: executor.workers(),
        ..Default::default()
    };
    let client_path = args.keys.join(CLIENT_KEY_FILE);
    if client_path.exists() {
        let (_, client) = read_client_key(&args.keys)?;
        let s = client.decrypt_scores(&scores);
        report.class = Some(classify(&s));
        report.scores = Some(s);
    }
    Ok(report)
}

/// Decrypt a score file; returns `(class, scores)`.
pub fn decrypt_cmd(keys: &Path, input: &Path) -> Result<(usize, Vec<i64>)> {
    let (_, client) = read_client_key(keys)?;
    let (_, cts) = binary::ciphertexts_from_bytes(&binary::read_file(input)?)?;
    let scores = client.decrypt_scores(&cts);
    Ok((classify(&scores), scores))
}

pub struct AnalyzeArgs {
    pub model: PathBuf,
    pub images: PathBuf,
    pub probes: usize,
    pub theta: i64,
    pub moduli: Vec<u64>,
    pub sigma: f64,
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> Result<BoundReport> {
    let model = WeightExchangeFile::read(&args.model)?.to_model()?;
    let images = load_probes(&args.images, args.probes)?;
    Ok(message_bound_check(&model, &images, args.theta, &args.moduli, args.sigma)?)
}

pub struct DiscretizeArgs {
    pub model: PathBuf,
    pub theta: i64,
    pub out: PathBuf,
    pub images: Option<PathBuf>,
    pub probes: usize,
    pub force: bool,
}

pub fn discretize_cmd(args: &DiscretizeArgs) -> Result<DiscreteModelFile> {
    check_writable(&args.out, args.force)?;
    let exchange = WeightExchangeFile::read(&args.model)?;
    let model = discretize_model(&exchange.to_model()?, args.theta)?;
    let audit = match &args.images {
        Some(path) => {
            let images = load_probes(path, args.probes)?;
            Some(AuditJson::from_audit(&probe_plain(&model, &images)?, images.len()))
        }
        None => None,
    };
    let file = DiscreteModelFile::from_model(&model, audit, exchange.training.clone());
    file.write(&args.out)?;
    Ok(file)
}

pub struct BenchArgs {
    pub preset: Preset,
    pub modulus: Option<u64>,
    pub tau: Tau,
    pub theta: i64,
    pub timesteps: usize,
    pub neurons: usize,
    pub workers: Vec<usize>,
    pub seed: u64,
}

/// Time one spiking layer of `neurons` LIF steps at each worker count and
/// project a full default-architecture image from the throughput.
pub fn bench_cmd(args: &BenchArgs) -> Result<BenchReport> {
    let params = args.preset.params(args.modulus).map_err(|e| Error::Config(e.to_string()))?;
    let lif = LifParams::new(args.tau, args.theta)?;
    let p = params.plaintext_modulus;
    let (lwe, _, bsk) = keygen(&params, args.seed)?;
    let circuit = NeuronCircuit::new(lif, p, p, &bsk)?;
    let mut rng = rng_from_seed(args.seed ^ 0x5eed);
    let half = (p / 2) as i64;
    let lo = lif.v_th_hat - half;
    let inputs: Vec<_> = (0..args.neurons)
        .map(|_| {
            let h = lo + (rng.next_u64() % (half - lo) as u64) as i64;
            let v = lif.max_post_reset().min(h.max(0)) / 2;
            let v_ct = lwe_encrypt_with(&lwe, v, p, params.noise_std, &mut rng)?;
            let i_ct = lwe_encrypt_with(&lwe, h - v, p, params.noise_std, &mut rng)?;
            Ok((v_ct, i_ct))
        })
        .collect::<Result<_>>()?;
    let spec = spiketfhe_core::model::NetworkSpec::default_architecture(args.timesteps, args.tau);
    let per_image = bootstrap_count(&spec)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    for &w in &args.workers {
        let executor = RayonExecutor::new(w)?;
        let counter = BootstrapCounter::new();
        let start = Instant::now();
        let out = executor.map_init(&inputs, || bsk.buffers(), |buf, (v, i)| circuit.step(v, i, &bsk, buf, &counter));
        let seconds = start.elapsed().as_secs_f64();
        out.into_iter().collect::<spiketfhe_core::Result<Vec<_>>>()?;
        let bootstraps = counter.get();
        let rate = bootstraps as f64 / seconds;
        let base = rows.first().map_or(seconds, |r| r.seconds);
        rows.push(BenchRow {
            workers: executor.workers(),
            neurons: args.neurons,
            bootstraps,
            seconds,
            bootstraps_per_second: rate,
            image_seconds: per_image as f64 / rate,
            speedup: base / seconds,
        });
    }
    Ok(BenchReport {
        preset: args.preset.name().into(),
        ring_dimension: params.ring_dimension,
        lwe_dimension: params.lwe_dimension,
        plaintext_modulus: p,
        bootstraps_per_image: per_image,
        available_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
        rows,
    })
}
