use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spiketfhe::commands::{self, AnalyzeArgs, BenchArgs, DiscretizeArgs, EncryptArgs, InferArgs, KeygenArgs};
use spiketfhe::config::{default_moduli, parse_moduli, parse_preset, PRESET_ENV};
use spiketfhe::core::neuron::Tau;
use spiketfhe::formats::spec::parse_tau;
use spiketfhe::report::{self, BoundReportJson};
use spiketfhe::{Error, Result};

#[derive(Parser)]
#[command(name = "spiketfhe", version, about = "Encrypted spiking-network inference over TFHE-style bootstrapping")]
struct Cli {
    /// Parameter preset: toy, paper, std128 or desk.
    #[arg(long, global = true, env = PRESET_ENV, default_value = "toy")]
    preset: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelOverrides {
    #[arg(long, default_value_t = 40)]
    theta: i64,
    /// Membrane time constant (integer >= 2, or "inf" for IF neurons).
    #[arg(long, value_parser = parse_tau)]
    tau: Option<Tau>,
    #[arg(long)]
    timesteps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a client key and a server key.
    Keygen {
        #[arg(long, default_value = "keys")]
        out: PathBuf,
        /// Comma-separated message modulus per spiking layer (e.g. 2048,512,512).
        #[arg(long)]
        moduli: Option<String>,
        /// Discretized model whose probe audit picks the moduli.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        force: bool,
    },
    /// Binarize and encrypt one image of an IDX file.
    Encrypt {
        #[arg(long, default_value = "keys")]
        keys: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run the encrypted forward pass.
    Infer {
        #[arg(long, default_value = "keys")]
        keys: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Run even if the message bound check fails.
        #[arg(long = "unsafe")]
        allow_unsafe: bool,
        #[arg(long)]
        force: bool,
    },
    /// Decrypt an encrypted score vector.
    Decrypt {
        #[arg(long, default_value = "keys")]
        keys: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Message-space and noise vetting of a float model on a probe set.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
        #[command(flatten)]
        overrides: ModelOverrides,
        #[arg(long)]
        moduli: Option<String>,
        /// Noise standard deviation as a fraction of q (default: the preset's).
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Time a spiking layer at several worker counts.
    Bench {
        #[command(flatten)]
        overrides: ModelOverrides,
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long, default_value_t = 64)]
        neurons: usize,
        /// Comma-separated worker counts; the first is the baseline.
        #[arg(long, default_value = "1,4")]
        workers: String,
    },
    /// Convert a float weight-exchange file into integer weights.
    Discretize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 40)]
        theta: i64,
        #[arg(long)]
        out: PathBuf,
        /// Probe images for the range audit stored in the output.
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
        #[arg(long)]
        force: bool,
    },
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let preset = parse_preset(&cli.preset)?;
    match cli.command {
        Command::Keygen { out, moduli, model, layers, margin, force } => {
            let moduli = moduli.as_deref().map(parse_moduli).transpose()?;
            let summary = commands::keygen_cmd(&KeygenArgs {
                out_dir: out,
                preset,
                moduli,
                model,
                layers,
                margin,
                seed: cli.seed,
                force,
            })?;
            if cli.json {
                let moduli: Vec<u64> = summary.params.iter().map(|p| p.plaintext_modulus).collect();
                print_json(&serde_json::json!({
                    "moduli": moduli,
                    "client_key": summary.client_path,
                    "server_key": summary.server_path,
                    "client_bytes": summary.client_bytes,
                    "server_bytes": summary.server_bytes,
                }))?;
            } else {
                print!("{}", summary.text());
            }
        }
        Command::Encrypt { keys, images, index, out, force } => {
            let bytes = commands::encrypt_cmd(&EncryptArgs { keys, images, index, out: out.clone(), seed: cli.seed, force })?;
            if !cli.json {
                println!("{}: {bytes} B", out.display());
            }
        }
        Command::Infer { keys, model, input, out, workers, allow_unsafe, force } => {
            let r = commands::infer_cmd(&InferArgs { keys, model, input, out, workers, allow_unsafe, force })?;
            if cli.json {
                print_json(&r)?;
            } else {
                print!("{}", report::infer_text(&r));
            }
        }
        Command::Decrypt { keys, input } => {
            let (class, scores) = commands::decrypt_cmd(&keys, &input)?;
            if cli.json {
                print_json(&serde_json::json!({ "class": class, "scores": scores }))?;
            } else {
                println!("class: {class}\nscores: {scores:?}");
            }
        }
        Command::Analyze { model, images, probes, overrides, moduli, sigma } => {
            let params = preset.params(None).map_err(|e| Error::Config(e.to_string()))?;
            let moduli = match moduli {
                Some(m) => parse_moduli(&m)?,
                None => default_moduli(preset, 1)?,
            };
            let r = commands::analyze_cmd(&AnalyzeArgs {
                model,
                images,
                probes,
                theta: overrides.theta,
                moduli,
                sigma: sigma.unwrap_or(params.noise_std),
            })?;
            if cli.json {
                print_json(&BoundReportJson::from(&r))?;
            } else {
                print!("{}", report::bound_report_text(&r));
            }
            if !r.pass {
                return Err(Error::Bound("at least one spiking layer exceeds p/2".into()));
            }
        }
        Command::Bench { overrides, modulus, neurons, workers } => {
            let workers = workers
                .split(',')
                .map(|w| w.trim().parse().map_err(|_| Error::Config(format!("bad worker count {w:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            let r = commands::bench_cmd(&BenchArgs {
                preset,
                modulus,
                tau: overrides.tau.unwrap_or(Tau::Finite(4)),
                theta: overrides.theta,
                timesteps: overrides.timesteps.unwrap_or(4),
                neurons,
                workers,
                seed: cli.seed,
            })?;
            if cli.json {
                print_json(&r)?;
            } else {
                print!("{}", report::bench_text(&r));
            }
        }
        Command::Discretize { model, theta, out, images, probes, force } => {
            let file = commands::discretize_cmd(&DiscretizeArgs { model, theta, out: out.clone(), images, probes, force })?;
            if cli.json {
                print_json(&serde_json::json!({ "out": out, "theta": file.theta, "audit": file.audit }))?;
            } else {
                println!("{}: theta = {}, v_th_hat = {}", out.display(), file.theta, file.v_th_hat);
                if let Some(a) = &file.audit {
                    for (l, layer) in a.layers.iter().enumerate() {
                        println!(
                            "spiking layer {}: max|I| = {}, H in [{}, {}] over {} probes",
                            l + 1,
                            layer.max_abs_input,
                            layer.min_h,
                            layer.max_h,
                            a.probes
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
