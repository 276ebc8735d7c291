//! Command-line front end: the sender/receiver protocol plus the analysis
//! harness, as thin wrappers over the library calls.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use vbq_core::baselines::{
    codebook_quantize, kmeans_codebook, lloyd_ec_codebook, uniform_quantize,
};
use vbq_core::codec::{read_container, write_container, FrequencyTable, TableMode};
use vbq_core::quantizer::{quantize_vector, sweep_lambda, RdConfig};
use vbq_core::{GaussianPosterior, PriorModel};

use crate::analysis::{
    collapse_report, compare_rd, rate_info_scatter, toy_regression_demo, write_channel_reports,
    write_rd_curves, write_scatter, write_toy_report,
};
use crate::csv::{self, fmt_f64};
use crate::source::{MeanSpec, SyntheticSource, VarianceSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: crate::csv::CsvError,
    },
    #[error("invalid prior spec `{0}` (expected std-normal | gaussian:MEAN,VAR | empirical:PATH | empirical-gaussian:PATH)")]
    BadPriorSpec(String),
    #[error("invalid lambda list `{0}`")]
    BadLambdas(String),
    #[error("--mode external-table needs --table-file")]
    MissingTableFile,
    #[error(transparent)]
    Prior(#[from] vbq_core::prior::PriorError),
    #[error(transparent)]
    Quantize(#[from] vbq_core::quantizer::QuantizeError),
    #[error(transparent)]
    Codec(#[from] vbq_core::codec::CodecError),
    #[error(transparent)]
    Baseline(#[from] vbq_core::baselines::BaselineError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
}

impl CliError {
    /// Machine-readable error category and its process exit code.
    pub fn category(&self) -> (&'static str, i32) {
        use vbq_core::codec::CodecError;
        match self {
            CliError::Io { .. } => ("io", 4),
            CliError::Parse { .. } | CliError::BadPriorSpec(_) | CliError::BadLambdas(_) => {
                ("parse", 3)
            }
            CliError::MissingTableFile => ("parse", 3),
            CliError::Codec(e) => match e {
                CodecError::BadMagic
                | CodecError::BadVersion(_)
                | CodecError::Truncated
                | CodecError::ChecksumMismatch
                | CodecError::MissingExternalTable => ("format", 5),
                _ => ("coding", 6),
            },
            CliError::Prior(_)
            | CliError::Quantize(_)
            | CliError::Baseline(_)
            | CliError::Analysis(_) => ("numeric", 7),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vbq",
    about = "Posterior-aware quantization of latent vectors onto a dyadic quantile grid, \
             with lossless entropy coding and classical baselines",
    after_help = "File formats:\n  \
        posteriors: CSV `mu,sigma2`, one row per dimension (# comments allowed)\n  \
        sweep output: CSV `lambda,total_rate_bits,entropy_coded_bits,mse_z,log_q`\n  \
        codebooks: CSV `grid_point,probability` with an origin comment line\n  \
        containers: binary, magic `VBQ1` (see `decode`)\n\
        All floats print with 17 significant digits."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PriorArg {
    /// Prior: std-normal | gaussian:MEAN,VAR | empirical:PATH (piecewise fit
    /// of samples, 64 knots) | empirical-gaussian:PATH (zero-mean fit)
    #[arg(long, default_value = "std-normal")]
    pub prior: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantize a posterior table and write a compressed container.
    Encode {
        /// Posterior CSV (`mu,sigma2`).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        prior: PriorArg,
        /// Rate penalty (> 0).
        #[arg(long, conflicts_with = "median", required_unless_present = "median")]
        lambda: Option<f64>,
        /// Infinite-penalty mode: every dimension encodes as the median.
        #[arg(long)]
        median: bool,
        /// Where the frequency table travels.
        #[arg(long, value_parser = ["header-table", "external-table"], default_value = "header-table")]
        mode: String,
        /// Table file (written in external-table mode).
        #[arg(long)]
        table_file: Option<PathBuf>,
        /// Hard stop for the per-dimension rate search.
        #[arg(long)]
        rate_cap: Option<u8>,
        /// Output container path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a container back to reconstructions (CSV `z_hat`).
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Table file (required for external-table containers).
        #[arg(long)]
        table_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate-distortion sweep over a lambda grid.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        prior: PriorArg,
        /// Comma-separated lambdas (e.g. `0.015625,0.5,16`).
        #[arg(long)]
        lambdas: String,
        #[arg(long)]
        rate_cap: Option<u8>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classical quantizer baselines over the `mu` column of the input.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Synthetic-source studies (reports are CSV with provenance comments).
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Uniform grid with spacing delta.
    Uniform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-means codebook.
    Kmeans {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropy-constrained generalized Lloyd codebook.
    Lloyd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k_init: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Write a seeded synthetic posterior table (mu,sigma2 CSV).
    Source {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        dims: usize,
        /// Constant posterior variance; log-uniform over [1e-4, 1] when
        /// omitted.
        #[arg(long)]
        fixed_sigma2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-parameter regression: posterior-aware vs distance-matched
    /// uniform rounding.
    Toy {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// sigma_a / sigma_b of the mean-field posterior.
        #[arg(long, default_value_t = 0.1)]
        sigma_ratio: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate vs information content over the code-point alphabet.
    Scatter {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 4096)]
        dims: usize,
        #[arg(long, default_value_t = 0.003)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-channel bit allocation on a collapsed/informative channel mix.
    Collapse {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        /// Dimensions per channel.
        #[arg(long, default_value_t = 256)]
        dims: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate-distortion curves: quantizer vs classical baselines.
    RdCompare {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2048)]
        dims: usize,
        /// Comma-separated lambda grid for the quantizer.
        #[arg(long, default_value = "0.015625,0.044194,0.125,0.35355,1,2.8284,8")]
        lambdas: String,
        /// Comma-separated delta grid for the uniform baseline.
        #[arg(long, default_value = "0.05,0.1,0.2,0.4,0.8,1.6,3.2")]
        deltas: String,
        /// Comma-separated k grid for the k-means baseline.
        #[arg(long, default_value = "2,4,8,16,32,64")]
        ks: String,
        /// Comma-separated lambda grid for the Lloyd baseline.
        #[arg(long, default_value = "0.002,0.01,0.05,0.25,1")]
        lloyd_lambdas: String,
        /// Constant posterior variance; heterogeneous when omitted.
        #[arg(long)]
        fixed_sigma2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_posteriors(path: &Path) -> Result<Vec<GaussianPosterior>, CliError> {
    csv::parse_posteriors(&read_to_string(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// One f64 per line; `#` comments and blank lines allowed.
fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = t.parse::<f64>().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            source: crate::csv::CsvError::BadNumber {
                line: idx + 1,
                column: "value",
                value: t.to_string(),
            },
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn parse_prior_spec(spec: &str) -> Result<PriorModel, CliError> {
    if spec == "std-normal" {
        return Ok(PriorModel::StandardNormal);
    }
    if let Some(rest) = spec.strip_prefix("gaussian:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            if let (Ok(mean), Ok(var)) = (parts[0].trim().parse(), parts[1].trim().parse()) {
                return Ok(PriorModel::scaled_gaussian(mean, var)?);
            }
        }
        return Err(CliError::BadPriorSpec(spec.to_string()));
    }
    if let Some(path) = spec.strip_prefix("empirical:") {
        let samples = read_samples(Path::new(path))?;
        return Ok(PriorModel::fit_empirical_piecewise(&samples, 64)?);
    }
    if let Some(path) = spec.strip_prefix("empirical-gaussian:") {
        let samples = read_samples(Path::new(path))?;
        return Ok(PriorModel::fit_empirical_gaussian(&samples)?);
    }
    Err(CliError::BadPriorSpec(spec.to_string()))
}

pub fn parse_lambda_list(list: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let t = part.trim();
        let v = if t == "inf" {
            f64::INFINITY
        } else {
            t.parse::<f64>()
                .map_err(|_| CliError::BadLambdas(list.to_string()))?
        };
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::BadLambdas(list.to_string()));
    }
    Ok(out)
}

fn parse_usize_list(list: &str) -> Result<Vec<usize>, CliError> {
    list.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::BadLambdas(list.to_string()))
        })
        .collect()
}

fn rd_config(lambda: Option<f64>, median: bool, rate_cap: Option<u8>) -> RdConfig {
    let mut cfg = if median {
        RdConfig::median_only()
    } else {
        RdConfig::new(lambda.unwrap_or(1.0))
    };
    if let Some(cap) = rate_cap {
        cfg = cfg.with_rate_cap(Some(cap));
    }
    cfg
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode {
            input,
            prior,
            lambda,
            median,
            mode,
            table_file,
            rate_cap,
            out,
        } => {
            let posteriors = read_posteriors(&input)?;
            let prior = parse_prior_spec(&prior.prior)?;
            let cfg = rd_config(lambda, median, rate_cap);
            let qv = quantize_vector(&posteriors, &prior, &cfg)?;
            let table = FrequencyTable::from_symbols(&qv.code_points);
            let table_mode = if mode == "external-table" {
                TableMode::ExternalTable
            } else {
                TableMode::HeaderTable
            };
            if table_mode == TableMode::ExternalTable {
                let path = table_file.ok_or(CliError::MissingTableFile)?;
                write_bytes(&path, &table.to_bytes())?;
            }
            let bytes = write_container(&prior, &qv.code_points, &table, table_mode)?;
            write_bytes(&out, &bytes)?;

            let container = read_container(&bytes)?;
            let k = posteriors.len();
            let mse = posteriors
                .iter()
                .zip(&qv.reconstructions)
                .map(|(p, &z)| (z - p.mu) * (z - p.mu))
                .sum::<f64>()
                / k as f64;
            let total = container.total_bits();
            println!(
                "K={k} total_bits={total} header_bits={} payload_bits={} bits_per_dim={} mse_z={}",
                container.header_bytes * 8,
                container.payload.bit_len(),
                fmt_f64(total as f64 / k as f64),
                fmt_f64(mse)
            );
            Ok(())
        }
        Command::Decode {
            input,
            table_file,
            out,
        } => {
            let bytes = read_bytes(&input)?;
            let container = read_container(&bytes)?;
            let external = match table_file {
                Some(path) => {
                    let table_bytes = read_bytes(&path)?;
                    Some(FrequencyTable::read_bytes(&table_bytes)?.0)
                }
                None => None,
            };
            let symbols = container.decode_symbols(external.as_ref())?;
            let mut z_hat = Vec::with_capacity(symbols.len());
            for sym in &symbols {
                z_hat.push(container.prior.quantile(sym.value())?);
            }
            write_bytes(&out, csv::write_reconstructions(&z_hat).as_bytes())?;
            println!("K={}", symbols.len());
            Ok(())
        }
        Command::Sweep {
            input,
            prior,
            lambdas,
            rate_cap,
            out,
        } => {
            let posteriors = read_posteriors(&input)?;
            let prior_model = parse_prior_spec(&prior.prior)?;
            let grid = parse_lambda_list(&lambdas)?;
            let cfg = rd_config(Some(1.0), false, rate_cap);
            let points = sweep_lambda(&posteriors, &prior_model, &grid, None, &cfg)?;
            let comments = vec![
                format!("input={}", input.display()),
                format!("prior={}", prior.prior),
            ];
            write_bytes(&out, csv::write_rd_points(&points, &comments).as_bytes())?;
            for p in &points {
                println!(
                    "lambda={} total_rate_bits={} entropy_coded_bits={} mse_z={} log_q={}",
                    fmt_f64(p.lambda),
                    p.total_rate_bits,
                    p.entropy_coded_bits,
                    fmt_f64(p.mse_z),
                    fmt_f64(p.log_q)
                );
            }
            Ok(())
        }
        Command::Baseline(cmd) => {
            let (input, out, codebook) = match cmd {
                BaselineCommand::Uniform { input, delta, out } => {
                    let means: Vec<f64> = read_posteriors(&input)?.iter().map(|p| p.mu).collect();
                    let (_, cb) = uniform_quantize(&means, delta)?;
                    (means, out, cb)
                }
                BaselineCommand::Kmeans {
                    input,
                    k,
                    seed,
                    out,
                } => {
                    let means: Vec<f64> = read_posteriors(&input)?.iter().map(|p| p.mu).collect();
                    let cb = kmeans_codebook(&means, k, seed)?;
                    (means, out, cb)
                }
                BaselineCommand::Lloyd {
                    input,
                    k_init,
                    lambda,
                    seed,
                    out,
                } => {
                    let means: Vec<f64> = read_posteriors(&input)?.iter().map(|p| p.mu).collect();
                    let cb = lloyd_ec_codebook(&means, k_init, lambda, seed)?;
                    (means, out, cb)
                }
            };
            let (_, rate_bits, mse) = codebook_quantize(&input, &codebook)?;
            write_bytes(&out, csv::write_codebook(&codebook).as_bytes())?;
            println!(
                "codewords={} rate_bits={} bits_per_dim={} mse={}",
                codebook.grid.len(),
                fmt_f64(rate_bits),
                fmt_f64(rate_bits / input.len() as f64),
                fmt_f64(mse)
            );
            Ok(())
        }
        Command::Analyze(cmd) => run_analyze(cmd),
    }
}

fn run_analyze(cmd: AnalyzeCommand) -> Result<(), CliError> {
    match cmd {
        AnalyzeCommand::Source {
            seed,
            dims,
            fixed_sigma2,
            out,
        } => {
            let mut source = SyntheticSource::new(seed, dims);
            if let Some(s2) = fixed_sigma2 {
                source = source.with_variances(VarianceSpec::Constant(s2));
            }
            let posteriors = source.generate();
            let mut text = format!("# seed={seed} dims={dims}\n");
            text.push_str(&csv::write_posteriors(&posteriors));
            write_bytes(&out, text.as_bytes())?;
            println!("K={dims}");
            Ok(())
        }
        AnalyzeCommand::Toy {
            seed,
            sigma_ratio,
            out,
        } => {
            let report = toy_regression_demo(seed, sigma_ratio)?;
            let mut text = format!("# seed={seed} sigma_ratio={}\n", fmt_f64(sigma_ratio));
            text.push_str(&write_toy_report(&report));
            write_bytes(&out, text.as_bytes())?;
            println!(
                "vbq_log_q={} uniform_log_q={}",
                fmt_f64(report.vbq.log_q),
                fmt_f64(report.uniform.log_q)
            );
            Ok(())
        }
        AnalyzeCommand::Scatter {
            seed,
            dims,
            lambda,
            out,
        } => {
            let posteriors = SyntheticSource::new(seed, dims).generate();
            let qv = quantize_vector(
                &posteriors,
                &PriorModel::StandardNormal,
                &RdConfig::new(lambda),
            )?;
            let table = FrequencyTable::from_symbols(&qv.code_points);
            let report = rate_info_scatter(&table);
            let comments = vec![format!(
                "seed={seed} dims={dims} lambda={} prior=std-normal",
                fmt_f64(lambda)
            )];
            write_bytes(&out, write_scatter(&report, &comments).as_bytes())?;
            println!(
                "alphabet={} slope={} rank_correlation={}",
                report.points.len(),
                fmt_f64(report.slope),
                fmt_f64(report.rank_correlation)
            );
            Ok(())
        }
        AnalyzeCommand::Collapse {
            seed,
            lambda,
            dims,
            out,
        } => {
            let channels = collapse_channels(seed, dims);
            let reports = collapse_report(&channels, &PriorModel::StandardNormal, lambda)?;
            let comments = vec![format!(
                "seed={seed} dims_per_channel={dims} lambda={} prior=std-normal \
                 channels=0,1,2:collapsed 3,4,5:informative",
                fmt_f64(lambda)
            )];
            write_bytes(&out, write_channel_reports(&reports, &comments).as_bytes())?;
            for r in &reports {
                println!(
                    "channel={} vbq_bits_mean={} uniform_bits_mean={} kl_mean={}",
                    r.channel,
                    fmt_f64(r.vbq_bits_mean),
                    fmt_f64(r.uniform_bits_mean),
                    fmt_f64(r.kl_mean)
                );
            }
            Ok(())
        }
        AnalyzeCommand::RdCompare {
            seed,
            dims,
            lambdas,
            deltas,
            ks,
            lloyd_lambdas,
            fixed_sigma2,
            out,
        } => {
            let mut source = SyntheticSource::new(seed, dims);
            if let Some(s2) = fixed_sigma2 {
                source = source.with_variances(VarianceSpec::Constant(s2));
            }
            let posteriors = source.generate();
            let rows = compare_rd(
                &posteriors,
                &PriorModel::StandardNormal,
                &parse_lambda_list(&lambdas)?,
                &parse_lambda_list(&deltas)?,
                &parse_usize_list(&ks)?,
                &parse_lambda_list(&lloyd_lambdas)?,
            )?;
            let comments = vec![format!(
                "seed={seed} dims={dims} variances={}",
                match fixed_sigma2 {
                    Some(s2) => format!("constant:{}", fmt_f64(s2)),
                    None => "log-uniform:1e-4..1".to_string(),
                }
            )];
            write_bytes(&out, write_rd_curves(&rows, &comments).as_bytes())?;
            println!("rows={}", rows.len());
            Ok(())
        }
    }
}

/// The six-channel mix used by `analyze collapse`: three channels collapsed
/// onto the prior (mu = 0, sigma2 = 1, KL = 0) and three informative ones
/// (tight posteriors, means pushed away from zero).
pub fn collapse_channels(seed: u64, dims: usize) -> Vec<Vec<GaussianPosterior>> {
    let mut channels = Vec::with_capacity(6);
    for c in 0..6u64 {
        if c < 3 {
            channels.push(vec![GaussianPosterior::new(0.0, 1.0); dims]);
        } else {
            let source = SyntheticSource::new(seed ^ (0x9e37 + c), dims)
                .with_variances(VarianceSpec::Constant(0.01))
                .with_means(MeanSpec::Gaussian { sigma0_sq: 1.0 });
            let posts = source
                .generate()
                .into_iter()
                .map(|p| {
                    // Push |mu| >= 1 so the channel carries real signal.
                    let mu = if p.mu >= 0.0 { p.mu + 1.0 } else { p.mu - 1.0 };
                    GaussianPosterior::new(mu, p.sigma2)
                })
                .collect();
            channels.push(posts);
        }
    }
    channels
}
