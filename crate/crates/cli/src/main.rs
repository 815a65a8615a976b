use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use securepix::codec::{netpbm, nominal_curve, Codec, KeyFile};
use securepix::config::RunConfig;
use securepix::metrics::{self, correlation_report, Direction};
use securepix::variation::VariationSpec;
use securepix::{montecarlo, Error};

/// Exit codes, one per failure family.
mod exit {
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IMAGE: u8 = 3;
    pub const KEY: u8 = 4;
    pub const CONFIG: u8 = 5;
    pub const DIMENSION: u8 = 6;
    pub const MODEL: u8 = 7;
}

#[derive(Parser, Debug)]
#[command(
    name = "securepix",
    version,
    about = "In-pixel FeFET image encryption simulator"
)]
struct Cli {
    /// Run configuration file (key = value lines).
    #[arg(long, global = true, env = "SECUREPIX_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable. Applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random key file.
    Keygen(KeygenArgs),
    /// Encrypt a PGM/PPM image with a key.
    Encrypt(EncryptArgs),
    /// Decrypt an encrypted PGM/PPM image with a key.
    Decrypt(DecryptArgs),
    /// Adjacent-pixel correlation of an image, and PSNR against a reference.
    Metrics(MetricsArgs),
    /// Write the nominal per-level transfer curves as CSV files.
    Curves(CurvesArgs),
    /// Monte Carlo spread of polarization and conductance per level.
    McReport(McArgs),
}

#[derive(Args, Debug)]
struct KeygenArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    rows: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    cols: u32,
    /// Number of levels; defaults to the configured `array.levels`.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    levels: Option<u32>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Variation seed. Without it the array is nominal.
    #[arg(long, conflicts_with = "no_variation")]
    seed: Option<u64>,
    /// Force a variation-free array.
    #[arg(long)]
    no_variation: bool,
}

#[derive(Args, Debug)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Original image; adds PSNR and max error to the report.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(2..))]
    points: u32,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// An error with the exit code it should produce.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = err
            .chain()
            .find_map(|e| e.downcast_ref::<Error>())
            .map_or(exit::OTHER, classify);
        Failure { code, err }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        anyhow::Error::from(err).into()
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Io(_) => exit::OTHER,
        Error::MalformedImage(_) => exit::IMAGE,
        Error::MalformedKeyFile { .. } => exit::KEY,
        Error::MalformedConfig { .. } => exit::CONFIG,
        Error::DimensionMismatch { .. } => exit::DIMENSION,
        _ => exit::MODEL,
    }
}

trait WithCode<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            err: e.into(),
        })
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .code(exit::CONFIG)?;
        cfg.merge_str(&text)
            .with_context(|| format!("in config {}", path.display()))
            .code(exit::CONFIG)?;
    }
    for assignment in &cli.overrides {
        cfg.apply_assignment(assignment)
            .with_context(|| format!("in --set {assignment}"))
            .code(exit::CONFIG)?;
    }
    cfg.validate()
        .context("invalid configuration")
        .code(exit::CONFIG)?;
    Ok(cfg)
}

fn read_key(path: &Path) -> anyhow::Result<KeyFile> {
    KeyFile::read(path).with_context(|| format!("key file {}", path.display()))
}

fn read_image(path: &Path) -> anyhow::Result<netpbm::Decoded> {
    netpbm::read(path).with_context(|| format!("image {}", path.display()))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn keygen(cfg: &RunConfig, args: &KeygenArgs) -> Result<(), Failure> {
    let levels = args.levels.unwrap_or(cfg.levels);
    if levels < 2 {
        return Err(anyhow!("--levels must be at least 2, got {levels}")).code(exit::USAGE);
    }
    let key = KeyFile::generate(
        args.rows as usize,
        args.cols as usize,
        levels,
        cfg.pva_min,
        cfg.pva_max,
        args.seed,
    )
    .context("generating key")?;
    write_file(&args.out, key.serialize())?;
    println!("key space: {} bits", key.key_bits());
    Ok(())
}

fn encrypt(cfg: RunConfig, args: &EncryptArgs) -> Result<(), Failure> {
    let key = read_key(&args.key)?;
    let image = read_image(&args.input)?.image;
    let codec = Codec::new(cfg).context("invalid configuration")?;
    let spec = if args.no_variation {
        VariationSpec::disabled()
    } else {
        cfg.variation
    };
    let enc = codec
        .encrypt_with(&image, &key, args.seed, &spec)
        .with_context(|| format!("encrypting {}", args.input.display()))?;
    write_file(&args.out, enc.to_netpbm())?;
    eprintln!(
        "programmed {}x{} array, max programmed-pixel drift {:.3e}, variation {}",
        key.rows(),
        key.cols(),
        enc.disturb.max_programmed_drift,
        enc.metadata.variation
    );
    Ok(())
}

fn decrypt(cfg: RunConfig, args: &DecryptArgs) -> Result<(), Failure> {
    let key = read_key(&args.key)?;
    let decoded = read_image(&args.input)?;
    if let Some(meta) = securepix::codec::EncryptionMetadata::from_comments(&decoded.comments) {
        if meta.config_hash != cfg.hash() {
            eprintln!("warning: image was encrypted under a different configuration");
        }
    }
    let codec = Codec::new(cfg).context("invalid configuration")?;
    let plain = codec
        .decrypt(&decoded.image, &key)
        .with_context(|| format!("decrypting {}", args.input.display()))?;
    write_file(&args.out, netpbm::encode(&plain, &[]))?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), metrics::fmt_sig)
}

fn metrics_cmd(args: &MetricsArgs) -> Result<(), Failure> {
    let image = read_image(&args.input)?.image;
    let report =
        correlation_report(&image).with_context(|| format!("image {}", args.input.display()))?;
    let mut rows: Vec<(String, String)> = Direction::ALL
        .iter()
        .map(|&d| (format!("corr_{}", d.name()), fmt_opt(report.get(d))))
        .collect();
    if let Some(reference) = &args.reference {
        let original = read_image(reference)?.image;
        let psnr = metrics::psnr(&original, &image).context("comparing against --reference")?;
        let max_err = metrics::max_abs_error(&original, &image)?;
        let psnr = if psnr.is_infinite() {
            "inf".to_string()
        } else {
            metrics::fmt_sig(psnr.db())
        };
        rows.push(("psnr_db".into(), psnr));
        rows.push(("max_abs_error".into(), max_err.to_string()));
    }
    let mut out = String::new();
    match args.format {
        Format::Csv => {
            out.push_str("metric,value\n");
            for (k, v) in &rows {
                out.push_str(&format!("{k},{v}\n"));
            }
        }
        Format::Text => {
            for (k, v) in &rows {
                out.push_str(&format!("{k:<16}{v}\n"));
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn curves(cfg: &RunConfig, args: &CurvesArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let arr = cfg.array_config(1, 1);
    let width = cfg.levels.to_string().len().max(2);
    for level in 1..=cfg.levels {
        let lut = nominal_curve(level, &cfg.pixel, &arr, args.points as usize)
            .with_context(|| format!("level {level} curve"))?;
        let path = args.out_dir.join(format!("level_{level:0width$}.csv"));
        write_file(&path, lut.to_csv())?;
    }
    println!("wrote {} curves to {}", cfg.levels, args.out_dir.display());
    Ok(())
}

fn mc_report(cfg: &RunConfig, args: &McArgs) -> Result<(), Failure> {
    let samples = usize::try_from(args.samples)
        .map_err(|_| anyhow!("--samples too large"))
        .code(exit::USAGE)?;
    let stats = montecarlo::level_statistics(
        &cfg.pixel,
        &cfg.array_config(1, 1),
        &cfg.variation,
        samples,
        args.seed,
    )?;
    write_file(&args.out, montecarlo::to_csv(&stats))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Keygen(a) => keygen(&cfg, a),
        Command::Encrypt(a) => encrypt(cfg, a),
        Command::Decrypt(a) => decrypt(cfg, a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Curves(a) => curves(&cfg, a),
        Command::McReport(a) => mc_report(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
