//! `udep`: encode and decode unitary matrices, generate test inputs, and run
//! the feedback benchmarks.
//!
//! Exit codes: 0 success, 2 usage, parse, I/O or payload format errors,
//! 3 non-unitary input, 4 input structure that does not fit the variant.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use udep::basis::Variant;
use udep::bench::output::{aggregate, write_aggregate, write_records};
use udep::bench::{self, BenchConfig, Experiment, LinkKind, Method, Overrange};
use udep::codec::{coefficient_bound, decode, decode_rotation, encode, encode_rotation, CodecError};
use udep::linalg::random::stream;
use udep::linalg::text::{format_matrix, parse_matrix};
use udep::linalg::{haar_orthogonal, haar_unitary, nearest_unitary, unitarity_defect, ComplexMatrix};
use udep::payload::{deserialize, serialize, EncodedPayload};
use udep::quant::{four_sigma_spec, overrange_spec};

const EXIT_USAGE: u8 = 2;
const EXIT_NOT_UNITARY: u8 = 3;
const EXIT_STRUCTURE: u8 = 4;

/// Inputs closer to unitary than this are encoded as given; the rest are
/// projected onto the nearest unitary first.
const PROJECTION_THRESHOLD: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "udep", version, about = "Compact real parametrization of unitary matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a matrix file into a UDEP payload.
    Encode(EncodeArgs),
    /// Decode a UDEP payload into a matrix file.
    Decode(DecodeArgs),
    /// Write a random matrix file.
    Rand(RandArgs),
    /// Report the unitarity defect of a matrix file.
    Check(CheckArgs),
    /// Run a benchmark and write per-trial CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    SpecialUnitary,
    Symmetric,
    Rotation,
    BlockDiagonal,
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    variant: VariantArg,
    /// Block sizes for the block-diagonal variant, e.g. `4,4`.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    /// Quantize with this many bits per coordinate instead of sending raw f64.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=16))]
    bits: Option<u8>,
    /// Range shrink factor (>= 1) or `4sigma`; needs --bits.
    #[arg(long, requires = "bits")]
    overrange: Option<String>,
    /// Unitarity tolerance; defaults to 1e-6·N.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RandKind {
    Unitary,
    Orthogonal,
    Symmetric,
}

#[derive(Args)]
struct RandArgs {
    n: usize,
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "unitary")]
    kind: RandKind,
}

#[derive(Args)]
struct CheckArgs {
    input: PathBuf,
    /// Defaults to 1e-6·N.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Awgn,
    Quant,
    Csi,
    Fris,
    Blockdiag,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Per-trial CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write mean/std per (method, sweep point) here.
    #[arg(long)]
    aggregate: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of dep, givens, naive, naive-proj.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Capacity sweep `a:b:step`, a list `a,b,c`, or one value.
    #[arg(long, conflicts_with = "bits")]
    capacity: Option<String>,
    /// Bit-depth sweep `a:b:step`, a list, or one value.
    #[arg(long)]
    bits: Option<String>,
    /// Range shrink factor (>= 1) or `4sigma`.
    #[arg(long)]
    overrange: Option<String>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        let code = if e.is_not_unitary() {
            EXIT_NOT_UNITARY
        } else {
            match e {
                CodecError::Structure(_) | CodecError::InvalidVariant(_) | CodecError::BranchDegeneracy { .. } => {
                    EXIT_STRUCTURE
                }
                _ => EXIT_USAGE,
            }
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::usage(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn tolerance(tol: Option<f64>, n: usize) -> Result<f64, Failure> {
    match tol {
        None => Ok(1e-6 * n as f64),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(Failure::usage(format!("--tol must be positive, got {t}"))),
    }
}

fn require_square(m: &ComplexMatrix) -> Result<usize, Failure> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(Failure::usage(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}

fn require_within(defect: f64, tol: f64) -> Result<(), Failure> {
    if defect <= tol {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NOT_UNITARY,
            message: format!("input is not unitary: defect {defect:e} exceeds tolerance {tol:e}"),
        })
    }
}

fn parse_overrange(s: &str) -> Result<Overrange, Failure> {
    s.parse::<Overrange>().map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_encode(args: EncodeArgs) -> Result<(), Failure> {
    let mut u = read_matrix(&args.input)?;
    let n = require_square(&u)?;
    let defect = unitarity_defect(&u);
    require_within(defect, tolerance(args.tol, n)?)?;

    let variant = match args.variant {
        VariantArg::Full => Variant::Full,
        VariantArg::SpecialUnitary => Variant::SpecialUnitary,
        VariantArg::Symmetric => Variant::Symmetric,
        VariantArg::Rotation => Variant::Rotation,
        VariantArg::BlockDiagonal => {
            if args.blocks.is_empty() {
                return Err(Failure::usage("--variant block-diagonal needs --blocks"));
            }
            Variant::BlockDiagonal(args.blocks.clone())
        }
    };
    if !args.blocks.is_empty() && !matches!(variant, Variant::BlockDiagonal(_)) {
        return Err(Failure::usage("--blocks only applies to --variant block-diagonal"));
    }
    variant.validate(n)?;

    if defect > PROJECTION_THRESHOLD * n as f64 {
        u = nearest_unitary(&u).map_err(|e| Failure::from(CodecError::from(e)))?;
        match variant {
            Variant::Rotation => u = u.real_part(),
            Variant::Symmetric => u = ComplexMatrix::from_fn(n, n, |r, c| (u[(r, c)] + u[(c, r)]) * 0.5),
            _ => {}
        }
    }

    let (coords, det_sign) = match variant {
        Variant::Rotation => {
            let code = encode_rotation(&u)?;
            (code.coords, Some(code.det_sign))
        }
        _ => (encode(&u, &variant)?, None),
    };
    let bound = match &variant {
        Variant::BlockDiagonal(blocks) => blocks.iter().map(|&b| coefficient_bound(b)).fold(0.0, f64::max),
        _ => coefficient_bound(n),
    };
    let mut payload = match args.bits {
        None => EncodedPayload::raw(&coords),
        Some(bits) => {
            let overrange = match &args.overrange {
                Some(s) => parse_overrange(s)?,
                None => Overrange::Factor(1.0),
            };
            let spec = match overrange {
                Overrange::Factor(o) => overrange_spec(bound, o, bits),
                Overrange::FourSigma => four_sigma_spec(coords.coords(), bound, bits),
            }
            .map_err(|e| Failure::usage(e.to_string()))?;
            EncodedPayload::quantized_uniform(&coords, spec)
        }
    };
    if det_sign.is_some() {
        payload.det_sign = det_sign;
    }
    let bytes = serialize(&payload).map_err(|e| Failure::usage(e.to_string()))?;
    write_atomic(&args.output, &bytes)?;
    println!("dims {}", coords.coords().len());
    println!("max_abs_coordinate {}", coords.max_abs());
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), Failure> {
    let bytes = fs::read(&args.input).map_err(|e| Failure::usage(format!("{}: {e}", args.input.display())))?;
    let format =
        |e: udep::payload::FormatError| Failure::usage(format!("{}: {e} (code {})", args.input.display(), e.code()));
    let payload = deserialize(&bytes).map_err(format)?;
    let u = match payload.variant {
        Variant::Rotation => decode_rotation(&payload.to_rotation_code().map_err(format)?)?,
        _ => decode(&payload.to_coords().map_err(format)?)?,
    };
    write_atomic(&args.output, format_matrix(&u).as_bytes())?;
    println!("defect {:e}", unitarity_defect(&u));
    Ok(())
}

fn cmd_rand(args: RandArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::usage("n must be positive"));
    }
    let mut rng = stream(args.seed);
    let u = match args.kind {
        RandKind::Unitary => haar_unitary(args.n, &mut rng),
        RandKind::Orthogonal => haar_orthogonal(args.n, &mut rng),
        RandKind::Symmetric => bench::sample_symmetric_unitary(args.n, &mut rng),
    };
    write_atomic(&args.output, format_matrix(&u).as_bytes())
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let u = read_matrix(&args.input)?;
    let n = require_square(&u)?;
    let defect = unitarity_defect(&u);
    println!("defect {defect:e}");
    require_within(defect, tolerance(args.tol, n)?)
}

/// `a:b:step` (inclusive), `a,b,c`, or a single value.
fn parse_sweep(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("invalid sweep `{s}`; expected a:b:step, a list, or a number"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && a <= b) {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + step * i as f64).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn bench_config(args: &BenchArgs) -> Result<BenchConfig, Failure> {
    let experiment = match args.experiment {
        ExperimentArg::Awgn => Experiment::AwgnSweep,
        ExperimentArg::Quant => Experiment::QuantSweep,
        ExperimentArg::Csi => Experiment::Csi,
        ExperimentArg::Fris => Experiment::Fris,
        ExperimentArg::Blockdiag => Experiment::BlockDiag,
    };
    let mut cfg = BenchConfig::new(experiment);
    match (experiment, &args.capacity, &args.bits) {
        (Experiment::AwgnSweep, _, Some(_)) => return Err(Failure::usage("bench awgn takes --capacity, not --bits")),
        (Experiment::QuantSweep, Some(_), _) => return Err(Failure::usage("bench quant takes --bits, not --capacity")),
        (_, Some(c), None) => {
            cfg.sweep = parse_sweep(c)?;
            cfg.link = LinkKind::Awgn;
        }
        (_, None, Some(b)) => {
            cfg.sweep = parse_sweep(b)?;
            cfg.link = LinkKind::Quantized;
        }
        _ => {}
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if !args.methods.is_empty() {
        cfg.methods = args
            .methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    if let Some(o) = &args.overrange {
        cfg.overrange = parse_overrange(o)?;
    }
    if let Some(s) = args.snr_db {
        cfg.snr_db = s;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if !args.blocks.is_empty() {
        if experiment != Experiment::BlockDiag {
            return Err(Failure::usage("--blocks only applies to bench blockdiag"));
        }
        cfg.blocks = args.blocks.clone();
        if args.n.is_none() {
            cfg.n = cfg.blocks.iter().sum();
        }
    }
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("UDEP_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::usage(format!(
                "UDEP_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let cfg = bench_config(&args)?;
    let rows = bench::run_with_threads(&cfg, thread_cap()?).map_err(|e| Failure::usage(e.to_string()))?;
    let mut buf = Vec::new();
    write_records(&mut buf, cfg.experiment, &rows).map_err(|e| Failure::usage(e.to_string()))?;
    match &args.out {
        Some(path) => write_atomic(path, &buf)?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| Failure::usage(e.to_string()))?,
    }
    if let Some(path) = &args.aggregate {
        let mut agg = Vec::new();
        write_aggregate(&mut agg, cfg.experiment, &aggregate(&rows)).map_err(|e| Failure::usage(e.to_string()))?;
        write_atomic(path, &agg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Rand(a) => cmd_rand(a),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("udep: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
