//! Monte Carlo experiments comparing the coordinate codec against the Givens
//! and naive baselines.
//!
//! Every trial draws its inputs from `splitmix64(seed ^ trial)`; channel noise
//! for each (sweep point, method) pair comes from a further derived stream, so
//! results do not depend on scheduling. Trials run on the rayon pool and rows
//! come out ordered by sweep point, then method, then trial.

mod link;
pub mod output;

pub use link::{payload_dims, Link};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::CodecError;
use crate::linalg::random::{complex_gaussian_matrix, splitmix64, stream, trial_stream, Stream};
use crate::linalg::{haar_unitary, svd, svd_full, ComplexMatrix, LinalgError};
use crate::metrics::{fidelity, logdet_capacity, mse, stream_sinr_rate, waterfilling, MetricError};
use crate::quant::QuantError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    AwgnSweep,
    QuantSweep,
    Csi,
    Fris,
    BlockDiag,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::AwgnSweep => "awgn",
            Experiment::QuantSweep => "quant",
            Experiment::Csi => "csi",
            Experiment::Fris => "fris",
            Experiment::BlockDiag => "blockdiag",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "awgn" => Ok(Experiment::AwgnSweep),
            "quant" => Ok(Experiment::QuantSweep),
            "csi" => Ok(Experiment::Csi),
            "fris" => Ok(Experiment::Fris),
            "blockdiag" => Ok(Experiment::BlockDiag),
            other => Err(BenchError::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Dep,
    Givens,
    Naive,
    NaiveProj,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Dep, Method::Givens, Method::Naive, Method::NaiveProj];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Dep => "dep",
            Method::Givens => "givens",
            Method::Naive => "naive",
            Method::NaiveProj => "naive-proj",
        }
    }

    /// Whether reconstructions are unitary, so fidelity is defined.
    pub fn yields_unitary(&self) -> bool {
        !matches!(self, Method::Naive)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown method `{s}`")))
    }
}

/// Quantizer range policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overrange {
    /// Range = nominal range shrunk by this factor (≥ 1) about its center.
    Factor(f64),
    /// Half-range = min(nominal half-range, four times the RMS deviation of the values).
    FourSigma,
}

impl FromStr for Overrange {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "4sigma" || s == "four-sigma" {
            return Ok(Overrange::FourSigma);
        }
        match s.parse::<f64>() {
            Ok(o) if o.is_finite() && o >= 1.0 => Ok(Overrange::Factor(o)),
            _ => Err(BenchError::Config(format!(
                "overrange must be a number >= 1 or `4sigma`, got `{s}`"
            ))),
        }
    }
}

/// Meaning of the sweep values for the application experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// Sweep values are capacities in bits per channel use.
    Awgn,
    /// Sweep values are bits per coordinate.
    Quantized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub sweep: Vec<f64>,
    pub overrange: Overrange,
    pub snr_db: f64,
    /// CSI: base-station antennas. FRIS: receive antennas.
    pub m: usize,
    /// FRIS: transmit antennas.
    pub k: usize,
    pub blocks: Vec<usize>,
    pub link: LinkKind,
}

impl BenchConfig {
    /// Defaults per experiment.
    pub fn new(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            n: 8,
            trials: 10_000,
            seed: 0,
            methods: Method::ALL.to_vec(),
            sweep: (1..=10).map(f64::from).collect(),
            overrange: Overrange::Factor(1.0),
            snr_db: 10.0,
            m: 32,
            k: 8,
            blocks: vec![4, 4, 4],
            link: LinkKind::Awgn,
        };
        match experiment {
            Experiment::AwgnSweep => {}
            Experiment::QuantSweep => {
                cfg.link = LinkKind::Quantized;
                cfg.sweep = (2..=12).step_by(2).map(f64::from).collect();
            }
            Experiment::Csi => {
                cfg.n = 4;
                cfg.trials = 1_000;
                cfg.sweep = (1..=8).map(f64::from).collect();
            }
            Experiment::Fris => {
                cfg.n = 16;
                cfg.m = 16;
                cfg.k = 8;
                cfg.sweep = (1..=8).map(f64::from).collect();
            }
            Experiment::BlockDiag => {
                cfg.n = 12;
                cfg.trials = 1_000;
                cfg.sweep = vec![2.0, 4.0, 6.0, 8.0];
            }
        }
        cfg
    }

    fn link_kind(&self) -> LinkKind {
        match self.experiment {
            Experiment::AwgnSweep => LinkKind::Awgn,
            Experiment::QuantSweep => LinkKind::Quantized,
            _ => self.link,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |m: String| Err(BenchError::Config(m));
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be positive".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if self.sweep.is_empty() {
            return fail("at least one sweep value is required".into());
        }
        for &v in &self.sweep {
            if v.is_nan() || v <= 0.0 {
                return fail(format!("sweep values must be positive, got {v}"));
            }
            if self.link_kind() == LinkKind::Quantized && (v.fract() != 0.0 || !(1.0..=16.0).contains(&v)) {
                return fail(format!("bit depths must be integers in 1..=16, got {v}"));
            }
        }
        if let Overrange::Factor(o) = self.overrange {
            if !(o.is_finite() && o >= 1.0) {
                return fail(format!("overrange must be at least 1, got {o}"));
            }
        }
        if !self.snr_db.is_finite() {
            return fail("snr must be finite".into());
        }
        match self.experiment {
            Experiment::Csi if self.m < self.n => fail(format!("csi needs m >= n ({} < {})", self.m, self.n)),
            Experiment::Fris if self.m == 0 || self.k == 0 => fail("fris needs m, k >= 1".into()),
            Experiment::BlockDiag => {
                if self.blocks.is_empty() || self.blocks.contains(&0) {
                    return fail("block sizes must be positive".into());
                }
                let total: usize = self.blocks.iter().sum();
                if total != self.n {
                    return fail(format!("block sizes sum to {total}, n is {}", self.n));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn links(&self) -> Vec<Link> {
        self.sweep
            .iter()
            .map(|&v| match self.link_kind() {
                LinkKind::Awgn => Link::Awgn { capacity: v },
                LinkKind::Quantized => Link::Quantized {
                    bits: v as u8,
                    overrange: self.overrange,
                },
            })
            .collect()
    }
}

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub sweep: f64,
    pub trial: usize,
    pub mse: f64,
    pub fidelity: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    mse: f64,
    fidelity: Option<f64>,
    ratio: Option<f64>,
}

/// Stream for the channel noise of one (trial, sweep point, method) cell.
fn noise_stream(seed: u64, trial: usize, sweep_index: usize, method: Method) -> Stream {
    let cell = ((sweep_index as u64) << 8) | (method as u64 + 1);
    stream(splitmix64(splitmix64(seed ^ trial as u64) ^ cell))
}

/// Runs `trial_fn` for every trial in parallel; each call returns outcomes in
/// (sweep, method) order.
fn collect<F>(cfg: &BenchConfig, trial_fn: F) -> Result<Vec<TrialRecord>, BenchError>
where
    F: Fn(usize) -> Result<Vec<Outcome>, BenchError> + Sync,
{
    cfg.validate()?;
    let per_trial: Vec<Vec<Outcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(&trial_fn)
        .collect::<Result<_, _>>()?;
    let methods = cfg.methods.len();
    let mut rows = Vec::with_capacity(cfg.trials * methods * cfg.sweep.len());
    for (s, &sweep) in cfg.sweep.iter().enumerate() {
        for (mi, &method) in cfg.methods.iter().enumerate() {
            for (trial, outcomes) in per_trial.iter().enumerate() {
                let o = outcomes[s * methods + mi];
                rows.push(TrialRecord {
                    method,
                    sweep,
                    trial,
                    mse: o.mse,
                    fidelity: o.fidelity,
                    ratio: o.ratio,
                });
            }
        }
    }
    Ok(rows)
}

fn reconstruction_outcome(method: Method, u: &ComplexMatrix, u_hat: &ComplexMatrix) -> Result<Outcome, BenchError> {
    Ok(Outcome {
        mse: mse(u, u_hat)?,
        fidelity: if method.yields_unitary() {
            Some(fidelity(u, u_hat)?)
        } else {
            None
        },
        ratio: None,
    })
}

/// Dispatches on `cfg.experiment`.
pub fn run(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    match cfg.experiment {
        Experiment::AwgnSweep => run_awgn_sweep(cfg),
        Experiment::QuantSweep => run_quant_sweep(cfg),
        Experiment::Csi => run_csi(cfg),
        Experiment::Fris => run_fris(cfg),
        Experiment::BlockDiag => run_blockdiag(cfg),
    }
}

fn run_reconstruction(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    let links = cfg.links();
    collect(cfg, |t| {
        let u = haar_unitary(cfg.n, &mut trial_stream(cfg.seed, t as u64));
        let mut out = Vec::with_capacity(links.len() * cfg.methods.len());
        for (s, link) in links.iter().enumerate() {
            for &method in &cfg.methods {
                let mut rng = noise_stream(cfg.seed, t, s, method);
                let u_hat = link::transport(method, &u, link, &mut rng)?;
                out.push(reconstruction_outcome(method, &u, &u_hat)?);
            }
        }
        Ok(out)
    })
}

/// Haar matrices sent over AWGN links of the swept capacities.
pub fn run_awgn_sweep(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    expect_experiment(cfg, Experiment::AwgnSweep)?;
    run_reconstruction(cfg)
}

/// Haar matrices quantized at the swept bit depths.
pub fn run_quant_sweep(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    expect_experiment(cfg, Experiment::QuantSweep)?;
    run_reconstruction(cfg)
}

fn expect_experiment(cfg: &BenchConfig, e: Experiment) -> Result<(), BenchError> {
    if cfg.experiment == e {
        Ok(())
    } else {
        Err(BenchError::Config(format!(
            "expected a {e} configuration, got {}",
            cfg.experiment
        )))
    }
}

/// I.i.d. circularly-symmetric complex Gaussian entries with unit variance.
pub fn rayleigh<R: rand::Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> ComplexMatrix {
    complex_gaussian_matrix(m, n, rng)
}

/// `V·V^T` for Haar `V`, symmetrized to remove rounding.
pub fn sample_symmetric_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let v = haar_unitary(n, rng);
    let u = v.matmul(&v.transpose()).expect("square");
    ComplexMatrix::from_fn(n, n, |r, c| (u[(r, c)] + u[(c, r)]) * 0.5)
}

/// Unit-norm columns; zero columns are left alone.
fn normalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for c in 0..m.cols() {
        let norm = m.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for r in 0..m.rows() {
                out[(r, c)] = m[(r, c)] / norm;
            }
        }
    }
    out
}

/// Precoder feedback for a MIMO link: the receiver sends back the right
/// singular vectors and the waterfilling power fractions.
pub fn run_csi(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    expect_experiment(cfg, Experiment::Csi)?;
    let links = cfg.links();
    let total_power = 10f64.powf(cfg.snr_db / 10.0);
    collect(cfg, |t| {
        let h = rayleigh(cfg.m, cfg.n, &mut trial_stream(cfg.seed, t as u64));
        let s = svd(&h)?;
        let gains: Vec<f64> = s.singulars.iter().map(|x| x * x).collect();
        let alloc = waterfilling(&gains, total_power)?;
        let capacity: f64 = gains.iter().zip(&alloc.powers).map(|(g, p)| (1.0 + g * p).log2()).sum();
        let fractions: Vec<f64> = alloc.powers.iter().map(|p| p / total_power).collect();
        let fraction_segment = [link::Segment {
            lo: 0.0,
            hi: 1.0,
            len: fractions.len(),
        }];
        let v = &s.right;

        let mut out = Vec::with_capacity(links.len() * cfg.methods.len());
        for (si, l) in links.iter().enumerate() {
            for &method in &cfg.methods {
                let mut rng = noise_stream(cfg.seed, t, si, method);
                let mut v_hat = link::transport(method, v, l, &mut rng)?;
                if method == Method::Naive {
                    v_hat = normalize_columns(&v_hat);
                }
                let fraction_link = match *l {
                    Link::Quantized { bits, .. } => Link::Quantized {
                        bits,
                        overrange: Overrange::Factor(1.0),
                    },
                    other => other,
                };
                let received = link::transmit(&fractions, &fraction_segment, &fraction_link, &mut rng)?;
                let powers = renormalize_powers(&received, total_power);
                let rate = stream_sinr_rate(&h, &s.left, &v_hat, &powers)?;
                let mut o = reconstruction_outcome(method, v, &v_hat)?;
                o.ratio = Some(rate / capacity);
                out.push(o);
            }
        }
        Ok(out)
    })
}

/// Negative fractions are dropped and the rest rescaled to the power budget.
fn renormalize_powers(received: &[f64], total_power: f64) -> Vec<f64> {
    let clipped: Vec<f64> = received.iter().map(|r| r.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum > 0.0 {
        clipped.iter().map(|r| r * total_power / sum).collect()
    } else {
        vec![total_power / received.len() as f64; received.len()]
    }
}

/// Unitary reflection matrix maximizing the cascade capacity of `H1·Θ·H2`:
/// `Θ = V₁·U₂^H`, aligning the right singular vectors of `H1` with the left
/// singular vectors of `H2`, both in descending order.
pub fn fris_optimal_theta(h1: &ComplexMatrix, h2: &ComplexMatrix) -> Result<ComplexMatrix, BenchError> {
    if h1.cols() != h2.rows() {
        return Err(LinalgError::DimensionMismatch {
            left: h1.shape(),
            right: h2.shape(),
        }
        .into());
    }
    let s1 = svd_full(h1)?;
    let s2 = svd_full(h2)?;
    Ok(s1.right.matmul(&s2.left.adjoint())?)
}

/// Feedback of the optimal fully-connected surface configuration; the ratio
/// compares the capacity of the reconstructed configuration to the optimum.
pub fn run_fris(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    expect_experiment(cfg, Experiment::Fris)?;
    let links = cfg.links();
    let rho = 10f64.powf(cfg.snr_db / 10.0);
    collect(cfg, |t| {
        let mut rng = trial_stream(cfg.seed, t as u64);
        let h1 = rayleigh(cfg.m, cfg.n, &mut rng);
        let h2 = rayleigh(cfg.n, cfg.k, &mut rng);
        let theta = fris_optimal_theta(&h1, &h2)?;
        let best = logdet_capacity(&h1.matmul(&theta)?.matmul(&h2)?, rho)?;

        let mut out = Vec::with_capacity(links.len() * cfg.methods.len());
        for (si, l) in links.iter().enumerate() {
            for &method in &cfg.methods {
                let mut noise = noise_stream(cfg.seed, t, si, method);
                let mut theta_hat = link::transport(method, &theta, l, &mut noise)?;
                if method == Method::Naive {
                    // A passive surface cannot amplify: cap the spectral norm at one.
                    let top = svd(&theta_hat)?.singulars[0];
                    if top > 1.0 {
                        theta_hat = theta_hat.scale(Complex64::new(1.0 / top, 0.0));
                    }
                }
                let achieved = logdet_capacity(&h1.matmul(&theta_hat)?.matmul(&h2)?, rho)?;
                let mut o = reconstruction_outcome(method, &theta, &theta_hat)?;
                o.ratio = Some(achieved / best);
                out.push(o);
            }
        }
        Ok(out)
    })
}

/// Transport of block-diagonal unitaries; mse and fidelity are per-block means.
pub fn run_blockdiag(cfg: &BenchConfig) -> Result<Vec<TrialRecord>, BenchError> {
    expect_experiment(cfg, Experiment::BlockDiag)?;
    let links = cfg.links();
    collect(cfg, |t| {
        let mut rng = trial_stream(cfg.seed, t as u64);
        let blocks: Vec<ComplexMatrix> = cfg.blocks.iter().map(|&b| haar_unitary(b, &mut rng)).collect();
        let mut out = Vec::with_capacity(links.len() * cfg.methods.len());
        for (si, l) in links.iter().enumerate() {
            for &method in &cfg.methods {
                let mut noise = noise_stream(cfg.seed, t, si, method);
                let received = link::transport_blocks(method, &blocks, l, &mut noise)?;
                let count = blocks.len() as f64;
                let mut mse_sum = 0.0;
                let mut fid_sum = 0.0;
                for (b, b_hat) in blocks.iter().zip(&received) {
                    let o = reconstruction_outcome(method, b, b_hat)?;
                    mse_sum += o.mse;
                    fid_sum += o.fidelity.unwrap_or(0.0);
                }
                out.push(Outcome {
                    mse: mse_sum / count,
                    fidelity: method.yields_unitary().then_some(fid_sum / count),
                    ratio: None,
                });
            }
        }
        Ok(out)
    })
}

/// Runs on a dedicated pool with at most `threads` workers.
pub fn run_with_threads(cfg: &BenchConfig, threads: Option<usize>) -> Result<Vec<TrialRecord>, BenchError> {
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BenchError::Config(e.to_string()))?;
            pool.install(|| run(cfg))
        }
        _ => run(cfg),
    }
}
