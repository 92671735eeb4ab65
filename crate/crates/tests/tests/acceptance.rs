//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Tests in this binary share a lock so that wall-clock limits and the timing
//! ratio are measured without competition from sibling tests.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use udep::basis::{CoordVector, Variant};
use udep::bench::output::{aggregate, find};
use udep::bench::{self, fris_optimal_theta, BenchConfig, Experiment, Method, Overrange};
use udep::codec::{
    coefficient_bound, decode, decode_rotation, encode, encode_rotation, givens_decode, givens_encode, CodecError,
    GivensParams,
};
use udep::linalg::random::{complex_gaussian_matrix, standard_normal, stream};
use udep::linalg::{haar_orthogonal, haar_unitary, unitarity_defect, ComplexMatrix};
use udep::metrics::logdet_capacity;
use udep::payload::{deserialize, quantized_body_len, serialize, EncodedPayload, PayloadBody, HEADER_LEN};
use udep::quant::QuantizerSpec;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes straight to the stdout handle so the line survives output capture.
fn report(id: u32, title: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{verdict} criterion {id:>2} [{title}]: {detail}");
    let _ = out.flush();
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

#[test]
fn criterion_01_round_trip_exactness() {
    let _g = serial();
    let start = Instant::now();
    let mut worst_ratio = 0.0f64;
    let mut failures = 0;
    let mut rng = stream(101);
    for n in [1usize, 2, 3, 4, 8, 16, 32] {
        for _ in 0..100 {
            let u = haar_unitary(n, &mut rng);
            let back = decode(&encode(&u, &Variant::Full).unwrap()).unwrap();
            let err = back.distance(&u);
            worst_ratio = worst_ratio.max(err / n as f64);
            if err > 1e-9 * n as f64 {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures == 0 && elapsed <= Duration::from_secs(60);
    report(
        1,
        "round-trip exactness",
        ok,
        &format!(
            "worst error/N {worst_ratio:.2e}, {failures} failures, runtime {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_02_boundedness() {
    let _g = serial();
    let mut rng = stream(202);
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    for n in [4usize, 8] {
        let bound = (n as f64).sqrt() * PI;
        for _ in 0..10_000 {
            let u = haar_unitary(n, &mut rng);
            let alpha = encode(&u, &Variant::Full).unwrap();
            let m = alpha.max_abs();
            worst_margin = worst_margin.max(m - bound);
            if m > bound + 1e-9 {
                violations += 1;
            }
        }
    }
    let mut witness_ok = true;
    for n in [4usize, 8] {
        let minus_i = ComplexMatrix::identity(n).scale_real(-1.0);
        let c = encode(&minus_i, &Variant::Full).unwrap();
        let first = (c.coords()[0] - (n as f64).sqrt() * PI).abs() <= 1e-12;
        let rest = c.coords()[1..].iter().all(|v| v.abs() <= 1e-12);
        witness_ok &= first && rest;
    }
    report(
        2,
        "boundedness",
        violations == 0 && witness_ok,
        &format!("max |alpha| - bound = {worst_margin:.3e}, {violations} violations, witness -I ok: {witness_ok}"),
    );
}

#[test]
fn criterion_03_dimension_census() {
    let _g = serial();
    let mut ok = true;
    for n in 1usize..=16 {
        ok &= Variant::Full.dims(n) == n * n;
        ok &= Variant::SpecialUnitary.dims(n) == n * n - 1;
        ok &= Variant::Symmetric.dims(n) == n * (n + 1) / 2;
        ok &= Variant::Rotation.dims(n) == n * (n - 1) / 2;
    }
    ok &= Variant::BlockDiagonal(vec![4, 4]).dims(8) == 32;

    // The rotation payload carries exactly one extra determinant bit.
    let mut rng = stream(303);
    let mut o = haar_orthogonal(5, &mut rng);
    if o.determinant().unwrap().re > 0.0 {
        for z in o.row_mut(0) {
            *z = -*z;
        }
    }
    let code = encode_rotation(&o).unwrap();
    ok &= code.coords.coords().len() == 10 && code.det_sign == -1;
    let p = EncodedPayload::from_rotation(&code, None);
    ok &= deserialize(&serialize(&p).unwrap()).unwrap().det_sign == Some(-1);
    report(
        3,
        "dimension census",
        ok,
        "N^2, N^2-1, N(N+1)/2, N(N-1)/2 + det bit for N in 1..=16",
    );
}

fn symmetric_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    bench::sample_symmetric_unitary(n, rng)
}

#[test]
fn criterion_04_variant_round_trips() {
    let _g = serial();
    let mut rng = stream(404);
    let mut worst_sym = 0.0f64;
    let mut worst_rot = 0.0f64;
    let mut worst_antisym = 0.0f64;
    let mut resampled = 0;
    let n = 8;
    for _ in 0..100 {
        let u = symmetric_unitary(n, &mut rng);
        let back = decode(&encode(&u, &Variant::Symmetric).unwrap()).unwrap();
        worst_sym = worst_sym.max(back.distance(&u));
        let full = encode(&u, &Variant::Full).unwrap();
        let tail = &full.coords()[n * (n + 1) / 2..];
        worst_antisym = worst_antisym.max(tail.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let n_rot = 5;
    let mut done = 0;
    while done < 100 {
        let o = haar_orthogonal(n_rot, &mut rng);
        match encode_rotation(&o) {
            Ok(code) => {
                let back = decode_rotation(&code).unwrap();
                worst_rot = worst_rot.max(back.distance(&o));
                done += 1;
            }
            Err(CodecError::BranchDegeneracy { .. }) => resampled += 1,
            Err(e) => panic!("rotation encode failed: {e}"),
        }
    }
    let ok = worst_sym <= 1e-9 * n as f64 && worst_rot <= 1e-9 * n_rot as f64 && worst_antisym <= 1e-9;
    report(
        4,
        "variant round-trips",
        ok,
        &format!(
            "symmetric err {worst_sym:.2e}, rotation err {worst_rot:.2e} ({resampled} resampled), antisymmetric coords {worst_antisym:.2e}"
        ),
    );
}

#[test]
fn criterion_05_unitarity_by_construction() {
    let _g = serial();
    let n = 8;
    let tol = 1e-9 * n as f64;
    let bound = coefficient_bound(n);
    let mut rng = stream(505);
    let mut worst_dep = 0.0f64;
    for _ in 0..1000 {
        let coords: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-bound..=bound)).collect();
        let u = decode(&CoordVector::new(n, Variant::Full, coords).unwrap()).unwrap();
        worst_dep = worst_dep.max(unitarity_defect(&u));
    }
    let mut worst_givens = 0.0f64;
    for _ in 0..1000 {
        let p = givens_encode(&haar_unitary(n, &mut rng)).unwrap();
        let noisy: Vec<f64> = p.to_vec().iter().map(|v| v + 0.5 * standard_normal(&mut rng)).collect();
        let q = GivensParams::from_vec(n, &noisy).unwrap().clamped();
        worst_givens = worst_givens.max(unitarity_defect(&givens_decode(&q)));
    }
    report(
        5,
        "unitarity by construction",
        worst_dep <= tol && worst_givens <= tol,
        &format!("worst defect: decode {worst_dep:.2e}, givens {worst_givens:.2e} (limit {tol:.0e})"),
    );
}

fn awgn_config(n: usize, trials: usize, seed: u64, sweep: Vec<f64>, methods: Vec<Method>) -> BenchConfig {
    let mut cfg = BenchConfig::new(Experiment::AwgnSweep);
    cfg.n = n;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.sweep = sweep;
    cfg.methods = methods;
    cfg
}

#[test]
fn criterion_06_awgn_ordering() {
    let _g = serial();
    let start = Instant::now();
    let cfg = awgn_config(8, 500, 6, vec![6.0], Method::ALL.to_vec());
    let agg = aggregate(&bench::run(&cfg).unwrap());
    let elapsed = start.elapsed();
    let mse = |m| find(&agg, m, 6.0).unwrap().mse.mean;
    let fid = |m| find(&agg, m, 6.0).unwrap().fidelity.map(|s| s.mean);
    let (dep, giv, proj, naive) = (
        mse(Method::Dep),
        mse(Method::Givens),
        mse(Method::NaiveProj),
        mse(Method::Naive),
    );
    let ordering = dep < giv && giv < proj && proj < naive;
    let dep_fid = fid(Method::Dep).unwrap();
    let fid_best = [Method::Givens, Method::NaiveProj]
        .into_iter()
        .all(|m| fid(m).is_none_or(|f| dep_fid > f));
    report(
        6,
        "AWGN ordering",
        ordering && fid_best && elapsed <= Duration::from_secs(120),
        &format!(
            "mse dep {dep:.4e}, givens {giv:.4e}, naive-proj {proj:.4e}, naive {naive:.4e}; fidelity dep {dep_fid:.4} (givens {:.4}, naive-proj {:.4}); runtime {}",
            fid(Method::Givens).unwrap(),
            fid(Method::NaiveProj).unwrap(),
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_07_awgn_slope() {
    let _g = serial();
    let cfg = awgn_config(8, 500, 7, vec![8.0, 10.0], vec![Method::Dep, Method::Naive]);
    let agg = aggregate(&bench::run(&cfg).unwrap());
    let ratio = |m| find(&agg, m, 8.0).unwrap().mse.mean / find(&agg, m, 10.0).unwrap().mse.mean;
    let (dep, naive) = (ratio(Method::Dep), ratio(Method::Naive));
    report(
        7,
        "AWGN slope",
        (3.0..=5.0).contains(&dep) && (1.6..=2.4).contains(&naive),
        &format!("MSE(C=8)/MSE(C=10): dep {dep:.3}, naive {naive:.3}"),
    );
}

#[test]
fn criterion_08_quantization_slope_and_overrange() {
    let _g = serial();
    let mut cfg = BenchConfig::new(Experiment::QuantSweep);
    cfg.n = 16;
    cfg.trials = 200;
    cfg.seed = 8;
    cfg.methods = vec![Method::Dep];
    cfg.sweep = vec![6.0, 7.0, 8.0, 9.0];
    let agg = aggregate(&bench::run(&cfg).unwrap());
    let m = |b: f64| find(&agg, Method::Dep, b).unwrap().mse.mean;
    let r6 = m(6.0) / m(7.0);
    let r8 = m(8.0) / m(9.0);

    let mut by_o = Vec::new();
    for o in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let mut c = cfg.clone();
        c.sweep = vec![8.0];
        c.overrange = Overrange::Factor(o);
        let a = aggregate(&bench::run(&c).unwrap());
        by_o.push((o, find(&a, Method::Dep, 8.0).unwrap().mse.mean));
    }
    let base = by_o[0].1;
    let (best_o, best) = by_o
        .iter()
        .copied()
        .fold((1.0, base), |acc, x| if x.1 < acc.1 { x } else { acc });
    let ok = (3.0..=5.0).contains(&r6) && (3.0..=5.0).contains(&r8) && best < base;
    report(
        8,
        "quantization slope and overrange",
        ok,
        &format!("MSE(b)/MSE(b+1): b=6 {r6:.3}, b=8 {r8:.3}; b=8 mse at o=1 {base:.3e}, best {best:.3e} at o={best_o}"),
    );
}

#[test]
fn criterion_09_csi_feedback() {
    let _g = serial();
    let start = Instant::now();
    let mut cfg = BenchConfig::new(Experiment::Csi);
    cfg.m = 32;
    cfg.n = 4;
    cfg.snr_db = 10.0;
    cfg.trials = 200;
    cfg.seed = 9;
    cfg.sweep = vec![4.0];
    cfg.methods = vec![Method::Dep, Method::Naive];
    let agg = aggregate(&bench::run(&cfg).unwrap());
    let elapsed = start.elapsed();
    let ratio = |m| find(&agg, m, 4.0).unwrap().ratio.unwrap().mean;
    let (dep, naive) = (ratio(Method::Dep), ratio(Method::Naive));
    report(
        9,
        "CSI feedback",
        dep >= 0.99 && dep >= naive && elapsed <= Duration::from_secs(120),
        &format!(
            "capacity ratio at C=4: dep {dep:.4} (target >= 0.99), naive {naive:.4}; runtime {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_10_fris_sanity_and_trend() {
    let _g = serial();
    let (m, k, n) = (16usize, 8usize, 16usize);
    let rho = 10.0;
    let mut rng = stream(1010);
    let mut dominated = 0;
    for _ in 0..20 {
        let h1 = complex_gaussian_matrix(m, n, &mut rng);
        let h2 = complex_gaussian_matrix(n, k, &mut rng);
        let theta = fris_optimal_theta(&h1, &h2).unwrap();
        let best = logdet_capacity(&h1.matmul(&theta).unwrap().matmul(&h2).unwrap(), rho).unwrap();
        let wins = (0..100).all(|_| {
            let q = haar_unitary(n, &mut rng);
            best >= logdet_capacity(&h1.matmul(&q).unwrap().matmul(&h2).unwrap(), rho).unwrap()
        });
        if wins {
            dominated += 1;
        }
    }

    let mut cfg = BenchConfig::new(Experiment::Fris);
    cfg.trials = 200;
    cfg.seed = 10;
    cfg.sweep = vec![2.0, 4.0, 6.0];
    cfg.methods = vec![Method::Dep, Method::Naive];
    let agg = aggregate(&bench::run(&cfg).unwrap());
    let curve = |meth| -> Vec<f64> {
        cfg.sweep
            .iter()
            .map(|&c| find(&agg, meth, c).unwrap().ratio.unwrap().mean)
            .collect()
    };
    let dep = curve(Method::Dep);
    let naive = curve(Method::Naive);
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
    let ok = dominated == 20 && monotone(&dep) && monotone(&naive) && dep.iter().zip(&naive).all(|(d, q)| d >= q);
    report(
        10,
        "FRIS sanity and trend",
        ok,
        &format!("optimum beat 100 Haar draws on {dominated}/20 channels; ratio at C=2,4,6: dep {dep:.4?}, naive {naive:.4?}"),
    );
}

fn median_round_trip(n: usize, runs: usize) -> Duration {
    let mut rng = stream(1111 + n as u64);
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let u = haar_unitary(n, &mut rng);
            let start = Instant::now();
            let back = decode(&encode(&u, &Variant::Full).unwrap()).unwrap();
            let t = start.elapsed();
            std::hint::black_box(back);
            t
        })
        .collect();
    times.sort();
    times[runs / 2]
}

#[test]
fn criterion_11_complexity_scaling() {
    let _g = serial();
    median_round_trip(32, 3);
    let t64 = median_round_trip(64, 20);
    let t128 = median_round_trip(128, 20);
    let ratio = t128.as_secs_f64() / t64.as_secs_f64();
    report(
        11,
        "complexity scaling",
        ratio <= 12.0,
        &format!(
            "median encode+decode N=64 {:.1} ms, N=128 {:.1} ms, ratio {ratio:.2}",
            t64.as_secs_f64() * 1e3,
            t128.as_secs_f64() * 1e3
        ),
    );
}

fn random_variant(n: usize, rng: &mut impl Rng) -> Variant {
    match rng.gen_range(0..5) {
        0 => Variant::Full,
        1 => Variant::SpecialUnitary,
        2 => Variant::Symmetric,
        3 => Variant::Rotation,
        _ => {
            let mut blocks = Vec::new();
            let mut left = n;
            while left > 0 {
                let b = rng.gen_range(1..=left);
                blocks.push(b);
                left -= b;
            }
            Variant::BlockDiagonal(blocks)
        }
    }
}

fn random_payload(rng: &mut impl Rng) -> (EncodedPayload, Option<Vec<(u8, usize)>>) {
    let n = rng.gen_range(2..=6);
    let variant = random_variant(n, rng);
    let dims = variant.dims(n);
    let bound = coefficient_bound(n);
    let coords: Vec<f64> = (0..dims).map(|_| rng.gen_range(-bound..=bound)).collect();
    let cv = CoordVector::new(n, variant.clone(), coords).unwrap();
    let mut payload;
    let mut layout = None;
    if rng.gen_bool(0.5) {
        payload = EncodedPayload::raw(&cv);
    } else {
        let mut segments = Vec::new();
        let mut left = dims;
        loop {
            let len = if left == 0 { 0 } else { rng.gen_range(1..=left) };
            let bits = rng.gen_range(1..=16u8);
            let half = rng.gen_range(0.1..=bound);
            segments.push((QuantizerSpec::new(bits, -half, half).unwrap(), len));
            left -= len;
            if left == 0 {
                break;
            }
        }
        layout = Some(segments.iter().map(|(s, l)| (s.bits(), *l)).collect());
        payload = EncodedPayload::quantized(&cv, &segments).unwrap();
    }
    if variant == Variant::Rotation {
        payload.det_sign = Some(if rng.gen_bool(0.5) { 1 } else { -1 });
    }
    (payload, layout)
}

#[test]
fn criterion_12_serialization() {
    let _g = serial();
    let mut rng = stream(1212);
    let mut mismatches = 0;
    let mut size_errors = 0;
    let mut corruption_misses = 0;
    let mut corruptions = 0;
    for i in 0..1000 {
        let (p, layout) = random_payload(&mut rng);
        let bytes = serialize(&p).unwrap();
        match deserialize(&bytes) {
            Ok(q) if q == p && serialize(&q).unwrap() == bytes => {}
            _ => mismatches += 1,
        }
        if let Some(layout) = layout {
            let extra = match &p.variant {
                Variant::BlockDiagonal(b) => 4 + 4 * b.len(),
                _ => 0,
            };
            if bytes.len() != HEADER_LEN + extra + quantized_body_len(&layout) {
                size_errors += 1;
            }
        } else if let PayloadBody::Raw(v) = &p.body {
            let extra = match &p.variant {
                Variant::BlockDiagonal(b) => 4 + 4 * b.len(),
                _ => 0,
            };
            if bytes.len() != HEADER_LEN + extra + 8 * v.len() {
                size_errors += 1;
            }
        }
        if i % 10 == 0 {
            for pos in 0..HEADER_LEN {
                for value in 0..=255u8 {
                    if value == bytes[pos] {
                        continue;
                    }
                    let mut bad = bytes.clone();
                    bad[pos] = value;
                    corruptions += 1;
                    let outcome = std::panic::catch_unwind(|| deserialize(&bad));
                    if !matches!(outcome, Ok(Err(_))) {
                        corruption_misses += 1;
                    }
                }
            }
        }
    }
    report(
        12,
        "serialization",
        mismatches == 0 && size_errors == 0 && corruption_misses == 0,
        &format!(
            "1000 payloads: {mismatches} round-trip mismatches, {size_errors} size mismatches; {corruption_misses}/{corruptions} header corruptions accepted"
        ),
    );
}
