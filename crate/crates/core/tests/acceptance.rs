//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::time::Instant;

use arraydesign::matroids::MatroidKind;
use arraydesign::objective::SelectionState;
use arraydesign::{
    build_model, build_prior, certify, exhaustive_opt, greedy, lazy_greedy, matroid_greedy, mc_mse,
    nemhauser_bound, online_bound, partition_from_bins, posterior, sample_scene, scene_mse,
    simulate_measurements, stream, synthesize_scene, BoundOutcome, CandidateGrid, Design, SensingModel,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_SNRS: [f64; 5] = [30.0, 12.0, 10.0, 5.0, 0.0];

fn reference_model(snr_db: f64) -> SensingModel {
    let grid = CandidateGrid::from_aperture(-3.5, 3.5, 0.0625).unwrap();
    let prior = build_prior(1, 1.0, 450).unwrap();
    build_model(1.0, snr_db, 11, grid, prior).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn half_wavelength_array() -> Vec<f64> {
    (-5..=5).map(|k| k as f64 * 0.5).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let base = reference_model(30.0);
    let build = start.elapsed().as_secs_f64();
    let mut details = Vec::new();
    let mut pass = true;
    for snr in [10.0, 12.0, 30.0] {
        let m = base.at_snr(snr, 11).unwrap();
        let d = greedy(&m, 11).unwrap();
        let ok = d.sorted_positions() == half_wavelength_array();
        pass &= ok;
        details.push(format!("{snr} dB: {}", if ok { "λ/2 array" } else { "MISMATCH" }));
        if !ok {
            details.push(format!("{:?}", d.sorted_positions()));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 10.0;
    outcome(pass, format!("{}; {elapsed:.2} s total ({build:.2} s covariance build)", details.join(", ")))
}

fn criterion_2_3() -> (Outcome, Outcome) {
    let m = reference_model(5.0);
    let d = greedy(&m, 11).unwrap();
    let mi = d.mi_nats;
    let nem = nemhauser_bound(mi);
    let online = online_bound(&m, &d).unwrap();
    let c2 = outcome((mi - 12.54).abs() <= 0.5, format!("MI = {mi:.4} nats (target 12.54 ± 0.5)"));
    let c3 = outcome(
        (nem - 19.83).abs() <= 0.8 && (online - 17.45).abs() <= 1.0 && online >= mi,
        format!("Nemhauser = {nem:.4} (19.83 ± 0.8), online = {online:.4} (17.45 ± 1.0), online ≥ MI"),
    );
    (c2, c3)
}

fn criterion_4() -> Outcome {
    let m0 = reference_model(0.0);
    let d0 = greedy(&m0, 11).unwrap();
    let injected = certify(&m0, &d0, Some(1e-4)).unwrap();
    let (lo, hi) = match injected.truncation {
        BoundOutcome::Value(v) => v,
        BoundOutcome::Inapplicable => return outcome(false, "injected ε = 1e-4 reported inapplicable"),
    };
    let literal = (lo + 0.45).abs() <= 0.02 && (hi - 0.47).abs() <= 0.02;

    let m30 = m0.at_snr(30.0, 11).unwrap();
    let d30 = greedy(&m30, 11).unwrap();
    let r30 = certify(&m30, &d30, None).unwrap();
    let eps = r30.epsilon;
    let threshold = m30.noise_var() / 11f64.powf(1.5);
    let flagged = !r30.truncation.is_applicable() && eps >= threshold;
    // The model's own ε at 0 dB satisfies the hypothesis, so the bound must be reported.
    let r0 = certify(&m0, &d0, None).unwrap();
    let flag0 = r0.truncation.is_applicable() == (r0.epsilon < m0.noise_var() / 11f64.powf(1.5));
    outcome(
        literal && flagged && flag0,
        format!(
            "injected: ({lo:.4}, {hi:.4}) vs (-0.45, 0.47) ± 0.02; model ε = {eps:.4e}, 30 dB threshold {threshold:.3e} -> {}",
            if flagged { "inapplicable" } else { "NOT FLAGGED" }
        ),
    )
}

fn random_small_model(rng: &mut ChaCha8Rng) -> SensingModel {
    let n = rng.random_range(6..=14);
    let delta = [0.0625, 0.125, 0.25, 0.3][rng.random_range(0..4)];
    let min = -(rng.random_range(0..n) as f64) * delta;
    let grid = CandidateGrid::from_aperture(min, min + (n - 1) as f64 * delta, delta).unwrap();
    assert!(grid.len() <= 14);
    let prior = build_prior(rng.random_range(1..=2), 1.0, 120).unwrap();
    build_model(1.0, rng.random_range(0.0..=30.0), 11, grid, prior).unwrap()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let factor = 1.0 - (-1.0f64).exp();
    let mut worst_ratio = f64::INFINITY;
    let mut pass = true;
    let instances = 40;
    for _ in 0..instances {
        let m = random_small_model(&mut rng);
        let n = rng.random_range(1..=4);
        let g = greedy(&m, n).unwrap();
        let opt = exhaustive_opt(&m, n).unwrap();
        let online = online_bound(&m, &g).unwrap();
        pass &= g.mi_nats >= factor * opt.mi_nats - 1e-9;
        pass &= opt.mi_nats <= online + 1e-9;
        worst_ratio = worst_ratio.min(g.mi_nats / opt.mi_nats);
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    outcome(pass, format!("{instances} instances, worst greedy/OPT = {worst_ratio:.6} (≥ {factor:.4}); OPT ≤ online on all; {elapsed:.2} s"))
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    let mut p = pool.to_vec();
    p.shuffle(rng);
    p.truncate(k);
    p
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let base = reference_model(5.0);
    let models: Vec<SensingModel> = TARGET_SNRS.iter().map(|&s| base.at_snr(s, 11).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5AB);
    let n = base.len();
    let mut sub_worst = f64::INFINITY;
    let mut mono_worst = f64::INFINITY;
    let mut sub_violations = 0;
    let mut mono_violations = 0;
    for i in 0..1000 {
        let m = &models[i % models.len()];
        let x = rng.random_range(0..n);
        let pool: Vec<usize> = (0..n).filter(|&y| y != x).collect();
        let t_size = rng.random_range(0..=12);
        let t = random_subset(&mut rng, &pool, t_size);
        let s_size = rng.random_range(0..=t_size.min(8));
        let s: Vec<usize> = t[..s_size].to_vec();
        let gs = SelectionState::from_indices(m, &s).unwrap().marginal_gain(x).unwrap();
        let gt = SelectionState::from_indices(m, &t).unwrap().marginal_gain(x).unwrap();
        sub_worst = sub_worst.min(gs - gt);
        if gs - gt < -1e-9 {
            sub_violations += 1;
        }
    }
    for i in 0..1000 {
        let m = &models[i % models.len()];
        let x = rng.random_range(0..n);
        let pool: Vec<usize> = (0..n).filter(|&y| y != x).collect();
        let k = rng.random_range(0..=12);
        let s = random_subset(&mut rng, &pool, k);
        let g = SelectionState::from_indices(m, &s).unwrap().marginal_gain(x).unwrap();
        mono_worst = mono_worst.min(g);
        if g < -1e-12 {
            mono_violations += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        sub_violations == 0 && mono_violations == 0 && elapsed < 30.0,
        format!(
            "submodularity: 1000 triples, {sub_violations} violations, worst margin {sub_worst:.3e}; \
             monotonicity: 1000 pairs, {mono_violations} violations, smallest gain {mono_worst:.3e}; {elapsed:.2} s"
        ),
    )
}

fn criterion_7() -> Outcome {
    let base = reference_model(5.0);
    let mut pass = true;
    let mut evals = Vec::new();
    for snr in TARGET_SNRS {
        let m = base.at_snr(snr, 11).unwrap();
        let e = greedy(&m, 11).unwrap();
        let l = lazy_greedy(&m, 11).unwrap();
        pass &= e.indices == l.indices && e.gains == l.gains;
        evals.push(format!("{snr} dB {}/{}", l.evaluations, e.evaluations));
    }
    outcome(pass, format!("identical sequences; lazy/eager evaluations: {}", evals.join(", ")))
}

/// Gated at 30 dB, the SNR the reference partition design is specified at; the other target
/// SNRs are reported alongside.
fn criterion_8() -> Outcome {
    let base = reference_model(5.0);
    let matroid = partition_from_bins(base.grid(), 0.5, -0.25, &[1], 11).unwrap();
    let bins = match matroid.kind() {
        MatroidKind::Partition { bins, .. } => bins.clone(),
        MatroidKind::Uniform { .. } => unreachable!(),
    };
    let mut pass = true;
    let mut details = Vec::new();
    for snr in TARGET_SNRS {
        let m = base.at_snr(snr, 11).unwrap();
        let constrained = matroid_greedy(&m, &matroid).unwrap();
        let free = greedy(&m, 11).unwrap();
        let per_bin_ok = bins.iter().all(|b| b.iter().filter(|x| constrained.indices.contains(x)).count() <= 1);
        let ratio = constrained.mi_nats / free.mi_nats;
        pass &= per_bin_ok && constrained.len() == 11;
        if snr == 30.0 {
            pass &= ratio >= 0.85;
        }
        details.push(format!("{snr} dB: {:.3}/{:.3} = {:.3}", constrained.mi_nats, free.mi_nats, ratio));
    }
    outcome(pass, format!("≤1 sensor per bin, 11 sensors at every SNR; MI ratio (gate ≥ 0.85 at 30 dB) {}", details.join(", ")))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let base = reference_model(5.0);
    let designs: Vec<Design> = TARGET_SNRS.iter().map(|&s| lazy_greedy(&base.at_snr(s, 11).unwrap(), 11).unwrap()).collect();
    let table = mc_mse(&base, &designs, &TARGET_SNRS, 1000, 2024).unwrap();
    let k = TARGET_SNRS.len();
    let mut hits = 0;
    let mut details = Vec::new();
    for s in 0..k {
        let matched = table.get(s, s, k);
        let best = (0..k).map(|d| table.get(d, s, k).mean_mse).fold(f64::INFINITY, f64::min);
        let ok = matched.mean_mse <= best + matched.stderr_mse;
        if ok {
            hits += 1;
        }
        details.push(format!("{} dB {}", TARGET_SNRS[s], if ok { "ok" } else { "miss" }));
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(hits >= 4 && elapsed < 300.0, format!("matched design best/tied at {hits}/5 eval SNRs ({}); {elapsed:.1} s", details.join(", ")))
}

fn criterion_10() -> Outcome {
    let base = reference_model(5.0);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (i, snr) in [0.0, 10.0, 30.0].into_iter().enumerate() {
        let m = base.at_snr(snr, 11).unwrap();
        let d = greedy(&m, 11).unwrap();
        let table = mc_mse(&m, std::slice::from_ref(&d), &[snr], 500, 77 + i as u64).unwrap();
        let row = &table.rows[0];
        let rel = (row.mean_mse - row.trace_posterior_cov).abs() / row.trace_posterior_cov;
        worst = worst.max(rel);
        pass &= rel <= 0.05;
    }

    // Parseval: scene-domain error on a 4096-point ψ grid vs coefficient-domain error.
    let m = base.at_snr(5.0, 11).unwrap();
    let d = greedy(&m, 11).unwrap();
    let psi: Vec<f64> = (0..4096).map(|k| -0.5 + (k as f64 + 0.5) / 4096.0).collect();
    let mut parseval_worst: f64 = 0.0;
    for t in 0..5 {
        let scene = sample_scene(m.prior(), &mut stream(9, t, 0));
        let f = simulate_measurements(&m, &d.indices, &scene, &mut stream(9, t, 1)).unwrap();
        let post = posterior(&m, &d.indices, &f).unwrap();
        let coef = scene_mse(&scene, &post.mean).unwrap();
        let truth = synthesize_scene(&scene, &psi);
        let est = synthesize_scene(&arraydesign::SceneSample { beta: post.mean.clone() }, &psi);
        let grid: f64 = truth.iter().zip(&est).map(|(a, b): (&Complex64, &Complex64)| (a - b).norm_sqr()).sum::<f64>() / 4096.0;
        parseval_worst = parseval_worst.max((grid - coef).abs() / coef);
    }
    pass &= parseval_worst <= 1e-3;
    outcome(pass, format!("worst |MSE - trace Σ̂|/trace = {worst:.4} (≤ 0.05); Parseval rel. error {parseval_worst:.2e} (≤ 1e-3)"))
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture` or a filter; none apply here
    // except `--list`, which must print nothing runnable.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 uniform λ/2 array at high SNR", criterion_1()));
    let (c2, c3) = criterion_2_3();
    results.push(("2 mutual information at 5 dB", c2));
    results.push(("3 Nemhauser and online certificates", c3));
    results.push(("4 truncation bounds and applicability", criterion_4()));
    results.push(("5 greedy vs exhaustive guarantee", criterion_5()));
    results.push(("6 submodularity and monotonicity", criterion_6()));
    results.push(("7 lazy greedy equals greedy", criterion_7()));
    results.push(("8 partition-matroid designs", criterion_8()));
    results.push(("9 Monte-Carlo matched-SNR ordering", criterion_9()));
    results.push(("10 statistical self-consistency", criterion_10()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
