//! Scene sampling, noisy measurements, Gaussian posterior inference and the paired
//! Monte-Carlo reconstruction experiment.
//!
//! The kernel is real, so posterior solves run on the real `Σ_ff` factor and are applied to
//! the real and imaginary parts of the data independently.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{DesignError, Result};
use crate::linalg::{chol_logdet, cholesky_in_place, forward_solve};
use crate::model::{noise_var_for_snr, PriorSpec, SensingModel};
use crate::optimizer::Design;

/// Deterministic random stream for a `(seed, trial, channel)` triple.
///
/// Channel 0 draws the scene of a trial; channel `s + 1` draws the noise for the `s`-th
/// evaluation SNR. Every design sees the same streams at a given trial.
pub fn stream(seed: u64, trial: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(1 << 16).wrapping_add(channel));
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * (std * FRAC_1_SQRT_2)
}

/// One draw of the Fourier coefficients, ordered by `m = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSample {
    pub beta: Vec<Complex64>,
}

impl SceneSample {
    pub fn zeros(len: usize) -> Self {
        SceneSample { beta: vec![Complex64::new(0.0, 0.0); len] }
    }

    /// Half-width `M` of the coefficient window.
    pub fn m_half(&self) -> usize {
        self.beta.len() / 2
    }

    /// `Σ |β_m|²`, the scene energy.
    pub fn energy(&self) -> f64 {
        self.beta.iter().map(Complex64::norm_sqr).sum()
    }
}

/// `β_m = (a + ib) σ_m / √2` with independent standard normals `a, b`.
pub fn sample_scene<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R) -> SceneSample {
    SceneSample { beta: prior.variances().iter().map(|v| complex_normal(rng, v.sqrt())).collect() }
}

fn check_nonempty(model: &SensingModel, set: &[usize]) -> Result<()> {
    if set.is_empty() {
        return Err(DesignError::InvalidArgument("sensor set must be nonempty".into()));
    }
    set.iter().try_for_each(|&x| model.check_index(x))
}

fn check_scene(model: &SensingModel, scene: &SceneSample) -> Result<()> {
    if scene.beta.len() != model.prior().len() {
        return Err(DesignError::DimensionMismatch { expected: model.prior().len(), got: scene.beta.len() });
    }
    Ok(())
}

fn project(row: &[f64], beta: &[Complex64]) -> Complex64 {
    row.iter().zip(beta).fold(Complex64::new(0.0, 0.0), |acc, (k, b)| acc + b * *k)
}

/// Noise-free samples `Σ_m K(x, m) β_m` at the sensors in `set`.
pub fn noiseless_measurements(model: &SensingModel, set: &[usize], scene: &SceneSample) -> Result<Vec<Complex64>> {
    check_nonempty(model, set)?;
    check_scene(model, scene)?;
    Ok(set.iter().map(|&x| project(&model.kernel_row(x), &scene.beta)).collect())
}

/// Noisy samples `f_n = Σ_m K(x_n, m) β_m + w_n`, `w_n ~ CN(0, σ_w²)`.
pub fn simulate_measurements<R: Rng + ?Sized>(
    model: &SensingModel,
    set: &[usize],
    scene: &SceneSample,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let mut f = noiseless_measurements(model, set, scene)?;
    let std = model.noise_var().sqrt();
    for v in &mut f {
        *v += complex_normal(rng, std);
    }
    Ok(f)
}

/// Linear map from measurements to the posterior mean, with the posterior covariance pieces.
///
/// With `L Lᵀ = Σ_ff = σ_w² I + C_SS` and `W = L⁻¹ K_S D` (`|S| x |M|`):
/// `μ = Wᵀ L⁻¹ f` and `Σ̂ = D - Wᵀ W`.
#[derive(Debug, Clone)]
pub struct PosteriorOperator {
    n: usize,
    m: usize,
    chol: Vec<f64>,
    w: Vec<f64>,
    prior_var: Vec<f64>,
    logdet_meas: f64,
    noise_var: f64,
}

impl PosteriorOperator {
    pub fn new(model: &SensingModel, set: &[usize]) -> Result<Self> {
        check_nonempty(model, set)?;
        let n = set.len();
        let var = model.prior().variances();
        let m = var.len();
        let mut chol = vec![0.0; n * n];
        for (i, &x) in set.iter().enumerate() {
            for (j, &y) in set.iter().enumerate() {
                chol[i * n + j] = model.cov(x, y);
            }
            chol[i * n + i] += model.noise_var();
        }
        cholesky_in_place(&mut chol, n)
            .ok_or_else(|| DesignError::Numerical("Cholesky of the measurement covariance failed".into()))?;

        // W = L⁻¹ (K_S D), forward substitution applied to whole rows.
        let mut w = vec![0.0; n * m];
        for (i, &x) in set.iter().enumerate() {
            let row = model.kernel_row(x);
            for (c, (k, v)) in row.iter().zip(var).enumerate() {
                w[i * m + c] = k * v;
            }
        }
        for i in 0..n {
            for k in 0..i {
                let l = chol[i * n + k];
                if l != 0.0 {
                    let (head, tail) = w.split_at_mut(i * m);
                    let src = &head[k * m..(k + 1) * m];
                    for (dst, s) in tail[..m].iter_mut().zip(src) {
                        *dst -= l * s;
                    }
                }
            }
            let d = chol[i * n + i];
            for v in &mut w[i * m..(i + 1) * m] {
                *v /= d;
            }
        }
        let logdet_meas = chol_logdet(&chol, n);
        Ok(PosteriorOperator { n, m, chol, w, prior_var: var.to_vec(), logdet_meas, noise_var: model.noise_var() })
    }

    /// Posterior mean for a measurement vector.
    pub fn mean(&self, measurements: &[Complex64]) -> Result<Vec<Complex64>> {
        if measurements.len() != self.n {
            return Err(DesignError::DimensionMismatch { expected: self.n, got: measurements.len() });
        }
        let mut re: Vec<f64> = measurements.iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = measurements.iter().map(|z| z.im).collect();
        forward_solve(&self.chol, self.n, &mut re);
        forward_solve(&self.chol, self.n, &mut im);
        let mut mu = vec![Complex64::new(0.0, 0.0); self.m];
        for i in 0..self.n {
            let coef = Complex64::new(re[i], im[i]);
            for (dst, &wv) in mu.iter_mut().zip(&self.w[i * self.m..(i + 1) * self.m]) {
                *dst += coef * wv;
            }
        }
        Ok(mu)
    }

    /// `trace Σ̂ = Σ σ_m² - ‖W‖²_F`, the expected squared error of the posterior mean.
    pub fn trace_cov(&self) -> f64 {
        self.prior_var.iter().sum::<f64>() - self.w.iter().map(|v| v * v).sum::<f64>()
    }

    /// `log det Σ_ff`.
    pub fn logdet_measurement_cov(&self) -> f64 {
        self.logdet_meas
    }

    /// `log det Σ_ff - |S| log σ_w²`, equal to the design objective.
    pub fn information(&self) -> f64 {
        self.logdet_meas - self.n as f64 * self.noise_var.ln()
    }

    /// Full posterior covariance `D - WᵀW` (row-major `|M| x |M|`).
    pub fn covariance(&self) -> Vec<f64> {
        let m = self.m;
        let mut cov = vec![0.0; m * m];
        for a in 0..m {
            cov[a * m + a] = self.prior_var[a];
        }
        for i in 0..self.n {
            let row = &self.w[i * m..(i + 1) * m];
            for a in 0..m {
                let wa = row[a];
                if wa == 0.0 {
                    continue;
                }
                for (dst, &wb) in cov[a * m..(a + 1) * m].iter_mut().zip(row) {
                    *dst -= wa * wb;
                }
            }
        }
        cov
    }
}

/// Gaussian posterior of the coefficients given measurements at `set`.
#[derive(Debug, Clone)]
pub struct PosteriorResult {
    pub mean: Vec<Complex64>,
    /// Real symmetric (hence Hermitian) `|M| x |M|` covariance, row-major.
    pub cov: Vec<f64>,
    /// `log det Σ̂ = Σ log σ_m² - G(S)`.
    pub logdet_cov: f64,
    pub trace_cov: f64,
    /// `log det Σ_ff` of the measurement covariance used in the solves.
    pub logdet_measurement_cov: f64,
}

pub fn posterior(model: &SensingModel, set: &[usize], measurements: &[Complex64]) -> Result<PosteriorResult> {
    let op = PosteriorOperator::new(model, set)?;
    let mean = op.mean(measurements)?;
    let log_prior: f64 = model.prior().variances().iter().map(|v| v.ln()).sum();
    Ok(PosteriorResult {
        mean,
        cov: op.covariance(),
        logdet_cov: log_prior - op.information(),
        trace_cov: op.trace_cov(),
        logdet_measurement_cov: op.logdet_measurement_cov(),
    })
}

/// Squared coefficient error `Σ |β_m - β̂_m|²`, equal to the scene-domain squared error.
pub fn scene_mse(truth: &SceneSample, estimate: &[Complex64]) -> Result<f64> {
    if truth.beta.len() != estimate.len() {
        return Err(DesignError::DimensionMismatch { expected: truth.beta.len(), got: estimate.len() });
    }
    Ok(truth.beta.iter().zip(estimate).map(|(a, b)| (a - b).norm_sqr()).sum())
}

/// Evaluates `β(ψ) = Σ_m β_m e^{j2πmψ}` at each `ψ`.
pub fn synthesize_scene(scene: &SceneSample, psi: &[f64]) -> Vec<Complex64> {
    let m_half = scene.m_half() as i64;
    psi.iter()
        .map(|&p| {
            scene
                .beta
                .iter()
                .enumerate()
                .map(|(i, b)| b * Complex64::from_polar(1.0, 2.0 * PI * (i as i64 - m_half) as f64 * p))
                .sum()
        })
        .collect()
}

/// One cell of the Monte-Carlo table.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub design: usize,
    pub eval_snr_db: f64,
    pub trials: usize,
    pub mean_mse: f64,
    pub stderr_mse: f64,
    pub trace_posterior_cov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseTable {
    /// Design-major, then evaluation SNR in the given order.
    pub rows: Vec<MseRow>,
}

impl MseTable {
    pub fn get(&self, design: usize, eval: usize, n_eval: usize) -> &MseRow {
        &self.rows[design * n_eval + eval]
    }
}

/// Paired Monte-Carlo MSE of posterior-mean reconstruction.
///
/// Trial `t` draws its scene from `stream(seed, t, 0)` and, for the `s`-th evaluation SNR, its
/// noise from `stream(seed, t, s + 1)`; all designs share those draws. The SNR of a design with
/// `n` sensors maps to `σ_w² = P / (n · 10^{snr/10})`. Trials may run on any number of
/// threads; the reduction is in trial order.
pub fn mc_mse(model: &SensingModel, designs: &[Design], eval_snrs_db: &[f64], trials: usize, seed: u64) -> Result<MseTable> {
    if trials == 0 {
        return Err(DesignError::InvalidArgument("at least one trial is required".into()));
    }
    let power = model.prior().power();
    // operators[d][s]
    let mut operators = Vec::with_capacity(designs.len());
    let mut rows_k = Vec::with_capacity(designs.len());
    for d in designs {
        let mut per_snr = Vec::with_capacity(eval_snrs_db.len());
        for &snr in eval_snrs_db {
            let nv = noise_var_for_snr(power, d.len().max(1), snr)?;
            per_snr.push(PosteriorOperator::new(&model.with_noise_var(nv)?, &d.indices)?);
        }
        operators.push(per_snr);
        rows_k.push(d.indices.iter().map(|&x| model.kernel_row(x)).collect::<Vec<_>>());
    }
    let max_len = designs.iter().map(Design::len).max().unwrap_or(0);
    let cells = designs.len() * eval_snrs_db.len();

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let scene = sample_scene(model.prior(), &mut stream(seed, t as u64, 0));
            let clean: Vec<Vec<Complex64>> =
                rows_k.iter().map(|rows| rows.iter().map(|r| project(r, &scene.beta)).collect()).collect();
            let mut out = vec![0.0; cells];
            for (s, &snr) in eval_snrs_db.iter().enumerate() {
                let mut rng = stream(seed, t as u64, s as u64 + 1);
                let unit: Vec<Complex64> = (0..max_len).map(|_| complex_normal(&mut rng, 1.0)).collect();
                for (d, design) in designs.iter().enumerate() {
                    let std = noise_var_for_snr(power, design.len().max(1), snr)?.sqrt();
                    let f: Vec<Complex64> = clean[d].iter().zip(&unit).map(|(c, u)| c + u * std).collect();
                    let mu = operators[d][s].mean(&f)?;
                    out[d * eval_snrs_db.len() + s] = scene_mse(&scene, &mu)?;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells);
    for (d, ops) in operators.iter().enumerate() {
        for (s, &snr) in eval_snrs_db.iter().enumerate() {
            let idx = d * eval_snrs_db.len() + s;
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for t in &per_trial {
                sum += t[idx];
                sumsq += t[idx] * t[idx];
            }
            let n = trials as f64;
            let mean = sum / n;
            let stderr = if trials > 1 { ((sumsq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt() } else { 0.0 };
            rows.push(MseRow {
                design: d,
                eval_snr_db: snr,
                trials,
                mean_mse: mean,
                stderr_mse: stderr,
                trace_posterior_cov: ops[s].trace_cov(),
            });
        }
    }
    Ok(MseTable { rows })
}
