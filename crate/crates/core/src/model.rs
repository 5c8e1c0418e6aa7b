//! Discrete far-field observation model.
//!
//! A sensor at position `x` observes `f(x) = Σ_m K(x, m) β_m + w` with the real sinc kernel
//! `K(x, m) = sinc(m + 2x/λ)`, independent circular Gaussian coefficients
//! `β_m ~ CN(0, σ_m²)` and white noise `w ~ CN(0, σ_w²)`. Everything the objective needs is
//! the candidate-candidate signal covariance `C = K D Kᵀ`, which is assembled once here.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{DesignError, Result};

/// Normalized sinc, `sin(πx)/(πx)`.
///
/// The argument is reduced to `[-1/2, 1/2]` around the nearest integer before calling `sin`,
/// so integer arguments give exact zeros and large arguments keep full precision.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let k = x.round();
    let frac = x - k;
    if frac == 0.0 {
        return 0.0;
    }
    // sin(π(k + frac)) = (-1)^k sin(π frac)
    let s = (PI * frac).sin();
    let s = if (k as i64).rem_euclid(2) == 0 { s } else { -s };
    s / (PI * x)
}

/// Riemann zeta at `s > 1`, by direct summation plus an Euler-Maclaurin tail.
pub(crate) fn zeta(s: f64) -> f64 {
    const K: u32 = 64;
    let head: f64 = (1..K).rev().map(|m| (m as f64).powf(-s)).sum();
    let k = K as f64;
    let tail = k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * k.powf(-s - 5.0) / 30240.0;
    head + tail
}

/// Prior mass outside the retained index window, with a rigorous bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    /// Bracket midpoint.
    pub value: f64,
    /// Half-width of the bracket around `value`.
    pub half_width: f64,
}

/// Gaussian prior on the Fourier coefficients, `σ_m² = c / |m|^{2r}` (and `c` at `m = 0`),
/// normalized so the untruncated series sums to `power`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    smoothness: u32,
    power: f64,
    m_half: usize,
    variances: Vec<f64>,
    tail: TailMass,
}

impl PriorSpec {
    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    /// Expected scene power `P` of the untruncated prior.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn m_half(&self) -> usize {
        self.m_half
    }

    /// Number of retained coefficients, `2 M + 1`.
    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    /// Variances ordered by `m = -M..=M`.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `σ_m²` for `|m| <= M`, `None` outside the window.
    pub fn variance(&self, m: i64) -> Option<f64> {
        let idx = m + self.m_half as i64;
        if idx < 0 {
            return None;
        }
        self.variances.get(idx as usize).copied()
    }

    /// Coefficient index `m` of the `i`-th stored variance.
    pub fn index_to_m(&self, i: usize) -> i64 {
        i as i64 - self.m_half as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.variances.len()).map(|i| self.index_to_m(i))
    }

    /// Prior mass discarded by truncation, `ε = Σ_{|m|>M} σ_m²`.
    pub fn tail_epsilon(&self) -> TailMass {
        self.tail
    }

    /// Sum of the retained variances, `Σ_{|m|<=M} σ_m²`.
    pub fn retained_power(&self) -> f64 {
        self.variances.iter().sum()
    }
}

/// Builds the polynomially decaying prior of smoothness `r` and power `power`, truncated to
/// `m ∈ {-m_half, ..., m_half}`.
pub fn build_prior(r: u32, power: f64, m_half: usize) -> Result<PriorSpec> {
    if r == 0 {
        return Err(DesignError::InvalidArgument(
            "smoothness r must be at least 1 (the variance series diverges for r = 0)".into(),
        ));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(DesignError::InvalidArgument(format!("power must be positive, got {power}")));
    }
    if m_half == 0 {
        return Err(DesignError::InvalidArgument("truncation half-width must be at least 1".into()));
    }
    let s = 2.0 * r as f64;
    let c = power / (1.0 + 2.0 * zeta(s));

    let m = m_half as i64;
    let variances: Vec<f64> = (-m..=m)
        .map(|k| if k == 0 { c } else { c / (k.unsigned_abs() as f64).powf(s) })
        .collect();

    // Σ_{m > M} m^{-s}: explicit partial sum up to 10 M, then the remainder bracketed by
    // ∫_{10M+1}^∞ and ∫_{10M}^∞ of x^{-s}.
    let upper = 10 * m_half;
    let partial: f64 = ((m_half + 1)..=upper).rev().map(|k| (k as f64).powf(-s)).sum();
    let rem_lo = ((upper + 1) as f64).powf(1.0 - s) / (s - 1.0);
    let rem_hi = (upper as f64).powf(1.0 - s) / (s - 1.0);
    let tail = TailMass {
        value: 2.0 * c * (partial + 0.5 * (rem_lo + rem_hi)),
        half_width: 2.0 * c * 0.5 * (rem_hi - rem_lo),
    };

    Ok(PriorSpec { smoothness: r, power, m_half, variances, tail })
}

/// Uniform grid of candidate positions (in the same length unit as the wavelength).
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    positions: Vec<f64>,
    delta: f64,
    aperture: (f64, f64),
}

impl CandidateGrid {
    /// Positions `min + k·delta` for `k = 0..=floor((max - min)/delta)`.
    ///
    /// A relative slack of `1e-9` on the step count keeps the right endpoint when the span is
    /// an exact multiple of `delta` up to rounding.
    pub fn from_aperture(min: f64, max: f64, delta: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || !(min < max) {
            return Err(DesignError::InvalidArgument(format!(
                "aperture must satisfy min < max, got [{min}, {max}]"
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(DesignError::InvalidArgument(format!("grid spacing must be positive, got {delta}")));
        }
        let steps = ((max - min) / delta * (1.0 + 1e-9)).floor() as usize;
        let positions = (0..=steps).map(|k| min + k as f64 * delta).filter(|&x| x <= max + 1e-12 * delta).collect();
        Ok(CandidateGrid { positions, delta, aperture: (min, max) })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, index: usize) -> f64 {
        self.positions[index]
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn aperture(&self) -> (f64, f64) {
        self.aperture
    }

    /// Whether the grid lands on the right aperture endpoint.
    pub fn includes_right_endpoint(&self) -> bool {
        self.positions.last().is_some_and(|&x| (x - self.aperture.1).abs() <= 1e-9 * self.delta)
    }
}

/// Kernel row of a sensor at `x`: `sinc(m + 2x/λ)` for `m = -M..=M`.
pub fn kernel_row(x: f64, prior: &PriorSpec, lambda: f64) -> Vec<f64> {
    let shift = 2.0 * x / lambda;
    prior.indices().map(|m| sinc(m as f64 + shift)).collect()
}

/// Immutable sensing model: wavelength, noise level, candidates, prior and the precomputed
/// signal covariance `C_xy = Σ_m K(x,m) K(y,m) σ_m²`.
#[derive(Debug, Clone)]
pub struct SensingModel {
    lambda: f64,
    noise_var: f64,
    grid: CandidateGrid,
    prior: PriorSpec,
    signal_cov: Arc<Vec<f64>>,
}

/// Noise variance that realizes `snr_db` under the convention `SNR = P / (N σ_w²)`.
pub fn noise_var_for_snr(power: f64, n_ref: usize, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(DesignError::InvalidArgument(format!(
            "SNR must be finite (got {snr_db} dB); zero noise makes the information unbounded"
        )));
    }
    if n_ref == 0 {
        return Err(DesignError::InvalidArgument("reference sensor count must be at least 1".into()));
    }
    let v = power / (n_ref as f64 * 10f64.powf(snr_db / 10.0));
    if !(v > 0.0) || !v.is_finite() {
        return Err(DesignError::InvalidArgument(format!("SNR {snr_db} dB gives noise variance {v}")));
    }
    Ok(v)
}

/// Builds the model at a target SNR defined relative to `n_ref` sensors.
pub fn build_model(lambda: f64, snr_db: f64, n_ref: usize, grid: CandidateGrid, prior: PriorSpec) -> Result<SensingModel> {
    let noise_var = noise_var_for_snr(prior.power(), n_ref, snr_db)?;
    SensingModel::new(lambda, noise_var, grid, prior)
}

impl SensingModel {
    pub fn new(lambda: f64, noise_var: f64, grid: CandidateGrid, prior: PriorSpec) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(DesignError::InvalidArgument(format!("wavelength must be positive, got {lambda}")));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(DesignError::InvalidArgument(format!(
                "noise variance must be positive and finite, got {noise_var}"
            )));
        }
        if grid.is_empty() {
            return Err(DesignError::InvalidArgument("candidate grid is empty".into()));
        }
        let signal_cov = Arc::new(assemble_signal_cov(&grid, &prior, lambda));
        Ok(SensingModel { lambda, noise_var, grid, prior, signal_cov })
    }

    /// Same geometry and prior at a different noise level; the covariance is shared.
    pub fn with_noise_var(&self, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(DesignError::InvalidArgument(format!(
                "noise variance must be positive and finite, got {noise_var}"
            )));
        }
        Ok(SensingModel { noise_var, ..self.clone() })
    }

    /// Same geometry and prior at another SNR (relative to `n_ref` sensors).
    pub fn at_snr(&self, snr_db: f64, n_ref: usize) -> Result<Self> {
        self.with_noise_var(noise_var_for_snr(self.prior.power(), n_ref, snr_db)?)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn grid(&self) -> &CandidateGrid {
        &self.grid
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// Number of candidates `|V|`.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `C_xy`.
    #[inline]
    pub fn cov(&self, x: usize, y: usize) -> f64 {
        self.signal_cov[x * self.grid.len() + y]
    }

    /// Row-major `|V| x |V|` signal covariance.
    pub fn signal_cov(&self) -> &[f64] {
        &self.signal_cov
    }

    /// Kernel row of candidate `index`.
    pub fn kernel_row(&self, index: usize) -> Vec<f64> {
        kernel_row(self.grid.position(index), &self.prior, self.lambda)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(DesignError::IndexOutOfRange { index, len: self.len() });
        }
        Ok(())
    }
}

fn assemble_signal_cov(grid: &CandidateGrid, prior: &PriorSpec, lambda: f64) -> Vec<f64> {
    let n = grid.len();
    let rows: Vec<Vec<f64>> = grid.positions().par_iter().map(|&x| kernel_row(x, prior, lambda)).collect();
    let var = prior.variances();
    // Each entry is a sequential sum over m, so the result does not depend on scheduling.
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let weighted: Vec<f64> = rows[i].iter().zip(var).map(|(k, v)| k * v).collect();
            (i..n).map(|j| weighted.iter().zip(&rows[j]).map(|(a, b)| a * b).sum()).collect()
        })
        .collect();
    let mut cov = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    cov
}
