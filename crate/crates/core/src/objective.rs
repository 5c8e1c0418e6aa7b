//! Mutual information `G(S) = I(f_S; β) = log det(I + C_SS / σ_w²)` in nats, plus an
//! append-only selection state whose Cholesky factor makes each marginal gain a single
//! triangular solve.

use crate::error::{DesignError, Result};
use crate::linalg::{chol_logdet, cholesky_in_place};
use crate::model::SensingModel;

/// `G(S)` from scratch. The value does not depend on the order of `set`.
pub fn mutual_information(model: &SensingModel, set: &[usize]) -> Result<f64> {
    let n = set.len();
    if n == 0 {
        return Ok(0.0);
    }
    check_set(model, set)?;
    let inv_noise = 1.0 / model.noise_var();
    let mut a = vec![0.0; n * n];
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            a[i * n + j] = model.cov(x, y) * inv_noise;
        }
        a[i * n + i] += 1.0;
    }
    cholesky_in_place(&mut a, n)
        .ok_or_else(|| DesignError::Numerical("Cholesky of I + C_SS/σ² failed; the model is corrupted".into()))?;
    Ok(chol_logdet(&a, n))
}

fn check_set(model: &SensingModel, set: &[usize]) -> Result<()> {
    let mut seen = vec![false; model.len()];
    for &x in set {
        model.check_index(x)?;
        if std::mem::replace(&mut seen[x], true) {
            return Err(DesignError::InvalidArgument(format!("candidate {x} appears twice in the set")));
        }
    }
    Ok(())
}

/// Incrementally grown design.
///
/// Keeps the lower Cholesky factor of `Σ_SS = σ_w² I + C_SS` in packed row storage (row `i`
/// holds `i + 1` entries), the chosen order and the per-step gains.
#[derive(Debug, Clone)]
pub struct SelectionState<'m> {
    model: &'m SensingModel,
    chosen: Vec<usize>,
    member: Vec<bool>,
    chol: Vec<f64>,
    mi_nats: f64,
    gains: Vec<f64>,
}

impl<'m> SelectionState<'m> {
    pub fn new(model: &'m SensingModel) -> Self {
        SelectionState {
            model,
            chosen: Vec::new(),
            member: vec![false; model.len()],
            chol: Vec::new(),
            mi_nats: 0.0,
            gains: Vec::new(),
        }
    }

    /// State after extending with `set` in order.
    pub fn from_indices(model: &'m SensingModel, set: &[usize]) -> Result<Self> {
        let mut state = SelectionState::new(model);
        for &x in set {
            state.push(x)?;
        }
        Ok(state)
    }

    pub fn model(&self) -> &'m SensingModel {
        self.model
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.member.get(x).copied().unwrap_or(false)
    }

    /// Current `G(S)` in nats.
    pub fn mi_nats(&self) -> f64 {
        self.mi_nats
    }

    /// Marginal gains in selection order.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Solves `L v = C_Sx` and returns `(v, σ_{x|S}²)` where
    /// `σ_{x|S}² = σ_w² + C_xx - vᵀv` is the conditional variance of the observation at `x`.
    fn conditional(&self, x: usize) -> (Vec<f64>, f64) {
        let n = self.chosen.len();
        let mut v: Vec<f64> = self.chosen.iter().map(|&s| self.model.cov(s, x)).collect();
        let mut off = 0;
        for i in 0..n {
            let row = &self.chol[off..off + i + 1];
            let s: f64 = row[..i].iter().zip(&v[..i]).map(|(a, b)| a * b).sum();
            v[i] = (v[i] - s) / row[i];
            off += i + 1;
        }
        let explained: f64 = v.iter().map(|a| a * a).sum();
        (v, self.model.noise_var() + self.model.cov(x, x) - explained)
    }

    fn check_candidate(&self, x: usize) -> Result<()> {
        self.model.check_index(x)?;
        if self.member[x] {
            return Err(DesignError::AlreadyChosen(x));
        }
        Ok(())
    }

    /// Conditional variance `σ_{x|S}²` of a fresh observation at `x`.
    pub fn conditional_variance(&self, x: usize) -> Result<f64> {
        self.check_candidate(x)?;
        Ok(self.conditional(x).1)
    }

    /// `G(S ∪ {x}) - G(S) = log(σ_{x|S}² / σ_w²)`.
    pub fn marginal_gain(&self, x: usize) -> Result<f64> {
        self.check_candidate(x)?;
        let (_, d) = self.conditional(x);
        if !(d > 0.0) {
            return Err(DesignError::Numerical(format!("non-positive conditional variance {d} at candidate {x}")));
        }
        Ok((d / self.model.noise_var()).ln())
    }

    /// A new state with `x` appended.
    pub fn extend(&self, x: usize) -> Result<Self> {
        let mut next = self.clone();
        next.push(x)?;
        Ok(next)
    }

    /// Appends `x` in place.
    pub fn push(&mut self, x: usize) -> Result<()> {
        self.check_candidate(x)?;
        let floor = 1e-14 * self.model.noise_var();
        let (mut v, mut d) = self.conditional(x);
        if !(d > floor) {
            // One full refactorization before giving up on accumulated round-off.
            self.refactor()?;
            let (v2, d2) = self.conditional(x);
            if !(d2 > floor) {
                return Err(DesignError::Numerical(format!(
                    "pivot {d2} below floor {floor} when appending candidate {x}"
                )));
            }
            v = v2;
            d = d2;
        }
        let gain = (d / self.model.noise_var()).ln();
        v.push(d.sqrt());
        self.chol.extend_from_slice(&v);
        self.chosen.push(x);
        self.member[x] = true;
        self.gains.push(gain);
        self.mi_nats += gain;
        Ok(())
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.chosen.len();
        let mut a = vec![0.0; n * n];
        for (i, &x) in self.chosen.iter().enumerate() {
            for (j, &y) in self.chosen.iter().enumerate() {
                a[i * n + j] = self.model.cov(x, y);
            }
            a[i * n + i] += self.model.noise_var();
        }
        cholesky_in_place(&mut a, n)
            .ok_or_else(|| DesignError::Numerical("refactorization of Σ_SS failed".into()))?;
        self.chol.clear();
        for i in 0..n {
            self.chol.extend_from_slice(&a[i * n..i * n + i + 1]);
        }
        Ok(())
    }

    /// `log det Σ_SS` from the stored factor.
    pub fn logdet_measurement_cov(&self) -> f64 {
        let mut off = 0;
        let mut acc = 0.0;
        for i in 0..self.chosen.len() {
            acc += 2.0 * self.chol[off + i].ln();
            off += i + 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, build_prior, CandidateGrid};

    fn small_model(snr_db: f64) -> SensingModel {
        let g = CandidateGrid::from_aperture(-1.0, 1.0, 0.125).unwrap();
        let p = build_prior(1, 1.0, 80).unwrap();
        build_model(1.0, snr_db, 11, g, p).unwrap()
    }

    #[test]
    fn empty_set_is_zero() {
        let m = small_model(0.0);
        assert_eq!(mutual_information(&m, &[]).unwrap(), 0.0);
        assert_eq!(SelectionState::new(&m).mi_nats(), 0.0);
    }

    #[test]
    fn singleton_at_origin_matches_scalar_formula() {
        let m = small_model(0.0);
        let origin = 8;
        assert_eq!(m.grid().position(origin), 0.0);
        let s0 = m.prior().variance(0).unwrap();
        let expected = (1.0 + s0 / m.noise_var()).ln();
        assert!((mutual_information(&m, &[origin]).unwrap() - expected).abs() < 1e-14);
        // ln(1 + 11 / (1 + π²/3))
        assert!((expected - 1.2709344).abs() < 1e-6);
        let st = SelectionState::new(&m);
        assert!((st.marginal_gain(origin).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn permutation_invariance() {
        let m = small_model(5.0);
        let a = mutual_information(&m, &[1, 5, 9, 12]).unwrap();
        let b = mutual_information(&m, &[12, 1, 9, 5]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        let m = small_model(5.0);
        assert!(mutual_information(&m, &[1, 1]).is_err());
        assert!(matches!(mutual_information(&m, &[99]), Err(DesignError::IndexOutOfRange { .. })));
        let st = SelectionState::from_indices(&m, &[3]).unwrap();
        assert_eq!(st.marginal_gain(3), Err(DesignError::AlreadyChosen(3)));
        assert!(st.extend(3).is_err());
    }

    #[test]
    fn incremental_matches_scratch() {
        let m = small_model(12.0);
        let order = [8, 0, 16, 4, 12, 2, 14, 6, 10, 1, 15];
        let st = SelectionState::from_indices(&m, &order).unwrap();
        let scratch = mutual_information(&m, &order).unwrap();
        assert!((st.mi_nats() - scratch).abs() <= 1e-8 * scratch);
        let sum: f64 = st.gains().iter().sum();
        assert!((sum - st.mi_nats()).abs() < 1e-9);
        // log det Σ_SS - N log σ² is the same quantity
        let via_sigma = st.logdet_measurement_cov() - order.len() as f64 * m.noise_var().ln();
        assert!((via_sigma - scratch).abs() <= 1e-8 * scratch);
    }

    #[test]
    fn extend_full_ground_set() {
        let m = small_model(0.0);
        let all: Vec<usize> = (0..m.len()).collect();
        let st = SelectionState::from_indices(&m, &all).unwrap();
        let scratch = mutual_information(&m, &all).unwrap();
        assert!((st.mi_nats() - scratch).abs() <= 1e-8 * scratch);
        assert!(st.gains().iter().all(|&g| g >= -1e-12));
    }

    #[test]
    fn extend_leaves_original_untouched() {
        let m = small_model(0.0);
        let a = SelectionState::from_indices(&m, &[2]).unwrap();
        let b = a.extend(5).unwrap();
        assert_eq!(a.chosen(), &[2]);
        assert_eq!(b.chosen(), &[2, 5]);
        assert!(b.mi_nats() > a.mi_nats());
    }
}
