//! Greedy solvers for `max G(S)` under cardinality and matroid constraints, an exhaustive
//! reference solver, and the two optimality certificates.
//!
//! All greedy variants share one deterministic argmax: among candidates whose gains are within
//! `1e-12` (relative) of the round maximum, the smallest `|position|` wins, then the negative
//! position, then the smallest index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::bounds::BoundsReport;
use crate::error::{DesignError, Result};
use crate::matroids::{IndependenceTracker, MatroidSpec};
use crate::model::SensingModel;
use crate::objective::SelectionState;

/// Relative tolerance under which two gains count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest number of subsets the exhaustive solver will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 2e6;

/// Human-readable statement of the tie-break rule.
pub const TIE_BREAK_RULE: &str =
    "gains within 1e-12 relative are tied; prefer smallest |position|, then negative position, then smallest index";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Greedy,
    LazyGreedy,
    MatroidGreedy,
    Exhaustive,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Greedy => "greedy",
            Solver::LazyGreedy => "lazy",
            Solver::MatroidGreedy => "matroid-greedy",
            Solver::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Cardinality { budget: usize },
    Matroid(MatroidSpec),
}

impl Constraint {
    /// Largest admissible design size.
    pub fn budget(&self) -> usize {
        match self {
            Constraint::Cardinality { budget } => *budget,
            Constraint::Matroid(m) => m.global_cap(),
        }
    }

    /// Worst-case approximation factor of greedy under this constraint.
    pub fn greedy_factor(&self) -> f64 {
        match self {
            Constraint::Cardinality { .. } => 1.0 - (-1.0f64).exp(),
            Constraint::Matroid(_) => 0.5,
        }
    }
}

/// A selected sensor set with its per-step accounting.
#[derive(Debug, Clone)]
pub struct Design {
    pub indices: Vec<usize>,
    pub positions: Vec<f64>,
    pub gains: Vec<f64>,
    pub mi_nats: f64,
    pub constraint: Constraint,
    pub solver: Solver,
    /// Number of marginal-gain (or set-value) evaluations performed.
    pub evaluations: usize,
    /// Largest amount by which a refreshed gain exceeded its stale lazy bound (0 when unused).
    pub lazy_bound_violation: f64,
    pub certificate: Option<BoundsReport>,
}

impl Design {
    fn from_state(state: &SelectionState<'_>, constraint: Constraint, solver: Solver, evaluations: usize) -> Self {
        let grid = state.model().grid();
        Design {
            indices: state.chosen().to_vec(),
            positions: state.chosen().iter().map(|&i| grid.position(i)).collect(),
            gains: state.gains().to_vec(),
            mi_nats: state.mi_nats(),
            constraint,
            solver,
            evaluations,
            lazy_bound_violation: 0.0,
            certificate: None,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn budget(&self) -> usize {
        self.constraint.budget()
    }

    /// Positions in increasing order.
    pub fn sorted_positions(&self) -> Vec<f64> {
        let mut p = self.positions.clone();
        p.sort_by(f64::total_cmp);
        p
    }
}

fn tie_key(model: &SensingModel, x: usize) -> (f64, bool, usize) {
    let p = model.grid().position(x);
    (p.abs(), p >= 0.0, x)
}

fn tie_cmp(model: &SensingModel, a: usize, b: usize) -> Ordering {
    let (ka, kb) = (tie_key(model, a), tie_key(model, b));
    ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2))
}

fn tie_threshold(best: f64) -> f64 {
    best - TIE_TOLERANCE * best.abs()
}

/// Deterministic argmax over evaluated `(candidate, gain)` pairs.
pub fn select_best(model: &SensingModel, scored: &[(usize, f64)]) -> Option<(usize, f64)> {
    let best = scored.iter().map(|&(_, g)| g).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let threshold = tie_threshold(best);
    scored
        .iter()
        .filter(|&&(_, g)| g >= threshold)
        .min_by(|a, b| tie_cmp(model, a.0, b.0))
        .copied()
}

fn score_all(state: &SelectionState<'_>, candidates: &[usize]) -> Result<Vec<(usize, f64)>> {
    candidates.par_iter().map(|&x| state.marginal_gain(x).map(|g| (x, g))).collect()
}

/// Plain greedy with budget `n` (clamped to `|V|`).
pub fn greedy(model: &SensingModel, n: usize) -> Result<Design> {
    if n == 0 {
        return Err(DesignError::InvalidArgument("budget must be at least 1".into()));
    }
    let budget = n.min(model.len());
    let mut state = SelectionState::new(model);
    let mut evaluations = 0;
    for _ in 0..budget {
        let candidates: Vec<usize> = (0..model.len()).filter(|&x| !state.contains(x)).collect();
        let scored = score_all(&state, &candidates)?;
        evaluations += scored.len();
        let (x, _) = select_best(model, &scored).expect("nonempty candidate set");
        state.push(x)?;
    }
    Ok(Design::from_state(&state, Constraint::Cardinality { budget: n }, Solver::Greedy, evaluations))
}

#[derive(Debug, Clone, Copy)]
struct Stale {
    bound: f64,
    x: usize,
}

impl PartialEq for Stale {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Stale {}

impl PartialOrd for Stale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Stale {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(other.x.cmp(&self.x))
    }
}

/// Absolute slack added when deciding that a stale bound cannot reach the tie window; covers
/// round-off in gains that are equal in exact arithmetic.
const LAZY_SLACK: f64 = 1e-10;

/// Lazy greedy: identical output to [`greedy`], fewer evaluations.
///
/// Each round re-evaluates the highest stale bound until no unrefreshed bound can reach the
/// tie window of the best refreshed gain, then applies the shared tie-break to the refreshed
/// candidates.
pub fn lazy_greedy(model: &SensingModel, n: usize) -> Result<Design> {
    if n == 0 {
        return Err(DesignError::InvalidArgument("budget must be at least 1".into()));
    }
    let budget = n.min(model.len());
    let mut state = SelectionState::new(model);
    let mut heap: BinaryHeap<Stale> = (0..model.len()).map(|x| Stale { bound: f64::INFINITY, x }).collect();
    let mut evaluations = 0;
    let mut violation = 0.0f64;

    for _ in 0..budget {
        let mut fresh: Vec<(usize, f64)> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        while let Some(&top) = heap.peek() {
            if !fresh.is_empty() && top.bound < tie_threshold(best) - LAZY_SLACK {
                break;
            }
            heap.pop();
            let g = state.marginal_gain(top.x)?;
            evaluations += 1;
            if top.bound.is_finite() {
                violation = violation.max(g - top.bound);
            }
            best = best.max(g);
            fresh.push((top.x, g));
        }
        let (x, _) = select_best(model, &fresh).expect("heap holds every unchosen candidate");
        state.push(x)?;
        heap.extend(fresh.into_iter().filter(|&(y, _)| y != x).map(|(y, g)| Stale { bound: g, x: y }));
    }
    let mut design = Design::from_state(&state, Constraint::Cardinality { budget: n }, Solver::LazyGreedy, evaluations);
    design.lazy_bound_violation = violation;
    Ok(design)
}

/// Greedy over a matroid: add the feasible candidate of largest gain until none is feasible.
pub fn matroid_greedy(model: &SensingModel, matroid: &MatroidSpec) -> Result<Design> {
    let constraint = Constraint::Matroid(matroid.clone());
    let mut state = SelectionState::new(model);
    if matroid.ground_size() == 0 {
        return Ok(Design::from_state(&state, constraint, Solver::MatroidGreedy, 0));
    }
    if matroid.ground_size() != model.len() {
        return Err(DesignError::DimensionMismatch { expected: model.len(), got: matroid.ground_size() });
    }
    let mut tracker = IndependenceTracker::new(matroid);
    let mut evaluations = 0;
    loop {
        let feasible: Vec<usize> = (0..model.len()).filter(|&x| !state.contains(x) && tracker.can_add(x)).collect();
        if feasible.is_empty() {
            break;
        }
        let scored = score_all(&state, &feasible)?;
        evaluations += scored.len();
        let (x, _) = select_best(model, &scored).expect("nonempty feasible set");
        state.push(x)?;
        tracker.add(x);
    }
    Ok(Design::from_state(&state, constraint, Solver::MatroidGreedy, evaluations))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Globally optimal design of size `min(n, |V|)` by enumeration of all subsets of that size.
pub fn exhaustive_opt(model: &SensingModel, n: usize) -> Result<Design> {
    if n == 0 {
        return Err(DesignError::InvalidArgument("budget must be at least 1".into()));
    }
    let size = n.min(model.len());
    let subsets = binomial(model.len(), size);
    if subsets > EXHAUSTIVE_LIMIT {
        return Err(DesignError::InstanceTooLarge { subsets, limit: EXHAUSTIVE_LIMIT });
    }
    let mut best: Option<SelectionState<'_>> = None;
    let mut evaluations = 0;
    let root = SelectionState::new(model);
    enumerate(&root, 0, size, &mut |s| {
        evaluations += 1;
        if best.as_ref().is_none_or(|b| beats(model, s, b)) {
            best = Some(s.clone());
        }
        Ok(())
    })?;
    let best = best.expect("at least one subset");
    Ok(Design::from_state(&best, Constraint::Cardinality { budget: n }, Solver::Exhaustive, evaluations))
}

fn set_key(model: &SensingModel, set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_by(|&a, &b| tie_cmp(model, a, b));
    v
}

/// Strictly better value, or a tied value whose members win the tie-break lexicographically.
fn beats(model: &SensingModel, cand: &SelectionState<'_>, best: &SelectionState<'_>) -> bool {
    let (v, b) = (cand.mi_nats(), best.mi_nats());
    if v > b + TIE_TOLERANCE * b.abs() {
        return true;
    }
    if v < tie_threshold(b) {
        return false;
    }
    let (kc, kb) = (set_key(model, cand.chosen()), set_key(model, best.chosen()));
    for (&a, &c) in kc.iter().zip(&kb) {
        match tie_cmp(model, a, c) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    kc.len() < kb.len()
}

fn enumerate<'m>(
    state: &SelectionState<'m>,
    start: usize,
    size: usize,
    visit: &mut dyn FnMut(&SelectionState<'m>) -> Result<()>,
) -> Result<()> {
    if state.len() == size {
        return visit(state);
    }
    let n = state.model().len();
    let remaining = size - state.len();
    for x in start..=(n - remaining) {
        enumerate(&state.extend(x)?, x + 1, size, visit)?;
    }
    Ok(())
}

/// Best independent set of a matroid by enumeration (reference for the half-approximation).
pub fn exhaustive_matroid_opt(model: &SensingModel, matroid: &MatroidSpec) -> Result<Design> {
    if matroid.ground_size() != model.len() {
        return Err(DesignError::DimensionMismatch { expected: model.len(), got: matroid.ground_size() });
    }
    let rank = matroid.rank();
    let subsets: f64 = (0..=rank).map(|k| binomial(model.len(), k)).sum();
    if subsets > EXHAUSTIVE_LIMIT {
        return Err(DesignError::InstanceTooLarge { subsets, limit: EXHAUSTIVE_LIMIT });
    }
    let mut best = SelectionState::new(model);
    let mut evaluations = 0;
    fn walk<'m>(
        state: &SelectionState<'m>,
        tracker: &IndependenceTracker<'_>,
        start: usize,
        best: &mut SelectionState<'m>,
        evaluations: &mut usize,
    ) -> Result<()> {
        *evaluations += 1;
        if beats(state.model(), state, best) {
            *best = state.clone();
        }
        for x in start..state.model().len() {
            if tracker.can_add(x) {
                let mut t = tracker.clone();
                t.add(x);
                walk(&state.extend(x)?, &t, x + 1, best, evaluations)?;
            }
        }
        Ok(())
    }
    let root = SelectionState::new(model);
    walk(&root, &IndependenceTracker::new(matroid), 0, &mut best, &mut evaluations)?;
    Ok(Design::from_state(&best, Constraint::Matroid(matroid.clone()), Solver::Exhaustive, evaluations))
}

/// `G(S) + Σ` of the `n` largest marginal gains `G(S ∪ {e}) - G(S)` over `e ∉ S`.
///
/// Upper-bounds `G` of every set of size at most `n`.
pub fn online_bound_for(model: &SensingModel, set: &[usize], n: usize) -> Result<f64> {
    let state = SelectionState::from_indices(model, set)?;
    let candidates: Vec<usize> = (0..model.len()).filter(|&x| !state.contains(x)).collect();
    let mut gains: Vec<f64> = score_all(&state, &candidates)?.into_iter().map(|(_, g)| g.max(0.0)).collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    Ok(state.mi_nats() + gains.iter().take(n).sum::<f64>())
}

/// Online certificate for a design, using its constraint's size limit.
pub fn online_bound(model: &SensingModel, design: &Design) -> Result<f64> {
    online_bound_for(model, &design.indices, design.budget())
}

/// Upper bound on the optimum implied by the `(1 - 1/e)` greedy guarantee.
pub fn nemhauser_bound(mi_nats: f64) -> f64 {
    mi_nats / (1.0 - (-1.0f64).exp())
}
