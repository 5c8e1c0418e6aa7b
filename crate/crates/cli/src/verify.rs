//! Reduced-scale property suites for `arraydesign verify`.

use arraydesign::{
    build_model, build_prior, exhaustive_matroid_opt, exhaustive_opt, greedy, lazy_greedy, matroid_greedy,
    mutual_information, online_bound, CandidateGrid, MatroidSpec, SelectionState, SensingModel,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::CliResult;

/// Parameters of the small verification instance.
#[derive(Debug, Clone)]
pub struct VerifyInstance {
    pub lambda: f64,
    pub r: u32,
    pub power: f64,
    pub m_half: usize,
    pub center: f64,
    pub delta: f64,
    pub snrs: Vec<f64>,
    pub budget: usize,
    pub seed: u64,
}

impl Default for VerifyInstance {
    fn default() -> Self {
        VerifyInstance {
            lambda: 1.0,
            r: 1,
            power: 1.0,
            m_half: 100,
            center: 0.0,
            delta: 0.0625,
            snrs: vec![0.0, 5.0, 10.0, 30.0],
            budget: 6,
            seed: 0,
        }
    }
}

impl VerifyInstance {
    pub fn from_config(cfg: &RunConfig) -> Self {
        VerifyInstance {
            lambda: cfg.lambda,
            r: cfg.prior.r,
            power: cfg.prior.p,
            m_half: cfg.prior.m_half.min(200),
            center: 0.5 * (cfg.aperture.min + cfg.aperture.max),
            delta: cfg.grid_delta,
            snrs: cfg.snrs(),
            budget: cfg.budget.min(8),
            seed: cfg.seed,
        }
    }

    /// `points` consecutive candidates around the center.
    fn model(&self, points: usize, offset: usize, snr_db: f64) -> CliResult<SensingModel> {
        let start = self.center - (points / 2) as f64 * self.delta + offset as f64 * self.delta;
        let grid = CandidateGrid::from_aperture(start, start + (points - 1) as f64 * self.delta, self.delta)?;
        let prior = build_prior(self.r, self.power, self.m_half)?;
        Ok(build_model(self.lambda, snr_db, self.budget.max(1), grid, prior)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Smallest slack observed; negative beyond tolerance means a violation.
    pub worst_margin: f64,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, cases: 0, violations: 0, worst_margin: f64::INFINITY, detail: String::new() }
    }

    fn record(&mut self, margin: f64, tolerance: f64) {
        self.cases += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -tolerance {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &mut [usize], max: usize) -> Vec<usize> {
    pool.shuffle(rng);
    let k = rng.random_range(0..=max.min(pool.len()));
    pool[..k].to_vec()
}

fn submodularity(inst: &VerifyInstance, rng: &mut ChaCha8Rng) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("submodularity");
    for (k, &snr) in inst.snrs.iter().enumerate() {
        let model = inst.model(24, 0, snr)?;
        let n = model.len();
        let share = 1000 / inst.snrs.len() + usize::from(k < 1000 % inst.snrs.len());
        for _ in 0..share {
            let x = rng.random_range(0..n);
            let mut pool: Vec<usize> = (0..n).filter(|&y| y != x).collect();
            let t = random_subset(rng, &mut pool, 8);
            let s = t[..rng.random_range(0..=t.len())].to_vec();
            let gs = SelectionState::from_indices(&model, &s)?.marginal_gain(x)?;
            let gt = SelectionState::from_indices(&model, &t)?.marginal_gain(x)?;
            rep.record(gs - gt, 1e-9);
        }
    }
    Ok(rep)
}

fn monotonicity(inst: &VerifyInstance, rng: &mut ChaCha8Rng) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("monotonicity");
    for (k, &snr) in inst.snrs.iter().enumerate() {
        let model = inst.model(24, 0, snr)?;
        let n = model.len();
        let share = 1000 / inst.snrs.len() + usize::from(k < 1000 % inst.snrs.len());
        for _ in 0..share {
            let mut pool: Vec<usize> = (0..n).collect();
            let mut s = random_subset(rng, &mut pool, 9);
            let Some(x) = s.pop() else {
                let g = SelectionState::new(&model).marginal_gain(rng.random_range(0..n))?;
                rep.record(g, 1e-12);
                continue;
            };
            let before = mutual_information(&model, &s)?;
            s.push(x);
            rep.record(mutual_information(&model, &s)? - before, 1e-12);
        }
    }
    Ok(rep)
}

fn incremental_oracle(inst: &VerifyInstance, rng: &mut ChaCha8Rng) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("incremental_vs_scratch");
    for &snr in &inst.snrs {
        let model = inst.model(33, 0, snr)?;
        let mut pool: Vec<usize> = (0..model.len()).collect();
        for _ in 0..50 {
            let set = random_subset(rng, &mut pool, 12);
            let inc = SelectionState::from_indices(&model, &set)?.mi_nats();
            let batch = mutual_information(&model, &set)?;
            rep.record(1e-8 * batch.abs().max(1.0) - (inc - batch).abs(), 0.0);
        }
    }
    Ok(rep)
}

fn exhaustive_ratio(inst: &VerifyInstance, rng: &mut ChaCha8Rng) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("greedy_vs_exhaustive");
    let factor = 1.0 - (-1.0f64).exp();
    let mut worst_ratio = f64::INFINITY;
    let mut bound_violations = 0;
    for _ in 0..20 {
        let points = rng.random_range(6..=14);
        let offset = rng.random_range(0..4);
        let model = inst.model(points, offset, rng.random_range(0.0..30.0))?;
        let n = rng.random_range(1..=4);
        let g = greedy(&model, n)?;
        let opt = exhaustive_opt(&model, n)?;
        worst_ratio = worst_ratio.min(g.mi_nats / opt.mi_nats);
        if opt.mi_nats > online_bound(&model, &g)? + 1e-9 {
            bound_violations += 1;
        }
        rep.record(g.mi_nats - factor * opt.mi_nats, 1e-9);
    }
    rep.violations += bound_violations;
    rep.detail = format!("min_ratio={worst_ratio} required={factor} online_bound_violations={bound_violations}");
    Ok(rep)
}

fn lazy_eager(inst: &VerifyInstance) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("lazy_equals_eager");
    for &snr in &inst.snrs {
        let model = inst.model(33, 0, snr)?;
        let e = greedy(&model, inst.budget)?;
        let l = lazy_greedy(&model, inst.budget)?;
        rep.record(if e.indices == l.indices && e.gains == l.gains { 0.0 } else { -1.0 }, 0.0);
    }
    Ok(rep)
}

fn matroid_half(inst: &VerifyInstance, rng: &mut ChaCha8Rng) -> CliResult<SuiteReport> {
    let mut rep = SuiteReport::new("matroid_greedy_half");
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..10 {
        let model = inst.model(rng.random_range(5..=10), 0, rng.random_range(0.0..30.0))?;
        let n = model.len();
        let nbins = rng.random_range(1..=n.min(4));
        let mut bins = vec![Vec::new(); nbins];
        for x in 0..n {
            bins[if x < nbins { x } else { rng.random_range(0..nbins) }].push(x);
        }
        let caps = (0..nbins).map(|_| rng.random_range(1..=2)).collect();
        let spec = MatroidSpec::partition(n, bins, caps, rng.random_range(1..=4))?;
        let g = matroid_greedy(&model, &spec)?;
        let opt = exhaustive_matroid_opt(&model, &spec)?;
        worst_ratio = worst_ratio.min(g.mi_nats / opt.mi_nats);
        rep.record(g.mi_nats - 0.5 * opt.mi_nats, 1e-9);
    }
    rep.detail = format!("min_ratio={worst_ratio} required=0.5");
    Ok(rep)
}

pub fn run_suites(inst: &VerifyInstance) -> CliResult<Vec<SuiteReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    Ok(vec![
        submodularity(inst, &mut rng)?,
        monotonicity(inst, &mut rng)?,
        incremental_oracle(inst, &mut rng)?,
        exhaustive_ratio(inst, &mut rng)?,
        lazy_eager(inst)?,
        matroid_half(inst, &mut rng)?,
    ])
}

/// CSV lines `suite,status,cases,violations,worst_margin,detail`.
pub fn render(reports: &[SuiteReport]) -> String {
    let mut out = String::from("suite,status,cases,violations,worst_margin,detail\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.name,
            if r.passed() { "PASS" } else { "FAIL" },
            r.cases,
            r.violations,
            r.worst_margin,
            r.detail
        ));
    }
    out
}
