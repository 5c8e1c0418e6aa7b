use arraydesign::{
    build_model, build_prior, exhaustive_matroid_opt, exhaustive_opt, greedy, lazy_greedy, matroid_greedy,
    mutual_information, online_bound, partition_from_bins, CandidateGrid, MatroidSpec, SensingModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference(snr_db: f64) -> SensingModel {
    let grid = CandidateGrid::from_aperture(-3.5, 3.5, 0.0625).unwrap();
    build_model(1.0, snr_db, 11, grid, build_prior(1, 1.0, 450).unwrap()).unwrap()
}

#[test]
fn reference_design_at_30db_is_half_wavelength_array() {
    let d = greedy(&reference(30.0), 11).unwrap();
    let expected: Vec<f64> = (-5..=5).map(|k| 0.5 * k as f64).collect();
    assert_eq!(d.sorted_positions(), expected);
    assert_eq!(d.positions[0], 0.0);
}

#[test]
fn twelve_point_subgrid_beats_nemhauser_factor() {
    // 12 consecutive points of the reference grid around the origin.
    let grid = CandidateGrid::from_aperture(-0.375, 0.3125, 0.0625).unwrap();
    assert_eq!(grid.len(), 12);
    let m = build_model(1.0, 5.0, 11, grid, build_prior(1, 1.0, 450).unwrap()).unwrap();
    let opt = exhaustive_opt(&m, 3).unwrap();
    let g = greedy(&m, 3).unwrap();
    assert_eq!(opt.evaluations, 220);
    assert!(g.mi_nats >= (1.0 - (-1.0f64).exp()) * opt.mi_nats);
    assert!(g.mi_nats <= opt.mi_nats + 1e-12);
    assert!(opt.mi_nats <= online_bound(&m, &g).unwrap() + 1e-12);
    // the reported optimum really is the best of all triples
    let mut best = 0.0f64;
    for a in 0..12 {
        for b in (a + 1)..12 {
            for c in (b + 1)..12 {
                best = best.max(mutual_information(&m, &[a, b, c]).unwrap());
            }
        }
    }
    assert!((best - opt.mi_nats).abs() < 1e-9);
}

#[test]
fn online_bound_at_5db() {
    let m = reference(5.0);
    let d = lazy_greedy(&m, 11).unwrap();
    let b = online_bound(&m, &d).unwrap();
    assert!(b >= d.mi_nats);
    assert!((b - 17.45).abs() < 0.05, "online bound {b}");
}

#[test]
fn lazy_equals_eager_on_reference_sweep() {
    let base = reference(5.0);
    for snr in [30.0, 12.0, 10.0, 5.0, 0.0] {
        let m = base.at_snr(snr, 11).unwrap();
        let e = greedy(&m, 11).unwrap();
        let l = lazy_greedy(&m, 11).unwrap();
        assert_eq!(e.indices, l.indices, "{snr} dB");
        assert_eq!(e.gains, l.gains);
        assert!(l.lazy_bound_violation <= 1e-12);
        for w in e.gains.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> MatroidSpec {
    let nbins = rng.random_range(1..=n.min(5));
    let mut bins = vec![Vec::new(); nbins];
    for x in 0..n {
        bins[if x < nbins { x } else { rng.random_range(0..nbins) }].push(x);
    }
    let caps = (0..nbins).map(|_| rng.random_range(1..=2)).collect();
    MatroidSpec::partition(n, bins, caps, rng.random_range(1..=4)).unwrap()
}

#[test]
fn matroid_greedy_half_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = f64::INFINITY;
    for _ in 0..25 {
        let n = rng.random_range(5..=12);
        let delta = [0.0625, 0.125, 0.25][rng.random_range(0..3)];
        let grid = CandidateGrid::from_aperture(0.0, (n - 1) as f64 * delta, delta).unwrap();
        let m = build_model(1.0, rng.random_range(0.0..30.0), 11, grid, build_prior(1, 1.0, 100).unwrap()).unwrap();
        let matroid = random_partition(&mut rng, m.len());
        let g = matroid_greedy(&m, &matroid).unwrap();
        let opt = exhaustive_matroid_opt(&m, &matroid).unwrap();
        assert!(matroid.is_independent(&g.indices).unwrap());
        assert_eq!(g.len(), matroid.rank(), "greedy must stop at a maximal independent set");
        assert!(g.mi_nats >= 0.5 * opt.mi_nats - 1e-9);
        assert!(opt.mi_nats <= online_bound(&m, &g).unwrap() + 1e-9);
        worst = worst.min(g.mi_nats / opt.mi_nats);
    }
    assert!(worst >= 0.5);
}

#[test]
fn reference_partition_design_respects_bins() {
    let m = reference(30.0);
    let matroid = partition_from_bins(m.grid(), 0.5, -0.25, &[1], 11).unwrap();
    let d = matroid_greedy(&m, &matroid).unwrap();
    assert_eq!(d.len(), 11);
    let mut bins: Vec<usize> = d.indices.iter().map(|&x| matroid.bin_of(x).unwrap()).collect();
    bins.sort_unstable();
    bins.dedup();
    assert_eq!(bins.len(), 11);
}

#[test]
fn uniform_matroid_sequence_equals_greedy() {
    let base = reference(5.0);
    for snr in [0.0, 12.0] {
        let m = base.at_snr(snr, 11).unwrap();
        let a = greedy(&m, 11).unwrap();
        let b = matroid_greedy(&m, &MatroidSpec::uniform(m.len(), 11)).unwrap();
        assert_eq!(a.indices, b.indices);
    }
}
