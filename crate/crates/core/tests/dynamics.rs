use num_complex::Complex64;

use zeno_core::chain::{pairs, PositionWavefunction, SiteIndex};
use zeno_core::hamiltonians::{block_walk_hamiltonian, HermitianOperator};
use zeno_core::oracle::boundary_leak_probability;
use zeno_core::propagator::bessel::{default_terms, free_walk_position_mean};
use zeno_core::propagator::{
    find_unitary_times, transition_amplitudes, walk_position_mean_by_evolution, Propagator,
};
use zeno_core::protocols::{
    apply_w, gate::pair_fidelity, transfer_swap_scheme, two_qubit_gate, ExecutionMode, GateConfig,
};
use zeno_core::trajectory::{
    measure_position, run_ensemble, run_schedule, Generator, MeasurementSpec, Outcome, RngStream,
    Schedule, Segment,
};
use zeno_core::{Error, TrajectoryLog};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn site(k: usize) -> SiteIndex {
    SiteIndex::new(k).unwrap()
}

fn sites(ks: impl IntoIterator<Item = usize>) -> Vec<SiteIndex> {
    ks.into_iter().map(site).collect()
}

/// `|observed − p| ≤ 4σ` for a binomial frequency over `n` draws.
fn within_four_sigma(hits: usize, n: usize, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= 4.0 * sigma
}

#[test]
fn born_frequencies_match_weights() {
    let amps = vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.5), c(0.0, 0.0)];
    let psi = PositionWavefunction::new(amps, site(3)).unwrap();
    let spec = MeasurementSpec::ideal(sites(3..=6));
    let n = 10_000;
    let outcomes = run_ensemble(11, n, |rng, _| {
        measure_position(&psi, &spec, rng).unwrap().0.actual
    });
    for (k, p) in psi.probabilities().into_iter().enumerate() {
        let hits = outcomes
            .iter()
            .filter(|o| **o == Outcome::Site(site(3 + k)))
            .count();
        assert!(
            within_four_sigma(hits, n, p),
            "site {} hits {hits} p {p}",
            3 + k
        );
    }
}

#[test]
fn partial_measurement_collapses_on_out() {
    let amps = vec![c(0.6, 0.0), c(0.0, 0.8)];
    let psi = PositionWavefunction::new(amps, site(1)).unwrap();
    let spec = MeasurementSpec::ideal(sites([1]));
    let mut rng = RngStream::new(3, 0);
    for _ in 0..50 {
        let (rec, next) = measure_position(&psi, &spec, &mut rng).unwrap();
        let expected = if rec.actual == Outcome::Out {
            [0.0, 1.0]
        } else {
            [1.0, 0.0]
        };
        let p = next.probabilities();
        assert!((p[0] - expected[0]).abs() < 1e-15 && (p[1] - expected[1]).abs() < 1e-15);
    }
}

#[test]
fn concatenated_detector_misses_at_product_rate() {
    let psi = PositionWavefunction::localized(2, site(1), 1).unwrap();
    let spec = MeasurementSpec::new(sites([1]), 0.3, 2).unwrap();
    assert!((spec.effective_miss_rate() - 0.09).abs() < 1e-15);
    let n = 10_000;
    let records = run_ensemble(5, n, |rng, _| measure_position(&psi, &spec, rng).unwrap().0);
    assert!(records.iter().all(|r| r.actual == Outcome::Site(site(1))));
    let missed = records
        .iter()
        .filter(|r| r.reported == Outcome::Out)
        .count();
    assert!(within_four_sigma(missed, n, 0.09), "missed {missed}");
    assert!(MeasurementSpec::new(sites([1]), 1.5, 1).is_err());
    assert!(MeasurementSpec::new(sites([1]), 0.1, 0).is_err());
}

fn walk_segment(size: usize, duration: f64) -> Segment {
    Segment {
        generator: Generator::Single(block_walk_hamiltonian(size).unwrap()),
        duration,
        measurement: None,
        measure_every: None,
    }
}

#[test]
fn unmeasured_schedule_is_plain_evolution() {
    let psi =
        PositionWavefunction::new(vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)], site(2)).unwrap();
    let h = block_walk_hamiltonian(3).unwrap();
    let p = Propagator::global();

    let one = Schedule::new(vec![walk_segment(3, 1.3)]);
    let (out, log) = run_schedule(&one, psi.clone(), &mut RngStream::new(0, 0)).unwrap();
    let direct = p.evolve(&h, 1.3, psi.amplitudes()).unwrap();
    assert!(out
        .amplitudes()
        .iter()
        .zip(&direct)
        .all(|(a, b)| (a - b).norm() < 1e-12));
    assert_eq!(log.events().len(), 1);

    let two = Schedule::new(vec![walk_segment(3, 0.4), walk_segment(3, 0.9)]);
    let (out2, _) = run_schedule(&two, psi.clone(), &mut RngStream::new(0, 0)).unwrap();
    let composed = p
        .evolve(&h, 0.9, &p.evolve(&h, 0.4, psi.amplitudes()).unwrap())
        .unwrap();
    assert!(out2
        .amplitudes()
        .iter()
        .zip(&composed)
        .all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(out2
        .amplitudes()
        .iter()
        .zip(&direct)
        .all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn schedules_are_deterministic_per_seed() {
    let psi = PositionWavefunction::localized(5, site(1), 3).unwrap();
    let mut seg = walk_segment(5, 2.0);
    seg.measurement = Some(MeasurementSpec::ideal(sites([1, 5])));
    seg.measure_every = Some(0.1);
    let mut schedule = Schedule::new(vec![seg]);
    schedule.jitter_sigma = 0.01;
    let a = run_schedule(&schedule, psi.clone(), &mut RngStream::new(42, 7)).unwrap();
    let b = run_schedule(&schedule, psi.clone(), &mut RngStream::new(42, 7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.1.header().seed, 42);
    assert_eq!(a.1.header().schedule_digest, schedule.digest());
    assert_eq!(schedule.f_meas(), Some(10.0));
}

#[test]
fn schedule_validation_rejects_bad_segments() {
    let psi = PositionWavefunction::localized(3, site(1), 1).unwrap();
    let wrong_size = Schedule::new(vec![walk_segment(4, 1.0)]);
    assert!(matches!(
        run_schedule(&wrong_size, psi.clone(), &mut RngStream::new(0, 0)),
        Err(Error::Schedule(_))
    ));
    let mut orphan = walk_segment(3, 1.0);
    orphan.measure_every = Some(0.1);
    let orphan = Schedule::new(vec![orphan]);
    assert!(matches!(
        run_schedule(&orphan, psi, &mut RngStream::new(0, 0)),
        Err(Error::Schedule(_))
    ));
}

#[test]
fn trajectory_leak_rate_matches_full_chain() {
    // one-qubit sector of an open four-site chain: X + end potentials
    let mut m = block_walk_hamiltonian(4).unwrap().matrix().clone();
    m[(0, 0)] += c(1.0, 0.0);
    m[(3, 3)] += c(1.0, 0.0);
    let h = HermitianOperator::new(m).unwrap();
    let schedule = Schedule::new(vec![Segment {
        generator: Generator::Single(h),
        duration: 1.0,
        measurement: Some(MeasurementSpec::ideal(sites([3]))),
        measure_every: Some(0.01),
    }]);
    let start = PositionWavefunction::localized(4, site(1), 2).unwrap();
    let n = 20_000;
    let hits = run_ensemble(9, n, |rng, _| {
        let (_, log) = run_schedule(&schedule, start.clone(), rng).unwrap();
        log.outcomes().contains(&Outcome::Site(site(3)))
    });
    let leaked = hits.iter().filter(|&&h| h).count();
    let oracle = boundary_leak_probability(4, 3, 2, 100.0, 100).unwrap();
    assert!(
        within_four_sigma(leaked, n, oracle),
        "leaked {leaked}/{n}, oracle {oracle}"
    );
}

#[test]
fn unitary_roots_are_shared_by_both_outcomes() {
    for k in 1..=2 {
        let roots = find_unitary_times(k, 7.0).unwrap();
        assert!(!roots.is_empty());
        for root in roots {
            let amps = transition_amplitudes(2, root.t, k).unwrap();
            for a in &amps {
                assert!(
                    (a.g.unwrap().norm() - 1.0).abs() < 1e-9,
                    "k {k} t {}",
                    root.t
                );
            }
            let total: f64 = root.probabilities.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn bessel_walk_matches_direct_evolution() {
    for t in [0.5, 3.0, 12.0, 40.0] {
        let series = free_walk_position_mean(t, default_terms(t)).unwrap();
        let direct = walk_position_mean_by_evolution(t, 200).unwrap();
        assert!(
            (series - direct).abs() < 1e-6,
            "t {t}: {series} vs {direct}"
        );
    }
    assert!(matches!(
        free_walk_position_mean(40.0, 20),
        Err(Error::InsufficientTerms { .. })
    ));
}

#[test]
fn physical_swap_converges_to_ideal_statistics() {
    let mode = ExecutionMode::Physical { f_meas: 2000.0 };
    let runs = run_ensemble(1, 200, |rng, _| transfer_swap_scheme(5, 1.39, mode, rng));
    let done: Vec<_> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let leaked = runs
        .iter()
        .filter(|r| matches!(r, Err(Error::Leak(_))))
        .count();
    assert_eq!(done.len() + leaked, runs.len());
    assert!(done.len() >= 150, "only {} of 200 finished", done.len());
    assert!(done.iter().all(|r| r.completed && r.sites_advanced == 5));
    assert!(ExecutionMode::Physical { f_meas: 0.0 }.validate().is_err());
}

#[test]
fn physical_gate_is_close_to_ideal() {
    let t_star = find_unitary_times(2, 4.0).unwrap()[0].t;
    let mut cfg = GateConfig::new(t_star);
    cfg.mode = ExecutionMode::Physical { f_meas: 5000.0 };
    let psi = [c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0)];
    let phi = 1.1;
    let target = apply_w(phi, &psi);
    let runs = run_ensemble(2, 40, |rng, _| two_qubit_gate(phi, &psi, &cfg, rng));
    let ok: Vec<_> = runs.into_iter().filter_map(|r| r.ok()).collect();
    assert!(ok.len() >= 20);
    for r in ok {
        assert!(pair_fidelity(&r.final_state, &target) > 0.95);
    }
}

#[test]
fn gate_log_round_trips_through_json_lines() {
    let t_star = find_unitary_times(2, 4.0).unwrap()[0].t;
    let r = two_qubit_gate(
        0.7,
        &pairs::up_down(),
        &GateConfig::new(t_star),
        &mut RngStream::new(8, 0),
    )
    .unwrap();
    let text = r.log.to_json_lines();
    assert_eq!(text.lines().count(), r.log.events().len() + 1);
    let back = TrajectoryLog::from_json_lines(&text).unwrap();
    assert_eq!(back, r.log);
    assert!(TrajectoryLog::from_json_lines("not json").is_err());
}
