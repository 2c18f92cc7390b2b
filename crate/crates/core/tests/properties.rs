use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use zeno_core::chain::{
    make_block_config, pair_parity_components, PairAmplitudes, PositionWavefunction, SiteIndex,
    TwoQubitBlockState,
};
use zeno_core::hamiltonians::{conditional_hamiltonians, HermitianOperator, ModelParams};
use zeno_core::propagator::{transition_amplitudes, Propagator};
use zeno_core::protocols::{
    apply_w, gate::pair_fidelity, parity_measurement, two_qubit_gate, w_matrix, wrap_phase,
    ExecutionMode, GateConfig,
};
use zeno_core::trajectory::{measure_position, Generator, MeasurementSpec, RngStream, WalkerState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn normalized(raw: Vec<(f64, f64)>) -> Option<Vec<Complex64>> {
    let v: Vec<Complex64> = raw.into_iter().map(|(a, b)| c(a, b)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.into_iter().map(|z| z / n).collect())
}

fn state_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_filter_map("zero vector", normalized)
}

fn pair_state() -> impl Strategy<Value = PairAmplitudes> {
    state_vec(4).prop_map(|v| [v[0], v[1], v[2], v[3]])
}

fn hermitian(max_dim: usize) -> impl Strategy<Value = HermitianOperator> {
    (1..=max_dim).prop_flat_map(|d| {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), d * d).prop_map(move |raw| {
            let m = DMatrix::from_fn(d, d, |i, j| c(raw[i * d + j].0, raw[i * d + j].1));
            let h = (&m + m.adjoint()) * c(0.5, 0.0);
            HermitianOperator::new(h).unwrap()
        })
    })
}

fn block_state(max_size: usize) -> impl Strategy<Value = TwoQubitBlockState> {
    (1..=max_size, 1usize..5).prop_flat_map(|(size, offset)| {
        state_vec(4 * size).prop_map(move |v| {
            let rows: Vec<PairAmplitudes> = v.chunks(4).map(|r| [r[0], r[1], r[2], r[3]]).collect();
            TwoQubitBlockState::from_product_rows(&rows, SiteIndex::new(offset).unwrap()).unwrap()
        })
    })
}

/// Normalized `Sψ` or `Aψ`.
fn sector_projection(psi: &PairAmplitudes, x: zeno_core::Parity) -> PairAmplitudes {
    let (mid_s, mid_a) = ((psi[1] + psi[2]) * 0.5, (psi[1] - psi[2]) * 0.5);
    let v = match x {
        zeno_core::Parity::Symmetric => [psi[0], mid_s, mid_s, psi[3]],
        zeno_core::Parity::Antisymmetric => [c(0.0, 0.0), mid_a, -mid_a, c(0.0, 0.0)],
    };
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary_and_composes(h in hermitian(6), t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
        let p = Propagator::global();
        let d = h.dimension();
        let u1 = p.unitary(&h, t1);
        let u2 = p.unitary(&h, t2);
        let u12 = p.unitary(&h, t1 + t2);
        prop_assert!(max_abs(&(u1.adjoint() * &u1 - DMatrix::identity(d, d))) < 1e-10);
        prop_assert!(max_abs(&(&u1 * &u2 - u12)) < 1e-10);
    }

    #[test]
    fn block_partition_covers_unmeasured_sites(n in 1usize..30, picks in prop::collection::vec(1usize..30, 0..10)) {
        let measured: Vec<usize> = picks.into_iter().filter(|&s| s <= n).collect();
        let cfg = make_block_config(n, measured.clone()).unwrap();
        let mut covered = vec![false; n + 1];
        for b in cfg.blocks() {
            for s in b.left.get()..=b.right.get() {
                prop_assert!(!covered[s]);
                prop_assert!(!measured.contains(&s));
                covered[s] = true;
            }
            prop_assert!(b.left.get() == 1 || measured.contains(&(b.left.get() - 1)));
            prop_assert!(b.right.get() == n || measured.contains(&(b.right.get() + 1)));
        }
        for s in 1..=n {
            prop_assert_eq!(covered[s], !measured.contains(&s));
        }
    }

    #[test]
    fn boundary_shift_is_idempotent_and_reversible(n in 2usize..20, site in 1usize..20, picks in prop::collection::vec(1usize..20, 0..6)) {
        prop_assume!(site <= n);
        let measured: Vec<usize> = picks.into_iter().filter(|&s| s <= n && s != site).collect();
        let cfg = make_block_config(n, measured).unwrap();
        let once = cfg.shift_boundary(site, true).unwrap();
        prop_assert_eq!(&once.shift_boundary(site, true).unwrap(), &once);
        prop_assert_eq!(&once.shift_boundary(site, false).unwrap(), &cfg);
    }

    #[test]
    fn serde_round_trips_are_bit_exact(state in block_state(4), walk in state_vec(5), j in 0.1..3.0f64, theta in -3.0..3.0f64, h in hermitian(4)) {
        let params = ModelParams::new(j, theta);
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&params).unwrap()).unwrap();
        prop_assert_eq!(back, params);
        let back: TwoQubitBlockState = serde_json::from_str(&serde_json::to_string(&state).unwrap()).unwrap();
        prop_assert_eq!(back, state.clone());
        let back: HermitianOperator = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        prop_assert_eq!(back, h);
        let w = PositionWavefunction::new(walk, SiteIndex::new(3).unwrap()).unwrap();
        let back: PositionWavefunction = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn conditional_evolution_conserves_parity(state in block_state(5), t in 0.0..20.0f64) {
        let (plus, minus) = conditional_hamiltonians(state.size()).unwrap();
        let before = state.parity_components().unwrap();
        let mut s = state.clone();
        s.evolve(&Generator::Conditional { plus, minus }, t).unwrap();
        let after = s.parity_components().unwrap();
        prop_assert!((before.0 - after.0).abs() < 1e-12);
        prop_assert!((before.1 - after.1).abs() < 1e-12);
    }

    #[test]
    fn g_is_invariant_under_constant_shift(t in 0.05..6.0f64, shift in -4.0..4.0f64, k in 1usize..=2) {
        let (plus, minus) = conditional_hamiltonians(2).unwrap();
        let p = Propagator::global();
        let base = transition_amplitudes(2, t, k).unwrap();
        let up = p.unitary(&plus.shifted(shift), t);
        let um = p.unitary(&minus.shifted(shift), t);
        for (r, amp) in base.iter().enumerate() {
            let (fp, fm) = (up[(r, k - 1)], um[(r, k - 1)]);
            prop_assert!((fp.norm() - amp.f_plus.norm()).abs() < 1e-12);
            prop_assert!((fm.norm() - amp.f_minus.norm()).abs() < 1e-12);
            if let Some(g) = amp.g {
                prop_assert!((fm / fp - g).norm() < 1e-9 * g.norm().max(1.0));
            }
        }
    }

    #[test]
    fn wrap_phase_range_and_congruence(x in -100.0..100.0f64) {
        let y = wrap_phase(x);
        prop_assert!(y > -std::f64::consts::PI && y <= std::f64::consts::PI);
        let k = (x - y) / std::f64::consts::TAU;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn w_gates_compose(a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let lhs = w_matrix(a) * w_matrix(b);
        let rhs = w_matrix(a + b);
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn measurement_keeps_norm(state in block_state(5), seed in any::<u64>()) {
        let offset = state.block_offset().get();
        let sites: Vec<SiteIndex> = (offset..offset + state.size()).step_by(2).map(|s| SiteIndex::new(s).unwrap()).collect();
        let (_, next) = measure_position(&state, &MeasurementSpec::ideal(sites), &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!((next.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gate_implements_w(psi in pair_state(), phi in -6.0..6.0f64, seed in any::<u64>()) {
        let t_star = zeno_core::propagator::find_unitary_times(2, 4.0).unwrap()[0].t;
        let r = two_qubit_gate(phi, &psi, &GateConfig::new(t_star), &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(pair_fidelity(&r.final_state, &apply_w(phi, &psi)) > 1.0 - 1e-9);
        let total: f64 = r.applied_phase_history.iter().sum();
        prop_assert!(wrap_phase(total - phi).abs() < 1e-9);
        prop_assert!(r.residual_phase.abs() < 1e-9);
    }

    #[test]
    fn parity_measurement_is_repeatable_projection(psi in pair_state(), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let first = parity_measurement(&psi, 200, ExecutionMode::Ideal, &mut rng).unwrap();
        let (s, a) = pair_parity_components(&first.final_state);
        let weight = match first.outcome {
            zeno_core::Parity::Symmetric => s,
            zeno_core::Parity::Antisymmetric => a,
        };
        prop_assert!((weight - 1.0).abs() < 1e-10);
        let projected = sector_projection(&psi, first.outcome);
        prop_assert!(pair_fidelity(&projected, &first.final_state) > 1.0 - 1e-10);
        for _ in 0..3 {
            let again = parity_measurement(&first.final_state, 200, ExecutionMode::Ideal, &mut rng).unwrap();
            prop_assert_eq!(again.outcome, first.outcome);
            prop_assert!(pair_fidelity(&again.final_state, &first.final_state) > 1.0 - 1e-10);
        }
    }
}
