//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed by the build contract.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, SQRT_2};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use zeno_core::chain::{pair_parity_components, pairs, PairAmplitudes, SiteIndex};
use zeno_core::hamiltonians::{gellmann_reduce, magnetic_to_gellmann, ModelParams, Vacuum};
use zeno_core::oracle::{pair_probability_full_chain, run_oracle_suite, OracleSuiteConfig};
use zeno_core::propagator::{
    default_terms, find_parity_times, find_unitary_times, free_walk_position_mean,
    g_magnitude_closed_form, g_magnitudes_spectral, scan_roots, transition_amplitudes,
    walk_position_mean_by_evolution,
};
use zeno_core::protocols::gate::pair_fidelity;
use zeno_core::protocols::{
    apply_w, asymptotic_time_per_site, create_pair, exact_mean_transfer_time,
    expected_transfer_time, kraus_completeness_tail, optimal_swap_interval,
    pair_transition_probability, parity_kraus, parity_measurement, published_pair_probability,
    transfer_compress, transfer_swap_scheme, two_qubit_gate, CompressConfig, GateConfig,
};
use zeno_core::trajectory::run_ensemble;
use zeno_core::{Error, ExecutionMode, Parity, RngStream};

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn normalized_pair(raw: [f64; 8]) -> PairAmplitudes {
    let v = [0, 1, 2, 3].map(|i| Complex64::new(raw[2 * i], raw[2 * i + 1]));
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

fn random_pair(rng: &mut RngStream) -> PairAmplitudes {
    let mut raw = [0.0; 8];
    raw.iter_mut().for_each(|x| *x = rng.standard_normal());
    normalized_pair(raw)
}

/// Pearson chi-square of `counts` (values ≥ 1) against Geometric(p) on
/// `{1, 2, …}`. Bins hold at least 5 expected counts; the last bin is the
/// tail. Returns `(statistic, p-value, bins)`.
fn geometric_chi_square(counts: &[usize], p: f64) -> (f64, f64, usize) {
    let n = counts.len() as f64;
    let mut edges = Vec::new();
    let mut tail = 1.0;
    let mut k = 1usize;
    while n * tail * p >= 5.0 && n * tail * (1.0 - p) >= 5.0 {
        edges.push((k, n * tail * p));
        tail *= 1.0 - p;
        k += 1;
    }
    let mut stat = 0.0;
    for &(k, expected) in &edges {
        let observed = counts.iter().filter(|&&c| c == k).count() as f64;
        stat += (observed - expected).powi(2) / expected;
    }
    let tail_expected = n * tail;
    let tail_observed = counts.iter().filter(|&&c| c >= k).count() as f64;
    stat += (tail_observed - tail_expected).powi(2) / tail_expected;
    let bins = edges.len() + 1;
    let p_value = ChiSquared::new((bins - 1) as f64).unwrap().sf(stat);
    (stat, p_value, bins)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let argmin = optimal_swap_interval();
    // independent dense-grid minimization
    let grid_min = (0..=50_000)
        .map(|i| 1.0 + 0.55 * i as f64 / 50_000.0)
        .min_by(|a, b| asymptotic_time_per_site(*a).total_cmp(&asymptotic_time_per_site(*b)))
        .unwrap();
    let argmin_ok = (argmin - 1.39).abs() <= 0.01 && (argmin - grid_min).abs() < 1e-4;

    let (n, dt, trials) = (50usize, 1.39, 10_000usize);
    let runs = run_ensemble(SEED, trials, |rng, _| {
        transfer_swap_scheme(n, dt, ExecutionMode::Ideal, rng).unwrap()
    });
    let times: Vec<f64> = runs.iter().map(|r| r.total_time).collect();
    let (mean, se) = mean_and_stderr(&times);
    let published = expected_transfer_time(n, dt).unwrap();
    let exact = exact_mean_transfer_time(n, dt).unwrap();
    let z = (mean - published) / se;
    let mean_ok = z.abs() <= 3.0;

    let baseline = transfer_swap_scheme(
        n,
        FRAC_PI_2,
        ExecutionMode::Ideal,
        &mut RngStream::new(SEED, 0),
    )
    .unwrap();
    let gain = (n as f64 / mean) / baseline.mean_speed - 1.0;
    let gain_ok = gain >= 0.04;
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(60);
    verdict(
        argmin_ok && mean_ok && gain_ok && fast,
        format!(
            "argmin {argmin:.4} (grid {grid_min:.4}) {}; MC mean T {mean:.3} ± {se:.3} vs published {published:.3}: {z:.1}σ {} \
             (exact n·Δt/(1−p) = {exact:.3}, {:.1}σ); speed gain over π/2 {:.1}% {}; {:.1}s {}",
            flag(argmin_ok),
            flag(mean_ok),
            (mean - exact) / se,
            100.0 * gain,
            flag(gain_ok),
            elapsed.as_secs_f64(),
            flag(fast),
        ),
    )
}

fn criterion_2() -> Verdict {
    let t = 40.0;
    let series = free_walk_position_mean(t, default_terms(t)).unwrap();
    let direct = walk_position_mean_by_evolution(t, 200).unwrap();
    let speed = series / t;
    let speed_ok = (1.67..=1.71).contains(&speed);
    let diff = (series - direct).abs();
    let match_ok = diff < 1e-6;
    verdict(
        speed_ok && match_ok,
        format!(
            "<L>/t at t=40: {speed:.5} {}; Bessel vs 200-site evolution |Δ| = {diff:.2e} {}",
            flag(speed_ok),
            flag(match_ok)
        ),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let grid = [0.5, 1.0, 1.4, 2.0, 4.0, 10.0];
    let free = transfer_compress(
        &CompressConfig::new(0.0),
        None,
        &mut RngStream::new(SEED, 0),
    )
    .unwrap()
    .result
    .mean_speed;
    let mut speeds = Vec::new();
    for f in grid {
        let cfg = CompressConfig::new(f);
        let runs = run_ensemble(SEED, 2000, |rng, _| {
            transfer_compress(&cfg, None, rng)
                .unwrap()
                .result
                .mean_speed
        });
        speeds.push(mean_and_stderr(&runs));
    }
    let (peak_idx, &(peak, peak_se)) = speeds
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .unwrap();
    let peak_f = grid[peak_idx];
    let peak_ok = (1.0..=2.0).contains(&peak_f);
    let gain = peak / free - 1.0;
    let gain_ok = gain >= 0.08;
    let high = speeds[grid.len() - 1].0;
    let high_ok = high < free;
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(600);
    let table: Vec<String> = grid
        .iter()
        .zip(&speeds)
        .map(|(f, (v, se))| format!("{f}:{v:.4}±{se:.4}"))
        .collect();
    verdict(
        peak_ok && gain_ok && high_ok && fast,
        format!(
            "free {free:.4}; [{}]; peak at f={peak_f} {}; peak gain {:.1}% (±{:.1}%) {}; v(10) {high:.4} < free {}; {:.0}s {}",
            table.join(", "),
            flag(peak_ok),
            100.0 * gain,
            100.0 * peak_se / free,
            flag(gain_ok),
            flag(high_ok),
            elapsed.as_secs_f64(),
            flag(fast),
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut worst = 0.0f64;
    let mut skipped = Vec::new();
    let mut checked = 0usize;
    for i in 1..=30_000 {
        let t = i as f64 * 1e-4;
        let closed = match g_magnitude_closed_form(t) {
            Ok(c) => c,
            Err(Error::Singular(_)) => {
                skipped.push(t);
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let (s11, s21) = g_magnitudes_spectral(t).unwrap();
        for (s, c) in [(s11, closed.0), (s21, closed.1)] {
            let s = s.expect("f+ vanishes only at excluded points");
            worst = worst.max((s - c).abs() / c.abs().max(1.0));
        }
        checked += 1;
    }
    let singular = PI / SQRT_2;
    let probes = [singular - 5e-7, singular, singular + 5e-7];
    let probes_excluded = probes
        .iter()
        .all(|&t| matches!(g_magnitude_closed_form(t), Err(Error::Singular(_))));
    let skips_ok = probes_excluded && skipped.iter().all(|t| (t - singular).abs() <= 1e-6);
    let closed_ok = worst < 1e-10;

    // roots of |g_{1k}| = 1 and of |g_{2k}| = 1 located separately
    let mut equivalence_ok = true;
    let mut roots_seen = 0;
    for k in 1..=2 {
        let d = |r: usize| {
            move |t: f64| {
                let a = transition_amplitudes(2, t, k).unwrap()[r];
                a.f_minus.norm_sqr() - a.f_plus.norm_sqr()
            }
        };
        let r1 = scan_roots(d(0), 0.0, 7.0, 1e-3);
        let r2 = scan_roots(d(1), 0.0, 7.0, 1e-3);
        let located = find_unitary_times(k, 7.0).unwrap();
        roots_seen += r1.len();
        equivalence_ok &= r1.len() == r2.len() && r1.len() == located.len();
        for ((a, b), u) in r1.iter().zip(&r2).zip(&located) {
            equivalence_ok &= (a - b).abs() < 1e-8 && (a - u.t).abs() < 1e-8;
            for amp in transition_amplitudes(2, *a, k).unwrap() {
                equivalence_ok &= (amp.g.unwrap().norm() - 1.0).abs() < 1e-9;
            }
        }
    }
    verdict(
        closed_ok && skips_ok && equivalence_ok,
        format!(
            "{checked} points, max rel. deviation {worst:.2e} {}; {} grid points excluded, poles at π/√2 ± 5e-7 rejected {}; \
             {roots_seen} roots, |g1k|=1 ⇔ |g2k|=1 {}",
            flag(closed_ok),
            skipped.len(),
            flag(skips_ok),
            flag(equivalence_ok)
        ),
    )
}

fn criterion_5() -> Verdict {
    let roots = find_unitary_times(2, 4.0).unwrap();
    let t_star = roots[0].t;
    let p_on = roots[0].probabilities[0];
    let p_off = transition_amplitudes(2, t_star, 1).unwrap()[1]
        .f_plus
        .norm_sqr();
    let cfg = GateConfig::new(t_star);
    let results = run_ensemble(SEED, 200, |rng, _| {
        let psi = random_pair(rng);
        let phi = PI * (2.0 * rng.uniform() - 1.0);
        let r = two_qubit_gate(phi, &psi, &cfg, rng);
        (psi, phi, r)
    });
    let mut worst = 0.0f64;
    let mut incomplete = 0;
    let mut on = Vec::new();
    let mut off = Vec::new();
    for (psi, phi, r) in &results {
        match r {
            Ok(g) => {
                worst = worst.max(1.0 - pair_fidelity(&g.final_state, &apply_w(*phi, psi)));
                on.push(g.switch_on_attempts);
                off.push(g.switch_off_attempts);
            }
            Err(_) => incomplete += 1,
        }
    }
    let fidelity_ok = worst <= 1e-9;
    let complete_ok = incomplete == 0;
    let (x_on, p_val_on, b_on) = geometric_chi_square(&on, p_on);
    let (x_off, p_val_off, b_off) = geometric_chi_square(&off, p_off);
    let geometric_ok = p_val_on > 0.01 && p_val_off > 0.01;
    verdict(
        fidelity_ok && complete_ok && geometric_ok,
        format!(
            "t* = {t_star:.4}; worst infidelity {worst:.1e} {}; {incomplete}/200 hit the cap of 50 {}; \
             switch-on χ²={x_on:.2} ({b_on} bins, p={p_val_on:.3}), switch-off χ²={x_off:.2} ({b_off} bins, p={p_val_off:.3}) {}",
            flag(fidelity_ok),
            flag(complete_ok),
            flag(geometric_ok)
        ),
    )
}

fn sector_projection(psi: &PairAmplitudes, x: Parity) -> PairAmplitudes {
    let (s, a) = ((psi[1] + psi[2]) * 0.5, (psi[1] - psi[2]) * 0.5);
    let z = Complex64::new(0.0, 0.0);
    let v = match x {
        Parity::Symmetric => [psi[0], s, s, psi[3]],
        Parity::Antisymmetric => [z, a, -a, z],
    };
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.map(|c| c / n)
}

fn criterion_6() -> Verdict {
    let psi = pairs::up_down();
    let (expected, _) = pair_parity_components(&psi);
    let trials = 10_000;
    let runs = run_ensemble(SEED, trials, |rng, _| {
        let first = parity_measurement(&psi, 200, ExecutionMode::Ideal, rng).unwrap();
        let again = parity_measurement(&first.final_state, 200, ExecutionMode::Ideal, rng).unwrap();
        (first, again)
    });
    let sym = runs
        .iter()
        .filter(|(r, _)| r.outcome == Parity::Symmetric)
        .count();
    let freq = sym as f64 / trials as f64;
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    let z = (freq - expected) / sigma;
    let born_ok = z.abs() <= 3.0;
    let worst = runs
        .iter()
        .map(|(r, _)| 1.0 - pair_fidelity(&r.final_state, &sector_projection(&psi, r.outcome)))
        .fold(0.0, f64::max);
    let projection_ok = worst < 1e-10;
    let tail = kraus_completeness_tail(&parity_kraus(find_parity_times().unwrap()).unwrap(), 60);
    let tail_ok = tail < 1e-10;
    let repeated = runs.iter().filter(|(a, b)| a.outcome == b.outcome).count();
    let repeat_ok = repeated == trials;
    verdict(
        born_ok && projection_ok && tail_ok && repeat_ok,
        format!(
            "P(S) = {freq:.4} vs {expected:.1} ({z:+.2}σ) {}; worst post-outcome infidelity {worst:.1e} {}; \
             Kraus tail at N=60 {tail:.1e} {}; repeatability {repeated}/{trials} {}",
            flag(born_ok),
            flag(projection_ok),
            flag(tail_ok),
            flag(repeat_ok)
        ),
    )
}

fn criterion_7() -> Verdict {
    let params = ModelParams::with_theta(FRAC_PI_8);
    let lambda = params.lambda().abs();
    let period = 2.0 * PI / (3.0 * lambda);
    let mut worst = 0.0f64;
    let mut routes = 0.0f64;
    for i in 1..=100 {
        let t = period * i as f64 / 100.0;
        let block = pair_transition_probability(&params, t).unwrap();
        let chain = pair_probability_full_chain(&params, t).unwrap();
        routes = routes.max((block - chain).abs());
        worst = worst.max((block - published_pair_probability(&params, t)).abs());
    }
    let closed_ok = worst < 1e-10;
    let trials = 9000;
    let runs = run_ensemble(SEED, trials, |rng, _| {
        create_pair(&params, rng).unwrap().success
    });
    let hits = runs.iter().filter(|&&s| s).count();
    let freq = hits as f64 / trials as f64;
    let target = 8.0 / 9.0;
    let sigma = (target * (1.0 - target) / trials as f64).sqrt();
    let z = (freq - target) / sigma;
    let mc_ok = z.abs() <= 3.0;
    verdict(
        closed_ok && mc_ok,
        format!(
            "max |block − (8/9)sin²(3tλ/2)| = {worst:.3} {} (block vs full chain {routes:.1e}); \
             success fraction at t=π/(3λ) {freq:.4} vs 8/9 ({z:.0}σ) {}",
            flag(closed_ok),
            flag(mc_ok)
        ),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let report = run_oracle_suite(&OracleSuiteConfig::default()).unwrap();
    let value = |name: &str| {
        report
            .check(name)
            .unwrap_or_else(|| panic!("missing check {name}"))
            .value
    };
    let swap = value("projected-swap-identities");
    let swap_ok = swap == 0.0;
    let cross = value("block-decoupling-cross-influence");
    let cross_ok = cross < 1e-12;
    let comm = value("number-operator-commutators");
    let comm_ok = comm < 1e-12;
    let ladder = &report.zeno_ladder;
    let ratios: Vec<f64> = ladder.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let ladder_ok = ladder.windows(2).all(|w| w[1].1 < w[0].1)
        && ratios.iter().all(|r| (0.3..=0.8).contains(r));
    let inf = value("two-qubit-effective-infidelity");
    let inf_ok = inf < 1e-2;
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(300);
    verdict(
        swap_ok && cross_ok && comm_ok && ladder_ok && inf_ok && fast,
        format!(
            "swap identities residual {swap:e} {}; decoupling cross-influence {cross:.1e} {}; [H,N_m] {comm:.1e} {}; \
             Zeno ladder ratios {:?} {}; two-qubit infidelity at f=10³ {inf:.1e} {}; {:.1}s {}",
            flag(swap_ok),
            flag(cross_ok),
            flag(comm_ok),
            ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            flag(ladder_ok),
            flag(inf_ok),
            elapsed.as_secs_f64(),
            flag(fast),
        ),
    )
}

fn criterion_9() -> Verdict {
    let h = 1.0 / SQRT_2;
    let fields = [
        [0.3, -1.2, 0.7],
        [1.5, 0.4, -2.0],
        [0.0, 0.0, 1.0],
        [-0.8, 2.2, 0.1],
    ];
    let mut worst_zero = 0.0f64;
    let mut worst_down = 0.0f64;
    let mut worst_coeff = 0.0f64;
    for (k, b) in fields.iter().enumerate() {
        let site = SiteIndex::new(k + 1).unwrap();
        let coeffs = magnetic_to_gellmann(&fields, Vacuum::Zero);
        let c = coeffs[k];
        let expected_c = [0.0, 0.0, b[2], b[0] * h, b[1] * h, b[0] * h, -b[1] * h, 0.0];
        worst_coeff = worst_coeff.max(
            c.iter()
                .zip(&expected_c)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );

        // B_z Z
        let zero = gellmann_reduce(&coeffs, site).unwrap();
        let expected = [[b[2], 0.0, 0.0, 0.0], [0.0, 0.0, -b[2], 0.0]];
        worst_zero = worst_zero.max(max_dev(zero.hamiltonian.matrix(), &expected));

        // (B_x X + B_y Y)/√2 + B_z Z/2
        let down = gellmann_reduce(&magnetic_to_gellmann(&fields, Vacuum::Down), site).unwrap();
        let expected = [
            [b[2] / 2.0, 0.0, b[0] * h, -b[1] * h],
            [b[0] * h, b[1] * h, -b[2] / 2.0, 0.0],
        ];
        worst_down = worst_down.max(max_dev(down.hamiltonian.matrix(), &expected));
    }
    let ok = worst_zero < 1e-14 && worst_down < 1e-14 && worst_coeff < 1e-14;
    verdict(
        ok,
        format!(
            "Gell-Mann coefficients {worst_coeff:.1e}; vacuum |0⟩ → B_z Z: {worst_zero:.1e}; \
             vacuum |↓⟩ → (B_x X + B_y Y)/√2 + B_z Z/2: {worst_down:.1e}"
        ),
    )
}

/// Max deviation from `[[re00, im00, re01, im01], [re10, im10, re11, im11]]`.
fn max_dev(m: &nalgebra::DMatrix<Complex64>, expected: &[[f64; 4]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            let e = Complex64::new(expected[r][2 * c], expected[r][2 * c + 1]);
            worst = worst.max((m[(r, c)] - e).norm());
        }
    }
    worst
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let invocations: [&[&str]; 6] = [
        &[
            "transfer", "--scheme", "swap", "--n", "20", "--dt", "1.2,1.39", "--trials", "300",
        ],
        &[
            "transfer", "--scheme", "compress", "--f", "1.4,4", "--trials", "20",
        ],
        &[
            "gate",
            "--phi",
            "0.9",
            "--state",
            "plus,minus",
            "--trials",
            "50",
        ],
        &[
            "parity", "--state", "plus,up", "--trials", "2000", "--format", "json",
        ],
        &["paircreate", "--theta", "0.3927", "--trials", "500"],
        &["gfunctions", "--tmax", "3", "--steps", "300"],
    ];
    let mut identical = 0;
    let mut failures = Vec::new();
    for (i, args) in invocations.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("out-{i}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_zeno"))
                .args(*args)
                .args(["--seed", "31", "--output"])
                .arg(&path)
                .status()
                .unwrap();
            assert!(status.success(), "{args:?} exited with {status}");
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] == outputs[1] && !outputs[0].is_empty() {
            identical += 1;
        } else {
            failures.push(args[0]);
        }
    }
    let ok = identical == invocations.len();
    verdict(
        ok,
        format!(
            "{identical}/{} invocations byte-identical across runs {failures:?}",
            invocations.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("scheme-1 analytics", criterion_1),
        ("free-walk speed", criterion_2),
        ("scheme-3 anti-Zeno", criterion_3),
        ("g-functions", criterion_4),
        ("two-qubit gate", criterion_5),
        ("parity measurement", criterion_6),
        ("pair creation", criterion_7),
        ("oracle suite", criterion_8),
        ("single-qubit reduction", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
