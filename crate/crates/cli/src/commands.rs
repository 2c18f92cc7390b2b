//! Subcommand bodies. Each builds one [`Report`].

use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Value};

use zeno_core::chain::{pair_parity_components, pairs, PairAmplitudes, SiteIndex};
use zeno_core::hamiltonians::{gellmann_reduce, magnetic_to_gellmann, ModelParams, Vacuum};
use zeno_core::oracle::{run_oracle_suite, OracleSuiteConfig};
use zeno_core::propagator::{find_unitary_times, g_magnitude_closed_form, transition_amplitudes};
use zeno_core::protocols::gate::pair_fidelity;
use zeno_core::protocols::{
    apply_w, create_pair, exact_mean_transfer_time, expected_transfer_time,
    pair_transition_probability, parity_measurement, published_pair_probability,
    single_qubit_rotation, transfer_compress, transfer_imaging, transfer_swap_scheme,
    two_qubit_gate, CompressConfig, GateConfig,
};
use zeno_core::trajectory::run_ensemble;
use zeno_core::{Error, Parity};

use crate::output::{mean_and_stderr, Report};
use crate::{
    GArgs, GateArgs, OracleArgs, PairArgs, ParityArgs, RotateArgs, Scheme, TransferArgs, VacuumArg,
};

/// Rates of the standard compression sweep.
pub const SWEEP_F: [f64; 7] = [0.0, 0.5, 1.0, 1.4, 2.0, 4.0, 10.0];

/// Frames in a `--profile` density table.
const PROFILE_FRAMES: usize = 80;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyChain(_)
            | Error::SiteOutOfRange { .. }
            | Error::EmptyBlock
            | Error::ChainTooLarge { .. }
            | Error::InvalidParameter(_)
            | Error::Schedule(_)
            | Error::NotNormalized(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub struct Done {
    pub report: Report,
    pub checks_passed: bool,
}

impl From<Report> for Done {
    fn from(report: Report) -> Self {
        Self {
            report,
            checks_passed: true,
        }
    }
}

type Outcome = Result<Done, CliError>;

fn num(x: f64) -> Value {
    Value::from(x)
}

fn failure_kind(e: &Error) -> Option<&'static str> {
    match e {
        Error::Leak(_) => Some("leak"),
        Error::IterationCap { .. } => Some("cap"),
        _ => None,
    }
}

/// Parses `"up,down"`, `"plus,minus"`, `"singlet"`, `"triplet0"` or four
/// real amplitudes in the order `↑↑, ↑↓, ↓↑, ↓↓`.
pub fn parse_pair(spec: &str) -> Result<PairAmplitudes, CliError> {
    let s = spec.trim().to_ascii_lowercase();
    match s.as_str() {
        "singlet" => return Ok(pairs::singlet()),
        "triplet0" | "triplet" => return Ok(pairs::triplet_zero()),
        _ => {}
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let qubit = |p: &str| -> Option<[f64; 2]> {
        match p {
            "up" | "u" => Some([1.0, 0.0]),
            "down" | "d" => Some([0.0, 1.0]),
            "plus" | "+" => Some([h, h]),
            "minus" | "-" => Some([h, -h]),
            _ => None,
        }
    };
    let amps: Vec<f64> = match parts.as_slice() {
        [a, b] => {
            let (qa, qb) = qubit(a)
                .zip(qubit(b))
                .ok_or_else(|| CliError::Usage(format!("unknown qubit state in {spec:?}")))?;
            vec![qa[0] * qb[0], qa[0] * qb[1], qa[1] * qb[0], qa[1] * qb[1]]
        }
        [_, _, _, _] => parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|e| CliError::Usage(format!("{p:?}: {e}")))
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(CliError::Usage(format!("cannot parse pair state {spec:?}"))),
    };
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CliError::Usage(format!(
            "pair state {spec:?} has zero norm"
        )));
    }
    Ok([0, 1, 2, 3].map(|i| Complex64::new(amps[i] / norm, 0.0)))
}

pub fn transfer(args: &TransferArgs, seed: u64) -> Outcome {
    args.mode.execution_mode().validate()?;
    match args.scheme {
        Scheme::Swap => transfer_swap(args, seed),
        Scheme::Imaging => transfer_image(args, seed),
        Scheme::Compress if args.profile => compress_profile(args, seed),
        Scheme::Compress => compress_sweep(args, seed),
    }
}

fn transfer_swap(args: &TransferArgs, seed: u64) -> Outcome {
    let mode = args.mode.execution_mode();
    let mut report = Report::new(
        "transfer",
        seed,
        args,
        &[
            "dt",
            "mean_speed",
            "std_error",
            "mean_time",
            "time_std_error",
            "published_mean_time",
            "exact_mean_time",
            "completed",
            "leaked",
        ],
    );
    for &dt in &args.dt {
        let published = expected_transfer_time(args.n, dt)?;
        let exact = exact_mean_transfer_time(args.n, dt)?;
        let runs = run_ensemble(seed, args.trials as usize, |rng, _| {
            transfer_swap_scheme(args.n, dt, mode, rng)
        });
        let mut speeds = Vec::new();
        let mut times = Vec::new();
        let mut leaked = 0u64;
        for r in runs {
            match r {
                Ok(r) => {
                    speeds.push(r.mean_speed);
                    times.push(r.total_time);
                }
                Err(Error::Leak(_)) => leaked += 1,
                Err(e) => return Err(e.into()),
            }
        }
        let (v, v_se) = mean_and_stderr(&speeds);
        let (t, t_se) = mean_and_stderr(&times);
        report.push(vec![
            num(dt),
            num(v),
            num(v_se),
            num(t),
            num(t_se),
            num(published),
            num(exact),
            json!(speeds.len()),
            json!(leaked),
        ]);
    }
    Ok(report.into())
}

fn transfer_image(args: &TransferArgs, seed: u64) -> Outcome {
    let mut report = Report::new(
        "transfer",
        seed,
        args,
        &[
            "big_dt",
            "mean_speed",
            "std_error",
            "mean_time",
            "block_size",
            "completed",
        ],
    );
    for &big_dt in &args.dt {
        if !(big_dt > 0.0) || !big_dt.is_finite() {
            return Err(CliError::Usage(format!(
                "imaging interval must be positive, got {big_dt}"
            )));
        }
        let block = args
            .block_size
            .unwrap_or((2.0 * big_dt).ceil() as usize + 12);
        let runs = run_ensemble(seed, args.trials as usize, |rng, _| {
            transfer_imaging(args.n, big_dt, block, args.max_rounds, rng)
        });
        let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let speeds: Vec<f64> = runs.iter().map(|r| r.mean_speed).collect();
        let times: Vec<f64> = runs.iter().map(|r| r.total_time).collect();
        let (v, se) = mean_and_stderr(&speeds);
        let (t, _) = mean_and_stderr(&times);
        let completed = runs.iter().filter(|r| r.completed).count();
        report.push(vec![
            num(big_dt),
            num(v),
            num(se),
            num(t),
            json!(block),
            json!(completed),
        ]);
    }
    Ok(report.into())
}

fn compress_rates(args: &TransferArgs) -> Result<Vec<f64>, CliError> {
    let rates = if args.sweep_f {
        SWEEP_F.to_vec()
    } else {
        args.f.clone()
    };
    if let Some(bad) = rates.iter().find(|f| !(**f >= 0.0) || !f.is_finite()) {
        return Err(CliError::Usage(format!(
            "shift rate must be non-negative, got {bad}"
        )));
    }
    Ok(rates)
}

fn compress_sweep(args: &TransferArgs, seed: u64) -> Outcome {
    let rates = compress_rates(args)?;
    let mut report = Report::new(
        "transfer",
        seed,
        args,
        &[
            "f",
            "mean_speed",
            "std_error",
            "mean_boundary_hits",
            "trials",
        ],
    );
    for f in rates {
        let cfg = CompressConfig::new(f);
        // free propagation is deterministic
        let trials = if f == 0.0 { 1 } else { args.trials as usize };
        let runs = run_ensemble(seed, trials, |rng, _| transfer_compress(&cfg, None, rng));
        let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let speeds: Vec<f64> = runs.iter().map(|r| r.result.mean_speed).collect();
        let hits: Vec<f64> = runs.iter().map(|r| r.result.failures as f64).collect();
        let (v, se) = mean_and_stderr(&speeds);
        let (h, _) = mean_and_stderr(&hits);
        report.push(vec![num(f), num(v), num(se), num(h), json!(trials)]);
    }
    report.note("speed_estimator", "slope of <L> between T/2 and T");
    Ok(report.into())
}

fn compress_profile(args: &TransferArgs, seed: u64) -> Outcome {
    let f = compress_rates(args)?[0];
    let cfg = CompressConfig::new(f);
    let every = if f == 0.0 {
        PROFILE_FRAMES
    } else {
        ((cfg.horizon * f).round() as usize / PROFILE_FRAMES).max(1)
    };
    let mut rng = zeno_core::RngStream::new(seed, 0);
    let run = transfer_compress(&cfg, Some(every), &mut rng)?;
    let mut report = Report::new("transfer", seed, args, &["t", "site", "probability"]);
    report.note("profile_rate", f);
    for (t, p) in &run.profile {
        for (k, q) in p.iter().enumerate() {
            report.push(vec![num(*t), json!(k + 1), num(*q)]);
        }
    }
    Ok(report.into())
}

fn unitary_time(root: usize) -> Result<f64, CliError> {
    let mut t_max = 8.0;
    while t_max <= 512.0 {
        let roots = find_unitary_times(2, t_max)?;
        if let Some(r) = roots.get(root) {
            return Ok(r.t);
        }
        t_max *= 2.0;
    }
    Err(CliError::Usage(format!(
        "no unitary switching time with index {root} below t = 512"
    )))
}

pub fn gate(args: &GateArgs, seed: u64) -> Outcome {
    let psi = parse_pair(&args.state)?;
    let mode = args.mode.execution_mode();
    mode.validate()?;
    if !args.phi.is_finite() {
        return Err(CliError::Usage("φ must be finite".into()));
    }
    let t_star = unitary_time(args.root)?;
    let cfg = GateConfig {
        t_star,
        cap: args.cap,
        mode,
    };
    let target = apply_w(args.phi, &psi);
    let runs = run_ensemble(seed, args.trials as usize, |rng, _| {
        two_qubit_gate(args.phi, &psi, &cfg, rng)
    });
    let mut report = Report::new(
        "gate",
        seed,
        args,
        &[
            "trial",
            "status",
            "fidelity",
            "iterations",
            "switch_on_attempts",
            "switch_off_attempts",
            "residual_phase",
        ],
    );
    report.note("t_star", t_star);
    for (i, r) in runs.into_iter().enumerate() {
        let row = match r {
            Ok(g) => vec![
                json!(i),
                json!("ok"),
                num(pair_fidelity(&g.final_state, &target)),
                json!(g.iterations),
                json!(g.switch_on_attempts),
                json!(g.switch_off_attempts),
                num(g.residual_phase),
            ],
            Err(e) => match failure_kind(&e) {
                Some(kind) => vec![
                    json!(i),
                    json!(kind),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                ],
                None => return Err(e.into()),
            },
        };
        report.push(row);
    }
    Ok(report.into())
}

pub fn parity(args: &ParityArgs, seed: u64) -> Outcome {
    let psi = parse_pair(&args.state)?;
    let mode = args.mode.execution_mode();
    mode.validate()?;
    let (sym, antisym) = pair_parity_components(&psi);
    let runs = run_ensemble(seed, args.trials as usize, |rng, _| {
        parity_measurement(&psi, args.cap, mode, rng)
    });
    let n = runs.len() as f64;
    let mut counts = [0usize; 2];
    let mut inconclusive = [0usize; 2];
    let mut failed = 0usize;
    for r in runs {
        match r {
            Ok(p) => {
                let i = usize::from(p.outcome == Parity::Antisymmetric);
                counts[i] += 1;
                inconclusive[i] += p.inconclusive_count;
            }
            Err(e) if failure_kind(&e).is_some() => failed += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let mut report = Report::new(
        "parity",
        seed,
        args,
        &[
            "outcome",
            "count",
            "frequency",
            "expected",
            "std_error",
            "mean_inconclusive",
        ],
    );
    for (i, (label, expected)) in [("S", sym), ("A", antisym)].into_iter().enumerate() {
        let freq = counts[i] as f64 / n;
        let se = (expected * (1.0 - expected) / n).sqrt();
        let mean_inc = if counts[i] > 0 {
            inconclusive[i] as f64 / counts[i] as f64
        } else {
            f64::NAN
        };
        report.push(vec![
            json!(label),
            json!(counts[i]),
            num(freq),
            num(expected),
            num(se),
            num(mean_inc),
        ]);
    }
    report.push(vec![
        json!("failed"),
        json!(failed),
        num(failed as f64 / n),
        num(0.0),
        num(0.0),
        Value::Null,
    ]);
    Ok(report.into())
}

pub fn paircreate(args: &PairArgs, seed: u64) -> Outcome {
    if !(args.coupling > 0.0) || !args.theta.is_finite() {
        return Err(CliError::Usage(
            "coupling must be positive and θ finite".into(),
        ));
    }
    let params = ModelParams::new(args.coupling, args.theta);
    let runs = run_ensemble(seed, args.trials as usize, |rng, _| {
        create_pair(&params, rng)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let n = runs.len() as f64;
    let successes = runs.iter().filter(|r| r.success).count();
    let time = runs[0].time;
    let published = published_pair_probability(&params, time);
    let block = pair_transition_probability(&params, time)?;
    let fidelity: f64 = runs
        .iter()
        .filter(|r| r.success)
        .map(|r| r.fidelity_psi_plus)
        .sum::<f64>()
        / successes.max(1) as f64;
    let mut report = Report::new(
        "paircreate",
        seed,
        args,
        &[
            "theta",
            "lambda",
            "time",
            "trials",
            "successes",
            "success_fraction",
            "std_error",
            "two_particle_probability",
            "psi_plus_probability",
            "published_probability",
            "mean_success_fidelity",
        ],
    );
    let p = runs[0].probability;
    report.push(vec![
        num(args.theta),
        num(params.lambda()),
        num(time),
        json!(runs.len()),
        json!(successes),
        num(successes as f64 / n),
        num((p * (1.0 - p) / n).sqrt()),
        num(p),
        num(block),
        num(published),
        num(fidelity),
    ]);
    Ok(report.into())
}

pub fn gfunctions(args: &GArgs, seed: u64) -> Outcome {
    if !(args.tmax > 0.0) || !args.tmax.is_finite() || args.steps == 0 {
        return Err(CliError::Usage(
            "tmax must be positive and steps at least 1".into(),
        ));
    }
    let mut report = Report::new(
        "gfunctions",
        seed,
        args,
        &[
            "t",
            "abs_g11",
            "abs_g21",
            "closed_abs_g11",
            "closed_abs_g21",
            "phase_g11",
            "phase_g21",
            "p12_triplet",
            "p12_singlet",
        ],
    );
    let opt = |x: Option<f64>| x.map(num).unwrap_or(Value::Null);
    for i in 1..=args.steps {
        let t = args.tmax * i as f64 / args.steps as f64;
        let from1 = transition_amplitudes(2, t, 1)?;
        let from2 = transition_amplitudes(2, t, 2)?;
        let closed = match g_magnitude_closed_form(t) {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(Error::Singular(_)) => (None, None),
            Err(e) => return Err(e.into()),
        };
        report.push(vec![
            num(t),
            opt(from1[0].g.map(|g| g.norm())),
            opt(from1[1].g.map(|g| g.norm())),
            opt(closed.0),
            opt(closed.1),
            opt(from1[0].phase),
            opt(from1[1].phase),
            num(from2[0].f_plus.norm_sqr()),
            num(from2[0].f_minus.norm_sqr()),
        ]);
    }
    Ok(report.into())
}

pub fn oracle_verify(args: &OracleArgs, seed: u64) -> Outcome {
    let config = OracleSuiteConfig {
        n: args.n,
        zeno_base_frequency: args.zeno_f,
        two_qubit_frequency: args.two_qubit_f,
        ..OracleSuiteConfig::default()
    };
    if !(config.n >= 2) {
        return Err(CliError::Usage(format!(
            "oracle chain needs at least 2 sites, got {}",
            config.n
        )));
    }
    let suite = run_oracle_suite(&config)?;
    let mut report = Report::new(
        "oracle-verify",
        seed,
        args,
        &["check", "value", "condition", "passed"],
    );
    report.note(
        "zeno_ladder",
        serde_json::to_value(&suite.zeno_ladder).expect("json"),
    );
    for c in &suite.checks {
        report.push(vec![
            json!(c.name),
            num(c.value),
            json!(c.condition),
            json!(c.passed),
        ]);
    }
    Ok(Done {
        report,
        checks_passed: suite.passed(),
    })
}

pub fn rotate(args: &RotateArgs, seed: u64) -> Outcome {
    let vacuum = match args.vacuum {
        VacuumArg::Zero => Vacuum::Zero,
        VacuumArg::Down => Vacuum::Down,
    };
    if !args.duration.is_finite() {
        return Err(CliError::Usage("duration must be finite".into()));
    }
    let site = SiteIndex::new(args.site)?;
    let reduced = gellmann_reduce(&magnetic_to_gellmann(&args.fields, vacuum), site)?;
    let u = single_qubit_rotation(&args.fields, site, args.duration, vacuum)?;
    let mut report = Report::new("rotate", seed, args, &["matrix", "row", "col", "re", "im"]);
    report.note("scalar_rate", reduced.scalar_rate);
    for (label, m) in [
        ("hamiltonian", reduced.hamiltonian.matrix()),
        ("unitary", &u),
    ] {
        for r in 0..2 {
            for c in 0..2 {
                report.push(vec![
                    json!(label),
                    json!(r + 1),
                    json!(c + 1),
                    num(m[(r, c)].re),
                    num(m[(r, c)].im),
                ]);
            }
        }
    }
    Ok(report.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_specs() {
        assert_eq!(parse_pair("up,down").unwrap(), pairs::up_down());
        assert_eq!(parse_pair(" Singlet ").unwrap(), pairs::singlet());
        let p = parse_pair("1,0,0,1").unwrap();
        assert!((p[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(parse_pair("up,sideways").is_err());
        assert!(parse_pair("0,0,0,0").is_err());
        assert!(parse_pair("up").is_err());
    }

    #[test]
    fn validation_errors_are_usage() {
        let e: CliError = Error::InvalidParameter("x".into()).into();
        assert_eq!(e.exit_code(), 1);
        let e: CliError = Error::IterationCap {
            protocol: "p",
            cap: 1,
        }
        .into();
        assert_eq!(e.exit_code(), 2);
    }
}
