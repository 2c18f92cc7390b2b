//! The whole oracle suite as a list of named checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    boundary_leak_probability, number_operator_commutators, pair_probability_full_chain,
    single_qubit_sector_residual, verify_block_decoupling, verify_projected_swap,
    verify_two_qubit_effective, zeno_convergence, FullChainState, ZenoScenario,
};
use crate::chain::pairs;
use crate::error::Result;
use crate::hamiltonians::{uls_full_hamiltonian, ModelParams};
use crate::propagator::{find_unitary_times, Propagator};
use crate::protocols::{pair_transition_probability, published_pair_probability};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSuiteConfig {
    /// Chain length for the size-dependent checks.
    pub n: usize,
    /// Lowest rung of the Zeno frequency ladder (`f, 2f, 4f`).
    pub zeno_base_frequency: f64,
    pub zeno_proxy_frequency: f64,
    pub two_qubit_frequency: f64,
}

impl Default for OracleSuiteConfig {
    fn default() -> Self {
        Self {
            n: 6,
            zeno_base_frequency: 100.0,
            zeno_proxy_frequency: 1e4,
            two_qubit_frequency: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    /// Human-readable pass condition on `value`.
    pub condition: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub config: OracleSuiteConfig,
    pub checks: Vec<OracleCheck>,
    /// Zeno-ladder errors, lowest frequency first.
    pub zeno_ladder: Vec<(f64, f64)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn below(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(OracleCheck {
            name: name.into(),
            value,
            condition: format!("< {bound:e}"),
            passed: value < bound,
        });
    }

    fn above(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(OracleCheck {
            name: name.into(),
            value,
            condition: format!("> {bound:e}"),
            passed: value > bound,
        });
    }

    fn within(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.checks.push(OracleCheck {
            name: name.into(),
            value,
            condition: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        });
    }
}

/// Runs every full-chain verification.
pub fn run_oracle_suite(config: &OracleSuiteConfig) -> Result<OracleReport> {
    let mut report = OracleReport {
        config: *config,
        checks: Vec::new(),
        zeno_ladder: Vec::new(),
    };

    let swap = (2..=4)
        .map(verify_projected_swap)
        .collect::<Result<Vec<_>>>()?;
    let swap_residual = swap
        .iter()
        .map(|r| r.max_residual.max(r.max_trace_residual))
        .fold(0.0, f64::max);
    report.checks.push(OracleCheck {
        name: "projected-swap-identities".into(),
        value: swap_residual,
        condition: "== 0".into(),
        passed: swap_residual == 0.0,
    });

    let dec = verify_block_decoupling(5, 3, 2.0, &ModelParams::uls())?;
    report.below(
        "block-decoupling-factorization",
        dec.factorization_residual,
        1e-10,
    );
    report.below(
        "block-decoupling-cross-influence",
        dec.cross_influence.abs(),
        1e-12,
    );
    report.above(
        "block-decoupling-unprojected-control",
        dec.unprojected_cross_influence,
        1e-3,
    );

    let mut level_comm = 0.0f64;
    for j in [0.5, 1.0, 2.0] {
        level_comm = level_comm.max(
            number_operator_commutators(config.n, &ModelParams::new(j, PI / 4.0))?.max_level(),
        );
    }
    report.below("number-operator-commutators", level_comm, 1e-12);
    let mut mag_comm = 0.0f64;
    for theta in [0.0, PI / 8.0, 0.3, 1.2] {
        mag_comm = mag_comm.max(
            number_operator_commutators(config.n, &ModelParams::with_theta(theta))?.magnetization,
        );
    }
    report.below("magnetization-commutator-any-theta", mag_comm, 1e-12);

    let h = uls_full_hamiltonian(config.n, &ModelParams::uls())?;
    let u = Propagator::global().unitary(&h, 1.7);
    let unitarity = (u.adjoint() * &u - nalgebra::DMatrix::identity(h.dimension(), h.dimension()))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    report.below("full-chain-unitarity", unitarity, 1e-10);
    let psi = FullChainState::vacuum(config.n)?;
    report.below(
        "full-chain-norm",
        (psi.evolve(&h, 3.1)?.norm_sqr() - 1.0).abs(),
        1e-10,
    );

    report.below(
        "one-qubit-sector-exact",
        single_qubit_sector_residual(config.n, 2.3)?,
        1e-10,
    );

    let scenario = ZenoScenario::block_split()?;
    let f0 = config.zeno_base_frequency;
    for f in [f0, 2.0 * f0, 4.0 * f0] {
        report
            .zeno_ladder
            .push((f, zeno_convergence(&scenario, f)?.error));
    }
    for (i, w) in report.zeno_ladder.clone().windows(2).enumerate() {
        report.within(
            &format!("zeno-ladder-ratio-{}", i + 1),
            w[1].1 / w[0].1,
            0.3,
            0.8,
        );
    }
    report.below(
        "zeno-high-frequency-proxy",
        zeno_convergence(&scenario, config.zeno_proxy_frequency)?.error,
        1e-3,
    );

    let leak = boundary_leak_probability(4, 3, 2, 100.0, 100)?;
    report.below("boundary-leak-f100", leak, 0.02);
    let leak_fast = boundary_leak_probability(4, 3, 2, 200.0, 200)?;
    report.within("boundary-leak-ratio", leak / leak_fast, 2.0 / 1.5, 3.0);

    let t_star = find_unitary_times(2, 4.0)?[0].t;
    let mut worst_inf = 0.0f64;
    let mut worst_drift = 0.0f64;
    for pair in [
        pairs::up_down(),
        pairs::down_up(),
        pairs::singlet(),
        pairs::triplet_zero(),
        pairs::up_up(),
    ] {
        let r = verify_two_qubit_effective(&pair, t_star, config.two_qubit_frequency)?;
        worst_inf = worst_inf.max(r.infidelity);
        worst_drift = worst_drift.max(r.parity_drift);
    }
    report.below("two-qubit-effective-infidelity", worst_inf, 1e-2);
    report.below("two-qubit-parity-drift", worst_drift, 1e-2);

    let params = ModelParams::with_theta(PI / 8.0);
    let mut block_vs_chain = 0.0f64;
    let mut chain_vs_published = 0.0f64;
    for i in 1..=100 {
        let t = i as f64 * 0.05;
        let chain = pair_probability_full_chain(&params, t)?;
        block_vs_chain =
            block_vs_chain.max((chain - pair_transition_probability(&params, t)?).abs());
        chain_vs_published =
            chain_vs_published.max((chain - published_pair_probability(&params, t)).abs());
    }
    report.below("pair-block-matches-chain", block_vs_chain, 1e-10);
    report.below("pair-closed-form-matches-chain", chain_vs_published, 1e-10);

    Ok(report)
}
