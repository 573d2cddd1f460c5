//! Monte-Carlo validation of the feasibility predictions.
//!
//! [`run_sweep`] estimates empirical recovery probability per sparsity cell
//! and attaches the guarantee verdict; [`threshold_curve`] and
//! [`scaling_table`] evaluate the formula-scale curves behind the
//! recovery-region plots. Cells and trials are independent work units; each
//! trial derives its seed by hashing (seed_base, nx, ne, trial), so results
//! do not depend on execution order and the harness parallelizes freely.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{coherence_profile, CoherenceProfile, DictSpec};
use crate::error::{Error, Result};
use crate::guarantees::{
    check_guarantee, max_recoverable_nx, BetaRule, Scenario, SparsityPoint,
};
use crate::signals::{combine_seed, make_instance};
use crate::solvers::{solve_instance, AdmmOptions};

/// Normal quantile for two-sided 99% Wilson intervals.
pub const WILSON_Z99: f64 = 2.575829303548901;

/// Wilson score interval at confidence `z` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A sparsity-grid experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepGrid {
    pub da_spec: DictSpec,
    pub db_spec: DictSpec,
    pub scenario: Scenario,
    pub nx_values: Vec<usize>,
    pub ne_values: Vec<usize>,
    pub trials: u64,
    pub seed_base: u64,
    pub success_tol: f64,
    pub beta: f64,
}

/// Guarantee verdict attached to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    Feasible,
    Infeasible,
    OutOfScope,
}

/// One (nx, ne) cell of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub nx: usize,
    pub ne: usize,
    pub trials: u64,
    pub successes: u64,
    /// Solves that hit the iteration cap; counted as failures.
    pub nonconverged: u64,
    pub empirical_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub predicted: Prediction,
    pub delta_min: f64,
    pub delta_max: f64,
}

/// All cells of a sweep, in grid order (nx-major).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    /// CSV with the stable header
    /// `nx,ne,trials,successes,rate,wilson_low,wilson_high,predicted,delta_min,delta_max`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "nx,ne,trials,successes,rate,wilson_low,wilson_high,predicted,delta_min,delta_max\n",
        );
        for c in &self.cells {
            let predicted = match c.predicted {
                Prediction::Feasible => "true",
                Prediction::Infeasible => "false",
                Prediction::OutOfScope => "na",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.nx,
                c.ne,
                c.trials,
                c.successes,
                c.empirical_rate,
                c.wilson_low,
                c.wilson_high,
                predicted,
                c.delta_min,
                c.delta_max,
            ));
        }
        out
    }

    /// Pooled failure rate over the cells selected by `filter`.
    pub fn pooled_failure_rate(&self, filter: impl Fn(&CellResult) -> bool) -> (u64, u64) {
        let mut failures = 0;
        let mut total = 0;
        for c in self.cells.iter().filter(|c| filter(c)) {
            failures += c.trials - c.successes;
            total += c.trials;
        }
        (failures, total)
    }
}

/// Per-trial seed: an order-insensitive-free hash of the cell coordinates.
pub fn trial_seed(seed_base: u64, nx: usize, ne: usize, trial: u64) -> u64 {
    combine_seed(
        combine_seed(combine_seed(seed_base, nx as u64), ne as u64),
        trial,
    )
}

/// Runs the sweep: per cell, `trials` independent instances solved with the
/// scenario's program; empirical rate with Wilson 99% bounds; the guarantee
/// verdict for the cell's sparsity point.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    if grid.trials == 0 {
        return Err(Error::InvalidArgument("sweep needs trials >= 1".into()));
    }
    let da = grid.da_spec.build()?;
    let db = grid.db_spec.build()?;
    let profile = coherence_profile(&da, &db)?;
    for &nx in &grid.nx_values {
        if nx > da.n() {
            return Err(Error::InvalidArgument(format!(
                "nx = {nx} exceeds n_a = {}",
                da.n()
            )));
        }
    }
    for &ne in &grid.ne_values {
        if ne > db.n() {
            return Err(Error::InvalidArgument(format!(
                "ne = {ne} exceeds n_b = {}",
                db.n()
            )));
        }
    }

    let opts = AdmmOptions::default();
    let mut cells = Vec::new();
    for &nx in &grid.nx_values {
        for &ne in &grid.ne_values {
            let (predicted, delta_min, delta_max) = predict(&grid.scenario, &profile, nx, ne, grid.beta)?;

            let outcomes: Vec<(bool, bool)> = (0..grid.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(grid.seed_base, nx, ne, t);
                    let inst = make_instance(&da, &db, &grid.scenario, nx, ne, seed)?;
                    let report = solve_instance(&da, &db, &inst, &opts, grid.success_tol)?;
                    Ok((report.success && report.converged, !report.converged))
                })
                .collect::<Result<Vec<_>>>()?;

            let successes = outcomes.iter().filter(|(s, _)| *s).count() as u64;
            let nonconverged = outcomes.iter().filter(|(_, n)| *n).count() as u64;
            let (lo, hi) = wilson_interval(successes, grid.trials, WILSON_Z99);
            cells.push(CellResult {
                nx,
                ne,
                trials: grid.trials,
                successes,
                nonconverged,
                empirical_rate: successes as f64 / grid.trials as f64,
                wilson_low: lo,
                wilson_high: hi,
                predicted,
                delta_min,
                delta_max,
            });
        }
    }
    Ok(SweepResult { cells })
}

fn predict(
    scenario: &Scenario,
    profile: &CoherenceProfile,
    nx: usize,
    ne: usize,
    beta: f64,
) -> Result<(Prediction, f64, f64)> {
    let pt = SparsityPoint::new(nx as u64, ne as u64, beta)?;
    match check_guarantee(scenario, profile, &pt) {
        Ok(r) => Ok((
            if r.feasible {
                Prediction::Feasible
            } else {
                Prediction::Infeasible
            },
            r.delta_min,
            r.delta_max,
        )),
        Err(Error::OutOfScope(_)) => Ok((Prediction::OutOfScope, f64::NAN, f64::NAN)),
        Err(Error::BetaFloor { .. }) => Ok((Prediction::Infeasible, f64::NAN, f64::NAN)),
        Err(e) => Err(e),
    }
}

/// Formula-scale recovery threshold: per `ne`, the largest `nx` for which
/// the guarantee is feasible. This is the data behind each recovery-region
/// curve.
pub fn threshold_curve(
    scenario: &Scenario,
    profile: &CoherenceProfile,
    ne_values: &[u64],
    beta_rule: BetaRule,
) -> Result<Vec<(u64, u64)>> {
    ne_values
        .iter()
        .map(|&ne| Ok((ne, max_recoverable_nx(scenario, profile, ne, beta_rule)?)))
        .collect()
}

/// CSV for a threshold curve: header `ne,max_nx`.
pub fn threshold_curve_to_csv(curve: &[(u64, u64)]) -> String {
    let mut out = String::from("ne,max_nx\n");
    for (ne, nx) in curve {
        out.push_str(&format!("{ne},{nx}\n"));
    }
    out
}

/// Interference sparsity as a function of problem size for the scaling
/// study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeRule {
    /// Constant interference sparsity.
    Const(u64),
    /// `ne = sqrt(m)`.
    SqrtM,
    /// `ne = m / divisor`.
    MOver(f64),
}

impl NeRule {
    pub fn value(&self, m: u64) -> u64 {
        match self {
            NeRule::Const(c) => *c,
            NeRule::SqrtM => (m as f64).sqrt().round() as u64,
            NeRule::MOver(d) => ((m as f64) / d).round() as u64,
        }
    }
}

/// Largest recoverable signal sparsity against problem size, for the
/// interference-known, interference-arbitrary l1 program at success
/// probability `1 - 10^{-15}` (`beta = ln(3e15)` so the l1 failure bound
/// `3 e^{-beta}` hits the target exactly).
pub fn scaling_table(m_values: &[u64], ne_rule: NeRule) -> Result<Vec<(u64, u64, u64)>> {
    use crate::guarantees::Program;
    let beta = (3e15f64).ln();
    let scenario = Scenario::new(false, true, true, false, Program::L1)?;
    m_values
        .iter()
        .map(|&m| {
            let ne = ne_rule.value(m);
            let profile = CoherenceProfile::unitary_max_incoherent(m);
            let max_nx = if ne > profile.n_b {
                0
            } else {
                max_recoverable_nx(&scenario, &profile, ne, BetaRule::Explicit(beta))?
            };
            Ok((m, max_nx, ne))
        })
        .collect()
}

/// CSV for a scaling table: header `m,max_nx,ne`.
pub fn scaling_table_to_csv(table: &[(u64, u64, u64)]) -> String {
    let mut out = String::from("m,max_nx,ne\n");
    for (m, nx, ne) in table {
        out.push_str(&format!("{m},{nx},{ne}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guarantees::Program;

    fn small_grid() -> SweepGrid {
        SweepGrid {
            da_spec: DictSpec::Dft(32),
            db_spec: DictSpec::Identity(32),
            scenario: Scenario::both_known(true, true).unwrap(),
            nx_values: vec![0, 2],
            ne_values: vec![0, 1],
            trials: 20,
            seed_base: 7,
            success_tol: 1e-5,
            beta: 1.0,
        }
    }

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(90, 100, WILSON_Z99);
        assert!(lo < 0.9 && 0.9 < hi);
        assert!(lo > 0.75 && hi < 0.97);
        let (lo0, _) = wilson_interval(0, 50, WILSON_Z99);
        assert_eq!(lo0, 0.0);
        let (_, hi1) = wilson_interval(50, 50, WILSON_Z99);
        assert_eq!(hi1, 1.0);
    }

    #[test]
    fn empty_cell_always_succeeds() {
        let result = run_sweep(&small_grid()).unwrap();
        let cell = result
            .cells
            .iter()
            .find(|c| c.nx == 0 && c.ne == 0)
            .unwrap();
        assert_eq!(cell.successes, cell.trials);
        assert_eq!(cell.empirical_rate, 1.0);
        assert!(cell.wilson_low <= cell.empirical_rate);
        assert!(cell.empirical_rate <= cell.wilson_high);
    }

    #[test]
    fn sweep_is_deterministic_bytes() {
        let a = run_sweep(&small_grid()).unwrap().to_csv();
        let b = run_sweep(&small_grid()).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn cell_order_does_not_change_per_cell_results() {
        let mut grid = small_grid();
        let forward = run_sweep(&grid).unwrap();
        grid.nx_values.reverse();
        grid.ne_values.reverse();
        let backward = run_sweep(&grid).unwrap();
        for c in &forward.cells {
            let twin = backward
                .cells
                .iter()
                .find(|d| d.nx == c.nx && d.ne == c.ne)
                .unwrap();
            assert_eq!(c.successes, twin.successes);
        }
    }

    #[test]
    fn sweep_rejects_out_of_range_sparsity() {
        let mut grid = small_grid();
        grid.nx_values = vec![33];
        assert!(run_sweep(&grid).is_err());
    }

    #[test]
    fn csv_schema_is_stable() {
        let result = run_sweep(&small_grid()).unwrap();
        let csv = result.to_csv();
        assert!(csv.starts_with(
            "nx,ne,trials,successes,rate,wilson_low,wilson_high,predicted,delta_min,delta_max\n"
        ));
        assert_eq!(csv.lines().count(), 1 + result.cells.len());
    }

    #[test]
    fn predicted_feasible_cells_succeed_at_high_rate() {
        // Both supports known and random at desk scale: the guarantee says
        // failure probability at most e^{-beta}.
        let grid = SweepGrid {
            da_spec: DictSpec::Dft(128),
            db_spec: DictSpec::Identity(128),
            scenario: Scenario::both_known(true, true).unwrap(),
            nx_values: vec![1, 2],
            ne_values: vec![1, 2],
            trials: 400,
            seed_base: 2024,
            success_tol: 1e-5,
            beta: 1.0,
        };
        let result = run_sweep(&grid).unwrap();
        let bound = (-grid.beta).exp();
        for cell in result.cells.iter().filter(|c| c.predicted == Prediction::Feasible) {
            // wilson_low is a 99% lower confidence bound on the success rate;
            // the guarantee is refuted only if even that sits below 1-bound.
            assert!(
                cell.wilson_low <= 1.0 - bound + 1e-12 || cell.empirical_rate >= 1.0 - bound,
                "cell ({},{}) rate {} refutes bound {}",
                cell.nx,
                cell.ne,
                cell.empirical_rate,
                1.0 - bound
            );
            assert!(
                cell.empirical_rate >= 1.0 - bound - (cell.empirical_rate - cell.wilson_low),
                "cell ({},{}): rate {} below bound {} minus slack",
                cell.nx,
                cell.ne,
                cell.empirical_rate,
                1.0 - bound
            );
        }
        assert!(
            result
                .cells
                .iter()
                .any(|c| c.predicted == Prediction::Feasible),
            "grid too aggressive: nothing predicted feasible"
        );
    }

    #[test]
    fn threshold_curve_is_monotone_and_cliffs_to_zero() {
        let scenario = Scenario::new(false, true, true, false, Program::L1).unwrap();
        let profile = CoherenceProfile::unitary_max_incoherent(100_000_000);
        let beta = (1e8f64).ln() / 3.0;
        let ne_values: Vec<u64> = (0..=24).map(|k| 1u64 << k).collect();
        let curve =
            threshold_curve(&scenario, &profile, &ne_values, BetaRule::Explicit(beta)).unwrap();
        let mut prev = u64::MAX;
        let mut seen_zero = false;
        for &(ne, nx) in &curve {
            assert!(nx <= prev, "curve not monotone at ne={ne}");
            if seen_zero {
                assert_eq!(nx, 0, "curve resurrected after the cliff at ne={ne}");
            }
            seen_zero = nx == 0;
            prev = nx;
        }
        assert!(seen_zero, "grid never reached the infeasible cliff");
    }

    #[test]
    fn knowledge_dominates_pointwise_at_formula_scale() {
        let profile = CoherenceProfile::unitary_max_incoherent(100_000_000);
        let both = Scenario::both_known(true, true).unwrap();
        let one = Scenario::new(false, true, true, true, Program::L0).unwrap();
        let ne_values: Vec<u64> = (0..=20).map(|k| 1u64 << k).collect();
        let curve_both = threshold_curve(&both, &profile, &ne_values, BetaRule::LogM).unwrap();
        let curve_one = threshold_curve(&one, &profile, &ne_values, BetaRule::LogM).unwrap();
        for ((ne, nx_both), (_, nx_one)) in curve_both.iter().zip(curve_one.iter()) {
            assert!(
                nx_both >= nx_one,
                "knowledge must help at ne={ne}: {nx_both} < {nx_one}"
            );
        }
    }

    #[test]
    fn scaling_table_const_rule_grows_with_m() {
        let ms: Vec<u64> = (24..=36).map(|k| 1u64 << k).collect();
        let table = scaling_table(&ms, NeRule::Const(1000)).unwrap();
        let mut prev = 0u64;
        for &(m, nx, _) in &table {
            assert!(nx > prev, "max_nx must grow with m at m={m}");
            prev = nx;
        }
    }

    #[test]
    fn scaling_table_linear_rule_has_stable_ratio() {
        let table = scaling_table(&[10_000_000_000, 1_000_000_000_000], NeRule::MOver(1e5)).unwrap();
        let r1 = table[0].1 as f64 / table[0].0 as f64;
        let r2 = table[1].1 as f64 / table[1].0 as f64;
        assert!(r1 > 0.0 && r2 > 0.0);
        assert!((r1 - r2).abs() / r2 < 0.10, "ratios {r1} vs {r2}");
    }

    #[test]
    fn scaling_table_small_m_yields_zero() {
        let table = scaling_table(&[64], NeRule::Const(1000)).unwrap();
        assert_eq!(table[0].1, 0);
    }
}
