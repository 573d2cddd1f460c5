//! Probabilistic recovery-feasibility conditions.
//!
//! Each condition constrains a slack parameter `delta`: the sub-dictionary
//! conditioning bound demands `delta >= delta_min` (the bound relaxes as
//! `delta` grows) while the support conditions demand `delta < delta_max`
//! (they tighten as `delta` grows). Feasibility is therefore the interval
//! test `delta_min < delta_max`, which removes `delta` exactly given the
//! monotone structure; no grid search is involved.
//!
//! Which conditioning bound applies is decided by the *randomness* of the
//! supports (signal random / interference random / both random); which
//! support condition applies is decided by the *knowledge* of the supports
//! (both known, one known, neither known). The all-arbitrary column of the
//! case taxonomy is covered by deterministic prior work and reported as out
//! of scope rather than infeasible.
//!
//! All evaluation is plain double precision and never materializes matrices,
//! so problem sizes up to `m = 10^12` are fine.

use serde::{Deserialize, Serialize};

use crate::dictionary::CoherenceProfile;
use crate::error::{Error, Result};

/// `e^{1/4}`, the constant the moment bound pays for Chebyshev.
pub const E_QUARTER: f64 = 1.2840254166877414;
/// `e^{-1/4}`.
pub const E_MINUS_QUARTER: f64 = 0.7788007830714049;

/// Recovery program type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Program {
    /// l0-norm minimization (exhaustive at toy scale).
    L0,
    /// l1-norm minimization (basis pursuit).
    L1,
    /// Pseudo-inverse applied to the known-support sub-dictionary.
    Pseudoinverse,
}

/// Which supports are known and which are random, plus the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub x_known: bool,
    pub e_known: bool,
    pub x_random: bool,
    pub e_random: bool,
    pub program: Program,
}

impl Scenario {
    /// Validated constructor: pseudo-inverse recovery needs both supports,
    /// and when both supports are known the pseudo-inverse is the program.
    pub fn new(
        x_known: bool,
        e_known: bool,
        x_random: bool,
        e_random: bool,
        program: Program,
    ) -> Result<Self> {
        if program == Program::Pseudoinverse && !(x_known && e_known) {
            return Err(Error::InvalidArgument(
                "pseudo-inverse recovery requires both supports known".into(),
            ));
        }
        if x_known && e_known && program != Program::Pseudoinverse {
            return Err(Error::InvalidArgument(
                "with both supports known the recovery program is the pseudo-inverse".into(),
            ));
        }
        Ok(Scenario {
            x_known,
            e_known,
            x_random,
            e_random,
            program,
        })
    }

    pub fn both_known(x_random: bool, e_random: bool) -> Result<Self> {
        Scenario::new(true, true, x_random, e_random, Program::Pseudoinverse)
    }

    /// Label in the case taxonomy: rows by knowledge (1 both, 2 one, 3
    /// neither), letters by randomness. A trailing `*` marks a cell obtained
    /// from its mirror by swapping the roles of signal and interference.
    pub fn case_label(&self) -> &'static str {
        match (
            self.x_known,
            self.e_known,
            self.x_random,
            self.e_random,
        ) {
            (true, true, true, false) => "1b",
            (true, true, false, true) => "1b*",
            (true, true, true, true) => "1c",
            (true, true, false, false) => "1a",
            (false, true, true, false) => "2b",
            (false, true, false, true) => "2c*",
            (false, true, true, true) => "2d",
            (false, true, false, false) => "2a",
            (true, false, true, false) => "2c",
            (true, false, false, true) => "2b*",
            (true, false, true, true) => "2d*",
            (true, false, false, false) => "2a*",
            (false, false, true, false) => "3b",
            (false, false, false, true) => "3b*",
            (false, false, true, true) => "3c",
            (false, false, false, false) => "3a",
        }
    }
}

/// A sparsity pair with the confidence exponent `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityPoint {
    pub nx: u64,
    pub ne: u64,
    pub beta: f64,
}

impl SparsityPoint {
    pub fn new(nx: u64, ne: u64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        Ok(SparsityPoint { nx, ne, beta })
    }

    /// Checks the theorem floor for the given randomness flags. A zero
    /// sparsity makes the corresponding floor vacuous.
    pub fn check_beta_floor(&self, x_random: bool, e_random: bool) -> Result<()> {
        if x_random && self.nx >= 1 {
            let floor = (self.nx as f64).ln();
            if self.beta < floor {
                return Err(Error::BetaFloor {
                    condition: "signal support random: beta >= ln(nx)",
                    floor,
                    beta: self.beta,
                });
            }
        }
        if e_random && self.ne >= 1 {
            let floor = (self.ne as f64).ln();
            if self.beta < floor {
                return Err(Error::BetaFloor {
                    condition: "interference support random: beta >= ln(ne)",
                    floor,
                    beta: self.beta,
                });
            }
        }
        Ok(())
    }
}

/// Rule for choosing `beta` from the problem size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    /// `beta = ln m`, so the l0-type failure bound is `1/m`.
    LogM,
    /// `beta = ln(m) / 3`.
    LogMOver3,
    /// Explicit value.
    Explicit(f64),
}

impl BetaRule {
    pub fn value(&self, m: u64) -> f64 {
        match self {
            BetaRule::LogM => (m as f64).ln(),
            BetaRule::LogMOver3 => (m as f64).ln() / 3.0,
            BetaRule::Explicit(b) => *b,
        }
    }
}

/// Which condition pinned the feasibility interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    SminXRandom,
    SminERandom,
    SminBothRandom,
    SupportEKnown,
    SupportXKnown,
}

/// Feasibility verdict with the admissible `delta` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeResult {
    pub feasible: bool,
    pub delta_min: f64,
    pub delta_max: f64,
    pub binding: Condition,
    pub success_probability_bound: f64,
}

fn indicator(mu: f64) -> f64 {
    if mu != 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Conditioning bound for a random signal support and arbitrary interference
/// support. The condition reads `delta * e^{-1/4} >= result`.
///
/// The `(ne - 1) mu_b` term clamps to zero at `ne = 0`, where the bound it
/// comes from is vacuous.
pub fn smin_rhs_x_random(profile: &CoherenceProfile, pt: &SparsityPoint) -> f64 {
    let nx = pt.nx as f64;
    let ne = pt.ne as f64;
    let n_a = profile.n_a as f64;
    profile.norm_a * profile.norm_b * (nx / n_a).sqrt()
        + 12.0 * profile.mu_a * (pt.beta * nx).sqrt()
        + (ne - 1.0).max(0.0) * profile.mu_b
        + indicator(profile.mu_a) * (2.0 * nx / n_a) * profile.norm_a * profile.norm_a
        + 3.0 * profile.mu_m * (2.0 * pt.beta * ne).sqrt()
}

/// Mirror of [`smin_rhs_x_random`] with the roles of signal (A) and
/// interference (B) interchanged: random interference support, arbitrary
/// signal support.
pub fn smin_rhs_e_random(profile: &CoherenceProfile, pt: &SparsityPoint) -> f64 {
    let nx = pt.nx as f64;
    let ne = pt.ne as f64;
    let n_b = profile.n_b as f64;
    profile.norm_a * profile.norm_b * (ne / n_b).sqrt()
        + 12.0 * profile.mu_b * (pt.beta * ne).sqrt()
        + (nx - 1.0).max(0.0) * profile.mu_a
        + indicator(profile.mu_b) * (2.0 * ne / n_b) * profile.norm_b * profile.norm_b
        + 3.0 * profile.mu_m * (2.0 * pt.beta * nx).sqrt()
}

/// Conditioning bound when both supports are random. The cross-term is the
/// better of two one-sided bounds, hence the `min`.
pub fn smin_rhs_both_random(profile: &CoherenceProfile, pt: &SparsityPoint) -> f64 {
    let nx = pt.nx as f64;
    let ne = pt.ne as f64;
    let n_a = profile.n_a as f64;
    let n_b = profile.n_b as f64;
    let sqrt_beta = pt.beta.sqrt();
    let branch_x = 3.0 * profile.mu_m * (2.0 * pt.beta * nx).sqrt() + (ne / n_b).sqrt() * profile.norm_ab;
    let branch_e = 3.0 * profile.mu_m * (2.0 * pt.beta * ne).sqrt() + (nx / n_a).sqrt() * profile.norm_ab;
    12.0 * sqrt_beta * (profile.mu_a * nx.sqrt() + profile.mu_b * ne.sqrt())
        + indicator(profile.mu_a) * (2.0 * nx / n_a) * profile.norm_a * profile.norm_a
        + indicator(profile.mu_b) * (2.0 * ne / n_b) * profile.norm_b * profile.norm_b
        + branch_x.min(branch_e)
}

/// Support condition when the interference support is known: candidates for a
/// spurious support are columns of A, measured by `xi_E^2 = nx mu_a^2 +
/// ne mu_m^2`. Returns the largest admissible `delta` (may be <= 0, meaning
/// infeasible at any slack).
pub fn support_condition_e_known(
    profile: &CoherenceProfile,
    pt: &SparsityPoint,
    program: Program,
) -> f64 {
    let c = pt.nx as f64 * profile.mu_a * profile.mu_a
        + pt.ne as f64 * profile.mu_m * profile.mu_m;
    match program {
        Program::L1 => 1.0 - (2.0 * c * ((profile.n_a as f64).ln() + pt.beta)).sqrt(),
        _ => 1.0 - c,
    }
}

/// Mirror of [`support_condition_e_known`] for a known signal support:
/// candidates are columns of B, `xi_X^2 = nx mu_m^2 + ne mu_b^2`, and the
/// l1 union bound runs over `n_b`.
pub fn support_condition_x_known(
    profile: &CoherenceProfile,
    pt: &SparsityPoint,
    program: Program,
) -> f64 {
    let c = pt.nx as f64 * profile.mu_m * profile.mu_m
        + pt.ne as f64 * profile.mu_b * profile.mu_b;
    match program {
        Program::L1 => 1.0 - (2.0 * c * ((profile.n_b as f64).ln() + pt.beta)).sqrt(),
        _ => 1.0 - c,
    }
}

/// The `xi` quantities: `xi_E` bounds correlations against out-of-support
/// columns of A, `xi_X` against columns of B, `xi_+` is their max.
pub fn xi_values(profile: &CoherenceProfile, nx: u64, ne: u64) -> (f64, f64, f64) {
    let xi_e = (nx as f64 * profile.mu_a * profile.mu_a
        + ne as f64 * profile.mu_m * profile.mu_m)
        .sqrt();
    let xi_x = (nx as f64 * profile.mu_m * profile.mu_m
        + ne as f64 * profile.mu_b * profile.mu_b)
        .sqrt();
    (xi_e, xi_x, xi_e.max(xi_x))
}

/// Evaluates the full guarantee for a scenario at a sparsity point.
///
/// `delta_min` is `e^{1/4}` times the conditioning bound selected by the
/// randomness flags; `delta_max` is the support condition selected by the
/// knowledge flags (1 when both supports are known, the min of both
/// conditions when neither is). Feasibility is the interval test, non-strict
/// at `delta = 1` in the both-known case.
pub fn check_guarantee(
    scenario: &Scenario,
    profile: &CoherenceProfile,
    pt: &SparsityPoint,
) -> Result<GuaranteeResult> {
    if !scenario.x_random && !scenario.e_random {
        return Err(Error::OutOfScope(
            "both supports arbitrary: covered by deterministic guarantees from prior work",
        ));
    }
    pt.check_beta_floor(scenario.x_random, scenario.e_random)?;

    let (rhs, smin_cond) = match (scenario.x_random, scenario.e_random) {
        (true, false) => (smin_rhs_x_random(profile, pt), Condition::SminXRandom),
        (false, true) => (smin_rhs_e_random(profile, pt), Condition::SminERandom),
        (true, true) => (smin_rhs_both_random(profile, pt), Condition::SminBothRandom),
        (false, false) => unreachable!(),
    };
    let delta_min = E_QUARTER * rhs;

    let both_known = scenario.x_known && scenario.e_known;
    let (delta_max, support_cond) = if both_known {
        (1.0, smin_cond)
    } else if scenario.e_known {
        (
            support_condition_e_known(profile, pt, scenario.program),
            Condition::SupportEKnown,
        )
    } else if scenario.x_known {
        (
            support_condition_x_known(profile, pt, scenario.program),
            Condition::SupportXKnown,
        )
    } else {
        let de = support_condition_e_known(profile, pt, scenario.program);
        let dx = support_condition_x_known(profile, pt, scenario.program);
        if de <= dx {
            (de, Condition::SupportEKnown)
        } else {
            (dx, Condition::SupportXKnown)
        }
    };

    let feasible = if both_known {
        delta_min <= delta_max
    } else {
        delta_min < delta_max
    };

    // The binding condition is the one that consumed more of the unit
    // interval: delta_min from below versus 1 - delta_max from above. Ties go
    // to the conditioning bound.
    let binding = if both_known || delta_min >= 1.0 - delta_max {
        smin_cond
    } else {
        support_cond
    };

    let success_probability_bound = match scenario.program {
        Program::L1 => 1.0 - 3.0 * (-pt.beta).exp(),
        _ => 1.0 - (-pt.beta).exp(),
    };

    Ok(GuaranteeResult {
        feasible,
        delta_min,
        delta_max,
        binding,
        success_probability_bound,
    })
}

/// Largest `nx` for which [`check_guarantee`] is feasible, by bisection over
/// `[0, n_a]`. Feasibility is monotone non-increasing in `nx` (every term of
/// every condition is non-decreasing in `nx`, and the beta floor only
/// tightens), so bisection is exact. Points that violate the beta floor
/// count as infeasible.
pub fn max_recoverable_nx(
    scenario: &Scenario,
    profile: &CoherenceProfile,
    ne: u64,
    beta_rule: BetaRule,
) -> Result<u64> {
    let beta = beta_rule.value(profile.m);
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta rule produced a non-positive value: {beta}"
        )));
    }
    let feasible = |nx: u64| -> Result<bool> {
        let pt = SparsityPoint::new(nx, ne, beta)?;
        match check_guarantee(scenario, profile, &pt) {
            Ok(r) => Ok(r.feasible),
            Err(Error::BetaFloor { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };

    if !feasible(1)? {
        return Ok(0);
    }
    let mut lo = 1u64; // feasible
    let mut hi = profile.n_a; // candidate upper end
    if feasible(hi)? {
        return Ok(hi);
    }
    // Invariant: feasible(lo), !feasible(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Closed-form counterpart of [`max_recoverable_nx`] for unitary, maximally
/// incoherent profiles in the interference-known cases. The feasibility
/// condition reduces to a quadratic inequality in `sqrt(nx)`; this returns
/// the floored root. `None` when the scenario is not one of those cases.
pub fn closed_form_max_nx_unitary(
    scenario: &Scenario,
    m: u64,
    ne: u64,
    beta: f64,
) -> Option<u64> {
    if !scenario.e_known || scenario.x_known {
        return None;
    }
    let mf = m as f64;
    let nef = ne as f64;
    let mu = 1.0 / mf.sqrt();
    let delta_max = match scenario.program {
        Program::L1 => 1.0 - (2.0 * nef * mu * mu * (mf.ln() + beta)).sqrt(),
        _ => 1.0 - nef * mu * mu,
    };
    if delta_max <= 0.0 {
        return Some(0);
    }
    let c = E_MINUS_QUARTER * delta_max;
    let t = match (scenario.x_random, scenario.e_random) {
        // delta_min = e^{1/4} (sqrt(nx/m) + 3 mu sqrt(2 beta ne))
        (true, false) => c.mul_add(mf.sqrt(), -(3.0 * (2.0 * beta * nef).sqrt())),
        // min of two branches, each linear in sqrt(nx); take the larger root.
        (true, true) => {
            let t1 = mf.sqrt() * (c - (nef / mf).sqrt()) / (3.0 * (2.0 * beta).sqrt());
            let t2 = c * mf.sqrt() - 3.0 * (2.0 * beta * nef).sqrt();
            t1.max(t2)
        }
        _ => return None,
    };
    if t <= 0.0 {
        return Some(0);
    }
    // Largest integer strictly below t^2, capped at n_a = m.
    let t2 = t * t;
    let fl = t2.floor();
    let nx = if fl == t2 { fl - 1.0 } else { fl };
    Some((nx.max(0.0) as u64).min(m))
}

/// Asymptotic feasibility condition for the unitary maximally incoherent
/// pair with the interference support known: true iff
/// `e^{-1/4} sqrt(m) > sqrt(nx) + (3 sqrt(2) + 2 e^{-1/4}) sqrt(ne ln m)`.
pub fn scaling_condition(m: f64, nx: f64, ne: f64) -> bool {
    assert!(m >= 2.0, "scaling condition needs m >= 2");
    let lhs = E_MINUS_QUARTER * m.sqrt();
    let rhs = nx.sqrt()
        + (3.0 * std::f64::consts::SQRT_2 + 2.0 * E_MINUS_QUARTER) * (ne * m.ln()).sqrt();
    lhs > rhs
}

/// Feasibility of recovery with no interference (`ne = 0`), where only the
/// signal dictionary matters. Both sides of the comparison depend only on
/// `mu_a`, `||A||`, and `n_a`.
pub fn no_error_condition(
    profile_a: &CoherenceProfile,
    nx: u64,
    beta: f64,
    program: Program,
) -> bool {
    let nxf = nx as f64;
    let n_a = profile_a.n_a as f64;
    let rhs = profile_a.norm_a * (nxf / n_a).sqrt() + 12.0 * profile_a.mu_a * (beta * nxf).sqrt();
    let lhs = match program {
        Program::L1 => {
            E_MINUS_QUARTER
                * (1.0 - (2.0 * nxf * profile_a.mu_a * profile_a.mu_a * (n_a.ln() + beta)).sqrt())
        }
        _ => E_MINUS_QUARTER * (1.0 - nxf * profile_a.mu_a * profile_a.mu_a),
    };
    lhs >= rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::CoherenceProfile;

    fn unitary(m: u64) -> CoherenceProfile {
        CoherenceProfile::unitary_max_incoherent(m)
    }

    fn pt(nx: u64, ne: u64, beta: f64) -> SparsityPoint {
        SparsityPoint::new(nx, ne, beta).unwrap()
    }

    // Frozen against a 50-digit decimal evaluation of each term.
    #[test]
    fn smin_x_random_frozen_value() {
        let p = unitary(100_000_000);
        let beta = (1e8f64).ln();
        let r = smin_rhs_x_random(&p, &pt(1_000_000, 10_000, beta));
        assert!(
            (r - 0.28209125552621756).abs() < 1e-15,
            "got {r}"
        );
    }

    #[test]
    fn smin_vanishes_at_zero_sparsity() {
        let p = unitary(64);
        assert_eq!(smin_rhs_x_random(&p, &pt(0, 0, 1.0)), 0.0);
        assert_eq!(smin_rhs_e_random(&p, &pt(0, 0, 1.0)), 0.0);
        assert_eq!(smin_rhs_both_random(&p, &pt(0, 0, 1.0)), 0.0);
    }

    #[test]
    fn smin_indicator_terms_vanish_for_zero_coherence() {
        // mu_a = 0 must kill both the 12 mu_a sqrt(beta nx) term and the
        // indicator term exactly, not approximately.
        let zero_mu_a = CoherenceProfile::new(0.0, 0.3, 0.2, 1.5, 1.5, 1.0, 100, 100, 100).unwrap();
        let with_mu_a =
            CoherenceProfile::new(1e-12, 0.3, 0.2, 1.5, 1.5, 1.0, 100, 100, 100).unwrap();
        let point = pt(4, 3, 2.0);
        let base = smin_rhs_x_random(&zero_mu_a, &point);
        let bumped = smin_rhs_x_random(&with_mu_a, &point);
        // Indicator contributes (2*4/100)*1.5^2 = 0.18 discontinuously.
        assert!(bumped - base > 0.17, "indicator must switch on: {bumped} vs {base}");
    }

    #[test]
    fn smin_interference_clamps_at_ne_zero() {
        let p = CoherenceProfile::new(0.0, 0.5, 0.2, 1.0, 1.0, 1.0, 100, 100, 100).unwrap();
        // ne = 0: the (ne-1) mu_b term must clamp to zero rather than go
        // negative.
        let r = smin_rhs_x_random(&p, &pt(4, 0, 2.0));
        let expected = (4f64 / 100.0).sqrt();
        assert!((r - expected).abs() < 1e-15, "got {r}");
    }

    #[test]
    fn smin_e_random_frozen_value() {
        let p = unitary(64);
        let r = smin_rhs_e_random(&p, &pt(2, 3, 3f64.ln()));
        assert!((r - 1.0026166564222634).abs() < 1e-15, "got {r}");
    }

    #[test]
    fn smin_e_random_is_role_swap_of_x_random() {
        let profiles = [
            CoherenceProfile::new(0.1, 0.3, 0.2, 1.5, 2.0, 1.2, 100, 200, 400).unwrap(),
            CoherenceProfile::new(0.0, 0.05, 0.01, 1.0, 1.4, 1.1, 1 << 20, 1 << 20, 1 << 21)
                .unwrap(),
        ];
        for p in &profiles {
            for (nx, ne) in [(5u64, 9u64), (0, 3), (7, 0), (1, 1)] {
                let direct = smin_rhs_e_random(p, &pt(nx, ne, 2.5));
                let swapped = smin_rhs_x_random(&p.swapped(), &pt(ne, nx, 2.5));
                assert!(
                    (direct - swapped).abs() < 1e-15,
                    "asymmetry at nx={nx}, ne={ne}"
                );
            }
        }
    }

    #[test]
    fn smin_e_random_nx_one_kills_gersgorin_term() {
        let p = CoherenceProfile::new(0.7, 0.0, 0.3, 1.2, 1.0, 1.0, 50, 50, 50).unwrap();
        let with_term = smin_rhs_e_random(&p, &pt(2, 0, 1.0));
        let without = smin_rhs_e_random(&p, &pt(1, 0, 1.0));
        // (nx-1) mu_a contributes 0.7 at nx=2 and exactly 0 at nx=1; the
        // remaining difference is the cross term ramp.
        let cross_delta = 3.0 * 0.3 * (2.0f64).sqrt() * (2f64.sqrt() - 1.0);
        assert!((with_term - without - 0.7 - cross_delta).abs() < 1e-12);
    }

    #[test]
    fn smin_both_random_frozen_branches() {
        let p = unitary(100_000_000);
        let beta = (1e8f64).ln();
        // nx = 1e6, ne = 1e4: the interference branch wins.
        let r = smin_rhs_both_random(&p, &pt(1_000_000, 10_000, beta));
        assert!((r - 0.28209125552621756).abs() < 1e-15, "got {r}");
        // Symmetric point: both branches coincide.
        let nx = 10_000u64;
        let sym = smin_rhs_both_random(&p, &pt(nx, nx, beta));
        let expected =
            3.0 * p.mu_m * (2.0 * beta * nx as f64).sqrt() + (nx as f64 / 1e8).sqrt();
        assert!((sym - expected).abs() < 1e-15);
    }

    #[test]
    fn support_conditions_at_zero_sparsity() {
        let p = unitary(100);
        assert_eq!(support_condition_e_known(&p, &pt(0, 0, 2.0), Program::L0), 1.0);
        assert_eq!(support_condition_e_known(&p, &pt(0, 0, 2.0), Program::L1), 1.0);
        assert_eq!(support_condition_x_known(&p, &pt(0, 0, 2.0), Program::L0), 1.0);
    }

    #[test]
    fn support_condition_e_known_l0_is_direct_arithmetic() {
        let p = unitary(100);
        // nx mu_a^2 = 0, ne mu_m^2 = 50/100.
        let d = support_condition_e_known(&p, &pt(123, 50, 2.0), Program::L0);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn support_condition_x_known_examples() {
        let p = unitary(10_000);
        // mu_b = 0: delta_max depends only on nx mu_m^2 = 30/10^4.
        let d = support_condition_x_known(&p, &pt(30, 999, 2.0), Program::L0);
        assert!((d - 0.997).abs() < 1e-15);
        let d2 = support_condition_x_known(&p, &pt(30, 1, 2.0), Program::L0);
        assert_eq!(d, d2);
    }

    #[test]
    fn l1_support_condition_is_tighter_than_l0() {
        let p = unitary(256);
        for ne in [1u64, 3, 10, 50] {
            for nx in [0u64, 2, 20] {
                let point = pt(nx, ne, 2.0);
                let l0 = support_condition_e_known(&p, &point, Program::L0);
                let l1 = support_condition_e_known(&p, &point, Program::L1);
                assert!(l1 < l0, "nx={nx} ne={ne}: {l1} vs {l0}");
            }
        }
    }

    #[test]
    fn xi_values_match_direct_arithmetic() {
        let p = unitary(100);
        let (xe, xx, xp) = xi_values(&p, 10, 10);
        assert!((xe - 0.31622776601683794).abs() < 1e-15);
        assert!((xx - xe).abs() < 1e-15);
        assert_eq!(xp, xe.max(xx));
        assert_eq!(xi_values(&p, 0, 0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn check_guarantee_case_1c_frozen() {
        let scenario = Scenario::both_known(true, true).unwrap();
        let p = unitary(100_000_000);
        let beta = (1e8f64).ln();
        let r = check_guarantee(&scenario, &p, &pt(100_000, 100_000, beta)).unwrap();
        assert!(r.feasible);
        assert!((r.delta_min - 0.7799759569689075).abs() < 1e-13, "{}", r.delta_min);
        assert_eq!(r.delta_max, 1.0);
        assert!((r.success_probability_bound - (1.0 - 1e-8)).abs() < 1e-12);
    }

    #[test]
    fn check_guarantee_zero_sparsity_is_feasible() {
        let p = unitary(64);
        for scenario in [
            Scenario::both_known(true, true).unwrap(),
            Scenario::new(false, true, true, false, Program::L0).unwrap(),
            Scenario::new(false, false, true, true, Program::L1).unwrap(),
        ] {
            let r = check_guarantee(&scenario, &p, &pt(0, 0, 2.0)).unwrap();
            assert!(r.feasible, "{:?}", scenario);
            assert_eq!(r.delta_min, 0.0);
        }
    }

    #[test]
    fn neither_known_never_beats_one_known() {
        let p = unitary(1 << 16);
        let beta = ((1u64 << 16) as f64).ln();
        let e_known = Scenario::new(false, true, true, true, Program::L0).unwrap();
        let neither = Scenario::new(false, false, true, true, Program::L0).unwrap();
        for nx in [1u64, 10, 100, 1000, 5000] {
            for ne in [1u64, 10, 100, 1000] {
                let point = pt(nx, ne, beta);
                let a = check_guarantee(&e_known, &p, &point).unwrap();
                let b = check_guarantee(&neither, &p, &point).unwrap();
                if b.feasible {
                    assert!(a.feasible, "case 3 feasible but case 2 not at ({nx},{ne})");
                }
                assert!(b.delta_max <= a.delta_max + 1e-15);
            }
        }
    }

    #[test]
    fn knowledge_nesting_on_unitary_grid() {
        // Case 1 (both known) is implied by case 2 (one known) which is
        // implied by case 3 (none known), at matching randomness.
        let p = unitary(1 << 16);
        let beta = ((1u64 << 16) as f64).ln();
        let case1 = Scenario::both_known(true, true).unwrap();
        let case2 = Scenario::new(false, true, true, true, Program::L0).unwrap();
        let case3 = Scenario::new(false, false, true, true, Program::L0).unwrap();
        for nx in [1u64, 16, 256, 1024, 4096, 16384] {
            for ne in [1u64, 16, 256, 1024] {
                let point = pt(nx, ne, beta);
                let r1 = check_guarantee(&case1, &p, &point).unwrap();
                let r2 = check_guarantee(&case2, &p, &point).unwrap();
                let r3 = check_guarantee(&case3, &p, &point).unwrap();
                if r3.feasible {
                    assert!(r2.feasible);
                }
                if r2.feasible {
                    assert!(r1.feasible);
                }
            }
        }
    }

    #[test]
    fn l1_feasibility_implies_l0_feasibility() {
        let p = unitary(1 << 14);
        let beta = 8.0;
        let l0 = Scenario::new(false, true, true, false, Program::L0).unwrap();
        let l1 = Scenario::new(false, true, true, false, Program::L1).unwrap();
        for nx in [1u64, 50, 500, 2000] {
            for ne in [0u64, 5, 50, 500] {
                let point = pt(nx, ne, beta);
                let r0 = check_guarantee(&l0, &p, &point).unwrap();
                let r1 = check_guarantee(&l1, &p, &point).unwrap();
                assert!((r0.delta_min - r1.delta_min).abs() < 1e-15);
                if r1.feasible {
                    assert!(r0.feasible, "nx={nx} ne={ne}");
                }
            }
        }
    }

    #[test]
    fn role_swap_maps_e_known_onto_x_known() {
        let p = CoherenceProfile::new(0.02, 0.07, 0.05, 1.3, 1.6, 1.4, 4096, 4096, 8192).unwrap();
        let e_known = Scenario::new(false, true, true, false, Program::L0).unwrap();
        let x_known = Scenario::new(true, false, false, true, Program::L0).unwrap();
        for (nx, ne) in [(3u64, 7u64), (20, 5), (0, 9)] {
            let a = check_guarantee(&e_known, &p, &pt(nx, ne, 3.0)).unwrap();
            let b = check_guarantee(&x_known, &p.swapped(), &pt(ne, nx, 3.0)).unwrap();
            assert!((a.delta_min - b.delta_min).abs() < 1e-14);
            assert!((a.delta_max - b.delta_max).abs() < 1e-14);
            assert_eq!(a.feasible, b.feasible);
        }
    }

    #[test]
    fn beta_floor_violation_names_the_floor() {
        let p = unitary(100);
        let scenario = Scenario::new(false, true, true, false, Program::L0).unwrap();
        let err = check_guarantee(&scenario, &p, &pt(10, 0, 1.0)).unwrap_err();
        match err {
            Error::BetaFloor { floor, beta, .. } => {
                assert!((floor - (10f64).ln()).abs() < 1e-15);
                assert_eq!(beta, 1.0);
            }
            other => panic!("expected beta floor error, got {other}"),
        }
    }

    #[test]
    fn all_arbitrary_cell_is_out_of_scope() {
        let p = unitary(100);
        let scenario = Scenario::new(false, true, false, false, Program::L0).unwrap();
        assert!(matches!(
            check_guarantee(&scenario, &p, &pt(1, 1, 2.0)),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(true, false, true, false, Program::Pseudoinverse).is_err());
        assert!(Scenario::new(true, true, true, false, Program::L1).is_err());
        assert_eq!(
            Scenario::both_known(true, true).unwrap().case_label(),
            "1c"
        );
        assert_eq!(
            Scenario::new(false, true, true, false, Program::L0)
                .unwrap()
                .case_label(),
            "2b"
        );
        assert_eq!(
            Scenario::new(true, false, true, false, Program::L0)
                .unwrap()
                .case_label(),
            "2c"
        );
    }

    #[test]
    fn max_nx_closed_form_agrees_with_bisection() {
        let scenario = Scenario::new(false, true, true, false, Program::L1).unwrap();
        let p = unitary(100_000_000);
        let beta = (1e8f64).ln();
        let bisect = max_recoverable_nx(&scenario, &p, 0, BetaRule::Explicit(beta)).unwrap();
        let closed = closed_form_max_nx_unitary(&scenario, 100_000_000, 0, beta).unwrap();
        assert_eq!(closed, 60_653_065);
        assert!((bisect as i64 - closed as i64).abs() <= 1);
    }

    #[test]
    fn max_nx_zero_when_interference_saturates() {
        let scenario = Scenario::new(false, true, true, false, Program::L0).unwrap();
        let p = unitary(100);
        // ne mu_m^2 = 100/100 = 1 kills the support condition entirely.
        assert_eq!(
            max_recoverable_nx(&scenario, &p, 100, BetaRule::LogM).unwrap(),
            0
        );
    }

    #[test]
    fn max_nx_monotone_in_interference_sparsity() {
        let scenario = Scenario::new(false, true, true, false, Program::L0).unwrap();
        let p = unitary(1 << 20);
        let mut prev = u64::MAX;
        for ne in [0u64, 1, 4, 16, 64, 256, 1024] {
            let v = max_recoverable_nx(&scenario, &p, ne, BetaRule::LogM).unwrap();
            assert!(v <= prev, "ne={ne}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn scaling_condition_frozen_verdicts() {
        // nx = m: false regardless of interference (e^{-1/4} < 1).
        assert!(!scaling_condition(1e6, 1e6, 0.0));
        // Empty problem: trivially true.
        assert!(scaling_condition(100.0, 0.0, 0.0));
        // Linear/near-linear point inside the feasible constant region.
        let m = 1e6;
        assert!(scaling_condition(m, m / 100.0, m / (1e5 * m.ln())));
    }

    #[test]
    fn no_error_condition_edges() {
        let p = CoherenceProfile::signal_only(0.0, 1.0, 256, 256);
        assert!(no_error_condition(&p, 0, 2.0, Program::L0));
        assert!(no_error_condition(&p, 0, 2.0, Program::L1));
        // Unitary A: the l0 condition reduces to e^{-1/4} >= sqrt(nx/m).
        for nx in [1u64, 10, 100, 155, 156, 200] {
            let direct = E_MINUS_QUARTER >= ((nx as f64) / 256.0).sqrt();
            assert_eq!(no_error_condition(&p, nx, 2.0, Program::L0), direct, "nx={nx}");
        }
    }

    #[test]
    fn no_error_condition_monotone_in_m() {
        // mu_a = 1/sqrt(m), ||A||^2 = n_a/m, beta = ln n_a: growing m at
        // fixed (nx, n_a) never flips feasible -> infeasible.
        let n_a = 1u64 << 16;
        let beta = (n_a as f64).ln();
        for program in [Program::L0, Program::L1] {
            for nx in [1u64, 8, 64, 512, 4096] {
                let mut prev = false;
                for k in 8..40 {
                    let m = 1u64 << k;
                    let p = CoherenceProfile::signal_only(
                        1.0 / (m as f64).sqrt(),
                        ((n_a as f64) / (m as f64)).sqrt().max(1.0),
                        m,
                        n_a,
                    );
                    let now = no_error_condition(&p, nx, beta, program);
                    assert!(!(prev && !now), "flip at m=2^{k}, nx={nx}");
                    prev = now;
                }
            }
        }
    }
}
