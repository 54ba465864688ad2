//! Grid certification of the two copula conditions under which the LHSD
//! limit variance does not exceed the plain Monte Carlo variance (for
//! integrands that are non-decreasing in every argument and nonpositive).
//!
//! * partial bound: `C(u)/u_j ≥ ∂_j C(u)` for every `j`.
//! * pairwise sum: for every `j`, `u_j` and `ū`,
//!   `Σ_{i≠j} C_{ij}(u_j, ū_i)/ū_i ≤ (d − 2) u_j + C(ū with ū_j ∧ u_j)/C(ū)`,
//!   where `C_{ij}` is the bivariate margin on coordinates `i, j`.
//!
//! Both are checked at interior nodes `k/(g+1)` only; boundary limits are
//! excluded because the partial bound divides by `u_j`.

use std::fmt;

use super::CopulaModel;
use crate::error::{Error, Result};
use crate::grid;

/// Default cap on copula evaluations per certification run.
pub const DEFAULT_CONDITION_BUDGET: u128 = 200_000_000;

/// Slack at or above this level counts as satisfied.
const SLACK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    PartialBound,
    PairwiseSum,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::PartialBound => write!(f, "partial-bound"),
            Condition::PairwiseSum => write!(f, "pairwise-sum"),
        }
    }
}

/// Location of the smallest slack found.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub condition: Condition,
    /// Zero-based coordinate the condition was evaluated for.
    pub j: usize,
    /// `u` for the partial bound; for the pairwise sum, `ū` with the probed
    /// `u_j` reported separately.
    pub point: Vec<f64>,
    pub u_j: Option<f64>,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub partial_bound_holds: bool,
    pub pairwise_sum_holds: bool,
    pub grid_resolution: usize,
    /// Most negative slack found, 0 if every slack is nonnegative.
    pub worst_violation: f64,
    pub witness: Witness,
    pub partial_bound_min_slack: f64,
    pub pairwise_sum_min_slack: f64,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.partial_bound_holds && self.pairwise_sum_holds
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "grid resolution   : {}", self.grid_resolution)?;
        writeln!(
            f,
            "partial bound     : {} (min slack {:.6e})",
            verdict(self.partial_bound_holds),
            self.partial_bound_min_slack
        )?;
        writeln!(
            f,
            "pairwise sum      : {} (min slack {:.6e})",
            verdict(self.pairwise_sum_holds),
            self.pairwise_sum_min_slack
        )?;
        writeln!(f, "worst violation   : {:.6e}", self.worst_violation)?;
        let w = &self.witness;
        write!(
            f,
            "witness           : {} j={} point={:?}",
            w.condition,
            w.j + 1,
            w.point
        )?;
        if let Some(uj) = w.u_j {
            write!(f, " u_j={uj}")?;
        }
        Ok(())
    }
}

pub(super) fn check(model: &CopulaModel, g: usize, budget: u128) -> Result<ConditionReport> {
    if g < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_resolution",
            value: g as f64,
            reason: "must be at least 2",
        });
    }
    let d = model.dim();
    let gd = (g as u128).checked_pow(d as u32);
    let requested = gd
        .and_then(|gd| gd.checked_mul(d as u128 * (g as u128 + 1)))
        .unwrap_or(u128::MAX);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }

    let c = model.family();
    let nodes = grid::interior_nodes(g);

    let mut partial_min = f64::INFINITY;
    let mut partial_witness = None;
    grid::for_each_point(d, &nodes, |u| {
        let cu = c.cdf(u);
        for j in 0..d {
            let slack = cu / u[j] - c.partial(u, j);
            if slack < partial_min {
                partial_min = slack;
                partial_witness = Some(Witness {
                    condition: Condition::PartialBound,
                    j,
                    point: u.to_vec(),
                    u_j: None,
                    slack,
                });
            }
        }
    });

    let mut pair_min = f64::INFINITY;
    let mut pair_witness = None;
    let mut scratch = vec![1.0; d];
    grid::for_each_point(d, &nodes, |ubar| {
        let c_ubar = c.cdf(ubar);
        for j in 0..d {
            for &uj in &nodes {
                let mut lhs = 0.0;
                for i in (0..d).filter(|&i| i != j) {
                    scratch.fill(1.0);
                    scratch[j] = uj;
                    scratch[i] = ubar[i];
                    lhs += c.cdf(&scratch) / ubar[i];
                }
                scratch.copy_from_slice(ubar);
                scratch[j] = ubar[j].min(uj);
                let rhs = (d as f64 - 2.0) * uj + c.cdf(&scratch) / c_ubar;
                let slack = rhs - lhs;
                if slack < pair_min {
                    pair_min = slack;
                    pair_witness = Some(Witness {
                        condition: Condition::PairwiseSum,
                        j,
                        point: ubar.to_vec(),
                        u_j: Some(uj),
                        slack,
                    });
                }
            }
        }
    });

    let partial_witness = partial_witness.expect("grid is nonempty");
    let pair_witness = pair_witness.expect("grid is nonempty");
    let partial_ok = partial_min >= -SLACK_TOLERANCE;
    let pair_ok = pair_min >= -SLACK_TOLERANCE;
    let witness = if partial_min <= pair_min {
        partial_witness
    } else {
        pair_witness
    };
    let worst_violation = if partial_ok && pair_ok {
        0.0
    } else {
        partial_min.min(pair_min)
    };
    Ok(ConditionReport {
        partial_bound_holds: partial_ok,
        pairwise_sum_holds: pair_ok,
        grid_resolution: g,
        worst_violation,
        witness,
        partial_bound_min_slack: partial_min,
        pairwise_sum_min_slack: pair_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_fgm_violates_partial_bound() {
        let model = CopulaModel::fgm(-0.5, 2).unwrap();
        let report = model.check_conditions(9).unwrap();
        assert!(!report.partial_bound_holds);
        assert!(report.worst_violation < 0.0);
        assert_eq!(report.witness.condition, Condition::PartialBound);
        // Slack of the partial bound for bivariate FGM is α u v (1 − v) at j = 0.
        let w = &report.witness;
        let (u, v) = (w.point[0], w.point[1]);
        let expected = if w.j == 0 {
            -0.5 * u * v * (1.0 - v)
        } else {
            -0.5 * u * v * (1.0 - u)
        };
        assert!((w.slack - expected).abs() < 1e-12);
    }

    #[test]
    fn budget_guard_rejects_large_grids() {
        let model = CopulaModel::independence(8).unwrap();
        let err = model.check_conditions_with_budget(50, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn tiny_grids_are_rejected() {
        let model = CopulaModel::independence(2).unwrap();
        assert!(model.check_conditions(1).is_err());
    }
}
