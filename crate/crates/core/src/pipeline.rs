//! End-to-end solving: maximum c-matching, auxiliary unit instance, balanced
//! unit solution, and the map back. Every intermediate claim is re-checked.

use thiserror::Error;

use crate::cmatching::{max_weight_c_matching, SolverError};
use crate::model::{CMatching, Instance, Rational, Solution};
use crate::reduction::{build_auxiliary, AuxiliaryBundle, PreservationReport, ReductionError};
use crate::semantics::{is_balanced, is_stable, BalanceReport};
use crate::unit_solver::{
    find_stable_unit, solve_balanced_unit_at_optimum, BalancedOutcome, Certificate, LpGapCertificate,
    OutcomeStatus, SolverConfig, UnitSolverError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Unit(#[from] UnitSolverError),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

#[derive(Debug, Clone)]
pub enum SolveStatus {
    Balanced { solution: Solution, report: BalanceReport, preservation: PreservationReport },
    NoneExists(LpGapCertificate),
    Inconclusive(String),
}

#[derive(Debug, Clone)]
pub struct SolveRun {
    pub matching: CMatching,
    pub optimum: Rational,
    pub bundle: AuxiliaryBundle,
    pub unit: BalancedOutcome,
    pub status: SolveStatus,
}

fn optimal_bundle(inst: &Instance) -> Result<(CMatching, Rational, AuxiliaryBundle), PipelineError> {
    let (m, optimum) = max_weight_c_matching(inst)?;
    if m.weight(inst) != optimum {
        return Err(PipelineError::SelfCheck("matching weight differs from the reported optimum".into()));
    }
    let bundle = build_auxiliary(inst, &m)?;
    bundle.check_invariants().map_err(PipelineError::SelfCheck)?;
    Ok((m, optimum, bundle))
}

/// Computes a balanced solution, or certifies that none exists.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveRun, PipelineError> {
    let (matching, optimum, bundle) = optimal_bundle(inst)?;
    // The aux matching keeps the weight of m, and a maximum c-matching maps
    // to a maximum matching of the aux instance.
    let unit = solve_balanced_unit_at_optimum(bundle.aux(), bundle.aux_matching(), cfg, optimum)?;
    let status = match (&unit.status, &unit.certificate) {
        (OutcomeStatus::BalancedFound, _) => {
            let x = unit.allocation.as_ref().expect("balanced outcome carries an allocation");
            let solution = bundle.phi(x)?;
            let report = is_balanced(inst, &solution);
            if !report.balanced {
                return Err(PipelineError::SelfCheck("mapped solution is not balanced".into()));
            }
            let preservation = bundle.verify_preservation(&solution, x)?;
            if !preservation.holds() {
                return Err(PipelineError::SelfCheck(format!("correspondence broken: {preservation:?}")));
            }
            SolveStatus::Balanced { solution, report, preservation }
        }
        (OutcomeStatus::NoneExists, Certificate::LpGap(cert)) => {
            if cert.fractional_optimum <= cert.integral_optimum {
                return Err(PipelineError::SelfCheck("gap certificate without a gap".into()));
            }
            SolveStatus::NoneExists(cert.clone())
        }
        (OutcomeStatus::Inconclusive, Certificate::Inconclusive(reason)) => SolveStatus::Inconclusive(reason.clone()),
        (status, cert) => {
            return Err(PipelineError::SelfCheck(format!("status {status:?} with certificate {cert:?}")));
        }
    };
    Ok(SolveRun { matching, optimum, bundle, unit, status })
}

/// A stable solution on a maximum c-matching, if one exists.
pub fn find_stable(inst: &Instance) -> Result<Option<Solution>, PipelineError> {
    let (_, _, bundle) = optimal_bundle(inst)?;
    let Some(x) = find_stable_unit(bundle.aux(), bundle.aux_matching())? else {
        return Ok(None);
    };
    let solution = bundle.phi(&x)?;
    if !is_stable(inst, &solution).stable {
        return Err(PipelineError::SelfCheck("mapped stable point is not stable".into()));
    }
    Ok(Some(solution))
}
