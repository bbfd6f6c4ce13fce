//! Exact small-blocklength typical projectors, square-root POVMs and their
//! error probabilities.

mod pinching;
mod projector;
mod ptp;
mod rx1;

pub use pinching::{typical_pair, verify_pinching, PinchingRow, PinchingTable};
pub use projector::{
    conditional_typical_projector, conditional_typical_projector_with_budget, product_state, typical_projector,
    typical_projector_with_budget, ProjectorKind, TypicalProjector, DEFAULT_DIM_BUDGET,
};
pub use ptp::{
    build_ptp_decoder, build_ptp_povm, ptp_ensemble_error, PtpDecoder, PtpEnsembleConfig, PtpEnsembleResult,
};
pub use rx1::{build_rx1_povm, Rx1Decoder, Rx1Setup};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian_matrix, max_eigenvalue, min_eigenvalue, trace_norm, CMatrix};

/// Eigenvalues of `Σγ` at or below this are treated as zero by the generalized inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// PSD and completeness tolerance enforced at construction.
pub const POVM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PovmLabel {
    Message(u64),
    Joint { m1: u64, a: u64, l: u64 },
    Completion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    pub label: PovmLabel,
    pub operator: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmCheck {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `‖Σ_i λ_i − I‖_max`.
    pub completeness_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    /// Validates PSD elements and completeness to [`POVM_TOL`].
    pub fn new(dim: usize, elements: Vec<PovmElement>) -> Result<Self> {
        if elements.iter().any(|e| e.operator.dim() != dim) {
            return Err(Error::invalid("POVM element dimension mismatch"));
        }
        let povm = Povm { dim, elements };
        let c = povm.check()?;
        if c.min_eigenvalue < -POVM_TOL {
            return Err(Error::InternalConsistency(format!(
                "POVM element has eigenvalue {:.3e}",
                c.min_eigenvalue
            )));
        }
        if c.completeness_residual > POVM_TOL {
            return Err(Error::InternalConsistency(format!(
                "POVM elements sum to identity only within {:.3e}",
                c.completeness_residual
            )));
        }
        Ok(povm)
    }

    /// Square-root measurement: each group of operators `γ` becomes
    /// `N^{-1/2} (Σ_group γ) N^{-1/2}` with `N` the sum over all groups, and
    /// `I − Σλ` is appended as the completion element.
    pub fn square_root(dim: usize, groups: Vec<(PovmLabel, Vec<CMatrix>)>) -> Result<Self> {
        let mut total = CMatrix::zeros(dim);
        let mut sums = Vec::with_capacity(groups.len());
        for (label, ops) in groups {
            let mut s = CMatrix::zeros(dim);
            for g in &ops {
                if g.dim() != dim {
                    return Err(Error::invalid("POVM operator dimension mismatch"));
                }
                s.add_scaled(1.0, g);
            }
            total.add_scaled(1.0, &s);
            sums.push((label, s));
        }
        let inv_sqrt = eig_hermitian_matrix(&total.hermitian_part())?
            .map(|x| if x > PINV_CUTOFF { 1.0 / x.sqrt() } else { 0.0 });
        let mut elements = Vec::with_capacity(sums.len() + 1);
        let mut completion = CMatrix::identity(dim);
        for (label, s) in sums {
            let op = inv_sqrt.matmul(&s).matmul(&inv_sqrt).hermitian_part();
            completion.add_scaled(-1.0, &op);
            elements.push(PovmElement { label, operator: op });
        }
        elements.push(PovmElement {
            label: PovmLabel::Completion,
            operator: completion.hermitian_part(),
        });
        Povm::new(dim, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn element(&self, label: PovmLabel) -> Option<&CMatrix> {
        self.elements.iter().find(|e| e.label == label).map(|e| &e.operator)
    }

    pub fn check(&self) -> Result<PovmCheck> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = CMatrix::zeros(self.dim);
        for e in &self.elements {
            lo = lo.min(min_eigenvalue(&e.operator)?);
            hi = hi.max(max_eigenvalue(&e.operator)?);
            sum.add_scaled(1.0, &e.operator);
        }
        Ok(PovmCheck {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
            completeness_residual: sum.max_abs_diff(&CMatrix::identity(self.dim)),
        })
    }

    /// `tr(λ_label ρ)`; zero for absent labels.
    pub fn probability(&self, label: PovmLabel, state: &CMatrix) -> f64 {
        self.element(label).map_or(0.0, |op| op.trace_product(state).re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GentleCheck {
    /// `1 − tr(Πρ)`.
    pub epsilon: f64,
    /// `‖ρ − ΠρΠ‖₁`.
    pub disturbance: f64,
    /// `2√ε`.
    pub bound: f64,
    pub holds: bool,
}

/// Measures how much a projector disturbs a state against `2√ε`.
pub fn gentle_operator_check(state: &CMatrix, projector: &CMatrix) -> Result<GentleCheck> {
    if state.dim() != projector.dim() {
        return Err(Error::invalid("state and projector dimensions differ"));
    }
    let epsilon = (1.0 - projector.trace_product(state).re).max(0.0);
    let disturbance = trace_norm(&(state - &projector.sandwich(state)))?;
    let bound = 2.0 * epsilon.sqrt();
    Ok(GentleCheck {
        epsilon,
        disturbance,
        bound,
        holds: disturbance <= bound + 1e-6,
    })
}
