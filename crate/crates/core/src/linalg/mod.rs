//! Dense complex linear algebra for small quantum systems.

mod eigen;
mod matrix;

pub use eigen::{
    eig_hermitian_matrix, spectral_sum, EigenDecomposition, HERMITIAN_TOL, JACOBI_MAX_SWEEPS,
    JACOBI_TOL,
};
pub use matrix::{CMatrix, C64};

use crate::error::{Error, Result};

pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }
}

/// Hermitian matrix (within `1e-10`), no trace or sign constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "operator is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(HermitianOperator(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

pub fn eig_hermitian(m: &HermitianOperator) -> EigenDecomposition {
    eig_hermitian_matrix(m.matrix()).expect("validated Hermitian operator")
}

/// Hermitian, PSD (min eigenvalue >= -1e-10), unit trace (within 1e-10).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(CMatrix);

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "density operator is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::invalid(format!(
                "density operator has trace {} (expected 1)",
                tr
            )));
        }
        let e = eig_hermitian_matrix(&m)?;
        let min = e.values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::invalid(format!(
                "density operator has negative eigenvalue {min:e}"
            )));
        }
        Ok(DensityOperator(m))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        DensityOperator(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows)?)
    }

    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("pure state from zero vector"));
        }
        let u: Vec<C64> = v.iter().map(|x| x / norm).collect();
        Ok(DensityOperator(CMatrix::outer(&u)))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        DensityOperator(CMatrix::basis_projector(dim, i))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator(CMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Convex combination `Σ w_i ρ_i`; weights must form a pmf.
    pub fn mixture(weights: &[f64], states: &[&DensityOperator]) -> Result<Self> {
        crate::typicality::check_pmf(weights, "mixture weights")?;
        let dim = states
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?
            .dim();
        let mut m = CMatrix::zeros(dim);
        for (&w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::invalid("mixture of states with different dimensions"));
            }
            m.add_scaled(w, s.matrix());
        }
        Ok(DensityOperator(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eig(&self) -> EigenDecomposition {
        eig_hermitian_matrix(&self.0).expect("validated density operator")
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator(self.0.kron(&other.0))
    }

    pub fn tensor_power(&self, n: usize) -> DensityOperator {
        let mut m = CMatrix::identity(1);
        for _ in 0..n {
            m = m.kron(&self.0);
        }
        DensityOperator(m)
    }
}

pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

pub fn partial_trace(rho: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
    Ok(DensityOperator(rho.matrix().partial_trace(dims, keep)?))
}

/// Entropy of a spectrum; eigenvalues in `(-1e-10, 0)` are clamped to 0.
pub fn spectrum_entropy(values: &[f64], base: LogBase) -> Result<f64> {
    let mut s = 0.0;
    for &w in values {
        if w < -PSD_TOL {
            return Err(Error::invalid(format!("negative eigenvalue {w:e}")));
        }
        if w > 0.0 {
            s -= w * base.log(w);
        }
    }
    Ok(s.max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityOperator, base: LogBase) -> Result<f64> {
    spectrum_entropy(&rho.eig().values, base)
}

/// Entropy in bits of a matrix known to be a density operator up to rounding.
pub(crate) fn entropy_bits(m: &CMatrix) -> Result<f64> {
    spectrum_entropy(&eig_hermitian_matrix(m)?.values, LogBase::Bits)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian_matrix(m)?.values.iter().map(|x| x.abs()).sum())
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm(&(a - b))?)
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian_matrix(m)?.values.last().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian_matrix(m)?.values.first().copied().unwrap_or(0.0))
}
