//! Cyclic Jacobi eigensolver for Hermitian matrices.

use super::matrix::{c, CMatrix, C64};
use crate::error::{Error, Result};

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `M = V diag(values) V†` with eigenvalues sorted in descending order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// `V f(diag) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        spectral_sum(&self.vectors, &fv)
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        let d = self.vectors.dim();
        (0..d).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// `Σ_k w_k v_k v_k†` for the columns `v_k` of `vectors`; zero weights skipped.
pub fn spectral_sum(vectors: &CMatrix, weights: &[f64]) -> CMatrix {
    let d = vectors.dim();
    let mut out = CMatrix::zeros(d);
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..d {
            let vi = vectors[(i, k)] * w;
            if vi.re == 0.0 && vi.im == 0.0 {
                continue;
            }
            for j in 0..d {
                out[(i, j)] += vi * vectors[(j, k)].conj();
            }
        }
    }
    out
}

/// Eigen-decomposes a Hermitian matrix; rejects inputs whose Hermitian defect
/// exceeds `1e-10`.
pub fn eig_hermitian_matrix(m: &CMatrix) -> Result<EigenDecomposition> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    Ok(jacobi(m.hermitian_part()))
}

fn off_norm(a: &CMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: CMatrix) -> EigenDecomposition {
    let d = a.dim();
    let mut v = CMatrix::identity(d);
    let scale = a.frobenius_norm().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(d, |i, k| v[(i, order[k])]);
    EigenDecomposition { values, vectors }
}

/// Annihilates `a[p][q]` with `A <- G† A G`, `V <- V G`, where
/// `G = diag(1, e^{-iφ}) · R(θ)` acts on the `(p, q)` plane.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < 1e-18 * (app.abs() + aqq.abs()) {
        a[(p, q)] = c(0.0, 0.0);
        a[(q, p)] = c(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let e = phase.conj();
    let d = a.dim();

    // Columns: A <- A G.
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * cs - akq * e * sn;
        a[(k, q)] = akp * sn + akq * e * cs;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cs - vkq * e * sn;
        v[(k, q)] = vkp * sn + vkq * e * cs;
    }
    // Rows: A <- G† A.
    let ec = e.conj();
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * cs - aqk * ec * sn;
        a[(q, k)] = apk * sn + aqk * ec * cs;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);
}
