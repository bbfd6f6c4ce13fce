use crate::error::{check_budget, Error, Result};
use crate::linalg::{eig_hermitian_matrix, spectral_sum, CMatrix, DensityOperator, HermitianOperator};
use crate::typicality::Typicality;

pub const DEFAULT_DIM_BUDGET: u128 = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectorKind {
    Unconditional,
    Conditional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalProjector {
    pub n: usize,
    pub kind: ProjectorKind,
    pub rule: Typicality,
    /// Label sequence that was conditioned on (empty when unconditional).
    pub sequence: Vec<usize>,
    pub rank: usize,
    projector: HermitianOperator,
}

impl TypicalProjector {
    pub fn matrix(&self) -> &CMatrix {
        self.projector.matrix()
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    /// `‖P² - P‖_max`.
    pub fn idempotency_defect(&self) -> f64 {
        let p = self.matrix();
        p.matmul(p).max_abs_diff(p)
    }
}

/// Eigenvalues clamped at zero and renormalized, with eigenvectors.
pub(crate) fn spectrum(rho: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let e = eig_hermitian_matrix(rho)?;
    let mut w: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return Err(Error::invalid("state has no positive eigenvalue"));
    }
    for x in &mut w {
        *x /= s;
    }
    Ok((w, e.vectors))
}

fn check_dim(d: usize, n: usize, budget: u128) -> Result<usize> {
    let total = crate::error::pow_saturating(d as u128, n);
    check_budget("tensor-power dimension", total, budget)?;
    Ok(total as usize)
}

/// Mixed-radix digits of `idx` over `n` positions of base `d`, first position most significant.
pub(crate) fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut v = vec![0; n];
    for slot in v.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    v
}

fn kron_all(mats: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1);
    for m in mats {
        out = out.kron(m);
    }
    out
}

/// Projector onto the span of eigenvector products `|g_{y^n}⟩` of `ρ^{⊗n}`
/// whose label sequence `y^n` is typical for the spectrum of `ρ`.
pub fn typical_projector(rho: &DensityOperator, n: usize, rule: Typicality) -> Result<TypicalProjector> {
    typical_projector_with_budget(rho, n, rule, DEFAULT_DIM_BUDGET)
}

pub fn typical_projector_with_budget(
    rho: &DensityOperator,
    n: usize,
    rule: Typicality,
    budget: u128,
) -> Result<TypicalProjector> {
    let d = rho.dim();
    let total = check_dim(d, n, budget)?;
    let (w, v) = spectrum(rho.matrix())?;
    let basis = kron_all(&vec![&v; n]);
    let mask: Vec<f64> = (0..total)
        .map(|i| if rule.is_typical(&digits(i, d, n), &w) { 1.0 } else { 0.0 })
        .collect();
    let rank = mask.iter().filter(|&&m| m > 0.0).count();
    Ok(TypicalProjector {
        n,
        kind: ProjectorKind::Unconditional,
        rule,
        sequence: Vec::new(),
        rank,
        projector: HermitianOperator::new(spectral_sum(&basis, &mask).hermitian_part())?,
    })
}

/// Conditional typical projector of `⊗_t ρ_{v_t}`. When `indicator_pmf` is
/// given and `v^n` is not typical for it, the projector is zero.
pub fn conditional_typical_projector(
    states: &[DensityOperator],
    sequence: &[usize],
    rule: Typicality,
    indicator_pmf: Option<&[f64]>,
) -> Result<TypicalProjector> {
    conditional_typical_projector_with_budget(states, sequence, rule, indicator_pmf, DEFAULT_DIM_BUDGET)
}

pub fn conditional_typical_projector_with_budget(
    states: &[DensityOperator],
    sequence: &[usize],
    rule: Typicality,
    indicator_pmf: Option<&[f64]>,
    budget: u128,
) -> Result<TypicalProjector> {
    let mats: Vec<&CMatrix> = states.iter().map(|s| s.matrix()).collect();
    let spectra = mats.iter().map(|m| spectrum(m)).collect::<Result<Vec<_>>>()?;
    conditional_from_spectra(&spectra, sequence, rule, indicator_pmf, budget)
}

pub(crate) fn conditional_from_spectra(
    spectra: &[(Vec<f64>, CMatrix)],
    sequence: &[usize],
    rule: Typicality,
    indicator_pmf: Option<&[f64]>,
    budget: u128,
) -> Result<TypicalProjector> {
    let d = spectra
        .first()
        .ok_or_else(|| Error::invalid("no conditional states"))?
        .1
        .dim();
    if spectra.iter().any(|s| s.1.dim() != d) {
        return Err(Error::invalid("conditional states differ in dimension"));
    }
    if let Some(&v) = sequence.iter().find(|&&v| v >= spectra.len()) {
        return Err(Error::invalid(format!("sequence letter {v} has no state")));
    }
    let n = sequence.len();
    let total = check_dim(d, n, budget)?;
    let make = |rank: usize, m: CMatrix| -> Result<TypicalProjector> {
        Ok(TypicalProjector {
            n,
            kind: ProjectorKind::Conditional,
            rule,
            sequence: sequence.to_vec(),
            rank,
            projector: HermitianOperator::new(m)?,
        })
    };
    if let Some(p) = indicator_pmf {
        if !rule.is_typical(sequence, p) {
            return make(0, CMatrix::zeros(total));
        }
    }
    let conds: Vec<Vec<f64>> = spectra.iter().map(|s| s.0.clone()).collect();
    let basis = kron_all(&sequence.iter().map(|&v| &spectra[v].1).collect::<Vec<_>>());
    let mask: Vec<f64> = (0..total)
        .map(|i| {
            if rule.conditionally_typical(sequence, &digits(i, d, n), &conds) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let rank = mask.iter().filter(|&&m| m > 0.0).count();
    make(rank, spectral_sum(&basis, &mask).hermitian_part())
}

/// `⊗_t ρ_{v_t}` as a matrix.
pub fn product_state(states: &[CMatrix], sequence: &[usize]) -> CMatrix {
    kron_all(&sequence.iter().map(|&v| &states[v]).collect::<Vec<_>>())
}
