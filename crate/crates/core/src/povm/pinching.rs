use rayon::prelude::*;

use super::projector::{conditional_typical_projector, product_state, typical_projector};
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, CMatrix, DensityOperator};
use crate::typicality::{check_pmf, Typicality};

#[derive(Clone, Debug, PartialEq)]
pub struct PinchingRow {
    pub n: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `tr(Π_ρ Π_{a^n} Π_ρ ρ_{b^n})`.
    pub trace: f64,
    pub one_minus_trace: f64,
    /// `tr(Π_{a^n} ρ_{b^n}) − ½‖ρ_{b^n} − Π_ρ ρ_{b^n} Π_ρ‖₁`, a lower bound on `trace`.
    pub gentle_lower_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinchingTable {
    pub rule: Typicality,
    pub rows: Vec<PinchingRow>,
    /// `1 − trace` strictly decreases along `rows`.
    pub strictly_decreasing: bool,
}

fn compositions(total: usize, cells: usize) -> Vec<Vec<usize>> {
    if cells == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for c in (0..=total).rev() {
        for mut rest in compositions(total - c, cells - 1) {
            rest.insert(0, c);
            out.push(rest);
        }
    }
    out
}

/// A pair `(a^n, b^n)` typical for `p_AB` under `rule`, chosen as the joint
/// type closest to `n·p_AB` in `ℓ1` (first in scan order on ties) and laid
/// out cell by cell. `None` if no type of length `n` is typical.
pub fn typical_pair(p_ab: &[Vec<f64>], n: usize, rule: Typicality) -> Option<(Vec<usize>, Vec<usize>)> {
    let nb = p_ab.first()?.len();
    let flat: Vec<f64> = p_ab.iter().flatten().cloned().collect();
    let nf = n as f64;
    let best = compositions(n, flat.len())
        .into_iter()
        .filter(|c| rule.counts_typical(c, &flat))
        .map(|c| {
            let dist: f64 = c.iter().zip(&flat).map(|(&k, &p)| (k as f64 - nf * p).abs()).sum();
            (dist, c)
        })
        .reduce(|x, y| if y.0 < x.0 - 1e-12 { y } else { x })?
        .1;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for (cell, &count) in best.iter().enumerate() {
        for _ in 0..count {
            a.push(cell / nb);
            b.push(cell % nb);
        }
    }
    Some((a, b))
}

/// For each `n`, evaluates `tr(Π_ρ Π_{a^n} Π_ρ ρ_{b^n})` at a `δ/4`-typical
/// pair, where `ρ_a = Σ_b p(b|a) ρ_b`, `ρ = Σ_a p(a) ρ_a`, `Π_{a^n}` is the
/// conditional typical projector of `⊗ρ_{a_t}` and `Π_ρ` the typical
/// projector of `ρ^{⊗n}`, both at `δ`. Points run in parallel.
pub fn verify_pinching(
    p_ab: &[Vec<f64>],
    states_b: &[DensityOperator],
    n_list: &[usize],
    rule: Typicality,
) -> Result<PinchingTable> {
    let flat: Vec<f64> = p_ab.iter().flatten().cloned().collect();
    check_pmf(&flat, "p_AB")?;
    let nb = states_b.len();
    if p_ab.iter().any(|r| r.len() != nb) || nb == 0 {
        return Err(Error::invalid("p_AB rows must have one entry per state"));
    }
    let d = states_b[0].dim();
    let p_a: Vec<f64> = p_ab.iter().map(|r| r.iter().sum()).collect();
    let states_a = p_ab
        .iter()
        .zip(&p_a)
        .map(|(row, &pa)| {
            if pa > 0.0 {
                let w: Vec<f64> = row.iter().map(|p| p / pa).collect();
                DensityOperator::mixture(&w, &states_b.iter().collect::<Vec<_>>())
            } else {
                Ok(DensityOperator::maximally_mixed(d))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let avg = DensityOperator::mixture(&p_a, &states_a.iter().collect::<Vec<_>>())?;
    let b_mats: Vec<CMatrix> = states_b.iter().map(|s| s.matrix().clone()).collect();
    let pair_rule = rule.scaled(0.25);
    let rows = n_list
        .par_iter()
        .map(|&n| -> Result<PinchingRow> {
            if n == 0 {
                return Err(Error::invalid("blocklength must be positive"));
            }
            let (a, b) = typical_pair(p_ab, n, pair_rule)
                .ok_or_else(|| Error::invalid(format!("no typical pair of length {n}")))?;
            let pi_rho = typical_projector(&avg, n, rule)?;
            let pi_a = conditional_typical_projector(&states_a, &a, rule, None)?;
            let rho_b = product_state(&b_mats, &b);
            let sandwich = pi_rho.matrix().sandwich(pi_a.matrix());
            let trace = sandwich.trace_product(&rho_b).re;
            let pinched = pi_rho.matrix().sandwich(&rho_b);
            let gentle_lower_bound = pi_a.matrix().trace_product(&rho_b).re - 0.5 * trace_norm(&(&rho_b - &pinched))?;
            Ok(PinchingRow {
                n,
                a,
                b,
                trace,
                one_minus_trace: 1.0 - trace,
                gentle_lower_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].one_minus_trace < w[0].one_minus_trace);
    Ok(PinchingTable {
        rule,
        rows,
        strictly_decreasing,
    })
}
