use rayon::prelude::*;

use super::theorems::terms1_unchecked;
use crate::channel::{require_3to1, CqChannel, InputDistribution};
use crate::error::{check_budget, Error, Result};
use crate::field::PrimeField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSearchConfig {
    /// Grid points per simplex coordinate (step `1/(resolution-1)`).
    pub resolution: usize,
    pub budget: u128,
    /// Optional upper bounds on `E[κ_j(X_j)]`.
    pub cost_limits: Option<[f64; 3]>,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            resolution: 5,
            budget: 10_000_000,
            cost_limits: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchResult {
    pub value: f64,
    pub rates: [f64; 3],
    pub distribution: InputDistribution,
    pub evaluated: usize,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All pmfs on `cells` letters with entries in multiples of `1/steps`.
fn simplex_points(cells: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; cells];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, steps: usize, out: &mut Vec<Vec<f64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            return;
        }
        for c in (0..=left).rev() {
            cur[i] = c;
            rec(i + 1, left - c, cur, steps, out);
        }
    }
    rec(0, steps, &mut cur, steps, &mut out);
    out
}

/// Exhaustive scan of factored pmfs `p_X1 · p_V2X2 · p_V3X3` on a simplex grid,
/// maximizing `weights · R` over the nested-coset-code region. Ties resolve
/// to the first grid point in scan order.
pub fn grid_search(
    channel: &CqChannel,
    field: PrimeField,
    weights: [f64; 3],
    config: &GridSearchConfig,
) -> Result<GridSearchResult> {
    if config.resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    let steps = config.resolution - 1;
    let [a1, a2, a3] = channel.alphabets();
    let q = field.size();
    let count = |cells: usize| binomial((steps + cells - 1) as u128, (cells - 1) as u128);
    let total = count(a1)
        .saturating_mul(count(q * a2))
        .saturating_mul(count(q * a3));
    check_budget("grid search", total, config.budget)?;
    let p1 = simplex_points(a1, steps);
    let p2 = simplex_points(q * a2, steps);
    let p3 = simplex_points(q * a3, steps);
    let table = |flat: &[f64], w: usize| -> Vec<Vec<f64>> { flat.chunks(w).map(|c| c.to_vec()).collect() };
    let mut candidates = Vec::with_capacity(total as usize);
    for x1 in &p1 {
        for v2 in &p2 {
            for v3 in &p3 {
                candidates.push(InputDistribution::new(field, x1.clone(), table(v2, a2), table(v3, a3))?);
            }
        }
    }
    search_distributions(channel, weights, &candidates, config.cost_limits)
}

/// Maximizes `weights · R` over the union of the regions of `candidates`.
pub fn search_distributions(
    channel: &CqChannel,
    weights: [f64; 3],
    candidates: &[InputDistribution],
    cost_limits: Option<[f64; 3]>,
) -> Result<GridSearchResult> {
    require_3to1(channel)?;
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate distributions"));
    }
    let evaluated: Vec<Option<(f64, [f64; 3], usize)>> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, d)| -> Result<Option<(f64, [f64; 3], usize)>> {
            let terms = terms1_unchecked(channel, d)?;
            if let Some(lim) = cost_limits {
                if terms.expected_costs.iter().zip(&lim).any(|(e, l)| *e > l + 1e-12) {
                    return Ok(None);
                }
            }
            let (v, r) = terms.region().max_weighted_sum(weights);
            Ok(Some((v, r, i)))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = evaluated.iter().filter(|e| e.is_some()).count();
    let best = evaluated
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.2 < a.2) { b } else { a })
        .ok_or_else(|| Error::invalid("no candidate satisfies the cost limits"))?;
    Ok(GridSearchResult {
        value: best.0,
        rates: best.1,
        distribution: candidates[best.2].clone(),
        evaluated: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::example2_channel;
    use crate::region::{example_separation_witness, interference_free_tau, theorem1_region, SeparationExample};

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_points(2, 4).len(), 5);
        assert_eq!(simplex_points(4, 4).len(), 35);
        assert!(simplex_points(3, 2).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-15));
        assert_eq!(binomial(7, 3), 35);
    }

    #[test]
    fn single_candidate_returns_its_corner() {
        let ch = example2_channel(0.05, 0.2).unwrap();
        let d = InputDistribution::identity_aux(PrimeField::binary(), vec![0.8, 0.2], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let res = search_distributions(&ch, [1.0, 1.0, 1.0], std::slice::from_ref(&d), None).unwrap();
        let (v, r) = theorem1_region(&ch, &d).unwrap().max_weighted_sum([1.0, 1.0, 1.0]);
        assert_eq!(res.value, v);
        assert_eq!(res.rates, r);
        assert_eq!(res.distribution, d);
    }

    #[test]
    fn zero_weights_give_zero() {
        let ch = example2_channel(0.05, 0.2).unwrap();
        let cfg = GridSearchConfig { resolution: 2, ..Default::default() };
        let res = grid_search(&ch, PrimeField::binary(), [0.0; 3], &cfg).unwrap();
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn grid_beats_separation_witness() {
        let (d1, d) = (0.01, 0.1);
        let tau = interference_free_tau(d1, d).unwrap();
        let w = example_separation_witness(SeparationExample::QuantumEx2, d1, d, tau).unwrap();
        let target: f64 = w.ptp_triple.iter().sum();
        let ch = example2_channel(d1, d).unwrap();
        let res = grid_search(&ch, PrimeField::binary(), [1.0; 3], &GridSearchConfig::default()).unwrap();
        assert!(res.value >= target - 1e-9, "{} < {}", res.value, target);
        let witness_dist =
            InputDistribution::identity_aux(PrimeField::binary(), vec![1.0 - tau, tau], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let res2 = search_distributions(&ch, [1.0; 3], &[witness_dist], None).unwrap();
        assert!(res2.value >= target - 1e-9);
    }

    #[test]
    fn budget_guard_and_determinism() {
        let ch = example2_channel(0.05, 0.2).unwrap();
        let cfg = GridSearchConfig { resolution: 5, budget: 100, cost_limits: None };
        assert!(matches!(
            grid_search(&ch, PrimeField::binary(), [1.0; 3], &cfg),
            Err(Error::ResourceLimit { .. })
        ));
        let cfg = GridSearchConfig { resolution: 3, cost_limits: Some([0.1, 0.0, 0.0]), ..Default::default() };
        let a = grid_search(&ch, PrimeField::binary(), [1.0, 2.0, 1.0], &cfg).unwrap();
        let b = grid_search(&ch, PrimeField::binary(), [1.0, 2.0, 1.0], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.distribution.p_x1()[1] <= 0.1);
    }
}
