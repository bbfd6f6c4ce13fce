//! Three-user classical-quantum channels and auxiliary classical-quantum states.

mod cq_state;
mod dist;
mod states;

pub use cq_state::{cq_mutual_information, CqBlock, CqState};
pub use dist::{InputDistribution, SplitInputDistribution};
pub use states::{sigma1, sigma2, split_sigma1, split_sigma2};

use crate::error::{Error, Result};
use crate::linalg::{trace_distance, CMatrix, DensityOperator};

pub const THREE_TO_ONE_TOL: f64 = 1e-9;

/// Family `ρ_x` on `H_Y1 ⊗ H_Y2 ⊗ H_Y3` indexed by `x = (x1, x2, x3)`,
/// with per-user cost functions.
#[derive(Clone, Debug, PartialEq)]
pub struct CqChannel {
    alphabets: [usize; 3],
    output_dims: [usize; 3],
    states: Vec<DensityOperator>,
    costs: [Vec<f64>; 3],
}

impl CqChannel {
    /// `states` is ordered with `x3` fastest, then `x2`, then `x1`.
    pub fn new(
        alphabets: [usize; 3],
        output_dims: [usize; 3],
        states: Vec<DensityOperator>,
        costs: [Vec<f64>; 3],
    ) -> Result<Self> {
        if alphabets.iter().any(|&a| a == 0) || output_dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("alphabet sizes and output dimensions must be positive"));
        }
        let count: usize = alphabets.iter().product();
        if states.len() != count {
            return Err(Error::invalid(format!(
                "expected {count} states, got {}",
                states.len()
            )));
        }
        let dim: usize = output_dims.iter().product();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::invalid(format!(
                "state of dimension {} on an output space of dimension {dim}",
                s.dim()
            )));
        }
        for (j, (cost, &a)) in costs.iter().zip(&alphabets).enumerate() {
            if cost.len() != a {
                return Err(Error::invalid(format!(
                    "cost table of user {} has {} entries for {a} inputs",
                    j + 1,
                    cost.len()
                )));
            }
            if cost.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::invalid(format!(
                    "cost table of user {} must be finite and nonnegative",
                    j + 1
                )));
            }
        }
        Ok(CqChannel {
            alphabets,
            output_dims,
            states,
            costs,
        })
    }

    pub fn from_fn(
        alphabets: [usize; 3],
        output_dims: [usize; 3],
        costs: [Vec<f64>; 3],
        mut f: impl FnMut([usize; 3]) -> Result<DensityOperator>,
    ) -> Result<Self> {
        let states = inputs_of(alphabets).map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(alphabets, output_dims, states, costs)
    }

    pub fn alphabets(&self) -> [usize; 3] {
        self.alphabets
    }

    pub fn output_dims(&self) -> [usize; 3] {
        self.output_dims
    }

    /// Cost function of user `j` (0-based).
    pub fn costs(&self, j: usize) -> &[f64] {
        &self.costs[j]
    }

    pub fn all_costs(&self) -> &[Vec<f64>; 3] {
        &self.costs
    }

    pub fn input_index(&self, x: [usize; 3]) -> usize {
        (x[0] * self.alphabets[1] + x[1]) * self.alphabets[2] + x[2]
    }

    pub fn state(&self, x: [usize; 3]) -> &DensityOperator {
        &self.states[self.input_index(x)]
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn inputs(&self) -> impl Iterator<Item = [usize; 3]> {
        inputs_of(self.alphabets)
    }

    /// Reduced states on the kept output factors, one per input in index order.
    pub fn reduced_states(&self, keep: &[usize]) -> Result<Vec<CMatrix>> {
        self.states
            .iter()
            .map(|s| s.matrix().partial_trace(&self.output_dims, keep))
            .collect()
    }
}

pub(crate) fn inputs_of(alphabets: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    let [a1, a2, a3] = alphabets;
    (0..a1).flat_map(move |x1| (0..a2).flat_map(move |x2| (0..a3).map(move |x3| [x1, x2, x3])))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeToOneWitness {
    /// Receiver index, 2 or 3.
    pub receiver: usize,
    pub x: [usize; 3],
    pub x_prime: [usize; 3],
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeToOneReport {
    pub holds: bool,
    pub max_distance: f64,
    pub witness: Option<ThreeToOneWitness>,
}

/// Checks that the reduced output at receivers 2 and 3 depends only on that
/// receiver's own input, up to trace distance `tol`.
pub fn is_3to1(channel: &CqChannel, tol: f64) -> Result<ThreeToOneReport> {
    let inputs: Vec<[usize; 3]> = channel.inputs().collect();
    let mut worst: Option<ThreeToOneWitness> = None;
    for j in 1..3 {
        let reduced = channel.reduced_states(&[j])?;
        for (i, x) in inputs.iter().enumerate() {
            for (i2, x2) in inputs.iter().enumerate().skip(i + 1) {
                if x[j] != x2[j] {
                    continue;
                }
                let d = trace_distance(&reduced[i], &reduced[i2])?;
                if worst.as_ref().is_none_or(|w| d > w.distance) {
                    worst = Some(ThreeToOneWitness {
                        receiver: j + 1,
                        x: *x,
                        x_prime: *x2,
                        distance: d,
                    });
                }
            }
        }
    }
    let max_distance = worst.as_ref().map_or(0.0, |w| w.distance);
    let holds = max_distance <= tol;
    Ok(ThreeToOneReport {
        holds,
        max_distance,
        witness: if holds { None } else { worst },
    })
}

pub(crate) fn require_3to1(channel: &CqChannel) -> Result<()> {
    let report = is_3to1(channel, THREE_TO_ONE_TOL)?;
    match report.witness {
        None => Ok(()),
        Some(w) => Err(Error::ModelViolation(format!(
            "receiver {} output depends on other users' inputs: x={:?} and x'={:?} differ by trace distance {:.3e}",
            w.receiver, w.x, w.x_prime, w.distance
        ))),
    }
}

fn check_bias(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 0.5), got {v}")))
    }
}

fn example_costs() -> [Vec<f64>; 3] {
    [vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]]
}

/// `(1-η)|b⟩⟨b| + η|1-b⟩⟨1-b|`.
pub fn binary_symmetric_state(b: usize, eta: f64) -> DensityOperator {
    let mut w = [0.0; 2];
    w[b & 1] = 1.0 - eta;
    w[1 - (b & 1)] = eta;
    DensityOperator::new_unchecked(CMatrix::diag(&w))
}

/// Classical additive channel embedded diagonally:
/// `σ_{x1⊕x2⊕x3}(δ1) ⊗ σ_{x2}(δ) ⊗ σ_{x3}(δ)`.
pub fn example1_channel(delta1: f64, delta: f64) -> Result<CqChannel> {
    check_bias("delta1", delta1)?;
    check_bias("delta", delta)?;
    CqChannel::from_fn([2, 2, 2], [2, 2, 2], example_costs(), |x| {
        let s = x[0] ^ x[1] ^ x[2];
        Ok(binary_symmetric_state(s, delta1)
            .tensor(&binary_symmetric_state(x[1], delta))
            .tensor(&binary_symmetric_state(x[2], delta)))
    })
}

/// The two non-commuting qubit states of the second example.
pub fn example2_sigma(b: usize) -> DensityOperator {
    let m = if b & 1 == 0 {
        CMatrix::from_real_rows(&[&[2.0 / 3.0, 0.0], &[0.0, 1.0 / 3.0]])
    } else {
        CMatrix::from_real_rows(&[&[0.5, 1.0 / 6.0], &[1.0 / 6.0, 0.5]])
    };
    DensityOperator::new_unchecked(m.expect("square literal"))
}

/// `ρ(p) = p σ0 + (1-p) σ1`.
pub fn example2_rho(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("mixing weight {p} outside [0, 1]")));
    }
    let mut m = example2_sigma(0).matrix().scale(p);
    m.add_scaled(1.0 - p, example2_sigma(1).matrix());
    Ok(DensityOperator::new_unchecked(m))
}

/// `(1-η) σ_b + η σ_{b⊕1}`.
pub fn example2_noisy(b: usize, eta: f64) -> DensityOperator {
    let mut m = example2_sigma(b).matrix().scale(1.0 - eta);
    m.add_scaled(eta, example2_sigma(b ^ 1).matrix());
    DensityOperator::new_unchecked(m)
}

pub fn example2_channel(delta1: f64, delta: f64) -> Result<CqChannel> {
    check_bias("delta1", delta1)?;
    check_bias("delta", delta)?;
    CqChannel::from_fn([2, 2, 2], [2, 2, 2], example_costs(), |x| {
        let s = x[0] ^ x[1] ^ x[2];
        Ok(example2_noisy(s, delta1)
            .tensor(&example2_noisy(x[1], delta))
            .tensor(&example2_noisy(x[2], delta)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{von_neumann_entropy, LogBase};

    #[test]
    fn factories_are_3to1() {
        for ch in [example1_channel(0.05, 0.2).unwrap(), example2_channel(0.01, 0.1).unwrap()] {
            let r = is_3to1(&ch, THREE_TO_ONE_TOL).unwrap();
            assert!(r.holds && r.witness.is_none(), "{r:?}");
            assert_eq!(ch.costs(0), &[0.0, 1.0]);
            assert_eq!(ch.costs(1), &[0.0, 0.0]);
        }
    }

    #[test]
    fn interference_at_receiver_two_is_detected() {
        let ch = CqChannel::from_fn([2, 2, 2], [2, 2, 2], example_costs(), |x| {
            Ok(binary_symmetric_state(x[0], 0.1)
                .tensor(&binary_symmetric_state(x[0] ^ x[1], 0.1))
                .tensor(&binary_symmetric_state(x[2], 0.1)))
        })
        .unwrap();
        let r = is_3to1(&ch, THREE_TO_ONE_TOL).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        assert_eq!(w.receiver, 2);
        assert_eq!(w.x[1], w.x_prime[1]);
        assert_ne!(w.x[0], w.x_prime[0]);
        // Independent oracle: the two reduced states really differ.
        let a = ch.state(w.x).matrix().partial_trace(&[2, 2, 2], &[1]).unwrap();
        let b = ch.state(w.x_prime).matrix().partial_trace(&[2, 2, 2], &[1]).unwrap();
        assert!(a.max_abs_diff(&b) > 0.5);
        assert!(require_3to1(&ch).is_err());
    }

    #[test]
    fn product_channel_is_3to1() {
        let ch = CqChannel::from_fn([2, 3, 2], [2, 1, 2], [vec![0.0; 2], vec![0.0; 3], vec![0.0; 2]], |x| {
            Ok(example2_noisy(x[0], 0.3)
                .tensor(&DensityOperator::maximally_mixed(1))
                .tensor(&binary_symmetric_state(x[2], 0.2)))
        })
        .unwrap();
        assert!(is_3to1(&ch, THREE_TO_ONE_TOL).unwrap().holds);
    }

    #[test]
    fn bias_bounds() {
        assert!(example2_channel(0.01, 0.5).is_err());
        assert!(example1_channel(0.0, 0.1).is_err());
        assert!(example1_channel(0.1, 1.2).is_err());
    }

    #[test]
    fn example2_matrices_as_listed() {
        let s0 = example2_sigma(0);
        let s1 = example2_sigma(1);
        assert_eq!(s0.matrix(), &CMatrix::from_real_rows(&[&[2.0 / 3.0, 0.0], &[0.0, 1.0 / 3.0]]).unwrap());
        assert_eq!(s1.matrix(), &CMatrix::from_real_rows(&[&[0.5, 1.0 / 6.0], &[1.0 / 6.0, 0.5]]).unwrap());
        // Factories yield valid density operators.
        for s in example2_channel(0.2, 0.3).unwrap().states() {
            assert!(DensityOperator::new(s.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn example2_commutator_vanishes_only_at_half() {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let a = example2_rho(p).unwrap();
            let b = example2_rho(1.0 - p).unwrap();
            let norm = a.matrix().commutator(b.matrix()).max_abs();
            if i == 5 {
                assert!(norm < 1e-15);
            } else {
                assert!(norm > 1e-6, "p={p}");
            }
        }
    }

    #[test]
    fn example2_noisy_is_rho() {
        let d = 0.17;
        assert!(example2_noisy(0, d).matrix().max_abs_diff(example2_rho(1.0 - d).unwrap().matrix()) < 1e-15);
        assert!(example2_noisy(1, d).matrix().max_abs_diff(example2_rho(d).unwrap().matrix()) < 1e-15);
        let s = |p| von_neumann_entropy(&example2_rho(p).unwrap(), LogBase::Bits).unwrap();
        assert!((s(d) - s(1.0 - d)).abs() < 1e-12);
    }

    #[test]
    fn channel_validation() {
        let st = vec![DensityOperator::basis(2, 0); 7];
        assert!(CqChannel::new([2, 2, 2], [2, 1, 1], st, example_costs()).is_err());
        let st = vec![DensityOperator::basis(2, 0); 8];
        assert!(CqChannel::new([2, 2, 2], [2, 1, 1], st.clone(), [vec![0.0, -1.0], vec![0.0; 2], vec![0.0; 2]]).is_err());
        assert!(CqChannel::new([2, 2, 2], [2, 2, 1], st.clone(), example_costs()).is_err());
        assert!(CqChannel::new([2, 2, 2], [2, 1, 1], st, example_costs()).is_ok());
    }
}
