use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{entropy_bits, CMatrix};
use crate::typicality::shannon_entropy;

/// One classical label with its probability and normalized conditional state.
#[derive(Clone, Debug, PartialEq)]
pub struct CqBlock {
    pub label: Vec<usize>,
    pub prob: f64,
    pub state: CMatrix,
}

/// `Σ_c p(c) ρ_c ⊗ |c⟩⟨c|` stored block by block. Zero-probability blocks
/// are allowed and are ignored by every entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct CqState {
    registers: Vec<usize>,
    quantum_dims: Vec<usize>,
    blocks: Vec<CqBlock>,
}

type Grouped = BTreeMap<Vec<usize>, (f64, CMatrix)>;

impl CqState {
    pub fn new(registers: Vec<usize>, quantum_dims: Vec<usize>, blocks: Vec<CqBlock>) -> Result<Self> {
        let dim: usize = quantum_dims.iter().product();
        let mut total = 0.0;
        for b in &blocks {
            if b.label.len() != registers.len() || b.label.iter().zip(&registers).any(|(&x, &r)| x >= r) {
                return Err(Error::invalid(format!("block label {:?} outside registers {registers:?}", b.label)));
            }
            if b.state.dim() != dim {
                return Err(Error::invalid("block state dimension mismatch"));
            }
            if !(b.prob >= 0.0) {
                return Err(Error::invalid("block probability must be nonnegative"));
            }
            total += b.prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("block probabilities sum to {total}")));
        }
        Ok(CqState {
            registers,
            quantum_dims,
            blocks,
        })
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    pub fn quantum_dims(&self) -> &[usize] {
        &self.quantum_dims
    }

    pub fn blocks(&self) -> &[CqBlock] {
        &self.blocks
    }

    /// `Σ_c p(c) tr ρ_c`.
    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.prob * b.state.trace().re).sum()
    }

    /// Traces out every quantum factor not in `keep`.
    pub fn reduce_quantum(&self, keep: &[usize]) -> Result<CqState> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(CqBlock {
                    label: b.label.clone(),
                    prob: b.prob,
                    state: b.state.partial_trace(&self.quantum_dims, keep)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        Ok(CqState {
            registers: self.registers.clone(),
            quantum_dims: keep_sorted.iter().map(|&k| self.quantum_dims[k]).collect(),
            blocks,
        })
    }

    fn check_registers(&self, regs: &[usize]) -> Result<()> {
        if let Some(&r) = regs.iter().find(|&&r| r >= self.registers.len()) {
            return Err(Error::invalid(format!("register {r} does not exist")));
        }
        Ok(())
    }

    /// Marginal over `regs`: label -> (probability, normalized state).
    fn group(&self, regs: &[usize]) -> Grouped {
        let mut map: Grouped = BTreeMap::new();
        let dim = self.blocks.first().map_or(1, |b| b.state.dim());
        for b in self.blocks.iter().filter(|b| b.prob > 0.0) {
            let key: Vec<usize> = regs.iter().map(|&r| b.label[r]).collect();
            let entry = map.entry(key).or_insert_with(|| (0.0, CMatrix::zeros(dim)));
            entry.0 += b.prob;
            entry.1.add_scaled(b.prob, &b.state);
        }
        for (p, m) in map.values_mut() {
            *m = m.scale(1.0 / *p);
        }
        map
    }

    pub fn register_entropy(&self, regs: &[usize]) -> Result<f64> {
        self.check_registers(regs)?;
        let probs: Vec<f64> = self.group(regs).values().map(|(p, _)| *p).collect();
        Ok(shannon_entropy(&probs))
    }

    /// Entropy of the quantum part averaged over all labels.
    pub fn quantum_entropy(&self) -> Result<f64> {
        let (_, m) = self.group(&[]).into_values().next().unwrap_or((1.0, CMatrix::zeros(0)));
        entropy_bits(&m)
    }

    /// `S(C, Q) = H(C) + Σ_c p(c) S(ρ_c)` for the registers `regs`.
    pub fn joint_entropy(&self, regs: &[usize]) -> Result<f64> {
        self.check_registers(regs)?;
        let g = self.group(regs);
        let probs: Vec<f64> = g.values().map(|(p, _)| *p).collect();
        let mut s = shannon_entropy(&probs);
        for (p, m) in g.values() {
            s += p * entropy_bits(m)?;
        }
        Ok(s)
    }

    /// `H(C | Q) = S(C, Q) - S(Q)`.
    pub fn conditional_entropy_given_quantum(&self, regs: &[usize]) -> Result<f64> {
        Ok(self.joint_entropy(regs)? - self.quantum_entropy()?)
    }

    /// `I(Q; A | C) = Σ_c p(c) [S(ρ_c) - Σ_a p(a|c) S(ρ_{a,c})]`.
    pub fn mutual_information(&self, classical: &[usize], conditioning: &[usize]) -> Result<f64> {
        self.check_registers(classical)?;
        self.check_registers(conditioning)?;
        if classical.iter().any(|r| conditioning.contains(r)) {
            return Err(Error::invalid("classical and conditioning registers overlap"));
        }
        let mut both = conditioning.to_vec();
        both.extend_from_slice(classical);
        let fine = self.group(&both);
        let coarse = self.group(conditioning);
        let nc = conditioning.len();
        let mut inner: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (label, (p, m)) in &fine {
            *inner.entry(label[..nc].to_vec()).or_insert(0.0) += p * entropy_bits(m)?;
        }
        let mut total = 0.0;
        for (label, (p, m)) in &coarse {
            total += p * entropy_bits(m)? - inner.get(label).copied().unwrap_or(0.0);
        }
        Ok(total)
    }
}

pub fn cq_mutual_information(state: &CqState, classical: &[usize], conditioning: &[usize]) -> Result<f64> {
    state.mutual_information(classical, conditioning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block(label: Vec<usize>, prob: f64, state: CMatrix) -> CqBlock {
        CqBlock { label, prob, state }
    }

    #[test]
    fn independent_register_gives_zero() {
        let rho = CMatrix::diag(&[0.3, 0.7]);
        let s = CqState::new(
            vec![2],
            vec![2],
            vec![block(vec![0], 0.4, rho.clone()), block(vec![1], 0.6, rho)],
        )
        .unwrap();
        assert!(s.mutual_information(&[0], &[]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pure_states_one_bit() {
        let s = CqState::new(
            vec![2],
            vec![2],
            vec![
                block(vec![0], 0.5, CMatrix::basis_projector(2, 0)),
                block(vec![1], 0.5, CMatrix::basis_projector(2, 1)),
            ],
        )
        .unwrap();
        assert!((s.mutual_information(&[0], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.conditional_entropy_given_quantum(&[0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn overlapping_subsets_rejected() {
        let s = CqState::new(vec![2, 2], vec![1], vec![block(vec![0, 0], 1.0, CMatrix::identity(1))]).unwrap();
        assert!(matches!(s.mutual_information(&[0], &[0]), Err(Error::InvalidArgument(_))));
        assert!(s.mutual_information(&[2], &[]).is_err());
    }

    #[test]
    fn zero_probability_block_is_ignored() {
        let s = CqState::new(
            vec![2],
            vec![2],
            vec![block(vec![0], 1.0, CMatrix::diag(&[0.5, 0.5])), block(vec![1], 0.0, CMatrix::zeros(2))],
        )
        .unwrap();
        assert!(s.mutual_information(&[0], &[]).unwrap().abs() < 1e-12);
        assert!((s.quantum_entropy().unwrap() - 1.0).abs() < 1e-12);
    }

    /// Classical mutual information I(Y; A | C) from a joint pmf over (a, c, y).
    fn classical_cmi(joint: &[Vec<Vec<f64>>]) -> f64 {
        let na = joint.len();
        let nc = joint[0].len();
        let ny = joint[0][0].len();
        let mut total = 0.0;
        for a in 0..na {
            for c in 0..nc {
                for y in 0..ny {
                    let p = joint[a][c][y];
                    if p <= 0.0 {
                        continue;
                    }
                    let pc: f64 = (0..na).flat_map(|a2| joint[a2][c].iter()).sum();
                    let pac: f64 = joint[a][c].iter().sum();
                    let pcy: f64 = (0..na).map(|a2| joint[a2][c][y]).sum();
                    total += p * (p * pc / (pac * pcy)).log2();
                }
            }
        }
        total
    }

    proptest! {
        #[test]
        fn diagonal_states_match_classical_oracle(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (na, nc, ny) = (2usize, 3usize, 3usize);
            let mut joint = vec![vec![vec![0.0; ny]; nc]; na];
            let mut blocks = Vec::new();
            let weights: Vec<f64> = (0..na * nc).map(|_| rng.gen_range(0.05..1.0)).collect();
            let wsum: f64 = weights.iter().sum();
            for a in 0..na {
                for c in 0..nc {
                    let p = weights[a * nc + c] / wsum;
                    let cond: Vec<f64> = (0..ny).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let cs: f64 = cond.iter().sum();
                    let cond: Vec<f64> = cond.iter().map(|x| x / cs).collect();
                    for y in 0..ny {
                        joint[a][c][y] = p * cond[y];
                    }
                    blocks.push(block(vec![a, c], p, CMatrix::diag(&cond)));
                }
            }
            let s = CqState::new(vec![na, nc], vec![ny], blocks).unwrap();
            let q = s.mutual_information(&[0], &[1]).unwrap();
            prop_assert!(q >= -1e-9);
            prop_assert!((q - classical_cmi(&joint)).abs() < 1e-9);
        }

        #[test]
        fn mutual_information_nonnegative_on_random_qubits(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut blocks = Vec::new();
            for a in 0..3 {
                let g = CMatrix::from_fn(2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let p = g.matmul(&g.adjoint());
                let tr = p.trace().re;
                blocks.push(block(vec![a], 1.0 / 3.0, p.scale(1.0 / tr)));
            }
            let s = CqState::new(vec![3], vec![2], blocks).unwrap();
            let i = s.mutual_information(&[0], &[]).unwrap();
            prop_assert!(i >= -1e-9 && i <= 1.0 + 1e-9);
            let h = s.conditional_entropy_given_quantum(&[0]).unwrap();
            prop_assert!((h - (3f64.log2() - i)).abs() < 1e-9);
        }
    }
}
