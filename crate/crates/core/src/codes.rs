//! Nested coset codes and typical-codeword selection.
//!
//! A nested coset code maps an inner index `a ∈ F_q^k` and a message
//! `m ∈ F_q^l` to `v(a, m) = a·g_I + m·g_O/I + b`. The codewords sharing a
//! message form the coset of message `m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::field::{FqMatrix, PrimeField};
use crate::typicality::{check_pmf, Typicality};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NestedCosetCode {
    field: PrimeField,
    n: usize,
    g_inner: FqMatrix,
    g_outer: FqMatrix,
    dither: Vec<u32>,
}

impl NestedCosetCode {
    pub fn new(
        field: PrimeField,
        g_inner: FqMatrix,
        g_outer: FqMatrix,
        dither: Vec<u32>,
    ) -> Result<Self> {
        let n = dither.len();
        if g_inner.cols() != n || g_outer.cols() != n {
            return Err(Error::invalid(format!(
                "generator widths {}/{} differ from dither length {n}",
                g_inner.cols(),
                g_outer.cols()
            )));
        }
        field.check_vec(&dither, "dither")?;
        for g in [&g_inner, &g_outer] {
            for i in 0..g.rows() {
                field.check_vec(g.row(i), "generator")?;
            }
        }
        Ok(NestedCosetCode {
            field,
            n,
            g_inner,
            g_outer,
            dither,
        })
    }

    /// Convenience constructor from row lists.
    pub fn from_rows(
        field: PrimeField,
        n: usize,
        g_inner: &[Vec<u32>],
        g_outer: &[Vec<u32>],
        dither: Vec<u32>,
    ) -> Result<Self> {
        let gi = FqMatrix::from_rows(field, g_inner, n)?;
        let go = FqMatrix::from_rows(field, g_outer, n)?;
        Self::new(field, gi, go, dither)
    }

    /// Uniformly random generators and dither.
    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        n: usize,
        k: usize,
        l: usize,
        rng: &mut R,
    ) -> Self {
        let g_inner = FqMatrix::random(field, k, n, rng);
        let g_outer = FqMatrix::random(field, l, n, rng);
        let dither = field.random_vec(n, rng);
        NestedCosetCode {
            field,
            n,
            g_inner,
            g_outer,
            dither,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.g_inner.rows()
    }

    pub fn l(&self) -> usize {
        self.g_outer.rows()
    }

    pub fn g_inner(&self) -> &FqMatrix {
        &self.g_inner
    }

    pub fn g_outer(&self) -> &FqMatrix {
        &self.g_outer
    }

    pub fn dither(&self) -> &[u32] {
        &self.dither
    }

    pub fn inner_count(&self) -> u128 {
        self.field.space_size(self.k())
    }

    pub fn message_count(&self) -> u128 {
        self.field.space_size(self.l())
    }

    pub fn with_dither(&self, dither: Vec<u32>) -> Result<Self> {
        Self::new(self.field, self.g_inner.clone(), self.g_outer.clone(), dither)
    }

    pub fn same_generators(&self, other: &Self) -> bool {
        self.field == other.field && self.g_inner == other.g_inner && self.g_outer == other.g_outer
    }

    pub fn codeword(&self, a: &[u32], m: &[u32]) -> Result<Vec<u32>> {
        if a.len() != self.k() || m.len() != self.l() {
            return Err(Error::invalid(format!(
                "index lengths ({}, {}) do not match (k, l) = ({}, {})",
                a.len(),
                m.len(),
                self.k(),
                self.l()
            )));
        }
        self.field.check_vec(a, "inner index")?;
        self.field.check_vec(m, "message")?;
        Ok(self.codeword_unchecked(a, m))
    }

    pub(crate) fn codeword_unchecked(&self, a: &[u32], m: &[u32]) -> Vec<u32> {
        let mut v = self.dither.clone();
        self.g_inner.accumulate_combination(self.field, a, &mut v);
        self.g_outer.accumulate_combination(self.field, m, &mut v);
        v
    }

    pub fn inner_index(&self, idx: u64) -> Vec<u32> {
        self.field.vector_from_index(idx, self.k())
    }

    pub fn message(&self, idx: u64) -> Vec<u32> {
        self.field.vector_from_index(idx, self.l())
    }

    /// All codewords, indexed by `(message index, inner index)`.
    pub fn enumerate(&self, budget: u128) -> Result<Vec<Vec<Vec<u32>>>> {
        let total = self.inner_count().saturating_mul(self.message_count());
        check_budget("coset enumeration", total, budget)?;
        Ok((0..self.message_count() as u64)
            .map(|mi| {
                let m = self.message(mi);
                (0..self.inner_count() as u64)
                    .map(|ai| self.codeword_unchecked(&self.inner_index(ai), &m))
                    .collect()
            })
            .collect())
    }

    /// Sorted, deduplicated set of codewords.
    pub fn range(&self, budget: u128) -> Result<Vec<Vec<u32>>> {
        let mut words: Vec<Vec<u32>> = self.enumerate(budget)?.into_iter().flatten().collect();
        words.sort();
        words.dedup();
        Ok(words)
    }

    /// Indices `a` whose codeword in the coset of `m` is typical.
    pub fn typical_members(&self, m: &[u32], pmf: &[f64], rule: &Typicality) -> Vec<u64> {
        (0..self.inner_count() as u64)
            .filter(|&ai| {
                let v = self.codeword_unchecked(&self.inner_index(ai), m);
                rule.is_typical_fq(&v, pmf)
            })
            .collect()
    }
}

/// The code with the shared generators and dither `b_A + b_B`. Its codeword
/// at `(a + a', m + m')` is the sum of the two input codewords.
pub fn coset_sum(a: &NestedCosetCode, b: &NestedCosetCode) -> Result<NestedCosetCode> {
    if !a.same_generators(b) || a.n != b.n {
        return Err(Error::invalid(
            "coset sum needs identical field and generator matrices",
        ));
    }
    let dither = a.field.add_vec(&a.dither, &b.dither);
    a.with_dither(dither)
}

/// Per-message typical-codeword choice made by an encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    code: NestedCosetCode,
    rule: Typicality,
    pmf: Vec<f64>,
    chosen: Vec<u64>,
    theta: Vec<u64>,
}

impl EncoderState {
    pub fn code(&self) -> &NestedCosetCode {
        &self.code
    }

    pub fn rule(&self) -> Typicality {
        self.rule
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `θ(m)`: number of typical members in the coset of message index `mi`.
    pub fn theta(&self, mi: u64) -> u64 {
        self.theta[mi as usize]
    }

    /// Chosen inner index `a_m`; the all-zero index when `θ(m) = 0`.
    pub fn chosen(&self, mi: u64) -> Vec<u32> {
        self.code.inner_index(self.chosen[mi as usize])
    }

    pub fn chosen_index(&self, mi: u64) -> u64 {
        self.chosen[mi as usize]
    }

    pub fn failed(&self, mi: u64) -> bool {
        self.theta[mi as usize] == 0
    }

    pub fn encode(&self, mi: u64) -> Vec<u32> {
        self.code
            .codeword_unchecked(&self.chosen(mi), &self.code.message(mi))
    }

    pub fn thetas(&self) -> &[u64] {
        &self.theta
    }
}

/// Scans every coset, counts typical members and picks one uniformly.
pub fn select_typical<R: Rng + ?Sized>(
    code: &NestedCosetCode,
    pmf: &[f64],
    rule: Typicality,
    rng: &mut R,
) -> Result<EncoderState> {
    select_typical_with_budget(code, pmf, rule, rng, DEFAULT_ENUMERATION_BUDGET)
}

pub fn select_typical_with_budget<R: Rng + ?Sized>(
    code: &NestedCosetCode,
    pmf: &[f64],
    rule: Typicality,
    rng: &mut R,
    budget: u128,
) -> Result<EncoderState> {
    check_pmf(pmf, "target pmf")?;
    if pmf.len() != code.field.size() {
        return Err(Error::invalid(format!(
            "pmf has {} letters, field has {}",
            pmf.len(),
            code.field.q()
        )));
    }
    let total = code.inner_count().saturating_mul(code.message_count());
    check_budget("coset enumeration", total, budget)?;
    let mut chosen = Vec::with_capacity(code.message_count() as usize);
    let mut theta = Vec::with_capacity(code.message_count() as usize);
    for mi in 0..code.message_count() as u64 {
        let members = code.typical_members(&code.message(mi), pmf, &rule);
        theta.push(members.len() as u64);
        chosen.push(if members.is_empty() {
            0
        } else {
            members[rng.gen_range(0..members.len())]
        });
    }
    Ok(EncoderState {
        code: code.clone(),
        rule,
        pmf: pmf.to_vec(),
        chosen,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> PrimeField {
        PrimeField::binary()
    }

    #[test]
    fn zero_inputs_return_dither() {
        let code = NestedCosetCode::from_rows(f2(), 3, &[vec![1, 0, 1]], &[vec![0, 1, 1]], vec![1, 0, 1])
            .unwrap();
        assert_eq!(code.codeword(&[0], &[0]).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn codeword_binary_hand_example() {
        let code = NestedCosetCode::from_rows(f2(), 2, &[vec![1, 0]], &[vec![0, 1]], vec![0, 0]).unwrap();
        assert_eq!(code.codeword(&[1], &[1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn codeword_ternary_hand_example() {
        let f3 = PrimeField::new(3).unwrap();
        let code = NestedCosetCode::from_rows(f3, 2, &[vec![1, 1]], &[vec![1, 2]], vec![1, 0]).unwrap();
        assert_eq!(code.codeword(&[2], &[1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn codeword_dimension_mismatch() {
        let code = NestedCosetCode::from_rows(f2(), 2, &[vec![1, 0]], &[vec![0, 1]], vec![0, 0]).unwrap();
        assert!(matches!(code.codeword(&[1, 0], &[1]), Err(Error::InvalidArgument(_))));
        assert!(code.codeword(&[1], &[]).is_err());
        assert!(code.codeword(&[2], &[0]).is_err());
    }

    #[test]
    fn coset_sum_adds_dithers() {
        let a = NestedCosetCode::from_rows(f2(), 2, &[vec![1, 0]], &[vec![0, 1]], vec![0, 0]).unwrap();
        let b = a.with_dither(vec![1, 1]).unwrap();
        assert_eq!(coset_sum(&a, &b).unwrap().dither(), &[1, 1]);
        assert_eq!(coset_sum(&a, &a).unwrap().dither(), &[0, 0]);
    }

    #[test]
    fn coset_sum_rejects_different_generators() {
        let a = NestedCosetCode::from_rows(f2(), 2, &[vec![1, 0]], &[vec![0, 1]], vec![0, 0]).unwrap();
        let b = NestedCosetCode::from_rows(f2(), 2, &[vec![1, 1]], &[vec![0, 1]], vec![0, 0]).unwrap();
        assert!(coset_sum(&a, &b).is_err());
    }

    #[test]
    fn coset_sum_range_is_pairwise_sum_set_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = NestedCosetCode::random(f2(), 3, 1, 1, &mut rng);
            let b = a.with_dither(f2().random_vec(3, &mut rng)).unwrap();
            let s = coset_sum(&a, &b).unwrap();
            let mut sums = Vec::new();
            for wa in a.enumerate(1 << 10).unwrap().iter().flatten() {
                for wb in b.enumerate(1 << 10).unwrap().iter().flatten() {
                    sums.push(f2().add_vec(wa, wb));
                }
            }
            sums.sort();
            sums.dedup();
            assert_eq!(sums, s.range(1 << 10).unwrap());
        }
    }

    fn brute_force_theta(code: &NestedCosetCode, m: &[u32], ones: usize) -> u64 {
        let mut count = 0;
        for ai in 0..code.inner_count() as u64 {
            let a = code.field().vector_from_index(ai, code.k());
            let mut v = code.dither().to_vec();
            for (i, &c) in a.iter().enumerate() {
                for t in 0..code.n() {
                    v[t] = (v[t] + c * code.g_inner().row(i)[t]) % 2;
                }
            }
            for (i, &c) in m.iter().enumerate() {
                for t in 0..code.n() {
                    v[t] = (v[t] + c * code.g_outer().row(i)[t]) % 2;
                }
            }
            if v.iter().filter(|&&x| x == 1).count() == ones {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn select_typical_all_typical_regime() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = NestedCosetCode::random(f2(), 4, 2, 1, &mut rng);
        let rule = Typicality::strong(1.5).unwrap();
        let enc = select_typical(&code, &[0.5, 0.5], rule, &mut rng).unwrap();
        assert!(enc.thetas().iter().all(|&t| t == 4));
    }

    #[test]
    fn select_typical_counts_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rule = Typicality::strong(0.4).unwrap();
        for _ in 0..20 {
            let code = NestedCosetCode::random(f2(), 4, 3, 1, &mut rng);
            let enc = select_typical(&code, &[0.5, 0.5], rule, &mut rng).unwrap();
            for mi in 0..2u64 {
                let m = code.message(mi);
                assert_eq!(enc.theta(mi), brute_force_theta(&code, &m, 2));
                if enc.theta(mi) > 0 {
                    let w = enc.encode(mi);
                    assert_eq!(w.iter().filter(|&&x| x == 1).count(), 2);
                }
            }
        }
    }

    #[test]
    fn select_typical_empty_typical_set_uses_sentinel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = NestedCosetCode::random(f2(), 4, 2, 1, &mut rng);
        let rule = Typicality::strong(1e-6).unwrap();
        let enc = select_typical(&code, &[0.7, 0.3], rule, &mut rng).unwrap();
        for mi in 0..2 {
            assert_eq!(enc.theta(mi), 0);
            assert!(enc.failed(mi));
            assert_eq!(enc.chosen(mi), vec![0, 0]);
        }
    }

    #[test]
    fn select_typical_budget_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = NestedCosetCode::random(f2(), 8, 4, 4, &mut rng);
        let rule = Typicality::strong(0.5).unwrap();
        let err = select_typical_with_budget(&code, &[0.5, 0.5], rule, &mut rng, 100).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { required: 256, .. }));
    }

    #[test]
    fn select_typical_rejects_bad_pmf() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = NestedCosetCode::random(f2(), 4, 1, 1, &mut rng);
        let rule = Typicality::strong(0.5).unwrap();
        assert!(select_typical(&code, &[0.5, 0.6], rule, &mut rng).is_err());
        assert!(select_typical(&code, &[1.0], rule, &mut rng).is_err());
    }

    fn arb_code() -> impl Strategy<Value = NestedCosetCode> {
        (prop::sample::select(vec![2u32, 3]), 1usize..=4, 0usize..=2, 0usize..=2, any::<u64>()).prop_map(
            |(q, n, k, l, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                NestedCosetCode::random(PrimeField::new(q).unwrap(), n, k, l, &mut rng)
            },
        )
    }

    proptest! {
        #[test]
        fn sum_of_codewords_is_codeword_of_sum(code in arb_code(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = code.field();
            let other = code.with_dither(f.random_vec(code.n(), &mut rng)).unwrap();
            let sum = coset_sum(&code, &other).unwrap();
            let a = f.random_vec(code.k(), &mut rng);
            let a2 = f.random_vec(code.k(), &mut rng);
            let m = f.random_vec(code.l(), &mut rng);
            let m2 = f.random_vec(code.l(), &mut rng);
            let lhs = f.add_vec(&code.codeword(&a, &m).unwrap(), &other.codeword(&a2, &m2).unwrap());
            let rhs = sum.codeword(&f.add_vec(&a, &a2), &f.add_vec(&m, &m2)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn dither_shift_is_translation(code in arb_code(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = code.field();
            let shift = f.random_vec(code.n(), &mut rng);
            let shifted = code.with_dither(f.add_vec(code.dither(), &shift)).unwrap();
            let a = f.random_vec(code.k(), &mut rng);
            let m = f.random_vec(code.l(), &mut rng);
            prop_assert_eq!(
                shifted.codeword(&a, &m).unwrap(),
                f.add_vec(&code.codeword(&a, &m).unwrap(), &shift)
            );
        }

        #[test]
        fn theta_is_seed_independent(code in arb_code(), s1 in any::<u64>(), s2 in any::<u64>()) {
            let q = code.field().size();
            let pmf: Vec<f64> = (0..q).map(|_| 1.0 / q as f64).collect();
            let rule = Typicality::strong(0.6).unwrap();
            let e1 = select_typical(&code, &pmf, rule, &mut ChaCha8Rng::seed_from_u64(s1)).unwrap();
            let e2 = select_typical(&code, &pmf, rule, &mut ChaCha8Rng::seed_from_u64(s1)).unwrap();
            let e3 = select_typical(&code, &pmf, rule, &mut ChaCha8Rng::seed_from_u64(s2)).unwrap();
            prop_assert_eq!(&e1, &e2);
            prop_assert_eq!(e1.thetas(), e3.thetas());
            for mi in 0..code.message_count() as u64 {
                if !e3.failed(mi) {
                    prop_assert!(rule.is_typical_fq(&e3.encode(mi), &pmf));
                }
            }
        }
    }
}
