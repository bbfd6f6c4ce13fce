use super::projector::{conditional_from_spectra, spectrum, typical_projector, DEFAULT_DIM_BUDGET};
use super::{Povm, PovmLabel};
use crate::channel::{require_3to1, CqChannel, InputDistribution};
use crate::codes::{coset_sum, EncoderState, NestedCosetCode};
use crate::error::{check_budget, pow_saturating, Error, Result};
use crate::linalg::{CMatrix, DensityOperator};
use crate::typicality::Typicality;

const MAX_ELEMENTS: u128 = 1 << 12;

/// Inputs of the receiver-1 joint decoder: user 1's codebook, the two
/// interferers' encoders (sharing generators) and the input distribution.
#[derive(Clone, Copy, Debug)]
pub struct Rx1Setup<'a> {
    pub channel: &'a CqChannel,
    pub dist: &'a InputDistribution,
    pub codebook: &'a [Vec<usize>],
    pub encoder2: &'a EncoderState,
    pub encoder3: &'a EncoderState,
    pub rule: Typicality,
}

/// Square-root POVM over `(m_1, a, l)` on `H_{Y1}^{⊗n}`.
#[derive(Clone, Debug)]
pub struct Rx1Decoder {
    sum_code: NestedCosetCode,
    povm: Povm,
    n: usize,
}

/// Letter states on `Y1`: `ρ_{x1,u}` (index `x1·q + u`), `ρ_{x1}` and `ρ`.
struct LetterStates {
    pair: Vec<CMatrix>,
    pair_pmf: Vec<f64>,
    single: Vec<CMatrix>,
    average: DensityOperator,
}

fn letter_states(channel: &CqChannel, dist: &InputDistribution) -> Result<LetterStates> {
    let y1 = channel.reduced_states(&[0])?;
    let [a1, _, _] = channel.alphabets();
    let q = dist.field().size();
    let d = channel.output_dims()[0];
    let (p_vx2, p_vx3) = (dist.p_vx(2), dist.p_vx(3));
    let p_u = dist.p_u();
    let mut pair = vec![CMatrix::zeros(d); a1 * q];
    for x1 in 0..a1 {
        for v2 in 0..q {
            for v3 in 0..q {
                let u = (v2 + v3) % q;
                for (x2, &p2) in p_vx2[v2].iter().enumerate() {
                    for (x3, &p3) in p_vx3[v3].iter().enumerate() {
                        let w = p2 * p3;
                        if w > 0.0 {
                            pair[x1 * q + u].add_scaled(w, &y1[channel.input_index([x1, x2, x3])]);
                        }
                    }
                }
            }
        }
        for u in 0..q {
            if p_u[u] > 0.0 {
                pair[x1 * q + u] = pair[x1 * q + u].scale(1.0 / p_u[u]);
            } else {
                pair[x1 * q + u] = CMatrix::identity(d).scale(1.0 / d as f64);
            }
        }
    }
    let single: Vec<CMatrix> = (0..a1)
        .map(|x1| {
            let mut s = CMatrix::zeros(d);
            for u in 0..q {
                s.add_scaled(p_u[u], &pair[x1 * q + u]);
            }
            s
        })
        .collect();
    let mut avg = CMatrix::zeros(d);
    for (x1, s) in single.iter().enumerate() {
        avg.add_scaled(dist.p_x1()[x1], s);
    }
    let pair_pmf = (0..a1 * q).map(|i| dist.p_x1()[i / q] * p_u[i % q]).collect();
    Ok(LetterStates {
        pair,
        pair_pmf,
        single,
        average: DensityOperator::new(avg.hermitian_part())?,
    })
}

fn check_setup(s: &Rx1Setup) -> Result<usize> {
    require_3to1(s.channel)?;
    s.dist.check_against(s.channel)?;
    let (c2, c3) = (s.encoder2.code(), s.encoder3.code());
    if !c2.same_generators(c3) || c2.n() != c3.n() {
        return Err(Error::invalid("interferer codes must share generators"));
    }
    if c2.field() != s.dist.field() {
        return Err(Error::invalid("code field differs from the distribution's field"));
    }
    let n = c2.n();
    let a1 = s.channel.alphabets()[0];
    if s.codebook.is_empty() {
        return Err(Error::invalid("user-1 codebook is empty"));
    }
    for w in s.codebook {
        if w.len() != n || w.iter().any(|&x| x >= a1) {
            return Err(Error::invalid("user-1 codeword has wrong length or letter"));
        }
    }
    let elements = (s.codebook.len() as u128)
        .saturating_mul(c2.inner_count())
        .saturating_mul(c2.message_count());
    check_budget("receiver-1 POVM elements", elements, MAX_ELEMENTS)?;
    Ok(n)
}

/// Builds `γ^{a,l}_{m1} = π_ρ π_{m1} π^{a,l}_{m1} π_{m1} π_ρ` over the sum
/// code with dither `b_2 ⊕ b_3`, then square-root normalizes.
pub fn build_rx1_povm(setup: &Rx1Setup) -> Result<Rx1Decoder> {
    let n = check_setup(setup)?;
    let sum_code = coset_sum(setup.encoder2.code(), setup.encoder3.code())?;
    let q = sum_code.field().size();
    let ls = letter_states(setup.channel, setup.dist)?;
    let rule = setup.rule;
    let pi_rho = typical_projector(&ls.average, n, rule)?;
    let single = ls.single.iter().map(spectrum).collect::<Result<Vec<_>>>()?;
    let pair = ls.pair.iter().map(spectrum).collect::<Result<Vec<_>>>()?;
    let dim = pi_rho.dim();
    let mut groups = Vec::new();
    for (m1, x1) in setup.codebook.iter().enumerate() {
        let pi_m1 = conditional_from_spectra(&single, x1, rule, Some(setup.dist.p_x1()), DEFAULT_DIM_BUDGET)?;
        let outer = pi_rho.matrix().matmul(pi_m1.matrix());
        for li in 0..sum_code.message_count() as u64 {
            let l = sum_code.message(li);
            for ai in 0..sum_code.inner_count() as u64 {
                let u = sum_code.codeword_unchecked(&sum_code.inner_index(ai), &l);
                let seq: Vec<usize> = x1.iter().zip(&u).map(|(&x, &u)| x * q + u as usize).collect();
                let pi_al = conditional_from_spectra(&pair, &seq, rule, Some(&ls.pair_pmf), DEFAULT_DIM_BUDGET)?;
                let g = if pi_m1.rank == 0 || pi_al.rank == 0 {
                    CMatrix::zeros(dim)
                } else {
                    outer.matmul(pi_al.matrix()).matmul(&outer.adjoint()).hermitian_part()
                };
                groups.push((PovmLabel::Joint { m1: m1 as u64, a: ai, l: li }, vec![g]));
            }
        }
    }
    Ok(Rx1Decoder {
        povm: Povm::square_root(dim, groups)?,
        sum_code,
        n,
    })
}

impl Rx1Decoder {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn sum_code(&self) -> &NestedCosetCode {
        &self.sum_code
    }

    /// Probability of decoding `(m_1, α_2 ⊕ α_3, m_2 ⊕ m_3)` correctly,
    /// averaged over uniform `(m_1, m_2, m_3)`. The `Y1` state of letter `t`
    /// averages `ρ_{x1,x2,x3}` over `p(x_2|v_2) p(x_3|v_3)`. A failed
    /// interferer encoding counts as an error.
    pub fn success_probability(&self, setup: &Rx1Setup) -> Result<f64> {
        let n = check_setup(setup)?;
        if n != self.n || coset_sum(setup.encoder2.code(), setup.encoder3.code())? != self.sum_code {
            return Err(Error::invalid("setup does not match this decoder"));
        }
        let ch = setup.channel;
        let y1 = ch.reduced_states(&[0])?;
        let d = ch.output_dims()[0];
        let field = self.sum_code.field();
        let (p_vx2, p_vx3) = (setup.dist.p_vx(2), setup.dist.p_vx(3));
        let letter = |x1: usize, v2: usize, v3: usize| -> CMatrix {
            let mut s = CMatrix::zeros(d);
            let (r2, r3) = (&p_vx2[v2], &p_vx3[v3]);
            let t2: f64 = r2.iter().sum();
            let t3: f64 = r3.iter().sum();
            for (x2, &p2) in r2.iter().enumerate() {
                for (x3, &p3) in r3.iter().enumerate() {
                    if p2 * p3 > 0.0 {
                        s.add_scaled(p2 * p3 / (t2 * t3), &y1[ch.input_index([x1, x2, x3])]);
                    }
                }
            }
            s
        };
        let (e2, e3) = (setup.encoder2, setup.encoder3);
        let msgs = self.sum_code.message_count() as u64;
        let mut total = 0.0;
        for (m1, x1) in setup.codebook.iter().enumerate() {
            for m2 in 0..msgs {
                for m3 in 0..msgs {
                    if e2.failed(m2) || e3.failed(m3) {
                        continue;
                    }
                    let (v2, v3) = (e2.encode(m2), e3.encode(m3));
                    let mut rho = CMatrix::identity(1);
                    for t in 0..n {
                        rho = rho.kron(&letter(x1[t], v2[t] as usize, v3[t] as usize));
                    }
                    let a = field.add_vec(&e2.chosen(m2), &e3.chosen(m3));
                    let l = field.add_vec(&e2.code().message(m2), &e3.code().message(m3));
                    let label = PovmLabel::Joint {
                        m1: m1 as u64,
                        a: field.index_of(&a),
                        l: field.index_of(&l),
                    };
                    total += self.povm.probability(label, &rho);
                }
            }
        }
        let count = setup.codebook.len() as f64 * pow_saturating(msgs as u128, 2) as f64;
        Ok(total / count)
    }
}
