use super::{CqBlock, CqChannel, CqState, InputDistribution, SplitInputDistribution};
use crate::error::Result;
use crate::linalg::CMatrix;

fn block(label: Vec<usize>, prob: f64, acc: CMatrix, norm: f64) -> CqBlock {
    let state = if norm > 0.0 {
        acc.scale(1.0 / norm)
    } else {
        CMatrix::zeros(acc.dim())
    };
    CqBlock { label, prob, state }
}

/// State on registers `(X1, U)` and output `Y1`, with `U = V2 ⊕ V3` and
/// `ρ_{x1,u} = Σ p(v2 x2 v3 x3 | u) tr_{Y2Y3} ρ_x`.
pub fn sigma1(channel: &CqChannel, dist: &InputDistribution) -> Result<CqState> {
    dist.check_against(channel)?;
    let f = dist.field();
    let q = f.size();
    let [a1, a2, a3] = channel.alphabets();
    let d1 = channel.output_dims()[0];
    let y1 = channel.reduced_states(&[0])?;
    let p_u = dist.p_u();
    let (t2, t3) = (dist.p_vx(2), dist.p_vx(3));
    let mut blocks = Vec::with_capacity(a1 * q);
    for x1 in 0..a1 {
        for u in 0..q {
            let mut acc = CMatrix::zeros(d1);
            for v2 in 0..q {
                let v3 = (u + q - v2) % q;
                for x2 in 0..a2 {
                    for x3 in 0..a3 {
                        let w = t2[v2][x2] * t3[v3][x3];
                        if w > 0.0 {
                            acc.add_scaled(w, &y1[channel.input_index([x1, x2, x3])]);
                        }
                    }
                }
            }
            blocks.push(block(vec![x1, u], dist.p_x1()[x1] * p_u[u], acc, p_u[u]));
        }
    }
    CqState::new(vec![a1, q], vec![d1], blocks)
}

/// State on registers `(V2, V3)` and output `Y2 ⊗ Y3`, summing over all inputs.
pub fn sigma2(channel: &CqChannel, dist: &InputDistribution) -> Result<CqState> {
    dist.check_against(channel)?;
    let q = dist.field().size();
    let [a1, a2, a3] = channel.alphabets();
    let [_, d2, d3] = channel.output_dims();
    let y23 = channel.reduced_states(&[1, 2])?;
    let (t2, t3) = (dist.p_vx(2), dist.p_vx(3));
    let (pv2, pv3) = (dist.p_v(2), dist.p_v(3));
    let mut blocks = Vec::with_capacity(q * q);
    for v2 in 0..q {
        for v3 in 0..q {
            let mut acc = CMatrix::zeros(d2 * d3);
            for x1 in 0..a1 {
                for x2 in 0..a2 {
                    for x3 in 0..a3 {
                        let w = dist.p_x1()[x1] * t2[v2][x2] * t3[v3][x3];
                        if w > 0.0 {
                            acc.add_scaled(w, &y23[channel.input_index([x1, x2, x3])]);
                        }
                    }
                }
            }
            let p = pv2[v2] * pv3[v3];
            blocks.push(block(vec![v2, v3], p, acc, p));
        }
    }
    CqState::new(vec![q, q], vec![d2, d3], blocks)
}

/// State on registers `(X1, W)` and output `Y1` with `W = U2 ⊕ U3`.
pub fn split_sigma1(channel: &CqChannel, dist: &SplitInputDistribution) -> Result<CqState> {
    dist.check_against(channel)?;
    let q = dist.field().size();
    let [a1, a2, a3] = channel.alphabets();
    let d1 = channel.output_dims()[0];
    let y1 = channel.reduced_states(&[0])?;
    let p_w = dist.p_w();
    let (t2, t3) = (dist.p_ux(2), dist.p_ux(3));
    let mut blocks = Vec::with_capacity(a1 * q);
    for x1 in 0..a1 {
        for w in 0..q {
            let mut acc = CMatrix::zeros(d1);
            for u2 in 0..q {
                let u3 = (w + q - u2) % q;
                for x2 in 0..a2 {
                    for x3 in 0..a3 {
                        let p = t2[u2][x2] * t3[u3][x3];
                        if p > 0.0 {
                            acc.add_scaled(p, &y1[channel.input_index([x1, x2, x3])]);
                        }
                    }
                }
            }
            blocks.push(block(vec![x1, w], dist.p_x1()[x1] * p_w[w], acc, p_w[w]));
        }
    }
    CqState::new(vec![a1, q], vec![d1], blocks)
}

/// State on registers `(U2, X2, U3, X3)` and output `Y2 ⊗ Y3`.
pub fn split_sigma2(channel: &CqChannel, dist: &SplitInputDistribution) -> Result<CqState> {
    dist.check_against(channel)?;
    let q = dist.field().size();
    let [a1, a2, a3] = channel.alphabets();
    let [_, d2, d3] = channel.output_dims();
    let y23 = channel.reduced_states(&[1, 2])?;
    let (t2, t3) = (dist.p_ux(2), dist.p_ux(3));
    let mut blocks = Vec::with_capacity(q * q * a2 * a3);
    for u2 in 0..q {
        for x2 in 0..a2 {
            for u3 in 0..q {
                for x3 in 0..a3 {
                    let mut acc = CMatrix::zeros(d2 * d3);
                    for x1 in 0..a1 {
                        acc.add_scaled(dist.p_x1()[x1], &y23[channel.input_index([x1, x2, x3])]);
                    }
                    let p = t2[u2][x2] * t3[u3][x3];
                    blocks.push(block(vec![u2, x2, u3, x3], p, acc, if p > 0.0 { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    CqState::new(vec![q, a2, q, a3], vec![d2, d3], blocks)
}
