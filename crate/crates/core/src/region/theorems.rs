use serde::{Deserialize, Serialize};

use super::{Constraint, RegionSpec};
use crate::channel::{
    require_3to1, sigma1, sigma2, split_sigma1, split_sigma2, CqChannel, InputDistribution, SplitInputDistribution,
};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{entropy_bits, CMatrix, DensityOperator};
use crate::typicality::{check_pmf, shannon_entropy};

/// Information quantities entering the nested-coset-code region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Terms {
    pub i_y1_x1_given_u: f64,
    pub i_y2_v2: f64,
    pub i_y3_v3: f64,
    pub i_y1_u_given_x1: f64,
    pub i_y1_x1u: f64,
    pub h_v2: f64,
    pub h_v3: f64,
    pub h_u: f64,
    pub expected_costs: [f64; 3],
}

pub fn theorem1_terms(channel: &CqChannel, dist: &InputDistribution) -> Result<Theorem1Terms> {
    require_3to1(channel)?;
    terms1_unchecked(channel, dist)
}

pub(crate) fn terms1_unchecked(channel: &CqChannel, dist: &InputDistribution) -> Result<Theorem1Terms> {
    let s1 = sigma1(channel, dist)?;
    let s2 = sigma2(channel, dist)?;
    // s1 registers: 0 = X1, 1 = U; s2 registers: 0 = V2, 1 = V3.
    Ok(Theorem1Terms {
        i_y1_x1_given_u: s1.mutual_information(&[0], &[1])?,
        i_y2_v2: s2.reduce_quantum(&[0])?.mutual_information(&[0], &[])?,
        i_y3_v3: s2.reduce_quantum(&[1])?.mutual_information(&[1], &[])?,
        i_y1_u_given_x1: s1.mutual_information(&[1], &[0])?,
        i_y1_x1u: s1.mutual_information(&[0, 1], &[])?,
        h_v2: shannon_entropy(&dist.p_v(2)),
        h_v3: shannon_entropy(&dist.p_v(3)),
        h_u: shannon_entropy(&dist.p_u()),
        expected_costs: dist.expected_costs(channel)?,
    })
}

impl Theorem1Terms {
    pub fn region(&self) -> RegionSpec {
        let base = self.h_v2.min(self.h_v3) - self.h_u;
        let c = |name: &str, tag: &str, co: [f64; 3], rhs: f64| Constraint::new(name, tag, co, rhs);
        RegionSpec {
            label: "theorem1".into(),
            constraints: vec![
                c("R1 <= I(Y1;X1|U)", "ncc:user1", [1.0, 0.0, 0.0], self.i_y1_x1_given_u),
                c("R2 <= I(Y2;V2)", "ncc:ptp", [0.0, 1.0, 0.0], self.i_y2_v2),
                c("R3 <= I(Y3;V3)", "ncc:ptp", [0.0, 0.0, 1.0], self.i_y3_v3),
                c("R2 <= min(H(V2),H(V3)) - H(U) + I(Y1;U|X1)", "ncc:interference", [0.0, 1.0, 0.0], base + self.i_y1_u_given_x1),
                c("R3 <= min(H(V2),H(V3)) - H(U) + I(Y1;U|X1)", "ncc:interference", [0.0, 0.0, 1.0], base + self.i_y1_u_given_x1),
                c("R1+R2 <= min(H(V2),H(V3)) - H(U) + I(Y1;X1,U)", "ncc:sum", [1.0, 1.0, 0.0], base + self.i_y1_x1u),
                c("R1+R3 <= min(H(V2),H(V3)) - H(U) + I(Y1;X1,U)", "ncc:sum", [1.0, 0.0, 1.0], base + self.i_y1_x1u),
            ],
            expected_costs: self.expected_costs,
        }
    }
}

/// Region achieved by nested coset codes for users 2, 3 with receiver 1
/// decoding `U = V2 ⊕ V3`.
pub fn theorem1_region(channel: &CqChannel, dist: &InputDistribution) -> Result<RegionSpec> {
    Ok(theorem1_terms(channel, dist)?.region())
}

/// `χ({p_v, ρ_v}) = S(Σ p ρ) - Σ p S(ρ)` in bits.
pub fn holevo_information(p: &[f64], states: &[DensityOperator]) -> Result<f64> {
    check_pmf(p, "ensemble pmf")?;
    if p.len() != states.len() || states.is_empty() {
        return Err(Error::invalid("ensemble pmf and state list differ in length"));
    }
    let mats: Vec<&CMatrix> = states.iter().map(|s| s.matrix()).collect();
    holevo_of_matrices(p, &mats)
}

fn holevo_of_matrices(p: &[f64], states: &[&CMatrix]) -> Result<f64> {
    let mut avg = CMatrix::zeros(states[0].dim());
    let mut cond = 0.0;
    for (&w, s) in p.iter().zip(states) {
        if w > 0.0 {
            avg.add_scaled(w, s);
            cond += w * entropy_bits(s)?;
        }
    }
    Ok(entropy_bits(&avg)? - cond)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NccRateParams {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p_v: Vec<f64>,
}

impl NccRateParams {
    pub fn new(field: PrimeField, n: usize, k: usize, l: usize, p_v: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("blocklength must be positive"));
        }
        check_pmf(&p_v, "p_V")?;
        if p_v.len() != field.size() {
            return Err(Error::invalid("p_V must be a pmf over the field"));
        }
        Ok(NccRateParams { field, n, k, l, p_v })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub entropy_v: f64,
    pub holevo: f64,
    /// `k log q / n`.
    pub inner_rate: f64,
    /// `(k + l) log q / n`.
    pub total_rate: f64,
    /// `l log q / n`.
    pub message_rate: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl Theorem2Report {
    pub fn in_window(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Rate window for nested coset codes on a point-to-point channel `v -> ρ_v`:
/// `k log q/n > log q - H(V)` and `(k+l) log q/n < log q - H(V) + χ`.
pub fn theorem2_bounds(params: &NccRateParams, states: &[DensityOperator]) -> Result<Theorem2Report> {
    if states.len() != params.field.size() {
        return Err(Error::invalid("need one state per field element"));
    }
    let log_q = (params.field.q() as f64).log2();
    let entropy_v = shannon_entropy(&params.p_v);
    let holevo = holevo_information(&params.p_v, states)?;
    let n = params.n as f64;
    let inner_rate = params.k as f64 * log_q / n;
    let total_rate = (params.k + params.l) as f64 * log_q / n;
    let message_rate = params.l as f64 * log_q / n;
    let lower_holds = inner_rate > log_q - entropy_v;
    let upper_holds = total_rate < log_q - entropy_v + holevo;
    if lower_holds && upper_holds && message_rate >= holevo + 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "message rate {message_rate} exceeds Holevo information {holevo} inside the window"
        )));
    }
    Ok(Theorem2Report {
        entropy_v,
        holevo,
        inner_rate,
        total_rate,
        message_rate,
        lower_holds,
        upper_holds,
    })
}

/// Information quantities of the message-splitting region, `W = U2 ⊕ U3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Terms {
    /// `I(U_j X_j; Y_j)` for j = 2, 3.
    pub i_ujxj_yj: [f64; 2],
    /// `I(X_j; Y_j | U_j)` for j = 2, 3.
    pub i_xj_yj_given_uj: [f64; 2],
    pub h_uj: [f64; 2],
    pub h_w_given_y1: f64,
    pub i_x1_wy1: f64,
    pub expected_costs: [f64; 3],
}

pub fn theorem3_terms(channel: &CqChannel, dist: &SplitInputDistribution) -> Result<Theorem3Terms> {
    require_3to1(channel)?;
    let s1 = split_sigma1(channel, dist)?;
    let s2 = split_sigma2(channel, dist)?;
    // s1 registers: 0 = X1, 1 = W. s2 registers: 0 = U2, 1 = X2, 2 = U3, 3 = X3.
    let h_x1 = s1.register_entropy(&[0])?;
    let i_x1_wy1 = h_x1 + s1.joint_entropy(&[1])? - s1.joint_entropy(&[0, 1])?;
    let h_w_given_y1 = s1.conditional_entropy_given_quantum(&[1])?;
    let mut i_ujxj_yj = [0.0; 2];
    let mut i_xj_yj_given_uj = [0.0; 2];
    for (slot, (u, x)) in [(0usize, 1usize), (2, 3)].into_iter().enumerate() {
        let red = s2.reduce_quantum(&[slot])?;
        i_ujxj_yj[slot] = red.mutual_information(&[u, x], &[])?;
        i_xj_yj_given_uj[slot] = red.mutual_information(&[x], &[u])?;
    }
    Ok(Theorem3Terms {
        i_ujxj_yj,
        i_xj_yj_given_uj,
        h_uj: [shannon_entropy(&dist.p_u(2)), shannon_entropy(&dist.p_u(3))],
        h_w_given_y1,
        i_x1_wy1,
        expected_costs: dist.expected_costs(channel)?,
    })
}

impl Theorem3Terms {
    pub fn region(&self) -> RegionSpec {
        let gain = self
            .h_uj
            .iter()
            .map(|h| h - self.h_w_given_y1)
            .fold(0.0f64, f64::min);
        let mut constraints = vec![
            Constraint::new("R2 <= I(U2X2;Y2)", "split:ptp", [0.0, 1.0, 0.0], self.i_ujxj_yj[0]),
            Constraint::new("R3 <= I(U3X3;Y3)", "split:ptp", [0.0, 0.0, 1.0], self.i_ujxj_yj[1]),
            Constraint::new(
                "R1 <= min(0, H(U2)-H(W|Y1), H(U3)-H(W|Y1)) + I(X1;WY1)",
                "split:user1",
                [1.0, 0.0, 0.0],
                gain + self.i_x1_wy1,
            ),
        ];
        for j in 0..2 {
            let mut co = [1.0, 0.0, 0.0];
            co[j + 1] = 1.0;
            constraints.push(Constraint::new(
                format!("R1+R{0} <= I(X{0};Y{0}|U{0}) + I(X1;WY1) + H(U{0}) - H(W|Y1)", j + 2),
                "split:sum",
                co,
                self.i_xj_yj_given_uj[j] + self.i_x1_wy1 + self.h_uj[j] - self.h_w_given_y1,
            ));
        }
        RegionSpec {
            label: "theorem3".into(),
            constraints,
            expected_costs: self.expected_costs,
        }
    }
}

pub fn theorem3_region(channel: &CqChannel, dist: &SplitInputDistribution) -> Result<RegionSpec> {
    Ok(theorem3_terms(channel, dist)?.region())
}

/// Unstructured baseline evaluated directly from the input marginals: every
/// receiver treats the other users' signals as noise.
pub fn usb_region(channel: &CqChannel, p_x: [&[f64]; 3]) -> Result<RegionSpec> {
    require_3to1(channel)?;
    let a = channel.alphabets();
    for (j, p) in p_x.iter().enumerate() {
        check_pmf(p, "input marginal")?;
        if p.len() != a[j] {
            return Err(Error::invalid("input marginal does not match the channel alphabet"));
        }
    }
    let mut info = [0.0; 3];
    for j in 0..3 {
        let reduced = channel.reduced_states(&[j])?;
        let d = channel.output_dims()[j];
        let mut cond: Vec<CMatrix> = vec![CMatrix::zeros(d); a[j]];
        for x in channel.inputs() {
            let w: f64 = (0..3).filter(|&i| i != j).map(|i| p_x[i][x[i]]).product();
            if w > 0.0 {
                cond[x[j]].add_scaled(w, &reduced[channel.input_index(x)]);
            }
        }
        let refs: Vec<&CMatrix> = cond.iter().collect();
        info[j] = holevo_of_matrices(p_x[j], &refs)?;
    }
    let mut expected_costs = [0.0; 3];
    for (j, e) in expected_costs.iter_mut().enumerate() {
        *e = p_x[j].iter().zip(channel.costs(j)).map(|(p, c)| p * c).sum();
    }
    Ok(RegionSpec {
        label: "usb".into(),
        constraints: vec![
            Constraint::new("R2 <= I(X2;Y2)", "usb:ptp", [0.0, 1.0, 0.0], info[1]),
            Constraint::new("R3 <= I(X3;Y3)", "usb:ptp", [0.0, 0.0, 1.0], info[2]),
            Constraint::new("R1 <= I(X1;Y1)", "usb:user1", [1.0, 0.0, 0.0], info[0]),
            Constraint::new("R1+R2 <= I(X2;Y2) + I(X1;Y1)", "usb:sum", [1.0, 1.0, 0.0], info[1] + info[0]),
            Constraint::new("R1+R3 <= I(X3;Y3) + I(X1;Y1)", "usb:sum", [1.0, 0.0, 1.0], info[2] + info[0]),
        ],
        expected_costs,
    })
}
