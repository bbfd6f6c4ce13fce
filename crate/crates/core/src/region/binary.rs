use serde::{Deserialize, Serialize};

use super::{theorems::terms1_unchecked, RatePoint, REGION_TOL};
use crate::channel::{example1_channel, example2_channel, example2_rho, InputDistribution};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{von_neumann_entropy, LogBase};

fn check_prob(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} is not a probability")))
    }
}

/// Binary entropy in bits.
pub fn hb(x: f64) -> Result<f64> {
    check_prob("hb argument", x)?;
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(h(x) + h(1.0 - x))
}

/// Binary convolution `a(1-b) + b(1-a)`.
pub fn conv(a: f64, b: f64) -> Result<f64> {
    check_prob("conv argument", a)?;
    check_prob("conv argument", b)?;
    Ok(a * (1.0 - b) + b * (1.0 - a))
}

/// The bias `τ` with `conv(τ, δ1) = δ`.
pub fn interference_free_tau(delta1: f64, delta: f64) -> Result<f64> {
    check_prob("delta1", delta1)?;
    check_prob("delta", delta)?;
    if delta1 >= 0.5 || delta < delta1 {
        return Err(Error::invalid("need delta1 < 0.5 and delta >= delta1"));
    }
    Ok((delta - delta1) / (1.0 - 2.0 * delta1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationExample {
    /// Binary additive channels embedded as commuting states.
    ClassicalEx1,
    /// Non-commuting qubit states.
    QuantumEx2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub example: SeparationExample,
    pub delta1: f64,
    pub delta: f64,
    pub tau: f64,
    /// Interference-free point-to-point rates of the three users.
    pub ptp_triple: [f64; 3],
    /// Sum of user 1's rate and both interference rates compared with what
    /// receiver 1 could support when decoding both interferers separately.
    pub unstructured_lhs: f64,
    pub unstructured_rhs: f64,
    pub unstructured_violated: bool,
    /// The structured-side condition as stated for the example
    /// (example 1: `conv(τ, δ) < δ < 1/2`, example 2: `conv(τ, δ1) <= δ`).
    pub structured_condition: bool,
    /// `conv(τ, δ1) <= δ`: the interference sum is decodable at receiver 1.
    pub interference_decodable: bool,
    /// Smallest slack of the triple against the nested-coset-code region.
    pub ncc_min_slack: f64,
    pub ncc_point_in_region: bool,
    pub separation: bool,
}

/// Evaluates the separation example: whether the point-to-point capacity
/// triple is reachable with nested coset codes while unstructured decoding of
/// both interferers at receiver 1 cannot support it.
pub fn example_separation_witness(
    example: SeparationExample,
    delta1: f64,
    delta: f64,
    tau: f64,
) -> Result<SeparationReport> {
    for (name, v) in [("delta1", delta1), ("delta", delta)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Error::invalid(format!("{name} must lie in (0, 0.5), got {v}")));
        }
    }
    if !(0.0..0.5).contains(&tau) {
        return Err(Error::invalid(format!("tau must lie in [0, 0.5), got {tau}")));
    }
    let mixed = conv(tau, delta1)?;
    let (ptp_triple, lhs, rhs, structured_condition, channel) = match example {
        SeparationExample::ClassicalEx1 => {
            let r1 = hb(mixed)? - hb(delta1)?;
            let rj = 1.0 - hb(delta)?;
            let lhs = r1 + 2.0 * rj;
            let rhs = 1.0 - hb(delta1)?;
            let literal = conv(tau, delta)? < delta && delta < 0.5;
            ([r1, rj, rj], lhs, rhs, literal, example1_channel(delta1, delta)?)
        }
        SeparationExample::QuantumEx2 => {
            let s = |p: f64| -> Result<f64> { von_neumann_entropy(&example2_rho(p)?, LogBase::Bits) };
            let r1 = s(mixed)? - s(delta1)?;
            let rj = s(0.5)? - s(delta)?;
            let lhs = s(mixed)? + s(0.5)?;
            let rhs = 2.0 * s(delta)?;
            ([r1, rj, rj], lhs, rhs, mixed <= delta + 1e-12, example2_channel(delta1, delta)?)
        }
    };
    let dist = InputDistribution::identity_aux(PrimeField::binary(), vec![1.0 - tau, tau], &[0.5, 0.5], &[0.5, 0.5])?;
    let region = terms1_unchecked(&channel, &dist)?.region();
    let point = RatePoint::new(ptp_triple.map(|r| r.max(0.0)), [tau, 0.0, 0.0])?;
    let ncc_min_slack = region.min_slack(&point.rates);
    let ncc_point_in_region = region.contains(&point, REGION_TOL);
    let unstructured_violated = lhs > rhs;
    Ok(SeparationReport {
        example,
        delta1,
        delta,
        tau,
        ptp_triple,
        unstructured_lhs: lhs,
        unstructured_rhs: rhs,
        unstructured_violated,
        structured_condition,
        interference_decodable: mixed <= delta + 1e-12,
        ncc_min_slack,
        ncc_point_in_region,
        separation: tau > 0.0 && unstructured_violated && ncc_point_in_region,
    })
}
