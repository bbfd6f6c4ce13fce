//! Monte Carlo simulation of the binary additive three-user interference
//! channel `Y1 = X1 ⊕ X2 ⊕ X3 ⊕ N1`, `Yj = Xj ⊕ Nj` (j = 2, 3).

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{coset_sum, select_typical, EncoderState, NestedCosetCode};
use crate::error::{check_budget, Error, Result};
use crate::field::PrimeField;
use crate::region::{conv, hb};
use crate::typicality::Typicality;

pub const WILSON_Z: f64 = 1.959964;
pub const DEFAULT_DECODE_BUDGET: u128 = 1 << 24;
const CHUNK: u64 = 1024;
const MAX_CODEBOOK_DRAWS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalDecoder {
    /// Unique message with a candidate whose noise pattern is typical.
    JointTypicality,
    /// Minimum Hamming distance over all candidates.
    MinDistance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceCoding {
    /// Users 2 and 3 share generators; receiver 1 decodes the sum coset word.
    SharedCoset,
    /// Independent generators; receiver 1 decodes the pair `(m2, m3)`.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub delta1: f64,
    pub delta: f64,
    pub tau: f64,
    pub m1_size: usize,
    pub k: usize,
    pub l: usize,
    pub coding: InterferenceCoding,
    /// Typicality used by the interferers' encoders.
    pub encoder_rule: Typicality,
    /// User-1 codewords have weight at most `n (tau + cost_slack)`.
    pub cost_slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalIcInstance {
    pub params: InstanceParams,
    pub codebook1: Vec<Vec<u32>>,
    pub encoder2: EncoderState,
    pub encoder3: EncoderState,
}

fn check_bias(name: &str, x: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { (0.0..=0.5).contains(&x) } else { x > 0.0 && x <= 0.5 };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} is outside the allowed range")))
    }
}

impl ClassicalIcInstance {
    /// Draws user 1's codebook (i.i.d. Ber(τ) words, rejected when too heavy
    /// or repeated) and the interferers' codes and encoders.
    pub fn random<R: Rng + ?Sized>(params: InstanceParams, rng: &mut R) -> Result<Self> {
        if params.n == 0 || params.n > 64 {
            return Err(Error::invalid("blocklength must lie in 1..=64"));
        }
        check_bias("delta1", params.delta1, true)?;
        check_bias("delta", params.delta, true)?;
        if !(0.0..=0.5).contains(&params.tau) {
            return Err(Error::invalid("tau must lie in [0, 0.5]"));
        }
        if params.m1_size == 0 {
            return Err(Error::invalid("user 1 needs at least one message"));
        }
        let f2 = PrimeField::binary();
        let n = params.n;
        let max_weight = (n as f64 * (params.tau + params.cost_slack) + 1e-9).floor() as usize;
        let mut codebook1: Vec<Vec<u32>> = Vec::with_capacity(params.m1_size);
        let mut draws = 0;
        while codebook1.len() < params.m1_size {
            draws += 1;
            if draws > MAX_CODEBOOK_DRAWS {
                return Err(Error::invalid("could not draw enough distinct cost-feasible user-1 codewords"));
            }
            let w: Vec<u32> = (0..n).map(|_| rng.gen_bool(params.tau) as u32).collect();
            if w.iter().sum::<u32>() as usize <= max_weight && !codebook1.contains(&w) {
                codebook1.push(w);
            }
        }
        let code2 = NestedCosetCode::random(f2, n, params.k, params.l, rng);
        let code3 = match params.coding {
            InterferenceCoding::SharedCoset => code2.with_dither(f2.random_vec(n, rng))?,
            InterferenceCoding::Independent => NestedCosetCode::random(f2, n, params.k, params.l, rng),
        };
        let uniform = [0.5, 0.5];
        let encoder2 = select_typical(&code2, &uniform, params.encoder_rule, rng)?;
        let encoder3 = select_typical(&code3, &uniform, params.encoder_rule, rng)?;
        Ok(ClassicalIcInstance {
            params,
            codebook1,
            encoder2,
            encoder3,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Wilson score interval at `z`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nf = trials as f64;
    let p = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl ErrorRate {
    pub fn new(errors: u64, trials: u64) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(errors, trials, WILSON_Z);
        ErrorRate {
            errors,
            trials,
            rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            wilson_low,
            wilson_high,
        }
    }

    /// Whether the two 95% intervals are disjoint.
    pub fn separated_from(&self, other: &ErrorRate) -> bool {
        self.wilson_high < other.wilson_low || other.wilson_high < self.wilson_low
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub decoder: ClassicalDecoder,
    pub coding: InterferenceCoding,
    /// Receivers 1, 2, 3.
    pub receivers: [ErrorRate; 3],
    /// Messages of users 2/3 whose coset had no typical member.
    pub encoding_failures: [u64; 2],
    pub rx1_candidates: usize,
}

fn pack(v: &[u32]) -> u64 {
    v.iter().enumerate().fold(0u64, |acc, (t, &b)| acc | ((b as u64 & 1) << t))
}

struct Tables {
    n: usize,
    x1: Vec<u64>,
    x2: Vec<u64>,
    x3: Vec<u64>,
    /// Interference candidates at receiver 1.
    rx1: Vec<u64>,
    /// Sum-code range, checked against the transmitted sum every trial.
    closure: Option<HashSet<u64>>,
    /// `(word, message)` pairs of the full codes of users 2 and 3.
    rx2: Vec<(u64, u64)>,
    rx3: Vec<(u64, u64)>,
    typical1: Vec<bool>,
    typical: Vec<bool>,
}

fn labelled_range(code: &NestedCosetCode) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for mi in 0..code.message_count() as u64 {
        let m = code.message(mi);
        for ai in 0..code.inner_count() as u64 {
            out.push((pack(&code.codeword_unchecked(&code.inner_index(ai), &m)), mi));
        }
    }
    out
}

fn tables(inst: &ClassicalIcInstance, rule: Typicality, budget: u128) -> Result<Tables> {
    let p = &inst.params;
    let n = p.n;
    let (c2, c3) = (inst.encoder2.code(), inst.encoder3.code());
    let msgs = c2.message_count();
    let words = |e: &EncoderState| (0..msgs as u64).map(|mi| pack(&e.encode(mi))).collect::<Vec<_>>();
    let (x2, x3) = (words(&inst.encoder2), words(&inst.encoder3));
    let (rx1, closure) = match p.coding {
        InterferenceCoding::SharedCoset => {
            let sum = coset_sum(c2, c3)?;
            check_budget("receiver-1 search", (inst.codebook1.len() as u128).saturating_mul(sum.inner_count() * sum.message_count()), budget)?;
            let set: Vec<u64> = sum.range(budget)?.iter().map(|w| pack(w)).collect();
            (set.clone(), Some(set.into_iter().collect()))
        }
        InterferenceCoding::Independent => {
            check_budget("receiver-1 search", (inst.codebook1.len() as u128).saturating_mul(msgs * msgs), budget)?;
            let mut set: Vec<u64> = x2.iter().flat_map(|a| x3.iter().map(move |b| a ^ b)).collect();
            set.sort_unstable();
            set.dedup();
            (set, None)
        }
    };
    let typical_weights = |bias: f64| -> Vec<bool> {
        (0..=n).map(|w| rule.counts_typical(&[n - w, w], &[1.0 - bias, bias])).collect()
    };
    Ok(Tables {
        n,
        x1: inst.codebook1.iter().map(|w| pack(w)).collect(),
        x2,
        x3,
        rx1,
        closure,
        rx2: labelled_range(c2),
        rx3: labelled_range(c3),
        typical1: typical_weights(p.delta1),
        typical: typical_weights(p.delta),
    })
}

/// Decodes a message label from `(label, noise weight)` candidates; a
/// non-unique answer is an error (`None`).
fn decide(decoder: ClassicalDecoder, typical: &[bool], cands: impl Iterator<Item = (u64, u32)>) -> Option<u64> {
    let mut best_w = u32::MAX;
    let mut label: Option<u64> = None;
    let mut ambiguous = false;
    for (m, w) in cands {
        let keep = match decoder {
            ClassicalDecoder::JointTypicality => typical[w as usize],
            ClassicalDecoder::MinDistance => w <= best_w,
        };
        if !keep {
            continue;
        }
        if decoder == ClassicalDecoder::MinDistance && w < best_w {
            best_w = w;
            label = Some(m);
            ambiguous = false;
        } else if label.is_none() {
            label = Some(m);
        } else if label != Some(m) {
            ambiguous = true;
        }
    }
    if ambiguous {
        None
    } else {
        label
    }
}

fn noise<R: Rng>(n: usize, p: f64, rng: &mut R) -> u64 {
    (0..n).fold(0u64, |acc, t| acc | ((rng.gen_bool(p) as u64) << t))
}

/// Runs `trials` independent transmissions. Trials are grouped into chunks
/// of 1024; chunk `i` draws from stream `i + 1` of a ChaCha8 generator
/// seeded by `seed`, so reports do not depend on the thread count.
pub fn simulate(
    inst: &ClassicalIcInstance,
    trials: u64,
    seed: u64,
    decoder: ClassicalDecoder,
    decoder_rule: Typicality,
    budget: u128,
) -> Result<SimulationReport> {
    let t = tables(inst, decoder_rule, budget)?;
    let p = &inst.params;
    let n1 = t.x1.len() as u64;
    let n23 = t.x2.len() as u64;
    let chunks = trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<[u64; 3]> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c + 1);
            let mut errs = [0u64; 3];
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                let (m1, m2, m3) = (rng.gen_range(0..n1), rng.gen_range(0..n23), rng.gen_range(0..n23));
                let (x1, x2, x3) = (t.x1[m1 as usize], t.x2[m2 as usize], t.x3[m3 as usize]);
                if let Some(set) = &t.closure {
                    if !set.contains(&(x2 ^ x3)) {
                        return Err(Error::InternalConsistency("sum of coset words left the sum code".into()));
                    }
                }
                let y1 = x1 ^ x2 ^ x3 ^ noise(t.n, p.delta1, &mut rng);
                let y2 = x2 ^ noise(t.n, p.delta, &mut rng);
                let y3 = x3 ^ noise(t.n, p.delta, &mut rng);
                let c1 = t
                    .x1
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &w1)| t.rx1.iter().map(move |&u| (i as u64, (y1 ^ w1 ^ u).count_ones())));
                if decide(decoder, &t.typical1, c1) != Some(m1) {
                    errs[0] += 1;
                }
                let c2 = t.rx2.iter().map(|&(w, m)| (m, (y2 ^ w).count_ones()));
                if decide(decoder, &t.typical, c2) != Some(m2) {
                    errs[1] += 1;
                }
                let c3 = t.rx3.iter().map(|&(w, m)| (m, (y3 ^ w).count_ones()));
                if decide(decoder, &t.typical, c3) != Some(m3) {
                    errs[2] += 1;
                }
            }
            Ok(errs)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = [0u64; 3];
    for c in counts {
        for j in 0..3 {
            total[j] += c[j];
        }
    }
    let fails = |e: &EncoderState| e.thetas().iter().filter(|&&x| x == 0).count() as u64;
    Ok(SimulationReport {
        trials,
        seed,
        decoder,
        coding: p.coding,
        receivers: total.map(|e| ErrorRate::new(e, trials)),
        encoding_failures: [fails(&inst.encoder2), fails(&inst.encoder3)],
        rx1_candidates: t.rx1.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub delta1: f64,
    pub delta: f64,
    pub tau: f64,
    /// `h_b(δ1 ∗ τ) − h_b(δ1)`.
    pub tx1_capacity: f64,
    /// `1 − h_b(δ)`.
    pub ptp_capacity: f64,
    /// `h_b(δ1 ∗ τ) − h_b(δ1) + 2(1 − h_b(δ))` against `1 − h_b(δ1)`.
    pub unstructured_lhs: f64,
    pub unstructured_rhs: f64,
    pub unstructured_violated: bool,
    /// `τ ∗ δ < δ < 1/2`.
    pub structured_condition: bool,
    /// `δ1 ∗ τ <= δ`.
    pub interference_decodable: bool,
}

pub fn capacity_report(delta1: f64, delta: f64, tau: f64) -> Result<CapacityReport> {
    for (name, v) in [("delta1", delta1), ("delta", delta)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Error::invalid(format!("{name} must lie in (0, 0.5), got {v}")));
        }
    }
    if !(0.0..0.5).contains(&tau) {
        return Err(Error::invalid(format!("tau must lie in [0, 0.5), got {tau}")));
    }
    let tx1_capacity = hb(conv(delta1, tau)?)? - hb(delta1)?;
    let ptp_capacity = 1.0 - hb(delta)?;
    let lhs = tx1_capacity + 2.0 * ptp_capacity;
    let rhs = 1.0 - hb(delta1)?;
    Ok(CapacityReport {
        delta1,
        delta,
        tau,
        tx1_capacity,
        ptp_capacity,
        unstructured_lhs: lhs,
        unstructured_rhs: rhs,
        unstructured_violated: lhs > rhs,
        structured_condition: conv(tau, delta)? < delta && delta < 0.5,
        interference_decodable: conv(delta1, tau)? <= delta + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(coding: InterferenceCoding, delta1: f64, delta: f64) -> InstanceParams {
        InstanceParams {
            n: 16,
            delta1,
            delta,
            tau: 0.1,
            m1_size: 4,
            k: 1,
            l: 4,
            coding,
            encoder_rule: Typicality::strong(0.5).unwrap(),
            cost_slack: 0.1,
        }
    }

    fn instance(p: InstanceParams, seed: u64) -> ClassicalIcInstance {
        ClassicalIcInstance::random(p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn jt() -> Typicality {
        Typicality::entropy(0.25).unwrap()
    }

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at z = 1.96: (0.05523, 0.17437).
        let (lo, hi) = wilson_interval(10, 100, WILSON_Z);
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 50, WILSON_Z);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.07135).abs() < 1e-4);
    }

    #[test]
    fn decide_rules() {
        let typ = vec![true, true, false];
        assert_eq!(decide(ClassicalDecoder::MinDistance, &typ, [(0, 2), (1, 1), (1, 1)].into_iter()), Some(1));
        assert_eq!(decide(ClassicalDecoder::MinDistance, &typ, [(0, 1), (1, 1)].into_iter()), None);
        assert_eq!(decide(ClassicalDecoder::JointTypicality, &typ, [(0, 2), (1, 1)].into_iter()), Some(1));
        assert_eq!(decide(ClassicalDecoder::JointTypicality, &typ, [(0, 0), (1, 1)].into_iter()), None);
        assert_eq!(decide(ClassicalDecoder::JointTypicality, &typ, [(0, 2)].into_iter()), None);
    }

    #[test]
    fn user1_codebook_obeys_cost() {
        let inst = instance(params(InterferenceCoding::SharedCoset, 0.05, 0.1), 3);
        assert_eq!(inst.codebook1.len(), 4);
        for w in &inst.codebook1 {
            assert!(w.iter().sum::<u32>() as f64 <= 16.0 * 0.2 + 1e-9);
        }
        assert!(inst.encoder2.code().same_generators(inst.encoder3.code()));
    }

    #[test]
    fn noiseless_decodes_perfectly() {
        let mut p = params(InterferenceCoding::SharedCoset, 0.0, 0.0);
        p.tau = 0.3;
        let inst = instance(p, 11);
        for dec in [ClassicalDecoder::MinDistance, ClassicalDecoder::JointTypicality] {
            let r = simulate(&inst, 2000, 1, dec, jt(), DEFAULT_DECODE_BUDGET).unwrap();
            assert_eq!(r.receivers.map(|e| e.errors), [0, 0, 0], "{dec:?}");
        }
    }

    #[test]
    fn useless_channel_errs_like_guessing() {
        let inst = instance(params(InterferenceCoding::SharedCoset, 0.05, 0.5), 2);
        let r = simulate(&inst, 4000, 9, ClassicalDecoder::MinDistance, jt(), DEFAULT_DECODE_BUDGET).unwrap();
        let guess = 1.0 - 1.0 / 16.0;
        assert!((r.receivers[1].rate - guess).abs() < 0.03, "{}", r.receivers[1].rate);
    }

    #[test]
    fn deterministic_replay() {
        let inst = instance(params(InterferenceCoding::SharedCoset, 0.05, 0.1), 5);
        let a = simulate(&inst, 3000, 42, ClassicalDecoder::JointTypicality, jt(), DEFAULT_DECODE_BUDGET).unwrap();
        let b = simulate(&inst, 3000, 42, ClassicalDecoder::JointTypicality, jt(), DEFAULT_DECODE_BUDGET).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rx1_error_grows_with_delta1() {
        let rates: Vec<ErrorRate> = [0.01, 0.08, 0.2]
            .iter()
            .map(|&d1| {
                let inst = instance(params(InterferenceCoding::SharedCoset, d1, 0.1), 8);
                simulate(&inst, 4000, 1, ClassicalDecoder::MinDistance, jt(), DEFAULT_DECODE_BUDGET).unwrap().receivers[0]
            })
            .collect();
        assert!(rates[0].rate <= rates[1].rate && rates[1].rate <= rates[2].rate, "{rates:?}");
        assert!(rates[0].separated_from(&rates[2]));
    }

    #[test]
    fn budget_guard() {
        let inst = instance(params(InterferenceCoding::Independent, 0.05, 0.1), 5);
        assert!(matches!(
            simulate(&inst, 10, 0, ClassicalDecoder::MinDistance, jt(), 100),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn capacity_report_values() {
        let r = capacity_report(0.01, 0.1, 0.0).unwrap();
        assert!(r.tx1_capacity.abs() < 1e-15);
        let r = capacity_report(0.01, 0.1, 0.0918).unwrap();
        assert!(r.unstructured_violated && r.interference_decodable);
        assert!(r.unstructured_lhs - r.unstructured_rhs > 0.4);
        assert!(!r.structured_condition);
        let r = capacity_report(0.01, 0.4999999, 0.1).unwrap();
        assert!(r.ptp_capacity < 1e-10);
    }
}
