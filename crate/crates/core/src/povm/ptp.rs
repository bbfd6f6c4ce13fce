use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::projector::{conditional_from_spectra, product_state, spectrum, typical_projector, DEFAULT_DIM_BUDGET};
use super::{Povm, PovmLabel};
use crate::codes::{select_typical, EncoderState, NestedCosetCode};
use crate::error::{check_budget, Error, Result};
use crate::field::PrimeField;
use crate::linalg::{CMatrix, DensityOperator};
use crate::typicality::{check_pmf, Typicality};

const ELEMENT_BUDGET: u128 = 1 << 24;

/// Square-root decoder for a nested coset code over a classical-quantum
/// point-to-point channel `v ↦ ρ_v`.
#[derive(Clone, Debug)]
pub struct PtpDecoder {
    code: NestedCosetCode,
    states: Vec<CMatrix>,
    povm: Povm,
    unconditional_rank: usize,
}

fn letters(v: &[u32]) -> Vec<usize> {
    v.iter().map(|&x| x as usize).collect()
}

/// `γ_{a,m} = π_ρ π_{v(a,m)} π_ρ` for every codeword, grouped by message,
/// with the indicator of `v(a,m)` being typical for the encoder pmf.
pub fn ptp_gammas(
    code: &NestedCosetCode,
    encoder: &EncoderState,
    states: &[DensityOperator],
    rule: Typicality,
) -> Result<(Vec<Vec<CMatrix>>, usize)> {
    let q = code.field().size();
    if states.len() != q {
        return Err(Error::invalid(format!("need {q} states, got {}", states.len())));
    }
    if encoder.code() != code {
        return Err(Error::invalid("encoder belongs to a different code"));
    }
    let d = states[0].dim();
    let total_dim = crate::error::pow_saturating(d as u128, code.n());
    check_budget(
        "decoder elements x dimension",
        code.inner_count().saturating_mul(code.message_count()).saturating_mul(total_dim),
        ELEMENT_BUDGET,
    )?;
    let p_v = encoder.pmf();
    let avg = DensityOperator::mixture(p_v, &states.iter().collect::<Vec<_>>())?;
    let pi_rho = typical_projector(&avg, code.n(), rule)?;
    let spectra = states.iter().map(|s| spectrum(s.matrix())).collect::<Result<Vec<_>>>()?;
    let mut cache: HashMap<Vec<u32>, CMatrix> = HashMap::new();
    let mut groups = Vec::with_capacity(code.message_count() as usize);
    for mi in 0..code.message_count() as u64 {
        let m = code.message(mi);
        let mut ops = Vec::with_capacity(code.inner_count() as usize);
        for ai in 0..code.inner_count() as u64 {
            let v = code.codeword_unchecked(&code.inner_index(ai), &m);
            if !cache.contains_key(&v) {
                let pv = conditional_from_spectra(&spectra, &letters(&v), rule, Some(p_v), DEFAULT_DIM_BUDGET)?;
                let g = if pv.rank == 0 {
                    CMatrix::zeros(pv.dim())
                } else {
                    pi_rho.matrix().sandwich(pv.matrix()).hermitian_part()
                };
                cache.insert(v.clone(), g);
            }
            ops.push(cache[&v].clone());
        }
        groups.push(ops);
    }
    Ok((groups, pi_rho.rank))
}

pub fn build_ptp_decoder(
    code: &NestedCosetCode,
    encoder: &EncoderState,
    states: &[DensityOperator],
    rule: Typicality,
) -> Result<PtpDecoder> {
    let (groups, unconditional_rank) = ptp_gammas(code, encoder, states, rule)?;
    let dim = crate::error::pow_saturating(states[0].dim() as u128, code.n()) as usize;
    let labelled = groups
        .into_iter()
        .enumerate()
        .map(|(mi, ops)| (PovmLabel::Message(mi as u64), ops))
        .collect();
    Ok(PtpDecoder {
        code: code.clone(),
        states: states.iter().map(|s| s.matrix().clone()).collect(),
        povm: Povm::square_root(dim, labelled)?,
        unconditional_rank,
    })
}

/// Message-level square-root POVM `{Σ_a λ_{a,m}}` plus completion.
pub fn build_ptp_povm(
    code: &NestedCosetCode,
    encoder: &EncoderState,
    states: &[DensityOperator],
    rule: Typicality,
) -> Result<Povm> {
    Ok(build_ptp_decoder(code, encoder, states, rule)?.povm)
}

impl PtpDecoder {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn unconditional_rank(&self) -> usize {
        self.unconditional_rank
    }

    fn success(&self, mi: u64, ai: u64) -> f64 {
        let v = self.code.codeword_unchecked(&self.code.inner_index(ai), &self.code.message(mi));
        let rho = product_state(&self.states, &letters(&v));
        self.povm.probability(PovmLabel::Message(mi), &rho)
    }

    /// Per-message probability of correct decoding for the encoder's chosen
    /// codewords; an encoding failure counts as a decoding error.
    pub fn success_probabilities(&self, encoder: &EncoderState) -> Vec<f64> {
        (0..self.code.message_count() as u64)
            .map(|mi| if encoder.failed(mi) { 0.0 } else { self.success(mi, encoder.chosen_index(mi)) })
            .collect()
    }

    /// `1 − q^{-l} Σ_m tr(λ_m ρ^{⊗n}_{v(a_m, m)})`.
    pub fn error_probability(&self, encoder: &EncoderState) -> f64 {
        let s = self.success_probabilities(encoder);
        1.0 - s.iter().sum::<f64>() / s.len() as f64
    }

    /// Error probability averaged over the encoder's uniform choice of `a_m`
    /// among the typical members of each coset.
    pub fn expected_error_probability(&self, encoder: &EncoderState) -> f64 {
        let count = self.code.message_count() as u64;
        let total: f64 = (0..count)
            .map(|mi| {
                let members = self.code.typical_members(&self.code.message(mi), encoder.pmf(), &encoder.rule());
                if members.is_empty() {
                    0.0
                } else {
                    members.iter().map(|&ai| self.success(mi, ai)).sum::<f64>() / members.len() as f64
                }
            })
            .sum();
        1.0 - total / count as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtpEnsembleConfig {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p_v: Vec<f64>,
    pub rule: Typicality,
    pub codes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtpEnsembleResult {
    pub mean_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub codes: usize,
    /// Fraction of messages, over all codes, whose coset had no typical member.
    pub encoding_failure_rate: f64,
}

/// Average of the expected error probability over uniformly random codes.
/// Code `i` is drawn from stream `i` of a ChaCha8 generator seeded by `seed`.
pub fn ptp_ensemble_error(cfg: &PtpEnsembleConfig, states: &[DensityOperator]) -> Result<PtpEnsembleResult> {
    check_pmf(&cfg.p_v, "p_V")?;
    if cfg.codes == 0 {
        return Err(Error::invalid("ensemble needs at least one code"));
    }
    let runs = (0..cfg.codes)
        .into_par_iter()
        .map(|i| -> Result<(f64, usize, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let code = NestedCosetCode::random(cfg.field, cfg.n, cfg.k, cfg.l, &mut rng);
            let enc = select_typical(&code, &cfg.p_v, cfg.rule, &mut rng)?;
            let dec = build_ptp_decoder(&code, &enc, states, cfg.rule)?;
            let fails = enc.thetas().iter().filter(|&&t| t == 0).count();
            Ok((dec.expected_error_probability(&enc), fails, enc.thetas().len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let errs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let fails: usize = runs.iter().map(|r| r.1).sum();
    let msgs: usize = runs.iter().map(|r| r.2).sum();
    Ok(PtpEnsembleResult {
        mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
        min_error: errs.iter().cloned().fold(f64::INFINITY, f64::min),
        max_error: errs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        codes: cfg.codes,
        encoding_failure_rate: fails as f64 / msgs as f64,
    })
}
