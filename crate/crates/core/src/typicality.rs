//! Typicality tests for classical sequences.
//!
//! Two flavors are provided. `Strong` compares letter frequencies with the pmf,
//! `|N(a)/n - p(a)| <= delta * p(a)`. `Entropy` compares the sample entropy
//! `-(1/n) log2 p(x^n)` with `H(p)` to within `delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack added to every comparison so that exact ties survive rounding.
const TIE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalityKind {
    Strong,
    Entropy,
}

impl std::str::FromStr for TypicalityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(TypicalityKind::Strong),
            "entropy" => Ok(TypicalityKind::Entropy),
            other => Err(Error::invalid(format!("unknown typicality kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for TypicalityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TypicalityKind::Strong => "strong",
            TypicalityKind::Entropy => "entropy",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Typicality {
    pub kind: TypicalityKind,
    pub delta: f64,
}

impl Typicality {
    pub fn new(kind: TypicalityKind, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!(
                "typicality slack must be positive and finite, got {delta}"
            )));
        }
        Ok(Typicality { kind, delta })
    }

    pub fn strong(delta: f64) -> Result<Self> {
        Self::new(TypicalityKind::Strong, delta)
    }

    pub fn entropy(delta: f64) -> Result<Self> {
        Self::new(TypicalityKind::Entropy, delta)
    }

    /// Same flavor with `delta * factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Typicality {
            kind: self.kind,
            delta: self.delta * factor,
        }
    }

    /// Typicality of a sequence of length `n` given only its letter counts.
    pub fn counts_typical(&self, counts: &[usize], pmf: &[f64]) -> bool {
        debug_assert_eq!(counts.len(), pmf.len());
        let n: usize = counts.iter().sum();
        if n == 0 {
            return true;
        }
        let nf = n as f64;
        match self.kind {
            TypicalityKind::Strong => counts.iter().zip(pmf).all(|(&c, &p)| {
                (c as f64 / nf - p).abs() <= self.delta * p + TIE_EPS
            }),
            TypicalityKind::Entropy => {
                let mut sample = 0.0;
                for (&c, &p) in counts.iter().zip(pmf) {
                    if c == 0 {
                        continue;
                    }
                    if p <= 0.0 {
                        return false;
                    }
                    sample -= c as f64 * p.log2();
                }
                (sample / nf - shannon_entropy(pmf)).abs() <= self.delta + TIE_EPS
            }
        }
    }

    pub fn is_typical(&self, seq: &[usize], pmf: &[f64]) -> bool {
        self.counts_typical(&letter_counts(seq, pmf.len()), pmf)
    }

    pub fn is_typical_fq(&self, seq: &[u32], pmf: &[f64]) -> bool {
        let mut counts = vec![0usize; pmf.len()];
        for &x in seq {
            match counts.get_mut(x as usize) {
                Some(c) => *c += 1,
                None => return false,
            }
        }
        self.counts_typical(&counts, pmf)
    }

    /// Conditional typicality of `labels` given `given`, where letter `v` of
    /// `given` induces the pmf `conditionals[v]` on labels.
    ///
    /// Strong: `|N(v,y) - N(v) p(y|v)| <= delta * n * p(y|v)` for every pair.
    /// Entropy: `|-(1/n) log2 p(y^n|v^n) - (1/n) sum_t H(p(.|v_t))| <= delta`.
    pub fn conditionally_typical(
        &self,
        given: &[usize],
        labels: &[usize],
        conditionals: &[Vec<f64>],
    ) -> bool {
        debug_assert_eq!(given.len(), labels.len());
        let n = given.len();
        if n == 0 {
            return true;
        }
        let nf = n as f64;
        match self.kind {
            TypicalityKind::Strong => {
                let ny = conditionals.first().map_or(0, |c| c.len());
                let mut joint = vec![0usize; conditionals.len() * ny];
                let mut marg = vec![0usize; conditionals.len()];
                for (&v, &y) in given.iter().zip(labels) {
                    joint[v * ny + y] += 1;
                    marg[v] += 1;
                }
                for (v, cond) in conditionals.iter().enumerate() {
                    for (y, &p) in cond.iter().enumerate() {
                        let dev = joint[v * ny + y] as f64 - marg[v] as f64 * p;
                        if dev.abs() > self.delta * nf * p + TIE_EPS {
                            return false;
                        }
                    }
                }
                true
            }
            TypicalityKind::Entropy => {
                let mut sample = 0.0;
                let mut expected = 0.0;
                for (&v, &y) in given.iter().zip(labels) {
                    let p = conditionals[v][y];
                    if p <= 0.0 {
                        return false;
                    }
                    sample -= p.log2();
                    expected += shannon_entropy(&conditionals[v]);
                }
                ((sample - expected) / nf).abs() <= self.delta + TIE_EPS
            }
        }
    }
}

pub fn letter_counts(seq: &[usize], alphabet: usize) -> Vec<usize> {
    let mut counts = vec![0usize; alphabet];
    for &x in seq {
        counts[x] += 1;
    }
    counts
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Validates a pmf: finite, nonnegative, summing to 1 within `1e-9`.
pub fn check_pmf(pmf: &[f64], what: &str) -> Result<()> {
    if pmf.is_empty() {
        return Err(Error::invalid(format!("{what}: empty pmf")));
    }
    if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::invalid(format!("{what}: entries must be finite and >= 0")));
    }
    let s: f64 = pmf.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{what}: sums to {s}, not 1")));
    }
    Ok(())
}
