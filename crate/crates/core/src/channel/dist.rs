use serde::{Deserialize, Serialize};

use super::CqChannel;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::typicality::check_pmf;

/// `p_X1 · p_V2X2 · p_V3X3` with `V2, V3 ∈ F_q`. Joint tables are indexed `[v][x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    field: PrimeField,
    p_x1: Vec<f64>,
    p_vx: [Vec<Vec<f64>>; 2],
}

fn flatten(t: &[Vec<f64>]) -> Vec<f64> {
    t.iter().flatten().copied().collect()
}

fn check_table(t: &[Vec<f64>], rows: usize, what: &str) -> Result<()> {
    if t.len() != rows {
        return Err(Error::invalid(format!("{what}: expected {rows} rows, got {}", t.len())));
    }
    let w = t.first().map_or(0, |r| r.len());
    if w == 0 || t.iter().any(|r| r.len() != w) {
        return Err(Error::invalid(format!("{what}: ragged or empty table")));
    }
    check_pmf(&flatten(t), what)
}

fn row_sums(t: &[Vec<f64>]) -> Vec<f64> {
    t.iter().map(|r| r.iter().sum()).collect()
}

fn col_sums(t: &[Vec<f64>]) -> Vec<f64> {
    let w = t.first().map_or(0, |r| r.len());
    (0..w).map(|x| t.iter().map(|r| r[x]).sum()).collect()
}

/// Distribution of `a ⊕ b` over F_q.
pub(crate) fn convolve(field: PrimeField, a: &[f64], b: &[f64]) -> Vec<f64> {
    let q = field.size();
    let mut out = vec![0.0; q];
    for (x, &pa) in a.iter().enumerate() {
        for (y, &pb) in b.iter().enumerate() {
            out[(x + y) % q] += pa * pb;
        }
    }
    out
}

impl InputDistribution {
    pub fn new(field: PrimeField, p_x1: Vec<f64>, p_v2x2: Vec<Vec<f64>>, p_v3x3: Vec<Vec<f64>>) -> Result<Self> {
        check_pmf(&p_x1, "p_X1")?;
        check_table(&p_v2x2, field.size(), "p_V2X2")?;
        check_table(&p_v3x3, field.size(), "p_V3X3")?;
        Ok(InputDistribution {
            field,
            p_x1,
            p_vx: [p_v2x2, p_v3x3],
        })
    }

    /// `V_j = X_j` with `X_j` distributed as `p_vj` over F_q.
    pub fn identity_aux(field: PrimeField, p_x1: Vec<f64>, p_v2: &[f64], p_v3: &[f64]) -> Result<Self> {
        let diag = |p: &[f64]| -> Vec<Vec<f64>> {
            (0..p.len())
                .map(|v| (0..p.len()).map(|x| if v == x { p[v] } else { 0.0 }).collect())
                .collect()
        };
        Self::new(field, p_x1, diag(p_v2), diag(p_v3))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p_x1(&self) -> &[f64] {
        &self.p_x1
    }

    /// Joint table `p_{V_j X_j}[v][x]` for user `j ∈ {2, 3}`.
    pub fn p_vx(&self, j: usize) -> &[Vec<f64>] {
        &self.p_vx[j - 2]
    }

    pub fn p_v(&self, j: usize) -> Vec<f64> {
        row_sums(self.p_vx(j))
    }

    pub fn p_x(&self, j: usize) -> Vec<f64> {
        match j {
            1 => self.p_x1.clone(),
            _ => col_sums(self.p_vx(j)),
        }
    }

    /// Distribution of `U = V2 ⊕ V3`.
    pub fn p_u(&self) -> Vec<f64> {
        convolve(self.field, &self.p_v(2), &self.p_v(3))
    }

    pub fn check_against(&self, channel: &CqChannel) -> Result<()> {
        let a = channel.alphabets();
        let widths = [self.p_x1.len(), self.p_vx[0][0].len(), self.p_vx[1][0].len()];
        if widths != a {
            return Err(Error::invalid(format!(
                "distribution input alphabets {widths:?} differ from channel alphabets {a:?}"
            )));
        }
        Ok(())
    }

    /// `E[κ_j(X_j)]` for the three users.
    pub fn expected_costs(&self, channel: &CqChannel) -> Result<[f64; 3]> {
        self.check_against(channel)?;
        Ok(expected_costs(channel, [&self.p_x(1), &self.p_x(2), &self.p_x(3)]))
    }
}

pub(crate) fn expected_costs(channel: &CqChannel, marginals: [&[f64]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, p) in marginals.iter().enumerate() {
        out[j] = p.iter().zip(channel.costs(j)).map(|(a, b)| a * b).sum();
    }
    out
}

/// `p_X1 · p_U2V2X2 · p_U3V3X3` with `U2, U3 ∈ F_q`. Tables are indexed `[u][v][x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitInputDistribution {
    field: PrimeField,
    p_x1: Vec<f64>,
    p_uvx: [Vec<Vec<Vec<f64>>>; 2],
}

impl SplitInputDistribution {
    pub fn new(
        field: PrimeField,
        p_x1: Vec<f64>,
        p_u2v2x2: Vec<Vec<Vec<f64>>>,
        p_u3v3x3: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_pmf(&p_x1, "p_X1")?;
        for (t, what) in [(&p_u2v2x2, "p_U2V2X2"), (&p_u3v3x3, "p_U3V3X3")] {
            if t.len() != field.size() {
                return Err(Error::invalid(format!("{what}: expected {} rows", field.size())));
            }
            let v = t[0].len();
            let x = t[0].first().map_or(0, |r| r.len());
            if v == 0 || x == 0 || t.iter().any(|m| m.len() != v || m.iter().any(|r| r.len() != x)) {
                return Err(Error::invalid(format!("{what}: ragged or empty table")));
            }
            let flat: Vec<f64> = t.iter().flatten().flatten().copied().collect();
            check_pmf(&flat, what)?;
        }
        Ok(SplitInputDistribution {
            field,
            p_x1,
            p_uvx: [p_u2v2x2, p_u3v3x3],
        })
    }

    /// Trivial `V_j`: tables are given as `p_{U_j X_j}[u][x]`.
    pub fn from_ux(field: PrimeField, p_x1: Vec<f64>, p_u2x2: &[Vec<f64>], p_u3x3: &[Vec<f64>]) -> Result<Self> {
        let lift = |t: &[Vec<f64>]| t.iter().map(|r| vec![r.clone()]).collect();
        Self::new(field, p_x1, lift(p_u2x2), lift(p_u3x3))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p_x1(&self) -> &[f64] {
        &self.p_x1
    }

    /// `p_{U_j X_j}[u][x]` for `j ∈ {2, 3}`.
    pub fn p_ux(&self, j: usize) -> Vec<Vec<f64>> {
        self.p_uvx[j - 2]
            .iter()
            .map(|m| col_sums(m))
            .collect()
    }

    pub fn p_u(&self, j: usize) -> Vec<f64> {
        row_sums(&self.p_ux(j))
    }

    pub fn p_x(&self, j: usize) -> Vec<f64> {
        match j {
            1 => self.p_x1.clone(),
            _ => col_sums(&self.p_ux(j)),
        }
    }

    /// Distribution of `W = U2 ⊕ U3`.
    pub fn p_w(&self) -> Vec<f64> {
        convolve(self.field, &self.p_u(2), &self.p_u(3))
    }

    /// Same `X_j` marginals with `U_j` collapsed to the point mass at 0.
    pub fn with_trivial_w(&self) -> Self {
        let collapse = |j: usize| -> Vec<Vec<f64>> {
            let px = self.p_x(j);
            (0..self.field.size())
                .map(|u| if u == 0 { px.clone() } else { vec![0.0; px.len()] })
                .collect()
        };
        Self::from_ux(self.field, self.p_x1.clone(), &collapse(2), &collapse(3)).expect("collapsed marginals stay valid")
    }

    pub fn check_against(&self, channel: &CqChannel) -> Result<()> {
        let a = channel.alphabets();
        let widths = [self.p_x1.len(), self.p_x(2).len(), self.p_x(3).len()];
        if widths != a {
            return Err(Error::invalid(format!(
                "distribution input alphabets {widths:?} differ from channel alphabets {a:?}"
            )));
        }
        Ok(())
    }

    pub fn expected_costs(&self, channel: &CqChannel) -> Result<[f64; 3]> {
        self.check_against(channel)?;
        Ok(expected_costs(channel, [&self.p_x(1), &self.p_x(2), &self.p_x(3)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_over_f3() {
        let f = PrimeField::new(3).unwrap();
        let p = convolve(f, &[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]);
        assert_eq!(p, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn marginals_and_sum_variable() {
        let f = PrimeField::binary();
        let d = InputDistribution::identity_aux(f, vec![0.9, 0.1], &[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!(d.p_v(2), vec![0.5, 0.5]);
        assert_eq!(d.p_x(3), vec![1.0, 0.0]);
        assert_eq!(d.p_u(), vec![0.5, 0.5]);
    }

    #[test]
    fn validation() {
        let f = PrimeField::binary();
        assert!(InputDistribution::new(f, vec![1.0], vec![vec![0.5]], vec![vec![0.5], vec![0.5]]).is_err());
        assert!(InputDistribution::new(f, vec![0.5, 0.6], vec![vec![0.5], vec![0.5]], vec![vec![0.5], vec![0.5]]).is_err());
        assert!(SplitInputDistribution::from_ux(f, vec![1.0], &[vec![0.5, 0.5]], &[vec![1.0], vec![0.0]]).is_err());
    }

    #[test]
    fn trivial_w_keeps_input_marginals() {
        let f = PrimeField::binary();
        let d = SplitInputDistribution::from_ux(
            f,
            vec![0.7, 0.3],
            &[vec![0.1, 0.2], vec![0.3, 0.4]],
            &[vec![0.25, 0.25], vec![0.0, 0.5]],
        )
        .unwrap();
        let t = d.with_trivial_w();
        assert_eq!(t.p_w(), vec![1.0, 0.0]);
        for j in 1..=3 {
            assert_eq!(t.p_x(j), d.p_x(j));
        }
    }
}
