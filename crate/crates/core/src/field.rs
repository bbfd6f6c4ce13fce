//! Prime-field arithmetic and small dense matrices over F_q.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{pow_saturating, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self> {
        if is_prime(q) {
            Ok(PrimeField { q })
        } else {
            Err(Error::invalid(format!("field size {q} is not prime")))
        }
    }

    pub fn binary() -> Self {
        PrimeField { q: 2 }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn size(&self) -> usize {
        self.q as usize
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.q
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - (b % self.q) as u64) % self.q as u64) as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn add_vec(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    /// Number of vectors in F_q^len, saturating.
    pub fn space_size(&self, len: usize) -> u128 {
        pow_saturating(self.q as u128, len)
    }

    /// Base-q digits of `index`, most significant coordinate first.
    pub fn vector_from_index(&self, mut index: u64, len: usize) -> Vec<u32> {
        let q = self.q as u64;
        let mut v = vec![0u32; len];
        for slot in v.iter_mut().rev() {
            *slot = (index % q) as u32;
            index /= q;
        }
        v
    }

    pub fn index_of(&self, v: &[u32]) -> u64 {
        v.iter().fold(0u64, |acc, &x| acc * self.q as u64 + x as u64)
    }

    pub fn random_vec<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<u32> {
        (0..len).map(|_| rng.gen_range(0..self.q)).collect()
    }

    pub fn check_vec(&self, v: &[u32], what: &str) -> Result<()> {
        match v.iter().find(|&&x| !self.contains(x)) {
            Some(x) => Err(Error::invalid(format!(
                "{what}: entry {x} outside F_{}",
                self.q
            ))),
            None => Ok(()),
        }
    }
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;
    fn try_from(q: u32) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.q
    }
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= q as u64 {
        if q as u64 % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Row-major matrix over F_q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FqMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FqMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FqMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            field.check_vec(r, "matrix row")?;
            data.extend_from_slice(r);
        }
        Ok(FqMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        FqMatrix {
            rows,
            cols,
            data: field.random_vec(rows * cols, rng),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Adds `coeffs · self` into `acc` (row-vector times matrix).
    pub fn accumulate_combination(&self, field: PrimeField, coeffs: &[u32], acc: &mut [u32]) {
        debug_assert_eq!(coeffs.len(), self.rows);
        debug_assert_eq!(acc.len(), self.cols);
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &g) in acc.iter_mut().zip(self.row(i)) {
                *a = field.add(*a, field.mul(c, g));
            }
        }
    }

    pub fn combination(&self, field: PrimeField, coeffs: &[u32]) -> Vec<u32> {
        let mut acc = vec![0; self.cols];
        self.accumulate_combination(field, coeffs, &mut acc);
        acc
    }
}
