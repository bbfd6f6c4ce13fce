//! Achievable-region evaluation.

mod binary;
mod search;
mod theorems;

pub use binary::{
    conv, example_separation_witness, hb, interference_free_tau, SeparationExample, SeparationReport,
};
pub use search::{grid_search, search_distributions, GridSearchConfig, GridSearchResult};
pub use theorems::{
    holevo_information, theorem1_region, theorem1_terms, theorem2_bounds, theorem3_region, theorem3_terms,
    usb_region, NccRateParams, Theorem1Terms, Theorem2Report, Theorem3Terms,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rates: [f64; 3],
    pub costs: [f64; 3],
}

impl RatePoint {
    pub fn new(rates: [f64; 3], costs: [f64; 3]) -> Result<Self> {
        if rates.iter().chain(&costs).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("rates and costs must be finite and nonnegative"));
        }
        Ok(RatePoint { rates, costs })
    }

    /// Rates with unconstrained (infinite) cost budgets.
    pub fn rates_only(rates: [f64; 3]) -> Result<Self> {
        if rates.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("rates must be finite and nonnegative"));
        }
        Ok(RatePoint {
            rates,
            costs: [f64::INFINITY; 3],
        })
    }
}

/// `coefficients · R <= rhs`. `raw_rhs` keeps the value before clamping at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub tag: String,
    pub coefficients: [f64; 3],
    pub rhs: f64,
    pub raw_rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, tag: impl Into<String>, coefficients: [f64; 3], raw_rhs: f64) -> Self {
        Constraint {
            name: name.into(),
            tag: tag.into(),
            coefficients,
            rhs: raw_rhs.max(0.0),
            raw_rhs,
        }
    }

    pub fn clamped(&self) -> bool {
        self.raw_rhs < 0.0
    }

    pub fn slack(&self, rates: &[f64; 3]) -> f64 {
        self.rhs - dot(&self.coefficients, rates)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub label: String,
    pub constraints: Vec<Constraint>,
    /// `E[κ_j(X_j)]`; a point is admissible only if its cost budgets cover these.
    pub expected_costs: [f64; 3],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RegionSpec {
    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.constraints
            .iter()
            .filter(|c| c.clamped())
            .map(|c| format!("{}: right-hand side {:.6e} clamped to 0", c.name, c.raw_rhs))
            .collect()
    }

    pub fn rates_feasible(&self, rates: &[f64; 3], tol: f64) -> bool {
        rates.iter().all(|&r| r >= -tol) && self.constraints.iter().all(|c| c.slack(rates) >= -tol)
    }

    pub fn contains(&self, p: &RatePoint, tol: f64) -> bool {
        self.rates_feasible(&p.rates, tol)
            && p.costs.iter().zip(&self.expected_costs).all(|(t, e)| *t >= e - tol)
    }

    /// Smallest constraint slack at `rates` (negative when violated).
    pub fn min_slack(&self, rates: &[f64; 3]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.slack(rates))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertices of the rate polytope (constraints plus `R_j >= 0`).
    pub fn corner_points(&self) -> Vec<[f64; 3]> {
        let mut planes: Vec<([f64; 3], f64)> = self.constraints.iter().map(|c| (c.coefficients, c.rhs)).collect();
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = -1.0;
            planes.push((e, 0.0));
        }
        let mut out: Vec<[f64; 3]> = Vec::new();
        for a in 0..planes.len() {
            for b in (a + 1)..planes.len() {
                for c in (b + 1)..planes.len() {
                    let Some(x) = solve3(&planes[a], &planes[b], &planes[c]) else { continue };
                    if !planes.iter().all(|(co, r)| dot(co, &x) <= r + 1e-9) {
                        continue;
                    }
                    let x = x.map(|v| if v.abs() < 1e-13 { 0.0 } else { v });
                    if !out.iter().any(|y| y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9)) {
                        out.push(x);
                    }
                }
            }
        }
        out.sort_by(|p, q| p.iter().zip(q).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// Maximum of `weights · R` over the polytope and a maximizing corner.
    pub fn max_weighted_sum(&self, weights: [f64; 3]) -> (f64, [f64; 3]) {
        let mut best = (0.0, [0.0; 3]);
        for v in self.corner_points() {
            let val = dot(&weights, &v);
            if val > best.0 + 1e-15 {
                best = (val, v);
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,name,tag,c1,c2,c3,rhs,raw_rhs,clamped\n");
        for c in &self.constraints {
            s.push_str(&format!(
                "constraint,{},{},{},{},{},{:.17e},{:.17e},{}\n",
                csv_field(&c.name),
                csv_field(&c.tag),
                c.coefficients[0],
                c.coefficients[1],
                c.coefficients[2],
                c.rhs,
                c.raw_rhs,
                c.clamped()
            ));
        }
        for (j, e) in self.expected_costs.iter().enumerate() {
            s.push_str(&format!("cost,tau{} >= E[k{}(X{})],cost,,,,{e:.17e},{e:.17e},false\n", j + 1, j + 1, j + 1));
        }
        s.push_str("\nsection,R1,R2,R3\n");
        for v in self.corner_points() {
            s.push_str(&format!("corner,{:.17e},{:.17e},{:.17e}\n", v[0], v[1], v[2]));
        }
        s
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(a: &([f64; 3], f64), b: &([f64; 3], f64), c: &([f64; 3], f64)) -> Option<[f64; 3]> {
    let m = [a.0, b.0, c.0];
    let d = det3(m);
    if d.abs() < 1e-12 {
        return None;
    }
    let rhs = [a.1, b.1, c.1];
    let mut x = [0.0; 3];
    for (col, xv) in x.iter_mut().enumerate() {
        let mut mm = m;
        for row in 0..3 {
            mm[row][col] = rhs[row];
        }
        *xv = det3(mm) / d;
    }
    Some(x)
}
