//! TOML channel-spec files.
//!
//! A file either names a built-in example or lists every state explicitly,
//! and may carry an input distribution:
//!
//! ```toml
//! [channel]
//! alphabets = [2, 1, 1]
//! output_dims = [2, 1, 1]
//! costs = [[0.0, 1.0], [0.0], [0.0]]
//!
//! [[channel.state]]
//! input = [0, 0, 0]
//! matrix = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
//!
//! [[channel.state]]
//! input = [1, 0, 0]
//! factors = [[[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]], [[[1.0, 0.0]]], [[[1.0, 0.0]]]]
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::channel::{example1_channel, example2_channel, CqChannel, InputDistribution, SplitInputDistribution};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{CMatrix, DensityOperator, C64};

/// Matrix entries as row-major rows of `[re, im]` pairs.
pub type MatrixText = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    Example1,
    Example2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSpec {
    pub name: ExampleName,
    pub delta1: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub input: [usize; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixText>,
    /// States on `Y1`, `Y2`, `Y3` whose tensor product is the output state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<MatrixText>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelTable {
    pub alphabets: [usize; 3],
    pub output_dims: [usize; 3],
    #[serde(default)]
    pub costs: Option<[Vec<f64>; 3]>,
    pub state: Vec<Spanned<StateEntry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    pub p_x1: Vec<f64>,
    /// `p(v_j, x_j)` with rows indexed by `v_j ∈ F_q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_v2x2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_v3x3: Option<Vec<Vec<f64>>>,
    /// `p(u_j, v_j, x_j)` indexed `[u][v][x]` with `u_j ∈ F_q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_u2v2x2: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_u3v3x3: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    #[serde(default)]
    example: Option<ExampleSpec>,
    #[serde(default)]
    channel: Option<ChannelTable>,
    #[serde(default)]
    distribution: Option<DistributionTable>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSpec {
    pub channel: CqChannel,
    pub example: Option<ExampleSpec>,
    pub distribution: Option<DistributionTable>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, offset: Option<usize>, message: impl Into<String>) -> Error {
    let (line, column) = match offset.map(|o| line_col(text, o)) {
        Some((l, c)) => (Some(l), Some(c)),
        None => (None, None),
    };
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn matrix_from_text(m: &MatrixText, dim: usize) -> std::result::Result<CMatrix, String> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(format!("matrix must be {dim} x {dim}"));
    }
    let data = m.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    CMatrix::from_vec(dim, data).map_err(|e| e.to_string())
}

fn state_from_entry(e: &StateEntry, dims: [usize; 3]) -> std::result::Result<DensityOperator, String> {
    let m = match (&e.matrix, &e.factors) {
        (Some(m), None) => matrix_from_text(m, dims.iter().product())?,
        (None, Some(f)) => {
            if f.len() != 3 {
                return Err("factors must list three matrices".into());
            }
            let mut acc = CMatrix::identity(1);
            for (m, &d) in f.iter().zip(&dims) {
                acc = acc.kron(&matrix_from_text(m, d)?);
            }
            acc
        }
        _ => return Err("a state needs exactly one of `matrix` or `factors`".into()),
    };
    DensityOperator::new(m).map_err(|e| e.to_string())
}

/// Parses a channel-spec document; every failure is an [`Error::Parse`].
pub fn parse_channel_spec(text: &str) -> Result<ParsedSpec> {
    let doc: SpecDocument =
        toml::from_str(text).map_err(|e| parse_error(text, e.span().map(|s| s.start), e.message()))?;
    let channel = match (&doc.example, &doc.channel) {
        (Some(ex), None) => match ex.name {
            ExampleName::Example1 => example1_channel(ex.delta1, ex.delta),
            ExampleName::Example2 => example2_channel(ex.delta1, ex.delta),
        }
        .map_err(|e| parse_error(text, None, e.to_string()))?,
        (None, Some(ch)) => build_channel(text, ch)?,
        _ => return Err(parse_error(text, None, "exactly one of [example] or [channel] is required")),
    };
    Ok(ParsedSpec {
        channel,
        example: doc.example,
        distribution: doc.distribution,
    })
}

fn build_channel(text: &str, ch: &ChannelTable) -> Result<CqChannel> {
    let count: usize = ch.alphabets.iter().product();
    let mut states: Vec<Option<DensityOperator>> = vec![None; count];
    for entry in &ch.state {
        let at = Some(entry.span().start);
        let e = entry.get_ref();
        if e.input.iter().zip(&ch.alphabets).any(|(x, a)| x >= a) {
            return Err(parse_error(text, at, format!("input {:?} outside the alphabets", e.input)));
        }
        let idx = (e.input[0] * ch.alphabets[1] + e.input[1]) * ch.alphabets[2] + e.input[2];
        if states[idx].is_some() {
            return Err(parse_error(text, at, format!("input {:?} listed twice", e.input)));
        }
        states[idx] = Some(state_from_entry(e, ch.output_dims).map_err(|m| parse_error(text, at, m))?);
    }
    let states = states
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| parse_error(text, None, "every input triple needs a state"))?;
    let costs = ch
        .costs
        .clone()
        .unwrap_or_else(|| ch.alphabets.map(|a| vec![0.0; a]));
    CqChannel::new(ch.alphabets, ch.output_dims, states, costs).map_err(|e| parse_error(text, None, e.to_string()))
}

impl DistributionTable {
    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.q.unwrap_or(2))
    }

    pub fn input_distribution(&self) -> Result<InputDistribution> {
        let need = |t: &Option<Vec<Vec<f64>>>, name: &str| {
            t.clone().ok_or_else(|| Error::invalid(format!("distribution needs {name}")))
        };
        InputDistribution::new(self.field()?, self.p_x1.clone(), need(&self.p_v2x2, "p_v2x2")?, need(&self.p_v3x3, "p_v3x3")?)
    }

    /// Uses the `p_u*v*x*` tables when present, otherwise `U_j = V_j`
    /// with the `p_v*x*` tables.
    pub fn split_distribution(&self) -> Result<SplitInputDistribution> {
        let field = self.field()?;
        match (&self.p_u2v2x2, &self.p_u3v3x3) {
            (Some(a), Some(b)) => SplitInputDistribution::new(field, self.p_x1.clone(), a.clone(), b.clone()),
            (None, None) => {
                let d = self.input_distribution()?;
                SplitInputDistribution::from_ux(field, self.p_x1.clone(), d.p_vx(2), d.p_vx(3))
            }
            _ => Err(Error::invalid("give both p_u2v2x2 and p_u3v3x3 or neither")),
        }
    }
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    let d = m.dim();
    out.push('[');
    for i in 0..d {
        out.push('[');
        for j in 0..d {
            let z = m[(i, j)];
            let _ = write!(out, "[{:.16e}, {:.16e}]", z.re, z.im);
            if j + 1 < d {
                out.push_str(", ");
            }
        }
        out.push(']');
        if i + 1 < d {
            out.push_str(", ");
        }
    }
    out.push(']');
}

fn write_list(out: &mut String, v: &[f64]) {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    let _ = write!(out, "[{}]", items.join(", "));
}

/// Explicit-state spec text with 17 significant digits per number.
pub fn channel_to_spec(channel: &CqChannel) -> String {
    let [a1, a2, a3] = channel.alphabets();
    let [d1, d2, d3] = channel.output_dims();
    let mut out = String::from("[channel]\n");
    let _ = writeln!(out, "alphabets = [{a1}, {a2}, {a3}]");
    let _ = writeln!(out, "output_dims = [{d1}, {d2}, {d3}]");
    out.push_str("costs = [");
    for j in 0..3 {
        write_list(&mut out, channel.costs(j));
        if j < 2 {
            out.push_str(", ");
        }
    }
    out.push_str("]\n");
    for x in channel.inputs() {
        let _ = writeln!(out, "\n[[channel.state]]\ninput = [{}, {}, {}]", x[0], x[1], x[2]);
        out.push_str("matrix = ");
        write_matrix(&mut out, channel.state(x).matrix());
        out.push('\n');
    }
    out
}
