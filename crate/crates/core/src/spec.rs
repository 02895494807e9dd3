//! JSON measure specifications.
//!
//! ```json
//! { "d": 2, "depth": 8, "level": 8, "kind": "scalar_point", "z": [[1, 0], [0, 0]] }
//! ```
//!
//! `kind` is one of `vacuum`, `vector_state`, `scalar_point`, `classical`,
//! `moments` or `sum`. Words are written as in [`Word::encode`]: `"e"` for
//! the empty word, `"121"` for `d ≤ 9`, `"1.10.2"` otherwise. `level` is the
//! Gram level at which the measure is meant to be checked and defaults to
//! `depth`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemonoid::Word;
use crate::linalg::C64;
use crate::ncmeasure::{
    from_classical, from_scalar_point, nc_lebesgue, vector_state_moments, ClassicalMeasureSpec,
    MomentTable,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub word: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    /// NC Lebesgue measure `m`.
    Vacuum,
    /// `μ(a) = ⟨x, a(L) y⟩`; `y` defaults to `x`.
    VectorState {
        x: Vec<Term>,
        #[serde(default)]
        y: Option<Vec<Term>>,
    },
    /// Point evaluation at a row contraction in `𝔹^d_1` or on its boundary,
    /// given as `[re, im]` pairs.
    ScalarPoint { z: Vec<[f64; 2]> },
    /// Circle measure, `d = 1` only.
    Classical(ClassicalMeasureSpec),
    /// Raw moments `μ(L^α)`; positivity is not implied.
    Moments { entries: Vec<Term> },
    /// Weighted sum of measures.
    Sum { parts: Vec<SumPart> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumPart {
    #[serde(default = "unit")]
    pub weight: f64,
    #[serde(flatten)]
    pub measure: MeasureKind,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub d: usize,
    pub depth: usize,
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(flatten)]
    pub measure: MeasureKind,
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Spec(msg) => Error::Spec(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn level(&self) -> usize {
        self.level.unwrap_or(self.depth)
    }

    /// Moment table to the spec's own depth.
    pub fn build(&self) -> Result<MomentTable> {
        self.build_to(self.depth)
    }

    /// Moment table to an explicit depth, overriding `depth`. Raw `moments`
    /// specs cannot be extended beyond the words they list, so for them the
    /// missing moments are zero.
    pub fn build_to(&self, depth: usize) -> Result<MomentTable> {
        if self.d == 0 {
            return Err(Error::Spec("d must be at least 1".into()));
        }
        build_kind(&self.measure, self.d, depth)
    }
}

fn parse_terms(terms: &[Term], d: usize) -> Result<Vec<(Word, C64)>> {
    terms
        .iter()
        .map(|t| {
            let w = Word::decode(&t.word, d)
                .map_err(|e| Error::Spec(format!("bad word {:?}: {e}", t.word)))?;
            Ok((w, C64::new(t.re, t.im)))
        })
        .collect()
}

fn build_kind(kind: &MeasureKind, d: usize, depth: usize) -> Result<MomentTable> {
    match kind {
        MeasureKind::Vacuum => Ok(nc_lebesgue(d, depth)),
        MeasureKind::VectorState { x, y } => {
            let xs = parse_terms(x, d)?;
            let ys = match y {
                Some(y) => parse_terms(y, d)?,
                None => xs.clone(),
            };
            vector_state_moments(d, &xs, &ys, depth)
        }
        MeasureKind::ScalarPoint { z } => {
            if z.len() != d {
                return Err(Error::Spec(format!("scalar point has {} entries, d = {d}", z.len())));
            }
            let z: Vec<C64> = z.iter().map(|p| C64::new(p[0], p[1])).collect();
            from_scalar_point(&z, depth)
        }
        MeasureKind::Classical(spec) => {
            if d != 1 {
                return Err(Error::Spec("classical measures need d = 1".into()));
            }
            from_classical(spec, depth)
        }
        MeasureKind::Moments { entries } => {
            let entries = parse_terms(entries, d)?;
            MomentTable::from_entries(d, depth, entries.into_iter().filter(|(w, _)| w.len() <= depth))
        }
        MeasureKind::Sum { parts } => {
            let mut total = MomentTable::zero(d, depth);
            for p in parts {
                total = total.add(&build_kind(&p.measure, d, depth)?.scale(p.weight))?;
            }
            Ok(total)
        }
    }
}
