//! Truncated Fock space over the free monoid.
//!
//! The basis is every word of length at most `N` in degree-lexicographic
//! order. Shifts annihilate top-level words, so they are only isometric on
//! the interior (words of length at most `N - 1`).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemonoid::{enumerate_words, word_count, Letter, Word};
use crate::linalg::{zeros, CMat, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockTruncation {
    pub d: usize,
    pub n: usize,
}

impl FockTruncation {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        Ok(FockTruncation { d, n })
    }

    pub fn dim(&self) -> usize {
        word_count(self.d, self.n)
    }

    /// Dimension of the interior, the span of words of length at most `N - 1`.
    pub fn interior_dim(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            word_count(self.d, self.n - 1)
        }
    }

    pub fn basis(&self) -> Vec<Word> {
        enumerate_words(self.d, self.n)
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        (w.len() <= self.n && w.max_letter() <= self.d).then(|| w.index(self.d))
    }

    fn check_letter(&self, k: Letter) -> Result<()> {
        if k == 0 || k as usize > self.d {
            return Err(Error::LetterOutOfRange {
                letter: k as usize,
                d: self.d,
            });
        }
        Ok(())
    }
}

/// Coordinate-format sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Writes `row,col,re,im` lines with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["row", "col", "re", "im"])?;
        for &(r, c, v) in &self.entries {
            wtr.serialize((r, c, v.re, v.im))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftFamily {
    Left,
    Right,
}

fn shift_matrix(k: Letter, t: &FockTruncation, family: ShiftFamily) -> Result<SparseMatrix> {
    t.check_letter(k)?;
    let basis = t.basis();
    let entries = basis
        .iter()
        .enumerate()
        .filter(|(_, w)| w.len() < t.n)
        .map(|(col, w)| {
            let image = match family {
                ShiftFamily::Left => w.prepend(k),
                ShiftFamily::Right => w.append(k),
            };
            (image.index(t.d), col, ONE)
        })
        .collect();
    Ok(SparseMatrix {
        nrows: t.dim(),
        ncols: t.dim(),
        entries,
    })
}

/// `L_k e_α = e_{kα}`, zero on words of length `N`.
pub fn left_shift_matrix(k: Letter, t: &FockTruncation) -> Result<SparseMatrix> {
    shift_matrix(k, t, ShiftFamily::Left)
}

/// `R_k e_α = e_{αk}`, zero on words of length `N`.
pub fn right_shift_matrix(k: Letter, t: &FockTruncation) -> Result<SparseMatrix> {
    shift_matrix(k, t, ShiftFamily::Right)
}

/// Permutation `e_α ↦ e_{α†}`.
pub fn transpose_unitary(t: &FockTruncation) -> SparseMatrix {
    let entries = t
        .basis()
        .iter()
        .enumerate()
        .map(|(col, w)| (w.transpose().index(t.d), col, ONE))
        .collect();
    SparseMatrix {
        nrows: t.dim(),
        ncols: t.dim(),
        entries,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub truncation: FockTruncation,
    pub coefficients: Vec<C64>,
}

impl FockVector {
    pub fn zero(t: FockTruncation) -> Self {
        FockVector {
            truncation: t,
            coefficients: vec![ZERO; t.dim()],
        }
    }

    /// The basis vector `e_w`.
    pub fn basis(t: FockTruncation, w: &Word) -> Result<Self> {
        Self::from_terms(t, &[(w.clone(), ONE)])
    }

    pub fn from_terms(t: FockTruncation, terms: &[(Word, C64)]) -> Result<Self> {
        let mut v = Self::zero(t);
        for (w, a) in terms {
            if w.max_letter() > t.d {
                return Err(Error::LetterOutOfRange {
                    letter: w.max_letter(),
                    d: t.d,
                });
            }
            let i = t.index_of(w).ok_or(Error::TruncationOverflow {
                needed: w.len(),
                level: t.n,
            })?;
            v.coefficients[i] += *a;
        }
        Ok(v)
    }

    pub fn coefficient(&self, w: &Word) -> C64 {
        self.truncation
            .index_of(w)
            .map_or(ZERO, |i| self.coefficients[i])
    }

    /// Nonzero coefficients with their words, in basis order.
    pub fn support(&self) -> Vec<(Word, C64)> {
        self.truncation
            .basis()
            .into_iter()
            .zip(self.coefficients.iter().copied())
            .filter(|(_, a)| *a != ZERO)
            .collect()
    }

    /// Length of the longest word carrying a nonzero coefficient.
    pub fn max_support_len(&self) -> usize {
        self.support().iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }
}

/// Applies `L^w` (or `R^w = R_{w_1} ⋯ R_{w_k}`) to `v`.
///
/// `L^w e_β = e_{wβ}` and `R^w e_β = e_{β w†}`. Terms pushed past level `N`
/// are dropped, or rejected when `strict` is set.
pub fn apply_word(
    family: ShiftFamily,
    w: &Word,
    v: &FockVector,
    strict: bool,
) -> Result<FockVector> {
    let t = v.truncation;
    if w.max_letter() > t.d {
        return Err(Error::LetterOutOfRange {
            letter: w.max_letter(),
            d: t.d,
        });
    }
    let needed = w.len() + v.max_support_len();
    if strict && needed > t.n {
        return Err(Error::TruncationOverflow { needed, level: t.n });
    }
    let tail = w.transpose();
    let mut out = FockVector::zero(t);
    for (beta, a) in v.support() {
        if beta.len() + w.len() > t.n {
            continue;
        }
        let image = match family {
            ShiftFamily::Left => w.concat(&beta),
            ShiftFamily::Right => beta.concat(&tail),
        };
        out.coefficients[image.index(t.d)] += a;
    }
    Ok(out)
}

/// Dense matrix of `Σ_w a_w S^w` for a polynomial symbol in the shifts of
/// `family`, truncated at level `N`.
pub fn multiplier_matrix(
    family: ShiftFamily,
    symbol: &[(Word, C64)],
    t: &FockTruncation,
) -> Result<CMat> {
    let dim = t.dim();
    let mut m = zeros(dim, dim);
    for (col, beta) in t.basis().iter().enumerate() {
        let e = FockVector::basis(*t, beta)?;
        for (w, a) in symbol {
            let img = apply_word(family, w, &e, false)?;
            for (row, v) in img.coefficients.iter().enumerate() {
                if *v != ZERO {
                    m[(row, col)] += *a * *v;
                }
            }
        }
    }
    Ok(m)
}
