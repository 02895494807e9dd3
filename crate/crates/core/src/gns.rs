//! Finite-level GNS construction.
//!
//! The GNS inner product on free polynomials is `⟨a₁, a₂⟩ = μ(a₁* a₂)`. At
//! level `N` it is represented by the Gram matrix over words of length at
//! most `N`. The quotient by the null space is realized through a Hermitian
//! eigendecomposition `G = V Λ V*`: the class of the word `α` gets the
//! coordinates `Λ_r^{1/2} V_r* e_α`, where `r` counts the eigenvalues above
//! the rank threshold. The Gram matrix is routinely singular (the null space
//! is the point), so no Cholesky factor is attempted.
//!
//! The GNS shifts are only trusted on classes of words of length at most
//! `N - 1`; every defect statistic is compressed to that interior subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemonoid::{enumerate_words, word_count, Letter, Word};
use crate::linalg::{
    adjoint, compress, hermitian_eigen, identity, op_norm, pseudo_inverse, range_basis, zeros,
    CMat, C64, ZERO,
};
use crate::ncmeasure::MomentTable;

/// Relative rank threshold applied to the largest Gram eigenvalue.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Gram matrix `G[α, β] = μ((L^α)* L^β)` over words of length at most `n`.
pub fn gram_matrix(mu: &MomentTable, n: usize) -> Result<CMat> {
    if n > mu.depth() {
        return Err(Error::DepthExceeded {
            needed: n,
            available: mu.depth(),
        });
    }
    let d = mu.d();
    let words = enumerate_words(d, n);
    let dim = words.len();
    let mut g = zeros(dim, dim);
    // only nonzero moments contribute: G[α, αγ] = μ(L^γ), G[αγ, α] = conj
    let moments: Vec<(&Word, &C64)> = mu.nonzero().filter(|(w, _)| w.len() <= n).collect();
    for (i, alpha) in words.iter().enumerate() {
        for &(gamma, &v) in &moments {
            if alpha.len() + gamma.len() > n {
                continue;
            }
            let j = alpha.concat(gamma).index(d);
            g[(i, j)] = v;
            if j != i {
                g[(j, i)] = v.conj();
            }
        }
    }
    Ok(g)
}

/// Quotient of the level-`N` polynomials by the GNS null space.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    pub mu: MomentTable,
    pub n: usize,
    pub gram: CMat,
    /// Absolute eigenvalue threshold separating the quotient from the null space.
    pub rank_tol: f64,
    /// All Gram eigenvalues, nondecreasing.
    pub eigenvalues: Vec<f64>,
    /// `r × dim` factor with `gram ≈ factor* factor`; column `i` is the class
    /// of the `i`-th basis word.
    pub factor: CMat,
}

impl GnsSpace {
    pub fn d(&self) -> usize {
        self.mu.d()
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factor.nrows()
    }

    pub fn interior_dim(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            word_count(self.d(), self.n - 1)
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Quotient coordinates of the class `L^α + N_μ`.
    pub fn class_of(&self, w: &Word) -> Option<CMat> {
        if w.len() > self.n || w.max_letter() > self.d() {
            return None;
        }
        let i = w.index(self.d());
        Some(self.factor.get(.., i..i + 1).to_owned())
    }

    /// The cyclic vector `I + N_μ`.
    pub fn cyclic(&self) -> CMat {
        self.factor.get(.., 0..1).to_owned()
    }

    /// Singular value cutoff for factors built from columns of `factor`.
    fn factor_cutoff(&self) -> f64 {
        self.rank_tol.sqrt()
    }

    /// GNS-norm distance from the class of `∅` to the span of the classes of
    /// nonempty words.
    pub fn column_extreme_distance(&self) -> Result<f64> {
        if self.rank() == 0 {
            return Ok(0.0);
        }
        let cyc = self.cyclic();
        let rest = self.factor.get(.., 1..).to_owned();
        let basis = range_basis(&rest, self.factor_cutoff())?;
        let residual = &cyc - &basis * (basis.adjoint() * &cyc);
        Ok(residual.norm_l2())
    }

    pub fn row_isometry(&self) -> Result<GnsRowIsometry> {
        gns_row_isometry(self)
    }
}

/// Builds the quotient. `rank_tol` is relative to the largest Gram
/// eigenvalue (default [`DEFAULT_RANK_TOL`]).
pub fn gns_space(mu: &MomentTable, n: usize, rank_tol: Option<f64>) -> Result<GnsSpace> {
    let gram = gram_matrix(mu, n)?;
    let (eigenvalues, vectors) = hermitian_eigen(&gram)?;
    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = rank_tol.unwrap_or(DEFAULT_RANK_TOL) * scale;
    let dim = gram.nrows();
    let min = eigenvalues.first().copied().unwrap_or(0.0);
    if min < -tol * dim as f64 {
        return Err(Error::NotPositive(min));
    }
    let kept: Vec<usize> = (0..dim).filter(|&i| eigenvalues[i] > tol).collect();
    let mut factor = zeros(kept.len(), dim);
    for (row, &k) in kept.iter().enumerate() {
        let s = eigenvalues[k].sqrt();
        for col in 0..dim {
            factor[(row, col)] = vectors[(col, k)].conj() * s;
        }
    }
    Ok(GnsSpace {
        mu: mu.clone(),
        n,
        gram,
        rank_tol: tol,
        eigenvalues,
        factor,
    })
}

/// The GNS row isometry `Π = (Π_1, …, Π_d)` in quotient coordinates.
#[derive(Clone, Debug)]
pub struct GnsRowIsometry {
    pub shifts: Vec<CMat>,
    /// Orthonormal basis of the span of classes of words of length ≤ N − 1.
    pub interior: CMat,
}

impl GnsRowIsometry {
    pub fn d(&self) -> usize {
        self.shifts.len()
    }

    pub fn interior_dim(&self) -> usize {
        self.interior.ncols()
    }

    /// `max_{k,j} ‖Π_k* Π_j − δ_kj I‖` compressed to the interior.
    pub fn isometry_defect(&self) -> Result<f64> {
        let r = self.interior.nrows();
        let mut worst: f64 = 0.0;
        for (k, pk) in self.shifts.iter().enumerate() {
            for (j, pj) in self.shifts.iter().enumerate() {
                let mut m = adjoint(pk) * pj;
                if k == j {
                    m -= identity(r);
                }
                worst = worst.max(op_norm(&compress(&m, &self.interior))?);
            }
        }
        Ok(worst)
    }

    /// `‖I − Σ_k Π_k Π_k*‖` compressed to the interior.
    pub fn cuntz_defect(&self) -> Result<f64> {
        let r = self.interior.nrows();
        let mut m = identity(r);
        for p in &self.shifts {
            m -= p * adjoint(p);
        }
        op_norm(&compress(&m, &self.interior))
    }

    /// `Π^α v = Π_{α_1} ⋯ Π_{α_k} v`.
    pub fn apply_word(&self, w: &Word, v: &CMat) -> CMat {
        w.letters()
            .iter()
            .rev()
            .fold(v.clone(), |acc, &k| &self.shifts[k as usize - 1] * acc)
    }

    /// The compressed functional `α ↦ ⟨v, Π^α v⟩` for `|α| ≤ depth`.
    pub fn compressed_measure(&self, v: &CMat, depth: usize) -> Result<MomentTable> {
        let d = self.d();
        let mut entries = Vec::new();
        // level-by-level: Π^{kβ} v = Π_k Π^β v
        let mut level: Vec<(Word, CMat)> = vec![(Word::empty(), v.clone())];
        for len in 0..=depth {
            for (w, pv) in &level {
                entries.push((w.clone(), (v.adjoint() * pv)[(0, 0)]));
            }
            if len == depth {
                break;
            }
            let mut next = Vec::with_capacity(level.len() * d);
            for (w, pv) in &level {
                for k in 1..=d as Letter {
                    next.push((w.prepend(k), &self.shifts[k as usize - 1] * pv));
                }
            }
            level = next;
        }
        MomentTable::from_entries(d, depth, entries)
    }
}

/// Represents `Π_k` by least squares: the class of `α` (|α| ≤ N − 1) maps to
/// the class of `kα`; the orthogonal complement of the interior maps to 0.
pub fn gns_row_isometry(space: &GnsSpace) -> Result<GnsRowIsometry> {
    let d = space.d();
    let r = space.rank();
    let interior_dim = space.interior_dim();
    let cutoff = space.factor_cutoff();
    let f_int = space.factor.get(.., ..interior_dim).to_owned();
    let pinv = pseudo_inverse(&f_int, cutoff)?;
    let interior_words = enumerate_words(d, space.n.saturating_sub(1));
    let mut shifts = Vec::with_capacity(d);
    for k in 1..=d as Letter {
        let mut f_shift = zeros(r, interior_dim);
        for (col, w) in interior_words.iter().enumerate().take(interior_dim) {
            let j = w.prepend(k).index(d);
            for row in 0..r {
                f_shift[(row, col)] = space.factor[(row, j)];
            }
        }
        shifts.push(&f_shift * &pinv);
    }
    let interior = range_basis(&f_int, cutoff)?;
    Ok(GnsRowIsometry { shifts, interior })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WanderingReport {
    pub is_wandering: bool,
    pub max_violation: f64,
}

/// Tests `⟨v, Π^α v⟩ = 0` for `1 ≤ |α| ≤ depth`.
pub fn wandering_test(
    iso: &GnsRowIsometry,
    v: &CMat,
    depth: usize,
    tol: f64,
) -> Result<WanderingReport> {
    let compressed = iso.compressed_measure(v, depth)?;
    let max_violation = compressed
        .nonzero()
        .filter(|(w, _)| !w.is_empty())
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    let norm = v.norm_l2();
    Ok(WanderingReport {
        is_wandering: max_violation <= tol && norm > 0.0,
        max_violation,
    })
}

/// Scalar diagnostics of the GNS representation at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnsDiagnostics {
    pub gram_min_eig: f64,
    pub rank: usize,
    pub column_extreme_distance: f64,
    pub cuntz_defect: f64,
    pub isometry_defect: f64,
}

pub fn diagnostics(space: &GnsSpace) -> Result<GnsDiagnostics> {
    let iso = space.row_isometry()?;
    Ok(GnsDiagnostics {
        gram_min_eig: space.min_eigenvalue(),
        rank: space.rank(),
        column_extreme_distance: space.column_extreme_distance()?,
        cuntz_defect: iso.cuntz_defect()?,
        isometry_defect: iso.isometry_defect()?,
    })
}

/// Quotient-coordinate GNS inner product.
pub fn gns_inner(a: &CMat, b: &CMat) -> C64 {
    if a.nrows() == 0 {
        return ZERO;
    }
    (a.adjoint() * b)[(0, 0)]
}
