//! NC Herglotz functions, free Cauchy transforms and the NC Szegő and
//! Herglotz kernels, evaluated as truncated power series at matrix points.
//!
//! Herglotz convention: `H_μ(Z) = μ(I)·I_n + 2 Σ_{α≠∅} Z^α conj(μ(L^{α†}))`.
//! With it the Cayley transform of the point mass at `(1, 0)` is exactly
//! `B(Z) = Z_1`, and `H_μ = 2·𝒞_μ(1) − μ(I)` when `d = 1`.
//!
//! Every evaluation returns a tail bound on the operator-norm truncation
//! error. The bounds use `Σ_{|α|=k} |μ(L^α)|² ≤ μ(I)²` for positive `μ` and
//! `‖[Z^α]_{|α|=k}‖ ≤ ‖Z‖_row^k`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemonoid::Word;
use crate::gns::gram_matrix;
use crate::linalg::{adjoint, identity, inverse, min_eigenvalue, op_norm, zeros, CMat, C64, ZERO};
use crate::ncmeasure::MomentTable;

/// A `d`-tuple of `n × n` matrices.
#[derive(Clone, Debug)]
pub struct MatrixPoint {
    mats: Vec<CMat>,
    row_norm: f64,
}

impl MatrixPoint {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
        if mats.is_empty() || mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::InvalidParameter(
                "matrix point needs d ≥ 1 square matrices of equal size".into(),
            ));
        }
        // ‖[Z_1 … Z_d]‖² = ‖Σ Z_k Z_k*‖
        let mut gram = zeros(n, n);
        for z in &mats {
            gram += z * adjoint(z);
        }
        let row_norm = op_norm(&gram)?.sqrt();
        Ok(MatrixPoint { mats, row_norm })
    }

    /// A point of `𝔹^d_1`.
    pub fn scalar(z: &[C64]) -> Result<Self> {
        Self::new(
            z.iter()
                .map(|&v| {
                    let mut m = zeros(1, 1);
                    m[(0, 0)] = v;
                    m
                })
                .collect(),
        )
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn row_norm(&self) -> f64 {
        self.row_norm
    }

    pub fn component(&self, k: usize) -> &CMat {
        &self.mats[k - 1]
    }

    fn require_strict(&self) -> Result<()> {
        if self.row_norm < 1.0 {
            Ok(())
        } else {
            Err(Error::NotStrictContraction(self.row_norm))
        }
    }
}

/// Memoized free monomials `Z^α = Z_{α_1} ⋯ Z_{α_k}`.
struct Monomials<'a> {
    point: &'a MatrixPoint,
    cache: HashMap<Word, CMat>,
}

impl<'a> Monomials<'a> {
    fn new(point: &'a MatrixPoint) -> Self {
        let mut cache = HashMap::new();
        cache.insert(Word::empty(), identity(point.n()));
        Monomials { point, cache }
    }

    fn get(&mut self, w: &Word) -> CMat {
        if let Some(m) = self.cache.get(w) {
            return m.clone();
        }
        let letters = w.letters();
        let (last, head) = letters.split_last().expect("empty word is cached");
        let prefix = self.get(&Word::from(head));
        let value = prefix * self.point.component(*last as usize);
        self.cache.insert(w.clone(), value.clone());
        value
    }
}

#[derive(Clone, Debug)]
pub struct KernelEvaluation {
    pub value: CMat,
    pub tail_bound: f64,
}

fn geometric_tail(r: f64, m: usize) -> f64 {
    r.powi(m as i32 + 1) / (1.0 - r)
}

fn check_d(mu: &MomentTable, z: &MatrixPoint) -> Result<()> {
    if mu.d() != z.d() {
        return Err(Error::DimensionMismatch(mu.d(), z.d()));
    }
    Ok(())
}

/// `H_μ(Z)` truncated at word length `m`.
pub fn herglotz_eval(mu: &MomentTable, z: &MatrixPoint, m: usize) -> Result<KernelEvaluation> {
    check_d(mu, z)?;
    z.require_strict()?;
    if m > mu.depth() {
        return Err(Error::DepthExceeded {
            needed: m,
            available: mu.depth(),
        });
    }
    let n = z.n();
    let mut powers = Monomials::new(z);
    let mut value = identity(n) * faer::Scale(C64::new(mu.mass(), 0.0));
    for (beta, v) in mu.nonzero() {
        if beta.is_empty() || beta.len() > m {
            continue;
        }
        let coeff = v.conj() * 2.0;
        value += powers.get(&beta.transpose()) * faer::Scale(coeff);
    }
    let tail_bound = 2.0 * mu.mass().abs() * geometric_tail(z.row_norm(), m);
    Ok(KernelEvaluation { value, tail_bound })
}

/// Right free Cauchy transform `(𝒞_μ p)(Z) = Σ_α Z^α μ((L^α)* p(L))` of a
/// free polynomial `p = Σ p̂_β L^β`, truncated at `|α| ≤ m`.
pub fn cauchy_eval(
    mu: &MomentTable,
    p: &[(Word, C64)],
    z: &MatrixPoint,
    m: usize,
) -> Result<KernelEvaluation> {
    check_d(mu, z)?;
    z.require_strict()?;
    let deg = p.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let needed = m.max(deg);
    if needed > mu.depth() {
        return Err(Error::DepthExceeded {
            needed,
            available: mu.depth(),
        });
    }
    // c_α = Σ_β p̂_β μ((L^α)* L^β)
    let mut coeffs: BTreeMap<Word, C64> = BTreeMap::new();
    for (beta, pb) in p {
        for split in 0..=beta.len() {
            let alpha = Word::from(&beta.letters()[..split]);
            if alpha.len() > m {
                break;
            }
            let gamma = Word::from(&beta.letters()[split..]);
            *coeffs.entry(alpha).or_insert(ZERO) += pb * mu.moment(&gamma);
        }
        for (gamma, v) in mu.nonzero() {
            if gamma.is_empty() || beta.len() + gamma.len() > m {
                continue;
            }
            *coeffs.entry(beta.concat(gamma)).or_insert(ZERO) += pb * v.conj();
        }
    }
    let n = z.n();
    let mut powers = Monomials::new(z);
    let mut value = zeros(n, n);
    for (alpha, c) in &coeffs {
        if *c != ZERO {
            value += powers.get(alpha) * faer::Scale(*c);
        }
    }
    let mut p_norm_sq = ZERO;
    for (a, pa) in p {
        for (b, pb) in p {
            p_norm_sq += pa.conj() * pb * mu.pair(a, b);
        }
    }
    let tail_bound =
        mu.mass().max(0.0).sqrt() * p_norm_sq.re.max(0.0).sqrt() * geometric_tail(z.row_norm(), m);
    Ok(KernelEvaluation { value, tail_bound })
}

/// NC Szegő kernel `K(Z, W)[P] = Σ_{|α|≤m} Z^α P (W^α)*`.
pub fn szego_kernel_eval(
    z: &MatrixPoint,
    w: &MatrixPoint,
    p: &CMat,
    m: usize,
) -> Result<KernelEvaluation> {
    if z.d() != w.d() {
        return Err(Error::DimensionMismatch(z.d(), w.d()));
    }
    z.require_strict()?;
    w.require_strict()?;
    if p.nrows() != z.n() || p.ncols() != w.n() {
        return Err(Error::InvalidParameter(format!(
            "P must be {}×{}, got {}×{}",
            z.n(),
            w.n(),
            p.nrows(),
            p.ncols()
        )));
    }
    // level recursion: T_{k+1} = Σ_i Z_i T_k W_i*
    let mut level = p.clone();
    let mut value = p.clone();
    for _ in 0..m {
        let mut next = zeros(p.nrows(), p.ncols());
        for k in 1..=z.d() {
            next += z.component(k) * &level * w.component(k).adjoint();
        }
        value += &next;
        level = next;
    }
    let tail_bound = op_norm(p)? * geometric_tail(z.row_norm() * w.row_norm(), m);
    Ok(KernelEvaluation { value, tail_bound })
}

/// NC Herglotz kernel `K^μ(Z, W)[P] = ½ K(Z, W)[H(Z) P + P H(W)*]`.
pub fn herglotz_kernel_eval(
    mu: &MomentTable,
    z: &MatrixPoint,
    w: &MatrixPoint,
    p: &CMat,
    m: usize,
) -> Result<KernelEvaluation> {
    let hz = herglotz_eval(mu, z, m)?;
    let hw = herglotz_eval(mu, w, m)?;
    let q = (&hz.value * p + p * hw.value.adjoint()) * faer::Scale(C64::new(0.5, 0.0));
    let k = szego_kernel_eval(z, w, &q, m)?;
    let r = z.row_norm() * w.row_norm();
    let h_err = 0.5 * (hz.tail_bound + hw.tail_bound) * op_norm(p)? / (1.0 - r);
    Ok(KernelEvaluation {
        value: k.value,
        tail_bound: k.tail_bound + h_err,
    })
}

/// Cayley transform `B = (H − I)(H + I)^{-1}` into the NC Schur class.
pub fn cayley_to_schur(mu: &MomentTable, z: &MatrixPoint, m: usize) -> Result<CMat> {
    let h = herglotz_eval(mu, z, m)?.value;
    let n = z.n();
    let resolvent = inverse(&(&h + identity(n))).ok_or(Error::SingularResolvent)?;
    Ok((h - identity(n)) * resolvent)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub holds: bool,
    pub min_eigenvalue: f64,
}

/// Moment-level test of `μ ≤ t² λ`: the Gram matrix of `t²λ − μ` at level
/// `n` must be positive semi-definite.
pub fn domination_check(
    mu: &MomentTable,
    lambda: &MomentTable,
    t: f64,
    n: usize,
    tol: f64,
) -> Result<DominationReport> {
    let diff = lambda.scale(t * t).sub(mu)?;
    let min = min_eigenvalue(&gram_matrix(&diff, n)?)?;
    Ok(DominationReport {
        holds: min >= -tol,
        min_eigenvalue: min,
    })
}
