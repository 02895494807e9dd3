//! NC measures given by their moment tables `α ↦ μ(L^α)`.
//!
//! Only the moments of the free monomials are stored; the adjoint extension
//! `μ((L^α)*) = conj(μ(L^α))` is implicit. Tables are sparse: absent words up
//! to `depth` have moment zero.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::freemonoid::{enumerate_words, reduce_pair, word_count, Letter, PairReduction, Word};
use crate::gns::gram_matrix;
use crate::linalg::{min_eigenvalue, C64, ONE, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    d: usize,
    depth: usize,
    moments: BTreeMap<Word, C64>,
}

impl MomentTable {
    /// The zero functional.
    pub fn zero(d: usize, depth: usize) -> Self {
        MomentTable {
            d,
            depth,
            moments: BTreeMap::new(),
        }
    }

    /// Builds a table from explicit moments. Words longer than `depth` or
    /// using letters above `d` are rejected. No positivity is implied.
    pub fn from_entries(
        d: usize,
        depth: usize,
        entries: impl IntoIterator<Item = (Word, C64)>,
    ) -> Result<Self> {
        let mut t = Self::zero(d, depth);
        for (w, v) in entries {
            if w.max_letter() > d {
                return Err(Error::LetterOutOfRange {
                    letter: w.max_letter(),
                    d,
                });
            }
            if w.len() > depth {
                return Err(Error::DepthExceeded {
                    needed: w.len(),
                    available: depth,
                });
            }
            t.insert(w, v);
        }
        Ok(t)
    }

    fn insert(&mut self, w: Word, v: C64) {
        let total = self.moments.get(&w).copied().unwrap_or(ZERO) + v;
        if total == ZERO {
            self.moments.remove(&w);
        } else {
            self.moments.insert(w, total);
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `μ(L^α)`.
    pub fn get(&self, w: &Word) -> Result<C64> {
        if w.len() > self.depth {
            return Err(Error::DepthExceeded {
                needed: w.len(),
                available: self.depth,
            });
        }
        Ok(self.moments.get(w).copied().unwrap_or(ZERO))
    }

    /// `μ(L^α)` for a word known to be within depth.
    pub fn moment(&self, w: &Word) -> C64 {
        debug_assert!(w.len() <= self.depth);
        self.moments.get(w).copied().unwrap_or(ZERO)
    }

    /// `μ(I)`.
    pub fn mass(&self) -> f64 {
        self.moment(&Word::empty()).re
    }

    /// `μ((L^α)* L^β)`; needs `max(|α|, |β|) ≤ depth`.
    pub fn pair(&self, alpha: &Word, beta: &Word) -> C64 {
        match reduce_pair(alpha, beta) {
            PairReduction::RightResidual(g) => self.moment(&g),
            PairReduction::LeftResidual(g) => self.moment(&g).conj(),
            PairReduction::Zero => ZERO,
        }
    }

    /// Nonzero moments in degree-lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.moments.iter()
    }

    pub fn nnz(&self) -> usize {
        self.moments.len()
    }

    pub fn truncate(&self, depth: usize) -> MomentTable {
        let depth = depth.min(self.depth);
        MomentTable {
            d: self.d,
            depth,
            moments: self
                .moments
                .iter()
                .filter(|(w, _)| w.len() <= depth)
                .map(|(w, v)| (w.clone(), *v))
                .collect(),
        }
    }

    fn combine(&self, other: &MomentTable, sign: f64) -> Result<MomentTable> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        let depth = self.depth.min(other.depth);
        let mut out = self.truncate(depth);
        for (w, v) in other.moments.iter().filter(|(w, _)| w.len() <= depth) {
            out.insert(w.clone(), *v * sign);
        }
        Ok(out)
    }

    /// Entrywise sum on the common depth.
    pub fn add(&self, other: &MomentTable) -> Result<MomentTable> {
        self.combine(other, 1.0)
    }

    /// Entrywise difference on the common depth; the result need not be
    /// positive.
    pub fn sub(&self, other: &MomentTable) -> Result<MomentTable> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, t: f64) -> MomentTable {
        let mut out = Self::zero(self.d, self.depth);
        if t != 0.0 {
            out.moments = self.moments.iter().map(|(w, v)| (w.clone(), *v * t)).collect();
        }
        out
    }

    /// Largest `|μ(L^α) − λ(L^α)|` over `|α| ≤ depth`.
    pub fn max_abs_diff(&self, other: &MomentTable, depth: usize) -> f64 {
        let depth = depth.min(self.depth).min(other.depth);
        self.moments
            .keys()
            .chain(other.moments.keys())
            .filter(|w| w.len() <= depth)
            .map(|w| (self.moment(w) - other.moment(w)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|μ(L^α)|` over `|α| ≤ depth`.
    pub fn max_abs(&self, depth: usize) -> f64 {
        self.moments
            .iter()
            .filter(|(w, _)| w.len() <= depth)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `word,re,im`. With `dense`, every word up to the
    /// depth gets a row; otherwise only the nonzero moments (and `e`) do.
    pub fn write_csv<W: Write>(&self, out: W, dense: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["word", "re", "im"])?;
        let mut emit = |w: &Word, v: C64| -> Result<()> {
            wtr.serialize((w.encode(self.d), v.re, v.im))?;
            Ok(())
        };
        if dense {
            for w in enumerate_words(self.d, self.depth) {
                let v = self.moment(&w);
                emit(&w, v)?;
            }
        } else {
            let empty = Word::empty();
            if !self.moments.contains_key(&empty) {
                emit(&empty, ZERO)?;
            }
            for (w, v) in &self.moments {
                emit(w, *v)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Whether a dense CSV export stays below `limit` rows.
    pub fn dense_rows_at_most(&self, limit: usize) -> bool {
        if self.d == 1 {
            return self.depth < limit;
        }
        let log = (self.depth as f64 + 1.0) * (self.d as f64).ln();
        log < (limit as f64).ln() && word_count(self.d, self.depth) <= limit
    }
}

/// NC Lebesgue measure: the vacuum state, `m(L^α) = δ_{α,∅}`.
pub fn nc_lebesgue(d: usize, depth: usize) -> MomentTable {
    let mut t = MomentTable::zero(d, depth);
    t.insert(Word::empty(), ONE);
    t
}

/// The vector functional `L^α ↦ ⟨x, L^α y⟩` on the Fock space.
pub fn from_vector_state(x: &FockVector, y: &FockVector, depth: usize) -> Result<MomentTable> {
    let tr = x.truncation;
    if y.truncation != tr {
        return Err(Error::DimensionMismatch(x.truncation.dim(), y.truncation.dim()));
    }
    let needed = depth + y.max_support_len();
    if needed > tr.n {
        return Err(Error::TruncationOverflow {
            needed,
            level: tr.n,
        });
    }
    vector_state_moments(tr.d, &x.support(), &y.support(), depth)
}

/// [`from_vector_state`] on sparse term lists, without a dense Fock
/// truncation.
pub fn vector_state_moments(
    d: usize,
    x: &[(Word, C64)],
    y: &[(Word, C64)],
    depth: usize,
) -> Result<MomentTable> {
    let mut t = MomentTable::zero(d, depth);
    // ⟨e_γ, L^α e_β⟩ = 1 iff γ = αβ
    for (gamma, xg) in x {
        for (beta, yb) in y {
            if gamma.max_letter() > d || beta.max_letter() > d {
                return Err(Error::LetterOutOfRange {
                    letter: gamma.max_letter().max(beta.max_letter()),
                    d,
                });
            }
            if gamma.len() < beta.len() || !gamma.letters().ends_with(beta.letters()) {
                continue;
            }
            let alpha = Word::from(&gamma.letters()[..gamma.len() - beta.len()]);
            if alpha.len() <= depth {
                t.insert(alpha, xg.conj() * yb);
            }
        }
    }
    Ok(t)
}

/// Point evaluation `L^α ↦ z^α` at a (possibly boundary) scalar row
/// contraction `z`.
pub fn from_scalar_point(z: &[C64], depth: usize) -> Result<MomentTable> {
    let d = z.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty point".into()));
    }
    let norm_sq: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if norm_sq > 1.0 + 1e-12 {
        return Err(Error::NotRowContraction(norm_sq));
    }
    let mut t = MomentTable::zero(d, depth);
    // depth-first over words whose product is nonzero
    let mut stack = vec![(Word::empty(), ONE)];
    while let Some((w, v)) = stack.pop() {
        if w.len() < depth {
            for (k, zk) in z.iter().enumerate() {
                let next = v * zk;
                if next != ZERO {
                    stack.push((w.append(k as Letter + 1), next));
                }
            }
        }
        t.insert(w, v);
    }
    Ok(t)
}

/// Real trigonometric polynomial `Σ_k cos[k]·cos kθ + sin[k]·sin kθ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn constant(c: f64) -> Self {
        TrigPolynomial {
            cos: vec![c],
            sin: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len()).saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&v| v == 0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let c: f64 = self
            .cos
            .iter()
            .enumerate()
            .map(|(k, a)| a * (k as f64 * theta).cos())
            .sum();
        let s: f64 = self
            .sin
            .iter()
            .enumerate()
            .map(|(k, b)| b * (k as f64 * theta).sin())
            .sum();
        c + s
    }

    /// `∫ ζ^k w(ζ) dm(ζ)` for `k ≥ 0`.
    pub fn moment(&self, k: usize) -> C64 {
        let a = self.cos.get(k).copied().unwrap_or(0.0);
        if k == 0 {
            return C64::new(a, 0.0);
        }
        let b = self.sin.get(k).copied().unwrap_or(0.0);
        C64::new(a / 2.0, b / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub re: f64,
    pub im: f64,
    pub weight: f64,
}

impl Atom {
    pub fn at_angle(theta: f64, weight: f64) -> Self {
        Atom {
            re: theta.cos(),
            im: theta.sin(),
            weight,
        }
    }

    pub fn point(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// A circle measure `w dm + Σ c_j δ_{ζ_j}` with trigonometric-polynomial
/// density.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMeasureSpec {
    #[serde(default)]
    pub density: TrigPolynomial,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl ClassicalMeasureSpec {
    /// Checks the atoms and samples the density on a grid fine enough for
    /// its degree.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for a in &self.atoms {
            if a.weight.is_nan() || a.weight <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {} must be positive",
                    a.weight
                )));
            }
            if (a.point().norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "atom {} is not on the unit circle",
                    a.point()
                )));
            }
        }
        let samples = 4096 + 64 * self.density.degree();
        for i in 0..samples {
            let theta = 2.0 * PI * i as f64 / samples as f64;
            let value = self.density.eval(theta);
            if value < -tol {
                return Err(Error::NegativeDensity { value, angle: theta });
            }
        }
        Ok(())
    }

    pub fn moment(&self, k: usize) -> C64 {
        let atoms: C64 = self
            .atoms
            .iter()
            .map(|a| a.point().powu(k as u32) * a.weight)
            .sum();
        self.density.moment(k) + atoms
    }
}

/// Moments `∫ ζ^k dμ` of a circle measure as a `d = 1` table.
pub fn from_classical(spec: &ClassicalMeasureSpec, depth: usize) -> Result<MomentTable> {
    spec.validate(1e-12)?;
    let entries = (0..=depth).map(|k| (Word::power(1, k), spec.moment(k)));
    MomentTable::from_entries(1, depth, entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub is_positive: bool,
    pub min_eigenvalue: f64,
}

/// Positivity at level `n`: the Gram matrix on words of length at most `n`
/// must be positive semi-definite up to `tol`.
pub fn positivity_check(mu: &MomentTable, n: usize, tol: f64) -> Result<PositivityReport> {
    let g = gram_matrix(mu, n)?;
    let min = min_eigenvalue(&g)?;
    Ok(PositivityReport {
        is_positive: min >= -tol,
        min_eigenvalue: min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_word, FockTruncation, ShiftFamily};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::decode(s, 9).unwrap()
    }

    fn dirac10(depth: usize) -> MomentTable {
        from_scalar_point(&[ONE, ZERO], depth).unwrap()
    }

    #[test]
    fn lebesgue_moments() {
        let m = nc_lebesgue(2, 4);
        assert_eq!(m.moment(&Word::empty()), ONE);
        assert_eq!(m.moment(&w("12")), ZERO);
        assert!(m.get(&w("11111")).is_err());
    }

    #[test]
    fn vector_state_examples() {
        let t = FockTruncation::new(2, 4).unwrap();
        let vac = FockVector::basis(t, &Word::empty()).unwrap();
        let e1 = FockVector::basis(t, &w("1")).unwrap();
        assert_eq!(from_vector_state(&vac, &vac, 3).unwrap(), nc_lebesgue(2, 3));
        // e_1 is wandering for L
        assert_eq!(from_vector_state(&e1, &e1, 3).unwrap(), nc_lebesgue(2, 3));
        let mixed = from_vector_state(&vac, &e1, 3).unwrap();
        assert_eq!(mixed.nnz(), 0);
        let mixed = from_vector_state(&e1, &vac, 3).unwrap();
        assert_eq!(mixed.moment(&w("1")), ONE);
        assert_eq!(mixed.nnz(), 1);
        assert!(matches!(
            from_vector_state(&e1, &e1, 4),
            Err(Error::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn vector_state_matches_direct_inner_products() {
        let t = FockTruncation::new(2, 4).unwrap();
        let x = FockVector::from_terms(
            t,
            &[(Word::empty(), ONE), (w("1"), C64::new(0.5, 0.0)), (w("21"), C64::new(0.0, 0.3))],
        )
        .unwrap();
        let mu = from_vector_state(&x, &x, 2).unwrap();
        for alpha in enumerate_words(2, 2) {
            let direct = x.inner(&apply_word(ShiftFamily::Left, &alpha, &x, false).unwrap());
            assert!((mu.moment(&alpha) - direct).norm() < 1e-15, "{alpha}");
        }
    }

    #[test]
    fn scalar_point_examples() {
        let mu = dirac10(3);
        assert_eq!(mu.moment(&w("11")), ONE);
        assert_eq!(mu.moment(&w("111")), ONE);
        assert_eq!(mu.moment(&w("12")), ZERO);
        assert_eq!(mu.moment(&w("2")), ZERO);
        assert_eq!(mu.nnz(), 4);
        assert_eq!(from_scalar_point(&[ZERO, ZERO], 3).unwrap(), nc_lebesgue(2, 3));
        assert!(matches!(
            from_scalar_point(&[ONE, ONE], 2),
            Err(Error::NotRowContraction(_))
        ));
        let deep = dirac10(60);
        assert_eq!(deep.nnz(), 61);
        let z = [C64::new(0.3, 0.1), C64::new(0.0, -0.5)];
        let mu = from_scalar_point(&z, 3).unwrap();
        assert!((mu.moment(&w("121")) - z[0] * z[1] * z[0]).norm() < 1e-16);
    }

    #[test]
    fn classical_examples() {
        let atom = ClassicalMeasureSpec {
            density: TrigPolynomial::default(),
            atoms: vec![Atom::at_angle(0.0, 1.0)],
        };
        let mu = from_classical(&atom, 5).unwrap();
        for k in 0..=5 {
            assert!((mu.moment(&Word::power(1, k)) - ONE).norm() < 1e-15);
        }
        let leb = ClassicalMeasureSpec {
            density: TrigPolynomial::constant(1.0),
            atoms: vec![],
        };
        assert_eq!(from_classical(&leb, 5).unwrap(), nc_lebesgue(1, 5));
        let both = ClassicalMeasureSpec {
            density: TrigPolynomial::constant(1.0),
            atoms: atom.atoms.clone(),
        };
        let mu = from_classical(&both, 5).unwrap();
        assert_eq!(mu.moment(&Word::empty()), C64::new(2.0, 0.0));
        assert_eq!(mu.moment(&w("111")), ONE);
    }

    #[test]
    fn classical_density_moments_match_quadrature() {
        let density = TrigPolynomial {
            cos: vec![1.0, 0.3, -0.2],
            sin: vec![0.0, 0.1, 0.4],
        };
        let n = 2000;
        for k in 0..4 {
            let q: C64 = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    C64::from_polar(1.0, k as f64 * th) * density.eval(th) / n as f64
                })
                .sum();
            assert!((q - density.moment(k)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn negative_density_rejected() {
        let spec = ClassicalMeasureSpec {
            density: TrigPolynomial {
                cos: vec![0.5, 1.0],
                sin: vec![],
            },
            atoms: vec![],
        };
        assert!(matches!(
            from_classical(&spec, 3),
            Err(Error::NegativeDensity { .. })
        ));
        let off_circle = ClassicalMeasureSpec {
            density: TrigPolynomial::default(),
            atoms: vec![Atom { re: 0.5, im: 0.0, weight: 1.0 }],
        };
        assert!(from_classical(&off_circle, 3).is_err());
    }

    #[test]
    fn cone_operations() {
        let m = nc_lebesgue(2, 3);
        assert_eq!(m.add(&m).unwrap(), m.scale(2.0));
        let s = dirac10(3).add(&m).unwrap();
        assert_eq!(s.mass(), 2.0);
        assert_eq!(dirac10(3).scale(0.0), MomentTable::zero(2, 3));
        assert_eq!(dirac10(5).add(&m).unwrap().depth(), 3);
        assert!(m.add(&nc_lebesgue(1, 3)).is_err());
        assert_eq!(s.sub(&m).unwrap(), dirac10(3));
    }

    #[test]
    fn positivity_examples() {
        for n in 0..4 {
            let r = positivity_check(&nc_lebesgue(2, 4), n, 1e-10).unwrap();
            assert!(r.is_positive);
            assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
        }
        assert!(positivity_check(&dirac10(2), 2, 1e-10).unwrap().is_positive);
        let bad = MomentTable::from_entries(1, 1, [(w("1"), ONE)]).unwrap();
        let r = positivity_check(&bad, 1, 1e-10).unwrap();
        assert!(!r.is_positive);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        nc_lebesgue(2, 1).write_csv(&mut buf, false).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "word,re,im\ne,1.0,0.0\n");
        let mut buf = Vec::new();
        dirac10(2).write_csv(&mut buf, true).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("\n11,1.0,0.0\n"));
        assert!(s.contains("\n12,0.0,0.0\n"));
    }

    proptest! {
        #[test]
        fn vector_state_depends_only_on_outer_part(
            coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
            k in 1u16..=2,
        ) {
            // R_k is an isometry commuting with L, so x and R_k x give the same moments
            let t = FockTruncation::new(2, 6).unwrap();
            let terms: Vec<(Word, C64)> = enumerate_words(2, 2)
                .into_iter()
                .zip(coeffs.iter().map(|&(a, b)| C64::new(a, b)))
                .collect();
            let x = FockVector::from_terms(t, &terms).unwrap();
            let y = apply_word(ShiftFamily::Right, &Word::letter(k), &x, true).unwrap();
            let mx = from_vector_state(&x, &x, 3).unwrap();
            let my = from_vector_state(&y, &y, 3).unwrap();
            prop_assert!(mx.max_abs_diff(&my, 3) < 1e-14);
        }

        #[test]
        fn constructors_are_positive(
            re in -0.7f64..0.7, im in -0.7f64..0.7, r2 in 0.0f64..0.7,
        ) {
            let z = [C64::new(re, im), C64::new(r2, 0.0)];
            prop_assume!(z.iter().map(|v| v.norm_sqr()).sum::<f64>() <= 1.0);
            let mu = from_scalar_point(&z, 3).unwrap();
            for n in 0..=3 {
                prop_assert!(positivity_check(&mu, n, 1e-10).unwrap().is_positive);
            }
        }
    }
}
