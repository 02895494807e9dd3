//! Lebesgue decomposition of an NC measure with respect to NC Lebesgue
//! measure `m`, computed from a finite-level matrix pencil, and the operator
//! factorization identities behind the Fock-space side of the theory.
//!
//! With `λ = μ + m` the Fock inner product of polynomials is the identity
//! matrix in word coordinates, while the GNS(λ) inner product is `G_λ`. The
//! embedding of polynomials `F²_d(λ) → F²_d` is a contraction, and its
//! kernel is approximated by the pencil directions `G_λ v = σ v` whose Fock
//! norm is small relative to their λ-norm, `s = 1/σ < threshold`. With `Q`
//! the λ-orthogonal projection onto those directions,
//!
//! ```text
//! λ_ac(L^α) = ⟨e_∅, (I − Q) e_α⟩_λ = λ(L^α) − Σ_sing σ_i v_i[∅] conj(v_i[α])
//! ```
//!
//! for Euclidean-normalized eigenvectors `v_i`. Then `μ_ac = λ_ac − m` and
//! `μ_s = μ − μ_ac`, so `μ_s(L^α)` is exactly the projected term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{left_shift_matrix, multiplier_matrix, FockTruncation, ShiftFamily};
use crate::freemonoid::{enumerate_words, word_count, Letter, Word};
use crate::gns::{gns_space, gram_matrix, GnsSpace};
use crate::linalg::{adjoint, hermitian_eigen, identity, op_norm, CMat, C64, ZERO};
use crate::ncmeasure::MomentTable;

/// Pencil eigenvalues below this are indistinguishable from round-off in `G_λ`.
pub const MIN_PENCIL_EIGENVALUE: f64 = 1e-13;

/// Relative mass below which a part is treated as absent by [`classify`].
pub const DEFAULT_VERDICT_TOL: f64 = 0.25;

/// Default singular threshold `min(10/N, 1/4)`.
pub fn default_threshold(n: usize) -> f64 {
    (10.0 / n as f64).min(0.25)
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub mu_ac: MomentTable,
    pub mu_s: MomentTable,
    /// Generalized eigenvalues `s_i` of the pencil `(I, G_λ)`, nondecreasing.
    pub pencil_spectrum: Vec<f64>,
    pub singular_rank: usize,
    pub threshold: f64,
    pub n: usize,
    pub n_out: usize,
}

impl DecompositionResult {
    pub fn ac_mass(&self) -> f64 {
        self.mu_ac.mass()
    }

    pub fn sing_mass(&self) -> f64 {
        self.mu_s.mass()
    }

    /// Writes the pencil spectrum as a one-column CSV.
    pub fn write_spectrum_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s"])?;
        for s in &self.pencil_spectrum {
            w.write_record([format!("{s:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_level(mu: &MomentTable, n: usize, threshold: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("level N must be at least 1".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    if mu.depth() < n {
        return Err(Error::DepthExceeded {
            needed: n,
            available: mu.depth(),
        });
    }
    Ok(())
}

/// Splits `μ = μ_ac + μ_s` using the pencil at Gram level `n`, returning
/// moments up to length `n_out ≤ n − 1`.
pub fn decompose(
    mu: &MomentTable,
    n: usize,
    threshold: f64,
    n_out: usize,
) -> Result<DecompositionResult> {
    check_level(mu, n, threshold)?;
    if n_out + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "output depth {n_out} must be at most N − 1 = {}",
            n - 1
        )));
    }
    let d = mu.d();
    let lambda = mu.add(&crate::ncmeasure::nc_lebesgue(d, mu.depth()))?;
    let g = gram_matrix(&lambda, n)?;
    let (sigma, v) = hermitian_eigen(&g)?;
    let sigma_max = sigma.last().copied().unwrap_or(1.0);
    let sigma_min = sigma.first().copied().unwrap_or(1.0);
    // G_λ = G_μ + I, so μ ≥ 0 forces σ ≥ 1
    let slack = 1e-9 * sigma_max.max(1.0);
    if sigma_min < 1.0 - slack {
        return Err(Error::NotPositive(sigma_min - 1.0));
    }
    if 1.0 / sigma_max < MIN_PENCIL_EIGENVALUE {
        return Err(Error::IllConditioned(sigma_max / sigma_min));
    }

    let singular: Vec<usize> = (0..sigma.len())
        .filter(|&i| 1.0 / sigma[i] < threshold)
        .collect();
    let mut pencil_spectrum: Vec<f64> = sigma.iter().map(|s| 1.0 / s).collect();
    pencil_spectrum.reverse();

    // index 0 is the empty word
    let mut ac = Vec::new();
    let mut sing = Vec::new();
    for (idx, alpha) in enumerate_words(d, n_out).into_iter().enumerate() {
        let mut corr = ZERO;
        for &i in &singular {
            corr += v[(0, i)] * v[(idx, i)].conj() * sigma[i];
        }
        let value = mu.moment(&alpha);
        ac.push((alpha.clone(), value - corr));
        sing.push((alpha, corr));
    }
    Ok(DecompositionResult {
        mu_ac: MomentTable::from_entries(d, n_out, ac)?,
        mu_s: MomentTable::from_entries(d, n_out, sing)?,
        pencil_spectrum,
        singular_rank: singular.len(),
        threshold,
        n,
        n_out,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Ac,
    Singular,
    Mixed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Ac => "AC",
            Verdict::Singular => "SINGULAR",
            Verdict::Mixed => "MIXED",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub ac_mass: f64,
    pub sing_mass: f64,
    pub column_extreme_distance: f64,
    pub cuntz_defect: f64,
    pub singular_rank: usize,
    pub verdict: Verdict,
}

/// Verdict from the two masses: a part whose mass is at most
/// `tol · μ(I)` in absolute value is treated as absent.
pub fn verdict_from_masses(ac_mass: f64, sing_mass: f64, total: f64, tol: f64) -> Verdict {
    let cut = tol * total.abs();
    if sing_mass.abs() <= cut {
        Verdict::Ac
    } else if ac_mass.abs() <= cut {
        Verdict::Singular
    } else {
        Verdict::Mixed
    }
}

pub fn classify(mu: &MomentTable, n: usize, threshold: f64, tol: f64) -> Result<Classification> {
    let dec = decompose(mu, n, threshold, 0)?;
    let space = gns_space(mu, n, None)?;
    classify_with(mu, &dec, &space, tol)
}

/// Classification from an existing decomposition and GNS space.
pub fn classify_with(
    mu: &MomentTable,
    dec: &DecompositionResult,
    space: &GnsSpace,
    tol: f64,
) -> Result<Classification> {
    let column_extreme_distance = space.column_extreme_distance()?;
    let cuntz_defect = space.row_isometry()?.cuntz_defect()?;
    let (ac_mass, sing_mass) = (dec.ac_mass(), dec.sing_mass());
    Ok(Classification {
        ac_mass,
        sing_mass,
        column_extreme_distance,
        cuntz_defect,
        singular_rank: dec.singular_rank,
        verdict: verdict_from_masses(ac_mass, sing_mass, mu.mass(), tol),
    })
}

fn symbol_degree(symbol: &[(Word, C64)]) -> usize {
    symbol.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
}

/// Indices of the words on which a multiplier of degree `deg` and one
/// further shift act without truncation: lengths at most `N − 1 − deg`.
fn interior(t: &FockTruncation, deg: usize) -> Result<Vec<usize>> {
    if deg + 1 > t.n {
        return Err(Error::InvalidParameter(format!(
            "symbol degree {deg} leaves no interior at level {}",
            t.n
        )));
    }
    Ok((0..word_count(t.d, t.n - 1 - deg)).collect())
}

fn compressed_norm(a: &CMat, idx: &[usize]) -> Result<f64> {
    let k = idx.len();
    let sub = CMat::from_fn(k, k, |i, j| a[(idx[i], idx[j])]);
    op_norm(&sub)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MkResiduals {
    pub max_residual_ff: f64,
    pub max_residual_gg: f64,
    pub max_residual_fg: f64,
}

impl MkResiduals {
    pub fn max(&self) -> f64 {
        self.max_residual_ff
            .max(self.max_residual_gg)
            .max(self.max_residual_fg)
    }
}

/// For the right multiplier `A` with polynomial symbol `symbol` and
/// `T = A*A − I`, checks `F*F = G*G = 2I + T` and `F*G = T` where
/// `F = R_1 A + R_2` and `G = R_1 A − R_2`.
pub fn mk_factor_check(symbol: &[(Word, C64)], t: &FockTruncation) -> Result<MkResiduals> {
    if t.d < 2 {
        return Err(Error::InvalidParameter("the factorization needs d ≥ 2".into()));
    }
    let idx = interior(t, symbol_degree(symbol))?;
    let a = multiplier_matrix(ShiftFamily::Right, symbol, t)?;
    let r1 = multiplier_matrix(ShiftFamily::Right, &[(Word::letter(1), C64::new(1.0, 0.0))], t)?;
    let r2 = multiplier_matrix(ShiftFamily::Right, &[(Word::letter(2), C64::new(1.0, 0.0))], t)?;
    let r1a = &r1 * &a;
    let f = &r1a + &r2;
    let g = &r1a - &r2;
    let tt = adjoint(&a) * &a - identity(t.dim());
    let two_plus_t = &tt + identity(t.dim()) * faer::Scale(C64::new(2.0, 0.0));
    Ok(MkResiduals {
        max_residual_ff: compressed_norm(&(adjoint(&f) * &f - &two_plus_t), &idx)?,
        max_residual_gg: compressed_norm(&(adjoint(&g) * &g - &two_plus_t), &idx)?,
        max_residual_fg: compressed_norm(&(adjoint(&f) * &g - &tt), &idx)?,
    })
}

/// For the right multiplier `F` with polynomial symbol `symbol`, returns
/// `max_{k,j} ‖L_k* T L_j − δ_{kj} T‖` with `T = F*F`, compressed to the
/// words where no truncation interferes. This checks that `T` is L-Toeplitz;
/// it does not certify that `F` is outer.
pub fn popescu_factor_check(symbol: &[(Word, C64)], t: &FockTruncation) -> Result<f64> {
    let idx = interior(t, symbol_degree(symbol))?;
    let f = multiplier_matrix(ShiftFamily::Right, symbol, t)?;
    let tt = adjoint(&f) * &f;
    let shifts: Vec<CMat> = (1..=t.d)
        .map(|k| left_shift_matrix(k as Letter, t).map(|m| m.to_dense()))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (k, lk) in shifts.iter().enumerate() {
        let lkt = adjoint(lk) * &tt;
        for (j, lj) in shifts.iter().enumerate() {
            let mut r = &lkt * lj;
            if k == j {
                r -= &tt;
            }
            worst = worst.max(compressed_norm(&r, &idx)?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};
    use crate::ncmeasure::{
        from_classical, from_scalar_point, nc_lebesgue, positivity_check, Atom,
        ClassicalMeasureSpec, TrigPolynomial,
    };
    use crate::transforms::domination_check;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dirac(z: &[C64], depth: usize) -> MomentTable {
        from_scalar_point(z, depth).unwrap()
    }

    fn m_plus_atom() -> ClassicalMeasureSpec {
        ClassicalMeasureSpec {
            density: TrigPolynomial::constant(1.0),
            atoms: vec![Atom::at_angle(0.0, 1.0)],
        }
    }

    #[test]
    fn lebesgue_is_ac() {
        let m = nc_lebesgue(2, 6);
        let r = decompose(&m, 6, 0.25, 5).unwrap();
        assert_eq!(r.singular_rank, 0);
        assert!(r.pencil_spectrum.iter().all(|s| (s - 0.5).abs() < 1e-14));
        assert!(r.mu_s.max_abs(5) < 1e-14);
        assert!(r.mu_ac.max_abs_diff(&m, 5) < 1e-14);
    }

    #[test]
    fn circle_atom_closed_form() {
        // G_λ = 2I + J with J the (N+1)×(N+1) all-ones matrix: the ones
        // direction has σ = N + 3, everything else σ = 2
        for n in [4usize, 8, 16, 32] {
            let mu = from_classical(&m_plus_atom(), n).unwrap();
            let r = decompose(&mu, n, default_threshold(n), n - 1).unwrap();
            assert_eq!(r.singular_rank, 1);
            assert!((r.pencil_spectrum[0] - 1.0 / (n as f64 + 3.0)).abs() < 1e-12);
            let shift = 2.0 / (n as f64 + 1.0);
            for k in 0..n {
                let expected = if k == 0 { 1.0 - shift } else { -shift };
                let got = r.mu_ac.moment(&Word::power(1, k));
                assert!((got - c(expected)).norm() < 1e-12, "N={n} k={k} {got}");
            }
        }
    }

    #[test]
    fn dirac_closed_form() {
        // G_λ splits into blocks I + J over the chains β·1^k, β empty or
        // ending in 2, with s = 1/(N + 2 − |β|). Only the β = ∅ block meets
        // e_∅: μ_ac(1^k) = −1/(N + 1), words containing 2 get nothing.
        for n in [4usize, 6, 8] {
            let mu = dirac(&[ONE, ZERO], n);
            // 0.22 sits strictly between pencil eigenvalues for these N
            let r = decompose(&mu, n, 0.22, n - 1).unwrap();
            let caught = (0..n).filter(|l| 1.0 / ((n + 2 - l) as f64) < r.threshold);
            let stems = caught.map(|l| if l == 0 { 1 } else { 1 << (l - 1) }).sum::<usize>();
            assert_eq!(r.singular_rank, stems);
            assert!((r.pencil_spectrum[0] - 1.0 / (n as f64 + 2.0)).abs() < 1e-12);
            for alpha in enumerate_words(2, n - 1) {
                let got = r.mu_ac.moment(&alpha);
                let expected = if alpha.contains(2) {
                    0.0
                } else {
                    -1.0 / (n as f64 + 1.0)
                };
                assert!((got - c(expected)).norm() < 1e-12, "N={n} {alpha}");
            }
        }
    }

    #[test]
    fn exact_additivity_of_parts() {
        let mu = dirac(&[C64::new(0.0, 0.6), c(0.8)], 6)
            .add(&nc_lebesgue(2, 6))
            .unwrap();
        let r = decompose(&mu, 6, 0.25, 5).unwrap();
        let total = r.mu_ac.add(&r.mu_s).unwrap();
        assert!(total.max_abs_diff(&mu.truncate(5), 5) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn complex_boundary_point_is_singular() {
        let z = [C64::new(0.0, 0.6), C64::new(0.48, 0.64)];
        let mu = dirac(&z, 8);
        let r = decompose(&mu, 8, default_threshold(8), 3).unwrap();
        // the singular part carries the complex moments; a conjugation slip
        // in the projection would leave O(1) residue on words with mixed
        // letters
        assert!(r.mu_s.max_abs_diff(&mu.truncate(3), 3) < 0.15);
        assert!(r.mu_ac.max_abs(3) < 0.15);
    }

    #[test]
    fn pencil_spectrum_in_unit_interval() {
        let mu = dirac(&[c(0.6), c(0.8)], 6)
            .add(&from_scalar_point(&[c(0.3), c(0.1)], 6).unwrap())
            .unwrap();
        let r = decompose(&mu, 6, 0.25, 2).unwrap();
        assert!(r.pencil_spectrum.iter().all(|&s| s > 0.0 && s <= 1.0 + 1e-12));
        assert!(r.pencil_spectrum.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn parameter_errors() {
        let mu = nc_lebesgue(2, 4);
        assert!(decompose(&mu, 4, 0.25, 4).is_err());
        assert!(decompose(&mu, 4, 1.0, 2).is_err());
        assert!(decompose(&mu, 4, 0.0, 2).is_err());
        assert!(matches!(
            decompose(&mu, 5, 0.25, 2),
            Err(Error::DepthExceeded { .. })
        ));
        let bad = MomentTable::from_entries(1, 2, [(Word::letter(1), ONE)]).unwrap();
        assert!(matches!(decompose(&bad, 2, 0.25, 1), Err(Error::NotPositive(_))));
    }

    #[test]
    fn verdicts() {
        let m = nc_lebesgue(2, 8);
        assert_eq!(classify(&m, 8, 0.25, DEFAULT_VERDICT_TOL).unwrap().verdict, Verdict::Ac);
        let dm = dirac(&[ONE, ZERO], 8);
        assert_eq!(
            classify(&dm, 8, 0.25, DEFAULT_VERDICT_TOL).unwrap().verdict,
            Verdict::Singular
        );
        let mixed = classify(&dm.add(&m).unwrap(), 8, 0.25, DEFAULT_VERDICT_TOL).unwrap();
        assert_eq!(mixed.verdict, Verdict::Mixed);
        assert!((mixed.ac_mass - 1.0).abs() < 0.25 && (mixed.sing_mass - 1.0).abs() < 0.25);
        assert_eq!(verdict_from_masses(0.0, 0.0, 0.0, 0.25), Verdict::Ac);
    }

    #[test]
    fn hereditary_spot_check() {
        let lambda = dirac(&[c(0.6), c(0.8)], 8);
        let mu = lambda.scale(0.5);
        assert!(domination_check(&mu, &lambda, 1.0, 8, 1e-10).unwrap().holds);
        assert_eq!(
            classify(&lambda, 8, 0.25, DEFAULT_VERDICT_TOL).unwrap().verdict,
            Verdict::Singular
        );
        assert_eq!(
            classify(&mu, 8, 0.25, DEFAULT_VERDICT_TOL).unwrap().verdict,
            Verdict::Singular
        );
    }

    #[test]
    fn ac_part_is_nearly_positive() {
        let mu = from_classical(&m_plus_atom(), 32).unwrap();
        let r = decompose(&mu, 32, default_threshold(32), 8).unwrap();
        let p = positivity_check(&r.mu_ac, 8, 1e-10).unwrap();
        assert!(p.min_eigenvalue > -0.6, "{}", p.min_eigenvalue);
    }

    fn random_symbol(rng: &mut ChaCha8Rng, d: usize, deg: usize) -> Vec<(Word, C64)> {
        enumerate_words(d, deg)
            .into_iter()
            .map(|w| {
                (
                    w,
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            })
            .collect()
    }

    #[test]
    fn mk_identities() {
        let t = FockTruncation::new(2, 6).unwrap();
        let id = mk_factor_check(&[(Word::empty(), ONE)], &t).unwrap();
        assert!(id.max() < 1e-12);
        let a = [(Word::empty(), ONE), (Word::letter(1), c(0.3))];
        assert!(mk_factor_check(&a, &t).unwrap().max() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = random_symbol(&mut rng, 2, 2);
        assert!(mk_factor_check(&a, &t).unwrap().max() < 1e-12);
        assert!(mk_factor_check(&a, &FockTruncation::new(1, 6).unwrap()).is_err());
    }

    #[test]
    fn identity_symbol_gives_orthogonal_pair() {
        // A = I: F*G = R_1*R_1 − R_2*R_2 = 0 on the interior, so T = 0
        let t = FockTruncation::new(2, 4).unwrap();
        let r = mk_factor_check(&[(Word::empty(), ONE)], &t).unwrap();
        assert!(r.max_residual_fg < 1e-15);
    }

    #[test]
    fn toeplitz_examples() {
        let t = FockTruncation::new(2, 6).unwrap();
        assert_eq!(popescu_factor_check(&[(Word::empty(), ONE)], &t).unwrap(), 0.0);
        let f = [(Word::empty(), ONE), (Word::letter(1), c(0.5))];
        assert!(popescu_factor_check(&f, &t).unwrap() < 1e-12);
        assert!(popescu_factor_check(&[(Word::letter(1), ONE)], &t).unwrap() < 1e-12);
    }

    #[test]
    fn truncation_breaks_toeplitz_outside_interior() {
        // on the full truncated space the shifts lose the top level, so the
        // identity fails there; the interior restriction is essential
        let t = FockTruncation::new(2, 3).unwrap();
        let f = [(Word::empty(), ONE), (Word::letter(1), c(0.5))];
        let full: Vec<usize> = (0..t.dim()).collect();
        let ft = multiplier_matrix(ShiftFamily::Right, &f, &t).unwrap();
        let tt = adjoint(&ft) * &ft;
        let l1 = left_shift_matrix(1, &t).unwrap().to_dense();
        let r = adjoint(&l1) * &tt * &l1 - &tt;
        assert!(compressed_norm(&r, &full).unwrap() > 0.1);
        assert!(popescu_factor_check(&f, &t).unwrap() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn random_mk_symbols(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = FockTruncation::new(2, 5).unwrap();
            let a = random_symbol(&mut rng, 2, 2);
            prop_assert!(mk_factor_check(&a, &t).unwrap().max() < 1e-12);
            prop_assert!(popescu_factor_check(&a, &t).unwrap() < 1e-12);
        }

        #[test]
        fn decomposition_parts_sum_to_mu(x in -1.0f64..1.0, y in -1.0f64..1.0, w in 0.0f64..2.0) {
            let r2 = x * x + y * y;
            prop_assume!(r2 <= 1.0);
            let mu = dirac(&[c(x), c(y)], 5).scale(w).add(&nc_lebesgue(2, 5)).unwrap();
            let r = decompose(&mu, 5, 0.25, 4).unwrap();
            let total = r.mu_ac.add(&r.mu_s).unwrap();
            prop_assert!(total.max_abs_diff(&mu.truncate(4), 4) <= 1e-15 * (1.0 + w));
        }
    }
}
