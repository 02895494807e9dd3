//! The `d = 1` oracle. A circle measure given as a trigonometric-polynomial
//! density plus atoms is already Lebesgue-decomposed, so the pencil output
//! can be checked moment by moment.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freemonoid::Word;
use crate::lebesgue::{decompose, default_threshold};
use crate::linalg::C64;
use crate::ncmeasure::{from_classical, ClassicalMeasureSpec, MomentTable, TrigPolynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDecomposition {
    /// Density only.
    pub ac_spec: ClassicalMeasureSpec,
    /// Atoms only.
    pub sing_spec: ClassicalMeasureSpec,
}

pub fn oracle_decompose(spec: &ClassicalMeasureSpec) -> OracleDecomposition {
    OracleDecomposition {
        ac_spec: ClassicalMeasureSpec {
            density: spec.density.clone(),
            atoms: Vec::new(),
        },
        sing_spec: ClassicalMeasureSpec {
            density: TrigPolynomial::default(),
            atoms: spec.atoms.clone(),
        },
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Largest error over the whole schedule.
    pub max_moment_error: f64,
    /// `(N, error)` per level.
    pub error_by_n: Vec<(usize, f64)>,
}

impl ConvergenceReport {
    /// True when the error never increases along the schedule, allowing
    /// `slack` for round-off.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.error_by_n
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + slack)
    }

    /// CSV with columns `N,max_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "max_error"])?;
        for (n, e) in &self.error_by_n {
            w.write_record([n.to_string(), format!("{e:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the pencil decomposition at each level of `schedule` and reports
/// `max_{0 ≤ k ≤ N_out} |μ_ac(z^k) − oracle|` (negative `k` are conjugates).
/// `threshold` defaults to [`default_threshold`] and `n_out` to `N − 1`.
pub fn compare_to_pencil(
    spec: &ClassicalMeasureSpec,
    schedule: &[usize],
    threshold: Option<f64>,
    n_out: Option<usize>,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty level schedule".into()));
    }
    let oracle = oracle_decompose(spec);
    let mut error_by_n = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let out = n_out.unwrap_or(n.saturating_sub(1));
        let mu = from_classical(spec, n)?;
        let ac = from_classical(&oracle.ac_spec, out)?;
        let dec = decompose(&mu, n, threshold.unwrap_or_else(|| default_threshold(n)), out)?;
        error_by_n.push((n, dec.mu_ac.max_abs_diff(&ac, out)));
    }
    let max_moment_error = error_by_n.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        max_moment_error,
        error_by_n,
    })
}

/// Moments of Lebesgue measure restricted to the upper (`0 ≤ θ ≤ π`) or
/// lower half of the circle: `∫ ζ^k` over the arc with `dθ/2π`.
pub fn semicircle_moments(upper: bool, depth: usize) -> MomentTable {
    let entries = (0..=depth).map(|k| {
        let v = if k == 0 {
            C64::new(0.5, 0.0)
        } else if k % 2 == 0 {
            C64::new(0.0, 0.0)
        } else {
            // ((−1)^k − 1)/(2πik) = i/(πk) for odd k on the upper arc
            C64::new(0.0, 1.0 / (std::f64::consts::PI * k as f64))
        };
        (Word::power(1, k), if upper { v } else { v.conj() })
    });
    MomentTable::from_entries(1, depth, entries).expect("single-letter words within depth")
}
