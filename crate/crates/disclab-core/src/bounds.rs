//! From the per-level bound `χ_a` to the discrepancy constant: the map
//! `c(a) = χ_a/(2·ln a)`, its maximization over `a ∈ (3,4)`, and
//! verification of the bound chain on concrete sequences.

use rayon::prelude::*;
use serde::Serialize;

use crate::discrepancy::{profile, DiscrepancyProfile, Schedule};
use crate::envelope::{p_integral, WindowScheme};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::variational::chi_lower_bound;

/// Reference constants: the previously best lower bound, the best known
/// upper bound, and the bound this computation reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct References {
    pub bejian: f64,
    pub ostromoukhov_upper: f64,
    pub theorem: f64,
}

impl Default for References {
    fn default() -> Self {
        References {
            bejian: 0.06015,
            ostromoukhov_upper: 0.222,
            theorem: 0.064_636_3,
        }
    }
}

/// Result of evaluating and/or maximizing the constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub a: f64,
    pub chi_a: f64,
    pub c_of_a: f64,
    pub a_star: f64,
    pub chi_a_star: f64,
    pub c_star_lower: f64,
    pub references: References,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<Vec<(f64, f64)>>,
}

/// `c(a) = χ_a / (2·ln a)`.
pub fn c_of_a(a: f64) -> Result<f64> {
    Ok(chi_lower_bound(a)? / (2.0 * a.ln()))
}

/// Golden-section maximization of `c(a)` on `[lo, hi] ⊆ [3,4]`, with a
/// coarse pre-scan certifying unimodality at runtime.
pub fn optimize_constant(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(3.0 <= lo && lo < hi && hi <= 4.0) {
        return Err(Error::range(format!(
            "interval [{lo}, {hi}] must satisfy 3 ≤ lo < hi ≤ 4"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::range("tolerance must be positive"));
    }
    certify_unimodal(lo, hi)?;

    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = c_of_a(x1)?;
    let mut f2 = c_of_a(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = c_of_a(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = c_of_a(x1)?;
        }
    }
    let a_star = 0.5 * (a + b);
    Ok((a_star, c_of_a(a_star)?))
}

/// Discrete pre-scan: the forward differences of `c(a)` may change sign at
/// most once (increase, then decrease).
fn certify_unimodal(lo: f64, hi: f64) -> Result<()> {
    let samples = 257;
    let inset = 1e-6;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let a = (lo + inset) + (hi - lo - 2.0 * inset) * i as f64 / (samples - 1) as f64;
            c_of_a(a).expect("interior sample in (3,4)")
        })
        .collect();
    let mut sign_changes = 0;
    let mut last_rising = true;
    for w in values.windows(2) {
        let rising = w[1] >= w[0];
        if !rising && last_rising {
            sign_changes += 1;
        }
        if rising && !last_rising {
            // a second rise after the peak breaks unimodality
            return Err(Error::range(
                "c(a) pre-scan found a second increase; not unimodal".to_string(),
            ));
        }
        last_rising = rising;
    }
    if sign_changes <= 1 {
        Ok(())
    } else {
        Err(Error::range("c(a) pre-scan is not unimodal".to_string()))
    }
}

/// Full report for one `a` plus the maximization, optionally with the scan
/// data used for plotting.
pub fn bound_report(a: Option<f64>, tol: f64, with_scan: bool) -> Result<BoundReport> {
    let (a_star, c_star_lower) = optimize_constant(3.0, 4.0, tol)?;
    let a_eval = a.unwrap_or(a_star);
    let scan = if with_scan {
        let steps = 200;
        Some(
            (1..steps)
                .map(|i| {
                    let x = 3.0 + i as f64 / steps as f64;
                    (x, c_of_a(x).expect("interior point"))
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(BoundReport {
        a: a_eval,
        chi_a: chi_lower_bound(a_eval)?,
        c_of_a: c_of_a(a_eval)?,
        a_star,
        chi_a_star: chi_lower_bound(a_star)?,
        c_star_lower,
        references: References::default(),
        scan,
    })
}

/// Both sides of the range-splitting inequality
/// `max−min over A ≥ ½·spread(A2) + ½·spread(A0) + ½|maxA2 − maxA0| +
/// ½|minA2 − minA0|`.
pub fn range_split_inequality(values: &[f64], a0: &[usize], a2: &[usize]) -> Result<(f64, f64)> {
    if values.is_empty() || a0.is_empty() || a2.is_empty() {
        return Err(Error::invalid("values, A0 and A2 must be nonempty"));
    }
    for &i in a0.iter().chain(a2) {
        if i >= values.len() {
            return Err(Error::invalid(format!(
                "index {i} outside the value set of size {}",
                values.len()
            )));
        }
    }
    let spread = |idx: &[usize]| -> (f64, f64) {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for &i in idx {
            max = max.max(values[i]);
            min = min.min(values[i]);
        }
        (max, min)
    };
    let all: Vec<usize> = (0..values.len()).collect();
    let (max_a, min_a) = spread(&all);
    let (max2, min2) = spread(a2);
    let (max0, min0) = spread(a0);
    let lhs = max_a - min_a;
    let rhs = 0.5 * (max2 - min2)
        + 0.5 * (max0 - min0)
        + 0.5 * (max2 - max0).abs()
        + 0.5 * (min2 - min0).abs();
    Ok((lhs, rhs))
}

/// Finite-N instantiation of the log-lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundVerification {
    pub holds: bool,
    /// Prefix length achieving the largest `n·D_n*`.
    pub witness_n: usize,
    /// `max_n n·D_n* − log N · c(a)`.
    pub margin: f64,
    pub threshold: f64,
    pub max_n_dstar: f64,
}

/// Compares `max_{n ≤ N} n·D_n*` against `log N · c(a)` using the default
/// profile schedule.
pub fn verify_bound(points: &PointSet, a: f64) -> Result<BoundVerification> {
    verify_bound_with(points, a, Schedule::default())
}

pub fn verify_bound_with(
    points: &PointSet,
    a: f64,
    schedule: Schedule,
) -> Result<BoundVerification> {
    if points.len() < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    let c = c_of_a(a)?;
    let prof = profile(points, schedule)?;
    let (witness_n, max_n_dstar) = peak(&prof);
    let threshold = (points.len() as f64).ln() * c;
    let margin = max_n_dstar - threshold;
    Ok(BoundVerification {
        holds: margin > 0.0,
        witness_n,
        margin,
        threshold,
        max_n_dstar,
    })
}

fn peak(prof: &DiscrepancyProfile) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for e in &prof.entries {
        if e.n_dstar > best.1 {
            best = (e.n, e.n_dstar);
        }
    }
    best
}

/// One row of the spread-integral chain check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PChainRow {
    pub t: u32,
    pub p_value: f64,
    pub t_chi_a: f64,
    pub pass: bool,
}

/// Checks `P(t) ≥ t·χ_a − 1e-9` for `t = 1..=t_max` on the given sequence.
pub fn p_chain_check(points: &PointSet, a: f64, t_max: u32) -> Result<Vec<PChainRow>> {
    if t_max == 0 {
        return Err(Error::invalid("t_max must be ≥ 1"));
    }
    let chi = chi_lower_bound(a)?;
    let deepest = WindowScheme::new(a, t_max)?;
    if points.len() < deepest.n {
        return Err(Error::invalid(format!(
            "need at least {} points for t = {t_max}, got {}",
            deepest.n,
            points.len()
        )));
    }
    (1..=t_max)
        .map(|t| {
            let scheme = WindowScheme::new(a, t)?;
            let p_value = p_integral(points, &scheme)?;
            let t_chi_a = t as f64 * chi;
            Ok(PChainRow {
                t,
                p_value,
                t_chi_a,
                pass: p_value >= t_chi_a - 1e-9,
            })
        })
        .collect()
}
