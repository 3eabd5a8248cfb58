//! Exact star discrepancy of finite point sets and per-prefix profiles.
//!
//! For a sorted multiset `x_(1) ≤ … ≤ x_(N)` the supremum of
//! `|A_N(x)/N − x|` over `[0,1]` is attained at a one-sided limit of a data
//! point, so it equals `max_i max(i/N − x_(i), x_(i) − (i−1)/N)` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::points::PointSet;

/// Counting function `A_n(x) = #{ i ≤ n : x_i < x }` (strict inequality).
pub fn count_below(points: &PointSet, n: usize, x: f64) -> Result<usize> {
    check_prefix(points, n)?;
    check_eval_point(x)?;
    Ok(points.values()[..n].iter().filter(|&&v| v < x).count())
}

/// Discrepancy function `D_n(x) = A_n(x) − n·x` for the length-`n` prefix.
pub fn disc_function(points: &PointSet, n: usize, x: f64) -> Result<f64> {
    Ok(count_below(points, n, x)? as f64 - n as f64 * x)
}

/// Exact star discrepancy `D_N*` of the full set.
pub fn star_discrepancy(points: &PointSet) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid("empty point set has no star discrepancy"));
    }
    Ok(dstar_of_sorted(&points.sorted()))
}

/// Sorted-order extremal formula; `sorted` must be ascending.
fn dstar_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut best = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let above = (i as f64 + 1.0) / n - x;
        let below = x - i as f64 / n;
        best = best.max(above).max(below);
    }
    best
}

fn check_prefix(points: &PointSet, n: usize) -> Result<()> {
    if n == 0 || n > points.len() {
        return Err(Error::invalid(format!(
            "prefix length {n} outside 1..={}",
            points.len()
        )));
    }
    Ok(())
}

fn check_eval_point(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!(
            "evaluation point {x} outside [0,1]"
        )));
    }
    Ok(())
}

/// Which prefixes a profile evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Every `n` from 1 to `N`. O(N²) worst case.
    All,
    /// Geometric grid with the given ratio (> 1), always including `N`.
    Checkpointed { ratio: f64 },
    /// Every `n` up to `dense_limit`, geometric checkpoints beyond.
    DenseThenCheckpointed { dense_limit: usize, ratio: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::DenseThenCheckpointed {
            dense_limit: 4096,
            ratio: 1.01,
        }
    }
}

impl Schedule {
    fn validate(&self) -> Result<()> {
        let ratio = match self {
            Schedule::All => return Ok(()),
            Schedule::Checkpointed { ratio } => *ratio,
            Schedule::DenseThenCheckpointed { ratio, .. } => *ratio,
        };
        if ratio > 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "checkpoint ratio {ratio} must exceed 1"
            )))
        }
    }

    /// Scheduled prefix lengths in increasing order, final `n = len` included.
    fn plan(&self, len: usize) -> Vec<usize> {
        match *self {
            Schedule::All => (1..=len).collect(),
            Schedule::Checkpointed { ratio } => geometric(1, ratio, len),
            Schedule::DenseThenCheckpointed { dense_limit, ratio } => {
                let head = dense_limit.min(len);
                let mut plan: Vec<usize> = (1..=head).collect();
                if head < len {
                    plan.extend(geometric(head, ratio, len).into_iter().skip(1));
                }
                plan
            }
        }
    }

    /// Largest n that is computed from the incrementally sorted prefix.
    fn dense_cutoff(&self, len: usize) -> usize {
        match *self {
            Schedule::All => len,
            Schedule::Checkpointed { .. } => 0,
            Schedule::DenseThenCheckpointed { dense_limit, .. } => dense_limit.min(len),
        }
    }
}

fn geometric(start: usize, ratio: f64, len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = start;
    while n < len {
        out.push(n);
        n = (n + 1).max((n as f64 * ratio).floor() as usize);
    }
    out.push(len);
    out
}

/// One `(n, n·D_n*)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEntry {
    pub n: usize,
    pub n_dstar: f64,
}

impl ProfileEntry {
    /// `n·D_n*/log n` (natural log); infinite at `n = 1`.
    pub fn ratio(&self) -> f64 {
        self.n_dstar / (self.n as f64).ln()
    }
}

/// Per-prefix trajectory of `n·D_n*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyProfile {
    pub schedule: Schedule,
    pub entries: Vec<ProfileEntry>,
}

impl DiscrepancyProfile {
    /// CSV rows `n,n_dstar,ratio` with 17-significant-digit decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,n_dstar,ratio\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", e.n, e.n_dstar, e.ratio());
        }
        out
    }
}

/// Exact `n·D_n*` at every scheduled prefix length.
///
/// Prefixes up to the schedule's dense cutoff keep an incrementally sorted
/// copy (binary-search insertion, O(n) scan). Checkpoints beyond it use a
/// rank-space occupancy table built from one up-front sort of the whole set,
/// so insertion stays O(1) and each checkpoint scan is O(N).
pub fn profile(points: &PointSet, schedule: Schedule) -> Result<DiscrepancyProfile> {
    if points.is_empty() {
        return Err(Error::invalid("empty point set has no profile"));
    }
    schedule.validate()?;
    let len = points.len();
    let plan = schedule.plan(len);
    let dense_cutoff = schedule.dense_cutoff(len);

    // Rank space over distinct values of the whole set.
    let mut distinct = points.sorted();
    distinct.dedup();
    let ranks: Vec<u32> = points
        .values()
        .iter()
        .map(|v| distinct.partition_point(|d| d < v) as u32)
        .collect();
    let mut occupancy = vec![0_u32; distinct.len()];

    let mut sorted_prefix: Vec<f64> = Vec::with_capacity(dense_cutoff.min(len));
    let mut entries = Vec::with_capacity(plan.len());
    let mut next_plan = 0_usize;

    for (idx, &value) in points.values().iter().enumerate() {
        let n = idx + 1;
        occupancy[ranks[idx] as usize] += 1;
        if n <= dense_cutoff {
            let at = sorted_prefix.partition_point(|&v| v <= value);
            sorted_prefix.insert(at, value);
        }
        if next_plan < plan.len() && plan[next_plan] == n {
            next_plan += 1;
            let dstar = if n <= dense_cutoff {
                dstar_of_sorted(&sorted_prefix)
            } else {
                dstar_of_occupancy(&distinct, &occupancy, n)
            };
            entries.push(ProfileEntry {
                n,
                n_dstar: n as f64 * dstar,
            });
        }
    }

    Ok(DiscrepancyProfile { schedule, entries })
}

/// Sorted-formula supremum over a multiset given as occupancy counts in
/// value-rank order. Within a run of `c` equal values at cumulative offset
/// `cum`, the extremal candidates sit at the run ends.
fn dstar_of_occupancy(distinct: &[f64], occupancy: &[u32], n: usize) -> f64 {
    let nf = n as f64;
    let mut best = 0.0_f64;
    let mut cum = 0_usize;
    for (value, &count) in distinct.iter().zip(occupancy) {
        if count == 0 {
            continue;
        }
        let above = (cum + count as usize) as f64 / nf - value;
        let below = value - cum as f64 / nf;
        best = best.max(above).max(below);
        cum += count as usize;
        if cum == n {
            break;
        }
    }
    best
}

/// Largest `n·D_n*/log n` over entries with `n ≥ floor_n`.
pub fn max_ratio(profile: &DiscrepancyProfile, floor_n: usize) -> Result<f64> {
    if floor_n < 2 {
        return Err(Error::invalid("floor_n must be ≥ 2"));
    }
    profile
        .entries
        .iter()
        .filter(|e| e.n >= floor_n)
        .map(ProfileEntry::ratio)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        })
        .ok_or_else(|| Error::invalid(format!("no profile entry with n ≥ {floor_n}")))
}
