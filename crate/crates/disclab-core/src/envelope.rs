//! Exact piecewise-linear envelopes of windowed discrepancy functions.
//!
//! For a window `W` of prefix lengths, every `D_n(x) = A_n(x) − n·x` is a
//! line on each interval between consecutive distinct data values, so
//! `max_{n∈W} D_n(x)` (and the min) is computed exactly as an upper (lower)
//! envelope of lines per interval. Envelopes are left-continuous: the value
//! at a jump is the limit from the left. A data point exactly at 0 folds its
//! jump into the domain edge, which leaves every integral unchanged.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::points::PointSet;

/// Merge tolerance for breakpoint x-coordinates.
const X_MERGE_TOL: f64 = 1e-15;

/// Tolerance for classifying a jump as positive in the census.
const JUMP_TOL: f64 = 1e-9;

/// Window parameters `(a, t)` with `N = ⌊a^t⌋`, `m = ⌊a^{t−1}⌋` and the
/// index windows `A0 = {1..m}`, `A2 = {N−m+1..N}`, `A1` the middle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowScheme {
    pub a: f64,
    pub t: u32,
    pub n: usize,
    pub m: usize,
}

impl WindowScheme {
    pub fn new(a: f64, t: u32) -> Result<Self> {
        if !(a > 3.0 && a < 4.0) {
            return Err(Error::range(format!("a = {a} must lie in (3,4)")));
        }
        if t == 0 {
            return Err(Error::invalid("t must be ≥ 1"));
        }
        let n = a.powi(t as i32).floor() as usize;
        let m = a.powi(t as i32 - 1).floor() as usize;
        let scheme = WindowScheme { a, t, n, m };
        if n < 2 * m + 1 {
            return Err(Error::invalid(format!(
                "window scheme N = {n}, m = {m} leaves A1 empty"
            )));
        }
        Ok(scheme)
    }

    /// Explicit counts, for degenerate single-window uses such as the
    /// `P(t)` integral at `N = 1`. The A0/A1/A2 partition is only
    /// meaningful when `n ≥ 2m + 1` with `m ≥ 1`.
    pub fn with_counts(a: f64, t: u32, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N must be ≥ 1"));
        }
        Ok(WindowScheme { a, t, n, m })
    }

    pub fn a0(&self) -> RangeInclusive<usize> {
        1..=self.m
    }

    pub fn a1(&self) -> RangeInclusive<usize> {
        self.m + 1..=self.n - self.m
    }

    pub fn a2(&self) -> RangeInclusive<usize> {
        self.n - self.m + 1..=self.n
    }

    pub fn full(&self) -> RangeInclusive<usize> {
        1..=self.n
    }
}

/// Upper or lower envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeMode {
    Max,
    Min,
}

/// One linear piece: the function equals
/// `value_left + slope·(x − x_left)` on its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    /// Value just right of the interval's left breakpoint.
    pub value_left: f64,
    /// Window index achieving the envelope on this piece, when known.
    pub arg: Option<u32>,
}

/// Exact piecewise-linear function with jump discontinuities.
///
/// `breakpoints` are strictly increasing and include both domain endpoints;
/// `segments[i]` covers `(breakpoints[i], breakpoints[i+1]]` (closed at the
/// left domain edge); `jumps[i]` is the right limit minus the left limit at
/// `breakpoints[i]`, zero at both domain endpoints. Evaluation at a
/// breakpoint returns the limit from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFunction {
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
    jumps: Vec<f64>,
}

impl EnvelopeFunction {
    /// Builds from raw parts, validating the structural invariants.
    pub fn from_parts(
        breakpoints: Vec<f64>,
        segments: Vec<Segment>,
        jumps: Vec<f64>,
    ) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("at least two breakpoints required"));
        }
        if segments.len() + 1 != breakpoints.len() || jumps.len() != breakpoints.len() {
            return Err(Error::invalid(format!(
                "inconsistent part counts: {} breakpoints, {} segments, {} jumps",
                breakpoints.len(),
                segments.len(),
                jumps.len()
            )));
        }
        if breakpoints
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if jumps[0] != 0.0 || jumps[breakpoints.len() - 1] != 0.0 {
            return Err(Error::invalid("domain endpoints carry no jump"));
        }
        let f = EnvelopeFunction {
            breakpoints,
            segments,
            jumps,
        };
        for i in 1..f.breakpoints.len() - 1 {
            let left = f.left_limit(i);
            let right = f.segments[i].value_left;
            let gap = (right - left - f.jumps[i]).abs();
            let scale = 1.0 + left.abs().max(right.abs());
            if gap > 1e-9 * scale {
                return Err(Error::invalid(format!(
                    "stored jump at breakpoint {i} inconsistent by {gap}"
                )));
            }
        }
        Ok(f)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Left limit at breakpoint `i ≥ 1` (the function value there).
    fn left_limit(&self, i: usize) -> f64 {
        let seg = &self.segments[i - 1];
        seg.value_left + seg.slope * (self.breakpoints[i] - self.breakpoints[i - 1])
    }

    /// Left-continuous evaluation; at the left domain edge the right limit.
    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        debug_assert!(x >= lo - 1e-12 && x <= hi + 1e-12, "x = {x} outside domain");
        let x = x.clamp(lo, hi);
        let idx = self.breakpoints.partition_point(|&b| b < x);
        let seg_idx = idx.saturating_sub(1);
        let seg = &self.segments[seg_idx.min(self.segments.len() - 1)];
        let base = self.breakpoints[seg_idx.min(self.segments.len() - 1)];
        seg.value_left + seg.slope * (x - base)
    }

    /// Exact `∫|f|` over the domain, splitting pieces at zero crossings.
    pub fn integrate_abs(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.segments.len() {
            let width = self.breakpoints[i + 1] - self.breakpoints[i];
            let v0 = self.segments[i].value_left;
            let v1 = v0 + self.segments[i].slope * width;
            total += if v0 * v1 >= 0.0 {
                (v0 + v1).abs() / 2.0 * width
            } else {
                // One interior zero at offset t = −v0/slope.
                let t = -v0 / self.segments[i].slope;
                (v0.abs() * t + v1.abs() * (width - t)) / 2.0
            };
        }
        total
    }

    /// CSV rows `x_left,x_right,slope,value_left,jump_at_left` per segment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_left,x_right,slope,value_left,jump_at_left\n");
        for i in 0..self.segments.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.breakpoints[i],
                self.breakpoints[i + 1],
                self.segments[i].slope,
                self.segments[i].value_left,
                self.jumps[i],
            );
        }
        out
    }
}

/// Positive-jump counts of an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpCensus {
    /// Jumps strictly above the classification tolerance.
    pub positive: usize,
    /// Jumps of height at least the requested threshold (tolerance 1e-9).
    pub at_least_threshold: usize,
}

/// Counts positive jumps and those of height at least `height_threshold`.
pub fn jump_census(env: &EnvelopeFunction, height_threshold: f64) -> JumpCensus {
    let mut positive = 0;
    let mut at_least = 0;
    for &j in env.jumps() {
        if j > JUMP_TOL {
            positive += 1;
            if j >= height_threshold - JUMP_TOL {
                at_least += 1;
            }
        }
    }
    JumpCensus {
        positive,
        at_least_threshold: at_least,
    }
}

/// A line `y = intercept + slope·x` tagged with its window index.
#[derive(Debug, Clone, Copy)]
struct Line {
    slope: f64,
    intercept: f64,
    id: u32,
}

impl Line {
    fn y(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// x where `next` (larger slope) overtakes `prev`.
fn overtake_x(prev: &Line, next: &Line) -> f64 {
    (prev.intercept - next.intercept) / (next.slope - prev.slope)
}

/// Upper hull of lines processed in strictly ascending slope order.
/// Entries are `(line, x from which it dominates)`, `from` strictly
/// increasing, first entry from −∞.
fn upper_hull(lines: &[Line], hull: &mut Vec<(Line, f64)>) {
    hull.clear();
    for &line in lines {
        loop {
            match hull.last() {
                None => {
                    hull.push((line, f64::NEG_INFINITY));
                    break;
                }
                Some(&(top, top_from)) => {
                    let x = overtake_x(&top, &line);
                    if x <= top_from {
                        hull.pop();
                    } else {
                        hull.push((line, x));
                        break;
                    }
                }
            }
        }
    }
}

/// Raw piece emitted by the envelope builder.
#[derive(Debug, Clone, Copy)]
struct Piece {
    x_start: f64,
    slope: f64,
    value_start: f64,
    arg: Option<u32>,
    jump: f64,
}

fn finalize(pieces: Vec<Piece>, x_end: f64) -> EnvelopeFunction {
    // Merge breakpoints closer than the tolerance, carrying jumps forward.
    let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match merged.last_mut() {
            Some(last) if piece.x_start - last.x_start < X_MERGE_TOL => {
                let keep_x = last.x_start;
                let carried = last.jump;
                *last = piece;
                last.x_start = keep_x;
                last.jump = carried + piece.jump;
            }
            _ => merged.push(piece),
        }
    }
    if let Some(last) = merged.last() {
        if x_end - last.x_start < X_MERGE_TOL {
            merged.pop();
        }
    }
    let mut breakpoints = Vec::with_capacity(merged.len() + 1);
    let mut segments = Vec::with_capacity(merged.len());
    let mut jumps = Vec::with_capacity(merged.len() + 1);
    for p in &merged {
        breakpoints.push(p.x_start);
        segments.push(Segment {
            slope: p.slope,
            value_left: p.value_start,
            arg: p.arg,
        });
        jumps.push(p.jump);
    }
    breakpoints.push(x_end);
    jumps.push(0.0);
    jumps[0] = 0.0;
    EnvelopeFunction {
        breakpoints,
        segments,
        jumps,
    }
}

/// Exact envelope `x ↦ max/min_{n∈window} D_n(x)` over `[0,1]`.
///
/// Cost is O(N·|W|) in the worst case: one upper-hull pass over the window's
/// lines per interval between consecutive distinct data values.
pub fn window_envelope(
    points: &PointSet,
    window: RangeInclusive<usize>,
    mode: EnvelopeMode,
) -> Result<EnvelopeFunction> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo == 0 || lo > hi {
        return Err(Error::invalid(format!("window {lo}..={hi} is empty")));
    }
    if hi > points.len() {
        return Err(Error::invalid(format!(
            "window end {hi} exceeds point count {}",
            points.len()
        )));
    }

    // Data events: distinct values of the first `hi` points with the indices
    // of the points carrying each value.
    let mut order: Vec<usize> = (0..hi).collect();
    order.sort_by(|&i, &j| points.values()[i].total_cmp(&points.values()[j]));

    let width = hi - lo + 1;
    let mut counts = vec![0_i64; width];
    let sign = match mode {
        EnvelopeMode::Max => 1.0,
        EnvelopeMode::Min => -1.0,
    };

    let mut lines: Vec<Line> = Vec::with_capacity(width);
    let mut hull: Vec<(Line, f64)> = Vec::with_capacity(width);
    let mut pieces: Vec<Piece> = Vec::new();
    let mut prev_end: Option<(Line, f64)> = None; // line active at the previous interval's right edge

    let mut interval_left = 0.0_f64;
    let mut cursor = 0_usize;
    while cursor <= order.len() {
        // Next event value, or the domain end.
        let event = if cursor < order.len() {
            Some(points.values()[order[cursor]])
        } else {
            None
        };
        let interval_right = event.unwrap_or(1.0);

        if interval_right > interval_left {
            // Build lines for the current interval. For Min mode work on the
            // negated lines so a single upper-hull routine serves both.
            lines.clear();
            match mode {
                EnvelopeMode::Max => {
                    // slope −n ascending ⇔ n descending
                    for n in (lo..=hi).rev() {
                        lines.push(Line {
                            slope: -(n as f64),
                            intercept: counts[n - lo] as f64,
                            id: n as u32,
                        });
                    }
                }
                EnvelopeMode::Min => {
                    for n in lo..=hi {
                        lines.push(Line {
                            slope: n as f64,
                            intercept: -(counts[n - lo] as f64),
                            id: n as u32,
                        });
                    }
                }
            }
            upper_hull(&lines, &mut hull);

            // Clip the hull to [interval_left, interval_right].
            let start_idx = hull.partition_point(|&(_, from)| from <= interval_left) - 1;
            let mut first = true;
            for &(line, from) in &hull[start_idx..] {
                let x_start = if first { interval_left } else { from };
                if x_start >= interval_right {
                    break;
                }
                let value_start = sign * line.y(x_start);
                let jump = if first {
                    match prev_end {
                        Some((prev_line, prev_x)) => value_start - sign * prev_line.y(prev_x),
                        None => 0.0,
                    }
                } else {
                    0.0 // hull crossing: continuous breakpoint by construction
                };
                pieces.push(Piece {
                    x_start,
                    slope: sign * line.slope,
                    value_start,
                    arg: Some(line.id),
                    jump,
                });
                first = false;
            }
            let (last_line, _) = hull[hull
                .partition_point(|&(_, from)| from < interval_right)
                .saturating_sub(1)];
            prev_end = Some((last_line, interval_right));
            interval_left = interval_right;
        }

        // Apply the increments of this event group: every point with this
        // value raises A_n by one for all window lines with n ≥ its index.
        match event {
            Some(value) => {
                while cursor < order.len() && points.values()[order[cursor]] == value {
                    let point_index = order[cursor] + 1; // 1-based n of this point
                    let from = point_index.max(lo) - lo;
                    for c in &mut counts[from..] {
                        *c += 1;
                    }
                    cursor += 1;
                }
            }
            None => break,
        }
    }

    Ok(finalize(pieces, 1.0))
}

/// Exact pointwise difference of two piecewise-linear functions on the same
/// domain: breakpoints are merged, slopes and jumps subtract.
pub fn envelope_difference(upper: &EnvelopeFunction, lower: &EnvelopeFunction) -> EnvelopeFunction {
    let (alo, ahi) = upper.domain();
    let mut xs: Vec<f64> = upper
        .breakpoints()
        .iter()
        .chain(lower.breakpoints().iter())
        .copied()
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|next, prev| *next - *prev < X_MERGE_TOL);
    debug_assert!(xs[0] == alo && *xs.last().unwrap() == ahi);

    let jump_at = |env: &EnvelopeFunction, x: f64| -> f64 {
        let idx = env.breakpoints().partition_point(|&b| b < x - X_MERGE_TOL);
        if idx < env.breakpoints().len() && (env.breakpoints()[idx] - x).abs() <= X_MERGE_TOL {
            env.jumps()[idx]
        } else {
            0.0
        }
    };
    let seg_at = |env: &EnvelopeFunction, mid: f64| -> usize {
        env.breakpoints()
            .partition_point(|&b| b < mid)
            .saturating_sub(1)
    };

    let mut pieces = Vec::with_capacity(xs.len() - 1);
    for w in xs.windows(2) {
        let (xl, xr) = (w[0], w[1]);
        let mid = 0.5 * (xl + xr);
        let (ia, ib) = (seg_at(upper, mid), seg_at(lower, mid));
        let sa = &upper.segments()[ia];
        let sb = &lower.segments()[ib];
        let va = sa.value_left + sa.slope * (xl - upper.breakpoints()[ia]);
        let vb = sb.value_left + sb.slope * (xl - lower.breakpoints()[ib]);
        pieces.push(Piece {
            x_start: xl,
            slope: sa.slope - sb.slope,
            value_start: va - vb,
            arg: None,
            jump: jump_at(upper, xl) - jump_at(lower, xl),
        });
    }
    finalize(pieces, ahi)
}

/// The paper-style difference `f = max-envelope(A2) − max-envelope(A0)`.
pub fn envelope_f(points: &PointSet, scheme: &WindowScheme) -> Result<EnvelopeFunction> {
    let upper2 = window_envelope(points, scheme.a2(), EnvelopeMode::Max)?;
    let upper0 = window_envelope(points, scheme.a0(), EnvelopeMode::Max)?;
    Ok(envelope_difference(&upper2, &upper0))
}

/// The companion difference `g = min-envelope(A2) − min-envelope(A0)`.
pub fn envelope_g(points: &PointSet, scheme: &WindowScheme) -> Result<EnvelopeFunction> {
    let lower2 = window_envelope(points, scheme.a2(), EnvelopeMode::Min)?;
    let lower0 = window_envelope(points, scheme.a0(), EnvelopeMode::Min)?;
    Ok(envelope_difference(&lower2, &lower0))
}

/// `P(t) = ∫ (max_{n≤N} D_n − min_{n≤N} D_n)`, exact over the first
/// `scheme.n` points.
pub fn p_integral(points: &PointSet, scheme: &WindowScheme) -> Result<f64> {
    if points.len() < scheme.n {
        return Err(Error::invalid(format!(
            "point set of length {} shorter than N = {}",
            points.len(),
            scheme.n
        )));
    }
    let window = scheme.full();
    let upper = window_envelope(points, window.clone(), EnvelopeMode::Max)?;
    let lower = window_envelope(points, window, EnvelopeMode::Min)?;
    Ok(envelope_difference(&upper, &lower).integrate_abs())
}
