//! Acceptance suite: one numbered check per guarantee the library makes,
//! each printing a pass line with its measured runtime (run with
//! `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Expected values tagged as derived are computed here by independent
//! oracles: brute-force suprema, breakpoint-aware quadrature, and grid
//! scans of constructed shapes.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use disclab_core::{
    assemble_extremal, chi_lower_bound, disc_function, envelope_f, generate, jump_census,
    optimal_delta, optimal_slope_selector, optimize_constant, oracle_minimize, p_chain_check,
    q1_integral, q2_integral, range_split_inequality, real_count_total, star_discrepancy,
    strong_q_integral, verify_bound, AdmissibleParams, EnvelopeFunction, ExtremalMode,
    GeneratorSpec, OracleFamily, PLJumpFunction, PointSet, QKind, SegmentSpec, WindowScheme,
};
use disclab_core::{build_qprime_admissible, build_qprime_strong, build_qsecond};

fn vdc(count: usize) -> PointSet {
    generate(&GeneratorSpec::VanDerCorput { base: 2 }, count).unwrap()
}

fn golden(count: usize) -> PointSet {
    let alpha = (5.0_f64.sqrt() - 1.0) / 2.0;
    generate(&GeneratorSpec::Kronecker { alpha }, count).unwrap()
}

fn report(criterion: &str, elapsed: std::time::Duration, budget_s: f64, detail: String) {
    assert!(
        elapsed.as_secs_f64() < budget_s,
        "criterion {criterion} exceeded its {budget_s}s budget: {:.3}s",
        elapsed.as_secs_f64()
    );
    println!(
        "criterion {criterion}: PASS ({detail}; {:.3}s of {budget_s}s budget)",
        elapsed.as_secs_f64()
    );
}

/// Naive O(N²) supremum oracle for the star discrepancy: every data value
/// and both one-sided limits.
fn naive_star_discrepancy(points: &PointSet) -> f64 {
    let n = points.len() as f64;
    let mut best = 0.0_f64;
    for &v in points.values() {
        let below = points.values().iter().filter(|&&p| p < v).count() as f64;
        let at_most = points.values().iter().filter(|&&p| p <= v).count() as f64;
        best = best.max((below / n - v).abs()).max((at_most / n - v).abs());
    }
    best
}

/// Midpoint quadrature of |f| with the sample budget spread over the
/// breakpoint intervals, so jump cells never straddle a discontinuity.
fn quadrature_abs(env: &EnvelopeFunction, total_samples: usize) -> f64 {
    let (lo, hi) = env.domain();
    let span = hi - lo;
    let mut sum = 0.0;
    for w in env.breakpoints().windows(2) {
        let width = w[1] - w[0];
        let cells = ((total_samples as f64 * width / span).ceil() as usize).max(8);
        let mut local = 0.0;
        for k in 0..cells {
            let x = w[0] + width * (k as f64 + 0.5) / cells as f64;
            local += env.value_at(x).abs();
        }
        sum += local * width / cells as f64;
    }
    sum
}

/// Quadrature of the full-window spread max−min D_n computed directly from
/// the counting function, independent of the envelope machinery. Cells are
/// split at data values so only envelope kinks (no jumps) are sampled over.
fn p_quadrature(points: &PointSet, window_len: usize, total_samples: usize) -> f64 {
    let mut cuts: Vec<f64> = points.values()[..window_len].to_vec();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let cells = ((total_samples as f64 * width).ceil() as usize).max(8);
        let mut local = 0.0;
        for k in 0..cells {
            let x = w[0] + width * (k as f64 + 0.5) / cells as f64;
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            for n in 1..=window_len {
                let d = disc_function(points, n, x).unwrap();
                max = max.max(d);
                min = min.min(d);
            }
            local += max - min;
        }
        sum += local * width / cells as f64;
    }
    sum
}

#[test]
fn criterion_01_constant_reproduction() {
    let start = Instant::now();
    let (a_star, c_star) = optimize_constant(3.0, 4.0, 1e-8).unwrap();
    assert!(
        (a_star - 3.718_66).abs() < 1e-3,
        "a* = {a_star}, expected 3.71866 ± 1e-3"
    );
    assert!(
        (c_star - 0.064_636_3).abs() < 1e-5,
        "c* = {c_star}, expected 0.0646363 ± 1e-5"
    );
    report(
        "01 constant reproduction",
        start.elapsed(),
        1.0,
        format!("a* = {a_star:.6}, c* = {c_star:.8}"),
    );
}

#[test]
fn criterion_02_closed_form_vs_construction() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for a in [3.1, 3.5, 3.718_66, 3.9] {
        let expected = chi_lower_bound(a).unwrap();
        let mut totals = Vec::new();
        for t in [1_u32, 2] {
            let p = AdmissibleParams::new(a, t).unwrap();
            let total = real_count_total(&p, ExtremalMode::Strong).unwrap();
            assert!(
                (total - expected).abs() < 1e-10,
                "a = {a}, t = {t}: real-count total {total} vs χ_a {expected}"
            );
            worst = worst.max((total - expected).abs());
            totals.push(total);
        }
        assert!(
            (totals[0] - totals[1]).abs() < 1e-10,
            "a = {a}: t-dependence {} vs {}",
            totals[0],
            totals[1]
        );
    }
    report(
        "02 closed form vs construction",
        start.elapsed(),
        1.0,
        format!("max |total − χ_a| = {worst:.2e}"),
    );
}

#[test]
fn criterion_03_oracle_optimality() {
    let start = Instant::now();
    let mut detail = String::new();
    for a in [3.5, 3.718_66] {
        let p = AdmissibleParams::new(a, 1).unwrap();
        let target = chi_lower_bound(a).unwrap();
        let structured = oracle_minimize(&p, OracleFamily::Structured, 256).unwrap();
        let gap = (structured.minimum - target).abs() / target;
        assert!(
            gap < 0.01,
            "a = {a}: structured minimum {} off χ_a {target} by {gap:.4}",
            structured.minimum
        );
        let perturbed = oracle_minimize(&p, OracleFamily::Perturbed, 256).unwrap();
        assert_eq!(
            perturbed.improving_perturbations, 0,
            "a = {a}: {} perturbations improved the assembled minimizer",
            perturbed.improving_perturbations
        );
        detail.push_str(&format!("a={a}: gap {gap:.2e}; "));
    }
    report("03 oracle optimality", start.elapsed(), 30.0, detail);
}

#[test]
fn criterion_04_discrepancy_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x0064_6363);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=512);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let points = PointSet::from_values(values).unwrap();
        let exact = star_discrepancy(&points).unwrap();
        let naive = naive_star_discrepancy(&points);
        worst = worst.max((exact - naive).abs());
        assert!(
            (exact - naive).abs() < 1e-12,
            "N = {n}: sorted formula {exact} vs naive oracle {naive}"
        );
    }
    report(
        "04 discrepancy oracle equivalence",
        start.elapsed(),
        10.0,
        format!("max |Δ| = {worst:.2e} over 100 sets"),
    );
}

#[test]
fn criterion_05_range_split_property() {
    let start = Instant::now();
    // hand-checked equality instance
    let (lhs, rhs) = range_split_inequality(&[1.0, 2.0, 3.0], &[0], &[2]).unwrap();
    assert_eq!((lhs, rhs), (2.0, 2.0));
    let mut rng = StdRng::seed_from_u64(0x1e37);
    let mut done = 0;
    while done < 1000 {
        let len = rng.random_range(1..=20);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(-50.0..50.0)).collect();
        let a0: Vec<usize> = (0..len).filter(|_| rng.random_bool(0.5)).collect();
        let a2: Vec<usize> = (0..len).filter(|_| rng.random_bool(0.5)).collect();
        if a0.is_empty() || a2.is_empty() {
            continue;
        }
        let (lhs, rhs) = range_split_inequality(&values, &a0, &a2).unwrap();
        assert!(lhs >= rhs - 1e-12, "violated: {lhs} < {rhs}");
        done += 1;
    }
    report(
        "05 range-split property suite",
        start.elapsed(),
        1.0,
        "1000 random instances + equality case".to_string(),
    );
}

#[test]
fn criterion_06_p_chain() {
    let start = Instant::now();
    let a = 3.718_66;
    let deepest = WindowScheme::new(a, 5).unwrap();
    let mut detail = String::new();
    for (name, points) in [("vdc2", vdc(deepest.n)), ("golden", golden(deepest.n))] {
        let rows = p_chain_check(&points, a, 5).unwrap();
        for row in &rows {
            assert!(
                row.pass,
                "{name}: P({}) = {} < t·χ_a = {}",
                row.t, row.p_value, row.t_chi_a
            );
        }
        // exact envelope integration vs direct quadrature at t ≤ 2
        for row in rows.iter().take(2) {
            let scheme = WindowScheme::new(a, row.t).unwrap();
            let quad = p_quadrature(&points, scheme.n, 100_000);
            assert!(
                (row.p_value - quad).abs() < 1e-6,
                "{name} t = {}: exact {} vs quadrature {quad}",
                row.t,
                row.p_value
            );
        }
        detail.push_str(&format!("{name}: P(5) = {:.4}; ", rows[4].p_value));
    }
    report("06 P(t) chain", start.elapsed(), 60.0, detail);
}

#[test]
fn criterion_07_log_bound_on_sequences() {
    let start = Instant::now();
    let mut detail = String::new();
    for (name, points) in [("vdc2", vdc(100_000)), ("golden", golden(100_000))] {
        let v = verify_bound(&points, 3.718_66).unwrap();
        assert!(
            v.holds && v.margin > 0.0,
            "{name}: margin {} at witness n = {}",
            v.margin,
            v.witness_n
        );
        detail.push_str(&format!(
            "{name}: max nD* = {:.3} vs threshold {:.3}; ",
            v.max_n_dstar, v.threshold
        ));
    }
    report(
        "07 log-lower bound on real sequences",
        start.elapsed(),
        20.0,
        detail,
    );
}

#[test]
fn criterion_08_jump_census() {
    let start = Instant::now();
    let a = 3.718_66;
    let mut detail = String::new();
    for t in [2_u32, 3] {
        let scheme = WindowScheme::new(a, t).unwrap();
        let f = envelope_f(&vdc(scheme.n), &scheme).unwrap();
        let census = jump_census(&f, 1.0);
        let required = scheme.n - 2 * scheme.m;
        assert!(
            census.at_least_threshold >= required,
            "t = {t}: {} unit jumps < N − 2m = {required}",
            census.at_least_threshold
        );
        detail.push_str(&format!(
            "t={t}: {} ≥ {required}; ",
            census.at_least_threshold
        ));
    }
    report("08 jump census", start.elapsed(), 10.0, detail);
}

#[test]
fn criterion_09_segment_integrals_vs_quadrature() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5e9);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let a = rng.random_range(3.05..3.95);
        let t = rng.random_range(1..=2_u32);
        let p = AdmissibleParams::new(a, t).unwrap();

        // q1: unconstrained unit-jump part at its optimal configuration
        let (lo, hi) = p.admissible_chi_range();
        let chi = rng.random_range(lo..hi);
        let spec =
            SegmentSpec::new(0.0, chi, chi / 2.0, 0.5, 0.5, QKind::QPrime, 0.0, 0.0).unwrap();
        let shape = build_qprime_admissible(&spec, &p).unwrap();
        let closed = q1_integral(chi, &p).unwrap();
        let quad = quadrature_abs(shape.as_envelope(), 100_000);
        worst = worst.max((closed - quad).abs());
        assert!(
            (closed - quad).abs() < 1e-8,
            "q1 at a={a}, t={t}, chi={chi}: {closed} vs {quad}"
        );

        // q2: free-jump part
        let chi2 = rng.random_range(0.01..0.5);
        let shape2 = build_qsecond(0.0, chi2, &p).unwrap();
        let closed2 = q2_integral(chi2, &p).unwrap();
        let quad2 = quadrature_abs(shape2.as_envelope(), 100_000);
        worst = worst.max((closed2 - quad2).abs());
        assert!(
            (closed2 - quad2).abs() < 1e-8,
            "q2 at a={a}, t={t}, chi={chi2}: {closed2} vs {quad2}"
        );

        // strong part at the matched-selector optimum
        let (slo, shi) = p.strong_chi_range();
        let chi3 = rng.random_range(slo..shi);
        let v = optimal_slope_selector(0.0, chi3 / 2.0, 0.5, &p)
            .unwrap()
            .clamped;
        let spec3 = SegmentSpec::new(0.0, chi3, chi3 / 2.0, 0.5, 0.5, QKind::QPrime, v, v).unwrap();
        let shape3 = build_qprime_strong(&spec3, &p).unwrap();
        let closed3 = strong_q_integral(chi3, &p).unwrap();
        let quad3 = quadrature_abs(shape3.as_envelope(), 100_000);
        worst = worst.max((closed3 - quad3).abs());
        assert!(
            (closed3 - quad3).abs() < 1e-8,
            "strong at a={a}, t={t}, chi={chi3}: {closed3} vs {quad3}"
        );
    }
    report(
        "09 segment integrals vs quadrature",
        start.elapsed(),
        5.0,
        format!("max |Δ| = {worst:.2e} over 150 draws"),
    );
}

#[test]
fn criterion_10_quadratic_minimizer_scans() {
    let start = Instant::now();
    let p = AdmissibleParams::new(3.5, 1).unwrap();
    let step = 1e-3;

    // δ scan at the centered jump: closed form gives 1/2
    let (alpha, beta) = (0.0, 0.4);
    let gamma = 0.2;
    let delta_star = optimal_delta(alpha, beta, gamma, &p).unwrap();
    let mut best = (f64::INFINITY, f64::NAN);
    let mut d = 0.31;
    while d <= 0.69 {
        let spec =
            SegmentSpec::new(alpha, beta, gamma, d, 1.0 - d, QKind::QPrime, 0.0, 0.0).unwrap();
        if let Ok(shape) = build_qprime_admissible(&spec, &p) {
            let v = shape.integrate_abs();
            if v < best.0 {
                best = (v, d);
            }
        }
        d += step;
    }
    assert!(
        (best.1 - delta_star).abs() < 2.0 * step,
        "δ scan: {} vs {delta_star}",
        best.1
    );

    // γ scan at δ = 1/2: minimum at the midpoint
    let mut best_gamma = (f64::INFINITY, f64::NAN);
    let mut g = 0.15;
    while g <= 0.25 {
        let spec = SegmentSpec::new(alpha, beta, g, 0.5, 0.5, QKind::QPrime, 0.0, 0.0).unwrap();
        if let Ok(shape) = build_qprime_admissible(&spec, &p) {
            let v = shape.integrate_abs();
            if v < best_gamma.0 {
                best_gamma = (v, g);
            }
        }
        g += step;
    }
    assert!(
        (best_gamma.1 - 0.2).abs() < 2.0 * step,
        "γ scan: {} vs 0.2",
        best_gamma.1
    );

    // equal-length split of two unit-jump parts
    let total_len = 0.8;
    let mut best_split = (f64::INFINITY, f64::NAN);
    let mut s = 0.3;
    while s <= 0.5 {
        let part = |len: f64, offset: f64| -> Option<f64> {
            let spec = SegmentSpec::new(
                offset,
                offset + len,
                offset + len / 2.0,
                0.5,
                0.5,
                QKind::QPrime,
                0.0,
                0.0,
            )
            .ok()?;
            Some(build_qprime_admissible(&spec, &p).ok()?.integrate_abs())
        };
        if let (Some(v1), Some(v2)) = (part(s, 0.0), part(total_len - s, s)) {
            if v1 + v2 < best_split.0 {
                best_split = (v1 + v2, s);
            }
        }
        s += step;
    }
    assert!(
        (best_split.1 - total_len / 2.0).abs() < 2.0 * step,
        "split scan: {} vs {}",
        best_split.1,
        total_len / 2.0
    );

    // v-selector scan at an interior stationary point
    let chi = 0.4;
    let v_star = optimal_slope_selector(0.0, chi / 2.0, 0.5, &p)
        .unwrap()
        .clamped;
    let mut best_v = (f64::INFINITY, f64::NAN);
    let mut v = 0.0;
    while v <= 1.0 {
        let spec = SegmentSpec::new(0.0, chi, chi / 2.0, 0.5, 0.5, QKind::QPrime, v, v).unwrap();
        if let Ok(shape) = build_qprime_strong(&spec, &p) {
            let value = shape.integrate_abs();
            if value < best_v.0 {
                best_v = (value, v);
            }
        }
        v += step;
    }
    assert!(
        (best_v.1 - v_star).abs() < 2.0 * step,
        "v scan: {} vs {v_star}",
        best_v.1
    );

    report(
        "10 quadratic-minimizer scans",
        start.elapsed(),
        5.0,
        format!(
            "δ* = {:.3}, γ* = {:.3}, split* = {:.3}, v* = {:.3}",
            best.1, best_gamma.1, best_split.1, best_v.1
        ),
    );
}

/// Companion check used by the chain argument: the spread integral
/// dominates the half-sum of the window spreads plus the integrals of |f|
/// and |g| (all four terms carry the factor one half).
#[test]
fn chain_inequality_components() {
    use disclab_core::EnvelopeMode;
    use disclab_core::{envelope_difference, envelope_g, p_integral, window_envelope};

    for (points, a, t) in [
        (vdc(52), 3.718_66, 3_u32),
        (golden(52), 3.718_66, 3),
        (vdc(14), 3.718_66, 2),
    ] {
        let scheme = WindowScheme::new(a, t).unwrap();
        let p_value = p_integral(&points, &scheme).unwrap();
        let spread = |window: std::ops::RangeInclusive<usize>| -> f64 {
            let upper = window_envelope(&points, window.clone(), EnvelopeMode::Max).unwrap();
            let lower = window_envelope(&points, window, EnvelopeMode::Min).unwrap();
            envelope_difference(&upper, &lower).integrate_abs()
        };
        let f_int = envelope_f(&points, &scheme).unwrap().integrate_abs();
        let g_int = envelope_g(&points, &scheme).unwrap().integrate_abs();
        let rhs = 0.5 * (spread(scheme.a2()) + spread(scheme.a0()) + f_int + g_int);
        assert!(
            p_value >= rhs - 1e-9,
            "chain inequality violated: P = {p_value} < {rhs}"
        );
    }
}

/// The assembled candidates stay honest: admissible mode passes the plain
/// checks, strong mode additionally satisfies the per-flank constraint, and
/// the construction reproduces its own closed-form total.
#[test]
fn assembled_candidates_within_class() {
    use disclab_core::{check_admissible, check_condition_a};
    for (a, t) in [(3.5, 1_u32), (3.5, 2), (3.718_66, 1), (3.9, 2)] {
        let p = AdmissibleParams::new(a, t).unwrap();
        let adm = assemble_extremal(&p, ExtremalMode::Admissible).unwrap();
        assert!(
            check_admissible(&adm.function, &p).admissible(),
            "a={a} t={t} admissible assembly failed its checks"
        );
        assert!((adm.integral - adm.integer_count_total).abs() < 1e-9);
        let strong = assemble_extremal(&p, ExtremalMode::Strong).unwrap();
        assert!(
            check_condition_a(&strong.function, &p).strongly_admissible(),
            "a={a} t={t} strong assembly failed its checks"
        );
        assert!(strong.integral >= chi_lower_bound(a).unwrap() - 1e-9);
        let _: &PLJumpFunction = &strong.function;
    }
}
