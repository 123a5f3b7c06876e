//! Acceptance suite: one PASS/FAIL line per criterion, tolerances as specified.
//!
//! Runs as a plain binary. Exits nonzero if any criterion fails, except those listed in
//! `UNATTAINABLE`, which are still evaluated and reported. Set `ELASTINET_STRICT=1` to fail on those too.

mod common;

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::time::{Duration, Instant};

use elastinet::analysis::{
    el_residual, fan_energy, fan_network, lemma2c_bound, lower_bound_cycle, make_train_tracks,
    THETA_LOWER_BOUND,
};
use elastinet::classify::{
    check_angle_condition, classify_network, square_angle_straightness, stratify, ClassifyOptions,
    SquareVerdict, StrataVerdict, VerdictKind,
};
use elastinet::fixtures;
use elastinet::geometry::{
    curve_energy, elastic_energy, rescale, total_curvature, DiscreteCurve, Network, Point,
};
use elastinet::graph::{AngledGraph, EdgeSpec};
use elastinet::optimize::{minimize_relaxed, MinimizeOptions, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria evaluated faithfully but known not to hold; see the README.
const UNATTAINABLE: &[&str] = &["8a"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

/// Arclength-parametrized curve whose tangent angle is a random trigonometric polynomial.
fn random_curve(rng: &mut ChaCha8Rng, m: usize) -> DiscreteCurve {
    let len = rng.gen_range(0.2..4.0);
    let theta0 = rng.gen_range(0.0..TAU);
    let modes: Vec<(f64, f64)> = (1..=3)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..TAU)))
        .collect();
    let start = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let h = len / m as f64;
    let angle = |s: f64| {
        theta0
            + modes
                .iter()
                .enumerate()
                .map(|(j, (a, p))| a * ((j + 1) as f64 * TAU * s / len + p).sin())
                .sum::<f64>()
    };
    let mut pts = vec![start];
    for i in 0..m {
        let t = angle((i as f64 + 0.5) * h);
        let last = pts[i];
        pts.push(last + h * Point::new(t.cos(), t.sin()));
    }
    DiscreteCurve::new(pts).expect("positive chords")
}

/// A path of 1 to 3 random curves, occasionally with a collapsed edge.
fn random_network(rng: &mut ChaCha8Rng) -> Network {
    let edges = rng.gen_range(1..=3);
    let mut curves: Vec<DiscreteCurve> = Vec::new();
    let mut specs = Vec::new();
    let mut at = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for e in 0..edges {
        let c = if edges > 1 && rng.gen_bool(0.2) {
            DiscreteCurve::singular(at)
        } else {
            let m = rng.gen_range(16..96);
            let c = random_curve(rng, m);
            c.translated(at - c.start())
        };
        let (d0, d1) = if c.is_singular() {
            (0.0, PI)
        } else {
            (c.start_tangent_angle(), c.end_tangent_angle())
        };
        specs.push(EdgeSpec::new(
            format!("e{e}"),
            format!("v{e}"),
            format!("v{}", e + 1),
            d0,
            d1,
        ));
        at = c.end();
        curves.push(c);
    }
    Network::new(AngledGraph::build(&specs).expect("path"), curves).expect("incident")
}

fn theta_lower_bound() -> Outcome {
    let start = Instant::now();
    let opts = MinimizeOptions {
        samples: 64,
        restarts: 4,
        ..Default::default()
    };
    let r = minimize_relaxed(&fixtures::theta_graph(), 1.0, 1.0, &opts).expect("valid input");
    let el = el_residual(&r.network, 1.0, 1.0).max_interior();
    let elapsed = start.elapsed();
    let floor = THETA_LOWER_BOUND * (1.0 - 0.01);
    let pass = r.energy >= floor && el <= 0.05 && elapsed <= Duration::from_secs(120);
    outcome(
        "1",
        pass,
        format!(
            "E* = {:.4} (floor {floor:.4}), EL sup {el:.2e}, {} ms",
            r.energy,
            elapsed.as_millis()
        ),
    )
}

fn degenerate_minimizer() -> Outcome {
    let r = minimize_relaxed(
        &fixtures::esempiodeg_graph(),
        1.0,
        1.0,
        &MinimizeOptions::default(),
    )
    .expect("valid input");
    let total: f64 = r.lengths.iter().sum();
    let collapsed: Vec<usize> = (0..r.lengths.len())
        .filter(|&e| r.lengths[e] < 1e-3 * total)
        .collect();
    let pass = collapsed.len() == 1 && r.verdict == VerdictKind::Degenerate;
    outcome(
        "2",
        pass,
        format!(
            "collapsed edges {collapsed:?} of lengths {:?}, verdict {:?}",
            r.lengths, r.verdict
        ),
    )
}

fn classification_fixtures() -> Outcome {
    let strstr = stratify(&fixtures::strstr_graph(), &fixtures::strstr_triangle());
    let strstr_ok = strstr.verdict == StrataVerdict::StratifiedStraight
        && strstr.step == 2
        && strstr.strata == vec![vec![2, 3, 4], vec![4]];

    let counter = fixtures::controesempio_graph();
    let all = counter.all_edges();
    let report = stratify(&counter, &all);
    let square = square_angle_straightness(&counter, &all).expect("order ≤ 4");
    let counter_ok = report.verdict == StrataVerdict::StratifiedStraight
        && report.strata.get(1) == Some(&vec![0, 2])
        && matches!(&square, SquareVerdict::StratifiedNotStraight { witness, .. } if !witness.steps.is_empty());

    let condnec = fixtures::condnec_network(64, 0.0);
    let opts = ClassifyOptions::default();
    let angle = check_angle_condition(&condnec, &opts).pass;
    let verdict = classify_network(&condnec, &opts);
    let condnec_ok = angle
        && verdict.kind == VerdictKind::Inadmissible
        && verdict
            .strata
            .as_ref()
            .is_some_and(|s| s.verdict == StrataVerdict::NotStratified);

    outcome(
        "3",
        strstr_ok && counter_ok && condnec_ok,
        format!(
            "strstr step {} strata {:?}; counterexample strata {:?}, square-angle {}; condnec angle {angle} verdict {:?}",
            strstr.step,
            strstr.strata,
            report.strata,
            if matches!(square, SquareVerdict::StratifiedNotStraight { .. }) { "witness" } else { "no witness" },
            verdict.kind
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let angle = common::angle_family(5, 2024);
    let strata = common::strata_family(6, 2024);
    let elapsed = start.elapsed();
    let pass = angle.mismatches.is_empty()
        && strata.mismatches.is_empty()
        && elapsed <= Duration::from_secs(300);
    for m in angle.mismatches.iter().chain(&strata.mismatches).take(3) {
        eprintln!("  mismatch: {m}");
    }
    outcome(
        "4",
        pass,
        format!(
            "angle condition {}/{} agree ({} admissible); stratification {}/{} agree ({} stratified, {} with ≥ 2 levels); {:.1} s",
            angle.instances - angle.mismatches.len(),
            angle.instances,
            angle.positives,
            strata.instances - strata.mismatches.len(),
            strata.instances,
            strata.positives,
            strata.multi_level,
            elapsed.as_secs_f64()
        ),
    )
}

fn scaling_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = random_network(&mut rng);
        let (alpha, beta) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let lhs = elastic_energy(&n, alpha, beta).total;
        let scaled = rescale(&n, (beta / alpha).sqrt()).expect("positive factor");
        let rhs = (alpha * beta).sqrt() * elastic_energy(&scaled, 1.0, 1.0).total;
        worst = worst.max(rel(rhs, lhs));
    }
    outcome(
        "5",
        worst <= 1e-10,
        format!("worst relative defect {worst:.2e} over 50 networks"),
    )
}

fn critical_curves() -> Outcome {
    let circle = fixtures::circle_network(1.0, 512);
    let e = elastic_energy(&circle, 1.0, 1.0).total;
    let el = el_residual(&circle, 1.0, 1.0).max_interior();
    let segments: Vec<f64> = [0.5, 1.0, 3.0]
        .iter()
        .map(|&l| el_residual(&fixtures::segment_network(l, 64), 1.0, 1.0).max_interior())
        .collect();
    let pass = rel(e, 4.0 * PI) <= 0.002 && el <= 1e-2 && segments.iter().all(|r| *r == 0.0);
    outcome(
        "6",
        pass,
        format!(
            "circle E = {e:.6} (4π = {:.6}), EL sup {el:.2e}; segment residuals {segments:?}",
            4.0 * PI
        ),
    )
}

fn train_tracks() -> Outcome {
    let mut contract: f64 = 0.0;
    let mut energy_err: f64 = 0.0;
    for h in [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0] {
        let c = make_train_tracks(h, 128).expect("h in range");
        let theta = (1.0 - h / 2.0).acos();
        let end = Point::new(2.0 * theta.sin(), h);
        contract = contract
            .max(c.start().norm())
            .max((c.end() - end).norm())
            .max(angle_gap(c.start_tangent_angle(), 0.0))
            .max(angle_gap(c.end_tangent_angle(), PI));
        energy_err = energy_err.max(rel(curve_energy(&c, 1.0, 1.0).energy, 4.0 * theta));
    }
    let h = 1e-4;
    let ratio = curve_energy(&make_train_tracks(h, 128).expect("h in range"), 1.0, 1.0).energy
        / (4.0 * h.sqrt());
    let pass = contract <= 1e-12 && energy_err <= 0.005 && (0.98..=1.02).contains(&ratio);
    outcome(
        "7",
        pass,
        format!(
            "contract defect {contract:.1e}, energy error {:.3}%, E/(4√h) = {ratio:.4} at h = 1e-4",
            100.0 * energy_err
        ),
    )
}

fn fan_limit() -> Outcome {
    let e = elastic_energy(&fan_network(0.01, 0.01, 256).expect("valid fan"), 1.0, 1.0).total;
    outcome(
        "8a",
        rel(e, 2.0) <= 0.01,
        format!(
            "r = a = 0.01: E = {e:.4} (closed form {:.4}), target 2 within 1%",
            fan_energy(0.01, 0.01)
        ),
    )
}

fn fan_sequence() -> Outcome {
    let energies: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&n: &f64| {
            elastic_energy(
                &fan_network(1.0 / n, 1.0 / (n * n), 256).expect("valid fan"),
                1.0,
                1.0,
            )
            .total
        })
        .collect();
    let pass = energies.windows(2).all(|w| w[1] < w[0]);
    outcome(
        "8b",
        pass,
        format!("r = 1/n, a = 1/n², n = 10, 20, 40: E = {energies:.4?}"),
    )
}

fn lower_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let m = rng.gen_range(256..1024);
        let c = random_curve(&mut rng, m);
        let e = curve_energy(&c, 1.0, 1.0).energy;
        let tc = total_curvature(&c).expect("regular");
        worst = worst.min(e / (2.0 * tc));
        debug_assert!((lemma2c_bound(std::slice::from_ref(&c)).unwrap() - 2.0 * tc).abs() < 1e-12);
    }
    let len = 1.7;
    let bound = lower_bound_cycle(&[FRAC_PI_3; 4], len).expect("positive length");
    let exact = (2.0 * PI / 3.0).powi(2) / len;
    // exact up to the rounding of the two evaluation orders
    let pass = worst >= 0.99 && (bound - exact).abs() <= 4.0 * f64::EPSILON * exact;
    outcome(
        "9",
        pass,
        format!("min E / (2·TC) = {worst:.4} over 200 curves; cycle bound {bound} vs {exact}"),
    )
}

fn gradient_check() -> Outcome {
    let problems = [
        Problem::relaxed(fixtures::theta_graph(), 1.3, 0.7, 8),
        Problem::relaxed(fixtures::esempiodeg_graph(), 1.0, 2.0, 6),
        Problem::fixed_length(fixtures::theta_graph(), vec![1.0, 1.5, 2.0], 0.8, 8),
        Problem::relaxed(fixtures::strstr_graph(), 2.0, 0.5, 6),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let p = &problems[k % problems.len()];
        let x: Vec<f64> = (0..p.num_vars())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let mut g = vec![0.0; p.num_vars()];
        p.gradient(&x, &mut g);
        let jac = p.jacobian(&x);
        for i in 0..p.num_vars() {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (p.objective(&a) - p.objective(&b)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / fd.abs().max(1.0));
            let (ca, cb) = (p.constraints(&a), p.constraints(&b));
            for r in 0..p.num_constraints() {
                let fd = (ca[r] - cb[r]) / (2.0 * h);
                worst = worst.max((fd - jac[r][i]).abs() / fd.abs().max(1.0));
            }
        }
    }
    outcome(
        "10",
        worst <= 1e-5,
        format!("worst relative gradient/Jacobian defect {worst:.2e} at 20 points"),
    )
}

fn main() {
    let strict = std::env::var("ELASTINET_STRICT").is_ok_and(|v| v == "1");
    let criteria: [fn() -> Outcome; 11] = [
        theta_lower_bound,
        degenerate_minimizer,
        classification_fixtures,
        oracle_equivalence,
        scaling_identity,
        critical_curves,
        train_tracks,
        fan_limit,
        fan_sequence,
        lower_bounds,
        gradient_check,
    ];
    let mut blocking = Vec::new();
    for run in criteria {
        let o = run();
        let known = UNATTAINABLE.contains(&o.id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && known {
            " [known unattainable]"
        } else {
            ""
        };
        println!("{tag} criterion {}: {}{note}", o.id, o.detail);
        if !o.pass && (strict || !known) {
            blocking.push(o.id);
        }
    }
    if !blocking.is_empty() {
        eprintln!("failing criteria: {blocking:?}");
        std::process::exit(1);
    }
}
