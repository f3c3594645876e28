//! Acceptance run: one PASS/FAIL line per criterion. Criteria 3 to 5 and the
//! negative controls run again at twice the mesh resolution.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use extrinsic::dgeom::{
    capacity_discrete, clip, count_ends, exit_time_discrete, first_eigenvalue_estimate, CgConfig, EigenConfig,
    TruncationPolicy,
};
use extrinsic::harness::{
    ends_bound, exit_time_comparison, quotient_curves, run_suite, verify_euclidean_sandwich, verify_isoperimetric,
    HarnessConfig, Provenance, QuotientCurve, SuiteSpec, Verdict,
};
use extrinsic::modelspace::{ModelSpace, ParabolicityVerdict, QuadratureConfig, RadiusGrid, WarpingSpec};
use extrinsic::surfaces::{builtin, tessellate, TriMesh};

type Outcome = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn model(dim: usize, warp: &str) -> ModelSpace {
    ModelSpace::new(dim, WarpingSpec::parse(warp).unwrap()).unwrap()
}

fn mesh(name: &str, n: usize) -> TriMesh {
    tessellate(&builtin(name, &BTreeMap::new()).unwrap(), n, n, &[]).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Closed forms of the flat and hyperbolic models in dimensions 2 and 3.
struct Closed {
    dim: usize,
    warp: &'static str,
    vol_sphere: fn(f64) -> f64,
    vol_ball: fn(f64) -> f64,
    capacity: fn(f64, f64) -> f64,
    exit: fn(f64, f64) -> f64,
}

const CLOSED: [Closed; 4] = [
    Closed {
        dim: 2,
        warp: "r",
        vol_sphere: |r| 2.0 * PI * r,
        vol_ball: |r| PI * r * r,
        capacity: |a, b| 2.0 * PI / (b / a).ln(),
        exit: |big, r| (big * big - r * r) / 4.0,
    },
    Closed {
        dim: 3,
        warp: "r",
        vol_sphere: |r| 4.0 * PI * r * r,
        vol_ball: |r| 4.0 * PI * r.powi(3) / 3.0,
        capacity: |a, b| 4.0 * PI / (1.0 / a - 1.0 / b),
        exit: |big, r| (big * big - r * r) / 6.0,
    },
    Closed {
        dim: 2,
        warp: "b=-1",
        vol_sphere: |r| 2.0 * PI * r.sinh(),
        vol_ball: |r| 2.0 * PI * (r.cosh() - 1.0),
        capacity: |a, b| 2.0 * PI / ((b / 2.0).tanh() / (a / 2.0).tanh()).ln(),
        exit: |big, r| 2.0 * ((big / 2.0).cosh() / (r / 2.0).cosh()).ln(),
    },
    Closed {
        dim: 3,
        warp: "b=-1",
        vol_sphere: |r| 4.0 * PI * r.sinh().powi(2),
        vol_ball: |r| 2.0 * PI * (r.sinh() * r.cosh() - r),
        capacity: |a, b| 4.0 * PI / (1.0 / a.tanh() - 1.0 / b.tanh()),
        exit: |big, r| {
            let f = |s: f64| if s == 0.0 { 1.0 } else { s / s.tanh() };
            (f(big) - f(r)) / 2.0
        },
    },
];

fn closed_forms() -> Outcome {
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for c in &CLOSED {
        let m = model(c.dim, c.warp);
        for r in [0.25, 0.5, 1.0, 2.0, 5.0] {
            worst = worst.max(rel(m.vol_sphere(r).map_err(err)?, (c.vol_sphere)(r)));
            worst = worst.max(rel(m.vol_ball(r, &q).map_err(err)?, (c.vol_ball)(r)));
            for x in [0.0, 0.5 * r] {
                worst = worst.max(rel(m.mean_exit_model(r, x, &q).map_err(err)?, (c.exit)(r, x)));
            }
        }
        for (a, b) in [(1.0, 2.0), (0.5, 3.0), (0.1, 1.0)] {
            worst = worst.max(rel(m.capacity_model(a, b, &q).map_err(err)?, (c.capacity)(a, b)));
        }
    }
    let euclid3 = model(3, "r").capacity_model(1.0, 2.0, &q).map_err(err)?;
    worst = worst.max(rel(euclid3, 8.0 * PI));
    Ok((worst <= 1e-8, format!("worst relative error {worst:.2e} (tol 1e-8)")))
}

fn balance() -> Outcome {
    let q = QuadratureConfig::default();
    let grid = RadiusGrid::linspace(0.05, 10.0, 100).map_err(err)?;
    let mut flat_err: f64 = 0.0;
    for dim in [2, 3] {
        let m = model(dim, "r");
        for &r in grid.points() {
            let product = m.iso_quotient(r, &q).map_err(err)? * m.eta(r).map_err(err)?;
            flat_err = flat_err.max((product - 1.0 / dim as f64).abs());
        }
    }
    let hyperbolic = model(2, "sinh(r)").balance_check(&grid, &q).map_err(err)?;
    let sphere = model(2, "sin(r)").balance_check(&RadiusGrid::linspace(0.05, 2.95, 100).map_err(err)?, &q).map_err(err)?;
    let ok = flat_err <= 1e-12 && hyperbolic.below && !sphere.below && sphere.worst_below_at > FRAC_PI_2;
    Ok((
        ok,
        format!(
            "|q eta - 1/m| <= {flat_err:.1e} for w=r; sinh below={}; sin below={} (worst at r={:.3})",
            hyperbolic.below, sphere.below, sphere.worst_below_at
        ),
    ))
}

fn plane(n: usize) -> Outcome {
    let m = mesh("plane", n);
    let w = model(2, "r");
    let cfg = HarnessConfig::default();
    let q = &cfg.quadrature;
    let curve = quotient_curves(&m, &w, &RadiusGrid::linspace(0.5, 3.5, 13).map_err(err)?, None, &cfg).map_err(err)?;
    let quot = curve
        .volume_quotient
        .iter()
        .chain(&curve.flux_quotient)
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max);
    let (rho, big_r) = (1.0, std::f64::consts::E);
    let cap = capacity_discrete(&clip(&m, rho, big_r).map_err(err)?, TruncationPolicy::Error, &cfg.cg).map_err(err)?;
    let cap_err = rel(cap.capacity / w.capacity_model(rho, big_r, q).map_err(err)?, 1.0);
    let ball = clip(&m, 0.0, 2.0).map_err(err)?;
    let e = exit_time_discrete(&ball, &cfg.cg).map_err(err)?;
    let e0 = w.mean_exit_model(2.0, 0.0, q).map_err(err)?;
    let exit_err = ball
        .r()
        .iter()
        .zip(&e)
        .map(|(&r, e)| Ok((e - w.mean_exit_model(2.0, r.min(2.0), q)?).abs() / e0))
        .collect::<Result<Vec<f64>, extrinsic::modelspace::ModelError>>()
        .map_err(err)?
        .into_iter()
        .fold(0.0, f64::max);
    let lambda = first_eigenvalue_estimate(&clip(&m, 0.0, 1.0).map_err(err)?, &EigenConfig::default()).map_err(err)?.lambda;
    let lambda_err = rel(lambda, 5.783185962946784);
    let ok = quot <= 0.01 && cap_err <= 0.02 && exit_err <= 0.02 && lambda_err <= 0.02;
    Ok((
        ok,
        format!(
            "quotients {quot:.1e} (1%), capacity {cap_err:.1e} (2%), exit time {exit_err:.1e} (2%), lambda_1 {lambda:.4} err {lambda_err:.1e} (2%)"
        ),
    ))
}

fn catenoid(n: usize) -> Outcome {
    let m = mesh("catenoid", n);
    let w = model(2, "r");
    let cfg = HarnessConfig::default();
    let prov = Provenance::new(Some(&m), Some(&w), &cfg);
    let mut notes = Vec::new();

    let curve = quotient_curves(&m, &w, &RadiusGrid::linspace(0.5, 20.0, 40).map_err(err)?, None, &cfg).map_err(err)?;
    let mono = verify_isoperimetric(&curve, &prov, &cfg)
        .into_iter()
        .find(|c| c.theorem == "volume-quotient-monotone")
        .ok_or("missing monotonicity check")?;
    let q20 = *curve.volume_quotient.last().unwrap();
    let a = mono.verdict == Verdict::Pass && rel(q20, 2.0) <= 0.05;
    notes.push(format!("(a) monotone {}, q(20)={q20:.4}", mono.verdict));

    let tail = quotient_curves(&m, &w, &RadiusGrid::linspace(2.0, 20.0, 37).map_err(err)?, None, &cfg).map_err(err)?;
    let gap = tail.volume_quotient.iter().zip(&tail.flux_quotient).map(|(v, f)| rel(*f, *v)).fold(0.0, f64::max);
    let b = gap <= 0.01;
    notes.push(format!("(b) flux/vol gap {gap:.1e}"));

    let (rho, big_r) = (1.5, 6.0);
    let cap = capacity_discrete(&clip(&m, rho, big_r).map_err(err)?, TruncationPolicy::Error, &cfg.cg).map_err(err)?;
    let ratio = cap.capacity / w.capacity_model(rho, big_r, &cfg.quadrature).map_err(err)?;
    let c = (0.97..=2.06).contains(&ratio);
    notes.push(format!("(c) capacity ratio {ratio:.4}"));

    let exit = exit_time_comparison(&m, &w, big_r, &cfg).map_err(err)?;
    let lower = exit.iter().find(|c| c.theorem == "exit-time-lower").ok_or("missing exit-time check")?;
    let d = lower.verdict == Verdict::Pass;
    notes.push(format!("(d) exit time {} margin {:.1e}", lower.verdict, lower.margin));

    let count = count_ends(&m, 2.0).map_err(err)?.count;
    let ends = ends_bound(&m, &w, 2.0, 20.0, &cfg).map_err(err)?;
    let asym = ends.asymptotic_bound.unwrap_or(f64::NAN);
    let e = count == 2 && ends.bound >= 2.0 && asym >= 2.0 && rel(asym, 8.0) <= 0.05;
    notes.push(format!("(e) ends {count}, bound {:.3}, asymptotic {asym:.3}", ends.bound));
    Ok((a && b && c && d && e, notes.join("; ")))
}

/// Aitken extrapolation of three values at geometrically spaced radii.
fn aitken(x: [f64; 3]) -> f64 {
    let (d1, d2) = (x[1] - x[0], x[2] - x[1]);
    x[2] - d2 * d2 / (d2 - d1)
}

fn enneper(n: usize) -> Outcome {
    let m = mesh("enneper", n);
    let w = model(2, "r");
    let cfg = HarnessConfig::default();
    let radii = [12.0 / 2.25, 12.0 / 1.5, 12.0];
    let curve = quotient_curves(&m, &w, &RadiusGrid::new(radii.to_vec()).map_err(err)?, None, &cfg).map_err(err)?;
    let q = [curve.volume_quotient[0], curve.volume_quotient[1], curve.volume_quotient[2]];
    let trend = aitken(q);
    let sandwich = verify_euclidean_sandwich(&m, 1.0, 5.0, &cfg).map_err(err)?;
    let sandwich_ok = sandwich.iter().all(|c| c.verdict == Verdict::Pass);
    let count = count_ends(&m, 2.0).map_err(err)?.count;
    let ok = rel(trend, 3.0) <= 0.05 && sandwich_ok && count == 1;
    Ok((
        ok,
        format!(
            "q(12)={:.4} raw, trend limit {trend:.4} (3 +- 5%); sandwich {}; ends {count}",
            q[2],
            if sandwich_ok { "holds" } else { "violated" }
        ),
    ))
}

fn tone() -> Outcome {
    let cfg = HarnessConfig::default();
    let q = &cfg.quadrature;
    let hyp = model(2, "sinh(r)");
    let (up, low) = (hyp.tone_upper_limit(&cfg.model_grid, q).map_err(err)?, hyp.cheeger_bound(&cfg.model_grid, q).map_err(err)?);
    let flat = model(2, "r");
    let (up0, low0) = (flat.tone_upper_limit(&cfg.model_grid, q).map_err(err)?, flat.cheeger_bound(&cfg.model_grid, q).map_err(err)?);
    let ok = (up.reported_limsup - 1.0).abs() <= 1e-3
        && (low.lower_bound - 0.25).abs() <= 1e-3
        && up0.reported_limsup == 0.0
        && low0.lower_bound == 0.0;
    Ok((
        ok,
        format!(
            "sinh: ({:.6}, {:.6}); r: ({}, {})",
            up.reported_limsup, low.lower_bound, up0.reported_limsup, low0.lower_bound
        ),
    ))
}

fn parabolicity() -> Outcome {
    let q = QuadratureConfig::default();
    let cases = [(2, "r", ParabolicityVerdict::Parabolic), (3, "r", ParabolicityVerdict::Hyperbolic), (2, "sinh(r)", ParabolicityVerdict::Hyperbolic)];
    let mut ok = true;
    let mut notes = Vec::new();
    for (dim, warp, expected) in cases {
        let got = model(dim, warp).parabolicity_test(&q).map_err(err)?.verdict;
        ok &= got == expected;
        notes.push(format!("m={dim} w={warp}: {got:?}"));
    }
    Ok((ok, notes.join(", ")))
}

fn negative_controls(n: usize) -> Outcome {
    let m = mesh("catenoid", n);
    let cfg = HarnessConfig::default();
    let flat = model(2, "r");
    let curve = quotient_curves(&m, &flat, &RadiusGrid::linspace(0.5, 20.0, 40).map_err(err)?, None, &cfg).map_err(err)?;
    let mut vol = curve.volume_quotient.clone();
    vol[25] *= 0.95;
    let tampered = QuotientCurve::new(curve.radii.clone(), vol, curve.flux_quotient.clone(), None).map_err(err)?;
    let prov = Provenance::new(Some(&m), Some(&flat), &cfg);
    let caught = verify_isoperimetric(&tampered, &prov, &cfg)
        .iter()
        .any(|c| c.theorem == "volume-quotient-monotone" && c.verdict == Verdict::Fail);

    let spec = SuiteSpec {
        grid: RadiusGrid::linspace(0.5, 20.0, 40).map_err(err)?,
        rho: 1.5,
        big_r: 6.0,
        ends_r: 2.0,
        ends_t: 20.0,
        tone_grid: RadiusGrid::linspace(4.0, 20.0, 5).map_err(err)?,
    };
    let suite = run_suite(&m, &model(2, "sinh(r)"), &spec, &cfg).map_err(err)?;
    let model_free = ["euclidean-capacity-lower", "euclidean-capacity-upper", "exit-time-boundary"];
    let leaked: Vec<&str> = suite
        .report
        .checks
        .iter()
        .filter(|c| !model_free.contains(&c.theorem.as_str()) && c.verdict != Verdict::Inconclusive)
        .map(|c| c.theorem.as_str())
        .collect();
    Ok((
        caught && leaked.is_empty(),
        format!(
            "tampered curve {}; sinh model: {} inconclusive, {} non-inconclusive model checks",
            if caught { "fails" } else { "passes" },
            suite.report.count(Verdict::Inconclusive),
            leaked.len()
        ),
    ))
}

fn plane_capacity_error(n: usize) -> Result<f64, String> {
    let m = mesh("plane", n);
    let (rho, big_r) = (1.0, std::f64::consts::E);
    let cap = capacity_discrete(&clip(&m, rho, big_r).map_err(err)?, TruncationPolicy::Error, &CgConfig::default())
        .map_err(err)?;
    Ok(rel(cap.capacity, 2.0 * PI))
}

fn convergence() -> Outcome {
    let (coarse, fine) = (plane_capacity_error(128)?, plane_capacity_error(256)?);
    let factor = coarse / fine;
    Ok((factor >= 1.5, format!("capacity error {coarse:.2e} at 128, {fine:.2e} at 256, factor {factor:.2}")))
}

struct Runner {
    failures: usize,
}

impl Runner {
    fn check(&mut self, label: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed <= b);
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = budget.map(|b| format!(" / {:.0} s", b.as_secs_f64())).unwrap_or_default();
        println!("{} {label}: {detail} [{:.2} s{budget}]", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        self.failures += usize::from(!ok);
    }
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut run = Runner { failures: 0 };
    run.check("C1 model closed forms", secs(1), closed_forms);
    run.check("C2 balance", None, balance);
    run.check("C3 plane self-test at 256", secs(30), || plane(256));
    run.check("C4 catenoid suite at 192", secs(120), || catenoid(192));
    run.check("C5 Enneper suite at 192", secs(120), || enneper(192));
    run.check("C6 tone bounds", secs(1), tone);
    run.check("C7 parabolicity", None, parabolicity);
    run.check("C8 negative controls at 192", None, || negative_controls(192));
    run.check("C9 capacity convergence", None, convergence);
    run.check("C9 plane self-test at 512", None, || plane(512));
    run.check("C9 catenoid suite at 384", None, || catenoid(384));
    run.check("C9 Enneper suite at 384", None, || enneper(384));
    run.check("C9 negative controls at 384", None, || negative_controls(384));
    println!("acceptance: {} failed", run.failures);
    if run.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
