//! Acceptance checks, one PASS/FAIL line each. Runs with its own `main` so
//! the lines are printed even when everything passes.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robqp_cli::run_command;
use robqp_core::certificates::{
    verify_alternative_certificate, verify_one_sided_certificate, verify_optimality_certificate,
    AlternativeCertificate,
};
use robqp_core::convexity::{
    check_scaled_family, falsify_image_convexity, DEFAULT_DIM_LIMIT, DEFAULT_PREIMAGE_RESOLUTION,
};
use robqp_core::gap_example::{build_gap_example, gap_pd_triple, gap_witness_values};
use robqp_core::homogenization::{build_w_pencil, eval_homog, homogenize, omega_mu_generators};
use robqp_core::linalg::{sym_eigen, DEFAULT_PSD_TOL};
use robqp_core::model::{
    constraint_at, corner_values, is_robust_feasible, robust_range, Interval, LowerBound,
    QuadraticFunction, UncertainConstraint,
};
use robqp_core::oracle::brute_force_min;
use robqp_core::search::{
    decide_alternative, search_one_sided_certificate, search_optimality_certificate,
};
use robqp_core::{AlternativeOutcome, Corner, RobustInstance, SearchBudget, SymmetricMatrix};
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["robqp"];
    argv.extend_from_slice(args);
    let (code, out, _) = run_command(argv);
    (code, out)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-s..=s)).collect()
}

fn random_sym(r: &mut ChaCha8Rng, n: usize, s: f64) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, r.random_range(-s..=s));
        }
    }
    m
}

fn random_interval(r: &mut ChaCha8Rng) -> Interval {
    let lo = r.random_range(-2.0..1.0);
    Interval::new(lo, lo + r.random_range(0.1..2.0)).unwrap()
}

fn random_constraint(r: &mut ChaCha8Rng, n: usize) -> UncertainConstraint {
    UncertainConstraint::new(
        random_sym(r, n, 2.0),
        random_sym(r, n, 1.0),
        random_vec(r, n, 1.0),
        random_vec(r, n, 1.0),
        random_interval(r),
        random_interval(r),
        LowerBound::NegInfinity,
        f64::MAX,
    )
    .unwrap()
}

/// Instance with a known global minimizer `x̄`: the worst corner is active
/// and the Lagrangian at that corner is convex and stationary.
fn constructed(r: &mut ChaCha8Rng, n: usize, two_sided: bool) -> (RobustInstance, Vec<f64>) {
    let xbar = random_vec(r, n, 1.0);
    let base = random_constraint(r, n);
    let cv = corner_values(&base, &xbar).unwrap();
    let k = (0..4).max_by(|&i, &j| cv[i].total_cmp(&cv[j])).unwrap();
    let g_min = cv.iter().copied().fold(f64::INFINITY, f64::min);
    let lower = if two_sided {
        LowerBound::Finite(g_min - r.random_range(0.5..2.0))
    } else {
        LowerBound::NegInfinity
    };
    let con = UncertainConstraint { lower, upper: cv[k], ..base };
    let lambda = r.random_range(0.2..2.0);
    let (cm, cd) = con.corner_params(Corner::ALL[k]);
    let g = constraint_at(&con, cm, cd).unwrap();
    let p = random_sym(r, n, 0.3).add_scaled(&SymmetricMatrix::scaled_identity(n, 1.0), 1.0).unwrap();
    let quad = p.add_scaled(&g.quad, -lambda).unwrap();
    let grad = g.gradient(&xbar).unwrap();
    let ax = quad.mul_vec(&xbar).unwrap();
    let linear = ax.iter().zip(&grad).map(|(p, q)| -p - lambda * q).collect();
    let obj = QuadraticFunction::new(quad, linear, 0.0).unwrap();
    (RobustInstance::new(obj, con).unwrap(), xbar)
}

/// `f = ½a·x² + lin·x`, `lower ≤ ½b·x² ≤ upper`.
fn one_dim(a: f64, lin: f64, b: f64, lower: LowerBound, upper: f64) -> RobustInstance {
    let unit = Interval::new(-1.0, 1.0).unwrap();
    let obj = QuadraticFunction::new(SymmetricMatrix::diagonal(&[a]).unwrap(), vec![lin], 0.0).unwrap();
    let con = UncertainConstraint::new(
        SymmetricMatrix::diagonal(&[b]).unwrap(),
        SymmetricMatrix::zeros(1),
        vec![0.0],
        vec![0.0],
        unit,
        unit,
        lower,
        upper,
    )
    .unwrap();
    RobustInstance::new(obj, con).unwrap()
}

struct Golden {
    name: String,
    instance: RobustInstance,
    xbar: Vec<f64>,
    optimum: f64,
    /// Half-width of the sampling box that covers the feasible set.
    sample_box: f64,
}

fn references() -> Vec<Golden> {
    let g = |name: &str, instance, x: f64, optimum| Golden {
        name: name.into(),
        instance,
        xbar: vec![x],
        optimum,
        sample_box: 3.0,
    };
    vec![
        g("quarter", one_dim(1.0, 1.0, 2.0, LowerBound::NegInfinity, 0.25), -0.5, -0.375),
        g("band", one_dim(1.0, 0.0, 2.0, LowerBound::Finite(1.0), 4.0), 1.0, 0.5),
        g("interior", one_dim(2.0, 0.0, 2.0, LowerBound::Finite(-1.0), 2.0), 0.0, 0.0),
    ]
}

fn golden_set() -> Vec<Golden> {
    let mut out: Vec<Golden> = (5..=8)
        .map(|n| {
            let b = build_gap_example(n).unwrap();
            Golden {
                name: format!("example n={n}"),
                instance: b.instance,
                xbar: b.xbar,
                optimum: -b.gamma,
                sample_box: 0.75,
            }
        })
        .collect();
    out.extend(references());
    out
}

/// Searches for a certificate at `x̄` and re-verifies it at `tol`.
fn certify(inst: &RobustInstance, xbar: &[f64], budget: &SearchBudget) -> Result<bool, String> {
    let tol = budget.tol;
    if inst.is_one_sided() {
        match search_one_sided_certificate(inst, xbar, budget).map_err(|e| e.to_string())? {
            Some((c, _)) => Ok(verify_one_sided_certificate(inst, xbar, &c, tol).unwrap().passed),
            None => Ok(false),
        }
    } else {
        match search_optimality_certificate(inst, xbar, budget).map_err(|e| e.to_string())? {
            Some((c, _)) => Ok(verify_optimality_certificate(inst, xbar, &c, tol).unwrap().passed),
            None => Ok(false),
        }
    }
}

fn closed_form_example() -> Check {
    let start = Instant::now();
    let (code, out) = cli(&["reproduce-example", "--n", "5", "--json"]);
    let secs = start.elapsed().as_secs_f64();
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let num = |p: &str| v.pointer(p).and_then(Value::as_f64).ok_or(format!("missing {p}"));
    let gamma = num("/gamma")?;
    let lambda = num("/certificate/lambda")?;
    let (mu, delta) = (num("/certificate/mu")?, num("/certificate/delta")?);
    let root10 = 10f64.sqrt();
    let mut dev = (gamma - (2.5f64.sqrt() - 0.25)).abs();
    for x in v["xbar"].as_array().ok_or("missing xbar")? {
        dev = dev.max((x.as_f64().unwrap() + 1.0 / root10).abs());
    }
    dev = dev.max((lambda - (root10 - 1.0) / 4.0).abs());
    dev = dev.max((mu - 1.0).abs()).max((delta + 1.0).abs());
    let mut resid: f64 = 0.0;
    for key in ["stationarity_residual", "complementarity_upper"] {
        resid = resid.max(num(&format!("/certificate/report/{key}"))?.abs());
    }
    resid = resid.max((-num("/certificate/report/min_eigenvalue")?).max(0.0));
    ensure(code == 0 && v["status"] == "PASS", || format!("exit {code}, status {}", v["status"]))?;
    ensure(dev <= 1e-6, || format!("max deviation {dev:e}"))?;
    ensure(resid <= 1e-8, || format!("residual {resid:e}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("max deviation {dev:.1e}, residual {resid:.1e}, {secs:.2}s"))
}

fn gap_witness() -> Check {
    let n = 5;
    let b = build_gap_example(n).unwrap();
    let hs = homogenize(&b.instance, b.gamma).unwrap();
    let minus_s = vec![-1.0; n];
    let h0 = eval_homog(&hs.h0, &minus_s, 1.0).unwrap();
    ensure((h0 + 1.1688612).abs() <= 1e-6, || format!("H0 value {h0}"))?;
    let pencil = build_w_pencil(&b.instance.constraint, 1.0).unwrap();
    for mu in b.instance.constraint.mu.grid(11) {
        let p = eval_homog(&pencil.at(mu), &minus_s, 1.0).unwrap();
        ensure((p + 1.0).abs() <= 1e-12, || format!("pencil value {p} at mu={mu}"))?;
    }
    for n in 5..=50 {
        let (h, p) = gap_witness_values(n).map_err(|e| e.to_string())?;
        ensure(h < 0.0 && p < 0.0, || format!("n={n}: {h}, {p}"))?;
    }
    Ok(format!("H0 {h0:.7}, pencil -1 on 11 mu values, negative for n=5..50"))
}

fn pd_combination() -> Check {
    let mut worst: f64 = 0.0;
    for n in [5, 8] {
        let t = gap_pd_triple(n).unwrap();
        let gamma = build_gap_example(n).unwrap().gamma;
        let comb = SymmetricMatrix::linear_combination(&t, &[-2.0, -2.0 - 2.0 * gamma, 1.0]).unwrap();
        for e in sym_eigen(&comb).unwrap().values {
            worst = worst.max((e - 2.0).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("eigenvalue deviation {worst:e}"))?;
    Ok(format!("eigenvalues 2 within {worst:.1e} for n=5,8"))
}

fn scaled_family() -> Check {
    for n in 5..=8 {
        let b = build_gap_example(n).unwrap();
        let hs = homogenize(&b.instance, b.gamma).unwrap();
        let mut blocks: Vec<_> = omega_mu_generators(&hs, false)
            .unwrap()
            .iter()
            .map(|g| g.leading_block(n).unwrap())
            .collect();
        let r = check_scaled_family(&blocks, DEFAULT_PSD_TOL);
        let anchor_ok = r.a0_index.is_some_and(|i| blocks[i].max_abs_diff(&SymmetricMatrix::identity(n)).unwrap() == 0.0);
        let mut rho = r.rho.clone();
        rho.sort_by(f64::total_cmp);
        ensure(r.passes && anchor_ok && rho == [0.0, 0.0, 4.0, 4.0] && n >= r.m + 1, || {
            format!("n={n}: {} rho {:?}", r.reason, r.rho)
        })?;
        let last = blocks.len() - 1;
        let mut bump = vec![0.0; n];
        bump[0] = 0.1;
        blocks[last] = blocks[last].add_scaled(&SymmetricMatrix::diagonal(&bump).unwrap(), 1.0).unwrap();
        let p = check_scaled_family(&blocks, DEFAULT_PSD_TOL);
        ensure(!p.passes, || format!("n={n}: perturbed family passed"))?;
    }
    Ok("passes for n=5..8 with rho {0,0,4,4}, perturbed family rejected".into())
}

fn oracle_agreement() -> Check {
    let b = build_gap_example(5).unwrap();
    let start = Instant::now();
    let res = brute_force_min(&b.instance, 1.0, 0, 1_000_000, 7).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let best = res.best_value.ok_or("no feasible sample")?;
    ensure((best + 1.3311388).abs() <= 1e-2, || format!("best {best}"))?;
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    for g in references() {
        let r = brute_force_min(&g.instance, 3.0, 4001, 0, 0).map_err(|e| e.to_string())?;
        let v = r.best_value.ok_or(format!("{}: infeasible", g.name))?;
        ensure((v - g.optimum).abs() <= 1e-6, || format!("{}: {v} vs {}", g.name, g.optimum))?;
    }
    Ok(format!("example best {best:.7} in {secs:.1}s, references within 1e-6"))
}

fn corner_reduction() -> Check {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 4;
        let con = random_constraint(&mut r, n);
        for _ in 0..20 {
            let x = random_vec(&mut r, n, 2.0);
            let (lo, hi) = robust_range(&con, &x).unwrap();
            let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
            for mu in con.mu.grid(11) {
                for delta in con.delta.grid(11) {
                    let v = con.value_at(&x, mu, delta).unwrap();
                    glo = glo.min(v);
                    ghi = ghi.max(v);
                }
            }
            worst = worst.max((lo - glo).abs()).max((hi - ghi).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max difference {worst:e}"))?;
    Ok(format!("2000 points, max difference {worst:.1e}"))
}

fn sampled_soundness() -> Check {
    let budget = SearchBudget::default();
    let mut worst = f64::INFINITY;
    for (k, g) in golden_set().into_iter().enumerate() {
        ensure(certify(&g.instance, &g.xbar, &budget)?, || format!("{}: no verified certificate", g.name))?;
        let gamma = -g.instance.objective_value(&g.xbar).unwrap();
        let n = g.instance.dim();
        let mut r = rng(70 + k as u64);
        let (mut tested, mut draws) = (0, 0);
        while tested < 10_000 {
            draws += 1;
            ensure(draws <= 10_000_000, || format!("{}: too few feasible draws", g.name))?;
            let x = random_vec(&mut r, n, g.sample_box);
            if !is_robust_feasible(&g.instance, &x, 0.0).unwrap().feasible {
                continue;
            }
            tested += 1;
            let v = g.instance.objective_value(&x).unwrap() + gamma;
            worst = worst.min(v);
            ensure(v >= -1e-6, || format!("{}: f+gamma = {v} at {x:?}", g.name))?;
        }
    }
    Ok(format!("7 instances x 10^4 feasible samples, min f+gamma {worst:.2e}"))
}

fn search_consistency() -> Check {
    let tol = 1e-8;
    let budget = SearchBudget { tol, ..SearchBudget::default() };
    let mut count = 0;
    for g in golden_set() {
        ensure(certify(&g.instance, &g.xbar, &budget)?, || format!("{}: not verified", g.name))?;
        count += 1;
    }
    let small = SearchBudget { mu_grid: 11, delta_grid: 11, ..budget };
    let mut r = rng(8);
    for i in 0..20 {
        let (inst, xbar) = constructed(&mut r, 1 + i % 3, i % 2 == 1);
        ensure(certify(&inst, &xbar, &small)?, || format!("constructed #{i}: not verified"))?;
        count += 1;
    }
    let interior = &references()[2].instance;
    let alt_budget = SearchBudget { sample_count: 10_000, mu_grid: 11, delta_grid: 11, ..budget };
    for gamma in [-0.5, 0.0] {
        let outcome = decide_alternative(interior, gamma, &alt_budget).map_err(|e| e.to_string())?;
        let cert = match outcome {
            AlternativeOutcome::BranchA { witness, .. } => AlternativeCertificate::WitnessPoint { x: witness },
            AlternativeOutcome::BranchB { certificate, .. } => certificate,
            AlternativeOutcome::Inconclusive => return Err(format!("alternative at {gamma}: inconclusive")),
        };
        let rep = verify_alternative_certificate(interior, gamma, &cert, tol).unwrap();
        ensure(rep.passed, || format!("alternative at {gamma}: not verified"))?;
        count += 1;
    }
    let band = &references()[1].instance;
    let control = search_optimality_certificate(band, &[1.5], &budget).map_err(|e| e.to_string())?;
    ensure(control.is_none(), || "x=1.5 in the band instance was certified".into())?;
    Ok(format!("{count} certificates verified at 1e-8, x=1.5 control NOT_FOUND"))
}

fn convexity_falsifier() -> Check {
    let triple = vec![
        SymmetricMatrix::diagonal(&[1.0, 0.0]).unwrap(),
        SymmetricMatrix::diagonal(&[0.0, 1.0]).unwrap(),
        SymmetricMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap(),
    ];
    let w = falsify_image_convexity(&triple, DEFAULT_DIM_LIMIT, 101, 50, 0)
        .map_err(|e| e.to_string())?
        .ok_or("no witness for the triple")?;
    let dev = w.midpoint.iter().zip([1.0, 1.0, 0.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-12, || format!("midpoint {:?}", w.midpoint))?;
    let mut r = rng(9);
    for n in [2, 3] {
        for t in 0..50u64 {
            let forms = vec![random_sym(&mut r, n, 1.0), random_sym(&mut r, n, 1.0)];
            let found = falsify_image_convexity(&forms, DEFAULT_DIM_LIMIT, DEFAULT_PREIMAGE_RESOLUTION, 4, t)
                .map_err(|e| e.to_string())?;
            ensure(found.is_none(), || format!("n={n} pair {t}: spurious witness"))?;
        }
    }
    Ok("triple witness at midpoint (1,1,0), 100 random pairs NO_WITNESS".into())
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("robqp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let b = build_gap_example(5).unwrap();
    let write = |name: &str, text: String| std::fs::write(dir.join(name), text).map_err(|e| e.to_string());
    write("ex.json", cli(&["example-instance", "--n", "5"]).1)?;
    write("x.json", serde_json::to_string(&b.xbar).unwrap())?;
    write(
        "band.json",
        r#"{"n":1,"A":[[1]],"B1":[[2]],"B2":[[0]],"a":[0],"b1":[0],"b2":[0],"mu":[-1,1],"delta":[-1,1],"alpha":1,"beta":4}"#.into(),
    )?;
    write("one.json", "[1]".into())?;
    let (_, out) = cli(&["certify", "--instance", &path("ex.json"), "--xbar", &path("x.json"), "--json"]);
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    write("cert.json", v["certificate"].to_string())?;
    let (ex, x, band, one, cert) = (path("ex.json"), path("x.json"), path("band.json"), path("one.json"), path("cert.json"));
    let commands: Vec<Vec<&str>> = vec![
        vec!["check-feasible", "--instance", &ex, "--x", &x],
        vec!["certify", "--instance", &ex, "--xbar", &x],
        vec!["certify-one-sided", "--instance", &ex, "--xbar", &x],
        vec!["certify", "--instance", &band, "--xbar", &one],
        vec!["verify-cert", "--instance", &ex, "--cert", &cert, "--xbar", &x],
        vec!["alternative", "--instance", &band, "--gamma", "-0.5", "--samples", "20000", "--seed", "3"],
        vec!["alternative", "--instance", &band, "--gamma", "-0.25", "--samples", "2000", "--mu-grid", "11", "--delta-grid", "11"],
        vec!["slater", "--instance", &ex, "--x", "zeros"],
        vec!["brute-force", "--instance", &ex, "--box", "1", "--samples", "20000", "--seed", "5"],
        vec!["check-convexity", "--instance", &ex, "--directions", "500", "--seed", "2"],
        vec!["check-convexity", "--instance", &band, "--directions", "500", "--trials", "10", "--seed", "2"],
        vec!["reproduce-example", "--n", "6"],
        vec!["example-instance", "--n", "7"],
    ];
    for c in &commands {
        let mut args = c.clone();
        args.push("--json");
        let first = cli(&args);
        let second = cli(&args);
        ensure(first == second && !first.1.is_empty(), || format!("{} differs between runs", c[0]))?;
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!("{} command lines byte-identical on rerun", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("closed-form example via reproduce-example", closed_form_example),
        ("gap witness of the homogeneous system", gap_witness),
        ("positive definite combination", pd_combination),
        ("scaled lift family", scaled_family),
        ("brute-force oracle agreement", oracle_agreement),
        ("corner reduction", corner_reduction),
        ("certificate soundness by sampling", sampled_soundness),
        ("search/verify consistency", search_consistency),
        ("image convexity falsifier", convexity_falsifier),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
