//! Command-line front end: instance and certificate files, command dispatch,
//! and human plus JSON reports.
//!
//! Exit codes: 0 when the check passes, 1 on a failed check, an exhausted
//! search or an inconclusive decision, 2 on any input error.

pub mod document;
pub mod error;

use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use robqp_core::certificates::{
    check_slater, verify_alternative_certificate, verify_one_sided_certificate,
    verify_optimality_certificate, VerificationReport,
};
use robqp_core::convexity::{
    check_scaled_family, falsify_image_convexity, find_pd_combination, verify_pd_combination,
    PdSearchGrid, DEFAULT_DIM_LIMIT,
};
use robqp_core::gap_example::{build_gap_example, gap_witness_values, verify_example_convexity_hypotheses};
use robqp_core::homogenization::{homogenize, omega_mu_generators};
use robqp_core::linalg::DEFAULT_PSD_TOL;
use robqp_core::model::is_robust_feasible;
use robqp_core::oracle::brute_force_min;
use robqp_core::search::{
    decide_alternative, search_one_sided_certificate, search_optimality_certificate,
};
use robqp_core::{AlternativeCertificate, AlternativeOutcome, RobustInstance, SearchBudget};

pub use document::{emit_instance, parse_certificate, parse_instance, AnyCertificate, CertificateDocument};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "robqp", version, about = "Certificates for robust quadratic programs with one uncertain quadratic constraint")]
pub struct Cli {
    /// Print the machine-readable report on stdout (the table goes to stderr).
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Robust feasibility of a point.
    CheckFeasible(FeasibleArgs),
    /// Search for and verify an optimality certificate at x̄.
    Certify(CertifyArgs),
    /// Same as certify, restricted to instances with alpha = "-inf".
    CertifyOneSided(CertifyArgs),
    /// Verify a certificate file.
    VerifyCert(VerifyArgs),
    /// Decide which branch of the robust alternative holds for a given gamma.
    Alternative(AlternativeArgs),
    /// Check that a point lies strictly inside the band.
    Slater(SlaterArgs),
    /// Brute-force minimization over a box.
    BruteForce(BruteForceArgs),
    /// Convexity checks on the lifted generator family.
    CheckConvexity(ConvexityArgs),
    /// Reproduce the closed-form example family for a given n.
    ReproduceExample(ExampleArgs),
    /// Print the example instance (or its optimal point) as JSON.
    ExampleInstance(ExampleInstanceArgs),
}

#[derive(Debug, Args)]
pub struct FeasibleArgs {
    #[arg(long)]
    pub instance: String,
    /// Point file (JSON array) or `zeros`.
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub xbar: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 101)]
    pub mu_grid: usize,
    #[arg(long, default_value_t = 101)]
    pub delta_grid: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub cert: String,
    /// Candidate point; required for optimality and one-sided certificates.
    #[arg(long)]
    pub xbar: Option<String>,
    /// Required for alternative certificates unless --xbar is given (then −f(x̄)).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct AlternativeArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 101)]
    pub mu_grid: usize,
    #[arg(long, default_value_t = 101)]
    pub delta_grid: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long = "box", default_value_t = 10.0)]
    pub box_halfwidth: f64,
}

#[derive(Debug, Args)]
pub struct SlaterArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
}

#[derive(Debug, Args)]
pub struct BruteForceArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long = "box", default_value_t = 10.0)]
    pub box_halfwidth: f64,
    /// Grid points per coordinate; 0 samples randomly only.
    #[arg(long, default_value_t = 0)]
    pub grid: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ConvexityArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random directions for the positive definite combination search.
    #[arg(long, default_value_t = 10_000)]
    pub directions: usize,
    /// Falsifier trials (after the structured ones).
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Preimage grid resolution for the falsifier.
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExampleInstanceArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Print the optimal point instead of the instance.
    #[arg(long)]
    pub point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotFound,
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotFound => "NOT_FOUND",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            _ => 1,
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Result of one command before rendering.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub status: Status,
    pub body: Value,
    pub rows: Vec<(String, String)>,
    /// Printed verbatim instead of the table (used by example-instance).
    pub raw: Option<String>,
}

impl Report {
    fn new(command: &'static str, status: Status, body: Value) -> Self {
        Report { command, status, body, rows: Vec::new(), raw: None }
    }

    fn row(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.rows.push((key.to_string(), value.to_string()));
        self
    }

    pub fn to_json(&self) -> String {
        let mut doc = json!({ "command": self.command, "status": self.status.label() });
        if let (Value::Object(dst), Value::Object(src)) = (&mut doc, &self.body) {
            for (k, v) in src {
                dst.insert(k.clone(), v.clone());
            }
        }
        serde_json::to_string_pretty(&doc).expect("reports always serialize") + "\n"
    }

    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {}", "command", self.command);
        let _ = writeln!(out, "{:<width$}  {}", "status", self.status.label());
        for (k, v) in &self.rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source })
}

fn load_instance(path: &str) -> Result<RobustInstance, CliError> {
    parse_instance(&read(path)?)
}

fn load_point(spec: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let x = if spec == "zeros" { vec![0.0; n] } else { document::parse_vector(&read(spec)?)? };
    if x.len() != n {
        return Err(CliError::Invalid(format!("point has length {}, instance has n={n}", x.len())));
    }
    Ok(x)
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.7}")).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3e}"))
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn report_rows(mut r: Report, rep: &VerificationReport) -> Report {
    let d = document::ReportDocument::from(rep);
    r = r
        .row("verified", d.passed)
        .row("stationarity", fmt_opt(d.stationarity_residual))
        .row("compl. upper", fmt_opt(d.complementarity_upper))
        .row("compl. lower", fmt_opt(d.complementarity_lower))
        .row("min eigenvalue", fmt_opt(d.min_eigenvalue))
        .row("upper margin", fmt_opt(d.upper_margin))
        .row("lower margin", fmt_opt(d.lower_margin));
    if let Some(g) = d.objective_gap {
        r = r.row("f(x)+gamma", format!("{g:.6e}"));
    }
    if let Some(i) = d.aggregate_infimum {
        r = r.row("aggregate inf", format!("{i:.6e}"));
    }
    r
}

fn cert_rows(mut r: Report, cert: &AnyCertificate) -> Report {
    match cert {
        AnyCertificate::OneSided(c) => {
            r = r.row("lambda", format!("{:.7}", c.lambda)).row("mu", c.mu).row("delta", c.delta);
        }
        AnyCertificate::Optimality(c) => {
            r = r
                .row("lambda1", format!("{:.7}", c.lambda1))
                .row("lambda2", format!("{:.7}", c.lambda2))
                .row("mu_beta", c.mu_beta)
                .row("mu_alpha", c.mu_alpha)
                .row("delta_beta", c.delta_beta)
                .row("delta_alpha", c.delta_alpha);
        }
        AnyCertificate::Alternative(AlternativeCertificate::WitnessPoint { x }) => {
            r = r.row("witness", fmt_vec(x));
        }
        AnyCertificate::Alternative(AlternativeCertificate::Multipliers { lambda0, inner }) => {
            r = r.row("lambda0", lambda0);
            r = cert_rows(r, &AnyCertificate::Optimality(*inner));
        }
    }
    r
}

fn cert_json(cert: &AnyCertificate, rep: &VerificationReport) -> Value {
    serde_json::to_value(CertificateDocument::new(cert, Some(rep))).expect("certificate serializes")
}

fn budget(tol: f64, mu_grid: usize, delta_grid: usize) -> SearchBudget {
    SearchBudget { mu_grid, delta_grid, tol, ..SearchBudget::default() }
}

fn check_feasible(a: &FeasibleArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let x = load_point(&a.x, inst.dim())?;
    let rep = is_robust_feasible(&inst, &x, a.tol)?;
    let body = json!({
        "tol": a.tol,
        "feasible": rep.feasible,
        "g_min": rep.g_min,
        "g_max": rep.g_max,
        "upper_margin": num(rep.upper_margin),
        "lower_margin": num(rep.lower_margin),
    });
    Ok(Report::new("check-feasible", Status::of(rep.feasible), body)
        .row("feasible", rep.feasible)
        .row("g range", format!("[{:.9}, {:.9}]", rep.g_min, rep.g_max))
        .row("upper margin", format!("{:.9}", rep.upper_margin))
        .row("lower margin", format!("{:.9}", rep.lower_margin)))
}

fn certify(a: &CertifyArgs, one_sided_only: bool) -> Result<Report, CliError> {
    let name = if one_sided_only { "certify-one-sided" } else { "certify" };
    let inst = load_instance(&a.instance)?;
    let xbar = load_point(&a.xbar, inst.dim())?;
    let b = budget(a.tol, a.mu_grid, a.delta_grid);
    let found = if one_sided_only || inst.is_one_sided() {
        search_one_sided_certificate(&inst, &xbar, &b)?
            .map(|(c, r)| (AnyCertificate::OneSided(c), r))
    } else {
        search_optimality_certificate(&inst, &xbar, &b)?
            .map(|(c, r)| (AnyCertificate::Optimality(c), r))
    };
    let fx = inst.objective_value(&xbar)?;
    let params = json!({ "tol": a.tol, "mu_grid": a.mu_grid, "delta_grid": a.delta_grid });
    Ok(match found {
        Some((cert, rep)) => {
            let status = Status::of(rep.passed);
            let r = Report::new(
                name,
                status,
                json!({ "params": params, "objective_value": fx, "certificate": cert_json(&cert, &rep) }),
            )
            .row("f(xbar)", format!("{fx:.9}"));
            report_rows(cert_rows(r, &cert), &rep)
        }
        None => Report::new(name, Status::NotFound, json!({ "params": params, "objective_value": fx }))
            .row("f(xbar)", format!("{fx:.9}"))
            .row("certificate", "none on the search grid"),
    })
}

fn verify_cert(a: &VerifyArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let cert = parse_certificate(&read(&a.cert)?)?;
    let xbar = a.xbar.as_deref().map(|p| load_point(p, inst.dim())).transpose()?;
    let need_x = || {
        xbar.clone()
            .ok_or_else(|| CliError::Invalid("--xbar is required for this certificate kind".into()))
    };
    let rep = match &cert {
        AnyCertificate::Optimality(c) => verify_optimality_certificate(&inst, &need_x()?, c, a.tol)?,
        AnyCertificate::OneSided(c) => verify_one_sided_certificate(&inst, &need_x()?, c, a.tol)?,
        AnyCertificate::Alternative(c) => {
            let gamma = match (a.gamma, &xbar) {
                (Some(g), _) => g,
                (None, Some(x)) => -inst.objective_value(x)?,
                (None, None) => {
                    return Err(CliError::Invalid(
                        "alternative certificates need --gamma or --xbar".into(),
                    ))
                }
            };
            verify_alternative_certificate(&inst, gamma, c, a.tol)?
        }
    };
    let r = Report::new(
        "verify-cert",
        Status::of(rep.passed),
        json!({ "tol": a.tol, "certificate": cert_json(&cert, &rep) }),
    );
    Ok(report_rows(cert_rows(r, &cert), &rep))
}

fn alternative(a: &AlternativeArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let b = SearchBudget {
        mu_grid: a.mu_grid,
        delta_grid: a.delta_grid,
        sample_count: a.samples,
        seed: a.seed,
        tol: a.tol,
        box_halfwidth: a.box_halfwidth,
        ..SearchBudget::default()
    };
    let params = json!({
        "gamma": a.gamma,
        "seed": a.seed,
        "tol": a.tol,
        "mu_grid": a.mu_grid,
        "delta_grid": a.delta_grid,
        "samples": a.samples,
        "box": a.box_halfwidth,
    });
    let outcome = decide_alternative(&inst, a.gamma, &b)?;
    let base = |status, branch: &str, extra: Option<Value>| {
        let mut body = json!({ "params": params, "branch": branch });
        if let Some(c) = extra {
            body["certificate"] = c;
        }
        Report::new("alternative", status, body).row("seed", a.seed).row("branch", branch)
    };
    Ok(match outcome {
        AlternativeOutcome::BranchA { witness, report } => {
            let cert = AnyCertificate::Alternative(AlternativeCertificate::WitnessPoint { x: witness });
            let r = base(Status::of(report.passed), "a", Some(cert_json(&cert, &report)));
            report_rows(cert_rows(r, &cert), &report)
        }
        AlternativeOutcome::BranchB { certificate, report } => {
            let cert = AnyCertificate::Alternative(certificate);
            let r = base(Status::of(report.passed), "b", Some(cert_json(&cert, &report)));
            report_rows(cert_rows(r, &cert), &report)
        }
        AlternativeOutcome::Inconclusive => base(Status::Inconclusive, "none", None),
    })
}

fn slater(a: &SlaterArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let x = load_point(&a.x, inst.dim())?;
    let ok = check_slater(&inst, &x, a.margin)?;
    let rep = is_robust_feasible(&inst, &x, 0.0)?;
    Ok(Report::new(
        "slater",
        Status::of(ok),
        json!({ "margin": a.margin, "strict": ok, "g_min": rep.g_min, "g_max": rep.g_max }),
    )
    .row("strictly inside", ok)
    .row("g range", format!("[{:.9}, {:.9}]", rep.g_min, rep.g_max)))
}

fn brute_force(a: &BruteForceArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let r = brute_force_min(&inst, a.box_halfwidth, a.grid, a.samples, a.seed)?;
    let body = json!({
        "params": { "box": a.box_halfwidth, "grid": a.grid, "samples": a.samples, "seed": a.seed },
        "feasible_found": r.feasible_found,
        "best_x": r.best_x,
        "best_value": r.best_value,
        "sampled_value": r.sampled_value,
        "samples_evaluated": r.samples_evaluated,
        "grid_mode": r.grid_mode,
    });
    let mut rep = Report::new("brute-force", Status::of(r.feasible_found), body)
        .row("seed", a.seed)
        .row("evaluated", r.samples_evaluated)
        .row("grid mode", r.grid_mode);
    if let (Some(x), Some(v)) = (&r.best_x, r.best_value) {
        rep = rep.row("best value", format!("{v:.9}")).row("best x", fmt_vec(x));
    } else {
        rep = rep.row("best value", "no feasible point found");
    }
    Ok(rep)
}

fn check_convexity(a: &ConvexityArgs) -> Result<Report, CliError> {
    let inst = load_instance(&a.instance)?;
    let n = inst.dim();
    let hs = homogenize(&inst, a.gamma)?;
    let gens = omega_mu_generators(&hs, !inst.is_one_sided())?;
    let blocks = gens.iter().map(|g| g.leading_block(n)).collect::<Result<Vec<_>, _>>()?;
    let family = check_scaled_family(&blocks, DEFAULT_PSD_TOL);
    let grid = PdSearchGrid { random_directions: a.directions, sign_patterns: true };
    let pd = find_pd_combination(&gens, grid, a.seed)?;
    let pd_min_eig = pd.as_ref().map(|c| verify_pd_combination(&gens, c)).transpose()?.map(|(_, e)| e);
    let lifted_dim = n + 1;
    let witness = if lifted_dim <= DEFAULT_DIM_LIMIT {
        Some(falsify_image_convexity(&gens, DEFAULT_DIM_LIMIT, a.resolution, a.trials, a.seed)?)
    } else {
        None
    };
    let falsifier = match &witness {
        None => json!({ "status": "skipped", "reason": format!("lifted dimension {lifted_dim} exceeds {DEFAULT_DIM_LIMIT}") }),
        Some(None) => json!({ "status": "no_witness", "resolution": a.resolution, "trials": a.trials }),
        Some(Some(w)) => json!({
            "status": "witness",
            "point_a": w.point_a,
            "point_b": w.point_b,
            "preimage_a": w.preimage_a,
            "preimage_b": w.preimage_b,
            "midpoint": w.midpoint,
            "best_residual": w.best_residual,
            "resolution": w.preimage_search_resolution,
            "trial": w.trial,
        }),
    };
    let status = match (&witness, family.passes) {
        (Some(Some(_)), _) => Status::Fail,
        (_, true) => Status::Pass,
        _ => Status::Inconclusive,
    };
    let body = json!({
        "params": { "gamma": a.gamma, "seed": a.seed, "directions": a.directions, "trials": a.trials, "resolution": a.resolution },
        "generators": gens.len(),
        "scaled_family": {
            "passes": family.passes,
            "a0_index": family.a0_index,
            "rho": family.rho,
            "m": family.m,
            "n": family.n,
            "reason": family.reason,
        },
        "pd_combination": { "found": pd.is_some(), "coeffs": pd, "min_eigenvalue": pd_min_eig },
        "falsifier": falsifier,
    });
    let fals_label = match &witness {
        None => "skipped (dimension)".to_string(),
        Some(None) => "no witness".to_string(),
        Some(Some(w)) => format!("witness, midpoint {}", fmt_vec(&w.midpoint)),
    };
    Ok(Report::new("check-convexity", status, body)
        .row("seed", a.seed)
        .row("scaled family", format!("{} ({})", family.passes, family.reason))
        .row("rho", fmt_vec(&family.rho))
        .row("pd combination", pd_min_eig.map_or("not found".into(), |e| format!("found, min eig {e:.6e}")))
        .row("falsifier", fals_label))
}

fn reproduce_example(a: &ExampleArgs) -> Result<Report, CliError> {
    let b = build_gap_example(a.n)?;
    let found = search_one_sided_certificate(&b.instance, &b.xbar, &budget(a.tol, 101, 101))?;
    let (h0_value, pencil_value) = gap_witness_values(a.n)?;
    let conv = verify_example_convexity_hypotheses(a.n)?;
    let e = b.expected_cert;
    let min_eig = conv.combination_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = conv.combination_eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut body = json!({
        "n": a.n,
        "tol": a.tol,
        "gamma": b.gamma,
        "xbar": b.xbar,
        "objective_value": b.instance.objective_value(&b.xbar)?,
        "expected_certificate": { "lambda": e.lambda, "mu": e.mu, "delta": e.delta },
        "gap_witness": { "h0_value": h0_value, "pencil_value": pencil_value },
        "pd_combination": {
            "coeffs": conv.combination_coeffs,
            "positive_definite": conv.combination_pd,
            "min_eigenvalue": min_eig,
            "max_eigenvalue": max_eig,
        },
        "scaled_family": {
            "passes": conv.scaled_family.passes,
            "a0_index": conv.scaled_family.a0_index,
            "rho": conv.scaled_family.rho,
            "m": conv.scaled_family.m,
        },
    });
    let mut r = Report::new("reproduce-example", Status::Fail, Value::Null)
        .row("n", a.n)
        .row("gamma", format!("{:.7}", b.gamma))
        .row("xbar", fmt_vec(&b.xbar));
    let mut ok = conv.passes() && h0_value < 0.0 && pencil_value < 0.0;
    match found {
        Some((c, rep)) => {
            let dev = (c.lambda - e.lambda).abs().max((c.mu - e.mu).abs()).max((c.delta - e.delta).abs());
            ok &= rep.passed && dev <= 1e-6 && rep.max_residual() <= a.tol;
            let cert = AnyCertificate::OneSided(c);
            body["certificate"] = cert_json(&cert, &rep);
            body["certificate_deviation"] = json!(dev);
            r = cert_rows(r, &cert).row("deviation", format!("{dev:.3e}"));
            r = report_rows(r, &rep);
        }
        None => {
            ok = false;
            r = r.row("certificate", "none on the search grid");
        }
    }
    r.status = Status::of(ok);
    r.body = body;
    Ok(r
        .row("H0 at (-s,1)", format!("{h0_value:.7}"))
        .row("pencil at (-s,1)", format!("{pencil_value:.7}"))
        .row("combination eigs", format!("[{min_eig:.9}, {max_eig:.9}]"))
        .row("scaled family", conv.scaled_family.reason.clone()))
}

fn example_instance(a: &ExampleInstanceArgs) -> Result<Report, CliError> {
    let b = build_gap_example(a.n)?;
    let raw = if a.point {
        serde_json::to_string(&b.xbar).expect("vectors serialize")
    } else {
        emit_instance(&b.instance)
    };
    let mut r = Report::new("example-instance", Status::Pass, json!({ "n": a.n }));
    r.raw = Some(raw + "\n");
    Ok(r)
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::CheckFeasible(a) => check_feasible(a),
        Command::Certify(a) => certify(a, false),
        Command::CertifyOneSided(a) => certify(a, true),
        Command::VerifyCert(a) => verify_cert(a),
        Command::Alternative(a) => alternative(a),
        Command::Slater(a) => slater(a),
        Command::BruteForce(a) => brute_force(a),
        Command::CheckConvexity(a) => check_convexity(a),
        Command::ReproduceExample(a) => reproduce_example(a),
        Command::ExampleInstance(a) => example_instance(a),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// `(exit code, stdout, stderr)`.
pub fn run_command<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let code = report.status.exit_code();
            if let Some(raw) = &report.raw {
                return (code, raw.clone(), String::new());
            }
            if cli.json {
                (code, report.to_json(), report.to_table())
            } else {
                (code, report.to_table(), String::new())
            }
        }
        Err(e) => (2, String::new(), format!("error: {e}\n")),
    }
}
