//! JSON forms of instances and certificates.

use serde::{Deserialize, Serialize};

use robqp_core::certificates::VerificationReport;
use robqp_core::model::{Interval, LowerBound, QuadraticFunction, UncertainConstraint};
use robqp_core::{
    AlternativeCertificate, OneSidedCertificate, OptimalityCertificate, RobustInstance,
    SymmetricMatrix,
};

use crate::error::CliError;

/// Largest accepted `|M[i][j] − M[j][i]|` in an instance file.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `alpha` is a number or the string `"-inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaField {
    Finite(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub n: usize,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "B1")]
    pub b1_mat: Vec<Vec<f64>>,
    #[serde(rename = "B2")]
    pub b2_mat: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub mu: [f64; 2],
    pub delta: [f64; 2],
    pub alpha: AlphaField,
    pub beta: f64,
}

fn matrix(name: &str, rows: &[Vec<f64>], n: usize) -> Result<SymmetricMatrix, CliError> {
    if rows.len() != n {
        return Err(CliError::Invalid(format!("{name} has {} rows, expected n={n}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Invalid(format!(
                "{name} row {i} has {} entries, expected n={n}",
                row.len()
            )));
        }
    }
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let d = (rows[i][j] - rows[j][i]).abs();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    let (d, i, j) = worst;
    if d > SYMMETRY_TOL {
        return Err(CliError::Invalid(format!(
            "{name} is not symmetric: {name}[{i}][{j}] = {} but {name}[{j}][{i}] = {} (max asymmetry {d:e})",
            rows[i][j], rows[j][i]
        )));
    }
    Ok(SymmetricMatrix::from_rows(rows)?)
}

fn vector(name: &str, v: &[f64], n: usize) -> Result<Vec<f64>, CliError> {
    if v.len() != n {
        return Err(CliError::Invalid(format!("{name} has length {}, expected n={n}", v.len())));
    }
    Ok(v.to_vec())
}

impl InstanceDocument {
    pub fn to_instance(&self) -> Result<RobustInstance, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Invalid("n must be positive".into()));
        }
        let lower = match &self.alpha {
            AlphaField::Finite(v) => LowerBound::Finite(*v),
            AlphaField::Text(t) if t == "-inf" => LowerBound::NegInfinity,
            AlphaField::Text(t) => {
                return Err(CliError::Invalid(format!(
                    "alpha must be a number or \"-inf\", got {t:?}"
                )))
            }
        };
        let objective = QuadraticFunction::new(matrix("A", &self.a_mat, n)?, vector("a", &self.a, n)?, 0.0)?;
        let constraint = UncertainConstraint::new(
            matrix("B1", &self.b1_mat, n)?,
            matrix("B2", &self.b2_mat, n)?,
            vector("b1", &self.b1, n)?,
            vector("b2", &self.b2, n)?,
            Interval::new(self.mu[0], self.mu[1])?,
            Interval::new(self.delta[0], self.delta[1])?,
            lower,
            self.beta,
        )?;
        Ok(RobustInstance::new(objective, constraint)?)
    }

    pub fn from_instance(inst: &RobustInstance) -> Self {
        let con = &inst.constraint;
        InstanceDocument {
            n: inst.dim(),
            a_mat: inst.objective.quad.rows(),
            b1_mat: con.quad_base.rows(),
            b2_mat: con.quad_slope.rows(),
            a: inst.objective.linear.clone(),
            b1: con.lin_base.clone(),
            b2: con.lin_slope.clone(),
            mu: [con.mu.lo, con.mu.hi],
            delta: [con.delta.lo, con.delta.hi],
            alpha: match con.lower {
                LowerBound::NegInfinity => AlphaField::Text("-inf".into()),
                LowerBound::Finite(v) => AlphaField::Finite(v),
            },
            beta: con.upper,
        }
    }
}

pub fn parse_instance(text: &str) -> Result<RobustInstance, CliError> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("instance: {e}")))?;
    doc.to_instance()
}

pub fn emit_instance(inst: &RobustInstance) -> String {
    serde_json::to_string_pretty(&InstanceDocument::from_instance(inst))
        .expect("instance documents always serialize")
}

/// Parses a bare JSON array of numbers.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("vector: {e}")))
}

/// Non-finite values serialize as `null`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub passed: bool,
    pub tolerance: f64,
    pub stationarity_residual: Option<f64>,
    pub complementarity_upper: Option<f64>,
    pub complementarity_lower: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub upper_margin: Option<f64>,
    pub lower_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_infimum: Option<f64>,
}

impl From<&VerificationReport> for ReportDocument {
    fn from(r: &VerificationReport) -> Self {
        ReportDocument {
            passed: r.passed,
            tolerance: r.tolerance,
            stationarity_residual: finite(r.stationarity_residual),
            complementarity_upper: finite(r.complementarity_residuals.0),
            complementarity_lower: finite(r.complementarity_residuals.1),
            min_eigenvalue: finite(r.min_eigenvalue),
            upper_margin: finite(r.feasibility_margins.0),
            lower_margin: finite(r.feasibility_margins.1),
            objective_gap: r.objective_gap.and_then(finite),
            aggregate_infimum: r.aggregate_infimum.and_then(finite),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Optimality,
    OneSided,
    Alternative,
}

/// Flat certificate record; which fields must be present depends on `kind`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub kind: CertificateKind,
    #[serde(flatten)]
    pub fields: CertificateFields,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportDocument>,
}

/// A certificate of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCertificate {
    Optimality(OptimalityCertificate),
    OneSided(OneSidedCertificate),
    Alternative(AlternativeCertificate),
}

fn need(v: Option<f64>, kind: &str, field: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Invalid(format!("{kind} certificate is missing {field}")))
}

fn optimality_fields(f: &CertificateFields, kind: &str) -> Result<OptimalityCertificate, CliError> {
    Ok(OptimalityCertificate {
        lambda1: need(f.lambda1, kind, "lambda1")?,
        lambda2: need(f.lambda2, kind, "lambda2")?,
        mu_alpha: need(f.mu_alpha, kind, "mu_alpha")?,
        mu_beta: need(f.mu_beta, kind, "mu_beta")?,
        delta_alpha: need(f.delta_alpha, kind, "delta_alpha")?,
        delta_beta: need(f.delta_beta, kind, "delta_beta")?,
    })
}

fn optimality_into(c: &OptimalityCertificate, f: &mut CertificateFields) {
    f.lambda1 = Some(c.lambda1);
    f.lambda2 = Some(c.lambda2);
    f.mu_alpha = Some(c.mu_alpha);
    f.mu_beta = Some(c.mu_beta);
    f.delta_alpha = Some(c.delta_alpha);
    f.delta_beta = Some(c.delta_beta);
}

impl CertificateDocument {
    pub fn new(cert: &AnyCertificate, report: Option<&VerificationReport>) -> Self {
        let mut fields = CertificateFields::default();
        let kind = match cert {
            AnyCertificate::Optimality(c) => {
                optimality_into(c, &mut fields);
                CertificateKind::Optimality
            }
            AnyCertificate::OneSided(c) => {
                fields.lambda = Some(c.lambda);
                fields.mu = Some(c.mu);
                fields.delta = Some(c.delta);
                CertificateKind::OneSided
            }
            AnyCertificate::Alternative(AlternativeCertificate::WitnessPoint { x }) => {
                fields.witness = Some(x.clone());
                CertificateKind::Alternative
            }
            AnyCertificate::Alternative(AlternativeCertificate::Multipliers { lambda0, inner }) => {
                fields.lambda0 = Some(*lambda0);
                optimality_into(inner, &mut fields);
                CertificateKind::Alternative
            }
        };
        CertificateDocument { kind, fields, report: report.map(ReportDocument::from) }
    }

    pub fn to_certificate(&self) -> Result<AnyCertificate, CliError> {
        let f = &self.fields;
        let stray = |names: &[(&str, bool)]| -> Result<(), CliError> {
            match names.iter().find(|(_, present)| *present) {
                Some((name, _)) => Err(CliError::Invalid(format!(
                    "field {name} does not belong to a {:?} certificate",
                    self.kind
                ))),
                None => Ok(()),
            }
        };
        match self.kind {
            CertificateKind::OneSided => {
                stray(&[
                    ("lambda0", f.lambda0.is_some()),
                    ("lambda1", f.lambda1.is_some()),
                    ("lambda2", f.lambda2.is_some()),
                    ("witness", f.witness.is_some()),
                ])?;
                Ok(AnyCertificate::OneSided(OneSidedCertificate {
                    lambda: need(f.lambda, "one_sided", "lambda")?,
                    mu: need(f.mu, "one_sided", "mu")?,
                    delta: need(f.delta, "one_sided", "delta")?,
                }))
            }
            CertificateKind::Optimality => {
                stray(&[
                    ("lambda", f.lambda.is_some()),
                    ("lambda0", f.lambda0.is_some()),
                    ("witness", f.witness.is_some()),
                ])?;
                Ok(AnyCertificate::Optimality(optimality_fields(f, "optimality")?))
            }
            CertificateKind::Alternative => {
                stray(&[("lambda", f.lambda.is_some()), ("mu", f.mu.is_some())])?;
                match (&f.witness, f.lambda0) {
                    (Some(x), None) => Ok(AnyCertificate::Alternative(
                        AlternativeCertificate::WitnessPoint { x: x.clone() },
                    )),
                    (None, Some(l0)) => Ok(AnyCertificate::Alternative(
                        AlternativeCertificate::multipliers(l0, optimality_fields(f, "alternative")?)?,
                    )),
                    _ => Err(CliError::Invalid(
                        "alternative certificate needs exactly one of witness or lambda0".into(),
                    )),
                }
            }
        }
    }
}

pub fn parse_certificate(text: &str) -> Result<AnyCertificate, CliError> {
    let doc: CertificateDocument =
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("certificate: {e}")))?;
    doc.to_certificate()
}
