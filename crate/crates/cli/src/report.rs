//! Report envelope, float normalization and the two output formats.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use properaff::dynamics::{cluster_tol, LEAKAGE_TOL, PRECISION_TOL, REGULARITY_TOL};
use properaff::group::MARGULIS_TOL;
use properaff::linalg::rank_tol;

pub const SCHEMA_VERSION: &str = "properaff-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    BadInput,
    NotApplicable,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BadInput => 2,
            Status::NotApplicable => 3,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::BadInput => "bad-input",
            Status::NotApplicable => "not-applicable",
        }
    }
}

/// Every tolerance in force, as reported.
fn tolerances() -> Value {
    json!({
        "rank": rank_tol(),
        "cluster": cluster_tol(),
        "regularity": REGULARITY_TOL,
        "precision": PRECISION_TOL,
        "leakage": LEAKAGE_TOL,
        "margulis": MARGULIS_TOL,
    })
}

pub struct Report {
    pub command: &'static str,
    pub spec: Value,
    pub seed: u64,
    pub status: Status,
    pub message: Option<String>,
    pub results: Value,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "spec": self.spec,
            "seed": self.seed,
            "tolerances": tolerances(),
            "status": self.status.as_str(),
            "message": self.message,
            "results": self.results,
            "timing": { "elapsed_ms": self.elapsed_ms },
        });
        normalize_floats(v)
    }

    pub fn render(&self, text: bool) -> String {
        let v = self.to_json();
        if text {
            render_text(&v)
        } else {
            let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

/// Re-emits every non-integral number with 17 significant digits.
pub fn normalize_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => match n.as_f64() {
            Some(f) if f.is_finite() => Value::Number(Number::from_str(&format!("{f:.16e}")).expect("valid number")),
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        // Vectors of scalars stay on one line.
        Value::Array(a) if a.iter().all(is_scalar) => {
            out.push((prefix.into(), format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", "))));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.into(), scalar(other))),
    }
}

/// Two aligned columns: dotted key path and value.
pub fn render_text(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, x) in rows {
        let _ = writeln!(s, "{k:<width$}  {x}");
    }
    s
}
