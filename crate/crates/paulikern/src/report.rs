//! Machine-readable result envelopes and the sweep TSV format.
//!
//! Every CLI command emits one [`ReportEnvelope`]: the command name, an
//! echo of all effective parameters (including seeds), a command-specific
//! payload and a flat list of named residuals. Envelopes contain no
//! timestamps or other hidden entropy, so identical invocations produce
//! byte-identical output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::opp::OppSweepResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub parameters: Value,
    pub results: Value,
    pub status: Status,
    pub residuals: Vec<NamedResidual>,
}

impl ReportEnvelope {
    pub fn new(command: &str, parameters: Value) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            results: Value::Null,
            status: Status::Ok,
            residuals: Vec::new(),
        }
    }

    pub fn push_residual(&mut self, name: &str, value: f64) {
        self.residuals.push(NamedResidual {
            name: name.to_string(),
            value,
        });
    }

    /// Records a check result, downgrading the status on failure.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        self.push_residual(name, value);
        let pass = value <= tolerance;
        if !pass {
            self.status = Status::Error;
        }
        pass
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("envelope serializes");
        text.push('\n');
        text
    }
}

/// Plot-ready TSV for a penalty sweep: one row per strength with the
/// tracked energies and their gaps to the projected reference. Header
/// row, LF line endings.
pub fn sweep_tsv(sweep: &OppSweepResult) -> String {
    let levels = sweep.projected_energies.len();
    let mut out = String::from("lambda");
    for k in 0..levels {
        out.push_str(&format!("\tE_{k}"));
    }
    for k in 0..levels {
        out.push_str(&format!("\tgap_{k}"));
    }
    out.push('\n');
    for (lambda, energies) in sweep.lambda_grid.iter().zip(&sweep.energies) {
        out.push_str(&format!("{lambda}"));
        for e in energies {
            out.push_str(&format!("\t{e}"));
        }
        for (e, p) in energies.iter().zip(&sweep.projected_energies) {
            out.push_str(&format!("\t{}", e - p));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn envelope_roundtrip_is_bit_exact() {
        let mut env = ReportEnvelope::new("spectrum", json!({"dim": 3, "overlap": 0.4, "seed": 0}));
        env.results = json!({"eigenvalues": [0.6000000000000001, 0.6, 1.7999999999999998]});
        env.push_residual("symmetry", 1.2345678901234567e-13);
        let text = env.to_json_string();
        let back: ReportEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(env, back);
        assert_eq!(text, back.to_json_string());
    }

    #[test]
    fn check_downgrades_status() {
        let mut env = ReportEnvelope::new("verify", Value::Null);
        assert!(env.check("small", 1e-12, 1e-10));
        assert_eq!(env.status, Status::Ok);
        assert!(!env.check("large", 1e-3, 1e-10));
        assert_eq!(env.status, Status::Error);
    }

    #[test]
    fn tsv_shape() {
        let sweep = OppSweepResult {
            lambda_grid: vec![10.0, 100.0],
            energies: vec![vec![1.5, 2.5], vec![1.25, 2.25]],
            projected_energies: vec![1.0, 2.0],
            slopes: vec![None, None],
            degenerate_tail: vec![false, false],
            kernel_dim: 2,
            threshold: 1e-10,
        };
        let tsv = sweep_tsv(&sweep);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "lambda\tE_0\tE_1\tgap_0\tgap_1");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("10\t1.5\t2.5\t0.5\t0.5"));
        assert!(tsv.ends_with('\n'));
        assert!(!tsv.contains('\r'));
    }
}
