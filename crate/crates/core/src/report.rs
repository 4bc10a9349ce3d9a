use serde::{Deserialize, Serialize};

use crate::functionals::FunctionalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIter,
    Diverged,
    CollapsedToZero,
}

/// One row of solver history. Fixed-point iterations fill `m_s`/`n_s`;
/// Newton iterations fill `step_norm`/`halvings`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Successive relative change in max-norm.
    pub rel_change: f64,
    pub residual_inf: f64,
    pub m_s: Option<f64>,
    pub n_s: Option<f64>,
    pub step_norm: Option<f64>,
    pub halvings: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub history: Vec<IterationRecord>,
    /// Functionals at the returned state; absent when the nonlinearity has no
    /// potential.
    pub final_report: Option<FunctionalReport>,
    /// Set when a stabilizing factor was negative after the initial transient.
    pub sign_degenerate: bool,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.history.last()
    }

    /// History as CSV text with header
    /// `iteration,rel_change,residual_inf,m_s,n_s,step_norm,halvings`.
    pub fn history_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let mut out = String::from("iteration,rel_change,residual_inf,m_s,n_s,step_norm,halvings\n");
        for r in &self.history {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{},{},{}\n",
                r.iteration,
                r.rel_change,
                r.residual_inf,
                opt(r.m_s),
                opt(r.n_s),
                opt(r.step_norm),
                r.halvings.map(|h| h.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}
