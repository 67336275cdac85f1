use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Named residual summarised over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualReport {
    pub name: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub sample_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResidualReport {
    /// Build from per-sample absolute residuals. An empty set fails.
    pub fn from_residuals(name: impl Into<String>, residuals: &[f64], tolerance: f64) -> Self {
        let n = residuals.len();
        let max_abs = residuals.iter().fold(0.0_f64, |m, r| {
            if r.is_nan() {
                f64::INFINITY
            } else {
                m.max(r.abs())
            }
        });
        let mean_abs = if n == 0 {
            0.0
        } else {
            residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64
        };
        let verdict = if n > 0 && max_abs <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            max_abs,
            mean_abs,
            tolerance,
            verdict,
            sample_points: n,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}
