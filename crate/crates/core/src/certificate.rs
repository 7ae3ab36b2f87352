use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Convexity,
    Lipschitz,
    Control,
    NdcWitness,
    NonExtendability,
    Nesting,
    Membership,
    Agreement,
    Domination,
    Coverage,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::Convexity => "convexity",
            CertificateKind::Lipschitz => "lipschitz",
            CertificateKind::Control => "control",
            CertificateKind::NdcWitness => "ndc_witness",
            CertificateKind::NonExtendability => "non_extendability",
            CertificateKind::Nesting => "nesting",
            CertificateKind::Membership => "membership",
            CertificateKind::Agreement => "agreement",
            CertificateKind::Domination => "domination",
            CertificateKind::Coverage => "coverage",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// The worst observed violation of a sampled inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Amount by which the inequality failed (negative when it held with slack).
    pub amount: f64,
    pub points: Vec<Vec<f64>>,
    pub note: String,
}

/// Outcome of a numerical check, reproducible from its inputs and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub worst: Option<Violation>,
    /// Named scalar measurements recorded along the way.
    pub metrics: Vec<(String, f64)>,
    pub label: String,
}

impl Certificate {
    pub fn new(kind: CertificateKind, label: impl Into<String>, tolerance: f64, seed: u64) -> Self {
        Certificate {
            kind,
            verdict: Verdict::Pass,
            samples: 0,
            tolerance,
            seed,
            worst: None,
            metrics: Vec::new(),
            label: label.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Records one sampled inequality `lhs <= rhs + tolerance`.
    pub fn observe(&mut self, lhs: f64, rhs: f64, points: impl FnOnce() -> Vec<Vec<f64>>, note: &str) {
        self.samples += 1;
        let amount = lhs - rhs;
        let worse = match &self.worst {
            None => true,
            Some(w) => amount > w.amount || amount.is_nan(),
        };
        if worse {
            self.worst = Some(Violation {
                amount,
                points: points(),
                note: note.to_string(),
            });
        }
        if !(amount <= self.tolerance) {
            self.verdict = Verdict::Fail;
        }
    }

    /// Records a boolean check.
    pub fn require(&mut self, ok: bool, points: impl FnOnce() -> Vec<Vec<f64>>, note: &str) {
        self.samples += 1;
        if !ok {
            self.verdict = Verdict::Fail;
            if self.worst.as_ref().map_or(true, |w| w.amount <= 0.0) {
                self.worst = Some(Violation {
                    amount: f64::INFINITY,
                    points: points(),
                    note: note.to_string(),
                });
            }
        }
    }

    pub fn fail(&mut self, note: &str) {
        self.verdict = Verdict::Fail;
        self.worst = Some(Violation {
            amount: f64::INFINITY,
            points: Vec::new(),
            note: note.to_string(),
        });
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    pub fn get_metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Folds another certificate in: sample counts add, verdicts AND.
    pub fn absorb(&mut self, other: &Certificate) {
        self.samples += other.samples;
        if !other.passed() {
            self.verdict = Verdict::Fail;
        }
        if let Some(w) = &other.worst {
            let worse = self.worst.as_ref().map_or(true, |s| w.amount > s.amount);
            if worse {
                let mut w = w.clone();
                if !other.label.is_empty() {
                    w.note = format!("{}: {}", other.label, w.note);
                }
                self.worst = Some(w);
            }
        }
    }

    pub fn worst_amount(&self) -> Option<f64> {
        self.worst.as_ref().map(|w| w.amount)
    }

    /// One-line summary suitable for a line-oriented report.
    pub fn report_line(&self) -> String {
        let mut s = format!(
            "{} [{}] {} samples={} tol={:e} seed={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.kind.as_str(),
            self.label,
            self.samples,
            self.tolerance,
            self.seed
        );
        if let Some(w) = &self.worst {
            let _ = write!(s, " worst={:e}", w.amount);
        }
        for (k, v) in &self.metrics {
            let _ = write!(s, " {k}={v:e}");
        }
        s
    }

    pub const CSV_HEADER: &'static str = "kind,label,verdict,samples,tolerance,seed,worst";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:e},{},{}",
            self.kind.as_str(),
            self.label.replace(',', ";"),
            if self.passed() { "pass" } else { "fail" },
            self.samples,
            self.tolerance,
            self.seed,
            self.worst_amount().map_or(String::new(), |w| format!("{w:e}"))
        )
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.report_line())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_tracks_worst_and_verdict() {
        let mut c = Certificate::new(CertificateKind::Convexity, "t", 1e-9, 7);
        c.observe(1.0, 2.0, Vec::new, "ok");
        assert!(c.passed());
        c.observe(2.0, 1.0, || vec![vec![0.0]], "bad");
        assert!(!c.passed());
        assert_eq!(c.worst_amount(), Some(1.0));
        assert_eq!(c.samples, 2);
    }

    #[test]
    fn nan_fails() {
        let mut c = Certificate::new(CertificateKind::Convexity, "t", 1e-9, 7);
        c.observe(f64::NAN, 0.0, Vec::new, "nan");
        assert!(!c.passed());
    }

    #[test]
    fn report_line_is_stable() {
        let mut c = Certificate::new(CertificateKind::Lipschitz, "demo", 0.5, 3);
        c.metric("L", 2.0);
        assert_eq!(c.report_line(), "PASS [lipschitz] demo samples=0 tol=5e-1 seed=3 L=2e0");
    }
}
