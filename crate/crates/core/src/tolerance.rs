use std::sync::RwLock;

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the geometry and certificate code.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Accuracy of distance and projection computations.
    pub dist: f64,
    /// Accuracy of Minkowski functional evaluation (relative).
    pub mink: f64,
    /// Slack allowed in certificate inequalities.
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dist: 1e-8,
            mink: 1e-10,
            cert: 1e-7,
        }
    }
}

static GLOBAL: RwLock<Tolerances> = RwLock::new(Tolerances {
    dist: 1e-8,
    mink: 1e-10,
    cert: 1e-7,
});

impl Tolerances {
    pub fn global() -> Tolerances {
        *GLOBAL.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn set_global(tol: Tolerances) {
        *GLOBAL.write().unwrap_or_else(|e| e.into_inner()) = tol;
    }
}
