use serde::Serialize;

use crate::real::Real;

/// Outcome of one inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub lhs: Real,
    pub rhs: Real,
    pub pass: bool,
}

impl CheckReport {
    /// `lhs ≤ rhs·(1+tol)`, exact when both sides are rational.
    pub fn le(lhs: Real, rhs: Real, tol: f64) -> Self {
        let pass = lhs.le_tol(&rhs, tol);
        CheckReport { lhs, rhs, pass }
    }

    /// Ratio `lhs/rhs` in floating point (0 when both vanish).
    pub fn ratio(&self) -> f64 {
        let (a, b) = (self.lhs.to_f64(), self.rhs.to_f64());
        if a == 0.0 {
            0.0
        } else {
            a / b
        }
    }
}
