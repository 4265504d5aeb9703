use serde::Serialize;

/// One numerically checked inequality `lhs ≤ rhs` with relative slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_tol: f64,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        Self { lhs, rhs, rel_tol }
    }

    /// `lhs ≤ rhs + rel_tol · |rhs|`. NaN on either side fails.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.rel_tol * self.rhs.abs()
    }

    /// `rhs - lhs`; negative means the raw inequality is violated.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn with_tolerance(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_is_relative_to_rhs() {
        assert!(Inequality::new(1.0 + 1e-12, 1.0, 1e-9).holds());
        assert!(!Inequality::new(1.0 + 1e-6, 1.0, 1e-9).holds());
        assert!(Inequality::new(0.0, 0.0, 1e-9).holds());
        assert!(!Inequality::new(1e-300, 0.0, 1e-9).holds());
        assert!(!Inequality::new(f64::NAN, 1.0, 1e-9).holds());
        assert_eq!(Inequality::new(1.0, 3.0, 0.0).margin(), 2.0);
    }
}
