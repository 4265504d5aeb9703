use crate::error::{Error, Result};
use crate::measure::{SelfAdjointOperator, VectorFunction};

/// Slack in `|e^{-tH}f|(x) ≤ e^{-tH₀}|f|(x) + slack · (1 + e^{-tH₀}|f|(x))`.
pub const DOMINATION_SLACK: f64 = 1e-10;

/// A vector-valued `H` together with a scalar `H₀` on the same base space
/// whose semigroup is claimed to dominate `e^{-tH}`.
#[derive(Debug, Clone)]
pub struct DominatedPair {
    h: SelfAdjointOperator,
    h0: SelfAdjointOperator,
    domination_verified: bool,
}

impl DominatedPair {
    /// An unverified pair. Use [`DominatedPair::verify`] before relying on it.
    pub fn new(h: SelfAdjointOperator, h0: SelfAdjointOperator) -> Result<Self> {
        if h0.space().fiber() != 1 || h0.space().base() != h.space().base() {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            h,
            h0,
            domination_verified: false,
        })
    }

    pub fn h(&self) -> &SelfAdjointOperator {
        &self.h
    }

    pub fn h0(&self) -> &SelfAdjointOperator {
        &self.h0
    }

    pub fn domination_verified(&self) -> bool {
        self.domination_verified
    }

    /// Runs [`domination_check`] and marks the pair verified if it passes.
    pub fn verify(mut self, times: &[f64], samples: &[VectorFunction]) -> Result<(Self, DominationReport)> {
        let report = domination_check(&self, times, samples)?;
        self.domination_verified = report.holds;
        Ok((self, report))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationReport {
    /// Number of (t, f, x) comparisons.
    pub comparisons: usize,
    /// Largest `|e^{-tH}f|(x) - e^{-tH₀}|f|(x)` seen.
    pub max_excess: f64,
    /// Left and right side where `excess / (1 + rhs)` is largest.
    pub worst: (f64, f64),
    pub holds: bool,
}

pub fn domination_check(
    pair: &DominatedPair,
    times: &[f64],
    samples: &[VectorFunction],
) -> Result<DominationReport> {
    domination_check_with_slack(pair, times, samples, DOMINATION_SLACK)
}

/// [`domination_check`] with `|e^{-tH}f|(x) ≤ r + slack · (1 + r)`, `r = e^{-tH₀}|f|(x)`.
pub fn domination_check_with_slack(
    pair: &DominatedPair,
    times: &[f64],
    samples: &[VectorFunction],
    slack: f64,
) -> Result<DominationReport> {
    let mut report = DominationReport {
        comparisons: 0,
        max_excess: f64::NEG_INFINITY,
        worst: (0.0, 0.0),
        holds: true,
    };
    let mut worst_ratio = f64::NEG_INFINITY;
    for &t in times {
        let vector = pair.h.semigroup(t)?;
        let scalar = pair.h0.semigroup(t)?;
        for f in samples {
            if f.space() != pair.h.space() {
                return Err(Error::SpaceMismatch);
            }
            let lhs = vector.as_operator().apply(f)?.pointwise_norm();
            let rhs = scalar.as_operator().apply(&f.pointwise_norm())?;
            for (l, r) in lhs.values().iter().zip(rhs.values().iter()) {
                report.comparisons += 1;
                let excess = l - r;
                report.max_excess = report.max_excess.max(excess);
                let ratio = excess / (1.0 + r.abs());
                if ratio > worst_ratio || ratio.is_nan() {
                    worst_ratio = ratio;
                    report.worst = (*l, *r);
                }
                if !(excess <= slack * (1.0 + r.abs())) {
                    report.holds = false;
                }
            }
        }
    }
    Ok(report)
}
