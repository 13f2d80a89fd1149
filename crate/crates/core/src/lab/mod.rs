//! Prism experiments: the Gauss–Bonnet prism inequality, second-variation and
//! semi-integral checks, gluing audits and the `ε⁻¹` scalar-curvature law.

mod asymptotics;
mod glue;
mod prism;
mod semi;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use asymptotics::{scale_asymptotics, AsymptoticsOptions, AsymptoticsReport};
pub use glue::{gluing_condition, GlueFace, GlueOptions, GluePoint, GluingReport, Regularization};
pub use prism::{
    run_prism_inequality, second_variation_bound, HypothesisAudit, PrismOptions, PrismReport, PrismRow,
    RigidityGap, SecondVariation, SolverSummary,
};
pub use semi::{semi_integral_check, SemiIntegralReport};

/// Default discrete tolerance for prism verdicts at 64×64.
pub const DEFAULT_PRISM_TOLERANCE: f64 = 2e-2 * 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    /// Within the discrete error budget on the wrong side of zero.
    Inconclusive,
}

impl Verdict {
    /// Three-valued check of `value ≥ 0` with error budget `tol`.
    pub fn of_slack(value: f64, tol: f64) -> Verdict {
        if value >= 0.0 {
            Verdict::Holds
        } else if value >= -tol {
            Verdict::Inconclusive
        } else {
            Verdict::Violated
        }
    }
}

/// Points of a prism-like domain from the 3-d Halton sequence (bases 2, 3, 5), rejected
/// against the base polygon and pushed into the chart.
pub(crate) fn interior_points(domain: &crate::domain::CorneredDomain, count: usize) -> crate::error::Result<Vec<[f64; 3]>> {
    use crate::domain::{point_in_polygon, radical_inverse};
    let r = &domain.realization;
    let poly = r.polygon();
    let [t0, t1] = r.t_range();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &poly {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count && i < 64 * count as u64 + 64 {
        let q = [
            lo[0] + (hi[0] - lo[0]) * radical_inverse(i, 2),
            lo[1] + (hi[1] - lo[1]) * radical_inverse(i, 3),
            t0 + (t1 - t0) * radical_inverse(i, 5),
        ];
        i += 1;
        if point_in_polygon(&poly, [q[0], q[1]]) {
            out.push(r.embed(q)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::of_slack(0.0, 0.1), Verdict::Holds);
        assert_eq!(Verdict::of_slack(-0.05, 0.1), Verdict::Inconclusive);
        assert_eq!(Verdict::of_slack(-0.2, 0.1), Verdict::Violated);
    }
}
