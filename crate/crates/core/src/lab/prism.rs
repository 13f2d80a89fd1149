use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{interior_points, Verdict, DEFAULT_PRISM_TOLERANCE};
use crate::bubble::{solve, BubbleProblem, PhiSpec, PsiSpec, Residuals, SolveOptions, SolveStatus};
use crate::curvature::{curvature, DerivMode};
use crate::domain::{audit, face_mean_curvature, AuditOptions, AuditReport, CorneredDomain};
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::surface::{chord_length, discrete_gauss_bonnet, surface_area, vertex_areas, GraphSurface, SurfacePoint};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PrismOptions {
    /// Base mesh resolution of the separating surface.
    pub resolution: usize,
    pub solve: SolveOptions,
    /// Volume density; nonzero for the constant-mean-curvature (ε-bubble) variant.
    pub phi: PhiSpec,
    pub tolerance: f64,
    pub audit: AuditOptions,
    /// Interior samples for `inf scal` and `sup |scal|`.
    pub scal_samples: usize,
    pub mode: DerivMode,
    /// Start the solve here instead of the mid-height slice.
    #[serde(skip)]
    pub init: Option<GraphSurface>,
}

impl Default for PrismOptions {
    fn default() -> Self {
        PrismOptions {
            resolution: 64,
            solve: SolveOptions::default(),
            phi: PhiSpec::zero(),
            tolerance: DEFAULT_PRISM_TOLERANCE,
            audit: AuditOptions { face_samples: 32, edge_samples: 16, tolerance: 1e-6, mode: DerivMode::Auto },
            scal_samples: 64,
            mode: DerivMode::Auto,
            init: None,
        }
    }
}

/// The prism theorem's hypotheses as measured on `P`.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisAudit {
    /// Top and bottom meet the sides at angles `≤ π/2`.
    pub normal: bool,
    pub sup_horizontal_angle: f64,
    pub mean_convex_sides: bool,
    pub inf_side_mean_curvature: f64,
    /// `inf scal ≥ 2κ` over the samples.
    pub scal_bound: bool,
    pub inf_scal: f64,
    /// Informational: with mean-concave top or bottom, `Y_min` may lie on them and the
    /// free-boundary second variation no longer applies.
    pub inf_horizontal_mean_curvature: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityGap {
    /// `sup |A|` on `Y_min` (operator norm, largest |principal curvature|).
    pub sup_second_fundamental_form: f64,
    pub sup_abs_scal: f64,
    /// `sup |H|` per face of `P`.
    pub face_sup_mean_curvature: Vec<f64>,
    pub total: f64,
}

/// Terms of `∫K + ∫k_g − ½∫(scal + |A|²) − ∫ mn.curv(∂P)` on `Y_min`.
#[derive(Clone, Debug, Serialize)]
pub struct SecondVariation {
    pub integral_gauss: f64,
    pub integral_geodesic: f64,
    pub half_scal_plus_a: f64,
    pub boundary_mean_curvature: f64,
    pub bound: f64,
    /// Vertices whose local fit failed and were left out of `½∫(scal + |A|²)`.
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    pub grad_norm: f64,
    pub energy: f64,
    pub residuals: Residuals,
    pub touches_horizontal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrismReport {
    /// `α_i`: supremum of the dihedral angle along the vertical edge between sides `i` and `i+1`.
    pub alphas: Vec<f64>,
    /// `Σ (π − α_i)`.
    pub angle_deficit: f64,
    pub kappa: f64,
    pub area: f64,
    pub euler_characteristic: i64,
    pub kappa_area: f64,
    pub two_pi_chi: f64,
    /// `2πχ − Σ(π − α_i) − κ·area`.
    pub slack: f64,
    pub verdict: Verdict,
    /// False when the hypotheses fail: the verdict then carries no claim.
    pub asserted: bool,
    pub tolerance: f64,
    pub hypotheses: HypothesisAudit,
    pub second_variation: SecondVariation,
    pub rigidity: RigidityGap,
    pub solver: SolverSummary,
    pub audit: AuditReport,
    pub surface: GraphSurface,
}

impl PrismReport {
    /// Same measurements under another `κ`; the slack moves by exactly `−Δκ·area`.
    pub fn with_kappa(&self, kappa: f64) -> PrismReport {
        let mut r = self.clone();
        r.kappa = kappa;
        r.kappa_area = kappa * r.area;
        r.slack = r.two_pi_chi - r.angle_deficit - r.kappa_area;
        r.hypotheses.scal_bound = r.hypotheses.inf_scal >= 2.0 * kappa - r.hypotheses.tolerance;
        r.hypotheses.holds = r.hypotheses.normal && r.hypotheses.mean_convex_sides && r.hypotheses.scal_bound;
        r.asserted = r.hypotheses.holds;
        r.verdict = Verdict::of_slack(r.slack, r.tolerance);
        r
    }

    pub fn row(&self, family: &str, parameters: &str) -> PrismRow {
        PrismRow {
            family: family.to_string(),
            parameters: parameters.to_string(),
            angle_deficit: self.angle_deficit,
            kappa_area: self.kappa_area,
            two_pi_chi: self.two_pi_chi,
            slack: self.slack,
            verdict: self.verdict,
            rigidity_gap: self.rigidity.total,
        }
    }
}

/// One CSV row per experiment.
#[derive(Clone, Debug, Serialize)]
pub struct PrismRow {
    pub family: String,
    pub parameters: String,
    pub angle_deficit: f64,
    pub kappa_area: f64,
    pub two_pi_chi: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub rigidity_gap: f64,
}

fn side_side_alphas(report: &AuditReport, k: usize) -> Result<Vec<f64>> {
    (0..k)
        .map(|i| {
            let j = (i + 1) % k;
            let key = (i.min(j), i.max(j));
            report
                .edges
                .iter()
                .find(|e| e.faces == key)
                .map(|e| e.sup_angle)
                .ok_or_else(|| Error::Degenerate(format!("no audited edge between sides {i} and {j}")))
        })
        .collect()
}

/// Solves for the top–bottom separating minimizer of `P` and assembles the prism inequality.
pub fn run_prism_inequality(g: &MetricField, p: &CorneredDomain, kappa: f64, opts: &PrismOptions) -> Result<PrismReport> {
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
    }
    let k = p.realization.side_count();
    let problem = BubbleProblem::new(g.clone(), p.clone(), opts.phi.clone(), PsiSpec::zero(), opts.resolution)?;
    let init = match &opts.init {
        Some(s) => s.clone(),
        None => problem.slice(None)?,
    };
    let sol = solve(&problem, &init, &opts.solve)?;
    let y = sol.surface.clone();

    let au = audit(g, p, &opts.audit)?;
    let alphas = side_side_alphas(&au, k)?;
    let angle_deficit: f64 = alphas.iter().map(|a| PI - a).sum();
    let area = surface_area(g, &y);
    let chi = y.base.euler_characteristic();
    let two_pi_chi = 2.0 * PI * chi as f64;
    let kappa_area = kappa * area;
    let slack = two_pi_chi - angle_deficit - kappa_area;

    let scal: Vec<f64> = interior_points(p, opts.scal_samples)?
        .par_iter()
        .map(|x| curvature(g, x, opts.mode).map(|c| c.scalar))
        .collect::<Result<Vec<f64>>>()?;
    let inf_scal = scal.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup_abs_scal = scal.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let htol = opts.audit.tolerance;
    let sup_h = au.sup_horizontal_angle(p);
    let inf_h = au.inf_side_mean_curvature(p);
    let normal = sup_h <= PI / 2.0 + htol;
    let mean_convex_sides = inf_h >= -htol;
    let scal_bound = inf_scal >= 2.0 * kappa - htol;
    let hypotheses = HypothesisAudit {
        normal,
        sup_horizontal_angle: sup_h,
        mean_convex_sides,
        inf_side_mean_curvature: inf_h,
        scal_bound,
        inf_scal,
        inf_horizontal_mean_curvature: au.inf_horizontal_mean_curvature(p),
        tolerance: htol,
        holds: normal && mean_convex_sides && scal_bound,
    };

    let sv = second_variation_bound(g, p, &y, opts.mode)?;
    let sup_a = (0..y.heights.len())
        .into_par_iter()
        .filter_map(|v| y.geometry(g, SurfacePoint::Vertex(v), opts.mode).ok())
        .map(|geo| geo.principal[0].abs().max(geo.principal[1].abs()))
        .reduce(|| 0.0, f64::max);
    let face_sup: Vec<f64> =
        au.faces.iter().map(|f| f.inf_mean_curvature.abs().max(f.sup_mean_curvature.abs())).collect();
    let total = sup_a + sup_abs_scal + face_sup.iter().sum::<f64>();

    Ok(PrismReport {
        alphas,
        angle_deficit,
        kappa,
        area,
        euler_characteristic: chi,
        kappa_area,
        two_pi_chi,
        slack,
        verdict: Verdict::of_slack(slack, opts.tolerance),
        asserted: hypotheses.holds,
        tolerance: opts.tolerance,
        hypotheses,
        second_variation: sv,
        rigidity: RigidityGap { sup_second_fundamental_form: sup_a, sup_abs_scal, face_sup_mean_curvature: face_sup, total },
        solver: SolverSummary {
            status: sol.status,
            iterations: sol.iterations,
            grad_norm: sol.grad_norm,
            energy: sol.energy,
            residuals: sol.residuals.clone(),
            touches_horizontal: sol.touches_horizontal(),
        },
        audit: au,
        surface: y,
    })
}

/// Rearranged second variation of area on a separating surface `y` of `P`.
pub fn second_variation_bound(g: &MetricField, p: &CorneredDomain, y: &GraphSurface, mode: DerivMode) -> Result<SecondVariation> {
    let gb = discrete_gauss_bonnet(g, y, None)?;
    let areas = vertex_areas(g, y);
    let terms: Vec<Option<f64>> = (0..y.heights.len())
        .into_par_iter()
        .map(|v| {
            let geo = y.geometry(g, SurfacePoint::Vertex(v), mode).ok()?;
            let s = curvature(g, &geo.point, mode).ok()?.scalar;
            Some(areas[v] * (s + geo.norm_sq()))
        })
        .collect();
    let skipped = terms.iter().filter(|t| t.is_none()).count();
    let half_scal_plus_a = 0.5 * terms.iter().flatten().sum::<f64>();
    let base = &y.base;
    let mut boundary_mean_curvature = 0.0;
    for e in &base.boundary {
        let (a, b) = (y.vertex_point(e.a), y.vertex_point(e.b));
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
        let h = face_mean_curvature(g, p, e.side, &mid)?;
        boundary_mean_curvature += h * chord_length(g, &a, &b);
    }
    let bound = gb.integral_gauss + gb.integral_geodesic - half_scal_plus_a - boundary_mean_curvature;
    Ok(SecondVariation {
        integral_gauss: gb.integral_gauss,
        integral_geodesic: gb.integral_geodesic,
        half_scal_plus_a,
        boundary_mean_curvature,
        bound,
        skipped,
    })
}
