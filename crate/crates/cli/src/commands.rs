//! Subcommand resolution and execution.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cornerlab::bubble::{mu_area, solve, trap_margin, BubbleProblem};
use cornerlab::curvature::{curvature, tube_evolve, ShapeState};
use cornerlab::lab::{
    gluing_condition, run_prism_inequality, scale_asymptotics, semi_integral_check, GlueFace,
};
use cornerlab::metric::{double_across_face, interface_jumps, reflection_develop, FaceSide, MetricSpec};
use cornerlab::surface::{surface_area, subgraph_volume};
use cornerlab::{ChartBox, Coorientation, CorneredDomain, GraphSurface, MetricField, Verdict};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::error::{CliError, CliResult, Context};
use crate::format::{num, Table};

/// What a run produced before anything touches the disk.
#[derive(Debug, Default)]
pub struct Artifacts {
    /// Flat headline numbers, also used as sweep summary columns.
    pub summary: Map<String, Value>,
    pub result: Value,
    pub tables: Vec<(String, Table)>,
    /// Additional JSON files, e.g. solved surfaces.
    pub files: Vec<(String, Value)>,
    /// The command's verdict, when it has one.
    pub verdict: Option<String>,
    pub violated: bool,
}

/// A validated config with everything built.
pub struct Prepared {
    /// The config as run: seeded families drawn, options with defaults filled in.
    pub resolved: ExperimentConfig,
    task: Task,
}

enum Task {
    Curv { g: MetricField, o: CurvOptions },
    Tube { o: TubeOptions },
    Bubble { g: MetricField, d: CorneredDomain, o: BubbleOptions, init: Option<GraphSurface> },
    Prism { g: MetricField, d: CorneredDomain, o: PrismCommand, family: String, init: Option<GraphSurface> },
    Gluing { a: GlueFace, b: GlueFace, o: cornerlab::lab::GlueOptions },
    Asymptotics { g: MetricField, o: GlueCommand },
    Develop { g: MetricField, o: DevelopCommand },
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn build_metric(spec: &MetricSpec, at: &str, base: &Path) -> CliResult<MetricField> {
    let mut files = Vec::new();
    grid_paths(&to_value(spec), at, &mut files);
    for (p, f) in &files {
        check_file(f, base, p)?;
    }
    spec.build_in(base).ctx(at)
}

fn need<'a, T>(v: &'a Option<T>, at: &str, cmd: Command) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| CliError::validation(at, format!("`{}` needs a {at}", cmd.name())))
}

fn family_of(spec: &MetricSpec) -> String {
    to_value(spec).get("family").and_then(Value::as_str).unwrap_or("metric").to_string()
}

/// Validates `cfg` against its command's schema and builds the inputs.
pub fn prepare(cfg: &ExperimentConfig, base: &Path) -> CliResult<Prepared> {
    let mut resolved = cfg.clone();
    resolved.outputs = Outputs::default();
    if let Some(p) = &cfg.perturbation {
        resolved.metric = Some(p.resolve(cfg.seed)?);
    }
    let cmd = cfg.command;
    let metric = || -> CliResult<(MetricField, &MetricSpec)> {
        let spec = need(&resolved.metric, "metric", cmd)?;
        Ok((build_metric(spec, "metric", base)?, spec))
    };
    let domain = || need(&cfg.domain, "domain", cmd).and_then(|d| d.build().ctx("domain"));
    let (task, options) = match cmd {
        Command::Sweep => return Err(CliError::validation("command", "sweeps cannot be nested")),
        Command::Curv => {
            let o: CurvOptions = parse_options(&cfg.options)?;
            if !(0.0..0.5).contains(&o.inset) {
                return Err(CliError::validation("options.inset", "must lie in [0, 0.5)"));
            }
            let v = to_value(&o);
            (Task::Curv { g: metric()?.0, o }, v)
        }
        Command::Tube => {
            let o: TubeOptions = parse_options(&cfg.options)?;
            if !(o.length > 0.0 && o.step > 0.0) || o.stride == 0 {
                return Err(CliError::validation("options", "length, step and stride must be positive"));
            }
            let v = to_value(&o);
            (Task::Tube { o }, v)
        }
        Command::Bubble => {
            let o: BubbleOptions = parse_options(&cfg.options)?;
            let init = match &o.init {
                InitSpec::File { path } => {
                    let f = check_file(path, base, "options.init.path")?;
                    Some(GraphSurface::load(&f).ctx("options.init.path")?)
                }
                _ => None,
            };
            let v = to_value(&o);
            (Task::Bubble { g: metric()?.0, d: domain()?, o, init }, v)
        }
        Command::Prism => {
            let mut o: PrismCommand = parse_options(&cfg.options)?;
            let init = match &o.init {
                Some(path) => {
                    let f = check_file(path, base, "options.init")?;
                    Some(GraphSurface::load(&f).ctx("options.init")?)
                }
                None => None,
            };
            o.run.tolerance *= cfg.tolerance_scale;
            let v = {
                let mut unscaled = o.clone();
                unscaled.run.tolerance /= cfg.tolerance_scale;
                to_value(&unscaled)
            };
            let (g, spec) = metric()?;
            let family = o.label.clone().unwrap_or_else(|| family_of(spec));
            (Task::Prism { g, d: domain()?, o, family, init }, v)
        }
        Command::Glue => {
            let o: GlueCommand = parse_options(&cfg.options)?;
            let v = to_value(&o);
            match o {
                GlueCommand::Gluing { face, second, mut glue } => {
                    glue.tolerance *= cfg.tolerance_scale;
                    let a = GlueFace { metric: metric()?.0, domain: domain()?, face };
                    let b = GlueFace {
                        metric: build_metric(&second.metric, "options.second.metric", base)?,
                        domain: second.domain.build().ctx("options.second.domain")?,
                        face: second.face,
                    };
                    (Task::Gluing { a, b, o: glue }, v)
                }
                asym => (Task::Asymptotics { g: metric()?.0, o: asym }, v),
            }
        }
        Command::Develop => {
            let o: DevelopCommand = parse_options(&cfg.options)?;
            let (DevelopCommand::Double { steps, .. } | DevelopCommand::Develop { steps, .. }) = &o;
            if steps.len() < 2 || steps.iter().any(|&h| !(h > 0.0)) || steps.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(CliError::validation("options.steps", "need two or more positive, strictly decreasing steps"));
            }
            let v = to_value(&o);
            (Task::Develop { g: metric()?.0, o }, v)
        }
    };
    resolved.options = options;
    Ok(Prepared { resolved, task })
}

impl Prepared {
    pub fn execute(&self) -> CliResult<Artifacts> {
        let scale = self.resolved.tolerance_scale;
        match &self.task {
            Task::Curv { g, o } => run_curv(g, o),
            Task::Tube { o } => run_tube(o),
            Task::Bubble { g, d, o, init } => run_bubble(g, d, o, init.as_ref()),
            Task::Prism { g, d, o, family, init } => run_prism(g, d, o, family, init.as_ref(), scale),
            Task::Gluing { a, b, o } => run_gluing(a, b, o),
            Task::Asymptotics { g, o } => run_asymptotics(g, o, scale),
            Task::Develop { g, o } => run_develop(g, o),
        }
    }
}

fn put(m: &mut Map<String, Value>, k: &str, v: impl Serialize) {
    m.insert(k.to_string(), to_value(&v));
}

// ---- curv ----

fn run_curv(g: &MetricField, o: &CurvOptions) -> CliResult<Artifacts> {
    let chart = g.chart();
    let n = chart.dim();
    let points = match &o.points {
        Some(p) => {
            if let Some(i) = p.iter().position(|x| x.len() != n) {
                return Err(CliError::validation(format!("options.points.{i}"), format!("expected {n} coordinates")));
            }
            p.clone()
        }
        None => {
            let lo: Vec<f64> = (0..n).map(|k| chart.lower[k] + o.inset * chart.width(k)).collect();
            let hi: Vec<f64> = (0..n).map(|k| chart.upper[k] - o.inset * chart.width(k)).collect();
            ChartBox::new(lo, hi).ctx("metric.chart")?.sample_grid(o.per_axis)
        }
    };
    let samples: Vec<_> = {
        use rayon::prelude::*;
        points.par_iter().map(|x| curvature(g, x, o.mode)).collect()
    };
    let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    header.push("scalar".into());
    for i in 0..n {
        for j in i..n {
            header.push(format!("ricci_{i}{j}"));
        }
    }
    let mut t = Table::new(header);
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let (mut argmin, mut argmax) = (Vec::new(), Vec::new());
    for (x, s) in points.iter().zip(samples) {
        let s = s.ctx(&format!("curvature at {x:?}"))?;
        let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
        row.push(num(s.scalar));
        for i in 0..n {
            for j in i..n {
                row.push(num(s.ricci[i][j]));
            }
        }
        t.push(row);
        sum += s.scalar;
        if s.scalar < lo {
            lo = s.scalar;
            argmin = x.clone();
        }
        if s.scalar > hi {
            hi = s.scalar;
            argmax = x.clone();
        }
    }
    let mut summary = Map::new();
    put(&mut summary, "samples", points.len());
    put(&mut summary, "min_scalar", lo);
    put(&mut summary, "max_scalar", hi);
    put(&mut summary, "mean_scalar", sum / points.len().max(1) as f64);
    let result = json!({"argmin": argmin, "argmax": argmax, "dimension": n});
    Ok(Artifacts { summary, result, tables: vec![("curvature.csv".into(), t)], ..Default::default() })
}

// ---- tube ----

fn matrix(rows: &[Vec<f64>], at: &str) -> CliResult<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(CliError::validation(at, "expected a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

/// `c` when `a = c·I`.
fn isotropic(a: &DMatrix<f64>) -> Option<f64> {
    let c = a[(0, 0)];
    (a == &(DMatrix::identity(a.nrows(), a.nrows()) * c)).then_some(c)
}

/// Solution of `s' = b − s²`, `s(0) = s0`.
pub fn riccati_scalar(s0: f64, b: f64, t: f64) -> f64 {
    if b == 0.0 {
        s0 / (1.0 + s0 * t)
    } else if b > 0.0 {
        let k = b.sqrt();
        let th = (k * t).tanh();
        k * (s0 + k * th) / (k + s0 * th)
    } else {
        let k = (-b).sqrt();
        let tn = (k * t).tan();
        k * (s0 - k * tn) / (k + s0 * tn)
    }
}

fn run_tube(o: &TubeOptions) -> CliResult<Artifacts> {
    let (g0, s0, b) = match &o.initial {
        TubeInitial::FlatSphere { radius, dim, outward } => {
            if !(*radius > 0.0) || *dim == 0 {
                return Err(CliError::validation("options.initial", "radius and dim must be positive"));
            }
            let i = DMatrix::identity(*dim, *dim);
            let sign = if *outward { 1.0 } else { -1.0 };
            (i.clone(), i.clone() * (sign / radius), DMatrix::zeros(*dim, *dim))
        }
        TubeInitial::SpaceFormEquator { curvature, dim } => {
            if *dim == 0 {
                return Err(CliError::validation("options.initial.dim", "must be positive"));
            }
            let i = DMatrix::identity(*dim, *dim);
            (i.clone(), DMatrix::zeros(*dim, *dim), i * -curvature)
        }
        TubeInitial::Explicit { gform, shapeop, bop } => {
            let g = matrix(gform, "options.initial.gform")?;
            let s = matrix(shapeop, "options.initial.shapeop")?;
            let b = match bop {
                Some(b) => matrix(b, "options.initial.bop")?,
                None => DMatrix::zeros(g.nrows(), g.nrows()),
            };
            if s.nrows() != g.nrows() || b.nrows() != g.nrows() {
                return Err(CliError::validation("options.initial", "gform, shapeop and bop must have equal size"));
            }
            (g, s, b)
        }
    };
    let m = g0.nrows();
    let oracle = match (isotropic(&g0), isotropic(&s0), isotropic(&b)) {
        (Some(g), Some(s), Some(b)) if g > 0.0 => Some((s, b)),
        _ => None,
    };
    let state = ShapeState { t: 0.0, gform: g0, shapeop: s0, bop: b.clone() };
    let bconst = b.clone();
    let tr = tube_evolve(&state, &move |_| bconst.clone(), o.length, o.step).ctx("options.initial")?;

    let mut header = vec!["t".to_string()];
    for (name, _) in [("g", 0), ("s", 1)] {
        for i in 0..m {
            for j in 0..m {
                header.push(format!("{name}_{i}{j}"));
            }
        }
    }
    for k in 0..m {
        header.push(format!("kappa_{k}"));
    }
    if oracle.is_some() {
        header.extend(["exact".to_string(), "error".to_string()]);
    }
    let mut t = Table::new(header);
    let mut max_err: f64 = 0.0;
    let mut max_asym: f64 = 0.0;
    for (idx, s) in tr.states.iter().enumerate() {
        max_asym = max_asym.max(s.self_adjoint_residual());
        let err = oracle.map(|(s0, b)| {
            let e = riccati_scalar(s0, b, s.t);
            let mut d: f64 = 0.0;
            for i in 0..m {
                for j in 0..m {
                    d = d.max((s.shapeop[(i, j)] - if i == j { e } else { 0.0 }).abs());
                }
            }
            (e, d)
        });
        if let Some((_, d)) = err {
            max_err = max_err.max(d);
        }
        if idx % o.stride != 0 && idx + 1 != tr.states.len() {
            continue;
        }
        let mut row = vec![num(s.t)];
        row.extend(s.gform.transpose().iter().map(|&v| num(v)));
        row.extend(s.shapeop.transpose().iter().map(|&v| num(v)));
        let kappas = s.principal().unwrap_or_else(|| vec![f64::NAN; m]);
        row.extend(kappas.iter().map(|&v| num(v)));
        if let Some((e, d)) = err {
            row.push(num(e));
            row.push(num(d));
        }
        t.push(row);
    }
    let last = tr.states.last().expect("at least the initial state");
    let mut summary = Map::new();
    put(&mut summary, "states", tr.states.len());
    put(&mut summary, "final_t", last.t);
    put(&mut summary, "max_self_adjoint_residual", max_asym);
    put(&mut summary, "blowup_t", tr.blowup.map(|b| b.t));
    put(&mut summary, "focal_estimate", tr.blowup.map(|b| b.focal_estimate));
    put(&mut summary, "max_oracle_error", oracle.map(|_| max_err));
    let result = json!({
        "blowup": tr.blowup,
        "final": {"t": last.t, "principal": last.principal()},
        "oracle": oracle.map(|(s0, b)| json!({"s0": s0, "b": b})),
    });
    Ok(Artifacts { summary, result, tables: vec![("trajectory.csv".into(), t)], ..Default::default() })
}

// ---- bubble ----

fn surface_table(y: &GraphSurface) -> Table {
    let mut t = Table::new(["vertex", "x", "y", "u", "boundary"]);
    for (v, p) in y.base.vertices.iter().enumerate() {
        t.push(vec![v.to_string(), num(p[0]), num(p[1]), num(y.heights[v]), y.base.is_boundary(v).to_string()]);
    }
    t
}

fn run_bubble(g: &MetricField, d: &CorneredDomain, o: &BubbleOptions, file: Option<&GraphSurface>) -> CliResult<Artifacts> {
    let mut p = BubbleProblem::new(g.clone(), d.clone(), o.phi.clone(), o.psi.clone(), o.resolution).ctx("options")?;
    if let Some(a) = o.anchor {
        p = p.with_anchor(a);
    }
    let init = match (&o.init, file) {
        (_, Some(y)) => y.clone(),
        (InitSpec::Slice { height }, _) => p.slice(*height).ctx("options.init")?,
        (InitSpec::Profile { profile }, _) => {
            GraphSurface::from_profile(p.base.clone(), profile.clone(), p.t_range(), Coorientation::BelowIn)
                .ctx("options.init.profile")?
        }
        (InitSpec::File { .. }, None) => unreachable!("file surfaces are loaded during preparation"),
    };
    let sol = solve(&p, &init, &o.solve).ctx("solve")?;
    let area = surface_area(g, &sol.surface);
    let volume = subgraph_volume(g, &sol.surface);
    let mu = mu_area(&p, &sol.surface).ctx("mu-area")?;
    let trap = if o.trap { Some(trap_margin(g, &sol.surface, &o.phi, o.mode).ctx("trap margin")?) } else { None };

    let mut summary = Map::new();
    put(&mut summary, "status", sol.status);
    put(&mut summary, "iterations", sol.iterations);
    put(&mut summary, "energy", sol.energy);
    put(&mut summary, "grad_norm", sol.grad_norm);
    put(&mut summary, "area", area);
    put(&mut summary, "volume_below", volume);
    put(&mut summary, "mu_area", mu);
    put(&mut summary, "interior_sup", sol.residuals.interior_sup);
    put(&mut summary, "boundary_sup", sol.residuals.boundary_sup);
    put(&mut summary, "boundary_angle_sup_deg", sol.residuals.boundary_angle_sup.to_degrees());
    put(&mut summary, "touches_horizontal", sol.touches_horizontal());
    put(&mut summary, "trap_margin", trap.as_ref().map(|t| t.margin));

    let mut hist = Table::new(["iteration", "energy"]);
    for (i, e) in sol.energy_history.iter().enumerate() {
        hist.push(vec![i.to_string(), num(*e)]);
    }
    let result = json!({
        "residuals": sol.residuals,
        "contact_bottom": sol.contact_bottom,
        "contact_top": sol.contact_top,
        "trap": trap,
    });
    Ok(Artifacts {
        summary,
        result,
        tables: vec![("surface.csv".into(), surface_table(&sol.surface)), ("energy.csv".into(), hist)],
        files: vec![("surface.json".into(), to_value(&sol.surface))],
        ..Default::default()
    })
}

// ---- prism ----

fn verdict_name(v: Verdict) -> String {
    to_value(&v).as_str().unwrap_or_default().to_string()
}

fn run_prism(
    g: &MetricField,
    d: &CorneredDomain,
    o: &PrismCommand,
    family: &str,
    init: Option<&GraphSurface>,
    scale: f64,
) -> CliResult<Artifacts> {
    let mut opts = o.run.clone();
    opts.init = init.cloned();
    let r = run_prism_inequality(g, d, o.kappa, &opts).ctx("prism")?;
    let semi = match &o.semi {
        Some(s) => {
            let pr = BubbleProblem::new(g.clone(), d.clone(), cornerlab::PhiSpec::zero(), cornerlab::PsiSpec::zero(), opts.resolution)
                .ctx("options.semi")?;
            let ys = s.heights.iter().map(|&h| pr.slice(Some(h))).collect::<cornerlab::Result<Vec<_>>>().ctx("options.semi.heights")?;
            Some(semi_integral_check(g, d, &ys, s.bound, opts.mode).ctx("options.semi")?)
        }
        None => None,
    };
    let params = serde_json::to_string(&json!({"kappa": o.kappa, "resolution": opts.resolution, "tolerance_scale": scale}))
        .expect("plain JSON");
    let row = r.row(family, &params);
    let mut t = Table::new(["family", "parameters", "angle_deficit", "kappa_area", "two_pi_chi", "slack", "verdict", "rigidity_gap"]);
    t.push(vec![
        row.family.clone(),
        row.parameters.clone(),
        num(row.angle_deficit),
        num(row.kappa_area),
        num(row.two_pi_chi),
        num(row.slack),
        verdict_name(row.verdict),
        num(row.rigidity_gap),
    ]);
    let mut alphas = Table::new(["edge", "alpha", "pi_minus_alpha"]);
    for (i, a) in r.alphas.iter().enumerate() {
        alphas.push(vec![i.to_string(), num(*a), num(PI - a)]);
    }

    let mut summary = Map::new();
    put(&mut summary, "slack", r.slack);
    put(&mut summary, "verdict", r.verdict);
    put(&mut summary, "asserted", r.asserted);
    put(&mut summary, "angle_deficit", r.angle_deficit);
    put(&mut summary, "area", r.area);
    put(&mut summary, "kappa", r.kappa);
    put(&mut summary, "rigidity_gap", r.rigidity.total);
    put(&mut summary, "second_variation_bound", r.second_variation.bound);
    put(&mut summary, "hypotheses_hold", r.hypotheses.holds);
    put(&mut summary, "inf_scal", r.hypotheses.inf_scal);
    put(&mut summary, "solver_status", r.solver.status);
    put(&mut summary, "semi_integral_min", semi.as_ref().map(|s| s.min));

    let mut result = to_value(&r);
    if let Value::Object(m) = &mut result {
        m.remove("surface");
        m.insert("semi_integral".into(), to_value(&semi));
    }
    let violated = r.asserted && r.verdict == Verdict::Violated || semi.as_ref().is_some_and(|s| !s.holds);
    Ok(Artifacts {
        summary,
        result,
        tables: vec![
            ("prism.csv".into(), t),
            ("alphas.csv".into(), alphas),
            ("surface.csv".into(), surface_table(&r.surface)),
        ],
        files: vec![("surface.json".into(), to_value(&r.surface))],
        verdict: Some(verdict_name(r.verdict)),
        violated,
    })
}

// ---- glue ----

fn run_gluing(a: &GlueFace, b: &GlueFace, o: &cornerlab::lab::GlueOptions) -> CliResult<Artifacts> {
    let r = gluing_condition(a, b, o).ctx("glue")?;
    let mut t = Table::new(["a", "b", "x1_0", "x1_1", "x1_2", "x2_0", "x2_1", "x2_2", "h1", "h2", "sum"]);
    for p in &r.points {
        let mut row = vec![num(p.ab[0]), num(p.ab[1])];
        row.extend(p.x1.iter().chain(p.x2.iter()).map(|&v| num(v)));
        row.extend([num(p.h1), num(p.h2), num(p.sum)]);
        t.push(row);
    }
    let mut summary = Map::new();
    put(&mut summary, "inf_sum", r.inf_sum);
    put(&mut summary, "metric_mismatch", r.metric_mismatch);
    put(&mut summary, "holds", r.holds);
    put(&mut summary, "strict", r.strict);
    put(&mut summary, "regularized_inf_scal", r.regularized_inf_scal);
    let verdict = if r.strict { "strict" } else if r.holds { "holds" } else { "violated" };
    Ok(Artifacts {
        summary,
        result: to_value(&r),
        tables: vec![("glue.csv".into(), t)],
        verdict: Some(verdict.into()),
        violated: !r.holds,
        ..Default::default()
    })
}

fn run_asymptotics(g0: &MetricField, o: &GlueCommand, scale: f64) -> CliResult<Artifacts> {
    let GlueCommand::Asymptotics { a0, aplus, eps, settings, exponent_tolerance } = o else {
        unreachable!("asymptotics task holds the asymptotics options")
    };
    let chart = g0.chart();
    let a0f = a0.build(chart).ctx("options.a0")?;
    let apf = aplus.build(chart).ctx("options.aplus")?;
    let r = scale_asymptotics(g0, &a0f, &apf, eps, settings).ctx("options")?;
    let mut t = Table::new(["eps", "min_scal", "eps_times_min_scal"]);
    for (e, s) in r.eps.iter().zip(&r.min_scal) {
        t.push(vec![num(*e), num(*s), num(e * s)]);
    }
    let tol = exponent_tolerance * scale;
    let law = (r.exponent - 1.0).abs() <= tol && r.sign == r.trace_sign;
    let (verdict, violated) = match (r.clean_law, law) {
        (true, true) => ("holds", false),
        (true, false) => ("violated", true),
        (false, _) => ("not-applicable", false),
    };
    let mut summary = Map::new();
    put(&mut summary, "exponent", r.exponent);
    put(&mut summary, "constant", r.constant);
    put(&mut summary, "sign", r.sign);
    put(&mut summary, "trace_sign", r.trace_sign);
    put(&mut summary, "clean_law", r.clean_law);
    Ok(Artifacts {
        summary,
        result: to_value(&r),
        tables: vec![("asymptotics.csv".into(), t)],
        verdict: Some(verdict.into()),
        violated,
        ..Default::default()
    })
}

// ---- develop ----

/// Least-squares slope of `ln jump` against `ln h`; `None` when some jump vanishes.
fn decay_order(steps: &[f64], jumps: &[f64]) -> Option<f64> {
    if jumps.iter().any(|&j| !(j > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = jumps.iter().map(|j| j.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn run_develop(g: &MetricField, o: &DevelopCommand) -> CliResult<Artifacts> {
    let chart = g.chart().clone();
    let (field, interfaces, steps, per_axis, diag) = match o {
        DevelopCommand::Double { axis, side, steps, per_axis } => {
            if *axis >= chart.dim() {
                return Err(CliError::validation("options.axis", format!("chart has {} axes", chart.dim())));
            }
            let (d, diag) = double_across_face(g, *axis, *side).ctx("develop")?;
            let at = match side {
                FaceSide::Lower => chart.lower[*axis],
                FaceSide::Upper => chart.upper[*axis],
            };
            (d, vec![(*axis, at)], steps, *per_axis, Some(diag))
        }
        DevelopCommand::Develop { steps, per_axis } => {
            let d = reflection_develop(g).ctx("develop")?;
            let faces = (0..chart.dim()).flat_map(|k| [(k, chart.lower[k]), (k, chart.upper[k])]).collect();
            (d, faces, steps, *per_axis, None)
        }
    };
    let mut t = Table::new(["axis", "face", "h", "coefficient_jump", "first_difference_jump"]);
    let mut per_face = Vec::new();
    let mut worst_order = f64::INFINITY;
    let mut max_coeff: f64 = 0.0;
    for &(axis, at) in &interfaces {
        let ds: Vec<_> = steps.iter().map(|&h| interface_jumps(&field, axis, at, h, per_axis)).collect();
        for d in &ds {
            t.push(vec![axis.to_string(), num(at), num(d.h), num(d.coefficient_jump), num(d.first_difference_jump)]);
            max_coeff = max_coeff.max(d.coefficient_jump);
        }
        let jumps: Vec<f64> = ds.iter().map(|d| d.first_difference_jump).collect();
        let order = decay_order(steps, &jumps);
        let class = match order {
            None if jumps.iter().all(|&j| j == 0.0) => "seamless",
            None => "mixed",
            Some(p) if p > 0.5 => "c1",
            Some(_) => "kink",
        };
        if let Some(p) = order {
            worst_order = worst_order.min(p);
        }
        per_face.push(json!({"axis": axis, "face": at, "jumps": jumps, "order": order, "class": class}));
    }
    let finest = per_face
        .iter()
        .filter_map(|f| f["jumps"].as_array().and_then(|a| a.last()).and_then(Value::as_f64))
        .fold(0.0, f64::max);
    let mut summary = Map::new();
    put(&mut summary, "interfaces", interfaces.len());
    put(&mut summary, "max_coefficient_jump", max_coeff);
    put(&mut summary, "finest_first_difference_jump", finest);
    put(&mut summary, "worst_order", worst_order.is_finite().then_some(worst_order));
    let result = json!({"interfaces": per_face, "doubling": diag});
    Ok(Artifacts { summary, result, tables: vec![("jumps.csv".into(), t)], ..Default::default() })
}

/// Directory name of sweep job `i`.
pub fn job_dir(out: &Path, i: usize) -> PathBuf {
    out.join("jobs").join(format!("job-{i:04}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_closed_forms() {
        assert!((riccati_scalar(-1.0, 0.0, 0.5) + 2.0).abs() < 1e-15);
        assert!((riccati_scalar(0.0, -1.0, 0.3) + 0.3f64.tan()).abs() < 1e-15);
        assert!((riccati_scalar(0.0, 1.0, 0.3) - 0.3f64.tanh()).abs() < 1e-15);
        // s' = b − s² by central difference
        for (s0, b) in [(0.4, 2.0), (-0.3, -0.5), (1.0, 0.0)] {
            let (t, h) = (0.2, 1e-5);
            let d = (riccati_scalar(s0, b, t + h) - riccati_scalar(s0, b, t - h)) / (2.0 * h);
            let s = riccati_scalar(s0, b, t);
            assert!((d - (b - s * s)).abs() < 1e-8);
        }
    }

    #[test]
    fn decay_order_fits_power_laws() {
        let steps = [4e-3, 2e-3, 1e-3];
        assert!((decay_order(&steps, &steps.map(|h| 3.0 * h)).unwrap() - 1.0).abs() < 1e-12);
        assert!(decay_order(&steps, &[0.2, 0.2, 0.2]).unwrap().abs() < 1e-12);
        assert!(decay_order(&steps, &[0.0, 0.0, 0.0]).is_none());
    }
}
