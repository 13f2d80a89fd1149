//! Experiment configuration: parsing, validation and seeded resolution.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cornerlab::bubble::{PhiSpec, PsiSpec, SolveOptions};
use cornerlab::lab::{AsymptoticsOptions, GlueOptions, PrismOptions};
use cornerlab::metric::{FaceSide, FormSpec};
use cornerlab::{BaseMesh, ChartBox, CorneredDomain, DerivMode, HeightProfile, MetricSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Curv,
    Tube,
    Bubble,
    Prism,
    Glue,
    Develop,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curv => "curv",
            Command::Tube => "tube",
            Command::Bubble => "bubble",
            Command::Prism => "prism",
            Command::Glue => "glue",
            Command::Develop => "develop",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Output directory, relative to the config file. `--out` overrides it.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    /// Seeded perturbed-flat family; replaced by a concrete `metric` on resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// Command options, checked against the command's schema on resolution.
    #[serde(default)]
    pub options: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
    /// Turn a violated verdict into exit code 3.
    #[serde(default)]
    pub check: bool,
    #[serde(default = "one")]
    pub tolerance_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Subcommand run by every job.
    pub command: Command,
    pub axes: Vec<SweepAxis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the config, e.g. `options.kappa` or `domain.t_range.1`.
    pub parameter: String,
    pub values: Vec<Value>,
}

/// Uniform ranges `[lo, hi]` for the perturbed-flat parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    #[serde(default = "three")]
    pub n: usize,
    pub amplitude: [f64; 2],
    /// Length of the wavevector; its direction is drawn uniformly.
    pub wavenumber: [f64; 2],
    #[serde(default = "full_turn")]
    pub phase: [f64; 2],
    #[serde(default)]
    pub bowl: [f64; 2],
    #[serde(default)]
    pub bias: [f64; 2],
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub chart: Option<ChartBox>,
}

fn three() -> usize {
    3
}

fn full_turn() -> [f64; 2] {
    [0.0, 2.0 * PI]
}

fn draw(rng: &mut ChaCha8Rng, r: [f64; 2], path: &str) -> CliResult<f64> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        return Err(CliError::validation(path, format!("range [{}, {}] is empty or not finite", r[0], r[1])));
    }
    Ok(if r[0] == r[1] { r[0] } else { rng.gen_range(r[0]..r[1]) })
}

impl Perturbation {
    /// The concrete metric for `seed`. Draw order: wavenumber, direction, amplitude, phase, bowl, bias.
    pub fn resolve(&self, seed: u64) -> CliResult<MetricSpec> {
        let p = "perturbation";
        if self.n < 2 {
            return Err(CliError::validation(format!("{p}.n"), "need n >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kn = draw(&mut rng, self.wavenumber, &format!("{p}.wavenumber"))?;
        let m = self.n - 1;
        let dir = loop {
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r2: f64 = v.iter().map(|x| x * x).sum();
            if r2 > 1e-12 && r2 <= 1.0 {
                break v.into_iter().map(|x| x / r2.sqrt()).collect::<Vec<_>>();
            }
        };
        Ok(MetricSpec::PerturbedFlat {
            n: self.n,
            amplitude: draw(&mut rng, self.amplitude, &format!("{p}.amplitude"))?,
            wavevector: dir.iter().map(|d| kn * d).collect(),
            phase: draw(&mut rng, self.phase, &format!("{p}.phase"))?,
            bowl: draw(&mut rng, self.bowl, &format!("{p}.bowl"))?,
            bias: draw(&mut rng, self.bias, &format!("{p}.bias"))?,
            center: self.center.clone(),
            chart: self.chart.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Cube {
        lower: [f64; 3],
        upper: [f64; 3],
    },
    Prism {
        base: Vec<[f64; 2]>,
        t_range: [f64; 2],
    },
    RegularPrism {
        sides: usize,
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        phase: f64,
        t_range: [f64; 2],
    },
}

impl DomainSpec {
    pub fn build(&self) -> cornerlab::Result<CorneredDomain> {
        match self {
            DomainSpec::Cube { lower, upper } => CorneredDomain::cube(*lower, *upper),
            DomainSpec::Prism { base, t_range } => CorneredDomain::prism(base.clone(), *t_range),
            DomainSpec::RegularPrism { sides, radius, center, phase, t_range } => {
                if *sides < 3 {
                    return Err(cornerlab::Error::InvalidParameter("a regular prism needs at least 3 sides".into()));
                }
                CorneredDomain::prism(BaseMesh::regular_polygon_vertices(*sides, *radius, *center, *phase), *t_range)
            }
        }
    }
}

// ---- per-command options ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvOptions {
    /// Explicit sample points; otherwise a `per_axis` grid over the inset chart.
    pub points: Option<Vec<Vec<f64>>>,
    pub per_axis: usize,
    /// Fraction of each chart width kept clear of the boundary.
    pub inset: f64,
    pub mode: DerivMode,
}

impl Default for CurvOptions {
    fn default() -> Self {
        CurvOptions { points: None, per_axis: 5, inset: 0.05, mode: DerivMode::Auto }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TubeInitial {
    /// Round sphere of radius `radius` in flat space, flowing inward unless `outward`.
    FlatSphere {
        radius: f64,
        #[serde(default = "two")]
        dim: usize,
        #[serde(default)]
        outward: bool,
    },
    /// Totally geodesic equator of the space form of curvature `curvature`.
    SpaceFormEquator {
        curvature: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    /// `B` is held constant along the flow.
    Explicit {
        gform: Vec<Vec<f64>>,
        shapeop: Vec<Vec<f64>>,
        #[serde(default)]
        bop: Option<Vec<Vec<f64>>>,
    },
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeOptions {
    pub initial: TubeInitial,
    pub length: f64,
    #[serde(default = "milli")]
    pub step: f64,
    /// Write every `stride`-th state to the trajectory table.
    #[serde(default = "one_usize")]
    pub stride: usize,
}

fn milli() -> f64 {
    1e-3
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    Slice {
        #[serde(default)]
        height: Option<f64>,
    },
    Profile {
        profile: HeightProfile,
    },
    /// A surface file written by an earlier `bubble` or `prism` run.
    File {
        path: PathBuf,
    },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Slice { height: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BubbleOptions {
    pub phi: PhiSpec,
    pub psi: PsiSpec,
    pub resolution: usize,
    pub solve: SolveOptions,
    pub init: InitSpec,
    /// Lower end of the `t` column in the volume term.
    pub anchor: Option<f64>,
    /// Also report the trap margin of the solution.
    pub trap: bool,
    pub mode: DerivMode,
}

impl Default for BubbleOptions {
    fn default() -> Self {
        BubbleOptions {
            phi: PhiSpec::zero(),
            psi: PsiSpec::zero(),
            resolution: 32,
            solve: SolveOptions::default(),
            init: InitSpec::default(),
            anchor: None,
            trap: false,
            mode: DerivMode::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiOptions {
    /// Heights of the horizontal slices whose scalar-curvature integrals are compared.
    pub heights: Vec<f64>,
    #[serde(default)]
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrismCommand {
    pub kappa: f64,
    /// Family label of the CSV row; defaults to the metric family.
    pub label: Option<String>,
    pub run: PrismOptions,
    /// Surface file to start the solve from.
    pub init: Option<PathBuf>,
    pub semi: Option<SemiOptions>,
}

impl Default for PrismCommand {
    fn default() -> Self {
        PrismCommand { kappa: 0.0, label: None, run: PrismOptions::default(), init: None, semi: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueSide {
    pub metric: MetricSpec,
    pub domain: DomainSpec,
    pub face: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GlueCommand {
    /// Top-level `metric` and `domain` give the first side.
    Gluing {
        face: usize,
        second: GlueSide,
        #[serde(default)]
        glue: GlueOptions,
    },
    /// Top-level `metric` is `g0` on the face.
    Asymptotics {
        a0: FormSpec,
        aplus: FormSpec,
        eps: Vec<f64>,
        #[serde(default)]
        settings: AsymptoticsOptions,
        /// Allowed relative deviation of the fitted exponent from 1.
        #[serde(default = "five_percent")]
        exponent_tolerance: f64,
    },
}

fn five_percent() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operation", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DevelopCommand {
    Double {
        axis: usize,
        side: FaceSide,
        #[serde(default = "default_steps")]
        steps: Vec<f64>,
        #[serde(default = "five")]
        per_axis: usize,
    },
    /// Reflection development across every face of the chart box.
    Develop {
        #[serde(default = "default_steps")]
        steps: Vec<f64>,
        #[serde(default = "five")]
        per_axis: usize,
    },
}

fn default_steps() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3]
}

fn five() -> usize {
    5
}

// ---- parsing ----

fn join(prefix: &str, rest: &str) -> String {
    match (prefix.is_empty(), rest.is_empty() || rest == ".") {
        (_, true) => if prefix.is_empty() { "<root>".into() } else { prefix.into() },
        (true, false) => rest.into(),
        (false, false) => format!("{prefix}.{rest}"),
    }
}

/// Typed view of `value`, with unknown keys and type errors reported by path under `prefix`.
pub fn parse_section<T: DeserializeOwned>(value: &Value, prefix: &str) -> CliResult<T> {
    let mut ignored = Vec::new();
    let mut note = |p: serde_ignored::Path| ignored.push(p.to_string());
    let parsed: Result<T, _> = serde_path_to_error::deserialize(serde_ignored::Deserializer::new(value.clone(), &mut note));
    match parsed {
        Err(e) => Err(CliError::validation(join(prefix, &e.path().to_string()), e.inner().to_string())),
        Ok(_) if !ignored.is_empty() => Err(CliError::validation(join(prefix, &ignored[0]), "unknown field")),
        Ok(v) => Ok(v),
    }
}

/// Command options, with `null` standing for an empty object.
pub fn parse_options<T: DeserializeOwned>(options: &Value) -> CliResult<T> {
    let v = if options.is_null() { Value::Object(Default::default()) } else { options.clone() };
    parse_section(&v, "options")
}

pub fn parse_config_str(text: &str) -> CliResult<ExperimentConfig> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| CliError::validation(format!("<config>:{}:{}", e.line(), e.column()), e.to_string()))?;
    parse_config_value(&v)
}

pub fn parse_config_value(v: &Value) -> CliResult<ExperimentConfig> {
    let cfg: ExperimentConfig = parse_section(v, "")?;
    if !(cfg.tolerance_scale > 0.0 && cfg.tolerance_scale.is_finite()) {
        return Err(CliError::validation("tolerance_scale", "must be positive and finite"));
    }
    if cfg.metric.is_some() && cfg.perturbation.is_some() {
        return Err(CliError::validation("perturbation", "give either `metric` or `perturbation`, not both"));
    }
    Ok(cfg)
}

/// Reads a config file; returns it with the directory that relative paths resolve against.
pub fn load_config(path: &Path) -> CliResult<(ExperimentConfig, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(path.display().to_string(), format!("cannot read config: {e}")))?;
    let cfg = parse_config_str(&text)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir }))
}

/// Every `grid` file path in a metric spec, with its config path.
pub fn grid_paths(spec: &Value, at: &str, out: &mut Vec<(String, PathBuf)>) {
    match spec {
        Value::Object(m) => {
            if m.get("family").and_then(Value::as_str) == Some("grid") {
                if let Some(p) = m.get("path").and_then(Value::as_str) {
                    out.push((format!("{at}.path"), PathBuf::from(p)));
                }
            }
            for (k, v) in m {
                grid_paths(v, &format!("{at}.{k}"), out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                grid_paths(v, &format!("{at}.{i}"), out);
            }
        }
        _ => {}
    }
}

pub fn check_file(path: &Path, base: &Path, at: &str) -> CliResult<PathBuf> {
    let full = if path.is_absolute() { path.to_path_buf() } else { base.join(path) };
    if full.is_file() {
        Ok(full)
    } else {
        Err(CliError::validation(at, format!("file {} does not exist", full.display())))
    }
}

// ---- dotted paths for sweep axes ----

fn step<'a>(v: &'a mut Value, key: &str) -> Option<&'a mut Value> {
    match v {
        Value::Object(m) => m.get_mut(key),
        Value::Array(a) => key.parse::<usize>().ok().and_then(move |i| a.get_mut(i)),
        _ => None,
    }
}

/// Sets the value at a dotted path that already exists in `root`.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut cur = root;
    for key in path.split('.') {
        cur = step(cur, key).ok_or_else(|| format!("`{path}` does not name a parameter declared in the config"))?;
    }
    *cur = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn errors_name_the_offending_path() {
        let e = parse_config_value(&json!({"command": "prism", "seed": "x"})).unwrap_err();
        assert!(e.to_string().starts_with("seed:"), "{e}");
        let e = parse_config_value(&json!({"command": "prism", "colour": 1})).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse_options::<PrismCommand>(&json!({"run": {"resolution": -3}})).unwrap_err();
        assert!(e.to_string().starts_with("options.run.resolution:"), "{e}");
        let e = parse_options::<PrismCommand>(&json!({"run": {"resolutoin": 3}})).unwrap_err();
        assert_eq!(e.to_string(), "options.run.resolutoin: unknown field");
        let e = parse_config_value(&json!({"command": "bogus"})).unwrap_err();
        assert!(e.to_string().starts_with("command:"), "{e}");
    }

    #[test]
    fn seed_determines_the_draw() {
        let p = Perturbation {
            n: 3,
            amplitude: [0.0, 0.01],
            wavenumber: [0.0, 1.5],
            phase: full_turn(),
            bowl: [0.1, 0.2],
            bias: [-0.05, 0.0],
            center: None,
            chart: None,
        };
        assert_eq!(p.resolve(7).unwrap(), p.resolve(7).unwrap());
        assert_ne!(p.resolve(7).unwrap(), p.resolve(8).unwrap());
        let bad = Perturbation { bowl: [0.2, 0.1], ..p };
        assert!(bad.resolve(0).unwrap_err().to_string().starts_with("perturbation.bowl"));
    }

    #[test]
    fn sweep_paths_must_exist() {
        let mut v = json!({"options": {"kappa": 0.0, "list": [1, 2]}});
        set_path(&mut v, "options.kappa", json!(1.5)).unwrap();
        set_path(&mut v, "options.list.1", json!(5)).unwrap();
        assert_eq!(v, json!({"options": {"kappa": 1.5, "list": [1, 5]}}));
        assert!(set_path(&mut v, "options.missing", json!(0)).is_err());
    }
}
