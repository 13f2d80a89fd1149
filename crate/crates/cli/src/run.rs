//! Running configs: single commands and sweeps, artifacts on disk.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::commands::{job_dir, prepare, Artifacts};
use crate::config::{parse_config_value, set_path, Command, ExperimentConfig};
use crate::error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATED};
use crate::format::{cell, to_json_string, Table};

/// Command-line overrides of config fields.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
    pub check: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    /// Written files, in write order.
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    let text = to_json_string(v).map_err(|e| CliError::validation(path.display().to_string(), e.to_string()))?;
    write_text(path, &text)
}

fn write_table(path: &Path, t: &Table) -> CliResult<()> {
    t.write(path).map_err(|source| CliError::Csv { path: path.display().to_string(), source })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })
}

/// `report.json` plus the command's tables in `dir`.
fn write_artifacts(dir: &Path, resolved: &ExperimentConfig, a: &Artifacts) -> CliResult<Vec<PathBuf>> {
    create_dir(dir)?;
    let report = json!({
        "cornerlab_version": env!("CARGO_PKG_VERSION"),
        "command": resolved.command,
        "config": resolved,
        "summary": a.summary,
        "verdict": a.verdict,
        "violated": a.violated,
        "result": a.result,
    });
    let mut files = vec![dir.join("report.json")];
    write_json(&files[0], &report)?;
    for (name, t) in &a.tables {
        let p = dir.join(name);
        write_table(&p, t)?;
        files.push(p);
    }
    for (name, v) in &a.files {
        let p = dir.join(name);
        write_json(&p, v)?;
        files.push(p);
    }
    Ok(files)
}

fn apply_overrides(cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<ExperimentConfig> {
    let mut c = cfg.clone();
    if let Some(s) = opts.seed {
        c.seed = s;
    }
    if let Some(x) = opts.tolerance_scale {
        if !(x > 0.0 && x.is_finite()) {
            return Err(CliError::validation("--tolerance-scale", "must be positive and finite"));
        }
        c.tolerance_scale = x;
    }
    c.check |= opts.check;
    Ok(c)
}

fn out_dir(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> CliResult<PathBuf> {
    match (&opts.out, &cfg.outputs.dir) {
        (Some(o), _) => Ok(o.clone()),
        (None, Some(d)) if d.is_absolute() => Ok(d.clone()),
        (None, Some(d)) => Ok(base.join(d)),
        (None, None) => Err(CliError::validation("outputs.dir", "no output directory; set outputs.dir or pass --out")),
    }
}

/// Runs `cfg` with relative paths resolved against `base`.
pub fn run(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> CliResult<Outcome> {
    let cfg = apply_overrides(cfg, opts)?;
    let out = out_dir(&cfg, base, opts)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        if j == 0 {
            return Err(CliError::validation("--jobs", "must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::validation("--jobs", e.to_string()))?;
    pool.install(|| match cfg.command {
        Command::Sweep => run_sweep(&cfg, base, &out),
        _ => run_single(&cfg, base, &out),
    })
}

fn run_single(cfg: &ExperimentConfig, base: &Path, out: &Path) -> CliResult<Outcome> {
    let prepared = prepare(cfg, base)?;
    let a = prepared.execute()?;
    let files = write_artifacts(out, &prepared.resolved, &a)?;
    let exit_code = if cfg.check && a.violated { EXIT_VIOLATED } else { EXIT_OK };
    Ok(Outcome { exit_code, out_dir: out.to_path_buf(), files, summary: Value::Object(a.summary) })
}

/// Job configs of a sweep, in row-major order of the axes (last axis fastest).
pub fn expand_sweep(cfg: &ExperimentConfig) -> CliResult<Vec<(Vec<Value>, ExperimentConfig)>> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::validation("sweep", "a `sweep` command needs a `sweep` section"))?;
    if spec.command == Command::Sweep {
        return Err(CliError::validation("sweep.command", "sweeps cannot be nested"));
    }
    let mut base = cfg.clone();
    base.command = spec.command;
    base.sweep = None;
    let mut template = serde_json::to_value(&base).expect("configs serialize");
    if let Value::Object(m) = &mut template {
        m.insert("seed".into(), json!(base.seed));
    }
    for (i, ax) in spec.axes.iter().enumerate() {
        if ax.values.is_empty() {
            return Err(CliError::validation(format!("sweep.axes.{i}.values"), "no values"));
        }
        let mut probe = template.clone();
        set_path(&mut probe, &ax.parameter, ax.values[0].clone())
            .map_err(|m| CliError::validation(format!("sweep.axes.{i}.parameter"), m))?;
    }
    let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
    for ax in &spec.axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                ax.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(j, combo)| {
            let mut v = template.clone();
            for (ax, val) in spec.axes.iter().zip(&combo) {
                set_path(&mut v, &ax.parameter, val.clone()).expect("checked above");
            }
            let c = parse_config_value(&v).map_err(|e| match e {
                CliError::Validation { path, message } => CliError::validation(format!("sweep job {j}: {path}"), message),
                other => other,
            })?;
            Ok((combo, c))
        })
        .collect()
}

#[derive(Serialize)]
struct JobRecord {
    job: usize,
    parameters: Map<String, Value>,
    status: &'static str,
    exit_code: i32,
    error: Option<String>,
    verdict: Option<String>,
    summary: Map<String, Value>,
}

fn run_sweep(cfg: &ExperimentConfig, base: &Path, out: &Path) -> CliResult<Outcome> {
    let jobs = expand_sweep(cfg)?;
    let spec = cfg.sweep.as_ref().expect("checked by expand_sweep");
    // every job must validate before any runs
    let mut prepared = Vec::with_capacity(jobs.len());
    for (j, (_, c)) in jobs.iter().enumerate() {
        match prepare(c, base) {
            Err(CliError::Validation { path, message }) => {
                return Err(CliError::validation(format!("sweep job {j}: {path}"), message))
            }
            // numeric failures while building inputs are recorded per job
            other => prepared.push(other),
        }
    }
    create_dir(out)?;
    let records: Vec<(JobRecord, Vec<PathBuf>)> = prepared
        .into_par_iter()
        .enumerate()
        .map(|(j, p)| {
            let parameters: Map<String, Value> =
                spec.axes.iter().zip(&jobs[j].0).map(|(a, v)| (a.parameter.clone(), v.clone())).collect();
            let dir = job_dir(out, j);
            let done = p.and_then(|p| {
                let a = p.execute()?;
                let files = write_artifacts(&dir, &p.resolved, &a)?;
                Ok((a, files))
            });
            match done {
                Ok((a, files)) => {
                    let violated = cfg.check && a.violated;
                    let rec = JobRecord {
                        job: j,
                        parameters,
                        status: if a.violated { "violated" } else { "ok" },
                        exit_code: if violated { EXIT_VIOLATED } else { EXIT_OK },
                        error: None,
                        verdict: a.verdict,
                        summary: a.summary,
                    };
                    (rec, files)
                }
                Err(e) => {
                    let rec = JobRecord {
                        job: j,
                        parameters,
                        status: "failed",
                        exit_code: e.exit_code(),
                        error: Some(e.to_string()),
                        verdict: None,
                        summary: Map::new(),
                    };
                    (rec, Vec::new())
                }
            }
        })
        .collect();

    let mut resolved = cfg.clone();
    resolved.outputs = Default::default();
    let mut files: Vec<PathBuf> = Vec::new();
    for (_, f) in &records {
        files.extend(f.iter().cloned());
    }
    let recs: Vec<&JobRecord> = records.iter().map(|(r, _)| r).collect();
    let keys: Vec<String> = recs.iter().find(|r| !r.summary.is_empty()).map(|r| r.summary.keys().cloned().collect()).unwrap_or_default();
    let mut header = vec!["job".to_string()];
    header.extend(spec.axes.iter().map(|a| a.parameter.clone()));
    header.extend(["status", "exit_code", "verdict", "error"].map(String::from));
    let keys: Vec<String> = keys.into_iter().filter(|k| !header.contains(k)).collect();
    header.extend(keys.iter().cloned());
    let mut t = Table::new(header);
    for r in &recs {
        let mut row = vec![r.job.to_string()];
        row.extend(spec.axes.iter().map(|a| cell(&r.parameters[&a.parameter])));
        row.extend([r.status.to_string(), r.exit_code.to_string(), r.verdict.clone().unwrap_or_default(), r.error.clone().unwrap_or_default()]);
        row.extend(keys.iter().map(|k| r.summary.get(k).map(cell).unwrap_or_default()));
        t.push(row);
    }
    let failed = recs.iter().filter(|r| r.status == "failed").count();
    let violated = recs.iter().filter(|r| r.status == "violated").count();
    let summary = json!({"jobs": recs.len(), "failed": failed, "violated": violated});
    let report = json!({
        "cornerlab_version": env!("CARGO_PKG_VERSION"),
        "command": "sweep",
        "config": resolved,
        "summary": summary,
        "jobs": recs,
    });
    let sj = out.join("summary.json");
    write_json(&sj, &report)?;
    let sc = out.join("summary.csv");
    write_table(&sc, &t)?;
    files.push(sj);
    files.push(sc);

    let exit_code = if recs.iter().any(|r| r.exit_code == EXIT_VALIDATION) {
        EXIT_VALIDATION
    } else if failed > 0 {
        EXIT_NUMERIC
    } else if cfg.check && violated > 0 {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    };
    Ok(Outcome { exit_code, out_dir: out.to_path_buf(), files, summary })
}
