//! `run`: execute a scenario file, write outputs, check assertions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{parse_config, plan, Expect, OpParams, Planned};
use crate::error::{CliError, Result};
use crate::ops::{self, load_phase, Metrics, Output, SCHEMA_VERSION};

pub const VERSION: &str = env!("FHKIT_VERSION");

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub jobs: usize,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario: String,
    pub operation: crate::config::Operation,
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<PathBuf>,
    pub metrics: Metrics,
    pub assertions: Vec<AssertionResult>,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// `f(0..n)` on up to `jobs` scoped threads, results in index order.
pub fn map_jobs<T: Send, F: Fn(usize) -> T + Sync>(n: usize, jobs: usize, f: F) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let v = f(i);
                *slots[i].lock().unwrap() = Some(v);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot filled")).collect()
}

pub fn execute(p: &Planned) -> Result<Output> {
    let phase = match &p.phase {
        Some(path) => Some(load_phase(path)?),
        None => None,
    };
    let path = p.phase.as_deref();
    match &p.params {
        OpParams::FhCheck(q) => ops::fh_check(phase.as_ref().unwrap(), q),
        OpParams::QcalcVerify(q) => ops::qcalc_verify(q, p.seed),
        OpParams::NormSweep(q) => ops::norm_sweep(phase.as_ref().unwrap(), q, path),
        OpParams::Fefferman(q) => ops::fefferman(q),
        OpParams::SwSweep(q) => ops::sw_sweep(q, p.seed),
        OpParams::SquareSum(q) => ops::square_sum(phase.as_ref().unwrap(), q, path),
    }
}

fn bound(name: &str, value: Option<f64>, limit: f64, le: bool) -> AssertionResult {
    let (pass, detail) = match value {
        Some(v) if v.is_finite() => {
            let pass = if le { v <= limit } else { v >= limit };
            (pass, format!("{v} {} {limit}", if le { "<=" } else { ">=" }))
        }
        Some(v) => (false, format!("value {v} is not finite")),
        None => (false, "no value (fit missing or estimate failed)".into()),
    };
    AssertionResult { name: name.into(), pass, detail }
}

fn evaluate(e: &Expect, m: &Metrics, all: &HashMap<&str, &Metrics>) -> Vec<AssertionResult> {
    let mut out = Vec::new();
    if let Some(v) = &e.verdict {
        let got = m.verdict.clone().unwrap_or_default();
        out.push(AssertionResult { name: "verdict".into(), pass: &got == v, detail: format!("got {got}, expected {v}") });
    }
    if let Some(x) = e.slope_min {
        out.push(bound("slope_min", m.slope, x, false));
    }
    if let Some(x) = e.slope_max {
        out.push(bound("slope_max", m.slope, x, true));
    }
    if let Some(x) = e.r2_min {
        out.push(bound("r2_min", m.r2, x, false));
    }
    if let Some(rel) = &e.slope_fraction_of {
        let reference = all.get(rel.scenario.as_str()).and_then(|r| r.slope);
        let (pass, detail) = match (m.slope, reference) {
            (Some(s), Some(r)) => (r > 0.0 && s.abs() <= rel.fraction * r, format!("|{s}| <= {} * {r}", rel.fraction)),
            _ => (false, "slope missing on one side".into()),
        };
        out.push(AssertionResult { name: "slope_fraction_of".into(), pass, detail });
    }
    if let Some(tol) = e.predicted_rel_tol {
        let (pass, detail) = match (m.slope, m.predicted_slope) {
            (Some(s), Some(p)) => ((s - p).abs() <= tol * p.abs(), format!("slope {s} vs predicted {p}, tolerance {tol}")),
            _ => (false, "slope or prediction missing".into()),
        };
        out.push(AssertionResult { name: "predicted_rel_tol".into(), pass, detail });
    }
    if let Some(x) = e.max_le {
        out.push(bound("max_le", m.max, x, true));
    }
    if let Some(x) = e.max_ge {
        out.push(bound("max_ge", m.max, x, false));
    }
    if let Some(want) = e.all_pass {
        let got = m.all_pass.unwrap_or(false);
        out.push(AssertionResult { name: "all_pass".into(), pass: got == want, detail: format!("got {got}") });
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Run the scenarios of `config_text`, resolving phase files against `base`.
pub fn run_text(config_text: &str, base: &Path, opts: &RunOptions) -> Result<Vec<RunRecord>> {
    let planned = plan(parse_config(config_text)?, base, opts.seed)?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let results = map_jobs(planned.len(), opts.jobs, |i| {
        let start = now_ms();
        let out = execute(&planned[i]);
        (start, now_ms(), out)
    });
    let mut done = Vec::new();
    for (p, (start, end, out)) in planned.iter().zip(results) {
        let out = out.map_err(|e| e.in_scenario(&p.id))?;
        let mut outputs = vec![opts.out_dir.join(format!("{}.json", p.id))];
        write(&outputs[0], &out.json_text()).map_err(|e| e.in_scenario(&p.id))?;
        if let Some(csv) = &out.csv {
            let path = opts.out_dir.join(format!("{}.csv", p.id));
            write(&path, csv).map_err(|e| e.in_scenario(&p.id))?;
            outputs.push(path);
        }
        done.push((p, start, end, outputs, out.metrics));
    }
    let all: HashMap<&str, &Metrics> = done.iter().map(|d| (d.0.id.as_str(), &d.4)).collect();
    let records: Vec<RunRecord> = done
        .iter()
        .map(|(p, start, end, outputs, metrics)| RunRecord {
            scenario: p.id.clone(),
            operation: p.operation,
            version: VERSION.to_string(),
            started_unix_ms: *start,
            finished_unix_ms: *end,
            outputs: outputs.clone(),
            metrics: metrics.clone(),
            assertions: evaluate(&p.expect, metrics, &all),
        })
        .collect();
    let manifest = serde_json::json!({ "schema_version": SCHEMA_VERSION, "records": records });
    let path = opts.out_dir.join("run.json");
    write(&path, &(serde_json::to_string_pretty(&manifest).expect("records serialise") + "\n"))?;
    Ok(records)
}

pub fn run(config: &Path, opts: &RunOptions) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::io(config, e))?;
    let base = config.parent().unwrap_or(Path::new("."));
    run_text(&text, base, opts)
}
