//! Scenario files, task dispatch and JSON reports for the `fglab` binary.

pub mod report;
pub mod scenario;
mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

pub use report::{Check, Report, Verdict};
pub use scenario::{Scenario, Task};

/// Runs one scenario. Errors become a report with verdict `error`.
pub fn run_scenario(s: &Scenario, timing: bool) -> Report {
    let start = Instant::now();
    let result = tasks::validate(s).and_then(|_| tasks::dispatch(s));
    let mut report = match result {
        Ok((outputs, certificates)) => Report::finish(s, outputs, certificates),
        Err(e) => Report::failed(s, format!("{e:#}")),
    };
    if timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    report
}

pub fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).with_context(|| format!("in {}", path.display()))
}

/// Expands directories into their `*.json` files, sorted by name.
pub fn collect_paths(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}
