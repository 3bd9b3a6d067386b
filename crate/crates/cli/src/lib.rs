//! Batch scenario runner for derlab: load inputs, run suites, report.

pub mod report;
pub mod scenario;
pub mod suites;

use std::path::Path;
use std::time::Instant;

use derlab_core::par;

use report::{exit, Item, Report, Summary};
use scenario::Scenario;
use suites::{expand, Outcome};

/// A malformed scenario, an unresolved name or a failed input gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<InputError> for derlab_core::Error {
    fn from(e: InputError) -> Self {
        derlab_core::Error::Input(e.0)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// 0 uses the default pool.
    pub workers: usize,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// Execute every suite of the scenario; items are independent and run in
/// parallel, results keep the scenario order.
pub fn run(s: &Scenario, opts: RunOptions) -> Report {
    let start = Instant::now();
    let s = match opts.seed {
        Some(seed) => s.clone().with_seed(seed),
        None => s.clone(),
    };
    let tasks: Vec<_> = s.suites.iter().flat_map(|suite| expand(&s, suite)).collect();
    let outcomes: Vec<Outcome> = par::with_workers(opts.workers, || {
        par::map(&tasks, |t| (t.job)().unwrap_or_else(|e| Outcome::from_error(&e)))
    });
    let mut counters = std::collections::BTreeMap::new();
    let items: Vec<Item> = tasks
        .iter()
        .zip(outcomes)
        .map(|(t, o)| {
            let n = counters.entry(t.suite).or_insert(0usize);
            *n += 1;
            Item { id: format!("{}/{}", t.suite, n), suite: t.suite.into(), label: t.label.clone(), status: o.status, detail: o.detail }
        })
        .collect();
    let summary = Summary::of(&items);
    Report {
        scenario: s.path.display().to_string(),
        seed: s.budget.seed,
        budget: s.budget.budget,
        window: s.window,
        error: None,
        exit_code: summary.exit_code(),
        items,
        summary,
        wall_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    }
}

/// Load and run; load failures become a report with exit code 2.
pub fn run_path(path: &Path, opts: RunOptions) -> Report {
    match Scenario::load(path) {
        Ok(s) => run(&s, opts),
        Err(e) => {
            let mut r = Report::failed_to_load(&path.display().to_string(), e.0);
            r.exit_code = exit::INPUT;
            r
        }
    }
}
