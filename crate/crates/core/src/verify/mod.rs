//! Instance-wise verification of the hierarchy identities at finite truncation.
//!
//! Every check runs against a shared [`Hierarchy`] at the requested depth `K`. A check
//! that runs out of precision is retried once at `K + 2`; both attempts are recorded in
//! the report. Suites fan out over a thread pool and return reports sorted by
//! `(check_id, params)`.

mod checks;
pub mod random;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diffalg::{Axis, DiffPoly, Gen};
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::json::{op_to_json, poly_to_json};
use crate::psido::PsiDO;

pub use checks::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    InsufficientPrecision,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::InsufficientPrecision => "insufficient_precision",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nonzero residual attached to a failing check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Poly(DiffPoly),
    Op(PsiDO),
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::Poly(p) => json!({"kind": "poly", "value": poly_to_json(p)}),
            Witness::Op(o) => json!({"kind": "operator", "value": op_to_json(o)}),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Poly(p) => write!(f, "{p}"),
            Witness::Op(o) => write!(f, "{o}"),
        }
    }
}

/// One verification instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Lemma2 { i: Axis, n: u32 },
    Lemma3 { i: Axis, n: u32 },
    Lemma4 { i: Axis, n: u32 },
    ZeroCurvature { i: Axis, n: u32, j: Axis, m: u32 },
    Commutativity { i: Axis, n: u32, j: Axis, m: u32, gens: Vec<Gen> },
    Tau { n: u32 },
    Defrel { i: Axis },
    Nv,
    Properties { seed: u64, cases: u32 },
}

impl Check {
    pub fn id(&self) -> &'static str {
        match self {
            Check::Lemma2 { .. } => "lemma2",
            Check::Lemma3 { .. } => "lemma3",
            Check::Lemma4 { .. } => "lemma4",
            Check::ZeroCurvature { .. } => "zero_curvature",
            Check::Commutativity { .. } => "commutativity",
            Check::Tau { .. } => "tau",
            Check::Defrel { .. } => "defrel",
            Check::Nv => "nv",
            Check::Properties { .. } => "properties",
        }
    }

    /// Parameters other than the depth, as ordered `(name, value)` pairs.
    pub fn params(&self) -> Vec<(&'static str, Value)> {
        let ax = |a: &Axis| json!(a.index());
        match self {
            Check::Lemma2 { i, n } | Check::Lemma3 { i, n } | Check::Lemma4 { i, n } => {
                vec![("i", ax(i)), ("n", json!(n))]
            }
            Check::ZeroCurvature { i, n, j, m } => {
                vec![("i", ax(i)), ("n", json!(n)), ("j", ax(j)), ("m", json!(m))]
            }
            Check::Commutativity { i, n, j, m, gens } => vec![
                ("i", ax(i)),
                ("n", json!(n)),
                ("j", ax(j)),
                ("m", json!(m)),
                ("gens", json!(gens.iter().map(|g| g.name()).collect::<Vec<_>>())),
            ],
            Check::Tau { n } => vec![("n", json!(n))],
            Check::Defrel { i } => vec![("i", ax(i))],
            Check::Nv => vec![],
            Check::Properties { seed, cases } => vec![("seed", json!(seed)), ("cases", json!(cases))],
        }
    }

    fn label(&self) -> String {
        let ps: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.id(), ps.join(",").replace('"', ""))
    }

    fn run(&self, h: &Hierarchy) -> Result<Verdict> {
        match self {
            Check::Lemma2 { i, n } => checks::lemma2(h, *i, *n),
            Check::Lemma3 { i, n } => checks::lemma3(h, *i, *n),
            Check::Lemma4 { i, n } => checks::lemma4(h, *i, *n),
            Check::ZeroCurvature { i, n, j, m } => checks::zero_curvature(h, *i, *n, *j, *m),
            Check::Commutativity { i, n, j, m, gens } => checks::commutativity(h, *i, *n, *j, *m, gens),
            Check::Tau { n } => checks::tau(h, *n),
            Check::Defrel { i } => checks::defrel(h, *i),
            Check::Nv => checks::nv(h),
            Check::Properties { seed, cases } => checks::properties(h, *seed, *cases),
        }
    }
}

/// Status of one attempt at one depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attempt {
    pub depth: u32,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub check: Check,
    /// Depth requested by the caller.
    pub depth: u32,
    pub status: Status,
    pub witness: Option<Witness>,
    pub detail: String,
    pub attempts: Vec<Attempt>,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn check_id(&self) -> &'static str {
        self.check.id()
    }

    /// Depth of the attempt that produced the final status.
    pub fn depth_used(&self) -> u32 {
        self.attempts.last().map_or(self.depth, |a| a.depth)
    }

    pub fn label(&self) -> String {
        self.check.label()
    }

    /// JSON form; `elapsed_ms` is included only on request so that output stays
    /// byte-identical across runs.
    pub fn to_json(&self, timings: bool) -> Value {
        let mut params = serde_json::Map::new();
        for (k, v) in self.check.params() {
            params.insert(k.to_string(), v);
        }
        params.insert("K".into(), json!(self.depth));
        let attempts: Vec<Value> = self
            .attempts
            .iter()
            .map(|a| json!({"K": a.depth, "status": a.status.as_str(), "detail": a.detail}))
            .collect();
        let mut v = json!({
            "check_id": self.check_id(),
            "params": params,
            "status": self.status.as_str(),
            "witness": self.witness.as_ref().map(Witness::to_json),
            "detail": self.detail,
            "attempts": attempts,
        });
        if timings {
            v["elapsed_ms"] = json!(self.elapsed.as_secs_f64() * 1e3);
        }
        v
    }
}

fn precision_error(e: &Error) -> bool {
    matches!(e, Error::InsufficientPrecision { .. } | Error::DepthExceeded { .. })
}

type HierarchySlot = Arc<OnceLock<std::result::Result<Arc<Hierarchy>, Error>>>;

/// Shares one [`Hierarchy`] per depth between checks.
#[derive(Default)]
pub struct Runner {
    pool: Mutex<HashMap<u32, HierarchySlot>>,
}

impl Runner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hierarchy(&self, depth: u32) -> Result<Arc<Hierarchy>> {
        let slot = self.pool.lock().expect("pool poisoned").entry(depth).or_default().clone();
        slot.get_or_init(|| Hierarchy::new(depth).map(Arc::new)).clone()
    }

    fn attempt(&self, check: &Check, depth: u32) -> (Attempt, Option<Witness>) {
        let outcome = self.hierarchy(depth).and_then(|h| check.run(&h));
        match outcome {
            Ok(v) => {
                let status = if v.ok { Status::Pass } else { Status::Fail };
                (Attempt { depth, status, detail: v.note }, if v.ok { None } else { v.witness })
            }
            Err(e) if precision_error(&e) => {
                (Attempt { depth, status: Status::InsufficientPrecision, detail: e.to_string() }, None)
            }
            Err(e) => (Attempt { depth, status: Status::Fail, detail: e.to_string() }, None),
        }
    }

    /// Runs one check at `depth`, retrying once at `depth + 2` on insufficient precision.
    pub fn run(&self, check: &Check, depth: u32) -> CheckReport {
        let start = Instant::now();
        let (first, mut witness) = self.attempt(check, depth);
        let mut attempts = vec![first];
        if attempts[0].status == Status::InsufficientPrecision {
            let (second, w) = self.attempt(check, depth + 2);
            attempts.push(second);
            witness = w;
        }
        let last = attempts.last().expect("at least one attempt");
        CheckReport {
            check: check.clone(),
            depth,
            status: last.status,
            witness,
            detail: last.detail.clone(),
            attempts,
            elapsed: start.elapsed(),
        }
    }

    /// Runs every check concurrently; reports come back sorted by `(check_id, params)`.
    pub fn run_all(&self, checks: &[Check], depth: u32) -> Vec<CheckReport> {
        let mut out: Vec<CheckReport> = checks.par_iter().map(|c| self.run(c, depth)).collect();
        out.sort_by(|a, b| (a.check_id(), &a.check).cmp(&(b.check_id(), &b.check)));
        out
    }
}

/// Named groups of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Lemmas,
    Theorem,
    Tau,
    Nv,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "all" => Suite::All,
            "lemmas" => Suite::Lemmas,
            "theorem" => Suite::Theorem,
            "tau" => Suite::Tau,
            "nv" => Suite::Nv,
            _ => return None,
        })
    }
}

const AXES: [Axis; 2] = [Axis::D1, Axis::D2];
const MAX_LEVEL: u32 = 2;

/// Generators the commutativity checks are evaluated on.
pub fn default_generators() -> Vec<Gen> {
    vec![Gen::U, Gen::V(0), Gen::V(1), Gen::W(0), Gen::W(1)]
}

pub fn lemma_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for i in AXES {
        for n in 0..=MAX_LEVEL {
            out.push(Check::Lemma2 { i, n });
            out.push(Check::Lemma3 { i, n });
            out.push(Check::Lemma4 { i, n });
        }
        out.push(Check::Defrel { i });
    }
    let pairs: Vec<(Axis, u32)> = AXES.iter().flat_map(|&i| (0..=MAX_LEVEL).map(move |n| (i, n))).collect();
    for (x, &(i, n)) in pairs.iter().enumerate() {
        for &(j, m) in &pairs[x..] {
            out.push(Check::ZeroCurvature { i, n, j, m });
        }
    }
    out
}

pub fn theorem_checks() -> Vec<Check> {
    let pairs: Vec<(Axis, u32)> = AXES.iter().flat_map(|&i| (0..=MAX_LEVEL).map(move |n| (i, n))).collect();
    let mut out = Vec::new();
    for (x, &(i, n)) in pairs.iter().enumerate() {
        for &(j, m) in &pairs[x + 1..] {
            out.push(Check::Commutativity { i, n, j, m, gens: default_generators() });
        }
    }
    out
}

pub fn tau_checks() -> Vec<Check> {
    (0..=MAX_LEVEL).map(|n| Check::Tau { n }).collect()
}

pub fn suite_checks(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Lemmas => lemma_checks(),
        Suite::Theorem => theorem_checks(),
        Suite::Tau => tau_checks(),
        Suite::Nv => vec![Check::Nv],
        Suite::All => {
            let mut v = lemma_checks();
            v.extend(theorem_checks());
            v.extend(tau_checks());
            v.push(Check::Nv);
            v.push(Check::Properties { seed, cases: 50 });
            v
        }
    }
}

pub fn run_suite(suite: Suite, depth: u32, seed: u64) -> Vec<CheckReport> {
    Runner::new().run_all(&suite_checks(suite, seed), depth)
}

/// Overall status: any failure wins over insufficient precision, which wins over pass.
pub fn overall(reports: &[CheckReport]) -> Status {
    if reports.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.status == Status::InsufficientPrecision) {
        Status::InsufficientPrecision
    } else {
        Status::Pass
    }
}

fn single(check: Check, depth: u32) -> CheckReport {
    Runner::new().run(&check, depth)
}

pub fn check_lemma2(i: Axis, n: u32, depth: u32) -> CheckReport {
    single(Check::Lemma2 { i, n }, depth)
}

pub fn check_lemma3(i: Axis, n: u32, depth: u32) -> CheckReport {
    single(Check::Lemma3 { i, n }, depth)
}

pub fn check_lemma4(i: Axis, n: u32, depth: u32) -> CheckReport {
    single(Check::Lemma4 { i, n }, depth)
}

pub fn check_zero_curvature(i: Axis, n: u32, j: Axis, m: u32, depth: u32) -> CheckReport {
    single(Check::ZeroCurvature { i, n, j, m }, depth)
}

pub fn check_commutativity(i: Axis, n: u32, j: Axis, m: u32, gens: &[Gen], depth: u32) -> CheckReport {
    single(Check::Commutativity { i, n, j, m, gens: gens.to_vec() }, depth)
}

pub fn check_tau(n: u32, depth: u32) -> CheckReport {
    single(Check::Tau { n }, depth)
}

pub fn check_defrel(i: Axis, depth: u32) -> CheckReport {
    single(Check::Defrel { i }, depth)
}

pub fn derive_nv(depth: u32) -> CheckReport {
    single(Check::Nv, depth)
}

pub fn check_properties(seed: u64, cases: u32, depth: u32) -> CheckReport {
    single(Check::Properties { seed, cases }, depth)
}
