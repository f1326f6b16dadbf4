//! Exhaustive and sampled certification of the converse ingredients, with
//! machine-readable reports.
//!
//! A report is `pass` only when the stated property held on every case that
//! was scanned. Exhaustive scans that would exceed their budget produce a
//! `budget` verdict instead of a partial pass. Sampled scans are labelled
//! with [`Mode::Sampled`]; they can refute but never prove.

mod combinatorics;
mod critical;
pub mod recheck;
pub mod suite;
mod theorem;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exec::Exec;

pub use combinatorics::{
    check_claim4_tuple, check_lemma1_matrix, inverted_lemma1_pair, lemma1_pair, verify_claim4,
    verify_lemma1, Lemma1Mode,
};
pub use critical::{check_cover_family, verify_claim1, verify_claim2, verify_claim3};
pub use theorem::{
    converse_route, verify_achievability, verify_enhancement, verify_reductions,
    verify_shorter_code, verify_theorem1, ConverseRoute,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckId {
    Theorem,
    Achievability,
    Claim1,
    Claim2,
    Claim3,
    Claim4,
    Lemma1,
    Reductions,
    Enhancement,
    Search,
}

impl CheckId {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Theorem => "theorem",
            CheckId::Achievability => "achievability",
            CheckId::Claim1 => "claim1",
            CheckId::Claim2 => "claim2",
            CheckId::Claim3 => "claim3",
            CheckId::Claim4 => "claim4",
            CheckId::Lemma1 => "lemma1",
            CheckId::Reductions => "reductions",
            CheckId::Enhancement => "enhancement",
            CheckId::Search => "search",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Budget,
}

/// Whether every leg of a report was an exhaustive scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

impl Mode {
    pub fn and(self, other: Mode) -> Mode {
        if self == Mode::Sampled || other == Mode::Sampled {
            Mode::Sampled
        } else {
            Mode::Exhaustive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_id: CheckId,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub mode: Mode,
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Resolved run configuration, filled in by front ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(check_id: CheckId) -> Report {
        Report {
            check_id,
            params: BTreeMap::new(),
            verdict: Verdict::Pass,
            mode: Mode::Exhaustive,
            counters: BTreeMap::new(),
            witness: None,
            notes: Vec::new(),
            config: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Report {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn count(&mut self, key: &str, value: u64) {
        *self.counters.entry(key.to_owned()).or_insert(0) += value;
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records a failure. The first witness is kept.
    pub fn fail(&mut self, witness: Value) {
        if self.verdict != Verdict::Fail {
            self.verdict = Verdict::Fail;
            self.witness = Some(witness);
        }
    }

    /// Budget exhaustion never overrides a failure.
    pub fn out_of_budget(&mut self, why: impl Into<String>) {
        if self.verdict == Verdict::Pass {
            self.verdict = Verdict::Budget;
        }
        self.note(why);
    }

    pub fn sampled(&mut self) {
        self.mode = Mode::Sampled;
    }

    /// Folds a sub-report's verdict, mode, counters and notes into this one.
    pub fn absorb(&mut self, prefix: &str, other: &Report) {
        match other.verdict {
            Verdict::Fail => self.fail(other.witness.clone().unwrap_or(Value::Null)),
            Verdict::Budget => self.out_of_budget(format!("{prefix}: budget exhausted")),
            Verdict::Pass => {}
        }
        self.mode = self.mode.and(other.mode);
        for (k, v) in &other.counters {
            self.count(&format!("{prefix}.{k}"), *v);
        }
        for n in &other.notes {
            self.note(format!("{prefix}: {n}"));
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Report without the elapsed time, for byte-level comparisons.
    pub fn without_timing(&self) -> Report {
        Report {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }

    fn finish(mut self, started: Instant) -> Report {
        debug_assert!(
            self.verdict != Verdict::Fail || self.witness.is_some(),
            "fail verdict without witness"
        );
        self.elapsed_ms = (started.elapsed().as_secs_f64() * 1e6).round() / 1e3;
        self
    }
}

/// Limits for a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest exhaustive enumeration attempted.
    pub max_evaluations: u128,
    pub time_limit: Option<Duration>,
    /// Samples drawn when an exhaustive scan is over budget; 0 disables sampling.
    pub samples: u64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_evaluations: 1_000_000,
            time_limit: Some(Duration::from_secs(60)),
            samples: 100_000,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn unlimited_time(self) -> Budget {
        Budget {
            time_limit: None,
            ..self
        }
    }
}

/// Wall-clock limit shared by the workers of one check.
pub(crate) struct Clock {
    start: Instant,
    limit: Option<Duration>,
    expired: AtomicBool,
}

impl Clock {
    pub(crate) fn new(limit: Option<Duration>) -> Clock {
        Clock {
            start: Instant::now(),
            limit,
            expired: AtomicBool::new(false),
        }
    }

    pub(crate) fn started(&self) -> Instant {
        self.start
    }

    pub(crate) fn expired(&self) -> bool {
        if self.expired.load(Ordering::Relaxed) {
            return true;
        }
        match self.limit {
            Some(limit) if self.start.elapsed() > limit => {
                self.expired.store(true, Ordering::Relaxed);
                true
            }
            _ => false,
        }
    }
}

pub(crate) const COUNTERS: usize = 4;

/// Outcome of mapping a check over `0..n`.
pub(crate) struct Sweep<W> {
    /// Lowest failing index and its witness.
    pub failure: Option<(usize, W)>,
    pub counters: [u64; COUNTERS],
    pub aborted: bool,
}

/// Runs `check(i, counters)` for every `i < n`; a `Some` return is a failure.
pub(crate) fn sweep<W, F>(exec: Exec, n: usize, clock: &Clock, check: F) -> Sweep<W>
where
    W: Send,
    F: Fn(usize, &mut [u64; COUNTERS]) -> Option<W> + Sync + Send,
{
    exec.map_reduce(
        n,
        |i| {
            if clock.expired() {
                return Sweep {
                    failure: None,
                    counters: [0; COUNTERS],
                    aborted: true,
                };
            }
            let mut counters = [0; COUNTERS];
            let failure = check(i, &mut counters).map(|w| (i, w));
            Sweep {
                failure,
                counters,
                aborted: false,
            }
        },
        || Sweep {
            failure: None,
            counters: [0; COUNTERS],
            aborted: false,
        },
        |a, b| {
            let failure = match (a.failure, b.failure) {
                (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                (x, y) => x.or(y),
            };
            let mut counters = a.counters;
            for (c, o) in counters.iter_mut().zip(b.counters) {
                *c += o;
            }
            Sweep {
                failure,
                counters,
                aborted: a.aborted || b.aborted,
            }
        },
    )
}

/// Runs one check by id with the parameters the command line exposes.
#[derive(Clone, Debug, Default)]
pub struct CheckArgs {
    pub s: Option<u8>,
    pub m: Option<u8>,
    pub s_min: Option<u8>,
    pub s_max: Option<u8>,
    pub n: Option<u8>,
}

pub fn run_check(
    id: CheckId,
    args: &CheckArgs,
    budget: Budget,
    exec: Exec,
) -> crate::Result<Report> {
    use crate::error::PicodError;
    use crate::instance::SpecS;
    let need = |v: Option<u8>, name: &str| {
        v.ok_or_else(|| PicodError::domain(format!("{} needs --{name}", id.as_str())))
    };
    let spec = || -> crate::Result<SpecS> {
        match (args.s_min, args.s_max, args.s) {
            (Some(a), Some(b), _) => Ok(SpecS::new(a, b)),
            (None, None, Some(s)) => Ok(SpecS::single(s)),
            _ => Err(PicodError::domain(format!(
                "{} needs --s-min and --s-max (or --s)",
                id.as_str()
            ))),
        }
    };
    match id {
        CheckId::Theorem => verify_theorem1(need(args.m, "m")?, spec()?, budget, exec),
        CheckId::Achievability => {
            verify_achievability(args.m.unwrap_or(3)..=args.m.unwrap_or(8), exec)
        }
        CheckId::Claim1 => verify_claim1(need(args.s, "s")?, budget, exec),
        CheckId::Claim2 => verify_claim2(need(args.s, "s")?, budget, exec),
        CheckId::Claim3 => verify_claim3(need(args.s, "s")?, budget, exec),
        CheckId::Claim4 => verify_claim4(need(args.s, "s")?, 4, exec),
        CheckId::Lemma1 => {
            let rows = need(args.n, "n")?;
            let cols = need(args.m, "m")?;
            let mode = if (rows as u32) * (cols as u32) <= 64
                && (1u128 << (rows as u32 * cols as u32)) <= budget.max_evaluations
            {
                Lemma1Mode::Exhaustive
            } else {
                Lemma1Mode::Sampled {
                    seed: budget.seed,
                    samples: budget.samples,
                }
            };
            verify_lemma1(rows, cols, mode, budget, exec)
        }
        CheckId::Reductions => {
            verify_reductions(need(args.m, "m")?, need(args.s, "s")?, budget, exec)
        }
        CheckId::Enhancement => verify_enhancement(args.m.unwrap_or(8), exec),
        CheckId::Search => {
            let m = need(args.m, "m")?;
            let s = need(args.s, "s")?;
            let ell = args
                .n
                .map(usize::from)
                .unwrap_or_else(|| crate::optimal_length(m, SpecS::single(s)) as usize - 1);
            verify_shorter_code(m, s, ell, 1, budget, exec)
        }
    }
}
