//! Sweeps over the assignments of the critical instance complete--{s}, m = 2s+1.

use serde_json::{json, Value};

use super::{sweep, Budget, CheckId, Clock, Report, COUNTERS};
use crate::assignment::{sample_rng, Assignment, AssignmentSpace};
use crate::chains::{
    all_covers, closure_mask, closure_violation, full_decoder, intersection_violation, mimic_trace,
};
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::instance::{bit, build_complete_s, full_mask, members, Instance, SideInfo};
use crate::mais::{assignment_walk, build_digraph, mais_size, mais_value};
use rand::Rng;

pub(crate) fn critical_instance(s: u8) -> Result<Instance> {
    if s > 30 {
        return Err(PicodError::domain(format!(
            "critical case s={s} is too large"
        )));
    }
    build_complete_s(2 * s + 1, &[s].into_iter().collect())
}

/// How the cases of a sweep are drawn.
enum Cases {
    All(AssignmentSpace, usize),
    Samples(AssignmentSpace, u64, usize),
}

impl Cases {
    fn new(inst: &Instance, budget: Budget, report: &mut Report) -> Option<Cases> {
        let space = AssignmentSpace::new(inst);
        match space.check_budget(budget.max_evaluations) {
            Ok(n) => Some(Cases::All(space, n)),
            Err(_) if budget.samples > 0 => {
                report.sampled();
                report.note(format!(
                    "{} assignments exceed the exhaustive budget of {}; drew {} seeded samples",
                    space.total(),
                    budget.max_evaluations,
                    budget.samples
                ));
                Some(Cases::Samples(space, budget.seed, budget.samples as usize))
            }
            Err(_) => {
                report.out_of_budget(format!(
                    "{} assignments exceed the exhaustive budget of {} and sampling is disabled",
                    space.total(),
                    budget.max_evaluations
                ));
                None
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Cases::All(_, n) | Cases::Samples(_, _, n) => *n,
        }
    }

    fn get(&self, i: usize) -> Assignment {
        match self {
            Cases::All(space, _) => space.nth(i as u128),
            Cases::Samples(space, seed, _) => space.sample(&mut sample_rng(*seed, i as u64)),
        }
    }
}

fn base_report(id: CheckId, s: u8, inst: &Instance, budget: Budget) -> Report {
    Report::new(id)
        .param("s", s)
        .param("m", inst.m())
        .param("users", inst.n() as u64)
        .param(
            "budget",
            budget.max_evaluations.min(u64::MAX as u128) as u64,
        )
        .param("seed", budget.seed)
}

fn finish_sweep<W: Into<Value>>(
    report: &mut Report,
    outcome: super::Sweep<W>,
    names: [&str; COUNTERS],
) {
    for (name, value) in names.iter().zip(outcome.counters) {
        if !name.is_empty() {
            report.count(name, value);
        }
    }
    if let Some((_, w)) = outcome.failure {
        report.fail(w.into());
    }
    if outcome.aborted {
        report.out_of_budget("time limit reached before the scan finished");
    }
}

/// For every assignment: MAIS = s+1 iff some user's cover is `[1:m]`.
///
/// Both directions are cross-checked constructively: the first witness user
/// of a full-size MAIS must itself cover everything, and the users mimicked by
/// a full decoder must form an acyclic digraph on `s+1` distinct messages.
pub fn verify_claim1(s: u8, budget: Budget, exec: Exec) -> Result<Report> {
    let inst = critical_instance(s)?;
    let mut report = base_report(CheckId::Claim1, s, &inst, budget);
    let clock = Clock::new(budget.time_limit);
    let Some(cases) = Cases::new(&inst, budget, &mut report) else {
        return Ok(report.finish(clock.started()));
    };
    let full = full_mask(inst.m());
    let top = s as usize + 1;
    let outcome = sweep(exec, cases.len(), &clock, |i, c| {
        let d = cases.get(i);
        let mais = mais_size(&inst, &d);
        let decoder = full_decoder(&inst, &d).expect("critical instance");
        c[0] += 1;
        let bad = |why: &str| {
            Some(
                json!({"reason": why, "instance": inst_json(&inst), "assignment": d, "mais": mais.size, "full_decoder": decoder}),
            )
        };
        if (mais.size == top) != decoder.is_some() {
            return bad("equivalence broken");
        }
        if mais.size == top {
            c[1] += 1;
            if closure_mask(&inst, &d, mais.witness_users[0]) != full {
                return bad("first MAIS witness user does not decode everything");
            }
        }
        if let Some(j) = decoder {
            let (cover, trace) = mimic_trace(&inst, &d, j);
            let acyclic = build_digraph(&inst, &d, &trace)
                .map(|g| g.is_acyclic())
                .unwrap_or(false);
            if cover.cover != full || trace.len() != top || !acyclic {
                return bad("mimic order of the full decoder is not an acyclic witness");
            }
            c[2] += 1;
        }
        None
    });
    finish_sweep(
        &mut report,
        outcome,
        ["assignments", "mais_full", "full_decoder_witnesses", ""],
    );
    Ok(report.finish(clock.started()))
}

/// Adjacent assignments (one entry changed) have MAIS differing by at most one.
///
/// Within budget every adjacent pair is checked; otherwise `samples` random
/// pairs plus `samples` random single-entry walks from the all-smallest
/// assignment. The baseline MAIS of that assignment must be `s+1`.
pub fn verify_claim2(s: u8, budget: Budget, exec: Exec) -> Result<Report> {
    let inst = critical_instance(s)?;
    let mut report = base_report(CheckId::Claim2, s, &inst, budget);
    let clock = Clock::new(budget.time_limit);
    let space = AssignmentSpace::new(&inst);
    let top = s as usize + 1;

    let first = space.first();
    let baseline = mais_value(&inst, &first);
    report
        .params
        .insert("baseline_mais".into(), baseline.into());
    if baseline != top {
        report.fail(json!({"reason": "baseline assignment MAIS is not s+1", "instance": inst_json(&inst), "assignment": first, "mais": baseline}));
    }
    report.note(
        "walk follows the single-entry construction starting at the smallest-index assignment",
    );

    let step_failure = |a: &Assignment, b: &Assignment, ma: usize, mb: usize| json!({"reason": "adjacent MAIS differ by more than one", "instance": inst_json(&inst), "a": a, "b": b, "mais_a": ma, "mais_b": mb});

    match space.check_budget(budget.max_evaluations) {
        Ok(n) => {
            let values: Vec<usize> = exec.map_reduce(
                n,
                |i| vec![mais_value(&inst, &space.nth(i as u128))],
                Vec::new,
                |mut a, b| {
                    a.extend(b);
                    a
                },
            );
            let outcome = sweep(exec, n, &clock, |i, c| {
                let a = space.nth(i as u128);
                for j in 0..inst.n() {
                    for b in space.neighbours_at(&a, j) {
                        let k = space.index_of(&b).expect("neighbour in space") as usize;
                        if k < i {
                            continue;
                        }
                        c[0] += 1;
                        if values[i].abs_diff(values[k]) > 1 {
                            return Some(step_failure(&a, &b, values[i], values[k]));
                        }
                    }
                }
                None
            });
            finish_sweep(&mut report, outcome, ["adjacent_pairs", "", "", ""]);
            report.count("assignments", n as u64);
        }
        Err(_) if budget.samples > 0 => {
            report.sampled();
            let samples = budget.samples as usize;
            let pairs = sweep(exec, samples, &clock, |i, c| {
                let mut rng = sample_rng(budget.seed, i as u64);
                let a = space.sample(&mut rng);
                let j = rng.gen_range(0..inst.n());
                let options = space.neighbours_at(&a, j);
                let b = &options[rng.gen_range(0..options.len())];
                let (ma, mb) = (mais_value(&inst, &a), mais_value(&inst, b));
                c[0] += 1;
                (ma.abs_diff(mb) > 1).then(|| step_failure(&a, b, ma, mb))
            });
            finish_sweep(&mut report, pairs, ["sampled_pairs", "", "", ""]);
            let walks = sweep(exec, samples, &clock, |i, c| {
                let mut rng = sample_rng(budget.seed ^ 0x5741_4c4b, i as u64);
                let target = space.sample(&mut rng);
                let walk = assignment_walk(&inst, &target).expect("sampled assignment is valid");
                let sizes: Vec<usize> = walk.iter().map(|d| mais_value(&inst, d)).collect();
                c[0] += 1;
                c[1] += walk.len() as u64 - 1;
                if *sizes.last().expect("nonempty walk") <= s as usize {
                    c[2] += 1;
                }
                walk.windows(2)
                    .zip(sizes.windows(2))
                    .find(|(_, m)| m[0].abs_diff(m[1]) > 1)
                    .map(|(w, m)| step_failure(&w[0], &w[1], m[0], m[1]))
            });
            finish_sweep(
                &mut report,
                walks,
                ["walks", "walk_steps", "walks_ending_at_most_s", ""],
            );
        }
        Err(_) => report.out_of_budget(format!(
            "{} assignments exceed the exhaustive budget",
            space.total()
        )),
    }
    Ok(report.finish(clock.started()))
}

/// Claim 3 in its closure-intersection form: for every assignment and every
/// nonempty set of at most `s+1` covers, no user's side information lies in
/// the intersection without its desired message, so no intersection equals a
/// side-information set. Where the Case-b hypothesis holds for the
/// users `A_i = [s+1] \ {i}`, the inequality `|∩ B_i| != |P| - 1` is checked too.
pub fn verify_claim3(s: u8, budget: Budget, exec: Exec) -> Result<Report> {
    let inst = critical_instance(s)?;
    let mut report = base_report(CheckId::Claim3, s, &inst, budget).param("max_p", s + 1);
    let clock = Clock::new(budget.time_limit);
    let Some(cases) = Cases::new(&inst, budget, &mut report) else {
        return Ok(report.finish(clock.started()));
    };
    let prefix = full_mask(s + 1);
    let case_b_users: Vec<usize> = (1..=s + 1)
        .map(|i| {
            inst.index_of(SideInfo::from_mask(prefix & !bit(i)))
                .expect("complete instance")
        })
        .collect();
    let outcome = sweep(exec, cases.len(), &clock, |i, c| {
        let d = cases.get(i);
        let covers: Vec<u64> = all_covers(&inst, &d).iter().map(|x| x.cover).collect();
        c[0] += 1;
        if let Some((j, k)) = closure_violation(&inst, &d, &covers) {
            return Some(
                json!({"reason": "cover not closed", "instance": inst_json(&inst), "assignment": d, "covers": covers_json(&covers), "cover_user": j, "mimicked": k}),
            );
        }
        let (violation, scanned) = intersection_violation(&inst, &d, &covers, s as usize + 1);
        c[1] += scanned;
        if let Some(v) = violation {
            return Some(
                json!({"reason": "cover intersection not closed", "instance": inst_json(&inst), "assignment": d, "covers": covers_json(&covers), "violation": v}),
            );
        }
        let blocks: Vec<u64> = case_b_users
            .iter()
            .map(|&u| covers[u] & !inst.user(u).mask())
            .collect();
        if blocks.iter().all(|b| b & prefix == 0) {
            c[2] += 1;
            for p in 1u32..(1 << blocks.len()) {
                let inter = blocks
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| p >> k & 1 == 1)
                    .fold(u64::MAX, |acc, (_, b)| acc & b);
                if inter.count_ones() + 1 == p.count_ones() {
                    return Some(
                        json!({"reason": "case-b inequality violated", "instance": inst_json(&inst), "assignment": d, "P": members(p as u64), "blocks": covers_json(&blocks)}),
                    );
                }
            }
        }
        None
    });
    finish_sweep(
        &mut report,
        outcome,
        [
            "assignments",
            "intersections_checked",
            "case_b_hypothesis",
            "",
        ],
    );
    Ok(report.finish(clock.started()))
}

/// Runs the closure and intersection checks on a caller-supplied cover family.
pub fn check_cover_family(
    inst: &Instance,
    d: &Assignment,
    covers: &[u64],
    max_p: usize,
) -> Result<Report> {
    d.validate(inst)?;
    if covers.len() != inst.n() {
        return Err(PicodError::domain(format!(
            "{} covers for {} users",
            covers.len(),
            inst.n()
        )));
    }
    let started = std::time::Instant::now();
    let mut report = Report::new(CheckId::Claim3)
        .param("m", inst.m())
        .param("max_p", max_p as u64)
        .param("source", "supplied covers");
    let (violation, scanned) = intersection_violation(inst, d, covers, max_p);
    report.count("intersections_checked", scanned);
    if let Some(v) = violation {
        report.fail(json!({"reason": "cover intersection not closed", "instance": inst_json(inst), "assignment": d, "covers": covers_json(covers), "violation": v}));
    }
    Ok(report.finish(started))
}

pub(crate) fn inst_json(inst: &Instance) -> Value {
    serde_json::from_str(&inst.to_json()).expect("instance json")
}

pub(crate) fn covers_json(covers: &[u64]) -> Value {
    covers
        .iter()
        .map(|&c| members(c))
        .collect::<Vec<_>>()
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{recheck::recheck, Mode, Verdict};

    fn quick() -> Budget {
        Budget {
            samples: 2000,
            ..Budget::default()
        }
    }

    #[test]
    fn claim1_small_cases() {
        let r = verify_claim1(1, quick(), Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.counters["assignments"], 8);
        assert_eq!(r.counters["mais_full"], 8);
        let r = verify_claim1(3, quick(), Exec::Parallel).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Pass, Mode::Sampled));
        assert_eq!(r.counters["assignments"], 2000);
    }

    #[test]
    fn claim1_budget_without_sampling() {
        let budget = Budget {
            samples: 0,
            ..Budget::default()
        };
        let r = verify_claim1(3, budget, Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Budget);
    }

    #[test]
    fn claim2_small_cases() {
        let r = verify_claim2(1, quick(), Exec::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        // 8 assignments, 3 users each with one alternative: 12 unordered pairs.
        assert_eq!(r.counters["adjacent_pairs"], 12);
        let budget = Budget {
            max_evaluations: 1000,
            samples: 500,
            ..Budget::default()
        };
        let r = verify_claim2(2, budget, Exec::Parallel).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Pass, Mode::Sampled));
        assert_eq!(r.params["baseline_mais"], 3);
        assert_eq!(r.counters["walks_ending_at_most_s"], 0);
    }

    #[test]
    fn claim3_s1() {
        let r = verify_claim3(1, quick(), Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.counters["assignments"], 8);
        assert_eq!(r.counters["case_b_hypothesis"], 0);
    }

    #[test]
    fn hand_crafted_cover_family_fails_with_witness() {
        let inst = critical_instance(1).unwrap();
        let d = Assignment::new(vec![2, 1, 1]);
        let r = check_cover_family(&inst, &d, &[0b011, 0b101, 0b111], 2).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
        assert!(recheck(&r).unwrap());

        let good: Vec<u64> = all_covers(&inst, &d).iter().map(|c| c.cover).collect();
        assert!(check_cover_family(&inst, &d, &good, 2).unwrap().passed());
    }
}
