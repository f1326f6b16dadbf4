//! Optimal-length certification: achievability, the reduction route to a
//! critical instance, and the exhaustive search for shorter codes.

use std::ops::RangeInclusive;

use serde::Serialize;
use serde_json::{json, Value};

use super::critical::inst_json;
use super::{sweep, Budget, CheckId, Clock, Report};
use crate::assignment::AssignmentSpace;
use crate::codes::{best_scheme, min_field_exponent, scheme_mds, scheme_prefix, LinearCode};
use crate::decode::{is_valid, search_linear_codes, SearchMode, SearchOutcome};
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::galois::Matrix;
use crate::instance::{
    build_complete_s, build_consecutive, drop_to_single_s, enhance_to_critical, enhancement_params,
    restrict_fixed_prefix, Enhancement, Instance, SpecS,
};
use crate::mais::{min_mais, MinMaisMode};
use crate::optimal_length;

/// How the converse reaches an instance whose min-MAIS is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "route")]
pub enum ConverseRoute {
    /// Already complete--{s} with m = 2s+1.
    Critical { s: u8 },
    /// Single size with m < 2s+1: keep users knowing `[1:alpha]`.
    Restrict { s: u8, alpha: u8 },
    /// Single size with m > 2s+1: min-MAIS is checked on the instance itself.
    Direct { s: u8 },
    /// Keep only the users of size `s`, then continue on that instance.
    Drop { s: u8, then: DropThen },
    /// Pad with dummy messages to a critical instance.
    Enhance(Enhancement),
}

/// Second step after dropping to a single size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropThen {
    Critical,
    Restrict { alpha: u8 },
    Direct,
}

fn single_route(m: u8, s: u8) -> ConverseRoute {
    let critical = 2 * s as u32 + 1;
    match (m as u32).cmp(&critical) {
        std::cmp::Ordering::Equal => ConverseRoute::Critical { s },
        std::cmp::Ordering::Less => ConverseRoute::Restrict {
            s,
            alpha: (critical - m as u32) as u8,
        },
        std::cmp::Ordering::Greater => ConverseRoute::Direct { s },
    }
}

/// Chooses the reduction for complete--`[s_min:s_max]` with `m` messages.
pub fn converse_route(m: u8, spec: SpecS) -> Result<ConverseRoute> {
    spec.validate(m)?;
    let (lo, hi) = (m / 2, m.div_ceil(2));
    if spec.s_min == spec.s_max {
        return Ok(single_route(m, spec.s_min));
    }
    let drop = |s: u8| {
        let then = match single_route(m, s) {
            ConverseRoute::Critical { .. } => DropThen::Critical,
            ConverseRoute::Restrict { alpha, .. } => DropThen::Restrict { alpha },
            _ => DropThen::Direct,
        };
        ConverseRoute::Drop { s, then }
    };
    if spec.s_max < hi {
        Ok(drop(spec.s_max))
    } else if spec.s_min >= lo {
        Ok(drop(spec.s_min))
    } else {
        Ok(ConverseRoute::Enhance(enhancement_params(m, spec)?))
    }
}

/// Applies a route, returning the instance to run min-MAIS on and the value
/// that min-MAIS must reach there.
fn reduce(inst: &Instance, route: ConverseRoute) -> Result<(Instance, usize)> {
    let single = |inst: &Instance, s: u8, step: DropThen| -> Result<(Instance, usize)> {
        match step {
            DropThen::Critical | DropThen::Direct => Ok((inst.clone(), s as usize + 1)),
            DropThen::Restrict { alpha } => {
                let child = restrict_fixed_prefix(inst, alpha)?;
                Ok((child, (s - alpha) as usize + 1))
            }
        }
    };
    match route {
        ConverseRoute::Critical { s } => single(inst, s, DropThen::Critical),
        ConverseRoute::Restrict { s, alpha } => single(inst, s, DropThen::Restrict { alpha }),
        ConverseRoute::Direct { s } => single(inst, s, DropThen::Direct),
        ConverseRoute::Drop { s, then } => single(&drop_to_single_s(inst, s)?, s, then),
        ConverseRoute::Enhance(_) => {
            let spec = inst
                .size_range()
                .ok_or_else(|| PicodError::domain("instance has no users"))?;
            let (child, p) = enhance_to_critical(inst, spec)?;
            Ok((child, p.target as usize + 1))
        }
    }
}

/// Min-MAIS of `inst` against `expected`, exhaustive within budget and
/// sampled otherwise. Exhaustive legs must match exactly; a sampled minimum
/// below `expected` is a counterexample, anything else passes as sampled.
pub(crate) fn min_mais_leg(
    inst: &Instance,
    expected: usize,
    budget: Budget,
    exec: Exec,
    report: &mut Report,
    prefix: &str,
) -> Result<()> {
    let space = AssignmentSpace::new(inst);
    let mode = if space.total() <= budget.max_evaluations {
        MinMaisMode::Exhaustive {
            budget: budget.max_evaluations,
        }
    } else if budget.samples > 0 {
        report.sampled();
        report.note(format!(
            "{prefix}: {} assignments exceed the exhaustive budget of {}; min-MAIS over {} seeded samples is an upper bound",
            space.total(),
            budget.max_evaluations,
            budget.samples
        ));
        MinMaisMode::Sampled {
            seed: budget.seed,
            samples: budget.samples,
        }
    } else {
        report.out_of_budget(format!(
            "{prefix}: {} assignments exceed the exhaustive budget",
            space.total()
        ));
        return Ok(());
    };
    let r = min_mais(inst, mode, exec)?;
    report.count(&format!("{prefix}.assignments"), r.evaluated);
    report
        .params
        .insert(format!("{prefix}.min_mais"), r.min.into());
    report
        .params
        .insert(format!("{prefix}.expected"), expected.into());
    let broken = if r.is_exhaustive() {
        r.min != expected
    } else {
        r.min < expected
    };
    if broken {
        report.fail(json!({
            "reason": "min-MAIS differs from the expected value",
            "instance": inst_json(inst),
            "assignment": r.witness,
            "mais": r.min,
            "expected": expected,
            "exhaustive": r.is_exhaustive(),
        }));
    }
    Ok(())
}

fn code_failure(inst: &Instance, code: &LinearCode, expected_len: usize, reason: &str) -> Value {
    json!({
        "reason": reason,
        "instance": inst_json(inst),
        "code": serde_json::to_value(code).expect("code serializes"),
        "expected_len": expected_len,
    })
}

/// Both schemes are valid and the better one has length `min(m - s_min, s_max + 1)`.
fn achievability_failure(m: u8, spec: SpecS) -> Result<Option<Value>> {
    let inst = build_consecutive(m, spec)?;
    let w = min_field_exponent(m as usize);
    let prefix = scheme_prefix(&inst, 1)?;
    let mds = scheme_mds(&inst, w)?;
    let best = best_scheme(&inst, 1, w)?;
    let expected = optimal_length(m, spec) as usize;
    for (code, len) in [
        (&prefix, spec.s_max as usize + 1),
        (&mds, (m - spec.s_min) as usize),
    ] {
        if code.len() != len || !is_valid(code, &inst)?.valid {
            return Ok(Some(code_failure(
                &inst,
                code,
                len,
                "scheme invalid or of the wrong length",
            )));
        }
    }
    if best.len() != expected {
        return Ok(Some(code_failure(
            &inst,
            &best,
            expected,
            "best scheme length differs from the optimum",
        )));
    }
    Ok(None)
}

/// Optimal length of complete--`[s_min:s_max]`: achievability by both
/// schemes, then the converse on the critical (or direct) instance the
/// reduction route leads to.
pub fn verify_theorem1(m: u8, spec: SpecS, budget: Budget, exec: Exec) -> Result<Report> {
    let started = std::time::Instant::now();
    let route = converse_route(m, spec)?;
    let value = optimal_length(m, spec) as usize;
    let mut report = Report::new(CheckId::Theorem)
        .param("m", m)
        .param("s_min", spec.s_min)
        .param("s_max", spec.s_max)
        .param("theorem_value", value as u64)
        .param(
            "route",
            serde_json::to_value(route).expect("route serializes"),
        )
        .param(
            "budget",
            budget.max_evaluations.min(u64::MAX as u128) as u64,
        )
        .param("seed", budget.seed);
    let inst = build_consecutive(m, spec)?;
    let w = min_field_exponent(m as usize);
    report.params.insert(
        "achievability".into(),
        best_scheme(&inst, 1, w)?.len().into(),
    );
    if let Some(w) = achievability_failure(m, spec)? {
        report.fail(w);
    }
    let (target, expected) = reduce(&inst, route)?;
    report
        .params
        .insert("converse_instance".into(), target.label().into());
    report
        .params
        .insert("converse_critical".into(), target.is_critical().into());
    if expected != value {
        report.fail(json!({"reason": "reduction bound differs from the theorem value", "route": route, "bound": expected, "theorem_value": value}));
    }
    min_mais_leg(&target, expected, budget, exec, &mut report, "converse")?;
    report.note("min-MAIS is reported on the reduced instance, never on the original one");
    Ok(report.finish(started))
}

/// Achievability for every `(m, s_min, s_max)` with `m` in `ms`.
pub fn verify_achievability(ms: RangeInclusive<u8>, exec: Exec) -> Result<Report> {
    if *ms.start() < 1 || *ms.end() > 16 {
        return Err(PicodError::domain(
            "achievability sweep supports 1 <= m <= 16",
        ));
    }
    let cases: Vec<(u8, SpecS)> = ms
        .clone()
        .flat_map(|m| (0..m).flat_map(move |a| (a..m).map(move |b| (m, SpecS::new(a, b)))))
        .collect();
    let clock = Clock::new(None);
    let mut report = Report::new(CheckId::Achievability)
        .param("m_min", *ms.start())
        .param("m_max", *ms.end());
    let outcome = sweep(exec, cases.len(), &clock, |i, c| {
        let (m, spec) = cases[i];
        c[0] += 1;
        match achievability_failure(m, spec) {
            Ok(w) => w,
            Err(e) => Some(
                json!({"reason": e.to_string(), "m": m, "s_min": spec.s_min, "s_max": spec.s_max}),
            ),
        }
    });
    report.count("configurations", outcome.counters[0]);
    if let Some((_, w)) = outcome.failure {
        report.fail(w);
    }
    Ok(report.finish(clock.started()))
}

/// The single-size reductions for complete--{s} with `m` messages.
///
/// For `m < 2s+1` the restricted instance must be critical and every scheme
/// valid for the parent must stay valid on it after deleting the first
/// `alpha` columns. For `m >= 2s+1` min-MAIS must be `s+1 > s`.
pub fn verify_reductions(m: u8, s: u8, budget: Budget, exec: Exec) -> Result<Report> {
    let started = std::time::Instant::now();
    let spec = SpecS::single(s);
    spec.validate(m)?;
    let inst = build_complete_s(m, &spec.sizes())?;
    let route = single_route(m, s);
    let mut report = Report::new(CheckId::Reductions)
        .param("m", m)
        .param("s", s)
        .param(
            "route",
            serde_json::to_value(route).expect("route serializes"),
        );
    match route {
        ConverseRoute::Restrict { alpha, .. } => {
            let child = restrict_fixed_prefix(&inst, alpha)?;
            report.params.insert("child".into(), child.label().into());
            if !child.is_critical()
                || child.sizes().into_iter().collect::<Vec<_>>() != vec![s - alpha]
            {
                report.fail(json!({"reason": "restricted instance is not critical", "instance": inst_json(&child), "alpha": alpha}));
            }
            let w = min_field_exponent(m as usize);
            let keep: Vec<usize> = (alpha as usize..m as usize).collect();
            for parent in [scheme_prefix(&inst, 1)?, scheme_mds(&inst, w)?] {
                if !is_valid(&parent, &inst)?.valid {
                    report.fail(code_failure(
                        &inst,
                        &parent,
                        parent.len(),
                        "parent scheme invalid",
                    ));
                    continue;
                }
                let restricted = LinearCode::new(parent.scheme, parent.gen.select_columns(&keep));
                report.count("restricted_codes", 1);
                if !is_valid(&restricted, &child)?.valid {
                    report.fail(code_failure(
                        &child,
                        &restricted,
                        restricted.len(),
                        "restricted code invalid on the child",
                    ));
                }
            }
            min_mais_leg(
                &child,
                (s - alpha) as usize + 1,
                budget,
                exec,
                &mut report,
                "child",
            )?;
        }
        ConverseRoute::Critical { .. } | ConverseRoute::Direct { .. } => {
            min_mais_leg(&inst, s as usize + 1, budget, exec, &mut report, "instance")?;
        }
        _ => unreachable!("single size"),
    }
    Ok(report.finish(started))
}

fn pad_columns(gen: &Matrix, cols: usize) -> Matrix {
    let mut out = Matrix::zeros(gen.w(), gen.rows(), cols).expect("valid field");
    for r in 0..gen.rows() {
        for c in 0..gen.cols() {
            out.set(r, c, gen.get(r, c));
        }
    }
    out
}

/// Every `(m, s_min, s_max)` with `m <= max_m` meeting the enhancement
/// condition: the enhanced instance is critical with `m' = 2*target + 1`,
/// `target + 1` equals the optimal length, and the original best code padded
/// with zero columns stays valid on it.
pub fn verify_enhancement(max_m: u8, exec: Exec) -> Result<Report> {
    if max_m > 12 {
        return Err(PicodError::domain("enhancement sweep supports m <= 12"));
    }
    let cases: Vec<(u8, SpecS)> = (1..=max_m)
        .flat_map(|m| (0..m).flat_map(move |a| (a..m).map(move |b| (m, SpecS::new(a, b)))))
        .filter(|&(m, spec)| enhancement_params(m, spec).is_ok())
        .collect();
    let clock = Clock::new(None);
    let mut report = Report::new(CheckId::Enhancement).param("max_m", max_m);
    let outcome = sweep(exec, cases.len(), &clock, |i, c| {
        let (m, spec) = cases[i];
        c[0] += 1;
        let check = || -> Result<Option<Value>> {
            let inst = build_consecutive(m, spec)?;
            let (big, p) = enhance_to_critical(&inst, spec)?;
            let value = optimal_length(m, spec) as usize;
            if !big.is_critical()
                || p.m_prime as u32 != 2 * p.target as u32 + 1
                || p.target as usize + 1 != value
            {
                return Ok(Some(
                    json!({"reason": "enhanced instance is not critical at the theorem value", "m": m, "s_min": spec.s_min, "s_max": spec.s_max, "enhancement": p}),
                ));
            }
            let code = best_scheme(&inst, 1, min_field_exponent(m as usize))?;
            let padded = LinearCode::new(code.scheme, pad_columns(&code.gen, p.m_prime as usize));
            if !is_valid(&padded, &big)?.valid {
                return Ok(Some(code_failure(
                    &big,
                    &padded,
                    padded.len(),
                    "padded code invalid on the enhanced instance",
                )));
            }
            Ok(None)
        };
        check().unwrap_or_else(|e| {
            Some(json!({"reason": e.to_string(), "m": m, "s_min": spec.s_min, "s_max": spec.s_max}))
        })
    });
    report.count("configurations", outcome.counters[0]);
    if let Some((_, w)) = outcome.failure {
        report.fail(w);
    }
    Ok(report.finish(clock.started()))
}

/// No valid code of length `ell` exists over GF(2^w) for complete--{s}.
pub fn verify_shorter_code(
    m: u8,
    s: u8,
    ell: usize,
    w: u8,
    budget: Budget,
    exec: Exec,
) -> Result<Report> {
    let started = std::time::Instant::now();
    let spec = SpecS::single(s);
    let inst = build_complete_s(m, &spec.sizes())?;
    let value = optimal_length(m, spec) as usize;
    let mut report = Report::new(CheckId::Search)
        .param("m", m)
        .param("s", s)
        .param("ell", ell as u64)
        .param("w", w)
        .param("theorem_value", value as u64);
    if ell >= value {
        report.note(format!(
            "ell={ell} is not below the optimal length {value}; a valid code is expected to exist"
        ));
    }
    let outcome = search_linear_codes(
        &inst,
        ell,
        w,
        SearchMode::Exhaustive {
            budget: budget.max_evaluations,
        },
        exec,
    )?;
    match outcome {
        SearchOutcome::NoneExists { scanned } => {
            report.count("row_spaces", scanned.min(u64::MAX as u128) as u64)
        }
        SearchOutcome::Found {
            code,
            index,
            scanned,
        } => {
            report.count("row_spaces", scanned.min(u64::MAX as u128) as u64);
            report.fail(json!({
                "reason": "valid shorter code found",
                "instance": inst_json(&inst),
                "code": serde_json::to_value(&code).expect("code serializes"),
                "index": index.to_string(),
            }));
        }
        SearchOutcome::Budget { required, budget } => report.out_of_budget(format!(
            "{required} row spaces exceed the exhaustive budget of {budget}"
        )),
        SearchOutcome::NotFoundInSamples { .. } => unreachable!("exhaustive mode"),
    }
    Ok(report.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{Mode, Verdict};

    #[test]
    fn routes() {
        assert_eq!(
            converse_route(3, SpecS::single(1)).unwrap(),
            ConverseRoute::Critical { s: 1 }
        );
        assert_eq!(
            converse_route(4, SpecS::single(2)).unwrap(),
            ConverseRoute::Restrict { s: 2, alpha: 1 }
        );
        assert_eq!(
            converse_route(5, SpecS::single(1)).unwrap(),
            ConverseRoute::Direct { s: 1 }
        );
        assert_eq!(
            converse_route(7, SpecS::new(0, 2)).unwrap(),
            ConverseRoute::Drop {
                s: 2,
                then: DropThen::Direct
            }
        );
        assert_eq!(
            converse_route(5, SpecS::new(3, 4)).unwrap(),
            ConverseRoute::Drop {
                s: 3,
                then: DropThen::Restrict { alpha: 2 }
            }
        );
        let ConverseRoute::Enhance(p) = converse_route(5, SpecS::new(1, 3)).unwrap() else {
            panic!()
        };
        assert_eq!((p.m_prime, p.target), (7, 3));
    }

    #[test]
    fn theorem_examples() {
        let r = verify_theorem1(3, SpecS::single(1), Budget::default(), Exec::Parallel).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Pass, Mode::Exhaustive));
        assert_eq!(r.params["achievability"], 2);
        assert_eq!(r.params["converse.min_mais"], 2);
        let r = verify_theorem1(5, SpecS::single(2), Budget::default(), Exec::Parallel).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Pass, Mode::Exhaustive));
        assert_eq!(r.params["converse.min_mais"], 3);
        let budget = Budget {
            samples: 200,
            ..Budget::default()
        };
        let r = verify_theorem1(5, SpecS::new(1, 3), budget, Exec::Parallel).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Pass, Mode::Sampled));
        assert_eq!(r.params["achievability"], 4);
        assert_eq!(r.params["converse_critical"], true);
    }

    #[test]
    fn theorem_budget_verdict() {
        let budget = Budget {
            samples: 0,
            ..Budget::default()
        };
        let r = verify_theorem1(7, SpecS::single(3), budget, Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Budget);
    }

    #[test]
    fn reductions_examples() {
        for (m, s) in [(4, 2), (5, 3), (6, 4), (4, 1), (5, 1), (6, 1)] {
            let r = verify_reductions(m, s, Budget::default(), Exec::Parallel).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "m={m} s={s}: {:?}", r.witness);
        }
        let r = verify_reductions(4, 1, Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(r.counters["instance.assignments"], 81);
        assert_eq!(r.params["instance.min_mais"], 2);
        let r = verify_reductions(4, 2, Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(r.counters["restricted_codes"], 2);
    }

    #[test]
    fn achievability_and_enhancement() {
        assert!(verify_achievability(3..=6, Exec::Parallel)
            .unwrap()
            .passed());
        let r = verify_enhancement(6, Exec::Parallel).unwrap();
        assert!(r.passed(), "{:?}", r.witness);
        assert!(r.counters["configurations"] > 0);
    }

    #[test]
    fn shorter_code_examples() {
        let r = verify_shorter_code(3, 1, 1, 1, Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.counters["row_spaces"], 8);
        let r = verify_shorter_code(3, 1, 2, 1, Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(crate::verify::recheck::recheck(&r).unwrap());
    }
}
