//! Desk-scale acceptance battery: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use picod::verify::{suite, Budget, CheckId, Mode, Report, Verdict};
use picod::Exec;

struct Criterion {
    id: u8,
    title: &'static str,
    limit: Duration,
    expect: fn(&[Report]) -> Result<String, String>,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn find<'a>(
    reports: &'a [Report],
    id: CheckId,
    key: &str,
    value: u64,
) -> Result<&'a Report, String> {
    reports
        .iter()
        .find(|r| r.check_id == id && r.params.get(key).and_then(|v| v.as_u64()) == Some(value))
        .ok_or_else(|| format!("no {} report with {key}={value}", id.as_str()))
}

fn exact(r: &Report) -> Result<(), String> {
    if r.verdict != Verdict::Pass {
        return Err(format!(
            "{} verdict {:?}, witness {:?}",
            r.check_id.as_str(),
            r.verdict,
            r.witness
        ));
    }
    if r.mode != Mode::Exhaustive {
        return Err(format!("{} was not exhaustive", r.check_id.as_str()));
    }
    Ok(())
}

fn counter(r: &Report, key: &str) -> u64 {
    r.counters.get(key).copied().unwrap_or(0)
}

fn param(r: &Report, key: &str) -> Option<u64> {
    r.params.get(key).and_then(|v| v.as_u64())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1(rs: &[Report]) -> Result<String, String> {
    let r = &rs[0];
    exact(r)?;
    // sum over m = 3..=8 of m(m+1)/2 pairs 0 <= s_min <= s_max <= m-1
    ensure(counter(r, "configurations") == 116, || {
        format!("{} configurations", counter(r, "configurations"))
    })?;
    Ok("116 configurations, both schemes valid, best length optimal".into())
}

fn c2(rs: &[Report]) -> Result<String, String> {
    let t = find(rs, CheckId::Theorem, "m", 3)?;
    exact(t)?;
    ensure(param(t, "converse.min_mais") == Some(2), || {
        "min-MAIS is not 2".into()
    })?;
    ensure(counter(t, "converse.assignments") == 8, || {
        "not 8 assignments".into()
    })?;
    let c = find(rs, CheckId::Claim1, "s", 1)?;
    exact(c)?;
    ensure(counter(c, "full_decoder_witnesses") == 8, || {
        "some assignment has no full decoder".into()
    })?;
    Ok("min-MAIS 2 over 8 assignments, full decoder in all 8".into())
}

fn c3(rs: &[Report]) -> Result<String, String> {
    let t = find(rs, CheckId::Theorem, "m", 5)?;
    exact(t)?;
    ensure(param(t, "converse.min_mais") == Some(3), || {
        "min-MAIS is not 3".into()
    })?;
    ensure(counter(t, "converse.assignments") == 59_049, || {
        "not 3^10 assignments".into()
    })?;
    Ok("min-MAIS 3 over 59049 assignments".into())
}

fn c4(rs: &[Report]) -> Result<String, String> {
    for (s, n) in [(1, 8), (2, 59_049)] {
        let r = find(rs, CheckId::Claim1, "s", s)?;
        exact(r)?;
        ensure(counter(r, "assignments") == n, || {
            format!("s={s}: {} assignments", counter(r, "assignments"))
        })?;
        ensure(
            counter(r, "mais_full") == counter(r, "full_decoder_witnesses"),
            || format!("s={s}: counts differ"),
        )?;
    }
    Ok("equivalence on 8 + 59049 assignments".into())
}

fn c5(rs: &[Report]) -> Result<String, String> {
    let one = find(rs, CheckId::Claim2, "s", 1)?;
    exact(one)?;
    ensure(counter(one, "adjacent_pairs") == 12, || {
        "s=1 should have 12 adjacent pairs".into()
    })?;
    let two = find(rs, CheckId::Claim2, "s", 2)?;
    ensure(two.verdict == Verdict::Pass, || {
        format!("s=2 verdict {:?}, witness {:?}", two.verdict, two.witness)
    })?;
    ensure(counter(two, "sampled_pairs") >= 10_000, || {
        "fewer than 10^4 sampled pairs".into()
    })?;
    ensure(param(two, "baseline_mais") == Some(3), || {
        "D1 baseline is not 3".into()
    })?;
    Ok(format!(
        "12 exhaustive pairs (s=1); {} seeded pairs and {} walks (s=2), D1 baseline 3",
        counter(two, "sampled_pairs"),
        counter(two, "walks")
    ))
}

fn c6(rs: &[Report]) -> Result<String, String> {
    let mut scanned = 0;
    for (s, n) in [(1, 8), (2, 59_049)] {
        let r = find(rs, CheckId::Claim3, "s", s)?;
        exact(r)?;
        ensure(counter(r, "assignments") == n, || {
            format!("s={s}: {} assignments", counter(r, "assignments"))
        })?;
        scanned += counter(r, "intersections_checked");
    }
    Ok(format!(
        "{scanned} cover intersections with |P| <= s+1 checked"
    ))
}

fn c7(rs: &[Report]) -> Result<String, String> {
    for (s, n) in [(1u64, 4u64), (2, 64), (3, 4096), (4, 1_048_576)] {
        let r = find(rs, CheckId::Claim4, "s", s)?;
        exact(r)?;
        ensure(counter(r, "tuples") == n, || {
            format!("s={s}: {} tuples", counter(r, "tuples"))
        })?;
    }
    Ok("all (2^s)^(s+1) tuples for s = 1..4".into())
}

fn c8(rs: &[Report]) -> Result<String, String> {
    let mut inverted = 0;
    for r in rs.iter().filter(|r| r.mode == Mode::Exhaustive) {
        exact(r)?;
        inverted += counter(r, "inverted_ratio_counterexamples");
    }
    ensure(
        rs.iter().filter(|r| r.mode == Mode::Exhaustive).count() == 12,
        || "missing shapes".into(),
    )?;
    let big = find(rs, CheckId::Lemma1, "rows", 8)?;
    ensure(big.verdict == Verdict::Pass, || {
        format!("8x8 witness {:?}", big.witness)
    })?;
    ensure(counter(big, "matrices") == 100_000, || {
        "not 10^5 samples".into()
    })?;
    Ok(format!(
        "all shapes up to 4x3 and 10^5 8x8 samples (colOnes/rowOnes >= n/m); inverted ratio refuted on {inverted} small matrices"
    ))
}

fn c9(rs: &[Report]) -> Result<String, String> {
    let a = find(rs, CheckId::Search, "m", 3)?;
    let b = find(rs, CheckId::Search, "m", 5)?;
    exact(a)?;
    exact(b)?;
    ensure(
        counter(a, "row_spaces") == 8 && counter(b, "row_spaces") == 187,
        || "unexpected row-space counts".into(),
    )?;
    Ok("no length-1 code (8 row spaces), no length-2 code (187 row spaces)".into())
}

fn c10(rs: &[Report]) -> Result<String, String> {
    for m in [4, 5, 6] {
        let r = rs
            .iter()
            .find(|r| {
                r.check_id == CheckId::Reductions
                    && param(r, "m") == Some(m)
                    && param(r, "s") == Some(m - 2)
            })
            .ok_or("missing restrict report")?;
        exact(r)?;
        ensure(
            r.params["child"]
                .as_str()
                .is_some_and(|l| l.contains("restrict")),
            || "no child".into(),
        )?;
        let r = rs
            .iter()
            .find(|r| {
                r.check_id == CheckId::Reductions
                    && param(r, "m") == Some(m)
                    && param(r, "s") == Some(1)
            })
            .ok_or("missing m>2s+1 report")?;
        exact(r)?;
        ensure(param(r, "instance.min_mais") == Some(2), || {
            format!("m={m}: min-MAIS not 2")
        })?;
    }
    let e = rs
        .iter()
        .find(|r| r.check_id == CheckId::Enhancement)
        .ok_or("missing enhancement")?;
    exact(e)?;
    Ok(format!(
        "restrictions critical, min-MAIS 2 for m=4,5,6, {} enhancement configurations critical",
        counter(e, "configurations")
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            title: "achievability, 3 <= m <= 8",
            limit: secs(30),
            expect: c1,
        },
        Criterion {
            id: 2,
            title: "critical converse s=1",
            limit: secs(1),
            expect: c2,
        },
        Criterion {
            id: 3,
            title: "critical converse s=2",
            limit: secs(120),
            expect: c3,
        },
        Criterion {
            id: 4,
            title: "claim 1 equivalence s=1,2",
            limit: secs(120),
            expect: c4,
        },
        Criterion {
            id: 5,
            title: "claim 2 step bound",
            limit: secs(60),
            expect: c5,
        },
        Criterion {
            id: 6,
            title: "claim 3 closure-intersection s=1,2",
            limit: secs(300),
            expect: c6,
        },
        Criterion {
            id: 7,
            title: "claim 4 s=1..4",
            limit: secs(60),
            expect: c7,
        },
        Criterion {
            id: 8,
            title: "lemma 1",
            limit: secs(60),
            expect: c8,
        },
        Criterion {
            id: 9,
            title: "shorter-code impossibility",
            limit: secs(120),
            expect: c9,
        },
        Criterion {
            id: 10,
            title: "reductions and enhancement",
            limit: secs(60),
            expect: c10,
        },
    ];
    let budget = Budget::default().unlimited_time();
    let exec = Exec::Parallel;
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = suite::criterion(c.id, budget, exec)
            .map_err(|e| e.to_string())
            .and_then(|rs| (c.expect)(&rs));
        let elapsed = started.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.1?}, limit {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS ({:>8.2?}) {}: {detail}",
                c.id, elapsed, c.title
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL ({:>8.2?}) {}: {why}",
                    c.id, elapsed, c.title
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
