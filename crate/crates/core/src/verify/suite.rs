//! The desk-scale battery: every check grouped by acceptance criterion.

use super::{
    verify_achievability, verify_claim1, verify_claim2, verify_claim3, verify_claim4,
    verify_enhancement, verify_lemma1, verify_reductions, verify_shorter_code, verify_theorem1,
    Budget, Lemma1Mode, Report,
};
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::instance::SpecS;

pub const CRITERIA: std::ops::RangeInclusive<u8> = 1..=10;

/// Seeded pairs and walks drawn for the sampled Claim 2 leg.
pub const CLAIM2_SAMPLES: u64 = 10_000;
/// Random 8x8 matrices drawn for the sampled Lemma 1 leg.
pub const LEMMA1_SAMPLES: u64 = 100_000;

/// Reports for one acceptance criterion, each tagged with a `criterion` param.
pub fn criterion(n: u8, budget: Budget, exec: Exec) -> Result<Vec<Report>> {
    let reports = match n {
        1 => vec![verify_achievability(3..=8, exec)?],
        2 => vec![
            verify_theorem1(3, SpecS::single(1), budget, exec)?,
            verify_claim1(1, budget, exec)?,
        ],
        3 => vec![verify_theorem1(5, SpecS::single(2), budget, exec)?],
        4 => vec![
            verify_claim1(1, budget, exec)?,
            verify_claim1(2, budget, exec)?,
        ],
        5 => {
            let sampled = Budget {
                max_evaluations: 0,
                samples: CLAIM2_SAMPLES,
                ..budget
            };
            vec![
                verify_claim2(1, budget, exec)?,
                verify_claim2(2, sampled, exec)?,
            ]
        }
        6 => vec![
            verify_claim3(1, budget, exec)?,
            verify_claim3(2, budget, exec)?,
        ],
        7 => (1..=4)
            .map(|s| verify_claim4(s, 4, exec))
            .collect::<Result<_>>()?,
        8 => {
            let mut out = Vec::new();
            for rows in 1..=4 {
                for cols in 1..=3 {
                    out.push(verify_lemma1(
                        rows,
                        cols,
                        Lemma1Mode::Exhaustive,
                        budget,
                        exec,
                    )?);
                }
            }
            let mode = Lemma1Mode::Sampled {
                seed: budget.seed,
                samples: LEMMA1_SAMPLES,
            };
            out.push(verify_lemma1(8, 8, mode, budget, exec)?);
            out
        }
        9 => vec![
            verify_shorter_code(3, 1, 1, 1, budget, exec)?,
            verify_shorter_code(5, 2, 2, 1, budget, exec)?,
        ],
        10 => {
            let mut out: Vec<Report> = [(4, 2), (5, 3), (6, 4), (4, 1), (5, 1), (6, 1)]
                .into_iter()
                .map(|(m, s)| verify_reductions(m, s, budget, exec))
                .collect::<Result<_>>()?;
            out.push(verify_enhancement(8, exec)?);
            out
        }
        _ => return Err(PicodError::domain(format!("no acceptance criterion {n}"))),
    };
    Ok(reports
        .into_iter()
        .map(|r| r.param("criterion", n))
        .collect())
}

/// Every criterion in order.
pub fn desk_suite(budget: Budget, exec: Exec) -> Result<Vec<Report>> {
    let mut all = Vec::new();
    for n in CRITERIA {
        all.extend(criterion(n, budget, exec)?);
    }
    Ok(all)
}

pub const CSV_HEADER: [&str; 7] = [
    "check_id",
    "params",
    "verdict",
    "mode",
    "counters",
    "witness",
    "elapsed_ms",
];

/// One summary row; nested maps are embedded as compact JSON.
pub fn csv_record(report: &Report) -> [String; 7] {
    [
        report.check_id.as_str().to_owned(),
        serde_json::to_string(&report.params).expect("params serialize"),
        serde_json::to_value(report.verdict)
            .expect("verdict")
            .as_str()
            .unwrap_or_default()
            .to_owned(),
        serde_json::to_value(report.mode)
            .expect("mode")
            .as_str()
            .unwrap_or_default()
            .to_owned(),
        serde_json::to_string(&report.counters).expect("counters serialize"),
        report
            .witness
            .as_ref()
            .map(|w| w.to_string())
            .unwrap_or_default(),
        format!("{:.3}", report.elapsed_ms),
    ]
}
