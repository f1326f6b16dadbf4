//! Set-system and binary-matrix checks that do not involve an instance.

use rand::Rng;
use serde_json::json;

use super::{sweep, Budget, CheckId, Clock, Report};
use crate::assignment::sample_rng;
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::instance::members;

/// Smallest nonempty `P ⊆ [s+1]` (as a bitmask over tuple positions) with
/// `|∩_{i∈P} B_i| = |P| - 1`, if any.
pub fn check_claim4_tuple(blocks: &[u64]) -> Option<u32> {
    let n = blocks.len() as u32;
    (1u32..1 << n).find(|&p| {
        let inter = (0..n)
            .filter(|i| p >> i & 1 == 1)
            .fold(u64::MAX, |acc, i| acc & blocks[i as usize]);
        inter.count_ones() + 1 == p.count_ones()
    })
}

fn claim4_tuple(index: u64, s: u8) -> Vec<u64> {
    let mask = (1u64 << s) - 1;
    (0..=s as u32)
        .map(|k| index >> (s as u32 * k) & mask)
        .collect()
}

/// Every `(s+1)`-tuple of subsets of `[s]` admits a `P` with `|∩ B_i| = |P| - 1`.
pub fn verify_claim4(s: u8, max_s: u8, exec: Exec) -> Result<Report> {
    if s == 0 || s > max_s {
        return Err(PicodError::domain(format!(
            "claim4 is enumerated for 1 <= s <= {max_s}, got s={s}"
        )));
    }
    let bits = s as u32 * (s as u32 + 1);
    if bits >= usize::BITS {
        return Err(PicodError::domain(format!(
            "claim4 with s={s} has too many tuples"
        )));
    }
    let clock = Clock::new(None);
    let mut report = Report::new(CheckId::Claim4)
        .param("s", s)
        .param("max_s", max_s);
    let outcome = sweep(exec, 1usize << bits, &clock, |i, c| {
        let blocks = claim4_tuple(i as u64, s);
        c[0] += 1;
        match check_claim4_tuple(&blocks) {
            Some(_) => {
                if blocks.contains(&0) {
                    c[1] += 1;
                }
                None
            }
            None => Some(json!({
                "reason": "no P with |∩ B_i| = |P| - 1",
                "blocks": blocks.iter().map(|&b| members(b)).collect::<Vec<_>>(),
            })),
        }
    });
    report.count("tuples", outcome.counters[0]);
    report.count("tuples_with_empty_block", outcome.counters[1]);
    if let Some((_, w)) = outcome.failure {
        report.fail(w);
    }
    Ok(report.finish(clock.started()))
}

/// A pair `(i, j)`, 0-based, with entry 1 and `colOnes(j) * cols >= rowOnes(i) * rows`,
/// that is `colOnes(j) / rowOnes(i) >= rows / cols`.
///
/// `rows[i]` holds row `i` as a bitmask over the `cols` columns. Ties pick the
/// smallest `i`, then the smallest `j`. This is the ratio the averaging
/// argument supports; [`inverted_lemma1_pair`] tests the inverted ratio.
pub fn lemma1_pair(rows: &[u64], cols: usize) -> Option<(usize, usize)> {
    find_pair(rows, cols, |row, col, n, m| col * m >= row * n)
}

/// Same search with `rowOnes(i) / colOnes(j) >= rows / cols`, the inverted
/// ratio. The `2 x 1` all-ones matrix has no such pair.
pub fn inverted_lemma1_pair(rows: &[u64], cols: usize) -> Option<(usize, usize)> {
    find_pair(rows, cols, |row, col, n, m| row * m >= col * n)
}

fn find_pair(
    rows: &[u64],
    cols: usize,
    ok: impl Fn(u64, u64, u64, u64) -> bool,
) -> Option<(usize, usize)> {
    let col_ones: Vec<u64> = (0..cols)
        .map(|j| rows.iter().filter(|&&r| r >> j & 1 == 1).count() as u64)
        .collect();
    let (n, m) = (rows.len() as u64, cols as u64);
    rows.iter().enumerate().find_map(|(i, &r)| {
        let row_ones = r.count_ones() as u64;
        (0..cols)
            .find(|&j| r >> j & 1 == 1 && ok(row_ones, col_ones[j], n, m))
            .map(|j| (i, j))
    })
}

/// Checks one matrix; rejects zero rows and entries outside the column range.
pub fn check_lemma1_matrix(rows: &[u64], cols: usize) -> Result<Option<(usize, usize)>> {
    if rows.is_empty() || cols == 0 || cols > 64 {
        return Err(PicodError::domain(format!(
            "lemma1 needs a nonempty matrix with at most 64 columns, got {}x{cols}",
            rows.len()
        )));
    }
    let valid = if cols == 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    };
    if let Some(i) = rows.iter().position(|&r| r == 0 || r & !valid != 0) {
        return Err(PicodError::domain(format!(
            "row {i} is zero or wider than {cols} columns"
        )));
    }
    Ok(lemma1_pair(rows, cols))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma1Mode {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

/// Every `rows x cols` binary matrix without zero rows has a Lemma 1 pair.
///
/// Matrices lacking a pair under the inverted ratio are counted separately.
pub fn verify_lemma1(
    rows: u8,
    cols: u8,
    mode: Lemma1Mode,
    budget: Budget,
    exec: Exec,
) -> Result<Report> {
    let (n, m) = (rows as usize, cols as usize);
    if n == 0 || m == 0 || m > 63 {
        return Err(PicodError::domain(format!(
            "lemma1 needs 1 <= rows and 1 <= cols <= 63, got {rows}x{cols}"
        )));
    }
    let clock = Clock::new(budget.time_limit);
    let mut report = Report::new(CheckId::Lemma1)
        .param("rows", rows)
        .param("cols", cols);
    let witness = |mat: &[u64]| {
        json!({
            "reason": "no pair (i,j) with entry 1 and colOnes/rowOnes >= rows/cols",
            "rows": mat.iter().map(|&r| (0..m).map(|j| (r >> j & 1) as u8).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    };
    let check = |mat: &[u64], c: &mut [u64; super::COUNTERS]| {
        if inverted_lemma1_pair(mat, m).is_none() {
            c[2] += 1;
        }
        lemma1_pair(mat, m).is_none().then(|| witness(mat))
    };
    let row_mask = (1u64 << m) - 1;
    let outcome = match mode {
        Lemma1Mode::Exhaustive => {
            let bits = n * m;
            let total = if bits < 128 { 1u128 << bits } else { u128::MAX };
            if total > budget.max_evaluations || bits >= usize::BITS as usize {
                report.out_of_budget(format!(
                    "2^{bits} matrices exceed the exhaustive budget of {}",
                    budget.max_evaluations
                ));
                return Ok(report.finish(clock.started()));
            }
            sweep(exec, total as usize, &clock, |idx, c| {
                let mat: Vec<u64> = (0..n).map(|i| (idx as u64) >> (i * m) & row_mask).collect();
                if mat.contains(&0) {
                    c[1] += 1;
                    return None;
                }
                c[0] += 1;
                check(&mat, c)
            })
        }
        Lemma1Mode::Sampled { seed, samples } => {
            report.sampled();
            report.params.insert("seed".into(), seed.into());
            sweep(exec, samples as usize, &clock, |idx, c| {
                let mut rng = sample_rng(seed, idx as u64);
                let mat: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=row_mask)).collect();
                c[0] += 1;
                check(&mat, c)
            })
        }
    };
    report.count("matrices", outcome.counters[0]);
    report.count("skipped_zero_row", outcome.counters[1]);
    report.count("inverted_ratio_counterexamples", outcome.counters[2]);
    if outcome.counters[2] > 0 {
        report.note("the inverted ratio rowOnes/colOnes >= rows/cols fails on some matrices; the verdict uses colOnes/rowOnes >= rows/cols");
    }
    if let Some((_, w)) = outcome.failure {
        report.fail(w);
    }
    if outcome.aborted {
        report.out_of_budget("time limit reached before the scan finished");
    }
    Ok(report.finish(clock.started()))
}
