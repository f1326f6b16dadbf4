//! Independent re-validation of `fail` witnesses.
//!
//! The re-checker only trusts the instance, assignment and code in the
//! witness. MAIS is recomputed by trying every choice of at most one user per
//! message with an explicit cycle search, and decodability by comparing ranks
//! of stacked matrices.

use serde_json::Value;

use super::{CheckId, Report, Verdict};
use crate::assignment::Assignment;
use crate::codes::LinearCode;
use crate::error::{PicodError, Result};
use crate::galois::Matrix;
use crate::instance::{bit, full_mask, members, Instance};

fn field<'a>(w: &'a Value, key: &str) -> Result<&'a Value> {
    w.get(key)
        .ok_or_else(|| PicodError::domain(format!("witness has no `{key}`")))
}

fn parse<T: serde::de::DeserializeOwned>(w: &Value, key: &str) -> Result<T> {
    serde_json::from_value(field(w, key)?.clone())
        .map_err(|e| PicodError::domain(format!("witness `{key}`: {e}")))
}

fn instance(w: &Value) -> Result<Instance> {
    Instance::from_json(&field(w, "instance")?.to_string())
}

fn mask(list: &[u8]) -> u64 {
    list.iter().fold(0, |acc, &x| acc | bit(x))
}

/// MAIS by exhaustive choice of one user (or none) per desired message.
pub fn brute_mais(inst: &Instance, d: &Assignment) -> usize {
    let image = members(d.image());
    let by_msg: Vec<Vec<usize>> = image
        .iter()
        .map(|&v| (0..inst.n()).filter(|&j| d.get(j) == v).collect())
        .collect();
    let mut best = 0;
    let mut chosen: Vec<(u8, u64)> = Vec::new();
    search(inst, &image, &by_msg, 0, &mut chosen, &mut best);
    best
}

fn search(
    inst: &Instance,
    image: &[u8],
    by_msg: &[Vec<usize>],
    k: usize,
    chosen: &mut Vec<(u8, u64)>,
    best: &mut usize,
) {
    if chosen.len() + (image.len() - k) <= *best {
        return;
    }
    if k == image.len() {
        if acyclic(chosen) {
            *best = chosen.len();
        }
        return;
    }
    for &j in &by_msg[k] {
        chosen.push((image[k], inst.user(j).mask()));
        search(inst, image, by_msg, k + 1, chosen, best);
        chosen.pop();
    }
    search(inst, image, by_msg, k + 1, chosen, best);
}

/// Arc `v -> u` when the user desiring `v` knows `u`; cycle search by colouring.
fn acyclic(chosen: &[(u8, u64)]) -> bool {
    fn visit(i: usize, chosen: &[(u8, u64)], colour: &mut [u8]) -> bool {
        colour[i] = 1;
        for k in 0..chosen.len() {
            if chosen[i].1 & bit(chosen[k].0) != 0
                && (colour[k] == 1 || (colour[k] == 0 && !visit(k, chosen, colour)))
            {
                return false;
            }
        }
        colour[i] = 2;
        true
    }
    let mut colour = vec![0u8; chosen.len()];
    (0..chosen.len()).all(|i| colour[i] != 0 || visit(i, chosen, &mut colour))
}

/// Whether `e_msg` lies in the row space of the code plus the known unit rows.
fn decodes(gen: &Matrix, known: u64, msg: u8) -> Result<bool> {
    let units: Vec<usize> = members(known).iter().map(|&x| x as usize - 1).collect();
    let base = gen.vstack(&Matrix::unit_rows(gen.w(), gen.cols(), &units)?)?;
    let with = base.vstack(&Matrix::unit_rows(
        gen.w(),
        gen.cols(),
        &[msg as usize - 1],
    )?)?;
    Ok(base.rank() == with.rank())
}

/// Valid iff every user decodes at least one message outside its side information.
pub fn rank_valid(code: &LinearCode, inst: &Instance) -> Result<bool> {
    for a in inst.users() {
        let mut any = false;
        for msg in members(full_mask(inst.m()) & !a.mask()) {
            if decodes(&code.gen, a.mask(), msg)? {
                any = true;
                break;
            }
        }
        if !any {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Naive cover: add desired messages of users inside the set until stable.
fn naive_cover(inst: &Instance, d: &Assignment, j: usize) -> u64 {
    let mut c = inst.user(j).mask() | bit(d.get(j));
    let mut grown = true;
    while grown {
        grown = false;
        for k in 0..inst.n() {
            if inst.user(k).mask() & !c == 0 && c & bit(d.get(k)) == 0 {
                c |= bit(d.get(k));
                grown = true;
            }
        }
    }
    c
}

/// Re-validates the witness of a `fail` report. `Ok(true)` means the witness
/// independently demonstrates the failure; `Ok(false)` means it does not.
/// Witnesses of internal consistency checks cannot be re-checked and error.
pub fn recheck(report: &Report) -> Result<bool> {
    if report.verdict != Verdict::Fail {
        return Err(PicodError::domain("only fail reports carry witnesses"));
    }
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| PicodError::domain("fail report without witness"))?;
    match report.check_id {
        CheckId::Claim1 => {
            let inst = instance(w)?;
            let d: Assignment = parse(w, "assignment")?;
            d.validate(&inst)?;
            let top = inst.sizes().into_iter().next().unwrap_or(0) as usize + 1;
            let full = full_mask(inst.m());
            let has_full = (0..inst.n()).any(|j| naive_cover(&inst, &d, j) == full);
            Ok((brute_mais(&inst, &d) == top) != has_full)
        }
        CheckId::Claim2 => {
            let inst = instance(w)?;
            if w.get("a").is_none() {
                let d: Assignment = parse(w, "assignment")?;
                let top = inst.sizes().into_iter().next().unwrap_or(0) as usize + 1;
                return Ok(brute_mais(&inst, &d) != top);
            }
            let (a, b): (Assignment, Assignment) = (parse(w, "a")?, parse(w, "b")?);
            a.validate(&inst)?;
            b.validate(&inst)?;
            let differing = a
                .desired
                .iter()
                .zip(&b.desired)
                .filter(|(x, y)| x != y)
                .count();
            Ok(differing == 1 && brute_mais(&inst, &a).abs_diff(brute_mais(&inst, &b)) > 1)
        }
        CheckId::Claim3 => recheck_claim3(w, report.params.contains_key("source")),
        CheckId::Claim4 => {
            let blocks: Vec<Vec<u8>> = parse(w, "blocks")?;
            let masks: Vec<u64> = blocks.iter().map(|b| mask(b)).collect();
            let n = masks.len();
            let found = (1usize..1 << n).any(|p| {
                let inter = (0..n)
                    .filter(|i| p >> i & 1 == 1)
                    .fold(u64::MAX, |acc, i| acc & masks[i]);
                inter.count_ones() as usize == p.count_ones() as usize - 1
            });
            Ok(!found)
        }
        CheckId::Lemma1 => {
            let rows: Vec<Vec<u8>> = parse(w, "rows")?;
            let (n, m) = (
                rows.len() as u64,
                rows.first().map_or(0, |r| r.len()) as u64,
            );
            if n == 0
                || m == 0
                || rows
                    .iter()
                    .any(|r| r.len() as u64 != m || r.iter().all(|&x| x == 0))
            {
                return Ok(false);
            }
            let col = |j: usize| rows.iter().filter(|r| r[j] == 1).count() as u64;
            let found = rows.iter().any(|r| {
                let ones = r.iter().filter(|&&x| x == 1).count() as u64;
                (0..m as usize).any(|j| r[j] == 1 && col(j) * m >= ones * n)
            });
            Ok(!found)
        }
        CheckId::Search => {
            let inst = instance(w)?;
            let code: LinearCode = parse(w, "code")?;
            let ell: u64 = report
                .params
                .get("ell")
                .and_then(Value::as_u64)
                .unwrap_or(u64::MAX);
            Ok(code.len() as u64 <= ell && rank_valid(&code, &inst)?)
        }
        CheckId::Theorem | CheckId::Reductions | CheckId::Achievability | CheckId::Enhancement => {
            if w.get("assignment").is_some() {
                let inst = instance(w)?;
                let d: Assignment = parse(w, "assignment")?;
                d.validate(&inst)?;
                let expected: usize = parse(w, "expected")?;
                let claimed: usize = parse(w, "mais")?;
                let actual = brute_mais(&inst, &d);
                let exhaustive = w
                    .get("exhaustive")
                    .and_then(Value::as_bool)
                    .unwrap_or(false);
                Ok(actual == claimed && (actual < expected || (exhaustive && actual != expected)))
            } else if w.get("code").is_some() {
                let inst = instance(w)?;
                let code: LinearCode = parse(w, "code")?;
                let expected: usize = parse(w, "expected_len")?;
                Ok(code.len() != expected || !rank_valid(&code, &inst)?)
            } else {
                Err(PicodError::domain(
                    "witness records an internal consistency failure and cannot be re-checked",
                ))
            }
        }
    }
}

fn recheck_claim3(w: &Value, supplied: bool) -> Result<bool> {
    let inst = instance(w)?;
    let d: Assignment = parse(w, "assignment")?;
    d.validate(&inst)?;
    let lists: Vec<Vec<u8>> = parse(w, "covers")?;
    let covers: Vec<u64> = lists.iter().map(|c| mask(c)).collect();
    // Covers reported by a sweep must be the real ones.
    if !supplied && w.get("P").is_none() {
        let real: Vec<u64> = (0..inst.n()).map(|j| naive_cover(&inst, &d, j)).collect();
        if real != covers {
            return Ok(false);
        }
    }
    if let Some(v) = w.get("violation") {
        let users: Vec<usize> = parse(v, "users")?;
        let k: usize = parse(v, "mimicked")?;
        if users.is_empty() || k >= inst.n() || users.iter().any(|&u| u >= covers.len()) {
            return Ok(false);
        }
        let inter = users.iter().fold(u64::MAX, |acc, &u| acc & covers[u]);
        let a = inst.user(k).mask();
        return Ok(a & !inter == 0 && (inter & bit(d.get(k)) == 0 || a == inter));
    }
    if let (Some(_), Some(_)) = (w.get("cover_user"), w.get("mimicked")) {
        let (j, k): (usize, usize) = (parse(w, "cover_user")?, parse(w, "mimicked")?);
        if j >= covers.len() || k >= inst.n() {
            return Ok(false);
        }
        return Ok(inst.user(k).mask() & !covers[j] == 0 && covers[j] & bit(d.get(k)) == 0);
    }
    let p: Vec<u8> = parse(w, "P")?;
    let blocks: Vec<Vec<u8>> = parse(w, "blocks")?;
    let inter = p.iter().fold(u64::MAX, |acc, &i| {
        acc & blocks.get(i as usize - 1).map_or(0, |b| mask(b))
    });
    Ok(!p.is_empty() && inter.count_ones() as usize + 1 == p.len())
}
