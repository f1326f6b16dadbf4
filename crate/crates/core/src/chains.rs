//! Decoding chains for a fixed choice of desired messages.
//!
//! Once user `j` knows `A_j ∪ {d_j}` it can mimic any user `k` whose side
//! information it already holds and thereby learn `d_k`. Repeating until
//! nothing changes gives the cover `C_j`; the decoded block is `B_j = C_j \ A_j`.

use serde::Serialize;

use crate::assignment::Assignment;
use crate::decode::mask_as_list;
use crate::error::{PicodError, Result};
use crate::instance::{bit, full_mask, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverSet {
    pub user: usize,
    #[serde(rename = "C", serialize_with = "mask_as_list")]
    pub cover: u64,
    #[serde(rename = "B", serialize_with = "mask_as_list")]
    pub block: u64,
}

/// Cover of user `j` together with the users it mimicked, in the order their
/// desired messages were added. The trace starts with `j` itself.
pub fn mimic_trace(inst: &Instance, d: &Assignment, j: usize) -> (CoverSet, Vec<usize>) {
    let side = inst.user(j).mask();
    let mut cover = side | bit(d.get(j));
    let mut trace = vec![j];
    loop {
        let mut changed = false;
        for (k, a) in inst.users().iter().enumerate() {
            let dk = bit(d.get(k));
            if a.is_subset_of(cover) && cover & dk == 0 {
                cover |= dk;
                trace.push(k);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (
        CoverSet {
            user: j,
            cover,
            block: cover & !side,
        },
        trace,
    )
}

/// Closure mask only; the hot path of the exhaustive sweeps.
#[inline]
pub fn closure_mask(inst: &Instance, d: &Assignment, j: usize) -> u64 {
    let mut cover = inst.user(j).mask() | bit(d.get(j));
    loop {
        let before = cover;
        for (a, &dk) in inst.users().iter().zip(&d.desired) {
            if a.is_subset_of(cover) {
                cover |= bit(dk);
            }
        }
        if cover == before {
            return cover;
        }
    }
}

pub fn mimic_closure(inst: &Instance, d: &Assignment, j: usize) -> CoverSet {
    mimic_trace(inst, d, j).0
}

/// Covers of every user, in user order.
pub fn all_covers(inst: &Instance, d: &Assignment) -> Vec<CoverSet> {
    (0..inst.n())
        .map(|j| {
            let cover = closure_mask(inst, d, j);
            CoverSet {
                user: j,
                cover,
                block: cover & !inst.user(j).mask(),
            }
        })
        .collect()
}

/// Whether some user's cover is all of `[1:m]`. Only defined for the critical case.
pub fn exists_full_decoder(inst: &Instance, d: &Assignment) -> Result<bool> {
    Ok(full_decoder(inst, d)?.is_some())
}

/// First user whose cover is `[1:m]`, if any. Only defined for the critical case.
pub fn full_decoder(inst: &Instance, d: &Assignment) -> Result<Option<usize>> {
    if !inst.is_critical() {
        return Err(PicodError::domain(
            "full-decoder test needs a critical complete--{s} instance with m = 2s+1",
        ));
    }
    let all = full_mask(inst.m());
    Ok((0..inst.n()).find(|&j| closure_mask(inst, d, j) == all))
}

/// Checks that each cover is closed: every user whose side information lies
/// inside it has its desired message inside it too. Returns a violating
/// `(cover user, mimicked user)` pair.
pub fn closure_violation(
    inst: &Instance,
    d: &Assignment,
    covers: &[u64],
) -> Option<(usize, usize)> {
    covers.iter().enumerate().find_map(|(j, &c)| {
        inst.users()
            .iter()
            .zip(&d.desired)
            .position(|(a, &dk)| a.is_subset_of(c) && c & bit(dk) == 0)
            .map(|k| (j, k))
    })
}

/// A subset of covers whose intersection breaks the closure-intersection invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionViolation {
    /// Users whose covers are intersected.
    pub users: Vec<usize>,
    #[serde(serialize_with = "mask_as_list")]
    pub intersection: u64,
    /// User `k` with `A_k` inside the intersection.
    pub mimicked: usize,
    /// True when the intersection equals `A_k` exactly.
    pub equals_side_info: bool,
}

/// Scans every nonempty set `P` of at most `max_p` covers. For every user `k`
/// with `A_k ⊆ ∩_{i∈P} C_i` it requires `d_k ∈ ∩ C_i`, and it requires that the
/// intersection never equals any `A_k`. Returns the first violation in
/// lexicographic order of `P`, plus the number of subsets examined.
pub fn intersection_violation(
    inst: &Instance,
    d: &Assignment,
    covers: &[u64],
    max_p: usize,
) -> (Option<IntersectionViolation>, u64) {
    let mut scanned = 0u64;
    let mut chosen = Vec::with_capacity(max_p);
    let found = scan_subsets(
        inst,
        d,
        covers,
        max_p,
        0,
        u64::MAX,
        &mut chosen,
        &mut scanned,
    );
    (found, scanned)
}

#[allow(clippy::too_many_arguments)]
fn scan_subsets(
    inst: &Instance,
    d: &Assignment,
    covers: &[u64],
    max_p: usize,
    start: usize,
    acc: u64,
    chosen: &mut Vec<usize>,
    scanned: &mut u64,
) -> Option<IntersectionViolation> {
    if chosen.len() == max_p {
        return None;
    }
    for i in start..covers.len() {
        let inter = acc & covers[i];
        chosen.push(i);
        *scanned += 1;
        for (k, (a, &dk)) in inst.users().iter().zip(&d.desired).enumerate() {
            if a.is_subset_of(inter) && (inter & bit(dk) == 0 || a.mask() == inter) {
                return Some(IntersectionViolation {
                    users: chosen.clone(),
                    intersection: inter,
                    mimicked: k,
                    equals_side_info: a.mask() == inter,
                });
            }
        }
        if let Some(v) = scan_subsets(inst, d, covers, max_p, i + 1, inter, chosen, scanned) {
            return Some(v);
        }
        chosen.pop();
    }
    None
}
