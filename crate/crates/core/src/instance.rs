//! PICOD instances: messages `1..=m` and a canonical list of users, each given
//! by its side-information set. Also the reductions used to move between
//! complete--S families.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PicodError, Result};

/// Largest supported number of messages (side information is a `u64` bitmask).
pub const MAX_MESSAGES: u8 = 63;

/// Bit for message `msg` (1-based).
#[inline]
pub fn bit(msg: u8) -> u64 {
    1u64 << (msg - 1)
}

/// All messages `1..=m` as a mask.
#[inline]
pub fn full_mask(m: u8) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// Messages in `mask`, ascending.
pub fn members(mask: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros() as u8 + 1);
        rest &= rest - 1;
    }
    out
}

/// Set of message indices a user already knows.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SideInfo(u64);

impl SideInfo {
    pub const EMPTY: SideInfo = SideInfo(0);

    pub fn from_mask(mask: u64) -> SideInfo {
        SideInfo(mask)
    }

    pub fn from_members(msgs: &[u8]) -> SideInfo {
        SideInfo(msgs.iter().fold(0, |acc, &x| acc | bit(x)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, msg: u8) -> bool {
        (1..=64).contains(&msg) && self.0 & bit(msg) != 0
    }

    pub fn is_subset_of(self, mask: u64) -> bool {
        self.0 & !mask == 0
    }

    pub fn members(self) -> Vec<u8> {
        members(self.0)
    }

    /// Canonical order: by size, then lexicographically over ascending members.
    pub fn canonical_cmp(&self, other: &SideInfo) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.members().cmp(&other.members()))
    }
}

impl fmt::Debug for SideInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.members().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Consecutive size range `[s_min : s_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecS {
    pub s_min: u8,
    pub s_max: u8,
}

impl SpecS {
    pub fn new(s_min: u8, s_max: u8) -> SpecS {
        SpecS { s_min, s_max }
    }

    pub fn single(s: u8) -> SpecS {
        SpecS { s_min: s, s_max: s }
    }

    pub fn validate(self, m: u8) -> Result<()> {
        if self.s_min > self.s_max || m == 0 || self.s_max > m - 1 {
            return Err(PicodError::domain(format!(
                "need 0 <= s_min <= s_max <= m-1, got s_min={}, s_max={}, m={m}",
                self.s_min, self.s_max
            )));
        }
        Ok(())
    }

    pub fn sizes(self) -> BTreeSet<u8> {
        (self.s_min..=self.s_max).collect()
    }
}

/// A PICOD instance with users stored in canonical order.
#[derive(Clone, PartialEq, Eq)]
pub struct Instance {
    m: u8,
    users: Vec<SideInfo>,
    label: String,
}

impl Instance {
    /// Validates and canonicalizes. Users must be distinct proper subsets of `[1:m]`.
    pub fn new(m: u8, users: Vec<SideInfo>, label: impl Into<String>) -> Result<Instance> {
        Instance::checked(m, users, label.into()).map_err(|(_, e)| PicodError::domain(e))
    }

    fn checked(
        m: u8,
        mut users: Vec<SideInfo>,
        label: String,
    ) -> std::result::Result<Instance, (Option<usize>, String)> {
        if m == 0 || m > MAX_MESSAGES {
            return Err((
                None,
                format!("message count m={m} outside 1..={MAX_MESSAGES}"),
            ));
        }
        for (i, a) in users.iter().enumerate() {
            if !a.is_subset_of(full_mask(m)) {
                return Err((
                    Some(i),
                    format!("side information {a:?} has a member above m={m}"),
                ));
            }
            if a.len() >= m as usize {
                return Err((
                    Some(i),
                    format!("side information {a:?} leaves nothing to decode"),
                ));
            }
        }
        let mut seen = std::collections::HashMap::with_capacity(users.len());
        for (i, a) in users.iter().enumerate() {
            if let Some(first) = seen.insert(a.mask(), i) {
                return Err((
                    Some(i),
                    format!("duplicate side information {a:?} (also user {first})"),
                ));
            }
        }
        users.sort_by(SideInfo::canonical_cmp);
        Ok(Instance { m, users, label })
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn users(&self) -> &[SideInfo] {
        &self.users
    }

    pub fn user(&self, j: usize) -> SideInfo {
        self.users[j]
    }

    pub fn n(&self) -> usize {
        self.users.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Instance {
        self.label = label.into();
        self
    }

    /// Distinct side-information sizes present.
    pub fn sizes(&self) -> BTreeSet<u8> {
        self.users.iter().map(|a| a.len() as u8).collect()
    }

    /// `(min size, max size)` over users, or `None` without users.
    pub fn size_range(&self) -> Option<SpecS> {
        let sizes = self.sizes();
        Some(SpecS::new(*sizes.first()?, *sizes.last()?))
    }

    pub fn index_of(&self, a: SideInfo) -> Option<usize> {
        self.users.binary_search_by(|u| u.canonical_cmp(&a)).ok()
    }

    /// True iff this is exactly the complete--{s} instance with `m = 2s + 1`.
    pub fn is_critical(&self) -> bool {
        match self.size_range() {
            Some(SpecS { s_min, s_max }) if s_min == s_max => {
                let s = s_min;
                self.m as u32 == 2 * s as u32 + 1
                    && self.n() as u128 == binomial(self.m as u32, s as u32)
            }
            _ => false,
        }
    }

    /// True iff the users are exactly all subsets with size in `sizes`.
    pub fn is_complete(&self, sizes: &BTreeSet<u8>) -> bool {
        self.users.iter().all(|a| sizes.contains(&(a.len() as u8)))
            && self.n() as u128
                == sizes
                    .iter()
                    .map(|&s| binomial(self.m as u32, s as u32))
                    .sum::<u128>()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceRepr::from(self)).expect("instance serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&InstanceRepr::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let repr: InstanceRepr = serde_json::from_str(text).map_err(|e| {
            PicodError::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        repr.try_into()
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instance(m={}, users={:?}", self.m, self.users)?;
        if !self.label.is_empty() {
            write!(f, ", label={:?}", self.label)?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    m: u8,
    users: Vec<Vec<u8>>,
    #[serde(default)]
    label: String,
}

impl From<&Instance> for InstanceRepr {
    fn from(inst: &Instance) -> Self {
        InstanceRepr {
            m: inst.m,
            users: inst.users.iter().map(|a| a.members()).collect(),
            label: inst.label.clone(),
        }
    }
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = PicodError;

    fn try_from(r: InstanceRepr) -> Result<Instance> {
        let mut users = Vec::with_capacity(r.users.len());
        for (i, list) in r.users.iter().enumerate() {
            if let Some(&bad) = list.iter().find(|&&x| x == 0 || x > r.m) {
                return Err(PicodError::parse(
                    format!("users[{i}]"),
                    format!("message index {bad} outside 1..={}", r.m),
                ));
            }
            let a = SideInfo::from_members(list);
            if a.len() != list.len() {
                return Err(PicodError::parse(
                    format!("users[{i}]"),
                    "repeated message index",
                ));
            }
            users.push(a);
        }
        Instance::checked(r.m, users, r.label).map_err(|(pos, msg)| match pos {
            Some(i) => PicodError::parse(format!("users[{i}]"), msg),
            None => PicodError::parse("m", msg),
        })
    }
}

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `[1:n]` as masks, in lexicographic order of members.
pub fn k_subsets(n: u8, k: u8) -> Vec<u64> {
    fn rec(start: u8, n: u8, left: u8, acc: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for x in start..=n {
            if n - x + 1 < left {
                break;
            }
            rec(x + 1, n, left - 1, acc | bit(x), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(1, n, k, 0, &mut out);
    }
    out
}

/// The complete--S instance: one user per subset of `[1:m]` with size in `sizes`.
pub fn build_complete_s(m: u8, sizes: &BTreeSet<u8>) -> Result<Instance> {
    if m == 0 || m > MAX_MESSAGES {
        return Err(PicodError::domain(format!(
            "message count m={m} outside 1..={MAX_MESSAGES}"
        )));
    }
    if let Some(&bad) = sizes.iter().find(|&&s| s >= m) {
        return Err(PicodError::domain(format!(
            "size {bad} not in [0:{}]",
            m - 1
        )));
    }
    let users = sizes
        .iter()
        .flat_map(|&s| k_subsets(m, s))
        .map(SideInfo::from_mask)
        .collect();
    Instance::new(m, users, complete_label(m, sizes))
}

/// Complete--[s_min:s_max] instance.
pub fn build_consecutive(m: u8, spec: SpecS) -> Result<Instance> {
    spec.validate(m)?;
    build_complete_s(m, &spec.sizes())
}

fn complete_label(m: u8, sizes: &BTreeSet<u8>) -> String {
    let list: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    format!("complete-{{{}}} m={m}", list.join(","))
}

/// Keeps the users that know `[1:alpha]`, then deletes those messages and
/// renumbers the rest down by `alpha`.
///
/// Requires every user to have the same size `s`, `m < 2s + 1` and `alpha <= s`.
pub fn restrict_fixed_prefix(inst: &Instance, alpha: u8) -> Result<Instance> {
    let Some(SpecS { s_min: s, s_max }) = inst.size_range() else {
        return Err(PicodError::domain(
            "restrict_fixed_prefix needs at least one user",
        ));
    };
    if s != s_max {
        return Err(PicodError::domain(format!(
            "restrict_fixed_prefix needs a single size, got [{s}:{s_max}]"
        )));
    }
    if inst.m() as u32 > 2 * s as u32 {
        return Err(PicodError::domain(format!(
            "restrict_fixed_prefix needs m < 2s+1, got m={}, s={s}",
            inst.m()
        )));
    }
    if alpha > s {
        return Err(PicodError::domain(format!("alpha={alpha} exceeds s={s}")));
    }
    if alpha == 0 {
        return Ok(inst.clone());
    }
    let prefix = full_mask(alpha);
    let users = inst
        .users()
        .iter()
        .filter(|a| a.mask() & prefix == prefix)
        .map(|a| SideInfo::from_mask(a.mask() >> alpha))
        .collect();
    let label = format!("{} | restrict(alpha={alpha})", inst.label());
    Instance::new(inst.m() - alpha, users, label)
}

/// Keeps only the users whose side information has size `s`.
pub fn drop_to_single_s(inst: &Instance, s: u8) -> Result<Instance> {
    if !inst.sizes().contains(&s) {
        return Err(PicodError::domain(format!(
            "no user has side information of size {s}"
        )));
    }
    let users = inst
        .users()
        .iter()
        .copied()
        .filter(|a| a.len() == s as usize)
        .collect();
    Instance::new(inst.m(), users, format!("{} | drop(s={s})", inst.label()))
}

/// Parameters of the dummy-message enhancement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Enhancement {
    pub delta: u8,
    /// Message count after adding dummies `m+1..=m_prime`.
    pub m_prime: u8,
    /// Side-information size of every user in the enhanced instance.
    pub target: u8,
    /// Smallest original size kept.
    pub keep_min: u8,
}

/// Computes `delta`, `m'` and the kept size range, checking
/// `s_min <= ceil(m/2) - 1 <= floor(m/2) <= s_max`.
pub fn enhancement_params(m: u8, spec: SpecS) -> Result<Enhancement> {
    spec.validate(m)?;
    let (lo, hi) = (m / 2, m.div_ceil(2));
    if hi == 0 || spec.s_min > hi - 1 || spec.s_max < lo {
        return Err(PicodError::domain(format!(
            "enhancement needs s_min <= ceil(m/2)-1 <= floor(m/2) <= s_max, got m={m}, S=[{}:{}]",
            spec.s_min, spec.s_max
        )));
    }
    let delta = (spec.s_max - lo).min(hi - 1 - spec.s_min);
    let m_prime = m + 2 * delta + lo - hi + 1;
    let target = lo + delta;
    assert_eq!(
        m_prime as u32,
        2 * target as u32 + 1,
        "enhanced instance is not critical"
    );
    Ok(Enhancement {
        delta,
        m_prime,
        target,
        keep_min: hi - 1 - delta,
    })
}

/// Drops users outside `[ceil(m/2)-1-delta : floor(m/2)+delta]` and pads each
/// kept user of size `s` with every `(target - s)`-subset of the dummy
/// messages `m+1..=m'`. The result has a single size `target` and `m' = 2*target + 1`.
pub fn enhance_to_critical(inst: &Instance, spec: SpecS) -> Result<(Instance, Enhancement)> {
    let p = enhancement_params(inst.m(), spec)?;
    if p.m_prime > MAX_MESSAGES {
        return Err(PicodError::domain(format!(
            "enhanced message count {} exceeds {MAX_MESSAGES}",
            p.m_prime
        )));
    }
    let dummies = p.m_prime - inst.m();
    let mut seen = BTreeSet::new();
    let mut users = Vec::new();
    for a in inst.users() {
        let s = a.len() as u8;
        if s < p.keep_min || s > p.target {
            continue;
        }
        for extra in k_subsets(dummies, p.target - s) {
            let mask = a.mask() | (extra << inst.m());
            if seen.insert(mask) {
                users.push(SideInfo::from_mask(mask));
            }
        }
    }
    let label = format!(
        "{} | enhance(delta={}, m'={}, dummy messages {}..={})",
        inst.label(),
        p.delta,
        p.m_prime,
        inst.m() + 1,
        p.m_prime
    );
    Ok((Instance::new(p.m_prime, users, label)?, p))
}
