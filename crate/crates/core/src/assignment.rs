//! Choices of desired messages and the space of all of them.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PicodError, Result};
use crate::instance::{bit, full_mask, members, Instance};

/// One desired message per user, in canonical user order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub desired: Vec<u8>,
}

impl Assignment {
    pub fn new(desired: Vec<u8>) -> Assignment {
        Assignment { desired }
    }

    /// Checks that every desired message lies outside its user's side information.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.desired.len() != inst.n() {
            return Err(PicodError::domain(format!(
                "assignment has {} entries for {} users",
                self.desired.len(),
                inst.n()
            )));
        }
        for (j, &d) in self.desired.iter().enumerate() {
            if d == 0 || d > inst.m() {
                return Err(PicodError::domain(format!(
                    "user {j} desires {d}, outside 1..={}",
                    inst.m()
                )));
            }
            if inst.user(j).contains(d) {
                return Err(PicodError::domain(format!(
                    "user {j} desires {d}, which it already knows"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, j: usize) -> u8 {
        self.desired[j]
    }

    pub fn len(&self) -> usize {
        self.desired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desired.is_empty()
    }

    /// Messages desired by at least one user, as a mask.
    pub fn image(&self) -> u64 {
        self.desired.iter().fold(0, |acc, &d| acc | bit(d))
    }

    /// Parses `"2,1,1"`.
    pub fn parse(text: &str) -> Result<Assignment> {
        let desired = text
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(i, t)| {
                t.parse::<u8>()
                    .map_err(|e| PicodError::parse(format!("entry {i}"), format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment { desired })
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.desired.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.desired.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// All valid assignments of an instance, indexed in lexicographic order.
///
/// Index `i` is read as a mixed-radix number whose most significant digit is
/// user 0; digit values pick among the user's allowed messages in ascending
/// order. Index 0 is the all-smallest assignment.
#[derive(Clone, Debug)]
pub struct AssignmentSpace {
    options: Vec<Vec<u8>>,
    total: u128,
}

impl AssignmentSpace {
    pub fn new(inst: &Instance) -> AssignmentSpace {
        let all = full_mask(inst.m());
        let options: Vec<Vec<u8>> = inst
            .users()
            .iter()
            .map(|a| members(all & !a.mask()))
            .collect();
        let total = options
            .iter()
            .try_fold(1u128, |acc, o| acc.checked_mul(o.len() as u128))
            .unwrap_or(u128::MAX);
        AssignmentSpace { options, total }
    }

    /// Number of assignments (saturating at `u128::MAX`).
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn options(&self, j: usize) -> &[u8] {
        &self.options[j]
    }

    pub fn users(&self) -> usize {
        self.options.len()
    }

    /// The assignment where each user desires its smallest unknown message.
    pub fn first(&self) -> Assignment {
        Assignment::new(self.options.iter().map(|o| o[0]).collect())
    }

    pub fn nth(&self, mut index: u128) -> Assignment {
        let mut desired = vec![0u8; self.options.len()];
        for (j, o) in self.options.iter().enumerate().rev() {
            let radix = o.len() as u128;
            desired[j] = o[(index % radix) as usize];
            index /= radix;
        }
        Assignment::new(desired)
    }

    pub fn index_of(&self, a: &Assignment) -> Option<u128> {
        let mut index = 0u128;
        for (o, d) in self.options.iter().zip(&a.desired) {
            let digit = o.iter().position(|x| x == d)?;
            index = index * o.len() as u128 + digit as u128;
        }
        Some(index)
    }

    /// Uniform random assignment.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Assignment {
        Assignment::new(
            self.options
                .iter()
                .map(|o| o[rng.gen_range(0..o.len())])
                .collect(),
        )
    }

    /// Every assignment that differs from `a` in exactly user `j`.
    pub fn neighbours_at(&self, a: &Assignment, j: usize) -> Vec<Assignment> {
        self.options[j]
            .iter()
            .filter(|&&x| x != a.desired[j])
            .map(|&x| {
                let mut b = a.clone();
                b.desired[j] = x;
                b
            })
            .collect()
    }

    /// Fails with [`PicodError::Budget`] if the space is larger than `budget`.
    pub fn check_budget(&self, budget: u128) -> Result<usize> {
        if self.total > budget || self.total > usize::MAX as u128 {
            return Err(PicodError::Budget {
                required: self.total,
                budget,
            });
        }
        Ok(self.total as usize)
    }
}

/// Deterministic RNG for sample `index` of a run seeded with `seed`.
///
/// Each sample draws from its own stream, so results do not depend on how
/// samples are scheduled across workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_complete_s, SideInfo};

    fn example_one() -> Instance {
        build_complete_s(3, &[1].into_iter().collect()).unwrap()
    }

    #[test]
    fn first_is_smallest_index() {
        let space = AssignmentSpace::new(&example_one());
        assert_eq!(space.total(), 8);
        assert_eq!(space.first(), Assignment::new(vec![2, 1, 1]));
        assert_eq!(space.nth(0), space.first());
        assert_eq!(space.nth(7), Assignment::new(vec![3, 3, 2]));
    }

    #[test]
    fn nth_is_lexicographic_and_invertible() {
        let inst = build_complete_s(5, &[2].into_iter().collect()).unwrap();
        let space = AssignmentSpace::new(&inst);
        assert_eq!(space.total(), 59049);
        let mut prev = space.nth(0);
        for i in 1..2000u128 {
            let a = space.nth(i);
            assert!(prev < a);
            a.validate(&inst).unwrap();
            assert_eq!(space.index_of(&a), Some(i));
            prev = a;
        }
    }

    #[test]
    fn validation_errors() {
        let inst = example_one();
        assert!(Assignment::new(vec![2, 1]).validate(&inst).is_err());
        assert!(Assignment::new(vec![1, 1, 1]).validate(&inst).is_err());
        assert!(Assignment::new(vec![2, 4, 1]).validate(&inst).is_err());
        assert!(Assignment::new(vec![2, 1, 1]).validate(&inst).is_ok());
    }

    #[test]
    fn parse_list() {
        assert_eq!(
            Assignment::parse("2, 1,1").unwrap(),
            Assignment::new(vec![2, 1, 1])
        );
        assert!(Assignment::parse("2,x").is_err());
        assert_eq!(Assignment::new(vec![2, 3]).to_string(), "2,3");
    }

    #[test]
    fn budget_is_explicit() {
        let inst = build_complete_s(7, &[3].into_iter().collect()).unwrap();
        let space = AssignmentSpace::new(&inst);
        assert_eq!(space.total(), 4u128.pow(35));
        assert!(matches!(
            space.check_budget(1_000_000),
            Err(PicodError::Budget { .. })
        ));
        let empty = Instance::new(2, vec![SideInfo::EMPTY], "").unwrap();
        assert_eq!(AssignmentSpace::new(&empty).check_budget(10).unwrap(), 2);
    }

    #[test]
    fn sample_streams_are_stable() {
        let space = AssignmentSpace::new(&example_one());
        let a = space.sample(&mut sample_rng(9, 4));
        let b = space.sample(&mut sample_rng(9, 4));
        assert_eq!(a, b);
    }
}
