//! Zero-error linear decodability.
//!
//! A user knowing messages `K` can decode message `d` from a code with
//! generator `G` iff the unit row `e_d` lies in the row span of `G` stacked
//! with `{e_k : k in K}`.

use serde::{Serialize, Serializer};

use crate::assignment::{sample_rng, Assignment};
use crate::codes::{LinearCode, Scheme};
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::galois::{FieldElem, GaloisField, Matrix};
use crate::instance::{bit, full_mask, members, Instance, SideInfo};
use rand::Rng;

/// Row span of a matrix, kept in reduced echelon form.
pub struct RowSpace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(mut m: Matrix) -> RowSpace {
        let pivots = m.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        RowSpace {
            basis: m.select_rows(&keep),
            pivots,
        }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        let f = self.basis.field();
        let mut v = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = v[p];
            if c == 0 {
                continue;
            }
            for (x, &b) in v.iter_mut().zip(self.basis.row(i)) {
                *x = f.add(*x, f.mul(c, b));
            }
        }
        v.iter().all(|&x| x == 0)
    }

    /// Whether `e_col` (0-based column) is in the span.
    pub fn contains_unit(&self, col: usize) -> bool {
        let mut v = vec![0; self.basis.cols()];
        v[col] = 1;
        self.contains(&v)
    }
}

fn check_mask(code: &LinearCode, known: u64) -> Result<()> {
    if known & !full_mask(code.m() as u8) != 0 {
        return Err(PicodError::domain(format!(
            "side information uses messages beyond the code's {} columns",
            code.m()
        )));
    }
    Ok(())
}

/// Span of the generator together with the unit rows of the known messages.
fn known_span(gen: &Matrix, known: u64) -> RowSpace {
    let units: Vec<usize> = members(known).iter().map(|&x| x as usize - 1).collect();
    let stacked = gen
        .vstack(
            &Matrix::unit_rows(gen.w(), gen.cols(), &units).expect("known messages fit the code"),
        )
        .expect("same field and width");
    RowSpace::new(stacked)
}

/// Messages outside `known` that are decodable in one step.
fn decodable_from(gen: &Matrix, known: u64) -> u64 {
    let span = known_span(gen, known);
    members(full_mask(gen.cols() as u8) & !known)
        .into_iter()
        .filter(|&d| span.contains_unit(d as usize - 1))
        .fold(0, |acc, d| acc | bit(d))
}

/// Whether a user with side information `a` can decode message `d`.
pub fn can_decode(code: &LinearCode, a: SideInfo, d: u8) -> Result<bool> {
    check_mask(code, a.mask())?;
    if d == 0 || d as usize > code.m() {
        return Err(PicodError::domain(format!(
            "message {d} outside 1..={}",
            code.m()
        )));
    }
    if a.contains(d) {
        return Err(PicodError::domain(format!(
            "message {d} is already in the side information"
        )));
    }
    Ok(known_span(&code.gen, a.mask()).contains_unit(d as usize - 1))
}

/// Least fixpoint of adding every decodable message to what the user knows.
/// Returns the added messages as a mask (excluding `a`).
pub fn code_closure(code: &LinearCode, a: SideInfo) -> Result<u64> {
    check_mask(code, a.mask())?;
    let mut known = a.mask();
    loop {
        let fresh = decodable_from(&code.gen, known);
        if fresh == 0 {
            return Ok(known & !a.mask());
        }
        known |= fresh;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub user: usize,
    #[serde(serialize_with = "mask_as_list")]
    pub decodable: u64,
    pub satisfied: bool,
}

pub(crate) fn mask_as_list<S: Serializer>(
    mask: &u64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    members(*mask).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub valid: bool,
    /// Each user desires its smallest decodable message; present iff valid.
    pub assignment: Option<Assignment>,
    pub results: Vec<DecodeResult>,
}

/// A code is valid when every user decodes at least one message it lacks.
pub fn is_valid(code: &LinearCode, inst: &Instance) -> Result<Validity> {
    if code.m() != inst.m() as usize {
        return Err(PicodError::domain(format!(
            "code has {} columns, instance has m={}",
            code.m(),
            inst.m()
        )));
    }
    let results: Vec<DecodeResult> = inst
        .users()
        .iter()
        .enumerate()
        .map(|(user, &a)| {
            let decodable = code_closure(code, a)?;
            Ok(DecodeResult {
                user,
                decodable,
                satisfied: decodable != 0,
            })
        })
        .collect::<Result<_>>()?;
    let valid = results.iter().all(|r| r.satisfied);
    let assignment = valid.then(|| {
        Assignment::new(
            results
                .iter()
                .map(|r| r.decodable.trailing_zeros() as u8 + 1)
                .collect(),
        )
    });
    Ok(Validity {
        valid,
        assignment,
        results,
    })
}

/// Validity without building the per-user report; stops at the first unsatisfied user.
pub fn satisfies_all(gen: &Matrix, inst: &Instance) -> bool {
    inst.users()
        .iter()
        .all(|a| decodable_from(gen, a.mask()) != 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Scan every row space of dimension at most `ell`, if there are at most `budget` of them.
    Exhaustive { budget: u128 },
    /// Test `samples` random generators.
    Sampled { seed: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// First valid code in canonical order; `index` is its position.
    Found {
        code: LinearCode,
        index: u128,
        scanned: u128,
    },
    /// Exhaustive scan finished without a valid code.
    NoneExists {
        scanned: u128,
    },
    Budget {
        required: u128,
        budget: u128,
    },
    /// Sampling found nothing; this proves nothing.
    NotFoundInSamples {
        samples: u64,
    },
}

/// Reduced row echelon forms sharing one pivot pattern.
struct EchelonBlock {
    pivots: Vec<usize>,
    /// `(row, col)` positions free to take any field value.
    free: Vec<(usize, usize)>,
    count: u128,
    offset: u128,
}

fn echelon_blocks(m: usize, ell: usize, q: u128) -> (Vec<EchelonBlock>, u128) {
    let mut blocks = Vec::new();
    let mut offset = 0u128;
    for rank in 0..=ell.min(m) {
        for pivot_mask in crate::instance::k_subsets(m as u8, rank as u8) {
            let pivots: Vec<usize> = members(pivot_mask)
                .iter()
                .map(|&x| x as usize - 1)
                .collect();
            let mut free = Vec::new();
            for (row, &p) in pivots.iter().enumerate() {
                for c in p + 1..m {
                    if pivot_mask & (1 << c) == 0 {
                        free.push((row, c));
                    }
                }
            }
            let count = (0..free.len())
                .try_fold(1u128, |acc, _| acc.checked_mul(q))
                .unwrap_or(u128::MAX);
            blocks.push(EchelonBlock {
                pivots,
                free,
                count,
                offset,
            });
            offset = offset.saturating_add(count);
        }
    }
    (blocks, offset)
}

fn echelon_matrix(
    block: &EchelonBlock,
    mut local: u128,
    w: u8,
    ell: usize,
    m: usize,
    q: u128,
) -> Matrix {
    let mut gen = Matrix::zeros(w, ell, m).expect("valid field");
    for (row, &p) in block.pivots.iter().enumerate() {
        gen.set(row, p, 1);
    }
    for &(row, col) in block.free.iter().rev() {
        gen.set(row, col, (local % q) as FieldElem);
        local /= q;
    }
    gen
}

/// Looks for a valid linear code of length `ell` over GF(2^w).
///
/// Validity depends only on the row space, so the exhaustive mode visits one
/// reduced echelon representative per subspace of dimension `<= ell`, ordered
/// by rank, then pivot columns, then free entries. Representatives of rank
/// below `ell` are padded with zero rows.
pub fn search_linear_codes(
    inst: &Instance,
    ell: usize,
    w: u8,
    mode: SearchMode,
    exec: Exec,
) -> Result<SearchOutcome> {
    let field = GaloisField::get(w)?;
    let q = field.order() as u128;
    let m = inst.m() as usize;
    match mode {
        SearchMode::Exhaustive { budget } => {
            let (blocks, total) = echelon_blocks(m, ell, q);
            if total > budget || total > usize::MAX as u128 {
                return Ok(SearchOutcome::Budget {
                    required: total,
                    budget,
                });
            }
            let hit = exec.find_first(total as usize, |i| {
                let i = i as u128;
                let b = blocks.partition_point(|b| b.offset + b.count <= i);
                let gen = echelon_matrix(&blocks[b], i - blocks[b].offset, w, ell, m, q);
                satisfies_all(&gen, inst).then_some(gen)
            });
            Ok(match hit {
                Some((index, gen)) => SearchOutcome::Found {
                    code: LinearCode::new(Scheme::Custom, gen),
                    index: index as u128,
                    scanned: index as u128 + 1,
                },
                None => SearchOutcome::NoneExists { scanned: total },
            })
        }
        SearchMode::Sampled { seed, samples } => {
            let n = usize::try_from(samples).map_err(|_| PicodError::domain("too many samples"))?;
            let hit = exec.find_first(n, |i| {
                let mut rng = sample_rng(seed, i as u64);
                let entries = (0..ell * m)
                    .map(|_| rng.gen_range(0..q) as FieldElem)
                    .collect();
                let gen = Matrix::from_entries(w, ell, m, entries).expect("entries in field");
                satisfies_all(&gen, inst).then_some(gen)
            });
            Ok(match hit {
                Some((index, gen)) => SearchOutcome::Found {
                    code: LinearCode::new(Scheme::Custom, gen),
                    index: index as u128,
                    scanned: index as u128 + 1,
                },
                None => SearchOutcome::NotFoundInSamples { samples },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{scheme_mds, scheme_prefix};
    use crate::instance::{build_complete_s, build_consecutive, SpecS};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn units(m: usize, rows: &[usize]) -> LinearCode {
        let cols: Vec<usize> = rows.iter().map(|r| r - 1).collect();
        LinearCode::new(Scheme::Custom, Matrix::unit_rows(1, m, &cols).unwrap())
    }

    fn example_one() -> Instance {
        build_complete_s(3, &[1].into_iter().collect()).unwrap()
    }

    #[test]
    fn can_decode_examples() {
        let code = units(3, &[1]);
        assert!(can_decode(&code, SideInfo::from_members(&[2]), 1).unwrap());
        assert!(!can_decode(&code, SideInfo::from_members(&[2]), 3).unwrap());
        assert!(can_decode(&code, SideInfo::from_members(&[2]), 2).is_err());
        assert!(can_decode(&code, SideInfo::from_members(&[2]), 4).is_err());
    }

    #[test]
    fn mds_decodes_everything_for_s_min_users() {
        for m in 2..=7u8 {
            for s in 0..m {
                let inst = build_complete_s(m, &[s].into_iter().collect()).unwrap();
                let code = scheme_mds(&inst, 8).unwrap();
                for &a in inst.users() {
                    for d in members(full_mask(m) & !a.mask()) {
                        assert!(can_decode(&code, a, d).unwrap(), "m={m} a={a:?} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn closure_examples() {
        let code = units(3, &[1, 2]);
        assert_eq!(
            code_closure(&code, SideInfo::from_members(&[3])).unwrap(),
            bit(1) | bit(2)
        );
        assert_eq!(
            code_closure(&code, SideInfo::from_members(&[1])).unwrap(),
            bit(2)
        );
        let empty = LinearCode::new(Scheme::Custom, Matrix::zeros(1, 0, 3).unwrap());
        assert_eq!(
            code_closure(&empty, SideInfo::from_members(&[2])).unwrap(),
            0
        );
    }

    #[test]
    fn closure_iterates_past_one_step() {
        // Over GF(2): rows w1+w2 and w2+w3. Knowing w1 gives w2, then w3.
        let gen = Matrix::from_rows(1, 3, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let code = LinearCode::new(Scheme::Custom, gen);
        assert_eq!(
            code_closure(&code, SideInfo::from_members(&[1])).unwrap(),
            bit(2) | bit(3)
        );
    }

    #[test]
    fn validity_examples() {
        let inst = example_one();
        let v = is_valid(&scheme_prefix(&inst, 1).unwrap(), &inst).unwrap();
        assert!(v.valid);
        assert_eq!(v.assignment, Some(Assignment::new(vec![2, 1, 1])));

        let v = is_valid(&units(3, &[1]), &inst).unwrap();
        assert!(!v.valid);
        assert!(v.assignment.is_none());
        assert!(!v.results[0].satisfied);
        assert!(v.results[1].satisfied && v.results[2].satisfied);

        assert!(is_valid(&units(4, &[1]), &inst).is_err());
    }

    #[test]
    fn both_schemes_valid_on_small_consecutive_instances() {
        for m in 1..=6u8 {
            for lo in 0..m {
                for hi in lo..m {
                    let inst = build_consecutive(m, SpecS::new(lo, hi)).unwrap();
                    assert!(
                        is_valid(&scheme_prefix(&inst, 1).unwrap(), &inst)
                            .unwrap()
                            .valid
                    );
                    let mds = scheme_mds(&inst, 8).unwrap();
                    let v = is_valid(&mds, &inst).unwrap();
                    assert!(v.valid);
                    for (r, a) in v.results.iter().zip(inst.users()) {
                        assert_eq!(r.decodable, full_mask(m) & !a.mask());
                    }
                }
            }
        }
    }

    #[test]
    fn search_examples() {
        let inst = example_one();
        let none = search_linear_codes(
            &inst,
            1,
            1,
            SearchMode::Exhaustive { budget: 1000 },
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(none, SearchOutcome::NoneExists { scanned: 8 });
        match search_linear_codes(
            &inst,
            2,
            1,
            SearchMode::Exhaustive { budget: 1000 },
            Exec::Parallel,
        )
        .unwrap()
        {
            SearchOutcome::Found { code, .. } => assert!(is_valid(&code, &inst).unwrap().valid),
            other => panic!("expected a code, got {other:?}"),
        }
        let inst = build_complete_s(5, &[2].into_iter().collect()).unwrap();
        // 1 + 31 + 155 subspaces of GF(2)^5 with dimension <= 2.
        let none = search_linear_codes(
            &inst,
            2,
            1,
            SearchMode::Exhaustive { budget: 1000 },
            Exec::Parallel,
        )
        .unwrap();
        assert_eq!(none, SearchOutcome::NoneExists { scanned: 187 });
        let over = search_linear_codes(
            &inst,
            2,
            1,
            SearchMode::Exhaustive { budget: 100 },
            Exec::Parallel,
        )
        .unwrap();
        assert_eq!(
            over,
            SearchOutcome::Budget {
                required: 187,
                budget: 100
            }
        );
    }

    #[test]
    fn search_is_schedule_independent() {
        let inst = build_complete_s(5, &[2].into_iter().collect()).unwrap();
        let mode = SearchMode::Exhaustive { budget: 100_000 };
        let a = search_linear_codes(&inst, 3, 1, mode, Exec::Sequential).unwrap();
        let b = search_linear_codes(&inst, 3, 1, mode, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a, SearchOutcome::Found { .. }));
        let mode = SearchMode::Sampled {
            seed: 3,
            samples: 2000,
        };
        let a = search_linear_codes(&inst, 3, 2, mode, Exec::Sequential).unwrap();
        let b = search_linear_codes(&inst, 3, 2, mode, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn echelon_enumeration_counts_subspaces() {
        // Gaussian binomials [m choose r]_q summed over r <= ell.
        fn gaussian(m: u32, r: u32, q: u128) -> u128 {
            let mut num = 1u128;
            let mut den = 1u128;
            for i in 0..r {
                num *= q.pow(m - i) - 1;
                den *= q.pow(i + 1) - 1;
            }
            num / den
        }
        for (m, ell, q) in [(4usize, 2usize, 2u128), (5, 3, 2), (4, 2, 4), (3, 3, 8)] {
            let (_, total) = echelon_blocks(m, ell, q);
            let expected: u128 = (0..=ell as u32).map(|r| gaussian(m as u32, r, q)).sum();
            assert_eq!(total, expected, "m={m} ell={ell} q={q}");
        }
    }

    fn closure_in_order(code: &LinearCode, a: SideInfo, order: &[u8]) -> u64 {
        let mut known = a.mask();
        loop {
            let mut changed = false;
            for &d in order {
                if known & bit(d) == 0 && known_span(&code.gen, known).contains_unit(d as usize - 1)
                {
                    known |= bit(d);
                    changed = true;
                }
            }
            if !changed {
                return known & !a.mask();
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn closure_is_monotone_and_order_free(
            m in 2u8..7,
            rows in 1usize..4,
            seed in 0u64..10_000,
            a_mask in 0u64..64,
            extra in 0u64..64,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries = (0..rows * m as usize).map(|_| rng.gen_range(0..4u16)).collect();
            let code = LinearCode::new(Scheme::Custom, Matrix::from_entries(2, rows, m as usize, entries).unwrap());
            let a = SideInfo::from_mask(a_mask & full_mask(m));
            let bigger = SideInfo::from_mask((a_mask | extra) & full_mask(m));
            let cover = a.mask() | code_closure(&code, a).unwrap();
            let bigger_cover = bigger.mask() | code_closure(&code, bigger).unwrap();
            proptest::prop_assert_eq!(cover & !bigger_cover, 0);

            let mut order: Vec<u8> = (1..=m).collect();
            order.shuffle(&mut rng);
            proptest::prop_assert_eq!(closure_in_order(&code, a, &order), code_closure(&code, a).unwrap());
        }
    }
}
