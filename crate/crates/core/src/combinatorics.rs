//! Sunflowers (Δ-systems) in families of equal-size finite sets.
//!
//! A family of more than `k!·(r−1)^k` distinct `k`-sets always contains `r`
//! sets whose pairwise intersections all equal one common root. The
//! extraction follows the classical argument: either a maximal disjoint
//! subfamily already has `r` members, or some element lies in many sets and
//! we recurse on the sets through it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Distinct finite sets, all of the same cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily<T: Ord> {
    sets: Vec<BTreeSet<T>>,
    k: usize,
}

impl<T: Ord + Clone> SetFamily<T> {
    pub fn new(sets: Vec<BTreeSet<T>>) -> Result<Self> {
        let k = sets.first().map_or(0, BTreeSet::len);
        if let Some(bad) = sets.iter().position(|s| s.len() != k) {
            return Err(Error::InvalidArgument(format!(
                "set {bad} has {} elements, expected {k}",
                sets[bad].len()
            )));
        }
        let distinct: BTreeSet<&BTreeSet<T>> = sets.iter().collect();
        if distinct.len() != sets.len() {
            return Err(Error::InvalidArgument(
                "family contains duplicate sets".into(),
            ));
        }
        Ok(SetFamily { sets, k })
    }

    pub fn sets(&self) -> &[BTreeSet<T>] {
        &self.sets
    }

    pub fn set_size(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Petals are indices into the originating family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sunflower<T: Ord> {
    pub root: BTreeSet<T>,
    pub petal_indices: Vec<usize>,
}

impl<T: Ord + Clone> Sunflower<T> {
    /// Every pair of petals meets exactly in the root.
    pub fn is_valid_for(&self, family: &SetFamily<T>) -> bool {
        let sets = family.sets();
        if self.petal_indices.iter().any(|&i| i >= sets.len()) {
            return false;
        }
        let distinct: BTreeSet<usize> = self.petal_indices.iter().copied().collect();
        if distinct.len() != self.petal_indices.len() {
            return false;
        }
        for (a, &i) in self.petal_indices.iter().enumerate() {
            for &j in &self.petal_indices[a + 1..] {
                let common: BTreeSet<T> = sets[i].intersection(&sets[j]).cloned().collect();
                if common != self.root {
                    return false;
                }
            }
        }
        true
    }
}

/// `k!·(r−1)^k`, or [`Error::Overflow`] past `i64::MAX`.
pub fn erdos_rado_bound(k: usize, r: usize) -> Result<u64> {
    if k == 0 || r < 2 {
        return Err(Error::InvalidArgument(format!(
            "need k >= 1 and r >= 2, got k = {k}, r = {r}"
        )));
    }
    let overflow = Error::Overflow { k, r };
    let limit = i64::MAX as u64;
    let mut acc: u64 = 1;
    for i in 1..=k as u64 {
        acc = acc
            .checked_mul(i)
            .and_then(|v| v.checked_mul(r as u64 - 1))
            .filter(|&v| v <= limit)
            .ok_or(overflow.clone())?;
    }
    Ok(acc)
}

/// Families up to this size fall back to exhaustive search when the
/// recursive extraction comes up empty.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// A sunflower with at least `r` petals, if one is found.
///
/// Always succeeds when `|f| > k!·(r−1)^k`. Below that bound the recursive
/// procedure may miss sunflowers; small families are then searched
/// exhaustively.
pub fn find_sunflower<T: Ord + Clone>(f: &SetFamily<T>, r: usize) -> Option<Sunflower<T>> {
    if r < 2 {
        return None;
    }
    let all: Vec<usize> = (0..f.len()).collect();
    let sets: Vec<&BTreeSet<T>> = f.sets.iter().collect();
    extract(&sets, &all, r)
        .map(|(root, petal_indices)| Sunflower {
            root,
            petal_indices,
        })
        .or_else(|| {
            (f.len() <= EXHAUSTIVE_LIMIT)
                .then(|| exhaustive_sunflower(f, r))
                .flatten()
        })
}

/// Recursive extraction on `members` (indices into `sets`). Every set in
/// `members` is viewed with the elements of the current partial root
/// already removed, tracked through `removed`.
fn extract<T: Ord + Clone>(
    sets: &[&BTreeSet<T>],
    members: &[usize],
    r: usize,
) -> Option<(BTreeSet<T>, Vec<usize>)> {
    extract_rec(sets, members, r, &BTreeSet::new())
}

fn extract_rec<T: Ord + Clone>(
    sets: &[&BTreeSet<T>],
    members: &[usize],
    r: usize,
    removed: &BTreeSet<T>,
) -> Option<(BTreeSet<T>, Vec<usize>)> {
    if members.len() < r {
        return None;
    }
    // greedy maximal disjoint subfamily of the reduced sets
    let mut used: BTreeSet<&T> = BTreeSet::new();
    let mut disjoint = Vec::new();
    for &i in members {
        let mut reduced = sets[i].iter().filter(|e| !removed.contains(*e));
        if reduced.clone().all(|e| !used.contains(e)) {
            used.extend(reduced.by_ref());
            disjoint.push(i);
            if disjoint.len() == r {
                return Some((removed.clone(), disjoint));
            }
        }
    }
    // most frequent element, ties by element order
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for &i in members {
        for e in sets[i].iter().filter(|e| !removed.contains(*e)) {
            *counts.entry(e).or_default() += 1;
        }
    }
    let (&popular, _) =
        counts
            .iter()
            .fold(None, |best: Option<(&&T, &usize)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })?;
    let through: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&i| sets[i].contains(popular))
        .collect();
    let mut next = removed.clone();
    next.insert(popular.clone());
    extract_rec(sets, &through, r, &next)
}

/// Backtracking search over `r`-subsets of the family.
pub fn exhaustive_sunflower<T: Ord + Clone>(f: &SetFamily<T>, r: usize) -> Option<Sunflower<T>> {
    let sets = f.sets();
    if r < 2 || sets.len() < r {
        return None;
    }
    let mut chosen = Vec::with_capacity(r);
    for first in 0..sets.len() {
        for second in first + 1..sets.len() {
            let root: BTreeSet<T> = sets[first].intersection(&sets[second]).cloned().collect();
            chosen.clear();
            chosen.extend([first, second]);
            if grow(sets, &root, r, second + 1, &mut chosen) {
                return Some(Sunflower {
                    root,
                    petal_indices: chosen,
                });
            }
        }
    }
    None
}

fn grow<T: Ord + Clone>(
    sets: &[BTreeSet<T>],
    root: &BTreeSet<T>,
    r: usize,
    start: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == r {
        return true;
    }
    for c in start..sets.len() {
        let fits = chosen.iter().all(|&i| {
            sets[i].intersection(&sets[c]).count() == root.len() && root.is_subset(&sets[c])
        });
        if fits {
            chosen.push(c);
            if grow(sets, root, r, c + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}
