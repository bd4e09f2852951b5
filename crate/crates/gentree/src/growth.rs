//! Linear-time decoding of long tree paths.
//!
//! The permutation is kept as a doubly linked list of its entries sorted
//! by value; a gap between values is named by the entry just above it
//! (or `TOP`). Each family's active-site list is updated from the chosen
//! site by a local rule, so a step costs amortized `O(1)`, plus `O(|jump|)`
//! for the two families whose label is the final value. The result is
//! cross-checked against [`crate::tree::decode`] in the tests.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilySpec};
use crate::perm::Permutation;
use crate::tree::{ColoredLabel, ColoredLabelSeq};

const TOP: u32 = u32::MAX;
const BOTTOM: u32 = u32::MAX - 1;

/// A permutation under construction together with its tree label.
#[derive(Clone, Debug)]
pub struct Grower {
    family: &'static FamilySpec,
    above: Vec<u32>,
    below: Vec<u32>,
    highest: u32,
    lowest: u32,
    /// Gaps that are active sites, ascending. Unused for famA/famB,
    /// whose active sites are determined by the final value.
    sites: VecDeque<u32>,
    label: ColoredLabel,
}

impl Grower {
    /// The size-1 permutation.
    pub fn new(family: FamilyId) -> Self {
        let spec = family.spec();
        let mut sites = VecDeque::new();
        if !matches!(family, FamilyId::FamA | FamilyId::FamB) {
            sites.push_back(0);
            sites.push_back(TOP);
        }
        Grower {
            family: spec,
            above: vec![TOP],
            below: vec![BOTTOM],
            highest: 0,
            lowest: 0,
            sites,
            label: spec.first_label(),
        }
    }

    pub fn len(&self) -> usize {
        self.above.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self) -> ColoredLabel {
        self.label
    }

    /// Places a new final entry just below `gap` (just below the entry
    /// `gap`, or at the top).
    fn insert_below(&mut self, gap: u32) -> u32 {
        let x = self.above.len() as u32;
        let under = if gap == TOP { self.highest } else { self.below[gap as usize] };
        self.above.push(gap);
        self.below.push(under);
        if gap == TOP {
            self.highest = x;
        } else {
            self.below[gap as usize] = x;
        }
        if under == BOTTOM {
            self.lowest = x;
        } else {
            self.above[under as usize] = x;
        }
        x
    }

    /// Moves to the child with the given colored label.
    pub fn push(&mut self, child: ColoredLabel) -> Result<()> {
        let k = self.label.value;
        let j = self.family.child_index(k, child).ok_or_else(|| Error::Inconsistent {
            index: self.len() + self.family.virtual_root as usize,
            reason: format!("{child} is not a child of {}", self.label),
        })?;
        match self.family.id {
            FamilyId::FamA | FamilyId::FamB => {
                // The label equals the final value; the new value is the
                // child label.
                let last = (self.len() - 1) as u32;
                let gap = if child.value == k + 1 {
                    self.above[last as usize]
                } else {
                    let mut d = last;
                    for _ in 0..(k - child.value) {
                        d = self.below[d as usize];
                    }
                    d
                };
                self.insert_below(gap);
            }
            _ => {
                let len = self.sites.len();
                if len as i64 != k {
                    return Err(Error::Internal(format!("label {k} with {len} active sites")));
                }
                let gap = self.sites[j];
                let x = self.insert_below(gap);
                update_sites(self.family.id, &mut self.sites, j, x);
                if self.sites.len() as i64 != child.value {
                    return Err(Error::Internal(format!(
                        "child label {} with {} active sites",
                        child.value,
                        self.sites.len()
                    )));
                }
            }
        }
        self.label = child;
        Ok(())
    }

    /// Values of the entries in position order.
    pub fn permutation(&self) -> Permutation {
        let mut values = vec![0u32; self.len()];
        let mut d = self.lowest;
        let mut v = 1;
        while d != TOP {
            values[d as usize] = v;
            v += 1;
            d = self.above[d as usize];
        }
        Permutation::from_vec_unchecked(values)
    }

    /// Pattern formed by the last `h` entries.
    pub fn last_pattern(&self, h: usize) -> Permutation {
        let n = self.len();
        assert!(h >= 1 && h <= n);
        let first = (n - h) as u32;
        let mut values = vec![0u32; h];
        let mut d = self.lowest;
        let mut v = 1;
        while d != TOP {
            if d >= first {
                values[(d - first) as usize] = v;
                v += 1;
            }
            d = self.above[d as usize];
        }
        Permutation::from_vec_unchecked(values)
    }
}

/// Active-site update after inserting entry `x` into site `j`.
///
/// Writing `g` for the chosen gap, the gap just above `x` keeps the name
/// `g` and the gap just below `x` is named `x`. The rules were read off
/// from exhaustive growth of small permutations and are validated against
/// membership testing.
fn update_sites(family: FamilyId, sites: &mut VecDeque<u32>, j: usize, x: u32) {
    use FamilyId::*;
    let k = sites.len();
    match family {
        Av123 => {
            if j == 0 {
                sites.push_front(x);
            } else {
                sites.truncate(j);
                sites.push_back(x);
            }
        }
        Av132 => {
            if j == 0 {
                sites.push_front(x);
            } else {
                sites.drain(1..j);
            }
        }
        Av1423_4123 => {
            if j == 0 {
                sites.push_front(x);
            } else if j + 1 < k {
                let top = sites[k - 1];
                sites.truncate(j);
                sites.push_back(x);
                sites.push_back(top);
            } else {
                sites.insert(j, x);
            }
        }
        Av1234_2134 => match j {
            0 => sites.push_front(x),
            1 => sites.insert(1, x),
            _ => {
                sites.truncate(j);
                sites.push_back(x);
            }
        },
        Av1324_3124 => {
            if j == 0 {
                sites.push_front(x);
            } else {
                sites.truncate(j + 1);
                sites.insert(j, x);
            }
        }
        Av2314_3214 => {
            if j + 1 < k {
                let next = sites[j + 1];
                sites.truncate(j + 1);
                sites.insert(j, x);
                sites.push_back(next);
            } else {
                sites.insert(j, x);
            }
        }
        Av2413_4213 => {
            if j + 1 < k {
                let top = sites[k - 1];
                sites.truncate(j + 1);
                sites.insert(j, x);
                sites.push_back(top);
            } else {
                sites.insert(j, x);
            }
        }
        Av3412_4312 => {
            if j + 2 < k {
                let (a, b) = (sites[k - 2], sites[k - 1]);
                sites.truncate(j);
                sites.push_back(x);
                sites.push_back(a);
                sites.push_back(b);
            } else {
                sites.insert(j, x);
            }
        }
        FamA | FamB => unreachable!("label-driven families keep no site list"),
    }
}

/// Same result as [`crate::tree::decode`], in linear time.
pub fn fast_decode(family: &FamilySpec, seq: &ColoredLabelSeq) -> Result<Permutation> {
    crate::tree::child_indices(family, seq)?;
    let start = family.virtual_root as usize;
    let mut g = Grower::new(family.id);
    for &lab in &seq.labels[start + 1..] {
        g.push(lab)?;
    }
    Ok(g.permutation())
}

/// Decodes a path given as labels only (no root), as produced by the
/// walk samplers: `labels[0]` is the label of the size-1 permutation.
pub fn decode_labels(family: FamilyId, labels: &[ColoredLabel]) -> Result<Permutation> {
    let mut g = Grower::new(family);
    if labels.first() != Some(&g.label()) {
        return Err(Error::Inconsistent { index: 0, reason: "wrong first label".into() });
    }
    for &lab in &labels[1..] {
        g.push(lab)?;
    }
    Ok(g.permutation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{decode, enumerate_level, DEFAULT_LEVEL_CAP};

    #[test]
    fn agrees_with_membership_decoding() {
        for f in FamilyId::ALL {
            let spec = f.spec();
            for n in 1..=7 {
                for s in enumerate_level(spec, n, DEFAULT_LEVEL_CAP).unwrap() {
                    assert_eq!(fast_decode(spec, &s).unwrap(), decode(spec, &s).unwrap(), "{f} {s}");
                }
            }
        }
    }

    #[test]
    fn last_pattern_reads_suffix() {
        let spec = FamilyId::Av1423_4123.spec();
        let s = enumerate_level(spec, 6, DEFAULT_LEVEL_CAP).unwrap();
        for seq in s.iter().take(200) {
            let mut g = Grower::new(spec.id);
            for &l in &seq.labels[1..] {
                g.push(l).unwrap();
            }
            let p = g.permutation();
            for h in 1..=6 {
                let tail = crate::perm::standardize(&p.values()[6 - h..]).unwrap();
                assert_eq!(g.last_pattern(h), tail);
            }
        }
    }
}
