//! Colored label sequences, jumps, and the bijection between tree paths
//! and permutations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{active_sites, FamilySpec};
use crate::perm::{append_final, standardize, Permutation};

/// A label together with the color separating repeated children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColoredLabel {
    pub value: i64,
    pub color: u32,
}

impl ColoredLabel {
    pub fn plain(value: i64) -> Self {
        ColoredLabel { value, color: 1 }
    }
}

fn color_suffix(f: &mut fmt::Formatter<'_>, color: u32) -> fmt::Result {
    match color {
        1 => Ok(()),
        2 => f.write_str("T"),
        c => write!(f, "^{c}"),
    }
}

/// Color 1 is printed bare, color 2 as a `T` suffix.
impl fmt::Display for ColoredLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        color_suffix(f, self.color)
    }
}

/// Increment between consecutive labels, carrying the color of the
/// label it leads to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColoredJump {
    pub step: i64,
    pub color: u32,
}

impl ColoredJump {
    pub fn new(step: i64, color: u32) -> Self {
        ColoredJump { step, color }
    }

    pub fn plain(step: i64) -> Self {
        ColoredJump { step, color: 1 }
    }
}

impl fmt::Display for ColoredJump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step > 0 {
            write!(f, "+{}", self.step)?;
        } else {
            write!(f, "{}", self.step)?;
        }
        color_suffix(f, self.color)
    }
}

/// Grammar: optional sign, integer, optional `B` (color 1) or `T` (color 2).
impl FromStr for ColoredJump {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, color) = match t.chars().last() {
            Some('B') | Some('b') => (&t[..t.len() - 1], 1),
            Some('T') | Some('t') => (&t[..t.len() - 1], 2),
            _ => (t, 1),
        };
        let step = num
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("bad jump `{t}`")))?;
        Ok(ColoredJump { step, color })
    }
}

/// Parses a comma-separated jump list such as `-2,+1B,+1T,0`.
pub fn parse_jumps(s: &str) -> Result<Vec<ColoredJump>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_jumps(js: &[ColoredJump]) -> String {
    js.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
}

/// A root-to-vertex path of colored labels; the first entry is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColoredLabelSeq {
    pub labels: Vec<ColoredLabel>,
}

impl ColoredLabelSeq {
    pub fn new(labels: Vec<ColoredLabel>) -> Self {
        ColoredLabelSeq { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl fmt::Display for ColoredLabelSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// Differences of consecutive labels.
pub fn jumps_of(seq: &ColoredLabelSeq) -> Vec<ColoredJump> {
    seq.labels
        .windows(2)
        .map(|w| ColoredJump { step: w[1].value - w[0].value, color: w[1].color })
        .collect()
}

/// Prefix sums of `jumps` starting from `start`.
pub fn labels_from_jumps(start: ColoredLabel, jumps: &[ColoredJump]) -> ColoredLabelSeq {
    let mut labels = Vec::with_capacity(jumps.len() + 1);
    labels.push(start);
    let mut cur = start.value;
    for j in jumps {
        cur += j.step;
        labels.push(ColoredLabel { value: cur, color: j.color });
    }
    ColoredLabelSeq { labels }
}

/// Index in `seq` of the label attached to the size-1 permutation.
fn first_real_index(family: &FamilySpec, seq: &ColoredLabelSeq) -> Result<usize> {
    let root = seq.labels.first().ok_or(Error::Inconsistent {
        index: 0,
        reason: "empty sequence".into(),
    })?;
    if root.value != family.root_label {
        return Err(Error::Inconsistent {
            index: 0,
            reason: format!("root label {} but expected {}", root.value, family.root_label),
        });
    }
    if family.virtual_root {
        let first = seq.labels.get(1).ok_or(Error::Inconsistent {
            index: 1,
            reason: "missing first label below the virtual root".into(),
        })?;
        if family.child_index(root.value, *first).is_none() {
            return Err(Error::Inconsistent {
                index: 1,
                reason: format!("{first} is not a child of {root}"),
            });
        }
        Ok(1)
    } else {
        Ok(0)
    }
}

/// Checks that consecutive labels follow the succession rule and returns,
/// for each step after the size-1 permutation, the chosen child index.
pub fn child_indices(family: &FamilySpec, seq: &ColoredLabelSeq) -> Result<Vec<usize>> {
    let start = first_real_index(family, seq)?;
    let mut out = Vec::with_capacity(seq.len() - start - 1);
    for i in start + 1..seq.len() {
        let (parent, child) = (seq.labels[i - 1], seq.labels[i]);
        let idx = family.child_index(parent.value, child).ok_or_else(|| Error::Inconsistent {
            index: i,
            reason: format!("{child} is not a child of {parent}"),
        })?;
        out.push(idx);
    }
    Ok(out)
}

/// Size of the permutation encoded by a sequence.
pub fn encoded_size(family: &FamilySpec, seq: &ColoredLabelSeq) -> usize {
    seq.len() - family.virtual_root as usize
}

/// Tree path to permutation, growing by membership-tested active sites.
pub fn decode(family: &FamilySpec, seq: &ColoredLabelSeq) -> Result<Permutation> {
    let indices = child_indices(family, seq)?;
    let start = first_real_index(family, seq)?;
    let mut sigma = Permutation::identity(1);
    for (step, &idx) in indices.iter().enumerate() {
        let parent = seq.labels[start + step].value;
        let sites = active_sites(&sigma, family);
        let expected = family.rule_children(parent)?.len();
        if sites.len() != expected {
            return Err(Error::Internal(format!(
                "{sigma} has {} active sites but label {parent} has {expected} children",
                sites.len()
            )));
        }
        sigma = append_final(&sigma, sites[idx])?;
    }
    Ok(sigma)
}

/// Permutation to tree path; inverse of [`decode`].
pub fn encode(family: &FamilySpec, sigma: &Permutation) -> Result<ColoredLabelSeq> {
    if !family.is_member(sigma) {
        return Err(Error::NotInFamily(sigma.to_string(), family.id.as_str()));
    }
    let mut labels = vec![ColoredLabel::plain(family.root_label)];
    if family.virtual_root {
        labels.push(family.first_label());
    }
    let s = sigma.values();
    let mut prefix = Permutation::identity(1);
    for i in 1..s.len() {
        let next = standardize(&s[..=i])?;
        let m = next.last() as usize;
        let sites = active_sites(&prefix, family);
        let idx = sites.iter().position(|&x| x == m).ok_or_else(|| {
            Error::Internal(format!("site {m} of {prefix} is not active"))
        })?;
        let parent = labels.last().unwrap().value;
        let kids = family.rule_children(parent)?;
        if kids.len() != sites.len() {
            return Err(Error::Internal(format!(
                "{prefix} has {} active sites but label {parent} has {} children",
                sites.len(),
                kids.len()
            )));
        }
        labels.push(kids[idx]);
        prefix = next;
    }
    Ok(ColoredLabelSeq { labels })
}

/// Default bound on the number of sequences materialized at one level.
pub const DEFAULT_LEVEL_CAP: usize = 10_000_000;

/// All tree paths encoding permutations of the given size.
pub fn enumerate_level(family: &FamilySpec, size: usize, cap: usize) -> Result<Vec<ColoredLabelSeq>> {
    if size == 0 {
        return Err(Error::Config("size must be at least 1".into()));
    }
    let count = level_count(family, size);
    if count > cap as u128 {
        return Err(Error::Resource(format!(
            "level {size} of {} has {count} sequences, above the cap {cap}",
            family.id
        )));
    }
    let mut prefix = vec![ColoredLabel::plain(family.root_label)];
    if family.virtual_root {
        prefix.push(family.first_label());
    }
    let target = family.effective_length(size);
    let mut out = Vec::with_capacity(count as usize);
    let mut stack = prefix;
    grow(family, target, &mut stack, &mut out)?;
    Ok(out)
}

fn grow(
    family: &FamilySpec,
    target: usize,
    stack: &mut Vec<ColoredLabel>,
    out: &mut Vec<ColoredLabelSeq>,
) -> Result<()> {
    if stack.len() == target {
        out.push(ColoredLabelSeq { labels: stack.clone() });
        return Ok(());
    }
    let k = stack.last().unwrap().value;
    for child in family.rule_children(k)? {
        stack.push(child);
        grow(family, target, stack, out)?;
        stack.pop();
    }
    Ok(())
}

/// Number of tree paths of the given size, by dynamic programming on labels.
pub fn level_count(family: &FamilySpec, size: usize) -> u128 {
    use std::collections::BTreeMap;
    let mut level: BTreeMap<i64, u128> = BTreeMap::new();
    level.insert(family.first_label().value, 1);
    for _ in 1..size {
        let mut next = BTreeMap::new();
        for (&k, &c) in &level {
            for child in family.rule_children(k).expect("reachable label") {
                *next.entry(child.value).or_insert(0) += c;
            }
        }
        level = next;
    }
    level.values().sum()
}
