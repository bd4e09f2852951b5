//! Permutations in one-line notation, standardization, patterns and
//! consecutive occurrences.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n` in one-line notation, `n >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            let v = v as usize;
            if v == 0 || v > n || seen[v] {
                return Err(Error::NotAPermutation(n));
            }
            seen[v] = true;
        }
        Ok(Permutation(values))
    }

    /// Caller guarantees `values` is a bijection on `1..=len`.
    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation(values)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations have size at least 1");
        Permutation((1..=n as u32).collect())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value at 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    pub fn last(&self) -> u32 {
        *self.0.last().expect("nonempty")
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation(inv)
    }

    /// All permutations of size `n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<u32> = (1..=n as u32).collect();
        let mut out = vec![Permutation(cur.clone())];
        while next_lex(&mut cur) {
            out.push(Permutation(cur.clone()));
        }
        out
    }
}

fn next_lex(a: &mut [u32]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.0
    }
}

/// Digits run together when every value is a single digit (`13254`),
/// space separated otherwise.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.0 {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let mut first = true;
            for v in &self.0 {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Empty);
        }
        let values: Option<Vec<u32>> = if s.contains(|c: char| c.is_whitespace() || c == ',') {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>().ok())
                .collect()
        } else {
            s.chars().map(|c| c.to_digit(10).filter(|&d| d > 0)).collect()
        };
        let values = values.ok_or_else(|| Error::Parse(format!("bad permutation `{s}`")))?;
        Permutation::new(values).map_err(|_| Error::Parse(format!("`{s}` is not a permutation")))
    }
}

/// The permutation with the same relative order as `xs`.
pub fn standardize<T: PartialOrd + Copy>(xs: &[T]) -> Result<Permutation> {
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    let mut incomparable = false;
    idx.sort_by(|&a, &b| {
        xs[a].partial_cmp(&xs[b]).unwrap_or_else(|| {
            incomparable = true;
            Ordering::Equal
        })
    });
    if incomparable {
        return Err(Error::Parse("entries are not comparable".into()));
    }
    let mut out = vec![0u32; xs.len()];
    for (rank, &i) in idx.iter().enumerate() {
        if rank > 0 && xs[idx[rank - 1]].partial_cmp(&xs[i]) != Some(Ordering::Less) {
            return Err(Error::DuplicateEntries);
        }
        out[i] = rank as u32 + 1;
    }
    Ok(Permutation(out))
}

/// Strictly increasing 1-based positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty);
        }
        if indices[0] == 0 || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(
                "indices must be positive and strictly increasing".into(),
            ));
        }
        Ok(IndexSet(indices))
    }

    /// The interval `[start, start+len-1]`.
    pub fn interval(start: usize, len: usize) -> Result<Self> {
        IndexSet::new((start..start + len).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

pub fn pat_at(sigma: &Permutation, set: &IndexSet) -> Result<Permutation> {
    let n = sigma.len();
    if let Some(&bad) = set.0.iter().find(|&&i| i > n) {
        return Err(Error::OutOfRange { index: bad, len: n });
    }
    let xs: Vec<u32> = set.0.iter().map(|&i| sigma.at(i)).collect();
    standardize(&xs)
}

/// Number of windows of `sigma` whose pattern is `pi`.
///
/// A window starting at `i` matches iff the entries at offsets
/// `pi^{-1}(1), pi^{-1}(2), ...` increase.
pub fn c_occ(pi: &Permutation, sigma: &Permutation) -> usize {
    let k = pi.len();
    let n = sigma.len();
    if k > n {
        return 0;
    }
    let order: Vec<usize> = pi.inverse().0.iter().map(|&p| p as usize - 1).collect();
    let s = &sigma.0;
    (0..=n - k)
        .filter(|&i| order.windows(2).all(|w| s[i + w[0]] < s[i + w[1]]))
        .count()
}

/// Same count, computed by standardizing every window.
pub fn c_occ_by_definition(pi: &Permutation, sigma: &Permutation) -> usize {
    let k = pi.len();
    let n = sigma.len();
    if k > n {
        return 0;
    }
    (0..=n - k)
        .filter(|&i| standardize(&sigma.0[i..i + k]).expect("distinct") == *pi)
        .count()
}

/// Classical containment by backtracking over increasing index choices.
pub fn contains(pi: &Permutation, sigma: &Permutation) -> bool {
    let k = pi.len();
    if k > sigma.len() {
        return false;
    }
    let mut chosen = Vec::with_capacity(k);
    extend_occurrence(&pi.0, &sigma.0, 0, &mut chosen)
}

fn extend_occurrence(pi: &[u32], s: &[u32], from: usize, chosen: &mut Vec<u32>) -> bool {
    let d = chosen.len();
    if d == pi.len() {
        return true;
    }
    let remaining = pi.len() - d;
    for i in from..=s.len() - remaining {
        let v = s[i];
        if chosen
            .iter()
            .zip(&pi[..d])
            .all(|(&c, &pc)| (c < v) == (pc < pi[d]))
        {
            chosen.push(v);
            if extend_occurrence(pi, s, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Calls `visit` with the values of every occurrence of `pi` in `s`.
pub(crate) fn for_each_occurrence(pi: &[u32], s: &[u32], mut visit: impl FnMut(&[u32])) {
    if pi.len() > s.len() || pi.is_empty() {
        return;
    }
    let mut chosen = Vec::with_capacity(pi.len());
    visit_rec(pi, s, 0, &mut chosen, &mut visit);
}

fn visit_rec(
    pi: &[u32],
    s: &[u32],
    from: usize,
    chosen: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]),
) {
    let d = chosen.len();
    if d == pi.len() {
        visit(chosen);
        return;
    }
    let remaining = pi.len() - d;
    for i in from..=s.len() - remaining {
        let v = s[i];
        if chosen
            .iter()
            .zip(&pi[..d])
            .all(|(&c, &pc)| (c < v) == (pc < pi[d]))
        {
            chosen.push(v);
            visit_rec(pi, s, i + 1, chosen, visit);
            chosen.pop();
        }
    }
}

/// Avoidance constraints: a classical pattern, or one of the two barred
/// descent conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneralizedPattern {
    Classical(Permutation),
    /// Every descent `i` has some `j < i` with `s_i > s_j > s_{i+1}`.
    Barred231,
    /// Every descent `i` has an odd number of such `j`.
    BarredOdd231,
}

/// Number of `j < i` with `s[i] > s[j] > s[i+1]` (0-based `i`).
pub(crate) fn descent_witnesses(s: &[u32], i: usize) -> usize {
    let (hi, lo) = (s[i], s[i + 1]);
    s[..i].iter().filter(|&&x| x < hi && x > lo).count()
}

/// True iff `sigma` avoids the constraint `g`.
pub fn satisfies(sigma: &Permutation, g: &GeneralizedPattern) -> bool {
    let s = &sigma.0;
    match g {
        GeneralizedPattern::Classical(pi) => !contains(pi, sigma),
        GeneralizedPattern::Barred231 => (0..s.len().saturating_sub(1))
            .filter(|&i| s[i] > s[i + 1])
            .all(|i| descent_witnesses(s, i) >= 1),
        GeneralizedPattern::BarredOdd231 => (0..s.len().saturating_sub(1))
            .filter(|&i| s[i] > s[i + 1])
            .all(|i| descent_witnesses(s, i) % 2 == 1),
    }
}

/// Appends a final value equal to `m - 1/2` and standardizes, so the
/// new last entry is `m`.
pub fn append_final(sigma: &Permutation, m: usize) -> Result<Permutation> {
    let n = sigma.len();
    if m == 0 || m > n + 1 {
        return Err(Error::OutOfRange { index: m, len: n + 1 });
    }
    let m = m as u32;
    let mut v: Vec<u32> = sigma.0.iter().map(|&x| if x >= m { x + 1 } else { x }).collect();
    v.push(m);
    Ok(Permutation(v))
}
