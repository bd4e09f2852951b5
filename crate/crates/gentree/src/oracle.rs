//! Brute-force ground truth: exhaustive enumeration of small levels,
//! exact laws, and checks of the bijection and of the samplers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::family::{active_sites, FamilyId, FamilySpec};
use crate::perm::{append_final, c_occ, Permutation};
use crate::rng::stream;
use crate::tree::{decode, encode, enumerate_level, level_count, DEFAULT_LEVEL_CAP};
use crate::walk::{PermutationSampler, SamplerKind};

/// Largest size accepted by [`brute_enumerate`].
pub const MAX_BRUTE_SIZE: usize = 12;
/// Largest size accepted by [`filter_enumerate`].
pub const MAX_FILTER_SIZE: usize = 9;

/// All members of a family of one size, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactLevel {
    pub family: FamilyId,
    pub n: usize,
    pub members: Vec<Permutation>,
    pub count: usize,
}

impl ExactLevel {
    fn from_members(family: FamilyId, n: usize, mut members: Vec<Permutation>) -> Self {
        members.sort_unstable();
        let count = members.len();
        ExactLevel { family, n, members, count }
    }

    /// One permutation per line in one-line notation.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for p in &self.members {
            let _ = writeln!(out, "{p}");
        }
        out
    }
}

/// Members of size `n`, grown from size 1 by appending a final value at
/// every membership-tested active site.
pub fn brute_enumerate(family: &FamilySpec, n: usize) -> Result<ExactLevel> {
    if n == 0 || n > MAX_BRUTE_SIZE {
        return Err(Error::Resource(format!("brute enumeration needs 1 <= n <= {MAX_BRUTE_SIZE}")));
    }
    let mut level = vec![Permutation::identity(1)];
    for _ in 1..n {
        level = level
            .par_iter()
            .flat_map_iter(|sigma| {
                active_sites(sigma, family)
                    .into_iter()
                    .map(move |m| append_final(sigma, m).expect("site in range"))
            })
            .collect();
    }
    Ok(ExactLevel::from_members(family.id, n, level))
}

/// Members of size `n` by testing every permutation of `1..n`.
pub fn filter_enumerate(family: &FamilySpec, n: usize) -> Result<ExactLevel> {
    if n == 0 || n > MAX_FILTER_SIZE {
        return Err(Error::Resource(format!("filter enumeration needs 1 <= n <= {MAX_FILTER_SIZE}")));
    }
    let members = Permutation::all(n).into_par_iter().filter(|p| family.is_member(p)).collect();
    Ok(ExactLevel::from_members(family.id, n, members))
}

#[derive(Clone, Debug, Serialize)]
pub struct BijectionReport {
    pub family: FamilyId,
    pub n: usize,
    pub tree_paths: usize,
    pub members: usize,
    /// Number of members predicted by the label recursion alone.
    pub label_count: u128,
    pub passed: bool,
    pub counterexample: Option<String>,
}

/// Checks that decoding the level of the tree gives exactly the members,
/// and that encode and decode are inverse to each other.
pub fn verify_bijection(family: &FamilySpec, n: usize) -> Result<BijectionReport> {
    let paths = enumerate_level(family, n, DEFAULT_LEVEL_CAP)?;
    let level = brute_enumerate(family, n)?;
    let mut report = BijectionReport {
        family: family.id,
        n,
        tree_paths: paths.len(),
        members: level.count,
        label_count: level_count(family, n),
        passed: false,
        counterexample: None,
    };
    let decoded: Vec<Permutation> = paths
        .par_iter()
        .map(|s| decode(family, s))
        .collect::<Result<_>>()?;
    for (s, p) in paths.iter().zip(&decoded) {
        let back = encode(family, p)?;
        if &back != s {
            report.counterexample = Some(format!("encode(decode({s})) = {back}"));
            return Ok(report);
        }
    }
    let set: BTreeSet<&Permutation> = decoded.iter().collect();
    if set.len() != decoded.len() {
        report.counterexample = Some("two tree paths decode to the same permutation".into());
        return Ok(report);
    }
    if let Some(p) = level.members.iter().find(|p| !set.contains(p)) {
        report.counterexample = Some(format!("{p} is not reached by any tree path"));
        return Ok(report);
    }
    if let Some(p) = decoded.iter().find(|p| level.members.binary_search(p).is_err()) {
        report.counterexample = Some(format!("{p} is decoded but not a member"));
        return Ok(report);
    }
    if report.label_count != level.count as u128 {
        report.counterexample = Some(format!(
            "label recursion gives {} but there are {} members",
            report.label_count, level.count
        ));
        return Ok(report);
    }
    report.passed = true;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub family: FamilyId,
    pub n: usize,
    pub sampler: SamplerKind,
    pub classes: usize,
    pub trials: u64,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Empirical law over the members.
    #[serde(skip)]
    pub frequencies: BTreeMap<Permutation, u64>,
}

/// Samples per random stream in [`verify_sampler`].
const SAMPLER_CHUNK: u64 = 1024;

/// Chi-square test of the sampled law against the uniform law on the
/// level, which needs an expected count of at least 20 per member.
pub fn verify_sampler(
    family: FamilyId,
    n: usize,
    trials: u64,
    kind: SamplerKind,
    seed: u64,
) -> Result<ChiSquareReport> {
    let level = brute_enumerate(family.spec(), n)?;
    if (level.count as u64) * 20 > trials {
        return Err(Error::Config(format!(
            "{trials} trials give fewer than 20 expected samples for each of {} members",
            level.count
        )));
    }
    let sampler = PermutationSampler::with_kind(family, n, kind)?;
    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(SAMPLER_CHUNK))
        .map(|i| (i, SAMPLER_CHUNK.min(trials - i * SAMPLER_CHUNK)))
        .collect();
    let parts: Vec<HashMap<Permutation, u64>> = chunks
        .into_par_iter()
        .map(|(i, count)| {
            let mut rng = stream(seed, i);
            let mut freq = HashMap::new();
            for _ in 0..count {
                *freq.entry(sampler.sample(&mut rng)?).or_insert(0) += 1;
            }
            Ok(freq)
        })
        .collect::<Result<_>>()?;
    let mut frequencies: BTreeMap<Permutation, u64> =
        level.members.iter().map(|p| (p.clone(), 0)).collect();
    for part in parts {
        for (p, c) in part {
            match frequencies.get_mut(&p) {
                Some(slot) => *slot += c,
                None => return Err(Error::Internal(format!("sampled {p}, which is not a member"))),
            }
        }
    }
    let expected = trials as f64 / level.count as f64;
    let statistic: f64 = frequencies
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = level.count.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
    };
    Ok(ChiSquareReport { family, n, sampler: kind, classes: level.count, trials, statistic, dof, p_value, frequencies })
}

/// Exact law of the number of consecutive occurrences of `pi` in a
/// uniform member of size `n`.
pub fn exact_ccocc_pmf(family: &FamilySpec, n: usize, pi: &Permutation) -> Result<BTreeMap<usize, f64>> {
    let level = brute_enumerate(family, n)?;
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for sigma in &level.members {
        *counts.entry(c_occ(pi, sigma)).or_default() += 1;
    }
    let total = level.count as f64;
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect())
}

/// Mean of a law on the integers.
pub fn pmf_mean(pmf: &BTreeMap<usize, f64>) -> f64 {
    pmf.iter().map(|(&k, &p)| k as f64 * p).sum()
}

/// Lattice paths from `(0, 0)` to `(n, floor(n / 2))` with unit east and
/// north steps that never rise above the line `y = x / 2`.
pub fn half_slope_paths(n: usize) -> u128 {
    let top = n / 2;
    // ways[y] counts paths to (x, y); entering column x by an east step
    // keeps the vector, then north steps are added within the column
    let mut ways = vec![0u128; top + 1];
    ways[0] = 1;
    for x in 0..=n {
        for y in 1..=top {
            if 2 * y <= x {
                ways[y] += ways[y - 1];
            } else {
                ways[y] = 0;
            }
        }
    }
    ways[top]
}

/// Level counts as CSV rows `n,family,count`.
pub fn counts_csv(families: &[FamilyId], sizes: std::ops::RangeInclusive<usize>) -> Result<String> {
    let mut out = String::from("n,family,count\n");
    for n in sizes {
        for &f in families {
            let c = brute_enumerate(f.spec(), n)?.count;
            let _ = writeln!(out, "{n},{f},{c}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(brute_enumerate(FamilyId::Av123.spec(), 3).unwrap().count, 5);
        assert_eq!(brute_enumerate(FamilyId::Av1423_4123.spec(), 4).unwrap().count, 22);
        for f in FamilyId::ALL {
            assert_eq!(brute_enumerate(f.spec(), 1).unwrap().count, 1);
        }
        assert!(brute_enumerate(FamilyId::Av123.spec(), 13).is_err());
    }

    #[test]
    fn growth_matches_filter() {
        for f in FamilyId::ALL {
            for n in 1..=6 {
                assert_eq!(brute_enumerate(f.spec(), n).unwrap(), filter_enumerate(f.spec(), n).unwrap());
            }
        }
    }

    #[test]
    fn lattice_paths() {
        let got: Vec<u128> = (1..=7).map(half_slope_paths).collect();
        assert_eq!(got, vec![1, 1, 2, 3, 7, 12, 30]);
    }

    #[test]
    fn pmf_of_trivial_pattern() {
        let pmf = exact_ccocc_pmf(FamilyId::Av132.spec(), 5, &Permutation::identity(1)).unwrap();
        assert_eq!(pmf.len(), 1);
        assert_eq!(pmf[&5], 1.0);
    }

    #[test]
    fn underpowered_sampler_check() {
        let r = verify_sampler(FamilyId::Av123, 5, 100, SamplerKind::Cycle, 1);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
