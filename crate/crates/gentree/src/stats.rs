//! Constants of the consecutive-pattern central limit theorem, computed as
//! truncated sums over colored jump tuples with rigorous error intervals,
//! and the Monte-Carlo estimators used to check them.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::family::FamilyId;
use crate::growth::Grower;
use crate::pat::{pat, push_jump, PatOracle};
use crate::perm::{c_occ, Permutation};
use crate::rng::stream;
use crate::tree::ColoredJump;
use crate::walk::{solve_pq, PermutationSampler, StepSampler, WalkParams};

/// Closed interval of reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "[{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[x - r, x + r]`.
    pub fn around(x: f64, r: f64) -> Self {
        Interval::new(x - r, x + r)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Whether `other` lies inside `self`, up to `slack`.
    pub fn encloses(&self, other: &Interval, slack: f64) -> bool {
        self.lo - slack <= other.lo && other.hi <= self.hi + slack
    }

    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::new(self.lo * k, self.hi * k)
        } else {
            Interval::new(self.hi * k, self.lo * k)
        }
    }

    pub fn square(self) -> Interval {
        if self.lo >= 0.0 {
            Interval::new(self.lo * self.lo, self.hi * self.hi)
        } else if self.hi <= 0.0 {
            Interval::new(self.hi * self.hi, self.lo * self.lo)
        } else {
            Interval::new(0.0, (self.lo * self.lo).max(self.hi * self.hi))
        }
    }

    /// Widens both ends by a relative rounding allowance.
    fn padded(self) -> Interval {
        let eps = 4.0 * f64::EPSILON * (self.lo.abs().max(self.hi.abs()) + 1e-300);
        Interval::new(self.lo - eps, self.hi + eps)
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;

    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;

    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval::new(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// A colored jump tuple with its probability under the i.i.d. step law.
#[derive(Clone, Debug)]
pub struct WeightedTuple {
    pub jumps: Vec<ColoredJump>,
    pub mass: f64,
}

/// All tuples of length `h` over the jumps `y >= -depth`, grouped by
/// the pattern they induce.
#[derive(Clone, Debug)]
pub struct PatternTable {
    pub family: FamilyId,
    pub h: usize,
    pub depth: i64,
    pub classes: BTreeMap<Permutation, Vec<WeightedTuple>>,
    /// Probability that one step is below `-depth`.
    pub step_tail: f64,
}

impl PatternTable {
    pub fn build(w: &WalkParams, h: usize, depth: i64) -> Result<Self> {
        if h == 0 || depth < 1 {
            return Err(Error::Config("need h >= 1 and truncation depth >= 1".into()));
        }
        let oracle = PatOracle::new(w.family, h, -depth)?;
        let alphabet: Vec<(ColoredJump, f64)> = w
            .colored_alphabet(-depth)
            .into_iter()
            .map(|j| (j, w.colored_mass(j)))
            .collect();
        let parts: Vec<Vec<(Permutation, WeightedTuple)>> = alphabet
            .par_iter()
            .map(|&(first, m)| {
                let mut g = oracle.start();
                let mut out = Vec::new();
                let mut prefix = vec![first];
                push_jump(&mut g, first).expect("jump from a high label");
                walk_tuples(&g, &alphabet, h, &mut prefix, m, &mut out);
                out
            })
            .collect();
        let mut classes: BTreeMap<Permutation, Vec<WeightedTuple>> = BTreeMap::new();
        for (p, t) in parts.into_iter().flatten() {
            classes.entry(p).or_default().push(t);
        }
        Ok(PatternTable { family: w.family, h, depth, classes, step_tail: w.tail_below(-depth) })
    }

    pub fn tuples_of(&self, pi: &Permutation) -> &[WeightedTuple] {
        self.classes.get(pi).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Mass not covered by tuples of length `len`.
    pub fn uncovered(&self, len: usize) -> f64 {
        -(len as f64 * (-self.step_tail).ln_1p()).exp_m1()
    }
}

fn walk_tuples(
    g: &Grower,
    alphabet: &[(ColoredJump, f64)],
    h: usize,
    prefix: &mut Vec<ColoredJump>,
    mass: f64,
    out: &mut Vec<(Permutation, WeightedTuple)>,
) {
    if prefix.len() == h {
        out.push((g.last_pattern(h), WeightedTuple { jumps: prefix.clone(), mass }));
        return;
    }
    for &(j, m) in alphabet {
        let mut next = g.clone();
        push_jump(&mut next, j).expect("jump from a high label");
        prefix.push(j);
        walk_tuples(&next, alphabet, h, prefix, mass * m, out);
        prefix.pop();
    }
}

/// `P(Pat = pi)` as `[sum, sum + uncovered mass]`.
pub fn mu(w: &WalkParams, pi: &Permutation, depth: i64) -> Result<Interval> {
    let table = PatternTable::build(w, pi.len(), depth)?;
    Ok(mu_from_table(&table, pi))
}

fn mu_from_table(table: &PatternTable, pi: &Permutation) -> Interval {
    let s: f64 = table.tuples_of(pi).iter().map(|t| t.mass).sum();
    Interval::new(s, s + table.uncovered(table.h)).padded()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TruncatedSum,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternStats {
    pub family: FamilyId,
    pub pi: Permutation,
    /// Jumps below `-truncation` are left out of the sums.
    pub truncation: i64,
    pub mu: Interval,
    pub sigma2_step: f64,
    pub rho: Interval,
    /// `E[1{Pat = pi} (X_{h+1} + 1)]` for the walk started at `-1`.
    pub rho_from_positions: Interval,
    pub nu: Interval,
    pub beta2: Interval,
    pub gamma2: Interval,
    pub method: Method,
    /// Probability that a single step is below the truncation.
    pub truncation_bound: f64,
}

/// All constants of the limit theorem for `pi`.
pub fn gamma_sq(w: &WalkParams, pi: &Permutation, depth: i64) -> Result<PatternStats> {
    let table = PatternTable::build(w, pi.len(), depth)?;
    Ok(gamma_sq_from_table(w, &table, pi))
}

pub fn gamma_sq_from_table(w: &WalkParams, table: &PatternTable, pi: &Permutation) -> PatternStats {
    let h = pi.len();
    let members = table.tuples_of(pi);
    let mu = mu_from_table(table, pi);

    // rho: the truncated sum misses E[1 * sum Y; some Y_j < -M], bounded
    // by sum_j sum_i E[|Y_i|; Y_j < -M].
    let floor = -table.depth;
    let t0 = table.step_tail;
    let t1 = w.abs_tail_below(floor);
    let hf = h as f64;
    let rho_slack = hf * t1 + hf * (hf - 1.0) * w.mean_abs() * t0;
    let rho_sum: f64 = members
        .iter()
        .map(|t| t.mass * t.jumps.iter().map(|j| j.step).sum::<i64>() as f64)
        .sum();
    let rho = Interval::around(rho_sum, rho_slack).padded();
    let rho_pos_sum: f64 = members
        .iter()
        .map(|t| {
            let mut x = -1i64;
            for j in &t.jumps {
                x += j.step;
            }
            t.mass * (x + 1) as f64
        })
        .sum();
    let rho_from_positions = Interval::around(rho_pos_sum, rho_slack).padded();

    // nu: pairs of member tuples overlapping on h - s + 1 jumps
    let mut nu_sum = 0.0;
    let mut nu_slack = 0.0;
    for s in 2..=h {
        let overlap = h - s + 1;
        let mut by_prefix: HashMap<&[ColoredJump], f64> = HashMap::new();
        for t in members {
            let suffix_mass: f64 =
                t.jumps[overlap..].iter().map(|&j| w.colored_mass(j)).product();
            *by_prefix.entry(&t.jumps[..overlap]).or_default() += suffix_mass;
        }
        for t in members {
            if let Some(m) = by_prefix.get(&t.jumps[s - 1..]) {
                nu_sum += t.mass * m;
            }
        }
        nu_slack += table.uncovered(h + s - 1);
    }
    let nu = Interval::new(nu_sum, nu_sum + nu_slack).padded();

    let beta2 = (nu.scale(2.0) + mu - mu.square().scale((2 * h - 1) as f64)).padded();
    let gamma2 = (beta2 - rho.square().scale(1.0 / w.variance)).padded();
    PatternStats {
        family: w.family,
        pi: pi.clone(),
        truncation: table.depth,
        mu,
        sigma2_step: w.variance,
        rho,
        rho_from_positions,
        nu,
        beta2,
        gamma2,
        method: Method::TruncatedSum,
        truncation_bound: t0,
    }
}

/// Monte-Carlo estimate of `P(Pat = pi)` from i.i.d. jump tuples, with
/// its standard error.
pub fn mu_monte_carlo(w: &WalkParams, pi: &Permutation, trials: u64, seed: u64) -> Result<(f64, f64)> {
    let family = w.family.spec();
    let steps = StepSampler::new(w);
    let hits: Result<Vec<u64>> = chunks(trials)
        .into_par_iter()
        .map(|(idx, count)| {
            let mut rng = stream(seed, idx);
            let mut hits = 0u64;
            let mut js = vec![ColoredJump::plain(0); pi.len()];
            for _ in 0..count {
                for j in js.iter_mut() {
                    *j = steps.sample(&mut rng);
                }
                if pat(family, &js)? == *pi {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let p = hits?.iter().sum::<u64>() as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

const CHUNK: u64 = 4096;

/// Splits `total` into `(stream index, count)` pieces of fixed size, so
/// results do not depend on the number of worker threads.
fn chunks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK)).map(|i| (i, CHUNK.min(total - i * CHUNK))).collect()
}

/// Empirical law of the pattern of `2h + 1` i.i.d. colored jumps: the
/// restriction to radius `h` of the limiting rooted total order.
pub fn limit_order_restriction(
    w: &WalkParams,
    h: usize,
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<Permutation, f64>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let family = w.family.spec();
    let steps = StepSampler::new(w);
    let len = 2 * h + 1;
    let parts: Result<Vec<HashMap<Permutation, u64>>> = chunks(trials)
        .into_par_iter()
        .map(|(idx, count)| {
            let mut rng = stream(seed, idx);
            let mut freq = HashMap::new();
            let mut js = vec![ColoredJump::plain(0); len];
            for _ in 0..count {
                for j in js.iter_mut() {
                    *j = steps.sample(&mut rng);
                }
                *freq.entry(pat(family, &js)?).or_insert(0u64) += 1;
            }
            Ok(freq)
        })
        .collect();
    let mut counts: BTreeMap<Permutation, u64> = BTreeMap::new();
    for part in parts? {
        for (p, c) in part {
            *counts.entry(p).or_default() += c;
        }
    }
    Ok(counts.into_iter().map(|(p, c)| (p, c as f64 / trials as f64)).collect())
}

/// Empirical law of the pattern on the `2h + 1` positions centred at
/// `n / 2` in uniform permutations of size `n`.
pub fn middle_window_law(
    family: FamilyId,
    n: usize,
    h: usize,
    reps: u64,
    seed: u64,
) -> Result<BTreeMap<Permutation, f64>> {
    let len = 2 * h + 1;
    if n < len {
        return Err(Error::Config(format!("size {n} is shorter than the window {len}")));
    }
    let sampler = PermutationSampler::new(family, n)?;
    let start = n / 2 - h.min(n / 2);
    let pats: Result<Vec<Permutation>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r);
            let sigma = sampler.sample(&mut rng)?;
            crate::perm::standardize(&sigma.values()[start..start + len])
        })
        .collect();
    let mut counts: BTreeMap<Permutation, u64> = BTreeMap::new();
    for p in pats? {
        *counts.entry(p).or_default() += 1;
    }
    Ok(counts.into_iter().map(|(p, c)| (p, c as f64 / reps as f64)).collect())
}

/// Total variation distance between two laws on a discrete set.
pub fn total_variation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut d = 0.0;
    for (k, &pa) in a {
        d += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &pb) in b {
        if !a.contains_key(k) {
            d += pb;
        }
    }
    0.5 * d
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub family: FamilyId,
    pub pi: Permutation,
    pub n: usize,
    pub reps: usize,
    /// Centering constant used for the samples.
    pub mu: f64,
    /// Variance of the reference normal law.
    pub gamma2: f64,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    pub mean_bootstrap_se: f64,
    pub variance_bootstrap_se: f64,
    /// Kolmogorov-Smirnov distance to the centred normal law with
    /// variance `gamma2`.
    pub ks_distance: f64,
}

/// Normalized pattern counts `(c-occ(pi, sigma) - n mu) / sqrt(n)` of
/// uniform permutations of size `n`, one random stream per replicate.
pub fn clt_sample(
    family: FamilyId,
    pi: &Permutation,
    n: usize,
    reps: usize,
    mu: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    let sampler = PermutationSampler::new(family, n)?;
    let root = (n as f64).sqrt();
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r);
            let sigma = sampler.sample(&mut rng)?;
            Ok((c_occ(pi, &sigma) as f64 - n as f64 * mu) / root)
        })
        .collect()
}

/// Number of bootstrap resamples in [`normality_report`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub fn normality_report(
    family: FamilyId,
    pi: &Permutation,
    n: usize,
    mu: f64,
    gamma2: f64,
    values: &[f64],
    seed: u64,
) -> NormalityReport {
    let (mean, variance) = mean_var(values);
    let reps = values.len();
    let mut rng = stream(seed, u64::MAX);
    let mut means = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut vars = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0; reps];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for x in resample.iter_mut() {
            *x = values[rng.random_range(0..reps)];
        }
        let (m, v) = mean_var(&resample);
        means.push(m);
        vars.push(v);
    }
    NormalityReport {
        family,
        pi: pi.clone(),
        n,
        reps,
        mu,
        gamma2,
        mean,
        variance,
        mean_se: (variance / reps as f64).sqrt(),
        mean_bootstrap_se: mean_var(&means).1.sqrt(),
        variance_bootstrap_se: mean_var(&vars).1.sqrt(),
        ks_distance: ks_to_normal(values, gamma2),
    }
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and
/// the centred normal law of the given variance (a point mass at zero
/// when the variance vanishes).
pub fn ks_to_normal(xs: &[f64], variance: f64) -> f64 {
    let n = xs.len() as f64;
    if variance <= 0.0 {
        let below = xs.iter().filter(|&&x| x < 0.0).count() as f64;
        let above = xs.iter().filter(|&&x| x > 0.0).count() as f64;
        return (below / n).max(above / n);
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Fraction of walks whose positions stay above `level` on the whole
/// time range `[a_n, n - a_n]`, with `a_n = floor(n^(1/3))`.
pub fn high_label_fraction(family: FamilyId, n: usize, level: i64, reps: u64, seed: u64) -> Result<f64> {
    let sampler = PermutationSampler::new(family, n)?;
    let a = (n as f64).cbrt().floor() as usize;
    let hits: Result<Vec<bool>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r);
            let labels = sampler.sample_labels(&mut rng)?;
            // labels[i] sits at position i + 1 of the permutation
            Ok((a.max(1)..=n - a).all(|i| labels[i - 1].value > level))
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&b| b).count() as f64 / reps as f64)
}

/// Convenience: walk law and pattern constants in one call.
pub fn pattern_stats(family: FamilyId, pi: &Permutation, depth: i64) -> Result<PatternStats> {
    let w = solve_pq(family.spec())?;
    gamma_sq(&w, pi, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn interval_arithmetic() {
        let a = Interval::new(-1.0, 2.0);
        assert_eq!(a.square(), Interval::new(0.0, 4.0));
        assert_eq!(a * Interval::new(3.0, 4.0), Interval::new(-4.0, 8.0));
        assert_eq!(a - Interval::point(1.0), Interval::new(-2.0, 1.0));
        assert_eq!(a.scale(-1.0), Interval::new(-2.0, 1.0));
        assert!(a.encloses(&Interval::new(0.0, 1.0), 0.0));
    }

    #[test]
    fn trivial_pattern() {
        for f in [FamilyId::Av123, FamilyId::FamB] {
            let w = solve_pq(f.spec()).unwrap();
            let s = gamma_sq(&w, &perm("1"), 40).unwrap();
            assert!(s.mu.contains(1.0));
            assert!(s.nu.contains(0.0));
            assert!(s.rho.width() < 1e-8 && s.rho.contains(0.0));
            assert!(s.gamma2.contains(0.0) && s.gamma2.width() < 1e-8);
        }
    }

    #[test]
    fn mu_totals() {
        let w = solve_pq(FamilyId::Av123.spec()).unwrap();
        let table = PatternTable::build(&w, 3, 12).unwrap();
        let lower: f64 = Permutation::all(3).iter().map(|p| mu_from_table(&table, p).lo).sum();
        assert!(lower <= 1.0 + 1e-12 && lower >= 1.0 - 3.0 * table.step_tail, "{lower}");
        let mid: f64 = Permutation::all(3).iter().map(|p| mu_from_table(&table, p).mid()).sum();
        assert!((mid - 1.0).abs() <= 6.0 * table.uncovered(3), "{mid}");
    }

    #[test]
    fn nu_matches_direct_enumeration() {
        for f in [FamilyId::Av123, FamilyId::Av1423_4123, FamilyId::FamB] {
            let w = solve_pq(f.spec()).unwrap();
            let depth = 4;
            let alphabet = w.colored_alphabet(-depth);
            for pi in Permutation::all(3) {
                let table = PatternTable::build(&w, 3, depth).unwrap();
                let stats = gamma_sq_from_table(&w, &table, &pi);
                let spec = f.spec();
                let mut direct = 0.0;
                for s in 2..=3usize {
                    let len = 3 + s - 1;
                    let mut idx = vec![0usize; len];
                    loop {
                        let js: Vec<ColoredJump> = idx.iter().map(|&i| alphabet[i]).collect();
                        if pat(spec, &js[..3]).unwrap() == pi && pat(spec, &js[s - 1..]).unwrap() == pi {
                            direct += js.iter().map(|&j| w.colored_mass(j)).product::<f64>();
                        }
                        let mut k = 0;
                        while k < len {
                            idx[k] += 1;
                            if idx[k] < alphabet.len() {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                        if k == len {
                            break;
                        }
                    }
                }
                assert!((stats.nu.lo - direct).abs() < 1e-12, "{f} {pi}: {} vs {direct}", stats.nu.lo);
            }
        }
    }

    #[test]
    fn intervals_nest_with_depth() {
        let w = solve_pq(FamilyId::Av1423_4123.spec()).unwrap();
        let pi = perm("12");
        let mut prev: Option<PatternStats> = None;
        for depth in [4, 8, 16, 32] {
            let s = gamma_sq(&w, &pi, depth).unwrap();
            assert!(s.rho.encloses(&s.rho_from_positions, 1e-15));
            if let Some(p) = &prev {
                for (a, b) in [(p.mu, s.mu), (p.nu, s.nu), (p.rho, s.rho), (p.gamma2, s.gamma2)] {
                    assert!(a.encloses(&b, 1e-14), "{a:?} {b:?} at {depth}");
                }
            }
            prev = Some(s);
        }
    }

    #[test]
    fn ks_distance() {
        assert_eq!(ks_to_normal(&[0.0, 0.0], 0.0), 0.0);
        let xs: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0 - 0.5).collect();
        assert!(ks_to_normal(&xs, 1.0) > 0.2);
    }
}
