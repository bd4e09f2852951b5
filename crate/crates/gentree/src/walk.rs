//! Step laws of the label walks, the tilting-parameter solve, and exact
//! samplers for walks conditioned to stay high and return to the floor.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilySpec, StepShape};
use crate::growth::decode_labels;
use crate::perm::Permutation;
use crate::tree::{ColoredJump, ColoredLabel};

/// `phi(t) = sum_y m_y t^{-y}`, in closed form from the step shape.
pub fn phi(family: &FamilySpec, t: f64) -> Result<f64> {
    check_t(family, t)?;
    let s = family.shape;
    let d = s.down_stride as i32;
    let g0 = s.down_offset as i32;
    Ok(s.up_colors as f64 / t + t.powi(g0) / (1.0 - t.powi(d)))
}

/// Derivative of [`phi`].
pub fn phi_prime(family: &FamilySpec, t: f64) -> Result<f64> {
    check_t(family, t)?;
    Ok(phi_prime_raw(family.shape, t))
}

fn phi_prime_raw(s: StepShape, t: f64) -> f64 {
    let d = s.down_stride as i32;
    let g0 = s.down_offset as i32;
    let td = t.powi(d);
    let denom = (1.0 - td) * (1.0 - td);
    let num = g0 as f64 * t.powi(g0 - 1) * (1.0 - td) + d as f64 * t.powi(g0 + d - 1);
    -(s.up_colors as f64) / (t * t) + num / denom
}

/// `phi` summed term by term from the multiplicities, with the geometric
/// tail bounded below `1e-15`.
pub fn phi_series(family: &FamilySpec, t: f64) -> Result<f64> {
    check_t(family, t)?;
    let mut total = family.shape.multiplicity(1) as f64 / t;
    let mut j = 0i64;
    loop {
        let term = family.shape.multiplicity(-j) as f64 * t.powi(j as i32);
        total += term;
        // remaining terms are at most t^{j+1} / (1 - t)
        if t.powi(j as i32 + 1) / (1.0 - t) < 1e-16 {
            break;
        }
        j += 1;
    }
    Ok(total)
}

fn check_t(family: &FamilySpec, t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "t = {t} outside the convergence interval (0, 1) of phi for {}",
            family.id
        )))
    }
}

/// Closed-form tilting parameters `(t, p)`.
pub fn exact_parameters(family: FamilyId) -> (f64, f64) {
    let s2 = std::f64::consts::SQRT_2;
    let s3 = 3f64.sqrt();
    match family {
        FamilyId::Av123 | FamilyId::Av132 => (0.5, 0.25),
        FamilyId::FamA => (0.5, 1.0 / 3.0),
        FamilyId::FamB => (1.0 / s3, 2.0 / (3.0 * s3)),
        _ => (2.0 - s2, 3.0 - 2.0 * s2),
    }
}

/// The centered step law `alpha_y = p q^y m_y` and its color counts.
#[derive(Clone, Debug, Serialize)]
pub struct WalkParams {
    pub family: FamilyId,
    pub beta: i64,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub mean: f64,
    pub variance: f64,
    pub span: i64,
    #[serde(skip)]
    pub shape: StepShape,
}

/// Serializable view with the mass table truncated at a small tail.
#[derive(Clone, Debug, Serialize)]
pub struct WalkParamsTable {
    pub family: FamilyId,
    pub beta: i64,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: Vec<(i64, f64)>,
    pub colors: Vec<(i64, u32)>,
    pub mean: f64,
    pub variance: f64,
    pub span: i64,
    pub truncation: Truncation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Truncation {
    pub min_step: i64,
    pub tail_mass: f64,
    pub tail_bound: f64,
}

impl WalkParams {
    /// Mass of the (uncolored) step `y`.
    pub fn alpha(&self, y: i64) -> f64 {
        let m = self.shape.multiplicity(y);
        if m == 0 {
            0.0
        } else {
            self.p * self.t.powi(-y as i32) * m as f64
        }
    }

    /// Number of colors of step `y`; zero off the support.
    pub fn colors(&self, y: i64) -> u32 {
        self.shape.multiplicity(y)
    }

    /// Mass of a single colored step.
    pub fn colored_mass(&self, j: ColoredJump) -> f64 {
        let c = self.colors(j.step);
        if c == 0 || j.color == 0 || j.color > c {
            0.0
        } else {
            self.alpha(j.step) / c as f64
        }
    }

    /// Total mass of steps `y < floor`.
    pub fn tail_below(&self, floor: i64) -> f64 {
        let s = self.shape;
        if floor > 1 {
            return 1.0;
        }
        if floor == 1 {
            return 1.0 - self.alpha(1);
        }
        // down steps -(g0 + d j) with g0 + d j > -floor
        let need = -floor + 1 - s.down_offset;
        let j0 = if need <= 0 { 0 } else { (need + s.down_stride - 1) / s.down_stride };
        let r = self.t.powi(s.down_stride as i32);
        self.p * self.t.powi((s.down_offset + s.down_stride * j0) as i32) / (1.0 - r)
    }

    /// `E[|Y|; Y < floor]` for `floor <= 0`.
    pub fn abs_tail_below(&self, floor: i64) -> f64 {
        let s = self.shape;
        let mut total = 0.0;
        let mut depth = s.down_offset;
        while depth < -floor + 1 || depth == 0 {
            depth += s.down_stride;
        }
        loop {
            let term = depth as f64 * self.p * self.t.powi(depth as i32);
            total += term;
            if term < 1e-30 {
                break;
            }
            depth += s.down_stride;
        }
        total
    }

    /// `E|Y|`.
    pub fn mean_abs(&self) -> f64 {
        self.alpha(1) + self.abs_tail_below(1)
    }

    /// Steps with positive mass, from `+1` down to `floor`, each with its
    /// colors.
    pub fn colored_alphabet(&self, floor: i64) -> Vec<ColoredJump> {
        let mut out = Vec::new();
        for y in (floor..=1).rev() {
            for c in 1..=self.colors(y) {
                out.push(ColoredJump::new(y, c));
            }
        }
        out
    }

    pub fn table(&self, tail: f64) -> WalkParamsTable {
        let mut alpha = Vec::new();
        let mut colors = Vec::new();
        let mut y = 1i64;
        let mut remaining = 1.0;
        loop {
            let a = self.alpha(y);
            if a > 0.0 {
                alpha.push((y, a));
                colors.push((y, self.colors(y)));
                remaining -= a;
            }
            if self.tail_below(y) < tail {
                break;
            }
            y -= 1;
        }
        WalkParamsTable {
            family: self.family,
            beta: self.beta,
            t: self.t,
            p: self.p,
            q: self.q,
            alpha,
            colors,
            mean: self.mean,
            variance: self.variance,
            span: self.span,
            truncation: Truncation {
                min_step: y,
                tail_mass: remaining.max(0.0),
                tail_bound: tail,
            },
        }
    }
}

/// Finds the critical point of `phi` by bisection and builds the step law.
pub fn solve_pq(family: &FamilySpec) -> Result<WalkParams> {
    let s = family.shape;
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let (flo, fhi) = (phi_prime_raw(s, lo), phi_prime_raw(s, hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Solver(format!("phi' has no sign change for {}", family.id)));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = phi_prime_raw(s, mid);
        if f == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 && f.abs() < 1e-13 {
            break;
        }
    }
    let t = if phi_prime_raw(s, lo).abs() <= phi_prime_raw(s, hi).abs() { lo } else { hi };
    let residual = phi_prime_raw(s, t);
    if hi - lo >= 1e-14 || residual.abs() >= 1e-13 {
        return Err(Error::Solver(format!(
            "bisection stalled for {} with |phi'| = {residual:e}",
            family.id
        )));
    }
    let p = 1.0 / phi(family, t)?;
    let mut w = WalkParams {
        family: family.id,
        beta: family.beta,
        t,
        p,
        q: 1.0 / t,
        mean: 0.0,
        variance: 0.0,
        span: family.span,
        shape: s,
    };
    let total = w.alpha(1) + w.tail_below(1);
    let (mean, variance) = direct_moments(&w);
    w.mean = mean;
    w.variance = variance;
    if (total - 1.0).abs() > 1e-12 || mean.abs() > 1e-10 || variance <= 0.0 {
        return Err(Error::Solver(format!(
            "step law for {} fails its invariants: total {total}, mean {mean}, variance {variance}",
            family.id
        )));
    }
    Ok(w)
}

fn direct_moments(w: &WalkParams) -> (f64, f64) {
    let s = w.shape;
    let up = w.alpha(1);
    let mut mean = up;
    let mut second = up;
    let mut depth = s.down_offset;
    loop {
        let a = w.alpha(-depth);
        mean -= depth as f64 * a;
        second += (depth * depth) as f64 * a;
        if a < 1e-40 || (depth > 50 && (depth * depth) as f64 * a < 1e-40) {
            break;
        }
        depth += s.down_stride;
    }
    (mean, second)
}

/// Moments of the step law, by direct summation and through `phi`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepMoments {
    pub mean: f64,
    pub variance: f64,
    /// `-t phi'(t) / phi(t)`.
    pub mean_from_phi: f64,
    /// `t psi'(t)` with `psi = t phi' / phi`, by central differences.
    pub variance_from_phi: f64,
}

pub fn step_moments(w: &WalkParams) -> StepMoments {
    let spec = w.family.spec();
    let (mean, variance) = direct_moments(w);
    let psi = |t: f64| t * phi_prime_raw(w.shape, t) / phi(spec, t).expect("t in range");
    let h = 1e-5;
    let dpsi = (psi(w.t + h) - psi(w.t - h)) / (2.0 * h);
    StepMoments {
        mean,
        variance,
        mean_from_phi: -psi(w.t),
        variance_from_phi: w.t * dpsi,
    }
}

/// Draws i.i.d. colored steps from a [`WalkParams`] law.
#[derive(Clone, Debug)]
pub struct StepSampler {
    up: f64,
    up_colors: u32,
    down_offset: i64,
    down_stride: i64,
    depth: Geometric,
}

impl StepSampler {
    pub fn new(w: &WalkParams) -> Self {
        let r = w.t.powi(w.shape.down_stride as i32);
        StepSampler {
            up: w.alpha(1),
            up_colors: w.shape.up_colors,
            down_offset: w.shape.down_offset,
            down_stride: w.shape.down_stride,
            depth: Geometric::new(1.0 - r).expect("ratio in (0,1)"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ColoredJump {
        if rng.random::<f64>() < self.up {
            ColoredJump::new(1, self.up_color(rng))
        } else {
            let j = self.depth.sample(rng) as i64;
            ColoredJump::plain(-(self.down_offset + self.down_stride * j))
        }
    }

    fn up_color<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.up_colors == 1 {
            1
        } else {
            rng.random_range(1..=self.up_colors)
        }
    }
}

/// Positions `X_1..X_N` and the colors of the `N-1` steps between them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ColoredWalk {
    pub positions: Vec<i64>,
    pub colors: Vec<u32>,
}

impl ColoredWalk {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Tree labels: position `i+1` carries the color of step `i`.
    pub fn labels(&self) -> Vec<ColoredLabel> {
        let mut out = Vec::with_capacity(self.len());
        out.push(ColoredLabel::plain(self.positions[0]));
        for (i, &c) in self.colors.iter().enumerate() {
            out.push(ColoredLabel { value: self.positions[i + 1], color: c });
        }
        out
    }

    pub fn jumps(&self) -> Vec<ColoredJump> {
        self.positions
            .windows(2)
            .zip(&self.colors)
            .map(|(w, &c)| ColoredJump::new(w[1] - w[0], c))
            .collect()
    }
}

/// Unconditioned walk of `len` positions started at `beta - 1`.
pub fn sample_walk<R: Rng + ?Sized>(w: &WalkParams, len: usize, rng: &mut R) -> ColoredWalk {
    let steps = StepSampler::new(w);
    let mut positions = Vec::with_capacity(len.max(1));
    let mut colors = Vec::with_capacity(len.saturating_sub(1));
    let mut x = w.beta - 1;
    positions.push(x);
    for _ in 1..len {
        let j = steps.sample(rng);
        x += j.step;
        positions.push(x);
        colors.push(j.color);
    }
    ColoredWalk { positions, colors }
}

/// How the endpoint condition interacts with the family's label rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    /// Every reachable final label has exactly one step back to the floor.
    Direct,
    /// Some reachable final labels have no step to the floor; the walk is
    /// reweighted so that every tree path stays equally likely.
    Reweighted,
}

/// Number of colored steps from label `k` to the floor `beta`.
fn terminal_multiplicity(w: &WalkParams, k: i64) -> u32 {
    w.shape.multiplicity(w.beta - k)
}

/// Residue of `X_n` modulo the span.
fn reachable(w: &WalkParams, n: usize, k: i64) -> bool {
    let span = w.span;
    let start = w.beta - 1;
    // every step is congruent to +1 modulo the span
    (k - start - (n as i64 - 1)).rem_euclid(span) == 0
}

/// Decides feasibility of effective length `n` and the terminal mode, by
/// scanning final labels compatible with the span.
pub fn terminal_mode(w: &WalkParams, n: usize) -> Result<Terminal> {
    if n == 0 {
        return Err(Error::Config("effective length must be at least 1".into()));
    }
    if n == 1 {
        return Ok(Terminal::Direct);
    }
    let mults: Vec<u32> = (w.beta..w.beta + 8 * w.span + 8)
        .filter(|&k| reachable(w, n, k))
        .map(|k| terminal_multiplicity(w, k))
        .collect();
    if mults.iter().all(|&m| m == 0) {
        Err(Error::Infeasible { family: w.family.as_str(), n })
    } else if mults.iter().all(|&m| m == 1) {
        Ok(Terminal::Direct)
    } else if mults.iter().all(|&m| m <= 1) {
        Ok(Terminal::Reweighted)
    } else {
        Err(Error::Internal("terminal multiplicity above one".into()))
    }
}

/// Default bound on the number of simulated steps for rejection sampling.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

/// Conditioned walk by plain rejection.
///
/// Runs the walk from `beta - 1` and restarts as soon as it drops below
/// `beta`. At time `n` it accepts with the probability that one more step
/// with unit multiplicity lands on `beta`, i.e. `p * t^{X_n - beta}`. For
/// families where every final label has a single step to the floor this
/// is the same as sampling step `n+1` and requiring `X_{n+1} = beta`.
pub fn sample_conditioned_rejection<R: Rng + ?Sized>(
    w: &WalkParams,
    n: usize,
    budget: u64,
    rng: &mut R,
) -> Result<ColoredWalk> {
    let mode = terminal_mode(w, n)?;
    if n == 1 {
        return Ok(ColoredWalk { positions: vec![w.beta - 1], colors: vec![] });
    }
    let steps = StepSampler::new(w);
    let mut used: u64 = 0;
    let mut positions = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n - 1);
    'attempt: loop {
        positions.clear();
        colors.clear();
        let mut x = w.beta - 1;
        positions.push(x);
        for _ in 1..n {
            used += 1;
            if used > budget {
                return Err(Error::Resource(format!("rejection sampler exceeded {budget} steps")));
            }
            let j = steps.sample(rng);
            x += j.step;
            if x < w.beta {
                continue 'attempt;
            }
            positions.push(x);
            colors.push(j.color);
        }
        used += 1;
        let accept = match mode {
            Terminal::Direct => x + steps.sample(rng).step == w.beta,
            Terminal::Reweighted => {
                let y = w.beta - x;
                rng.random::<f64>() < w.p * w.t.powi(-y as i32)
            }
        };
        if accept {
            return Ok(ColoredWalk { positions, colors });
        }
    }
}

/// How the cycle-lemma sampler obtains i.i.d. steps with a prescribed sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumConditioning {
    /// Redraw all steps until the sum matches.
    Rejection,
    /// Draw the number of up-steps from its exact conditional law, then
    /// spread the down-step depths as a uniform composition; exact because
    /// down-step depths are geometric.
    Exact,
}

/// Precomputed tables for drawing `n` i.i.d. steps conditioned on their sum.
#[derive(Clone, Debug)]
pub struct BridgeSampler {
    w: WalkParams,
    steps: StepSampler,
    n: usize,
    target: i64,
    /// Cumulative law of the number of up-steps given the sum.
    up_cdf: Vec<f64>,
}

impl BridgeSampler {
    /// Steps conditioned to sum to `target`.
    pub fn new(w: &WalkParams, n: usize, target: i64) -> Result<Self> {
        let s = w.shape;
        let a = w.alpha(1);
        let r = w.t.powi(s.down_stride as i32);
        let mut logw = vec![f64::NEG_INFINITY; n + 1];
        let lf = log_factorials(2 * n + 2);
        let ln_choose = |a: usize, b: usize| lf[a] - lf[b] - lf[a - b];
        for (u, lw) in logw.iter_mut().enumerate() {
            let d = n - u;
            // u - d*g0 - stride*S = target
            let rest = u as i64 - d as i64 * s.down_offset - target;
            if rest < 0 || rest % s.down_stride != 0 {
                continue;
            }
            let depth_sum = (rest / s.down_stride) as usize;
            if d == 0 {
                if depth_sum == 0 {
                    *lw = n as f64 * a.ln();
                }
                continue;
            }
            *lw = ln_choose(n, u)
                + u as f64 * a.ln()
                + d as f64 * (1.0 - a).ln()
                + ln_choose(depth_sum + d - 1, depth_sum)
                + d as f64 * (1.0 - r).ln()
                + depth_sum as f64 * r.ln();
        }
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::Infeasible { family: w.family.as_str(), n });
        }
        let mut acc = 0.0;
        let up_cdf = logw
            .iter()
            .map(|&l| {
                acc += (l - top).exp();
                acc
            })
            .collect::<Vec<_>>();
        let total = acc;
        let up_cdf = up_cdf.into_iter().map(|c| c / total).collect();
        Ok(BridgeSampler { w: w.clone(), steps: StepSampler::new(w), n, target, up_cdf })
    }

    /// `n` colored steps summing to the target.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<ColoredJump> {
        let s = self.w.shape;
        let n = self.n;
        let x: f64 = rng.random();
        let u = self.up_cdf.partition_point(|&c| c < x).min(n);
        let d = n - u;
        let target_rest = u as i64 - d as i64 * s.down_offset - self.target;
        let depth_sum = (target_rest / s.down_stride) as usize;
        let mut out = vec![ColoredJump::plain(0); n];
        let mut is_up = vec![false; n];
        for i in index::sample(rng, n, u) {
            is_up[i] = true;
        }
        // uniform weak composition of depth_sum into d parts
        let mut parts = Vec::with_capacity(d);
        if d > 0 {
            let mut bars: Vec<usize> = index::sample(rng, depth_sum + d - 1, d - 1).into_vec();
            bars.sort_unstable();
            let mut prev = 0usize;
            for &b in &bars {
                parts.push(b - prev);
                prev = b + 1;
            }
            parts.push(depth_sum + d - 1 - prev);
        }
        let mut next_part = parts.into_iter();
        for i in 0..n {
            out[i] = if is_up[i] {
                ColoredJump::new(1, self.steps.up_color(rng))
            } else {
                let j = next_part.next().expect("one depth per down-step") as i64;
                ColoredJump::plain(-(s.down_offset + s.down_stride * j))
            };
        }
        out
    }
}

/// Number of cyclic rotations of `steps` whose partial sums before the
/// last step are all nonnegative.
pub fn valid_rotations(steps: &[i64]) -> usize {
    let n = steps.len();
    (0..n)
        .filter(|&r| {
            let mut acc = 0i64;
            (0..n - 1).all(|i| {
                acc += steps[(r + i) % n];
                acc >= 0
            })
        })
        .count()
}

/// Start of the rotation given by the cycle lemma: just after the first
/// position where the partial sums reach their minimum.
fn cycle_lemma_start(steps: &[i64]) -> usize {
    let mut acc = 0i64;
    let mut best = i64::MAX;
    let mut arg = 0usize;
    for (i, &s) in steps.iter().enumerate() {
        acc += s;
        if acc < best {
            best = acc;
            arg = i;
        }
    }
    (arg + 1) % steps.len()
}

/// Exact sampler of the conditioned walk through the cycle lemma.
///
/// Draws i.i.d. steps conditioned on their total, reverses and negates
/// them (so they lie in `{-1, 0, 1, ...}` and sum to `-1`), rotates to the
/// unique rotation keeping proper partial sums nonnegative, and maps back.
#[derive(Clone, Debug)]
pub struct CycleSampler {
    w: WalkParams,
    n: usize,
    mode: Terminal,
    method: SumConditioning,
    bridge: Option<BridgeSampler>,
    steps: StepSampler,
    budget: u64,
}

impl CycleSampler {
    pub fn new(w: &WalkParams, n: usize, method: SumConditioning) -> Result<Self> {
        let mode = terminal_mode(w, n)?;
        let len = match mode {
            Terminal::Direct => n,
            Terminal::Reweighted => n + 1,
        };
        let bridge = if n > 1 && method == SumConditioning::Exact {
            Some(BridgeSampler::new(w, len, 1)?)
        } else {
            None
        };
        Ok(CycleSampler {
            w: w.clone(),
            n,
            mode,
            method,
            bridge,
            steps: StepSampler::new(w),
            budget: DEFAULT_STEP_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn mode(&self) -> Terminal {
        self.mode
    }

    /// Effective length.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ColoredWalk> {
        self.sample_counting(rng).map(|(w, _)| w)
    }

    /// Also returns the number of step sequences drawn.
    pub fn sample_counting<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(ColoredWalk, u64)> {
        let beta = self.w.beta;
        if self.n == 1 {
            return Ok((ColoredWalk { positions: vec![beta - 1], colors: vec![] }, 0));
        }
        let len = match self.mode {
            Terminal::Direct => self.n,
            Terminal::Reweighted => self.n + 1,
        };
        let mut attempts = 0u64;
        let mut used = 0u64;
        loop {
            let forward = match (self.method, &self.bridge) {
                (SumConditioning::Exact, Some(b)) => {
                    attempts += 1;
                    b.sample(rng)
                }
                _ => loop {
                    attempts += 1;
                    used += len as u64;
                    if used > self.budget {
                        return Err(Error::Resource(format!(
                            "cycle sampler exceeded {} steps",
                            self.budget
                        )));
                    }
                    let steps: Vec<ColoredJump> = (0..len).map(|_| self.steps.sample(rng)).collect();
                    if steps.iter().map(|j| j.step).sum::<i64>() == 1 {
                        break steps;
                    }
                },
            };
            let walk = rotate_to_excursion(&forward, beta);
            debug_assert_eq!(*walk.positions.last().unwrap(), beta);
            match self.mode {
                Terminal::Direct => {
                    let mut walk = walk;
                    walk.positions.pop();
                    walk.colors.pop();
                    return Ok((walk, attempts));
                }
                Terminal::Reweighted => {
                    let mut walk = walk;
                    walk.positions.truncate(self.n);
                    walk.colors.truncate(self.n - 1);
                    let last = *walk.positions.last().unwrap();
                    let g = self.continuations(last)?;
                    if rng.random::<f64>() * g as f64 <= 1.0 {
                        return Ok((walk, attempts));
                    }
                }
            }
        }
    }

    /// Colored children of `k` from which one step reaches the floor.
    fn continuations(&self, k: i64) -> Result<u32> {
        let spec = self.w.family.spec();
        let g = spec
            .rule_children(k)?
            .iter()
            .map(|c| terminal_multiplicity(&self.w, c.value))
            .sum::<u32>();
        if g == 0 {
            return Err(Error::Internal(format!("label {k} has no continuation to the floor")));
        }
        Ok(g)
    }
}

/// Turns forward steps summing to `+1` into the walk from `beta - 1`
/// that stays at or above `beta` until it ends on `beta`.
fn rotate_to_excursion(forward: &[ColoredJump], beta: i64) -> ColoredWalk {
    let n = forward.len();
    let reversed: Vec<i64> = forward.iter().rev().map(|j| -j.step).collect();
    let start = cycle_lemma_start(&reversed);
    let mut positions = Vec::with_capacity(n + 1);
    let mut colors = Vec::with_capacity(n);
    let mut x = beta - 1;
    positions.push(x);
    for i in 0..n {
        // forward step i is reversed step n-1-i of the rotated sequence,
        // which is reversed index (start + n - 1 - i) mod n
        let ri = (start + n - 1 - i) % n;
        let fj = forward[n - 1 - ri];
        x += fj.step;
        positions.push(x);
        colors.push(fj.color);
    }
    ColoredWalk { positions, colors }
}

/// One conditioned walk by the cycle lemma.
pub fn sample_conditioned_cycle<R: Rng + ?Sized>(
    w: &WalkParams,
    n: usize,
    rng: &mut R,
) -> Result<ColoredWalk> {
    CycleSampler::new(w, n, SumConditioning::Exact)?.sample(rng)
}

/// Which exact sampler produces the conditioned walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Cycle,
    Rejection,
}

#[derive(Clone, Debug)]
enum Engine {
    Cycle(Box<CycleSampler>),
    Rejection { w: WalkParams, n: usize, budget: u64 },
}

/// Uniform random permutations of a fixed size.
#[derive(Clone, Debug)]
pub struct PermutationSampler {
    family: FamilyId,
    engine: Engine,
}

impl PermutationSampler {
    pub fn new(family: FamilyId, size: usize) -> Result<Self> {
        Self::with_kind(family, size, SamplerKind::Cycle)
    }

    pub fn with_kind(family: FamilyId, size: usize, kind: SamplerKind) -> Result<Self> {
        if size == 0 {
            return Err(Error::Config("size must be at least 1".into()));
        }
        let spec = family.spec();
        let w = solve_pq(spec)?;
        let n = spec.effective_length(size);
        let engine = match kind {
            SamplerKind::Cycle => Engine::Cycle(Box::new(CycleSampler::new(&w, n, SumConditioning::Exact)?)),
            SamplerKind::Rejection => {
                terminal_mode(&w, n)?;
                Engine::Rejection { w, n, budget: DEFAULT_STEP_BUDGET }
            }
        };
        Ok(PermutationSampler { family, engine })
    }

    /// Replaces the default step budget of the rejection sampler.
    pub fn with_budget(mut self, steps: u64) -> Self {
        match &mut self.engine {
            Engine::Cycle(c) => **c = c.as_ref().clone().with_budget(steps),
            Engine::Rejection { budget, .. } => *budget = steps,
        }
        self
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    /// Labels of a uniform tree path, starting at the size-1 permutation.
    pub fn sample_labels<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<ColoredLabel>> {
        let walk = match &self.engine {
            Engine::Cycle(c) => c.sample(rng)?,
            Engine::Rejection { w, n, budget } => sample_conditioned_rejection(w, *n, *budget, rng)?,
        };
        let mut labels = walk.labels();
        if self.family.spec().virtual_root {
            labels.remove(0);
        }
        Ok(labels)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Permutation> {
        let labels = self.sample_labels(rng)?;
        decode_labels(self.family, &labels)
    }
}

/// A uniform element of the family of the given size.
pub fn uniform_permutation<R: Rng + ?Sized>(
    family: FamilyId,
    size: usize,
    rng: &mut R,
) -> Result<Permutation> {
    PermutationSampler::new(family, size)?.sample(rng)
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}
