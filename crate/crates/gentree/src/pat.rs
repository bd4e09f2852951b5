//! The pattern induced by a factor of colored jumps.
//!
//! A jump tuple is evaluated by climbing from the size-1 permutation with
//! `+1` jumps of the last color until the label is high enough that no
//! jump of the tuple can reach the sites created below the climb, then
//! following the tuple and reading the pattern of the last entries.

use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilySpec};
use crate::growth::Grower;
use crate::perm::{standardize, Permutation};
use crate::slist::slist_pat;
use crate::tree::{decode, ColoredJump, ColoredLabel, ColoredLabelSeq};

/// Extra height used for the second evaluation of [`pat_generic`].
pub const RAMP_CHECK_EXTRA: i64 = 5;

/// Rejects jumps outside the family's colored step alphabet.
pub fn check_jumps(family: &FamilySpec, jumps: &[ColoredJump]) -> Result<()> {
    if jumps.is_empty() {
        return Err(Error::Empty);
    }
    for &j in jumps {
        let m = family.shape.multiplicity(j.step);
        if j.color == 0 || j.color > m {
            return Err(Error::Alphabet(j.to_string()));
        }
    }
    Ok(())
}

/// Label the climb must exceed before the tuple is applied.
pub fn ramp_height(family: &FamilySpec, jumps: &[ColoredJump]) -> i64 {
    family.c_of_h(jumps.len()) + jumps.iter().map(|j| (-j.step).max(0)).sum::<i64>()
}

fn climb_jump(family: &FamilySpec) -> ColoredJump {
    ColoredJump::new(1, family.shape.up_colors)
}

/// Labels from the size-1 permutation: the climb past `height`, then
/// the tuple.
fn path_labels(family: &FamilySpec, jumps: &[ColoredJump], height: i64) -> Result<Vec<ColoredLabel>> {
    let up = climb_jump(family);
    let mut labels = vec![family.first_label()];
    let mut k = family.first_label().value;
    while k <= height {
        k += 1;
        labels.push(ColoredLabel { value: k, color: up.color });
    }
    for (i, j) in jumps.iter().enumerate() {
        let child = ColoredLabel { value: k + j.step, color: j.color };
        if family.child_index(k, child).is_none() {
            return Err(Error::Inconsistent {
                index: i,
                reason: format!("jump {j} is not available from label {k}"),
            });
        }
        k = child.value;
        labels.push(child);
    }
    Ok(labels)
}

fn tail_pattern(sigma: &Permutation, h: usize) -> Result<Permutation> {
    standardize(&sigma.values()[sigma.len() - h..])
}

fn generic_at(family: &FamilySpec, jumps: &[ColoredJump], height: i64) -> Result<Permutation> {
    let mut labels = path_labels(family, jumps, height)?;
    if family.virtual_root {
        labels.insert(0, ColoredLabel::plain(family.root_label));
    }
    let sigma = decode(family, &ColoredLabelSeq::new(labels))?;
    tail_pattern(&sigma, jumps.len())
}

/// Pattern of a jump tuple through membership-tested decoding, evaluated
/// at two climb heights which must agree.
pub fn pat_generic(family: &FamilySpec, jumps: &[ColoredJump]) -> Result<Permutation> {
    check_jumps(family, jumps)?;
    let height = ramp_height(family, jumps);
    let low = generic_at(family, jumps, height)?;
    let high = generic_at(family, jumps, height + RAMP_CHECK_EXTRA)?;
    if low != high {
        return Err(Error::Internal(format!(
            "pattern of the jumps depends on the climb: {low} versus {high}"
        )));
    }
    Ok(low)
}

/// Pattern of a jump tuple through the linear-time decoder.
pub fn pat_grower(family: &FamilySpec, jumps: &[ColoredJump]) -> Result<Permutation> {
    check_jumps(family, jumps)?;
    let labels = path_labels(family, jumps, ramp_height(family, jumps))?;
    let mut g = Grower::new(family.id);
    for &l in &labels[1..] {
        g.push(l)?;
    }
    Ok(g.last_pattern(jumps.len()))
}

/// Pattern of a jump tuple, by the S-list for Av(1423, 4123) and the
/// linear-time decoder otherwise.
pub fn pat(family: &FamilySpec, jumps: &[ColoredJump]) -> Result<Permutation> {
    if family.id == FamilyId::Av1423_4123 {
        check_jumps(family, jumps)?;
        slist_pat(jumps)
    } else {
        pat_grower(family, jumps)
    }
}

/// Evaluates many tuples of a fixed length whose jumps are bounded below,
/// sharing one climb.
#[derive(Clone, Debug)]
pub struct PatOracle {
    family: &'static FamilySpec,
    h: usize,
    floor: i64,
    base: Grower,
}

impl PatOracle {
    /// Tuples of length `h` with every jump at least `floor`.
    pub fn new(family: FamilyId, h: usize, floor: i64) -> Result<Self> {
        if h == 0 {
            return Err(Error::Config("tuple length must be at least 1".into()));
        }
        let spec = family.spec();
        let height = spec.c_of_h(h) + h as i64 * (-floor).max(0);
        let up = climb_jump(spec);
        let mut base = Grower::new(family);
        while base.label().value <= height {
            let k = base.label().value;
            base.push(ColoredLabel { value: k + 1, color: up.color })?;
        }
        Ok(PatOracle { family: spec, h, floor, base })
    }

    pub fn family(&self) -> &'static FamilySpec {
        self.family
    }

    pub fn tuple_len(&self) -> usize {
        self.h
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    /// Grower after the climb; push up to `h` jumps and read
    /// [`Grower::last_pattern`].
    pub fn start(&self) -> Grower {
        self.base.clone()
    }

    pub fn eval(&self, jumps: &[ColoredJump]) -> Result<Permutation> {
        if jumps.len() != self.h {
            return Err(Error::Config(format!("expected {} jumps, got {}", self.h, jumps.len())));
        }
        check_jumps(self.family, jumps)?;
        if let Some(j) = jumps.iter().find(|j| j.step < self.floor) {
            return Err(Error::Config(format!("jump {j} is below the floor {}", self.floor)));
        }
        let mut g = self.base.clone();
        push_jump_seq(&mut g, jumps)?;
        Ok(g.last_pattern(self.h))
    }
}

/// Membership-tested evaluation of every tuple over an alphabet, sharing
/// prefixes: a depth-first walk from a fixed climb, growing the
/// permutation one active site at a time.
#[derive(Clone, Debug)]
pub struct RampOracle {
    family: &'static FamilySpec,
    height: i64,
    base: Permutation,
    label: i64,
}

impl RampOracle {
    /// Climb past `height`; every tuple of length `h` with jumps at least
    /// `floor` is covered when `height >= c(h) + h * max(0, -floor)`.
    pub fn new(family: FamilyId, height: i64) -> Result<Self> {
        let spec = family.spec();
        let mut labels = path_labels(spec, &[], height)?;
        let label = labels.last().expect("nonempty").value;
        if spec.virtual_root {
            labels.insert(0, ColoredLabel::plain(spec.root_label));
        }
        let base = decode(spec, &ColoredLabelSeq::new(labels))?;
        Ok(RampOracle { family: spec, height, base, label })
    }

    /// Smallest climb covering tuples of length `h` above `floor`.
    pub fn height_for(family: FamilyId, h: usize, floor: i64) -> i64 {
        family.spec().c_of_h(h) + h as i64 * (-floor).max(0)
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    /// Calls `f(tuple, pattern of its last entries)` for every tuple of
    /// length `1..=max_len` over `alphabet`.
    pub fn for_each_tuple<F>(&self, alphabet: &[ColoredJump], max_len: usize, mut f: F) -> Result<()>
    where
        F: FnMut(&[ColoredJump], &Permutation),
    {
        let mut prefix = Vec::with_capacity(max_len);
        self.dfs(&self.base, self.label, alphabet, max_len, &mut prefix, &mut f)
    }

    fn dfs<F>(
        &self,
        sigma: &Permutation,
        k: i64,
        alphabet: &[ColoredJump],
        max_len: usize,
        prefix: &mut Vec<ColoredJump>,
        f: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[ColoredJump], &Permutation),
    {
        if prefix.len() == max_len {
            return Ok(());
        }
        let sites = crate::family::active_sites(sigma, self.family);
        for &j in alphabet {
            let child = ColoredLabel { value: k + j.step, color: j.color };
            let idx = self.family.child_index(k, child).ok_or_else(|| Error::Inconsistent {
                index: prefix.len(),
                reason: format!("jump {j} is not available from label {k}"),
            })?;
            let next = crate::perm::append_final(sigma, sites[idx])?;
            prefix.push(j);
            f(prefix, &tail_pattern(&next, prefix.len())?);
            self.dfs(&next, child.value, alphabet, max_len, prefix, f)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Follows `jumps` from the current label of `g`.
pub fn push_jump_seq(g: &mut Grower, jumps: &[ColoredJump]) -> Result<()> {
    for &j in jumps {
        push_jump(g, j)?;
    }
    Ok(())
}

pub fn push_jump(g: &mut Grower, j: ColoredJump) -> Result<()> {
    let k = g.label().value;
    g.push(ColoredLabel { value: k + j.step, color: j.color })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_jumps;

    #[test]
    fn worked_example() {
        let spec = FamilyId::Av1423_4123.spec();
        let js = parse_jumps("-2,+1B,+1B,+1T,+1T,-7").unwrap();
        assert_eq!(pat_generic(spec, &js).unwrap().to_string(), "421563");
        assert_eq!(pat_grower(spec, &js).unwrap().to_string(), "421563");
        assert_eq!(pat(spec, &js).unwrap().to_string(), "421563");
    }

    #[test]
    fn single_jump_is_trivial() {
        for f in FamilyId::ALL {
            let spec = f.spec();
            let j = ColoredJump::new(1, 1);
            assert_eq!(pat_generic(spec, &[j]).unwrap(), Permutation::identity(1));
            assert_eq!(pat(spec, &[j]).unwrap(), Permutation::identity(1));
        }
    }

    #[test]
    fn alphabet_errors() {
        let b = FamilyId::FamB.spec();
        assert!(matches!(pat(b, &[ColoredJump::plain(0)]), Err(Error::Alphabet(_))));
        assert!(matches!(pat(b, &[ColoredJump::plain(-2)]), Err(Error::Alphabet(_))));
        let a = FamilyId::Av123.spec();
        assert!(matches!(pat(a, &[ColoredJump::new(1, 2)]), Err(Error::Alphabet(_))));
        assert!(matches!(pat(a, &[ColoredJump::plain(2)]), Err(Error::Alphabet(_))));
        assert!(matches!(pat(a, &[]), Err(Error::Empty)));
    }

    #[test]
    fn ramp_oracle_matches_single_evaluations() {
        for f in [FamilyId::Av123, FamilyId::Av2413_4213, FamilyId::FamA] {
            let spec = f.spec();
            let alphabet: Vec<ColoredJump> = (-2..=1)
                .flat_map(|y| (1..=spec.shape.multiplicity(y)).map(move |c| ColoredJump::new(y, c)))
                .collect();
            let oracle = RampOracle::new(f, RampOracle::height_for(f, 3, -2)).unwrap();
            let mut seen = 0;
            oracle
                .for_each_tuple(&alphabet, 3, |js, p| {
                    assert_eq!(*p, pat_generic(spec, js).unwrap(), "{f} {js:?}");
                    seen += 1;
                })
                .unwrap();
            let a = alphabet.len();
            assert_eq!(seen, a + a * a + a * a * a);
        }
    }

    #[test]
    fn fast_routes_match_generic() {
        for f in FamilyId::ALL {
            let spec = f.spec();
            let oracle = PatOracle::new(f, 3, -3).unwrap();
            let alphabet: Vec<ColoredJump> = (-3..=1)
                .flat_map(|y| (1..=spec.shape.multiplicity(y)).map(move |c| ColoredJump::new(y, c)))
                .collect();
            for &a in &alphabet {
                for &b in &alphabet {
                    for &c in &alphabet {
                        let js = [a, b, c];
                        let want = pat_generic(spec, &js).unwrap();
                        assert_eq!(pat(spec, &js).unwrap(), want, "{f} {js:?}");
                        assert_eq!(oracle.eval(&js).unwrap(), want, "{f} {js:?}");
                    }
                }
            }
        }
    }
}
