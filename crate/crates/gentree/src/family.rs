//! The ten permutation families: identifiers, avoidance constraints,
//! succession rules and active sites.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{for_each_occurrence, satisfies, GeneralizedPattern, Permutation};
use crate::tree::ColoredLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "av123")]
    Av123,
    #[serde(rename = "av132")]
    Av132,
    #[serde(rename = "av1423-4123")]
    Av1423_4123,
    #[serde(rename = "av1234-2134")]
    Av1234_2134,
    #[serde(rename = "av1324-3124")]
    Av1324_3124,
    #[serde(rename = "av2314-3214")]
    Av2314_3214,
    #[serde(rename = "av2413-4213")]
    Av2413_4213,
    #[serde(rename = "av3412-4312")]
    Av3412_4312,
    #[serde(rename = "famA")]
    FamA,
    #[serde(rename = "famB")]
    FamB,
}

impl FamilyId {
    pub const ALL: [FamilyId; 10] = [
        FamilyId::Av123,
        FamilyId::Av132,
        FamilyId::Av1423_4123,
        FamilyId::Av1234_2134,
        FamilyId::Av1324_3124,
        FamilyId::Av2314_3214,
        FamilyId::Av2413_4213,
        FamilyId::Av3412_4312,
        FamilyId::FamA,
        FamilyId::FamB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::Av123 => "av123",
            FamilyId::Av132 => "av132",
            FamilyId::Av1423_4123 => "av1423-4123",
            FamilyId::Av1234_2134 => "av1234-2134",
            FamilyId::Av1324_3124 => "av1324-3124",
            FamilyId::Av2314_3214 => "av2314-3214",
            FamilyId::Av2413_4213 => "av2413-4213",
            FamilyId::Av3412_4312 => "av3412-4312",
            FamilyId::FamA => "famA",
            FamilyId::FamB => "famB",
        }
    }

    pub fn spec(self) -> &'static FamilySpec {
        static SPECS: OnceLock<Vec<FamilySpec>> = OnceLock::new();
        let specs = SPECS.get_or_init(|| FamilyId::ALL.iter().map(|&id| FamilySpec::build(id)).collect());
        &specs[FamilyId::ALL.iter().position(|&f| f == self).unwrap()]
    }

    /// The six families sharing the Schröder-type tree.
    pub fn is_schroeder_group(self) -> bool {
        matches!(
            self,
            FamilyId::Av1423_4123
                | FamilyId::Av1234_2134
                | FamilyId::Av1324_3124
                | FamilyId::Av2314_3214
                | FamilyId::Av2413_4213
                | FamilyId::Av3412_4312
        )
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Support and multiplicities of the jump law.
///
/// Jump `+1` has `up_colors` colored copies; the nonpositive jumps are
/// `-(down_offset + down_stride * j)` for `j >= 0`, each with one copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepShape {
    pub up_colors: u32,
    pub down_offset: i64,
    pub down_stride: i64,
}

impl StepShape {
    /// Number of colored copies of jump `y` from any large enough label.
    pub fn multiplicity(&self, y: i64) -> u32 {
        if y == 1 {
            return self.up_colors;
        }
        if y > 1 {
            return 0;
        }
        let depth = -y - self.down_offset;
        if depth >= 0 && depth % self.down_stride == 0 {
            1
        } else {
            0
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySpec {
    pub id: FamilyId,
    /// Smallest label below the root.
    pub beta: i64,
    /// Label of the root; equals `beta - 1`.
    pub root_label: i64,
    /// Whether the root is a synthetic vertex above the size-1 permutation.
    pub virtual_root: bool,
    pub avoidance: Vec<GeneralizedPattern>,
    pub span: i64,
    pub shape: StepShape,
}

fn classical(s: &str) -> GeneralizedPattern {
    GeneralizedPattern::Classical(s.parse().expect("valid pattern"))
}

impl FamilySpec {
    fn build(id: FamilyId) -> FamilySpec {
        use FamilyId::*;
        let pair = |a: &str, b: &str| vec![classical(a), classical(b)];
        let (avoidance, beta, virtual_root) = match id {
            Av123 => (vec![classical("123")], 2, true),
            Av132 => (vec![classical("132")], 2, true),
            Av1423_4123 => (pair("1423", "4123"), 3, false),
            Av1234_2134 => (pair("1234", "2134"), 3, false),
            Av1324_3124 => (pair("1324", "3124"), 3, false),
            Av2314_3214 => (pair("2314", "3214"), 3, false),
            Av2413_4213 => (pair("2413", "4213"), 3, false),
            Av3412_4312 => (pair("3412", "4312"), 3, false),
            FamA => (vec![classical("213"), GeneralizedPattern::Barred231], 1, true),
            FamB => (vec![classical("213"), GeneralizedPattern::BarredOdd231], 1, true),
        };
        let shape = match id {
            Av123 | Av132 => StepShape { up_colors: 1, down_offset: 0, down_stride: 1 },
            FamA => StepShape { up_colors: 1, down_offset: 1, down_stride: 1 },
            FamB => StepShape { up_colors: 1, down_offset: 1, down_stride: 2 },
            _ => StepShape { up_colors: 2, down_offset: 0, down_stride: 1 },
        };
        FamilySpec {
            id,
            beta,
            root_label: beta - 1,
            virtual_root,
            avoidance,
            span: shape.down_stride,
            shape,
        }
    }

    /// Threshold above which window patterns are determined by jumps.
    pub fn c_of_h(&self, h: usize) -> i64 {
        h as i64 + 1
    }

    /// Label of the vertex holding the size-1 permutation.
    pub fn first_label(&self) -> ColoredLabel {
        if self.virtual_root {
            ColoredLabel::plain(self.beta)
        } else {
            ColoredLabel::plain(self.root_label)
        }
    }

    /// Number of labels in the tree path of a size-`size` permutation.
    pub fn effective_length(&self, size: usize) -> usize {
        size + self.virtual_root as usize
    }

    pub fn size_of_effective(&self, n: usize) -> usize {
        n - self.virtual_root as usize
    }

    pub fn is_member(&self, sigma: &Permutation) -> bool {
        self.avoidance.iter().all(|g| satisfies(sigma, g))
    }

    fn smallest_label(&self) -> i64 {
        self.root_label
    }

    /// Children of label `k` in ascending order of the appended site.
    pub fn rule_children(&self, k: i64) -> Result<Vec<ColoredLabel>> {
        use FamilyId::*;
        if k < self.smallest_label() {
            return Err(Error::Domain { family: self.id.as_str(), label: k });
        }
        let plain = ColoredLabel::plain;
        let up = |c| ColoredLabel { value: k + 1, color: c };
        let out = match self.id {
            Av123 => std::iter::once(plain(k + 1)).chain((2..=k).map(plain)).collect(),
            Av132 => (2..=k + 1).rev().map(plain).collect(),
            Av1423_4123 | Av1324_3124 => std::iter::once(up(1))
                .chain((3..=k).map(plain))
                .chain(std::iter::once(up(2)))
                .collect(),
            Av1234_2134 => [up(1), up(2)].into_iter().chain((3..=k).map(plain)).collect(),
            Av2314_3214 | Av2413_4213 | Av3412_4312 => {
                (3..=k).map(plain).chain([up(1), up(2)]).collect()
            }
            FamA => (1..k).map(plain).chain(std::iter::once(plain(k + 1))).collect(),
            FamB => (1..=k + 1).filter(|l| (k - l) % 2 != 0).map(plain).collect(),
        };
        Ok(out)
    }

    /// Position of `child` in `rule_children(k)`, without building the list.
    pub fn child_index(&self, k: i64, child: ColoredLabel) -> Option<usize> {
        use FamilyId::*;
        if k < self.smallest_label() {
            return None;
        }
        let (v, c) = (child.value, child.color);
        let plain_in = |lo: i64, hi: i64| c == 1 && v >= lo && v <= hi;
        let idx = match self.id {
            Av123 => {
                if v == k + 1 && c == 1 {
                    0
                } else if plain_in(2, k) {
                    v - 1
                } else {
                    return None;
                }
            }
            Av132 => {
                if plain_in(2, k + 1) {
                    k + 1 - v
                } else {
                    return None;
                }
            }
            Av1423_4123 | Av1324_3124 => match (v == k + 1, c) {
                (true, 1) => 0,
                (true, 2) => k - 1,
                _ if plain_in(3, k) => v - 2,
                _ => return None,
            },
            Av1234_2134 => match (v == k + 1, c) {
                (true, 1) => 0,
                (true, 2) => 1,
                _ if plain_in(3, k) => v - 1,
                _ => return None,
            },
            Av2314_3214 | Av2413_4213 | Av3412_4312 => match (v == k + 1, c) {
                (true, 1) => k - 2,
                (true, 2) => k - 1,
                _ if plain_in(3, k) => v - 3,
                _ => return None,
            },
            FamA => {
                if plain_in(1, k - 1) {
                    v - 1
                } else if v == k + 1 && c == 1 {
                    (k - 1).max(0)
                } else {
                    return None;
                }
            }
            FamB => {
                if c != 1 || v < 1 || v > k + 1 || (k - v) % 2 == 0 {
                    return None;
                }
                let lowest = if k % 2 == 0 { 1 } else { 2 };
                (v - lowest) / 2
            }
        };
        Some(idx as usize)
    }
}

/// Sites `m` with `append_final(sigma, m)` in the family, by filtering
/// every extension through the full membership predicate.
pub fn active_sites_by_filter(sigma: &Permutation, family: &FamilySpec) -> Vec<usize> {
    (1..=sigma.len() + 1)
        .filter(|&m| {
            let child = crate::perm::append_final(sigma, m).expect("site in range");
            family.is_member(&child)
        })
        .collect()
}

/// Active sites of `sigma`, ascending.
///
/// Assumes `sigma` is in the family, so only occurrences using the new
/// final entry need checking. For a classical pattern `pi` of size `k`,
/// every occurrence of `pi` minus its last entry forbids the sites lying
/// strictly between the two entries that must bracket the new value.
/// Cost is dominated by enumerating these occurrences, `O(n^{k-1})`.
pub fn active_sites(sigma: &Permutation, family: &FamilySpec) -> Vec<usize> {
    debug_assert!(family.is_member(sigma), "{sigma} not in {}", family.id);
    let s = sigma.values();
    let n = s.len();
    // reach[a] = largest b such that sites a..=b are forbidden by an
    // occurrence whose lower bracket value is a-1.
    let mut reach = vec![0usize; n + 2];
    let mut allowed = vec![true; n + 2];
    for g in &family.avoidance {
        match g {
            GeneralizedPattern::Classical(pi) => {
                let pv = pi.values();
                let k = pv.len();
                if k == 1 {
                    allowed.iter_mut().for_each(|a| *a = false);
                    continue;
                }
                let last_rank = pv[k - 1];
                let head = crate::perm::standardize(&pv[..k - 1]).expect("pattern");
                for_each_occurrence(head.values(), s, |occ| {
                    let mut lo = 0u32;
                    let mut hi = n as u32 + 1;
                    for (&val, &rank) in occ.iter().zip(&pv[..k - 1]) {
                        if rank < last_rank {
                            lo = lo.max(val);
                        } else {
                            hi = hi.min(val);
                        }
                    }
                    // new value m - 1/2 lies in (lo, hi) iff lo < m <= hi
                    if lo < hi {
                        let a = lo as usize + 1;
                        reach[a] = reach[a].max(hi as usize);
                    }
                });
            }
            GeneralizedPattern::Barred231 | GeneralizedPattern::BarredOdd231 => {
                let odd = matches!(g, GeneralizedPattern::BarredOdd231);
                let last = s[n - 1] as usize;
                // sites m <= last make the final pair a descent
                for (m, ok) in allowed.iter_mut().enumerate().take(last + 1).skip(1) {
                    let witnesses =
                        s[..n - 1].iter().filter(|&&x| (x as usize) >= m && (x as usize) < last).count();
                    let good = if odd { witnesses % 2 == 1 } else { witnesses >= 1 };
                    if !good {
                        *ok = false;
                    }
                }
            }
        }
    }
    let mut covered_to = 0usize;
    let mut out = Vec::new();
    for m in 1..=n + 1 {
        covered_to = covered_to.max(reach[m]);
        if m > covered_to && allowed[m] {
            out.push(m);
        }
    }
    out
}
