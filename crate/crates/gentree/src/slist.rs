//! Fast pattern reading for Av(1423, 4123).
//!
//! While following a path in the generating tree we keep, in increasing
//! order of value, the last `h` appended entries (as the indices `1..=h`
//! of their columns) interleaved with the active sites between them. An
//! active site is recorded by the jump value that selects it; consecutive
//! sites form intervals, and the sites lying below every tracked entry
//! form the single interval unbounded below. The two `+1` sites at the
//! very bottom and the very top are implicit.

use std::fmt;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::tree::ColoredJump;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SItem {
    /// Column index of a tracked entry, starting at 1.
    Dot(u32),
    /// Jump values `lo..=hi`; `lo == None` stands for minus infinity.
    Span { lo: Option<i64>, hi: i64 },
}

impl SItem {
    fn contains(&self, y: i64) -> bool {
        match *self {
            SItem::Dot(_) => false,
            SItem::Span { lo, hi } => y <= hi && lo.is_none_or(|l| l <= y),
        }
    }

    fn shifted(self, by: i64) -> SItem {
        match self {
            SItem::Span { lo, hi } => SItem::Span { lo: lo.map(|l| l + by), hi: hi + by },
            dot => dot,
        }
    }
}

impl fmt::Display for SItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SItem::Dot(i) => write!(f, "({i})"),
            SItem::Span { lo: None, hi } => write!(f, "(-inf,{hi}]"),
            SItem::Span { lo: Some(l), hi } if l == hi => write!(f, "{{{hi}}}"),
            SItem::Span { lo: Some(l), hi } => write!(f, "[{l},{hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SList {
    items: Vec<SItem>,
    dots: u32,
}

impl fmt::Display for SList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, it) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{it}")?;
        }
        f.write_str("]")
    }
}

fn check_jump(j: ColoredJump) -> Result<()> {
    let ok = match j.step {
        1 => j.color == 1 || j.color == 2,
        y if y <= 0 => j.color == 1,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Alphabet(j.to_string()))
    }
}

const TOP: u32 = 2;

impl SList {
    /// Builds a list from explicit items, checking that the dots are
    /// `1..=h` in some order and exactly one interval is unbounded.
    pub fn from_items(items: Vec<SItem>) -> Result<Self> {
        let mut seen = Vec::new();
        let mut unbounded = 0;
        for it in &items {
            match *it {
                SItem::Dot(i) => seen.push(i),
                SItem::Span { lo, hi } => {
                    if lo.is_none() {
                        unbounded += 1;
                    } else if lo > Some(hi) {
                        return Err(Error::Structure(format!("empty interval {it}")));
                    }
                }
            }
        }
        seen.sort_unstable();
        let dots = seen.len() as u32;
        if dots == 0 || seen.iter().enumerate().any(|(i, &d)| d != i as u32 + 1) {
            return Err(Error::Structure("dots are not 1..h".into()));
        }
        if unbounded != 1 {
            return Err(Error::Structure(format!("{unbounded} unbounded intervals")));
        }
        Ok(SList { items, dots })
    }

    /// The list after the first tracked jump.
    pub fn init(first: ColoredJump) -> Result<Self> {
        check_jump(first)?;
        let lower = SItem::Span { lo: None, hi: 0 };
        let items = if first.step == 1 && first.color == 1 {
            vec![SItem::Dot(1), lower]
        } else {
            vec![lower, SItem::Dot(1)]
        };
        Ok(SList { items, dots: 1 })
    }

    pub fn items(&self) -> &[SItem] {
        &self.items
    }

    /// Number of tracked entries.
    pub fn len(&self) -> usize {
        self.dots as usize
    }

    pub fn is_empty(&self) -> bool {
        self.dots == 0
    }

    /// Tracks one more entry, appended by `jump`.
    pub fn advance(&self, jump: ColoredJump) -> Result<SList> {
        check_jump(jump)?;
        let next = SItem::Dot(self.dots + 1);
        let mut items = Vec::with_capacity(self.items.len() + 2);
        if jump.step == 1 && jump.color == TOP {
            items.extend(self.items.iter().map(|it| it.shifted(-1)));
            match items.last_mut() {
                Some(SItem::Span { hi, .. }) => *hi = 0,
                _ => items.push(SItem::Span { lo: Some(0), hi: 0 }),
            }
            items.push(next);
        } else if jump.step == 1 {
            items.push(next);
            items.extend_from_slice(&self.items);
        } else {
            let y = jump.step;
            let at = self.items.iter().position(|it| it.contains(y)).ok_or_else(|| {
                Error::Guard(format!("jump {y} selects no tracked site of {self}"))
            })?;
            items.extend(self.items[..at].iter().map(|it| it.shifted(-y)));
            if let SItem::Span { lo, .. } = self.items[at] {
                items.push(SItem::Span { lo: lo.map(|l| l - y), hi: 0 });
            }
            items.push(next);
            items.extend(self.items[at + 1..].iter().filter(|it| matches!(it, SItem::Dot(_))));
        }
        Ok(SList { items, dots: self.dots + 1 })
    }

    /// Pattern of the tracked entries: the inverse of the dot word.
    pub fn read(&self) -> Result<Permutation> {
        let word: Vec<u32> = self
            .items
            .iter()
            .filter_map(|it| match it {
                SItem::Dot(i) => Some(*i),
                _ => None,
            })
            .collect();
        let p = Permutation::new(word).map_err(|e| Error::Structure(e.to_string()))?;
        Ok(p.inverse())
    }
}

/// Pattern induced by a jump tuple for Av(1423, 4123).
pub fn slist_pat(jumps: &[ColoredJump]) -> Result<Permutation> {
    let (first, rest) = jumps.split_first().ok_or(Error::Empty)?;
    let mut s = SList::init(*first)?;
    for &j in rest {
        s = s.advance(j)?;
    }
    s.read()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_jumps;
    use SItem::*;

    fn span(lo: i64, hi: i64) -> SItem {
        Span { lo: Some(lo), hi }
    }
    fn low(hi: i64) -> SItem {
        Span { lo: None, hi }
    }

    #[test]
    fn first_lists() {
        let t = SList::init(ColoredJump::new(1, 2)).unwrap();
        assert_eq!(t.items(), &[low(0), Dot(1)]);
        let b = SList::init(ColoredJump::new(1, 1)).unwrap();
        assert_eq!(b.items(), &[Dot(1), low(0)]);
        let d = SList::init(ColoredJump::plain(-3)).unwrap();
        assert_eq!(d.items(), &[low(0), Dot(1)]);
        assert!(SList::init(ColoredJump::new(0, 2)).is_err());
        assert!(SList::init(ColoredJump::plain(2)).is_err());
    }

    #[test]
    fn worked_example_lists() {
        let js = parse_jumps("-2,+1B,+1B,+1T,+1T,-7").unwrap();
        let mut s = SList::init(js[0]).unwrap();
        s = s.advance(js[1]).unwrap();
        assert_eq!(s.items(), &[Dot(2), low(0), Dot(1)]);
        s = s.advance(js[2]).unwrap();
        assert_eq!(s.items(), &[Dot(3), Dot(2), low(0), Dot(1)]);
        s = s.advance(js[3]).unwrap();
        assert_eq!(s.items(), &[Dot(3), Dot(2), low(-1), Dot(1), span(0, 0), Dot(4)]);
        s = s.advance(js[4]).unwrap();
        assert_eq!(
            s.items(),
            &[Dot(3), Dot(2), low(-2), Dot(1), span(-1, -1), Dot(4), span(0, 0), Dot(5)]
        );
        s = s.advance(js[5]).unwrap();
        assert_eq!(s.items(), &[Dot(3), Dot(2), low(0), Dot(6), Dot(1), Dot(4), Dot(5)]);
        assert_eq!(s.read().unwrap().to_string(), "421563");
        assert_eq!(slist_pat(&js).unwrap().to_string(), "421563");
    }

    #[test]
    fn reading() {
        let s = SList::from_items(vec![Dot(4), Dot(3), low(-1), Dot(1), Dot(5), span(0, 0), Dot(2)])
            .unwrap();
        assert_eq!(s.read().unwrap().to_string(), "35214");
        assert_eq!(SList::from_items(vec![Dot(1), low(0)]).unwrap().read().unwrap().to_string(), "1");
        assert!(SList::from_items(vec![Dot(1), Dot(3), low(0)]).is_err());
        assert!(SList::from_items(vec![Dot(1)]).is_err());
    }

    #[test]
    fn zero_jump_after_bottom() {
        let s = SList::init(ColoredJump::new(1, 1)).unwrap();
        let s = s.advance(ColoredJump::plain(0)).unwrap();
        assert_eq!(s.items(), &[Dot(1), low(0), Dot(2)]);
        assert!(SList::from_items(vec![Dot(2), Dot(1), span(-3, 0)]).is_err());
    }
}
