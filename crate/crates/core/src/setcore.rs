//! Bitmask sets over a ground set of at most 128 elements, and immutable
//! families of such sets.
//!
//! Families are stored strictly sorted by the integer value of their
//! bitmasks, which is the colexicographic order on sets. Every operation
//! returns a fresh family in that canonical order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND: usize = 128;

/// A subset of `[n]` with `n <= 128`, element `i` stored as bit `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetWord(pub u128);

impl SetWord {
    pub const EMPTY: SetWord = SetWord(0);

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Result<Self> {
        let mut bits = 0u128;
        for e in elements {
            if e >= MAX_GROUND {
                return Err(Error::ElementOutOfRange { element: e, n: MAX_GROUND });
            }
            bits |= 1u128 << e;
        }
        Ok(SetWord(bits))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            SetWord(u128::MAX)
        } else {
            SetWord((1u128 << n) - 1)
        }
    }

    pub fn singleton(e: usize) -> Self {
        SetWord(1u128 << e)
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, e: usize) -> bool {
        e < 128 && self.0 >> e & 1 == 1
    }

    #[inline]
    pub fn union(self, other: SetWord) -> SetWord {
        SetWord(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: SetWord) -> SetWord {
        SetWord(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: SetWord) -> SetWord {
        SetWord(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: SetWord) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: SetWord) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest element, if any.
    pub fn max_element(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(127 - self.0.leading_zeros() as usize)
        }
    }

    pub fn iter(self) -> Elements {
        Elements(self.0)
    }

    pub fn elements(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self` with exactly `h` elements, in colex order.
    pub fn subsets_of_size(self, h: usize) -> Combinations {
        Combinations::new(self.elements(), h)
    }

    /// Image under a relabelling `map[old] = new`.
    pub fn relabel(self, map: &[usize]) -> SetWord {
        let mut bits = 0u128;
        for e in self.iter() {
            bits |= 1u128 << map[e];
        }
        SetWord(bits)
    }
}

impl fmt::Debug for SetWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for SetWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let mut first = true;
        for e in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

/// Ascending iterator over the elements of a [`SetWord`].
#[derive(Clone)]
pub struct Elements(u128);

impl Iterator for Elements {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

/// `h`-element subsets of a fixed element list, yielded in colex order.
pub struct Combinations {
    pool: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(pool: Vec<usize>, h: usize) -> Self {
        let done = h > pool.len();
        Combinations { pool, idx: (0..h).collect(), done }
    }
}

impl Iterator for Combinations {
    type Item = SetWord;

    fn next(&mut self) -> Option<SetWord> {
        if self.done {
            return None;
        }
        let mut bits = 0u128;
        for &i in &self.idx {
            bits |= 1u128 << self.pool[i];
        }
        // colex successor: bump the lowest index that can move, reset the ones below it
        let h = self.idx.len();
        let mut j = 0;
        loop {
            if j == h {
                self.done = true;
                break;
            }
            let limit = if j + 1 < h { self.idx[j + 1] } else { self.pool.len() };
            if self.idx[j] + 1 < limit {
                self.idx[j] += 1;
                for (l, slot) in self.idx.iter_mut().take(j).enumerate() {
                    *slot = l;
                }
                break;
            }
            j += 1;
        }
        Some(SetWord(bits))
    }
}

/// All `k`-subsets of `[n]`, colex order.
pub fn k_subsets(n: usize, k: usize) -> Combinations {
    Combinations::new((0..n).collect(), k)
}

/// Exact binomial coefficient in `u128`; `C(m, a) = 0` when `a > m`.
pub fn binomial(m: u64, a: u64) -> u128 {
    if a > m {
        return 0;
    }
    let a = a.min(m - a);
    let mut acc: u128 = 1;
    for i in 0..a {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// An immutable, duplicate-free family of subsets of `[ground_n]`.
///
/// Equality compares the ground size and the members; the uniformity tag is
/// a cached property and does not take part.
#[derive(Clone)]
pub struct Family {
    members: Vec<SetWord>,
    ground_n: usize,
    uniformity: Option<usize>,
}

impl Family {
    /// Builds a family, sorting and deduplicating the members. Uniformity is
    /// inferred when every member has the same size.
    pub fn new<I: IntoIterator<Item = SetWord>>(ground_n: usize, members: I) -> Result<Self> {
        if ground_n > MAX_GROUND {
            return Err(Error::GroundTooLarge(ground_n));
        }
        let mut members: Vec<SetWord> = members.into_iter().collect();
        let ground = SetWord::full(ground_n);
        for m in &members {
            if !m.is_subset(ground) {
                let element = m.difference(ground).iter().next().unwrap_or(0);
                return Err(Error::ElementOutOfRange { element, n: ground_n });
            }
        }
        members.sort_unstable();
        members.dedup();
        let uniformity = match members.first() {
            Some(first) if members.iter().all(|m| m.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        Ok(Family { members, ground_n, uniformity })
    }

    /// Builds a family whose members must all have size `k`.
    pub fn uniform<I: IntoIterator<Item = SetWord>>(ground_n: usize, k: usize, members: I) -> Result<Self> {
        let mut fam = Family::new(ground_n, members)?;
        if let Some(bad) = fam.members.iter().find(|m| m.len() != k) {
            return Err(Error::InvalidInput(format!("member {{{bad}}} does not have size {k}")));
        }
        fam.uniformity = Some(k);
        Ok(fam)
    }

    pub fn empty(ground_n: usize) -> Self {
        Family { members: Vec::new(), ground_n: ground_n.min(MAX_GROUND), uniformity: None }
    }

    /// Convenience constructor from element lists.
    pub fn from_lists(ground_n: usize, lists: &[&[usize]]) -> Result<Self> {
        let sets = lists
            .iter()
            .map(|l| SetWord::from_elements(l.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Family::new(ground_n, sets)
    }

    /// `C([n], k)`.
    pub fn complete(n: usize, k: usize) -> Result<Self> {
        let mut fam = Family::new(n, k_subsets(n, k))?;
        fam.uniformity = Some(k);
        Ok(fam)
    }

    pub(crate) fn from_sorted_unchecked(ground_n: usize, members: Vec<SetWord>, uniformity: Option<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { members, ground_n, uniformity }
    }

    pub fn members(&self) -> &[SetWord] {
        &self.members
    }

    pub fn ground_n(&self) -> usize {
        self.ground_n
    }

    pub fn uniformity(&self) -> Option<usize> {
        self.uniformity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, set: SetWord) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    pub fn index_of(&self, set: SetWord) -> Option<usize> {
        self.members.binary_search(&set).ok()
    }

    /// Same members over a larger or smaller ground set.
    pub fn with_ground(&self, ground_n: usize) -> Result<Self> {
        Family::new(ground_n, self.members.iter().copied()).map(|mut f| {
            if self.uniformity.is_some() {
                f.uniformity = self.uniformity;
            }
            f
        })
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn max_member_size(&self) -> Option<usize> {
        self.members.iter().map(|m| m.len()).max()
    }

    pub fn min_member_size(&self) -> Option<usize> {
        self.members.iter().map(|m| m.len()).min()
    }

    /// Union of all members.
    pub fn support(&self) -> SetWord {
        self.members.iter().fold(SetWord::EMPTY, |acc, &m| acc.union(m))
    }

    /// The members of size exactly `h`.
    pub fn layer(&self, h: usize) -> Family {
        let members: Vec<SetWord> = self.members.iter().copied().filter(|m| m.len() == h).collect();
        Family::from_sorted_unchecked(self.ground_n, members, Some(h))
    }

    /// All `h`-subsets of members. The flag is `true` when no member has at
    /// least `h` elements (so the shadow is empty for a degenerate reason).
    pub fn shadow(&self, h: usize) -> (Family, bool) {
        let mut out: Vec<SetWord> = Vec::new();
        let mut any = false;
        for &m in &self.members {
            if m.len() >= h {
                any = true;
                out.extend(m.subsets_of_size(h));
            }
        }
        out.sort_unstable();
        out.dedup();
        (Family::from_sorted_unchecked(self.ground_n, out, Some(h)), !any)
    }

    /// `F(A, B) = { F \ B : F in fam, F ∩ B = A }`.
    pub fn restrict(&self, a: SetWord, b: SetWord) -> Result<Family> {
        if !a.is_subset(b) {
            return Err(Error::Precondition(format!("restriction needs A ⊆ B, got A={{{a}}} B={{{b}}}")));
        }
        let out = self
            .members
            .iter()
            .filter(|m| m.intersection(b) == a)
            .map(|m| m.difference(b));
        Family::new(self.ground_n, out)
    }

    /// `F(B) = F(B, B)`.
    pub fn link(&self, b: SetWord) -> Family {
        self.restrict(b, b).expect("B ⊆ B")
    }

    /// Members containing at least one member of `basis`.
    pub fn filter_superset(&self, basis: &Family) -> Family {
        let members: Vec<SetWord> = self
            .members
            .iter()
            .copied()
            .filter(|m| basis.members.iter().any(|b| b.is_subset(*m)))
            .collect();
        Family::from_sorted_unchecked(self.ground_n, members, self.uniformity)
    }

    /// All pairwise unions `F ∪ B`.
    pub fn join(&self, other: &Family) -> Family {
        let mut out: Vec<SetWord> = Vec::with_capacity(self.len() * other.len());
        for &f in &self.members {
            for &b in &other.members {
                out.push(f.union(b));
            }
        }
        out.sort_unstable();
        out.dedup();
        let n = self.ground_n.max(other.ground_n);
        let uniformity = match out.first() {
            Some(first) if out.iter().all(|m| m.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        Family::from_sorted_unchecked(n, out, uniformity)
    }

    /// Image under the relabelling `map[old] = new`.
    pub fn relabel(&self, map: &[usize]) -> Result<Family> {
        let fam = Family::new(self.ground_n, self.members.iter().map(|m| m.relabel(map)))?;
        Ok(Family { uniformity: self.uniformity.or(fam.uniformity), ..fam })
    }

    /// Serializes in the text format:
    ///
    /// ```text
    /// n=6 k=2
    /// 0 1
    /// 0 2
    /// ```
    ///
    /// The empty set is written as `{}`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.uniformity {
            Some(k) => s.push_str(&format!("n={} k={}\n", self.ground_n, k)),
            None => s.push_str(&format!("n={} k=-\n", self.ground_n)),
        }
        for m in &self.members {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Family> {
        let mut header: Option<(usize, Option<usize>)> = None;
        let mut sets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if header.is_none() {
                header = Some(parse_header(line).map_err(|msg| Error::Parse { line: line_no, msg })?);
                continue;
            }
            if line == "{}" {
                sets.push(SetWord::EMPTY);
                continue;
            }
            let mut elems = Vec::new();
            for tok in line.split_whitespace() {
                let e: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse { line: line_no, msg: format!("not an element: {tok:?}") })?;
                elems.push(e);
            }
            let (n, _) = header.expect("header parsed");
            if let Some(&bad) = elems.iter().find(|&&e| e >= n) {
                return Err(Error::Parse { line: line_no, msg: format!("element {bad} outside [{n}]") });
            }
            sets.push(SetWord::from_elements(elems)?);
        }
        let (n, k) = header.ok_or(Error::Parse { line: 0, msg: "missing header `n=<int> k=<int|->`".into() })?;
        match k {
            Some(k) => Family::uniform(n, k, sets),
            None => {
                let mut fam = Family::new(n, sets)?;
                fam.uniformity = None;
                Ok(fam)
            }
        }
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, Option<usize>), String> {
    let mut n = None;
    let mut k = None;
    for tok in line.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            let v: usize = v.parse().map_err(|_| format!("bad ground size {v:?}"))?;
            if v > MAX_GROUND {
                return Err(format!("ground set of size {v} exceeds the 128-element limit"));
            }
            n = Some(v);
        } else if let Some(v) = tok.strip_prefix("k=") {
            k = Some(if v == "-" { None } else { Some(v.parse().map_err(|_| format!("bad uniformity {v:?}"))?) });
        } else {
            return Err(format!("unexpected header token {tok:?}"));
        }
    }
    match (n, k) {
        (Some(n), Some(k)) => Ok((n, k)),
        _ => Err("header must be `n=<int> k=<int|->`".into()),
    }
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.ground_n == other.ground_n && self.members == other.members
    }
}

impl Eq for Family {}

impl std::hash::Hash for Family {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ground_n.hash(state);
        self.members.hash(state);
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::parse(s)
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.members.iter()).finish()
    }
}
