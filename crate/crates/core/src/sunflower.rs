//! Sunflower recognition, exhaustive search and certificate checking.
//!
//! A sunflower with `s` petals is a collection of `s` distinct sets whose
//! pairwise intersections all equal the common intersection (the core).
//! Every negative answer returned here is exhaustive.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setcore::{Family, SetWord};

/// Cap on the number of candidate cores examined by [`find_sunflower`].
pub const MAX_CANDIDATE_CORES: usize = 500_000;

/// Restriction on the size of a sunflower's core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoreConstraint {
    Exact(usize),
    AtMost(usize),
    Any,
}

impl CoreConstraint {
    #[inline]
    pub fn allows(self, core_size: usize) -> bool {
        match self {
            CoreConstraint::Exact(c) => core_size == c,
            CoreConstraint::AtMost(c) => core_size <= c,
            CoreConstraint::Any => true,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            CoreConstraint::Exact(_) => "exact",
            CoreConstraint::AtMost(_) => "at_most",
            CoreConstraint::Any => "any",
        }
    }

    pub fn bound(self) -> usize {
        match self {
            CoreConstraint::Exact(c) | CoreConstraint::AtMost(c) => c,
            CoreConstraint::Any => 0,
        }
    }

    pub fn from_parts(kind: &str, c: usize) -> Result<Self> {
        match kind {
            "exact" => Ok(CoreConstraint::Exact(c)),
            "at_most" => Ok(CoreConstraint::AtMost(c)),
            "any" => Ok(CoreConstraint::Any),
            other => Err(Error::InvalidInput(format!("unknown core constraint kind {other:?}"))),
        }
    }
}

impl fmt::Display for CoreConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreConstraint::Exact(c) => write!(f, "exact:{c}"),
            CoreConstraint::AtMost(c) => write!(f, "at_most:{c}"),
            CoreConstraint::Any => write!(f, "any"),
        }
    }
}

impl std::str::FromStr for CoreConstraint {
    type Err = Error;

    /// Accepts `exact:C`, `at_most:C` (or `atmost:C`) and `any`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "any" {
            return Ok(CoreConstraint::Any);
        }
        let (kind, c) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("core constraint {s:?} is not KIND:C or any")))?;
        let c: usize = c
            .parse()
            .map_err(|_| Error::InvalidInput(format!("core size {c:?} is not a nonnegative integer")))?;
        let kind = if kind == "atmost" { "at_most" } else { kind };
        CoreConstraint::from_parts(kind, c)
    }
}

/// `s` member indices into a family together with their common core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SunflowerCert {
    pub member_indices: Vec<usize>,
    pub core: SetWord,
}

/// Returns the core if `sets` form a sunflower. A single set is its own core.
pub fn is_sunflower(sets: &[SetWord]) -> Result<Option<SetWord>> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("a sunflower needs at least one set".into()));
    }
    let distinct: BTreeSet<SetWord> = sets.iter().copied().collect();
    if distinct.len() != sets.len() {
        return Err(Error::InvalidInput("sunflower members must be distinct".into()));
    }
    let core = sets.iter().skip(1).fold(sets[0], |acc, &x| acc.intersection(x));
    for (i, &a) in sets.iter().enumerate() {
        for &b in &sets[i + 1..] {
            if a.intersection(b) != core {
                return Ok(None);
            }
        }
    }
    Ok(Some(core))
}

/// Finds `need` pairwise-disjoint petals among `petals` (each tagged with a
/// member index). Returns the chosen tags, or `None` when no such choice
/// exists. Exhaustive.
pub(crate) fn find_disjoint(petals: &[(usize, SetWord)], need: usize) -> Option<Vec<usize>> {
    if need == 0 {
        return Some(Vec::new());
    }
    if petals.len() < need {
        return None;
    }
    // an empty petal is disjoint from everything, so it can always be taken
    let mut chosen = Vec::with_capacity(need);
    let mut rest: Vec<(usize, SetWord)> = Vec::with_capacity(petals.len());
    for &(idx, p) in petals {
        if p.is_empty() && chosen.is_empty() {
            chosen.push(idx);
        } else if !p.is_empty() {
            rest.push((idx, p));
        }
    }
    if chosen.len() == need {
        return Some(chosen);
    }

    // greedy pass: smallest petals first
    rest.sort_by_key(|&(idx, p)| (p.len(), idx));
    let mut used = SetWord::EMPTY;
    let mut greedy = chosen.clone();
    for &(idx, p) in &rest {
        if p.is_disjoint(used) {
            used = used.union(p);
            greedy.push(idx);
            if greedy.len() == need {
                return Some(greedy);
            }
        }
    }

    rest.sort_by_key(|&(idx, p)| (std::cmp::Reverse(p.len()), idx));
    let need_more = need - chosen.len();
    if pack(&rest, need_more, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

/// Exact disjoint packing. Branches on the element shared by the most petals:
/// at most one petal through it can be used.
fn pack(petals: &[(usize, SetWord)], need: usize, chosen: &mut Vec<usize>) -> bool {
    if need == 0 {
        return true;
    }
    if petals.len() < need {
        return false;
    }
    let support = petals.iter().fold(SetWord::EMPTY, |acc, &(_, p)| acc.union(p));
    let mut best_elem = None;
    let mut best_count = 0;
    for e in support.iter() {
        let c = petals.iter().filter(|(_, p)| p.contains(e)).count();
        if c > best_count {
            best_count = c;
            best_elem = Some(e);
        }
    }
    let Some(pivot) = best_elem else {
        return false;
    };
    if best_count == 1 {
        // every petal is disjoint from every other
        chosen.extend(petals.iter().take(need).map(|&(i, _)| i));
        return true;
    }
    for &(idx, p) in petals.iter().filter(|(_, p)| p.contains(pivot)) {
        let remaining: Vec<(usize, SetWord)> = petals.iter().copied().filter(|(_, q)| q.is_disjoint(p)).collect();
        chosen.push(idx);
        if pack(&remaining, need - 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    let without: Vec<(usize, SetWord)> = petals.iter().copied().filter(|(_, q)| !q.contains(pivot)).collect();
    pack(&without, need, chosen)
}

/// Candidate cores: the empty set, then all pairwise intersections ordered
/// by size, restricted to sizes the constraint allows.
fn candidate_cores(members: &[SetWord], cc: CoreConstraint) -> Result<Vec<SetWord>> {
    let mut cores: BTreeSet<(usize, SetWord)> = BTreeSet::new();
    if cc.allows(0) {
        cores.insert((0, SetWord::EMPTY));
    }
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let c = a.intersection(b);
            if cc.allows(c.len()) {
                cores.insert((c.len(), c));
                if cores.len() > MAX_CANDIDATE_CORES {
                    return Err(Error::Budget(format!(
                        "more than {MAX_CANDIDATE_CORES} candidate cores; refusing rather than answering heuristically"
                    )));
                }
            }
        }
    }
    Ok(cores.into_iter().map(|(_, c)| c).collect())
}

/// Searches `fam` for a sunflower with `s` petals whose core satisfies `cc`.
pub fn find_sunflower(fam: &Family, s: usize, cc: CoreConstraint) -> Result<Option<SunflowerCert>> {
    if s < 2 {
        return Err(Error::InvalidInput(format!("sunflowers need s >= 2 petals, got {s}")));
    }
    let members = fam.members();
    if members.len() < s {
        return Ok(None);
    }
    for core in candidate_cores(members, cc)? {
        let petals: Vec<(usize, SetWord)> = members
            .iter()
            .enumerate()
            .filter(|(_, m)| core.is_subset(**m))
            .map(|(i, m)| (i, m.difference(core)))
            .collect();
        if let Some(mut idx) = find_disjoint(&petals, s) {
            idx.sort_unstable();
            return Ok(Some(SunflowerCert { member_indices: idx, core }));
        }
    }
    Ok(None)
}

/// `true` iff the family has no `s`-petal sunflower with core allowed by `cc`.
pub fn is_admissible(fam: &Family, s: usize, cc: CoreConstraint) -> Result<bool> {
    Ok(find_sunflower(fam, s, cc)?.is_none())
}

/// Whether adding `new` to `existing` would complete an `s`-petal sunflower
/// (containing `new`) with core allowed by `cc`. `new` must not already be in
/// `existing`.
pub fn completes_sunflower(existing: &[SetWord], new: SetWord, s: usize, cc: CoreConstraint) -> bool {
    if existing.len() + 1 < s {
        return false;
    }
    let mut cores: Vec<SetWord> = existing
        .iter()
        .map(|&y| y.intersection(new))
        .filter(|c| cc.allows(c.len()))
        .collect();
    cores.sort_unstable_by_key(|c| (c.len(), c.0));
    cores.dedup();
    for core in cores {
        // partners must meet `new` in exactly the core
        let petals: Vec<(usize, SetWord)> = existing
            .iter()
            .enumerate()
            .filter(|(_, y)| y.intersection(new) == core)
            .map(|(i, y)| (i, y.difference(core)))
            .collect();
        if petals.len() + 1 < s {
            continue;
        }
        // an empty petal for `new` itself rules out a second empty petal
        let petals: Vec<(usize, SetWord)> = if new == core {
            petals.into_iter().filter(|(_, p)| !p.is_empty()).collect()
        } else {
            petals
        };
        if find_disjoint(&petals, s - 1).is_some() {
            return true;
        }
    }
    false
}

/// Outcome of [`verify_cert`] with a human-readable reason on rejection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertCheck {
    pub valid: bool,
    pub diagnostic: Option<String>,
}

impl CertCheck {
    fn ok() -> Self {
        CertCheck { valid: true, diagnostic: None }
    }

    fn fail(msg: impl Into<String>) -> Self {
        CertCheck { valid: false, diagnostic: Some(msg.into()) }
    }
}

/// Checks a certificate against a family. Never panics on malformed input.
pub fn verify_cert(fam: &Family, cert: &SunflowerCert, s: usize, cc: CoreConstraint) -> CertCheck {
    let idx = &cert.member_indices;
    if idx.len() != s {
        return CertCheck::fail(format!("certificate has {} members, expected {s}", idx.len()));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= fam.len()) {
        return CertCheck::fail(format!("index {bad} out of range for a family of {} members", fam.len()));
    }
    let distinct: BTreeSet<usize> = idx.iter().copied().collect();
    if distinct.len() != idx.len() {
        return CertCheck::fail("member indices are not distinct");
    }
    let sets: Vec<SetWord> = idx.iter().map(|&i| fam.members()[i]).collect();
    for (i, &a) in sets.iter().enumerate() {
        if !cert.core.is_subset(a) {
            return CertCheck::fail(format!("core is not contained in member {{{a}}}"));
        }
        for &b in &sets[i + 1..] {
            if a.intersection(b) != cert.core {
                return CertCheck::fail(format!("members {{{a}}} and {{{b}}} do not meet exactly in the core"));
            }
        }
    }
    if s == 1 && sets[0] != cert.core {
        return CertCheck::fail("a one-petal sunflower has the set itself as core");
    }
    if !cc.allows(cert.core.len()) {
        return CertCheck::fail(format!("core size {} violates {cc}", cert.core.len()));
    }
    CertCheck::ok()
}

/// JSON form of a certificate, members written out explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertJson {
    pub s: usize,
    pub core: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    pub constraint: ConstraintJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub kind: String,
    pub c: usize,
}

impl From<CoreConstraint> for ConstraintJson {
    fn from(cc: CoreConstraint) -> Self {
        ConstraintJson { kind: cc.kind().to_string(), c: cc.bound() }
    }
}

impl ConstraintJson {
    pub fn to_constraint(&self) -> Result<CoreConstraint> {
        CoreConstraint::from_parts(&self.kind, self.c)
    }
}

impl CertJson {
    pub fn new(fam: &Family, cert: &SunflowerCert, s: usize, cc: CoreConstraint) -> Self {
        CertJson {
            s,
            core: cert.core.elements(),
            members: cert.member_indices.iter().map(|&i| fam.members()[i].elements()).collect(),
            constraint: cc.into(),
        }
    }

    /// Resolves the listed member sets to indices in `fam`. A set absent from
    /// the family yields an out-of-range index so that verification fails
    /// with a diagnostic instead of erroring here.
    pub fn to_cert(&self, fam: &Family) -> Result<SunflowerCert> {
        let core = SetWord::from_elements(self.core.iter().copied())?;
        let mut member_indices = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let set = SetWord::from_elements(m.iter().copied())?;
            member_indices.push(fam.index_of(set).unwrap_or(usize::MAX));
        }
        Ok(SunflowerCert { member_indices, core })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(e: &[usize]) -> SetWord {
        SetWord::from_elements(e.iter().copied()).unwrap()
    }

    fn fam(n: usize, lists: &[&[usize]]) -> Family {
        Family::from_lists(n, lists).unwrap()
    }

    fn two_triangles() -> Family {
        fam(6, &[&[0, 1], &[0, 2], &[1, 2], &[3, 4], &[3, 5], &[4, 5]])
    }

    #[test]
    fn is_sunflower_examples() {
        assert_eq!(is_sunflower(&[set(&[0, 1]), set(&[2, 3]), set(&[4, 5])]).unwrap(), Some(SetWord::EMPTY));
        assert_eq!(is_sunflower(&[set(&[0, 1]), set(&[0, 2]), set(&[0, 3])]).unwrap(), Some(set(&[0])));
        assert_eq!(is_sunflower(&[set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]).unwrap(), None);
        assert_eq!(is_sunflower(&[set(&[4, 7])]).unwrap(), Some(set(&[4, 7])));
        assert!(is_sunflower(&[set(&[0]), set(&[0])]).is_err());
        assert!(is_sunflower(&[]).is_err());
    }

    #[test]
    fn star_has_core_of_size_one() {
        let star = fam(4, &[&[0, 1], &[0, 2], &[0, 3]]);
        let cert = find_sunflower(&star, 3, CoreConstraint::Exact(1)).unwrap().unwrap();
        assert_eq!(cert.core, set(&[0]));
        assert!(verify_cert(&star, &cert, 3, CoreConstraint::Exact(1)).valid);
    }

    #[test]
    fn two_triangles_are_sunflower_free() {
        assert!(find_sunflower(&two_triangles(), 3, CoreConstraint::Any).unwrap().is_none());
        assert!(is_admissible(&two_triangles(), 3, CoreConstraint::AtMost(1)).unwrap());
    }

    #[test]
    fn complete_graph_on_six_has_perfect_matching() {
        let k6 = Family::complete(6, 2).unwrap();
        let cert = find_sunflower(&k6, 3, CoreConstraint::Exact(0)).unwrap().unwrap();
        assert_eq!(cert.core, SetWord::EMPTY);
        assert!(verify_cert(&k6, &cert, 3, CoreConstraint::Exact(0)).valid);
    }

    #[test]
    fn k5_is_not_admissible() {
        let k5 = Family::complete(5, 2).unwrap();
        assert!(!is_admissible(&k5, 3, CoreConstraint::AtMost(1)).unwrap());
    }

    #[test]
    fn s_below_two_is_rejected() {
        assert!(find_sunflower(&two_triangles(), 1, CoreConstraint::Any).is_err());
    }

    #[test]
    fn verify_cert_rejections() {
        let star = fam(4, &[&[0, 1], &[0, 2], &[0, 3]]);
        let good = SunflowerCert { member_indices: vec![0, 1, 2], core: set(&[0]) };
        assert!(verify_cert(&star, &good, 3, CoreConstraint::Exact(1)).valid);

        let corrupted = SunflowerCert { core: SetWord::EMPTY, ..good.clone() };
        assert!(!verify_cert(&star, &corrupted, 3, CoreConstraint::Exact(1)).valid);

        let short = SunflowerCert { member_indices: vec![0, 1], core: set(&[0]) };
        assert!(!verify_cert(&star, &short, 3, CoreConstraint::Exact(1)).valid);

        let out_of_range = SunflowerCert { member_indices: vec![0, 1, 9], core: set(&[0]) };
        let check = verify_cert(&star, &out_of_range, 3, CoreConstraint::Exact(1));
        assert!(!check.valid);
        assert!(check.diagnostic.unwrap().contains("out of range"));

        let repeated = SunflowerCert { member_indices: vec![0, 0, 1], core: set(&[0]) };
        assert!(!verify_cert(&star, &repeated, 3, CoreConstraint::Exact(1)).valid);

        assert!(!verify_cert(&star, &good, 3, CoreConstraint::Exact(0)).valid);
    }

    #[test]
    fn empty_petal_counts_once() {
        // {0}, {0,1}, {0,2}: core {0}, one petal empty
        let f = fam(3, &[&[0], &[0, 1], &[0, 2]]);
        let cert = find_sunflower(&f, 3, CoreConstraint::Exact(1)).unwrap().unwrap();
        assert_eq!(cert.member_indices.len(), 3);
        assert!(verify_cert(&f, &cert, 3, CoreConstraint::Exact(1)).valid);
        // {0}, {0,1} only: no 3 petals
        let g = fam(3, &[&[0], &[0, 1]]);
        assert!(find_sunflower(&g, 3, CoreConstraint::Any).unwrap().is_none());
    }

    #[test]
    fn completes_sunflower_matches_full_search() {
        let base = two_triangles();
        let cross = set(&[0, 3]);
        assert!(completes_sunflower(base.members(), cross, 3, CoreConstraint::AtMost(1)));
        let triple = set(&[0, 1, 2]);
        assert!(!completes_sunflower(base.members(), triple, 3, CoreConstraint::AtMost(1)));
        // {0} with edges {0,1},{0,2}: core {0}, `new` has the empty petal
        assert!(completes_sunflower(&[set(&[0, 1]), set(&[0, 2])], set(&[0]), 3, CoreConstraint::Exact(1)));
    }

    #[test]
    fn constraint_parsing() {
        assert_eq!("exact:1".parse::<CoreConstraint>().unwrap(), CoreConstraint::Exact(1));
        assert_eq!("at_most:2".parse::<CoreConstraint>().unwrap(), CoreConstraint::AtMost(2));
        assert_eq!("any".parse::<CoreConstraint>().unwrap(), CoreConstraint::Any);
        assert!("exact".parse::<CoreConstraint>().is_err());
        assert!("fuzzy:1".parse::<CoreConstraint>().is_err());
    }

    #[test]
    fn cert_json_round_trip() {
        let star = fam(4, &[&[0, 1], &[0, 2], &[0, 3]]);
        let cert = find_sunflower(&star, 3, CoreConstraint::Exact(1)).unwrap().unwrap();
        let json = serde_json::to_string(&CertJson::new(&star, &cert, 3, CoreConstraint::Exact(1))).unwrap();
        assert_eq!(json, r#"{"s":3,"core":[0],"members":[[0,1],[0,2],[0,3]],"constraint":{"kind":"exact","c":1}}"#);
        let back: CertJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_cert(&star).unwrap(), cert);
    }
}
