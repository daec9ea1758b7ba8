//! Builders and exact counters for the extremal Duke–Erdős families.
//!
//! Every family here has the form `{F ∈ C([n],k) : F ∩ V ∈ traces}` for a
//! fixed support `V`, so members are produced as a trace `Q ⊆ V` joined with a
//! free completion outside `V`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::lowdim::{phitilde, LayeredCandidate};
use crate::setcore::{Combinations, Family, SetWord, MAX_GROUND};

/// Largest family the builders will materialise.
pub const MATERIALIZE_LIMIT: u128 = 5_000_000;

fn check_ground(support: SetWord, n: usize, k: usize) -> Result<()> {
    if n > MAX_GROUND {
        return Err(Error::GroundTooLarge(n));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    if !support.is_subset(SetWord::full(n)) {
        return Err(Error::InvalidInput(format!("support {{{support}}} is not inside [{n}]")));
    }
    Ok(())
}

fn big_binomial(m: usize, a: usize) -> BigUint {
    if a > m {
        return BigUint::from(0u32);
    }
    let a = a.min(m - a);
    let mut acc = BigUint::from(1u32);
    for i in 0..a {
        acc *= BigUint::from(m - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Number of members `build_from_traces` would produce.
fn count_from_traces<'a, I: IntoIterator<Item = &'a SetWord>>(traces: I, support: SetWord, n: usize, k: usize) -> BigUint {
    let free = n - support.len();
    let mut total = BigUint::from(0u32);
    for q in traces {
        if q.is_subset(support) && q.len() <= k {
            total += big_binomial(free, k - q.len());
        }
    }
    total
}

/// `{F ∈ C([n],k) : F ∩ support ∈ traces}`.
pub fn build_from_traces(traces: &[SetWord], support: SetWord, n: usize, k: usize) -> Result<Family> {
    check_ground(support, n, k)?;
    let total = count_from_traces(traces, support, n, k);
    if total > BigUint::from(MATERIALIZE_LIMIT) {
        return Err(Error::Budget(format!("family would have {total} members")));
    }
    let outside: Vec<usize> = SetWord::full(n).difference(support).elements();
    let mut members = Vec::new();
    for &q in traces {
        if !q.is_subset(support) || q.len() > k {
            continue;
        }
        for r in Combinations::new(outside.clone(), k - q.len()) {
            members.push(q.union(r));
        }
    }
    Family::uniform(n, k, members)
}

/// `{F ∈ C([n],k) : F ∩ support(T) ∈ T}`.
pub fn build_basic(t_fam: &Family, n: usize, k: usize) -> Result<Family> {
    build_from_traces(t_fam.members(), t_fam.support(), n, k)
}

/// `F_S = {F ∈ C([n],k) : F ∩ support(S^(t)) ∈ S}`.
pub fn build_fs(cand: &LayeredCandidate, n: usize, k: usize) -> Result<Family> {
    if k < cand.t {
        return Err(Error::InvalidInput(format!("k = {k} is below t = {}", cand.t)));
    }
    check_ground(cand.family.support(), n, k)?;
    build_from_traces(cand.family.members(), cand.t_support(), n, k)
}

/// `|F_S| = Σ_i |S^(t+i)| · C(n − |support S^(t)|, k − t − i)`.
pub fn count_fs(cand: &LayeredCandidate, n: usize, k: usize) -> Result<BigUint> {
    if k < cand.t {
        return Err(Error::InvalidInput(format!("k = {k} is below t = {}", cand.t)));
    }
    check_ground(cand.family.support(), n, k)?;
    Ok(count_from_traces(cand.family.members(), cand.t_support(), n, k))
}

/// `|F_S| = Σ_i φ̃_i(S) · C(n − T, k − t − i)`, the same count after
/// embedding the support into `[T]`. Needs `n ≥ T`.
pub fn count_fs_via_phitilde(cand: &LayeredCandidate, n: usize, k: usize) -> Result<BigUint> {
    let big_t = cand.big_t();
    if n < big_t {
        return Err(Error::Precondition(format!("n = {n} is below T = {big_t}")));
    }
    if k < cand.t {
        return Err(Error::InvalidInput(format!("k = {k} is below t = {}", cand.t)));
    }
    let v = phitilde(cand)?;
    let mut total = BigUint::from(0u32);
    for (i, c) in v.components().iter().enumerate() {
        if cand.t + i > k {
            break;
        }
        total += c * big_binomial(n - big_t, k - cand.t - i);
    }
    Ok(total)
}

/// The odd-`s` extremal family: cliques on `{0..s-1}` and `{s..2s-1}`, members
/// meeting the union in at least two points and neither clique in exactly one.
pub fn build_theorem13(s: usize, n: usize, k: usize) -> Result<Family> {
    if s % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "s = {s} is even; the two-clique extremal family is only defined for odd s"
        )));
    }
    if s < 3 || k < 5 || n < 2 * s + k {
        return Err(Error::Precondition(format!("need odd s ≥ 3, k ≥ 5 and n ≥ 2s + k; got s={s} n={n} k={k}")));
    }
    let first = SetWord::full(s);
    let support = SetWord::full(2 * s);
    let traces: Vec<SetWord> = (2..=k.min(2 * s))
        .flat_map(|h| support.subsets_of_size(h))
        .filter(|q| q.intersection(first).len() != 1 && q.difference(first).len() != 1)
        .collect();
    build_from_traces(&traces, support, n, k)
}

/// Outcome of [`check_structural`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructuralReport {
    /// Members of `build_basic(T, n, k)` absent from `F`.
    pub missing: Vec<SetWord>,
    /// Members of `F` containing no `T ∈ T_fam` and meeting the support in at
    /// most `t` points.
    pub violators: Vec<SetWord>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.violators.is_empty()
    }
}

/// Checks that `F` contains the basic family of `T_fam` and that each member
/// either contains some `T ∈ T_fam` or meets `support(T_fam)` in at least
/// `t + 1` points.
pub fn check_structural(f: &Family, t_fam: &Family, t: usize) -> Result<StructuralReport> {
    let Some(k) = f.uniformity() else {
        return Err(Error::Precondition("F must be a non-empty uniform family".into()));
    };
    if let Some(h) = t_fam.uniformity() {
        if h != t {
            return Err(Error::Precondition(format!("T_fam is {h}-uniform, expected t = {t}")));
        }
    }
    let basic = build_basic(t_fam, f.ground_n(), k)?;
    let missing = basic.members().iter().copied().filter(|&b| !f.contains(b)).collect();
    let support = t_fam.support();
    let violators = f
        .members()
        .iter()
        .copied()
        .filter(|&m| m.intersection(support).len() <= t && !t_fam.members().iter().any(|&x| x.is_subset(m)))
        .collect();
    Ok(StructuralReport { missing, violators })
}
