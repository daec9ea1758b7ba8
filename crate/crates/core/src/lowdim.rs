//! The layered low-dimensional problem behind the Duke–Erdős extremal
//! families.
//!
//! A candidate `S` mixes layers of sizes `t..=T` with `T = t·φ(s, t)`, every
//! member lying inside the support of its `t`-layer. Its vector `φ̃(S)` has
//! components
//!
//! ```text
//! φ̃_0 = |S^(t)|
//! φ̃_i = |S^(t+i)| + Σ_{j<i} |S^(t+j)| · C(T − |supp S^(t)|, i − j)
//! ```
//!
//! and `S_*` maximises it lexicographically among candidates with no
//! `s`-petal sunflower whose core has at most `t - 1` elements.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::search::{self, canon, Budget, SearchResult, WitnessMode, WITNESS_CAP};
use crate::setcore::{binomial, k_subsets, Family, SetWord};
use crate::sunflower::{completes_sunflower, find_sunflower, CoreConstraint, SunflowerCert};

/// Largest number of `(t+i)`-subsets of `[T]` that [`gis_count`] will walk.
pub const GIS_ENUMERATION_LIMIT: u128 = 50_000_000;

/// A mixed-uniformity family with the parameters that fix `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredCandidate {
    pub family: Family,
    pub s: usize,
    pub t: usize,
    pub phi_st: usize,
}

impl LayeredCandidate {
    pub fn new(family: Family, s: usize, t: usize, phi_st: usize) -> Self {
        LayeredCandidate { family, s, t, phi_st }
    }

    /// `T = t·φ(s, t)`.
    pub fn big_t(&self) -> usize {
        self.t * self.phi_st
    }

    pub fn t_layer(&self) -> Family {
        self.family.layer(self.t)
    }

    pub fn t_support(&self) -> SetWord {
        self.t_layer().support()
    }

    /// `|S^(t+i)|` for `i = 0..=T-t`.
    pub fn layer_counts(&self) -> Vec<usize> {
        let top = self.big_t().saturating_sub(self.t);
        let mut counts = vec![0usize; top + 1];
        for m in self.family.members() {
            if m.len() >= self.t && m.len() - self.t <= top {
                counts[m.len() - self.t] += 1;
            }
        }
        counts
    }

    /// The first member breaking the size range `[t, T]` or the support
    /// condition, if any.
    pub fn property2_violation(&self) -> Option<SetWord> {
        let supp = self.t_support();
        let big_t = self.big_t();
        self.family
            .members()
            .iter()
            .copied()
            .find(|m| m.len() < self.t || m.len() > big_t || !m.is_subset(supp))
    }

    fn check_property2(&self) -> Result<()> {
        if let Some(bad) = self.property2_violation() {
            return Err(Error::SupportViolation { member: format!("{{{bad}}}") });
        }
        if self.t_support().len() > self.big_t() {
            return Err(Error::Precondition(format!(
                "t-layer support has {} points, more than T = {}",
                self.t_support().len(),
                self.big_t()
            )));
        }
        Ok(())
    }

    /// Relabels the `t`-layer support onto `[|support|]` preserving order.
    pub fn embedded(&self) -> Result<LayeredCandidate> {
        let supp = self.t_support();
        let top = self.family.support().max_element().map_or(0, |e| e + 1);
        let mut map: Vec<usize> = vec![0; top.max(1)];
        for (new, old) in supp.iter().enumerate() {
            map[old] = new;
        }
        let ground = self.big_t().max(supp.len());
        let members = self.family.members().iter().map(|m| m.relabel(&map));
        Ok(LayeredCandidate { family: Family::new(ground, members)?, ..self.clone() })
    }
}

/// Exact `φ̃` vector; compares lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PhiTildeVector(pub Vec<BigUint>);

impl PhiTildeVector {
    pub fn components(&self) -> &[BigUint] {
        &self.0
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.to_string()).collect()
    }
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

fn phitilde_from_counts(counts: &[usize], free: usize) -> PhiTildeVector {
    let mut out = Vec::with_capacity(counts.len());
    for i in 0..counts.len() {
        let mut v = BigUint::from(counts[i]);
        for (j, &c) in counts.iter().enumerate().take(i) {
            if c > 0 {
                v += BigUint::from(c) * big_binomial(free, i - j);
            }
        }
        out.push(v);
    }
    PhiTildeVector(out)
}

/// Evaluates `φ̃(S)` from its layer counts.
pub fn phitilde(cand: &LayeredCandidate) -> Result<PhiTildeVector> {
    cand.check_property2()?;
    let free = cand.big_t() - cand.t_support().len();
    Ok(phitilde_from_counts(&cand.layer_counts(), free))
}

/// `|G^i_S|` by walking every `(t+i)`-subset `G` of `[T]` and testing whether
/// `G ∩ supp S^(t)` lies in `S`, after embedding the support as `[m]`.
pub fn gis_count(cand: &LayeredCandidate, i: usize) -> Result<u64> {
    cand.check_property2()?;
    let big_t = cand.big_t();
    if i > big_t.saturating_sub(cand.t) {
        return Err(Error::Precondition(format!("index {i} outside 0..={}", big_t - cand.t)));
    }
    let total = binomial(big_t as u64, (cand.t + i) as u64);
    if total > GIS_ENUMERATION_LIMIT {
        return Err(Error::Budget(format!("C({big_t}, {}) = {total} subsets to enumerate", cand.t + i)));
    }
    let emb = cand.embedded()?;
    let supp = emb.t_support();
    let count = k_subsets(big_t, cand.t + i)
        .filter(|g| emb.family.contains(g.intersection(supp)))
        .count();
    Ok(count as u64)
}

/// Outcome of the lexicographic maximisation.
#[derive(Clone, Debug)]
pub struct SStarSolution {
    pub phitilde: PhiTildeVector,
    /// Optimal candidates, one per isomorphism class, capped at [`WITNESS_CAP`].
    pub optima: Vec<LayeredCandidate>,
    pub count_truncated: bool,
    /// False when the budget ran out mid-stage; the vector is then a lower bound.
    pub optimal: bool,
    pub phi: SearchResult,
}

/// Solves for `S_*`, first proving `φ(s, t)` with every extremal `t`-layer.
pub fn solve_sstar(s: usize, t: usize, budget: Budget) -> Result<SStarSolution> {
    let phi = search::phi(s, t, budget, WitnessMode::All)?;
    solve_sstar_with_phi(s, t, phi, budget)
}

/// Solves for `S_*` given a finished `φ(s, t)` search. Refuses unless the
/// search proved the value and listed every extremal class.
pub fn solve_sstar_with_phi(s: usize, t: usize, phi: SearchResult, budget: Budget) -> Result<SStarSolution> {
    if !phi.is_proved() || !phi.witnesses_complete {
        return Err(Error::Precondition(format!(
            "φ({s}, {t}) is not proved with a complete witness list; T and φ̃_0 would be unverified"
        )));
    }
    let phi_st = phi.best_size;
    let big_t = t * phi_st;
    let cc = CoreConstraint::AtMost(t - 1);
    let start = Instant::now();
    let mut nodes: u64 = 0;
    let mut optimal = true;

    // each retained prefix: canonical member list and its support size
    let mut prefixes: Vec<(Vec<SetWord>, usize)> = phi
        .witnesses
        .iter()
        .map(|w| (w.members().to_vec(), w.support().len()))
        .collect();
    // stage 0: every extremal t-layer has φ̃_0 = φ, but later components
    // depend on the support size, so all classes are kept
    let mut best_vec: Vec<BigUint> = vec![BigUint::from(phi_st)];

    for i in 1..=big_t.saturating_sub(t) {
        let q = t + i;
        let mut stage: Vec<(Vec<SetWord>, usize, BigUint)> = Vec::new();
        let mut stage_best: Option<BigUint> = None;
        for (members, m) in &prefixes {
            let counts = counts_of(members, t, i);
            let constant = phitilde_from_counts(&counts, big_t - m).0[i].clone();
            let extensions = if q > *m {
                vec![Vec::new()]
            } else {
                let candidates: Vec<SetWord> = k_subsets(*m, q).collect();
                let mut finder = LayerFinder {
                    base: members.clone(),
                    candidates: &candidates,
                    s,
                    cc,
                    best: 0,
                    found: Vec::new(),
                    nodes: &mut nodes,
                    budget,
                    start,
                    aborted: false,
                };
                finder.run();
                if finder.aborted {
                    optimal = false;
                }
                finder.found
            };
            for ext in extensions {
                let value = &constant + BigUint::from(ext.len());
                if stage_best.as_ref().is_some_and(|b| &value < b) {
                    continue;
                }
                if stage_best.as_ref().is_none_or(|b| &value > b) {
                    stage_best = Some(value.clone());
                    stage.clear();
                }
                let mut all = members.clone();
                all.extend(ext);
                stage.push((all, *m, value));
            }
            if !optimal {
                break;
            }
        }
        let value = stage_best.expect("every prefix admits the empty extension");
        best_vec.push(value);
        prefixes = dedup_classes(stage.into_iter().map(|(f, m, _)| (f, m)));
        if !optimal {
            break;
        }
    }

    let count_truncated = prefixes.len() > WITNESS_CAP;
    let optima = prefixes
        .into_iter()
        .take(WITNESS_CAP)
        .map(|(members, m)| {
            let ground = big_t.max(m);
            LayeredCandidate::new(Family::new(ground, members).expect("members inside [T]"), s, t, phi_st)
        })
        .collect();
    Ok(SStarSolution { phitilde: PhiTildeVector(best_vec), optima, count_truncated, optimal, phi })
}

fn counts_of(members: &[SetWord], t: usize, upto: usize) -> Vec<usize> {
    let mut counts = vec![0usize; upto + 1];
    for m in members {
        let len = m.len();
        if len >= t && len - t <= upto {
            counts[len - t] += 1;
        }
    }
    counts
}

fn dedup_classes<I: IntoIterator<Item = (Vec<SetWord>, usize)>>(items: I) -> Vec<(Vec<SetWord>, usize)> {
    let mut classes: BTreeMap<Vec<SetWord>, usize> = BTreeMap::new();
    for (members, m) in items {
        let (form, _) = canon::canonical_form(&members);
        classes.entry(form).or_insert(m);
    }
    classes.into_iter().collect()
}

/// All maximum-size sets of candidates that can join `base` without an
/// `s`-petal sunflower.
struct LayerFinder<'a> {
    base: Vec<SetWord>,
    candidates: &'a [SetWord],
    s: usize,
    cc: CoreConstraint,
    best: usize,
    found: Vec<Vec<SetWord>>,
    nodes: &'a mut u64,
    budget: Budget,
    start: Instant,
    aborted: bool,
}

impl LayerFinder<'_> {
    fn run(&mut self) {
        let compatible: Vec<SetWord> = self
            .candidates
            .iter()
            .copied()
            .filter(|&x| !completes_sunflower(&self.base, x, self.s, self.cc))
            .collect();
        let mut current = self.base.clone();
        let mut chosen = Vec::new();
        self.branch(&compatible, 0, &mut current, &mut chosen);
    }

    fn branch(&mut self, pool: &[SetWord], from: usize, current: &mut Vec<SetWord>, chosen: &mut Vec<SetWord>) {
        *self.nodes += 1;
        if *self.nodes >= self.budget.max_nodes
            || (*self.nodes % 1024 == 0 && self.start.elapsed().as_secs_f64() > self.budget.max_secs)
        {
            self.aborted = true;
        }
        if self.aborted {
            return;
        }
        if chosen.len() + (pool.len() - from) < self.best {
            return;
        }
        if from == pool.len() {
            if chosen.len() > self.best {
                self.best = chosen.len();
                self.found.clear();
            }
            self.found.push(chosen.clone());
            return;
        }
        let x = pool[from];
        if !completes_sunflower(current, x, self.s, self.cc) {
            current.push(x);
            chosen.push(x);
            self.branch(pool, from + 1, current, chosen);
            chosen.pop();
            current.pop();
        }
        self.branch(pool, from + 1, current, chosen);
    }
}

/// A random candidate satisfying properties 1 and 2, grown greedily: random
/// `t`-subsets of `[pool]` up to `φ(s,t)` of them, then random larger subsets
/// of their support, each kept only if no forbidden sunflower appears.
pub fn random_candidate<R: Rng + ?Sized>(rng: &mut R, s: usize, t: usize, phi_st: usize, pool: usize, draws: usize) -> LayeredCandidate {
    let cc = CoreConstraint::AtMost(t.saturating_sub(1));
    let big_t = t * phi_st;
    let mut members: Vec<SetWord> = Vec::new();
    for _ in 0..draws {
        if members.len() == phi_st {
            break;
        }
        let x = SetWord::from_elements(sample(rng, pool, t)).expect("pool fits the ground cap");
        if !members.contains(&x) && !completes_sunflower(&members, x, s, cc) {
            members.push(x);
        }
    }
    let support: Vec<usize> = members.iter().fold(SetWord::EMPTY, |a, &m| a.union(m)).elements();
    let top = support.len().min(big_t);
    if top > t {
        for _ in 0..draws {
            let size = rng.random_range(t + 1..=top);
            let x = SetWord::from_elements(sample(rng, support.len(), size).into_iter().map(|i| support[i]))
                .expect("support fits the ground cap");
            if !members.contains(&x) && !completes_sunflower(&members, x, s, cc) {
                members.push(x);
            }
        }
    }
    let family = Family::new(pool.max(big_t), members).expect("members inside the pool");
    LayeredCandidate::new(family, s, t, phi_st)
}

/// Status of property 3 in a [`PropertyReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LexStatus {
    NotChecked,
    ConsistentWithOptimum,
    BelowOptimum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    /// `None` when property 1 holds; otherwise a sunflower in the candidate.
    pub sunflower: Option<SunflowerCert>,
    /// `None` when property 2 holds; otherwise an offending member.
    pub support_violation: Option<SetWord>,
    pub lex: LexStatus,
}

impl PropertyReport {
    pub fn property1(&self) -> bool {
        self.sunflower.is_none()
    }

    pub fn property2(&self) -> bool {
        self.support_violation.is_none()
    }
}

/// Checks the three defining properties. Property 3 is compared against
/// `optimum` when a solved vector for the same `(s, t)` is supplied.
pub fn check_properties(cand: &LayeredCandidate, optimum: Option<&PhiTildeVector>) -> Result<PropertyReport> {
    let sunflower = find_sunflower(&cand.family, cand.s, CoreConstraint::AtMost(cand.t.saturating_sub(1)))?;
    let support_violation = cand.property2_violation();
    let lex = match optimum {
        None => LexStatus::NotChecked,
        Some(opt) => match phitilde(cand) {
            Ok(v) if &v == opt => LexStatus::ConsistentWithOptimum,
            _ => LexStatus::BelowOptimum,
        },
    };
    Ok(PropertyReport { sunflower, support_violation, lex })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles(extra: &[&[usize]]) -> LayeredCandidate {
        let mut lists: Vec<&[usize]> = vec![&[0, 1], &[0, 2], &[1, 2], &[3, 4], &[3, 5], &[4, 5]];
        lists.extend_from_slice(extra);
        LayeredCandidate::new(Family::from_lists(12, &lists).unwrap(), 3, 2, 6)
    }

    fn nat(v: &[u64]) -> PhiTildeVector {
        PhiTildeVector(v.iter().map(|&x| BigUint::from(x)).collect())
    }

    #[test]
    fn phitilde_two_triangles() {
        let v = phitilde(&two_triangles(&[])).unwrap();
        assert_eq!(v.0.len(), 11);
        assert_eq!(&v.0[..3], &nat(&[6, 36, 90]).0[..]);
        assert_eq!(gis_count(&two_triangles(&[]), 1).unwrap(), 36);
        assert_eq!(gis_count(&two_triangles(&[]), 2).unwrap(), 90);
    }

    #[test]
    fn phitilde_with_vertex_triples() {
        let c = two_triangles(&[&[0, 1, 2], &[3, 4, 5]]);
        let v = phitilde(&c).unwrap();
        assert_eq!(v.0[1], BigUint::from(38u32));
        assert_eq!(gis_count(&c, 1).unwrap(), 38);
        assert_eq!(gis_count(&c, 0).unwrap(), 6);
    }

    #[test]
    fn empty_t_layer_gives_zero_vector() {
        let c = LayeredCandidate::new(Family::empty(12), 3, 2, 6);
        assert!(phitilde(&c).unwrap().0.iter().all(|x| *x == BigUint::from(0u32)));
    }

    #[test]
    fn member_outside_support_is_rejected() {
        let c = two_triangles(&[&[5, 6, 7]]);
        assert!(matches!(phitilde(&c), Err(Error::SupportViolation { .. })));
        assert!(matches!(gis_count(&c, 1), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn sstar_trivial_cases() {
        let sol = solve_sstar(2, 1, Budget::default()).unwrap();
        assert_eq!(sol.phitilde, nat(&[1]));
        assert_eq!(sol.optima.len(), 1);
        assert_eq!(sol.optima[0].family.members(), &[SetWord::singleton(0)]);

        // T = t here, so the vector has the single index 0
        let sol = solve_sstar(2, 2, Budget::default()).unwrap();
        assert_eq!(sol.phitilde, nat(&[1]));
        assert_eq!(sol.optima.len(), 1);
        assert_eq!(sol.optima[0].family.members(), &[SetWord::full(2)]);
    }

    #[test]
    fn sstar_three_petals_pairs() {
        let sol = solve_sstar(3, 2, Budget::default()).unwrap();
        assert!(sol.optimal);
        assert_eq!(sol.phitilde.0[0], BigUint::from(6u32));
        assert_eq!(sol.optima.len(), 1);
        let opt = &sol.optima[0];
        assert_eq!(opt.t_layer().members(), two_triangles(&[]).t_layer().members());
        assert_eq!(opt.layer_counts()[..5], [6, 2, 9, 6, 1]);
        assert_eq!(phitilde(opt).unwrap(), sol.phitilde);
        let report = check_properties(opt, Some(&sol.phitilde)).unwrap();
        assert!(report.property1() && report.property2());
        assert_eq!(report.lex, LexStatus::ConsistentWithOptimum);
    }

    #[test]
    fn sstar_refuses_unproved_phi() {
        let phi = search::phi(4, 2, Budget::new(10, 10.0), WitnessMode::All).unwrap();
        assert!(solve_sstar_with_phi(4, 2, phi, Budget::default()).is_err());
    }

    #[test]
    fn random_candidates_satisfy_properties() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..30 {
            let c = random_candidate(&mut rng, 3, 2, 6, 9, 40);
            let report = check_properties(&c, None).unwrap();
            assert!(report.property1() && report.property2());
            for i in 0..=c.big_t() - c.t {
                assert_eq!(BigUint::from(gis_count(&c, i).unwrap()), phitilde(&c).unwrap().0[i]);
            }
        }
    }

    #[test]
    fn property_checks() {
        let ok = check_properties(&two_triangles(&[]), None).unwrap();
        assert!(ok.property1() && ok.property2());
        assert_eq!(ok.lex, LexStatus::NotChecked);

        let cross = check_properties(&two_triangles(&[&[0, 3]]), None).unwrap();
        let cert = cross.sunflower.expect("cross edge creates a 3-sunflower");
        assert_eq!(cert.member_indices.len(), 3);

        let small = check_properties(&two_triangles(&[&[0]]), None).unwrap();
        assert_eq!(small.support_violation, Some(SetWord::singleton(0)));
    }
}
