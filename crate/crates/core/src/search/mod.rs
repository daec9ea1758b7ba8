//! Exact maximisation of family size under sunflower avoidance.
//!
//! The engine enumerates families by orderly generation: members are appended
//! in increasing bitmask order and a child is kept only when it is its own
//! minimum image under relabelling (see [`canon`]). Removing the largest member
//! of a canonical family leaves a canonical family, so every isomorphism
//! class of admissible families is visited exactly once. Admissibility is
//! hereditary, so only sunflowers through the newest member are checked.

pub mod canon;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setcore::{binomial, k_subsets, Family, SetWord, MAX_GROUND};
use crate::sunflower::{completes_sunflower, CoreConstraint};

/// Stored witnesses are capped; the total count is reported separately.
pub const WITNESS_CAP: usize = 64;

/// Node and wall-clock limits for one search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_secs: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 100_000_000, max_secs: 600.0 }
    }
}

impl Budget {
    pub fn new(max_nodes: u64, max_secs: f64) -> Self {
        Budget { max_nodes, max_secs }
    }
}

/// Whether the search must list every optimum or only establish the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    /// Keep exploring ties so that every optimal class is found.
    All,
    /// Stop refining once the value is settled; witnesses are whatever was met.
    Value,
}

#[derive(Clone, Debug)]
pub struct SearchProblem {
    pub universe_n: usize,
    pub uniformity_k: usize,
    pub s: usize,
    pub cc: CoreConstraint,
    pub budget: Budget,
    pub witness_mode: WitnessMode,
    /// Orderly generation on; off enumerates labelled families (small n only).
    pub isomorph_rejection: bool,
    /// A proven upper bound on the optimum, if one is known.
    pub analytic_cap: Option<usize>,
    /// Witness ground sets: the universe, or just the used labels.
    pub witness_ground: WitnessGround,
    /// Census mode: no bound pruning, families larger than this are not
    /// explored, and every visited class is tallied by size.
    pub census_limit: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessGround {
    Universe,
    Support,
}

impl SearchProblem {
    pub fn new(universe_n: usize, uniformity_k: usize, s: usize, cc: CoreConstraint) -> Self {
        SearchProblem {
            universe_n,
            uniformity_k,
            s,
            cc,
            budget: Budget::default(),
            witness_mode: WitnessMode::All,
            isomorph_rejection: true,
            analytic_cap: None,
            witness_ground: WitnessGround::Universe,
            census_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(Error::InvalidInput(format!("need s >= 2, got {}", self.s)));
        }
        if self.uniformity_k < 1 || self.uniformity_k > self.universe_n {
            return Err(Error::InvalidInput(format!(
                "need 1 <= k <= n, got k={} n={}",
                self.uniformity_k, self.universe_n
            )));
        }
        if self.universe_n > MAX_GROUND {
            return Err(Error::GroundTooLarge(self.universe_n));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proved,
    LowerBoundOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_size: usize,
    /// Pairwise non-isomorphic optimal families, canonically labelled and sorted.
    pub witnesses: Vec<Family>,
    /// Number of optimal classes met, including those beyond [`WITNESS_CAP`].
    pub witness_count: usize,
    /// True when the witness list is every optimal class.
    pub witnesses_complete: bool,
    pub status: Status,
    pub upper_bound: usize,
    pub nodes: u64,
    pub elapsed: Duration,
    /// Visited isomorphism classes by size (census mode only).
    pub classes_by_size: Vec<u64>,
}

impl SearchResult {
    pub fn is_proved(&self) -> bool {
        self.status == Status::Proved
    }
}

/// Runs the orderly branch and bound described in the module docs.
pub fn run(problem: &SearchProblem) -> Result<SearchResult> {
    problem.validate()?;
    let mut engine = Engine::new(problem);
    let mut fam = Vec::new();
    engine.dfs(&mut fam, 0);
    Ok(engine.finish())
}

struct Engine<'a> {
    p: &'a SearchProblem,
    start: Instant,
    nodes: u64,
    aborted: bool,
    settled: bool,
    best: usize,
    witnesses: Vec<Vec<SetWord>>,
    witness_count: usize,
    seen: HashSet<Vec<SetWord>>,
    count_bound: bool,
    census: Vec<u64>,
}

impl<'a> Engine<'a> {
    fn new(p: &'a SearchProblem) -> Self {
        let total = binomial(p.universe_n as u64, p.uniformity_k as u64);
        Engine {
            p,
            start: Instant::now(),
            nodes: 0,
            aborted: false,
            settled: false,
            best: 0,
            witnesses: Vec::new(),
            witness_count: 0,
            seen: HashSet::new(),
            count_bound: total <= 4_000,
            census: Vec::new(),
        }
    }

    fn cap(&self) -> usize {
        let total = binomial(self.p.universe_n as u64, self.p.uniformity_k as u64);
        let total = usize::try_from(total).unwrap_or(usize::MAX);
        self.p.analytic_cap.map_or(total, |c| c.min(total))
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.nodes >= self.p.budget.max_nodes || self.start.elapsed().as_secs_f64() > self.p.budget.max_secs {
            self.aborted = true;
        }
        self.aborted
    }

    fn record(&mut self, fam: &[SetWord]) {
        let size = fam.len();
        if size < self.best || (size == self.best && self.p.witness_mode == WitnessMode::Value && size > 0) {
            return;
        }
        if size > self.best {
            self.best = size;
            self.witnesses.clear();
            self.witness_count = 0;
            self.seen.clear();
        }
        let form = if self.p.isomorph_rejection {
            fam.to_vec()
        } else {
            let (form, _) = canon::canonical_form(fam);
            if !self.seen.insert(form.clone()) {
                return;
            }
            form
        };
        self.witness_count += 1;
        if self.witnesses.len() < WITNESS_CAP {
            self.witnesses.push(form);
        }
        if self.p.witness_mode == WitnessMode::Value && self.best >= self.cap() {
            self.settled = true;
        }
    }

    /// Upper bound on how many more members a descendant can gain.
    fn remaining_bound(&self, fam: &[SetWord]) -> usize {
        let cap = self.cap().saturating_sub(fam.len());
        if !self.count_bound {
            return cap;
        }
        let last = fam.last().copied();
        let p = self.p;
        let compatible = k_subsets(p.universe_n, p.uniformity_k)
            .filter(|x| last.is_none_or(|l| *x > l))
            .filter(|x| !completes_sunflower(fam, *x, p.s, p.cc))
            .count();
        compatible.min(cap)
    }

    fn dfs(&mut self, fam: &mut Vec<SetWord>, used: usize) {
        self.nodes += 1;
        if self.out_of_budget() || self.settled {
            return;
        }
        if let Some(limit) = self.p.census_limit {
            if self.census.len() <= fam.len() {
                self.census.resize(fam.len() + 1, 0);
            }
            self.census[fam.len()] += 1;
            if fam.len() >= limit {
                return;
            }
        } else {
            self.record(fam);
        }
        if self.settled {
            return;
        }
        let bound = fam.len() + self.remaining_bound(fam);
        let prune = match self.p.witness_mode {
            WitnessMode::All => bound < self.best,
            WitnessMode::Value => bound <= self.best,
        };
        if self.p.census_limit.is_none() && (prune || bound == fam.len()) {
            return;
        }
        let p = self.p;
        let k = p.uniformity_k;
        let limit = if p.isomorph_rejection { (used + k).min(p.universe_n) } else { p.universe_n };
        let last = fam.last().copied();
        let fresh_ok = |x: SetWord| -> bool {
            if !p.isomorph_rejection {
                return true;
            }
            // new labels must be the next consecutive ones
            let fresh = x.difference(SetWord::full(used));
            fresh.is_empty() || fresh.0 >> used == (1u128 << fresh.len()) - 1
        };
        for (tried, x) in k_subsets(limit, k).enumerate() {
            if last.is_some_and(|l| x <= l) || !fresh_ok(x) {
                continue;
            }
            if tried % 256 == 255 && self.start.elapsed().as_secs_f64() > p.budget.max_secs {
                self.aborted = true;
                return;
            }
            if completes_sunflower(fam, x, p.s, p.cc) {
                continue;
            }
            let new_used = used.max(x.max_element().map_or(0, |e| e + 1));
            fam.push(x);
            if !p.isomorph_rejection || canon::is_canonical(fam, new_used) {
                self.dfs(fam, new_used);
            }
            fam.pop();
            if self.aborted || self.settled {
                return;
            }
        }
    }

    fn finish(self) -> SearchResult {
        let cap = self.cap();
        let completed = !self.aborted;
        let proved = completed || self.best >= cap;
        let ground = |w: &[SetWord]| -> usize {
            match self.p.witness_ground {
                WitnessGround::Universe => self.p.universe_n,
                WitnessGround::Support => w.iter().fold(SetWord::EMPTY, |a, &x| a.union(x)).len(),
            }
        };
        let mut witnesses: Vec<Family> = self
            .witnesses
            .iter()
            .map(|w| {
                Family::uniform(ground(w), self.p.uniformity_k, w.iter().copied())
                    .expect("witness members lie in the universe")
            })
            .collect();
        witnesses.sort_by(|a, b| a.members().cmp(b.members()));
        SearchResult {
            best_size: self.best,
            witnesses,
            witness_count: self.witness_count,
            witnesses_complete: completed
                && self.p.witness_mode == WitnessMode::All
                && self.witness_count <= WITNESS_CAP,
            status: if proved { Status::Proved } else { Status::LowerBoundOnly },
            upper_bound: if proved { self.best } else { cap },
            nodes: self.nodes,
            elapsed: self.start.elapsed(),
            classes_by_size: self.census,
        }
    }
}

/// Number of isomorphism classes of admissible `k`-uniform families on at
/// most `universe_n` points, by family size up to `max_size`.
pub fn census(universe_n: usize, k: usize, s: usize, cc: CoreConstraint, max_size: usize, budget: Budget) -> Result<Vec<u64>> {
    let mut p = SearchProblem::new(universe_n, k, s, cc);
    p.budget = budget;
    p.census_limit = Some(max_size);
    let r = run(&p)?;
    if !r.is_proved() {
        return Err(Error::Budget("census did not finish within budget".into()));
    }
    Ok(r.classes_by_size)
}

/// Erdős–Rado upper bound `t!(s-1)^t`, saturating.
pub fn erdos_rado_upper(s: usize, t: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 1..=t as u128 {
        acc = acc.saturating_mul(i).saturating_mul((s - 1) as u128);
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// Erdős–Rado lower bound `(s-1)^t`, saturating.
pub fn erdos_rado_lower(s: usize, t: usize) -> usize {
    let acc = ((s - 1) as u128).saturating_pow(t as u32);
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// Best known analytic cap on `φ(s, t)` used by the search. For graphs a
/// graph with matching number `ν` and maximum degree `Δ` has at most
/// `ν(Δ+1)` edges (each colour class of a `Δ+1` edge colouring is a
/// matching), giving `s(s-1)`.
pub fn phi_cap(s: usize, t: usize) -> usize {
    let er = erdos_rado_upper(s, t);
    if t == 2 {
        er.min(s * (s - 1))
    } else {
        er
    }
}

fn phi_problem(s: usize, t: usize, budget: Budget, mode: WitnessMode) -> Result<SearchProblem> {
    if t == 0 {
        return Err(Error::InvalidInput("φ(s, t) needs t >= 1".into()));
    }
    if s < 2 {
        return Err(Error::InvalidInput(format!("φ(s, t) needs s >= 2, got {s}")));
    }
    let cap = phi_cap(s, t);
    let universe = t.saturating_mul(cap).clamp(t, MAX_GROUND);
    let mut p = SearchProblem::new(universe, t, s, CoreConstraint::Any);
    p.budget = budget;
    p.witness_mode = mode;
    p.analytic_cap = Some(cap);
    p.witness_ground = WitnessGround::Support;
    Ok(p)
}

/// `φ(s, t)`: the largest `t`-uniform family with no `s`-petal sunflower.
///
/// The universe has `t` times the analytic cap elements, enough to hold the
/// support of any sunflower-free `t`-uniform family.
pub fn phi(s: usize, t: usize, budget: Budget, mode: WitnessMode) -> Result<SearchResult> {
    run(&phi_problem(s, t, budget, mode)?)
}

/// [`phi`] with orderly generation switched off. Only usable when the
/// universe is tiny.
pub fn phi_labelled(s: usize, t: usize, budget: Budget) -> Result<SearchResult> {
    let mut p = phi_problem(s, t, budget, WitnessMode::All)?;
    p.isomorph_rejection = false;
    run(&p)
}

/// The graph case `t = 2` with every witness's degree sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphCaseResult {
    pub result: SearchResult,
    /// Ascending degrees of the non-isolated vertices, one list per witness.
    pub degree_sequences: Vec<Vec<usize>>,
}

pub fn degree_sequence(fam: &Family) -> Vec<usize> {
    let mut deg = vec![0usize; fam.ground_n()];
    for m in fam.members() {
        for e in m.iter() {
            deg[e] += 1;
        }
    }
    let mut out: Vec<usize> = deg.into_iter().filter(|&d| d > 0).collect();
    out.sort_unstable();
    out
}

/// Maximum number of edges in a graph with no `s`-matching and no vertex of
/// degree `s`, i.e. `φ(s, 2)`, listing every extremal graph.
pub fn max_graph_case(s: usize, budget: Budget) -> Result<GraphCaseResult> {
    let result = phi(s, 2, budget, WitnessMode::All)?;
    let degree_sequences = result.witnesses.iter().map(degree_sequence).collect();
    Ok(GraphCaseResult { result, degree_sequences })
}

fn oracle_problem(n: usize, k: usize, s: usize, t: usize, budget: Budget) -> Result<SearchProblem> {
    if t == 0 {
        return Err(Error::InvalidInput("need t >= 1".into()));
    }
    let mut p = SearchProblem::new(n, k, s, CoreConstraint::Exact(t - 1));
    p.budget = budget;
    Ok(p)
}

/// Largest `F ⊆ C([n], k)` with no `s`-petal sunflower whose core has exactly
/// `t - 1` elements. Witnesses are listed up to permutations of `[n]`.
pub fn duke_erdos_oracle(n: usize, k: usize, s: usize, t: usize, budget: Budget) -> Result<SearchResult> {
    run(&oracle_problem(n, k, s, t, budget)?)
}

/// [`duke_erdos_oracle`] without isomorph rejection.
pub fn duke_erdos_oracle_labelled(n: usize, k: usize, s: usize, t: usize, budget: Budget) -> Result<SearchResult> {
    let mut p = oracle_problem(n, k, s, t, budget)?;
    p.isomorph_rejection = false;
    run(&p)
}

/// JSON schema shared by the search subcommands.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultJson {
    pub best_size: usize,
    pub status: Status,
    pub upper_bound: usize,
    pub witnesses: Vec<String>,
    pub witness_count: usize,
    pub witnesses_complete: bool,
}

impl From<&SearchResult> for ResultJson {
    fn from(r: &SearchResult) -> Self {
        ResultJson {
            best_size: r.best_size,
            status: r.status,
            upper_bound: r.upper_bound,
            witnesses: r.witnesses.iter().map(Family::to_text).collect(),
            witness_count: r.witness_count,
            witnesses_complete: r.witnesses_complete,
        }
    }
}

impl ResultJson {
    /// Rebuilds a result from its JSON form; node count and timing are lost.
    pub fn to_result(&self) -> Result<SearchResult> {
        let witnesses = self.witnesses.iter().map(|w| Family::parse(w)).collect::<Result<Vec<_>>>()?;
        Ok(SearchResult {
            best_size: self.best_size,
            witnesses,
            witness_count: self.witness_count,
            witnesses_complete: self.witnesses_complete,
            status: self.status,
            upper_bound: self.upper_bound,
            nodes: 0,
            elapsed: Duration::ZERO,
            classes_by_size: Vec::new(),
        })
    }
}
