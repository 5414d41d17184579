//! Exact Nash-optimal allocation for binary valuations by greedy swap chains.
//!
//! The swap graph has one vertex per agent and `|Γ_v ∩ A_u|` parallel edges
//! `u → v`. A simple path `u = u_1, …, u_k = v` moves one good along each
//! edge: `u` loses a valued good, `v` gains one, every agent in between is
//! left with the same number of valued goods. Each round applies the chain
//! between the reachable pair whose move raises welfare the most, and stops
//! once no pair improves. A local optimum of this move is a global optimum,
//! also when utility is a concave function of the valued-good count.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{ChainError, SolveError};
use crate::model::{validate_allocation, AgentId, Allocation, ConcaveProfile, GoodId, Instance};
use crate::welfare::{evaluate, valued_counts, NswValue};

/// Agent-level transfer multigraph of an allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapGraph {
    n: usize,
    /// `witnesses[u][v]`: goods held by `u` and valued by `v`, ascending.
    witnesses: Vec<Vec<Vec<GoodId>>>,
}

impl SwapGraph {
    pub fn num_agents(&self) -> usize {
        self.n
    }

    /// Number of parallel edges `from → to`.
    pub fn multiplicity(&self, from: AgentId, to: AgentId) -> usize {
        self.witnesses[from][to].len()
    }

    pub fn witnesses(&self, from: AgentId, to: AgentId) -> &[GoodId] {
        &self.witnesses[from][to]
    }

    fn has_edge(&self, from: AgentId, to: AgentId) -> bool {
        from != to && !self.witnesses[from][to].is_empty()
    }
}

pub fn build_swap_graph(inst: &Instance, alloc: &Allocation) -> SwapGraph {
    let n = inst.num_agents();
    let mut witnesses = vec![vec![Vec::new(); n]; n];
    for good in 0..inst.num_goods() {
        let holder = alloc.owner_of(good);
        for v in (0..n).filter(|&v| v != holder && inst.desires(v, good)) {
            witnesses[holder][v].push(good);
        }
    }
    SwapGraph { n, witnesses }
}

/// All ordered pairs `(u, v)`, `u ≠ v`, with a directed path from `u` to `v`.
pub fn reachable_pairs(g: &SwapGraph) -> BTreeSet<(AgentId, AgentId)> {
    let mut pairs = BTreeSet::new();
    for u in 0..g.n {
        let mut seen = vec![false; g.n];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for y in 0..g.n {
                if !seen[y] && g.has_edge(x, y) {
                    seen[y] = true;
                    pairs.insert((u, y));
                    queue.push_back(y);
                }
            }
        }
    }
    pairs
}

/// A path of agents with the good moved along each hop:
/// `goods[t]` goes from `agents[t]` to `agents[t + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapChain {
    pub agents: Vec<AgentId>,
    pub goods: Vec<GoodId>,
}

impl SwapChain {
    pub fn source(&self) -> AgentId {
        self.agents[0]
    }

    pub fn sink(&self) -> AgentId {
        *self.agents.last().expect("non-empty chain")
    }

    /// Number of agents on the path.
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Breadth-first shortest chain from `from` to `to`. Neighbours are scanned
/// in ascending agent order and the lowest witness good is used per hop.
pub fn find_chain(g: &SwapGraph, from: AgentId, to: AgentId) -> Result<SwapChain, ChainError> {
    let unreachable = ChainError::NotReachable { from, to };
    if from == to || from >= g.n || to >= g.n {
        return Err(unreachable);
    }
    let mut parent = vec![usize::MAX; g.n];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    'bfs: while let Some(x) = queue.pop_front() {
        for y in 0..g.n {
            if parent[y] == usize::MAX && g.has_edge(x, y) {
                parent[y] = x;
                if y == to {
                    break 'bfs;
                }
                queue.push_back(y);
            }
        }
    }
    if parent[to] == usize::MAX {
        return Err(unreachable);
    }
    let mut agents = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur];
        agents.push(cur);
    }
    agents.reverse();
    let goods = agents
        .windows(2)
        .map(|w| g.witnesses[w[0]][w[1]][0])
        .collect();
    Ok(SwapChain { agents, goods })
}

/// Moves every good of the chain one hop forward.
pub fn apply_chain(alloc: &Allocation, chain: &SwapChain) -> Result<Allocation, ChainError> {
    if chain.agents.len() < 2 {
        return Err(ChainError::Malformed("a chain needs at least two agents"));
    }
    if chain.goods.len() + 1 != chain.agents.len() {
        return Err(ChainError::Malformed("one good per hop"));
    }
    let mut seen = BTreeSet::new();
    if !chain.agents.iter().all(|a| seen.insert(*a)) {
        return Err(ChainError::Malformed("agents repeat"));
    }
    for (&agent, &good) in chain.agents.iter().zip(&chain.goods) {
        if agent >= alloc.num_agents() || good >= alloc.num_goods() {
            return Err(ChainError::Malformed("index out of range"));
        }
        if alloc.owner_of(good) != agent {
            return Err(ChainError::Stale { good, agent });
        }
    }
    if chain.sink() >= alloc.num_agents() {
        return Err(ChainError::Malformed("index out of range"));
    }
    let mut next = alloc.clone();
    for (t, &good) in chain.goods.iter().enumerate() {
        next.transfer(good, chain.agents[t + 1]);
    }
    Ok(next)
}

/// Welfare change of moving one valued good from `u` to `v`, restricted to
/// the two factors that change. Ordered like [`NswValue`]: removing zero
/// factors dominates, then the ratio of positive factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainGain {
    /// Zero factors before minus zero factors after.
    pub zeros_removed: i8,
    /// (after product) / (before product) over the changed positive factors.
    pub ratio: BigRational,
}

impl ChainGain {
    pub fn is_improving(&self) -> bool {
        self.zeros_removed > 0 || (self.zeros_removed == 0 && self.ratio > BigRational::one())
    }
}

impl Ord for ChainGain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.zeros_removed
            .cmp(&other.zeros_removed)
            .then_with(|| self.ratio.cmp(&other.ratio))
    }
}

impl PartialOrd for ChainGain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn utility(profile: Option<&ConcaveProfile>, agent: AgentId, count: usize) -> BigRational {
    match profile {
        Some(p) => p.utility(agent, count).clone(),
        None => BigRational::from_integer(count.into()),
    }
}

/// Gain of a chain from `u` (holding `count_u` valued goods) to `v`
/// (holding `count_v`). `None` if `u` has nothing to give.
pub fn chain_gain(
    count_u: usize,
    count_v: usize,
    profile: Option<&ConcaveProfile>,
    u: AgentId,
    v: AgentId,
) -> Option<ChainGain> {
    if count_u == 0 {
        return None;
    }
    let before = [utility(profile, u, count_u), utility(profile, v, count_v)];
    let after = [utility(profile, u, count_u - 1), utility(profile, v, count_v + 1)];
    let zeros = |fs: &[BigRational; 2]| fs.iter().filter(|f| f.is_zero()).count() as i8;
    let positive = |fs: &[BigRational; 2]| {
        fs.iter()
            .filter(|f| !f.is_zero())
            .fold(BigRational::one(), |acc, f| acc * f)
    };
    Some(ChainGain {
        zeros_removed: zeros(&before) - zeros(&after),
        ratio: positive(&after) / positive(&before),
    })
}

/// Safety cap on accepted rounds: `⌈2m(n+1) ln(nm)⌉`, at least 1.
pub fn iteration_cap(num_agents: usize, num_goods: usize) -> usize {
    let nm = (num_agents * num_goods) as f64;
    if nm < 2.0 {
        return 1;
    }
    let cap = (2.0 * num_goods as f64 * (num_agents as f64 + 1.0) * nm.ln()).ceil();
    (cap as usize).max(1)
}

/// Starting allocation with every agent holding at least one valued good.
///
/// A maximum matching between agents and valued goods gives each agent one
/// good; every other good goes to the lowest-indexed agent that values it,
/// and goods nobody values go to agent 0. Agents the matching cannot cover
/// are reported as infeasible.
pub fn initial_allocation(inst: &Instance) -> Result<Allocation, SolveError> {
    let n = inst.num_agents();
    let m = inst.num_goods();
    let mut good_match: Vec<Option<AgentId>> = vec![None; m];
    let mut unmatched = Vec::new();
    for agent in 0..n {
        let mut visited = vec![false; m];
        if !augment(inst, agent, &mut visited, &mut good_match) {
            unmatched.push(agent);
        }
    }
    if !unmatched.is_empty() {
        return Err(SolveError::Infeasible { agents: unmatched });
    }
    let owner = (0..m)
        .map(|j| {
            good_match[j]
                .or_else(|| (0..n).find(|&i| inst.desires(i, j)))
                .unwrap_or(0)
        })
        .collect();
    Ok(Allocation::from_owner(n, owner)?)
}

// Kuhn's augmenting path step.
fn augment(
    inst: &Instance,
    agent: AgentId,
    visited: &mut [bool],
    good_match: &mut [Option<AgentId>],
) -> bool {
    for &good in inst.desire_set(agent) {
        if visited[good] {
            continue;
        }
        visited[good] = true;
        let free = match good_match[good] {
            None => true,
            Some(other) => augment(inst, other, visited, good_match),
        };
        if free {
            good_match[good] = Some(agent);
            return true;
        }
    }
    false
}

/// Reassigns goods held by an agent who values them at zero to the
/// lowest-indexed agent who does value them. Each move raises one factor and
/// lowers none, so welfare never decreases.
pub fn reclaim_wasted(inst: &Instance, alloc: &Allocation) -> Allocation {
    let mut next = alloc.clone();
    for good in alloc.wasted_goods(inst) {
        if let Some(to) = (0..inst.num_agents()).find(|&i| inst.desires(i, good)) {
            next.transfer(good, to);
        }
    }
    next
}

/// One accepted round of the greedy loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub iteration: usize,
    pub from: AgentId,
    pub to: AgentId,
    pub path_len: usize,
    pub value: NswValue,
}

#[derive(Clone, Debug)]
pub struct BinaryOutcome {
    pub allocation: Allocation,
    pub value: NswValue,
    pub trace: Vec<TraceStep>,
    pub cap: usize,
}

impl BinaryOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Best improving pair in the current allocation, lexicographically
/// smallest among equal gains.
pub fn best_improving_pair(
    inst: &Instance,
    alloc: &Allocation,
    profile: Option<&ConcaveProfile>,
    graph: &SwapGraph,
) -> Option<(AgentId, AgentId, ChainGain)> {
    let counts = valued_counts(inst, alloc);
    let mut best: Option<(AgentId, AgentId, ChainGain)> = None;
    for (u, v) in reachable_pairs(graph) {
        let Some(gain) = chain_gain(counts[u], counts[v], profile, u, v) else {
            continue;
        };
        if !gain.is_improving() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, _, b)| gain > *b) {
            best = Some((u, v, gain));
        }
    }
    best
}

/// Greedy swap-chain search for a Nash-optimal allocation of a binary
/// instance, optionally under a cardinality-concave profile.
///
/// Without `start`, [`initial_allocation`] is used. Goods a start holds
/// wastefully are first handed to an agent that values them.
pub fn solve_binary(
    inst: &Instance,
    start: Option<&Allocation>,
    profile: Option<&ConcaveProfile>,
) -> Result<BinaryOutcome, SolveError> {
    if !inst.classify().is_binary {
        return Err(SolveError::NotBinary);
    }
    if let Some(p) = profile {
        p.check_fits(inst)?;
    }
    let mut alloc = match start {
        Some(a) => {
            validate_allocation(inst, a)?;
            reclaim_wasted(inst, a)
        }
        None => initial_allocation(inst)?,
    };
    let cap = iteration_cap(inst.num_agents(), inst.num_goods());
    let mut value = evaluate(inst, profile, &alloc)?;
    let mut trace = Vec::new();
    loop {
        let graph = build_swap_graph(inst, &alloc);
        let Some((u, v, _)) = best_improving_pair(inst, &alloc, profile, &graph) else {
            return Ok(BinaryOutcome {
                allocation: alloc,
                value,
                trace,
                cap,
            });
        };
        if trace.len() == cap {
            return Err(SolveError::CapExhausted {
                cap,
                allocation: Box::new(alloc),
            });
        }
        let chain = find_chain(&graph, u, v).expect("pair is reachable");
        alloc = apply_chain(&alloc, &chain).expect("chain built from current allocation");
        let next = evaluate(inst, profile, &alloc)?;
        debug_assert!(next > value, "accepted chain must raise welfare");
        value = next;
        trace.push(TraceStep {
            iteration: trace.len() + 1,
            from: u,
            to: v,
            path_len: chain.len(),
            value: value.clone(),
        });
    }
}
