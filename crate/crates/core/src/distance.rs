//! Code distances: the graphlike circuit distance, an exhaustive fault
//! search, algebraic ISG/subsystem distances, and the unmasked distance
//! obtained by replaying a schedule against an ISG.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::bits::BitVec;
use crate::circuit::ScheduledCircuit;
use crate::dem::{mechanisms, CircuitIndex, DecodingGraph, Effect, Mechanism};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliGroupBasis, PauliString};
use crate::schedule::{compute_isgs, MeasurementSchedule};

/// Leaves visited by exhaustive searches before giving up.
pub const SEARCH_BUDGET: u64 = 400_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMethod {
    Graphlike,
    BruteForce,
    Isg,
    Subsystem,
    Unmasked,
}

impl fmt::Display for DistanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMethod::Graphlike => "graphlike",
            DistanceMethod::BruteForce => "brute_force",
            DistanceMethod::Isg => "isg",
            DistanceMethod::Subsystem => "subsystem",
            DistanceMethod::Unmasked => "unmasked",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Mechanisms(Vec<Mechanism>),
    Pauli(PauliString),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    pub method: DistanceMethod,
    /// `None` when no logical fault or operator exists.
    pub value: Option<usize>,
    /// False when `value` is only an upper bound.
    pub exact: bool,
    pub witness: Option<Witness>,
    /// Observables flipped by a mechanism witness.
    pub observables: u64,
}

impl DistanceReport {
    fn none(method: DistanceMethod) -> Self {
        DistanceReport { method, value: None, exact: true, witness: None, observables: 0 }
    }

    fn from_pauli(method: DistanceMethod, p: Option<PauliString>, exact: bool) -> Self {
        DistanceReport {
            method,
            value: p.as_ref().map(PauliString::weight),
            exact,
            witness: p.map(Witness::Pauli),
            observables: 0,
        }
    }
}

impl fmt::Display for DistanceReport {
    /// One line: `method=.. value=.. exact=.. observables=.. witness=..`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "method={} value=", self.method)?;
        match self.value {
            Some(v) => write!(f, "{v}")?,
            None => f.write_str("inf")?,
        }
        write!(f, " exact={} observables={} witness=", self.exact, self.observables)?;
        match &self.witness {
            None => f.write_str("-"),
            Some(Witness::Pauli(p)) => write!(f, "{p}"),
            Some(Witness::Mechanisms(ms)) => {
                let parts: Vec<String> = ms.iter().map(Mechanism::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Smallest set of graph edges with no flipped detector and a nonzero
/// observable mask, each edge counting as one fault.
///
/// Per observable, a breadth-first search over (node, parity) pairs looks
/// for the shortest odd closed walk through an endpoint of some edge that
/// flips that observable; the boundary node is treated like any other.
pub fn graphlike_distance(graph: &DecodingGraph) -> DistanceReport {
    let n = graph.num_nodes();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, e) in graph.edges.iter().enumerate() {
        adj[e.a].push((e.b, k));
        adj[e.b].push((e.a, k));
    }
    let mut best: Option<Vec<usize>> = None;
    for o in 0..graph.num_observables {
        let bit = 1u64 << o;
        let mut starts: Vec<usize> = graph.edges.iter().filter(|e| e.observables & bit != 0).map(|e| e.a).collect();
        starts.sort_unstable();
        starts.dedup();
        for s in starts {
            let limit = best.as_ref().map_or(usize::MAX, Vec::len);
            if let Some(walk) = odd_walk(graph, &adj, s, bit, limit) {
                best = Some(walk);
            }
        }
    }
    match best {
        None => DistanceReport::none(DistanceMethod::Graphlike),
        Some(edges) => DistanceReport {
            method: DistanceMethod::Graphlike,
            value: Some(edges.len()),
            exact: true,
            observables: edges.iter().fold(0, |acc, &k| acc ^ graph.edges[k].observables),
            witness: Some(Witness::Mechanisms(edges.iter().map(|&k| graph.edges[k].representative).collect())),
        },
    }
}

/// Shortest closed walk from `s` with odd parity on `bit`, shorter than
/// `limit`, reduced to its edges of odd multiplicity.
fn odd_walk(graph: &DecodingGraph, adj: &[Vec<(usize, usize)>], s: usize, bit: u64, limit: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let state = |v: usize, p: usize| 2 * v + p;
    let mut depth = vec![u32::MAX; 2 * n];
    let mut parent = vec![(usize::MAX, usize::MAX); 2 * n];
    let mut queue = std::collections::VecDeque::new();
    depth[state(s, 0)] = 0;
    queue.push_back(state(s, 0));
    let target = state(s, 1);
    while let Some(u) = queue.pop_front() {
        let du = depth[u] as usize;
        if du + 1 >= limit {
            break;
        }
        let (v, p) = (u / 2, u % 2);
        for &(w, k) in &adj[v] {
            let q = p ^ usize::from(graph.edges[k].observables & bit != 0);
            let next = state(w, q);
            if depth[next] == u32::MAX {
                depth[next] = du as u32 + 1;
                parent[next] = (u, k);
                if next == target {
                    let mut count: HashMap<usize, usize> = HashMap::new();
                    let mut cur = target;
                    while cur != state(s, 0) {
                        let (prev, k) = parent[cur];
                        *count.entry(k).or_default() += 1;
                        cur = prev;
                    }
                    let mut edges: Vec<usize> = count.into_iter().filter(|&(_, c)| c % 2 == 1).map(|(k, _)| k).collect();
                    edges.sort_unstable();
                    return Some(edges);
                }
                queue.push_back(next);
            }
        }
    }
    None
}

/// Minimum number of elementary faults (after merging faults with equal
/// effects) that flip an observable and no detector. Faults are counted as
/// in [`mechanisms`], so a depolarizing Y counts once.
pub fn brute_force_distance(circuit: &ScheduledCircuit) -> Result<DistanceReport> {
    let index = CircuitIndex::new(circuit);
    let words = index.num_detectors().div_ceil(64).max(1);
    let mut seen: HashMap<Effect, usize> = HashMap::new();
    let mut faults: Vec<(Vec<u64>, u64, Mechanism)> = Vec::new();
    for (m, p) in mechanisms(circuit) {
        if p <= 0.0 {
            continue;
        }
        let e = index.effect(&m);
        if e.is_trivial() || seen.contains_key(&e) {
            continue;
        }
        let mut bits = vec![0u64; words];
        for &d in &e.detectors {
            bits[d / 64] |= 1 << (d % 64);
        }
        seen.insert(e.clone(), faults.len());
        faults.push((bits, e.observables, m));
    }
    let report = |chosen: Vec<usize>| {
        let observables = chosen.iter().fold(0, |acc, &i| acc ^ faults[i].1);
        DistanceReport {
            method: DistanceMethod::BruteForce,
            value: Some(chosen.len()),
            exact: true,
            observables,
            witness: Some(Witness::Mechanisms(chosen.iter().map(|&i| faults[i].2).collect())),
        }
    };
    let m = faults.len();
    let mut spent = 0u64;
    for w in 1..=m {
        spent = spent.saturating_add(binomial(m as u64, w as u64));
        if spent > SEARCH_BUDGET {
            return Err(Error::TooLarge(format!("{m} distinct faults, weight {w} exceeds the search budget")));
        }
        let found = (0..m).into_par_iter().find_map_first(|first| {
            let mut chosen = vec![first];
            let acc = faults[first].0.clone();
            combo_search(&faults, first + 1, w - 1, &acc, faults[first].1, &mut chosen).then_some(chosen)
        });
        if let Some(chosen) = found {
            return Ok(report(chosen));
        }
    }
    Ok(DistanceReport::none(DistanceMethod::BruteForce))
}

fn combo_search(faults: &[(Vec<u64>, u64, Mechanism)], from: usize, left: usize, acc: &[u64], obs: u64, chosen: &mut Vec<usize>) -> bool {
    if left == 0 {
        return obs != 0 && acc.iter().all(|&x| x == 0);
    }
    let mut next = acc.to_vec();
    for i in from..=faults.len().saturating_sub(left) {
        for (a, (b, c)) in next.iter_mut().zip(acc.iter().zip(&faults[i].0)) {
            *a = b ^ c;
        }
        chosen.push(i);
        if combo_search(faults, i + 1, left - 1, &next, obs ^ faults[i].1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r as u64
}

fn to_u128(b: &BitVec) -> u128 {
    let w = b.words();
    w.first().copied().unwrap_or(0) as u128 | (w.get(1).copied().unwrap_or(0) as u128) << 64
}

/// GF(2) span of bit masks with lowest-bit pivots.
#[derive(Clone, Debug, Default)]
struct Span {
    rows: Vec<u128>,
}

impl Span {
    fn reduce(&self, mut v: u128) -> u128 {
        for &r in &self.rows {
            if v & r & r.wrapping_neg() != 0 {
                v ^= r;
            }
        }
        v
    }

    fn insert(&mut self, v: u128) {
        let r = self.reduce(v);
        if r != 0 {
            self.rows.push(r);
        }
    }
}

/// X-type and Z-type parts of a group that is generated by pure operators.
struct CssSplit {
    x: Vec<u128>,
    z: Vec<u128>,
}

fn css_split(b: &PauliGroupBasis) -> Option<CssSplit> {
    let n = b.num_qubits();
    if n > 128 {
        return None;
    }
    let pure = |g: &PauliString| g.x_bits().is_zero() || g.z_bits().is_zero();
    let (xs, zs): (Vec<PauliString>, Vec<PauliString>) = if b.generators().iter().all(pure) {
        b.generators().iter().filter(|g| !g.is_identity()).cloned().partition(|g| g.z_bits().is_zero())
    } else {
        let xg = PauliGroupBasis::from_generators(n, &(0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect::<Vec<_>>()).ok()?;
        let zg = PauliGroupBasis::from_generators(n, &(0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect::<Vec<_>>()).ok()?;
        let bx = b.intersection(&xg).ok()?;
        let bz = b.intersection(&zg).ok()?;
        if bx.rank() + bz.rank() != b.rank() {
            return None;
        }
        (bx.generators().to_vec(), bz.generators().to_vec())
    };
    Some(CssSplit {
        x: xs.iter().map(|g| to_u128(g.x_bits())).collect(),
        z: zs.iter().map(|g| to_u128(g.z_bits())).collect(),
    })
}

/// Outcome of a budgeted minimum-weight search.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(PauliString),
    /// Every operator of the centralizer lies in the excluded group.
    Empty,
    /// The budget ran out; no qualifying operator has weight below `proven`.
    Exhausted { proven: usize },
}

/// Lowest-weight operator commuting with every generator of `commute` and
/// not in `excluded` (phases ignored).
///
/// When both groups are generated by pure X and pure Z operators, the
/// minimum is attained by a pure operator, so each type is searched on its
/// own by increasing weight. Otherwise all `4^n` operators are enumerated,
/// which requires `n <= 9`.
pub fn search_min_weight(commute: &PauliGroupBasis, excluded: &PauliGroupBasis, budget: u64) -> Result<SearchOutcome> {
    let n = commute.num_qubits();
    if excluded.num_qubits() != n {
        return Err(Error::Dimension { left: n, right: excluded.num_qubits() });
    }
    if let (Some(c), Some(e)) = (css_split(commute), css_split(excluded)) {
        return Ok(css_search(n, &c, &e, budget));
    }
    if n > 9 {
        return Err(Error::TooLarge(format!("{n} qubits without CSS structure; exhaustive search needs n <= 9")));
    }
    Ok(full_search(n, commute, excluded))
}

fn css_search(n: usize, commute: &CssSplit, excluded: &CssSplit, budget: u64) -> SearchOutcome {
    // X candidates must overlap every Z generator evenly and avoid the
    // excluded X span; symmetrically for Z.
    let side = |constraints: &[u128], excl: &[u128]| {
        let mut span = Span::default();
        for &v in excl {
            span.insert(v);
        }
        let syn: Vec<u128> = (0..n)
            .map(|q| constraints.iter().enumerate().filter(|(_, r)| *r >> q & 1 == 1).fold(0u128, |acc, (j, _)| acc | 1 << j))
            .collect();
        (syn, span)
    };
    // Independent constraint rows fit in 128 bits since n <= 128.
    let reduce_rows = |rows: &[u128]| {
        let mut s = Span::default();
        for &r in rows {
            s.insert(r);
        }
        s.rows
    };
    let zrows = reduce_rows(&commute.z);
    let xrows = reduce_rows(&commute.x);
    let sides = [(side(&zrows, &excluded.x), Pauli::X), (side(&xrows, &excluded.z), Pauli::Z)];
    let mut spent = 0u64;
    for w in 1..=n {
        spent = spent.saturating_add(binomial(n as u64, w as u64).saturating_mul(2));
        if spent > budget {
            return SearchOutcome::Exhausted { proven: w };
        }
        for ((syn, span), kind) in &sides {
            let found = (0..n).into_par_iter().find_map_first(|first| {
                subset_search(syn, span, first + 1, w - 1, syn[first], 1u128 << first, n)
            });
            if let Some(mask) = found {
                let support = (0..n).filter(|&q| mask >> q & 1 == 1);
                let op = match kind {
                    Pauli::X => PauliString::x_on(n, support),
                    _ => PauliString::z_on(n, support),
                };
                return SearchOutcome::Found(op);
            }
        }
    }
    SearchOutcome::Empty
}

fn subset_search(syn: &[u128], span: &Span, from: usize, left: usize, acc: u128, mask: u128, n: usize) -> Option<u128> {
    if left == 0 {
        return (acc == 0 && span.reduce(mask) != 0).then_some(mask);
    }
    for q in from..=n - left {
        if let Some(m) = subset_search(syn, span, q + 1, left - 1, acc ^ syn[q], mask | 1 << q, n) {
            return Some(m);
        }
    }
    None
}

fn full_search(n: usize, commute: &PauliGroupBasis, excluded: &PauliGroupBasis) -> SearchOutcome {
    let masks = |g: &PauliString| (to_u128(g.x_bits()) as u32, to_u128(g.z_bits()) as u32);
    let gens: Vec<(u32, u32)> = commute.generators().iter().map(masks).collect();
    let mut span = Span::default();
    for g in excluded.generators() {
        let (x, z) = masks(g);
        span.insert(x as u128 | (z as u128) << n);
    }
    let best = (1u64..1 << (2 * n))
        .into_par_iter()
        .filter_map(|v| {
            let (x, z) = ((v & ((1 << n) - 1)) as u32, (v >> n) as u32);
            let ok = gens.iter().all(|&(gx, gz)| ((x & gz) ^ (z & gx)).count_ones() % 2 == 0) && span.reduce(v as u128) != 0;
            ok.then_some(((x | z).count_ones(), v))
        })
        .min();
    match best {
        None => SearchOutcome::Empty,
        Some((_, v)) => {
            let x = BitVec::from_indices(n, (0..n).filter(|&q| v >> q & 1 == 1));
            let z = BitVec::from_indices(n, (0..n).filter(|&q| v >> (n + q) & 1 == 1));
            SearchOutcome::Found(PauliString::hermitian(x, z))
        }
    }
}

fn algebraic_report(method: DistanceMethod, outcome: SearchOutcome) -> Result<DistanceReport> {
    match outcome {
        SearchOutcome::Found(p) => Ok(DistanceReport::from_pauli(method, Some(p), true)),
        SearchOutcome::Empty => Ok(DistanceReport::none(method)),
        SearchOutcome::Exhausted { proven } => Err(Error::TooLarge(format!("search budget exhausted at weight {proven}"))),
    }
}

/// Stabilizer-code distance of a group: lowest weight in `Z(S) \ S`.
pub fn stabilizer_distance(s: &PauliGroupBasis) -> Result<DistanceReport> {
    algebraic_report(DistanceMethod::Isg, search_min_weight(s, s, SEARCH_BUDGET)?)
}

/// Dressed distance of the subsystem code with gauge group `g`: lowest
/// weight in `Z(S) \ G` with `S` the center of `G`.
pub fn subsystem_distance(g: &PauliGroupBasis) -> Result<DistanceReport> {
    let s = g.center();
    algebraic_report(DistanceMethod::Subsystem, search_min_weight(&s, g, SEARCH_BUDGET)?)
}

#[derive(Clone, Debug)]
pub struct AlgebraicDistances {
    /// Minimum over rounds of the ISG distance.
    pub isg: DistanceReport,
    pub isg_round: usize,
    /// Minimum over consecutive round pairs of the subsystem distance.
    pub subsystem: DistanceReport,
    pub subsystem_round: usize,
}

/// ISG and subsystem distance bounds of a periodic schedule.
pub fn isg_and_subsystem_distance(schedule: &MeasurementSchedule) -> Result<AlgebraicDistances> {
    let isgs = compute_isgs(schedule)?;
    let key = |r: &DistanceReport| r.value.unwrap_or(usize::MAX);
    let mut isg: Option<(DistanceReport, usize)> = None;
    for g in &isgs {
        let rep = stabilizer_distance(&g.basis)?;
        if isg.as_ref().is_none_or(|(b, _)| key(&rep) < key(b)) {
            isg = Some((rep, g.round_index));
        }
    }
    let period = schedule.period();
    let mut sub: Option<(DistanceReport, usize)> = None;
    for r in 0..period {
        let next = &isgs[(r + 1) % period].basis;
        let g = PauliGroupBasis::from_generators(schedule.n, isgs[r].basis.generators().iter().chain(next.generators()))?;
        let mut rep = subsystem_distance(&g)?;
        rep.method = DistanceMethod::Subsystem;
        if sub.as_ref().is_none_or(|(b, _)| key(&rep) < key(b)) {
            sub = Some((rep, r));
        }
    }
    let (isg, isg_round) = isg.ok_or_else(|| Error::arg("empty schedule"))?;
    let (subsystem, subsystem_round) = sub.ok_or_else(|| Error::arg("empty schedule"))?;
    Ok(AlgebraicDistances { isg, isg_round, subsystem, subsystem_round })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VRule {
    /// (A), `m` already in V.
    AlreadyPresent,
    /// (A), rank grows by one.
    Added,
    /// (B), rank unchanged.
    Replaced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CRule {
    /// (C), C unchanged.
    Unchanged,
    /// (D)(i), one element moved to P̃.
    Removed,
    /// (D)(ii), anticommuting elements multiplied by the removed V element.
    Updated,
}

/// Set sizes after one measurement of the replay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnmaskedStep {
    /// Round offset after the start round, from 1.
    pub round: usize,
    pub v_rule: VRule,
    pub c_rule: CRule,
    pub v_rank: usize,
    pub c_len: usize,
    pub p_len: usize,
    pub u_rank: usize,
}

#[derive(Clone, Debug)]
pub struct UnmaskedSets {
    pub v: Vec<PauliString>,
    pub c: Vec<PauliString>,
    pub p_tilde: Vec<PauliString>,
    /// The measurement that moved each P̃ element out of C; these
    /// anticommute with their partner and serve as its destabilizer.
    pub destabilizers: Vec<PauliString>,
    pub u_tilde: PauliGroupBasis,
    /// The group generated by C after the third replayed round.
    pub c_after_round3: PauliGroupBasis,
    pub trace: Vec<UnmaskedStep>,
}

impl UnmaskedSets {
    pub fn unmasked_stabilizers(&self) -> &PauliGroupBasis {
        &self.u_tilde
    }

    /// P̃, their destabilizers and the unmasked stabilizers.
    pub fn gauge_group(&self) -> Result<PauliGroupBasis> {
        let n = self.u_tilde.num_qubits();
        PauliGroupBasis::from_generators(n, self.p_tilde.iter().chain(&self.destabilizers).chain(self.u_tilde.generators()))
    }
}

/// Replays the schedule from the ISG after `start_round`, tracking V, C,
/// P̃ and Ũ. Rule (B) removes the first anticommuting V element in
/// insertion order; rule (D)(i) removes the first anticommuting C element.
pub fn unmasked_sets(schedule: &MeasurementSchedule, start_round: usize) -> Result<UnmaskedSets> {
    let period = schedule.period();
    if start_round >= period {
        return Err(Error::arg(format!("start round {start_round} outside period {period}")));
    }
    let n = schedule.n;
    let isgs = compute_isgs(schedule)?;
    let mut c: Vec<PauliString> = isgs[start_round].basis.generators().to_vec();
    let mut v: Vec<PauliString> = Vec::new();
    let mut p_tilde = Vec::new();
    let mut destabilizers = Vec::new();
    let mut u_tilde = PauliGroupBasis::new(n);
    let mut trace = Vec::new();
    let mut c_after_round3 = None;
    let replay = period.max(4);

    for offset in 1..=replay + period {
        let accrue = offset <= replay;
        for m in &schedule.rounds[(start_round + offset) % period] {
            let anti_v: Vec<usize> = (0..v.len()).filter(|&i| !v[i].commutes_unchecked(m)).collect();
            let anti_c: Vec<usize> = (0..c.len()).filter(|&i| !c[i].commutes_unchecked(m)).collect();

            let c_rule = match (anti_c.first(), anti_v.first()) {
                (None, _) => CRule::Unchanged,
                (Some(&first), None) => {
                    let pivot = c[first].clone();
                    for &i in &anti_c[1..] {
                        c[i].mul_assign_right(&pivot);
                    }
                    c.remove(first);
                    p_tilde.push(pivot);
                    destabilizers.push(m.unsigned());
                    CRule::Removed
                }
                (Some(_), Some(&v1)) => {
                    let v1 = v[v1].clone();
                    let mut emptied = Vec::new();
                    for &i in &anti_c {
                        if c[i].same_up_to_phase(&v1) {
                            if accrue {
                                u_tilde.push(c[i].unsigned())?;
                            }
                            emptied.push(i);
                        } else {
                            c[i] = v1.multiply(&c[i])?;
                        }
                    }
                    for &i in emptied.iter().rev() {
                        c.remove(i);
                    }
                    CRule::Updated
                }
            };

            let v_rule = match anti_v.split_first() {
                None => {
                    let basis = PauliGroupBasis::from_generators(n, &v)?;
                    if basis.contains(m) {
                        VRule::AlreadyPresent
                    } else {
                        v.push(m.unsigned());
                        VRule::Added
                    }
                }
                Some((&first, rest)) => {
                    let v1 = v[first].clone();
                    for &i in rest {
                        v[i].mul_assign_right(&v1);
                    }
                    v.remove(first);
                    v.push(m.unsigned());
                    VRule::Replaced
                }
            };

            if accrue {
                let cg = PauliGroupBasis::from_generators(n, &c)?;
                let vg = PauliGroupBasis::from_generators(n, &v)?;
                for g in cg.intersection(&vg)?.generators() {
                    u_tilde.push(g.unsigned())?;
                }
            }
            trace.push(UnmaskedStep {
                round: offset,
                v_rule,
                c_rule,
                v_rank: v.len(),
                c_len: c.len(),
                p_len: p_tilde.len(),
                u_rank: u_tilde.rank(),
            });
        }
        if offset == 3 {
            c_after_round3 = Some(PauliGroupBasis::from_generators(n, &c)?);
        }
    }
    let c_after_round3 = c_after_round3.expect("at least three rounds replayed");
    if !PauliGroupBasis::from_generators(n, &c)?.same_group(&c_after_round3) {
        return Err(Error::invariant("C keeps changing after the third replayed round"));
    }
    Ok(UnmaskedSets { v, c, p_tilde, destabilizers, u_tilde, c_after_round3, trace })
}

/// Unmasked distance of the ISG after `start_round`: lowest weight in the
/// centralizer of the unmasked stabilizers outside the gauge group.
///
/// The search is exact while it fits [`SEARCH_BUDGET`]. Otherwise a
/// `candidate` that qualifies is reported as an upper bound, marked exact
/// only if every lower weight was already excluded.
pub fn unmasked_distance(schedule: &MeasurementSchedule, start_round: usize, candidate: Option<&PauliString>) -> Result<(UnmaskedSets, DistanceReport)> {
    let sets = unmasked_sets(schedule, start_round)?;
    let gauge = sets.gauge_group()?;
    let u = sets.unmasked_stabilizers();
    let report = match search_min_weight(u, &gauge, SEARCH_BUDGET)? {
        SearchOutcome::Found(p) => DistanceReport::from_pauli(DistanceMethod::Unmasked, Some(p), true),
        SearchOutcome::Empty => DistanceReport::none(DistanceMethod::Unmasked),
        SearchOutcome::Exhausted { proven } => {
            let c = candidate.ok_or_else(|| Error::TooLarge(format!("search budget exhausted at weight {proven} and no candidate given")))?;
            if !u.commutes_with_all(c) || gauge.contains(c) {
                return Err(Error::arg("candidate is not a nontrivial unmasked logical"));
            }
            DistanceReport::from_pauli(DistanceMethod::Unmasked, Some(c.clone()), c.weight() <= proven)
        }
    };
    Ok((sets, report))
}
