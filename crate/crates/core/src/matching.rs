//! Minimum-weight perfect matching decoder.
//!
//! Edge weights are `-ln(p/(1-p))`, clamped at [`WEIGHT_CAP`] and stored as
//! integers in units of `1/WEIGHT_SCALE` so the blossom solver stays exact.
//! Paths never pass through the boundary node.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::blossom::max_weight_matching;
use crate::dem::DecodingGraph;
use crate::error::{Error, Result};

pub const WEIGHT_CAP: f64 = 46.0;
pub const WEIGHT_SCALE: f64 = 1024.0;
/// Graphs with at most this many detectors get a dense all-pairs table.
pub const DENSE_LIMIT: usize = 2048;
const INF: i64 = i64::MAX / 4;

/// Integer weight of an edge with flip probability `p`.
pub fn edge_weight(p: f64) -> Result<i64> {
    if !(p >= 0.0 && p <= 0.5) {
        return Err(Error::arg(format!("edge probability {p} outside [0, 0.5]")));
    }
    let w = if p == 0.0 { WEIGHT_CAP } else { (-(p / (1.0 - p)).ln()).min(WEIGHT_CAP) };
    Ok((w * WEIGHT_SCALE).round() as i64)
}

fn to_real(w: i64) -> f64 {
    if w >= INF {
        f64::INFINITY
    } else {
        w as f64 / WEIGHT_SCALE
    }
}

#[derive(Clone, Debug)]
struct Adjacency {
    boundary: usize,
    /// `(neighbour, weight, observables)`, lightest first per pair.
    adj: Vec<Vec<(u32, i64, u64)>>,
}

impl Adjacency {
    fn new(graph: &DecodingGraph) -> Result<Self> {
        let n = graph.num_nodes();
        let mut adj: Vec<Vec<(u32, i64, u64)>> = vec![Vec::new(); n];
        for e in &graph.edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::arg(format!("edge ({}, {}) outside graph", e.a, e.b)));
            }
            let w = edge_weight(e.probability)?;
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                match adj[u].iter_mut().find(|x| x.0 as usize == v) {
                    Some(x) if w < x.1 => *x = (v as u32, w, e.observables),
                    Some(_) => {}
                    None => adj[u].push((v as u32, w, e.observables)),
                }
            }
        }
        for list in &mut adj {
            list.sort_by_key(|x| x.0);
        }
        Ok(Adjacency { boundary: graph.boundary(), adj })
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Dijkstra from `src` without expanding through the boundary (unless it
    /// is the source). Ties resolve toward the smaller node id. `visit` is
    /// called once per settled node; returning `false` stops the search.
    fn dijkstra(&self, src: usize, dist: &mut [i64], obs: &mut [u64], touched: &mut Vec<usize>, mut visit: impl FnMut(usize, i64, u64) -> bool) {
        let mut heap = BinaryHeap::new();
        dist[src] = 0;
        obs[src] = 0;
        touched.push(src);
        heap.push(Reverse((0i64, src as u32)));
        while let Some(Reverse((d, u))) = heap.pop() {
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            if !visit(u, d, obs[u]) {
                break;
            }
            if u == self.boundary && u != src {
                continue;
            }
            for &(v, w, o) in &self.adj[u] {
                let v = v as usize;
                let nd = d + w;
                if nd < dist[v] {
                    if dist[v] == INF {
                        touched.push(v);
                    }
                    dist[v] = nd;
                    obs[v] = obs[u] ^ o;
                    heap.push(Reverse((nd, v as u32)));
                }
            }
        }
    }
}

struct Scratch {
    dist: Vec<i64>,
    obs: Vec<u64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { dist: vec![INF; n], obs: vec![0; n], touched: Vec::new() }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = INF;
        }
        self.touched.clear();
    }
}

/// All-pairs shortest paths among detectors and to the boundary.
#[derive(Clone, Debug)]
pub struct PathTable {
    num_detectors: usize,
    /// Row `i` holds distances from detector `i` to every node; the last
    /// column is the boundary.
    dist: Vec<i64>,
    obs: Vec<u64>,
}

impl PathTable {
    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        let (i, j) = if j < self.num_detectors && j < i { (j, i) } else { (i, j) };
        i * (self.num_detectors + 1) + j
    }

    /// Shortest-path length between two nodes (`num_detectors` is the
    /// boundary); infinite across disconnected components.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        to_real(self.dist[self.cell(i, j)])
    }

    /// Observable mask accumulated along the chosen shortest path.
    pub fn observables(&self, i: usize, j: usize) -> u64 {
        self.obs[self.cell(i, j)]
    }

    fn raw(&self, i: usize, j: usize) -> (i64, u64) {
        let c = self.cell(i, j);
        (self.dist[c], self.obs[c])
    }
}

/// Boundary distances from a single Dijkstra rooted at the boundary.
fn boundary_paths(adj: &Adjacency) -> (Vec<i64>, Vec<u64>) {
    let mut s = Scratch::new(adj.len());
    adj.dijkstra(adj.boundary, &mut s.dist, &mut s.obs, &mut s.touched, |_, _, _| true);
    (s.dist, s.obs)
}

fn build_table(adj: &Adjacency, bdist: &[i64], bobs: &[u64]) -> PathTable {
    let nd = adj.boundary;
    let width = nd + 1;
    let rows: Vec<(Vec<i64>, Vec<u64>)> = (0..nd)
        .into_par_iter()
        .map_init(
            || Scratch::new(adj.len()),
            |s, i| {
                s.reset();
                adj.dijkstra(i, &mut s.dist, &mut s.obs, &mut s.touched, |_, _, _| true);
                let mut d = s.dist[..width].to_vec();
                let mut o = s.obs[..width].to_vec();
                d[nd] = bdist[i];
                o[nd] = bobs[i];
                for j in 0..width {
                    if d[j] >= INF {
                        o[j] = 0;
                    }
                }
                (d, o)
            },
        )
        .collect();
    let mut dist = Vec::with_capacity(nd * width);
    let mut obs = Vec::with_capacity(nd * width);
    for (d, o) in rows {
        dist.extend(d);
        obs.extend(o);
    }
    PathTable { num_detectors: nd, dist, obs }
}

/// Dense all-pairs shortest paths over the whole graph.
pub fn precompute_paths(graph: &DecodingGraph) -> Result<PathTable> {
    let adj = Adjacency::new(graph)?;
    let (bdist, bobs) = boundary_paths(&adj);
    Ok(build_table(&adj, &bdist, &bobs))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatchingResult {
    /// Matched pairs, `None` standing for the boundary, sorted.
    pub pairs: Vec<(usize, Option<usize>)>,
    pub total_weight: f64,
    /// Total weight in integer units.
    pub weight_units: i64,
    pub predicted_observables: u64,
}

/// Distances among one syndrome's defects.
struct Local {
    bdist: Vec<i64>,
    bobs: Vec<u64>,
    /// `(i, j, dist, obs)` with `i < j` indexing the sorted syndrome.
    pairs: Vec<(usize, usize, i64, u64)>,
}

/// Reusable decoder; `decode` takes `&self` and may run on many threads.
#[derive(Clone, Debug)]
pub struct Decoder {
    adj: Adjacency,
    bdist: Vec<i64>,
    bobs: Vec<u64>,
    table: Option<PathTable>,
}

impl Decoder {
    /// Picks a dense table when the graph is small enough.
    pub fn new(graph: &DecodingGraph) -> Result<Self> {
        Self::with_table(graph, graph.num_detectors <= DENSE_LIMIT)
    }

    pub fn with_table(graph: &DecodingGraph, dense: bool) -> Result<Self> {
        let adj = Adjacency::new(graph)?;
        let (bdist, bobs) = boundary_paths(&adj);
        let table = dense.then(|| build_table(&adj, &bdist, &bobs));
        Ok(Decoder { adj, bdist, bobs, table })
    }

    pub fn num_detectors(&self) -> usize {
        self.adj.boundary
    }

    pub fn is_dense(&self) -> bool {
        self.table.is_some()
    }

    fn check(&self, syndrome: &[usize]) -> Result<Vec<usize>> {
        let mut s = syndrome.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("syndrome lists a detector twice"));
        }
        if let Some(&bad) = s.iter().find(|&&v| v >= self.num_detectors()) {
            return Err(Error::arg(format!("detector {bad} outside graph")));
        }
        Ok(s)
    }

    /// Pair distances among the defects; with `prune`, pairs that are no
    /// shorter than going through the boundary separately are dropped (an
    /// optimal matching never needs them).
    fn local(&self, s: &[usize], prune: bool) -> Local {
        let bdist: Vec<i64> = s.iter().map(|&v| self.bdist[v]).collect();
        let bobs: Vec<u64> = s.iter().map(|&v| self.bobs[v]).collect();
        let keep = |i: usize, j: usize, d: i64| d < INF && (!prune || d < bdist[i].saturating_add(bdist[j]));
        let mut pairs = Vec::new();
        match &self.table {
            Some(t) => {
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        let (d, o) = t.raw(s[i], s[j]);
                        if keep(i, j, d) {
                            pairs.push((i, j, d, o));
                        }
                    }
                }
            }
            None => {
                let bmax = bdist.iter().copied().filter(|&b| b < INF).max().unwrap_or(0);
                let mut scratch = Scratch::new(self.adj.len());
                let pos = |v: usize| s.binary_search(&v).ok();
                for i in 0..s.len() {
                    let limit = if prune && bdist[i] < INF { bdist[i] + bmax } else { INF };
                    let mut remaining = s.len() - i - 1;
                    scratch.reset();
                    let Scratch { dist, obs, touched } = &mut scratch;
                    self.adj.dijkstra(s[i], dist, obs, touched, |v, d, o| {
                        if d > limit || remaining == 0 {
                            return false;
                        }
                        if let Some(j) = pos(v).filter(|&j| j > i) {
                            remaining -= 1;
                            if keep(i, j, d) {
                                pairs.push((i, j, d, o));
                            }
                        }
                        true
                    });
                }
                pairs.sort_unstable_by_key(|p| (p.0, p.1));
            }
        }
        Local { bdist, bobs, pairs }
    }

    /// Exact minimum-weight matching of the flipped detectors, each either
    /// paired with another or sent to the boundary.
    pub fn decode(&self, syndrome: &[usize]) -> Result<MatchingResult> {
        let s = self.check(syndrome)?;
        if s.is_empty() {
            return Ok(MatchingResult::default());
        }
        let local = self.local(&s, true);
        let m = s.len();

        // Components of the pruned defect graph are matched independently.
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j, _, _) in &local.pairs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut comp_of = vec![0usize; m];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut root_id = vec![usize::MAX; m];
        for v in 0..m {
            let r = find(&mut parent, v);
            if root_id[r] == usize::MAX {
                root_id[r] = comps.len();
                comps.push(Vec::new());
            }
            comp_of[v] = root_id[r];
            comps[root_id[r]].push(v);
        }
        let mut comp_pairs: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
        for (k, p) in local.pairs.iter().enumerate() {
            comp_pairs[comp_of[p.0]].push(k);
        }

        let mut result = MatchingResult::default();
        for (c, members) in comps.iter().enumerate() {
            let mut slot = vec![usize::MAX; m];
            for (x, &v) in members.iter().enumerate() {
                slot[v] = x;
            }
            let size = members.len();
            if size == 1 && local.bdist[members[0]] >= INF {
                return Err(Error::arg(format!("detector {} cannot be matched", s[members[0]])));
            }
            // Vertices 0..size are defects, size..2*size their boundary twins.
            let mut raw: Vec<(usize, usize, i64)> = Vec::new();
            for (x, &v) in members.iter().enumerate() {
                if local.bdist[v] < INF {
                    raw.push((x, size + x, local.bdist[v]));
                }
            }
            for &k in &comp_pairs[c] {
                let (i, j, d, _) = local.pairs[k];
                let (x, y) = (slot[i], slot[j]);
                raw.push((x, y, d));
                if local.bdist[i] < INF && local.bdist[j] < INF {
                    raw.push((size + x, size + y, 0));
                }
            }
            let top = raw.iter().map(|e| e.2).max().unwrap_or(0) + 1;
            let edges: Vec<(usize, usize, i64)> = raw.iter().map(|&(a, b, w)| (a, b, top - w)).collect();
            let mate = max_weight_matching(2 * size, &edges, true);
            for x in 0..size {
                let v = members[x];
                match mate[x] {
                    Some(y) if y == size + x => {
                        result.pairs.push((s[v], None));
                        result.weight_units += local.bdist[v];
                        result.predicted_observables ^= local.bobs[v];
                    }
                    Some(y) if y < size && x < y => {
                        let (i, j) = (v.min(members[y]), v.max(members[y]));
                        let k = local.pairs.binary_search_by_key(&(i, j), |p| (p.0, p.1)).expect("matched pair exists");
                        let (_, _, d, o) = local.pairs[k];
                        result.pairs.push((s[i], Some(s[j])));
                        result.weight_units += d;
                        result.predicted_observables ^= o;
                    }
                    Some(y) if y < size => {}
                    _ => return Err(Error::arg(format!("no perfect matching covers detector {}", s[v]))),
                }
            }
        }
        result.pairs.sort_unstable();
        result.total_weight = to_real(result.weight_units);
        Ok(result)
    }

    /// Exhaustive minimum over all pairings, for at most 10 defects.
    pub fn brute_force(&self, syndrome: &[usize]) -> Result<MatchingResult> {
        let s = self.check(syndrome)?;
        if s.len() > 10 {
            return Err(Error::TooLarge(format!("{} defects for exhaustive matching", s.len())));
        }
        let local = self.local(&s, false);
        let m = s.len();
        let mut pair = vec![vec![None; m]; m];
        for &(i, j, d, o) in &local.pairs {
            pair[i][j] = Some((d, o));
        }

        struct Search<'a> {
            local: &'a Local,
            pair: &'a [Vec<Option<(i64, u64)>>],
            best: Option<(i64, Vec<(usize, Option<usize>)>)>,
        }
        impl Search<'_> {
            fn go(&mut self, used: &mut Vec<bool>, acc: i64, chosen: &mut Vec<(usize, Option<usize>)>) {
                let Some(i) = used.iter().position(|&u| !u) else {
                    if self.best.as_ref().is_none_or(|b| acc < b.0) {
                        self.best = Some((acc, chosen.clone()));
                    }
                    return;
                };
                used[i] = true;
                if self.local.bdist[i] < INF {
                    chosen.push((i, None));
                    self.go(used, acc + self.local.bdist[i], chosen);
                    chosen.pop();
                }
                for j in i + 1..used.len() {
                    if let (false, Some((d, _))) = (used[j], self.pair[i][j]) {
                        used[j] = true;
                        chosen.push((i, Some(j)));
                        self.go(used, acc + d, chosen);
                        chosen.pop();
                        used[j] = false;
                    }
                }
                used[i] = false;
            }
        }
        let mut search = Search { local: &local, pair: &pair, best: None };
        search.go(&mut vec![false; m], 0, &mut Vec::new());
        let (w, chosen) = search.best.ok_or_else(|| Error::arg("syndrome admits no perfect matching"))?;
        let mut result = MatchingResult { weight_units: w, total_weight: to_real(w), ..Default::default() };
        for (i, j) in chosen {
            match j {
                None => {
                    result.pairs.push((s[i], None));
                    result.predicted_observables ^= local.bobs[i];
                }
                Some(j) => {
                    result.pairs.push((s[i], Some(s[j])));
                    result.predicted_observables ^= pair[i][j].unwrap().1;
                }
            }
        }
        result.pairs.sort_unstable();
        Ok(result)
    }
}

/// One-shot decode; build a [`Decoder`] once when decoding many syndromes.
pub fn decode(graph: &DecodingGraph, syndrome: &[usize]) -> Result<MatchingResult> {
    Decoder::new(graph)?.decode(syndrome)
}

/// Exhaustive matching oracle over at most 10 defects.
pub fn brute_force_match(graph: &DecodingGraph, syndrome: &[usize]) -> Result<MatchingResult> {
    Decoder::new(graph)?.brute_force(syndrome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_bacon_shor_circuit, build_fbs_circuit, FbsOptions, NoiseParams, ScheduleMode};
    use crate::dem::{extract_decoding_graph, GraphEdge, Mechanism};
    use crate::schedule::{place_defects, PlacementMode};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn edge(a: usize, b: usize, p: f64, obs: u64) -> GraphEdge {
        GraphEdge {
            a,
            b,
            probability: p,
            observables: obs,
            multiplicity: 1,
            representative: Mechanism::MeasurementFlip { record: 0 },
        }
    }

    /// Chain 0-1-2-3 with boundary at both ends; the left boundary edge flips
    /// the observable.
    fn chain() -> DecodingGraph {
        DecodingGraph {
            num_detectors: 4,
            num_observables: 1,
            edges: vec![edge(0, 4, 0.1, 1), edge(0, 1, 0.1, 0), edge(1, 2, 0.1, 0), edge(2, 3, 0.1, 0), edge(3, 4, 0.1, 0)],
            undetectable: Vec::new(),
        }
    }

    fn fbs5() -> DecodingGraph {
        let defects = place_defects(5, 1, PlacementMode::Grid).unwrap();
        let c = build_fbs_circuit(5, &defects, 2, NoiseParams::code_capacity(0.01), ScheduleMode::Standard, FbsOptions::default()).unwrap();
        extract_decoding_graph(&c).unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(0.5).unwrap(), 0);
        assert!(edge_weight(0.6).is_err());
        assert!(edge_weight(-0.1).is_err());
        assert_eq!(edge_weight(0.0).unwrap(), (WEIGHT_CAP * WEIGHT_SCALE) as i64);
        assert_eq!(edge_weight(1e-30).unwrap(), (WEIGHT_CAP * WEIGHT_SCALE) as i64);
        let w = edge_weight(0.1).unwrap() as f64 / WEIGHT_SCALE;
        assert!((w - 9f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn rejects_heavy_edges() {
        let mut g = chain();
        g.edges[2].probability = 0.7;
        assert!(precompute_paths(&g).is_err());
        assert!(Decoder::new(&g).is_err());
    }

    #[test]
    fn uniform_weights_count_hops() {
        let t = precompute_paths(&chain()).unwrap();
        let w = edge_weight(0.1).unwrap() as f64 / WEIGHT_SCALE;
        assert!((t.distance(0, 3) - 3.0 * w).abs() < 1e-9);
        assert!((t.distance(1, 4) - 2.0 * w).abs() < 1e-9);
        assert_eq!(t.observables(1, 4), 1);
        assert_eq!(t.observables(2, 4), 0);
        assert_eq!(t.distance(2, 1), t.distance(1, 2));
    }

    #[test]
    fn disconnected_components_are_infinite() {
        let g = DecodingGraph {
            num_detectors: 4,
            num_observables: 0,
            edges: vec![edge(0, 1, 0.1, 0), edge(2, 3, 0.1, 0)],
            undetectable: Vec::new(),
        };
        let t = precompute_paths(&g).unwrap();
        assert!(t.distance(0, 2).is_infinite());
        assert!(t.distance(0, 4).is_infinite());
        assert!(t.distance(0, 1).is_finite());
        let d = Decoder::new(&g).unwrap();
        assert_eq!(d.decode(&[0, 1, 2, 3]).unwrap().pairs, vec![(0, Some(1)), (2, Some(3))]);
        assert!(d.decode(&[0, 2]).is_err());
    }

    #[test]
    fn empty_and_small_syndromes() {
        let d = Decoder::new(&chain()).unwrap();
        assert_eq!(d.decode(&[]).unwrap(), MatchingResult::default());
        let r = d.decode(&[0]).unwrap();
        assert_eq!(r.pairs, vec![(0, None)]);
        assert_eq!(r.predicted_observables, 1);
        let r = d.decode(&[1, 2]).unwrap();
        assert_eq!(r.pairs, vec![(1, Some(2))]);
        assert_eq!(r.predicted_observables, 0);
        assert_eq!(d.brute_force(&[1, 2]).unwrap(), r);
        assert!(d.decode(&[1, 1]).is_err());
        assert!(d.decode(&[9]).is_err());
        assert!(d.brute_force(&(0..4).cycle().take(11).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn fbs5_corrects_every_single_mechanism() {
        let g = fbs5();
        let d = Decoder::new(&g).unwrap();
        for e in &g.edges {
            let syndrome: Vec<usize> = if e.b == g.boundary() { vec![e.a] } else { vec![e.a, e.b] };
            let r = d.decode(&syndrome).unwrap();
            assert_eq!(r.predicted_observables, e.observables, "edge {e:?}");
        }
    }

    #[test]
    fn bacon_shor_d3_corrects_single_faults() {
        let c = build_bacon_shor_circuit(3, 2, NoiseParams { p_depol: 0.01, p_reset: 0.01, p_meas: 0.01 }).unwrap();
        let g = extract_decoding_graph(&c).unwrap();
        let d = Decoder::new(&g).unwrap();
        for e in &g.edges {
            let syndrome: Vec<usize> = if e.b == g.boundary() { vec![e.a] } else { vec![e.a, e.b] };
            assert_eq!(d.decode(&syndrome).unwrap().predicted_observables, e.observables);
        }
    }

    #[test]
    fn decode_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let defects = place_defects(5, 1, PlacementMode::Grid).unwrap();
        let noisy = build_fbs_circuit(5, &defects, 1, NoiseParams { p_depol: 0.01, p_reset: 0.005, p_meas: 0.02 }, ScheduleMode::Standard, FbsOptions::default()).unwrap();
        let graphs = [fbs5(), extract_decoding_graph(&noisy).unwrap(), {
            let c = build_bacon_shor_circuit(3, 2, NoiseParams { p_depol: 0.02, p_reset: 0.0, p_meas: 0.01 }).unwrap();
            extract_decoding_graph(&c).unwrap()
        }];
        for g in &graphs {
            let d = Decoder::new(g).unwrap();
            let nodes: Vec<usize> = (0..g.num_detectors).collect();
            for _ in 0..200 {
                let k = rng.gen_range(0..=8.min(g.num_detectors));
                let s: Vec<usize> = nodes.choose_multiple(&mut rng, k).copied().collect();
                let a = d.decode(&s).unwrap();
                let b = d.brute_force(&s).unwrap();
                assert_eq!(a.weight_units, b.weight_units, "syndrome {s:?}");
                let mut seen: Vec<usize> = a.pairs.iter().flat_map(|&(x, y)| std::iter::once(x).chain(y)).collect();
                seen.sort_unstable();
                let mut want = s.clone();
                want.sort_unstable();
                assert_eq!(seen, want);
            }
        }
    }

    #[test]
    fn dense_and_lazy_agree() {
        let g = fbs5();
        let dense = Decoder::with_table(&g, true).unwrap();
        let lazy = Decoder::with_table(&g, false).unwrap();
        assert!(dense.is_dense() && !lazy.is_dense());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nodes: Vec<usize> = (0..g.num_detectors).collect();
        for _ in 0..300 {
            let k = rng.gen_range(0..=14);
            let s: Vec<usize> = nodes.choose_multiple(&mut rng, k).copied().collect();
            assert_eq!(dense.decode(&s).unwrap(), lazy.decode(&s).unwrap());
        }
    }

    #[test]
    fn decoding_is_deterministic() {
        let g = fbs5();
        let s: Vec<usize> = (0..g.num_detectors).step_by(3).take(12).collect();
        let a = Decoder::new(&g).unwrap().decode(&s).unwrap();
        let b = Decoder::new(&g).unwrap().decode(&s).unwrap();
        assert_eq!(a, b);
    }
}
