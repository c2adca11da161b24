//! The period-4 Floquet-Bacon-Shor schedule with gauge defects, its
//! instantaneous stabilizer groups, and dynamical logical operators.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{CheckType, CodeLayout, Edge, PlaquetteCoord};
use crate::pauli::{PauliGroupBasis, PauliString};
use crate::tableau::{RandomStream, StabilizerState};

/// Four plaquettes meeting at one corner:
///
/// ```text
///   A B
///   D C
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DefectSite {
    pub a: PlaquetteCoord,
    pub b: PlaquetteCoord,
    pub c: PlaquetteCoord,
    pub d: PlaquetteCoord,
}

impl DefectSite {
    /// The defect whose lower-left plaquette `D` is `(cx, cy)`.
    pub fn from_corner(cx: usize, cy: usize) -> Self {
        DefectSite {
            a: PlaquetteCoord::xy(cx, cy + 1),
            b: PlaquetteCoord::xy(cx + 1, cy + 1),
            c: PlaquetteCoord::xy(cx + 1, cy),
            d: PlaquetteCoord::xy(cx, cy),
        }
    }

    /// `(cx, cy)`, the coordinates of `D`.
    pub fn corner(&self) -> (usize, usize) {
        (self.d.col, self.d.row)
    }

    /// Left qubit column of plaquette column AD.
    pub fn column_ad(&self) -> usize {
        self.d.col - 1
    }

    /// Left qubit column of plaquette column BC.
    pub fn column_bc(&self) -> usize {
        self.d.col
    }

    /// Lower qubit row of plaquette row AB.
    pub fn row_ab(&self) -> usize {
        self.d.row
    }

    /// Lower qubit row of plaquette row CD.
    pub fn row_cd(&self) -> usize {
        self.d.row - 1
    }

    pub fn edge_ad(&self) -> Edge {
        Edge::xx(self.d.row, self.d.col - 1)
    }

    pub fn edge_bc(&self) -> Edge {
        Edge::xx(self.d.row, self.d.col)
    }

    pub fn edge_ab(&self) -> Edge {
        Edge::zz(self.d.row, self.d.col)
    }

    pub fn edge_cd(&self) -> Edge {
        Edge::zz(self.d.row - 1, self.d.col)
    }

    /// The `(line, edge)` pair of round `r`: the skipped line index and the one
    /// check kept on it.
    pub fn defect_line(&self, r: usize) -> (CheckType, usize, Edge) {
        match r % 4 {
            0 => (CheckType::X, self.column_ad(), self.edge_ad()),
            1 => (CheckType::Z, self.row_ab(), self.edge_ab()),
            2 => (CheckType::X, self.column_bc(), self.edge_bc()),
            _ => (CheckType::Z, self.row_cd(), self.edge_cd()),
        }
    }

    fn fits(&self, layout: &CodeLayout) -> bool {
        let (cx, cy) = self.corner();
        cx >= 1 && cy >= 1 && cx + 1 < layout.cols() && cy + 1 < layout.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PlacementMode {
    /// k = m² defects on a uniform m×m grid (k = 1 is the centre placement).
    #[default]
    Grid,
    /// q² defects one plaquette apart on a lattice of size 3q + 2.
    Dense,
}

fn exact_sqrt(k: usize) -> Option<usize> {
    let m = (k as f64).sqrt().round() as usize;
    (m * m == k).then_some(m)
}

/// Places `k` defects on a `d × d` lattice.
pub fn place_defects(d: usize, k: usize, mode: PlacementMode) -> Result<Vec<DefectSite>> {
    let m = exact_sqrt(k)
        .filter(|&m| m >= 1)
        .ok_or_else(|| Error::arg(format!("defect count {k} is not a positive perfect square")))?;
    let layout = CodeLayout::square(d)?;
    let coords: Vec<usize> = match mode {
        PlacementMode::Grid => (1..=m).map(|j| j * (d - 1) / (m + 1)).collect(),
        PlacementMode::Dense => {
            if d != 3 * m + 2 {
                return Err(Error::arg(format!(
                    "dense placement of {k} defects needs lattice size {}, got {d}",
                    3 * m + 2
                )));
            }
            (0..m).map(|j| 3 * j + 2).collect()
        }
    };
    let rows: Vec<usize> = match mode {
        PlacementMode::Grid => (1..=m).map(|j| (j * (d - 1)).div_ceil(m + 1)).collect(),
        PlacementMode::Dense => coords.clone(),
    };
    for w in coords.windows(2).chain(rows.windows(2)) {
        if w[1] < w[0] + 3 {
            return Err(Error::arg(format!("lattice {d} too small for {k} defects")));
        }
    }
    let mut out = Vec::with_capacity(k);
    for &cy in &rows {
        for &cx in &coords {
            let site = DefectSite::from_corner(cx, cy);
            if !site.fits(&layout) {
                return Err(Error::arg(format!("lattice {d} too small for {k} defects")));
            }
            out.push(site);
        }
    }
    Ok(out)
}

/// One measurement round of a schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSpec {
    pub round_index: usize,
    pub kind: CheckType,
    /// Measured edges in row-major order.
    pub edges: Vec<Edge>,
    /// The single kept check of each defect line this round.
    pub defect_edges: Vec<Edge>,
    pub checks: Vec<PauliString>,
}

/// Round `r` of the Floquet schedule: all checks of the round's type except
/// on the defect lines, where only the defect edge is kept.
pub fn build_round(layout: &CodeLayout, defects: &[DefectSite], r: usize) -> Result<RoundSpec> {
    if r > 3 {
        return Err(Error::arg(format!("round index {r} outside 0..4")));
    }
    let kind = if r % 2 == 0 { CheckType::X } else { CheckType::Z };
    let mut skipped = Vec::new();
    let mut kept = Vec::new();
    for site in defects {
        if !site.fits(layout) {
            return Err(Error::arg(format!("defect at {:?} does not fit the lattice", site.corner())));
        }
        let (_, line, edge) = site.defect_line(r);
        skipped.push(line);
        kept.push(edge);
    }
    let line_of = |e: &Edge| match e.kind {
        CheckType::X => e.col,
        CheckType::Z => e.row,
    };
    let edges: Vec<Edge> = layout
        .edges(kind)
        .into_iter()
        .filter(|e| !skipped.contains(&line_of(e)) || kept.contains(e))
        .collect();
    let checks = edges.iter().map(|e| layout.check(e)).collect::<Result<_>>()?;
    kept.sort();
    kept.dedup();
    Ok(RoundSpec {
        round_index: r,
        kind,
        edges,
        defect_edges: kept,
        checks,
    })
}

/// A periodic schedule on a lattice: Bacon-Shor (period 2) or Floquet-Bacon-Shor (period 4).
#[derive(Clone, Debug)]
pub struct Schedule {
    layout: CodeLayout,
    defects: Vec<DefectSite>,
    rounds: Vec<RoundSpec>,
}

impl Schedule {
    pub fn bacon_shor(layout: CodeLayout) -> Self {
        let rounds = [CheckType::X, CheckType::Z]
            .into_iter()
            .enumerate()
            .map(|(r, kind)| {
                let edges = layout.edges(kind);
                let checks = edges.iter().map(|e| layout.check(e).expect("edge in range")).collect();
                RoundSpec {
                    round_index: r,
                    kind,
                    edges,
                    defect_edges: Vec::new(),
                    checks,
                }
            })
            .collect();
        Schedule {
            layout,
            defects: Vec::new(),
            rounds,
        }
    }

    pub fn floquet(layout: CodeLayout, defects: Vec<DefectSite>) -> Result<Self> {
        if defects.is_empty() {
            return Err(Error::arg("a Floquet schedule needs at least one defect"));
        }
        let rounds = (0..4).map(|r| build_round(&layout, &defects, r)).collect::<Result<_>>()?;
        Ok(Schedule { layout, defects, rounds })
    }

    pub fn layout(&self) -> &CodeLayout {
        &self.layout
    }

    pub fn defects(&self) -> &[DefectSite] {
        &self.defects
    }

    pub fn rounds(&self) -> &[RoundSpec] {
        &self.rounds
    }

    pub fn period(&self) -> usize {
        self.rounds.len()
    }

    pub fn round(&self, r: usize) -> &RoundSpec {
        &self.rounds[r % self.rounds.len()]
    }

    pub fn to_measurement_schedule(&self) -> MeasurementSchedule {
        MeasurementSchedule {
            n: self.layout.num_qubits(),
            rounds: self.rounds.iter().map(|r| r.checks.clone()).collect(),
        }
    }

    /// The same measured groups, generated by virtual operators: each
    /// measured check is replaced by the product of the checks from it to the
    /// far end of its run of consecutive measured checks on the same line
    /// (upward along a column pair for XX, rightward along a row pair for ZZ).
    pub fn to_virtual_measurement_schedule(&self) -> MeasurementSchedule {
        let n = self.layout.num_qubits();
        let rounds = self
            .rounds
            .iter()
            .map(|round| {
                let measured: std::collections::HashSet<Edge> = round.edges.iter().copied().collect();
                let step = |e: Edge| match e.kind {
                    CheckType::X => Edge::xx(e.row + 1, e.col),
                    CheckType::Z => Edge::zz(e.row, e.col + 1),
                };
                round
                    .edges
                    .iter()
                    .map(|&e| {
                        let mut op = PauliString::identity(n);
                        let mut cur = e;
                        while measured.contains(&cur) {
                            op.mul_assign_right(&self.layout.check(&cur).expect("edge in range"));
                            cur = step(cur);
                        }
                        op.unsigned()
                    })
                    .collect()
            })
            .collect();
        MeasurementSchedule { n, rounds }
    }

    pub fn isgs(&self) -> Result<Vec<Isg>> {
        compute_isgs(&self.to_measurement_schedule())
    }
}

/// A lattice-free periodic list of measured operators; the dump format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSchedule {
    pub n: usize,
    pub rounds: Vec<Vec<PauliString>>,
}

impl MeasurementSchedule {
    pub fn period(&self) -> usize {
        self.rounds.len()
    }

    /// `SCHEDULE n=.. period=..`, then `ROUND r` headers each followed by
    /// one Pauli literal per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "SCHEDULE n={} period={}", self.n, self.rounds.len()).unwrap();
        for (r, ops) in self.rounds.iter().enumerate() {
            writeln!(s, "ROUND {r}").unwrap();
            for op in ops {
                writeln!(s, "{op}").unwrap();
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut rounds: Vec<Vec<PauliString>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("SCHEDULE") {
                for kv in rest.split_whitespace() {
                    if let Some(v) = kv.strip_prefix("n=") {
                        n = Some(v.parse::<usize>().map_err(|e| perr(e.to_string()))?);
                    }
                }
            } else if let Some(rest) = line.strip_prefix("ROUND") {
                let r: usize = rest.trim().parse().map_err(|_| perr(format!("bad round header {line:?}")))?;
                if r != rounds.len() {
                    return Err(perr(format!("expected round {}, found {r}", rounds.len())));
                }
                rounds.push(Vec::new());
            } else {
                let op: PauliString = line.parse().map_err(|e: Error| perr(e.to_string()))?;
                let expected = *n.get_or_insert(op.num_qubits());
                if op.num_qubits() != expected {
                    return Err(perr(format!("operator on {} qubits, expected {expected}", op.num_qubits())));
                }
                rounds
                    .last_mut()
                    .ok_or_else(|| perr("operator before first ROUND header".into()))?
                    .push(op);
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "empty schedule".into(),
        })?;
        Ok(MeasurementSchedule { n, rounds })
    }
}

/// The instantaneous stabilizer group after a round, in steady state.
#[derive(Clone, Debug)]
pub struct Isg {
    pub round_index: usize,
    pub basis: PauliGroupBasis,
}

/// Applies one measurement to a stabilizer group given by commuting
/// generators: anticommuting generators are merged into one, which is
/// replaced by `m`. Signs are not tracked.
pub(crate) fn isg_update(group: &mut Vec<PauliString>, basis: &mut Option<PauliGroupBasis>, m: &PauliString) {
    let anti: Vec<usize> = (0..group.len()).filter(|&i| !group[i].commutes_unchecked(m)).collect();
    if let Some((&p, rest)) = anti.split_first() {
        let pivot = group[p].clone();
        for &j in rest {
            group[j].mul_assign_right(&pivot);
        }
        group[p] = m.unsigned();
        *basis = None;
    } else {
        let b = basis.get_or_insert_with(|| PauliGroupBasis::from_generators(m.num_qubits(), group.iter()).expect("sizes agree"));
        if !b.contains(m) {
            group.push(m.unsigned());
            b.push(m.unsigned()).expect("sizes agree");
        }
    }
}

/// The ISGs of a periodic schedule.
///
/// The group is evolved from the trivial group (no initial-state
/// information) for three cycles; the groups after each round of the second
/// cycle are returned once the third cycle is seen to repeat them.
/// Logical operators are therefore never part of an ISG.
pub fn compute_isgs(schedule: &MeasurementSchedule) -> Result<Vec<Isg>> {
    let n = schedule.n;
    let mut group: Vec<PauliString> = Vec::new();
    let mut basis = None;
    let mut cycles: Vec<Vec<PauliGroupBasis>> = Vec::new();
    for _ in 0..3 {
        let mut groups = Vec::new();
        for ops in &schedule.rounds {
            for op in ops {
                if op.num_qubits() != n {
                    return Err(Error::Dimension {
                        left: n,
                        right: op.num_qubits(),
                    });
                }
                isg_update(&mut group, &mut basis, op);
            }
            groups.push(PauliGroupBasis::from_generators(n, &group)?);
        }
        cycles.push(groups);
    }
    for (r, (a, b)) in cycles[1].iter().zip(&cycles[2]).enumerate() {
        if !a.same_group(b) {
            return Err(Error::invariant(format!("ISG of round {r} not periodic by the third cycle")));
        }
    }
    Ok(cycles
        .swap_remove(1)
        .into_iter()
        .enumerate()
        .map(|(round_index, basis)| Isg { round_index, basis })
        .collect())
}

/// Stabilizer groups of the state after each round of the given cycle when
/// running the schedule on `|0…0⟩`. Unlike [`compute_isgs`] these also
/// contain the Z logicals fixed by the preparation.
pub fn prepared_state_groups(schedule: &MeasurementSchedule, cycle: usize) -> Result<Vec<PauliGroupBasis>> {
    let mut state = StabilizerState::reset_all_zero(schedule.n)?;
    let mut rng = RandomStream::new(0, 0);
    let mut out = Vec::new();
    for c in 0..=cycle {
        for ops in &schedule.rounds {
            for op in ops {
                state.measure(op, &mut rng)?;
            }
            if c == cycle {
                out.push(state.stabilizer_group());
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DynamicalLogicalPair {
    pub round_index: usize,
    pub x_op: PauliString,
    pub z_op: PauliString,
    pub defect: DefectSite,
}

struct Virtuals {
    x: [PauliString; 4],
    z: [PauliString; 4],
}

impl Virtuals {
    fn new(layout: &CodeLayout, site: &DefectSite) -> Result<Self> {
        let (mut x, mut z) = (Vec::with_capacity(4), Vec::with_capacity(4));
        for p in [site.a, site.b, site.c, site.d] {
            x.push(layout.virtual_x(p)?);
            z.push(layout.virtual_z(p)?);
        }
        Ok(Virtuals {
            x: x.try_into().expect("four plaquettes"),
            z: z.try_into().expect("four plaquettes"),
        })
    }

    /// Product of the X operators named by `labels` (a subset of "ABCD").
    fn xs(&self, labels: &str) -> PauliString {
        prod(&self.x, labels)
    }

    fn zs(&self, labels: &str) -> PauliString {
        prod(&self.z, labels)
    }
}

fn prod(ops: &[PauliString; 4], labels: &str) -> PauliString {
    let mut out = PauliString::identity(ops[0].num_qubits());
    for c in labels.chars() {
        let i = "ABCD".find(c).expect("label in ABCD");
        out.mul_assign_right(&ops[i]);
    }
    out
}

/// The dynamical logical pair of one defect after round `r`:
/// `(X_A, Z_A Z_D)`, `(X_A X_B, Z_B)`, `(X_B, Z_B Z_C)`, `(X_C X_D, Z_C)`.
pub fn dynamical_logicals(layout: &CodeLayout, defect: &DefectSite, r: usize) -> Result<DynamicalLogicalPair> {
    let v = Virtuals::new(layout, defect)?;
    let (x, z) = match r % 4 {
        0 => ("A", "AD"),
        1 => ("AB", "B"),
        2 => ("B", "BC"),
        _ => ("CD", "C"),
    };
    Ok(DynamicalLogicalPair {
        round_index: r % 4,
        x_op: v.xs(x),
        z_op: v.zs(z),
        defect: *defect,
    })
}

/// The stabilizer multipliers relating consecutive logicals:
/// `s^(r) L^(r) = s^(r-1) L^(r-1)` for both logical types.
#[derive(Clone, Debug)]
pub struct PreservationOperators {
    pub s_x_curr: PauliString,
    pub s_x_prev: PauliString,
    pub s_z_curr: PauliString,
    pub s_z_prev: PauliString,
}

pub fn preservation_operators(layout: &CodeLayout, defect: &DefectSite, r: usize) -> Result<PreservationOperators> {
    let v = Virtuals::new(layout, defect)?;
    let (xc, xp, zc, zp) = match r % 4 {
        0 => ("ADC", "", "", "CDA"),
        1 => ("", "B", "DAB", ""),
        2 => ("A", "", "", "C"),
        _ => ("", "BCD", "B", ""),
    };
    Ok(PreservationOperators {
        s_x_curr: v.xs(xc),
        s_x_prev: v.xs(xp),
        s_z_curr: v.zs(zc),
        s_z_prev: v.zs(zp),
    })
}

#[derive(Clone, Debug)]
pub struct PreservationReport {
    pub round_index: usize,
    pub x_ok: bool,
    pub z_ok: bool,
    /// Phases of the two sides agree exactly (reported, not required).
    pub x_phase_equal: bool,
    pub z_phase_equal: bool,
    /// Human-readable description of every failed condition.
    pub failures: Vec<String>,
}

/// Checks `s_b · o_b == s_a · o_a` up to phase with `s_a ∈ isg_a`, `s_b ∈ isg_b`.
/// Returns `(ok, phase_equal, failures)`.
pub fn preserves_logical(
    s_a: &PauliString,
    o_a: &PauliString,
    isg_a: &PauliGroupBasis,
    s_b: &PauliString,
    o_b: &PauliString,
    isg_b: &PauliGroupBasis,
) -> (bool, bool, Vec<String>) {
    let lhs = s_b * o_b;
    let rhs = s_a * o_a;
    let mut failures = Vec::new();
    if !lhs.same_up_to_phase(&rhs) {
        failures.push(format!("s·O differs: {lhs} vs {rhs}"));
    }
    if !isg_a.contains(s_a) {
        failures.push(format!("{s_a} not in earlier ISG"));
    }
    if !isg_b.contains(s_b) {
        failures.push(format!("{s_b} not in later ISG"));
    }
    (failures.is_empty(), lhs.phase() == rhs.phase(), failures)
}

/// Verifies that logical information of `defect` survives the step from
/// round `r - 1` into round `r`.
pub fn check_preservation(layout: &CodeLayout, defect: &DefectSite, r: usize, isgs: &[Isg]) -> Result<PreservationReport> {
    if isgs.len() != 4 {
        return Err(Error::arg("expected the four ISGs of a period-4 schedule"));
    }
    let r = r % 4;
    let prev = (r + 3) % 4;
    let s = preservation_operators(layout, defect, r)?;
    let cur = dynamical_logicals(layout, defect, r)?;
    let old = dynamical_logicals(layout, defect, prev)?;
    let (ga, gb) = (&isgs[prev].basis, &isgs[r].basis);
    let (x_ok, x_phase_equal, mut failures) = preserves_logical(&s.s_x_prev, &old.x_op, ga, &s.s_x_curr, &cur.x_op, gb);
    let (z_ok, z_phase_equal, zf) = preserves_logical(&s.s_z_prev, &old.z_op, ga, &s.s_z_curr, &cur.z_op, gb);
    failures.extend(zf);
    Ok(PreservationReport {
        round_index: r,
        x_ok,
        z_ok,
        x_phase_equal,
        z_phase_equal,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fbs(d: usize, k: usize) -> Schedule {
        let layout = CodeLayout::square(d).unwrap();
        Schedule::floquet(layout, place_defects(d, k, PlacementMode::Grid).unwrap()).unwrap()
    }

    #[test]
    fn centre_placement() {
        let s = place_defects(5, 1, PlacementMode::Grid).unwrap()[0];
        assert_eq!((s.a, s.b, s.c, s.d), (
            PlaquetteCoord::xy(2, 3),
            PlaquetteCoord::xy(3, 3),
            PlaquetteCoord::xy(3, 2),
            PlaquetteCoord::xy(2, 2)
        ));
        let s = place_defects(6, 1, PlacementMode::Grid).unwrap()[0];
        assert_eq!((s.a, s.d), (PlaquetteCoord::xy(2, 4), PlaquetteCoord::xy(2, 3)));
        assert_eq!(place_defects(3, 1, PlacementMode::Grid).unwrap()[0].corner(), (1, 1));
        assert!(place_defects(5, 2, PlacementMode::Grid).is_err());
        assert!(place_defects(7, 4, PlacementMode::Grid).is_err());
        assert_eq!(place_defects(10, 4, PlacementMode::Grid).unwrap().len(), 4);
    }

    #[test]
    fn dense_placement_leaves_single_plaquette_gaps() {
        for q in 1..=4 {
            let l = 3 * q + 2;
            let sites = place_defects(l, q * q, PlacementMode::Dense).unwrap();
            assert_eq!(sites.len(), q * q);
            let mut cols: Vec<usize> = sites.iter().flat_map(|s| [s.a.col, s.b.col]).collect();
            cols.sort();
            cols.dedup();
            // Interior plaquette columns are 1..l-1; defect columns come in
            // pairs separated from each other and the boundary by one column.
            let free: Vec<usize> = (1..l).filter(|c| !cols.contains(c)).collect();
            assert_eq!(free, (0..=q).map(|j| 3 * j + 1).collect::<Vec<_>>());
        }
        assert!(place_defects(9, 4, PlacementMode::Dense).is_err());
    }

    #[test]
    fn round_contents() {
        let s = fbs(5, 1);
        let site = s.defects()[0];
        let r0 = s.round(0);
        assert_eq!(r0.edges.len(), 16);
        assert_eq!(r0.defect_edges, vec![site.edge_ad()]);
        let r1 = s.round(1);
        assert_eq!(r1.kind, CheckType::Z);
        assert!(r1.edges.contains(&site.edge_ab()));
        assert!(!r1.edges.iter().any(|e| e.row == site.row_ab() && *e != site.edge_ab()));
        let mut union: Vec<_> = s.round(0).edges.iter().chain(&s.round(2).edges).copied().collect();
        union.sort();
        union.dedup();
        assert_eq!(union, s.layout().edges(CheckType::X));
        assert!(build_round(s.layout(), s.defects(), 4).is_err());
    }

    #[test]
    fn schedule_dump_round_trips() {
        let m = fbs(4, 1).to_measurement_schedule();
        let text = m.dump();
        assert!(text.starts_with("SCHEDULE n=16 period=4\nROUND 0\n+IXX"));
        assert_eq!(MeasurementSchedule::parse(&text).unwrap(), m);
        assert!(MeasurementSchedule::parse("ROUND 0\n+XQ\n").is_err());
    }

    #[test]
    fn isg_contents_d5() {
        let s = fbs(5, 1);
        let l = *s.layout();
        let site = s.defects()[0];
        let isgs = s.isgs().unwrap();
        let stabs = l.stabilizer_group();
        let prepared = prepared_state_groups(&s.to_measurement_schedule(), 2).unwrap();
        let logical_z = dynamical_logicals(&l, &site, 0).unwrap().z_op;
        for isg in &isgs {
            // One static and one dynamical logical qubit.
            assert_eq!(isg.basis.rank(), 23);
            let r = isg.round_index;
            let mut with_logicals = isg.basis.clone();
            with_logicals.push(l.logical_z()).unwrap();
            with_logicals.push(dynamical_logicals(&l, &site, r).unwrap().z_op).unwrap();
            assert!(with_logicals.same_group(&prepared[r]));
            assert!(!isg.basis.contains(&logical_z) || r != 0);
            assert!(stabs.is_subgroup_of(&isg.basis));
            for op in &s.round(isg.round_index).checks {
                assert!(isg.basis.contains(op));
            }
        }
        let xa = l.virtual_x(site.a).unwrap();
        let xd = l.virtual_x(site.d).unwrap();
        assert!(isgs[0].basis.contains(&(&xa * &xd)));
        assert!(!isgs[0].basis.contains(&xa) && !isgs[0].basis.contains(&xd));
        // Column AD at round 0 holds fixed Z gauge operators except at A and D.
        for y in 1..5 {
            let g = PlaquetteCoord::xy(site.a.col, y);
            let fixed = isgs[0].basis.contains(&l.virtual_z(g).unwrap());
            assert_eq!(fixed, g != site.a && g != site.d, "{g}");
        }
        // Row AB at round 1 holds fixed X gauge operators except at A and B.
        for x in 1..5 {
            let g = PlaquetteCoord::xy(x, site.a.row);
            let fixed = isgs[1].basis.contains(&l.virtual_x(g).unwrap());
            assert_eq!(fixed, g != site.a && g != site.b, "{g}");
        }
    }

    #[test]
    fn no_same_type_fixing_in_defect_lines() {
        for d in [5, 6] {
            let s = fbs(d, 1);
            let l = *s.layout();
            let site = s.defects()[0];
            let isgs = s.isgs().unwrap();
            for (r, isg) in isgs.iter().enumerate() {
                for y in 1..d {
                    for x in 1..d {
                        let g = PlaquetteCoord::xy(x, y);
                        let in_col = match r {
                            0 => x == site.a.col,
                            2 => x == site.b.col,
                            _ => false,
                        };
                        let in_row = match r {
                            1 => y == site.a.row,
                            3 => y == site.d.row,
                            _ => false,
                        };
                        if in_col {
                            assert!(!isg.basis.contains(&l.virtual_x(g).unwrap()), "r={r} X{g}");
                        }
                        if in_row {
                            assert!(!isg.basis.contains(&l.virtual_z(g).unwrap()), "r={r} Z{g}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn steady_state_and_static_logicals() {
        for (d, k) in [(4, 1), (5, 1), (6, 1), (7, 1), (10, 4)] {
            let s = fbs(d, k);
            let isgs = s.isgs().unwrap();
            let (lx, lz) = (s.layout().logical_x(), s.layout().logical_z());
            for isg in &isgs {
                assert!(isg.basis.commutes_with_all(&lx) && isg.basis.commutes_with_all(&lz));
            }
        }
    }

    #[test]
    fn dynamical_pairs_are_logical() {
        let s = fbs(5, 1);
        let isgs = s.isgs().unwrap();
        for r in 0..4 {
            let p = dynamical_logicals(s.layout(), &s.defects()[0], r).unwrap();
            assert!(!p.x_op.commutes(&p.z_op).unwrap());
            assert!(isgs[r].basis.commutes_with_all(&p.x_op));
            assert!(isgs[r].basis.commutes_with_all(&p.z_op));
            assert!(!isgs[r].basis.contains(&p.x_op) && !isgs[r].basis.contains(&p.z_op));
        }
    }

    #[test]
    fn table_identities_hold() {
        for d in [5, 7] {
            let s = fbs(d, 1);
            let isgs = s.isgs().unwrap();
            for r in 0..4 {
                let rep = check_preservation(s.layout(), &s.defects()[0], r, &isgs).unwrap();
                assert!(rep.x_ok && rep.z_ok, "d={d} r={r}: {:?}", rep.failures);
            }
        }
    }

    #[test]
    fn three_qubit_repetition_switch() {
        let p = |s: &str| s.parse::<PauliString>().unwrap();
        let s0 = PauliGroupBasis::from_generators(3, &[p("+ZZI"), p("+IZZ")]).unwrap();
        let s1 = PauliGroupBasis::from_generators(3, &[p("+XXI"), p("+IXX")]).unwrap();
        let id = PauliString::identity(3);
        for o in [p("+XXX"), p("+ZZZ")] {
            let (ok, phase, _) = preserves_logical(&id, &o, &s0, &id, &o, &s1);
            assert!(ok && phase);
        }
    }

    #[test]
    fn bacon_shor_period_two() {
        let s = Schedule::bacon_shor(CodeLayout::square(3).unwrap());
        assert_eq!(s.period(), 2);
        let isgs = s.isgs().unwrap();
        assert_eq!(isgs.len(), 2);
        assert!(isgs[0].basis.contains(&s.layout().row_pair_z(0)));
    }
}
