//! Noisy measurement circuits for the Bacon-Shor and Floquet-Bacon-Shor
//! schedules, with detector and logical-observable definitions.
//!
//! Detectors come from one rule applied to *lines*: a column pair for X
//! checks or a row pair for Z checks. When a line is fully measured in a
//! round it is compared with its previous full measurement. The comparison
//! is split into segments at every boundary where the intervening rounds left
//! both orthogonal checks crossing that boundary unmeasured; each segment is
//! a transient stabilizer that survived and yields one detector. Reset in
//! the Z basis acts as a full Z measurement of everything.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::lattice::{CheckType, CodeLayout, Edge};
use crate::pauli::{PauliGroupBasis, PauliString};
use crate::schedule::{preservation_operators, DefectSite, Schedule};

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Reset,
    Bitflip { p: f64, qubits: Vec<usize> },
    Depolarize { p: f64, qubits: Vec<usize> },
    Measure { p: f64, op: PauliString },
    ReadoutZ { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Initial,
    Permanent,
    Temporary,
    Repeat,
    Final,
}

impl DetectorKind {
    fn token(self) -> &'static str {
        match self {
            DetectorKind::Initial => "initial",
            DetectorKind::Permanent => "permanent",
            DetectorKind::Temporary => "temporary",
            DetectorKind::Repeat => "repeat",
            DetectorKind::Final => "final",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        Some(match s {
            "initial" => DetectorKind::Initial,
            "permanent" => DetectorKind::Permanent,
            "temporary" => DetectorKind::Temporary,
            "repeat" => DetectorKind::Repeat,
            "final" => DetectorKind::Final,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectorDef {
    pub id: usize,
    pub kind: DetectorKind,
    pub measurements: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservableLabel {
    StaticZ,
    DynamicalZ(usize),
}

impl fmt::Display for ObservableLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableLabel::StaticZ => write!(f, "static_z"),
            ObservableLabel::DynamicalZ(j) => write!(f, "dynamical_z:{j}"),
        }
    }
}

impl std::str::FromStr for ObservableLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "static_z" {
            return Ok(ObservableLabel::StaticZ);
        }
        s.strip_prefix("dynamical_z:")
            .and_then(|j| j.parse().ok())
            .map(ObservableLabel::DynamicalZ)
            .ok_or_else(|| format!("unknown observable label {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableDef {
    pub id: usize,
    pub label: ObservableLabel,
    pub measurements: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseParams {
    pub p_depol: f64,
    pub p_reset: f64,
    pub p_meas: f64,
}

impl NoiseParams {
    pub fn code_capacity(p: f64) -> Self {
        NoiseParams {
            p_depol: p,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_depol", self.p_depol), ("p_reset", self.p_reset), ("p_meas", self.p_meas)] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::arg(format!("{name} = {p} outside [0, 0.5)")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScheduleMode {
    #[default]
    Standard,
    /// Each round of the middle cycles is measured `R` times in a row,
    /// with one plain cycle before and after.
    RepeatedRounds(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct FbsOptions {
    /// Drop the final detector comparing the last full row-CD measurement
    /// with the readout.
    pub skip_final_cd_detector: bool,
}

/// An instruction list plus detector and observable definitions.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledCircuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    detectors: Vec<DetectorDef>,
    observables: Vec<ObservableDef>,
    num_measurements: usize,
}

fn records_of(inst: &Instruction, n: usize) -> usize {
    match inst {
        Instruction::Measure { .. } => 1,
        Instruction::ReadoutZ { .. } => n,
        _ => 0,
    }
}

impl ScheduledCircuit {
    pub fn new(
        num_qubits: usize,
        instructions: Vec<Instruction>,
        detectors: Vec<DetectorDef>,
        observables: Vec<ObservableDef>,
    ) -> Result<Self> {
        let num_measurements = instructions.iter().map(|i| records_of(i, num_qubits)).sum();
        for inst in &instructions {
            match inst {
                Instruction::Bitflip { p, qubits } | Instruction::Depolarize { p, qubits } => {
                    if !(0.0..=1.0).contains(p) || qubits.iter().any(|&q| q >= num_qubits) {
                        return Err(Error::arg(format!("bad noise instruction {inst:?}")));
                    }
                }
                Instruction::Measure { p, op } => {
                    if op.num_qubits() != num_qubits || !op.is_hermitian() || !(0.0..=1.0).contains(p) {
                        return Err(Error::arg(format!("bad measurement {op}")));
                    }
                }
                Instruction::ReadoutZ { p } => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::arg(format!("bad readout probability {p}")));
                    }
                }
                Instruction::Reset => {}
            }
        }
        for (i, d) in detectors.iter().enumerate() {
            if d.id != i || d.measurements.iter().any(|&m| m >= num_measurements) {
                return Err(Error::arg(format!("detector {} references missing records", d.id)));
            }
        }
        for (i, o) in observables.iter().enumerate() {
            if o.id != i || o.measurements.iter().any(|&m| m >= num_measurements) {
                return Err(Error::arg(format!("observable {} references missing records", o.id)));
            }
        }
        if observables.len() > 64 {
            return Err(Error::TooLarge(format!("{} observables (at most 64)", observables.len())));
        }
        Ok(ScheduledCircuit {
            num_qubits,
            instructions,
            detectors,
            observables,
            num_measurements,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn detectors(&self) -> &[DetectorDef] {
        &self.detectors
    }

    pub fn observables(&self) -> &[ObservableDef] {
        &self.observables
    }

    pub fn num_measurements(&self) -> usize {
        self.num_measurements
    }

    /// Index of the first measurement record produced at or after each instruction.
    pub fn record_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.instructions.len() + 1);
        let mut acc = 0;
        for inst in &self.instructions {
            out.push(acc);
            acc += records_of(inst, self.num_qubits);
        }
        out.push(acc);
        out
    }

    /// For each record, the number of depolarizing layers preceding it minus
    /// one: the measurement round it belongs to (readout is the last value).
    pub fn record_rounds(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_measurements);
        let mut layer = 0usize;
        for inst in &self.instructions {
            match inst {
                Instruction::Depolarize { .. } => layer += 1,
                _ => out.extend(std::iter::repeat_n(layer.saturating_sub(1), records_of(inst, self.num_qubits))),
            }
        }
        out
    }

    /// Detector and observable values for one shot's record bits.
    pub fn evaluate(&self, bits: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let parity = |ms: &[usize]| ms.iter().fold(false, |acc, &m| acc ^ bits[m]);
        (
            self.detectors.iter().map(|d| parity(&d.measurements)).collect(),
            self.observables.iter().map(|o| parity(&o.measurements)).collect(),
        )
    }

    /// Line-oriented text form; see [`ScheduledCircuit::parse`].
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let qubits = |qs: &[usize]| qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        for inst in &self.instructions {
            match inst {
                Instruction::Reset => writeln!(s, "RESET {}", self.num_qubits),
                Instruction::Bitflip { p, qubits: qs } => writeln!(s, "BITFLIP {p:?} {}", qubits(qs)),
                Instruction::Depolarize { p, qubits: qs } => writeln!(s, "DEPOL {p:?} {}", qubits(qs)),
                Instruction::Measure { p, op } => writeln!(s, "MEAS {p:?} {op}"),
                Instruction::ReadoutZ { p } => writeln!(s, "READZ {p:?}"),
            }
            .unwrap();
        }
        for d in &self.detectors {
            write!(s, "DETECTOR {} {}", d.id, d.kind.token()).unwrap();
            for m in &d.measurements {
                write!(s, " {m}").unwrap();
            }
            s.push('\n');
        }
        for o in &self.observables {
            write!(s, "OBSERVABLE {} {}", o.id, o.label).unwrap();
            for m in &o.measurements {
                write!(s, " {m}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut instructions = Vec::new();
        let mut detectors = Vec::new();
        let mut observables = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let mut tok = line.split_whitespace();
            let Some(head) = tok.next() else { continue };
            let rest: Vec<&str> = tok.collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| perr(format!("bad integer {s:?}")));
            let prob = |s: Option<&&str>| {
                s.ok_or_else(|| perr("missing probability".into()))?
                    .parse::<f64>()
                    .map_err(|_| perr("bad probability".into()))
            };
            match head {
                "RESET" => {
                    n = Some(num(rest.first().ok_or_else(|| perr("RESET needs a qubit count".into()))?)?);
                    instructions.push(Instruction::Reset);
                }
                "BITFLIP" | "DEPOL" => {
                    let p = prob(rest.first())?;
                    let qubits = rest[1..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                    instructions.push(if head == "BITFLIP" {
                        Instruction::Bitflip { p, qubits }
                    } else {
                        Instruction::Depolarize { p, qubits }
                    });
                }
                "MEAS" => {
                    let p = prob(rest.first())?;
                    let op: PauliString = rest
                        .get(1)
                        .ok_or_else(|| perr("MEAS needs an operator".into()))?
                        .parse()
                        .map_err(|e: Error| perr(e.to_string()))?;
                    n.get_or_insert(op.num_qubits());
                    instructions.push(Instruction::Measure { p, op });
                }
                "READZ" => instructions.push(Instruction::ReadoutZ { p: prob(rest.first())? }),
                "DETECTOR" => {
                    let id = num(rest.first().ok_or_else(|| perr("missing id".into()))?)?;
                    let kind = rest
                        .get(1)
                        .and_then(|k| DetectorKind::from_token(k))
                        .ok_or_else(|| perr("bad detector kind".into()))?;
                    let measurements = rest[2..].iter().map(|s| num(s)).collect::<Result<_>>()?;
                    detectors.push(DetectorDef { id, kind, measurements });
                }
                "OBSERVABLE" => {
                    let id = num(rest.first().ok_or_else(|| perr("missing id".into()))?)?;
                    let label = rest
                        .get(1)
                        .ok_or_else(|| perr("missing label".into()))?
                        .parse()
                        .map_err(perr)?;
                    let measurements = rest[2..].iter().map(|s| num(s)).collect::<Result<_>>()?;
                    observables.push(ObservableDef { id, label, measurements });
                }
                other => return Err(perr(format!("unknown instruction {other:?}"))),
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "circuit has no RESET line".into(),
        })?;
        ScheduledCircuit::new(n, instructions, detectors, observables)
    }
}

/// XOR-reduces a multiset of record indices to a sorted set.
fn xor_set(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for m in v {
        if out.last() == Some(&m) {
            out.pop();
        } else {
            out.push(m);
        }
    }
    out
}

/// Geometry of the lines of one check type.
#[derive(Clone, Copy)]
struct Lines {
    layout: CodeLayout,
    kind: CheckType,
}

impl Lines {
    fn count(&self) -> usize {
        match self.kind {
            CheckType::X => self.layout.cols() - 1,
            CheckType::Z => self.layout.rows() - 1,
        }
    }

    fn len(&self) -> usize {
        match self.kind {
            CheckType::X => self.layout.rows(),
            CheckType::Z => self.layout.cols(),
        }
    }

    fn edge(&self, line: usize, pos: usize) -> Edge {
        match self.kind {
            CheckType::X => Edge::xx(pos, line),
            CheckType::Z => Edge::zz(line, pos),
        }
    }

    /// The two orthogonal checks crossing boundary `b` (between positions
    /// `b - 1` and `b`) of a line.
    fn blockers(&self, line: usize, b: usize) -> [Edge; 2] {
        match self.kind {
            CheckType::X => [Edge::zz(b - 1, line), Edge::zz(b - 1, line + 1)],
            CheckType::Z => [Edge::xx(line, b - 1), Edge::xx(line + 1, b - 1)],
        }
    }

    fn id(layout: &CodeLayout, e: &Edge) -> usize {
        match e.kind {
            CheckType::X => e.row * (layout.cols() - 1) + e.col,
            CheckType::Z => e.row * layout.cols() + e.col,
        }
    }
}

struct Layer {
    round: usize,
    block: usize,
    kind: CheckType,
    /// Record index of each measured check, by edge id of `kind`.
    rec: Vec<Option<usize>>,
}

impl Layer {
    fn get(&self, layout: &CodeLayout, e: &Edge) -> Option<usize> {
        if e.kind != self.kind {
            return None;
        }
        self.rec[Lines::id(layout, e)]
    }

    fn full(&self, lines: &Lines, line: usize) -> bool {
        lines.kind == self.kind && (0..lines.len()).all(|p| self.get(&lines.layout, &lines.edge(line, p)).is_some())
    }

    fn line_records(&self, lines: &Lines, line: usize, range: std::ops::Range<usize>) -> Vec<usize> {
        range
            .filter_map(|p| self.get(&lines.layout, &lines.edge(line, p)))
            .collect()
    }
}

/// Per-defect observable tracking data.
struct Tracker {
    /// `(s_curr, s_prev)` for each round `r`.
    s: Vec<[PauliString; 2]>,
    final_op: PauliString,
}

struct Compiler<'a> {
    schedule: &'a Schedule,
    layout: CodeLayout,
    noise: NoiseParams,
    skip_long_final: bool,
    instructions: Vec<Instruction>,
    records: usize,
    layers: Vec<Layer>,
    detectors: Vec<(DetectorKind, Vec<usize>)>,
    trackers: Vec<Tracker>,
    observables: Vec<Vec<usize>>,
    round_bases: Vec<PauliGroupBasis>,
}

impl<'a> Compiler<'a> {
    fn new(schedule: &'a Schedule, noise: NoiseParams, skip_long_final: bool, track_defects: bool) -> Result<Self> {
        let layout = *schedule.layout();
        let n = layout.num_qubits();
        let mut round_bases = Vec::new();
        for r in schedule.rounds() {
            let b = PauliGroupBasis::from_generators(n, &r.checks)?;
            if b.rank() != r.checks.len() {
                return Err(Error::invariant(format!("checks of round {} are dependent", r.round_index)));
            }
            round_bases.push(b);
        }
        let mut trackers = Vec::new();
        if track_defects {
            for site in schedule.defects() {
                let mut s = Vec::new();
                for r in 0..4 {
                    let ops = preservation_operators(&layout, site, r)?;
                    s.push([ops.s_z_curr, ops.s_z_prev]);
                }
                trackers.push(Tracker {
                    s,
                    final_op: layout.virtual_z(site.c)?,
                });
            }
        }
        let num_obs = 1 + trackers.len();
        Ok(Compiler {
            schedule,
            layout,
            noise,
            skip_long_final,
            instructions: vec![Instruction::Reset],
            records: 0,
            layers: Vec::new(),
            detectors: Vec::new(),
            trackers,
            observables: vec![Vec::new(); num_obs],
            round_bases,
        })
    }

    fn all_qubits(&self) -> Vec<usize> {
        (0..self.layout.num_qubits()).collect()
    }

    fn emit_reset_noise(&mut self) {
        if self.noise.p_reset > 0.0 {
            let qubits = self.all_qubits();
            self.instructions.push(Instruction::Bitflip {
                p: self.noise.p_reset,
                qubits,
            });
        }
    }

    fn measure_round(&mut self, r: usize, block: usize, first_of_block: bool) -> Result<()> {
        let qubits = self.all_qubits();
        self.instructions.push(Instruction::Depolarize {
            p: self.noise.p_depol,
            qubits,
        });
        let spec = self.schedule.round(r);
        let kind = spec.kind;
        let nedges = self.layout.edges(kind).len();
        let mut rec = vec![None; nedges];
        for (e, op) in spec.edges.iter().zip(&spec.checks) {
            rec[Lines::id(&self.layout, e)] = Some(self.records);
            self.records += 1;
            self.instructions.push(Instruction::Measure {
                p: self.noise.p_meas,
                op: op.clone(),
            });
        }
        self.layers.push(Layer {
            round: spec.round_index,
            block,
            kind,
            rec,
        });
        let idx = self.layers.len() - 1;
        if first_of_block {
            self.block_detectors(idx);
            self.track(idx)?;
        } else {
            self.repeat_detectors(idx);
        }
        Ok(())
    }

    /// Per-check comparison with the previous repetition of the same round.
    fn repeat_detectors(&mut self, idx: usize) {
        let (cur, prev) = (&self.layers[idx], &self.layers[idx - 1]);
        for (a, b) in cur.rec.iter().zip(&prev.rec) {
            if let (Some(a), Some(b)) = (a, b) {
                self.detectors.push((DetectorKind::Repeat, vec![*b, *a]));
            }
        }
    }

    fn block_detectors(&mut self, idx: usize) {
        let layout = self.layout;
        let cur = &self.layers[idx];
        let lines = Lines { layout, kind: cur.kind };
        let prev_same = (0..idx).rev().find(|&j| self.layers[j].kind == cur.kind);
        let start = prev_same.map_or(0, |j| j + 1);
        let between = &self.layers[start..idx];
        let from_reset = prev_same.is_none() && cur.kind == CheckType::Z;
        let mut found = Vec::new();
        for line in 0..lines.count() {
            if !cur.full(&lines, line) {
                continue;
            }
            let prev_full = prev_same.filter(|&j| self.layers[j].full(&lines, line));
            if prev_full.is_some() || from_reset {
                let mut cuts: Vec<usize> = (1..lines.len())
                    .filter(|&b| {
                        lines
                            .blockers(line, b)
                            .iter()
                            .all(|e| !layout.contains_edge(e) || between.iter().all(|l| l.get(&layout, e).is_none()))
                    })
                    .collect();
                cuts.insert(0, 0);
                cuts.push(lines.len());
                let nseg = cuts.len() - 1;
                for w in cuts.windows(2) {
                    let mut ms = cur.line_records(&lines, line, w[0]..w[1]);
                    if let Some(j) = prev_full {
                        ms.extend(self.layers[j].line_records(&lines, line, w[0]..w[1]));
                    }
                    let kind = if prev_full.is_none() {
                        DetectorKind::Initial
                    } else if nseg > 1 {
                        DetectorKind::Temporary
                    } else {
                        DetectorKind::Permanent
                    };
                    found.push((kind, line, xor_set(ms)));
                }
            } else {
                let earlier = (0..idx).rev().find(|&j| self.layers[j].full(&lines, line));
                let mut ms = cur.line_records(&lines, line, 0..lines.len());
                match earlier {
                    Some(j) => {
                        ms.extend(self.layers[j].line_records(&lines, line, 0..lines.len()));
                        ms.extend(self.bridge(&lines, line, Some(j), idx));
                        found.push((DetectorKind::Permanent, line, xor_set(ms)));
                    }
                    None if cur.kind == CheckType::Z => found.push((DetectorKind::Initial, line, xor_set(ms))),
                    None => {}
                }
            }
        }
        // Stable order: kind, then line; segments keep their bottom/left-first order.
        found.sort_by_key(|(kind, line, _)| (*kind, *line));
        self.detectors.extend(found.into_iter().map(|(k, _, ms)| (k, ms)));
    }

    /// Records that make a whole-line comparison between layers `from` and
    /// `to` blind to faults inside repeated blocks that measure part of the
    /// line: those faults are already caught by the per-check repeat
    /// detectors. Adds the first and last repetition of each such block.
    fn bridge(&self, lines: &Lines, line: usize, from: Option<usize>, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut j = from.map_or(0, |f| f + 1);
        while j < to {
            let block = self.layers[j].block;
            let mut k = j;
            while k + 1 < to && self.layers[k + 1].block == block {
                k += 1;
            }
            if k > j && self.layers[j].kind == lines.kind {
                out.extend(self.layers[j].line_records(lines, line, 0..lines.len()));
                out.extend(self.layers[k].line_records(lines, line, 0..lines.len()));
            }
            j = k + 1;
        }
        out
    }

    fn decompose(&self, layer: usize, op: &PauliString) -> Result<Vec<usize>> {
        if op.is_identity() {
            return Ok(Vec::new());
        }
        let l = &self.layers[layer];
        let spec = self.schedule.round(l.round);
        let m = self.round_bases[l.round].membership(op);
        let idx = m
            .decomposition
            .ok_or_else(|| Error::invariant(format!("tracking operator not generated by round {} checks", l.round)))?;
        Ok(idx
            .into_iter()
            .map(|i| l.get(&self.layout, &spec.edges[i]).expect("measured edge"))
            .collect())
    }

    fn track(&mut self, idx: usize) -> Result<()> {
        if idx == 0 || self.trackers.is_empty() {
            return Ok(());
        }
        let r = self.layers[idx].round;
        for t in 0..self.trackers.len() {
            let [s_curr, s_prev] = self.trackers[t].s[r].clone();
            let mut ms = self.decompose(idx, &s_curr)?;
            ms.extend(self.decompose(idx - 1, &s_prev)?);
            self.observables[t + 1].extend(ms);
        }
        Ok(())
    }

    fn readout(&mut self) -> Result<()> {
        let layout = self.layout;
        let n = layout.num_qubits();
        let qubits = self.all_qubits();
        self.instructions.push(Instruction::Depolarize {
            p: self.noise.p_depol,
            qubits,
        });
        self.instructions.push(Instruction::ReadoutZ { p: self.noise.p_meas });
        let base = self.records;
        self.records += n;
        let bit = |r: usize, c: usize| base + layout.qubit(r, c);

        let last = (0..self.layers.len())
            .rev()
            .find(|&j| self.layers[j].kind == CheckType::Z)
            .ok_or_else(|| Error::invariant("circuit has no Z round before readout"))?;
        let lines = Lines {
            layout,
            kind: CheckType::Z,
        };
        let mut per_check = Vec::new();
        let mut long = Vec::new();
        for line in 0..lines.count() {
            for pos in 0..lines.len() {
                let e = lines.edge(line, pos);
                if let Some(m) = self.layers[last].get(&layout, &e) {
                    let [a, b] = e.endpoints();
                    per_check.push(vec![m, bit(a.0, a.1), bit(b.0, b.1)]);
                }
            }
            if self.layers[last].full(&lines, line) || self.skip_long_final {
                continue;
            }
            // The row pair was last fixed as a whole earlier (or by reset).
            // The detector also absorbs this round's checks on the line so
            // that each readout bit enters at most one final detector per row.
            let full = (0..self.layers.len()).rev().find(|&j| self.layers[j].full(&lines, line));
            let mut ms: Vec<usize> = full
                .map(|j| self.layers[j].line_records(&lines, line, 0..lines.len()))
                .unwrap_or_default();
            ms.extend(self.bridge(&lines, line, full, self.layers.len()));
            let mut covered = vec![false; lines.len()];
            for pos in 0..lines.len() {
                if let Some(m) = self.layers[last].get(&layout, &lines.edge(line, pos)) {
                    ms.push(m);
                    covered[pos] = true;
                }
            }
            for (pos, &cov) in covered.iter().enumerate() {
                if !cov {
                    ms.push(bit(line, pos));
                    ms.push(bit(line + 1, pos));
                }
            }
            long.push(xor_set(ms));
        }
        for ms in per_check.into_iter().chain(long) {
            self.detectors.push((DetectorKind::Final, xor_set(ms)));
        }

        self.observables[0].extend((0..layout.cols()).map(|c| bit(0, c)));
        for t in 0..self.trackers.len() {
            let support: Vec<usize> = self.trackers[t].final_op.z_bits().iter_ones().map(|q| base + q).collect();
            self.observables[t + 1].extend(support);
        }
        Ok(())
    }

    fn finish(self) -> Result<ScheduledCircuit> {
        let n = self.layout.num_qubits();
        let detectors = self
            .detectors
            .into_iter()
            .enumerate()
            .map(|(id, (kind, measurements))| DetectorDef { id, kind, measurements })
            .collect();
        let observables = self
            .observables
            .into_iter()
            .enumerate()
            .map(|(id, ms)| ObservableDef {
                id,
                label: if id == 0 {
                    ObservableLabel::StaticZ
                } else {
                    ObservableLabel::DynamicalZ(id - 1)
                },
                measurements: xor_set(ms),
            })
            .collect();
        ScheduledCircuit::new(n, self.instructions, detectors, observables)
    }
}

/// Compiles a schedule run as a list of `(round, repetitions)` blocks.
fn compile(schedule: &Schedule, blocks: &[(usize, usize)], noise: NoiseParams, skip_long_final: bool) -> Result<ScheduledCircuit> {
    noise.validate()?;
    let track = !schedule.defects().is_empty();
    let mut c = Compiler::new(schedule, noise, skip_long_final, track)?;
    c.emit_reset_noise();
    for (b, &(r, reps)) in blocks.iter().enumerate() {
        for rep in 0..reps {
            c.measure_round(r, b, rep == 0)?;
        }
    }
    c.readout()?;
    c.finish()
}

/// Bacon-Shor memory experiment: `cycles` repetitions of (all XX, all ZZ)
/// between a Z-basis reset and a Z-basis readout.
pub fn build_bacon_shor_circuit(d: usize, cycles: usize, noise: NoiseParams) -> Result<ScheduledCircuit> {
    if cycles == 0 {
        return Err(Error::arg("need at least one cycle"));
    }
    let schedule = Schedule::bacon_shor(CodeLayout::square(d)?);
    let blocks: Vec<_> = (0..cycles).flat_map(|_| [(0, 1), (1, 1)]).collect();
    compile(&schedule, &blocks, noise, false)
}

/// Floquet-Bacon-Shor memory experiment. In standard mode `cycles` full
/// periods are run; in repeated-rounds mode one plain cycle, then `cycles`
/// cycles with every round repeated `R` times, then one plain cycle.
pub fn build_fbs_circuit(
    d: usize,
    defects: &[DefectSite],
    cycles: usize,
    noise: NoiseParams,
    mode: ScheduleMode,
    options: FbsOptions,
) -> Result<ScheduledCircuit> {
    if cycles == 0 {
        return Err(Error::arg("need at least one cycle"));
    }
    let schedule = Schedule::floquet(CodeLayout::square(d)?, defects.to_vec())?;
    let plain = [(0, 1), (1, 1), (2, 1), (3, 1)];
    let blocks: Vec<_> = match mode {
        ScheduleMode::Standard => (0..cycles).flat_map(|_| plain).collect(),
        ScheduleMode::RepeatedRounds(reps) => {
            if reps < 1 {
                return Err(Error::arg("repeated rounds need R >= 1"));
            }
            let mut b = plain.to_vec();
            for _ in 0..cycles {
                b.extend((0..4).map(|r| (r, reps)));
            }
            b.extend(plain);
            b
        }
    };
    compile(&schedule, &blocks, noise, options.skip_final_cd_detector)
}

/// Measurement rounds in a circuit built with these parameters.
pub fn total_rounds(period: usize, cycles: usize, mode: ScheduleMode) -> usize {
    match mode {
        ScheduleMode::Standard => period * cycles,
        ScheduleMode::RepeatedRounds(r) => period * (2 + r * cycles),
    }
}

/// Lookup from record index to the check edge that produced it.
pub fn record_edges(circuit: &ScheduledCircuit, layout: &CodeLayout) -> HashMap<usize, Edge> {
    let mut index = HashMap::new();
    for e in layout.all_edges() {
        index.insert(layout.check(&e).expect("edge in range"), e);
    }
    let mut out = HashMap::new();
    let mut rec = 0;
    for inst in circuit.instructions() {
        match inst {
            Instruction::Measure { op, .. } => {
                if let Some(e) = index.get(&op.unsigned()) {
                    out.insert(rec, *e);
                }
                rec += 1;
            }
            Instruction::ReadoutZ { .. } => rec += circuit.num_qubits(),
            _ => {}
        }
    }
    out
}
