//! Error propagation through a [`ScheduledCircuit`]: sensitivity of
//! detectors and observables to single faults, decoding-graph extraction,
//! a fast fault sampler and a reference tableau simulation.
//!
//! Every circuit here is Clifford-free apart from Pauli measurements, so a
//! Pauli fault on qubit `q` flips exactly those later records whose operator
//! anticommutes with it on `q`.

use std::collections::HashMap;

use crate::circuit::{Instruction, ScheduledCircuit};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::tableau::{RandomStream, StabilizerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    /// Pauli fault on `qubit` at noise instruction `instruction`.
    Pauli { instruction: usize, qubit: usize, pauli: Pauli },
    /// Classical flip of a measurement record.
    MeasurementFlip { record: usize },
}

impl std::fmt::Display for Mechanism {
    /// `pauli:<instruction>:<qubit>:<P>` or `flip:<record>`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mechanism::Pauli { instruction, qubit, pauli } => write!(f, "pauli:{instruction}:{qubit}:{}", pauli.to_char()),
            Mechanism::MeasurementFlip { record } => write!(f, "flip:{record}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Effect {
    /// Flipped detectors, sorted.
    pub detectors: Vec<usize>,
    /// Flipped observables as a bit mask.
    pub observables: u64,
}

impl Effect {
    pub fn is_trivial(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }

    pub fn xor(&self, other: &Effect) -> Effect {
        let mut detectors = Vec::with_capacity(self.detectors.len() + other.detectors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.detectors, &other.detectors);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                detectors.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                detectors.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        Effect {
            detectors,
            observables: self.observables ^ other.observables,
        }
    }
}

fn anticommute(a: Pauli, b: Pauli) -> bool {
    a != Pauli::I && b != Pauli::I && a != b
}

/// Precomputed record/detector incidence for fast sensitivity queries.
#[derive(Clone, Debug)]
pub struct CircuitIndex {
    num_detectors: usize,
    num_observables: usize,
    offsets: Vec<usize>,
    /// Records after which propagation stops (next reset), per instruction.
    horizon: Vec<usize>,
    per_qubit: Vec<Vec<(usize, Pauli)>>,
    record_detectors: Vec<Vec<usize>>,
    record_observables: Vec<u64>,
}

impl CircuitIndex {
    pub fn new(circuit: &ScheduledCircuit) -> Self {
        let n = circuit.num_qubits();
        let offsets = circuit.record_offsets();
        let insts = circuit.instructions();
        let mut horizon = vec![circuit.num_measurements(); insts.len()];
        let mut next = circuit.num_measurements();
        for i in (0..insts.len()).rev() {
            horizon[i] = next;
            if insts[i] == Instruction::Reset {
                next = offsets[i];
            }
        }
        let mut per_qubit = vec![Vec::new(); n];
        for (i, inst) in insts.iter().enumerate() {
            match inst {
                Instruction::Measure { op, .. } => {
                    for q in op.support() {
                        per_qubit[q].push((offsets[i], op.get(q)));
                    }
                }
                Instruction::ReadoutZ { .. } => {
                    for (q, list) in per_qubit.iter_mut().enumerate() {
                        list.push((offsets[i] + q, Pauli::Z));
                    }
                }
                _ => {}
            }
        }
        let mut record_detectors = vec![Vec::new(); circuit.num_measurements()];
        for d in circuit.detectors() {
            for &m in &d.measurements {
                record_detectors[m].push(d.id);
            }
        }
        let mut record_observables = vec![0u64; circuit.num_measurements()];
        for o in circuit.observables() {
            for &m in &o.measurements {
                record_observables[m] ^= 1 << o.id;
            }
        }
        CircuitIndex {
            num_detectors: circuit.detectors().len(),
            num_observables: circuit.observables().len(),
            offsets,
            horizon,
            per_qubit,
            record_detectors,
            record_observables,
        }
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    /// Records flipped by a mechanism.
    pub fn flipped_records(&self, m: &Mechanism) -> Vec<usize> {
        match *m {
            Mechanism::MeasurementFlip { record } => vec![record],
            Mechanism::Pauli {
                instruction,
                qubit,
                pauli,
            } => {
                let (start, stop) = (self.offsets[instruction + 1], self.horizon[instruction]);
                self.per_qubit[qubit]
                    .iter()
                    .filter(|&&(r, p)| r >= start && r < stop && anticommute(pauli, p))
                    .map(|&(r, _)| r)
                    .collect()
            }
        }
    }

    pub fn effect_of_records(&self, records: &[usize]) -> Effect {
        let mut dets: Vec<usize> = Vec::new();
        let mut obs = 0u64;
        for &r in records {
            dets.extend_from_slice(&self.record_detectors[r]);
            obs ^= self.record_observables[r];
        }
        dets.sort_unstable();
        let mut out: Vec<usize> = Vec::with_capacity(dets.len());
        for d in dets {
            if out.last() == Some(&d) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        Effect {
            detectors: out,
            observables: obs,
        }
    }

    pub fn effect(&self, m: &Mechanism) -> Effect {
        self.effect_of_records(&self.flipped_records(m))
    }
}

/// Detectors and observables flipped by one fault.
pub fn error_sensitivity(circuit: &ScheduledCircuit, m: &Mechanism) -> Result<Effect> {
    validate_mechanism(circuit, m)?;
    Ok(CircuitIndex::new(circuit).effect(m))
}

fn validate_mechanism(circuit: &ScheduledCircuit, m: &Mechanism) -> Result<()> {
    match *m {
        Mechanism::MeasurementFlip { record } if record < circuit.num_measurements() => Ok(()),
        Mechanism::Pauli {
            instruction,
            qubit,
            pauli,
        } if pauli != Pauli::I => match circuit.instructions().get(instruction) {
            Some(Instruction::Bitflip { qubits, .. }) | Some(Instruction::Depolarize { qubits, .. })
                if qubits.contains(&qubit) =>
            {
                Ok(())
            }
            _ => Err(Error::arg(format!("{m:?} is not at a noise site"))),
        },
        _ => Err(Error::arg(format!("invalid mechanism {m:?}"))),
    }
}

/// Probability of each of X, Y, Z as independent channels that together
/// reproduce a single-qubit depolarizing channel of strength `p`.
pub fn depolarize_component_probability(p: f64) -> f64 {
    (1.0 - (1.0 - 4.0 * p / 3.0).max(0.0).sqrt()) / 2.0
}

/// Combined probability of an odd number of independent events.
pub fn xor_probability(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// All elementary fault mechanisms of a circuit with their independent
/// probabilities. Depolarizing sites contribute X, Y and Z.
pub fn mechanisms(circuit: &ScheduledCircuit) -> Vec<(Mechanism, f64)> {
    let n = circuit.num_qubits();
    let offsets = circuit.record_offsets();
    let mut out = Vec::new();
    for (i, inst) in circuit.instructions().iter().enumerate() {
        match inst {
            Instruction::Bitflip { p, qubits } => {
                for &q in qubits {
                    out.push((Mechanism::Pauli { instruction: i, qubit: q, pauli: Pauli::X }, *p));
                }
            }
            Instruction::Depolarize { p, qubits } => {
                let pc = depolarize_component_probability(*p);
                for &q in qubits {
                    for pauli in Pauli::NON_IDENTITY {
                        out.push((Mechanism::Pauli { instruction: i, qubit: q, pauli }, pc));
                    }
                }
            }
            Instruction::Measure { p, .. } => out.push((Mechanism::MeasurementFlip { record: offsets[i] }, *p)),
            Instruction::ReadoutZ { p } => {
                for q in 0..n {
                    out.push((Mechanism::MeasurementFlip { record: offsets[i] + q }, *p));
                }
            }
            Instruction::Reset => {}
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    /// Second endpoint; equal to the graph's boundary node for boundary edges.
    pub b: usize,
    pub probability: f64,
    pub observables: u64,
    /// Number of merged mechanism components.
    pub multiplicity: usize,
    /// One mechanism producing this edge.
    pub representative: Mechanism,
}

/// Matching graph: detector nodes `0..num_detectors` plus one boundary node.
#[derive(Clone, Debug)]
pub struct DecodingGraph {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub edges: Vec<GraphEdge>,
    /// Faults (or Y composites) that flip an observable and no detector.
    pub undetectable: Vec<(Mechanism, u64)>,
}

impl DecodingGraph {
    pub fn boundary(&self) -> usize {
        self.num_detectors
    }

    pub fn num_nodes(&self) -> usize {
        self.num_detectors + 1
    }
}

/// Builds the graph from all mechanisms with nonzero probability. Y faults
/// are split into their X and Z parts; each part must flip at most two
/// detectors, otherwise a `Hypergraph` error is returned.
pub fn extract_decoding_graph(circuit: &ScheduledCircuit) -> Result<DecodingGraph> {
    let index = CircuitIndex::new(circuit);
    let boundary = index.num_detectors();
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut keys: HashMap<(usize, usize, u64), usize> = HashMap::new();
    let mut undetectable = Vec::new();

    let mut add = |m: Mechanism, e: &Effect, p: f64, edges: &mut Vec<GraphEdge>| -> Result<()> {
        let (a, b) = match e.detectors.as_slice() {
            [] => return Ok(()),
            [a] => (*a, boundary),
            [a, b] => (*a, *b),
            more => {
                return Err(Error::Hypergraph {
                    count: more.len(),
                    mechanism: format!("{m:?}"),
                })
            }
        };
        match keys.get(&(a, b, e.observables)) {
            Some(&i) => {
                let edge = &mut edges[i];
                edge.probability = xor_probability(edge.probability, p);
                edge.multiplicity += 1;
            }
            None => {
                keys.insert((a, b, e.observables), edges.len());
                edges.push(GraphEdge {
                    a,
                    b,
                    probability: p,
                    observables: e.observables,
                    multiplicity: 1,
                    representative: m,
                });
            }
        }
        Ok(())
    };

    for (m, p) in mechanisms(circuit) {
        if p <= 0.0 {
            continue;
        }
        let e = index.effect(&m);
        if e.detectors.is_empty() && e.observables != 0 {
            undetectable.push((m, e.observables));
        }
        match m {
            Mechanism::Pauli {
                instruction,
                qubit,
                pauli: Pauli::Y,
            } => {
                for part in [Pauli::X, Pauli::Z] {
                    let pm = Mechanism::Pauli {
                        instruction,
                        qubit,
                        pauli: part,
                    };
                    add(pm, &index.effect(&pm), p, &mut edges)?;
                }
            }
            _ => add(m, &e, p, &mut edges)?,
        }
    }
    Ok(DecodingGraph {
        num_detectors: boundary,
        num_observables: index.num_observables(),
        edges,
        undetectable,
    })
}

/// One sampled shot: fired detectors (sorted) and flipped observables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Shot {
    pub detectors: Vec<usize>,
    pub observables: u64,
}

#[derive(Clone, Debug)]
enum Channel {
    /// Per site: X and Z effect ids; Y applies both.
    Depolarize { p: f64, sites: Vec<(u32, u32)> },
    Flip { p: f64, sites: Vec<u32> },
}

/// Precompiled fault sampler. Faults are drawn per channel with geometric
/// skipping and their precomputed effects XOR-ed together.
#[derive(Clone, Debug)]
pub struct SamplingModel {
    num_detectors: usize,
    num_observables: usize,
    channels: Vec<Channel>,
    effect_start: Vec<u32>,
    effect_dets: Vec<u32>,
    effect_obs: Vec<u64>,
}

impl SamplingModel {
    pub fn new(circuit: &ScheduledCircuit) -> Self {
        let index = CircuitIndex::new(circuit);
        let offsets = circuit.record_offsets();
        let mut model = SamplingModel {
            num_detectors: index.num_detectors(),
            num_observables: index.num_observables(),
            channels: Vec::new(),
            effect_start: vec![0],
            effect_dets: Vec::new(),
            effect_obs: Vec::new(),
        };
        let push = |model: &mut SamplingModel, e: Effect| -> u32 {
            model.effect_dets.extend(e.detectors.iter().map(|&d| d as u32));
            model.effect_start.push(model.effect_dets.len() as u32);
            model.effect_obs.push(e.observables);
            (model.effect_obs.len() - 1) as u32
        };
        for (i, inst) in circuit.instructions().iter().enumerate() {
            match inst {
                Instruction::Depolarize { p, qubits } if *p > 0.0 => {
                    let mut sites = Vec::new();
                    for &q in qubits {
                        let ex = index.effect(&Mechanism::Pauli { instruction: i, qubit: q, pauli: Pauli::X });
                        let ez = index.effect(&Mechanism::Pauli { instruction: i, qubit: q, pauli: Pauli::Z });
                        sites.push((push(&mut model, ex), push(&mut model, ez)));
                    }
                    model.channels.push(Channel::Depolarize { p: *p, sites });
                }
                Instruction::Bitflip { p, qubits } if *p > 0.0 => {
                    let sites = qubits
                        .iter()
                        .map(|&q| {
                            let e = index.effect(&Mechanism::Pauli { instruction: i, qubit: q, pauli: Pauli::X });
                            push(&mut model, e)
                        })
                        .collect();
                    model.channels.push(Channel::Flip { p: *p, sites });
                }
                Instruction::Measure { p, .. } if *p > 0.0 => {
                    let e = index.effect(&Mechanism::MeasurementFlip { record: offsets[i] });
                    let id = push(&mut model, e);
                    model.channels.push(Channel::Flip { p: *p, sites: vec![id] });
                }
                Instruction::ReadoutZ { p } if *p > 0.0 => {
                    let sites = (0..circuit.num_qubits())
                        .map(|q| {
                            let e = index.effect(&Mechanism::MeasurementFlip { record: offsets[i] + q });
                            push(&mut model, e)
                        })
                        .collect();
                    model.channels.push(Channel::Flip { p: *p, sites });
                }
                _ => {}
            }
        }
        model.merge_measurement_channels();
        model
    }

    /// Consecutive single-record flip channels with equal probability are
    /// merged so geometric skipping spans a whole round.
    fn merge_measurement_channels(&mut self) {
        let mut out: Vec<Channel> = Vec::with_capacity(self.channels.len());
        for ch in self.channels.drain(..) {
            if let (Some(Channel::Flip { p: lp, sites: ls }), Channel::Flip { p, sites }) = (out.last_mut(), &ch) {
                if *lp == *p {
                    ls.extend_from_slice(sites);
                    continue;
                }
            }
            out.push(ch);
        }
        self.channels = out;
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    fn apply(&self, id: u32, flips: &mut [bool], obs: &mut u64) {
        let (s, e) = (self.effect_start[id as usize], self.effect_start[id as usize + 1]);
        for &d in &self.effect_dets[s as usize..e as usize] {
            flips[d as usize] ^= true;
        }
        *obs ^= self.effect_obs[id as usize];
    }

    /// Samples one shot. `scratch` must have length `num_detectors` and be
    /// all false; it is left all false.
    pub fn sample_into(&self, rng: &mut RandomStream, scratch: &mut [bool], shot: &mut Shot) {
        shot.detectors.clear();
        let mut obs = 0u64;
        let mut touched: Vec<u32> = Vec::new();
        for ch in &self.channels {
            let (p, len) = match ch {
                Channel::Depolarize { p, sites } => (*p, sites.len()),
                Channel::Flip { p, sites } => (*p, sites.len()),
            };
            let mut i = next_hit(rng, p, 0);
            while i < len {
                match ch {
                    Channel::Depolarize { sites, .. } => {
                        let (x, z) = sites[i];
                        match rng.below(3) {
                            0 => touched.push(x),
                            1 => touched.push(z),
                            _ => {
                                touched.push(x);
                                touched.push(z);
                            }
                        }
                    }
                    Channel::Flip { sites, .. } => touched.push(sites[i]),
                }
                i = next_hit(rng, p, i + 1);
            }
        }
        for &id in &touched {
            self.apply(id, scratch, &mut obs);
        }
        for &id in &touched {
            let (s, e) = (self.effect_start[id as usize], self.effect_start[id as usize + 1]);
            for &d in &self.effect_dets[s as usize..e as usize] {
                if scratch[d as usize] {
                    scratch[d as usize] = false;
                    shot.detectors.push(d as usize);
                }
            }
        }
        shot.detectors.sort_unstable();
        shot.observables = obs;
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Shot {
        let mut scratch = vec![false; self.num_detectors];
        let mut shot = Shot::default();
        self.sample_into(rng, &mut scratch, &mut shot);
        shot
    }
}

/// Index of the next fired site at or after `from` for i.i.d. probability `p`.
fn next_hit(rng: &mut RandomStream, p: f64, from: usize) -> usize {
    if p >= 1.0 {
        return from;
    }
    let u = 1.0 - rng.uniform();
    let skip = (u.ln() / (1.0 - p).ln()).floor();
    if skip >= (usize::MAX / 2) as f64 {
        usize::MAX / 2
    } else {
        from + skip as usize
    }
}

/// Runs the circuit on a stabilizer tableau and returns every record bit.
/// With `noisy` the instruction channels are sampled; `injected` faults are
/// applied in addition, at their sites.
pub fn simulate_tableau(
    circuit: &ScheduledCircuit,
    rng: &mut RandomStream,
    noisy: bool,
    injected: &[Mechanism],
) -> Result<Vec<bool>> {
    for m in injected {
        validate_mechanism(circuit, m)?;
    }
    let n = circuit.num_qubits();
    let offsets = circuit.record_offsets();
    let mut state = StabilizerState::reset_all_zero(n)?;
    let mut bits = Vec::with_capacity(circuit.num_measurements());
    let flip_at = |rec: usize| {
        injected
            .iter()
            .filter(|m| **m == Mechanism::MeasurementFlip { record: rec })
            .count()
            % 2
            == 1
    };
    for (i, inst) in circuit.instructions().iter().enumerate() {
        match inst {
            Instruction::Reset => state = StabilizerState::reset_all_zero(n)?,
            Instruction::Bitflip { p, qubits } | Instruction::Depolarize { p, qubits } => {
                if noisy {
                    for &q in qubits {
                        if matches!(inst, Instruction::Bitflip { .. }) {
                            state.apply_bitflip(q, *p, rng)?;
                        } else {
                            state.apply_depolarizing(q, *p, rng)?;
                        }
                    }
                }
                for m in injected {
                    if let Mechanism::Pauli {
                        instruction,
                        qubit,
                        pauli,
                    } = *m
                    {
                        if instruction == i {
                            state.apply_pauli(&PauliString::single(n, qubit, pauli))?;
                        }
                    }
                }
            }
            Instruction::Measure { p, op } => {
                let mut b = state.measure(op, rng)?.bit();
                b ^= noisy && rng.uniform() < *p;
                b ^= flip_at(offsets[i]);
                bits.push(b);
            }
            Instruction::ReadoutZ { p } => {
                for q in 0..n {
                    let mut b = state.measure(&PauliString::z_on(n, [q]), rng)?.bit();
                    b ^= noisy && rng.uniform() < *p;
                    b ^= flip_at(offsets[i] + q);
                    bits.push(b);
                }
            }
        }
    }
    Ok(bits)
}
