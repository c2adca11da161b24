//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails or overruns its budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use fbs_core::circuit::record_edges;
use fbs_core::dem::{mechanisms, CircuitIndex};
use fbs_core::experiment::{kdn_ratio, preset, run_shots, CodeKind, ExperimentConfig, PresetName, RateEstimate};
use fbs_core::matching::edge_weight;
use fbs_core::schedule::{check_preservation, compute_isgs, prepared_state_groups, preserves_logical};
use fbs_core::*;
use num_rational::Ratio;

type Outcome = std::result::Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fbs_circuit(d: usize, defects: usize, cycles: usize, noise: NoiseParams, skip: bool) -> ScheduledCircuit {
    let sites = place_defects(d, defects, PlacementMode::Grid).unwrap();
    build_fbs_circuit(d, &sites, cycles, noise, ScheduleMode::Standard, FbsOptions { skip_final_cd_detector: skip }).unwrap()
}

fn fbs_schedule(d: usize) -> Schedule {
    Schedule::floquet(CodeLayout::square(d).unwrap(), place_defects(d, 1, PlacementMode::Grid).unwrap()).unwrap()
}

fn graphlike(c: &ScheduledCircuit) -> Option<usize> {
    graphlike_distance(&extract_decoding_graph(c).unwrap()).value
}

fn structure_suite() -> Outcome {
    let mut count = 0;
    for rows in 2..=7 {
        for cols in 2..=7 {
            let l = CodeLayout::new(rows, cols).unwrap();
            let (g, s) = (l.gauge_group(), l.stabilizer_group());
            let n = rows * cols;
            ensure!(g.rank() == rows * (cols - 1) + cols * (rows - 1), "{rows}x{cols}: gauge rank {}", g.rank());
            ensure!(s.rank() == (rows - 1) + (cols - 1), "{rows}x{cols}: stabilizer rank {}", s.rank());
            ensure!(g.center().same_group(&s), "{rows}x{cols}: center differs from stabilizers");
            let gauge_qubits = (g.rank() - s.rank()) / 2;
            ensure!(gauge_qubits == (rows - 1) * (cols - 1), "{rows}x{cols}: g = {gauge_qubits}");
            let k = n - s.rank() - gauge_qubits;
            ensure!(k == 1, "{rows}x{cols}: k = {k}");
            let p = l.code_parameters();
            ensure!((p.n, p.k, p.g, p.s) == (n, k, gauge_qubits, s.rank()), "{rows}x{cols}: reported {p:?}");
            count += 1;
        }
    }
    Ok(format!("{count} lattices"))
}

fn canonical_commutation() -> Outcome {
    for d in [3, 5] {
        let l = CodeLayout::square(d).unwrap();
        let ps: Vec<_> = l.plaquettes().collect();
        ensure!(ps.len() == d * d, "d={d}: {} virtual pairs", ps.len());
        let xs: Vec<_> = ps.iter().map(|p| l.virtual_x(*p).unwrap()).collect();
        let zs: Vec<_> = ps.iter().map(|p| l.virtual_z(*p).unwrap()).collect();
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                ensure!(xs[i].commutes(&zs[j]).unwrap() == (i != j), "d={d}: X{} vs Z{}", ps[i], ps[j]);
                ensure!(xs[i].commutes(&xs[j]).unwrap() && zs[i].commutes(&zs[j]).unwrap(), "d={d}: same-type pair");
            }
        }
    }
    Ok("9x9 and 25x25 matrices".into())
}

fn isg_steady_state() -> Outcome {
    for d in [4, 5, 6, 7] {
        let s = fbs_schedule(d);
        let m = s.to_measurement_schedule();
        let isgs = compute_isgs(&m).map_err(|e| format!("d={d}: {e}"))?;
        let second = prepared_state_groups(&m, 1).unwrap();
        let third = prepared_state_groups(&m, 2).unwrap();
        for r in 0..4 {
            ensure!(second[r].same_group(&third[r]), "d={d}: round {r} not periodic from cycle 2");
        }
        let site = s.defects()[0];
        let l = s.layout();
        let (xa, xd) = (l.virtual_x(site.a).unwrap(), l.virtual_x(site.d).unwrap());
        ensure!(isgs[0].basis.contains(&(&xa * &xd)), "d={d}: X_A X_D missing from round-0 ISG");
        ensure!(!isgs[0].basis.contains(&xa), "d={d}: X_A in round-0 ISG");
    }
    Ok("d=4..7".into())
}

fn preservation_suite() -> Outcome {
    let mut identities = 0;
    for d in [5, 7] {
        let s = fbs_schedule(d);
        let isgs = s.isgs().unwrap();
        for r in 0..4 {
            let rep = check_preservation(s.layout(), &s.defects()[0], r, &isgs).unwrap();
            ensure!(rep.x_ok && rep.z_ok, "d={d} r={r}: {:?}", rep.failures);
            identities += 2;
        }
    }
    // Code switch between the two 3-qubit repetition codes.
    let p = |s: &str| s.parse::<PauliString>().unwrap();
    let zz = PauliGroupBasis::from_generators(3, &[p("+ZZI"), p("+IZZ")]).unwrap();
    let xx = PauliGroupBasis::from_generators(3, &[p("+XXI"), p("+IXX")]).unwrap();
    let id = PauliString::identity(3);
    let (ok, phase, why) = preserves_logical(&id, &p("+ZZZ"), &zz, &id, &p("+ZZZ"), &xx);
    ensure!(ok && phase, "3-qubit switch: {why:?}");
    for seed in 0..16 {
        let mut rng = RandomStream::new(seed, 0);
        let mut st = StabilizerState::reset_all_zero(3).unwrap();
        st.measure(&p("+XXI"), &mut rng).unwrap();
        st.measure(&p("+IXX"), &mut rng).unwrap();
        let rec = st.measure(&p("+ZZZ"), &mut rng).unwrap();
        ensure!(rec.deterministic && rec.outcome == 1, "seed {seed}: ZZZ not preserved");
    }
    Ok(format!("{identities} identities per lattice pair, 3-qubit switch"))
}

/// Runs the circuit's measurements on a tableau through layer `last`,
/// forcing outcomes when `forced` is given.
fn run_layers(
    circuit: &ScheduledCircuit,
    last: usize,
    inject: Option<(usize, &PauliString)>,
    forced: Option<&[i8]>,
    outcomes: &mut Vec<i8>,
    snapshot_after: usize,
) -> (StabilizerState, StabilizerState) {
    let n = circuit.num_qubits();
    let mut st = StabilizerState::reset_all_zero(n).unwrap();
    let mut rng = RandomStream::new(3, 0);
    let mut layer = 0usize;
    let mut snapshot = None;
    for inst in circuit.instructions() {
        match inst {
            Instruction::Depolarize { .. } => {
                if layer == snapshot_after + 1 {
                    snapshot = Some(st.clone());
                }
                if layer == last + 1 {
                    break;
                }
                if let Some((at, e)) = inject {
                    if at == layer {
                        st.apply_pauli(e).unwrap();
                    }
                }
                layer += 1;
            }
            Instruction::Measure { op, .. } => {
                let i = outcomes.len();
                let rec = match forced {
                    Some(f) => st.measure_forced(op, f[i]).unwrap(),
                    None => st.measure(op, &mut rng).unwrap(),
                };
                outcomes.push(rec.outcome);
            }
            _ => {}
        }
    }
    (snapshot.expect("snapshot layer reached"), st)
}

fn same_state(a: &StabilizerState, b: &StabilizerState) -> bool {
    a.stabilizers().iter().all(|g| b.peek(g).unwrap() == Some(1))
}

fn self_correction() -> Outcome {
    let d = 5;
    let layout = CodeLayout::square(d).unwrap();
    let site = place_defects(d, 1, PlacementMode::Grid).unwrap()[0];
    let circuit = fbs_circuit(d, 1, 3, NoiseParams::code_capacity(0.01), false);
    // XX on the top edge of cell A, i.e. X_A X_A' with A' the cell above A.
    let (row, col) = (site.a.row, site.a.col);
    let err = PauliString::x_on(d * d, [layout.qubit(row, col - 1), layout.qubit(row, col)]);
    let a_up = PlaquetteCoord { row: row + 1, col };
    ensure!(err == &layout.virtual_x(site.a).unwrap() * &layout.virtual_x(a_up).unwrap(), "error is not X_A X_A'");

    // Error before round 1 of the second cycle (layer 5); compare after round 2 (layer 6).
    let (inject_layer, end_layer) = (5, 6);
    let mut noisy_out = Vec::new();
    let (noisy_r1, noisy_r2) = run_layers(&circuit, end_layer, Some((inject_layer, &err)), None, &mut noisy_out, 5);
    let ops: Vec<&PauliString> = circuit
        .instructions()
        .iter()
        .filter_map(|i| match i {
            Instruction::Measure { op, .. } => Some(op),
            _ => None,
        })
        .collect();
    let rounds = circuit.record_rounds();
    // The clean run sees the same outcomes with the error's frame flips removed.
    let forced: Vec<i8> = noisy_out
        .iter()
        .enumerate()
        .map(|(i, &o)| if rounds[i] >= inject_layer && !err.commutes_unchecked(ops[i]) { -o } else { o })
        .collect();
    let mut clean_out = Vec::new();
    let (clean_r1, clean_r2) = run_layers(&circuit, end_layer, None, Some(&forced), &mut clean_out, 5);
    ensure!(clean_out == forced, "clean run could not follow the forced outcomes");
    ensure!(!same_state(&noisy_r1, &clean_r1), "error invisible after round 1");
    ensure!(same_state(&noisy_r2, &clean_r2), "states differ after round 2");

    // Detector view: the two transient Z stabilizers of row A'B' either side
    // of the wall flip; the Z_A Z_B defect-edge record flips with the
    // dynamical observable it feeds.
    let index = CircuitIndex::new(&circuit);
    let depol = circuit
        .instructions()
        .iter()
        .enumerate()
        .filter(|(_, i)| matches!(i, Instruction::Depolarize { .. }))
        .nth(inject_layer)
        .unwrap()
        .0;
    let mut effect = Effect::default();
    for q in [layout.qubit(row, col - 1), layout.qubit(row, col)] {
        effect = effect.xor(&index.effect(&Mechanism::Pauli { instruction: depol, qubit: q, pauli: Pauli::X }));
    }
    ensure!(effect.detectors.len() == 2, "flipped detectors {:?}", effect.detectors);
    let edges = record_edges(&circuit, &layout);
    let za_up = layout.virtual_z(a_up).unwrap();
    let mut expected = vec![&za_up * &layout.row_pair_z(row), za_up];
    for &det in &effect.detectors {
        let def = &circuit.detectors()[det];
        ensure!(def.kind == DetectorKind::Temporary, "detector {det} is {:?}", def.kind);
        let mut op = PauliString::identity(d * d);
        for &m in def.measurements.iter().filter(|&&m| rounds[m] == inject_layer) {
            op.mul_assign_right(&layout.check(&edges[&m]).unwrap());
        }
        let hit = expected.iter().position(|e| e.same_up_to_phase(&op));
        ensure!(hit.is_some(), "detector {det} measures {op}");
        expected.remove(hit.unwrap());
    }
    let za_zb = &layout.virtual_z(site.a).unwrap() * &layout.virtual_z(site.b).unwrap();
    let tracker = (0..rounds.len())
        .find(|&m| rounds[m] == inject_layer && edges.get(&m).is_some_and(|e| layout.check(e).unwrap().same_up_to_phase(&za_zb)));
    ensure!(tracker.is_some(), "Z_A Z_B not measured in round 1");
    let tracker = tracker.unwrap();
    ensure!(!err.commutes_unchecked(ops[tracker]), "Z_A Z_B record not flipped");
    let obs = circuit.observables().iter().find(|o| o.measurements.contains(&tracker));
    ensure!(obs.is_some_and(|o| effect.observables == 1 << o.id), "observable flips {:b}", effect.observables);
    Ok("2 transient detectors, state restored".into())
}

fn distance_bacon_shor() -> Outcome {
    for d in [3, 5, 7, 9] {
        let c = build_bacon_shor_circuit(d, 3, NoiseParams::code_capacity(0.01)).unwrap();
        let got = graphlike(&c);
        ensure!(got == Some(d), "d={d}: {got:?}");
    }
    Ok("d in {3,5,7,9}".into())
}

fn distance_fbs() -> Outcome {
    for d in 3..=10 {
        let want = if d % 2 == 1 { d - 1 } else { d - 2 };
        let got = graphlike(&fbs_circuit(d, 1, 3, NoiseParams::code_capacity(0.01), false));
        ensure!(got == Some(want), "d={d}: {got:?}, expected {want}");
    }
    for d in [5, 7, 9] {
        let got = graphlike(&fbs_circuit(d, 1, 3, NoiseParams::code_capacity(0.01), true));
        ensure!(got == Some((d - 1) / 2), "skip d={d}: {got:?}");
    }
    Ok("d=3..10, skip d in {5,7,9}".into())
}

/// Minimum matching weight by Floyd-Warshall paths (never through the
/// boundary) and a subset recursion over the defects.
fn reference_matching_weight(graph: &DecodingGraph, syndrome: &[usize]) -> i64 {
    const INF: i64 = i64::MAX / 4;
    let n = graph.num_nodes();
    let b = graph.boundary();
    let mut dist = vec![vec![INF; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in &graph.edges {
        let w = edge_weight(e.probability).unwrap();
        dist[e.a][e.b] = dist[e.a][e.b].min(w);
        dist[e.b][e.a] = dist[e.b][e.a].min(w);
    }
    for k in 0..n {
        if k == b {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k].saturating_add(dist[k][j]);
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    let k = syndrome.len();
    let mut best = vec![INF; 1 << k];
    best[0] = 0;
    for mask in 1usize..1 << k {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut v = dist[syndrome[i]][b].saturating_add(best[rest]);
        for j in i + 1..k {
            if rest >> j & 1 == 1 {
                v = v.min(dist[syndrome[i]][syndrome[j]].saturating_add(best[rest & !(1 << j)]));
            }
        }
        best[mask] = v;
    }
    best[(1 << k) - 1]
}

fn oracle_equivalence() -> Outcome {
    let noise = NoiseParams::code_capacity(0.01);
    let bs = build_bacon_shor_circuit(3, 2, noise).unwrap();
    let fbs = fbs_circuit(3, 1, 2, noise, false);
    for (name, c) in [("bs3", &bs), ("fbs3", &fbs)] {
        let brute = brute_force_distance(c).unwrap().value;
        let graph = graphlike(c);
        ensure!(brute == graph && brute.is_some(), "{name}: brute {brute:?} vs graphlike {graph:?}");
    }
    let noisy = NoiseParams { p_depol: 0.01, p_reset: 0.005, p_meas: 0.02 };
    let graphs = [
        extract_decoding_graph(&bs).unwrap(),
        extract_decoding_graph(&fbs).unwrap(),
        extract_decoding_graph(&fbs_circuit(5, 1, 1, noisy, false)).unwrap(),
    ];
    let mut rng = RandomStream::new(2024, 0);
    for (gi, g) in graphs.iter().enumerate() {
        let decoder = Decoder::new(g).unwrap();
        for t in 0..200 {
            let k = rng.below(9.min(g.num_detectors) + 1);
            let mut s: Vec<usize> = Vec::new();
            while s.len() < k {
                let v = rng.below(g.num_detectors);
                if !s.contains(&v) {
                    s.push(v);
                }
            }
            let fast = decoder.decode(&s).unwrap().weight_units;
            let brute = decoder.brute_force(&s).unwrap().weight_units;
            let reference = reference_matching_weight(g, &s);
            ensure!(fast == brute && fast == reference, "graph {gi} trial {t} {s:?}: {fast} / {brute} / {reference}");
        }
    }
    Ok("distances 3 and 2, 600 syndromes".into())
}

fn kdn_saturation() -> Outcome {
    let configs = preset(PresetName::Fig8, 1.0).unwrap();
    let mut prev = Ratio::new(0u64, 1);
    let limit = Ratio::new(4u64, 9);
    let mut values = Vec::new();
    for (c, q) in configs.iter().zip(2u64..) {
        ensure!(c.d == (3 * q + 2) as usize && c.defects == (q * q) as usize, "fig8 config {q}: d={} k={}", c.d, c.defects);
        let dist = graphlike(&c.build_circuit().unwrap());
        ensure!(dist == Some(4), "q={q}: distance {dist:?}");
        let measured = Ratio::new((c.defects as u64 + 1) * 4, (c.d * c.d) as u64);
        let formula = kdn_ratio(q).unwrap();
        ensure!(measured == formula, "q={q}: {measured} vs {formula}");
        ensure!(measured > prev && measured < limit, "q={q}: {measured} not monotone toward 4/9");
        prev = measured;
        values.push(measured.to_string());
    }
    Ok(format!("kd/n = {}", values.join(", ")))
}

/// Minimum weight over the centralizer of `u` outside `g`, by listing all
/// 4^n Pauli operators.
fn enumerate_min_weight(n: usize, u: &PauliGroupBasis, g: &PauliGroupBasis) -> Option<usize> {
    let mut best: Option<usize> = None;
    for code in 1u64..1 << (2 * n) {
        let x = BitVec::from_indices(n, (0..n).filter(|&q| code >> q & 1 == 1));
        let z = BitVec::from_indices(n, (0..n).filter(|&q| code >> (n + q) & 1 == 1));
        let p = PauliString::hermitian(x, z);
        let w = p.weight();
        if best.is_some_and(|b| w >= b) {
            continue;
        }
        if u.commutes_with_all(&p) && !g.contains(&p) {
            best = Some(w);
        }
    }
    best
}

fn unmasked() -> Outcome {
    let sched7 = fbs_schedule(7).to_virtual_measurement_schedule();
    let (sets, r) = unmasked_distance(&sched7, 0, None).unwrap();
    ensure!(r.value == Some(6) && r.exact, "7x7: {r}");
    let mut permanent = CodeLayout::square(7).unwrap().stabilizer_group();
    for isg in compute_isgs(&sched7).unwrap() {
        permanent = permanent.intersection(&isg.basis).unwrap();
    }
    ensure!(sets.c_after_round3.same_group(&permanent), "C after round 3 is not the permanent stabilizer group");
    ensure!(sets.c_after_round3.rank() == 12, "C rank {}", sets.c_after_round3.rank());

    let (sets3, r3) = unmasked_distance(&fbs_schedule(3).to_virtual_measurement_schedule(), 0, None).unwrap();
    let brute = enumerate_min_weight(9, sets3.unmasked_stabilizers(), &sets3.gauge_group().unwrap());
    ensure!(brute == r3.value, "3x3: search {:?} vs enumeration {brute:?}", r3.value);
    Ok(format!("7x7 = 6, 3x3 = {}", brute.map_or("inf".into(), |v| v.to_string())))
}

fn rate(code: CodeKind, d: usize) -> RateEstimate {
    let c = ExperimentConfig {
        code,
        d,
        cycles: fbs_core::experiment::FIG6_CYCLES,
        noise: NoiseParams::code_capacity(5e-3),
        shots_max: 100_000,
        errors_max: 0,
        seed: 20_240_601 + d as u64,
        ..Default::default()
    };
    run_shots(&c).unwrap()
}

fn monte_carlo_trend() -> Outcome {
    let mut notes = Vec::new();
    for code in [CodeKind::BaconShor, CodeKind::FloquetBaconShor] {
        let (r5, r9) = (rate(code, 5), rate(code, 9));
        notes.push(format!("{code} d5 {:.2e} d9 {:.2e}", r5.per_cycle, r9.per_cycle));
        ensure!(r9.per_cycle < r5.per_cycle, "{code}: d=9 rate {} not below d=5 rate {}", r9.per_cycle, r5.per_cycle);
    }
    let (bs, fbs) = (rate(CodeKind::BaconShor, 17), rate(CodeKind::FloquetBaconShor, 17));
    let (bs_lo, bs_hi) = bs.ci99();
    let (fbs_lo, fbs_hi) = fbs.ci99();
    let overlap = fbs_lo <= bs_hi && bs_lo <= fbs_hi;
    notes.push(format!(
        "d17 bs {:.2e}±{:.1e} fbs {:.2e}±{:.1e}",
        bs.per_cycle, bs.ci99_halfwidth, fbs.per_cycle, fbs.ci99_halfwidth
    ));
    ensure!(fbs.per_cycle <= bs.per_cycle || overlap, "d=17: fbs above bs without CI overlap: {}", notes.join("; "));
    Ok(notes.join("; "))
}

fn graphlike_guarantee() -> Outcome {
    let cc = NoiseParams::code_capacity(0.01);
    let full = NoiseParams { p_depol: 0.01, p_reset: 0.01, p_meas: 0.01 };
    let mut circuits: Vec<(String, ScheduledCircuit)> = Vec::new();
    for d in [3, 5, 7, 9] {
        circuits.push((format!("bs{d}"), build_bacon_shor_circuit(d, 3, cc).unwrap()));
    }
    circuits.push(("bs5-meas".into(), build_bacon_shor_circuit(5, 3, full).unwrap()));
    for d in 3..=10 {
        circuits.push((format!("fbs{d}"), fbs_circuit(d, 1, 3, cc, false)));
    }
    for d in [5, 7, 9] {
        circuits.push((format!("fbs{d}-skip"), fbs_circuit(d, 1, 3, cc, true)));
    }
    for c in preset(PresetName::Fig8, 1.0).unwrap() {
        circuits.push((c.id.clone(), c.build_circuit().unwrap()));
    }
    let sites = place_defects(5, 1, PlacementMode::Grid).unwrap();
    circuits.push(("fbs5-repeated".into(), build_fbs_circuit(5, &sites, 1, cc, ScheduleMode::RepeatedRounds(3), FbsOptions::default()).unwrap()));
    let mut swept = 0usize;
    for (name, c) in &circuits {
        let index = CircuitIndex::new(c);
        for (m, _) in mechanisms(c).into_iter().filter(|(_, p)| *p > 0.0) {
            let e = index.effect(&m);
            let component = !matches!(m, Mechanism::Pauli { pauli: Pauli::Y, .. });
            ensure!(!component || e.detectors.len() <= 2, "{name}: {m} flips {} detectors", e.detectors.len());
            ensure!(e.observables == 0 || !e.detectors.is_empty(), "{name}: {m} flips an observable silently");
            swept += 1;
        }
    }
    Ok(format!("{} circuits, {swept} mechanisms", circuits.len()))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fbs");
    let run = |threads: &str| {
        let out = Command::new(bin)
            .args(["--threads", threads, "sample", "--code", "fbs", "--d", "5", "--cycles", "3"])
            .args(["--p-depol", "0.01", "--p-meas", "0.002", "--shots", "20000", "--max-errors", "300", "--seed", "99"])
            .output()
            .expect("run fbs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let one = run("1");
    for t in ["4", "8"] {
        ensure!(run(t) == one, "output with {t} threads differs");
    }
    let text = String::from_utf8(one).unwrap();
    Ok(text.lines().nth(1).unwrap_or("").to_string())
}

fn main() {
    let criteria: [(&str, Check, u64); 13] = [
        ("structure suite", structure_suite, 1),
        ("canonical commutation", canonical_commutation, 1),
        ("ISG steady state and content", isg_steady_state, 5),
        ("preservation identities", preservation_suite, 1),
        ("self-correction", self_correction, 1),
        ("Bacon-Shor graphlike distance", distance_bacon_shor, 30),
        ("FBS graphlike distance", distance_fbs, 60),
        ("oracle equivalence", oracle_equivalence, 120),
        ("kd/n saturation", kdn_saturation, 300),
        ("unmasked distance", unmasked, 60),
        ("Monte Carlo trend", monte_carlo_trend, 900),
        ("graphlike guarantee", graphlike_guarantee, 60),
        ("determinism across threads", determinism, 120),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(note) if elapsed > Duration::from_secs(*budget) => Err(format!("over budget ({budget} s): {note}")),
            other => other,
        };
        let (tag, note) = match &outcome {
            Ok(note) => ("PASS", note.clone()),
            Err(why) => {
                failed += 1;
                ("FAIL", why.clone())
            }
        };
        println!("criterion {:>2} {tag} {name} [{:.1} s] {note}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
