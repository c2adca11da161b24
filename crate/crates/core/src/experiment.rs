//! Monte Carlo memory experiments, rate statistics and named sweeps.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::circuit::{build_bacon_shor_circuit, build_fbs_circuit, total_rounds, FbsOptions, NoiseParams, ScheduleMode, ScheduledCircuit};
use crate::dem::{extract_decoding_graph, DecodingGraph, SamplingModel, Shot};
use crate::error::{Error, Result};
use crate::matching::Decoder;
use crate::schedule::{place_defects, PlacementMode};
use crate::tableau::RandomStream;

/// Shots decoded per parallel batch. Early stopping is resolved inside a
/// batch in shot order, so the batch size never changes the result.
const BATCH: usize = 2048;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeKind {
    BaconShor,
    FloquetBaconShor,
}

impl CodeKind {
    pub fn period(self) -> usize {
        match self {
            CodeKind::BaconShor => 2,
            CodeKind::FloquetBaconShor => 4,
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeKind::BaconShor => "bs",
            CodeKind::FloquetBaconShor => "fbs",
        })
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bs" => Ok(CodeKind::BaconShor),
            "fbs" => Ok(CodeKind::FloquetBaconShor),
            _ => Err(Error::arg(format!("unknown code '{s}' (expected bs or fbs)"))),
        }
    }
}

/// Which divisor the reported standard error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    PerCycle,
    PerRound,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::PerCycle => "cycle",
            Normalization::PerRound => "round",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(Normalization::PerCycle),
            "round" => Ok(Normalization::PerRound),
            _ => Err(Error::arg(format!("unknown normalization '{s}' (expected cycle or round)"))),
        }
    }
}

/// Formats a schedule mode the way the CLI and config files spell it.
pub fn format_mode(mode: ScheduleMode) -> String {
    match mode {
        ScheduleMode::Standard => "standard".into(),
        ScheduleMode::RepeatedRounds(r) => format!("repeated_rounds:{r}"),
    }
}

/// Parses `standard`, `repeated_rounds` (R = d) or `repeated_rounds:R`.
pub fn parse_mode(s: &str, d: usize) -> Result<ScheduleMode> {
    match s.split_once(':') {
        None if s == "standard" => Ok(ScheduleMode::Standard),
        None if s == "repeated_rounds" => Ok(ScheduleMode::RepeatedRounds(d)),
        Some(("repeated_rounds", r)) => {
            let r: usize = r.parse().map_err(|_| Error::arg(format!("bad repeat count in mode '{s}'")))?;
            Ok(ScheduleMode::RepeatedRounds(r))
        }
        _ => Err(Error::arg(format!("unknown mode '{s}'"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub code: CodeKind,
    pub d: usize,
    /// Number of gauge defects (FBS only).
    pub defects: usize,
    pub placement: PlacementMode,
    pub cycles: usize,
    pub noise: NoiseParams,
    pub mode: ScheduleMode,
    pub shots_max: u64,
    pub errors_max: u64,
    pub seed: u64,
    pub skip_final_cd_detector: bool,
    pub normalization: Normalization,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: String::new(),
            code: CodeKind::FloquetBaconShor,
            d: 5,
            defects: 1,
            placement: PlacementMode::Grid,
            cycles: 5,
            noise: NoiseParams::default(),
            mode: ScheduleMode::Standard,
            shots_max: 100_000,
            errors_max: 200,
            seed: 0,
            skip_final_cd_detector: false,
            normalization: Normalization::PerCycle,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.shots_max == 0 {
            return Err(Error::arg("shots_max must be at least 1"));
        }
        if self.cycles == 0 {
            return Err(Error::arg("need at least one cycle"));
        }
        if self.code == CodeKind::BaconShor && self.mode != ScheduleMode::Standard {
            return Err(Error::arg("repeated-rounds mode is only defined for fbs"));
        }
        if let ScheduleMode::RepeatedRounds(0) = self.mode {
            return Err(Error::arg("repeated rounds need R >= 1"));
        }
        Ok(())
    }

    /// Label used in CSV rows when `id` is empty.
    pub fn label(&self) -> String {
        if !self.id.is_empty() {
            return self.id.clone();
        }
        format!("{}-d{}-k{}-{}", self.code, self.d, self.k_column(), format_mode(self.mode))
    }

    /// Value printed in the `k` column: defect count for FBS, 0 for BS.
    pub fn k_column(&self) -> usize {
        match self.code {
            CodeKind::BaconShor => 0,
            CodeKind::FloquetBaconShor => self.defects,
        }
    }

    pub fn total_rounds(&self) -> usize {
        total_rounds(self.code.period(), self.cycles, self.mode)
    }

    /// Full measurement cycles in the circuit, counting the plain cycles
    /// that bracket a repeated-rounds block.
    pub fn total_cycles(&self) -> usize {
        self.total_rounds() / self.code.period()
    }

    pub fn build_circuit(&self) -> Result<ScheduledCircuit> {
        self.validate()?;
        match self.code {
            CodeKind::BaconShor => build_bacon_shor_circuit(self.d, self.cycles, self.noise),
            CodeKind::FloquetBaconShor => {
                let defects = place_defects(self.d, self.defects, self.placement)?;
                let options = FbsOptions {
                    skip_final_cd_detector: self.skip_final_cd_detector,
                };
                build_fbs_circuit(self.d, &defects, self.cycles, self.noise, self.mode, options)
            }
        }
    }

    /// Applies one `key=value` setting. Keys mirror the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::arg(format!("bad value '{value}' for {key}")))
        }
        match key {
            "id" => self.id = value.to_string(),
            "code" => self.code = value.parse()?,
            "d" => self.d = num(key, value)?,
            "k" => self.defects = num(key, value)?,
            "q" => {
                let q: usize = num(key, value)?;
                self.defects = q * q;
                self.d = 3 * q + 2;
                self.placement = PlacementMode::Dense;
            }
            "placement" => {
                self.placement = match value {
                    "grid" => PlacementMode::Grid,
                    "dense" => PlacementMode::Dense,
                    _ => return Err(Error::arg(format!("unknown placement '{value}'"))),
                }
            }
            "cycles" => self.cycles = num(key, value)?,
            "p-depol" => self.noise.p_depol = num(key, value)?,
            "p-reset" => self.noise.p_reset = num(key, value)?,
            "p-meas" => self.noise.p_meas = num(key, value)?,
            "mode" => self.mode = parse_mode(value, self.d)?,
            "shots" => self.shots_max = num::<f64>(key, value)? as u64,
            "max-errors" => self.errors_max = num::<f64>(key, value)? as u64,
            "seed" => self.seed = num(key, value)?,
            "skip-final-cd-detector" => self.skip_final_cd_detector = num(key, value)?,
            "normalization" => self.normalization = value.parse()?,
            _ => return Err(Error::arg(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key=value, got '{line}'"),
            })?;
            config.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub p_hat: f64,
    pub per_cycle: f64,
    pub per_round: f64,
    pub stderr: f64,
    pub ci99_halfwidth: f64,
    pub shots_used: u64,
    pub logical_errors: u64,
    pub normalization: Normalization,
}

impl RateEstimate {
    pub fn from_counts(logical_errors: u64, shots: u64, cycles: usize, rounds: usize, normalization: Normalization) -> Self {
        let p_hat = if shots == 0 { 0.0 } else { logical_errors as f64 / shots as f64 };
        let sd = if shots == 0 { 0.0 } else { (p_hat * (1.0 - p_hat) / shots as f64).sqrt() };
        let divisor = match normalization {
            Normalization::PerCycle => cycles,
            Normalization::PerRound => rounds,
        } as f64;
        let stderr = sd / divisor;
        RateEstimate {
            p_hat,
            per_cycle: p_hat / cycles as f64,
            per_round: p_hat / rounds as f64,
            stderr,
            ci99_halfwidth: Z99 * stderr,
            shots_used: shots,
            logical_errors,
            normalization,
        }
    }

    /// The rate matching `normalization`.
    pub fn reported(&self) -> f64 {
        match self.normalization {
            Normalization::PerCycle => self.per_cycle,
            Normalization::PerRound => self.per_round,
        }
    }

    pub fn ci99(&self) -> (f64, f64) {
        let r = self.reported();
        (r - self.ci99_halfwidth, r + self.ci99_halfwidth)
    }
}

/// Circuit, graph, decoder and sampler for one configuration.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub circuit: ScheduledCircuit,
    pub graph: DecodingGraph,
    decoder: Decoder,
    model: SamplingModel,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let circuit = config.build_circuit()?;
        let graph = extract_decoding_graph(&circuit)?;
        let decoder = Decoder::new(&graph)?;
        let model = SamplingModel::new(&circuit);
        Ok(Experiment {
            config: config.clone(),
            circuit,
            graph,
            decoder,
            model,
        })
    }

    /// Samples and decodes shot `index`; true on a logical error.
    pub fn shot_fails(&self, index: u64, scratch: &mut [bool], shot: &mut Shot) -> Result<bool> {
        let mut rng = RandomStream::new(self.config.seed, index);
        self.model.sample_into(&mut rng, scratch, shot);
        let decoded = self.decoder.decode(&shot.detectors)?;
        Ok(decoded.predicted_observables != shot.observables)
    }

    /// Runs shots until `shots_max` shots or `errors_max` logical errors,
    /// whichever comes first. Shot `i` always draws from stream `i` of the
    /// seed and the stop point is found in shot order, so the totals do not
    /// depend on the thread count.
    pub fn run(&self) -> Result<RateEstimate> {
        let c = &self.config;
        let n = self.model.num_detectors();
        let mut shots = 0u64;
        let mut errors = 0u64;
        'outer: while shots < c.shots_max {
            let end = (shots + BATCH as u64).min(c.shots_max);
            let fails: Vec<bool> = (shots..end)
                .into_par_iter()
                .map_init(
                    || (vec![false; n], Shot::default()),
                    |(scratch, shot), i| self.shot_fails(i, scratch, shot),
                )
                .collect::<Result<_>>()?;
            for f in fails {
                shots += 1;
                if f {
                    errors += 1;
                    if c.errors_max > 0 && errors >= c.errors_max {
                        break 'outer;
                    }
                }
            }
        }
        Ok(RateEstimate::from_counts(errors, shots, c.total_cycles(), c.total_rounds(), c.normalization))
    }
}

pub fn run_shots(config: &ExperimentConfig) -> Result<RateEstimate> {
    Experiment::new(config)?.run()
}

pub const CSV_HEADER: &str = "config_id,code,d,k,cycles,p_depol,p_reset,p_meas,mode,shots,logical_errors,p_hat,per_cycle,per_round,stderr,ci99";

/// One CSV row. Floats use the shortest representation that round-trips.
pub fn csv_row(config: &ExperimentConfig, rate: &RateEstimate) -> String {
    format!(
        "{},{},{},{},{},{:?},{:?},{:?},{},{},{},{:?},{:?},{:?},{:?},{:?}",
        config.label(),
        config.code,
        config.d,
        config.k_column(),
        config.cycles,
        config.noise.p_depol,
        config.noise.p_reset,
        config.noise.p_meas,
        format_mode(config.mode),
        rate.shots_used,
        rate.logical_errors,
        rate.p_hat,
        rate.per_cycle,
        rate.per_round,
        rate.stderr,
        rate.ci99_halfwidth,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetName {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig6" => Ok(PresetName::Fig6),
            "fig7" => Ok(PresetName::Fig7),
            "fig8" => Ok(PresetName::Fig8),
            "fig9" => Ok(PresetName::Fig9),
            _ => Err(Error::arg(format!("unknown preset '{s}' (expected fig6, fig7, fig8 or fig9)"))),
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
            PresetName::Fig8 => "fig8",
            PresetName::Fig9 => "fig9",
        })
    }
}

impl PresetName {
    /// Presets whose output is a distance per configuration rather than a
    /// sampled rate.
    pub fn is_distance_sweep(self) -> bool {
        matches!(self, PresetName::Fig7 | PresetName::Fig8)
    }
}

/// Cycles per shot in the code-capacity rate sweep.
pub const FIG6_CYCLES: usize = 10;

/// Sweep definitions. `scale` multiplies the shot and error caps of the
/// desk defaults (100 000 shots, 200 errors).
pub fn preset(name: PresetName, scale: f64) -> Result<Vec<ExperimentConfig>> {
    if !(scale > 0.0) {
        return Err(Error::arg(format!("preset scale must be positive, got {scale}")));
    }
    let shots_max = ((100_000.0 * scale).round() as u64).max(1);
    let errors_max = ((200.0 * scale).round() as u64).max(1);
    let base = ExperimentConfig {
        shots_max,
        errors_max,
        ..Default::default()
    };
    let mut out = Vec::new();
    match name {
        PresetName::Fig6 => {
            for code in [CodeKind::BaconShor, CodeKind::FloquetBaconShor] {
                for d in [5, 9, 13, 17] {
                    out.push(ExperimentConfig {
                        id: format!("fig6-{code}-d{d}"),
                        code,
                        d,
                        cycles: FIG6_CYCLES,
                        noise: NoiseParams::code_capacity(5e-3),
                        ..base.clone()
                    });
                }
            }
        }
        PresetName::Fig7 => {
            for code in [CodeKind::BaconShor, CodeKind::FloquetBaconShor] {
                for d in 3..=10 {
                    out.push(ExperimentConfig {
                        id: format!("fig7-{code}-d{d}"),
                        code,
                        d,
                        cycles: 3,
                        noise: NoiseParams::code_capacity(5e-3),
                        ..base.clone()
                    });
                }
            }
        }
        PresetName::Fig8 => {
            for q in 2..=6 {
                out.push(ExperimentConfig {
                    id: format!("fig8-q{q}"),
                    d: 3 * q + 2,
                    defects: q * q,
                    placement: PlacementMode::Dense,
                    cycles: 3,
                    noise: NoiseParams::code_capacity(5e-3),
                    ..base.clone()
                });
            }
        }
        PresetName::Fig9 => {
            let noise = NoiseParams {
                p_depol: 1e-3,
                p_reset: 1e-3,
                p_meas: 1e-3,
            };
            for d in [3, 5, 7] {
                out.push(ExperimentConfig {
                    id: format!("fig9-d{d}-standard"),
                    d,
                    cycles: d,
                    noise,
                    normalization: Normalization::PerRound,
                    ..base.clone()
                });
                out.push(ExperimentConfig {
                    id: format!("fig9-d{d}-repeated"),
                    d,
                    cycles: 1,
                    noise,
                    mode: ScheduleMode::RepeatedRounds(d),
                    normalization: Normalization::PerRound,
                    ..base.clone()
                });
            }
        }
    }
    Ok(out)
}

/// kd/n for the dense family with lattice size 3q + 2, q² defects and
/// distance 4.
pub fn kdn_ratio(q: u64) -> Result<Ratio<u64>> {
    if q == 0 {
        return Err(Error::arg("q must be at least 1"));
    }
    let side = 3 * q + 2;
    Ok(Ratio::new(4 * (q * q + 1), side * side))
}
