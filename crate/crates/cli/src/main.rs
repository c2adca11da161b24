mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use fbs_core::experiment::{csv_row, kdn_ratio, preset, CodeKind, Experiment, ExperimentConfig, PresetName, CSV_HEADER};
use fbs_core::schedule::check_preservation;
use fbs_core::{
    brute_force_distance, extract_decoding_graph, graphlike_distance, isg_and_subsystem_distance, place_defects,
    unmasked_distance, CodeLayout, Error, NoiseParams, Schedule,
};

#[derive(Parser)]
#[command(name = "fbs", version, about = "Floquet-Bacon-Shor code experiments")]
struct Cli {
    /// Worker threads for sampling and searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the compiled circuit with its detectors and observables.
    Build {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a code distance.
    Distance {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = Method::Graphlike)]
        method: Method,
        /// Round the unmasked replay starts from.
        #[arg(long, default_value_t = 0)]
        start_round: usize,
    },
    /// Sample one configuration and write a CSV row.
    Sample {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named sweep.
    Preset {
        name: String,
        /// Multiplier on the desk shot and error caps.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a rate-vs-d (or distance-vs-d) plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Verify that every defect's logical pair is carried across each round.
    PreserveCheck {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Graphlike,
    Brute,
    Isg,
    Subsystem,
    Unmasked,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    /// Number of gauge defects.
    #[arg(long)]
    k: Option<usize>,
    /// Dense family: q² defects on a (3q+2)-lattice.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    placement: Option<String>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    p_depol: Option<f64>,
    #[arg(long)]
    p_reset: Option<f64>,
    #[arg(long)]
    p_meas: Option<f64>,
    /// standard, repeated_rounds (R = d) or repeated_rounds:R
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<f64>,
    #[arg(long)]
    max_errors: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    skip_final_cd_detector: bool,
    /// cycle or round
    #[arg(long)]
    normalization: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        // Order matters: `q` sets `d`, and a bare repeated mode reads `d`.
        let pairs = [
            ("code", self.code.clone()),
            ("d", self.d.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("q", self.q.map(|v| v.to_string())),
            ("placement", self.placement.clone()),
            ("cycles", self.cycles.map(|v| v.to_string())),
            ("p-depol", self.p_depol.map(|v| v.to_string())),
            ("p-reset", self.p_reset.map(|v| v.to_string())),
            ("p-meas", self.p_meas.map(|v| v.to_string())),
            ("mode", self.mode.clone()),
            ("shots", self.shots.map(|v| v.to_string())),
            ("max-errors", self.max_errors.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("normalization", self.normalization.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        if self.skip_final_cd_detector {
            config.skip_final_cd_detector = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
            }
            fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))
        }
    }
}

fn schedule_of(config: &ExperimentConfig) -> Result<Schedule, Error> {
    let layout = CodeLayout::square(config.d)?;
    match config.code {
        CodeKind::BaconShor => Ok(Schedule::bacon_shor(layout)),
        CodeKind::FloquetBaconShor => Schedule::floquet(layout, place_defects(config.d, config.defects, config.placement)?),
    }
}

fn distance(config: &ExperimentConfig, method: Method, start_round: usize) -> Result<String, Error> {
    let label = config.label();
    // Graph-based distances only see faults with nonzero probability.
    let mut config = config.clone();
    if config.noise == NoiseParams::default() {
        config.noise = NoiseParams::code_capacity(1e-3);
    }
    let config = &config;
    let lines = match method {
        Method::Graphlike => {
            let graph = extract_decoding_graph(&config.build_circuit()?)?;
            vec![graphlike_distance(&graph).to_string()]
        }
        Method::Brute => vec![brute_force_distance(&config.build_circuit()?)?.to_string()],
        Method::Isg | Method::Subsystem => {
            let a = isg_and_subsystem_distance(&schedule_of(config)?.to_measurement_schedule())?;
            match method {
                Method::Isg => vec![format!("{} round={}", a.isg, a.isg_round)],
                _ => vec![format!("{} round={}", a.subsystem, a.subsystem_round)],
            }
        }
        Method::Unmasked => {
            let schedule = schedule_of(config)?.to_virtual_measurement_schedule();
            let (sets, report) = unmasked_distance(&schedule, start_round, None)?;
            vec![format!(
                "{report} unmasked_rank={} gauge_terms={}",
                sets.unmasked_stabilizers().rank(),
                sets.p_tilde.len() + sets.destabilizers.len() + sets.u_tilde.rank()
            )]
        }
    };
    Ok(lines.iter().map(|l| format!("{label} {l}\n")).collect())
}

fn sample(config: &ExperimentConfig) -> Result<String, Error> {
    let rate = Experiment::new(config)?.run()?;
    Ok(format!("{CSV_HEADER}\n{}\n", csv_row(config, &rate)))
}

const DISTANCE_HEADER: &str = "config_id,code,d,k,n,distance,exact,kdn";

fn run_preset(name: &str, scale: f64, seed: Option<u64>, out: Option<&Path>, svg_out: Option<&Path>) -> Result<(), Error> {
    let name: PresetName = name.parse()?;
    let mut configs = preset(name, scale)?;
    if let Some(s) = seed {
        configs.iter_mut().for_each(|c| c.seed = s);
    }
    let mut text = String::new();
    let mut series: Vec<svg::Series> = Vec::new();
    let mut add_point = |key: String, x: f64, y: f64| match series.iter_mut().find(|s| s.label == key) {
        Some(s) => s.points.push((x, y)),
        None => series.push(svg::Series {
            label: key,
            points: vec![(x, y)],
        }),
    };
    if name.is_distance_sweep() {
        text.push_str(DISTANCE_HEADER);
        text.push('\n');
        for c in &configs {
            let graph = extract_decoding_graph(&c.build_circuit()?)?;
            let report = graphlike_distance(&graph);
            let dist = report.value.map_or("inf".to_string(), |v| v.to_string());
            let kdn = match name {
                PresetName::Fig8 => {
                    let q = ((c.d - 2) / 3) as u64;
                    let measured = report.value.map(|v| Ratio::new(((c.defects + 1) * v) as u64, (c.d * c.d) as u64));
                    if measured != Some(kdn_ratio(q)?) {
                        return Err(Error::Invariant(format!("{}: distance {dist}, expected 4", c.label())));
                    }
                    measured.map_or(String::new(), |r| r.to_string())
                }
                _ => String::new(),
            };
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.label(),
                c.code,
                c.d,
                c.k_column(),
                c.d * c.d,
                dist,
                report.exact,
                kdn
            ));
            if let Some(v) = report.value {
                add_point(c.code.to_string(), c.d as f64, v as f64);
            }
        }
    } else {
        text.push_str(CSV_HEADER);
        text.push('\n');
        for c in &configs {
            let rate = Experiment::new(c)?.run()?;
            eprintln!("{}: {} errors in {} shots", c.label(), rate.logical_errors, rate.shots_used);
            text.push_str(&csv_row(c, &rate));
            text.push('\n');
            if rate.logical_errors > 0 {
                let key = format!("{} {}", c.code, fbs_core::experiment::format_mode(c.mode).split(':').next().unwrap_or(""));
                add_point(key, c.d as f64, rate.reported());
            }
        }
    }
    emit(out, &text)?;
    if let Some(path) = svg_out {
        let (ylabel, log_y) = if name.is_distance_sweep() {
            ("graphlike distance", false)
        } else {
            ("logical error rate", true)
        };
        let plot = svg::line_plot(&format!("{name}"), "d", ylabel, log_y, &series);
        emit(Some(path), &plot)?;
    }
    Ok(())
}

fn preserve_check(d: usize, k: usize) -> Result<String, Error> {
    let layout = CodeLayout::square(d)?;
    let defects = place_defects(d, k, Default::default())?;
    let schedule = Schedule::floquet(layout.clone(), defects.clone())?;
    let isgs = schedule.isgs()?;
    let mut text = String::new();
    let mut failed = Vec::new();
    for (i, defect) in defects.iter().enumerate() {
        for r in 0..4 {
            let rep = check_preservation(&layout, defect, r, &isgs)?;
            text.push_str(&format!("defect={i} round={r} x={} z={}\n", ok(rep.x_ok), ok(rep.z_ok)));
            for f in &rep.failures {
                failed.push(format!("defect {i} round {r}: {f}"));
            }
        }
    }
    if !failed.is_empty() {
        print!("{text}");
        return Err(Error::Invariant(failed.join("; ")));
    }
    Ok(text)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Build { config, out } => emit(out.as_deref(), &config.resolve()?.build_circuit()?.dump()),
        Command::Distance {
            config,
            method,
            start_round,
        } => emit(None, &distance(&config.resolve()?, method, start_round)?),
        Command::Sample { config, out } => emit(out.as_deref(), &sample(&config.resolve()?)?),
        Command::Preset {
            name,
            scale,
            seed,
            out,
            svg,
        } => run_preset(&name, scale, seed, out.as_deref(), svg.as_deref()),
        Command::PreserveCheck { d, k } => emit(None, &preserve_check(d, k)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant_violation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
