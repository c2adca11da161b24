pub mod bits;
mod blossom;
pub mod circuit;
pub mod dem;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod matching;
pub mod pauli;
pub mod schedule;
pub mod tableau;

pub use bits::BitVec;
pub use circuit::{
    build_bacon_shor_circuit, build_fbs_circuit, DetectorDef, DetectorKind, FbsOptions, Instruction, NoiseParams,
    ObservableDef, ObservableLabel, ScheduleMode, ScheduledCircuit,
};
pub use dem::{error_sensitivity, extract_decoding_graph, DecodingGraph, Effect, GraphEdge, Mechanism, SamplingModel, Shot};
pub use distance::{brute_force_distance, graphlike_distance, isg_and_subsystem_distance, unmasked_distance, unmasked_sets, DistanceMethod, DistanceReport, UnmaskedSets, Witness};
pub use error::{Error, Result};
pub use experiment::{
    csv_row, kdn_ratio, preset, run_shots, CodeKind, Experiment, ExperimentConfig, Normalization, PresetName, RateEstimate,
    CSV_HEADER,
};
pub use lattice::{CheckType, CodeLayout, CodeParameters, Edge, PlaquetteCoord};
pub use matching::{brute_force_match, decode, precompute_paths, Decoder, MatchingResult, PathTable};
pub use pauli::{Membership, Pauli, PauliGroupBasis, PauliString};
pub use schedule::{place_defects, DefectSite, MeasurementSchedule, PlacementMode, Schedule};
pub use tableau::{RandomStream, StabilizerState};
