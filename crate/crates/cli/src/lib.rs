//! Batch driver for the nlheat flow library: sectioned key=value configs,
//! a pinned preset catalog, and an experiment runner that writes CSV
//! traces, snapshots and a pass/fail summary.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;

pub use config::{
    list_presets, parse_config, preset, ControlConfig, DiagnosticsConfig, ExperimentConfig,
    FlowConfig, FlowVariant, ForcingKind, GridConfig, InitialConfig, InitialKind, OutputConfig,
    SchemeKind, PRESET_NAMES,
};
pub use runner::{
    build_controls, build_flow, build_grid, forcing_field, initial_field, run_experiment,
    run_trajectory, DiagnosticOutcome, RunSummary, OUT_DIR_ENV,
};
