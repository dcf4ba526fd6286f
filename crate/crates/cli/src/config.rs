//! Flat sectioned key=value experiment configs, plus the preset catalog.
//!
//! Grammar: `[section]` headers, `key = value` lines, `#` comments, blank
//! lines ignored. Unknown sections or keys are errors that name the key
//! and line. A serialized config reparses to an identical value.

use nlheat_core::{Error, Result};

const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_N: usize = 128;
const DEFAULT_HARNACK_A: f64 = 2.0;
const DEFAULT_DELTA: f64 = 0.05;
const DEFAULT_T_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowVariant {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    /// A ≡ 0.
    Zero,
    /// A(x) = 1 + cos(2πx/L) along the first axis.
    OnePlusCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// g ≡ const (renormalized to unit norm).
    Constant,
    /// g = 1 + amplitude·sin(2πx/L) (times sin(2πy/L₂) in 2-D).
    PerturbedSin,
    /// g = 1 + amplitude·cos(2πx/L) (times cos(2πy/L₂) in 2-D).
    PerturbedCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Imex,
    Picard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    /// Second-axis points (dim 2 only).
    pub n2: usize,
    pub l: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub variant: FlowVariant,
    /// Power for the nonlinear flow; requires p > 1.
    pub p: f64,
    pub forcing: ForcingKind,
    /// Exponential decay rate of the forcing; 0 means constant in time.
    pub forcing_decay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub preset: InitialKind,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub scheme: SchemeKind,
    pub dt: f64,
    pub t_end: f64,
    /// Picard window length δ.
    pub delta: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub mass_tol: f64,
    pub ledger: bool,
    pub ledger_tol: f64,
    pub harnack: bool,
    pub harnack_a: f64,
    pub harnack_t_floor: f64,
    pub steady: bool,
    pub steady_tol: f64,
    pub steady_tail_tol: f64,
    pub stability: bool,
    /// Amplitude of the partner trajectory's initial perturbation.
    pub stability_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub flow: FlowConfig,
    pub initial: InitialConfig,
    pub controls: ControlConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                dim: 1,
                n: DEFAULT_N,
                n2: DEFAULT_N,
                l: 1.0,
                l2: 1.0,
            },
            flow: FlowConfig {
                variant: FlowVariant::Linear,
                p: 3.0,
                forcing: ForcingKind::Zero,
                forcing_decay: 0.0,
            },
            initial: InitialConfig {
                preset: InitialKind::Constant,
                amplitude: 0.3,
            },
            controls: ControlConfig {
                scheme: SchemeKind::Imex,
                dt: DEFAULT_DT,
                t_end: 1.0,
                delta: DEFAULT_DELTA,
                picard_tol: 1e-8,
                picard_max_iter: 50,
                record_every: 1,
            },
            diagnostics: DiagnosticsConfig {
                mass_tol: 1e-10,
                ledger: false,
                ledger_tol: 1e-3,
                harnack: false,
                harnack_a: DEFAULT_HARNACK_A,
                harnack_t_floor: DEFAULT_T_FLOOR,
                steady: false,
                steady_tol: 1e-3,
                steady_tail_tol: 1e-3,
                stability: false,
                stability_amplitude: 0.1,
            },
            output: OutputConfig {
                dir: "out".to_string(),
                seed: 0,
            },
        }
    }
}

fn config_err(line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: key `{key}`: {msg}"))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| config_err(line, key, format!("expected a number, got `{v}`")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| config_err(line, key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>()
        .map_err(|_| config_err(line, key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(config_err(line, key, format!("expected true or false, got `{v}`"))),
    }
}

impl ExperimentConfig {
    /// Apply one `section.key = value` assignment. `line` is used only for
    /// error messages (pass 0 for programmatic overrides).
    pub fn set(&mut self, dotted_key: &str, value: &str, line: usize) -> Result<()> {
        let (section, key) = dotted_key
            .split_once('.')
            .ok_or_else(|| config_err(line, dotted_key, "expected `section.key`"))?;
        let k = dotted_key;
        match (section, key) {
            ("grid", "dim") => self.grid.dim = parse_usize(line, k, value)?,
            ("grid", "n") => self.grid.n = parse_usize(line, k, value)?,
            ("grid", "n2") => self.grid.n2 = parse_usize(line, k, value)?,
            ("grid", "l") => self.grid.l = parse_f64(line, k, value)?,
            ("grid", "l2") => self.grid.l2 = parse_f64(line, k, value)?,
            ("flow", "variant") => {
                self.flow.variant = match value {
                    "linear" => FlowVariant::Linear,
                    "nonlinear" => FlowVariant::Nonlinear,
                    _ => return Err(config_err(line, k, "expected linear or nonlinear")),
                }
            }
            ("flow", "p") => self.flow.p = parse_f64(line, k, value)?,
            ("flow", "forcing") => {
                self.flow.forcing = match value {
                    "zero" => ForcingKind::Zero,
                    "one_plus_cos" => ForcingKind::OnePlusCos,
                    _ => return Err(config_err(line, k, "expected zero or one_plus_cos")),
                }
            }
            ("flow", "forcing_decay") => self.flow.forcing_decay = parse_f64(line, k, value)?,
            ("initial", "preset") => {
                self.initial.preset = match value {
                    "constant" => InitialKind::Constant,
                    "perturbed_sin" => InitialKind::PerturbedSin,
                    "perturbed_cos" => InitialKind::PerturbedCos,
                    _ => {
                        return Err(config_err(
                            line,
                            k,
                            "expected constant, perturbed_sin or perturbed_cos",
                        ))
                    }
                }
            }
            ("initial", "amplitude") => self.initial.amplitude = parse_f64(line, k, value)?,
            ("controls", "scheme") => {
                self.controls.scheme = match value {
                    "imex" => SchemeKind::Imex,
                    "picard" => SchemeKind::Picard,
                    _ => return Err(config_err(line, k, "expected imex or picard")),
                }
            }
            ("controls", "dt") => self.controls.dt = parse_f64(line, k, value)?,
            ("controls", "t_end") => self.controls.t_end = parse_f64(line, k, value)?,
            ("controls", "delta") => self.controls.delta = parse_f64(line, k, value)?,
            ("controls", "picard_tol") => self.controls.picard_tol = parse_f64(line, k, value)?,
            ("controls", "picard_max_iter") => {
                self.controls.picard_max_iter = parse_usize(line, k, value)?
            }
            ("controls", "record_every") => {
                self.controls.record_every = parse_usize(line, k, value)?
            }
            ("diagnostics", "mass_tol") => self.diagnostics.mass_tol = parse_f64(line, k, value)?,
            ("diagnostics", "ledger") => self.diagnostics.ledger = parse_bool(line, k, value)?,
            ("diagnostics", "ledger_tol") => {
                self.diagnostics.ledger_tol = parse_f64(line, k, value)?
            }
            ("diagnostics", "harnack") => self.diagnostics.harnack = parse_bool(line, k, value)?,
            ("diagnostics", "harnack_a") => {
                self.diagnostics.harnack_a = parse_f64(line, k, value)?
            }
            ("diagnostics", "harnack_t_floor") => {
                self.diagnostics.harnack_t_floor = parse_f64(line, k, value)?
            }
            ("diagnostics", "steady") => self.diagnostics.steady = parse_bool(line, k, value)?,
            ("diagnostics", "steady_tol") => {
                self.diagnostics.steady_tol = parse_f64(line, k, value)?
            }
            ("diagnostics", "steady_tail_tol") => {
                self.diagnostics.steady_tail_tol = parse_f64(line, k, value)?
            }
            ("diagnostics", "stability") => {
                self.diagnostics.stability = parse_bool(line, k, value)?
            }
            ("diagnostics", "stability_amplitude") => {
                self.diagnostics.stability_amplitude = parse_f64(line, k, value)?
            }
            ("output", "dir") => self.output.dir = value.to_string(),
            ("output", "seed") => self.output.seed = parse_u64(line, k, value)?,
            _ => return Err(config_err(line, k, "unknown key")),
        }
        Ok(())
    }

    /// Validate cross-field invariants. Errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: String| Err(Error::Config(format!("key `{key}`: {msg}")));
        if self.grid.dim != 1 && self.grid.dim != 2 {
            return fail("grid.dim", format!("must be 1 or 2, got {}", self.grid.dim));
        }
        if self.grid.n < 4 || (self.grid.dim == 2 && self.grid.n2 < 4) {
            return fail("grid.n", "need at least 4 points per axis".into());
        }
        if !(self.grid.l > 0.0) || (self.grid.dim == 2 && !(self.grid.l2 > 0.0)) {
            return fail("grid.l", "period must be positive".into());
        }
        if self.flow.variant == FlowVariant::Nonlinear && !(self.flow.p > 1.0) {
            return fail("flow.p", format!("p > 1 required, got {}", self.flow.p));
        }
        if !(self.flow.forcing_decay >= 0.0) {
            return fail("flow.forcing_decay", "must be >= 0".into());
        }
        if !(self.controls.dt > 0.0) {
            return fail("controls.dt", format!("must be positive, got {}", self.controls.dt));
        }
        if !(self.controls.t_end > 0.0) {
            return fail("controls.t_end", "must be positive".into());
        }
        if !(self.controls.delta > 0.0) {
            return fail("controls.delta", "must be positive".into());
        }
        if !(self.controls.picard_tol > 0.0) {
            return fail("controls.picard_tol", "must be positive".into());
        }
        if self.controls.picard_max_iter == 0 {
            return fail("controls.picard_max_iter", "must be at least 1".into());
        }
        if self.controls.record_every == 0 {
            return fail("controls.record_every", "must be at least 1".into());
        }
        if self.flow.variant == FlowVariant::Nonlinear && self.initial.amplitude.abs() >= 1.0 {
            return fail(
                "initial.amplitude",
                "nonlinear initial data must stay positive; need |amplitude| < 1".into(),
            );
        }
        if !(self.diagnostics.harnack_a > 1.0) {
            return fail("diagnostics.harnack_a", "need a > 1".into());
        }
        if !(self.diagnostics.harnack_t_floor > 0.0) {
            return fail("diagnostics.harnack_t_floor", "must be positive".into());
        }
        Ok(())
    }

    /// Canonical textual form; `parse_config` of the output reproduces
    /// `self` exactly.
    pub fn serialize(&self) -> String {
        let variant = match self.flow.variant {
            FlowVariant::Linear => "linear",
            FlowVariant::Nonlinear => "nonlinear",
        };
        let forcing = match self.flow.forcing {
            ForcingKind::Zero => "zero",
            ForcingKind::OnePlusCos => "one_plus_cos",
        };
        let initial = match self.initial.preset {
            InitialKind::Constant => "constant",
            InitialKind::PerturbedSin => "perturbed_sin",
            InitialKind::PerturbedCos => "perturbed_cos",
        };
        let scheme = match self.controls.scheme {
            SchemeKind::Imex => "imex",
            SchemeKind::Picard => "picard",
        };
        format!(
            "[grid]\n\
             dim = {dim}\n\
             n = {n}\n\
             n2 = {n2}\n\
             l = {l}\n\
             l2 = {l2}\n\
             \n\
             [flow]\n\
             variant = {variant}\n\
             p = {p}\n\
             forcing = {forcing}\n\
             forcing_decay = {forcing_decay}\n\
             \n\
             [initial]\n\
             preset = {initial}\n\
             amplitude = {amplitude}\n\
             \n\
             [controls]\n\
             scheme = {scheme}\n\
             dt = {dt}\n\
             t_end = {t_end}\n\
             delta = {delta}\n\
             picard_tol = {picard_tol}\n\
             picard_max_iter = {picard_max_iter}\n\
             record_every = {record_every}\n\
             \n\
             [diagnostics]\n\
             mass_tol = {mass_tol}\n\
             ledger = {ledger}\n\
             ledger_tol = {ledger_tol}\n\
             harnack = {harnack}\n\
             harnack_a = {harnack_a}\n\
             harnack_t_floor = {harnack_t_floor}\n\
             steady = {steady}\n\
             steady_tol = {steady_tol}\n\
             steady_tail_tol = {steady_tail_tol}\n\
             stability = {stability}\n\
             stability_amplitude = {stability_amplitude}\n\
             \n\
             [output]\n\
             dir = {dir}\n\
             seed = {seed}\n",
            dim = self.grid.dim,
            n = self.grid.n,
            n2 = self.grid.n2,
            l = self.grid.l,
            l2 = self.grid.l2,
            p = self.flow.p,
            forcing_decay = self.flow.forcing_decay,
            amplitude = self.initial.amplitude,
            dt = self.controls.dt,
            t_end = self.controls.t_end,
            delta = self.controls.delta,
            picard_tol = self.controls.picard_tol,
            picard_max_iter = self.controls.picard_max_iter,
            record_every = self.controls.record_every,
            mass_tol = self.diagnostics.mass_tol,
            ledger = self.diagnostics.ledger,
            ledger_tol = self.diagnostics.ledger_tol,
            harnack = self.diagnostics.harnack,
            harnack_a = self.diagnostics.harnack_a,
            harnack_t_floor = self.diagnostics.harnack_t_floor,
            steady = self.diagnostics.steady,
            steady_tol = self.diagnostics.steady_tol,
            steady_tail_tol = self.diagnostics.steady_tail_tol,
            stability = self.diagnostics.stability,
            stability_amplitude = self.diagnostics.stability_amplitude,
            dir = self.output.dir,
            seed = self.output.seed,
        )
    }
}

/// Parse a config document; unset keys take documented defaults
/// (dt = 1e-3, n = 128, harnack_a = 2, delta = 0.05, t_floor = 0.1).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {line_no}: unterminated section header `{raw}`")))?
                .trim();
            match name {
                "grid" | "flow" | "initial" | "controls" | "diagnostics" | "output" => {
                    section = name.to_string();
                }
                _ => {
                    return Err(Error::Config(format!(
                        "line {line_no}: unknown section `{name}`"
                    )))
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {line_no}: expected `key = value`, got `{line}`"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(Error::Config(format!(
                "line {line_no}: key `{key}` before any [section] header"
            )));
        }
        cfg.set(&format!("{section}.{key}"), value, line_no)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub const PRESET_NAMES: [&str; 8] = [
    "linear_ground_state",
    "linear_forced_steady",
    "nonlinear_ground_state",
    "nonlinear_fixed_point",
    "stability_pair_linear",
    "stability_pair_nonlinear",
    "harnack_monitor",
    "picard_vs_direct",
];

/// Build the named preset config. Every numeric parameter is pinned so
/// reruns are reproducible without hand-tuning.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    cfg.output.dir = format!("out/{name}");
    match name {
        "linear_ground_state" => {
            cfg.flow.variant = FlowVariant::Linear;
            cfg.initial.preset = InitialKind::PerturbedSin;
            cfg.initial.amplitude = 0.3;
            cfg.controls.t_end = 2.0;
            cfg.diagnostics.ledger = true;
            // First-order scheme error through the fast initial transient
            // dominates the identity residual: constant ≈ ∫uₜ²(0)/2 ≈ 35,
            // so dt = 1e-3 gives ≈ 3.4e-2.
            cfg.diagnostics.ledger_tol = 5e-2;
        }
        "linear_forced_steady" => {
            cfg.flow.variant = FlowVariant::Linear;
            cfg.flow.forcing = ForcingKind::OnePlusCos;
            cfg.initial.preset = InitialKind::Constant;
            cfg.controls.dt = 2.5e-4;
            cfg.controls.t_end = 10.0;
            cfg.controls.record_every = 4;
            cfg.diagnostics.steady = true;
            cfg.diagnostics.steady_tol = 1e-3;
        }
        "nonlinear_ground_state" => {
            cfg.flow.variant = FlowVariant::Nonlinear;
            cfg.flow.p = 3.0;
            cfg.initial.preset = InitialKind::PerturbedSin;
            cfg.initial.amplitude = 0.3;
            cfg.controls.t_end = 5.0;
            cfg.diagnostics.ledger = true;
            // Same transient-dominated residual scale as linear_ground_state.
            cfg.diagnostics.ledger_tol = 5e-2;
            cfg.diagnostics.steady = true;
            cfg.diagnostics.steady_tol = 1e-6;
        }
        "nonlinear_fixed_point" => {
            cfg.flow.variant = FlowVariant::Nonlinear;
            cfg.flow.p = 3.0;
            cfg.initial.preset = InitialKind::Constant;
            cfg.controls.t_end = 1.0;
            cfg.diagnostics.ledger = true;
        }
        "stability_pair_linear" => {
            cfg.flow.variant = FlowVariant::Linear;
            cfg.initial.preset = InitialKind::PerturbedSin;
            // Small enough that the early-time gap decay is already in the
            // single-exponential regime the fitted bound assumes.
            cfg.initial.amplitude = 0.05;
            cfg.controls.t_end = 1.0;
            cfg.diagnostics.stability = true;
            cfg.diagnostics.stability_amplitude = 0.025;
        }
        "stability_pair_nonlinear" => {
            cfg.flow.variant = FlowVariant::Nonlinear;
            cfg.flow.p = 3.0;
            cfg.initial.preset = InitialKind::PerturbedSin;
            cfg.initial.amplitude = 0.05;
            cfg.controls.t_end = 1.0;
            cfg.diagnostics.stability = true;
            cfg.diagnostics.stability_amplitude = 0.025;
        }
        "harnack_monitor" => {
            cfg.flow.variant = FlowVariant::Nonlinear;
            cfg.flow.p = 2.0;
            cfg.initial.preset = InitialKind::PerturbedSin;
            cfg.initial.amplitude = 0.3;
            cfg.controls.t_end = 2.0;
            cfg.diagnostics.harnack = true;
        }
        "picard_vs_direct" => {
            cfg.flow.variant = FlowVariant::Linear;
            cfg.grid.n = 64;
            cfg.initial.preset = InitialKind::PerturbedSin;
            cfg.initial.amplitude = 0.3;
            cfg.controls.scheme = SchemeKind::Picard;
            cfg.controls.dt = 1e-4;
            cfg.controls.t_end = 0.2;
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}`; see `list-presets`"
            )))
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Preset catalog with one-line descriptions; ordering is fixed.
pub fn list_presets() -> String {
    let descriptions = [
        "unforced linear flow relaxing a perturbed constant to the ground state",
        "linear flow with forcing 1 + cos 2πx converging to a steady profile",
        "nonlinear p = 3 flow relaxing a perturbed constant, energy ledger on",
        "nonlinear p = 3 flow started at the exact constant fixed point",
        "paired unforced linear runs for the L2/H1 stability bound",
        "paired nonlinear p = 3 runs for the L2/H1 stability bound",
        "nonlinear p = 2 run monitoring the Harnack quantity on t in [0.1, 2]",
        "windowed successive-linearization run for comparison with direct stepping",
    ];
    let mut out = String::new();
    for (name, desc) in PRESET_NAMES.iter().zip(descriptions) {
        out.push_str(&format!("{name:26} {desc}\n"));
    }
    out
}
