//! Run configuration: a flat TOML table of `key = value` pairs layered over
//! an optional preset. Unknown keys are rejected and every problem found is
//! reported, not just the first.

use std::fmt;
use std::path::{Path, PathBuf};

use micromaser::detection::ResetMode;
use micromaser::experiments::{EfficiencyOptions, Preset, DEFAULT_PUMP_RATES};
use micromaser::{ControllerConfig, InjectionSchedule, ParamIssue, SimParams, TwoAtomMode};
use toml::{Table, Value};

/// Every key a configuration file may contain.
pub const KEYS: &[&str] = &[
    "preset",
    "seed",
    "out",
    "g",
    "phi0",
    "delta_phi",
    "delta_phi_rel",
    "pump_rate",
    "gamma",
    "n_thermal",
    "eta_g",
    "eta_e",
    "background_rate",
    "n_max",
    "two_atom_mode",
    "threshold",
    "window",
    "reset_mode",
    "reset_duration",
    "rearm_rate",
    "controller",
    "t_end",
    "injections",
    "injection_rate",
    "n_injections",
    "pump_rates",
    "latency",
    "min_gap",
    "max_gap",
    "sweep_min",
    "sweep_max",
    "sweep_points",
    "dwell",
    "oracle_sets",
    "oracle_events",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub issues: Vec<ParamIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration in {}:", self.source)?;
        for issue in &self.issues {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Settings that select and size an experiment rather than describe physics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    /// Attach the threshold controller to `trajectory` runs.
    pub controller: bool,
    pub t_end: f64,
    pub injections: Vec<f64>,
    pub injection_rate: Option<f64>,
    pub n_injections: usize,
    pub pump_rates: Vec<f64>,
    pub efficiency: EfficiencyOptions,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    pub dwell: Option<f64>,
    pub oracle_sets: usize,
    pub oracle_events: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            controller: false,
            t_end: 10.0,
            injections: Vec::new(),
            injection_rate: None,
            n_injections: 1000,
            pump_rates: DEFAULT_PUMP_RATES.to_vec(),
            efficiency: EfficiencyOptions::default(),
            sweep_min: 50.0,
            sweep_max: 1000.0,
            sweep_points: 20,
            dwell: None,
            oracle_sets: 5,
            oracle_events: 1_000_000,
        }
    }
}

impl ExperimentSettings {
    pub fn schedule(&self) -> InjectionSchedule {
        match self.injection_rate {
            Some(rate) => InjectionSchedule::Poisson { rate, start: 0.0 },
            None if self.injections.is_empty() => InjectionSchedule::None,
            None => InjectionSchedule::Times(self.injections.clone()),
        }
    }

    /// Evenly spaced sweep rates from `sweep_min` to `sweep_max`.
    pub fn sweep_rates(&self) -> Vec<f64> {
        if self.sweep_points == 1 {
            return vec![self.sweep_min];
        }
        let step = (self.sweep_max - self.sweep_min) / (self.sweep_points - 1) as f64;
        (0..self.sweep_points)
            .map(|k| self.sweep_min + step * k as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub params: SimParams,
    pub controller: ControllerConfig,
    pub experiment: ExperimentSettings,
    /// The table the configuration was built from, with the preset recorded.
    pub table: Table,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_table(Table::new(), None).expect("defaults are valid")
    }
}

struct Reader {
    table: Table,
    issues: Vec<ParamIssue>,
}

impl Reader {
    fn value(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ParamIssue::new(key, message));
    }

    fn float(&mut self, key: &str, target: &mut f64) {
        match self.value(key) {
            None => {}
            Some(Value::Float(v)) => *target = *v,
            Some(Value::Integer(v)) => *target = *v as f64,
            Some(other) => {
                let msg = format!("expected a number, found {}", other.type_str());
                self.fail(key, msg);
            }
        }
    }

    fn opt_float(&mut self, key: &str) -> Option<f64> {
        let mut v = f64::NAN;
        self.value(key)?;
        self.float(key, &mut v);
        Some(v)
    }

    fn count(&mut self, key: &str, target: &mut usize) {
        match self.value(key) {
            None => {}
            Some(Value::Integer(v)) if *v >= 0 => *target = *v as usize,
            Some(Value::Integer(_)) => self.fail(key, "must be >= 0"),
            Some(other) => {
                let msg = format!("expected an integer, found {}", other.type_str());
                self.fail(key, msg);
            }
        }
    }

    fn boolean(&mut self, key: &str, target: &mut bool) {
        match self.value(key) {
            None => {}
            Some(Value::Boolean(v)) => *target = *v,
            Some(other) => {
                let msg = format!("expected true or false, found {}", other.type_str());
                self.fail(key, msg);
            }
        }
    }

    fn parsed<T: std::str::FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        match self.value(key)? {
            Value::String(s) => match s.parse() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.fail(key, e);
                    None
                }
            },
            other => {
                let msg = format!("expected a string, found {}", other.type_str());
                self.fail(key, msg);
                None
            }
        }
    }

    fn floats(&mut self, key: &str, target: &mut Vec<f64>) {
        match self.value(key) {
            None => {}
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| match v {
                        Value::Float(x) => Some(*x),
                        Value::Integer(x) => Some(*x as f64),
                        _ => None,
                    })
                    .collect();
                match parsed {
                    Some(v) => *target = v,
                    None => self.fail(key, "expected an array of numbers"),
                }
            }
            Some(other) => {
                let msg = format!("expected an array, found {}", other.type_str());
                self.fail(key, msg);
            }
        }
    }
}

fn check(issues: &mut Vec<ParamIssue>, ok: bool, key: &str, message: &str) {
    if !ok {
        issues.push(ParamIssue::new(key, message));
    }
}

/// Builds a configuration from a parsed table. A preset named by `preset`
/// (or the table's own `preset` key) supplies the base values.
pub fn parse_table(table: Table, preset: Option<Preset>) -> Result<RunConfig, Vec<ParamIssue>> {
    let mut r = Reader {
        table,
        issues: Vec::new(),
    };
    for key in r.table.keys().cloned().collect::<Vec<_>>() {
        if !KEYS.contains(&key.as_str()) {
            r.fail(&key, "unknown key");
        }
    }
    let preset = preset.or_else(|| r.parsed::<Preset>("preset"));
    if let Some(p) = preset {
        r.table
            .insert("preset".into(), Value::String(p.as_str().into()));
    }
    let mut params = preset.map_or_else(SimParams::default, Preset::params);
    let base_controller = preset.map(Preset::controller);

    let mut seed = 0usize;
    r.count("seed", &mut seed);
    let out = match r.value("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => {
            r.fail("out", "expected a path string");
            None
        }
    };

    r.float("g", &mut params.g);
    r.float("phi0", &mut params.phi0);
    r.float("delta_phi", &mut params.delta_phi);
    if let Some(rel) = r.opt_float("delta_phi_rel") {
        if r.value("delta_phi").is_some() {
            r.fail("delta_phi_rel", "give delta_phi or delta_phi_rel, not both");
        }
        params.delta_phi = rel * params.phi0;
    }
    r.float("pump_rate", &mut params.pump_rate);
    r.float("gamma", &mut params.gamma);
    r.float("n_thermal", &mut params.n_thermal);
    r.float("eta_g", &mut params.eta_g);
    r.float("eta_e", &mut params.eta_e);
    r.float("background_rate", &mut params.background_rate);
    r.count("n_max", &mut params.n_max);
    if let Some(mode) = r.parsed::<TwoAtomMode>("two_atom_mode") {
        params.two_atom_mode = mode;
    }

    let mut threshold = base_controller.as_ref().map_or(20.0, |c| c.threshold);
    r.float("threshold", &mut threshold);
    let reset_mode = r
        .parsed::<ResetMode>("reset_mode")
        .or(base_controller.as_ref().map(|c| c.reset_mode))
        .unwrap_or(ResetMode::FreeDecay);
    let mut controller = match reset_mode {
        ResetMode::FreeDecay => ControllerConfig::free_decay(threshold, params.gamma),
        ResetMode::CleanPulse => ControllerConfig::clean_pulse(threshold),
    };
    r.float("window", &mut controller.window);
    r.float("reset_duration", &mut controller.reset_duration);
    r.float("rearm_rate", &mut controller.rearm_rate);

    let mut ex = ExperimentSettings::default();
    r.boolean("controller", &mut ex.controller);
    r.float("t_end", &mut ex.t_end);
    r.floats("injections", &mut ex.injections);
    ex.injection_rate = r.opt_float("injection_rate");
    r.count("n_injections", &mut ex.n_injections);
    r.floats("pump_rates", &mut ex.pump_rates);
    r.float("latency", &mut ex.efficiency.latency);
    r.float("min_gap", &mut ex.efficiency.min_gap);
    r.float("max_gap", &mut ex.efficiency.max_gap);
    r.float("sweep_min", &mut ex.sweep_min);
    r.float("sweep_max", &mut ex.sweep_max);
    r.count("sweep_points", &mut ex.sweep_points);
    ex.dwell = r.opt_float("dwell");
    r.count("oracle_sets", &mut ex.oracle_sets);
    r.count("oracle_events", &mut ex.oracle_events);

    let mut issues = r.issues;
    issues.extend(params.issues());
    let derived_reset =
        !r.table.contains_key("reset_duration") && reset_mode == ResetMode::FreeDecay;
    for issue in controller.issues() {
        if derived_reset && issue.key == "reset_duration" {
            issues.push(ParamIssue::new(
                "gamma",
                "free-decay reset 5/gamma needs gamma > 0 (or set reset_duration)",
            ));
        } else {
            issues.push(issue);
        }
    }
    let reset_ok = controller.reset_duration.is_finite();
    check(
        &mut issues,
        ex.t_end.is_finite() && ex.t_end > 0.0,
        "t_end",
        "must be finite and > 0",
    );
    check(
        &mut issues,
        ex.injections.iter().all(|t| t.is_finite() && *t >= 0.0)
            && ex.injections.windows(2).all(|w| w[0] <= w[1]),
        "injections",
        "must be finite, >= 0 and nondecreasing",
    );
    check(
        &mut issues,
        ex.injection_rate.is_none_or(|r| r.is_finite() && r > 0.0),
        "injection_rate",
        "must be finite and > 0",
    );
    check(
        &mut issues,
        ex.injection_rate.is_none() || ex.injections.is_empty(),
        "injection_rate",
        "give injections or injection_rate, not both",
    );
    check(
        &mut issues,
        ex.n_injections >= 100,
        "n_injections",
        "must be >= 100",
    );
    check(
        &mut issues,
        !ex.pump_rates.is_empty() && ex.pump_rates.iter().all(|r| r.is_finite() && *r > 0.0),
        "pump_rates",
        "must be a nonempty list of positive rates",
    );
    check(
        &mut issues,
        ex.efficiency.latency > 0.0,
        "latency",
        "must be > 0",
    );
    check(
        &mut issues,
        !reset_ok || ex.efficiency.min_gap >= controller.reset_duration + ex.efficiency.latency,
        "min_gap",
        "must be at least reset_duration + latency",
    );
    check(
        &mut issues,
        ex.efficiency.max_gap >= ex.efficiency.min_gap,
        "max_gap",
        "must be >= min_gap",
    );
    check(
        &mut issues,
        ex.sweep_min > 0.0 && ex.sweep_max >= ex.sweep_min,
        "sweep_min",
        "need 0 < sweep_min <= sweep_max",
    );
    check(
        &mut issues,
        ex.sweep_points >= 1,
        "sweep_points",
        "must be >= 1",
    );
    check(
        &mut issues,
        ex.dwell.is_none_or(|d| d.is_finite() && d > 0.0),
        "dwell",
        "must be finite and > 0",
    );
    check(
        &mut issues,
        ex.oracle_sets >= 1,
        "oracle_sets",
        "must be >= 1",
    );
    check(
        &mut issues,
        ex.oracle_events >= 1000,
        "oracle_events",
        "must be >= 1000",
    );

    if !issues.is_empty() {
        return Err(issues);
    }
    Ok(RunConfig {
        preset,
        seed: seed as u64,
        out,
        params,
        controller,
        experiment: ex,
        table: r.table,
    })
}

/// Parses configuration text; `source` names it in error messages.
pub fn parse_str(
    text: &str,
    source: &str,
    preset: Option<Preset>,
) -> Result<RunConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        source: source.to_string(),
        issues: vec![ParamIssue::new("syntax", e.message().trim().to_string())],
    })?;
    parse_table(table, preset).map_err(|issues| ConfigError {
        source: source.to_string(),
        issues,
    })
}

/// Loads an optional configuration file and applies command-line overrides
/// to its table, so the stored table reproduces the run.
pub fn load(
    path: Option<&Path>,
    preset: Option<Preset>,
    seed: Option<u64>,
) -> Result<RunConfig, ConfigError> {
    let (text, source) = match path {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| ConfigError {
                source: p.display().to_string(),
                issues: vec![ParamIssue::new("file", e.to_string())],
            })?,
            p.display().to_string(),
        ),
        None => (String::new(), "command line".to_string()),
    };
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        source: source.clone(),
        issues: vec![ParamIssue::new("syntax", e.message().trim().to_string())],
    })?;
    if let Some(seed) = seed {
        let seed = i64::try_from(seed).map_err(|_| ConfigError {
            source: source.clone(),
            issues: vec![ParamIssue::new("seed", "must be below 2^63")],
        })?;
        table.insert("seed".into(), Value::Integer(seed));
    }
    parse_table(table, preset).map_err(|issues| ConfigError { source, issues })
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path, preset: Option<Preset>) -> Result<RunConfig, ConfigError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: source.clone(),
        issues: vec![ParamIssue::new("file", e.to_string())],
    })?;
    parse_str(&text, &source, preset)
}
