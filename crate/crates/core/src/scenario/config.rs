//! Scenario files.
//!
//! Line-oriented: a `name:` line opens a section, `key = value` lines
//! fill it, `#` starts a comment. Sections and their keys:
//!
//! ```text
//! vessel:    beta, A0, rho, K_r, D                  (all required)
//! stenosis:  outlet, K_s, A_s, L_s, R_T, mu         (optional section)
//! grid:      cells                                   (required)
//! time:      t_end (required), cfl, snapshot_every
//! inlet:     kind = constant      -> flow
//!            kind = half_sine     -> base, amplitude, period, systolic_fraction
//!            kind = sampled       -> period, samples = t:q, t:q, ...
//! initial:   kind = at_rest | pulse (amplitude, center, width) | profile (file)
//! flags:     strict_subcritical = true | false
//! ```
//!
//! Without a `stenosis` section the outlet is non-reflecting. `outlet`
//! is one of `static`, `dynamic`, `nonreflecting`; `L_s` defaults to 0.
//! Unknown sections or keys are errors, and all problems are reported
//! together with their line numbers.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use crate::model::{OutletModel, StenosisParams, VesselParams};
use crate::solver::{FlowField, MIN_CELLS};

use super::waveform::InletWaveform;

/// One problem found while parsing or validating a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario ({} problem(s))", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub cfl: f64,
    /// Interval between snapshots; zero records only the start and end.
    pub snapshot_every: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `A = A0`, `V = Q_in(0) / A0`.
    AtRest,
    /// At-rest background plus a right-going simple wave
    /// `A = A0 (1 + amplitude exp(-((x - center) / width)²))` with `v` uniform.
    Pulse {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// CSV file with columns `x, A, V`, linearly interpolated to cell centres.
    ProfileFile(PathBuf),
    /// Cell values supplied directly; not expressible in a scenario file.
    Cells(FlowField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub vessel: VesselParams,
    pub stenosis: Option<StenosisParams>,
    pub n_cells: usize,
    pub time: TimeConfig,
    pub inlet: InletWaveform,
    pub initial: InitialCondition,
    pub strict_subcritical: bool,
}

impl ScenarioConfig {
    pub fn outlet(&self) -> OutletModel {
        self.stenosis
            .map_or(OutletModel::NonReflecting, |s| s.outlet_model)
    }

    /// Same scenario with a different outlet closure.
    pub fn with_outlet(&self, outlet: OutletModel) -> Self {
        let mut c = self.clone();
        if let Some(s) = c.stenosis.as_mut() {
            s.outlet_model = outlet;
        }
        c
    }

    /// Every invariant violation, without line numbers.
    pub fn violations(&self) -> Vec<ConfigIssue> {
        let mut out: Vec<ConfigIssue> = Vec::new();
        let mut push = |m: String| {
            out.push(ConfigIssue {
                line: None,
                message: m,
            })
        };
        if let Err(e) = self.vessel.validate() {
            push(e.to_string());
        }
        if let Some(s) = &self.stenosis {
            for e in s.violations(&self.vessel) {
                push(e.to_string());
            }
            if s.outlet_model == OutletModel::Static && s.is_degenerate_static(&self.vessel) {
                push("degenerate static closure: A_s = A0 with R_T = 0 and L_s = 0 determines nothing".into());
            }
        }
        if self.n_cells < MIN_CELLS {
            push(format!(
                "grid cells must be >= {MIN_CELLS}, got {}",
                self.n_cells
            ));
        }
        if !(self.time.t_end >= 0.0) || !self.time.t_end.is_finite() {
            push(format!("t_end must be >= 0, got {}", self.time.t_end));
        }
        if !(self.time.cfl > 0.0 && self.time.cfl <= 1.0) {
            push(format!("cfl must lie in (0, 1], got {}", self.time.cfl));
        }
        if !(self.time.snapshot_every >= 0.0) || !self.time.snapshot_every.is_finite() {
            push(format!(
                "snapshot_every must be >= 0, got {}",
                self.time.snapshot_every
            ));
        }
        for m in self.inlet.violations() {
            push(m);
        }
        if let InitialCondition::Pulse {
            amplitude, width, ..
        } = self.initial
        {
            if !(amplitude > -1.0) {
                push(format!("pulse amplitude must exceed -1, got {amplitude}"));
            }
            if !(width > 0.0) {
                push(format!("pulse width must be > 0, got {width}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let issues = self.violations();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    /// Sets a parameter by `section.key` (or a bare key that is unique
    /// across sections), as used by parameter sweeps.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        let key = name.rsplit('.').next().unwrap_or(name);
        let section = name
            .contains('.')
            .then(|| name.split('.').next().unwrap_or(""));
        if matches!(
            (section, key),
            (
                None | Some("stenosis"),
                "K_s" | "A_s" | "L_s" | "R_T" | "mu"
            )
        ) {
            let s = self
                .stenosis
                .as_mut()
                .ok_or_else(|| format!("`{name}` needs a stenosis section"))?;
            match key {
                "K_s" => s.loss_coefficient = value,
                "A_s" => s.area = value,
                "L_s" => s.length = value,
                "R_T" => s.terminal_resistance = value,
                _ => s.viscosity = value,
            }
            return Ok(());
        }
        match (section, key) {
            (None | Some("vessel"), "beta") => self.vessel.beta = value,
            (None | Some("vessel"), "A0") => self.vessel.area0 = value,
            (None | Some("vessel"), "rho") => self.vessel.density = value,
            (None | Some("vessel"), "K_r") => self.vessel.friction = value,
            (None | Some("vessel"), "D") => self.vessel.length = value,
            (None | Some("grid"), "cells") => self.n_cells = value as usize,
            (None | Some("time"), "t_end") => self.time.t_end = value,
            (None | Some("time"), "cfl") => self.time.cfl = value,
            _ => return Err(format!("`{name}` is not a sweepable parameter")),
        }
        Ok(())
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("vessel", &["beta", "A0", "rho", "K_r", "D"]),
    ("stenosis", &["outlet", "K_s", "A_s", "L_s", "R_T", "mu"]),
    ("grid", &["cells"]),
    ("time", &["t_end", "cfl", "snapshot_every"]),
    (
        "inlet",
        &[
            "kind",
            "flow",
            "base",
            "amplitude",
            "period",
            "systolic_fraction",
            "samples",
        ],
    ),
    ("initial", &["kind", "amplitude", "center", "width", "file"]),
    ("flags", &["strict_subcritical"]),
];

type Entries = BTreeMap<&'static str, BTreeMap<&'static str, (String, usize)>>;

struct Parser {
    entries: Entries,
    section_lines: BTreeMap<&'static str, usize>,
    issues: Vec<ConfigIssue>,
}

impl Parser {
    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn has_section(&self, section: &str) -> bool {
        self.section_lines.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<(String, usize)> {
        self.entries.get(section).and_then(|m| m.get(key)).cloned()
    }

    fn section_line(&self, section: &str) -> Option<usize> {
        self.section_lines.get(section).copied()
    }

    fn number(&mut self, section: &str, key: &str) -> Option<f64> {
        let (text, line) = self.raw(section, key)?;
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.issue(
                    Some(line),
                    format!("{section}.{key}: `{text}` is not a finite number"),
                );
                None
            }
        }
    }

    fn required(&mut self, section: &str, key: &str) -> f64 {
        if self.raw(section, key).is_none() {
            let line = self.section_line(section);
            self.issue(line, format!("missing required key {section}.{key}"));
            return f64::NAN;
        }
        self.number(section, key).unwrap_or(f64::NAN)
    }

    fn optional(&mut self, section: &str, key: &str, default: f64) -> f64 {
        match self.raw(section, key) {
            Some(_) => self.number(section, key).unwrap_or(f64::NAN),
            None => default,
        }
    }
}

/// Parses and validates a scenario, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut p = Parser {
        entries: Entries::new(),
        section_lines: BTreeMap::new(),
        issues: Vec::new(),
    };
    let mut current: Option<(&'static str, &'static [&'static str])> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_suffix(':').filter(|n| !n.contains('=')) {
            let name = name.trim();
            match SECTIONS.iter().find(|(s, _)| *s == name) {
                Some(&(s, keys)) => {
                    if p.section_lines.insert(s, line).is_some() {
                        p.issue(Some(line), format!("section `{s}` appears twice"));
                    }
                    current = Some((s, keys));
                }
                None => {
                    p.issue(Some(line), format!("unknown section `{name}`"));
                    current = None;
                }
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            p.issue(
                Some(line),
                format!("expected `key = value` or `section:`, got `{content}`"),
            );
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some((section, keys)) = current else {
            p.issue(
                Some(line),
                format!("key `{key}` outside of a known section"),
            );
            continue;
        };
        let Some(&k) = keys.iter().find(|k| **k == key) else {
            p.issue(
                Some(line),
                format!("unknown key `{key}` in section `{section}`"),
            );
            continue;
        };
        let slot = p.entries.entry(section).or_default();
        if slot.insert(k, (value.to_string(), line)).is_some() {
            p.issue(Some(line), format!("duplicate key {section}.{key}"));
        }
    }

    for s in ["vessel", "grid", "time", "inlet"] {
        if !p.has_section(s) {
            p.issue(None, format!("missing required section `{s}`"));
        }
    }

    let vessel = VesselParams {
        beta: p.required("vessel", "beta"),
        area0: p.required("vessel", "A0"),
        density: p.required("vessel", "rho"),
        friction: p.required("vessel", "K_r"),
        length: p.required("vessel", "D"),
    };

    let stenosis = parse_stenosis(&mut p);

    let cells = p.required("grid", "cells");
    let n_cells = if cells.fract() == 0.0 && cells >= 0.0 {
        cells as usize
    } else {
        if cells.is_finite() {
            let line = p.raw("grid", "cells").map(|r| r.1);
            p.issue(
                line,
                format!("grid.cells must be a non-negative integer, got {cells}"),
            );
        }
        0
    };

    let time = TimeConfig {
        t_end: p.required("time", "t_end"),
        cfl: p.optional("time", "cfl", crate::solver::DEFAULT_CFL),
        snapshot_every: p.optional("time", "snapshot_every", 0.0),
    };

    let inlet = parse_inlet(&mut p);
    let initial = parse_initial(&mut p);

    let strict_subcritical = match p.raw("flags", "strict_subcritical") {
        None => false,
        Some((v, line)) => match v.as_str() {
            "true" => true,
            "false" => false,
            other => {
                p.issue(
                    Some(line),
                    format!("flags.strict_subcritical must be true or false, got `{other}`"),
                );
                false
            }
        },
    };

    let config = ScenarioConfig {
        vessel,
        stenosis,
        n_cells,
        time,
        inlet,
        initial,
        strict_subcritical,
    };

    let mut issues = p.issues;
    // parse failures already produced NaN placeholders; only report
    // invariant violations for values that were actually read
    if issues.is_empty() {
        issues.extend(config.violations());
    } else {
        issues.extend(
            config
                .violations()
                .into_iter()
                .filter(|i| !i.message.contains("NaN")),
        );
    }
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { issues })
    }
}

fn parse_stenosis(p: &mut Parser) -> Option<StenosisParams> {
    if !p.has_section("stenosis") {
        return None;
    }
    let outlet = match p.raw("stenosis", "outlet") {
        None => {
            let line = p.section_line("stenosis");
            p.issue(line, "missing required key stenosis.outlet");
            OutletModel::Static
        }
        Some((v, line)) => OutletModel::parse(&v).unwrap_or_else(|| {
            p.issue(
                Some(line),
                format!("stenosis.outlet must be static, dynamic or nonreflecting, got `{v}`"),
            );
            OutletModel::Static
        }),
    };
    let physical = ["K_s", "A_s", "R_T", "mu"];
    if outlet == OutletModel::NonReflecting
        && physical.iter().all(|k| p.raw("stenosis", k).is_none())
    {
        return None;
    }
    Some(StenosisParams {
        loss_coefficient: p.required("stenosis", "K_s"),
        area: p.required("stenosis", "A_s"),
        length: p.optional("stenosis", "L_s", 0.0),
        terminal_resistance: p.required("stenosis", "R_T"),
        viscosity: p.required("stenosis", "mu"),
        outlet_model: outlet,
    })
}

fn parse_inlet(p: &mut Parser) -> InletWaveform {
    let kind = p.raw("inlet", "kind");
    let allowed: &[&str] = match kind.as_ref().map(|k| k.0.as_str()) {
        Some("constant") => &["kind", "flow"],
        Some("half_sine") => &["kind", "base", "amplitude", "period", "systolic_fraction"],
        Some("sampled") => &["kind", "period", "samples"],
        _ => &[],
    };
    if !allowed.is_empty() {
        let extra: Vec<(String, usize)> = p.entries["inlet"]
            .iter()
            .filter(|(k, _)| !allowed.contains(k))
            .map(|(k, (_, line))| (k.to_string(), *line))
            .collect();
        for (k, line) in extra {
            p.issue(
                Some(line),
                format!("key inlet.{k} does not apply to this inlet kind"),
            );
        }
    }
    match kind {
        None => {
            if p.has_section("inlet") {
                let line = p.section_line("inlet");
                p.issue(line, "missing required key inlet.kind");
            }
            InletWaveform::Constant { flow: f64::NAN }
        }
        Some((k, _)) if k == "constant" => InletWaveform::Constant {
            flow: p.required("inlet", "flow"),
        },
        Some((k, _)) if k == "half_sine" => InletWaveform::HalfSine {
            base: p.required("inlet", "base"),
            amplitude: p.required("inlet", "amplitude"),
            period: p.required("inlet", "period"),
            systolic_fraction: p.optional("inlet", "systolic_fraction", 0.35),
        },
        Some((k, _)) if k == "sampled" => {
            let period = p.required("inlet", "period");
            let samples = match p.raw("inlet", "samples") {
                None => {
                    let line = p.section_line("inlet");
                    p.issue(line, "missing required key inlet.samples");
                    Vec::new()
                }
                Some((text, line)) => {
                    let mut out = Vec::new();
                    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let parsed = item.split_once(':').and_then(|(t, q)| {
                            Some((t.trim().parse::<f64>().ok()?, q.trim().parse::<f64>().ok()?))
                        });
                        match parsed {
                            Some(pair) => out.push(pair),
                            None => {
                                p.issue(Some(line), format!("inlet sample `{item}` is not `t:q`"))
                            }
                        }
                    }
                    out
                }
            };
            InletWaveform::Sampled { period, samples }
        }
        Some((k, line)) => {
            p.issue(
                Some(line),
                format!("inlet.kind must be constant, half_sine or sampled, got `{k}`"),
            );
            InletWaveform::Constant { flow: 1.0 }
        }
    }
}

fn parse_initial(p: &mut Parser) -> InitialCondition {
    match p.raw("initial", "kind") {
        None => InitialCondition::AtRest,
        Some((k, _)) if k == "at_rest" => InitialCondition::AtRest,
        Some((k, _)) if k == "pulse" => InitialCondition::Pulse {
            amplitude: p.required("initial", "amplitude"),
            center: p.required("initial", "center"),
            width: p.required("initial", "width"),
        },
        Some((k, _)) if k == "profile" => match p.raw("initial", "file") {
            Some((f, _)) => InitialCondition::ProfileFile(PathBuf::from(f)),
            None => {
                let line = p.section_line("initial");
                p.issue(line, "missing required key initial.file");
                InitialCondition::AtRest
            }
        },
        Some((k, line)) => {
            p.issue(
                Some(line),
                format!("initial.kind must be at_rest, pulse or profile, got `{k}`"),
            );
            InitialCondition::AtRest
        }
    }
}

/// Writes a scenario back in the file grammar. `Cells` initial data has
/// no textual form and is written as `at_rest`.
pub fn serialize_config(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let v = &c.vessel;
    let _ = writeln!(s, "vessel:");
    let _ = writeln!(
        s,
        "beta = {}\nA0 = {}\nrho = {}\nK_r = {}\nD = {}",
        v.beta, v.area0, v.density, v.friction, v.length
    );
    if let Some(st) = &c.stenosis {
        let _ = writeln!(s, "\nstenosis:");
        let _ = writeln!(s, "outlet = {}", st.outlet_model.name());
        let _ = writeln!(
            s,
            "K_s = {}\nA_s = {}\nL_s = {}\nR_T = {}\nmu = {}",
            st.loss_coefficient, st.area, st.length, st.terminal_resistance, st.viscosity
        );
    }
    let _ = writeln!(s, "\ngrid:\ncells = {}", c.n_cells);
    let _ = writeln!(
        s,
        "\ntime:\nt_end = {}\ncfl = {}\nsnapshot_every = {}",
        c.time.t_end, c.time.cfl, c.time.snapshot_every
    );
    let _ = write!(s, "\ninlet:\n{}", c.inlet);
    let _ = writeln!(s, "\ninitial:");
    match &c.initial {
        InitialCondition::AtRest | InitialCondition::Cells(_) => {
            let _ = writeln!(s, "kind = at_rest");
        }
        InitialCondition::Pulse {
            amplitude,
            center,
            width,
        } => {
            let _ = writeln!(
                s,
                "kind = pulse\namplitude = {amplitude}\ncenter = {center}\nwidth = {width}"
            );
        }
        InitialCondition::ProfileFile(path) => {
            let _ = writeln!(s, "kind = profile\nfile = {}", path.display());
        }
    }
    let _ = writeln!(s, "\nflags:\nstrict_subcritical = {}", c.strict_subcritical);
    s
}
