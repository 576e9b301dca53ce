//! Line-based scenario configuration.
//!
//! ```text
//! # Λ system, EIT window
//! qudit.layout = lambda
//! qudit.delta1 = -50
//! oscillator.gamma = 4e-4
//! oscillator.n_th = 300
//! oscillator.eta = 0.1
//! ```
//!
//! Every key is `section.key`; `#` starts a comment. Sections are
//! `qudit`, `oscillator`, `solver`, `grid`, `command` and `output`.
//! Frequencies may be given in any unit; they are divided by
//! `oscillator.nu` so that the resolved config has `ν = 1`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::TruncationOptions;
use crate::linalg::{CMat, C64};
use crate::qudit::{GenericQudit, Jump, OscillatorSpec, QuditSpec, ThreeLevelParams, TwoLevelParams};
use crate::rates::{LdConvention, RateOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Rates,
    Steady,
    Transient,
    Toy,
    Validate,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "rates" => Command::Rates,
            "steady" => Command::Steady,
            "transient" => Command::Transient,
            "toy" => Command::Toy,
            "validate" => Command::Validate,
            other => return Err(format!("unknown command `{other}`")),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Rates => "rates",
            Command::Steady => "steady",
            Command::Transient => "transient",
            Command::Toy => "toy",
            Command::Validate => "validate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NTh,
    Q,
    Gamma,
    NLd,
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "n_th" => SweepAxis::NTh,
            "q" => SweepAxis::Q,
            "gamma" => SweepAxis::Gamma,
            "n_ld" => SweepAxis::NLd,
            other => return Err(format!("unknown sweep axis `{other}` (n_th, q, gamma, n_ld)")),
        })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::NTh => "n_th",
            SweepAxis::Q => "q",
            SweepAxis::Gamma => "gamma",
            SweepAxis::NLd => "n_ld",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub n_start: usize,
    pub n_ceiling: usize,
    pub tol: f64,
    pub r_floor: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let t = TruncationOptions::default();
        SolverConfig {
            n_start: t.n_start,
            n_ceiling: t.n_ceiling,
            tol: t.tol,
            r_floor: None,
        }
    }
}

impl SolverConfig {
    pub fn rate_options(&self) -> RateOptions {
        RateOptions {
            truncation: TruncationOptions {
                n_start: self.n_start,
                n_ceiling: self.n_ceiling,
                tol: self.tol,
            },
            r_floor: self.r_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    /// Rate-curve grid, log spaced.
    pub r_min: f64,
    pub r_max: Option<f64>,
    pub r_points: usize,
    /// Fokker-Planck grid; `None` picks defaults from the rates.
    pub fp_r_max: Option<f64>,
    pub fp_dr: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            r_min: 1e-2,
            r_max: None,
            r_points: 60,
            fp_r_max: None,
            fp_dr: None,
            dt: 10.0,
            t_end: 1e5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandConfig {
    pub name: Option<Command>,
    pub sweep: Option<Sweep>,
    /// Initial mean excitations for transients.
    pub initial_n: Vec<f64>,
    pub n_plus: Option<f64>,
    pub r_c: Option<f64>,
    pub mld_threshold: f64,
    pub alpha_ss_correction: bool,
    pub ld_convention: LdConvention,
    pub validate_radii: Vec<f64>,
}

impl Default for CommandConfig {
    fn default() -> Self {
        CommandConfig {
            name: None,
            sweep: None,
            initial_n: vec![50.0, 25.0],
            n_plus: None,
            r_c: None,
            mld_threshold: 0.3,
            alpha_ss_correction: false,
            ld_convention: LdConvention::Lindblad,
            validate_radii: vec![1.0, 5.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl FromStr for Formats {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut f = Formats {
            csv: false,
            json: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                other => return Err(format!("unknown output format `{other}` (csv, json)")),
            }
        }
        if !(f.csv || f.json) {
            return Err("no output format selected".into());
        }
        Ok(f)
    }
}

impl fmt::Display for Formats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.csv, self.json) {
            (true, true) => f.write_str("csv,json"),
            (true, false) => f.write_str("csv"),
            _ => f.write_str("json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Formats,
    pub snapshot_every: Option<usize>,
    pub record_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            formats: Formats { csv: true, json: true },
            snapshot_every: None,
            record_every: 1,
        }
    }
}

/// Fully resolved scenario with `ν = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub qudit: Option<QuditSpec>,
    /// Also compute the effective two-level system of a Ladder.
    pub effective_tls: bool,
    /// Overrides `Γ_eff = Ω2²/Γ1` for the effective two-level system.
    pub tls_decay: Option<f64>,
    pub oscillator: Option<OscillatorSpec>,
    /// Fixed `γN_th`; sweeps over `γ` or `Q` then adjust `N_th`.
    pub thermal_heating: Option<f64>,
    pub solver: SolverConfig,
    pub grid: GridConfig,
    pub command: CommandConfig,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn model(&self) -> Result<(&QuditSpec, &OscillatorSpec)> {
        match (&self.qudit, &self.oscillator) {
            (Some(q), Some(o)) => Ok((q, o)),
            (None, _) => Err(missing("qudit.layout")),
            (_, None) => Err(missing("oscillator.gamma")),
        }
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(q) = &self.qudit {
            put("qudit.layout", q.layout().to_string());
            match q {
                QuditSpec::TwoLevel(p) => {
                    put("qudit.delta1", p.detuning.to_string());
                    put("qudit.omega1", p.rabi.to_string());
                    put("qudit.gamma1", p.decay.to_string());
                }
                QuditSpec::Ladder(p) | QuditSpec::Lambda(p) => {
                    put("qudit.delta1", p.delta1.to_string());
                    put("qudit.delta2", p.delta2.to_string());
                    put("qudit.omega1", p.omega1.to_string());
                    put("qudit.omega2", p.omega2.to_string());
                    put("qudit.gamma1", p.gamma1.to_string());
                    put("qudit.gamma2", p.gamma2.to_string());
                }
                QuditSpec::Generic(g) => {
                    let d = g.hamiltonian.nrows();
                    put("qudit.dim", d.to_string());
                    for (name, m) in [("h", &g.hamiltonian), ("v", &g.coupling)] {
                        for i in 0..d {
                            for j in 0..d {
                                let z = m[(i, j)];
                                if z != C64::new(0.0, 0.0) {
                                    put(&format!("qudit.{name}.{i}.{j}"), format!("{}, {}", z.re, z.im));
                                }
                            }
                        }
                    }
                    for (k, jump) in g.jumps.iter().enumerate() {
                        let (from, to) = jump_levels(&jump.operator).unwrap_or((0, 0));
                        put(&format!("qudit.jump.{k}.from"), from.to_string());
                        put(&format!("qudit.jump.{k}.to"), to.to_string());
                        put(&format!("qudit.jump.{k}.rate"), jump.rate.to_string());
                    }
                }
            }
        }
        if self.effective_tls {
            put("qudit.effective_tls", "true".into());
        }
        if let Some(d) = self.tls_decay {
            put("qudit.tls_decay", d.to_string());
        }
        if let Some(o) = &self.oscillator {
            put("oscillator.nu", "1".into());
            put("oscillator.gamma", o.gamma.to_string());
            match self.thermal_heating {
                Some(h) => put("oscillator.thermal_heating", h.to_string()),
                None => put("oscillator.n_th", o.n_th.to_string()),
            }
            put("oscillator.lambda", o.lambda.to_string());
        }
        put("solver.n_start", self.solver.n_start.to_string());
        put("solver.n_ceiling", self.solver.n_ceiling.to_string());
        put("solver.tol", self.solver.tol.to_string());
        if let Some(f) = self.solver.r_floor {
            put("solver.r_floor", f.to_string());
        }
        let g = &self.grid;
        put("grid.r_min", g.r_min.to_string());
        if let Some(v) = g.r_max {
            put("grid.r_max", v.to_string());
        }
        put("grid.r_points", g.r_points.to_string());
        if let Some(v) = g.fp_r_max {
            put("grid.fp_r_max", v.to_string());
        }
        if let Some(v) = g.fp_dr {
            put("grid.fp_dr", v.to_string());
        }
        put("grid.dt", g.dt.to_string());
        put("grid.t_end", g.t_end.to_string());
        let c = &self.command;
        if let Some(n) = c.name {
            put("command.name", n.to_string());
        }
        if let Some(sw) = &c.sweep {
            put("command.sweep", sw.axis.to_string());
            put("command.sweep_values", join(&sw.values));
        }
        put("command.initial_n", join(&c.initial_n));
        if let Some(v) = c.n_plus {
            put("command.n_plus", v.to_string());
        }
        if let Some(v) = c.r_c {
            put("command.r_c", v.to_string());
        }
        put("command.mld_threshold", c.mld_threshold.to_string());
        put("command.alpha_ss_correction", c.alpha_ss_correction.to_string());
        put("command.ld_convention", c.ld_convention.to_string());
        put("command.validate_radii", join(&c.validate_radii));
        put("output.dir", self.output.dir.display().to_string());
        put("output.format", self.output.formats.to_string());
        if let Some(v) = self.output.snapshot_every {
            put("output.snapshot_every", v.to_string());
        }
        put("output.record_every", self.output.record_every.to_string());
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn jump_levels(op: &CMat) -> Option<(usize, usize)> {
    let d = op.nrows();
    for to in 0..d {
        for from in 0..d {
            if op[(to, from)] != C64::new(0.0, 0.0) {
                return Some((from, to));
            }
        }
    }
    None
}

fn missing(key: &str) -> Error {
    Error::Config {
        line: 0,
        message: format!("missing required key `{key}`"),
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

const SCALAR_KEYS: &[&str] = &[
    "qudit.layout",
    "qudit.delta1",
    "qudit.delta2",
    "qudit.omega1",
    "qudit.omega2",
    "qudit.gamma1",
    "qudit.gamma2",
    "qudit.dim",
    "qudit.effective_tls",
    "qudit.tls_decay",
    "oscillator.nu",
    "oscillator.gamma",
    "oscillator.q",
    "oscillator.n_th",
    "oscillator.thermal_heating",
    "oscillator.lambda",
    "oscillator.eta",
    "solver.n_start",
    "solver.n_ceiling",
    "solver.tol",
    "solver.r_floor",
    "grid.r_min",
    "grid.r_max",
    "grid.r_points",
    "grid.fp_r_max",
    "grid.fp_dr",
    "grid.dt",
    "grid.t_end",
    "command.name",
    "command.sweep",
    "command.sweep_values",
    "command.sweep_range",
    "command.initial_n",
    "command.n_plus",
    "command.r_c",
    "command.mld_threshold",
    "command.alpha_ss_correction",
    "command.ld_convention",
    "command.validate_radii",
    "output.dir",
    "output.format",
    "output.snapshot_every",
    "output.record_every",
];

fn known_key(key: &str) -> bool {
    if SCALAR_KEYS.contains(&key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    let index = |s: &str| s.parse::<usize>().is_ok();
    match parts.as_slice() {
        ["qudit", "h" | "v", i, j] => index(i) && index(j),
        ["qudit", "jump", k, "from" | "to" | "rate"] => index(k),
        _ => false,
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn any_in(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.map.keys().any(|k| k.starts_with(&prefix))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|x| err(e.line, format!("`{key}`: cannot parse `{}`: {x}", e.value))),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => number(e.line, key, &e.value).map(Some),
        }
    }

    fn non_negative(&self, key: &str) -> Result<Option<f64>> {
        let v = self.number(key)?;
        if let Some(x) = v {
            if x < 0.0 {
                return Err(err(self.line(key), format!("`{key}` must be non-negative, got {x}")));
            }
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        let v = self.number(key)?;
        if let Some(x) = v {
            if x <= 0.0 {
                return Err(err(self.line(key), format!("`{key}` must be positive, got {x}")));
            }
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => {
                let items: Result<Vec<f64>> = e.value.split(',').map(|s| number(e.line, key, s.trim())).collect();
                let items = items?;
                if items.is_empty() {
                    return Err(err(e.line, format!("`{key}` needs at least one value")));
                }
                Ok(Some(items))
            }
        }
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |e| e.line)
    }
}

fn number(line: usize, key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| err(line, format!("`{key}`: malformed number `{s}`")))?;
    if !v.is_finite() {
        return Err(err(line, format!("`{key}`: value must be finite")));
    }
    Ok(v)
}

fn complex(line: usize, key: &str, s: &str) -> Result<C64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok(C64::new(number(line, key, re)?, 0.0)),
        [re, im] => Ok(C64::new(number(line, key, re)?, number(line, key, im)?)),
        _ => Err(err(line, format!("`{key}`: expected `re` or `re, im`"))),
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `section.key = value`, found `{content}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !known_key(&key) {
            return Err(err(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(err(line, format!("`{key}` has no value")));
        }
        if let Some(prev) = map.get(&key) {
            let prev: &Entry = prev;
            return Err(err(line, format!("`{key}` already set on line {}", prev.line)));
        }
        map.insert(key, Entry { line, value });
    }
    Ok(Entries { map })
}

fn one_of(e: &Entries, a: &str, b: &str) -> Result<()> {
    if e.has(a) && e.has(b) {
        return Err(err(
            e.line(b).max(e.line(a)),
            format!("give only one of `{a}` and `{b}`"),
        ));
    }
    Ok(())
}

fn parse_qudit(e: &Entries, nu: f64) -> Result<Option<QuditSpec>> {
    if !e.any_in("qudit") {
        return Ok(None);
    }
    let layout_line = e.line("qudit.layout");
    let layout: String = e.parse("qudit.layout")?.ok_or_else(|| missing("qudit.layout"))?;
    let freq = |k: &str| -> Result<f64> { Ok(e.number(k)?.unwrap_or(0.0) / nu) };
    let rate = |k: &str| -> Result<f64> { Ok(e.non_negative(k)?.unwrap_or(0.0) / nu) };
    let three = || -> Result<ThreeLevelParams> {
        Ok(ThreeLevelParams {
            delta1: freq("qudit.delta1")?,
            delta2: freq("qudit.delta2")?,
            omega1: freq("qudit.omega1")?,
            omega2: freq("qudit.omega2")?,
            gamma1: rate("qudit.gamma1")?,
            gamma2: rate("qudit.gamma2")?,
        })
    };
    let spec = match layout.as_str() {
        "two_level" => QuditSpec::TwoLevel(TwoLevelParams {
            detuning: freq("qudit.delta1")?,
            rabi: freq("qudit.omega1")?,
            decay: rate("qudit.gamma1")?,
        }),
        "ladder" => QuditSpec::Ladder(three()?),
        "lambda" => QuditSpec::Lambda(three()?),
        "generic" => QuditSpec::Generic(parse_generic(e, nu)?),
        other => {
            return Err(err(
                layout_line,
                format!("unknown layout `{other}` (two_level, ladder, lambda, generic)"),
            ))
        }
    };
    Ok(Some(spec))
}

/// `(from, to, rate, line)` of a jump while its keys are collected.
type PartialJump = (Option<usize>, Option<usize>, Option<f64>, usize);

fn parse_generic(e: &Entries, nu: f64) -> Result<GenericQudit> {
    let dim_line = e.line("qudit.dim");
    let d: usize = e.parse("qudit.dim")?.ok_or_else(|| missing("qudit.dim"))?;
    if !(2..=8).contains(&d) {
        return Err(err(dim_line, format!("`qudit.dim` must be in 2..=8, got {d}")));
    }
    let mut h = CMat::zeros(d, d);
    let mut v = CMat::zeros(d, d);
    let mut jumps: BTreeMap<usize, PartialJump> = BTreeMap::new();
    for (key, entry) in &e.map {
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["qudit", name @ ("h" | "v"), i, j] => {
                let (i, j): (usize, usize) = (i.parse().unwrap_or(usize::MAX), j.parse().unwrap_or(usize::MAX));
                if i >= d || j >= d {
                    return Err(err(entry.line, format!("`{key}` is outside a {d}-level system")));
                }
                let z = complex(entry.line, key, &entry.value)?;
                if *name == "h" {
                    h[(i, j)] = z / nu;
                } else {
                    v[(i, j)] = z;
                }
            }
            ["qudit", "jump", k, field] => {
                let k: usize = k.parse().unwrap_or(usize::MAX);
                let slot = jumps.entry(k).or_insert((None, None, None, entry.line));
                match *field {
                    "rate" => {
                        let r = number(entry.line, key, &entry.value)?;
                        if r < 0.0 {
                            return Err(err(entry.line, format!("`{key}` must be non-negative, got {r}")));
                        }
                        slot.2 = Some(r / nu);
                    }
                    _ => {
                        let lvl: usize = entry
                            .value
                            .parse()
                            .map_err(|_| err(entry.line, format!("`{key}`: expected a level index")))?;
                        if lvl >= d {
                            return Err(err(
                                entry.line,
                                format!("`{key}`: level {lvl} outside a {d}-level system"),
                            ));
                        }
                        if *field == "from" {
                            slot.0 = Some(lvl);
                        } else {
                            slot.1 = Some(lvl);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    let mut list = Vec::new();
    for (k, (from, to, rate, line)) in jumps {
        match (from, to, rate) {
            (Some(f), Some(t), Some(r)) => list.push(Jump::transition(d, f, t, r)),
            _ => return Err(err(line, format!("jump {k} needs `from`, `to` and `rate`"))),
        }
    }
    Ok(GenericQudit {
        hamiltonian: h,
        coupling: v,
        jumps: list,
    })
}

fn parse_oscillator(e: &Entries, nu: f64) -> Result<(Option<OscillatorSpec>, Option<f64>)> {
    if !e.any_in("oscillator") {
        return Ok((None, None));
    }
    one_of(e, "oscillator.gamma", "oscillator.q")?;
    one_of(e, "oscillator.lambda", "oscillator.eta")?;
    one_of(e, "oscillator.n_th", "oscillator.thermal_heating")?;
    let gamma = match (e.non_negative("oscillator.gamma")?, e.positive("oscillator.q")?) {
        (Some(g), None) => g / nu,
        (None, Some(q)) => 1.0 / q,
        _ => return Err(missing("oscillator.gamma` or `oscillator.q")),
    };
    let lambda = match (e.non_negative("oscillator.lambda")?, e.non_negative("oscillator.eta")?) {
        (Some(l), None) => l / nu,
        (None, Some(eta)) => eta,
        _ => return Err(missing("oscillator.lambda` or `oscillator.eta")),
    };
    let heating = e.non_negative("oscillator.thermal_heating")?.map(|h| h / nu);
    let n_th = match (e.non_negative("oscillator.n_th")?, heating) {
        (Some(n), None) => n,
        (None, Some(h)) => {
            if gamma == 0.0 {
                return Err(err(
                    e.line("oscillator.thermal_heating"),
                    "`oscillator.thermal_heating` needs a non-zero damping",
                ));
            }
            h / gamma
        }
        _ => return Err(missing("oscillator.n_th` or `oscillator.thermal_heating")),
    };
    Ok((Some(OscillatorSpec::new(gamma, n_th, lambda)?), heating))
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let e = tokenize(text)?;
    let nu = e.positive("oscillator.nu")?.unwrap_or(1.0);
    let qudit = parse_qudit(&e, nu)?;
    let (oscillator, thermal_heating) = parse_oscillator(&e, nu)?;

    let mut solver = SolverConfig::default();
    if let Some(v) = e.parse::<usize>("solver.n_start")? {
        solver.n_start = v;
    }
    if let Some(v) = e.parse::<usize>("solver.n_ceiling")? {
        solver.n_ceiling = v;
    }
    if solver.n_start == 0 || solver.n_ceiling == 0 {
        return Err(err(
            e.line("solver.n_start").max(e.line("solver.n_ceiling")),
            "harmonic cutoffs must be at least 1",
        ));
    }
    if let Some(v) = e.positive("solver.tol")? {
        solver.tol = v;
    }
    solver.r_floor = e.positive("solver.r_floor")?;

    let mut grid = GridConfig::default();
    if let Some(v) = e.positive("grid.r_min")? {
        grid.r_min = v;
    }
    grid.r_max = e.positive("grid.r_max")?;
    if let Some(hi) = grid.r_max {
        if hi <= grid.r_min {
            return Err(err(e.line("grid.r_max"), "`grid.r_max` must exceed `grid.r_min`"));
        }
    }
    if let Some(v) = e.parse::<usize>("grid.r_points")? {
        if v < 2 {
            return Err(err(e.line("grid.r_points"), "`grid.r_points` must be at least 2"));
        }
        grid.r_points = v;
    }
    grid.fp_r_max = e.positive("grid.fp_r_max")?;
    grid.fp_dr = e.positive("grid.fp_dr")?;
    if let Some(v) = e.positive("grid.dt")? {
        grid.dt = v * nu;
    }
    if let Some(v) = e.non_negative("grid.t_end")? {
        grid.t_end = v * nu;
    }

    let mut command = CommandConfig {
        name: e.parse("command.name")?,
        ..CommandConfig::default()
    };
    one_of(&e, "command.sweep_values", "command.sweep_range")?;
    let axis: Option<SweepAxis> = e.parse("command.sweep")?;
    let values = match (e.list("command.sweep_values")?, e.list("command.sweep_range")?) {
        (Some(v), None) => Some(v),
        (None, Some(r)) => {
            let line = e.line("command.sweep_range");
            match r.as_slice() {
                [lo, hi, n] if *lo > 0.0 && hi > lo && *n >= 2.0 && n.fract() == 0.0 => {
                    Some(crate::rates::log_grid(*lo, *hi, *n as usize))
                }
                _ => {
                    return Err(err(
                        line,
                        "`command.sweep_range` is `lo, hi, count` with 0 < lo < hi, count >= 2",
                    ))
                }
            }
        }
        _ => None,
    };
    command.sweep = match (axis, values) {
        (Some(axis), Some(values)) => {
            let scale = match axis {
                SweepAxis::Gamma => 1.0 / nu,
                _ => 1.0,
            };
            let values: Vec<f64> = values.iter().map(|v| v * scale).collect();
            if values.iter().any(|v| *v < 0.0) {
                return Err(err(e.line("command.sweep"), "sweep values must be non-negative"));
            }
            Some(Sweep { axis, values })
        }
        (None, None) => None,
        (Some(_), None) => return Err(missing("command.sweep_values")),
        (None, Some(_)) => return Err(missing("command.sweep")),
    };
    if let Some(v) = e.list("command.initial_n")? {
        if v.iter().any(|x| *x <= 0.0) {
            return Err(err(e.line("command.initial_n"), "initial excitations must be positive"));
        }
        command.initial_n = v;
    }
    command.n_plus = e.positive("command.n_plus")?;
    command.r_c = e.positive("command.r_c")?;
    if let Some(v) = e.non_negative("command.mld_threshold")? {
        command.mld_threshold = v;
    }
    if let Some(v) = e.parse::<bool>("command.alpha_ss_correction")? {
        command.alpha_ss_correction = v;
    }
    if let Some(v) = e.parse::<LdConvention>("command.ld_convention")? {
        command.ld_convention = v;
    }
    if let Some(v) = e.list("command.validate_radii")? {
        if v.iter().any(|x| *x < 0.0) {
            return Err(err(e.line("command.validate_radii"), "radii must be non-negative"));
        }
        command.validate_radii = v;
    }

    let mut output = OutputConfig::default();
    if let Some(v) = e.get("output.dir") {
        output.dir = PathBuf::from(&v.value);
    }
    if let Some(v) = e.parse::<Formats>("output.format")? {
        output.formats = v;
    }
    output.snapshot_every = e.parse("output.snapshot_every")?;
    if let Some(v) = e.parse::<usize>("output.record_every")? {
        output.record_every = v.max(1);
    }

    let effective_tls = e.parse::<bool>("qudit.effective_tls")?.unwrap_or(false);
    let tls_decay = e.non_negative("qudit.tls_decay")?.map(|v| v / nu);
    if effective_tls && !matches!(qudit, Some(QuditSpec::Ladder(_))) {
        return Err(err(
            e.line("qudit.effective_tls"),
            "`qudit.effective_tls` applies to the ladder layout only",
        ));
    }
    Ok(ScenarioConfig {
        qudit,
        effective_tls,
        tls_decay,
        oscillator,
        thermal_heating,
        solver,
        grid,
        command,
        output,
    })
}
