//! Flat `key = value` run configuration.
//!
//! Floats are written in Rust's shortest round-trip form, so
//! `parse(render(cfg)) == cfg` bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub box_length: f64,
    pub c: [f64; 2],
    pub omega: f64,
    pub tol_fixed_point: f64,
    pub tol_krylov: f64,
    pub tol_ground_state: f64,
    pub max_iter: usize,
    pub c_cap: f64,
    pub dealias: bool,
    pub newton_accel: bool,
    pub output: PathBuf,
    pub seed: u64,
    pub evolve_t: f64,
    pub evolve_dt: f64,
    pub snap_every: usize,
    pub expand_k: usize,
    pub expand_r_min: f64,
    pub expand_r_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 256,
            box_length: 40.0,
            c: [0.1, 0.0],
            omega: 1.0,
            tol_fixed_point: 1e-10,
            tol_krylov: 1e-12,
            tol_ground_state: 1e-8,
            max_iter: 200,
            c_cap: 0.5,
            dealias: false,
            newton_accel: false,
            output: PathBuf::from("out"),
            seed: 1,
            evolve_t: 10.0,
            evolve_dt: 1e-3,
            snap_every: 0,
            expand_k: 3,
            expand_r_min: 6.0,
            expand_r_max: 18.0,
        }
    }
}

pub const KEYS: [&str; 19] = [
    "n",
    "box",
    "c",
    "omega",
    "tol.fixed_point",
    "tol.krylov",
    "tol.ground_state",
    "max_iter",
    "c_cap",
    "dealias",
    "newton_accel",
    "output",
    "seed",
    "evolve.t",
    "evolve.dt",
    "evolve.snap_every",
    "expand.k",
    "expand.r_min",
    "expand.r_max",
];

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("bad value for {key}: {value:?}"))
}

fn float(key: &str, value: &str) -> Result<f64, CliError> {
    value.parse::<f64>().map_err(|_| bad(key, value))
}

fn int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse::<T>().map_err(|_| bad(key, value))
}

fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

/// `"0.1"` is `(0.1, 0)`; `"0.1,0.05"` is a vector.
pub fn parse_speed(value: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a] => Ok([float("c", a)?, 0.0]),
        [a, b] => Ok([float("c", a)?, float("c", b)?]),
        _ => Err(bad("c", value)),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "n" => self.n = int(key, v)?,
            "box" => self.box_length = float(key, v)?,
            "c" => self.c = parse_speed(v)?,
            "omega" => self.omega = float(key, v)?,
            "tol.fixed_point" => self.tol_fixed_point = float(key, v)?,
            "tol.krylov" => self.tol_krylov = float(key, v)?,
            "tol.ground_state" => self.tol_ground_state = float(key, v)?,
            "max_iter" => self.max_iter = int(key, v)?,
            "c_cap" => self.c_cap = float(key, v)?,
            "dealias" => self.dealias = boolean(key, v)?,
            "newton_accel" => self.newton_accel = boolean(key, v)?,
            "output" => self.output = PathBuf::from(v),
            "seed" => self.seed = int(key, v)?,
            "evolve.t" => self.evolve_t = float(key, v)?,
            "evolve.dt" => self.evolve_dt = float(key, v)?,
            "evolve.snap_every" => self.snap_every = int(key, v)?,
            "expand.k" => self.expand_k = int(key, v)?,
            "expand.r_min" => self.expand_r_min = float(key, v)?,
            "expand.r_max" => self.expand_r_max = float(key, v)?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// `key = value` override as given on the command line.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(k, v)
    }

    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("n", self.n.to_string());
        m.insert("box", format!("{:?}", self.box_length));
        m.insert("c", format!("{:?},{:?}", self.c[0], self.c[1]));
        m.insert("omega", format!("{:?}", self.omega));
        m.insert("tol.fixed_point", format!("{:?}", self.tol_fixed_point));
        m.insert("tol.krylov", format!("{:?}", self.tol_krylov));
        m.insert("tol.ground_state", format!("{:?}", self.tol_ground_state));
        m.insert("max_iter", self.max_iter.to_string());
        m.insert("c_cap", format!("{:?}", self.c_cap));
        m.insert("dealias", self.dealias.to_string());
        m.insert("newton_accel", self.newton_accel.to_string());
        m.insert("output", self.output.display().to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("evolve.t", format!("{:?}", self.evolve_t));
        m.insert("evolve.dt", format!("{:?}", self.evolve_dt));
        m.insert("evolve.snap_every", self.snap_every.to_string());
        m.insert("expand.k", self.expand_k.to_string());
        m.insert("expand.r_min", format!("{:?}", self.expand_r_min));
        m.insert("expand.r_max", format!("{:?}", self.expand_r_max));
        m
    }

    pub fn render(&self) -> String {
        let entries = self.entries();
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", entries[key]);
        }
        out
    }

    /// Parses a config file on top of the defaults. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.apply_assignment(line)
                .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("box", self.box_length),
            ("omega", self.omega),
            ("tol.fixed_point", self.tol_fixed_point),
            ("tol.krylov", self.tol_krylov),
            ("tol.ground_state", self.tol_ground_state),
            ("c_cap", self.c_cap),
            ("evolve.t", self.evolve_t),
            ("evolve.dt", self.evolve_dt),
        ];
        for (k, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("{k} must be positive and finite, got {v}")));
            }
        }
        let speed = self.speed();
        if !(speed < 1.0) {
            return Err(CliError::Config(format!("|c| = {speed} must be < 1")));
        }
        if self.n < 8 || self.n % 2 != 0 {
            return Err(CliError::Config(format!("n must be even and at least 8, got {}", self.n)));
        }
        if !(self.expand_r_min < self.expand_r_max) {
            return Err(CliError::Config("expand.r_min must be below expand.r_max".into()));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.c[0].hypot(self.c[1])
    }
}
