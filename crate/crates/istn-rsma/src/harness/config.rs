use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::channel::{ArrayConfig, LinkBudget, PhysicalParams};
use crate::numeric::db_to_linear;
use crate::schemes::{InitPolicy, SchemeConfig};
use crate::signal::SchemeKind;
use crate::subproblem::Budgets;
use crate::{Error, Result};

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    None,
    PsDbw,
    PtDbw,
    Ks,
    Kt,
    KappaDb,
    /// Sets all three XPDs (satellite LOS, satellite NLOS, terrestrial).
    XpdDb,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::PsDbw => "ps_dbw",
            Self::PtDbw => "pt_dbw",
            Self::Ks => "ks",
            Self::Kt => "kt",
            Self::KappaDb => "kappa_db",
            Self::XpdDb => "xpd_db",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::None,
            Self::PsDbw,
            Self::PtDbw,
            Self::Ks,
            Self::Kt,
            Self::KappaDb,
            Self::XpdDb,
        ]
        .into_iter()
        .find(|a| a.name() == s.trim())
        .ok_or_else(|| Error::Config(format!("unknown sweep axis `{s}`")))
    }
}

/// How the transmitter's knowledge of the satellite channels is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CsitMode {
    /// Optimise on sampled fading, evaluate on held-out fading.
    Robust,
    /// Optimise directly on the held-out fading it is evaluated on.
    Perfect,
    Both,
}

impl CsitMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Robust => "robust",
            Self::Perfect => "perfect",
            Self::Both => "both",
        }
    }

    pub(crate) fn modes(self) -> &'static [CsitMode] {
        match self {
            Self::Robust => &[Self::Robust],
            Self::Perfect => &[Self::Perfect],
            Self::Both => &[Self::Robust, Self::Perfect],
        }
    }
}

impl fmt::Display for CsitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CsitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Robust, Self::Perfect, Self::Both]
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown csit mode `{s}`")))
    }
}

/// Named starting points for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Small arrays and ensembles that run in seconds per trial.
    Desk,
    /// Array sizes, user counts and ensemble size of the full-scale study.
    Full,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!("unknown profile `{other}`"))),
        }
    }
}

/// Everything a sweep needs. Serialised as flat `key = value` lines; see
/// [`ScenarioConfig::KEYS`] for the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub nx: usize,
    pub ny: usize,
    /// Base-station antenna pairs.
    pub nt: usize,
    pub ks: usize,
    pub kt: usize,
    pub ps_dbw: f64,
    pub pt_dbw: f64,
    pub fc_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_temperature_k: f64,
    pub altitude_m: f64,
    pub sat_radius_m: f64,
    pub bs_height_m: f64,
    pub bs_radius_m: f64,
    pub kappa_db: f64,
    pub xpd_los_db: f64,
    pub xpd_nlos_db: f64,
    pub xpd_bs_db: f64,
    /// Terrestrial path-loss exponent.
    pub eta: f64,
    /// Fading samples the optimisation averages over.
    pub samples: usize,
    /// Held-out fading samples used for evaluation.
    pub eval_samples: usize,
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeKind>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub csit: CsitMode,
    /// `false` for matched-filter starts, `true` for seeded random starts.
    pub random_init: bool,
    pub nested_warm_start: bool,
    /// Record wall-clock time per run. Off by default so output files are
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::profile(Profile::Desk)
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{s}`"))))
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ScenarioConfig {
    /// Recognised keys, in the order [`ScenarioConfig::to_text`] writes them.
    pub const KEYS: [&'static str; 36] = [
        "nx",
        "ny",
        "nt",
        "ks",
        "kt",
        "ps_dbw",
        "pt_dbw",
        "fc_hz",
        "bandwidth_hz",
        "tx_gain_dbi",
        "rx_gain_dbi",
        "noise_temperature_k",
        "altitude_m",
        "sat_radius_m",
        "bs_height_m",
        "bs_radius_m",
        "kappa_db",
        "xpd_los_db",
        "xpd_nlos_db",
        "xpd_bs_db",
        "eta",
        "samples",
        "eval_samples",
        "epsilon",
        "max_outer_iters",
        "trials",
        "seed",
        "schemes",
        "sweep_axis",
        "sweep_values",
        "csit",
        "init",
        "nested_warm_start",
        "timing",
        "xpd_db",
        "profile",
    ];

    pub fn profile(profile: Profile) -> Self {
        let phys = PhysicalParams::default();
        let desk = Self {
            nx: 2,
            ny: 2,
            nt: 2,
            ks: 4,
            kt: 2,
            ps_dbw: 22.0,
            pt_dbw: 13.0,
            fc_hz: phys.sat_budget.carrier_hz,
            bandwidth_hz: phys.sat_budget.bandwidth_hz,
            tx_gain_dbi: phys.sat_budget.tx_gain_dbi,
            rx_gain_dbi: phys.sat_budget.rx_gain_dbi,
            noise_temperature_k: phys.sat_budget.noise_temperature_k,
            altitude_m: phys.altitude_m,
            sat_radius_m: phys.sat_radius_m,
            bs_height_m: phys.bs_height_m,
            bs_radius_m: phys.bs_radius_m,
            kappa_db: phys.kappa_db,
            xpd_los_db: phys.xpd_los_db,
            xpd_nlos_db: phys.xpd_nlos_db,
            xpd_bs_db: phys.xpd_bs_db,
            eta: phys.bs_pathloss_exponent,
            samples: 50,
            eval_samples: 200,
            epsilon: 1e-4,
            max_outer_iters: 300,
            trials: 30,
            seed: 1,
            schemes: SchemeKind::ALL.to_vec(),
            sweep_axis: SweepAxis::PsDbw,
            sweep_values: vec![10.0, 16.0, 22.0],
            csit: CsitMode::Robust,
            random_init: false,
            nested_warm_start: true,
            timing: false,
        };
        match profile {
            Profile::Desk => desk,
            Profile::Full => Self {
                nx: 4,
                ny: 4,
                nt: 6,
                ks: 8,
                kt: 4,
                samples: 1000,
                eval_samples: 1000,
                epsilon: 1e-6,
                ..desk
            },
        }
    }

    /// Applies one `key = value` assignment. `xpd_db` sets all three XPDs
    /// and `profile` resets every key to the named profile.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "nx" => self.nx = parse_value(key, value)?,
            "ny" => self.ny = parse_value(key, value)?,
            "nt" => self.nt = parse_value(key, value)?,
            "ks" => self.ks = parse_value(key, value)?,
            "kt" => self.kt = parse_value(key, value)?,
            "ps_dbw" => self.ps_dbw = parse_value(key, value)?,
            "pt_dbw" => self.pt_dbw = parse_value(key, value)?,
            "fc_hz" => self.fc_hz = parse_value(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_value(key, value)?,
            "tx_gain_dbi" => self.tx_gain_dbi = parse_value(key, value)?,
            "rx_gain_dbi" => self.rx_gain_dbi = parse_value(key, value)?,
            "noise_temperature_k" => self.noise_temperature_k = parse_value(key, value)?,
            "altitude_m" => self.altitude_m = parse_value(key, value)?,
            "sat_radius_m" => self.sat_radius_m = parse_value(key, value)?,
            "bs_height_m" => self.bs_height_m = parse_value(key, value)?,
            "bs_radius_m" => self.bs_radius_m = parse_value(key, value)?,
            "kappa_db" => self.kappa_db = parse_value(key, value)?,
            "xpd_los_db" => self.xpd_los_db = parse_value(key, value)?,
            "xpd_nlos_db" => self.xpd_nlos_db = parse_value(key, value)?,
            "xpd_bs_db" => self.xpd_bs_db = parse_value(key, value)?,
            "xpd_db" => {
                let v = parse_value(key, value)?;
                self.xpd_los_db = v;
                self.xpd_nlos_db = v;
                self.xpd_bs_db = v;
            }
            "eta" => self.eta = parse_value(key, value)?,
            "samples" => self.samples = parse_value(key, value)?,
            "eval_samples" => self.eval_samples = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "max_outer_iters" => self.max_outer_iters = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "schemes" => self.schemes = parse_list(key, value)?,
            "sweep_axis" => self.sweep_axis = value.parse()?,
            "sweep_values" => self.sweep_values = parse_list(key, value)?,
            "csit" => self.csit = value.parse()?,
            "init" => {
                self.random_init = match value.trim() {
                    "matched_filter" | "mf" => false,
                    "random" => true,
                    other => return Err(Error::Config(format!("init: unknown policy `{other}`"))),
                }
            }
            "nested_warm_start" => self.nested_warm_start = parse_value(key, value)?,
            "timing" => self.timing = parse_value(key, value)?,
            "profile" => *self = Self::profile(value.parse()?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(key, value)
    }

    /// Parses a config file on top of the desk profile. Blank lines and lines
    /// starting with `#` are ignored; a `profile` line resets everything set
    /// before it.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    /// Writes every key so that [`ScenarioConfig::from_text`] reproduces
    /// `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("nt", self.nt.to_string());
        kv("ks", self.ks.to_string());
        kv("kt", self.kt.to_string());
        kv("ps_dbw", self.ps_dbw.to_string());
        kv("pt_dbw", self.pt_dbw.to_string());
        kv("fc_hz", self.fc_hz.to_string());
        kv("bandwidth_hz", self.bandwidth_hz.to_string());
        kv("tx_gain_dbi", self.tx_gain_dbi.to_string());
        kv("rx_gain_dbi", self.rx_gain_dbi.to_string());
        kv("noise_temperature_k", self.noise_temperature_k.to_string());
        kv("altitude_m", self.altitude_m.to_string());
        kv("sat_radius_m", self.sat_radius_m.to_string());
        kv("bs_height_m", self.bs_height_m.to_string());
        kv("bs_radius_m", self.bs_radius_m.to_string());
        kv("kappa_db", self.kappa_db.to_string());
        kv("xpd_los_db", self.xpd_los_db.to_string());
        kv("xpd_nlos_db", self.xpd_nlos_db.to_string());
        kv("xpd_bs_db", self.xpd_bs_db.to_string());
        kv("eta", self.eta.to_string());
        kv("samples", self.samples.to_string());
        kv("eval_samples", self.eval_samples.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("max_outer_iters", self.max_outer_iters.to_string());
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("schemes", join(&self.schemes));
        kv("sweep_axis", self.sweep_axis.to_string());
        kv("sweep_values", join(&self.sweep_values));
        kv("csit", self.csit.to_string());
        kv("init", if self.random_init { "random" } else { "matched_filter" }.into());
        kv("nested_warm_start", self.nested_warm_start.to_string());
        kv("timing", self.timing.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.schemes.is_empty() {
            return fail("scheme list is empty".into());
        }
        if self.ks % 2 != 0 || self.kt % 2 != 0 {
            return fail(format!(
                "user counts must be even so each polarization gets half (ks = {}, kt = {})",
                self.ks, self.kt
            ));
        }
        if self.ks + self.kt == 0 {
            return fail("no users".into());
        }
        if self.nx == 0 || self.ny == 0 || self.nt == 0 {
            return fail("antenna counts must be positive".into());
        }
        if self.samples == 0 || self.eval_samples == 0 {
            return fail("ensembles need at least one sample".into());
        }
        if self.trials == 0 {
            return fail("at least one trial is required".into());
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_values.is_empty() {
            return fail(format!("sweep over {} has no values", self.sweep_axis));
        }
        let positive = [
            ("fc_hz", self.fc_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_temperature_k", self.noise_temperature_k),
            ("altitude_m", self.altitude_m),
            ("sat_radius_m", self.sat_radius_m),
            ("bs_radius_m", self.bs_radius_m),
            ("eta", self.eta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite"));
            }
        }
        if self.bs_radius_m >= self.sat_radius_m {
            return fail("the cell must lie inside the satellite footprint".into());
        }
        if matches!(self.sweep_axis, SweepAxis::Ks | SweepAxis::Kt) {
            for &v in &self.sweep_values {
                if v < 0.0 || v.fract() != 0.0 || (v as usize) % 2 != 0 {
                    return fail(format!("{} sweep value {v} is not an even count", self.sweep_axis));
                }
            }
        }
        self.scheme_config().validate()
    }

    /// Sweep points; a single point at the configured values when there is
    /// no sweep axis.
    pub fn sweep_points(&self) -> Vec<f64> {
        match self.sweep_axis {
            SweepAxis::None => vec![0.0],
            _ => self.sweep_values.clone(),
        }
    }

    /// The configuration at one sweep point.
    pub fn at_point(&self, value: f64) -> Self {
        let mut cfg = self.clone();
        match self.sweep_axis {
            SweepAxis::None => {}
            SweepAxis::PsDbw => cfg.ps_dbw = value,
            SweepAxis::PtDbw => cfg.pt_dbw = value,
            SweepAxis::Ks => cfg.ks = value as usize,
            SweepAxis::Kt => cfg.kt = value as usize,
            SweepAxis::KappaDb => cfg.kappa_db = value,
            SweepAxis::XpdDb => {
                cfg.xpd_los_db = value;
                cfg.xpd_nlos_db = value;
                cfg.xpd_bs_db = value;
            }
        }
        cfg
    }

    pub fn physical(&self) -> PhysicalParams {
        let budget = LinkBudget {
            tx_gain_dbi: self.tx_gain_dbi,
            rx_gain_dbi: self.rx_gain_dbi,
            carrier_hz: self.fc_hz,
            bandwidth_hz: self.bandwidth_hz,
            noise_temperature_k: self.noise_temperature_k,
        };
        PhysicalParams {
            array: ArrayConfig { nx: self.nx, ny: self.ny },
            bs_antennas: self.nt,
            altitude_m: self.altitude_m,
            sat_radius_m: self.sat_radius_m,
            bs_radius_m: self.bs_radius_m,
            bs_height_m: self.bs_height_m,
            sat_budget: budget,
            bs_budget: budget,
            bs_pathloss_exponent: self.eta,
            kappa_db: self.kappa_db,
            xpd_los_db: self.xpd_los_db,
            xpd_nlos_db: self.xpd_nlos_db,
            xpd_bs_db: self.xpd_bs_db,
        }
    }

    pub fn budgets(&self) -> Budgets {
        Budgets {
            sat: db_to_linear(self.ps_dbw),
            bs: db_to_linear(self.pt_dbw),
        }
    }

    /// Scheme settings; a random start uses `init_seed`.
    pub fn scheme_config_with_seed(&self, init_seed: u64) -> SchemeConfig {
        SchemeConfig {
            max_outer_iters: self.max_outer_iters,
            epsilon: self.epsilon,
            init: if self.random_init {
                InitPolicy::Random(init_seed)
            } else {
                InitPolicy::MatchedFilter
            },
            nested_warm_start: self.nested_warm_start,
            ..SchemeConfig::default()
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        self.scheme_config_with_seed(self.seed)
    }
}
