//! Run configuration: a TOML document with one table per concern, fully
//! resolved against defaults, with `--set key=value` overrides and a content
//! checksum.
//!
//! ```toml
//! [beam]
//! U = 700.0
//! k = 0.0
//!
//! [integrator]
//! sample_dt = 1e-3
//! ```
//!
//! Unknown tables or keys are rejected. Every key has a default, so an empty
//! document is a valid configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{BeamConfig, InitialData, Pressure};
use crate::error::{Error, Result};
use crate::experiments::{
    Continuation, ContinuationParameter, LimitCycleOptions, SteadyOptions, SweepAxis, SweepOptions, SweepOutputs,
    UcritOptions,
};
use crate::integrator::{IntegratorConfig, Scheme};
use crate::DEFAULT_CELLS;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSection {
    pub ell: f64,
    pub n_cells: usize,
    pub k: f64,
    pub mu: f64,
    #[serde(rename = "U")]
    pub velocity: f64,
    /// 0 for the linear model, 1 for the Berger model.
    pub lambda: u8,
    pub b: f64,
    pub b0: f64,
    /// Uniform load; ignored when `p_profile` is non-empty.
    pub p: f64,
    /// Load sampled uniformly on `[0, ell]`, end points included.
    pub p_profile: Vec<f64>,
    /// `parabolic-velocity` or `samples`.
    pub init: String,
    pub init_amplitude: f64,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

impl Default for BeamSection {
    fn default() -> Self {
        BeamSection {
            ell: 1.0,
            n_cells: DEFAULT_CELLS,
            k: 0.0,
            mu: 1.0,
            velocity: 0.0,
            lambda: 0,
            b: 0.0,
            b0: 0.0,
            p: 0.0,
            p_profile: Vec::new(),
            init: "parabolic-velocity".into(),
            init_amplitude: 10.0,
            u0: Vec::new(),
            u1: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub scheme: String,
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub sample_dt: f64,
    pub overflow_guard: f64,
    pub refactor_threshold: f64,
}

impl From<&IntegratorConfig> for IntegratorSection {
    fn from(c: &IntegratorConfig) -> Self {
        IntegratorSection {
            scheme: c.scheme.as_str().into(),
            rtol: c.rtol,
            atol: c.atol,
            dt_init: c.dt_init,
            dt_min: c.dt_min,
            dt_max: c.dt_max,
            newton_tol: c.newton_tol,
            newton_max_iters: c.newton_max_iters,
            sample_dt: c.sample_dt,
            overflow_guard: c.overflow_guard,
            refactor_threshold: c.refactor_threshold,
        }
    }
}

impl Default for IntegratorSection {
    fn default() -> Self {
        (&IntegratorConfig::default()).into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub t_end: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { t_end: 1.0 }
    }
}

/// Probe runs use the `[integrator]` settings except for the scheme and
/// tolerances given here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UcritSection {
    #[serde(rename = "U_lo")]
    pub u_lo: f64,
    #[serde(rename = "U_hi")]
    pub u_hi: f64,
    #[serde(rename = "tol_U")]
    pub tol_u: f64,
    pub horizon: f64,
    pub window: f64,
    pub band: f64,
    pub scheme: String,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for UcritSection {
    fn default() -> Self {
        let d = UcritOptions::default();
        UcritSection {
            u_lo: d.u_lo,
            u_hi: d.u_hi,
            tol_u: d.tol_u,
            horizon: d.horizon,
            window: d.window,
            band: d.band,
            scheme: d.integrator.scheme.as_str().into(),
            rtol: d.integrator.rtol,
            atol: d.integrator.atol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadySection {
    pub tol: f64,
    pub max_iters: usize,
    /// `none`, `b` or `U`.
    pub continuation: String,
    pub continuation_start: f64,
    pub continuation_step: f64,
    pub continuation_min_step: f64,
    /// `zero` or `sin2` (the shape `sin^2(pi x / ell)`).
    pub guess: String,
    pub confirm: bool,
    pub confirm_horizon: f64,
    pub perturbation: f64,
    pub scheme: String,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SteadySection {
    fn default() -> Self {
        let d = SteadyOptions::default();
        let c = Continuation::in_b();
        SteadySection {
            tol: d.tol,
            max_iters: d.max_iters,
            continuation: "b".into(),
            continuation_start: c.start,
            continuation_step: c.step,
            continuation_min_step: c.min_step,
            guess: "zero".into(),
            confirm: d.confirm,
            confirm_horizon: d.confirm_horizon,
            perturbation: d.perturbation,
            scheme: d.integrator.scheme.as_str().into(),
            rtol: d.integrator.rtol,
            atol: d.integrator.atol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitCycleSection {
    pub t_end: f64,
    pub tail_fraction: f64,
    pub rel_tol: f64,
    pub amplitude_floor: f64,
    pub min_extrema: usize,
    pub scheme: String,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for LimitCycleSection {
    fn default() -> Self {
        let d = LimitCycleOptions::default();
        LimitCycleSection {
            t_end: 10.0,
            tail_fraction: d.tail_fraction,
            rel_tol: d.rel_tol,
            amplitude_floor: d.amplitude_floor,
            min_extrema: d.min_extrema,
            scheme: Scheme::Bdf2.as_str().into(),
            rtol: 1e-4,
            atol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// `U`, `k`, `b` or `b0`.
    pub axis: String,
    pub values: Vec<f64>,
    pub horizon: f64,
    pub window: f64,
    pub band: f64,
    pub cycle: bool,
    pub trace: bool,
    pub scheme: String,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepOptions::default();
        SweepSection {
            axis: "U".into(),
            values: Vec::new(),
            horizon: d.horizon,
            window: d.window,
            band: d.band,
            cycle: d.outputs.cycle,
            trace: d.outputs.trace,
            scheme: d.integrator.scheme.as_str().into(),
            rtol: d.integrator.rtol,
            atol: d.integrator.atol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub tool_version: String,
    pub checksum: String,
}

/// The configurable part of a manifest, as it appears in a file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub beam: BeamSection,
    pub integrator: IntegratorSection,
    pub simulate: SimulateSection,
    pub ucrit: UcritSection,
    pub steady: SteadySection,
    pub limit_cycle: LimitCycleSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub settings: Settings,
    pub tool_version: String,
    /// SHA-256 of the canonical TOML form of `settings`.
    pub checksum: String,
}

// what gets written: settings plus the meta table
#[derive(Serialize, Deserialize)]
struct Document {
    meta: Option<Meta>,
    #[serde(flatten)]
    settings: Settings,
}

fn parse_scheme(key: &str, s: &str) -> Result<Scheme> {
    Scheme::parse(s).ok_or_else(|| Error::param(key, format!("unknown scheme `{s}` (average-acceleration, bdf2)")))
}

fn checksum(settings: &Settings) -> String {
    let text = toml::to_string(settings).expect("settings always serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunManifest {
    pub fn new(settings: Settings) -> Result<Self> {
        let m = RunManifest {
            checksum: checksum(&settings),
            settings,
            tool_version: TOOL_VERSION.to_string(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Defaults for everything.
    pub fn defaults() -> Self {
        RunManifest::new(Settings::default()).expect("defaults are valid")
    }

    /// Parse a document, apply `overrides` (`key=value`, where `key` is
    /// `table.key` or a bare key found in exactly one table), fill in
    /// defaults, and validate.
    pub fn parse_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let meta = table.remove("meta");
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let settings: Settings = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut m = RunManifest::new(settings)?;
        if let Some(meta) = meta {
            let meta: Meta = meta.try_into().map_err(|e: toml::de::Error| Error::Config(format!("meta: {}", e.message())))?;
            m.tool_version = meta.tool_version;
        }
        Ok(m)
    }

    /// Read `path` (or start from defaults when `None`) and apply overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        RunManifest::parse_str(&text, overrides)
    }

    /// Canonical TOML form, `[meta]` first.
    pub fn emit(&self) -> String {
        let doc = Document {
            meta: Some(Meta {
                tool_version: self.tool_version.clone(),
                checksum: self.checksum.clone(),
            }),
            settings: self.settings.clone(),
        };
        toml::to_string(&doc).expect("manifest always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.beam_config()?.validate()?;
        let s = &self.settings;
        if s.beam.n_cells < crate::mesh::MIN_CELLS {
            return Err(Error::param("n_cells", format!("must be at least {}", crate::mesh::MIN_CELLS)));
        }
        self.integrator()?.validate()?;
        if !(s.simulate.t_end > 0.0) {
            return Err(Error::param("t_end", "must be positive"));
        }
        self.ucrit_options()?;
        self.steady_options()?;
        self.limit_cycle_options()?;
        self.sweep_options()?;
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.settings.beam.n_cells
    }

    pub fn beam_config(&self) -> Result<BeamConfig> {
        let b = &self.settings.beam;
        let berger = match b.lambda {
            0 => false,
            1 => true,
            _ => return Err(Error::param("lambda", "must be 0 or 1")),
        };
        let pressure = if b.p_profile.is_empty() {
            Pressure::Uniform(b.p)
        } else {
            Pressure::Profile(b.p_profile.clone())
        };
        let init = match b.init.as_str() {
            "parabolic-velocity" => InitialData::ParabolicVelocity {
                amplitude: b.init_amplitude,
            },
            "samples" => InitialData::Samples {
                u0: b.u0.clone(),
                u1: b.u1.clone(),
            },
            other => {
                return Err(Error::param(
                    "init",
                    format!("unknown initial data `{other}` (parabolic-velocity, samples)"),
                ))
            }
        };
        let cfg = BeamConfig {
            ell: b.ell,
            k: b.k,
            mu: b.mu,
            velocity: b.velocity,
            berger,
            b: b.b,
            b0: b.b0,
            pressure,
            init,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let i = &self.settings.integrator;
        let cfg = IntegratorConfig {
            scheme: parse_scheme("scheme", &i.scheme)?,
            rtol: i.rtol,
            atol: i.atol,
            dt_init: i.dt_init,
            dt_min: i.dt_min,
            dt_max: i.dt_max,
            newton_tol: i.newton_tol,
            newton_max_iters: i.newton_max_iters,
            sample_dt: i.sample_dt,
            overflow_guard: i.overflow_guard,
            refactor_threshold: i.refactor_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn derived_integrator(&self, key: &str, scheme: &str, rtol: f64, atol: f64) -> Result<IntegratorConfig> {
        let mut c = self.integrator()?;
        c.scheme = parse_scheme(&format!("{key}.scheme"), scheme)?;
        c.rtol = rtol;
        c.atol = atol;
        c.validate().map_err(|e| match e {
            Error::InvalidParameter { key: k, reason } => Error::InvalidParameter {
                key: format!("{key}.{k}"),
                reason,
            },
            e => e,
        })?;
        Ok(c)
    }

    pub fn ucrit_options(&self) -> Result<UcritOptions> {
        let u = &self.settings.ucrit;
        Ok(UcritOptions {
            u_lo: u.u_lo,
            u_hi: u.u_hi,
            tol_u: u.tol_u,
            horizon: u.horizon,
            window: u.window,
            band: u.band,
            integrator: self.derived_integrator("ucrit", &u.scheme, u.rtol, u.atol)?,
        })
    }

    pub fn steady_options(&self) -> Result<SteadyOptions> {
        let s = &self.settings.steady;
        let continuation = match s.continuation.as_str() {
            "none" => None,
            other => {
                let parameter = ContinuationParameter::parse(other).ok_or_else(|| {
                    Error::param("continuation", format!("unknown parameter `{other}` (none, b, U)"))
                })?;
                if !(s.continuation_step > 0.0 && s.continuation_min_step > 0.0) {
                    return Err(Error::param("continuation_step", "step sizes must be positive"));
                }
                Some(Continuation {
                    parameter,
                    start: s.continuation_start,
                    step: s.continuation_step,
                    min_step: s.continuation_min_step,
                })
            }
        };
        if !matches!(s.guess.as_str(), "zero" | "sin2") {
            return Err(Error::param("guess", format!("unknown guess `{}` (zero, sin2)", s.guess)));
        }
        if !(s.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        Ok(SteadyOptions {
            tol: s.tol,
            max_iters: s.max_iters,
            continuation,
            confirm: s.confirm,
            confirm_horizon: s.confirm_horizon,
            perturbation: s.perturbation,
            integrator: self.derived_integrator("steady", &s.scheme, s.rtol, s.atol)?,
        })
    }

    pub fn limit_cycle_options(&self) -> Result<(LimitCycleOptions, IntegratorConfig)> {
        let l = &self.settings.limit_cycle;
        if !(l.t_end > 0.0) {
            return Err(Error::param("limit_cycle.t_end", "must be positive"));
        }
        if !(l.tail_fraction > 0.0 && l.tail_fraction <= 1.0) {
            return Err(Error::param("tail_fraction", "must lie in (0, 1]"));
        }
        let opts = LimitCycleOptions {
            tail_fraction: l.tail_fraction,
            rel_tol: l.rel_tol,
            amplitude_floor: l.amplitude_floor,
            min_extrema: l.min_extrema,
        };
        Ok((opts, self.derived_integrator("limit_cycle", &l.scheme, l.rtol, l.atol)?))
    }

    pub fn sweep_axis(&self) -> Result<SweepAxis> {
        let a = &self.settings.sweep.axis;
        SweepAxis::parse(a).ok_or_else(|| Error::param("axis", format!("unknown axis `{a}` (U, k, b, b0)")))
    }

    pub fn sweep_options(&self) -> Result<SweepOptions> {
        let s = &self.settings.sweep;
        self.sweep_axis()?;
        if let Some(v) = s.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite entry {v}")));
        }
        if !(s.horizon > 0.0) {
            return Err(Error::param("sweep.horizon", "must be positive"));
        }
        Ok(SweepOptions {
            horizon: s.horizon,
            window: s.window,
            band: s.band,
            cycle: LimitCycleOptions {
                tail_fraction: self.settings.limit_cycle.tail_fraction,
                rel_tol: self.settings.limit_cycle.rel_tol,
                amplitude_floor: self.settings.limit_cycle.amplitude_floor,
                min_extrema: self.settings.limit_cycle.min_extrema,
            },
            outputs: SweepOutputs {
                cycle: s.cycle,
                trace: s.trace,
            },
            integrator: self.derived_integrator("sweep", &s.scheme, s.rtol, s.atol)?,
        })
    }
}

/// Apply one `key=value` override to a raw document.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let (section, field) = match key.split_once('.') {
        Some((s, f)) => (s.to_string(), f.to_string()),
        None => (find_section(key)?.to_string(), key.to_string()),
    };
    // parse as a TOML value; anything that is not one is taken as a string
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = doc
        .entry(section.clone())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field, value);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a table"))),
    }
}

/// The table holding a bare key, if exactly one does.
fn find_section(key: &str) -> Result<&'static str> {
    let defaults = toml::Value::try_from(Settings::default()).expect("settings always serialize");
    let tables = defaults.as_table().expect("settings serialize to a table");
    let hits: Vec<&'static str> = SECTIONS
        .iter()
        .copied()
        .filter(|s| tables.get(*s).and_then(|t| t.as_table()).is_some_and(|t| t.contains_key(key)))
        .collect();
    match hits.as_slice() {
        [one] => Ok(one),
        [] => Err(Error::Config(format!("unknown key `{key}`"))),
        many => Err(Error::Config(format!(
            "key `{key}` is ambiguous; qualify it as one of {}",
            many.iter().map(|s| format!("{s}.{key}")).collect::<Vec<_>>().join(", ")
        ))),
    }
}

const SECTIONS: [&str; 7] = ["beam", "integrator", "simulate", "ucrit", "steady", "limit_cycle", "sweep"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let m = RunManifest::parse_str("", &[]).unwrap();
        assert_eq!(m, RunManifest::defaults());
        let cfg = m.beam_config().unwrap();
        assert_eq!((cfg.ell, cfg.mu, cfg.velocity, cfg.k), (1.0, 1.0, 0.0, 0.0));
        assert_eq!(m.n_cells(), 100);
        assert_eq!(cfg.init, InitialData::ParabolicVelocity { amplitude: 10.0 });
    }

    #[test]
    fn overrides_change_checksum() {
        let base = RunManifest::defaults();
        let m = RunManifest::parse_str("", &["U=700".into(), "k=0".into()]).unwrap();
        assert_eq!(m.settings.beam.velocity, 700.0);
        assert_ne!(m.checksum, base.checksum);
        let q = RunManifest::parse_str("", &["beam.U = 700".into()]).unwrap();
        assert_eq!(q.checksum, m.checksum);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunManifest::parse_str("[beam]\nb0 = -1.0\n", &[]).unwrap_err();
        assert!(e.to_string().contains("b0"), "{e}");
        let e = RunManifest::parse_str("[beam]\nbogus = 1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RunManifest::parse_str("[beam]\nk = \"fast\"\n", &[]).unwrap_err();
        assert!(e.to_string().contains("invalid type"), "{e}");
        let e = RunManifest::parse_str("", &["rtol=1e-3".into()]).unwrap_err();
        assert!(e.to_string().contains("ambiguous"), "{e}");
        let e = RunManifest::parse_str("[nope]\n", &[]).unwrap_err();
        assert!(e.to_string().contains("nope"), "{e}");
    }

    #[test]
    fn bare_strings_in_overrides() {
        let m = RunManifest::parse_str("", &["integrator.scheme=bdf2".into()]).unwrap();
        assert_eq!(m.integrator().unwrap().scheme, Scheme::Bdf2);
    }

    #[test]
    fn emit_parse_round_trip() {
        let m = RunManifest::parse_str(
            "[beam]\nlambda = 1\nb = 50.0\np_profile = [0.0, 0.5, 1.0]\n[sweep]\naxis = \"k\"\nvalues = [0.0, 0.1, 1.0]\n",
            &[],
        )
        .unwrap();
        let back = RunManifest::parse_str(&m.emit(), &[]).unwrap();
        assert_eq!(back, m);
    }
}
