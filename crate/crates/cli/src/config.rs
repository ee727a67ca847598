//! Scenario configuration: a TOML document with a `scenario` key, a `seed`,
//! and optional `[grid]`, `[physics]`, `[time]`, `[initial]`, `[source]`
//! and `[output]` tables. Missing tables and keys take the defaults of the
//! chosen scenario (see `descent list`).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("unknown scenario {0:?}; run `descent list` for the available kinds")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    AlgebraAudit,
    FreeDescent,
    Chirality,
    MaxwellDescent,
    Coupled,
    SectorVanishing,
}

impl ScenarioKind {
    /// Stable listing order.
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::AlgebraAudit,
        ScenarioKind::FreeDescent,
        ScenarioKind::Chirality,
        ScenarioKind::MaxwellDescent,
        ScenarioKind::Coupled,
        ScenarioKind::SectorVanishing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::AlgebraAudit => "algebra-audit",
            ScenarioKind::FreeDescent => "free-descent",
            ScenarioKind::Chirality => "chirality",
            ScenarioKind::MaxwellDescent => "maxwell-descent",
            ScenarioKind::Coupled => "coupled",
            ScenarioKind::SectorVanishing => "sector-vanishing",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::AlgebraAudit => "Clifford, projection and block-structure residuals over seeded random representations",
            ScenarioKind::FreeDescent => "z-independent 3+1 Dirac run against two independent planar runs",
            ScenarioKind::Chirality => "massless Weyl packet keeps its chirality",
            ScenarioKind::MaxwellDescent => "sourced z-independent Maxwell run against the planar EEB/BBE solvers",
            ScenarioKind::Coupled => "reduced Dirac-Maxwell system with charge and Gauss-law monitors",
            ScenarioKind::SectorVanishing => "one empty sector stays empty under the coupled evolution",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn defaults(self) -> ScenarioConfig {
        let planar = GridSpec {
            points: vec![32, 32],
            lengths: vec![16.0, 16.0],
        };
        let packet = InitialSpec {
            center: [8.0, 8.0],
            width: 1.5,
            momentum: [1.0, 0.5],
            sector: Sector::Plus,
            amplitude: 1.0,
        };
        let base = ScenarioConfig {
            kind: self,
            seed: 1,
            grid: planar.clone(),
            physics: PhysicsSpec { mass: 1.0, charge: 0.0 },
            time: TimeSpec { dt: 0.01, t_final: 2.0 },
            initial: packet.clone(),
            source: SourceSpec::default(),
            output: OutputSpec::default(),
            audit_samples: 100,
        };
        match self {
            ScenarioKind::AlgebraAudit => base,
            ScenarioKind::FreeDescent => ScenarioConfig {
                grid: GridSpec {
                    points: vec![32, 32, 8],
                    lengths: vec![16.0, 16.0, 4.0],
                },
                ..base
            },
            ScenarioKind::Chirality => ScenarioConfig {
                grid: GridSpec {
                    points: vec![32, 32, 8],
                    lengths: vec![16.0, 16.0, 4.0],
                },
                physics: PhysicsSpec { mass: 0.0, charge: 0.0 },
                initial: InitialSpec {
                    sector: Sector::Right,
                    ..packet
                },
                ..base
            },
            ScenarioKind::MaxwellDescent => ScenarioConfig {
                grid: GridSpec {
                    points: vec![32, 32, 4],
                    lengths: vec![16.0, 16.0, 4.0],
                },
                time: TimeSpec { dt: 0.005, t_final: 5.0 },
                initial: InitialSpec {
                    momentum: [0.0, 1.2],
                    sector: Sector::Mixed,
                    ..packet
                },
                source: SourceSpec {
                    width: 1.0,
                    omega: 1.5,
                    in_plane: 0.4,
                    out_of_plane: 0.4,
                },
                ..base
            },
            ScenarioKind::Coupled | ScenarioKind::SectorVanishing => ScenarioConfig {
                physics: PhysicsSpec { mass: 1.0, charge: 0.3 },
                time: TimeSpec { dt: 0.005, t_final: 2.0 },
                initial: InitialSpec {
                    momentum: [0.6, 0.3],
                    ..packet
                },
                ..base
            },
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// `κ³ = +1`
    Plus,
    /// `κ³ = −1`
    Minus,
    /// `γ⁵ = +1`
    Left,
    /// `γ⁵ = −1`
    Right,
    /// No projection.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicsSpec {
    pub mass: f64,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpec {
    pub center: [f64; 2],
    pub width: f64,
    pub momentum: [f64; 2],
    pub sector: Sector,
    /// Field amplitude for Maxwell data; spinors are normalized.
    pub amplitude: f64,
}

/// Current source of the Maxwell scenario; all amplitudes zero means
/// source-free.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SourceSpec {
    pub width: f64,
    pub omega: f64,
    pub in_plane: f64,
    pub out_of_plane: f64,
}

impl SourceSpec {
    pub fn is_off(&self) -> bool {
        self.in_plane == 0.0 && self.out_of_plane == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct OutputSpec {
    /// Relative paths resolve against the output root.
    pub dir: Option<PathBuf>,
    pub plots: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub grid: GridSpec,
    pub physics: PhysicsSpec,
    pub time: TimeSpec,
    pub initial: InitialSpec,
    pub source: SourceSpec,
    pub output: OutputSpec,
    /// Random representations drawn by the algebra audit.
    pub audit_samples: usize,
}

// On-disk form: everything but `scenario` optional.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    seed: Option<u64>,
    grid: Option<RawGrid>,
    physics: Option<RawPhysics>,
    time: Option<RawTime>,
    initial: Option<RawInitial>,
    source: Option<RawSource>,
    output: Option<RawOutput>,
    audit: Option<RawAudit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<Vec<usize>>,
    lengths: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    mass: Option<f64>,
    charge: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    t_final: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    center: Option<[f64; 2]>,
    width: Option<f64>,
    momentum: Option<[f64; 2]>,
    sector: Option<Sector>,
    amplitude: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    width: Option<f64>,
    omega: Option<f64>,
    in_plane: Option<f64>,
    out_of_plane: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    plots: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAudit {
    samples: Option<usize>,
}

fn take<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<config>"),
            source: Box::new(e),
        })?;
        let kind = ScenarioKind::parse(&raw.scenario).ok_or_else(|| ConfigError::UnknownScenario(raw.scenario.clone()))?;
        let mut cfg = kind.defaults();
        take(&mut cfg.seed, raw.seed);
        if let Some(g) = raw.grid {
            take(&mut cfg.grid.points, g.points);
            take(&mut cfg.grid.lengths, g.lengths);
        }
        if let Some(p) = raw.physics {
            take(&mut cfg.physics.mass, p.mass);
            take(&mut cfg.physics.charge, p.charge);
        }
        if let Some(t) = raw.time {
            take(&mut cfg.time.dt, t.dt);
            take(&mut cfg.time.t_final, t.t_final);
        }
        if let Some(i) = raw.initial {
            take(&mut cfg.initial.center, i.center);
            take(&mut cfg.initial.width, i.width);
            take(&mut cfg.initial.momentum, i.momentum);
            take(&mut cfg.initial.sector, i.sector);
            take(&mut cfg.initial.amplitude, i.amplitude);
        }
        if let Some(s) = raw.source {
            take(&mut cfg.source.width, s.width);
            take(&mut cfg.source.omega, s.omega);
            take(&mut cfg.source.in_plane, s.in_plane);
            take(&mut cfg.source.out_of_plane, s.out_of_plane);
        }
        if let Some(o) = raw.output {
            cfg.output.dir = o.dir;
            cfg.output.plots = o.plots;
        }
        if let Some(a) = raw.audit {
            take(&mut cfg.audit_samples, a.samples);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Everything that can be rejected without running is rejected here, so
    /// a config error never leaves partial outputs behind.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        let g = &self.grid;
        if g.points.len() != g.lengths.len() {
            return bad("grid.points and grid.lengths differ in length".into());
        }
        let want_dim = match self.kind {
            ScenarioKind::AlgebraAudit => None,
            ScenarioKind::FreeDescent | ScenarioKind::Chirality | ScenarioKind::MaxwellDescent => Some(3),
            ScenarioKind::Coupled | ScenarioKind::SectorVanishing => Some(2),
        };
        if let Some(d) = want_dim {
            if g.points.len() != d {
                return bad(format!("{} needs a {d}-axis grid, got {}", self.kind, g.points.len()));
            }
        }
        if let Some(&n) = g.points.iter().find(|n| !n.is_power_of_two() || **n < 2) {
            return bad(format!("grid size {n} is not a power of two ≥ 2"));
        }
        if g.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad("grid lengths must be positive".into());
        }
        let t = &self.time;
        if !(t.dt.is_finite() && t.dt > 0.0 && t.t_final.is_finite() && t.t_final > 0.0) {
            return bad("time.dt and time.t_final must be positive".into());
        }
        let steps = t.t_final / t.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!("t_final = {} is not a multiple of dt = {}", t.t_final, t.dt));
        }
        let p = &self.physics;
        if !(p.mass.is_finite() && p.mass >= 0.0) || !p.charge.is_finite() {
            return bad("physics.mass must be ≥ 0 and charge finite".into());
        }
        let i = &self.initial;
        if !(i.width.is_finite() && i.width > 0.0) {
            return bad("initial.width must be positive".into());
        }
        if i.center.iter().chain(&i.momentum).any(|v| !v.is_finite()) || !i.amplitude.is_finite() {
            return bad("initial data must be finite".into());
        }
        let spacing = g.points.iter().zip(&g.lengths).map(|(n, l)| l / *n as f64).fold(f64::INFINITY, f64::min);
        match self.kind {
            ScenarioKind::Chirality => {
                if p.mass != 0.0 {
                    return bad("chirality scenario requires physics.mass = 0".into());
                }
                if !matches!(i.sector, Sector::Left | Sector::Right) {
                    return bad("chirality scenario needs initial.sector = \"left\" or \"right\"".into());
                }
            }
            ScenarioKind::FreeDescent | ScenarioKind::Coupled => {
                if matches!(i.sector, Sector::Left | Sector::Right) {
                    return bad(format!("{} takes sector plus, minus or mixed", self.kind));
                }
            }
            ScenarioKind::SectorVanishing => {
                if i.sector != Sector::Plus {
                    return bad("sector-vanishing starts from initial.sector = \"plus\"".into());
                }
            }
            ScenarioKind::MaxwellDescent => {
                let s = &self.source;
                if !s.is_off() && !(s.width > 0.0 && s.omega.is_finite()) {
                    return bad("source.width must be positive".into());
                }
            }
            ScenarioKind::AlgebraAudit => {
                if self.audit_samples == 0 {
                    return bad("audit.samples must be at least 1".into());
                }
            }
        }
        if matches!(self.kind, ScenarioKind::MaxwellDescent | ScenarioKind::Coupled | ScenarioKind::SectorVanishing)
            && t.dt > descent_core::maxwell::CFL_SAFETY * spacing
        {
            return bad(format!("dt = {} exceeds the CFL bound {}", t.dt, descent_core::maxwell::CFL_SAFETY * spacing));
        }
        Ok(())
    }

    pub fn plots_enabled(&self) -> bool {
        self.output.plots.unwrap_or(true)
    }
}
