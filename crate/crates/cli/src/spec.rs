//! Run specification: TOML config file with full flag overrides.
//! Unknown keys are rejected by name; every invariant failure names the
//! offending field.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use freewave_core::config::{Depth, DnoGraphSettings, FluidConfig, MAX_EXPANSION_ORDER};
use freewave_core::dynamics::{Chart, RhsSettings};
use freewave_core::integrate::{Scheme, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Dispersion,
    Gradcheck,
    DnoTest,
    Equivalence,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Experiment::Simulate => "simulate",
            Experiment::Dispersion => "dispersion",
            Experiment::Gradcheck => "gradcheck",
            Experiment::DnoTest => "dno-test",
            Experiment::Equivalence => "equivalence",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone)]
pub enum InitialRecipe {
    Cosine { a: f64, k: f64 },
    Steep { a: f64, b: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct SimSpec {
    pub experiment: Experiment,
    pub chart: Chart,
    pub m: usize,
    pub initial: InitialRecipe,
    pub fluid: FluidConfig,
    /// None lets the driver pick a CFL-based step.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub reparam_every: usize,
    pub snapshot_every: Option<f64>,
    pub expansion_order: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl SimSpec {
    pub fn stepper(&self, dt: f64) -> StepperConfig {
        let mut stepper = StepperConfig::new(dt, self.t_end);
        stepper.scheme = self.scheme;
        stepper.reparam_every = self.reparam_every;
        stepper.snapshot_every = self.snapshot_every;
        stepper.rhs = RhsSettings {
            graph: DnoGraphSettings {
                expansion_order: self.expansion_order,
            },
            ..RhsSettings::default()
        };
        stepper
    }

    /// One line per resolved field, for the startup echo.
    pub fn echo(&self) -> String {
        let depth = match self.fluid.depth {
            Depth::Infinite => "inf".to_string(),
            Depth::Finite(h) => format!("{h}"),
        };
        let initial = match &self.initial {
            InitialRecipe::Cosine { a, k } => format!("cosine a={a} k={k}"),
            InitialRecipe::Steep { a, b } => format!("steep a={a} b={b}"),
            InitialRecipe::File { path } => format!("file {}", path.display()),
        };
        format!(
            "experiment={} chart={} m={} initial=[{}] gravity={} sigma={} depth={} period_x={} \
             dt={} t_end={} scheme={} reparam_every={} expansion_order={} out={} seed={}",
            self.experiment,
            match self.chart {
                Chart::Graph => "graph",
                Chart::ArcLength => "arclength",
            },
            self.m,
            initial,
            self.fluid.gravity,
            self.fluid.surface_tension,
            depth,
            self.fluid.period_x,
            self.dt.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
            self.t_end,
            match self.scheme {
                Scheme::Rk4 => "rk4",
                Scheme::ImplicitMidpoint => "midpoint",
            },
            self.reparam_every,
            self.expansion_order,
            self.out_dir.display(),
            self.seed
        )
    }
}

/// Flag-supplied overrides; every field beats the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub m: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub chart: Option<String>,
    pub depth: Option<String>,
    pub sigma: Option<f64>,
    pub gravity: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub initial: Option<String>,
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub b: Option<f64>,
    pub scheme: Option<String>,
    pub reparam_every: Option<usize>,
    pub curve_file: Option<PathBuf>,
    pub expansion_order: Option<usize>,
    pub snapshot_every: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DepthValue {
    Num(f64),
    Tag(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    experiment: Option<String>,
    chart: Option<String>,
    m: Option<usize>,
    initial: Option<String>,
    a: Option<f64>,
    k: Option<f64>,
    b: Option<f64>,
    curve_file: Option<String>,
    gravity: Option<f64>,
    sigma: Option<f64>,
    depth: Option<DepthValue>,
    period_x: Option<f64>,
    dt: Option<f64>,
    t_end: Option<f64>,
    scheme: Option<String>,
    reparam_every: Option<usize>,
    snapshot_every: Option<f64>,
    expansion_order: Option<usize>,
    out: Option<String>,
    seed: Option<u64>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "chart",
    "m",
    "initial",
    "a",
    "k",
    "b",
    "curve_file",
    "gravity",
    "sigma",
    "depth",
    "period_x",
    "dt",
    "t_end",
    "scheme",
    "reparam_every",
    "snapshot_every",
    "expansion_order",
    "out",
    "seed",
];

fn parse_chart(s: &str) -> Result<Chart> {
    match s {
        "graph" => Ok(Chart::Graph),
        "arclength" | "arc-length" => Ok(Chart::ArcLength),
        other => bail!("chart must be \"graph\" or \"arclength\", got \"{other}\""),
    }
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    match s {
        "rk4" => Ok(Scheme::Rk4),
        "midpoint" | "implicit-midpoint" => Ok(Scheme::ImplicitMidpoint),
        other => bail!("scheme must be \"rk4\" or \"midpoint\", got \"{other}\""),
    }
}

fn parse_depth_str(s: &str) -> Result<Depth> {
    if s == "inf" || s == "infinite" {
        return Ok(Depth::Infinite);
    }
    let h: f64 = s
        .parse()
        .with_context(|| format!("depth must be \"inf\" or a number, got \"{s}\""))?;
    Ok(Depth::Finite(h))
}

fn parse_experiment(s: &str) -> Result<Experiment> {
    Ok(match s {
        "simulate" => Experiment::Simulate,
        "dispersion" => Experiment::Dispersion,
        "gradcheck" => Experiment::Gradcheck,
        "dno-test" | "dno_test" => Experiment::DnoTest,
        "equivalence" => Experiment::Equivalence,
        other => bail!("unknown experiment \"{other}\""),
    })
}

fn load_file(path: &Path) -> Result<FileSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("config {} is not valid TOML", path.display()))?;
    let unknown: Vec<&str> = table
        .keys()
        .map(String::as_str)
        .filter(|k| !KNOWN_KEYS.contains(k))
        .collect();
    if let Some(first) = unknown.first() {
        bail!("unknown key: {}", first);
    }
    FileSpec::deserialize(table).context("config fields have wrong types")
}

/// Resolve the final spec from an optional config file plus flags
/// (flags win), apply defaults, and validate invariants.
pub fn resolve(experiment: Experiment, flags: &Overrides) -> Result<SimSpec> {
    let file = match &flags.config {
        Some(path) => load_file(path)?,
        None => FileSpec::default(),
    };

    if let Some(tag) = &file.experiment {
        // The subcommand always decides; a conflicting file tag is an error.
        let from_file = parse_experiment(tag)?;
        if from_file != experiment {
            bail!(
                "experiment: config file says \"{from_file}\" but the subcommand is \"{experiment}\""
            );
        }
    }

    let chart = match flags.chart.as_deref().or(file.chart.as_deref()) {
        Some(s) => parse_chart(s)?,
        None => Chart::Graph,
    };
    let m = flags.m.or(file.m).unwrap_or(128);
    if m % 2 != 0 {
        bail!("m: grid size must be even, got {m}");
    }
    if m < 16 {
        bail!("m: grid size must be at least 16, got {m}");
    }

    let gravity = flags.gravity.or(file.gravity).unwrap_or(1.0);
    let sigma = flags.sigma.or(file.sigma).unwrap_or(0.0);
    let depth = match &flags.depth {
        Some(s) => parse_depth_str(s)?,
        None => match &file.depth {
            Some(DepthValue::Num(h)) => Depth::Finite(*h),
            Some(DepthValue::Tag(s)) => parse_depth_str(s)?,
            None => Depth::Infinite,
        },
    };
    let period_x = file.period_x.unwrap_or(2.0 * std::f64::consts::PI);
    let fluid = FluidConfig::new(gravity, sigma, depth, period_x)
        .map_err(|e| anyhow::anyhow!("fluid: {e}"))?;

    let initial_tag = flags
        .initial
        .as_deref()
        .or(file.initial.as_deref())
        .unwrap_or("cosine");
    let a = flags.a.or(file.a);
    let k = flags.k.or(file.k);
    let b = flags.b.or(file.b);
    let curve_file = flags
        .curve_file
        .clone()
        .or_else(|| file.curve_file.as_ref().map(PathBuf::from));
    let initial = match initial_tag {
        "cosine" => {
            let a = a.unwrap_or(0.01);
            let k = k.unwrap_or(1.0);
            if !(a.is_finite() && a >= 0.0 && a <= 1.0) {
                bail!("a: cosine amplitude must lie in [0, 1], got {a}");
            }
            if !(k.is_finite() && k >= 1.0 && k <= m as f64 / 3.0) {
                bail!("k: cosine mode must lie in [1, m/3], got {k}");
            }
            if k.fract() != 0.0 {
                bail!("k: cosine mode must be an integer, got {k}");
            }
            InitialRecipe::Cosine { a, k }
        }
        "steep" => {
            let a = a.unwrap_or(0.35);
            let b = b.unwrap_or(0.9);
            if !(a.is_finite() && a > 0.0 && a <= 0.5) {
                bail!("a: steep amplitude must lie in (0, 0.5], got {a}");
            }
            if !(b.is_finite() && b >= 0.0 && b <= 1.5) {
                bail!("b: steep velocity scale must lie in [0, 1.5], got {b}");
            }
            InitialRecipe::Steep { a, b }
        }
        "file" => {
            let path = curve_file
                .ok_or_else(|| anyhow::anyhow!("curve_file: required when initial = \"file\""))?;
            if !path.exists() {
                bail!("curve_file: {} does not exist", path.display());
            }
            InitialRecipe::File { path }
        }
        other => bail!("initial: unknown recipe \"{other}\""),
    };

    let scheme = match flags.scheme.as_deref().or(file.scheme.as_deref()) {
        Some(s) => parse_scheme(s)?,
        None => Scheme::Rk4,
    };
    let reparam_every = flags.reparam_every.or(file.reparam_every).unwrap_or(10);
    if reparam_every == 0 {
        bail!("reparam_every: must be at least 1");
    }
    let expansion_order = flags.expansion_order.or(file.expansion_order).unwrap_or(6);
    if expansion_order > MAX_EXPANSION_ORDER {
        bail!("expansion_order: must be at most {MAX_EXPANSION_ORDER}, got {expansion_order}");
    }
    let dt = flags.dt.or(file.dt);
    if let Some(v) = dt {
        if !(v > 0.0 && v.is_finite()) {
            bail!("dt: must be positive and finite, got {v}");
        }
    }
    let t_end = flags.t_end.or(file.t_end).unwrap_or(2.0 * std::f64::consts::PI);
    if !(t_end >= 0.0 && t_end.is_finite()) {
        bail!("t_end: must be nonnegative and finite, got {t_end}");
    }
    let snapshot_every = flags.snapshot_every.or(file.snapshot_every);
    if let Some(v) = snapshot_every {
        if !(v > 0.0 && v.is_finite()) {
            bail!("snapshot_every: must be positive and finite, got {v}");
        }
    }

    let out_dir = flags
        .out
        .clone()
        .or_else(|| file.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = flags.seed.or(file.seed).unwrap_or(0);

    Ok(SimSpec {
        experiment,
        chart,
        m,
        initial,
        fluid,
        dt,
        t_end,
        scheme,
        reparam_every,
        snapshot_every,
        expansion_order,
        out_dir,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> PathBuf {
        let dir = std::env::temp_dir();
        let path = dir.join(format!(
            "freewave-spec-test-{}-{}.toml",
            std::process::id(),
            content.len()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let path = write_tmp("chart = \"graph\"\nm = 128\ninitial = \"cosine\"\na = 0.01\nk = 1\n");
        let flags = Overrides {
            config: Some(path.clone()),
            ..Overrides::default()
        };
        let spec = resolve(Experiment::Simulate, &flags).unwrap();
        assert_eq!(spec.m, 128);
        assert_eq!(spec.fluid.gravity, 1.0);
        assert_eq!(spec.fluid.surface_tension, 0.0);
        assert_eq!(spec.fluid.depth, Depth::Infinite);
        assert!(matches!(spec.initial, InitialRecipe::Cosine { a, k } if a == 0.01 && k == 1.0));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn flags_override_file() {
        let path = write_tmp("m = 128\n");
        let flags = Overrides {
            config: Some(path.clone()),
            m: Some(64),
            ..Overrides::default()
        };
        let spec = resolve(Experiment::Simulate, &flags).unwrap();
        assert_eq!(spec.m, 64);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn unknown_key_is_named() {
        let path = write_tmp("dept = \"inf\"\n");
        let flags = Overrides {
            config: Some(path.clone()),
            ..Overrides::default()
        };
        let err = resolve(Experiment::Simulate, &flags).unwrap_err();
        assert_eq!(err.to_string(), "unknown key: dept");
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let flags = Overrides {
            m: Some(127),
            ..Overrides::default()
        };
        let err = resolve(Experiment::Simulate, &flags).unwrap_err();
        assert!(err.to_string().starts_with("m:"), "{err}");

        let flags = Overrides {
            a: Some(2.0),
            ..Overrides::default()
        };
        let err = resolve(Experiment::Simulate, &flags).unwrap_err();
        assert!(err.to_string().starts_with("a:"), "{err}");
    }

    #[test]
    fn depth_accepts_number_and_tag() {
        let path = write_tmp("depth = 1.5\n");
        let flags = Overrides {
            config: Some(path.clone()),
            ..Overrides::default()
        };
        let spec = resolve(Experiment::Simulate, &flags).unwrap();
        assert_eq!(spec.fluid.depth, Depth::Finite(1.5));
        std::fs::remove_file(path).ok();

        let flags = Overrides {
            depth: Some("inf".into()),
            ..Overrides::default()
        };
        let spec = resolve(Experiment::Simulate, &flags).unwrap();
        assert_eq!(spec.fluid.depth, Depth::Infinite);
    }
}
