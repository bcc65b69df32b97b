//! freewave: simulate and verify free-surface wave dynamics in graph
//! and arc-length charts.
//!
//! Exit codes: 0 success, 2 halted by a run criterion, 1 error.

mod experiments;
mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use experiments::Outcome;
use spec::{Experiment, Overrides};

#[derive(Parser)]
#[command(name = "freewave", version, about = "free-surface wave simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time-evolve the surface and record energies and snapshots.
    Simulate(RunArgs),
    /// Measure the oscillation frequency of a small cosine mode.
    Dispersion(RunArgs),
    /// Finite-difference checks of the energy gradients.
    Gradcheck(RunArgs),
    /// Compare the spectral and boundary-integral surface operators.
    DnoTest(RunArgs),
    /// Evolve the same data in both charts and compare.
    Equivalence(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid size (even, >= 16).
    #[arg(long)]
    m: Option<usize>,
    /// Time step; omit for a CFL-based choice.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated end time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Chart: graph | arclength.
    #[arg(long)]
    chart: Option<String>,
    /// Depth: "inf" or a positive number.
    #[arg(long)]
    depth: Option<String>,
    /// Surface tension coefficient.
    #[arg(long)]
    sigma: Option<f64>,
    /// Gravitational acceleration.
    #[arg(long)]
    gravity: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized test directions.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial recipe: cosine | steep | file.
    #[arg(long)]
    initial: Option<String>,
    /// Recipe amplitude.
    #[arg(long)]
    a: Option<f64>,
    /// Cosine mode number.
    #[arg(long)]
    k: Option<f64>,
    /// Steep-recipe velocity scale.
    #[arg(long)]
    b: Option<f64>,
    /// Integrator: rk4 | midpoint.
    #[arg(long)]
    scheme: Option<String>,
    /// Reparametrize the arc-length chart every this many steps.
    #[arg(long = "reparam-every")]
    reparam_every: Option<usize>,
    /// Curve JSON for initial = file.
    #[arg(long = "curve-file")]
    curve_file: Option<PathBuf>,
    /// Operator-expansion order for the graph solver.
    #[arg(long = "expansion-order")]
    expansion_order: Option<usize>,
    /// Snapshot cadence in simulated time.
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<f64>,
}

impl RunArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            m: self.m,
            dt: self.dt,
            t_end: self.t_end,
            chart: self.chart,
            depth: self.depth,
            sigma: self.sigma,
            gravity: self.gravity,
            out: self.out,
            seed: self.seed,
            initial: self.initial,
            a: self.a,
            k: self.k,
            b: self.b,
            scheme: self.scheme,
            reparam_every: self.reparam_every,
            curve_file: self.curve_file,
            expansion_order: self.expansion_order,
            snapshot_every: self.snapshot_every,
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    let (experiment, args) = match cli.cmd {
        Cmd::Simulate(a) => (Experiment::Simulate, a),
        Cmd::Dispersion(a) => (Experiment::Dispersion, a),
        Cmd::Gradcheck(a) => (Experiment::Gradcheck, a),
        Cmd::DnoTest(a) => (Experiment::DnoTest, a),
        Cmd::Equivalence(a) => (Experiment::Equivalence, a),
    };
    let spec = spec::resolve(experiment, &args.overrides())?;
    eprintln!("resolved: {}", spec.echo());
    experiments::run_experiment(&spec)
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(Outcome::Clean) => 0,
        Ok(Outcome::Halted) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}
