//! Free-surface water waves over a 2D fluid, with the surface described
//! either as a height function or as a general parametrized curve.
//!
//! The crate provides two interchangeable Dirichlet-Neumann solvers (a
//! spectral operator expansion for graphs and a boundary-integral solver
//! for arbitrary periodic curves), the wave energy functionals and their
//! variational gradients, the evolution equations in graph and arc-length
//! charts, and RK4 / implicit-midpoint time stepping with geometric halt
//! diagnostics.

pub mod config;
pub mod curve;
pub mod dno;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod hamiltonian;
pub mod spectral;

pub use config::{Depth, DnoBieSettings, DnoGraphSettings, FluidConfig};
pub use curve::{ChordArcReport, FrameData, SurfaceCurve};
pub use dno::{dno_curve, dno_graph, dno_graph_chart, harmonic_eval, BieOperator, HarmonicEval};
pub use dynamics::{Chart, OverturnStatus, PhaseVelocity, RhsSettings};
pub use error::{Result, WaveError};
pub use integrate::{
    run, step, suggest_dt, HaltCriteria, HaltReason, Scheme, Snapshot, StepperConfig, Trajectory,
};
pub use hamiltonian::{
    ChartCoupling, EnergyBreakdown, GradientBundle, PhaseState, SolverChoice,
};
