//! Time integration of the surface flow: fixed-step RK4 or implicit
//! midpoint over the chart's right-hand side, periodic re-enforcement
//! of the arc-length parametrization, energy monitoring, and halt
//! diagnostics that stop a run before the discretization turns into
//! noise.

use std::f64::consts::PI;
use std::fmt;

use crate::config::FluidConfig;
use crate::curve::{chord_arc, max_inclination, reparametrize_uniform_with, SurfaceCurve};
use crate::dynamics::{rhs_chart, Chart, RhsSettings};
use crate::error::{Result, WaveError};
use crate::hamiltonian::{total_energy, EnergyBreakdown, PhaseState, SolverChoice};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

/// Fixed-point iteration control for the implicit midpoint stage.
const MIDPOINT_TOL: f64 = 1e-12;
const MIDPOINT_MAX_ITERS: usize = 50;

/// A graph-chart run stops once the surface gets this steep; the height
/// representation and its operator expansion are meaningless well before
/// the tangent actually turns vertical.
pub const GRAPH_INCLINATION_LIMIT: f64 = 70.0 * PI / 180.0;

#[derive(Debug, Clone)]
pub struct HaltCriteria {
    /// Largest tolerated |curvature|; None means 100*pi/X, resolved
    /// against the running state's period.
    pub max_curvature: Option<f64>,
    pub min_chord_arc: f64,
    pub max_energy_drift: f64,
}

impl Default for HaltCriteria {
    fn default() -> Self {
        HaltCriteria {
            max_curvature: None,
            min_chord_arc: 0.05,
            max_energy_drift: 1e-2,
        }
    }
}

impl HaltCriteria {
    fn curvature_limit(&self, period_x: f64) -> f64 {
        self.max_curvature.unwrap_or(100.0 * PI / period_x)
    }
}

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub reparam_every: usize,
    pub max_time: f64,
    pub halt: HaltCriteria,
    /// Snapshot cadence in simulated time; None means max_time / 100.
    pub snapshot_every: Option<f64>,
    pub rhs: RhsSettings,
}

impl StepperConfig {
    pub fn new(dt: f64, max_time: f64) -> Self {
        StepperConfig {
            dt,
            scheme: Scheme::Rk4,
            reparam_every: 10,
            max_time,
            halt: HaltCriteria::default(),
            snapshot_every: None,
            rhs: RhsSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(WaveError::Config("dt must be positive and finite".into()));
        }
        if self.reparam_every == 0 {
            return Err(WaveError::Config("reparam_every must be at least 1".into()));
        }
        if !(self.max_time >= 0.0) || !self.max_time.is_finite() {
            return Err(WaveError::Config("max_time must be nonnegative".into()));
        }
        if let Some(k) = self.halt.max_curvature {
            if !(k > 0.0) {
                return Err(WaveError::Config("max_curvature must be positive".into()));
            }
        }
        Ok(())
    }

    fn solver(&self, chart: Chart) -> SolverChoice {
        match chart {
            Chart::Graph => SolverChoice::Graph(self.rhs.graph.clone()),
            Chart::ArcLength => SolverChoice::Bie(self.rhs.bie.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HaltReason {
    Overturned { max_inclination: f64 },
    CurvatureBlowup { max_curvature: f64 },
    ChordArcDegenerate { min_ratio: f64 },
    EnergyDrift { rel_drift: f64 },
    NumericalBreakdown,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Overturned { max_inclination } => write!(
                f,
                "overturned: not a graph (max inclination {:.1} deg)",
                max_inclination * 180.0 / PI
            ),
            HaltReason::CurvatureBlowup { max_curvature } => {
                write!(f, "curvature blow-up (max |kappa| {max_curvature:.3e})")
            }
            HaltReason::ChordArcDegenerate { min_ratio } => {
                write!(f, "surface self-approach (chord-arc ratio {min_ratio:.3e})")
            }
            HaltReason::EnergyDrift { rel_drift } => {
                write!(f, "energy drift {rel_drift:.3e} beyond tolerance")
            }
            HaltReason::NumericalBreakdown => write!(f, "state left the finite range"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: PhaseState,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub energy_series: Vec<(f64, EnergyBreakdown)>,
    pub halt_reason: Option<HaltReason>,
}

impl Trajectory {
    pub fn final_state(&self) -> &PhaseState {
        &self.snapshots.last().expect("trajectory has at least one snapshot").state
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().expect("trajectory has at least one snapshot").t
    }

    /// Largest |H(t) - H(0)| / |H(0)| over the recorded series.
    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.energy_series[0].1.total;
        let scale = h0.abs().max(f64::MIN_POSITIVE);
        self.energy_series
            .iter()
            .map(|(_, e)| (e.total - h0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Classical RK4 on a flat state vector.
pub fn rk4_step<F>(y: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let add = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, k)| x + s * k).collect()
    };
    let k1 = f(y)?;
    let k2 = f(&add(y, dt / 2.0, &k1))?;
    let k3 = f(&add(y, dt / 2.0, &k2))?;
    let k4 = f(&add(y, dt, &k3))?;
    Ok((0..y.len())
        .map(|j| y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect())
}

/// Implicit midpoint via fixed-point iteration on the stage derivative:
/// k = f(y + dt/2 k). Tolerance is relative to the stage norm.
pub fn implicit_midpoint_step<F>(y: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut k = f(y)?;
    let mut converged = false;
    for _ in 0..MIDPOINT_MAX_ITERS {
        let probe: Vec<f64> = y.iter().zip(&k).map(|(x, v)| x + 0.5 * dt * v).collect();
        let next = f(&probe)?;
        let scale = next.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
        let diff = next
            .iter()
            .zip(&k)
            .fold(0.0f64, |a, (n, o)| a.max((n - o).abs()));
        k = next;
        if diff <= MIDPOINT_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(WaveError::Solver(
            "implicit midpoint fixed point did not converge in 50 iterations".into(),
        ));
    }
    Ok(y.iter().zip(&k).map(|(x, v)| x + dt * v).collect())
}

fn pack(state: &PhaseState, chart: Chart) -> Result<Vec<f64>> {
    let m = state.m();
    match chart {
        Chart::Graph => {
            let eta = state.graph_eta().ok_or_else(|| {
                WaveError::ChartViolation("graph chart lost the uniform x-grid".into())
            })?;
            let mut y = eta;
            y.extend_from_slice(&state.xi);
            Ok(y)
        }
        Chart::ArcLength => {
            let mut y = state.curve.periodic_part1();
            y.extend_from_slice(state.curve.gamma2());
            y.extend_from_slice(&state.xi);
            debug_assert_eq!(y.len(), 3 * m);
            Ok(y)
        }
    }
}

fn unpack(y: &[f64], chart: Chart, period_x: f64, m: usize) -> Result<PhaseState> {
    match chart {
        Chart::Graph => PhaseState::from_graph(&y[..m], &y[m..2 * m], period_x),
        Chart::ArcLength => {
            let sp = Spectral::new(m)?;
            let lin = period_x / (2.0 * PI);
            let g1: Vec<f64> = sp
                .nodes()
                .iter()
                .zip(&y[..m])
                .map(|(a, p)| lin * a + p)
                .collect();
            let curve = SurfaceCurve::new(g1, y[m..2 * m].to_vec(), period_x)?;
            PhaseState::new(curve, y[2 * m..].to_vec())
        }
    }
}

fn flat_rhs(y: &[f64], chart: Chart, cfg: &FluidConfig, settings: &RhsSettings, m: usize)
    -> Result<Vec<f64>> {
    let state = unpack(y, chart, cfg.period_x, m)?;
    let v = rhs_chart(&state, chart, cfg, settings)?;
    let mut out = Vec::with_capacity(y.len());
    match chart {
        Chart::Graph => {
            out.extend(v.curve_dot.iter().map(|d| d[1]));
            out.extend_from_slice(&v.xi_dot);
        }
        Chart::ArcLength => {
            out.extend(v.curve_dot.iter().map(|d| d[0]));
            out.extend(v.curve_dot.iter().map(|d| d[1]));
            out.extend_from_slice(&v.xi_dot);
        }
    }
    Ok(out)
}

fn step_raw(
    state: &PhaseState,
    chart: Chart,
    cfg: &FluidConfig,
    stepper: &StepperConfig,
    dt: f64,
) -> Result<PhaseState> {
    let m = state.m();
    let y = pack(state, chart)?;
    let f = |yy: &[f64]| flat_rhs(yy, chart, cfg, &stepper.rhs, m);
    let y_next = match stepper.scheme {
        Scheme::Rk4 => rk4_step(&y, dt, f)?,
        Scheme::ImplicitMidpoint => implicit_midpoint_step(&y, dt, f)?,
    };
    unpack(&y_next, chart, cfg.period_x, m)
}

// Re-uniformize the metric, cutting the spectral tail first. The advection
// products alias across the band every step, and the folded images land back
// mid-spectrum where they feed a cascade that blows up at the grid scale
// long before the wave does anything interesting; only the 2/3 cut closes
// that loop (a gentle near-Nyquist taper demonstrably does not). The cut
// runs before the reparametrization (not after) so the returned state is
// uniform to machine precision regardless of what was removed.
fn reparametrize_state(state: &PhaseState) -> Result<PhaseState> {
    let sp = Spectral::new(state.m())?;
    let p1 = sp.lowpass_two_thirds(&state.curve.periodic_part1());
    let gamma2 = sp.lowpass_two_thirds(state.curve.gamma2());
    let xi = sp.lowpass_two_thirds(&state.xi);
    let period_x = state.curve.period_x();
    let m = state.m() as f64;
    let gamma1: Vec<f64> = p1
        .iter()
        .enumerate()
        .map(|(j, &p)| p + period_x * j as f64 / m)
        .collect();
    let smoothed = SurfaceCurve::new(gamma1, gamma2, period_x)?;
    let (curve, mut fields) = reparametrize_uniform_with(&smoothed, &[&xi])?;
    PhaseState::new(curve, fields.remove(0))
}

/// Advance one time step. dt = 0 returns the state unchanged. With
/// reparam_every = 1 the arc-length chart is re-uniformized after the
/// step; coarser cadences are handled by `run`, which owns the counter.
pub fn step(
    state: &PhaseState,
    chart: Chart,
    cfg: &FluidConfig,
    stepper: &StepperConfig,
) -> Result<PhaseState> {
    cfg.validate()?;
    if stepper.dt == 0.0 {
        return Ok(state.clone());
    }
    let next = step_raw(state, chart, cfg, stepper, stepper.dt)?;
    if chart == Chart::ArcLength && stepper.reparam_every == 1 {
        return reparametrize_state(&next);
    }
    Ok(next)
}

fn finite(state: &PhaseState) -> bool {
    state.curve.gamma1().iter().all(|v| v.is_finite())
        && state.curve.gamma2().iter().all(|v| v.is_finite())
        && state.xi.iter().all(|v| v.is_finite())
}

fn geometric_halt(state: &PhaseState, chart: Chart, criteria: &HaltCriteria, cfg: &FluidConfig)
    -> Result<Option<HaltReason>> {
    if !finite(state) {
        return Ok(Some(HaltReason::NumericalBreakdown));
    }
    let frame = state.curve.frame()?;
    if chart == Chart::Graph {
        let incl = max_inclination(&frame);
        if incl >= GRAPH_INCLINATION_LIMIT {
            return Ok(Some(HaltReason::Overturned {
                max_inclination: incl,
            }));
        }
    }
    let kappa_max = frame.curvature.iter().fold(0.0f64, |a, &k| a.max(k.abs()));
    let limit = criteria.curvature_limit(cfg.period_x);
    if kappa_max > limit {
        return Ok(Some(HaltReason::CurvatureBlowup {
            max_curvature: kappa_max,
        }));
    }
    let report = chord_arc(&state.curve, cfg.depth)?;
    if report.min_ratio < criteria.min_chord_arc {
        return Ok(Some(HaltReason::ChordArcDegenerate {
            min_ratio: report.min_ratio,
        }));
    }
    Ok(None)
}

/// Integrate from `initial` until max_time or a halt criterion fires.
/// Snapshots and the energy series stay aligned; a halted run still
/// returns everything recorded up to the stop.
pub fn run(
    initial: &PhaseState,
    chart: Chart,
    cfg: &FluidConfig,
    stepper: &StepperConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    chart.validate(initial)?;
    let solver = stepper.solver(chart);
    let mut state = initial.clone();
    let e0 = total_energy(&state, cfg, &solver)?;
    let h0 = e0.total;
    let mut traj = Trajectory {
        snapshots: vec![Snapshot {
            t: 0.0,
            state: state.clone(),
        }],
        energy_series: vec![(0.0, e0)],
        halt_reason: None,
    };
    if let Some(reason) = geometric_halt(&state, chart, &stepper.halt, cfg)? {
        traj.halt_reason = Some(reason);
        return Ok(traj);
    }
    if stepper.max_time == 0.0 {
        return Ok(traj);
    }
    stepper.validate()?;

    let snap_dt = stepper
        .snapshot_every
        .unwrap_or(stepper.max_time / 100.0)
        .max(stepper.dt * 1e-9);
    let eps = 1e-9 * stepper.dt;
    let mut t = 0.0;
    let mut next_snap = snap_dt;
    let mut step_index = 0usize;

    while t < stepper.max_time - eps {
        let dt = stepper.dt.min(stepper.max_time - t);
        let stepped = match step_raw(&state, chart, cfg, stepper, dt) {
            Ok(s) => s,
            Err(WaveError::Geometry(_)) => {
                // Stage geometry degenerated mid-step; report it via the
                // last completed state's diagnostics.
                let report = chord_arc(&state.curve, cfg.depth)?;
                traj.halt_reason = Some(HaltReason::ChordArcDegenerate {
                    min_ratio: report.min_ratio,
                });
                return Ok(traj);
            }
            Err(WaveError::NonFinite(_)) => {
                // A stage overflowed; keep the last finite state so the
                // caller can see how far the run got.
                traj.snapshots.push(Snapshot {
                    t,
                    state: state.clone(),
                });
                traj.energy_series
                    .push((t, EnergyBreakdown::new(f64::NAN, f64::NAN, f64::NAN)));
                traj.halt_reason = Some(HaltReason::NumericalBreakdown);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        state = stepped;
        t += dt;
        step_index += 1;
        if chart == Chart::ArcLength && step_index % stepper.reparam_every == 0 && finite(&state) {
            state = reparametrize_state(&state)?;
        }
        if let Some(reason) = geometric_halt(&state, chart, &stepper.halt, cfg)? {
            traj.snapshots.push(Snapshot {
                t,
                state: state.clone(),
            });
            let energy = if finite(&state) {
                total_energy(&state, cfg, &solver).unwrap_or(EnergyBreakdown::new(
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                ))
            } else {
                EnergyBreakdown::new(f64::NAN, f64::NAN, f64::NAN)
            };
            traj.energy_series.push((t, energy));
            traj.halt_reason = Some(reason);
            return Ok(traj);
        }
        if t >= next_snap - eps || t >= stepper.max_time - eps {
            let energy = total_energy(&state, cfg, &solver)?;
            let drift = (energy.total - h0).abs() / h0.abs().max(f64::MIN_POSITIVE);
            traj.snapshots.push(Snapshot {
                t,
                state: state.clone(),
            });
            traj.energy_series.push((t, energy));
            while next_snap <= t + eps {
                next_snap += snap_dt;
            }
            if drift > stepper.halt.max_energy_drift {
                traj.halt_reason = Some(HaltReason::EnergyDrift { rel_drift: drift });
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

/// CFL-style step suggestion: gravity-wave stiffness scales as the square
/// root of the finest arc spacing, capillary stiffness as its 3/2 power.
pub fn suggest_dt(state: &PhaseState, cfg: &FluidConfig) -> Result<f64> {
    cfg.validate()?;
    let frame = state.curve.frame()?;
    let ds_min = frame
        .metric
        .iter()
        .fold(f64::INFINITY, |a, &g| a.min(g))
        * 2.0
        * PI
        / state.m() as f64;
    // Fractions of the linear RK4 stability limit at the grid Nyquist
    // (dt_max = 2.83/omega, omega^2 = g k + sigma k^3, k = pi/ds): the
    // gravity bound lands at 31% of it, the capillary bound at 39%. The
    // capillary constant must stay well under 0.508, which is 100% of the
    // limit; 0.5 was close enough that runs with tension blew up.
    let mut dt = 0.5 * (ds_min / cfg.gravity).sqrt();
    if cfg.surface_tension > 0.0 {
        dt = dt.min(0.2 * ds_min.powf(1.5) / cfg.surface_tension.sqrt());
    }
    Ok(dt)
}
