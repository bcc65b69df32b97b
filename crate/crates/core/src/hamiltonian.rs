//! Wave energies and the variational gradients that drive the canonical
//! evolution equations.
//!
//! Everything is expressed through forward applications of the
//! Dirichlet-Neumann operator; its inverse is never formed. Line
//! integrals are trapezoid sums on the uniform parameter grid, which is
//! spectrally accurate for the periodic integrands involved.

use serde::{Deserialize, Serialize};

use crate::config::{DnoBieSettings, DnoGraphSettings, FluidConfig};
use crate::curve::{graph_to_curve, SurfaceCurve};
use crate::dno::{dno_curve, dno_graph};
use crate::error::{Result, WaveError};
use crate::spectral::Spectral;

/// Canonical variables: the surface curve and the velocity-potential
/// trace xi(alpha) = phi(gamma(alpha)) on its nodes.
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub curve: SurfaceCurve,
    pub xi: Vec<f64>,
}

impl PhaseState {
    pub fn new(curve: SurfaceCurve, xi: Vec<f64>) -> Result<Self> {
        if xi.len() != curve.m() {
            return Err(WaveError::Input(format!(
                "xi has {} samples for a curve with {} nodes",
                xi.len(),
                curve.m()
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::NonFinite("velocity-potential trace"));
        }
        Ok(PhaseState { curve, xi })
    }

    pub fn from_graph(eta: &[f64], xi: &[f64], period_x: f64) -> Result<Self> {
        PhaseState::new(graph_to_curve(eta, period_x)?, xi.to_vec())
    }

    pub fn m(&self) -> usize {
        self.curve.m()
    }

    /// Heights when the curve is an untilted graph on the uniform x-grid,
    /// which is what the spectral graph solver requires.
    pub fn graph_eta(&self) -> Option<Vec<f64>> {
        let scale = self.curve.period_x().max(1.0);
        let p = self.curve.periodic_part1();
        if p.iter().all(|v| v.abs() <= 1e-10 * scale) {
            Some(self.curve.gamma2().to_vec())
        } else {
            None
        }
    }
}

/// Which Dirichlet-Neumann route evaluates G(gamma) xi.
#[derive(Debug, Clone)]
pub enum SolverChoice {
    Graph(DnoGraphSettings),
    Bie(DnoBieSettings),
}

impl SolverChoice {
    pub fn graph() -> Self {
        SolverChoice::Graph(DnoGraphSettings::default())
    }

    pub fn bie() -> Self {
        SolverChoice::Bie(DnoBieSettings::default())
    }

    /// n = G(gamma) xi with the unit-normal normalization.
    pub fn apply(&self, state: &PhaseState, cfg: &FluidConfig) -> Result<Vec<f64>> {
        match self {
            SolverChoice::Graph(settings) => {
                let eta = state.graph_eta().ok_or_else(|| {
                    WaveError::ChartViolation(
                        "spectral graph solver needs an untilted uniform-x graph; \
                         use the boundary-integral solver for general curves"
                            .into(),
                    )
                })?;
                dno_graph(&eta, &state.xi, cfg, settings)
            }
            SolverChoice::Bie(settings) => dno_curve(&state.curve, &state.xi, cfg, settings),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential_grav: f64,
    pub potential_surf: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, potential_grav: f64, potential_surf: f64) -> Self {
        EnergyBreakdown {
            kinetic,
            potential_grav,
            potential_surf,
            total: kinetic + potential_grav + potential_surf,
        }
    }
}

/// All first-order gradients at one state, sharing a single DNO solve.
#[derive(Debug, Clone)]
pub struct GradientBundle {
    /// grad_xi K = G xi, the normal fluid speed at the surface.
    pub grad_xi: Vec<f64>,
    /// Normal component of the shape derivative of K at fixed xi.
    pub grad_normal_k: Vec<f64>,
    /// Tangential component of the same shape derivative.
    pub grad_tangential_k: Vec<f64>,
    /// Normal gradient of U + U_sigma: g gamma2 - sigma kappa.
    pub grad_normal_u: Vec<f64>,
}

/// K = 1/2 integral of xi G xi over the surface measure.
pub fn kinetic_energy(state: &PhaseState, cfg: &FluidConfig, solver: &SolverChoice) -> Result<f64> {
    let n = solver.apply(state, cfg)?;
    let frame = state.curve.frame()?;
    let w0 = 2.0 * std::f64::consts::PI / state.m() as f64;
    Ok(0.5
        * state
            .xi
            .iter()
            .zip(&n)
            .zip(&frame.metric)
            .map(|((x, nv), g)| x * nv * g * w0)
            .sum::<f64>())
}

/// Gravitational and capillary potential energies. U integrates the
/// flux form (g/2) gamma2^2 d gamma1; U_sigma = sigma (L - X) vanishes
/// on the flat reference surface.
pub fn potential_energy(curve: &SurfaceCurve, cfg: &FluidConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (d1, _) = curve.alpha_derivative()?;
    let w0 = 2.0 * std::f64::consts::PI / curve.m() as f64;
    let u = curve
        .gamma2()
        .iter()
        .zip(&d1)
        .map(|(y, dx)| 0.5 * cfg.gravity * y * y * dx * w0)
        .sum::<f64>();
    let frame = curve.frame()?;
    let u_sigma = cfg.surface_tension * (frame.total_length - curve.period_x());
    Ok((u, u_sigma))
}

pub fn total_energy(
    state: &PhaseState,
    cfg: &FluidConfig,
    solver: &SolverChoice,
) -> Result<EnergyBreakdown> {
    let k = kinetic_energy(state, cfg, solver)?;
    let (u, us) = potential_energy(&state.curve, cfg)?;
    Ok(EnergyBreakdown::new(k, u, us))
}

/// grad_xi K = G(gamma) xi.
pub fn grad_xi_k(state: &PhaseState, cfg: &FluidConfig, solver: &SolverChoice) -> Result<Vec<f64>> {
    solver.apply(state, cfg)
}

/// Normal gradient of the full potential energy: g gamma2, minus
/// sigma kappa when surface tension is active (shortening the surface
/// lowers U_sigma; the sign matches dL = -integral kappa a dS under a
/// normal perturbation a).
pub fn grad_normal_u(curve: &SurfaceCurve, cfg: &FluidConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let frame = curve.frame()?;
    Ok(curve
        .gamma2()
        .iter()
        .zip(&frame.curvature)
        .map(|(y, k)| cfg.gravity * y - cfg.surface_tension * k)
        .collect())
}

/// Shape derivative of K at fixed xi, split into normal and tangential
/// components: (1/2)[(d_s xi)^2 - (G xi)^2] and -(d_s xi)(G xi).
pub fn grad_k_general(
    state: &PhaseState,
    cfg: &FluidConfig,
    solver: &SolverChoice,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = solver.apply(state, cfg)?;
    let frame = state.curve.frame()?;
    let sp = Spectral::new(state.m())?;
    let xi_s: Vec<f64> = sp
        .derivative(&state.xi)
        .iter()
        .zip(&frame.metric)
        .map(|(d, g)| d / g)
        .collect();
    let normal: Vec<f64> = xi_s
        .iter()
        .zip(&n)
        .map(|(xs, nv)| 0.5 * (xs * xs - nv * nv))
        .collect();
    let tangential: Vec<f64> = xi_s.iter().zip(&n).map(|(xs, nv)| -xs * nv).collect();
    Ok((normal, tangential))
}

/// The admissible-variation relation T . delta gamma = T_op (N . delta
/// gamma) that a chart imposes on curve perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartCoupling {
    /// Graph chart: tangential displacement is slope times vertical,
    /// T_op = multiplication by d eta / dx.
    Graph,
    /// Normalized arc-length chart: the tangential shift that keeps the
    /// metric uniform while the curve moves normally at rate a, obtained
    /// by antidifferentiating kappa a |gamma'| with its mean removed.
    ArcLength,
}

impl ChartCoupling {
    /// Apply T_op to a normal displacement field.
    pub fn apply(&self, curve: &SurfaceCurve, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != curve.m() {
            return Err(WaveError::Input("displacement length mismatch".into()));
        }
        match self {
            ChartCoupling::Graph => {
                let slope = graph_slope(curve)?;
                Ok(slope.iter().zip(a).map(|(s, v)| s * v).collect())
            }
            ChartCoupling::ArcLength => {
                let frame = curve.frame()?;
                let sp = Spectral::new(curve.m())?;
                let forcing: Vec<f64> = frame
                    .curvature
                    .iter()
                    .zip(a)
                    .zip(&frame.metric)
                    .map(|((k, v), g)| k * v * g)
                    .collect();
                // The mean of the forcing is booked into the length rate,
                // not the shift; the antiderivative drops it and the
                // mean-zero gauge fixes the constant.
                Ok(sp.antiderivative_mean_zero(&forcing))
            }
        }
    }

    /// Exact discrete adjoint of `apply` in the dS inner product.
    pub fn adjoint_apply(&self, curve: &SurfaceCurve, t: &[f64]) -> Result<Vec<f64>> {
        if t.len() != curve.m() {
            return Err(WaveError::Input("displacement length mismatch".into()));
        }
        match self {
            ChartCoupling::Graph => {
                let slope = graph_slope(curve)?;
                Ok(slope.iter().zip(t).map(|(s, v)| s * v).collect())
            }
            ChartCoupling::ArcLength => {
                let frame = curve.frame()?;
                let sp = Spectral::new(curve.m())?;
                let tm: Vec<f64> = t.iter().zip(&frame.metric).map(|(v, g)| v * g).collect();
                let anti = sp.antiderivative_mean_zero(&tm);
                Ok(frame
                    .curvature
                    .iter()
                    .zip(&anti)
                    .map(|(k, av)| -k * av)
                    .collect())
            }
        }
    }
}

fn graph_slope(curve: &SurfaceCurve) -> Result<Vec<f64>> {
    let (d1, d2) = curve.alpha_derivative()?;
    if d1.iter().any(|&v| v <= 0.0) {
        return Err(WaveError::ChartViolation(
            "graph coupling undefined: curve is not a graph".into(),
        ));
    }
    Ok(d1.iter().zip(&d2).map(|(a, b)| b / a).collect())
}

/// Reduced normal gradient of K in a chart: the general normal component
/// plus the chart coupling's adjoint acting on the tangential component,
/// so that pairing with any normal displacement reproduces the full
/// shape derivative under the chart's admissible variations.
pub fn grad_normal_k_chart(
    state: &PhaseState,
    cfg: &FluidConfig,
    solver: &SolverChoice,
    coupling: ChartCoupling,
) -> Result<Vec<f64>> {
    let (normal, tangential) = grad_k_general(state, cfg, solver)?;
    let lifted = coupling.adjoint_apply(&state.curve, &tangential)?;
    Ok(normal.iter().zip(&lifted).map(|(a, b)| a + b).collect())
}

/// All gradients from one DNO solve.
pub fn gradient_bundle(
    state: &PhaseState,
    cfg: &FluidConfig,
    solver: &SolverChoice,
) -> Result<GradientBundle> {
    let n = solver.apply(state, cfg)?;
    let frame = state.curve.frame()?;
    let sp = Spectral::new(state.m())?;
    let xi_s: Vec<f64> = sp
        .derivative(&state.xi)
        .iter()
        .zip(&frame.metric)
        .map(|(d, g)| d / g)
        .collect();
    let grad_normal_k: Vec<f64> = xi_s
        .iter()
        .zip(&n)
        .map(|(xs, nv)| 0.5 * (xs * xs - nv * nv))
        .collect();
    let grad_tangential_k: Vec<f64> = xi_s.iter().zip(&n).map(|(xs, nv)| -xs * nv).collect();
    let grad_normal_u: Vec<f64> = state
        .curve
        .gamma2()
        .iter()
        .zip(&frame.curvature)
        .map(|(y, k)| cfg.gravity * y - cfg.surface_tension * k)
        .collect();
    Ok(GradientBundle {
        grad_xi: n,
        grad_normal_k,
        grad_tangential_k,
        grad_normal_u,
    })
}
