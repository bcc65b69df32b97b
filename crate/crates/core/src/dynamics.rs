//! Right-hand sides of the canonical evolution equations in the two
//! supported charts, tangential-velocity recovery for the arc-length
//! chart, and the overturning diagnostic.
//!
//! Quadratic products entering xi_dot are de-aliased with the 2/3-rule
//! spectral filter; linear terms pass through unfiltered.

use std::f64::consts::PI;

use crate::config::{DnoBieSettings, DnoGraphSettings, FluidConfig};
use crate::curve::{max_inclination, uniform_metric_deviation, SurfaceCurve};
use crate::dno::{dno_curve, dno_graph_chart};
use crate::error::{Result, WaveError};
use crate::hamiltonian::{gradient_bundle, ChartCoupling, PhaseState, SolverChoice};
use crate::spectral::Spectral;

/// Coordinate chart for the evolving surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Heights over a fixed uniform x-grid.
    Graph,
    /// Uniform-metric (normalized arc-length) parametrization.
    ArcLength,
}

/// Initial data must satisfy the chart invariant this tightly; transient
/// mid-run drift is policed by the looser `METRIC_DRIFT_GUARD`. The gate
/// exists to reject data that was never uniformized (deviation 1e-3 and
/// up for any visible wave in a graph parametrization), so it must sit
/// above the uniformizer's own resampling floor, which reaches a few 1e-8
/// on steep well-resolved curves.
pub const CHART_METRIC_TOL: f64 = 1e-6;

/// The arc-length rhs accepts this much relative metric non-uniformity.
/// The evolution itself stays exact for any metric (the tangential speed is
/// recovered from the markers' actual world lines), so this only polices the
/// chart interpretation: O(dt^2) drift between reparametrizations plus the
/// residual a re-uniformization leaves when the curve's spectral tail is no
/// longer tiny. Past this much the run is too under-resolved to trust.
pub const METRIC_DRIFT_GUARD: f64 = 1e-1;

impl Chart {
    pub fn coupling(&self) -> ChartCoupling {
        match self {
            Chart::Graph => ChartCoupling::Graph,
            Chart::ArcLength => ChartCoupling::ArcLength,
        }
    }

    /// Check that a state lies in this chart (used on initial data).
    pub fn validate(&self, state: &PhaseState) -> Result<()> {
        match self {
            Chart::Graph => {
                if state.graph_eta().is_none() {
                    return Err(WaveError::ChartViolation(
                        "graph chart needs heights on the uniform x-grid".into(),
                    ));
                }
                Ok(())
            }
            Chart::ArcLength => {
                let dev = uniform_metric_deviation(&state.curve.frame()?);
                if dev > CHART_METRIC_TOL {
                    return Err(WaveError::ChartViolation(format!(
                        "arc-length chart needs a uniform metric; deviation {dev:.3e}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Velocity of the phase point: normal and tangential surface speeds,
/// the rate of the potential trace, and the node velocities.
#[derive(Debug, Clone)]
pub struct PhaseVelocity {
    pub n: Vec<f64>,
    pub tau: Vec<f64>,
    pub xi_dot: Vec<f64>,
    pub curve_dot: Vec<[f64; 2]>,
}

/// Graph-chart evolution: eta_dot and xi_dot on the uniform x-grid.
pub fn rhs_graph(
    eta: &[f64],
    xi: &[f64],
    cfg: &FluidConfig,
    settings: &DnoGraphSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let m = eta.len();
    let sp = Spectral::new(m)?;
    let c = 2.0 * PI / cfg.period_x;
    let eta_x: Vec<f64> = sp.derivative(eta).iter().map(|&d| c * d).collect();
    let xi_x: Vec<f64> = sp.derivative(xi).iter().map(|&d| c * d).collect();

    // One expansion serves both equations: the chart operator is the
    // kinematic velocity, its unit-normal rescaling enters Bernoulli.
    let g_chart = dno_graph_chart(eta, xi, cfg, settings)?;
    let n: Vec<f64> = g_chart
        .iter()
        .zip(&eta_x)
        .map(|(&g, &ex)| g / (1.0 + ex * ex).sqrt())
        .collect();

    let bracket: Vec<f64> = (0..m)
        .map(|j| {
            let root = (1.0 + eta_x[j] * eta_x[j]).sqrt();
            0.5 * (n[j] * n[j] - xi_x[j] * xi_x[j] / (root * root)
                + 2.0 * xi_x[j] * n[j] * eta_x[j] / root)
        })
        .collect();
    let bracket = sp.lowpass_two_thirds(&bracket);

    let mut xi_dot: Vec<f64> = eta
        .iter()
        .zip(&bracket)
        .map(|(&e, &b)| -cfg.gravity * e + b)
        .collect();
    if cfg.surface_tension > 0.0 {
        // sigma * d/dx of the sine of the inclination angle.
        let slope_sine: Vec<f64> = eta_x.iter().map(|&ex| ex / (1.0 + ex * ex).sqrt()).collect();
        let cap: Vec<f64> = sp.derivative(&slope_sine).iter().map(|&d| c * d).collect();
        for (x, cv) in xi_dot.iter_mut().zip(&cap) {
            *x += cfg.surface_tension * cv;
        }
    }
    Ok((g_chart, xi_dot))
}

/// Recover the tangential velocity that keeps a uniform-metric
/// parametrization uniform while the surface moves at normal speed n,
/// plus the total-length rate.
///
/// The forcing kappa n |gamma'| is antidifferentiated with its mean
/// removed (the mean is exactly the length change, booked into dL/dt);
/// the free constant is fixed by the zero-mean gauge.
pub fn tangential_velocity_arclength(curve: &SurfaceCurve, n: &[f64]) -> Result<(Vec<f64>, f64)> {
    if n.len() != curve.m() {
        return Err(WaveError::Input("normal speed length mismatch".into()));
    }
    let frame = curve.frame()?;
    let dev = uniform_metric_deviation(&frame);
    if dev > METRIC_DRIFT_GUARD {
        return Err(WaveError::ChartViolation(format!(
            "metric non-uniformity {dev:.3e} exceeds the drift guard {METRIC_DRIFT_GUARD:.0e}"
        )));
    }
    let sp = Spectral::new(curve.m())?;
    let forcing: Vec<f64> = frame
        .curvature
        .iter()
        .zip(n)
        .zip(&frame.metric)
        .map(|((k, v), g)| k * v * g)
        .collect();
    let tau = sp.antiderivative_mean_zero(&forcing);
    let w0 = 2.0 * PI / curve.m() as f64;
    let length_rate = -forcing.iter().sum::<f64>() * w0;
    Ok((tau, length_rate))
}

/// Arc-length chart evolution from the closed-form Bernoulli equation.
pub fn rhs_arclength(
    state: &PhaseState,
    cfg: &FluidConfig,
    settings: &DnoBieSettings,
) -> Result<PhaseVelocity> {
    cfg.validate()?;
    if cfg.surface_tension > 0.0 {
        return Err(WaveError::Config(
            "surface tension is only supported in the graph chart".into(),
        ));
    }
    let frame = state.curve.frame()?;
    let n = dno_curve(&state.curve, &state.xi, cfg, settings)?;
    let (tau, _) = tangential_velocity_arclength(&state.curve, &n)?;
    let sp = Spectral::new(state.m())?;
    let xi_s: Vec<f64> = sp
        .derivative(&state.xi)
        .iter()
        .zip(&frame.metric)
        .map(|(d, g)| d / g)
        .collect();
    let bracket: Vec<f64> = (0..state.m())
        .map(|j| 0.5 * (n[j] * n[j] - xi_s[j] * xi_s[j]) + xi_s[j] * tau[j])
        .collect();
    let bracket = sp.lowpass_two_thirds(&bracket);
    let xi_dot: Vec<f64> = state
        .curve
        .gamma2()
        .iter()
        .zip(&bracket)
        .map(|(&y, &b)| -cfg.gravity * y + b)
        .collect();
    let curve_dot: Vec<[f64; 2]> = (0..state.m())
        .map(|j| {
            let nv = frame.normal[j];
            let tv = frame.tangent[j];
            [
                n[j] * nv[0] + tau[j] * tv[0],
                n[j] * nv[1] + tau[j] * tv[1],
            ]
        })
        .collect();
    Ok(PhaseVelocity {
        n,
        tau,
        xi_dot,
        curve_dot,
    })
}

/// The same phase velocity assembled from the energy gradients instead
/// of the closed-form Bernoulli expressions; an independent route used
/// to cross-check them.
pub fn rhs_canonical(
    state: &PhaseState,
    chart: Chart,
    cfg: &FluidConfig,
    solver: &SolverChoice,
) -> Result<PhaseVelocity> {
    cfg.validate()?;
    let bundle = gradient_bundle(state, cfg, solver)?;
    let frame = state.curve.frame()?;
    let sp = Spectral::new(state.m())?;
    let n = bundle.grad_xi.clone();
    match chart {
        Chart::Graph => {
            // Admissible motion is vertical; tau follows from the slope.
            let coupling = ChartCoupling::Graph;
            let lifted = coupling.adjoint_apply(&state.curve, &bundle.grad_tangential_k)?;
            let neg_k_grad: Vec<f64> = bundle
                .grad_normal_k
                .iter()
                .zip(&lifted)
                .map(|(a, b)| -(a + b))
                .collect();
            let neg_k_grad = sp.lowpass_two_thirds(&neg_k_grad);
            let xi_dot: Vec<f64> = neg_k_grad
                .iter()
                .zip(&bundle.grad_normal_u)
                .map(|(k, u)| k - u)
                .collect();
            let eta_dot: Vec<f64> = n.iter().zip(&frame.metric).map(|(v, g)| v * g).collect();
            let tau = coupling.apply(&state.curve, &n)?;
            let curve_dot: Vec<[f64; 2]> = eta_dot.iter().map(|&e| [0.0, e]).collect();
            Ok(PhaseVelocity {
                n,
                tau,
                xi_dot,
                curve_dot,
            })
        }
        Chart::ArcLength => {
            if cfg.surface_tension > 0.0 {
                return Err(WaveError::Config(
                    "surface tension is only supported in the graph chart".into(),
                ));
            }
            // The chart shifts nodes tangentially at rate tau = T_op(n);
            // the advective gain xi_s tau joins the shape gradient.
            let coupling = ChartCoupling::ArcLength;
            let tau = coupling.apply(&state.curve, &n)?;
            let xi_s: Vec<f64> = sp
                .derivative(&state.xi)
                .iter()
                .zip(&frame.metric)
                .map(|(d, g)| d / g)
                .collect();
            let quad: Vec<f64> = bundle
                .grad_normal_k
                .iter()
                .zip(xi_s.iter().zip(&tau))
                .map(|(k, (xs, tv))| -k + xs * tv)
                .collect();
            let quad = sp.lowpass_two_thirds(&quad);
            let xi_dot: Vec<f64> = quad
                .iter()
                .zip(&bundle.grad_normal_u)
                .map(|(q, u)| q - u)
                .collect();
            let curve_dot: Vec<[f64; 2]> = (0..state.m())
                .map(|j| {
                    let nv = frame.normal[j];
                    let tv = frame.tangent[j];
                    [
                        n[j] * nv[0] + tau[j] * tv[0],
                        n[j] * nv[1] + tau[j] * tv[1],
                    ]
                })
                .collect();
            Ok(PhaseVelocity {
                n,
                tau,
                xi_dot,
                curve_dot,
            })
        }
    }
}

/// DNO settings for both charts, used by the chart-dispatching rhs.
#[derive(Debug, Clone, Default)]
pub struct RhsSettings {
    pub graph: DnoGraphSettings,
    pub bie: DnoBieSettings,
}

/// Chart-dispatching right-hand side used by the time stepper.
pub fn rhs_chart(
    state: &PhaseState,
    chart: Chart,
    cfg: &FluidConfig,
    settings: &RhsSettings,
) -> Result<PhaseVelocity> {
    match chart {
        Chart::Graph => {
            let eta = state.graph_eta().ok_or_else(|| {
                WaveError::ChartViolation("graph chart lost the uniform x-grid".into())
            })?;
            let (eta_dot, xi_dot) = rhs_graph(&eta, &state.xi, cfg, &settings.graph)?;
            let frame = state.curve.frame()?;
            let n: Vec<f64> = eta_dot.iter().zip(&frame.metric).map(|(e, g)| e / g).collect();
            let slope = {
                let (d1, d2) = state.curve.alpha_derivative()?;
                d1.iter().zip(&d2).map(|(a, b)| b / a).collect::<Vec<f64>>()
            };
            let tau: Vec<f64> = n.iter().zip(&slope).map(|(v, s)| v * s).collect();
            let curve_dot: Vec<[f64; 2]> = eta_dot.iter().map(|&e| [0.0, e]).collect();
            Ok(PhaseVelocity {
                n,
                tau,
                xi_dot,
                curve_dot,
            })
        }
        Chart::ArcLength => rhs_arclength(state, cfg, &settings.bie),
    }
}

/// Whether the surface is still a height graph, and how steep it got.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverturnStatus {
    GraphOk { max_inclination: f64 },
    Overturned { max_inclination: f64 },
}

impl OverturnStatus {
    pub fn max_inclination(&self) -> f64 {
        match self {
            OverturnStatus::GraphOk { max_inclination }
            | OverturnStatus::Overturned { max_inclination } => *max_inclination,
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(self, OverturnStatus::GraphOk { .. })
    }
}

pub fn overturn_status(curve: &SurfaceCurve) -> Result<OverturnStatus> {
    let frame = curve.frame()?;
    let incl = max_inclination(&frame);
    let (d1, _) = curve.alpha_derivative()?;
    if d1.iter().all(|&v| v > 0.0) {
        Ok(OverturnStatus::GraphOk {
            max_inclination: incl,
        })
    } else {
        Ok(OverturnStatus::Overturned {
            max_inclination: incl,
        })
    }
}
