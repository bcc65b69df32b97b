//! Periodic free-surface curves and their differential geometry.
//!
//! A curve is sampled at m uniform parameter nodes alpha_j = 2*pi*j/m and
//! closes up to one horizontal period: gamma(alpha + 2*pi) = gamma(alpha) +
//! (X, 0). The periodic part gamma1 - X*alpha/(2*pi) and gamma2 are
//! differentiated spectrally. `period_x = 0` is a sentinel for closed test
//! curves (circles); dynamics never uses it.

use crate::config::Depth;
use crate::error::{Result, WaveError};
use crate::spectral::Spectral;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurve {
    gamma1: Vec<f64>,
    gamma2: Vec<f64>,
    period_x: f64,
}

/// Frenet data at the nodes. The normal n = (-t2, t1) points out of the
/// fluid (up, for a graph traversed left to right), and the curvature sign
/// follows d tangent/d alpha = kappa * metric * normal.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub tangent: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// |d gamma / d alpha| at each node.
    pub metric: Vec<f64>,
    /// Arc length of one period.
    pub total_length: f64,
}

/// Self-intersection and bottom-contact diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct ChordArcReport {
    /// Minimum over node pairs (and periodic images) of chord/arc distance.
    pub min_ratio: f64,
    /// min(gamma2) + h for finite depth, infinity otherwise.
    pub bottom_clearance: f64,
}

impl SurfaceCurve {
    pub fn new(gamma1: Vec<f64>, gamma2: Vec<f64>, period_x: f64) -> Result<Self> {
        if gamma1.len() != gamma2.len() {
            return Err(WaveError::Input(format!(
                "coordinate arrays differ in length: {} vs {}",
                gamma1.len(),
                gamma2.len()
            )));
        }
        let m = gamma1.len();
        if m < MIN_NODES || m % 2 != 0 {
            return Err(WaveError::Input(format!(
                "node count must be even and >= {MIN_NODES}, got {m}"
            )));
        }
        if !(period_x.is_finite() && period_x >= 0.0) {
            return Err(WaveError::Input(format!(
                "period_x must be finite and >= 0, got {period_x}"
            )));
        }
        if gamma1.iter().chain(gamma2.iter()).any(|v| !v.is_finite()) {
            return Err(WaveError::NonFinite("curve coordinates"));
        }
        Ok(Self {
            gamma1,
            gamma2,
            period_x,
        })
    }

    pub fn m(&self) -> usize {
        self.gamma1.len()
    }

    pub fn period_x(&self) -> f64 {
        self.period_x
    }

    pub fn is_closed(&self) -> bool {
        self.period_x == 0.0
    }

    pub fn gamma1(&self) -> &[f64] {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &[f64] {
        &self.gamma2
    }

    /// gamma1 with the linear part X*alpha/(2*pi) removed; 2*pi-periodic.
    pub fn periodic_part1(&self) -> Vec<f64> {
        let m = self.m() as f64;
        self.gamma1
            .iter()
            .enumerate()
            .map(|(j, &g)| g - self.period_x * j as f64 / m)
            .collect()
    }

    pub fn spectral(&self) -> Result<Spectral> {
        Spectral::new(self.m())
    }

    /// d gamma / d alpha at the nodes.
    pub fn alpha_derivative(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let sp = self.spectral()?;
        let lin = self.period_x / (2.0 * std::f64::consts::PI);
        let mut d1 = sp.derivative(&self.periodic_part1());
        for v in &mut d1 {
            *v += lin;
        }
        let d2 = sp.derivative(&self.gamma2);
        Ok((d1, d2))
    }

    pub fn frame(&self) -> Result<FrameData> {
        let sp = self.spectral()?;
        let (d1, d2) = self.alpha_derivative()?;
        let metric: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a.hypot(*b)).collect();
        let max_m = metric.iter().cloned().fold(0.0, f64::max);
        let min_m = metric.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_m > 1e-10 * max_m.max(1e-300)) || !min_m.is_finite() {
            return Err(WaveError::DegenerateParametrization { min_metric: min_m });
        }
        let dd1 = sp.derivative(&d1);
        let dd2 = sp.derivative(&d2);
        let m = self.m();
        let mut tangent = Vec::with_capacity(m);
        let mut normal = Vec::with_capacity(m);
        let mut curvature = Vec::with_capacity(m);
        for j in 0..m {
            let t = [d1[j] / metric[j], d2[j] / metric[j]];
            tangent.push(t);
            normal.push([-t[1], t[0]]);
            // kappa = (x' y'' - y' x'') / metric^3
            curvature.push((d1[j] * dd2[j] - d2[j] * dd1[j]) / metric[j].powi(3));
        }
        let total_length = metric.iter().sum::<f64>() * 2.0 * std::f64::consts::PI / m as f64;
        Ok(FrameData {
            tangent,
            normal,
            curvature,
            metric,
            total_length,
        })
    }

    /// Cumulative arc length s(alpha_j), with s(0) = 0.
    pub fn arc_positions(&self) -> Result<Vec<f64>> {
        let sp = self.spectral()?;
        let frame = self.frame()?;
        let mean = frame.metric.iter().sum::<f64>() / self.m() as f64;
        let osc: Vec<f64> = frame.metric.iter().map(|&v| v - mean).collect();
        let anti = sp.antiderivative_mean_zero(&osc);
        let nodes = sp.nodes();
        Ok((0..self.m())
            .map(|j| mean * nodes[j] + anti[j] - anti[0])
            .collect())
    }
}

/// Build the curve (x_j, eta_j) on the uniform x-grid of one period.
pub fn graph_to_curve(eta: &[f64], period_x: f64) -> Result<SurfaceCurve> {
    if !(period_x > 0.0) {
        return Err(WaveError::Input(format!(
            "graph curves need period_x > 0, got {period_x}"
        )));
    }
    let m = eta.len() as f64;
    let gamma1 = (0..eta.len()).map(|j| period_x * j as f64 / m).collect();
    SurfaceCurve::new(gamma1, eta.to_vec(), period_x)
}

/// Invert a curve back to a height function on the uniform x-grid.
/// Fails with the overturning diagnostic if gamma1 is not strictly
/// increasing across the period.
pub fn curve_to_graph(curve: &SurfaceCurve) -> Result<Vec<f64>> {
    if curve.is_closed() {
        return Err(WaveError::Input(
            "closed test curves cannot be converted to graphs".into(),
        ));
    }
    let sp = curve.spectral()?;
    let (d1, _) = curve.alpha_derivative()?;
    if d1.iter().any(|&v| v <= 0.0) {
        let frame = curve.frame()?;
        return Err(WaveError::Overturned {
            max_inclination_deg: max_inclination(&frame).to_degrees(),
        });
    }
    let p1 = curve.periodic_part1();
    let p1_spec = sp.to_spectrum(&p1);
    let d1_osc: Vec<f64> = {
        let lin = curve.period_x / (2.0 * std::f64::consts::PI);
        d1.iter().map(|&v| v - lin).collect()
    };
    let d1_spec = sp.to_spectrum(&d1_osc);
    let lin = curve.period_x / (2.0 * std::f64::consts::PI);
    let x0 = curve.gamma1[0];
    let mut beta = Vec::with_capacity(curve.m());
    let mut guess = 0.0;
    for j in 0..curve.m() {
        // Solve gamma1(beta) = x0 + X*j/m, marching the warm start forward.
        let target = x0 + curve.period_x * j as f64 / curve.m() as f64;
        let b = solve_monotone(
            |t| {
                let p = sp.interp_from_spectrum(&p1_spec, &[t])[0];
                let d = sp.interp_from_spectrum(&d1_spec, &[t])[0];
                (lin * t + p - target, lin + d)
            },
            guess - 0.5,
            guess + 2.0 * std::f64::consts::PI,
            1e-13 * (1.0 + curve.period_x),
        )?;
        guess = b;
        beta.push(b);
    }
    Ok(sp.interp(&curve.gamma2, &beta))
}

/// Displace the curve along its normal by the nodewise field `a`.
pub fn normal_perturb(curve: &SurfaceCurve, a: &[f64]) -> Result<SurfaceCurve> {
    if a.len() != curve.m() {
        return Err(WaveError::Input(format!(
            "perturbation length {} does not match curve nodes {}",
            a.len(),
            curve.m()
        )));
    }
    let frame = curve.frame()?;
    let gamma1 = curve
        .gamma1
        .iter()
        .enumerate()
        .map(|(j, &g)| g + a[j] * frame.normal[j][0])
        .collect();
    let gamma2 = curve
        .gamma2
        .iter()
        .enumerate()
        .map(|(j, &g)| g + a[j] * frame.normal[j][1])
        .collect();
    let out = SurfaceCurve::new(gamma1, gamma2, curve.period_x)?;
    out.frame()?; // reject perturbations that fold the parametrization
    Ok(out)
}

/// Resample the same geometric curve at uniform arc length, node 0 pinned
/// at alpha = 0. Extra nodewise fields (e.g. the surface potential) are
/// transported to the new nodes by trigonometric interpolation.
pub fn reparametrize_uniform_with(
    curve: &SurfaceCurve,
    fields: &[&[f64]],
) -> Result<(SurfaceCurve, Vec<Vec<f64>>)> {
    let sp = curve.spectral()?;
    let frame = curve.frame()?;
    let m = curve.m();
    let mean = frame.metric.iter().sum::<f64>() / m as f64;
    let osc: Vec<f64> = frame.metric.iter().map(|&v| v - mean).collect();
    let anti = sp.antiderivative_mean_zero(&osc);
    let anti_spec = sp.to_spectrum(&anti);
    let osc_spec = sp.to_spectrum(&osc);
    let s0 = anti[0];
    let step = 2.0 * std::f64::consts::PI * mean / m as f64; // L/m
    let mut beta = Vec::with_capacity(m);
    beta.push(0.0);
    let mut guess = 0.0;
    for j in 1..m {
        let target = s0 + step * j as f64;
        let b = solve_monotone(
            |t| {
                let a = sp.interp_from_spectrum(&anti_spec, &[t])[0];
                let met = mean + sp.interp_from_spectrum(&osc_spec, &[t])[0];
                (mean * t + a - target, met)
            },
            guess,
            guess + 4.0 * std::f64::consts::PI / m as f64 + 2.0,
            1e-13 * (1.0 + frame.total_length),
        )?;
        guess = b;
        beta.push(b);
    }
    let p1 = curve.periodic_part1();
    let lin = curve.period_x / (2.0 * std::f64::consts::PI);
    let new_p1 = sp.interp(&p1, &beta);
    let gamma1: Vec<f64> = beta
        .iter()
        .zip(&new_p1)
        .map(|(&b, &p)| lin * b + p)
        .collect();
    let gamma2 = sp.interp(&curve.gamma2, &beta);
    let new_curve = SurfaceCurve::new(gamma1, gamma2, curve.period_x)?;
    let moved = fields.iter().map(|f| sp.interp(f, &beta)).collect();
    Ok((new_curve, moved))
}

pub fn reparametrize_uniform(curve: &SurfaceCurve) -> Result<SurfaceCurve> {
    Ok(reparametrize_uniform_with(curve, &[])?.0)
}

/// max over pairs-of-node spacing of (max metric / min metric - 1).
pub fn uniform_metric_deviation(frame: &FrameData) -> f64 {
    let max_m = frame.metric.iter().cloned().fold(0.0, f64::max);
    let min_m = frame.metric.iter().cloned().fold(f64::INFINITY, f64::min);
    max_m / min_m - 1.0
}

/// Largest angle between the tangent and the horizontal, in radians.
/// Exceeds pi/2 exactly when the curve stops being a graph.
pub fn max_inclination(frame: &FrameData) -> f64 {
    frame
        .tangent
        .iter()
        .map(|t| t[1].abs().atan2(t[0]))
        .fold(0.0, f64::max)
}

/// Chord/arc ratios over all node pairs and periodic images, plus bottom
/// clearance. Ratios near zero flag impending self-intersection.
pub fn chord_arc(curve: &SurfaceCurve, depth: Depth) -> Result<ChordArcReport> {
    let s = curve.arc_positions()?;
    let frame = curve.frame()?;
    let len = frame.total_length;
    let m = curve.m();
    let g1 = &curve.gamma1;
    let g2 = &curve.gamma2;
    let mut min_ratio = f64::INFINITY;
    let images: &[i32] = if curve.is_closed() { &[0] } else { &[-1, 0, 1] };
    for i in 0..m {
        for j in i..m {
            for &im in images {
                if i == j && im == 0 {
                    continue;
                }
                let shift = f64::from(im) * curve.period_x;
                let chord = (g1[i] - g1[j] - shift).hypot(g2[i] - g2[j]);
                let arc = if curve.is_closed() {
                    let d = (s[i] - s[j]).abs();
                    d.min(len - d)
                } else {
                    (s[i] - s[j] - f64::from(im) * len).abs()
                };
                if arc > 0.0 {
                    min_ratio = min_ratio.min(chord / arc);
                }
            }
        }
    }
    let bottom_clearance = match depth {
        Depth::Infinite => f64::INFINITY,
        Depth::Finite(h) => g2.iter().cloned().fold(f64::INFINITY, f64::min) + h,
    };
    Ok(ChordArcReport {
        min_ratio,
        bottom_clearance,
    })
}

/// Newton with a bisection fallback for a strictly increasing function on
/// [lo, hi]. `eval` returns (value - target, derivative).
fn solve_monotone(
    eval: impl Fn(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = eval(lo);
    let (fhi, _) = eval(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(WaveError::Input(
            "root bracket failed; parametrization is not monotone".into(),
        ));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (f, df) = eval(x);
        if f.abs() <= tol {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - f / df;
        x = if df > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(WaveError::Input(
        "monotone root search did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Spectral;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn nodes(m: usize) -> Vec<f64> {
        Spectral::new(m).unwrap().nodes()
    }

    fn graph_cosine(a: f64, k: f64, m: usize) -> SurfaceCurve {
        let eta: Vec<f64> = nodes(m).iter().map(|&x| a * (k * x).cos()).collect();
        graph_to_curve(&eta, TWO_PI).unwrap()
    }

    #[test]
    fn flat_frame_is_trivial() {
        let curve = graph_cosine(0.0, 1.0, 32);
        let f = curve.frame().unwrap();
        for j in 0..32 {
            assert_relative_eq!(f.tangent[j][0], 1.0, epsilon = 1e-13);
            assert_relative_eq!(f.tangent[j][1], 0.0, epsilon = 1e-13);
            assert_relative_eq!(f.normal[j][0], 0.0, epsilon = 1e-13);
            assert_relative_eq!(f.normal[j][1], 1.0, epsilon = 1e-13);
            assert!(f.curvature[j].abs() < 1e-13);
            assert_relative_eq!(f.metric[j], 1.0, epsilon = 1e-13);
        }
        assert_relative_eq!(f.total_length, TWO_PI, epsilon = 1e-13);
    }

    #[test]
    fn circle_curvature_and_inward_normal() {
        // Counterclockwise circle of radius 2, closed-curve test mode.
        let m = 64;
        let r = 2.0;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| r * t.cos()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| r * t.sin()).collect();
        let curve = SurfaceCurve::new(g1, g2, 0.0).unwrap();
        let f = curve.frame().unwrap();
        for j in 0..m {
            assert_relative_eq!(f.curvature[j], 1.0 / r, epsilon = 1e-10);
            // Normal points toward the center.
            let to_center = [-curve.gamma1()[j] / r, -curve.gamma2()[j] / r];
            assert_relative_eq!(f.normal[j][0], to_center[0], epsilon = 1e-10);
            assert_relative_eq!(f.normal[j][1], to_center[1], epsilon = 1e-10);
        }
        assert_relative_eq!(f.total_length, TWO_PI * r, epsilon = 1e-10);
    }

    #[test]
    fn graph_curvature_matches_closed_form() {
        // For a single-mode profile the spectral derivatives are exact at
        // any resolution, so the curvature formula must hit the closed
        // form at rounding accuracy even on a steep wave.
        let a = 3.0;
        for m in [64usize, 128] {
            let curve = graph_cosine(a, 1.0, m);
            let f = curve.frame().unwrap();
            for (j, &x) in nodes(m).iter().enumerate() {
                let d = -a * x.sin();
                let dd = -a * x.cos();
                let want = dd / (1.0 + d * d).powf(1.5);
                assert!(
                    (f.curvature[j] - want).abs() < 1e-11,
                    "m {m}, node {j}: {} vs {want}",
                    f.curvature[j]
                );
            }
        }
    }

    #[test]
    fn arc_length_quadrature_converges_spectrally() {
        // The metric sqrt(1 + a^2 sin^2) has branch points a strip
        // asinh(1/a) off the real axis, so the total length carries a
        // resolution-dependent quadrature error that halving the grid
        // spacing must crush.
        let a = 3.0;
        let len = |m: usize| graph_cosine(a, 1.0, m).frame().unwrap().total_length;
        let reference = len(512);
        let e64 = (len(64) - reference).abs();
        let e128 = (len(128) - reference).abs();
        assert!(e128 < 1e-11, "e128 = {e128:e}");
        assert!(e64 >= 1e2 * e128, "e64 = {e64:e}, e128 = {e128:e}");
    }

    #[test]
    fn reparametrize_makes_metric_uniform_and_keeps_geometry() {
        // Graph of 0.5*cos(x) sampled non-uniformly via x = t + 0.3 sin t.
        let m = 128;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t + 0.3 * t.sin()).collect();
        let g2: Vec<f64> = g1.iter().map(|&x| 0.5 * x.cos()).collect();
        let curve = SurfaceCurve::new(g1, g2, TWO_PI).unwrap();
        let uni = reparametrize_uniform(&curve).unwrap();
        let f = uni.frame().unwrap();
        assert!(uniform_metric_deviation(&f) < 1e-8);
        for j in 0..m {
            assert_relative_eq!(
                uni.gamma2()[j],
                0.5 * uni.gamma1()[j].cos(),
                epsilon = 1e-9
            );
        }
        // Node 0 stays pinned.
        assert_relative_eq!(uni.gamma1()[0], curve.gamma1()[0], epsilon = 1e-12);
        // Idempotent on already uniform curves.
        let again = reparametrize_uniform(&uni).unwrap();
        for j in 0..m {
            assert!((again.gamma1()[j] - uni.gamma1()[j]).abs() < 1e-11);
            assert!((again.gamma2()[j] - uni.gamma2()[j]).abs() < 1e-11);
        }
    }

    #[test]
    fn curve_to_graph_round_trip() {
        let m = 128;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t + 0.3 * t.sin()).collect();
        let g2: Vec<f64> = g1.iter().map(|&x| 0.4 * x.cos() + 0.1 * (2.0 * x).sin()).collect();
        let curve = SurfaceCurve::new(g1, g2, TWO_PI).unwrap();
        let eta = curve_to_graph(&curve).unwrap();
        for (j, &x) in nodes(m).iter().enumerate() {
            assert_relative_eq!(eta[j], 0.4 * x.cos() + 0.1 * (2.0 * x).sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn overhanging_curve_is_rejected_as_graph() {
        let m = 64;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t + 1.5 * t.sin()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| 0.3 * t.cos()).collect();
        let curve = SurfaceCurve::new(g1, g2, TWO_PI).unwrap();
        match curve_to_graph(&curve) {
            Err(WaveError::Overturned { .. }) => {}
            other => panic!("expected overturned error, got {other:?}"),
        }
    }

    #[test]
    fn normal_perturb_of_flat_lifts_by_a() {
        let m = 32;
        let curve = graph_cosine(0.0, 1.0, m);
        let a: Vec<f64> = nodes(m).iter().map(|&x| 0.05 * x.cos()).collect();
        let out = normal_perturb(&curve, &a).unwrap();
        for j in 0..m {
            assert_relative_eq!(out.gamma2()[j], a[j], epsilon = 1e-13);
            assert_relative_eq!(out.gamma1()[j], curve.gamma1()[j], epsilon = 1e-13);
        }
    }

    #[test]
    fn chord_arc_flat_and_circle() {
        let flat = graph_cosine(0.0, 1.0, 64);
        let rep = chord_arc(&flat, Depth::Finite(1.0)).unwrap();
        assert!(rep.min_ratio >= 2.0 / PI);
        assert_relative_eq!(rep.min_ratio, 1.0, epsilon = 1e-10);
        assert_relative_eq!(rep.bottom_clearance, 1.0, epsilon = 1e-12);

        let m = 64;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t.cos()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| t.sin()).collect();
        let circle = SurfaceCurve::new(g1, g2, 0.0).unwrap();
        let rep = chord_arc(&circle, Depth::Infinite).unwrap();
        assert_relative_eq!(rep.min_ratio, 2.0 / PI, epsilon = 1e-3);
        assert!(rep.bottom_clearance.is_infinite());
    }

    #[test]
    fn arc_positions_match_length() {
        let curve = graph_cosine(0.5, 2.0, 128);
        let s = curve.arc_positions().unwrap();
        let f = curve.frame().unwrap();
        assert_relative_eq!(s[0], 0.0, epsilon = 1e-14);
        // s is strictly increasing.
        for w in s.windows(2) {
            assert!(w[1] > w[0]);
        }
        // Last gap closes the total length.
        let gap = f.total_length - (s[s.len() - 1] - s[0]);
        let approx_last = f.metric[s.len() - 1] * TWO_PI / 128.0;
        assert_relative_eq!(gap, approx_last, max_relative = 1e-2);
    }

    #[test]
    fn degenerate_parametrization_detected() {
        let m = 32;
        let a = nodes(m);
        // gamma1' = 1 - cos has a zero at alpha = 0.
        let g1: Vec<f64> = a.iter().map(|&t| t - t.sin()).collect();
        let g2 = vec![0.0; m];
        let curve = SurfaceCurve::new(g1, g2, TWO_PI).unwrap();
        match curve.frame() {
            Err(WaveError::DegenerateParametrization { .. }) => {}
            other => panic!("expected degenerate parametrization, got {other:?}"),
        }
    }
}
