//! Dirichlet-Neumann operator on parametrized curves via a periodic
//! boundary-integral formulation.
//!
//! The potential is a double layer over the surface with the x-periodic
//! Laplace kernel. The density solves the second-kind system
//! (-1/2 I + D) mu = xi (limit taken from the fluid side, which lies
//! below the curve). The normal derivative comes from the tangential
//! Maue identity: n = (1/|gamma'|) d/dalpha S[d mu/d alpha], where S
//! carries the same kernel as the representation (minus the image for
//! finite depth, with odd reflection). Finite depth is handled by an
//! image dipole across y = -h, which enforces the bottom Neumann
//! condition exactly.
//!
//! Quadrature: plain trapezoid for everything smooth, Kress log-splitting
//! for the single-layer log singularity. Both converge spectrally on
//! analytic curves.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Depth, DnoBieSettings, FluidConfig};
use crate::curve::{chord_arc, SurfaceCurve};
use crate::error::{Result, WaveError};
use crate::spectral::Spectral;

/// Dense solves above this size give no extra accuracy for smooth data
/// and start to cost real time.
pub const MAX_BIE_NODES: usize = 1024;

/// Interior evaluation result. `near_boundary[i]` marks probes closer to
/// the surface than three mean grid spacings, where plain quadrature of
/// the layer potential loses accuracy.
#[derive(Debug, Clone)]
pub struct HarmonicEval {
    pub values: Vec<f64>,
    pub near_boundary: Vec<bool>,
}

/// Assembled and factorized boundary operator for one fixed curve.
pub struct BieOperator {
    m: usize,
    c: f64,
    depth: Depth,
    lu: LU<f64, Dyn, Dyn>,
    /// Smooth part of the single-layer kernel (log-split remainder plus
    /// the image term), sampled at node pairs.
    smooth_single: DMatrix<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    n1: Vec<f64>,
    n2: Vec<f64>,
    /// dS quadrature weights: metric * 2 pi / M.
    w: Vec<f64>,
    metric: Vec<f64>,
    sp: Spectral,
    mean_spacing: f64,
    period_x: f64,
}

/// ln(cosh(d) - cos(a)) without overflow for large |d|.
fn ln_cosh_minus_cos(d: f64, a: f64) -> f64 {
    let t = 0.5 * d;
    if t.abs() > 300.0 {
        2.0 * t.abs() - std::f64::consts::LN_2
    } else {
        let sh = t.sinh();
        let sn = (0.5 * a).sin();
        (2.0 * (sh * sh + sn * sn)).ln()
    }
}

/// Double-layer kernel value at target (px, py), source node j of the
/// geometry arrays; `c` converts lengths to the 2 pi period.
#[inline]
fn dipole_kernel(c: f64, px: f64, py: f64, xj: f64, yj: f64, n1j: f64, n2j: f64) -> f64 {
    let dxc = c * (px - xj);
    let dyc = c * (py - yj);
    if dyc.abs() > 600.0 {
        // cosh dominates both terms; the kernel saturates to a constant.
        return -(c / (4.0 * PI)) * n2j * dyc.signum();
    }
    let sh = (0.5 * dyc).sinh();
    let sn = (0.5 * dxc).sin();
    let denom = 2.0 * (sh * sh + sn * sn);
    (c / (4.0 * PI)) * (n1j * dxc.sin() + n2j * dyc.sinh()) / denom
}

impl BieOperator {
    pub fn assemble(
        curve: &SurfaceCurve,
        cfg: &FluidConfig,
        settings: &DnoBieSettings,
    ) -> Result<Self> {
        cfg.validate()?;
        if curve.is_closed() {
            return Err(WaveError::Input(
                "boundary-integral solver needs an x-periodic surface, not a closed curve".into(),
            ));
        }
        if (curve.period_x() - cfg.period_x).abs() > 1e-12 * cfg.period_x {
            return Err(WaveError::Input(format!(
                "curve period {} does not match configured period {}",
                curve.period_x(),
                cfg.period_x
            )));
        }
        let m = curve.m();
        if m > MAX_BIE_NODES {
            return Err(WaveError::Input(format!(
                "dense boundary solve capped at {MAX_BIE_NODES} nodes, got {m}"
            )));
        }
        if settings.min_chord_arc <= 0.0 || settings.regularization_eps <= 0.0 {
            return Err(WaveError::Config(
                "chord-arc threshold and regularization epsilon must be positive".into(),
            ));
        }
        let frame = curve.frame()?;
        if settings.check_geometry {
            let report = chord_arc(curve, cfg.depth)?;
            if report.min_ratio < settings.min_chord_arc {
                return Err(WaveError::Geometry(format!(
                    "surface fails the simplicity check: chord/arc ratio {:.3e} below {:.3e}",
                    report.min_ratio, settings.min_chord_arc
                )));
            }
            if report.bottom_clearance <= 0.0 {
                return Err(WaveError::Geometry(format!(
                    "surface touches or crosses the bottom (clearance {:.3e})",
                    report.bottom_clearance
                )));
            }
        }

        let sp = Spectral::new(m)?;
        let alpha = sp.nodes();
        let c = 2.0 * PI / cfg.period_x;
        let x = curve.gamma1().to_vec();
        let y = curve.gamma2().to_vec();
        let n1: Vec<f64> = frame.normal.iter().map(|v| v[0]).collect();
        let n2: Vec<f64> = frame.normal.iter().map(|v| v[1]).collect();
        let w: Vec<f64> = frame.metric.iter().map(|&g| g * 2.0 * PI / m as f64).collect();

        let mut a_buf = vec![0.0f64; m * m];
        let mut s_buf = vec![0.0f64; m * m];
        let degenerate = AtomicBool::new(false);
        let eps = settings.regularization_eps;

        a_buf
            .par_chunks_mut(m)
            .zip(s_buf.par_chunks_mut(m))
            .enumerate()
            .for_each(|(i, (arow, srow))| {
                for j in 0..m {
                    let dxc = c * (x[i] - x[j]);
                    let mut kd;
                    let mut ks;
                    if i == j {
                        kd = frame.curvature[i] / (4.0 * PI);
                        ks = -((c * frame.metric[i]).powi(2) / 2.0).ln() / (4.0 * PI);
                    } else {
                        let dyc = c * (y[i] - y[j]);
                        let sh = (0.5 * dyc).sinh();
                        let sn = (0.5 * dxc).sin();
                        let denom_half = sh * sh + sn * sn;
                        if denom_half <= eps {
                            degenerate.store(true, Ordering::Relaxed);
                            arow[j] = 0.0;
                            srow[j] = 0.0;
                            continue;
                        }
                        kd = (c / (4.0 * PI)) * (n1[j] * dxc.sin() + n2[j] * dyc.sinh())
                            / (2.0 * denom_half);
                        let da = 0.5 * (alpha[i] - alpha[j]);
                        let f = denom_half / (da.sin() * da.sin());
                        ks = -(f / 2.0).ln() / (4.0 * PI);
                    }
                    if let Depth::Finite(h) = cfg.depth {
                        let dysc = c * (y[i] + y[j] + 2.0 * h);
                        kd += dipole_kernel(c, x[i], y[i], x[j], -2.0 * h - y[j], n1[j], -n2[j]);
                        ks += ln_cosh_minus_cos(dysc, dxc) / (4.0 * PI);
                    }
                    arow[j] = kd * w[j];
                    srow[j] = ks;
                }
                arow[i] -= 0.5;
            });
        if degenerate.load(Ordering::Relaxed) {
            return Err(WaveError::Geometry(
                "surface nodes coincide or nearly touch; kernel denominator vanished".into(),
            ));
        }

        let a = DMatrix::from_row_iterator(m, m, a_buf.iter().copied());
        let smooth_single = DMatrix::from_row_iterator(m, m, s_buf.iter().copied());
        let lu = a.lu();
        let total_len = frame.total_length;
        Ok(BieOperator {
            m,
            c,
            depth: cfg.depth,
            lu,
            smooth_single,
            x,
            y,
            n1,
            n2,
            w,
            metric: frame.metric,
            sp,
            mean_spacing: total_len / m as f64,
            period_x: cfg.period_x,
        })
    }

    /// Solve (-1/2 I + D) mu = xi for the dipole density.
    pub fn solve_density(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.m {
            return Err(WaveError::Input(format!(
                "boundary data has {} samples, operator was assembled for {}",
                xi.len(),
                self.m
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::NonFinite("boundary data"));
        }
        let b = DVector::from_row_slice(xi);
        let mu = self
            .lu
            .solve(&b)
            .ok_or_else(|| WaveError::Solver("singular boundary system".into()))?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::Solver(
                "boundary solve produced non-finite density".into(),
            ));
        }
        Ok(mu.as_slice().to_vec())
    }

    /// Unit-normal derivative of the represented potential at the nodes.
    pub fn normal_derivative(&self, mu: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != self.m {
            return Err(WaveError::Input("density length mismatch".into()));
        }
        let f = self.sp.derivative(mu);
        // Log-singular part acts as the multiplier 1/(2|k|).
        let v_sing = self.sp.apply_symbol(&f, |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.5 / k.unsigned_abs() as f64, 0.0)
            }
        });
        let fv = DVector::from_row_slice(&f);
        let v_smooth = &self.smooth_single * fv * (2.0 * PI / self.m as f64);
        let v: Vec<f64> = v_sing
            .iter()
            .zip(v_smooth.iter())
            .map(|(a, b)| a + b)
            .collect();
        let dv = self.sp.derivative(&v);
        Ok(dv.iter().zip(&self.metric).map(|(&d, &g)| d / g).collect())
    }

    pub fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mu = self.solve_density(xi)?;
        self.normal_derivative(&mu)
    }

    /// Potential at interior probe points from a solved density.
    pub fn eval_interior(&self, mu: &[f64], probes: &[(f64, f64)]) -> Result<HarmonicEval> {
        if mu.len() != self.m {
            return Err(WaveError::Input("density length mismatch".into()));
        }
        let mut values = Vec::with_capacity(probes.len());
        let mut near = Vec::with_capacity(probes.len());
        for &(px, py) in probes {
            let mut acc = 0.0;
            let mut min_d2 = f64::INFINITY;
            for j in 0..self.m {
                let mut kd = dipole_kernel(self.c, px, py, self.x[j], self.y[j], self.n1[j], self.n2[j]);
                if let Depth::Finite(h) = self.depth {
                    kd += dipole_kernel(
                        self.c,
                        px,
                        py,
                        self.x[j],
                        -2.0 * h - self.y[j],
                        self.n1[j],
                        -self.n2[j],
                    );
                }
                acc += kd * mu[j] * self.w[j];
                let mut dx = px - self.x[j];
                dx -= self.period_x * (dx / self.period_x).round();
                let dy = py - self.y[j];
                let d2 = dx * dx + dy * dy;
                if d2 < min_d2 {
                    min_d2 = d2;
                }
            }
            values.push(acc);
            near.push(min_d2.sqrt() < 3.0 * self.mean_spacing);
        }
        Ok(HarmonicEval {
            values,
            near_boundary: near,
        })
    }
}

/// One-shot Dirichlet-Neumann application on a curve.
pub fn dno_curve(
    curve: &SurfaceCurve,
    xi: &[f64],
    cfg: &FluidConfig,
    settings: &DnoBieSettings,
) -> Result<Vec<f64>> {
    BieOperator::assemble(curve, cfg, settings)?.apply(xi)
}

/// Solve the Dirichlet problem for boundary data `xi` and evaluate the
/// potential at interior probes.
pub fn harmonic_eval(
    curve: &SurfaceCurve,
    xi: &[f64],
    cfg: &FluidConfig,
    settings: &DnoBieSettings,
    probes: &[(f64, f64)],
) -> Result<HarmonicEval> {
    let op = BieOperator::assemble(curve, cfg, settings)?;
    let mu = op.solve_density(xi)?;
    op.eval_interior(&mu, probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::graph_to_curve;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg_inf() -> FluidConfig {
        FluidConfig::deep_unit()
    }

    fn cfg_depth(h: f64) -> FluidConfig {
        FluidConfig::new(1.0, 0.0, Depth::Finite(h), 2.0 * PI).unwrap()
    }

    fn nodes(m: usize) -> Vec<f64> {
        Spectral::new(m).unwrap().nodes()
    }

    fn l2_rel(got: &[f64], want: &[f64]) -> f64 {
        let num: f64 = got
            .iter()
            .zip(want)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = want.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn flat_infinite_depth_is_exact_multiplier() {
        let m = 64;
        let a = nodes(m);
        let curve = graph_to_curve(&vec![0.0; m], 2.0 * PI).unwrap();
        let xi: Vec<f64> = a.iter().map(|&v| (2.0 * v).cos() + 0.3 * (5.0 * v).sin()).collect();
        let n = dno_curve(&curve, &xi, &cfg_inf(), &DnoBieSettings::default()).unwrap();
        for (j, &v) in a.iter().enumerate() {
            let want = 2.0 * (2.0 * v).cos() + 1.5 * (5.0 * v).sin();
            assert_relative_eq!(n[j], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_finite_depth_is_exact_multiplier() {
        let m = 64;
        let h = 1.0;
        let a = nodes(m);
        let curve = graph_to_curve(&vec![0.0; m], 2.0 * PI).unwrap();
        for k in 1..=3 {
            let xi: Vec<f64> = a.iter().map(|&v| (k as f64 * v).cos()).collect();
            let n = dno_curve(&curve, &xi, &cfg_depth(h), &DnoBieSettings::default()).unwrap();
            let fac = k as f64 * (k as f64 * h).tanh();
            for (j, &v) in a.iter().enumerate() {
                assert_relative_eq!(n[j], fac * (k as f64 * v).cos(), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let m = 96;
        let a = nodes(m);
        let eta: Vec<f64> = a.iter().map(|&v| 0.2 * v.cos() + 0.05 * (3.0 * v).sin()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let xi = vec![2.0; m];
        for cfg in [cfg_inf(), cfg_depth(1.5)] {
            let n = dno_curve(&curve, &xi, &cfg, &DnoBieSettings::default()).unwrap();
            for v in &n {
                assert!(v.abs() < 1e-11, "constant leaked: {v:e}");
            }
        }
    }

    /// The analytic oracle behind the headline accuracy requirement:
    /// phi = e^y cos x restricted to eta = amp * cos x, infinite depth.
    fn harmonic_oracle_error_amp(m: usize, amp: f64) -> f64 {
        let a = nodes(m);
        let eta: Vec<f64> = a.iter().map(|&v| amp * v.cos()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let xi: Vec<f64> = a.iter().zip(&eta).map(|(&v, &e)| e.exp() * v.cos()).collect();
        let n = dno_curve(&curve, &xi, &cfg_inf(), &DnoBieSettings::default()).unwrap();
        let want: Vec<f64> = a
            .iter()
            .zip(&eta)
            .map(|(&v, &e)| {
                let ex = -amp * v.sin();
                let g = (1.0 + ex * ex).sqrt();
                e.exp() * (v.cos() + ex * v.sin()) / g
            })
            .collect();
        l2_rel(&n, &want)
    }

    #[test]
    fn harmonic_oracle_accuracy() {
        let e128 = harmonic_oracle_error_amp(128, 0.1);
        assert!(e128 <= 1e-8, "relative error {e128:e} at m = 128");
    }

    #[test]
    #[ignore = "diagnostic error table; run with --ignored to retune tolerances"]
    fn harmonic_oracle_error_grid() {
        for amp in [0.1, 1.0, 3.0] {
            for m in [16usize, 32, 48, 64, 128, 192] {
                let e = harmonic_oracle_error_amp(m, amp);
                println!("amp {amp}, m {m}: {e:.3e}");
            }
        }
    }

    #[test]
    fn harmonic_oracle_converges_spectrally() {
        // At the headline amplitude 0.1 the truncation error is below the
        // rounding floor (~1e-14) for every m >= 32, which hides the decay;
        // amplitude 3 keeps it visible through two refinements
        // (measured: 3.8e-3 -> 1.7e-8 -> 3.5e-14).
        let e16 = harmonic_oracle_error_amp(16, 3.0);
        let e32 = harmonic_oracle_error_amp(32, 3.0);
        let e64 = harmonic_oracle_error_amp(64, 3.0);
        println!("oracle error m=16: {e16:.3e}, m=32: {e32:.3e}, m=64: {e64:.3e}");
        assert!(e32 <= 1e-2 * e16, "no spectral decay: {e16:e} -> {e32:e}");
        assert!(e64 <= 1e-2 * e32, "no spectral decay: {e32:e} -> {e64:e}");
    }

    #[test]
    fn finite_depth_curved_oracle() {
        // phi = cosh(y+h) cos x / cosh h has zero bottom flux; exercises
        // both image kernels.
        let m = 128;
        let h = 1.0;
        let a = nodes(m);
        let eta: Vec<f64> = a.iter().map(|&v| 0.05 * (2.0 * v).cos()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let xi: Vec<f64> = a
            .iter()
            .zip(&eta)
            .map(|(&v, &e)| (e + h).cosh() * v.cos() / h.cosh())
            .collect();
        let n = dno_curve(&curve, &xi, &cfg_depth(h), &DnoBieSettings::default()).unwrap();
        let want: Vec<f64> = a
            .iter()
            .zip(&eta)
            .map(|(&v, &e)| {
                let ex = -0.1 * (2.0 * v).sin();
                let g = (1.0 + ex * ex).sqrt();
                let py = (e + h).sinh() * v.cos() / h.cosh();
                let px = -(e + h).cosh() * v.sin() / h.cosh();
                (py - ex * px) / g
            })
            .collect();
        let err = l2_rel(&n, &want);
        assert!(err < 1e-9, "finite-depth oracle error {err:e}");
    }

    #[test]
    fn self_adjoint_positive_in_surface_measure() {
        let m = 96;
        let a = nodes(m);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eta: Vec<f64> = a.iter().map(|&v| 0.15 * v.cos() + 0.04 * (2.0 * v).sin()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let frame = curve.frame().unwrap();
        let op = BieOperator::assemble(&curve, &cfg_inf(), &DnoBieSettings::default()).unwrap();
        let band = 8usize;
        let mut random_xi = || -> Vec<f64> {
            let mut f = vec![0.0; m];
            for k in 1..=band {
                let (c, s): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                for (j, &al) in a.iter().enumerate() {
                    f[j] += c * (k as f64 * al).cos() + s * (k as f64 * al).sin();
                }
            }
            f
        };
        for _ in 0..4 {
            let xi1 = random_xi();
            let xi2 = random_xi();
            let g1 = op.apply(&xi1).unwrap();
            let g2 = op.apply(&xi2).unwrap();
            let ip = |f: &[f64], g: &[f64]| -> f64 {
                f.iter()
                    .zip(g)
                    .zip(&frame.metric)
                    .map(|((a, b), gm)| a * b * gm * 2.0 * PI / m as f64)
                    .sum()
            };
            let defect = (ip(&xi1, &g2) - ip(&g1, &xi2)).abs();
            let scale = ip(&xi1, &xi1).sqrt() * ip(&xi2, &xi2).sqrt();
            assert!(defect <= 1e-9 * scale, "symmetry defect {defect:e} vs scale {scale:e}");
            assert!(ip(&xi1, &g1) >= -1e-10, "negative energy {:e}", ip(&xi1, &g1));
        }
    }

    #[test]
    fn interior_evaluation_matches_oracle() {
        let m = 128;
        let a = nodes(m);
        let eta: Vec<f64> = a.iter().map(|&v| 0.1 * v.cos()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let xi: Vec<f64> = a.iter().zip(&eta).map(|(&v, &e)| e.exp() * v.cos()).collect();
        let probes = vec![(0.3, -0.7), (2.0, -1.4), (0.1, 0.1 * 0.1f64.cos() - 0.01), (1.0, -5.0)];
        let out = harmonic_eval(&curve, &xi, &cfg_inf(), &DnoBieSettings::default(), &probes).unwrap();
        for (i, &(px, py)) in probes.iter().enumerate().take(2) {
            let want = py.exp() * px.cos();
            assert!(
                (out.values[i] - want).abs() < 1e-8,
                "probe {i}: got {} want {want}",
                out.values[i]
            );
            assert!(!out.near_boundary[i]);
        }
        assert!(out.near_boundary[2], "probe 0.01 under the surface must warn");
        assert!(
            out.values[3].abs() <= (-5.0f64).exp() * (1.0 + 1e-6),
            "deep probe decay violated: {:e}",
            out.values[3]
        );
    }

    #[test]
    fn constant_data_gives_constant_potential() {
        let m = 64;
        let a = nodes(m);
        let eta: Vec<f64> = a.iter().map(|&v| 0.1 * (2.0 * v).sin()).collect();
        let curve = graph_to_curve(&eta, 2.0 * PI).unwrap();
        let xi = vec![1.0; m];
        let probes = vec![(0.5, -0.8), (3.0, -2.0)];
        let out = harmonic_eval(&curve, &xi, &cfg_inf(), &DnoBieSettings::default(), &probes).unwrap();
        for v in &out.values {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn closed_curves_rejected() {
        let m = 64;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| 2.0 * t.cos()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| 2.0 * t.sin()).collect();
        let curve = SurfaceCurve::new(g1, g2, 0.0).unwrap();
        let xi = vec![0.0; m];
        let err = dno_curve(&curve, &xi, &cfg_inf(), &DnoBieSettings::default());
        assert!(matches!(err, Err(WaveError::Input(_))));
    }

    #[test]
    fn near_touching_geometry_rejected() {
        // A deep narrow-necked profile whose chord/arc ratio collapses.
        let m = 256;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t + 1.06 * t.sin()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| -1.8 * t.cos()).collect();
        let curve = SurfaceCurve::new(g1, g2, 2.0 * PI).unwrap();
        let xi = vec![0.0; m];
        let settings = DnoBieSettings {
            min_chord_arc: 0.2,
            ..DnoBieSettings::default()
        };
        let err = dno_curve(&curve, &xi, &cfg_inf(), &settings);
        assert!(matches!(err, Err(WaveError::Geometry(_))), "got {err:?}");
    }

    #[test]
    fn random_curve_self_adjointness_overhanging() {
        // Non-graph parametrization: x = alpha + 0.5 sin(alpha).
        let m = 128;
        let a = nodes(m);
        let g1: Vec<f64> = a.iter().map(|&t| t + 0.5 * t.sin()).collect();
        let g2: Vec<f64> = a.iter().map(|&t| 0.25 * t.cos() + 0.1 * (3.0 * t).sin()).collect();
        let curve = SurfaceCurve::new(g1, g2, 2.0 * PI).unwrap();
        let frame = curve.frame().unwrap();
        let op = BieOperator::assemble(&curve, &cfg_depth(2.0), &DnoBieSettings::default()).unwrap();
        let xi1: Vec<f64> = a.iter().map(|&t| (2.0 * t).cos()).collect();
        let xi2: Vec<f64> = a.iter().map(|&t| t.sin() + 0.3 * (4.0 * t).cos()).collect();
        let g1v = op.apply(&xi1).unwrap();
        let g2v = op.apply(&xi2).unwrap();
        let ip = |f: &[f64], g: &[f64]| -> f64 {
            f.iter()
                .zip(g)
                .zip(&frame.metric)
                .map(|((x, y), gm)| x * y * gm * 2.0 * PI / m as f64)
                .sum()
        };
        let defect = (ip(&xi1, &g2v) - ip(&g1v, &xi2)).abs();
        let scale = ip(&xi1, &xi1).sqrt() * ip(&xi2, &xi2).sqrt();
        assert!(defect <= 1e-9 * scale, "defect {defect:e}");
    }
}
