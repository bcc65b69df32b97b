//! Dirichlet-Neumann operator for graph surfaces y = eta(x) via the
//! higher-order spectral operator expansion.
//!
//! The expansion is built from the flat-surface Fourier multipliers
//! Lambda_j (the j-th vertical derivative of the harmonic extension at
//! y = 0) by Taylor-transferring boundary data between y = 0 and y = eta.
//! Truncation keeps every term of total degree <= order in eta.

use num_complex::Complex64;

use crate::config::{Depth, DnoGraphSettings, FluidConfig};
use crate::curve::MIN_NODES;
use crate::error::{Result, WaveError};
use crate::spectral::Spectral;

/// Vertical-derivative multiplier at wavenumber kappa = c*k:
/// kappa^j for even j, kappa^j * tanh(h*kappa) for odd j.
fn lambda_symbol(j: usize, kappa: f64, depth: Depth) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let even = kappa.powi(j as i32);
    if j % 2 == 0 {
        even
    } else {
        match depth {
            Depth::Infinite => even,
            Depth::Finite(h) => even * (h * kappa).tanh(),
        }
    }
}

struct Workspace {
    sp: Spectral,
    c: f64,
    depth: Depth,
    /// eta^j / j! nodewise, j = 0..=order.
    eta_pows: Vec<Vec<f64>>,
    /// Spectra of the per-order boundary functions.
    phi_spec: Vec<Vec<Complex64>>,
}

impl Workspace {
    fn lambda(&self, j: usize, spec: &[Complex64]) -> Vec<f64> {
        let m = self.sp.m();
        let mut out = spec.to_vec();
        for (i, v) in out.iter_mut().enumerate() {
            let kappa = self.c * self.sp.signed_k(i).unsigned_abs() as f64;
            *v *= lambda_symbol(j, kappa, self.depth);
        }
        debug_assert_eq!(out.len(), m);
        self.sp.to_samples(&out)
    }

    fn dx_lambda(&self, j: usize, spec: &[Complex64]) -> Vec<f64> {
        let ny = (self.sp.m() / 2) as i64;
        let mut out = spec.to_vec();
        for (i, v) in out.iter_mut().enumerate() {
            let k = self.sp.signed_k(i);
            let kappa = self.c * k.unsigned_abs() as f64;
            let sym = if k.abs() == ny {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.c * k as f64) * lambda_symbol(j, kappa, self.depth)
            };
            *v *= sym;
        }
        self.sp.to_samples(&out)
    }
}

/// Surface vertical and horizontal velocity sums truncated at `order`.
fn expand(eta: &[f64], xi: &[f64], cfg: &FluidConfig, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = eta.len();
    if xi.len() != m {
        return Err(WaveError::Input(format!(
            "eta and xi differ in length: {m} vs {}",
            xi.len()
        )));
    }
    if m < MIN_NODES {
        return Err(WaveError::Input(format!(
            "graph solver needs at least {MIN_NODES} nodes, got {m}"
        )));
    }
    if eta.iter().chain(xi.iter()).any(|v| !v.is_finite()) {
        return Err(WaveError::NonFinite("graph solver input"));
    }
    let sp = Spectral::new(m)?;
    let c = 2.0 * std::f64::consts::PI / cfg.period_x;

    let mut eta_pows = Vec::with_capacity(order + 1);
    eta_pows.push(vec![1.0; m]);
    for j in 1..=order {
        let prev = &eta_pows[j - 1];
        let next: Vec<f64> = prev
            .iter()
            .zip(eta)
            .map(|(&p, &e)| p * e / j as f64)
            .collect();
        eta_pows.push(next);
    }

    let mut ws = Workspace {
        sp,
        c,
        depth: cfg.depth,
        eta_pows,
        phi_spec: Vec::with_capacity(order + 1),
    };
    let xi_spec = ws.sp.to_spectrum(xi);
    ws.phi_spec.push(xi_spec);

    // phi^(n) collects the degree-n correction to the y = 0 boundary data.
    for n in 1..=order {
        let mut acc = vec![0.0; m];
        for j in 1..=n {
            let term = ws.lambda(j, &ws.phi_spec[n - j]);
            for (a, (t, e)) in acc.iter_mut().zip(term.iter().zip(&ws.eta_pows[j])) {
                *a += t * e;
            }
        }
        for a in &mut acc {
            *a = -*a;
        }
        let spec = ws.sp.to_spectrum(&acc);
        ws.phi_spec.push(spec);
    }

    let mut w_sum = vec![0.0; m];
    let mut v_sum = vec![0.0; m];
    for n in 0..=order {
        for j in 0..=(order - n) {
            let term = ws.lambda(j + 1, &ws.phi_spec[n]);
            for (w, (t, e)) in w_sum.iter_mut().zip(term.iter().zip(&ws.eta_pows[j])) {
                *w += t * e;
            }
        }
        // The eta_x factor outside raises the degree by one, so the
        // horizontal sum stops one order earlier.
        for j in 0..(order - n + 1).saturating_sub(1) {
            let term = ws.dx_lambda(j, &ws.phi_spec[n]);
            for (v, (t, e)) in v_sum.iter_mut().zip(term.iter().zip(&ws.eta_pows[j])) {
                *v += t * e;
            }
        }
    }
    Ok((w_sum, v_sum))
}

/// Graph-chart operator G_chart(eta) xi = (phi_y - eta_x phi_x)|_{y=eta}:
/// the normal derivative scaled by sqrt(1 + eta_x^2).
pub fn dno_graph_chart(
    eta: &[f64],
    xi: &[f64],
    cfg: &FluidConfig,
    settings: &DnoGraphSettings,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    settings.validate()?;
    let (w, v) = expand(eta, xi, cfg, settings.expansion_order)?;
    let sp = Spectral::new(eta.len())?;
    let c = 2.0 * std::f64::consts::PI / cfg.period_x;
    let eta_x: Vec<f64> = sp.derivative(eta).iter().map(|&d| c * d).collect();
    Ok(w
        .iter()
        .zip(v.iter().zip(&eta_x))
        .map(|(&wv, (&vv, &ex))| wv - ex * vv)
        .collect())
}

/// Dirichlet-Neumann operator with unit normal: N . grad(phi) on the
/// surface, i.e. the chart operator divided by sqrt(1 + eta_x^2).
pub fn dno_graph(
    eta: &[f64],
    xi: &[f64],
    cfg: &FluidConfig,
    settings: &DnoGraphSettings,
) -> Result<Vec<f64>> {
    let chart = dno_graph_chart(eta, xi, cfg, settings)?;
    let sp = Spectral::new(eta.len())?;
    let c = 2.0 * std::f64::consts::PI / cfg.period_x;
    let eta_x = sp.derivative(eta);
    Ok(chart
        .iter()
        .zip(&eta_x)
        .map(|(&g, &d)| g / (1.0 + (c * d) * (c * d)).sqrt())
        .collect())
}
