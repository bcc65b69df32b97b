//! Experiment drivers and their machine-readable outputs.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use freewave_core::config::{Depth, DnoBieSettings, DnoGraphSettings, FluidConfig};
use freewave_core::curve::{graph_to_curve, reparametrize_uniform_with, SurfaceCurve};
use freewave_core::dno::{dno_curve, dno_graph};
use freewave_core::dynamics::Chart;
use freewave_core::hamiltonian::{
    grad_k_general, grad_normal_k_chart, grad_normal_u, grad_xi_k, kinetic_energy,
    potential_energy, PhaseState, SolverChoice,
};
use freewave_core::integrate::{run, step, suggest_dt, Trajectory};
use freewave_core::spectral::Spectral;

use crate::spec::{InitialRecipe, SimSpec};

/// Exit disposition of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Halted,
}

/// On-disk curve record for initial = "file".
#[derive(Debug, Serialize, Deserialize)]
struct CurveFileRecord {
    m: usize,
    period_x: f64,
    gamma1: Vec<f64>,
    gamma2: Vec<f64>,
    xi: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SnapshotRecord<'a> {
    t: f64,
    m: usize,
    period_x: f64,
    gamma1: &'a [f64],
    gamma2: &'a [f64],
    xi: &'a [f64],
}

fn build_graph_data(spec: &SimSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let sp = Spectral::new(spec.m).map_err(anyhow::Error::from)?;
    let alpha = sp.nodes();
    match &spec.initial {
        InitialRecipe::Cosine { a, k } => {
            let eta: Vec<f64> = alpha.iter().map(|&t| a * (k * t).cos()).collect();
            Ok((eta, vec![0.0; spec.m]))
        }
        InitialRecipe::Steep { a, b } => {
            let eta: Vec<f64> = alpha.iter().map(|&t| a * t.cos()).collect();
            let xi: Vec<f64> = alpha.iter().map(|&t| b * t.sin()).collect();
            Ok((eta, xi))
        }
        InitialRecipe::File { .. } => bail!("file-loaded initial data is not a graph recipe"),
    }
}

/// Construct the chart-appropriate initial state.
fn initial_state(spec: &SimSpec) -> Result<PhaseState> {
    let state = match &spec.initial {
        InitialRecipe::File { path } => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read curve file {}", path.display()))?;
            let rec: CurveFileRecord = serde_json::from_str(&text)
                .with_context(|| format!("curve file {} is not valid", path.display()))?;
            if rec.gamma1.len() != rec.m || rec.gamma2.len() != rec.m || rec.xi.len() != rec.m {
                bail!("curve file arrays disagree with m = {}", rec.m);
            }
            let curve = SurfaceCurve::new(rec.gamma1, rec.gamma2, rec.period_x)?;
            PhaseState::new(curve, rec.xi)?
        }
        _ => {
            let (eta, xi) = build_graph_data(spec)?;
            PhaseState::from_graph(&eta, &xi, spec.fluid.period_x)?
        }
    };
    match spec.chart {
        Chart::Graph => Ok(state),
        Chart::ArcLength => {
            let (curve, mut fields) = reparametrize_uniform_with(&state.curve, &[&state.xi])?;
            Ok(PhaseState::new(curve, fields.remove(0))?)
        }
    }
}

fn ensure_out_dir(spec: &SimSpec) -> Result<()> {
    fs::create_dir_all(&spec.out_dir)
        .with_context(|| format!("cannot create output dir {}", spec.out_dir.display()))
}

fn write_energy_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "t,K,U,U_sigma,H,dH_rel")?;
    let h0 = traj.energy_series[0].1.total;
    let scale = h0.abs().max(f64::MIN_POSITIVE);
    for (t, e) in &traj.energy_series {
        let drel = (e.total - h0) / scale;
        writeln!(
            f,
            "{t},{},{},{},{},{drel}",
            e.kinetic, e.potential_grav, e.potential_surf, e.total
        )?;
    }
    Ok(())
}

fn write_snapshots_jsonl(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for snap in &traj.snapshots {
        let rec = SnapshotRecord {
            t: snap.t,
            m: snap.state.m(),
            period_x: snap.state.curve.period_x(),
            gamma1: snap.state.curve.gamma1(),
            gamma2: snap.state.curve.gamma2(),
            xi: &snap.state.xi,
        };
        writeln!(f, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

fn write_summary(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn resolved_dt(spec: &SimSpec, state: &PhaseState) -> Result<f64> {
    match spec.dt {
        Some(dt) => Ok(dt),
        None => Ok(suggest_dt(state, &spec.fluid)?),
    }
}

pub fn simulate(spec: &SimSpec) -> Result<Outcome> {
    ensure_out_dir(spec)?;
    let state = initial_state(spec)?;
    let dt = resolved_dt(spec, &state)?;
    let stepper = spec.stepper(dt);
    let traj = run(&state, spec.chart, &spec.fluid, &stepper)?;
    write_energy_csv(&spec.out_dir.join("energy.csv"), &traj)?;
    write_snapshots_jsonl(&spec.out_dir.join("snapshots.jsonl"), &traj)?;
    let halt = traj.halt_reason.as_ref().map(|r| r.to_string());
    let summary = json!({
        "experiment": "simulate",
        "chart": match spec.chart { Chart::Graph => "graph", Chart::ArcLength => "arclength" },
        "m": spec.m,
        "dt": dt,
        "t_end": spec.t_end,
        "final_time": traj.final_time(),
        "snapshots": traj.snapshots.len(),
        "max_energy_drift": traj.max_energy_drift(),
        "halt_reason": halt,
    });
    write_summary(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(if traj.halt_reason.is_some() {
        Outcome::Halted
    } else {
        Outcome::Clean
    })
}

/// Dominant-line frequency from a uniformly sampled probe: Hann window,
/// dominant DFT bin, log-parabolic peak interpolation.
pub fn dominant_frequency(series: &[f64], dt: f64) -> Result<f64> {
    let n = series.len();
    if n < 16 {
        bail!("probe series too short for a frequency fit");
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let w = 0.5 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos());
            (v - mean) * w
        })
        .collect();
    let half = n / 2;
    let mut mags = Vec::with_capacity(half);
    for k in 0..half {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (j, &v) in windowed.iter().enumerate() {
            let ph = 2.0 * PI * (k * j % n) as f64 / n as f64;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        mags.push(re.hypot(im));
    }
    let (peak, _) = mags
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite magnitudes"))
        .expect("nonempty spectrum");
    if peak + 1 >= half || peak < 2 {
        bail!("spectral peak at the edge of the resolved band");
    }
    let lm = |k: usize| mags[k].max(f64::MIN_POSITIVE).ln();
    let (l0, l1, l2) = (lm(peak - 1), lm(peak), lm(peak + 1));
    let denom = l0 - 2.0 * l1 + l2;
    let delta = if denom.abs() > 1e-300 {
        0.5 * (l0 - l2) / denom
    } else {
        0.0
    };
    Ok(2.0 * PI * (peak as f64 + delta) / (n as f64 * dt))
}

/// Theoretical frequency of mode k: omega^2 = (g k + sigma k^3) tanh(k h),
/// with k scaled by 2 pi / X.
pub fn linear_frequency(k: f64, cfg: &FluidConfig) -> f64 {
    let kappa = k * 2.0 * PI / cfg.period_x;
    let tanh = match cfg.depth {
        Depth::Infinite => 1.0,
        Depth::Finite(h) => (kappa * h).tanh(),
    };
    ((cfg.gravity * kappa + cfg.surface_tension * kappa.powi(3)) * tanh).sqrt()
}

/// Measure the oscillation frequency of the initialized mode by probing
/// the surface height at the first node over many periods.
pub fn measure_dispersion(spec: &SimSpec) -> Result<(f64, f64)> {
    let k = match &spec.initial {
        InitialRecipe::Cosine { k, .. } => *k,
        _ => bail!("dispersion needs the cosine recipe"),
    };
    let omega_theory = linear_frequency(k, &spec.fluid);
    let period = 2.0 * PI / omega_theory;
    let n_periods = 16.0;
    let state = initial_state(spec)?;
    // The probe wants dozens of samples per oscillation, but never a step
    // outside the integrator's stability region; capillary runs on fine
    // grids hit the second bound long before the first.
    let dt = match spec.dt {
        Some(dt) => dt,
        None => (period / 64.0).min(suggest_dt(&state, &spec.fluid)?),
    };
    let steps = ((n_periods * period) / dt).ceil() as usize;
    let mut stepper = spec.stepper(dt);
    stepper.max_time = n_periods * period;
    let mut probe = Vec::with_capacity(steps + 1);
    let height_at_first_node = |s: &PhaseState| s.curve.gamma2()[0];
    let mut s = state;
    probe.push(height_at_first_node(&s));
    for _ in 0..steps {
        s = step(&s, spec.chart, &spec.fluid, &stepper)?;
        probe.push(height_at_first_node(&s));
    }
    let omega = dominant_frequency(&probe, dt)?;
    Ok((omega, omega_theory))
}

pub fn dispersion(spec: &SimSpec) -> Result<Outcome> {
    ensure_out_dir(spec)?;
    let (omega, omega_theory) = measure_dispersion(spec)?;
    let k = match &spec.initial {
        InitialRecipe::Cosine { k, .. } => *k,
        _ => unreachable!("measure_dispersion enforces the recipe"),
    };
    let rel = (omega - omega_theory).abs() / omega_theory;
    let summary = json!({
        "experiment": "dispersion",
        "m": spec.m,
        "modes": [{
            "k": k,
            "omega_measured": omega,
            "omega_theory": omega_theory,
            "rel_error": rel,
        }],
    });
    write_summary(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(Outcome::Clean)
}

/// Weighted surface inner product sum(f g metric) * 2 pi / m.
fn ds_inner(f: &[f64], g: &[f64], metric: &[f64]) -> f64 {
    let w0 = 2.0 * PI / f.len() as f64;
    f.iter()
        .zip(g)
        .zip(metric)
        .map(|((a, b), w)| a * b * w)
        .sum::<f64>()
        * w0
}

fn band_limited(rng: &mut impl rand::Rng, m: usize, band: usize) -> Vec<f64> {
    let sp = Spectral::new(m).expect("valid grid");
    let alpha = sp.nodes();
    let mut out = vec![0.0; m];
    for k in 1..=band {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let s: f64 = rng.gen_range(-1.0..1.0);
        for (j, &t) in alpha.iter().enumerate() {
            out[j] += c * (k as f64 * t).cos() + s * (k as f64 * t).sin();
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct GradCheckEntry {
    pub gradient: String,
    pub fd_value: f64,
    pub analytic_value: f64,
    pub rel_error: f64,
}

/// Directional finite-difference checks of the four energy gradients on
/// a seeded random state.
pub fn gradcheck_entries(spec: &SimSpec) -> Result<Vec<GradCheckEntry>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.m;
    let cfg = &spec.fluid;
    let solver = SolverChoice::bie();

    let eta: Vec<f64> = band_limited(&mut rng, m, 4).iter().map(|v| 0.03 * v).collect();
    let xi: Vec<f64> = band_limited(&mut rng, m, 5).iter().map(|v| 0.2 * v).collect();
    let state = PhaseState::from_graph(&eta, &xi, cfg.period_x)?;
    let frame = state.curve.frame()?;
    let eps = 1e-5;
    let mut entries = Vec::new();
    let rel = |fd: f64, an: f64| (fd - an).abs() / fd.abs().max(an.abs()).max(1e-12);

    // d/de K(xi + e d) against <grad_xi K, d>_dS.
    {
        let d = band_limited(&mut rng, m, 5);
        let g = grad_xi_k(&state, cfg, &solver)?;
        let analytic = ds_inner(&g, &d, &frame.metric);
        let k_at = |sign: f64| -> Result<f64> {
            let xi_p: Vec<f64> = xi.iter().zip(&d).map(|(x, v)| x + sign * eps * v).collect();
            let s = PhaseState::new(state.curve.clone(), xi_p)?;
            Ok(kinetic_energy(&s, cfg, &solver)?)
        };
        let fd = (k_at(1.0)? - k_at(-1.0)?) / (2.0 * eps);
        entries.push(GradCheckEntry {
            gradient: "grad_xi_K".into(),
            fd_value: fd,
            analytic_value: analytic,
            rel_error: rel(fd, analytic),
        });
    }

    // Normal perturbations of the potential terms.
    {
        let b = band_limited(&mut rng, m, 4);
        let g = grad_normal_u(&state.curve, cfg)?;
        let analytic = ds_inner(&g, &b, &frame.metric);
        let u_at = |sign: f64| -> Result<f64> {
            let scaled: Vec<f64> = b.iter().map(|v| sign * eps * v).collect();
            let c = freewave_core::curve::normal_perturb(&state.curve, &scaled)?;
            let (u, us) = potential_energy(&c, cfg)?;
            Ok(u + us)
        };
        let fd = (u_at(1.0)? - u_at(-1.0)?) / (2.0 * eps);
        entries.push(GradCheckEntry {
            gradient: "grad_normal_U".into(),
            fd_value: fd,
            analytic_value: analytic,
            rel_error: rel(fd, analytic),
        });
    }

    // Shape derivative of K: normal part, then tangential part.
    {
        let (gn, gt) = grad_k_general(&state, cfg, &solver)?;
        let b = band_limited(&mut rng, m, 4);
        let analytic_n = ds_inner(&gn, &b, &frame.metric);
        let k_at_normal = |sign: f64| -> Result<f64> {
            let scaled: Vec<f64> = b.iter().map(|v| sign * eps * v).collect();
            let c = freewave_core::curve::normal_perturb(&state.curve, &scaled)?;
            let s = PhaseState::new(c, xi.clone())?;
            Ok(kinetic_energy(&s, cfg, &solver)?)
        };
        let fd_n = (k_at_normal(1.0)? - k_at_normal(-1.0)?) / (2.0 * eps);
        entries.push(GradCheckEntry {
            gradient: "grad_K_normal".into(),
            fd_value: fd_n,
            analytic_value: analytic_n,
            rel_error: rel(fd_n, analytic_n),
        });

        let bt = band_limited(&mut rng, m, 4);
        let analytic_t = ds_inner(&gt, &bt, &frame.metric);
        let k_at_tangent = |sign: f64| -> Result<f64> {
            let g1: Vec<f64> = (0..m)
                .map(|j| state.curve.gamma1()[j] + sign * eps * bt[j] * frame.tangent[j][0])
                .collect();
            let g2: Vec<f64> = (0..m)
                .map(|j| state.curve.gamma2()[j] + sign * eps * bt[j] * frame.tangent[j][1])
                .collect();
            let c = SurfaceCurve::new(g1, g2, cfg.period_x)?;
            let s = PhaseState::new(c, xi.clone())?;
            Ok(kinetic_energy(&s, cfg, &solver)?)
        };
        let fd_t = (k_at_tangent(1.0)? - k_at_tangent(-1.0)?) / (2.0 * eps);
        entries.push(GradCheckEntry {
            gradient: "grad_K_tangential".into(),
            fd_value: fd_t,
            analytic_value: analytic_t,
            rel_error: rel(fd_t, analytic_t),
        });
    }

    // Graph-chart gradient under vertical variations; the dS pairing of
    // the normal displacement collapses to a flat sum.
    {
        let g = grad_normal_k_chart(&state, cfg, &solver, freewave_core::hamiltonian::ChartCoupling::Graph)?;
        let b: Vec<f64> = band_limited(&mut rng, m, 4);
        let w0 = 2.0 * PI / m as f64;
        let analytic: f64 = g.iter().zip(&b).map(|(x, v)| x * v).sum::<f64>() * w0;
        let k_at = |sign: f64| -> Result<f64> {
            let eta_p: Vec<f64> = eta.iter().zip(&b).map(|(e, v)| e + sign * eps * v).collect();
            let s = PhaseState::from_graph(&eta_p, &xi, cfg.period_x)?;
            Ok(kinetic_energy(&s, cfg, &solver)?)
        };
        let fd = (k_at(1.0)? - k_at(-1.0)?) / (2.0 * eps);
        entries.push(GradCheckEntry {
            gradient: "grad_normal_K_chart".into(),
            fd_value: fd,
            analytic_value: analytic,
            rel_error: rel(fd, analytic),
        });
    }

    Ok(entries)
}

pub fn gradcheck(spec: &SimSpec) -> Result<Outcome> {
    ensure_out_dir(spec)?;
    let entries = gradcheck_entries(spec)?;
    let summary = json!({
        "experiment": "gradcheck",
        "m": spec.m,
        "seed": spec.seed,
        "gradients": entries,
    });
    write_summary(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(Outcome::Clean)
}

pub fn dno_test(spec: &SimSpec) -> Result<Outcome> {
    ensure_out_dir(spec)?;
    let (eta, _) = build_graph_data(spec)?;
    let m = spec.m;
    let sp = Spectral::new(m)?;
    let alpha = sp.nodes();
    let xi: Vec<f64> = alpha.iter().map(|&t| t.sin() + 0.4 * (3.0 * t).cos()).collect();
    let graph_settings = DnoGraphSettings {
        expansion_order: spec.expansion_order,
    };
    let g_graph = dno_graph(&eta, &xi, &spec.fluid, &graph_settings)?;
    let curve = graph_to_curve(&eta, spec.fluid.period_x)?;
    let g_curve = dno_curve(&curve, &xi, &spec.fluid, &DnoBieSettings::default())?;

    let mut csv = fs::File::create(spec.out_dir.join("dno_errors.csv"))?;
    writeln!(csv, "x,g_graph,g_curve,abs_diff")?;
    let scale_x = spec.fluid.period_x / (2.0 * PI);
    for j in 0..m {
        writeln!(
            csv,
            "{},{},{},{}",
            alpha[j] * scale_x,
            g_graph[j],
            g_curve[j],
            (g_graph[j] - g_curve[j]).abs()
        )?;
    }
    let norm: f64 = g_curve.iter().map(|v| v * v).sum::<f64>().sqrt();
    let l2 = g_graph
        .iter()
        .zip(&g_curve)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / norm.max(f64::MIN_POSITIVE);
    let linf_abs = g_graph
        .iter()
        .zip(&g_curve)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let linf_scale = g_curve.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let summary = json!({
        "experiment": "dno-test",
        "m": m,
        "solver": "graph-vs-curve",
        "expansion_order": spec.expansion_order,
        "l2_error": l2,
        "linf_error": linf_abs / linf_scale.max(f64::MIN_POSITIVE),
    });
    write_summary(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(Outcome::Clean)
}

/// Evolve the same initial data in both charts and compare geometry and
/// energy at matched snapshot times.
pub fn equivalence_series(spec: &SimSpec) -> Result<(Vec<(f64, f64, f64)>, Option<String>)> {
    let (eta, xi) = build_graph_data(spec)?;
    let graph_state = PhaseState::from_graph(&eta, &xi, spec.fluid.period_x)?;
    let (curve, mut fields) = reparametrize_uniform_with(&graph_state.curve, &[&graph_state.xi])?;
    let arc_state = PhaseState::new(curve, fields.remove(0))?;

    let dt = match spec.dt {
        Some(v) => v,
        None => {
            let omega = linear_frequency(1.0, &spec.fluid).max(1e-8);
            ((2.0 * PI / omega) / 300.0).min(suggest_dt(&graph_state, &spec.fluid)?)
        }
    };
    let stepper = spec.stepper(dt);
    let traj_g = run(&graph_state, Chart::Graph, &spec.fluid, &stepper)?;
    let traj_a = run(&arc_state, Chart::ArcLength, &spec.fluid, &stepper)?;

    let halt = traj_g
        .halt_reason
        .as_ref()
        .or(traj_a.halt_reason.as_ref())
        .map(|r| r.to_string());

    let sp = Spectral::new(spec.m)?;
    let count = traj_g.snapshots.len().min(traj_a.snapshots.len());
    let mut series = Vec::with_capacity(count);
    for i in 0..count {
        let sg = &traj_g.snapshots[i];
        let sa = &traj_a.snapshots[i];
        let eta_g = sg
            .state
            .graph_eta()
            .ok_or_else(|| anyhow::anyhow!("graph run left the graph chart"))?;
        // Vertical distance from each arc node to the interpolated graph
        // curve bounds the true curve distance from above.
        let c = 2.0 * PI / spec.fluid.period_x;
        let targets: Vec<f64> = sa.state.curve.gamma1().iter().map(|&x| c * x).collect();
        let eta_at: Vec<f64> = sp.interp(&eta_g, &targets);
        let dist = sa
            .state
            .curve
            .gamma2()
            .iter()
            .zip(&eta_at)
            .map(|(y, e)| (y - e).abs())
            .fold(0.0f64, f64::max);
        let hg = traj_g.energy_series[i].1.total;
        let ha = traj_a.energy_series[i].1.total;
        let gap = (hg - ha).abs() / hg.abs().max(f64::MIN_POSITIVE);
        series.push((sg.t, dist, gap));
    }
    Ok((series, halt))
}

pub fn equivalence(spec: &SimSpec) -> Result<Outcome> {
    ensure_out_dir(spec)?;
    let (series, halt) = equivalence_series(spec)?;
    let max_distance = series.iter().map(|v| v.1).fold(0.0f64, f64::max);
    let max_gap = series.iter().map(|v| v.2).fold(0.0f64, f64::max);
    let rows: Vec<serde_json::Value> = series
        .iter()
        .map(|(t, d, g)| json!({"t": t, "distance": d, "energy_gap_rel": g}))
        .collect();
    let summary = json!({
        "experiment": "equivalence",
        "m": spec.m,
        "max_distance": max_distance,
        "max_energy_gap_rel": max_gap,
        "halt_reason": halt,
        "series": rows,
    });
    write_summary(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(if halt.is_some() {
        Outcome::Halted
    } else {
        Outcome::Clean
    })
}

pub fn run_experiment(spec: &SimSpec) -> Result<Outcome> {
    match spec.experiment {
        crate::spec::Experiment::Simulate => simulate(spec),
        crate::spec::Experiment::Dispersion => dispersion(spec),
        crate::spec::Experiment::Gradcheck => gradcheck(spec),
        crate::spec::Experiment::DnoTest => dno_test(spec),
        crate::spec::Experiment::Equivalence => equivalence(spec),
    }
}
