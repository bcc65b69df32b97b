use criterion::{criterion_group, criterion_main, Criterion};
use freewave_core::curve::{graph_to_curve, reparametrize_uniform_with};
use freewave_core::dynamics::{rhs_arclength, rhs_graph};
use freewave_core::hamiltonian::PhaseState;
use freewave_core::spectral::Spectral;
use freewave_core::{dno_curve, dno_graph, DnoBieSettings, DnoGraphSettings, FluidConfig};

fn dno_benches(c: &mut Criterion) {
    let m = 128;
    let nodes = Spectral::new(m).unwrap().nodes();
    let eta: Vec<f64> = nodes.iter().map(|&v| 0.05 * v.cos()).collect();
    let xi: Vec<f64> = nodes.iter().map(|&v| v.sin() + 0.3 * (3.0 * v).cos()).collect();
    let cfg = FluidConfig::deep_unit();

    c.bench_function("dno_graph order 6 m=128", |b| {
        let settings = DnoGraphSettings::default();
        b.iter(|| dno_graph(&eta, &xi, &cfg, &settings).unwrap())
    });

    c.bench_function("dno_curve m=128", |b| {
        let curve = graph_to_curve(&eta, cfg.period_x).unwrap();
        let settings = DnoBieSettings::default();
        b.iter(|| dno_curve(&curve, &xi, &cfg, &settings).unwrap())
    });
}

fn rhs_benches(c: &mut Criterion) {
    let m = 128;
    let nodes = Spectral::new(m).unwrap().nodes();
    let eta: Vec<f64> = nodes.iter().map(|&v| 0.05 * v.cos()).collect();
    let xi: Vec<f64> = nodes.iter().map(|&v| 0.1 * v.sin()).collect();
    let cfg = FluidConfig::deep_unit();

    c.bench_function("rhs_graph m=128", |b| {
        let settings = DnoGraphSettings::default();
        b.iter(|| rhs_graph(&eta, &xi, &cfg, &settings).unwrap())
    });

    c.bench_function("rhs_arclength m=128", |b| {
        let rough = graph_to_curve(&eta, cfg.period_x).unwrap();
        let (curve, mut fields) = reparametrize_uniform_with(&rough, &[&xi]).unwrap();
        let state = PhaseState::new(curve, fields.remove(0)).unwrap();
        let settings = DnoBieSettings::default();
        b.iter(|| rhs_arclength(&state, &cfg, &settings).unwrap())
    });
}

fn geometry_benches(c: &mut Criterion) {
    let m = 256;
    let nodes = Spectral::new(m).unwrap().nodes();
    let eta: Vec<f64> = nodes.iter().map(|&v| 0.2 * v.cos() + 0.05 * (3.0 * v).sin()).collect();
    let curve = graph_to_curve(&eta, 2.0 * std::f64::consts::PI).unwrap();

    c.bench_function("frame m=256", |b| b.iter(|| curve.frame().unwrap()));

    c.bench_function("reparametrize_uniform m=256", |b| {
        b.iter(|| reparametrize_uniform_with(&curve, &[]).unwrap())
    });
}

criterion_group!(benches, dno_benches, rhs_benches, geometry_benches);
criterion_main!(benches);
