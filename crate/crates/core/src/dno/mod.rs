//! Two routes to the Dirichlet-Neumann operator n = G(gamma) xi: a
//! spectral operator expansion for graph surfaces and a boundary-integral
//! solver for general parametrized curves. Both return the normal
//! derivative with respect to the unit normal, the normalization in which
//! G is symmetric under the surface measure dS.

mod bie;
mod graph;

pub use bie::{dno_curve, harmonic_eval, BieOperator, HarmonicEval, MAX_BIE_NODES};
pub use graph::{dno_graph, dno_graph_chart};
