//! Graph-transform construction of the invariant manifold `M_ε = graph(g*)`.
//!
//! Graphs are represented by [`GraphFn`] on a fixed grid over
//! `[-0.25, 1.25]`; beyond it the forcing and the clamped basis are
//! constant, so the graph is evaluated by clamping. All norms on
//! `ℝ^{N+1}` are Euclidean.

mod graph;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use graph::{standard_grid, GraphFn, DOMAIN_HI, DOMAIN_LO, GRID_NODES};

use crate::dynamics::{self, SystemState};
use crate::error::{Error, Result};
use crate::forcing::ForcingTable;
use crate::spectral::legendre_even_into;

/// Residual demanded of the preimage solve.
pub const PREIMAGE_TOL: f64 = 1e-12;
pub const PREIMAGE_MAX_ITER: usize = 1000;
/// Default sup-change stopping tolerance for [`fixed_graph`].
pub const FIXED_GRAPH_TOL: f64 = 1e-12;
pub const FIXED_GRAPH_MAX_ITER: usize = 100_000;

/// Constants entering the existence and attraction estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldConstants {
    /// Lipschitz bound of `h⁰`.
    pub l0: f64,
    /// `max ‖h⁰‖` over the grid.
    pub m: f64,
    /// Scale factor, fixed at its smallest admissible value `1 + 2N(2N+1)D/B`.
    pub d: f64,
    /// Radius of the graph ball, `max(d L₀, d M)`.
    pub l: f64,
    /// `Σ Lip(q_2i)`.
    pub k: f64,
    pub gamma0: f64,
    pub gamma_n: f64,
    pub n_modes: usize,
    pub critical_temp: f64,
    /// Upper limit on `ε` for the graph transform to contract.
    pub eps_max: f64,
}

impl ManifoldConstants {
    pub fn new(forcing: &ForcingTable, grid: &[f64]) -> Self {
        let p = forcing.params();
        let n = p.n_modes;
        let nf = n as f64;
        let l0 = forcing.lipschitz_l0();
        let m = grid
            .iter()
            .map(|&e| forcing.h0(e).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let d = 1.0 + crate::params::eigen_weight(n) * p.diffusivity / p.olr_slope;
        let l = (d * l0).max(d * m);
        let k = forcing.spectral().lipschitz_sum();
        let gamma0 = p.gamma(0);
        let gamma_n = p.gamma(n);
        let eps_max = gamma0 / (l * ((1.0 + gamma_n) * (nf + 1.0) + gamma0 * k));
        Self {
            l0,
            m,
            d,
            l,
            k,
            gamma0,
            gamma_n,
            n_modes: n,
            critical_temp: p.critical_temp,
            eps_max,
        }
    }

    fn modes(&self) -> f64 {
        (self.n_modes + 1) as f64
    }

    /// Contraction factor `c(ε)` of the graph transform.
    pub fn contraction(&self, eps: f64) -> f64 {
        let n1 = self.modes();
        1.0 - self.gamma0
            + self.l * (1.0 - self.gamma0 + self.gamma_n) * eps * n1 / (1.0 - eps * self.l * (n1 + self.k))
    }

    /// Contraction factor `ε L (N+1+K)` of the preimage iteration.
    pub fn preimage_factor(&self, eps: f64) -> f64 {
        eps * self.l * (self.modes() + self.k)
    }

    /// Largest `ε` for which the preimage iteration contracts.
    pub fn preimage_eps_limit(&self) -> f64 {
        1.0 / (self.l * (self.modes() + self.k))
    }

    /// `ω = L (|T_c| + (N+1) L) / γ_0`, so that `sup ‖g* − h⁰‖ ≤ ω ε`.
    pub fn omega(&self) -> f64 {
        self.l * (self.critical_temp.abs() + self.modes() * self.l) / self.gamma0
    }

    /// Per-step contraction toward the manifold, `1 − γ_0 + ε (N+1)`.
    pub fn attraction_bound(&self, eps: f64) -> f64 {
        1.0 - self.gamma0 + eps * self.modes()
    }
}

/// Constants on the standard grid.
pub fn constants(forcing: &ForcingTable) -> ManifoldConstants {
    ManifoldConstants::new(forcing, &standard_grid(forcing.params().bare_ice_edge))
}

/// `h⁰` sampled on the standard grid.
pub fn sampled_h0(forcing: &ForcingTable) -> GraphFn {
    GraphFn::from_fn(standard_grid(forcing.params().bare_ice_edge), |e| forcing.h0(e))
}

fn ice_line_temperature(values: &[f64], eta: f64, basis: &mut [f64]) -> f64 {
    legendre_even_into(eta.clamp(0.0, 1.0), basis);
    values.iter().zip(basis.iter()).map(|(a, b)| a * b).sum()
}

/// Solution of the preimage equation together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preimage {
    pub beta: f64,
    pub iterations: usize,
    /// `|β − η + ε(Σ g(β)_i q_2i(β) − T_c)|`.
    pub residual: f64,
    /// Largest observed ratio of successive iterate changes.
    pub observed_factor: f64,
}

/// Finds `β` with `η = β + ε(Σ g(β)_i q_2i(β) − T_c)` by iterating
/// `b ↦ ε(T_c − Σ g(η+b)_i q_2i(η+b))` from `b = 0`.
pub fn preimage(g: &GraphFn, eta: f64, eps: f64, critical_temp: f64) -> Result<Preimage> {
    let dim = g.dim();
    let mut val = vec![0.0; dim];
    let mut basis = vec![0.0; dim];
    let mut map = |b: f64| {
        g.eval_into(eta + b, &mut val);
        eps * (critical_temp - ice_line_temperature(&val, eta + b, &mut basis))
    };
    let mut b = 0.0;
    let mut prev_step: Option<f64> = None;
    let mut observed: f64 = 0.0;
    for it in 1..=PREIMAGE_MAX_ITER {
        let next = map(b);
        let step = (next - b).abs();
        if let Some(ps) = prev_step {
            if ps > 0.0 && step > 0.0 {
                observed = observed.max(step / ps);
            }
        }
        prev_step = Some(step);
        b = next;
        let residual = (map(b) - b).abs();
        if residual < PREIMAGE_TOL {
            return Ok(Preimage {
                beta: eta + b,
                iterations: it,
                residual,
                observed_factor: observed,
            });
        }
    }
    Err(Error::NonConvergence {
        module: "manifold",
        operation: "preimage",
        iterations: PREIMAGE_MAX_ITER,
        residual: (map(b) - b).abs(),
    })
}

/// One application of the graph transform:
/// `(Γg)(η) = g(β) + F(g(β), β)` with `β` the preimage of `η`.
pub fn graph_transform(forcing: &ForcingTable, g: &GraphFn, eps: f64) -> Result<GraphFn> {
    let p = forcing.params();
    let gammas: Vec<f64> = (0..g.dim()).map(|i| p.gamma(i)).collect();
    let values = g
        .grid()
        .par_iter()
        .map(|&eta| {
            let pre = preimage(g, eta, eps, p.critical_temp)?;
            let at = g.eval(pre.beta);
            let f = forcing.f_coeffs(pre.beta);
            Ok(at
                .iter()
                .zip(&f)
                .zip(&gammas)
                .map(|((x, fi), gi)| x - gi * (x - fi))
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(GraphFn::new(g.grid().to_vec(), values))
}

#[derive(Debug, Clone)]
pub struct FixedGraph {
    pub graph: GraphFn,
    pub iterations: usize,
    /// Sup-norm change produced by the last transform.
    pub final_change: f64,
}

/// Iterates the graph transform from `start` until the sup-change falls below `tol`.
pub fn fixed_graph_from(forcing: &ForcingTable, start: GraphFn, eps: f64, tol: f64) -> Result<FixedGraph> {
    let mut g = start;
    let mut change = f64::INFINITY;
    for it in 1..=FIXED_GRAPH_MAX_ITER {
        let next = graph_transform(forcing, &g, eps)?;
        change = next.sup_distance(&g);
        g = next;
        if change < tol {
            return Ok(FixedGraph {
                graph: g,
                iterations: it,
                final_change: change,
            });
        }
    }
    Err(Error::NonConvergence {
        module: "manifold",
        operation: "fixed_graph",
        iterations: FIXED_GRAPH_MAX_ITER,
        residual: change,
    })
}

/// Fixed graph `g*` reached from the sampled `h⁰`.
pub fn fixed_graph(forcing: &ForcingTable, eps: f64, tol: f64) -> Result<FixedGraph> {
    fixed_graph_from(forcing, sampled_h0(forcing), eps, tol)
}

/// Invariance check of one node: its image under `H` against the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceResidual {
    pub beta: f64,
    pub image_eta: f64,
    /// `‖x' − g(η')‖` for the image `(x', η')` of `(g(β), β)`.
    pub residual: f64,
    /// Linear-interpolation error bound of the graph at `η'`.
    pub interpolation_bound: f64,
}

/// Maps every grid point of `graph(g)` through `H` and measures how far the
/// image lies from the graph.
pub fn invariance_residuals(forcing: &ForcingTable, g: &GraphFn, eps: f64) -> Vec<InvarianceResidual> {
    let p = forcing.params();
    let mut params = *p;
    params.epsilon = eps;
    let at_eps = forcing.with_params(params);
    g.grid()
        .par_iter()
        .zip(g.values().par_iter())
        .map(|(&beta, x)| {
            let image = dynamics::step(&at_eps, &SystemState::new(x.clone(), beta));
            let on_graph = g.eval(image.eta);
            let residual = image
                .x
                .iter()
                .zip(&on_graph)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            InvarianceResidual {
                beta,
                image_eta: image.eta,
                residual,
                interpolation_bound: g.interpolation_error_bound(image.eta),
            }
        })
        .collect()
}

/// Per-trajectory summary of the approach to `graph(g*)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionReport {
    /// Largest per-step ratio `‖H(p) − H(q)‖ / ‖p − q‖`, `q = (g*(η), η)`.
    pub max_ratio: f64,
    pub steps: usize,
    /// Vertical distances `‖x_j − g*(η_j)‖` along the orbit.
    pub distances: Vec<f64>,
}

/// Distance below which ratios are no longer recorded (roundoff floor).
pub const ATTRACTION_FLOOR: f64 = 1e-4;

/// Iterates `H` from each state and measures the contraction toward the
/// graph relative to the point of the graph directly below the orbit.
pub fn verify_attraction(
    forcing: &ForcingTable,
    g_star: &GraphFn,
    eps: f64,
    initial_states: &[SystemState],
    max_steps: usize,
) -> Vec<AttractionReport> {
    let mut params = *forcing.params();
    params.epsilon = eps;
    let at_eps = forcing.with_params(params);
    initial_states
        .par_iter()
        .map(|start| {
            let mut p = start.clone();
            let mut max_ratio: f64 = 0.0;
            let mut distances = Vec::new();
            let mut steps = 0;
            while steps < max_steps {
                let q = SystemState::new(g_star.eval(p.eta), p.eta);
                let d = p.distance(&q);
                distances.push(d);
                if d < ATTRACTION_FLOOR {
                    break;
                }
                let hp = dynamics::step(&at_eps, &p);
                let hq = dynamics::step(&at_eps, &q);
                max_ratio = max_ratio.max(hp.distance(&hq) / d);
                p = hp;
                steps += 1;
            }
            AttractionReport { max_ratio, steps, distances }
        })
        .collect()
}

/// Reproducible random states with `‖x‖ ≤ radius` and `η ∈ [-0.25, 1.25]`.
pub fn sample_initial_states(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<SystemState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let r = radius * rng.gen_range(0.0..1.0f64).powf(1.0 / dim as f64);
            let x = dir.iter().map(|v| v / len * r).collect();
            SystemState::new(x, rng.gen_range(DOMAIN_LO..DOMAIN_HI))
        })
        .collect()
}

/// Distances of `g*(ε)` from `h⁰` and their log–log slope in `ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub epsilons: Vec<f64>,
    pub distances: Vec<f64>,
    pub iterations: Vec<usize>,
    pub slope: f64,
}

pub fn o_epsilon_scaling(forcing: &ForcingTable, eps_list: &[f64], tol: f64) -> Result<ScalingReport> {
    let h0 = sampled_h0(forcing);
    let mut distances = Vec::with_capacity(eps_list.len());
    let mut iterations = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let fixed = fixed_graph(forcing, eps, tol)?;
        distances.push(fixed.graph.sup_distance(&h0));
        iterations.push(fixed.iterations);
    }
    let slope = log_log_slope(eps_list, &distances);
    Ok(ScalingReport {
        epsilons: eps_list.to_vec(),
        distances,
        iterations,
        slope,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let xs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    least_squares_slope(&xs, &ys)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
