//! Equilibrium branches as the radiation intercept `A` and the diffusivity `D` vary.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::max_admissible_n;
use crate::error::{Error, Result};
use crate::forcing::{ForcingTable, Side};
use crate::params::ModelParams;
use crate::reduced::{self, Equilibrium, Location, Stability};

/// Minimum number of grid points per smooth piece for fold detection.
pub const MIN_PIECE_POINTS: usize = 1000;
/// Width in `η` to which golden-section search refines a smooth fold.
pub const FOLD_ETA_TOL: f64 = 1e-8;
/// Largest D-grid spacing accepted by [`jormungand_window`].
pub const MAX_WINDOW_STEP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub parameter_value: f64,
    pub eta_star: f64,
    pub stability: Stability,
    pub branch_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldKind {
    SmoothSaddleNode,
    NonsmoothFold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub parameter_value: f64,
    pub eta_star: f64,
    pub kind: FoldKind,
}

/// Closed-form equilibrium correspondence in `A`.
///
/// `A` enters `z` only through `f_0 = (Q(s_0 − a_0) − A)/B`, so solving
/// `z(η; A) = 0` gives `A(η) = B (Σ f̃_2i(η) q_2i(η) − T_c)` where `f̃`
/// is the forcing evaluated with the intercept removed.
#[derive(Debug, Clone)]
pub struct InterceptBranch {
    intercept_free: ForcingTable,
}

impl InterceptBranch {
    pub fn new(forcing: &ForcingTable) -> Self {
        let params = ModelParams { olr_intercept: 0.0, ..*forcing.params() };
        Self { intercept_free: forcing.with_params(params) }
    }

    /// The value of `A` for which `η` is an equilibrium.
    pub fn intercept(&self, eta: f64) -> f64 {
        self.intercept_free.params().olr_slope * reduced::z(&self.intercept_free, eta)
    }

    /// One-sided `dA/dη`; shares its sign with `∂z/∂η` at fixed `A`.
    pub fn slope(&self, eta: f64, side: Side) -> f64 {
        let which = match side {
            Side::Left => reduced::Derivative::Left,
            Side::Right => reduced::Derivative::Right,
        };
        self.intercept_free.params().olr_slope
            * reduced::z_prime(&self.intercept_free, eta, which).expect("one-sided slopes exist")
    }

    fn stability(&self, eta: f64) -> Stability {
        let rho = self.intercept_free.params().bare_ice_edge;
        if eta == rho || eta == 0.0 || eta == 1.0 {
            let l = Stability::from_slope(self.slope(eta, Side::Left));
            let r = Stability::from_slope(self.slope(eta, Side::Right));
            if l == r {
                l
            } else {
                Stability::FoldDegenerate
            }
        } else {
            Stability::from_slope(self.slope(eta, Side::Right))
        }
    }
}

/// Equilibrium branch `η ↦ A(η)` sampled on `eta_grid`.
///
/// `branch_id` counts stability changes along the grid, so each id is one
/// monotone piece between folds.
pub fn branch_in_a(forcing: &ForcingTable, eta_grid: &[f64]) -> Vec<BranchPoint> {
    let branch = InterceptBranch::new(forcing);
    let raw: Vec<(f64, Stability)> = eta_grid
        .par_iter()
        .map(|&eta| (branch.intercept(eta), branch.stability(eta)))
        .collect();
    let mut id = 0;
    let mut prev: Option<Stability> = None;
    eta_grid
        .iter()
        .zip(raw)
        .map(|(&eta, (a, stability))| {
            if let Some(p) = prev {
                if p != stability && stability != Stability::FoldDegenerate {
                    id += 1;
                }
            }
            if stability != Stability::FoldDegenerate {
                prev = Some(stability);
            }
            BranchPoint {
                parameter_value: a,
                eta_star: eta,
                stability,
                branch_id: id,
            }
        })
        .collect()
}

/// Local extrema of `A(η)` on `(0, 1)`: smooth turning points inside each
/// piece, plus a nonsmooth fold when the one-sided slopes at `ρ` disagree
/// in sign.
pub fn detect_folds_a(forcing: &ForcingTable, points_per_piece: usize) -> Vec<FoldPoint> {
    let points_per_piece = points_per_piece.max(MIN_PIECE_POINTS);
    let branch = InterceptBranch::new(forcing);
    let rho = forcing.params().bare_ice_edge;
    let mut folds = Vec::new();
    for (lo, hi) in [(0.0, rho), (rho, 1.0)] {
        let grid: Vec<f64> = (1..points_per_piece)
            .map(|k| lo + (hi - lo) * k as f64 / points_per_piece as f64)
            .collect();
        let slopes: Vec<f64> = grid.par_iter().map(|&e| branch.slope(e, Side::Right)).collect();
        for k in 0..grid.len().saturating_sub(1) {
            if slopes[k] != 0.0 && slopes[k].signum() != slopes[k + 1].signum() {
                let maximum = slopes[k] > 0.0;
                let (a, b) = (grid[k].max(lo), grid[k + 1].min(hi));
                let eta = golden_section(|e| branch.intercept(e), a, b, maximum);
                folds.push(FoldPoint {
                    parameter_value: branch.intercept(eta),
                    eta_star: eta,
                    kind: FoldKind::SmoothSaddleNode,
                });
            }
        }
    }
    let left = branch.slope(rho, Side::Left);
    let right = branch.slope(rho, Side::Right);
    if left * right < 0.0 {
        folds.push(FoldPoint {
            parameter_value: branch.intercept(rho),
            eta_star: rho,
            kind: FoldKind::NonsmoothFold,
        });
    }
    folds.sort_by(|a, b| a.eta_star.total_cmp(&b.eta_star));
    folds
}

/// Golden-section search for the extremum of a unimodal `f` on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, maximum: bool) -> f64 {
    let sign = if maximum { -1.0 } else { 1.0 };
    let g = |x: f64| sign * f(x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b - a).abs() > FOLD_ETA_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Equilibria of one column of the diffusivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DColumn {
    pub diffusivity: f64,
    /// Whether the model's truncation satisfies the admissibility bound at this `D`.
    pub admissible: bool,
    pub equilibria: Vec<Equilibrium>,
}

impl DColumn {
    pub fn stable(&self) -> impl Iterator<Item = &Equilibrium> {
        self.equilibria.iter().filter(|e| e.stability == Stability::Stable)
    }

    /// Exactly one stable state, with open water around the equator below ρ.
    pub fn is_jormungand_only(&self) -> bool {
        let mut stable = self.stable();
        matches!(
            (stable.next(), stable.next()),
            (Some(e), None) if e.location == Location::BelowRho
        )
    }
}

/// Recomputes `γ_i`, `f_2i` and the equilibria of `z` for each `D`.
///
/// Columns where the truncation violates the admissibility bound are kept
/// and flagged; `z` does not depend on that bound, only the full map's
/// contraction does.
pub fn sweep_d(forcing: &ForcingTable, d_grid: &[f64]) -> Result<Vec<DColumn>> {
    for &d in d_grid {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Domain {
                module: "bifurcation",
                operation: "sweep_d",
                value: d,
                domain: "(0, 1]",
            });
        }
    }
    let columns = d_grid
        .par_iter()
        .map(|&d| {
            let params = ModelParams { diffusivity: d, ..*forcing.params() };
            let column = forcing.with_params(params);
            Ok(DColumn {
                diffusivity: d,
                admissible: max_admissible_n(&params).allows(params.n_modes),
                equilibria: reduced::find_equilibria(&column, 0.0, 1.0)?,
            })
        })
        .collect::<Result<Vec<DColumn>>>()?;
    let flagged: Vec<f64> = columns.iter().filter(|c| !c.admissible).map(|c| c.diffusivity).collect();
    if let (Some(lo), Some(hi)) = (flagged.first(), flagged.last()) {
        log::warn!(
            "truncation N = {} violates the admissibility bound in {} columns, D in [{lo}, {hi}]",
            forcing.params().n_modes,
            flagged.len()
        );
    }
    Ok(columns)
}

/// Closed interval of `D` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
}

/// Longest contiguous run of columns whose only stable state is the
/// Jormungand state below `ρ`.
pub fn window_from_columns(columns: &[DColumn]) -> Option<Window> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (k, col) in columns.iter().enumerate() {
        if col.is_jormungand_only() {
            let s = *start.get_or_insert(k);
            if best.is_none_or(|(bs, be)| k - s > be - bs) {
                best = Some((s, k));
            }
        } else {
            start = None;
        }
    }
    best.map(|(s, e)| Window {
        lower: columns[s].diffusivity,
        upper: columns[e].diffusivity,
    })
}

/// Runs the diffusivity sweep on `d_grid` (spacing at most 0.005) and
/// returns the Jormungand-only window, if any.
pub fn jormungand_window(forcing: &ForcingTable, d_grid: &[f64]) -> Result<Option<Window>> {
    if let Some(w) = d_grid.windows(2).find(|w| w[1] - w[0] > MAX_WINDOW_STEP + 1e-12 || w[1] <= w[0]) {
        return Err(Error::Domain {
            module: "bifurcation",
            operation: "jormungand_window",
            value: w[1] - w[0],
            domain: "increasing grid with spacing <= 0.005",
        });
    }
    Ok(window_from_columns(&sweep_d(forcing, d_grid)?))
}

/// Uniform grid `start, start + step, ..` up to and including `stop`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ForcingTable {
        ForcingTable::new(ModelParams::default()).unwrap()
    }

    #[test]
    fn branch_inverse_of_equilibria() {
        let t = table();
        let branch = InterceptBranch::new(&t);
        for e in reduced::find_equilibria(&t, 0.0, 1.0).unwrap() {
            assert!((branch.intercept(e.eta_star) - 164.0).abs() < 1e-8);
        }
    }

    #[test]
    fn branch_residual_vanishes() {
        let t = table();
        let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        for bp in branch_in_a(&t, &grid) {
            let at = t.with_params(ModelParams { olr_intercept: bp.parameter_value, ..*t.params() });
            assert!(reduced::z(&at, bp.eta_star).abs() < 1e-10);
        }
    }

    #[test]
    fn four_folds() {
        let folds = detect_folds_a(&table(), 1000);
        assert_eq!(folds.len(), 4);
        assert_eq!(folds.iter().filter(|f| f.kind == FoldKind::NonsmoothFold).count(), 1);
    }

    #[test]
    fn stability_flips_only_at_folds() {
        let t = table();
        let grid: Vec<f64> = (1..2000).map(|k| k as f64 / 2000.0).collect();
        let pts = branch_in_a(&t, &grid);
        let folds = detect_folds_a(&t, 1000);
        let flips = pts.windows(2).filter(|w| w[0].stability != w[1].stability).count();
        // the grid contains ρ itself, which is reported as fold-degenerate on both sides
        let at_rho = pts.iter().any(|p| p.stability == Stability::FoldDegenerate);
        assert_eq!(flips, folds.len() + usize::from(at_rho));
        assert_eq!(pts.last().unwrap().branch_id, folds.len());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_section(|x| -(x - 0.3).powi(2), 0.0, 1.0, true);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn window_from_synthetic_columns() {
        let col = |d: f64, stable: &[(f64, Location)]| DColumn {
            diffusivity: d,
            admissible: true,
            equilibria: stable
                .iter()
                .map(|&(e, location)| Equilibrium {
                    eta_star: e,
                    stability: Stability::Stable,
                    location,
                    z_prime: -1.0,
                    z_prime_right: None,
                })
                .collect(),
        };
        let below = [(0.2, Location::BelowRho)];
        let cols = vec![
            col(0.1, &[(0.2, Location::BelowRho), (0.7, Location::AboveRho)]),
            col(0.2, &below),
            col(0.3, &below),
            col(0.4, &[(0.6, Location::AboveRho)]),
            col(0.5, &below),
        ];
        assert_eq!(window_from_columns(&cols), Some(Window { lower: 0.2, upper: 0.3 }));
        assert_eq!(window_from_columns(&cols[..1]), None);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(jormungand_window(&table(), &[0.1, 0.2]).is_err());
        assert!(sweep_d(&table(), &[0.0]).is_err());
    }
}
