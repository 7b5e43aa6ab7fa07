use budyko::bifurcation::{self, FoldKind, MAX_WINDOW_STEP};
use budyko::dynamics::{self, SystemState};
use budyko::manifold;
use budyko::reduced::{self, Equilibrium};
use budyko::spectral::insolation_coeffs;
use budyko::ForcingTable;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Output};
use crate::Command;

pub fn dispatch(command: &Command, cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let forcing = ForcingTable::new(cfg.params)?;
    let o = &cfg.options;
    match command {
        Command::Coeffs => coeffs(&forcing, out),
        Command::Profile(a) => {
            let etas = if a.eta.is_empty() { vec![o.eta.unwrap_or(0.3)] } else { a.eta.clone() };
            profile(&forcing, &etas, a.points.or(o.points).unwrap_or(101), out)
        }
        Command::ZCurve(a) => z_curve(
            &forcing,
            a.eta_min.or(o.eta_min).unwrap_or(0.0),
            a.eta_max.or(o.eta_max).unwrap_or(1.0),
            a.points.or(o.points).unwrap_or(1001),
            out,
        ),
        Command::Equilibria(a) => equilibria(
            &forcing,
            a.eta_min.or(o.eta_min).unwrap_or(0.0),
            a.eta_max.or(o.eta_max).unwrap_or(1.0),
            out,
        ),
        Command::Simulate(a) => simulate(
            &forcing,
            a.eta0.or(o.eta0).unwrap_or(0.5),
            a.steps.or(o.steps).unwrap_or(1000),
            out,
        ),
        Command::BifurcateA(a) => bifurcate_a(
            &forcing,
            a.a_min.or(o.a_min).unwrap_or(f64::NEG_INFINITY),
            a.a_max.or(o.a_max).unwrap_or(f64::INFINITY),
            a.points_per_piece.or(o.points_per_piece).unwrap_or(2000),
            out,
        ),
        Command::BifurcateD(a) => bifurcate_d(
            &forcing,
            a.d_min.or(o.d_min).unwrap_or(0.005),
            a.d_max.or(o.d_max).unwrap_or(1.0),
            a.d_grid_step.or(o.d_grid_step).unwrap_or(0.005),
            out,
        ),
        Command::ManifoldVerify(a) => manifold_verify(
            &forcing,
            a.states.or(o.states).unwrap_or(50),
            a.seed.or(o.seed).unwrap_or(0),
            a.tol.or(o.tol).unwrap_or(manifold::FIXED_GRAPH_TOL),
            a.attraction_steps.or(o.attraction_steps).unwrap_or(1000),
            out,
        ),
    }
}

fn require(ok: bool, field: &str, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(Some(field), message))
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + (hi - lo) * k as f64 / (points - 1) as f64 })
        .collect()
}

fn coeffs(forcing: &ForcingTable, out: &Output) -> Result<(), CliError> {
    let table = forcing.spectral();
    let n = table.n_modes();
    let computed = insolation_coeffs(n, table.obliquity())?;
    let p = forcing.params();
    let rows = (0..=n).map(|i| {
        vec![
            i.to_string(),
            num(table.s_coeffs()[i]),
            num(computed[i]),
            num(table.basis_lipschitz()[i]),
            num(p.gamma(i)),
        ]
    });
    out.csv("coeffs.csv", &["i", "s", "s_quadrature", "lipschitz", "gamma"], rows)?;
    Ok(())
}

fn profile(forcing: &ForcingTable, etas: &[f64], points: usize, out: &Output) -> Result<(), CliError> {
    require(points >= 2, "points", "need at least 2 samples")?;
    require(etas.iter().all(|e| (0.0..=1.0).contains(e)), "eta", "ice line must lie in [0, 1]")?;
    let y = linspace(0.0, 1.0, points);
    let mut rows = Vec::with_capacity(etas.len() * points);
    for &eta in etas {
        let temps = dynamics::equilibrium_profile(forcing, eta, &y);
        rows.extend(y.iter().zip(&temps).map(|(&yy, &t)| vec![num(eta), num(yy), num(t)]));
    }
    out.csv("profile.csv", &["eta", "y", "temperature"], rows)?;
    Ok(())
}

fn z_curve(forcing: &ForcingTable, lo: f64, hi: f64, points: usize, out: &Output) -> Result<(), CliError> {
    require(points >= 2, "points", "need at least 2 samples")?;
    require(lo < hi, "eta_min", "eta_min must be below eta_max")?;
    let rows = linspace(lo, hi, points)
        .into_iter()
        .map(|eta| vec![num(eta), num(reduced::z(forcing, eta))]);
    out.csv("z_curve.csv", &["eta", "z"], rows)?;
    Ok(())
}

fn equilibrium_row(e: &Equilibrium) -> Vec<String> {
    vec![
        num(e.eta_star),
        e.stability.as_str().to_owned(),
        e.location.as_str().to_owned(),
        num(e.z_prime),
        e.z_prime_right.map(num).unwrap_or_default(),
    ]
}

fn equilibria(forcing: &ForcingTable, lo: f64, hi: f64, out: &Output) -> Result<(), CliError> {
    require(lo < hi, "eta_min", "eta_min must be below eta_max")?;
    let eqs = reduced::find_equilibria(forcing, lo, hi)?;
    out.csv(
        "equilibria.csv",
        &["eta_star", "stability", "location", "z_prime", "z_prime_right"],
        eqs.iter().map(equilibrium_row),
    )?;
    out.json("equilibria.json", &eqs)?;
    Ok(())
}

fn simulate(forcing: &ForcingTable, eta0: f64, steps: usize, out: &Output) -> Result<(), CliError> {
    require(eta0.is_finite(), "eta0", "initial ice line must be finite")?;
    let traj = dynamics::iterate(forcing, &SystemState::on_h0(forcing, eta0), steps);
    let n = forcing.n_modes();
    let mut header = vec!["step".to_owned(), "eta".to_owned()];
    header.extend((0..=n).map(|i| format!("x{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = traj.states.iter().enumerate().map(|(k, s)| {
        let mut row = vec![k.to_string(), num(s.eta)];
        row.extend(s.x.iter().map(|&v| num(v)));
        row
    });
    out.csv("trajectory.csv", &header, rows)?;
    if traj.overflowed {
        return Err(CliError::Numerical {
            operation: "simulate",
            message: format!("state left the finite range after {} steps", traj.states.len() - 1),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct FoldRecord {
    #[serde(rename = "A")]
    a: f64,
    eta: f64,
    kind: FoldKind,
}

fn bifurcate_a(forcing: &ForcingTable, a_min: f64, a_max: f64, per_piece: usize, out: &Output) -> Result<(), CliError> {
    require(a_min < a_max, "a_min", "a_min must be below a_max")?;
    require(per_piece >= 10, "points_per_piece", "need at least 10 samples per piece")?;
    let rho = forcing.params().bare_ice_edge;
    let mut grid = linspace(0.0, rho, per_piece);
    grid.extend(linspace(rho, 1.0, per_piece).into_iter().skip(1));
    let branch = bifurcation::branch_in_a(forcing, &grid);
    let rows = branch
        .iter()
        .filter(|b| (a_min..=a_max).contains(&b.parameter_value))
        .map(|b| {
            vec![
                num(b.eta_star),
                num(b.parameter_value),
                b.stability.as_str().to_owned(),
                b.branch_id.to_string(),
            ]
        });
    out.csv("branch_a.csv", &["eta", "A", "stability", "branch_id"], rows)?;
    let folds: Vec<FoldRecord> = bifurcation::detect_folds_a(forcing, per_piece)
        .into_iter()
        .map(|f| FoldRecord { a: f.parameter_value, eta: f.eta_star, kind: f.kind })
        .collect();
    out.json("folds_a.json", &folds)?;
    Ok(())
}

#[derive(Serialize)]
struct DReport {
    #[serde(rename = "A")]
    a: f64,
    d_grid_step: f64,
    window: Option<bifurcation::Window>,
    bistable_columns: Vec<f64>,
    inadmissible_columns: usize,
}

fn bifurcate_d(forcing: &ForcingTable, d_min: f64, d_max: f64, step: f64, out: &Output) -> Result<(), CliError> {
    require(step > 0.0 && step <= MAX_WINDOW_STEP, "d_grid_step", "must lie in (0, 0.005]")?;
    require(d_min > 0.0 && d_min < d_max && d_max <= 1.0, "d_min", "need 0 < d_min < d_max <= 1")?;
    let grid = bifurcation::uniform_grid(d_min, d_max, step);
    let columns = bifurcation::sweep_d(forcing, &grid)?;
    let rows = columns.iter().flat_map(|c| {
        c.equilibria.iter().map(move |e| {
            let mut row = vec![num(c.diffusivity)];
            row.extend(equilibrium_row(e).into_iter().take(3));
            row.push(c.admissible.to_string());
            row
        })
    });
    out.csv("branch_d.csv", &["D", "eta", "stability", "location", "admissible"], rows)?;
    let report = DReport {
        a: forcing.params().olr_intercept,
        d_grid_step: step,
        window: bifurcation::window_from_columns(&columns),
        bistable_columns: columns.iter().filter(|c| c.stable().count() >= 2).map(|c| c.diffusivity).collect(),
        inadmissible_columns: columns.iter().filter(|c| !c.admissible).count(),
    };
    out.json("window_d.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct EpsRecord {
    epsilon: f64,
    contraction_bound: f64,
    iterations: usize,
    final_change: f64,
    distance_to_h0: f64,
    distance_bound: f64,
    max_invariance_residual: f64,
    max_invariance_excess: f64,
}

#[derive(Serialize)]
struct AttractionSummary {
    epsilon: f64,
    states: usize,
    seed: u64,
    max_ratio: f64,
    bound: f64,
}

#[derive(Serialize)]
struct ManifoldReport {
    eps_max: f64,
    constants: manifold::ManifoldConstants,
    omega: f64,
    runs: Vec<EpsRecord>,
    slope: f64,
    attraction: AttractionSummary,
}

fn manifold_verify(
    forcing: &ForcingTable,
    states: usize,
    seed: u64,
    tol: f64,
    attraction_steps: usize,
    out: &Output,
) -> Result<(), CliError> {
    require(tol > 0.0, "tol", "must be positive")?;
    let c = manifold::constants(forcing);
    let h0 = manifold::sampled_h0(forcing);
    let mut runs = Vec::new();
    let mut g_first = None;
    for k in [2.0, 4.0, 8.0] {
        let eps = c.eps_max / k;
        let fixed = manifold::fixed_graph(forcing, eps, tol)?;
        let residuals = manifold::invariance_residuals(forcing, &fixed.graph, eps);
        runs.push(EpsRecord {
            epsilon: eps,
            contraction_bound: c.contraction(eps),
            iterations: fixed.iterations,
            final_change: fixed.final_change,
            distance_to_h0: fixed.graph.sup_distance(&h0),
            distance_bound: c.omega() * eps,
            max_invariance_residual: residuals.iter().map(|r| r.residual).fold(0.0, f64::max),
            max_invariance_excess: residuals
                .iter()
                .map(|r| r.residual - r.interpolation_bound)
                .fold(f64::NEG_INFINITY, f64::max),
        });
        g_first.get_or_insert(fixed.graph);
    }
    let eps_list: Vec<f64> = runs.iter().map(|r| r.epsilon).collect();
    let dists: Vec<f64> = runs.iter().map(|r| r.distance_to_h0).collect();
    let slope = manifold::log_log_slope(&eps_list, &dists);
    let eps = eps_list[0];
    let starts = manifold::sample_initial_states(forcing.n_modes() + 1, c.l, states, seed);
    let reports = manifold::verify_attraction(forcing, g_first.as_ref().unwrap(), eps, &starts, attraction_steps);
    let report = ManifoldReport {
        eps_max: c.eps_max,
        constants: c,
        omega: c.omega(),
        runs,
        slope,
        attraction: AttractionSummary {
            epsilon: eps,
            states,
            seed,
            max_ratio: reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
            bound: c.attraction_bound(eps),
        },
    };
    out.json("manifold_verify.json", &report)?;
    Ok(())
}
