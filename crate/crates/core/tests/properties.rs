use budyko::bifurcation::InterceptBranch;
use budyko::dynamics::{self, SystemState};
use budyko::forcing::albedo;
use budyko::reduced::{self, bisect};
use budyko::spectral::{basis_lipschitz, q_basis};
use budyko::{ForcingTable, ModelParams};
use proptest::prelude::*;
use std::sync::OnceLock;

fn table() -> &'static ForcingTable {
    static T: OnceLock<ForcingTable> = OnceLock::new();
    T.get_or_init(|| ForcingTable::new(ModelParams::default()).unwrap())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn h0_lipschitz(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let t = table();
        let diff: Vec<f64> = t.h0(a).iter().zip(t.h0(b)).map(|(u, v)| u - v).collect();
        prop_assert!(norm(&diff) <= t.lipschitz_l0() * (a - b).abs() + 1e-9);
    }

    #[test]
    fn basis_lipschitz_bounds(i in 0usize..8, a in -0.5f64..1.5, b in -0.5f64..1.5) {
        prop_assert!((q_basis(i, a) - q_basis(i, b)).abs() <= basis_lipschitz(i) * (a - b).abs() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn albedo_takes_listed_levels(y in 0.0f64..1.0, eta in 0.0f64..1.0) {
        let p = ModelParams::default();
        let a = albedo(&p, y, eta);
        let levels = [p.albedo_open, p.albedo_bare_ice, p.albedo_snow];
        prop_assert!(levels.contains(&a));
        // more ice never darkens a latitude band
        prop_assert!(albedo(&p, y, (eta - 0.05).max(0.0)) >= a);
    }

    #[test]
    fn energy_residual_is_scaled_increment(
        x in proptest::collection::vec(-50.0f64..50.0, 6),
        eta in -0.2f64..1.2,
    ) {
        let t = table();
        let next = dynamics::step(t, &SystemState::new(x.clone(), eta));
        let res = dynamics::energy_residual(t, &x, eta);
        let r = t.params().heat_capacity;
        for i in 0..6 {
            let expected = r * (next.x[i] - x[i]);
            prop_assert!((res[i] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn step_keeps_h0_fixed_at_zero_eps(eta in -0.2f64..1.2) {
        let t = table().with_params(ModelParams { epsilon: 0.0, ..Default::default() });
        let s = SystemState::on_h0(&t, eta);
        prop_assert_eq!(dynamics::step(&t, &s), s);
    }

    #[test]
    fn intercept_branch_inverts(eta in 0.0f64..1.0) {
        let t = table();
        let branch = InterceptBranch::new(t);
        let a = branch.intercept(eta);
        let mut p = *t.params();
        p.olr_intercept = a;
        let shifted = t.with_params(p);
        prop_assert!(reduced::z(&shifted, eta).abs() < 1e-9);
    }

    #[test]
    fn bisect_brackets(c in -0.9f64..0.9) {
        let root = bisect(|x| x * x * x - c, -1.0, 1.0);
        prop_assert!((root - c.cbrt()).abs() < 1e-14);
    }
}
