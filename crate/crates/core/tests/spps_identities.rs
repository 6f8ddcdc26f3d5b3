mod common;

use proptest::prelude::*;
use sltransmute::spps::{formal_powers, particular_solution, recursive_integrals, spps_nodes, ParticularStrategy};
use sltransmute::{ChebGrid, Interval, C64};

fn zero_table(b: f64, m: usize, order: usize) -> sltransmute::spps::FormalPowerTable {
    let g = ChebGrid::new(m, Interval::new(0.0, b).unwrap()).unwrap();
    let q = vec![C64::new(0.0, 0.0); m + 1];
    let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
    formal_powers(&ps, order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // q ≡ 0: X(n) = X~(n) = x^n, φ_k = ψ_k = x^k, c_m = s_m = 2^(m-1) x^m
    #[test]
    fn zero_potential_identities(b in 0.3f64..2.5, m in 40usize..90) {
        let order = 16;
        let t = zero_table(b, m, order);
        prop_assert!(t.h().norm() < 1e-14);
        let nodes = t.grid().nodes().to_vec();
        for k in 0..=order {
            for (i, &x) in nodes.iter().enumerate() {
                let want = x.powi(k as i32);
                let tol = 1e-12 * (1.0 + b.powi(k as i32)) * (k + 1) as f64;
                prop_assert!((t.x_nodes(k)[i] - want).norm() < tol, "X({k}) at {x}");
                prop_assert!((t.xt_nodes(k)[i] - want).norm() < tol, "X~({k}) at {x}");
                prop_assert!((t.phi_nodes(k)[i] - want).norm() < tol, "phi_{k} at {x}");
                prop_assert!((t.psi_nodes(k)[i] - want).norm() < tol, "psi_{k} at {x}");
                if k >= 1 {
                    let w = 2f64.powi(k as i32 - 1) * want;
                    prop_assert!((t.c_nodes(k)[i] - w).norm() < 2.0 * tol * 2f64.powi(k as i32));
                    prop_assert!((t.s_nodes(k)[i] - w).norm() < 2.0 * tol * 2f64.powi(k as i32));
                }
            }
        }
    }

    // q ≡ 0 series solutions are cos and sin: y1 = cosh(√λ x), y2 = sinh(√λ x)/√λ
    #[test]
    fn zero_potential_series_are_trig(lambda_re in -20.0f64..20.0, lambda_im in -5.0f64..5.0) {
        let t = zero_table(1.0, 64, 61);
        let lam = C64::new(lambda_re, lambda_im);
        let [y1, y2, d1, d2] = spps_nodes(&t, lam, 30).unwrap();
        let r = lam.sqrt();
        for (i, &x) in t.grid().nodes().iter().enumerate() {
            let y2w = if r.norm() > 0.0 { (r * x).sinh() / r } else { C64::new(x, 0.0) };
            prop_assert!((y1[i] - (r * x).cosh()).norm() < 1e-11);
            prop_assert!((y2[i] - y2w).norm() < 1e-11);
            prop_assert!((d1[i] - r * (r * x).sinh()).norm() < 1e-10);
            prop_assert!((d2[i] - (r * x).cosh()).norm() < 1e-10);
        }
    }
}

// against an ODE solver integrating f and the whole recursive chain at once
#[test]
fn recursive_integrals_match_chained_ode() {
    let b = std::f64::consts::PI;
    let m = 128;
    let order = 10;
    let g = ChebGrid::new(m, Interval::new(0.0, b).unwrap()).unwrap();
    let q = g.sample(|x| C64::new(x.exp(), 0.0));
    let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
    let h = ps.h();
    assert!(
        h.im.abs() < 1e-12,
        "real potential should give a real particular solution, h = {h}"
    );
    let (xs, xts) = recursive_integrals(&ps, order).unwrap();
    let pick: Vec<usize> = vec![0, 7, 31, 64, 100, 127];
    let abscissas: Vec<f64> = pick.iter().map(|&i| g.nodes()[i]).collect();
    let oracle = common::recursive_integrals(&|x: f64| x.exp(), h.re, order, &abscissas);
    // errors are relative to the sup norm (node 0 is x = b, where both families
    // peak); the chain amplifies the ~1e-13 relative error of f about 1e3-fold
    let sup = |n: usize| {
        oracle
            .iter()
            .map(|(a, b)| a[n].abs().max(b[n].abs()))
            .fold(1.0, f64::max)
    };
    for (j, &i) in pick.iter().enumerate() {
        let (ox, oxt) = &oracle[j];
        for n in 0..=order {
            let tol = 1e-9 * sup(n);
            assert!(
                (xs[n][i].re - ox[n]).abs() < tol && xs[n][i].im.abs() < tol,
                "X({n}) at {}: {} vs {}",
                abscissas[j],
                xs[n][i],
                ox[n]
            );
            assert!(
                (xts[n][i].re - oxt[n]).abs() < tol && xts[n][i].im.abs() < tol,
                "X~({n}) at {}",
                abscissas[j]
            );
        }
    }
}

// the SPPS pair solves the equation: compare with shooting at a complex λ
#[test]
fn spps_solutions_match_shooting() {
    let b = 1.0;
    let g = ChebGrid::new(96, Interval::new(0.0, b).unwrap()).unwrap();
    let qf = |x: f64| C64::new(x * x, 0.5 * x);
    let q = g.sample(qf);
    let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
    let t = formal_powers(&ps, 81).unwrap();
    // series convention y'' - q y = μ y; the eigen-form λ is -μ
    let mu = C64::new(-30.0, 4.0);
    let [y1, y2, _, _] = spps_nodes(&t, mu, 40).unwrap();
    let h = ps.h();
    let xs: Vec<f64> = g.nodes().to_vec();
    let s1 = common::shoot(&qf, -mu, 0.0, C64::new(1.0, 0.0), h, &xs);
    let s2 = common::shoot(&qf, -mu, 0.0, C64::new(0.0, 0.0), C64::new(1.0, 0.0), &xs);
    for i in 0..xs.len() {
        assert!((y1[i] - s1[i].0).norm() < 1e-9, "y1 at {}", xs[i]);
        assert!((y2[i] - s2[i].0).norm() < 1e-9, "y2 at {}", xs[i]);
    }
}

#[test]
fn particular_solution_is_nonvanishing_and_solves() {
    let g = ChebGrid::new(128, Interval::new(0.0, std::f64::consts::PI).unwrap()).unwrap();
    // oscillating potential: the numerical f must still avoid zeros
    let qf = |x: f64| C64::new(-20.0 + x, 0.0);
    let ps = particular_solution(&g, &g.sample(qf), ParticularStrategy::Auto).unwrap();
    assert!(ps.min_abs() > 0.0);
    assert!(ps.residual() < 1e-8);
    let xs = [0.3, 1.1, 2.9];
    let want = common::shoot(&qf, C64::new(0.0, 0.0), 0.0, C64::new(1.0, 0.0), ps.h(), &xs);
    for (x, (y, _)) in xs.iter().zip(want) {
        let got = ps.f().evaluate(*x).unwrap();
        assert!(
            (got - y).norm() < 1e-8 * (1.0 + y.norm()),
            "f({x}) = {got}, shooting {y}"
        );
    }
}
