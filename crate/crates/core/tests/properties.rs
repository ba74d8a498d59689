use std::sync::Arc;

use fredholm::bvp::{boundary_symmetrize, heat_reduce, ode_bvp_reduce, poisson2d_reduce, OdeBvp};
use fredholm::firstkind::{inject_noise, symmetrize, NoiseShape};
use fredholm::grid::discretize_kernel;
use fredholm::kernels::{poisson_h, resolvent_identity_residual, PoissonKernelSpec, PeriodicMode, ResolventSpec};
use fredholm::linalg::{max_abs_diff, symmetric_eigen};
use fredholm::secondkind::{norm_m, nystrom_solve, simple_iteration, stack};
use fredholm::transform::{recover_psi, TransformConfig};
use fredholm::{build_grid, FirstKindProblem, Matrix, NoiseSpec, QuadRule, SecondKindProblem};
use proptest::prelude::*;

fn rule() -> impl Strategy<Value = (QuadRule, usize)> {
    prop_oneof![
        (2usize..80).prop_map(|n| (QuadRule::Trapezoid, n)),
        (1usize..40).prop_map(|m| (QuadRule::Simpson, 2 * m + 1)),
        (1usize..8, 1usize..6).prop_map(|(o, p)| (QuadRule::GaussLegendre { order: o }, o * p)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_positive_and_sum_to_length((r, n) in rule(), a in -3.0f64..3.0, len in 0.1f64..5.0) {
        let g = build_grid(a, a + len, r, n).unwrap();
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
        let s: f64 = g.weights().iter().sum();
        prop_assert!((s - len).abs() < 1e-12 * len.max(1.0));
    }

    #[test]
    fn discrete_operator_is_linear(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, seed in 0u64..1000) {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 17).unwrap();
        let op = discretize_kernel(|x: f64, xi: f64| (x * xi).exp(), &g, &g).unwrap();
        let u: Vec<f64> = (0..17).map(|i| ((i as u64 * 31 + seed) % 97) as f64 / 97.0).collect();
        let v: Vec<f64> = (0..17).map(|i| ((i as u64 * 17 + 3 * seed) % 89) as f64 / 89.0).collect();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = op.apply(&mix).unwrap();
        let (ou, ov) = (op.apply(&u).unwrap(), op.apply(&v).unwrap());
        let rhs: Vec<f64> = ou.iter().zip(&ov).map(|(a, b)| alpha * a + beta * b).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn poisson_kernel_symmetric_periodic_positive(r in 0.01f64..0.95, x in -2.0f64..2.0, xi in -2.0f64..2.0) {
        let spec = PoissonKernelSpec::new(r).unwrap();
        let h = poisson_h(x, xi, &spec);
        prop_assert!(h > 0.0);
        prop_assert!((h - poisson_h(xi, x, &spec)).abs() <= 1e-12 * h.max(1.0));
        prop_assert!((h - poisson_h(x + 1.0, xi, &spec)).abs() <= 1e-9 * h.max(1.0));
    }

    #[test]
    fn resolvent_identity_holds(r in 0.05f64..0.6, lambda in -1.0f64..0.45) {
        let spec = ResolventSpec::new(r, lambda, 60).unwrap();
        let g = build_grid(-1.0, 1.0, QuadRule::Simpson, 257).unwrap();
        prop_assert!(resolvent_identity_residual(&spec, &g).unwrap() <= 1e-8);
    }

    #[test]
    fn recovery_scales_each_mode(r in 0.1f64..0.7, mu in -0.8f64..0.45, n in 0usize..8) {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 129).unwrap();
        let c = TransformConfig::new(r, mu, 60, g.clone()).unwrap();
        let mode = if n == 0 { PeriodicMode::Constant } else { PeriodicMode::Sin(n) };
        let chi = g.sample(|x| mode.eval(x));
        let psi = recover_psi(&chi, &c).unwrap();
        let rn = r.powi(n as i32);
        let factor = (1.0 - mu * rn) / (1.0 - 2.0 * mu * rn);
        let expect: Vec<f64> = chi.iter().map(|v| v * factor).collect();
        prop_assert!(max_abs_diff(&psi, &expect) < 1e-8);
    }

    #[test]
    fn symmetrized_kernel_symmetric_and_semidefinite(shift in 0.0f64..1.0) {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 17).unwrap();
        let p = FirstKindProblem::new(move |x: f64, xi: f64| (x - 2.0 * xi + shift).cos(), |x: f64| x, (0.0, 1.0));
        let s = symmetrize(&p, &g);
        let k = Matrix::from_fn(17, 17, |i, j| (s.kernel)(g.nodes()[i], g.nodes()[j]));
        prop_assert!(k.max_abs_diff(&k.transpose()) < 1e-12);
        let sw: Vec<f64> = g.weights().iter().map(|w| w.sqrt()).collect();
        let (eig, _) = symmetric_eigen(&k.scale_rows(&sw).scale_columns(&sw));
        prop_assert!(eig.iter().all(|&e| e >= -1e-10));
    }

    #[test]
    fn noise_has_requested_norm(target in 0.0f64..2.0, seed in any::<u64>(), modes in 1usize..30) {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 65).unwrap();
        let f = g.sample(|x| x * (1.0 - x));
        let spec = NoiseSpec { target_l2_norm: target, seed, shape: NoiseShape::WhiteFourier { n_modes: modes } };
        let a = inject_noise(&f, &spec, &g).unwrap();
        let e: Vec<f64> = a.iter().zip(&f).map(|(x, y)| x - y).collect();
        prop_assert!((g.l2_norm(&e) - target).abs() < 1e-10);
        prop_assert_eq!(a, inject_noise(&f, &spec, &g).unwrap());
    }

    #[test]
    fn direct_and_iterated_second_kind_agree(scale in -1.0f64..1.0, mu in -1.0f64..1.0) {
        let g: fredholm::Grid64 = build_grid(0.0, 1.0, QuadRule::Simpson, 17).unwrap();
        let k = Matrix::from_fn(17, 17, |i, j| scale * (g.nodes()[i] + g.nodes()[j]).sin());
        let p = SecondKindProblem::single(g.clone(), k, mu, g.sample(|x| 1.0 + x)).unwrap();
        let report = norm_m(&p);
        prop_assume!(report.mu_times_m < 0.9);
        let d = nystrom_solve(&p).unwrap();
        let it = simple_iteration(&p, &[vec![0.0; 17]], 1e-13, 10_000).unwrap();
        prop_assert!(it.converged);
        prop_assert!(max_abs_diff(&d.blocks[0], &it.blocks[0]) < 1e-11);
        let st = stack(&p).solve().unwrap();
        prop_assert_eq!(&st[..], &d.blocks[0][..]);
    }

    #[test]
    fn ode_reconstruction_meets_conditions(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, a in 0.0f64..4.0) {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 33).unwrap();
        let p = OdeBvp::new(move |_| a, move |x: f64| c0 + c1 * x);
        let red = ode_bvp_reduce(&p, &g, false).unwrap();
        let junk = g.sample(|x| c0 * (7.0 * x).sin() + c1 * x * x);
        let [l, r] = red.boundary_defects(&red.reconstruct(&junk).unwrap());
        prop_assert!(l <= 1e-10 && r <= 1e-10);
        let (s1, s2) = (red.solve().unwrap(), red.solve_constants_first().unwrap());
        prop_assert!(max_abs_diff(&s1.u, &s2.u) <= 1e-8);
    }

    #[test]
    fn plane_reconstructions_meet_conditions(c in -3.0f64..3.0, k in 1.0f64..6.0) {
        let red = poisson2d_reduce::<f64>(None);
        let g = red.equation.grid(QuadRule::Simpson, 9, 9).unwrap();
        let psi = g.sample(|x, y| c * (k * x * y).cos() + x);
        let u1 = red.from_x.reconstruct(&psi, &g).unwrap();
        let u2 = red.from_y.reconstruct(&psi, &g).unwrap();
        for i in 0..9 {
            prop_assert!(u1[g.index(0, i)].abs() <= 1e-10 && u1[g.index(8, i)].abs() <= 1e-10);
            prop_assert!(u2[g.index(i, 0)].abs() <= 1e-10 && u2[g.index(i, 8)].abs() <= 1e-10);
        }
        let closure = boundary_symmetrize(&u1, &u2, &g).unwrap();
        for i in 0..9 {
            for idx in [g.index(0, i), g.index(8, i), g.index(i, 0), g.index(i, 8)] {
                prop_assert_eq!(closure.u1_samples[idx], 0.0);
                prop_assert_eq!(closure.u2_samples[idx], 0.0);
            }
        }
        let heat = heat_reduce::<f64>(Arc::new(move |x| c * (std::f64::consts::PI * x).sin()), 1.0).unwrap();
        let u = heat.from_y.reconstruct(&psi, &g).unwrap();
        for (i, &x) in g.x.nodes().iter().enumerate() {
            prop_assert!((u[g.index(i, 0)] - c * (std::f64::consts::PI * x).sin()).abs() <= 1e-10);
        }
    }
}
