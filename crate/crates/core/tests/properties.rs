use hydrowave::bi::{elliptic_solve_u, embed_x1, BiModel, BiState, BiStepper, BiSystem, EllipticOptions};
use hydrowave::diagnostics::loglog_slope;
use hydrowave::geometry::{elastic_operator, gauss_bonnet_integral, gauss_curvature, laplace_beltrami, mean_curvature, metric_quantities, SurfaceField};
use hydrowave::init::random_field;
use hydrowave::linear::{
    dispersion_roots, linear_propagate_bi, oscillator_matrix, symbol_ab, symbol_alphagamma, uni_linear_symbol, ModelParams, UniModel,
};
use hydrowave::nonlinear::{commutator_lambda, coupling_n, quadratic_q, uni1_nonlinearity, uni2_nonlinearity};
use hydrowave::spectral::{read_snapshot, sobolev_norm, write_snapshot, MultiplierSymbol, Padded, SpectralField, TorusGrid};
use hydrowave::uni::{run, UniConfig, UniStepper};
use proptest::prelude::*;

fn grid(dim: usize, n: usize) -> TorusGrid {
    TorusGrid::new(dim, n).unwrap()
}

fn field(g: &TorusGrid, seed: u64, band: usize) -> SpectralField {
    random_field(g, seed, band, 0.0, 1.0, false).unwrap()
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.01f64..3.0, 0.0f64..2.0, 0.0f64..2.0, 0.0f64..0.5).prop_map(|(u, d, b, e)| ModelParams::new(u, d, b, e).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_roundtrip(dim in 1usize..=2, log_n in 3u32..=6, seed in any::<u64>()) {
        let g = grid(dim, 1 << log_n);
        let f = field(&g, seed, (g.n() / 2 - 1).min(20));
        let back = SpectralField::from_physical(&g, &f.to_physical()).unwrap();
        prop_assert!(back.distance(&f) <= 1e-13 * f.norm_l2());
    }

    #[test]
    fn real_fields_stay_conjugate_symmetric(seed in any::<u64>()) {
        let g = grid(2, 32);
        let f = field(&g, seed, 8);
        prop_assert_eq!(f.conjugate_symmetry_defect(), 0.0);
        prop_assert_eq!(f.coeff([0, 0]).norm(), 0.0);
        let v = field(&g, seed ^ 1, 8);
        let n = coupling_n(&f, &v).unwrap();
        prop_assert!(n.conjugate_symmetry_defect() <= 1e-14 * n.max_coeff().max(1.0));
    }

    #[test]
    fn multiplier_adjoints(seed in any::<u64>(), s in -2.0f64..3.0) {
        let g = grid(1, 64);
        let (f, h) = (field(&g, seed, 20), field(&g, seed.wrapping_add(1), 20));
        let lam = MultiplierSymbol::lambda_pow(&g, s);
        let hil = MultiplierSymbol::hilbert(&g);
        let scale = lam.apply(&f).norm_l2() * h.norm_l2() + f.norm_l2() * lam.apply(&h).norm_l2();
        prop_assert!((lam.apply(&f).inner(&h) - f.inner(&lam.apply(&h))).abs() <= 1e-13 * scale);
        prop_assert!((hil.apply(&f).inner(&h) + f.inner(&hil.apply(&h))).abs() <= 1e-13 * f.norm_l2() * h.norm_l2());
        let dx_inv = MultiplierSymbol::derivative(&g, 0, 1).compose(&MultiplierSymbol::lambda_pow(&g, -1.0));
        prop_assert!(dx_inv.apply(&f).distance(&-hil.apply(&f)) <= 1e-14 * f.norm_l2());
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity(seed in any::<u64>()) {
        let g = grid(2, 32);
        let f = field(&g, seed, 10);
        let r0 = MultiplierSymbol::riesz(&g, 0);
        let r1 = MultiplierSymbol::riesz(&g, 1);
        let sum = &r0.apply(&r0.apply(&f)) + &r1.apply(&r1.apply(&f));
        prop_assert!(sum.distance(&-&f) <= 1e-14 * f.norm_l2());
    }

    #[test]
    fn mollifier_gains_smoothness(seed in any::<u64>(), s in 0.0f64..2.0, m in 0.5f64..3.0, nu in 1e-3f64..1.0) {
        let g = grid(1, 64);
        let f = field(&g, seed, 20);
        let j = MultiplierSymbol::mollifier(&g, nu).apply(&f);
        // sup_y y^{m/2} e^{-ν(y-1)} over y ≥ 1 bounds the symbol ratio
        let c = std::f64::consts::E * (m / (2.0 * std::f64::consts::E)).powf(m / 2.0).max(1.0);
        prop_assert!(sobolev_norm(&j, s + m, false) <= c * nu.powf(-m) * sobolev_norm(&f, s, false));
    }

    #[test]
    fn t_op_is_a_contraction(seed in any::<u64>(), upsilon in 1.0f64..10.0) {
        let g = grid(2, 32);
        let f = field(&g, seed, 10);
        prop_assert!(MultiplierSymbol::t_op(&g, upsilon).apply(&f).norm_l2() <= f.norm_l2() / upsilon * (1.0 + 1e-14));
    }

    #[test]
    fn nonlinearities_preserve_zero_mean(seed in any::<u64>(), p in params()) {
        let g = grid(1, 64);
        let f = field(&g, seed, 10);
        let scale = f.norm_l2().powi(2) * 1e3;
        prop_assert!(uni1_nonlinearity(&f).unwrap().coeff([0, 0]).norm() <= 1e-15 * scale);
        prop_assert!(uni2_nonlinearity(&f, &p).unwrap().coeff([0, 0]).norm() <= 1e-15 * scale * (1.0 + p.beta + p.delta) * 1e3);
    }

    #[test]
    fn quadratic_operators_are_homogeneous(seed in any::<u64>(), a in -3.0f64..3.0) {
        let g1 = grid(1, 64);
        let f = field(&g1, seed, 10);
        let n = uni1_nonlinearity(&f).unwrap();
        prop_assert!(uni1_nonlinearity(&f.scale(a)).unwrap().distance(&n.scale(a * a)) <= 1e-13 * n.norm_l2() * a * a + 1e-300);

        let g2 = grid(2, 32);
        let (u, w) = (field(&g2, seed, 6), field(&g2, seed ^ 7, 6));
        let q = quadratic_q(&u).unwrap();
        prop_assert!(quadratic_q(&u.scale(a)).unwrap().distance(&q.scale(a * a)) <= 1e-13 * q.norm_l2() * a * a + 1e-300);
        let c = coupling_n(&u, &w).unwrap();
        prop_assert!(coupling_n(&u.scale(a), &w).unwrap().distance(&c.scale(a)) <= 1e-13 * c.norm_l2() * a.abs() + 1e-300);
        prop_assert!(coupling_n(&u, &w.scale(a)).unwrap().distance(&c.scale(a)) <= 1e-13 * c.norm_l2() * a.abs() + 1e-300);
    }

    #[test]
    fn commutator_is_bounded_by_slope(seed in any::<u64>()) {
        let g = grid(1, 128);
        let f = field(&g, seed, 30);
        let h = field(&g, seed ^ 3, 30);
        let slope = MultiplierSymbol::derivative(&g, 0, 1).apply(&f).linf();
        let ratio = commutator_lambda(&f, &h).unwrap().norm_l2() / (slope * h.norm_l2());
        prop_assert!(ratio <= 2.0, "ratio {}", ratio);
    }

    #[test]
    fn roots_reconstruct_coefficients(p in params(), k in 1u32..200) {
        let k = k as f64;
        let r = dispersion_roots(k, &p).unwrap();
        let a = 1.0 + p.upsilon * k;
        let prod = r.r_plus * r.r_minus;
        let sum = r.r_plus + r.r_minus;
        let c = (k + p.beta / 4.0 * k.powi(5)) / a;
        let b = -p.delta * k.powi(3) / a;
        prop_assert!(rel(prod.re, c) <= 1e-12 && prod.im.abs() <= 1e-12 * c);
        prop_assert!((sum.re - b).abs() <= 1e-12 * (b.abs() + c.sqrt()) && sum.im.abs() <= 1e-12 * c.sqrt());
    }

    #[test]
    fn symbols_are_even(p in params(), k in 1i64..100) {
        let kf = k as f64;
        prop_assert_eq!(symbol_ab(kf, &p), symbol_ab(-kf, &p));
        if p.beta > 0.0 || p.delta > 0.0 {
            prop_assert_eq!(symbol_alphagamma(kf, &p).unwrap(), symbol_alphagamma(-kf, &p).unwrap());
        }
    }

    #[test]
    fn unidirectional_linearizations_dissipate(p in params(), k in 1i64..100) {
        prop_assume!(p.delta > 1e-3 && p.beta > 1e-3);
        for model in [UniModel::One, UniModel::Two] {
            prop_assert!(uni_linear_symbol(k, &p, model).unwrap().re < 0.0);
            prop_assert!(uni_linear_symbol(-k, &p, model).unwrap().re < 0.0);
        }
    }

    #[test]
    fn oscillator_matches_fine_rk4(p in params(), k in 1u32..6, y0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
        let kk = k as f64;
        let t = 0.5;
        let m = oscillator_matrix(kk, t, &p);
        let exact = [m[0][0] * y0 + m[0][1] * v0, m[1][0] * y0 + m[1][1] * v0];
        // independent integration of A ÿ + B ẏ + C y = 0
        let (a, b, c) = (p.inertia(kk), p.damping(kk), p.stiffness(kk));
        let rhs = |y: [f64; 2]| [y[1], -(b * y[1] + c * y[0]) / a];
        let steps = 20_000;
        let h = t / steps as f64;
        let mut y = [y0, v0];
        for _ in 0..steps {
            let k1 = rhs(y);
            let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        prop_assert!((y[0] - exact[0]).abs() <= 1e-10 && (y[1] - exact[1]).abs() <= 1e-10, "{:?} vs {:?}", y, exact);
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact(dim in 1usize..=2, seed in any::<u64>()) {
        let g = grid(dim, 16);
        let f = field(&g, seed, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.hws");
        write_snapshot(&f, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert!(back.coeffs().iter().zip(f.coeffs()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn gauss_bonnet_for_random_graphs(seed in any::<u64>(), eps in 0.0f64..1.0, amp in 0.0f64..0.2) {
        let g = grid(2, 64);
        let eta = random_field(&g, seed, 3, 0.0, amp, false).unwrap();
        let s = SurfaceField::new(eta, eps).unwrap();
        prop_assert!(gauss_bonnet_integral(&s).abs() <= 1e-9);
        for out in [mean_curvature(&s), gauss_curvature(&s), elastic_operator(&s)] {
            prop_assert!(out.conjugate_symmetry_defect() <= 1e-14 * out.max_coeff().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flat_limit_of_geometry(seed in any::<u64>()) {
        let g = grid(2, 64);
        let eta = random_field(&g, seed, 6, 0.0, 1.0, false).unwrap();
        let s = SurfaceField::new(eta.clone(), 0.0).unwrap();
        let lap = MultiplierSymbol::laplacian(&g);
        let scale = lap.compose(&lap).apply(&eta).norm_l2();
        prop_assert!(mean_curvature(&s).distance(&lap.scaled(0.5).apply(&eta)) <= 1e-11 * scale);
        let h = MultiplierSymbol::derivative(&g, 0, 2).apply(&eta);
        let h2 = MultiplierSymbol::derivative(&g, 1, 2).apply(&eta);
        let h12 = MultiplierSymbol::derivative(&g, 0, 1).compose(&MultiplierSymbol::derivative(&g, 1, 1)).apply(&eta);
        let det = SpectralField::from_physical(
            &g,
            &h.to_physical().iter().zip(h2.to_physical()).zip(h12.to_physical()).map(|((a, b), c)| a * b - c * c).collect::<Vec<_>>(),
        )
        .unwrap();
        prop_assert!(gauss_curvature(&s).distance(&det) <= 1e-11 * det.norm_l2().max(1.0));
        let f = random_field(&g, seed ^ 5, 6, 0.0, 1.0, false).unwrap();
        prop_assert!(laplace_beltrami(&s, &f).unwrap().distance(&lap.apply(&f)) <= 1e-11 * lap.apply(&f).norm_l2());
        prop_assert!(elastic_operator(&s).distance(&lap.compose(&lap).scaled(0.25).apply(&eta)) <= 1e-11 * scale);
    }

    #[test]
    fn laplace_beltrami_is_self_adjoint_on_the_surface(seed in any::<u64>(), eps in 0.05f64..0.5) {
        let g = grid(2, 64);
        let s = SurfaceField::new(random_field(&g, seed, 2, 0.0, 1.0, false).unwrap(), eps).unwrap();
        let (f, h) = (random_field(&g, seed ^ 1, 4, 0.0, 1.0, false).unwrap(), random_field(&g, seed ^ 2, 4, 0.0, 1.0, false).unwrap());
        let w = metric_quantities(&s).sqrt_alpha();
        let weighted = |a: &SpectralField, b: &SpectralField| {
            let (a, b) = (Padded::of(a), Padded::of(b));
            a.values().iter().zip(b.values()).zip(w.values()).map(|((x, y), z)| x * y * z).sum::<f64>() / w.values().len() as f64
        };
        let lf = laplace_beltrami(&s, &f).unwrap();
        let lh = laplace_beltrami(&s, &h).unwrap();
        let scale = lf.norm_l2() * h.norm_l2() + f.norm_l2() * lh.norm_l2();
        prop_assert!((weighted(&lf, &h) - weighted(&f, &lh)).abs() <= 1e-6 * scale);
    }

    #[test]
    fn uncoupled_bi_dynamics_are_exact_per_mode(seed in any::<u64>(), p in params()) {
        let p = p.with_eps(0.0);
        let g = grid(2, 16);
        let s0 = BiState::new(field(&g, seed, 4), field(&g, seed ^ 9, 4)).unwrap();
        let dt = 2e-3;
        for model in [BiModel::One, BiModel::Two] {
            let stepper = BiStepper::new(BiSystem::new(&g, &p, model).unwrap(), dt, true).unwrap();
            let mut s = s0.clone();
            for _ in 0..1000 {
                s = stepper.step(&s).unwrap().0;
                prop_assert!(s.f.coeff([0, 0]).norm() <= 1e-12 && s.v.coeff([0, 0]).norm() <= 1e-12);
            }
            let (f, v) = linear_propagate_bi(&s0.f, &s0.v, 1000.0 * dt, &p).unwrap();
            let exact = BiState { f, v };
            prop_assert!(s.distance(&exact) <= 1e-10);
        }
    }

    #[test]
    fn bi_means_stay_zero(seed in any::<u64>()) {
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.5).unwrap();
        let g = grid(2, 16);
        let s0 = BiState::new(random_field(&g, seed, 3, 0.0, 0.1, false).unwrap(), random_field(&g, seed ^ 4, 3, 0.0, 0.1, false).unwrap()).unwrap();
        for model in [BiModel::One, BiModel::Two] {
            let stepper = BiStepper::new(BiSystem::new(&g, &p, model).unwrap(), 0.01, true).unwrap();
            let mut s = s0.clone();
            for _ in 0..100 {
                s = stepper.step(&s).unwrap().0;
                prop_assert!(s.f.coeff([0, 0]).norm() <= 1e-12 && s.v.coeff([0, 0]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn model_two_matches_model_one_to_second_order(seed in any::<u64>(), upsilon in 0.01f64..0.5) {
        let g1 = grid(1, 32);
        let g2 = grid(2, 32);
        let f = embed_x1(&random_field(&g1, seed, 4, 0.0, 0.5, false).unwrap(), &g2).unwrap();
        let v = embed_x1(&random_field(&g1, seed ^ 6, 4, 0.0, 0.5, false).unwrap(), &g2).unwrap();
        let s = BiState::new(f, v).unwrap();
        let eps = [0.02, 0.01, 0.005];
        let gaps: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = ModelParams::new(upsilon, 0.0, 0.0, e).unwrap();
                let one = BiSystem::new(&g2, &p, BiModel::One).unwrap().rhs(&s).unwrap();
                let two = BiSystem::new(&g2, &p, BiModel::Two).unwrap().rhs(&s).unwrap();
                prop_assert!(one.f_dot.distance(&two.f_dot) == 0.0);
                Ok(one.v_dot.distance(&two.v_dot))
            })
            .collect::<Result<_, TestCaseError>>()?;
        let slope = loglog_slope(&eps, &gaps).unwrap();
        prop_assert!((slope - 2.0).abs() <= 0.1, "slope {} gaps {:?}", slope, gaps);
    }

    #[test]
    fn elliptic_factor_scales_with_amplitude(seed in any::<u64>()) {
        let g = grid(2, 32);
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let f = random_field(&g, seed, 4, 3.0, 0.01, false).unwrap();
        let rhs = random_field(&g, seed ^ 2, 4, 0.0, 1.0, false).unwrap();
        let o = EllipticOptions::default();
        let (_, full) = elliptic_solve_u(&f, &rhs, &p, o.tol, o.max_iter).unwrap();
        let (_, half) = elliptic_solve_u(&f.scale(0.5), &rhs, &p, o.tol, o.max_iter).unwrap();
        let ratio = half.contraction_estimate / full.contraction_estimate;
        prop_assert!((ratio - 0.5).abs() <= 0.1, "ratio {}", ratio);
    }

    #[test]
    fn uni_mean_is_conserved(seed in any::<u64>(), norm in 0.0f64..0.1) {
        let g = grid(1, 64);
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let f0 = random_field(&g, seed, 8, 2.0, norm, false).unwrap();
        for model in [UniModel::One, UniModel::Two] {
            let cfg = UniConfig { model, params: p, grid: g.clone(), dt: 5e-3, t_end: 5.0, output_every: 10, nonlinear: true };
            let traj = run(&cfg, &f0).unwrap();
            prop_assert!(traj.series.mean_drift() <= 1e-12 + 1e-15 * 1000.0);
        }
    }

    #[test]
    fn uni_linear_regime_error_is_quadratic(seed in any::<u64>()) {
        let g = grid(1, 64);
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let shape = random_field(&g, seed, 4, 0.0, 1.0, false).unwrap();
        let amps = [0.04, 0.02, 0.01];
        for model in [UniModel::One, UniModel::Two] {
            let errs: Vec<f64> = amps
                .iter()
                .map(|&a| {
                    let f0 = shape.scale(a);
                    let cfg = UniConfig { model, params: p, grid: g.clone(), dt: 0.01, t_end: 1.0, output_every: 100, nonlinear: true };
                    let stepper = UniStepper::new(&cfg).unwrap();
                    let mut f = f0.clone();
                    for _ in 0..100 {
                        f = stepper.step(&f).unwrap();
                    }
                    let exact = f0.map_modes(|[k, _], _, c| if k == 0 { c } else { c * uni_linear_symbol(k, &p, model).unwrap().exp() });
                    f.distance(&exact)
                })
                .collect();
            let slope = loglog_slope(&amps, &errs).unwrap();
            prop_assert!(slope >= 1.8, "slope {} errs {:?}", slope, errs);
        }
    }
}
