use cbf_core::deterministic::{
    evaluate_condition, simulate, ConditionInputs, EstimateConstants, EtdStepper, PhysicsParams,
    Regime, SolverOptions, StepCoefficients,
};
use cbf_core::experiments::{fit_rate, SweepRecord};
use cbf_core::random_dynamics::{NoiseConfig, NoiseMode, PathwiseSolver};
use cbf_core::spectral::{
    bilinear, damping, h_norm, inner, leray_project, lp_integral, norms, stokes_apply, trilinear,
    SpectralVelocity, TorusGrid,
};
use cbf_core::stochastic::{OuPath, WienerPath};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid2() -> TorusGrid {
    TorusGrid::periodic_2pi(2, 16).unwrap()
}

fn field(grid: TorusGrid, seed: u64, scale: f64) -> SpectralVelocity {
    SpectralVelocity::random_smooth(grid, seed, 1.5, grid.modes() as f64 / 3.0, scale).unwrap()
}

fn raw(grid: TorusGrid, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = grid.lattice_len();
    let mut out = vec![Complex64::default(); grid.coeff_len()];
    for idx in 1..len {
        let neg = grid.negated_index(idx);
        if neg < idx {
            continue;
        }
        for c in 0..grid.dim() {
            let im = if neg == idx {
                0.0
            } else {
                rng.random_range(-1.0..1.0)
            };
            let z = Complex64::new(rng.random_range(-1.0..1.0), im);
            out[c * len + idx] = z;
            out[c * len + neg] = z.conj();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_idempotent_and_solenoidal(seed in any::<u64>(), dim in 2usize..=3) {
        let grid = TorusGrid::periodic_2pi(dim, 8).unwrap();
        let p = leray_project(grid, raw(grid, seed)).unwrap();
        let q = leray_project(grid, p.coeffs().to_vec()).unwrap();
        prop_assert_eq!(p.coeffs(), q.coeffs());
        prop_assert!(p.divergence_defect() <= 1e-12);
        prop_assert!(p.hermitian_defect() == 0.0);
    }

    #[test]
    fn trilinear_is_skew(s in any::<u64>()) {
        let g = grid2();
        let (u, v, w) = (field(g, s, 1.0), field(g, s ^ 1, 1.0), field(g, s ^ 2, 1.0));
        let a = trilinear(&u, &v, &w).unwrap();
        let b = trilinear(&u, &w, &v).unwrap();
        let scale = norms(&u).h_norm * norms(&v).v_norm * norms(&w).v_norm;
        prop_assert!((a + b).abs() <= 1e-10 * scale);
        prop_assert!(trilinear(&u, &v, &v).unwrap().abs() <= 1e-10 * scale);
    }

    #[test]
    fn advection_orthogonal_to_stokes_in_2d(s in any::<u64>(), amp in 0.01f64..10.0) {
        let u = field(grid2(), s, amp);
        let n = norms(&u);
        let x = inner(&bilinear(&u, &u).unwrap(), &stokes_apply(&u)).unwrap();
        prop_assert!(x.abs() <= 1e-8 * n.v_norm * n.v_norm * n.a_norm);
    }

    #[test]
    fn damping_is_monotone(s in any::<u64>(), r in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, 5.0])) {
        let g = grid2();
        let (u, v) = (field(g, s, 2.0), field(g, s ^ 7, 0.5));
        let d = u.sub(&v).unwrap();
        let m = inner(&damping(&u, r).unwrap().sub(&damping(&v, r).unwrap()).unwrap(), &d).unwrap();
        prop_assert!(m >= -1e-12);
    }

    #[test]
    fn damping_pairing_is_lp_power(s in any::<u64>(), r in 1.0f64..5.0) {
        let u = field(grid2(), s, 1.0);
        let lhs = inner(&damping(&u, r).unwrap(), &u).unwrap();
        let rhs = lp_integral(&u, r + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn poincare_and_parseval(s in any::<u64>(), dim in 2usize..=3) {
        let g = TorusGrid::periodic_2pi(dim, 8).unwrap();
        let u = field(g, s, 1.0);
        let n = norms(&u);
        let l1 = g.lambda1();
        prop_assert!(l1 * n.h_norm * n.h_norm <= n.v_norm * n.v_norm * (1.0 + 1e-14));
        prop_assert!(n.a_norm * n.a_norm >= l1 * n.v_norm * n.v_norm * (1.0 - 1e-14));
        let quad = lp_integral(&u, 2.0);
        prop_assert!((quad - n.h_norm * n.h_norm).abs() <= 1e-12 * quad);
    }

    #[test]
    fn condition_flag_matches_grashof(
        mu in 0.1f64..3.0,
        lambda1 in 0.2f64..4.0,
        f in 0.0f64..5.0,
        regime in prop::sample::select(vec![Regime::TwoD, Regime::TwoDRegular, Regime::ThreeDCritical]),
    ) {
        let inputs = ConditionInputs { mu, beta: 1.0, r: 3.0, lambda1, forcing_norm: f };
        let rep = evaluate_condition(inputs, &EstimateConstants::default(), regime);
        if regime == Regime::ThreeDCritical && 2.0 * mu < 1.0 {
            prop_assert!(rep.is_err());
        } else {
            let rep = rep.unwrap();
            let gap = (rep.grashof - rep.threshold).abs() / rep.threshold;
            if gap > 1e-9 {
                prop_assert_eq!(rep.holds, rep.grashof < rep.threshold);
                prop_assert!(rep.consistent);
            }
        }
    }

    #[test]
    fn fit_is_scale_invariant(c in 0.01f64..100.0, slope in 0.3f64..2.0, noise in prop::collection::vec(-0.2f64..0.2, 8)) {
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let mk = |k: f64| {
            let mut v = Vec::new();
            for (i, e) in eps.iter().enumerate() {
                for s in 0..2u64 {
                    v.push(SweepRecord {
                        epsilon: *e, seed: s, mode: NoiseMode::Multiplicative, r: 3.0,
                        dist_h: k * e.powf(slope) * noise[2 * i + s as usize].exp(),
                        t_pull: 1.0, converged: true,
                    });
                }
            }
            v
        };
        let a = fit_rate(&mk(1.0), None).unwrap();
        let b = fit_rate(&mk(c), None).unwrap();
        prop_assert!((a.slope - b.slope).abs() <= 1e-9);
        prop_assert!((b.intercept - a.intercept - c.ln()).abs() <= 1e-9);
    }

    #[test]
    fn wiener_values_survive_horizon_extension(seed in any::<u64>(), back in 1u32..50, fwd in 0u32..50) {
        let h = 0.01;
        let small = WienerPath::sample(seed, -(back as f64) * h, fwd as f64 * h, h).unwrap();
        let big = WienerPath::sample(seed, -3000.0 * h, 3000.0 * h, h).unwrap();
        for tick in small.min_tick()..=small.max_tick() {
            prop_assert_eq!(small.at_tick(tick).unwrap(), big.at_tick(tick).unwrap());
        }
    }

    #[test]
    fn ou_shift_group_law(seed in any::<u64>(), a in -100i64..100, b in -100i64..100, s in -100i64..100) {
        let h = 0.01;
        let ou = OuPath::sample(seed, 1.0, -4.0, 4.0, h).unwrap();
        let (a, b, s) = (a as f64 * h, b as f64 * h, s as f64 * h);
        let first = ou.shifted(a).unwrap();
        let lhs = first.shifted(b).unwrap().eval(s).unwrap();
        let rhs = ou.shifted(a + b).unwrap().eval(s).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn unforced_energy_decays(s in any::<u64>(), amp in 0.1f64..3.0) {
        let g = grid2();
        let p = PhysicsParams::unforced(g, 1.0, 1.0, 3.0).unwrap();
        let traj = simulate(&field(g, s, amp), &p, 0.5, 0.01, 0, SolverOptions::default()).unwrap();
        for w in traj.energy.windows(2) {
            prop_assert!(w[1].h2 <= w[0].h2);
        }
    }

    #[test]
    fn zero_noise_is_bitwise_deterministic(s in any::<u64>(), seed in any::<u64>()) {
        let g = grid2();
        let f = field(g, s ^ 3, 0.5);
        let p = PhysicsParams::new(1.0, 1.0, 3.0, 0.0, f).unwrap();
        let u0 = field(g, s, 1.0);
        let det = EtdStepper::new(p.clone(), 0.01, SolverOptions::default()).unwrap()
            .integrate(&u0, -50, 50, |_| Ok(StepCoefficients::DETERMINISTIC), |_, _| Ok(()))
            .unwrap();
        let ou = OuPath::sample(seed, 1.0, -1.0, 0.0, 0.01).unwrap();
        let phi = SpectralVelocity::random_smooth(g, s ^ 5, 2.0, 4.0, 1.0).unwrap();
        for noise in [NoiseConfig::additive(0.0, phi, 1.0, seed), NoiseConfig::multiplicative(0.0, 1.0, seed)] {
            let solver = PathwiseSolver::new(p.clone(), noise, 0.01, SolverOptions::default()).unwrap();
            let v = solver.advance(&u0, &ou, -50, 0).unwrap();
            prop_assert_eq!(v.coeffs(), det.coeffs());
        }
    }

    #[test]
    fn pathwise_flow_is_a_cocycle(s in any::<u64>(), seed in any::<u64>(), mid in -99i64..0, eps in 0.0f64..1.0) {
        let g = grid2();
        let p = PhysicsParams::new(1.0, 1.0, 3.0, 0.0, field(g, s ^ 3, 0.5)).unwrap();
        let solver = PathwiseSolver::new(p, NoiseConfig::multiplicative(eps, 1.0, seed), 0.01, SolverOptions::default()).unwrap();
        let ou = OuPath::sample(seed, 1.0, -1.0, 0.0, 0.01).unwrap();
        let u0 = field(g, s, 1.0);
        let whole = solver.advance(&u0, &ou, -100, 0).unwrap();
        let half = solver.advance(&u0, &ou, -100, mid).unwrap();
        let composed = solver.advance(&half, &ou, mid, 0).unwrap();
        prop_assert_eq!(whole.coeffs(), composed.coeffs());
    }

    #[test]
    fn reconstruction_inverts_transform(s in any::<u64>(), z in -5.0f64..5.0, eps in 0.0f64..1.0) {
        let g = grid2();
        let p = PhysicsParams::unforced(g, 1.0, 1.0, 2.0).unwrap();
        let v = field(g, s, 1.0);
        let phi = SpectralVelocity::random_smooth(g, s ^ 9, 2.0, 4.0, 1.0).unwrap();
        for noise in [NoiseConfig::additive(eps, phi.clone(), 1.0, 0), NoiseConfig::multiplicative(eps, 1.0, 0)] {
            let solver = PathwiseSolver::new(p.clone(), noise, 0.01, SolverOptions::default()).unwrap();
            let back = solver.transform(&solver.reconstruct(&v, z), z);
            prop_assert!(h_norm(&back.sub(&v).unwrap()) <= 1e-13 * (1.0 + h_norm(&v) * (eps * z).abs().exp()));
        }
    }
}
