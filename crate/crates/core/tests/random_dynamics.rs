use cbf_core::deterministic::{
    find_singleton, simulate, PhysicsParams, SingletonOptions, SolverOptions,
};
use cbf_core::random_dynamics::{
    pullback_sample, solve_additive_2d, solve_multiplicative, NoiseConfig, PathwiseSolver,
    PullbackOptions,
};
use cbf_core::spectral::{h_norm, SpectralVelocity, TorusGrid};
use cbf_core::stochastic::OuPath;
use num_complex::Complex64;

const H: f64 = 0.01;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> TorusGrid {
    TorusGrid::periodic_2pi(2, 16).unwrap()
}

fn forced() -> PhysicsParams {
    let f = SpectralVelocity::from_modes(
        grid(),
        &[([0, 1, 0], [c(0.0, -0.05), c(0.0, 0.0), c(0.0, 0.0)])],
    )
    .unwrap();
    PhysicsParams::new(1.0, 1.0, 3.0, 0.0, f).unwrap()
}

fn phi() -> SpectralVelocity {
    SpectralVelocity::from_modes(
        grid(),
        &[([1, 2, 0], [c(0.5, 0.0), c(-0.25, 0.0), c(0.0, 0.0)])],
    )
    .unwrap()
}

fn initial() -> SpectralVelocity {
    SpectralVelocity::random_smooth(grid(), 21, 2.0, 5.0, 1.0).unwrap()
}

#[test]
fn zero_intensity_matches_deterministic_trajectory() {
    let p = forced();
    let u0 = initial();
    let det = simulate(&u0, &p, 1.0, H, 1, SolverOptions::default()).unwrap();
    let ou = OuPath::sample(4, 1.0, 0.0 - H, 1.0, H).unwrap();
    let add = solve_additive_2d(
        &u0,
        &p,
        &NoiseConfig::additive(0.0, phi(), 1.0, 4),
        &ou,
        (0.0, 1.0),
        SolverOptions::default(),
    )
    .unwrap();
    let mul = solve_multiplicative(
        &u0,
        &p,
        &NoiseConfig::multiplicative(0.0, 1.0, 4),
        &ou,
        (0.0, 1.0),
        SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(det.samples.len(), add.len());
    for ((a, m), (t, u)) in add.iter().zip(&mul).zip(&det.samples) {
        assert_eq!(a.t, *t);
        assert_eq!(a.u.coeffs(), u.coeffs());
        assert_eq!(m.u.coeffs(), u.coeffs());
    }
}

#[test]
fn reconstruction_identities_hold_at_output_times() {
    let p = forced();
    let ou = OuPath::sample(8, 1.0, -1.0, 0.0, H).unwrap();
    let eps = 0.3;
    let add = solve_additive_2d(
        &initial(),
        &p,
        &NoiseConfig::additive(eps, phi(), 1.0, 8),
        &ou,
        (-1.0, 0.0),
        SolverOptions::default(),
    )
    .unwrap();
    let phi = phi();
    for s in &add {
        assert_eq!(s.z, ou.z_at(s.t).unwrap());
        for ((u, v), f) in s.u.coeffs().iter().zip(s.v.coeffs()).zip(phi.coeffs()) {
            assert_eq!(*u, *v + f * (eps * s.z));
        }
    }
    let mul = solve_multiplicative(
        &initial(),
        &p,
        &NoiseConfig::multiplicative(eps, 1.0, 8),
        &ou,
        (-1.0, 0.0),
        SolverOptions::default(),
    )
    .unwrap();
    for s in &mul {
        let back = s.u.scaled((-eps * s.z).exp());
        assert!(h_norm(&back.sub(&s.v).unwrap()) <= 1e-15 * h_norm(&s.v));
        assert_eq!(s.u, s.v.scaled((eps * s.z).exp()));
    }
}

#[test]
fn zero_profile_reduces_to_deterministic_decay() {
    let p = PhysicsParams::unforced(grid(), 1.0, 1.0, 3.0).unwrap();
    let u0 = initial();
    let ou = OuPath::sample(2, 1.0, -H, 1.0, H).unwrap();
    let noise = NoiseConfig::additive(0.7, SpectralVelocity::zeros(grid()), 1.0, 2);
    let states =
        solve_additive_2d(&u0, &p, &noise, &ou, (0.0, 1.0), SolverOptions::default()).unwrap();
    let det = simulate(&u0, &p, 1.0, H, 0, SolverOptions::default()).unwrap();
    let last = states.last().unwrap();
    assert_eq!(last.u.coeffs(), det.samples.last().unwrap().1.coeffs());
    assert!(h_norm(&last.u) < h_norm(&u0) * (-1.0f64).exp());
}

#[test]
fn unforced_multiplicative_keeps_zero() {
    let p = PhysicsParams::unforced(grid(), 1.0, 1.0, 3.0).unwrap();
    let ou = OuPath::sample(9, 1.0, -5.0, 0.0, H).unwrap();
    let states = solve_multiplicative(
        &SpectralVelocity::zeros(grid()),
        &p,
        &NoiseConfig::multiplicative(1.0, 1.0, 9),
        &ou,
        (-5.0, 0.0),
        SolverOptions::default(),
    )
    .unwrap();
    assert!(states.iter().all(|s| s.v.is_zero() && s.u.is_zero()));
}

#[test]
fn configuration_checks() {
    let g3 = TorusGrid::periodic_2pi(3, 8).unwrap();
    let p3 = PhysicsParams::unforced(g3, 1.0, 1.0, 3.0).unwrap();
    let phi3 = SpectralVelocity::random_smooth(g3, 1, 1.0, 2.0, 1.0).unwrap();
    let err = PathwiseSolver::new(
        p3.clone(),
        NoiseConfig::additive(0.1, phi3, 1.0, 0),
        H,
        SolverOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("2D"), "{err}");
    assert!(PathwiseSolver::new(
        p3,
        NoiseConfig::multiplicative(0.1, 1.0, 0),
        H,
        SolverOptions::default()
    )
    .is_ok());
    let p = forced();
    assert!(PathwiseSolver::new(
        p.clone(),
        NoiseConfig::multiplicative(1.5, 1.0, 0),
        H,
        SolverOptions::default()
    )
    .is_err());
    assert!(PathwiseSolver::new(
        p.clone(),
        NoiseConfig::multiplicative(0.1, 0.0, 0),
        H,
        SolverOptions::default()
    )
    .is_err());
    let mut bare = NoiseConfig::additive(0.1, phi(), 1.0, 0);
    bare.phi = None;
    assert!(PathwiseSolver::new(p.clone(), bare, H, SolverOptions::default()).is_err());

    let solver = PathwiseSolver::new(
        p,
        NoiseConfig::multiplicative(0.1, 1.0, 0),
        H,
        SolverOptions::default(),
    )
    .unwrap();
    let wrong_rate = OuPath::sample(0, 2.0, -1.0, 0.0, H).unwrap();
    assert!(solver.advance(&initial(), &wrong_rate, -100, 0).is_err());
    let short = OuPath::sample(0, 1.0, -1.0, 0.0, H).unwrap();
    assert!(solver.advance(&initial(), &short, -200, 0).is_err());
}

#[test]
fn zero_intensity_pullback_finds_singleton() {
    let p = forced();
    let a = find_singleton(&p, &SingletonOptions::default()).unwrap();
    assert!(a.converged);
    for noise in [
        NoiseConfig::multiplicative(0.0, 1.0, 3),
        NoiseConfig::additive(0.0, phi(), 1.0, 3),
    ] {
        let s = pullback_sample(&p, &noise, 30.0, H, &PullbackOptions::default()).unwrap();
        assert!(h_norm(&s.state.sub(&a.a_star).unwrap()) <= 1e-6);
    }
}

#[test]
fn unforced_pullback_forgets_initial_state() {
    let p = PhysicsParams::unforced(grid(), 1.0, 1.0, 3.0).unwrap();
    let opts = PullbackOptions {
        initial: Some(initial()),
        ..PullbackOptions::default()
    };
    for seed in [1, 2] {
        let s = pullback_sample(
            &p,
            &NoiseConfig::multiplicative(0.5, 1.0, seed),
            30.0,
            H,
            &opts,
        )
        .unwrap();
        assert!(h_norm(&s.state) <= 1e-6, "{}", h_norm(&s.state));
        assert!(h_norm(&s.reconstructed) <= 1e-6);
    }
}

#[test]
fn doubling_and_determinism() {
    let p = forced();
    let noise = NoiseConfig::multiplicative(0.1, 1.0, 5);
    let opts = PullbackOptions {
        initial: Some(initial()),
        doubling_tol: Some(1e-4),
        ..PullbackOptions::default()
    };
    let s = pullback_sample(&p, &noise, 20.0, H, &opts).unwrap();
    assert!(s.converged);
    assert!(s.doubling_change.unwrap() <= 1e-4);
    let again = pullback_sample(&p, &noise, 20.0, H, &opts).unwrap();
    assert_eq!(s.state, again.state);
    assert_eq!(s.z0, again.z0);

    // the doubled run is a pullback over 40 on the same path
    let long = pullback_sample(
        &p,
        &noise,
        40.0,
        H,
        &PullbackOptions {
            doubling_tol: None,
            ..opts.clone()
        },
    )
    .unwrap();
    assert!((h_norm(&long.state) - h_norm(&s.state)).abs() <= 1e-4);
}

#[test]
fn doubling_ladder_is_monotone() {
    let p = forced();
    let noise = NoiseConfig::additive(0.2, phi(), 1.0, 6);
    let opts = PullbackOptions {
        initial: Some(initial()),
        doubling_tol: Some(1e-6),
        ..PullbackOptions::default()
    };
    let changes: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|t| {
            pullback_sample(&p, &noise, *t, H, &opts)
                .unwrap()
                .doubling_change
                .unwrap()
        })
        .collect();
    assert!(changes.windows(2).all(|w| w[1] < w[0]), "{changes:?}");
}

#[test]
fn sample_sidecar_fields() {
    let p = forced();
    let s = pullback_sample(
        &p,
        &NoiseConfig::multiplicative(0.25, 1.0, 12),
        2.0,
        H,
        &PullbackOptions::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (_, meta) = s.export(dir.path(), "sample_12").unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(meta).unwrap()).unwrap();
    for key in ["epsilon", "seed", "t_pull", "mode", "h", "norms"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["mode"], "multiplicative");
    assert_eq!(json["seed"], 12);
    assert_eq!(json["epsilon"], 0.25);
    let hv = json["norms"]["v"]["h_norm"].as_f64().unwrap();
    assert!((hv - h_norm(&s.state)).abs() <= 1e-15 * hv.max(1.0));
}
