use std::f64::consts::PI;

use cbf_core::spectral::{
    bilinear, damping, h_norm, inner, leray_project, lp_integral, lr_norm, norms, snapshot,
    stokes_apply, trilinear, SpectralVelocity, TorusGrid,
};
use cbf_core::Error;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn taylor_green(n: usize) -> SpectralVelocity {
    let grid = TorusGrid::periodic_2pi(2, n).unwrap();
    SpectralVelocity::from_physical_fn(grid, |x| {
        [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
    })
    .unwrap()
}

#[test]
fn projection_examples() {
    let grid = TorusGrid::periodic_2pi(2, 8).unwrap();
    let len = grid.lattice_len();
    let idx = grid.index_of([1, 0, 0]).unwrap();
    let neg = grid.negated_index(idx);
    let mut raw = vec![Complex64::default(); grid.coeff_len()];
    for i in [idx, neg] {
        raw[i] = c(1.0, 0.0);
        raw[len + i] = c(1.0, 0.0);
    }
    let p = leray_project(grid, raw).unwrap();
    assert_eq!(p.coeff([1, 0, 0]).unwrap()[..2], [c(0.0, 0.0), c(1.0, 0.0)]);

    // gradient of a scalar: û_k = i k φ̂_k
    let mut grad = vec![Complex64::default(); grid.coeff_len()];
    for i in 1..len {
        let k = grid.wavevector(i);
        if !grid.is_retained(i) {
            continue;
        }
        let phi = c(1.0 / (1 + k[0].abs() + k[1].abs()) as f64, 0.0);
        grad[i] = c(0.0, k[0] as f64) * phi;
        grad[len + i] = c(0.0, k[1] as f64) * phi;
    }
    assert!(h_norm(&leray_project(grid, grad).unwrap()) < 1e-14);

    let tg = taylor_green(8);
    assert_eq!(leray_project(grid, tg.coeffs().to_vec()).unwrap(), tg);

    let mut bad = vec![Complex64::default(); grid.coeff_len()];
    bad[0] = c(0.5, 0.0);
    assert!(matches!(
        leray_project(grid, bad),
        Err(Error::MeanViolation(_))
    ));
}

#[test]
fn stokes_on_taylor_green_against_finite_differences() {
    let n = 64;
    let u = taylor_green(n);
    let au = stokes_apply(&u);
    assert!(h_norm(&au.sub(&u.scaled(2.0)).unwrap()) <= 1e-12 * h_norm(&u));

    // second-order five-point Laplacian on the collocation lattice
    let phys = u.to_physical(n);
    let dx = 2.0 * PI / n as f64;
    assert!(
        (phys.position(1)[1] - dx).abs() < 1e-15,
        "last axis is contiguous"
    );
    let a_phys = au.to_physical(n);
    let mut worst: f64 = 0.0;
    for comp in 0..2 {
        let v = phys.component(comp);
        for i in 0..n {
            for j in 0..n {
                let at = |a: usize, b: usize| v[(a % n) * n + (b % n)];
                let lap = (at(i + 1, j) + at(i + n - 1, j) + at(i, j + 1) + at(i, j + n - 1)
                    - 4.0 * at(i, j))
                    / (dx * dx);
                worst = worst.max((-lap - a_phys.component(comp)[i * n + j]).abs());
            }
        }
    }
    // truncation error of the stencil is about |k|⁴ dx² / 12 ≈ 1.6e-3
    assert!(worst < 5e-3, "finite-difference mismatch {worst}");
}

#[test]
fn stokes_single_mode_multiplier() {
    let grid = TorusGrid::periodic_2pi(2, 16).unwrap();
    let u = SpectralVelocity::from_modes(
        grid,
        &[([0, 3, 0], [c(0.3, 0.1), c(0.0, 0.0), c(0.0, 0.0)])],
    )
    .unwrap();
    let au = stokes_apply(&u);
    assert_eq!(au.coeff([0, 3, 0]).unwrap()[0], c(0.3, 0.1) * 9.0);
    assert!(stokes_apply(&SpectralVelocity::zeros(grid)).is_zero());
}

#[test]
fn taylor_green_norms_and_advection() {
    let u = taylor_green(32);
    let n = norms(&u);
    assert!((n.h_norm.powi(2) - 2.0 * PI * PI).abs() < 1e-12);
    assert!((n.v_norm.powi(2) - 4.0 * PI * PI).abs() < 1e-12);
    assert!(h_norm(&bilinear(&u, &u).unwrap()) < 1e-13);
    let z = norms(&SpectralVelocity::zeros(*u.grid()));
    assert_eq!((z.h_norm, z.v_norm, z.a_norm), (0.0, 0.0, 0.0));
    assert_eq!(
        trilinear(&u.scaled(0.0), &u.scaled(0.0), &u.scaled(0.0)).unwrap(),
        0.0
    );
}

#[test]
fn damping_linear_case_is_identity() {
    let grid = TorusGrid::periodic_2pi(3, 8).unwrap();
    let u = SpectralVelocity::random_smooth(grid, 3, 1.0, 3.0, 1.0).unwrap();
    assert_eq!(damping(&u, 1.0).unwrap(), u);
    assert!(damping(&u, 0.5).is_err());
}

/// Modes of a band-limited test field, as `(k, amplitude)` with real and
/// imaginary parts evaluated directly by trigonometric sums.
const MODES: [([i64; 2], [f64; 4]); 3] = [
    ([1, 0], [0.0, 0.0, 0.4, -0.1]),
    ([2, 1], [0.1, 0.2, -0.2, -0.4]),
    ([0, 3], [0.3, -0.1, 0.0, 0.0]),
];

fn band_limited() -> SpectralVelocity {
    let grid = TorusGrid::periodic_2pi(2, 64).unwrap();
    let modes: Vec<_> = MODES
        .iter()
        .map(|(k, a)| ([k[0], k[1], 0], [c(a[0], a[1]), c(a[2], a[3]), c(0.0, 0.0)]))
        .collect();
    SpectralVelocity::from_modes(grid, &modes).unwrap()
}

/// `∫|u|^p` by direct trigonometric evaluation on `m²` points.
fn direct_lp(p: f64, m: usize) -> f64 {
    let h = 2.0 * PI / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (i as f64 * h, j as f64 * h);
            let mut u = [0.0; 2];
            for (k, a) in MODES {
                let th = k[0] as f64 * x + k[1] as f64 * y;
                // û e^{iθ} + conj: 2(Re û cos θ − Im û sin θ)
                u[0] += 2.0 * (a[0] * th.cos() - a[1] * th.sin());
                u[1] += 2.0 * (a[2] * th.cos() - a[3] * th.sin());
            }
            acc += (u[0] * u[0] + u[1] * u[1]).powf(p / 2.0);
        }
    }
    acc * h * h
}

#[test]
fn damping_pairing_against_direct_quadrature() {
    let u = band_limited();
    // the modes above are divergence-free, so projection leaves them alone
    let lhs = inner(&damping(&u, 3.0).unwrap(), &u).unwrap();
    let rhs = direct_lp(4.0, 96);
    assert!(((lhs - rhs) / rhs).abs() <= 1e-6, "{lhs} vs {rhs}");
    assert!((lr_norm(&u, 3.0).unwrap() - rhs.powf(0.25)).abs() <= 1e-6 * rhs.powf(0.25));
    let l2 = direct_lp(2.0, 96);
    assert!((h_norm(&u).powi(2) - l2).abs() <= 1e-12 * l2);
    assert!((lp_integral(&u, 2.0) - l2).abs() <= 1e-12 * l2);
}

#[test]
fn snapshot_layout_and_round_trip() {
    let grid = TorusGrid::new(3, 3.0, 8, 1.5).unwrap();
    let u = SpectralVelocity::random_smooth(grid, 9, 1.0, 3.0, 2.0).unwrap();
    let bytes = snapshot::encode(&u);
    assert_eq!(&bytes[..4], b"CBFF");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
    assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3.0);
    assert_eq!(bytes.len(), 24 + 512 * 3 * 16);
    assert_eq!(snapshot::decode(&bytes, 1.5).unwrap(), u);
    let mut corrupt = bytes.clone();
    corrupt[0] = b'X';
    assert!(snapshot::decode(&corrupt, 1.5).is_err());
    assert!(snapshot::decode(&bytes[..100], 1.5).is_err());
}

#[test]
fn grid_invariants() {
    assert!(TorusGrid::new(2, 1.0, 6, 1.5).is_err());
    assert!(TorusGrid::new(2, 1.0, 9, 1.5).is_err());
    assert!(TorusGrid::new(4, 1.0, 8, 1.5).is_err());
    assert!(TorusGrid::new(2, -1.0, 8, 1.5).is_err());
    assert!(TorusGrid::new(2, 1.0, 8, 0.9).is_err());
    let g = TorusGrid::new(2, 1.0, 8, 1.5).unwrap();
    assert!((g.lambda1() - 4.0 * PI * PI).abs() < 1e-12);
    for idx in 0..g.lattice_len() {
        assert_eq!(g.is_retained(idx), g.is_retained(g.negated_index(idx)));
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = taylor_green(8);
    let b = taylor_green(16);
    assert!(matches!(bilinear(&a, &b), Err(Error::GridMismatch)));
    assert!(trilinear(&a, &a, &b).is_err());
    assert!(inner(&a, &b).is_err());
}
