//! Fourier-space operators on mean-zero, divergence-free fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralVelocity;
use super::grid::TorusGrid;
use super::transform;
use crate::error::{Error, Result};

/// Relative size of `k·û_k` below which a mode counts as already
/// divergence-free and is returned untouched. Makes the projection exactly
/// idempotent.
const SOLENOIDAL_SNAP: f64 = 64.0 * f64::EPSILON;

/// Leray projection `û_k ↦ û_k − k (k·û_k)/|k|²`, applied per retained mode.
/// Non-retained (Nyquist) sites are cleared.
pub fn leray_project(grid: TorusGrid, mut raw: Vec<Complex64>) -> Result<SpectralVelocity> {
    if raw.len() != grid.coeff_len() {
        return Err(Error::InvalidField(format!(
            "expected {} coefficients, got {}",
            grid.coeff_len(),
            raw.len()
        )));
    }
    let len = grid.lattice_len();
    let mean: f64 = (0..grid.dim()).map(|c| raw[c * len].norm()).sum();
    if mean != 0.0 {
        return Err(Error::MeanViolation(mean));
    }
    project_in_place(&grid, &mut raw);
    Ok(SpectralVelocity::from_projected(grid, raw))
}

/// Projection used on internally produced coefficients; the zero mode is
/// discarded rather than rejected.
pub(crate) fn project_in_place(grid: &TorusGrid, raw: &mut [Complex64]) {
    let len = grid.lattice_len();
    let dim = grid.dim();
    for c in 0..dim {
        raw[c * len] = Complex64::default();
    }
    for idx in 1..len {
        if !grid.is_retained(idx) {
            for c in 0..dim {
                raw[c * len + idx] = Complex64::default();
            }
            continue;
        }
        let k = grid.wavevector(idx);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        // A nearly longitudinal mode can keep a rounding residual above the
        // snap level after one subtraction; a few more passes settle it so
        // that projecting again is a no-op.
        for _ in 0..4 {
            let mut dot = Complex64::default();
            let mut mag = 0.0;
            for c in 0..dim {
                let v = raw[c * len + idx];
                dot += v * k[c] as f64;
                mag += v.norm_sqr();
            }
            if dot.norm() <= SOLENOIDAL_SNAP * mag.sqrt() * k2.sqrt() {
                break;
            }
            let s = dot / k2;
            for c in 0..dim {
                raw[c * len + idx] -= s * k[c] as f64;
            }
        }
    }
}

/// Per-lattice-site Stokes eigenvalue `(4π²/L²)|k|²`.
pub(crate) fn stokes_symbol(grid: &TorusGrid) -> Vec<f64> {
    let lambda1 = grid.lambda1();
    (0..grid.lattice_len())
        .map(|idx| lambda1 * grid.k_squared(idx) as f64)
        .collect()
}

/// Stokes operator `A = −PΔ`, diagonal with eigenvalues `(4π²/L²)|k|²`.
pub fn stokes_apply(u: &SpectralVelocity) -> SpectralVelocity {
    let grid = *u.grid();
    let symbol = stokes_symbol(&grid);
    let len = grid.lattice_len();
    let coeffs = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * symbol[i % len])
        .collect();
    SpectralVelocity::from_projected(grid, coeffs)
}

/// `(u·∇)v` on the 3/2-padded lattice, truncated and projected, together
/// with `max |u|` over the padded collocation points.
pub(crate) fn advect(u: &SpectralVelocity, v: &SpectralVelocity) -> (Vec<Complex64>, f64) {
    let grid = *u.grid();
    let dim = grid.dim();
    let len = grid.lattice_len();
    let m = grid.quadratic_points();
    let scale = grid.wavenumber_scale();
    let i = Complex64::new(0.0, 1.0);

    // velocity components then ∂_j v_i for i, j in row-major order
    let mut arrays: Vec<Vec<Complex64>> = (0..dim).map(|c| u.component(c).to_vec()).collect();
    for ci in 0..dim {
        let vc = v.component(ci);
        for j in 0..dim {
            let d: Vec<Complex64> = (0..len)
                .map(|idx| vc[idx] * i * (scale * grid.wavevector(idx)[j] as f64))
                .collect();
            arrays.push(d);
        }
    }
    let refs: Vec<&[Complex64]> = arrays.iter().map(|a| a.as_slice()).collect();
    let phys = transform::to_physical(&grid, &refs, m);
    let npts = phys[0].len();

    let mut max_speed2: f64 = 0.0;
    for p in 0..npts {
        let s: f64 = (0..dim).map(|c| phys[c][p] * phys[c][p]).sum();
        max_speed2 = max_speed2.max(s);
    }
    let mut products = vec![vec![0.0; npts]; dim];
    for (ci, prod) in products.iter_mut().enumerate() {
        for (p, out) in prod.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += phys[j][p] * phys[dim + ci * dim + j][p];
            }
            *out = acc;
        }
    }
    let refs: Vec<&[f64]> = products.iter().map(|a| a.as_slice()).collect();
    let mut coeffs = transform::to_spectral(&grid, &refs, m).concat();
    project_in_place(&grid, &mut coeffs);
    (coeffs, max_speed2.sqrt())
}

/// Bilinear term `B(u, v) = P[(u·∇)v]`, dealiased by 3/2 padding.
pub fn bilinear(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<SpectralVelocity> {
    u.check_same_grid(v)?;
    let (coeffs, _) = advect(u, v);
    Ok(SpectralVelocity::from_projected(*u.grid(), coeffs))
}

/// Trilinear form `b(u, v, w) = ⟨B(u, v), w⟩`.
pub fn trilinear(u: &SpectralVelocity, v: &SpectralVelocity, w: &SpectralVelocity) -> Result<f64> {
    u.check_same_grid(v)?;
    u.check_same_grid(w)?;
    let b = bilinear(u, v)?;
    inner(&b, w)
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "absorption exponent must be >= 1, got {r}"
        )));
    }
    Ok(())
}

/// `|u|^{r-1}` from `s = |u|²`, with the continuous extension `0` at the
/// origin.
#[inline]
pub(crate) fn damping_factor(s: f64, r: f64) -> f64 {
    if r == 1.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else if r == 3.0 {
        s
    } else if r == 5.0 {
        s * s
    } else {
        s.powf(0.5 * (r - 1.0))
    }
}

/// `|u|^{r-1} u` on the damping lattice, transformed back and projected,
/// plus `max |u|` on that lattice.
pub(crate) fn damping_coeffs(u: &SpectralVelocity, r: f64) -> (Vec<Complex64>, f64) {
    let grid = *u.grid();
    let dim = grid.dim();
    let m = grid.damping_points();
    let phys = u.to_physical(m);
    let npts = phys.component(0).len();
    let mut out = vec![vec![0.0; npts]; dim];
    let mut max_speed2: f64 = 0.0;
    for p in 0..npts {
        let s: f64 = (0..dim).map(|c| phys.component(c)[p].powi(2)).sum();
        max_speed2 = max_speed2.max(s);
        let f = damping_factor(s, r);
        for (c, o) in out.iter_mut().enumerate() {
            o[p] = f * phys.component(c)[p];
        }
    }
    let refs: Vec<&[f64]> = out.iter().map(|a| a.as_slice()).collect();
    let mut coeffs = transform::to_spectral(&grid, &refs, m).concat();
    project_in_place(&grid, &mut coeffs);
    (coeffs, max_speed2.sqrt())
}

/// Nonlinear damping `C(u) = P(|u|^{r-1} u)` evaluated on the 2×-padded
/// lattice.
pub fn damping(u: &SpectralVelocity, r: f64) -> Result<SpectralVelocity> {
    check_exponent(r)?;
    if r == 1.0 {
        return Ok(u.clone());
    }
    let (coeffs, _) = damping_coeffs(u, r);
    Ok(SpectralVelocity::from_projected(*u.grid(), coeffs))
}

/// `L²(T^n)` inner product via Parseval: `L^n Σ Re(û_k conj(v̂_k))`.
pub fn inner(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &SpectralVelocity, v: &SpectralVelocity) -> f64 {
    let s: f64 = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum();
    s * u.grid().volume()
}

/// Norms computed by Parseval sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    /// `‖u‖_H`
    pub h_norm: f64,
    /// `‖∇u‖_H`
    pub v_norm: f64,
    /// `‖Au‖_H`
    pub a_norm: f64,
}

pub fn norms(u: &SpectralVelocity) -> Norms {
    let grid = u.grid();
    let len = grid.lattice_len();
    let lambda1 = grid.lambda1();
    let (mut h, mut v, mut a) = (0.0, 0.0, 0.0);
    for (i, c) in u.coeffs().iter().enumerate() {
        let m2 = c.norm_sqr();
        let lam = lambda1 * grid.k_squared(i % len) as f64;
        h += m2;
        v += lam * m2;
        a += lam * lam * m2;
    }
    let vol = grid.volume();
    Norms {
        h_norm: (h * vol).sqrt(),
        v_norm: (v * vol).sqrt(),
        a_norm: (a * vol).sqrt(),
    }
}

pub fn h_norm(u: &SpectralVelocity) -> f64 {
    let s: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum();
    (s * u.grid().volume()).sqrt()
}

/// `∫|u|^p dx` by collocation quadrature on the damping lattice.
pub fn lp_integral(u: &SpectralVelocity, p: f64) -> f64 {
    let grid = u.grid();
    let m = grid.damping_points();
    let phys = u.to_physical(m);
    let npts = phys.component(0).len();
    let mut acc = 0.0;
    for i in 0..npts {
        let s: f64 = (0..grid.dim()).map(|c| phys.component(c)[i].powi(2)).sum();
        acc += if p == 2.0 { s } else { s.powf(0.5 * p) };
    }
    acc * grid.volume() / npts as f64
}

/// `‖u‖_{L^{r+1}}`.
pub fn lr_norm(u: &SpectralVelocity, r: f64) -> Result<f64> {
    check_exponent(r)?;
    Ok(lp_integral(u, r + 1.0).powf(1.0 / (r + 1.0)))
}
