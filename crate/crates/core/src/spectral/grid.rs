use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization of the periodic box `[0, L]^n` with `N` modes per axis.
///
/// Wavevectors are integer lattice points `k` with `|k_i| < N/2`; the Nyquist
/// plane is never retained so that `k` is retained exactly when `-k` is.
/// Storage follows FFT ordering with the last axis contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    length: f64,
    modes: usize,
    dealias_factor: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, length: f64, modes: usize, dealias_factor: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {length}"
            )));
        }
        if modes < 8 || modes % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be even and >= 8, got {modes}"
            )));
        }
        if !(dealias_factor.is_finite() && dealias_factor >= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias factor must be >= 1, got {dealias_factor}"
            )));
        }
        Ok(Self {
            dim,
            length,
            modes,
            dealias_factor,
        })
    }

    /// `[0, 2π]^n` with the default 3/2 padding.
    pub fn periodic_2pi(dim: usize, modes: usize) -> Result<Self> {
        Self::new(dim, 2.0 * PI, modes, 1.5)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dealias_factor(&self) -> f64 {
        self.dealias_factor
    }

    /// Smallest eigenvalue of the Stokes operator, `4π²/L²`.
    pub fn lambda1(&self) -> f64 {
        4.0 * PI * PI / (self.length * self.length)
    }

    /// Converts an integer wavevector to a physical one: `2π/L`.
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.modes as f64
    }

    /// Number of lattice sites per component, `N^n`.
    pub fn lattice_len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    /// Total number of stored coefficients, `n * N^n`.
    pub fn coeff_len(&self) -> usize {
        self.dim * self.lattice_len()
    }

    /// Collocation points per axis used for quadratic products.
    pub fn quadratic_points(&self) -> usize {
        padded_even(self.modes, self.dealias_factor)
    }

    /// Collocation points per axis used for the non-polynomial damping term.
    pub fn damping_points(&self) -> usize {
        (2 * self.modes).max(self.quadratic_points())
    }

    pub fn same_as(&self, other: &TorusGrid) -> bool {
        self == other
    }

    /// Integer wavevector at flat lattice index `idx` (unused axes are zero).
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        lattice_wavevector(idx, self.modes, self.dim)
    }

    /// `|k|²` of the integer wavevector at `idx`.
    pub fn k_squared(&self, idx: usize) -> i64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Whether the lattice site carries a retained (non-Nyquist) mode.
    pub fn is_retained(&self, idx: usize) -> bool {
        let half = (self.modes / 2) as i64;
        self.wavevector(idx).iter().all(|&k| k.abs() < half)
    }

    /// Flat index of a retained wavevector.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.modes / 2) as i64;
        let n = self.modes as i64;
        let mut idx = 0usize;
        for (axis, &ki) in k.iter().enumerate() {
            if axis >= self.dim {
                if ki != 0 {
                    return None;
                }
                continue;
            }
            if ki.abs() >= half {
                return None;
            }
            idx = idx * self.modes + ki.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Index of `-k` for the site at `idx`.
    pub fn negated_index(&self, idx: usize) -> usize {
        let k = self.wavevector(idx);
        let n = self.modes as i64;
        let mut out = 0usize;
        for ki in k.iter().take(self.dim) {
            out = out * self.modes + (-ki).rem_euclid(n) as usize;
        }
        out
    }
}

fn padded_even(modes: usize, factor: f64) -> usize {
    let m = (factor * modes as f64 - 1e-9).ceil() as usize;
    let m = m.max(modes);
    m + (m % 2)
}

/// Integer wavevector of flat index `idx` on an `m^dim` lattice in FFT order.
pub(crate) fn lattice_wavevector(idx: usize, m: usize, dim: usize) -> [i64; 3] {
    let mut k = [0i64; 3];
    let mut rest = idx;
    for axis in (0..dim).rev() {
        let i = rest % m;
        rest /= m;
        k[axis] = if i < m.div_ceil(2) {
            i as i64
        } else {
            i as i64 - m as i64
        };
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(1, 1.0, 16, 1.5).is_err());
        assert!(TorusGrid::new(2, 1.0, 6, 1.5).is_err());
        assert!(TorusGrid::new(2, 1.0, 17, 1.5).is_err());
        assert!(TorusGrid::new(2, 0.0, 16, 1.5).is_err());
        assert!(TorusGrid::new(2, 1.0, 16, 0.9).is_err());
    }

    #[test]
    fn poincare_constant() {
        let g = TorusGrid::periodic_2pi(2, 16).unwrap();
        assert!((g.lambda1() - 1.0).abs() < 1e-15);
        let g = TorusGrid::new(3, 1.0, 16, 1.5).unwrap();
        assert!((g.lambda1() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn padding_sizes() {
        let g = TorusGrid::periodic_2pi(2, 32).unwrap();
        assert_eq!(g.quadratic_points(), 48);
        assert_eq!(g.damping_points(), 64);
        let g = TorusGrid::new(3, 1.0, 16, 1.0).unwrap();
        assert_eq!(g.quadratic_points(), 16);
        assert_eq!(g.damping_points(), 32);
    }

    #[test]
    fn retained_set_is_symmetric() {
        for dim in [2, 3] {
            let g = TorusGrid::periodic_2pi(dim, 8).unwrap();
            for idx in 0..g.lattice_len() {
                let neg = g.negated_index(idx);
                assert_eq!(g.is_retained(idx), g.is_retained(neg));
                if g.is_retained(idx) {
                    let k = g.wavevector(idx);
                    assert_eq!(g.index_of(k), Some(idx));
                    let kn = g.wavevector(neg);
                    assert_eq!([-k[0], -k[1], -k[2]], kn);
                }
            }
        }
    }
}
