use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::TorusGrid;
use super::ops;
use super::transform;
use crate::error::{Error, Result};

/// Mean-zero, divergence-free velocity field stored as Fourier-series
/// coefficients `û_k` with `u(x) = Σ û_k exp(2πi k·x/L)`.
///
/// Coefficients are laid out component-major: component `c` occupies
/// `coeffs[c * N^n .. (c + 1) * N^n]`. The full symmetric lattice is stored
/// and `û_{-k} = conj(û_k)` holds for every retained `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocity {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Real point values of a vector field on an `m^n` collocation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: TorusGrid,
    points: usize,
    values: Vec<Vec<f64>>,
}

impl PhysicalField {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    /// Coordinates of flat collocation index `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        collocation_position(&self.grid, self.points, idx)
    }

    /// Largest pointwise speed `|u(x)|`.
    pub fn max_speed(&self) -> f64 {
        let len = self.values[0].len();
        (0..len)
            .map(|i| self.values.iter().map(|v| v[i] * v[i]).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

pub(crate) fn collocation_position(grid: &TorusGrid, m: usize, idx: usize) -> [f64; 3] {
    let dx = grid.length() / m as f64;
    let mut pos = [0.0; 3];
    let mut rest = idx;
    for axis in (0..grid.dim()).rev() {
        pos[axis] = (rest % m) as f64 * dx;
        rest /= m;
    }
    pos
}

impl SpectralVelocity {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            coeffs: vec![Complex64::default(); grid.coeff_len()],
            grid,
        }
    }

    /// Wraps coefficients that are already projected. Callers inside the
    /// crate guarantee the invariants.
    pub(crate) fn from_projected(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.coeff_len());
        Self { grid, coeffs }
    }

    /// Builds a field from `(k, amplitude)` pairs. Each amplitude is set at
    /// `k` and its conjugate at `-k`, then the result is Leray-projected.
    pub fn from_modes(grid: TorusGrid, modes: &[([i64; 3], [Complex64; 3])]) -> Result<Self> {
        let len = grid.lattice_len();
        let mut raw = vec![Complex64::default(); grid.coeff_len()];
        for (k, amp) in modes {
            if k.iter().all(|&x| x == 0) {
                return Err(Error::MeanViolation(amp.iter().map(|a| a.norm()).sum()));
            }
            let idx = grid.index_of(*k).ok_or_else(|| {
                Error::InvalidField(format!("wavevector {k:?} is not retained on this grid"))
            })?;
            let neg = grid.negated_index(idx);
            for c in 0..grid.dim() {
                raw[c * len + idx] += amp[c];
                raw[c * len + neg] += amp[c].conj();
            }
        }
        ops::leray_project(grid, raw)
    }

    /// Samples a vector function on the `N^n` lattice, removes the mean and
    /// projects.
    pub fn from_physical_fn<F>(grid: TorusGrid, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> [f64; 3],
    {
        let m = grid.modes();
        let total = m.pow(grid.dim() as u32);
        let mut values = vec![vec![0.0; total]; grid.dim()];
        for idx in 0..total {
            let v = f(collocation_position(&grid, m, idx));
            for c in 0..grid.dim() {
                values[c][idx] = v[c];
            }
        }
        let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
        let comps = transform::to_spectral(&grid, &refs, m);
        let mut raw = comps.concat();
        let len = grid.lattice_len();
        for c in 0..grid.dim() {
            raw[c * len] = Complex64::default();
        }
        ops::leray_project(grid, raw)
    }

    /// Smooth random field: complex Gaussian coefficients with amplitude
    /// proportional to `|k|^{-decay}` for `0 < |k| <= kmax`, projected and
    /// normalized to `‖u‖_H = h_norm`.
    pub fn random_smooth(
        grid: TorusGrid,
        seed: u64,
        decay: f64,
        kmax: f64,
        h_norm: f64,
    ) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let len = grid.lattice_len();
        let mut raw = vec![Complex64::default(); grid.coeff_len()];
        for idx in 0..len {
            let neg = grid.negated_index(idx);
            // visit each ±k pair once, in index order
            if !grid.is_retained(idx) || neg < idx {
                continue;
            }
            let k2 = grid.k_squared(idx) as f64;
            if k2 == 0.0 || k2.sqrt() > kmax {
                continue;
            }
            let amp = k2.powf(-decay / 2.0);
            for c in 0..grid.dim() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let z = if neg == idx {
                    Complex64::new(re, 0.0)
                } else {
                    Complex64::new(re, im)
                } * amp;
                raw[c * len + idx] = z;
                raw[c * len + neg] = z.conj();
            }
        }
        let u = ops::leray_project(grid, raw)?;
        let norm = ops::h_norm(&u);
        if norm == 0.0 {
            return Err(Error::InvalidField(
                "random field has no retained modes".into(),
            ));
        }
        Ok(u.scaled(h_norm / norm))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.lattice_len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    /// Coefficient vector at integer wavevector `k`, if retained.
    pub fn coeff(&self, k: [i64; 3]) -> Option<[Complex64; 3]> {
        let idx = self.grid.index_of(k)?;
        let len = self.grid.lattice_len();
        let mut out = [Complex64::default(); 3];
        for (c, o) in out.iter_mut().enumerate().take(self.grid.dim()) {
            *o = self.coeffs[c * len + idx];
        }
        Some(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn check_same_grid(&self, other: &SpectralVelocity) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SpectralVelocity) -> Result<()> {
        self.check_same_grid(other)?;
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += o * a;
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralVelocity) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SpectralVelocity) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Point values on an `m^n` collocation lattice.
    pub fn to_physical(&self, points: usize) -> PhysicalField {
        let comps: Vec<&[Complex64]> = (0..self.grid.dim()).map(|c| self.component(c)).collect();
        PhysicalField {
            grid: self.grid,
            points,
            values: transform::to_physical(&self.grid, &comps, points),
        }
    }

    /// Largest `|k·û_k| / max(1, |û_k|)` over retained `k ≠ 0`.
    pub fn divergence_defect(&self) -> f64 {
        let len = self.grid.lattice_len();
        let dim = self.grid.dim();
        let mut worst: f64 = 0.0;
        for idx in 1..len {
            let k = self.grid.wavevector(idx);
            let mut dot = Complex64::default();
            let mut mag = 0.0;
            for c in 0..dim {
                let v = self.coeffs[c * len + idx];
                dot += v * k[c] as f64;
                mag += v.norm_sqr();
            }
            worst = worst.max(dot.norm() / mag.sqrt().max(1.0));
        }
        worst
    }

    /// Largest `|û_{-k} - conj(û_k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.lattice_len();
        let mut worst: f64 = 0.0;
        for c in 0..self.grid.dim() {
            for idx in 0..len {
                let neg = self.grid.negated_index(idx);
                let d = self.coeffs[c * len + neg] - self.coeffs[c * len + idx].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn mean_defect(&self) -> f64 {
        let len = self.grid.lattice_len();
        (0..self.grid.dim())
            .map(|c| self.coeffs[c * len].norm())
            .sum()
    }
}
