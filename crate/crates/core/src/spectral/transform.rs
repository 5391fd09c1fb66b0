//! Multidimensional FFTs on flat row-major lattices, plus the embedding and
//! truncation maps between the `N`-mode coefficient lattice and padded
//! collocation lattices.
//!
//! Stored coefficients are Fourier-series coefficients, so going to physical
//! space is an unnormalized inverse DFT and coming back divides by `M^n`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{lattice_wavevector, TorusGrid};

type Plans = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, Plans)> = RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, plans) = &mut *guard;
        plans
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// In-place unnormalized DFT over every axis of an `m^dim` lattice.
pub(crate) fn fft_nd(data: &mut [Complex64], m: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let fft = plan(m, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // last axis is contiguous
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let total = data.len();
    let lines = total / m;
    let mut buf = vec![Complex64::default(); total];
    for axis in 0..dim - 1 {
        let stride = m.pow((dim - 1 - axis) as u32);
        for line in 0..lines {
            let inner = line % stride;
            let outer = line / stride;
            let base = outer * stride * m + inner;
            let dst = &mut buf[line * m..(line + 1) * m];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = data[base + i * stride];
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for line in 0..lines {
            let inner = line % stride;
            let outer = line / stride;
            let base = outer * stride * m + inner;
            let src = &buf[line * m..(line + 1) * m];
            for (i, s) in src.iter().enumerate() {
                data[base + i * stride] = *s;
            }
        }
    }
}

/// Maps each retained site of the grid lattice to its position on an
/// `m^dim` lattice (`m >= N`).
pub(crate) fn embedding_map(grid: &TorusGrid, m: usize) -> Vec<(usize, usize)> {
    let dim = grid.dim();
    let mi = m as i64;
    (0..grid.lattice_len())
        .filter(|&idx| grid.is_retained(idx))
        .map(|idx| {
            let k = grid.wavevector(idx);
            let mut big = 0usize;
            for ki in k.iter().take(dim) {
                big = big * m + ki.rem_euclid(mi) as usize;
            }
            (idx, big)
        })
        .collect()
}

/// Index of `-k` on an `m^dim` lattice.
fn negate_on_lattice(idx: usize, m: usize, dim: usize) -> usize {
    let k = lattice_wavevector(idx, m, dim);
    let mi = m as i64;
    let mut out = 0usize;
    for ki in k.iter().take(dim) {
        out = out * m + (-ki).rem_euclid(mi) as usize;
    }
    out
}

/// Evaluates Hermitian coefficient arrays (one per component) on the
/// `m^dim` collocation lattice. Components are transformed two at a time by
/// packing them as real and imaginary parts.
pub(crate) fn to_physical(grid: &TorusGrid, comps: &[&[Complex64]], m: usize) -> Vec<Vec<f64>> {
    let dim = grid.dim();
    let total = m.pow(dim as u32);
    let map = embedding_map(grid, m);
    let mut out = Vec::with_capacity(comps.len());
    for pair in comps.chunks(2) {
        let mut big = vec![Complex64::default(); total];
        let i = Complex64::new(0.0, 1.0);
        for &(small, large) in &map {
            let mut c = pair[0][small];
            if let Some(second) = pair.get(1) {
                c += i * second[small];
            }
            big[large] = c;
        }
        fft_nd(&mut big, m, dim, true);
        out.push(big.iter().map(|c| c.re).collect());
        if pair.len() == 2 {
            out.push(big.iter().map(|c| c.im).collect());
        }
    }
    out
}

/// Transforms real collocation values back to truncated coefficient arrays
/// on the grid lattice. Non-retained sites are zero.
pub(crate) fn to_spectral(grid: &TorusGrid, comps: &[&[f64]], m: usize) -> Vec<Vec<Complex64>> {
    let dim = grid.dim();
    let total = m.pow(dim as u32);
    let scale = 1.0 / total as f64;
    let map = embedding_map(grid, m);
    let len = grid.lattice_len();
    let mut out = Vec::with_capacity(comps.len());
    for pair in comps.chunks(2) {
        let mut big: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        fft_nd(&mut big, m, dim, false);
        let mut first = vec![Complex64::default(); len];
        if pair.len() == 2 {
            let mut second = vec![Complex64::default(); len];
            for &(small, large) in &map {
                let z = big[large];
                let zn = big[negate_on_lattice(large, m, dim)].conj();
                first[small] = (z + zn) * (0.5 * scale);
                // (z - zn) / 2i
                let d = (z - zn) * (0.5 * scale);
                second[small] = Complex64::new(d.im, -d.re);
            }
            out.push(first);
            out.push(second);
        } else {
            for &(small, large) in &map {
                first[small] = big[large] * scale;
            }
            out.push(first);
        }
    }
    out
}
