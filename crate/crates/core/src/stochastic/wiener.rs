use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Number of steps drawn from one random sub-stream.
pub const BLOCK_STEPS: usize = 1024;

/// Sub-stream families carved out of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StreamKind {
    Increment = 0,
    Innovation = 1,
}

/// Stream id of block `block` counted outward from `t = 0`; `forward`
/// selects the positive-time branch.
pub(crate) fn stream_id(kind: StreamKind, forward: bool, block: u64) -> u64 {
    4 * block + 2 * (kind as u64) + u64::from(!forward)
}

/// Stream reserved for the stationary initial draw of an OU path.
pub(crate) const ANCHOR_STREAM: u64 = u64::MAX;

/// The first `count` standard normals of stream `stream`.
pub(crate) fn stream_normals(seed: u64, stream: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect()
}

/// Standard normals attached to steps `[first, first + count)`, where step
/// `j` spans ticks `j → j + 1`. Step `j ≥ 0` is entry `j` of the forward
/// branch; step `j < 0` is entry `−j − 1` of the backward branch.
pub(crate) fn step_normals(seed: u64, kind: StreamKind, first: i64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    let last = first + count as i64;
    // backward branch: steps −1, −2, … in stream order
    if first < 0 {
        let n_back = (last.min(0) - first) as usize;
        let depth = (-first) as usize;
        let values = branch_normals(seed, kind, false, depth);
        for (i, slot) in out.iter_mut().take(n_back).enumerate() {
            let step = first + i as i64;
            *slot = values[(-step - 1) as usize];
        }
    }
    if last > 0 {
        let start = first.max(0);
        let values = branch_normals(seed, kind, true, last as usize);
        for step in start..last {
            out[(step - first) as usize] = values[step as usize];
        }
    }
    out
}

/// First `count` normals of one branch, assembled block by block.
fn branch_normals(seed: u64, kind: StreamKind, forward: bool, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut block = 0u64;
    while out.len() < count {
        let take = (count - out.len()).min(BLOCK_STEPS);
        out.extend(stream_normals(seed, stream_id(kind, forward, block), take));
        block += 1;
    }
    out
}

/// Grid index of `t`, which must be an integer multiple of `h`.
pub(crate) fn tick_of(t: f64, h: f64) -> Result<i64> {
    if !t.is_finite() {
        return Err(Error::OffGrid(t));
    }
    let n = (t / h).round();
    if (n * h - t).abs() > 1e-9 * t.abs().max(h) {
        return Err(Error::OffGrid(t));
    }
    Ok(n as i64)
}

/// Two-sided Brownian path sampled on `{j h : t_min ≤ j h ≤ t_max}` with
/// `W(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    seed: u64,
    h: f64,
    min_tick: i64,
    values: Vec<f64>,
}

impl WienerPath {
    pub fn sample(seed: u64, t_min: f64, t_max: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "path step must be positive, got {h}"
            )));
        }
        if !(t_min < 0.0 && t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "path interval must satisfy t_min < 0 <= t_max, got [{t_min}, {t_max}]"
            )));
        }
        let min_tick = tick_of(t_min, h)?;
        let max_tick = tick_of(t_max, h)?;
        let steps = (max_tick - min_tick) as usize;
        let dw: Vec<f64> = step_normals(seed, StreamKind::Increment, min_tick, steps)
            .into_iter()
            .map(|x| x * h.sqrt())
            .collect();
        let zero = (-min_tick) as usize;
        let mut values = vec![0.0; steps + 1];
        for i in zero..steps {
            values[i + 1] = values[i] + dw[i];
        }
        for i in (0..zero).rev() {
            values[i] = values[i + 1] - dw[i];
        }
        Ok(Self {
            seed,
            h,
            min_tick,
            values,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn min_tick(&self) -> i64 {
        self.min_tick
    }

    pub fn max_tick(&self) -> i64 {
        self.min_tick + self.values.len() as i64 - 1
    }

    pub fn t_min(&self) -> f64 {
        self.min_tick as f64 * self.h
    }

    pub fn t_max(&self) -> f64 {
        self.max_tick() as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_of_tick(&self, tick: i64) -> f64 {
        tick as f64 * self.h
    }

    /// Checked tick index of `t`.
    pub fn tick(&self, t: f64) -> Result<i64> {
        let n = tick_of(t, self.h)?;
        self.check_tick(n)?;
        Ok(n)
    }

    pub(crate) fn check_tick(&self, tick: i64) -> Result<()> {
        if tick < self.min_tick || tick > self.max_tick() {
            return Err(Error::OutOfDomain {
                t: tick as f64 * self.h,
                min: self.t_min(),
                max: self.t_max(),
            });
        }
        Ok(())
    }

    pub fn at_tick(&self, tick: i64) -> Result<f64> {
        self.check_tick(tick)?;
        Ok(self.values[(tick - self.min_tick) as usize])
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        self.at_tick(tick_of(t, self.h)?)
    }

    /// Shifted path `θ_s ω(τ) = ω(τ + s) − ω(s)` evaluated at `τ`.
    pub fn shifted_at(&self, s: f64, tau: f64) -> Result<f64> {
        let ts = tick_of(s, self.h)?;
        let tt = tick_of(tau, self.h)?;
        Ok(self.at_tick(tt + ts)? - self.at_tick(ts)?)
    }
}

/// Two-sided Wiener path on `[t_min, t_max]` with step `h`.
pub fn sample_wiener(seed: u64, t_min: f64, t_max: f64, h: f64) -> Result<WienerPath> {
    WienerPath::sample(seed, t_min, t_max, h)
}
