//! O(1)-per-step simulation from the sufficient statistic (n, S_n, Σ_n).
//!
//! Given the past, the next step is +1, -1 or 0 with probabilities
//! `(bΣ + aS) / 2n`, `(bΣ - aS) / 2n` and `1 - bΣ/n`. Step n -> n+1 consumes
//! draw number `n` of the replicate's stream (draw 0 decides X_1), and the
//! uniform `u` is mapped by thresholds in the fixed order (+1, -1, 0):
//!
//! ```text
//! t = u * 2n;  +1 if t < bΣ + aS,  else -1 if t < 2bΣ,  else 0
//! ```
//!
//! The single-walk stepper and the lock-step batch engine share
//! [`step_core`], so both produce bit-identical paths.

use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::params::{DerivedConstants, WalkParams};
use crate::rng::{mix64, Stream};

/// Longest horizon for which full increments may be recorded.
pub const MAX_INCREMENT_HORIZON: u64 = 10_000_000;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Number of walks advanced together by [`simulate_batch`].
const LANES: usize = 8;

/// One step of the walk. `s` and `sigma` hold exact integers.
#[inline(always)]
fn step_core(s: &mut f64, sigma: &mut f64, draw: u64, scale: f64, a: f64, b: f64) -> i8 {
    let t = (draw >> 11) as f64 * scale;
    let bs = b * *sigma;
    let plus = (t < bs + a * *s) as u8;
    let moved = (t < bs + bs) as u8;
    let dx = 2 * plus as i8 - moved as i8;
    *s += dx as f64;
    *sigma += moved as f64;
    dx
}

#[inline(always)]
fn first_step(stream: &Stream, s_prob: f64) -> i64 {
    let u = (stream.draw_at(0) >> 11) as f64 * TWO_POW_M53;
    if u < s_prob {
        1
    } else {
        -1
    }
}

/// Conditional law of the next step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLaw {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

/// Current state of one walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    pub n: u64,
    pub s: i64,
    pub sigma: u64,
    stream: Stream,
}

impl WalkState {
    /// A state with an explicit statistic, e.g. for evaluating the law.
    pub fn from_parts(n: u64, s: i64, sigma: u64, stream: Stream) -> Result<Self> {
        let st = WalkState { n, s, sigma, stream };
        st.check()?;
        Ok(st)
    }

    pub fn stream(&self) -> &Stream {
        &self.stream
    }

    /// The structural invariants: |S| <= Σ <= n, Σ >= 1, Σ ± S even.
    pub fn check(&self) -> Result<()> {
        let ok = self.n >= 1
            && self.sigma >= 1
            && self.sigma <= self.n
            && self.s.unsigned_abs() <= self.sigma
            && (self.sigma as i64 + self.s) % 2 == 0;
        if ok {
            Ok(())
        } else {
            Err(ErwsError::domain(format!(
                "invalid walk state n={}, S={}, Sigma={}",
                self.n, self.s, self.sigma
            )))
        }
    }

    /// Take one step and return the increment.
    pub fn step(&mut self, c: &DerivedConstants) -> i8 {
        let mut s = self.s as f64;
        let mut sigma = self.sigma as f64;
        let scale = 2.0 * self.n as f64 * TWO_POW_M53;
        let dx = step_core(&mut s, &mut sigma, self.stream.draw_at(self.n), scale, c.a, c.b);
        self.n += 1;
        self.s = s as i64;
        self.sigma = sigma as u64;
        self.stream.seek(self.n);
        debug_assert!(self.check().is_ok(), "{self:?}");
        dx
    }

    /// Advance to step `target` without recording anything.
    pub fn advance_to(&mut self, target: u64, c: &DerivedConstants) {
        let (a, b) = (c.a, c.b);
        let mut s = self.s as f64;
        let mut sigma = self.sigma as f64;
        let mut n = self.n;
        while n < target {
            let scale = 2.0 * n as f64 * TWO_POW_M53;
            step_core(&mut s, &mut sigma, self.stream.draw_at(n), scale, a, b);
            n += 1;
        }
        self.n = n;
        self.s = s as i64;
        self.sigma = sigma as u64;
        self.stream.seek(n);
    }
}

/// Exact one-step conditional law given the statistic.
pub fn step_law(state: &WalkState, c: &DerivedConstants) -> StepLaw {
    step_law_at(state.n, state.s, state.sigma, c)
}

/// [`step_law`] from the bare statistic (n, S_n, Σ_n).
pub fn step_law_at(n: u64, s: i64, sigma: u64, c: &DerivedConstants) -> StepLaw {
    let n = n as f64;
    let bs = c.b * sigma as f64;
    let as_ = c.a * s as f64;
    StepLaw {
        plus: (bs + as_) / (2.0 * n),
        minus: (bs - as_) / (2.0 * n),
        zero: 1.0 - bs / n,
    }
}

/// First step of replicate `replicate`: n = 1, S = ±1, Σ = 1.
pub fn init_walk(params: &WalkParams, base_seed: u64, replicate: u64) -> Result<WalkState> {
    let c = params.derived()?;
    let mut stream = Stream::new(base_seed, replicate);
    let s = first_step(&stream, c.params.s);
    stream.seek(1);
    Ok(WalkState { n: 1, s, sigma: 1, stream })
}

/// Steps at which a path is recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckpointGrid {
    /// 1, ⌈ratio⌉, ... (strictly increasing), plus the horizon.
    Geometric { ratio: f64 },
    /// Every `every`-th step starting at 1, plus the horizon.
    Dense { every: u64 },
    /// Given steps; those above the horizon are dropped, the horizon added.
    Explicit { steps: Vec<u64> },
}

impl Default for CheckpointGrid {
    fn default() -> Self {
        CheckpointGrid::Geometric { ratio: 2.0 }
    }
}

impl CheckpointGrid {
    pub fn points(&self, horizon: u64) -> Result<Vec<u64>> {
        if horizon == 0 {
            return Err(ErwsError::domain("horizon must be >= 1"));
        }
        let mut pts = Vec::new();
        match self {
            CheckpointGrid::Geometric { ratio } => {
                if !(*ratio > 1.0) || !ratio.is_finite() {
                    return Err(ErwsError::domain(format!("geometric ratio must be > 1, got {ratio}")));
                }
                let mut x = 1.0f64;
                while x.round() < horizon as f64 {
                    let n = x.round() as u64;
                    if pts.last().map_or(true, |&l| n > l) {
                        pts.push(n);
                    }
                    x *= ratio;
                }
            }
            CheckpointGrid::Dense { every } => {
                if *every == 0 {
                    return Err(ErwsError::domain("dense grid step must be >= 1"));
                }
                let mut n = 1;
                while n < horizon {
                    pts.push(n);
                    n += every;
                }
            }
            CheckpointGrid::Explicit { steps } => {
                let mut s: Vec<u64> = steps.iter().copied().filter(|&n| n >= 1 && n < horizon).collect();
                s.sort_unstable();
                s.dedup();
                pts = s;
            }
        }
        pts.push(horizon);
        Ok(pts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    #[serde(rename = "S")]
    pub s: i64,
    #[serde(rename = "Sigma")]
    pub sigma: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub params: WalkParams,
    pub base_seed: u64,
    pub replicate: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// X_1, ..., X_horizon when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub increments: Option<Vec<i8>>,
}

impl PathRecord {
    pub fn horizon(&self) -> u64 {
        self.checkpoints.last().map_or(0, |c| c.n)
    }
}

/// Simulate one path and record it on `grid`.
pub fn simulate_path(
    params: &WalkParams,
    horizon: u64,
    base_seed: u64,
    replicate: u64,
    grid: &CheckpointGrid,
) -> Result<PathRecord> {
    simulate_path_impl(params, horizon, base_seed, replicate, grid, false)
}

/// Like [`simulate_path`], additionally keeping every increment.
pub fn simulate_path_with_increments(
    params: &WalkParams,
    horizon: u64,
    base_seed: u64,
    replicate: u64,
    grid: &CheckpointGrid,
) -> Result<PathRecord> {
    simulate_path_impl(params, horizon, base_seed, replicate, grid, true)
}

fn simulate_path_impl(
    params: &WalkParams,
    horizon: u64,
    base_seed: u64,
    replicate: u64,
    grid: &CheckpointGrid,
    increments: bool,
) -> Result<PathRecord> {
    if increments && horizon > MAX_INCREMENT_HORIZON {
        return Err(ErwsError::Capacity(format!(
            "increments are kept for horizons up to {MAX_INCREMENT_HORIZON}, got {horizon}"
        )));
    }
    let c = params.derived()?;
    let points = grid.points(horizon)?;
    let mut state = init_walk(&c.params, base_seed, replicate)?;
    let mut steps = increments.then(|| {
        let mut v = Vec::with_capacity(horizon as usize);
        v.push(state.s as i8);
        v
    });
    let mut checkpoints = Vec::with_capacity(points.len());
    for &target in &points {
        match steps.as_mut() {
            Some(v) => {
                while state.n < target {
                    v.push(state.step(&c));
                }
            }
            None => state.advance_to(target, &c),
        }
        checkpoints.push(Checkpoint {
            n: state.n,
            s: state.s,
            sigma: state.sigma,
        });
    }
    Ok(PathRecord {
        params: c.params,
        base_seed,
        replicate,
        checkpoints,
        increments: steps,
    })
}

/// (S, Σ) of replicates `first .. first + count` at each of the increasing
/// `horizons`. Row i holds replicate `first + i`.
///
/// Walks are advanced in lock-step groups so the per-step dependency
/// chains of different walks overlap; the values equal those of
/// [`simulate_path`] bit for bit.
pub fn simulate_batch(
    c: &DerivedConstants,
    base_seed: u64,
    first: u64,
    count: usize,
    horizons: &[u64],
) -> Result<Vec<Vec<(i64, u64)>>> {
    if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ErwsError::domain("horizons must be >= 1 and strictly increasing"));
    }
    let (a, b) = (c.a, c.b);
    let mut out = Vec::with_capacity(count);
    let mut rep = first;
    let end = first + count as u64;
    while rep < end {
        let lanes = ((end - rep) as usize).min(LANES);
        let streams: Vec<Stream> = (0..lanes as u64).map(|i| Stream::new(base_seed, rep + i)).collect();
        let mut s = [0.0f64; LANES];
        let mut sigma = [1.0f64; LANES];
        let mut weyl = [0u64; LANES];
        let mut gamma = [0u64; LANES];
        for (i, st) in streams.iter().enumerate() {
            s[i] = first_step(st, c.params.s) as f64;
            // draw_at(k) = mix64(key + (k + 1) gamma); weyl tracks the argument.
            let (key, gm) = st.weyl_parts();
            gamma[i] = gm;
            weyl[i] = key.wrapping_add(gm.wrapping_mul(2));
        }
        let mut rows: Vec<Vec<(i64, u64)>> = vec![Vec::with_capacity(horizons.len()); lanes];
        let mut n = 1u64;
        for &h in horizons {
            while n < h {
                let scale = 2.0 * n as f64 * TWO_POW_M53;
                for i in 0..LANES {
                    let draw = mix64(weyl[i]);
                    step_core(&mut s[i], &mut sigma[i], draw, scale, a, b);
                    weyl[i] = weyl[i].wrapping_add(gamma[i]);
                }
                n += 1;
            }
            for (i, row) in rows.iter_mut().enumerate() {
                row.push((s[i] as i64, sigma[i] as u64));
            }
        }
        out.extend(rows);
        rep += lanes as u64;
    }
    Ok(out)
}
