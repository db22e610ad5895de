//! Replicate ensembles. Replicate i always uses stream (base_seed, i), and
//! results are stored in replicate order, so the output does not depend on
//! the number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::params::WalkParams;
use crate::simulator::simulate_batch;
use crate::stats::summarize;

/// Replicates handed to one worker at a time.
const CHUNK: usize = 256;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "ERWS_THREADS";

/// A named function of the terminal statistic (n, S_n, Σ_n).
#[derive(Clone)]
pub struct Observable {
    pub name: String,
    f: Arc<dyn Fn(u64, i64, u64) -> f64 + Send + Sync>,
}

impl Observable {
    pub fn new(name: impl Into<String>, f: impl Fn(u64, i64, u64) -> f64 + Send + Sync + 'static) -> Self {
        Observable {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// S_n^m.
    pub fn s_pow(m: i32) -> Self {
        Observable::new(format!("S^{m}"), move |_, s, _| (s as f64).powi(m))
    }

    /// Σ_n^m.
    pub fn sigma_pow(m: i32) -> Self {
        Observable::new(format!("Sigma^{m}"), move |_, _, sg| (sg as f64).powi(m))
    }

    pub fn eval(&self, n: u64, s: i64, sigma: u64) -> f64 {
        (self.f)(n, s, sigma)
    }
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMoment {
    pub name: String,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub params: WalkParams,
    pub n: u64,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub base_seed: u64,
    /// (S_n, Σ_n) per replicate.
    pub terminals: Vec<(i64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub secondary_n: Option<u64>,
    /// (S, Σ) at `secondary_n` per replicate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub secondary: Option<Vec<(i64, u64)>>,
    /// Means of the observables at horizon n.
    pub moments: Vec<SampleMoment>,
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub params: WalkParams,
    pub n: u64,
    pub replicates: usize,
    pub base_seed: u64,
    /// A later horizon reached by continuing the same paths.
    pub secondary_n: Option<u64>,
    /// Worker count; `None` reads [`THREADS_ENV`], then uses all cores.
    pub threads: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(params: WalkParams, n: u64, replicates: usize, base_seed: u64) -> Self {
        EnsembleSpec {
            params,
            n,
            replicates,
            base_seed,
            secondary_n: None,
            threads: None,
        }
    }
}

/// Worker count from an explicit value, else [`THREADS_ENV`], else 0
/// (meaning one per core).
pub fn resolve_threads(explicit: Option<usize>) -> Result<usize> {
    if let Some(t) = explicit {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ErwsError::domain(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

/// Run `f` on a dedicated pool with `threads` workers (0 = one per core).
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ErwsError::domain(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Simulate the ensemble and summarize `observables` at horizon n.
pub fn run_ensemble(spec: &EnsembleSpec, observables: &[Observable]) -> Result<EnsembleStats> {
    if spec.replicates < 2 {
        return Err(ErwsError::domain(format!(
            "an ensemble needs at least 2 replicates, got {}",
            spec.replicates
        )));
    }
    let c = spec.params.derived()?;
    let mut horizons = vec![spec.n];
    if let Some(m) = spec.secondary_n {
        if m <= spec.n {
            return Err(ErwsError::domain(format!(
                "secondary horizon {m} must exceed n = {}",
                spec.n
            )));
        }
        horizons.push(m);
    }
    let threads = resolve_threads(spec.threads)?;
    let r = spec.replicates;
    let chunks: Vec<(u64, usize)> = (0..r)
        .step_by(CHUNK)
        .map(|start| (start as u64, CHUNK.min(r - start)))
        .collect();
    let blocks = with_pool(threads, || {
        chunks
            .par_iter()
            .map(|&(first, count)| simulate_batch(&c, spec.base_seed, first, count, &horizons))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut terminals = Vec::with_capacity(r);
    let mut secondary = spec.secondary_n.map(|_| Vec::with_capacity(r));
    for row in blocks.into_iter().flatten() {
        terminals.push(row[0]);
        if let Some(v) = secondary.as_mut() {
            v.push(row[1]);
        }
    }
    let mut moments = Vec::with_capacity(observables.len());
    for obs in observables {
        let xs: Vec<f64> = terminals.iter().map(|&(s, sg)| obs.eval(spec.n, s, sg)).collect();
        let sum = summarize(&xs)?;
        moments.push(SampleMoment {
            name: obs.name.clone(),
            mean: sum.mean,
            std_err: sum.se_mean,
        });
    }
    Ok(EnsembleStats {
        params: c.params,
        n: spec.n,
        replicates: r,
        base_seed: spec.base_seed,
        terminals,
        secondary_n: spec.secondary_n,
        secondary,
        moments,
    })
}
