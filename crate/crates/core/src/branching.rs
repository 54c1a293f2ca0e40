//! Continuous-time branching with Exp(1) lifetimes and stable motion along
//! the edges of the genealogical tree.
//!
//! Every particle owns the substream keyed by its Ulam–Harris label. It draws,
//! in order, its lifetime, the uniform that selects its offspring count and
//! then the increments of its path. Movement-free functions consume the first
//! two draws the same way, so they see the same genealogy as
//! [`simulate_run`] for a given key.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{domain, StreamKey, StreamRng};
use crate::scalar::Scalar;
use crate::stable::{StableParams, StableSampler};
use crate::supremum::grid_path;

/// Offspring distribution `(p_0, ..., p_K)` of a critical or subcritical law.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringLaw<T> {
    probs: Vec<T>,
    cdf: Vec<T>,
    mean: T,
    sigma2: T,
    m3: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
}

const CRITICAL_TOL: f64 = 1e-12;

impl<T: Scalar> OffspringLaw<T> {
    pub fn new(probs: &[T]) -> Result<Self> {
        make_offspring_law(probs)
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// `p_n`, zero beyond the support.
    pub fn p(&self, n: usize) -> T {
        self.probs.get(n).copied().unwrap_or_else(T::zero)
    }

    /// Largest offspring count with positive mass.
    pub fn max_offspring(&self) -> usize {
        self.probs.len() - 1
    }

    /// `E[p]`.
    pub fn mean(&self) -> T {
        self.mean
    }

    /// `Σ n(n-1) p_n = E[p² - p]`.
    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    /// `E[p³]`.
    pub fn m3(&self) -> T {
        self.m3
    }

    pub fn regime(&self) -> Regime {
        if (self.mean - T::one()).abs() <= T::lit(CRITICAL_TOL) {
            Regime::Critical
        } else {
            Regime::Subcritical
        }
    }

    pub fn is_critical(&self) -> bool {
        self.regime() == Regime::Critical
    }

    /// Offspring count selected by a uniform `u ∈ [0, 1)` (inverse CDF).
    #[inline]
    pub fn count_for(&self, u: f64) -> usize {
        let u = T::lit(u);
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.probs.len() - 1)
    }
}

/// Validates offspring probabilities and derives their moments.
pub fn make_offspring_law<T: Scalar>(probs: &[T]) -> Result<OffspringLaw<T>> {
    let bad = |msg: String| Err(Error::InvalidOffspringLaw(msg));
    if probs.is_empty() {
        return bad("no probabilities given".into());
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < T::zero()) {
        return bad(format!("entry {p} is negative or not finite"));
    }
    let total: T = probs.iter().copied().sum();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    if (total - T::one()).abs() > tol {
        return bad(format!("probabilities sum to {total}, not 1"));
    }
    let support = probs.iter().rposition(|&p| p > T::zero()).expect("sum is 1");
    let probs = probs[..=support].to_vec();
    if probs.len() == 2 && probs[0] == T::zero() {
        return bad("p_1 = 1 is a trivial branching mechanism".into());
    }
    let moment = |f: fn(T) -> T| -> T {
        probs
            .iter()
            .enumerate()
            .map(|(n, &p)| f(T::from_count(n)) * p)
            .sum()
    };
    let mean = moment(|n| n);
    let sigma2 = moment(|n| n * (n - T::one()));
    let m3 = moment(|n| n * n * n);
    if mean > T::one() + T::lit(CRITICAL_TOL) {
        return bad(format!("mean {mean} > 1: supercritical laws are not supported"));
    }
    let mut acc = T::zero();
    let cdf = probs
        .iter()
        .map(|&p| {
            acc = acc + p;
            acc
        })
        .collect();
    Ok(OffspringLaw {
        probs,
        cdf,
        mean,
        sigma2,
        m3,
    })
}

/// Limits that turn runaway trees into truncated results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimCaps<T> {
    pub max_particles: u64,
    pub max_time: T,
}

impl<T: Scalar> SimCaps<T> {
    pub fn new(max_particles: u64, max_time: T) -> Result<Self> {
        if max_particles == 0 || !(max_time > T::zero()) {
            return Err(Error::InvalidArgument(
                "caps must be positive (max_particles >= 1, max_time > 0)".into(),
            ));
        }
        Ok(SimCaps {
            max_particles,
            max_time,
        })
    }
}

impl<T: Scalar> Default for SimCaps<T> {
    fn default() -> Self {
        SimCaps {
            max_particles: 1_000_000,
            max_time: T::lit(1e6),
        }
    }
}

/// Outcome of one branching tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunResult<T> {
    /// All-time maximum over every particle path.
    pub max: T,
    pub extinct: bool,
    /// Particles ever born, the root included.
    pub particles: u64,
    pub truncated: bool,
}

struct Particle<T> {
    key: StreamKey,
    position: T,
    birth: T,
}

#[inline]
fn lifetime_and_uniform<T: Scalar>(rng: &mut StreamRng) -> (T, f64) {
    let life = T::lit(rng.sample::<f64, _>(Exp1));
    let u: f64 = rng.random();
    (life, u)
}

/// Simulates one tree started from a single particle at the origin.
///
/// Each edge is a stable path over the particle's lifetime, discretized with
/// `n_steps` equal increments exactly as in [`crate::supremum::sample_pair`].
pub fn simulate_run<T: Scalar>(
    params: &StableParams<T>,
    law: &OffspringLaw<T>,
    caps: &SimCaps<T>,
    n_steps: usize,
    key: StreamKey,
) -> RunResult<T> {
    assert!(n_steps >= 1, "n_steps must be positive");
    let sampler = StableSampler::new(params);
    let mut stack = vec![Particle {
        key,
        position: T::zero(),
        birth: T::zero(),
    }];
    let mut born: u64 = 1;
    let mut max = T::zero();
    let truncated = |max, born| RunResult {
        max,
        extinct: false,
        particles: born,
        truncated: true,
    };
    while let Some(p) = stack.pop() {
        let mut rng = p.key.rng();
        let (life, u) = lifetime_and_uniform::<T>(&mut rng);
        let death = p.birth + life;
        let (end, sup) = grid_path(&sampler, life, n_steps, &mut rng);
        max = max.max(p.position + sup);
        if death > caps.max_time {
            return truncated(max, born);
        }
        let children = law.count_for(u) as u64;
        if born + children > caps.max_particles {
            return truncated(max, born);
        }
        born += children;
        for i in (0..children).rev() {
            stack.push(Particle {
                key: p.key.child(i),
                position: p.position + end,
                birth: death,
            });
        }
    }
    RunResult {
        max,
        extinct: true,
        particles: born,
        truncated: false,
    }
}

/// Substream of replicate `index` under a master seed.
pub fn replicate_key(seed: u64, index: u64) -> StreamKey {
    StreamKey::root(seed).child(domain::RUNS).child(index)
}

/// Independent replicates of [`simulate_run`], in replicate order.
pub fn simulate_batch<T: Scalar>(
    params: &StableParams<T>,
    law: &OffspringLaw<T>,
    caps: &SimCaps<T>,
    n_steps: usize,
    replications: usize,
    seed: u64,
) -> RunBatch<T> {
    let runs = (0..replications as u64)
        .into_par_iter()
        .map(|i| simulate_run(params, law, caps, n_steps, replicate_key(seed, i)))
        .collect();
    RunBatch { runs }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunBatch<T> {
    pub runs: Vec<RunResult<T>>,
}

impl<T: Scalar> RunBatch<T> {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn truncated_fraction(&self) -> f64 {
        self.runs.iter().filter(|r| r.truncated).count() as f64 / self.runs.len() as f64
    }

    pub fn extinct_fraction(&self) -> f64 {
        self.runs.iter().filter(|r| r.extinct).count() as f64 / self.runs.len() as f64
    }

    /// Maxima of the runs that were not truncated.
    pub fn complete_maxima(&self) -> Vec<T> {
        self.runs.iter().filter(|r| !r.truncated).map(|r| r.max).collect()
    }
}

/// Number of particles alive at time `t` (lifetimes and offspring only).
pub fn population_at<T: Scalar>(law: &OffspringLaw<T>, t: T, key: StreamKey) -> u64 {
    let mut stack = vec![(key, T::zero())];
    let mut alive = 0;
    while let Some((k, birth)) = stack.pop() {
        let (life, u) = lifetime_and_uniform::<T>(&mut k.rng());
        let death = birth + life;
        if death > t {
            alive += 1;
            continue;
        }
        for i in 0..law.count_for(u) as u64 {
            stack.push((k.child(i), death));
        }
    }
    alive
}

/// Whether at least one particle is alive at time `t`.
pub fn survives_until<T: Scalar>(law: &OffspringLaw<T>, t: T, key: StreamKey) -> bool {
    let mut stack = vec![(key, T::zero())];
    while let Some((k, birth)) = stack.pop() {
        let (life, u) = lifetime_and_uniform::<T>(&mut k.rng());
        let death = birth + life;
        if death > t {
            return true;
        }
        for i in 0..law.count_for(u) as u64 {
            stack.push((k.child(i), death));
        }
    }
    false
}

/// Monte Carlo proportion with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proportion {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
}

impl Proportion {
    fn from_hits(hits: usize, reps: usize) -> Self {
        let p = hits as f64 / reps as f64;
        Proportion {
            estimate: p,
            stderr: (p * (1.0 - p) / reps as f64).sqrt(),
            reps,
        }
    }
}

/// Estimates `P(Z(t) ≥ 1)` from `reps` movement-free trees.
pub fn survival_estimate<T: Scalar>(
    law: &OffspringLaw<T>,
    t: T,
    reps: usize,
    seed: u64,
) -> Proportion {
    assert!(reps > 0);
    let base = StreamKey::root(seed).child(domain::SURVIVAL);
    let hits = (0..reps as u64)
        .into_par_iter()
        .filter(|&i| survives_until(law, t, base.child(i)))
        .count();
    Proportion::from_hits(hits, reps)
}

/// Sample mean of `Z(t)` and its standard error.
pub fn mean_population<T: Scalar>(
    law: &OffspringLaw<T>,
    t: T,
    reps: usize,
    seed: u64,
) -> (f64, f64) {
    let base = StreamKey::root(seed).child(domain::POPULATION);
    let counts: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|i| population_at(law, t, base.child(i)) as f64)
        .collect();
    crate::stats::mean_and_stderr(&counts)
}
