//! Position and running supremum of a stable path at an independent
//! exponential time.
//!
//! The supremum is approximated by the maximum over an equally spaced grid of
//! `[0, e]`, which under-estimates it; [`sample_refined_pair`] couples two
//! resolutions so the bias can be measured.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{domain, StreamKey};
use crate::scalar::Scalar;
use crate::stable::{StableParams, StableSampler};
use crate::tabulated::{validate_grid, TabulatedFn};

/// Default number of grid steps over `[0, e]`.
pub const DEFAULT_N_STEPS: usize = 2048;

/// One draw of `(e, L_e, S_e)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpPairSample<T> {
    pub e: T,
    pub l: T,
    pub s: T,
}

impl<T: Scalar> ExpPairSample<T> {
    /// `L_e^+`.
    pub fn l_plus(&self) -> T {
        self.l.max(T::zero())
    }
}

/// Terminal value and grid maximum (including time 0) of a path of the given
/// duration sampled with `n_steps` equal increments.
#[inline]
pub(crate) fn grid_path<T: Scalar, R: Rng + ?Sized>(
    sampler: &StableSampler<T>,
    duration: T,
    n_steps: usize,
    rng: &mut R,
) -> (T, T) {
    let scale = sampler.scale(duration / T::from_count(n_steps));
    let mut pos = T::zero();
    let mut max = T::zero();
    for _ in 0..n_steps {
        pos = pos + scale * sampler.draw(rng);
        max = max.max(pos);
    }
    (pos, max)
}

/// Draws one `(e, L_e, S_e)` triple with an `n_steps` grid.
pub fn sample_pair<T: Scalar, R: Rng + ?Sized>(
    params: &StableParams<T>,
    n_steps: usize,
    rng: &mut R,
) -> ExpPairSample<T> {
    assert!(n_steps >= 1, "n_steps must be positive");
    let e = T::lit(rng.sample::<f64, _>(Exp1));
    let (l, s) = grid_path(&StableSampler::new(params), e, n_steps, rng);
    ExpPairSample { e, l, s }
}

/// Draws the same path on `n_steps` and `2·n_steps` grids: the coarse grid
/// keeps every second partial sum of the fine one.
pub fn sample_refined_pair<T: Scalar, R: Rng + ?Sized>(
    params: &StableParams<T>,
    n_steps: usize,
    rng: &mut R,
) -> (ExpPairSample<T>, ExpPairSample<T>) {
    assert!(n_steps >= 1, "n_steps must be positive");
    let sampler = StableSampler::new(params);
    let e = T::lit(rng.sample::<f64, _>(Exp1));
    let scale = sampler.scale(e / T::from_count(2 * n_steps));
    let mut pos = T::zero();
    let (mut coarse, mut fine) = (T::zero(), T::zero());
    for k in 0..2 * n_steps {
        pos = pos + scale * sampler.draw(rng);
        fine = fine.max(pos);
        if k % 2 == 1 {
            coarse = coarse.max(pos);
        }
    }
    (
        ExpPairSample { e, l: pos, s: coarse },
        ExpPairSample { e, l: pos, s: fine },
    )
}

/// Empirical law of `(e, L_e, S_e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPairCloud<T> {
    params: StableParams<T>,
    samples: Vec<ExpPairSample<T>>,
    n_steps: usize,
    seed: u64,
}

impl<T: Scalar> ExpPairCloud<T> {
    pub fn from_samples(
        params: StableParams<T>,
        samples: Vec<ExpPairSample<T>>,
        n_steps: usize,
        seed: u64,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be positive".into()));
        }
        if let Some(bad) = samples
            .iter()
            .find(|p| !(p.e > T::zero()) || p.s < p.l_plus() || !p.s.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "sample violates s >= max(l, 0), e > 0: {bad:?}"
            )));
        }
        Ok(ExpPairCloud {
            params,
            samples,
            n_steps,
            seed,
        })
    }

    pub fn params(&self) -> &StableParams<T> {
        &self.params
    }

    pub fn samples(&self) -> &[ExpPairSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn s_values(&self) -> Vec<T> {
        self.samples.iter().map(|p| p.s).collect()
    }

    pub fn l_values(&self) -> Vec<T> {
        self.samples.iter().map(|p| p.l).collect()
    }
}

/// `count` independent draws; sample `i` uses the substream `(seed, i)`, so the
/// cloud does not depend on the number of worker threads.
pub fn sample_cloud<T: Scalar>(
    params: &StableParams<T>,
    n_steps: usize,
    count: usize,
    seed: u64,
) -> Result<ExpPairCloud<T>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let base = StreamKey::root(seed).child(domain::CLOUD);
    let samples = (0..count as u64)
        .into_par_iter()
        .map(|i| sample_pair(params, n_steps, &mut base.child(i).rng()))
        .collect();
    ExpPairCloud::from_samples(*params, samples, n_steps, seed)
}

/// `x ↦ #{v ≥ x} / n` on the grid.
pub fn empirical_survival<T: Scalar>(values: &[T], grid: &[T]) -> Result<TabulatedFn<T>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    validate_grid(grid)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let n = T::from_count(sorted.len());
    let ys = grid
        .iter()
        .map(|&x| T::from_count(sorted.len() - sorted.partition_point(|&v| v < x)) / n)
        .collect();
    TabulatedFn::new(grid.to_vec(), ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> StableParams<f64> {
        StableParams::new(a, b).unwrap()
    }

    #[test]
    fn single_step_grid_is_positive_part_of_terminal_value() {
        let p = params(1.5, 0.0);
        let mut rng = StreamKey::root(1).rng();
        for _ in 0..1000 {
            let d = sample_pair(&p, 1, &mut rng);
            assert_eq!(d.s, d.l.max(0.0));
        }
    }

    #[test]
    fn subordinator_supremum_is_terminal_value() {
        let p = params(0.5, 1.0);
        let mut rng = StreamKey::root(2).rng();
        for _ in 0..1000 {
            let d = sample_pair(&p, 64, &mut rng);
            assert_eq!(d.s, d.l);
        }
    }

    #[test]
    fn supremum_dominates_positive_part() {
        let p = params(1.2, -0.3);
        let mut rng = StreamKey::root(3).rng();
        for _ in 0..2000 {
            let d = sample_pair(&p, 32, &mut rng);
            assert!(d.e > 0.0 && d.s >= d.l_plus());
        }
    }

    #[test]
    fn refinement_never_lowers_the_supremum() {
        let p = params(1.5, 0.0);
        let mut rng = StreamKey::root(4).rng();
        for _ in 0..2000 {
            let (coarse, fine) = sample_refined_pair(&p, 16, &mut rng);
            assert!(fine.s >= coarse.s);
            assert_eq!(coarse.l, fine.l);
        }
    }

    #[test]
    fn cloud_is_deterministic() {
        let p = params(1.5, 0.0);
        let a = sample_cloud(&p, 8, 500, 42).unwrap();
        let b = sample_cloud(&p, 8, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_cloud(&p, 8, 500, 43).unwrap();
        assert_ne!(a, c);
        let single = sample_cloud(&p, 8, 1, 42).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.samples()[0], a.samples()[0]);
    }

    #[test]
    fn cloud_does_not_depend_on_thread_count() {
        let p = params(0.8, 0.2);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = pool.install(|| sample_cloud(&p, 4, 300, 9).unwrap());
        let b = sample_cloud(&p, 4, 300, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_survival_counts() {
        let f = empirical_survival(&[1.0, 2.0, 3.0], &[0.0, 2.5]).unwrap();
        assert_eq!(f.ys(), &[1.0, 1.0 / 3.0]);
        let f = empirical_survival(&[1.0, 2.0, 3.0], &[-5.0, 2.0, 3.0, 3.5]).unwrap();
        assert_eq!(f.ys(), &[1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!(empirical_survival::<f64>(&[], &[0.0]).is_err());
        assert!(empirical_survival(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn survival_of_cloud_suprema_at_zero_is_one() {
        let cloud = sample_cloud(&params(1.5, 0.0), 4, 1000, 5).unwrap();
        let f = empirical_survival(&cloud.s_values(), &[0.0, 1.0]).unwrap();
        assert_eq!(f.ys()[0], 1.0);
    }

    #[test]
    fn rejects_bad_cloud_arguments() {
        let p = params(1.5, 0.0);
        assert!(sample_cloud(&p, 4, 0, 1).is_err());
        assert!(sample_cloud(&p, 0, 4, 1).is_err());
        let bad = ExpPairSample { e: 1.0, l: 2.0, s: 1.0 };
        assert!(ExpPairCloud::from_samples(p, vec![bad], 1, 0).is_err());
    }
}
