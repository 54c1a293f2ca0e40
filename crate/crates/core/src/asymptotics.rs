//! Tail targets, power-law fits, Laplace-transform probes and the a-priori
//! bound check used to verify the asymptotics of `P(M ≥ x)`.

use rand::Rng;

use crate::branching::{OffspringLaw, Regime};
use crate::error::{Error, Result};
use crate::rng::{domain, StreamKey};
use crate::scalar::{gamma, Scalar};
use crate::stable::StableParams;
use crate::stats::{least_squares, quantile_sorted};
use crate::tabulated::{geometric_grid, TabulatedFn};

/// Minimum number of grid points for any log-log fit.
pub const MIN_FIT_POINTS: usize = 10;

/// Predicted tail `constant · x^{-exponent}` of `P(M ≥ x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailTarget<T> {
    pub exponent: T,
    pub constant: T,
    pub regime: Regime,
}

impl<T: Scalar> TailTarget<T> {
    pub fn eval(&self, x: T) -> T {
        self.constant * x.powf(-self.exponent)
    }
}

/// Subcritical: `κ/(1-E[p]) x^{-α}`. Critical: `sqrt(2κ/σ²) x^{-α/2}`.
pub fn theoretical_tail<T: Scalar>(params: &StableParams<T>, law: &OffspringLaw<T>) -> TailTarget<T> {
    let kappa = params.kappa();
    match law.regime() {
        Regime::Subcritical => TailTarget {
            exponent: params.alpha(),
            constant: kappa / (T::one() - law.mean()),
            regime: Regime::Subcritical,
        },
        Regime::Critical => TailTarget {
            exponent: params.alpha() / T::lit(2.0),
            constant: (T::lit(2.0) * kappa / law.sigma2()).sqrt(),
            regime: Regime::Critical,
        },
    }
}

/// Least-squares line through `(ln x, ln survival)` on a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult<T> {
    pub slope: T,
    pub intercept: T,
    pub window: (T, T),
    pub stderr_slope: T,
    pub points: usize,
    mean_log_x: T,
    mean_log_y: T,
}

impl<T: Scalar> FitResult<T> {
    /// `exp(intercept)`.
    pub fn implied_constant(&self) -> T {
        self.intercept.exp()
    }

    /// Least-squares constant when the exponent is pinned: the geometric mean
    /// of `survival(x) · x^{exponent}` over the window points.
    pub fn constant_at_exponent(&self, exponent: T) -> T {
        (self.mean_log_y + exponent * self.mean_log_x).exp()
    }
}

pub fn fit_tail<T: Scalar>(survival: &TabulatedFn<T>, window: (T, T)) -> Result<FitResult<T>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty fit window [{lo}, {hi}]")));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (x, y) in survival.window(lo, hi) {
        if !(y > T::zero()) || !(x > T::zero()) {
            return Err(Error::NonPositive {
                x: x.as_f64(),
                value: y.as_f64(),
            });
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    if lx.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: lx.len(),
        });
    }
    let line = least_squares(&lx, &ly);
    let n = T::from_count(lx.len());
    Ok(FitResult {
        slope: line.slope,
        intercept: line.intercept,
        window,
        stderr_slope: line.stderr_slope,
        points: line.points,
        mean_log_x: lx.iter().copied().sum::<T>() / n,
        mean_log_y: ly.iter().copied().sum::<T>() / n,
    })
}

/// Default window for solver tails on a grid ending at `x_max`.
pub fn solver_window<T: Scalar>(x_max: T) -> (T, T) {
    (x_max / T::lit(20.0), x_max / T::lit(2.0))
}

/// Quantile levels bounding the default Monte Carlo fit window.
pub const MC_WINDOW_QUANTILES: (f64, f64) = (0.99, 0.9999);

/// Empirical `[q(lo), q(hi)]` of a sample.
pub fn quantile_window<T: Scalar>(values: &[T], levels: (f64, f64)) -> Result<(T, T)> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    Ok((quantile_sorted(&sorted, levels.0), quantile_sorted(&sorted, levels.1)))
}

/// Tail fit of a Monte Carlo sample with bootstrap standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTailFit<T> {
    pub fit: FitResult<T>,
    pub survival: TabulatedFn<T>,
    /// Constant at the pinned exponent and its bootstrap standard error.
    pub constant: T,
    pub constant_stderr: T,
    pub slope_stderr_bootstrap: T,
}

/// Fits `P(X ≥ x)` on `points` geometric nodes spanning `window`, with the
/// constant evaluated at `exponent`, and bootstraps both estimates.
pub fn fit_sample_tail<T: Scalar>(
    values: &[T],
    window: (T, T),
    points: usize,
    exponent: T,
    resamples: usize,
    seed: u64,
) -> Result<SampleTailFit<T>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let (lo, hi) = window;
    if !(lo > T::zero() && hi > lo) {
        return Err(Error::InvalidArgument(format!("bad fit window [{lo}, {hi}]")));
    }
    let xs: Vec<T> = geometric_grid(lo, hi, points)?.into_iter().skip(1).collect();
    // bucket[j] = number of nodes at or below value j
    let buckets: Vec<usize> = values.iter().map(|&v| xs.partition_point(|&x| x <= v)).collect();
    let survival_from = |counts: &[usize]| -> TabulatedFn<T> {
        let n = T::from_count(values.len());
        let mut acc = 0usize;
        let mut ys = vec![T::zero(); xs.len()];
        for g in (0..xs.len()).rev() {
            acc += counts[g + 1];
            ys[g] = T::from_count(acc) / n;
        }
        TabulatedFn::new(xs.clone(), ys).expect("grid is valid")
    };
    let mut counts = vec![0usize; xs.len() + 1];
    for &b in &buckets {
        counts[b] += 1;
    }
    let survival = survival_from(&counts);
    let fit = fit_tail(&survival, window)?;
    let constant = fit.constant_at_exponent(exponent);

    let mut rng = StreamKey::root(seed).child(domain::BOOTSTRAP).rng();
    let mut slopes = Vec::with_capacity(resamples);
    let mut constants = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..values.len() {
            counts[buckets[rng.random_range(0..values.len())]] += 1;
        }
        if let Ok(f) = fit_tail(&survival_from(&counts), window) {
            slopes.push(f.slope);
            constants.push(f.constant_at_exponent(exponent));
        }
    }
    let sd = |v: &[T]| crate::stats::mean_and_stderr(v).1 * T::from_count(v.len()).sqrt();
    Ok(SampleTailFit {
        fit,
        survival,
        constant,
        constant_stderr: sd(&constants),
        slope_stderr_bootstrap: sd(&slopes),
    })
}

/// Comparison function for the Laplace probes:
/// `Γ(1-α) λ^{α-1}` (α < 1), `-ln λ` (α = 1), `Γ(2-α) λ^{α-2}` (α > 1).
///
/// For α ≤ 1 it matches `L[φ0](λ) / κ`; for α > 1 it matches `L[xφ0](λ) / κ`.
pub fn eta_alpha<T: Scalar>(params: &StableParams<T>, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let alpha = params.alpha();
    Ok(if alpha < T::one() {
        gamma(T::one() - alpha) * lambda.powf(alpha - T::one())
    } else if alpha == T::one() {
        -lambda.ln()
    } else {
        gamma(T::lit(2.0) - alpha) * lambda.powf(alpha - T::lit(2.0))
    })
}

/// Laplace moment probe of which `moment` is the power of `x` in the weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Moment {
    Zeroth,
    First,
}

impl Moment {
    fn power(self) -> i32 {
        match self {
            Moment::Zeroth => 0,
            Moment::First => 1,
        }
    }
}

/// Numerical Laplace transform with its tail-extension share.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceValue<T> {
    pub value: T,
    /// Contribution of the power-law extension beyond the grid.
    pub tail: T,
    /// Slope used for the extension (`None` when the function ends at 0).
    pub tail_slope: Option<T>,
    /// More than half of the value comes from the extension.
    pub flagged: bool,
}

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

fn gauss<T: Scalar>(a: T, b: T, f: impl Fn(T) -> T) -> T {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    GAUSS8
        .iter()
        .map(|&(node, weight)| T::lit(weight) * f(mid + half * T::lit(node)))
        .sum::<T>()
        * half
}

/// `∫_0^{x_max} e^{-λx} x^k f(x) dx` over the grid (λ = 0 allowed).
fn grid_integral<T: Scalar>(f: &TabulatedFn<T>, lambda: T, k: i32) -> T {
    let xs = f.xs();
    let ys = f.ys();
    let mut total = T::zero();
    for c in 0..xs.len().saturating_sub(1) {
        let (a, b) = (xs[c], xs[c + 1]);
        if b <= T::zero() {
            continue;
        }
        if (-lambda * a).exp() == T::zero() {
            break;
        }
        let (ya, yb) = (ys[c], ys[c + 1]);
        total = total
            + if a > T::zero() {
                let (ta, tb) = (a.ln(), b.ln());
                gauss(ta, tb, |t| {
                    let x = t.exp();
                    let y = ya + (yb - ya) * (t - ta) / (tb - ta);
                    (-lambda * x).exp() * x.powi(k + 1) * y
                })
            } else {
                let a = a.max(T::zero());
                gauss(a, b, |x| {
                    let y = ya + (yb - ya) * (x - a) / (b - a);
                    (-lambda * x).exp() * x.powi(k) * y
                })
            };
    }
    total
}

/// `∫_X^∞ e^{-λx} x^k f(X) (x/X)^slope dx` by quadrature in `ln x`.
fn power_tail_integral<T: Scalar>(x_end: T, f_end: T, slope: T, lambda: T, k: i32) -> T {
    let scale = lambda * x_end;
    let t_end = (T::lit(60.0) / scale).ln().max(T::zero()) + T::one();
    let panels = (t_end / T::lit(0.1)).ceil().to_usize().unwrap_or(1).max(1);
    let h = t_end / T::from_count(panels);
    let pre = f_end * x_end.powi(k + 1);
    (0..panels)
        .map(|i| {
            let a = h * T::from_count(i);
            gauss(a, a + h, |t| {
                (-scale * t.exp()).exp() * (t * (slope + T::from_count(k as usize) + T::one())).exp()
            })
        })
        .sum::<T>()
        * pre
}

/// Laplace transform `∫ e^{-λx} x^k f(x) dx` of a tabulated non-negative
/// function, extended beyond the grid by a power law fitted on
/// `[x_max/20, x_max/2]`.
pub fn laplace_numeric<T: Scalar>(f: &TabulatedFn<T>, lambda: T, moment: Moment) -> Result<LaplaceValue<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if f.ys().iter().any(|&y| y < T::zero()) {
        return Err(Error::InvalidArgument("Laplace transform needs a non-negative function".into()));
    }
    let k = moment.power();
    let body = grid_integral(f, lambda, k);
    let x_end = f.x_max();
    let f_end = *f.ys().last().unwrap();
    let (tail, tail_slope) = if f_end > T::zero() {
        let slope = fit_tail(f, solver_window(x_end)).map(|fit| fit.slope).unwrap_or_else(|_| T::zero());
        let slope = slope.min(T::zero());
        (power_tail_integral(x_end, f_end, slope, lambda, k), Some(slope))
    } else {
        (T::zero(), None)
    };
    let value = body + tail;
    Ok(LaplaceValue {
        value,
        tail,
        tail_slope,
        flagged: tail > value / T::lit(2.0),
    })
}

/// `∫_0^{x_max} f(x) dx` over the grid without extension.
pub fn integral_on_grid<T: Scalar>(f: &TabulatedFn<T>) -> T {
    grid_integral(f, T::zero(), 0)
}

/// Kolmogorov survival ratio `P(Z(t) ≥ 1) · t σ² / 2` (→ 1 as t → ∞).
pub fn kolmogorov_ratio<T: Scalar>(law: &OffspringLaw<T>, t: T, estimate: T) -> Result<T> {
    if !law.is_critical() {
        return Err(Error::InvalidArgument(
            "the Kolmogorov ratio is only meaningful for critical laws".into(),
        ));
    }
    Ok(estimate * t * law.sigma2() / T::lit(2.0))
}

/// Largest log-log slope of `P(M ≥ x) x^{α/2}` tolerated as "bounded".
pub const APRIORI_SLOPE_TOL: f64 = 0.05;

/// Checks that `survival(x) · x^{α/2}` stays bounded on `[x_min, x_end]`, where
/// `x_end` is the last node with positive survival.
pub fn apriori_bound_check<T: Scalar>(
    survival: &TabulatedFn<T>,
    params: &StableParams<T>,
    x_min: T,
) -> Result<bool> {
    if !(params.alpha() > T::one()) {
        return Err(Error::InvalidArgument("the a-priori bound needs alpha > 1".into()));
    }
    let x_end = survival
        .xs()
        .iter()
        .zip(survival.ys())
        .filter(|(_, &y)| y > T::zero())
        .map(|(&x, _)| x)
        .fold(T::zero(), T::max);
    let half = params.alpha() / T::lit(2.0);
    let (lx, lg): (Vec<T>, Vec<T>) = survival
        .window(x_min, x_end)
        .filter(|&(x, _)| x > T::zero())
        .map(|(x, y)| (x.ln(), y.ln() + half * x.ln()))
        .unzip();
    if lx.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: lx.len(),
        });
    }
    if lg.iter().any(|g| !g.is_finite()) {
        return Ok(false);
    }
    Ok(least_squares(&lx, &lg).slope <= T::lit(APRIORI_SLOPE_TOL))
}

/// One probe of `L[φ0](λ) / η_α(λ)` (or of `L[xφ0]` when α > 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauberianProbe<T> {
    pub lambda: T,
    pub laplace: LaplaceValue<T>,
    pub eta: T,
    pub ratio: T,
}

/// Tauberian ratios at each λ, to be compared with `κ`.
pub fn tauberian_probes<T: Scalar>(
    phi0: &TabulatedFn<T>,
    params: &StableParams<T>,
    lambdas: &[T],
) -> Result<Vec<TauberianProbe<T>>> {
    let moment = if params.alpha() > T::one() {
        Moment::First
    } else {
        Moment::Zeroth
    };
    lambdas
        .iter()
        .map(|&lambda| {
            let laplace = laplace_numeric(phi0, lambda, moment)?;
            let eta = eta_alpha(params, lambda)?;
            Ok(TauberianProbe {
                lambda,
                laplace,
                eta,
                ratio: laplace.value / eta,
            })
        })
        .collect()
}

/// Largest relative change of the ratio per decade of λ, over consecutive
/// probes.
pub fn variation_per_decade<T: Scalar>(probes: &[TauberianProbe<T>]) -> T {
    probes
        .windows(2)
        .map(|w| {
            let decades = (w[1].lambda / w[0].lambda).log10().abs();
            let change = ((w[1].ratio - w[0].ratio) / w[0].ratio).abs();
            if decades > T::zero() {
                change / decades
            } else {
                T::zero()
            }
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> StableParams<f64> {
        StableParams::new(a, b).unwrap()
    }

    #[test]
    fn targets_per_regime() {
        let p = params(1.5, 0.0);
        let crit = theoretical_tail(&p, &OffspringLaw::new(&[0.5, 0.0, 0.5]).unwrap());
        assert_eq!(crit.regime, Regime::Critical);
        assert!((crit.exponent - 0.75).abs() < 1e-15);
        assert!((crit.constant - (2.0 * p.kappa()).sqrt()).abs() < 1e-15);
        assert!((crit.constant - 0.631_618_777_746_064_7).abs() < 1e-12);
        let sub = theoretical_tail(&p, &OffspringLaw::new(&[0.6, 0.0, 0.4]).unwrap());
        assert_eq!(sub.exponent, 1.5);
        assert!((sub.constant - p.kappa() / 0.2).abs() < 1e-12);
    }

    #[test]
    fn lalley_shao_normalization_cross_check() {
        // With κ_{α,0} = 1/α and σ² = 1 the critical constant is sqrt(2/α).
        for alpha in [0.5f64, 1.2, 1.7] {
            let law = OffspringLaw::new(&[0.5, 0.0, 0.5]).unwrap();
            let constant = (2.0 * (1.0 / alpha) / law.sigma2()).sqrt();
            assert!((constant - (2.0 / alpha).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn targets_scale_with_kappa() {
        // doubling κ doubles the subcritical constant and multiplies the
        // critical one by √2
        let p = params(1.5, 0.0);
        let law = OffspringLaw::new(&[0.5, 0.0, 0.5]).unwrap();
        let c = theoretical_tail(&p, &law).constant;
        let doubled = (2.0 * (2.0 * p.kappa()) / law.sigma2()).sqrt();
        assert!((doubled / c - 2f64.sqrt()).abs() < 1e-14);
        let sub = OffspringLaw::new(&[0.6, 0.0, 0.4]).unwrap();
        let c = theoretical_tail(&p, &sub).constant;
        assert!(((2.0 * p.kappa() / 0.2) / c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law_fit() {
        let xs = geometric_grid(0.1, 1000.0, 100).unwrap();
        let f = TabulatedFn::from_fn(xs, |x: f64| if x > 0.0 { 2.0 * x.powf(-0.75) } else { 1.0 }).unwrap();
        let fit = fit_tail(&f, (1.0, 500.0)).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-12);
        assert!((fit.implied_constant() - 2.0).abs() < 1e-12);
        assert!((fit.constant_at_exponent(0.75) - 2.0).abs() < 1e-12);
        assert!(fit.stderr_slope < 1e-10);
    }

    #[test]
    fn fit_errors() {
        let xs = geometric_grid(0.1, 10.0, 20).unwrap();
        let f = TabulatedFn::from_fn(xs.clone(), |x: f64| 1.0 / (1.0 + x)).unwrap();
        assert!(matches!(fit_tail(&f, (5.0, 6.0)), Err(Error::TooFewPoints { .. })));
        let g = TabulatedFn::from_fn(xs, |x: f64| if x > 5.0 { 0.0 } else { 1.0 }).unwrap();
        assert!(matches!(fit_tail(&g, (0.1, 10.0)), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn eta_values() {
        assert!((eta_alpha(&params(1.0, 0.0), 0.01).unwrap() - 4.605_170_185_988_091).abs() < 1e-12);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((eta_alpha(&params(0.5, 0.0), 1.0).unwrap() - sqrt_pi).abs() < 1e-14);
        assert!((eta_alpha(&params(1.5, 0.0), 1.0).unwrap() - sqrt_pi).abs() < 1e-14);
        assert!(eta_alpha(&params(0.5, 0.0), 0.0).is_err());
    }

    #[test]
    fn laplace_of_constant_and_exponential() {
        let xs = geometric_grid(1e-3f64, 60.0, 2000).unwrap();
        let one = TabulatedFn::from_fn(xs.clone(), |_| 1.0).unwrap();
        let v = laplace_numeric(&one, 1.0, Moment::Zeroth).unwrap();
        assert!((v.value - 1.0).abs() < 1e-3, "{v:?}");
        assert!(!v.flagged);
        let e = TabulatedFn::from_fn(xs, |x: f64| (-x).exp()).unwrap();
        let v = laplace_numeric(&e, 1.0, Moment::Zeroth).unwrap();
        assert!((v.value - 0.5).abs() < 1e-4, "{v:?}");
    }

    #[test]
    fn laplace_power_law_against_closed_form() {
        // ∫ e^{-λx} x^{-1/2} dx = Γ(1/2) λ^{-1/2}, most of it beyond the grid
        let xs = geometric_grid(1e-4, 1e4, 800).unwrap();
        let f = TabulatedFn::from_fn(xs, |x: f64| if x > 0.0 { x.powf(-0.5) } else { 1e2 }).unwrap();
        let lambda = 1e-5;
        let v = laplace_numeric(&f, lambda, Moment::Zeroth).unwrap();
        let exact = std::f64::consts::PI.sqrt() / lambda.sqrt();
        assert!((v.value / exact - 1.0).abs() < 2e-3, "{} vs {exact}", v.value);
        assert!(v.flagged);
        let w = laplace_numeric(&f, 1e-2, Moment::First).unwrap();
        // ∫ e^{-λx} x^{1/2} dx = Γ(3/2) λ^{-3/2}
        let exact = 0.5 * std::f64::consts::PI.sqrt() * 1e-2f64.powf(-1.5);
        assert!((w.value / exact - 1.0).abs() < 2e-3);
    }

    #[test]
    fn kolmogorov_ratio_rules() {
        let crit = OffspringLaw::new(&[0.5, 0.0, 0.5]).unwrap();
        let t = 100.0f64;
        let exact_asymptote = 2.0 / (crit.sigma2() * t);
        assert!((kolmogorov_ratio(&crit, t, exact_asymptote).unwrap() - 1.0).abs() < 1e-15);
        let sub = OffspringLaw::new(&[0.6, 0.0, 0.4]).unwrap();
        assert!(kolmogorov_ratio(&sub, t, 0.01).is_err());
    }

    #[test]
    fn apriori_bound_on_synthetic_tails() {
        let p = params(1.5, 0.0);
        let xs = geometric_grid(0.1, 1000.0, 200).unwrap();
        let good = TabulatedFn::from_fn(xs.clone(), |x: f64| (0.6 * x.powf(-0.75)).min(1.0)).unwrap();
        assert!(apriori_bound_check(&good, &p, 10.0).unwrap());
        let bad = TabulatedFn::from_fn(xs.clone(), |x: f64| (0.6 * x.powf(-0.375)).min(1.0)).unwrap();
        assert!(!apriori_bound_check(&bad, &p, 10.0).unwrap());
        assert!(apriori_bound_check(&good, &p, 999.0).is_err());
        assert!(apriori_bound_check(&good, &params(0.5, 0.0), 10.0).is_err());
    }

    #[test]
    fn sample_tail_fit_on_exact_pareto_quantiles() {
        // deterministic Pareto(0.75) "sample": x_i = (i/n)^{-1/0.75}
        let n = 100_000;
        let values: Vec<f64> = (1..=n).map(|i| (i as f64 / n as f64).powf(-1.0 / 0.75)).collect();
        let window = quantile_window(&values, MC_WINDOW_QUANTILES).unwrap();
        let fit = fit_sample_tail(&values, window, 60, 0.75, 50, 1).unwrap();
        assert!((fit.fit.slope + 0.75).abs() < 0.02, "{}", fit.fit.slope);
        assert!((fit.constant - 1.0).abs() < 0.05, "{}", fit.constant);
        assert!(fit.constant_stderr > 0.0);
    }
}
