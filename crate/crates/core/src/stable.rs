//! Strictly α-stable laws with positive jumps.
//!
//! The characteristic exponent is
//! `ln E[exp(iλL_t)] = -t c |λ|^α (1 - i β' tan(πα/2) sgn λ)` for α ≠ 1 and
//! `-t|λ|` for α = 1, with `c = cos(πβ/2 · min(α, 2-α))`. The skew `β` is the
//! Zolotarev (form B) skew and `β' = tan(πβK(α)/2) / tan(πα/2)` with
//! `K(α) = α - 1 + sgn(1 - α)`; `β' = β` whenever β ∈ {0, 1}. With this
//! convention the tail constant has the closed form returned by
//! [`kappa_constant`].

use rand::Rng;
use rand_distr::{Exp1, StandardUniform};

use crate::error::{Error, Result};
use crate::scalar::{gamma, Scalar};

/// Admissible (α, β) pair with its derived constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableParams<T> {
    alpha: T,
    beta: T,
    c: T,
    kappa: T,
}

impl<T: Scalar> StableParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        validate_params(alpha, beta)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Normalization `c_{α,β}` of the characteristic exponent.
    pub fn c(&self) -> T {
        self.c
    }

    /// Tail constant: `P(L_1 ≥ x) ~ kappa · x^{-α}`.
    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn is_cauchy(&self) -> bool {
        self.alpha == T::one()
    }

    /// `β = 1` with `α < 1`: paths are non-decreasing.
    pub fn is_subordinator(&self) -> bool {
        self.alpha < T::one() && self.beta == T::one()
    }

    /// Skew in the `1 - iβ tan(πα/2)` form of the exponent.
    pub fn effective_skew(&self) -> T {
        if self.is_cauchy() {
            return T::zero();
        }
        let half_pi_alpha = T::FRAC_PI_2() * self.alpha;
        (self.skew_angle().tan() / half_pi_alpha.tan()).min(T::one())
    }

    /// `πβK(α)/2`, the rotation angle of the form-B exponent.
    fn skew_angle(&self) -> T {
        let k = if self.alpha < T::one() {
            self.alpha
        } else {
            self.alpha - T::lit(2.0)
        };
        T::FRAC_PI_2() * self.beta * k
    }

    /// Draws `L_dt` for a time increment `dt > 0`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: T, rng: &mut R) -> T {
        StableSampler::new(self).draw_scaled(dt, rng)
    }

    /// Asymptotic tail `kappa · x^{-α}`.
    pub fn tail_asymptote(&self, x: T) -> T {
        self.kappa * x.powf(-self.alpha)
    }
}

/// Validates (α, β) and derives `c` and `kappa`.
pub fn validate_params<T: Scalar>(alpha: T, beta: T) -> Result<StableParams<T>> {
    let err = |reason| Error::InvalidStableParams {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        reason,
    };
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(err("parameters must be finite"));
    }
    if alpha <= T::zero() || alpha >= T::lit(2.0) {
        return Err(err("alpha must lie in (0, 2)"));
    }
    if alpha == T::one() {
        if beta != T::zero() {
            return Err(err("alpha = 1 requires beta = 0"));
        }
    } else if beta <= -T::one() || beta > T::one() {
        return Err(err("beta must lie in (-1, 1]"));
    }
    let c = if alpha == T::one() {
        T::one()
    } else {
        (T::FRAC_PI_2() * beta * alpha.min(T::lit(2.0) - alpha)).cos()
    };
    let mut params = StableParams {
        alpha,
        beta,
        c,
        kappa: T::zero(),
    };
    params.kappa = kappa_constant(&params);
    Ok(params)
}

/// Closed-form tail constant of `L_1`.
pub fn kappa_constant<T: Scalar>(params: &StableParams<T>) -> T {
    let alpha = params.alpha;
    let beta = params.beta;
    let pi = T::PI();
    if alpha == T::one() {
        T::FRAC_1_PI()
    } else if alpha < T::one() {
        gamma(alpha) * (pi * alpha * (T::one() + beta) / T::lit(2.0)).sin() / pi
    } else {
        let arg = pi / T::lit(2.0) * (alpha + alpha * beta - T::lit(2.0) * beta);
        gamma(alpha) * arg.sin() / pi
    }
}

/// Precomputed Chambers–Mallows–Stuck transform for one parameter set.
///
/// For α ≠ 1, with `V ~ U(-π/2, π/2)`, `W ~ Exp(1)` and `θ = πβK(α)/2`,
/// `sin(αV + θ) / cos(V)^{1/α} · (cos((1-α)V - θ) / W)^{(1-α)/α}` has the
/// exponent above at `t = 1`; the `cos(θ)^{-1/α}` factor of the textbook
/// transform cancels against the `c^{1/α}` rescaling.
#[derive(Clone, Copy, Debug)]
pub struct StableSampler<T> {
    alpha: T,
    inv_alpha: T,
    tilt: T,
    theta: T,
    cauchy: bool,
}

impl<T: Scalar> StableSampler<T> {
    pub fn new(params: &StableParams<T>) -> Self {
        let alpha = params.alpha;
        StableSampler {
            alpha,
            inv_alpha: alpha.recip(),
            tilt: (T::one() - alpha) / alpha,
            theta: if params.is_cauchy() {
                T::zero()
            } else {
                params.skew_angle()
            },
            cauchy: params.is_cauchy(),
        }
    }

    /// Time-scaling factor `dt^{1/α}`.
    #[inline]
    pub fn scale(&self, dt: T) -> T {
        dt.powf(self.inv_alpha)
    }

    /// Draws `L_1`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let v = loop {
            let u: f64 = rng.sample(StandardUniform);
            if u > 0.0 {
                break T::lit(std::f64::consts::PI * (u - 0.5));
            }
        };
        if self.cauchy {
            return v.tan();
        }
        let w = T::lit(rng.sample::<f64, _>(Exp1));
        let head = (self.alpha * v + self.theta).sin();
        let log_mag = -v.cos().ln() * self.inv_alpha
            + self.tilt * (((T::one() - self.alpha) * v - self.theta).cos().ln() - w.ln());
        head * log_mag.exp()
    }

    #[inline]
    pub fn draw_scaled<R: Rng + ?Sized>(&self, dt: T, rng: &mut R) -> T {
        self.scale(dt) * self.draw(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::stats::{least_squares, quantile_sorted};

    // 40-digit mpmath evaluations of the closed forms.
    const KAPPA_ORACLE: &[(f64, f64, f64)] = &[
        (0.5, 1.0, 0.564_189_583_547_756_286_95),
        (1.5, 0.0, 0.199_471_140_200_716_338_97),
        (1.0, 0.0, 0.318_309_886_183_790_671_54),
        (0.5, 0.0, 0.398_942_280_401_432_677_94),
        (0.5, 0.5, 0.521_243_208_695_838_640_05),
        (1.5, 0.5, 0.260_621_604_347_919_320_02),
        (1.2, -0.5, 0.171_787_403_844_933_502_92),
        (0.3, 0.9, 0.743_161_721_165_200_782_78),
    ];

    #[test]
    fn kappa_matches_high_precision_oracle() {
        for &(a, b, expected) in KAPPA_ORACLE {
            let p = StableParams::new(a, b).unwrap();
            let rel = (p.kappa() - expected).abs() / expected;
            assert!(rel < 1e-12, "kappa({a},{b}) = {} vs {expected}", p.kappa());
        }
    }

    #[test]
    fn normalization_constant() {
        assert_eq!(StableParams::new(1.5, 0.0).unwrap().c(), 1.0);
        let p = StableParams::new(0.5f64, 1.0).unwrap();
        assert!((p.c() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(StableParams::new(1.0, 0.0).unwrap().c(), 1.0);
    }

    #[test]
    fn rejects_inadmissible_pairs() {
        for (a, b) in [
            (1.0, 0.5),
            (0.0, 0.0),
            (2.0, 0.0),
            (2.5, 0.0),
            (-0.5, 0.0),
            (1.5, -1.0),
            (0.5, 1.2),
            (f64::NAN, 0.0),
        ] {
            assert!(StableParams::new(a, b).is_err(), "({a},{b}) accepted");
        }
        assert!(matches!(
            StableParams::new(1.0, 0.5),
            Err(Error::InvalidStableParams { .. })
        ));
    }

    #[test]
    fn tail_asymptote_at_one_is_kappa() {
        let p = StableParams::new(1.0, 0.0).unwrap();
        assert!((p.tail_asymptote(1.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
        let p = StableParams::new(0.7, 0.3).unwrap();
        assert_eq!(p.tail_asymptote(1.0), p.kappa());
    }

    #[test]
    fn effective_skew_agrees_at_the_endpoints() {
        assert_eq!(StableParams::new(1.5, 0.0).unwrap().effective_skew(), 0.0);
        let p = StableParams::new(0.5f64, 1.0).unwrap();
        assert!((p.effective_skew() - 1.0).abs() < 1e-12);
        let p = StableParams::new(1.5f64, 1.0).unwrap();
        assert!((p.effective_skew() - 1.0).abs() < 1e-12);
        let p = StableParams::new(1.5, 0.5).unwrap();
        assert!(p.effective_skew() > 0.0 && p.effective_skew() < 1.0);
    }

    #[test]
    fn cauchy_median_is_zero() {
        let p = StableParams::new(1.0, 0.0).unwrap();
        let mut rng = StreamKey::root(11).rng();
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| p.sample_increment(1.0, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let med = quantile_sorted(&xs, 0.5);
        let iqr = quantile_sorted(&xs, 0.75) - quantile_sorted(&xs, 0.25);
        assert!(med.abs() < 3.0 * iqr / (n as f64).sqrt(), "median {med}");
    }

    #[test]
    fn subordinator_draws_are_non_negative() {
        let p = StableParams::new(0.5f64, 1.0).unwrap();
        let mut rng = StreamKey::root(3).rng();
        assert!((0..200_000).all(|_| p.sample_increment(0.37, &mut rng) >= 0.0));
    }

    #[test]
    fn tail_constant_at_upper_quantile() {
        let p = StableParams::new(1.5, 0.0).unwrap();
        let mut rng = StreamKey::root(5).rng();
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| p.sample_increment(1.0, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let x = quantile_sorted(&xs, 0.999);
        let emp = xs.iter().filter(|&&v| v >= x).count() as f64 / xs.len() as f64;
        let ratio = emp * x.powf(1.5) / p.kappa();
        assert!((0.8..=1.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn tail_exponent_of_absolute_draws() {
        for alpha in [0.5f64, 1.5] {
            let p = StableParams::new(alpha, 0.0).unwrap();
            let mut rng = StreamKey::root(17).rng();
            let n = 1_000_000;
            let mut xs: Vec<f64> = (0..n)
                .map(|_| p.sample_increment(1.0, &mut rng).abs())
                .collect();
            xs.sort_by(|a, b| b.total_cmp(a));
            let top = n / 1000;
            let (lx, ly): (Vec<f64>, Vec<f64>) = (0..top)
                .map(|i| (xs[i].ln(), ((i + 1) as f64 / n as f64).ln()))
                .unzip();
            let fit = least_squares(&lx, &ly);
            assert!((-fit.slope - alpha).abs() < 0.1, "alpha {alpha}: slope {}", fit.slope);
        }
    }

    #[test]
    fn generic_over_f32() {
        let p = StableParams::<f32>::new(0.5, 1.0).unwrap();
        assert!((p.kappa() - 0.564_189_6).abs() < 1e-6);
        let mut rng = StreamKey::root(1).rng();
        let x = p.sample_increment(1.0f32, &mut rng);
        assert!(x.is_finite() && x >= 0.0);
    }
}
