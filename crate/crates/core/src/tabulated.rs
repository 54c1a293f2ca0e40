//! Monotone functions tabulated on a fixed grid.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A function sampled at strictly increasing abscissae.
///
/// Between nodes the function is interpolated linearly in `ln x` (linearly in
/// `x` on a cell starting at 0); outside the grid it is held flat.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedFn<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

/// Position of an abscissa relative to the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location<T> {
    Below,
    /// Inside cell `[xs[cell], xs[cell + 1]]`; `weight` multiplies the left node.
    Inside { cell: usize, weight: T },
    Above,
}

impl<T: Scalar> TabulatedFn<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        validate_grid(&xs)?;
        if xs.len() != ys.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite tabulated value".into()));
        }
        Ok(TabulatedFn { xs, ys })
    }

    pub fn from_fn(xs: Vec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_max(&self) -> T {
        *self.xs.last().expect("grid is non-empty")
    }

    pub fn map(&self, f: impl Fn(T, T) -> T) -> Self {
        TabulatedFn {
            xs: self.xs.clone(),
            ys: self.xs.iter().zip(&self.ys).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        self.is_non_increasing_within(T::zero())
    }

    /// Non-increasing up to upward steps of at most `tol`.
    pub fn is_non_increasing_within(&self, tol: T) -> bool {
        self.ys.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        assert_eq!(self.xs, other.xs, "functions live on different grids");
        self.ys
            .iter()
            .zip(&other.ys)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn locate(&self, x: T) -> Location<T> {
        locate(&self.xs, x)
    }

    /// Interpolated value at `x`.
    pub fn eval(&self, x: T) -> T {
        match self.locate(x) {
            Location::Below => self.ys[0],
            Location::Above => *self.ys.last().unwrap(),
            Location::Inside { cell, weight } => {
                weight * self.ys[cell] + (T::one() - weight) * self.ys[cell + 1]
            }
        }
    }

    /// Restriction to the nodes inside `[lo, hi]`.
    pub fn window(&self, lo: T, hi: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs
            .iter()
            .zip(&self.ys)
            .filter(move |(&x, _)| x >= lo && x <= hi)
            .map(|(&x, &y)| (x, y))
    }
}

pub(crate) fn validate_grid<T: Scalar>(xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("non-finite abscissa".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("abscissae must be strictly increasing".into()));
    }
    Ok(())
}

/// Locates `x` on a strictly increasing grid.
pub fn locate<T: Scalar>(xs: &[T], x: T) -> Location<T> {
    let last = xs.len() - 1;
    if x < xs[0] {
        return Location::Below;
    }
    if x > xs[last] {
        return Location::Above;
    }
    if last == 0 {
        return Location::Inside {
            cell: 0,
            weight: T::one(),
        };
    }
    let cell = xs.partition_point(|&g| g <= x).saturating_sub(1).min(last - 1);
    Location::Inside {
        cell,
        weight: left_weight(xs[cell], xs[cell + 1], x),
    }
}

/// Weight of the left node `a` when interpolating at `x ∈ [a, b]`.
#[inline]
pub(crate) fn left_weight<T: Scalar>(a: T, b: T, x: T) -> T {
    let t = if a > T::zero() {
        (x / a).ln() / (b / a).ln()
    } else {
        (x - a) / (b - a)
    };
    T::one() - t.max(T::zero()).min(T::one())
}

/// `0` followed by `points` geometrically spaced nodes from `x_first` to `x_max`.
pub fn geometric_grid<T: Scalar>(x_first: T, x_max: T, points: usize) -> Result<Vec<T>> {
    if !(x_first > T::zero()) || !(x_max > x_first) || points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need 0 < x_first < x_max and at least 2 points (x_first={x_first}, x_max={x_max}, points={points})"
        )));
    }
    let ratio = (x_max / x_first).ln() / T::from_count(points - 1);
    let mut xs = Vec::with_capacity(points + 1);
    xs.push(T::zero());
    xs.extend((0..points - 1).map(|k| x_first * (ratio * T::from_count(k)).exp()));
    xs.push(x_max);
    validate_grid(&xs)?;
    Ok(xs)
}
