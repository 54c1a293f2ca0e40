//! Monotone fixed-point solver for `u(x) = P(M ≥ x)`.
//!
//! Conditioning on the first branching event gives
//!
//! ```text
//! 1 - u(x) = p_0 P(S_e < x) + Σ_{n≥1} p_n E[1{S_e < x} (1 - u(x - L_e))^n]
//! ```
//!
//! with `(L_e, S_e)` replaced by an [`ExpPairCloud`]. The right-hand side is
//! increasing in `u`, so iterating from `u ≡ 1` decreases monotonically to the
//! largest fixed point and iterating from `P(S_e ≥ x)` increases to the
//! smallest one. Both are run in lockstep and the iteration stops once the
//! bracket is narrower than `tol`.
//!
//! Off-grid values `u(y)` are interpolated linearly in `ln y` (linearly on the
//! first cell `[0, x_1]`), equal 1 for `y ≤ 0` and are held at `u(x_max)`
//! beyond the grid.

use rayon::prelude::*;

use crate::branching::OffspringLaw;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::supremum::ExpPairCloud;
use crate::tabulated::{left_weight, validate_grid, TabulatedFn};

/// Default stopping tolerance on the sup-norm bracket width.
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// The map `u ↦ T(u)` on nodal values, with the cloud folded into per-cell
/// power sums of the interpolation weights.
///
/// For a sample landing in cell `k` with left weight `w`,
/// `(1 - ū)^n = Σ_d C(n,d) B^{n-d} (A-B)^d w^d` where `A = 1 - u_k` and
/// `B = 1 - u_{k+1}`, so `Σ_j w_j^d` per (row, cell) is all the cloud has to
/// contribute.
pub struct IntegralOperator<'a, T> {
    law: &'a OffspringLaw<T>,
    xs: Vec<T>,
    /// `P̂(S_e < x_i)`.
    below: Vec<T>,
    /// Mass of samples with `S_e < x_i` and `x_i - L_e > x_max`.
    beyond: Vec<T>,
    /// `moments[(i * cells + k) * (K + 1) + d] = (1/N) Σ_j w_j^d`.
    moments: Vec<T>,
    cells: usize,
    degree: usize,
}

impl<'a, T: Scalar> IntegralOperator<'a, T> {
    pub fn new(law: &'a OffspringLaw<T>, cloud: &ExpPairCloud<T>, grid: &[T]) -> Result<Self> {
        validate_solver_grid(grid)?;
        let xs = grid.to_vec();
        let x_max = *xs.last().unwrap();
        let cells = xs.len() - 1;
        let degree = law.max_offspring();
        let width = degree + 1;
        let n = T::from_count(cloud.len());

        let mut samples: Vec<(T, T)> = cloud.samples().iter().map(|p| (p.l, p.s)).collect();
        // descending l: x - l increases along the slice
        samples.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("cloud contains NaN"));

        let rows: Vec<(T, T, Vec<T>)> = xs
            .par_iter()
            .map(|&x| {
                let mut below = 0usize;
                let mut beyond = 0usize;
                let mut row = vec![T::zero(); if degree > 0 { cells * width } else { 0 }];
                let mut cell = 0usize;
                for &(l, s) in &samples {
                    if !(s < x) {
                        continue;
                    }
                    below += 1;
                    if degree == 0 {
                        continue;
                    }
                    let y = x - l;
                    if y <= T::zero() {
                        continue;
                    }
                    if y > x_max {
                        beyond += 1;
                        continue;
                    }
                    while cell + 1 < cells && xs[cell + 1] < y {
                        cell += 1;
                    }
                    let w = left_weight(xs[cell], xs[cell + 1], y);
                    let slot = &mut row[cell * width..(cell + 1) * width];
                    let mut pow = T::one();
                    for m in slot.iter_mut() {
                        *m = *m + pow;
                        pow = pow * w;
                    }
                }
                for m in row.iter_mut() {
                    *m = *m / n;
                }
                (T::from_count(below) / n, T::from_count(beyond) / n, row)
            })
            .collect();

        let mut below = Vec::with_capacity(rows.len());
        let mut beyond = Vec::with_capacity(rows.len());
        let mut moments = Vec::with_capacity(rows.len() * cells * width);
        for (b, o, row) in rows {
            below.push(b);
            beyond.push(o);
            moments.extend(row);
        }
        Ok(IntegralOperator {
            law,
            xs,
            below,
            beyond,
            moments,
            cells,
            degree,
        })
    }

    pub fn grid(&self) -> &[T] {
        &self.xs
    }

    /// `P̂(S_e ≥ x)` on the grid: the contribution of the root path alone.
    pub fn root_only(&self) -> Vec<T> {
        self.below.iter().map(|&b| T::one() - b).collect()
    }

    /// One application of the map.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        assert_eq!(u.len(), self.xs.len());
        let width = self.degree + 1;
        let p0 = self.law.p(0);
        if self.degree == 0 {
            return self.below.iter().map(|&b| T::one() - p0 * b).collect();
        }
        // per-cell polynomial coefficients in w
        let binom = binomials::<T>(self.degree);
        let mut coef = vec![T::zero(); self.cells * width];
        for k in 0..self.cells {
            let a = T::one() - u[k];
            let b = T::one() - u[k + 1];
            let diff = a - b;
            for n in 1..=self.degree {
                let pn = self.law.p(n);
                if pn == T::zero() {
                    continue;
                }
                let mut dpow = T::one();
                for d in 0..=n {
                    coef[k * width + d] = coef[k * width + d] + pn * binom[n][d] * b.powi((n - d) as i32) * dpow;
                    dpow = dpow * diff;
                }
            }
        }
        let tail = T::one() - *u.last().unwrap();
        let tail_term: T = (1..=self.degree)
            .map(|n| self.law.p(n) * tail.powi(n as i32))
            .sum();
        let row_len = self.cells * width;
        (0..self.xs.len())
            .into_par_iter()
            .map(|i| {
                let row = &self.moments[i * row_len..(i + 1) * row_len];
                let g: T = row.iter().zip(&coef).map(|(&m, &c)| m * c).sum();
                let value = T::one() - p0 * self.below[i] - g - self.beyond[i] * tail_term;
                value.max(T::zero()).min(T::one())
            })
            .collect()
    }

    /// Reference evaluation of the map straight from the cloud, one sample at
    /// a time.
    pub fn apply_direct(&self, u: &[T], cloud: &ExpPairCloud<T>) -> Vec<T> {
        let f = TabulatedFn::new(self.xs.clone(), u.to_vec()).expect("valid grid");
        let n = T::from_count(cloud.len());
        self.xs
            .iter()
            .map(|&x| {
                let mut acc = T::zero();
                for p in cloud.samples() {
                    if !(p.s < x) {
                        continue;
                    }
                    let q = T::one() - interpolate_u(&f, x - p.l);
                    acc = acc
                        + (0..=self.degree)
                            .map(|k| self.law.p(k) * q.powi(k as i32))
                            .sum::<T>();
                }
                (T::one() - acc / n).max(T::zero()).min(T::one())
            })
            .collect()
    }
}

fn binomials<T: Scalar>(max: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = vec![vec![T::one()]];
    for n in 1..=max {
        let prev = &rows[n - 1];
        let mut row = vec![T::one(); n + 1];
        for d in 1..n {
            row[d] = prev[d - 1] + prev[d];
        }
        rows.push(row);
    }
    rows
}

fn validate_solver_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    validate_grid(grid)?;
    if grid.len() < 2 || grid[0] != T::zero() {
        return Err(Error::InvalidGrid(
            "solver grid must start at 0 and have at least two nodes".into(),
        ));
    }
    Ok(())
}

/// `u(y)` with the solver's extension rules.
pub fn interpolate_u<T: Scalar>(u: &TabulatedFn<T>, y: T) -> T {
    if y <= T::zero() {
        T::one()
    } else {
        u.eval(y)
    }
}

/// Converged bracket of the fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    /// Limit of the decreasing iteration from `u ≡ 1`.
    pub u: TabulatedFn<T>,
    /// Limit of the increasing iteration from `P̂(S_e ≥ x)`.
    pub lower: TabulatedFn<T>,
    pub iterations: usize,
    /// Sup-norm change of the upper iterate in the last step.
    pub last_delta: T,
    /// Sup-norm distance between the two iterates at exit.
    pub gap: T,
}

/// Solves for `u` on `grid` (which must start at 0).
pub fn solve_u<T: Scalar>(
    law: &OffspringLaw<T>,
    cloud: &ExpPairCloud<T>,
    grid: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Solution<T>> {
    if !(tol > T::zero()) || max_iter == 0 {
        return Err(Error::InvalidArgument("tol and max_iter must be positive".into()));
    }
    let op = IntegralOperator::new(law, cloud, grid)?;
    let mut upper = vec![T::one(); grid.len()];
    let mut lower = op.root_only();
    let mut last_delta = T::infinity();
    for it in 1..=max_iter {
        let next_upper = op.apply(&upper);
        let next_lower = op.apply(&lower);
        last_delta = sup_distance(&next_upper, &upper);
        let gap = sup_distance(&next_upper, &next_lower);
        upper = next_upper;
        lower = next_lower;
        if gap < tol {
            return Ok(Solution {
                u: TabulatedFn::new(grid.to_vec(), upper)?,
                lower: TabulatedFn::new(grid.to_vec(), lower)?,
                iterations: it,
                last_delta,
                gap,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_delta: sup_distance(&upper, &lower).max(last_delta).as_f64(),
    })
}

fn sup_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max)
}

/// `φ0 = (1 - E[p]) u + (E[p² - p] / 2) u²`.
pub fn phi0_of<T: Scalar>(u: &TabulatedFn<T>, law: &OffspringLaw<T>) -> TabulatedFn<T> {
    let linear = T::one() - law.mean();
    let quadratic = law.sigma2() / T::lit(2.0);
    u.map(|_, y| linear * y + quadratic * y * y)
}

/// Remainder implied by the second-order expansion of the equation, and its
/// third-moment bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    /// `u - P(S_e ≥ x) - E[1{S_e<x} u(x-L_e)] + Φ0`.
    pub lhs_minus_rhs: TabulatedFn<T>,
    /// `E[p³] · E[1{S_e<x} u³(x-L_e)]`.
    pub upper_bound: TabulatedFn<T>,
    pub slack: T,
    /// Largest excursion outside `[-slack, bound + slack]` (0 when none).
    pub max_violation: T,
}

impl<T: Scalar> ResidualReport<T> {
    pub fn holds(&self) -> bool {
        self.max_violation == T::zero()
    }
}

/// Evaluates the remainder of the expanded equation for `u` over the cloud.
pub fn residual_check<T: Scalar>(
    u: &TabulatedFn<T>,
    law: &OffspringLaw<T>,
    cloud: &ExpPairCloud<T>,
    slack: T,
) -> Result<ResidualReport<T>> {
    validate_solver_grid(u.xs())?;
    let n = T::from_count(cloud.len());
    let rows: Vec<(T, T)> = u
        .xs()
        .par_iter()
        .zip(u.ys().par_iter())
        .map(|(&x, &ux)| {
            let (mut above, mut m1, mut m2, mut m3) = (0usize, T::zero(), T::zero(), T::zero());
            for p in cloud.samples() {
                if !(p.s < x) {
                    above += 1;
                    continue;
                }
                let v = interpolate_u(u, x - p.l);
                m1 = m1 + v;
                m2 = m2 + v * v;
                m3 = m3 + v * v * v;
            }
            let (m1, m2, m3) = (m1 / n, m2 / n, m3 / n);
            let phi0 = (T::one() - law.mean()) * m1 + law.sigma2() / T::lit(2.0) * m2;
            let residual = ux - T::from_count(above) / n - m1 + phi0;
            (residual, law.m3() * m3)
        })
        .collect();
    let (res, bound): (Vec<T>, Vec<T>) = rows.into_iter().unzip();
    let max_violation = res
        .iter()
        .zip(&bound)
        .map(|(&r, &b)| (-slack - r).max(r - b - slack).max(T::zero()))
        .fold(T::zero(), T::max);
    Ok(ResidualReport {
        lhs_minus_rhs: TabulatedFn::new(u.xs().to_vec(), res)?,
        upper_bound: TabulatedFn::new(u.xs().to_vec(), bound)?,
        slack,
        max_violation,
    })
}
