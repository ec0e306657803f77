//! Empirical CDFs and the first sign change between two of them.

use crate::scalar::{cmp, Scalar};

use super::StatsError;

/// Right-continuous empirical CDF, `F(w) = #{x ≤ w} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, w: T) -> T {
        let below = self.sorted.partition_point(|&x| x <= w);
        T::count(below) / T::count(self.sorted.len())
    }

    /// Distinct sample values in ascending order.
    pub fn jump_points(&self) -> Vec<T> {
        let mut points = self.sorted.clone();
        points.dedup();
        points
    }

    /// `(w, F(w))` at each jump point.
    pub fn steps(&self) -> Vec<(T, T)> {
        self.jump_points()
            .into_iter()
            .map(|w| (w, self.eval(w)))
            .collect()
    }

    pub fn min(&self) -> T {
        self.sorted[0]
    }

    pub fn max(&self) -> T {
        self.sorted[self.sorted.len() - 1]
    }
}

pub fn empirical_cdf<T: Scalar>(weights: &[T]) -> Result<EmpiricalCdf<T>, StatsError> {
    if weights.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(bad) = weights.iter().find(|w| w.is_nan()) {
        return Err(StatsError::InvalidValue(format!("weight {bad}")));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(cmp);
    Ok(EmpiricalCdf { sorted })
}

/// Outcome of [`cdf_crossing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing<T> {
    /// First weight where `F_demand − F_supply` changes sign.
    At(T),
    /// The difference keeps one sign.
    None,
    /// The two CDFs agree at every jump point.
    Coincident,
}

/// Locates the smallest weight where `D = F_demand − F_supply` changes sign.
///
/// `D` is evaluated at the merged jump points. Between two adjacent points of
/// opposite sign the crossing is interpolated linearly on `(w, D)`; when `D`
/// passes through a run of exact zeros the first zero point is returned.
pub fn cdf_crossing<T: Scalar>(demand: &EmpiricalCdf<T>, supply: &EmpiricalCdf<T>) -> Crossing<T> {
    let mut points = demand.jump_points();
    points.extend(supply.jump_points());
    points.sort_by(cmp);
    points.dedup();

    let diffs: Vec<T> = points
        .iter()
        .map(|&w| demand.eval(w) - supply.eval(w))
        .collect();
    let mut last_nonzero: Option<usize> = None;
    for (i, &d) in diffs.iter().enumerate() {
        if d == T::zero() {
            continue;
        }
        if let Some(j) = last_nonzero {
            let prev = diffs[j];
            if prev.signum() != d.signum() {
                if j + 1 == i {
                    let (x0, x1) = (points[j], points[i]);
                    return Crossing::At(x0 + (x1 - x0) * prev / (prev - d));
                }
                return Crossing::At(points[j + 1]);
            }
        }
        last_nonzero = Some(i);
    }
    if last_nonzero.is_none() {
        Crossing::Coincident
    } else {
        Crossing::None
    }
}
