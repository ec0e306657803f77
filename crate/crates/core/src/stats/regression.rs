use crate::scalar::Scalar;

use super::StatsError;

/// Ordinary least squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub n: usize,
}

impl<T: Scalar> LinearFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

/// Least-squares fit on centered sums. `r_squared` is the squared Pearson
/// correlation, clamped to `[0, 1]`; a constant response counts as a perfect fit.
pub fn ols<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::InsufficientSupport {
            need: 2,
            got: xs.len(),
        });
    }
    let n = T::count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(StatsError::DegenerateSupport);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() {
        (sxy * sxy / (sxx * syy)).min(T::one()).max(T::zero())
    } else {
        T::one()
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        n: xs.len(),
    })
}

/// Power law `y = a · x^beta` fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllometricFit<T> {
    pub a: T,
    pub beta: T,
    pub r_squared: T,
    /// Pairs dropped because either value was not positive.
    pub excluded: usize,
    pub n: usize,
}

impl<T: Scalar> AllometricFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.a * x.powf(self.beta)
    }
}

/// Regresses `ln y` on `ln x` over the pairs where both are positive.
pub fn allometric_fit<T: Scalar>(x: &[T], y: &[T]) -> Result<AllometricFit<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let (lx, ly): (Vec<T>, Vec<T>) = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 3 {
        return Err(StatsError::InsufficientSupport {
            need: 3,
            got: lx.len(),
        });
    }
    let fit = ols(&lx, &ly)?;
    Ok(AllometricFit {
        a: fit.intercept.exp(),
        beta: fit.slope,
        r_squared: fit.r_squared,
        excluded: x.len() - lx.len(),
        n: lx.len(),
    })
}
