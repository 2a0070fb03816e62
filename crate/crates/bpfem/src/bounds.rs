//! The admissible set and the nodal projection: clipping of finite element
//! functions to time-dependent bounds, and the complementary remainder.

use std::sync::Arc;

use crate::fe_space::FeFunction;

type BoundFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time-dependent nodal bounds. The lower bound defaults to zero; the upper
/// bound must stay strictly above the lower one for every queried time.
#[derive(Clone)]
pub struct BoundSpec {
    lower: BoundFn,
    upper: BoundFn,
}

impl std::fmt::Debug for BoundSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundSpec").finish_non_exhaustive()
    }
}

impl BoundSpec {
    pub fn new<L, U>(lower: L, upper: U) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        U: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        BoundSpec {
            lower: Arc::new(lower),
            upper: Arc::new(upper),
        }
    }

    /// Lower bound zero, given upper bound.
    pub fn with_upper<U>(upper: U) -> Self
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(|_| 0.0, upper)
    }

    pub fn constant(lower: f64, upper: f64) -> Self {
        Self::new(move |_| lower, move |_| upper)
    }

    /// Evaluate (lower, upper) at time t.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let lo = (self.lower)(t);
        let hi = (self.upper)(t);
        assert!(lo < hi, "bounds must satisfy lower(t) < upper(t), got [{lo}, {hi}] at t = {t}");
        (lo, hi)
    }
}

/// Result of the nodal split u = plus + minus.
#[derive(Debug, Clone)]
pub struct SplitFunction {
    /// Constrained part: nodal values clipped into [lower(t), upper(t)].
    pub plus: FeFunction,
    /// Complementary part: what clipping removed.
    pub minus: FeFunction,
}

/// Clip every nodal value into the bounds at time `t` and return both the
/// constrained part and the complementary remainder.
pub fn split(u: &FeFunction, bounds: &BoundSpec, t: f64) -> SplitFunction {
    let (lo, hi) = bounds.at(t);
    let plus_coeffs: Vec<f64> = u.coeffs.iter().map(|&c| c.clamp(lo, hi)).collect();
    let minus_coeffs: Vec<f64> = u
        .coeffs
        .iter()
        .zip(plus_coeffs.iter())
        .map(|(&c, &p)| c - p)
        .collect();
    SplitFunction {
        plus: FeFunction::new(u.space.clone(), plus_coeffs),
        minus: FeFunction::new(u.space.clone(), minus_coeffs),
    }
}

pub const ADMISSIBLE_TOL: f64 = 1e-13;

/// True iff every nodal value lies in [lower(t), upper(t)] within
/// `ADMISSIBLE_TOL`.
pub fn is_admissible(u: &FeFunction, bounds: &BoundSpec, t: f64) -> bool {
    let (lo, hi) = bounds.at(t);
    u.coeffs
        .iter()
        .all(|&c| c >= lo - ADMISSIBLE_TOL && c <= hi + ADMISSIBLE_TOL)
}
