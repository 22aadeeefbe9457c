//! Floating-point views of big integers and the sum types used by the hot loops.

use std::ops::{Add, Sub};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// `log₂ x` for `x ≥ 1`, accurate to f64 precision at any magnitude.
pub fn log2_big(x: &BigUint) -> f64 {
    debug_assert!(!x.is_zero());
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

/// `ln x` for `x ≥ 1`.
pub fn ln_big(x: &BigUint) -> f64 {
    log2_big(x) * std::f64::consts::LN_2
}

/// Sum arithmetic needed by the solver and oracles. Implemented for `u128`
/// (fast path when the total fits) and `BigUint`.
pub trait SumValue: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {
    fn from_big(x: &BigUint) -> Option<Self>;
    fn to_big(&self) -> BigUint;
}

impl SumValue for u128 {
    fn from_big(x: &BigUint) -> Option<Self> {
        x.to_u128()
    }

    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl SumValue for BigUint {
    fn from_big(x: &BigUint) -> Option<Self> {
        Some(x.clone())
    }

    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

/// Converts every coefficient and `beta` into `T`. `None` when `total` (and
/// hence any partial sum) or `beta` does not fit.
pub fn convert_all<T: SumValue>(
    a: &[BigUint],
    beta: &BigUint,
    total: &BigUint,
) -> Option<(Vec<T>, T)> {
    T::from_big(total)?;
    let a = a.iter().map(T::from_big).collect::<Option<Vec<_>>>()?;
    Some((a, T::from_big(beta)?))
}
