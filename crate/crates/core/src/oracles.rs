//! Ground-truth feasibility deciders and the structural property checks.
//!
//! Three deciders with disjoint mechanics: full enumeration (`n ≤ 25`),
//! meet in the middle (`n ≤ 40`) and a reachable-sums table (`Σ a ≤ 10^8`).
//!
//! Property 1 says every index set of size at most `m = ⌊n^{1−ε}⌋` carries at
//! most `Σ a / n^k`. The top-`m` coefficients form the heaviest such set, so
//! the fast checker only looks at them; the exhaustive checker looks at every
//! set. Threshold comparisons are exact (see [`crate::params::PowerScale`]).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::numeric::{convert_all, SumValue};
use crate::params::{Constants, Exponent, PowerScale};

pub const ENUMERATE_MAX_N: usize = 25;
pub const MITM_MAX_N: usize = 40;
pub const DP_MAX_TOTAL: u64 = 100_000_000;
pub const EXHAUSTIVE_MAX_N: usize = 30;
pub const EXHAUSTIVE_MAX_M: usize = 6;

/// Tries every one of the `2^n` subsets in Gray-code order.
pub fn enumerate_feasible(inst: &Instance) -> Result<Option<Vec<u8>>> {
    let n = inst.n();
    if n > ENUMERATE_MAX_N {
        return Err(Error::guard(
            "enumerate: n <= 25",
            format!("instance has n = {n}"),
        ));
    }
    let (a, beta, total) = (inst.coefficients(), inst.beta(), inst.total());
    Ok(match convert_all::<u128>(a, beta, total) {
        Some((a, beta)) => gray_enumerate(&a, &beta),
        None => gray_enumerate(a, beta),
    })
}

fn gray_enumerate<T: SumValue>(a: &[T], beta: &T) -> Option<Vec<u8>> {
    let n = a.len();
    let mut x = vec![0u8; n];
    let mut sum = T::zero();
    if sum == *beta {
        return Some(x);
    }
    for step in 1u64..(1u64 << n) {
        // The Gray code flips the bit at the position of step's lowest set bit.
        let j = step.trailing_zeros() as usize;
        if x[j] == 0 {
            x[j] = 1;
            sum = sum + a[j].clone();
        } else {
            x[j] = 0;
            sum = sum - a[j].clone();
        }
        if sum == *beta {
            return Some(x);
        }
    }
    None
}

/// Splits the coefficients in halves, tabulates both halves' subset sums and
/// looks up `β − s` in the sorted right table for every left sum `s`.
pub fn mitm_feasible(inst: &Instance) -> Result<Option<Vec<u8>>> {
    let n = inst.n();
    if n > MITM_MAX_N {
        return Err(Error::guard(
            "mitm: n <= 40",
            format!("instance has n = {n}"),
        ));
    }
    let (a, beta, total) = (inst.coefficients(), inst.beta(), inst.total());
    Ok(match convert_all::<u128>(a, beta, total) {
        Some((a, beta)) => mitm(&a, &beta),
        None => mitm(a, beta),
    })
}

/// `sums[mask] = Σ_{j ∈ mask} a[j]`.
fn subset_sums<T: SumValue>(a: &[T]) -> Vec<T> {
    let mut sums = Vec::with_capacity(1 << a.len());
    sums.push(T::zero());
    for aj in a {
        let len = sums.len();
        for i in 0..len {
            let s = sums[i].clone() + aj.clone();
            sums.push(s);
        }
    }
    sums
}

pub(crate) fn mitm<T: SumValue>(a: &[T], beta: &T) -> Option<Vec<u8>> {
    let half = a.len() / 2;
    let (left, right) = a.split_at(half);
    let left_sums = subset_sums(left);
    let mut right_table: Vec<(T, u64)> = subset_sums(right)
        .into_iter()
        .enumerate()
        .map(|(mask, s)| (s, mask as u64))
        .collect();
    right_table.sort_unstable();
    for (lmask, s) in left_sums.iter().enumerate() {
        if s > beta {
            continue;
        }
        let need = beta.clone() - s.clone();
        let pos = right_table.partition_point(|(t, _)| *t < need);
        if let Some((t, rmask)) = right_table.get(pos) {
            if *t == need {
                let mut x = vec![0u8; a.len()];
                for (j, xj) in x.iter_mut().enumerate() {
                    let bit = if j < half {
                        (lmask >> j) & 1
                    } else {
                        (*rmask as usize >> (j - half)) & 1
                    };
                    *xj = bit as u8;
                }
                return Some(x);
            }
        }
    }
    None
}

/// Reachable-sums table over `0..=β`. `first[s]` is the item that first made
/// `s` reachable; walking back through it yields a witness.
pub fn dp_feasible(inst: &Instance) -> Result<Option<Vec<u8>>> {
    let total = inst.total();
    if *total > BigUint::from(DP_MAX_TOTAL) {
        return Err(Error::guard(
            "dp: sum of coefficients <= 10^8",
            format!("sum is {total}"),
        ));
    }
    if inst.beta() > total {
        return Ok(None);
    }
    let beta = inst.beta().to_usize().expect("beta <= total <= 10^8");
    let a: Vec<usize> = inst
        .coefficients()
        .iter()
        .map(|x| x.to_usize().expect("guarded"))
        .collect();
    const UNREACHED: u32 = u32::MAX;
    let mut first = vec![UNREACHED; beta + 1];
    first[0] = 0;
    for (j, &aj) in a.iter().enumerate() {
        if aj > beta {
            continue;
        }
        for s in (aj..=beta).rev() {
            if first[s] == UNREACHED && first[s - aj] != UNREACHED {
                first[s] = j as u32;
            }
        }
        if first[beta] != UNREACHED {
            break;
        }
    }
    if first[beta] == UNREACHED {
        return Ok(None);
    }
    let mut x = vec![0u8; a.len()];
    let mut s = beta;
    while s > 0 {
        let j = first[s] as usize;
        x[j] = 1;
        s -= a[j];
    }
    Ok(Some(x))
}

/// Property 1 via the `m` largest coefficients.
pub fn check_property1_topm(inst: &Instance, consts: &Constants) -> Result<bool> {
    consts.validate()?;
    let m = consts.m(inst.n());
    if m == 0 {
        return Ok(true);
    }
    let mut sorted: Vec<&BigUint> = inst.coefficients().iter().collect();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    let top: BigUint = sorted.into_iter().take(m).sum();
    let scale = PowerScale::new(inst.n() as u64, consts.k);
    Ok(scale.scaled_le(&top, inst.total()))
}

/// Property 1 checked on every index set of size `1..=m`.
pub fn check_property1_exhaustive(inst: &Instance, consts: &Constants) -> Result<bool> {
    consts.validate()?;
    let n = inst.n();
    let m = consts.m(n);
    if n > EXHAUSTIVE_MAX_N || m > EXHAUSTIVE_MAX_M {
        return Err(Error::guard(
            "p1 exhaustive: n <= 30 and m <= 6",
            format!("n = {n}, m = {m}"),
        ));
    }
    let scale = PowerScale::new(n as u64, consts.k);
    let bound = scale.bound(inst.total());
    let a = inst.coefficients();
    Ok(all_subsets_admitted(a, m, 0, &BigUint::zero(), &|s| {
        bound.admits(s)
    }))
}

/// Visits every index set of size `1..=remaining` starting at `start`,
/// extending the partial set whose sum is `sum`.
fn all_subsets_admitted(
    a: &[BigUint],
    remaining: usize,
    start: usize,
    sum: &BigUint,
    admits: &dyn Fn(&BigUint) -> bool,
) -> bool {
    if remaining == 0 {
        return true;
    }
    (start..a.len()).all(|j| {
        let s = sum + &a[j];
        admits(&s) && all_subsets_admitted(a, remaining - 1, j + 1, &s, admits)
    })
}

/// Property 2: no subset attains `β`.
pub fn check_property2(inst: &Instance) -> Result<bool> {
    Ok(mitm_feasible(inst)?.is_none())
}

/// `Σ/n^k ≤ β ≤ (1 − 1/n^k) Σ`, exact. False when the window is empty.
pub fn beta_in_window(inst: &Instance, k: Exponent) -> bool {
    let (beta, total) = (inst.beta(), inst.total());
    if beta.is_zero() || beta >= total {
        return false;
    }
    let scale = PowerScale::new(inst.n() as u64, k);
    // Σ ≤ β n^k  and  Σ ≤ (Σ − β) n^k
    scale.scaled_ge(beta, total) && scale.scaled_ge(&(total - beta), total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub epsilon: Exponent,
    pub k: Exponent,
    pub m: usize,
    pub p1_topm: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_exhaustive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<bool>,
    pub window: bool,
    /// Oracle feasibility verdict, when the instance is within the MITM guard.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
}

/// Runs every applicable check. `exhaustive` requests the exhaustive
/// Property 1 checker, whose guard then becomes an error.
pub fn property_report(
    inst: &Instance,
    consts: &Constants,
    exhaustive: bool,
) -> Result<PropertyReport> {
    consts.validate()?;
    let p1_exhaustive = if exhaustive {
        Some(check_property1_exhaustive(inst, consts)?)
    } else {
        None
    };
    let feasible = if inst.n() <= MITM_MAX_N {
        Some(mitm_feasible(inst)?.is_some())
    } else {
        None
    };
    Ok(PropertyReport {
        epsilon: consts.epsilon,
        k: consts.k,
        m: consts.m(inst.n()),
        p1_topm: check_property1_topm(inst, consts)?,
        p1_exhaustive,
        p2: feasible.map(|f| !f),
        window: beta_in_window(inst, consts.k),
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a: &[u64], beta: u64) -> Instance {
        Instance::from_u64(a, beta).unwrap()
    }

    fn consts(eps: &str, k: &str) -> Constants {
        Constants::new(eps.parse().unwrap(), k.parse().unwrap()).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            enumerate_feasible(&inst(&[3, 5, 8], 11)).unwrap(),
            Some(vec![1, 0, 1])
        );
        // subset sums of {3,5,8}: 0,3,5,8,11,13,16
        assert_eq!(enumerate_feasible(&inst(&[3, 5, 8], 4)).unwrap(), None);
        assert_eq!(enumerate_feasible(&inst(&[1], 2)).unwrap(), None);
        assert_eq!(enumerate_feasible(&inst(&[1], 0)).unwrap(), Some(vec![0]));
        assert!(enumerate_feasible(&inst(&[1; 26], 3)).is_err());
    }

    #[test]
    fn mitm_examples() {
        let i = inst(&[3, 5, 8, 10], 13);
        let w = mitm_feasible(&i).unwrap().unwrap();
        assert!(i.is_witness(&w));
        assert_eq!(mitm_feasible(&inst(&[2, 4, 6, 8], 5)).unwrap(), None);
        assert_eq!(mitm_feasible(&inst(&[7], 7)).unwrap(), Some(vec![1]));
        assert_eq!(mitm_feasible(&inst(&[7], 0)).unwrap(), Some(vec![0]));
        assert!(mitm_feasible(&inst(&[1; 41], 3)).is_err());
    }

    #[test]
    fn mitm_bigint_path_matches_u128_path() {
        let a: Vec<u128> = vec![11, 23, 35, 47, 59, 61, 73, 85, 97];
        let big: Vec<BigUint> = a.iter().map(|&x| BigUint::from(x)).collect();
        for beta in 0u128..=500 {
            let small = mitm(&a, &beta);
            let wide = mitm(&big, &BigUint::from(beta));
            assert_eq!(small, wide, "beta = {beta}");
        }
    }

    #[test]
    fn dp_examples() {
        assert_eq!(dp_feasible(&inst(&[2, 3], 4)).unwrap(), None);
        assert_eq!(dp_feasible(&inst(&[2, 3], 5)).unwrap(), Some(vec![1, 1]));
        assert_eq!(dp_feasible(&inst(&[2, 3], 9)).unwrap(), None);
        assert_eq!(dp_feasible(&inst(&[2, 3], 0)).unwrap(), Some(vec![0, 0]));
        let i = inst(&[4, 4, 4], 8);
        assert!(i.is_witness(&dp_feasible(&i).unwrap().unwrap()));
        assert!(dp_feasible(&inst(&[60_000_000, 60_000_000], 5)).is_err());
    }

    #[test]
    fn property1_examples() {
        let c = consts("0.5", "0.25");
        // m = 2; threshold 4 / 4^{0.25} = 2.828…
        let flat = inst(&[1, 1, 1, 1], 2);
        assert_eq!(c.m(4), 2);
        assert!(4.0 / 4f64.powf(0.25) > 2.0);
        assert!(check_property1_topm(&flat, &c).unwrap());
        assert!(check_property1_exhaustive(&flat, &c).unwrap());
        // top-2 = 101 > 103 / 4^{0.25} = 72.83…
        let skew = inst(&[100, 1, 1, 1], 2);
        assert!(101.0 > 103.0 / 4f64.powf(0.25));
        assert!(!check_property1_topm(&skew, &c).unwrap());
        assert!(!check_property1_exhaustive(&skew, &c).unwrap());
    }

    #[test]
    fn property1_single_coefficient() {
        // m = ⌊n^{1−ε}⌋ ≥ 1 whenever n ≥ 1, so the smallest case is m = 1.
        let c = consts("0.5", "0.25");
        let single = inst(&[5], 5);
        assert_eq!(c.m(1), 1);
        // 5 · 1^{0.25} ≤ 5
        assert!(check_property1_topm(&single, &c).unwrap());
        assert!(check_property1_exhaustive(&single, &c).unwrap());
    }

    #[test]
    fn exhaustive_guard() {
        let c = consts("0.5", "0.25");
        let wide = inst(&[1; 31], 3);
        assert!(matches!(
            check_property1_exhaustive(&wide, &c),
            Err(Error::Guard { .. })
        ));
        // n = 30 with ε = 0.1 gives m = ⌊30^{0.9}⌋ = 21 > 6.
        let c = consts("0.1", "0.05");
        assert!(check_property1_exhaustive(&inst(&[1; 30], 3), &c).is_err());
    }

    #[test]
    fn property2_examples() {
        assert!(!check_property2(&inst(&[2, 4, 6], 6)).unwrap());
        assert!(check_property2(&inst(&[2, 4, 6], 5)).unwrap());
    }

    #[test]
    fn window_examples() {
        let i = inst(&[10, 10, 10, 10], 20);
        // 4^{0.5} = 2: the window collapses to [20, 20].
        assert!(beta_in_window(&i, "0.5".parse().unwrap()));
        // 4^{-0.25} ≈ 0.7071: lower 28.28 > upper 11.72.
        assert!(!beta_in_window(&i, "0.25".parse().unwrap()));
        assert!(!beta_in_window(
            &inst(&[10, 10, 10, 10], 0),
            "0.5".parse().unwrap()
        ));
        assert!(!beta_in_window(
            &inst(&[10, 10, 10, 10], 40),
            "0.5".parse().unwrap()
        ));
        assert!(!beta_in_window(
            &inst(&[10, 10, 10, 10], 19),
            "0.5".parse().unwrap()
        ));
        assert!(!beta_in_window(
            &inst(&[10, 10, 10, 10], 21),
            "0.5".parse().unwrap()
        ));
    }

    #[test]
    fn report_fields() {
        let c = consts("0.5", "0.25");
        let r = property_report(&inst(&[2, 4, 6], 5), &c, true).unwrap();
        assert_eq!(r.p2, Some(true));
        assert_eq!(r.feasible, Some(false));
        assert_eq!(r.p1_exhaustive, Some(r.p1_topm));
        let json = serde_json::to_string(&r).unwrap();
        assert!(
            json.starts_with(r#"{"epsilon":"0.5","k":"0.25","m":1,"#),
            "{json}"
        );
    }
}
