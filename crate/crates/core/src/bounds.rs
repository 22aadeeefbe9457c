//! Closed-form probability and node-count bounds.
//!
//! Probabilities are returned together with their natural logarithm because
//! the interesting ones underflow long before the sizes we sweep. A bound is
//! flagged `vacuous` when its precondition fails at this `n` or it exceeds
//! one; vacuous values are reported as computed, never clamped.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::compute_m;
use crate::numeric::ln_big;
use crate::params::{check_open_unit, Exponent, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    /// `exp(ln_value)`; 0 when that underflows.
    pub value: f64,
    pub ln_value: f64,
    pub vacuous: bool,
}

impl BoundValue {
    fn from_ln(ln_value: f64, vacuous: bool) -> Self {
        let value = ln_value.exp();
        BoundValue {
            value,
            ln_value,
            vacuous: vacuous || value > 1.0,
        }
    }
}

/// `⌊max{1/r, 1/(1−r)}⌋`: how many values of the last coefficient can
/// complete a fixed 0-1 vector to a solution.
pub fn k_of_r(r: Ratio) -> Result<u64> {
    check_open_unit(r)?;
    let (p, q) = (*r.numer(), *r.denom());
    Ok((q / p).max(q / (q - p)))
}

/// `e^{−2t²n}`, the binomial upper-tail bound for deviation `t ≥ 0`.
pub fn hoeffding_tail_bound(n: u64, t: f64) -> BoundValue {
    BoundValue::from_ln(-2.0 * t * t * n as f64, t < 0.0)
}

fn check_constants(epsilon: f64, k: f64) -> Result<()> {
    if !(0.0 < k && k < epsilon && epsilon < 1.0) {
        return Err(Error::param(format!(
            "need 0 < k < epsilon < 1, got k={k} epsilon={epsilon}"
        )));
    }
    Ok(())
}

/// Upper bound on the probability that Property 1 fails:
/// `e^{−2n(1/2 − 2n^{k−ε})²}`, meaningful once `n^{ε−k} ≥ 4`.
pub fn lemma1_prob_bound(n: u64, epsilon: f64, k: f64) -> Result<BoundValue> {
    check_constants(epsilon, k)?;
    let t = 0.5 - 2.0 * (n as f64).powf(k - epsilon);
    Ok(BoundValue::from_ln(-2.0 * t * t * n as f64, t < 0.0))
}

/// Upper bound `k(r) 2^n / ⌊10^{n/2}⌋` on the probability that some subset
/// attains `β`.
pub fn lemma2_violation_bound(n: u64, r: Ratio) -> Result<BoundValue> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let kr = k_of_r(r)?;
    let ln = (kr as f64).ln() + n as f64 * std::f64::consts::LN_2 - ln_big(&compute_m(n as usize));
    let b = BoundValue::from_ln(ln, false);
    Ok(BoundValue {
        vacuous: b.vacuous || ln >= 0.0,
        ..b
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeBound {
    /// `2^{n^{1−ε}}`; infinite when that overflows.
    pub value: f64,
    /// `n^{1−ε}`.
    pub log2: f64,
}

/// `2^{n^{1−ε}}`.
pub fn node_count_lower_bound(n: u64, epsilon: f64) -> Result<NodeBound> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::param(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let log2 = (n as f64).powf(1.0 - epsilon);
    Ok(NodeBound {
        value: log2.exp2(),
        log2,
    })
}

/// `nodes ≥ 2^{n^{1−ε}}`. Decided on integers unless `nodes` falls strictly
/// between `2^{⌊x⌋}` and `2^{⌊x⌋+1}` for a non-integral `x = n^{1−ε}`.
pub fn meets_node_bound(nodes: u64, n: u64, epsilon: Exponent) -> bool {
    let c = epsilon.complement();
    let m = c.floor_power(n);
    if nodes == 0 {
        return false;
    }
    let nodes_big = BigUint::from(nodes);
    let bits = nodes_big.bits() - 1; // 2^bits ≤ nodes < 2^{bits+1}
    if bits < m {
        return false;
    }
    if bits > m || c.power_is_integral(n) {
        return true;
    }
    (nodes as f64).log2() >= (n as f64).powf(c.to_f64())
}

/// `P(a ≤ M/2)` for `a ~ U{1..M}`: `⌊M/2⌋ / M`.
pub fn half_range_probability(n: usize) -> f64 {
    let m = compute_m(n);
    let half: BigUint = &m / 2u32;
    match (half.to_f64(), m.to_f64()) {
        (Some(h), Some(m)) if m.is_finite() => h / m,
        _ => (ln_big(&half) - ln_big(&m)).exp(),
    }
}

/// Empirical frequency of `{X ≥ (p+t)n}` over `draws` samples of
/// `X ~ Binomial(n, p)`.
pub fn simulate_binomial_tail(n: u64, p: f64, t: f64, draws: u64, seed: u64) -> Result<f64> {
    let dist = Binomial::new(n, p).map_err(|e| Error::param(format!("binomial: {e}")))?;
    // i ≥ (p+t)n for integer i; the tolerance absorbs representation error in p+t.
    let threshold = ((p + t) * n as f64 - 1e-9).ceil().max(0.0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..draws)
        .filter(|_| dist.sample(&mut rng) >= threshold)
        .count();
    Ok(hits as f64 / draws as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_of_r_examples() {
        assert_eq!(k_of_r(Ratio::new(1, 2)).unwrap(), 2);
        assert_eq!(k_of_r(Ratio::new(1, 4)).unwrap(), 4);
        assert_eq!(k_of_r(Ratio::new(9, 10)).unwrap(), 10);
        assert_eq!(k_of_r(Ratio::new(2, 5)).unwrap(), 2);
        assert!(k_of_r(Ratio::new(1, 1)).is_err());
        assert!(k_of_r(Ratio::new(0, 1)).is_err());
    }

    #[test]
    fn k_of_r_symmetric() {
        for q in 2..60u64 {
            for p in 1..q {
                let r = Ratio::new(p, q);
                assert_eq!(k_of_r(r).unwrap(), k_of_r(Ratio::new(q - p, q)).unwrap());
            }
        }
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_tail_bound(37, 0.0).value, 1.0);
        let b = hoeffding_tail_bound(100, 0.1);
        assert!((b.value - 0.1353352832366127).abs() < 1e-12);
        assert!(!b.vacuous);
        assert!(hoeffding_tail_bound(100, -0.1).vacuous);
    }

    #[test]
    fn lemma1_examples() {
        // 2 · 256^{−1/4} = 0.5 ⇒ t = 0
        let b = lemma1_prob_bound(256, 0.5, 0.25).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(!b.vacuous);
        // 2 · 10000^{−1/4} = 0.2 ⇒ t = 0.3, ln = −2 · 0.09 · 10000 = −1800
        let b = lemma1_prob_bound(10_000, 0.5, 0.25).unwrap();
        assert_eq!(b.value, 0.0);
        assert!((b.ln_value + 1800.0).abs() < 1e-9);
        assert!(!b.vacuous);
        // 2 · 16^{−1/4} = 1 ⇒ t = −0.5
        assert!(lemma1_prob_bound(16, 0.5, 0.25).unwrap().vacuous);
        assert!(lemma1_prob_bound(16, 0.25, 0.5).is_err());
        assert!(lemma1_prob_bound(16, 1.0, 0.5).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let half = Ratio::new(1, 2);
        let b = lemma2_violation_bound(20, half).unwrap();
        assert!((b.value - 2.0 * 1048576.0 / 1e10).abs() < 1e-15);
        assert!(!b.vacuous);
        let b = lemma2_violation_bound(2, half).unwrap();
        assert!((b.value - 0.8).abs() < 1e-12);
        assert!(!b.vacuous);
        let b = lemma2_violation_bound(40, half).unwrap();
        assert!((b.value / (2.0 * 2f64.powi(40) / 1e20) - 1.0).abs() < 1e-12);
        assert!(lemma2_violation_bound(1, Ratio::new(1, 2)).unwrap().vacuous);
    }

    #[test]
    fn lemma2_decreasing() {
        for r in [Ratio::new(1, 2), Ratio::new(1, 7), Ratio::new(5, 6)] {
            let mut prev = f64::INFINITY;
            for n in 2..400 {
                let ln = lemma2_violation_bound(n, r).unwrap().ln_value;
                assert!(ln < prev, "n = {n}");
                prev = ln;
            }
        }
    }

    #[test]
    fn node_bound_examples() {
        assert_eq!(node_count_lower_bound(16, 0.5).unwrap().value, 16.0);
        let b = node_count_lower_bound(24, 0.9).unwrap();
        // 24^{0.1} = e^{0.1 ln 24}
        let expect = (0.1 * 24f64.ln()).exp().exp2();
        assert!((b.value - expect).abs() < 1e-9);
        assert!((b.value - 2.59).abs() < 0.01);
        assert_eq!(node_count_lower_bound(1, 0.3).unwrap().value, 2.0);
        assert!(node_count_lower_bound(4, 1.0).is_err());
    }

    #[test]
    fn node_bound_comparison() {
        let half: Exponent = "0.5".parse().unwrap();
        assert!(meets_node_bound(16, 16, half));
        assert!(!meets_node_bound(15, 16, half));
        let eps: Exponent = "0.9".parse().unwrap();
        // 2^{24^{0.1}} ≈ 2.59
        assert!(!meets_node_bound(2, 24, eps));
        assert!(meets_node_bound(3, 24, eps));
        // 1024^{0.1} = 2 exactly
        assert!(meets_node_bound(4, 1024, eps));
        assert!(!meets_node_bound(3, 1024, eps));
    }

    #[test]
    fn half_range() {
        assert_eq!(half_range_probability(2), 0.5);
        // M(1) = 3, ⌊3/2⌋ = 1
        assert!((half_range_probability(1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_tail_is_deterministic() {
        let a = simulate_binomial_tail(100, 0.5, 0.1, 1000, 3).unwrap();
        let b = simulate_binomial_tail(100, 0.5, 0.1, 1000, 3).unwrap();
        assert_eq!(a, b);
        assert!(simulate_binomial_tail(10, 1.5, 0.1, 10, 0).is_err());
        assert_eq!(simulate_binomial_tail(10, 0.5, -1.0, 50, 0).unwrap(), 1.0);
    }
}
