//! Subset-sum instances and the random generation procedure.
//!
//! Coefficients are drawn iid uniform on `{1, …, M}` with `M = ⌊10^{n/2}⌋`
//! and the right-hand side is `β = ⌊r Σ a_j⌋` (or the ceiling, on request).
//! Everything is exact: `M` comes from an integer square root, `r` is a
//! fraction, and sampling rejects out-of-range blocks instead of reducing
//! modulo `M`.
//!
//! Randomness: [`rand_chacha::ChaCha8Rng::seed_from_u64`] on the config seed.
//! A coefficient is drawn by taking `⌈bits(M−1)/64⌉` successive `next_u64`
//! words (least significant first), masking the top word to `bits(M−1)` bits,
//! and retrying while the value is `≥ M`; the result plus one is `a_j`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::log2_big;
use crate::params::{check_open_unit, parse_ratio, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    #[default]
    Floor,
    Ceil,
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::Floor => "floor",
            Rounding::Ceil => "ceil",
        })
    }
}

impl FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(Rounding::Floor),
            "ceil" => Ok(Rounding::Ceil),
            _ => Err(Error::param(format!(
                "rounding must be floor or ceil, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub r: Ratio,
    pub rounding: Rounding,
    pub seed: u64,
    /// Replaces `⌊10^{n/2}⌋` as the coefficient upper bound when set.
    pub m_override: Option<BigUint>,
}

impl GeneratorConfig {
    pub fn new(n: usize, r: Ratio, seed: u64) -> Self {
        GeneratorConfig {
            n,
            r,
            rounding: Rounding::Floor,
            seed,
            m_override: None,
        }
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        check_open_unit(self.r)?;
        if matches!(&self.m_override, Some(m) if m.is_zero()) {
            return Err(Error::param("M override must be at least 1"));
        }
        Ok(())
    }

    /// The coefficient upper bound actually used.
    pub fn upper_bound(&self) -> BigUint {
        self.m_override.clone().unwrap_or_else(|| compute_m(self.n))
    }
}

/// A subset-sum feasibility instance `Σ a_j x_j = β`, `x ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    a: Vec<BigUint>,
    beta: BigUint,
    total: BigUint,
    meta: Option<GeneratorConfig>,
}

impl Instance {
    /// Builds a hand-made instance. Every coefficient must be positive.
    pub fn new(a: Vec<BigUint>, beta: BigUint) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::instance("at least one coefficient is required"));
        }
        if let Some(j) = a.iter().position(Zero::is_zero) {
            return Err(Error::instance(format!("coefficient a_{} is zero", j + 1)));
        }
        let total = a.iter().sum();
        Ok(Instance {
            a,
            beta,
            total,
            meta: None,
        })
    }

    /// Convenience constructor for small hand-built instances.
    pub fn from_u64(a: &[u64], beta: u64) -> Result<Self> {
        Instance::new(
            a.iter().map(|&x| BigUint::from(x)).collect(),
            BigUint::from(beta),
        )
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.a
    }

    pub fn beta(&self) -> &BigUint {
        &self.beta
    }

    /// `Σ a_j`.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn meta(&self) -> Option<&GeneratorConfig> {
        self.meta.as_ref()
    }

    /// Whether `x` is a 0-1 vector of length `n` with `Σ a_j x_j = β`.
    pub fn is_witness(&self, x: &[u8]) -> bool {
        if x.len() != self.n() || x.iter().any(|&v| v > 1) {
            return false;
        }
        let sum: BigUint = self
            .a
            .iter()
            .zip(x)
            .filter(|(_, &v)| v == 1)
            .map(|(a, _)| a)
            .sum();
        sum == self.beta
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceWire::from(self)).expect("instance serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        wire.try_into()
    }
}

/// `⌊10^{n/2}⌋`, exact for every `n`.
pub fn compute_m(n: usize) -> BigUint {
    let ten = BigUint::from(10u32);
    if n.is_multiple_of(2) {
        ten.pow((n / 2) as u32)
    } else {
        ten.pow(n as u32).sqrt()
    }
}

/// `⌊r Σ a⌋` or `⌈r Σ a⌉`, exact.
pub fn compute_beta(a: &[BigUint], r: Ratio, rounding: Rounding) -> Result<BigUint> {
    if a.is_empty() {
        return Err(Error::param("coefficient sequence is empty"));
    }
    check_open_unit(r)?;
    let total: BigUint = a.iter().sum();
    let scaled = total * BigUint::from(*r.numer());
    let q = BigUint::from(*r.denom());
    Ok(match rounding {
        Rounding::Floor => scaled / q,
        Rounding::Ceil => Integer::div_ceil(&scaled, &q),
    })
}

/// Uniform draw from `{1, …, m}` by rejection from fixed-width blocks.
pub fn sample_uniform<R: RngCore>(rng: &mut R, m: &BigUint) -> BigUint {
    assert!(!m.is_zero(), "empty range");
    if m.is_one() {
        return BigUint::one();
    }
    let span = m - 1u32;
    let bits = span.bits();
    let words = bits.div_ceil(64) as usize;
    let top_bits = bits - 64 * (words as u64 - 1);
    let top_mask = if top_bits == 64 {
        u64::MAX
    } else {
        (1u64 << top_bits) - 1
    };
    let mut digits = vec![0u64; words];
    loop {
        for d in digits.iter_mut() {
            *d = rng.next_u64();
        }
        digits[words - 1] &= top_mask;
        let x = biguint_from_u64_digits(&digits);
        if &x < m {
            return x + 1u32;
        }
    }
}

fn biguint_from_u64_digits(digits: &[u64]) -> BigUint {
    let u32s: Vec<u32> = digits
        .iter()
        .flat_map(|&d| [d as u32, (d >> 32) as u32])
        .collect();
    BigUint::from_slice(&u32s)
}

/// Draws an instance. Identical configs give identical instances.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance> {
    cfg.validate()?;
    let m = cfg.upper_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a: Vec<BigUint> = (0..cfg.n).map(|_| sample_uniform(&mut rng, &m)).collect();
    let beta = compute_beta(&a, cfg.r, cfg.rounding)?;
    let mut inst = Instance::new(a, beta)?;
    inst.meta = Some(cfg.clone());
    Ok(inst)
}

/// `n / log₂ max a_j`.
pub fn density(inst: &Instance) -> Result<f64> {
    let max = inst.a.iter().max().expect("nonempty");
    if max.is_one() {
        return Err(Error::instance("density undefined when max a_j = 1"));
    }
    Ok(inst.n() as f64 / log2_big(max))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceWire {
    n: usize,
    a: Vec<String>,
    beta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rounding: Option<Rounding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m_override: Option<String>,
}

impl From<&Instance> for InstanceWire {
    fn from(inst: &Instance) -> Self {
        let meta = inst.meta.as_ref();
        InstanceWire {
            n: inst.n(),
            a: inst.a.iter().map(ToString::to_string).collect(),
            beta: inst.beta.to_string(),
            r: meta.map(|m| m.r.to_string()),
            rounding: meta.map(|m| m.rounding),
            seed: meta.map(|m| m.seed),
            m_override: meta.and_then(|m| m.m_override.as_ref().map(ToString::to_string)),
        }
    }
}

/// Canonical decimal: digits only, no leading zeros (except "0" itself).
fn parse_decimal(field: &str, s: &str) -> Result<BigUint> {
    let canonical =
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(Error::instance(format!(
            "{field}: `{s}` is not a canonical decimal"
        )));
    }
    Ok(s.parse().expect("validated digits"))
}

impl TryFrom<InstanceWire> for Instance {
    type Error = Error;

    fn try_from(w: InstanceWire) -> Result<Self> {
        if w.n != w.a.len() {
            return Err(Error::instance(format!(
                "n = {} but {} coefficients given",
                w.n,
                w.a.len()
            )));
        }
        let a =
            w.a.iter()
                .enumerate()
                .map(|(j, s)| parse_decimal(&format!("a[{j}]"), s))
                .collect::<Result<Vec<_>>>()?;
        let beta = parse_decimal("beta", &w.beta)?;
        let mut inst = Instance::new(a, beta)?;
        inst.meta = match (w.r, w.rounding, w.seed) {
            (None, None, None) if w.m_override.is_none() => None,
            (Some(r), Some(rounding), Some(seed)) => {
                let ratio = parse_ratio(&r)?;
                if ratio.to_string() != r {
                    return Err(Error::instance(format!("r: `{r}` is not in lowest terms")));
                }
                let cfg = GeneratorConfig {
                    n: w.n,
                    r: ratio,
                    rounding,
                    seed,
                    m_override: w
                        .m_override
                        .as_deref()
                        .map(|s| parse_decimal("m_override", s))
                        .transpose()?,
                };
                cfg.validate()?;
                Some(cfg)
            }
            _ => {
                return Err(Error::instance(
                    "generator metadata needs all of r, rounding and seed",
                ))
            }
        };
        Ok(inst)
    }
}
