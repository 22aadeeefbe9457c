//! Ordinary branch-and-bound for `Σ a_j x_j = β`, `x ∈ {0,1}^n`.
//!
//! Every node fixes one more variable in a fixed order. A node with unfixed
//! variables is pruned exactly when its LP relaxation is infeasible, i.e.
//! when `β ∉ [s1, s1 + unfixed_sum]`. No other pruning rule is used.
//!
//! Counting: the root and both children of every expanded node are counted
//! when created, pruned nodes included. A node with every variable fixed is a
//! leaf; its equality is tested (`leaf_checks`) and it is never reported as an
//! LP prune. The first satisfying leaf stops the search.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::numeric::{convert_all, SumValue};

/// Node counts are kept below `2^63`.
pub const MAX_NODE_CAP: u64 = (1 << 63) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchOrder {
    #[default]
    Given,
    AscendingCoefficient,
    DescendingCoefficient,
    Random(u64),
}

impl fmt::Display for BranchOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchOrder::Given => f.write_str("given"),
            BranchOrder::AscendingCoefficient => f.write_str("ascending"),
            BranchOrder::DescendingCoefficient => f.write_str("descending"),
            BranchOrder::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for BranchOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "given" => Ok(BranchOrder::Given),
            "ascending" => Ok(BranchOrder::AscendingCoefficient),
            "descending" => Ok(BranchOrder::DescendingCoefficient),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(BranchOrder::Random)
                .ok_or_else(|| {
                    Error::param(format!(
                        "order must be given, ascending, descending or random:<seed>, got `{s}`"
                    ))
                }),
        }
    }
}

impl BranchOrder {
    /// The permutation of `0..n` in which variables are fixed. Ties in the
    /// sorted orders keep index order.
    pub fn resolve(&self, inst: &Instance) -> Vec<usize> {
        let mut order: Vec<usize> = (0..inst.n()).collect();
        let a = inst.coefficients();
        match *self {
            BranchOrder::Given => {}
            BranchOrder::AscendingCoefficient => order.sort_by(|&i, &j| a[i].cmp(&a[j])),
            BranchOrder::DescendingCoefficient => order.sort_by(|&i, &j| a[j].cmp(&a[i])),
            BranchOrder::Random(seed) => order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstChild {
    #[default]
    ZeroBranch,
    OneBranch,
}

impl FromStr for FirstChild {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "zero_branch" => Ok(FirstChild::ZeroBranch),
            "one" | "one_branch" => Ok(FirstChild::OneBranch),
            _ => Err(Error::param(format!(
                "first child must be zero or one, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveConfig {
    pub order: BranchOrder,
    pub first_child: FirstChild,
    pub node_cap: Option<u64>,
}

impl SolveConfig {
    pub fn with_cap(cap: u64) -> Self {
        SolveConfig {
            node_cap: Some(cap),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Feasible(Vec<u8>),
    Infeasible,
    Capped,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Feasible(_) => "feasible",
            Verdict::Infeasible => "infeasible",
            Verdict::Capped => "capped",
        }
    }

    /// `Some(feasible?)` for a decided search, `None` when capped.
    pub fn decided(&self) -> Option<bool> {
        match self {
            Verdict::Feasible(_) => Some(true),
            Verdict::Infeasible => Some(false),
            Verdict::Capped => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub nodes_created: u64,
    /// Fixed-variable count at the shallowest LP-infeasible node.
    pub min_prune_depth: Option<usize>,
    pub leaf_checks: u64,
}

#[derive(Serialize)]
struct SolveReportWire<'a> {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<&'a [u8]>,
    nodes_created: u64,
    min_prune_depth: Option<usize>,
    leaf_checks: u64,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        let wire = SolveReportWire {
            verdict: self.verdict.name(),
            witness: match &self.verdict {
                Verdict::Feasible(w) => Some(w),
                _ => None,
            },
            nodes_created: self.nodes_created,
            min_prune_depth: self.min_prune_depth,
            leaf_checks: self.leaf_checks,
        };
        serde_json::to_string(&wire).expect("report serialization")
    }
}

/// Variables fixed so far, with the running sums used by the LP test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    pub fixed: BTreeMap<usize, u8>,
    /// `Σ a_i` over variables fixed to one.
    pub s1: BigUint,
    /// `Σ a_i` over unfixed variables.
    pub unfixed_sum: BigUint,
}

impl PartialAssignment {
    pub fn empty(inst: &Instance) -> Self {
        PartialAssignment {
            fixed: BTreeMap::new(),
            s1: BigUint::zero(),
            unfixed_sum: inst.total().clone(),
        }
    }

    /// Fixes `x_j = value`.
    pub fn fix(&mut self, inst: &Instance, j: usize, value: u8) -> Result<()> {
        if j >= inst.n() || value > 1 {
            return Err(Error::param(format!("cannot fix x_{} = {value}", j + 1)));
        }
        if self.fixed.insert(j, value).is_some() {
            return Err(Error::param(format!("x_{} is already fixed", j + 1)));
        }
        let a = &inst.coefficients()[j];
        self.unfixed_sum -= a;
        if value == 1 {
            self.s1 += a;
        }
        Ok(())
    }
}

/// The LP relaxation with the fixed variables pinned is feasible iff
/// `s1 ≤ β ≤ s1 + unfixed_sum`.
pub fn lp_feasible(inst: &Instance, pa: &PartialAssignment) -> bool {
    lp_window(&pa.s1, &pa.unfixed_sum, inst.beta())
}

#[inline]
fn lp_window<T: SumValue>(s1: &T, rest: &T, beta: &T) -> bool {
    s1 <= beta && *beta <= s1.clone() + rest.clone()
}

pub fn solve(inst: &Instance, cfg: &SolveConfig) -> Result<SolveReport> {
    let cap = cfg.node_cap.unwrap_or(MAX_NODE_CAP);
    if cap == 0 || cap > MAX_NODE_CAP {
        return Err(Error::param(format!(
            "node cap must be in 1..=2^63-1, got {cap}"
        )));
    }
    let order = cfg.order.resolve(inst);
    let (a, beta, total) = (inst.coefficients(), inst.beta(), inst.total());
    if let Some((a, beta)) = convert_all::<u128>(a, beta, total) {
        Ok(search(&a, beta, &order, cfg.first_child, cap))
    } else {
        Ok(search(a, beta.clone(), &order, cfg.first_child, cap))
    }
}

struct Frame<T> {
    depth: usize,
    value: u8,
    s1: T,
    rest: T,
}

fn search<T: SumValue>(
    a: &[T],
    beta: T,
    order: &[usize],
    first_child: FirstChild,
    cap: u64,
) -> SolveReport {
    let n = a.len();
    let total = a.iter().cloned().fold(T::zero(), |acc, x| acc + x);
    let mut x = vec![0u8; n];
    let mut report = SolveReport {
        verdict: Verdict::Infeasible,
        nodes_created: 1,
        min_prune_depth: None,
        leaf_checks: 0,
    };
    let (first, second) = match first_child {
        FirstChild::ZeroBranch => (0u8, 1u8),
        FirstChild::OneBranch => (1, 0),
    };
    let mut stack = vec![Frame {
        depth: 0,
        value: 0,
        s1: T::zero(),
        rest: total,
    }];
    while let Some(node) = stack.pop() {
        if node.depth > 0 {
            x[order[node.depth - 1]] = node.value;
        }
        if node.depth == n {
            report.leaf_checks += 1;
            if node.s1 == beta {
                report.verdict = Verdict::Feasible(x);
                return report;
            }
            continue;
        }
        if !lp_window(&node.s1, &node.rest, &beta) {
            report.min_prune_depth = Some(match report.min_prune_depth {
                Some(d) => d.min(node.depth),
                None => node.depth,
            });
            continue;
        }
        if report.nodes_created + 2 > cap {
            report.verdict = Verdict::Capped;
            return report;
        }
        report.nodes_created += 2;
        let aj = &a[order[node.depth]];
        let rest = node.rest - aj.clone();
        let child = |value: u8| Frame {
            depth: node.depth + 1,
            value,
            s1: if value == 1 {
                node.s1.clone() + aj.clone()
            } else {
                node.s1.clone()
            },
            rest: rest.clone(),
        };
        // Pushed second is popped first.
        let (c2, c1) = (child(second), child(first));
        stack.push(c2);
        stack.push(c1);
    }
    report
}
