//! Cache partition state, the transfer action space, and per-slot cost.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::workload::{RequestBatch, RequestKind, SpProfile};

/// Slots held by each provider. Every share is a multiple of `delta` and the
/// shares always add up to the full capacity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    theta: Vec<u64>,
    delta: u64,
    capacity: u64,
}

impl Allocation {
    pub fn new(theta: Vec<u64>, delta: u64, capacity: u64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidAllocation("no providers".into()));
        }
        if delta == 0 || capacity == 0 {
            return Err(Error::InvalidAllocation(
                "capacity and delta must be positive".into(),
            ));
        }
        if !capacity.is_multiple_of(delta) {
            return Err(Error::InvalidAllocation(format!(
                "delta {delta} does not divide capacity {capacity}"
            )));
        }
        if let Some(p) = theta.iter().position(|t| t % delta != 0) {
            return Err(Error::InvalidAllocation(format!(
                "provider {} holds {} slots, not a multiple of {delta}",
                p + 1,
                theta[p]
            )));
        }
        let total: u64 = theta.iter().sum();
        if total != capacity {
            return Err(Error::InvalidAllocation(format!(
                "shares sum to {total}, capacity is {capacity}"
            )));
        }
        Ok(Self {
            theta,
            delta,
            capacity,
        })
    }

    pub fn theta(&self) -> &[u64] {
        &self.theta
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn num_sps(&self) -> usize {
        self.theta.len()
    }

    pub fn is_feasible(&self, action: Action) -> bool {
        match action {
            Action::Null => true,
            Action::Transfer { from, to } => {
                from != to
                    && from < self.theta.len()
                    && to < self.theta.len()
                    && self.theta[from] >= self.delta
            }
        }
    }

    /// Feasible actions: `Null` first, then transfers in `(from, to)` order.
    pub fn actions(&self) -> Vec<Action> {
        let p = self.theta.len();
        let mut out = Vec::with_capacity(1 + p * (p - 1));
        out.push(Action::Null);
        out.extend(
            Action::transfers(p).filter(|a| self.is_feasible(*a)),
        );
        out
    }

    pub fn apply(&self, action: Action) -> Result<Self> {
        if !self.is_feasible(action) {
            return Err(Error::InfeasibleAction {
                action,
                theta: self.theta.clone(),
            });
        }
        let mut next = self.clone();
        if let Action::Transfer { from, to } = action {
            next.theta[from] -= self.delta;
            next.theta[to] += self.delta;
        }
        Ok(next)
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, t) in self.theta.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// Either leave the partition alone or move `delta` slots between two providers.
///
/// Provider indices are 0-based in code; the textual form is 1-based (`"1->2"`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    #[default]
    Null,
    Transfer { from: usize, to: usize },
}

impl Action {
    /// Every transfer among `num_sps` providers, in `(from, to)` order.
    pub fn transfers(num_sps: usize) -> impl Iterator<Item = Action> {
        (0..num_sps).flat_map(move |from| {
            (0..num_sps)
                .filter(move |&to| to != from)
                .map(move |to| Action::Transfer { from, to })
        })
    }

    /// Size of the full action alphabet for `num_sps` providers.
    pub fn count(num_sps: usize) -> usize {
        1 + num_sps * num_sps.saturating_sub(1)
    }

    /// Position in the full alphabet: `Null` is 0, transfers follow in `(from, to)` order.
    pub fn index(self, num_sps: usize) -> usize {
        match self {
            Action::Null => 0,
            Action::Transfer { from, to } => {
                let offset = if to < from { to } else { to - 1 };
                1 + from * (num_sps - 1) + offset
            }
        }
    }

    pub fn from_index(index: usize, num_sps: usize) -> Option<Action> {
        if index == 0 {
            return Some(Action::Null);
        }
        if num_sps < 2 || index >= Action::count(num_sps) {
            return None;
        }
        let i = index - 1;
        let from = i / (num_sps - 1);
        let offset = i % (num_sps - 1);
        let to = if offset < from { offset } else { offset + 1 };
        Some(Action::Transfer { from, to })
    }

    pub fn is_null(self) -> bool {
        self == Action::Null
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Null => write!(f, "null"),
            Action::Transfer { from, to } => write!(f, "{}->{}", from + 1, to + 1),
        }
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "null" {
            return Ok(Action::Null);
        }
        let (from, to) = s
            .split_once("->")
            .ok_or_else(|| format!("unrecognized action {s:?}"))?;
        let parse = |x: &str| -> std::result::Result<usize, String> {
            let v: usize = x
                .trim()
                .parse()
                .map_err(|_| format!("bad provider index {x:?}"))?;
            v.checked_sub(1).ok_or_else(|| "provider indices start at 1".to_string())
        };
        let (from, to) = (parse(from)?, parse(to)?);
        if from == to {
            return Err(format!("transfer from provider {} to itself", from + 1));
        }
        Ok(Action::Transfer { from, to })
    }
}

/// Feasible actions in `alloc`, `Null` first.
pub fn enumerate_actions(alloc: &Allocation) -> Vec<Action> {
    alloc.actions()
}

pub fn apply_action(alloc: &Allocation, action: Action) -> Result<Allocation> {
    alloc.apply(action)
}

/// Objects the gaining provider downloads to fill its new slots.
pub fn perturbation_cost(action: Action, delta: u64) -> u64 {
    match action {
        Action::Null => 0,
        Action::Transfer { .. } => delta,
    }
}

/// Requests in `batch` not served from the cache under `theta`.
///
/// A provider holding `theta_p` slots caches its `theta_p` most popular
/// objects, so a request hits iff it is cacheable with rank at most `theta_p`.
pub fn count_misses(batch: &RequestBatch, theta: &[u64]) -> u64 {
    batch
        .events
        .iter()
        .filter(|e| match e.kind {
            RequestKind::Cacheable { rank } => rank > theta[e.sp],
            RequestKind::Uncacheable => true,
        })
        .count() as u64
}

/// Traffic recorded for one slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SlotOutcome {
    pub total_requests: u64,
    pub misses: u64,
    pub perturbation_cost: u64,
}

impl SlotOutcome {
    /// Instantaneous cost: upstream objects fetched for misses plus refills.
    pub fn cost(&self) -> u64 {
        self.misses + self.perturbation_cost
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    #[default]
    Proportional,
    Uniform,
}

/// Starting partition in units of `delta`.
///
/// Proportional mode splits by request share with largest-remainder rounding,
/// ties going to the lower index. Uniform mode splits evenly and hands leftover
/// units to the lowest indices.
pub fn initial_allocation<T: Real>(
    mode: InitialMode,
    profiles: &[SpProfile<T>],
    capacity: u64,
    delta: u64,
) -> Result<Allocation> {
    if profiles.is_empty() {
        return Err(Error::InvalidAllocation("no providers".into()));
    }
    if delta == 0 || !capacity.is_multiple_of(delta) {
        return Err(Error::InvalidAllocation(format!(
            "delta {delta} does not divide capacity {capacity}"
        )));
    }
    let units = capacity / delta;
    let p = profiles.len() as u64;
    let shares: Vec<u64> = match mode {
        InitialMode::Uniform => (0..p)
            .map(|i| units / p + u64::from(i < units % p))
            .collect(),
        InitialMode::Proportional => {
            let quotas: Vec<f64> = profiles
                .iter()
                .map(|pr| pr.request_share.to_f64().unwrap_or(0.0) * units as f64)
                .collect();
            largest_remainder(&quotas, units)
        }
    };
    Allocation::new(shares.into_iter().map(|u| u * delta).collect(), delta, capacity)
}

/// Rounds non-negative `quotas` to integers summing to `total`.
///
/// Floors every quota, then hands the missing units to the largest fractional
/// parts (lower index first on ties). If the floors already exceed `total`,
/// units are taken back from the smallest fractional parts.
pub(crate) fn largest_remainder(quotas: &[f64], total: u64) -> Vec<u64> {
    let mut out: Vec<u64> = quotas.iter().map(|q| q.max(0.0).floor() as u64).collect();
    let frac: Vec<f64> = quotas
        .iter()
        .zip(&out)
        .map(|(q, f)| q.max(0.0) - *f as f64)
        .collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
    let assigned: u64 = out.iter().sum();
    if assigned < total {
        let mut missing = total - assigned;
        // More than one pass only if the quotas themselves undershoot.
        while missing > 0 {
            for &i in &order {
                if missing == 0 {
                    break;
                }
                out[i] += 1;
                missing -= 1;
            }
        }
    } else if assigned > total {
        let mut excess = assigned - total;
        while excess > 0 {
            for &i in order.iter().rev() {
                if excess == 0 {
                    break;
                }
                if out[i] > 0 {
                    out[i] -= 1;
                    excess -= 1;
                }
            }
        }
    }
    out
}

/// A shortest transfer sequence turning `from` into `to`.
///
/// Each step moves `delta` from the lowest-indexed provider with a surplus to
/// the lowest-indexed provider with a deficit, so the sequence has exactly
/// `sum |theta_p - theta'_p| / (2 delta)` steps.
pub fn transfer_path(from: &Allocation, to: &Allocation) -> Result<Vec<Action>> {
    if from.num_sps() != to.num_sps()
        || from.delta() != to.delta()
        || from.capacity() != to.capacity()
    {
        return Err(Error::InvalidAllocation(
            "allocations differ in shape, delta or capacity".into(),
        ));
    }
    let mut current = from.clone();
    let mut path = Vec::new();
    loop {
        let donor = (0..current.num_sps()).find(|&p| current.theta[p] > to.theta[p]);
        let taker = (0..current.num_sps()).find(|&p| current.theta[p] < to.theta[p]);
        match (donor, taker) {
            (Some(d), Some(t)) => {
                let action = Action::Transfer { from: d, to: t };
                current = current.apply(action)?;
                path.push(action);
            }
            _ => return Ok(path),
        }
    }
}
