//! Per-slot cost records and the statistics computed from them.

use crate::allocation::Action;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::workload::SpProfile;

/// One row of a run trace.
///
/// `proportional_misses` and `optimal_misses` are the misses the static
/// proportional and optimal partitions would have had on the very same
/// requests, which makes policy comparisons free of workload noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotRecord<T> {
    pub slot: u64,
    pub requests: u64,
    pub misses: u64,
    pub perturbation: u64,
    /// `None` for policies that do not act through single transfers.
    pub action: Option<Action>,
    pub epsilon: T,
    pub alpha: T,
    pub batch_n: usize,
    pub theta: Vec<u64>,
    pub proportional_misses: u64,
    pub optimal_misses: u64,
}

impl<T> SlotRecord<T> {
    pub fn cost(&self) -> u64 {
        self.misses + self.perturbation
    }
}

/// Contiguous run of slot records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostSeries<T> {
    records: Vec<SlotRecord<T>>,
}

impl<T> CostSeries<T> {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
        }
    }

    /// Appends a record; slot indices must follow on from the previous one.
    pub fn push(&mut self, record: SlotRecord<T>) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.slot != last.slot + 1 {
                return Err(Error::InvalidConfig(format!(
                    "slot {} does not follow slot {}",
                    record.slot, last.slot
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[SlotRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The last `slots` records (or all of them if the series is shorter).
    pub fn tail(&self, slots: usize) -> &[SlotRecord<T>] {
        &self.records[self.records.len().saturating_sub(slots)..]
    }

    /// Cumulative cost: all misses plus all refill traffic.
    pub fn cumulative_cost(&self) -> u64 {
        self.records.iter().map(SlotRecord::cost).sum()
    }
}

/// Traffic totals over a window, the inputs of every ratio below.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WindowTotals {
    pub requests: u64,
    pub misses: u64,
    pub perturbation: u64,
    pub proportional_misses: u64,
    pub optimal_misses: u64,
}

impl WindowTotals {
    pub fn of<T>(window: &[SlotRecord<T>]) -> Self {
        window.iter().fold(Self::default(), |acc, r| Self {
            requests: acc.requests + r.requests,
            misses: acc.misses + r.misses,
            perturbation: acc.perturbation + r.perturbation,
            proportional_misses: acc.proportional_misses + r.proportional_misses,
            optimal_misses: acc.optimal_misses + r.optimal_misses,
        })
    }

    pub fn cost(&self) -> u64 {
        self.misses + self.perturbation
    }

    fn ratio<T: Real>(&self, numerator: u64) -> Result<T> {
        if self.requests == 0 {
            return Err(Error::UndefinedRatio("no requests in window"));
        }
        Ok(T::of_u64(numerator) / T::of_u64(self.requests))
    }

    pub fn normalized_cost<T: Real>(&self) -> Result<T> {
        self.ratio(self.cost())
    }

    pub fn proportional_cost<T: Real>(&self) -> Result<T> {
        self.ratio(self.proportional_misses)
    }

    pub fn optimal_cost<T: Real>(&self) -> Result<T> {
        self.ratio(self.optimal_misses)
    }

    pub fn gain<T: Real>(&self) -> Result<T> {
        gain_vs_proportional(T::of_u64(self.cost()), T::of_u64(self.proportional_misses))
    }
}

/// Upstream objects (misses and refills) per requested object.
pub fn normalized_cost<T: Real>(window: &[SlotRecord<T>]) -> Result<T> {
    WindowTotals::of(window).normalized_cost()
}

/// Trailing-window normalized cost at every slot.
///
/// Slot `k` aggregates slots `k + 1 - window ..= k` (fewer at the start). The
/// ratio is taken over window totals, not averaged per slot. Windows without
/// any request yield NaN.
pub fn sliding_window_avg<T: Real>(series: &[SlotRecord<T>], window: usize) -> Vec<T> {
    let window = window.max(1);
    let mut requests = Vec::with_capacity(series.len() + 1);
    let mut costs = Vec::with_capacity(series.len() + 1);
    requests.push(0u64);
    costs.push(0u64);
    for r in series {
        requests.push(requests.last().unwrap() + r.requests);
        costs.push(costs.last().unwrap() + r.cost());
    }
    (1..=series.len())
        .map(|end| {
            let start = end.saturating_sub(window);
            let req = requests[end] - requests[start];
            if req == 0 {
                T::nan()
            } else {
                T::of_u64(costs[end] - costs[start]) / T::of_u64(req)
            }
        })
        .collect()
}

/// Relative saving against the proportional partition:
/// `(proportional - policy) / proportional`.
pub fn gain_vs_proportional<T: Real>(policy_cost: T, proportional_cost: T) -> Result<T> {
    if !(proportional_cost > T::zero()) {
        return Err(Error::UndefinedRatio("proportional cost is zero"));
    }
    Ok((proportional_cost - policy_cost) / proportional_cost)
}

/// Jain's index with the providers that were left out.
#[derive(Clone, Debug, PartialEq)]
pub struct Fairness<T> {
    pub index: T,
    /// 0-based providers without cacheable demand, which cannot be normalized.
    pub excluded: Vec<usize>,
}

/// Jain's fairness index of slots normalized by cacheable demand,
/// `x_p = theta_p / (zeta_p lambda f_p)`, `J = (sum x)^2 / (P sum x^2)`.
pub fn jain_fairness<T: Real>(
    theta: &[T],
    profiles: &[SpProfile<T>],
    lambda: T,
) -> Result<Fairness<T>> {
    if theta.len() != profiles.len() {
        return Err(Error::InvalidAllocation(format!(
            "{} shares for {} providers",
            theta.len(),
            profiles.len()
        )));
    }
    let mut excluded = Vec::new();
    let mut xs = Vec::with_capacity(theta.len());
    for (p, (&t, profile)) in theta.iter().zip(profiles).enumerate() {
        let demand = profile.cacheable_share() * lambda;
        if demand > T::zero() {
            xs.push(t / demand);
        } else {
            excluded.push(p);
        }
    }
    if !excluded.is_empty() {
        log::warn!(
            "providers {:?} have no cacheable demand and are excluded from the fairness index",
            excluded.iter().map(|p| p + 1).collect::<Vec<_>>()
        );
    }
    let sum: T = xs.iter().copied().sum();
    let sum_sq: T = xs.iter().map(|&x| x * x).sum();
    if xs.is_empty() || !(sum_sq > T::zero()) {
        return Err(Error::UndefinedRatio("fairness of an all-zero allocation"));
    }
    Ok(Fairness {
        index: sum * sum / (T::of_usize(xs.len()) * sum_sq),
        excluded,
    })
}

/// Per-provider mean of the partitions in force over `window`.
pub fn mean_theta<T: Real, U>(window: &[SlotRecord<U>]) -> Option<Vec<T>> {
    let first = window.first()?;
    let mut sums = vec![0u128; first.theta.len()];
    for r in window {
        for (s, &t) in sums.iter_mut().zip(&r.theta) {
            *s += u128::from(t);
        }
    }
    let n = T::of_usize(window.len());
    Some(
        sums.into_iter()
            .map(|s| T::from_u128(s).unwrap_or_else(T::nan) / n)
            .collect(),
    )
}
