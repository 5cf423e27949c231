//! Reference allocators: fixed partitions and a two-sided SPSA search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{initial_allocation, largest_remainder, Allocation, InitialMode};
use crate::error::{Error, Result};
use crate::oracle::optimal_allocation_greedy;
use crate::scalar::Real;
use crate::workload::Workload;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticKind {
    Proportional,
    Uniform,
    /// Slot-level optimum from the analytic oracle.
    Optimal,
}

/// Partition held fixed for a whole run.
///
/// The optimal partition is computed at single-slot resolution, so it is
/// returned with a step of 1 regardless of `delta`.
pub fn static_policy<T: Real>(
    kind: StaticKind,
    workload: &Workload<T>,
    capacity: u64,
    delta: u64,
) -> Result<Allocation> {
    match kind {
        StaticKind::Proportional => {
            initial_allocation(InitialMode::Proportional, workload.profiles(), capacity, delta)
        }
        StaticKind::Uniform => {
            initial_allocation(InitialMode::Uniform, workload.profiles(), capacity, delta)
        }
        StaticKind::Optimal => {
            Allocation::new(optimal_allocation_greedy(capacity, workload), 1, capacity)
        }
    }
}

/// Gain sequences `a_k = a / (k + 1 + A0)^alpha` and `c_k = c / (k + 1)^gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig<T> {
    pub gain_a: T,
    pub gain_c: T,
    pub decay_alpha: T,
    pub decay_gamma: T,
    pub stability: T,
}

impl<T: Real> SpsaConfig<T> {
    /// Common textbook exponents with gains scaled to the cache: `a = K/10`,
    /// `c = 2 delta`, `A0 = 60`.
    pub fn standard(capacity: u64, delta: u64) -> Self {
        Self {
            gain_a: T::of_u64(capacity) / T::of(10.0),
            gain_c: T::of_u64(2 * delta),
            decay_alpha: T::of(0.602),
            decay_gamma: T::of(0.101),
            stability: T::of(60.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: T| x > T::zero() && x <= T::one();
        if !(self.gain_a > T::zero() && self.gain_c > T::zero()) {
            return Err(Error::InvalidConfig("SPSA gains must be positive".into()));
        }
        if !in_unit(self.decay_alpha) || !in_unit(self.decay_gamma) {
            return Err(Error::InvalidConfig(
                "SPSA decay exponents must lie in (0, 1]".into(),
            ));
        }
        if !(self.stability >= T::zero()) {
            return Err(Error::InvalidConfig(
                "SPSA stability constant must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn step_size(&self, k: u64) -> T {
        self.gain_a / (T::of_u64(k + 1) + self.stability).powf(self.decay_alpha)
    }

    pub fn perturbation_size(&self, k: u64) -> T {
        self.gain_c / T::of_u64(k + 1).powf(self.decay_gamma)
    }
}

/// Random +-1 entries on the first `P - 1` providers; the last entry balances
/// the sum to zero so perturbed partitions keep the full capacity.
pub fn rademacher_direction<T: Real, R: Rng + ?Sized>(num_sps: usize, rng: &mut R) -> Vec<T> {
    let mut d: Vec<T> = (0..num_sps.saturating_sub(1))
        .map(|_| if rng.random::<bool>() { T::one() } else { -T::one() })
        .collect();
    if num_sps > 0 {
        let balance = -d.iter().copied().fold(T::zero(), |a, b| a + b);
        d.push(balance);
    }
    d
}

/// Euclidean projection of `v` onto `{x >= 0, sum x = total}`.
pub fn project_to_simplex<T: Real>(v: &[T], total: T) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumulative = T::zero();
    let mut shift = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumulative = cumulative + u;
        let candidate = (cumulative - total) / T::of_usize(i + 1);
        if u - candidate > T::zero() {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(T::zero())).collect()
}

/// Nearest feasible partition on the `delta` grid: simplex projection, then
/// largest-remainder rounding in units of `delta`.
pub fn project_to_grid<T: Real>(v: &[T], delta: u64, capacity: u64) -> Result<Allocation> {
    let on_simplex = project_to_simplex(v, T::of_u64(capacity));
    let quotas: Vec<f64> = on_simplex
        .iter()
        .map(|x| x.to_f64().unwrap_or(0.0) / delta as f64)
        .collect();
    let units = largest_remainder(&quotas, capacity / delta);
    Allocation::new(units.into_iter().map(|u| u * delta).collect(), delta, capacity)
}

/// One two-sided SPSA update of the continuous iterate `theta`.
///
/// `costs` are the nominal costs measured at `theta + c_k d` and
/// `theta - c_k d`. The first `P - 1` coordinates move along the estimated
/// gradient, the last one absorbs the difference, and the result is projected
/// back onto the capacity simplex. Non-finite updates leave `theta` in place.
pub fn spsa_step<T: Real>(
    theta: &[T],
    k: u64,
    costs: (T, T),
    direction: &[T],
    cfg: &SpsaConfig<T>,
    capacity: u64,
) -> Vec<T> {
    let p = theta.len();
    if p < 2 {
        return theta.to_vec();
    }
    let a_k = cfg.step_size(k);
    let c_k = cfg.perturbation_size(k);
    let diff = costs.0 - costs.1;
    let mut next = theta.to_vec();
    for i in 0..p - 1 {
        let g = diff / (T::of(2.0) * c_k * direction[i]);
        next[i] = theta[i] - a_k * g;
    }
    let free: T = next[..p - 1].iter().copied().fold(T::zero(), |a, b| a + b);
    next[p - 1] = T::of_u64(capacity) - free;
    if next.iter().any(|x| !x.is_finite()) {
        return theta.to_vec();
    }
    project_to_simplex(&next, T::of_u64(capacity))
}

/// Objects downloaded when moving from `old` to `new`: every provider pays for
/// the slots it gains.
pub fn refill_cost(old: &[u64], new: &[u64]) -> u64 {
    old.iter()
        .zip(new)
        .map(|(&o, &n)| n.saturating_sub(o))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Plus,
    Minus,
}

/// Stateful SPSA policy spanning two slots per iteration: the first slot runs
/// `theta + c_k d`, the second `theta - c_k d`, then the iterate moves.
#[derive(Clone, Debug)]
pub struct SpsaAllocator<T> {
    config: SpsaConfig<T>,
    theta: Vec<T>,
    iteration: u64,
    direction: Vec<T>,
    plus_cost: T,
    phase: Phase,
    delta: u64,
    capacity: u64,
}

impl<T: Real> SpsaAllocator<T> {
    pub fn new(config: SpsaConfig<T>, start: &Allocation) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            theta: start.theta().iter().map(|&t| T::of_u64(t)).collect(),
            iteration: 0,
            direction: Vec::new(),
            plus_cost: T::zero(),
            phase: Phase::Plus,
            delta: start.delta(),
            capacity: start.capacity(),
        })
    }

    pub fn iterate(&self) -> &[T] {
        &self.theta
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn perturbation_size(&self) -> T {
        self.config.perturbation_size(self.iteration)
    }

    pub fn step_size(&self) -> T {
        self.config.step_size(self.iteration)
    }

    /// Partition to put in force for the coming slot. A fresh direction is
    /// drawn from `rng` at the start of each iteration.
    pub fn next_allocation<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Allocation> {
        if self.phase == Phase::Plus {
            self.direction = rademacher_direction(self.theta.len(), rng);
        }
        let c_k = self.config.perturbation_size(self.iteration);
        let sign = match self.phase {
            Phase::Plus => T::one(),
            Phase::Minus => -T::one(),
        };
        let point: Vec<T> = self
            .theta
            .iter()
            .zip(&self.direction)
            .map(|(&t, &d)| t + sign * c_k * d)
            .collect();
        project_to_grid(&point, self.delta, self.capacity)
    }

    /// Reports the nominal cost measured under the last allocation.
    pub fn observe(&mut self, cost: T) {
        match self.phase {
            Phase::Plus => {
                self.plus_cost = cost;
                self.phase = Phase::Minus;
            }
            Phase::Minus => {
                self.theta = spsa_step(
                    &self.theta,
                    self.iteration,
                    (self.plus_cost, cost),
                    &self.direction,
                    &self.config,
                    self.capacity,
                );
                self.iteration += 1;
                self.phase = Phase::Plus;
            }
        }
    }
}
