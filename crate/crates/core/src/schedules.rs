//! Slot-indexed schedules for the learning rate, the exploration rate and the
//! replay mini-batch size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Constants of the three schedules. `horizon` is measured in slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ScheduleConfig<T> {
    pub alpha0: T,
    /// Offset `M` slowing the learning-rate decay.
    pub alpha_offset: T,
    /// Exponent excess `xi`: each step multiplies by `(1 - 1/(1+M+k))^(1/2+xi)`.
    pub alpha_xi: T,
    pub alpha_floor: T,
    pub epsilon0: T,
    pub epsilon_a: T,
    pub epsilon_b: T,
    pub epsilon_c: T,
    pub batch_max: usize,
    pub batch_a: T,
    pub batch_b: T,
    pub batch_c: T,
    pub horizon: u64,
}

impl<T: Real> Default for ScheduleConfig<T> {
    fn default() -> Self {
        Self {
            alpha0: T::of(0.9),
            alpha_offset: T::of(3600.0),
            alpha_xi: T::of(0.01),
            alpha_floor: T::of(0.2),
            epsilon0: T::one(),
            epsilon_a: T::of(0.3),
            epsilon_b: T::of(0.1),
            epsilon_c: T::of(0.01),
            batch_max: 100,
            batch_a: T::of(0.15),
            batch_b: T::of(0.3),
            batch_c: T::of(0.7),
            // Six hours of 0.25 s slots.
            horizon: 86_400,
        }
    }
}

impl<T: Real> ScheduleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha_floor > T::zero() && self.alpha_floor <= self.alpha0 && self.alpha0 <= T::one()) {
            return fail(format!(
                "learning rate needs 0 < floor ({}) <= alpha0 ({}) <= 1",
                self.alpha_floor, self.alpha0
            ));
        }
        if !(self.alpha_offset >= T::zero()) || !(self.alpha_xi > -T::of(0.5)) {
            return fail("learning-rate decay constants out of range".into());
        }
        if !(self.epsilon0 > T::zero() && self.epsilon0 <= T::one()) {
            return fail(format!("epsilon0 {} outside (0, 1]", self.epsilon0));
        }
        if !(self.epsilon_b > T::zero()) || !(self.batch_b > T::zero()) {
            return fail("schedule slope constants B must be positive".into());
        }
        if self.horizon == 0 {
            return fail("schedule horizon must be at least one slot".into());
        }
        Ok(())
    }

    /// Upper clamp of the mini-batch size: `N_max + ceil(C)`.
    pub fn batch_ceiling(&self) -> usize {
        self.batch_max + self.batch_c.max(T::zero()).ceil().to_usize().unwrap_or(0)
    }
}

/// `1 / cosh(exp(-(k - a Z) / (b Z)))`, the shared sigmoid-like ramp.
fn stretched_ramp<T: Real>(k: u64, a: T, b: T, horizon: u64) -> T {
    let z = T::of_u64(horizon);
    let x = (T::of_u64(k) - a * z) / (b * z);
    T::one() / (-x).exp().cosh()
}

/// Learning rate at slot `k`.
///
/// The recursion `alpha_k = max(floor, alpha_{k-1} (1 - 1/(1+M+k))^(1/2+xi))`
/// telescopes to `max(floor, alpha0 ((M+1)/(M+1+k))^(1/2+xi))`, evaluated here
/// in constant time.
pub fn alpha_schedule<T: Real>(k: u64, cfg: &ScheduleConfig<T>) -> T {
    if k == 0 {
        return cfg.alpha0;
    }
    let base = cfg.alpha_offset + T::one();
    let ratio = base / (base + T::of_u64(k));
    let exponent = T::of(0.5) + cfg.alpha_xi;
    (cfg.alpha0 * ratio.powf(exponent)).max(cfg.alpha_floor)
}

/// Exploration probability at slot `k`.
///
/// Up to the horizon `Z` it follows the stretched-exponential decay, clamped to
/// `[0, epsilon0]`; past it, `epsilon(Z) / (k - Z)`.
pub fn epsilon_schedule<T: Real>(k: u64, cfg: &ScheduleConfig<T>) -> T {
    let z = cfg.horizon;
    if k > z {
        return epsilon_schedule(z, cfg) / T::of_u64(k - z);
    }
    let eps0 = cfg.epsilon0;
    let ramp = stretched_ramp(k, cfg.epsilon_a, cfg.epsilon_b, z);
    let linear = T::of_u64(k) * cfg.epsilon_c / T::of_u64(z);
    let raw = eps0 - (T::of(0.9) * eps0 * ramp + linear);
    raw.max(T::zero()).min(eps0)
}

/// Replay mini-batch size at slot `k`, clamped to `[0, N_max + ceil(C)]`.
pub fn minibatch_schedule<T: Real>(k: u64, cfg: &ScheduleConfig<T>) -> usize {
    let ramp = stretched_ramp(k, cfg.batch_a, cfg.batch_b, cfg.horizon);
    let linear = T::of_u64(k) * cfg.batch_c / T::of_u64(cfg.horizon);
    let raw = T::of_usize(cfg.batch_max) * ramp + linear;
    let rounded = raw.round().max(T::zero()).to_usize().unwrap_or(0);
    rounded.min(cfg.batch_ceiling())
}
