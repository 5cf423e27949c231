//! Simulator of an edge cache shared by several service providers, with an
//! online Q-learning allocator that moves cache slots between providers to
//! minimize upstream traffic, and the analytic and heuristic allocators it is
//! measured against.
//!
//! The numeric modules are generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the run driver and configuration work in `f64`, and
//! the aliases below name the `f64` instantiations.

// Negated comparisons like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod allocation;
pub mod baselines;
pub mod config;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod schedules;
pub mod sim;
pub mod workload;

pub use allocation::{Action, Allocation, SlotOutcome};
pub use config::{Policy, ScenarioConfig};
pub use error::{Error, Result};
pub use scalar::Real;
pub use workload::{ArrivalMode, RequestBatch, RequestEvent, RequestKind};

pub type SpProfile = workload::SpProfile<f64>;
pub type Workload = workload::Workload<f64>;
pub type ZipfCatalog = workload::ZipfCatalog<f64>;
pub type QTable = agent::QTable<f64>;
pub type QAgent = agent::QAgent<f64>;
pub type AgentConfig = agent::AgentConfig<f64>;
pub type Experience = agent::Experience<f64>;
pub type ReplayMemory = agent::ReplayMemory<f64>;
pub type ScheduleConfig = schedules::ScheduleConfig<f64>;
pub type SpsaConfig = baselines::SpsaConfig<f64>;
pub type SlotRecord = metrics::SlotRecord<f64>;
pub type CostSeries = metrics::CostSeries<f64>;
pub type ExpectedCost = oracle::ExpectedCost<f64>;
