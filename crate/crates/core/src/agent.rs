//! Online tabular Q-learning over cache partitions.
//!
//! The state is the partition itself and the actions are single `delta`
//! transfers. Every slot the agent picks an action epsilon-greedily, pays the
//! misses of the new partition plus the refill traffic, updates the table with
//! that observation and then replays a random mini-batch of past experiences.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{count_misses, perturbation_cost, Action, Allocation, SlotOutcome};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::{alpha_schedule, epsilon_schedule, minibatch_schedule, ScheduleConfig};
use crate::workload::RequestBatch;

/// Estimated discounted cost of each `(partition, action)` pair.
///
/// Pairs that were never written read as `default_value`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<T> {
    num_sps: usize,
    default_value: T,
    rows: HashMap<Vec<u64>, Vec<Option<T>>>,
}

impl<T: Real> QTable<T> {
    pub fn new(num_sps: usize) -> Self {
        Self::with_default(num_sps, T::zero())
    }

    pub fn with_default(num_sps: usize, default_value: T) -> Self {
        Self {
            num_sps,
            default_value,
            rows: HashMap::new(),
        }
    }

    pub fn num_sps(&self) -> usize {
        self.num_sps
    }

    pub fn default_value(&self) -> T {
        self.default_value
    }

    /// Number of stored pairs.
    pub fn len(&self) -> usize {
        self.rows.values().map(|r| r.iter().flatten().count()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of partitions with at least one stored pair.
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, theta: &[u64], action: Action) -> T {
        self.rows
            .get(theta)
            .and_then(|row| row[action.index(self.num_sps)])
            .unwrap_or(self.default_value)
    }

    pub fn contains(&self, theta: &[u64], action: Action) -> bool {
        self.rows
            .get(theta)
            .is_some_and(|row| row[action.index(self.num_sps)].is_some())
    }

    pub fn set(&mut self, theta: &[u64], action: Action, value: T) {
        let width = Action::count(self.num_sps);
        let row = self
            .rows
            .entry(theta.to_vec())
            .or_insert_with(|| vec![None; width]);
        row[action.index(self.num_sps)] = Some(value);
    }

    /// `min_a Q(state, a)` over the actions feasible in `state`.
    pub fn min_value(&self, state: &Allocation) -> T {
        self.best(state).1
    }

    /// Greedy action in `state`; ties resolve to the earliest action in
    /// enumeration order, so `Null` wins any tie it is part of.
    pub fn best_action(&self, state: &Allocation) -> Action {
        self.best(state).0
    }

    fn best(&self, state: &Allocation) -> (Action, T) {
        let row = self.rows.get(state.theta());
        let value = |a: Action| {
            row.and_then(|r| r[a.index(self.num_sps)])
                .unwrap_or(self.default_value)
        };
        let mut best = (Action::Null, value(Action::Null));
        for a in Action::transfers(self.num_sps).filter(|a| state.is_feasible(*a)) {
            let v = value(a);
            if v < best.1 {
                best = (a, v);
            }
        }
        best
    }

    /// Stored pairs sorted by partition, then action order.
    pub fn entries(&self) -> Vec<(Vec<u64>, Action, T)> {
        let mut states: Vec<&Vec<u64>> = self.rows.keys().collect();
        states.sort();
        let mut out = Vec::new();
        for theta in states {
            for (i, v) in self.rows[theta].iter().enumerate() {
                if let Some(v) = v {
                    let action = Action::from_index(i, self.num_sps).expect("index in range");
                    out.push((theta.clone(), action, *v));
                }
            }
        }
        out
    }

    /// Writes the checkpoint text format:
    ///
    /// ```text
    /// # edgecache q-table
    /// providers=3 default=0
    /// 37000,10000,3000	null	512.25
    /// 37000,10000,3000	1->2	498.5
    /// ```
    ///
    /// One record per stored pair: comma-separated slot counts, a tab, the
    /// action (`null` or 1-based `from->to`), a tab, and the value in shortest
    /// round-trip decimal form. Records are sorted, so equal tables serialize
    /// to equal bytes.
    #[allow(clippy::tabs_in_doc_comments)]
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# edgecache q-table")?;
        writeln!(out, "providers={} default={}", self.num_sps, self.default_value)?;
        for (theta, action, value) in self.entries() {
            let theta: Vec<String> = theta.iter().map(u64::to_string).collect();
            writeln!(out, "{}\t{}\t{}", theta.join(","), action, value)?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Self> {
        let mut table: Option<Self> = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let bad = |message: String| Error::Checkpoint {
                line: lineno,
                message,
            };
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some(table) = table.as_mut() else {
                table = Some(parse_header(trimmed).map_err(bad)?);
                continue;
            };
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [theta, action, value] = fields[..] else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            let theta = theta
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("bad slot count: {e}")))?;
            if theta.len() != table.num_sps {
                return Err(bad(format!(
                    "partition has {} entries, expected {}",
                    theta.len(),
                    table.num_sps
                )));
            }
            let action: Action = action.parse().map_err(bad)?;
            if let Action::Transfer { from, to } = action {
                if from >= table.num_sps || to >= table.num_sps {
                    return Err(bad(format!("action {action} names an unknown provider")));
                }
            }
            let value: T = value
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad value {value:?}")))?;
            table.set(&theta, action, value);
        }
        table.ok_or(Error::Checkpoint {
            line: 0,
            message: "missing header".into(),
        })
    }
}

fn parse_header<T: Real>(line: &str) -> std::result::Result<QTable<T>, String> {
    let mut providers = None;
    let mut default = None;
    for field in line.split_whitespace() {
        match field.split_once('=') {
            Some(("providers", v)) => {
                providers = Some(v.parse::<usize>().map_err(|e| format!("providers: {e}"))?)
            }
            Some(("default", v)) => {
                default = Some(v.parse::<T>().map_err(|_| format!("bad default {v:?}"))?)
            }
            _ => return Err(format!("unexpected header field {field:?}")),
        }
    }
    match (providers, default) {
        (Some(p), Some(d)) if p > 0 => Ok(QTable::with_default(p, d)),
        _ => Err("header needs providers=<n> default=<value>".into()),
    }
}

/// One observed transition: the partition at slot start, the action taken and
/// the cost paid.
#[derive(Clone, Debug, PartialEq)]
pub struct Experience<T> {
    pub state: Allocation,
    pub action: Action,
    pub cost: T,
}

/// Experiences in slot order. Grows without bound unless a capacity is set, in
/// which case the oldest experience is dropped first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayMemory<T> {
    experiences: VecDeque<Experience<T>>,
    capacity: Option<usize>,
}

impl<T: Real> ReplayMemory<T> {
    pub fn new() -> Self {
        Self {
            experiences: VecDeque::new(),
            capacity: None,
        }
    }

    pub fn with_capacity_limit(capacity: Option<usize>) -> Self {
        Self {
            experiences: VecDeque::new(),
            capacity,
        }
    }

    pub fn push(&mut self, experience: Experience<T>) {
        if let Some(cap) = self.capacity {
            if cap == 0 {
                return;
            }
            while self.experiences.len() >= cap {
                self.experiences.pop_front();
            }
        }
        self.experiences.push_back(experience);
    }

    pub fn len(&self) -> usize {
        self.experiences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiences.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Experience<T>> {
        self.experiences.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience<T>> {
        self.experiences.iter()
    }

    pub fn capacity_limit(&self) -> Option<usize> {
        self.capacity
    }

    /// Text form, one experience per line: `theta<TAB>action<TAB>cost`.
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# edgecache replay memory")?;
        for e in &self.experiences {
            let theta: Vec<String> = e.state.theta().iter().map(u64::to_string).collect();
            writeln!(out, "{}\t{}\t{}", theta.join(","), e.action, e.cost)?;
        }
        Ok(())
    }

    /// Reads the text form back; `delta` and `capacity` rebuild the partitions.
    pub fn read_checkpoint<R: BufRead>(
        input: R,
        delta: u64,
        capacity: u64,
        limit: Option<usize>,
    ) -> Result<Self> {
        let mut memory = Self::with_capacity_limit(limit);
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let bad = |message: String| Error::Checkpoint {
                line: i + 1,
                message,
            };
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [theta, action, cost] = fields[..] else {
                return Err(bad("expected 3 tab-separated fields".into()));
            };
            let theta = theta
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("bad slot count: {e}")))?;
            let state = Allocation::new(theta, delta, capacity).map_err(|e| bad(e.to_string()))?;
            let action: Action = action.parse().map_err(bad)?;
            if !state.is_feasible(action) {
                return Err(bad(format!("action {action} infeasible in {state}")));
            }
            let cost: T = cost
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad cost {cost:?}")))?;
            memory.push(Experience {
                state,
                action,
                cost,
            });
        }
        Ok(memory)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct AgentConfig<T> {
    /// Discount factor, strictly between 0 and 1.
    pub gamma: T,
    pub schedule: ScheduleConfig<T>,
    /// When exploring, pick each feasible transfer with probability `1/P^2`
    /// and leave the rest of the mass on `Null`.
    pub null_action_weighting: bool,
    /// Optional bound on the replay memory (FIFO eviction).
    pub memory_capacity: Option<usize>,
}

impl<T: Real> Default for AgentConfig<T> {
    fn default() -> Self {
        Self {
            gamma: T::of(0.99),
            schedule: ScheduleConfig::default(),
            null_action_weighting: true,
            memory_capacity: None,
        }
    }
}

impl<T: Real> AgentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "discount factor {} outside (0, 1)",
                self.gamma
            )));
        }
        self.schedule.validate()
    }
}

/// Epsilon-greedy choice in `state`.
///
/// Uses one uniform draw to decide between exploring and exploiting and, when
/// exploring, a second one to pick the action.
pub fn select_action<T: Real, R: Rng + ?Sized>(
    state: &Allocation,
    qtable: &QTable<T>,
    epsilon: T,
    null_action_weighting: bool,
    rng: &mut R,
) -> Action {
    if T::sample_unit(rng) < epsilon {
        let v = T::sample_unit(rng);
        if null_action_weighting {
            let p = T::of_usize(state.num_sps());
            let weight = T::one() / (p * p);
            let mut cumulative = T::zero();
            for a in Action::transfers(state.num_sps()).filter(|a| state.is_feasible(*a)) {
                cumulative = cumulative + weight;
                if v < cumulative {
                    return a;
                }
            }
            Action::Null
        } else {
            let actions = state.actions();
            let i = (v * T::of_usize(actions.len()))
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(actions.len() - 1);
            actions[i]
        }
    } else {
        qtable.best_action(state)
    }
}

/// `Q(s,a) := (1 - alpha) Q(s,a) + alpha (cost + gamma min_a' Q(s',a'))`.
pub fn q_update<T: Real>(
    qtable: &mut QTable<T>,
    state: &Allocation,
    action: Action,
    cost: T,
    next_state: &Allocation,
    alpha: T,
    gamma: T,
) {
    let target = cost + gamma * qtable.min_value(next_state);
    let current = qtable.get(state.theta(), action);
    let updated = (T::one() - alpha) * current + alpha * target;
    qtable.set(state.theta(), action, updated);
}

/// Re-applies the update to `min(n, |memory|)` experiences sampled uniformly
/// without replacement, in draw order. Returns the number of updates applied.
pub fn replay<T: Real, R: Rng + ?Sized>(
    qtable: &mut QTable<T>,
    memory: &ReplayMemory<T>,
    n: usize,
    alpha: T,
    gamma: T,
    rng: &mut R,
) -> Result<usize> {
    let amount = n.min(memory.len());
    if amount == 0 {
        return Ok(0);
    }
    for i in index::sample(rng, memory.len(), amount) {
        let e = &memory.experiences[i];
        let next = e.state.apply(e.action)?;
        q_update(qtable, &e.state, e.action, e.cost, &next, alpha, gamma);
    }
    Ok(amount)
}

/// What happened in one agent slot.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentStep<T> {
    pub action: Action,
    pub next_state: Allocation,
    pub outcome: SlotOutcome,
    pub epsilon: T,
    pub alpha: T,
    /// Scheduled mini-batch size (before capping at the memory size).
    pub batch_n: usize,
    pub replayed: usize,
}

/// One slot of the online learner.
///
/// The action takes effect at the start of the slot, so the slot's misses are
/// counted against the new partition and the refill is charged in the same
/// slot. The real observation updates the table before the replay batch.
#[allow(clippy::too_many_arguments)]
pub fn agent_step<T: Real, R: Rng + ?Sized>(
    state: &Allocation,
    batch: &RequestBatch,
    qtable: &mut QTable<T>,
    memory: &mut ReplayMemory<T>,
    k: u64,
    cfg: &AgentConfig<T>,
    rng: &mut R,
) -> Result<AgentStep<T>> {
    let epsilon = epsilon_schedule(k, &cfg.schedule);
    let alpha = alpha_schedule(k, &cfg.schedule);
    let batch_n = minibatch_schedule(k, &cfg.schedule);

    let action = select_action(state, qtable, epsilon, cfg.null_action_weighting, rng);
    let next_state = state.apply(action)?;
    let outcome = SlotOutcome {
        total_requests: batch.len() as u64,
        misses: count_misses(batch, next_state.theta()),
        perturbation_cost: perturbation_cost(action, state.delta()),
    };
    let cost = T::of_u64(outcome.cost());

    q_update(qtable, state, action, cost, &next_state, alpha, cfg.gamma);
    memory.push(Experience {
        state: state.clone(),
        action,
        cost,
    });
    let replayed = replay(qtable, memory, batch_n, alpha, cfg.gamma, rng)?;

    Ok(AgentStep {
        action,
        next_state,
        outcome,
        epsilon,
        alpha,
        batch_n,
        replayed,
    })
}

/// A Q-learning allocator owning its table and memory.
#[derive(Clone, Debug)]
pub struct QAgent<T> {
    config: AgentConfig<T>,
    qtable: QTable<T>,
    memory: ReplayMemory<T>,
}

impl<T: Real> QAgent<T> {
    pub fn new(config: AgentConfig<T>, num_sps: usize) -> Result<Self> {
        config.validate()?;
        let memory = ReplayMemory::with_capacity_limit(config.memory_capacity);
        Ok(Self {
            config,
            qtable: QTable::new(num_sps),
            memory,
        })
    }

    pub fn from_parts(config: AgentConfig<T>, qtable: QTable<T>, memory: ReplayMemory<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            qtable,
            memory,
        })
    }

    pub fn config(&self) -> &AgentConfig<T> {
        &self.config
    }

    pub fn qtable(&self) -> &QTable<T> {
        &self.qtable
    }

    pub fn memory(&self) -> &ReplayMemory<T> {
        &self.memory
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        state: &Allocation,
        batch: &RequestBatch,
        k: u64,
        rng: &mut R,
    ) -> Result<AgentStep<T>> {
        agent_step(
            state,
            batch,
            &mut self.qtable,
            &mut self.memory,
            k,
            &self.config,
            rng,
        )
    }
}
