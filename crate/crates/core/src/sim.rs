//! Run driver: executes one policy over a scenario, slot by slot, and reports
//! per-slot traces and end-of-run statistics.
//!
//! Trace CSV columns, in order:
//!
//! ```text
//! slot,requests,misses,perturbation,action_from,action_to,epsilon,alpha,batch_n,theta_1,...,theta_P
//! ```
//!
//! `action_from`/`action_to` are 1-based provider indices and are left empty
//! for the null action and for policies that do not act through transfers.
//! `theta_p` is the partition in force while the slot's requests are served.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agent::{QAgent, QTable, ReplayMemory};
use crate::allocation::{count_misses, initial_allocation, Allocation};
use crate::baselines::{refill_cost, static_policy, SpsaAllocator, StaticKind};
use crate::config::{Policy, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{jain_fairness, mean_theta, CostSeries, SlotRecord, WindowTotals};
use crate::oracle::{expected_miss_ratio, optimal_allocation_greedy, optimal_allocation_on_grid};
use crate::rng::{derive_seed, slot_rng, Stream};
use crate::workload::{RequestBatch, Workload};

/// Workload plus the static reference partitions of a scenario.
pub struct Scenario {
    pub workload: Workload<f64>,
    pub proportional: Allocation,
    pub uniform: Allocation,
    pub optimal: Allocation,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let workload = Workload::new(config.profiles.clone())?;
        let delta = config.delta();
        Ok(Self {
            proportional: static_policy(StaticKind::Proportional, &workload, config.capacity, delta)?,
            uniform: static_policy(StaticKind::Uniform, &workload, config.capacity, delta)?,
            optimal: static_policy(StaticKind::Optimal, &workload, config.capacity, delta)?,
            workload,
        })
    }
}

/// Learner state at a slot boundary, enough to continue a run bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// First slot that has not been simulated yet.
    pub slot: u64,
    pub theta: Vec<u64>,
    pub qtable: QTable<f64>,
    pub memory: ReplayMemory<f64>,
}

impl Checkpoint {
    const STATE: &'static str = "state.txt";
    const QTABLE: &'static str = "qtable.txt";
    const MEMORY: &'static str = "memory.txt";

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::File {
            path: dir.to_owned(),
            source,
        })?;
        let theta: Vec<String> = self.theta.iter().map(u64::to_string).collect();
        fs::write(
            dir.join(Self::STATE),
            format!("slot={}\ntheta={}\n", self.slot, theta.join(",")),
        )?;
        self.qtable
            .write_checkpoint(BufWriter::new(create(&dir.join(Self::QTABLE))?))?;
        self.memory
            .write_checkpoint(BufWriter::new(create(&dir.join(Self::MEMORY))?))?;
        Ok(())
    }

    pub fn load(dir: &Path, config: &ScenarioConfig) -> Result<Self> {
        let state = fs::read_to_string(dir.join(Self::STATE)).map_err(|source| Error::File {
            path: dir.join(Self::STATE),
            source,
        })?;
        let fields = parse_summary(&state);
        let bad = |message: &str| Error::Checkpoint {
            line: 0,
            message: message.to_string(),
        };
        let slot = fields
            .get("slot")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("state.txt lacks slot=<n>"))?;
        let theta = fields
            .get("theta")
            .map(|s| s.split(',').map(str::parse).collect::<std::result::Result<Vec<u64>, _>>())
            .transpose()
            .map_err(|_| bad("state.txt has a malformed theta"))?
            .ok_or_else(|| bad("state.txt lacks theta=<list>"))?;
        let qtable = QTable::read_checkpoint(BufReader::new(open(&dir.join(Self::QTABLE))?))?;
        let memory = ReplayMemory::read_checkpoint(
            BufReader::new(open(&dir.join(Self::MEMORY))?),
            config.delta(),
            config.capacity,
            config.agent.memory_capacity,
        )?;
        Ok(Self {
            slot,
            theta,
            qtable,
            memory,
        })
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Capture the learner state just before this slot (rl policy only).
    pub checkpoint_at: Option<u64>,
    /// Continue from a captured state instead of slot 0 (rl policy only).
    pub resume: Option<Checkpoint>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: CostSeries<f64>,
    pub summary: Summary,
    pub checkpoint: Option<Checkpoint>,
}

enum Controller {
    Static(Allocation),
    Learner(Box<QAgent<f64>>),
    Spsa(SpsaAllocator<f64>),
}

/// Runs the configured policy without writing anything.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    run_with(config, RunOptions::default(), None)
}

/// Runs the configured policy, streaming CSV rows to `trace` as they are produced.
pub fn run_with(
    config: &ScenarioConfig,
    options: RunOptions,
    trace: Option<&mut dyn Write>,
) -> Result<RunOutput> {
    let scenario = Scenario::new(config)?;
    run_scenario(config, &scenario, options, trace)
}

pub fn run_scenario(
    config: &ScenarioConfig,
    scenario: &Scenario,
    options: RunOptions,
    trace: Option<&mut dyn Write>,
) -> Result<RunOutput> {
    let num_slots = config.num_slots();
    let initial = initial_allocation(
        config.initial_allocation,
        &config.profiles,
        config.capacity,
        config.delta(),
    )?;
    if (options.resume.is_some() || options.checkpoint_at.is_some()) && config.policy != Policy::Rl {
        return Err(Error::InvalidConfig(
            "checkpoints are only supported for the rl policy".into(),
        ));
    }

    let (mut controller, mut state, start_slot) = match config.policy {
        Policy::Rl => match options.resume {
            Some(cp) => {
                let state = Allocation::new(cp.theta, config.delta(), config.capacity)?;
                let agent = QAgent::from_parts(config.agent_config(), cp.qtable, cp.memory)?;
                (Controller::Learner(Box::new(agent)), state, cp.slot)
            }
            None => {
                let agent = QAgent::new(config.agent_config(), config.profiles.len())?;
                (Controller::Learner(Box::new(agent)), initial.clone(), 0)
            }
        },
        Policy::Spsa => (
            Controller::Spsa(SpsaAllocator::new(config.spsa_config(), &initial)?),
            initial.clone(),
            0,
        ),
        Policy::Proportional => (
            Controller::Static(scenario.proportional.clone()),
            scenario.proportional.clone(),
            0,
        ),
        Policy::Uniform => (
            Controller::Static(scenario.uniform.clone()),
            scenario.uniform.clone(),
            0,
        ),
        Policy::Optimal => (
            Controller::Static(scenario.optimal.clone()),
            scenario.optimal.clone(),
            0,
        ),
    };
    let initial_theta = state.theta().to_vec();

    let mut writer = trace.map(csv::Writer::from_writer);
    if let Some(w) = writer.as_mut() {
        w.write_record(trace_header(config.profiles.len()))?;
    }

    let mut series = CostSeries::new();
    let mut checkpoint = None;
    let mut batch = RequestBatch::default();
    for k in start_slot..num_slots {
        if options.checkpoint_at == Some(k) {
            if let Controller::Learner(agent) = &controller {
                checkpoint = Some(Checkpoint {
                    slot: k,
                    theta: state.theta().to_vec(),
                    qtable: agent.qtable().clone(),
                    memory: agent.memory().clone(),
                });
            }
        }

        let mut workload_rng = slot_rng(config.seed, Stream::Workload, k);
        scenario.workload.fill_slot(
            &mut workload_rng,
            &mut batch,
            k,
            config.lambda,
            config.tau,
            config.arrival_mode,
        );

        let mut record = SlotRecord {
            slot: k,
            requests: batch.len() as u64,
            misses: 0,
            perturbation: 0,
            action: None,
            epsilon: 0.0,
            alpha: 0.0,
            batch_n: 0,
            theta: Vec::new(),
            proportional_misses: count_misses(&batch, scenario.proportional.theta()),
            optimal_misses: count_misses(&batch, scenario.optimal.theta()),
        };

        match &mut controller {
            Controller::Static(fixed) => {
                record.misses = count_misses(&batch, fixed.theta());
            }
            Controller::Learner(agent) => {
                let mut rng = slot_rng(config.seed, Stream::Agent, k);
                let step = agent.step(&state, &batch, k, &mut rng)?;
                record.misses = step.outcome.misses;
                record.perturbation = step.outcome.perturbation_cost;
                record.action = Some(step.action);
                record.epsilon = step.epsilon;
                record.alpha = step.alpha;
                record.batch_n = step.batch_n;
                state = step.next_state;
            }
            Controller::Spsa(spsa) => {
                let mut rng = slot_rng(config.seed, Stream::Baseline, k);
                let next = spsa.next_allocation(&mut rng)?;
                record.perturbation = refill_cost(state.theta(), next.theta());
                record.misses = count_misses(&batch, next.theta());
                spsa.observe(record.misses as f64);
                state = next;
            }
        }
        record.theta = state.theta().to_vec();

        if let Some(w) = writer.as_mut() {
            write_row(w, &record)?;
        }
        series.push(record)?;
    }
    if options.checkpoint_at == Some(num_slots) {
        if let Controller::Learner(agent) = &controller {
            checkpoint = Some(Checkpoint {
                slot: num_slots,
                theta: state.theta().to_vec(),
                qtable: agent.qtable().clone(),
                memory: agent.memory().clone(),
            });
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }

    let summary = Summary::compute(config, scenario, &series, initial_theta, state.theta().to_vec());
    Ok(RunOutput {
        series,
        summary,
        checkpoint,
    })
}

/// Paths written by [`run_to_dir`].
pub fn output_paths(dir: &Path, policy: Policy) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{policy}.csv")),
        dir.join(format!("{policy}.summary.txt")),
    )
}

/// Runs the configured policy, writing `<policy>.csv` and
/// `<policy>.summary.txt` into `dir`.
pub fn run_to_dir(config: &ScenarioConfig, dir: &Path, options: RunOptions) -> Result<RunOutput> {
    fs::create_dir_all(dir).map_err(|source| Error::File {
        path: dir.to_owned(),
        source,
    })?;
    let (trace_path, summary_path) = output_paths(dir, config.policy);
    let mut trace = BufWriter::new(create(&trace_path)?);
    let output = run_with(config, options, Some(&mut trace))?;
    trace.flush()?;
    fs::write(&summary_path, output.summary.to_string()).map_err(|source| Error::File {
        path: summary_path,
        source,
    })?;
    Ok(output)
}

pub fn trace_header(num_sps: usize) -> Vec<String> {
    let mut header: Vec<String> = [
        "slot",
        "requests",
        "misses",
        "perturbation",
        "action_from",
        "action_to",
        "epsilon",
        "alpha",
        "batch_n",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=num_sps).map(|p| format!("theta_{p}")));
    header
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, r: &SlotRecord<f64>) -> Result<()> {
    let (from, to) = match r.action {
        Some(crate::allocation::Action::Transfer { from, to }) => {
            ((from + 1).to_string(), (to + 1).to_string())
        }
        _ => (String::new(), String::new()),
    };
    let mut row = vec![
        r.slot.to_string(),
        r.requests.to_string(),
        r.misses.to_string(),
        r.perturbation.to_string(),
        from,
        to,
        r.epsilon.to_string(),
        r.alpha.to_string(),
        r.batch_n.to_string(),
    ];
    row.extend(r.theta.iter().map(u64::to_string));
    w.write_record(&row)?;
    Ok(())
}

/// End-of-run statistics. Windowed values use the final reporting window.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub policy: Policy,
    pub seed: u64,
    pub slots: u64,
    pub window_slots: usize,
    pub total_requests: u64,
    pub total_misses: u64,
    pub total_perturbation: u64,
    pub cumulative_cost: u64,
    pub average_cost: Option<f64>,
    pub proportional_average_cost: Option<f64>,
    pub optimal_average_cost: Option<f64>,
    pub final_window_cost: Option<f64>,
    pub final_window_proportional_cost: Option<f64>,
    pub final_window_optimal_cost: Option<f64>,
    pub final_window_gain: Option<f64>,
    pub expected_optimal_cost: f64,
    pub expected_proportional_cost: f64,
    pub initial_theta: Vec<u64>,
    pub final_theta: Vec<u64>,
    pub final_window_mean_theta: Option<Vec<f64>>,
    pub optimal_theta: Vec<u64>,
    pub proportional_theta: Vec<u64>,
    pub jain_policy: Option<f64>,
    pub jain_optimal: Option<f64>,
    pub jain_proportional: Option<f64>,
}

impl Summary {
    fn compute(
        config: &ScenarioConfig,
        scenario: &Scenario,
        series: &CostSeries<f64>,
        initial_theta: Vec<u64>,
        final_theta: Vec<u64>,
    ) -> Self {
        let all = WindowTotals::of(series.records());
        let window = series.tail(config.window_slots());
        let last = WindowTotals::of(window);
        let mean: Option<Vec<f64>> = mean_theta(window);
        let jain = |theta: &[f64]| {
            jain_fairness(theta, &config.profiles, config.lambda)
                .ok()
                .map(|f| f.index)
        };
        let as_f64 = |t: &[u64]| t.iter().map(|&x| x as f64).collect::<Vec<f64>>();
        Self {
            policy: config.policy,
            seed: config.seed,
            slots: series.len() as u64,
            window_slots: config.window_slots(),
            total_requests: all.requests,
            total_misses: all.misses,
            total_perturbation: all.perturbation,
            cumulative_cost: all.cost(),
            average_cost: all.normalized_cost().ok(),
            proportional_average_cost: all.proportional_cost().ok(),
            optimal_average_cost: all.optimal_cost().ok(),
            final_window_cost: last.normalized_cost().ok(),
            final_window_proportional_cost: last.proportional_cost().ok(),
            final_window_optimal_cost: last.optimal_cost().ok(),
            final_window_gain: last.gain().ok(),
            expected_optimal_cost: expected_miss_ratio(scenario.optimal.theta(), &scenario.workload)
                .miss_ratio,
            expected_proportional_cost: expected_miss_ratio(
                scenario.proportional.theta(),
                &scenario.workload,
            )
            .miss_ratio,
            jain_policy: mean
                .as_deref()
                .map_or_else(|| jain(&as_f64(&final_theta)), jain),
            jain_optimal: jain(&as_f64(scenario.optimal.theta())),
            jain_proportional: jain(&as_f64(scenario.proportional.theta())),
            initial_theta,
            final_theta,
            final_window_mean_theta: mean,
            optimal_theta: scenario.optimal.theta().to_vec(),
            proportional_theta: scenario.proportional.theta().to_vec(),
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "NA".to_string(), T::to_string)
}

/// Flat `key=value` block, one statistic per line; `NA` marks undefined values.
impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "policy={}", self.policy)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "slots={}", self.slots)?;
        writeln!(f, "window_slots={}", self.window_slots)?;
        writeln!(f, "total_requests={}", self.total_requests)?;
        writeln!(f, "total_misses={}", self.total_misses)?;
        writeln!(f, "total_perturbation={}", self.total_perturbation)?;
        writeln!(f, "cumulative_cost={}", self.cumulative_cost)?;
        writeln!(f, "average_cost={}", opt(&self.average_cost))?;
        writeln!(f, "proportional_average_cost={}", opt(&self.proportional_average_cost))?;
        writeln!(f, "optimal_average_cost={}", opt(&self.optimal_average_cost))?;
        writeln!(f, "final_window_cost={}", opt(&self.final_window_cost))?;
        writeln!(
            f,
            "final_window_proportional_cost={}",
            opt(&self.final_window_proportional_cost)
        )?;
        writeln!(f, "final_window_optimal_cost={}", opt(&self.final_window_optimal_cost))?;
        writeln!(f, "final_window_gain={}", opt(&self.final_window_gain))?;
        writeln!(f, "expected_optimal_cost={}", self.expected_optimal_cost)?;
        writeln!(f, "expected_proportional_cost={}", self.expected_proportional_cost)?;
        writeln!(f, "initial_theta={}", join(&self.initial_theta))?;
        writeln!(f, "final_theta={}", join(&self.final_theta))?;
        writeln!(
            f,
            "final_window_mean_theta={}",
            self.final_window_mean_theta
                .as_deref()
                .map_or_else(|| "NA".to_string(), join)
        )?;
        writeln!(f, "optimal_theta={}", join(&self.optimal_theta))?;
        writeln!(f, "proportional_theta={}", join(&self.proportional_theta))?;
        writeln!(f, "jain_policy={}", opt(&self.jain_policy))?;
        writeln!(f, "jain_optimal={}", opt(&self.jain_optimal))?;
        writeln!(f, "jain_proportional={}", opt(&self.jain_proportional))
    }
}

/// Parses a `key=value` block, ignoring blank lines and `#` comments.
pub fn parse_summary(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Static reference numbers for a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub optimal_theta: Vec<u64>,
    pub optimal_cost: f64,
    pub grid_optimal_theta: Vec<u64>,
    pub grid_optimal_cost: f64,
    pub proportional_theta: Vec<u64>,
    pub proportional_cost: f64,
    pub uniform_theta: Vec<u64>,
    pub uniform_cost: f64,
}

pub fn oracle_report(config: &ScenarioConfig) -> Result<OracleReport> {
    let scenario = Scenario::new(config)?;
    let w = &scenario.workload;
    let optimal = optimal_allocation_greedy(config.capacity, w);
    let grid = optimal_allocation_on_grid(config.capacity, config.delta(), w)?;
    let cost = |theta: &[u64]| expected_miss_ratio(theta, w).miss_ratio;
    Ok(OracleReport {
        optimal_cost: cost(&optimal),
        grid_optimal_cost: cost(&grid),
        proportional_cost: cost(scenario.proportional.theta()),
        uniform_cost: cost(scenario.uniform.theta()),
        optimal_theta: optimal,
        grid_optimal_theta: grid,
        proportional_theta: scenario.proportional.theta().to_vec(),
        uniform_theta: scenario.uniform.theta().to_vec(),
    })
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "optimal_theta={}", join(&self.optimal_theta))?;
        writeln!(f, "optimal_expected_cost={}", self.optimal_cost)?;
        writeln!(f, "grid_optimal_theta={}", join(&self.grid_optimal_theta))?;
        writeln!(f, "grid_optimal_expected_cost={}", self.grid_optimal_cost)?;
        writeln!(f, "proportional_theta={}", join(&self.proportional_theta))?;
        writeln!(f, "proportional_expected_cost={}", self.proportional_cost)?;
        writeln!(f, "uniform_theta={}", join(&self.uniform_theta))?;
        writeln!(f, "uniform_expected_cost={}", self.uniform_cost)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Lambda,
    Capacity,
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lambda" => Ok(SweepParam::Lambda),
            "K" | "capacity" => Ok(SweepParam::Capacity),
            other => Err(format!("unknown sweep parameter {other:?} (expected lambda or K)")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Capacity => "K",
        })
    }
}

/// One sensitivity point. All costs are normalized by requested objects and
/// the reference policies see the same requests as the swept policy.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub seed: u64,
    pub policy: Policy,
    pub average_cost: f64,
    pub proportional_average_cost: f64,
    pub optimal_average_cost: f64,
    pub final_window_cost: f64,
    pub final_window_proportional_cost: f64,
    pub final_window_optimal_cost: f64,
    pub final_window_gain: f64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 11] = [
        "param",
        "value",
        "seed",
        "policy",
        "average_cost",
        "proportional_average_cost",
        "optimal_average_cost",
        "final_window_cost",
        "final_window_proportional_cost",
        "final_window_optimal_cost",
        "final_window_gain",
    ];

    /// Run-average saving of the policy against the proportional partition.
    pub fn saving(&self) -> f64 {
        self.proportional_average_cost - self.average_cost
    }

    /// Run-average excess cost of the policy over the optimal partition.
    pub fn gap(&self) -> f64 {
        self.average_cost - self.optimal_average_cost
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.param.to_string(),
            self.value.to_string(),
            self.seed.to_string(),
            self.policy.to_string(),
            self.average_cost.to_string(),
            self.proportional_average_cost.to_string(),
            self.optimal_average_cost.to_string(),
            self.final_window_cost.to_string(),
            self.final_window_proportional_cost.to_string(),
            self.final_window_optimal_cost.to_string(),
            self.final_window_gain.to_string(),
        ]
    }
}

/// Config for one sweep point: the parameter replaced and the seed derived
/// from the base seed and the point index.
pub fn sweep_point(base: &ScenarioConfig, param: SweepParam, value: f64, index: usize) -> Result<ScenarioConfig> {
    let mut config = base.clone();
    match param {
        SweepParam::Lambda => config.lambda = value,
        SweepParam::Capacity => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "cache size {value} is not a positive integer"
                )));
            }
            config.capacity = value as u64;
        }
    }
    config.seed = derive_seed(base.seed, index as u64);
    config.validate()?;
    Ok(config)
}

/// Runs one simulation per value, in parallel, and returns rows in value order.
pub fn sweep(base: &ScenarioConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, &v)| sweep_point(base, param, v, i))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(config, &value)| {
            let out = run(config)?;
            let s = out.summary;
            let need = |x: Option<f64>| {
                x.ok_or(Error::UndefinedRatio("sweep point produced no requests"))
            };
            Ok(SweepRow {
                param,
                value,
                seed: config.seed,
                policy: config.policy,
                average_cost: need(s.average_cost)?,
                proportional_average_cost: need(s.proportional_average_cost)?,
                optimal_average_cost: need(s.optimal_average_cost)?,
                final_window_cost: need(s.final_window_cost)?,
                final_window_proportional_cost: need(s.final_window_proportional_cost)?,
                final_window_optimal_cost: need(s.final_window_optimal_cost)?,
                final_window_gain: need(s.final_window_gain)?,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRow::HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
