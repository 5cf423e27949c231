mod common;

use edgecache::sim::{self, parse_summary, Checkpoint, RunOptions, SweepParam, SweepRow};
use edgecache::{Action, Policy, ScenarioConfig};

fn with_policy(policy: Policy) -> ScenarioConfig {
    let mut c = common::tiny_config();
    c.policy = policy;
    c
}

fn trace(config: &ScenarioConfig, options: RunOptions) -> (sim::RunOutput, String) {
    let mut buf = Vec::new();
    let out = sim::run_with(config, options, Some(&mut buf)).unwrap();
    (out, String::from_utf8(buf).unwrap())
}

#[test]
fn csv_has_header_and_one_row_per_slot() {
    let config = with_policy(Policy::Rl);
    let (out, csv) = trace(&config, RunOptions::default());
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "slot,requests,misses,perturbation,action_from,action_to,epsilon,alpha,batch_n,theta_1,theta_2,theta_3"
    );
    assert_eq!(lines.count() as u64, config.num_slots());
    assert_eq!(out.series.len() as u64, config.num_slots());
}

#[test]
fn rl_pays_refills_exactly_on_transfers() {
    let config = with_policy(Policy::Rl);
    let (out, csv) = trace(&config, RunOptions::default());
    for (record, line) in out.series.records().iter().zip(csv.lines().skip(1)) {
        let fields: Vec<&str> = line.split(',').collect();
        match record.action.unwrap() {
            Action::Null => {
                assert_eq!(record.perturbation, 0);
                assert_eq!((fields[4], fields[5]), ("", ""));
            }
            Action::Transfer { from, to } => {
                assert_eq!(record.perturbation, config.delta());
                assert_eq!(fields[4], (from + 1).to_string());
                assert_eq!(fields[5], (to + 1).to_string());
            }
        }
        assert_eq!(record.theta.iter().sum::<u64>(), config.capacity);
    }
}

#[test]
fn static_policies_never_move() {
    for policy in [Policy::Proportional, Policy::Uniform, Policy::Optimal] {
        let out = sim::run(&with_policy(policy)).unwrap();
        let first = &out.series.records()[0].theta;
        assert!(out.series.records().iter().all(|r| r.perturbation == 0 && &r.theta == first));
    }
}

#[test]
fn proportional_has_zero_gain() {
    let out = sim::run(&with_policy(Policy::Proportional)).unwrap();
    assert_eq!(out.summary.final_window_gain, Some(0.0));
    let optimal = sim::run(&with_policy(Policy::Optimal)).unwrap();
    assert_eq!(optimal.summary.final_window_cost, optimal.summary.final_window_optimal_cost);
}

#[test]
fn all_policies_see_the_same_requests() {
    let runs: Vec<_> = [Policy::Rl, Policy::Spsa, Policy::Optimal]
        .into_iter()
        .map(|p| sim::run(&with_policy(p)).unwrap())
        .collect();
    for pair in runs.windows(2) {
        for (a, b) in pair[0].series.records().iter().zip(pair[1].series.records()) {
            assert_eq!(a.requests, b.requests);
            assert_eq!(a.proportional_misses, b.proportional_misses);
        }
    }
}

#[test]
fn identical_seeds_give_identical_traces() {
    for policy in [Policy::Rl, Policy::Spsa] {
        let config = with_policy(policy);
        let (_, a) = trace(&config, RunOptions::default());
        let (_, b) = trace(&config, RunOptions::default());
        assert_eq!(a, b);
        let mut other = config.clone();
        other.seed += 1;
        let (_, c) = trace(&other, RunOptions::default());
        assert_ne!(a, c);
    }
}

#[test]
fn resuming_from_a_checkpoint_reproduces_the_tail() {
    let config = with_policy(Policy::Rl);
    let at = 77;
    let (full, full_csv) = trace(
        &config,
        RunOptions {
            checkpoint_at: Some(at),
            resume: None,
        },
    );
    let dir = tempfile::tempdir().unwrap();
    full.checkpoint.unwrap().save(dir.path()).unwrap();
    let restored = Checkpoint::load(dir.path(), &config).unwrap();
    let (_, tail_csv) = trace(
        &config,
        RunOptions {
            checkpoint_at: None,
            resume: Some(restored),
        },
    );
    let full_rows: Vec<&str> = full_csv.lines().skip(1 + at as usize).collect();
    let tail_rows: Vec<&str> = tail_csv.lines().skip(1).collect();
    assert_eq!(full_rows, tail_rows);
}

#[test]
fn zero_duration_reports_the_initial_allocation() {
    let mut config = with_policy(Policy::Rl);
    config.duration = 0.0;
    let (out, csv) = trace(&config, RunOptions::default());
    assert_eq!(csv.lines().count(), 1);
    assert!(out.series.is_empty());
    let s = &out.summary;
    assert_eq!(s.final_theta, s.initial_theta);
    assert_eq!(s.average_cost, None);
    let fields = parse_summary(&s.to_string());
    assert_eq!(fields["final_window_cost"], "NA");
}

#[test]
fn summary_round_trips_through_the_parser() {
    let out = sim::run(&with_policy(Policy::Spsa)).unwrap();
    let fields = parse_summary(&out.summary.to_string());
    assert_eq!(fields["policy"], "spsa");
    assert_eq!(fields["slots"], "200");
    let cost: f64 = fields["final_window_cost"].parse().unwrap();
    assert_eq!(Some(cost), out.summary.final_window_cost);
    let theta: Vec<u64> = fields["final_theta"].split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(theta, out.summary.final_theta);
}

#[test]
fn run_to_dir_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = with_policy(Policy::Uniform);
    sim::run_to_dir(&config, dir.path(), RunOptions::default()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("uniform.csv")).unwrap();
    assert_eq!(csv.lines().count() as u64, config.num_slots() + 1);
    let summary = std::fs::read_to_string(dir.path().join("uniform.summary.txt")).unwrap();
    assert_eq!(parse_summary(&summary)["policy"], "uniform");
}

#[test]
fn sweep_rows_come_back_in_value_order() {
    let config = with_policy(Policy::Rl);
    let rows = sim::sweep(&config, SweepParam::Lambda, &[400.0, 100.0, 200.0]).unwrap();
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert_eq!(values, [400.0, 100.0, 200.0]);
    let seeds: std::collections::HashSet<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 3);
    assert_eq!(rows, sim::sweep(&config, SweepParam::Lambda, &[400.0, 100.0, 200.0]).unwrap());

    let mut out = Vec::new();
    sim::write_sweep_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), SweepRow::HEADER.join(","));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn capacity_sweep_scales_the_transfer_step() {
    let mut config = with_policy(Policy::Proportional);
    config.delta = None;
    let rows = sim::sweep(&config, SweepParam::Capacity, &[50.0, 100.0]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(sim::sweep(&config, SweepParam::Capacity, &[75.5]).is_err());
}

#[test]
fn oracle_report_orders_the_references() {
    let report = sim::oracle_report(&common::desk_config()).unwrap();
    assert!(report.proportional_cost > report.optimal_cost);
    assert!(report.grid_optimal_cost >= report.optimal_cost);
    assert_eq!(report.optimal_theta.iter().sum::<u64>(), 50_000);
}

#[test]
fn checkpoints_are_rl_only() {
    let config = with_policy(Policy::Spsa);
    let options = RunOptions {
        checkpoint_at: Some(3),
        resume: None,
    };
    assert!(sim::run_with(&config, options, None).is_err());
}
