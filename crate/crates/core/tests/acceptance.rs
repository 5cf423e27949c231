//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::time::{Duration, Instant};

use edgecache::agent::q_update;
use edgecache::oracle::{expected_miss_ratio, optimal_allocation_bruteforce, optimal_allocation_greedy};
use edgecache::schedules::{alpha_schedule, epsilon_schedule, minibatch_schedule};
use edgecache::sim::{self, RunOptions, RunOutput, SweepParam};
use edgecache::{Action, Allocation, Policy, QTable, ScenarioConfig, ScheduleConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn with_policy(base: &ScenarioConfig, policy: Policy) -> ScenarioConfig {
    let mut c = base.clone();
    c.policy = policy;
    c
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn oracle_equivalence(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (worst, took) = timed(|| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (w, k) = common::random_instance(&mut rng);
            let greedy = expected_miss_ratio(&optimal_allocation_greedy(k, &w), &w).miss_ratio;
            let brute = optimal_allocation_bruteforce(k, &w).unwrap();
            let brute = expected_miss_ratio(&brute, &w).miss_ratio;
            worst = worst.max((greedy - brute).abs());
        }
        worst
    });
    r.check(
        "oracle equivalence",
        worst <= 1e-12 && took < Duration::from_secs(5),
        format!("100 instances, max |greedy - brute force| = {worst:.3e}, {took:.2?}"),
    );
}

fn monte_carlo_consistency(r: &mut Report, desk: &ScenarioConfig) {
    let config = with_policy(desk, Policy::Optimal);
    let (out, took) = timed(|| sim::run(&config).unwrap());
    let window = out.series.tail(config.window_slots());
    let requests: u64 = window.iter().map(|s| s.requests).sum();
    let observed = out.summary.final_window_cost.unwrap();
    let expected = out.summary.expected_optimal_cost;
    let se = (expected * (1.0 - expected) / requests as f64).sqrt();
    let z = (observed - expected) / se;
    r.check(
        "monte-carlo vs analytic (optimal static)",
        z.abs() <= 3.0 && took < Duration::from_secs(60),
        format!("window cost {observed:.5}, expected {expected:.5}, z = {z:+.2}, {took:.2?}"),
    );
}

fn scaled_convergence(r: &mut Report, rl: &RunOutput, took: Duration) {
    let s = &rl.summary;
    let cost = s.final_window_cost.unwrap();
    let prop = s.final_window_proportional_cost.unwrap();
    let expected = s.expected_optimal_cost;
    let rel = (cost - expected).abs() / expected;
    let gain = s.final_window_gain.unwrap();
    let fast = took < Duration::from_secs(60);
    r.check(
        "scaled convergence (a) rl below proportional",
        cost < prop && fast,
        format!("final window rl {cost:.4} vs proportional {prop:.4}, {took:.2?}"),
    );
    r.check(
        "scaled convergence (b) rl within 15% of optimal",
        rel <= 0.15,
        format!("final window rl {cost:.4} vs expected optimal {expected:.4}, relative gap {rel:.3}"),
    );
    r.check(
        "scaled convergence (c) gain >= 0.10",
        gain >= 0.10,
        format!("final window gain {gain:.4}"),
    );
}

fn spsa_ordering(r: &mut Report, desk: &ScenarioConfig, rl: &RunOutput) {
    let spsa = sim::run(&with_policy(desk, Policy::Spsa)).unwrap();
    let w = desk.window_slots();
    let total = |out: &RunOutput| out.series.tail(w).iter().map(|s| s.cost()).sum::<u64>();
    let (a, b) = (total(rl), total(&spsa));
    r.check(
        "rl final-window cost <= spsa",
        a <= b,
        format!("rl {a} vs spsa {b} objects over the final window"),
    );
}

fn schedule_checks(r: &mut Report) {
    let cfg = ScheduleConfig::default();
    let e0: f64 = epsilon_schedule(0, &cfg);
    let ez: f64 = epsilon_schedule(cfg.horizon, &cfg);
    let n0 = minibatch_schedule(0, &cfg);
    let mut previous: f64 = alpha_schedule(0, &cfg);
    let mut rises = false;
    let mut floor_at = None;
    for k in 1..2_000_000u64 {
        let a: f64 = alpha_schedule(k, &cfg);
        rises |= a > previous;
        previous = a;
        if a == cfg.alpha_floor && floor_at.is_none() {
            floor_at = Some(k);
        }
    }
    let pass = e0 >= 0.999 * cfg.epsilon0
        && (ez - 0.09).abs() <= 5e-4
        && n0 == 37
        && floor_at.is_some()
        && !rises;
    r.check(
        "schedule formulas",
        pass,
        format!(
            "eps(0) = {e0:.6}, eps(Z) = {ez:.6}, N(0) = {n0}, alpha floor reached at k = {floor_at:?}, never rises: {}",
            !rises
        ),
    );
}

fn q_fixed_point(r: &mut Report) {
    let state = Allocation::new(vec![1], 1, 1).unwrap();
    let (c, alpha, gamma) = (3.0, 0.5, 0.99);
    let target = c / (1.0 - gamma);
    let mut q = QTable::new(1);
    let mut iterations = None;
    for i in 1..=100_000 {
        q_update(&mut q, &state, Action::Null, c, &state, alpha, gamma);
        if ((q.get(state.theta(), Action::Null) - target) / target).abs() <= 1e-6 {
            iterations = Some(i);
            break;
        }
    }
    r.check(
        "q-learning fixed point",
        iterations.is_some(),
        format!(
            "Q = {:.9}, c/(1-gamma) = {target}, converged after {iterations:?} updates",
            q.get(state.theta(), Action::Null)
        ),
    );
}

fn small_mdp(r: &mut Report) {
    let fractions: Vec<f64> = (1..=10)
        .map(|seed| {
            let out = sim::run(&common::small_mdp_config(seed)).unwrap();
            let tail = out.series.tail(1000);
            let settled = tail
                .iter()
                .filter(|s| s.theta == [10, 0] && s.action == Some(Action::Null))
                .count();
            settled as f64 / tail.len() as f64
        })
        .collect();
    let worst = fractions.iter().copied().fold(1.0, f64::min);
    r.check(
        "small-mdp optimality",
        worst >= 0.95,
        format!("share of last 1000 slots at (10, 0) with null action, worst of 10 seeds: {worst:.3}"),
    );
}

fn fairness(r: &mut Report, rl: &RunOutput) {
    let s = &rl.summary;
    let (p, q, o) = (
        s.jain_proportional.unwrap(),
        s.jain_policy.unwrap(),
        s.jain_optimal.unwrap(),
    );
    r.check(
        "fairness ordering",
        p > q && q > o,
        format!("J(proportional) = {p:.3}, J(rl) = {q:.3}, J(optimal) = {o:.3}"),
    );
}

fn sensitivity(r: &mut Report, desk: &ScenarioConfig) {
    let mut base = desk.clone();
    base.delta = None;
    let rows = sim::sweep(&base, SweepParam::Capacity, &[5e2, 5e3, 5e4]).unwrap();
    let savings: Vec<f64> = rows.iter().map(|r| r.saving()).collect();
    r.check(
        "sensitivity: saving non-decreasing in K",
        savings.windows(2).all(|w| w[1] >= w[0]),
        format!("average saving over proportional at K = 5e2, 5e3, 5e4: {savings:.4?}"),
    );
    let rows = sim::sweep(desk, SweepParam::Lambda, &[4e1, 4e2, 4e3]).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap()).collect();
    r.check(
        "sensitivity: gap to optimal non-increasing in lambda",
        gaps.windows(2).all(|w| w[1] <= w[0]),
        format!("average gap to optimal at lambda = 4e1, 4e2, 4e3: {gaps:.4?}"),
    );
}

fn traced(config: &ScenarioConfig) -> (RunOutput, Vec<u8>, Duration) {
    let mut csv = Vec::new();
    let (out, took) = timed(|| sim::run_with(config, RunOptions::default(), Some(&mut csv)).unwrap());
    (out, csv, took)
}

fn main() {
    let mut r = Report { failed: 0 };
    let desk = common::desk_config();

    oracle_equivalence(&mut r);
    monte_carlo_consistency(&mut r, &desk);

    let rl_config = with_policy(&desk, Policy::Rl);
    let (rl, first, took) = traced(&rl_config);
    scaled_convergence(&mut r, &rl, took);
    spsa_ordering(&mut r, &desk, &rl);
    schedule_checks(&mut r);
    q_fixed_point(&mut r);
    small_mdp(&mut r);
    fairness(&mut r, &rl);
    sensitivity(&mut r, &desk);

    let (_, second, _) = traced(&rl_config);
    r.check(
        "determinism",
        first == second,
        format!("two rl runs, seed {}: {} byte CSV traces identical: {}", desk.seed, first.len(), first == second),
    );

    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
}
