//! Full-information reference: analytic expected miss ratio and the optimal
//! static partition.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::workload::Workload;

/// Long-run fraction of requests that miss under a static allocation.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ExpectedCost<T> {
    pub miss_ratio: T,
}

/// `1 - sum_p f_p * zeta_p * head_mass_p(theta_p)`.
///
/// Shares beyond a catalog are clamped to the catalog size, with a warning.
pub fn expected_miss_ratio<T: Real>(theta: &[u64], workload: &Workload<T>) -> ExpectedCost<T> {
    assert_eq!(
        theta.len(),
        workload.num_sps(),
        "allocation dimension must match provider count"
    );
    let mut hit = CompensatedSum::new();
    for (p, (&slots, (profile, catalog))) in theta
        .iter()
        .zip(workload.profiles().iter().zip(workload.catalogs()))
        .enumerate()
    {
        if slots > catalog.len() as u64 {
            log::warn!(
                "provider {} holds {slots} slots but its catalog has only {} objects; clamping",
                p + 1,
                catalog.len()
            );
        }
        hit.add(profile.cacheable_share() * catalog.head_mass(slots));
    }
    ExpectedCost {
        miss_ratio: (T::one() - hit.value()).max(T::zero()).min(T::one()),
    }
}

/// Marginal hit probability of the `rank`-th object of provider `p`.
fn weighted_popularity<T: Real>(workload: &Workload<T>, p: usize, rank: u64) -> T {
    workload.profiles()[p].cacheable_share() * workload.catalogs()[p].probability(rank)
}

/// Optimal slot-level partition of `capacity` by greedy merging.
///
/// Each slot goes to the provider whose next uncached object carries the
/// largest weighted popularity `f_p * zeta_p * rho_p(next)`. Popularity is
/// non-increasing in rank, so the merge is exact. Ties go to the lowest index.
/// Once every catalog is fully cached, leftover slots go to the provider with
/// the largest catalog.
pub fn optimal_allocation_greedy<T: Real>(capacity: u64, workload: &Workload<T>) -> Vec<u64> {
    let p_count = workload.num_sps();
    let sizes: Vec<u64> = workload.catalogs().iter().map(|c| c.len() as u64).collect();
    let mut theta = vec![0u64; p_count];
    let mut next: Vec<T> = (0..p_count)
        .map(|p| weighted_popularity(workload, p, 1))
        .collect();

    for _ in 0..capacity {
        let mut best: Option<usize> = None;
        for p in 0..p_count {
            if theta[p] >= sizes[p] {
                continue;
            }
            if best.is_none_or(|b| next[p] > next[b]) {
                best = Some(p);
            }
        }
        let Some(p) = best else {
            let largest = (0..p_count)
                .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
                .expect("at least one provider");
            theta[largest] += capacity - theta.iter().sum::<u64>();
            break;
        };
        theta[p] += 1;
        next[p] = weighted_popularity(workload, p, theta[p] + 1);
    }
    theta
}

/// Optimal partition restricted to multiples of `delta`.
///
/// Same greedy merge, with blocks of `delta` objects instead of single slots.
/// Block gains stay non-increasing, so the merge remains exact on the grid.
pub fn optimal_allocation_on_grid<T: Real>(
    capacity: u64,
    delta: u64,
    workload: &Workload<T>,
) -> Result<Vec<u64>> {
    if delta == 0 || !capacity.is_multiple_of(delta) {
        return Err(Error::InvalidAllocation(format!(
            "delta {delta} does not divide capacity {capacity}"
        )));
    }
    let p_count = workload.num_sps();
    let block_gain = |p: usize, held: u64| -> T {
        let cat = &workload.catalogs()[p];
        workload.profiles()[p].cacheable_share()
            * (cat.head_mass(held + delta) - cat.head_mass(held))
    };
    let mut theta = vec![0u64; p_count];
    for _ in 0..capacity / delta {
        let mut best = 0;
        let mut best_gain = block_gain(0, theta[0]);
        for (p, &held) in theta.iter().enumerate().skip(1) {
            let g = block_gain(p, held);
            if g > best_gain {
                best = p;
                best_gain = g;
            }
        }
        theta[best] += delta;
    }
    Ok(theta)
}

/// Upper bound on candidates the exhaustive search will visit.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Exhaustive argmin of the expected miss ratio over all `theta` with
/// `sum theta_p = capacity` and `theta_p <= min(capacity, N_p)`.
///
/// Candidates are scanned in lexicographic order and only a strictly better
/// cost replaces the incumbent, so ties resolve to the lexicographically
/// smallest allocation.
pub fn optimal_allocation_bruteforce<T: Real>(
    capacity: u64,
    workload: &Workload<T>,
) -> Result<Vec<u64>> {
    let caps: Vec<u64> = workload
        .catalogs()
        .iter()
        .map(|c| (c.len() as u64).min(capacity))
        .collect();
    let count = count_bounded_compositions(capacity, &caps);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if count == 0 {
        return Err(Error::InvalidAllocation(format!(
            "capacity {capacity} exceeds the combined catalog size"
        )));
    }

    let mut best: Option<(T, Vec<u64>)> = None;
    let mut current = vec![0u64; caps.len()];
    for_each_composition(capacity, &caps, 0, &mut current, &mut |theta| {
        let cost = expected_miss_ratio(theta, workload).miss_ratio;
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, theta.to_vec()));
        }
    });
    Ok(best.expect("at least one composition").1)
}

fn for_each_composition<F: FnMut(&[u64])>(
    remaining: u64,
    caps: &[u64],
    index: usize,
    current: &mut Vec<u64>,
    visit: &mut F,
) {
    if index + 1 == caps.len() {
        if remaining <= caps[index] {
            current[index] = remaining;
            visit(current);
        }
        return;
    }
    let rest: u64 = caps[index + 1..].iter().sum();
    let low = remaining.saturating_sub(rest);
    for v in low..=caps[index].min(remaining) {
        current[index] = v;
        for_each_composition(remaining - v, caps, index + 1, current, visit);
    }
}

/// Number of vectors with `0 <= x_p <= caps[p]` summing to `total`.
pub fn count_bounded_compositions(total: u64, caps: &[u64]) -> u128 {
    // ways[s] = number of ways the providers seen so far reach sum s
    let total = total as usize;
    let mut ways = vec![0u128; total + 1];
    ways[0] = 1;
    for &cap in caps {
        let cap = cap as usize;
        let mut prefix = vec![0u128; total + 2];
        for s in 0..=total {
            prefix[s + 1] = prefix[s].saturating_add(ways[s]);
        }
        for s in 0..=total {
            let lo = s.saturating_sub(cap);
            ways[s] = prefix[s + 1] - prefix[lo];
        }
    }
    ways[total]
}
