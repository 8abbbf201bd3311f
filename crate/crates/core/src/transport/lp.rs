//! Exact transportation problem for small weighted measures, solved as a
//! min-cost flow by successive shortest paths with node potentials.
//!
//! Network: super source `S` → source atoms (capacity = weight), every source
//! atom → every target atom (unbounded, cost = squared distance), target
//! atoms → super sink `T` (capacity = weight). Dense Dijkstra is plenty for
//! the ≤ 64 × 64 instances this backs.

use crate::error::{Error, Result};

/// Residual masses below this are treated as exhausted.
const MASS_EPS: f64 = 1e-15;

/// Returns the optimal flow matrix (row-major, `m × n`).
pub fn solve_transport<C: Fn(usize, usize) -> f64>(
    supply: &[f64],
    demand: &[f64],
    cost: C,
) -> Result<Vec<f64>> {
    let m = supply.len();
    let n = demand.len();
    // node layout: 0 = S, 1..=m sources, m+1..=m+n targets, m+n+1 = T
    let src = |i: usize| 1 + i;
    let dst = |j: usize| 1 + m + j;
    let sink = m + n + 1;
    let nodes = m + n + 2;

    let c: Vec<f64> = (0..m * n).map(|k| cost(k / n, k % n)).collect();
    let mut flow = vec![0.0f64; m * n];
    let mut left_supply = supply.to_vec();
    let mut left_demand = demand.to_vec();
    let mut pot = vec![0.0f64; nodes];

    let mut dist = vec![f64::INFINITY; nodes];
    let mut done = vec![false; nodes];
    let mut parent = vec![usize::MAX; nodes];

    for _round in 0..(64 * (m + n) + 64) {
        let remaining: f64 = left_supply.iter().sum();
        if remaining <= 1e-14 {
            return Ok(flow);
        }

        dist.fill(f64::INFINITY);
        done.fill(false);
        parent.fill(usize::MAX);
        dist[0] = 0.0;

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (k, &dk) in dist.iter().enumerate() {
                if !done[k] && dk < best {
                    best = dk;
                    u = k;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            let mut relax = |w: usize, edge_cost: f64, dist: &mut Vec<f64>| {
                let rc = (edge_cost + pot[u] - pot[w]).max(0.0);
                if dist[u] + rc < dist[w] {
                    dist[w] = dist[u] + rc;
                    parent[w] = u;
                }
            };
            if u == 0 {
                for i in 0..m {
                    if left_supply[i] > MASS_EPS {
                        relax(src(i), 0.0, &mut dist);
                    }
                }
            } else if u <= m {
                let i = u - 1;
                for j in 0..n {
                    relax(dst(j), c[i * n + j], &mut dist);
                }
                if supply[i] - left_supply[i] > MASS_EPS {
                    relax(0, 0.0, &mut dist);
                }
            } else if u < sink {
                let j = u - 1 - m;
                for i in 0..m {
                    if flow[i * n + j] > MASS_EPS {
                        relax(src(i), -c[i * n + j], &mut dist);
                    }
                }
                if left_demand[j] > MASS_EPS {
                    relax(sink, 0.0, &mut dist);
                }
            }
        }

        if !dist[sink].is_finite() {
            return Err(Error::Internal(
                "transportation problem infeasible: sink unreachable".into(),
            ));
        }
        let dt = dist[sink];
        for k in 0..nodes {
            pot[k] += dist[k].min(dt);
        }

        // bottleneck along S -> ... -> T
        let mut amount = f64::INFINITY;
        let mut w = sink;
        while w != 0 {
            let u = parent[w];
            let cap = if u == 0 {
                left_supply[w - 1]
            } else if w == sink {
                left_demand[u - 1 - m]
            } else if u <= m {
                f64::INFINITY
            } else {
                flow[(w - 1) * n + (u - 1 - m)]
            };
            amount = amount.min(cap);
            w = u;
        }

        let mut w = sink;
        while w != 0 {
            let u = parent[w];
            if u == 0 {
                left_supply[w - 1] -= amount;
                if left_supply[w - 1] < MASS_EPS {
                    left_supply[w - 1] = 0.0;
                }
            } else if w == sink {
                left_demand[u - 1 - m] -= amount;
                if left_demand[u - 1 - m] < MASS_EPS {
                    left_demand[u - 1 - m] = 0.0;
                }
            } else if u <= m {
                flow[(u - 1) * n + (w - 1 - m)] += amount;
            } else {
                let k = (w - 1) * n + (u - 1 - m);
                flow[k] -= amount;
                if flow[k] < MASS_EPS {
                    flow[k] = 0.0;
                }
            }
            w = u;
        }
    }
    Err(Error::Internal(
        "transportation solver exceeded its augmentation budget".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_crossing() {
        let flow = solve_transport(&[0.5, 0.5], &[0.5, 0.5], |i, j| {
            if i == j { 0.0 } else { 1.0 }
        })
        .unwrap();
        assert_eq!(flow, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn requires_backward_edge() {
        // greedy would send source 0 to target 0; the optimum reroutes it
        let c = [1.0, 2.0, 1.0, 10.0];
        let flow = solve_transport(&[0.5, 0.5], &[0.5, 0.5], |i, j| c[i * 2 + j]).unwrap();
        let total: f64 = flow.iter().zip(&c).map(|(f, c)| f * c).sum();
        assert!((total - 1.5).abs() < 1e-15);
    }

    #[test]
    fn unbalanced_counts() {
        let flow = solve_transport(&[0.2, 0.3, 0.5], &[0.6, 0.4], |i, j| {
            ((i as f64) - 2.0 * j as f64).powi(2)
        })
        .unwrap();
        for i in 0..3 {
            let row: f64 = flow[i * 2..i * 2 + 2].iter().sum();
            assert!((row - [0.2, 0.3, 0.5][i]).abs() < 1e-12);
        }
        for j in 0..2 {
            let col: f64 = (0..3).map(|i| flow[i * 2 + j]).sum();
            assert!((col - [0.6, 0.4][j]).abs() < 1e-12);
        }
    }
}
