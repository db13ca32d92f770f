//! Exact assignment and small-support transportation solvers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{argument, Error, Result};

/// Min-cost perfect matching on a dense square cost matrix (row-major).
///
/// Shortest augmenting paths with row/column potentials, one row at a time.
/// Ties prefer unassigned columns, which keeps degenerate costs cheap.
/// Returns `col_for_row` and the total cost.
pub fn solve_assignment(cost: &[f64], n: usize) -> Result<(Vec<usize>, f64)> {
    if cost.len() != n * n {
        return argument("assignment cost matrix must be n × n");
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return argument("assignment costs must be finite");
    }
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut path = vec![NONE; n];
    let mut dist = vec![0.0; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);
    let mut seen_row = vec![false; n];
    let mut seen_col = vec![false; n];

    for cur in 0..n {
        remaining.clear();
        remaining.extend((0..n).rev());
        seen_row.fill(false);
        seen_col.fill(false);
        dist.fill(f64::INFINITY);

        let mut min_val = 0.0;
        let mut i = cur;
        let sink = loop {
            seen_row[i] = true;
            let row = &cost[i * n..(i + 1) * n];
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + row[j] - u[i] - v[j];
                if r < dist[j] {
                    path[j] = i;
                    dist[j] = r;
                }
                if dist[j] < lowest || (dist[j] == lowest && row4col[j] == NONE) {
                    lowest = dist[j];
                    index = it;
                }
            }
            if index == NONE {
                return Err(Error::Numerical("assignment has no augmenting path".into()));
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            seen_col[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur] += min_val;
        for r in 0..n {
            if seen_row[r] && r != cur {
                u[r] += min_val - dist[col4row[r]];
            }
        }
        for c in 0..n {
            if seen_col[c] {
                v[c] -= min_val - dist[c];
            }
        }
        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur {
                break;
            }
        }
    }
    let total = (0..n).map(|r| cost[r * n + col4row[r]]).sum();
    Ok((col4row, total))
}

struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Min-cost transport from `m` sources with integer capacities to `n` unit
/// sinks, `Σ capacity = n`. `cost(i, j)` is the cost of one unit from source
/// `i` to sink `j`.
///
/// Equivalent to an assignment with source rows replicated by capacity, but
/// the augmenting-path search runs over sources only: moving a sink between
/// two full sources uses the cheapest reassignment, kept in lazy heaps.
/// Returns the source of every sink and the total cost.
pub fn solve_transport(capacity: &[usize], n: usize, cost: impl Fn(usize, usize) -> f64) -> Result<(Vec<usize>, f64)> {
    let m = capacity.len();
    if capacity.iter().sum::<usize>() != n {
        return argument("transport capacities must sum to the number of sinks");
    }
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let c: Vec<f64> = (0..n)
        .flat_map(|j| (0..m).map(move |i| (i, j)))
        .map(|(i, j)| cost(i, j))
        .collect();
    if c.iter().any(|x| !x.is_finite()) {
        return argument("transport costs must be finite");
    }
    let at = |j: usize, i: usize| c[j * m + i];

    let mut source = vec![usize::MAX; n];
    let mut version = vec![0u32; n];
    let mut used = vec![0usize; m];
    let mut pot = vec![0.0; m];
    // heaps[i * m + k]: sinks at i keyed by the cost change of moving them to k.
    let mut heaps: Vec<BinaryHeap<Reverse<(Key, usize, u32)>>> = (0..m * m).map(|_| BinaryHeap::new()).collect();

    let mut dist = vec![0.0; m];
    let mut done = vec![false; m];
    let mut pred = vec![usize::MAX; m];
    let mut pred_sink = vec![usize::MAX; m];

    for j in 0..n {
        let base = (0..m).map(|i| at(j, i) - pot[i]).fold(f64::INFINITY, f64::min);
        for i in 0..m {
            dist[i] = at(j, i) - pot[i] - base;
            pred[i] = usize::MAX;
            done[i] = false;
        }
        let target = loop {
            let mut best = usize::MAX;
            for i in 0..m {
                if !done[i] && (best == usize::MAX || dist[i] < dist[best]) {
                    best = i;
                }
            }
            if best == usize::MAX {
                return Err(Error::Numerical("transport has no augmenting path".into()));
            }
            done[best] = true;
            if used[best] < capacity[best] {
                break best;
            }
            for k in 0..m {
                if done[k] {
                    continue;
                }
                let heap = &mut heaps[best * m + k];
                while let Some(Reverse((_, s, ver))) = heap.peek() {
                    if source[*s] == best && version[*s] == *ver {
                        break;
                    }
                    heap.pop();
                }
                if let Some(Reverse((Key(w), s, _))) = heap.peek() {
                    let nd = dist[best] + w + pot[best] - pot[k];
                    if nd < dist[k] {
                        dist[k] = nd;
                        pred[k] = best;
                        pred_sink[k] = *s;
                    }
                }
            }
        };

        let dt = dist[target];
        for i in 0..m {
            if done[i] {
                pot[i] += dist[i].min(dt);
            } else {
                pot[i] += dt;
            }
        }

        // Walk back from the target, shifting one sink along each edge.
        let mut node = target;
        used[target] += 1;
        while pred[node] != usize::MAX {
            let (from, s) = (pred[node], pred_sink[node]);
            place(s, node, &mut source, &mut version, &mut heaps, m, &at);
            node = from;
        }
        place(j, node, &mut source, &mut version, &mut heaps, m, &at);
    }
    let total = (0..n).map(|j| at(j, source[j])).sum();
    Ok((source, total))
}

fn place(
    sink: usize,
    to: usize,
    source: &mut [usize],
    version: &mut [u32],
    heaps: &mut [BinaryHeap<Reverse<(Key, usize, u32)>>],
    m: usize,
    at: &impl Fn(usize, usize) -> f64,
) {
    source[sink] = to;
    version[sink] = version[sink].wrapping_add(1);
    let ver = version[sink];
    let here = at(sink, to);
    for k in 0..m {
        if k != to {
            heaps[to * m + k].push(Reverse((Key(at(sink, k) - here), sink, ver)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(cost: &[f64], n: usize) -> f64 {
        fn go(cost: &[f64], n: usize, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    go(cost, n, row + 1, used, acc + cost[row * n + c], best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=7 {
            for _ in 0..10 {
                let cost: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
                let (perm, total) = solve_assignment(&cost, n).unwrap();
                let mut seen = perm.clone();
                seen.sort();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                assert!((total - brute_force(&cost, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn assignment_handles_ties_and_integers() {
        let n = 6;
        let cost: Vec<f64> = (0..n * n).map(|k| ((k * 7) % 3) as f64).collect();
        let (_, total) = solve_assignment(&cost, n).unwrap();
        assert_eq!(total, brute_force(&cost, n));
        let zeros = vec![0.0; 100 * 100];
        assert_eq!(solve_assignment(&zeros, 100).unwrap().1, 0.0);
    }

    #[test]
    fn assignment_rejects_bad_input() {
        assert!(solve_assignment(&[0.0; 3], 2).is_err());
        assert!(solve_assignment(&[f64::NAN], 1).is_err());
    }

    #[test]
    fn transport_matches_replicated_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let m = rng.random_range(1..5usize);
            let capacity: Vec<usize> = (0..m).map(|_| rng.random_range(1..4usize)).collect();
            let n: usize = capacity.iter().sum();
            let cost: Vec<f64> = (0..m * n).map(|_| rng.random::<f64>()).collect();
            let (src, total) = solve_transport(&capacity, n, |i, j| cost[i * n + j]).unwrap();
            let mut counts = vec![0; m];
            for &s in &src {
                counts[s] += 1;
            }
            assert_eq!(counts, capacity);

            let rows: Vec<usize> = (0..m).flat_map(|i| std::iter::repeat_n(i, capacity[i])).collect();
            let square: Vec<f64> = rows
                .iter()
                .flat_map(|&i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| cost[i * n + j])
                .collect();
            let (_, expect) = solve_assignment(&square, n).unwrap();
            assert!((total - expect).abs() < 1e-12, "{total} vs {expect}");
        }
    }

    #[test]
    fn transport_rejects_capacity_mismatch() {
        assert!(solve_transport(&[1, 1], 3, |_, _| 0.0).is_err());
    }
}
