//! Dense linear assignment by shortest augmenting paths (Jonker-Volgenant).
//!
//! Costs are never materialized: the solver queries `cost(row, col)` on the
//! fly, so memory stays `O(n)` and an `n = 5000` point-cloud problem fits in a
//! few hundred kilobytes. Phases:
//!
//! 1. column reduction with reduction transfer,
//! 2. two passes of augmenting row reduction,
//! 3. Dijkstra-style augmentation for every row still unassigned.
//!
//! The invariant kept throughout is that every assigned row sits on a minimum
//! of its reduced costs `cost(i, j) - v[j]`, which is what makes the final
//! assignment optimal.

const NONE: usize = usize::MAX;

/// Solves `min_σ Σ_i cost(i, σ(i))` over permutations of `0..n`.
///
/// Returns `col_of_row`, i.e. `σ`. Costs must be finite.
pub fn solve<C: Fn(usize, usize) -> f64>(n: usize, cost: C) -> Vec<usize> {
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }

    let mut v = vec![0.0f64; n];
    let mut col_of_row = vec![NONE; n];
    let mut row_of_col = vec![NONE; n];

    // Column reduction, scanning columns in reverse.
    let mut matches = vec![0u32; n];
    for j in (0..n).rev() {
        let mut imin = 0;
        let mut min = cost(0, j);
        for i in 1..n {
            let c = cost(i, j);
            if c < min {
                min = c;
                imin = i;
            }
        }
        v[j] = min;
        matches[imin] += 1;
        if matches[imin] == 1 {
            col_of_row[imin] = j;
            row_of_col[j] = imin;
        }
    }

    // Reduction transfer from rows assigned exactly once.
    let mut free = Vec::new();
    for i in 0..n {
        match matches[i] {
            0 => free.push(i),
            1 => {
                let j1 = col_of_row[i];
                let mut min = f64::INFINITY;
                for j in 0..n {
                    if j != j1 {
                        let h = cost(i, j) - v[j];
                        if h < min {
                            min = h;
                        }
                    }
                }
                v[j1] -= min;
            }
            _ => {}
        }
    }

    // Augmenting row reduction. A step budget guards against float ping-pong
    // between two nearly tied columns; leftover rows go to augmentation.
    for _ in 0..2 {
        if free.is_empty() {
            break;
        }
        let mut queue = std::mem::take(&mut free);
        let mut budget = 8 * n;
        let mut k = 0;
        while k < queue.len() {
            let i = queue[k];
            k += 1;

            let mut umin = cost(i, 0) - v[0];
            let mut j1 = 0;
            let mut usubmin = f64::INFINITY;
            let mut j2 = NONE;
            for j in 1..n {
                let h = cost(i, j) - v[j];
                if h < usubmin {
                    if h >= umin {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }

            let mut i0 = row_of_col[j1];
            let strict = umin < usubmin;
            if strict {
                v[j1] -= usubmin - umin;
            } else if i0 != NONE && j2 != NONE {
                j1 = j2;
                i0 = row_of_col[j2];
            }

            if i0 != NONE {
                col_of_row[i0] = NONE;
            }
            col_of_row[i] = j1;
            row_of_col[j1] = i;

            if i0 != NONE {
                if strict && budget > 0 {
                    budget -= 1;
                    k -= 1;
                    queue[k] = i0;
                } else {
                    free.push(i0);
                }
            }
        }
    }

    // Shortest augmenting paths for the remaining free rows.
    let mut d = vec![0.0f64; n];
    let mut pred = vec![0usize; n];
    let mut cols: Vec<usize> = (0..n).collect();
    for &f in &free {
        for j in 0..n {
            d[j] = cost(f, j) - v[j];
            pred[j] = f;
            cols[j] = j;
        }
        // cols[..low] scanned, cols[low..up] at the current minimum, rest pending
        let mut low = 0;
        let mut up = 0;
        let mut min = 0.0;
        let end_col;
        'search: loop {
            if up == low {
                min = d[cols[up]];
                up += 1;
                for k in up..n {
                    let j = cols[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                }
                for &j in &cols[low..up] {
                    if row_of_col[j] == NONE {
                        end_col = j;
                        break 'search;
                    }
                }
            }

            let j1 = cols[low];
            low += 1;
            let i = row_of_col[j1];
            let u1 = cost(i, j1) - v[j1] - min;
            let mut k = up;
            while k < n {
                let j = cols[k];
                let v2 = cost(i, j) - v[j] - u1;
                if v2 < d[j] {
                    pred[j] = i;
                    d[j] = v2;
                    if v2 <= min {
                        if row_of_col[j] == NONE {
                            end_col = j;
                            break 'search;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                }
                k += 1;
            }
        }

        // Price update on scanned columns.
        for &j in &cols[..low] {
            v[j] += d[j] - min;
        }

        // Flip the alternating path.
        let mut j = end_col;
        loop {
            let i = pred[j];
            row_of_col[j] = i;
            let prev = col_of_row[i];
            col_of_row[i] = j;
            if i == f {
                break;
            }
            j = prev;
        }
    }

    debug_assert!(col_of_row.iter().all(|&j| j != NONE));
    col_of_row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(n: usize, c: &[f64]) -> f64 {
        fn rec(row: usize, n: usize, c: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(row + 1, n, c, used, acc + c[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, n, c, &mut vec![false; n], 0.0, &mut best);
        best
    }

    fn total(n: usize, c: &[f64], sol: &[usize]) -> f64 {
        (0..n).map(|i| c[i * n + sol[i]]).sum()
    }

    fn is_permutation(sol: &[usize]) -> bool {
        let mut seen = vec![false; sol.len()];
        sol.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }

    #[test]
    fn small_matrix_known_optimum() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let sol = solve(3, |i, j| c[i * 3 + j]);
        assert!(is_permutation(&sol));
        assert_eq!(total(3, &c, &sol), 5.0);
    }

    #[test]
    fn constant_and_tied_matrices() {
        let sol = solve(5, |_, _| 1.0);
        assert!(is_permutation(&sol));
        let sol = solve(4, |i, j| ((i + j) % 2) as f64);
        assert!(is_permutation(&sol));
        assert_eq!((0..4).map(|i| ((i + sol[i]) % 2) as f64).sum::<f64>(), 0.0);
    }

    #[test]
    fn integer_matrices_match_brute_force() {
        // deterministic LCG so the cases are reproducible without an RNG crate
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % 7
        };
        for n in 1..=7 {
            for _ in 0..40 {
                let c: Vec<f64> = (0..n * n).map(|_| next() as f64).collect();
                let sol = solve(n, |i, j| c[i * n + j]);
                assert!(is_permutation(&sol));
                assert_eq!(total(n, &c, &sol), brute_force(n, &c));
            }
        }
    }
}
