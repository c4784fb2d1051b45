//! Square assignment problems for component matching.

/// Largest size solved by enumerating permutations.
pub const BRUTE_FORCE_LIMIT: usize = 6;

/// Permutation `p` maximising `Σ weights[i][p[i]]`.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    if weights.len() <= BRUTE_FORCE_LIMIT {
        brute_force_assignment(weights)
    } else {
        hungarian_assignment(weights)
    }
}

pub fn assignment_total(weights: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| weights[i][j]).sum()
}

/// Exhaustive search in lexicographic order; the first maximum wins.
pub fn brute_force_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    fn walk(
        w: &[Vec<f64>],
        row: usize,
        used: &mut [bool],
        cur: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let n = w.len();
        if row == n {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                *best = Some((acc, cur.clone()));
            }
            return;
        }
        for j in 0..n {
            if used[j] {
                continue;
            }
            used[j] = true;
            cur.push(j);
            walk(w, row + 1, used, cur, acc + w[row][j], best);
            cur.pop();
            used[j] = false;
        }
    }
    let mut best = None;
    walk(
        weights,
        0,
        &mut vec![false; weights.len()],
        &mut Vec::new(),
        0.0,
        &mut best,
    );
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Kuhn-Munkres with potentials, O(n³).
pub fn hungarian_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}
