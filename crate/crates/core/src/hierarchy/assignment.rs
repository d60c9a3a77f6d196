//! Minimum-cost perfect assignment (Hungarian algorithm, O(k^3)).

/// Result of a square assignment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub cost: f64,
    /// `columns[i]` is the column assigned to row `i`.
    pub columns: Vec<usize>,
}

/// Solve the square assignment problem on `costs` (k x k, finite entries).
///
/// Potentials-based shortest augmenting path. Ties are broken toward the
/// lowest column index, so the witness is deterministic; the optimal value
/// does not depend on tie-breaking.
pub fn min_cost_assignment(costs: &[Vec<f64>]) -> Assignment {
    let n = costs.len();
    if n == 0 {
        return Assignment {
            cost: 0.0,
            columns: Vec::new(),
        };
    }
    debug_assert!(costs.iter().all(|r| r.len() == n), "cost matrix must be square");

    // 1-based potentials; column 0 is the virtual start.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            columns[row_of[j] - 1] = j - 1;
        }
    }
    // Sum the original entries rather than trusting the potentials.
    let cost = columns.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
    Assignment { cost, columns }
}

/// Square matrix for matching `m` children against `n` children.
///
/// Real pairs cost `pairwise[i][j]`; a real child paired with a dummy costs
/// its subtree size (`delete[i]` or `insert[j]`); dummy pairs cost 0.
pub fn padded_cost_matrix(pairwise: &[Vec<f64>], delete: &[f64], insert: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (delete.len(), insert.len());
    debug_assert_eq!(pairwise.len(), m);
    let k = m.max(n);
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| match (i < m, j < n) {
                    (true, true) => pairwise[i][j],
                    (true, false) => delete[i],
                    (false, true) => insert[j],
                    (false, false) => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Optimal children pairing: which real children match, and the total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ChildMatching {
    pub cost: f64,
    pub pairs: Vec<(usize, usize)>,
    pub deleted: Vec<usize>,
    pub inserted: Vec<usize>,
}

/// Minimum cost of matching two children lists, padding the shorter side
/// with dummy children.
pub fn match_children(pairwise: &[Vec<f64>], delete: &[f64], insert: &[f64]) -> ChildMatching {
    let (m, n) = (delete.len(), insert.len());
    let matrix = padded_cost_matrix(pairwise, delete, insert);
    let solved = min_cost_assignment(&matrix);
    let mut pairs = Vec::new();
    let mut deleted = Vec::new();
    let mut inserted = Vec::new();
    for (i, &j) in solved.columns.iter().enumerate() {
        match (i < m, j < n) {
            (true, true) => pairs.push((i, j)),
            (true, false) => deleted.push(i),
            (false, true) => inserted.push(j),
            (false, false) => {}
        }
    }
    ChildMatching {
        cost: solved.cost,
        pairs,
        deleted,
        inserted,
    }
}

/// Value of the optimal children matching. `delete` and `insert` hold the
/// subtree sizes of the two children lists.
pub fn match_cost(pairwise: &[Vec<f64>], delete: &[f64], insert: &[f64]) -> f64 {
    match_children(pairwise, delete, insert).cost
}
