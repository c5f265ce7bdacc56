//! Rectangular minimum-cost assignment by successive shortest augmenting
//! paths with dual potentials (the Jonker-Volgenant / Kuhn-Munkres family).
//!
//! Every row is matched to a distinct column; `rows <= cols` is required.
//! One Dijkstra-like sweep per row gives `O(rows^2 * cols)` time overall.

/// Solves `min sum_i cost[i][col(i)]` over injective `col`. `costs` is
/// row-major with `rows * cols` entries. Returns the column of each row and
/// the optimal total.
///
/// Pivot order is fixed (rows in order, lowest column index on ties), so
/// the optimum returned for a given matrix is deterministic.
pub fn solve(costs: &[i64], rows: usize, cols: usize) -> (Vec<usize>, i64) {
    assert!(rows <= cols, "assignment needs rows <= cols ({rows} > {cols})");
    assert_eq!(costs.len(), rows * cols, "cost matrix has wrong size");
    if rows == 0 {
        return (Vec::new(), 0);
    }

    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0 holding the row being inserted.
    let mut u = vec![0i64; rows + 1];
    let mut v = vec![0i64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![INF; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(INF);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &costs[(i0 - 1) * cols..i0 * cols];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = row[j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }

        // augment along the alternating path
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![usize::MAX; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * cols + j])
        .sum();
    (assignment, total)
}
