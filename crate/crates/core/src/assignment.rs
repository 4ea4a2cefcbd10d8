//! Minimum-cost rectangular assignment and the frame-to-frame association
//! cost matrix.

use crate::error::AssignmentError;
use crate::geometry::ImagePoint;

/// Dense, row-major matrix of finite non-negative costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, AssignmentError> {
        if data.len() != rows * cols {
            return Err(AssignmentError::Shape { rows, cols, got: data.len() });
        }
        if let Some(idx) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(AssignmentError::InvalidEntry { row: idx / cols, col: idx % cols, value: data[idx] });
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(AssignmentError::Shape { rows: rows.len(), cols, got: data.len() + r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, AssignmentError> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Set of `(row, col)` pairs, injective in both coordinates, sorted by row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn col_for_row(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|(r, _)| *r == row).map(|&(_, c)| c)
    }

    /// Sum of the assigned entries, accumulated in row order.
    pub fn total_cost(&self, c: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(r, col)| c.get(r, col)).sum()
    }
}

/// Solves the rectangular assignment problem with the Hungarian method.
///
/// The matrix is zero-padded to square; pairs touching padding are dropped, so
/// the result has `min(rows, cols)` pairs. Among all optimal assignments the
/// lexicographically smallest pair list (of the padded problem) is returned.
pub fn hungarian_solve(c: &CostMatrix) -> Assignment {
    let n = c.rows.max(c.cols);
    if c.rows == 0 || c.cols == 0 {
        return Assignment::default();
    }
    let cost = |i: usize, j: usize| if i < c.rows && j < c.cols { c.get(i, j) } else { 0.0 };

    // Shortest augmenting path with potentials; 1-based, index 0 is a sentinel.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
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
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    let mut col_owner = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
        col_owner[j - 1] = owner[j] - 1;
    }

    // Every optimal assignment lives on the zero-reduced-cost edges of the
    // final duals; walk rows in order and take the smallest feasible column.
    let eps = 1e-10 * c.max_entry().max(f64::MIN_POSITIVE);
    let tight = |i: usize, j: usize| cost(i, j) - u[i + 1] - v[j + 1] <= eps;
    let mut row_fixed = vec![false; n];
    let mut col_fixed = vec![false; n];
    for i in 0..n {
        let current = row_to_col[i];
        for j in 0..current {
            if col_fixed[j] || !tight(i, j) {
                continue;
            }
            let displaced = col_owner[j];
            let mut banned_cols = col_fixed.clone();
            banned_cols[j] = true;
            let mut banned_rows = row_fixed.clone();
            banned_rows[i] = true;
            let mut visited = vec![false; n];
            let mut path = Vec::new();
            if reroute(displaced, current, &tight, &banned_rows, &banned_cols, &col_owner, &mut visited, &mut path) {
                for (r, col) in path {
                    row_to_col[r] = col;
                    col_owner[col] = r;
                }
                row_to_col[i] = j;
                col_owner[j] = i;
                break;
            }
        }
        row_fixed[i] = true;
        col_fixed[row_to_col[i]] = true;
    }

    let pairs = row_to_col
        .iter()
        .enumerate()
        .filter(|&(r, &col)| r < c.rows && col < c.cols)
        .map(|(r, &col)| (r, col))
        .collect();
    Assignment { pairs }
}

/// Depth-first search for an alternating path that moves `row` onto some
/// column and ends with a row taking `target`. On success `path` holds the
/// new `(row, col)` edges.
#[allow(clippy::too_many_arguments)]
fn reroute(
    row: usize,
    target: usize,
    tight: &impl Fn(usize, usize) -> bool,
    banned_rows: &[bool],
    banned_cols: &[bool],
    col_owner: &[usize],
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for col in 0..col_owner.len() {
        if banned_cols[col] || visited[col] || !tight(row, col) {
            continue;
        }
        visited[col] = true;
        if col == target {
            path.push((row, col));
            return true;
        }
        let next = col_owner[col];
        if banned_rows[next] {
            continue;
        }
        if reroute(next, target, tight, banned_rows, banned_cols, col_owner, visited, path) {
            path.push((row, col));
            return true;
        }
    }
    false
}

/// Association cost between predicted tracklet positions (rows) and detections
/// (columns): Euclidean pixel distance when closer than `d_max`, otherwise the
/// sentinel `image_diag`.
pub fn build_association_cost(
    predictions: &[ImagePoint],
    detections: &[ImagePoint],
    d_max: f64,
    image_diag: f64,
) -> CostMatrix {
    debug_assert!(d_max < image_diag);
    let data = predictions
        .iter()
        .flat_map(|p| {
            detections.iter().map(move |d| {
                let dist = p.distance(d);
                if dist < d_max {
                    dist
                } else {
                    image_diag
                }
            })
        })
        .collect();
    CostMatrix::new(predictions.len(), detections.len(), data).expect("distances are finite and non-negative")
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GatedAssociation {
    pub matched: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Splits an assignment into real associations and leftovers; pairs costing
/// `image_diag` or more are treated as non-associations.
pub fn gated_pairs(a: &Assignment, c: &CostMatrix, image_diag: f64) -> GatedAssociation {
    let mut row_used = vec![false; c.rows()];
    let mut col_used = vec![false; c.cols()];
    let mut matched = Vec::new();
    for &(r, col) in a.pairs() {
        if c.get(r, col) < image_diag {
            matched.push((r, col));
            row_used[r] = true;
            col_used[col] = true;
        }
    }
    GatedAssociation {
        matched,
        unmatched_rows: (0..c.rows()).filter(|&r| !row_used[r]).collect(),
        unmatched_cols: (0..c.cols()).filter(|&col| !col_used[col]).collect(),
    }
}
