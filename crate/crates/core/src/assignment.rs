//! Minimum-cost bipartite assignment (Kuhn-Munkres).
//!
//! The solver is the shortest-augmenting-path form of the Hungarian method
//! with row/column potentials, O(n²·m) for an n×m matrix with n ≤ m. Wider
//! than tall matrices are solved directly; taller ones are transposed.

use crate::error::{Error, Result};

/// Dense non-negative cost matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "cost matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some((i, c)) = data
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return Err(Error::input(format!(
                "cost entry ({}, {}) = {c} is not finite and non-negative",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::input("ragged cost matrix"));
        }
        Self::new(n, m, rows.concat())
    }

    /// Builds an `rows × cols` matrix from a cost function. Entries are
    /// validated like [`CostMatrix::new`].
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    fn transposed(&self) -> CostMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        CostMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssignmentResult {
    /// Matched `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the matched entries, accumulated in row order.
    pub total_cost: f64,
}

impl AssignmentResult {
    /// Column matched to `row`, if any.
    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|(r, _)| *r == row).map(|(_, c)| *c)
    }

    /// Row matched to `col`, if any.
    pub fn row_of(&self, col: usize) -> Option<usize> {
        self.pairs.iter().find(|(_, c)| *c == col).map(|(r, _)| *r)
    }
}

/// Finds a matching of size `min(rows, cols)` with minimum total cost.
///
/// Output is a pure function of the matrix. When several columns tie during
/// a scan the lowest index wins, so equal-cost alternatives resolve toward
/// low row and column indices.
pub fn solve_assignment(cost: &CostMatrix) -> AssignmentResult {
    if cost.rows == 0 || cost.cols == 0 {
        return AssignmentResult::default();
    }
    let mut pairs = if cost.rows <= cost.cols {
        hungarian(cost)
    } else {
        let mut p: Vec<_> = hungarian(&cost.transposed())
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect();
        p.sort_unstable();
        p
    };
    pairs.sort_unstable();
    let total_cost = pairs.iter().map(|&(r, c)| cost.get(r, c)).sum();
    AssignmentResult { pairs, total_cost }
}

/// Requires `rows <= cols`. Returns `(row, col)` pairs.
fn hungarian(a: &CostMatrix) -> Vec<(usize, usize)> {
    let n = a.rows;
    let m = a.cols;
    // 1-based, index 0 is the virtual source column/row.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of_col = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=m)
        .filter(|&j| row_of_col[j] != 0)
        .map(|j| (row_of_col[j] - 1, j - 1))
        .collect()
}
