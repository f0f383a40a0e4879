use std::collections::{BTreeMap, VecDeque};

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};

use super::{ComplexMatrix, LinearOperator, C64};
use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Duplicate entries are summed; entries that cancel to exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Shape(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numerical(format!("non-finite entry at ({i}, {j})")));
            }
            *merged.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for ((i, j), v) in merged {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { rows, cols, row_ptr, col_idx, values })
    }

    pub fn from_dense(m: &ComplexMatrix) -> Self {
        Self::from_triplets(m.rows(), m.cols(), m.nonzeros(0.0)).expect("dense matrix entries are in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
            .expect("transposed entries are in range")
    }

    /// Sum of `self` and a multiple of the identity.
    pub fn shifted(&self, shift: C64) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("shift needs a square matrix".into()));
        }
        let diag = (0..self.rows).map(|i| (i, i, shift));
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(diag))
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols, "sparse apply dimension mismatch");
        assert_eq!(y.len(), self.rows, "sparse apply dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// Indices reachable from `seeds` by repeated application of the matrix.
    ///
    /// A vector supported on `seeds` stays inside the span of the returned
    /// coordinates under `exp(t * self)`, so the principal submatrix on them
    /// generates the exact dynamics of such vectors. Returned sorted.
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        // column j feeds row i whenever entry (i, j) is nonzero
        let mut feeds: Vec<Vec<usize>> = vec![Vec::new(); self.cols];
        for (i, j, _) in self.triplets() {
            feeds[j].push(i);
        }
        let mut seen = vec![false; self.rows.max(self.cols)];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(j) = queue.pop_front() {
            if j >= self.cols {
                continue;
            }
            for &i in &feeds[j] {
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        (0..seen.len()).filter(|&k| seen[k]).collect()
    }

    /// Connected components of the undirected sparsity graph, each sorted,
    /// ordered by smallest member. The matrix is block diagonal under the
    /// induced permutation.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.rows;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut k = 0;
            while k < members.len() {
                let v = members[k];
                k += 1;
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Principal submatrix on `idx` (which must be sorted and unique).
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("restrict needs a square matrix".into()));
        }
        let mut pos = vec![usize::MAX; self.rows];
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.rows {
                return Err(Error::Shape(format!("index {i} out of range")));
            }
            pos[i] = k;
        }
        let mut trips = Vec::new();
        for (new_i, &i) in idx.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let new_j = pos[self.col_idx[k]];
                if new_j != usize::MAX {
                    trips.push((new_i, new_j, self.values[k]));
                }
            }
        }
        Self::from_triplets(idx.len(), idx.len(), trips)
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.values[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_into(x, y);
    }
}

/// Sparse LU factorization of `A - shift * I`.
pub struct ShiftedLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, C64>,
}

impl ShiftedLu {
    pub fn new(a: &SparseMatrix, shift: C64) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Shape("LU needs a square matrix".into()));
        }
        let shifted = a.shifted(-shift)?;
        let trips: Vec<Triplet<usize, usize, C64>> =
            shifted.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let csc = SparseColMat::<usize, C64>::try_new_from_triplets(a.rows(), a.cols(), &trips)
            .map_err(|e| Error::Numerical(format!("sparse assembly failed ({e:?})")))?;
        let lu = csc.sp_lu().map_err(|e| Error::Numerical(format!("sparse LU failed ({e:?})")))?;
        Ok(Self { n: a.rows(), lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with the solution of `(A - shift I) x = b`.
    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<()> {
        let mut rhs = faer::Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = rhs[(i, 0)];
        }
        if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("shifted system is singular; move the shift".into()));
        }
        Ok(())
    }
}
