//! Minimal CSR storage for large truncations: matrix-vector products and a
//! transposed product for occupation-measure row iterations.

#[derive(Debug, Clone)]
pub struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Build from (row, col, value) triplets; duplicates are summed, zeros dropped.
    pub fn from_coo(dim: usize, mut coo: Vec<(usize, usize, f64)>) -> Csr {
        coo.retain(|&(_, _, v)| v != 0.0);
        coo.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; dim];
        let mut cols = Vec::with_capacity(coo.len());
        let mut vals: Vec<f64> = Vec::with_capacity(coo.len());
        let mut last = None;
        for (r, c, v) in coo {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for i in 0..dim {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        Csr { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// y = M x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// y = x M (row vector times matrix), accumulated by scattering rows.
    pub fn vecmat(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[k]] += xi * self.vals[k];
            }
        }
    }

    pub fn max_diag(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut d = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    d = self.vals[k];
                }
            }
            m = m.max(d);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.cols[k] == j {
                return self.vals[k];
            }
        }
        0.0
    }

    pub fn to_dense(&self) -> crate::dense::Mat {
        let mut m = crate::dense::Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m.set(i, self.cols[k], self.vals[k]);
            }
        }
        m
    }

    /// Nonzero-pattern adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|i| self.cols[self.row_ptr[i]..self.row_ptr[i + 1]].to_vec())
            .collect()
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Csr {
        let mut pos = vec![usize::MAX; self.dim];
        for (a, &i) in idx.iter().enumerate() {
            pos[i] = a;
        }
        let mut coo = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let b = pos[self.cols[k]];
                if b != usize::MAX {
                    coo.push((a, b, self.vals[k]));
                }
            }
        }
        Csr::from_coo(idx.len(), coo)
    }
}

/// Spectral radius of a nonnegative sparse matrix: strongly connected
/// components of the pattern, then shifted power iteration with
/// Collatz-Wielandt stopping on each nontrivial block.
pub(crate) fn spr_csr(m: &Csr, tol: f64, max_iter: usize) -> crate::error::Result<f64> {
    let comps = crate::phase::strongly_connected_components(&m.adjacency());
    let mut best = 0.0f64;
    for comp in comps {
        if comp.len() == 1 {
            best = best.max(m.get(comp[0], comp[0]));
            continue;
        }
        let sub = m.submatrix(&comp);
        let shift = sub.max_diag().max(0.0) + 1.0;
        let value = crate::power::spr_shifted_power(
            |x, y| sub.matvec(x, y),
            comp.len(),
            shift,
            tol,
            max_iter,
        )?;
        best = best.max(value);
    }
    Ok(best)
}
