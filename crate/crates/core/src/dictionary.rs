//! Feature storage and the [`FeatureAccess`] abstraction the screening tests run on.

use rayon::prelude::*;

use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::Scalar;

/// Work (n·p) below which correlation passes stay on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;

#[derive(Clone, Debug, PartialEq)]
enum Storage<T> {
    /// Column-major, `n * p` entries.
    Dense(Vec<T>),
    /// Compressed sparse columns.
    Sparse {
        colptr: Vec<usize>,
        rows: Vec<usize>,
        vals: Vec<T>,
    },
}

/// Immutable feature matrix `B = [b_1, ..., b_p]` with cached column norms.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary<T> {
    n: usize,
    p: usize,
    storage: Storage<T>,
    norms: Vec<T>,
    normalized: bool,
}

fn check_norms<T: Scalar>(norms: &[T]) -> Result<bool> {
    if let Some(j) = norms.iter().position(|v| !(*v > T::zero())) {
        return Err(ScreenError::ZeroFeature(j));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    Ok(norms.iter().all(|&v| (v - T::one()).abs() <= tol))
}

impl<T: Scalar> Dictionary<T> {
    /// Builds a dense dictionary from column-major data (`data.len() == n * p`).
    pub fn from_column_major(n: usize, p: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(ScreenError::InvalidParameter(
                "dictionary must have at least one row and one column".into(),
            ));
        }
        if data.len() != n * p {
            return Err(ScreenError::DimensionMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        let norms: Vec<T> = data.chunks_exact(n).map(linalg::norm).collect();
        let normalized = check_norms(&norms)?;
        Ok(Self {
            n,
            p,
            storage: Storage::Dense(data),
            norms,
            normalized,
        })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * columns.len());
        for c in columns {
            if c.len() != n {
                return Err(ScreenError::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_column_major(n, columns.len(), data)
    }

    /// Compressed sparse column ingestion. Row indices within a column need not be sorted
    /// but must be unique.
    pub fn from_csc(
        n: usize,
        p: usize,
        colptr: Vec<usize>,
        rows: Vec<usize>,
        vals: Vec<T>,
    ) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(ScreenError::InvalidParameter(
                "dictionary must have at least one row and one column".into(),
            ));
        }
        if colptr.len() != p + 1 {
            return Err(ScreenError::DimensionMismatch {
                expected: p + 1,
                got: colptr.len(),
            });
        }
        if rows.len() != vals.len() || colptr[p] != vals.len() || colptr[0] != 0 {
            return Err(ScreenError::Format("inconsistent CSC arrays".into()));
        }
        if colptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(ScreenError::Format("CSC column pointers must be nondecreasing".into()));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= n) {
            return Err(ScreenError::IndexOutOfRange { index: r, len: n });
        }
        let norms: Vec<T> = (0..p)
            .map(|j| linalg::norm(&vals[colptr[j]..colptr[j + 1]]))
            .collect();
        let normalized = check_norms(&norms)?;
        Ok(Self {
            n,
            p,
            storage: Storage::Sparse { colptr, rows, vals },
            norms,
            normalized,
        })
    }

    /// Feature dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of features `p`.
    pub fn count(&self) -> usize {
        self.p
    }

    pub fn norms(&self) -> &[T] {
        &self.norms
    }

    /// True when every column has unit norm (within `1e-12`).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    #[inline]
    pub fn dot_col(&self, j: usize, v: &[T]) -> T {
        match &self.storage {
            Storage::Dense(d) => linalg::dot(&d[j * self.n..(j + 1) * self.n], v),
            Storage::Sparse { colptr, rows, vals } => {
                let (a, b) = (colptr[j], colptr[j + 1]);
                rows[a..b]
                    .iter()
                    .zip(&vals[a..b])
                    .map(|(&r, &x)| x * v[r])
                    .sum()
            }
        }
    }

    /// `out += alpha * b_j`
    #[inline]
    pub fn axpy_col(&self, j: usize, alpha: T, out: &mut [T]) {
        match &self.storage {
            Storage::Dense(d) => linalg::axpy(alpha, &d[j * self.n..(j + 1) * self.n], out),
            Storage::Sparse { colptr, rows, vals } => {
                for k in colptr[j]..colptr[j + 1] {
                    out[rows[k]] += alpha * vals[k];
                }
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        let mut c = vec![T::zero(); self.n];
        self.axpy_col(j, T::one(), &mut c);
        c
    }

    /// Dense column-major copy of the entries.
    pub fn to_column_major(&self) -> Vec<T> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { .. } => (0..self.p).flat_map(|j| self.column(j)).collect(),
        }
    }

    /// `B^T v`, one entry per feature.
    pub fn correlate(&self, v: &[T]) -> Vec<T> {
        if self.n * self.p >= PAR_THRESHOLD {
            (0..self.p)
                .into_par_iter()
                .map(|j| self.dot_col(j, v))
                .collect()
        } else {
            (0..self.p).map(|j| self.dot_col(j, v)).collect()
        }
    }

    /// `B w`
    pub fn combine(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (j, &wj) in w.iter().enumerate() {
            if wj != T::zero() {
                self.axpy_col(j, wj, &mut out);
            }
        }
        out
    }

    /// Sub-dictionary `B_{↓S}` keeping the columns in `indices` (in that order).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&j) = indices.iter().find(|&&j| j >= self.p) {
            return Err(ScreenError::IndexOutOfRange {
                index: j,
                len: self.p,
            });
        }
        if indices.is_empty() {
            return Err(ScreenError::InvalidParameter(
                "cannot select an empty set of features".into(),
            ));
        }
        let storage = match &self.storage {
            Storage::Dense(d) => {
                let mut out = Vec::with_capacity(indices.len() * self.n);
                for &j in indices {
                    out.extend_from_slice(&d[j * self.n..(j + 1) * self.n]);
                }
                Storage::Dense(out)
            }
            Storage::Sparse { colptr, rows, vals } => {
                let mut cp = vec![0];
                let mut rs = Vec::new();
                let mut vs = Vec::new();
                for &j in indices {
                    rs.extend_from_slice(&rows[colptr[j]..colptr[j + 1]]);
                    vs.extend_from_slice(&vals[colptr[j]..colptr[j + 1]]);
                    cp.push(rs.len());
                }
                Storage::Sparse {
                    colptr: cp,
                    rows: rs,
                    vals: vs,
                }
            }
        };
        let norms: Vec<T> = indices.iter().map(|&j| self.norms[j]).collect();
        let normalized = self.normalized || check_norms(&norms)?;
        Ok(Self {
            n: self.n,
            p: indices.len(),
            storage,
            norms,
            normalized,
        })
    }

    /// Copy with every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: T) -> Result<Self> {
        match &self.storage {
            Storage::Dense(d) => {
                Self::from_column_major(self.n, self.p, d.iter().map(|&v| alpha * v).collect())
            }
            Storage::Sparse { colptr, rows, vals } => Self::from_csc(
                self.n,
                self.p,
                colptr.clone(),
                rows.clone(),
                vals.iter().map(|&v| alpha * v).collect(),
            ),
        }
    }

    /// Copy with unit-norm columns.
    pub fn normalized(&self) -> Self {
        let mut data = self.to_column_major();
        for (j, col) in data.chunks_exact_mut(self.n).enumerate() {
            let s = self.norms[j];
            col.iter_mut().for_each(|v| *v /= s);
        }
        Self::from_column_major(self.n, self.p, data).expect("normalizing keeps columns nonzero")
    }
}

/// Read access to a feature collection. Implemented by the in-memory [`Dictionary`]
/// and by file-backed readers that stream columns in blocks.
pub trait FeatureAccess<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn count(&self) -> usize;
    /// `‖b_i‖₂` for every feature.
    fn feature_norms(&self) -> Result<Vec<T>>;
    /// `b_iᵀ v` for every feature.
    fn correlate(&self, v: &[T]) -> Result<Vec<T>>;
    fn feature(&self, j: usize) -> Result<Vec<T>>;
    /// Loads the listed features as an in-memory dictionary.
    fn gather(&self, indices: &[usize]) -> Result<Dictionary<T>>;
}

impl<T: Scalar> FeatureAccess<T> for Dictionary<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn count(&self) -> usize {
        self.p
    }

    fn feature_norms(&self) -> Result<Vec<T>> {
        Ok(self.norms.clone())
    }

    fn correlate(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.n {
            return Err(ScreenError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(Dictionary::correlate(self, v))
    }

    fn feature(&self, j: usize) -> Result<Vec<T>> {
        if j >= self.p {
            return Err(ScreenError::IndexOutOfRange {
                index: j,
                len: self.p,
            });
        }
        Ok(self.column(j))
    }

    fn gather(&self, indices: &[usize]) -> Result<Dictionary<T>> {
        self.select(indices)
    }
}
