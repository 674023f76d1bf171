//! Sparse Hermitian storage and a banded LDLᴴ factorization.
//!
//! Grid Hamiltonians built here have a natural node ordering in which every
//! nonzero sits within `nx` of the diagonal, so a band factorization is both
//! the simplest and the fastest direct solver for shift-invert iterations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Accumulates entries of a Hermitian matrix; every off-diagonal push also
/// pushes the conjugate transpose entry, so the result is conjugate
/// symmetric by construction.
#[derive(Debug, Clone)]
pub struct HermitianBuilder {
    n: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl HermitianBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::with_capacity(5 * n) }
    }

    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        debug_assert!(i < self.n);
        self.entries.push((i, i, C64::new(value, 0.0)));
    }

    /// Adds `value` at `(i, j)` and `conj(value)` at `(j, i)`.
    pub fn add_pair(&mut self, i: usize, j: usize, value: C64) {
        debug_assert!(i < self.n && j < self.n && i != j);
        self.entries.push((i, j, value));
        self.entries.push((j, i, value.conj()));
    }

    pub fn build(mut self) -> HermitianMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("merged entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        HermitianMatrix { n: self.n, row_ptr, cols, vals }
    }
}

/// Compressed-row Hermitian matrix with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl HermitianMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Largest distance of a stored entry from the diagonal.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    /// Maximum absolute row sum, an upper bound for the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |M_ij - conj(M_ji)|` over stored entries; zero for exact Hermitian storage.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets().map(|(i, j, v)| (v - self.get(j, i).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.n, self.n, C64::new(0.0, 0.0));
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Restriction to the rows and columns listed in `keep` (in that order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> HermitianMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (new, &old) in keep.iter().enumerate() {
            let mut row: Vec<(usize, C64)> =
                self.row(old).filter(|&(j, _)| map[j] != usize::MAX).map(|(j, v)| (map[j], v)).collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr[new + 1] = cols.len();
        }
        HermitianMatrix { n: keep.len(), row_ptr, cols, vals }
    }

    /// Entrywise maximum of `|self - scale * other|` over the union of patterns.
    pub fn max_deviation(&self, other: &HermitianMatrix, scale: f64) -> f64 {
        assert_eq!(self.n, other.n);
        let mut worst: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - other.get(i, j) * scale).norm());
        }
        for (i, j, v) in other.triplets() {
            worst = worst.max((self.get(i, j) - v * scale).norm());
        }
        worst
    }
}

/// `A - shift·I = L D Lᴴ` for a Hermitian band matrix, without pivoting.
///
/// Positive definite shifts are unconditionally stable. Indefinite shifts
/// work whenever no leading minor vanishes, which is the generic situation
/// for a shift that is not an eigenvalue; the pivot signs then give the
/// Sylvester inertia of `A - shift·I`.
#[derive(Debug, Clone)]
pub struct BandedLdl {
    n: usize,
    bw: usize,
    shift: f64,
    // row i holds l_{i, i-bw .. i-1} at offsets 0..bw
    lower: Vec<C64>,
    pivots: Vec<f64>,
}

impl BandedLdl {
    pub fn factor(a: &HermitianMatrix, shift: f64) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth().max(1);
        let mut lower = vec![C64::new(0.0, 0.0); n * bw];
        let mut pivots = vec![0.0f64; n];
        let mut scaled = vec![C64::new(0.0, 0.0); bw];
        let tiny = a.max_abs_entry().max(shift.abs()) * f64::EPSILON * 1e-3;

        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut diag = -shift;
            {
                let row = &mut lower[i * bw..(i + 1) * bw];
                for (j, v) in a.row(i) {
                    if j < i {
                        row[j + bw - i] = v;
                    } else if j == i {
                        diag += v.re;
                    }
                }
            }
            for j in lo..i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = C64::new(0.0, 0.0);
                let row_j = &lower[j * bw..(j + 1) * bw];
                for k in klo..j {
                    s += scaled[k + bw - i] * row_j[k + bw - j].conj();
                }
                let off = j + bw - i;
                let lij = (lower[i * bw + off] - s) / pivots[j];
                lower[i * bw + off] = lij;
                scaled[off] = lij * pivots[j];
                diag -= (lij * lij.conj()).re * pivots[j];
            }
            if !diag.is_finite() || diag.abs() <= tiny {
                return Err(Error::SingularShift { row: i, shift });
            }
            pivots[i] = diag;
        }
        Ok(Self { n, bw, shift, lower, pivots })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of eigenvalues of `A` strictly below the shift.
    pub fn negative_count(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    /// Solves `(A - shift·I) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let row = &self.lower[i * bw..(i + 1) * bw];
            let mut acc = x[i];
            for k in lo..i {
                acc -= row[k + bw - i] * x[k];
            }
            x[i] = acc;
        }
        for (xi, d) in x.iter_mut().zip(&self.pivots) {
            *xi /= *d;
        }
        for i in (0..self.n).rev() {
            let lo = i.saturating_sub(bw);
            let xi = x[i];
            let row = &self.lower[i * bw..(i + 1) * bw];
            for k in lo..i {
                x[k] -= row[k + bw - i].conj() * xi;
            }
        }
    }
}

/// Number of eigenvalues of `a` strictly below `x`, by Sylvester inertia.
pub fn count_below(a: &HermitianMatrix, x: f64) -> Result<usize> {
    Ok(BandedLdl::factor(a, x)?.negative_count())
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
