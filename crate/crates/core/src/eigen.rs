//! Lowest eigenpairs of discrete Hamiltonians, Richardson refinement and band tracking.
//!
//! Large problems use shift-invert Lanczos on a banded LDLᴴ factorization with
//! full reorthogonalization, explicit restarts and locking. Completeness of
//! the returned set is certified by a Sylvester inertia count, so a missed
//! eigenvalue is found or reported, never silently skipped.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::DiscreteOperator;
use crate::sparse::{count_below, dot, norm, BandedLdl, HermitianMatrix, C64};

/// Sorted low-lying eigenvalues with per-value error information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub h: f64,
    /// Richardson error estimate per eigenvalue (zero for a single solve).
    pub discretization_error: Vec<f64>,
    /// `‖Mv − λv‖ / ‖v‖` per pair.
    pub solver_residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Distance from `x` to the nearest listed eigenvalue.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.eigenvalues.iter().map(|l| (l - x).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "index,eigenvalue,error_estimate,residual")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{},{},{},{}", i + 1, l, self.discretization_error[i], self.solver_residuals[i])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Residual tolerance relative to the row-sum norm bound of the matrix.
    pub tol: f64,
    pub seed: u64,
    /// Problems up to this size are solved densely.
    pub dense_threshold: usize,
    pub keep_vectors: bool,
    /// Restart budget per requested pair.
    pub restarts_per_pair: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, seed: 0x5eed_1234, dense_threshold: 256, keep_vectors: true, restarts_per_pair: 50 }
    }
}

#[derive(Debug, Clone)]
struct Pair {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
}

fn residual_of(matrix: &HermitianMatrix, v: &[C64]) -> (f64, f64) {
    let mv = matrix.apply(v);
    let vv = dot(v, v).re;
    let lambda = dot(v, &mv).re / vv;
    let r: f64 = mv.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
    (lambda, r / vv.sqrt())
}

fn dense_pairs(matrix: &HermitianMatrix) -> Vec<Pair> {
    let eig = matrix.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..matrix.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|c| {
            let vector: Vec<C64> = eig.eigenvectors.column(c).iter().copied().collect();
            let (_, residual) = residual_of(matrix, &vector);
            Pair { value: eig.eigenvalues[c], vector, residual }
        })
        .collect()
}

/// Start block width; covers the multiplicity of well clusters in supercells.
const BLOCK_SIZE: usize = 12;

/// Shift-invert Lanczos state: the factorization and the locked pairs.
struct ShiftInvert<'a> {
    matrix: &'a HermitianMatrix,
    factor: BandedLdl,
    norm: f64,
    locked: Vec<Pair>,
    rng: ChaCha8Rng,
    opts: SolverOptions,
}

impl<'a> ShiftInvert<'a> {
    fn new(matrix: &'a HermitianMatrix, shift: f64, opts: SolverOptions) -> Result<Self> {
        let norm = matrix.norm_bound().max(f64::MIN_POSITIVE);
        let mut sigma = shift;
        let mut factor = BandedLdl::factor(matrix, sigma);
        for attempt in 1..=6 {
            if factor.is_ok() {
                break;
            }
            sigma = shift - 1e-9 * norm * 10f64.powi(attempt);
            factor = BandedLdl::factor(matrix, sigma);
        }
        Ok(Self { matrix, factor: factor?, norm, locked: Vec::new(), rng: ChaCha8Rng::seed_from_u64(opts.seed), opts })
    }

    fn sigma(&self) -> f64 {
        self.factor.shift()
    }

    fn random_vector(&mut self) -> Vec<C64> {
        (0..self.matrix.dim())
            .map(|_| C64::new(self.rng.random::<f64>() - 0.5, self.rng.random::<f64>() - 0.5))
            .collect()
    }

    fn deflate(&self, w: &mut [C64]) {
        for _ in 0..2 {
            for p in &self.locked {
                let c = dot(&p.vector, w);
                for (wi, vi) in w.iter_mut().zip(&p.vector) {
                    *wi -= vi * c;
                }
            }
        }
    }

    /// Orthonormalizes `block` against the locked vectors and itself, dropping dependent columns.
    fn orthonormalize(&self, block: Vec<Vec<C64>>, basis: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let mut out: Vec<Vec<C64>> = Vec::with_capacity(block.len());
        for mut w in block {
            let before = norm(&w);
            self.deflate(&mut w);
            for _ in 0..2 {
                for b in basis.iter().chain(&out) {
                    let c = dot(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= bi * c;
                    }
                }
            }
            let nw = norm(&w);
            if nw > 1e-8 * before && nw > 0.0 {
                w.iter_mut().for_each(|x| *x /= nw);
                out.push(w);
            }
        }
        out
    }

    /// Locks pairs until `want` pairs closest to the shift are converged.
    fn find(&mut self, want: usize) -> Result<()> {
        let n = self.matrix.dim();
        let want = want.min(n);
        let cap = self.opts.restarts_per_pair * want.max(1);
        let block = BLOCK_SIZE.min(n / 4).max(1);
        let mut carried: Vec<Vec<C64>> = Vec::new();
        let mut restarts = 0;
        while self.locked.len() < want {
            restarts += 1;
            if restarts > cap {
                return Err(Error::NoConvergence { index: self.locked.len(), residual: f64::NAN });
            }
            // thick restart: kept Ritz vectors plus the pending continuation vectors
            let mut start = std::mem::take(&mut carried);
            if start.is_empty() {
                start = (0..block).map(|_| self.random_vector()).collect();
            }
            let start = self.orthonormalize(start, &[]);
            if start.is_empty() {
                continue;
            }

            let missing = want - self.locked.len();
            let kdim = (start.len() + 2 * missing + 2 * block).max(60).min(n - self.locked.len());
            let (basis, t, rest) = self.band_lanczos(start, kdim);
            let k = basis.len();
            let eig = t.symmetric_eigen();
            // Ritz values of the inverse: largest |θ| is closest to the shift
            let mut order: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i].abs() > 0.0).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));

            let mut fresh = Vec::new();
            for &c in order.iter().take(missing + block) {
                let mut x = vec![C64::new(0.0, 0.0); n];
                for (j, b) in basis.iter().enumerate() {
                    let y = eig.eigenvectors[(j, c)];
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi += bi * y;
                    }
                }
                self.deflate(&mut x);
                let nx = norm(&x);
                x.iter_mut().for_each(|xi| *xi /= nx);
                let (value, residual) = residual_of(self.matrix, &x);
                if residual <= self.opts.tol * self.norm && fresh.len() < missing {
                    fresh.push(Pair { value, vector: x, residual });
                } else {
                    carried.push(x);
                }
            }
            carried.extend(rest);
            // locking in a batch keeps later candidates from being deflated against earlier ones twice
            for p in fresh {
                let mut v = p.vector;
                self.deflate(&mut v);
                let nv = norm(&v);
                if nv > 0.5 {
                    v.iter_mut().for_each(|x| *x /= nv);
                    let (value, residual) = residual_of(self.matrix, &v);
                    self.locked.push(Pair { value, vector: v, residual });
                }
            }
        }
        Ok(())
    }

    /// Band Lanczos on `(M − σ)⁻¹` restricted to the complement of the locked
    /// vectors, expanding one vector at a time from an orthonormal start block.
    /// Returns the processed basis, the projected Hermitian matrix on it and
    /// the generated but unprocessed vectors.
    fn band_lanczos(&self, start: Vec<Vec<C64>>, k: usize) -> (Vec<Vec<C64>>, DMatrix<C64>, Vec<Vec<C64>>) {
        let mut basis = start;
        let mut coef: Vec<Vec<C64>> = Vec::with_capacity(k);
        let mut j = 0;
        while j < basis.len() && j < k {
            let mut w = basis[j].clone();
            self.factor.solve_in_place(&mut w);
            self.deflate(&mut w);
            let scale = norm(&w);
            let mut col = vec![C64::new(0.0, 0.0); basis.len()];
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    col[i] += c;
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= bi * c;
                    }
                }
            }
            let nw = norm(&w);
            if nw > 1e-12 * scale {
                w.iter_mut().for_each(|x| *x /= nw);
                basis.push(w);
                col.push(C64::new(nw, 0.0));
            }
            coef.push(col);
            j += 1;
        }
        let rest = basis.split_off(j);
        let mut t = DMatrix::<C64>::zeros(j, j);
        for c in 0..j {
            for r in 0..j.min(coef[c].len()) {
                t[(r, c)] += coef[c][r] * 0.5;
                t[(c, r)] += coef[c][r].conj() * 0.5;
            }
        }
        (basis, t, rest)
    }
}

fn spectrum_from(pairs: Vec<Pair>, h: f64, keep_vectors: bool) -> Spectrum {
    let m = pairs.len();
    let eigenvalues = pairs.iter().map(|p| p.value).collect();
    let solver_residuals = pairs.iter().map(|p| p.residual).collect();
    let eigenvectors = keep_vectors.then(|| pairs.into_iter().map(|p| p.vector).collect());
    Spectrum { eigenvalues, eigenvectors, h, discretization_error: vec![0.0; m], solver_residuals }
}

fn check_residuals(pairs: &[Pair], tol: f64, norm: f64) -> Result<()> {
    for (index, p) in pairs.iter().enumerate() {
        if !(p.residual <= tol * norm) {
            return Err(Error::NoConvergence { index, residual: p.residual });
        }
    }
    Ok(())
}

/// The `m` smallest eigenpairs of a Hermitian matrix.
pub fn lowest_matrix_eigenpairs(
    matrix: &HermitianMatrix,
    m: usize,
    opts: &SolverOptions,
) -> Result<Vec<(f64, Vec<C64>, f64)>> {
    let n = matrix.dim();
    if m == 0 || 4 * m > n {
        return Err(Error::InvalidArgument(format!(
            "{m} eigenpairs requested from a matrix of size {n}; need 1 ≤ m ≤ n/4"
        )));
    }
    let norm = matrix.norm_bound();
    let pairs = if n <= opts.dense_threshold {
        let mut all = dense_pairs(matrix);
        all.truncate(m);
        all
    } else {
        lowest_by_lanczos(matrix, m, opts)?
    };
    check_residuals(&pairs, opts.tol, norm)?;
    Ok(pairs.into_iter().map(|p| (p.value, p.vector, p.residual)).collect())
}

fn lowest_by_lanczos(matrix: &HermitianMatrix, m: usize, opts: &SolverOptions) -> Result<Vec<Pair>> {
    let n = matrix.dim();
    let norm = matrix.norm_bound();
    // the operators are PSD, so a slightly negative shift keeps the factorization definite
    let mut solver = ShiftInvert::new(matrix, -1e-8 * norm, *opts)?;
    let guard = (m / 4 + 2).min(n - m);
    let mut want = m + guard;
    for _ in 0..(opts.restarts_per_pair * m) {
        solver.find(want)?;
        solver.locked.sort_by(|a, b| a.value.total_cmp(&b.value));
        let found = &solver.locked;
        // certify at the widest gap between the m-th found value and the last one
        let (mut j, mut widest) = (m - 1, f64::NEG_INFINITY);
        for i in (m - 1)..found.len().saturating_sub(1) {
            let g = found[i + 1].value - found[i].value;
            if g > widest {
                widest = g;
                j = i;
            }
        }
        if found.len() < m + 1 || !(widest > 1e-10 * norm) {
            want = found.len() + guard.max(1);
            if want > n {
                break;
            }
            continue;
        }
        let s = 0.5 * (found[j].value + found[j + 1].value);
        let below = count_below(matrix, s)?;
        if below == j + 1 {
            solver.locked.truncate(m);
            return Ok(std::mem::take(&mut solver.locked));
        }
        if below < j + 1 {
            return Err(Error::NoConvergence { index: below, residual: f64::NAN });
        }
        log::debug!("inertia at {s} counts {below} eigenvalues, {} found; extending", j + 1);
        want = found.len() + (below - j - 1);
    }
    let worst = solver.locked.len().min(m);
    Err(Error::NoConvergence { index: worst, residual: f64::NAN })
}

/// The `m` lowest eigenpairs of `op` with residual certificates.
pub fn lowest_eigenpairs(op: &DiscreteOperator, m: usize, opts: &SolverOptions) -> Result<Spectrum> {
    let pairs = lowest_matrix_eigenpairs(&op.matrix, m, opts)?;
    let pairs = pairs.into_iter().map(|(value, vector, residual)| Pair { value, vector, residual }).collect();
    Ok(spectrum_from(pairs, op.h, opts.keep_vectors))
}

/// The `m` eigenpairs closest to `target`, sorted ascending.
pub fn eigenpairs_near(op: &DiscreteOperator, target: f64, m: usize, opts: &SolverOptions) -> Result<Spectrum> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("{m} eigenpairs requested from a matrix of size {n}")));
    }
    let mut pairs = if n <= opts.dense_threshold {
        let mut all = dense_pairs(&op.matrix);
        all.sort_by(|a, b| (a.value - target).abs().total_cmp(&(b.value - target).abs()));
        all.truncate(m);
        all
    } else {
        let mut solver = ShiftInvert::new(&op.matrix, target, *opts)?;
        solver.find(m)?;
        let sigma = solver.sigma();
        let mut locked = solver.locked;
        locked.sort_by(|a, b| (a.value - sigma).abs().total_cmp(&(b.value - sigma).abs()));
        locked.truncate(m);
        locked
    };
    check_residuals(&pairs, opts.tol, op.matrix.norm_bound())?;
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(spectrum_from(pairs, op.h, opts.keep_vectors))
}

/// Solves on `grid` and on its dyadic refinement and extrapolates
/// `λ* = (4λ_{Δ/2} − λ_Δ)/3` with error estimate `|λ_{Δ/2} − λ_Δ|/3`.
/// Eigenvectors, when kept, live on the refined grid.
pub fn richardson_refine(
    assemble: impl Fn(&Grid) -> Result<DiscreteOperator>,
    grid: &Grid,
    m: usize,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    let coarse_opts = SolverOptions { keep_vectors: false, ..*opts };
    let coarse = lowest_eigenpairs(&assemble(grid)?, m, &coarse_opts)?;
    let fine = lowest_eigenpairs(&assemble(&grid.refined(2))?, m, opts)?;
    Ok(combine_richardson(&coarse, fine))
}

/// Richardson combination of a coarse and a dyadically refined solve.
pub fn combine_richardson(coarse: &Spectrum, fine: Spectrum) -> Spectrum {
    let m = coarse.len().min(fine.len());
    let eigenvalues = (0..m).map(|i| (4.0 * fine.eigenvalues[i] - coarse.eigenvalues[i]) / 3.0).collect();
    let discretization_error = (0..m).map(|i| (fine.eigenvalues[i] - coarse.eigenvalues[i]).abs() / 3.0).collect();
    let solver_residuals = (0..m).map(|i| fine.solver_residuals[i].max(coarse.solver_residuals[i])).collect();
    Spectrum { eigenvalues, eigenvectors: fine.eigenvectors, h: fine.h, discretization_error, solver_residuals }
}

/// Eigenvalue branches over a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandFunctionTable {
    pub b_samples: Vec<f64>,
    /// `mu[j][i]` is branch `j` at `b_samples[i]`.
    pub mu: Vec<Vec<f64>>,
    pub k: u32,
    /// Samples where overlap matching was ambiguous and sorted order was used.
    pub crossings_flagged: Vec<f64>,
}

impl BandFunctionTable {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let header: Vec<String> = (1..=self.mu.len()).map(|j| format!("mu{j}")).collect();
        writeln!(out, "b,{}", header.join(","))?;
        for (i, b) in self.b_samples.iter().enumerate() {
            let row: Vec<String> = self.mu.iter().map(|branch| branch[i].to_string()).collect();
            writeln!(out, "{b},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Overlap threshold for matching eigenvectors between neighbouring samples.
pub const OVERLAP_THRESHOLD: f64 = 0.7;

/// Orders eigenvalues into continuous branches by maximal eigenvector overlap
/// between consecutive samples, falling back to sorted order (flagged) when
/// the matching is ambiguous.
pub fn track_bands(samples: &[(f64, Spectrum)]) -> BandFunctionTable {
    let branches = samples.iter().map(|(_, s)| s.len()).min().unwrap_or(0);
    let mut mu = vec![Vec::with_capacity(samples.len()); branches];
    let mut flagged = Vec::new();
    let mut prev: Option<Vec<&Vec<C64>>> = None;
    for (b, spec) in samples {
        let identity: Vec<usize> = (0..branches).collect();
        let vectors: Option<Vec<&Vec<C64>>> = spec.eigenvectors.as_ref().map(|v| v.iter().collect());
        let perm = match (&prev, &vectors) {
            (None, _) => identity,
            (Some(p), Some(cur)) if p[0].len() == cur[0].len() => {
                match_by_overlap(p, cur, branches).unwrap_or_else(|| {
                    flagged.push(*b);
                    identity
                })
            }
            _ => {
                flagged.push(*b);
                identity
            }
        };
        for (j, &l) in perm.iter().enumerate() {
            mu[j].push(spec.eigenvalues[l]);
        }
        prev = vectors.map(|cur| perm.iter().map(|&l| cur[l]).collect());
    }
    BandFunctionTable { b_samples: samples.iter().map(|(b, _)| *b).collect(), mu, k: 0, crossings_flagged: flagged }
}

fn match_by_overlap(prev: &[&Vec<C64>], cur: &[&Vec<C64>], branches: usize) -> Option<Vec<usize>> {
    let mut perm = Vec::with_capacity(branches);
    let mut used = vec![false; cur.len()];
    for p in prev.iter().take(branches) {
        let (best, overlap) = cur
            .iter()
            .enumerate()
            .map(|(l, c)| (l, dot(p, c).norm() / (norm(p) * norm(c))))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if overlap < OVERLAP_THRESHOLD || best >= branches || used[best] {
            return None;
        }
        used[best] = true;
        perm.push(best);
    }
    Some(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operator::{assemble_potential_1d, OperatorTag};
    use std::f64::consts::PI;

    fn laplacian(intervals: usize) -> DiscreteOperator {
        assemble_potential_1d(&Grid::dirichlet_1d(0.0, 1.0, intervals), 1.0, |_| 0.0, OperatorTag::FullH).unwrap()
    }

    #[test]
    fn free_laplacian_dense_and_lanczos() {
        let op = laplacian(256);
        for threshold in [0, 10_000] {
            let opts = SolverOptions { dense_threshold: threshold, ..Default::default() };
            let s = lowest_eigenpairs(&op, 3, &opts).unwrap();
            for (j, l) in s.eigenvalues.iter().enumerate() {
                let exact = PI * PI * ((j + 1) * (j + 1)) as f64;
                assert!((l - exact).abs() < 1e-3 * exact, "{l} vs {exact}");
            }
            assert!(s.solver_residuals.iter().all(|r| *r <= 1e-9 * op.matrix.norm_bound()));
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let op =
            assemble_potential_1d(&Grid::dirichlet_1d(-10.0, 10.0, 2560), 1.0, |y| y * y, OperatorTag::FullH).unwrap();
        let s = lowest_eigenpairs(&op, 3, &SolverOptions::default()).unwrap();
        for (j, l) in s.eigenvalues.iter().enumerate() {
            assert!((l - (2 * j + 1) as f64).abs() < 1e-3, "{l}");
        }
    }

    #[test]
    fn richardson_on_free_laplacian() {
        let grid = Grid::dirichlet_1d(0.0, 1.0, 128);
        let s = richardson_refine(
            |g| assemble_potential_1d(g, 1.0, |_| 0.0, OperatorTag::FullH),
            &grid,
            2,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((s.eigenvalues[0] - PI * PI).abs() < 1e-5);
        assert!(s.discretization_error.iter().all(|e| *e >= 0.0));
    }

    #[test]
    fn degenerate_pairs_are_all_found() {
        // two decoupled copies of the same chain: every eigenvalue is double
        let chain = laplacian(400).matrix;
        let n = chain.dim();
        let mut b = crate::sparse::HermitianBuilder::new(2 * n);
        for (i, j, v) in chain.triplets() {
            for off in [0, n] {
                if i == j {
                    b.add_diagonal(i + off, v.re);
                } else if i < j {
                    b.add_pair(i + off, j + off, v);
                }
            }
        }
        let m = b.build();
        let opts = SolverOptions { dense_threshold: 0, ..Default::default() };
        let pairs = lowest_matrix_eigenpairs(&m, 4, &opts).unwrap();
        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        assert!((vals[0] - vals[1]).abs() < 1e-8 && (vals[2] - vals[3]).abs() < 1e-6);
        assert!((vals[2] / vals[0] - 4.0).abs() < 1e-3);
    }

    #[test]
    fn nearest_pairs() {
        let op = laplacian(256);
        let opts = SolverOptions { dense_threshold: 0, ..Default::default() };
        let s = eigenpairs_near(&op, 4.2 * PI * PI, 2, &opts).unwrap();
        assert!((s.eigenvalues[0] / (PI * PI) - 1.0).abs() < 1e-3);
        assert!((s.eigenvalues[1] / (PI * PI) - 4.0).abs() < 1e-3);
    }

    #[test]
    fn too_many_pairs_requested() {
        let op = laplacian(16);
        assert!(matches!(lowest_eigenpairs(&op, 5, &SolverOptions::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_sample_table_is_sorted_spectrum() {
        let s = lowest_eigenpairs(&laplacian(64), 3, &SolverOptions::default()).unwrap();
        let t = track_bands(&[(0.0, s.clone())]);
        assert_eq!(t.mu.iter().map(|b| b[0]).collect::<Vec<_>>(), s.eigenvalues);
        assert!(t.crossings_flagged.is_empty());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = lowest_eigenpairs(&laplacian(64), 2, &SolverOptions::default()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("index,eigenvalue,error_estimate,residual"));
        assert_eq!(text.lines().count(), 3);
    }
}
