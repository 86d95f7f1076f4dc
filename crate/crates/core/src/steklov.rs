//! Discrete Steklov spectra via the Dirichlet-to-Neumann reduction.
//!
//! The pipeline is: assemble the combinatorial Laplacian of a graph with
//! boundary in interior/boundary blocks, harmonically extend boundary data by
//! solving the interior block, form the Schur complement
//! `L_BB - L_IB^T L_II^{-1} L_IB`, and read the Steklov eigenvalues off that
//! matrix. A second, independent route assembles the same quadratic form from
//! Dirichlet energies of extended basis vectors and solves it with a dense
//! external eigensolver; the two must agree to tight tolerance.

use crate::graphcore::GraphWithBoundary;
use crate::linalg::{
    bandwidth_under, reverse_cuthill_mckee, symmetric_eigen, BandedCholesky, BandedSpd,
    LinalgError, Matrix,
};
use serde::Serialize;
use thiserror::Error;

/// Eigenvalues with absolute value below this are treated as the zero mode.
pub const ZERO_TOLERANCE: f64 = 1e-10;
/// Per-pair eigenresidual bound; anything above fails the computation.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Allowed asymmetry and row-sum drift in the assembled DtN matrix.
pub const DTN_DRIFT_TOLERANCE: f64 = 1e-9;
/// Allowed sup-norm Laplacian residual of a harmonic extension.
pub const HARMONIC_RESIDUAL_TOLERANCE: f64 = 1e-9;
/// The dense variational oracle refuses boundaries larger than this.
pub const ORACLE_BOUNDARY_CAP: usize = 200;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Dirichlet-to-Neumann matrix asymmetric by {asymmetry:.3e}")]
    AsymmetricDtn { asymmetry: f64 },
    #[error("Dirichlet-to-Neumann row {row} sums to {sum:.3e} instead of 0")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("eigenvalue {index} is {value:.3e}, below the negativity tolerance")]
    NegativeEigenvalue { index: usize, value: f64 },
    #[error("eigenpair {index} has residual {norm:.3e}, above tolerance")]
    ResidualTooLarge { index: usize, norm: f64 },
    #[error("first nonzero eigenvalue {gap:.3e} is not separated from 0")]
    DegenerateGap { gap: f64 },
    #[error("harmonic extension residual {norm:.3e}, above tolerance")]
    HarmonicResidual { norm: f64 },
    #[error("boundary vector has length {got}, expected {expected}")]
    BoundaryLengthMismatch { got: usize, expected: usize },
    #[error("boundary size {size} exceeds the dense oracle cap of {cap}")]
    OracleTooLarge { size: usize, cap: usize },
    #[error("dense factorization of the interior block failed")]
    DenseFactorization,
}

/// Rows of a sparse matrix, each a short sorted list of (column, value)
/// pairs. Laplacian blocks never hold more than a handful of entries per row,
/// so this beats a general sparse format on both simplicity and locality.
#[derive(Debug, Clone)]
pub struct SparseRows {
    n_cols: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseRows {
    fn new(n_rows: usize, n_cols: usize) -> Self {
        SparseRows {
            n_cols,
            rows: vec![Vec::new(); n_rows],
        }
    }

    fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j < self.n_cols);
        self.rows[i].push((j as u32, v));
    }

    fn sort_rows(&mut self) {
        for row in &mut self.rows {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c as usize == j)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m.set(i, j as usize, v);
            }
        }
        m
    }

    /// y = A x for a dense block x stored row-major with `ncols` columns.
    fn apply_block(&self, x: &[f64], ncols: usize, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols * ncols);
        debug_assert_eq!(y.len(), self.n_rows() * ncols);
        y.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let out = &mut y[i * ncols..(i + 1) * ncols];
            for &(j, v) in row {
                let src = &x[j as usize * ncols..(j as usize + 1) * ncols];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
    }
}

/// The combinatorial Laplacian of a graph with boundary, split along the
/// interior/boundary index order of the graph itself. Edge weights are 1.
#[derive(Debug, Clone)]
pub struct LaplacianBlocks {
    pub l_ii: SparseRows,
    pub l_ib: SparseRows,
    pub l_bb: SparseRows,
}

impl LaplacianBlocks {
    pub fn n_interior(&self) -> usize {
        self.l_ii.n_rows()
    }

    pub fn n_boundary(&self) -> usize {
        self.l_bb.n_rows()
    }
}

/// Assembles the Laplacian blocks. Diagonal entries are vertex degrees in the
/// boundary-augmented graph; off-diagonal entries are -1 per edge.
pub fn assemble_laplacian(g: &GraphWithBoundary) -> LaplacianBlocks {
    let ni = g.n_interior();
    let nb = g.n_boundary();
    let mut l_ii = SparseRows::new(ni, ni);
    let mut l_ib = SparseRows::new(ni, nb);
    let mut l_bb = SparseRows::new(nb, nb);
    for v in 0..g.n() {
        let deg = g.degree(v as u32) as f64;
        if v < ni {
            l_ii.push(v, v, deg);
        } else {
            l_bb.push(v - ni, v - ni, deg);
        }
    }
    for &(a, b) in g.edges() {
        let (a, b) = (a as usize, b as usize);
        match (a < ni, b < ni) {
            (true, true) => {
                l_ii.push(a, b, -1.0);
                l_ii.push(b, a, -1.0);
            }
            (true, false) => l_ib.push(a, b - ni, -1.0),
            (false, true) => l_ib.push(b, a - ni, -1.0),
            (false, false) => {
                l_bb.push(a - ni, b - ni, -1.0);
                l_bb.push(b - ni, a - ni, -1.0);
            }
        }
    }
    l_ii.sort_rows();
    l_ib.sort_rows();
    l_bb.sort_rows();
    LaplacianBlocks { l_ii, l_ib, l_bb }
}

/// Banded Cholesky solver for the interior block, with the bandwidth tamed by
/// a reverse Cuthill-McKee reordering.
struct InteriorSolver {
    perm: Vec<u32>,
    pos: Vec<u32>,
    chol: BandedCholesky,
}

impl InteriorSolver {
    fn build(l_ii: &SparseRows) -> Result<Self, SpectrumError> {
        let ni = l_ii.n_rows();
        let mut adjacency = vec![Vec::new(); ni];
        for i in 0..ni {
            for &(j, _) in l_ii.row(i) {
                if j as usize != i {
                    adjacency[i].push(j);
                }
            }
        }
        let perm = reverse_cuthill_mckee(&adjacency);
        let bw = bandwidth_under(&perm, &adjacency);
        let mut pos = vec![0u32; ni];
        for (p, &old) in perm.iter().enumerate() {
            pos[old as usize] = p as u32;
        }
        let mut banded = BandedSpd::zeros(ni, bw);
        for (p, &old) in perm.iter().enumerate() {
            for &(j, v) in l_ii.row(old as usize) {
                let q = pos[j as usize] as usize;
                if q <= p {
                    banded.set(p, q, v);
                }
            }
        }
        let chol = banded.cholesky()?;
        Ok(InteriorSolver { perm, pos, chol })
    }

    /// Solves L_II X = B for a row-major block B in original interior
    /// indexing, with one step of iterative refinement. The refinement keeps
    /// Schur-complement row sums near machine precision even when the
    /// interior system is large and mildly ill-conditioned.
    fn solve_refined(&self, l_ii: &SparseRows, b: &[f64], ncols: usize) -> Vec<f64> {
        let ni = self.perm.len();
        debug_assert_eq!(b.len(), ni * ncols);
        let mut x = self.permute_solve(b, ncols);
        let mut residual = vec![0.0; ni * ncols];
        l_ii.apply_block(&x, ncols, &mut residual);
        for (r, bv) in residual.iter_mut().zip(b) {
            *r = bv - *r;
        }
        let correction = self.permute_solve(&residual, ncols);
        for (xv, c) in x.iter_mut().zip(&correction) {
            *xv += c;
        }
        x
    }

    fn permute_solve(&self, b: &[f64], ncols: usize) -> Vec<f64> {
        let ni = self.perm.len();
        let mut work = vec![0.0; ni * ncols];
        for (p, &old) in self.perm.iter().enumerate() {
            let src = &b[old as usize * ncols..(old as usize + 1) * ncols];
            work[p * ncols..(p + 1) * ncols].copy_from_slice(src);
        }
        self.chol.solve_block_in_place(&mut work, ncols);
        let mut x = vec![0.0; ni * ncols];
        for i in 0..ni {
            let p = self.pos[i] as usize;
            x[i * ncols..(i + 1) * ncols].copy_from_slice(&work[p * ncols..(p + 1) * ncols]);
        }
        x
    }
}

/// Harmonically extends boundary values: the interior part solves
/// L_II u_I = -L_IB f, the boundary part equals f. The returned vector is
/// indexed like the graph (interior block first, then boundary).
pub fn harmonic_extension(blocks: &LaplacianBlocks, f: &[f64]) -> Result<Vec<f64>, SpectrumError> {
    let ni = blocks.n_interior();
    let nb = blocks.n_boundary();
    if f.len() != nb {
        return Err(SpectrumError::BoundaryLengthMismatch {
            got: f.len(),
            expected: nb,
        });
    }
    let mut u = vec![0.0; ni + nb];
    u[ni..].copy_from_slice(f);
    if ni > 0 {
        let mut rhs = vec![0.0; ni];
        for i in 0..ni {
            for &(j, v) in blocks.l_ib.row(i) {
                rhs[i] -= v * f[j as usize];
            }
        }
        let solver = InteriorSolver::build(&blocks.l_ii)?;
        let interior = solver.solve_refined(&blocks.l_ii, &rhs, 1);
        u[..ni].copy_from_slice(&interior);
    }
    let mut worst = 0.0f64;
    for i in 0..ni {
        let mut lap = 0.0;
        for &(j, v) in blocks.l_ii.row(i) {
            lap += v * u[j as usize];
        }
        for &(j, v) in blocks.l_ib.row(i) {
            lap += v * f[j as usize];
        }
        worst = worst.max(lap.abs());
    }
    if worst > HARMONIC_RESIDUAL_TOLERANCE {
        return Err(SpectrumError::HarmonicResidual { norm: worst });
    }
    Ok(u)
}

/// Schur complement L_BB - L_IB^T L_II^{-1} L_IB, the matrix of the
/// Dirichlet-to-Neumann operator. Symmetry and zero row sums are enforced to
/// tolerance; violations indicate an assembly or solver defect.
pub fn dtn_matrix(blocks: &LaplacianBlocks) -> Result<Matrix, SpectrumError> {
    let ni = blocks.n_interior();
    let nb = blocks.n_boundary();
    let mut dtn = blocks.l_bb.to_dense();
    if ni > 0 {
        let solver = InteriorSolver::build(&blocks.l_ii)?;
        // Work through the boundary columns in blocks so the factor streams
        // once per block while the right-hand sides stay cache-resident.
        let block = 32usize;
        let mut lo = 0;
        while lo < nb {
            let width = block.min(nb - lo);
            let mut rhs = vec![0.0; ni * width];
            for i in 0..ni {
                for &(j, v) in blocks.l_ib.row(i) {
                    let j = j as usize;
                    if j >= lo && j < lo + width {
                        rhs[i * width + (j - lo)] = v;
                    }
                }
            }
            let x = solver.solve_refined(&blocks.l_ii, &rhs, width);
            for i in 0..ni {
                for &(j, v) in blocks.l_ib.row(i) {
                    let row = &x[i * width..(i + 1) * width];
                    for (c, xv) in row.iter().enumerate() {
                        dtn.add_to(j as usize, lo + c, -v * xv);
                    }
                }
            }
            lo += width;
        }
    }
    let asymmetry = dtn.max_abs_asymmetry();
    if asymmetry > DTN_DRIFT_TOLERANCE {
        return Err(SpectrumError::AsymmetricDtn { asymmetry });
    }
    dtn.symmetrize();
    for i in 0..nb {
        let sum: f64 = dtn.row(i).iter().sum();
        if sum.abs() > DTN_DRIFT_TOLERANCE {
            return Err(SpectrumError::RowSumViolation { row: i, sum });
        }
    }
    Ok(dtn)
}

/// The full Steklov spectrum of a graph with boundary: exactly one eigenvalue
/// per boundary vertex, ascending, with the zero mode clamped to exact 0.
#[derive(Debug, Clone)]
pub struct SteklovSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column k is the boundary-indexed eigenvector of eigenvalues[k].
    pub eigenvectors: Matrix,
    /// Per-pair 2-norm residuals of the eigenproblem.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SpectrumDocument {
    pub format_version: u32,
    pub n_boundary: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl SteklovSpectrum {
    pub fn n_boundary(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,sigma\n");
        for (k, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{},{:.12e}\n", k, v));
        }
        out
    }

    pub fn to_document(&self) -> SpectrumDocument {
        SpectrumDocument {
            format_version: 1,
            n_boundary: self.n_boundary(),
            eigenvalues: self.eigenvalues.clone(),
            residuals: self.residuals.clone(),
        }
    }
}

/// Shared validation: clamp the zero mode, reject genuinely negative
/// eigenvalues, verify eigenresiduals and the spectral gap.
fn finalize_spectrum(
    matrix: &Matrix,
    mut values: Vec<f64>,
    vectors: Matrix,
) -> Result<SteklovSpectrum, SpectrumError> {
    let n = values.len();
    for (index, v) in values.iter_mut().enumerate() {
        if *v < -ZERO_TOLERANCE {
            return Err(SpectrumError::NegativeEigenvalue { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if n > 0 && values[0].abs() < ZERO_TOLERANCE {
        values[0] = 0.0;
    }
    let mut residuals = Vec::with_capacity(n);
    for (k, &sigma) in values.iter().enumerate() {
        let mut norm_sq = 0.0;
        for i in 0..n {
            let mut r = -sigma * vectors.get(i, k);
            for j in 0..n {
                r += matrix.get(i, j) * vectors.get(j, k);
            }
            norm_sq += r * r;
        }
        let norm = norm_sq.sqrt();
        if norm > RESIDUAL_TOLERANCE {
            return Err(SpectrumError::ResidualTooLarge { index: k, norm });
        }
        residuals.push(norm);
    }
    if n > 1 && values[1] <= ZERO_TOLERANCE {
        return Err(SpectrumError::DegenerateGap { gap: values[1] });
    }
    Ok(SteklovSpectrum {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
    })
}

/// Main path: Schur complement plus the in-house symmetric eigensolver.
pub fn steklov_spectrum(g: &GraphWithBoundary) -> Result<SteklovSpectrum, SpectrumError> {
    let blocks = assemble_laplacian(g);
    let dtn = dtn_matrix(&blocks)?;
    let (values, vectors) = symmetric_eigen(&dtn)?;
    finalize_spectrum(&dtn, values, vectors)
}

/// Independent verification path. Builds the boundary quadratic form from
/// Dirichlet energies of harmonically extended basis vectors and solves the
/// dense eigenproblem with nalgebra. Shares no numerical kernel with
/// `steklov_spectrum`; agreement between the two certifies both.
pub fn rayleigh_oracle(g: &GraphWithBoundary) -> Result<SteklovSpectrum, SpectrumError> {
    let ni = g.n_interior();
    let nb = g.n_boundary();
    if nb > ORACLE_BOUNDARY_CAP {
        return Err(SpectrumError::OracleTooLarge {
            size: nb,
            cap: ORACLE_BOUNDARY_CAP,
        });
    }
    // Dense interior solve for all boundary basis extensions at once.
    let mut extensions = nalgebra::DMatrix::<f64>::zeros(ni + nb, nb);
    for j in 0..nb {
        extensions[(ni + j, j)] = 1.0;
    }
    if ni > 0 {
        let mut l_ii = nalgebra::DMatrix::<f64>::zeros(ni, ni);
        let mut rhs = nalgebra::DMatrix::<f64>::zeros(ni, nb);
        for v in 0..ni {
            l_ii[(v, v)] = g.degree(v as u32) as f64;
        }
        for &(a, b) in g.edges() {
            let (a, b) = (a as usize, b as usize);
            match (a < ni, b < ni) {
                (true, true) => {
                    l_ii[(a, b)] = -1.0;
                    l_ii[(b, a)] = -1.0;
                }
                (true, false) => rhs[(a, b - ni)] += 1.0,
                (false, true) => rhs[(b, a - ni)] += 1.0,
                (false, false) => {}
            }
        }
        let chol =
            nalgebra::linalg::Cholesky::new(l_ii).ok_or(SpectrumError::DenseFactorization)?;
        let interior = chol.solve(&rhs);
        extensions.view_mut((0, 0), (ni, nb)).copy_from(&interior);
    }
    // Polarized Dirichlet energy over the edges of the augmented graph.
    let mut form = Matrix::zeros(nb, nb);
    for &(a, b) in g.edges() {
        let (a, b) = (a as usize, b as usize);
        for i in 0..nb {
            let di = extensions[(a, i)] - extensions[(b, i)];
            if di == 0.0 {
                continue;
            }
            for j in i..nb {
                let dj = extensions[(a, j)] - extensions[(b, j)];
                form.add_to(i, j, di * dj);
                if j != i {
                    form.add_to(j, i, di * dj);
                }
            }
        }
    }
    let mut dense = nalgebra::DMatrix::<f64>::zeros(nb, nb);
    for i in 0..nb {
        for j in 0..nb {
            dense[(i, j)] = form.get(i, j);
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(dense.clone());
    let mut basis = eig.eigenvectors;
    let mut lambda = eig.eigenvalues;
    // The QL sweep can leave two eigenvectors of a near-degenerate pair
    // mixed by a small rotation even when the eigenvalues themselves are
    // accurate. The defect shows up as off-diagonal mass in the projected
    // matrix, and re-diagonalizing the projection removes it.
    let scale = dense.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    for _ in 0..3 {
        let projected = basis.transpose() * &dense * &basis;
        let mut off = 0.0f64;
        for i in 0..nb {
            for j in 0..nb {
                if i != j {
                    off = off.max(projected[(i, j)].abs());
                }
            }
        }
        if off <= 1e-13 * scale {
            break;
        }
        let refit = nalgebra::linalg::SymmetricEigen::new(projected);
        basis *= &refit.eigenvectors;
        lambda = refit.eigenvalues;
    }
    let mut order: Vec<usize> = (0..nb).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let mut values = Vec::with_capacity(nb);
    let mut vectors = Matrix::zeros(nb, nb);
    for (k, &src) in order.iter().enumerate() {
        values.push(lambda[src]);
        for i in 0..nb {
            vectors.set(i, k, basis[(i, src)]);
        }
    }
    finalize_spectrum(&form, values, vectors)
}
