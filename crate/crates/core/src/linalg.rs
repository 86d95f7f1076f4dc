//! Dense and banded symmetric linear algebra.
//!
//! The Schur complements in this crate reduce to one symmetric positive
//! definite solve with many right-hand sides plus one symmetric eigensolve.
//! Both are implemented here directly: the solve as a banded Cholesky under a
//! reverse Cuthill-McKee ordering (graph Laplacians of near-planar meshes
//! band well), the eigensolve as Householder tridiagonalization followed by
//! implicit-shift QL. Tests cross-check every kernel against nalgebra.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("eigeniteration failed to converge at index {index}")]
    EigenNoConvergence { index: usize },
}

/// Dense row-major matrix. Just enough surface for the spectral pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// self · other.
    pub fn multiply(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += aik * s;
                }
            }
        }
        out
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Force exact symmetry by averaging opposite entries.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[new] = old`,
/// chosen to keep graph neighbors close together and thus the matrix band
/// narrow. Disconnected components are ordered one after another.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<u32>]) -> Vec<u32> {
    let n = adjacency.len();
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let degree = |v: usize| adjacency[v].len();

    // BFS distances from v, for the pseudo-peripheral search.
    let eccentric_end = |start: usize| -> usize {
        let mut dist = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &w in &adjacency[v] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        last
    };

    for seed in 0..n {
        if seen[seed] {
            continue;
        }
        // Double sweep to land near the periphery of this component.
        let far = eccentric_end(eccentric_end(seed));
        let mut queue = std::collections::VecDeque::new();
        seen[far] = true;
        queue.push_back(far as u32);
        let base = order.len();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<u32> = adjacency[v as usize]
                .iter()
                .copied()
                .filter(|&w| !seen[w as usize])
                .collect();
            nbrs.sort_unstable_by_key(|&w| (degree(w as usize), w));
            for w in nbrs {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        order[base..].reverse();
    }
    order
}

pub fn bandwidth_under(perm: &[u32], adjacency: &[Vec<u32>]) -> usize {
    let n = perm.len();
    let mut pos = vec![0u32; n];
    for (new, &old) in perm.iter().enumerate() {
        pos[old as usize] = new as u32;
    }
    let mut bw = 0usize;
    for (old, nbrs) in adjacency.iter().enumerate() {
        for &w in nbrs {
            let d = (pos[old] as i64 - pos[w as usize] as i64).unsigned_abs() as usize;
            bw = bw.max(d);
        }
    }
    bw
}

/// Symmetric positive definite matrix in lower band storage:
/// entry (i, j) with 0 ≤ i − j ≤ bw lives at `rows[i * (bw + 1) + (i − j)]`.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    rows: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            rows: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    /// Set entry (i, j); only the lower triangle is stored, callers pass
    /// either order.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        assert!(hi - lo <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let k = self.idx(hi, lo);
        self.rows[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        assert!(hi - lo <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let k = self.idx(hi, lo);
        self.rows[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bw {
            return 0.0;
        }
        self.rows[self.idx(hi, lo)]
    }

    /// In-place Cholesky A = L·Lᵀ. Fails on a nonpositive pivot.
    pub fn cholesky(mut self) -> Result<BandedCholesky, LinalgError> {
        let stride = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                // Accumulate Σ_k L[i,k]·L[j,k] over k in [lo, j). In band
                // coordinates both factors advance with m = j − k, so the sum
                // is a forward dot product of two contiguous strips.
                let len = j - lo;
                let off = i - j;
                let mut sum = 0.0;
                if len > 0 {
                    let bi = &self.rows[i * stride + off + 1..i * stride + off + len + 1];
                    let bj = &self.rows[j * stride + 1..j * stride + len + 1];
                    for (x, y) in bi.iter().zip(bj) {
                        sum += x * y;
                    }
                }
                let k = i * stride + off;
                if i == j {
                    let pivot = self.rows[k] - sum;
                    if pivot <= 0.0 || !pivot.is_finite() {
                        return Err(LinalgError::NotPositiveDefinite { row: i, pivot });
                    }
                    self.rows[k] = pivot.sqrt();
                } else {
                    let diag = self.rows[j * stride];
                    self.rows[k] = (self.rows[k] - sum) / diag;
                }
            }
        }
        Ok(BandedCholesky {
            n: self.n,
            bw: self.bw,
            rows: self.rows,
        })
    }
}

/// Cholesky factor in the same band layout as [`BandedSpd`].
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    rows: Vec<f64>,
}

impl BandedCholesky {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves A·X = B for a block of right-hand sides stored row-major
    /// (`rhs[i * ncols + c]`), overwriting them with the solution. Keeping the
    /// block as rows makes both triangular sweeps stream the factor once per
    /// block while the block itself stays cache-resident.
    pub fn solve_block_in_place(&self, rhs: &mut [f64], ncols: usize) {
        assert_eq!(rhs.len(), self.n * ncols);
        let stride = self.bw + 1;
        // Forward: L y = b.
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let band = &self.rows[i * stride..i * stride + (i - lo) + 1];
            let (head, tail) = rhs.split_at_mut(i * ncols);
            let acc = &mut tail[..ncols];
            for (m, &lv) in band.iter().enumerate().skip(1) {
                if lv == 0.0 {
                    continue;
                }
                let src = &head[(i - m) * ncols..(i - m) * ncols + ncols];
                for (a, s) in acc.iter_mut().zip(src) {
                    *a -= lv * s;
                }
            }
            let d = band[0];
            for a in acc.iter_mut() {
                *a /= d;
            }
        }
        // Backward: Lᵀ x = y. Row i of Lᵀ above the diagonal is column i of L.
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let (head, tail) = rhs.split_at_mut((i + 1) * ncols);
            let acc = &mut head[i * ncols..];
            for r in (i + 1)..=hi {
                let lv = self.rows[r * stride + (r - i)];
                if lv == 0.0 {
                    continue;
                }
                let src = &tail[(r - i - 1) * ncols..(r - i - 1) * ncols + ncols];
                for (a, s) in acc.iter_mut().zip(src) {
                    *a -= lv * s;
                }
            }
            let d = self.rows[i * stride];
            for a in acc.iter_mut() {
                *a /= d;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_block_in_place(&mut x, 1);
        x
    }
}

/// Eigendecomposition of a symmetric matrix: Householder reduction to
/// tridiagonal form with accumulated transforms, then implicit-shift QL.
/// Returns eigenvalues ascending with matching eigenvector columns.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix), LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tqli(&mut d, &mut e, &mut z)?;
    // Sort ascending, carrying eigenvector columns along.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (newcol, &oldcol) in idx.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, newcol, z.get(r, oldcol));
        }
    }
    Ok((values, vectors))
}

/// Householder tridiagonalization. On exit `z` holds the accumulated
/// orthogonal transform, `d` the diagonal, `e` the subdiagonal in e[1..].
fn tred2(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = z.nrows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z.get(i, k).abs();
            }
            if scale == 0.0 {
                e[i] = z.get(i, l);
            } else {
                for k in 0..=l {
                    let v = z.get(i, k) / scale;
                    z.set(i, k, v);
                    h += v * v;
                }
                let f = z.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z.set(i, l, f - g);
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z.set(j, i, z.get(i, j) / h);
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z.get(j, k) * z.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g += z.get(k, j) * z.get(i, k);
                    }
                    e[j] = g / h;
                    f_acc += e[j] * z.get(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z.get(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = z.get(j, k) - f * e[k] - g * z.get(i, k);
                        z.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = z.get(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z.get(i, k) * z.get(k, j);
                }
                for k in 0..i {
                    let v = z.get(k, j) - g * z.get(k, i);
                    z.set(k, j, v);
                }
            }
        }
        d[i] = z.get(i, i);
        z.set(i, i, 1.0);
        for j in 0..i {
            z.set(j, i, 0.0);
            z.set(i, j, 0.0);
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal, rotations applied to `z`.
fn tqli(d: &mut [f64], e: &mut [f64], z: &mut Matrix) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::EigenNoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z.get(k, i + 1);
                    z.set(k, i + 1, s * z.get(k, i) + c * f);
                    z.set(k, i, c * z.get(k, i) - s * f);
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    fn random_spd_banded(n: usize, bw: usize, seed: u64) -> (BandedSpd, Matrix) {
        let mut rng = SplitMix64::new(seed);
        let mut banded = BandedSpd::zeros(n, bw);
        let mut dense = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                if i == j {
                    continue;
                }
                let v = rng.unit_f64() - 0.5;
                banded.set(i, j, v);
                dense.set(i, j, v);
                dense.set(j, i, v);
            }
        }
        // Diagonal dominance makes it positive definite.
        for i in 0..n {
            let v = 2.0 * bw as f64 + 1.0 + rng.unit_f64();
            banded.set(i, i, v);
            dense.set(i, i, v);
        }
        (banded, dense)
    }

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = SplitMix64::new(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.unit_f64() * 2.0 - 1.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    fn to_nalgebra(m: &Matrix) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.get(i, j))
    }

    #[test]
    fn banded_cholesky_reconstructs_matrix() {
        let (banded, dense) = random_spd_banded(40, 6, 11);
        let chol = banded.cholesky().unwrap();
        // L Lᵀ must reproduce A entrywise.
        let mut l = Matrix::zeros(40, 40);
        for i in 0..40usize {
            for j in i.saturating_sub(6)..=i {
                l.set(i, j, chol.rows[i * 7 + (i - j)]);
            }
        }
        let mut lt = Matrix::zeros(40, 40);
        for i in 0..40 {
            for j in 0..40 {
                lt.set(i, j, l.get(j, i));
            }
        }
        let prod = l.multiply(&lt);
        for i in 0..40 {
            for j in 0..40 {
                assert!(
                    (prod.get(i, j) - dense.get(i, j)).abs() < 1e-10,
                    "mismatch at ({i}, {j})"
                );
            }
        }
    }

    #[test]
    fn banded_solve_matches_nalgebra() {
        let (banded, dense) = random_spd_banded(60, 9, 23);
        let chol = banded.cholesky().unwrap();
        let mut rng = SplitMix64::new(5);
        let b: Vec<f64> = (0..60).map(|_| rng.unit_f64() * 4.0 - 2.0).collect();
        let x = chol.solve(&b);
        let nd = to_nalgebra(&dense);
        let nb = nalgebra::DVector::from_column_slice(&b);
        let nx = nd.lu().solve(&nb).unwrap();
        for i in 0..60 {
            assert!((x[i] - nx[i]).abs() < 1e-9, "row {i}: {} vs {}", x[i], nx[i]);
        }
    }

    #[test]
    fn block_solve_matches_single_column_solves() {
        let (banded, _) = random_spd_banded(50, 7, 31);
        let chol = banded.cholesky().unwrap();
        let mut rng = SplitMix64::new(9);
        let ncols = 5;
        let mut block: Vec<f64> = (0..50 * ncols).map(|_| rng.unit_f64() - 0.5).collect();
        let original = block.clone();
        chol.solve_block_in_place(&mut block, ncols);
        for c in 0..ncols {
            let col: Vec<f64> = (0..50).map(|i| original[i * ncols + c]).collect();
            let x = chol.solve(&col);
            for i in 0..50 {
                assert!((block[i * ncols + c] - x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn not_positive_definite_detected() {
        let mut banded = BandedSpd::zeros(3, 1);
        banded.set(0, 0, 1.0);
        banded.set(1, 1, -2.0);
        banded.set(2, 2, 1.0);
        assert!(matches!(
            banded.cholesky(),
            Err(LinalgError::NotPositiveDefinite { row: 1, .. })
        ));
    }

    #[test]
    fn rcm_is_permutation_and_shrinks_path_bandwidth() {
        // A path graph visited in scrambled vertex order has terrible natural
        // bandwidth; RCM must recover something near 1.
        let n = 101usize;
        let scramble = |v: usize| (v * 67) % n;
        let mut adj = vec![Vec::new(); n];
        for v in 0..n - 1 {
            let (a, b) = (scramble(v), scramble(v + 1));
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        let perm = reverse_cuthill_mckee(&adj);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n as u32).collect::<Vec<_>>());
        assert!(bandwidth_under(&perm, &adj) <= 2);
        let natural: Vec<u32> = (0..n as u32).collect();
        assert!(bandwidth_under(&natural, &adj) > 10);
    }

    #[test]
    fn eigen_known_two_by_two() {
        let m = Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        // Eigenvector for 1 is (1, 1)/√2 up to sign.
        let ratio = vecs.get(0, 0) / vecs.get(1, 0);
        assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_matches_nalgebra_on_random_symmetric() {
        for seed in [3u64, 17, 99] {
            let m = random_symmetric(40, seed);
            let (vals, vecs) = symmetric_eigen(&m).unwrap();
            let na = to_nalgebra(&m).symmetric_eigen();
            let mut na_vals: Vec<f64> = na.eigenvalues.iter().copied().collect();
            na_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for i in 0..40 {
                assert!(
                    (vals[i] - na_vals[i]).abs() < 1e-9,
                    "seed {seed} eigenvalue {i}: {} vs {}",
                    vals[i],
                    na_vals[i]
                );
            }
            // Residual ‖Av − λv‖ and orthonormality of the vectors.
            let av = m.multiply(&vecs);
            for j in 0..40 {
                let mut res = 0.0;
                let mut norm = 0.0;
                for i in 0..40 {
                    let r = av.get(i, j) - vals[j] * vecs.get(i, j);
                    res += r * r;
                    norm += vecs.get(i, j) * vecs.get(i, j);
                }
                assert!(res.sqrt() < 1e-9, "residual for column {j}");
                assert!((norm - 1.0).abs() < 1e-9, "column {j} not unit");
            }
            for a in 0..5 {
                for b in (a + 1)..5 {
                    let dot: f64 = (0..40).map(|i| vecs.get(i, a) * vecs.get(i, b)).sum();
                    assert!(dot.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn eigen_handles_repeated_eigenvalues() {
        // I − J/3 on 3 points: spectrum {0, 1, 1}.
        let third = 1.0 / 3.0;
        let m = Matrix::from_rows(&[
            vec![1.0 - third, -third, -third],
            vec![-third, 1.0 - third, -third],
            vec![-third, -third, 1.0 - third],
        ]);
        let (vals, _) = symmetric_eigen(&m).unwrap();
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_zero_and_one_by_one() {
        let (vals, _) = symmetric_eigen(&Matrix::zeros(0, 0)).unwrap();
        assert!(vals.is_empty());
        let m = Matrix::from_rows(&[vec![4.5]]);
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert_eq!(vals, vec![4.5]);
        assert!((vecs.get(0, 0).abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_banded_solve_consistency() {
        // A bigger case along the real use: permute by RCM, factor, solve,
        // check the residual directly.
        let n = 400usize;
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if (i * 31 + j * 17) % 97 == 0 && j - i < 40 {
                    adj[i].push(j as u32);
                    adj[j].push(i as u32);
                }
            }
        }
        let perm = reverse_cuthill_mckee(&adj);
        let bw = bandwidth_under(&perm, &adj).max(1);
        let mut pos = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            pos[old as usize] = new;
        }
        let mut m = BandedSpd::zeros(n, bw);
        for i in 0..n {
            m.set(pos[i], pos[i], adj[i].len() as f64 + 1.0);
            for &j in &adj[i] {
                if (j as usize) > i {
                    m.set(pos[i], pos[j as usize], -1.0);
                }
            }
        }
        let dense_get = |i: usize, j: usize| m.get(i, j);
        let chol = m.clone().cholesky().unwrap();
        let mut rng = SplitMix64::new(77);
        let b: Vec<f64> = (0..n).map(|_| rng.unit_f64() - 0.5).collect();
        let x = chol.solve(&b);
        for i in 0..n {
            let mut ax = 0.0;
            for j in 0..n {
                let lo = if i > j { i - j } else { j - i };
                if lo <= bw {
                    ax += dense_get(i, j) * x[j];
                }
            }
            assert!((ax - b[i]).abs() < 1e-9, "residual row {i}");
        }
    }
}
