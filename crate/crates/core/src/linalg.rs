//! Dense and banded symmetric linear algebra used by the FEM eigensolvers:
//! Householder tridiagonalization with implicit-shift QL, Cholesky, a banded
//! LDLᵀ with optional dense border row, sparse symmetric matvec, and a
//! shift-invert subspace iteration for large generalized pencils.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone)]
pub struct Dense<S> {
    pub n: usize,
    pub a: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![S::zero(); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: S) {
        self.a[i * self.n + j] += v;
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = (self.at(i, j) + self.at(j, i)) * S::of(0.5);
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        for i in 0..self.n {
            let mut acc = S::zero();
            let row = &self.a[i * self.n..(i + 1) * self.n];
            for (aij, xj) in row.iter().zip(x) {
                acc += *aij * *xj;
            }
            y[i] = acc;
        }
    }
}

fn pythag<S: Scalar>(a: S, b: S) -> S {
    let (a, b) = (a.abs(), b.abs());
    if a > b {
        a * (S::one() + (b / a) * (b / a)).sqrt()
    } else if b == S::zero() {
        S::zero()
    } else {
        b * (S::one() + (a / b) * (a / b)).sqrt()
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulated transformation (tred2). Returns `(d, e)`; `z` holds Q.
fn tred2<S: Scalar>(z: &mut Dense<S>) -> (Vec<S>, Vec<S>) {
    let n = z.n;
    let mut d = vec![S::zero(); n];
    let mut e = vec![S::zero(); n];
    for i in (1..n).rev() {
        let l = i; // columns 0..l of row i participate
        let mut h = S::zero();
        if l > 1 {
            let mut scale = S::zero();
            for k in 0..l {
                scale += z.at(i, k).abs();
            }
            if scale == S::zero() {
                e[i] = z.at(i, l - 1);
            } else {
                for k in 0..l {
                    let v = z.at(i, k) / scale;
                    z.set(i, k, v);
                    h += v * v;
                }
                let f = z.at(i, l - 1);
                let g = if f >= S::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z.set(i, l - 1, f - g);
                let mut f_acc = S::zero();
                for j in 0..l {
                    z.set(j, i, z.at(i, j) / h);
                    let mut g_acc = S::zero();
                    for k in 0..=j {
                        g_acc += z.at(j, k) * z.at(i, k);
                    }
                    for k in (j + 1)..l {
                        g_acc += z.at(k, j) * z.at(i, k);
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z.at(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..l {
                    let f = z.at(i, j);
                    let gj = e[j] - hh * f;
                    e[j] = gj;
                    for k in 0..=j {
                        let v = z.at(j, k) - (f * e[k] + gj * z.at(i, k));
                        z.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = z.at(i, l - 1);
        }
        d[i] = h;
    }
    d[0] = S::zero();
    e[0] = S::zero();
    for i in 0..n {
        if d[i] != S::zero() {
            for j in 0..i {
                let mut g = S::zero();
                for k in 0..i {
                    g += z.at(i, k) * z.at(k, j);
                }
                for k in 0..i {
                    let v = z.at(k, j) - g * z.at(k, i);
                    z.set(k, j, v);
                }
            }
        }
        d[i] = z.at(i, i);
        z.set(i, i, S::one());
        for j in 0..i {
            z.set(j, i, S::zero());
            z.set(i, j, S::zero());
        }
    }
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal, updating eigenvectors (tqli).
fn tqli<S: Scalar>(d: &mut [S], e: &mut [S], z: &mut Dense<S>) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= S::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "tqli failed to converge");
            let mut g = (d[l + 1] - d[l]) / (S::of(2.0) * e[l]);
            let mut r = pythag(g, S::one());
            let sign_r = if g >= S::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = S::one();
            let mut c = S::one();
            let mut p = S::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                let idx = i - 1;
                let f = s * e[idx];
                let b = c * e[idx];
                r = pythag(f, g);
                e[idx + 1] = r;
                if r == S::zero() {
                    d[idx + 1] -= p;
                    e[m] = S::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[idx + 1] - p;
                r = (d[idx] - g) * s + S::of(2.0) * c * b;
                p = s * r;
                d[idx + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z.at(k, idx + 1);
                    z.set(k, idx + 1, s * z.at(k, idx) + c * f);
                    z.set(k, idx, c * z.at(k, idx) - s * f);
                }
                i -= 1;
            }
            if underflow && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = S::zero();
        }
    }
}

/// Eigen-decomposition of a dense symmetric matrix: ascending values and the
/// matching orthonormal eigenvectors as columns of the returned matrix.
pub fn sym_eigen<S: Scalar>(a: &Dense<S>) -> (Vec<S>, Dense<S>) {
    let mut z = a.clone();
    if z.n == 1 {
        let v = z.at(0, 0);
        z.set(0, 0, S::one());
        return (vec![v], z);
    }
    let (mut d, mut e) = tred2(&mut z);
    tqli(&mut d, &mut e, &mut z);
    // sort ascending, permuting columns
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let n = z.n;
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Dense::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        vals.push(d[src]);
        for row in 0..n {
            vecs.set(row, col, z.at(row, src));
        }
    }
    (vals, vecs)
}

/// Lower Cholesky factor of an SPD dense matrix.
pub fn cholesky<S: Scalar>(a: &Dense<S>) -> Option<Dense<S>> {
    let n = a.n;
    let mut l = Dense::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.at(i, j);
            for k in 0..j {
                sum -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if sum <= S::zero() {
                    return None;
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.at(j, j));
            }
        }
    }
    Some(l)
}

fn solve_lower<S: Scalar>(l: &Dense<S>, b: &mut [S]) {
    let n = l.n;
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l.at(i, k) * b[k];
        }
        b[i] = v / l.at(i, i);
    }
}

fn solve_lower_t<S: Scalar>(l: &Dense<S>, b: &mut [S]) {
    let n = l.n;
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= l.at(k, i) * b[k];
        }
        b[i] = v / l.at(i, i);
    }
}

/// Dense symmetric generalized eigenproblem `A x = λ B x` with SPD `B`.
/// Returns ascending eigenvalues and B-orthonormal eigenvectors (columns).
pub fn dense_gevp<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Option<(Vec<S>, Dense<S>)> {
    let n = a.n;
    let l = cholesky(b)?;
    // C = L^{-1} A L^{-T}
    let mut c = Dense::zeros(n);
    // first: T = L^{-1} A  (solve on columns of A)
    let mut col = vec![S::zero(); n];
    let mut t = Dense::zeros(n);
    for j in 0..n {
        for i in 0..n {
            col[i] = a.at(i, j);
        }
        solve_lower(&l, &mut col);
        for i in 0..n {
            t.set(i, j, col[i]);
        }
    }
    // C = T L^{-T}: C^T = L^{-1} T^T, i.e. solve rows of T
    for i in 0..n {
        for j in 0..n {
            col[j] = t.at(i, j);
        }
        solve_lower(&l, &mut col);
        for j in 0..n {
            c.set(i, j, col[j]);
        }
    }
    c.symmetrize();
    let (vals, y) = sym_eigen(&c);
    // x = L^{-T} y per column
    let mut x = Dense::zeros(n);
    for j in 0..n {
        for i in 0..n {
            col[i] = y.at(i, j);
        }
        solve_lower_t(&l, &mut col);
        for i in 0..n {
            x.set(i, j, col[i]);
        }
    }
    Some((vals, x))
}

/// Sparse symmetric matrix in CSR (full pattern stored).
#[derive(Debug, Clone)]
pub struct SymSparse<S> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<S>,
}

impl<S: Scalar> SymSparse<S> {
    /// Build from upper-or-lower triplets `(i, j, v)`; symmetric completion
    /// and duplicate merging happen here.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, S)]) -> Self {
        let mut full: Vec<(usize, usize, S)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<S> = Vec::new();
        for &(i, j, v) in &full {
            if let (Some(&last_j), true) = (col_idx.last(), row_ptr[i + 1] > 0 || !col_idx.is_empty())
            {
                if !col_idx.is_empty()
                    && row_ptr[i + 1..].iter().all(|&x| x == 0)
                    && row_ptr[i] <= col_idx.len()
                {
                    // merge duplicates within the current row
                    let row_start = row_ptr[i];
                    let _ = row_start;
                    if last_j == j && col_idx.len() > row_ptr[i] && {
                        // same row check: position belongs to row i
                        true
                    } {
                        // handled below
                    }
                }
            }
            // simple merge: if same (i, j) as previous entry, accumulate
            let same = !col_idx.is_empty()
                && *col_idx.last().unwrap() == j
                && row_ptr[i + 1] == col_idx.len()
                && row_ptr[i] < col_idx.len();
            if same {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] = col_idx.len();
            }
        }
        // make row_ptr cumulative (fill gaps for empty rows)
        for i in 1..=n {
            if row_ptr[i] == 0 {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        // fix monotonicity (rows filled out of order cannot happen: sorted)
        for i in 1..=n {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Self { n, row_ptr, col_idx, vals }
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        for i in 0..self.n {
            let mut acc = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> Dense<S> {
        let mut d = Dense::zeros(self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d.add(i, self.col_idx[k], self.vals[k]);
            }
        }
        d
    }

    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    pub fn inf_norm(&self) -> S {
        let mut worst = S::zero();
        for i in 0..self.n {
            let mut acc = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k].abs();
            }
            worst = worst.max(acc);
        }
        worst
    }

    /// `A + c * B` for pencils sharing a size (patterns may differ).
    pub fn add_scaled(&self, other: &SymSparse<S>, c: S) -> SymSparse<S> {
        assert_eq!(self.n, other.n);
        let mut trip = Vec::new();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j <= i {
                    trip.push((i, j, self.vals[k]));
                }
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                let j = other.col_idx[k];
                if j <= i {
                    trip.push((i, j, c * other.vals[k]));
                }
            }
        }
        SymSparse::from_triplets(self.n, &trip)
    }
}

/// Banded LDLᵀ factorization (no pivoting; intended for SPD matrices).
#[derive(Debug, Clone)]
pub struct BandedLdlt<S> {
    n: usize,
    bw: usize,
    /// row-major band: entry `(i, j)` for `i-bw <= j <= i` at
    /// `i*(bw+1) + (bw + j - i)`.
    band: Vec<S>,
    diag: Vec<S>,
}

impl<S: Scalar> BandedLdlt<S> {
    /// Factor a sparse symmetric matrix whose entries fit in its bandwidth.
    pub fn factor(a: &SymSparse<S>) -> Option<Self> {
        let n = a.n;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![S::zero(); n * w];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j <= i {
                    band[i * w + (bw + j - i)] = a.vals[k];
                }
            }
        }
        let mut diag = vec![S::zero(); n];
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut dj = band[j * w + bw];
            for k in k0..j {
                let ljk = band[j * w + (bw + k - j)];
                dj -= ljk * ljk * diag[k];
            }
            if dj == S::zero() || !dj.is_finite() {
                return None;
            }
            diag[j] = dj;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let mut v = band[i * w + (bw + j - i)];
                let kmin = i.saturating_sub(bw).max(k0);
                for k in kmin..j {
                    v -= band[i * w + (bw + k - i)] * band[j * w + (bw + k - j)] * diag[k];
                }
                band[i * w + (bw + j - i)] = v / dj;
            }
        }
        Some(Self { n, bw, band, diag })
    }

    pub fn solve_in_place(&self, b: &mut [S]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // forward: L z = b
        for i in 0..n {
            let k0 = i.saturating_sub(bw);
            let mut v = b[i];
            for k in k0..i {
                v -= self.band[i * w + (bw + k - i)] * b[k];
            }
            b[i] = v;
        }
        // diagonal
        for i in 0..n {
            b[i] /= self.diag[i];
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            let kmax = (i + bw).min(n - 1);
            let mut v = b[i];
            for k in (i + 1)..=kmax {
                v -= self.band[k * w + (bw + i - k)] * b[k];
            }
            b[i] = v;
        }
    }

    /// Positive definite iff all pivots are positive.
    pub fn is_positive_definite(&self) -> bool {
        self.diag.iter().all(|d| *d > S::zero())
    }
}

/// Factorization of a sparse symmetric matrix: banded core plus an optional
/// dense border for a single trailing row/column (the tied non-flux unknown).
#[derive(Debug, Clone)]
pub enum Factor<S> {
    Banded(BandedLdlt<S>),
    Bordered {
        core: BandedLdlt<S>,
        /// border column of length n-1, the solved `A11^{-1} c`, and the
        /// scalar Schur complement
        c: Vec<S>,
        w: Vec<S>,
        schur: S,
    },
}

impl<S: Scalar> Factor<S> {
    /// Factor `a`; if `bordered_last` is set, the final row/column is treated
    /// as dense and eliminated through a scalar Schur complement.
    pub fn new(a: &SymSparse<S>, bordered_last: bool) -> Option<Self> {
        if !bordered_last {
            return BandedLdlt::factor(a).map(Factor::Banded);
        }
        let n = a.n;
        let m = n - 1;
        let mut core_trip = Vec::new();
        let mut c = vec![S::zero(); m];
        let mut corner = S::zero();
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j > i {
                    continue;
                }
                if i < m && j < m {
                    core_trip.push((i, j, a.vals[k]));
                } else if i == m && j == m {
                    corner = a.vals[k];
                } else if i == m {
                    c[j] = a.vals[k];
                }
            }
        }
        let core = BandedLdlt::factor(&SymSparse::from_triplets(m, &core_trip))?;
        let mut w = c.clone();
        core.solve_in_place(&mut w);
        let mut schur = corner;
        for i in 0..m {
            schur -= c[i] * w[i];
        }
        if schur == S::zero() || !schur.is_finite() {
            return None;
        }
        Some(Factor::Bordered { core, c, w, schur })
    }

    pub fn solve_in_place(&self, b: &mut [S]) {
        match self {
            Factor::Banded(f) => f.solve_in_place(b),
            Factor::Bordered { core, c, w, schur } => {
                let m = b.len() - 1;
                let beta = b[m];
                core.solve_in_place(&mut b[..m]);
                let mut ct_x0 = S::zero();
                for i in 0..m {
                    ct_x0 += c[i] * b[i];
                }
                let y = (beta - ct_x0) / *schur;
                for i in 0..m {
                    b[i] -= w[i] * y;
                }
                b[m] = y;
            }
        }
    }
}

/// Result of a subspace iteration run.
pub struct SubspaceResult<S> {
    pub values: Vec<S>,
    /// eigenvectors as rows (length n each)
    pub vectors: Vec<Vec<S>>,
    pub iterations: usize,
    pub residuals: Vec<S>,
}

/// Shift-invert subspace iteration for `A x = λ B x` with SPD `B` and a
/// prefactored `A - σB`. Returns the `k` smallest eigenvalues.
pub fn subspace_gevp<S: Scalar>(
    a: &SymSparse<S>,
    b: &SymSparse<S>,
    factor: &Factor<S>,
    k: usize,
    tol: S,
    seed: u64,
) -> Option<SubspaceResult<S>> {
    let n = a.n;
    let m = (k + 8).min(n).max(k.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<S>> = (0..m)
        .map(|_| (0..n).map(|_| S::of(rng.gen::<f64>() * 2.0 - 1.0)).collect())
        .collect();
    let mut prev: Vec<S> = vec![S::infinity(); k];
    let mut tmp = vec![S::zero(); n];
    let max_iter = 300;
    for it in 1..=max_iter {
        // Y = (A - sigma B)^{-1} B X
        for xi in x.iter_mut() {
            b.matvec(xi, &mut tmp);
            xi.copy_from_slice(&tmp);
            factor.solve_in_place(xi);
        }
        // modified Gram-Schmidt orthonormalization
        for i in 0..m {
            for j in 0..i {
                let mut dot = S::zero();
                for t in 0..n {
                    dot += x[i][t] * x[j][t];
                }
                for t in 0..n {
                    let v = x[j][t];
                    x[i][t] -= dot * v;
                }
            }
            let norm = x[i].iter().map(|v| *v * *v).sum::<S>().sqrt();
            if norm < S::of(1e-200) {
                // regenerate a degenerate direction
                for t in 0..n {
                    x[i][t] = S::of(rng.gen::<f64>() * 2.0 - 1.0);
                }
            } else {
                for t in 0..n {
                    x[i][t] /= norm;
                }
            }
        }
        // Rayleigh-Ritz
        let mut ap = Dense::zeros(m);
        let mut bp = Dense::zeros(m);
        let mut ax: Vec<Vec<S>> = Vec::with_capacity(m);
        let mut bx: Vec<Vec<S>> = Vec::with_capacity(m);
        for xi in &x {
            let mut ya = vec![S::zero(); n];
            a.matvec(xi, &mut ya);
            ax.push(ya);
            let mut yb = vec![S::zero(); n];
            b.matvec(xi, &mut yb);
            bx.push(yb);
        }
        for i in 0..m {
            for j in 0..=i {
                let mut sa = S::zero();
                let mut sb = S::zero();
                for t in 0..n {
                    sa += x[i][t] * ax[j][t];
                    sb += x[i][t] * bx[j][t];
                }
                ap.set(i, j, sa);
                ap.set(j, i, sa);
                bp.set(i, j, sb);
                bp.set(j, i, sb);
            }
        }
        let (vals, w) = dense_gevp(&ap, &bp)?;
        // rotate basis
        let mut newx: Vec<Vec<S>> = vec![vec![S::zero(); n]; m];
        for (col, nx) in newx.iter_mut().enumerate() {
            for row in 0..m {
                let wr = w.at(row, col);
                if wr != S::zero() {
                    for t in 0..n {
                        nx[t] += wr * x[row][t];
                    }
                }
            }
        }
        x = newx;
        // converge on both the Ritz values and the pair residuals
        let mut value_settled = it > 2;
        for i in 0..k.min(vals.len()) {
            let scale = S::one().max(vals[i].abs());
            if (vals[i] - prev[i]).abs() > tol * scale * S::of(0.1) {
                value_settled = false;
            }
            prev[i] = vals[i];
        }
        let mut residuals = Vec::with_capacity(k);
        let norm_scale = (a.inf_norm() + b.inf_norm()).max(S::one());
        for i in 0..k.min(vals.len()) {
            let mut ra = vec![S::zero(); n];
            a.matvec(&x[i], &mut ra);
            let mut rb = vec![S::zero(); n];
            b.matvec(&x[i], &mut rb);
            let mut num = S::zero();
            let mut den = S::zero();
            for t in 0..n {
                let r = ra[t] - vals[i] * rb[t];
                num += r * r;
                den += x[i][t] * x[i][t];
            }
            residuals.push(num.sqrt() / (den.sqrt() * norm_scale));
        }
        let residuals_small = residuals.iter().all(|r| *r < tol.max(S::of(1e-14)));
        if (value_settled && residuals_small) || it == max_iter {
            return Some(SubspaceResult {
                values: vals[..k.min(vals.len())].to_vec(),
                vectors: x.into_iter().take(k).collect(),
                iterations: it,
                residuals,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_from(rows: &[&[f64]]) -> Dense<f64> {
        let n = rows.len();
        let mut d = Dense::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                d.set(i, j, *v);
            }
        }
        d
    }

    #[test]
    fn eigen_2x2() {
        let a = dense_from(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (vals, vecs) = sym_eigen(&a);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        // residual check
        for j in 0..2 {
            for i in 0..2 {
                let mut av = 0.0;
                for k in 0..2 {
                    av += a.at(i, k) * vecs.at(k, j);
                }
                assert!((av - vals[j] * vecs.at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_random_residuals() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 30;
        let mut a = Dense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen::<f64>() * 2.0 - 1.0;
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let (vals, vecs) = sym_eigen(&a);
        for w in vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for j in 0..n {
            let mut res: f64 = 0.0;
            for i in 0..n {
                let mut av = 0.0;
                for k in 0..n {
                    av += a.at(i, k) * vecs.at(k, j);
                }
                res = res.max((av - vals[j] * vecs.at(i, j)).abs());
            }
            assert!(res < 1e-10, "col {j}: residual {res}");
        }
        // orthonormality
        for i in 0..n {
            for j in 0..=i {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += vecs.at(k, i) * vecs.at(k, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gevp_known() {
        // A = diag(1, 2), B = diag(1, 4): eigenvalues 1, 0.5
        let a = dense_from(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let b = dense_from(&[&[1.0, 0.0], &[0.0, 4.0]]);
        let (vals, _) = dense_gevp(&a, &b).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn banded_solve_matches_dense() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        // SPD banded: diag dominant tridiag+2
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 5.0 + rng.gen::<f64>()));
            if i >= 1 {
                trip.push((i, i - 1, -1.0 + 0.1 * rng.gen::<f64>()));
            }
            if i >= 2 {
                trip.push((i, i - 2, 0.3 * rng.gen::<f64>()));
            }
        }
        let a = SymSparse::from_triplets(n, &trip);
        let f = BandedLdlt::factor(&a).unwrap();
        assert!(f.is_positive_definite());
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let mut r = vec![0.0; n];
        a.matvec(&x, &mut r);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn bordered_solve() {
        // 3x3 with dense last row
        let trip = vec![
            (0usize, 0usize, 4.0),
            (1, 1, 4.0),
            (1, 0, 1.0),
            (2, 0, 0.5),
            (2, 1, 0.7),
            (2, 2, 3.0),
        ];
        let a = SymSparse::from_triplets(3, &trip);
        let f = Factor::new(&a, true).unwrap();
        let b: Vec<f64> = vec![1.0, 2.0, 3.0];
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let mut r = vec![0.0; 3];
        a.matvec(&x, &mut r);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn subspace_matches_dense_small() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 60;
        let mut atrip = Vec::new();
        let mut btrip = Vec::new();
        for i in 0..n {
            atrip.push((i, i, 4.0 + rng.gen::<f64>()));
            btrip.push((i, i, 1.0 + 0.2 * rng.gen::<f64>()));
            if i >= 1 {
                atrip.push((i, i - 1, -1.0));
                btrip.push((i, i - 1, 0.1));
            }
        }
        let a = SymSparse::from_triplets(n, &atrip);
        let b = SymSparse::from_triplets(n, &btrip);
        let (dvals, _) = dense_gevp(&a.to_dense(), &b.to_dense()).unwrap();
        let sigma = dvals[0] - 1.0;
        let shifted = a.add_scaled(&b, -sigma);
        let f = Factor::new(&shifted, false).unwrap();
        let res = subspace_gevp(&a, &b, &f, 5, 1e-10, 1).unwrap();
        for i in 0..5 {
            assert!(
                (res.values[i] - dvals[i]).abs() < 1e-8 * (1.0 + dvals[i].abs()),
                "i={i}: {} vs {}",
                res.values[i],
                dvals[i]
            );
            assert!(res.residuals[i] < 1e-8);
        }
    }

    #[test]
    fn triplet_merge() {
        let a = SymSparse::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5)]);
        let d = a.to_dense();
        assert_eq!(d.at(0, 0), 3.0);
        assert_eq!(d.at(1, 0), 0.5);
        assert_eq!(d.at(0, 1), 0.5);
    }
}
