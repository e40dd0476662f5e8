//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. The Hermitian eigensolver is a cyclic
//! complex Jacobi method; its accuracy contract is a reconstruction residual
//! below `1e-10` in Hilbert–Schmidt norm for the dimensions used here.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
// Inherent float methods shadow this when std is linked (tests).
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::states::DensityOperator;
use crate::{Error, Result};

/// Eigenvalues below this are treated as exactly zero in logs, square roots
/// and support computations.
pub const EIG_CUTOFF: f64 = 1e-12;

/// Weight of `rho` outside the support of `sigma` above which the relative
/// entropy is reported as `+inf`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Tolerance of the Hermiticity pre-check (max-abs entry deviation).
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimMismatch(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Column vector `|v⟩` as an `n x 1` matrix.
    pub fn column_vector(v: &[Complex64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let rows = cols[0].len();
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r])
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
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &self.data[i * k..(i + 1) * k];
            let orow = &mut out[i * m..(i + 1) * m];
            for (l, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    /// `A v` for a vector `v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "apply shape mismatch");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|A|w⟩`.
    pub fn sandwich(&self, v: &[Complex64], w: &[Complex64]) -> Complex64 {
        let aw = self.apply(w);
        v.iter().zip(&aw).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(A† B)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for l in 0..self.cols {
                acc += self[(i, l)] * other[(l, i)];
            }
        }
        acc
    }

    /// Squared Hilbert–Schmidt norm `Tr(A† A)`.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entry deviation between `A` and `A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_fn(n, n, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// Kronecker product with block ordering
    /// `(a ⊗ b)[(i·rb + k), (j·cb + l)] = a[i,j]·b[k,l]`.
    pub fn kron(&self, b: &Self) -> Self {
        let (ra, ca, rb, cb) = (self.rows, self.cols, b.rows, b.cols);
        let mut out = Self::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `I_before ⊗ op ⊗ I_after` for `op` acting on factor `sub` of `dims`.
    pub fn embed(op: &Self, dims: &[usize], sub: usize) -> Result<Self> {
        if sub >= dims.len() || op.rows != dims[sub] || op.cols != dims[sub] {
            return Err(Error::DimMismatch(format!(
                "operator {}x{} cannot act on factor {sub} of {dims:?}",
                op.rows, op.cols
            )));
        }
        let before: usize = dims[..sub].iter().product();
        let after: usize = dims[sub + 1..].iter().product();
        Ok(Self::identity(before).kron(op).kron(&Self::identity(after)))
    }

    /// Trace out every factor not listed in `keep`. Kept factors stay in
    /// their original order.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || total != self.rows {
            return Err(Error::DimMismatch(format!(
                "dims {dims:?} (product {total}) do not match a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || *kept.last().unwrap() >= dims.len() {
            return Err(Error::DimMismatch(format!("keep set {keep:?} invalid for dims {dims:?}")));
        }
        if kept.len() == dims.len() {
            return Ok(self.clone());
        }
        let strides = strides(dims);
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
        let kept_offsets = offsets(dims, &strides, &kept);
        let traced_offsets = offsets(dims, &strides, &traced);
        let dk = kept_offsets.len();
        let mut out = Self::zeros(dk, dk);
        for (r, &ro) in kept_offsets.iter().enumerate() {
            for (c, &co) in kept_offsets.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &traced_offsets {
                    acc += self.data[(ro + t) * total + co + t];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Reorder tensor factors: output factor `i` is input factor `perm[i]`.
    pub fn permute_factors(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.rows || !self.is_square() || perm.len() != dims.len() {
            return Err(Error::DimMismatch(format!("cannot permute {dims:?} by {perm:?}")));
        }
        let map = permutation_map(dims, perm);
        Ok(Self::from_fn(total, total, |r, c| self.data[map[r] * total + map[c]]))
    }

    /// `(I ⊗ op ⊗ I) · self` with `op` square on factor `sub`, without
    /// forming the embedded operator.
    pub fn local_left(&self, op: &Self, dims: &[usize], sub: usize) -> Self {
        let ds = dims[sub];
        debug_assert!(op.rows == ds && op.cols == ds && self.rows == dims.iter().product::<usize>());
        let after: usize = dims[sub + 1..].iter().product();
        let before = self.rows / (ds * after);
        let n = self.cols;
        let mut out = Self::zeros(self.rows, n);
        for a in 0..before {
            for b in 0..after {
                for s in 0..ds {
                    let ro = ((a * ds + s) * after + b) * n;
                    for t in 0..ds {
                        let w = op[(s, t)];
                        if w == ZERO {
                            continue;
                        }
                        let ri = ((a * ds + t) * after + b) * n;
                        for c in 0..n {
                            out.data[ro + c] += w * self.data[ri + c];
                        }
                    }
                }
            }
        }
        out
    }

    /// `self · (I ⊗ op ⊗ I)` with `op` square on factor `sub`.
    pub fn local_right(&self, op: &Self, dims: &[usize], sub: usize) -> Self {
        // M·X = (X†·M†)†
        self.adjoint().local_left(&op.adjoint(), dims, sub).adjoint()
    }

    /// `(I ⊗ op ⊗ I) self (I ⊗ op ⊗ I)†`.
    pub fn local_conjugate(&self, op: &Self, dims: &[usize], sub: usize) -> Self {
        self.local_left(op, dims, sub).local_right(&op.adjoint(), dims, sub)
    }
}

/// Permute the factors of a state vector: output factor `i` is input factor
/// `perm[i]`.
pub fn permute_vector(v: &[Complex64], dims: &[usize], perm: &[usize]) -> Vec<Complex64> {
    let map = permutation_map(dims, perm);
    map.iter().map(|&i| v[i]).collect()
}

// For each output flat index, the input flat index it reads from.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        map.push(digits.iter().zip(perm).map(|(&d, &p)| d * in_strides[p]).sum());
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < out_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

// Flat offsets of all multi-indices over `factors` (others fixed at 0), in
// lexicographic order of the listed factors.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &o in &out {
            for d in 0..dims[f] {
                next.push(o + d * strides[f]);
            }
        }
        out = next;
    }
    out
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

/// `kron` as a free function.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Free-function form of [`ComplexMatrix::partial_trace`].
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    m.partial_trace(dims, keep)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fl.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = u[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += a * u[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    /// Count of eigenvalues above [`EIG_CUTOFF`].
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > EIG_CUTOFF).count()
    }
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows, cols: m.cols });
    }
    let deviation = m.hermitian_deviation();
    if !(deviation <= HERMITIAN_TOL) {
        return Err(Error::NonHermitian { deviation });
    }
    Ok(jacobi(m.hermitian_part()))
}

/// Eigen-decomposition of a matrix already known to be Hermitian up to
/// rounding; the Hermitian part is used.
pub(crate) fn eigh(m: &ComplexMatrix) -> HermitianSpectrum {
    debug_assert!(m.is_square());
    jacobi(m.hermitian_part())
}

/// Eigenvalues only.
pub(crate) fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    eigh(m).eigenvalues
}

fn jacobi(mut a: ComplexMatrix) -> HermitianSpectrum {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let scale = a.norm_sqr().sqrt();
    if n > 1 && scale > 0.0 {
        for sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g == 0.0 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    if sweep > 3 && app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
                        a[(p, q)] = ZERO;
                        a[(q, p)] = ZERO;
                        continue;
                    }
                    let phase = apq / g;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane.
                    let ph_conj = phase.conj();
                    let gpp = Complex64::new(c, 0.0);
                    let gpq = Complex64::new(s, 0.0);
                    let gqp = ph_conj * (-s);
                    let gqq = ph_conj * c;
                    rotate_columns(&mut a, p, q, gpp, gpq, gqp, gqq);
                    rotate_rows(&mut a, p, q, gpp, gpq, gqp, gqq);
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                    rotate_columns(&mut v, p, q, gpp, gpq, gqp, gqq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(core::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianSpectrum { eigenvalues, eigenvectors }
}

// M ← M G on columns p, q.
#[inline]
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, gpp: Complex64, gpq: Complex64, gqp: Complex64, gqq: Complex64) {
    for r in 0..m.rows {
        let xp = m[(r, p)];
        let xq = m[(r, q)];
        m[(r, p)] = xp * gpp + xq * gqp;
        m[(r, q)] = xp * gpq + xq * gqq;
    }
}

// M ← G† M on rows p, q.
#[inline]
fn rotate_rows(m: &mut ComplexMatrix, p: usize, q: usize, gpp: Complex64, gpq: Complex64, gqp: Complex64, gqq: Complex64) {
    for c in 0..m.cols {
        let xp = m[(p, c)];
        let xq = m[(q, c)];
        m[(p, c)] = gpp.conj() * xp + gqp.conj() * xq;
        m[(q, c)] = gpq.conj() * xp + gqq.conj() * xq;
    }
}

/// `−λ log₂ λ` with the `0 log 0 = 0` convention below [`EIG_CUTOFF`].
#[inline]
pub fn eta(l: f64) -> f64 {
    if l > EIG_CUTOFF {
        -l * l.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| eta(x)).sum()
}

/// von Neumann entropy `−Tr(ρ log₂ ρ)` of a PSD matrix.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> f64 {
    if rho.rows == 1 {
        return eta(rho[(0, 0)].re);
    }
    eigvalsh(rho).into_iter().map(eta).sum()
}

/// `Tr(ρ²)`.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.norm_sqr()
}

/// Principal square root of a PSD matrix (eigenvalues below the cutoff
/// treated as zero).
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).map(|l| if l > EIG_CUTOFF { l.sqrt() } else { 0.0 })
}

/// `log₂` of a PSD matrix restricted to its support (zero on the kernel).
pub fn log2_on_support(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).map(|l| if l > EIG_CUTOFF { l.log2() } else { 0.0 })
}

/// Trace norm `Tr|X|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    eigvalsh(m).into_iter().map(f64::abs).sum()
}

/// `D(ρ‖σ) = −H(ρ) − Tr(ρ log₂ σ)` in bits; `+inf` when `ρ` has weight
/// above [`SUPPORT_TOL`] outside the support of `σ`.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let neg_h = -von_neumann_entropy(rho);
    let spec = eigh(sigma);
    let mut cross = 0.0;
    for (k, &mu) in spec.eigenvalues.iter().enumerate() {
        let v = spec.eigenvector(k);
        let w = rho.sandwich(&v, &v).re;
        if mu > EIG_CUTOFF {
            cross += w * mu.log2();
        } else if w > SUPPORT_TOL {
            return f64::INFINITY;
        }
    }
    neg_h - cross
}

/// `Tr[(ρ − σ)²]`.
pub fn hilbert_schmidt_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    (rho - sigma).norm_sqr()
}

/// `F(ρ, σ) = [Tr (√ρ σ √ρ)^{1/2}]²`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let s = root_fidelity_with_sqrt(&sqrt_psd(rho), sigma);
    s * s
}

/// `Tr (√ρ σ √ρ)^{1/2}` given `√ρ`.
pub fn root_fidelity_with_sqrt(sqrt_rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let m = sqrt_rho.matmul(sigma).matmul(sqrt_rho);
    eigvalsh(&m).into_iter().map(|l| if l > EIG_CUTOFF { l.sqrt() } else { 0.0 }).sum()
}

/// `½ Tr|ρ − σ|`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    0.5 * trace_norm_hermitian(&(rho - sigma))
}

/// Distinguishability measures between two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    RelativeEntropy,
    HilbertSchmidt,
    Fidelity,
    TraceDistance,
}

/// Validated divergence between two density operators of equal dimension.
pub fn divergence(kind: Divergence, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!("dimensions {} and {}", rho.dim(), sigma.dim())));
    }
    rho.check_state(1e-8)?;
    sigma.check_state(1e-8)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    Ok(match kind {
        Divergence::RelativeEntropy => relative_entropy(r, s),
        Divergence::HilbertSchmidt => hilbert_schmidt_distance(r, s),
        Divergence::Fidelity => fidelity(r, s),
        Divergence::TraceDistance => trace_distance(r, s),
    })
}

/// Orthonormalize the columns of `m` (modified Gram–Schmidt, applied twice).
/// Returns `Q` with `m = Q R`, `R` upper triangular with real positive
/// diagonal.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows, m.cols);
    let mut q: Vec<Vec<Complex64>> = (0..cols).map(|c| m.column(c)).collect();
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = q[i].iter().zip(&q[j]).map(|(a, b)| a.conj() * b).sum();
                let qi = q[i].clone();
                for (x, y) in q[j].iter_mut().zip(&qi) {
                    *x -= proj * y;
                }
            }
        }
        let norm = q[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in q[j].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(rows, cols, |r, c| q[c][r])
}

/// Vector 2-norm.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}
