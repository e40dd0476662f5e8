//! Density operators on tensor-factored spaces, purification, random states,
//! and CQ/CC classification.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Inherent float methods shadow this when std is linked (tests).
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::qmat::{self, ComplexMatrix, EIG_CUTOFF};
use crate::{Error, Result};

/// Tolerance for the Hermiticity, positivity and trace checks on load.
pub const STATE_TOL: f64 = 1e-10;

/// A state is treated as pure when its top eigenvalue is at least `1 - PURITY_TOL`.
pub const PURITY_TOL: f64 = 1e-9;

/// Positive unit-trace operator with a tensor-factor structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validated constructor (Hermitian, PSD and unit trace within 1e-10).
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::from_parts(matrix, dims)?;
        rho.check_state(STATE_TOL)?;
        Ok(rho)
    }

    /// Shape-checked constructor without the positivity check.
    pub fn from_parts(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || !matrix.is_square() || matrix.rows() != total {
            return Err(Error::DimMismatch(format!(
                "dims {dims:?} do not match a {}x{} matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    /// Single-factor state.
    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(matrix, vec![d])
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Self::new_unchecked(ComplexMatrix::identity(d).scale(1.0 / d as f64), dims.to_vec())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Checks Hermiticity, positivity (eigenvalues ≥ −tol) and unit trace.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let dev = self.matrix.hermitian_deviation();
        if !(dev <= tol) {
            return Err(Error::NotAState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = self.matrix.trace().re;
        if !((tr - 1.0).abs() <= tol) {
            return Err(Error::NotAState(format!("trace is {tr}, expected 1")));
        }
        let min = qmat::eigvalsh(&self.matrix).last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = self.matrix.partial_trace(&self.dims, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let dims = kept.iter().map(|&i| self.dims[i]).collect();
        Ok(Self::new_unchecked(m, dims))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new_unchecked(self.matrix.kron(&other.matrix), dims)
    }

    /// Same matrix, different factorization (product must match).
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::from_parts(self.matrix.clone(), dims)
    }

    /// Merge consecutive factors `range` into one.
    pub fn merge_factors(&self, range: core::ops::Range<usize>) -> Result<Self> {
        if range.end > self.dims.len() || range.start >= range.end {
            return Err(Error::DimMismatch(format!("cannot merge {range:?} of {:?}", self.dims)));
        }
        let mut dims = self.dims[..range.start].to_vec();
        dims.push(self.dims[range.clone()].iter().product());
        dims.extend_from_slice(&self.dims[range.end..]);
        Ok(Self::new_unchecked(self.matrix.clone(), dims))
    }

    /// Reorder factors: new factor `i` is old factor `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let m = self.matrix.permute_factors(&self.dims, perm)?;
        Ok(Self::new_unchecked(m, perm.iter().map(|&p| self.dims[p]).collect()))
    }

    /// `(U_k) ρ (U_k)†` for a unitary or isometry acting on factor `sub`.
    pub fn conjugate_on(&self, op: &ComplexMatrix, sub: usize) -> Result<Self> {
        if sub >= self.dims.len() || op.cols() != self.dims[sub] {
            return Err(Error::DimMismatch(format!("operator cannot act on factor {sub} of {:?}", self.dims)));
        }
        let before: usize = self.dims[..sub].iter().product();
        let after: usize = self.dims[sub + 1..].iter().product();
        let full = ComplexMatrix::identity(before).kron(op).kron(&ComplexMatrix::identity(after));
        let m = full.matmul(&self.matrix).matmul(&full.adjoint());
        let mut dims = self.dims.clone();
        dims[sub] = op.rows();
        Ok(Self::new_unchecked(m, dims))
    }

    pub fn purity(&self) -> f64 {
        qmat::purity(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        qmat::von_neumann_entropy(&self.matrix)
    }

    pub fn top_eigenvalue(&self) -> f64 {
        qmat::eigvalsh(&self.matrix)[0]
    }

    pub fn is_pure(&self) -> bool {
        self.top_eigenvalue() >= 1.0 - PURITY_TOL
    }

    /// Rejects states whose top eigenvalue is below `1 - 1e-9`.
    pub fn require_pure(&self) -> Result<()> {
        let top = self.top_eigenvalue();
        if top >= 1.0 - PURITY_TOL {
            Ok(())
        } else {
            Err(Error::NotPure { top_eigenvalue: top })
        }
    }
}

/// Unit vector on a tensor-factored space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if amplitudes.len() != total || total == 0 {
            return Err(Error::DimMismatch(format!("{} amplitudes for dims {dims:?}", amplitudes.len())));
        }
        let norm = qmat::vec_norm(&amplitudes);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotAState(format!("state vector norm {norm}")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes the vector first.
    pub fn normalized(mut amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let norm = qmat::vec_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(amplitudes, dims)
    }

    /// `|k⟩` in the computational basis of dimension `d`.
    pub fn basis(k: usize, d: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v, dims: vec![d] }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes: qmat::kron_vec(&self.amplitudes, &other.amplitudes), dims }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::new_unchecked(ComplexMatrix::projector(&self.amplitudes), self.dims.clone())
    }

    /// Apply an operator to factor `sub` (the factor dimension becomes the
    /// operator's row count).
    pub fn apply_on(&self, op: &ComplexMatrix, sub: usize) -> Result<Self> {
        if sub >= self.dims.len() || op.cols() != self.dims[sub] {
            return Err(Error::DimMismatch(format!("operator cannot act on factor {sub} of {:?}", self.dims)));
        }
        let before: usize = self.dims[..sub].iter().product();
        let after: usize = self.dims[sub + 1..].iter().product();
        let full = ComplexMatrix::identity(before).kron(op).kron(&ComplexMatrix::identity(after));
        let mut dims = self.dims.clone();
        dims[sub] = op.rows();
        Ok(Self { amplitudes: full.apply(&self.amplitudes), dims })
    }

    /// Global-phase-insensitive overlap `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &Self) -> f64 {
        qmat::inner(&self.amplitudes, &other.amplitudes).norm()
    }
}

/// `Σ_k √λ_k |v_k⟩|k⟩` over the support of `rho`; the purifier is appended
/// as a last factor of dimension `rank(rho)`.
pub fn purify(rho: &DensityOperator) -> PureState {
    let spec = qmat::eigh(rho.matrix());
    let rank = spec.rank().max(1);
    let d = rho.dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * rank];
    for k in 0..rank {
        let w = spec.eigenvalues[k].max(0.0).sqrt();
        for r in 0..d {
            amps[r * rank + k] = spec.eigenvectors[(r, k)] * w;
        }
    }
    let norm = qmat::vec_norm(&amps);
    for a in amps.iter_mut() {
        *a /= norm;
    }
    let mut dims = rho.dims().to_vec();
    dims.push(rank);
    PureState { amplitudes: amps, dims }
}

/// Random state ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    HaarPure,
    GinibreMixed,
}

fn gaussian(rng: &mut (impl Rng + ?Sized)) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Haar-distributed unit vector.
pub fn haar_vector(d: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = qmat::vec_norm(&v);
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

/// Haar-distributed unitary (Gram–Schmidt of a Ginibre matrix with the
/// positive-diagonal convention for `R`).
pub fn haar_unitary(d: usize, rng: &mut (impl Rng + ?Sized)) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian(rng));
    qmat::orthonormalize_columns(&g)
}

/// Haar-random isometry from dimension `d_in` into `d_out ≥ d_in`.
pub fn haar_isometry(d_in: usize, d_out: usize, rng: &mut (impl Rng + ?Sized)) -> ComplexMatrix {
    assert!(d_out >= d_in);
    let g = ComplexMatrix::from_fn(d_out, d_in, |_, _| gaussian(rng));
    qmat::orthonormalize_columns(&g)
}

/// Draw a random state. `haar_pure` ignores `rank` other than requiring it
/// to be 1 when given; `ginibre_mixed` defaults to full rank.
pub fn random_state(
    kind: RandomKind,
    dims: &[usize],
    rank: Option<usize>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<DensityOperator> {
    let d: usize = dims.iter().product();
    if dims.is_empty() || d == 0 {
        return Err(Error::DimMismatch(format!("invalid dims {dims:?}")));
    }
    match kind {
        RandomKind::HaarPure => {
            if let Some(r) = rank {
                if r != 1 {
                    return Err(Error::BadRank { rank: r, dim: d });
                }
            }
            let v = haar_vector(d, rng);
            Ok(DensityOperator::new_unchecked(ComplexMatrix::projector(&v), dims.to_vec()))
        }
        RandomKind::GinibreMixed => {
            let r = rank.unwrap_or(d);
            if r == 0 || r > d {
                return Err(Error::BadRank { rank: r, dim: d });
            }
            let g = ComplexMatrix::from_fn(d, r, |_, _| gaussian(rng));
            let m = g.matmul(&g.adjoint());
            let tr = m.trace().re;
            Ok(DensityOperator::new_unchecked(m.scale(1.0 / tr).hermitian_part(), dims.to_vec()))
        }
    }
}

/// Random pure state on `dims`, as a [`PureState`].
pub fn random_pure(dims: &[usize], rng: &mut (impl Rng + ?Sized)) -> PureState {
    let d = dims.iter().product();
    PureState { amplitudes: haar_vector(d, rng), dims: dims.to_vec() }
}

/// Classes of bipartite states decidable here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    /// Classical-classical.
    Cc,
    /// Classical-quantum (classical on the first factor).
    Cq,
    UnknownBeyondCq,
}

const COMMUTATOR_TOL: f64 = 1e-8;
const PINCH_FIXED_TOL: f64 = 1e-9;

/// Classify a bipartite state as CC, CQ, or neither.
pub fn classify(rho: &DensityOperator) -> Result<StateClass> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite(rho.dims().len()));
    }
    if classical_basis(rho, 0)?.is_none() {
        return Ok(StateClass::UnknownBeyondCq);
    }
    if classical_basis(rho, 1)?.is_some() {
        Ok(StateClass::Cc)
    } else {
        Ok(StateClass::Cq)
    }
}

/// A basis on factor `side` in which pinching leaves `rho` fixed, if any.
///
/// `rho` is classical on `side` iff the Hermitian operators
/// `O_M = Tr_other[(M ⊗ I or I ⊗ M) ρ]`, for `M` ranging over a Hermitian
/// operator basis of the other factor, commute pairwise; their common
/// eigenbasis is the classical basis. Degeneracies of the marginal are
/// resolved by diagonalizing a generic combination of the family.
pub fn classical_basis(rho: &DensityOperator, side: usize) -> Result<Option<ComplexMatrix>> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite(rho.dims().len()));
    }
    let other = 1 - side;
    let d_other = rho.dims()[other];
    let d_side = rho.dims()[side];
    let mut family = Vec::with_capacity(d_other * d_other);
    for m in hermitian_operator_basis(d_other) {
        let lifted = ComplexMatrix::embed(&m, rho.dims(), other)?;
        family.push(lifted.matmul(rho.matrix()).partial_trace(rho.dims(), &[side])?.hermitian_part());
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let comm = &family[i].matmul(&family[j]) - &family[j].matmul(&family[i]);
            if comm.norm_sqr().sqrt() > COMMUTATOR_TOL {
                return Ok(None);
            }
        }
    }
    // Fixed, incommensurate weights make accidental degeneracies of the
    // combination non-generic.
    let mut combo = ComplexMatrix::zeros(d_side, d_side);
    for (k, o) in family.iter().enumerate() {
        let w = ((k as f64 + 2.0).sqrt() * 1.618_033_988_749_895).fract() + 0.5;
        combo += &o.scale(w);
    }
    let basis = qmat::eigh(&combo).eigenvectors;
    let mut pinched = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for k in 0..d_side {
        let p = ComplexMatrix::projector(&basis.column(k));
        let lifted = ComplexMatrix::embed(&p, rho.dims(), side)?;
        pinched += &lifted.matmul(rho.matrix()).matmul(&lifted);
    }
    if pinched.max_abs_diff(rho.matrix()) <= PINCH_FIXED_TOL {
        Ok(Some(basis))
    } else {
        Ok(None)
    }
}

/// Hermitian basis of `d x d` matrices: `E_aa`, `E_ab + E_ba`, `i(E_ab − E_ba)`.
pub fn hermitian_operator_basis(d: usize) -> Vec<ComplexMatrix> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(a, a)] = one;
        out.push(m);
    }
    for a in 0..d {
        for b in a + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(a, b)] = one;
            m[(b, a)] = one;
            out.push(m);
            let mut m = ComplexMatrix::zeros(d, d);
            m[(a, b)] = i;
            m[(b, a)] = -i;
            out.push(m);
        }
    }
    out
}

/// Sanity helper: eigenvalues of `rho` that are below the cutoff count as zero.
pub fn rank(rho: &DensityOperator) -> usize {
    qmat::eigvalsh(rho.matrix()).into_iter().filter(|&l| l > EIG_CUTOFF).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> DensityOperator {
        let s = 0.5f64.sqrt();
        PureState::new(vec![c(s), c(0.0), c(0.0), c(s)], vec![2, 2]).unwrap().density()
    }

    fn marginal_residual(rho: &DensityOperator, psi: &PureState) -> f64 {
        let n = psi.dims().len();
        let keep: Vec<usize> = (0..n - 1).collect();
        psi.density().partial_trace(&keep).unwrap().matrix().max_abs_diff(rho.matrix())
    }

    #[test]
    fn purify_pure_state_has_trivial_purifier() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_pure(&[3], &mut rng);
        let p = purify(&psi.density());
        assert_eq!(p.dims(), &[3, 1]);
        assert!((p.overlap(&psi.tensor(&PureState::basis(0, 1))) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let rho = DensityOperator::maximally_mixed(&[2]);
        let p = purify(&rho);
        assert_eq!(p.dims(), &[2, 2]);
        assert!(marginal_residual(&rho, &p) < 1e-12);
        let reduced_other = p.density().partial_trace(&[1]).unwrap();
        assert!(reduced_other.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn purify_rank_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_state(RandomKind::GinibreMixed, &[4], Some(3), &mut rng).unwrap();
        let p = purify(&rho);
        assert_eq!(p.dims(), &[4, 3]);
        assert!(marginal_residual(&rho, &p) < 1e-9);
    }

    #[test]
    fn ginibre_rank_one_is_pure_and_seeded_draws_repeat() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(RandomKind::GinibreMixed, &[2], Some(1), &mut rng).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-10);
        }
        let a = random_state(RandomKind::HaarPure, &[4], None, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = random_state(RandomKind::HaarPure, &[4], None, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            random_state(RandomKind::GinibreMixed, &[2], Some(3), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::BadRank { .. })
        ));
    }

    #[test]
    fn ginibre_mean_purity_is_self_consistent() {
        // Two independent Monte Carlo runs of the mean purity must agree
        // within three combined standard errors.
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 10_000;
            let xs: Vec<f64> = (0..n)
                .map(|_| random_state(RandomKind::GinibreMixed, &[3], Some(3), &mut rng).unwrap().purity())
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (mean, (var / n as f64).sqrt())
        };
        let (m1, s1) = run(100);
        let (m2, s2) = run(200);
        assert!(m1 > 1.0 / 3.0 && m1 < 1.0);
        assert!((m1 - m2).abs() <= 3.0 * (s1 * s1 + s2 * s2).sqrt(), "{m1} vs {m2}");
    }

    #[test]
    fn classify_examples() {
        let s = 0.5f64.sqrt();
        let plus = ComplexMatrix::projector(&[c(s), c(s)]);
        let zero = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let cq = &p0.kron(&zero).scale(0.5) + &p1.kron(&plus).scale(0.5);
        let cq = DensityOperator::new(cq, vec![2, 2]).unwrap();
        assert_eq!(classify(&cq).unwrap(), StateClass::Cq);

        let cc = DensityOperator::maximally_mixed(&[2, 2]);
        assert_eq!(classify(&cc).unwrap(), StateClass::Cc);

        assert_eq!(classify(&bell()).unwrap(), StateClass::UnknownBeyondCq);
        assert!(matches!(classify(&DensityOperator::maximally_mixed(&[2])), Err(Error::NotBipartite(1))));
    }

    #[test]
    fn classify_degenerate_marginal_in_rotated_basis() {
        // ρ_A = I/2 is fully degenerate; the classical basis is hidden in
        // the conditional structure only.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = haar_unitary(2, &mut rng);
        let b0 = random_state(RandomKind::GinibreMixed, &[3], None, &mut rng).unwrap();
        let b1 = random_state(RandomKind::GinibreMixed, &[3], None, &mut rng).unwrap();
        let v0 = ComplexMatrix::projector(&u.column(0));
        let v1 = ComplexMatrix::projector(&u.column(1));
        let m = &v0.kron(b0.matrix()).scale(0.5) + &v1.kron(b1.matrix()).scale(0.5);
        let rho = DensityOperator::new(m, vec![2, 3]).unwrap();
        assert_eq!(classify(&rho).unwrap(), StateClass::Cq);
    }
}
