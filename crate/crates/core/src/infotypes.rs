//! Types of information: orthogonal projector decompositions of the identity
//! on one subsystem, with pinching, measurement isometries, coarse-graining
//! and bases mutually unbiased to a given basis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qmat::{self, ComplexMatrix};
use crate::states::{haar_unitary, DensityOperator};
use crate::{Error, Result};

/// Tolerance for idempotence, orthogonality and completeness.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Tolerance of the unbiasedness check `|⟨Z_j|W_k⟩|² = 1/d`.
pub const MU_TOL: f64 = 1e-9;

/// Ordered orthogonal projectors `{Z_j}` summing to the identity on factor
/// `subsystem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInfoType", into = "RawInfoType")]
pub struct InfoType {
    subsystem: usize,
    projectors: Vec<ComplexMatrix>,
    // Columns are the basis vectors when every projector has rank one.
    basis: Option<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawInfoType {
    subsystem: usize,
    projectors: Vec<ComplexMatrix>,
}

impl TryFrom<RawInfoType> for InfoType {
    type Error = Error;
    fn try_from(raw: RawInfoType) -> Result<Self> {
        InfoType::from_projectors(raw.projectors, raw.subsystem)
    }
}

impl From<InfoType> for RawInfoType {
    fn from(z: InfoType) -> Self {
        RawInfoType { subsystem: z.subsystem, projectors: z.projectors }
    }
}

impl InfoType {
    /// Computational basis of dimension `d`.
    pub fn standard(d: usize, subsystem: usize) -> Self {
        Self::from_unitary_unchecked(ComplexMatrix::identity(d), subsystem)
    }

    /// Rank-one type from the columns of a unitary (checked to 1e-10).
    pub fn from_basis(u: &ComplexMatrix, subsystem: usize) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::BadInfoType(format!("basis matrix is {}x{}", u.rows(), u.cols())));
        }
        let dev = u.adjoint().matmul(u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
        if dev > PROJECTOR_TOL {
            return Err(Error::BadInfoType(format!("basis vectors not orthonormal (deviation {dev:.3e})")));
        }
        Ok(Self::from_unitary_unchecked(u.clone(), subsystem))
    }

    pub(crate) fn from_unitary_unchecked(u: ComplexMatrix, subsystem: usize) -> Self {
        let projectors = (0..u.cols()).map(|k| ComplexMatrix::projector(&u.column(k))).collect();
        Self { subsystem, projectors, basis: Some(u) }
    }

    /// Validated constructor from explicit projectors.
    pub fn from_projectors(projectors: Vec<ComplexMatrix>, subsystem: usize) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::BadInfoType("no projectors".into()));
        };
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (j, p) in projectors.iter().enumerate() {
            if !p.is_square() || p.rows() != d {
                return Err(Error::BadInfoType(format!("projector {j} has shape {}x{}", p.rows(), p.cols())));
            }
            let herm = p.hermitian_deviation();
            if herm > PROJECTOR_TOL {
                return Err(Error::BadInfoType(format!("projector {j} not Hermitian ({herm:.3e})")));
            }
            let idem = p.matmul(p).max_abs_diff(p);
            if idem > PROJECTOR_TOL {
                return Err(Error::BadInfoType(format!("projector {j} not idempotent ({idem:.3e})")));
            }
            for (k, q) in projectors.iter().enumerate().skip(j + 1) {
                let overlap = p.matmul(q).max_abs();
                if overlap > PROJECTOR_TOL {
                    return Err(Error::BadInfoType(format!("projectors {j} and {k} not orthogonal ({overlap:.3e})")));
                }
            }
            sum += p;
        }
        let comp = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if comp > PROJECTOR_TOL {
            return Err(Error::BadInfoType(format!("projectors do not sum to the identity ({comp:.3e})")));
        }
        let basis = if projectors.len() == d {
            let cols: Vec<Vec<Complex64>> = projectors.iter().map(|p| qmat::eigh(p).eigenvector(0)).collect();
            Some(ComplexMatrix::from_columns(&cols))
        } else {
            None
        };
        Ok(Self { subsystem, projectors, basis })
    }

    /// Haar-random orthonormal basis.
    pub fn random_basis(d: usize, subsystem: usize, rng: &mut (impl Rng + ?Sized)) -> Self {
        Self::from_unitary_unchecked(haar_unitary(d, rng), subsystem)
    }

    pub fn subsystem(&self) -> usize {
        self.subsystem
    }

    /// Same projectors, acting on another factor.
    pub fn on_subsystem(mut self, subsystem: usize) -> Self {
        self.subsystem = subsystem;
        self
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// Number of outcomes `N`.
    pub fn n(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn is_rank_one(&self) -> bool {
        self.basis.is_some()
    }

    /// Unitary whose columns are the basis vectors (rank-one types only).
    pub fn basis(&self) -> Option<&ComplexMatrix> {
        self.basis.as_ref()
    }

    pub fn basis_vector(&self, k: usize) -> Option<Vec<Complex64>> {
        self.basis.as_ref().map(|u| u.column(k))
    }

    /// `{U Z_j U†}`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Self {
        let projectors = self.projectors.iter().map(|p| u.matmul(p).matmul(&u.adjoint())).collect();
        let basis = self.basis.as_ref().map(|b| u.matmul(b));
        Self { subsystem: self.subsystem, projectors, basis }
    }

    /// Tensor product type `{Z_j ⊗ Z'_k}` on the merged factor, ordered
    /// lexicographically in `(j, k)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut projectors = Vec::with_capacity(self.n() * other.n());
        for p in &self.projectors {
            for q in &other.projectors {
                projectors.push(p.kron(q));
            }
        }
        let basis = match (&self.basis, &other.basis) {
            (Some(a), Some(b)) => Some(a.kron(b)),
            _ => None,
        };
        Self { subsystem: self.subsystem, projectors, basis }
    }

    pub(crate) fn check_on(&self, dims: &[usize]) -> Result<()> {
        if self.subsystem >= dims.len() || dims[self.subsystem] != self.dim() {
            return Err(Error::DimMismatch(format!(
                "information type of dimension {} on factor {} does not fit dims {dims:?}",
                self.dim(),
                self.subsystem
            )));
        }
        Ok(())
    }
}

/// `Σ_j (Z_j ⊗ I) ρ (Z_j ⊗ I)`.
pub fn pinch(rho: &DensityOperator, z: &InfoType) -> Result<DensityOperator> {
    z.check_on(rho.dims())?;
    let m = pinch_matrix(rho.matrix(), rho.dims(), z);
    Ok(DensityOperator::new_unchecked(m, rho.dims().to_vec()))
}

pub(crate) fn pinch_matrix(m: &ComplexMatrix, dims: &[usize], z: &InfoType) -> ComplexMatrix {
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    if let Some(u) = z.basis() {
        // Rotate into the basis, keep the diagonal blocks, rotate back.
        let ud = u.adjoint();
        let rotated = m.local_conjugate(&ud, dims, z.subsystem);
        let ds = dims[z.subsystem];
        let after: usize = dims[z.subsystem + 1..].iter().product();
        let block = |i: usize| (i / after) % ds;
        let kept = ComplexMatrix::from_fn(n, n, |r, c| if block(r) == block(c) { rotated[(r, c)] } else { Complex64::new(0.0, 0.0) });
        return kept.local_conjugate(u, dims, z.subsystem);
    }
    for p in z.projectors() {
        out += &m.local_conjugate(p, dims, z.subsystem);
    }
    out
}

/// `V_Z = Σ_j |j⟩ ⊗ Z_j`, shape `(N·d) × d`, register index first.
pub fn measurement_isometry(z: &InfoType) -> ComplexMatrix {
    let d = z.dim();
    let mut v = ComplexMatrix::zeros(z.n() * d, d);
    for (j, p) in z.projectors().iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                v[(j * d + a, b)] = p[(a, b)];
            }
        }
    }
    v
}

/// Sum projectors over the groups of a partition of `0..N`. Groups are
/// ordered by their lowest index.
pub fn coarse_grain(z: &InfoType, grouping: &[Vec<usize>]) -> Result<InfoType> {
    let n = z.n();
    let mut seen = vec![false; n];
    for g in grouping {
        if g.is_empty() {
            return Err(Error::BadPartition("empty group".into()));
        }
        for &i in g {
            if i >= n {
                return Err(Error::BadPartition(format!("index {i} out of range for {n} outcomes")));
            }
            if seen[i] {
                return Err(Error::BadPartition(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::BadPartition(format!("index {i} missing")));
    }
    let mut groups: Vec<&Vec<usize>> = grouping.iter().collect();
    groups.sort_by_key(|g| *g.iter().min().unwrap());
    let d = z.dim();
    let projectors: Vec<ComplexMatrix> = groups
        .iter()
        .map(|g| {
            let mut p = ComplexMatrix::zeros(d, d);
            for &i in g.iter() {
                p += &z.projectors()[i];
            }
            p
        })
        .collect();
    let basis = if groups.len() == n {
        z.basis().map(|u| {
            let cols: Vec<Vec<Complex64>> = groups.iter().map(|g| u.column(g[0])).collect();
            ComplexMatrix::from_columns(&cols)
        })
    } else {
        None
    };
    Ok(InfoType { subsystem: z.subsystem, projectors, basis })
}

/// `|W_k⟩ = d^{-1/2} Σ_j e^{2πijk/d} |Z_j⟩`.
pub fn fourier_mu_basis(z: &InfoType) -> Result<InfoType> {
    let u = z.basis().ok_or_else(|| Error::NotRankOne(z.n()))?;
    let d = z.dim();
    let f = fourier_matrix(d);
    Ok(InfoType::from_unitary_unchecked(u.matmul(&f), z.subsystem))
}

/// Unitary DFT matrix `F[j,k] = d^{-1/2} e^{2πijk/d}`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let s = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| Complex64::from_polar(s, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
}

/// `max_{j,k} | |⟨Z_j|W_k⟩|² − 1/d |` for two rank-one types.
pub fn unbiasedness_residual(z: &InfoType, w: &InfoType) -> Result<f64> {
    let (Some(a), Some(b)) = (z.basis(), w.basis()) else {
        return Err(Error::NotRankOne(if z.is_rank_one() { w.n() } else { z.n() }));
    };
    let overlaps = a.adjoint().matmul(b);
    let target = 1.0 / z.dim() as f64;
    Ok(overlaps.data().iter().map(|x| (x.norm_sqr() - target).abs()).fold(0.0, f64::max))
}

/// A member of the equivalence class of bases unbiased to `reference`:
/// the base basis acted on by `U = Σ_j e^{iθ_j} |Z_{π(j)}⟩⟨Z_j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MUBasisSample {
    pub reference: InfoType,
    pub base_basis: InfoType,
    pub phases: Vec<f64>,
    pub permutation: Option<Vec<usize>>,
}

impl MUBasisSample {
    /// Fixed phases on the Fourier base point (test hook).
    pub fn with_phases(z: &InfoType, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != z.dim() {
            return Err(Error::DimMismatch(format!("{} phases for dimension {}", phases.len(), z.dim())));
        }
        Ok(Self { reference: z.clone(), base_basis: fourier_mu_basis(z)?, phases, permutation: None })
    }

    /// The diagonal-in-`Z` unitary (times the optional permutation).
    pub fn unitary(&self) -> ComplexMatrix {
        let u = self.reference.basis().expect("reference basis is rank one");
        let d = u.rows();
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let target = self.permutation.as_ref().map_or(j, |p| p[j]);
            diag[(target, j)] = Complex64::from_polar(1.0, self.phases[j]);
        }
        u.matmul(&diag).matmul(&u.adjoint())
    }

    pub fn basis(&self) -> InfoType {
        self.base_basis.rotated(&self.unitary())
    }
}

/// Phases uniform on `[0, 2π)`, optionally with a uniform permutation of the
/// `Z` labels.
pub fn sample_equivalence_class(
    z: &InfoType,
    base: Option<&InfoType>,
    with_permutation: bool,
    rng: &mut (impl Rng + ?Sized),
) -> Result<MUBasisSample> {
    let d = z.dim();
    let base_basis = match base {
        Some(b) => b.clone(),
        None => fourier_mu_basis(z)?,
    };
    if !z.is_rank_one() {
        return Err(Error::NotRankOne(z.n()));
    }
    let phases = (0..d).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let permutation = with_permutation.then(|| {
        let mut p: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = rng.random_range(0..=i);
            p.swap(i, j);
        }
        p
    });
    Ok(MUBasisSample { reference: z.clone(), base_basis, phases, permutation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_state, RandomKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> Vec<Complex64> {
        let s = 0.5f64.sqrt();
        vec![c(s, 0.0), c(s, 0.0)]
    }

    fn coarse_qutrit() -> InfoType {
        coarse_grain(&InfoType::standard(3, 0), &[vec![0, 1], vec![2]]).unwrap()
    }

    #[test]
    fn pinch_examples() {
        let rho = DensityOperator::single(ComplexMatrix::projector(&plus())).unwrap();
        let p = pinch(&rho, &InfoType::standard(2, 0)).unwrap();
        assert!(p.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);

        let diag = DensityOperator::single(ComplexMatrix::from_real_diag(&[0.3, 0.7])).unwrap();
        assert_eq!(pinch(&diag, &InfoType::standard(2, 0)).unwrap().matrix(), diag.matrix());
    }

    #[test]
    fn coarse_pinch_zeros_exact_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(RandomKind::GinibreMixed, &[3], None, &mut rng).unwrap();
        let p = pinch(&rho, &coarse_qutrit()).unwrap();
        for r in 0..3 {
            for cc in 0..3 {
                let expected = if (r < 2) == (cc < 2) { rho.matrix()[(r, cc)] } else { c(0.0, 0.0) };
                assert!((p.matrix()[(r, cc)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rank_one_fast_path_matches_projector_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_state(RandomKind::GinibreMixed, &[2, 3, 2], None, &mut rng).unwrap();
        let z = InfoType::random_basis(3, 1, &mut rng);
        let fast = pinch(&rho, &z).unwrap();
        let mut slow = ComplexMatrix::zeros(12, 12);
        for p in z.projectors() {
            let e = ComplexMatrix::embed(p, rho.dims(), 1).unwrap();
            slow += &e.matmul(rho.matrix()).matmul(&e);
        }
        assert!(fast.matrix().max_abs_diff(&slow) < 1e-13);
    }

    #[test]
    fn measurement_isometry_examples() {
        let v = measurement_isometry(&InfoType::standard(2, 0));
        assert_eq!((v.rows(), v.cols()), (4, 2));
        let zero = v.apply(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let one = v.apply(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(zero, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(one, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);

        let trivial = InfoType::from_projectors(vec![ComplexMatrix::identity(3)], 0).unwrap();
        assert_eq!(measurement_isometry(&trivial), ComplexMatrix::identity(3));

        let v = measurement_isometry(&coarse_qutrit());
        assert_eq!((v.rows(), v.cols()), (6, 3));
        assert!(v.adjoint().matmul(&v).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn isometry_then_trace_register_is_pinching() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_state(RandomKind::GinibreMixed, &[3], None, &mut rng).unwrap();
        for z in [coarse_qutrit(), InfoType::random_basis(3, 0, &mut rng)] {
            let v = measurement_isometry(&z);
            let lifted = v.matmul(rho.matrix()).matmul(&v.adjoint());
            let reduced = lifted.partial_trace(&[z.n(), 3], &[1]).unwrap();
            assert!(reduced.max_abs_diff(pinch(&rho, &z).unwrap().matrix()) < 1e-13);
        }
    }

    #[test]
    fn coarse_grain_examples_and_errors() {
        let z = InfoType::standard(3, 0);
        let all = coarse_grain(&z, &[vec![2, 0, 1]]).unwrap();
        assert_eq!(all.n(), 1);
        assert!(all.projectors()[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let same = coarse_grain(&z, &[vec![2], vec![0], vec![1]]).unwrap();
        assert_eq!(same, z);
        let q = coarse_grain(&z, &[vec![2], vec![1, 0]]).unwrap();
        assert_eq!(q, coarse_qutrit());
        assert!(matches!(coarse_grain(&z, &[vec![0, 1]]), Err(Error::BadPartition(_))));
        assert!(matches!(coarse_grain(&z, &[vec![0, 1], vec![1, 2]]), Err(Error::BadPartition(_))));
        assert!(matches!(coarse_grain(&z, &[vec![0, 1, 2, 3]]), Err(Error::BadPartition(_))));
    }

    #[test]
    fn from_projectors_validates() {
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let half = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        assert!(InfoType::from_projectors(vec![p0.clone()], 0).is_err());
        assert!(InfoType::from_projectors(vec![half.clone(), half], 0).is_err());
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let z = InfoType::from_projectors(vec![p1, p0], 0).unwrap();
        assert!(z.is_rank_one());
    }

    #[test]
    fn fourier_examples() {
        let w = fourier_mu_basis(&InfoType::standard(2, 0)).unwrap();
        let s = 0.5f64.sqrt();
        assert!(w.projectors()[0].max_abs_diff(&ComplexMatrix::projector(&plus())) < 1e-15);
        assert!(w.projectors()[1].max_abs_diff(&ComplexMatrix::projector(&[c(s, 0.0), c(-s, 0.0)])) < 1e-15);

        let z3 = InfoType::standard(3, 0);
        assert!(unbiasedness_residual(&z3, &fourier_mu_basis(&z3).unwrap()).unwrap() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = haar_unitary(3, &mut rng);
        let zr = z3.rotated(&u);
        let wr = fourier_mu_basis(&zr).unwrap();
        let expected = fourier_mu_basis(&z3).unwrap().rotated(&u);
        for (a, b) in wr.projectors().iter().zip(expected.projectors()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
        assert!(unbiasedness_residual(&zr, &wr).unwrap() < 1e-10);
        assert!(matches!(fourier_mu_basis(&coarse_qutrit()), Err(Error::NotRankOne(2))));
    }

    #[test]
    fn equivalence_class_samples() {
        let z2 = InfoType::standard(2, 0);
        let id = MUBasisSample::with_phases(&z2, vec![0.0, 0.0]).unwrap();
        assert_eq!(id.basis().projectors(), id.base_basis.projectors());

        let flipped = MUBasisSample::with_phases(&z2, vec![0.0, PI]).unwrap().basis();
        let base = fourier_mu_basis(&z2).unwrap();
        assert!(flipped.projectors()[0].max_abs_diff(&base.projectors()[1]) < 1e-15);
        assert!(flipped.projectors()[1].max_abs_diff(&base.projectors()[0]) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z3 = InfoType::random_basis(3, 0, &mut rng);
        for i in 0..1000 {
            let s = sample_equivalence_class(&z3, None, i % 2 == 0, &mut rng).unwrap();
            assert!(unbiasedness_residual(&z3, &s.basis()).unwrap() < 1e-9);
        }
        let a = sample_equivalence_class(&z3, None, false, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = sample_equivalence_class(&z3, None, false, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn local_products_match_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dims = [2, 3, 2];
        let m = random_state(RandomKind::GinibreMixed, &dims, None, &mut rng).unwrap().into_matrix();
        let op = haar_unitary(3, &mut rng);
        let e = ComplexMatrix::embed(&op, &dims, 1).unwrap();
        assert!(m.local_left(&op, &dims, 1).max_abs_diff(&e.matmul(&m)) < 1e-14);
        assert!(m.local_right(&op, &dims, 1).max_abs_diff(&m.matmul(&e)) < 1e-14);
    }
}
