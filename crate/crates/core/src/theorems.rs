//! Executable checks of the identities linking off-diagonal distance,
//! information in the purifier, entanglement created by measurement and
//! complementary information.
//!
//! Inputs are pure states on `A ⊗ (B factors) ⊗ C`: the information type
//! fixes `A`, the last factor is `C` and every remaining factor belongs to `B`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropies::{self, cq_decompose, p_guess};
use crate::fidelity::{max_fidelity, FidelityOptions, LiftedPinching, Pinching};
use crate::infotypes::{fourier_mu_basis, measurement_isometry, pinch, sample_equivalence_class, InfoType};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{purify, DensityOperator};
use crate::{Error, Result};

pub const THM1_VN_TOL: f64 = 1e-8;
pub const THM1_QUAD_TOL: f64 = 1e-9;
pub const FIDELITY_TOL: f64 = 1e-5;
pub const LEMMA_TOL: f64 = 1e-9;
pub const INEQUALITY_SLACK: f64 = 1e-8;
pub const CLASSICALITY_THRESHOLD: f64 = 1e-6;

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl VerificationReport {
    /// `lhs = rhs` within `tolerance`.
    pub fn equality(claim: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::from_gap(claim, lhs, rhs, (lhs - rhs).abs(), tolerance)
    }

    /// `lhs ≥ rhs − slack`; the gap is the violation.
    pub fn at_least(claim: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self::from_gap(claim, lhs, rhs, (rhs - lhs).max(0.0), slack)
    }

    pub fn from_gap(claim: &str, lhs: f64, rhs: f64, abs_gap: f64, tolerance: f64) -> Self {
        Self {
            claim: claim.to_string(),
            lhs,
            rhs,
            abs_gap,
            tolerance,
            passed: abs_gap <= tolerance,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    /// Widen the gap to cover an additional comparison.
    fn also(mut self, key: &str, other: f64) -> Self {
        let gap = (self.lhs - other).abs();
        self.diagnostics.insert(key.to_string(), other);
        self.abs_gap = self.abs_gap.max(gap);
        self.passed = self.abs_gap <= self.tolerance;
        self
    }
}

// Factor roles of a tripartite input.
struct Roles {
    a: usize,
    b: Vec<usize>,
    c: usize,
    ab: Vec<usize>,
}

fn roles(rho: &DensityOperator, z: &InfoType) -> Result<Roles> {
    let n = rho.dims().len();
    if n < 2 {
        return Err(Error::NotBipartite(n));
    }
    z.check_on(rho.dims())?;
    let c = n - 1;
    let a = z.subsystem();
    if a == c {
        return Err(Error::InvalidArgument("the information type must not act on the purifying factor".into()));
    }
    let ab: Vec<usize> = (0..c).collect();
    let b = ab.iter().copied().filter(|&i| i != a).collect();
    Ok(Roles { a, b, c, ab })
}

fn pure_roles(rho: &DensityOperator, z: &InfoType) -> Result<Roles> {
    let r = roles(rho, z)?;
    rho.require_pure()?;
    Ok(r)
}

/// `X ↦ Tr_A[(X ⊗ I) ρ_{AR}]` with `R` the merged remaining factors.
#[derive(Debug, Clone)]
pub struct TransferMap {
    m: ComplexMatrix,
    da: usize,
    dr: usize,
}

impl TransferMap {
    /// `rho` on several factors; `a` is the factor the inputs act on.
    pub fn new(rho: &DensityOperator, a: usize) -> Result<Self> {
        let n = rho.dims().len();
        if a >= n {
            return Err(Error::DimMismatch(alloc::format!("factor {a} of {:?}", rho.dims())));
        }
        let mut perm = vec![a];
        perm.extend((0..n).filter(|&i| i != a));
        let m = rho.matrix().permute_factors(rho.dims(), &perm)?;
        let da = rho.dims()[a];
        Ok(Self { dr: rho.dim() / da, da, m })
    }

    pub fn input_dim(&self) -> usize {
        self.da
    }

    /// `T(|x⟩⟨y|) = (⟨y| ⊗ I) ρ (|x⟩ ⊗ I)`.
    pub fn apply_outer(&self, x: &[Complex64], y: &[Complex64]) -> ComplexMatrix {
        let (da, dr) = (self.da, self.dr);
        let mut out = ComplexMatrix::zeros(dr, dr);
        for a in 0..da {
            let ya = y[a].conj();
            if ya == Complex64::new(0.0, 0.0) {
                continue;
            }
            for a2 in 0..da {
                let w = ya * x[a2];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r in 0..dr {
                    for c in 0..dr {
                        out[(r, c)] += w * self.m[(a * dr + r, a2 * dr + c)];
                    }
                }
            }
        }
        out
    }

    pub fn apply_projector(&self, v: &[Complex64]) -> ComplexMatrix {
        self.apply_outer(v, v)
    }
}

/// `C_Q(W|B) = d_A Σ_k Tr[T_B(|w_k⟩⟨w_k|)²] − Tr(ρ_B²)` for the columns of `w`.
pub fn quad_certainty_from_basis(t_b: &TransferMap, w: &ComplexMatrix, purity_b: f64) -> f64 {
    let da = t_b.input_dim();
    let sum: f64 = (0..w.cols()).map(|k| t_b.apply_projector(&w.column(k)).norm_sqr()).sum();
    da as f64 * sum - purity_b
}

/// Mean and standard error of a sample.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sampled `C_Q(W|B)` over members of the equivalence class of `base`
/// (Fourier partner of `z` when `None`). `rho_ab` carries `z` on factor `a`.
pub fn sample_quad_certainties(
    rho_ab: &DensityOperator,
    z: &InfoType,
    base: Option<&InfoType>,
    samples: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<f64>> {
    let t_b = TransferMap::new(rho_ab, z.subsystem())?;
    let base_basis = match base {
        Some(b) => b.basis().ok_or(Error::NotRankOne(b.n()))?.clone(),
        None => fourier_mu_basis(z)?.basis().expect("rank one").clone(),
    };
    let purity_b = purity_of_rest(&t_b, z);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s = sample_equivalence_class(z, base, false, rng)?;
        let w = s.unitary().matmul(&base_basis);
        out.push(quad_certainty_from_basis(&t_b, &w, purity_b));
    }
    Ok(out)
}

// Tr(ρ_R²) with ρ_R = Σ_j T(|j⟩⟨j|).
fn purity_of_rest(t: &TransferMap, z: &InfoType) -> f64 {
    let mut rho_r = ComplexMatrix::zeros(t.dr, t.dr);
    for p in z.projectors() {
        let spec = qmat::eigh(p);
        for k in 0..spec.rank() {
            rho_r += &t.apply_projector(&spec.eigenvector(k));
        }
    }
    rho_r.norm_sqr()
}

fn lift_measurement(rho_ab: &DensityOperator, z: &InfoType) -> Result<DensityOperator> {
    let a = z.subsystem();
    let lifted = rho_ab.conjugate_on(&measurement_isometry(z), a)?;
    let mut dims = rho_ab.dims()[..a].to_vec();
    dims.push(z.n());
    dims.extend_from_slice(&rho_ab.dims()[a..]);
    lifted.with_dims(dims)
}

/// Register-first isometry `I ⊗ V_Z ⊗ I` on the `AB` space.
fn lifted_state(rho_ab: &DensityOperator, z: &InfoType) -> Result<(DensityOperator, usize)> {
    Ok((lift_measurement(rho_ab, z)?, z.subsystem()))
}

/// Reports for the three identities between conditional entropies of `Z`
/// given `C` and distances of `ρ_AB` to pinched states.
pub fn verify_thm1(
    rho: &DensityOperator,
    z: &InfoType,
    fid: &FidelityOptions,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<VerificationReport>> {
    let r = pure_roles(rho, z)?;
    let decomp = cq_decompose(rho, z, &[r.c])?;
    let rho_ab = rho.partial_trace(&r.ab)?;
    let pinched = pinch(&rho_ab, z)?;

    let h = entropies::cond_entropy_vn(&decomp);
    let d = qmat::relative_entropy(rho_ab.matrix(), pinched.matrix());
    let vn = VerificationReport::equality("thm1.relative_entropy", h, d, THM1_VN_TOL);

    let hq = entropies::cond_entropy_quad(&decomp, &decomp.rho_c())?;
    let dhs = qmat::hilbert_schmidt_distance(rho_ab.matrix(), pinched.matrix());
    let quad = VerificationReport::equality("thm1.hilbert_schmidt", hq, dhs, THM1_QUAD_TOL)
        .also("off_diagonal_sum", off_diagonal_sum(&rho_ab, z));

    let guess = p_guess(&decomp);
    let map = Pinching::new(rho_ab.dims(), z)?;
    let f = max_fidelity(rho_ab.matrix(), &map, fid, rng)?;
    let fidelity = VerificationReport::equality("thm1.fidelity", guess.p_guess, f.fidelity, FIDELITY_TOL)
        .with("p_guess_dual_gap", guess.residual)
        .with("p_guess_converged", guess.converged as u8 as f64)
        .with("fidelity_iterations", f.iterations as f64)
        .with("fidelity_converged", f.converged as u8 as f64);
    Ok(vec![vn, quad, fidelity])
}

/// `Σ_{j≠k} ‖Z_j ρ Z_k‖²`.
pub fn off_diagonal_sum(rho: &DensityOperator, z: &InfoType) -> f64 {
    let sides: Vec<ComplexMatrix> = z.projectors().iter().map(|p| rho.matrix().local_left(p, rho.dims(), z.subsystem())).collect();
    let mut acc = 0.0;
    for (j, pj) in z.projectors().iter().enumerate() {
        for (k, x) in sides.iter().enumerate() {
            if j != k {
                acc += x.local_right(pj, rho.dims(), z.subsystem()).norm_sqr();
            }
        }
    }
    acc
}

/// Entanglement created between a measurement register and `AB`.
pub fn verify_thm2(
    rho: &DensityOperator,
    z: &InfoType,
    fid: &FidelityOptions,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<VerificationReport>> {
    let r = pure_roles(rho, z)?;
    let decomp = cq_decompose(rho, z, &[r.c])?;
    let h = entropies::cond_entropy_vn(&decomp);
    let rho_ab = rho.partial_trace(&r.ab)?;
    let (tilde, reg) = lifted_state(&rho_ab, z)?;

    let rest: Vec<usize> = (0..tilde.dims().len()).filter(|&i| i != reg).collect();
    let tilde_ab = tilde.partial_trace(&rest)?;
    let coherent_info = tilde_ab.entropy() - tilde.entropy();
    let sep = lift_measurement(&pinch(&rho_ab, z)?, z)?;
    let bound = qmat::relative_entropy(tilde.matrix(), sep.matrix());
    let vn = VerificationReport::equality("thm2.distillable", h, coherent_info, THM1_VN_TOL).also("separable_bound", bound);

    let guess = p_guess(&decomp);
    let map = LiftedPinching::new(rho_ab.dims(), z)?;
    let f = max_fidelity(tilde.matrix(), &map, fid, rng)?;
    let geo = VerificationReport::equality("thm2.geometric", 1.0 - guess.p_guess, 1.0 - f.fidelity, FIDELITY_TOL)
        .with("p_guess_dual_gap", guess.residual)
        .with("p_guess_converged", guess.converged as u8 as f64)
        .with("fidelity_converged", f.converged as u8 as f64);
    Ok(vec![vn, geo])
}

/// `−H(M_Z|AB)` of the post-measurement state of `ρ_AB`.
pub fn measurement_coherent_information(rho_ab: &DensityOperator, z: &InfoType) -> Result<f64> {
    let (tilde, reg) = lifted_state(rho_ab, z)?;
    let rest: Vec<usize> = (0..tilde.dims().len()).filter(|&i| i != reg).collect();
    Ok(tilde.partial_trace(&rest)?.entropy() - tilde.entropy())
}

/// `E_G = 1 − max_σ F(ρ̃_{M_Z AB}, V_Z E_Z(σ) V_Z†)`.
pub fn measurement_geometric_entanglement(
    rho_ab: &DensityOperator,
    z: &InfoType,
    fid: &FidelityOptions,
    rng: &mut (impl Rng + ?Sized),
) -> Result<f64> {
    let (tilde, _) = lifted_state(rho_ab, z)?;
    let map = LiftedPinching::new(rho_ab.dims(), z)?;
    Ok(1.0 - max_fidelity(tilde.matrix(), &map, fid, rng)?.fidelity)
}

/// Both sides of `Tr[T_B(|j⟩⟨k|) T_B(|l⟩⟨m|)] = Tr[T_C(|j⟩⟨m|) T_C(|l⟩⟨k|)]`.
pub fn transfer_pair_sides(
    rho: &DensityOperator,
    z: &InfoType,
    kets: [&[Complex64]; 4],
) -> Result<(Complex64, Complex64)> {
    let r = pure_roles(rho, z)?;
    let t_b = TransferMap::new(&rho.partial_trace(&r.ab)?, r.a)?;
    let mut ac = vec![r.a, r.c];
    ac.sort_unstable();
    let t_c = TransferMap::new(&rho.partial_trace(&ac)?, if r.a < r.c { 0 } else { 1 })?;
    let [j, k, l, m] = kets;
    let lhs = t_b.apply_outer(j, k).trace_of_product(&t_b.apply_outer(l, m));
    let rhs = t_c.apply_outer(j, m).trace_of_product(&t_c.apply_outer(l, k));
    Ok((lhs, rhs))
}

/// Options for the sampled average over an equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub samples: usize,
    /// Pass if the gap is within this many standard errors (plus 1e-9).
    pub sigmas: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { samples: 10_000, sigmas: 3.0 }
    }
}

/// Sampled check that `H_Q(Z|C)` equals the class average of `C_Q(W|B)`,
/// plus the exact phase-averaged identity behind it.
pub fn verify_thm3(
    rho: &DensityOperator,
    z: &InfoType,
    base: Option<&InfoType>,
    sampling: &SamplingOptions,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<VerificationReport>> {
    let r = pure_roles(rho, z)?;
    let u = z.basis().ok_or(Error::NotRankOne(z.n()))?;
    let decomp = cq_decompose(rho, z, &[r.c])?;
    let hq = entropies::cond_entropy_quad(&decomp, &decomp.rho_c())?;
    let rho_ab = rho.partial_trace(&r.ab)?;

    let xs = sample_quad_certainties(&rho_ab, z, base, sampling.samples, rng)?;
    let (mean, se) = mean_and_stderr(&xs);
    let mc = VerificationReport::from_gap("thm3.class_average", hq, mean, (hq - mean).abs(), sampling.sigmas * se + 1e-9)
        .with("samples", xs.len() as f64)
        .with("standard_error", se);

    let t_b = TransferMap::new(&rho_ab, r.a)?;
    let mut ac = vec![r.a, r.c];
    ac.sort_unstable();
    let t_c = TransferMap::new(&rho.partial_trace(&ac)?, if r.a < r.c { 0 } else { 1 })?;
    let d = u.cols();
    let e: Vec<Vec<Complex64>> = (0..d).map(|j| u.column(j)).collect();
    let tb_diag: Vec<ComplexMatrix> = e.iter().map(|v| t_b.apply_projector(v)).collect();
    let tc_diag: Vec<ComplexMatrix> = e.iter().map(|v| t_c.apply_projector(v)).collect();
    let mut same = 0.0;
    let mut cross_b = 0.0;
    let mut cross_c = 0.0;
    let mut squares = 0.0;
    for j in 0..d {
        squares += tb_diag[j].norm_sqr();
        for l in 0..d {
            if j == l {
                continue;
            }
            same += tb_diag[j].trace_of_product(&tb_diag[l]).re;
            cross_c += tc_diag[j].trace_of_product(&tc_diag[l]).re;
            cross_b += t_b.apply_outer(&e[j], &e[l]).trace_of_product(&t_b.apply_outer(&e[l], &e[j])).re;
        }
    }
    let mut rho_b = ComplexMatrix::zeros(tb_diag[0].rows(), tb_diag[0].rows());
    for t in &tb_diag {
        rho_b += t;
    }
    let with_c = same + cross_c + squares;
    let with_b = same + cross_b + squares;
    let rhs = rho_b.norm_sqr() + hq;
    let lemma = VerificationReport::equality("thm3.phase_average", with_c, rhs, LEMMA_TOL).also("all_b_terms", with_b);
    Ok(vec![mc, lemma])
}

/// Joint zero/nonzero test of the four classicality residuals at threshold
/// 1e-6. `diagnostics["classical"]` is 1 when all vanish.
pub fn verify_corollary(
    rho: &DensityOperator,
    z: &InfoType,
    samples: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<VerificationReport> {
    let r = pure_roles(rho, z)?;
    if !z.is_rank_one() {
        return Err(Error::NotRankOne(z.n()));
    }
    let rho_ab = rho.partial_trace(&r.ab)?;
    let pinched = pinch(&rho_ab, z)?;
    let off_diag = qmat::hilbert_schmidt_distance(rho_ab.matrix(), pinched.matrix()).sqrt();
    let h = entropies::cond_entropy_vn(&cq_decompose(rho, z, &[r.c])?);
    let tilde = lift_measurement(&rho_ab, z)?;
    let sep = lift_measurement(&pinched, z)?;
    let ent = qmat::relative_entropy(tilde.matrix(), sep.matrix());
    let xs = sample_quad_certainties(&rho_ab, z, None, samples, rng)?;
    let (mean_cq, _) = mean_and_stderr(&xs);

    let residuals = [off_diag, h, ent, mean_cq];
    let zeros = residuals.iter().filter(|&&x| x <= CLASSICALITY_THRESHOLD).count();
    let minority = zeros.min(residuals.len() - zeros);
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport::from_gap("corollary.joint_classicality", lo, hi, minority as f64, 0.0)
        .with("off_diagonal_norm", off_diag)
        .with("cond_entropy", h)
        .with("relative_entropy_of_entanglement", ent)
        .with("mean_quad_certainty", mean_cq)
        .with("classical", (zeros == residuals.len()) as u8 as f64))
}

/// Uncertainty relation against unbiased bases and the divergence chain
/// `(ln 2) D ≥ 2 D_T² ≥ D_HS` on `(ρ_AB, E_Z(ρ_AB))`.
pub fn verify_inequalities(
    rho: &DensityOperator,
    z: &InfoType,
    samples: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<VerificationReport>> {
    let r = pure_roles(rho, z)?;
    let rho_ab = rho.partial_trace(&r.ab)?;
    let h = entropies::cond_entropy_vn(&cq_decompose(rho, z, &[r.c])?);
    let mut ws = vec![fourier_mu_basis(z)?];
    for _ in 0..samples {
        ws.push(sample_equivalence_class(z, None, false, rng)?.basis());
    }
    let mut worst = f64::NEG_INFINITY;
    for w in &ws {
        let dw = cq_decompose(&rho_ab, w, &r.b)?;
        worst = worst.max(entropies::certainty(entropies::EntropyKind::Vn, &dw, &dw.rho_c())?);
    }
    let unc = VerificationReport::at_least("inequality.uncertainty", h, worst, INEQUALITY_SLACK).with("bases", ws.len() as f64);

    let pinched = pinch(&rho_ab, z)?;
    let d = qmat::relative_entropy(rho_ab.matrix(), pinched.matrix());
    let dt = qmat::trace_distance(rho_ab.matrix(), pinched.matrix());
    let dhs = qmat::hilbert_schmidt_distance(rho_ab.matrix(), pinched.matrix());
    let ln2 = core::f64::consts::LN_2;
    let pinsker = VerificationReport::at_least("inequality.pinsker", ln2 * d, 2.0 * dt * dt, INEQUALITY_SLACK);
    let hs = VerificationReport::at_least("inequality.trace_vs_hilbert_schmidt", 2.0 * dt * dt, dhs, INEQUALITY_SLACK);
    Ok(vec![unc, pinsker, hs])
}

/// Which-path qubit with real coherence `v/2`, purified into an environment.
pub fn interferometer_state(v: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(alloc::format!("visibility {v} outside [0, 1]")));
    }
    let m = ComplexMatrix::new(
        2,
        2,
        vec![Complex64::new(0.5, 0.0), Complex64::new(v / 2.0, 0.0), Complex64::new(v / 2.0, 0.0), Complex64::new(0.5, 0.0)],
    )?;
    Ok(purify(&DensityOperator::single(m)?).density())
}

/// `|⟨0|ρ_S|1⟩|²`, `½ H_Q(Z|E)` and `½⟨C_Q(W)⟩` for the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerRow {
    pub v: f64,
    pub off_diagonal_sq: f64,
    pub half_quad_entropy: f64,
    pub half_mean_certainty: f64,
    pub half_standard_error: f64,
}

pub fn interferometer_row(v: f64, samples: usize, rng: &mut (impl Rng + ?Sized)) -> Result<InterferometerRow> {
    let rho_se = interferometer_state(v)?;
    let z = InfoType::standard(2, 0);
    let rho_s = rho_se.partial_trace(&[0])?;
    let off = rho_s.matrix()[(0, 1)].norm_sqr();
    let decomp = cq_decompose(&rho_se, &z, &[1])?;
    let hq = entropies::cond_entropy_quad(&decomp, &decomp.rho_c())?;
    let xs = sample_quad_certainties(&rho_s, &z, None, samples, rng)?;
    let (mean, se) = mean_and_stderr(&xs);
    Ok(InterferometerRow {
        v,
        off_diagonal_sq: off,
        half_quad_entropy: 0.5 * hq,
        half_mean_certainty: 0.5 * mean,
        half_standard_error: 0.5 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotypes::coarse_grain;
    use crate::states::{haar_isometry, random_pure, random_state, PureState, RandomKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_pass(reports: &[VerificationReport]) {
        for r in reports {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn random_instances_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dims in [[2usize, 2, 2], [3, 2, 3]] {
            for _ in 0..5 {
                let rho = random_pure(&dims, &mut rng).density();
                let z = InfoType::random_basis(dims[0], 0, &mut rng);
                all_pass(&verify_thm1(&rho, &z, &Default::default(), &mut rng).unwrap());
                all_pass(&verify_thm2(&rho, &z, &Default::default(), &mut rng).unwrap());
                let s = SamplingOptions { samples: 2000, sigmas: 4.0 };
                all_pass(&verify_thm3(&rho, &z, None, &s, &mut rng).unwrap());
                all_pass(&verify_inequalities(&rho, &z, 5, &mut rng).unwrap());
                let coarse = coarse_grain(&z, &[(0..dims[0] - 1).collect(), vec![dims[0] - 1]]).unwrap();
                all_pass(&verify_thm1(&rho, &coarse, &Default::default(), &mut rng).unwrap());
            }
        }
    }

    #[test]
    fn transfer_identity_on_random_kets() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = random_pure(&[3, 2, 3], &mut rng).density();
        let z = InfoType::standard(3, 0);
        for _ in 0..10 {
            let kets: Vec<Vec<Complex64>> = (0..4).map(|_| crate::states::haar_vector(3, &mut rng)).collect();
            let (l, r) = transfer_pair_sides(&rho, &z, [&kets[0], &kets[1], &kets[2], &kets[3]]).unwrap();
            assert!((l - r).norm() < 1e-12, "{l} vs {r}");
        }
    }

    #[test]
    fn rejects_mixed_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_state(RandomKind::GinibreMixed, &[2, 2, 2], None, &mut rng).unwrap();
        let z = InfoType::standard(2, 0);
        assert!(matches!(verify_thm1(&rho, &z, &Default::default(), &mut rng), Err(Error::NotPure { .. })));
    }

    #[test]
    fn endpoints_of_measurement_entanglement() {
        let s = 0.5f64.sqrt();
        let plus = PureState::new(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)], vec![2]).unwrap().density();
        let z = InfoType::standard(2, 0);
        assert!((measurement_coherent_information(&plus, &z).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(&[2]);
        let rho = purify(&mixed).density();
        let h = entropies::cond_entropy_vn(&cq_decompose(&rho, &z, &[1]).unwrap());
        assert!(h.abs() < 1e-12);
        assert!(measurement_coherent_information(&mixed, &z).unwrap().abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = fourier_mu_basis(&z).unwrap();
        // |+⟩ belongs to the Fourier basis and is unbiased to the standard one.
        let eg = measurement_geometric_entanglement(&plus, &w, &Default::default(), &mut rng).unwrap();
        let eg_std = measurement_geometric_entanglement(&plus, &z, &Default::default(), &mut rng).unwrap();
        assert!((eg_std - 0.5).abs() < 1e-6, "{eg_std}");
        assert!(eg.abs() < 1e-6, "{eg}");
    }

    #[test]
    fn purification_rotation_leaves_reports_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let rho = random_pure(&[2, 2, 2], &mut rng).density();
        let z = InfoType::random_basis(2, 0, &mut rng);
        let v = haar_isometry(2, 3, &mut rng);
        let rotated = rho.conjugate_on(&v, 2).unwrap();
        let a = verify_thm1(&rho, &z, &Default::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = verify_thm1(&rotated, &z, &Default::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.lhs - y.lhs).abs() < 1e-8 && (x.rhs - y.rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn corollary_detects_classical_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z = InfoType::random_basis(2, 0, &mut rng);
        let generic = random_state(RandomKind::GinibreMixed, &[2, 2], None, &mut rng).unwrap();
        let classical = purify(&pinch(&generic, &z).unwrap()).density();
        let r = verify_corollary(&classical, &z, 50, &mut rng).unwrap();
        assert!(r.passed && r.diagnostics["classical"] == 1.0, "{r:?}");

        let s = 0.5f64.sqrt();
        let bell = PureState::new(
            vec![Complex64::new(s, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)],
            vec![2, 2, 1],
        )
        .unwrap()
        .density();
        let r = verify_corollary(&bell, &z, 50, &mut rng).unwrap();
        assert!(r.passed && r.diagnostics["classical"] == 0.0, "{r:?}");
        assert!(r.lhs > CLASSICALITY_THRESHOLD);
    }

    #[test]
    fn interferometer_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for v in [0.0, 0.5, 1.0] {
            let row = interferometer_row(v, 4000, &mut rng).unwrap();
            assert!((row.off_diagonal_sq - v * v / 4.0).abs() < 1e-12);
            assert!((row.off_diagonal_sq - row.half_quad_entropy).abs() < 1e-10, "{row:?}");
            assert!((row.off_diagonal_sq - row.half_mean_certainty).abs() < 4.0 * row.half_standard_error + 1e-9, "{row:?}");
        }
    }
}
