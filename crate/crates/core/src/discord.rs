//! Discord measures of bipartite states `ρ_AB`: basis-minimized conditional
//! entropies given the purifier, their distance-based counterparts,
//! complementarity averages and two-way variants.
//!
//! Every minimization over bases is non-convex; reported values are the best
//! found and hence upper bounds on the true minima. Where several formulas
//! share a minimizer pointwise, each route is also evaluated at the other
//! routes' minimizers so that one optimizer miss does not split the routes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropies::{p_guess_pure, p_guess_with, CqDecomposition, EntropyKind, GuessOptions};
use crate::fidelity::{max_fidelity, FidelityOptions, Pinching};
use crate::infotypes::{fourier_matrix, InfoType};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::qmat::{self, eta, ComplexMatrix};
use crate::states::{haar_unitary, purify, DensityOperator};
use crate::theorems::TransferMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisOptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for BasisOptimizerConfig {
    fn default() -> Self {
        Self { restarts: 20, max_iters: 2000, tolerance: 1e-6, seed: 0 }
    }
}

impl BasisOptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("tolerance {} must be positive", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    DeltaArrow,
    Deficit,
    Geometric,
    MinEntropy,
    Eg,
    ComplementarityVn,
    ComplementarityQuad,
    ComplementarityMin,
    TwoWayVn,
    TwoWayMin,
}

impl MeasureId {
    pub const ALL: [MeasureId; 10] = [
        MeasureId::DeltaArrow,
        MeasureId::Deficit,
        MeasureId::Geometric,
        MeasureId::MinEntropy,
        MeasureId::Eg,
        MeasureId::ComplementarityVn,
        MeasureId::ComplementarityQuad,
        MeasureId::ComplementarityMin,
        MeasureId::TwoWayVn,
        MeasureId::TwoWayMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::DeltaArrow => "delta_arrow",
            MeasureId::Deficit => "deficit",
            MeasureId::Geometric => "geometric",
            MeasureId::MinEntropy => "min_entropy",
            MeasureId::Eg => "eg",
            MeasureId::ComplementarityVn => "complementarity_vn",
            MeasureId::ComplementarityQuad => "complementarity_quad",
            MeasureId::ComplementarityMin => "complementarity_min",
            MeasureId::TwoWayVn => "two_way_vn",
            MeasureId::TwoWayMin => "two_way_min",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordReport {
    pub measure: MeasureId,
    pub value: f64,
    pub argmin_basis: InfoType,
    /// Basis on `B` for two-way measures.
    pub argmin_basis_b: Option<InfoType>,
    pub optimizer_diag: BTreeMap<String, f64>,
    pub is_upper_bound: bool,
    pub converged: bool,
}

impl DiscordReport {
    fn new(measure: MeasureId, value: f64, basis: &ComplexMatrix, min: &BasisMinimum) -> Self {
        let mut optimizer_diag = BTreeMap::new();
        optimizer_diag.insert("evaluations".to_string(), min.evaluations as f64);
        optimizer_diag.insert("runs".to_string(), min.runs as f64);
        optimizer_diag.insert("runs_converged".to_string(), min.runs_converged as f64);
        optimizer_diag.insert("runner_up_gap".to_string(), min.runner_up_gap);
        Self {
            measure,
            value,
            argmin_basis: InfoType::from_unitary_unchecked(basis.clone(), 0),
            argmin_basis_b: None,
            optimizer_diag,
            is_upper_bound: true,
            converged: min.runs_converged > 0,
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.optimizer_diag.insert(key.to_string(), value);
        self
    }

    pub fn basis_matrix(&self) -> &ComplexMatrix {
        self.argmin_basis.basis().expect("argmin bases are rank one")
    }
}

/// `exp(iH)` with `H` Hermitian.
fn unitary_exp(h: &ComplexMatrix) -> ComplexMatrix {
    let spec = qmat::eigh(h);
    let d = h.rows();
    let phases: Vec<Complex64> = spec.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    let v = &spec.eigenvectors;
    ComplexMatrix::from_fn(d, d, |r, c| (0..d).map(|k| v[(r, k)] * phases[k] * v[(c, k)].conj()).sum())
}

/// Number of real generator parameters for dimension `d`.
pub fn generator_len(d: usize) -> usize {
    d * d - 1
}

/// `exp(iH(x))`: `d² − d` off-diagonal parameters (real and imaginary parts
/// of the upper triangle) followed by `d − 1` diagonal ones.
pub fn unitary_from_generator(x: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let mut it = x.iter().copied();
    for r in 0..d {
        for c in r + 1..d {
            let re = it.next().unwrap_or(0.0);
            let im = it.next().unwrap_or(0.0);
            h[(r, c)] = Complex64::new(re, im);
            h[(c, r)] = Complex64::new(re, -im);
        }
    }
    for r in 0..d.saturating_sub(1) {
        h[(r, r)] = Complex64::new(it.next().unwrap_or(0.0), 0.0);
    }
    unitary_exp(&h)
}

/// Best basis found by [`min_over_bases`]; columns of `basis` are the vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisMinimum {
    pub value: f64,
    pub basis: ComplexMatrix,
    pub evaluations: usize,
    pub runs: usize,
    pub runs_converged: usize,
    /// Difference between the two best local minima.
    pub runner_up_gap: f64,
}

fn local_options(cfg: &BasisOptimizerConfig, step: f64) -> NelderMeadOptions {
    NelderMeadOptions { max_iters: cfg.max_iters, f_tol: 1e-14, x_tol: 1e-8, initial_step: step }
}

fn descend(
    objective: &mut impl FnMut(&ComplexMatrix) -> f64,
    start: &ComplexMatrix,
    opts: &NelderMeadOptions,
) -> (f64, ComplexMatrix, usize, bool) {
    let d = start.rows();
    let m = nelder_mead(|x| objective(&start.matmul(&unitary_from_generator(x, d))), &vec![0.0; generator_len(d)], opts);
    (m.value, start.matmul(&unitary_from_generator(&m.x, d)), m.evaluations, m.converged)
}

/// Minimize `objective` over orthonormal bases of `C^d` by Nelder–Mead in
/// the generator chart around each start: the identity, every basis in
/// `seeds`, and `cfg.restarts − 1` Haar-random unitaries. The best run is
/// polished once more with a smaller step.
pub fn min_over_bases(
    mut objective: impl FnMut(&ComplexMatrix) -> f64,
    d: usize,
    cfg: &BasisOptimizerConfig,
    seeds: &[ComplexMatrix],
) -> BasisMinimum {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<ComplexMatrix> = seeds.iter().filter(|s| s.rows() == d).cloned().collect();
    starts.push(ComplexMatrix::identity(d));
    for _ in 1..cfg.restarts.max(1) {
        starts.push(haar_unitary(d, &mut rng));
    }
    let opts = local_options(cfg, 0.5);
    let mut evaluations = 0;
    let mut runs_converged = 0;
    let mut results: Vec<(f64, ComplexMatrix)> = Vec::with_capacity(starts.len());
    for s in &starts {
        let v0 = objective(s);
        evaluations += 1;
        results.push((v0, s.clone()));
        let (v, u, evals, conv) = descend(&mut objective, s, &opts);
        evaluations += evals;
        runs_converged += conv as usize;
        results.push((v, u));
    }
    results.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut value, mut basis) = results[0].clone();
    let runner_up = results.iter().skip(1).map(|r| r.0).find(|&v| v - value > 1e-12).unwrap_or(value);
    let (pv, pu, evals, _) = descend(&mut objective, &basis, &local_options(cfg, 0.05));
    evaluations += evals;
    if pv < value {
        value = pv;
        basis = pu;
    }
    BasisMinimum { value, basis, evaluations, runs: starts.len(), runs_converged, runner_up_gap: runner_up - value }
}

/// Best product basis found by [`min_over_product_bases`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMinimum {
    pub value: f64,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
    pub evaluations: usize,
    pub runs: usize,
    pub runs_converged: usize,
}

/// Block-coordinate descent over `Z ⊗ Z'`: alternate local searches on the
/// `A` and `B` bases from joint random starts (plus `seeds`).
pub fn min_over_product_bases(
    mut objective: impl FnMut(&ComplexMatrix, &ComplexMatrix) -> f64,
    da: usize,
    db: usize,
    cfg: &BasisOptimizerConfig,
    seeds: &[(ComplexMatrix, ComplexMatrix)],
) -> ProductMinimum {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut starts: Vec<(ComplexMatrix, ComplexMatrix)> = seeds.to_vec();
    starts.push((ComplexMatrix::identity(da), ComplexMatrix::identity(db)));
    for _ in 1..cfg.restarts.max(1) {
        starts.push((haar_unitary(da, &mut rng), haar_unitary(db, &mut rng)));
    }
    // Alternating sweeps locate the basin; a joint search then refines it.
    let coarse = NelderMeadOptions { x_tol: 1e-3, f_tol: 1e-8, ..local_options(cfg, 0.5) };
    let mut runs: Vec<(f64, ComplexMatrix, ComplexMatrix)> = Vec::with_capacity(starts.len());
    let mut evaluations = 0;
    let mut runs_converged = 0;
    for (mut ua, mut ub) in starts.iter().cloned() {
        let mut value = objective(&ua, &ub);
        evaluations += 1;
        let mut converged = false;
        for _ in 0..BCD_SWEEPS {
            let before = value;
            let (_, na, ea, _) = descend(&mut |u: &ComplexMatrix| objective(u, &ub), &ua, &coarse);
            ua = na;
            let (vb, nb, eb, _) = descend(&mut |u: &ComplexMatrix| objective(&ua, u), &ub, &coarse);
            ub = nb;
            value = vb;
            evaluations += ea + eb;
            if before - value <= 1e-6 * (1.0 + value.abs()) {
                converged = true;
                break;
            }
        }
        runs_converged += converged as usize;
        runs.push((value, ua, ub));
    }
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fine = local_options(cfg, 0.05);
    let (na, nb) = (generator_len(da), generator_len(db));
    let mut best = runs[0].clone();
    for (v0, ua0, ub0) in runs.iter().take(JOINT_POLISH_RUNS) {
        let m = nelder_mead(
            |x| objective(&ua0.matmul(&unitary_from_generator(&x[..na], da)), &ub0.matmul(&unitary_from_generator(&x[na..], db))),
            &vec![0.0; na + nb],
            &fine,
        );
        evaluations += m.evaluations;
        if m.value.min(*v0) < best.0 {
            best = if m.value < *v0 {
                (m.value, ua0.matmul(&unitary_from_generator(&m.x[..na], da)), ub0.matmul(&unitary_from_generator(&m.x[na..], db)))
            } else {
                (*v0, ua0.clone(), ub0.clone())
            };
        }
    }
    let (value, basis_a, basis_b) = best;
    ProductMinimum { value, basis_a, basis_b, evaluations, runs: starts.len(), runs_converged }
}

const BCD_SWEEPS: usize = 4;
const JOINT_POLISH_RUNS: usize = 2;

/// Precomputed data for evaluating basis-dependent quantities of `ρ_AB`.
#[derive(Debug, Clone)]
pub struct Bipartite {
    rho: DensityOperator,
    t_b: TransferMap,
    // Purification amplitudes in A ⊗ B ⊗ C order.
    psi: Vec<Complex64>,
    da: usize,
    db: usize,
    dc: usize,
    entropy: f64,
    purity: f64,
    entropy_a: f64,
    entropy_b: f64,
    purity_b: f64,
}

impl Bipartite {
    pub fn new(rho: &DensityOperator) -> Result<Self> {
        if rho.dims().len() != 2 {
            return Err(Error::NotBipartite(rho.dims().len()));
        }
        rho.check_state(1e-8)?;
        let (da, db) = (rho.dims()[0], rho.dims()[1]);
        let pure = purify(rho);
        let dc = *pure.dims().last().unwrap();
        let rho_a = rho.partial_trace(&[0])?;
        let rho_b = rho.partial_trace(&[1])?;
        Ok(Self {
            t_b: TransferMap::new(rho, 0)?,
            psi: pure.amplitudes().to_vec(),
            da,
            db,
            dc,
            entropy: rho.entropy(),
            purity: rho.purity(),
            entropy_a: rho_a.entropy(),
            entropy_b: rho_b.entropy(),
            purity_b: rho_b.purity(),
            rho: rho.clone(),
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    /// Purifier dimension.
    pub fn purifier_dim(&self) -> usize {
        self.dc
    }

    /// `σ_{B,j} = (⟨z_j| ⊗ I) ρ_AB (|z_j⟩ ⊗ I)` for the columns of `u`.
    pub fn b_blocks(&self, u: &ComplexMatrix) -> Vec<ComplexMatrix> {
        (0..u.cols()).map(|j| self.t_b.apply_projector(&u.column(j))).collect()
    }

    /// `σ_{C,j} = Tr_{AB}[(|z_j⟩⟨z_j| ⊗ I) ψψ†]` on the purifier.
    pub fn purifier_blocks(&self, u: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let (da, db, dc) = (self.da, self.db, self.dc);
        (0..u.cols())
            .map(|j| {
                let mut phi = vec![Complex64::new(0.0, 0.0); db * dc];
                for a in 0..da {
                    let w = u[(a, j)].conj();
                    for (k, p) in phi.iter_mut().enumerate() {
                        *p += w * self.psi[a * db * dc + k];
                    }
                }
                ComplexMatrix::from_fn(dc, dc, |c, c2| (0..db).map(|b| phi[b * dc + c] * phi[b * dc + c2].conj()).sum())
            })
            .collect()
    }

    /// Purifier amplitudes `(⟨z_j| ⊗ ⟨z'_k| ⊗ I)|ψ⟩` of the product basis.
    pub fn purifier_vectors_product(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Vec<Vec<Complex64>> {
        let (da, db, dc) = (self.da, self.db, self.dc);
        // Contract A first, then B.
        let mut half = vec![Complex64::new(0.0, 0.0); da * db * dc];
        for j in 0..da {
            for a in 0..da {
                let w = ua[(a, j)].conj();
                for k in 0..db * dc {
                    half[j * db * dc + k] += w * self.psi[a * db * dc + k];
                }
            }
        }
        let mut out = Vec::with_capacity(da * db);
        for j in 0..da {
            for k in 0..db {
                let mut v = vec![Complex64::new(0.0, 0.0); dc];
                for b in 0..db {
                    let w = ub[(b, k)].conj();
                    for c in 0..dc {
                        v[c] += w * half[j * db * dc + b * dc + c];
                    }
                }
                out.push(v);
            }
        }
        out
    }

    /// `H(E_Z(ρ)) − H(ρ)`.
    pub fn deficit_at(&self, u: &ComplexMatrix) -> f64 {
        self.b_blocks(u).iter().map(block_entropy).sum::<f64>() - self.entropy
    }

    /// `H(Z|C)` on the purification.
    pub fn cond_entropy_at(&self, u: &ComplexMatrix) -> f64 {
        self.purifier_blocks(u).iter().map(block_entropy).sum::<f64>() - self.entropy
    }

    /// `D_HS(ρ, E_Z(ρ)) = Tr ρ² − Σ_j Tr σ_{B,j}²`.
    pub fn hs_distance_at(&self, u: &ComplexMatrix) -> f64 {
        self.purity - self.b_blocks(u).iter().map(ComplexMatrix::norm_sqr).sum::<f64>()
    }

    /// `H_Q(Z|C)` on the purification.
    pub fn cond_quad_entropy_at(&self, u: &ComplexMatrix) -> f64 {
        self.purity - self.purifier_blocks(u).iter().map(ComplexMatrix::norm_sqr).sum::<f64>()
    }

    /// `Σ_{j≠k} ‖(⟨z_j| ⊗ I) ρ (|z_k⟩ ⊗ I)‖²`.
    pub fn off_diagonal_at(&self, u: &ComplexMatrix) -> f64 {
        let d = u.cols();
        let cols: Vec<Vec<Complex64>> = (0..d).map(|j| u.column(j)).collect();
        let mut acc = 0.0;
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    acc += self.t_b.apply_outer(&cols[k], &cols[j]).norm_sqr();
                }
            }
        }
        acc
    }

    /// `I(ρ) − I(E_Z(ρ))`.
    pub fn mutual_info_loss_at(&self, u: &ComplexMatrix) -> f64 {
        let blocks = self.b_blocks(u);
        let probs: Vec<f64> = blocks.iter().map(|b| b.trace().re).collect();
        let h_pinched: f64 = blocks.iter().map(block_entropy).sum();
        let before = self.entropy_a + self.entropy_b - self.entropy;
        let after = qmat::shannon_entropy(&probs) + self.entropy_b - h_pinched;
        before - after
    }

    /// `p_guess(Z|C)` on the purification.
    pub fn guess_at(&self, u: &ComplexMatrix, opts: &GuessOptions) -> f64 {
        let d = CqDecomposition::from_unnormalized(self.purifier_blocks(u), vec![self.dc]);
        p_guess_with(&d, opts).p_guess
    }

    /// `H(Z ⊗ Z'|C)`; conditional purifier states are pure.
    pub fn cond_entropy_product_at(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> f64 {
        self.purifier_vectors_product(ua, ub).iter().map(|v| eta(qmat::vec_norm(v).powi(2))).sum::<f64>() - self.entropy
    }

    /// `H(E_{ZZ'}(ρ)) − H(ρ)` from the doubly pinched diagonal.
    pub fn double_deficit_at(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> f64 {
        let u = ua.kron(ub);
        let probs: Vec<f64> = (0..u.cols()).map(|k| {
            let v = u.column(k);
            self.rho.matrix().sandwich(&v, &v).re
        }).collect();
        qmat::shannon_entropy(&probs) - self.entropy
    }

    /// `p_guess(Z ⊗ Z'|C)`.
    pub fn guess_product_at(&self, ua: &ComplexMatrix, ub: &ComplexMatrix, opts: &GuessOptions) -> f64 {
        let blocks = self.purifier_vectors_product(ua, ub).iter().map(|v| ComplexMatrix::projector(v)).collect();
        p_guess_with(&CqDecomposition::from_unnormalized(blocks, vec![self.dc]), opts).p_guess
    }

    /// Uncertified `p_guess(Z ⊗ Z'|C)` for use inside optimizers.
    pub fn guess_product_fast(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> f64 {
        p_guess_pure(&self.purifier_vectors_product(ua, ub), 1e-12, 2000)
    }

    /// `C_K(W|B)` for the basis in the columns of `w`.
    pub fn certainty_b_at(&self, kind: EntropyKind, w: &ComplexMatrix, opts: &GuessOptions) -> f64 {
        let blocks = self.b_blocks(w);
        let n = w.cols() as f64;
        match kind {
            EntropyKind::Vn => n.log2() - (blocks.iter().map(block_entropy).sum::<f64>() - self.entropy_b),
            EntropyKind::Quad => n * blocks.iter().map(ComplexMatrix::norm_sqr).sum::<f64>() - self.purity_b,
            EntropyKind::Min => {
                let d = CqDecomposition::from_unnormalized(blocks, vec![self.db]);
                n.log2() + p_guess_with(&d, opts).p_guess.log2()
            }
        }
    }
}

fn block_entropy(m: &ComplexMatrix) -> f64 {
    if m.rows() == 1 {
        return eta(m[(0, 0)].re);
    }
    qmat::eigvalsh(m).into_iter().map(eta).sum()
}

// Tight enough for optimization, cheap enough to call thousands of times.
fn inner_guess_options() -> GuessOptions {
    GuessOptions { tolerance: 1e-10, certify: false, ..Default::default() }
}

/// One-way information deficit: `min_Z [H(E_Z(ρ)) − H(ρ)]`, cross-computed as
/// `min_Z H(Z|C)` on a purification.
pub fn deficit(rho: &DensityOperator, cfg: &BasisOptimizerConfig, seeds: &[ComplexMatrix]) -> Result<DiscordReport> {
    cfg.validate()?;
    let w = Bipartite::new(rho)?;
    let da = w.da;
    let a = min_over_bases(|u| w.deficit_at(u), da, cfg, seeds);
    let b = min_over_bases(|u| w.cond_entropy_at(u), da, &reseeded(cfg, 1), seeds);
    let route_pinch = a.value.min(w.deficit_at(&b.basis));
    let route_purifier = b.value.min(w.cond_entropy_at(&a.basis));
    let basis = if w.deficit_at(&a.basis) <= w.deficit_at(&b.basis) { &a.basis } else { &b.basis };
    Ok(DiscordReport::new(MeasureId::Deficit, route_pinch.min(route_purifier), basis, &a)
        .with("route_pinching", route_pinch)
        .with("route_purifier", route_purifier)
        .with("raw_pinching", a.value)
        .with("raw_purifier", b.value))
}

fn reseeded(cfg: &BasisOptimizerConfig, k: u64) -> BasisOptimizerConfig {
    BasisOptimizerConfig { seed: cfg.seed.wrapping_add(k.wrapping_mul(0x2545_f491_4f6c_dd1d)), ..*cfg }
}

/// Geometric discord `min_Z D_HS(ρ, E_Z(ρ))`, cross-computed as `min_Z H_Q(Z|C)`
/// and through the off-diagonal block norms.
pub fn geometric(rho: &DensityOperator, cfg: &BasisOptimizerConfig, seeds: &[ComplexMatrix]) -> Result<DiscordReport> {
    cfg.validate()?;
    let w = Bipartite::new(rho)?;
    let a = min_over_bases(|u| w.hs_distance_at(u), w.da, cfg, seeds);
    let b = min_over_bases(|u| w.cond_quad_entropy_at(u), w.da, &reseeded(cfg, 1), seeds);
    let c = min_over_bases(|u| w.off_diagonal_at(u), w.da, &reseeded(cfg, 2), seeds);
    let bases = [&a.basis, &b.basis, &c.basis];
    let route = |f: &dyn Fn(&ComplexMatrix) -> f64, raw: f64| bases.iter().map(|u| f(u)).fold(raw, f64::min);
    let r_hs = route(&|u| w.hs_distance_at(u), a.value);
    let r_quad = route(&|u| w.cond_quad_entropy_at(u), b.value);
    let r_off = route(&|u| w.off_diagonal_at(u), c.value);
    let basis = *bases.iter().min_by(|x, y| w.hs_distance_at(x).total_cmp(&w.hs_distance_at(y))).unwrap();
    Ok(DiscordReport::new(MeasureId::Geometric, r_hs.min(r_quad).min(r_off), basis, &a)
        .with("route_hilbert_schmidt", r_hs)
        .with("route_purifier", r_quad)
        .with("route_off_diagonal", r_off))
}

/// Original one-way discord `min_Z [I(ρ) − I(E_Z(ρ))]`.
pub fn original_discord(rho: &DensityOperator, cfg: &BasisOptimizerConfig, seeds: &[ComplexMatrix]) -> Result<DiscordReport> {
    cfg.validate()?;
    let w = Bipartite::new(rho)?;
    let m = min_over_bases(|u| w.mutual_info_loss_at(u), w.da, cfg, seeds);
    Ok(DiscordReport::new(MeasureId::DeltaArrow, m.value, &m.basis, &m))
}

/// `D_min = min_Z H_min(Z|C)` and `Δ_EG = 1 − 2^{−D_min}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyDiscord {
    pub d_min: DiscordReport,
    pub eg: DiscordReport,
}

/// Min-entropy discord, with the fidelity form evaluated at the minimizer.
pub fn min_entropy_discord(rho: &DensityOperator, cfg: &BasisOptimizerConfig, seeds: &[ComplexMatrix]) -> Result<MinEntropyDiscord> {
    cfg.validate()?;
    let w = Bipartite::new(rho)?;
    let inner = inner_guess_options();
    let m = min_over_bases(|u| -w.guess_at(u, &inner).log2(), w.da, cfg, seeds);
    // Certified solves at the optimizer's basis and at every seed.
    let (basis, exact) = core::iter::once(&m.basis)
        .chain(seeds.iter().filter(|s| s.rows() == w.da))
        .map(|u| {
            let g = p_guess_with(&CqDecomposition::from_unnormalized(w.purifier_blocks(u), vec![w.dc]), &GuessOptions::default());
            (u.clone(), g)
        })
        .max_by(|a, b| a.1.p_guess.total_cmp(&b.1.p_guess))
        .expect("at least one candidate");
    let d_min = -exact.p_guess.log2();
    let z = InfoType::from_unitary_unchecked(basis.clone(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = max_fidelity(rho.matrix(), &Pinching::new(rho.dims(), &z)?, &FidelityOptions::default(), &mut rng)?;
    let fidelity_route = -f.fidelity.log2();
    let eg_value = 1.0 - exact.p_guess;
    let mut report = DiscordReport::new(MeasureId::MinEntropy, d_min, &basis, &m)
        .with("fidelity_route", fidelity_route)
        .with("eg", eg_value)
        .with("p_guess_dual_gap", exact.residual);
    report.converged &= exact.converged;
    let mut eg = report.clone();
    eg.measure = MeasureId::Eg;
    eg.value = eg_value;
    Ok(MinEntropyDiscord { d_min: report, eg })
}

/// Phase samples reused across objective evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSamples {
    pub phases: Vec<Vec<f64>>,
}

impl PhaseSamples {
    pub fn draw(d: usize, samples: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = (0..samples)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 * core::f64::consts::PI).collect())
            .collect();
        Self { phases }
    }

    /// `U_Z D(θ) F`: the class member with phases `θ` relative to `Z`.
    pub fn member(z: &ComplexMatrix, phases: &[f64]) -> ComplexMatrix {
        let d = z.rows();
        let f = fourier_matrix(d);
        let df = ComplexMatrix::from_fn(d, d, |r, c| Complex64::from_polar(1.0, phases[r]) * f[(r, c)]);
        z.matmul(&df)
    }
}

/// Sampled `⟨C_K(W|B)⟩` over the class unbiased to the columns of `z`.
pub fn mean_certainty(w: &Bipartite, kind: EntropyKind, z: &ComplexMatrix, samples: &PhaseSamples) -> (f64, f64) {
    let opts = inner_guess_options();
    let xs: Vec<f64> = samples.phases.iter().map(|th| w.certainty_b_at(kind, &PhaseSamples::member(z, th), &opts)).collect();
    crate::theorems::mean_and_stderr(&xs)
}

/// `min_Z ⟨C_K(W|B)⟩` over the class unbiased to `Z`, with one fixed phase
/// sample set shared by all evaluations.
pub fn complementarity_discord(
    rho: &DensityOperator,
    kind: EntropyKind,
    samples: usize,
    cfg: &BasisOptimizerConfig,
    seeds: &[ComplexMatrix],
) -> Result<DiscordReport> {
    cfg.validate()?;
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let w = Bipartite::new(rho)?;
    let ph = PhaseSamples::draw(w.da, samples, cfg.seed ^ 0x5eed);
    let m = min_over_bases(|u| mean_certainty(&w, kind, u, &ph).0, w.da, cfg, seeds);
    let (mean, se) = mean_certainty(&w, kind, &m.basis, &ph);
    let id = match kind {
        EntropyKind::Vn => MeasureId::ComplementarityVn,
        EntropyKind::Quad => MeasureId::ComplementarityQuad,
        EntropyKind::Min => MeasureId::ComplementarityMin,
    };
    Ok(DiscordReport::new(id, mean, &m.basis, &m).with("standard_error", se).with("samples", samples as f64))
}

/// `min_{Z⊗Z'} H_K(Z ⊗ Z'|C)` for `kind` von Neumann or min-entropy.
pub fn two_way_discord(
    rho: &DensityOperator,
    kind: EntropyKind,
    cfg: &BasisOptimizerConfig,
    seeds: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<DiscordReport> {
    cfg.validate()?;
    let w = Bipartite::new(rho)?;
    let (da, db) = (w.da, w.db);
    let (id, value, m, extra) = match kind {
        EntropyKind::Vn => {
            let a = min_over_product_bases(|x, y| w.cond_entropy_product_at(x, y), da, db, cfg, seeds);
            let b = min_over_product_bases(|x, y| w.double_deficit_at(x, y), da, db, &reseeded(cfg, 1), seeds);
            let r_purifier = a.value.min(w.cond_entropy_product_at(&b.basis_a, &b.basis_b));
            let r_distance = b.value.min(w.double_deficit_at(&a.basis_a, &a.basis_b));
            let best = if w.cond_entropy_product_at(&a.basis_a, &a.basis_b) <= w.cond_entropy_product_at(&b.basis_a, &b.basis_b) { a } else { b };
            let rel = qmat::relative_entropy(rho.matrix(), &double_pinch(rho, &best.basis_a, &best.basis_b));
            let extra = vec![("route_purifier", r_purifier), ("route_distance", r_distance), ("relative_entropy_at_argmin", rel)];
            (MeasureId::TwoWayVn, r_purifier.min(r_distance), best, extra)
        }
        EntropyKind::Min => {
            let m = min_over_product_bases(|x, y| -w.guess_product_fast(x, y).log2(), da, db, cfg, seeds);
            let exact = -w.guess_product_at(&m.basis_a, &m.basis_b, &GuessOptions::default()).log2();
            (MeasureId::TwoWayMin, exact.min(m.value), m, vec![])
        }
        EntropyKind::Quad => return Err(Error::InvalidArgument("two-way discord supports von Neumann and min-entropy".into())),
    };
    let summary = BasisMinimum {
        value,
        basis: m.basis_a.clone(),
        evaluations: m.evaluations,
        runs: m.runs,
        runs_converged: m.runs_converged,
        runner_up_gap: f64::NAN,
    };
    let mut report = DiscordReport::new(id, value, &m.basis_a, &summary);
    report.optimizer_diag.remove("runner_up_gap");
    report.argmin_basis_b = Some(InfoType::from_unitary_unchecked(m.basis_b.clone(), 1));
    for (k, v) in extra {
        report = report.with(k, v);
    }
    Ok(report)
}

/// `Σ_{jk} (Z_j ⊗ Z'_k) ρ (Z_j ⊗ Z'_k)`.
pub fn double_pinch(rho: &DensityOperator, ua: &ComplexMatrix, ub: &ComplexMatrix) -> ComplexMatrix {
    let u = ua.kron(ub);
    let rotated = u.adjoint().matmul(rho.matrix()).matmul(&u);
    let diag: Vec<f64> = (0..u.rows()).map(|i| rotated[(i, i)].re).collect();
    u.matmul(&ComplexMatrix::from_real_diag(&diag)).matmul(&u.adjoint())
}

/// All measures on one state, with the minimizers shared so that the
/// pointwise orderings between measures carry over to the reported values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordSuite {
    pub two_way_vn: DiscordReport,
    pub two_way_min: DiscordReport,
    pub deficit: DiscordReport,
    pub original: DiscordReport,
    pub geometric: DiscordReport,
    pub min_entropy: MinEntropyDiscord,
}

pub fn discord_suite(rho: &DensityOperator, cfg: &BasisOptimizerConfig) -> Result<DiscordSuite> {
    let two_way_vn = two_way_discord(rho, EntropyKind::Vn, cfg, &[])?;
    let two_way_min = two_way_discord(rho, EntropyKind::Min, cfg, &[])?;
    let from_two_way = [two_way_vn.basis_matrix().clone(), two_way_min.basis_matrix().clone()];
    let deficit = deficit(rho, cfg, &from_two_way)?;
    let mut seeds = vec![deficit.basis_matrix().clone()];
    seeds.extend_from_slice(&from_two_way);
    let original = original_discord(rho, cfg, &seeds)?;
    let geometric = geometric(rho, cfg, &seeds)?;
    let min_entropy = min_entropy_discord(rho, cfg, &seeds)?;
    Ok(DiscordSuite { two_way_vn, two_way_min, deficit, original, geometric, min_entropy })
}

/// Value of a one-way measure at a fixed basis (columns of `u`).
pub fn evaluate_one_way(measure: MeasureId, rho: &DensityOperator, u: &ComplexMatrix) -> Result<f64> {
    let w = Bipartite::new(rho)?;
    if u.rows() != w.da || u.cols() != w.da {
        return Err(Error::DimMismatch(alloc::format!("basis is {}x{} for d_A = {}", u.rows(), u.cols(), w.da)));
    }
    Ok(match measure {
        MeasureId::Deficit => w.deficit_at(u),
        MeasureId::Geometric => w.hs_distance_at(u),
        MeasureId::DeltaArrow => w.mutual_info_loss_at(u),
        MeasureId::MinEntropy => -w.guess_at(u, &GuessOptions::default()).log2(),
        MeasureId::Eg => 1.0 - w.guess_at(u, &GuessOptions::default()),
        _ => return Err(Error::InvalidArgument(alloc::format!("{} is not a fixed-basis one-way measure", measure.name()))),
    })
}
