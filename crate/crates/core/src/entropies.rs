//! Conditional entropies of an information type given a quantum system:
//! von Neumann, quadratic (linear) and min-entropy, with their certainty
//! counterparts and the optimal guessing probability.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::infotypes::InfoType;
use crate::qmat::{self, eta, ComplexMatrix, EIG_CUTOFF};
use crate::states::DensityOperator;
use crate::{Error, Result};

/// Outcomes with probability at or below this are dropped from entropy sums
/// and from the guessing problem.
pub const PROB_CUTOFF: f64 = 1e-12;

/// Post-measurement classical-quantum decomposition `σ_{C,j} = p_j ρ_{C,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqDecomposition {
    pub probs: Vec<f64>,
    /// `ρ_{C,j}`, `None` for outcomes with `p_j ≤ 1e-12`.
    pub cond_states: Vec<Option<DensityOperator>>,
    pub unnormalized: Vec<ComplexMatrix>,
    /// Factor dimensions of the conditioning system (`[1]` when trivial).
    pub cond_dims: Vec<usize>,
}

impl CqDecomposition {
    /// Build from the unnormalized conditional operators `σ_{C,j}`.
    pub fn from_unnormalized(unnormalized: Vec<ComplexMatrix>, cond_dims: Vec<usize>) -> Self {
        let probs: Vec<f64> = unnormalized.iter().map(|s| s.trace().re).collect();
        let cond_states = unnormalized
            .iter()
            .zip(&probs)
            .map(|(s, &p)| (p > PROB_CUTOFF).then(|| DensityOperator::new_unchecked(s.scale(1.0 / p), cond_dims.clone())))
            .collect();
        Self { probs, cond_states, unnormalized, cond_dims }
    }

    /// Number of outcomes `N`, including zero-probability ones.
    pub fn n(&self) -> usize {
        self.probs.len()
    }

    /// Indices of outcomes above the probability cutoff.
    pub fn active(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.probs[j] > PROB_CUTOFF).collect()
    }

    pub fn cond_dim(&self) -> usize {
        self.unnormalized[0].rows()
    }

    /// `ρ_C = Σ_j σ_{C,j}`.
    pub fn rho_c(&self) -> DensityOperator {
        let d = self.cond_dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for s in &self.unnormalized {
            m += s;
        }
        DensityOperator::new_unchecked(m, self.cond_dims.clone())
    }

    /// `Σ_j p_j |j⟩⟨j| ⊗ ρ_{C,j}` with the register as first factor.
    pub fn cq_state(&self) -> DensityOperator {
        let n = self.n();
        let d = self.cond_dim();
        let mut m = ComplexMatrix::zeros(n * d, n * d);
        for (j, s) in self.unnormalized.iter().enumerate() {
            for r in 0..d {
                for c in 0..d {
                    m[(j * d + r, j * d + c)] = s[(r, c)];
                }
            }
        }
        let mut dims = vec![n];
        dims.extend_from_slice(&self.cond_dims);
        DensityOperator::new_unchecked(m, dims)
    }
}

/// `p_j = Tr[(Z_j ⊗ I)ρ]`, `σ_{C,j} = Tr_{¬C}[(Z_j ⊗ I)ρ]` where `C` is the
/// set of factors in `keep` (empty for a trivial conditioning system).
pub fn cq_decompose(rho: &DensityOperator, z: &InfoType, keep: &[usize]) -> Result<CqDecomposition> {
    let dims = rho.dims();
    z.check_on(dims)?;
    let a = z.subsystem();
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len() || k == a) {
        return Err(Error::DimMismatch(format!("conditioning factors {keep:?} invalid for dims {dims:?} with Z on {a}")));
    }
    let cond_dims: Vec<usize> = if kept.is_empty() { vec![1] } else { kept.iter().map(|&k| dims[k]).collect() };
    let mut unnormalized = Vec::with_capacity(z.n());
    for p in z.projectors() {
        let x = rho.matrix().local_left(p, dims, a);
        let s = if kept.is_empty() {
            ComplexMatrix::from_real_diag(&[x.trace().re])
        } else {
            x.partial_trace(dims, &kept)?.hermitian_part()
        };
        unnormalized.push(s);
    }
    Ok(CqDecomposition::from_unnormalized(unnormalized, cond_dims))
}

fn entropy_of_psd(m: &ComplexMatrix) -> f64 {
    if m.rows() == 1 {
        return eta(m[(0, 0)].re);
    }
    qmat::eigvalsh(m).into_iter().map(eta).sum()
}

/// `H(Z|C) = H(Σ_j |j⟩⟨j| ⊗ σ_{C,j}) − H(ρ_C)`.
pub fn cond_entropy_vn(decomp: &CqDecomposition) -> f64 {
    let joint: f64 = decomp.unnormalized.iter().map(entropy_of_psd).sum();
    joint - entropy_of_psd(decomp.rho_c().matrix())
}

const MARGINAL_TOL: f64 = 1e-9;

/// `H_Q(Z|C) = Tr(ρ_C²) − Σ_j Tr(σ_{C,j}²)`.
pub fn cond_entropy_quad(decomp: &CqDecomposition, rho_c: &DensityOperator) -> Result<f64> {
    let dev = decomp.rho_c().matrix().max_abs_diff(rho_c.matrix());
    if rho_c.dim() != decomp.cond_dim() || dev > MARGINAL_TOL {
        return Err(Error::InconsistentMarginal(dev));
    }
    Ok(rho_c.purity() - decomp.unnormalized.iter().map(qmat::purity).sum::<f64>())
}

/// `Σ_{j≠k} Tr(σ_{C,j} σ_{C,k})`.
pub fn cond_entropy_quad_pairwise(decomp: &CqDecomposition) -> f64 {
    let s = &decomp.unnormalized;
    let mut acc = 0.0;
    for j in 0..s.len() {
        for k in 0..s.len() {
            if j != k {
                acc += s[j].trace_of_product(&s[k]).re;
            }
        }
    }
    acc
}

/// `(N−1)/N Tr(ρ_C²) − (1/2N) Σ_{j≠k} D_HS(σ_{C,j}, σ_{C,k})`.
pub fn cond_entropy_quad_distances(decomp: &CqDecomposition) -> f64 {
    let n = decomp.n() as f64;
    let purity = decomp.rho_c().purity();
    (n - 1.0) / n * purity - pairwise_hs_sum(decomp) / n
}

// Σ_{j<k} D_HS(σ_j, σ_k).
fn pairwise_hs_sum(decomp: &CqDecomposition) -> f64 {
    let s = &decomp.unnormalized;
    let mut acc = 0.0;
    for j in 0..s.len() {
        for k in j + 1..s.len() {
            acc += qmat::hilbert_schmidt_distance(&s[j], &s[k]);
        }
    }
    acc
}

/// Optimal guessing POVM and value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessResult {
    pub p_guess: f64,
    /// One element per outcome; zero for dropped outcomes.
    pub povm: Vec<ComplexMatrix>,
    /// Dual gap at exit (upper minus lower bound on the optimum).
    pub residual: f64,
    /// `None` for closed-form cases.
    pub dual_gap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl GuessResult {
    pub fn h_min(&self) -> f64 {
        -self.p_guess.log2()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { residual: self.residual, iterations: self.iterations })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessOptions {
    /// Target dual gap.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Use the iterative solver even when a closed form exists.
    pub force_iterative: bool,
    /// Without certification the solver stops once the primal value stalls
    /// within `tolerance`, and no dual gap is reported.
    pub certify: bool,
}

impl Default for GuessOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_iters: 50_000, force_iterative: false, certify: true }
    }
}

/// Gap below which a solve counts as converged.
pub const GUESS_ACCEPT_GAP: f64 = 1e-7;

/// `max_Q Σ_j Tr(Q_j σ_{C,j})` over POVMs on `C`.
pub fn p_guess(decomp: &CqDecomposition) -> GuessResult {
    p_guess_with(decomp, &GuessOptions::default())
}

pub fn p_guess_with(decomp: &CqDecomposition, opts: &GuessOptions) -> GuessResult {
    let d = decomp.cond_dim();
    let n = decomp.n();
    let active = decomp.active();
    let mut povm = vec![ComplexMatrix::zeros(d, d); n];
    if active.len() <= 1 {
        let j = active.first().copied().unwrap_or(0);
        povm[j] = ComplexMatrix::identity(d);
        let value = decomp.unnormalized[j].trace().re;
        return GuessResult { p_guess: value, povm, residual: 0.0, dual_gap: None, iterations: 0, converged: true };
    }
    if active.len() == 2 && !opts.force_iterative {
        let (a, b) = (active[0], active[1]);
        let delta = (&decomp.unnormalized[a] - &decomp.unnormalized[b]).hermitian_part();
        let spec = qmat::eigh(&delta);
        let mut pos = ComplexMatrix::zeros(d, d);
        let mut norm1 = 0.0;
        for (k, &l) in spec.eigenvalues.iter().enumerate() {
            norm1 += l.abs();
            if l > 0.0 {
                pos += &ComplexMatrix::projector(&spec.eigenvector(k));
            }
        }
        let total = decomp.unnormalized[a].trace().re + decomp.unnormalized[b].trace().re;
        povm[b] = &ComplexMatrix::identity(d) - &pos;
        povm[a] = pos;
        return GuessResult {
            p_guess: 0.5 * (total + norm1),
            povm,
            residual: 0.0,
            dual_gap: None,
            iterations: 0,
            converged: true,
        };
    }
    iterative_guess(decomp, &active, opts)
}

// Fixed-point iteration Q_j ← G⁻¹ σ_j Q_j σ_j G⁻¹ with G = (Σ_k σ_k Q_k σ_k)^{1/2},
// run on the support of ρ_C, certified by a shifted dual point.
fn iterative_guess(decomp: &CqDecomposition, active: &[usize], opts: &GuessOptions) -> GuessResult {
    let d = decomp.cond_dim();
    let n = decomp.n();
    let rho_c = decomp.rho_c();
    let spec = qmat::eigh(rho_c.matrix());
    let r = spec.rank().max(1);
    let support: Vec<Vec<Complex64>> = (0..r).map(|k| spec.eigenvector(k)).collect();
    let u = ComplexMatrix::from_columns(&support);
    let ud = u.adjoint();
    let sig: Vec<ComplexMatrix> = active.iter().map(|&j| ud.matmul(&decomp.unnormalized[j]).matmul(&u).hermitian_part()).collect();
    let m = sig.len();
    let ident = ComplexMatrix::identity(r);

    // Pretty-good measurement as the starting point.
    let mut rc = ComplexMatrix::zeros(r, r);
    for s in &sig {
        rc += s;
    }
    let inv_sqrt = qmat::eigh(&rc).map(|l| if l > EIG_CUTOFF { 1.0 / l.sqrt() } else { 0.0 });
    let mut q: Vec<ComplexMatrix> = sig.iter().map(|s| inv_sqrt.matmul(s).matmul(&inv_sqrt).hermitian_part()).collect();
    complete(&mut q, &ident, 0);

    let heaviest = (0..m).max_by(|&x, &y| sig[x].trace().re.total_cmp(&sig[y].trace().re)).unwrap();
    let mut best_primal = f64::NEG_INFINITY;
    let mut best_q = q.clone();
    let mut best_dual = f64::INFINITY;
    let mut iterations = 0;
    let check_every = 5;
    let mut last_primal = f64::NEG_INFINITY;
    loop {
        if !opts.certify {
            let primal: f64 = sig.iter().zip(&q).map(|(s, qj)| s.trace_of_product(qj).re).sum();
            if primal > best_primal {
                best_primal = primal;
                best_q = q.clone();
            }
            if primal - last_primal <= opts.tolerance || iterations >= opts.max_iters {
                break;
            }
            last_primal = primal;
        } else if iterations % check_every == 0 || iterations >= opts.max_iters {
            let mut y = ComplexMatrix::zeros(r, r);
            for (s, qj) in sig.iter().zip(&q) {
                y += &s.matmul(qj);
            }
            let y = y.hermitian_part();
            let primal = y.trace().re;
            let mut shift = 0.0f64;
            for s in &sig {
                let lmin = *qmat::eigvalsh(&(&y - s)).last().unwrap();
                shift = shift.max(-lmin);
            }
            let dual = primal + r as f64 * shift;
            if primal > best_primal {
                best_primal = primal;
                best_q = q.clone();
            }
            best_dual = best_dual.min(dual);
            if best_dual - best_primal <= opts.tolerance || iterations >= opts.max_iters {
                break;
            }
        }
        iterations += 1;
        let mut a = ComplexMatrix::zeros(r, r);
        let prod: Vec<ComplexMatrix> = sig.iter().zip(&q).map(|(s, qj)| s.matmul(qj).matmul(s)).collect();
        for p in &prod {
            a += p;
        }
        let ginv = qmat::eigh(&a.hermitian_part()).map(|l| if l > EIG_CUTOFF { 1.0 / l.sqrt() } else { 0.0 });
        for (qj, p) in q.iter_mut().zip(&prod) {
            *qj = ginv.matmul(p).matmul(&ginv).hermitian_part();
        }
        complete(&mut q, &ident, heaviest);
    }
    let gap = if opts.certify { (best_dual - best_primal).max(0.0) } else { f64::NAN };
    let mut povm = vec![ComplexMatrix::zeros(d, d); n];
    for (i, &j) in active.iter().enumerate() {
        povm[j] = u.matmul(&best_q[i]).matmul(&ud);
    }
    // The kernel of ρ_C goes to the heaviest outcome.
    let kernel = &ComplexMatrix::identity(d) - &u.matmul(&ud);
    povm[active[heaviest]] += &kernel;
    GuessResult {
        p_guess: best_primal,
        povm,
        residual: gap,
        dual_gap: opts.certify.then_some(gap),
        iterations,
        converged: !opts.certify || gap <= GUESS_ACCEPT_GAP,
    }
}

// Restore Σ Q_j = I by adding the (PSD) deficit to one element.
fn complete(q: &mut [ComplexMatrix], ident: &ComplexMatrix, target: usize) {
    let mut s = ComplexMatrix::zeros(ident.rows(), ident.rows());
    for qj in q.iter() {
        s += qj;
    }
    let deficit = ident - &s;
    if deficit.max_abs() > 1e-14 {
        let fixed = (&q[target] + &deficit).hermitian_part();
        q[target] = fixed;
    }
}

/// `p_guess` for pure conditional states given as unnormalized vectors
/// `σ_{C,j} = w_j w_j†`, by the same fixed-point iteration as the general
/// solver. With rank-one states the measurement elements stay rank one and
/// the iteration reduces to weights `c_j ← c_j ⟨w_j|A^{-1/2}|w_j⟩²`,
/// `A = Σ_j c_j w_j w_j†`. Returns the primal value (a lower bound) without a
/// dual certificate; stops once it stalls within `tolerance`.
pub fn p_guess_pure(vectors: &[Vec<Complex64>], tolerance: f64, max_iters: usize) -> f64 {
    let active: Vec<&Vec<Complex64>> = vectors.iter().filter(|w| qmat::vec_norm(w).powi(2) > PROB_CUTOFF).collect();
    match active.len() {
        0 => return 0.0,
        1 => return qmat::vec_norm(active[0]).powi(2),
        _ => {}
    }
    let r = active[0].len();
    let quad = |m: &ComplexMatrix, w: &[Complex64]| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..r {
            let mut row = Complex64::new(0.0, 0.0);
            for b in 0..r {
                row += m[(a, b)] * w[b];
            }
            acc += w[a].conj() * row;
        }
        acc.re
    };
    let mut c = vec![1.0; active.len()];
    let mut best = f64::NEG_INFINITY;
    let mut last = f64::NEG_INFINITY;
    for _ in 0..max_iters.max(1) {
        let mut a = ComplexMatrix::zeros(r, r);
        for (w, &cj) in active.iter().zip(&c) {
            for x in 0..r {
                for y in 0..r {
                    a[(x, y)] += w[x] * w[y].conj() * cj;
                }
            }
        }
        let spec = qmat::eigh(&a);
        let top = spec.eigenvalues[0].max(f64::MIN_POSITIVE);
        let inv_sqrt = spec.map(|l| if l > EIG_CUTOFF * top { 1.0 / l.sqrt() } else { 0.0 });
        let kernel = spec.map(|l| if l > EIG_CUTOFF * top { 0.0 } else { 1.0 });
        let mut primal = 0.0;
        let mut spare = 0.0f64;
        for (w, cj) in active.iter().zip(c.iter_mut()) {
            let x = quad(&inv_sqrt, w);
            *cj *= x * x;
            primal += *cj;
            spare = spare.max(quad(&kernel, w));
        }
        // Leftover kernel of A goes to the outcome that gains most from it.
        let value = primal + spare;
        best = best.max(value);
        if (value - last).abs() <= tolerance {
            break;
        }
        last = value;
    }
    best
}

/// `H_min(Z|C) = −log₂ p_guess(Z|C)`.
pub fn h_min(decomp: &CqDecomposition) -> f64 {
    p_guess(decomp).h_min()
}

/// Which conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    Vn,
    Quad,
    Min,
}

/// The selected conditional entropy, with `ρ_C` taken from the decomposition.
pub fn cond_entropy(kind: EntropyKind, decomp: &CqDecomposition) -> f64 {
    match kind {
        EntropyKind::Vn => cond_entropy_vn(decomp),
        EntropyKind::Quad => decomp.rho_c().purity() - decomp.unnormalized.iter().map(qmat::purity).sum::<f64>(),
        EntropyKind::Min => h_min(decomp),
    }
}

/// Certainty counterparts: `log₂N − H`, `(N−1)Tr ρ_C² − N H_Q`, `log₂N − H_min`.
pub fn certainty(kind: EntropyKind, decomp: &CqDecomposition, rho_c: &DensityOperator) -> Result<f64> {
    let n = decomp.n() as f64;
    Ok(match kind {
        EntropyKind::Vn => n.log2() - cond_entropy_vn(decomp),
        EntropyKind::Quad => (n - 1.0) * rho_c.purity() - n * cond_entropy_quad(decomp, rho_c)?,
        EntropyKind::Min => n.log2() - h_min(decomp),
    })
}

/// `C_Q = N Tr(ρ̃_{M_Z C}²) − Tr(ρ_C²)`.
pub fn certainty_quad_purity(decomp: &CqDecomposition) -> f64 {
    let n = decomp.n() as f64;
    n * decomp.unnormalized.iter().map(qmat::purity).sum::<f64>() - decomp.rho_c().purity()
}

/// `C_Q = Σ_{j<k} D_HS(σ_{C,j}, σ_{C,k})`.
pub fn certainty_quad_pairwise(decomp: &CqDecomposition) -> f64 {
    pairwise_hs_sum(decomp)
}
