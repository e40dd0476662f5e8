//! Maximization of `F(ρ, Φ(σ))` over states `σ` for a linear map `Φ`, by
//! L-BFGS on a factor `σ = LL†/Tr(LL†)`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::infotypes::{measurement_isometry, pinch_matrix, InfoType};
use crate::optim::{lbfgs, LbfgsOptions};
use crate::qmat::{self, ComplexMatrix, EIG_CUTOFF};
use crate::{Error, Result};

/// A linear map on matrices together with its Hilbert–Schmidt adjoint.
pub trait LinearMap {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix;
    fn adjoint(&self, y: &ComplexMatrix) -> ComplexMatrix;
}

/// `σ ↦ Σ_j Z_j σ Z_j` on a multipartite space (self-adjoint).
#[derive(Debug, Clone)]
pub struct Pinching {
    dims: Vec<usize>,
    z: InfoType,
}

impl Pinching {
    pub fn new(dims: &[usize], z: &InfoType) -> Result<Self> {
        z.check_on(dims)?;
        Ok(Self { dims: dims.to_vec(), z: z.clone() })
    }
}

impl LinearMap for Pinching {
    fn dim_in(&self) -> usize {
        self.dims.iter().product()
    }
    fn dim_out(&self) -> usize {
        self.dim_in()
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        pinch_matrix(x, &self.dims, &self.z)
    }
    fn adjoint(&self, y: &ComplexMatrix) -> ComplexMatrix {
        pinch_matrix(y, &self.dims, &self.z)
    }
}

/// `σ ↦ V_Z (Σ_j Z_j σ Z_j) V_Z†` with the register placed before factor `Z`
/// acts on.
#[derive(Debug, Clone)]
pub struct LiftedPinching {
    pinching: Pinching,
    v: ComplexMatrix,
}

impl LiftedPinching {
    pub fn new(dims: &[usize], z: &InfoType) -> Result<Self> {
        let pinching = Pinching::new(dims, z)?;
        let a = z.subsystem();
        let before: usize = dims[..a].iter().product();
        let after: usize = dims[a + 1..].iter().product();
        let v = ComplexMatrix::identity(before).kron(&measurement_isometry(z)).kron(&ComplexMatrix::identity(after));
        Ok(Self { pinching, v })
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.v
    }
}

impl LinearMap for LiftedPinching {
    fn dim_in(&self) -> usize {
        self.v.cols()
    }
    fn dim_out(&self) -> usize {
        self.v.rows()
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.v.matmul(&self.pinching.apply(x)).matmul(&self.v.adjoint())
    }
    fn adjoint(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.pinching.adjoint(&self.v.adjoint().matmul(y).matmul(&self.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityOptions {
    /// Random starts in addition to the two deterministic ones.
    pub restarts: usize,
    pub max_iters: usize,
    pub g_tol: f64,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        Self { restarts: 2, max_iters: 3000, g_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    /// Best `F(ρ, Φ(σ))` found (a lower bound on the maximum).
    pub fidelity: f64,
    pub sigma: ComplexMatrix,
    pub iterations: usize,
    /// Gradient norm at exit of the best run.
    pub residual: f64,
    pub converged: bool,
}

// √F(ρ, τ) = Tr (K†τK)^{1/2} with ρ = KK†, K spanning the support of ρ.
struct Target {
    k: ComplexMatrix,
    kd: ComplexMatrix,
}

impl Target {
    fn new(rho: &ComplexMatrix) -> Self {
        let spec = qmat::eigh(&rho.hermitian_part());
        let cols: Vec<Vec<Complex64>> = (0..spec.rank().max(1))
            .map(|i| {
                let s = spec.eigenvalues[i].max(0.0).sqrt();
                spec.eigenvector(i).into_iter().map(|x| x * s).collect()
            })
            .collect();
        let k = ComplexMatrix::from_columns(&cols);
        let kd = k.adjoint();
        Self { k, kd }
    }

    // Root fidelity and its gradient `½ K M^{-1/2} K†` with respect to τ.
    fn root_fidelity_grad(&self, tau: &ComplexMatrix) -> (f64, ComplexMatrix) {
        let m = self.kd.matmul(tau).matmul(&self.k).hermitian_part();
        let spec = qmat::eigh(&m);
        let value = spec.eigenvalues.iter().map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 }).sum();
        let inv_sqrt = spec.map(|l| if l > EIG_CUTOFF { 0.5 / l.sqrt() } else { 0.0 });
        (value, self.k.matmul(&inv_sqrt).matmul(&self.kd))
    }
}

fn pack(l: &ComplexMatrix) -> Vec<f64> {
    l.data().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unpack(x: &[f64], d: usize) -> ComplexMatrix {
    let data = x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    ComplexMatrix::new(d, d, data).expect("parameter length matches")
}

/// `max_σ F(ρ, Φ(σ))` over density operators `σ` on the input space of `Φ`.
pub fn max_fidelity<M: LinearMap + ?Sized>(
    rho: &ComplexMatrix,
    map: &M,
    opts: &FidelityOptions,
    rng: &mut (impl Rng + ?Sized),
) -> Result<FidelityResult> {
    if !rho.is_square() || rho.rows() != map.dim_out() {
        return Err(Error::DimMismatch(alloc::format!(
            "target is {}x{}, map output dimension {}",
            rho.rows(),
            rho.cols(),
            map.dim_out()
        )));
    }
    let d = map.dim_in();
    let target = Target::new(rho);
    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let l = unpack(x, d);
        let t = l.norm_sqr();
        let sigma = l.matmul(&l.adjoint()).scale(1.0 / t);
        let (value, grad_tau) = target.root_fidelity_grad(&map.apply(&sigma));
        let gs = map.adjoint(&grad_tau).hermitian_part();
        let inner = gs.trace_of_product(&sigma).re;
        let gl = &gs.matmul(&l) - &l.scale(inner);
        for (slot, z) in g.chunks_exact_mut(2).zip(gl.data()) {
            // Gradient of the negated objective.
            slot[0] = -2.0 * z.re / t;
            slot[1] = -2.0 * z.im / t;
        }
        -value
    };

    let mut starts = Vec::with_capacity(opts.restarts + 2);
    // A start from Φ†(ρ), which is close to optimal for near-fixed points.
    let pulled = map.adjoint(rho).hermitian_part();
    let shifted = &pulled + &ComplexMatrix::identity(d).scale(1e-3 / d as f64);
    starts.push(qmat::sqrt_psd(&shifted));
    starts.push(ComplexMatrix::identity(d));
    for _ in 0..opts.restarts {
        starts.push(ComplexMatrix::from_fn(d, d, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        }));
    }

    let lopts = LbfgsOptions { max_iters: opts.max_iters, g_tol: opts.g_tol, ..Default::default() };
    let mut best: Option<FidelityResult> = None;
    for l0 in starts {
        let m = lbfgs(objective, &pack(&l0), &lopts);
        let root = -m.value;
        if best.as_ref().is_none_or(|b| root * root > b.fidelity) {
            let l = unpack(&m.x, d);
            let sigma = l.matmul(&l.adjoint()).scale(1.0 / l.norm_sqr());
            best = Some(FidelityResult {
                fidelity: root * root,
                sigma,
                iterations: m.iterations,
                residual: m.residual,
                converged: m.converged,
            });
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::{cq_decompose, p_guess};
    use crate::states::{purify, random_state, RandomKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adjoints_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = InfoType::random_basis(3, 0, &mut rng);
        let dims = [3, 2];
        let lifted = LiftedPinching::new(&dims, &z).unwrap();
        let x = random_state(RandomKind::GinibreMixed, &dims, None, &mut rng).unwrap();
        let y = random_state(RandomKind::GinibreMixed, &[18], None, &mut rng).unwrap();
        let lhs = lifted.apply(x.matrix()).hs_inner(y.matrix());
        let rhs = x.matrix().hs_inner(&lifted.adjoint(y.matrix()));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn matches_guessing_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let rho_ab = random_state(RandomKind::GinibreMixed, &[2, 2], Some(2), &mut rng).unwrap();
            let z = InfoType::random_basis(2, 0, &mut rng);
            let psi = purify(&rho_ab).density();
            let pg = p_guess(&cq_decompose(&psi, &z, &[2]).unwrap()).p_guess;
            let f = max_fidelity(rho_ab.matrix(), &Pinching::new(&[2, 2], &z).unwrap(), &Default::default(), &mut rng).unwrap();
            assert!((f.fidelity - pg).abs() < 1e-6, "{} vs {pg}", f.fidelity);
            let lifted = LiftedPinching::new(&[2, 2], &z).unwrap();
            let v = lifted.isometry();
            let rt = v.matmul(rho_ab.matrix()).matmul(&v.adjoint());
            let g = max_fidelity(&rt, &lifted, &Default::default(), &mut rng).unwrap();
            assert!((g.fidelity - pg).abs() < 1e-6, "{} vs {pg}", g.fidelity);
        }
    }
}
