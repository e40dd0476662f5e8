//! Secure bits extracted from measurement outcomes against an adversary
//! holding the purification: asymptotic rates, single-shot hashing lengths,
//! the equality of three decoherence-detection exponents, and the
//! mixed-strategy bound.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::discord::{deficit, min_entropy_discord, two_way_discord, BasisOptimizerConfig};
use crate::entropies::{self, cq_decompose, p_guess, EntropyKind};
use crate::infotypes::{pinch, InfoType};
use crate::qmat;
use crate::states::{purify, DensityOperator};
use crate::theorems::{measurement_coherent_information, VerificationReport};
use crate::{Error, Result};

/// Tolerance of the exponent equalities.
pub const TRIANGLE_TOL: f64 = 1e-8;
/// Slack of the mixed-strategy inequality.
pub const MIXED_SLACK: f64 = 1e-8;
// Guards the floor against H_min landing a rounding error below an integer.
const FLOOR_GUARD: f64 = 1e-9;

/// Who picks the measured type of information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "basis")]
pub enum SecurityMode {
    /// `Z` on `A` is fixed in advance.
    FixedBasis(InfoType),
    /// The adversary picks the basis on `A`.
    AdversarialOneWay,
    /// The adversary picks a product basis on `A ⊗ B`.
    AdversarialTwoWay,
}

impl SecurityMode {
    pub fn name(&self) -> &'static str {
        match self {
            SecurityMode::FixedBasis(_) => "fixed_basis",
            SecurityMode::AdversarialOneWay => "adversarial_one_way",
            SecurityMode::AdversarialTwoWay => "adversarial_two_way",
        }
    }
}

/// Hashing outcome for a target distance parameter `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleShot {
    pub distance_param: f64,
    pub h_min: f64,
    /// `ℓ = ⌊H_min − 2 log₂(1/(2Δ))⌋`, clamped at zero.
    pub length: u64,
    /// The unfloored, unclamped length.
    pub length_exact: f64,
    /// `ℓ_exact + 2 log₂(1/(2Δ))`, which recovers the min-entropy.
    pub identity_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub mode: String,
    /// Secure bits per copy, `H(Z|C)` for the chosen or adversarial `Z`.
    pub asymptotic_rate: Option<f64>,
    pub single_shot: Option<SingleShot>,
    pub adversarial_basis: InfoType,
    pub adversarial_basis_b: Option<InfoType>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl SecurityReport {
    fn new(mode: &SecurityMode, basis: InfoType, basis_b: Option<InfoType>) -> Self {
        Self {
            mode: mode.name().to_string(),
            asymptotic_rate: None,
            single_shot: None,
            adversarial_basis: basis,
            adversarial_basis_b: basis_b,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn single_shot_length(&self) -> Option<u64> {
        self.single_shot.as_ref().map(|s| s.length)
    }
}

fn purified(rho_ab: &DensityOperator) -> Result<DensityOperator> {
    if rho_ab.dims().len() != 2 {
        return Err(Error::NotBipartite(rho_ab.dims().len()));
    }
    Ok(purify(rho_ab).density())
}

fn check_fixed(rho_ab: &DensityOperator, z: &InfoType) -> Result<()> {
    if z.subsystem() != 0 || z.dim() != rho_ab.dims()[0] {
        return Err(Error::DimMismatch(alloc::format!(
            "information type of dimension {} on factor {} for A of dimension {}",
            z.dim(),
            z.subsystem(),
            rho_ab.dims()[0]
        )));
    }
    Ok(())
}

/// `H(Z|C)` with `C` purifying `ρ_AB`, for the fixed or adversarial `Z`.
pub fn secure_rate(rho_ab: &DensityOperator, mode: &SecurityMode, cfg: &BasisOptimizerConfig) -> Result<SecurityReport> {
    match mode {
        SecurityMode::FixedBasis(z) => {
            let psi = purified(rho_ab)?;
            check_fixed(rho_ab, z)?;
            let rate = entropies::cond_entropy_vn(&cq_decompose(&psi, z, &[2])?);
            let mut r = SecurityReport::new(mode, z.clone(), None);
            r.asymptotic_rate = Some(rate);
            Ok(r)
        }
        SecurityMode::AdversarialOneWay => {
            let d = deficit(rho_ab, cfg, &[])?;
            let mut r = SecurityReport::new(mode, d.argmin_basis.clone(), None);
            r.asymptotic_rate = Some(d.value);
            r.diagnostics = d.optimizer_diag;
            Ok(r)
        }
        SecurityMode::AdversarialTwoWay => {
            let d = two_way_discord(rho_ab, EntropyKind::Vn, cfg, &[])?;
            let mut r = SecurityReport::new(mode, d.argmin_basis.clone(), d.argmin_basis_b.clone());
            r.asymptotic_rate = Some(d.value);
            r.diagnostics = d.optimizer_diag;
            Ok(r)
        }
    }
}

/// Hash length for a two-universal family at distance parameter `delta`.
pub fn hash_length(h_min: f64, delta: f64) -> Result<SingleShot> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::BadDelta(delta));
    }
    let penalty = 2.0 * (1.0 / (2.0 * delta)).log2();
    let length_exact = h_min - penalty;
    let length = (length_exact + FLOOR_GUARD).floor().max(0.0) as u64;
    Ok(SingleShot { distance_param: delta, h_min, length, length_exact, identity_value: length_exact + penalty })
}

/// Single-shot secure length from `H_min(Z|C)` under the selected mode.
pub fn single_shot_length(
    rho_ab: &DensityOperator,
    delta: f64,
    mode: &SecurityMode,
    cfg: &BasisOptimizerConfig,
) -> Result<SecurityReport> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::BadDelta(delta));
    }
    let mut report = match mode {
        SecurityMode::FixedBasis(z) => {
            let psi = purified(rho_ab)?;
            check_fixed(rho_ab, z)?;
            let g = p_guess(&cq_decompose(&psi, z, &[2])?);
            let mut r = SecurityReport::new(mode, z.clone(), None);
            r.diagnostics.insert("p_guess_dual_gap".into(), g.residual);
            r.single_shot = Some(hash_length(g.h_min(), delta)?);
            r
        }
        SecurityMode::AdversarialOneWay => {
            let m = min_entropy_discord(rho_ab, cfg, &[])?;
            let mut r = SecurityReport::new(mode, m.d_min.argmin_basis.clone(), None);
            let shot = hash_length(m.d_min.value, delta)?;
            r.diagnostics = m.d_min.optimizer_diag.clone();
            r.diagnostics.insert("identity_gap".into(), (shot.identity_value - m.d_min.value).abs());
            r.single_shot = Some(shot);
            r
        }
        SecurityMode::AdversarialTwoWay => {
            let m = two_way_discord(rho_ab, EntropyKind::Min, cfg, &[])?;
            let mut r = SecurityReport::new(mode, m.argmin_basis.clone(), m.argmin_basis_b.clone());
            r.single_shot = Some(hash_length(m.value, delta)?);
            r.diagnostics = m.optimizer_diag;
            r
        }
    };
    report.diagnostics.insert("distance_param".into(), delta);
    Ok(report)
}

/// Three exponents for detecting whether `ρ_AB` was decohered in `Z`, all in
/// bits, and the common error probability `2^{−n·rate}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTriangle {
    /// `D(ρ_AB ‖ E_Z(ρ_AB))`.
    pub discrimination: f64,
    /// `−H(M_Z|AB)`, the entanglement generated by measuring `Z` coherently.
    pub entanglement: f64,
    /// `H(Z|C)`, the secure-bit rate.
    pub secure_bits: f64,
    pub copies: u32,
    pub probability: f64,
    pub check: VerificationReport,
}

pub fn task_triangle(rho_ab: &DensityOperator, z: &InfoType, copies: u32) -> Result<TaskTriangle> {
    if copies == 0 {
        return Err(Error::InvalidArgument("the copy count must be at least 1".into()));
    }
    let psi = purified(rho_ab)?;
    psi.require_pure()?;
    check_fixed(rho_ab, z)?;
    let pinched = pinch(rho_ab, z)?;
    let discrimination = qmat::relative_entropy(rho_ab.matrix(), pinched.matrix());
    let entanglement = measurement_coherent_information(rho_ab, z)?;
    let secure_bits = entropies::cond_entropy_vn(&cq_decompose(&psi, z, &[2])?);
    let values = [discrimination, entanglement, secure_bits];
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let check = VerificationReport::from_gap("task_triangle", discrimination, secure_bits, hi - lo, TRIANGLE_TOL)
        .with("entanglement", entanglement);
    let probability = (-(copies as f64) * secure_bits).exp2();
    Ok(TaskTriangle { discrimination, entanglement, secure_bits, copies, probability, check })
}

/// `Σ_i p_i H(X_i|C) ≥ min_Z H(Z|C)`: randomizing the measured basis never
/// beats the best single basis.
pub fn mixed_strategy_report(
    rho_ab: &DensityOperator,
    bases: &[InfoType],
    weights: &[f64],
    cfg: &BasisOptimizerConfig,
) -> Result<VerificationReport> {
    if bases.is_empty() || bases.len() != weights.len() {
        return Err(Error::InvalidArgument(alloc::format!("{} bases with {} weights", bases.len(), weights.len())));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(alloc::format!("weights must be a probability vector (sum {total})")));
    }
    let psi = purified(rho_ab)?;
    let mut mixture = 0.0;
    let mut seeds = Vec::with_capacity(bases.len());
    for (x, &p) in bases.iter().zip(weights) {
        check_fixed(rho_ab, x)?;
        mixture += p * entropies::cond_entropy_vn(&cq_decompose(&psi, x, &[2])?);
        if let Some(b) = x.basis() {
            seeds.push(b.clone());
        }
    }
    let best = deficit(rho_ab, cfg, &seeds)?;
    Ok(VerificationReport::at_least("mixed_strategy", mixture, best.value, MIXED_SLACK).with("strategies", bases.len() as f64))
}

/// Reports for the exponent triangle and the mixed-strategy bound on one
/// state, with `mixtures` random mixtures of `strategies` random bases.
pub fn operational_reports(
    rho_ab: &DensityOperator,
    z: &InfoType,
    mixtures: usize,
    strategies: usize,
    cfg: &BasisOptimizerConfig,
    rng: &mut (impl rand::Rng + ?Sized),
) -> Result<Vec<VerificationReport>> {
    let mut out = vec![task_triangle(rho_ab, z, 1)?.check];
    let da = rho_ab.dims()[0];
    let mut pool = Vec::with_capacity(mixtures * strategies);
    let mut weights = Vec::with_capacity(mixtures);
    for _ in 0..mixtures {
        let bases: Vec<InfoType> = (0..strategies).map(|_| InfoType::random_basis(da, 0, rng)).collect();
        let raw: Vec<f64> = (0..strategies).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        weights.push(raw.iter().map(|w| w / s).collect::<Vec<f64>>());
        pool.push(bases);
    }
    // One minimization seeded with every strategy serves all mixtures.
    let seeds: Vec<_> = pool.iter().flatten().filter_map(|b| b.basis().cloned()).collect();
    let best = deficit(rho_ab, cfg, &seeds)?.value;
    let psi = purified(rho_ab)?;
    for (bases, w) in pool.iter().zip(&weights) {
        let mut mixture = 0.0;
        for (x, p) in bases.iter().zip(w) {
            mixture += p * entropies::cond_entropy_vn(&cq_decompose(&psi, x, &[2])?);
        }
        out.push(VerificationReport::at_least("mixed_strategy", mixture, best, MIXED_SLACK).with("strategies", strategies as f64));
    }
    Ok(out)
}
