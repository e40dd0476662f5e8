//! Kraus channels in the two-time picture: Stinespring isometries,
//! complementary channels, the tripartite pure state of reference, output
//! and environment, and how well a channel preserves a type of information.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropies::{self, cq_decompose};
use crate::infotypes::{sample_equivalence_class, InfoType};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{DensityOperator, PureState};
use crate::theorems::{mean_and_stderr, sample_quad_certainties, VerificationReport};
use crate::{Error, Result};

/// Trace-preservation tolerance on `Σ_k K_k†K_k`.
pub const TP_TOL: f64 = 1e-9;
/// Tolerance for the exact identities checked on channels.
pub const CHANNEL_IDENTITY_TOL: f64 = 1e-9;

/// A trace-preserving map `ρ ↦ Σ_k K_k ρ K_k†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidArgument("Kraus operators must be nonempty".into()));
        }
        for (k, op) in kraus.iter().enumerate() {
            if op.rows() != d_out || op.cols() != d_in {
                return Err(Error::DimMismatch(alloc::format!(
                    "Kraus operator {k} is {}x{}, expected {d_out}x{d_in}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for op in &kraus {
            sum += &op.adjoint().matmul(op);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(d_in));
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving(deviation));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Environment dimension (the Kraus count).
    pub fn d_env(&self) -> usize {
        self.kraus.len()
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![ComplexMatrix::identity(d)], d_in: d, d_out: d }
    }

    /// Qubit phase flip: `σ_z` applied with probability `p`.
    pub fn phase_flip(p: f64) -> Result<Self> {
        check_probability(p)?;
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        Self::new(vec![ComplexMatrix::identity(2).scale((1.0 - p).sqrt()), z.scale(p.sqrt())])
    }

    /// `ρ ↦ (1 − p) ρ + p Σ_j |j⟩⟨j| ρ |j⟩⟨j|` in the standard basis.
    pub fn dephasing(d: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let mut kraus = vec![ComplexMatrix::identity(d).scale((1.0 - p).sqrt())];
        for j in 0..d {
            let mut diag = vec![0.0; d];
            diag[j] = p.sqrt();
            kraus.push(ComplexMatrix::from_real_diag(&diag));
        }
        Self::new(kraus)
    }

    /// `ρ ↦ (1 − p) ρ + p I/d`, with the `d²` Weyl operators as Kraus set.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let dd = (d * d) as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 { (1.0 - p + p / dd).sqrt() } else { (p / dd).sqrt() };
                kraus.push(weyl(d, a, b).scale(w));
            }
        }
        Self::new(kraus)
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += &k.matmul(rho).matmul(&k.adjoint());
        }
        out
    }

    /// `V = Σ_k K_k ⊗ |k⟩` with output-major rows `(o, k)`.
    pub fn stinespring(&self) -> ComplexMatrix {
        let ne = self.d_env();
        ComplexMatrix::from_fn(self.d_out * ne, self.d_in, |row, i| self.kraus[row % ne][(row / ne, i)])
    }

    /// The complementary channel `ρ ↦ Tr_out[V ρ V†]`.
    pub fn complementary(&self) -> Self {
        let ne = self.d_env();
        let kraus = (0..self.d_out)
            .map(|o| ComplexMatrix::from_fn(ne, self.d_in, |k, i| self.kraus[k][(o, i)]))
            .collect();
        Self { kraus, d_in: self.d_in, d_out: ne }
    }

    /// `Σ_{j≠k} ‖E(|x_j⟩⟨x_k|)‖²` over the columns of `basis`.
    pub fn off_diagonal_transmission(&self, basis: &ComplexMatrix) -> f64 {
        let d = basis.cols();
        let mut acc = 0.0;
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    let op = ComplexMatrix::outer(&basis.column(j), &basis.column(k));
                    acc += self.apply(&op).norm_sqr();
                }
            }
        }
        acc
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(alloc::format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `X^a Z^b` with `X|j⟩ = |j+1⟩` and `Z|j⟩ = ω^j |j⟩`.
fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let w = 2.0 * core::f64::consts::PI / d as f64;
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + a) % d {
            Complex64::from_polar(1.0, w * (b * c) as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `|Ω⟩ = (I ⊗ V)|Φ⟩` on reference `S₀`, output `S₁` and environment `E₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiTriple {
    pub omega: PureState,
}

impl ChoiTriple {
    pub const REFERENCE: usize = 0;
    pub const OUTPUT: usize = 1;
    pub const ENVIRONMENT: usize = 2;

    pub fn dims(&self) -> &[usize] {
        self.omega.dims()
    }

    pub fn density(&self) -> DensityOperator {
        self.omega.density()
    }

    /// `ρ_{S₀S₁}`, the normalized Choi state.
    pub fn choi_state(&self) -> Result<DensityOperator> {
        self.density().partial_trace(&[Self::REFERENCE, Self::OUTPUT])
    }
}

pub fn choi_triple(ch: &QuantumChannel) -> Result<ChoiTriple> {
    let (d, d_out, ne) = (ch.d_in, ch.d_out, ch.d_env());
    let s = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d_out * ne];
    for a in 0..d {
        for o in 0..d_out {
            for (k, op) in ch.kraus.iter().enumerate() {
                amps[(a * d_out + o) * ne + k] = op[(o, a)] * s;
            }
        }
    }
    Ok(ChoiTriple { omega: PureState::normalized(amps, vec![d, d_out, ne])? })
}

/// `(I ⊗ E)(|Φ⟩⟨Φ|)` assembled block by block from the Kraus form.
pub fn choi_state_direct(ch: &QuantumChannel) -> Result<DensityOperator> {
    let (d, d_out) = (ch.d_in, ch.d_out);
    let mut m = ComplexMatrix::zeros(d * d_out, d * d_out);
    for a in 0..d {
        for b in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(a, b)] = Complex64::new(1.0 / d as f64, 0.0);
            let block = ch.apply(&e);
            for r in 0..d_out {
                for c in 0..d_out {
                    m[(a * d_out + r, b * d_out + c)] = block[(r, c)];
                }
            }
        }
    }
    DensityOperator::new(m, vec![d, d_out])
}

/// Where the information is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoLocation {
    /// `H(Z|S₁)`: how much of `Z` the output misses.
    KeptByOutput,
    /// `H(Z|E₁)`: how much of `Z` the environment misses, which is the
    /// relative-entropy distance of the channel from a `Z`-decohering one.
    LeakedToEnv,
}

/// Conditional von Neumann entropy of `Z` on the reference given the output
/// or the environment.
pub fn channel_info(ch: &QuantumChannel, z: &InfoType, which: InfoLocation) -> Result<f64> {
    if z.dim() != ch.d_in || z.subsystem() != ChoiTriple::REFERENCE {
        return Err(Error::DimMismatch(alloc::format!(
            "information type of dimension {} on factor {} for a channel with input dimension {}",
            z.dim(),
            z.subsystem(),
            ch.d_in
        )));
    }
    let keep = match which {
        InfoLocation::KeptByOutput => ChoiTriple::OUTPUT,
        InfoLocation::LeakedToEnv => ChoiTriple::ENVIRONMENT,
    };
    let triple = choi_triple(ch)?;
    Ok(entropies::cond_entropy_vn(&cq_decompose(&triple.density(), z, &[keep])?))
}

/// How well a channel preserves the off-diagonals of `Z`, computed three ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceProfile {
    /// `(1/d²) Σ_{j≠k} ‖E(|j⟩⟨k|)‖²` from the Kraus form.
    pub off_diagonal: f64,
    /// `H_Q(Z|E₁)` on the Choi triple.
    pub quad_entropy_env: f64,
    /// Sampled `⟨C_Q(W|S₁)⟩` over the class unbiased to `Z`.
    pub mean_certainty_output: f64,
    pub standard_error: f64,
    pub checks: Vec<VerificationReport>,
}

pub fn decoherence_profile(
    ch: &QuantumChannel,
    z: &InfoType,
    samples: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<DecoherenceProfile> {
    let basis = z.basis().ok_or(Error::NotRankOne(z.n()))?;
    if z.dim() != ch.d_in || z.subsystem() != ChoiTriple::REFERENCE {
        return Err(Error::DimMismatch(alloc::format!("information type of dimension {} for input dimension {}", z.dim(), ch.d_in)));
    }
    let d = ch.d_in as f64;
    // The reference carries the transpose, so the Kraus route uses conjugated vectors.
    let off_diagonal = ch.off_diagonal_transmission(&basis.conj()) / (d * d);
    let triple = choi_triple(ch)?;
    let omega = triple.density();
    let decomp = cq_decompose(&omega, z, &[ChoiTriple::ENVIRONMENT])?;
    let quad_entropy_env = entropies::cond_entropy_quad(&decomp, &decomp.rho_c())?;
    let xs = sample_quad_certainties(&triple.choi_state()?, z, None, samples, rng)?;
    let (mean, se) = mean_and_stderr(&xs);
    let checks = vec![
        VerificationReport::equality("channel.off_diagonal", off_diagonal, quad_entropy_env, CHANNEL_IDENTITY_TOL),
        VerificationReport::equality("channel.class_average", mean, quad_entropy_env, 3.0 * se + CHANNEL_IDENTITY_TOL)
            .with("standard_error", se)
            .with("samples", samples as f64),
    ];
    Ok(DecoherenceProfile { off_diagonal, quad_entropy_env, mean_certainty_output: mean, standard_error: se, checks })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    qmat::eta(p) + qmat::eta(1.0 - p)
}

/// Checks for a qubit phase flip: `H(Z|E₁) = 1 − H_bin(p)` for the standard
/// basis and `H(W|E₁) = 1` for `mu_bases` random members of the unbiased class.
pub fn phase_flip_reports(p: f64, mu_bases: usize, rng: &mut (impl Rng + ?Sized)) -> Result<Vec<VerificationReport>> {
    let ch = QuantumChannel::phase_flip(p)?;
    let z = InfoType::standard(2, 0);
    let hz = channel_info(&ch, &z, InfoLocation::LeakedToEnv)?;
    let mut out = vec![VerificationReport::equality("phase_flip.leaked_standard", hz, 1.0 - binary_entropy(p), CHANNEL_IDENTITY_TOL)
        .with("p", p)];
    for _ in 0..mu_bases {
        let w = sample_equivalence_class(&z, None, false, rng)?.basis();
        let hw = channel_info(&ch, &w, InfoLocation::LeakedToEnv)?;
        out.push(VerificationReport::equality("phase_flip.leaked_unbiased", hw, 1.0, CHANNEL_IDENTITY_TOL).with("p", p));
    }
    Ok(out)
}

/// Uncertainty tradeoff on a channel: `H(Z|E₁) ≥ log₂ d − H(W|S₁)` for `W`
/// unbiased to `Z`.
pub fn tradeoff_report(ch: &QuantumChannel, z: &InfoType, w: &InfoType) -> Result<VerificationReport> {
    let leaked = channel_info(ch, z, InfoLocation::LeakedToEnv)?;
    let kept = channel_info(ch, w, InfoLocation::KeptByOutput)?;
    let certainty = (ch.d_in as f64).log2() - kept;
    Ok(VerificationReport::at_least("channel.tradeoff", leaked, certainty, 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::FidelityOptions;
    use crate::states::{random_state, RandomKind};
    use crate::theorems::verify_thm1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn channels() -> Vec<QuantumChannel> {
        vec![
            QuantumChannel::identity(2),
            QuantumChannel::phase_flip(0.25).unwrap(),
            QuantumChannel::dephasing(3, 0.6).unwrap(),
            QuantumChannel::depolarizing(2, 0.3).unwrap(),
            QuantumChannel::depolarizing(3, 1.0).unwrap(),
        ]
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = ComplexMatrix::identity(2).scale(0.9);
        assert!(matches!(QuantumChannel::new(vec![k]), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn stinespring_pair_reproduces_both_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ch in channels() {
            let v = ch.stinespring();
            let rho = random_state(RandomKind::GinibreMixed, &[ch.d_in()], None, &mut rng).unwrap();
            let joint = DensityOperator::new(v.matmul(rho.matrix()).matmul(&v.adjoint()), vec![ch.d_out(), ch.d_env()]).unwrap();
            let out = joint.partial_trace(&[0]).unwrap();
            let env = joint.partial_trace(&[1]).unwrap();
            assert!(out.matrix().max_abs_diff(&ch.apply(rho.matrix())) < 1e-10);
            assert!(env.matrix().max_abs_diff(&ch.complementary().apply(rho.matrix())) < 1e-10);
        }
    }

    #[test]
    fn choi_triple_marginals() {
        for ch in channels() {
            let t = choi_triple(&ch).unwrap();
            let reference = t.density().partial_trace(&[0]).unwrap();
            let d = ch.d_in();
            assert!(reference.matrix().max_abs_diff(&ComplexMatrix::identity(d).scale(1.0 / d as f64)) < 1e-9);
            assert!(t.choi_state().unwrap().matrix().max_abs_diff(choi_state_direct(&ch).unwrap().matrix()) < 1e-10);
        }
        let t = choi_triple(&QuantumChannel::depolarizing(2, 1.0).unwrap()).unwrap();
        assert!(t.choi_state().unwrap().matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-12);
    }

    #[test]
    fn phase_flip_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
            for r in phase_flip_reports(p, 5, &mut rng).unwrap() {
                assert!(r.passed, "{r:?}");
            }
        }
        let z = InfoType::standard(2, 0);
        let at = |p| channel_info(&QuantumChannel::phase_flip(p).unwrap(), &z, InfoLocation::LeakedToEnv).unwrap();
        assert!((at(0.0) - 1.0).abs() < 1e-12 && at(0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_channel_leaks_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = InfoType::random_basis(3, 0, &mut rng);
        let h = channel_info(&QuantumChannel::identity(3), &z, InfoLocation::LeakedToEnv).unwrap();
        assert!((h - 3f64.log2()).abs() < 1e-10);
        let prof = decoherence_profile(&QuantumChannel::identity(2), &InfoType::standard(2, 0), 500, &mut rng).unwrap();
        assert!((prof.off_diagonal - 0.5).abs() < 1e-12 && (prof.quad_entropy_env - 0.5).abs() < 1e-12);
    }

    #[test]
    fn profiles_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let full = decoherence_profile(&QuantumChannel::dephasing(2, 1.0).unwrap(), &InfoType::standard(2, 0), 200, &mut rng).unwrap();
        assert!(full.off_diagonal.abs() < 1e-12 && full.quad_entropy_env.abs() < 1e-12 && full.mean_certainty_output.abs() < 1e-12);
        for ch in channels() {
            let z = InfoType::random_basis(ch.d_in(), 0, &mut rng);
            let prof = decoherence_profile(&ch, &z, 2000, &mut rng).unwrap();
            for c in &prof.checks {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn triples_satisfy_identities_and_tradeoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ch in channels() {
            let t = choi_triple(&ch).unwrap();
            let z = InfoType::random_basis(ch.d_in(), 0, &mut rng);
            for r in verify_thm1(&t.density(), &z, &FidelityOptions::default(), &mut rng).unwrap() {
                assert!(r.passed, "{r:?}");
            }
            let w = sample_equivalence_class(&z, None, false, &mut rng).unwrap().basis();
            assert!(tradeoff_report(&ch, &z, &w).unwrap().passed);
        }
    }
}
