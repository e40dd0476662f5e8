//! Verification suites over seeded ensembles.
//!
//! Each suite maps an instance index to a list of [`VerificationReport`]s.
//! Instances are independent and drawn from their own random stream (see
//! [`crate::ensemble`]), so a suite's output is a pure function of its
//! [`EnsembleSpec`].

use decolab_core::channels::{self, ChoiTriple, InfoLocation, QuantumChannel};
use decolab_core::discord::BasisOptimizerConfig;
use decolab_core::entropies::{self, cq_decompose, EntropyKind};
use decolab_core::fidelity::FidelityOptions;
use decolab_core::infotypes::{self, coarse_grain, fourier_mu_basis};
use decolab_core::qmat::{self, ComplexMatrix};
use decolab_core::security;
use decolab_core::states::{haar_unitary, haar_vector, purify, random_pure, random_state, RandomKind};
use decolab_core::theorems::{self, SamplingOptions, VerificationReport, INEQUALITY_SLACK};
use decolab_core::{Complex64, DensityOperator, InfoType, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ensemble;

/// Phase-flip probabilities of the built-in channel sweep.
pub const PHASE_FLIP_GRID: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

/// Threshold below which a conditional entropy counts as zero.
pub const ZERO_ENTROPY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Thm1,
    Thm2,
    Thm3,
    Corollary,
    Inequalities,
    Channels,
    Eq20,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Thm1 => "thm1",
            Suite::Thm2 => "thm2",
            Suite::Thm3 => "thm3",
            Suite::Corollary => "corollary",
            Suite::Inequalities => "inequalities",
            Suite::Channels => "channels",
            Suite::Eq20 => "eq20",
        }
    }

    /// Factor dimensions used when none are given.
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            Suite::Eq20 => vec![2, 2],
            Suite::Channels => vec![2],
            _ => vec![2, 2, 2],
        }
    }
}

/// Everything that determines a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub dims: Vec<usize>,
    /// Random rank-one information types per state.
    pub bases: usize,
    /// Coarse-grained information types per state.
    pub coarse: usize,
    /// Class samples for Monte Carlo averages.
    pub samples: usize,
    pub sigmas: f64,
    /// Random unbiased bases per uncertainty or channel check.
    pub mu_bases: usize,
    /// Random mixtures per state in the mixed-strategy check.
    pub mixtures: usize,
    pub seed: u64,
    pub optimizer: BasisOptimizerConfig,
    pub fidelity: FidelityOptions,
}

impl EnsembleSpec {
    pub fn new(suite: Suite, count: usize, seed: u64) -> Self {
        Self {
            count,
            dims: suite.default_dims(),
            bases: 1,
            coarse: 0,
            samples: SamplingOptions::default().samples,
            sigmas: SamplingOptions::default().sigmas,
            mu_bases: 5,
            mixtures: 20,
            seed,
            optimizer: BasisOptimizerConfig { seed, ..Default::default() },
            fidelity: FidelityOptions::default(),
        }
    }

    fn sampling(&self) -> SamplingOptions {
        SamplingOptions { samples: self.samples, sigmas: self.sigmas }
    }
}

/// Reports of one instance, or the error that stopped it.
pub type InstanceResult = Result<Vec<VerificationReport>>;

/// Run every instance of `suite`, in index order.
pub fn run(suite: Suite, spec: &EnsembleSpec) -> Vec<InstanceResult> {
    let count = match suite {
        Suite::Channels => PHASE_FLIP_GRID.len().min(spec.count),
        _ => spec.count,
    };
    ensemble::run(count, spec.seed, |i, rng| instance(suite, spec, i, rng))
}

/// Reports for instance `index` of `suite`, drawing from `rng`.
pub fn instance(suite: Suite, spec: &EnsembleSpec, index: usize, rng: &mut ChaCha8Rng) -> InstanceResult {
    match suite {
        Suite::Channels => phase_flip_instance(PHASE_FLIP_GRID[index], spec, rng),
        Suite::Eq20 => eq20_instance(spec, rng),
        _ => {
            let rho = random_pure(&spec.dims, rng).density();
            let mut out = Vec::new();
            for (state, z) in information_types(&rho, spec, rng)? {
                out.extend(state_reports(suite, &state, &z, spec, rng)?);
            }
            Ok(out)
        }
    }
}

/// Pairs `(state, Z)` for one instance: `bases` random bases on the first
/// factor, then `coarse` two-block coarse-grainings acting on every factor
/// but the last (merged).
fn information_types(rho: &DensityOperator, spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> Result<Vec<(DensityOperator, InfoType)>> {
    let mut out = Vec::with_capacity(spec.bases + spec.coarse);
    for _ in 0..spec.bases {
        out.push((rho.clone(), InfoType::random_basis(rho.dims()[0], 0, rng)));
    }
    if spec.coarse > 0 {
        let n = rho.dims().len();
        let merged = if n > 2 { rho.merge_factors(0..n - 1)? } else { rho.clone() };
        let d = merged.dims()[0];
        let half = d.div_ceil(2);
        let grouping = [(0..half).collect::<Vec<_>>(), (half..d).collect()];
        let grouping: Vec<Vec<usize>> = grouping.into_iter().filter(|g| !g.is_empty()).collect();
        for _ in 0..spec.coarse {
            let z = coarse_grain(&InfoType::random_basis(d, 0, rng), &grouping)?;
            out.push((merged.clone(), z));
        }
    }
    Ok(out)
}

fn state_reports(suite: Suite, rho: &DensityOperator, z: &InfoType, spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> InstanceResult {
    match suite {
        Suite::Thm1 => theorems::verify_thm1(rho, z, &spec.fidelity, rng),
        Suite::Thm2 => theorems::verify_thm2(rho, z, &spec.fidelity, rng),
        Suite::Thm3 => {
            if !z.is_rank_one() {
                return Ok(Vec::new());
            }
            theorems::verify_thm3(rho, z, None, &spec.sampling(), rng)
        }
        Suite::Corollary => {
            if !z.is_rank_one() {
                return Ok(Vec::new());
            }
            corollary_pair(rho, z, spec.samples, rng)
        }
        Suite::Inequalities => {
            let mut out = theorems::verify_inequalities(rho, z, spec.mu_bases, rng)?;
            out.extend(entropy_bounds(rho, z)?);
            out.extend(extremal_detection(rho, z, rng)?);
            Ok(out)
        }
        Suite::Channels | Suite::Eq20 => unreachable!("not a pure-state suite"),
    }
}

/// Classification of a generic state (expected non-classical) and of its
/// pinched-and-repurified version (expected classical).
pub fn corollary_pair(rho: &DensityOperator, z: &InfoType, samples: usize, rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rho.dims().len();
    let rho_ab = rho.partial_trace(&(0..n - 1).collect::<Vec<_>>())?;
    let pinched = purify(&infotypes::pinch(&rho_ab, z)?).density();
    let generic = theorems::verify_corollary(rho, z, samples, rng)?;
    let classical = theorems::verify_corollary(&pinched, z, samples, rng)?;
    Ok(vec![classification("corollary.generic", generic, 0.0), classification("corollary.pinched", classical, 1.0)])
}

/// Passes iff the joint-zero rule is consistent and the verdict is `expected`.
fn classification(claim: &str, report: VerificationReport, expected: f64) -> VerificationReport {
    let verdict = report.diagnostics["classical"];
    let mut out = VerificationReport::from_gap(claim, verdict, expected, (verdict - expected).abs() + report.abs_gap, 0.0);
    out.diagnostics = report.diagnostics;
    out.diagnostics.insert("inconsistent_residuals".into(), report.abs_gap);
    out
}

struct Entropies {
    vn: f64,
    quad: f64,
    min: f64,
    quad_upper: f64,
    certainties: [f64; 3],
}

fn entropies_of(rho: &DensityOperator, z: &InfoType) -> Result<Entropies> {
    let c = rho.dims().len() - 1;
    let decomp = cq_decompose(rho, z, &[c])?;
    let rho_c = decomp.rho_c();
    let n = z.n() as f64;
    let certainties = [
        entropies::certainty(EntropyKind::Vn, &decomp, &rho_c)?,
        entropies::certainty(EntropyKind::Quad, &decomp, &rho_c)?,
        entropies::certainty(EntropyKind::Min, &decomp, &rho_c)?,
    ];
    Ok(Entropies {
        vn: entropies::cond_entropy_vn(&decomp),
        quad: entropies::cond_entropy_quad(&decomp, &rho_c)?,
        min: entropies::h_min(&decomp),
        quad_upper: (1.0 - 1.0 / n) * rho_c.purity(),
        certainties,
    })
}

/// Range and ordering of the three conditional entropies and certainties of
/// `Z` given the last factor.
pub fn entropy_bounds(rho: &DensityOperator, z: &InfoType) -> InstanceResult {
    let e = entropies_of(rho, z)?;
    let log_n = (z.n() as f64).log2();
    let s = INEQUALITY_SLACK;
    let mut out = vec![
        VerificationReport::at_least("bounds.vn_nonnegative", e.vn, 0.0, s),
        VerificationReport::at_least("bounds.vn_at_most_log_n", log_n, e.vn, s),
        VerificationReport::at_least("bounds.min_nonnegative", e.min, 0.0, s),
        VerificationReport::at_least("bounds.min_at_most_log_n", log_n, e.min, s),
        VerificationReport::at_least("bounds.quad_nonnegative", e.quad, 0.0, s),
        VerificationReport::at_least("bounds.quad_at_most_purity_bound", e.quad_upper, e.quad, s),
        VerificationReport::at_least("bounds.min_at_most_vn", e.vn, e.min, entropies::GUESS_ACCEPT_GAP.max(s)),
    ];
    for (name, c) in ["bounds.certainty_vn", "bounds.certainty_quad", "bounds.certainty_min"].iter().zip(e.certainties) {
        out.push(VerificationReport::at_least(name, c, 0.0, s));
    }
    Ok(out)
}

/// Builds a state where `Z` is perfectly present in the last factor and one
/// where it is completely absent, and checks that the zero and maximal
/// entropy tests detect exactly these, and neither for `rho` itself.
pub fn extremal_detection(rho: &DensityOperator, z: &InfoType, rng: &mut ChaCha8Rng) -> InstanceResult {
    let log_n = (z.n() as f64).log2();
    let detect = |e: &Entropies| {
        let present = e.vn <= ZERO_ENTROPY && e.quad <= ZERO_ENTROPY && e.min <= entropies::GUESS_ACCEPT_GAP;
        let absent = e.vn >= log_n - ZERO_ENTROPY
            && e.min >= log_n - ZERO_ENTROPY
            && e.certainties.iter().all(|c| c.abs() <= ZERO_ENTROPY);
        (present, absent)
    };
    let verdict = |claim: &str, e: &Entropies, expected: (bool, bool)| {
        let got = detect(e);
        let wrong = (got.0 != expected.0) as u8 + (got.1 != expected.1) as u8;
        VerificationReport::from_gap(claim, e.vn, if expected.1 { log_n } else { 0.0 }, wrong as f64, 0.0)
            .with("detected_present", got.0 as u8 as f64)
            .with("detected_absent", got.1 as u8 as f64)
            .with("quad", e.quad)
            .with("min", e.min)
    };
    let mut out = vec![verdict("extremal.generic", &entropies_of(rho, z)?, (false, false))];
    if let Some(present) = present_state(rho.dims(), z, rng)? {
        out.push(verdict("extremal.present", &entropies_of(&present, z)?, (true, false)));
    }
    let absent = absent_state(rho.dims(), z, rng)?;
    out.push(verdict("extremal.absent", &entropies_of(&absent, z)?, (false, true)));
    Ok(out)
}

fn ginibre(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    random_state(RandomKind::GinibreMixed, dims, None, rng)
}

/// `Σ_j p_j Z_j/Tr Z_j ⊗ τ_j ⊗ V|j⟩⟨j|V†`: the outcome is written into
/// orthogonal states of the last factor. `None` if that factor is too small.
fn present_state(dims: &[usize], z: &InfoType, rng: &mut ChaCha8Rng) -> Result<Option<DensityOperator>> {
    let n = dims.len();
    let dc = dims[n - 1];
    if dc < z.n() || z.subsystem() != 0 {
        return Ok(None);
    }
    let v = haar_unitary(dc, rng);
    let raw: Vec<f64> = (0..z.n()).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    let mut m = ComplexMatrix::zeros(dims.iter().product(), dims.iter().product());
    for (j, p) in z.projectors().iter().enumerate() {
        let mut term = p.scale(raw[j] / total / p.trace().re);
        if n > 2 {
            term = term.kron(ginibre(&dims[1..n - 1], rng)?.matrix());
        }
        term = term.kron(&ComplexMatrix::projector(&v.column(j)));
        m += &term;
    }
    Ok(Some(DensityOperator::new(m.hermitian_part(), dims.to_vec())?))
}

/// `|φ⟩⟨φ| ⊗ ρ_rest` with `φ` unbiased to every projector of `Z`.
fn absent_state(dims: &[usize], z: &InfoType, rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    let d = dims[0];
    let mut phi = vec![Complex64::new(0.0, 0.0); d];
    for p in z.projectors() {
        // Random direction inside each block, each block with weight 1/N.
        let w = haar_vector(d, rng);
        let mut v = p.apply(&w);
        let norm = qmat::vec_norm(&v);
        let scale = (1.0 / z.n() as f64).sqrt() / norm;
        for (x, y) in phi.iter_mut().zip(v.iter_mut()) {
            *x += *y * scale;
        }
    }
    let a = ComplexMatrix::projector(&phi);
    let rest = ginibre(&dims[1..], rng)?;
    DensityOperator::new(a.kron(rest.matrix()).hermitian_part(), dims.to_vec())
}

fn phase_flip_instance(p: f64, spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> InstanceResult {
    let mut out = channels::phase_flip_reports(p, spec.mu_bases, rng)?;
    let ch = QuantumChannel::phase_flip(p)?;
    out.extend(channel_reports(&ch, spec, rng)?);
    Ok(out)
}

/// Decoherence-profile identities and the uncertainty tradeoff of a channel
/// in the standard basis of its input.
pub fn channel_reports(ch: &QuantumChannel, spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> InstanceResult {
    let z = InfoType::standard(ch.d_in(), ChoiTriple::REFERENCE);
    let profile = channels::decoherence_profile(ch, &z, spec.samples, rng)?;
    let leaked = channels::channel_info(ch, &z, InfoLocation::LeakedToEnv)?;
    let kept = channels::channel_info(ch, &z, InfoLocation::KeptByOutput)?;
    let mut out: Vec<VerificationReport> = profile.checks.into_iter().map(|r| r.with("leaked", leaked).with("kept", kept)).collect();
    out.push(channels::tradeoff_report(ch, &z, &fourier_mu_basis(&z)?)?);
    Ok(out)
}

fn eq20_instance(spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> InstanceResult {
    let rho = ginibre(&spec.dims, rng)?;
    let z = InfoType::random_basis(spec.dims[0], 0, rng);
    let cfg = BasisOptimizerConfig { seed: rng.random(), ..spec.optimizer };
    security::operational_reports(&rho, &z, spec.mixtures, 3, &cfg, rng)
}
