//! The work behind each subcommand, independent of argument parsing.

use decolab_core::channels::{self, ChoiTriple, InfoLocation, QuantumChannel};
use decolab_core::discord::{self, BasisOptimizerConfig, DiscordReport, MeasureId};
use decolab_core::entropies::EntropyKind;
use decolab_core::infotypes::fourier_mu_basis;
use decolab_core::qmat::ComplexMatrix;
use decolab_core::theorems::interferometer_row;
use decolab_core::{DensityOperator, Error, InfoType, Result};

use crate::ensemble;
use crate::output::{Cell, Table};

/// Default number of class samples for the complementarity measures.
pub const DEFAULT_MEASURE_SAMPLES: usize = 2000;

/// Evaluate one discord measure.
pub fn measure(rho: &DensityOperator, id: MeasureId, cfg: &BasisOptimizerConfig, samples: usize) -> Result<DiscordReport> {
    match id {
        MeasureId::DeltaArrow => discord::original_discord(rho, cfg, &[]),
        MeasureId::Deficit => discord::deficit(rho, cfg, &[]),
        MeasureId::Geometric => discord::geometric(rho, cfg, &[]),
        MeasureId::MinEntropy => Ok(discord::min_entropy_discord(rho, cfg, &[])?.d_min),
        MeasureId::Eg => Ok(discord::min_entropy_discord(rho, cfg, &[])?.eg),
        MeasureId::ComplementarityVn => discord::complementarity_discord(rho, EntropyKind::Vn, samples, cfg, &[]),
        MeasureId::ComplementarityQuad => discord::complementarity_discord(rho, EntropyKind::Quad, samples, cfg, &[]),
        MeasureId::ComplementarityMin => discord::complementarity_discord(rho, EntropyKind::Min, samples, cfg, &[]),
        MeasureId::TwoWayVn => discord::two_way_discord(rho, EntropyKind::Vn, cfg, &[]),
        MeasureId::TwoWayMin => discord::two_way_discord(rho, EntropyKind::Min, cfg, &[]),
    }
}

/// One-row table of a report: value, flags and optimizer diagnostics.
pub fn report_table(r: &DiscordReport) -> Table {
    let mut header = vec!["measure".to_string(), "value".into(), "is_upper_bound".into(), "converged".into()];
    header.extend(r.optimizer_diag.keys().cloned());
    let mut t = Table::new(header);
    let mut row = vec![
        Cell::Text(r.measure.name().into()),
        Cell::Num(r.value),
        Cell::Text(r.is_upper_bound.to_string()),
        Cell::Text(r.converged.to_string()),
    ];
    row.extend(r.optimizer_diag.values().map(|&v| Cell::Num(v)));
    t.push(row);
    t
}

/// Parse a grid: `a,b,c` lists points; `start:stop:count` spaces `count`
/// points evenly, endpoints included.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("grid is empty".into());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("grid entry {s:?}: {e}"));
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("range {spec:?} must be start:stop:count"));
        };
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = n.trim().parse().map_err(|e| format!("grid count {n:?}: {e}"))?;
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(num).collect::<std::result::Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err("grid is empty".into());
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(format!("grid point {x} is not finite"));
    }
    Ok(grid)
}

fn check_unit_interval(grid: &[f64], what: &str) -> Result<()> {
    match grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(x) => Err(Error::InvalidArgument(format!("{what} {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

fn collect_rows(t: &mut Table, rows: Vec<Result<Vec<Cell>>>) -> Result<()> {
    for row in rows {
        t.push(row?);
    }
    Ok(())
}

/// Interferometer curves: squared coherence, half the quadratic entropy
/// of the path given the environment, and half the sampled certainty of
/// unbiased bases, per visibility `v`.
pub fn scan_interferometer(grid: &[f64], samples: usize, seed: u64) -> Result<Table> {
    check_unit_interval(grid, "visibility")?;
    let mut t = Table::new(["v", "off_diagonal_sq", "half_quad_entropy_env", "half_mean_certainty", "half_standard_error"]);
    let rows = ensemble::run(grid.len(), seed, |i, rng| {
        let r = interferometer_row(grid[i], samples, rng)?;
        Ok(vec![
            Cell::Num(r.v),
            Cell::Num(r.off_diagonal_sq),
            Cell::Num(r.half_quad_entropy),
            Cell::Num(r.half_mean_certainty),
            Cell::Num(r.half_standard_error),
        ])
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}

const CHANNEL_COLUMNS: [&str; 8] =
    ["h_z_env", "h_z_out", "h_w_env", "leaked_z", "kept_z", "off_diagonal", "quad_entropy_env", "mean_certainty_out"];

fn channel_row(ch: &QuantumChannel, samples: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Vec<Cell>> {
    let z = InfoType::standard(ch.d_in(), ChoiTriple::REFERENCE);
    let w = fourier_mu_basis(&z)?;
    let log_d = (ch.d_in() as f64).log2();
    let h_env = channels::channel_info(ch, &z, InfoLocation::LeakedToEnv)?;
    let h_out = channels::channel_info(ch, &z, InfoLocation::KeptByOutput)?;
    let hw_env = channels::channel_info(ch, &w, InfoLocation::LeakedToEnv)?;
    let profile = channels::decoherence_profile(ch, &z, samples, rng)?;
    Ok(vec![
        Cell::Num(h_env),
        Cell::Num(h_out),
        Cell::Num(hw_env),
        Cell::Num(log_d - h_env),
        Cell::Num(log_d - h_out),
        Cell::Num(profile.off_diagonal),
        Cell::Num(profile.quad_entropy_env),
        Cell::Num(profile.mean_certainty_output),
    ])
}

/// Qubit phase flip over `p`: what the environment and the output miss of
/// the standard basis (`h_z_*`), the Fourier basis seen by the
/// environment, and the information leaked and kept.
pub fn scan_phase_flip(grid: &[f64], samples: usize, seed: u64) -> Result<Table> {
    check_unit_interval(grid, "flip probability")?;
    let mut header = vec!["p".to_string()];
    header.extend(CHANNEL_COLUMNS.iter().map(|s| s.to_string()));
    header.push("one_minus_binary_entropy".into());
    let mut t = Table::new(header);
    let rows = ensemble::run(grid.len(), seed, |i, rng| {
        let p = grid[i];
        let mut row = vec![Cell::Num(p)];
        row.extend(channel_row(&QuantumChannel::phase_flip(p)?, samples, rng)?);
        row.push(Cell::Num(1.0 - channels::binary_entropy(p)));
        Ok(row)
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}

/// `(1 − t) id + t E` for a channel with equal input and output dimension.
pub fn mix_with_identity(ch: &QuantumChannel, t: f64) -> Result<QuantumChannel> {
    if ch.d_in() != ch.d_out() {
        return Err(Error::DimMismatch(format!("mixing with the identity needs d_in = d_out, got {} and {}", ch.d_in(), ch.d_out())));
    }
    let mut kraus = vec![ComplexMatrix::identity(ch.d_in()).scale((1.0 - t).sqrt())];
    kraus.extend(ch.kraus().iter().map(|k| k.scale(t.sqrt())));
    QuantumChannel::new(kraus)
}

/// Channel columns along `(1 − t) id + t E`.
pub fn scan_channel(ch: &QuantumChannel, grid: &[f64], samples: usize, seed: u64) -> Result<Table> {
    check_unit_interval(grid, "mixing parameter")?;
    let mut header = vec!["t".to_string()];
    header.extend(CHANNEL_COLUMNS.iter().map(|s| s.to_string()));
    let mut t = Table::new(header);
    let rows = ensemble::run(grid.len(), seed, |i, rng| {
        let mut row = vec![Cell::Num(grid[i])];
        row.extend(channel_row(&mix_with_identity(ch, grid[i])?, samples, rng)?);
        Ok(row)
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}

/// `(1 − t) ρ + t I/d`.
pub fn mix_with_noise(rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
    let d = rho.dim();
    let mut m = rho.matrix().scale(1.0 - t);
    m += &ComplexMatrix::identity(d).scale(t / d as f64);
    DensityOperator::new(m, rho.dims().to_vec())
}

/// Discord measures along `(1 − t) ρ + t I/d`.
pub fn scan_state(rho: &DensityOperator, measures: &[MeasureId], grid: &[f64], cfg: &BasisOptimizerConfig, samples: usize) -> Result<Table> {
    check_unit_interval(grid, "mixing parameter")?;
    let mut header = vec!["t".to_string()];
    header.extend(measures.iter().map(|m| m.name().to_string()));
    let mut t = Table::new(header);
    let rows = ensemble::run(grid.len(), cfg.seed, |i, _| {
        let mixed = mix_with_noise(rho, grid[i])?;
        let mut row = vec![Cell::Num(grid[i])];
        for &m in measures {
            row.push(Cell::Num(measure(&mixed, m, cfg, samples)?.value));
        }
        Ok(row)
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}
