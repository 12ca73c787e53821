//! Monte-Carlo spatial correlation `R = E{h h^H}` of the system-wide response and
//! its split into intra-AP (micro) and inter-AP (macro) parts.
//!
//! `h` is the AP-major `L·M` vector, so AP `l` owns rows and columns
//! `l·M .. (l+1)·M`. The micro blocks are the `L` diagonal `M × M` blocks of `R`.
//! The macro matrix holds the normalized block traces `tr(R_{l,l'}) / M`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{spatial_response, OfdmGrid};
use crate::rng::{derive_seed, DOMAIN_CORRELATION_DOA, DOMAIN_CORRELATION_TRIAL};
use crate::scenario::{PathGenerator, PathSet, Scenario};
use crate::{Error, Result};

/// Trials accumulated sequentially before the tree reduction.
const CHUNK_TRIALS: usize = 64;

/// Frequency at which `R` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencySelector {
    Subcarrier(usize),
    /// `(1/P) Σ_p h(f_p) h(f_p)^H`.
    BandAverage,
}

impl std::fmt::Display for FrequencySelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Subcarrier(p) => write!(f, "{p}"),
            Self::BandAverage => f.write_str("avg"),
        }
    }
}

impl std::str::FromStr for FrequencySelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "avg" | "band-average" => Ok(Self::BandAverage),
            other => other
                .parse()
                .map(Self::Subcarrier)
                .map_err(|_| format!("expected a subcarrier index or `avg`, got `{other}`")),
        }
    }
}

/// What the expectation averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMode {
    /// Gains and DoAs redrawn every trial.
    #[default]
    GainsAndDoas,
    /// DoAs drawn once from the seed; only gains are redrawn.
    FixedDoas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationSettings {
    pub num_trials: usize,
    pub seed: u64,
    pub frequency: FrequencySelector,
    pub mode: ExpectationMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub full: DMatrix<Complex64>,
    pub micro_blocks: Vec<DMatrix<Complex64>>,
    pub macro_matrix: DMatrix<Complex64>,
    pub num_aps: usize,
    pub num_antennas: usize,
    pub num_trials: usize,
    pub seed: u64,
    pub frequency: FrequencySelector,
    pub mode: ExpectationMode,
}

impl CorrelationReport {
    /// Largest `|R_ab - conj(R_ba)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let r = &self.full;
        let mut worst: f64 = 0.0;
        for a in 0..r.nrows() {
            for b in 0..r.ncols() {
                worst = worst.max((r[(a, b)] - r[(b, a)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.full.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        self.full.diagonal().iter().map(|z| z.re).sum()
    }

    /// `min eig(R) >= -1e-8 · tr(R) / (L·M)`.
    pub fn is_psd(&self) -> bool {
        let dim = self.full.nrows() as f64;
        self.min_eigenvalue() >= -1e-8 * self.trace() / dim
    }
}

fn accumulate_outer(acc: &mut [Complex64], h: &[Complex64]) {
    let dim = h.len();
    for (a, ha) in h.iter().enumerate() {
        let row = &mut acc[a * dim..(a + 1) * dim];
        for (slot, hb) in row.iter_mut().zip(h) {
            *slot += ha * hb.conj();
        }
    }
}

/// Pairwise sum in a fixed tree shape.
fn tree_reduce(mut parts: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Sample correlation of UE `k`'s response over `settings.num_trials` path draws.
///
/// Trials run in parallel in fixed-size chunks whose partial sums are combined in
/// a fixed tree, so the result is bit-identical for a given seed.
pub fn estimate_correlation(
    scenario: &Scenario,
    generator: &PathGenerator,
    grid: &OfdmGrid,
    k: usize,
    settings: &CorrelationSettings,
) -> Result<CorrelationReport> {
    scenario.check_ue(k)?;
    if settings.num_trials < 2 {
        return Err(Error::config(
            "correlation.num_trials",
            "must be at least 2",
        ));
    }
    let frequencies: Vec<f64> = match settings.frequency {
        FrequencySelector::Subcarrier(p) => {
            grid.check_subcarrier(p)?;
            vec![grid.frequency(p)]
        }
        FrequencySelector::BandAverage => grid.frequencies().to_vec(),
    };
    let base = match settings.mode {
        ExpectationMode::FixedDoas => Some(generator.generate(
            scenario,
            derive_seed(settings.seed, DOMAIN_CORRELATION_DOA, 0),
        )?),
        ExpectationMode::GainsAndDoas => None,
    };

    let draw = |t: usize| -> Result<PathSet> {
        let seed = derive_seed(settings.seed, DOMAIN_CORRELATION_TRIAL, t as u64);
        match &base {
            Some(b) => generator.redraw_gains(b, seed),
            None => generator.generate(scenario, seed),
        }
    };

    let dim = scenario.num_aps() * scenario.num_antennas();
    let num_chunks = settings.num_trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<Vec<Complex64>> = (0..num_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let end = ((c + 1) * CHUNK_TRIALS).min(settings.num_trials);
            for t in c * CHUNK_TRIALS..end {
                let paths = draw(t)?;
                for &f in &frequencies {
                    accumulate_outer(&mut acc, &spatial_response(&paths, k, f)?);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let norm = 1.0 / (settings.num_trials * frequencies.len()) as f64;
    let sum = tree_reduce(partials);
    let raw = DMatrix::from_row_slice(dim, dim, &sum) * Complex64::new(norm, 0.0);
    let full = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);

    let (num_aps, num_antennas) = (scenario.num_aps(), scenario.num_antennas());
    let micro_blocks = (0..num_aps)
        .map(|l| {
            full.view(
                (l * num_antennas, l * num_antennas),
                (num_antennas, num_antennas),
            )
            .into_owned()
        })
        .collect();
    let macro_matrix = macro_aggregate(&full, num_aps)?;

    Ok(CorrelationReport {
        full,
        micro_blocks,
        macro_matrix,
        num_aps,
        num_antennas,
        num_trials: settings.num_trials,
        seed: settings.seed,
        frequency: settings.frequency,
        mode: settings.mode,
    })
}

/// `L × L` matrix of block traces `tr(R_{l,l'}) / M`.
pub fn macro_aggregate(r: &DMatrix<Complex64>, num_aps: usize) -> Result<DMatrix<Complex64>> {
    let dim = r.nrows();
    if r.ncols() != dim || num_aps == 0 || !dim.is_multiple_of(num_aps) {
        return Err(Error::usage(format!(
            "a {}x{} matrix cannot be split into {num_aps}x{num_aps} square blocks",
            r.nrows(),
            r.ncols()
        )));
    }
    let m = dim / num_aps;
    Ok(DMatrix::from_fn(num_aps, num_aps, |a, b| {
        (0..m).map(|i| r[(a * m + i, b * m + i)]).sum::<Complex64>() / m as f64
    }))
}

/// `|R_ab| / sqrt(R_aa R_bb)` with an exact unit diagonal.
pub fn correlation_coefficient_map(report: &CorrelationReport) -> Result<DMatrix<f64>> {
    coefficient_map(&report.full)
}

pub fn coefficient_map(r: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    let diag: Vec<f64> = r.diagonal().iter().map(|z| z.re).collect();
    if let Some(i) = diag.iter().position(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(Error::DegenerateChannel(format!(
            "diagonal entry {i} of the correlation matrix is not positive"
        )));
    }
    Ok(DMatrix::from_fn(r.nrows(), r.ncols(), |a, b| {
        if a == b {
            1.0
        } else {
            r[(a, b)].norm() / (diag[a] * diag[b]).sqrt()
        }
    }))
}

/// `‖A - B‖_F / ‖A‖_F`.
pub fn normalized_frobenius_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / a.norm()
}
