//! Delay budgets, the minimum cyclic-prefix bound and ISI simulation.
//!
//! Delays are normalized to samples at rate `W`: `τ^P = W · τ = P η · τ`.
//! The reference arrival is the first antenna of the nearest AP. The minimum
//! CP bound keeps only the inter-AP term `W (d_max - d_min) / c`; the exact
//! spread also includes the intra-array term `W mΔ sinθ / c`.

mod isi;

pub use isi::simulate_isi;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::OfdmGrid;
use crate::export::serialize_f64;
use crate::phase::cis_neg;
use crate::scenario::PathSet;
use crate::{Result, SPEED_OF_LIGHT};

/// Per-subcarrier phase `ψ = e^{-j2π f (d_{k,l}/c + mΔ sinθ_{k,l,n}/c)}`.
pub fn phase_shift(
    paths: &PathSet,
    grid: &OfdmGrid,
    k: usize,
    l: usize,
    m: usize,
    n: usize,
    p: usize,
) -> Result<Complex64> {
    let s = paths.scenario();
    s.check_ue(k)?;
    s.check_ap(l)?;
    s.check_antenna(m)?;
    s.check_path(n)?;
    grid.check_subcarrier(p)?;
    let f = grid.frequency(p);
    let delay = s.distance(k, l) / SPEED_OF_LIGHT
        + m as f64 * s.array().antenna_spacing() * paths.path(k, l, n).doa.sin() / SPEED_OF_LIGHT;
    Ok(cis_neg(f * delay))
}

/// Index of the strongest path (largest `|α|`, lowest index on ties).
pub fn dominant_path(paths: &PathSet, k: usize, l: usize) -> usize {
    let list = paths.paths(k, l);
    let mut best = 0;
    for (n, path) in list.iter().enumerate().skip(1) {
        if path.gain.norm() > list[best].gain.norm() {
            best = n;
        }
    }
    best
}

/// Normalized delays `τ^P` of one UE, in samples at rate `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayBudget {
    bandwidth: f64,
    num_aps: usize,
    num_antennas: usize,
    num_paths: usize,
    dominant: Vec<usize>,
    /// `(l, m, n)` order.
    per_path: Vec<f64>,
    /// `W d_{k,l} / c`.
    macro_only: Vec<f64>,
}

impl DelayBudget {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Strongest path index of every AP.
    pub fn dominant_paths(&self) -> &[usize] {
        &self.dominant
    }

    /// `τ^P_{k,l,m}` evaluated with the strongest path's DoA.
    pub fn tau(&self, l: usize, m: usize) -> f64 {
        self.tau_path(l, m, self.dominant[l])
    }

    /// `τ^P_{k,l,m}` for path `n`.
    pub fn tau_path(&self, l: usize, m: usize, n: usize) -> f64 {
        self.per_path[(l * self.num_antennas + m) * self.num_paths + n]
    }

    /// Antenna term ignored: `W d_{k,l} / c`.
    pub fn tau_macro(&self, l: usize) -> f64 {
        self.macro_only[l]
    }

    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_paths(&self) -> usize {
        self.num_paths
    }

    /// Every per-path entry of the table.
    pub fn per_path(&self) -> &[f64] {
        &self.per_path
    }
}

pub fn delay_budget(paths: &PathSet, grid: &OfdmGrid, k: usize) -> Result<DelayBudget> {
    let s = paths.scenario();
    s.check_ue(k)?;
    let w = grid.bandwidth();
    let spacing = s.array().antenna_spacing();
    let (num_aps, num_antennas, num_paths) = (s.num_aps(), s.num_antennas(), s.num_paths());

    let mut per_path = Vec::with_capacity(num_aps * num_antennas * num_paths);
    for l in 0..num_aps {
        let d = s.distance(k, l);
        for m in 0..num_antennas {
            for path in paths.paths(k, l) {
                per_path.push(
                    w * (d / SPEED_OF_LIGHT + m as f64 * spacing * path.doa.sin() / SPEED_OF_LIGHT),
                );
            }
        }
    }
    Ok(DelayBudget {
        bandwidth: w,
        num_aps,
        num_antennas,
        num_paths,
        dominant: (0..num_aps).map(|l| dominant_path(paths, k, l)).collect(),
        per_path,
        macro_only: s
            .distances_from(k)
            .iter()
            .map(|d| w * d / SPEED_OF_LIGHT)
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApDelay {
    pub ap: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub distance_m: f64,
    /// `W d / c`.
    #[serde(serialize_with = "serialize_f64")]
    pub tau_p_samples: f64,
}

/// Minimum cyclic-prefix length for one UE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpReport {
    /// `W (d_max - d_min) / c`.
    #[serde(serialize_with = "serialize_f64")]
    pub cp_min_approx_samples: f64,
    /// Spread of the full delay table, antenna terms of every path included.
    #[serde(serialize_with = "serialize_f64")]
    pub cp_min_exact_samples: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub w_hz: f64,
    /// APs sorted by ascending distance.
    pub per_ap: Vec<ApDelay>,
}

pub fn min_cp(paths: &PathSet, grid: &OfdmGrid, k: usize) -> Result<CpReport> {
    let budget = delay_budget(paths, grid, k)?;
    let s = paths.scenario();

    let mut order: Vec<usize> = (0..s.num_aps()).collect();
    order.sort_by(|&a, &b| {
        s.distance(k, a)
            .total_cmp(&s.distance(k, b))
            .then(a.cmp(&b))
    });
    let nearest = s.distance(k, order[0]);
    let farthest = s.distance(k, order[order.len() - 1]);
    let approx = grid.bandwidth() * (farthest - nearest) / SPEED_OF_LIGHT;

    let (lo, hi) = budget
        .per_path()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    let exact = (hi - lo).max(0.0);

    Ok(CpReport {
        cp_min_approx_samples: approx,
        cp_min_exact_samples: exact,
        w_hz: grid.bandwidth(),
        per_ap: order
            .into_iter()
            .map(|l| ApDelay {
                ap: l,
                distance_m: s.distance(k, l),
                tau_p_samples: budget.tau_macro(l),
            })
            .collect(),
    })
}
