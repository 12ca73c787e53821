//! Spatial-time and spatial-frequency channel responses.
//!
//! For UE `k`, AP `l`, antenna `m` and baseband offset `f` the response is
//!
//! ```text
//! h(f) = Σ_n α_n · e^{-j2π mΔ sinθ_n / λ_c} · e^{-j2π f d/c} · e^{-j2π f mΔ sinθ_n / c}
//! ```
//!
//! [`spatial_frequency_response`] evaluates this sum term by term.
//! [`assemble_channel`] builds the same quantity from the factored form
//! `Σ_n diag(α_n ∘ d(f)) Θ_n(f)`, using the macro-steering vector `d(f)` and the
//! per-path phase-shift matrix `Θ_n(f)`; the two routes must agree entrywise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::phase::cis_neg;
use crate::scenario::{compute_delay, PathSet, Scenario};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// How subcarrier indices map to baseband frequency offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubcarrierLayout {
    /// `f_p = (p - ⌊P/2⌋) η`, so the band spans `[-W/2, W/2)` for even `P`.
    #[default]
    Centered,
    /// `f_p = p η`.
    OneSided,
}

/// OFDM numerology: bandwidth `W`, `P` subcarriers spaced `η = W / P`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmGrid {
    bandwidth: f64,
    layout: SubcarrierLayout,
    frequencies: Vec<f64>,
}

impl OfdmGrid {
    pub fn new(bandwidth: f64, num_subcarriers: usize, layout: SubcarrierLayout) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth >= 0.0) {
            return Err(Error::config(
                "ofdm.bandwidth_hz",
                "must be nonnegative and finite",
            ));
        }
        if num_subcarriers == 0 {
            return Err(Error::config("ofdm.num_subcarriers", "must be at least 1"));
        }
        let spacing = bandwidth / num_subcarriers as f64;
        let origin = match layout {
            SubcarrierLayout::Centered => (num_subcarriers / 2) as f64,
            SubcarrierLayout::OneSided => 0.0,
        };
        let frequencies = (0..num_subcarriers)
            .map(|p| (p as f64 - origin) * spacing)
            .collect();
        Ok(Self {
            bandwidth,
            layout,
            frequencies,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn num_subcarriers(&self) -> usize {
        self.frequencies.len()
    }

    /// Subcarrier spacing `η = W / P`.
    pub fn spacing(&self) -> f64 {
        self.bandwidth / self.num_subcarriers() as f64
    }

    pub fn layout(&self) -> SubcarrierLayout {
        self.layout
    }

    /// Baseband offset of subcarrier `p` in Hz.
    pub fn frequency(&self, p: usize) -> f64 {
        self.frequencies[p]
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Position of subcarrier `p` in a length-`P` FFT.
    pub fn fft_bin(&self, p: usize) -> usize {
        let n = self.num_subcarriers();
        match self.layout {
            SubcarrierLayout::Centered => (p + n - n / 2) % n,
            SubcarrierLayout::OneSided => p,
        }
    }

    /// Same grid with a different bandwidth.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Self::new(bandwidth, self.num_subcarriers(), self.layout)
    }

    pub(crate) fn check_subcarrier(&self, p: usize) -> Result<()> {
        if p >= self.num_subcarriers() {
            return Err(Error::usage(format!(
                "subcarrier index {p} out of range (P = {})",
                self.num_subcarriers()
            )));
        }
        Ok(())
    }
}

/// One impulse-response tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Arrival time in seconds.
    pub delay: f64,
    pub gain: Complex64,
}

/// Antenna phase of path `n` in cycles at the carrier: `mΔ sinθ / λ_c`.
fn carrier_cycles(scenario: &Scenario, m: usize, doa: f64) -> f64 {
    let array = scenario.array();
    m as f64 * array.antenna_spacing() * doa.sin() / array.wavelength()
}

/// Impulse-response taps of the spatial-time channel from UE `k` to antenna `m` of AP `l`.
///
/// Tap `n` sits at `τ_{k,l,m,n}` with gain `α_{k,l,n} e^{-j2π mΔ sinθ_{k,l,n}/λ_c}`.
pub fn spatial_time_tap_gains(paths: &PathSet, k: usize, l: usize, m: usize) -> Result<Vec<Tap>> {
    let s = paths.scenario();
    s.check_ue(k)?;
    s.check_ap(l)?;
    s.check_antenna(m)?;
    let d = s.distance(k, l);
    let spacing = s.array().antenna_spacing();
    paths
        .paths(k, l)
        .iter()
        .map(|path| {
            Ok(Tap {
                delay: compute_delay(d, m, spacing, path.doa)?,
                gain: path.gain * cis_neg(carrier_cycles(s, m, path.doa)),
            })
        })
        .collect()
}

/// Frequency response of antenna `m` of AP `l` at subcarrier `p`, evaluated term by term.
pub fn spatial_frequency_response(
    paths: &PathSet,
    grid: &OfdmGrid,
    k: usize,
    l: usize,
    m: usize,
    p: usize,
) -> Result<Complex64> {
    let s = paths.scenario();
    s.check_ue(k)?;
    s.check_ap(l)?;
    s.check_antenna(m)?;
    grid.check_subcarrier(p)?;
    let f = grid.frequency(p);
    let d = s.distance(k, l);
    let spacing = s.array().antenna_spacing();
    let macro_phase = cis_neg(f * d / SPEED_OF_LIGHT);
    Ok(paths
        .paths(k, l)
        .iter()
        .map(|path| {
            let antenna = cis_neg(carrier_cycles(s, m, path.doa));
            let squint = cis_neg(f * m as f64 * spacing * path.doa.sin() / SPEED_OF_LIGHT);
            path.gain * antenna * macro_phase * squint
        })
        .sum())
}

/// Per-AP propagation phases `e^{-j2π f d_{k,l}/c}` at offset `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroSteeringVector(Vec<Complex64>);

impl MacroSteeringVector {
    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn macro_steering(scenario: &Scenario, k: usize, f: f64) -> Result<MacroSteeringVector> {
    scenario.check_ue(k)?;
    if !f.is_finite() {
        return Err(Error::usage("frequency offset must be finite"));
    }
    Ok(MacroSteeringVector(
        scenario
            .distances_from(k)
            .iter()
            .map(|d| cis_neg(f * d / SPEED_OF_LIGHT))
            .collect(),
    ))
}

/// `L × M` intra-array phases of one path at offset `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftMatrix {
    num_antennas: usize,
    /// Row-major, AP rows.
    entries: Vec<Complex64>,
}

impl PhaseShiftMatrix {
    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        self.entries[l * self.num_antennas + m]
    }

    pub fn num_aps(&self) -> usize {
        self.entries.len() / self.num_antennas
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// `Θ_n(f)` for UE `k`: entry `(l, m)` is `e^{-j2π (f_c + f) mΔ sinθ_{k,l,n} / c}`.
pub fn phase_shift_matrix(paths: &PathSet, k: usize, n: usize, f: f64) -> Result<PhaseShiftMatrix> {
    let s = paths.scenario();
    s.check_ue(k)?;
    s.check_path(n)?;
    if !f.is_finite() {
        return Err(Error::usage("frequency offset must be finite"));
    }
    let array = s.array();
    let scale = (array.carrier_frequency() + f) * array.antenna_spacing() / SPEED_OF_LIGHT;
    let mut entries = Vec::with_capacity(s.num_aps() * s.num_antennas());
    for l in 0..s.num_aps() {
        let sin_doa = paths.path(k, l, n).doa.sin();
        entries.extend((0..s.num_antennas()).map(|m| cis_neg(scale * m as f64 * sin_doa)));
    }
    Ok(PhaseShiftMatrix {
        num_antennas: s.num_antennas(),
        entries,
    })
}

/// System-wide response of UE `k` at offset `f`, built from the factored form.
///
/// The result has `L·M` entries in AP-major order (index `l·M + m`), so the
/// antennas of one AP are contiguous.
pub fn spatial_response(paths: &PathSet, k: usize, f: f64) -> Result<Vec<Complex64>> {
    let s = paths.scenario();
    let (num_aps, num_antennas) = (s.num_aps(), s.num_antennas());
    let steering = macro_steering(s, k, f)?;
    let mut out = vec![Complex64::new(0.0, 0.0); num_aps * num_antennas];
    for n in 0..s.num_paths() {
        let theta = phase_shift_matrix(paths, k, n, f)?;
        for l in 0..num_aps {
            let row_gain = paths.path(k, l, n).gain * steering.entries()[l];
            for m in 0..num_antennas {
                out[l * num_antennas + m] += row_gain * theta.get(l, m);
            }
        }
    }
    Ok(out)
}

/// Frequency responses of one UE over every AP, antenna and subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    ue: usize,
    scenario: Scenario,
    grid: OfdmGrid,
    /// Indexed `(l * M + m) * P + p`.
    entries: Vec<Complex64>,
}

impl ChannelTensor {
    pub fn ue(&self) -> usize {
        self.ue
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn grid(&self) -> &OfdmGrid {
        &self.grid
    }

    /// `(L, M, P)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.scenario.num_aps(),
            self.scenario.num_antennas(),
            self.grid.num_subcarriers(),
        )
    }

    pub fn get(&self, l: usize, m: usize, p: usize) -> Complex64 {
        let (_, num_antennas, num_sc) = self.dims();
        self.entries[(l * num_antennas + m) * num_sc + p]
    }

    /// Raw entries in `(l, m, p)` order.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Responses of the `M` antennas of AP `l` at subcarrier `p`.
    pub fn antenna_vector(&self, l: usize, p: usize) -> Vec<Complex64> {
        (0..self.scenario.num_antennas())
            .map(|m| self.get(l, m, p))
            .collect()
    }

    /// AP-major `L·M` response at subcarrier `p`.
    pub fn spatial_vector(&self, p: usize) -> Vec<Complex64> {
        let (num_aps, num_antennas, _) = self.dims();
        (0..num_aps)
            .flat_map(|l| (0..num_antennas).map(move |m| (l, m)))
            .map(|(l, m)| self.get(l, m, p))
            .collect()
    }
}

/// Builds the full `L × M × P` channel of UE `k` from the factored form.
///
/// Subcarriers are computed in parallel; each entry is summed over paths in a
/// fixed order, so the result does not depend on the thread schedule.
pub fn assemble_channel(paths: &PathSet, grid: &OfdmGrid, k: usize) -> Result<ChannelTensor> {
    let s = paths.scenario();
    s.check_ue(k)?;
    let per_subcarrier: Vec<Vec<Complex64>> = grid
        .frequencies()
        .par_iter()
        .map(|&f| spatial_response(paths, k, f))
        .collect::<Result<_>>()?;

    let num_sc = grid.num_subcarriers();
    let branches = s.num_aps() * s.num_antennas();
    let mut entries = vec![Complex64::new(0.0, 0.0); branches * num_sc];
    for (p, slice) in per_subcarrier.iter().enumerate() {
        for (b, &h) in slice.iter().enumerate() {
            entries[b * num_sc + p] = h;
        }
    }
    Ok(ChannelTensor {
        ue: k,
        scenario: s.clone(),
        grid: grid.clone(),
        entries,
    })
}
