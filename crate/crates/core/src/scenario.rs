//! Deployment geometry, array configuration and stochastic path generation.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::phase::cis_neg;
use crate::rng::{pair_stream, substream};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Uniform linear array shared by every AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    num_antennas: usize,
    antenna_spacing: f64,
    carrier_frequency: f64,
}

impl ArrayConfig {
    /// `antenna_spacing` in meters, `carrier_frequency` in Hz.
    pub fn new(num_antennas: usize, antenna_spacing: f64, carrier_frequency: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::config("array.num_antennas", "must be at least 1"));
        }
        if !(carrier_frequency.is_finite() && carrier_frequency > 0.0) {
            return Err(Error::config(
                "array.carrier_frequency_hz",
                format!("must be positive and finite, got {carrier_frequency}"),
            ));
        }
        if !(antenna_spacing.is_finite() && antenna_spacing > 0.0) {
            return Err(Error::config(
                "array.spacing_wavelengths",
                format!("spacing must be positive and finite, got {antenna_spacing} m"),
            ));
        }
        Ok(Self {
            num_antennas,
            antenna_spacing,
            carrier_frequency,
        })
    }

    /// Array whose spacing is given as a multiple of the carrier wavelength.
    pub fn with_spacing_wavelengths(
        num_antennas: usize,
        spacing_wavelengths: f64,
        carrier_frequency: f64,
    ) -> Result<Self> {
        if !(carrier_frequency.is_finite() && carrier_frequency > 0.0) {
            return Err(Error::config(
                "array.carrier_frequency_hz",
                format!("must be positive and finite, got {carrier_frequency}"),
            ));
        }
        Self::new(
            num_antennas,
            spacing_wavelengths * SPEED_OF_LIGHT / carrier_frequency,
            carrier_frequency,
        )
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Inter-element spacing in meters.
    pub fn antenna_spacing(&self) -> f64 {
        self.antenna_spacing
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    /// Carrier wavelength `c / f_c` in meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub(crate) fn with_num_antennas(mut self, num_antennas: usize) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::config("array.num_antennas", "must be at least 1"));
        }
        self.num_antennas = num_antennas;
        Ok(self)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Fixed deployment: AP and UE positions, the common array and the path count.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    ap_positions: Vec<Position>,
    ue_positions: Vec<Position>,
    array: ArrayConfig,
    num_paths: usize,
    /// UE-major table of UE-AP distances.
    distances: Vec<f64>,
}

impl Scenario {
    pub fn new(
        ap_positions: Vec<Position>,
        ue_positions: Vec<Position>,
        array: ArrayConfig,
        num_paths: usize,
    ) -> Result<Self> {
        if ap_positions.is_empty() {
            return Err(Error::config(
                "aps.positions",
                "at least one AP is required",
            ));
        }
        if ue_positions.is_empty() {
            return Err(Error::config(
                "ues.positions",
                "at least one UE is required",
            ));
        }
        if num_paths == 0 {
            return Err(Error::config("paths.count", "must be at least 1"));
        }
        for (field, list) in [
            ("aps.positions", &ap_positions),
            ("ues.positions", &ue_positions),
        ] {
            if let Some(i) = list
                .iter()
                .position(|p| !(p.x.is_finite() && p.y.is_finite()))
            {
                return Err(Error::config(field, format!("entry {i} is not finite")));
            }
        }

        let mut distances = Vec::with_capacity(ue_positions.len() * ap_positions.len());
        for (k, ue) in ue_positions.iter().enumerate() {
            for (l, ap) in ap_positions.iter().enumerate() {
                let d = ue.distance_to(ap);
                if d <= 0.0 {
                    return Err(Error::Geometry(format!(
                        "UE {k} at ({}, {}) coincides with AP {l}",
                        ue.x, ue.y
                    )));
                }
                distances.push(d);
            }
        }

        Ok(Self {
            ap_positions,
            ue_positions,
            array,
            num_paths,
            distances,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn num_paths(&self) -> usize {
        self.num_paths
    }

    pub fn num_antennas(&self) -> usize {
        self.array.num_antennas
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn ap_positions(&self) -> &[Position] {
        &self.ap_positions
    }

    pub fn ue_positions(&self) -> &[Position] {
        &self.ue_positions
    }

    /// Distance `d_{k,l}` in meters.
    pub fn distance(&self, ue: usize, ap: usize) -> f64 {
        self.distances[ue * self.num_aps() + ap]
    }

    /// Distances from UE `ue` to every AP, in AP order.
    pub fn distances_from(&self, ue: usize) -> &[f64] {
        let l = self.num_aps();
        &self.distances[ue * l..(ue + 1) * l]
    }

    /// Same deployment restricted to the first `num_aps` APs.
    pub fn with_first_aps(&self, num_aps: usize) -> Result<Self> {
        if num_aps == 0 || num_aps > self.num_aps() {
            return Err(Error::config(
                "aps.positions",
                format!("cannot select {num_aps} of {} APs", self.num_aps()),
            ));
        }
        Self::new(
            self.ap_positions[..num_aps].to_vec(),
            self.ue_positions.clone(),
            self.array,
            self.num_paths,
        )
    }

    /// Same deployment with a different number of antennas per AP.
    pub fn with_num_antennas(&self, num_antennas: usize) -> Result<Self> {
        let mut out = self.clone();
        out.array = self.array.with_num_antennas(num_antennas)?;
        Ok(out)
    }

    pub(crate) fn check_ue(&self, k: usize) -> Result<()> {
        if k >= self.num_ues() {
            return Err(Error::usage(format!(
                "UE index {k} out of range (K = {})",
                self.num_ues()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_ap(&self, l: usize) -> Result<()> {
        if l >= self.num_aps() {
            return Err(Error::usage(format!(
                "AP index {l} out of range (L = {})",
                self.num_aps()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_antenna(&self, m: usize) -> Result<()> {
        if m >= self.num_antennas() {
            return Err(Error::usage(format!(
                "antenna index {m} out of range (M = {})",
                self.num_antennas()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_path(&self, n: usize) -> Result<()> {
        if n >= self.num_paths {
            return Err(Error::usage(format!(
                "path index {n} out of range (N = {})",
                self.num_paths
            )));
        }
        Ok(())
    }
}

/// Arrival time in seconds at antenna `m` of an AP at distance `d` for a path
/// arriving from `doa`: `d/c + m Δ sin(θ)/c`, with antenna 0 as the reference.
pub fn compute_delay(d: f64, m: usize, antenna_spacing: f64, doa: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::usage(format!(
            "distance must be positive and finite, got {d}"
        )));
    }
    if !(antenna_spacing.is_finite() && antenna_spacing >= 0.0) {
        return Err(Error::usage(format!(
            "antenna spacing must be nonnegative, got {antenna_spacing}"
        )));
    }
    if !doa.is_finite() {
        return Err(Error::usage("direction of arrival must be finite"));
    }
    Ok(d / SPEED_OF_LIGHT + m as f64 * antenna_spacing * doa.sin() / SPEED_OF_LIGHT)
}

/// One propagation path between a UE and an AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Complex gain before the distance rotation (`ᾱ`).
    pub raw_gain: Complex64,
    /// `raw_gain · e^{-j2π d/λ_c}` (`α`).
    pub gain: Complex64,
    /// Direction of arrival in radians, measured from array broadside.
    pub doa: f64,
}

/// Propagation state: `N` paths for every (UE, AP) pair of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    scenario: Scenario,
    /// Indexed `(k * L + l) * N + n`.
    paths: Vec<Path>,
}

impl PathSet {
    /// Builds a path set from raw gains and DoAs listed in `(k, l, n)` order.
    /// The distance rotation is applied here.
    pub fn from_raw(scenario: Scenario, raw: Vec<(Complex64, f64)>) -> Result<Self> {
        let expected = scenario.num_ues() * scenario.num_aps() * scenario.num_paths();
        if raw.len() != expected {
            return Err(Error::usage(format!(
                "expected {expected} (gain, doa) entries, got {}",
                raw.len()
            )));
        }
        if let Some(i) = raw
            .iter()
            .position(|(g, doa)| !(g.re.is_finite() && g.im.is_finite() && doa.abs() <= FRAC_PI_2))
        {
            return Err(Error::usage(format!(
                "entry {i} has a non-finite gain or a DoA outside [-π/2, π/2]"
            )));
        }

        let (l_count, n_count) = (scenario.num_aps(), scenario.num_paths());
        let wavelength = scenario.array().wavelength();
        let paths = raw
            .into_iter()
            .enumerate()
            .map(|(i, (raw_gain, doa))| {
                let pair = i / n_count;
                let (k, l) = (pair / l_count, pair % l_count);
                let rotation = cis_neg(scenario.distance(k, l) / wavelength);
                Path {
                    raw_gain,
                    gain: raw_gain * rotation,
                    doa,
                }
            })
            .collect();
        Ok(Self { scenario, paths })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// The `N` paths between UE `k` and AP `l`.
    pub fn paths(&self, k: usize, l: usize) -> &[Path] {
        let n = self.scenario.num_paths();
        let start = (k * self.scenario.num_aps() + l) * n;
        &self.paths[start..start + n]
    }

    pub fn path(&self, k: usize, l: usize, n: usize) -> &Path {
        &self.paths(k, l)[n]
    }

    /// All paths in `(k, l, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter()
    }

    /// Raw `(gain, doa)` entries in `(k, l, n)` order, as accepted by [`PathSet::from_raw`].
    pub fn to_raw(&self) -> Vec<(Complex64, f64)> {
        self.paths.iter().map(|p| (p.raw_gain, p.doa)).collect()
    }
}

/// Log-distance pathloss `PL(d) = (d / d_ref)^(-γ)` as a linear power gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathlossModel {
    #[serde(
        rename = "reference_distance_m",
        default = "PathlossModel::default_reference"
    )]
    pub reference_distance: f64,
    #[serde(default = "PathlossModel::default_exponent")]
    pub exponent: f64,
}

impl PathlossModel {
    fn default_reference() -> f64 {
        1.0
    }

    /// UMi street-canyon NLOS slope.
    fn default_exponent() -> f64 {
        3.19
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reference_distance.is_finite() && self.reference_distance > 0.0) {
            return Err(Error::config(
                "pathloss.reference_distance_m",
                "must be positive and finite",
            ));
        }
        if !(self.exponent.is_finite() && self.exponent >= 0.0) {
            return Err(Error::config(
                "pathloss.exponent",
                "must be nonnegative and finite",
            ));
        }
        Ok(())
    }

    pub fn gain(&self, distance: f64) -> f64 {
        (distance / self.reference_distance).powf(-self.exponent)
    }
}

impl Default for PathlossModel {
    fn default() -> Self {
        Self {
            reference_distance: Self::default_reference(),
            exponent: Self::default_exponent(),
        }
    }
}

/// Simplified clustered-path generator.
///
/// Path `n` between UE `k` and AP `l` gets a circularly-symmetric complex Gaussian
/// gain with variance `PL(d_{k,l}) · power_profile[n]` and a DoA uniform on
/// (-π/2, π/2). The profile is not renormalized, so the total mean power per
/// antenna is `PL(d) · Σ power_profile`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGenerator {
    power_profile: Vec<f64>,
    pathloss: PathlossModel,
}

impl PathGenerator {
    pub fn new(power_profile: Vec<f64>, pathloss: PathlossModel) -> Result<Self> {
        if power_profile.is_empty() {
            return Err(Error::config(
                "paths.power_profile",
                "must list one weight per path",
            ));
        }
        if let Some(i) = power_profile
            .iter()
            .position(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(Error::config(
                "paths.power_profile",
                format!("entry {i} must be nonnegative and finite"),
            ));
        }
        if power_profile.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config(
                "paths.power_profile",
                "weights must sum to a positive value",
            ));
        }
        pathloss.validate()?;
        Ok(Self {
            power_profile,
            pathloss,
        })
    }

    /// Exponentially decaying profile `w_n = e^{-n · decay}` for `n = 0..count`.
    pub fn exponential_profile(count: usize, decay: f64) -> Vec<f64> {
        (0..count).map(|n| (-(n as f64) * decay).exp()).collect()
    }

    pub fn power_profile(&self) -> &[f64] {
        &self.power_profile
    }

    pub fn pathloss(&self) -> &PathlossModel {
        &self.pathloss
    }

    /// Draws a fresh path set. Identical `(scenario, seed)` gives a bit-identical result.
    pub fn generate(&self, scenario: &Scenario, seed: u64) -> Result<PathSet> {
        if self.power_profile.len() != scenario.num_paths() {
            return Err(Error::config(
                "paths.power_profile",
                format!(
                    "has {} weights but paths.count is {}",
                    self.power_profile.len(),
                    scenario.num_paths()
                ),
            ));
        }

        let mut raw =
            Vec::with_capacity(scenario.num_ues() * scenario.num_aps() * scenario.num_paths());
        for k in 0..scenario.num_ues() {
            for l in 0..scenario.num_aps() {
                let mut rng = substream(seed, pair_stream(k, l));
                let pl = self.pathloss.gain(scenario.distance(k, l));
                for &w in &self.power_profile {
                    let sigma = (0.5 * pl * w).sqrt();
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let doa = draw_doa(&mut rng);
                    raw.push((Complex64::new(sigma * re, sigma * im), doa));
                }
            }
        }
        PathSet::from_raw(scenario.clone(), raw)
    }

    /// Redraws the gains of `base` from `seed` while keeping its DoAs.
    pub fn redraw_gains(&self, base: &PathSet, seed: u64) -> Result<PathSet> {
        let fresh = self.generate(base.scenario(), seed)?;
        let raw = fresh
            .iter()
            .zip(base.iter())
            .map(|(f, b)| (f.raw_gain, b.doa))
            .collect();
        PathSet::from_raw(base.scenario().clone(), raw)
    }
}

/// Uniform on the open interval (-π/2, π/2).
fn draw_doa<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        let doa = (u - 0.5) * std::f64::consts::PI;
        if doa > -FRAC_PI_2 {
            return doa;
        }
    }
}

/// Draws a path set with the default pathloss model.
pub fn generate_paths(scenario: &Scenario, seed: u64, power_profile: &[f64]) -> Result<PathSet> {
    PathGenerator::new(power_profile.to_vec(), PathlossModel::default())?.generate(scenario, seed)
}
