//! Virtual-angle (beamspace) spectra and the beam-squint metric.
//!
//! The normalized DFT matrix `F` has entries `e^{-j2π ab/n}/√n`. Its columns are
//! the on-grid ULA steering vectors in the sign convention of the channel model,
//! so the virtual-angle representation of a spatial vector `h` is `F^H h`: a
//! narrowband plane wave with `Δ sinθ / λ_c = q / n` lands in bin `q`.
//! Magnitudes of `F h` are the same spectrum read with bins reflected.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use crate::channel::{macro_steering, ChannelTensor, OfdmGrid};
use crate::phase::{cis_neg, cis_pos};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Normalized `size × size` DFT matrix.
pub fn dft_matrix(size: usize) -> Result<DMatrix<Complex64>> {
    if size == 0 {
        return Err(Error::usage("DFT size must be at least 1"));
    }
    let scale = 1.0 / (size as f64).sqrt();
    Ok(DMatrix::from_fn(size, size, |a, b| {
        // (a·b mod n) keeps the phase argument exact for large sizes
        cis_neg(((a * b) % size) as f64 / size as f64) * scale
    }))
}

/// `F x` by direct summation.
pub fn dft_direct(x: &[Complex64]) -> Vec<Complex64> {
    transform_direct(x, false)
}

/// `F^H x` by direct summation.
pub fn idft_direct(x: &[Complex64]) -> Vec<Complex64> {
    transform_direct(x, true)
}

fn transform_direct(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|a| {
            x.iter()
                .enumerate()
                .map(|(b, &v)| {
                    let cycles = ((a * b) % n) as f64 / n as f64;
                    v * if inverse {
                        cis_pos(cycles)
                    } else {
                        cis_neg(cycles)
                    }
                })
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

fn transform(x: &[Complex64], direction: FftDirection) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    if !n.is_power_of_two() {
        return transform_direct(x, direction == FftDirection::Inverse);
    }
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft(n, direction).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// `F x`; uses an FFT for power-of-two lengths and direct summation otherwise.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Forward)
}

/// Virtual-angle coordinates `F^H x`.
pub fn virtual_angle(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Inverse)
}

/// Which spatial dimension a spectrum was taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "domain")]
pub enum SpectrumDomain {
    /// The `M` antennas of one AP.
    Antenna { ap: usize },
    /// The `L` APs (macro-steering vector).
    AccessPoint,
}

/// Magnitudes of virtual-angle coordinates, one row per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualAngleSpectrum {
    domain: SpectrumDomain,
    size: usize,
    /// Row-major `P × size`.
    magnitudes: Vec<f64>,
    /// Squared norm of the spatial input vector at each subcarrier.
    input_energy: Vec<f64>,
}

impl VirtualAngleSpectrum {
    fn from_vectors(
        domain: SpectrumDomain,
        size: usize,
        vectors: impl Iterator<Item = Vec<Complex64>>,
    ) -> Self {
        let mut magnitudes = Vec::new();
        let mut input_energy = Vec::new();
        for v in vectors {
            input_energy.push(v.iter().map(|z| z.norm_sqr()).sum());
            magnitudes.extend(virtual_angle(&v).iter().map(|z| z.norm()));
        }
        Self {
            domain,
            size,
            magnitudes,
            input_energy,
        }
    }

    /// Builds a spectrum from precomputed magnitudes (`P` rows of `size` bins).
    pub fn from_magnitudes(
        domain: SpectrumDomain,
        size: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::usage("every spectrum row must have `size` bins"));
        }
        let input_energy = rows.iter().map(|r| r.iter().map(|m| m * m).sum()).collect();
        Ok(Self {
            domain,
            size,
            magnitudes: rows.concat(),
            input_energy,
        })
    }

    pub fn domain(&self) -> SpectrumDomain {
        self.domain
    }

    /// Number of virtual-angle bins.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_subcarriers(&self) -> usize {
        self.input_energy.len()
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.magnitudes[p * self.size..(p + 1) * self.size]
    }

    pub fn magnitude(&self, p: usize, bin: usize) -> f64 {
        self.row(p)[bin]
    }

    /// Sum of squared magnitudes at subcarrier `p`.
    pub fn energy(&self, p: usize) -> f64 {
        self.row(p).iter().map(|m| m * m).sum()
    }

    /// Squared norm of the spatial vector the row was computed from.
    pub fn input_energy(&self, p: usize) -> f64 {
        self.input_energy[p]
    }

    /// Bin with the largest magnitude at subcarrier `p` (lowest index on ties).
    pub fn peak(&self, p: usize) -> usize {
        let row = self.row(p);
        let mut best = 0;
        for (b, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = b;
            }
        }
        best
    }
}

/// Antenna-domain spectrum of AP `l` at every subcarrier of `tensor`.
pub fn virtual_angle_transform(tensor: &ChannelTensor, l: usize) -> Result<VirtualAngleSpectrum> {
    tensor.scenario().check_ap(l)?;
    let (_, num_antennas, num_sc) = tensor.dims();
    Ok(VirtualAngleSpectrum::from_vectors(
        SpectrumDomain::Antenna { ap: l },
        num_antennas,
        (0..num_sc).map(|p| tensor.antenna_vector(l, p)),
    ))
}

/// AP-domain spectrum of the macro-steering vector of UE `k` at every subcarrier.
pub fn macro_virtual_transform(
    scenario: &Scenario,
    grid: &OfdmGrid,
    k: usize,
) -> Result<VirtualAngleSpectrum> {
    let vectors = grid
        .frequencies()
        .iter()
        .map(|&f| macro_steering(scenario, k, f).map(|d| d.entries().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(VirtualAngleSpectrum::from_vectors(
        SpectrumDomain::AccessPoint,
        scenario.num_aps(),
        vectors.into_iter(),
    ))
}

/// Peak trajectory of a spectrum across the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquintReport {
    pub peak_per_subcarrier: Vec<usize>,
    /// Circular distance in bins between the peaks at the lowest and highest subcarrier.
    pub excursion_bins: usize,
    /// True DoAs of the paths behind the spectrum, when known. Radians.
    #[serde(
        skip_serializing_if = "Vec::is_empty",
        serialize_with = "crate::export::serialize_f64_slice"
    )]
    pub reference_doas: Vec<f64>,
}

impl SquintReport {
    pub fn with_reference_doas(mut self, doas: Vec<f64>) -> Self {
        self.reference_doas = doas;
        self
    }
}

/// Distance between two bins on a ring of `size` bins.
pub fn circular_distance(a: usize, b: usize, size: usize) -> usize {
    let d = a.abs_diff(b) % size.max(1);
    d.min(size - d)
}

pub fn squint_report(spectrum: &VirtualAngleSpectrum) -> Result<SquintReport> {
    let num_sc = spectrum.num_subcarriers();
    if num_sc == 0 {
        return Err(Error::usage("spectrum has no subcarriers"));
    }
    let peaks: Vec<usize> = (0..num_sc).map(|p| spectrum.peak(p)).collect();
    let excursion = circular_distance(peaks[0], peaks[num_sc - 1], spectrum.size());
    Ok(SquintReport {
        peak_per_subcarrier: peaks,
        excursion_bins: excursion,
        reference_doas: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_size_one_and_two() {
        let f1 = dft_matrix(1).unwrap();
        assert_eq!(f1[(0, 0)], c(1.0, 0.0));
        let f2 = dft_matrix(2).unwrap();
        let expected = [[1.0, 1.0], [1.0, -1.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((f2[(a, b)] - c(expected[a][b] * FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
            }
        }
        assert!(dft_matrix(0).is_err());
    }

    #[test]
    fn fft_and_direct_agree() {
        for n in [1usize, 2, 4, 8, 16, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
                .collect();
            for (a, b) in dft(&x).iter().zip(dft_direct(&x)) {
                assert!((a - b).norm() < 1e-10);
            }
            for (a, b) in virtual_angle(&x).iter().zip(idft_direct(&x)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn matrix_and_vector_transforms_agree() {
        let n = 6;
        let x: Vec<Complex64> = (0..n).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
        let f = dft_matrix(n).unwrap();
        let y = &f * nalgebra::DVector::from_vec(x.clone());
        for (a, b) in y.iter().zip(dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn circular_distances() {
        assert_eq!(circular_distance(3, 5, 8), 2);
        assert_eq!(circular_distance(0, 7, 8), 1);
        assert_eq!(circular_distance(4, 4, 8), 0);
        assert_eq!(circular_distance(0, 0, 1), 0);
    }

    #[test]
    fn squint_of_constant_spectrum_is_zero() {
        let row = vec![0.1, 0.9, 0.3, 0.0];
        let s = VirtualAngleSpectrum::from_magnitudes(SpectrumDomain::AccessPoint, 4, vec![row; 5])
            .unwrap();
        let r = squint_report(&s).unwrap();
        assert_eq!(r.excursion_bins, 0);
        assert_eq!(r.peak_per_subcarrier, vec![1; 5]);
    }

    #[test]
    fn squint_excursion_by_definition() {
        let mut low = vec![0.0; 8];
        low[3] = 1.0;
        let mut mid = vec![0.0; 8];
        mid[4] = 1.0;
        let mut high = vec![0.0; 8];
        high[5] = 1.0;
        let s = VirtualAngleSpectrum::from_magnitudes(
            SpectrumDomain::Antenna { ap: 0 },
            8,
            vec![low, mid, high],
        )
        .unwrap();
        let r = squint_report(&s).unwrap();
        assert_eq!(r.peak_per_subcarrier, vec![3, 4, 5]);
        assert_eq!(r.excursion_bins, 2);
    }

    #[test]
    fn report_serializes_flat() {
        let r = SquintReport {
            peak_per_subcarrier: vec![1, 2],
            excursion_bins: 1,
            reference_doas: vec![],
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"peak_per_subcarrier":[1,2],"excursion_bins":1}"#
        );
    }
}
