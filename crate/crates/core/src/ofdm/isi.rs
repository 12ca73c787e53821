//! Time-domain OFDM link over the multi-AP impulse response.
//!
//! Transmitter: random QPSK on every subcarrier, `P`-point IFFT, cyclic prefix of
//! `cp_len` samples, symbols sent back to back at rate `W`.
//!
//! Channel: every (AP, antenna) branch sees the taps of
//! [`spatial_time_tap_gains`](crate::channel::spatial_time_tap_gains), placed on the
//! nearest sample after subtracting the earliest arrival of the whole system. That
//! earliest arrival defines the common receiver timing.
//!
//! Receiver: per branch, drop the CP, `P`-point FFT, one-tap zero-forcing with the
//! branch's sampled frequency response, then average the branch estimates with
//! equal weights. No noise is added, so the remaining error is ISI/ICI.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::channel::{spatial_time_tap_gains, OfdmGrid};
use crate::phase::cis_neg;
use crate::rng::{derive_seed, substream, DOMAIN_OFDM_SYMBOL};
use crate::scenario::PathSet;
use crate::{Error, Result};

/// Integer-delay taps of one branch, sorted by delay.
type SampledTaps = Vec<(usize, Complex64)>;

fn sample_taps(paths: &PathSet, k: usize, bandwidth: f64) -> Result<Vec<SampledTaps>> {
    let s = paths.scenario();
    let mut branches = Vec::with_capacity(s.num_aps() * s.num_antennas());
    for l in 0..s.num_aps() {
        for m in 0..s.num_antennas() {
            branches.push(spatial_time_tap_gains(paths, k, l, m)?);
        }
    }
    let earliest = branches
        .iter()
        .flatten()
        .map(|t| t.delay)
        .fold(f64::INFINITY, f64::min);

    Ok(branches
        .into_iter()
        .map(|taps| {
            let mut sampled: SampledTaps = taps
                .iter()
                .map(|t| (((t.delay - earliest) * bandwidth).round() as usize, t.gain))
                .collect();
            sampled.sort_by_key(|&(d, _)| d);
            let mut merged: SampledTaps = Vec::with_capacity(sampled.len());
            for (d, g) in sampled {
                match merged.last_mut() {
                    Some((last, acc)) if *last == d => *acc += g,
                    _ => merged.push((d, g)),
                }
            }
            merged
        })
        .collect())
}

fn qpsk_symbols(seed: u64, index: usize, count: usize) -> Vec<Complex64> {
    let mut rng = substream(derive_seed(seed, DOMAIN_OFDM_SYMBOL, index as u64), 0);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    (0..count)
        .map(|_| {
            let re = if rng.gen::<bool>() { a } else { -a };
            let im = if rng.gen::<bool>() { a } else { -a };
            Complex64::new(re, im)
        })
        .collect()
}

/// Error-vector magnitude of a noise-free OFDM link for UE `k` with a
/// `cp_len`-sample cyclic prefix, over `num_symbols` symbols.
pub fn simulate_isi(
    paths: &PathSet,
    grid: &OfdmGrid,
    k: usize,
    cp_len: usize,
    num_symbols: usize,
    seed: u64,
) -> Result<f64> {
    let s = paths.scenario();
    s.check_ue(k)?;
    let num_sc = grid.num_subcarriers();
    if num_symbols < 2 {
        return Err(Error::config(
            "isi.num_symbols",
            "at least 2 OFDM symbols are required",
        ));
    }
    if cp_len > num_sc {
        return Err(Error::config(
            "cp_len",
            format!("cyclic prefix of {cp_len} samples exceeds the {num_sc}-sample symbol"),
        ));
    }
    if grid.bandwidth() <= 0.0 {
        return Err(Error::config(
            "ofdm.bandwidth_hz",
            "a positive bandwidth is needed to sample the channel",
        ));
    }

    let bins: Vec<usize> = (0..num_sc).map(|p| grid.fft_bin(p)).collect();
    let scale = 1.0 / (num_sc as f64).sqrt();
    let mut planner = FftPlanner::new();
    let ifft: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(num_sc);
    let fft: Arc<dyn Fft<f64>> = planner.plan_fft_forward(num_sc);

    let data: Vec<Vec<Complex64>> = (0..num_symbols)
        .into_par_iter()
        .map(|i| qpsk_symbols(seed, i, num_sc))
        .collect();

    let frame = num_sc + cp_len;
    let mut tx = Vec::with_capacity(num_symbols * frame);
    for symbol in &data {
        let mut buf = vec![Complex64::new(0.0, 0.0); num_sc];
        for (p, &x) in symbol.iter().enumerate() {
            buf[bins[p]] = x;
        }
        ifft.process(&mut buf);
        buf.iter_mut().for_each(|z| *z *= scale);
        tx.extend_from_slice(&buf[num_sc - cp_len..]);
        tx.extend_from_slice(&buf);
    }

    let branches = sample_taps(paths, k, grid.bandwidth())?;
    let estimates: Vec<Vec<Complex64>> = branches
        .par_iter()
        .map(|taps| {
            let response: Vec<Complex64> = bins
                .iter()
                .map(|&bin| {
                    taps.iter()
                        .map(|&(d, g)| g * cis_neg((bin * d % num_sc) as f64 / num_sc as f64))
                        .sum()
                })
                .collect();
            if response.iter().any(|h| h.norm() == 0.0) {
                return Err(Error::DegenerateChannel(
                    "a receive branch has a spectral null; zero-forcing is undefined".into(),
                ));
            }

            let mut rx = vec![Complex64::new(0.0, 0.0); tx.len()];
            for &(d, g) in taps {
                for (t, &x) in tx.iter().enumerate().take(tx.len().saturating_sub(d)) {
                    rx[t + d] += g * x;
                }
            }

            let mut out = Vec::with_capacity(num_symbols * num_sc);
            let mut buf = vec![Complex64::new(0.0, 0.0); num_sc];
            for i in 0..num_symbols {
                let start = i * frame + cp_len;
                buf.copy_from_slice(&rx[start..start + num_sc]);
                fft.process(&mut buf);
                out.extend(
                    bins.iter()
                        .zip(&response)
                        .map(|(&bin, h)| buf[bin] * scale / h),
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let weight = 1.0 / estimates.len() as f64;
    let mut combined = vec![Complex64::new(0.0, 0.0); num_symbols * num_sc];
    for branch in &estimates {
        for (acc, x) in combined.iter_mut().zip(branch) {
            *acc += x * weight;
        }
    }

    let (err, sig) = data
        .iter()
        .flatten()
        .zip(&combined)
        .fold((0.0, 0.0), |(e, s), (x, y)| {
            (e + (y - x).norm_sqr(), s + x.norm_sqr())
        });
    Ok((err / sig).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SubcarrierLayout;
    use crate::scenario::{ArrayConfig, Position, Scenario};
    use crate::SPEED_OF_LIGHT;

    fn grid() -> OfdmGrid {
        OfdmGrid::new(400e6, 64, SubcarrierLayout::Centered).unwrap()
    }

    /// APs on the x axis at distances that are whole samples at 400 MHz.
    fn on_grid(aps_samples: &[f64], num_antennas: usize) -> PathSet {
        let sample = SPEED_OF_LIGHT / 400e6;
        let array = ArrayConfig::with_spacing_wavelengths(num_antennas, 0.5, 28e9).unwrap();
        let s = Scenario::new(
            aps_samples
                .iter()
                .map(|&n| Position::new(n * sample, 0.0))
                .collect(),
            vec![Position::new(0.0, 0.0)],
            array,
            1,
        )
        .unwrap();
        let raw = (0..aps_samples.len())
            .map(|l| (Complex64::from_polar(1.0 / (l + 1) as f64, l as f64), 0.0))
            .collect();
        PathSet::from_raw(s, raw).unwrap()
    }

    #[test]
    fn single_tap_channel_has_no_isi() {
        let ps = on_grid(&[20.0], 1);
        for cp in [1, 4, 16] {
            assert!(simulate_isi(&ps, &grid(), 0, cp, 4, 3).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sufficient_cp_removes_isi() {
        let ps = on_grid(&[5.0, 45.0], 2);
        let evm = simulate_isi(&ps, &grid(), 0, 40, 6, 1).unwrap();
        assert!(evm < 1e-6, "evm {evm}");
    }

    #[test]
    fn missing_cp_leaves_isi() {
        let ps = on_grid(&[5.0, 45.0], 2);
        let evm = simulate_isi(&ps, &grid(), 0, 0, 6, 1).unwrap();
        assert!(evm > 1e-2, "evm {evm}");
    }

    #[test]
    fn deterministic_in_seed() {
        let ps = on_grid(&[5.0, 25.0], 2);
        let a = simulate_isi(&ps, &grid(), 0, 4, 5, 9).unwrap();
        let b = simulate_isi(&ps, &grid(), 0, 4, 5, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_bad_arguments() {
        let ps = on_grid(&[5.0], 1);
        assert!(matches!(
            simulate_isi(&ps, &grid(), 0, 65, 4, 0),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            simulate_isi(&ps, &grid(), 0, 4, 1, 0),
            Err(Error::Config { .. })
        ));
        let flat = OfdmGrid::new(0.0, 64, SubcarrierLayout::Centered).unwrap();
        assert!(simulate_isi(&ps, &flat, 0, 4, 4, 0).is_err());
        assert!(matches!(
            simulate_isi(&ps, &grid(), 1, 4, 4, 0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn taps_merge_on_shared_samples() {
        let ps = on_grid(&[5.0, 9.0], 3);
        let taps = sample_taps(&ps, 0, 400e6).unwrap();
        assert_eq!(taps.len(), 6);
        assert_eq!(taps[0][0].0, 0);
        assert_eq!(taps[3][0].0, 4);
    }
}
