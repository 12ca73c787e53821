//! CSV, JSON and binary writers for simulation artifacts.
//!
//! Every floating-point value is written with 17 significant digits
//! (`{:.16e}`), which round-trips an `f64` exactly.
//!
//! # Binary channel format
//!
//! A [`ChannelTensor`] can be stored as a 16-byte header followed by the entries:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `b"CFCT"`                |
//! | 4      | 2    | format version, `u16` LE (= 1) |
//! | 6      | 2    | `L`, `u16` LE                  |
//! | 8      | 4    | `M`, `u32` LE                  |
//! | 12     | 4    | `P`, `u32` LE                  |
//!
//! The body holds `L·M·P` complex values in `(l, m, p)` order (subcarrier fastest),
//! each as two little-endian `f64` (re, im).

use std::io::{self, Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::beamsquint::VirtualAngleSpectrum;
use crate::channel::ChannelTensor;
use crate::{Error, Result};

pub const CHANNEL_MAGIC: [u8; 4] = *b"CFCT";
pub const CHANNEL_FORMAT_VERSION: u16 = 1;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `serialize_with` helper writing a float as a 17-digit JSON number.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!(
            "cannot serialize non-finite value {x}"
        )));
    }
    RawValue::from_string(fmt_f64(*x))
        .map_err(S::Error::custom)?
        .serialize(s)
}

/// `serialize_with` helper for a list of floats.
pub fn serialize_f64_slice<S: Serializer>(
    xs: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Fixed(*x))?;
    }
    seq.end()
}

struct Fixed(f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_f64(&self.0, s)
    }
}

/// Writes a JSON record followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// Channel tensors as CSV rows `ue,ap,antenna,subcarrier,freq_offset_hz,re,im`.
pub fn write_channel_csv<W: Write>(mut w: W, tensors: &[ChannelTensor]) -> Result<()> {
    writeln!(w, "ue,ap,antenna,subcarrier,freq_offset_hz,re,im")?;
    for t in tensors {
        let (num_aps, num_antennas, num_sc) = t.dims();
        for l in 0..num_aps {
            for m in 0..num_antennas {
                for p in 0..num_sc {
                    let h = t.get(l, m, p);
                    writeln!(
                        w,
                        "{},{l},{m},{p},{},{},{}",
                        t.ue(),
                        fmt_f64(t.grid().frequency(p)),
                        fmt_f64(h.re),
                        fmt_f64(h.im)
                    )?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_channel_binary<W: Write>(mut w: W, tensor: &ChannelTensor) -> Result<()> {
    let (num_aps, num_antennas, num_sc) = tensor.dims();
    let too_large = |what: &str| Error::usage(format!("{what} does not fit the binary header"));
    let l = u16::try_from(num_aps).map_err(|_| too_large("L"))?;
    let m = u32::try_from(num_antennas).map_err(|_| too_large("M"))?;
    let p = u32::try_from(num_sc).map_err(|_| too_large("P"))?;
    w.write_all(&CHANNEL_MAGIC)?;
    w.write_all(&CHANNEL_FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&l.to_le_bytes())?;
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&p.to_le_bytes())?;
    for h in tensor.entries() {
        w.write_all(&h.re.to_le_bytes())?;
        w.write_all(&h.im.to_le_bytes())?;
    }
    Ok(())
}

/// Contents of a binary channel file.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryChannel {
    pub num_aps: usize,
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    /// `(l, m, p)` order.
    pub entries: Vec<Complex64>,
}

pub fn read_channel_binary<R: Read>(mut r: R) -> Result<BinaryChannel> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[0..4] != CHANNEL_MAGIC {
        return Err(Error::usage("not a channel file (bad magic)"));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != CHANNEL_FORMAT_VERSION {
        return Err(Error::usage(format!(
            "unsupported channel file version {version}"
        )));
    }
    let num_aps = u16::from_le_bytes([header[6], header[7]]) as usize;
    let num_antennas = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let num_subcarriers = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;

    let count = num_aps * num_antennas * num_subcarriers;
    let mut entries = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        entries.push(Complex64::new(re, im));
    }
    Ok(BinaryChannel {
        num_aps,
        num_antennas,
        num_subcarriers,
        entries,
    })
}

/// Virtual-angle spectrum as CSV rows `subcarrier,bin,magnitude`.
pub fn write_spectrum_csv<W: Write>(mut w: W, spectrum: &VirtualAngleSpectrum) -> Result<()> {
    writeln!(w, "subcarrier,bin,magnitude")?;
    for p in 0..spectrum.num_subcarriers() {
        for (b, mag) in spectrum.row(p).iter().enumerate() {
            writeln!(w, "{p},{b},{}", fmt_f64(*mag))?;
        }
    }
    Ok(())
}

/// Complex matrix as CSV rows `row,col,re,im`.
pub fn write_complex_matrix_csv<W: Write>(mut w: W, matrix: &DMatrix<Complex64>) -> Result<()> {
    writeln!(w, "row,col,re,im")?;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            let z = matrix[(r, c)];
            writeln!(w, "{r},{c},{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
        }
    }
    Ok(())
}

/// Real matrix as CSV rows `row,col,value`.
pub fn write_real_matrix_csv<W: Write>(mut w: W, matrix: &DMatrix<f64>) -> Result<()> {
    writeln!(w, "row,col,value")?;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            writeln!(w, "{r},{c},{}", fmt_f64(matrix[(r, c)]))?;
        }
    }
    Ok(())
}

/// ISI sweep as CSV rows `cp_len,evm`.
pub fn write_isi_sweep_csv<W: Write>(mut w: W, points: &[(usize, f64)]) -> Result<()> {
    writeln!(w, "cp_len,evm")?;
    for (cp, evm) in points {
        writeln!(w, "{cp},{}", fmt_f64(*evm))?;
    }
    Ok(())
}
