//! Integer reference pipeline for a digital KDE datapath:
//! subtract, square, exponential look-up, accumulate.
//!
//! The squared difference of two `k`-bit codes is a `2k`-bit word. The
//! look-up table is addressed by the top `lut_bits` of that word, so
//! address `j` covers squared differences starting at `j · 2^(2k - lut_bits)`.
//! When `lut_bits ≥ 2k` every square gets its own address.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointSpec {
    /// Word size `k` of window and sample codes.
    pub input_bits: u32,
    /// Address width of the exponential table.
    pub lut_bits: u32,
    /// Width of each stored table entry.
    pub lut_value_bits: u32,
}

const MAX_INPUT_BITS: u32 = 16;
const MAX_LUT_BITS: u32 = 24;
const MAX_LUT_VALUE_BITS: u32 = 32;

impl FixedPointSpec {
    pub fn new(input_bits: u32, lut_bits: u32, lut_value_bits: u32) -> Result<Self> {
        let spec = Self {
            input_bits,
            lut_bits,
            lut_value_bits,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_INPUT_BITS).contains(&self.input_bits) {
            return Err(Error::invalid(
                "input_bits",
                format!("must be in [1, {MAX_INPUT_BITS}]"),
            ));
        }
        if !(1..=MAX_LUT_BITS).contains(&self.lut_bits) {
            return Err(Error::invalid(
                "lut_bits",
                format!("must be in [1, {MAX_LUT_BITS}]"),
            ));
        }
        if !(1..=MAX_LUT_VALUE_BITS).contains(&self.lut_value_bits) {
            return Err(Error::invalid(
                "lut_value_bits",
                format!("must be in [1, {MAX_LUT_VALUE_BITS}]"),
            ));
        }
        Ok(())
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.input_bits) - 1
    }

    pub fn lut_len(&self) -> usize {
        1usize << self.lut_bits
    }

    pub fn lut_max(&self) -> u64 {
        (1u64 << self.lut_value_bits) - 1
    }

    fn square_bits(&self) -> u32 {
        2 * self.input_bits
    }

    /// Table address of a squared difference.
    pub fn address(&self, square: u64) -> usize {
        let addr = if self.lut_bits >= self.square_bits() {
            square << (self.lut_bits - self.square_bits())
        } else {
            square >> (self.square_bits() - self.lut_bits)
        };
        (addr as usize).min(self.lut_len() - 1)
    }

    /// Smallest squared difference mapped to address `j`.
    pub fn square_at(&self, j: usize) -> f64 {
        let shift = self.square_bits() as i32 - self.lut_bits as i32;
        j as f64 * 2f64.powi(shift)
    }

    /// Accumulator width needed for `n` table values without overflow.
    pub fn accumulator_bits(&self, n: usize) -> u32 {
        let grow = if n <= 1 {
            0
        } else {
            usize::BITS - (n - 1).leading_zeros()
        };
        self.lut_value_bits + grow
    }
}

/// Table of `round(max · exp(-s_j / (2σ²)))` for every address `j`.
pub fn build_exp_lut(fp: &FixedPointSpec, sigma_code: f64) -> Result<Vec<u64>> {
    fp.validate()?;
    if !(sigma_code.is_finite() && sigma_code > 0.0) {
        return Err(Error::invalid("sigma_code", "must be positive and finite"));
    }
    let max = fp.lut_max() as f64;
    let denom = 2.0 * sigma_code * sigma_code;
    Ok((0..fp.lut_len())
        .map(|j| (max * (-fp.square_at(j) / denom).exp()).round() as u64)
        .collect())
}

/// Accumulated integer likelihood of `sample_code` against the window.
pub fn fixed_point_pdf(
    window_codes: &[u32],
    sample_code: u32,
    fp: &FixedPointSpec,
    lut: &[u64],
) -> Result<u64> {
    fp.validate()?;
    if lut.len() != fp.lut_len() {
        return Err(Error::LutSizeMismatch {
            expected: fp.lut_len(),
            found: lut.len(),
        });
    }
    if fp.accumulator_bits(window_codes.len()) > u64::BITS {
        return Err(Error::invalid("window", "accumulator would overflow 64 bits"));
    }
    let max_code = fp.max_code();
    let check = |code: u32| {
        if code > max_code {
            Err(Error::CodeOutOfRange {
                code: code as u64,
                bits: fp.input_bits,
            })
        } else {
            Ok(())
        }
    };
    check(sample_code)?;
    let mut acc: u64 = 0;
    for &c in window_codes {
        check(c)?;
        let diff = sample_code.abs_diff(c) as u64;
        let square = diff * diff;
        acc += lut[fp.address(square)];
    }
    Ok(acc)
}

/// Fixed-point result rescaled to the unnormalized average kernel height,
/// `acc / (N · (2^lut_value_bits - 1))`.
pub fn scaled_fixed_point_pdf(
    window_codes: &[u32],
    sample_code: u32,
    fp: &FixedPointSpec,
    lut: &[u64],
) -> Result<f64> {
    if window_codes.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let acc = fixed_point_pdf(window_codes, sample_code, fp, lut)?;
    Ok(acc as f64 / (window_codes.len() as f64 * fp.lut_max() as f64))
}
