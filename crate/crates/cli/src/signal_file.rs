//! Binary signal container.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `SFFT`                            |
//! | 4      | 4    | version, currently 1                    |
//! | 8      | 4    | element count                           |
//! | 12     | 1    | precision tag: 4 single, 8 double       |
//! | 13     | 3    | zero padding                            |
//! | 16     | ...  | interleaved re/im pairs, natural order  |
//!
//! A batch is its signals concatenated, each contiguous.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use stockfft_core::{Complex32, Complex64, Precision};

pub const MAGIC: [u8; 4] = *b"SFFT";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalFile {
    Single(Vec<Complex32>),
    Double(Vec<Complex64>),
}

impl SignalFile {
    pub fn len(&self) -> usize {
        match self {
            SignalFile::Single(v) => v.len(),
            SignalFile::Double(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> Precision {
        match self {
            SignalFile::Single(_) => Precision::Single,
            SignalFile::Double(_) => Precision::Double,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tag = self.precision().real_bytes();
        let mut out = Vec::with_capacity(HEADER_BYTES + self.len() * 2 * tag);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.push(tag as u8);
        out.extend_from_slice(&[0; 3]);
        match self {
            SignalFile::Single(v) => v.iter().for_each(|z| {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }),
            SignalFile::Double(v) => v.iter().for_each(|z| {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        ensure!(bytes.len() >= HEADER_BYTES, "signal file is {} bytes, shorter than its header", bytes.len());
        ensure!(bytes[..4] == MAGIC, "not a signal file (bad magic)");
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let version = word(4);
        ensure!(version == VERSION, "unsupported signal file version {version}");
        let count = word(8) as usize;
        let tag = bytes[12];
        ensure!(bytes[13..16] == [0; 3], "nonzero header padding");
        let payload = &bytes[HEADER_BYTES..];
        let expected = count
            .checked_mul(2 * tag as usize)
            .context("element count overflows")?;
        ensure!(
            payload.len() == expected,
            "payload is {} bytes, header promises {count} elements of tag {tag} ({expected} bytes)",
            payload.len()
        );
        Ok(match tag {
            4 => SignalFile::Single(
                payload
                    .chunks_exact(8)
                    .map(|c| Complex32::new(f32::from_le_bytes(c[..4].try_into().unwrap()), f32::from_le_bytes(c[4..].try_into().unwrap())))
                    .collect(),
            ),
            8 => SignalFile::Double(
                payload
                    .chunks_exact(16)
                    .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
                    .collect(),
            ),
            other => bail!("unknown precision tag {other}"),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).with_context(|| format!("writing {}", path.display()))
    }
}
