use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const GRID_SIDECAR_VERSION: u32 = 1;

/// JSON sidecar describing a flat little-endian `f64` sample file.
///
/// Complex samples are stored interleaved as `re, im` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub version: u32,
    pub grid: GridSpec,
    pub complex: bool,
}

impl GridFunction {
    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar { version: GRID_SIDECAR_VERSION, grid: *self.spec(), complex: !self.is_real() }
    }

    pub fn encode(&self) -> (String, Vec<u8>) {
        let sidecar = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        let mut bytes = Vec::with_capacity(self.len() * if self.is_real() { 8 } else { 16 });
        match self.im() {
            None => self.re().iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes())),
            Some(im) => {
                for (r, i) in self.re().iter().zip(im) {
                    bytes.extend_from_slice(&r.to_le_bytes());
                    bytes.extend_from_slice(&i.to_le_bytes());
                }
            }
        }
        (sidecar, bytes)
    }

    pub fn decode(sidecar: &str, bytes: &[u8]) -> Result<Self> {
        let meta: GridSidecar = serde_json::from_str(sidecar)?;
        if meta.version != GRID_SIDECAR_VERSION {
            return Err(Error::Parse(format!("unsupported sidecar version {}", meta.version)));
        }
        meta.grid.validate()?;
        let width = if meta.complex { 16 } else { 8 };
        let expected = meta.grid.len().checked_mul(width).ok_or_else(|| Error::Parse("grid too large".into()))?;
        if bytes.len() != expected {
            return Err(Error::Parse(format!("expected {expected} bytes of samples, found {}", bytes.len())));
        }
        let values: Vec<f64> =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        if meta.complex {
            let (re, im) = values.chunks_exact(2).map(|p| (p[0], p[1])).unzip();
            GridFunction::complex(meta.grid, re, im)
        } else {
            GridFunction::real(meta.grid, values)
        }
    }

    /// Writes `<stem>.bin` and `<stem>.json`.
    pub fn write_to(&self, stem: &Path) -> Result<()> {
        let (sidecar, bytes) = self.encode();
        std::fs::write(stem.with_extension("bin"), bytes)?;
        std::fs::write(stem.with_extension("json"), sidecar)?;
        Ok(())
    }

    pub fn read_from(stem: &Path) -> Result<Self> {
        let sidecar = std::fs::read_to_string(stem.with_extension("json"))?;
        let bytes = std::fs::read(stem.with_extension("bin"))?;
        Self::decode(&sidecar, &bytes)
    }
}
