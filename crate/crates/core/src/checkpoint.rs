//! Binary checkpoint format.
//!
//! All integers and reals are little-endian.
//!
//! ```text
//! magic      8 bytes  "ADGCLCKP"
//! version    u32      1
//! layers     u32      number of encoder matrices L
//! shapes     (L + 1) × (rows u64, cols u64), encoder layers then bilinear
//! step       u64      Adam step counter
//! payload    for each matrix in shape order: weights, first moment,
//!            second moment, each rows·cols f64 in row-major order
//! ```

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{AdamState, ModelParams, Moments};

pub const MAGIC: &[u8; 8] = b"ADGCLCKP";
pub const VERSION: u32 = 1;

pub fn encode_checkpoint(params: &ModelParams) -> Vec<u8> {
    let matrices: Vec<(&Array2<f64>, &Moments)> = params
        .gcn
        .iter()
        .zip(&params.adam.gcn)
        .chain([(&params.bilinear, &params.adam.bilinear)])
        .collect();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params.gcn.len() as u32).to_le_bytes());
    for (w, _) in &matrices {
        out.extend_from_slice(&(w.nrows() as u64).to_le_bytes());
        out.extend_from_slice(&(w.ncols() as u64).to_le_bytes());
    }
    out.extend_from_slice(&params.adam.step.to_le_bytes());
    for (w, m) in &matrices {
        for a in [*w, &m.first, &m.second] {
            for v in a.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::Checkpoint(format!(
                "truncated: needed {len} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )));
        };
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let len = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| Error::Checkpoint("matrix shape overflows".into()))?;
        let raw = self.take(len)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Array2::from_shape_vec((rows, cols), data).expect("shape checked"))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let layers = r.u32()? as usize;
    if layers == 0 {
        return Err(Error::Checkpoint("checkpoint has no encoder layers".into()));
    }
    let mut shapes = Vec::with_capacity(layers + 1);
    for _ in 0..=layers {
        shapes.push((r.u64()? as usize, r.u64()? as usize));
    }
    let d = shapes[layers].0;
    if shapes[layers].1 != d || shapes[..layers].iter().any(|s| s.1 != d) || shapes[1..layers].iter().any(|s| s.0 != d) {
        return Err(Error::Checkpoint(format!("inconsistent matrix shapes {shapes:?}")));
    }
    let step = r.u64()?;
    let mut weights = Vec::with_capacity(layers + 1);
    let mut moments = Vec::with_capacity(layers + 1);
    for &(rows, cols) in &shapes {
        weights.push(r.matrix(rows, cols)?);
        moments.push(Moments {
            first: r.matrix(rows, cols)?,
            second: r.matrix(rows, cols)?,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after payload",
            bytes.len() - r.pos
        )));
    }
    let bilinear = weights.pop().expect("bilinear present");
    let bilinear_moments = moments.pop().expect("bilinear present");
    Ok(ModelParams {
        gcn: weights,
        bilinear,
        adam: AdamState {
            gcn: moments,
            bilinear: bilinear_moments,
            step,
        },
    })
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(params)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
