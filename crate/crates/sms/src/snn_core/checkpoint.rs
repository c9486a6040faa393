//! Checkpoint file layout, all integers and floats little-endian:
//!
//! ```text
//! magic "SMSCKPT1" (8 bytes)
//! u64 steps, u64 n_in, u64 n_out, u64 n_hidden
//! f64 lif decay, f64 lif threshold, u8 reset (0 subtract, 1 zero),
//! u8 final_relu
//! range table: u8 tag (0 shared, 1 per channel), u64 count,
//!              count * (f64 lo, f64 hi)
//! dense1 weights, dense1 bias, dense2 weights, dense2 bias
//!   as f64 row-major
//! u64 length checksum = byte count of everything before it
//! ```

use std::path::Path;

use crate::error::{Result, SmsError};
use crate::spike_codec::{NormRange, RangeSet};

use super::lif::{LifConfig, ResetKind};
use super::network::{DenseLayer, Network, NetworkShape};

const MAGIC: &[u8; 8] = b"SMSCKPT1";

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(SmsError::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }
}

pub fn save_checkpoint(path: &Path, net: &Network, ranges: &RangeSet) -> Result<()> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u64(net.shape.steps as u64);
    w.u64(net.shape.n_in as u64);
    w.u64(net.shape.n_out as u64);
    w.u64(net.n_hidden() as u64);
    w.f64(net.lif.decay);
    w.f64(net.lif.threshold);
    w.u8(match net.lif.reset {
        ResetKind::Subtract => 0,
        ResetKind::Zero => 1,
    });
    w.u8(net.final_relu as u8);
    match ranges {
        RangeSet::Shared(r) => {
            w.u8(0);
            w.u64(1);
            w.f64(r.lo);
            w.f64(r.hi);
        }
        RangeSet::PerChannel(rs) => {
            w.u8(1);
            w.u64(rs.len() as u64);
            for r in rs {
                w.f64(r.lo);
                w.f64(r.hi);
            }
        }
    }
    w.f64s(&net.dense1.weights);
    w.f64s(&net.dense1.bias);
    w.f64s(&net.dense2.weights);
    w.f64s(&net.dense2.bias);
    let len = w.buf.len() as u64;
    w.u64(len);
    std::fs::write(path, &w.buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(Network, RangeSet)> {
    let buf = std::fs::read(path)?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(SmsError::Checkpoint("bad magic".into()));
    }
    let steps = r.u64()? as usize;
    let n_in = r.u64()? as usize;
    let n_out = r.u64()? as usize;
    let n_hidden = r.u64()? as usize;
    if steps == 0 || n_in == 0 || n_out == 0 || n_hidden == 0 {
        return Err(SmsError::Checkpoint("zero dimension in shape header".into()));
    }
    let decay = r.f64()?;
    let threshold = r.f64()?;
    let reset = match r.u8()? {
        0 => ResetKind::Subtract,
        1 => ResetKind::Zero,
        other => return Err(SmsError::Checkpoint(format!("bad reset tag {other}"))),
    };
    let final_relu = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(SmsError::Checkpoint(format!("bad final_relu tag {other}"))),
    };
    let lif = LifConfig { decay, threshold, reset };
    lif.validate().map_err(SmsError::Checkpoint)?;
    let range_tag = r.u8()?;
    let count = r.u64()? as usize;
    let mut rs = Vec::with_capacity(count);
    for _ in 0..count {
        let lo = r.f64()?;
        let hi = r.f64()?;
        rs.push(NormRange::new(lo, hi).map_err(|e| SmsError::Checkpoint(e.to_string()))?);
    }
    let ranges = match range_tag {
        0 if count == 1 => RangeSet::Shared(rs[0]),
        1 => RangeSet::PerChannel(rs),
        other => {
            return Err(SmsError::Checkpoint(format!(
                "bad range tag {other} with count {count}"
            )))
        }
    };
    let shape = NetworkShape { steps, n_in, n_out };
    let dense1 = DenseLayer {
        in_dim: shape.flat_in(),
        out_dim: n_hidden,
        weights: r.f64s(shape.flat_in() * n_hidden)?,
        bias: r.f64s(n_hidden)?,
    };
    let dense2 = DenseLayer {
        in_dim: n_hidden,
        out_dim: shape.flat_out(),
        weights: r.f64s(n_hidden * shape.flat_out())?,
        bias: r.f64s(shape.flat_out())?,
    };
    let body_len = r.pos as u64;
    let checksum = r.u64()?;
    if checksum != body_len {
        return Err(SmsError::Checkpoint(format!(
            "length checksum {checksum} does not match body length {body_len}"
        )));
    }
    if r.pos != buf.len() {
        return Err(SmsError::Checkpoint("trailing bytes after checksum".into()));
    }
    Ok((
        Network { lif, dense1, dense2, shape, final_relu },
        ranges,
    ))
}
