//! Spike encoders and decoders.
//!
//! Three codecs convert real-valued vectors to binary spike trains and back:
//! lower-triangular (k leading ones, k proportional to the normalized value),
//! rate (Bernoulli draw per spike step with probability equal to the
//! normalized value) and float32 (the raw IEEE-754 bit pattern, 32 steps).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmsError};

/// Binary spike matrix: `steps` spike-time rows by `channels` columns.
/// Stored row-major, one byte per bit, every entry 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrain {
    pub steps: usize,
    pub channels: usize,
    bits: Vec<u8>,
}

impl SpikeTrain {
    pub fn zeros(steps: usize, channels: usize) -> Self {
        assert!(steps >= 1 && channels >= 1);
        SpikeTrain {
            steps,
            channels,
            bits: vec![0; steps * channels],
        }
    }

    #[inline]
    pub fn get(&self, step: usize, channel: usize) -> u8 {
        self.bits[step * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, step: usize, channel: usize, value: u8) {
        debug_assert!(value <= 1);
        self.bits[step * self.channels + channel] = value;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Number of ones in a channel column, counted anywhere in the column.
    pub fn ones_in_channel(&self, channel: usize) -> usize {
        (0..self.steps).filter(|&k| self.get(k, channel) == 1).count()
    }

    pub fn is_binary(&self) -> bool {
        self.bits.iter().all(|&b| b <= 1)
    }

    /// Build a train from two stacked side by side (channel concatenation).
    pub fn hcat(left: &SpikeTrain, right: &SpikeTrain) -> SpikeTrain {
        assert_eq!(left.steps, right.steps);
        let mut out = SpikeTrain::zeros(left.steps, left.channels + right.channels);
        for k in 0..left.steps {
            for j in 0..left.channels {
                out.set(k, j, left.get(k, j));
            }
            for j in 0..right.channels {
                out.set(k, left.channels + j, right.get(k, j));
            }
        }
        out
    }

    /// Extract a channel slice [lo, hi) as a new train.
    pub fn channel_slice(&self, lo: usize, hi: usize) -> SpikeTrain {
        assert!(lo < hi && hi <= self.channels);
        let mut out = SpikeTrain::zeros(self.steps, hi - lo);
        for k in 0..self.steps {
            for j in lo..hi {
                out.set(k, j - lo, self.get(k, j));
            }
        }
        out
    }

    /// Debug text form: one row per spike step, '0'/'1' characters,
    /// channels left to right.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.steps * (self.channels + 1));
        for k in 0..self.steps {
            for j in 0..self.channels {
                s.push(if self.get(k, j) == 1 { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<SpikeTrain> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(SmsError::Parse("empty spike train text".into()));
        }
        let channels = rows[0].len();
        let mut out = SpikeTrain::zeros(rows.len(), channels);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != channels {
                return Err(SmsError::Parse(format!("ragged row {k}")));
            }
            for (j, c) in row.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => out.set(k, j, 1),
                    _ => return Err(SmsError::Parse(format!("bad character {c:?} in row {k}"))),
                }
            }
        }
        Ok(out)
    }

    /// Packed binary form: row-major bits, 8 per byte, earliest bit in the
    /// most significant position, zero-padded to a whole byte.
    pub fn to_packed(&self) -> Vec<u8> {
        let n = self.bits.len();
        let mut out = vec![0u8; (n + 7) / 8];
        for (i, &b) in self.bits.iter().enumerate() {
            if b == 1 {
                out[i / 8] |= 1 << (7 - i % 8);
            }
        }
        out
    }

    pub fn from_packed(steps: usize, channels: usize, packed: &[u8]) -> Result<SpikeTrain> {
        let n = steps * channels;
        if packed.len() != (n + 7) / 8 {
            return Err(SmsError::Parse(format!(
                "packed length {} does not match {steps}x{channels}",
                packed.len()
            )));
        }
        let mut out = SpikeTrain::zeros(steps, channels);
        for i in 0..n {
            out.bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1;
        }
        Ok(out)
    }
}

/// Encoding limits in physical units. Values are mapped to [0,1] by
/// `(v - lo) / (hi - lo)`, clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRange {
    pub lo: f64,
    pub hi: f64,
}

impl NormRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(SmsError::InvalidConfig(format!(
                "NormRange requires hi > lo, got lo={lo} hi={hi}"
            )));
        }
        Ok(NormRange { lo, hi })
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One shared range for all channels, or one range per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RangeSet {
    Shared(NormRange),
    PerChannel(Vec<NormRange>),
}

impl RangeSet {
    pub fn get(&self, channel: usize) -> NormRange {
        match self {
            RangeSet::Shared(r) => *r,
            RangeSet::PerChannel(rs) => rs[channel % rs.len()],
        }
    }

    /// Mean span across channels, for quantization-floor estimates.
    pub fn mean_span(&self) -> f64 {
        match self {
            RangeSet::Shared(r) => r.span(),
            RangeSet::PerChannel(rs) => rs.iter().map(|r| r.span()).sum::<f64>() / rs.len() as f64,
        }
    }

    pub fn max_span(&self) -> f64 {
        match self {
            RangeSet::Shared(r) => r.span(),
            RangeSet::PerChannel(rs) => rs.iter().map(|r| r.span()).fold(f64::MIN, f64::max),
        }
    }
}

/// Which codec to apply. Float32 fixes the train length to 32 steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderKind {
    LowerTriangular,
    Rate { seed: u64 },
    Float32,
}

impl EncoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            EncoderKind::LowerTriangular => "lower_triangular",
            EncoderKind::Rate { .. } => "rate",
            EncoderKind::Float32 => "float32",
        }
    }
}

/// Map values into [0,1] using per-channel ranges, clamping out-of-range
/// entries. Returns the normalized vector and the clamp count.
pub fn normalize(values: &[f64], ranges: &RangeSet) -> (Vec<f64>, usize) {
    let mut clamped = 0;
    let out = values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let r = ranges.get(j);
            let t = (v - r.lo) / r.span();
            if !(0.0..=1.0).contains(&t) {
                clamped += 1;
            }
            t.clamp(0.0, 1.0)
        })
        .collect();
    (out, clamped)
}

/// k leading ones per channel, k = round-half-up(steps * normalized value).
pub fn encode_lower_triangular(values: &[f64], ranges: &RangeSet, steps: usize) -> SpikeTrain {
    assert!(steps >= 1);
    let (norm, _) = normalize(values, ranges);
    let mut out = SpikeTrain::zeros(steps, values.len());
    for (j, &p) in norm.iter().enumerate() {
        let k = ((steps as f64 * p + 0.5).floor() as usize).min(steps);
        for row in 0..k {
            out.set(row, j, 1);
        }
    }
    out
}

/// Inverse of the lower-triangular map. Counts ones anywhere in the column
/// so that arbitrary network output bits decode without a prefix assumption.
pub fn decode_lower_triangular(train: &SpikeTrain, ranges: &RangeSet) -> Vec<f64> {
    (0..train.channels)
        .map(|j| {
            let r = ranges.get(j);
            let k = train.ones_in_channel(j) as f64;
            r.lo + (k / train.steps as f64) * r.span()
        })
        .collect()
}

/// Independent Bernoulli(p) draw per spike step, p the normalized value.
/// Deterministic for a fixed (values, ranges, steps, seed).
pub fn encode_rate(values: &[f64], ranges: &RangeSet, steps: usize, seed: u64) -> SpikeTrain {
    assert!(steps >= 1);
    let (norm, _) = normalize(values, ranges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpikeTrain::zeros(steps, values.len());
    // Fixed draw order: spike step outer, channel inner.
    for k in 0..steps {
        for (j, &p) in norm.iter().enumerate() {
            if rng.gen::<f64>() < p {
                out.set(k, j, 1);
            }
        }
    }
    out
}

/// Empirical firing rate per channel mapped back to physical units.
pub fn decode_rate(train: &SpikeTrain, ranges: &RangeSet) -> Vec<f64> {
    // Identical to the lower-triangular inverse: ones count over steps.
    decode_lower_triangular(train, ranges)
}

pub const FLOAT32_STEPS: usize = 32;

/// IEEE-754 single precision bits, sign in row 0 down to mantissa LSB in
/// row 31. Values are cast to f32 first.
pub fn encode_float32(values: &[f64]) -> SpikeTrain {
    let mut out = SpikeTrain::zeros(FLOAT32_STEPS, values.len());
    for (j, &v) in values.iter().enumerate() {
        let b = (v as f32).to_bits();
        for row in 0..32 {
            out.set(row, j, ((b >> (31 - row)) & 1) as u8);
        }
    }
    out
}

/// Exact inverse of `encode_float32` on the bit level.
pub fn decode_float32(train: &SpikeTrain) -> Vec<f64> {
    assert_eq!(train.steps, FLOAT32_STEPS);
    (0..train.channels)
        .map(|j| {
            let mut b: u32 = 0;
            for row in 0..32 {
                b |= (train.get(row, j) as u32) << (31 - row);
            }
            f32::from_bits(b) as f64
        })
        .collect()
}

/// Dispatch over the three codecs. Float32 ignores `ranges` and forces 32
/// steps.
pub fn encode(values: &[f64], kind: EncoderKind, ranges: &RangeSet, steps: usize) -> SpikeTrain {
    match kind {
        EncoderKind::LowerTriangular => encode_lower_triangular(values, ranges, steps),
        EncoderKind::Rate { seed } => encode_rate(values, ranges, steps, seed),
        EncoderKind::Float32 => encode_float32(values),
    }
}

pub fn decode(train: &SpikeTrain, kind: EncoderKind, ranges: &RangeSet) -> Vec<f64> {
    match kind {
        EncoderKind::LowerTriangular => decode_lower_triangular(train, ranges),
        EncoderKind::Rate { .. } => decode_rate(train, ranges),
        EncoderKind::Float32 => decode_float32(train),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EncodingError {
    pub l2: f64,
    pub rel_l2: f64,
}

/// Encode-decode round trip error of a signal: mean squared difference and
/// its ratio to the mean squared signal.
pub fn encoding_error(
    signal: &[f64],
    kind: EncoderKind,
    steps: usize,
    ranges: &RangeSet,
) -> EncodingError {
    assert!(!signal.is_empty());
    let train = encode(signal, kind, ranges, steps);
    let decoded = decode(&train, kind, ranges);
    let n = signal.len() as f64;
    let l2 = signal
        .iter()
        .zip(&decoded)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let ref_ms = signal.iter().map(|a| a * a).sum::<f64>() / n;
    EncodingError {
        l2,
        rel_l2: l2 / ref_ms,
    }
}
