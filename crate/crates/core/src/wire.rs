//! Packed file format for framed transmissions.
//!
//! An encoded file is the concatenated transmitted bits of every frame,
//! packed MSB-first and zero-padded to a byte boundary, followed by a 16-byte
//! trailer:
//!
//! | bytes  | content                                        |
//! |--------|------------------------------------------------|
//! | 0..4   | magic `GSCF`                                   |
//! | 4..12  | frame count, u64 little-endian                 |
//! | 12..16 | zero info bits appended to fill the last frame |

use crate::decoder::{decode_frame, DecodeStats};
use crate::encoder::{encode_frame, FrameLayout};
use crate::geometry::Code;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"GSCF";
pub const TRAILER_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trailer {
    pub frames: u64,
    pub pad_bits: u32,
}

impl Trailer {
    pub fn to_bytes(self) -> [u8; TRAILER_LEN] {
        let mut out = [0u8; TRAILER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4..12].copy_from_slice(&self.frames.to_le_bytes());
        out[12..].copy_from_slice(&self.pad_bits.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != TRAILER_LEN || bytes[..4] != MAGIC {
            return Err(Error::Format("missing or corrupt trailer".into()));
        }
        Ok(Self {
            frames: u64::from_le_bytes(bytes[4..12].try_into().unwrap()),
            pad_bits: u32::from_le_bytes(bytes[12..].try_into().unwrap()),
        })
    }
}

fn get_bit(bytes: &[u8], i: usize) -> u8 {
    (bytes[i / 8] >> (7 - i % 8)) & 1
}

struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    fn push(&mut self, bit: u8) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit & 1 == 1 {
            *self.bytes.last_mut().unwrap() |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }
}

/// Encodes arbitrary bytes into the framed wire format.
pub fn encode_bytes(code: &Code, data: &[u8]) -> Result<Vec<u8>> {
    let layout = FrameLayout::new(code.params());
    let k = layout.info_bits_per_frame();
    let total = data.len() * 8;
    let frames = total.div_ceil(k);
    let pad = frames * k - total;
    if pad > u32::MAX as usize {
        return Err(Error::Format("padding does not fit the trailer".into()));
    }
    let mut w = BitWriter {
        bytes: Vec::with_capacity((frames * layout.transmitted_bits_per_frame()).div_ceil(8) + TRAILER_LEN),
        len: 0,
    };
    let mut info = vec![0u8; k];
    for f in 0..frames {
        for (i, b) in info.iter_mut().enumerate() {
            let bit = f * k + i;
            *b = if bit < total { get_bit(data, bit) } else { 0 };
        }
        for bit in encode_frame(code, &info)? {
            w.push(bit);
        }
    }
    let mut out = w.bytes;
    out.extend_from_slice(
        &Trailer {
            frames: frames as u64,
            pad_bits: pad as u32,
        }
        .to_bytes(),
    );
    Ok(out)
}

/// Decodes a file produced by [`encode_bytes`], possibly corrupted. Returns
/// the recovered bytes and the summed decoder statistics.
pub fn decode_bytes(code: &Code, file: &[u8]) -> Result<(Vec<u8>, DecodeStats)> {
    if file.len() < TRAILER_LEN {
        return Err(Error::Format(format!(
            "file of {} bytes is shorter than the trailer",
            file.len()
        )));
    }
    let (payload, trailer) = file.split_at(file.len() - TRAILER_LEN);
    let trailer = Trailer::parse(trailer)?;
    let layout = FrameLayout::new(code.params());
    let t = layout.transmitted_bits_per_frame();
    let k = layout.info_bits_per_frame();
    let frames = usize::try_from(trailer.frames).map_err(|_| Error::Format("frame count too large".into()))?;
    let expected = frames
        .checked_mul(t)
        .map(|b| b.div_ceil(8))
        .ok_or_else(|| Error::Format("frame count too large".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, {} frames need {expected}",
            payload.len(),
            frames
        )));
    }
    let pad = trailer.pad_bits as usize;
    if pad > frames * k || (frames * k - pad) % 8 != 0 || (frames > 0 && pad >= k) {
        return Err(Error::Format(format!("inconsistent padding of {pad} bits")));
    }

    let mut stats = DecodeStats::default();
    let mut bits = Vec::with_capacity(frames * k);
    let mut received = vec![0u8; t];
    for f in 0..frames {
        for (i, b) in received.iter_mut().enumerate() {
            *b = get_bit(payload, f * t + i);
        }
        let (info, s) = decode_frame(code, &received)?;
        stats.merge(&s);
        bits.extend_from_slice(&info);
    }
    bits.truncate(frames * k - pad);
    Ok((crate::bits::pack_msb(&bits), stats))
}
