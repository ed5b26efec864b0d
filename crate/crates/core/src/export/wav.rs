//! 16-bit PCM mono RIFF/WAVE.

use crate::error::{Error, Result};
use crate::synthesis::AudioBuffer;

pub const HEADER_LEN: usize = 44;
const BITS_PER_SAMPLE: u16 = 16;
const PCM: u16 = 1;

/// Quantizes `x * 32767`, rounding halves away from zero.
pub fn quantize(x: f64) -> i16 {
    (x * 32767.0).round().clamp(-32768.0, 32767.0) as i16
}

pub fn write_wav(buffer: &AudioBuffer) -> Vec<u8> {
    let data_len = (buffer.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");

    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // channels
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buffer.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&BITS_PER_SAMPLE.to_le_bytes());

    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buffer.samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Reads a 16-bit PCM mono file. Samples are scaled by `1 / 32767` and
/// clamped to `[-1, 1]`. Chunks other than `fmt ` and `data` are skipped.
pub fn read_wav(raw: &[u8]) -> Result<AudioBuffer> {
    let bad = |msg: &str| Error::Format(format!("WAV: {msg}"));
    if raw.len() < 12 || &raw[..4] != b"RIFF" || &raw[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }
    let mut pos = 12;
    let mut sample_rate = None;
    while pos + 8 <= raw.len() {
        let id = &raw[pos..pos + 4];
        let len = u32_at(raw, pos + 4) as usize;
        let body = pos + 8;
        let end = body.checked_add(len).filter(|e| *e <= raw.len());
        match id {
            b"fmt " => {
                let end = end.ok_or_else(|| bad("truncated fmt chunk"))?;
                if len < 16 {
                    return Err(bad("fmt chunk too short"));
                }
                let chunk = &raw[body..end];
                if u16_at(chunk, 0) != PCM {
                    return Err(bad("only PCM is supported"));
                }
                if u16_at(chunk, 2) != 1 {
                    return Err(bad("only mono is supported"));
                }
                if u16_at(chunk, 14) != BITS_PER_SAMPLE {
                    return Err(bad("only 16-bit samples are supported"));
                }
                sample_rate = Some(u32_at(chunk, 4));
            }
            b"data" => {
                let sample_rate = sample_rate.ok_or_else(|| bad("data chunk before fmt chunk"))?;
                // Tolerate a data length that overruns the file (streamed writers).
                let end = end.unwrap_or(raw.len());
                let samples = raw[body..end]
                    .chunks_exact(2)
                    .map(|c| (i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0).max(-1.0))
                    .collect();
                return Ok(AudioBuffer {
                    sample_rate,
                    samples,
                });
            }
            _ => {}
        }
        pos = body + len + (len & 1);
    }
    Err(bad("no data chunk"))
}
