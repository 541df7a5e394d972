use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioClip;
use crate::error::{Error, Result};

/// On-disk sample encoding used when writing clips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Decode a RIFF/WAVE byte buffer into a mono clip.
///
/// Integer PCM is scaled by `2^(bits-1)` so that full-scale negative maps to
/// exactly -1. Stereo frames are averaged.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Decode("missing RIFF/WAVE magic".into()));
    }
    let reader = WavReader::new(Cursor::new(bytes)).map_err(|e| Error::Decode(e.to_string()))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels != 1 && channels != 2 {
        return Err(Error::Decode(format!("{channels} channels not supported")));
    }
    if spec.sample_rate == 0 {
        return Err(Error::Decode("sample rate is zero".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Decode(format!("data chunk: {e}")))?
        }
        (SampleFormat::Float, 32) => {
            let raw: Vec<f32> = reader
                .into_samples::<f32>()
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Decode(format!("data chunk: {e}")))?;
            let mut out = Vec::with_capacity(raw.len());
            for v in raw {
                if !v.is_finite() {
                    return Err(Error::Decode("non-finite float sample".into()));
                }
                out.push((v as f64).clamp(-1.0, 1.0));
            }
            out
        }
        (format, bits) => {
            return Err(Error::Decode(format!(
                "unsupported codec: {format:?} at {bits} bits"
            )))
        }
    };

    let samples: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        if interleaved.len() % 2 != 0 {
            return Err(Error::Decode("truncated stereo frame".into()));
        }
        interleaved
            .chunks_exact(2)
            .map(|f| 0.5 * (f[0] + f[1]))
            .collect()
    };
    AudioClip::new(samples, spec.sample_rate).map_err(|e| Error::Decode(e.to_string()))
}

pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

/// Encode a clip as a mono WAV byte buffer.
pub fn encode_wav(clip: &AudioClip, encoding: WavEncoding) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut cursor = Cursor::new(Vec::new());
    let to_err = |e: hound::Error| Error::Decode(format!("encode: {e}"));
    {
        let mut writer = WavWriter::new(&mut cursor, spec).map_err(to_err)?;
        for &s in clip.samples() {
            match encoding {
                WavEncoding::Pcm16 => {
                    let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(v).map_err(to_err)?;
                }
                WavEncoding::Float32 => writer.write_sample(s as f32).map_err(to_err)?,
            }
        }
        writer.finalize().map_err(to_err)?;
    }
    Ok(cursor.into_inner())
}

pub fn write_wav(path: &Path, clip: &AudioClip, encoding: WavEncoding) -> Result<()> {
    let bytes = encode_wav(clip, encoding)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
