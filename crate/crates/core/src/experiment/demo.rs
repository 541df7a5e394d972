use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{
    encode_wav, AudioClip, ClipMetadata, Emotion, Intensity, Modality, VocalChannel, WavEncoding,
    DEFAULT_SAMPLE_RATE,
};

/// Clips per (emotion, channel) cell of the demo corpus.
pub const DEMO_CLIPS_PER_CELL: usize = 10;
pub const DEMO_SECONDS: f64 = 1.0;

/// The six analysed emotions in code order.
pub const DEMO_EMOTIONS: [Emotion; 6] = [
    Emotion::Neutral,
    Emotion::Calm,
    Emotion::Happy,
    Emotion::Sad,
    Emotion::Angry,
    Emotion::Fearful,
];

/// Fundamental, amplitude-modulation rate and noise level of one class.
struct Profile {
    f0: f64,
    am_rate: f64,
    noise: f64,
}

fn profile(class: usize) -> Profile {
    const F0: [f64; 6] = [140.0, 190.0, 250.0, 320.0, 410.0, 520.0];
    const AM: [f64; 6] = [2.0, 3.5, 5.0, 6.5, 8.0, 9.5];
    const NOISE: [f64; 6] = [0.004, 0.008, 0.016, 0.03, 0.05, 0.08];
    Profile {
        f0: F0[class],
        am_rate: AM[class],
        noise: NOISE[class],
    }
}

fn metadata(class: usize, channel: VocalChannel, k: usize) -> ClipMetadata {
    let emotion = DEMO_EMOTIONS[class];
    let intensity = if emotion == Emotion::Neutral || k % 2 == 0 {
        Intensity::Normal
    } else {
        Intensity::Strong
    };
    let mut meta = ClipMetadata {
        modality: Modality::AudioOnly,
        vocal_channel: channel,
        emotion,
        intensity,
        statement: 1 + (k % 2) as u8,
        repetition: 1 + ((k / 2) % 2) as u8,
        actor: 1 + k as u8,
        source_path: String::new(),
    };
    meta.source_path = format!("Actor_{:02}/{}", meta.actor, meta.file_name());
    meta
}

/// Harmonic tone with class-specific pitch, tremolo and noise. Song clips
/// add vibrato and more harmonics. Per-clip pitch, level and phase jitter
/// come from `rng`.
fn synthesize(class: usize, channel: VocalChannel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let p = profile(class);
    let sr = DEFAULT_SAMPLE_RATE as f64;
    let n = (DEMO_SECONDS * sr) as usize;
    let f0 = p.f0 * (1.0 + rng.random_range(-0.03..0.03));
    let level = rng.random_range(0.3..0.6);
    let phase0 = rng.random_range(0.0..2.0 * PI);
    let (harmonics, vibrato) = match channel {
        VocalChannel::Speech => (5, 0.0),
        VocalChannel::Song => (8, 0.02),
    };
    let ramp = (0.05 * sr) as usize;
    let mut phase = phase0;
    (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let f = f0 * (1.0 + vibrato * (2.0 * PI * 5.0 * t).sin());
            phase += 2.0 * PI * f / sr;
            let tone: f64 = (1..=harmonics).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            let am = 1.0 - 0.4 * (0.5 + 0.5 * (2.0 * PI * p.am_rate * t).sin());
            let env = (i.min(n - 1 - i) as f64 / ramp as f64).min(1.0);
            let noise = p.noise * rng.random_range(-1.0..1.0);
            (level * 0.5 * tone * am * env + noise).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Write the synthetic corpus: 6 emotions × 2 channels × 10 clips as
/// 16-bit WAVs named like RAVDESS files under `Actor_NN/` directories.
/// Output bytes depend only on `seed`. Returns the written paths in
/// generation order.
pub fn demo_corpus(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let cells: Vec<(usize, VocalChannel, usize)> = (0..DEMO_EMOTIONS.len())
        .flat_map(|c| {
            [VocalChannel::Speech, VocalChannel::Song]
                .into_iter()
                .flat_map(move |ch| (0..DEMO_CLIPS_PER_CELL).map(move |k| (c, ch, k)))
        })
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(index, &(class, channel, k))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let meta = metadata(class, channel, k);
            let clip = AudioClip::new(synthesize(class, channel, &mut rng), DEFAULT_SAMPLE_RATE)?;
            let path = out_dir.join(&meta.source_path);
            let parent = path.parent().expect("actor directory");
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            std::fs::write(&path, encode_wav(&clip, WavEncoding::Pcm16)?).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
