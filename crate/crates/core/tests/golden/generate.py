"""Regenerate the DSP golden files with librosa.

Writes five float32 WAV clips and golden.json holding librosa's mel power
spectrogram and MFCC matrices for each. librosa runs in float64 with
reflect padding so it sees exactly the samples and framing the Rust
extractor uses.

    python3 generate.py   # from this directory
"""

import json
from pathlib import Path

import librosa
import numpy as np
import soundfile as sf

SR = 22050
N = SR // 2
N_FFT = 2048
HOP = 512
N_MELS = 128
N_MFCC = 40


def clips():
    rng = np.random.default_rng(20240611)
    t = np.arange(N) / SR
    yield "sine_440", 0.5 * np.sin(2 * np.pi * 440 * t)
    yield "chirp", 0.4 * np.sin(2 * np.pi * (100 * t + 4000 * t**2))
    yield "noise", 0.2 * rng.uniform(-1, 1, N)
    harmonics = sum(np.sin(2 * np.pi * 180 * k * t) / k for k in range(1, 9))
    tremolo = 0.6 + 0.4 * np.sin(2 * np.pi * 5 * t)
    yield "harmonic_tremolo", 0.2 * harmonics * tremolo
    burst = np.zeros(N)
    burst[N // 4 : N // 2] = 0.5 * np.sin(2 * np.pi * 900 * t[: N // 2 - N // 4])
    yield "silence_burst", burst + 1e-4 * rng.standard_normal(N)


def main():
    here = Path(__file__).resolve().parent
    golden = {"sample_rate": SR, "n_fft": N_FFT, "hop": HOP, "n_mels": N_MELS, "n_mfcc": N_MFCC, "clips": []}
    for name, y in clips():
        y32 = np.clip(y, -1, 1).astype(np.float32)
        sf.write(here / f"{name}.wav", y32, SR, subtype="FLOAT")
        y64 = y32.astype(np.float64)
        mel = librosa.feature.melspectrogram(
            y=y64, sr=SR, n_fft=N_FFT, hop_length=HOP, n_mels=N_MELS, pad_mode="reflect", power=2.0
        )
        mfcc = librosa.feature.mfcc(S=librosa.power_to_db(mel), n_mfcc=N_MFCC)
        golden["clips"].append({"file": f"{name}.wav", "mel": mel.tolist(), "mfcc": mfcc.tolist()})
    (here / "golden.json").write_text(json.dumps(golden) + "\n")


if __name__ == "__main__":
    main()
