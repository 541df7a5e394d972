use ndarray::Array2;

use super::stft::Spectrogram;

/// Pitch class of a frequency, 0 = C, using A4 = 440 Hz = MIDI 69.
pub fn pitch_class(freq_hz: f64) -> usize {
    let midi = 12.0 * (freq_hz / 440.0).log2() + 69.0;
    (midi.round() as i64).rem_euclid(12) as usize
}

/// Octave-folded power per pitch class, each frame scaled so its maximum is
/// 1 (silent frames stay zero).
pub fn chromagram(spec: &Spectrogram) -> Array2<f64> {
    let freqs = spec.bin_frequencies();
    let classes: Vec<Option<usize>> = freqs
        .iter()
        .map(|&f| (f > 0.0).then(|| pitch_class(f)))
        .collect();
    let mut chroma = Array2::zeros((12, spec.n_frames()));
    for (frame, col) in spec.magnitudes.columns().into_iter().enumerate() {
        for (bin, &mag) in col.iter().enumerate() {
            if let Some(pc) = classes[bin] {
                chroma[[pc, frame]] += mag * mag;
            }
        }
        let peak = chroma.column(frame).iter().copied().fold(0.0, f64::max);
        if peak > 0.0 {
            chroma.column_mut(frame).mapv_inplace(|v| v / peak);
        }
    }
    chroma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::stft::stft;
    use crate::ingest::AudioClip;
    use crate::test_util::sine;

    #[test]
    fn pitch_classes_of_reference_tones() {
        assert_eq!(pitch_class(440.0), 9);
        assert_eq!(pitch_class(261.63), 0);
        assert_eq!(pitch_class(880.0), 9);
        assert_eq!(pitch_class(466.16), 10);
    }

    #[test]
    fn a440_peaks_at_class_a() {
        let clip = AudioClip::new(sine(440.0, 22050, 22050, 0.5), 22050).unwrap();
        let chroma = chromagram(&stft(&clip, 2048, 512).unwrap());
        for col in chroma.columns() {
            let argmax = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(argmax, 9);
        }
    }

    #[test]
    fn frames_are_max_normalized_or_zero() {
        let mut samples = vec![0.0; 4096];
        samples.extend(sine(300.0, 22050, 4096, 0.3));
        let clip = AudioClip::new(samples, 22050).unwrap();
        let chroma = chromagram(&stft(&clip, 1024, 512).unwrap());
        let mut saw_zero = false;
        for col in chroma.columns() {
            let max = col.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                saw_zero = true;
            } else {
                assert!((max - 1.0).abs() < 1e-12);
            }
        }
        assert!(saw_zero);
    }

    #[test]
    fn silence_gives_zero_chroma() {
        let clip = AudioClip::new(vec![0.0; 3000], 22050).unwrap();
        let chroma = chromagram(&stft(&clip, 512, 128).unwrap());
        assert!(chroma.iter().all(|&v| v == 0.0));
    }
}
