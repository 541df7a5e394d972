//! RAVDESS file naming.
//!
//! Every file is named `MM-VV-EE-II-SS-RR-AA.wav`, seven two-digit fields:
//! modality, vocal channel, emotion, intensity, statement, repetition, actor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    AudioVideo,
    VideoOnly,
    AudioOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocalChannel {
    Speech,
    Song,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Neutral,
    Calm,
    Happy,
    Sad,
    Angry,
    Fearful,
    Disgust,
    Surprised,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Normal,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Neutral,
        Emotion::Calm,
        Emotion::Happy,
        Emotion::Sad,
        Emotion::Angry,
        Emotion::Fearful,
        Emotion::Disgust,
        Emotion::Surprised,
    ];

    /// Emotions excluded from analysis because the song channel lacks them.
    pub fn is_dropped(self) -> bool {
        matches!(self, Emotion::Disgust | Emotion::Surprised)
    }

    pub fn code(self) -> u8 {
        self as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Neutral => "neutral",
            Emotion::Calm => "calm",
            Emotion::Happy => "happy",
            Emotion::Sad => "sad",
            Emotion::Angry => "angry",
            Emotion::Fearful => "fearful",
            Emotion::Disgust => "disgust",
            Emotion::Surprised => "surprised",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown emotion {s:?}")))
    }
}

impl VocalChannel {
    pub fn name(self) -> &'static str {
        match self {
            VocalChannel::Speech => "speech",
            VocalChannel::Song => "song",
        }
    }
}

impl fmt::Display for VocalChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VocalChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "speech" => Ok(VocalChannel::Speech),
            "song" => Ok(VocalChannel::Song),
            _ => Err(Error::invalid(format!("unknown vocal channel {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipMetadata {
    pub modality: Modality,
    pub vocal_channel: VocalChannel,
    pub emotion: Emotion,
    pub intensity: Intensity,
    pub statement: u8,
    pub repetition: u8,
    pub actor: u8,
    pub source_path: String,
}

impl ClipMetadata {
    /// Odd actor ids are male, even are female.
    pub fn gender(&self) -> Gender {
        if self.actor % 2 == 1 {
            Gender::Male
        } else {
            Gender::Female
        }
    }

    /// Canonical RAVDESS file name for this metadata (without directory).
    pub fn file_name(&self) -> String {
        let modality = match self.modality {
            Modality::AudioVideo => 1,
            Modality::VideoOnly => 2,
            Modality::AudioOnly => 3,
        };
        let channel = match self.vocal_channel {
            VocalChannel::Speech => 1,
            VocalChannel::Song => 2,
        };
        let intensity = match self.intensity {
            Intensity::Normal => 1,
            Intensity::Strong => 2,
        };
        format!(
            "{modality:02}-{channel:02}-{:02}-{intensity:02}-{:02}-{:02}-{:02}.wav",
            self.emotion.code(),
            self.statement,
            self.repetition,
            self.actor
        )
    }
}

const FIELD_NAMES: [&str; 7] = [
    "modality",
    "vocal_channel",
    "emotion",
    "intensity",
    "statement",
    "repetition",
    "actor",
];

/// Parse a RAVDESS file name such as `03-01-06-01-02-01-12.wav`.
///
/// Only the final path component is inspected; `source_path` keeps the
/// string as given.
pub fn parse_ravdess_filename(name: &str) -> Result<ClipMetadata> {
    let err = |field: &'static str, reason: String| Error::FilenameParse {
        name: name.to_string(),
        field,
        reason,
    };
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    let stem = match base.len().checked_sub(4) {
        Some(cut) if base.is_char_boundary(cut) && base[cut..].eq_ignore_ascii_case(".wav") => {
            &base[..cut]
        }
        _ => return Err(err("extension", "expected a .wav suffix".into())),
    };

    let parts: Vec<&str> = stem.split('-').collect();
    if parts.len() != 7 {
        return Err(err(
            "field count",
            format!("expected 7 hyphen-separated fields, found {}", parts.len()),
        ));
    }
    let mut codes = [0u8; 7];
    for (i, part) in parts.iter().enumerate() {
        if part.len() != 2 || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(FIELD_NAMES[i], format!("{part:?} is not a two-digit code")));
        }
        codes[i] = part.parse().expect("two ascii digits");
    }
    let out_of_range = |i: usize| err(FIELD_NAMES[i], format!("code {:02} out of range", codes[i]));

    let modality = match codes[0] {
        1 => Modality::AudioVideo,
        2 => Modality::VideoOnly,
        3 => Modality::AudioOnly,
        _ => return Err(out_of_range(0)),
    };
    let vocal_channel = match codes[1] {
        1 => VocalChannel::Speech,
        2 => VocalChannel::Song,
        _ => return Err(out_of_range(1)),
    };
    let emotion = match codes[2] {
        c @ 1..=8 => Emotion::ALL[c as usize - 1],
        _ => return Err(out_of_range(2)),
    };
    let intensity = match codes[3] {
        1 => Intensity::Normal,
        2 => Intensity::Strong,
        _ => return Err(out_of_range(3)),
    };
    if emotion == Emotion::Neutral && intensity == Intensity::Strong {
        return Err(err(
            "intensity",
            "neutral clips are always recorded at normal intensity".into(),
        ));
    }
    let statement = match codes[4] {
        c @ 1..=2 => c,
        _ => return Err(out_of_range(4)),
    };
    let repetition = match codes[5] {
        c @ 1..=2 => c,
        _ => return Err(out_of_range(5)),
    };
    let actor = match codes[6] {
        c @ 1..=24 => c,
        _ => return Err(out_of_range(6)),
    };

    Ok(ClipMetadata {
        modality,
        vocal_channel,
        emotion,
        intensity,
        statement,
        repetition,
        actor,
        source_path: name.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_speech_example() {
        let m = parse_ravdess_filename("03-01-06-01-02-01-12.wav").unwrap();
        assert_eq!(m.modality, Modality::AudioOnly);
        assert_eq!(m.vocal_channel, VocalChannel::Speech);
        assert_eq!(m.emotion, Emotion::Fearful);
        assert_eq!(m.intensity, Intensity::Normal);
        assert_eq!((m.statement, m.repetition, m.actor), (2, 1, 12));
        assert_eq!(m.gender(), Gender::Female);
    }

    #[test]
    fn parses_song_example() {
        let m = parse_ravdess_filename("03-02-02-01-01-01-01.wav").unwrap();
        assert_eq!(m.vocal_channel, VocalChannel::Song);
        assert_eq!(m.emotion, Emotion::Calm);
        assert_eq!((m.statement, m.repetition, m.actor), (1, 1, 1));
        assert_eq!(m.gender(), Gender::Male);
    }

    #[test]
    fn accepts_directory_prefix() {
        let m = parse_ravdess_filename("Actor_05/03-01-05-02-01-02-05.wav").unwrap();
        assert_eq!(m.emotion, Emotion::Angry);
        assert_eq!(m.intensity, Intensity::Strong);
        assert_eq!(m.source_path, "Actor_05/03-01-05-02-01-02-05.wav");
    }

    #[test]
    fn rejects_malformed_names() {
        let cases = [
            ("hello.wav", "field count"),
            ("03-01-06-01-02-01-12.mp3", "extension"),
            ("03-01-x6-01-02-01-12.wav", "emotion"),
            ("03-01-09-01-02-01-12.wav", "emotion"),
            ("03-03-01-01-02-01-12.wav", "vocal_channel"),
            ("03-01-01-01-02-01-25.wav", "actor"),
            ("03-01-01-01-02-01-00.wav", "actor"),
            ("03-01-01-02-02-01-10.wav", "intensity"),
        ];
        for (name, field) in cases {
            match parse_ravdess_filename(name) {
                Err(Error::FilenameParse { field: f, .. }) => assert_eq!(f, field, "{name}"),
                other => panic!("{name}: expected parse error, got {other:?}"),
            }
        }
    }

    fn arb_metadata() -> impl Strategy<Value = ClipMetadata> {
        (
            0usize..3,
            any::<bool>(),
            0usize..8,
            any::<bool>(),
            1u8..=2,
            1u8..=2,
            1u8..=24,
        )
            .prop_map(|(m, song, e, strong, statement, repetition, actor)| {
                let emotion = Emotion::ALL[e];
                let mut meta = ClipMetadata {
                    modality: [Modality::AudioVideo, Modality::VideoOnly, Modality::AudioOnly][m],
                    vocal_channel: if song { VocalChannel::Song } else { VocalChannel::Speech },
                    emotion,
                    intensity: if strong && emotion != Emotion::Neutral {
                        Intensity::Strong
                    } else {
                        Intensity::Normal
                    },
                    statement,
                    repetition,
                    actor,
                    source_path: String::new(),
                };
                meta.source_path = meta.file_name();
                meta
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_format(meta in arb_metadata()) {
            let parsed = parse_ravdess_filename(&meta.file_name()).unwrap();
            prop_assert_eq!(parsed, meta);
        }
    }
}
