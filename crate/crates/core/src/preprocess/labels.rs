use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps class names to dense integer codes in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCodec {
    classes: Vec<String>,
}

impl LabelCodec {
    /// Build from class names that must already be strictly increasing.
    pub fn from_classes(classes: Vec<String>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::invalid("label codec needs at least one class"));
        }
        if !classes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("codec classes must be sorted and unique"));
        }
        Ok(LabelCodec { classes })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn encode(&self, label: &str) -> Result<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(label))
            .map_err(|_| Error::invalid(format!("label {label:?} not in codec")))
    }

    pub fn decode(&self, code: usize) -> Result<&str> {
        self.classes
            .get(code)
            .map(String::as_str)
            .ok_or(Error::LabelOutOfRange {
                label: code,
                n_classes: self.classes.len(),
            })
    }
}

/// Sorted unique classes plus each label's code.
pub fn encode_labels<S: AsRef<str>>(labels: &[S]) -> Result<(LabelCodec, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot encode an empty label list"));
    }
    let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    classes.sort();
    classes.dedup();
    let codec = LabelCodec { classes };
    let codes = labels
        .iter()
        .map(|l| codec.encode(l.as_ref()))
        .collect::<Result<_>>()?;
    Ok((codec, codes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emotions_sort_lexicographically() {
        let labels = ["neutral", "calm", "happy", "sad", "angry", "fearful"];
        let (codec, codes) = encode_labels(&labels).unwrap();
        assert_eq!(
            codec.classes(),
            &["angry", "calm", "fearful", "happy", "neutral", "sad"]
        );
        assert_eq!(codes, vec![4, 1, 3, 5, 0, 2]);
    }

    #[test]
    fn small_cases() {
        let (codec, codes) = encode_labels(&["b", "a", "b"]).unwrap();
        assert_eq!(codec.classes(), &["a", "b"]);
        assert_eq!(codes, vec![1, 0, 1]);
        let (_, codes) = encode_labels(&["x", "x", "x"]).unwrap();
        assert_eq!(codes, vec![0, 0, 0]);
        assert!(encode_labels::<&str>(&[]).is_err());
    }

    #[test]
    fn decode_inverts_encode() {
        let (codec, _) = encode_labels(&["sad", "angry", "calm"]).unwrap();
        for i in 0..codec.len() {
            assert_eq!(codec.encode(codec.decode(i).unwrap()).unwrap(), i);
        }
        assert!(codec.decode(3).is_err());
        assert!(LabelCodec::from_classes(vec!["b".into(), "a".into()]).is_err());
    }
}
