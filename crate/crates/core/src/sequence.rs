//! Binary observations with missing values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered series of binary letters where some positions may be missing.
///
/// Observed letters between gaps form segments; word transitions are only
/// ever read inside a segment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinarySequence {
    slots: Vec<Option<u8>>,
}

impl BinarySequence {
    /// Fully observed sequence.
    pub fn from_letters(letters: Vec<u8>) -> Result<Self> {
        check_letters(&letters)?;
        Ok(BinarySequence {
            slots: letters.into_iter().map(Some).collect(),
        })
    }

    /// Sequence with a single missing slot between consecutive segments.
    pub fn from_segments<S: AsRef<[u8]>>(segments: &[S]) -> Result<Self> {
        let mut slots = Vec::new();
        for (n, seg) in segments.iter().enumerate() {
            let seg = seg.as_ref();
            check_letters(seg)?;
            if n > 0 {
                slots.push(None);
            }
            slots.extend(seg.iter().copied().map(Some));
        }
        Ok(BinarySequence { slots })
    }

    pub fn from_slots(slots: Vec<Option<u8>>) -> Result<Self> {
        for (position, s) in slots.iter().enumerate() {
            if let Some(v) = *s {
                if v > 1 {
                    return Err(Error::InvalidLetter { position, value: v });
                }
            }
        }
        Ok(BinarySequence { slots })
    }

    /// Parses a string of `0`, `1` and `-`.
    pub fn from_str_letters(s: &str) -> Result<Self> {
        let slots = s
            .chars()
            .enumerate()
            .map(|(column, c)| match c {
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                '-' => Ok(None),
                other => Err(Error::Parse {
                    line: 1,
                    column: column + 1,
                    message: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinarySequence { slots })
    }

    pub fn slots(&self) -> &[Option<u8>] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn observed(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// Number of observed ones and zeros, `(zeros, ones)`.
    pub fn letter_totals(&self) -> (usize, usize) {
        self.slots.iter().fold((0, 0), |(z, o), s| match s {
            Some(0) => (z + 1, o),
            Some(_) => (z, o + 1),
            None => (z, o),
        })
    }

    /// Maximal runs of observed letters, in order.
    pub fn segments(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for s in &self.slots {
            match s {
                Some(v) => cur.push(*v),
                None => {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                }
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }

    /// Letters if the sequence has no gaps.
    pub fn as_contiguous(&self) -> Option<Vec<u8>> {
        self.slots.iter().copied().collect()
    }

    /// `0`/`1`/`-` rendering of all slots.
    pub fn to_letter_string(&self) -> String {
        self.slots
            .iter()
            .map(|s| match s {
                Some(0) => '0',
                Some(_) => '1',
                None => '-',
            })
            .collect()
    }
}

impl std::fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_letter_string())
    }
}

pub(crate) fn check_letters(letters: &[u8]) -> Result<()> {
    match letters.iter().position(|&b| b > 1) {
        Some(position) => Err(Error::InvalidLetter {
            position,
            value: letters[position],
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_split_on_gaps() {
        let s = BinarySequence::from_str_letters("0011--01-").unwrap();
        assert_eq!(s.segments(), vec![vec![0, 0, 1, 1], vec![0, 1]]);
        assert_eq!(s.observed(), 6);
        assert_eq!(s.letter_totals(), (3, 3));
        assert_eq!(s.as_contiguous(), None);
    }

    #[test]
    fn from_segments_inserts_one_gap() {
        let s = BinarySequence::from_segments(&[vec![0, 1], vec![1]]).unwrap();
        assert_eq!(s.to_letter_string(), "01-1");
        assert!(BinarySequence::from_segments(&[vec![0, 3]]).is_err());
    }
}
