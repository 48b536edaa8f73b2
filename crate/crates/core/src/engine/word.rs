use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::engine::MatrixSystem;
use crate::error::{Error, Result};
use crate::logmat::LogMatrix;
use crate::matrix::Matrix;

/// A finite word over the alphabet `{0, …, N−1}`.
///
/// Stored 0-based; serialises as a JSON array of 1-based letters so that the
/// output matches the usual `A₁, A₂` labelling.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    /// From 1-based letters.
    pub fn from_one_based(letters: &[usize]) -> Result<Word> {
        letters
            .iter()
            .map(|&l| l.checked_sub(1).ok_or_else(|| Error::InvalidParameter("letters start at 1".into())))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|l| l + 1).collect()
    }

    /// Occurrences of each letter `0..n_letters`.
    pub fn counts(&self, n_letters: usize) -> Vec<u64> {
        let mut c = vec![0u64; n_letters];
        for &l in &self.0 {
            c[l] += 1;
        }
        c
    }

    pub fn product(&self, system: &MatrixSystem) -> Result<Matrix> {
        system.product(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.one_based().iter().map(|l| l.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Word::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

/// A run-length encoded word `a₁^{k₁} a₂^{k₂} ⋯`, for words far too long to spell out.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunWord {
    runs: Vec<(usize, u64)>,
}

impl RunWord {
    pub fn new() -> Self {
        RunWord::default()
    }

    /// Appends `letter^count` (0-based letter), merging with a trailing run of the same letter.
    pub fn push(mut self, letter: usize, count: u64) -> Self {
        if count == 0 {
            return self;
        }
        match self.runs.last_mut() {
            Some((l, c)) if *l == letter => *c += count,
            _ => self.runs.push((letter, count)),
        }
        self
    }

    pub fn runs(&self) -> &[(usize, u64)] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn counts(&self, n_letters: usize) -> Vec<u64> {
        let mut c = vec![0u64; n_letters];
        for &(l, k) in &self.runs {
            c[l] += k;
        }
        c
    }

    /// Product in the log domain (2×2 systems only).
    pub fn evaluate(&self, system: &MatrixSystem) -> Result<LogMatrix> {
        system.require_planar()?;
        let mut acc = LogMatrix::identity();
        for &(letter, count) in &self.runs {
            if letter >= system.len() {
                return Err(Error::InvalidParameter(format!("letter {} out of range", letter + 1)));
            }
            acc = acc.mul(&LogMatrix::pow(system.map(letter), count)?);
        }
        Ok(acc)
    }

    pub fn to_word(&self) -> Word {
        let mut v = Vec::new();
        for &(l, k) in &self.runs {
            v.extend(std::iter::repeat_n(l, k as usize));
        }
        Word(v)
    }
}

impl From<&Word> for RunWord {
    fn from(w: &Word) -> Self {
        w.0.iter().fold(RunWord::new(), |acc, &l| acc.push(l, 1))
    }
}

impl fmt::Display for RunWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.runs.iter().map(|(l, k)| format!("{}^{}", l + 1, k)).collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for RunWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(usize, u64)> = self.runs.iter().map(|&(l, k)| (l + 1, k)).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RunWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<(usize, u64)>::deserialize(d)?;
        v.into_iter().try_fold(RunWord::new(), |acc, (l, k)| {
            let l = l.checked_sub(1).ok_or_else(|| serde::de::Error::custom("letters start at 1"))?;
            Ok(acc.push(l, k))
        })
    }
}
