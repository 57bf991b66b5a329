use std::fmt;
use std::str::FromStr;

use crate::error::{GasketError, Result};

/// A finite word over the alphabet `{1, ..., N}`.
///
/// Words address cells: `F_w = F_{w_1} o ... o F_{w_m}`, and likewise for
/// `S_w`, while `T_w = T_{w_1} ... T_{w_m}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    n: usize,
    letters: Vec<u8>,
}

impl Word {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            letters: Vec::new(),
        }
    }

    pub fn new(n: usize, letters: Vec<u8>) -> Result<Self> {
        super::validate_n(n)?;
        for &l in &letters {
            check_letter(n, l as usize)?;
        }
        Ok(Self { n, letters })
    }

    pub fn repeated(n: usize, letter: u8, len: usize) -> Result<Self> {
        Self::new(n, vec![letter; len])
    }

    /// Parses `"123"` (digits, for `N <= 9`) or `"1.10.3"` (dot-separated).
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let letters: Vec<u8> = if s.contains('.') {
            s.split('.')
                .map(|t| t.parse::<u8>().map_err(|_| bad_letter(n)))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| bad_letter(n)))
                .collect::<Result<_>>()?
        };
        Self::new(n, letters)
    }

    /// The word of length `len` with lexicographic rank `index` (0-based).
    pub fn from_index(n: usize, len: usize, mut index: usize) -> Self {
        let mut letters = vec![0u8; len];
        for slot in letters.iter_mut().rev() {
            *slot = (index % n) as u8 + 1;
            index /= n;
        }
        Self { n, letters }
    }

    /// Lexicographic rank among words of the same length.
    pub fn index(&self) -> usize {
        self.letters
            .iter()
            .fold(0usize, |acc, &l| acc * self.n + (l as usize - 1))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn push(&mut self, letter: u8) -> Result<()> {
        check_letter(self.n, letter as usize)?;
        self.letters.push(letter);
        Ok(())
    }

    pub fn extended(&self, letter: u8) -> Result<Self> {
        let mut w = self.clone();
        w.push(letter)?;
        Ok(w)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { n: self.n, letters }
    }

    /// The truncation `[w]_m`.
    pub fn truncated(&self, m: usize) -> Self {
        Self {
            n: self.n,
            letters: self.letters[..m.min(self.len())].to_vec(),
        }
    }

    /// Applies a letter relabelling `l -> perm[l - 1]`.
    pub fn relabelled(&self, perm: &[usize]) -> Self {
        Self {
            n: self.n,
            letters: self.letters.iter().map(|&l| perm[l as usize - 1] as u8).collect(),
        }
    }

    /// All words of length `m`, in lexicographic order.
    pub fn all(n: usize, m: usize) -> impl Iterator<Item = Word> {
        let count = n.pow(m as u32);
        (0..count).map(move |i| Word::from_index(n, m, i))
    }
}

pub(crate) fn check_letter(n: usize, letter: usize) -> Result<()> {
    if letter == 0 || letter > n {
        Err(GasketError::InvalidLetter { letter, n })
    } else {
        Ok(())
    }
}

fn bad_letter(n: usize) -> GasketError {
    GasketError::InvalidLetter { letter: 0, n }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 9 {
            for l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({}; \"{}\")", self.n, self)
    }
}

/// Parses `N:word`, e.g. `3:121`.
impl FromStr for Word {
    type Err = GasketError;
    fn from_str(s: &str) -> Result<Self> {
        let (n, w) = s.split_once(':').ok_or(GasketError::AmbiguousAddress)?;
        let n: usize = n.parse().map_err(|_| GasketError::InvalidDimension(0))?;
        Word::parse(n, w)
    }
}
