use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator `a_j` or its inverse `A_j` (0-based `gen`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Self { gen, inverse }
    }

    /// Position in the alphabet `a1, A1, a2, A2, ...`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.gen + self.inverse as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        Self {
            gen: i / 2,
            inverse: i % 2 == 1,
        }
    }

    pub fn inverted(self) -> Self {
        Self {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

/// A word over `a1..ak, A1..Ak`, evaluated left to right as a product.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    /// Parses words such as `a1 a2 A1`, `a1a1A2` or `a1^6`.
    ///
    /// A trailing `^n` repeats the preceding letter; `^-n` repeats its inverse.
    pub fn parse(s: &str) -> Result<Word> {
        let bytes = s.as_bytes();
        let mut letters = Vec::new();
        let mut i = 0;
        let bad = |msg: String| Error::Invalid(format!("cannot parse word {s:?}: {msg}"));
        let read_int = |i: &mut usize| {
            let start = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            s[start..*i].parse::<usize>().ok()
        };
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                b' ' | b'\t' | b'*' | b'.' => i += 1,
                b'a' | b'A' => {
                    i += 1;
                    let j = read_int(&mut i).ok_or_else(|| bad("letter without index".into()))?;
                    if j == 0 {
                        return Err(bad("generator indices start at 1".into()));
                    }
                    letters.push(Letter::new(j - 1, c == b'A'));
                }
                b'^' => {
                    i += 1;
                    let neg = i < bytes.len() && bytes[i] == b'-';
                    if neg {
                        i += 1;
                    }
                    let n = read_int(&mut i).ok_or_else(|| bad("missing exponent".into()))?;
                    let last = letters.pop().ok_or_else(|| bad("exponent without letter".into()))?;
                    let l = if neg { last.inverted() } else { last };
                    letters.extend(std::iter::repeat(l).take(n));
                }
                _ => return Err(bad(format!("unexpected character {:?}", c as char))),
            }
        }
        Ok(Word(letters))
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse_lines(text: &str) -> Result<Vec<Word>> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(Word::parse)
            .collect()
    }

    /// All words of length exactly `len` over `k` generators, in lexicographic
    /// alphabet order.
    pub fn all_of_length(k: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::default()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..2 * k).map(move |l| {
                        let mut v = w.0.clone();
                        v.push(Letter::from_index(l));
                        Word(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            let c = if l.inverse { 'A' } else { 'a' };
            write!(f, "{c}{}", l.gen + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let w = Word::parse("a1 A2a1").unwrap();
        assert_eq!(
            w.letters(),
            &[Letter::new(0, false), Letter::new(1, true), Letter::new(0, false)]
        );
        assert_eq!(Word::parse("a1^3").unwrap().len(), 3);
        assert_eq!(Word::parse("a2^-2").unwrap(), Word::parse("A2A2").unwrap());
        assert!(Word::parse("b1").is_err());
        assert!(Word::parse("a0").is_err());
        assert_eq!(w.to_string(), "a1A2a1");
        assert_eq!(w.inverse().to_string(), "A1a2A1");
    }

    #[test]
    fn relator_file() {
        let ws = Word::parse_lines("# relators\na1^2\n\na2 a2\n").unwrap();
        assert_eq!(ws.len(), 2);
    }

    #[test]
    fn word_enumeration_counts() {
        assert_eq!(Word::all_of_length(2, 3).len(), 64);
        assert_eq!(Word::all_of_length(1, 0).len(), 1);
    }
}
