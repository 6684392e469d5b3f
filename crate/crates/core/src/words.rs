//! Free-group word calculus over a ranked alphabet.
//!
//! Elements of the free group `F_n` are represented by [`Word`]s, which are
//! kept reduced at all times: no adjacent pair of mutually inverse letters
//! ever survives a constructor. Unreduced letter sequences exist only
//! transiently, as input to [`Word::reduce`] or the parser.
//!
//! The text syntax is shared across the whole crate: lowercase `a..z` denote
//! generators 1 to 26, uppercase letters their inverses, and `1` (or the
//! empty string) denotes the identity. Generators beyond 26 are written
//! `x3`, `X3`, etc.

use std::fmt;

use crate::error::{Error, Result};

/// A ranked alphabet; rank 0 denotes the trivial group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub fn new(rank: usize) -> Self {
        Alphabet { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// All signed letters in canonical order: `a < a⁻¹ < b < b⁻¹ < …`.
    pub fn signed_letters(&self) -> impl Iterator<Item = Letter> {
        (1..=self.rank).flat_map(|i| [Letter::gen(i), Letter::inv(i)])
    }

    pub fn contains(&self, letter: Letter) -> bool {
        letter.index >= 1 && letter.index <= self.rank
    }

    fn check(&self, letter: Letter) -> Result<()> {
        if self.contains(letter) {
            Ok(())
        } else {
            Err(Error::GeneratorOutOfRange {
                index: letter.index,
                rank: self.rank,
            })
        }
    }

    pub fn check_generator(&self, index: usize) -> Result<()> {
        self.check(Letter::gen(index))
    }
}

/// A signed generator letter: generator `index` (1-based) or its inverse.
///
/// The derived order is `a < a⁻¹ < b < b⁻¹ < …`, the exploration order used
/// by every breadth-first traversal in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    index: usize,
    inverse: bool,
}

impl Letter {
    /// The positive letter for generator `index` (1-based).
    pub fn gen(index: usize) -> Self {
        Letter {
            index,
            inverse: false,
        }
    }

    /// The formal inverse of generator `index`.
    pub fn inv(index: usize) -> Self {
        Letter {
            index,
            inverse: true,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn inverted(&self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    /// Sign as `+1` or `-1`.
    pub fn sign(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index <= 26 {
            let base = if self.inverse { b'A' } else { b'a' };
            write!(f, "{}", (base + (self.index as u8 - 1)) as char)
        } else if self.inverse {
            write!(f, "X{}", self.index)
        } else {
            write!(f, "x{}", self.index)
        }
    }
}

/// A reduced word over an [`Alphabet`]: an element of the free group.
///
/// The empty word is the identity. Equality is literal equality of letter
/// sequences, which by the uniqueness of reduced forms coincides with
/// equality in the group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

impl Word {
    /// The identity element.
    pub fn identity(alphabet: Alphabet) -> Self {
        Word {
            alphabet,
            letters: Vec::new(),
        }
    }

    /// Reduces an arbitrary letter sequence to its unique reduced
    /// representative, in a single left-to-right pass.
    pub fn reduce(alphabet: Alphabet, raw: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let mut stack: Vec<Letter> = Vec::new();
        for letter in raw {
            alphabet.check(letter)?;
            if stack.last().is_some_and(|top| top.cancels(&letter)) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Ok(Word {
            alphabet,
            letters: stack,
        })
    }

    /// Parses the shared text syntax; `1` and the empty string are the
    /// identity, digits are only allowed in the `x<k>` form.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let text = text.trim();
        let fail = |reason: &str| Error::InvalidWord {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        if text.is_empty() || text == "1" {
            return Ok(Word::identity(alphabet));
        }
        let mut raw = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let letter = match c {
                'x' | 'X' if chars.peek().is_some_and(|d| d.is_ascii_digit()) => {
                    let mut digits = String::new();
                    while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                        digits.push(*d);
                        chars.next();
                    }
                    let index: usize = digits
                        .parse()
                        .map_err(|_| fail(&format!("generator number {digits:?} too large")))?;
                    if index == 0 {
                        return Err(fail("generator number must be at least 1"));
                    }
                    if c == 'x' {
                        Letter::gen(index)
                    } else {
                        Letter::inv(index)
                    }
                }
                'a'..='z' => Letter::gen((c as u8 - b'a') as usize + 1),
                'A'..='Z' => Letter::inv((c as u8 - b'A') as usize + 1),
                _ => return Err(fail(&format!("unexpected character {c:?}"))),
            };
            raw.push(letter);
        }
        Word::reduce(alphabet, raw).map_err(|e| fail(&e.to_string()))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_alphabet(&self, other: &Word) -> Result<()> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: self.alphabet.rank,
                found: other.alphabet.rank,
            })
        }
    }

    /// Group multiplication: concatenate and cancel at the seam.
    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.check_alphabet(other)?;
        let mut letters = self.letters.clone();
        for &letter in &other.letters {
            if letters.last().is_some_and(|top| top.cancels(&letter)) {
                letters.pop();
            } else {
                letters.push(letter);
            }
        }
        Ok(Word {
            alphabet: self.alphabet,
            letters,
        })
    }

    /// Group inverse: reverse the letters and flip every sign.
    pub fn invert(&self) -> Word {
        Word {
            alphabet: self.alphabet,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// The conjugate `by⁻¹ · self · by`.
    pub fn conjugate(&self, by: &Word) -> Result<Word> {
        by.invert().multiply(self)?.multiply(by)
    }

    /// Sum of the signs of the letters with generator index `gen`.
    pub fn exponent_sum(&self, gen: usize) -> Result<i64> {
        self.alphabet.check_generator(gen)?;
        Ok(self
            .letters
            .iter()
            .filter(|l| l.index == gen)
            .map(Letter::sign)
            .sum())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for letter in &self.letters {
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}
