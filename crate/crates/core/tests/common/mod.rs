//! Shared helpers for the integration test suites.

use stallings::{Alphabet, Letter, Subgroup, Word};

/// Tiny xorshift generator; plenty for deterministic test sampling.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        XorShift(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Uniform random reduced word of length `min_len..=max_len`.
pub fn random_reduced_word(
    rng: &mut XorShift,
    alphabet: Alphabet,
    min_len: usize,
    max_len: usize,
) -> Word {
    let len = min_len + rng.below(max_len - min_len + 1);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        let candidates: Vec<Letter> = alphabet
            .signed_letters()
            .filter(|l| letters.last().map(|p| p.inverted()) != Some(*l))
            .collect();
        letters.push(candidates[rng.below(candidates.len())]);
    }
    Word::reduce(alphabet, letters).unwrap()
}

/// Random subgroup with `1..=max_gens` generators of length `1..=max_len`.
pub fn random_subgroup(
    rng: &mut XorShift,
    alphabet: Alphabet,
    max_gens: usize,
    max_len: usize,
) -> Subgroup {
    let count = 1 + rng.below(max_gens);
    let gens: Vec<Word> = (0..count)
        .map(|_| random_reduced_word(rng, alphabet, 1, max_len))
        .collect();
    Subgroup::make(alphabet, &gens).unwrap()
}

/// Random element of the subgroup: a short product of basis words.
pub fn random_member(rng: &mut XorShift, subgroup: &Subgroup) -> Word {
    let alphabet = subgroup.alphabet();
    let mut acc = Word::identity(alphabet);
    if subgroup.basis().is_empty() {
        return acc;
    }
    for _ in 0..rng.below(5) {
        let factor = &subgroup.basis()[rng.below(subgroup.basis().len())];
        let factor = if rng.below(2) == 0 {
            factor.clone()
        } else {
            factor.invert()
        };
        acc = acc.multiply(&factor).unwrap();
    }
    acc
}
