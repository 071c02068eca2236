//! Character language model over a 28-symbol alphabet: order-2 counts with
//! absolute-discounting backoff to order 1 and order 0.
//!
//! Only the shape of the next-character prior matters to the learning loop,
//! so the model is deliberately small; a stronger predictor can be swapped in
//! behind [`CharLm::next_distribution`].

use std::collections::HashMap;

/// a-z, space, backspace.
pub const ALPHABET_SIZE: usize = 28;
pub const SPACE: usize = 26;
pub const BACKSPACE: usize = 27;

const DISCOUNT: f64 = 0.5;

/// Maps a character onto the alphabet, if representable.
pub fn symbol_of(c: char) -> Option<usize> {
    match c {
        'a'..='z' => Some(c as usize - 'a' as usize),
        ' ' => Some(SPACE),
        '\u{8}' => Some(BACKSPACE),
        _ => None,
    }
}

pub fn symbol_char(s: usize) -> char {
    match s {
        0..=25 => (b'a' + s as u8) as char,
        SPACE => ' ',
        _ => '\u{8}',
    }
}

/// Count-based character model with fixed context length 2.
#[derive(Debug, Clone)]
pub struct CharLm {
    unigram: [u64; ALPHABET_SIZE],
    bigram: HashMap<usize, [u64; ALPHABET_SIZE]>,
    trigram: HashMap<(usize, usize), [u64; ALPHABET_SIZE]>,
}

impl CharLm {
    /// Trains on arbitrary text. Uppercase folds to lowercase, any whitespace
    /// run becomes a single space, everything else is skipped.
    pub fn train(text: &str) -> Self {
        let mut symbols = Vec::with_capacity(text.len());
        let mut last_space = true;
        for c in text.chars() {
            let c = c.to_ascii_lowercase();
            if c.is_whitespace() {
                if !last_space {
                    symbols.push(SPACE);
                    last_space = true;
                }
            } else if let Some(s) = symbol_of(c) {
                symbols.push(s);
                last_space = false;
            }
        }
        let mut lm = CharLm {
            unigram: [0; ALPHABET_SIZE],
            bigram: HashMap::new(),
            trigram: HashMap::new(),
        };
        for (i, &s) in symbols.iter().enumerate() {
            lm.unigram[s] += 1;
            if i >= 1 {
                lm.bigram.entry(symbols[i - 1]).or_insert([0; ALPHABET_SIZE])[s] += 1;
            }
            if i >= 2 {
                lm.trigram
                    .entry((symbols[i - 2], symbols[i - 1]))
                    .or_insert([0; ALPHABET_SIZE])[s] += 1;
            }
        }
        lm
    }

    /// The bundled plain-English training text.
    pub fn builtin() -> Self {
        Self::train(include_str!("corpus.txt"))
    }

    fn base_distribution(&self) -> [f64; ALPHABET_SIZE] {
        // add-one smoothing keeps every symbol (including backspace) alive
        let total: u64 = self.unigram.iter().sum();
        let denom = total as f64 + ALPHABET_SIZE as f64;
        let mut out = [0.0; ALPHABET_SIZE];
        for (o, &c) in out.iter_mut().zip(&self.unigram) {
            *o = (c as f64 + 1.0) / denom;
        }
        out
    }

    fn discounted(
        counts: Option<&[u64; ALPHABET_SIZE]>,
        fallback: [f64; ALPHABET_SIZE],
    ) -> [f64; ALPHABET_SIZE] {
        let Some(counts) = counts else {
            return fallback;
        };
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return fallback;
        }
        let distinct = counts.iter().filter(|&&c| c > 0).count() as f64;
        let lambda = DISCOUNT * distinct / total as f64;
        let mut out = [0.0; ALPHABET_SIZE];
        for i in 0..ALPHABET_SIZE {
            let head = (counts[i] as f64 - DISCOUNT).max(0.0) / total as f64;
            out[i] = head + lambda * fallback[i];
        }
        out
    }

    /// Distribution of the next symbol given the typed prefix (the last two
    /// symbols condition the prediction). Always strictly positive and
    /// normalized.
    pub fn next_distribution(&self, prefix: &[usize]) -> [f64; ALPHABET_SIZE] {
        let base = self.base_distribution();
        let n = prefix.len();
        let order1 = if n >= 1 {
            Self::discounted(self.bigram.get(&prefix[n - 1]), base)
        } else {
            base
        };
        if n >= 2 {
            Self::discounted(self.trigram.get(&(prefix[n - 2], prefix[n - 1])), order1)
        } else {
            order1
        }
    }
}
