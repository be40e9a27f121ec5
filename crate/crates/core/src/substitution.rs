//! Substitution parsing and linear-algebraic structure.
//!
//! A substitution maps each letter of a finite alphabet to a nonempty word.
//! Letters are stored internally as `u8` indices into the alphabet; the
//! original characters are kept for parsing and display only.

use serde::Serialize;
use std::fmt;
use std::ops::{Deref, DerefMut};
use thiserror::Error;

/// Default hard cap on expanded word lengths (2^26 letters).
pub const DEFAULT_CAP: usize = 1 << 26;

/// A word over the internal letter indices.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl std::borrow::Borrow<[u8]> for Word {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl Word {
    pub fn new() -> Self {
        Word(Vec::new())
    }

    pub fn from_letter(a: u8) -> Self {
        Word(vec![a])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl Deref for Word {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl DerefMut for Word {
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<u8> for Word {
    fn from_iter<I: IntoIterator<Item = u8>>(it: I) -> Self {
        Word(it.into_iter().collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({:?})", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: expected `letter -> image`")]
    BadRule { line: usize },
    #[error("line {line}: left side must be a single letter, got `{got}`")]
    BadLetter { line: usize, got: String },
    #[error("line {line}: duplicate rule for letter `{letter}`")]
    DuplicateRule { line: usize, letter: char },
    #[error("line {line}: empty image for letter `{letter}`")]
    EmptyImage { line: usize, letter: char },
    #[error("letter `{letter}` appears in an image but has no rule")]
    MissingRule { letter: char },
    #[error("alphabet needs at least two letters, found {found}")]
    AlphabetTooSmall { found: usize },
    #[error("alphabet has {found} letters, more than the supported 250")]
    AlphabetTooLarge { found: usize },
    #[error("invalid JSON substitution: {0}")]
    Json(String),
    #[error("letter `{letter}` not in the alphabet")]
    UnknownLetter { letter: char },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("every image has length 1; the substitution is a letter permutation")]
    Permutation,
    #[error("length cap {cap} exceeded while expanding")]
    CapExceeded { cap: usize },
    #[error("no growing fixed-point seed found")]
    NoSeed,
    #[error("letter `{letter}` does not seed a fixed point: its image must start with the letter itself and have length at least 2")]
    NotASeed { letter: char },
    #[error("the tail's repeat block is empty")]
    EmptyBlock,
    #[error("a shift into a fixed-point continuation has no finite description")]
    ShiftIntoFixedPoint,
}

/// Certified two-sided estimate of the Perron root of the incidence matrix.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PerronEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Seed data for the canonical one-sided fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointSeed {
    /// Letter `s` such that `H^power(s)` starts with `s`.
    pub letter: u8,
    /// Power `r` with `first(H^r(s)) = s` and `|H^r(s)| >= 2`.
    pub power: u32,
}

/// Evidence about (a)periodicity of the subshift, from the complexity
/// criterion: an eventually periodic fixed point forces p(n+1) = p(n) for
/// some n, while strict growth up to a bound is reported as just that.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AperiodicEvidence {
    CertifiedPeriodic { period: String },
    NoPeriodicityFoundUpToBound { bound: usize },
}

/// Static structure of the substitution, as reported by `analyze`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureReport {
    pub alphabet: Vec<char>,
    pub images: Vec<String>,
    pub incidence: Vec<Vec<u64>>,
    pub primitive: bool,
    pub primitive_witness: Option<usize>,
    pub marked: bool,
    pub aperiodic_evidence: Option<AperiodicEvidence>,
    pub perron: PerronEstimate,
    pub length_constant: f64,
}

#[derive(Clone)]
pub struct Substitution {
    letters: Vec<char>,
    images: Vec<Word>,
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = (0..self.size())
            .map(|i| format!("{} -> {}", self.letters[i], self.word_string(&self.images[i])))
            .collect();
        write!(f, "Substitution[{}]", rules.join(", "))
    }
}

impl Substitution {
    /// Parses either the line format `a -> image` (one rule per line, `/` also
    /// separates rules, `#` starts a comment) or a JSON object mapping letter
    /// to image. Letters are indexed in order of first appearance.
    pub fn parse(input: &str) -> Result<Substitution, ParseError> {
        let trimmed = input.trim_start();
        if trimmed.starts_with('{') {
            Self::parse_json(trimmed)
        } else {
            Self::parse_lines(input)
        }
    }

    fn parse_json(input: &str) -> Result<Substitution, ParseError> {
        let map: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(input).map_err(|e| ParseError::Json(e.to_string()))?;
        let mut rules = Vec::new();
        for (key, value) in &map {
            let mut key_chars = key.chars();
            let letter = match (key_chars.next(), key_chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(ParseError::BadLetter {
                        line: 0,
                        got: key.clone(),
                    })
                }
            };
            let image = value
                .as_str()
                .ok_or_else(|| ParseError::Json(format!("image of `{letter}` is not a string")))?;
            let image: Vec<char> = image.chars().filter(|c| !c.is_whitespace()).collect();
            rules.push((letter, image, 0usize));
        }
        Self::assemble(rules)
    }

    fn parse_lines(input: &str) -> Result<Substitution, ParseError> {
        let mut rules = Vec::new();
        for (idx, raw_line) in input.split('\n').enumerate() {
            let line_no = idx + 1;
            let uncommented = raw_line.split('#').next().unwrap_or("");
            for piece in uncommented.split('/') {
                let piece = piece.trim();
                if piece.is_empty() {
                    continue;
                }
                let Some((lhs, rhs)) = piece.split_once("->") else {
                    return Err(ParseError::BadRule { line: line_no });
                };
                let lhs = lhs.trim();
                let mut lhs_chars = lhs.chars();
                let letter = match (lhs_chars.next(), lhs_chars.next()) {
                    (Some(c), None) => c,
                    _ => {
                        return Err(ParseError::BadLetter {
                            line: line_no,
                            got: lhs.to_string(),
                        })
                    }
                };
                let image: Vec<char> = rhs.chars().filter(|c| !c.is_whitespace()).collect();
                rules.push((letter, image, line_no));
            }
        }
        Self::assemble(rules)
    }

    fn assemble(rules: Vec<(char, Vec<char>, usize)>) -> Result<Substitution, ParseError> {
        if rules.is_empty() {
            return Err(ParseError::AlphabetTooSmall { found: 0 });
        }
        let mut letters: Vec<char> = Vec::new();
        let index_of = |letters: &mut Vec<char>, c: char| -> usize {
            match letters.iter().position(|&x| x == c) {
                Some(i) => i,
                None => {
                    letters.push(c);
                    letters.len() - 1
                }
            }
        };
        // First pass fixes the letter order: left sides and then image letters,
        // in rule order.
        for (lhs, image, line) in &rules {
            if image.is_empty() {
                return Err(ParseError::EmptyImage {
                    line: *line,
                    letter: *lhs,
                });
            }
            index_of(&mut letters, *lhs);
            for &c in image {
                index_of(&mut letters, c);
            }
        }
        let found = letters.len();
        if found < 2 {
            return Err(ParseError::AlphabetTooSmall { found });
        }
        if found > 250 {
            return Err(ParseError::AlphabetTooLarge { found });
        }
        let mut images: Vec<Option<Word>> = vec![None; found];
        for (lhs, image, line) in &rules {
            let li = letters.iter().position(|x| x == lhs).unwrap();
            if images[li].is_some() {
                return Err(ParseError::DuplicateRule {
                    line: *line,
                    letter: *lhs,
                });
            }
            let word: Word = image
                .iter()
                .map(|c| letters.iter().position(|x| x == c).unwrap() as u8)
                .collect();
            images[li] = Some(word);
        }
        for (i, image) in images.iter().enumerate() {
            if image.is_none() {
                return Err(ParseError::MissingRule { letter: letters[i] });
            }
        }
        Ok(Substitution {
            letters,
            images: images.into_iter().map(|w| w.unwrap()).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.letters.len()
    }

    pub fn alphabet(&self) -> &[char] {
        &self.letters
    }

    pub fn letter_char(&self, a: u8) -> char {
        self.letters[a as usize]
    }

    pub fn image(&self, a: u8) -> &Word {
        &self.images[a as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, ParseError> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                self.letters
                    .iter()
                    .position(|&x| x == c)
                    .map(|i| i as u8)
                    .ok_or(ParseError::UnknownLetter { letter: c })
            })
            .collect()
    }

    pub fn word_string(&self, w: &[u8]) -> String {
        w.iter().map(|&a| self.letters[a as usize]).collect()
    }

    /// Applies the substitution letterwise. Panics only on out-of-range letters.
    pub fn apply(&self, w: &[u8]) -> Word {
        let total: usize = w.iter().map(|&a| self.images[a as usize].len()).sum();
        let mut out = Vec::with_capacity(total);
        for &a in w {
            out.extend_from_slice(&self.images[a as usize]);
        }
        Word(out)
    }

    /// Applies the substitution, truncating the output at `cap` letters.
    /// Returns the (possibly truncated) word and whether truncation happened.
    /// Truncation keeps a genuine prefix of the untruncated image, so iterated
    /// capped application still produces prefixes of the true iterate.
    pub fn apply_capped(&self, w: &[u8], cap: usize) -> (Word, bool) {
        let mut out = Vec::new();
        for &a in w {
            let img = &self.images[a as usize];
            if out.len() + img.len() <= cap {
                out.extend_from_slice(img);
            } else {
                let room = cap - out.len();
                out.extend_from_slice(&img[..room]);
                return (Word(out), true);
            }
        }
        (Word(out), false)
    }

    /// `H^n(a)` with a hard length cap. The truncation flag is sticky across
    /// rounds.
    pub fn iterate_letter_capped(&self, a: u8, n: u32, cap: usize) -> (Word, bool) {
        self.apply_n_capped(&[a], n, cap)
    }

    /// `H^n(w)` with a hard length cap and sticky truncation flag.
    pub fn apply_n_capped(&self, w: &[u8], n: u32, cap: usize) -> (Word, bool) {
        let mut w = Word::from(w);
        let mut truncated = false;
        for _ in 0..n {
            let (next, t) = self.apply_capped(&w, cap);
            w = next;
            truncated |= t;
        }
        (w, truncated)
    }

    /// The substitution `H^n` on the same alphabet, with images expanded
    /// explicitly. Intended for small `n`; errors if an image would exceed
    /// the default cap.
    pub fn power(&self, n: u32) -> Result<Substitution, SubstError> {
        let mut images = Vec::with_capacity(self.size());
        for a in 0..self.size() as u8 {
            let (img, truncated) = self.iterate_letter_capped(a, n, DEFAULT_CAP);
            if truncated {
                return Err(SubstError::CapExceeded { cap: DEFAULT_CAP });
            }
            images.push(img);
        }
        Ok(Substitution {
            letters: self.letters.clone(),
            images,
        })
    }

    /// Incidence matrix: entry `[i][j]` counts occurrences of letter `j` in
    /// the image of letter `i`.
    pub fn incidence(&self) -> Vec<Vec<u64>> {
        let d = self.size();
        let mut m = vec![vec![0u64; d]; d];
        for (i, image) in self.images.iter().enumerate() {
            for &j in image.iter() {
                m[i][j as usize] += 1;
            }
        }
        m
    }

    /// Lengths `|H^n(a)|` for every letter, or `None` on u128 overflow.
    pub fn image_lengths_u128(&self, n: u32) -> Option<Vec<u128>> {
        let d = self.size();
        let m = self.incidence();
        let mut lens = vec![1u128; d];
        for _ in 0..n {
            let mut next = vec![0u128; d];
            for i in 0..d {
                let mut acc: u128 = 0;
                for j in 0..d {
                    let term = (m[i][j] as u128).checked_mul(lens[j])?;
                    acc = acc.checked_add(term)?;
                }
                next[i] = acc;
            }
            lens = next;
        }
        Some(lens)
    }

    /// Smallest `k` such that every entry of `M^k` is positive, if one exists
    /// below the Wielandt bound `(D-1)^2 + 1`. `Some(k)` certifies primitivity.
    pub fn primitive_witness(&self) -> Option<usize> {
        let d = self.size();
        let m = self.incidence();
        let base: Vec<Vec<bool>> = m
            .iter()
            .map(|row| row.iter().map(|&x| x > 0).collect())
            .collect();
        let all_positive = |b: &Vec<Vec<bool>>| b.iter().all(|row| row.iter().all(|&x| x));
        let cap = (d - 1) * (d - 1) + 1;
        let mut power = base.clone();
        for k in 1..=cap {
            if all_positive(&power) {
                return Some(k);
            }
            // power = power * base over the boolean semiring
            let mut next = vec![vec![false; d]; d];
            for i in 0..d {
                for t in 0..d {
                    if power[i][t] {
                        for j in 0..d {
                            if base[t][j] {
                                next[i][j] = true;
                            }
                        }
                    }
                }
            }
            power = next;
        }
        if all_positive(&power) {
            return Some(cap);
        }
        None
    }

    /// Perron root of the incidence matrix by power iteration with
    /// Collatz-Wielandt bounds. For a strictly positive vector `x`,
    /// `min_i (Mx)_i / x_i <= lambda <= max_i (Mx)_i / x_i`; images are
    /// nonempty so positivity of the iterates is preserved.
    pub fn perron(&self) -> PerronEstimate {
        let d = self.size();
        let m = self.incidence();
        let mut x = vec![1.0f64; d];
        let mut lower = 0.0f64;
        let mut upper = f64::INFINITY;
        let mut iterations = 0u64;
        let tol = 1e-12;
        let max_iter = 1_000_000u64;
        while iterations < max_iter {
            iterations += 1;
            let mut y = vec![0.0f64; d];
            for i in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += m[i][j] as f64 * x[j];
                }
                y[i] = acc;
            }
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for i in 0..d {
                let r = y[i] / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            lower = lower.max(lo);
            upper = upper.min(hi);
            if upper - lower <= tol {
                break;
            }
            let norm = y.iter().cloned().fold(0.0f64, f64::max);
            for v in &mut y {
                *v /= norm;
            }
            x = y;
        }
        PerronEstimate {
            value: 0.5 * (lower + upper),
            lower,
            upper,
            iterations,
            converged: upper - lower <= tol,
        }
    }

    /// Length constant `K = max_{a, 0 <= n <= 30} |H^n(a)| / lambda^n`.
    /// The scan stops early if the exact lengths overflow u128.
    pub fn length_constant(&self, lambda: f64) -> f64 {
        let d = self.size();
        let m = self.incidence();
        let mut lens = vec![1u128; d];
        let mut k = 1.0f64;
        let mut pow = 1.0f64;
        'outer: for _ in 1..=30u32 {
            let mut next = vec![0u128; d];
            for i in 0..d {
                let mut acc: u128 = 0;
                for j in 0..d {
                    let Some(term) = (m[i][j] as u128).checked_mul(lens[j]) else {
                        break 'outer;
                    };
                    let Some(sum) = acc.checked_add(term) else {
                        break 'outer;
                    };
                    acc = sum;
                }
                next[i] = acc;
            }
            lens = next;
            pow *= lambda;
            for &l in &lens {
                k = k.max(l as f64 / pow);
            }
        }
        k
    }

    /// Marked: the first letters of the images are pairwise distinct, and so
    /// are the last letters.
    pub fn is_marked(&self) -> bool {
        let d = self.size();
        let mut firsts = vec![false; d];
        let mut lasts = vec![false; d];
        for image in &self.images {
            let f = image[0] as usize;
            let l = image[image.len() - 1] as usize;
            if firsts[f] || lasts[l] {
                return false;
            }
            firsts[f] = true;
            lasts[l] = true;
        }
        true
    }

    /// Finds a letter `s` and power `r` such that `H^r(s)` starts with `s`
    /// and has length at least 2, so `H^r` has a one-sided fixed point
    /// `s...` obtained by iterating on `s`.
    pub fn fixed_point_seed(&self) -> Result<FixedPointSeed, SubstError> {
        if self.images.iter().all(|w| w.len() == 1) {
            return Err(SubstError::Permutation);
        }
        // Follow the first-letter map from letter 0 until it cycles.
        let first = |a: u8| self.images[a as usize][0];
        let mut seen = vec![u32::MAX; self.size()];
        let mut a = 0u8;
        let mut step = 0u32;
        while seen[a as usize] == u32::MAX {
            seen[a as usize] = step;
            a = first(a);
            step += 1;
        }
        let cycle_len = step - seen[a as usize];
        // `a` is on the cycle and first(H^cycle_len(a)) = a. Find a multiple
        // of the cycle length at which the image of `a` has grown.
        let mut len: u128 = 1;
        let m = self.incidence();
        let mut lens = vec![1u128; self.size()];
        for mult in 1..=64u32 {
            for _ in 0..cycle_len {
                let mut next = vec![0u128; self.size()];
                for i in 0..self.size() {
                    let mut acc: u128 = 0;
                    for j in 0..self.size() {
                        acc = acc
                            .checked_add((m[i][j] as u128).wrapping_mul(lens[j]))
                            .unwrap_or(u128::MAX);
                    }
                    next[i] = acc;
                }
                lens = next;
            }
            len = lens[a as usize];
            if len >= 2 {
                return Ok(FixedPointSeed {
                    letter: a,
                    power: mult * cycle_len,
                });
            }
        }
        let _ = len;
        Err(SubstError::NoSeed)
    }

    /// Prefix of length `len` of the fixed point seeded at letter `a`.
    /// Requires that the image of `a` start with `a` and be growing.
    pub fn fixed_point_prefix(&self, a: u8, len: usize) -> Result<Word, SubstError> {
        let img = &self.images[a as usize];
        if img.len() < 2 || img[0] != a {
            return Err(SubstError::NotASeed {
                letter: self.letters[a as usize],
            });
        }
        self.grow_prefix(a, 1, len)
    }

    /// Prefix of length `len` of the canonical one-sided fixed point: the
    /// fixed point of the smallest power of the substitution seeded at the
    /// first letter whose image under that power starts with itself.
    pub fn canonical_fixed_point_prefix(&self, len: usize) -> Result<Word, SubstError> {
        let seed = self.fixed_point_seed()?;
        self.grow_prefix(seed.letter, seed.power, len)
    }

    fn grow_prefix(&self, letter: u8, power: u32, len: usize) -> Result<Word, SubstError> {
        let mut w = Word::from_letter(letter);
        loop {
            if w.len() >= len {
                w.0.truncate(len);
                return Ok(w);
            }
            let before = w.len();
            let mut next = w;
            for _ in 0..power {
                let (stepped, _) = self.apply_capped(&next, len);
                next = stepped;
            }
            w = next;
            if w.len() == before {
                return Err(SubstError::NoSeed);
            }
        }
    }

    pub fn structure_report(&self) -> StructureReport {
        let perron = self.perron();
        let witness = self.primitive_witness();
        StructureReport {
            alphabet: self.letters.clone(),
            images: self
                .images
                .iter()
                .map(|w| self.word_string(w))
                .collect(),
            incidence: self.incidence(),
            primitive: witness.is_some(),
            primitive_witness: witness,
            marked: self.is_marked(),
            aperiodic_evidence: None,
            perron,
            length_constant: self.length_constant(perron.value),
        }
    }
}
