//! Certified delta profiles at depths beyond the index cutoff.
//!
//! The shallow engine answers `delta` queries by direct lookup, so it is
//! limited to values below the index cutoff. Accident analysis of `H^n(x)`
//! needs delta values of order `lambda^n`. This module scans such profiles
//! with two ingredients:
//!
//! * a membership certifier for windows of any length: short windows go to
//!   the index; long windows are parsed into substitution blocks (the parse
//!   is deterministic per phase for a marked substitution, and at most one
//!   phase per possible block offset exists) and membership reduces to the
//!   desubstituted context word, recursively, until the index decides;
//! * a front scan: the exit point `k + delta_k` is constant between
//!   accidents, so the profile is reconstructed from O(accidents) binary
//!   searches, each making O(log) certifier calls.
//!
//! Every reported value is exact; anything the certifier cannot decide
//! surfaces as an error rather than an extrapolation.

use crate::attractor::{AttractorError, LevelProfiler, PROFILE_CAP};
use crate::language::LanguageIndex;
use crate::substitution::Word;
use crate::tail::Tail;

/// Default bound on recursion nodes per certifier call.
pub const NODE_BUDGET: usize = 100_000;

/// Membership certifier and profile scanner for long windows.
///
/// Requires a marked substitution with every image of length at least 2 (so
/// the block parse shrinks geometrically) and an index cutoff of at least
/// four block lengths (so the recursion bottoms out in index lookups).
pub struct DeepProfiler<'a> {
    index: &'a LanguageIndex,
    /// letter -> the unique letter whose image starts with it
    first_map: Vec<u8>,
    /// letter -> the unique letter whose image ends with it
    last_map: Vec<u8>,
    max_img: usize,
    pub node_budget: usize,
    nodes: usize,
    pub cap: usize,
}

impl<'a> DeepProfiler<'a> {
    pub fn new(index: &'a LanguageIndex) -> Result<DeepProfiler<'a>, AttractorError> {
        let subst = index.subst();
        if !subst.is_marked() {
            return Err(AttractorError::StructuralUnsupported {
                reason: "substitution is not marked".into(),
            });
        }
        let min_img = subst.images().iter().map(|w| w.len()).min().unwrap_or(0);
        if min_img < 2 {
            return Err(AttractorError::StructuralUnsupported {
                reason: "some image has length < 2".into(),
            });
        }
        let max_img = subst.images().iter().map(|w| w.len()).max().unwrap_or(0);
        if index.max_len() < 4 * max_img {
            return Err(AttractorError::StructuralUnsupported {
                reason: format!(
                    "index cutoff {} below four block lengths ({})",
                    index.max_len(),
                    4 * max_img
                ),
            });
        }
        let d = subst.size();
        let mut first_map = vec![0u8; d];
        let mut last_map = vec![0u8; d];
        for (c, img) in subst.images().iter().enumerate() {
            first_map[img.0[0] as usize] = c as u8;
            last_map[img.0[img.len() - 1] as usize] = c as u8;
        }
        Ok(DeepProfiler {
            index,
            first_map,
            last_map,
            max_img,
            node_budget: NODE_BUDGET,
            nodes: 0,
            cap: PROFILE_CAP,
        })
    }

    /// Exact membership of `w` in the language, at any length.
    pub fn certify(&mut self, w: &[u8]) -> Result<bool, AttractorError> {
        self.nodes = 0;
        self.cert_inner(w)
    }

    fn cert_inner(&mut self, w: &[u8]) -> Result<bool, AttractorError> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(AttractorError::NodeBudgetExceeded {
                budget: self.node_budget,
            });
        }
        if w.len() <= self.index.max_len() {
            return Ok(self.index.contains(w));
        }
        let subst = self.index.subst();
        // One phase per offset of the first full block; each phase yields at
        // most one decomposition because first and last letters of images
        // are injective.
        'phase: for s_len in 0..self.max_img {
            let s_hat = if s_len == 0 {
                None
            } else {
                let c = self.last_map[w[s_len - 1] as usize];
                let img = &subst.images()[c as usize];
                if img.len() <= s_len || !img.0.ends_with(&w[..s_len]) {
                    continue;
                }
                Some(c)
            };
            let mut core: Vec<u8> = Vec::with_capacity(w.len() / 2 + 2);
            if let Some(c) = s_hat {
                core.push(c);
            }
            let mut pos = s_len;
            while pos < w.len() {
                let c = self.first_map[w[pos] as usize];
                let img = &subst.images()[c as usize];
                if pos + img.len() <= w.len() {
                    if w[pos..pos + img.len()] != img.0[..] {
                        continue 'phase;
                    }
                    core.push(c);
                    pos += img.len();
                } else {
                    // Final partial block: must be a proper prefix.
                    if !img.0.starts_with(&w[pos..]) {
                        continue 'phase;
                    }
                    core.push(c);
                    break;
                }
            }
            if self.cert_inner(&core)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Largest `e >= lo` with `T[k..e)` in the language, growing the digit
    /// buffer as needed. `T[k..lo)` must already be known to be a factor.
    fn extend_front(
        &mut self,
        x: &Tail,
        level: u32,
        digits: &mut Word,
        k: usize,
        lo: usize,
    ) -> Result<usize, AttractorError> {
        let mut good = lo;
        let mut width = 1usize;
        let bad;
        loop {
            let probe = good + width;
            self.ensure_digits(x, level, digits, probe)?;
            if self.cert_inner_window(digits, k, probe)? {
                good = probe;
                width = width.saturating_mul(2);
            } else {
                bad = probe;
                break;
            }
        }
        let mut lo_b = good;
        let mut hi_b = bad;
        while hi_b - lo_b > 1 {
            let mid = lo_b + (hi_b - lo_b) / 2;
            if self.cert_inner_window(digits, k, mid)? {
                lo_b = mid;
            } else {
                hi_b = mid;
            }
        }
        Ok(lo_b)
    }

    fn cert_inner_window(
        &mut self,
        digits: &Word,
        a: usize,
        b: usize,
    ) -> Result<bool, AttractorError> {
        self.nodes = 0;
        self.cert_inner(&digits.0[a..b])
    }

    fn ensure_digits(
        &self,
        x: &Tail,
        level: u32,
        digits: &mut Word,
        need: usize,
    ) -> Result<(), AttractorError> {
        if digits.len() >= need {
            return Ok(());
        }
        let new_len = need.max(digits.len().saturating_mul(2));
        if new_len > self.cap {
            return Err(AttractorError::BudgetExceeded {
                needed: new_len as u128,
                cap: self.cap,
            });
        }
        *digits = x.image_digits(self.index.subst(), level, new_len)?;
        Ok(())
    }

    /// Digits and delta profile of `H^level(x)` over `[0, horizon]`.
    pub fn scan(
        &mut self,
        x: &Tail,
        level: u32,
        horizon: usize,
    ) -> Result<(Word, Vec<usize>), AttractorError> {
        let subst = self.index.subst();
        let lens = subst
            .image_lengths_u128(level)
            .ok_or(AttractorError::BudgetExceeded {
                needed: u128::MAX,
                cap: self.cap,
            })?;
        let t_max = lens.iter().copied().max().unwrap_or(1);
        let start_len = (horizon as u128 + 4 * t_max + 64).min(self.cap as u128) as usize;
        let mut digits = x.image_digits(subst, level, start_len)?;
        let mut profile = vec![0usize; horizon + 1];

        let mut k0 = 0usize;
        let mut e = self.extend_front(x, level, &mut digits, 0, 1)?;
        loop {
            // Next accident: smallest k in (k0, e] whose extended window
            // T[k..e+1) re-enters the language. Monotone in k, since factors
            // are closed under taking suffixes.
            let mut lo = k0;
            let mut hi = e;
            debug_assert!(self.cert_inner_window(&digits, hi, e + 1)?);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.cert_inner_window(&digits, mid, e + 1)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let k_star = hi;
            for k in k0..k_star.min(horizon + 1) {
                profile[k] = e - k;
            }
            if k_star > horizon {
                break;
            }
            e = self.extend_front(x, level, &mut digits, k_star, e + 1)?;
            k0 = k_star;
        }
        Ok((digits, profile))
    }
}

impl LevelProfiler for DeepProfiler<'_> {
    fn profile(
        &mut self,
        x: &Tail,
        level: u32,
        horizon: usize,
    ) -> Result<(Word, Vec<usize>), AttractorError> {
        self.scan(x, level, horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::{
        accident_renormalization_check, accidents_from_profile, delta_profile, ShallowProfiler,
    };
    use crate::examples::{fibonacci, three_letter, thue_morse};
    use crate::substitution::Substitution;

    #[test]
    fn certifier_agrees_with_larger_index() {
        let tm = thue_morse();
        let small = LanguageIndex::build(&tm, 24).unwrap();
        let big = LanguageIndex::build(&tm, 64).unwrap();
        let mut deep = DeepProfiler::new(&small).unwrap();
        // Every factor of length 30 and 41, plus mutated non-factors.
        for len in [30usize, 41] {
            let factors = big.factors_sorted(len);
            assert!(!factors.is_empty());
            for w in &factors {
                assert!(deep.certify(&w.0).unwrap(), "factor rejected: {w:?}");
            }
            // Flip one letter of each factor; verify against the big index.
            for w in &factors {
                let mut v = w.0.clone();
                v[len / 2] ^= 1;
                assert_eq!(
                    deep.certify(&v).unwrap(),
                    big.contains(&v),
                    "mutated word disagreement"
                );
            }
        }
    }

    #[test]
    fn certifier_agrees_on_three_letter_words() {
        let th = three_letter();
        let small = LanguageIndex::build(&th, 30).unwrap();
        let big = LanguageIndex::build(&th, 75).unwrap();
        let mut deep = DeepProfiler::new(&small).unwrap();
        for w in big.factors_sorted(40) {
            assert!(deep.certify(&w.0).unwrap());
        }
        // Mutated words exercise the rejecting paths of the recursion; these
        // lengths exceed the small cutoff, so every query goes structural.
        for w in big.factors_sorted(32) {
            for pos in [0usize, 15, 31] {
                for delta in 1..3u8 {
                    let mut v = w.0.clone();
                    v[pos] = (v[pos] + delta) % 3;
                    assert_eq!(deep.certify(&v).unwrap(), big.contains(&v));
                }
            }
        }
    }

    #[test]
    fn unsupported_without_marking() {
        let fib = fibonacci();
        let idx = LanguageIndex::build(&fib, 24).unwrap();
        assert!(matches!(
            DeepProfiler::new(&idx),
            Err(AttractorError::StructuralUnsupported { .. })
        ));
        let aba = Substitution::parse("a -> aba / b -> ab").unwrap();
        let idx2 = LanguageIndex::build(&aba, 24).unwrap();
        assert!(matches!(
            DeepProfiler::new(&idx2),
            Err(AttractorError::StructuralUnsupported { .. })
        ));
    }

    #[test]
    fn deep_profile_matches_shallow() {
        let tm = thue_morse();
        let small = LanguageIndex::build(&tm, 24).unwrap();
        let big = LanguageIndex::build(&tm, 80).unwrap();
        let ones = Tail::periodic(tm.parse_word("1").unwrap());
        let mut deep = DeepProfiler::new(&small).unwrap();
        for level in [3u32, 4] {
            let horizon = (1usize << level) - 1;
            let (_, got) = deep.scan(&ones, level, horizon).unwrap();
            let img = ones.image(&tm, level, PROFILE_CAP).unwrap();
            let want = delta_profile(&big, &img, horizon).unwrap();
            assert_eq!(got, want, "level {level}");
        }
    }

    #[test]
    fn deep_accidents_beyond_shallow_reach() {
        let tm = thue_morse();
        let idx = LanguageIndex::build(&tm, 48).unwrap();
        let ones = Tail::periodic(tm.parse_word("1").unwrap());
        let mut deep = DeepProfiler::new(&idx).unwrap();
        for n in [6u32, 7] {
            let t_n = 1usize << n;
            let (digits, profile) = deep.scan(&ones, n, t_n - 1).unwrap();
            let acc = accidents_from_profile(&tm, &digits.0, &profile).unwrap();
            let r = acc.restricted(t_n);
            assert_eq!(r.times, vec![1usize << (n - 1)], "n = {n}");
            assert_eq!(r.depths, vec![1usize << (n + 1); 2], "n = {n}");
        }
    }

    #[test]
    fn renormalization_check_through_deep_profiler() {
        let tm = thue_morse();
        let idx = LanguageIndex::build(&tm, 48).unwrap();
        let ones = Tail::periodic(tm.parse_word("1").unwrap());
        let mut deep = DeepProfiler::new(&idx).unwrap();
        let rep = accident_renormalization_check(&idx, &ones, Some(1), 6, 3, &mut deep).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.image.times, vec![32]);
        assert_eq!(rep.image.depths, vec![128, 128]);
        // Shallow profiler saturates at this depth.
        let mut sp = ShallowProfiler { index: &idx };
        assert!(accident_renormalization_check(&idx, &ones, Some(1), 6, 3, &mut sp).is_err());
    }
}
