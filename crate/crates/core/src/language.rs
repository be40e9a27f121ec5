//! The language of a primitive substitution: exact factor sets up to a
//! cutoff length, depth queries, special and bispecial words, and the
//! combinatorial audits built on top of them.
//!
//! The index is built by closing the set of two-blocks under the
//! substitution and then reading all short factors out of high images of
//! those two-blocks. For a primitive substitution this produces exactly the
//! factors of the subshift (windows of length at most the cutoff always sit
//! inside the image of a two-block once images are long enough), and the
//! build cross-checks itself against a long fixed-point prefix.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::substitution::{AperiodicEvidence, SubstError, Substitution, Word};

/// Hard bound on the expanded two-block images used during the build.
const BUILD_CAP: usize = 1 << 27;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LanguageError {
    #[error("the substitution is not primitive; the factor language is not well defined by one fixed point")]
    NotPrimitive,
    #[error("index cutoff {max_len} is too small; need at least 2")]
    CutoffTooSmall { max_len: usize },
    #[error("query of length {len} exceeds the index cutoff {max_len}")]
    TooDeep { len: usize, max_len: usize },
    #[error("word `{word}` is not a factor of the subshift")]
    NotInLanguage { word: String },
    #[error("factor closure inconsistency: {detail}")]
    ClosureInconsistency { detail: String },
    #[error("fewer than two occurrences of `{word}` in the first {horizon} letters")]
    TooFewOccurrences { word: String, horizon: usize },
    #[error("power search saturated: `{word}`^{exponent} does not fit under the index cutoff")]
    PowerSearchSaturated { word: String, exponent: usize },
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// Result of a depth query: the longest prefix of the sampled sequence that
/// is a factor of the subshift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaOutcome {
    /// The prefix of this exact length is a factor and one letter more is not.
    Value(usize),
    /// Every sampled letter extends inside the language; the sample was too
    /// short to see the first exit.
    WholeWord,
    /// The first exit lies beyond the index cutoff.
    DepthExceeded,
}

impl DeltaOutcome {
    pub fn value(self) -> Option<usize> {
        match self {
            DeltaOutcome::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// Extension counts and classification of one factor.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialWordRecord {
    pub word: String,
    #[serde(skip)]
    pub letters: Word,
    pub length: usize,
    pub m_l: usize,
    pub m_r: usize,
    pub m_b: usize,
    pub i: i64,
    pub kind: SpecialKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialKind {
    Ordinary,
    LeftSpecial,
    RightSpecial,
    BispecialWeak,
    BispecialStrong,
    BispecialNeutral,
}

impl SpecialKind {
    pub fn is_bispecial(self) -> bool {
        matches!(
            self,
            SpecialKind::BispecialWeak | SpecialKind::BispecialStrong | SpecialKind::BispecialNeutral
        )
    }
}

/// Outcome of the power-exponent scan bounding `N_H`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PowerFreeReport {
    /// Least exponent such that no `w^{n_h}` with `|w| <= max_base` is a factor.
    pub n_h: usize,
    /// Largest exponent actually observed in the language.
    pub max_exponent: usize,
    /// Lexicographically first shortest word attaining `max_exponent`.
    pub witness: String,
    pub max_base: usize,
}

/// Occurrences and return gaps of a factor along the fixed point.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReturnReport {
    pub word: String,
    pub horizon: usize,
    pub positions: Vec<usize>,
    /// Gap between the end of one occurrence and the start of the next;
    /// negative when consecutive occurrences overlap.
    pub gaps: Vec<i64>,
    pub max_gap: i64,
    /// `max_gap / |word|`, the empirical linear-recurrence constant.
    pub linearity_constant: f64,
}

/// Most overlapped pair found by the bispecial overlap audit.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlapWitness {
    pub earlier: String,
    pub later: String,
    pub earlier_pos: usize,
    pub later_pos: usize,
    pub overlap: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlapReport {
    pub horizon: usize,
    pub pairs_checked: u64,
    /// Max over overlapping occurrence pairs (U at i, longer-or-equal V at
    /// j > i with j < i + |U|) of (i + |U| - j) / |U|.
    pub max_ratio: f64,
    pub witness: Option<OverlapWitness>,
}

/// Exact factor sets of the subshift up to a cutoff length.
pub struct LanguageIndex {
    subst: Substitution,
    max_len: usize,
    by_len: Vec<HashSet<Word>>,
    source_prefix_len: usize,
    lambda: f64,
    k_const: f64,
}

impl LanguageIndex {
    /// Builds the factor sets for all lengths up to `max_len`.
    pub fn build(subst: &Substitution, max_len: usize) -> Result<LanguageIndex, LanguageError> {
        if max_len < 2 {
            return Err(LanguageError::CutoffTooSmall { max_len });
        }
        if subst.primitive_witness().is_none() {
            return Err(LanguageError::NotPrimitive);
        }
        if subst.images().iter().all(|im| im.len() == 1) {
            return Err(SubstError::Permutation.into());
        }
        let d = subst.size();

        // Two-blocks as the least fixed point of the pair closure: seed with
        // adjacent pairs inside images, then repeatedly read the pairs of
        // H(x)H(y) for every known pair xy.
        let mut pairs: HashSet<(u8, u8)> = HashSet::new();
        let mut work: Vec<(u8, u8)> = Vec::new();
        for a in 0..d as u8 {
            for win in subst.image(a).windows(2) {
                let p = (win[0], win[1]);
                if pairs.insert(p) {
                    work.push(p);
                }
            }
        }
        while let Some((x, y)) = work.pop() {
            let mut joint = Word::from(&subst.image(x)[..]);
            joint.0.extend_from_slice(subst.image(y));
            for win in joint.windows(2) {
                let p = (win[0], win[1]);
                if pairs.insert(p) {
                    work.push(p);
                }
            }
        }
        let mut letter_seen = vec![false; d];
        for &(x, y) in &pairs {
            letter_seen[x as usize] = true;
            letter_seen[y as usize] = true;
        }
        if letter_seen.iter().any(|s| !s) {
            return Err(LanguageError::ClosureInconsistency {
                detail: "a letter of a primitive substitution never appears in a two-block".into(),
            });
        }

        // Expansion power: make every image of H^t at least max_len long, so
        // any window of length <= max_len sits inside the image of a
        // two-block.
        let mut lens = vec![1u128; d];
        let incidence = subst.incidence();
        let mut t: u32 = 0;
        loop {
            if lens.iter().all(|&l| l >= max_len as u128) {
                break;
            }
            t += 1;
            if t > 96 {
                return Err(SubstError::CapExceeded { cap: BUILD_CAP }.into());
            }
            let mut next = vec![0u128; d];
            for i in 0..d {
                let mut acc: u128 = 0;
                for j in 0..d {
                    acc = acc
                        .checked_add((incidence[i][j] as u128).saturating_mul(lens[j]))
                        .unwrap_or(u128::MAX);
                }
                next[i] = acc;
            }
            lens = next;
        }

        let mut by_len: Vec<HashSet<Word>> = vec![HashSet::new(); max_len + 1];
        by_len[0].insert(Word::new());
        let mut sorted_pairs: Vec<(u8, u8)> = pairs.into_iter().collect();
        sorted_pairs.sort_unstable();
        for &(x, y) in &sorted_pairs {
            let (gx, tx) = subst.iterate_letter_capped(x, t, BUILD_CAP);
            let (gy, ty) = subst.iterate_letter_capped(y, t, BUILD_CAP);
            if tx || ty {
                return Err(SubstError::CapExceeded { cap: BUILD_CAP }.into());
            }
            let mut g = gx;
            g.0.extend_from_slice(&gy);
            for n in 1..=max_len {
                for win in g.windows(n) {
                    if !by_len[n].contains(win) {
                        by_len[n].insert(Word::from(win));
                    }
                }
            }
        }

        // The prune step of the closure must remove nothing: every indexed
        // factor extends to a longer indexed factor on both sides.
        let mut buf = Word::new();
        for n in 1..max_len {
            for w in &by_len[n] {
                let mut right = false;
                let mut left = false;
                for a in 0..d as u8 {
                    if !right {
                        buf.0.clear();
                        buf.0.extend_from_slice(w);
                        buf.0.push(a);
                        right = by_len[n + 1].contains(&buf[..]);
                    }
                    if !left {
                        buf.0.clear();
                        buf.0.push(a);
                        buf.0.extend_from_slice(w);
                        left = by_len[n + 1].contains(&buf[..]);
                    }
                    if left && right {
                        break;
                    }
                }
                if !(left && right) {
                    return Err(LanguageError::ClosureInconsistency {
                        detail: format!(
                            "factor `{}` is not two-sided extendable",
                            subst.word_string(w)
                        ),
                    });
                }
            }
        }

        // Soundness cross-check against a long fixed-point prefix: every
        // window of the prefix must already be indexed.
        let perron = subst.perron();
        let lambda = perron.value;
        let k_const = subst.length_constant(lambda);
        let source_prefix_len = (4.0 * k_const * lambda * max_len as f64).ceil() as usize;
        let prefix = subst.canonical_fixed_point_prefix(source_prefix_len)?;
        for n in 1..=max_len {
            for win in prefix.windows(n) {
                if !by_len[n].contains(win) {
                    return Err(LanguageError::ClosureInconsistency {
                        detail: format!(
                            "prefix factor `{}` missing from the closure",
                            subst.word_string(&Word::from(win))
                        ),
                    });
                }
            }
        }

        Ok(LanguageIndex {
            subst: subst.clone(),
            max_len,
            by_len,
            source_prefix_len,
            lambda,
            k_const,
        })
    }

    pub fn subst(&self) -> &Substitution {
        &self.subst
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Length of the fixed-point prefix used for the build cross-check.
    pub fn source_prefix_length(&self) -> usize {
        self.source_prefix_len
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The length constant K with |H^n(a)| <= K lambda^n.
    pub fn length_constant(&self) -> f64 {
        self.k_const
    }

    pub fn factor_sets(&self) -> &[HashSet<Word>] {
        &self.by_len
    }

    pub fn try_contains(&self, w: &[u8]) -> Result<bool, LanguageError> {
        if w.len() > self.max_len {
            return Err(LanguageError::TooDeep {
                len: w.len(),
                max_len: self.max_len,
            });
        }
        Ok(self.by_len[w.len()].contains(w))
    }

    /// Factor membership. Panics when the query is longer than the cutoff;
    /// use `try_contains` on untrusted lengths.
    pub fn contains(&self, w: &[u8]) -> bool {
        match self.try_contains(w) {
            Ok(b) => b,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_complexity(&self, n: usize) -> Result<usize, LanguageError> {
        if n > self.max_len {
            return Err(LanguageError::TooDeep {
                len: n,
                max_len: self.max_len,
            });
        }
        Ok(self.by_len[n].len())
    }

    /// The complexity p(n). Panics beyond the cutoff.
    pub fn complexity(&self, n: usize) -> usize {
        match self.try_complexity(n) {
            Ok(p) => p,
            Err(e) => panic!("{e}"),
        }
    }

    /// Factors of one length in lexicographic order of letter indices.
    pub fn factors_sorted(&self, n: usize) -> Vec<&Word> {
        let mut v: Vec<&Word> = self.by_len[n].iter().collect();
        v.sort_unstable();
        v
    }

    /// Longest prefix of `x` that is a factor, with saturation signals.
    pub fn delta_outcome(&self, x: &[u8]) -> DeltaOutcome {
        let cap = x.len().min(self.max_len);
        let mut lo = 0usize;
        let mut hi = cap;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.by_len[mid].contains(&x[..mid]) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        if lo == x.len() {
            DeltaOutcome::WholeWord
        } else if lo == self.max_len {
            DeltaOutcome::DepthExceeded
        } else {
            DeltaOutcome::Value(lo)
        }
    }

    /// Extension counts of a factor, with bilateral multiplicity and kind.
    pub fn special_profile(&self, w: &[u8]) -> Result<SpecialWordRecord, LanguageError> {
        if w.len() + 2 > self.max_len {
            return Err(LanguageError::TooDeep {
                len: w.len() + 2,
                max_len: self.max_len,
            });
        }
        if !self.by_len[w.len()].contains(w) {
            return Err(LanguageError::NotInLanguage {
                word: self.subst.word_string(&Word::from(w)),
            });
        }
        let d = self.subst.size() as u8;
        let mut buf = Word::new();
        let mut m_l = 0usize;
        let mut m_r = 0usize;
        let mut m_b = 0usize;
        for a in 0..d {
            buf.0.clear();
            buf.0.push(a);
            buf.0.extend_from_slice(w);
            if self.by_len[w.len() + 1].contains(&buf[..]) {
                m_l += 1;
            }
        }
        for b in 0..d {
            buf.0.clear();
            buf.0.extend_from_slice(w);
            buf.0.push(b);
            if self.by_len[w.len() + 1].contains(&buf[..]) {
                m_r += 1;
            }
        }
        for a in 0..d {
            for b in 0..d {
                buf.0.clear();
                buf.0.push(a);
                buf.0.extend_from_slice(w);
                buf.0.push(b);
                if self.by_len[w.len() + 2].contains(&buf[..]) {
                    m_b += 1;
                }
            }
        }
        let i = m_b as i64 - m_l as i64 - m_r as i64 + 1;
        let kind = if m_l >= 2 && m_r >= 2 {
            match i.cmp(&0) {
                std::cmp::Ordering::Less => SpecialKind::BispecialWeak,
                std::cmp::Ordering::Equal => SpecialKind::BispecialNeutral,
                std::cmp::Ordering::Greater => SpecialKind::BispecialStrong,
            }
        } else if m_l >= 2 {
            SpecialKind::LeftSpecial
        } else if m_r >= 2 {
            SpecialKind::RightSpecial
        } else {
            SpecialKind::Ordinary
        };
        Ok(SpecialWordRecord {
            word: self.subst.word_string(&Word::from(w)),
            letters: Word::from(w),
            length: w.len(),
            m_l,
            m_r,
            m_b,
            i,
            kind,
        })
    }

    /// All bispecial factors of length at most `l_max`, empty word included,
    /// ordered by length then lexicographically.
    pub fn bispecials_up_to(&self, l_max: usize) -> Result<Vec<SpecialWordRecord>, LanguageError> {
        if l_max + 2 > self.max_len {
            return Err(LanguageError::TooDeep {
                len: l_max + 2,
                max_len: self.max_len,
            });
        }
        let mut out = Vec::new();
        for n in 0..=l_max {
            for w in self.factors_sorted(n) {
                let rec = self.special_profile(w)?;
                if rec.kind.is_bispecial() {
                    out.push(rec);
                }
            }
        }
        Ok(out)
    }

    /// Whether every two-block over the alphabet is a factor.
    pub fn is_two_full(&self) -> bool {
        let d = self.subst.size();
        self.by_len[2].len() == d * d
    }

    /// Scans powers w^e of short factors to bound the power exponent of the
    /// language; `n_h` is the least exponent never attained.
    pub fn power_free_bound(&self, max_base: usize) -> Result<PowerFreeReport, LanguageError> {
        let max_base = max_base.min(self.max_len);
        let mut max_e = 0usize;
        let mut witness = Word::new();
        for len in 1..=max_base {
            for w in self.factors_sorted(len) {
                let mut e = 1usize;
                loop {
                    let next_len = (e + 1) * len;
                    if next_len > self.max_len {
                        return Err(LanguageError::PowerSearchSaturated {
                            word: self.subst.word_string(w),
                            exponent: e + 1,
                        });
                    }
                    let mut p = Word(Vec::with_capacity(next_len));
                    for _ in 0..=e {
                        p.0.extend_from_slice(w);
                    }
                    if self.by_len[next_len].contains(&p[..]) {
                        e += 1;
                    } else {
                        break;
                    }
                }
                if e > max_e {
                    max_e = e;
                    witness = (*w).clone();
                }
            }
        }
        Ok(PowerFreeReport {
            n_h: max_e + 1,
            max_exponent: max_e,
            witness: self.subst.word_string(&witness),
            max_base,
        })
    }

    /// Occurrences of `w` in the fixed-point prefix of length `horizon` and
    /// the gaps between consecutive occurrences.
    pub fn return_times(&self, w: &[u8], horizon: usize) -> Result<ReturnReport, LanguageError> {
        if w.is_empty() || !self.try_contains(w)? {
            return Err(LanguageError::NotInLanguage {
                word: self.subst.word_string(&Word::from(w)),
            });
        }
        let prefix = self.subst.canonical_fixed_point_prefix(horizon)?;
        let positions: Vec<usize> = occurrences(&prefix, w);
        if positions.len() < 2 {
            return Err(LanguageError::TooFewOccurrences {
                word: self.subst.word_string(&Word::from(w)),
                horizon,
            });
        }
        let gaps: Vec<i64> = positions
            .windows(2)
            .map(|p| p[1] as i64 - (p[0] + w.len()) as i64)
            .collect();
        let max_gap = gaps.iter().copied().max().unwrap();
        Ok(ReturnReport {
            word: self.subst.word_string(&Word::from(w)),
            horizon,
            positions,
            gaps,
            max_gap,
            linearity_constant: max_gap as f64 / w.len() as f64,
        })
    }

    /// Audits how strongly occurrences of the given (bispecial) words can
    /// overlap inside a fixed-point prefix.
    pub fn overlap_ratio_audit(
        &self,
        records: &[SpecialWordRecord],
        horizon: usize,
    ) -> Result<OverlapReport, LanguageError> {
        let prefix = self.subst.canonical_fixed_point_prefix(horizon)?;
        let mut occ: Vec<(usize, usize, usize)> = Vec::new();
        for (idx, rec) in records.iter().enumerate() {
            if rec.letters.is_empty() {
                continue;
            }
            for pos in occurrences(&prefix, &rec.letters) {
                occ.push((pos, rec.letters.len(), idx));
            }
        }
        occ.sort_unstable();
        let mut pairs_checked = 0u64;
        let mut max_ratio = 0.0f64;
        let mut witness = None;
        for i in 0..occ.len() {
            let (pos_u, len_u, idx_u) = occ[i];
            let end_u = pos_u + len_u;
            for &(pos_v, len_v, idx_v) in occ[i + 1..].iter() {
                if pos_v >= end_u {
                    break;
                }
                if pos_v == pos_u || len_v < len_u {
                    continue;
                }
                pairs_checked += 1;
                let overlap = end_u - pos_v;
                let ratio = overlap as f64 / len_u as f64;
                if ratio > max_ratio {
                    max_ratio = ratio;
                    witness = Some(OverlapWitness {
                        earlier: records[idx_u].word.clone(),
                        later: records[idx_v].word.clone(),
                        earlier_pos: pos_u,
                        later_pos: pos_v,
                        overlap,
                    });
                }
            }
        }
        Ok(OverlapReport {
            horizon,
            pairs_checked,
            max_ratio,
            witness,
        })
    }

    /// Complexity-based periodicity scan up to `bound`: a plateau
    /// p(n+1) = p(n) certifies eventual periodicity and a period word is
    /// extracted; otherwise strict growth up to the bound is reported.
    pub fn aperiodicity_check(&self, bound: usize) -> Result<AperiodicEvidence, LanguageError> {
        if bound + 1 > self.max_len {
            return Err(LanguageError::TooDeep {
                len: bound + 1,
                max_len: self.max_len,
            });
        }
        for n in 1..=bound {
            let p_n = self.by_len[n].len();
            if self.by_len[n + 1].len() == p_n {
                let len = (8 * (p_n + n + 2)).max(64);
                let w = self.subst.canonical_fixed_point_prefix(len)?;
                let half = w.len() / 2;
                for per in 1..=p_n.max(n) {
                    if w.len() < half + 2 * per {
                        break;
                    }
                    if (half..w.len() - per).all(|i| w[i] == w[i + per]) {
                        let start = half.div_ceil(per) * per;
                        let block = Word::from(&w[start..start + per]);
                        return Ok(AperiodicEvidence::CertifiedPeriodic {
                            period: self.subst.word_string(&block),
                        });
                    }
                }
                return Err(LanguageError::ClosureInconsistency {
                    detail: format!("complexity plateau at n = {n} without a visible period"),
                });
            }
        }
        Ok(AperiodicEvidence::NoPeriodicityFoundUpToBound { bound })
    }
}

/// One long bispecial word matched to its seed: word = H^n(seed).
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureEntry {
    pub word: String,
    pub length: usize,
    pub n: u32,
    pub seed: String,
}

/// The lengths of the matched words in one seed family, fitted as c * lambda^n.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LengthCluster {
    pub seed: String,
    pub count: usize,
    /// Mean of length / lambda^n over the family.
    pub c: f64,
    /// (max - min) / c of that ratio within the family.
    pub spread: f64,
    /// Contraction rate of the fit residuals, from a log-linear regression;
    /// 0 when the fit is exact.
    pub theta: f64,
}

/// Bispecial taxonomy together with the structure theorem bookkeeping: every
/// bispecial longer than the recognizability length should be H^n of a seed.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BispecialCatalog {
    pub l_h: usize,
    pub records: Vec<SpecialWordRecord>,
    pub seed_set: Vec<SpecialWordRecord>,
    pub structure_map: Vec<StructureEntry>,
    pub violations: Vec<String>,
    pub length_clusters: Vec<LengthCluster>,
}

impl LanguageIndex {
    /// Matches every bispecial longer than `l_h` against the forward orbits
    /// H^n(v) of the short bispecial seeds (length <= l_h). Unmatched words
    /// are reported as violations, not errors.
    pub fn bispecial_structure_check(
        &self,
        records: Vec<SpecialWordRecord>,
        l_h: usize,
    ) -> BispecialCatalog {
        let seed_set: Vec<SpecialWordRecord> = records
            .iter()
            .filter(|r| r.length <= l_h)
            .cloned()
            .collect();
        let bound = records.iter().map(|r| r.length).max().unwrap_or(0);
        let mut orbit: HashMap<Word, (u32, usize)> = HashMap::new();
        for (idx, seed) in seed_set.iter().enumerate() {
            if seed.letters.is_empty() {
                continue;
            }
            let mut w = seed.letters.clone();
            let mut n = 0u32;
            while n < 64 {
                let (next, truncated) = self.subst.apply_capped(&w, bound + 1);
                if truncated || next.len() > bound {
                    break;
                }
                w = next;
                n += 1;
                orbit.entry(w.clone()).or_insert((n, idx));
            }
        }
        let mut structure_map = Vec::new();
        let mut violations = Vec::new();
        let mut families: HashMap<usize, Vec<(u32, usize)>> = HashMap::new();
        for rec in records.iter().filter(|r| r.length > l_h) {
            match orbit.get(&rec.letters) {
                Some(&(n, idx)) => {
                    structure_map.push(StructureEntry {
                        word: rec.word.clone(),
                        length: rec.length,
                        n,
                        seed: seed_set[idx].word.clone(),
                    });
                    families.entry(idx).or_default().push((n, rec.length));
                }
                None => violations.push(rec.word.clone()),
            }
        }
        let mut length_clusters = Vec::new();
        let mut family_ids: Vec<usize> = families.keys().copied().collect();
        family_ids.sort_unstable();
        for idx in family_ids {
            let pts = &families[&idx];
            let ratios: Vec<f64> = pts
                .iter()
                .map(|&(n, len)| len as f64 / self.lambda.powi(n as i32))
                .collect();
            let c = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let spread = if c > 0.0 { (hi - lo) / c } else { 0.0 };
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &(n, len) in pts {
                let residual = (len as f64 - c * self.lambda.powi(n as i32)).abs();
                if residual > 1e-12 {
                    xs.push(n as f64);
                    ys.push(residual.ln());
                }
            }
            let theta = if xs.len() >= 2 {
                let mx = xs.iter().sum::<f64>() / xs.len() as f64;
                let my = ys.iter().sum::<f64>() / ys.len() as f64;
                let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
                let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
                if sxx > 0.0 {
                    (sxy / sxx).exp()
                } else {
                    0.0
                }
            } else {
                0.0
            };
            length_clusters.push(LengthCluster {
                seed: seed_set[idx].word.clone(),
                count: pts.len(),
                c,
                spread,
                theta,
            });
        }
        BispecialCatalog {
            l_h,
            records,
            seed_set,
            structure_map,
            violations,
            length_clusters,
        }
    }
}

/// Distance on the subshift: d(x, y) = D^(-c) with c the length of the
/// longest common prefix.
pub fn sequence_distance(alphabet_size: usize, x: &[u8], y: &[u8]) -> f64 {
    let c = x.iter().zip(y.iter()).take_while(|(a, b)| a == b).count();
    if c == x.len() && c == y.len() {
        0.0
    } else {
        (alphabet_size as f64).powi(-(c.min(i32::MAX as usize) as i32))
    }
}

/// All start positions of `w` in `text`, naively.
pub fn occurrences(text: &[u8], w: &[u8]) -> Vec<usize> {
    if w.is_empty() || w.len() > text.len() {
        return Vec::new();
    }
    (0..=text.len() - w.len())
        .filter(|&i| &text[i..i + w.len()] == w)
        .collect()
}

/// Brute-force factor sets read off a fixed-point prefix. Always a subset of
/// the true language; equal to it when the prefix is long enough.
pub fn brute_force_factor_sets(
    subst: &Substitution,
    max_len: usize,
    prefix_len: usize,
) -> Result<Vec<HashSet<Word>>, SubstError> {
    let prefix = subst.canonical_fixed_point_prefix(prefix_len)?;
    let mut by_len: Vec<HashSet<Word>> = vec![HashSet::new(); max_len + 1];
    by_len[0].insert(Word::new());
    for n in 1..=max_len {
        for win in prefix.windows(n) {
            if !by_len[n].contains(win) {
                by_len[n].insert(Word::from(win));
            }
        }
    }
    Ok(by_len)
}
