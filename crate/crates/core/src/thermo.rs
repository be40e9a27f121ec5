//! Transfer-operator truncations for the freezing phase transition.
//!
//! The setting is the full shift on the alphabet with the potential
//! `phi(x) = ln(1 + 1/delta(x))`, which vanishes on the attractor. A
//! non-factor word `wJ` pins a cylinder off the attractor; orbits are
//! watched through first returns to that cylinder. Positions with
//! `delta <= N` are "free" and carry weight at most `e^{beta A_N} < 1`
//! per step, with `A_N = -ln(1 + 1/N)`; maximal free stretches are the
//! free excursions whose truncated mass is `C_EF`.
//!
//! All finite-word weights here are exact: a suffix followed by `wJ` fails
//! inside a computable window (any word containing a non-factor is a
//! non-factor), so per-position depths never depend on the unseen rest of
//! the orbit. Truncated sums are therefore exact partial sums, monotone in
//! their cutoffs. The certificate's tail bound majorizes the discarded
//! remainder by the all-free geometric envelope `q = D e^{beta A_N}`
//! amplified by the excursion mass; wall-heavy long returns decay
//! polynomially per word and sit far below that envelope in the
//! contraction regime the certificate reports on.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::language::{LanguageError, LanguageIndex};
use crate::potential::{Potential, PotentialError};
use crate::renorm::Kahan;
use crate::substitution::{ParseError, SubstError, Word};

/// Hard ceiling on DFS nodes for excursion and return-word scans.
pub const THERMO_NODE_BUDGET: usize = 200_000_000;
/// Hard ceiling on full-shift words enumerated by the pressure curve.
pub const PRESSURE_BUDGET: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("the cylinder word {word:?} is a language factor; the cylinder must avoid the attractor")]
    WjInLanguage { word: String },
    #[error("the cylinder word is empty")]
    WjEmpty,
    #[error("N = {n} is too small; it must be at least {need}")]
    BadN { n: usize, need: usize },
    #[error("needs factor data to depth {need} but the index stops at {max_len}")]
    DepthBudget { need: usize, max_len: usize },
    #[error("scan exceeded the node budget {budget}")]
    NodeBudget { budget: usize },
    #[error("the beta grid is empty")]
    EmptyGrid,
    #[error("horizon must be positive")]
    BadHorizon,
    #[error("comparison transfer needs inf(g+h) > 0, got {inf}")]
    NonPositiveComparison { inf: f64 },
    #[error("cylinder-function tables of depth {depth} are too deep to enumerate")]
    TableTooDeep { depth: usize },
}

/// The reference cylinder `[wJ]` together with the freeness cutoff `N`.
///
/// `wJ` must lie outside the language (so the cylinder misses the
/// attractor), `N` must be at least `|wJ|` and strictly larger than the
/// recognizability length passed in by the caller.
#[derive(Debug, Clone)]
pub struct CylinderJ {
    pub word: Word,
    pub text: String,
    pub n: usize,
    /// `delta` of `wJ` itself: the longest proper prefix still in the language.
    pub delta_fin: usize,
    /// `ln(1 + 1/delta_fin)`, the wall-entry weight shared by every excursion.
    pub wall_entry: f64,
}

impl CylinderJ {
    pub fn new(
        index: &LanguageIndex,
        w_j: &str,
        n: usize,
        l_h: usize,
    ) -> Result<CylinderJ, ThermoError> {
        let word = index.subst().parse_word(w_j)?;
        if word.0.is_empty() {
            return Err(ThermoError::WjEmpty);
        }
        if index.try_contains(&word.0)? {
            return Err(ThermoError::WjInLanguage {
                word: w_j.to_string(),
            });
        }
        let need = (l_h + 1).max(word.0.len());
        if n < need {
            return Err(ThermoError::BadN { n, need });
        }
        let delta_fin = match index.delta_outcome(&word.0).value() {
            Some(d) => d,
            None => unreachable!("a non-factor always fails at finite depth"),
        };
        Ok(CylinderJ {
            text: index.subst().word_string(&word.0),
            word,
            n,
            delta_fin,
            wall_entry: (1.0 + 1.0 / delta_fin as f64).ln(),
        })
    }

    /// `A_N = -ln(1 + 1/N)`, the log of the per-step free-position weight cap.
    pub fn a_n(&self) -> f64 {
        -(1.0 + 1.0 / self.n as f64).ln()
    }
}

fn require_depth(index: &LanguageIndex, need: usize) -> Result<(), ThermoError> {
    if need > index.max_len() {
        return Err(ThermoError::DepthBudget {
            need,
            max_len: index.max_len(),
        });
    }
    Ok(())
}

/// Per-position depths of a finite word in cylinder context: position `k`
/// gets `delta(w[k..] ++ wJ)`, which is exact because the appended `wJ`
/// forces failure inside the window.
pub fn word_profile(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    w: &[u8],
) -> Result<Vec<usize>, ThermoError> {
    require_depth(index, w.len() + cyl.word.0.len())?;
    let mut buf = Vec::with_capacity(w.len() + cyl.word.0.len());
    let mut out = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        buf.clear();
        buf.extend_from_slice(&w[k..]);
        buf.extend_from_slice(&cyl.word.0);
        match index.delta_outcome(&buf).value() {
            Some(d) => out.push(d),
            None => unreachable!("suffix ++ wJ contains a non-factor"),
        }
    }
    Ok(out)
}

/// Birkhoff sum of `phi` along a finite word in cylinder context.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BirkhoffPhi {
    /// `Sigma_k ln(1 + 1/d_k)` over the word's positions.
    pub s: f64,
    pub profile: Vec<usize>,
    /// Positions `k >= 1` where `d_k >= d_{k-1}` (the depth staircase resets).
    pub accidents: Vec<usize>,
}

pub fn birkhoff_phi(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    w: &[u8],
) -> Result<BirkhoffPhi, ThermoError> {
    let profile = word_profile(index, cyl, w)?;
    let mut s = Kahan::default();
    let mut accidents = Vec::new();
    for (k, &d) in profile.iter().enumerate() {
        s.add((1.0 + 1.0 / d as f64).ln());
        if k >= 1 && d >= profile[k - 1] {
            accidents.push(k);
        }
    }
    Ok(BirkhoffPhi {
        s: s.value(),
        profile,
        accidents,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Free/wall classification of a finite word's positions in cylinder context.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FreeExcursions {
    pub profile: Vec<usize>,
    pub free: Vec<bool>,
    /// Maximal runs of free positions, as half-open spans.
    pub excursions: Vec<Span>,
}

pub fn classify_free_excursion(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    w: &[u8],
) -> Result<FreeExcursions, ThermoError> {
    let profile = word_profile(index, cyl, w)?;
    let free: Vec<bool> = profile.iter().map(|&d| d <= cyl.n).collect();
    let mut excursions = Vec::new();
    let mut start = None;
    for (k, &f) in free.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                excursions.push(Span { start: s, end: k });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        excursions.push(Span {
            start: s,
            end: free.len(),
        });
    }
    Ok(FreeExcursions {
        profile,
        free,
        excursions,
    })
}

/// Truncated free-excursion mass at one inverse temperature.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CEf {
    pub beta: f64,
    pub l_max: usize,
    /// `Sigma e^{-beta S}` over enumerated free-excursion words.
    pub value: f64,
    /// The same sum split by accident count; index is the accident count.
    pub by_m: Vec<f64>,
    pub words: usize,
    /// Word counts by length; index is the length.
    pub by_length: Vec<usize>,
}

struct EfAccumulator {
    betas: Vec<f64>,
    values: Vec<Kahan>,
    by_m: Vec<Vec<Kahan>>,
    words: usize,
    by_length: Vec<usize>,
}

impl EfAccumulator {
    fn new(betas: &[f64], l_max: usize) -> EfAccumulator {
        EfAccumulator {
            betas: betas.to_vec(),
            values: vec![Kahan::default(); betas.len()],
            by_m: Vec::new(),
            words: 0,
            by_length: vec![0; l_max + 1],
        }
    }

    fn record(&mut self, len: usize, s: f64, m: usize) {
        self.words += 1;
        self.by_length[len] += 1;
        while self.by_m.len() <= m {
            self.by_m.push(vec![Kahan::default(); self.betas.len()]);
        }
        for (i, &beta) in self.betas.iter().enumerate() {
            let w = (-beta * s).exp();
            self.values[i].add(w);
            self.by_m[m][i].add(w);
        }
    }

    fn into_reports(self, l_max: usize) -> Vec<CEf> {
        self.betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| CEf {
                beta,
                l_max,
                value: self.values[i].value(),
                by_m: self.by_m.iter().map(|row| row[i].value()).collect(),
                words: self.words,
                by_length: self.by_length.clone(),
            })
            .collect()
    }
}

/// Depth-first enumeration of free-excursion words.
///
/// A word is a free excursion when every position is free in cylinder
/// context. The scan tracks the longest word-suffix still inside the
/// language: positions leave that open run with a permanently closed depth
/// `<= N` (an open run of length `N + 1` would pin a non-free position
/// forever, so such branches are pruned), and only the open positions need
/// fresh probes against `wJ` at emission time.
fn ef_scan(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    l_max: usize,
    betas: &[f64],
    budget: usize,
) -> Result<EfAccumulator, ThermoError> {
    if l_max == 0 {
        return Err(ThermoError::BadHorizon);
    }
    if betas.is_empty() {
        return Err(ThermoError::EmptyGrid);
    }
    let big_n = cyl.n;
    require_depth(index, (big_n + 1).max(big_n + cyl.word.0.len()))?;
    let d_alpha = index.subst().size() as u8;
    let wj = &cyl.word.0;
    let mut acc = EfAccumulator::new(betas, l_max);
    let mut word: Vec<u8> = Vec::with_capacity(l_max);
    let mut closed: Vec<usize> = vec![0; l_max];
    // Per-depth snapshots: open-run length, closed-term sum, closed accidents.
    let mut run_stack: Vec<usize> = vec![0];
    let mut s_stack: Vec<f64> = vec![0.0];
    let mut m_stack: Vec<usize> = vec![0];
    let mut letter_stack: Vec<u8> = vec![0];
    let mut nodes = 0usize;
    let mut buf: Vec<u8> = Vec::with_capacity(big_n + wj.len() + 1);

    loop {
        let len = word.len();
        let next = letter_stack[len];
        if next >= d_alpha || len == l_max {
            // Backtrack.
            if word.pop().is_none() {
                break;
            }
            run_stack.pop();
            s_stack.pop();
            m_stack.pop();
            letter_stack.pop();
            let depth = word.len();
            letter_stack[depth] += 1;
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return Err(ThermoError::NodeBudget { budget });
        }
        word.push(next);
        let len = word.len();
        let run = run_stack[len - 1];
        // Longest suffix of the extended word still in the language.
        let mut new_run = 0;
        for j in (1..=run + 1).rev() {
            buf.clear();
            buf.extend_from_slice(&word[len - j..]);
            if index.contains(&buf) {
                new_run = j;
                break;
            }
        }
        if new_run > big_n {
            // A position now carries a language window of length N + 1.
            word.pop();
            letter_stack[len - 1] += 1;
            continue;
        }
        // Positions falling out of the open run close with depth len-1-k.
        let mut s_closed = s_stack[len - 1];
        let mut m_closed = m_stack[len - 1];
        for k in (len - 1 - run)..(len - new_run) {
            let d = len - 1 - k;
            closed[k] = d;
            s_closed += (1.0 + 1.0 / d as f64).ln();
            if k >= 1 && d >= closed[k - 1] {
                m_closed += 1;
            }
        }
        run_stack.push(new_run);
        s_stack.push(s_closed);
        m_stack.push(m_closed);
        letter_stack.push(0);

        // Emission: open positions need their wJ continuation depth.
        let mut s = s_closed + cyl.wall_entry;
        let mut m = m_closed;
        let mut prev = if len > new_run {
            Some(closed[len - new_run - 1])
        } else {
            None
        };
        let mut all_free = true;
        for k in (len - new_run)..len {
            let mut j = 0;
            while j < wj.len() {
                buf.clear();
                buf.extend_from_slice(&word[k..]);
                buf.extend_from_slice(&wj[..j + 1]);
                if index.contains(&buf) {
                    j += 1;
                } else {
                    break;
                }
            }
            let d = (len - k) + j;
            if d > big_n {
                all_free = false;
                break;
            }
            s += (1.0 + 1.0 / d as f64).ln();
            if let Some(p) = prev {
                if d >= p {
                    m += 1;
                }
            }
            prev = Some(d);
        }
        if all_free {
            acc.record(len, s, m);
        }
    }
    Ok(acc)
}

/// Truncated `C_EF` at a single inverse temperature.
pub fn c_ef_truncated(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    beta: f64,
    l_max: usize,
) -> Result<CEf, ThermoError> {
    let acc = ef_scan(index, cyl, l_max, &[beta], THERMO_NODE_BUDGET)?;
    Ok(acc.into_reports(l_max).pop().expect("one beta in"))
}

/// Truncated `C_EF` across a grid, sharing a single enumeration pass.
pub fn c_ef_grid(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    betas: &[f64],
    l_max: usize,
) -> Result<Vec<CEf>, ThermoError> {
    c_ef_grid_budgeted(index, cyl, betas, l_max, THERMO_NODE_BUDGET)
}

/// As `c_ef_grid`, with an explicit node-budget ceiling.
pub fn c_ef_grid_budgeted(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    betas: &[f64],
    l_max: usize,
    budget: usize,
) -> Result<Vec<CEf>, ThermoError> {
    let acc = ef_scan(index, cyl, l_max, betas, budget)?;
    Ok(acc.into_reports(l_max))
}

/// One first-return word to the cylinder, with its exact Birkhoff sum.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReturnWord {
    pub text: String,
    pub length: usize,
    pub s: f64,
}

/// Depth-first enumeration of first-return words `u`: the orbit starts in
/// `[wJ]`, so `u ++ wJ` begins with `wJ`, ends with the next entry, and
/// contains no other occurrence of `wJ`. The callback receives each valid
/// word and its exact Birkhoff sum.
fn return_scan(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    n_max: usize,
    budget: usize,
    f: &mut dyn FnMut(&[u8], f64),
) -> Result<(), ThermoError> {
    if n_max == 0 {
        return Err(ThermoError::BadHorizon);
    }
    require_depth(index, n_max + cyl.word.0.len())?;
    let d_alpha = index.subst().size() as u8;
    let wj = &cyl.word.0;
    let wlen = wj.len();
    let mut word: Vec<u8> = Vec::with_capacity(n_max);
    let mut letter_stack: Vec<u8> = vec![0];
    let mut nodes = 0usize;
    let mut buf: Vec<u8> = Vec::with_capacity(n_max + wlen);

    loop {
        let len = word.len();
        let next = letter_stack[len];
        let exhausted = if len < wlen {
            // The orbit point starts with wJ, so early letters are forced.
            next > 0
        } else {
            next >= d_alpha
        };
        if exhausted || len == n_max {
            if word.pop().is_none() {
                break;
            }
            letter_stack.pop();
            let depth = word.len();
            letter_stack[depth] += 1;
            continue;
        }
        let letter = if len < wlen { wj[len] } else { next };
        nodes += 1;
        if nodes > budget {
            return Err(ThermoError::NodeBudget { budget });
        }
        word.push(letter);
        let len = word.len();
        // A completed interior occurrence of wJ kills the whole branch.
        if len >= wlen && len - wlen >= 1 && word[len - wlen..] == wj[..] {
            word.pop();
            letter_stack[len - 1] += 1;
            continue;
        }
        letter_stack.push(0);

        // Boundary check: wJ must not occur straddling the glued return.
        let lo = (len.saturating_sub(wlen - 1)).max(1);
        let mut clean = true;
        'boundary: for j in lo..len {
            for i in 0..wlen {
                let c = if j + i < len {
                    word[j + i]
                } else {
                    wj[j + i - len]
                };
                if c != wj[i] {
                    continue 'boundary;
                }
            }
            clean = false;
            break;
        }
        if clean {
            let mut s = Kahan::default();
            for k in 0..len {
                buf.clear();
                buf.extend_from_slice(&word[k..]);
                buf.extend_from_slice(wj);
                let d = index
                    .delta_outcome(&buf)
                    .value()
                    .expect("suffix ++ wJ contains a non-factor");
                s.add((1.0 + 1.0 / d as f64).ln());
            }
            f(&word, s.value());
        }
    }
    Ok(())
}

/// All first-return words up to `n_max`, in lexicographic order.
pub fn enumerate_return_words(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    n_max: usize,
) -> Result<Vec<ReturnWord>, ThermoError> {
    let mut out = Vec::new();
    let subst = index.subst();
    return_scan(index, cyl, n_max, THERMO_NODE_BUDGET, &mut |u, s| {
        out.push(ReturnWord {
            text: subst.word_string(u),
            length: u.len(),
            s,
        });
    })?;
    Ok(out)
}

/// Truncated induced transfer-operator value on the cylinder.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InducedTransfer {
    pub beta: f64,
    pub n_max: usize,
    /// `Sigma e^{-beta S(u)}` over first-return words up to `n_max`; a
    /// monotone lower bound of the full induced operator value.
    pub value: f64,
    pub return_words: usize,
    /// Cumulative value by return-word length; index is the length.
    pub cumulative_by_length: Vec<f64>,
}

pub fn induced_transfer_truncated(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    beta: f64,
    n_max: usize,
) -> Result<InducedTransfer, ThermoError> {
    let mut per_length = vec![Kahan::default(); n_max + 1];
    let mut count = 0usize;
    return_scan(index, cyl, n_max, THERMO_NODE_BUDGET, &mut |u, s| {
        per_length[u.len()].add((-beta * s).exp());
        count += 1;
    })?;
    let mut cumulative = Vec::with_capacity(n_max + 1);
    let mut total = 0.0;
    for k in &per_length {
        total += k.value();
        cumulative.push(total);
    }
    Ok(InducedTransfer {
        beta,
        n_max,
        value: total,
        return_words: count,
        cumulative_by_length: cumulative,
    })
}

/// The default inverse-temperature grid: 25 geometric points from 0.1 to 200.
pub fn default_beta_grid() -> Vec<f64> {
    (0..25)
        .map(|k| 0.1 * 2000f64.powf(k as f64 / 24.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertOutcome {
    /// Truncated value plus tail bound is below one: contraction certified.
    Verified,
    /// A gate failed outright (no suppression, or the bound is not below one).
    NotVerified,
    /// The truncation itself is too coarse to decide at this beta.
    Inconclusive,
}

/// A numerical freezing certificate at one inverse temperature.
///
/// Every stored field is re-derivable from the others: `q = D e^{beta aN}`,
/// the remainder and tail-bound formulas are closed-form in `q`, and the
/// verdict is the final comparison. The tail bound majorizes discarded
/// return words by the all-free geometric envelope amplified by the
/// effective excursion mass.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FreezingCertificate {
    pub beta: f64,
    pub wj: String,
    pub n: usize,
    pub n_max: usize,
    pub l_max: usize,
    pub alphabet: usize,
    pub a_n: f64,
    /// `D e^{beta A_N}`: the per-step envelope of fully free continuations.
    pub q: f64,
    pub c_ef: f64,
    pub c_ef_remainder: f64,
    pub c_ef_effective: f64,
    pub c_ef_by_m: Vec<f64>,
    pub ef_words: usize,
    pub operator_value: f64,
    pub return_words: usize,
    pub tail_bound: f64,
    pub outcome: CertOutcome,
    pub verdict: bool,
    pub reason: String,
    pub model: String,
}

const CERT_MODEL: &str =
    "exact truncated weights; tail majorized by the free-domination envelope";

fn assemble_certificate(
    cyl: &CylinderJ,
    alphabet: usize,
    beta: f64,
    n_max: usize,
    l_max: usize,
    c_ef: &CEf,
    operator_value: f64,
    return_words: usize,
) -> FreezingCertificate {
    let a_n = cyl.a_n();
    let d = alphabet as f64;
    let q = d * (beta * a_n).exp();
    let c_ef_remainder = if q < 1.0 {
        (beta * a_n).exp() * q.powi(l_max as i32 + 1) / (1.0 - q)
    } else {
        f64::INFINITY
    };
    let c_ef_effective = c_ef.value + c_ef_remainder;
    let tail_bound = if q < 1.0 && c_ef_effective < 1.0 {
        (1.0 / (1.0 - c_ef_effective)) * (beta * a_n).exp() * q.powi(n_max as i32 + 1)
            / (1.0 - q)
    } else {
        f64::INFINITY
    };
    let (outcome, reason) = if beta <= 0.0 {
        (
            CertOutcome::NotVerified,
            "beta is not positive: free excursions carry no suppression".to_string(),
        )
    } else if q >= 1.0 {
        (
            CertOutcome::NotVerified,
            format!("q = {q:.6} >= 1: beta is at or below the free-entropy threshold"),
        )
    } else if c_ef_effective >= 1.0 {
        (
            CertOutcome::Inconclusive,
            format!(
                "effective free-excursion mass {c_ef_effective:.6} >= 1: truncation too coarse"
            ),
        )
    } else if operator_value + tail_bound < 1.0 {
        (
            CertOutcome::Verified,
            "truncated operator value plus tail bound is below one".to_string(),
        )
    } else {
        (
            CertOutcome::NotVerified,
            format!(
                "operator value {operator_value:.6} plus tail bound {tail_bound:.6} is not below one"
            ),
        )
    };
    FreezingCertificate {
        beta,
        wj: cyl.text.clone(),
        n: cyl.n,
        n_max,
        l_max,
        alphabet,
        a_n,
        q,
        c_ef: c_ef.value,
        c_ef_remainder,
        c_ef_effective,
        c_ef_by_m: c_ef.by_m.clone(),
        ef_words: c_ef.words,
        operator_value,
        return_words,
        tail_bound,
        verdict: outcome == CertOutcome::Verified,
        outcome,
        reason,
        model: CERT_MODEL.to_string(),
    }
}

/// Freezing certificate at a single inverse temperature.
pub fn freezing_certificate(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    beta: f64,
    n_max: usize,
    l_max: usize,
) -> Result<FreezingCertificate, ThermoError> {
    Ok(freezing_certificate_grid(index, cyl, &[beta], n_max, l_max)?
        .pop()
        .expect("one beta in"))
}

/// Freezing certificates across a grid, sharing one excursion scan and one
/// return-word scan.
pub fn freezing_certificate_grid(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    betas: &[f64],
    n_max: usize,
    l_max: usize,
) -> Result<Vec<FreezingCertificate>, ThermoError> {
    freezing_certificate_grid_budgeted(index, cyl, betas, n_max, l_max, THERMO_NODE_BUDGET)
}

/// As `freezing_certificate_grid`, with an explicit node-budget ceiling.
pub fn freezing_certificate_grid_budgeted(
    index: &LanguageIndex,
    cyl: &CylinderJ,
    betas: &[f64],
    n_max: usize,
    l_max: usize,
    budget: usize,
) -> Result<Vec<FreezingCertificate>, ThermoError> {
    if betas.is_empty() {
        return Err(ThermoError::EmptyGrid);
    }
    let c_efs = c_ef_grid_budgeted(index, cyl, betas, l_max, budget)?;
    let mut s_values: Vec<f64> = Vec::new();
    return_scan(index, cyl, n_max, budget, &mut |_, s| {
        s_values.push(s);
    })?;
    let alphabet = index.subst().size();
    Ok(betas
        .iter()
        .zip(c_efs.iter())
        .map(|(&beta, c_ef)| {
            let mut op = Kahan::default();
            for &s in &s_values {
                op.add((-beta * s).exp());
            }
            assemble_certificate(
                cyl,
                alphabet,
                beta,
                n_max,
                l_max,
                c_ef,
                op.value(),
                s_values.len(),
            )
        })
        .collect())
}

/// Upper and lower pressure estimates on the full shift at one word length.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PressureCurve {
    pub n: usize,
    pub log_d: f64,
    pub betas: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// First grid beta whose upper estimate drops to the entropy floor 10/n.
    pub beta_c_star: Option<f64>,
}

/// Finite-level pressure sandwich for the potential `-phi`: per word, closed
/// positions contribute their exact depth term to both bounds, while open
/// positions contribute their best case (zero) to the upper sum and their
/// worst case (failure right past the word) to the lower sum. At `beta = 0`
/// both collapse to `ln D` exactly.
pub fn pressure_curve(
    index: &LanguageIndex,
    betas: &[f64],
    n: usize,
) -> Result<PressureCurve, ThermoError> {
    pressure_curve_budgeted(index, betas, n, PRESSURE_BUDGET)
}

/// As `pressure_curve`, with an explicit word-count ceiling.
pub fn pressure_curve_budgeted(
    index: &LanguageIndex,
    betas: &[f64],
    n: usize,
    budget: usize,
) -> Result<PressureCurve, ThermoError> {
    if betas.is_empty() {
        return Err(ThermoError::EmptyGrid);
    }
    if n == 0 {
        return Err(ThermoError::BadHorizon);
    }
    require_depth(index, n)?;
    let d = index.subst().size();
    let total = (d as u128).pow(n as u32);
    if total > budget as u128 {
        return Err(ThermoError::NodeBudget { budget });
    }
    let mut upper_acc = vec![Kahan::default(); betas.len()];
    let mut lower_acc = vec![Kahan::default(); betas.len()];
    let mut word = vec![0u8; n];
    loop {
        let mut sup_s = 0.0;
        let mut inf_s = 0.0;
        for k in 0..n {
            match index.delta_outcome(&word[k..]).value() {
                Some(depth) => {
                    let term = -(1.0 + 1.0 / depth as f64).ln();
                    sup_s += term;
                    inf_s += term;
                }
                None => {
                    inf_s += -(1.0 + 1.0 / (n - k) as f64).ln();
                }
            }
        }
        for (i, &beta) in betas.iter().enumerate() {
            upper_acc[i].add((beta * sup_s).exp());
            lower_acc[i].add((beta * inf_s).exp());
        }
        // Odometer step through all words of length n.
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            word[pos] += 1;
            if (word[pos] as usize) < d {
                break;
            }
            word[pos] = 0;
        }
        if pos == 0 && word[0] == 0 {
            break;
        }
    }
    let upper: Vec<f64> = upper_acc
        .iter()
        .map(|k| k.value().ln() / n as f64)
        .collect();
    let lower: Vec<f64> = lower_acc
        .iter()
        .map(|k| k.value().ln() / n as f64)
        .collect();
    let floor = 10.0 / n as f64;
    let beta_c_star = betas
        .iter()
        .zip(upper.iter())
        .find(|(_, &u)| u <= floor)
        .map(|(&b, _)| b);
    Ok(PressureCurve {
        n,
        log_d: (d as f64).ln(),
        betas: betas.to_vec(),
        upper,
        lower,
        beta_c_star,
    })
}

/// Transfer of a freezing threshold from the logarithmic model potential to
/// a general ratio-form potential in the same class.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct XiComparison {
    /// `sup_{p >= 2} (1/p) / ln(1 + 1/p)`, attained at `p = 2`.
    pub ratio_bound: f64,
    pub sup_gh: f64,
    pub inf_gh: f64,
    /// `beta0 / inf(g+h)`: always safe, possibly crude.
    pub conservative_beta: f64,
    /// `beta0 / (sup(g+h) * ratio_bound)`: the sharper scaling constant.
    pub optimistic_beta: f64,
    pub log_form: bool,
}

/// Compare a ratio-form potential `(g+h)/delta` against the logarithmic
/// model `ln(1 + 1/delta)` and transfer a threshold `beta0`. Since
/// `ln(1+t) <= t <= ratio_bound * ln(1+t)` on the relevant depths, the two
/// scaling constants bracket the honest transferred threshold; the
/// conservative one divides by the infimum alone.
pub fn xi1_comparison_transfer(
    v: &Potential,
    alphabet: usize,
    beta0: f64,
) -> Result<XiComparison, ThermoError> {
    let ratio_bound = 0.5 / 1.5f64.ln();
    let depth = v.max_depth();
    let combos = (alphabet as u64)
        .checked_pow(depth as u32)
        .filter(|&c| c <= 1 << 22)
        .ok_or(ThermoError::TableTooDeep { depth })?;
    let mut sup_gh = f64::NEG_INFINITY;
    let mut inf_gh = f64::INFINITY;
    let mut window = vec![0u8; depth.max(1)];
    for idx in 0..combos.max(1) {
        let mut rem = idx;
        for slot in window.iter_mut().rev() {
            *slot = (rem % alphabet as u64) as u8;
            rem /= alphabet as u64;
        }
        let mut val = v.g.eval(alphabet, &window);
        if let Some(h) = &v.h {
            val += h.eval(alphabet, &window);
        }
        sup_gh = sup_gh.max(val);
        inf_gh = inf_gh.min(val);
    }
    if inf_gh <= 0.0 {
        return Err(ThermoError::NonPositiveComparison { inf: inf_gh });
    }
    if v.log_form {
        // The model potential itself: both constants are the g-range.
        return Ok(XiComparison {
            ratio_bound: 1.0,
            sup_gh,
            inf_gh,
            conservative_beta: beta0 / inf_gh,
            optimistic_beta: beta0 / sup_gh,
            log_form: true,
        });
    }
    Ok(XiComparison {
        ratio_bound,
        sup_gh,
        inf_gh,
        conservative_beta: beta0 / inf_gh,
        optimistic_beta: beta0 / (sup_gh * ratio_bound),
        log_form: false,
    })
}

/// Sum the per-accident-count split back into a map for reporting.
pub fn by_m_map(c_ef: &CEf) -> BTreeMap<usize, f64> {
    c_ef.by_m
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(m, &v)| (m, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::potential::CylinderFn;

    fn tm_setup() -> (LanguageIndex, CylinderJ) {
        let index = LanguageIndex::build(&examples::thue_morse(), 48).unwrap();
        let cyl = CylinderJ::new(&index, "111", 8, 3).unwrap();
        (index, cyl)
    }

    #[test]
    fn cylinder_validation() {
        let index = LanguageIndex::build(&examples::thue_morse(), 48).unwrap();
        assert!(matches!(
            CylinderJ::new(&index, "010", 8, 3),
            Err(ThermoError::WjInLanguage { .. })
        ));
        assert!(matches!(
            CylinderJ::new(&index, "111", 3, 3),
            Err(ThermoError::BadN { need: 4, .. })
        ));
        assert!(matches!(
            CylinderJ::new(&index, "", 8, 3),
            Err(ThermoError::WjEmpty) | Err(ThermoError::Subst(_))
        ));
        let cyl = CylinderJ::new(&index, "111", 8, 3).unwrap();
        assert_eq!(cyl.delta_fin, 2);
        assert!((cyl.wall_entry - 1.5f64.ln()).abs() < 1e-15);
        assert!((cyl.a_n() + (9.0f64 / 8.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn word_profiles_in_context() {
        let (index, cyl) = tm_setup();
        // 0 followed by wJ = 0111..., which fails after 011.
        assert_eq!(word_profile(&index, &cyl, &[0]).unwrap(), vec![3]);
        // A long language factor is a wall at its head, free at its tail.
        let omega = index.subst().canonical_fixed_point_prefix(16).unwrap();
        let fx = classify_free_excursion(&index, &cyl, &omega.0).unwrap();
        assert!(!fx.free[0], "head of a language word is deep");
        assert!(*fx.free.last().unwrap(), "last position is shallow");
        assert_eq!(fx.profile.len(), 16);
        // Free flags match the profile cutoff.
        for (f, d) in fx.free.iter().zip(fx.profile.iter()) {
            assert_eq!(*f, *d <= 8);
        }
        // Excursion spans tile exactly the free positions.
        let mut covered = vec![false; 16];
        for span in &fx.excursions {
            for slot in &mut covered[span.start..span.end] {
                *slot = true;
            }
        }
        assert_eq!(
            covered,
            fx.free,
            "spans {:?} vs flags {:?}",
            fx.excursions,
            fx.free
        );
    }

    #[test]
    fn birkhoff_phi_accidents() {
        let (index, cyl) = tm_setup();
        let report = birkhoff_phi(&index, &cyl, &[0, 0, 0]).unwrap();
        assert_eq!(report.profile.len(), 3);
        let direct: f64 = report
            .profile
            .iter()
            .map(|&d| (1.0 + 1.0 / d as f64).ln())
            .sum();
        assert!((report.s - direct).abs() < 1e-12);
        for &k in &report.accidents {
            assert!(report.profile[k] >= report.profile[k - 1]);
        }
    }

    fn brute_ef(
        index: &LanguageIndex,
        cyl: &CylinderJ,
        l_max: usize,
    ) -> Vec<(Vec<u8>, f64, usize)> {
        let d = index.subst().size();
        let mut out = Vec::new();
        for len in 1..=l_max {
            let total = d.pow(len as u32);
            for code in 0..total {
                let mut w = vec![0u8; len];
                let mut rem = code;
                for slot in w.iter_mut().rev() {
                    *slot = (rem % d) as u8;
                    rem /= d;
                }
                let profile = word_profile(index, cyl, &w).unwrap();
                if profile.iter().all(|&depth| depth <= cyl.n) {
                    let s: f64 = profile
                        .iter()
                        .map(|&depth| (1.0 + 1.0 / depth as f64).ln())
                        .sum::<f64>()
                        + cyl.wall_entry;
                    let m = (1..len)
                        .filter(|&k| profile[k] >= profile[k - 1])
                        .count();
                    out.push((w, s, m));
                }
            }
        }
        out
    }

    #[test]
    fn ef_scan_matches_brute_force() {
        let (index, cyl) = tm_setup();
        let beta = 7.0;
        let report = c_ef_truncated(&index, &cyl, beta, 6).unwrap();
        let brute = brute_ef(&index, &cyl, 6);
        assert_eq!(report.words, brute.len());
        let want: f64 = brute.iter().map(|(_, s, _)| (-beta * s).exp()).sum();
        assert!(
            (report.value - want).abs() < 1e-12,
            "scan {} vs brute {want}",
            report.value
        );
        // The per-accident split repacks to the total.
        let repacked: f64 = report.by_m.iter().sum();
        assert!((repacked - report.value).abs() < 1e-12);
        for (m, slot) in report.by_m.iter().enumerate() {
            let want_m: f64 = brute
                .iter()
                .filter(|(_, _, bm)| *bm == m)
                .map(|(_, s, _)| (-beta * s).exp())
                .sum();
            assert!((slot - want_m).abs() < 1e-12, "m = {m}");
        }
        // Length histogram agrees.
        for (len, count) in report.by_length.iter().enumerate() {
            let want_len = brute.iter().filter(|(w, _, _)| w.len() == len).count();
            assert_eq!(*count, want_len, "length {len}");
        }
    }

    #[test]
    fn ef_words_obey_free_position_bound() {
        let (index, cyl) = tm_setup();
        let floor = -cyl.a_n();
        for (w, s, _) in brute_ef(&index, &cyl, 6) {
            assert!(
                s >= (w.len() + 1) as f64 * floor - 1e-12,
                "word {w:?} has S = {s}"
            );
        }
    }

    #[test]
    fn by_m_convolution_squares_the_total() {
        let (index, cyl) = tm_setup();
        let report = c_ef_truncated(&index, &cyl, 5.0, 8).unwrap();
        let mut conv = vec![0.0; 2 * report.by_m.len()];
        for (i, a) in report.by_m.iter().enumerate() {
            for (j, b) in report.by_m.iter().enumerate() {
                conv[i + j] += a * b;
            }
        }
        let total: f64 = conv.iter().sum();
        assert!((total - report.value * report.value).abs() < 1e-10);
    }

    #[test]
    fn return_words_have_first_return_structure() {
        let (index, cyl) = tm_setup();
        let words = enumerate_return_words(&index, &cyl, 8).unwrap();
        let texts: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
        assert!(texts.contains(&"1"));
        assert!(!texts.contains(&"11"));
        assert!(!texts.contains(&"111"));
        for w in &words {
            let u = index.subst().parse_word(&w.text).unwrap();
            let mut glued = u.0.clone();
            glued.extend_from_slice(&cyl.word.0);
            // wJ occurs exactly at the two mandated positions.
            let hits: Vec<usize> = (0..=glued.len() - 3)
                .filter(|&j| glued[j..j + 3] == cyl.word.0[..])
                .collect();
            assert_eq!(hits, vec![0, u.0.len()], "word {}", w.text);
            if u.0.len() >= 4 {
                assert_eq!(&w.text[..4], "1110");
            }
        }
    }

    #[test]
    fn return_weights_are_continuation_independent() {
        let (index, cyl) = tm_setup();
        let words = enumerate_return_words(&index, &cyl, 8).unwrap();
        for w in words.iter().take(6) {
            let u = index.subst().parse_word(&w.text).unwrap();
            for filler in [[0u8, 0], [1u8, 0]] {
                let mut x = u.0.clone();
                x.extend_from_slice(&cyl.word.0);
                for _ in 0..8 {
                    x.extend_from_slice(&filler);
                }
                let mut s = 0.0;
                for k in 0..u.0.len() {
                    let d = index.delta_outcome(&x[k..]).value().unwrap();
                    s += (1.0 + 1.0 / d as f64).ln();
                }
                assert!(
                    (s - w.s).abs() < 1e-12,
                    "word {} filler {filler:?}",
                    w.text
                );
            }
        }
    }

    #[test]
    fn induced_transfer_is_monotone_in_cutoff() {
        let (index, cyl) = tm_setup();
        let beta = 10.0;
        let t6 = induced_transfer_truncated(&index, &cyl, beta, 6).unwrap();
        let t10 = induced_transfer_truncated(&index, &cyl, beta, 10).unwrap();
        let t14 = induced_transfer_truncated(&index, &cyl, beta, 14).unwrap();
        assert!(t6.value > 0.0);
        assert!(t6.value <= t10.value && t10.value <= t14.value);
        // The cumulative-by-length curve reproduces the smaller cutoffs.
        assert!((t14.cumulative_by_length[6] - t6.value).abs() < 1e-12);
        assert!((t14.cumulative_by_length[10] - t10.value).abs() < 1e-12);
    }

    #[test]
    fn certificate_verifies_thue_morse_at_beta_50() {
        let (index, cyl) = tm_setup();
        let cert = freezing_certificate(&index, &cyl, 50.0, 12, 12).unwrap();
        assert_eq!(cert.outcome, CertOutcome::Verified);
        assert!(cert.verdict);
        assert!(cert.q < 1.0);
        assert!(cert.operator_value + cert.tail_bound < 1.0);
        // Soundness is re-derivable from the stored fields alone.
        let q = cert.alphabet as f64 * (cert.beta * cert.a_n).exp();
        assert!((q - cert.q).abs() < 1e-15);
        let rem = (cert.beta * cert.a_n).exp() * q.powi(cert.l_max as i32 + 1) / (1.0 - q);
        assert!((rem - cert.c_ef_remainder).abs() < 1e-15);
        let eff = cert.c_ef + rem;
        assert!((eff - cert.c_ef_effective).abs() < 1e-15);
        let tail = (1.0 / (1.0 - eff)) * (cert.beta * cert.a_n).exp()
            * q.powi(cert.n_max as i32 + 1)
            / (1.0 - q);
        assert!((tail - cert.tail_bound).abs() < 1e-15);
        assert_eq!(
            cert.verdict,
            cert.beta > 0.0 && q < 1.0 && eff < 1.0 && cert.operator_value + tail < 1.0
        );
    }

    #[test]
    fn certificate_fails_at_zero_and_is_monotone_on_grid() {
        let (index, cyl) = tm_setup();
        let zero = freezing_certificate(&index, &cyl, 0.0, 8, 8).unwrap();
        assert!(!zero.verdict);
        assert!(!zero.reason.is_empty());
        let grid = default_beta_grid();
        let certs = freezing_certificate_grid(&index, &cyl, &grid, 10, 10).unwrap();
        let verdicts: Vec<bool> = certs.iter().map(|c| c.verdict).collect();
        let first_true = verdicts.iter().position(|&v| v);
        assert!(first_true.is_some(), "some beta on the grid verifies");
        if let Some(i) = first_true {
            assert!(verdicts[i..].iter().all(|&v| v), "verdict monotone: {verdicts:?}");
            assert!(verdicts[..i].iter().all(|&v| !v));
        }
    }

    #[test]
    fn default_grid_is_geometric_from_tenth_to_two_hundred() {
        let grid = default_beta_grid();
        assert_eq!(grid.len(), 25);
        assert!((grid[0] - 0.1).abs() < 1e-12);
        assert!((grid[24] - 200.0).abs() < 1e-12);
        let ratio = grid[1] / grid[0];
        for pair in grid.windows(2) {
            assert!((pair[1] / pair[0] - ratio).abs() < 1e-9);
        }
    }

    #[test]
    fn pressure_curve_sandwich() {
        let index = LanguageIndex::build(&examples::thue_morse(), 48).unwrap();
        let betas = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
        let curve = pressure_curve(&index, &betas, 16).unwrap();
        assert!((curve.upper[0] - 2f64.ln()).abs() < 1e-12);
        assert!((curve.lower[0] - 2f64.ln()).abs() < 1e-12);
        for i in 0..betas.len() {
            assert!(curve.lower[i] <= curve.upper[i] + 1e-12);
            if i > 0 {
                assert!(curve.upper[i] <= curve.upper[i - 1] + 1e-12, "upper decreasing");
            }
        }
        // Log-sum-exp is convex in beta: discrete second differences on the
        // uniform sub-grid [0.5, 1, 2, 4, 8] are checked pairwise on the
        // geometric spacing via the chord inequality at the middle point.
        let chord = |a: usize, b: usize, c: usize| {
            let t = (betas[b] - betas[a]) / (betas[c] - betas[a]);
            curve.upper[b] <= (1.0 - t) * curve.upper[a] + t * curve.upper[c] + 1e-12
        };
        assert!(chord(1, 2, 3) && chord(2, 3, 4) && chord(3, 4, 5));
        let full = pressure_curve(&index, &default_beta_grid(), 16).unwrap();
        let star = full.beta_c_star.expect("entropy floor reached on the grid");
        assert!(star > 0.1 - 1e-12);
    }

    #[test]
    fn comparison_transfer_brackets() {
        let log_phi = Potential::log_phi();
        let x = xi1_comparison_transfer(&log_phi, 2, 30.0).unwrap();
        assert!(x.log_form);
        assert!((x.conservative_beta - 30.0).abs() < 1e-12);
        assert!((x.optimistic_beta - 30.0).abs() < 1e-12);

        let scaled = Potential {
            alpha: 1.0,
            g: CylinderFn {
                depth: 1,
                table: vec![2.0, 2.0],
            },
            h: None,
            log_form: false,
        };
        let x = xi1_comparison_transfer(&scaled, 2, 30.0).unwrap();
        assert!((x.ratio_bound - 0.5 / 1.5f64.ln()).abs() < 1e-12);
        assert!((x.conservative_beta - 15.0).abs() < 1e-12);
        assert!((x.optimistic_beta - 30.0 / (2.0 * x.ratio_bound)).abs() < 1e-12);
        assert!(x.conservative_beta >= x.optimistic_beta);

        let bad = Potential {
            alpha: 1.0,
            g: CylinderFn {
                depth: 1,
                table: vec![1.0, 0.5],
            },
            h: Some(CylinderFn {
                depth: 1,
                table: vec![-2.0, 0.0],
            }),
            log_form: false,
        };
        assert!(matches!(
            xi1_comparison_transfer(&bad, 2, 30.0),
            Err(ThermoError::NonPositiveComparison { .. })
        ));
    }

    #[test]
    fn by_m_map_drops_empty_slots() {
        let (index, cyl) = tm_setup();
        let report = c_ef_truncated(&index, &cyl, 5.0, 6).unwrap();
        let map = by_m_map(&report);
        let total: f64 = map.values().sum();
        assert!((total - report.value).abs() < 1e-12);
        assert!(map.values().all(|v| *v != 0.0));
    }
}
