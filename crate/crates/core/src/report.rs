//! Output assembly for the command-line surface: stable float formatting,
//! tail specifications, and CSV renderings of the report types.

use serde::Serialize;

use crate::attractor::AccidentProfile;
use crate::language::{BispecialCatalog, LanguageIndex, PowerFreeReport};
use crate::recognize::RecognizabilityReport;
use crate::renorm::{classify_values, LimitClass, RenormResult};
use crate::substitution::{StructureReport, Substitution, Word};
use crate::tail::Tail;
use crate::thermo::{CertOutcome, FreezingCertificate, PressureCurve};

/// Floats are printed with 12 significant digits so reruns diff cleanly.
/// Plain decimal in a comfortable magnitude range, scientific outside it.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json, csv, or text)")),
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Parses a tail specification:
///
/// - `BLOCK^inf` is the periodic word `BLOCK BLOCK ...`;
/// - `PREFIX|BLOCK^inf` prepends a finite prefix;
/// - `PREFIX|fixed:LETTER` continues with the one-sided fixed point of that
///   letter (also valid without a prefix as `fixed:LETTER`);
/// - `random:LEN` draws a prefix of `LEN` letters and a single-letter period
///   from the seed, deterministically.
pub fn parse_tail(subst: &Substitution, spec: &str, seed: u64) -> Result<Tail, String> {
    if let Some(len_text) = spec.strip_prefix("random:") {
        let len: usize = len_text
            .parse()
            .map_err(|_| format!("bad random tail length `{len_text}`"))?;
        let d = subst.size() as u64;
        let mut state = seed;
        let prefix: Vec<u8> = (0..len).map(|_| (splitmix64(&mut state) % d) as u8).collect();
        let block = vec![(splitmix64(&mut state) % d) as u8];
        return Ok(Tail::eventually_periodic(Word::from(prefix), Word::from(block)));
    }
    let (prefix_text, rest) = match spec.split_once('|') {
        Some((p, r)) => (Some(p), r),
        None => (None, spec),
    };
    let prefix = match prefix_text {
        Some(p) => subst.parse_word(p).map_err(|e| e.to_string())?,
        None => Word::new(),
    };
    if let Some(block_text) = rest.strip_suffix("^inf") {
        let block = subst.parse_word(block_text).map_err(|e| e.to_string())?;
        if block.is_empty() {
            return Err("periodic block must be nonempty".to_string());
        }
        return Ok(Tail::eventually_periodic(prefix, block));
    }
    if let Some(letter_text) = rest.strip_prefix("fixed:") {
        let letter = subst.parse_word(letter_text).map_err(|e| e.to_string())?;
        if letter.len() != 1 {
            return Err(format!("fixed: takes a single letter, got `{letter_text}`"));
        }
        return Ok(Tail::into_fixed_point(prefix, letter[0]));
    }
    Err(format!(
        "bad tail spec `{spec}` (expected BLOCK^inf, PREFIX|BLOCK^inf, [PREFIX|]fixed:LETTER, or random:LEN)"
    ))
}

pub fn kind_str(kind: crate::language::SpecialKind) -> &'static str {
    use crate::language::SpecialKind::*;
    match kind {
        Ordinary => "ordinary",
        LeftSpecial => "left-special",
        RightSpecial => "right-special",
        BispecialWeak => "bispecial-weak",
        BispecialStrong => "bispecial-strong",
        BispecialNeutral => "bispecial-neutral",
    }
}

pub fn outcome_str(outcome: CertOutcome) -> &'static str {
    match outcome {
        CertOutcome::Verified => "verified",
        CertOutcome::NotVerified => "not-verified",
        CertOutcome::Inconclusive => "inconclusive",
    }
}

pub fn class_str(class: &LimitClass) -> &'static str {
    match class {
        LimitClass::ToZero => "to-zero",
        LimitClass::Diverges => "diverges",
        LimitClass::Converges { .. } => "converges",
        LimitClass::Inconclusive => "inconclusive",
    }
}

/// Top-level structural report produced by `analyze`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzeReport {
    pub structure: StructureReport,
    pub two_full: bool,
    pub max_len: usize,
    /// Empirical sup of |H^n(a)| / lambda^n over letters and levels.
    pub k_constant: f64,
    pub k_depth: u32,
    /// None when the exponent search saturates the index cutoff (a periodic
    /// system, or a cutoff too small to witness the bound).
    pub power_free: Option<PowerFreeReport>,
    /// None when no recognizability length exists within the scan (periodic
    /// or unmarked systems).
    pub recognizability: Option<RecognizabilityReport>,
}

/// `sup |H^n(a)| / lambda^n` over `1 <= n <= depth`, stopping early if the
/// image lengths overflow the exact counter.
pub fn k_constant(subst: &Substitution, lambda: f64, depth: u32) -> f64 {
    let mut sup = 1.0f64;
    for n in 1..=depth {
        match subst.image_lengths_u128(n) {
            Some(lens) => {
                let scale = lambda.powi(n as i32);
                for &len in &lens {
                    sup = sup.max(len as f64 / scale);
                }
            }
            None => break,
        }
    }
    sup
}

pub fn complexity_rows(index: &LanguageIndex, up_to: usize) -> Vec<(usize, usize, i64)> {
    (0..=up_to)
        .map(|n| {
            let p = index.complexity(n);
            let s = if n + 1 <= up_to {
                index.complexity(n + 1) as i64 - p as i64
            } else {
                0
            };
            (n, p, s)
        })
        .collect()
}

pub fn complexity_csv(rows: &[(usize, usize, i64)]) -> String {
    let mut out = String::from("n,p,s\n");
    for (n, p, s) in rows {
        out.push_str(&format!("{n},{p},{s}\n"));
    }
    out
}

pub fn bispecial_csv(catalog: &BispecialCatalog) -> String {
    let mut out = String::from("word,length,mL,mR,mB,i,kind,n,seedWord\n");
    for rec in &catalog.records {
        let (n, seed) = catalog
            .structure_map
            .iter()
            .find(|e| e.word == rec.word)
            .map(|e| (e.n.to_string(), e.seed.clone()))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            rec.word,
            rec.length,
            rec.m_l,
            rec.m_r,
            rec.m_b,
            rec.i,
            kind_str(rec.kind),
            n,
            seed
        ));
    }
    out
}

pub fn accidents_csv(profile: &AccidentProfile) -> String {
    let mut out = String::from("k,time,gap,depth,Delta,witness,overlap\n");
    for k in 0..profile.times.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            k,
            profile.times[k],
            profile.gaps[k],
            profile.depths[k],
            profile.deltas[k],
            profile.witnesses[k],
            profile.witness_overlaps[k]
        ));
    }
    out
}

pub fn renorm_csv(result: &RenormResult, lambda: f64) -> String {
    let mut out = String::from("m,value,classification\n");
    for m in 0..result.values.len() {
        let class = classify_values(&result.values[..=m], result.alpha, lambda);
        out.push_str(&format!(
            "{},{},{}\n",
            m,
            sig12(result.values[m]),
            class_str(&class)
        ));
    }
    out
}

pub fn pressure_csv(curve: &PressureCurve) -> String {
    let mut out = String::from("beta,lower,upper\n");
    for i in 0..curve.betas.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            sig12(curve.betas[i]),
            sig12(curve.lower[i]),
            sig12(curve.upper[i])
        ));
    }
    out
}

pub fn freeze_csv(certs: &[FreezingCertificate]) -> String {
    let mut out = String::from("beta,q,cEf,cEfEffective,operatorValue,tailBound,outcome\n");
    for c in certs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig12(c.beta),
            sig12(c.q),
            sig12(c.c_ef),
            sig12(c.c_ef_effective),
            sig12(c.operator_value),
            sig12(c.tail_bound),
            outcome_str(c.outcome)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn sig12_is_stable_and_significant() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(2.0), "2.00000000000");
        assert_eq!(sig12(0.5753641449035618), "0.575364144904");
        assert_eq!(sig12(123456.789), "123456.789000");
        assert_eq!(sig12(6.223015e-61), "6.22301500000e-61");
        assert_eq!(sig12(f64::INFINITY), "inf");
        assert_eq!(sig12(-0.001438), "-0.00143800000000");
    }

    #[test]
    fn tail_specs_round_trip() {
        let tm = examples::thue_morse();
        let periodic = parse_tail(&tm, "1^inf", 0).unwrap();
        assert_eq!(periodic.digits(&tm, 4).unwrap().0, vec![1, 1, 1, 1]);
        let ev = parse_tail(&tm, "011|1^inf", 0).unwrap();
        assert_eq!(ev.digits(&tm, 5).unwrap().0, vec![0, 1, 1, 1, 1]);
        let fx = parse_tail(&tm, "fixed:0", 0).unwrap();
        assert_eq!(fx.digits(&tm, 4).unwrap().0, vec![0, 1, 1, 0]);
        let r1 = parse_tail(&tm, "random:6", 7).unwrap();
        let r2 = parse_tail(&tm, "random:6", 7).unwrap();
        assert_eq!(r1.digits(&tm, 12).unwrap().0, r2.digits(&tm, 12).unwrap().0);
        let r3 = parse_tail(&tm, "random:6", 8).unwrap();
        assert_ne!(r1.digits(&tm, 12).unwrap().0, r3.digits(&tm, 12).unwrap().0);
        assert!(parse_tail(&tm, "garbage", 0).is_err());
        assert!(parse_tail(&tm, "2^inf", 0).is_err());
    }

    #[test]
    fn k_constant_thue_morse_is_one() {
        let tm = examples::thue_morse();
        let k = k_constant(&tm, 2.0, 40);
        assert!((k - 1.0).abs() < 1e-12, "uniform image lengths give K = 1");
        let abba = examples::abba();
        let k = k_constant(&abba, abba.perron().value, 30);
        assert!(k >= 1.0);
    }

    #[test]
    fn csv_headers_are_fixed() {
        let tm = examples::thue_morse();
        let index = crate::language::LanguageIndex::build(&tm, 16).unwrap();
        let rows = complexity_rows(&index, 8);
        let csv = complexity_csv(&rows);
        assert!(csv.starts_with("n,p,s\n0,1,1\n1,2,2\n2,4,2\n"));
    }
}
