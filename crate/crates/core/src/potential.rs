//! Potentials of the class `Xi_alpha`: functions of the form
//! `V(x) = (g(x) + h(x)) / delta(x)^alpha` with `g` and `h` cylinder
//! functions, plus the logarithmic variant `g(x) * ln(1 + 1/delta(x))`.
//!
//! Cylinder functions read only the first `depth` digits and are backed by a
//! dense table, so they are exactly evaluable and their integrals against the
//! attractor measure reduce to counting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::LanguageIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("cylinder table has {got} entries, expected {want} for depth {depth} over {d} letters")]
    TableSize {
        depth: usize,
        d: usize,
        want: usize,
        got: usize,
    },
    #[error("cylinder table entry {idx} is not finite")]
    NonFiniteEntry { idx: usize },
    #[error("g must be strictly positive, entry {idx} is {value}")]
    NonPositiveG { idx: usize, value: f64 },
    #[error("alpha must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("h must vanish on language cylinders, but the entry for `{word}` is {value}")]
    HMeetsLanguage { word: String, value: f64 },
    #[error("h depth {depth} exceeds the index cutoff {max_len}, vanishing cannot be checked")]
    HDepthUncheckable { depth: usize, max_len: usize },
    #[error("the log form requires alpha = 1 and no h term")]
    LogFormShape,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CylinderFnInput {
    Table { depth: usize, table: Vec<f64> },
    Constant { constant: f64 },
}

/// A function of the first `depth` digits, stored as a dense table in
/// lexicographic order with the first digit most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CylinderFnInput")]
pub struct CylinderFn {
    pub depth: usize,
    pub table: Vec<f64>,
}

impl From<CylinderFnInput> for CylinderFn {
    fn from(input: CylinderFnInput) -> CylinderFn {
        match input {
            CylinderFnInput::Table { depth, table } => CylinderFn { depth, table },
            CylinderFnInput::Constant { constant } => CylinderFn::constant(constant),
        }
    }
}

impl CylinderFn {
    /// The constant function, as a depth-0 table.
    pub fn constant(c: f64) -> CylinderFn {
        CylinderFn {
            depth: 0,
            table: vec![c],
        }
    }

    /// The indicator of the cylinder `[w]` over a `d`-letter alphabet.
    pub fn indicator(d: usize, w: &[u8]) -> CylinderFn {
        let mut table = vec![0.0; d.pow(w.len() as u32)];
        let mut idx = 0usize;
        for &a in w {
            idx = idx * d + a as usize;
        }
        table[idx] = 1.0;
        CylinderFn {
            depth: w.len(),
            table,
        }
    }

    pub fn validate(&self, d: usize) -> Result<(), PotentialError> {
        let want = d.checked_pow(self.depth as u32).unwrap_or(usize::MAX);
        if self.table.len() != want {
            return Err(PotentialError::TableSize {
                depth: self.depth,
                d,
                want,
                got: self.table.len(),
            });
        }
        for (idx, &v) in self.table.iter().enumerate() {
            if !v.is_finite() {
                return Err(PotentialError::NonFiniteEntry { idx });
            }
        }
        Ok(())
    }

    /// Value on the cylinder named by the first `depth` digits of `window`.
    pub fn eval(&self, d: usize, window: &[u8]) -> f64 {
        debug_assert!(window.len() >= self.depth);
        let mut idx = 0usize;
        for &a in &window[..self.depth] {
            idx = idx * d + a as usize;
        }
        self.table[idx]
    }

    /// The word naming table entry `idx`.
    fn word_of(&self, d: usize, idx: usize) -> Vec<u8> {
        let mut w = vec![0u8; self.depth];
        let mut rest = idx;
        for j in (0..self.depth).rev() {
            w[j] = (rest % d) as u8;
            rest /= d;
        }
        w
    }
}

/// A potential `V(x) = (g(x) + h(x)) / delta(x)^alpha`, or with `log_form`
/// set, `V(x) = g(x) * ln(1 + 1/delta(x))`.
///
/// `g` must be strictly positive and `h` must vanish on every cylinder that
/// meets the language, so that `V` vanishes exactly on the attractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Potential {
    pub alpha: f64,
    pub g: CylinderFn,
    #[serde(default)]
    pub h: Option<CylinderFn>,
    #[serde(default)]
    pub log_form: bool,
}

impl Potential {
    /// `V = 1 / delta^alpha`.
    pub fn power(alpha: f64) -> Potential {
        Potential {
            alpha,
            g: CylinderFn::constant(1.0),
            h: None,
            log_form: false,
        }
    }

    /// `V = ln(1 + 1/delta)`.
    pub fn log_phi() -> Potential {
        Potential {
            alpha: 1.0,
            g: CylinderFn::constant(1.0),
            h: None,
            log_form: true,
        }
    }

    /// The deepest digit window any cylinder table reads.
    pub fn max_depth(&self) -> usize {
        self.g
            .depth
            .max(self.h.as_ref().map_or(0, |h| h.depth))
    }

    pub fn validate(&self, index: &LanguageIndex) -> Result<(), PotentialError> {
        let d = index.subst().size();
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(PotentialError::BadAlpha(self.alpha));
        }
        self.g.validate(d)?;
        for (idx, &v) in self.g.table.iter().enumerate() {
            if v <= 0.0 {
                return Err(PotentialError::NonPositiveG { idx, value: v });
            }
        }
        if self.log_form && (self.alpha != 1.0 || self.h.is_some()) {
            return Err(PotentialError::LogFormShape);
        }
        if let Some(h) = &self.h {
            h.validate(d)?;
            if h.depth > index.max_len() {
                return Err(PotentialError::HDepthUncheckable {
                    depth: h.depth,
                    max_len: index.max_len(),
                });
            }
            for (idx, &v) in h.table.iter().enumerate() {
                if v != 0.0 && index.contains(&h.word_of(d, idx)) {
                    return Err(PotentialError::HMeetsLanguage {
                        word: index.subst().word_string(&h.word_of(d, idx)),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Evaluate at a point with the given `delta` and leading digits.
    pub fn eval(&self, d: usize, delta: usize, window: &[u8]) -> f64 {
        let g = self.g.eval(d, window);
        if self.log_form {
            return g * (1.0 + 1.0 / delta as f64).ln();
        }
        let h = self.h.as_ref().map_or(0.0, |h| h.eval(d, window));
        (g + h) / (delta as f64).powf(self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::language::LanguageIndex;

    fn tm_index() -> LanguageIndex {
        LanguageIndex::build(&examples::thue_morse(), 24).unwrap()
    }

    #[test]
    fn table_shapes_and_positivity() {
        let index = tm_index();
        let mut v = Potential::power(1.0);
        assert!(v.validate(&index).is_ok());
        v.g = CylinderFn {
            depth: 1,
            table: vec![1.0],
        };
        assert!(matches!(
            v.validate(&index),
            Err(PotentialError::TableSize { want: 2, got: 1, .. })
        ));
        v.g = CylinderFn {
            depth: 1,
            table: vec![1.0, 0.0],
        };
        assert!(matches!(
            v.validate(&index),
            Err(PotentialError::NonPositiveG { idx: 1, .. })
        ));
    }

    #[test]
    fn h_must_vanish_on_language_cylinders() {
        let index = tm_index();
        // 010 is a factor, so a nonzero entry there is rejected; 000 is not.
        let d = 2usize;
        let mut table = vec![0.0; 8];
        table[0b010] = 0.5;
        let bad = Potential {
            alpha: 1.0,
            g: CylinderFn::constant(1.0),
            h: Some(CylinderFn { depth: 3, table }),
            log_form: false,
        };
        assert!(matches!(
            bad.validate(&index),
            Err(PotentialError::HMeetsLanguage { .. })
        ));
        let mut table = vec![0.0; 8];
        table[0b000] = 0.5;
        let good = Potential {
            alpha: 1.0,
            g: CylinderFn::constant(1.0),
            h: Some(CylinderFn { depth: 3, table }),
            log_form: false,
        };
        assert!(good.validate(&index).is_ok());
        let w = [0u8, 0, 0];
        assert_eq!(good.eval(d, 4, &w), (1.0 + 0.5) / 4.0);
        let w = [0u8, 1, 0];
        assert_eq!(good.eval(d, 4, &w), 0.25);
    }

    #[test]
    fn log_form_shape_and_value() {
        let index = tm_index();
        let phi = Potential::log_phi();
        assert!(phi.validate(&index).is_ok());
        let w = [0u8];
        assert!((phi.eval(2, 3, &w) - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let mut bad = Potential::log_phi();
        bad.alpha = 2.0;
        assert!(matches!(
            bad.validate(&index),
            Err(PotentialError::LogFormShape)
        ));
    }

    #[test]
    fn json_round_trip_and_constant_shorthand() {
        let v: Potential = serde_json::from_str(
            r#"{"alpha": 0.5, "g": {"constant": 2.0}, "h": null, "logForm": false}"#,
        )
        .unwrap();
        assert_eq!(v.g, CylinderFn::constant(2.0));
        assert_eq!(v.alpha, 0.5);
        let v: Potential = serde_json::from_str(
            r#"{"alpha": 1, "g": {"depth": 1, "table": [1.0, 2.0]}}"#,
        )
        .unwrap();
        assert_eq!(v.g.depth, 1);
        assert_eq!(v.eval(2, 2, &[1u8]), 1.0);
        let text = serde_json::to_string(&v).unwrap();
        let back: Potential = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn indicator_reads_leading_digits() {
        let g = CylinderFn::indicator(2, &[0, 1]);
        assert_eq!(g.eval(2, &[0, 1, 1, 0]), 1.0);
        assert_eq!(g.eval(2, &[1, 1, 0, 0]), 0.0);
        assert_eq!(g.table.iter().sum::<f64>(), 1.0);
    }
}
