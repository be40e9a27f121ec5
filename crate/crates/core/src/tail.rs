//! One-sided infinite sequences given by a finite prefix plus an explicit
//! continuation rule, with exact materialization of any finite horizon.

use crate::substitution::{SubstError, Substitution, Word};

/// How the sequence continues after the explicit prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Continuation {
    /// Repeat this block forever.
    RepeatBlock(Word),
    /// Append the substitution's fixed point grown from this seed letter.
    FixedPoint(u8),
}

/// A one-sided infinite sequence `x` with finitely described tail behaviour.
///
/// Every digit of `x` is determined: first the explicit prefix, then the
/// continuation rule. All inspection happens through [`Tail::digits`], which
/// materializes an exact prefix of any requested length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tail {
    pub prefix: Word,
    pub continuation: Continuation,
}

impl Tail {
    /// The purely periodic sequence `block block block ...`.
    pub fn periodic(block: Word) -> Tail {
        Tail {
            prefix: Word::new(),
            continuation: Continuation::RepeatBlock(block),
        }
    }

    /// `prefix` followed by `block` repeated forever.
    pub fn eventually_periodic(prefix: Word, block: Word) -> Tail {
        Tail {
            prefix,
            continuation: Continuation::RepeatBlock(block),
        }
    }

    /// `prefix` followed by the fixed point grown from `letter`.
    pub fn into_fixed_point(prefix: Word, letter: u8) -> Tail {
        Tail {
            prefix,
            continuation: Continuation::FixedPoint(letter),
        }
    }

    /// First digit of the sequence.
    pub fn first_letter(&self) -> Option<u8> {
        if let Some(&a) = self.prefix.iter().next() {
            return Some(a);
        }
        match &self.continuation {
            Continuation::RepeatBlock(b) => b.iter().next().copied(),
            Continuation::FixedPoint(a) => Some(*a),
        }
    }

    /// Exact first `len` digits of the sequence.
    ///
    /// Errors if the repeat block is empty (the sequence is not defined) or if
    /// the fixed-point seed letter does not actually seed a fixed point.
    pub fn digits(&self, subst: &Substitution, len: usize) -> Result<Word, SubstError> {
        let mut out = self.prefix.clone();
        out.0.truncate(len);
        if out.len() < len {
            match &self.continuation {
                Continuation::RepeatBlock(block) => {
                    if block.is_empty() {
                        return Err(SubstError::EmptyBlock);
                    }
                    let mut it = block.iter().cycle();
                    while out.len() < len {
                        out.0.push(*it.next().unwrap());
                    }
                }
                Continuation::FixedPoint(a) => {
                    let need = len - out.len();
                    let fp = subst.fixed_point_prefix(*a, need.max(2))?;
                    out.0.extend_from_slice(&fp.0[..need]);
                }
            }
        }
        Ok(out)
    }

    /// True when the digits are exactly a fixed point of the substitution:
    /// no explicit prefix and a seed letter that genuinely seeds one.
    pub fn is_fixed_point(&self, subst: &Substitution) -> bool {
        self.prefix.is_empty()
            && match self.continuation {
                Continuation::FixedPoint(a) => {
                    subst.images()[a as usize].iter().next() == Some(&a)
                }
                Continuation::RepeatBlock(_) => false,
            }
    }

    /// The shifted sequence `sigma^i(x)` as a tail.
    ///
    /// Exact for periodic continuations; a shift into a fixed-point
    /// continuation is not finitely describable and errors.
    pub fn shift(&self, i: usize) -> Result<Tail, SubstError> {
        if i < self.prefix.len() {
            return Ok(Tail {
                prefix: Word(self.prefix.0[i..].to_vec()),
                continuation: self.continuation.clone(),
            });
        }
        match &self.continuation {
            Continuation::RepeatBlock(block) => {
                if block.is_empty() {
                    return Err(SubstError::EmptyBlock);
                }
                let j = (i - self.prefix.len()) % block.len();
                let mut rotated = block.0[j..].to_vec();
                rotated.extend_from_slice(&block.0[..j]);
                Ok(Tail::periodic(Word(rotated)))
            }
            Continuation::FixedPoint(_) if i == self.prefix.len() => Ok(Tail {
                prefix: Word::new(),
                continuation: self.continuation.clone(),
            }),
            Continuation::FixedPoint(_) => Err(SubstError::ShiftIntoFixedPoint),
        }
    }

    /// The sequence `H^n(x)` as a tail.
    ///
    /// The prefix and any repeat block are expanded exactly; a fixed-point
    /// continuation is untouched since `H^n` fixes the grown sequence. Errors
    /// if an expanded part would exceed `cap` letters.
    pub fn image(&self, subst: &Substitution, n: u32, cap: usize) -> Result<Tail, SubstError> {
        let expand = |w: &Word| -> Result<Word, SubstError> {
            let (img, truncated) = subst.apply_n_capped(&w.0, n, cap);
            if truncated {
                return Err(SubstError::CapExceeded { cap });
            }
            Ok(img)
        };
        let continuation = match &self.continuation {
            Continuation::RepeatBlock(block) => Continuation::RepeatBlock(expand(block)?),
            Continuation::FixedPoint(a) => Continuation::FixedPoint(*a),
        };
        Ok(Tail {
            prefix: expand(&self.prefix)?,
            continuation,
        })
    }

    /// Exact first `len` digits of `H^n(x)` without expanding the whole image:
    /// base digits are consumed one at a time and their `H^n` images streamed
    /// out until `len` letters have been produced.
    pub fn image_digits(
        &self,
        subst: &Substitution,
        n: u32,
        len: usize,
    ) -> Result<Word, SubstError> {
        if len == 0 {
            return Ok(Word::new());
        }
        // One base letter contributes at least one output letter, so `len`
        // base digits always suffice.
        let base = self.digits(subst, len)?;
        let mut memo: Vec<Option<Word>> = vec![None; subst.size()];
        let mut out = Word(Vec::with_capacity(len));
        for &a in base.iter() {
            if out.len() >= len {
                break;
            }
            let img = match &memo[a as usize] {
                Some(w) => w,
                None => {
                    // Truncation at `len` is harmless: a truncated image can
                    // only be the final block appended.
                    let (w, _) = subst.apply_n_capped(&[a], n, len);
                    memo[a as usize] = Some(w);
                    memo[a as usize].as_ref().unwrap()
                }
            };
            let room = len - out.len();
            let take = room.min(img.len());
            out.0.extend_from_slice(&img.0[..take]);
        }
        debug_assert_eq!(out.len(), len);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{abbaaa, thue_morse};

    #[test]
    fn periodic_digits() {
        let tm = thue_morse();
        let x = Tail::periodic(tm.parse_word("1").unwrap());
        assert_eq!(tm.word_string(&x.digits(&tm, 5).unwrap()), "11111");
        let y = Tail::eventually_periodic(tm.parse_word("0").unwrap(), tm.parse_word("10").unwrap());
        assert_eq!(tm.word_string(&y.digits(&tm, 6).unwrap()), "010101");
        assert_eq!(y.first_letter(), Some(0));
    }

    #[test]
    fn fixed_point_digits() {
        let tm = thue_morse();
        let x = Tail::into_fixed_point(tm.parse_word("11").unwrap(), 0);
        assert_eq!(tm.word_string(&x.digits(&tm, 8).unwrap()), "11011010");
        // Letter 1 seeds the second Thue-Morse fixed point.
        let y = Tail::into_fixed_point(Word::new(), 1);
        assert_eq!(tm.word_string(&y.digits(&tm, 8).unwrap()), "10010110");
    }

    #[test]
    fn image_expands_blocks() {
        let tm = thue_morse();
        let x = Tail::periodic(tm.parse_word("1").unwrap());
        let hx = x.image(&tm, 2, 1 << 20).unwrap();
        assert_eq!(
            hx.continuation,
            Continuation::RepeatBlock(tm.parse_word("1001").unwrap())
        );
        assert_eq!(tm.word_string(&hx.digits(&tm, 8).unwrap()), "10011001");
        // Streaming digits agree with expanding the whole tail.
        assert_eq!(x.image_digits(&tm, 2, 8).unwrap(), hx.digits(&tm, 8).unwrap());
    }

    #[test]
    fn image_digits_streams_against_full_expansion() {
        let s = abbaaa();
        let x = Tail::into_fixed_point(s.parse_word("bbb").unwrap(), 0);
        let full = x.image(&s, 3, 1 << 20).unwrap().digits(&s, 200).unwrap();
        assert_eq!(x.image_digits(&s, 3, 200).unwrap(), full);
    }
}
