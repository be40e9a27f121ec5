//! Suffix automaton over letter-index words, used to answer "is this window a
//! factor of the reference text" queries in bulk via matching statistics.
//!
//! States and transitions live in flat arrays; the transition table is dense
//! (`states * alphabet`), which is the right trade for the small alphabets
//! this crate targets.

const NONE: u32 = u32::MAX;

pub struct SuffixAutomaton {
    d: usize,
    len: Vec<u32>,
    link: Vec<u32>,
    trans: Vec<u32>,
    last: u32,
}

impl SuffixAutomaton {
    pub fn build(text: &[u8], d: usize) -> Self {
        let mut sa = SuffixAutomaton {
            d,
            len: Vec::with_capacity(2 * text.len() + 2),
            link: Vec::with_capacity(2 * text.len() + 2),
            trans: Vec::with_capacity((2 * text.len() + 2) * d),
            last: 0,
        };
        sa.new_state(0, NONE);
        for &c in text {
            sa.extend(c as usize);
        }
        sa
    }

    fn new_state(&mut self, len: u32, link: u32) -> u32 {
        let id = self.len.len() as u32;
        self.len.push(len);
        self.link.push(link);
        self.trans.extend(std::iter::repeat(NONE).take(self.d));
        id
    }

    #[inline]
    fn tr(&self, state: u32, c: usize) -> u32 {
        self.trans[state as usize * self.d + c]
    }

    #[inline]
    fn set_tr(&mut self, state: u32, c: usize, to: u32) {
        self.trans[state as usize * self.d + c] = to;
    }

    fn extend(&mut self, c: usize) {
        let cur = self.new_state(self.len[self.last as usize] + 1, NONE);
        let mut p = self.last;
        loop {
            if self.tr(p, c) != NONE {
                break;
            }
            self.set_tr(p, c, cur);
            if self.link[p as usize] == NONE {
                self.link[cur as usize] = 0;
                self.last = cur;
                return;
            }
            p = self.link[p as usize];
        }
        let q = self.tr(p, c);
        if self.len[p as usize] + 1 == self.len[q as usize] {
            self.link[cur as usize] = q;
        } else {
            let clone = self.new_state(self.len[p as usize] + 1, self.link[q as usize]);
            for cc in 0..self.d {
                let t = self.tr(q, cc);
                self.set_tr(clone, cc, t);
            }
            let mut p2 = p;
            while p2 != NONE && self.tr(p2, c) == q {
                self.set_tr(p2, c, clone);
                if self.link[p2 as usize] == NONE {
                    break;
                }
                p2 = self.link[p2 as usize];
            }
            self.link[q as usize] = clone;
            self.link[cur as usize] = clone;
        }
        self.last = cur;
    }

    pub fn states(&self) -> usize {
        self.len.len()
    }

    /// Whether `w` is a factor of the indexed text.
    pub fn contains(&self, w: &[u8]) -> bool {
        let mut q = 0u32;
        for &c in w {
            q = self.tr(q, c as usize);
            if q == NONE {
                return false;
            }
        }
        true
    }

    /// `out[e]` = length of the longest suffix of `t[..e]` that is a factor of
    /// the indexed text, for `e` in `0..=t.len()`.
    pub fn longest_match_ending(&self, t: &[u8]) -> Vec<u32> {
        let mut out = Vec::with_capacity(t.len() + 1);
        out.push(0);
        let mut q = 0u32;
        let mut l = 0u32;
        for &c in t {
            let c = c as usize;
            if self.tr(q, c) != NONE {
                q = self.tr(q, c);
                l += 1;
            } else {
                while q != 0 && self.tr(q, c) == NONE {
                    q = self.link[q as usize];
                }
                if self.tr(q, c) == NONE {
                    q = 0;
                    l = 0;
                } else {
                    l = self.len[q as usize] + 1;
                    q = self.tr(q, c);
                }
            }
            out.push(l);
        }
        out
    }

    /// Matching statistics: `out[k]` = length of the longest prefix of
    /// `t[k..]` that is a factor of the indexed text, for `k` in `0..t.len()`.
    ///
    /// Derived from `longest_match_ending`: a window `t[k..e]` is a factor
    /// exactly when the longest match ending at `e` reaches back to `k` or
    /// earlier, and the furthest reachable end is monotone in `k`.
    pub fn matching_statistics(&self, t: &[u8]) -> Vec<u32> {
        let n = t.len();
        if n == 0 {
            return Vec::new();
        }
        let me = self.longest_match_ending(t);
        // bucket_max[k] = furthest end e whose minimal start is exactly k
        let mut bucket_max = vec![0usize; n + 1];
        for e in 0..=n {
            let start_min = e - me[e] as usize;
            if e > bucket_max[start_min] {
                bucket_max[start_min] = e;
            }
        }
        let mut out = vec![0u32; n];
        let mut best = 0usize;
        for k in 0..n {
            if bucket_max[k] > best {
                best = bucket_max[k];
            }
            let e = best.max(k);
            out[k] = (e - k) as u32;
        }
        out
    }
}
