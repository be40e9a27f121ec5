//! Canonical substitutions used throughout the tests and the docs.

use crate::substitution::Substitution;

/// 0 -> 01, 1 -> 10. Marked, 2-full, constant length 2.
pub fn thue_morse() -> Substitution {
    Substitution::parse("0 -> 01 / 1 -> 10").unwrap()
}

/// 0 -> 01, 1 -> 0. Primitive but not marked.
pub fn fibonacci() -> Substitution {
    Substitution::parse("0 -> 01 / 1 -> 0").unwrap()
}

/// 0 -> 012, 1 -> 10, 2 -> 21. Marked and 2-full on three letters.
pub fn three_letter() -> Substitution {
    Substitution::parse("0 -> 012 / 1 -> 10 / 2 -> 21").unwrap()
}

/// a -> abba, b -> bab. Marked but not 2-full (aa is not a factor).
pub fn abba() -> Substitution {
    Substitution::parse("a -> abba / b -> bab").unwrap()
}

/// a -> abbaaa, b -> baaaab. Marked, with bbb not a factor.
pub fn abbaaa() -> Substitution {
    Substitution::parse("a -> abbaaa / b -> baaaab").unwrap()
}
