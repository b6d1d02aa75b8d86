//! Built-in example systems, embedded from `fixtures/`.

use crate::format::parse_spec;
use crate::system::ConcurrentSystem;

pub const E1: &str = include_str!("../fixtures/e1.sys");
pub const TM1: &str = include_str!("../fixtures/tm1.sys");
pub const TM2: &str = include_str!("../fixtures/tm2.sys");
pub const AZTEC: &str = include_str!("../fixtures/aztec.sys");
pub const TWELVE: &str = include_str!("../fixtures/twelve.sys");

/// `(name, text)` for every built-in fixture.
pub const ALL: [(&str, &str); 5] = [
    ("e1", E1),
    ("tm1", TM1),
    ("tm2", TM2),
    ("aztec", AZTEC),
    ("twelve", TWELVE),
];

fn load(text: &str) -> ConcurrentSystem {
    parse_spec(text).expect("built-in fixture parses")
}

/// Two states over `⟨a,b,c,d | ad=da, bd=db⟩`.
pub fn e1() -> ConcurrentSystem {
    load(E1)
}

/// Canonical one-state system of `⟨a,b,c | ab=ba⟩`.
pub fn tm1() -> ConcurrentSystem {
    load(TM1)
}

/// Canonical one-state system of `⟨a,b | ab=ba⟩`.
pub fn tm2() -> ConcurrentSystem {
    load(TM2)
}

/// Eight states over `⟨a,b,c,d,e | ab=ba, de=ed⟩`.
pub fn aztec() -> ConcurrentSystem {
    load(AZTEC)
}

/// Twelve states over six letters.
pub fn twelve() -> ConcurrentSystem {
    load(TWELVE)
}

pub fn by_name(name: &str) -> Option<ConcurrentSystem> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| load(t))
}
