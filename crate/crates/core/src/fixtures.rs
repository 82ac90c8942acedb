//! Small hand-built automata used throughout the tests and docs.

use crate::model::{decode_classical, decode_doca, ClassicalDoca, Doca, DocaBuilder};

pub const D1: &str = include_str!("../fixtures/D1.doca");
pub const D2: &str = include_str!("../fixtures/D2.doca");
pub const D3: &str = include_str!("../fixtures/D3.doca");
pub const D4: &str = include_str!("../fixtures/D4.doca");
pub const P2: &str = include_str!("../fixtures/P2.doca");
pub const L1: &str = include_str!("../fixtures/L1.classical");
pub const L2: &str = include_str!("../fixtures/L2.classical");

/// `a^m b^n` with `n ≤ m`; non-regular.
pub fn d1() -> Doca {
    decode_doca(D1).expect("D1 fixture")
}

/// Three zero-only states: `p` loops, `q` allows one `a`, `r` is rule-less.
pub fn d2() -> Doca {
    decode_doca(D2).expect("D2 fixture")
}

/// One reset state of period 2.
pub fn d3() -> Doca {
    decode_doca(D3).expect("D3 fixture")
}

/// Single stable state, no reset states: `IL(p(m)) = m`.
pub fn d4() -> Doca {
    decode_doca(D4).expect("D4 fixture")
}

/// The prime family for `n = 2`, start state `count`.
pub fn p2() -> Doca {
    decode_doca(P2).expect("P2 fixture")
}

pub fn l1() -> ClassicalDoca {
    decode_classical(L1).expect("L1 fixture")
}

pub fn l2() -> ClassicalDoca {
    decode_classical(L2).expect("L2 fixture")
}

/// All reset-form fixtures by name.
pub fn all() -> Vec<(&'static str, Doca)> {
    vec![("D1", d1()), ("D2", d2()), ("D3", d3()), ("D4", d4()), ("P2", p2())]
}

/// Four reset states with periods (7, 4, 6, 8), `goto_{s1}(1) = r`.
pub fn four_periods() -> Doca {
    let stable = ["p", "q", "r", "x1", "x2", "x3", "x4", "x5"];
    let mut b = DocaBuilder::new().letters(["a", "b", "c"]).stable(stable);
    for (name, per) in [("s", 7u32), ("s1", 4), ("s2", 6), ("s3", 8)] {
        let goto: Vec<(u32, &str)> = (0..per)
            .map(|c| (c, if name == "s1" && c == 1 { "r" } else { "p" }))
            .collect();
        b = b.reset(name, per, &goto);
    }
    b.rule("p", "a", 1, "q", -1)
        .rule("p", "b", 1, "s1", 0)
        .rule("p", "c", 1, "p", 1)
        .build()
        .expect("four-period fixture")
}

/// Union of two renamed copies of D1: `p,q` and `p2,q2`.
pub fn d1_twice() -> Doca {
    DocaBuilder::new()
        .letters(["a", "b"])
        .stable(["p", "q", "p2", "q2"])
        .rule("p", "a", 0, "p", 1)
        .rule("p", "a", 1, "p", 1)
        .rule("p", "b", 1, "q", -1)
        .rule("q", "b", 1, "q", -1)
        .rule("p2", "a", 0, "p2", 1)
        .rule("p2", "a", 1, "p2", 1)
        .rule("p2", "b", 1, "q2", -1)
        .rule("q2", "b", 1, "q2", -1)
        .build()
        .expect("D1 union fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_prime_family;
    use crate::model::{encode_doca, validate_doca};

    #[test]
    fn fixtures_validate() {
        for (name, d) in all() {
            let rep = validate_doca(&d);
            assert!(rep.ok, "{name}: {:?}", rep.violations);
        }
        assert!(validate_doca(&four_periods()).ok);
        assert!(validate_doca(&d1_twice()).ok);
    }

    #[test]
    fn p2_file_matches_generator() {
        let (d, _) = gen_prime_family(2);
        assert_eq!(encode_doca(&d), P2);
    }

    #[test]
    fn k_accessor() {
        let ks: Vec<usize> = all().iter().map(|(_, d)| d.k()).collect();
        assert_eq!(ks, vec![2, 3, 3, 1, 5]);
    }
}
