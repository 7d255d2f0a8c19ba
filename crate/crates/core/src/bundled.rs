//! Example CSPs shipped with the crate.

use std::collections::BTreeSet;

use crate::csp::{atom, Atom, Csp};
use crate::format::parse_csp;

pub const CROSSWORD: &str = include_str!("../data/crossword.csp");
pub const EXAMPLE_1I: &str = include_str!("../data/example1i.csp");
pub const EXAMPLE_1II: &str = include_str!("../data/example1ii.csp");
pub const TRIANGLE: &str = include_str!("../data/triangle.csp");

/// `(file name, contents)` of every bundled example.
pub const ALL: [(&str, &str); 4] = [
    ("crossword.csp", CROSSWORD),
    ("example1i.csp", EXAMPLE_1I),
    ("example1ii.csp", EXAMPLE_1II),
    ("triangle.csp", TRIANGLE),
];

pub const FIVE_LETTER: [&str; 5] = ["HOSES", "LASER", "SAILS", "SHEET", "STEER"];
pub const FOUR_LETTER: [&str; 5] = ["HEEL", "HIKE", "KEEL", "KNOT", "LINE"];
pub const THREE_LETTER: [&str; 5] = ["AFT", "ALE", "EEL", "LEE", "TIE"];

/// Word length of each of the eight positions.
pub const POSITION_LENGTHS: [usize; 8] = [5, 5, 5, 4, 4, 3, 3, 5];

/// Grid crossings `(a, i, b, j)`: letter `i` of position `a` is letter `j`
/// of position `b`. Positions are 1-based, letters 0-based.
pub const CROSSINGS: [(usize, usize, usize, usize); 12] = [
    (1, 2, 2, 0),
    (1, 4, 3, 0),
    (4, 1, 2, 2),
    (4, 2, 5, 0),
    (4, 3, 3, 2),
    (7, 0, 2, 3),
    (7, 1, 5, 1),
    (7, 2, 3, 3),
    (8, 0, 6, 1),
    (8, 2, 2, 4),
    (8, 3, 5, 2),
    (8, 4, 3, 4),
];

/// The unique solution, position by position.
pub const CROSSWORD_SOLUTION: [&str; 8] = ["HOSES", "SAILS", "STEER", "HIKE", "KEEL", "ALE", "LEE", "LASER"];

fn words_of_length(len: usize) -> &'static [&'static str] {
    match len {
        5 => &FIVE_LETTER,
        4 => &FOUR_LETTER,
        3 => &THREE_LETTER,
        _ => &[],
    }
}

/// Builds the crossword from the word lists and crossings. Variables are
/// `x1 … x8`; each crossing becomes one constraint on the two positions,
/// smaller position first.
pub fn crossword_from_grid() -> Csp {
    let mut p = Csp::new();
    for (k, &len) in POSITION_LENGTHS.iter().enumerate() {
        p.add_variable(&format!("x{}", k + 1), words_of_length(len).iter().copied())
            .expect("distinct names");
    }
    for &(a, i, b, j) in &CROSSINGS {
        let ((lo, li), (hi, hj)) = if a < b { ((a, i), (b, j)) } else { ((b, j), (a, i)) };
        let letter = |w: &str, k: usize| w.as_bytes()[k];
        let mut tuples: BTreeSet<Vec<Atom>> = BTreeSet::new();
        for u in words_of_length(POSITION_LENGTHS[lo - 1]) {
            for w in words_of_length(POSITION_LENGTHS[hi - 1]) {
                if letter(u, li) == letter(w, hj) {
                    tuples.insert(vec![atom(u), atom(w)]);
                }
            }
        }
        let name = format!("C_{lo}_{hi}");
        p.add_constraint_on(Some(&name), vec![lo - 1, hi - 1], tuples)
            .expect("tuples drawn from the domains");
    }
    p
}

pub fn crossword() -> Csp {
    parse_csp(CROSSWORD).expect("bundled crossword parses")
}

pub fn example_one_i() -> Csp {
    parse_csp(EXAMPLE_1I).expect("bundled example parses")
}

pub fn example_one_ii() -> Csp {
    parse_csp(EXAMPLE_1II).expect("bundled example parses")
}

pub fn triangle() -> Csp {
    parse_csp(TRIANGLE).expect("bundled example parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::print_csp;

    #[test]
    fn crossword_file_matches_grid() {
        assert_eq!(crossword(), crossword_from_grid());
        let body: String = CROSSWORD.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        assert_eq!(print_csp(&crossword_from_grid()), body);
    }

    #[test]
    fn crossword_shape() {
        let p = crossword();
        assert_eq!(p.num_variables(), 8);
        assert_eq!(p.constraints().len(), 12);
        let c12 = p.constraints().iter().find(|c| c.scope() == [0, 1]).unwrap();
        assert_eq!(c12.tuples().len(), 6);
        assert!(c12.tuples().contains(&vec![atom("HOSES"), atom("SAILS")]));
    }

    #[test]
    fn all_bundled_parse() {
        for (name, text) in ALL {
            assert!(parse_csp(text).is_ok(), "{name}");
        }
    }
}
