//! Oracles shared by the integration tests. They are written directly from
//! the definitions and deliberately avoid the crate's tabulated maps.

#![allow(dead_code)]

use gsc::{Block, Code, CodeParams, PermKind, Ruler};

/// `pi_k(i, j)` straight from the closed forms, with `pi_0` the identity.
pub fn pi(kind: PermKind, s: usize, k: usize, i: usize, j: usize) -> (usize, usize) {
    if k == 0 {
        return (i, j);
    }
    let s = s as i128;
    let c = k as i128 - 1;
    let (i, j) = (i as i128, j as i128);
    let (a, b) = match kind {
        PermKind::Shift => (j, i + c * j),
        PermKind::Involution => (-c * i + j, (1 - c * c) * i + c * j),
    };
    (a.rem_euclid(s) as usize, b.rem_euclid(s) as usize)
}

/// Row `i` of constraint `m` assembled as
/// `(Pi_M(B[m - d_M]) | ... | Pi_1(B[m - d_1]) | B[m])`, with `blocks`
/// indexed by global block number.
pub fn constraint_row(code: &Code, blocks: &[Block], m: usize, i: usize) -> Vec<u8> {
    let p = code.params();
    let s = p.side;
    let marks = p.ruler.marks();
    let mut word = Vec::with_capacity((p.memory + 1) * s);
    for k in (0..=p.memory).rev() {
        let b = &blocks[m - marks[k] as usize];
        for j in 0..s {
            let (a, c) = pi(p.perm_kind, s, k, i, j);
            word.push(b.get(a, c));
        }
    }
    word
}

/// Syndrome of a constraint row recomputed from scratch.
pub fn full_syndrome(code: &Code, blocks: &[Block], m: usize, i: usize) -> u32 {
    code.component()
        .syndrome(&constraint_row(code, blocks, m, i))
        .expect("row length matches")
        .0
}

/// Whether every constraint row fully inside `blocks` has zero syndrome.
pub fn all_constraints_satisfied(code: &Code, blocks: &[Block]) -> bool {
    let span = code.span();
    (span..blocks.len()).all(|m| (0..code.side()).all(|i| full_syndrome(code, blocks, m, i) == 0))
}

/// Small configurations used throughout: `(S, M, ruler)`.
pub fn small_params(frame_len: usize, window: usize, iterations: usize) -> Vec<CodeParams> {
    [
        (7usize, 1usize, vec![0u32, 1]),
        (11, 2, vec![0, 1, 3]),
        (7, 3, vec![0, 1, 4, 6]),
        (13, 3, vec![0, 1, 4, 6]),
        (11, 4, vec![0, 1, 4, 9, 11]),
    ]
    .into_iter()
    .flat_map(|(s, m, marks)| {
        let ruler = Ruler::new(marks).unwrap();
        [PermKind::Shift, PermKind::Involution].map(|kind| {
            CodeParams::new(s, m, ruler.clone(), kind, frame_len, window, iterations)
        })
    })
    .collect()
}
