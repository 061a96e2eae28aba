//! Code parameters, validation and the incidence between bits and component
//! codewords.
//!
//! Blocks are indexed as in the defining constraint: blocks `0..d_M` are the
//! all-zero initialization blocks and constraint `m >= d_M` covers row `i` of
//!
//! ```text
//! ( Pi_M(B[m - d_M]) | ... | Pi_1(B[m - d_1]) | B[m] )
//! ```
//!
//! with `(Pi_k(B))[i][j] = B[pi_k(i, j)]`. Position `p` of that codeword lies in
//! segment `p / S = M - k`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::component::{parity_bits_for_length, ComponentCode};
use crate::nets::{self, PermFamily, PermKind, Ruler};
use crate::{Error, Rate, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Block side `S`.
    pub side: usize,
    /// Memory `M`; each bit is protected by `M + 1` component codewords.
    pub memory: usize,
    pub ruler: Ruler,
    pub perm_kind: PermKind,
    /// Parity columns per block, `r`.
    pub parity_bits: usize,
    /// Frame length `F` in blocks.
    pub frame_len: usize,
    /// Decoding window `W` in blocks.
    pub window: usize,
    /// Iterations per window position.
    pub iterations: usize,
}

impl CodeParams {
    /// Parameters with `r` derived from `(S, M)`.
    pub fn new(
        side: usize,
        memory: usize,
        ruler: impl Into<Ruler>,
        perm_kind: PermKind,
        frame_len: usize,
        window: usize,
        iterations: usize,
    ) -> Self {
        Self {
            side,
            memory,
            ruler: ruler.into(),
            perm_kind,
            parity_bits: derived_parity_bits(side, memory),
            frame_len,
            window,
            iterations,
        }
    }

    /// Parameters using the optimal Golomb ruler of order `M + 1`.
    pub fn with_optimal_ruler(
        side: usize,
        memory: usize,
        perm_kind: PermKind,
        frame_len: usize,
        window: usize,
        iterations: usize,
    ) -> Result<Self> {
        let ruler = nets::optimal_ruler(memory + 1)?;
        Ok(Self::new(side, memory, ruler, perm_kind, frame_len, window, iterations))
    }

    /// The five configurations of the reference simulation table, in order
    /// (S = 669, 409, 307, 179, 47).
    pub fn reference_configs() -> Vec<CodeParams> {
        [
            (669, 3, 725, 21, 3),
            (409, 3, 926, 21, 3),
            (307, 3, 885, 21, 4),
            (179, 4, 1634, 36, 4),
            (47, 4, 912, 48, 6),
        ]
        .into_iter()
        .map(|(s, m, f, w, it)| {
            Self::with_optimal_ruler(s, m, PermKind::Involution, f, w, it)
                .expect("reference memory has a table ruler")
        })
        .collect()
    }

    /// `d_M`.
    pub fn span(&self) -> usize {
        self.ruler.length() as usize
    }

    pub fn component_len(&self) -> usize {
        (self.memory + 1) * self.side
    }

    /// `R = (S - r)(F - W) / (S (F - W) + W r)`.
    pub fn block_rate(&self) -> Rate {
        block_rate(self)
    }

    /// `1 - r / S`.
    pub fn nominal_rate(&self) -> Rate {
        Rate::new((self.side - self.parity_bits) as u64, self.side as u64)
    }

    /// Window size in bits, `W S^2`.
    pub fn window_bits(&self) -> u64 {
        (self.window * self.side * self.side) as u64
    }

    pub fn info_bits_per_block(&self) -> usize {
        self.side * (self.side - self.parity_bits)
    }

    pub fn info_bits_per_frame(&self) -> usize {
        self.info_bits_per_block() * (self.frame_len - self.window)
    }

    pub fn transmitted_bits_per_frame(&self) -> usize {
        self.side * (self.side * (self.frame_len - self.window) + self.window * self.parity_bits)
    }
}

/// `r = ceil(log2((M + 1) S)) + 1`.
pub fn derived_parity_bits(side: usize, memory: usize) -> usize {
    parity_bits_for_length((memory + 1) * side)
}

pub fn block_rate(params: &CodeParams) -> Rate {
    let (s, r) = (params.side as u64, params.parity_bits as u64);
    let (f, w) = (params.frame_len as u64, params.window as u64);
    Rate::new((s - r) * (f - w), s * (f - w) + w * r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "[{tag}] {:<12} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Checks every structural condition on `params`. Never fails; problems are
/// recorded in the report.
pub fn validate(params: &CodeParams) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let ruler = &params.ruler;
    let (s, m) = (params.side, params.memory);

    rep.push(
        "ruler-order",
        ruler.order() == m + 1,
        format!("ruler {:?} has order {}, need M+1 = {}", ruler.marks(), ruler.order(), m + 1),
    );
    rep.push(
        "golomb",
        ruler.is_golomb(),
        match ruler.repeated_difference() {
            None => format!("ruler {:?} has distinct differences", ruler.marks()),
            Some(d) => format!("ruler {:?} repeats difference {d}", ruler.marks()),
        },
    );

    match nets::lpf(s as u64) {
        Ok(p) => {
            rep.push(
                "lpf",
                m as u64 <= p,
                format!("M = {m}, lpf(S = {s}) = {p}"),
            );
            match PermFamily::build(s, m, params.perm_kind) {
                Ok(fam) => {
                    let check = nets::verify_net(&fam);
                    rep.push(
                        "net",
                        check.holds,
                        format!(
                            "{:?} family, {} check",
                            params.perm_kind,
                            if check.sampled { "sampled" } else { "exhaustive" }
                        ),
                    );
                }
                Err(e) => rep.push("net", false, e.to_string()),
            }
        }
        Err(e) => rep.push("lpf", false, e.to_string()),
    }

    let r = derived_parity_bits(s, m);
    rep.push(
        "parity-bits",
        params.parity_bits == r,
        format!("r = {}, derived ceil(log2((M+1)S)) + 1 = {r}", params.parity_bits),
    );
    rep.push(
        "component",
        ComponentCode::build(s, m).is_ok() && params.parity_bits < s,
        format!("component length {} with {} parity bits", (m + 1) * s, params.parity_bits),
    );
    let span = ruler.length() as usize;
    rep.push(
        "window",
        params.window > span,
        format!("W = {}, d_M = {span}", params.window),
    );
    rep.push(
        "frame",
        params.frame_len > params.window,
        format!("F = {}, W = {}", params.frame_len, params.window),
    );
    rep.push(
        "iterations",
        params.iterations >= 1,
        format!("{} iterations per window position", params.iterations),
    );
    rep
}

/// A bit of the block stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitCoord {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// A position within one component codeword.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodewordSlot {
    /// Constraint index, equal to its newest block.
    pub constraint: usize,
    pub row: usize,
    pub position: usize,
}

/// A code instance: parameters together with the tabulated permutations and
/// component code.
#[derive(Clone, Debug)]
pub struct Code {
    params: CodeParams,
    perms: PermFamily,
    component: ComponentCode,
    marks: Vec<usize>,
}

impl Code {
    /// Builds the code, rejecting parameters that fail [`validate`].
    pub fn new(params: CodeParams) -> Result<Self> {
        let report = validate(&params);
        if !report.passed() {
            let reasons: Vec<String> = report
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect();
            return Err(Error::InvalidParams(reasons.join("; ")));
        }
        Self::new_unchecked(params)
    }

    /// Builds the code without the ruler, net and window conditions. Used for
    /// negative controls; the structural minimum (matching ruler order and
    /// the derived `r`) is still required.
    pub fn new_unchecked(params: CodeParams) -> Result<Self> {
        if params.ruler.order() != params.memory + 1 {
            return Err(Error::InvalidParams(format!(
                "ruler order {} does not match M + 1 = {}",
                params.ruler.order(),
                params.memory + 1
            )));
        }
        let component = ComponentCode::build(params.side, params.memory)?;
        if component.parity_bits() != params.parity_bits {
            return Err(Error::InvalidParams(format!(
                "r = {} contradicts the derived value {}",
                params.parity_bits,
                component.parity_bits()
            )));
        }
        if params.parity_bits > params.side {
            return Err(Error::InvalidParams(format!(
                "r = {} exceeds the block side {}",
                params.parity_bits, params.side
            )));
        }
        let perms = PermFamily::build(params.side, params.memory, params.perm_kind)?;
        let marks = params.ruler.marks().iter().map(|&d| d as usize).collect();
        Ok(Self {
            params,
            perms,
            component,
            marks,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn perms(&self) -> &PermFamily {
        &self.perms
    }

    pub fn component(&self) -> &ComponentCode {
        &self.component
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.params.side
    }

    #[inline]
    pub fn memory(&self) -> usize {
        self.params.memory
    }

    /// Ruler marks `d_0..=d_M`.
    #[inline]
    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    #[inline]
    pub fn span(&self) -> usize {
        self.marks[self.params.memory]
    }

    /// The `M + 1` codeword slots holding `bit`, in order of `k`.
    pub fn locate(&self, bit: BitCoord) -> Vec<CodewordSlot> {
        let s = self.side();
        let cell = bit.row * s + bit.col;
        (0..=self.memory())
            .map(|k| {
                let src = self.perms.inverse(k)[cell] as usize;
                CodewordSlot {
                    constraint: bit.block + self.marks[k],
                    row: src / s,
                    position: (self.memory() - k) * s + src % s,
                }
            })
            .collect()
    }

    /// The bit at `position` of row `row` of constraint `constraint`.
    #[inline]
    pub fn member(&self, constraint: usize, row: usize, position: usize) -> BitCoord {
        let s = self.side();
        let k = self.memory() - position / s;
        let cell = self.perms.forward(k)[row * s + position % s] as usize;
        BitCoord {
            block: constraint - self.marks[k],
            row: cell / s,
            col: cell % s,
        }
    }

    /// Contribution of segment `k` of row `row` of a constraint to its
    /// syndrome, given the cells of block `m - d_k`.
    #[inline]
    pub fn segment_syndrome(&self, k: usize, row: usize, cells: &[u8]) -> u32 {
        let s = self.side();
        let fwd = &self.perms.forward(k)[row * s..(row + 1) * s];
        let seg = &self.component.columns()[(self.memory() - k) * s..(self.memory() - k + 1) * s];
        fwd.iter()
            .zip(seg)
            .fold(0, |acc, (&cell, &col)| acc ^ (col & (cells[cell as usize] as u32).wrapping_neg()))
    }

    /// All `(M + 1) S` bits of row `row` of constraint `constraint`, by
    /// codeword position.
    pub fn constraint_members(&self, constraint: usize, row: usize) -> Result<Vec<BitCoord>> {
        if constraint < self.span() {
            return Err(Error::Domain(format!(
                "constraint {constraint} precedes the first constraint d_M = {}",
                self.span()
            )));
        }
        if row >= self.side() {
            return Err(Error::OutOfRange {
                position: row,
                len: self.side(),
            });
        }
        Ok((0..self.component.len())
            .map(|p| self.member(constraint, row, p))
            .collect())
    }

    /// Checks that distinct component codewords touching blocks
    /// `0..block_span` share at most one bit. Exhaustive; meant for small `S`.
    pub fn verify_intersection(&self, block_span: usize) -> bool {
        let s = self.side();
        let span = self.span();
        let mut shared: HashMap<((usize, usize), (usize, usize)), u32> = HashMap::new();
        let mut slots = Vec::with_capacity(self.memory() + 1);
        for block in 0..block_span {
            for row in 0..s {
                for col in 0..s {
                    slots.clear();
                    slots.extend(
                        self.locate(BitCoord { block, row, col })
                            .into_iter()
                            .filter(|sl| sl.constraint >= span)
                            .map(|sl| (sl.constraint, sl.row)),
                    );
                    for (a, &x) in slots.iter().enumerate() {
                        for &y in &slots[a + 1..] {
                            let key = if x < y { (x, y) } else { (y, x) };
                            let count = shared.entry(key).or_insert(0);
                            *count += 1;
                            if *count > 1 || x == y {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// [`Code::verify_intersection`] over `2 d_M + 1` blocks.
    pub fn verify_intersection_default(&self) -> bool {
        self.verify_intersection(2 * self.span() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::optimal_ruler;

    fn small(side: usize, memory: usize, kind: PermKind) -> Code {
        let params = CodeParams::with_optimal_ruler(side, memory, kind, 40, 20, 2).unwrap();
        Code::new(params).unwrap()
    }

    #[test]
    fn reference_row_one_validates() {
        let p = &CodeParams::reference_configs()[0];
        assert_eq!((p.side, p.memory, p.parity_bits), (669, 3, 13));
        assert_eq!(p.ruler.marks(), &[0, 1, 4, 6]);
        let rep = validate(p);
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn lpf_failure_reported() {
        let p = CodeParams::with_optimal_ruler(6, 3, PermKind::Involution, 40, 20, 2).unwrap();
        let rep = validate(&p);
        assert!(!rep.check("lpf").unwrap().passed);
        assert!(!rep.passed());
        assert!(Code::new(p).is_err());
    }

    #[test]
    fn parity_bit_inconsistency_reported() {
        let mut p = CodeParams::reference_configs()[0].clone();
        p.parity_bits = 12;
        let rep = validate(&p);
        assert!(!rep.check("parity-bits").unwrap().passed);
        assert!(Code::new_unchecked(p).is_err());
    }

    #[test]
    fn window_and_frame_checks() {
        let mut p = CodeParams::with_optimal_ruler(7, 3, PermKind::Shift, 10, 6, 1).unwrap();
        let rep = validate(&p);
        assert!(!rep.check("window").unwrap().passed);
        p.window = 7;
        p.frame_len = 7;
        let rep = validate(&p);
        assert!(rep.check("window").unwrap().passed);
        assert!(!rep.check("frame").unwrap().passed);
    }

    #[test]
    fn classical_staircase_locate() {
        let code = small(7, 1, PermKind::Shift);
        let bit = BitCoord { block: 3, row: 1, col: 4 };
        assert_eq!(
            code.locate(bit),
            vec![
                CodewordSlot { constraint: 3, row: 1, position: 7 + 4 },
                CodewordSlot { constraint: 4, row: 4, position: 1 },
            ]
        );
    }

    #[test]
    fn k0_slot_is_rightmost_segment() {
        let code = small(7, 3, PermKind::Involution);
        for row in 0..7 {
            for col in 0..7 {
                let slot = code.locate(BitCoord { block: 9, row, col })[0];
                assert_eq!(slot, CodewordSlot { constraint: 9, row, position: 21 + col });
            }
        }
    }

    #[test]
    fn locate_constraints_follow_ruler() {
        let code = small(7, 3, PermKind::Involution);
        for row in 0..7 {
            for col in 0..7 {
                let m: Vec<usize> = code
                    .locate(BitCoord { block: 2, row, col })
                    .iter()
                    .map(|s| s.constraint)
                    .collect();
                assert_eq!(m, vec![2, 3, 6, 8]);
            }
        }
    }

    #[test]
    fn members_of_first_constraint_reach_into_initialization() {
        let code = small(7, 3, PermKind::Involution);
        let members = code.constraint_members(6, 0).unwrap();
        assert_eq!(members.len(), 28);
        let blocks: Vec<usize> = members.iter().map(|b| b.block).collect();
        assert!(blocks[..7].iter().all(|&b| b == 0));
        assert!(blocks[7..14].iter().all(|&b| b == 2));
        assert!(blocks[21..].iter().all(|&b| b == 6));
        assert!(code.constraint_members(5, 0).is_err());
    }

    #[test]
    fn classical_members_are_transpose_then_row() {
        let code = small(7, 1, PermKind::Involution);
        let members = code.constraint_members(4, 2).unwrap();
        for j in 0..7 {
            assert_eq!(members[j], BitCoord { block: 3, row: j, col: 2 });
            assert_eq!(members[7 + j], BitCoord { block: 4, row: 2, col: j });
        }
    }

    #[test]
    fn reference_rates() {
        let cfgs = CodeParams::reference_configs();
        assert_eq!(format!("{:.5}", to_f64(cfgs[0].block_rate())), "0.98000");
        assert_eq!(format!("{:.5}", to_f64(cfgs[1].block_rate())), "0.97000");
        assert_eq!(cfgs[0].nominal_rate(), Rate::new(656, 669));
    }

    #[test]
    fn block_rate_tends_to_nominal() {
        let mut p = CodeParams::reference_configs()[4].clone();
        let nominal = to_f64(p.nominal_rate());
        let mut last_gap = f64::INFINITY;
        for f in [100, 1_000, 10_000, 1_000_000] {
            p.frame_len = f;
            let gap = nominal - to_f64(p.block_rate());
            assert!(gap > 0.0 && gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-5);
    }

    #[test]
    fn intersection_negative_controls() {
        let bad_ruler = CodeParams::new(
            7,
            3,
            Ruler::new(vec![0, 1, 2, 3]).unwrap(),
            PermKind::Involution,
            40,
            20,
            2,
        );
        assert!(!validate(&bad_ruler).check("golomb").unwrap().passed);
        let code = Code::new_unchecked(bad_ruler).unwrap();
        assert!(!code.verify_intersection_default());

        let good = small(7, 3, PermKind::Involution);
        assert!(good.verify_intersection_default());

        let no_net = CodeParams::new(6, 3, optimal_ruler(4).unwrap(), PermKind::Involution, 40, 20, 2);
        assert!(!Code::new_unchecked(no_net).unwrap().verify_intersection_default());
    }

    fn to_f64(r: Rate) -> f64 {
        *r.numer() as f64 / *r.denom() as f64
    }
}
