//! Golomb rulers and `(M+1, S)`-nets built from permutations of `[S] x [S]`.

use rand::{seq::index::sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lexicographically first shortest Golomb ruler of each order 2..=12.
const OPTIMAL_RULERS: [&[u32]; 11] = [
    &[0, 1],
    &[0, 1, 3],
    &[0, 1, 4, 6],
    &[0, 1, 4, 9, 11],
    &[0, 1, 4, 10, 12, 17],
    &[0, 1, 4, 10, 18, 23, 25],
    &[0, 1, 4, 9, 15, 22, 32, 34],
    &[0, 1, 5, 12, 25, 27, 35, 41, 44],
    &[0, 1, 6, 10, 23, 26, 34, 41, 53, 55],
    &[0, 1, 4, 13, 28, 33, 47, 54, 64, 70, 72],
    &[0, 2, 6, 24, 29, 40, 43, 55, 68, 75, 76, 85],
];

pub const MIN_TABLE_ORDER: usize = 2;
pub const MAX_TABLE_ORDER: usize = 12;

/// Rows of `[S]` that are checked per permutation pair above the exhaustive
/// bound.
const SAMPLED_ROWS: usize = 64;

/// Default side length up to which [`verify_net`] is exhaustive.
pub const DEFAULT_EXHAUSTIVE_BOUND: usize = 1024;

/// A ruler `0 = d_0 < d_1 < ... < d_M`. The Golomb property is not implied;
/// see [`GolombRuler`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Ruler {
    marks: Vec<u32>,
}

impl Ruler {
    pub fn new(marks: Vec<u32>) -> Result<Self> {
        if marks.first() != Some(&0) {
            return Err(Error::InvalidRuler {
                marks,
                reason: "first mark must be 0".into(),
            });
        }
        if marks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRuler {
                marks,
                reason: "marks must be strictly increasing".into(),
            });
        }
        Ok(Self { marks })
    }

    pub fn marks(&self) -> &[u32] {
        &self.marks
    }

    /// Number of marks, `M + 1`.
    pub fn order(&self) -> usize {
        self.marks.len()
    }

    /// Largest mark, `d_M`.
    pub fn length(&self) -> u32 {
        *self.marks.last().expect("ruler has at least one mark")
    }

    pub fn is_golomb(&self) -> bool {
        verify_ruler(&self.marks)
    }

    /// First positive difference that occurs twice, if any.
    pub fn repeated_difference(&self) -> Option<u32> {
        let mut seen = std::collections::HashSet::new();
        for (j, &dj) in self.marks.iter().enumerate() {
            for &di in &self.marks[..j] {
                if !seen.insert(dj - di) {
                    return Some(dj - di);
                }
            }
        }
        None
    }
}

impl TryFrom<Vec<u32>> for Ruler {
    type Error = Error;

    fn try_from(marks: Vec<u32>) -> Result<Self> {
        Ruler::new(marks)
    }
}

impl From<Ruler> for Vec<u32> {
    fn from(r: Ruler) -> Self {
        r.marks
    }
}

/// A ruler whose positive differences are pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GolombRuler(Ruler);

impl GolombRuler {
    pub fn new(marks: Vec<u32>) -> Result<Self> {
        let ruler = Ruler::new(marks)?;
        match ruler.repeated_difference() {
            None => Ok(Self(ruler)),
            Some(d) => Err(Error::InvalidRuler {
                marks: ruler.marks,
                reason: format!("difference {d} occurs more than once"),
            }),
        }
    }

    pub fn into_ruler(self) -> Ruler {
        self.0
    }
}

impl std::ops::Deref for GolombRuler {
    type Target = Ruler;

    fn deref(&self) -> &Ruler {
        &self.0
    }
}

impl From<GolombRuler> for Ruler {
    fn from(g: GolombRuler) -> Self {
        g.0
    }
}

/// Shortest Golomb ruler with `order` marks from the built-in table.
pub fn optimal_ruler(order: usize) -> Result<GolombRuler> {
    if !(MIN_TABLE_ORDER..=MAX_TABLE_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder {
            order,
            min: MIN_TABLE_ORDER,
            max: MAX_TABLE_ORDER,
        });
    }
    GolombRuler::new(OPTIMAL_RULERS[order - MIN_TABLE_ORDER].to_vec())
}

/// True iff `marks` starts at 0, is strictly increasing and has pairwise
/// distinct positive differences.
pub fn verify_ruler(marks: &[u32]) -> bool {
    if marks.first() != Some(&0) || marks.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let len = *marks.last().unwrap() as usize;
    let mut seen = vec![false; len + 1];
    for (j, &dj) in marks.iter().enumerate() {
        for &di in &marks[..j] {
            let d = (dj - di) as usize;
            if seen[d] {
                return false;
            }
            seen[d] = true;
        }
    }
    true
}

/// Least prime factor of `s`.
pub fn lpf(s: u64) -> Result<u64> {
    if s < 2 {
        return Err(Error::Domain(format!("lpf undefined for {s}")));
    }
    let mut d = 2;
    while d * d <= s {
        if s % d == 0 {
            return Ok(d);
        }
        d += 1;
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermKind {
    /// `pi_k(i, j) = (j, i + (k-1) j) mod S`.
    Shift,
    /// `pi_k(i, j) = (-(k-1) i + j, (1 - (k-1)^2) i + (k-1) j) mod S`; each map
    /// is its own inverse.
    Involution,
}

impl Default for PermKind {
    fn default() -> Self {
        PermKind::Involution
    }
}

impl std::str::FromStr for PermKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(PermKind::Shift),
            "involution" => Ok(PermKind::Involution),
            other => Err(Error::InvalidParams(format!(
                "unknown permutation family {other:?} (expected \"shift\" or \"involution\")"
            ))),
        }
    }
}

/// `M + 1` permutations of `[S] x [S]`, with `pi_0` the identity.
///
/// Cells are addressed as `i * S + j`. Both directions are tabulated since
/// the decoder needs the inverse map once per flipped bit and the encoder
/// needs the forward map for every row it assembles.
#[derive(Clone, Debug)]
pub struct PermFamily {
    side: usize,
    memory: usize,
    kind: PermKind,
    forward: Vec<Vec<u32>>,
    inverse: Vec<Vec<u32>>,
    lpf_ok: bool,
}

impl PermFamily {
    /// Builds the family. The maps are constructed even when `M > lpf(S)`;
    /// in that case [`PermFamily::satisfies_lpf`] is false and the family is
    /// generally not a net.
    pub fn build(side: usize, memory: usize, kind: PermKind) -> Result<Self> {
        if side < 2 {
            return Err(Error::Domain(format!("block side must be at least 2, got {side}")));
        }
        if side > u32::MAX as usize / side {
            return Err(Error::Domain(format!("block side {side} is too large")));
        }
        let n = side * side;
        let mut forward = Vec::with_capacity(memory + 1);
        let mut inverse = Vec::with_capacity(memory + 1);
        for k in 0..=memory {
            let fwd: Vec<u32> = (0..n)
                .map(|cell| {
                    let (a, b) = map_cell(kind, side, k, cell / side, cell % side);
                    (a * side + b) as u32
                })
                .collect();
            let mut inv = vec![u32::MAX; n];
            for (cell, &img) in fwd.iter().enumerate() {
                debug_assert_eq!(inv[img as usize], u32::MAX, "pi_{k} is not injective");
                inv[img as usize] = cell as u32;
            }
            forward.push(fwd);
            inverse.push(inv);
        }
        Ok(Self {
            side,
            memory,
            kind,
            forward,
            inverse,
            lpf_ok: memory as u64 <= lpf(side as u64)?,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn kind(&self) -> PermKind {
        self.kind
    }

    /// `M <= lpf(S)`, the condition under which both families form a net.
    pub fn satisfies_lpf(&self) -> bool {
        self.lpf_ok
    }

    #[inline]
    pub fn apply(&self, k: usize, i: usize, j: usize) -> (usize, usize) {
        let c = self.forward[k][i * self.side + j] as usize;
        (c / self.side, c % self.side)
    }

    #[inline]
    pub fn apply_inverse(&self, k: usize, a: usize, b: usize) -> (usize, usize) {
        let c = self.inverse[k][a * self.side + b] as usize;
        (c / self.side, c % self.side)
    }

    /// Forward table of `pi_k`: `forward(k)[i*S + j] = pi_k(i, j)` as a cell.
    #[inline]
    pub fn forward(&self, k: usize) -> &[u32] {
        &self.forward[k]
    }

    #[inline]
    pub fn inverse(&self, k: usize) -> &[u32] {
        &self.inverse[k]
    }
}

fn map_cell(kind: PermKind, side: usize, k: usize, i: usize, j: usize) -> (usize, usize) {
    if k == 0 {
        return (i, j);
    }
    let s = side as u128;
    let c = (k as u128 - 1) % s;
    let (i, j) = (i as u128, j as u128);
    let (a, b) = match kind {
        PermKind::Shift => (j, (i + c * j) % s),
        PermKind::Involution => {
            let a = (s - c * i % s + j) % s;
            // 1 - c^2 taken mod S
            let one_minus_c2 = (1 + s - c * c % s) % s;
            (a, (one_minus_c2 * i + c * j) % s)
        }
    };
    (a as usize, b as usize)
}

pub fn build_perm_family(side: usize, memory: usize, kind: PermKind) -> Result<PermFamily> {
    PermFamily::build(side, memory, kind)
}

/// Outcome of a net check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetCheck {
    pub holds: bool,
    /// True when only a sample of rows was examined (together with the
    /// `M <= lpf(S)` precondition).
    pub sampled: bool,
}

/// Checks that any row of `Pi_k` meets any row of `Pi_k'` in exactly one
/// cell, for all distinct `k, k'`. Exhaustive for `S <= 1024`.
pub fn verify_net(family: &PermFamily) -> NetCheck {
    verify_net_with_bound(family, DEFAULT_EXHAUSTIVE_BOUND)
}

pub fn verify_net_with_bound(family: &PermFamily, exhaustive_bound: usize) -> NetCheck {
    let s = family.side;
    let sampled = s > exhaustive_bound;
    let rows: Vec<usize> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
        sample(&mut rng, s, SAMPLED_ROWS.min(s)).into_vec()
    } else {
        (0..s).collect()
    };
    let mut hits = vec![0u32; s];
    for k in 0..=family.memory {
        for k2 in 0..=family.memory {
            if k == k2 {
                continue;
            }
            let fwd = family.forward(k);
            let inv2 = family.inverse(k2);
            for &a in &rows {
                // The row of Pi_k' containing each cell of row a of Pi_k must
                // cover [S] exactly once.
                hits.fill(0);
                for &cell in &fwd[a * s..(a + 1) * s] {
                    hits[inv2[cell as usize] as usize / s] += 1;
                }
                if hits.iter().any(|&h| h != 1) {
                    return NetCheck {
                        holds: false,
                        sampled,
                    };
                }
            }
        }
    }
    NetCheck {
        holds: !sampled || family.lpf_ok,
        sampled,
    }
}
