//! Two-sided symmetric-difference ratios along ball sequences in
//! discrete groups: boxes in free abelian groups, breadth-first balls in
//! the integer Heisenberg group and the free group on two generators.
//!
//! Everything is exact set arithmetic on hashed element encodings.

use crate::error::{Error, Result};
use crate::tolerances::FOLNER_BALL_BUDGET;
use serde::Serialize;
use std::collections::HashSet;
use std::hash::{BuildHasherDefault, Hasher};

/// Multiply-shift hasher; the default hasher is needlessly slow for the
/// hundred-million membership probes the reports perform.
#[derive(Default)]
pub struct MixHasher(u64);

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.0 ^= self.0 >> 29;
    }
    fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }
}

type FastSet<T> = HashSet<T, BuildHasherDefault<MixHasher>>;

/// The supported discrete groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    /// free abelian of the given rank (1..=3 supported)
    Zn(u32),
    /// integer Heisenberg group (upper unitriangular 3x3)
    Heisenberg3,
    /// free group on two generators
    Free2,
}

/// Group element: integer tuple or packed reduced word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Tuple([i64; 3]),
    /// reduced word, 2 bits per letter (a, A, b, B), low bits first,
    /// with explicit length
    Word { bits: u64, len: u8 },
}

const WORD_CAP: u8 = 31;

fn letter_inv(l: u64) -> u64 {
    l ^ 1
}

impl Elem {
    fn word_push(bits: u64, len: u8, letter: u64) -> (u64, u8) {
        if len > 0 {
            let last = (bits >> (2 * (len - 1))) & 3;
            if last == letter_inv(letter) {
                return (bits & !(3 << (2 * (len - 1))), len - 1);
            }
        }
        assert!(len < WORD_CAP, "word length cap exceeded");
        (bits | (letter << (2 * len)), len + 1)
    }
}

/// A discrete group with its standard generating set.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteGroup {
    pub kind: GroupKind,
}

impl DiscreteGroup {
    pub fn new(kind: GroupKind) -> Result<Self> {
        if let GroupKind::Zn(n) = kind {
            if !(1..=3).contains(&n) {
                return Err(Error::invalid("rank must be 1..=3"));
            }
        }
        Ok(Self { kind })
    }

    pub fn identity(&self) -> Elem {
        match self.kind {
            GroupKind::Zn(_) | GroupKind::Heisenberg3 => Elem::Tuple([0; 3]),
            GroupKind::Free2 => Elem::Word { bits: 0, len: 0 },
        }
    }

    pub fn generators(&self) -> Vec<Elem> {
        match self.kind {
            GroupKind::Zn(n) => {
                let mut g = Vec::new();
                for i in 0..n as usize {
                    let mut t = [0i64; 3];
                    t[i] = 1;
                    g.push(Elem::Tuple(t));
                    t[i] = -1;
                    g.push(Elem::Tuple(t));
                }
                g
            }
            GroupKind::Heisenberg3 => vec![
                Elem::Tuple([1, 0, 0]),
                Elem::Tuple([-1, 0, 0]),
                Elem::Tuple([0, 1, 0]),
                Elem::Tuple([0, -1, 0]),
            ],
            GroupKind::Free2 => (0..4)
                .map(|l| Elem::Word { bits: l, len: 1 })
                .collect(),
        }
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        match (self.kind, x, y) {
            (GroupKind::Zn(_), Elem::Tuple(a), Elem::Tuple(b)) => {
                Elem::Tuple([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
            }
            (GroupKind::Heisenberg3, Elem::Tuple(a), Elem::Tuple(b)) => Elem::Tuple([
                a[0] + b[0],
                a[1] + b[1],
                a[2] + b[2] + a[0] * b[1],
            ]),
            (GroupKind::Free2, Elem::Word { bits, len }, Elem::Word { bits: b2, len: l2 }) => {
                let (mut bits, mut len) = (*bits, *len);
                for i in 0..*l2 {
                    let letter = (b2 >> (2 * i)) & 3;
                    (bits, len) = Elem::word_push(bits, len, letter);
                }
                Elem::Word { bits, len }
            }
            _ => unreachable!("element kind mismatch"),
        }
    }

    pub fn inv(&self, x: &Elem) -> Elem {
        match (self.kind, x) {
            (GroupKind::Zn(_), Elem::Tuple(a)) => Elem::Tuple([-a[0], -a[1], -a[2]]),
            (GroupKind::Heisenberg3, Elem::Tuple(a)) => {
                Elem::Tuple([-a[0], -a[1], a[0] * a[1] - a[2]])
            }
            (GroupKind::Free2, Elem::Word { bits, len }) => {
                let (mut nb, mut nl) = (0u64, 0u8);
                for i in (0..*len).rev() {
                    let letter = (bits >> (2 * i)) & 3;
                    (nb, nl) = Elem::word_push(nb, nl, letter_inv(letter));
                }
                Elem::Word { bits: nb, len: nl }
            }
            _ => unreachable!("element kind mismatch"),
        }
    }
}

/// A candidate set: box for free abelian groups, breadth-first ball
/// otherwise. Always contains the identity.
#[derive(Debug, Clone)]
pub struct FolnerCandidate {
    pub index: u32,
    pub elements: FastSet<Elem>,
}

/// `ball(group, n)`: the box `[0, n)^k` for the free abelian groups and
/// the radius-`n` word ball otherwise.
pub fn ball(group: &DiscreteGroup, n: u32) -> Result<FolnerCandidate> {
    let elements: FastSet<Elem> = match group.kind {
        GroupKind::Zn(rank) => {
            let side = n.max(1) as i64;
            let size = (side as u128).pow(rank);
            if size > FOLNER_BALL_BUDGET as u128 {
                return Err(Error::budget(format!("box of {size} elements")));
            }
            let mut set = FastSet::default();
            let mut idx = [0i64; 3];
            loop {
                set.insert(Elem::Tuple(idx));
                let mut d = 0;
                loop {
                    idx[d] += 1;
                    if idx[d] < side && d < rank as usize {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                    if d == rank as usize {
                        return Ok(FolnerCandidate {
                            index: n,
                            elements: set,
                        });
                    }
                }
            }
        }
        _ => bfs_ball(group, n)?,
    };
    Ok(FolnerCandidate {
        index: n,
        elements,
    })
}

fn bfs_ball(group: &DiscreteGroup, n: u32) -> Result<FastSet<Elem>> {
    let mut set = FastSet::default();
    let mut frontier = vec![group.identity()];
    set.insert(group.identity());
    let gens = group.generators();
    for _ in 0..n {
        let mut next = Vec::new();
        for x in frontier {
            for g in &gens {
                let y = group.mul(&x, g);
                if set.insert(y) {
                    next.push(y);
                    if set.len() > FOLNER_BALL_BUDGET {
                        return Err(Error::budget(format!(
                            "ball exceeded {FOLNER_BALL_BUDGET} elements"
                        )));
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(set)
}

/// `|F symdiff g2^{-1} F g1| / |F|` by exact counting.
pub fn two_sided_ratio(
    group: &DiscreteGroup,
    candidate: &FolnerCandidate,
    g1: &Elem,
    g2: &Elem,
) -> f64 {
    let f = &candidate.elements;
    if f.is_empty() {
        return 0.0;
    }
    // |F symdiff S| = 2 (|F| - |F ∩ S|) since |S| = |F|;
    // x in g2^{-1} F g1 iff g2 x g1^{-1} in F
    let g1inv = group.inv(g1);
    let mut common = 0usize;
    for x in f {
        let y = group.mul(&group.mul(g2, x), &g1inv);
        if f.contains(&y) {
            common += 1;
        }
    }
    2.0 * (f.len() - common) as f64 / f.len() as f64
}

/// One row of the discrete-group report.
#[derive(Debug, Clone, Serialize)]
pub struct FolnerRow {
    pub group: String,
    pub n: u32,
    pub ball_size: usize,
    pub sup_ratio: f64,
}

pub fn group_name(kind: GroupKind) -> String {
    match kind {
        GroupKind::Zn(n) => format!("z{n}"),
        GroupKind::Heisenberg3 => "heisenberg3".into(),
        GroupKind::Free2 => "f2".into(),
    }
}

/// Sup over translation pairs in the radius-`k_radius` generator ball of
/// the two-sided ratio, for each candidate index.
pub fn folner_report(
    group: &DiscreteGroup,
    indices: &[u32],
    k_radius: u32,
) -> Result<Vec<FolnerRow>> {
    let compact: Vec<Elem> = bfs_ball(group, k_radius)?.into_iter().collect();
    let mut pairs: Vec<(Elem, Elem)> = Vec::new();
    for a in &compact {
        for b in &compact {
            pairs.push((*a, *b));
        }
    }
    pairs.sort_unstable();
    let mut rows = Vec::new();
    for &n in indices {
        let candidate = ball(group, n)?;
        let sup = pairs
            .iter()
            .map(|(g1, g2)| two_sided_ratio(group, &candidate, g1, g2))
            .fold(0.0, f64::max);
        rows.push(FolnerRow {
            group: group_name(group.kind),
            n,
            ball_size: candidate.elements.len(),
            sup_ratio: sup,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(kind: GroupKind) -> DiscreteGroup {
        DiscreteGroup::new(kind).unwrap()
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball(&g(GroupKind::Zn(2)), 3).unwrap().elements.len(), 9);
        assert_eq!(ball(&g(GroupKind::Free2), 2).unwrap().elements.len(), 17);
        assert_eq!(ball(&g(GroupKind::Free2), 0).unwrap().elements.len(), 1);
        assert_eq!(ball(&g(GroupKind::Zn(2)), 0).unwrap().elements.len(), 1);
    }

    #[test]
    fn free_group_word_arithmetic() {
        let f2 = g(GroupKind::Free2);
        let a = Elem::Word { bits: 0, len: 1 };
        let ainv = f2.inv(&a);
        assert_eq!(f2.mul(&a, &ainv), f2.identity());
        // associativity on random words
        let b = Elem::Word { bits: 2, len: 1 };
        let w1 = f2.mul(&a, &b);
        let w2 = f2.mul(&b, &f2.inv(&a));
        assert_eq!(
            f2.mul(&f2.mul(&w1, &w2), &w1),
            f2.mul(&w1, &f2.mul(&w2, &w1))
        );
    }

    #[test]
    fn heisenberg_group_law() {
        let h = g(GroupKind::Heisenberg3);
        let a = Elem::Tuple([1, 0, 0]);
        let b = Elem::Tuple([0, 1, 0]);
        // a b = (1, 1, 1), b a = (1, 1, 0): the commutator is central
        assert_eq!(h.mul(&a, &b), Elem::Tuple([1, 1, 1]));
        assert_eq!(h.mul(&b, &a), Elem::Tuple([1, 1, 0]));
        for x in [a, b, h.mul(&a, &b)] {
            assert_eq!(h.mul(&x, &h.inv(&x)), h.identity());
        }
    }

    #[test]
    fn z1_translation_ratio() {
        let z = g(GroupKind::Zn(1));
        let f = ball(&z, 10).unwrap();
        let plus = Elem::Tuple([1, 0, 0]);
        let r = two_sided_ratio(&z, &f, &plus, &z.identity());
        assert!((r - 2.0 / 10.0).abs() < 1e-15);
        let r0 = two_sided_ratio(&z, &f, &z.identity(), &z.identity());
        assert_eq!(r0, 0.0);
    }

    #[test]
    fn ratios_bounded_by_two() {
        let f2 = g(GroupKind::Free2);
        let f = ball(&f2, 4).unwrap();
        for g1 in f2.generators() {
            for g2 in f2.generators() {
                let r = two_sided_ratio(&f2, &f, &g1, &g2);
                assert!((0.0..=2.0).contains(&r));
            }
        }
    }

    #[test]
    fn free_group_is_not_amenable_here() {
        let f2 = g(GroupKind::Free2);
        for n in 1..=8 {
            let f = ball(&f2, n).unwrap();
            let gen = Elem::Word { bits: 0, len: 1 };
            let r = two_sided_ratio(&f2, &f, &gen, &f2.identity());
            assert!(r >= 0.4, "n = {n}: ratio {r}");
        }
    }

    #[test]
    fn z2_box_ratio_bound() {
        let z2 = g(GroupKind::Zn(2));
        let rows = folner_report(&z2, &[10, 20], 1).unwrap();
        for row in rows {
            let n = row.n as f64;
            assert!(row.sup_ratio <= 4.0 / n + 4.0 / (n * n) + 1e-12);
            assert!(row.sup_ratio > 0.0);
        }
    }

    #[test]
    fn heisenberg_trend_decreases() {
        let h = g(GroupKind::Heisenberg3);
        let rows = folner_report(&h, &[4, 8, 16], 2).unwrap();
        assert!(rows[1].sup_ratio <= rows[0].sup_ratio + 1e-12);
        assert!(rows[2].sup_ratio <= rows[1].sup_ratio + 1e-12);
    }
}

