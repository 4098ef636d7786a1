//! Built-in finitely generated groups with unique normal forms.
//!
//! Three families are supported: the lattices ℤ^d with the standard basis,
//! the lamplighter group ℤ/2 ≀ ℤ generated by the lamp toggle `a` and the
//! cursor shift `t`, and free groups F_k on `a, b, c, ...`. Every element has
//! exactly one [`Element`] representation, so elements can be used as map
//! keys and the vertex/element correspondence of a ball is a bijection.

use alloc::{
    collections::{BTreeSet, VecDeque},
    format,
    string::{String, ToString},
    vec,
    vec::Vec,
};
use core::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Zd(usize),
    Lamplighter,
    FreeGroup(usize),
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Zd(d) => write!(f, "z{d}"),
            GroupKind::Lamplighter => f.write_str("lamplighter"),
            GroupKind::FreeGroup(k) => write!(f, "free{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    /// Index of the inverse generator (may be the generator itself).
    pub inverse: usize,
}

/// Normal form of a group element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// Integer vector of ℤ^d.
    Lattice(Vec<i64>),
    /// Lit lamp positions (sorted, distinct) and cursor position.
    Lamplighter { lamps: Vec<i64>, cursor: i64 },
    /// Freely reduced word. Letter `i + 1` is generator `i`, `-(i + 1)` its inverse.
    Word(Vec<i32>),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Lattice(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Element::Lamplighter { lamps, cursor } => {
                f.write_str("[")?;
                for (i, x) in lamps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]@{cursor}")
            }
            Element::Word(w) => {
                if w.is_empty() {
                    return f.write_str("1");
                }
                for &letter in w {
                    let base = (letter.unsigned_abs() - 1) as u8;
                    let c = if letter > 0 { b'a' + base } else { b'A' + base };
                    write!(f, "{}", c as char)?;
                }
                Ok(())
            }
        }
    }
}

/// A supported group together with its symmetric generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<Generator>,
}

const LAMP_TOGGLE: usize = 0;
const CURSOR_RIGHT: usize = 1;
const CURSOR_LEFT: usize = 2;

impl GroupSpec {
    pub fn new(kind: GroupKind) -> Result<Self> {
        let generators = match kind {
            GroupKind::Zd(d) => {
                if d == 0 {
                    return Err(Error::UnsupportedGroup("z0".into()));
                }
                (0..d)
                    .flat_map(|i| {
                        [
                            Generator { label: format!("e{}", i + 1), inverse: 2 * i + 1 },
                            Generator { label: format!("-e{}", i + 1), inverse: 2 * i },
                        ]
                    })
                    .collect()
            }
            GroupKind::Lamplighter => vec![
                Generator { label: "a".into(), inverse: LAMP_TOGGLE },
                Generator { label: "t".into(), inverse: CURSOR_LEFT },
                Generator { label: "T".into(), inverse: CURSOR_RIGHT },
            ],
            GroupKind::FreeGroup(k) => {
                if k == 0 || k > 26 {
                    return Err(Error::UnsupportedGroup(format!("free{k}")));
                }
                (0..k)
                    .flat_map(|i| {
                        let lower = (b'a' + i as u8) as char;
                        let upper = (b'A' + i as u8) as char;
                        [
                            Generator { label: lower.to_string(), inverse: 2 * i + 1 },
                            Generator { label: upper.to_string(), inverse: 2 * i },
                        ]
                    })
                    .collect()
            }
        };
        Ok(Self { kind, generators })
    }

    pub fn zd(d: usize) -> Result<Self> {
        Self::new(GroupKind::Zd(d))
    }

    pub fn lamplighter() -> Self {
        Self::new(GroupKind::Lamplighter).expect("lamplighter is always supported")
    }

    pub fn free(k: usize) -> Result<Self> {
        Self::new(GroupKind::FreeGroup(k))
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn identity(&self) -> Element {
        match self.kind {
            GroupKind::Zd(d) => Element::Lattice(vec![0; d]),
            GroupKind::Lamplighter => Element::Lamplighter { lamps: Vec::new(), cursor: 0 },
            GroupKind::FreeGroup(_) => Element::Word(Vec::new()),
        }
    }

    /// Whether `x` is a well-formed normal form of this group.
    pub fn contains(&self, x: &Element) -> bool {
        match (self.kind, x) {
            (GroupKind::Zd(d), Element::Lattice(v)) => v.len() == d,
            (GroupKind::Lamplighter, Element::Lamplighter { lamps, .. }) => lamps.windows(2).all(|w| w[0] < w[1]),
            (GroupKind::FreeGroup(k), Element::Word(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= k) && w.windows(2).all(|p| p[0] != -p[1])
            }
            _ => false,
        }
    }

    pub fn generator(&self, i: usize) -> Element {
        assert!(i < self.generators.len(), "generator index {i} out of range");
        match self.kind {
            GroupKind::Zd(d) => {
                let mut v = vec![0; d];
                v[i / 2] = if i.is_multiple_of(2) { 1 } else { -1 };
                Element::Lattice(v)
            }
            GroupKind::Lamplighter => match i {
                LAMP_TOGGLE => Element::Lamplighter { lamps: vec![0], cursor: 0 },
                CURSOR_RIGHT => Element::Lamplighter { lamps: Vec::new(), cursor: 1 },
                _ => Element::Lamplighter { lamps: Vec::new(), cursor: -1 },
            },
            GroupKind::FreeGroup(_) => Element::Word(vec![free_letter(i)]),
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Lattice(x), Element::Lattice(y)) => {
                debug_assert_eq!(x.len(), y.len());
                Element::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Element::Lamplighter { lamps: la, cursor: ca }, Element::Lamplighter { lamps: lb, cursor: cb }) => {
                let shifted: Vec<i64> = lb.iter().map(|p| p + ca).collect();
                Element::Lamplighter { lamps: symmetric_difference(la, &shifted), cursor: ca + cb }
            }
            (Element::Word(x), Element::Word(y)) => {
                let mut out = x.clone();
                for &letter in y {
                    if out.last() == Some(&-letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                Element::Word(out)
            }
            _ => panic!("cannot multiply elements of different groups: {a} and {b}"),
        }
    }

    pub fn inverse(&self, a: &Element) -> Element {
        match a {
            Element::Lattice(x) => Element::Lattice(x.iter().map(|p| -p).collect()),
            Element::Lamplighter { lamps, cursor } => {
                Element::Lamplighter { lamps: lamps.iter().map(|p| p - cursor).collect(), cursor: -cursor }
            }
            Element::Word(w) => Element::Word(w.iter().rev().map(|l| -l).collect()),
        }
    }

    /// `x · s_i`: one step along the Cayley graph.
    pub fn step(&self, x: &Element, i: usize) -> Element {
        match x {
            Element::Lattice(v) => {
                let mut v = v.clone();
                v[i / 2] += if i.is_multiple_of(2) { 1 } else { -1 };
                Element::Lattice(v)
            }
            Element::Lamplighter { lamps, cursor } => match i {
                LAMP_TOGGLE => Element::Lamplighter { lamps: symmetric_difference(lamps, &[*cursor]), cursor: *cursor },
                CURSOR_RIGHT => Element::Lamplighter { lamps: lamps.clone(), cursor: cursor + 1 },
                _ => Element::Lamplighter { lamps: lamps.clone(), cursor: cursor - 1 },
            },
            Element::Word(_) => self.multiply(x, &self.generator(i)),
        }
    }

    /// Word length with respect to the built-in generating set, in closed form.
    pub fn word_length(&self, x: &Element) -> u64 {
        match x {
            Element::Lattice(v) => v.iter().map(|c| c.unsigned_abs()).sum(),
            Element::Lamplighter { lamps, cursor } => {
                let (lo, hi) = lamplighter_span(lamps, *cursor);
                let left_first = -lo + (hi - lo) + (hi - cursor);
                let right_first = hi + (hi - lo) + (cursor - lo);
                lamps.len() as u64 + left_first.min(right_first) as u64
            }
            Element::Word(w) => w.len() as u64,
        }
    }

    /// A shortest sequence of generator indices whose product is `x`.
    pub fn geodesic_word(&self, x: &Element) -> Vec<usize> {
        match x {
            Element::Lattice(v) => {
                let mut word = Vec::new();
                for (axis, &c) in v.iter().enumerate() {
                    let g = if c >= 0 { 2 * axis } else { 2 * axis + 1 };
                    word.extend(core::iter::repeat_n(g, c.unsigned_abs() as usize));
                }
                word
            }
            Element::Lamplighter { lamps, cursor } => {
                let (lo, hi) = lamplighter_span(lamps, *cursor);
                let left_first = -lo + (hi - lo) + (hi - cursor);
                let right_first = hi + (hi - lo) + (cursor - lo);
                let route: [i64; 3] = if left_first <= right_first { [lo, hi, *cursor] } else { [hi, lo, *cursor] };
                let mut unlit: BTreeSet<i64> = lamps.iter().copied().collect();
                let mut word = Vec::new();
                let mut pos = 0i64;
                if unlit.remove(&pos) {
                    word.push(LAMP_TOGGLE);
                }
                for target in route {
                    while pos != target {
                        if target > pos {
                            pos += 1;
                            word.push(CURSOR_RIGHT);
                        } else {
                            pos -= 1;
                            word.push(CURSOR_LEFT);
                        }
                        if unlit.remove(&pos) {
                            word.push(LAMP_TOGGLE);
                        }
                    }
                }
                word
            }
            Element::Word(w) => w
                .iter()
                .map(|&l| {
                    let i = l.unsigned_abs() as usize - 1;
                    if l > 0 {
                        2 * i
                    } else {
                        2 * i + 1
                    }
                })
                .collect(),
        }
    }

    pub fn evaluate_word(&self, word: &[usize]) -> Element {
        word.iter().fold(self.identity(), |x, &i| self.step(&x, i))
    }

    /// All elements of word length at most `radius`, in breadth-first order
    /// (generator order breaks ties).
    pub fn ball(&self, radius: u32, budget: usize) -> Result<Vec<Element>> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        let id = self.identity();
        seen.insert(id.clone());
        queue.push_back((id, 0u32));
        while let Some((x, d)) = queue.pop_front() {
            if order.len() >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
            order.push(x.clone());
            if d == radius {
                continue;
            }
            for i in 0..self.generators.len() {
                let y = self.step(&x, i);
                if seen.insert(y.clone()) {
                    queue.push_back((y, d + 1));
                }
            }
        }
        Ok(order)
    }

    /// All elements of word length exactly `n`.
    pub fn sphere(&self, n: u32, budget: usize) -> Result<Vec<Element>> {
        if let GroupKind::Zd(d) = self.kind {
            let mut out = Vec::new();
            let mut overflow = false;
            lattice_points(d, n as i64, true, &mut |v| {
                if out.len() >= budget {
                    overflow = true;
                } else {
                    out.push(Element::Lattice(v.to_vec()));
                }
            });
            if overflow {
                return Err(Error::BudgetExceeded { budget });
            }
            return Ok(out);
        }
        Ok(self.ball(n, budget)?.into_iter().filter(|x| self.word_length(x) == n as u64).collect())
    }

    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let bad = || Error::ParseElement(s.to_string());
        let s = s.trim();
        let x = match self.kind {
            GroupKind::Zd(_) => {
                let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
                let coords =
                    inner.split(',').map(|c| c.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
                Element::Lattice(coords)
            }
            GroupKind::Lamplighter => {
                let (lamps, cursor) = s.split_once('@').ok_or_else(bad)?;
                let inner = lamps.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
                let mut positions = Vec::new();
                if !inner.trim().is_empty() {
                    for p in inner.split(',') {
                        positions.push(p.trim().parse::<i64>().map_err(|_| bad())?);
                    }
                }
                let cursor = cursor.trim().parse::<i64>().map_err(|_| bad())?;
                Element::Lamplighter { lamps: positions, cursor }
            }
            GroupKind::FreeGroup(_) => {
                if s == "1" {
                    Element::Word(Vec::new())
                } else {
                    let mut letters = Vec::new();
                    for c in s.chars() {
                        let letter = match c {
                            'a'..='z' => (c as u8 - b'a') as i32 + 1,
                            'A'..='Z' => -((c as u8 - b'A') as i32 + 1),
                            _ => return Err(bad()),
                        };
                        letters.push(letter);
                    }
                    // reduce
                    let id = self.identity();
                    self.multiply(&id, &Element::Word(letters))
                }
            }
        };
        if self.contains(&x) {
            Ok(x)
        } else {
            Err(Error::ForeignElement(s.to_string()))
        }
    }
}

fn free_letter(generator: usize) -> i32 {
    let base = (generator / 2) as i32 + 1;
    if generator.is_multiple_of(2) {
        base
    } else {
        -base
    }
}

/// Smallest interval containing the origin, the cursor and every lit lamp.
fn lamplighter_span(lamps: &[i64], cursor: i64) -> (i64, i64) {
    let mut lo = cursor.min(0);
    let mut hi = cursor.max(0);
    if let (Some(&first), Some(&last)) = (lamps.first(), lamps.last()) {
        lo = lo.min(first);
        hi = hi.max(last);
    }
    (lo, hi)
}

fn symmetric_difference(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Visits every point of ℤ^d with ℓ¹ norm `<= radius` (or `== radius` when
/// `exact`), in lexicographic order.
pub(crate) fn lattice_points(d: usize, radius: i64, exact: bool, visit: &mut dyn FnMut(&[i64])) {
    fn rec(point: &mut Vec<i64>, axis: usize, budget: i64, exact: bool, visit: &mut dyn FnMut(&[i64])) {
        let d = point.len();
        if axis + 1 == d {
            if exact {
                if budget == 0 {
                    point[axis] = 0;
                    visit(point);
                } else {
                    point[axis] = -budget;
                    visit(point);
                    point[axis] = budget;
                    visit(point);
                }
            } else {
                for c in -budget..=budget {
                    point[axis] = c;
                    visit(point);
                }
            }
            return;
        }
        for c in -budget..=budget {
            point[axis] = c;
            rec(point, axis + 1, budget - c.abs(), exact, visit);
        }
    }
    if radius < 0 {
        return;
    }
    let mut point = vec![0i64; d];
    rec(&mut point, 0, radius, exact, visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_groups() -> Vec<GroupSpec> {
        vec![
            GroupSpec::zd(1).unwrap(),
            GroupSpec::zd(3).unwrap(),
            GroupSpec::lamplighter(),
            GroupSpec::free(2).unwrap(),
        ]
    }

    #[test]
    fn generating_sets_are_symmetric() {
        for g in all_groups() {
            for (i, s) in g.generators().iter().enumerate() {
                assert_eq!(g.generators()[s.inverse].inverse, i);
                let prod = g.multiply(&g.generator(i), &g.generator(s.inverse));
                assert_eq!(prod, g.identity(), "{} in {:?}", s.label, g.kind());
            }
        }
    }

    #[test]
    fn unsupported_kinds_are_rejected() {
        assert!(matches!(GroupSpec::zd(0), Err(Error::UnsupportedGroup(_))));
        assert!(matches!(GroupSpec::free(0), Err(Error::UnsupportedGroup(_))));
        assert!(matches!(GroupSpec::free(27), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn lamplighter_word_length_matches_bfs() {
        let g = GroupSpec::lamplighter();
        let ball = g.ball(7, 1 << 20).unwrap();
        // BFS layers give the true distance to the identity
        let mut dist = alloc::collections::BTreeMap::new();
        dist.insert(g.identity(), 0u64);
        let mut frontier = vec![g.identity()];
        for r in 1..=7u64 {
            let mut next = Vec::new();
            for x in &frontier {
                for i in 0..3 {
                    let y = g.step(x, i);
                    if !dist.contains_key(&y) {
                        dist.insert(y.clone(), r);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        assert_eq!(dist.len(), ball.len());
        for x in &ball {
            assert_eq!(g.word_length(x), dist[x], "{x}");
        }
    }

    #[test]
    fn display_parse_round_trip() {
        for g in all_groups() {
            for x in g.ball(3, 10_000).unwrap() {
                let text = x.to_string();
                assert_eq!(g.parse_element(&text).unwrap(), x, "{text}");
            }
        }
        let z2 = GroupSpec::zd(2).unwrap();
        assert!(z2.parse_element("(1,2,3)").is_err());
        assert!(GroupSpec::lamplighter().parse_element("[2,1]@0").is_err());
        assert_eq!(GroupSpec::free(2).unwrap().parse_element("abBA").unwrap(), Element::Word(vec![]));
    }

    #[test]
    fn lattice_sphere_counts() {
        // |S(r)| in ℤ² is 4r
        let g = GroupSpec::zd(2).unwrap();
        for r in 1..6 {
            assert_eq!(g.sphere(r, 1000).unwrap().len(), 4 * r as usize);
        }
        assert_eq!(g.sphere(0, 1000).unwrap(), vec![g.identity()]);
    }

    fn element_strategy(g: GroupSpec) -> impl Strategy<Value = Element> {
        let n = g.num_generators();
        proptest::collection::vec(0..n, 0..12).prop_map(move |w| g.evaluate_word(&w))
    }

    proptest! {
        #[test]
        fn group_axioms_hold_on_samples(
            which in 0usize..4,
            seed_words in proptest::collection::vec(proptest::collection::vec(0usize..6, 0..10), 3),
        ) {
            let g = all_groups().swap_remove(which);
            let n = g.num_generators();
            let els: Vec<Element> = seed_words
                .iter()
                .map(|w| g.evaluate_word(&w.iter().map(|i| i % n).collect::<Vec<_>>()))
                .collect();
            let (a, b, c) = (&els[0], &els[1], &els[2]);
            prop_assert_eq!(
                g.multiply(&g.multiply(a, b), c),
                g.multiply(a, &g.multiply(b, c))
            );
            prop_assert_eq!(g.multiply(a, &g.identity()), a.clone());
            prop_assert_eq!(g.multiply(&g.identity(), a), a.clone());
            prop_assert_eq!(g.multiply(a, &g.inverse(a)), g.identity());
            prop_assert!(g.contains(a));
        }

        #[test]
        fn geodesic_words_evaluate_back(x in element_strategy(GroupSpec::lamplighter())) {
            let g = GroupSpec::lamplighter();
            let w = g.geodesic_word(&x);
            prop_assert_eq!(w.len() as u64, g.word_length(&x));
            prop_assert_eq!(g.evaluate_word(&w), x);
        }

        #[test]
        fn geodesic_words_free_and_lattice(
            x in element_strategy(GroupSpec::free(3).unwrap()),
            y in element_strategy(GroupSpec::zd(3).unwrap()),
        ) {
            let f = GroupSpec::free(3).unwrap();
            prop_assert_eq!(f.evaluate_word(&f.geodesic_word(&x)), x);
            let z = GroupSpec::zd(3).unwrap();
            let w = z.geodesic_word(&y);
            prop_assert_eq!(w.len() as u64, z.word_length(&y));
            prop_assert_eq!(z.evaluate_word(&w), y);
        }

        #[test]
        fn word_length_is_inverse_invariant(x in element_strategy(GroupSpec::lamplighter())) {
            let g = GroupSpec::lamplighter();
            prop_assert_eq!(g.word_length(&x), g.word_length(&g.inverse(&x)));
        }
    }
}
