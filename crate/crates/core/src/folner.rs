//! Controlled Følner sequences and the averaging built on them.
//!
//! A sequence `F_1, F_2, …` is controlled with constant `C` when `F_n ⊆ S^n`
//! and `|sF_n △ F_n| / |F_n| ≤ C/n` for every generator `s`. Sets are kept
//! as sorted lists of normal forms and the translates `sF_n` are computed by
//! exact group multiplication, so the verifier does not depend on any ball.
//!
//! Conventions:
//! * ℤ^d: `F_n` is the cube of half-width `⌊n / max(d, 2)⌋`.
//! * Lamplighter: with `m = ⌊(n − 1)/3⌋`, `F_n` holds the elements whose
//!   cursor `c` lies in `[−m, 0]` and whose lit lamps lie in `[c, c + m]`.
//!   This is the set of inverses of the box `{lamps ⊆ [0, m], cursor ∈ [0, m]}`;
//!   the box itself is only controlled for right translates.

use alloc::{collections::BTreeSet, format, vec, vec::Vec};

use num_rational::Ratio;

use crate::{
    cayley::CayleyBall,
    cocycle::{Cocycle, RegularRepVector},
    dirichlet::VertexFunction,
    group::lattice_points,
    math,
    sum::ExactSum,
    Element, Error, GroupKind, GroupSpec, Result, Vertex,
};

/// `F_1, …, F_N` together with the constant the construction claims.
#[derive(Debug, Clone, PartialEq)]
pub struct FolnerSequence {
    pub group: GroupSpec,
    /// `sets[n − 1]` is `F_n`, sorted.
    pub sets: Vec<Vec<Element>>,
    pub constant: Ratio<u64>,
}

impl FolnerSequence {
    /// Wraps arbitrary sets, sorting and deduplicating each one.
    pub fn new(group: GroupSpec, sets: Vec<Vec<Element>>, constant: Ratio<u64>) -> Result<Self> {
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptyFolnerSet(i + 1));
            }
            if let Some(x) = set.iter().find(|x| !group.contains(x)) {
                return Err(Error::ForeignElement(format!("{x}")));
            }
            set.sort();
            set.dedup();
            out.push(set);
        }
        Ok(FolnerSequence { group, sets: out, constant })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `F_n` for `1 ≤ n ≤ N`.
    pub fn set(&self, n: usize) -> Result<&[Element]> {
        if n == 0 || n > self.sets.len() {
            return Err(Error::InvalidParameter(format!("index {n} outside 1..={}", self.sets.len())));
        }
        Ok(&self.sets[n - 1])
    }

    /// Vertex indices of `F_n` in a Cayley ball.
    pub fn vertices(&self, ball: &CayleyBall, n: usize) -> Result<Vec<Vertex>> {
        self.set(n)?
            .iter()
            .map(|x| ball.vertex(x).ok_or_else(|| Error::RegionTooSmall(format!("{x} is outside the ball"))))
            .collect()
    }
}

fn check_budget(total: u128, budget: usize) -> Result<()> {
    if total > budget as u128 {
        Err(Error::BudgetExceeded { budget })
    } else {
        Ok(())
    }
}

/// Cube half-width used for `F_n` in ℤ^d.
pub fn cube_half_width(d: usize, n: usize) -> i64 {
    (n / d.max(2)) as i64
}

/// Cubes in ℤ^d. The claimed constant is 2 for `d ≤ 2` and `2(d − 1)`
/// otherwise.
pub fn folner_zd(d: usize, max_n: usize, budget: usize) -> Result<FolnerSequence> {
    let group = GroupSpec::zd(d)?;
    if max_n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let mut total: u128 = 0;
    let mut sets = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let h = cube_half_width(d, n);
        total += ((2 * h + 1) as u128).pow(d as u32);
        check_budget(total, budget)?;
        let mut set = Vec::new();
        cube_points(d, h, &mut vec![0; d], 0, &mut set);
        sets.push(set);
    }
    let c = if d <= 2 { 2 } else { 2 * (d as u64 - 1) };
    FolnerSequence::new(group, sets, Ratio::from_integer(c))
}

fn cube_points(d: usize, h: i64, point: &mut Vec<i64>, axis: usize, out: &mut Vec<Element>) {
    if axis == d {
        out.push(Element::Lattice(point.clone()));
        return;
    }
    for c in -h..=h {
        point[axis] = c;
        cube_points(d, h, point, axis + 1, out);
    }
}

/// Window length parameter for the lamplighter sets.
pub fn lamplighter_width(n: usize) -> i64 {
    (n.saturating_sub(1) / 3) as i64
}

/// Lamplighter sets with claimed constant 6.
pub fn folner_lamplighter(max_n: usize, budget: usize) -> Result<FolnerSequence> {
    if max_n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let mut total: u128 = 0;
    let mut sets = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let m = lamplighter_width(n);
        total += (m as u128 + 1) << (m + 1);
        check_budget(total, budget)?;
        let mut set = Vec::new();
        for cursor in -m..=0 {
            for mask in 0u64..(1u64 << (m + 1)) {
                let lamps: Vec<i64> = (0..=m).filter(|i| mask >> i & 1 == 1).map(|i| cursor + i).collect();
                set.push(Element::Lamplighter { lamps, cursor });
            }
        }
        sets.push(set);
    }
    FolnerSequence::new(GroupSpec::lamplighter(), sets, Ratio::from_integer(6))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FolnerCheck {
    pub n: usize,
    /// `|sF_n △ F_n| / |F_n|` for each generator, in generator order.
    pub ratios: Vec<Ratio<u64>>,
    pub max_ratio: Ratio<u64>,
    /// `F_n ⊆ S^n`.
    pub containment: bool,
    /// `max_ratio ≤ C/n`.
    pub controlled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlCertificate {
    pub constant: Ratio<u64>,
    pub per_n: Vec<FolnerCheck>,
    pub pass: bool,
}

/// Recomputes every ratio exactly and checks both conditions against `c`.
pub fn verify_controlled(f: &FolnerSequence, c: Ratio<u64>) -> Result<ControlCertificate> {
    let spec = &f.group;
    let mut per_n = Vec::with_capacity(f.sets.len());
    for (i, set) in f.sets.iter().enumerate() {
        let n = i + 1;
        if set.is_empty() {
            return Err(Error::EmptyFolnerSet(n));
        }
        let members: BTreeSet<&Element> = set.iter().collect();
        let size = set.len() as u64;
        let mut ratios = Vec::with_capacity(spec.num_generators());
        for k in 0..spec.num_generators() {
            let s = spec.generator(k);
            let translate: BTreeSet<Element> = set.iter().map(|x| spec.multiply(&s, x)).collect();
            let outside = translate.iter().filter(|x| !members.contains(x)).count() as u64;
            // |sF| = |F|, so the two halves of the symmetric difference have equal size
            ratios.push(Ratio::new(2 * outside, size));
        }
        let max_ratio = ratios.iter().copied().max().unwrap_or_else(|| Ratio::from_integer(0));
        let containment = set.iter().all(|x| spec.word_length(x) <= n as u64);
        // n · |Δ| / |F| ≤ C  ⟺  n · |Δ| · C.den ≤ C.num · |F|
        let lhs = n as u128 * *max_ratio.numer() as u128 * *c.denom() as u128;
        let rhs = *c.numer() as u128 * *max_ratio.denom() as u128;
        per_n.push(FolnerCheck { n, ratios, max_ratio, containment, controlled: lhs <= rhs });
    }
    let pass = per_n.iter().all(|r| r.containment && r.controlled);
    Ok(ControlCertificate { constant: c, per_n, pass })
}

/// `v_n = (1/|F_n|) Σ_{g ∈ F_n} b(g)`.
pub fn average_cocycle(b: &Cocycle, f: &FolnerSequence, n: usize) -> Result<RegularRepVector> {
    check_same_group(b, f)?;
    let set = f.set(n)?;
    let values = set.iter().map(|g| b.eval(g)).collect::<Result<Vec<_>>>()?;
    let w = 1.0 / set.len() as f64;
    let mut acc: alloc::collections::BTreeMap<Element, ExactSum> = alloc::collections::BTreeMap::new();
    for v in &values {
        for (x, &val) in v.entries() {
            acc.entry(x.clone()).or_default().add(val);
        }
    }
    RegularRepVector::from_entries(acc.into_iter().map(|(x, s)| (x, s.value() * w)))
}

fn check_same_group(b: &Cocycle, f: &FolnerSequence) -> Result<()> {
    if b.spec() == &f.group {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "cocycle lives on {} but the Følner sequence on {}",
            b.spec().kind(),
            f.group.kind()
        )))
    }
}

/// `‖σ(s)v_n − v_n‖_p` for each generator `s`, where `σ(s)v = π(s)v + b(s)`.
pub fn almost_fixed_displacement(b: &Cocycle, f: &FolnerSequence, n: usize, p: f64) -> Result<Vec<f64>> {
    let spec = b.spec();
    let v = average_cocycle(b, f, n)?;
    (0..spec.num_generators())
        .map(|k| {
            let s = spec.generator(k);
            let moved = v.translate(spec, &s);
            let bs = b.eval(&s)?;
            let diff = RegularRepVector::linear_combination([(1.0, &moved), (1.0, &bs), (-1.0, &v)]);
            Ok(diff.norm(p))
        })
        .collect()
}

/// `(C/n) · max_{|g| ≤ n+1} ‖b(g)‖_p` with `C` the sequence's claimed constant.
pub fn averaging_bound(b: &Cocycle, f: &FolnerSequence, n: usize, p: f64, budget: usize) -> Result<f64> {
    check_same_group(b, f)?;
    f.set(n)?;
    let spec = b.spec();
    let mut sup = 0.0f64;
    let radius = n as u32 + 1;
    if let GroupKind::Zd(d) = spec.kind() {
        let mut err = None;
        let mut count = 0usize;
        lattice_points(d, radius as i64, false, &mut |x| {
            count += 1;
            if err.is_some() || count > budget {
                return;
            }
            match b.eval(&Element::Lattice(x.to_vec())) {
                Ok(v) => sup = sup.max(v.norm(p)),
                Err(e) => err = Some(e),
            }
        });
        if count > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        if let Some(e) = err {
            return Err(e);
        }
    } else {
        for g in spec.ball(radius, budget)? {
            sup = sup.max(b.eval(&g)?.norm(p));
        }
    }
    let c = *f.constant.numer() as f64 / *f.constant.denom() as f64;
    Ok(c / n as f64 * sup)
}

/// Output of [`convolve_approximation`].
#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    /// `P_n f` on the valid region; other entries are copied from `f`.
    pub smoothed: VertexFunction,
    /// Vertices of word length at most `valid_radius`.
    pub valid_radius: u32,
    pub in_region: Vec<bool>,
    /// `Σ |P_n f(x) − P_n f(y)|^p` over ordered adjacent pairs in the region.
    pub energy: f64,
    /// `energy^{1/p}`.
    pub gradient_norm: f64,
}

/// `P_n f(x) = (1/|F_n|) Σ_{y ∈ F_n} f(x·y)`, on the vertices `x` for which
/// every `x·y` stays inside the ball.
pub fn convolve_approximation(
    f: &VertexFunction,
    seq: &FolnerSequence,
    n: usize,
    ball: &CayleyBall,
    p: f64,
) -> Result<Approximation> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent {p} must satisfy p >= 1")));
    }
    if f.len() != ball.len() {
        return Err(Error::ShapeMismatch { expected: ball.len(), actual: f.len() });
    }
    if seq.group != ball.spec {
        return Err(Error::InvalidParameter("Følner sequence and ball use different groups".into()));
    }
    let set = seq.set(n)?;
    let reach = set.iter().map(|y| ball.spec.word_length(y)).max().unwrap_or(0);
    if reach >= ball.radius as u64 {
        return Err(Error::RegionTooSmall(format!(
            "F_{n} reaches word length {reach}, ball radius is {}",
            ball.radius
        )));
    }
    let valid_radius = ball.radius - reach as u32;
    let g = &ball.graph;
    let in_region: Vec<bool> = (0..ball.len()).map(|v| g.word_length(v) <= valid_radius).collect();
    let w = 1.0 / set.len() as f64;
    let mut values = f.values().to_vec();
    for v in (0..ball.len()).filter(|&v| in_region[v]) {
        let x = ball.label(v);
        let mut acc = ExactSum::new();
        for y in set {
            let xy = ball.spec.multiply(x, y);
            let u = ball.vertex(&xy).ok_or_else(|| Error::RegionTooSmall(format!("{xy} is outside the ball")))?;
            acc.add(f.get(u));
        }
        values[v] = acc.value() * w;
    }
    let mut energy = ExactSum::new();
    for (x, y, _) in g.arcs() {
        if in_region[x] && in_region[y] {
            energy.add(math::abs_pow(values[x] - values[y], p));
        }
    }
    let energy = energy.value();
    Ok(Approximation {
        smoothed: VertexFunction::new(values)?,
        valid_radius,
        in_region,
        energy,
        gradient_norm: math::powf(energy, 1.0 / p),
    })
}

/// The normalised indicator `p_n = 1_{F_n} / |F_n|` on a ball.
pub fn kernel(seq: &FolnerSequence, n: usize, ball: &CayleyBall) -> Result<VertexFunction> {
    let verts = seq.vertices(ball, n)?;
    let mut values = vec![0.0; ball.len()];
    let w = 1.0 / verts.len() as f64;
    for v in verts {
        values[v] = w;
    }
    VertexFunction::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_cayley_ball, cocycle::GroupFunction, DEFAULT_VERTEX_BUDGET};

    #[test]
    fn z1_ratios_match_closed_form() {
        let f = folner_zd(1, 40, DEFAULT_VERTEX_BUDGET).unwrap();
        let cert = verify_controlled(&f, Ratio::from_integer(2)).unwrap();
        assert!(cert.pass);
        for row in &cert.per_n {
            let h = (row.n / 2) as u64;
            assert_eq!(row.max_ratio, Ratio::new(2, 2 * h + 1));
        }
    }

    #[test]
    fn z2_ratio_at_four() {
        let f = folner_zd(2, 6, DEFAULT_VERTEX_BUDGET).unwrap();
        let cert = verify_controlled(&f, f.constant).unwrap();
        assert_eq!(cert.per_n[3].max_ratio, Ratio::new(2, 5));
        assert!(cert.pass);
        let f3 = folner_zd(3, 12, DEFAULT_VERTEX_BUDGET).unwrap();
        assert!(verify_controlled(&f3, f3.constant).unwrap().pass);
        assert!(!verify_controlled(&f3, Ratio::from_integer(3)).unwrap().pass);
    }

    #[test]
    fn broken_sequences_fail() {
        let spec = GroupSpec::zd(1).unwrap();
        let z = |v| Element::Lattice(vec![v]);
        let points =
            FolnerSequence::new(spec.clone(), (0..8).map(|_| vec![z(0)]).collect(), Ratio::from_integer(2)).unwrap();
        let cert = verify_controlled(&points, Ratio::from_integer(2)).unwrap();
        assert!(!cert.pass);
        assert!(cert.per_n.iter().all(|r| r.containment));
        let shifted = (1..=6i64).map(|n| (n * n..=n * n + n).map(z).collect()).collect();
        let shifted = FolnerSequence::new(spec, shifted, Ratio::from_integer(2)).unwrap();
        let cert = verify_controlled(&shifted, Ratio::from_integer(2)).unwrap();
        assert!(!cert.pass);
        assert!(!cert.per_n[2].containment);
    }

    #[test]
    fn lamplighter_sets() {
        let f = folner_lamplighter(12, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(
            f.set(1).unwrap(),
            &[GroupSpec::lamplighter().identity(), Element::Lamplighter { lamps: vec![0], cursor: 0 }]
        );
        assert_eq!(f.set(12).unwrap().len(), 4 * 16);
        let cert = verify_controlled(&f, f.constant).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(folner_lamplighter(200, 1000).is_err());
    }

    #[test]
    fn averaging_delta_on_z() {
        let spec = GroupSpec::zd(1).unwrap();
        let b = Cocycle::coboundary(&spec, GroupFunction::Finite(RegularRepVector::delta(Element::Lattice(vec![0]))))
            .unwrap();
        let f = folner_zd(1, 8, DEFAULT_VERTEX_BUDGET).unwrap();
        let v1 = average_cocycle(&b, &f, 1).unwrap();
        assert!(v1.is_empty());
        // F_4 = [−2, 2]: v = δ_0 − uniform on [−2, 2]
        let v = average_cocycle(&b, &f, 4).unwrap();
        assert_eq!(v.get(&Element::Lattice(vec![0])), 1.0 - 0.2);
        assert_eq!(v.get(&Element::Lattice(vec![2])), -0.2);
        assert_eq!(v.len(), 5);
        let zero = Cocycle::zero(&spec);
        assert!(average_cocycle(&zero, &f, 5).unwrap().is_empty());
        assert_eq!(almost_fixed_displacement(&zero, &f, 5, 2.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn singleton_kernel_is_identity() {
        let spec = GroupSpec::zd(1).unwrap();
        let ball = build_cayley_ball(&spec, 10, DEFAULT_VERTEX_BUDGET).unwrap();
        let seq = FolnerSequence::new(spec.clone(), vec![vec![spec.identity()]], Ratio::from_integer(1)).unwrap();
        let f = VertexFunction::from_fn(ball.len(), |v| (v * v) as f64).unwrap();
        let a = convolve_approximation(&f, &seq, 1, &ball, 2.0).unwrap();
        assert_eq!(a.smoothed, f);
        let c = VertexFunction::constant(ball.len(), 3.0);
        let seq = folner_zd(1, 6, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(convolve_approximation(&c, &seq, 6, &ball, 2.0).unwrap().energy, 0.0);
        let small = build_cayley_ball(&spec, 3, DEFAULT_VERTEX_BUDGET).unwrap();
        let c = VertexFunction::constant(small.len(), 1.0);
        assert!(matches!(convolve_approximation(&c, &seq, 6, &small, 2.0), Err(Error::RegionTooSmall(_))));
    }
}
