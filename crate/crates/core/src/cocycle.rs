//! 1-cocycles of the right-regular representation on ℓ^p(G).
//!
//! The representation is `π(g)v(x) = v(x·g)`, so translating a vector by `g`
//! moves its support by `g⁻¹` on the right. A cocycle satisfies
//! `b(gh) = π(g)b(h) + b(g)`; coboundaries have the form `b(g) = f − π(g)f`.
//!
//! Closed-form functions on ℤ^d have infinite support. Their coboundaries
//! are summed exactly on a lattice ball of radius `R`, and the mass outside
//! it is bounded using the closed form's difference decay together with the
//! growth of ℤ^d spheres.

use alloc::{collections::BTreeMap, format, string::ToString, vec::Vec};

use crate::{
    func::ClosedForm,
    group::lattice_points,
    math,
    sum::{exact_sum, ExactSum},
    Element, Error, GroupKind, GroupSpec, Result, DEFAULT_VERTEX_BUDGET,
};

/// Default truncation radius for closed-form coboundaries on ℤ.
pub const DEFAULT_TRUNCATION: u32 = 1 << 16;

/// A finitely supported vector of ℓ^p(G).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegularRepVector {
    entries: BTreeMap<Element, f64>,
}

impl RegularRepVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn delta(x: Element) -> Self {
        RegularRepVector { entries: BTreeMap::from([(x, 1.0)]) }
    }

    /// Builds a vector from entries; zero entries are dropped.
    pub fn from_entries(entries: impl IntoIterator<Item = (Element, f64)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (x, v) in entries {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("value at {x} is not finite")));
            }
            if v != 0.0 {
                out.insert(x, v);
            }
        }
        Ok(RegularRepVector { entries: out })
    }

    pub fn get(&self, x: &Element) -> f64 {
        self.entries.get(x).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &BTreeMap<Element, f64> {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_pow(&self, p: f64) -> f64 {
        exact_sum(self.entries.values().map(|&v| math::abs_pow(v, p)))
    }

    pub fn norm(&self, p: f64) -> f64 {
        math::powf(self.norm_pow(p), 1.0 / p)
    }

    /// `π(g)v`, i.e. `x ↦ v(x·g)`.
    pub fn translate(&self, spec: &GroupSpec, g: &Element) -> Self {
        let g_inv = spec.inverse(g);
        RegularRepVector { entries: self.entries.iter().map(|(y, &v)| (spec.multiply(y, &g_inv), v)).collect() }
    }

    /// Entrywise sum of scaled vectors, each entry summed with correct
    /// rounding independently of the order of the terms.
    pub fn linear_combination<'a>(terms: impl IntoIterator<Item = (f64, &'a RegularRepVector)>) -> Self {
        let mut acc: BTreeMap<Element, ExactSum> = BTreeMap::new();
        for (scale, v) in terms {
            for (x, &val) in &v.entries {
                acc.entry(x.clone()).or_default().add(scale * val);
            }
        }
        RegularRepVector { entries: acc.into_iter().map(|(x, s)| (x, s.value())).filter(|&(_, v)| v != 0.0).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        RegularRepVector::linear_combination([(c, self)])
    }
}

/// A function on the group: finitely supported, or a closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupFunction {
    Finite(RegularRepVector),
    Closed(ClosedForm),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CocycleKind {
    Coboundary(GroupFunction),
    /// Values on the generators, extended to words by the cocycle relation.
    GeneratorDriven(Vec<RegularRepVector>),
}

/// A cocycle `b : G → ℓ^p(G)` for the right-regular representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    spec: GroupSpec,
    kind: CocycleKind,
}

/// Value of a coboundary truncated to a ball, with a bound on what was cut.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedNorm {
    /// `Σ_{|x| ≤ R} |b(g)(x)|^p`.
    pub truncated_pp: f64,
    /// Upper bound on `Σ_{|x| > R} |b(g)(x)|^p`.
    pub tail_pp: f64,
}

impl TruncatedNorm {
    /// Lower bound on `‖b(g)‖_p`.
    pub fn lower(&self, p: f64) -> f64 {
        math::powf(self.truncated_pp, 1.0 / p)
    }

    /// Upper bound on `‖b(g)‖_p`.
    pub fn upper(&self, p: f64) -> f64 {
        math::powf(self.truncated_pp + self.tail_pp, 1.0 / p)
    }
}

impl Cocycle {
    pub fn zero(spec: &GroupSpec) -> Self {
        Cocycle { spec: spec.clone(), kind: CocycleKind::Coboundary(GroupFunction::Finite(RegularRepVector::zero())) }
    }

    pub fn coboundary(spec: &GroupSpec, f: GroupFunction) -> Result<Self> {
        match &f {
            GroupFunction::Finite(v) => check_members(spec, v)?,
            GroupFunction::Closed(form) => {
                if !form.supports(spec) {
                    return Err(Error::UnsupportedGroup(format!("{form:?} on {}", spec.kind())));
                }
            }
        }
        Ok(Cocycle { spec: spec.clone(), kind: CocycleKind::Coboundary(f) })
    }

    /// Cocycle with prescribed values on the generators. The images of a
    /// generator and its inverse must satisfy `b(s⁻¹) = −π(s⁻¹)b(s)` exactly.
    pub fn generator_driven(spec: &GroupSpec, images: Vec<RegularRepVector>) -> Result<Self> {
        if images.len() != spec.num_generators() {
            return Err(Error::ShapeMismatch { expected: spec.num_generators(), actual: images.len() });
        }
        for v in &images {
            check_members(spec, v)?;
        }
        for (i, gen) in spec.generators().iter().enumerate() {
            let s_inv = spec.generator(gen.inverse);
            let expected = images[i].translate(spec, &s_inv).scaled(-1.0);
            if expected != images[gen.inverse] {
                return Err(Error::InvalidParameter(format!(
                    "images of {} and its inverse violate the cocycle relation",
                    gen.label
                )));
            }
        }
        Ok(Cocycle { spec: spec.clone(), kind: CocycleKind::GeneratorDriven(images) })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn kind(&self) -> &CocycleKind {
        &self.kind
    }

    /// Whether every value `b(g)` is finitely supported.
    pub fn is_finite(&self) -> bool {
        !matches!(self.kind, CocycleKind::Coboundary(GroupFunction::Closed(_)))
    }

    /// `b(g)` as a finitely supported vector.
    pub fn eval(&self, g: &Element) -> Result<RegularRepVector> {
        if !self.spec.contains(g) {
            return Err(Error::ForeignElement(g.to_string()));
        }
        match &self.kind {
            CocycleKind::Coboundary(GroupFunction::Finite(f)) => coboundary(&self.spec, f, g),
            CocycleKind::Coboundary(GroupFunction::Closed(_)) => Err(Error::NotFinitelySupported),
            CocycleKind::GeneratorDriven(images) => {
                // b(s₁⋯s_k) = Σ_j π(s₁⋯s_{j−1}) b(s_j)
                let mut prefix = self.spec.identity();
                let mut parts = Vec::new();
                for i in self.spec.geodesic_word(g) {
                    parts.push(images[i].translate(&self.spec, &prefix));
                    prefix = self.spec.step(&prefix, i);
                }
                Ok(RegularRepVector::linear_combination(parts.iter().map(|v| (1.0, v))))
            }
        }
    }

    /// `‖b(g)‖_p^p`, exact for finite cocycles and truncated at radius
    /// `truncation` with a certified tail for closed forms on ℤ^d.
    pub fn norm_pow(&self, g: &Element, p: f64, truncation: u32) -> Result<TruncatedNorm> {
        match &self.kind {
            CocycleKind::Coboundary(GroupFunction::Closed(form)) => {
                closed_coboundary_norm(&self.spec, form, g, p, truncation)
            }
            _ => Ok(TruncatedNorm { truncated_pp: self.eval(g)?.norm_pow(p), tail_pp: 0.0 }),
        }
    }

    /// Checks `b(gh) = π(g)b(h) + b(g)` entrywise and exactly.
    pub fn satisfies_relation(&self, g: &Element, h: &Element) -> Result<bool> {
        let lhs = self.eval(&self.spec.multiply(g, h))?;
        let bh = self.eval(h)?.translate(&self.spec, g);
        let bg = self.eval(g)?;
        Ok(lhs == RegularRepVector::linear_combination([(1.0, &bh), (1.0, &bg)]))
    }
}

fn check_members(spec: &GroupSpec, v: &RegularRepVector) -> Result<()> {
    match v.support().find(|x| !spec.contains(x)) {
        Some(x) => Err(Error::ForeignElement(x.to_string())),
        None => Ok(()),
    }
}

/// `b(g) = f − π(g)f` for finitely supported `f`.
pub fn coboundary(spec: &GroupSpec, f: &RegularRepVector, g: &Element) -> Result<RegularRepVector> {
    check_members(spec, f)?;
    if !spec.contains(g) {
        return Err(Error::ForeignElement(g.to_string()));
    }
    let g_inv = spec.inverse(g);
    let mut support: Vec<Element> = f.support().cloned().collect();
    support.extend(f.support().map(|y| spec.multiply(y, &g_inv)));
    support.sort();
    support.dedup();
    RegularRepVector::from_entries(support.into_iter().map(|x| {
        let v = f.get(&x) - f.get(&spec.multiply(&x, g));
        (x, v)
    }))
}

/// Upper bound on `|S_r|` in ℤ^d of the form `a · r^{d−1}`.
fn lattice_sphere_constant(d: usize) -> Option<f64> {
    match d {
        1 => Some(2.0),
        2 => Some(4.0),
        // |S_r| = 4r² + 2 ≤ 6r² for r ≥ 1
        3 => Some(6.0),
        _ => None,
    }
}

fn closed_coboundary_norm(
    spec: &GroupSpec,
    form: &ClosedForm,
    g: &Element,
    p: f64,
    truncation: u32,
) -> Result<TruncatedNorm> {
    let (GroupKind::Zd(d), Element::Lattice(shift)) = (spec.kind(), g) else {
        return Err(Error::TailNotCertifiable(format!("closed forms are only certified on ℤ^d, not {}", spec.kind())));
    };
    if !spec.contains(g) {
        return Err(Error::ForeignElement(g.to_string()));
    }
    let a = lattice_sphere_constant(d)
        .ok_or_else(|| Error::TailNotCertifiable(format!("no sphere growth bound for dimension {d}")))?;
    let k = spec.word_length(g);
    let r = truncation as u64;
    if r < 2 * k {
        return Err(Error::RegionTooSmall(format!("truncation {r} is below twice the shift length {k}")));
    }
    let volume = lattice_ball_volume(d, r);
    if volume > DEFAULT_VERTEX_BUDGET as u128 {
        return Err(Error::BudgetExceeded { budget: DEFAULT_VERTEX_BUDGET });
    }
    let decay = form.decay();
    let m = (d - 1) as f64;
    let gamma = decay.beta * p - m - 1.0;
    if k > 0 && decay.lipschitz > 0.0 && !(gamma > 0.0) {
        return Err(Error::TailNotCertifiable(format!(
            "difference decay {} is too slow for p = {p} in dimension {d}",
            decay.beta
        )));
    }

    let mut acc = ExactSum::new();
    let mut moved = alloc::vec![0i64; d];
    lattice_points(d, r as i64, false, &mut |x| {
        for ((m, xi), si) in moved.iter_mut().zip(x).zip(shift) {
            *m = xi + si;
        }
        acc.add(math::abs_pow(form.eval_lattice(x) - form.eval_lattice(&moved), p));
    });

    // For |x| = ρ > R ≥ 2k a geodesic from x to x + g stays at word length
    // ≥ ρ − k, so |b(g)(x)| ≤ kL(ρ − k)^{−β}. With |S_ρ| ≤ a·ρ^m ≤ a·2^m(ρ − k)^m
    // the tail is dominated by a·2^m(kL)^p ∫_{R−k}^∞ u^{m−βp} du.
    let tail_pp = if k == 0 || decay.lipschitz == 0.0 {
        0.0
    } else {
        let kl = k as f64 * decay.lipschitz;
        a * math::powf(2.0, m) * math::powf(kl, p) * math::powf((r - k) as f64, -gamma) / gamma
    };
    Ok(TruncatedNorm { truncated_pp: acc.value(), tail_pp })
}

fn lattice_ball_volume(d: usize, r: u64) -> u128 {
    // |B_r| = Σ_k 2^k C(d,k) C(r,k)
    let mut total: u128 = 0;
    let mut c_dk: u128 = 1;
    let mut c_rk: u128 = 1;
    for k in 0..=d as u128 {
        if k > 0 {
            c_dk = c_dk * (d as u128 - k + 1) / k;
            c_rk = if (k as u64) > r { 0 } else { c_rk * (r as u128 - k + 1) / k };
        }
        total = total.saturating_add((1u128 << k) * c_dk * c_rk);
    }
    total
}

/// One row of a sublinearity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub n: u32,
    /// `max_{|g| = n} ‖b(g)‖_p`, truncated for closed forms.
    pub max_norm: f64,
    pub ratio: f64,
    /// Largest certified bound on the ℓ^p norm of the truncated tail.
    pub tail_bound: f64,
    /// `max_{|g| = n}` of the upper bound `(truncated + tail)^{1/p}`.
    pub max_norm_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearityProfile {
    pub p: f64,
    pub rows: Vec<ProfileRow>,
}

impl SublinearityProfile {
    pub fn row(&self, n: u32) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// `M(n) = max_{|g| = n} ‖b(g)‖_p` and `M(n)/n` for `n = 1..=max_n`.
pub fn sublinearity_profile(b: &Cocycle, max_n: u32, p: f64, truncation: u32) -> Result<SublinearityProfile> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent {p} must satisfy p >= 1")));
    }
    let mut rows = Vec::with_capacity(max_n as usize);
    for n in 1..=max_n {
        let mut row = ProfileRow { n, max_norm: 0.0, ratio: 0.0, tail_bound: 0.0, max_norm_upper: 0.0 };
        for g in b.spec().sphere(n, DEFAULT_VERTEX_BUDGET)? {
            let t = b.norm_pow(&g, p, truncation)?;
            row.max_norm = row.max_norm.max(t.lower(p));
            row.max_norm_upper = row.max_norm_upper.max(t.upper(p));
            row.tail_bound = row.tail_bound.max(math::powf(t.tail_pp, 1.0 / p));
        }
        row.ratio = row.max_norm / n as f64;
        rows.push(row);
    }
    Ok(SublinearityProfile { p, rows })
}

/// `|gA ∩ A|` for the left translate `gA`.
pub fn mixing_overlap(spec: &GroupSpec, a: &[Element], g: &Element) -> usize {
    let set: alloc::collections::BTreeSet<&Element> = a.iter().collect();
    let translated: alloc::collections::BTreeSet<Element> = a.iter().map(|x| spec.multiply(g, x)).collect();
    translated.iter().filter(|x| set.contains(x)).count()
}

/// `(‖Σ π(g_i)v_i‖_p^p, Σ ‖v_i‖_p^p)`.
///
/// Both sides are correctly rounded sums, so when the translated supports
/// are pairwise disjoint they are sums of the same multiset of terms and
/// agree bit for bit.
pub fn separation_additivity(
    spec: &GroupSpec,
    vectors: &[RegularRepVector],
    shifts: &[Element],
    p: f64,
) -> Result<(f64, f64)> {
    if vectors.len() != shifts.len() {
        return Err(Error::ShapeMismatch { expected: vectors.len(), actual: shifts.len() });
    }
    let moved: Vec<RegularRepVector> = vectors.iter().zip(shifts).map(|(v, g)| v.translate(spec, g)).collect();
    let combined = RegularRepVector::linear_combination(moved.iter().map(|v| (1.0, v)));
    let separate = exact_sum(vectors.iter().flat_map(|v| v.entries.values().map(|&x| math::abs_pow(x, p))));
    Ok((combined.norm_pow(p), separate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn z(v: i64) -> Element {
        Element::Lattice(vec![v])
    }

    #[test]
    fn coboundary_of_delta() {
        let spec = GroupSpec::zd(1).unwrap();
        let b = Cocycle::coboundary(&spec, GroupFunction::Finite(RegularRepVector::delta(z(0)))).unwrap();
        assert!(b.eval(&z(0)).unwrap().is_empty());
        let v = b.eval(&z(3)).unwrap();
        assert_eq!(v.get(&z(0)), 1.0);
        assert_eq!(v.get(&z(-3)), -1.0);
        assert_eq!(v.len(), 2);
        for p in [1.5, 2.0, 4.0] {
            assert_eq!(v.norm(p), math::powf(2.0, 1.0 / p));
        }
    }

    #[test]
    fn lattice_ball_volume_matches_enumeration() {
        for d in 1..=3 {
            for r in 0..8 {
                let mut n = 0u128;
                lattice_points(d, r as i64, false, &mut |_| n += 1);
                assert_eq!(lattice_ball_volume(d, r), n);
            }
        }
    }

    #[test]
    fn generator_driven_inverse_consistency() {
        let spec = GroupSpec::zd(1).unwrap();
        let good = vec![
            RegularRepVector::from_entries([(z(0), 1.0), (z(-1), -1.0)]).unwrap(),
            RegularRepVector::from_entries([(z(0), 1.0), (z(1), -1.0)]).unwrap(),
        ];
        let b = Cocycle::generator_driven(&spec, good).unwrap();
        assert_eq!(b.eval(&z(5)).unwrap().norm_pow(2.0), 2.0);
        let bad = vec![RegularRepVector::delta(z(0)), RegularRepVector::delta(z(0))];
        assert!(Cocycle::generator_driven(&spec, bad).is_err());
    }

    #[test]
    fn mixing_overlap_examples() {
        let spec = GroupSpec::zd(1).unwrap();
        let a: Vec<_> = (0..10).map(z).collect();
        assert_eq!(mixing_overlap(&spec, &a, &z(0)), 10);
        assert_eq!(mixing_overlap(&spec, &a, &z(20)), 0);
        assert_eq!(mixing_overlap(&spec, &a, &z(5)), 5);
    }

    #[test]
    fn separation_examples() {
        let spec = GroupSpec::zd(1).unwrap();
        let d = RegularRepVector::delta(z(0));
        assert_eq!(separation_additivity(&spec, core::slice::from_ref(&d), &[z(4)], 3.0).unwrap(), (1.0, 1.0));
        assert_eq!(separation_additivity(&spec, &[d.clone(), d.clone()], &[z(0), z(10)], 2.0).unwrap(), (2.0, 2.0));
        assert_eq!(separation_additivity(&spec, &[d.clone(), d], &[z(0), z(0)], 2.0).unwrap(), (4.0, 2.0));
    }

    #[test]
    fn closed_form_requires_lattice() {
        let spec = GroupSpec::free(2).unwrap();
        let b = Cocycle::coboundary(&spec, GroupFunction::Closed(ClosedForm::radial(1.0, 0.5).unwrap())).unwrap();
        assert_eq!(b.eval(&spec.generator(0)), Err(Error::NotFinitelySupported));
        assert!(matches!(b.norm_pow(&spec.generator(0), 4.0, 64), Err(Error::TailNotCertifiable(_))));
    }

    #[test]
    fn truncated_norm_brackets_the_true_value() {
        // f(x) = |x|^{1/2}, p = 4, shift 3: compare with a much larger truncation
        let spec = GroupSpec::zd(1).unwrap();
        let b = Cocycle::coboundary(&spec, GroupFunction::Closed(ClosedForm::radial(1.0, 0.5).unwrap())).unwrap();
        let small = b.norm_pow(&z(3), 4.0, 200).unwrap();
        let large = b.norm_pow(&z(3), 4.0, 200_000).unwrap();
        assert!(small.truncated_pp <= large.truncated_pp);
        assert!(large.truncated_pp <= small.truncated_pp + small.tail_pp);
        assert!(matches!(b.norm_pow(&z(3), 4.0, 5), Err(Error::RegionTooSmall(_))));
        assert!(matches!(b.norm_pow(&z(3), 2.0, 100), Err(Error::TailNotCertifiable(_))));
    }
}
