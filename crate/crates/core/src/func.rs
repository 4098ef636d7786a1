//! Closed-form functions on groups with certified difference decay.
//!
//! A closed form is described beyond any finite ball by a decay bound of the
//! shape `|f(x) − f(y)| ≤ L · max(1, min(|x|, |y|))^{−β}` for adjacent `x`, `y`.
//! Tail estimates for infinite sums are built from that bound.

use alloc::format;

use crate::{math, Element, Error, GroupKind, GroupSpec, Result};

/// Decay of adjacent differences: `|f(x) − f(y)| ≤ lipschitz · max(1, min(|x|,|y|))^{−beta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub lipschitz: f64,
    pub beta: f64,
}

impl DecayBound {
    /// The bound at a pair with word lengths `lx`, `ly`.
    pub fn at(&self, lx: u64, ly: u64) -> f64 {
        let m = lx.min(ly).max(1) as f64;
        self.lipschitz * math::powf(m, -self.beta)
    }
}

/// Functions on a group given by a formula in the normal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `coeff · |x|^alpha` in the word metric.
    Radial { coeff: f64, alpha: f64 },
    /// `coeff · sign(x) · |x|^alpha` on ℤ.
    SignedPower { coeff: f64, alpha: f64 },
}

impl ClosedForm {
    pub fn radial(coeff: f64, alpha: f64) -> Result<Self> {
        check_params(coeff, alpha)?;
        Ok(ClosedForm::Radial { coeff, alpha })
    }

    pub fn signed_power(coeff: f64, alpha: f64) -> Result<Self> {
        check_params(coeff, alpha)?;
        Ok(ClosedForm::SignedPower { coeff, alpha })
    }

    fn params(&self) -> (f64, f64) {
        match *self {
            ClosedForm::Radial { coeff, alpha } | ClosedForm::SignedPower { coeff, alpha } => (coeff, alpha),
        }
    }

    /// Whether the formula makes sense on `spec`.
    pub fn supports(&self, spec: &GroupSpec) -> bool {
        match self {
            ClosedForm::Radial { .. } => true,
            ClosedForm::SignedPower { .. } => spec.kind() == GroupKind::Zd(1),
        }
    }

    pub fn eval(&self, spec: &GroupSpec, x: &Element) -> Result<f64> {
        if !spec.contains(x) {
            return Err(Error::ForeignElement(format!("{x}")));
        }
        match *self {
            ClosedForm::Radial { coeff, alpha } => Ok(coeff * math::powf(spec.word_length(x) as f64, alpha)),
            ClosedForm::SignedPower { coeff, alpha } => match (spec.kind(), x) {
                (GroupKind::Zd(1), Element::Lattice(v)) => {
                    let t = v[0] as f64;
                    Ok(coeff * math::signed_pow(t, alpha))
                }
                _ => Err(Error::UnsupportedGroup(format!("signed power on {}", spec.kind()))),
            },
        }
    }

    /// Evaluates at a point of ℤ^d given by coordinates, skipping the
    /// membership check. Signed powers read only the first coordinate.
    pub(crate) fn eval_lattice(&self, x: &[i64]) -> f64 {
        match *self {
            ClosedForm::Radial { coeff, alpha } => {
                let r: u64 = x.iter().map(|c| c.unsigned_abs()).sum();
                coeff * math::powf(r as f64, alpha)
            }
            ClosedForm::SignedPower { coeff, alpha } => coeff * math::signed_pow(x[0] as f64, alpha),
        }
    }

    /// Decay bound valid for every adjacent pair of the group.
    ///
    /// With `0 < α ≤ 1` the mean value theorem gives
    /// `| |a|^α − |a ± 1|^α | ≤ α·min^{α−1} ≤ min^{−(1−α)}`, and the pair
    /// straddling 0 differs by exactly `|coeff|`.
    pub fn decay(&self) -> DecayBound {
        let (coeff, alpha) = self.params();
        DecayBound { lipschitz: coeff.abs(), beta: 1.0 - alpha }
    }
}

fn check_params(coeff: f64, alpha: f64) -> Result<()> {
    if !coeff.is_finite() {
        return Err(Error::InvalidParameter(format!("coefficient {coeff} is not finite")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent {alpha} must lie in (0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_cayley_ball, DEFAULT_VERTEX_BUDGET};

    #[test]
    fn rejects_bad_parameters() {
        assert!(ClosedForm::radial(1.0, 0.0).is_err());
        assert!(ClosedForm::radial(1.0, 1.5).is_err());
        assert!(ClosedForm::signed_power(f64::NAN, 0.5).is_err());
        let f = ClosedForm::signed_power(1.0, 0.5).unwrap();
        let z2 = GroupSpec::zd(2).unwrap();
        assert!(!f.supports(&z2));
        assert!(f.eval(&z2, &z2.identity()).is_err());
    }

    #[test]
    fn signed_power_values() {
        let z = GroupSpec::zd(1).unwrap();
        let f = ClosedForm::signed_power(2.0, 0.5).unwrap();
        assert_eq!(f.eval(&z, &Element::Lattice(alloc::vec![-9])).unwrap(), -6.0);
        assert_eq!(f.eval(&z, &Element::Lattice(alloc::vec![0])).unwrap(), 0.0);
    }

    #[test]
    fn decay_bound_holds_on_balls() {
        for (spec, form) in [
            (GroupSpec::zd(1).unwrap(), ClosedForm::signed_power(1.5, 0.5).unwrap()),
            (GroupSpec::zd(2).unwrap(), ClosedForm::radial(1.0, 0.3).unwrap()),
            (GroupSpec::lamplighter(), ClosedForm::radial(-2.0, 0.75).unwrap()),
            (GroupSpec::free(2).unwrap(), ClosedForm::radial(1.0, 1.0).unwrap()),
        ] {
            let ball = build_cayley_ball(&spec, 6, DEFAULT_VERTEX_BUDGET).unwrap();
            let decay = form.decay();
            for (x, y, _) in ball.graph.arcs() {
                let fx = form.eval(&spec, ball.label(x)).unwrap();
                let fy = form.eval(&spec, ball.label(y)).unwrap();
                let bound = decay.at(ball.graph.word_length(x) as u64, ball.graph.word_length(y) as u64);
                assert!((fx - fy).abs() <= bound * (1.0 + 1e-12), "{spec:?} {x} {y}");
            }
        }
    }
}
