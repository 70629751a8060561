//! Variance-proxy certificates and the rules that combine them.
//!
//! A [`ProxyCertificate`] is a valid, usually non-optimal, upper bound on a
//! variance proxy together with the chain of rules that produced it. Each rule
//! is sound on its own; preconditions that cannot be checked from a number
//! (independence, centering, boundedness of a multiplier) are recorded in the
//! derivation as caller assertions.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::proxy::Side;

/// The fixed rule set a derivation step may cite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Exact value from the distribution catalog.
    Catalog,
    /// Value supplied by the caller.
    Given,
    /// Independent sums add proxies.
    IndependentSum,
    /// Convexity of the proxy in the mixing weight.
    Convexity,
    /// Scaling by `|a| <= 1` multiplies the proxy by `a^2`.
    Balanced,
    /// `|X - E X|` is upper sub-Poisson with twice the proxy.
    AbsoluteValue,
    /// `xi X` with independent `|xi| <= 1` and centered `X`.
    BoundedMultiplier,
    /// `a <= X <= b` gives `(b - a)^2 / 4`.
    BoundedRange,
    /// `0 <= X <= 1` gives `E X`.
    UnitInterval,
    /// `X <= 1` gives upper proxy `E X^2`.
    BoundedAboveByOne,
    /// `|X| <= 1` gives `E X^2`.
    AbsBoundedByOne,
    /// A sub-Gaussian proxy is a sub-Poisson proxy.
    SubGaussian,
}

impl Rule {
    /// Short citation of the result backing the rule.
    pub fn citation(self) -> &'static str {
        match self {
            Rule::Catalog => "catalog",
            Rule::Given => "given",
            Rule::IndependentSum => "prop:independent-sum",
            Rule::Convexity => "prop:convexity(i)",
            Rule::Balanced => "prop:convexity(ii)",
            Rule::AbsoluteValue => "prop:absolute-value",
            Rule::BoundedMultiplier => "prop:bounded(v)",
            Rule::BoundedRange => "prop:bounded(i)",
            Rule::UnitInterval => "prop:bounded(ii)",
            Rule::BoundedAboveByOne => "prop:bounded(iii)",
            Rule::AbsBoundedByOne => "prop:bounded(iv)",
            Rule::SubGaussian => "prop:sp-le-sg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub rule: Rule,
    pub citation: String,
    pub inputs: Vec<ExtendedReal>,
    pub result: ExtendedReal,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyCertificate {
    pub side: Side,
    pub bound: ExtendedReal,
    pub derivation: Vec<DerivationStep>,
}

impl ProxyCertificate {
    fn leaf(side: Side, bound: ExtendedReal, rule: Rule, inputs: Vec<ExtendedReal>, note: String) -> Self {
        ProxyCertificate {
            side,
            bound,
            derivation: vec![DerivationStep {
                rule,
                citation: rule.citation().to_string(),
                inputs,
                result: bound,
                note,
            }],
        }
    }

    fn derive(
        parents: &[&ProxyCertificate],
        side: Side,
        bound: ExtendedReal,
        rule: Rule,
        inputs: Vec<ExtendedReal>,
        note: impl Into<String>,
    ) -> Self {
        let mut derivation: Vec<DerivationStep> =
            parents.iter().flat_map(|c| c.derivation.iter().cloned()).collect();
        derivation.push(DerivationStep {
            rule,
            citation: rule.citation().to_string(),
            inputs,
            result: bound,
            note: note.into(),
        });
        ProxyCertificate { side, bound, derivation }
    }

    /// A caller-supplied proxy bound.
    pub fn given(side: Side, bound: f64, note: impl Into<String>) -> Result<Self> {
        let b = nonneg_bound(bound)?;
        Ok(Self::leaf(side, b, Rule::Given, vec![b], note.into()))
    }

    /// The exact proxy of a catalog member with known analytic proxies.
    pub fn from_catalog(d: &Distribution, side: Side) -> Result<Self> {
        d.validate()?;
        let a = d.analytic_proxies().ok_or_else(|| {
            Error::Unsupported(format!("{d} has no catalogued proxy; combine member certificates"))
        })?;
        let bound = match side {
            Side::Upper => a.sp_upper,
            Side::Lower => a.sp_lower,
            Side::TwoSided => a.sp_two_sided,
        };
        Ok(Self::leaf(side, bound, Rule::Catalog, vec![bound], format!("{d} ({})", a.source)))
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        self.derivation.iter().map(|s| s.rule)
    }
}

fn nonneg_bound(b: f64) -> Result<ExtendedReal> {
    if b.is_nan() || b < 0.0 {
        return Err(Error::argument(format!("certificate bound {b} must be >= 0")));
    }
    Ok(ExtendedReal::from_f64_unchecked(b))
}

fn require_two_sided(func: &str, c: &ProxyCertificate) -> Result<()> {
    if c.side == Side::TwoSided {
        Ok(())
    } else {
        Err(Error::argument(format!(
            "{func} needs a two-sided certificate, got {}",
            c.side.as_str()
        )))
    }
}

/// Proxy of an independent sum: bounds add. The caller asserts independence.
pub fn cert_sum(certs: &[ProxyCertificate]) -> Result<ProxyCertificate> {
    let first = certs
        .first()
        .ok_or_else(|| Error::argument("cert_sum needs at least one certificate"))?;
    if let Some(c) = certs.iter().find(|c| c.side != first.side) {
        return Err(Error::argument(format!(
            "cert_sum mixes sides {} and {}",
            first.side.as_str(),
            c.side.as_str()
        )));
    }
    if certs.len() == 1 {
        return Ok(first.clone());
    }
    let inputs: Vec<ExtendedReal> = certs.iter().map(|c| c.bound).collect();
    let bound = inputs.iter().copied().sum();
    let parents: Vec<&ProxyCertificate> = certs.iter().collect();
    Ok(ProxyCertificate::derive(
        &parents,
        first.side,
        bound,
        Rule::IndependentSum,
        inputs,
        "assumed: summands independent",
    ))
}

/// Proxy of `(1 - a) X + a Y` for centered `X`, `Y` (any dependence).
pub fn cert_convex(a: f64, cx: &ProxyCertificate, cy: &ProxyCertificate) -> Result<ProxyCertificate> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::argument(format!("convex weight a = {a} outside [0, 1]")));
    }
    require_two_sided("cert_convex", cx)?;
    require_two_sided("cert_convex", cy)?;
    let bound = cx.bound.scale(1.0 - a) + cy.bound.scale(a);
    Ok(ProxyCertificate::derive(
        &[cx, cy],
        Side::TwoSided,
        bound,
        Rule::Convexity,
        vec![ExtendedReal::from_f64_unchecked(a), cx.bound, cy.bound],
        "assumed: X and Y centered",
    ))
}

/// Proxy of `a X`. For `|a| <= 1` the bound scales by `a^2` and a negative `a`
/// swaps the upper and lower tails. For `|a| > 1` no finite bound follows from
/// the rule set and the result is `+inf`.
pub fn cert_scale(a: f64, c: &ProxyCertificate) -> Result<ProxyCertificate> {
    if !a.is_finite() {
        return Err(Error::argument(format!("scale factor {a} is not finite")));
    }
    let side = if a < 0.0 {
        match c.side {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
            Side::TwoSided => Side::TwoSided,
        }
    } else {
        c.side
    };
    let input = vec![ExtendedReal::from_f64_unchecked(a), c.bound];
    if a.abs() > 1.0 {
        return Ok(ProxyCertificate::derive(
            &[c],
            side,
            ExtendedReal::INFINITY,
            Rule::Balanced,
            input,
            "|a| > 1: no closure guarantee",
        ));
    }
    Ok(ProxyCertificate::derive(&[c], side, c.bound.scale(a * a), Rule::Balanced, input, ""))
}

/// Upper proxy of `|X - E X|`: twice the two-sided proxy of `X`.
pub fn cert_abs(c: &ProxyCertificate) -> Result<ProxyCertificate> {
    require_two_sided("cert_abs", c)?;
    Ok(ProxyCertificate::derive(
        &[c],
        Side::Upper,
        c.bound.scale(2.0),
        Rule::AbsoluteValue,
        vec![c.bound],
        "",
    ))
}

/// Proxy of `xi X` for centered `X` and independent `|xi| <= 1`: unchanged.
pub fn cert_bounded_multiplier(c: &ProxyCertificate) -> Result<ProxyCertificate> {
    require_two_sided("cert_bounded_multiplier", c)?;
    Ok(ProxyCertificate::derive(
        &[c],
        Side::TwoSided,
        c.bound,
        Rule::BoundedMultiplier,
        vec![c.bound],
        "assumed: X centered, |xi| <= 1, xi independent of X",
    ))
}

/// Boundedness information a certificate can be built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum BoundedShape {
    /// `a <= X <= b`.
    Range { a: f64, b: f64 },
    /// `0 <= X <= 1` with the given mean.
    UnitInterval { mean: f64 },
    /// `X <= 1` with the given second moment.
    LeOne { second_moment: f64 },
    /// `|X| <= 1` with the given second moment.
    AbsLeOne { second_moment: f64 },
}

pub fn cert_from_bounded(shape: BoundedShape) -> Result<ProxyCertificate> {
    let invalid = |msg: String| Err(Error::argument(msg));
    let equality_note = "equals Var(X) when E X = 0";
    match shape {
        BoundedShape::Range { a, b } => {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return invalid(format!("range needs finite a <= b, got [{a}, {b}]"));
            }
            let w = b - a;
            let bound = ExtendedReal::from_f64_unchecked(w * w / 4.0);
            Ok(ProxyCertificate::leaf(
                Side::TwoSided,
                bound,
                Rule::BoundedRange,
                vec![ExtendedReal::from_f64_unchecked(a), ExtendedReal::from_f64_unchecked(b)],
                "via Hoeffding's lemma and the sub-Gaussian comparison".into(),
            ))
        }
        BoundedShape::UnitInterval { mean } => {
            if !(0.0..=1.0).contains(&mean) {
                return invalid(format!("mean {mean} of a [0, 1] variable must lie in [0, 1]"));
            }
            let b = ExtendedReal::from_f64_unchecked(mean);
            Ok(ProxyCertificate::leaf(Side::TwoSided, b, Rule::UnitInterval, vec![b], String::new()))
        }
        BoundedShape::LeOne { second_moment } => {
            if !(second_moment.is_finite() && second_moment >= 0.0) {
                return invalid(format!("second moment {second_moment} must be finite and >= 0"));
            }
            let b = ExtendedReal::from_f64_unchecked(second_moment);
            Ok(ProxyCertificate::leaf(Side::Upper, b, Rule::BoundedAboveByOne, vec![b], equality_note.into()))
        }
        BoundedShape::AbsLeOne { second_moment } => {
            if !(0.0..=1.0).contains(&second_moment) {
                return invalid(format!("second moment {second_moment} of |X| <= 1 must lie in [0, 1]"));
            }
            let b = ExtendedReal::from_f64_unchecked(second_moment);
            Ok(ProxyCertificate::leaf(Side::TwoSided, b, Rule::AbsBoundedByOne, vec![b], equality_note.into()))
        }
    }
}

/// A sub-Gaussian proxy `sg` certifies the same sub-Poisson proxy on the same side.
pub fn cert_from_subgaussian(sg: f64, side: Side) -> Result<ProxyCertificate> {
    let b = nonneg_bound(sg)?;
    Ok(ProxyCertificate::leaf(side, b, Rule::SubGaussian, vec![b], String::new()))
}
