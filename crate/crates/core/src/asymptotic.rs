//! Asymptotic expansions `Σ c_i k^{e_i} + O(k^r)` as `k → ∞`, used to decide
//! convergence and boundedness of tails for parametric families.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum number of terms kept after any operation.
pub const MAX_TERMS: usize = 10;

/// Merged coefficients below this relative size cancel to zero.
pub const CANCEL_TOL: f64 = 1e-12;

const EXP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub exponent: f64,
    pub coeff: f64,
}

/// Terms in strictly decreasing exponent order, plus an optional remainder
/// exponent `r` meaning `+ O(k^r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    terms: Vec<Term>,
    remainder: Option<f64>,
}

impl Expansion {
    pub fn zero() -> Self {
        Self { terms: Vec::new(), remainder: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0.0)
    }

    /// `c · k^e`.
    pub fn monomial(c: f64, e: f64) -> Self {
        Self::from_terms(vec![Term { exponent: e, coeff: c }], None)
    }

    pub fn from_terms(terms: Vec<Term>, remainder: Option<f64>) -> Self {
        let mut raw: Vec<(Term, f64)> = terms.into_iter().map(|t| (t, t.coeff.abs())).collect();
        raw.sort_by(|a, b| b.0.exponent.total_cmp(&a.0.exponent));
        let mut merged: Vec<(Term, f64)> = Vec::with_capacity(raw.len());
        for (t, mag) in raw {
            match merged.last_mut() {
                Some((last, m)) if (last.exponent - t.exponent).abs() <= EXP_TOL => {
                    last.coeff += t.coeff;
                    *m += mag;
                }
                _ => merged.push((t, mag)),
            }
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|(t, mag)| t.coeff.abs() > CANCEL_TOL * mag && t.coeff != 0.0)
            .map(|(t, _)| t)
            .filter(|t| remainder.map_or(true, |r| t.exponent > r + EXP_TOL))
            .collect();
        let mut remainder = remainder;
        if terms.len() > MAX_TERMS {
            let cut = terms[MAX_TERMS].exponent;
            remainder = Some(remainder.map_or(cut, |r| r.max(cut)));
            terms.truncate(MAX_TERMS);
        }
        Self { terms, remainder }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn remainder(&self) -> Option<f64> {
        self.remainder
    }

    pub fn leading(&self) -> Option<Term> {
        self.terms.first().copied()
    }

    /// Exact zero (no terms and no remainder).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.remainder.is_none()
    }

    /// Exponent of the dominant part, including the remainder.
    pub fn order(&self) -> Option<f64> {
        match (self.leading(), self.remainder) {
            (Some(t), _) => Some(t.exponent),
            (None, r) => r,
        }
    }

    /// Value of the explicit terms at `k` (the remainder is ignored).
    pub fn eval(&self, k: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff * k.powf(t.exponent)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms, max_opt(self.remainder, other.remainder))
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|t| Term { exponent: t.exponent, coeff: t.coeff * s }).collect(),
            remainder: self.remainder,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term { exponent: a.exponent + b.exponent, coeff: a.coeff * b.coeff });
            }
        }
        let r1 = self.remainder.and_then(|r| other.order().map(|o| r + o));
        let r2 = other.remainder.and_then(|r| self.order().map(|o| r + o));
        Self::from_terms(terms, max_opt(r1, r2))
    }

    /// The expansion of `f(k + 1)`.
    pub fn shift(&self) -> Self {
        let mut terms = Vec::new();
        let mut remainder = self.remainder;
        for t in &self.terms {
            let integer = t.exponent >= 0.0 && t.exponent.fract() == 0.0;
            let n_max = if integer { t.exponent as usize } else { MAX_TERMS - 1 };
            let mut binom = 1.0;
            for n in 0..=n_max {
                if n > 0 {
                    binom *= (t.exponent - (n - 1) as f64) / n as f64;
                }
                terms.push(Term { exponent: t.exponent - n as f64, coeff: t.coeff * binom });
            }
            if !integer {
                remainder = max_opt(remainder, Some(t.exponent - MAX_TERMS as f64));
            }
        }
        Self::from_terms(terms, remainder)
    }

    /// `1/f`, which needs a nonzero leading term.
    pub fn recip(&self) -> Result<Self> {
        let lead = self
            .leading()
            .ok_or_else(|| Error::TailUnclassifiable("reciprocal of an expansion without a leading term".into()))?;
        let inv_lead = Self::monomial(1.0 / lead.coeff, -lead.exponent);
        // f = lead·(1 + g) with g → 0
        let g = Self::from_terms(self.terms[1..].to_vec(), self.remainder).mul(&inv_lead);
        if g.is_zero() {
            return Ok(inv_lead);
        }
        let neg_g = g.neg();
        let mut sum = Self::constant(1.0);
        let mut power = Self::constant(1.0);
        for _ in 0..MAX_TERMS {
            power = power.mul(&neg_g);
            sum = sum.add(&power);
        }
        let tail = power.mul(&neg_g).order();
        Ok(Self::from_terms(sum.terms, max_opt(sum.remainder, tail)).mul(&inv_lead))
    }

    /// `|f|` for large `k`.
    pub fn abs(&self) -> Self {
        match self.leading() {
            Some(t) if t.coeff < 0.0 => self.neg(),
            _ => self.clone(),
        }
    }

    /// The eventually larger of two expansions.
    pub fn max(&self, other: &Self) -> Self {
        let diff = self.sub(other);
        match diff.leading() {
            Some(t) if t.coeff > 0.0 => self.clone(),
            Some(_) => other.clone(),
            None => Self::from_terms(self.terms.clone(), max_opt(self.remainder, diff.remainder)),
        }
    }

    /// Convergence of `Σ_k f(k)` for an eventually nonnegative summand.
    pub fn series(&self) -> Result<SeriesClass> {
        match (self.leading(), self.remainder) {
            (Some(t), _) if t.coeff < 0.0 => Err(Error::TailUnclassifiable(format!(
                "summand is eventually negative (leading term {} k^{})",
                t.coeff, t.exponent
            ))),
            (Some(t), _) => Ok(if t.exponent < -1.0 { SeriesClass::Converges } else { SeriesClass::Diverges }),
            (None, None) => Ok(SeriesClass::Converges),
            (None, Some(r)) if r < -1.0 => Ok(SeriesClass::Converges),
            (None, Some(r)) => Err(Error::TailUnclassifiable(format!(
                "summand cancels to O(k^{r}), which does not decide convergence"
            ))),
        }
    }

    /// Limit behaviour for an upper-bound check.
    pub fn upper_tail(&self) -> Result<UpperTail> {
        match self.leading() {
            Some(t) if t.exponent > EXP_TOL => Ok(if t.coeff < 0.0 { UpperTail::MinusInfinity } else { UpperTail::Unbounded }),
            Some(t) if t.exponent.abs() <= EXP_TOL => match self.remainder {
                Some(r) if r >= -EXP_TOL => Err(Error::TailUnclassifiable("constant term with an O(1) remainder".into())),
                _ => Ok(UpperTail::Limit(t.coeff)),
            },
            _ => match self.remainder {
                Some(r) if r >= -EXP_TOL => Err(Error::TailUnclassifiable(format!("remainder O(k^{r}) is not bounded"))),
                _ => Ok(UpperTail::Limit(0.0)),
            },
        }
    }

    /// Classification of `f(k) → 0`.
    pub fn tends_to_zero(&self) -> Result<bool> {
        match self.order() {
            None => Ok(true),
            Some(e) if e < -EXP_TOL => Ok(true),
            Some(_) if self.leading().is_some() => Ok(false),
            Some(_) => Err(Error::TailUnclassifiable("remainder does not decay".into())),
        }
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesClass {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperTail {
    /// `f(k) → −∞`.
    MinusInfinity,
    /// `f(k) → L`.
    Limit(f64),
    /// `f(k) → +∞`.
    Unbounded,
}

impl UpperTail {
    pub fn is_bounded(&self) -> bool {
        !matches!(self, UpperTail::Unbounded)
    }
}

/// Orders expansions by eventual size.
pub fn compare(a: &Expansion, b: &Expansion) -> Option<Ordering> {
    let diff = a.sub(b);
    match diff.leading() {
        Some(t) if t.coeff > 0.0 => Some(Ordering::Greater),
        Some(_) => Some(Ordering::Less),
        None if diff.is_zero() => Some(Ordering::Equal),
        None => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_terms(e: &Expansion, expected: &[(f64, f64)]) {
        assert_eq!(e.terms().len(), expected.len(), "{e:?}");
        for (t, (ex, c)) in e.terms().iter().zip(expected) {
            assert!((t.exponent - ex).abs() < 1e-12 && (t.coeff - c).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn integer_shift_is_exact() {
        let k = Expansion::monomial(1.0, 1.0);
        let s = k.shift();
        assert_terms(&s, &[(1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(s.remainder(), None);
        let sq = Expansion::monomial(4.0, 2.0).shift();
        assert_terms(&sq, &[(2.0, 4.0), (1.0, 8.0), (0.0, 4.0)]);
    }

    #[test]
    fn negative_power_shift() {
        // 1/(k+1) = 1/k − 1/k² + 1/k³ − …
        let s = Expansion::monomial(1.0, -1.0).shift();
        assert_eq!(s.leading(), Some(Term { exponent: -1.0, coeff: 1.0 }));
        assert!((s.terms()[1].coeff + 1.0).abs() < 1e-15);
        assert!(s.remainder().unwrap() < -9.0);
        assert!((s.eval(50.0) - 1.0 / 51.0).abs() < 1e-14);
    }

    #[test]
    fn cancellation_gives_exact_zero() {
        let k = Expansion::monomial(1.0, 1.0);
        let alpha = Expansion::from_terms(vec![Term { exponent: 1.0, coeff: -2.0 }, Term { exponent: 0.0, coeff: -1.0 }], None);
        let sum = alpha.add(&k).add(&k.shift());
        assert!(sum.is_zero(), "{sum:?}");
    }

    #[test]
    fn reciprocal_of_sum() {
        // 1/(k + 1)
        let f = Expansion::from_terms(vec![Term { exponent: 1.0, coeff: 1.0 }, Term { exponent: 0.0, coeff: 1.0 }], None);
        let r = f.recip().unwrap();
        assert!((r.eval(40.0) - 1.0 / 41.0).abs() < 1e-14);
        assert!(Expansion::from_terms(vec![], Some(-2.0)).recip().is_err());
        assert_eq!(Expansion::monomial(2.0, 3.0).recip().unwrap(), Expansion::monomial(0.5, -3.0));
    }

    #[test]
    fn series_classification() {
        assert_eq!(Expansion::monomial(1.0, -0.8).series().unwrap(), SeriesClass::Diverges);
        assert_eq!(Expansion::monomial(1.0, -2.0).series().unwrap(), SeriesClass::Converges);
        assert_eq!(Expansion::monomial(1.0, -1.0).series().unwrap(), SeriesClass::Diverges);
        assert_eq!(Expansion::zero().series().unwrap(), SeriesClass::Converges);
        assert!(Expansion::from_terms(vec![], Some(0.0)).series().is_err());
        assert!(Expansion::monomial(-1.0, 0.0).series().is_err());
    }

    #[test]
    fn upper_tails() {
        assert_eq!(Expansion::monomial(-1.0, 2.0).upper_tail().unwrap(), UpperTail::MinusInfinity);
        assert_eq!(Expansion::monomial(1.0, 1.0).upper_tail().unwrap(), UpperTail::Unbounded);
        assert_eq!(Expansion::constant(3.0).upper_tail().unwrap(), UpperTail::Limit(3.0));
        assert_eq!(Expansion::zero().upper_tail().unwrap(), UpperTail::Limit(0.0));
    }

    #[test]
    fn max_and_abs() {
        let a = Expansion::monomial(-3.0, 1.0);
        assert_eq!(a.abs(), Expansion::monomial(3.0, 1.0));
        let b = Expansion::monomial(1.0, 2.0);
        assert_eq!(a.abs().max(&b), b);
        assert_eq!(compare(&a, &b), Some(Ordering::Less));
    }

    #[test]
    fn truncation_sets_remainder() {
        let terms = (0..15).map(|i| Term { exponent: -(i as f64), coeff: 1.0 }).collect();
        let e = Expansion::from_terms(terms, None);
        assert_eq!(e.terms().len(), MAX_TERMS);
        assert_eq!(e.remainder(), Some(-(MAX_TERMS as f64)));
    }
}
