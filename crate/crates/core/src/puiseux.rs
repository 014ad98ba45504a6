//! Truncated Puiseux series in `t` with rational exponents and coefficients.
//!
//! A series is a finite sum `c1*t^e1 + c2*t^e2 + ...` with strictly increasing
//! exponents, trusted only modulo `o(t^K)` where `K` is its truncation order.
//! Every symbolic exponent computation in the crate goes through this type.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rationals used for exponents and coefficients.
pub type Q = BigRational;

/// Default truncation order.
pub const DEFAULT_TRUNCATION: i64 = 12;

/// Builds the rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Lossy conversion to `f64`.
pub fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // very large numerators/denominators: go through the quotient of logs
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Rational approximation of `x` with denominator `den`, rounding to nearest.
pub fn q_from_f64(x: f64, den: i64) -> Q {
    let n = (x * den as f64).round() as i64;
    q(n, den)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PuiseuxError {
    #[error("cannot parse series: {0}")]
    Parse(String),
    #[error("negative exponent {0} is not allowed")]
    NegativeExponent(String),
    #[error("both coordinates are identically zero")]
    BothZero,
}

/// Leading term of a series, or the distinguished zero marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeadingTerm {
    Zero,
    Term { exponent: Q, coefficient: Q },
}

impl LeadingTerm {
    pub fn exponent(&self) -> Option<&Q> {
        match self {
            LeadingTerm::Zero => None,
            LeadingTerm::Term { exponent, .. } => Some(exponent),
        }
    }

    pub fn coefficient(&self) -> Option<&Q> {
        match self {
            LeadingTerm::Zero => None,
            LeadingTerm::Term { coefficient, .. } => Some(coefficient),
        }
    }
}

/// Outcome of comparing two series for all sufficiently small `t > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Eventual {
    Less,
    Equal,
    Greater,
    Inconclusive,
}

/// The square root of a positive rational, kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SqrtQ {
    pub radicand: Q,
}

impl SqrtQ {
    pub fn new(radicand: Q) -> Self {
        SqrtQ { radicand }
    }

    /// The exact rational root when the radicand is a rational square.
    pub fn exact(&self) -> Option<Q> {
        exact_sqrt(&self.radicand)
    }

    pub fn to_f64(&self) -> f64 {
        qf(&self.radicand).sqrt()
    }
}

impl fmt::Display for SqrtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(r) => write!(f, "{}", r),
            None => write!(f, "sqrt({})", self.radicand),
        }
    }
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

/// Leading term of `dx^2 + dy^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormLeading {
    /// Exponent of the squared norm.
    pub exponent: Q,
    /// Coefficient of the squared norm (always positive).
    pub coefficient: Q,
}

impl NormLeading {
    /// Exponent of the norm itself.
    pub fn distance_exponent(&self) -> Q {
        &self.exponent / qi(2)
    }

    /// Coefficient of the norm, as a symbolic square root.
    pub fn distance_coefficient(&self) -> SqrtQ {
        SqrtQ::new(self.coefficient.clone())
    }
}

/// A truncated Puiseux series.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PuiseuxSeries {
    terms: Vec<(Q, Q)>,
    truncation: Q,
}

impl PuiseuxSeries {
    /// The zero series known modulo `t^k`.
    pub fn zero(truncation: Q) -> Self {
        PuiseuxSeries { terms: Vec::new(), truncation }
    }

    pub fn constant(c: Q, truncation: Q) -> Self {
        Self::from_terms(vec![(Q::zero(), c)], truncation)
    }

    pub fn monomial(c: Q, e: Q, truncation: Q) -> Self {
        Self::from_terms(vec![(e, c)], truncation)
    }

    /// `t` with the default truncation.
    pub fn t() -> Self {
        Self::monomial(Q::one(), Q::one(), qi(DEFAULT_TRUNCATION))
    }

    /// Normalizes arbitrary `(exponent, coefficient)` pairs: sorts, merges equal
    /// exponents, drops zero coefficients and terms at or beyond the truncation.
    ///
    /// Panics on a negative exponent; parsers reject those before getting here.
    pub fn from_terms(mut raw: Vec<(Q, Q)>, truncation: Q) -> Self {
        for (e, _) in &raw {
            assert!(!e.is_negative(), "negative exponent {}", e);
        }
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Q, Q)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            if e >= truncation {
                continue;
            }
            match terms.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => terms.push((e, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        PuiseuxSeries { terms, truncation }
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    pub fn truncation(&self) -> &Q {
        &self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same series with the truncation lowered to `k` if `k` is smaller.
    pub fn truncated(&self, k: &Q) -> Self {
        if k >= &self.truncation {
            return self.clone();
        }
        Self::from_terms(self.terms.clone(), k.clone())
    }

    /// Least common denominator of the stored exponents.
    pub fn ramification(&self) -> BigInt {
        self.terms
            .iter()
            .fold(BigInt::one(), |acc, (e, _)| acc.lcm(e.denom()))
    }

    pub fn leading(&self) -> LeadingTerm {
        match self.terms.first() {
            None => LeadingTerm::Zero,
            Some((e, c)) => LeadingTerm::Term { exponent: e.clone(), coefficient: c.clone() },
        }
    }

    pub fn leading_exponent(&self) -> Option<&Q> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn leading_coefficient(&self) -> Option<&Q> {
        self.terms.first().map(|(_, c)| c)
    }

    /// Coefficient of `t^e` (zero when absent).
    pub fn coefficient_at(&self, e: &Q) -> Q {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Smallest exponent the series can still be trusted to have, i.e. the
    /// leading exponent, or the truncation order for the zero series.
    fn lead_or_truncation(&self) -> &Q {
        self.leading_exponent().unwrap_or(&self.truncation)
    }

    /// Equality of the known parts: identical terms below the smaller truncation.
    pub fn eq_mod_truncation(&self, other: &Self) -> bool {
        let k = (&self.truncation).min(&other.truncation);
        self.truncated(k).terms == other.truncated(k).terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = (&self.truncation).min(&other.truncation).clone();
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().cloned());
        Self::from_terms(raw, k)
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            truncation: self.truncation.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product truncated at `min(K_a + lead(b), K_b + lead(a))`.
    pub fn mul(&self, other: &Self) -> Self {
        let ka = &self.truncation + other.lead_or_truncation();
        let kb = &other.truncation + self.lead_or_truncation();
        let k = ka.min(kb);
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if e < k {
                    raw.push((e, ca * cb));
                }
            }
        }
        Self::from_terms(raw, k)
    }

    /// Multiplication by a rational constant.
    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.truncation.clone());
        }
        PuiseuxSeries {
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
            truncation: self.truncation.clone(),
        }
    }

    /// Multiplication by `c * t^e`; the truncation shifts by `e`.
    pub fn mul_monomial(&self, c: &Q, e: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.truncation + e);
        }
        PuiseuxSeries {
            terms: self.terms.iter().map(|(x, y)| (x + e, y * c)).collect(),
            truncation: &self.truncation + e,
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Floating evaluation of the stored terms; the truncation tail is ignored.
    pub fn eval(&self, t: f64) -> f64 {
        let lt = t.ln();
        self.terms
            .iter()
            .map(|(e, c)| {
                let cf = qf(c);
                if e.is_zero() {
                    cf
                } else if e.is_integer() {
                    match e.to_i32() {
                        Some(k) => cf * t.powi(k),
                        None => cf * (qf(e) * lt).exp(),
                    }
                } else {
                    cf * (qf(e) * lt).exp()
                }
            })
            .sum()
    }

    /// Sign of `self - other` for all sufficiently small `t > 0`.
    pub fn compare_eventual(&self, other: &Self) -> Eventual {
        let d = self.sub(other);
        match d.leading_coefficient() {
            Some(c) if c.is_positive() => Eventual::Greater,
            Some(_) => Eventual::Less,
            None => {
                if self.truncation == other.truncation {
                    Eventual::Equal
                } else {
                    Eventual::Inconclusive
                }
            }
        }
    }

    /// Eventual sign against zero.
    pub fn sign_eventual(&self) -> Eventual {
        match self.leading_coefficient() {
            Some(c) if c.is_positive() => Eventual::Greater,
            Some(_) => Eventual::Less,
            None => Eventual::Equal,
        }
    }

    /// Parses the text form, using `default_truncation` when no `O(...)` term
    /// is present.
    pub fn parse_with(s: &str, default_truncation: &Q) -> Result<Self, PuiseuxError> {
        Parser::new(s).parse(default_truncation)
    }
}

impl FromStr for PuiseuxSeries {
    type Err = PuiseuxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_with(s, &qi(DEFAULT_TRUNCATION))
    }
}

impl std::ops::Add for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, rhs: Self) -> PuiseuxSeries {
        PuiseuxSeries::add(self, rhs)
    }
}

impl std::ops::Sub for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, rhs: Self) -> PuiseuxSeries {
        PuiseuxSeries::sub(self, rhs)
    }
}

impl std::ops::Mul for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, rhs: Self) -> PuiseuxSeries {
        PuiseuxSeries::mul(self, rhs)
    }
}

impl std::ops::Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        PuiseuxSeries::neg(self)
    }
}

/// Leading term of `dx^2 + dy^2`.
pub fn norm2_leading(dx: &PuiseuxSeries, dy: &PuiseuxSeries) -> Result<NormLeading, PuiseuxError> {
    let lx = dx.terms.first();
    let ly = dy.terms.first();
    let (e, c) = match (lx, ly) {
        (None, None) => return Err(PuiseuxError::BothZero),
        (Some((ex, cx)), None) => (ex.clone(), cx * cx),
        (None, Some((ey, cy))) => (ey.clone(), cy * cy),
        (Some((ex, cx)), Some((ey, cy))) => match ex.cmp(ey) {
            Ordering::Less => (ex.clone(), cx * cx),
            Ordering::Greater => (ey.clone(), cy * cy),
            Ordering::Equal => (ex.clone(), cx * cx + cy * cy),
        },
    };
    Ok(NormLeading { exponent: e * qi(2), coefficient: c })
}

fn fmt_exponent(e: &Q) -> String {
    format!("t^{{{}}}", e)
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if e.is_zero() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", fmt_exponent(e))?;
            } else {
                write!(f, "{}*{}", mag, fmt_exponent(e))?;
            }
        }
        write!(f, " + O({})", fmt_exponent(&self.truncation))
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, src }
    }

    fn err(&self, what: &str) -> PuiseuxError {
        PuiseuxError::Parse(format!("{} in `{}` at offset {}", what, self.src.trim(), self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self, default_truncation: &Q) -> Result<PuiseuxSeries, PuiseuxError> {
        if self.chars.is_empty() {
            return Err(self.err("empty series"));
        }
        let mut raw = Vec::new();
        let mut truncation: Option<Q> = None;
        let mut first = true;
        while self.pos < self.chars.len() {
            let negative = self.eat('-');
            if !negative && !self.eat('+') && !first {
                return Err(self.err("expected `+` or `-`"));
            }
            first = false;
            if self.peek() == Some('O') {
                self.pos += 1;
                if !self.eat('(') {
                    return Err(self.err("expected `(` after `O`"));
                }
                if !self.eat('t') {
                    return Err(self.err("expected `t` inside `O(...)`"));
                }
                let k = if self.eat('^') { self.exponent()? } else { Q::one() };
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                if negative {
                    return Err(self.err("`O(...)` cannot be negated"));
                }
                truncation = Some(k);
                continue;
            }
            let (e, c) = self.term()?;
            raw.push((e, if negative { -c } else { c }));
        }
        let k = truncation.unwrap_or_else(|| default_truncation.clone());
        Ok(PuiseuxSeries::from_terms(raw, k))
    }

    fn term(&mut self) -> Result<(Q, Q), PuiseuxError> {
        let coef = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => Some(self.rational()?),
            Some('t') => None,
            _ => return Err(self.err("expected a coefficient or `t`")),
        };
        let has_t = if coef.is_some() {
            if self.eat('*') {
                if self.peek() != Some('t') {
                    return Err(self.err("expected `t` after `*`"));
                }
                self.pos += 1;
                true
            } else {
                self.eat('t')
            }
        } else {
            self.pos += 1;
            true
        };
        let e = if has_t {
            if self.eat('^') {
                self.exponent()?
            } else {
                Q::one()
            }
        } else {
            Q::zero()
        };
        Ok((e, coef.unwrap_or_else(Q::one)))
    }

    fn exponent(&mut self) -> Result<Q, PuiseuxError> {
        let braced = self.eat('{');
        let negative = self.eat('-');
        let e = self.rational()?;
        if braced && !self.eat('}') {
            return Err(self.err("expected `}`"));
        }
        if negative && !e.is_zero() {
            return Err(PuiseuxError::NegativeExponent(format!("-{}", e)));
        }
        Ok(e)
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        s
    }

    /// `123`, `3/4` or a decimal `0.25`, all converted exactly.
    fn rational(&mut self) -> Result<Q, PuiseuxError> {
        let int = self.digits();
        let mut value = if int.is_empty() {
            Q::zero()
        } else {
            Q::from_integer(int.parse::<BigInt>().map_err(|_| self.err("bad integer"))?)
        };
        if self.eat('.') {
            let frac = self.digits();
            if frac.is_empty() && int.is_empty() {
                return Err(self.err("bad decimal"));
            }
            if !frac.is_empty() {
                let num: BigInt = frac.parse().map_err(|_| self.err("bad decimal"))?;
                let den = num_traits::pow(BigInt::from(10), frac.len());
                value += BigRational::new(num, den);
            }
        } else if int.is_empty() {
            return Err(self.err("expected a number"));
        }
        if self.peek() == Some('/') {
            self.pos += 1;
            let d = self.digits();
            if d.is_empty() {
                return Err(self.err("expected a denominator"));
            }
            let den: BigInt = d.parse().map_err(|_| self.err("bad denominator"))?;
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            value /= Q::from_integer(den);
        }
        Ok(value)
    }
}
