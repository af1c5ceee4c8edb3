//! Exact exponential-polynomial ring over the rationals.
//!
//! Every symbolic object in this crate is an [`ExpPoly`]: a finite sum of
//! terms `coeff * v1^m1 ... vn^mn * exp(f1*v1 + ... + fn*vn)` with exact
//! rational coefficients, non-negative integer monomial exponents and exact
//! rational frequencies, over a fixed ordered variable set. Functions
//! `x^m exp(f·v)` with distinct `(m, f)` are linearly independent, so an
//! identity of smooth functions holds for all real arguments if and only if
//! the normal form of the difference is empty. All zero-testing in the
//! operator and cone layers reduces to that fact.
//!
//! Normal form: no two terms share a `(freq, mono)` key, terms are sorted by
//! the lexicographic order on the frequency vector and then on the monomial,
//! and no coefficient is zero. The zero polynomial is the empty term list.
//!
//! There is no division. Functionals that carry `1/Θ` denominators are
//! implemented elsewhere in cleared polynomial form.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("variable names must be unique and non-empty")]
    BadVarSet,
    #[error("variable sets do not match")]
    VarSetMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("affine substitution is not exactly representable: a term frequency has nonzero product with the translation offset")]
    InexactTranslation,
    #[error("evaluation overflowed to a non-finite value")]
    NonFinite,
}

/// Ordered set of variable identifiers. The order is fixed at construction;
/// term canonicalization and the textual form depend on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSet {
    names: Arc<[String]>,
}

impl VarSet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, AlgebraError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() || names.iter().any(|n| n.is_empty()) {
            return Err(AlgebraError::BadVarSet);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(AlgebraError::BadVarSet);
            }
        }
        Ok(VarSet { names: names.into() })
    }

    /// The KP variable set `(t, x, y)`.
    pub fn kp() -> Self {
        VarSet::new(&["t", "x", "y"]).unwrap()
    }

    /// The KdV / mKdV variable set `(t, x)`.
    pub fn kdv() -> Self {
        VarSet::new(&["t", "x"]).unwrap()
    }

    /// The ZK / mZK variable set `(t, x1, .., xd)` in dimension `d >= 2`.
    pub fn zk(d: usize) -> Result<Self, AlgebraError> {
        if d < 2 {
            return Err(AlgebraError::BadVarSet);
        }
        let mut names = vec!["t".to_string()];
        for j in 1..=d {
            names.push(format!("x{j}"));
        }
        VarSet::new(&names)
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Variable set with the variable at `idx` removed.
    pub fn without(&self, idx: usize) -> VarSet {
        let names: Vec<String> = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, n)| n.clone())
            .collect();
        VarSet { names: names.into() }
    }
}

/// One normal-form term: `coeff * prod(v_i^mono_i) * exp(sum(freq_i * v_i))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: BigRational,
    pub mono: Vec<u32>,
    pub freq: Vec<BigRational>,
}

impl Term {
    fn key_cmp(&self, other: &Term) -> Ordering {
        match self.freq.cmp(&other.freq) {
            Ordering::Equal => self.mono.cmp(&other.mono),
            ord => ord,
        }
    }

    fn is_constant_one_part(&self) -> bool {
        self.mono.iter().all(|&m| m == 0) && self.freq.iter().all(|f| f.is_zero())
    }
}

/// Exponential polynomial in normal form. Immutable; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpPoly {
    vars: VarSet,
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero(vars: VarSet) -> Self {
        ExpPoly { vars, terms: Vec::new() }
    }

    pub fn constant(vars: VarSet, c: BigRational) -> Self {
        let n = vars.arity();
        ExpPoly::from_terms(
            vars,
            vec![Term { coeff: c, mono: vec![0; n], freq: vec![BigRational::zero(); n] }],
        )
    }

    pub fn constant_i64(vars: VarSet, c: i64) -> Self {
        ExpPoly::constant(vars, BigRational::from_integer(BigInt::from(c)))
    }

    /// The monomial `name^1`.
    pub fn var(vars: VarSet, name: &str) -> Result<Self, AlgebraError> {
        let idx = vars
            .index_of(name)
            .ok_or_else(|| AlgebraError::UnknownVar(name.to_string()))?;
        let n = vars.arity();
        let mut mono = vec![0; n];
        mono[idx] = 1;
        Ok(ExpPoly::from_terms(
            vars,
            vec![Term { coeff: BigRational::one(), mono, freq: vec![BigRational::zero(); n] }],
        ))
    }

    /// The pure exponential `exp(freq · v)`.
    pub fn exponential(vars: VarSet, freq: Vec<BigRational>) -> Result<Self, AlgebraError> {
        if freq.len() != vars.arity() {
            return Err(AlgebraError::DimensionMismatch { expected: vars.arity(), got: freq.len() });
        }
        let n = vars.arity();
        Ok(ExpPoly::from_terms(
            vars,
            vec![Term { coeff: BigRational::one(), mono: vec![0; n], freq }],
        ))
    }

    /// Builds a polynomial from arbitrary terms, canonicalizing them
    /// (sort by `(freq, mono)`, merge like terms, drop zeros). Terms whose
    /// vectors have the wrong arity are rejected by `debug_assert`; callers
    /// inside this crate always construct consistent arities.
    pub fn from_terms(vars: VarSet, mut terms: Vec<Term>) -> Self {
        let n = vars.arity();
        debug_assert!(terms.iter().all(|t| t.mono.len() == n && t.freq.len() == n));
        terms.sort_by(Term::key_cmp);
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(last) = out.last_mut() {
                if last.key_cmp(&t) == Ordering::Equal {
                    last.coeff += t.coeff;
                    if last.coeff.is_zero() {
                        out.pop();
                    }
                    continue;
                }
            }
            if !t.coeff.is_zero() {
                out.push(t);
            }
        }
        ExpPoly { vars, terms: out }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn equals(&self, other: &ExpPoly) -> bool {
        self == other
    }

    fn check_vars(&self, other: &ExpPoly) -> Result<(), AlgebraError> {
        if self.vars != other.vars {
            return Err(AlgebraError::VarSetMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &ExpPoly) -> Result<ExpPoly, AlgebraError> {
        self.check_vars(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(ExpPoly::from_terms(self.vars.clone(), terms))
    }

    pub fn sub(&self, other: &ExpPoly) -> Result<ExpPoly, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExpPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: -t.coeff.clone(), mono: t.mono.clone(), freq: t.freq.clone() })
            .collect();
        ExpPoly { vars: self.vars.clone(), terms }
    }

    /// Multiplication by an exact rational scalar.
    pub fn scale(&self, c: &BigRational) -> ExpPoly {
        if c.is_zero() {
            return ExpPoly::zero(self.vars.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: c * &t.coeff, mono: t.mono.clone(), freq: t.freq.clone() })
            .collect();
        ExpPoly { vars: self.vars.clone(), terms }
    }

    pub fn mul(&self, other: &ExpPoly) -> Result<ExpPoly, AlgebraError> {
        self.check_vars(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mono = a.mono.iter().zip(&b.mono).map(|(x, y)| x + y).collect();
                let freq = a.freq.iter().zip(&b.freq).map(|(x, y)| x + y).collect();
                terms.push(Term { coeff: &a.coeff * &b.coeff, mono, freq });
            }
        }
        Ok(ExpPoly::from_terms(self.vars.clone(), terms))
    }

    pub fn pow(&self, n: u32) -> ExpPoly {
        let mut acc = ExpPoly::constant(self.vars.clone(), BigRational::one());
        for _ in 0..n {
            acc = acc.mul(self).expect("same varset");
        }
        acc
    }

    /// Exact partial derivative, applied `order` times. Order 0 is the
    /// identity. Product rule on the monomial and exponential parts:
    /// `d/dv (v^m e^{fv}) = m v^{m-1} e^{fv} + f v^m e^{fv}`.
    pub fn diff(&self, var: &str, order: u32) -> Result<ExpPoly, AlgebraError> {
        let idx = self
            .vars
            .index_of(var)
            .ok_or_else(|| AlgebraError::UnknownVar(var.to_string()))?;
        let mut cur = self.clone();
        for _ in 0..order {
            let mut terms = Vec::with_capacity(cur.terms.len() * 2);
            for t in &cur.terms {
                if t.mono[idx] > 0 {
                    let mut mono = t.mono.clone();
                    mono[idx] -= 1;
                    terms.push(Term {
                        coeff: &t.coeff * BigRational::from_integer(BigInt::from(t.mono[idx])),
                        mono,
                        freq: t.freq.clone(),
                    });
                }
                if !t.freq[idx].is_zero() {
                    terms.push(Term {
                        coeff: &t.coeff * &t.freq[idx],
                        mono: t.mono.clone(),
                        freq: t.freq.clone(),
                    });
                }
            }
            cur = ExpPoly::from_terms(cur.vars, terms);
        }
        Ok(cur)
    }

    /// The polynomial representing `p` at the affine change of variables
    /// `v -> A v + b`. Frequencies map by the transpose action
    /// (`f -> Aᵀ f`) and monomials expand binomially through exact
    /// polynomial powers of the affine rows.
    ///
    /// Exactness requires `f · b = 0` for every term frequency `f` (always
    /// true for `b = 0` and for purely polynomial inputs); otherwise the
    /// substitution would introduce the irrational constant `exp(f·b)` and
    /// [`AlgebraError::InexactTranslation`] is returned.
    pub fn substitute_affine(
        &self,
        a: &[Vec<BigRational>],
        b: &[BigRational],
    ) -> Result<ExpPoly, AlgebraError> {
        let n = self.vars.arity();
        if a.len() != n || b.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, got: a.len().max(b.len()) });
        }
        for row in a {
            if row.len() != n {
                return Err(AlgebraError::DimensionMismatch { expected: n, got: row.len() });
            }
        }
        // Affine images of the individual variables, as polynomials.
        let rows: Vec<ExpPoly> = (0..n)
            .map(|i| {
                let mut terms = Vec::new();
                if !b[i].is_zero() {
                    terms.push(Term {
                        coeff: b[i].clone(),
                        mono: vec![0; n],
                        freq: vec![BigRational::zero(); n],
                    });
                }
                for j in 0..n {
                    if !a[i][j].is_zero() {
                        let mut mono = vec![0; n];
                        mono[j] = 1;
                        terms.push(Term {
                            coeff: a[i][j].clone(),
                            mono,
                            freq: vec![BigRational::zero(); n],
                        });
                    }
                }
                ExpPoly::from_terms(self.vars.clone(), terms)
            })
            .collect();

        let mut acc = ExpPoly::zero(self.vars.clone());
        for t in &self.terms {
            let dot_b: BigRational = t.freq.iter().zip(b).map(|(f, bi)| f * bi).sum();
            if !dot_b.is_zero() {
                return Err(AlgebraError::InexactTranslation);
            }
            // f -> Aᵀ f
            let new_freq: Vec<BigRational> = (0..n)
                .map(|j| (0..n).map(|i| &t.freq[i] * &a[i][j]).sum())
                .collect();
            let mut piece = ExpPoly::from_terms(
                self.vars.clone(),
                vec![Term { coeff: t.coeff.clone(), mono: vec![0; n], freq: new_freq }],
            );
            for (i, &m) in t.mono.iter().enumerate() {
                if m > 0 {
                    piece = piece.mul(&rows[i].pow(m)).expect("same varset");
                }
            }
            acc = acc.add(&piece).expect("same varset");
        }
        Ok(acc)
    }

    /// Double-precision evaluation at `point`. Each term contributes
    /// `coeff * prod(point_i^mono_i) * exp(freq · point)`; the error is at
    /// most a few ulps per term plus cancellation between terms, i.e. it
    /// grows with the number of terms and the dynamic range of the summands.
    /// A non-finite result is reported as [`AlgebraError::NonFinite`].
    pub fn eval(&self, point: &[f64]) -> Result<f64, AlgebraError> {
        let n = self.vars.arity();
        if point.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, got: point.len() });
        }
        let mut sum = 0.0_f64;
        for t in &self.terms {
            let mut dot = 0.0_f64;
            for (f, p) in t.freq.iter().zip(point) {
                dot += rational_to_f64(f) * p;
            }
            let mut v = rational_to_f64(&t.coeff) * dot.exp();
            for (m, p) in t.mono.iter().zip(point) {
                for _ in 0..*m {
                    v *= p;
                }
            }
            sum += v;
        }
        if !sum.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        Ok(sum)
    }

    /// Evaluation at an exact rational point. When every term frequency is
    /// orthogonal to the point (`freq · point = 0`, in particular for purely
    /// polynomial data) the sum is computed exactly in the rationals and
    /// rounded once at the end. Otherwise each term's exponent is computed
    /// exactly and only then mapped to floating point.
    pub fn eval_rational(&self, point: &[BigRational]) -> Result<f64, AlgebraError> {
        let n = self.vars.arity();
        if point.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, got: point.len() });
        }
        let dots: Vec<BigRational> = self
            .terms
            .iter()
            .map(|t| t.freq.iter().zip(point).map(|(f, p)| f * p).sum())
            .collect();
        if dots.iter().all(|d| d.is_zero()) {
            let mut sum = BigRational::zero();
            for t in &self.terms {
                let mut v = t.coeff.clone();
                for (m, p) in t.mono.iter().zip(point) {
                    for _ in 0..*m {
                        v *= p;
                    }
                }
                sum += v;
            }
            return Ok(rational_to_f64(&sum));
        }
        let mut sum = 0.0_f64;
        for (t, dot) in self.terms.iter().zip(&dots) {
            let mut v = rational_to_f64(&t.coeff) * rational_to_f64(dot).exp();
            for (m, p) in t.mono.iter().zip(point) {
                let pf = rational_to_f64(p);
                for _ in 0..*m {
                    v *= pf;
                }
            }
            sum += v;
        }
        if !sum.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        Ok(sum)
    }

    /// Partitions the terms by their exponential frequency in `var`,
    /// ascending. Each group's coefficient collects the terms over the
    /// remaining variables with the `var` monomial power stripped;
    /// `poly_degree` records the largest stripped power (0 means the group
    /// is a clean `coeff * exp(freq*var)` slice, which is what cone
    /// membership requires).
    pub fn group_by_frequency(&self, var: &str) -> Result<Vec<FrequencyGroup>, AlgebraError> {
        let idx = self
            .vars
            .index_of(var)
            .ok_or_else(|| AlgebraError::UnknownVar(var.to_string()))?;
        let rest = self.vars.without(idx);
        let mut groups: Vec<FrequencyGroup> = Vec::new();
        // terms are sorted with freq lexicographic over the full var order,
        // so re-group by the single frequency component.
        let mut by_freq: Vec<(BigRational, Vec<(Term, u32)>)> = Vec::new();
        for t in &self.terms {
            let f = t.freq[idx].clone();
            let mono: Vec<u32> = strip_index(&t.mono, idx);
            let freq: Vec<BigRational> = strip_index(&t.freq, idx);
            let tagged = (Term { coeff: t.coeff.clone(), mono, freq }, t.mono[idx]);
            match by_freq.iter_mut().find(|(k, _)| *k == f) {
                Some((_, v)) => v.push(tagged),
                None => by_freq.push((f, vec![tagged])),
            }
        }
        by_freq.sort_by(|a, b| a.0.cmp(&b.0));
        for (f, tagged) in by_freq {
            let degree = tagged.iter().map(|(_, d)| *d).max().unwrap_or(0);
            let coeff =
                ExpPoly::from_terms(rest.clone(), tagged.into_iter().map(|(t, _)| t).collect());
            groups.push(FrequencyGroup { freq: f, coeff, poly_degree: degree });
        }
        Ok(groups)
    }
}

fn strip_index<T: Clone>(v: &[T], idx: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, x)| x.clone())
        .collect()
}

/// One slice of a frequency grouping; see [`ExpPoly::group_by_frequency`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyGroup {
    pub freq: BigRational,
    pub coeff: ExpPoly,
    pub poly_degree: u32,
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // fall back to a quotient of (possibly clipped) parts
        let n = q.numer().to_f64().unwrap_or(if q.numer().is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Canonical textual form, one term per `+`-joined chunk:
/// `coeff * t^a x^b y^c * exp(f_t*t + f_x*x + f_y*y)` with rationals as
/// `p/q`. Zero-power monomial factors and zero frequencies are omitted; the
/// zero polynomial prints as `0`. Round-trips through the expression parser.
impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.vars.names();
        let mut first = true;
        for t in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", t.coeff)?;
            if !t.is_constant_one_part() {
                let mut mono_parts: Vec<String> = Vec::new();
                for (i, &m) in t.mono.iter().enumerate() {
                    if m == 1 {
                        mono_parts.push(names[i].clone());
                    } else if m > 1 {
                        mono_parts.push(format!("{}^{}", names[i], m));
                    }
                }
                if !mono_parts.is_empty() {
                    write!(f, " * {}", mono_parts.join(" "))?;
                }
                if t.freq.iter().any(|q| !q.is_zero()) {
                    let freq_parts: Vec<String> = t
                        .freq
                        .iter()
                        .enumerate()
                        .filter(|(_, q)| !q.is_zero())
                        .map(|(i, q)| format!("{}*{}", q, names[i]))
                        .collect();
                    write!(f, " * exp({})", freq_parts.join(" + "))?;
                }
            }
        }
        Ok(())
    }
}

/// Exact square root of a non-negative rational, when it exists.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer();
    let den = q.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
