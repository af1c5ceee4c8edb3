//! Expression DSL for phases: a hand-rolled tokenizer and recursive-descent
//! parser, a canonical printer, and lowering onto the phase constructors.
//!
//! Grammar (rationals as `p/q` or integers):
//!
//! ```text
//! expr := line(a1, a2, k1, k2)
//!       | two(k1, k2, k3, k4) | two_unchecked(k1, k2, k3, k4)
//!       | resonant(k=[..], a=[..])
//!       | resonant_general(k=[..], a1=[..], a2=[..])
//!       | wr(expr, ..) | galilean(expr, beta) | scale(expr, lambda, ysign)
//!       | sum(term(c, [mx,my,mt], [fx,fy,ft]), ..)
//!       | <canonical polynomial text>
//! ```
//!
//! The last alternative accepts the canonical textual serialization of
//! [`ExpPoly`] (`coeff * t^a x^b y^c * exp(f_t*t + f_x*x + f_y*y)` chunks
//! joined by `+`), so polynomial output round-trips through the parser.
//! `sum`/`term` vectors are in `[x, y, t]` component order, as is the DSL
//! convention; everything is stored internally over `(t, x, y)`.
//!
//! Constructor forms are specific to the KP variable set. With an explicit
//! non-KP variable set (`parse_with_vars`) only the canonical polynomial
//! form is available, with components resolved against the given variables.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::expalg::{ExpPoly, Term, VarSet};
use crate::phases::{self, PhaseError, PhaseSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl From<PhaseError> for DslError {
    fn from(e: PhaseError) -> Self {
        DslError::Semantic(e.to_string())
    }
}

/// One raw `term(c, [mx,my,mt], [fx,fy,ft])` node, kept in the written
/// `[x, y, t]` component order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTerm {
    pub coeff: BigRational,
    pub mono: [u32; 3],
    pub freq: [BigRational; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseExpr {
    Line { a1: BigRational, a2: BigRational, k1: BigRational, k2: BigRational },
    Resonant { k: Vec<BigRational>, a: Vec<BigRational> },
    ResonantGeneral { k: Vec<BigRational>, a1: Vec<BigRational>, a2: Vec<BigRational> },
    TwoSoliton { k: [BigRational; 4] },
    TwoSolitonUnchecked { k: [BigRational; 4] },
    Wr(Vec<PhaseExpr>),
    Galilean { expr: Box<PhaseExpr>, beta: BigRational },
    Scale { expr: Box<PhaseExpr>, lambda: BigRational, y_sign: i8 },
    RawSum(Vec<RawTerm>),
    Canonical(ExpPoly),
}

/// Lowered expression: the exact phase polynomial plus the parameter record
/// when the expression was built from constructors only.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub theta: ExpPoly,
    pub spec: Option<PhaseSpec>,
}

// --- tokenizer ---

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Slash,
    Star,
    Caret,
    Plus,
    Minus,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, DslError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '[' => {
                toks.push((Tok::LBracket, i));
                i += 1;
            }
            ']' => {
                toks.push((Tok::RBracket, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, i));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Int(text[start..i].to_string()), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(DslError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

// --- parser ---

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
    vars: VarSet,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), DslError> {
        if self.peek() == Some(&tok) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn rational(&mut self) -> Result<BigRational, DslError> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            true
        } else {
            false
        };
        let num = match self.bump() {
            Some(Tok::Int(s)) => s,
            _ => return self.err("expected a number"),
        };
        let mut denom = "1".to_string();
        if self.peek() == Some(&Tok::Slash) {
            self.i += 1;
            denom = match self.bump() {
                Some(Tok::Int(s)) => s,
                _ => return self.err("expected a denominator"),
            };
        }
        let n: BigInt = num.parse().expect("digits");
        let d: BigInt = denom.parse().expect("digits");
        if d.is_zero() {
            return self.err("zero denominator");
        }
        let q = BigRational::new(n, d);
        Ok(if negative { -q } else { q })
    }

    fn uint(&mut self) -> Result<u32, DslError> {
        match self.bump() {
            Some(Tok::Int(s)) => {
                s.parse().map_err(|_| DslError::Syntax {
                    pos: self.pos(),
                    msg: "exponent out of range".into(),
                })
            }
            _ => self.err("expected a non-negative integer"),
        }
    }

    fn rational_list(&mut self) -> Result<Vec<BigRational>, DslError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = vec![self.rational()?];
        while self.peek() == Some(&Tok::Comma) {
            self.i += 1;
            out.push(self.rational()?);
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(out)
    }

    fn expr(&mut self) -> Result<PhaseExpr, DslError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                if self.vars != VarSet::kp() {
                    return self.err("constructor forms require the (t, x, y) variable set");
                }
                self.constructor()
            }
            Some(Tok::Int(_)) | Some(Tok::Minus) => self.canonical_poly(),
            _ => self.err("expected an expression"),
        }
    }

    fn constructor(&mut self) -> Result<PhaseExpr, DslError> {
        let name = match self.bump() {
            Some(Tok::Ident(s)) => s,
            _ => unreachable!("caller checked"),
        };
        match name.as_str() {
            "line" => {
                let args = self.fixed_rationals(4)?;
                let [a1, a2, k1, k2]: [BigRational; 4] = args.try_into().unwrap();
                Ok(PhaseExpr::Line { a1, a2, k1, k2 })
            }
            "two" => {
                let args = self.fixed_rationals(4)?;
                Ok(PhaseExpr::TwoSoliton { k: args.try_into().unwrap() })
            }
            "two_unchecked" => {
                let args = self.fixed_rationals(4)?;
                Ok(PhaseExpr::TwoSolitonUnchecked { k: args.try_into().unwrap() })
            }
            "resonant" => {
                let named = self.named_lists(&["k", "a"])?;
                let [k, a]: [Vec<BigRational>; 2] = named.try_into().unwrap();
                Ok(PhaseExpr::Resonant { k, a })
            }
            "resonant_general" => {
                let named = self.named_lists(&["k", "a1", "a2"])?;
                let [k, a1, a2]: [Vec<BigRational>; 3] = named.try_into().unwrap();
                Ok(PhaseExpr::ResonantGeneral { k, a1, a2 })
            }
            "wr" => {
                self.expect(Tok::LParen, "`(`")?;
                let mut exprs = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.i += 1;
                    exprs.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(PhaseExpr::Wr(exprs))
            }
            "galilean" => {
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let beta = self.rational()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(PhaseExpr::Galilean { expr: Box::new(inner), beta })
            }
            "scale" => {
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let lambda = self.rational()?;
                self.expect(Tok::Comma, "`,`")?;
                let sign_pos = self.pos();
                let sign = self.rational()?;
                self.expect(Tok::RParen, "`)`")?;
                let y_sign = if sign == BigRational::from_integer(1.into()) {
                    1
                } else if sign == BigRational::from_integer((-1).into()) {
                    -1
                } else {
                    return Err(DslError::Syntax {
                        pos: sign_pos,
                        msg: "ysign must be 1 or -1".into(),
                    });
                };
                Ok(PhaseExpr::Scale { expr: Box::new(inner), lambda, y_sign })
            }
            "sum" => {
                self.expect(Tok::LParen, "`(`")?;
                let mut terms = vec![self.raw_term()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.i += 1;
                    terms.push(self.raw_term()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(PhaseExpr::RawSum(terms))
            }
            other => self.err(format!("unknown constructor `{other}`")),
        }
    }

    fn fixed_rationals(&mut self, n: usize) -> Result<Vec<BigRational>, DslError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.rational()?];
        for _ in 1..n {
            self.expect(Tok::Comma, "`,`")?;
            out.push(self.rational()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    /// `(name1=[..], name2=[..], ..)` in any order, each exactly once.
    fn named_lists(&mut self, names: &[&str]) -> Result<Vec<Vec<BigRational>>, DslError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut slots: Vec<Option<Vec<BigRational>>> = vec![None; names.len()];
        for idx in 0..names.len() {
            if idx > 0 {
                self.expect(Tok::Comma, "`,`")?;
            }
            let pos = self.pos();
            let key = match self.bump() {
                Some(Tok::Ident(s)) => s,
                _ => return self.err("expected a parameter name"),
            };
            self.expect(Tok::Eq, "`=`")?;
            let list = self.rational_list()?;
            match names.iter().position(|n| *n == key) {
                Some(slot) if slots[slot].is_none() => slots[slot] = Some(list),
                Some(_) => {
                    return Err(DslError::Syntax {
                        pos,
                        msg: format!("duplicate parameter `{key}`"),
                    })
                }
                None => {
                    return Err(DslError::Syntax {
                        pos,
                        msg: format!("unknown parameter `{key}`"),
                    })
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(slots.into_iter().map(|s| s.unwrap()).collect())
    }

    fn raw_term(&mut self) -> Result<RawTerm, DslError> {
        match self.bump() {
            Some(Tok::Ident(s)) if s == "term" => {}
            _ => return self.err("expected `term(`"),
        }
        self.expect(Tok::LParen, "`(`")?;
        let coeff = self.rational()?;
        self.expect(Tok::Comma, "`,`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut mono = [0u32; 3];
        for (i, slot) in mono.iter_mut().enumerate() {
            if i > 0 {
                self.expect(Tok::Comma, "`,`")?;
            }
            *slot = self.uint()?;
        }
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::Comma, "`,`")?;
        let freq_list = self.rational_list()?;
        if freq_list.len() != 3 {
            return self.err("frequency vector must have 3 components [fx,fy,ft]");
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(RawTerm { coeff, mono, freq: freq_list.try_into().unwrap() })
    }

    /// Canonical polynomial text: `coeff (* factors)* (+ term)*`.
    fn canonical_poly(&mut self) -> Result<PhaseExpr, DslError> {
        let n = self.vars.arity();
        let mut terms: Vec<Term> = Vec::new();
        loop {
            let coeff = self.rational()?;
            let mut mono = vec![0u32; n];
            let mut freq = vec![BigRational::zero(); n];
            while self.peek() == Some(&Tok::Star) {
                self.i += 1;
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) if name == "exp" => {
                        self.i += 1;
                        self.expect(Tok::LParen, "`(`")?;
                        loop {
                            let f = self.rational()?;
                            self.expect(Tok::Star, "`*` between frequency and variable")?;
                            let var_pos = self.pos();
                            let var = match self.bump() {
                                Some(Tok::Ident(v)) => v,
                                _ => return self.err("expected a variable name"),
                            };
                            let idx = self.vars.index_of(&var).ok_or(DslError::Syntax {
                                pos: var_pos,
                                msg: format!("unknown variable `{var}`"),
                            })?;
                            freq[idx] = &freq[idx] + f;
                            if self.peek() == Some(&Tok::Plus) {
                                self.i += 1;
                            } else {
                                break;
                            }
                        }
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    Some(Tok::Ident(var)) => {
                        self.i += 1;
                        let idx = self.vars.index_of(&var).ok_or(DslError::Syntax {
                            pos: self.pos(),
                            msg: format!("unknown variable `{var}`"),
                        })?;
                        let power = if self.peek() == Some(&Tok::Caret) {
                            self.i += 1;
                            self.uint()?
                        } else {
                            1
                        };
                        mono[idx] += power;
                        // bare juxtaposed monomial factors: `x^2 y` prints
                        // without a `*` between them
                        while let Some(Tok::Ident(next)) = self.peek().cloned() {
                            if next == "exp" {
                                break;
                            }
                            self.i += 1;
                            let idx = self.vars.index_of(&next).ok_or(DslError::Syntax {
                                pos: self.pos(),
                                msg: format!("unknown variable `{next}`"),
                            })?;
                            let power = if self.peek() == Some(&Tok::Caret) {
                                self.i += 1;
                                self.uint()?
                            } else {
                                1
                            };
                            mono[idx] += power;
                        }
                    }
                    _ => return self.err("expected `exp(`, or a variable"),
                }
            }
            terms.push(Term { coeff, mono, freq });
            if self.peek() == Some(&Tok::Plus) {
                self.i += 1;
            } else {
                break;
            }
        }
        Ok(PhaseExpr::Canonical(ExpPoly::from_terms(self.vars.clone(), terms)))
    }
}

/// Parses an expression over the KP variable set.
pub fn parse(text: &str) -> Result<PhaseExpr, DslError> {
    parse_with_vars(text, &VarSet::kp())
}

/// Parses with an explicit variable set. Non-KP sets accept only the
/// canonical polynomial form.
pub fn parse_with_vars(text: &str, vars: &VarSet) -> Result<PhaseExpr, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, i: 0, end: text.len(), vars: vars.clone() };
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return Err(DslError::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

/// Lowers an AST onto the exact constructors, enforcing their parameter
/// constraints (reported as semantic errors).
pub fn lower(expr: &PhaseExpr) -> Result<Lowered, DslError> {
    match expr {
        PhaseExpr::Line { a1, a2, k1, k2 } => {
            let p = phases::line_soliton(a1, a2, k1, k2)?;
            Ok(Lowered { theta: p.theta, spec: Some(p.spec) })
        }
        PhaseExpr::Resonant { k, a } => {
            let p = phases::resonant(a, k)?;
            Ok(Lowered { theta: p.theta, spec: Some(p.spec) })
        }
        PhaseExpr::ResonantGeneral { k, a1, a2 } => {
            let p = phases::resonant_general(a1, a2, k)?;
            Ok(Lowered { theta: p.theta, spec: Some(p.spec) })
        }
        PhaseExpr::TwoSoliton { k } => {
            let p = phases::two_soliton(&k[0], &k[1], &k[2], &k[3])?;
            Ok(Lowered { theta: p.theta, spec: Some(p.spec) })
        }
        PhaseExpr::TwoSolitonUnchecked { k } => {
            let p = phases::two_soliton_unchecked(&k[0], &k[1], &k[2], &k[3])?;
            Ok(Lowered { theta: p.theta, spec: Some(p.spec) })
        }
        PhaseExpr::Wr(exprs) => {
            let lowered: Vec<Lowered> =
                exprs.iter().map(lower).collect::<Result<_, _>>()?;
            let thetas: Vec<ExpPoly> = lowered.iter().map(|l| l.theta.clone()).collect();
            let theta = phases::wronskian(&thetas)?;
            let spec = lowered
                .iter()
                .map(|l| l.spec.clone())
                .collect::<Option<Vec<_>>>()
                .map(|source| PhaseSpec::Wronskian { source });
            Ok(Lowered { theta, spec })
        }
        PhaseExpr::Galilean { expr, beta } => {
            let inner = lower(expr)?;
            let theta = phases::galilean_theta(&inner.theta, beta)?;
            let spec = inner.spec.map(|s| PhaseSpec::Galilean {
                beta: beta.to_string(),
                source: Box::new(s),
            });
            Ok(Lowered { theta, spec })
        }
        PhaseExpr::Scale { expr, lambda, y_sign } => {
            let inner = lower(expr)?;
            let theta = phases::scale_theta(&inner.theta, lambda, *y_sign)?;
            let spec = inner.spec.map(|s| PhaseSpec::Scale {
                lambda: lambda.to_string(),
                y_sign: *y_sign,
                source: Box::new(s),
            });
            Ok(Lowered { theta, spec })
        }
        PhaseExpr::RawSum(raw_terms) => {
            let vars = VarSet::kp();
            let terms: Vec<Term> = raw_terms
                .iter()
                .map(|r| Term {
                    coeff: r.coeff.clone(),
                    // [x, y, t] component order -> (t, x, y)
                    mono: vec![r.mono[2], r.mono[0], r.mono[1]],
                    freq: vec![r.freq[2].clone(), r.freq[0].clone(), r.freq[1].clone()],
                })
                .collect();
            Ok(Lowered { theta: ExpPoly::from_terms(vars, terms), spec: None })
        }
        PhaseExpr::Canonical(p) => Ok(Lowered { theta: p.clone(), spec: None }),
    }
}

/// Parse and lower in one step (syntax errors, then constraint checks).
pub fn parse_and_lower(text: &str) -> Result<Lowered, DslError> {
    lower(&parse(text)?)
}

fn join_rationals(v: &[BigRational]) -> String {
    v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for PhaseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseExpr::Line { a1, a2, k1, k2 } => {
                write!(f, "line({a1},{a2},{k1},{k2})")
            }
            PhaseExpr::Resonant { k, a } => {
                write!(f, "resonant(k=[{}],a=[{}])", join_rationals(k), join_rationals(a))
            }
            PhaseExpr::ResonantGeneral { k, a1, a2 } => write!(
                f,
                "resonant_general(k=[{}],a1=[{}],a2=[{}])",
                join_rationals(k),
                join_rationals(a1),
                join_rationals(a2)
            ),
            PhaseExpr::TwoSoliton { k } => {
                write!(f, "two({},{},{},{})", k[0], k[1], k[2], k[3])
            }
            PhaseExpr::TwoSolitonUnchecked { k } => {
                write!(f, "two_unchecked({},{},{},{})", k[0], k[1], k[2], k[3])
            }
            PhaseExpr::Wr(exprs) => {
                let inner: Vec<String> = exprs.iter().map(|e| e.to_string()).collect();
                write!(f, "wr({})", inner.join(","))
            }
            PhaseExpr::Galilean { expr, beta } => write!(f, "galilean({expr},{beta})"),
            PhaseExpr::Scale { expr, lambda, y_sign } => {
                write!(f, "scale({expr},{lambda},{y_sign})")
            }
            PhaseExpr::RawSum(terms) => {
                let chunks: Vec<String> = terms
                    .iter()
                    .map(|t| {
                        format!(
                            "term({},[{},{},{}],[{},{},{}])",
                            t.coeff,
                            t.mono[0],
                            t.mono[1],
                            t.mono[2],
                            t.freq[0],
                            t.freq[1],
                            t.freq[2]
                        )
                    })
                    .collect();
                write!(f, "sum({})", chunks.join(","))
            }
            PhaseExpr::Canonical(p) => write!(f, "{p}"),
        }
    }
}
