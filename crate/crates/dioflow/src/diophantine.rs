//! Exact multivariate integer polynomials and the enumeration oracle.
//!
//! Everything in this module is exact: coefficients are arbitrary-precision
//! integers, evaluation never rounds, and the brute-force minimum of `D²` over
//! a lattice box is the ground truth the floating-point modules are checked
//! against.
//!
//! Variables range over the NON-NEGATIVE integers (they will become bosonic
//! occupation numbers, which start at zero). To ask the classical question
//! over strictly positive integers, substitute `xi -> xi + 1` first.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Hard ceiling on lattice points the oracle will visit unless overridden.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Largest integer magnitude exactly representable in an `f64`.
const F64_EXACT_LIMIT: u64 = 1 << 53;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum DiophantineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("arity mismatch: polynomial has {expected} variables, point has {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("lattice box has {dims} dimensions, polynomial has {expected} variables")]
    BoxMismatch { dims: usize, expected: usize },
    #[error("enumeration cap exceeded: box holds {volume} points, cap is {cap}")]
    EnumerationCapExceeded { volume: u128, cap: u128 },
    #[error("box bound inverted in dimension {dim}: lower {lower} > upper {upper}")]
    InvertedBounds { dim: usize, lower: u64, upper: u64 },
    #[error("value {value} exceeds the exact f64 range (2^53); shrink the box or the coefficients")]
    PrecisionOverflow { value: BigInt },
}

/// One collected term: an integer coefficient and one exponent per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: BigInt,
    pub exponents: Vec<u32>,
}

/// A multivariate integer polynomial in fully expanded, collected form.
///
/// Invariants: exponent tuples are pairwise distinct, no coefficient is zero,
/// every exponent tuple has length `num_vars >= 1`, and monomials are stored
/// in graded-lexicographic order (total degree descending, then exponents
/// lexicographically descending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    num_vars: usize,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    /// Build a polynomial from raw terms, collecting duplicates and dropping
    /// zero coefficients. `num_vars` must be at least 1 and every exponent
    /// tuple must have exactly that length.
    pub fn new(
        num_vars: usize,
        terms: impl IntoIterator<Item = (BigInt, Vec<u32>)>,
    ) -> Result<Self, DiophantineError> {
        assert!(num_vars >= 1, "polynomials have at least one variable");
        let mut collected: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (coeff, exps) in terms {
            if exps.len() != num_vars {
                return Err(DiophantineError::ArityMismatch {
                    expected: num_vars,
                    got: exps.len(),
                });
            }
            let entry = collected.entry(exps).or_insert_with(BigInt::zero);
            *entry += coeff;
        }
        Ok(Self::from_map(num_vars, collected))
    }

    fn from_map(num_vars: usize, map: BTreeMap<Vec<u32>, BigInt>) -> Self {
        let mut monomials: Vec<Monomial> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coefficient)| Monomial {
                coefficient,
                exponents,
            })
            .collect();
        monomials.sort_by(|a, b| {
            let da: u64 = a.exponents.iter().map(|&e| e as u64).sum();
            let db: u64 = b.exponents.iter().map(|&e| e as u64).sum();
            db.cmp(&da).then_with(|| b.exponents.cmp(&a.exponents))
        });
        Polynomial {
            num_vars,
            monomials,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Exact value of the polynomial at a lattice point.
    pub fn evaluate(&self, point: &[u64]) -> Result<BigInt, DiophantineError> {
        if point.len() != self.num_vars {
            return Err(DiophantineError::ArityMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let mut total = BigInt::zero();
        for m in &self.monomials {
            let mut term = m.coefficient.clone();
            for (x, &e) in point.iter().zip(&m.exponents) {
                if e > 0 {
                    term *= BigInt::from(*x).pow(e);
                }
            }
            total += term;
        }
        Ok(total)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            let negative = m.coefficient.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = m.coefficient.magnitude();
            let vars: Vec<String> = m
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        format!("x{}", j + 1)
                    } else {
                        format!("x{}^{}", j + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if *mag != BigUint::from(1u32) {
                    write!(f, "{mag}*")?;
                }
                write!(f, "{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Nat(BigInt),
    Var(usize),
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    position: usize,
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push(Spanned {
                    token: Token::Plus,
                    position: i,
                });
                i += 1;
            }
            '-' => {
                out.push(Spanned {
                    token: Token::Minus,
                    position: i,
                });
                i += 1;
            }
            '*' => {
                out.push(Spanned {
                    token: Token::Star,
                    position: i,
                });
                i += 1;
            }
            '^' => {
                out.push(Spanned {
                    token: Token::Caret,
                    position: i,
                });
                i += 1;
            }
            '(' => {
                out.push(Spanned {
                    token: Token::LParen,
                    position: i,
                });
                i += 1;
            }
            ')' => {
                out.push(Spanned {
                    token: Token::RParen,
                    position: i,
                });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                let value: BigInt = digits.parse().expect("digit run parses");
                out.push(Spanned {
                    token: Token::Nat(value),
                    position: start,
                });
            }
            'x' => {
                let start = i;
                i += 1;
                let digit_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if digit_start == i {
                    return Err(err(start, "expected a variable index after 'x'"));
                }
                let digits = &text[digit_start..i];
                if digits.starts_with('0') {
                    if digits == "0" {
                        return Err(err(start, "variable indices start at 1"));
                    }
                    return Err(err(start, "variable index must not have leading zeros"));
                }
                let index: usize = digits
                    .parse()
                    .map_err(|_| err(start, "variable index too large"))?;
                out.push(Spanned {
                    token: Token::Var(index),
                    position: start,
                });
            }
            other => {
                return Err(err(i, format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(out)
}

/// Expanded polynomial under construction, keyed by dense exponent tuples.
struct PolyAcc {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl PolyAcc {
    fn constant(num_vars: usize, value: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(vec![0; num_vars], value);
        }
        PolyAcc { num_vars, terms }
    }

    fn variable(num_vars: usize, index: usize) -> Self {
        let mut exps = vec![0; num_vars];
        exps[index - 1] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, BigInt::from(1));
        PolyAcc { num_vars, terms }
    }

    fn add_assign(&mut self, other: &PolyAcc) {
        for (exps, coeff) in &other.terms {
            let entry = self.terms.entry(exps.clone()).or_insert_with(BigInt::zero);
            *entry += coeff;
            if entry.is_zero() {
                self.terms.remove(exps);
            }
        }
    }

    fn neg(mut self) -> Self {
        for coeff in self.terms.values_mut() {
            *coeff = -coeff.clone();
        }
        self
    }

    fn mul(&self, other: &PolyAcc) -> Self {
        let mut terms: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = terms.entry(exps).or_insert_with(BigInt::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        PolyAcc {
            num_vars: self.num_vars,
            terms,
        }
    }

    fn pow(&self, exponent: u32) -> Self {
        let mut result = PolyAcc::constant(self.num_vars, BigInt::from(1));
        for _ in 0..exponent {
            result = result.mul(self);
        }
        result
    }
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    num_vars: usize,
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.position)
            .unwrap_or(self.text_len)
    }

    fn advance(&mut self) -> Option<&Spanned> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<PolyAcc, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.advance();
                    let rhs = self.term()?;
                    acc.add_assign(&rhs);
                }
                Some(Token::Minus) => {
                    self.advance();
                    let rhs = self.term()?.neg();
                    acc.add_assign(&rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor ('*' factor)*
    fn term(&mut self) -> Result<PolyAcc, ParseError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.advance();
            let rhs = self.factor()?;
            acc = acc.mul(&rhs);
        }
        Ok(acc)
    }

    // factor := base ('^' nat)?
    fn factor(&mut self) -> Result<PolyAcc, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.advance();
            let pos = self.here();
            match self.advance() {
                Some(Spanned {
                    token: Token::Nat(n),
                    ..
                }) => {
                    let e = n.to_u32().ok_or_else(|| {
                        err(pos, "exponent too large (must fit in 32 bits)")
                    })?;
                    Ok(base.pow(e))
                }
                Some(Spanned {
                    token: Token::Minus,
                    position,
                }) => Err(err(
                    *position,
                    "exponent must be a non-negative integer literal",
                )),
                _ => Err(err(pos, "expected an integer exponent after '^'")),
            }
        } else {
            Ok(base)
        }
    }

    // base := nat | var | '(' expr ')' | '-' factor
    fn base(&mut self) -> Result<PolyAcc, ParseError> {
        let pos = self.here();
        match self.advance().cloned() {
            Some(Spanned {
                token: Token::Nat(n),
                ..
            }) => Ok(PolyAcc::constant(self.num_vars, n)),
            Some(Spanned {
                token: Token::Var(index),
                ..
            }) => Ok(PolyAcc::variable(self.num_vars, index)),
            Some(Spanned {
                token: Token::LParen,
                position,
            }) => {
                let inner = self.expr()?;
                match self.advance() {
                    Some(Spanned {
                        token: Token::RParen,
                        ..
                    }) => Ok(inner),
                    _ => Err(err(position, "unclosed parenthesis")),
                }
            }
            Some(Spanned {
                token: Token::Minus,
                ..
            }) => Ok(self.factor()?.neg()),
            Some(Spanned { token, position }) => Err(err(
                position,
                format!("expected a number, variable, or '(' but found {token:?}"),
            )),
            None => Err(err(pos, "unexpected end of input")),
        }
    }
}

/// Parse a polynomial from its textual form.
///
/// The grammar admits `+ - * ^ ( )`, decimal literals, and variables
/// `x1, x2, ...` (indices start at 1). `^` takes a non-negative integer
/// literal only. The result is fully expanded and collected; the number of
/// variables is the largest index mentioned (constants get one variable).
pub fn parse(text: &str) -> Result<Polynomial, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(err(0, "empty input"));
    }
    let max_var = tokens
        .iter()
        .filter_map(|s| match s.token {
            Token::Var(i) => Some(i),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let num_vars = max_var.max(1);
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        num_vars,
        text_len: text.len(),
    };
    let acc = parser.expr()?;
    if parser.pos != tokens.len() {
        let s = &tokens[parser.pos];
        return Err(err(
            s.position,
            format!("unexpected trailing token {:?}", s.token),
        ));
    }
    Ok(Polynomial::from_map(num_vars, acc.terms))
}

// ---------------------------------------------------------------------------
// The enumeration oracle
// ---------------------------------------------------------------------------

/// An axis-aligned box of lattice points, bounds inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    lower: Vec<u64>,
    upper: Vec<u64>,
}

impl LatticeBox {
    pub fn new(lower: Vec<u64>, upper: Vec<u64>) -> Result<Self, DiophantineError> {
        assert_eq!(lower.len(), upper.len(), "bound arity mismatch");
        for (dim, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo > hi {
                return Err(DiophantineError::InvertedBounds {
                    dim,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(LatticeBox { lower, upper })
    }

    /// `[0, d1] x ... x [0, dK]` for per-mode cutoffs `d`.
    pub fn from_cutoffs(cutoffs: &[u32]) -> Self {
        LatticeBox {
            lower: vec![0; cutoffs.len()],
            upper: cutoffs.iter().map(|&d| d as u64).collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[u64] {
        &self.lower
    }

    pub fn upper(&self) -> &[u64] {
        &self.upper
    }

    /// Number of lattice points in the box.
    pub fn volume(&self) -> u128 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (hi - lo + 1) as u128)
            .product()
    }

    /// Visit every point in lexicographic order (first coordinate most
    /// significant).
    pub fn points(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let k = self.dims();
        let mut current: Option<Vec<u64>> = Some(self.lower.clone());
        std::iter::from_fn(move || {
            let point = current.clone()?;
            // Odometer increment on the last coordinate.
            let mut next = point.clone();
            let mut dim = k;
            loop {
                if dim == 0 {
                    current = None;
                    break;
                }
                dim -= 1;
                if next[dim] < self.upper[dim] {
                    next[dim] += 1;
                    current = Some(next);
                    break;
                }
                next[dim] = self.lower[dim];
            }
            Some(point)
        })
    }

    /// True when the point touches the upper (truncation) face in some
    /// dimension. The lower face is the hard domain edge `xi = 0`, not a
    /// truncation artifact, so it does not count.
    pub fn on_upper_boundary(&self, point: &[u64]) -> bool {
        point.iter().zip(&self.upper).any(|(&x, &hi)| x == hi)
    }
}

/// Result of exhaustive minimization of `D(n)²` over a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// The exact minimum of `D(n)²`.
    pub min_square: BigUint,
    /// Every point attaining the minimum, in lexicographic order.
    pub witnesses: Vec<Vec<u64>>,
}

impl OracleResult {
    /// Zero minimum means the equation has a solution inside the box.
    pub fn solvable(&self) -> bool {
        self.min_square.is_zero()
    }
}

/// Exhaustively enumerate the box and minimize `D(n)²`, with the default
/// point cap.
pub fn brute_force_min_square(
    p: &Polynomial,
    lattice: &LatticeBox,
) -> Result<OracleResult, DiophantineError> {
    brute_force_min_square_capped(p, lattice, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive minimization with an explicit enumeration cap.
pub fn brute_force_min_square_capped(
    p: &Polynomial,
    lattice: &LatticeBox,
    cap: u128,
) -> Result<OracleResult, DiophantineError> {
    if lattice.dims() != p.num_vars() {
        return Err(DiophantineError::BoxMismatch {
            dims: lattice.dims(),
            expected: p.num_vars(),
        });
    }
    let volume = lattice.volume();
    if volume > cap {
        return Err(DiophantineError::EnumerationCapExceeded { volume, cap });
    }
    let mut best: Option<BigUint> = None;
    let mut witnesses: Vec<Vec<u64>> = Vec::new();
    for point in lattice.points() {
        let value = p.evaluate(&point).expect("arity checked above");
        let square = (&value * &value).to_biguint().expect("square is non-negative");
        match &best {
            Some(current) if square > *current => {}
            Some(current) if square == *current => witnesses.push(point),
            _ => {
                best = Some(square);
                witnesses.clear();
                witnesses.push(point);
            }
        }
    }
    Ok(OracleResult {
        min_square: best.expect("box is non-empty"),
        witnesses,
    })
}

/// Convert an exact integer to `f64`, failing loudly if the value falls
/// outside the exactly representable range `|v| <= 2^53`.
///
/// Downstream spectra are snapped to integers, so silently losing low-order
/// bits here would corrupt verdicts.
pub fn to_f64_exact(value: &BigInt) -> Result<f64, DiophantineError> {
    if value.magnitude() > &BigUint::from(F64_EXACT_LIMIT) {
        return Err(DiophantineError::PrecisionOverflow {
            value: value.clone(),
        });
    }
    Ok(value.to_f64().expect("within f64 range"))
}
