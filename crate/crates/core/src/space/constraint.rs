//! Parser and evaluator for the constraint expression language.
//!
//! Grammar (precedence low to high): or, and, comparison, additive,
//! multiplicative, factor. Identifiers resolve to the parameter value
//! selected by the configuration under test. Integers are promoted to
//! 64-bit reals for `+ - * /` and comparisons; `%` requires two integer
//! operands. Strings may appear only under `==` and `!=`.

use super::{ParamDomain, ParamValue, SpaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    fn is_ordering(self) -> bool {
        matches!(self, BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt)
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Literal(ParamValue),
    /// Resolved parameter position in declaration order.
    Param(usize),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Static value kinds used to reject ill-typed constraints at parse time,
/// which keeps evaluation total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Real,
    Bool,
    Str,
    /// Domain mixing value kinds; usable only under equality.
    Mixed,
}

impl Kind {
    fn is_numeric(self) -> bool {
        matches!(self, Kind::Int | Kind::Real)
    }

    fn describe(self) -> &'static str {
        match self {
            Kind::Int => "integer",
            Kind::Real => "real",
            Kind::Bool => "boolean",
            Kind::Str => "string",
            Kind::Mixed => "mixed-kind parameter",
        }
    }
}

fn value_kind(v: &ParamValue) -> Kind {
    match v {
        ParamValue::Bool(_) => Kind::Bool,
        ParamValue::Int(_) => Kind::Int,
        ParamValue::Real(_) => Kind::Real,
        ParamValue::Str(_) => Kind::Str,
    }
}

fn domain_kind(domain: &ParamDomain) -> Kind {
    let mut kind = value_kind(&domain.values()[0]);
    for v in &domain.values()[1..] {
        kind = match (kind, value_kind(v)) {
            (a, b) if a == b => a,
            (Kind::Int, Kind::Real) | (Kind::Real, Kind::Int) => Kind::Real,
            _ => Kind::Mixed,
        };
    }
    kind
}

/// A parsed, type-checked constraint over declared parameters.
#[derive(Debug, Clone)]
pub struct ConstraintExpr {
    source: String,
    ast: Expr,
}

impl ConstraintExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates the constraint against the values selected by a
    /// configuration. Total: type errors are impossible after the parse-time
    /// check, and numeric corner cases (division by zero, modulo by zero)
    /// make the enclosing comparison false.
    pub fn evaluate<'a, F>(&'a self, lookup: F) -> bool
    where
        F: Fn(usize) -> &'a ParamValue,
    {
        matches!(eval(&self.ast, &lookup), Value::Bool(true))
    }
}

/// Parses `source` against the declared domains and type-checks the result.
pub fn parse_constraint(
    source: &str,
    domains: &[ParamDomain],
) -> Result<ConstraintExpr, SpaceError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        domains,
    };
    let ast = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        let (tok, at) = &parser.tokens[parser.pos];
        return Err(SpaceError::Syntax {
            pos: *at,
            message: format!("unexpected {}", tok.describe()),
        });
    }
    let kind = check(&ast, domains)?;
    if kind != Kind::Bool {
        return Err(SpaceError::Type(format!(
            "constraint must be boolean, found {}",
            kind.describe()
        )));
    }
    Ok(ConstraintExpr {
        source: source.to_string(),
        ast,
    })
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(i64),
    Real(f64),
    Str(String),
    Bool(bool),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Int(v) => format!("number {v}"),
            Token::Real(v) => format!("number {v}"),
            Token::Str(s) => format!("string {s:?}"),
            Token::Bool(b) => format!("literal {b}"),
            Token::Ident(n) => format!("identifier {n:?}"),
            Token::Op(op) => format!("operator {op:?}"),
            Token::LParen => "'('".to_string(),
            Token::RParen => "')'".to_string(),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Token, usize)>, SpaceError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b'+' | b'-' | b'*' | b'/' | b'%' => {
                let op = match b {
                    b'+' => "+",
                    b'-' => "-",
                    b'*' => "*",
                    b'/' => "/",
                    _ => "%",
                };
                tokens.push((Token::Op(op), i));
                i += 1;
            }
            b'<' | b'>' | b'=' | b'!' => {
                let two = i + 1 < bytes.len() && bytes[i + 1] == b'=';
                let op = match (b, two) {
                    (b'<', true) => "<=",
                    (b'<', false) => "<",
                    (b'>', true) => ">=",
                    (b'>', false) => ">",
                    (b'=', true) => "==",
                    (b'!', true) => "!=",
                    (b'!', false) => "!",
                    (b'=', false) => {
                        return Err(SpaceError::Syntax {
                            pos: i,
                            message: "expected '==' (single '=' is not an operator)".into(),
                        })
                    }
                    _ => unreachable!(),
                };
                tokens.push((Token::Op(op), i));
                i += if two { 2 } else { 1 };
            }
            b'&' | b'|' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b {
                    tokens.push((Token::Op(if b == b'&' { "&&" } else { "||" }), i));
                    i += 2;
                } else {
                    return Err(SpaceError::Syntax {
                        pos: i,
                        message: format!("expected {:?}", if b == b'&' { "&&" } else { "||" }),
                    });
                }
            }
            b'"' | b'\'' => {
                let quote = b;
                let start = i;
                i += 1;
                let begin = i;
                while i < bytes.len() && bytes[i] != quote {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(SpaceError::Syntax {
                        pos: start,
                        message: "unterminated string literal".into(),
                    });
                }
                tokens.push((Token::Str(source[begin..i].to_string()), start));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut is_real = false;
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    is_real = true;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        is_real = true;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let token = if is_real {
                    Token::Real(text.parse().map_err(|e| SpaceError::Syntax {
                        pos: start,
                        message: format!("bad number {text:?}: {e}"),
                    })?)
                } else {
                    Token::Int(text.parse().map_err(|e| SpaceError::Syntax {
                        pos: start,
                        message: format!("bad number {text:?}: {e}"),
                    })?)
                };
                tokens.push((token, start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &source[start..i];
                let token = match word {
                    "and" => Token::Op("&&"),
                    "or" => Token::Op("||"),
                    "true" => Token::Bool(true),
                    "false" => Token::Bool(false),
                    _ => Token::Ident(word.to_string()),
                };
                tokens.push((token, start));
            }
            other => {
                return Err(SpaceError::Syntax {
                    pos: i,
                    message: format!("unexpected character {:?}", other as char),
                })
            }
        }
    }
    if tokens.is_empty() {
        return Err(SpaceError::Syntax {
            pos: 0,
            message: "empty constraint".into(),
        });
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent, one function per precedence level)

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    domains: &'a [ParamDomain],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<&'static str> {
        match self.tokens.get(self.pos) {
            Some((Token::Op(op), _)) => Some(op),
            _ => None,
        }
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, SpaceError> {
        let mut lhs = self.and()?;
        while self.peek_op() == Some("||") {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, SpaceError> {
        let mut lhs = self.cmp()?;
        while self.peek_op() == Some("&&") {
            self.pos += 1;
            let rhs = self.cmp()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, SpaceError> {
        let lhs = self.sum()?;
        let op = match self.peek_op() {
            Some("==") => BinOp::Eq,
            Some("!=") => BinOp::Ne,
            Some("<=") => BinOp::Le,
            Some("<") => BinOp::Lt,
            Some(">=") => BinOp::Ge,
            Some(">") => BinOp::Gt,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.sum()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, SpaceError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_op() {
                Some("+") => BinOp::Add,
                Some("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, SpaceError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_op() {
                Some("*") => BinOp::Mul,
                Some("/") => BinOp::Div,
                Some("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, SpaceError> {
        match self.bump() {
            Some((Token::Int(v), _)) => Ok(Expr::Literal(ParamValue::Int(v))),
            Some((Token::Real(v), _)) => Ok(Expr::Literal(ParamValue::Real(v))),
            Some((Token::Str(s), _)) => Ok(Expr::Literal(ParamValue::Str(s))),
            Some((Token::Bool(b), _)) => Ok(Expr::Literal(ParamValue::Bool(b))),
            Some((Token::Ident(name), _)) => {
                match self.domains.iter().position(|d| d.name() == name) {
                    Some(idx) => Ok(Expr::Param(idx)),
                    None => Err(SpaceError::UnknownParameter { name }),
                }
            }
            Some((Token::LParen, at)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Token::RParen, _)) => Ok(inner),
                    _ => Err(SpaceError::Syntax {
                        pos: at,
                        message: "unclosed parenthesis".into(),
                    }),
                }
            }
            Some((Token::Op("!"), _)) => Ok(Expr::Not(Box::new(self.factor()?))),
            Some((tok, at)) => Err(SpaceError::Syntax {
                pos: at,
                message: format!("expected a value, found {}", tok.describe()),
            }),
            None => Err(SpaceError::Syntax {
                pos: usize::MAX,
                message: "unexpected end of expression".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Static type check

fn check(expr: &Expr, domains: &[ParamDomain]) -> Result<Kind, SpaceError> {
    match expr {
        Expr::Literal(v) => Ok(value_kind(v)),
        Expr::Param(d) => Ok(domain_kind(&domains[*d])),
        Expr::Not(inner) => {
            let k = check(inner, domains)?;
            if k != Kind::Bool {
                return Err(SpaceError::Type(format!(
                    "'!' requires a boolean operand, found {}",
                    k.describe()
                )));
            }
            Ok(Kind::Bool)
        }
        Expr::Binary(op, lhs, rhs) => {
            let lk = check(lhs, domains)?;
            let rk = check(rhs, domains)?;
            match op {
                BinOp::Or | BinOp::And => {
                    if lk != Kind::Bool || rk != Kind::Bool {
                        return Err(SpaceError::Type(format!(
                            "{:?} requires boolean operands, found {} and {}",
                            op.symbol(),
                            lk.describe(),
                            rk.describe()
                        )));
                    }
                    Ok(Kind::Bool)
                }
                BinOp::Eq | BinOp::Ne => Ok(Kind::Bool),
                _ if op.is_ordering() => {
                    for k in [lk, rk] {
                        if !k.is_numeric() {
                            return Err(SpaceError::Type(format!(
                                "{} operand under ordering operator {:?}",
                                k.describe(),
                                op.symbol()
                            )));
                        }
                    }
                    Ok(Kind::Bool)
                }
                BinOp::Mod => {
                    for k in [lk, rk] {
                        if k != Kind::Int {
                            return Err(SpaceError::Type(format!(
                                "'%' requires integer operands, found {}",
                                k.describe()
                            )));
                        }
                    }
                    Ok(Kind::Int)
                }
                // Add, Sub, Mul, Div
                _ => {
                    for k in [lk, rk] {
                        if !k.is_numeric() {
                            return Err(SpaceError::Type(format!(
                                "{} operand under arithmetic operator {:?}",
                                k.describe(),
                                op.symbol()
                            )));
                        }
                    }
                    if *op != BinOp::Div && lk == Kind::Int && rk == Kind::Int {
                        Ok(Kind::Int)
                    } else {
                        Ok(Kind::Real)
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone)]
enum Value<'a> {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(&'a str),
}

impl Value<'_> {
    fn as_f64(&self) -> f64 {
        match self {
            Value::Int(i) => *i as f64,
            Value::Real(r) => *r,
            // Unreachable after the static check; harmless defaults keep
            // evaluation total.
            Value::Bool(_) | Value::Str(_) => f64::NAN,
        }
    }

    /// Exact integer view, used by '%'.
    fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Real(r) if r.fract() == 0.0 && r.abs() < 9.0e15 => Some(*r as i64),
            _ => None,
        }
    }

    fn truthy(&self) -> bool {
        matches!(self, Value::Bool(true))
    }
}

fn lift(v: &ParamValue) -> Value<'_> {
    match v {
        ParamValue::Bool(b) => Value::Bool(*b),
        ParamValue::Int(i) => Value::Int(*i),
        ParamValue::Real(r) => Value::Real(*r),
        ParamValue::Str(s) => Value::Str(s),
    }
}

fn eval<'a, F>(expr: &'a Expr, lookup: &F) -> Value<'a>
where
    F: Fn(usize) -> &'a ParamValue,
{
    match expr {
        Expr::Literal(v) => lift(v),
        Expr::Param(d) => lift(lookup(*d)),
        Expr::Not(inner) => Value::Bool(!eval(inner, lookup).truthy()),
        Expr::Binary(op, lhs, rhs) => {
            match op {
                BinOp::And => {
                    return Value::Bool(
                        eval(lhs, lookup).truthy() && eval(rhs, lookup).truthy(),
                    )
                }
                BinOp::Or => {
                    return Value::Bool(
                        eval(lhs, lookup).truthy() || eval(rhs, lookup).truthy(),
                    )
                }
                _ => {}
            }
            let l = eval(lhs, lookup);
            let r = eval(rhs, lookup);
            match op {
                BinOp::Eq => Value::Bool(values_equal(&l, &r)),
                BinOp::Ne => Value::Bool(!values_equal(&l, &r)),
                BinOp::Le => Value::Bool(l.as_f64() <= r.as_f64()),
                BinOp::Lt => Value::Bool(l.as_f64() < r.as_f64()),
                BinOp::Ge => Value::Bool(l.as_f64() >= r.as_f64()),
                BinOp::Gt => Value::Bool(l.as_f64() > r.as_f64()),
                BinOp::Add => int_or_real(&l, &r, i64::checked_add, |a, b| a + b),
                BinOp::Sub => int_or_real(&l, &r, i64::checked_sub, |a, b| a - b),
                BinOp::Mul => int_or_real(&l, &r, i64::checked_mul, |a, b| a * b),
                BinOp::Div => Value::Real(l.as_f64() / r.as_f64()),
                BinOp::Mod => match (l.as_i64(), r.as_i64()) {
                    (Some(a), Some(b)) if b != 0 => Value::Int(a % b),
                    // Modulo by zero (or a non-integer operand that slipped
                    // past an overflow fallback) poisons the comparison.
                    _ => Value::Real(f64::NAN),
                },
                BinOp::And | BinOp::Or => unreachable!("handled above"),
            }
        }
    }
}

fn int_or_real(
    l: &Value<'_>,
    r: &Value<'_>,
    int_op: fn(i64, i64) -> Option<i64>,
    real_op: fn(f64, f64) -> f64,
) -> Value<'static> {
    if let (Value::Int(a), Value::Int(b)) = (l, r) {
        if let Some(v) = int_op(*a, *b) {
            return Value::Int(v);
        }
    }
    Value::Real(real_op(l.as_f64(), r.as_f64()))
}

fn values_equal(l: &Value<'_>, r: &Value<'_>) -> bool {
    match (l, r) {
        (Value::Str(a), Value::Str(b)) => a == b,
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::Int(_) | Value::Real(_), Value::Int(_) | Value::Real(_)) => {
            l.as_f64() == r.as_f64()
        }
        _ => false,
    }
}
