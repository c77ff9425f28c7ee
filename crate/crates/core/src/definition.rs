//! Quantifier-free relation definitions.
//!
//! A definition is a boolean combination of atoms over the variables
//! `x1, x2, ...` of the relation being defined. Concrete syntax:
//!
//! ```text
//! def   := conj ('|' conj)*
//! conj  := unary ('&' unary)*
//! unary := '!' unary | '(' def ')' | atom
//! atom  := 'true' | 'false'
//!        | xI '<' xJ | xI '=' xJ | xI '!=' xJ
//!        | 'part' '(' J ')' '(' xI ')'
//!        | NAME '(' xI (',' xJ)* ')'
//! ```
//!
//! `xI < xJ` refers to the base symbol `<` and `part(J)(xI)` to the base
//! symbol `part(J)`; both are the names used by the built-in base structures.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::Element;

/// Symbol name of the strict order in ordered base structures.
pub const ORDER_SYMBOL: &str = "<";

/// Symbol name of the `j`-th part (1-based) in partitioned base structures.
pub fn part_symbol(j: usize) -> String {
    format!("part({j})")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QfFormula {
    True,
    False,
    /// Equality of two variables (0-based indices).
    Eq(usize, usize),
    Atom { symbol: String, args: Vec<usize> },
    Not(Box<QfFormula>),
    And(Vec<QfFormula>),
    Or(Vec<QfFormula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DefinitionError {
    #[error("definition syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{0} must be numbered from 1")]
    ZeroVariable(usize),
}

impl QfFormula {
    pub fn parse(text: &str) -> Result<Self, DefinitionError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let f = p.disjunction()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(f)
    }

    /// `x1 < x2`
    pub fn order() -> Self {
        QfFormula::Atom {
            symbol: ORDER_SYMBOL.to_string(),
            args: vec![0, 1],
        }
    }

    /// `part(j)(x1)`
    pub fn part(j: usize) -> Self {
        QfFormula::Atom {
            symbol: part_symbol(j),
            args: vec![0],
        }
    }

    pub fn eval<F>(&self, args: &[Element], rel: &mut F) -> bool
    where
        F: FnMut(&str, &[Element]) -> bool,
    {
        match self {
            QfFormula::True => true,
            QfFormula::False => false,
            QfFormula::Eq(i, j) => args[*i] == args[*j],
            QfFormula::Atom { symbol, args: vars } => {
                let tuple: Vec<Element> = vars.iter().map(|&v| args[v]).collect();
                rel(symbol, &tuple)
            }
            QfFormula::Not(f) => !f.eval(args, rel),
            QfFormula::And(fs) => fs.iter().all(|f| f.eval(args, rel)),
            QfFormula::Or(fs) => fs.iter().any(|f| f.eval(args, rel)),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            QfFormula::True | QfFormula::False => None,
            QfFormula::Eq(i, j) => Some(*i.max(j)),
            QfFormula::Atom { args, .. } => args.iter().copied().max(),
            QfFormula::Not(f) => f.max_var(),
            QfFormula::And(fs) | QfFormula::Or(fs) => fs.iter().filter_map(|f| f.max_var()).max(),
        }
    }

    /// Relation symbols mentioned (equality excluded).
    pub fn symbols(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            QfFormula::Atom { symbol, .. } => {
                out.insert(symbol);
            }
            QfFormula::Not(f) => f.collect_symbols(out),
            QfFormula::And(fs) | QfFormula::Or(fs) => fs.iter().for_each(|f| f.collect_symbols(out)),
            _ => {}
        }
    }

    pub fn uses_only_equality(&self) -> bool {
        self.symbols().is_empty()
    }

    /// Atoms with their symbol arities, for validation against a signature.
    pub fn atom_arities(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        match self {
            QfFormula::Atom { symbol, args } => out.push((symbol, args.len())),
            QfFormula::Not(f) => f.collect_atoms(out),
            QfFormula::And(fs) | QfFormula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            _ => {}
        }
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, q: &QfFormula) -> fmt::Result {
            match q {
                QfFormula::And(_) | QfFormula::Or(_) => write!(f, "({q})"),
                _ => write!(f, "{q}"),
            }
        }
        match self {
            QfFormula::True => write!(f, "true"),
            QfFormula::False => write!(f, "false"),
            QfFormula::Eq(i, j) => write!(f, "x{} = x{}", i + 1, j + 1),
            QfFormula::Atom { symbol, args } if symbol == ORDER_SYMBOL && args.len() == 2 => {
                write!(f, "x{} < x{}", args[0] + 1, args[1] + 1)
            }
            QfFormula::Atom { symbol, args } if symbol.starts_with("part(") && args.len() == 1 => {
                write!(f, "{}(x{})", symbol, args[0] + 1)
            }
            QfFormula::Atom { symbol, args } => {
                write!(f, "{symbol}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "x{}", a + 1)?;
                }
                write!(f, ")")
            }
            QfFormula::Not(inner) => {
                write!(f, "!")?;
                wrap(f, inner)
            }
            QfFormula::And(fs) | QfFormula::Or(fs) => {
                let sep = if matches!(self, QfFormula::And(_)) { " & " } else { " | " };
                if fs.is_empty() {
                    return write!(f, "{}", if matches!(self, QfFormula::And(_)) { "true" } else { "false" });
                }
                for (k, g) in fs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "{sep}")?;
                    }
                    wrap(f, g)?;
                }
                Ok(())
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> DefinitionError {
        DefinitionError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), DefinitionError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn disjunction(&mut self) -> Result<QfFormula, DefinitionError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat("|") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { QfFormula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<QfFormula, DefinitionError> {
        let mut parts = vec![self.unary()?];
        while self.eat("&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { QfFormula::And(parts) })
    }

    fn unary(&mut self) -> Result<QfFormula, DefinitionError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(QfFormula::Not(Box::new(self.unary()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.disjunction()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(_) => self.atom(),
            None => Err(self.error("unexpected end of definition")),
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize, DefinitionError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected a number"))
    }

    fn variable_name(name: &str) -> Option<usize> {
        let digits = name.strip_prefix('x')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    }

    fn variable(&mut self) -> Result<usize, DefinitionError> {
        let at = self.pos;
        let name = self.ident().ok_or_else(|| self.error("expected a variable xI"))?;
        match Self::variable_name(&name) {
            Some(0) => Err(DefinitionError::ZeroVariable(0)),
            Some(i) => Ok(i - 1),
            None => {
                self.pos = at;
                Err(self.error("expected a variable xI"))
            }
        }
    }

    fn atom(&mut self) -> Result<QfFormula, DefinitionError> {
        let at = self.pos;
        let name = self.ident().ok_or_else(|| self.error("expected an atom"))?;
        match name.as_str() {
            "true" => return Ok(QfFormula::True),
            "false" => return Ok(QfFormula::False),
            "part" if self.peek() == Some(b'(') => {
                self.expect("(")?;
                let j = self.number()?;
                self.expect(")")?;
                self.expect("(")?;
                let v = self.variable()?;
                self.expect(")")?;
                return Ok(QfFormula::Atom {
                    symbol: part_symbol(j),
                    args: vec![v],
                });
            }
            _ => {}
        }
        if let Some(i) = Self::variable_name(&name) {
            if i == 0 {
                return Err(DefinitionError::ZeroVariable(0));
            }
            let left = i - 1;
            if self.eat("!=") {
                let right = self.variable()?;
                return Ok(QfFormula::Not(Box::new(QfFormula::Eq(left, right))));
            }
            if self.eat("=") {
                return Ok(QfFormula::Eq(left, self.variable()?));
            }
            if self.eat("<") {
                return Ok(QfFormula::Atom {
                    symbol: ORDER_SYMBOL.to_string(),
                    args: vec![left, self.variable()?],
                });
            }
            self.pos = at;
            return Err(self.error("expected `<`, `=` or `!=` after variable"));
        }
        self.expect("(")?;
        let mut args = vec![self.variable()?];
        while self.eat(",") {
            args.push(self.variable()?);
        }
        self.expect(")")?;
        Ok(QfFormula::Atom { symbol: name, args })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_min_definition() {
        let f = QfFormula::parse("(x1=x2 & !(x3<x2)) | (x1=x3 & !(x2<x3))").unwrap();
        assert_eq!(f.max_var(), Some(2));
        assert_eq!(f.symbols().into_iter().collect::<Vec<_>>(), vec!["<"]);
        let mut lt = |_: &str, t: &[Element]| t[0] < t[1];
        assert!(f.eval(&[1, 1, 2], &mut lt));
        assert!(f.eval(&[1, 2, 1], &mut lt));
        assert!(!f.eval(&[2, 1, 2], &mut lt));
    }

    #[test]
    fn parses_parts_and_generic_atoms() {
        assert_eq!(QfFormula::parse("part(2)(x1)").unwrap(), QfFormula::part(2));
        let f = QfFormula::parse("E(x1, x2) & x1 != x2").unwrap();
        assert_eq!(
            f,
            QfFormula::And(vec![
                QfFormula::Atom { symbol: "E".into(), args: vec![0, 1] },
                QfFormula::Not(Box::new(QfFormula::Eq(0, 1))),
            ])
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(QfFormula::parse("x1 <").is_err());
        assert!(QfFormula::parse("x0 = x1").is_err());
        assert!(QfFormula::parse("x1 = x2 )").is_err());
        assert!(QfFormula::parse("").is_err());
        assert!(QfFormula::parse("y = x1").is_err());
    }

    #[test]
    fn display_reparses_to_same_formula() {
        for text in [
            "(x1=x2 & !(x3<x2)) | (x1=x3 & !(x2<x3))",
            "!(x1=x2)",
            "part(1)(x1) | !part(2)(x2)",
            "x1 = x1",
            "true & (false | R(x2,x1))",
        ] {
            let f = QfFormula::parse(text).unwrap();
            assert_eq!(QfFormula::parse(&f.to_string()).unwrap(), f, "{text} -> {f}");
        }
    }
}
