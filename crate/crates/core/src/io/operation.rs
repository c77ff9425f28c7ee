//! Operation tables.
//!
//! ```text
//! operation arity 2 domain 3
//! 0 0 0
//! 0 1 1
//! 0 1 2
//! ```
//!
//! Values are listed in lexicographic order of the argument tuple, `d` per
//! line when printed. The header is optional; without it the arity is
//! inferred from the number of values.

use crate::model::Element;
use crate::polymorphisms::OperationTable;

use super::lexer::{tokenize, Cursor, Tok};
use super::IoError;

pub fn print_operation(f: &OperationTable) -> String {
    let mut out = format!("operation arity {} domain {}\n", f.arity(), f.domain_size());
    for row in f.values().chunks(f.domain_size().max(1)) {
        let row: Vec<String> = row.iter().map(Element::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a table over a domain of `domain_size` elements.
pub fn parse_operation(text: &str, domain_size: usize) -> Result<OperationTable, IoError> {
    let mut c = Cursor::new(tokenize(text, false)?);
    let head = c.peek().clone();
    let mut arity = None;
    if c.at_keyword("operation") {
        c.next();
        c.keyword("arity")?;
        arity = Some(c.int()?);
        c.keyword("domain")?;
        let at = c.peek().clone();
        let d = c.int()?;
        if d != domain_size {
            return Err(IoError::syntax(
                at.line,
                at.column,
                format!("table over {d} elements, structure has {domain_size}"),
            ));
        }
    }
    let mut values = Vec::new();
    while let Tok::Int(v) = *c.peek_tok() {
        let at = c.peek().clone();
        c.next();
        if v >= domain_size {
            return Err(IoError::syntax(
                at.line,
                at.column,
                format!("value {v} outside domain of size {domain_size}"),
            ));
        }
        values.push(v as Element);
    }
    if c.peek_tok() != &Tok::Eof {
        return Err(c.unexpected("a value"));
    }
    let arity = match arity {
        Some(k) => k,
        None => infer_arity(values.len(), domain_size).ok_or_else(|| {
            IoError::syntax(
                head.line,
                head.column,
                format!(
                    "{} values is not a power of the domain size {domain_size}; add an `operation arity K domain D` header",
                    values.len()
                ),
            )
        })?,
    };
    OperationTable::new(domain_size, arity, values).map_err(|error| IoError::Polymorphism {
        line: head.line,
        column: head.column,
        error,
    })
}

/// `k ≥ 1` with `d^k = len`, when unique.
fn infer_arity(len: usize, d: usize) -> Option<usize> {
    if d < 2 {
        return None;
    }
    let (mut k, mut p) = (1, d);
    while p < len {
        p = p.checked_mul(d)?;
        k += 1;
    }
    (p == len).then_some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymorphisms::{builtin_operation, BuiltinOperation};

    #[test]
    fn round_trip() {
        let f = builtin_operation(&BuiltinOperation::MajorityEq { domain_size: 3 }).unwrap();
        let text = print_operation(&f);
        assert!(text.starts_with("operation arity 3 domain 3\n0 0 0\n"));
        let g = parse_operation(&text, 3).unwrap();
        assert_eq!(g, f);
        assert_eq!(print_operation(&g), text);
    }

    #[test]
    fn headerless_infers_arity() {
        let f = parse_operation("0 0 0 1", 2).unwrap();
        assert_eq!(f.arity(), 2);
        assert_eq!(f.apply(&[1, 1]), 1);
        assert!(parse_operation("0 0 0", 2).is_err());
        assert!(parse_operation("0", 1).is_err());
        assert_eq!(parse_operation("operation arity 2 domain 1\n0", 1).unwrap().arity(), 2);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_operation("0 2", 2).is_err());
        assert!(parse_operation("operation arity 2 domain 3\n0 1", 2).is_err());
        assert!(matches!(
            parse_operation("operation arity 2 domain 2\n0 1", 2),
            Err(IoError::Polymorphism { .. })
        ));
    }
}
