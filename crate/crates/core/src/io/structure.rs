//! Structure files.
//!
//! ```text
//! structure B over [lt/2,p0/1]
//! domain 3
//! labels "1" "2" "3"
//! rel lt: (0,1) (0,2) (1,2)
//! rel p0:
//! ```
//!
//! Elements are ids `0..k`. The `labels` line is optional. Every relation of
//! the signature gets one `rel` line, tuples in lexicographic order; a
//! relation without a line is empty. Structures in one file are separated
//! by blank lines.

use crate::model::{Element, Relation, Signature, Structure};

use super::lexer::{tokenize, Cursor, Tok};
use super::{quote, write_name, IoError};

/// `[name/arity,...]`
pub fn print_signature(signature: &Signature) -> String {
    let symbols: Vec<String> = signature
        .symbols()
        .iter()
        .map(|s| format!("{}/{}", write_name(&s.name), s.arity))
        .collect();
    format!("[{}]", symbols.join(","))
}

pub(crate) fn signature(c: &mut Cursor) -> Result<Signature, IoError> {
    let at = c.peek().clone();
    c.expect('[')?;
    let mut symbols = Vec::new();
    if !c.eat(']') {
        loop {
            let name = c.name()?;
            c.expect('/')?;
            symbols.push((name, c.int()?));
            if c.eat(']') {
                break;
            }
            c.expect(',')?;
        }
    }
    Signature::new(symbols).map_err(|error| IoError::Model {
        line: at.line,
        column: at.column,
        error,
    })
}

pub fn parse_signature(text: &str) -> Result<Signature, IoError> {
    let mut c = Cursor::new(tokenize(text, false)?);
    let sig = signature(&mut c)?;
    if c.peek_tok() != &Tok::Eof {
        return Err(c.unexpected("end of input"));
    }
    Ok(sig)
}

pub fn print_structure(name: &str, s: &Structure) -> String {
    let mut out = format!(
        "structure {} over {}\ndomain {}\n",
        write_name(name),
        print_signature(s.signature()),
        s.domain_size()
    );
    if let Some(labels) = s.labels() {
        out.push_str("labels");
        for l in labels {
            out.push(' ');
            out.push_str(&quote(l));
        }
        out.push('\n');
    }
    for (sym, rel) in s.signature().symbols().iter().zip(s.relations()) {
        out.push_str("rel ");
        out.push_str(&write_name(&sym.name));
        out.push(':');
        for t in rel.iter() {
            let t: Vec<String> = t.iter().map(Element::to_string).collect();
            out.push_str(&format!(" ({})", t.join(",")));
        }
        out.push('\n');
    }
    out
}

/// Named structures, separated by blank lines.
pub fn print_structures<'a>(items: impl IntoIterator<Item = (&'a str, &'a Structure)>) -> String {
    let blocks: Vec<String> = items.into_iter().map(|(n, s)| print_structure(n, s)).collect();
    blocks.join("\n")
}

/// Parses one structure starting at the `structure` keyword. With `known`
/// set, the name and the `over` clause may be omitted; a given signature
/// must then equal `known`.
pub(crate) fn structure(c: &mut Cursor, known: Option<&Signature>) -> Result<(String, Structure), IoError> {
    let head = c.peek().clone();
    c.keyword("structure")?;
    let name = match c.peek_tok() {
        Tok::Str(_) => c.name()?,
        Tok::Ident(s) if s != "over" && s != "domain" => c.name()?,
        _ if known.is_some() => String::new(),
        _ => return Err(c.unexpected("a structure name")),
    };
    let sig = if c.at_keyword("over") {
        c.next();
        let at = c.peek().clone();
        let sig = signature(c)?;
        if known.is_some_and(|k| k != &sig) {
            return Err(IoError::syntax(
                at.line,
                at.column,
                format!("signature {} differs from the enclosing {}", print_signature(&sig), print_signature(known.unwrap())),
            ));
        }
        sig
    } else if let Some(k) = known {
        k.clone()
    } else {
        return Err(c.unexpected("`over`"));
    };
    c.keyword("domain")?;
    let domain = c.int()?;
    let mut labels = None;
    if c.at_keyword("labels") {
        let at = c.peek().clone();
        c.next();
        let mut ls = Vec::new();
        while let Tok::Str(s) = c.peek_tok().clone() {
            c.next();
            ls.push(s);
        }
        if ls.len() != domain {
            return Err(IoError::syntax(
                at.line,
                at.column,
                format!("{} labels for a domain of size {domain}", ls.len()),
            ));
        }
        labels = Some(ls);
    }
    let mut data: Vec<Option<Vec<Element>>> = vec![None; sig.len()];
    while c.at_keyword("rel") {
        c.next();
        let at = c.peek().clone();
        let rname = c.name()?;
        let Some(index) = sig.index_of(&rname) else {
            return Err(IoError::syntax(at.line, at.column, format!("`{rname}` is not in the signature")));
        };
        if data[index].is_some() {
            return Err(IoError::syntax(at.line, at.column, format!("second `rel` line for `{rname}`")));
        }
        c.expect(':')?;
        let arity = sig.symbol(index).arity;
        let mut flat = Vec::new();
        while c.peek_tok() == &Tok::Punct('(') {
            let tuple_at = c.peek().clone();
            c.next();
            let mut len = 0;
            loop {
                let e = c.int()?;
                if e >= domain {
                    return Err(IoError::syntax(
                        tuple_at.line,
                        tuple_at.column,
                        format!("element {e} outside domain of size {domain}"),
                    ));
                }
                flat.push(e as Element);
                len += 1;
                if c.eat(')') {
                    break;
                }
                c.expect(',')?;
            }
            if len != arity {
                return Err(IoError::syntax(
                    tuple_at.line,
                    tuple_at.column,
                    format!("tuple of length {len} for `{rname}` of arity {arity}"),
                ));
            }
        }
        data[index] = Some(flat);
    }
    let relations = sig
        .symbols()
        .iter()
        .zip(data)
        .map(|(s, d)| Relation::from_flat(s.arity, d.unwrap_or_default()))
        .collect();
    let model_err = |error| IoError::Model {
        line: head.line,
        column: head.column,
        error,
    };
    let mut s = Structure::new(sig, domain, relations).map_err(model_err)?;
    if let Some(ls) = labels {
        s = s.with_labels(ls).map_err(model_err)?;
    }
    Ok((name, s))
}

pub fn parse_structures(text: &str) -> Result<Vec<(String, Structure)>, IoError> {
    let mut c = Cursor::new(tokenize(text, false)?);
    let mut out = Vec::new();
    while c.peek_tok() != &Tok::Eof {
        out.push(structure(&mut c, None)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplings::{dense_order_sampling, succ2col_sampling};

    #[test]
    fn prints_documented_layout() {
        let s = dense_order_sampling(Vec::new()).unwrap().generate(3).unwrap()[0].clone();
        assert_eq!(
            print_structure("O", &s),
            "structure O over [lt/2]\ndomain 3\nlabels \"1\" \"2\" \"3\"\nrel lt: (0,1) (0,2) (1,2)\n"
        );
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let a = dense_order_sampling(Vec::new()).unwrap().generate(4).unwrap()[0].clone();
        let b = succ2col_sampling().generate(3).unwrap()[0].clone();
        let bare = Structure::empty(Signature::new([("part(1)", 1), ("E", 2)]).unwrap(), 2);
        let text = print_structures([("a", &a), ("b two", &b), ("c", &bare)]);
        let parsed = parse_structures(&text).unwrap();
        assert_eq!(parsed.len(), 3);
        assert_eq!(parsed[0], ("a".to_string(), a));
        assert_eq!(parsed[1], ("b two".to_string(), b));
        assert_eq!(parsed[2], ("c".to_string(), bare));
        let again = print_structures(parsed.iter().map(|(n, s)| (n.as_str(), s)));
        assert_eq!(again, text);
    }

    #[test]
    fn missing_relation_line_is_empty() {
        let parsed = parse_structures("structure s over [E/2,F/1] domain 2 rel E: (1,0) (0,1) (0,1)").unwrap();
        let s = &parsed[0].1;
        assert_eq!(s.relation(0).len(), 2);
        assert!(s.relation(1).is_empty());
        assert!(s.labels().is_none());
    }

    #[test]
    fn errors() {
        let bad = [
            "structure s over [E/2] domain 2 rel E: (0,2)",
            "structure s over [E/2] domain 2 rel E: (0)",
            "structure s over [E/2] domain 2 rel F: (0,1)",
            "structure s over [E/2] domain 2 rel E: rel E:",
            "structure s over [E/2] domain 2 labels \"a\"",
            "structure s [E/2] domain 2",
        ];
        for text in bad {
            assert!(parse_structures(text).is_err(), "{text}");
        }
        let Err(IoError::Syntax { line, column, .. }) = parse_structures("structure s over [E/2]\ndomain 2\nrel E: (0,5)")
        else {
            panic!("expected a syntax error");
        };
        assert_eq!((line, column), (3, 8));
    }

    #[test]
    fn signature_text() {
        let sig = Signature::new([("lt", 2), ("p0", 1)]).unwrap();
        assert_eq!(print_signature(&sig), "[lt/2,p0/1]");
        assert_eq!(parse_signature(" [lt/2, p0/1] ").unwrap(), sig);
        assert!(parse_signature("[lt/2,lt/1]").is_err());
    }
}
