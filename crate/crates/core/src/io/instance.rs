//! Instance syntax.
//!
//! ```text
//! instance := item ((';' | '&' | newline) item)*
//! item     := R '(' x (',' x)* ')' | x '=' y | x '!=' y
//!           | 'false' | 'true' | 'vars' '(' x (',' x)* ')'
//! ```
//!
//! `true` is the empty conjunction and `vars(...)` declares variables
//! without constraining them; both exist so that every instance prints to
//! text that parses back to it.

use crate::formulas::Instance;
use crate::model::Signature;

use super::lexer::{tokenize, Cursor, Tok};
use super::IoError;

fn separator(t: &Tok) -> bool {
    matches!(t, Tok::Punct(';') | Tok::Punct('&') | Tok::Newline)
}

fn name_list(c: &mut Cursor) -> Result<Vec<String>, IoError> {
    c.expect('(')?;
    let mut names = Vec::new();
    if !c.eat(')') {
        loop {
            names.push(c.ident()?);
            if c.eat(')') {
                break;
            }
            c.expect(',')?;
        }
    }
    Ok(names)
}

pub fn parse_instance(text: &str, signature: &Signature) -> Result<Instance, IoError> {
    let mut c = Cursor::new(tokenize(text, true)?);
    let mut inst = Instance::new(signature.clone());
    loop {
        while separator(c.peek_tok()) {
            c.next();
        }
        if c.peek_tok() == &Tok::Eof {
            break;
        }
        let at = c.peek().clone();
        let name = c.ident()?;
        match c.peek_tok() {
            Tok::Punct('(') if name == "vars" && signature.index_of("vars").is_none() => {
                for v in name_list(&mut c)? {
                    inst.declare(&v);
                }
            }
            Tok::Punct('(') => {
                let args = name_list(&mut c)?;
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                inst.add_rel(&name, &args).map_err(|error| IoError::Formula {
                    line: at.line,
                    column: at.column,
                    error,
                })?;
            }
            Tok::Punct('=') => {
                c.next();
                let other = c.ident()?;
                inst.add_eq(&name, &other);
            }
            Tok::Neq => {
                c.next();
                let other = c.ident()?;
                inst.add_neq(&name, &other);
            }
            _ if name == "false" => {
                inst.add_bot();
            }
            _ if name == "true" => {}
            _ => return Err(c.unexpected("`(`, `=` or `!=`")),
        }
        if !separator(c.peek_tok()) && c.peek_tok() != &Tok::Eof {
            return Err(c.unexpected("`;`, `&` or end of line"));
        }
    }
    Ok(inst)
}

/// The instance in the syntax above, on one line.
pub fn print_instance(inst: &Instance) -> String {
    inst.to_string()
}
