use super::IoError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    Str(String),
    Punct(char),
    Neq,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Neq => "`!=`".to_string(),
            Tok::Newline => "end of line".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Splits `text` into tokens; `#` starts a comment running to the end of
/// the line. Newlines are kept only when `newlines` is set.
pub(crate) fn tokenize(text: &str, newlines: bool) -> Result<Vec<Token>, IoError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = match c {
            '\n' => {
                bump(&mut chars);
                if !newlines {
                    continue;
                }
                Tok::Newline
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Int(s.parse().map_err(|_| IoError::syntax(l, col, "integer too large"))?)
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match bump(&mut chars) {
                        None => return Err(IoError::syntax(l, col, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match bump(&mut chars) {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some('n') => s.push('\n'),
                            _ => return Err(IoError::syntax(l, col, "invalid escape in string")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Neq
                } else {
                    return Err(IoError::syntax(l, col, "expected `!=`"));
                }
            }
            '=' | '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | '/' | ':' | '&' => {
                bump(&mut chars);
                Tok::Punct(c)
            }
            other => return Err(IoError::syntax(l, col, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, line: l, column: col });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// Cursor over a token list.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Cursor { tokens, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub(crate) fn peek_tok(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error_here(&self, message: impl Into<String>) -> IoError {
        let t = self.peek();
        IoError::syntax(t.line, t.column, message)
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> IoError {
        self.error_here(format!("expected {wanted}, found {}", self.peek_tok().describe()))
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek_tok() == &Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<(), IoError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, IoError> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    /// An identifier or a quoted string.
    pub(crate) fn name(&mut self) -> Result<String, IoError> {
        match self.peek_tok().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub(crate) fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == word)
    }

    pub(crate) fn keyword(&mut self, word: &str) -> Result<(), IoError> {
        match self.peek_tok() {
            Tok::Ident(s) if s == word => {
                self.next();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{word}`"))),
        }
    }

    pub(crate) fn int(&mut self) -> Result<usize, IoError> {
        match *self.peek_tok() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, true).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("lt(x, y1) & x != _z # tail\n\"a\\\"b\" 42"),
            vec![
                Tok::Ident("lt".into()),
                Tok::Punct('('),
                Tok::Ident("x".into()),
                Tok::Punct(','),
                Tok::Ident("y1".into()),
                Tok::Punct(')'),
                Tok::Punct('&'),
                Tok::Ident("x".into()),
                Tok::Neq,
                Tok::Ident("_z".into()),
                Tok::Newline,
                Tok::Str("a\"b".into()),
                Tok::Int(42),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions() {
        let t = tokenize("a\n  b", false).unwrap();
        assert_eq!((t[1].line, t[1].column), (2, 3));
        let Err(IoError::Syntax { line, column, .. }) = tokenize("a\n $", false) else {
            panic!("expected a syntax error");
        };
        assert_eq!((line, column), (2, 2));
    }
}
