//! Theory specifications.
//!
//! ```text
//! spec   := ('theory' NAME '=' expr)*
//! expr   := 'dense_order' defs?
//!         | 'partition' '(' M ')' defs?
//!         | 'successor' | 'alternating_cycles' | 'succ2col' | 'two_models'
//!         | 'explicit' SIG flag* '{' structure* '}'
//!         | 'decider' '(' NAME ',' MAXN ')'
//!         | 'union' '(' NAME ',' NAME ')'
//!         | 'expand' '(' NAME ')' defs | 'expand' '(' NAME ',' defs ')'
//!         | NAME
//! defs   := '{' (rel (';' rel)* ';'?)? '}'
//! rel    := 'rel' NAME '/' ARITY '=' ('base' | 'part' '(' J ')' | FORMULA)
//! flag   := 'equality_matching' | 'no_pp_algebraicity'
//! ```
//!
//! `FORMULA` is a quoted quantifier-free definition over `x1..xARITY` (see
//! [`QfFormula`]). `base` is the order of `dense_order`; `part(J)` is the
//! `J`-th part of `partition`. An explicit family returns the listed
//! structures (in the structure-file syntax, name and `over` optional) for
//! every `n`, and its flags are trusted as given. `decider(A, MAXN)` builds
//! samples from the reference decider of `A`; `union` is the product
//! construction and `expand` adds relations defined from equality.

use indexmap::IndexMap;

use crate::definition::QfFormula;
use crate::samplings::{
    alternating_cycles_sampling, colored_partition_sampling, dense_order_sampling, equality_expansion,
    explicit_sampling, product_sampling, sampling_from_decider, succ2col_sampling, successor_sampling,
    two_models_sampling, RelationDef, SampleFamily, SamplingError,
};

use super::lexer::{tokenize, Cursor, Tok, Token};
use super::structure::{signature, structure};
use super::IoError;

/// Named families in definition order.
#[derive(Clone, Debug, Default)]
pub struct TheorySpec {
    theories: IndexMap<String, SampleFamily>,
}

impl TheorySpec {
    pub fn get(&self, name: &str) -> Option<&SampleFamily> {
        self.theories.get(name)
    }

    /// The last definition: the default theory of a spec file.
    pub fn last(&self) -> Option<&SampleFamily> {
        self.theories.last().map(|(_, f)| f)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.theories.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.theories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theories.is_empty()
    }
}

enum Base {
    Order,
    Partition,
    Equality,
}

fn sampling_err(at: &Token) -> impl FnOnce(SamplingError) -> IoError + '_ {
    move |error| IoError::Sampling {
        line: at.line,
        column: at.column,
        error,
    }
}

fn defs(c: &mut Cursor, base: Base) -> Result<Vec<RelationDef>, IoError> {
    c.expect('{')?;
    let mut out = Vec::new();
    while !c.eat('}') {
        c.keyword("rel")?;
        let name = c.name()?;
        c.expect('/')?;
        let arity = c.int()?;
        c.expect('=')?;
        let at = c.peek().clone();
        let formula = match c.peek_tok().clone() {
            Tok::Str(text) => {
                c.next();
                QfFormula::parse(&text).map_err(|error| IoError::Definition {
                    line: at.line,
                    column: at.column,
                    error,
                })?
            }
            Tok::Ident(w) if w == "base" => {
                c.next();
                match base {
                    Base::Order => QfFormula::order(),
                    _ => return Err(IoError::syntax(at.line, at.column, "`base` is only defined for dense_order")),
                }
            }
            Tok::Ident(w) if w == "part" => {
                c.next();
                c.expect('(')?;
                let j = c.int()?;
                c.expect(')')?;
                match base {
                    Base::Partition => QfFormula::part(j),
                    _ => return Err(IoError::syntax(at.line, at.column, "`part(J)` is only defined for partition")),
                }
            }
            _ => return Err(c.unexpected("`base`, `part(J)` or a quoted formula")),
        };
        out.push(RelationDef::new(name, arity, formula));
        if !c.eat(';') {
            c.expect('}')?;
            break;
        }
    }
    Ok(out)
}

fn reference<'a>(c: &mut Cursor, spec: &'a TheorySpec) -> Result<&'a SampleFamily, IoError> {
    let at = c.peek().clone();
    let name = c.ident()?;
    spec.get(&name).ok_or(IoError::UnknownTheory {
        line: at.line,
        column: at.column,
        name,
    })
}

fn expr(c: &mut Cursor, spec: &TheorySpec) -> Result<SampleFamily, IoError> {
    let at = c.peek().clone();
    let word = c.ident()?;
    let family = match word.as_str() {
        "dense_order" => {
            let d = if c.peek_tok() == &Tok::Punct('{') {
                defs(c, Base::Order)?
            } else {
                Vec::new()
            };
            dense_order_sampling(d).map_err(sampling_err(&at))?
        }
        "partition" => {
            c.expect('(')?;
            let m = c.int()?;
            c.expect(')')?;
            let d = if c.peek_tok() == &Tok::Punct('{') {
                defs(c, Base::Partition)?
            } else {
                Vec::new()
            };
            colored_partition_sampling(m, d).map_err(sampling_err(&at))?
        }
        "successor" => successor_sampling(),
        "alternating_cycles" => alternating_cycles_sampling(),
        "succ2col" => succ2col_sampling(),
        "two_models" => two_models_sampling(),
        "explicit" => {
            let sig = signature(c)?;
            let (mut eq, mut nopp) = (false, false);
            loop {
                if c.at_keyword("equality_matching") {
                    eq = true;
                } else if c.at_keyword("no_pp_algebraicity") {
                    nopp = true;
                } else {
                    break;
                }
                c.next();
            }
            c.expect('{')?;
            let mut samples = Vec::new();
            while !c.eat('}') {
                samples.push(structure(c, Some(&sig))?.1);
            }
            explicit_sampling("explicit", sig, move |_| samples.clone(), eq, nopp)
        }
        "decider" => {
            c.expect('(')?;
            let inner = reference(c, spec)?;
            c.expect(',')?;
            let max_n = c.int()?;
            c.expect(')')?;
            let Some(decider) = inner.decider().cloned() else {
                return Err(sampling_err(&at)(SamplingError::MissingDecider(inner.name().to_string())));
            };
            sampling_from_decider(inner.signature().clone(), move |i| decider(i), max_n)
        }
        "union" => {
            c.expect('(')?;
            let a = reference(c, spec)?;
            c.expect(',')?;
            let b = reference(c, spec)?;
            c.expect(')')?;
            product_sampling(a, b).map_err(sampling_err(&at))?
        }
        "expand" => {
            c.expect('(')?;
            let inner = reference(c, spec)?;
            let d = if c.eat(',') {
                let d = defs(c, Base::Equality)?;
                c.expect(')')?;
                d
            } else {
                c.expect(')')?;
                defs(c, Base::Equality)?
            };
            equality_expansion(inner, d).map_err(sampling_err(&at))?
        }
        _ if spec.get(&word).is_some() => spec.get(&word).expect("checked").clone(),
        _ if c.peek_tok() == &Tok::Punct('(') || c.peek_tok() == &Tok::Punct('{') => {
            return Err(IoError::UnknownBuiltin {
                line: at.line,
                column: at.column,
                name: word,
            })
        }
        _ => {
            return Err(IoError::UnknownTheory {
                line: at.line,
                column: at.column,
                name: word,
            })
        }
    };
    Ok(family)
}

pub fn parse_theory_spec(text: &str) -> Result<TheorySpec, IoError> {
    let mut c = Cursor::new(tokenize(text, false)?);
    let mut spec = TheorySpec::default();
    while c.peek_tok() != &Tok::Eof {
        c.keyword("theory")?;
        let at = c.peek().clone();
        let name = c.ident()?;
        if spec.get(&name).is_some() {
            return Err(IoError::DuplicateTheory {
                line: at.line,
                column: at.column,
                name,
            });
        }
        c.expect('=')?;
        let family = expr(&mut c, &spec)?.with_name(name.clone());
        spec.theories.insert(name, family);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROBOT: &str = r#"
        theory A = dense_order { rel lt/2 = base; rel min3/3 = "(x1=x2 & !(x3<x2)) | (x1=x3 & !(x2<x3))" }
        theory B = partition(2) { rel p0/1 = part(1); rel p1/1 = part(2) }
        theory T = union(A,B)
    "#;

    #[test]
    fn dense_order_with_min3() {
        let spec = parse_theory_spec(ROBOT).unwrap();
        let a = spec.get("A").unwrap();
        assert_eq!(a.name(), "A");
        assert_eq!(a.signature().to_string(), "[lt/2,min3/3]");
        let s = &a.generate(3).unwrap()[0];
        // min over 3 ranks: one tuple per (y, z), with x fixed by them
        assert_eq!(s.relation_by_name("min3").unwrap().len(), 9);
    }

    #[test]
    fn union_is_the_product() {
        let spec = parse_theory_spec(ROBOT).unwrap();
        assert_eq!(spec.names().collect::<Vec<_>>(), ["A", "B", "T"]);
        let t = spec.last().unwrap();
        assert_eq!(t.signature().to_string(), "[lt/2,min3/3,p0/1,p1/1]");
        assert_eq!(t.family_size(3).unwrap(), 3 * 6);
    }

    #[test]
    fn union_with_itself_is_rejected() {
        let err = parse_theory_spec("theory A = dense_order\ntheory X = union(A,A)").unwrap_err();
        assert!(matches!(
            err,
            IoError::Sampling {
                line: 2,
                error: SamplingError::OverlappingSignatures { .. },
                ..
            }
        ));
    }

    #[test]
    fn names_must_be_defined_first() {
        assert!(matches!(
            parse_theory_spec("theory T = union(A, B)"),
            Err(IoError::UnknownTheory { .. })
        ));
        assert!(matches!(
            parse_theory_spec("theory A = successor theory A = succ2col"),
            Err(IoError::DuplicateTheory { .. })
        ));
        assert!(matches!(
            parse_theory_spec("theory A = rainbow(3)"),
            Err(IoError::UnknownBuiltin { .. })
        ));
    }

    #[test]
    fn syntax_error_positions() {
        let Err(IoError::Syntax { line, column, .. }) = parse_theory_spec("theory A = dense_order {\n  rel lt/2 base }") else {
            panic!("expected a syntax error");
        };
        assert_eq!((line, column), (2, 12));
        let Err(IoError::Definition { line, .. }) = parse_theory_spec("theory A = dense_order {\n rel r/1 = \"x1 <\" }") else {
            panic!("expected a definition error");
        };
        assert_eq!(line, 2);
    }

    #[test]
    fn other_builtins() {
        let spec = parse_theory_spec(
            "theory S = successor theory C = alternating_cycles theory W = succ2col theory M = two_models \
             theory P = partition(3) theory E = expand(P) { rel ne/2 = \"!(x1 = x2)\" } \
             theory E2 = expand(P, { rel eq/2 = \"x1 = x2\" }) theory D = decider(S, 2) theory S2 = S",
        )
        .unwrap();
        assert_eq!(spec.len(), 9);
        assert_eq!(spec.get("W").unwrap().family_size(3).unwrap(), 8);
        assert_eq!(spec.get("E").unwrap().signature().to_string(), "[p1/1,p2/1,p3/1,ne/2]");
        assert_eq!(spec.get("S2").unwrap().name(), "S2");
        assert!(spec.get("D").unwrap().generate(3).is_err());
        assert!(!spec.get("D").unwrap().generate(2).unwrap().is_empty());
    }

    #[test]
    fn explicit_family() {
        let spec = parse_theory_spec(
            "theory K = explicit [E/2] equality_matching {
                 structure domain 2 rel E: (0,1) (1,0)
                 structure k3 over [E/2] domain 3 labels \"r\" \"g\" \"b\" rel E: (0,1)
             }",
        )
        .unwrap();
        let k = spec.get("K").unwrap();
        assert!(k.equality_matching() && !k.no_pp_algebraicity());
        assert_eq!(k.family_size(7).unwrap(), 5);
        assert!(parse_theory_spec("theory K = explicit [E/2] { structure over [F/1] domain 1 }").is_err());
    }
}
