//! Text syntax for structures and classes.
//!
//! ```text
//! structure {E/2, P/1} 3 { E(0,1) E(1,0) P(2) }
//! graph 3 { 0-1 1-2 0-2 }        # symmetric E, both orientations
//! digraph 2 { 0->1 }
//! set 4                          # empty signature
//! builtin planar_graphs
//! forbidden { graph 3 {0-1 1-2 0-2} } over {E/2}
//! lex(builtin sets, builtin graphs)
//! let K3 = graph 3 { 0-1 1-2 0-2 }
//! class W = full(builtin sets, builtin sets)
//! ```
//!
//! [`print_structure`] and [`print_class`] emit the canonical form, which
//! parses back to an equal value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use fraisse_core::classes::ClassKind;
use fraisse_core::{Builtin, ClassSpec, Signature, Structure};

/// A syntax or semantic error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Punct(char),
    Arrow,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> PResult<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits
                .parse()
                .map_err(|_| ParseError { line: l0, column: c0, message: format!("number {digits} is too large") })?;
            out.push(Token { tok: Tok::Int(n), line: l0, column: c0 });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            col += 2;
            out.push(Token { tok: Tok::Arrow, line: l0, column: c0 });
        } else if "{}(),/=-;".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Punct(c), line: l0, column: c0 });
        } else {
            return Err(ParseError { line: l0, column: c0, message: format!("unexpected character {c:?}") });
        }
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

/// Named structures and classes visible to later expressions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub structures: BTreeMap<String, Structure>,
    pub classes: BTreeMap<String, ClassSpec>,
    /// Definition names in source order.
    pub order: Vec<String>,
}

/// A parsed standalone expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Structure(Structure),
    Class(ClassSpec),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    env: &'a Document,
}

const STRUCTURE_HEADS: [&str; 4] = ["structure", "graph", "digraph", "set"];
const CLASS_HEADS: [&str; 5] = ["builtin", "forbidden", "lex", "full", "super"];

impl<'a> Parser<'a> {
    fn new(text: &str, env: &'a Document) -> PResult<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0, env })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, t: &Token, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { line: t.line, column: t.column, message: message.into() })
    }

    fn expect_punct(&mut self, c: char) -> PResult<Token> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(t)
        } else {
            self.err_at(&t, format!("expected `{c}`, found {}", t.tok))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.err_at(&t, format!("expected a name, found {other}")),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(n),
            ref other => self.err_at(&t, format!("expected a number, found {other}")),
        }
    }

    fn at_end(&self) -> bool {
        self.peek().tok == Tok::End
    }

    fn finish(&mut self) -> PResult<()> {
        let t = self.peek().clone();
        if t.tok == Tok::End {
            Ok(())
        } else {
            self.err_at(&t, format!("unexpected {} after the expression", t.tok))
        }
    }

    fn signature(&mut self) -> PResult<Signature> {
        let open = self.expect_punct('{')?;
        let mut symbols = Vec::new();
        if !self.eat_punct('}') {
            loop {
                let (name, _) = self.ident()?;
                self.expect_punct('/')?;
                let arity = self.int()?;
                symbols.push((name, arity));
                if self.eat_punct('}') {
                    break;
                }
                self.expect_punct(',')?;
            }
        }
        Signature::new(symbols).or_else(|e| self.err_at(&open, e.to_string()))
    }

    fn structure(&mut self) -> PResult<Structure> {
        let (head, t) = self.ident()?;
        match head.as_str() {
            "structure" => self.structure_body(),
            "graph" | "digraph" => self.graph_body(head == "graph"),
            "set" => Ok(Structure::plain(self.int()?)),
            name => match self.env.structures.get(name) {
                Some(s) => Ok(s.clone()),
                None => self.err_at(&t, format!("unknown structure `{name}`")),
            },
        }
    }

    fn structure_body(&mut self) -> PResult<Structure> {
        let sig = Arc::new(self.signature()?);
        let size = self.int()?;
        let mut s = Structure::new(sig.clone(), size);
        self.expect_punct('{')?;
        while !self.eat_punct('}') {
            let (name, at) = self.ident()?;
            let Some(r) = sig.index_of(&name) else {
                return self.err_at(&at, format!("unknown symbol `{name}` for signature {sig}"));
            };
            self.expect_punct('(')?;
            let mut tuple = Vec::new();
            loop {
                let t = self.peek().clone();
                let x = self.int()?;
                if x >= size {
                    return self.err_at(&t, format!("element {x} out of range for size {size}"));
                }
                tuple.push(x);
                if self.eat_punct(')') {
                    break;
                }
                self.expect_punct(',')?;
            }
            if tuple.len() != sig.arity(r) {
                return self.err_at(
                    &at,
                    format!("{name} has arity {}, but the tuple has {} entries", sig.arity(r), tuple.len()),
                );
            }
            s.set(r, &tuple, true);
            self.eat_punct(',');
        }
        Ok(s)
    }

    fn graph_body(&mut self, symmetric: bool) -> PResult<Structure> {
        let size = self.int()?;
        let mut pairs = Vec::new();
        self.expect_punct('{')?;
        while !self.eat_punct('}') {
            let t = self.peek().clone();
            let x = self.int()?;
            let sep = self.next();
            let ok = if symmetric { sep.tok == Tok::Punct('-') } else { sep.tok == Tok::Arrow };
            if !ok {
                let want = if symmetric { "-" } else { "->" };
                return self.err_at(&sep, format!("expected `{want}`, found {}", sep.tok));
            }
            let y = self.int()?;
            if x >= size || y >= size {
                return self.err_at(&t, format!("edge {x},{y} out of range for size {size}"));
            }
            if symmetric && x == y {
                return self.err_at(&t, format!("loop at {x} in a graph"));
            }
            pairs.push((x, y));
            self.eat_punct(',');
        }
        Ok(if symmetric { Structure::graph(size, &pairs) } else { Structure::digraph(size, &pairs) })
    }

    fn class(&mut self) -> PResult<ClassSpec> {
        let (head, t) = self.ident()?;
        match head.as_str() {
            "builtin" => {
                let (name, at) = self.ident()?;
                let param = if self.eat_punct('(') {
                    let k = self.int()?;
                    self.expect_punct(')')?;
                    Some(k)
                } else {
                    None
                };
                if name == "r0_or_r1_graphs" && param.is_none() {
                    return Ok(ClassSpec::two_graph_union());
                }
                Builtin::parse(&name, param).map(ClassSpec::builtin).or_else(|e| self.err_at(&at, e.to_string()))
            }
            "forbidden" => {
                self.expect_punct('{')?;
                let mut patterns = Vec::new();
                while !self.eat_punct('}') {
                    let at = self.peek().clone();
                    patterns.push((self.structure()?, at));
                    self.eat_punct(',');
                }
                let (kw, at) = self.ident()?;
                if kw != "over" {
                    return self.err_at(&at, format!("expected `over`, found `{kw}`"));
                }
                let sig = self.signature()?;
                if let Some((p, at)) = patterns.iter().find(|(p, _)| p.sig() != &sig) {
                    return self.err_at(at, format!("pattern over {} in a class over {sig}", p.sig()));
                }
                let patterns: Vec<Structure> = patterns.into_iter().map(|(p, _)| p).collect();
                ClassSpec::forbidden(&sig, &patterns).or_else(|e| self.err_at(&t, e.to_string()))
            }
            "lex" | "full" | "super" => {
                self.expect_punct('(')?;
                let k0 = self.class()?;
                self.expect_punct(',')?;
                let k1 = self.class()?;
                self.expect_punct(')')?;
                Ok(match head.as_str() {
                    "lex" => ClassSpec::lex(k0, k1),
                    "full" => ClassSpec::full(k0, k1),
                    _ => ClassSpec::superpose(k0, k1),
                })
            }
            name => match self.env.classes.get(name) {
                Some(k) => Ok(k.clone()),
                None => self.err_at(&t, format!("unknown class `{name}`")),
            },
        }
    }
}

/// Parses a single structure expression.
pub fn parse_structure(text: &str, env: &Document) -> PResult<Structure> {
    let mut p = Parser::new(text, env)?;
    let s = p.structure()?;
    p.finish()?;
    Ok(s)
}

/// Parses a single class expression.
pub fn parse_class(text: &str, env: &Document) -> PResult<ClassSpec> {
    let mut p = Parser::new(text, env)?;
    let k = p.class()?;
    p.finish()?;
    Ok(k)
}

/// Parses a standalone expression, a structure or a class, telling them apart
/// by the leading keyword or by which kind of definition a name refers to.
pub fn parse_dsl(text: &str, env: &Document) -> PResult<Value> {
    let p = Parser::new(text, env)?;
    let first = p.peek().clone();
    let is_class = match &first.tok {
        Tok::Ident(h) if CLASS_HEADS.contains(&h.as_str()) => true,
        Tok::Ident(h) if STRUCTURE_HEADS.contains(&h.as_str()) => false,
        Tok::Ident(h) => env.classes.contains_key(h),
        other => return p.err_at(&first, format!("expected a structure or class, found {other}")),
    };
    if is_class {
        parse_class(text, env).map(Value::Class)
    } else {
        parse_structure(text, env).map(Value::Structure)
    }
}

/// Parses `let NAME = structure` and `class NAME = class` definitions, each
/// optionally followed by `;`. Later definitions may refer to earlier ones.
pub fn parse_document(text: &str) -> PResult<Document> {
    let mut doc = Document::default();
    let toks = lex(text)?;
    let mut pos = 0;
    loop {
        let mut p = Parser { toks: toks.clone(), pos, env: &doc };
        if p.at_end() {
            break;
        }
        let (kw, at) = p.ident()?;
        let (name, name_at) = p.ident()?;
        if doc.structures.contains_key(&name) || doc.classes.contains_key(&name) {
            return p.err_at(&name_at, format!("`{name}` is already defined"));
        }
        if STRUCTURE_HEADS.contains(&name.as_str()) || CLASS_HEADS.contains(&name.as_str()) || name == "over" {
            return p.err_at(&name_at, format!("`{name}` is a keyword"));
        }
        p.expect_punct('=')?;
        match kw.as_str() {
            "let" => {
                let s = p.structure()?;
                p.eat_punct(';');
                pos = p.pos;
                doc.structures.insert(name.clone(), s);
            }
            "class" => {
                let k = p.class()?;
                p.eat_punct(';');
                pos = p.pos;
                doc.classes.insert(name.clone(), k);
            }
            other => return p.err_at(&at, format!("expected `let` or `class`, found `{other}`")),
        }
        doc.order.push(name);
    }
    Ok(doc)
}

pub fn print_signature(sig: &Signature) -> String {
    let parts: Vec<String> = sig.symbols().iter().map(|s| format!("{}/{}", s.name, s.arity)).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Canonical one-line form; tuples in lexicographic order per symbol.
pub fn print_structure(s: &Structure) -> String {
    let mut out = format!("structure {} {} {{", print_signature(s.sig()), s.size());
    for r in 0..s.sig().len() {
        for t in s.tuples(r) {
            let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!(" {}({})", s.sig().name(r), parts.join(",")));
        }
    }
    out.push_str(if s.has_no_tuples() { "}" } else { " }" });
    out
}

pub fn print_class(k: &ClassSpec) -> String {
    match k.kind() {
        ClassKind::Builtin(b) => format!("builtin {}", b.name()),
        ClassKind::Forbidden(_) if k == &ClassSpec::two_graph_union() => "builtin r0_or_r1_graphs".into(),
        ClassKind::Forbidden(ps) => {
            let parts: Vec<String> = ps.iter().map(print_structure).collect();
            format!("forbidden {{ {} }} over {}", parts.join(", "), print_signature(k.sig()))
        }
        ClassKind::Lex(a, b) => format!("lex({}, {})", print_class(a), print_class(b)),
        ClassKind::Full(a, b) => format!("full({}, {})", print_class(a), print_class(b)),
        ClassKind::Super(a, b) => format!("super({}, {})", print_class(a), print_class(b)),
    }
}
