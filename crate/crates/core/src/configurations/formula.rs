use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{Signature, Structure};

/// Coordinate `pos` of the block bound to argument `arg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub arg: usize,
    pub pos: usize,
}

impl Var {
    pub fn new(arg: usize, pos: usize) -> Var {
        Var { arg, pos }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}.{}", self.arg, self.pos)
    }
}

/// Quantifier-free formula over block variables. Relation atoms refer to
/// target symbols by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QfFormula {
    True,
    False,
    Atom { symbol: usize, args: Vec<Var> },
    Eq(Var, Var),
    /// Coordinates `start..start + len` of two argument blocks agree.
    BlockEq { left: usize, right: usize, start: usize, len: usize },
    Not(Box<QfFormula>),
    And(Vec<QfFormula>),
    Or(Vec<QfFormula>),
}

impl QfFormula {
    pub fn atom(symbol: usize, args: &[Var]) -> QfFormula {
        QfFormula::Atom { symbol, args: args.to_vec() }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: QfFormula) -> QfFormula {
        QfFormula::Not(Box::new(phi))
    }

    /// Every variable, block equalities expanded.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| out.push(v));
        out
    }

    fn visit_vars(&self, visit: &mut dyn FnMut(Var)) {
        match self {
            QfFormula::True | QfFormula::False => {}
            QfFormula::Atom { args, .. } => args.iter().for_each(|&v| visit(v)),
            QfFormula::Eq(v, w) => {
                visit(*v);
                visit(*w);
            }
            QfFormula::BlockEq { left, right, start, len } => {
                for p in *start..start + len {
                    visit(Var::new(*left, p));
                    visit(Var::new(*right, p));
                }
            }
            QfFormula::Not(phi) => phi.visit_vars(visit),
            QfFormula::And(xs) | QfFormula::Or(xs) => xs.iter().for_each(|x| x.visit_vars(visit)),
        }
    }

    /// Checks atoms against `target` and variables against `arity` blocks of
    /// `width` coordinates.
    pub fn validate(&self, target: &Signature, arity: usize, width: usize) -> Result<()> {
        if let Some(v) = self.vars().into_iter().find(|v| v.arg >= arity || v.pos >= width) {
            return Err(Error::Invalid(format!("variable {v} outside {arity} blocks of width {width}")));
        }
        let mut bad = None;
        self.visit_atoms(&mut |symbol, args| {
            if bad.is_none() && (symbol >= target.len() || target.arity(symbol) != args.len()) {
                bad = Some(format!("atom with symbol #{symbol} and {} arguments over {target}", args.len()));
            }
        });
        bad.map_or(Ok(()), |m| Err(Error::Invalid(m)))
    }

    fn visit_atoms(&self, visit: &mut dyn FnMut(usize, &[Var])) {
        match self {
            QfFormula::Atom { symbol, args } => visit(*symbol, args),
            QfFormula::Not(phi) => phi.visit_atoms(visit),
            QfFormula::And(xs) | QfFormula::Or(xs) => xs.iter().for_each(|x| x.visit_atoms(visit)),
            _ => {}
        }
    }

    /// Renames variables. Block equalities are expanded first, since a
    /// renaming need not keep a coordinate range contiguous.
    pub fn map_vars(&self, f: &dyn Fn(Var) -> Var) -> QfFormula {
        match self {
            QfFormula::True => QfFormula::True,
            QfFormula::False => QfFormula::False,
            QfFormula::Atom { symbol, args } => QfFormula::Atom { symbol: *symbol, args: args.iter().map(|&v| f(v)).collect() },
            QfFormula::Eq(v, w) => QfFormula::Eq(f(*v), f(*w)),
            QfFormula::BlockEq { .. } => self.expand_block_eq().map_vars(f),
            QfFormula::Not(phi) => QfFormula::not(phi.map_vars(f)),
            QfFormula::And(xs) => QfFormula::And(xs.iter().map(|x| x.map_vars(f)).collect()),
            QfFormula::Or(xs) => QfFormula::Or(xs.iter().map(|x| x.map_vars(f)).collect()),
        }
    }

    /// A block equality as a conjunction of coordinate equalities; other
    /// formulas unchanged.
    pub fn expand_block_eq(&self) -> QfFormula {
        match self {
            QfFormula::BlockEq { left, right, start, len } => QfFormula::And(
                (*start..start + len).map(|p| QfFormula::Eq(Var::new(*left, p), Var::new(*right, p))).collect(),
            ),
            other => other.clone(),
        }
    }

    /// Replaces each atom by a formula built from its symbol and arguments.
    pub fn substitute(&self, f: &dyn Fn(usize, &[Var]) -> QfFormula) -> QfFormula {
        match self {
            QfFormula::Atom { symbol, args } => f(*symbol, args),
            QfFormula::Not(phi) => QfFormula::not(phi.substitute(f)),
            QfFormula::And(xs) => QfFormula::And(xs.iter().map(|x| x.substitute(f)).collect()),
            QfFormula::Or(xs) => QfFormula::Or(xs.iter().map(|x| x.substitute(f)).collect()),
            other => other.clone(),
        }
    }

    /// Prefix notation, e.g. `(and (E x0.0 x1.1) (not (= x0.0 x1.0)))`.
    pub fn to_prefix(&self, target: &Signature) -> String {
        match self {
            QfFormula::True => "true".into(),
            QfFormula::False => "false".into(),
            QfFormula::Atom { symbol, args } => {
                let mut s = format!("({}", target.name(*symbol));
                for v in args {
                    s.push_str(&format!(" {v}"));
                }
                s + ")"
            }
            QfFormula::Eq(v, w) => format!("(= {v} {w})"),
            QfFormula::BlockEq { left, right, start, len } => format!("(blockeq {left} {right} {start} {len})"),
            QfFormula::Not(phi) => format!("(not {})", phi.to_prefix(target)),
            QfFormula::And(xs) | QfFormula::Or(xs) => {
                let op = if matches!(self, QfFormula::And(_)) { "and" } else { "or" };
                let mut s = format!("({op}");
                for x in xs {
                    s.push(' ');
                    s.push_str(&x.to_prefix(target));
                }
                s + ")"
            }
        }
    }

    pub fn parse_prefix(text: &str, target: &Signature) -> Result<QfFormula> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let phi = parse(&tokens, &mut pos, target)?;
        if pos != tokens.len() {
            return Err(Error::Invalid(format!("trailing input after formula: {}", tokens[pos..].join(" "))));
        }
        Ok(phi)
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse(tokens: &[String], pos: &mut usize, target: &Signature) -> Result<QfFormula> {
    let next = |pos: &mut usize| -> Result<&str> {
        let t = tokens.get(*pos).ok_or_else(|| Error::Invalid("formula ends early".into()))?;
        *pos += 1;
        Ok(t.as_str())
    };
    match next(pos)? {
        "true" => return Ok(QfFormula::True),
        "false" => return Ok(QfFormula::False),
        "(" => {}
        t => return Err(Error::Invalid(format!("unexpected token {t}"))),
    }
    let head = next(pos)?.to_string();
    let mut args = Vec::new();
    while tokens.get(*pos).map(String::as_str) != Some(")") {
        if *pos >= tokens.len() {
            return Err(Error::Invalid("unbalanced parentheses".into()));
        }
        args.push(*pos);
        skip(tokens, pos)?;
    }
    *pos += 1;
    let sub = |i: usize| -> Result<QfFormula> {
        let mut p = i;
        parse(tokens, &mut p, target)
    };
    let var = |i: usize| parse_var(&tokens[i]);
    let number = |i: usize| tokens[i].parse::<usize>().map_err(|_| Error::Invalid(format!("expected a number, got {}", tokens[i])));
    Ok(match head.as_str() {
        "not" if args.len() == 1 => QfFormula::not(sub(args[0])?),
        "and" => QfFormula::And(args.into_iter().map(sub).collect::<Result<_>>()?),
        "or" => QfFormula::Or(args.into_iter().map(sub).collect::<Result<_>>()?),
        "=" if args.len() == 2 => QfFormula::Eq(var(args[0])?, var(args[1])?),
        "blockeq" if args.len() == 4 => QfFormula::BlockEq {
            left: number(args[0])?,
            right: number(args[1])?,
            start: number(args[2])?,
            len: number(args[3])?,
        },
        name => {
            let symbol = target.index_of(name).ok_or_else(|| Error::Invalid(format!("unknown symbol or malformed form {name}")))?;
            QfFormula::Atom { symbol, args: args.into_iter().map(var).collect::<Result<_>>()? }
        }
    })
}

fn skip(tokens: &[String], pos: &mut usize) -> Result<()> {
    let mut depth = 0usize;
    loop {
        let t = tokens.get(*pos).ok_or_else(|| Error::Invalid("unbalanced parentheses".into()))?;
        *pos += 1;
        match t.as_str() {
            "(" => depth += 1,
            ")" => depth = depth.checked_sub(1).ok_or_else(|| Error::Invalid("unbalanced parentheses".into()))?,
            _ => {}
        }
        if depth == 0 {
            return Ok(());
        }
    }
}

fn parse_var(t: &str) -> Result<Var> {
    let bad = || Error::Invalid(format!("expected a variable like x0.1, got {t}"));
    let (a, p) = t.strip_prefix('x').and_then(|r| r.split_once('.')).ok_or_else(bad)?;
    Ok(Var::new(a.parse().map_err(|_| bad())?, p.parse().map_err(|_| bad())?))
}

/// Truth of `phi` in `m` with argument `i` bound to the block `blocks[i]`.
pub fn eval_qf(phi: &QfFormula, m: &Structure, blocks: &[Vec<usize>]) -> Result<bool> {
    let get = |v: &Var| -> Result<usize> {
        let x = *blocks
            .get(v.arg)
            .and_then(|b| b.get(v.pos))
            .ok_or_else(|| Error::Invalid(format!("variable {v} is unassigned")))?;
        if x >= m.size() {
            return Err(Error::OutOfRange { element: x, size: m.size() });
        }
        Ok(x)
    };
    Ok(match phi {
        QfFormula::True => true,
        QfFormula::False => false,
        QfFormula::Atom { symbol, args } => {
            let t = args.iter().map(get).collect::<Result<Vec<_>>>()?;
            if *symbol >= m.sig().len() || m.sig().arity(*symbol) != t.len() {
                return Err(Error::Invalid(format!("atom #{symbol}/{} does not fit {}", t.len(), m.sig())));
            }
            m.holds(*symbol, &t)
        }
        QfFormula::Eq(v, w) => get(v)? == get(w)?,
        QfFormula::BlockEq { .. } => return eval_qf(&phi.expand_block_eq(), m, blocks),
        QfFormula::Not(p) => !eval_qf(p, m, blocks)?,
        QfFormula::And(xs) => {
            for x in xs {
                if !eval_qf(x, m, blocks)? {
                    return Ok(false);
                }
            }
            true
        }
        QfFormula::Or(xs) => {
            for x in xs {
                if eval_qf(x, m, blocks)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Structure {
        Structure::graph(2, &[(0, 1)])
    }

    #[test]
    fn evaluation() {
        let e = |a, b| QfFormula::atom(0, &[a, b]);
        let (x00, x11) = (Var::new(0, 0), Var::new(1, 1));
        assert!(eval_qf(&e(x00, x11), &k2(), &[vec![0, 0], vec![0, 1]]).unwrap());
        assert!(eval_qf(&QfFormula::Eq(x00, x11), &k2(), &[vec![1, 0], vec![0, 1]]).unwrap());
        let (x, y) = (Var::new(0, 0), Var::new(1, 0));
        let phi = QfFormula::And(vec![QfFormula::not(e(x, y)), e(y, x)]);
        assert!(!eval_qf(&phi, &k2(), &[vec![0], vec![1]]).unwrap());
        assert!(eval_qf(&e(x00, x11), &k2(), &[vec![0]]).is_err());
    }

    #[test]
    fn block_equality() {
        let phi = QfFormula::BlockEq { left: 0, right: 1, start: 1, len: 2 };
        let m = Structure::graph(3, &[]);
        assert!(eval_qf(&phi, &m, &[vec![0, 1, 2], vec![2, 1, 2]]).unwrap());
        assert!(!eval_qf(&phi, &m, &[vec![0, 1, 2], vec![0, 1, 1]]).unwrap());
        assert_eq!(phi.vars().len(), 4);
    }

    #[test]
    fn prefix_round_trip() {
        let sig = Signature::new([("E", 2), ("P", 1)]).unwrap();
        let text = "(or (and (E x0.0 x1.1) (not (= x0.0 x1.0))) (P x1.0) (blockeq 0 1 0 2) true)";
        let phi = QfFormula::parse_prefix(text, &sig).unwrap();
        assert_eq!(phi.to_prefix(&sig), text);
        phi.validate(&sig, 2, 2).unwrap();
        assert!(phi.validate(&sig, 2, 1).is_err());
        for bad in ["(E x0.0)", "(Q x0.0 x0.1)", "(and (E x0.0 x1.1)", "(= x0 x1)", "(E x0.0 x1.1) extra"] {
            let parsed = QfFormula::parse_prefix(bad, &sig);
            assert!(parsed.is_err() || parsed.unwrap().validate(&sig, 2, 2).is_err(), "{bad}");
        }
    }
}
