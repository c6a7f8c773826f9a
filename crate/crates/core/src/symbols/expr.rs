//! `name(key=value, ...)` expressions naming symbol families.

use super::{GraphFn, SymbolSpec};
use crate::error::{QmlError, Result};

const MAX_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Num(f64),
    Ident(String),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<(String, Arg)>,
}

fn err(msg: impl Into<String>) -> QmlError {
    QmlError::Parse { line: 0, msg: msg.into() }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(format!("expected '{}' at offset {}", c as char, self.pos)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos || self.s[start].is_ascii_digit() {
            return Err(err(format!("expected identifier at offset {start}")));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && matches!(self.s[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E' | b'/') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).map_err(|_| err("invalid utf-8"))?;
        parse_number(text).ok_or_else(|| err(format!("invalid number '{text}'")))
    }

    fn value(&mut self, depth: usize) -> Result<Arg> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => Ok(Arg::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let save = self.pos;
                let name = self.ident()?;
                if self.peek() == Some(b'(') {
                    self.pos = save;
                    Ok(Arg::Call(self.call(depth + 1)?))
                } else {
                    Ok(Arg::Ident(name))
                }
            }
            _ => Err(err(format!("expected value at offset {}", self.pos))),
        }
    }

    fn call(&mut self, depth: usize) -> Result<Call> {
        if depth > MAX_DEPTH {
            return Err(err("expression nested too deeply"));
        }
        let name = self.ident()?;
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() == Some(b')') {
                self.pos += 1;
                return Ok(Call { name, args });
            }
            loop {
                let key = self.ident()?;
                self.expect(b'=')?;
                let v = self.value(depth)?;
                if args.iter().any(|(k, _)| *k == key) {
                    return Err(err(format!("duplicate argument '{key}'")));
                }
                args.push((key, v));
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(err(format!("expected ',' or ')' at offset {}", self.pos))),
                }
            }
        }
        Ok(Call { name, args })
    }
}

/// Decimal, exponent or `a/b` fraction literal; `inf` is accepted.
pub(crate) fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if t == "inf" || t == "infinity" {
        return Some(f64::INFINITY);
    }
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            if b == 0.0 {
                return None;
            }
            a / b
        }
        None => t.parse().ok()?,
    };
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

pub fn parse_call(text: &str) -> Result<Call> {
    let mut c = Cursor { s: text.as_bytes(), pos: 0 };
    let call = c.call(0)?;
    if c.peek().is_some() {
        return Err(err(format!("trailing input at offset {}", c.pos)));
    }
    Ok(call)
}

impl Call {
    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !allowed.contains(&k.as_str()) {
                return Err(err(format!("unknown argument '{k}' for {}", self.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Arg> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn num(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            Some(Arg::Num(v)) => Ok(*v),
            Some(_) => Err(err(format!("argument '{key}' of {} must be a number", self.name))),
            None => default.ok_or_else(|| err(format!("{} requires argument '{key}'", self.name))),
        }
    }

    pub fn order(&self, key: &str, default: Option<u32>) -> Result<u32> {
        let v = self.num(key, default.map(f64::from))?;
        if v.fract() != 0.0 || !(0.0..=64.0).contains(&v) {
            return Err(err(format!("argument '{key}' of {} must be an integer in 0..=64", self.name)));
        }
        Ok(v as u32)
    }
}

fn graph_from_call(c: &Call) -> Result<GraphFn> {
    let simple = |g: GraphFn| -> Result<GraphFn> {
        c.check_keys(&[])?;
        Ok(g)
    };
    match c.name.as_str() {
        "circle_graph" => simple(GraphFn::CircleGraph),
        "free" => simple(GraphFn::Free),
        "dilation" => simple(GraphFn::Dilation),
        "bent_circle" => simple(GraphFn::BentCircle),
        "zero" => simple(GraphFn::Zero),
        "monomial" => {
            c.check_keys(&["k", "c"])?;
            Ok(GraphFn::Monomial { k: c.order("k", None)?, c: finite(c.num("c", Some(1.0))?)? })
        }
        "perturbed" => {
            c.check_keys(&["base", "k", "c"])?;
            let base = match c.get("base") {
                Some(Arg::Ident(n)) => graph_from_call(&Call { name: n.clone(), args: vec![] })?,
                Some(Arg::Call(inner)) => graph_from_call(inner)?,
                _ => return Err(err("perturbed requires base=<graph>")),
            };
            Ok(GraphFn::Perturbed { base: Box::new(base), k: c.order("k", None)?, c: finite(c.num("c", Some(1.0))?)? })
        }
        other => Err(err(format!("unknown graph function '{other}'"))),
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err("coefficient must be finite"))
    }
}

/// Catalog graph function, e.g. `bent_circle` or `monomial(k=2, c=0.5)`.
pub fn parse_graph_fn(text: &str) -> Result<GraphFn> {
    graph_from_call(&parse_call(text)?)
}

/// Symbol family expression, e.g. `contact_circle(k=2, c=1.0)`.
pub fn parse_symbol_expr(text: &str) -> Result<SymbolSpec> {
    let c = parse_call(text)?;
    match c.name.as_str() {
        "circle_minus_one" => {
            c.check_keys(&[])?;
            Ok(SymbolSpec::CircleMinusOne)
        }
        "contact_circle" => {
            c.check_keys(&["k", "c"])?;
            SymbolSpec::contact_circle(c.order("k", None)?, c.num("c", Some(1.0))?).map_err(|e| err(e.to_string()))
        }
        "flat_contact" => {
            c.check_keys(&["k", "c"])?;
            SymbolSpec::flat_contact(c.order("k", None)?, c.num("c", Some(1.0))?).map_err(|e| err(e.to_string()))
        }
        "xi1" => {
            c.check_keys(&[])?;
            Ok(SymbolSpec::xi1())
        }
        "xi2_power" => {
            c.check_keys(&["n"])?;
            Ok(SymbolSpec::xi2_power(c.order("n", None)?))
        }
        "graph" => {
            c.check_keys(&["a"])?;
            match c.get("a") {
                Some(Arg::Ident(n)) => Ok(SymbolSpec::GraphSymbol(graph_from_call(&Call { name: n.clone(), args: vec![] })?)),
                Some(Arg::Call(inner)) => Ok(SymbolSpec::GraphSymbol(graph_from_call(inner)?)),
                _ => Err(err("graph requires a=<graph function>")),
            }
        }
        _ => Ok(SymbolSpec::GraphSymbol(graph_from_call(&c)?)),
    }
}
