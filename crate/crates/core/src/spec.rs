//! Algorithm trees and their canonical text form.
//!
//! ```text
//! spec     := leaf | chain | bet | wrap
//! leaf     := name [ "[" key "=" number { "," key "=" number } "]" ]
//! chain    := "chain(" spec { "," spec } [ ";" number { "," number } ] ")"
//! bet      := "bet_and_run(" spec "," spec { "," spec } ";" number ")"
//! wrap     := ("metamodel" | "progressive" | "softmax") "(" spec ")"
//! ```
//!
//! Chain fractions default to an equal split. Names are lowercase letters,
//! digits, `-` and `_`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WrapKind {
    Metamodel,
    Progressive,
    Softmax,
}

impl WrapKind {
    pub fn name(self) -> &'static str {
        match self {
            WrapKind::Metamodel => "metamodel",
            WrapKind::Progressive => "progressive",
            WrapKind::Softmax => "softmax",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "metamodel" => Some(WrapKind::Metamodel),
            "progressive" => Some(WrapKind::Progressive),
            "softmax" => Some(WrapKind::Softmax),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    Leaf { solver: String, params: Vec<(String, f64)> },
    Chain { children: Vec<AlgorithmSpec>, fractions: Vec<f64> },
    BetAndRun { children: Vec<AlgorithmSpec>, phase_fraction: f64 },
    Wrap { kind: WrapKind, child: Box<AlgorithmSpec> },
}

impl AlgorithmSpec {
    pub fn leaf(solver: &str) -> Self {
        AlgorithmSpec::Leaf { solver: solver.to_string(), params: Vec::new() }
    }

    pub fn leaf_with(solver: &str, params: &[(&str, f64)]) -> Self {
        AlgorithmSpec::Leaf { solver: solver.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    pub fn chain(children: Vec<AlgorithmSpec>, fractions: Vec<f64>) -> Result<Self> {
        let spec = AlgorithmSpec::Chain { children, fractions };
        spec.check_node()?;
        Ok(spec)
    }

    pub fn bet_and_run(children: Vec<AlgorithmSpec>, phase_fraction: f64) -> Result<Self> {
        let spec = AlgorithmSpec::BetAndRun { children, phase_fraction };
        spec.check_node()?;
        Ok(spec)
    }

    pub fn wrap(kind: WrapKind, child: AlgorithmSpec) -> Self {
        AlgorithmSpec::Wrap { kind, child: Box::new(child) }
    }

    /// Value of a leaf parameter.
    pub fn param(&self, key: &str) -> Option<f64> {
        match self {
            AlgorithmSpec::Leaf { params, .. } => params.iter().find(|(k, _)| k == key).map(|(_, v)| *v),
            _ => None,
        }
    }

    /// Leaf solver names in depth-first order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            AlgorithmSpec::Leaf { solver, .. } => out.push(solver),
            AlgorithmSpec::Chain { children, .. } | AlgorithmSpec::BetAndRun { children, .. } => {
                children.iter().for_each(|c| c.collect_leaves(out))
            }
            AlgorithmSpec::Wrap { child, .. } => child.collect_leaves(out),
        }
    }

    fn check_node(&self) -> Result<()> {
        match self {
            AlgorithmSpec::Leaf { solver, .. } if solver.is_empty() => Err(invalid("", "empty solver name")),
            AlgorithmSpec::Chain { children, fractions } => {
                if children.is_empty() {
                    return Err(Error::Config("chain needs at least one child".into()));
                }
                if fractions.len() != children.len() {
                    return Err(Error::Config(format!(
                        "chain has {} children but {} fractions",
                        children.len(),
                        fractions.len()
                    )));
                }
                if fractions.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
                    return Err(Error::Config("chain fractions must be positive".into()));
                }
                let total: f64 = fractions.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("chain fractions sum to {total}, not 1")));
                }
                Ok(())
            }
            AlgorithmSpec::BetAndRun { children, phase_fraction } => {
                if children.len() < 2 {
                    return Err(Error::Config("bet_and_run needs at least two children".into()));
                }
                if !(*phase_fraction > 0.0 && *phase_fraction < 1.0) {
                    return Err(Error::Config(format!("bet_and_run phase fraction must lie in (0, 1), got {phase_fraction}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn invalid(input: &str, reason: &str) -> Error {
    Error::Parse { input: input.to_string(), reason: reason.to_string() }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, children: &[AlgorithmSpec]) -> fmt::Result {
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            Ok(())
        }
        match self {
            AlgorithmSpec::Leaf { solver, params } => {
                f.write_str(solver)?;
                if !params.is_empty() {
                    f.write_str("[")?;
                    for (i, (k, v)) in params.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{k}={v}")?;
                    }
                    f.write_str("]")?;
                }
                Ok(())
            }
            AlgorithmSpec::Chain { children, fractions } => {
                f.write_str("chain(")?;
                join(f, children)?;
                f.write_str(";")?;
                for (i, x) in fractions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            AlgorithmSpec::BetAndRun { children, phase_fraction } => {
                f.write_str("bet_and_run(")?;
                join(f, children)?;
                write!(f, ";{phase_fraction})")
            }
            AlgorithmSpec::Wrap { kind, child } => write!(f, "{}({child})", kind.name()),
        }
    }
}

struct Parser<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Self { input, bytes: input.as_bytes(), pos: 0 }
    }

    fn error(&self, reason: impl Into<String>) -> Error {
        Error::Parse { input: self.input.to_string(), reason: format!("{} at offset {}", reason.into(), self.pos) }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn name(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || matches!(self.bytes[self.pos], b'-' | b'_'))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(&self.input[start..self.pos])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || matches!(self.bytes[self.pos], b'.' | b'-' | b'+'))
        {
            self.pos += 1;
        }
        let text = &self.input[start..self.pos];
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(format!("invalid number '{text}'")))
    }

    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![self.number()?];
        while self.eat(b',') {
            out.push(self.number()?);
        }
        Ok(out)
    }

    fn children(&mut self) -> Result<Vec<AlgorithmSpec>> {
        let mut out = vec![self.spec()?];
        while self.eat(b',') {
            out.push(self.spec()?);
        }
        Ok(out)
    }

    fn spec(&mut self) -> Result<AlgorithmSpec> {
        let name = self.name()?;
        let node = match name {
            "chain" => {
                self.expect(b'(')?;
                let children = self.children()?;
                let fractions = if self.eat(b';') {
                    self.numbers()?
                } else {
                    vec![1.0 / children.len() as f64; children.len()]
                };
                self.expect(b')')?;
                AlgorithmSpec::Chain { children, fractions }
            }
            "bet_and_run" => {
                self.expect(b'(')?;
                let children = self.children()?;
                self.expect(b';')?;
                let phase_fraction = self.number()?;
                self.expect(b')')?;
                AlgorithmSpec::BetAndRun { children, phase_fraction }
            }
            _ => match WrapKind::from_name(name) {
                Some(kind) if self.peek() == Some(b'(') => {
                    self.expect(b'(')?;
                    let child = self.spec()?;
                    self.expect(b')')?;
                    AlgorithmSpec::wrap(kind, child)
                }
                _ => {
                    let mut params = Vec::new();
                    if self.eat(b'[') {
                        loop {
                            let key = self.name()?.to_string();
                            self.expect(b'=')?;
                            params.push((key, self.number()?));
                            if !self.eat(b',') {
                                break;
                            }
                        }
                        self.expect(b']')?;
                    }
                    AlgorithmSpec::Leaf { solver: name.to_string(), params }
                }
            },
        };
        node.check_node().map_err(|e| match e {
            Error::Config(reason) => self.error(reason),
            other => other,
        })?;
        Ok(node)
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let spec = p.spec()?;
        if p.peek().is_some() {
            return Err(p.error("trailing input"));
        }
        Ok(spec)
    }
}

/// Splits a comma-separated list of specs at top-level commas only.
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}
