//! Prefix (s-expression) grammar for one-variable arc coordinates.
//!
//! ```text
//! expr  := atom | "(" op expr+ ")"
//! atom  := "t" | "pi" | "e" | number | integer "/" integer
//! op    := "+" | "-" | "*" | "/" | "pow" | "exp" | "log" | "sin" | "cos" | "sqrt"
//! ```
//! `+` and `*` take one or more arguments, `-` with one argument negates,
//! `/` and `pow` take two, the remaining functions take one.
//! Example: `(* t (exp (/ -1 (pow t 2))))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    T,
    Const(f64),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::T => t,
            Expr::Const(c) => *c,
            Expr::Add(v) => v.iter().map(|e| e.eval(t)).sum(),
            Expr::Mul(v) => v.iter().map(|e| e.eval(t)).product(),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Neg(a) => -a.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => pow(a.eval(t), b.eval(t)),
            Expr::Exp(a) => a.eval(t).exp(),
            Expr::Log(a) => a.eval(t).ln(),
            Expr::Sin(a) => a.eval(t).sin(),
            Expr::Cos(a) => a.eval(t).cos(),
            Expr::Sqrt(a) => a.eval(t).sqrt(),
        }
    }
}

fn pow(base: f64, k: f64) -> f64 {
    if k.fract() == 0.0 && k.abs() < 1e9 {
        base.powi(k as i32)
    } else {
        base.powf(k)
    }
}

fn parse_atom(tok: &str) -> Result<Expr> {
    match tok {
        "t" => return Ok(Expr::T),
        "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
        "e" => return Ok(Expr::Const(std::f64::consts::E)),
        _ => {}
    }
    if let Some((p, q)) = tok.split_once('/') {
        let p: f64 = p.parse::<i64>().map_err(|e| Error::Parse(format!("{tok}: {e}")))? as f64;
        let q: f64 = q.parse::<i64>().map_err(|e| Error::Parse(format!("{tok}: {e}")))? as f64;
        if q == 0.0 {
            return Err(Error::Parse(format!("{tok}: zero denominator")));
        }
        return Ok(Expr::Const(p / q));
    }
    tok.parse::<f64>()
        .map(Expr::Const)
        .map_err(|_| Error::Parse(format!("unknown atom '{tok}'")))
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_tokens(toks: &[String], pos: &mut usize) -> Result<Expr> {
    let tok = toks.get(*pos).ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    if tok == ")" {
        return Err(Error::Parse("unexpected ')'".into()));
    }
    if tok != "(" {
        return parse_atom(tok);
    }
    let op = toks.get(*pos).ok_or_else(|| Error::Parse("missing operator".into()))?.clone();
    *pos += 1;
    let mut args = Vec::new();
    while toks.get(*pos).map(String::as_str) != Some(")") {
        if *pos >= toks.len() {
            return Err(Error::Parse("missing ')'".into()));
        }
        args.push(parse_tokens(toks, pos)?);
    }
    *pos += 1;
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!("'{op}' takes {n} argument(s), got {}", args.len())))
        }
    };
    let mut it = args.clone().into_iter();
    let mut one = || Box::new(it.next().unwrap());
    Ok(match op.as_str() {
        "+" | "*" if args.is_empty() => return Err(Error::Parse(format!("'{op}' needs arguments"))),
        "+" => Expr::Add(args),
        "*" => Expr::Mul(args),
        "-" if args.len() == 1 => Expr::Neg(one()),
        "-" => {
            arity(2)?;
            Expr::Sub(one(), one())
        }
        "/" => {
            arity(2)?;
            Expr::Div(one(), one())
        }
        "pow" => {
            arity(2)?;
            Expr::Pow(one(), one())
        }
        "exp" | "log" | "sin" | "cos" | "sqrt" => {
            arity(1)?;
            let a = one();
            match op.as_str() {
                "exp" => Expr::Exp(a),
                "log" => Expr::Log(a),
                "sin" => Expr::Sin(a),
                "cos" => Expr::Cos(a),
                _ => Expr::Sqrt(a),
            }
        }
        other => return Err(Error::Parse(format!("unknown operator '{other}'"))),
    })
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokenize(s);
        let mut pos = 0;
        let e = parse_tokens(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::Parse(format!("trailing input after position {pos}")));
        }
        Ok(e)
    }
}

fn join(f: &mut fmt::Formatter<'_>, op: &str, args: &[&Expr]) -> fmt::Result {
    write!(f, "({op}")?;
    for a in args {
        write!(f, " {a}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::T => write!(f, "t"),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Add(v) => join(f, "+", &v.iter().collect::<Vec<_>>()),
            Expr::Mul(v) => join(f, "*", &v.iter().collect::<Vec<_>>()),
            Expr::Sub(a, b) => join(f, "-", &[a, b]),
            Expr::Neg(a) => join(f, "-", &[a]),
            Expr::Div(a, b) => join(f, "/", &[a, b]),
            Expr::Pow(a, b) => join(f, "pow", &[a, b]),
            Expr::Exp(a) => join(f, "exp", &[a]),
            Expr::Log(a) => join(f, "log", &[a]),
            Expr::Sin(a) => join(f, "sin", &[a]),
            Expr::Cos(a) => join(f, "cos", &[a]),
            Expr::Sqrt(a) => join(f, "sqrt", &[a]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e: Expr = "(* t (exp (/ -1 (pow t 2))))".parse().unwrap();
        let t: f64 = 0.5;
        assert!((e.eval(t) - t * (-1.0 / (t * t)).exp()).abs() < 1e-16);
        let r: Expr = "(pow t 3/2)".parse().unwrap();
        assert!((r.eval(4.0) - 8.0).abs() < 1e-12);
        let n: Expr = "(- t)".parse().unwrap();
        assert_eq!(n.eval(2.0), -2.0);
        assert_eq!("pi".parse::<Expr>().unwrap().eval(0.0), std::f64::consts::PI);
    }

    #[test]
    fn display_roundtrip() {
        for s in ["(+ t (* 2 (pow t 2)))", "(sin (log t))", "(- (sqrt t) 1/3)", "(cos t)"] {
            let e: Expr = s.parse().unwrap();
            let back: Expr = e.to_string().parse().unwrap();
            assert_eq!(e, back);
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["(", ")", "(foo t)", "(pow t)", "(+ t", "t t", "1/0"] {
            assert!(s.parse::<Expr>().is_err(), "{s}");
        }
    }
}
