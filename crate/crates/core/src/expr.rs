//! Scalar function expressions over coordinates `x`, `y`, `z`.
//!
//! Parsing and evaluation are delegated to `fasteval`; this module adds the
//! coordinate variables, `pi` as a bare constant and `exp`.

use std::fmt;

use fasteval::{Compiler, Evaler, Instruction, Parser, Slab};

use crate::error::{Error, Result};

pub struct Expr {
    source: String,
    slab: Slab,
    compiled: Instruction,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let mut slab = Slab::new();
        let compiled = Parser::new()
            .parse(source, &mut slab.ps)
            .map_err(|e| Error::Evaluation(format!("cannot parse {source:?}: {e}")))?
            .from(&slab.ps)
            .compile(&slab.ps, &mut slab.cs);
        let expr = Expr { source: source.to_owned(), slab, compiled };
        // surface unknown names now instead of at the first sample
        expr.eval(&[0.25, 0.5, 0.75])?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates at a point; missing coordinates read as zero. Non-finite
    /// results are reported as evaluation errors.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let coord = |k: usize| point.get(k).copied().unwrap_or(0.0);
        let mut ns = |name: &str, args: Vec<f64>| -> Option<f64> {
            match (name, args.as_slice()) {
                ("x", []) => Some(coord(0)),
                ("y", []) => Some(coord(1)),
                ("z", []) => Some(coord(2)),
                ("pi", []) => Some(std::f64::consts::PI),
                ("exp", [v]) => Some(v.exp()),
                ("sqrt", [v]) => Some(v.sqrt()),
                _ => None,
            }
        };
        let value = self
            .compiled
            .eval(&self.slab, &mut ns)
            .map_err(|e| Error::Evaluation(format!("{}: {e}", self.source)))?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation(format!("{} is not finite at {point:?}", self.source)))
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Expr").field(&self.source).finish()
    }
}

/// Derivative along coordinate `k` by a fourth-order central difference.
pub fn partial(f: &Expr, point: &[f64], k: usize) -> Result<f64> {
    let step = 1e-3;
    let mut p = point.to_vec();
    if p.len() <= k {
        p.resize(k + 1, 0.0);
    }
    let mut at = |t: f64| {
        p[k] = point.get(k).copied().unwrap_or(0.0) + t;
        f.eval(&p)
    };
    let (m2, m1, p1, p2) = (at(-2.0 * step)?, at(-step)?, at(step)?, at(2.0 * step)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step))
}

/// Second derivative along coordinate `k`, fourth-order central difference.
pub fn second_partial(f: &Expr, point: &[f64], k: usize) -> Result<f64> {
    let step = 5e-3;
    let mut p = point.to_vec();
    if p.len() <= k {
        p.resize(k + 1, 0.0);
    }
    let mut at = |t: f64| {
        p[k] = point.get(k).copied().unwrap_or(0.0) + t;
        f.eval(&p)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0 * step)?, at(-step)?, at(0.0)?, at(step)?, at(2.0 * step)?);
    Ok((-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * step * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_functions() {
        let e = Expr::parse("2*x^2 + sin(pi*y) - exp(0) + abs(-3) / cos(0)").unwrap();
        assert!((e.eval(&[3.0, 0.5]).unwrap() - (18.0 + 1.0 - 1.0 + 3.0)).abs() < 1e-12);
        let e = Expr::parse("1/(2+cos(y))").unwrap();
        assert!((e.eval(&[0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(Expr::parse("z").unwrap().eval(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Expr::parse("sin(x"), Err(Error::Evaluation(_))));
        assert!(matches!(Expr::parse("w + 1"), Err(Error::Evaluation(_))));
        let e = Expr::parse("1/x").unwrap();
        assert!(e.eval(&[0.0]).is_err());
    }

    #[test]
    fn numerical_partials() {
        let e = Expr::parse("sin(x)*y").unwrap();
        assert!((partial(&e, &[0.3, 2.0], 0).unwrap() - 2.0 * 0.3f64.cos()).abs() < 1e-11);
        assert!((partial(&e, &[0.3, 2.0], 1).unwrap() - 0.3f64.sin()).abs() < 1e-11);
        assert!((second_partial(&e, &[0.3, 2.0], 0).unwrap() + 2.0 * 0.3f64.sin()).abs() < 1e-8);
    }
}
