use std::sync::Arc;

use meval::{ContextProvider, Expr, FuncEvalError};

use crate::error::{Error, Result};
use crate::phase_space::ScalarField;

struct Vars<'a> {
    names: &'a [String],
    values: &'a [f64],
}

fn arity(args: &[f64], n: usize) -> std::result::Result<(), FuncEvalError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(FuncEvalError::NumberArgs(n))
    }
}

impl ContextProvider for Vars<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "pi" => Some(std::f64::consts::PI),
            "e" => Some(std::f64::consts::E),
            _ => self.names.iter().position(|n| n == name).map(|i| self.values[i]),
        }
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> std::result::Result<f64, FuncEvalError> {
        let unary: Option<fn(f64) -> f64> = match name {
            "sin" => Some(f64::sin),
            "cos" => Some(f64::cos),
            "tan" => Some(f64::tan),
            "asin" => Some(f64::asin),
            "acos" => Some(f64::acos),
            "atan" => Some(f64::atan),
            "sinh" => Some(f64::sinh),
            "cosh" => Some(f64::cosh),
            "tanh" => Some(f64::tanh),
            "exp" => Some(f64::exp),
            "ln" => Some(f64::ln),
            "log10" => Some(f64::log10),
            "sqrt" => Some(f64::sqrt),
            "abs" => Some(f64::abs),
            "signum" => Some(f64::signum),
            _ => None,
        };
        if let Some(f) = unary {
            arity(args, 1)?;
            return Ok(f(args[0]));
        }
        match name {
            "atan2" => arity(args, 2).map(|_| args[0].atan2(args[1])),
            "hypot" => arity(args, 2).map(|_| args[0].hypot(args[1])),
            "min" | "max" if args.is_empty() => Err(FuncEvalError::TooFewArguments),
            "min" => Ok(args.iter().copied().fold(f64::INFINITY, f64::min)),
            "max" => Ok(args.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            _ => Err(FuncEvalError::UnknownFunction),
        }
    }
}

/// A parsed scalar expression in named coordinates.
///
/// Supports `+ - * / ^`, the constants `pi` and `e`, and the functions
/// `sin cos tan asin acos atan sinh cosh tanh exp ln log10 sqrt abs signum
/// atan2 hypot min max`.
#[derive(Clone, Debug)]
pub struct Expression {
    source: String,
    expr: Arc<Expr>,
    names: Arc<Vec<String>>,
}

impl Expression {
    /// Parses `source` and checks it evaluates with every name bound.
    pub fn parse(source: &str, names: &[String]) -> Result<Self> {
        let fail = |message: String| Error::Expression { expr: source.to_string(), message };
        let expr: Expr = source.parse().map_err(|e: meval::Error| fail(e.to_string()))?;
        let e = Expression { source: source.to_string(), expr: Arc::new(expr), names: Arc::new(names.to_vec()) };
        e.try_eval(&vec![0.0; names.len()]).map_err(fail)?;
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn try_eval(&self, x: &[f64]) -> std::result::Result<f64, String> {
        self.expr.eval_with_context(Vars { names: &self.names, values: x }).map_err(|e| e.to_string())
    }

    /// Value at `x`; NaN where evaluation fails.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }

    pub fn into_field(self) -> ScalarField {
        let n = self.names.len();
        ScalarField::function(n, move |x| self.eval(x))
    }
}

/// `q{offset}, q{offset+1}, ...` for `n` coordinates.
pub fn coordinate_names(n: usize, offset: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{}", i + offset)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_with_named_coordinates() {
        let e = Expression::parse("0.5*q1^2 + sin(pi*q2) - e", &coordinate_names(2, 1)).unwrap();
        assert!((e.eval(&[2.0, 0.5]) - (2.0 + 1.0 - std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let names = coordinate_names(2, 0);
        assert!(matches!(Expression::parse("q7 + 1", &names), Err(Error::Expression { .. })));
        assert!(matches!(Expression::parse("foo(q0)", &names), Err(Error::Expression { .. })));
        assert!(matches!(Expression::parse("1 +", &names), Err(Error::Expression { .. })));
    }

    #[test]
    fn variadic_and_binary_functions() {
        let e = Expression::parse("max(q0, 2, -1) + atan2(1, 1)", &coordinate_names(1, 0)).unwrap();
        assert!((e.eval(&[3.0]) - (3.0 + std::f64::consts::FRAC_PI_4)).abs() < 1e-15);
    }
}
