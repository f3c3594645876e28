//! A small expression language in one variable `r`, used to describe warping
//! functions. Expressions are parsed once, differentiated symbolically and then
//! evaluated many times by the model-space code.
//!
//! ```
//! use extrinsic::wexpr::{parse, differentiate};
//!
//! let w = parse("sinh(2*r)/2").unwrap();
//! let dw = differentiate(&w);
//! assert!((dw.evaluate(0.0).unwrap() - 1.0).abs() < 1e-15);
//! ```

mod diff;
mod parser;

use std::fmt;

pub use diff::differentiate;
pub use parser::{parse, ParseError, ParseErrorKind};

/// Unary functions understood by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Sinh => Ok(x.sinh()),
            Func::Cosh => Ok(x.cosh()),
            Func::Exp => Ok(x.exp()),
            Func::Ln if x > 0.0 => Ok(x.ln()),
            Func::Ln => Err(EvalError::Domain { what: "ln of a nonpositive argument", arg: x }),
            Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Func::Sqrt => Err(EvalError::Domain { what: "sqrt of a negative argument", arg: x }),
        }
    }
}

/// Expression tree. Exponents are always constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {what} ({arg})")]
    Domain { what: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation point {0} is not a nonnegative real")]
    BadPoint(f64),
}

impl Expr {
    /// Evaluates at `r`. Domain violations are reported instead of producing NaN.
    pub fn evaluate(&self, r: f64) -> Result<f64, EvalError> {
        if !(r >= 0.0) {
            return Err(EvalError::BadPoint(r));
        }
        self.eval_at(r)
    }

    pub(crate) fn eval_at(&self, r: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var => r,
            Expr::Neg(a) => -a.eval_at(r)?,
            Expr::Add(a, b) => a.eval_at(r)? + b.eval_at(r)?,
            Expr::Sub(a, b) => a.eval_at(r)? - b.eval_at(r)?,
            Expr::Mul(a, b) => a.eval_at(r)? * b.eval_at(r)?,
            Expr::Div(a, b) => {
                let num = a.eval_at(r)?;
                let den = b.eval_at(r)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, p) => pow(a.eval_at(r)?, *p)?,
            Expr::Call(f, a) => f.apply(a.eval_at(r)?)?,
        })
    }

    /// True when the expression does not mention `r`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() < i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::Domain { what: "fractional power of a negative base", arg: base });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(base.powf(exponent))
}

// Constant-folding constructors. Only literal arithmetic and the neutral
// elements 0 and 1 are simplified.

pub(crate) fn num(v: f64) -> Expr {
    Expr::Num(v)
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(0.0), None) => b,
        (None, Some(0.0)) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(0.0), None) => neg(b),
        (None, Some(0.0)) => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(1.0), None) => b,
        (None, Some(1.0)) => a,
        (Some(-1.0), None) => neg(b),
        (None, Some(-1.0)) => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
        (Some(0.0), None) => Expr::Num(0.0),
        (None, Some(1.0)) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn powc(a: Expr, p: f64) -> Expr {
    if p == 0.0 {
        return Expr::Num(1.0);
    }
    if p == 1.0 {
        return a;
    }
    match a {
        Expr::Num(x) => match pow(x, p) {
            Ok(v) => Expr::Num(v),
            Err(_) => Expr::Pow(Box::new(Expr::Num(x)), p),
        },
        a => Expr::Pow(Box::new(a), p),
    }
}

pub(crate) fn call(f: Func, a: Expr) -> Expr {
    if let Expr::Num(x) = a {
        if let Ok(v) = f.apply(x) {
            return Expr::Num(v);
        }
    }
    Expr::Call(f, Box::new(a))
}

/// Writes `e`, parenthesized when its precedence is below `min`.
fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Display for f64 is the shortest decimal that parses back to the same bits.
    if v.is_sign_negative() {
        write!(f, "-{}", -v)
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_number(f, *v),
            Expr::Var => write!(f, "r"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "/")?;
                write_operand(f, b, 3)
            }
            Expr::Pow(a, p) => {
                // right-associative, so a power base needs parentheses
                write_operand(f, a, 5)?;
                write!(f, "^(")?;
                write_number(f, *p)?;
                write!(f, ")")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_simple_forms() {
        assert_eq!(parse("r^2").unwrap().evaluate(3.0).unwrap(), 9.0);
        let s = parse("sinh(r)").unwrap().evaluate(1.0).unwrap();
        // Taylor series of sinh at 1, independent of libm.
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 0..20 {
            series += term;
            term /= ((2 * k + 2) * (2 * k + 3)) as f64;
        }
        assert!((s - series).abs() < 1e-15);
        assert!((s - 1.1752011936438014).abs() < 1e-15);
    }

    #[test]
    fn ln_of_zero_is_a_domain_error() {
        let e = parse("ln(r)").unwrap();
        assert!(matches!(e.evaluate(0.0), Err(EvalError::Domain { .. })));
        assert!(matches!(parse("sqrt(r - 2)").unwrap().evaluate(1.0), Err(EvalError::Domain { .. })));
        assert!(matches!(parse("1/r").unwrap().evaluate(0.0), Err(EvalError::DivisionByZero)));
        assert!(matches!(parse("r").unwrap().evaluate(-1.0), Err(EvalError::BadPoint(_))));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let e = parse("sinh(2*r)/2 + r^(1/3)*cos(r)").unwrap();
        let a = e.evaluate(0.731).unwrap();
        let b = e.evaluate(0.731).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn printing_parenthesizes_by_precedence() {
        let cases = [
            ("r - (r - 1)", "r - (r - 1)"),
            ("(r + 1)*(r - 1)", "(r + 1)*(r - 1)"),
            ("-r^2", "-r^(2)"),
            ("(-r)^2", "(-r)^(2)"),
            ("r/(2*r)", "r/(2*r)"),
            ("r^2^2", "r^(4)"),
        ];
        for (src, printed) in cases {
            assert_eq!(parse(src).unwrap().to_string(), printed, "{src}");
        }
    }

    #[test]
    fn folding_keeps_literal_arithmetic_only() {
        assert_eq!(parse("2*3 + 1").unwrap(), Expr::Num(7.0));
        assert_eq!(parse("r*1 + 0").unwrap(), Expr::Var);
        assert!(parse("r + r").unwrap().to_string() == "r + r");
    }

    use proptest::prelude::*;

    fn expr(with_div: bool) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(1i32..40).prop_map(|k| Expr::Num(f64::from(k) / 8.0)), Just(Expr::Var)];
        leaf.prop_recursive(4, 24, 2, move |inner| {
            let b = |e: Expr| Box::new(e);
            let mut ops = vec![
                inner.clone().prop_map(move |a| Expr::Neg(b(a))).boxed(),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))).boxed(),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))).boxed(),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))).boxed(),
                (inner.clone(), 1u8..4).prop_map(move |(x, p)| Expr::Pow(b(x), f64::from(p))).boxed(),
                (inner.clone(), prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Sinh), Just(Func::Cosh)])
                    .prop_map(move |(x, f)| Expr::Call(f, b(x)))
                    .boxed(),
            ];
            if with_div {
                ops.push((inner.clone(), inner).prop_map(move |(x, y)| Expr::Div(b(x), b(y))).boxed());
            }
            proptest::strategy::Union::new(ops)
        })
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn printed_form_parses_to_the_same_function(e in expr(true), r in 0.05f64..3.0) {
            let again = parse(&e.to_string()).unwrap();
            match (e.evaluate(r), again.evaluate(r)) {
                (Ok(a), Ok(b)) if a.is_finite() => prop_assert!(close(a, b, 1e-9), "{e}: {a} vs {b}"),
                (Ok(_), Ok(_)) | (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
            }
        }

        #[test]
        fn derivative_matches_central_difference(e in expr(false), r in 0.2f64..1.5) {
            let h = 1e-5;
            let (Ok(hi), Ok(lo)) = (e.evaluate(r + h), e.evaluate(r - h)) else { return Ok(()) };
            let fd = (hi - lo) / (2.0 * h);
            prop_assume!(fd.is_finite() && fd.abs() < 1e6);
            let exact = differentiate(&e).evaluate(r).unwrap();
            prop_assert!(close(exact, fd, 1e-5), "{e}: {exact} vs {fd}");
        }
    }
}
