use super::{add, call, div, mul, neg, num, powc, sub, Expr, Func};

/// Symbolic derivative with respect to `r`. The result stays in the grammar
/// because exponents are constants.
pub fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) => num(0.0),
        Expr::Var => num(1.0),
        Expr::Neg(a) => neg(differentiate(a)),
        Expr::Add(a, b) => add(differentiate(a), differentiate(b)),
        Expr::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        Expr::Div(a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            if db.as_num() == Some(0.0) {
                return div(da, (**b).clone());
            }
            div(
                sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                powc((**b).clone(), 2.0),
            )
        }
        Expr::Pow(a, p) => mul(mul(num(*p), powc((**a).clone(), p - 1.0)), differentiate(a)),
        Expr::Call(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, inner),
                Func::Cos => neg(call(Func::Sin, inner)),
                Func::Sinh => call(Func::Cosh, inner),
                Func::Cosh => call(Func::Sinh, inner),
                Func::Exp => call(Func::Exp, inner),
                Func::Ln => div(num(1.0), inner),
                Func::Sqrt => div(num(1.0), mul(num(2.0), call(Func::Sqrt, inner))),
            };
            mul(outer, differentiate(a))
        }
    }
}
