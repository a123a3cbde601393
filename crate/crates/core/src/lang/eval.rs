use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{BinOp, Expr, SurfaceAst, UnaryFn, Var};
use crate::jet::{Jet2, Jet2Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// Evaluation hit an undefined real operation. `node` is the printed
    /// subexpression that failed.
    #[error("domain error in `{node}` at (u, v) = ({u}, {v}): {reason}")]
    Domain {
        node: String,
        reason: String,
        u: f64,
        v: f64,
    },
}

struct Env<'a> {
    u: Jet2,
    v: Jet2,
    params: &'a BTreeMap<String, f64>,
}

impl Env<'_> {
    fn fail(&self, node: &Expr, reason: &str) -> EvalError {
        EvalError::Domain {
            node: node.to_string(),
            reason: reason.to_string(),
            u: self.u.value,
            v: self.v.value,
        }
    }

    fn eval(&self, e: &Expr) -> Result<Jet2, EvalError> {
        let out = match e {
            Expr::Const(c) => Jet2::constant(*c),
            Expr::Var(Var::U) => self.u,
            Expr::Var(Var::V) => self.v,
            Expr::Param(name) => match self.params.get(name) {
                Some(x) => Jet2::constant(*x),
                None => return Err(self.fail(e, "unbound parameter")),
            },
            Expr::Unary(f, arg) => {
                let x = self.eval(arg)?;
                match f {
                    UnaryFn::Neg => -x,
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Tan => x.tan(),
                    UnaryFn::Sinh => x.sinh(),
                    UnaryFn::Cosh => x.cosh(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log if x.value <= 0.0 => {
                        return Err(self.fail(e, "logarithm of a non-positive value"))
                    }
                    UnaryFn::Log => x.ln(),
                    UnaryFn::Sqrt if x.value <= 0.0 => {
                        return Err(self.fail(e, "square root of a non-positive value"))
                    }
                    UnaryFn::Sqrt => x.sqrt(),
                    UnaryFn::Abs if x.value == 0.0 => {
                        return Err(self.fail(e, "abs is not differentiable at zero"))
                    }
                    UnaryFn::Abs => x.abs(),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b.value == 0.0 => {
                        return Err(self.fail(e, "division by zero"))
                    }
                    BinOp::Div => a / b,
                    BinOp::Pow => self.pow(e, a, b)?,
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(self.fail(e, "non-finite result"))
        }
    }

    fn pow(&self, node: &Expr, base: Jet2, exp: Jet2) -> Result<Jet2, EvalError> {
        if exp.is_constant() {
            let p = exp.value;
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                if base.value == 0.0 && p < 0.0 {
                    return Err(self.fail(node, "negative power of zero"));
                }
                return Ok(base.powi(p as i32));
            }
            if base.value < 0.0 {
                return Err(self.fail(node, "non-integer power of a negative base"));
            }
            return Ok(base.powf(p));
        }
        if base.value <= 0.0 {
            return Err(self.fail(node, "variable exponent needs a positive base"));
        }
        Ok((exp * base.ln()).exp())
    }
}

/// Evaluate a scalar expression as a second-order jet at `(u, v)`.
pub fn eval_expr(
    e: &Expr,
    u: f64,
    v: f64,
    params: &BTreeMap<String, f64>,
) -> Result<Jet2, EvalError> {
    Env {
        u: Jet2::var_u(u),
        v: Jet2::var_v(v),
        params,
    }
    .eval(e)
}

/// Evaluate `r(u, v)` with exact first and second partials.
pub fn eval_surface(ast: &SurfaceAst, u: f64, v: f64) -> Result<Jet2Vec3, EvalError> {
    let env = Env {
        u: Jet2::var_u(u),
        v: Jet2::var_v(v),
        params: &ast.params,
    };
    let [x, y, z] = &ast.components;
    Ok(Jet2Vec3::new(env.eval(x)?, env.eval(y)?, env.eval(z)?))
}
