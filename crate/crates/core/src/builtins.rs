//! Library of named mirror surfaces.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::lang::{parse_expr, parse_surface, Expr, ParseError, SurfaceAst, Var};
use crate::surface::Domain;

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("unknown built-in surface `{0}` (see `builtins`)")]
    Unknown(String),
    #[error("built-in `{surface}` has no parameter `{param}`")]
    UnknownParam { surface: String, param: String },
    #[error("parameter `{param}` must be a number, got `{value}`")]
    NotNumeric { param: String, value: String },
    #[error("in parameter `{param}`: {source}")]
    Parse {
        param: String,
        #[source]
        source: ParseError,
    },
}

#[derive(Clone, Copy, Debug)]
pub enum ParamKind {
    Number,
    /// An expression in the listed variable names.
    Expression(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug)]
pub struct ParamInfo {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: &'static [ParamInfo],
    pub domain: [f64; 4],
    pub note: &'static str,
}

const fn num(name: &'static str, default: &'static str) -> ParamInfo {
    ParamInfo { name, kind: ParamKind::Number, default }
}

const fn expr(name: &'static str, vars: &'static [&'static str], default: &'static str) -> ParamInfo {
    ParamInfo { name, kind: ParamKind::Expression(vars), default }
}

pub const CATALOG: &[BuiltinInfo] = &[
    BuiltinInfo {
        name: "sphere",
        formula: "[R*cos(u)*cos(v), R*cos(u)*sin(v), R*sin(u)]",
        params: &[num("R", "1")],
        domain: [0.2, 1.4, -PI, PI],
        note: "u is latitude; the default patch is the upper cap seen from inside",
    },
    BuiltinInfo {
        name: "ellipsoid",
        formula: "[a*cos(u)*cos(v), b*cos(u)*sin(v), c*sin(u)]",
        params: &[num("a", "1.0"), num("b", "0.8"), num("c", "0.6")],
        domain: [-1.4, 1.4, -PI, PI],
        note: "three-axis ellipsoid; pair with an interior --source",
    },
    BuiltinInfo {
        name: "revolution",
        formula: "[x(u)*cos(v), x(u)*sin(v), z(u)]",
        params: &[expr("x", &["u"], "2 + cos(u)"), expr("z", &["u"], "sin(u)")],
        domain: [3.3, 4.5, -PI, PI],
        note: "profile (x(u), z(u)); unit speed (x')^2 + (z')^2 = 1 is optional, forms are computed in general coordinates",
    },
    BuiltinInfo {
        name: "translation",
        formula: "[x, y, f(x) + h(y)]",
        params: &[expr("f", &["x", "u"], "x^2/2 + x^3/6"), expr("h", &["y", "v"], "y^2/4")],
        domain: [-1.0, 1.0, -1.0, 1.0],
        note: "translation surface over the (x, y) = (u, v) plane",
    },
    BuiltinInfo {
        name: "hyperbolic-paraboloid",
        formula: "[u, v, u^2/2 - v^2/2]",
        params: &[],
        domain: [-2.0, 2.0, -2.0, 2.0],
        note: "under an axial flat front both caustic sheets are parabolas",
    },
    BuiltinInfo {
        name: "elliptic-paraboloid",
        formula: "[u, v, u^2/2 + v^2/2]",
        params: &[],
        domain: [-2.0, 2.0, -2.0, 2.0],
        note: "under an axial flat front both caustic sheets collapse to the focus (0, 0, 1/2)",
    },
    BuiltinInfo {
        name: "cylinder",
        formula: "[gx(s), gy(s), t]",
        params: &[expr("gx", &["s", "u"], "cos(s)"), expr("gy", &["s", "u"], "sin(s)")],
        domain: [-1.2, 1.2, -1.0, 1.0],
        note: "cylinder over a plane curve; K = 0, so under a flat front one sheet lies at infinity",
    },
];

pub fn lookup(name: &str) -> Option<&'static BuiltinInfo> {
    CATALOG.iter().find(|b| b.name == name)
}

/// Build a built-in surface. `overrides` maps parameter names to source
/// text (numbers or expressions, depending on the parameter).
pub fn build(
    name: &str,
    overrides: &BTreeMap<String, String>,
) -> Result<(SurfaceAst, Domain), BuiltinError> {
    let info = lookup(name).ok_or_else(|| BuiltinError::Unknown(name.to_string()))?;
    if let Some(bad) = overrides.keys().find(|k| !info.params.iter().any(|p| p.name == *k)) {
        return Err(BuiltinError::UnknownParam {
            surface: name.to_string(),
            param: bad.clone(),
        });
    }

    let mut numbers = BTreeMap::new();
    let mut exprs: BTreeMap<&str, Expr> = BTreeMap::new();
    for p in info.params {
        let text = overrides.get(p.name).map(String::as_str).unwrap_or(p.default);
        match p.kind {
            ParamKind::Number => {
                let e = parse_expr(text, &[], &BTreeMap::new()).map_err(|source| BuiltinError::Parse {
                    param: p.name.to_string(),
                    source,
                })?;
                let value = crate::lang::eval_expr(&e, 0.0, 0.0, &BTreeMap::new())
                    .ok()
                    .map(|j| j.value)
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| BuiltinError::NotNumeric {
                        param: p.name.to_string(),
                        value: text.to_string(),
                    })?;
                numbers.insert(p.name.to_string(), value);
            }
            ParamKind::Expression(names) => {
                let var = if p.name == "h" { Var::V } else { Var::U };
                let vars: Vec<(&str, Var)> = names.iter().map(|n| (*n, var)).collect();
                let e = parse_expr(text, &vars, &BTreeMap::new()).map_err(|source| BuiltinError::Parse {
                    param: p.name.to_string(),
                    source,
                })?;
                exprs.insert(p.name, e);
            }
        }
    }

    let template = match name {
        "revolution" => "[X*cos(v), X*sin(v), Z]",
        "translation" => "[u, v, F + H]",
        "cylinder" => "[GX, GY, v]",
        _ => info.formula,
    };
    let mut table = numbers.clone();
    for slot in ["X", "Z", "F", "H", "GX", "GY"] {
        table.insert(slot.to_string(), 0.0);
    }
    let mut ast = parse_surface(template, &table).expect("built-in templates parse");
    let slots = [("X", "x"), ("Z", "z"), ("F", "f"), ("H", "h"), ("GX", "gx"), ("GY", "gy")];
    for c in ast.components.iter_mut() {
        for (slot, param) in slots {
            if let Some(e) = exprs.get(param) {
                *c = replace_param(c, slot, e);
            }
        }
    }
    ast.params = numbers;
    let [u0, u1, v0, v1] = info.domain;
    Ok((ast, Domain::new(u0, u1, v0, v1)))
}

fn replace_param(e: &Expr, slot: &str, with: &Expr) -> Expr {
    match e {
        Expr::Param(p) if p == slot => with.clone(),
        Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => e.clone(),
        Expr::Unary(f, a) => Expr::unary(*f, replace_param(a, slot, with)),
        Expr::Binary(op, l, r) => {
            Expr::binary(*op, replace_param(l, slot, with), replace_param(r, slot, with))
        }
    }
}

/// Human-readable listing of the catalog.
pub fn listing() -> String {
    let mut out = String::new();
    for b in CATALOG {
        out.push_str(&format!("{}\n  r(u, v) = {}\n", b.name, b.formula));
        for p in b.params {
            let kind = match p.kind {
                ParamKind::Number => "number".to_string(),
                ParamKind::Expression(vars) => format!("expression in {}", vars.join("|")),
            };
            out.push_str(&format!("  param {} ({}) default {}\n", p.name, kind, p.default));
        }
        let [u0, u1, v0, v1] = b.domain;
        out.push_str(&format!("  domain u in [{u0:.4}, {u1:.4}]; v in [{v0:.4}, {v1:.4}]\n"));
        out.push_str(&format!("  note: {}\n", b.note));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    #[test]
    fn every_builtin_builds_and_evaluates() {
        for b in CATALOG {
            let (ast, dom) = build(b.name, &BTreeMap::new()).unwrap();
            let (u, v) = (0.5 * (dom.u[0] + dom.u[1]), 0.5 * (dom.v[0] + dom.v[1]));
            ast.jet(u, v).unwrap();
            // printed form re-parses to the same tree
            let again = parse_surface(&ast.to_string(), &ast.params).unwrap();
            assert_eq!(again, ast, "{}", b.name);
        }
    }

    #[test]
    fn overrides() {
        let mut o = BTreeMap::new();
        o.insert("R".to_string(), "2".to_string());
        let (s, _) = build("sphere", &o).unwrap();
        assert!((s.position(0.0, 0.0).unwrap().x - 2.0).abs() < 1e-15);

        let mut o = BTreeMap::new();
        o.insert("f".to_string(), "x^2".to_string());
        o.insert("h".to_string(), "-y^2".to_string());
        let (t, _) = build("translation", &o).unwrap();
        assert!((t.position(2.0, 1.0).unwrap().z - 3.0).abs() < 1e-15);

        let mut o = BTreeMap::new();
        o.insert("q".to_string(), "1".to_string());
        assert!(matches!(build("sphere", &o), Err(BuiltinError::UnknownParam { .. })));
        assert!(matches!(build("nope", &BTreeMap::new()), Err(BuiltinError::Unknown(_))));
    }

    #[test]
    fn listing_mentions_constraints() {
        let text = listing();
        assert!(text.contains("sphere"));
        assert!(text.contains("(x')^2 + (z')^2 = 1 is optional"));
        assert!(text.contains("K = 0"));
    }
}
