use serde::{Deserialize, Serialize};

use super::{ProbExpr, Var};
use crate::error::{Error, Result};

/// Output formats for expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `Σ_z P(y|x,z) P(z)`; symbol names lowercased as value notation.
    Text,
    Latex,
    /// Nested `{kind, children, vars}` objects; exact symbol names.
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(Error::Formula(format!("unknown format `{other}`"))),
        }
    }
}

pub(super) fn render(e: &ProbExpr, format: Format) -> String {
    match format {
        Format::Text => text(e),
        Format::Latex => latex(e),
        Format::Json => serde_json::to_string_pretty(&to_json(e)).expect("json nodes serialize"),
    }
}

fn text_var(v: &Var) -> String {
    format!("{}{}", v.name.to_lowercase(), "'".repeat(v.copy as usize))
}

fn text_vars(vs: &[Var]) -> String {
    vs.iter().map(text_var).collect::<Vec<_>>().join(",")
}

fn text(e: &ProbExpr) -> String {
    match e {
        ProbExpr::One => "1".into(),
        ProbExpr::Prob { target, given } if given.is_empty() => format!("P({})", text_vars(target)),
        ProbExpr::Prob { target, given } => format!("P({}|{})", text_vars(target), text_vars(given)),
        ProbExpr::Product(fs) => {
            let n = fs.len();
            fs.iter()
                .enumerate()
                .map(|(i, f)| match f {
                    ProbExpr::Sum { .. } if i + 1 < n => format!("({})", text(f)),
                    ProbExpr::Product(_) => format!("({})", text(f)),
                    _ => text(f),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        ProbExpr::Sum { over, body } => {
            let vs = text_vars(over);
            let sub = if vs.chars().count() == 1 { vs } else { format!("{{{vs}}}") };
            format!("Σ_{sub} {}", text(body))
        }
        ProbExpr::Fraction { num, den } => format!("[{}] / [{}]", text(num), text(den)),
    }
}

fn latex_var(v: &Var) -> String {
    let lower = v.name.to_lowercase();
    let split = lower.trim_end_matches(|c: char| c.is_ascii_digit());
    let base: String = split
        .chars()
        .flat_map(|c| match c {
            '_' | '&' | '%' | '$' | '#' | '{' | '}' => vec!['\\', c],
            c => vec![c],
        })
        .collect();
    let digits = &lower[split.len()..];
    let mut s = if digits.is_empty() || split.is_empty() {
        if split.is_empty() {
            lower.clone()
        } else {
            base
        }
    } else {
        format!("{base}_{{{digits}}}")
    };
    if v.copy > 0 {
        s.push_str(&format!("^{{{}}}", "\\prime".repeat(v.copy as usize)));
    }
    s
}

fn latex_vars(vs: &[Var]) -> String {
    vs.iter().map(latex_var).collect::<Vec<_>>().join(", ")
}

fn latex(e: &ProbExpr) -> String {
    match e {
        ProbExpr::One => "1".into(),
        ProbExpr::Prob { target, given } if given.is_empty() => format!("P({})", latex_vars(target)),
        ProbExpr::Prob { target, given } => {
            format!("P({} \\mid {})", latex_vars(target), latex_vars(given))
        }
        ProbExpr::Product(fs) => {
            let n = fs.len();
            fs.iter()
                .enumerate()
                .map(|(i, f)| match f {
                    ProbExpr::Sum { .. } if i + 1 < n => format!("\\left({}\\right)", latex(f)),
                    _ => latex(f),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        ProbExpr::Sum { over, body } => format!("\\sum_{{{}}} {}", latex_vars(over), latex(body)),
        ProbExpr::Fraction { num, den } => format!("\\frac{{{}}}{{{}}}", latex(num), latex(den)),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<JsonNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    given: Vec<String>,
}

fn node(e: &ProbExpr) -> JsonNode {
    let names = |vs: &[Var]| vs.iter().map(Var::to_string).collect();
    let mk = |kind: &str, children, vars, given| JsonNode { kind: kind.into(), children, vars, given };
    match e {
        ProbExpr::One => mk("one", vec![], vec![], vec![]),
        ProbExpr::Prob { target, given } => mk("prob", vec![], names(target), names(given)),
        ProbExpr::Product(fs) => mk("product", fs.iter().map(node).collect(), vec![], vec![]),
        ProbExpr::Sum { over, body } => mk("sum", vec![node(body)], names(over), vec![]),
        ProbExpr::Fraction { num, den } => mk("fraction", vec![node(num), node(den)], vec![], vec![]),
    }
}

pub fn to_json(e: &ProbExpr) -> serde_json::Value {
    serde_json::to_value(node(e)).expect("json nodes serialize")
}

fn parse_node(n: JsonNode) -> Result<ProbExpr> {
    let vars = |vs: Vec<String>| vs.iter().map(|s| Var::parse(s)).collect::<Vec<_>>();
    let arity = |n: &JsonNode, k: usize| {
        if n.children.len() == k {
            Ok(())
        } else {
            Err(Error::Formula(format!("`{}` node needs {k} children", n.kind)))
        }
    };
    match n.kind.as_str() {
        "one" => Ok(ProbExpr::One),
        "prob" => {
            if n.vars.is_empty() {
                return Err(Error::Formula("`prob` node needs vars".into()));
            }
            Ok(ProbExpr::Prob { target: vars(n.vars), given: vars(n.given) })
        }
        "product" => Ok(ProbExpr::Product(n.children.into_iter().map(parse_node).collect::<Result<_>>()?)),
        "sum" => {
            arity(&n, 1)?;
            let body = parse_node(n.children.into_iter().next().expect("arity checked"))?;
            Ok(ProbExpr::Sum { over: vars(n.vars), body: Box::new(body) })
        }
        "fraction" => {
            arity(&n, 2)?;
            let mut it = n.children.into_iter();
            let num = parse_node(it.next().expect("arity checked"))?;
            let den = parse_node(it.next().expect("arity checked"))?;
            Ok(ProbExpr::fraction(num, den))
        }
        other => Err(Error::Formula(format!("unknown node kind `{other}`"))),
    }
}

pub fn from_json(s: &str) -> Result<ProbExpr> {
    let n: JsonNode = serde_json::from_str(s).map_err(|e| Error::Formula(e.to_string()))?;
    parse_node(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backdoor() -> ProbExpr {
        ProbExpr::sum(
            vec![Var::new("Z")],
            ProbExpr::product(vec![ProbExpr::prob(["Y"], ["X", "Z"]), ProbExpr::prob(["Z"], [] as [&str; 0])]),
        )
    }

    #[test]
    fn text_rendering() {
        assert_eq!(backdoor().render(Format::Text), "Σ_z P(y|x,z) P(z)");
        assert_eq!(ProbExpr::One.render(Format::Text), "1");
        let e = ProbExpr::sum(vec![Var::new("Z1"), Var::new("Z2")], ProbExpr::prob(["Z1", "Z2"], [] as [&str; 0]));
        assert_eq!(e.render(Format::Text), "Σ_{z1,z2} P(z1,z2)");
    }

    #[test]
    fn latex_rendering() {
        let e = ProbExpr::prob_vars(vec![Var::new("Y2")], vec![Var::primed("X1", 1)]);
        assert_eq!(e.render(Format::Latex), "P(y_{2} \\mid x_{1}^{\\prime})");
        assert_eq!(backdoor().render(Format::Latex), "\\sum_{z} P(y \\mid x, z) P(z)");
    }

    #[test]
    fn json_round_trip() {
        let e = ProbExpr::fraction(backdoor(), ProbExpr::prob_vars(vec![Var::primed("A b", 2)], vec![]));
        let s = e.render(Format::Json);
        assert_eq!(from_json(&s).unwrap(), e);
        assert!(from_json(r#"{"kind":"sum","vars":["x"]}"#).is_err());
        assert!(from_json(r#"{"kind":"bogus"}"#).is_err());
    }

    #[test]
    fn json_schema_shape() {
        let v = to_json(&ProbExpr::prob(["Y"], ["X"]));
        assert_eq!(v, serde_json::json!({"kind": "prob", "vars": ["Y"], "given": ["X"]}));
    }
}
