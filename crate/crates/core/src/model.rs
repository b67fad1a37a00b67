//! `.ode` model files: names of variables and parameters, parameter defaults
//! and `@` options.

use indexmap::IndexMap;
use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("line {line}: malformed declaration near `{token}`")]
    MalformedDeclaration { line: usize, token: String },
    #[error("line {line}: `{name}` is declared twice")]
    DuplicateName { line: usize, name: String },
    #[error("model declares no dynamical variable")]
    EmptyModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariableClass {
    #[serde(rename = "T")]
    Temporal,
    #[serde(rename = "D")]
    Dynamical,
    #[serde(rename = "A")]
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    /// `t` first, then dynamical variables in declaration order, then auxiliaries.
    pub variables: IndexMap<String, VariableClass>,
    pub parameters: IndexMap<String, f64>,
    pub settings: IndexMap<String, String>,
    /// Right-hand sides of dynamical and auxiliary variables, verbatim.
    pub equations: IndexMap<String, String>,
    /// User functions `f(x)=...` and fixed quantities `w=...`, keyed by the
    /// left-hand side as written.
    pub definitions: IndexMap<String, String>,
}

const SKIPPED: &[&str] = &[
    "init", "i", "wiener", "w", "table", "global", "markov", "bdry", "b", "set", "number", "only", "export", "special",
    "volterra",
];

impl Model {
    pub fn dynamical(&self) -> impl Iterator<Item = &str> {
        self.class_names(VariableClass::Dynamical)
    }

    pub fn auxiliary(&self) -> impl Iterator<Item = &str> {
        self.class_names(VariableClass::Auxiliary)
    }

    fn class_names(&self, class: VariableClass) -> impl Iterator<Item = &str> {
        self.variables.iter().filter(move |(_, c)| **c == class).map(|(k, _)| k.as_str())
    }

    pub fn dynamical_count(&self) -> usize {
        self.dynamical().count()
    }

    /// Position of a dynamical variable among the dynamical variables.
    pub fn dynamical_index(&self, name: &str) -> Option<usize> {
        let names: Vec<&str> = self.dynamical().collect();
        lookup(&names, name, "dynamical variable")
    }

    /// Canonical spelling of a variable or parameter name.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        let names: Vec<&str> = self.variables.keys().chain(self.parameters.keys()).map(String::as_str).collect();
        lookup(&names, name, "name").map(|i| names[i])
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        let names: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        lookup(&names, name, "parameter").map(|i| self.parameters[i])
    }

    /// Re-emit the model in the subset grammar accepted by [`parse_model`].
    pub fn to_ode(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.parameters {
            out.push_str(&format!("par {}={}\n", k, v));
        }
        for (k, v) in &self.definitions {
            out.push_str(&format!("{}={}\n", k, v));
        }
        for name in self.dynamical() {
            out.push_str(&format!("{}'={}\n", name, self.equations[name]));
        }
        for name in self.auxiliary() {
            out.push_str(&format!("aux {}={}\n", name, self.equations[name]));
        }
        for (k, v) in &self.settings {
            out.push_str(&format!("@ {}={}\n", k, v));
        }
        out.push_str("done\n");
        out
    }
}

/// Exact match first, then a case-insensitive match with a warning.
pub(crate) fn lookup(names: &[&str], name: &str, what: &str) -> Option<usize> {
    if let Some(i) = names.iter().position(|n| *n == name) {
        return Some(i);
    }
    let i = names.iter().position(|n| n.eq_ignore_ascii_case(name))?;
    warn!("{} `{}` matched `{}` ignoring case", what, name, names[i]);
    Some(i)
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

struct Builder {
    dynamical: Vec<(String, String)>,
    auxiliary: Vec<(String, String)>,
    parameters: IndexMap<String, f64>,
    settings: IndexMap<String, String>,
    definitions: IndexMap<String, String>,
}

impl Builder {
    fn taken(&self, name: &str) -> bool {
        name == "t"
            || self.parameters.contains_key(name)
            || self.dynamical.iter().any(|(n, _)| n == name)
            || self.auxiliary.iter().any(|(n, _)| n == name)
    }

    fn claim(&self, name: &str, line: usize) -> Result<(), ModelError> {
        if !is_ident(name) {
            return Err(ModelError::MalformedDeclaration { line, token: name.to_string() });
        }
        if self.taken(name) {
            return Err(ModelError::DuplicateName { line, name: name.to_string() });
        }
        Ok(())
    }
}

/// Split `a=1, b = 2 c=3` into `(name, value)` pairs.
fn assignments(body: &str) -> Vec<String> {
    let mut glued = String::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            let rest: String = chars.clone().collect();
            let next = rest.trim_start();
            if next.starts_with('=') || glued.ends_with('=') {
                continue;
            }
            glued.push(' ');
        } else {
            glued.push(c);
        }
    }
    glued.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

pub fn parse_model(source: &str) -> Result<Model, ModelError> {
    let mut b = Builder {
        dynamical: Vec::new(),
        auxiliary: Vec::new(),
        parameters: IndexMap::new(),
        settings: IndexMap::new(),
        definitions: IndexMap::new(),
    };
    for (no, raw) in source.lines().enumerate() {
        let line = no + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (head, rest) = match text.find(char::is_whitespace) {
            Some(i) => (&text[..i], text[i..].trim()),
            None => (text, ""),
        };
        let key = head.to_ascii_lowercase();
        if key == "done" {
            break;
        }
        if let Some(opts) = text.strip_prefix('@') {
            for item in assignments(opts) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| ModelError::MalformedDeclaration { line, token: item.clone() })?;
                b.settings.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if text.starts_with('!') {
            warn!("line {}: derived parameter skipped", line);
            continue;
        }
        if matches!(key.as_str(), "par" | "param" | "parameter") && !head.contains('=') {
            for item in assignments(rest) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| ModelError::MalformedDeclaration { line, token: item.clone() })?;
                b.claim(k, line)?;
                let val: f64 =
                    v.parse().map_err(|_| ModelError::MalformedDeclaration { line, token: v.to_string() })?;
                b.parameters.insert(k.to_string(), val);
            }
            continue;
        }
        if key == "aux" && !head.contains('=') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| ModelError::MalformedDeclaration { line, token: rest.to_string() })?;
            let k = k.trim();
            b.claim(k, line)?;
            b.auxiliary.push((k.to_string(), v.trim().to_string()));
            continue;
        }
        let assigns = head.contains('=') || head.contains('\'') || rest.starts_with('=');
        if SKIPPED.contains(&key.as_str()) && !assigns {
            warn!("line {}: `{}` statement skipped", line, head);
            continue;
        }
        let Some((lhs, rhs)) = text.split_once('=') else {
            return Err(ModelError::MalformedDeclaration { line, token: head.to_string() });
        };
        let lhs = lhs.trim();
        let rhs = rhs.trim().to_string();
        if let Some(name) = lhs.strip_suffix('\'') {
            let name = name.trim();
            b.claim(name, line)?;
            b.dynamical.push((name.to_string(), rhs));
        } else if let Some(name) = lhs.strip_prefix('d').and_then(|s| s.strip_suffix("/dt")).filter(|s| is_ident(s)) {
            b.claim(name, line)?;
            b.dynamical.push((name.to_string(), rhs));
        } else if lhs.strip_suffix("(0)").is_some_and(|s| is_ident(s.trim())) {
            warn!("line {}: initial condition `{}` skipped", line, lhs);
        } else if let Some((fname, args)) = lhs.split_once('(') {
            let fname = fname.trim();
            let args = args.strip_suffix(')').unwrap_or("");
            let ok = is_ident(fname) && args.split(',').all(|a| is_ident(a.trim()));
            if !ok {
                return Err(ModelError::MalformedDeclaration { line, token: lhs.to_string() });
            }
            if b.definitions.contains_key(lhs) || b.taken(fname) {
                return Err(ModelError::DuplicateName { line, name: fname.to_string() });
            }
            b.definitions.insert(lhs.to_string(), rhs);
        } else if is_ident(lhs) {
            if b.definitions.contains_key(lhs) || b.taken(lhs) {
                return Err(ModelError::DuplicateName { line, name: lhs.to_string() });
            }
            b.definitions.insert(lhs.to_string(), rhs);
        } else {
            return Err(ModelError::MalformedDeclaration { line, token: lhs.to_string() });
        }
    }
    if b.dynamical.is_empty() {
        return Err(ModelError::EmptyModel);
    }
    let mut variables = IndexMap::new();
    let mut equations = IndexMap::new();
    variables.insert("t".to_string(), VariableClass::Temporal);
    for (k, v) in b.dynamical {
        variables.insert(k.clone(), VariableClass::Dynamical);
        equations.insert(k, v);
    }
    for (k, v) in b.auxiliary {
        variables.insert(k.clone(), VariableClass::Auxiliary);
        equations.insert(k, v);
    }
    Ok(Model { variables, parameters: b.parameters, settings: b.settings, equations, definitions: b.definitions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_model() {
        let m = parse_model("par i0=100\nv'=i0-v\nn'=-n\naux stim=i0\n").unwrap();
        let vars: Vec<_> = m.variables.iter().map(|(k, c)| (k.as_str(), *c)).collect();
        assert_eq!(
            vars,
            vec![
                ("t", VariableClass::Temporal),
                ("v", VariableClass::Dynamical),
                ("n", VariableClass::Dynamical),
                ("stim", VariableClass::Auxiliary),
            ]
        );
        assert_eq!(m.parameters["i0"], 100.0);
        assert_eq!(m.equations["v"], "i0-v");
    }

    #[test]
    fn only_one_ode() {
        let m = parse_model("v'=-v").unwrap();
        assert_eq!(m.variables.len(), 2);
        assert!(m.parameters.is_empty());
    }

    #[test]
    fn aux_before_odes_still_follows_them() {
        let m = parse_model("aux w=2*v\ndv/dt=-v\n").unwrap();
        let names: Vec<_> = m.variables.keys().cloned().collect();
        assert_eq!(names, ["t", "v", "w"]);
    }

    #[test]
    fn multi_declarations_and_spacing() {
        let m = parse_model("par a = 1, b=2 c =3\nparam d=-4.5e-1\nx'=a").unwrap();
        let p: Vec<_> = m.parameters.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        assert_eq!(p, [("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", -0.45)]);
    }

    #[test]
    fn options_comments_and_skips() {
        let src =
            "# header\nx'=y # inline\ny'=-x\ninit x=1\nx(0)=2\nwiener w\n@ total=100, dt=.05 meth=rk4\ndone\nz'=1\n";
        let m = parse_model(src).unwrap();
        assert_eq!(m.dynamical_count(), 2);
        assert_eq!(m.settings["total"], "100");
        assert_eq!(m.settings["dt"], ".05");
        assert_eq!(m.settings["meth"], "rk4");
    }

    #[test]
    fn functions_and_fixed() {
        let m = parse_model("minf(v)=0.5*(1+tanh(v))\nw=2\nv'=minf(v)-w").unwrap();
        assert_eq!(m.definitions["minf(v)"], "0.5*(1+tanh(v))");
        assert_eq!(m.definitions["w"], "2");
    }

    #[test]
    fn errors() {
        assert_eq!(parse_model("par a=1\n").unwrap_err(), ModelError::EmptyModel);
        assert_eq!(
            parse_model("par a=1\nx'=1\npar a=2").unwrap_err(),
            ModelError::DuplicateName { line: 3, name: "a".into() }
        );
        assert_eq!(
            parse_model("x'=1\npar a=oops").unwrap_err(),
            ModelError::MalformedDeclaration { line: 2, token: "oops".into() }
        );
        assert!(matches!(parse_model("x'=1\n3y'=2").unwrap_err(), ModelError::MalformedDeclaration { line: 2, .. }));
        assert!(matches!(parse_model("t'=1").unwrap_err(), ModelError::DuplicateName { .. }));
    }

    #[test]
    fn case_fallback() {
        let m = parse_model("par gK=36\nv'=1").unwrap();
        assert_eq!(m.parameter("gK"), Some(36.0));
        assert_eq!(m.parameter("gk"), Some(36.0));
        assert_eq!(m.parameter("gl"), None);
    }

    #[test]
    fn reemit_roundtrip() {
        let m = parse_model("par a=1,b=2.5\nf(x)=x^2\nv'=f(v)\naux q=a*v\n@ dt=0.1").unwrap();
        assert_eq!(parse_model(&m.to_ode()).unwrap(), m);
    }

    #[test]
    fn hh_fixture() {
        let src = include_str!("../tests/fixtures/hh.ode");
        let m = parse_model(src).unwrap();
        assert_eq!(m.variables.len(), 5);
        assert_eq!(m.dynamical().collect::<Vec<_>>(), ["v", "m", "h", "n"]);
        assert_eq!(m.parameters.len(), 8);
    }
}
