use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::premeasure::MeasurementBasis;
use crate::qstate::{AxisSpec, RegisterKind};

/// Named single-qubit generators usable in `unitary` statements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    XFlip,
    ZPhase,
    /// `exp(-i angle/2 n.sigma)` about `axis`.
    Rot {
        axis: AxisSpec,
        angle: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Reg {
        name: String,
        dim: usize,
        kind: RegisterKind,
    },
    Init {
        indices: Vec<usize>,
    },
    Singlet {
        u: String,
        v: String,
    },
    Unitary {
        target: String,
        generator: Generator,
    },
    Premeasure {
        system: String,
        basis: MeasurementBasis,
        pointer: String,
    },
    Observer {
        name: String,
        seed: u64,
    },
    Perceive {
        observer: String,
        register: String,
        label: String,
    },
    Ask {
        observer: String,
        register: String,
        label: String,
    },
    ExpectEqual(String, String),
    ExpectOpposite(String, String),
    Tally(Vec<String>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioProgram {
    pub statements: Vec<Statement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownKeyword,
    Arity {
        expected: String,
    },
    Undeclared,
    Duplicate,
    /// Statement out of order, e.g. dynamics before the initial state.
    Misplaced(&'static str),
    InvalidValue(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownKeyword => f.write_str("unknown keyword"),
            ParseErrorKind::Arity { expected } => {
                write!(f, "wrong arguments, expected `{expected}`")
            }
            ParseErrorKind::Undeclared => f.write_str("undeclared identifier"),
            ParseErrorKind::Duplicate => f.write_str("duplicate declaration"),
            ParseErrorKind::Misplaced(why) => f.write_str(why),
            ParseErrorKind::InvalidValue(why) => write!(f, "invalid value: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind} at `{token}`")]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    pub token: String,
    pub kind: ParseErrorKind,
}

const SYNTAX: &[(&str, &str)] = &[
    ("reg", "reg NAME DIM system|apparatus|brain"),
    ("init", "init INDEX..."),
    ("singlet", "singlet U V"),
    ("unitary", "unitary REG x-flip|z-phase|rot THETA PHI ANGLE"),
    (
        "premeasure",
        "premeasure SYS axis THETA PHI into PTR | premeasure SYS basis into PTR",
    ),
    ("observer", "observer NAME SEED"),
    ("perceive", "perceive OBSERVER REG as LABEL"),
    ("ask", "ask OBSERVER REG as LABEL"),
    ("expect-equal", "expect-equal LABEL LABEL"),
    ("expect-opposite", "expect-opposite LABEL LABEL"),
    ("tally", "tally LABEL..."),
];

fn syntax(keyword: &str) -> String {
    SYNTAX
        .iter()
        .find(|(k, _)| *k == keyword)
        .map_or_else(String::new, |(_, s)| s.to_string())
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Checker {
    registers: HashMap<String, (usize, RegisterKind)>,
    /// declaration order, for positional `init` indices
    register_order: Vec<String>,
    observers: Vec<String>,
    labels: Vec<String>,
    initialized: bool,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, token: &str, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.number,
            token: token.to_string(),
            kind,
        }
    }

    fn arity(&self, n: usize) -> Result<(), ParseError> {
        if self.tokens.len() == n {
            Ok(())
        } else {
            Err(self.err(
                self.tokens[0],
                ParseErrorKind::Arity {
                    expected: syntax(self.tokens[0]),
                },
            ))
        }
    }

    fn literal(&self, at: usize, word: &str) -> Result<(), ParseError> {
        if self.tokens[at] == word {
            Ok(())
        } else {
            Err(self.err(
                self.tokens[at],
                ParseErrorKind::Arity {
                    expected: syntax(self.tokens[0]),
                },
            ))
        }
    }

    fn number<T: std::str::FromStr>(&self, at: usize, what: &str) -> Result<T, ParseError> {
        self.tokens[at].parse().map_err(|_| {
            self.err(
                self.tokens[at],
                ParseErrorKind::InvalidValue(format!("expected {what}")),
            )
        })
    }

    fn angle(&self, at: usize) -> Result<f64, ParseError> {
        let v: f64 = self.number(at, "an angle in radians")?;
        if !v.is_finite() {
            return Err(self.err(
                self.tokens[at],
                ParseErrorKind::InvalidValue("angle must be finite".into()),
            ));
        }
        Ok(v)
    }

    fn axis(&self, at: usize) -> Result<AxisSpec, ParseError> {
        let theta = self.angle(at)?;
        let phi = self.angle(at + 1)?;
        AxisSpec::new(theta, phi)
            .map_err(|e| self.err(self.tokens[at], ParseErrorKind::InvalidValue(e.to_string())))
    }

    fn identifier(&self, at: usize) -> Result<String, ParseError> {
        let t = self.tokens[at];
        if is_identifier(t) {
            Ok(t.to_string())
        } else {
            Err(self.err(t, ParseErrorKind::InvalidValue("not an identifier".into())))
        }
    }
}

impl Checker {
    fn register(
        &self,
        line: &Line,
        at: usize,
    ) -> Result<(String, usize, RegisterKind), ParseError> {
        let name = line.tokens[at];
        self.registers
            .get(name)
            .map(|&(dim, kind)| (name.to_string(), dim, kind))
            .ok_or_else(|| line.err(name, ParseErrorKind::Undeclared))
    }

    fn observer(&self, line: &Line, at: usize) -> Result<String, ParseError> {
        let name = line.tokens[at];
        if self.observers.iter().any(|o| o == name) {
            Ok(name.to_string())
        } else {
            Err(line.err(name, ParseErrorKind::Undeclared))
        }
    }

    fn label(&self, line: &Line, at: usize) -> Result<String, ParseError> {
        let name = line.tokens[at];
        if self.labels.iter().any(|l| l == name) {
            Ok(name.to_string())
        } else {
            Err(line.err(name, ParseErrorKind::Undeclared))
        }
    }

    fn new_label(&mut self, line: &Line, at: usize) -> Result<String, ParseError> {
        let label = line.identifier(at)?;
        if self.labels.contains(&label) {
            return Err(line.err(&label, ParseErrorKind::Duplicate));
        }
        self.labels.push(label.clone());
        Ok(label)
    }

    fn dynamics(&self, line: &Line) -> Result<(), ParseError> {
        if self.initialized {
            Ok(())
        } else {
            Err(line.err(
                line.tokens[0],
                ParseErrorKind::Misplaced("state used before `init` or `singlet`"),
            ))
        }
    }

    fn statement(&mut self, line: &Line) -> Result<Statement, ParseError> {
        let t = &line.tokens;
        let st = match t[0] {
            "reg" => {
                line.arity(4)?;
                if self.initialized {
                    return Err(line.err(
                        t[0],
                        ParseErrorKind::Misplaced("registers must precede the initial state"),
                    ));
                }
                let name = line.identifier(1)?;
                if self.registers.contains_key(&name) {
                    return Err(line.err(&name, ParseErrorKind::Duplicate));
                }
                let dim: usize = line.number(2, "a dimension")?;
                if dim < 2 {
                    return Err(line.err(
                        t[2],
                        ParseErrorKind::InvalidValue("dimension must be at least 2".into()),
                    ));
                }
                let kind: RegisterKind = t[3]
                    .parse()
                    .map_err(|e| line.err(t[3], ParseErrorKind::InvalidValue(e)))?;
                self.registers.insert(name.clone(), (dim, kind));
                self.register_order.push(name.clone());
                Statement::Reg { name, dim, kind }
            }
            "init" => {
                if self.initialized {
                    return Err(line.err(t[0], ParseErrorKind::Duplicate));
                }
                line.arity(self.register_order.len() + 1)?;
                let mut indices = Vec::new();
                for (k, name) in self.register_order.iter().enumerate() {
                    let i: usize = line.number(k + 1, "a basis index")?;
                    if i >= self.registers[name].0 {
                        return Err(line.err(
                            t[k + 1],
                            ParseErrorKind::InvalidValue(format!(
                                "index out of range for `{name}`"
                            )),
                        ));
                    }
                    indices.push(i);
                }
                self.initialized = true;
                Statement::Init { indices }
            }
            "singlet" => {
                line.arity(3)?;
                if self.initialized {
                    return Err(line.err(t[0], ParseErrorKind::Duplicate));
                }
                let (u, du, _) = self.register(line, 1)?;
                let (v, dv, _) = self.register(line, 2)?;
                if u == v {
                    return Err(line.err(
                        t[2],
                        ParseErrorKind::InvalidValue("singlet needs two distinct registers".into()),
                    ));
                }
                for (tok, d) in [(t[1], du), (t[2], dv)] {
                    if d != 2 {
                        return Err(line.err(
                            tok,
                            ParseErrorKind::InvalidValue("singlet registers must be qubits".into()),
                        ));
                    }
                }
                self.initialized = true;
                Statement::Singlet { u, v }
            }
            "unitary" => {
                if t.len() < 3 {
                    line.arity(3)?;
                }
                self.dynamics(line)?;
                let (target, dim, _) = self.register(line, 1)?;
                if dim != 2 {
                    return Err(line.err(
                        t[1],
                        ParseErrorKind::InvalidValue("generators act on qubits".into()),
                    ));
                }
                let generator = match t[2] {
                    "x-flip" => {
                        line.arity(3)?;
                        Generator::XFlip
                    }
                    "z-phase" => {
                        line.arity(3)?;
                        Generator::ZPhase
                    }
                    "rot" => {
                        line.arity(6)?;
                        Generator::Rot {
                            axis: line.axis(3)?,
                            angle: line.angle(5)?,
                        }
                    }
                    other => {
                        return Err(line.err(
                            other,
                            ParseErrorKind::InvalidValue("unknown generator".into()),
                        ))
                    }
                };
                Statement::Unitary { target, generator }
            }
            "premeasure" => {
                if t.len() < 3 {
                    line.arity(7)?;
                }
                self.dynamics(line)?;
                let (system, sdim, _) = self.register(line, 1)?;
                let (basis, ptr_at) = match t[2] {
                    "axis" => {
                        line.arity(7)?;
                        line.literal(5, "into")?;
                        if sdim != 2 {
                            return Err(line.err(
                                t[1],
                                ParseErrorKind::InvalidValue(
                                    "axis premeasurement needs a qubit".into(),
                                ),
                            ));
                        }
                        (MeasurementBasis::Axis(line.axis(3)?), 6)
                    }
                    "basis" => {
                        line.arity(5)?;
                        line.literal(3, "into")?;
                        (MeasurementBasis::Computational, 4)
                    }
                    other => {
                        return Err(line.err(
                            other,
                            ParseErrorKind::Arity {
                                expected: syntax("premeasure"),
                            },
                        ))
                    }
                };
                let (pointer, pdim, _) = self.register(line, ptr_at)?;
                if pointer == system {
                    return Err(line.err(
                        t[ptr_at],
                        ParseErrorKind::InvalidValue("pointer must differ from the system".into()),
                    ));
                }
                if pdim < sdim {
                    return Err(line.err(
                        t[ptr_at],
                        ParseErrorKind::InvalidValue(
                            "pointer dimension below system dimension".into(),
                        ),
                    ));
                }
                Statement::Premeasure {
                    system,
                    basis,
                    pointer,
                }
            }
            "observer" => {
                line.arity(3)?;
                let name = line.identifier(1)?;
                if self.observers.contains(&name) {
                    return Err(line.err(&name, ParseErrorKind::Duplicate));
                }
                let seed: u64 = line.number(2, "an unsigned seed")?;
                self.observers.push(name.clone());
                Statement::Observer { name, seed }
            }
            kw @ ("perceive" | "ask") => {
                line.arity(5)?;
                let observer = self.observer(line, 1)?;
                let (register, _, kind) = self.register(line, 2)?;
                line.literal(3, "as")?;
                self.dynamics(line)?;
                if kw == "ask" && kind != RegisterKind::Brain {
                    return Err(line.err(
                        t[2],
                        ParseErrorKind::InvalidValue("`ask` targets a brain register".into()),
                    ));
                }
                let label = self.new_label(line, 4)?;
                if kw == "ask" {
                    Statement::Ask {
                        observer,
                        register,
                        label,
                    }
                } else {
                    Statement::Perceive {
                        observer,
                        register,
                        label,
                    }
                }
            }
            kw @ ("expect-equal" | "expect-opposite") => {
                line.arity(3)?;
                let l = self.label(line, 1)?;
                let r = self.label(line, 2)?;
                if kw == "expect-equal" {
                    Statement::ExpectEqual(l, r)
                } else {
                    Statement::ExpectOpposite(l, r)
                }
            }
            "tally" => {
                if t.len() < 2 {
                    line.arity(2)?;
                }
                let labels = (1..t.len())
                    .map(|i| self.label(line, i))
                    .collect::<Result<Vec<_>, _>>()?;
                for (i, l) in labels.iter().enumerate() {
                    if labels[..i].contains(l) {
                        return Err(line.err(l, ParseErrorKind::Duplicate));
                    }
                }
                Statement::Tally(labels)
            }
            other => return Err(line.err(other, ParseErrorKind::UnknownKeyword)),
        };
        Ok(st)
    }
}

impl Checker {
    fn new() -> Self {
        Checker {
            registers: HashMap::new(),
            observers: Vec::new(),
            labels: Vec::new(),
            initialized: false,
            register_order: Vec::new(),
        }
    }
}

/// Parse a scenario script. `#` starts a comment; tokens are whitespace separated.
pub fn parse_scenario(text: &str) -> Result<ScenarioProgram, ParseError> {
    let mut checker = Checker::new();
    let mut statements = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let content = raw.trim_end_matches('\r');
        let content = content.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let line = Line {
            number: i + 1,
            tokens,
        };
        statements.push(checker.statement(&line)?);
    }
    Ok(ScenarioProgram { statements })
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::XFlip => f.write_str("x-flip"),
            Generator::ZPhase => f.write_str("z-phase"),
            Generator::Rot { axis, angle } => {
                write!(f, "rot {:?} {:?} {:?}", axis.theta(), axis.phi(), angle)
            }
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Reg { name, dim, kind } => write!(f, "reg {name} {dim} {kind}"),
            Statement::Init { indices } => {
                f.write_str("init")?;
                for i in indices {
                    write!(f, " {i}")?;
                }
                Ok(())
            }
            Statement::Singlet { u, v } => write!(f, "singlet {u} {v}"),
            Statement::Unitary { target, generator } => write!(f, "unitary {target} {generator}"),
            Statement::Premeasure {
                system,
                basis,
                pointer,
            } => match basis {
                MeasurementBasis::Axis(a) => {
                    write!(
                        f,
                        "premeasure {system} axis {:?} {:?} into {pointer}",
                        a.theta(),
                        a.phi()
                    )
                }
                MeasurementBasis::Computational => {
                    write!(f, "premeasure {system} basis into {pointer}")
                }
            },
            Statement::Observer { name, seed } => write!(f, "observer {name} {seed}"),
            Statement::Perceive {
                observer,
                register,
                label,
            } => write!(f, "perceive {observer} {register} as {label}"),
            Statement::Ask {
                observer,
                register,
                label,
            } => write!(f, "ask {observer} {register} as {label}"),
            Statement::ExpectEqual(l, r) => write!(f, "expect-equal {l} {r}"),
            Statement::ExpectOpposite(l, r) => write!(f, "expect-opposite {l} {r}"),
            Statement::Tally(labels) => write!(f, "tally {}", labels.join(" ")),
        }
    }
}

impl fmt::Display for ScenarioProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for st in &self.statements {
            writeln!(f, "{st}")?;
        }
        Ok(())
    }
}
