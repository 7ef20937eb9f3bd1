//! Scenario documents: a chart, bracket data and a list of commands.

use std::collections::BTreeMap;
use std::fmt;

use densalg::geometry::{lb_pencil_from_volume, CoordChange};
use densalg::phasespace::BracketData;
use densalg::{Chart, Parity, Rational, ScalarExpr};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    /// Malformed document.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// A field that parses but is not acceptable.
    Invalid { field: String, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Syntax {
                line,
                column,
                message,
            } => write!(f, "{line}:{column}: {message}"),
            ScenarioError::Invalid { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// A rational given either as a JSON integer or as a string like `"-1/2"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn value(&self, field: &str) -> Result<Rational, ScenarioError> {
        match self {
            Number::Int(n) => Ok(Rational::from_integer((*n).into())),
            Number::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| invalid(field, format!("`{s}` is not a rational number"))),
        }
    }
}

impl From<&Rational> for Number {
    fn from(r: &Rational) -> Self {
        if r.is_integer() {
            if let Ok(n) = r.to_integer().to_string().parse() {
                return Number::Int(n);
            }
        }
        Number::Text(r.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordDoc {
    pub name: String,
    pub parity: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeDoc {
    /// New coordinates as expressions in the old ones.
    pub coordinates: Vec<NamedExpr>,
    /// Old coordinates as expressions in the new ones, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Vec<NamedExpr>>,
    /// Berezinian of the change, checked against the computed one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedExpr {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "run", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandDoc {
    BuildPencil {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        weights: Vec<Number>,
    },
    BracketRoundtrip,
    Jacobi,
    DeltaSquared {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_order: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_zero: Option<bool>,
    },
    Transform,
    Recover {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w0: Option<Number>,
    },
    BvMaster,
    SturmDemo,
    Cocycle {
        connections: Vec<Vec<String>>,
    },
    Decompose {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w0: Option<Number>,
    },
}

impl CommandDoc {
    pub fn name(&self) -> &'static str {
        match self {
            CommandDoc::BuildPencil { .. } => "build-pencil",
            CommandDoc::BracketRoundtrip => "bracket-roundtrip",
            CommandDoc::Jacobi => "jacobi",
            CommandDoc::DeltaSquared { .. } => "delta-squared",
            CommandDoc::Transform => "transform",
            CommandDoc::Recover { .. } => "recover",
            CommandDoc::BvMaster => "bv-master",
            CommandDoc::SturmDemo => "sturm-demo",
            CommandDoc::Cocycle { .. } => "cocycle",
            CommandDoc::Decompose { .. } => "decompose",
        }
    }
}

pub const COMMAND_NAMES: &[&str] = &[
    "build-pencil",
    "bracket-roundtrip",
    "jacobi",
    "delta-squared",
    "transform",
    "recover",
    "bv-master",
    "sturm-demo",
    "cocycle",
    "decompose",
];

/// The document as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub coordinates: Vec<CoordDoc>,
    #[serde(default = "zero")]
    pub lambda: Number,
    pub parity: String,
    #[serde(rename = "S")]
    pub s: Vec<Vec<String>>,
    /// Omitted together with `theta` when the data come from the volume
    /// form `e^A` of the action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change: Option<ChangeDoc>,
    #[serde(default)]
    pub commands: Vec<CommandDoc>,
}

fn zero() -> Number {
    Number::Int(0)
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub data: BracketData,
    pub action: Option<ScalarExpr>,
    pub change: Option<CoordChange>,
    pub commands: Vec<CommandDoc>,
    /// Expression strings of the change, kept for printing.
    change_doc: Option<ChangeDoc>,
}

fn parity_of(field: &str, s: &str) -> Result<Parity, ScenarioError> {
    Parity::parse(s).ok_or_else(|| invalid(field, format!("`{s}` is not a parity (even or odd)")))
}

fn expr(chart: &Chart, field: &str, text: &str) -> Result<ScalarExpr, ScenarioError> {
    chart.parse(text).map_err(|e| invalid(field, e))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Scenario::from_doc(doc)
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
        let coords: Vec<(String, Parity)> = doc
            .coordinates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok((
                    c.name.clone(),
                    parity_of(&format!("coordinates[{i}].parity"), &c.parity)?,
                ))
            })
            .collect::<Result<_, ScenarioError>>()?;
        let chart = Chart::new(&coords).map_err(|e| invalid("coordinates", e))?;
        let n = chart.dim();
        let lambda = doc.lambda.value("lambda")?;
        let eps = parity_of("parity", &doc.parity)?;
        if doc.s.len() != n || doc.s.iter().any(|r| r.len() != n) {
            return Err(invalid("S", format!("expected a {n}x{n} matrix")));
        }
        let mut s = Vec::with_capacity(n);
        for (a, row) in doc.s.iter().enumerate() {
            s.push(
                row.iter()
                    .enumerate()
                    .map(|(b, e)| expr(&chart, &format!("S[{a}][{b}]"), e))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let action = match &doc.action {
            Some(a) => {
                let a = expr(&chart, "action", a)?;
                if !a.is_zero() && a.parity() != Some(Parity::Even) {
                    return Err(invalid("action", "the log-density must be even"));
                }
                Some(a)
            }
            None => None,
        };
        let data = match (&doc.gamma, &action) {
            (Some(g), _) => {
                if g.len() != n {
                    return Err(invalid("gamma", format!("expected {n} entries")));
                }
                let gamma = g
                    .iter()
                    .enumerate()
                    .map(|(a, e)| expr(&chart, &format!("gamma[{a}]"), e))
                    .collect::<Result<Vec<_>, _>>()?;
                let theta = match &doc.theta {
                    Some(t) => expr(&chart, "theta", t)?,
                    None => ScalarExpr::zero(),
                };
                BracketData::new(&chart, s, gamma, theta, lambda, eps)
                    .map_err(|e| invalid("data", e))?
            }
            (None, Some(a)) => {
                if doc.theta.is_some() {
                    return Err(invalid("theta", "give gamma as well, or neither"));
                }
                lb_pencil_from_volume(&chart, &s, a, &lambda, eps)
                    .map_err(|e| invalid("action", e))?
            }
            (None, None) => {
                return Err(invalid(
                    "gamma",
                    "missing, and there is no action to derive it from",
                ))
            }
        };
        let change = match &doc.change {
            Some(ch) => Some(build_change(&chart, ch)?),
            None => None,
        };
        for (i, cmd) in doc.commands.iter().enumerate() {
            validate_command(&data, action.is_some(), change.is_some(), cmd)
                .map_err(|m| invalid(format!("commands[{i}] ({})", cmd.name()), m))?;
        }
        Ok(Scenario {
            name: doc.name.clone().unwrap_or_else(|| "scenario".into()),
            data,
            action,
            change,
            commands: doc.commands,
            change_doc: doc.change,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.data.chart
    }

    /// The scenario printed back, with every expression in normal form.
    pub fn to_doc(&self) -> ScenarioDoc {
        let c = self.chart();
        let d = &self.data;
        ScenarioDoc {
            name: Some(self.name.clone()),
            coordinates: (0..c.dim())
                .map(|a| CoordDoc {
                    name: c.name(a).to_string(),
                    parity: c.parity(a).to_string(),
                })
                .collect(),
            lambda: Number::from(&d.lambda),
            parity: d.parity.to_string(),
            s: d.s
                .iter()
                .map(|r| r.iter().map(|e| c.render(e)).collect())
                .collect(),
            gamma: Some(d.gamma.iter().map(|e| c.render(e)).collect()),
            theta: Some(c.render(&d.theta)),
            action: self.action.as_ref().map(|a| c.render(a)),
            change: self.change_doc.clone(),
            commands: self.commands.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario documents serialize")
    }
}

fn build_change(chart: &Chart, doc: &ChangeDoc) -> Result<CoordChange, ScenarioError> {
    if doc.coordinates.len() != chart.dim() {
        return Err(invalid(
            "change.coordinates",
            format!("expected {} new coordinates", chart.dim()),
        ));
    }
    let names: Vec<&str> = doc.coordinates.iter().map(|c| c.name.as_str()).collect();
    let exprs = doc
        .coordinates
        .iter()
        .enumerate()
        .map(|(i, c)| expr(chart, &format!("change.coordinates[{i}]"), &c.expr))
        .collect::<Result<Vec<_>, _>>()?;
    let ch = CoordChange::new(chart, &names, exprs).map_err(|e| invalid("change", e))?;
    if let Some(inv) = &doc.inverse {
        check_inverse(chart, &ch, inv)?;
    }
    if let Some(j) = &doc.jacobian {
        let j = expr(chart, "change.jacobian", j)?;
        if j != ch.j {
            return Err(invalid(
                "change.jacobian",
                format!("the Berezinian of the change is {}", chart.render(&ch.j)),
            ));
        }
    }
    Ok(ch)
}

/// The supplied inverse composed with the change must be the identity.
fn check_inverse(chart: &Chart, ch: &CoordChange, inv: &[NamedExpr]) -> Result<(), ScenarioError> {
    let new = Chart::new(
        &(0..chart.dim())
            .map(|a| (ch.to.name(a).to_string(), chart.parity(a)))
            .collect::<Vec<_>>(),
    )
    .map_err(|e| invalid("change.inverse", e))?;
    let forward: BTreeMap<String, ScalarExpr> = (0..chart.dim())
        .map(|a| (ch.to.name(a).to_string(), ch.to.coordinate(a)))
        .collect();
    if inv.len() != chart.dim() {
        return Err(invalid(
            "change.inverse",
            format!("expected {} entries", chart.dim()),
        ));
    }
    for (i, e) in inv.iter().enumerate() {
        let field = format!("change.inverse[{i}]");
        let a = chart.index(&e.name).map_err(|err| invalid(&field, err))?;
        let back = new.parse(&e.expr).map_err(|err| invalid(&field, err))?;
        let back = new_to_old(&new, chart, &back, &forward).map_err(|err| invalid(&field, err))?;
        if back != chart.coordinate(a) {
            return Err(invalid(
                field,
                format!(
                    "composing with the change gives {} instead of {}",
                    chart.render(&back),
                    e.name
                ),
            ));
        }
    }
    Ok(())
}

/// Substitute the new coordinates, given in the old ones, into an expression
/// written in the new ones.
fn new_to_old(
    new: &Chart,
    old: &Chart,
    e: &ScalarExpr,
    forward: &BTreeMap<String, ScalarExpr>,
) -> densalg::Result<ScalarExpr> {
    // rename the new variables into the old chart first, then substitute
    let renamed = old.parse(&rename(new, old, e))?;
    let map: BTreeMap<String, ScalarExpr> = (0..old.dim())
        .map(|a| (old.name(a).to_string(), forward[new.name(a)].clone()))
        .collect();
    old.substitute(&renamed, &map)
}

fn rename(new: &Chart, old: &Chart, e: &ScalarExpr) -> String {
    // the printer only emits coordinate names, numbers and operators
    let text = new.render(e);
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if let Ok(a) = new.index(word) {
            out.push_str(old.name(a));
        } else {
            out.push_str(word);
        }
        word.clear();
    };
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' {
            word.push(ch);
        } else {
            flush(&mut word, &mut out);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out);
    out
}

fn validate_command(
    data: &BracketData,
    has_action: bool,
    has_change: bool,
    cmd: &CommandDoc,
) -> Result<(), String> {
    let c = &data.chart;
    match cmd {
        CommandDoc::Jacobi | CommandDoc::DeltaSquared { .. } if data.parity.is_even() => {
            Err("the Jacobi identity cannot hold for an even bracket".into())
        }
        CommandDoc::Recover { .. } | CommandDoc::Decompose { .. } | CommandDoc::BvMaster
            if data.lambda != Rational::from_integer(0.into()) =>
        {
            Err("needs data of weight zero".into())
        }
        CommandDoc::Transform if !has_change => Err("needs a coordinate change".into()),
        CommandDoc::BvMaster if !has_action => Err("needs an action (log-density)".into()),
        CommandDoc::BvMaster if data.parity.is_even() => Err("needs an odd bracket".into()),
        CommandDoc::SturmDemo => {
            if !has_change {
                Err("needs a coordinate change".into())
            } else if c.dim() != 1 || c.parity(0).is_odd() {
                Err("works on a single even coordinate".into())
            } else if data.lambda != Rational::from_integer(2.into()) || data.parity.is_odd() {
                Err("needs even data of weight 2".into())
            } else {
                Ok(())
            }
        }
        CommandDoc::Cocycle { connections } => {
            if connections.len() < 2 {
                return Err("needs at least two connections".into());
            }
            if connections.iter().any(|g| g.len() != c.dim()) {
                return Err(format!("each connection needs {} entries", c.dim()));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
