use std::fmt::Write;

use serde::Serialize;

use crate::scenario::ScenarioDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub outcome: Outcome,
    /// One line on what was checked, or the error.
    pub message: String,
    pub values: Vec<Entry>,
    /// Nonzero residuals behind a failure.
    pub residuals: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

impl CommandReport {
    pub fn new(command: &str) -> Self {
        CommandReport {
            command: command.to_string(),
            outcome: Outcome::Pass,
            message: String::new(),
            values: Vec::new(),
            residuals: Vec::new(),
            millis: None,
        }
    }

    pub fn value(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.values.push(Entry {
            name: name.into(),
            value: value.into(),
        });
    }

    pub fn residual(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.residuals.push(Entry {
            name: name.into(),
            value: value.into(),
        });
    }

    pub fn error(command: &str, message: impl Into<String>) -> Self {
        CommandReport {
            outcome: Outcome::Error,
            message: message.into(),
            ..CommandReport::new(command)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub fixture: ScenarioDoc,
    pub commands: Vec<CommandReport>,
    pub passed: bool,
}

impl Report {
    pub fn count(&self, o: Outcome) -> usize {
        self.commands.iter().filter(|c| c.outcome == o).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f = &self.fixture;
        let coords: Vec<String> = f
            .coordinates
            .iter()
            .map(|c| format!("{} ({})", c.name, c.parity))
            .collect();
        let lambda = match &f.lambda {
            crate::scenario::Number::Int(n) => n.to_string(),
            crate::scenario::Number::Text(s) => s.clone(),
        };
        let _ = writeln!(
            out,
            "scenario {}: {}; lambda {}; {} bracket",
            self.scenario,
            coords.join(", "),
            lambda,
            f.parity
        );
        let _ = writeln!(out, "  S = {:?}", f.s);
        if let Some(g) = &f.gamma {
            let _ = writeln!(out, "  gamma = {g:?}");
        }
        if let Some(t) = &f.theta {
            let _ = writeln!(out, "  theta = {t}");
        }
        if let Some(a) = &f.action {
            let _ = writeln!(out, "  A = {a}");
        }
        for c in &self.commands {
            let time = c
                .millis
                .map(|m| format!(" ({m:.1} ms)"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{} {}{}: {}",
                c.outcome.label(),
                c.command,
                time,
                c.message
            );
            for e in &c.values {
                let _ = writeln!(out, "    {} = {}", e.name, e.value);
            }
            for e in &c.residuals {
                let _ = writeln!(out, "    residual {} = {}", e.name, e.value);
            }
        }
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} errors",
            self.count(Outcome::Pass),
            self.count(Outcome::Fail),
            self.count(Outcome::Error)
        );
        out
    }
}
