use std::panic::AssertUnwindSafe;
use std::thread;
use std::time::Instant;

use densalg::brackets::{
    bracket_from_operator, canonical_pencil, check_jacobi_equations, classify_delta_squared,
    generated_bracket, long_bracket_eval, master_square, residuals_as_master_square,
};
use densalg::geometry::{
    bv_cocycle, decompose_operator, lie_derivative, recover_pencil, sturm_liouville_demo,
    transform_bracket_data, transform_operator, ConnectionOnVol,
};
use densalg::operators::DiffOp;
use densalg::phasespace::BracketData;
use densalg::probes::monomial_family;
use densalg::{q, Rational, ScalarExpr};

use crate::report::{CommandReport, Outcome, Report};
use crate::scenario::{CommandDoc, Number, Scenario};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall-clock time per command.
    pub timing: bool,
    /// Run commands on one thread each.
    pub parallel: bool,
}

pub fn run_scenario(sc: &Scenario) -> Report {
    run_with(
        sc,
        RunOptions {
            timing: true,
            parallel: true,
        },
        None,
    )
}

/// Run the scenario's commands, or only those named `only`. Reports come back
/// in document order.
pub fn run_with(sc: &Scenario, opts: RunOptions, only: Option<&[String]>) -> Report {
    let cmds: Vec<&CommandDoc> = sc
        .commands
        .iter()
        .filter(|c| only.is_none_or(|names| names.iter().any(|n| n == c.name())))
        .collect();
    let timed = |cmd: &CommandDoc| {
        let start = Instant::now();
        let mut rep = std::panic::catch_unwind(AssertUnwindSafe(|| run_command(sc, cmd)))
            .unwrap_or_else(|_| CommandReport::error(cmd.name(), "internal error"));
        if opts.timing {
            rep.millis = Some((start.elapsed().as_secs_f64() * 1e4).round() / 10.0);
        }
        rep
    };
    let commands: Vec<CommandReport> = if opts.parallel {
        thread::scope(|s| {
            let handles: Vec<_> = cmds.iter().map(|c| s.spawn(|| timed(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("command threads catch panics"))
                .collect()
        })
    } else {
        cmds.iter().map(|c| timed(c)).collect()
    };
    let passed = commands.iter().all(|c| c.outcome == Outcome::Pass);
    Report {
        scenario: sc.name.clone(),
        fixture: sc.to_doc(),
        commands,
        passed,
    }
}

fn number(n: &Option<Number>, default: Rational) -> Result<Rational, String> {
    match n {
        None => Ok(default),
        Some(Number::Int(k)) => Ok(Rational::from_integer((*k).into())),
        Some(Number::Text(s)) => s
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a rational number")),
    }
}

fn run_command(sc: &Scenario, cmd: &CommandDoc) -> CommandReport {
    let name = cmd.name();
    let mut rep = CommandReport::new(name);
    let res = match cmd {
        CommandDoc::BuildPencil { weights } => build_pencil(sc, weights, &mut rep),
        CommandDoc::BracketRoundtrip => bracket_roundtrip(sc, &mut rep),
        CommandDoc::Jacobi => jacobi(sc, &mut rep),
        CommandDoc::DeltaSquared {
            expect_order,
            expect_zero,
        } => delta_squared(sc, *expect_order, *expect_zero, &mut rep),
        CommandDoc::Transform => transform(sc, &mut rep),
        CommandDoc::Recover { w0 } => recover(sc, w0, &mut rep),
        CommandDoc::BvMaster => bv_master(sc, &mut rep),
        CommandDoc::SturmDemo => sturm(sc, &mut rep),
        CommandDoc::Cocycle { connections } => cocycle(sc, connections, &mut rep),
        CommandDoc::Decompose { w0 } => decompose(sc, w0, &mut rep),
    };
    match res {
        Ok(()) => rep,
        Err(e) => CommandReport::error(name, e),
    }
}

type Step = Result<(), String>;

fn err(e: densalg::Error) -> String {
    e.to_string()
}

fn verdict(rep: &mut CommandReport, ok: bool, pass: &str, fail: &str) {
    if ok {
        rep.message = pass.to_string();
    } else {
        rep.outcome = Outcome::Fail;
        rep.message = fail.to_string();
    }
}

fn build_pencil(sc: &Scenario, weights: &[Number], rep: &mut CommandReport) -> Step {
    let d = &sc.data;
    let c = sc.chart();
    let p = canonical_pencil(d);
    rep.value("Delta", p.render());
    let ws: Vec<Rational> = if weights.is_empty() {
        vec![q(0, 1), q(1, 2), q(1, 1)]
    } else {
        weights
            .iter()
            .map(|w| number(&Some(w.clone()), Rational::from_integer(0.into())))
            .collect::<Result<_, _>>()?
    };
    let mut bad_adjoint = None;
    for w in &ws {
        let op = p.specialize(w);
        rep.value(format!("Delta_{w}"), op.render());
        let dual = p.specialize(&(Rational::from_integer(1.into()) - &d.lambda - w));
        if op.adjoint() != dual && bad_adjoint.is_none() {
            bad_adjoint = Some((w.clone(), op.adjoint().sub(&dual)));
        }
    }
    if let Some((w, diff)) = bad_adjoint {
        rep.residual(format!("adjoint at w = {w}"), diff.render());
    }
    let probes = monomial_family(c, 1, &ws);
    'outer: for a in &probes {
        for b in &probes {
            let lhs = generated_bracket(&p, a, b).map_err(err)?;
            let rhs = long_bracket_eval(d, a, b);
            if lhs != rhs {
                rep.residual(
                    format!("generated - long on ({}, {})", a.render(c), b.render(c)),
                    lhs.sub(&rhs).render(c),
                );
                break 'outer;
            }
        }
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        &format!(
            "self-adjoint pencil generating the bracket on {} probes",
            probes.len()
        ),
        "the pencil does not generate the bracket",
    );
    Ok(())
}

fn data_diff(a: &BracketData, b: &BracketData, rep: &mut CommandReport) {
    let c = &a.chart;
    let n = c.dim();
    for i in 0..n {
        for j in 0..n {
            let e = &a.s[i][j] - &b.s[i][j];
            if !e.is_zero() {
                rep.residual(format!("S[{i}][{j}]"), c.render(&e));
            }
        }
        let e = &a.gamma[i] - &b.gamma[i];
        if !e.is_zero() {
            rep.residual(format!("gamma[{i}]"), c.render(&e));
        }
    }
    let e = &a.theta - &b.theta;
    if !e.is_zero() {
        rep.residual("theta", c.render(&e));
    }
    if a.lambda != b.lambda {
        rep.residual("lambda", format!("{} vs {}", a.lambda, b.lambda));
    }
    if a.parity != b.parity {
        rep.residual("parity", format!("{} vs {}", a.parity, b.parity));
    }
}

fn bracket_roundtrip(sc: &Scenario, rep: &mut CommandReport) -> Step {
    let back = bracket_from_operator(&canonical_pencil(&sc.data)).map_err(err)?;
    data_diff(&back, &sc.data, rep);
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "the bracket read off the pencil is the input",
        "the bracket read off the pencil differs",
    );
    Ok(())
}

fn jacobi(sc: &Scenario, rep: &mut CommandReport) -> Step {
    let d = &sc.data;
    let c = sc.chart();
    let res = check_jacobi_equations(d).map_err(err)?;
    if residuals_as_master_square(d, &res) != master_square(d) {
        return Err("the residuals do not assemble to the master square".into());
    }
    for (i, r) in res.residuals.iter().enumerate() {
        let text = r.render(c);
        rep.value(format!("R{i}"), text.clone());
        if !r.is_zero() {
            rep.residual(format!("R{i}"), text);
        }
    }
    verdict(
        rep,
        res.all_zero(),
        "all four Jacobi equations hold",
        "the Jacobi identity fails",
    );
    Ok(())
}

fn delta_squared(
    sc: &Scenario,
    expect_order: Option<u32>,
    expect_zero: Option<bool>,
    rep: &mut CommandReport,
) -> Step {
    let d = &sc.data;
    let c = sc.chart();
    let r = classify_delta_squared(&canonical_pencil(d)).map_err(err)?;
    let jac = check_jacobi_equations(d).map_err(err)?.all_zero();
    rep.value(
        "Delta^2",
        if r.is_master() {
            "0".to_string()
        } else {
            r.square.render()
        },
    );
    rep.value(
        "order",
        r.order
            .map_or("none (vanishes)".to_string(), |o| o.to_string()),
    );
    if let Some(m) = r.obstruction_matches {
        rep.value("third-order symbol is (S,S)/2", m.to_string());
    }
    if let Some(div) = &r.divergence {
        rep.value("divergence", div.render(c));
    }
    if let Some(v) = &r.vector_field {
        rep.value(
            "vector field",
            format!(
                "[{}]",
                v.iter().map(|e| c.render(e)).collect::<Vec<_>>().join(", ")
            ),
        );
    }
    if let Some(p) = r.poisson {
        rep.value("preserves the bracket", p.to_string());
    }
    let consistent = match r.order {
        None => jac,
        Some(3) => !jac && r.obstruction_matches == Some(true),
        Some(1) => jac && r.poisson == Some(true),
        Some(_) => false,
    };
    if !consistent {
        rep.residual(
            "hierarchy",
            format!(
                "order {:?} with Jacobi {}",
                r.order,
                if jac { "holding" } else { "failing" }
            ),
        );
    }
    if let Some(o) = expect_order {
        if r.order != Some(o) {
            rep.residual("order", format!("expected {o}, got {:?}", r.order));
        }
    }
    if let Some(z) = expect_zero {
        if r.is_master() != z {
            rep.residual("vanishing", format!("expected {z}, got {}", r.is_master()));
        }
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "Delta^2 sits where the Jacobi equations put it",
        "Delta^2 is not as expected",
    );
    Ok(())
}

fn transform(sc: &Scenario, rep: &mut CommandReport) -> Step {
    let ch = sc.change.as_ref().ok_or("no coordinate change")?;
    let c = sc.chart();
    let moved = transform_bracket_data(&sc.data, ch).map_err(err)?;
    rep.value("J", c.render(&ch.j));
    let n = c.dim();
    for i in 0..n {
        for j in 0..n {
            rep.value(format!("S'[{i}][{j}]"), c.render(&moved.s[i][j]));
        }
    }
    for i in 0..n {
        rep.value(format!("gamma'[{i}]"), c.render(&moved.gamma[i]));
    }
    rep.value("theta'", c.render(&moved.theta));
    let direct = transform_operator(&canonical_pencil(&sc.data), ch).map_err(err)?;
    let rebuilt = canonical_pencil(&moved);
    if direct != rebuilt {
        rep.residual(
            "transformed pencil - pencil of transformed data",
            direct.sub(&rebuilt).render(),
        );
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "the pencil is natural under the change",
        "the pencil is not natural under the change",
    );
    Ok(())
}

fn action(sc: &Scenario) -> ScalarExpr {
    sc.action.clone().unwrap_or_else(ScalarExpr::zero)
}

fn recover(sc: &Scenario, w0: &Option<Number>, rep: &mut CommandReport) -> Step {
    let w0 = number(w0, q(2, 1))?;
    let p = canonical_pencil(&sc.data);
    let l = p.specialize(&w0);
    rep.value(format!("Delta_{w0}"), l.render());
    let back = recover_pencil(&l, &w0, &action(sc)).map_err(err)?;
    rep.value("recovered", back.render());
    if back != p {
        rep.residual("recovered - pencil", back.sub(&p).render());
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        &format!("the pencil is recovered from its member at w = {w0}"),
        "recovery gives another pencil",
    );
    Ok(())
}

fn decompose(sc: &Scenario, w0: &Option<Number>, rep: &mut CommandReport) -> Step {
    let w0 = number(w0, q(0, 1))?;
    let c = sc.chart();
    let l = canonical_pencil(&sc.data).specialize(&w0);
    let d = decompose_operator(&l, &w0, &action(sc)).map_err(err)?;
    rep.value(
        "Q",
        format!(
            "[{}]",
            d.q.iter()
                .map(|e| c.render(e))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    rep.value("f", c.render(&d.f));
    let sum = canonical_pencil(&d.lb)
        .specialize(&w0)
        .add(&lie_derivative(c, &d.q, d.lb.parity).specialize(&w0))
        .add(&DiffOp::mult(c, d.f.clone()));
    if sum != l {
        rep.residual("LB + Lie_Q + f - L", sum.sub(&l).render());
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "L = Delta^LB + Lie_Q + f",
        "the parts do not add up to the operator",
    );
    Ok(())
}

fn bv_master(sc: &Scenario, rep: &mut CommandReport) -> Step {
    let c = sc.chart();
    let r = densalg::geometry::bv_master_check(&sc.data, &action(sc)).map_err(err)?;
    rep.value("H", c.render(&r.hamiltonian));
    rep.value(
        "master equation",
        if r.hamiltonian.is_zero() {
            "holds"
        } else {
            "fails"
        },
    );
    rep.value(
        "Delta^2",
        if r.delta_squared.is_master() {
            "0".to_string()
        } else {
            r.delta_squared.square.render()
        },
    );
    rep.value(
        "Delta^2 = Lie along",
        match r.field_sign {
            Some(1) => "grad H",
            Some(-1) => "-grad H",
            _ => "neither",
        },
    );
    if !r.agree {
        rep.residual(
            "H vs Delta^2",
            format!(
                "H = {}, {}",
                c.render(&r.hamiltonian),
                r.delta_squared.render()
            ),
        );
    }
    verdict(
        rep,
        r.agree,
        "Delta^2 = 0 exactly when the master equation holds",
        "the two zero tests disagree",
    );
    Ok(())
}

fn sturm(sc: &Scenario, rep: &mut CommandReport) -> Step {
    let ch = sc.change.as_ref().ok_or("no coordinate change")?;
    let c = sc.chart();
    let d = &sc.data;
    let r = sturm_liouville_demo(&d.s[0][0], &d.gamma[0], &d.theta, ch).map_err(err)?;
    rep.value("U", c.render(&r.u));
    rep.value("U'", c.render(&r.u_new));
    rep.value("U' from the operator", c.render(&r.u_oracle));
    rep.value("Schwarzian", c.render(&r.schwarzian));
    rep.value("y_x", c.render(&r.jacobian));
    rep.value(
        "law",
        match r.relation_sign {
            Some(1) => "U' = y_x^-2 (U + s/2 Schwarzian)".to_string(),
            Some(-1) => "U' = y_x^-2 (U - s/2 Schwarzian)".to_string(),
            _ => "neither sign".to_string(),
        },
    );
    if !r.routes_agree() {
        rep.residual(
            "U' - U' from the operator",
            c.render(&(&r.u_new - &r.u_oracle)),
        );
    }
    if r.relation_sign.is_none() {
        rep.residual("law", "the potential follows neither Schwarzian law");
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "the potential moves by the Schwarzian",
        "the potential law fails",
    );
    Ok(())
}

fn cocycle(sc: &Scenario, conns: &[Vec<String>], rep: &mut CommandReport) -> Step {
    let c = sc.chart();
    let d = &sc.data;
    let gs = conns
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let coeffs = g
                .iter()
                .map(|e| c.parse(e).map_err(|e| format!("connection {i}: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            ConnectionOnVol::new(c, coeffs).map_err(|e| format!("connection {i}: {e}"))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut chain = ScalarExpr::zero();
    for i in 0..gs.len() - 1 {
        let v = bv_cocycle(&d.s, d.parity, &gs[i], &gs[i + 1]).map_err(err)?;
        rep.value(format!("c({i},{})", i + 1), c.render(&v));
        chain = chain + v;
    }
    let last = gs.len() - 1;
    let direct = bv_cocycle(&d.s, d.parity, &gs[0], &gs[last]).map_err(err)?;
    rep.value(format!("c(0,{last})"), c.render(&direct));
    if chain != direct {
        rep.residual("chain - direct", c.render(&(&chain - &direct)));
    }
    let ok = rep.residuals.is_empty();
    verdict(
        rep,
        ok,
        "the cocycle is additive along the chain",
        "the cocycle is not additive",
    );
    Ok(())
}
