use densalg::brackets::{canonical_pencil, check_jacobi_equations, classify_delta_squared};
use densalg::geometry::{sturm_liouville_demo, CoordChange};
use densalg::phasespace::BracketData;
use densalg::{Chart, Parity, Rational, ScalarExpr};
use serde_json::json;

#[derive(Debug)]
pub struct Session {
    data: BracketData,
}

fn rational(s: &str) -> Result<Rational, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a rational number", s.trim()))
}

fn expr(c: &Chart, what: &str, s: &str) -> Result<ScalarExpr, String> {
    c.parse(s.trim()).map_err(|e| format!("{what}: {e}"))
}

fn list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect()
}

impl Session {
    pub fn parse(
        coords: &str,
        lambda: &str,
        parity: &str,
        s: &str,
        gamma: &str,
        theta: &str,
    ) -> Result<Session, String> {
        let coords: Vec<(String, Parity)> = list(coords)
            .into_iter()
            .map(|c| {
                let (name, p) = c.split_once(':').unwrap_or((c, "even"));
                let p = Parity::parse(p.trim()).ok_or_else(|| format!("`{p}` is not a parity"))?;
                Ok((name.trim().to_string(), p))
            })
            .collect::<Result<_, String>>()?;
        let chart = Chart::new(&coords).map_err(|e| e.to_string())?;
        let n = chart.dim();
        let rows: Vec<&str> = s
            .split(';')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .collect();
        if rows.len() != n {
            return Err(format!("S needs {n} rows"));
        }
        let s = rows
            .iter()
            .enumerate()
            .map(|(a, r)| {
                let r = list(r);
                if r.len() != n {
                    return Err(format!("row {a} of S needs {n} entries"));
                }
                r.iter()
                    .enumerate()
                    .map(|(b, e)| expr(&chart, &format!("S[{a}][{b}]"), e))
                    .collect()
            })
            .collect::<Result<Vec<Vec<_>>, String>>()?;
        let g = list(gamma);
        if g.len() != n {
            return Err(format!("gamma needs {n} entries"));
        }
        let gamma = g
            .iter()
            .enumerate()
            .map(|(a, e)| expr(&chart, &format!("gamma[{a}]"), e))
            .collect::<Result<_, _>>()?;
        let theta = if theta.trim().is_empty() {
            ScalarExpr::zero()
        } else {
            expr(&chart, "theta", theta)?
        };
        let eps =
            Parity::parse(parity.trim()).ok_or_else(|| format!("`{parity}` is not a parity"))?;
        let data = BracketData::new(&chart, s, gamma, theta, rational(lambda)?, eps)
            .map_err(|e| e.to_string())?;
        Ok(Session { data })
    }

    pub fn pencil_json(&self, w: &str) -> Result<String, String> {
        let p = canonical_pencil(&self.data);
        let w = rational(w)?;
        let dual = Rational::from_integer(1.into()) - &self.data.lambda - &w;
        let member = p.specialize(&w);
        Ok(json!({
            "pencil": p.render(),
            "w": w.to_string(),
            "member": member.render(),
            "adjoint_weight": dual.to_string(),
            "self_adjoint": member.adjoint() == p.specialize(&dual),
        })
        .to_string())
    }

    pub fn square_json(&self) -> Result<String, String> {
        let c = &self.data.chart;
        let res = check_jacobi_equations(&self.data).map_err(|e| e.to_string())?;
        let r = classify_delta_squared(&canonical_pencil(&self.data)).map_err(|e| e.to_string())?;
        Ok(json!({
            "jacobi": res.residuals.iter().map(|r| r.render(c)).collect::<Vec<_>>(),
            "holds": res.all_zero(),
            "order": r.order,
            "square": if r.is_master() { "0".to_string() } else { r.square.render() },
            "obstruction_matches": r.obstruction_matches,
            "vector_field": r.vector_field.map(|v| v.iter().map(|e| c.render(e)).collect::<Vec<_>>()),
            "poisson": r.poisson,
        })
        .to_string())
    }
}

pub fn sturm_json(gamma: &str, theta: &str, change: &str) -> Result<String, String> {
    let c = Chart::even(&["x"]).map_err(|e| e.to_string())?;
    let gamma = expr(&c, "gamma", gamma)?;
    let theta = if theta.trim().is_empty() {
        ScalarExpr::zero()
    } else {
        expr(&c, "theta", theta)?
    };
    let y = expr(&c, "change", change)?;
    let ch = CoordChange::new(&c, &["y"], vec![y]).map_err(|e| e.to_string())?;
    let r =
        sturm_liouville_demo(&ScalarExpr::one(), &gamma, &theta, &ch).map_err(|e| e.to_string())?;
    Ok(json!({
        "U": c.render(&r.u),
        "U_new": c.render(&r.u_new),
        "U_operator": c.render(&r.u_oracle),
        "schwarzian": c.render(&r.schwarzian),
        "y_x": c.render(&r.jacobian),
        "routes_agree": r.routes_agree(),
        "sign": r.relation_sign,
    })
    .to_string())
}
