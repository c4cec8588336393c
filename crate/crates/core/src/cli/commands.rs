use serde::Serialize;

use super::document::{Inputs, ResultDocument};
use super::spec::{MapSpecDocument, PreparedMap};
use crate::asymptotics::{decompose_at_tip, holder_experiment, linefield_divergence_demo, universal_data, universality_report};
use crate::cantor::{average_jacobian, conjugacy_residuals, distortion_report, pieces_at_depth, tip, RenormTower};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fixedpoint::{operator_spectrum, solve_fixed_point, superstable_parameter};
use crate::unimodal::{UnimodalMap, UnimodalPermutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FixedPoint,
    Tower,
    Cantor,
    Jacobian,
    Universality,
    Linefield,
    Rigidity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FixedPoint => "fixed-point",
            Command::Tower => "tower",
            Command::Cantor => "cantor",
            Command::Jacobian => "jacobian",
            Command::Universality => "universality",
            Command::Linefield => "linefield",
            Command::Rigidity => "rigidity",
        }
    }

    pub fn default_depth(self) -> usize {
        match self {
            Command::FixedPoint => 0,
            Command::Tower => 4,
            Command::Cantor | Command::Jacobian => 5,
            Command::Universality | Command::Rigidity => 6,
            Command::Linefield => 7,
        }
    }

    fn arity(self) -> usize {
        if self == Command::Rigidity {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub perm: Option<String>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
}

/// Runs one command. Numerical failures are returned as errors; assertion
/// failures are recorded in the document.
pub fn run(cmd: Command, specs: &[MapSpecDocument], opts: &Options, cfg: &Config) -> Result<ResultDocument> {
    if specs.len() != cmd.arity() {
        return Err(Error::BadInput(format!("{} takes {} map spec(s), got {}", cmd.name(), cmd.arity(), specs.len())));
    }
    if let Some(p) = &opts.perm {
        UnimodalPermutation::parse(p)?;
    }
    let depth = opts.depth.unwrap_or(cmd.default_depth());
    let tol = opts.tol.unwrap_or(1e-9);
    if !(tol > 0.0) {
        return Err(Error::BadInput("--tol must be positive".into()));
    }
    let inputs = Inputs { specs: specs.to_vec(), perm: opts.perm.clone(), depth, tol };
    let mut doc = ResultDocument::new(cmd.name(), inputs);
    let perm = opts.perm.as_deref();
    match cmd {
        Command::FixedPoint => fixed_point(&mut doc, &specs[0], perm, tol, cfg)?,
        Command::Rigidity => {
            let a = specs[0].prepare(perm, cfg)?;
            let b = specs[1].prepare(perm, cfg)?;
            rigidity(&mut doc, &a, &b, depth, cfg)?
        }
        _ => {
            let m = specs[0].prepare(perm, cfg)?;
            let t = m.tower(depth, cfg)?;
            match cmd {
                Command::Tower => tower(&mut doc, &t, cfg)?,
                Command::Cantor => cantor(&mut doc, &t, depth, cfg)?,
                Command::Jacobian => jacobian(&mut doc, &t, depth, cfg)?,
                Command::Universality => universality(&mut doc, &m, &t, cfg)?,
                Command::Linefield => linefield(&mut doc, &t)?,
                Command::FixedPoint | Command::Rigidity => unreachable!(),
            }
        }
    }
    Ok(doc)
}

#[derive(Serialize)]
struct CoeffRow {
    k: usize,
    coefficient: f64,
}

fn fixed_point(doc: &mut ResultDocument, spec: &MapSpecDocument, perm: Option<&str>, tol: f64, cfg: &Config) -> Result<()> {
    let v = match perm {
        Some(s) => UnimodalPermutation::parse(s)?,
        None => spec.permutation()?,
    };
    let seed = spec.unimodal(&v, cfg)?;
    let fp = solve_fixed_point(&v, &seed, tol, cfg)?;
    let sp = operator_spectrum(&fp, &v, cfg)?;
    doc.value("p", v.p());
    doc.value("sigma", fp.sigma);
    doc.value("unstable_eigenvalue", sp.unstable_eigenvalue);
    doc.value("residual", fp.residual);
    doc.value("newton_iterations", fp.newton_iterations);
    doc.value("spectrum_residual", sp.residual);
    doc.value("critical_point", fp.f_star.c0());
    doc.value("convex_on_j1", fp.convex_on_j1);
    let coeffs: Vec<CoeffRow> = fp.f_star.f().coeffs().iter().enumerate().map(|(k, &c)| CoeffRow { k, coefficient: c }).collect();
    doc.table("chebyshev_coefficients", &coeffs);
    doc.table("spectrum", &sp.top);
    doc.assert("residual", fp.residual < tol, fp.residual, format!("< {tol:e}"));
    doc.assert("sigma_in_unit_interval", fp.sigma > 0.0 && fp.sigma < 1.0, fp.sigma, "in (0, 1)");
    doc.assert("unstable_eigenvalue", sp.unstable_eigenvalue > 1.0, sp.unstable_eigenvalue, "> 1");
    Ok(())
}

#[derive(Serialize)]
struct StageRow {
    n: usize,
    eps_sup: f64,
    orientation: f64,
    alpha: f64,
    beta: f64,
    f_distance: Option<f64>,
}

fn tower(doc: &mut ResultDocument, t: &RenormTower, cfg: &Config) -> Result<()> {
    let s = t.summary();
    let rows: Vec<StageRow> = (0..=s.depth)
        .map(|n| StageRow {
            n,
            eps_sup: s.eps_sup[n],
            orientation: s.orientation[n].sign(),
            alpha: s.alpha[n],
            beta: s.beta[n],
            f_distance: s.f_distance.as_ref().map(|d| d[n]),
        })
        .collect();
    doc.table("stages", &rows);
    let consistency = t.consistency(cfg)?;
    doc.value("consistency", consistency);
    doc.assert("consistency", consistency < 1e-8, consistency, "< 1e-8");
    // log ε_{n+1} ≤ 1.8 log ε_n while ε_n is resolved
    let logs: Vec<f64> = s.eps_sup.iter().take_while(|&&e| e > cfg.underflow_floor && e < 1.0).map(|e| e.ln()).collect();
    if logs.len() >= 2 {
        let worst = logs.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
        doc.assert("eps_superexponential", worst >= 1.8, worst, "min log ratio >= 1.8");
    }
    Ok(())
}

#[derive(Serialize)]
struct PieceRow {
    word: String,
    center_x: f64,
    center_y: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    diameter: f64,
}

fn cantor(doc: &mut ResultDocument, t: &RenormTower, depth: usize, cfg: &Config) -> Result<()> {
    let c = pieces_at_depth(t, depth, cfg)?;
    let rows: Vec<PieceRow> = c
        .pieces
        .iter()
        .map(|p| PieceRow {
            word: p.word.to_string(),
            center_x: p.center.x,
            center_y: p.center.y,
            x_lo: p.bbox.x.lo,
            x_hi: p.bbox.x.hi,
            y_lo: p.bbox.y.lo,
            y_hi: p.bbox.y.hi,
            diameter: p.diam(),
        })
        .collect();
    doc.table("pieces", &rows);
    let conj = conjugacy_residuals(&c, t.map(0)?);
    doc.table("conjugacy", &conj);
    doc.value("diameter_ratio", c.diameter_ratio);
    doc.value("max_diameters", &c.max_diameters);
    let bad = conj.iter().filter(|r| !(r.residual <= r.diameter && r.image_contained)).count();
    doc.assert("adding_machine", bad == 0, bad, "0 words with residual above the piece diameter");
    Ok(())
}

#[derive(Serialize)]
struct DepthRow {
    depth: usize,
    b: f64,
}

fn jacobian(doc: &mut ResultDocument, t: &RenormTower, depth: usize, cfg: &Config) -> Result<()> {
    let b = average_jacobian(t, depth, cfg)?;
    doc.value("b", b.b);
    doc.value("cross_check", b.cross_check);
    doc.value("error_estimate", b.error_estimate);
    let rows: Vec<DepthRow> = b.by_depth.iter().enumerate().map(|(i, &b)| DepthRow { depth: i + 1, b }).collect();
    doc.table("b_by_depth", &rows);
    if t.map(0)?.is_degenerate() {
        return Ok(());
    }
    let gap = (b.b - b.cross_check).abs();
    // rounding slack for constant Jacobians, where the estimate is exactly 0
    doc.assert("estimators_agree", gap <= b.error_estimate + 1e-12 * b.b, gap, "<= error_estimate");
    let d = distortion_report(t, depth, cfg)?;
    doc.table("distortion", &d.rows);
    let worst = d.rows.iter().map(|r| r.distortion).fold(0.0, f64::max);
    // a constant Jacobian has no distortion to decay
    if worst > 1e-11 {
        doc.assert("distortion_decreasing", d.decreasing, worst, "strictly decreasing in depth");
    }
    Ok(())
}

#[derive(Serialize)]
struct TiltRow {
    n: usize,
    t_n: f64,
    predicted: f64,
    ratio: f64,
}

fn universality(doc: &mut ResultDocument, m: &PreparedMap, t: &RenormTower, cfg: &Config) -> Result<()> {
    let fp = match &m.fixed_point {
        Some((fp, _)) => fp.clone(),
        None => {
            let seed = UnimodalMap::logistic(superstable_parameter(&m.v, cfg)?)?;
            solve_fixed_point(&m.v, &seed, 1e-9, cfg)?
        }
    };
    let u = universal_data(&fp, &m.v, cfg)?;
    let b = average_jacobian(t, t.depth().min(6), cfg)?.b;
    let r = universality_report(t, &u, b)?;
    doc.value("b", b);
    doc.value("tau_star_x", u.tau_star_x);
    doc.value("rho", r.rho);
    doc.value("f_rate", r.f_rate);
    doc.value("underflow", r.underflow);
    doc.table("universality", &r.rows);
    let tp = tip(t)?;
    let a = u.a_at(u.tau_star_x);
    let mut tilt = Vec::new();
    for n in 0..t.depth() {
        let d = decompose_at_tip(t, &tp, n)?;
        let predicted = a * b.powf(t.p().pow(n as u32) as f64);
        if predicted < cfg.underflow_floor {
            break;
        }
        tilt.push(TiltRow { n, t_n: d.t_n, predicted, ratio: d.t_n / predicted });
    }
    doc.table("tilt", &tilt);
    let e: Vec<f64> = r.rows.iter().map(|r| r.e_n).collect();
    doc.assert("e_n_decreasing", r.decreasing, e, "strictly decreasing in n");
    Ok(())
}

/// Longest run of consecutive steps with the gap growing at least tenfold
/// while the base distance shrinks, counted in heights m.
pub fn linefield_growth_run(rows: &[crate::asymptotics::LinefieldRow]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for w in rows.windows(2) {
        if w[1].projective_gap >= 10.0 * w[0].projective_gap && w[1].base_distance < w[0].base_distance {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    if best == 0 {
        0
    } else {
        best + 1
    }
}

fn linefield(doc: &mut ResultDocument, t: &RenormTower) -> Result<()> {
    let tp = tip(t)?;
    let demo = linefield_divergence_demo(t, &tp, 0..t.depth().saturating_sub(1))?;
    doc.table("linefield", &demo.rows);
    doc.value("truncated", demo.truncated);
    let run = linefield_growth_run(&demo.rows);
    doc.assert("gap_growth", run >= 3, run, ">= 3 consecutive heights with tenfold gap growth");
    Ok(())
}

fn rigidity(doc: &mut ResultDocument, a: &PreparedMap, b: &PreparedMap, depth: usize, cfg: &Config) -> Result<()> {
    let ta = a.tower(depth, cfg)?;
    let tb = b.tower(depth, cfg)?;
    let r = holder_experiment(&ta, &tb, cfg)?;
    doc.value("b", r.b);
    doc.value("b_tilde", r.b_tilde);
    doc.value("swapped", r.swapped);
    doc.value("alpha_bound", r.alpha_bound);
    doc.value("alpha_bound_uncapped", r.alpha_bound_uncapped);
    doc.value("alpha_emp_max", r.alpha_emp_max);
    doc.table("holder", &r.rows);
    doc.assert("holder_bound", r.pass, r.alpha_emp_max, format!("<= {:.4} + 0.05", r.alpha_bound));
    Ok(())
}
