//! Acceptance criteria 1–11, one line each. Runs without the libtest
//! harness so the lines are always printed.
//!
//! Criteria 8b and 11 are expected to fail (see README, "Known deviations").
//! The run fails if any other criterion fails, or if either of those two
//! starts to pass.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use renorm_core::analytic::remainder::{compose_all, Compose, Perturbed};
use renorm_core::analytic::{composed_remainder, composition_first_variation, remainder_decomposition, Map2, Quadratic2, M2, V2};
use renorm_core::asymptotics::{decompose_at_tip, holder_experiment, linefield_divergence_demo, universal_data, universality_report};
use renorm_core::cantor::{average_jacobian, conjugacy_residuals, distortion_report, pieces_at_depth};
use renorm_core::cli::linefield_growth_run;
use renorm_core::fixedpoint::{operator_spectrum, solve_fixed_point, superstable_parameter};
use renorm_core::henon::{renormalise_henon, HenonLikeMap};
use renorm_core::unimodal::{detect_renormalisable, renormalise_unimodal, UnimodalMap, UnimodalPermutation};
use renorm_core::Config;

const EXPECTED_FAILURES: [&str; 2] = ["8b", "11"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_doubling_fixed_point(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let v = UnimodalPermutation::doubling();
    let fp = solve_fixed_point(&v, &UnimodalMap::logistic(3.57).unwrap(), 1e-9, cfg).unwrap();
    let sp = operator_spectrum(&fp, &v, cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (delta, sigma) = common::oracle::feigenbaum_oracle();
    let ds = (fp.sigma - sigma).abs();
    let dd = (sp.unstable_eigenvalue - delta).abs();
    outcome(
        fp.residual < 1e-9 && ds < 1e-4 && dd < 1e-3 && secs < 30.0,
        format!("residual {:.1e}, |σ−σ_oracle| {ds:.1e}, |δ−δ_oracle| {dd:.1e}, {secs:.1}s", fp.residual),
    )
}

fn c2_period_three(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let v = UnimodalPermutation::period_three();
    let s = superstable_parameter(&v, cfg).unwrap();
    let a = solve_fixed_point(&v, &UnimodalMap::logistic(s).unwrap(), 1e-8, cfg).unwrap();
    let b = solve_fixed_point(&v, &UnimodalMap::logistic(3.85).unwrap(), 1e-8, cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let agree = a.f_star.distance(&b.f_star);
    outcome(
        a.residual < 1e-8 && a.sigma > 0.0 && a.sigma < 1.0 && agree < 1e-8 && secs < 120.0,
        format!("residual {:.1e}, σ {:.6}, seed agreement {agree:.1e}, {secs:.1}s", a.residual, a.sigma),
    )
}

fn c3_degenerate_diagram(cfg: &Config) -> Outcome {
    let v = UnimodalPermutation::doubling();
    let mut worst: f64 = 0.0;
    for f in [UnimodalMap::logistic(3.5).unwrap(), common::doubling().0.f_star.clone()] {
        let cycle = detect_renormalisable(&f, &v, cfg).unwrap().unwrap();
        let rf = renormalise_unimodal(&f, &cycle, cfg).unwrap();
        let rmap = renormalise_henon(&HenonLikeMap::degenerate(f, cfg), &v, cfg).unwrap().map;
        for i in 0..10 {
            for j in 0..10 {
                let (x, y) = ((i as f64 + 0.5) / 10.0, (j as f64 + 0.5) / 10.0);
                worst = worst.max((rmap.phi(x, y) - rf.eval(x)).abs());
            }
        }
    }
    outcome(worst < 1e-9, format!("max |φ_R − R f| over 100 probes {worst:.1e}"))
}

fn c4_eps_decay() -> Outcome {
    let start = Instant::now();
    let t = common::tuned(|_, y| 1e-2 * y, 4);
    let secs = start.elapsed().as_secs_f64();
    let logs: Vec<f64> = t.eps_sup().iter().map(|e| e.ln()).collect();
    let ok = logs.windows(2).all(|w| w[1] <= 1.8 * w[0]);
    let ratios: Vec<String> = logs.windows(2).map(|w| format!("{:.2}", w[1] / w[0])).collect();
    outcome(ok && secs < 60.0, format!("log ratios [{}], {secs:.1}s", ratios.join(", ")))
}

fn c5_average_jacobian(cfg: &Config) -> Outcome {
    let t = common::tuned(|_, y| 1e-2 * y, 4);
    let b = average_jacobian(&t, 4, cfg).unwrap().b;
    let exact = (b - 1e-2).abs();
    let t = common::tuned(|x, y| 1e-2 * (y + 0.5 * x * y * y), 7);
    let bf = average_jacobian(&t, 7, cfg).unwrap();
    let brf = average_jacobian(&t.shifted(1).unwrap(), 6, cfg).unwrap();
    let mono = (brf.b / (bf.b * bf.b) - 1.0).abs();
    let gap = (bf.b - bf.cross_check).abs();
    outcome(
        exact < 1e-10 && mono < 1e-6 && gap <= bf.error_estimate,
        format!("|b − c| {exact:.1e}, |b(RF)/b(F)² − 1| {mono:.1e}, estimator gap {gap:.1e} ≤ {:.1e}", bf.error_estimate),
    )
}

fn c6_distortion(cfg: &Config) -> Outcome {
    let t = common::tuned(|x, y| 5e-3 * y * (1.0 + x), 6);
    let d = distortion_report(&t, 5, cfg).unwrap();
    let vals: Vec<f64> = d.rows[2..=5].iter().map(|r| r.distortion).collect();
    let ok = vals.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = vals.iter().map(|v| format!("{v:.2e}")).collect();
    outcome(ok, format!("depths 2–5: [{}]", shown.join(", ")))
}

fn c7_adding_machine(cfg: &Config) -> Outcome {
    let t = common::tuned(|x, y| 5e-3 * y * (1.0 + x), 6);
    let c = pieces_at_depth(&t, 5, cfg).unwrap();
    let rows = conjugacy_residuals(&c, t.map(0).unwrap());
    let bad = rows.iter().filter(|r| r.residual > r.diameter).count();
    let worst = rows.iter().map(|r| r.residual / r.diameter).fold(0.0, f64::max);
    outcome(rows.len() == 32 && bad == 0, format!("{} words, {bad} violations, max residual/diam {worst:.1e}", rows.len()))
}

fn c8_universality(cfg: &Config) -> (Outcome, Outcome) {
    let (fp, _) = common::doubling();
    let (t, tip) = common::standard();
    let u = universal_data(fp, &UnimodalPermutation::doubling(), cfg).unwrap();
    let b = average_jacobian(t, 6, cfg).unwrap().b;
    let r = universality_report(t, &u, b).unwrap();
    let e: Vec<f64> = r.rows[1..=4].iter().map(|r| r.e_n).collect();
    let dec = e.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = e.iter().map(|v| format!("{v:.2e}")).collect();
    let a = u.a_at(u.tau_star_x);
    let ratios: Vec<f64> = (2..=4)
        .map(|n| decompose_at_tip(t, tip, n).unwrap().t_n / (a * b.powi(1 << n)))
        .collect();
    let within = ratios.iter().all(|q| (0.5..=2.0).contains(&q.abs()));
    let rs: Vec<String> = ratios.iter().map(|v| format!("{v:.4}")).collect();
    (
        outcome(dec, format!("e_1..e_4 [{}]", shown.join(", "))),
        outcome(within, format!("t_n / (a(τ*)·b^(2^n)) for n = 2..4: [{}]", rs.join(", "))),
    )
}

fn random_quadratic(rng: &mut ChaCha8Rng, qscale: f64) -> Quadratic2 {
    let mut m = || M2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let a = M2::identity() + m() * 0.5;
    let (q0, q1) = (m() * qscale, m() * qscale);
    Quadratic2::new(V2::new(0.1, -0.2), a, q0, q1)
}

fn c9_remainder_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_law: f64 = 0.0;
    let mut trials = 0;
    while trials < 100 {
        let f = random_quadratic(&mut rng, 0.3);
        let g = random_quadratic(&mut rng, 0.3);
        let z0 = V2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let z1 = V2::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
        // singular draws have no remainder
        let Ok(law) = composed_remainder(&f, &g, z0, z1) else { continue };
        let fg = Compose { outer: &f, inner: &g };
        let direct = remainder_decomposition(&fg, z0, z1).unwrap().remainder;
        worst_law = worst_law.max((law - direct).norm());
        trials += 1;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..100 {
        let fs: Vec<Quadratic2> = (0..3).map(|_| random_quadratic(&mut rng, 0.3)).collect();
        let es: Vec<Quadratic2> = (0..3).map(|_| random_quadratic(&mut rng, 1.0)).collect();
        let z = V2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let maps: Vec<&dyn Map2> = fs.iter().map(|f| f as &dyn Map2).collect();
        let perts: Vec<&dyn Map2> = es.iter().map(|e| e as &dyn Map2).collect();
        let dc = composition_first_variation(&maps, &perts, z).unwrap();
        let base = compose_all(&maps, z).unwrap();
        let disc = |s: f64| {
            let g: Vec<Perturbed> = (0..3).map(|i| Perturbed { base: maps[i], pert: perts[i], scale: s }).collect();
            let gm: Vec<&dyn Map2> = g.iter().map(|m| m as &dyn Map2).collect();
            (compose_all(&gm, z).unwrap() - base - dc * s).norm()
        };
        let ratio = disc(5e-5) / disc(1e-4);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    outcome(
        worst_law < 1e-9 && lo >= 0.2 && hi <= 0.3,
        format!("composition residual {worst_law:.1e}, second-order ratios in [{lo:.4}, {hi:.4}]"),
    )
}

fn c10_non_rigidity(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let ta = common::tuned(|_, y| 1e-3 * y, 6);
    let tb = common::tuned(|_, y| 4e-3 * y, 6);
    let r = holder_experiment(&ta, &tb, cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let contrast = r.b_tilde / r.b;
    outcome(
        contrast >= 4.0 - 1e-9 && r.pass && secs < 120.0,
        format!(
            "b̃/b {contrast:.3}, max α_emp {:.4} ≤ {:.4} + 0.05 over m = 1..{}, {secs:.1}s",
            r.alpha_emp_max,
            r.alpha_bound,
            r.rows.len()
        ),
    )
}

fn c11_linefield() -> Outcome {
    let (t, tip) = common::standard();
    let demo = linefield_divergence_demo(t, tip, 0..6).unwrap();
    let run = linefield_growth_run(&demo.rows);
    let gaps: Vec<String> = demo.rows.iter().map(|r| format!("{:.1e}", r.projective_gap)).collect();
    outcome(run >= 3, format!("longest growth run {run} heights; gaps m = 0..5 [{}]", gaps.join(", ")))
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored
    let cfg = Config::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |id: &'static str, o: Outcome| {
        println!("criterion {id:>3}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, o));
    };
    record("1", c1_doubling_fixed_point(&cfg));
    record("2", c2_period_three(&cfg));
    record("3", c3_degenerate_diagram(&cfg));
    record("4", c4_eps_decay());
    record("5", c5_average_jacobian(&cfg));
    record("6", c6_distortion(&cfg));
    record("7", c7_adding_machine(&cfg));
    let (a, b) = c8_universality(&cfg);
    record("8a", a);
    record("8b", b);
    record("9", c9_remainder_identities());
    record("10", c10_non_rigidity(&cfg));
    record("11", c11_linefield());

    let failed: BTreeSet<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(id, _)| *id).collect();
    let expected: BTreeSet<&str> = EXPECTED_FAILURES.into_iter().collect();
    println!("failed: {failed:?}; expected to fail: {expected:?}");
    if failed == expected {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
