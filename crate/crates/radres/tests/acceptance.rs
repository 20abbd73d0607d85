//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`.

use std::f64::consts::PI;
use std::time::Instant;

use radres::parallel::{par_estimate, par_martingale, pool};
use radres_core::conformal::{cayley, Direction};
use radres_core::geometry::hausdorff;
use radres_core::loewner::{chordal_flow, extract_trace, hull_maps, DrivingPath};
use radres_core::restriction::{
    beta_of_rho, build_a_eps, exponents_of_rho, lambda_nu_residual, nu, residual_report, rho_of_beta, xi, RestrictionLaw,
};
use radres_core::sampler::{chordal_limit_experiment, chordal_limit_hull, regress, EstimateReport, FlowConfig, McConfig, TestHull};
use radres_core::sle::{perfect_driver, radial_sle_driver, ForcePoint, SleParams};
use radres_core::{Domain, C};

/// The A_ε capacity limit is (1+cos θ)²/2, half the stated value; the other
/// parts of criterion 7 pass.
const KNOWN_FAILURES: &[usize] = &[7];

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn hull_set() -> Vec<TestHull> {
    vec![TestHull::perfect(PI / 2.0, 0.2).unwrap(), TestHull::perfect(PI, 0.1).unwrap(), TestHull::half_disc(2.0, 0.05).unwrap()]
}

fn zs(reports: &[EstimateReport]) -> String {
    reports.iter().map(|r| format!("{}: p={:.4} target={:.4} z={:+.2}", r.hull, r.p_hat, r.target, r.z)).collect::<Vec<_>>().join("; ")
}

fn max_abs_z(reports: &[EstimateReport]) -> f64 {
    reports.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
}

fn mc(t_min: f64) -> McConfig {
    let mut cfg = McConfig::default();
    cfg.flow.dt = 1e-4;
    cfg.soup.t_min = t_min;
    cfg
}

fn one_sided(rt: &rayon::ThreadPool) -> Outcome {
    let law = RestrictionLaw::new(5.0 / 48.0, 5.0 / 8.0);
    let r = par_estimate(rt, law, &hull_set(), 10_000, &mc(1e-3), 1).unwrap();
    outcome(max_abs_z(&r) <= 3.0, zs(&r))
}

fn two_sided(rt: &rayon::ThreadPool) -> Outcome {
    let law = RestrictionLaw::maximal(2.0).unwrap();
    let hulls = hull_set();
    let r = par_estimate(rt, law, &hulls, 5_000, &mc(1e-3), 2).unwrap();
    let fit = regress(&r, &hulls).unwrap();
    let m = fit.mahalanobis(law);
    let pass = max_abs_z(&r) <= 3.0 && m <= 3.0;
    outcome(pass, format!("{}; fit (α, β) = ({:.3}, {:.3}), joint distance {m:.2} SE", zs(&r), fit.alpha, fit.beta))
}

fn soup_attachment(rt: &rayon::ThreadPool) -> Outcome {
    let law = RestrictionLaw::new(5.0 / 48.0 - 0.5, 5.0 / 8.0);
    let hulls = hull_set();
    let fine = par_estimate(rt, law, &hulls, 10_000, &mc(1e-3), 3).unwrap();
    // Truncating short loops can only remove hits, so p̂ falls towards the target as t_min shrinks.
    let coarse = par_estimate(rt, law, &hulls[..1], 10_000, &mc(1e-2), 3).unwrap();
    let (g_coarse, g_fine) = (coarse[0].p_hat - coarse[0].target, fine[0].p_hat - fine[0].target);
    let monotone = g_coarse >= g_fine;
    let pass = max_abs_z(&fine) <= 3.5 && monotone;
    outcome(pass, format!("{}; ladder p̂ − target on {}: t_min=1e-2 {g_coarse:+.4}, t_min=1e-3 {g_fine:+.4}", zs(&fine), hulls[0].name))
}

fn martingale(rt: &rayon::ThreadPool) -> Outcome {
    let hull = TestHull::perfect(PI, 0.15).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for rho in [0.5, 2.0] {
        let cfg = FlowConfig { dt: 1e-4, ..Default::default() };
        let r = par_martingale(rt, rho, &hull, cfg, 0.5, 5, 2_000, 4).unwrap();
        let m0_err = (r.m0 - r.m0_formula).abs();
        pass &= r.max_abs_z <= 3.5 && m0_err < 1e-6;
        parts.push(format!("ρ={rho}: max|z|={:.2}, |M0 − formula|={m0_err:.1e}", r.max_abs_z));
    }
    outcome(pass, parts.join("; "))
}

fn exponents() -> Outcome {
    let start = Instant::now();
    let mut err = 0.0f64;
    err = err.max((xi(5.0 / 8.0).unwrap() - 5.0 / 48.0).abs());
    err = err.max((xi(2.0).unwrap() - 2.0 / 3.0).abs());
    err = err.max(rho_of_beta(5.0 / 8.0).unwrap().abs());
    err = err.max((rho_of_beta(2.0).unwrap() - 2.0).abs());
    for k in 0..=600 {
        let rho = 0.01 * k as f64;
        let (alpha, _, _) = exponents_of_rho(rho).unwrap();
        err = err.max((alpha - xi(beta_of_rho(rho)).unwrap()).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(err < 1e-12 && secs < 1.0, format!("max error {err:.1e} in {secs:.3} s"))
}

fn kernels() -> Outcome {
    let laws = [RestrictionLaw::new(5.0 / 48.0, 0.625), RestrictionLaw::new(2.0 / 3.0, 2.0), RestrictionLaw::new(-0.5, 1.0)];
    let grid = [-3.0, -1.0, -0.3, 0.3, 1.0, 3.0];
    let r = residual_report(&laws, &grid).unwrap();
    // Near θ = 0 both sides grow like θ⁻², so the finer grid is compared relative to max(1, |ν(θ)(1+cos θ)²|).
    let mut nu_rel = 0.0f64;
    for k in 1..200 {
        let theta = PI * k as f64 / 200.0;
        for law in laws {
            let size = (nu(theta, law).unwrap() * (1.0 + theta.cos()).powi(2)).abs().max(1.0);
            nu_rel = nu_rel.max(lambda_nu_residual(theta, law).unwrap().abs() / size);
        }
    }
    let pass =
        r.commutation < 1e-9 && r.lambda_ode < 1e-9 && r.lambda_nu < 1e-12 && nu_rel < 1e-12 && r.control_linear > 1e-3 && r.control_cubic > 1e-3;
    outcome(
        pass,
        format!(
            "commutation {:.1e}, λ ODE {:.1e}, λ–ν {:.1e} (relative on the fine grid {:.1e}); controls {:.2e} and {:.2e}",
            r.commutation, r.lambda_ode, r.lambda_nu, nu_rel, r.control_linear, r.control_cubic
        ),
    )
}

fn self_similarity(theta: f64, t: f64, s: f64, dt: f64) -> f64 {
    let w = perfect_driver(theta, t + s, dt).unwrap();
    let tr = extract_trace(&w, Domain::Disc, 0.0).unwrap();
    let chain = hull_maps(&w, t, Domain::Disc).unwrap();
    let rot = C::from_polar(1.0, theta - w.at(t));
    let k = (t / dt).round() as usize;
    let mut moved = vec![C::from_polar(1.0, theta)];
    moved.extend(tr.points[k + 1..].iter().map(|&p| rot * chain.value(p).unwrap()));
    hausdorff(&moved, &tr.points[..tr.points.len() - k])
}

fn loewner() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let sle = SleParams { kappa: 8.0 / 3.0, rho: 0.0, force: ForcePoint::None, horizon: 0.8, dt: 1e-3, seed: 7 };
    let drivers = [
        DrivingPath::from_fn(0.6, 1e-3, |t| 0.4 * (4.0 * t).sin() + t).unwrap(),
        perfect_driver(PI / 2.0, 0.8, 1e-3).unwrap(),
        radial_sle_driver(&sle, 0).unwrap().w,
    ];
    let mut deriv = 0.0f64;
    for w in &drivers {
        let t = w.horizon();
        let d = hull_maps(w, t, Domain::Disc).unwrap().eval(C::new(0.0, 0.0)).unwrap().1.norm();
        deriv = deriv.max((d - t.exp()).abs() / t.exp());
    }
    pass &= deriv < 1e-8;
    parts.push(format!("g'_t(0) vs e^t {deriv:.1e}"));

    let z = C::new(0.0, 100.0);
    let t = 1.0;
    let w = DrivingPath::constant(0.0, t, 1e-3).unwrap();
    let hcap = ((chordal_flow(&w, z, t).unwrap().value - z) * z - 2.0 * t).norm();
    pass &= hcap < 1e-3;
    parts.push(format!("(g_t(z) − z)z − 2t at 100i {hcap:.1e}"));

    let ss = self_similarity(PI / 2.0, 0.3, 0.3, 1e-4);
    pass &= ss < 1e-2;
    parts.push(format!("self-similarity {ss:.1e}"));

    // x = 1 is θ = π/2, so t_x = 1.
    let caps: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e| (e, build_a_eps(1.0, e).unwrap().1)).collect();
    let ok = caps.iter().all(|&(e, c)| (c - 1.0).abs() <= e);
    pass &= ok;
    let shown: Vec<String> = caps.iter().map(|(e, c)| format!("ε={e}: {c:.4}")).collect();
    parts.push(format!("A_ε capacity vs t_x=1 [{}]", shown.join(", ")));

    // The A_ε hulls approach the perfect curve run for the measured capacity.
    let eta: Vec<C> = {
        let w = perfect_driver(PI / 2.0, 0.5, 1e-3).unwrap();
        extract_trace(&w, Domain::Disc, 0.0).unwrap().points.iter().map(|&p| cayley(p, Direction::DiscToHalfPlane).unwrap()).collect()
    };
    let d = hausdorff(&build_a_eps(1.0, 0.05).unwrap().0.skeleton(), &eta);
    parts.push(format!("Hausdorff(A_0.05, η[0, 1/2]) {d:.1e}"));
    outcome(pass, parts.join("; "))
}

fn chordal_limit(rt: &rayon::ThreadPool) -> Outcome {
    let law = RestrictionLaw::new(5.0 / 48.0, 5.0 / 8.0);
    let eps = [0.5, 0.25, 0.1];
    let cfg = mc(1e-3);
    let r = chordal_limit_experiment(law, 2.0, 0.5, &eps, 0, &cfg, 8).unwrap();
    let hulls: Vec<TestHull> = eps.iter().map(|&e| chordal_limit_hull(2.0, 0.5, e).unwrap()).collect();
    let m = par_estimate(rt, law, &hulls, 5_000, &cfg, 8).unwrap();
    let pass = r.monotone && max_abs_z(&m) <= 3.0;
    let ladder: Vec<String> = eps.iter().zip(&r.analytic).map(|(e, a)| format!("ε={e}: {a:.5}")).collect();
    outcome(pass, format!("analytic [{}] → {:.5}; {}", ladder.join(", "), r.limit, zs(&m)))
}

fn main() {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let rt = pool(workers).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("radial SLE_8/3 avoidance", Box::new(|| one_sided(&rt))),
        ("two-sided construction at β=2", Box::new(|| two_sided(&rt))),
        ("loop-soup attachment", Box::new(|| soup_attachment(&rt))),
        ("avoidance martingale", Box::new(|| martingale(&rt))),
        ("exponent identities", Box::new(exponents)),
        ("kernel and λ residuals", Box::new(kernels)),
        ("Loewner numerics", Box::new(loewner)),
        ("chordal limit", Box::new(|| chordal_limit(&rt))),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {name} ({:.1} s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed != KNOWN_FAILURES {
        eprintln!("failing criteria {failed:?}, expected {KNOWN_FAILURES:?}");
        std::process::exit(1);
    }
}
