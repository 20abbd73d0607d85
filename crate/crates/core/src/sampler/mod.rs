//! Radial restriction samples: Monte Carlo avoidance estimates, the
//! martingale check, the chordal limit, and explicit sample construction.

mod construct;
mod engine;
mod hull;

pub use construct::{hit_test, sample_max_restriction, sample_restriction, SampleConfig, SampleK};
pub use engine::{run_path, FlowConfig, FlowPath, PathOutcome, Status, KAPPA};
pub use hull::{components_map, Component, TestHull, ARC_POINTS, PERFECT_STEPS};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;

use crate::loopsoup::{Features, SoupConfig, SoupSampler};
use crate::restriction::{avoidance_probability, exponents_of_rho, rho_of_beta, xi, RadialHull, RestrictionLaw};
use crate::sle::path_rng;
use crate::{Error, Result};

/// Settings shared by every avoidance estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct McConfig {
    /// `rho` is overwritten from the law.
    pub flow: FlowConfig,
    /// `intensity` and `seed` are overwritten from the law and the run seed.
    pub soup: SoupConfig,
}

/// `(ρ, soup intensity)` realizing `law` by the two-sided construction
/// plus loops.
pub fn construction_of(law: RestrictionLaw) -> Result<(f64, f64)> {
    if !law.is_admissible() {
        return Err(Error::invalid(format!("law (α={}, β={}) is not admissible", law.alpha, law.beta)));
    }
    let rho = rho_of_beta(law.beta)?.max(0.0);
    Ok((rho, (xi(law.beta)? - law.alpha).max(0.0)))
}

/// Sample path `index`: did `K` avoid the hull?
pub fn simulate(law: RestrictionLaw, hull: &TestHull, cfg: &McConfig, seed: u64, index: u64) -> Result<PathOutcome> {
    let (rho, c) = construction_of(law)?;
    let mut rng = path_rng(seed, index);
    let mut out = run_path(hull, FlowConfig { rho, ..cfg.flow }, &mut rng)?;
    if out.avoided && c > 0.0 && !hull.is_empty() {
        let soup = SoupSampler::new(SoupConfig { intensity: c, seed, ..cfg.soup })?;
        let features = Features::new(&hull.components.iter().map(|c| c.points.clone()).collect::<Vec<_>>());
        out.avoided = !soup.sample(index, &features).iter().any(|l| l.hull_hits.iter().any(|&h| h));
    }
    Ok(out)
}

/// Sufficient statistics of a batch of paths; batches merge by addition.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally {
    pub n: u64,
    pub avoided: u64,
    pub hits: u64,
    pub steps: u64,
}

impl Tally {
    pub fn merge(self, o: Tally) -> Tally {
        Tally { n: self.n + o.n, avoided: self.avoided + o.avoided, hits: self.hits + o.hits, steps: self.steps + o.steps }
    }
}

pub fn tally(law: RestrictionLaw, hull: &TestHull, cfg: &McConfig, seed: u64, range: Range<u64>) -> Result<Tally> {
    let mut t = Tally::default();
    for i in range {
        let o = simulate(law, hull, cfg, seed, i)?;
        t.n += 1;
        t.avoided += o.avoided as u64;
        t.hits += (o.status == Status::Hit) as u64;
        t.steps += o.steps as u64;
    }
    Ok(t)
}

/// Explicit samples `index ∈ range`, each hit-tested against every hull.
pub fn geometric_tally(law: RestrictionLaw, hulls: &[TestHull], cfg: &SampleConfig, seed: u64, range: Range<u64>) -> Result<Vec<Tally>> {
    let mut out = alloc::vec![Tally::default(); hulls.len()];
    for i in range {
        let k = sample_restriction(law, cfg, seed, i)?;
        let steps = (k.right.points.len() + k.left.points.len()) as u64;
        for (t, h) in out.iter_mut().zip(hulls) {
            let hit = hit_test(&k, h);
            *t = t.merge(Tally { n: 1, avoided: !hit as u64, hits: hit as u64, steps });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub hull: String,
    pub law: RestrictionLaw,
    pub n: u64,
    pub avoided: u64,
    pub p_hat: f64,
    /// `√(p̂(1−p̂)/n)`.
    pub se: f64,
    pub target: f64,
    /// `(p̂ − target)/se`, using `√(target(1−target)/n)` when `se = 0`.
    pub z: f64,
    pub dt: f64,
    pub seed: u64,
    pub wall_ms: Option<u64>,
}

pub fn report(law: RestrictionLaw, hull: &TestHull, tally: Tally, dt: f64, seed: u64) -> EstimateReport {
    let n = tally.n.max(1);
    let p = tally.avoided as f64 / n as f64;
    let target = avoidance_probability(&hull.derivatives, law);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let z = if se > 0.0 { (p - target) / se } else { crate::stats::binomial_score(tally.avoided, n, target) };
    EstimateReport { hull: hull.name.clone(), law, n: tally.n, avoided: tally.avoided, p_hat: p, se, target, z, dt, seed, wall_ms: None }
}

/// Sequential estimate for each hull; parallel callers split the index range
/// with [`tally`] and merge.
pub fn mc_estimate_avoidance(law: RestrictionLaw, hulls: &[TestHull], n: u64, cfg: &McConfig, seed: u64) -> Result<Vec<EstimateReport>> {
    hulls.iter().map(|h| Ok(report(law, h, tally(law, h, cfg, seed, 0..n)?, cfg.flow.dt, seed))).collect()
}

/// Weighted least squares for `log p̂ = α log d0 + β log d1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regression {
    pub alpha: f64,
    pub beta: f64,
    pub cov: [[f64; 2]; 2],
}

impl Regression {
    /// `√(δᵀ Σ⁻¹ δ)` for `δ = (α̂ − α, β̂ − β)`.
    pub fn mahalanobis(&self, law: RestrictionLaw) -> f64 {
        let (da, db) = (self.alpha - law.alpha, self.beta - law.beta);
        let [[a, b], [c, d]] = self.cov;
        let det = a * d - b * c;
        ((d * da * da - (b + c) * da * db + a * db * db) / det).sqrt()
    }
}

pub fn regress(reports: &[EstimateReport], hulls: &[TestHull]) -> Result<Regression> {
    let mut xtx = [[0.0; 2]; 2];
    let mut xty = [0.0; 2];
    for (r, h) in reports.iter().zip(hulls) {
        if r.avoided == 0 || r.avoided == r.n {
            continue;
        }
        let p = r.p_hat;
        let var = (1.0 - p) / (r.n as f64 * p);
        let x = [h.derivatives.d0.ln(), h.derivatives.d1.ln()];
        let y = p.ln();
        for i in 0..2 {
            xty[i] += x[i] * y / var;
            for j in 0..2 {
                xtx[i][j] += x[i] * x[j] / var;
            }
        }
    }
    let det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0];
    if !(det.abs() > 0.0) {
        return Err(Error::Numerical("degenerate regression design".into()));
    }
    let inv = [[xtx[1][1] / det, -xtx[0][1] / det], [-xtx[1][0] / det, xtx[0][0] / det]];
    let alpha = inv[0][0] * xty[0] + inv[0][1] * xty[1];
    let beta = inv[1][0] * xty[0] + inv[1][1] * xty[1];
    Ok(Regression { alpha, beta, cov: inv })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    pub rho: f64,
    pub m0: f64,
    /// `|Φ'_A(0)|^{ξ(β)} Φ'_A(1)^β` from the hull's derivatives.
    pub m0_formula: f64,
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub hits: u64,
    /// Mean of `M` evaluated just before the hit was declared.
    pub mean_m_at_hit: f64,
}

/// Running sums of `M_{t∧τ_A}` at the checkpoints; batches merge by addition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MartingaleSums {
    pub n: u64,
    pub sum: Vec<f64>,
    pub sq: Vec<f64>,
    pub hits: u64,
    /// Sum over hitting paths of `M` just before the hit.
    pub at_hit: f64,
}

impl MartingaleSums {
    pub fn merge(mut self, o: MartingaleSums) -> MartingaleSums {
        if self.sum.is_empty() {
            return o;
        }
        for (a, b) in self.sum.iter_mut().zip(&o.sum) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&o.sq) {
            *a += b;
        }
        MartingaleSums { n: self.n + o.n, hits: self.hits + o.hits, at_hit: self.at_hit + o.at_hit, ..self }
    }
}

fn martingale_config(rho: f64, cfg: FlowConfig, t_end: f64) -> Result<FlowConfig> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("the martingale check needs ρ > 0, got {rho}")));
    }
    Ok(FlowConfig { rho, stop_ratio: 0.0, t_max: cfg.t_max.max(t_end), ..cfg })
}

/// `checkpoints` equally spaced times in `(0, t_end]`.
pub fn checkpoint_times(t_end: f64, checkpoints: usize) -> Vec<f64> {
    (1..=checkpoints).map(|k| t_end * k as f64 / checkpoints as f64).collect()
}

/// Paths `index ∈ range` of the martingale check.
pub fn martingale_sums(rho: f64, hull: &TestHull, cfg: FlowConfig, times: &[f64], seed: u64, range: Range<u64>) -> Result<MartingaleSums> {
    let cfg = martingale_config(rho, cfg, times.last().copied().unwrap_or(0.0))?;
    let mut out = MartingaleSums { sum: alloc::vec![0.0; times.len()], sq: alloc::vec![0.0; times.len()], ..Default::default() };
    for i in range {
        let mut rng = path_rng(seed, i);
        let mut p = FlowPath::new(hull, cfg)?;
        p.record_pre_hit = true;
        for (k, &t) in times.iter().enumerate() {
            p.advance(t, false, &mut rng)?;
            let m = p.martingale()?;
            out.sum[k] += m;
            out.sq[k] += m * m;
        }
        if p.status() == Status::Hit {
            out.hits += 1;
            out.at_hit += p.pre_hit.unwrap_or(0.0);
        }
        out.n += 1;
    }
    Ok(out)
}

/// Flatness report from merged sums.
pub fn martingale_report(rho: f64, hull: &TestHull, cfg: FlowConfig, times: Vec<f64>, sums: &MartingaleSums) -> Result<MartingaleReport> {
    let cfg = martingale_config(rho, cfg, times.last().copied().unwrap_or(0.0))?;
    let (_, _, beta) = exponents_of_rho(rho)?;
    let m0 = FlowPath::new(hull, cfg)?.martingale()?;
    let m0_formula = avoidance_probability(&hull.derivatives, RestrictionLaw { alpha: xi(beta)?, beta });
    let nf = sums.n as f64;
    let means: Vec<f64> = sums.sum.iter().map(|s| s / nf).collect();
    let ses: Vec<f64> = sums.sq.iter().zip(&means).map(|(q, m)| ((q / nf - m * m).max(0.0) / (nf - 1.0)).sqrt()).collect();
    let z: Vec<f64> = means.iter().zip(&ses).map(|(m, s)| (m - m0) / s).collect();
    let max_abs_z = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mean_m_at_hit = if sums.hits > 0 { sums.at_hit / sums.hits as f64 } else { 0.0 };
    Ok(MartingaleReport { rho, m0, m0_formula, times, means, ses, z, max_abs_z, hits: sums.hits, mean_m_at_hit })
}

/// Sample means of `M_{t∧τ_A}` on `checkpoints` equally spaced times in `(0, t_end]`.
pub fn verify_martingale(rho: f64, hull: &TestHull, cfg: FlowConfig, t_end: f64, checkpoints: usize, n: u64, seed: u64) -> Result<MartingaleReport> {
    let times = checkpoint_times(t_end, checkpoints);
    let sums = martingale_sums(rho, hull, cfg, &times, seed, 0..n)?;
    martingale_report(rho, hull, cfg, times, &sums)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChordalLimitReport {
    pub law: RestrictionLaw,
    pub eps: Vec<f64>,
    /// `|Φ'_ε(−1+ε)|^α Φ'_ε(1)^β` for the pulled-back hull at each ε.
    pub analytic: Vec<f64>,
    /// `Ψ'_A(1)^β`.
    pub limit: f64,
    pub monotone: bool,
    pub mc: Vec<EstimateReport>,
}

/// The hull `A = B(x, r) ∩ H`, viewed in U through the Cayley map, under
/// `f_ε`; in H the map `f_ε` is the dilation by `2/ε − 1`.
pub fn chordal_limit_hull(x: f64, r: f64, eps: f64) -> Result<TestHull> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    let s = 2.0 / eps - 1.0;
    TestHull::half_disc(x / s, r / s)
}

/// Analytic ladder plus Monte Carlo at each ε (skipped when `n = 0`).
pub fn chordal_limit_experiment(law: RestrictionLaw, x: f64, r: f64, eps: &[f64], n: u64, cfg: &McConfig, seed: u64) -> Result<ChordalLimitReport> {
    if !(r > 0.0 && r < x.abs()) {
        return Err(Error::invalid("the hull must avoid ±1"));
    }
    let limit = (1.0 - r * r / (x * x)).powf(law.beta);
    let mut analytic = Vec::new();
    let mut mc = Vec::new();
    for &e in eps {
        let h = chordal_limit_hull(x, r, e)?;
        analytic.push(avoidance_probability(&h.derivatives, law));
        if n > 0 {
            mc.push(report(law, &h, tally(law, &h, cfg, seed, 0..n)?, cfg.flow.dt, seed));
        }
    }
    let gaps: Vec<f64> = analytic.iter().map(|a| (a - limit).abs()).collect();
    let monotone = gaps.windows(2).all(|g| g[1] < g[0]);
    Ok(ChordalLimitReport { law, eps: eps.to_vec(), analytic, limit, monotone, mc })
}

/// The analytic avoidance value of a hull for a law.
pub fn target(law: RestrictionLaw, hull: &RadialHull) -> f64 {
    avoidance_probability(hull, law)
}

/// Restriction property: `P[K avoids A ∪ Φ_A⁻¹(B)] = P[K avoids A]·P[K avoids B]`,
/// i.e. `P[Φ_A(K) ∩ B = ∅ | K ∩ A = ∅] = P[K ∩ B = ∅]`. Returns the
/// three estimates and the z-score of the product identity.
pub fn restriction_property(law: RestrictionLaw, a: &TestHull, b: &TestHull, n: u64, cfg: &McConfig, seed: u64) -> Result<([f64; 3], f64)> {
    let ab = a.with_preimage(b)?;
    let ta = tally(law, a, cfg, seed, 0..n)?;
    let tb = tally(law, b, cfg, seed.wrapping_add(1), 0..n)?;
    let tab = tally(law, &ab, cfg, seed.wrapping_add(2), 0..n)?;
    Ok(product_z(ta, tb, tab))
}

/// Estimates `[p_A, p_B, p_{A∪Φ_A⁻¹(B)}]` from independent tallies and the
/// delta-method z-score of `p_{A∪Φ_A⁻¹(B)} = p_A·p_B`.
pub fn product_z(ta: Tally, tb: Tally, tab: Tally) -> ([f64; 3], f64) {
    let p = |t: Tally| t.avoided as f64 / t.n.max(1) as f64;
    let (pa, pb, pab) = (p(ta), p(tb), p(tab));
    let var = pab * (1.0 - pab) / tab.n as f64 + pb * pb * pa * (1.0 - pa) / ta.n as f64 + pa * pa * pb * (1.0 - pb) / tb.n as f64;
    ([pa, pb, pab], (pab - pa * pb) / var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sle() -> RestrictionLaw {
        RestrictionLaw::new(5.0 / 48.0, 0.625)
    }

    #[test]
    fn empty_hull_is_always_avoided() {
        let r = mc_estimate_avoidance(sle(), &[TestHull::empty()], 50, &McConfig::default(), 0).unwrap();
        assert_eq!((r[0].p_hat, r[0].avoided, r[0].target), (1.0, 50, 1.0));
    }

    #[test]
    fn tallies_merge_across_splits() {
        let h = TestHull::perfect(PI / 2.0, 0.2).unwrap();
        let cfg = McConfig::default();
        let whole = tally(sle(), &h, &cfg, 5, 0..40).unwrap();
        let split = tally(sle(), &h, &cfg, 5, 0..17).unwrap().merge(tally(sle(), &h, &cfg, 5, 17..40).unwrap());
        assert_eq!(whole, split);
    }

    #[test]
    fn inadmissible_laws_are_rejected() {
        assert!(construction_of(RestrictionLaw::new(0.2, 0.625)).is_err());
        assert_eq!(construction_of(sle()).unwrap(), (0.0, 0.0));
        let (rho, c) = construction_of(RestrictionLaw::new(0.0, 2.0)).unwrap();
        assert!((rho - 2.0).abs() < 1e-12 && (c - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_flow_estimate_is_consistent() {
        let h = TestHull::perfect(PI / 2.0, 0.2).unwrap();
        let r = mc_estimate_avoidance(sle(), &[h], 400, &McConfig::default(), 11).unwrap();
        assert!((r[0].target - 0.9011).abs() < 1e-4);
        assert!(r[0].z.abs() < 4.0, "{:?}", r[0]);
    }

    #[test]
    fn small_geometric_estimate_is_consistent() {
        let h = TestHull::perfect(PI / 2.0, 0.2).unwrap();
        let cfg = SampleConfig { dt: 1e-4, ..Default::default() };
        let t = geometric_tally(sle(), std::slice::from_ref(&h), &cfg, 12, 0..200).unwrap();
        let r = report(sle(), &h, t[0], cfg.dt, 12);
        assert!(r.z.abs() < 4.0, "{r:?}");
    }

    #[test]
    fn martingale_starts_at_the_formula() {
        for rho in [0.5, 2.0] {
            let h = TestHull::perfect(PI, 0.15).unwrap();
            let r = verify_martingale(rho, &h, FlowConfig::default(), 0.1, 2, 20, 1).unwrap();
            assert!((r.m0 - r.m0_formula).abs() < 1e-6, "{} vs {}", r.m0, r.m0_formula);
            assert!(r.m0 > 0.0 && r.m0 < 1.0);
        }
        assert!(verify_martingale(0.0, &TestHull::empty(), FlowConfig::default(), 0.1, 2, 2, 1).is_err());
    }

    #[test]
    fn chordal_limit_ladder() {
        let eps = [0.5, 0.25, 0.1, 0.05];
        let a = chordal_limit_experiment(RestrictionLaw::new(0.5, 1.0), 2.0, 0.5, &eps, 0, &McConfig::default(), 0).unwrap();
        assert!(a.monotone);
        assert!((a.limit - (15.0f64 / 16.0)).abs() < 1e-12);
        let gaps: Vec<f64> = a.analytic.iter().map(|v| (v - a.limit).abs()).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
        let b = chordal_limit_experiment(RestrictionLaw::new(-1.0, 1.0), 2.0, 0.5, &eps, 0, &McConfig::default(), 0).unwrap();
        let diff = (a.analytic[3] - b.analytic[3]).abs();
        assert!(diff < gaps[2], "{diff} vs {}", gaps[2]);
        let triv = chordal_limit_hull(2.0, 0.5, 0.1).unwrap();
        assert!(triv.derivatives.d0 > 1.0);
    }

    #[test]
    fn regression_recovers_exact_products() {
        let hulls = [
            TestHull::perfect(PI / 2.0, 0.2).unwrap(),
            TestHull::perfect(PI, 0.1).unwrap(),
            TestHull::perfect(1.0, 0.3).unwrap(),
            TestHull::half_disc(2.0, 0.3).unwrap(),
            TestHull::half_disc(-1.5, 0.4).unwrap(),
        ];
        let law = RestrictionLaw::new(2.0 / 3.0, 2.0);
        let n = 1_000_000u64;
        let reports: Vec<_> = hulls
            .iter()
            .map(|h| {
                let p = avoidance_probability(&h.derivatives, law);
                let avoided = (p * n as f64).round() as u64;
                report(law, h, Tally { n, avoided, hits: n - avoided, steps: 0 }, 1e-4, 0)
            })
            .collect();
        let fit = regress(&reports, &hulls).unwrap();
        assert!((fit.alpha - law.alpha).abs() < 1e-3 && (fit.beta - law.beta).abs() < 1e-3, "{fit:?}");
        assert!(fit.mahalanobis(law) < 1.0);
        assert!(fit.mahalanobis(RestrictionLaw::new(0.3, 1.0)) > 10.0);
    }

    #[test]
    fn preimage_hull_multiplies_derivatives() {
        let a = TestHull::perfect(PI / 2.0, 0.2).unwrap();
        let b = TestHull::half_disc(-2.0, 0.3).unwrap();
        let ab = a.with_preimage(&b).unwrap();
        let (da, db) = (a.derivatives, b.derivatives);
        assert!((ab.derivatives.d0 - da.d0 * db.d0).abs() < 1e-5, "{} vs {}", ab.derivatives.d0, da.d0 * db.d0);
        assert!((ab.derivatives.d1 - da.d1 * db.d1).abs() < 1e-5, "{} vs {}", ab.derivatives.d1, da.d1 * db.d1);
    }
}
