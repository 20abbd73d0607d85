//! Explicit samples of K.
//!
//! The right boundary is a radial SLE_{8/3}(ρ) from 1 to 0 with force point
//! at `1⁻`. Given it, the left boundary is a chordal SLE_{8/3}(ρ−2) from
//! `1⁻` to the tip in the slit domain, run in the coordinates of `g_T`
//! where the slit domain is the unit disc again. Loops of an independent
//! soup are attached afterwards.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::construction_of;
use super::engine::KAPPA;
use super::hull::TestHull;
use crate::conformal::{Mobius, SlitMapChain};
use crate::geometry::{point_in_polygon, polylines_intersect, BBox};
use crate::loewner::{slit, slit_tip, Trace};
use crate::loopsoup::{Features, LoopSample, SoupConfig, SoupSampler};
use crate::restriction::{rho_of_beta, RestrictionLaw};
use crate::sle::{path_rng, ChordalStepper, ForcePoint, RadialStepper};
use crate::{Domain, Error, Result, C};

/// Largest radial step.
const H_MAX: f64 = 0.02;
/// The left boundary stops this close to the tip in `g_T` coordinates.
const LEFT_STOP: f64 = 1e-2;
const MAX_LEFT_STEPS: usize = 20_000;
/// Smallest step as a fraction of the initial one.
const MIN_STEP: f64 = 1.0 / 256.0;
/// Angular offset of the left boundary's start from the base of `η^R`.
const BASE_OFFSET: f64 = 1e-9;
const STREAM: u64 = 0x6b5a_11e5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    /// Initial radial step. Later steps adapt so that consecutive trace
    /// points are about `√(κ·dt)·min(1, 4|z|)` apart in the disc.
    pub dt: f64,
    pub t_max: f64,
    /// The right boundary stops once its tip is this close to 0.
    pub r_stop: f64,
    /// `intensity` and `seed` are overwritten.
    pub soup: SoupConfig,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { dt: 5e-5, t_max: 8.0, r_stop: 1e-3, soup: SoupConfig::default() }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.r_stop > 0.0 && self.r_stop < 1.0) {
            return Err(Error::invalid(alloc::format!("invalid sample configuration {self:?}")));
        }
        Ok(())
    }
}

/// A sample of K: the two boundary curves, the region between them, and
/// the attached loops.
#[derive(Clone, Debug)]
pub struct SampleK {
    pub rho: f64,
    /// `η^R` from 1 towards 0.
    pub right: Trace,
    /// `η^L` from `1⁻` towards 0, in chordal capacity time.
    pub left: Trace,
    /// Closed polygon: `η^R`, then 0, then `η^L` reversed.
    pub region: Vec<C>,
    pub loops: Vec<LoopSample>,
}

impl SampleK {
    pub fn bbox(&self) -> BBox {
        BBox::of(&self.region)
    }
}

/// Next step from the last one and the spacing it produced.
fn adapt(h: f64, spacing: f64, target: f64, lo: f64, hi: f64) -> f64 {
    let gain = if spacing > 0.0 { (target / spacing).powi(2).clamp(0.25, 4.0) } else { 4.0 };
    (h * gain).clamp(lo, hi)
}

/// Tip of the newest slit pulled back through all earlier factors.
fn pull_back(maps: &[crate::conformal::Elementary], mut p: C) -> C {
    for m in maps.iter().rev() {
        p = m.inverse(p);
    }
    p
}

fn right_boundary<R: Rng + ?Sized>(rho: f64, cfg: &SampleConfig, rng: &mut R) -> Result<(Trace, SlitMapChain, f64, f64)> {
    let force = if rho > 0.0 { ForcePoint::Left } else { ForcePoint::None };
    let mut st = RadialStepper::new(KAPPA, rho, force, 0.0)?;
    let mut maps = Vec::new();
    let mut times = vec![0.0];
    let mut points = vec![C::new(1.0, 0.0)];
    let (mut t, mut u, mut u0) = (0.0, 0.0, None);
    let delta = (KAPPA * cfg.dt).sqrt();
    let mut next = cfg.dt;
    while t < cfg.t_max - 1e-15 {
        let h = next.min(cfg.t_max - t);
        let w0 = st.w;
        st.step(h, rng);
        u = 0.5 * (w0 + st.w);
        u0.get_or_insert(u);
        let tip = pull_back(&maps, slit_tip(Domain::Disc, u, h, 0.0));
        maps.push(slit(Domain::Disc, u, h));
        t += h;
        if !tip.is_finite() {
            return Err(Error::Numerical(alloc::format!("right boundary left the disc at t = {t}")));
        }
        let spacing = (tip - points[points.len() - 1]).norm();
        next = adapt(h, spacing, delta * (4.0 * tip.norm()).min(1.0), MIN_STEP * cfg.dt, H_MAX);
        times.push(t);
        points.push(tip);
        if tip.norm() < cfg.r_stop {
            break;
        }
    }
    let mut chain = SlitMapChain::identity(Domain::Disc);
    for m in maps {
        chain.push(m);
    }
    // The chain's own image of `1⁻`; the stepper's `V` drifts from it by the
    // discretization error, which `g_T^{-1}` magnifies along the slit.
    let v = chain.value(C::from_polar(1.0, u0.unwrap_or(0.0) - BASE_OFFSET))?.arg();
    Ok((Trace { domain: Domain::Disc, times, points }, chain, v, u))
}

/// Chordal SLE_{8/3}(ρ−2) in `U` from `e^{iv}` to `e^{iw}` with the force
/// point on the arc running counterclockwise from `e^{iv}`, pulled back by
/// `g_T^{-1}`.
fn left_boundary<R: Rng + ?Sized>(rho: f64, chain: &SlitMapChain, v: f64, w: f64, cfg: &SampleConfig, rng: &mut R) -> Result<Trace> {
    let a = C::from_polar(1.0, v);
    let b = C::from_polar(1.0, w);
    let phi = num_traits::Euclid::rem_euclid(&(w - v), &(2.0 * PI));
    let m = C::from_polar(1.0, v + 0.5 * phi);
    let q = (m - a) / (m - b);
    let r = q.conj() / q.norm();
    let to_h = Mobius::new(r, -r * a, C::new(1.0, 0.0), -b)?;
    if !(to_h.apply(C::new(0.0, 0.0)).im > 0.0) {
        return Err(Error::Numerical(alloc::format!("left boundary frame is reversed (v = {v}, w = {w})")));
    }
    let from_h = to_h.inverse();
    // Near `1⁻` the slit domain has exponentially small harmonic measure, so
    // the chordal curve starts at the scale whose preimage is about √dt from
    // the base of `η^R`.
    let base = chain.inverse(a);
    let reach = |s: f64| (chain.inverse(from_h.apply(C::new(0.0, s))) - base).norm();
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    if reach(1.0) <= cfg.dt.sqrt() {
        lo = 0.0;
    } else {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if reach(mid.exp()) > cfg.dt.sqrt() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let s2 = (2.0 * lo).exp() / 4.0;
    let delta = (KAPPA * cfg.dt).sqrt();
    let mut next = s2;

    let mut st = ChordalStepper::new(KAPPA, rho - 2.0, ForcePoint::Right, 0.0)?;
    let mut maps = Vec::new();
    let mut times = vec![0.0];
    let mut points = vec![C::new(1.0, 0.0)];
    let mut t = 0.0;
    for _ in 0..MAX_LEFT_STEPS {
        let h = next;
        let w0 = st.w;
        st.step(h, rng);
        let u = 0.5 * (w0 + st.w);
        let tip = pull_back(&maps, slit_tip(Domain::HalfPlane, u, h, 0.0));
        maps.push(slit(Domain::HalfPlane, u, h));
        t += h;
        let z = from_h.apply(tip);
        let p = chain.inverse(z);
        if !p.is_finite() {
            return Err(Error::Numerical(alloc::format!("left boundary left the disc at t = {t}")));
        }
        let spacing = (p - points[points.len() - 1]).norm();
        next = adapt(h, spacing, delta * (4.0 * p.norm()).min(1.0), MIN_STEP * s2, 0.25 * t.max(s2));
        times.push(t);
        points.push(p);
        if (z - b).norm() < LEFT_STOP {
            break;
        }
    }
    Ok(Trace { domain: Domain::Disc, times, points })
}

fn assemble(rho: f64, right: Trace, left: Trace) -> SampleK {
    let mut region = right.points.clone();
    region.push(C::new(0.0, 0.0));
    region.extend(left.points.iter().rev());
    SampleK { rho, right, left, region, loops: Vec::new() }
}

/// A sample of `P(ξ(β), β)` for path `index`.
pub fn sample_max_restriction(beta: f64, cfg: &SampleConfig, seed: u64, index: u64) -> Result<SampleK> {
    cfg.validate()?;
    let rho = rho_of_beta(beta)?;
    if !(rho >= 0.0) {
        return Err(Error::invalid(alloc::format!("two-sided samples need beta >= 5/8, got {beta}")));
    }
    let mut rng = path_rng(seed ^ STREAM, index);
    let (right, chain, v, w) = right_boundary(rho, cfg, &mut rng)?;
    // At ρ = 0 the left boundary coincides with the right one.
    let left = if rho > 0.0 { left_boundary(rho, &chain, v, w, cfg, &mut rng)? } else { right.clone() };
    Ok(assemble(rho, right, left))
}

/// A sample of an admissible law: the maximal sample for its `β` with the
/// loops of a soup of intensity `ξ(β) − α` attached.
pub fn sample_restriction(law: RestrictionLaw, cfg: &SampleConfig, seed: u64, index: u64) -> Result<SampleK> {
    let (_, c) = construction_of(law)?;
    let mut k = sample_max_restriction(law.beta, cfg, seed, index)?;
    if c > 0.0 {
        let soup = SoupSampler::new(SoupConfig { intensity: c, seed, ..cfg.soup })?;
        k.loops = soup.sample(index, &Features::default());
    }
    Ok(k)
}

/// `K` meets the hull.
pub fn hit_test(k: &SampleK, hull: &TestHull) -> bool {
    let kb = k.bbox();
    let mut closed = k.region.clone();
    closed.push(k.region[0]);
    hull.components.iter().any(|c| {
        let poly = c.polygon();
        let cb = BBox::of(&poly);
        let inside = |p: &C| c.region && cb.contains(*p) && point_in_polygon(*p, &poly);
        (kb.overlaps(&cb) && (polylines_intersect(&closed, &c.points) || k.region.iter().any(inside)))
            || k.loops.iter().any(|l| l.hits(&c.points) || l.points.iter().any(inside))
    })
}
