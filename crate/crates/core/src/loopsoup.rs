//! Brownian loops in U that wind around the origin: the escape-mass
//! functional and a truncated Poisson sampler.
//!
//! The loop measure is `dA(z) dt/(2πt²)` times the law of a Brownian bridge
//! of duration `t` rooted at `z`. Loops with non-zero winding about 0 carry
//! mass `log Φ'(0)/6` on the event of leaving a subdomain `U'`, so `μ⁰_U` is
//! taken as six times the winding part.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::geometry::{point_segment_distance, polylines_intersect, segment_distance, segments_intersect, winding_number, BBox};
use crate::sle::{normal, path_rng};
use crate::{Error, Result, C};

/// `μ⁰_U = WINDING_NORMALIZATION · μ^loop|{winding ≠ 0}`.
pub const WINDING_NORMALIZATION: f64 = 6.0;

/// Segments are split while they come within this many `√τ` of a feature.
const REFINE_SIGMAS: f64 = 6.0;
/// Shortest bridge piece produced near the origin.
const TAU_FLOOR: f64 = 1e-12;
/// Shortest bridge piece used when testing hulls.
const HULL_TAU_FLOOR: f64 = 1e-8;
/// Cap on expected proposals per soup.
const MAX_EXPECTED: f64 = 1e6;
/// Durations below this use roots within `4√t` of 0.
const T_SPLIT: f64 = 1.0 / 16.0;

/// `(c·log Φ'(0), Φ'(0)^{−c})`: expected number of loops leaving `U'` and
/// the probability that none does.
pub fn escape_mass(c: f64, inner_map_deriv: f64) -> Result<(f64, f64)> {
    if !(c >= 0.0) {
        return Err(Error::invalid(format!("intensity must be non-negative, got {c}")));
    }
    if !(inner_map_deriv >= 1.0) {
        return Err(Error::invalid(format!("Φ'(0) of a map onto U must be at least 1, got {inner_map_deriv}")));
    }
    Ok((c * inner_map_deriv.ln(), inner_map_deriv.powf(-c)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoupConfig {
    pub intensity: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub resolution: usize,
    pub seed: u64,
}

impl Default for SoupConfig {
    fn default() -> Self {
        SoupConfig { intensity: 1.0, t_min: 1e-3, t_max: 10.0, resolution: 256, seed: 0 }
    }
}

impl SoupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::invalid(format!("intensity must be finite and non-negative, got {}", self.intensity)));
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::invalid(format!("need 0 < t_min < t_max, got {} and {}", self.t_min, self.t_max)));
        }
        if self.resolution < 64 {
            return Err(Error::invalid(format!("bridge resolution must be at least 64, got {}", self.resolution)));
        }
        Ok(())
    }

    /// Loop-measure mass of the proposal region `(small, large)`.
    fn proposal_mass(&self) -> (f64, f64) {
        let ts = T_SPLIT.clamp(self.t_min, self.t_max);
        let small = 8.0 * (ts / self.t_min).ln();
        let large = 0.5 * (1.0 / ts - 1.0 / self.t_max);
        (small, large)
    }

    /// Expected number of proposed bridges per soup.
    pub fn expected_proposals(&self) -> f64 {
        let (s, l) = self.proposal_mass();
        WINDING_NORMALIZATION * self.intensity * (s + l)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopSample {
    pub root: C,
    pub duration: f64,
    /// Closed polyline: the first point is repeated at the end.
    pub points: Vec<C>,
    pub winding: i32,
    /// Whether the loop meets each hull of the sampling `Features`.
    pub hull_hits: Vec<bool>,
}

impl LoopSample {
    pub fn bbox(&self) -> BBox {
        BBox::of(&self.points)
    }

    /// The filled loop meets the polyline `hull`. A hull attached to the
    /// unit circle cannot sit inside a loop contained in U, so crossing the
    /// loop itself is the only way to meet its filling.
    pub fn hits(&self, hull: &[C]) -> bool {
        hull.len() >= 2 && self.bbox().overlaps(&BBox::of(hull)) && polylines_intersect(&self.points, hull)
    }

    /// `p` lies in the domain surrounded by the loop.
    pub fn surrounds(&self, p: C) -> bool {
        winding_number(&self.points, p) != 0
    }
}

/// Hull polylines against which sampled loops are hit-tested.
#[derive(Clone, Debug, Default)]
pub struct Features {
    hulls: Vec<(Vec<C>, BBox)>,
}

impl Features {
    pub fn new(hulls: &[Vec<C>]) -> Self {
        Features { hulls: hulls.iter().map(|h| (h.clone(), BBox::of(h))).collect() }
    }

    pub fn len(&self) -> usize {
        self.hulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hulls.is_empty()
    }
}

fn near_hull(h: &[C], bb: &BBox, a: C, b: C, r: f64) -> bool {
    bb.overlaps_segment(a, b, r) && h.windows(2).any(|s| segment_distance(a, b, s[0], s[1]) < r)
}

fn crosses_hull(h: &[C], bb: &BBox, a: C, b: C) -> bool {
    bb.overlaps_segment(a, b, 0.0) && h.windows(2).any(|s| segments_intersect(a, b, s[0], s[1]))
}

/// Does the bridge piece from `a` to `b` of duration `tau` meet the hull?
/// Resolved by exact midpoint sampling down to `HULL_TAU_FLOOR`.
fn bridge_hits<R: Rng + ?Sized>(h: &[C], bb: &BBox, a: C, b: C, tau: f64, rng: &mut R) -> bool {
    if crosses_hull(h, bb, a, b) {
        return true;
    }
    if tau <= HULL_TAU_FLOOR || !near_hull(h, bb, a, b, REFINE_SIGMAS * tau.sqrt()) {
        return false;
    }
    let mid = (a + b) * 0.5 + C::new(normal(rng), normal(rng)) * (0.25 * tau).sqrt();
    bridge_hits(h, bb, a, mid, 0.5 * tau, rng) || bridge_hits(h, bb, mid, b, 0.5 * tau, rng)
}

/// Truncated soup sampler; every soup is drawn from its own RNG stream.
#[derive(Clone, Debug)]
pub struct SoupSampler {
    config: SoupConfig,
    small: f64,
    large: f64,
}

impl SoupSampler {
    pub fn new(config: SoupConfig) -> Result<Self> {
        config.validate()?;
        if config.expected_proposals() > MAX_EXPECTED {
            return Err(Error::invalid(format!("expected {:.3e} loop proposals exceeds the limit {MAX_EXPECTED:e}", config.expected_proposals())));
        }
        let (small, large) = config.proposal_mass();
        Ok(SoupSampler { config, small, large })
    }

    pub fn config(&self) -> &SoupConfig {
        &self.config
    }

    /// The soup with index `index`, resolved near `features`.
    pub fn sample(&self, index: u64, features: &Features) -> Vec<LoopSample> {
        let mut rng = path_rng(self.config.seed ^ 0x5eed_100b, index);
        self.sample_with(&mut rng, features)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, features: &Features) -> Vec<LoopSample> {
        let mean = self.config.expected_proposals();
        if mean <= 0.0 {
            return Vec::new();
        }
        let count = Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0);
        let p_small = self.small / (self.small + self.large);
        let mut out = Vec::new();
        for _ in 0..count {
            let (t, radius) = if rng.random::<f64>() < p_small {
                let ts = T_SPLIT.clamp(self.config.t_min, self.config.t_max);
                let t = self.config.t_min * (ts / self.config.t_min).powf(rng.random::<f64>());
                (t, 4.0 * t.sqrt())
            } else {
                let ts = T_SPLIT.clamp(self.config.t_min, self.config.t_max);
                let inv = 1.0 / ts - rng.random::<f64>() * (1.0 / ts - 1.0 / self.config.t_max);
                (1.0 / inv, 1.0)
            };
            let root = C::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
            if root.norm() >= 1.0 {
                continue;
            }
            if let Some(l) = bridge_loop(root, t, self.config.resolution, features, rng) {
                out.push(l);
            }
        }
        out
    }
}

/// One soup with the configuration's seed and no hull features.
pub fn sample_soup(config: &SoupConfig) -> Result<Vec<LoopSample>> {
    Ok(SoupSampler::new(*config)?.sample(0, &Features::default()))
}

/// A Brownian bridge of duration `t` at `root`, kept only if it stays in U
/// and winds around 0.
pub fn bridge_loop<R: Rng + ?Sized>(root: C, t: f64, m: usize, features: &Features, rng: &mut R) -> Option<LoopSample> {
    let tau = t / m as f64;
    let sd = tau.sqrt();
    let mut pts = Vec::with_capacity(m + 1);
    let mut z = C::new(0.0, 0.0);
    pts.push(z);
    for _ in 0..m {
        z += C::new(normal(rng), normal(rng)) * sd;
        pts.push(z);
    }
    let drift = z;
    for (k, p) in pts.iter_mut().enumerate() {
        *p = root + *p - drift * (k as f64 / m as f64);
        if p.norm() >= 1.0 {
            return None;
        }
    }
    pts[m] = pts[0];
    // The circle is locally a line at the bridge scale: the piece between
    // two inside points at depths d_a, d_b leaves with probability
    // exp(−2 d_a d_b / τ).
    for s in pts.windows(2) {
        let e = 2.0 * (1.0 - s[0].norm()) * (1.0 - s[1].norm()) / tau;
        if e < 40.0 && rng.random::<f64>() < (-e).exp() {
            return None;
        }
    }
    let mut out = Vec::with_capacity(m + 8);
    out.push(pts[0]);
    for k in 0..m {
        refine_origin(pts[k], pts[k + 1], tau, rng, &mut out);
    }
    let last = out.len() - 1;
    let winding = winding_number(&out[..last], C::new(0.0, 0.0));
    if winding == 0 {
        return None;
    }
    let hull_hits = features
        .hulls
        .iter()
        .map(|(h, bb)| {
            h.len() >= 2 && BBox::of(&out).inflate(1e-3).overlaps(bb) && {
                let mut hit = false;
                for k in 0..m {
                    if bridge_hits(h, bb, pts[k], pts[k + 1], tau, rng) {
                        hit = true;
                        break;
                    }
                }
                hit
            }
        })
        .collect();
    Some(LoopSample { root, duration: t, points: out, winding, hull_hits })
}

/// Pushes the points after `a` up to and including `b`, inserting exact
/// bridge midpoints while the piece passes near the origin.
fn refine_origin<R: Rng + ?Sized>(a: C, b: C, tau: f64, rng: &mut R, out: &mut Vec<C>) {
    if tau > TAU_FLOOR && point_segment_distance(C::new(0.0, 0.0), a, b) < REFINE_SIGMAS * tau.sqrt() {
        let mid = (a + b) * 0.5 + C::new(normal(rng), normal(rng)) * (0.25 * tau).sqrt();
        refine_origin(a, mid, 0.5 * tau, rng, out);
        refine_origin(mid, b, 0.5 * tau, rng, out);
    } else {
        out.push(b);
    }
}

/// Mean number of loops per soup meeting `hull`, over `n` soups.
pub fn mean_escape_count(sampler: &SoupSampler, hull: &[C], n: u64) -> (f64, f64) {
    let features = Features::new(&[hull.to_vec()]);
    let counts: Vec<f64> = (0..n).map(|i| sampler.sample(i, &features).iter().filter(|l| l.hull_hits[0]).count() as f64).collect();
    let m = crate::stats::mean(&counts);
    (m, (crate::stats::variance(&counts) / n as f64).sqrt())
}
