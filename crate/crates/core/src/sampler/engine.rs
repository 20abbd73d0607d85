//! Monte Carlo for `P[K ∩ A = ∅]`: the radial driver is simulated and the
//! hull is pushed forward under the Loewner slit maps, so the curve itself
//! is never pulled back.
//!
//! Each step of length `h` uses two slits of duration `h/2` placed at
//! `W̄ ± σ`, where `W̄` is a draw of the driver's time average over the step
//! and `σ²` its mean square deviation from that average. The step is
//! `dt·min(100, (d/0.08)²)` when the image hull is at distance `d` from the tip.
//!
//! A path ends at a hit, at `t_max`, or once the image hull is tiny compared
//! with its distance to the tip; a path that has not hit survives with
//! probability `M_t`, the bounded martingale
//! `|h'(0)|^α |h'(e^{iW})|^{5/8} |h'(e^{iV})|^γ Z^{3ρ/8}`.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::hull::{components_map, Component, TestHull};
use crate::conformal::radial_slit_eval;
use crate::conformal::radial_slit_tip;
use crate::geometry::{point_segment_distance, segments_intersect, BBox};
use crate::restriction::exponents_of_rho;
use crate::sle::{normal, ForcePoint, RadialStepper};
use crate::{Error, Result, C};

pub const KAPPA: f64 = 8.0 / 3.0;
const REFINE_RATIO: f64 = 0.2;
const COARSEN_RATIO: f64 = 0.05;
const MIN_SEGMENT: f64 = 1e-10;
const MAX_POINTS: usize = 4096;
const STEP_GAIN: f64 = 156.25;
const STEP_CAP: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    /// Radial SLE_{8/3}(ρ) with force point at `1⁻`; `ρ = 0` is plain SLE_{8/3}.
    pub rho: f64,
    /// Step scale: the Loewner step is `dt · min(100, (d / 0.08)²)` at tip distance `d`.
    pub dt: f64,
    pub t_max: f64,
    /// The tip is declared to touch the hull within this distance.
    pub d_hit: f64,
    /// Early stop once `diam(A') < stop_ratio · dist(tip, A')`; zero disables.
    pub stop_ratio: f64,
    /// The early stop is not considered before this time.
    pub stop_after: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { rho: 0.0, dt: 1e-4, t_max: 8.0, d_hit: 1e-5, stop_ratio: 0.05, stop_after: 0.5 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.dt > 0.0 && self.t_max > 0.0 && self.d_hit > 0.0 && self.stop_ratio >= 0.0 && self.stop_after >= 0.0) {
            return Err(Error::invalid(alloc::format!("invalid flow configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Track {
    /// The original polyline.
    source: Vec<C>,
    region: bool,
    /// Positions along `source` (vertex index plus fraction) of the tracked points.
    param: Vec<f64>,
    cur: Vec<C>,
}

impl Track {
    fn source_at(&self, s: f64) -> C {
        let k = (s.floor() as usize).min(self.source.len() - 2);
        let f = s - k as f64;
        self.source[k] * (1.0 - f) + self.source[k + 1] * f
    }

    fn is_base(&self, i: usize) -> bool {
        i == 0 || (self.region && i + 1 == self.cur.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Hit,
    Stopped,
    Horizon,
}

/// One path of the driver together with the image `g_t(A)` of the hull.
#[derive(Clone, Debug)]
pub struct FlowPath {
    cfg: FlowConfig,
    stepper: RadialStepper,
    t: f64,
    tracks: Vec<Track>,
    history: Vec<(f64, f64)>,
    status: Status,
    steps: usize,
    /// Evaluate `M` just before a hit is declared.
    pub record_pre_hit: bool,
    pub pre_hit: Option<f64>,
}

impl FlowPath {
    pub fn new(hull: &TestHull, cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let force = if cfg.rho > 0.0 { ForcePoint::Left } else { ForcePoint::None };
        let stepper = RadialStepper::new(KAPPA, cfg.rho, force, 0.0)?;
        let tracks = hull
            .components
            .iter()
            .map(|c| Track {
                source: c.points.clone(),
                region: c.region,
                param: (0..c.points.len()).map(|k| k as f64).collect(),
                cur: c.points.clone(),
            })
            .collect();
        let mut p =
            FlowPath { cfg, stepper, t: 0.0, tracks, history: Vec::new(), status: Status::Running, steps: 0, record_pre_hit: false, pre_hit: None };
        if p.tracks.is_empty() {
            p.status = Status::Stopped;
        }
        if p.distance() < cfg.d_hit {
            p.status = Status::Hit;
        }
        Ok(p)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tip(&self) -> C {
        C::from_polar(1.0, self.stepper.w)
    }

    pub fn force_point(&self) -> C {
        C::from_polar(1.0, self.stepper.v)
    }

    /// The image hull `g_t(A)`.
    pub fn image(&self) -> Vec<Component> {
        self.tracks.iter().map(|t| Component { points: t.cur.clone(), region: t.region }).collect()
    }

    fn refs(&self) -> ([C; 2], usize) {
        if self.cfg.rho > 0.0 {
            ([self.tip(), self.force_point()], 2)
        } else {
            ([self.tip(), self.tip()], 1)
        }
    }

    /// Distance from the tip to the image hull.
    pub fn distance(&self) -> f64 {
        let tip = self.tip();
        self.tracks
            .iter()
            .map(|t| t.cur.windows(2).map(|s| point_segment_distance(tip, s[0], s[1])).fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    fn extent(&self) -> f64 {
        let mut bb = BBox::of(&[]);
        for t in &self.tracks {
            let b = BBox::of(&t.cur);
            bb = BBox { lo: C::new(bb.lo.re.min(b.lo.re), bb.lo.im.min(b.lo.im)), hi: C::new(bb.hi.re.max(b.hi.re), bb.hi.im.max(b.hi.im)) };
        }
        (bb.hi - bb.lo).norm()
    }

    fn slit_hits(&self, w: f64, tau: f64) -> bool {
        let a = C::from_polar(1.0, w);
        let b = C::from_polar(radial_slit_tip(tau), w);
        self.tracks.iter().any(|t| BBox::of(&t.cur).overlaps_segment(a, b, 0.0) && t.cur.windows(2).any(|s| segments_intersect(a, b, s[0], s[1])))
    }

    fn apply_slit(&mut self, w: f64, tau: f64) -> Result<()> {
        for t in self.tracks.iter_mut() {
            let n = t.cur.len();
            for i in 0..n {
                let (v, _) = radial_slit_eval(w, tau, t.cur[i])?;
                t.cur[i] = if i == 0 || (t.region && i + 1 == n) { v / v.norm() } else { v };
            }
        }
        self.history.push((w, tau));
        Ok(())
    }

    fn replay(&self, p: C, on_circle: bool) -> Result<C> {
        let mut v = p;
        for &(w, tau) in &self.history {
            v = radial_slit_eval(w, tau, v)?.0;
            if on_circle {
                v /= v.norm();
            }
        }
        Ok(v)
    }

    /// Keeps segment lengths between `COARSEN_RATIO` and `REFINE_RATIO`
    /// times their distance to the tip (and to the force point when ρ > 0).
    fn adapt(&mut self) -> Result<()> {
        let (refs, nr) = self.refs();
        let dist = |a: C, b: C| refs[..nr].iter().map(|&r| point_segment_distance(r, a, b)).fold(f64::INFINITY, f64::min);
        for ti in 0..self.tracks.len() {
            let mut i = 0;
            while i + 1 < self.tracks[ti].cur.len() {
                let t = &self.tracks[ti];
                let (a, b) = (t.cur[i], t.cur[i + 1]);
                let len = (b - a).norm();
                if len > MIN_SEGMENT && len > REFINE_RATIO * dist(a, b) && t.cur.len() < MAX_POINTS {
                    let s = 0.5 * (t.param[i] + t.param[i + 1]);
                    let p = self.replay(t.source_at(s), false)?;
                    let t = &mut self.tracks[ti];
                    t.cur.insert(i + 1, p);
                    t.param.insert(i + 1, s);
                    continue;
                }
                i += 1;
            }
            let t = &mut self.tracks[ti];
            let min_len = if t.region { 3 } else { 2 };
            let mut i = 1;
            while i + 1 < t.cur.len() && t.cur.len() > min_len {
                if t.is_base(i) {
                    i += 1;
                    continue;
                }
                let (a, m, b) = (t.cur[i - 1], t.cur[i], t.cur[i + 1]);
                let d = dist(a, b);
                if (b - a).norm() < COARSEN_RATIO * d && point_segment_distance(m, a, b) < 0.01 * COARSEN_RATIO * d {
                    t.cur.remove(i);
                    t.param.remove(i);
                } else {
                    i += 1;
                }
            }
        }
        Ok(())
    }

    fn declare_hit(&mut self) -> Result<()> {
        if self.record_pre_hit {
            self.pre_hit = Some(self.martingale()?);
        }
        self.status = Status::Hit;
        Ok(())
    }

    /// One Loewner step, at most up to time `until`.
    fn step<R: Rng + ?Sized>(&mut self, until: f64, allow_stop: bool, rng: &mut R) -> Result<()> {
        let d = self.distance();
        if d < self.cfg.d_hit {
            return self.declare_hit();
        }
        if allow_stop && self.cfg.stop_ratio > 0.0 && self.t >= self.cfg.stop_after && self.extent() < self.cfg.stop_ratio * d {
            self.status = Status::Stopped;
            return Ok(());
        }
        let h = (self.cfg.dt * (d * d * STEP_GAIN).min(STEP_CAP)).min(until - self.t);
        let w0 = self.stepper.w;
        self.stepper.step(h, rng);
        let w1 = self.stepper.w;
        let dw = w1 - w0;
        let wbar = 0.5 * (w0 + w1) + (KAPPA * h / 12.0).sqrt() * normal(rng);
        let sigma = (dw * dw / 12.0 + KAPPA * h / 12.0).sqrt();
        let s = if dw >= 0.0 { 1.0 } else { -1.0 };
        for w in [wbar - s * sigma, wbar + s * sigma] {
            if self.slit_hits(w, 0.5 * h) {
                return self.declare_hit();
            }
            self.apply_slit(w, 0.5 * h)?;
        }
        self.t += h;
        self.steps += 1;
        self.adapt()
    }

    /// Runs until `until`, a hit, or (if `allow_stop`) the early-stop rule.
    pub fn advance<R: Rng + ?Sized>(&mut self, until: f64, allow_stop: bool, rng: &mut R) -> Result<Status> {
        let until = until.min(self.cfg.t_max);
        while self.status == Status::Running && self.t < until - 1e-15 {
            self.step(until, allow_stop, rng)?;
        }
        if self.status == Status::Running && self.t >= self.cfg.t_max - 1e-15 {
            self.status = Status::Horizon;
        }
        Ok(self.status)
    }

    /// `M_t`, zero after a hit.
    pub fn martingale(&self) -> Result<f64> {
        if self.status == Status::Hit {
            return Ok(0.0);
        }
        if self.tracks.is_empty() {
            return Ok(1.0);
        }
        let (alpha, gamma, _) = exponents_of_rho(self.cfg.rho)?;
        // Components squeezed to a boundary point act as the identity.
        let image: Vec<Component> = self.image().into_iter().filter(|c| c.points.iter().any(|z| (z - c.points[0]).norm() > MIN_SEGMENT)).collect();
        if image.is_empty() {
            return Ok(1.0);
        }
        let g = components_map(&image)?;
        let (_, d0) = g.eval(C::new(0.0, 0.0))?;
        let (gw, dw) = g.eval(self.tip())?;
        let mut m = d0.norm().powf(alpha) * dw.norm().powf(0.625);
        if self.cfg.rho > 0.0 {
            let (gv, dv) = g.eval(self.force_point())?;
            let mut a = (gw / gv).arg();
            if a <= 0.0 {
                a += 2.0 * PI;
            }
            let z = (0.5 * a).sin() / self.stepper.theta.sin();
            m *= dv.norm().powf(gamma) * z.powf(0.375 * self.cfg.rho);
        }
        if !m.is_finite() {
            return Err(Error::Numerical(alloc::format!("martingale value {m} at t = {}", self.t)));
        }
        Ok(m)
    }
}

/// Outcome of one sample path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathOutcome {
    pub avoided: bool,
    pub status: Status,
    pub stop_time: f64,
    /// Conditional avoidance probability when the path ended.
    pub survival: f64,
    pub steps: usize,
}

/// Runs one path to its end and draws the avoidance event.
pub fn run_path<R: Rng + ?Sized>(hull: &TestHull, cfg: FlowConfig, rng: &mut R) -> Result<PathOutcome> {
    let mut p = FlowPath::new(hull, cfg)?;
    let status = p.advance(cfg.t_max, true, rng)?;
    let survival = p.martingale()?.min(1.0);
    let avoided = status != Status::Hit && (survival >= 1.0 || rng.random::<f64>() < survival);
    Ok(PathOutcome { avoided, status, stop_time: p.time(), survival, steps: p.steps() })
}
