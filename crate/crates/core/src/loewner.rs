//! Forward Loewner flows, trace extraction and slit-map chains.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::conformal::{radial_slit_tip, Elementary, SlitMapChain};
use crate::{Domain, Error, Result, C};

const ONE: C = C::new(1.0, 0.0);

/// A driving function sampled on the uniform grid `t_k = k·dt`, linearly
/// interpolated in between. Radial drivers are unwrapped angles.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivingPath {
    dt: f64,
    values: Vec<f64>,
}

impl DrivingPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if values.is_empty() {
            return Err(Error::invalid("driving path needs at least one sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("driving path has non-finite samples"));
        }
        Ok(DrivingPath { dt, values })
    }

    /// `W ≡ value` on `[0, horizon]`.
    pub fn constant(value: f64, horizon: f64, dt: f64) -> Result<Self> {
        Self::from_fn(horizon, dt, |_| value)
    }

    /// Samples `f` on the grid covering `[0, horizon]`.
    pub fn from_fn(horizon: f64, dt: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = grid_steps(horizon, dt)?;
        Self::new(dt, (0..=n).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Linear interpolation; clamps outside `[0, horizon]`.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.steps();
        if t <= 0.0 || n == 0 {
            return self.values[0];
        }
        let s = t / self.dt;
        let k = (s.floor() as usize).min(n - 1);
        let f = (s - k as f64).min(1.0);
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    /// Driver restricted to `[t0, horizon]` and shifted to start at time 0.
    /// `t0` must be a grid time.
    pub fn shifted(&self, t0: f64) -> Result<Self> {
        let k = grid_steps(t0, self.dt)?;
        if k > self.steps() {
            return Err(Error::Horizon { requested: t0, available: self.horizon() });
        }
        Self::new(self.dt, self.values[k..].to_vec())
    }

    /// Piecewise-constant steps `(w, dt)` covering `[0, t]`, each using the
    /// driver value at the middle of the step.
    pub fn midpoint_steps(&self, t: f64) -> Result<Vec<(f64, f64)>> {
        self.check_horizon(t)?;
        let mut out = Vec::new();
        let mut s = 0.0;
        let mut k = 0;
        while s < t - 1e-12 * self.dt {
            let h = self.dt.min(t - s);
            out.push((self.at(s + 0.5 * h), h));
            k += 1;
            s = k as f64 * self.dt;
        }
        Ok(out)
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        if t > self.horizon() * (1.0 + 1e-12) + 1e-14 || t < 0.0 {
            return Err(Error::Horizon { requested: t, available: self.horizon() });
        }
        Ok(())
    }
}

pub(crate) fn grid_steps(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon >= 0.0 && dt > 0.0) {
        return Err(Error::invalid(format!("need horizon >= 0 and dt > 0, got {horizon}, {dt}")));
    }
    let n = horizon / dt;
    Ok((n - 1e-9).ceil().max(0.0) as usize)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowResult {
    pub value: C,
    pub swallowed: bool,
    pub tau: Option<f64>,
    /// Accumulated `log g'_t(z)`.
    pub log_derivative: C,
}

/// Swallowing threshold for a start point `z`.
pub fn swallow_tol(z: C) -> f64 {
    1e-6 * (1.0 + z.norm())
}

/// Chordal Loewner flow `∂_t g = 2/(g − W_t)` up to time `t_end`.
pub fn chordal_flow(w: &DrivingPath, z: C, t_end: f64) -> Result<FlowResult> {
    flow(w, z, t_end, Domain::HalfPlane)
}

/// Radial Loewner flow `∂_t g = g(e^{iW}+g)/(e^{iW}−g)` up to time `t_end`.
pub fn radial_flow(w: &DrivingPath, z: C, t_end: f64) -> Result<FlowResult> {
    if z.norm() == 0.0 {
        w.check_horizon(t_end)?;
        return Ok(FlowResult { value: z, swallowed: false, tau: None, log_derivative: C::new(t_end, 0.0) });
    }
    flow(w, z, t_end, Domain::Disc)
}

#[inline]
fn field(domain: Domain, g: C, w: f64) -> (C, C) {
    match domain {
        Domain::HalfPlane => {
            let q = ONE / (g - w);
            (2.0 * q, -2.0 * q * q)
        }
        Domain::Disc => {
            let u = C::from_polar(1.0, w);
            let q = ONE / (u - g);
            (g * (u + g) * q, (u * u + 2.0 * u * g - g * g) * q * q)
        }
    }
}

#[inline]
fn gap(domain: Domain, g: C, w: f64) -> f64 {
    match domain {
        Domain::HalfPlane => (g - w).norm(),
        Domain::Disc => (g - C::from_polar(1.0, w)).norm(),
    }
}

fn flow(w: &DrivingPath, z: C, t_end: f64, domain: Domain) -> Result<FlowResult> {
    w.check_horizon(t_end)?;
    let tol = swallow_tol(z);
    let on_circle = domain == Domain::Disc && (z.norm() - 1.0).abs() < 1e-12;
    let mut g = z;
    let mut lg = C::new(0.0, 0.0);
    let mut t = 0.0;
    if gap(domain, g, w.at(0.0)) < tol {
        return Ok(FlowResult { value: g, swallowed: true, tau: Some(0.0), log_derivative: lg });
    }
    let dt = w.dt();
    let h_min = dt * 1e-9;
    while t < t_end - 1e-14 {
        // stay inside the current grid cell so the driver is linear on each step
        let cell_end = (((t / dt) + 1e-9).floor() + 1.0) * dt;
        let d = gap(domain, g, w.at(t));
        let h = (cell_end.min(t_end) - t).min((0.02 * d * d).max(h_min));
        let (w0, wm, w1) = (w.at(t), w.at(t + 0.5 * h), w.at(t + h));
        let (k1, l1) = field(domain, g, w0);
        let (k2, l2) = field(domain, g + 0.5 * h * k1, wm);
        let (k3, l3) = field(domain, g + 0.5 * h * k2, wm);
        let (k4, l4) = field(domain, g + h * k3, w1);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        lg += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        if on_circle {
            g /= g.norm();
        }
        t += h;
        let left = match domain {
            Domain::HalfPlane => g.im < -tol,
            Domain::Disc => !on_circle && g.norm() > 1.0 + tol,
        };
        if left || !(g.re.is_finite() && g.im.is_finite()) || gap(domain, g, w.at(t)) < tol {
            return Ok(FlowResult { value: g, swallowed: true, tau: Some(t), log_derivative: lg });
        }
    }
    Ok(FlowResult { value: g, swallowed: false, tau: None, log_derivative: lg })
}

/// A curve sampled at the driver's grid times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub domain: Domain,
    pub times: Vec<f64>,
    pub points: Vec<C>,
}

/// Elementary slit factor for one piecewise-constant step.
#[inline]
pub fn slit(domain: Domain, w: f64, dt: f64) -> Elementary {
    match domain {
        Domain::HalfPlane => Elementary::ChordalSlit { w, dt },
        Domain::Disc => Elementary::RadialSlit { w, dt },
    }
}

/// Tip of the slit created by one step, pulled `offset` further into the domain.
pub fn slit_tip(domain: Domain, w: f64, dt: f64, offset: f64) -> C {
    match domain {
        Domain::HalfPlane => C::new(w, 2.0 * dt.sqrt() + offset),
        Domain::Disc => C::from_polar((radial_slit_tip(dt) - offset).max(0.0), w),
    }
}

/// Trace of the chain driven by the piecewise-constant midpoint version of
/// `w`: each point is the tip of a step's slit pulled back through all
/// earlier steps. Quadratic in the number of steps.
pub fn extract_trace(w: &DrivingPath, domain: Domain, tip_offset: f64) -> Result<Trace> {
    if !(tip_offset >= 0.0) {
        return Err(Error::invalid("tip_offset must be non-negative"));
    }
    let steps = w.midpoint_steps(w.horizon())?;
    let maps: Vec<Elementary> = steps.iter().map(|&(u, h)| slit(domain, u, h)).collect();
    let mut points = Vec::with_capacity(steps.len() + 1);
    let mut times = Vec::with_capacity(steps.len() + 1);
    points.push(match domain {
        Domain::HalfPlane => C::new(w.values()[0], 0.0),
        Domain::Disc => C::from_polar(1.0, w.values()[0]),
    });
    times.push(0.0);
    let mut t = 0.0;
    for (k, &(u, h)) in steps.iter().enumerate() {
        let mut p = slit_tip(domain, u, h, tip_offset);
        for m in maps[..k].iter().rev() {
            p = m.inverse(p);
        }
        t += h;
        points.push(p);
        times.push(t);
    }
    Ok(Trace { domain, times, points })
}

/// The map `g_T` as a chain of midpoint slit factors.
pub fn hull_maps(w: &DrivingPath, t: f64, domain: Domain) -> Result<SlitMapChain> {
    let mut chain = SlitMapChain::identity(domain);
    for (u, h) in w.midpoint_steps(t)? {
        chain.push(slit(domain, u, h));
    }
    Ok(chain)
}
