//! Driving processes: perfect radial curves and SLE_κ(ρ) in both geometries.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::loewner::{grid_steps, DrivingPath};
use crate::{Error, Result};

/// Offset used to start from a degenerate force point `1±` / `0±`.
pub const EPS0: f64 = 1e-6;

/// Independent stream for path `index` of a run seeded by `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// `W^θ_t = θ − t·cot(θ/2)`.
pub fn perfect_driver(theta: f64, horizon: f64, dt: f64) -> Result<DrivingPath> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::invalid(format!("theta must lie in (0, 2π), got {theta}")));
    }
    let c = 1.0 / (0.5 * theta).tan();
    DrivingPath::from_fn(horizon, dt, |t| theta - t * c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcePoint {
    None,
    /// Radial: the boundary point `e^{ix}`, `x ∈ (0, 2π)`. Chordal: the real point `x ≠ 0`.
    At(f64),
    /// `1⁺` (radial) or `0⁺` (chordal).
    Right,
    /// `1⁻` (radial) or `0⁻` (chordal).
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SleParams {
    pub kappa: f64,
    pub rho: f64,
    pub force: ForcePoint,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
}

impl SleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::invalid("kappa must be non-negative"));
        }
        if !(self.rho > -2.0) {
            return Err(Error::invalid("rho must exceed -2"));
        }
        if !(self.dt > 0.0 && self.horizon >= 0.0) {
            return Err(Error::invalid("need dt > 0 and horizon >= 0"));
        }
        Ok(())
    }
}

/// Driver and force-point paths on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverPair {
    pub w: DrivingPath,
    pub v: Option<DrivingPath>,
}

/// Radial SLE_κ(ρ) driver advanced step by step.
///
/// With a force point the half-angle `θ = (W−V)/2 ∈ (0, π)` follows
/// `dθ = (√κ/2)dB + ((ρ+2)/4)cot θ dt`, `dV = −cot θ dt` and `W = V + 2θ`;
/// Euler sub-steps shrink near 0 and π and reflect if they overshoot.
#[derive(Clone, Debug)]
pub struct RadialStepper {
    pub kappa: f64,
    pub rho: f64,
    pub w: f64,
    pub v: f64,
    pub theta: f64,
    forced: bool,
}

impl RadialStepper {
    pub fn new(kappa: f64, rho: f64, force: ForcePoint, w0: f64) -> Result<Self> {
        let theta = match force {
            ForcePoint::None => 0.5 * PI,
            ForcePoint::Left => EPS0,
            ForcePoint::Right => PI - EPS0,
            ForcePoint::At(x) => {
                if !(x > 0.0 && x < 2.0 * PI) {
                    return Err(Error::invalid(format!("radial force point angle must lie in (0, 2π), got {x}")));
                }
                PI - 0.5 * x
            }
        };
        Ok(RadialStepper { kappa, rho, w: w0, v: w0 - 2.0 * theta, theta, forced: force != ForcePoint::None })
    }

    pub fn forced(&self) -> bool {
        self.forced
    }

    /// Advances by `h` and returns the driver's Brownian increment scale
    /// `√κ·ΔB` over the step.
    pub fn step<R: Rng + ?Sized>(&mut self, h: f64, rng: &mut R) -> f64 {
        let sk = self.kappa.sqrt();
        if !self.forced {
            let db = sk * h.sqrt() * normal(rng);
            self.w += db;
            self.v += db;
            return db;
        }
        let sigma = 0.5 * sk;
        let a = 0.25 * (self.rho + 2.0);
        let mut rem = h;
        let mut total = 0.0;
        while rem > 0.0 {
            let s = self.theta.min(PI - self.theta);
            let mut hs = rem;
            if sigma > 0.0 {
                hs = hs.min(0.04 * s * s / (sigma * sigma));
            }
            if a > 0.0 {
                hs = hs.min(0.1 * s * s / a);
            }
            hs = hs.max(1e-18).min(rem);
            let cot = 1.0 / self.theta.tan();
            let db = sigma * hs.sqrt() * normal(rng);
            let mut th = self.theta + a * cot * hs + db;
            if th <= 0.0 {
                th = (-th).max(1e-300);
            } else if th >= PI {
                th = (2.0 * PI - th).min(PI - 1e-16);
            }
            self.v -= cot * hs;
            self.theta = th;
            total += 2.0 * db;
            rem -= hs;
        }
        self.w = self.v + 2.0 * self.theta;
        total
    }
}

/// Chordal SLE_κ(ρ): `X = W − V` follows `dX = √κ dB + (ρ+2)/X dt`,
/// `dV = −2/X dt`.
#[derive(Clone, Debug)]
pub struct ChordalStepper {
    pub kappa: f64,
    pub rho: f64,
    pub w: f64,
    pub v: f64,
    x: f64,
    forced: bool,
}

impl ChordalStepper {
    pub fn new(kappa: f64, rho: f64, force: ForcePoint, w0: f64) -> Result<Self> {
        let x = match force {
            ForcePoint::None => 1.0,
            ForcePoint::Right => -EPS0,
            ForcePoint::Left => EPS0,
            ForcePoint::At(p) => {
                if p == 0.0 {
                    return Err(Error::invalid("chordal force point must differ from 0"));
                }
                -p
            }
        };
        Ok(ChordalStepper { kappa, rho, w: w0, v: w0 - x, x, forced: force != ForcePoint::None })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, h: f64, rng: &mut R) {
        let sk = self.kappa.sqrt();
        if !self.forced {
            self.w += sk * h.sqrt() * normal(rng);
            return;
        }
        let a = self.rho + 2.0;
        let sign = if self.x > 0.0 { 1.0 } else { -1.0 };
        let mut rem = h;
        while rem > 0.0 {
            let s = self.x.abs();
            let mut hs = rem;
            if sk > 0.0 {
                hs = hs.min(0.04 * s * s / self.kappa);
            }
            if a > 0.0 {
                hs = hs.min(0.1 * s * s / a);
            }
            hs = hs.max(1e-18).min(rem);
            let mut nx = self.x + a / self.x * hs + sk * hs.sqrt() * normal(rng);
            if nx * sign <= 0.0 {
                nx = -nx;
                if nx == 0.0 {
                    nx = sign * 1e-300;
                }
            }
            self.v -= 2.0 / self.x * hs;
            self.x = nx;
            rem -= hs;
        }
        self.w = self.v + self.x;
    }
}

fn sample_pair(
    params: &SleParams,
    index: u64,
    mut step: impl FnMut(&mut ChaCha8Rng, f64) -> (f64, f64),
    w0: f64,
    v0: f64,
    forced: bool,
) -> Result<DriverPair> {
    let n = grid_steps(params.horizon, params.dt)?;
    let mut rng = path_rng(params.seed, index);
    let mut w = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    w.push(w0);
    v.push(v0);
    for _ in 0..n {
        let (a, b) = step(&mut rng, params.dt);
        w.push(a);
        v.push(b);
    }
    Ok(DriverPair { w: DrivingPath::new(params.dt, w)?, v: if forced { Some(DrivingPath::new(params.dt, v)?) } else { None } })
}

/// Radial SLE_κ(ρ) driver for path `index`, started at `W_0 = 0`.
pub fn radial_sle_driver(params: &SleParams, index: u64) -> Result<DriverPair> {
    params.validate()?;
    let mut st = RadialStepper::new(params.kappa, params.rho, params.force, 0.0)?;
    let (w0, v0, forced) = (st.w, st.v, st.forced);
    sample_pair(
        params,
        index,
        |rng, h| {
            st.step(h, rng);
            (st.w, st.v)
        },
        w0,
        v0,
        forced,
    )
}

/// Chordal SLE_κ(ρ) driver for path `index`, started at `W_0 = 0`.
pub fn chordal_sle_driver(params: &SleParams, index: u64) -> Result<DriverPair> {
    params.validate()?;
    let mut st = ChordalStepper::new(params.kappa, params.rho, params.force, 0.0)?;
    let (w0, v0, forced) = (st.w, st.v, st.forced);
    sample_pair(
        params,
        index,
        |rng, h| {
            st.step(h, rng);
            (st.w, st.v)
        },
        w0,
        v0,
        forced,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_normal_pvalue, mean};

    #[test]
    fn perfect_driver_values() {
        let w = perfect_driver(PI, 1.0, 0.1).unwrap();
        assert!(w.values().iter().all(|v| (v - PI).abs() < 1e-12));
        let w = perfect_driver(0.5 * PI, 1.0, 0.1).unwrap();
        assert!((w.at(1.0) - (0.5 * PI - 1.0)).abs() < 1e-12);
        assert!(perfect_driver(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn radial_rho_zero_is_brownian() {
        let p = SleParams { kappa: 8.0 / 3.0, rho: 0.0, force: ForcePoint::None, horizon: 0.5, dt: 0.01, seed: 3 };
        let ends: Vec<f64> = (0..2000)
            .map(|i| {
                let d = radial_sle_driver(&p, i).unwrap();
                d.w.values()[d.w.steps()] / (p.kappa * 0.5).sqrt()
            })
            .collect();
        assert!(ks_normal_pvalue(&ends) > 0.01);
    }

    #[test]
    fn radial_half_angle_stays_in_range() {
        let p = SleParams { kappa: 8.0 / 3.0, rho: 2.0, force: ForcePoint::Left, horizon: 2.0, dt: 1e-3, seed: 5 };
        for i in 0..200 {
            let d = radial_sle_driver(&p, i).unwrap();
            let v = d.v.unwrap();
            for (a, b) in d.w.values().iter().zip(v.values()) {
                let th = 0.5 * (a - b);
                assert!(th > 0.0 && th < PI);
            }
        }
    }

    #[test]
    fn chordal_sign_and_repulsion() {
        let mk = |t: f64| SleParams { kappa: 8.0 / 3.0, rho: 2.0, force: ForcePoint::At(1.0), horizon: t, dt: 1e-3, seed: 9 };
        let mut gaps = [Vec::new(), Vec::new()];
        for i in 0..1000 {
            for (j, t) in [0.5, 1.0].into_iter().enumerate() {
                let d = chordal_sle_driver(&mk(t), i).unwrap();
                let v = d.v.unwrap();
                let x0 = d.w.values()[0] - v.values()[0];
                for (a, b) in d.w.values().iter().zip(v.values()) {
                    assert!((a - b) / x0 >= 0.0);
                }
                gaps[j].push((d.w.values()[d.w.steps()] - v.values()[v.steps()]).abs());
            }
        }
        assert!(mean(&gaps[1]) > mean(&gaps[0]));
    }

    #[test]
    fn streams_are_reproducible() {
        let p = SleParams { kappa: 2.0, rho: 1.0, force: ForcePoint::Left, horizon: 0.1, dt: 1e-3, seed: 1 };
        assert_eq!(radial_sle_driver(&p, 4).unwrap(), radial_sle_driver(&p, 4).unwrap());
        assert_ne!(radial_sle_driver(&p, 4).unwrap(), radial_sle_driver(&p, 5).unwrap());
    }
}
