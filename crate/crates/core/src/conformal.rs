//! Elementary conformal maps and their compositions.
//!
//! Everything here is a pure function of its inputs. Values come with first
//! derivatives so that chains can be differentiated by the chain rule.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Domain, Error, Result, C};

pub const I: C = C::new(0.0, 1.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    DiscToHalfPlane,
    Inverse,
}

/// The Cayley transform `φ₀(z) = i(1−z)/(1+z)` from U onto H, or its inverse
/// `w ↦ (i−w)/(i+w)`.
pub fn cayley(z: C, dir: Direction) -> Result<C> {
    match dir {
        Direction::DiscToHalfPlane => {
            if (z + ONE).norm() == 0.0 {
                return Err(Error::Pole("cayley at z = -1"));
            }
            Ok(I * (ONE - z) / (ONE + z))
        }
        Direction::Inverse => {
            if (z + I).norm() == 0.0 {
                return Err(Error::Pole("inverse cayley at w = -i"));
            }
            Ok((I - z) / (I + z))
        }
    }
}

/// Derivative of [`cayley`] at `z`.
pub fn cayley_derivative(z: C, dir: Direction) -> Result<C> {
    match dir {
        Direction::DiscToHalfPlane => {
            if (z + ONE).norm() == 0.0 {
                return Err(Error::Pole("cayley at z = -1"));
            }
            Ok(-2.0 * I / ((ONE + z) * (ONE + z)))
        }
        Direction::Inverse => {
            if (z + I).norm() == 0.0 {
                return Err(Error::Pole("inverse cayley at w = -i"));
            }
            Ok(-2.0 * I / ((I + z) * (I + z)))
        }
    }
}

/// `z ↦ (az+b)/(cz+d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.det();
        if !(det.norm() > 0.0) || !det.norm().is_finite() {
            return Err(Error::invalid("degenerate Möbius transform (ad - bc = 0)"));
        }
        Ok(m)
    }

    pub const fn identity() -> Self {
        Mobius { a: ONE, b: C::new(0.0, 0.0), c: C::new(0.0, 0.0), d: ONE }
    }

    pub fn rotation(angle: f64) -> Self {
        Mobius { a: C::from_polar(1.0, angle), ..Self::identity() }
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn derivative(&self, z: C) -> C {
        let q = self.c * z + self.d;
        self.det() / (q * q)
    }

    /// Value and derivative, failing at the pole.
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        let q = self.c * z + self.d;
        if q.norm() == 0.0 {
            return Err(Error::Pole("Möbius pole"));
        }
        Ok(((self.a * z + self.b) / q, self.det() / (q * q)))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Disc automorphism sending `p` to 0 and then rotating by `angle`.
    pub fn disc_to_origin(p: C, angle: f64) -> Mobius {
        let r = C::from_polar(1.0, angle);
        Mobius { a: r, b: -r * p, c: -p.conj(), d: ONE }
    }

    /// Map H onto U sending `q ∈ H` to 0, followed by a rotation.
    pub fn half_plane_to_disc(q: C, angle: f64) -> Mobius {
        let r = C::from_polar(1.0, angle);
        Mobius { a: r, b: -r * q, c: ONE, d: -q.conj() }
    }
}

/// Square root continued into the closed upper half-plane: the branch with
/// `Im ≥ 0`, and on the real axis the sign of `hint.re`.
pub fn sqrt_upper(u: C, hint: C) -> C {
    let r = u.sqrt();
    // On (or within rounding of) the real axis the side is read off the hint.
    if r.im.abs() <= 1e-12 * r.re.abs() && hint.re != 0.0 {
        return if (r.re < 0.0) != (hint.re < 0.0) { C::new(-r.re, r.im.abs()) } else { C::new(r.re, r.im.abs()) };
    }
    if r.im < 0.0 || (r.im == 0.0 && hint.re < 0.0) {
        -r
    } else {
        r
    }
}

/// `g_{x,ε}(z) = z + ε²/(z−x)`, mapping H∖B(x,ε) onto H.
pub fn halfdisc_map(x: f64, eps: f64, z: C) -> Result<C> {
    check_halfdisc(x, eps)?;
    halfdisc_eval(x, eps, z).map(|(v, _)| v)
}

fn check_halfdisc(x: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < x.abs()) {
        return Err(Error::invalid(format!("half-disc needs 0 < eps < |x|, got x={x}, eps={eps}")));
    }
    Ok(())
}

fn halfdisc_eval(x: f64, eps: f64, z: C) -> Result<(C, C)> {
    let d = z - x;
    if d.norm() < eps * (1.0 - 1e-12) {
        return Err(Error::domain(format!("point {z} inside B({x}, {eps})")));
    }
    let q = eps * eps / d;
    Ok((z + q, ONE - q / d))
}

fn halfdisc_inverse(x: f64, eps: f64, w: C) -> C {
    let u = w - x;
    x + (u + sqrt_upper(u * u - 4.0 * eps * eps, u)) * 0.5
}

/// The Möbius part of `f_{x,ε} = b(g−c)/(b²+(c−a)(g−a))` with
/// `a = Re g(i)`, `b = Im g(i)`, `c = g(0)`, so that `f_{x,ε}` fixes 0 and i.
pub fn normalize_fix_0_i(x: f64, eps: f64) -> Result<Mobius> {
    check_halfdisc(x, eps)?;
    let gi = halfdisc_map(x, eps, I)?;
    let (a, b) = (gi.re, gi.im);
    let c = -eps * eps / x;
    Mobius::new(C::new(b, 0.0), C::new(-b * c, 0.0), C::new(c - a, 0.0), C::new(b * b - a * (c - a), 0.0))
}

/// `f_{x,ε}` as a chain: half-disc removal followed by its normalization.
pub fn f_map(x: f64, eps: f64) -> Result<SlitMapChain> {
    let m = normalize_fix_0_i(x, eps)?;
    let mut chain = SlitMapChain::identity(Domain::HalfPlane);
    chain.push(Elementary::HalfDisc { x, eps });
    chain.push(Elementary::Mobius(m));
    Ok(chain)
}

/// The kernels `F(x,y)` and `G(x,y) = ∂_y F(x,y)`.
pub fn kernels(x: f64, y: f64) -> Result<(f64, f64)> {
    if x == 0.0 || y == 0.0 || x == y {
        return Err(Error::Pole("kernels need x != 0, y != 0, x != y"));
    }
    let s = x * (1.0 + x * x);
    let f = (1.0 + x * x + y * y + x * y) / s + 1.0 / (y - x);
    let g = (x + 2.0 * y) / s - 1.0 / ((y - x) * (y - x));
    Ok((f, g))
}

/// Estimates `F(x,y)` and `G(x,y)` from `f_{x,ε}` alone, by Richardson
/// extrapolation in ε² of `(f(y)−y)/ε²` and `(f'(y)−1)/ε²`.
pub fn extract_kernels(x: f64, y: f64, eps0: f64, levels: usize) -> Result<(f64, f64)> {
    if levels == 0 {
        return Err(Error::invalid("need at least one level"));
    }
    let mut tf: Vec<f64> = Vec::with_capacity(levels);
    let mut tg: Vec<f64> = Vec::with_capacity(levels);
    for k in 0..levels {
        let eps = eps0 / (1u64 << k) as f64;
        let (v, d) = f_map(x, eps)?.eval(C::new(y, 0.0))?;
        tf.push((v.re - y) / (eps * eps));
        tg.push((d.re - 1.0) / (eps * eps));
    }
    Ok((richardson(&mut tf, 4.0), richardson(&mut tg, 4.0)))
}

/// Neville-style Richardson table for sequences with error in powers of `1/ratio`.
fn richardson(t: &mut [f64], ratio: f64) -> f64 {
    let n = t.len();
    let mut fac = ratio;
    for j in 1..n {
        for k in (j..n).rev() {
            t[k] = (fac * t[k] - t[k - 1]) / (fac - 1.0);
        }
        fac *= ratio;
    }
    t[n - 1]
}

/// `k(z) = z/(1+z)²` maps U∖[r,1] onto the plane slit along `[k(r), ∞)`.
#[inline]
fn kslit(z: C) -> C {
    let q = ONE + z;
    z / (q * q)
}

#[inline]
fn kslit_inv(w: C) -> C {
    2.0 * w / (ONE - 2.0 * w + (ONE - 4.0 * w).sqrt())
}

/// Tip radius `r` of the radial slit `[r, 1]` with capacity `dt`.
pub fn radial_slit_tip(dt: f64) -> f64 {
    // e^dt = (1+r)²/(4r)
    let w = 0.25 * (-dt).exp();
    2.0 * w / (1.0 - 2.0 * w + (1.0 - 4.0 * w).sqrt())
}

/// Radial slit map at driver angle `w` with capacity `dt`, value and derivative.
pub fn radial_slit_eval(w: f64, dt: f64, z: C) -> Result<(C, C)> {
    let rot = C::from_polar(1.0, w);
    let zeta = z * rot.conj();
    let m = zeta.norm();
    if (zeta - ONE).norm() < 1e-15 {
        return Err(Error::domain("point at the base of a radial slit"));
    }
    let e = dt.exp();
    let eta = if (m - 1.0).abs() < 1e-13 {
        let phi = zeta.im.atan2(zeta.re);
        let c2 = (-dt).exp() * (0.5 * phi).cos().powi(2);
        let psi = 2.0 * c2.sqrt().min(1.0).acos() * if phi < 0.0 { -1.0 } else { 1.0 };
        C::from_polar(1.0, psi)
    } else {
        kslit_inv(e * kslit(zeta))
    };
    let d = radial_slit_ratio(dt, zeta, eta);
    Ok((eta * rot, d))
}

/// `g'` for the rotated radial slit map, switching to the coordinate
/// `s(z) = (1+z)/√z` near −1 where `k` has a pole.
fn radial_slit_ratio(dt: f64, zeta: C, eta: C) -> C {
    if (ONE + zeta).norm() > 0.5 && (ONE + eta).norm() > 0.5 {
        let kd = |z: C| {
            let q = ONE + z;
            (ONE - z) / (q * q * q)
        };
        dt.exp() * kd(zeta) / kd(eta)
    } else {
        let mut da = eta.arg() - zeta.arg();
        if da > core::f64::consts::PI {
            da -= 2.0 * core::f64::consts::PI;
        } else if da < -core::f64::consts::PI {
            da += 2.0 * core::f64::consts::PI;
        }
        let pw = C::from_polar((eta.norm() / zeta.norm()).powf(1.5), 1.5 * da);
        (-0.5 * dt).exp() * (zeta - ONE) / (eta - ONE) * pw
    }
}

/// Inverse of the radial slit map.
pub fn radial_slit_inverse(w: f64, dt: f64, z: C) -> C {
    let rot = C::from_polar(1.0, w);
    let eta = z * rot.conj();
    if (eta + ONE).norm() == 0.0 {
        return z;
    }
    let m = eta.norm();
    if (m - 1.0).abs() < 1e-13 {
        let psi = eta.im.atan2(eta.re);
        let c2 = dt.exp() * (0.5 * psi).cos().powi(2);
        if c2 < 1.0 {
            let phi = 2.0 * c2.sqrt().acos() * if psi < 0.0 { -1.0 } else { 1.0 };
            return C::from_polar(1.0, phi) * rot;
        }
        // prime ends of the slit map back onto the slit itself
        let kval = (-dt).exp() / (4.0 * (0.5 * psi).cos().powi(2));
        return kslit_inv(C::new(kval, 0.0)) * rot;
    }
    kslit_inv((-dt).exp() * kslit(eta)) * rot
}

/// Chordal vertical slit map `z ↦ w + √((z−w)²+4dt)`.
pub fn chordal_slit_eval(w: f64, dt: f64, z: C) -> Result<(C, C)> {
    let u = z - w;
    let v = sqrt_upper(u * u + 4.0 * dt, u);
    if v.norm() == 0.0 {
        return Err(Error::domain("point at the tip of a chordal slit"));
    }
    Ok((v + w, u / v))
}

pub fn chordal_slit_inverse(w: f64, dt: f64, z: C) -> C {
    let u = z - w;
    w + sqrt_upper(u * u - 4.0 * dt, u)
}

/// One elementary factor of a [`SlitMapChain`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    /// `z ↦ w + √((z−w)²+4dt)` on H.
    ChordalSlit {
        w: f64,
        dt: f64,
    },
    /// Radial Loewner map of the slit from `e^{iw}` with capacity `dt`.
    RadialSlit {
        w: f64,
        dt: f64,
    },
    /// `g_{x,ε}` removing the half-disc B(x,ε) from H.
    HalfDisc {
        x: f64,
        eps: f64,
    },
    /// Geodesic zipper step in H sending `p` to 0.
    Geodesic {
        p: C,
    },
    /// `z ↦ sign·z²`, opening a quadrant of H onto H.
    Square {
        sign: f64,
    },
    Mobius(Mobius),
}

impl Elementary {
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        match *self {
            Elementary::ChordalSlit { w, dt } => chordal_slit_eval(w, dt, z),
            Elementary::RadialSlit { w, dt } => radial_slit_eval(w, dt, z),
            Elementary::HalfDisc { x, eps } => halfdisc_eval(x, eps, z),
            Elementary::Geodesic { p } => geodesic_eval(p, z),
            Elementary::Square { sign } => Ok((sign * z * z, 2.0 * sign * z)),
            Elementary::Mobius(m) => m.eval(z),
        }
    }

    pub fn value(&self, z: C) -> Result<C> {
        match *self {
            Elementary::ChordalSlit { w, dt } => {
                let u = z - w;
                Ok(w + sqrt_upper(u * u + 4.0 * dt, u))
            }
            Elementary::Geodesic { p } => Ok(geodesic_value(p, z)),
            Elementary::Mobius(m) => Ok(m.apply(z)),
            _ => self.eval(z).map(|(v, _)| v),
        }
    }

    pub fn inverse(&self, z: C) -> C {
        match *self {
            Elementary::ChordalSlit { w, dt } => chordal_slit_inverse(w, dt, z),
            Elementary::RadialSlit { w, dt } => radial_slit_inverse(w, dt, z),
            Elementary::HalfDisc { x, eps } => halfdisc_inverse(x, eps, z),
            Elementary::Geodesic { p } => geodesic_inverse(p, z),
            Elementary::Square { sign } => {
                if sign > 0.0 {
                    z.sqrt()
                } else {
                    I * z.sqrt()
                }
            }
            Elementary::Mobius(m) => m.inverse().apply(z),
        }
    }

    /// Loewner time carried by the factor (geodesic and Möbius factors carry none).
    pub fn capacity(&self) -> f64 {
        match *self {
            Elementary::ChordalSlit { dt, .. } | Elementary::RadialSlit { dt, .. } => dt,
            Elementary::HalfDisc { eps, .. } => 0.5 * eps * eps,
            Elementary::Geodesic { .. } | Elementary::Square { .. } | Elementary::Mobius(_) => 0.0,
        }
    }
}

/// Parameters of the geodesic step at `p`: the pole `c` of `z ↦ z/(1−z/c)`
/// (infinite for vertical steps) and the height `s` of the resulting slit.
#[inline]
fn geodesic_params(p: C) -> (f64, f64) {
    let n2 = p.norm_sqr();
    if p.re.abs() <= 1e-15 * n2.sqrt() {
        (f64::INFINITY, p.im)
    } else {
        (n2 / p.re, n2 / p.im)
    }
}

/// `u² + s²` with `u = m(z)`, written as `(u − is)(u + is)` where
/// `u − is = m(z) − m(p)` is formed without cancellation near the tip.
#[inline]
fn geodesic_radicand(p: C, c: f64, s: f64, z: C, u: C) -> C {
    let is = C::new(0.0, s);
    let diff = if c.is_finite() { c * c * (z - p) / ((c - z) * (c - p)) } else { z - p };
    diff * (u + is)
}

#[inline]
fn geodesic_value(p: C, z: C) -> C {
    let (c, s) = geodesic_params(p);
    let u = if c.is_finite() { z / (ONE - z / c) } else { z };
    sqrt_upper(geodesic_radicand(p, c, s, z, u), u)
}

fn geodesic_eval(p: C, z: C) -> Result<(C, C)> {
    let (c, s) = geodesic_params(p);
    let (u, du) = if c.is_finite() {
        let q = ONE - z / c;
        if q.norm() == 0.0 {
            return Err(Error::Pole("geodesic step pole"));
        }
        (z / q, ONE / (q * q))
    } else {
        (z, ONE)
    };
    let v = sqrt_upper(geodesic_radicand(p, c, s, z, u), u);
    if v.norm() == 0.0 {
        return Err(Error::domain("point at the tip of a geodesic arc"));
    }
    Ok((v, u / v * du))
}

fn geodesic_inverse(p: C, w: C) -> C {
    let (c, s) = geodesic_params(p);
    let u = sqrt_upper(w * w - s * s, w);
    if c.is_finite() {
        u / (ONE + u / c)
    } else {
        u
    }
}

/// A conformal map stored as a composition of elementary factors, applied
/// first to last, followed by a terminal Möbius normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitMapChain {
    pub domain: Domain,
    pub maps: Vec<Elementary>,
    pub normalization: Mobius,
}

impl SlitMapChain {
    pub fn identity(domain: Domain) -> Self {
        SlitMapChain { domain, maps: Vec::new(), normalization: Mobius::identity() }
    }

    pub fn push(&mut self, e: Elementary) {
        self.maps.push(e);
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Total Loewner time of the slit factors.
    pub fn capacity(&self) -> f64 {
        self.maps.iter().map(|m| m.capacity()).sum()
    }

    /// Value and derivative by the chain rule.
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        let mut v = z;
        let mut d = ONE;
        for (k, m) in self.maps.iter().enumerate() {
            let (nv, nd) = m.eval(v).map_err(|e| match e {
                Error::Domain(s) => Error::Domain(format!("factor {k}: {s}")),
                other => other,
            })?;
            v = nv;
            d *= nd;
        }
        let (nv, nd) = self.normalization.eval(v)?;
        let (v, d) = (nv, d * nd);
        if !(v.re.is_finite() && v.im.is_finite() && d.re.is_finite() && d.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite chain value at {z}")));
        }
        Ok((v, d))
    }

    pub fn value(&self, z: C) -> Result<C> {
        let mut v = z;
        for m in &self.maps {
            v = m.value(v)?;
        }
        Ok(self.normalization.apply(v))
    }

    /// Evaluates the inverse map (factors inverted in reverse order).
    pub fn inverse(&self, w: C) -> C {
        let mut z = self.normalization.inverse().apply(w);
        for m in self.maps.iter().rev() {
            z = m.inverse(z);
        }
        z
    }
}
