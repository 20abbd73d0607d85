//! Exponents, the λ/ν/kernel identities and the avoidance formula
//! `P[K∩A=∅] = |Φ'_A(0)|^α Φ'_A(1)^β`.

use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::conformal::{f_map, SlitMapChain, I};
use crate::loewner::{radial_flow, DrivingPath};
use crate::zipper::disc_hull_map;
use crate::{Error, Result, C};

pub use crate::conformal::kernels;

/// `ξ(β) = ((√(24β+1)−1)² − 4)/48`.
pub fn xi(beta: f64) -> Result<f64> {
    if !(beta >= -1.0 / 24.0) {
        return Err(Error::invalid(format!("xi needs beta >= -1/24, got {beta}")));
    }
    let s = (24.0 * beta + 1.0).sqrt() - 1.0;
    Ok((s * s - 4.0) / 48.0)
}

/// `ρ(β) = ⅔(√(24β+1)−1) − 2`.
pub fn rho_of_beta(beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::invalid(format!("rho needs beta >= 0, got {beta}")));
    }
    Ok(2.0 / 3.0 * ((24.0 * beta + 1.0).sqrt() - 1.0) - 2.0)
}

/// `β(ρ) = (ρ+2)(3ρ+10)/32`.
pub fn beta_of_rho(rho: f64) -> f64 {
    (rho + 2.0) * (3.0 * rho + 10.0) / 32.0
}

/// `(α, γ, β)` of the radial SLE_{8/3}(ρ) martingale.
pub fn exponents_of_rho(rho: f64) -> Result<(f64, f64, f64)> {
    if !(rho > -2.0) {
        return Err(Error::invalid(format!("rho must exceed -2, got {rho}")));
    }
    let alpha = 5.0 / 48.0 + 3.0 / 64.0 * rho * (rho + 4.0);
    let gamma = rho * (3.0 * rho + 4.0) / 32.0;
    let beta = 5.0 / 8.0 + gamma + 3.0 / 8.0 * rho;
    Ok((alpha, gamma, beta))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictionLaw {
    pub alpha: f64,
    pub beta: f64,
}

impl RestrictionLaw {
    pub fn new(alpha: f64, beta: f64) -> Self {
        RestrictionLaw { alpha, beta }
    }

    /// The law with the largest admissible α for this β.
    pub fn maximal(beta: f64) -> Result<Self> {
        Ok(RestrictionLaw { alpha: xi(beta)?, beta })
    }

    pub fn is_admissible(&self) -> bool {
        self.beta >= 5.0 / 8.0 && xi(self.beta).is_ok_and(|x| self.alpha <= x + 1e-12)
    }
}

/// `ν(θ) = −α + β/(1−cos θ)`.
pub fn nu(theta: f64, law: RestrictionLaw) -> Result<f64> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::invalid(format!("theta must lie in (0, 2π), got {theta}")));
    }
    let s = (0.5 * theta).sin();
    Ok(-law.alpha + law.beta / (2.0 * s * s))
}

/// Coefficients of `λ(x) = P(x)/(x²(1+x²)²)` with `P(x) = c0 + c2x²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParams {
    pub c0: f64,
    pub c2: f64,
}

impl LambdaParams {
    pub fn new(c0: f64, c2: f64) -> Result<Self> {
        if !(c0 >= 0.0 && c2 >= 0.0) {
            return Err(Error::invalid("lambda coefficients must be non-negative"));
        }
        Ok(LambdaParams { c0, c2 })
    }

    /// `c0 = 2β`, `c2 = 2β − 4α`.
    pub fn from_law(law: RestrictionLaw) -> Result<Self> {
        Self::new(2.0 * law.beta, 2.0 * law.beta - 4.0 * law.alpha)
    }

    pub fn law(&self) -> RestrictionLaw {
        RestrictionLaw { alpha: (self.c0 - self.c2) / 4.0, beta: self.c0 / 2.0 }
    }

    pub fn curve(&self) -> LambdaCurve {
        LambdaCurve { c0: self.c0, c1: 0.0, c2: self.c2, c3: 0.0 }
    }
}

/// `λ(x) = (c0 + c1|x| + c2x² + c3x³)/(x²(1+x²)²)`; `c1` and `c3` exist
/// only to build negative controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaCurve {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Truncated Taylor series `Σ c_k h^k`, k ≤ 3.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Jet([f64; 4]);

impl Jet {
    fn var(x: f64) -> Jet {
        Jet([x, 1.0, 0.0, 0.0])
    }
    fn cst(c: f64) -> Jet {
        Jet([c, 0.0, 0.0, 0.0])
    }
    fn add(self, o: Jet) -> Jet {
        Jet(core::array::from_fn(|k| self.0[k] + o.0[k]))
    }
    fn scale(self, s: f64) -> Jet {
        Jet(self.0.map(|v| v * s))
    }
    fn mul(self, o: Jet) -> Jet {
        Jet(core::array::from_fn(|k| (0..=k).map(|j| self.0[j] * o.0[k - j]).sum()))
    }
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; 4];
        for k in 0..4 {
            let s: f64 = (1..=k).map(|j| o.0[j] * q[k - j]).sum();
            q[k] = (self.0[k] - s) / o.0[0];
        }
        Jet(q)
    }
    /// `[f, f', f'', f''']`.
    fn derivatives(self) -> [f64; 4] {
        [self.0[0], self.0[1], 2.0 * self.0[2], 6.0 * self.0[3]]
    }
}

impl LambdaCurve {
    fn jet(&self, x: f64) -> Jet {
        let t = Jet::var(x);
        let ax = t.scale(x.signum());
        let p = Jet::cst(self.c0).add(ax.scale(self.c1)).add(t.mul(t).scale(self.c2)).add(t.mul(t).mul(t).scale(self.c3));
        let s = Jet::cst(1.0).add(t.mul(t));
        p.div(t.mul(t).mul(s).mul(s))
    }

    /// `[λ, λ', λ'', λ''']` at `x ≠ 0`, differentiated exactly.
    pub fn derivatives(&self, x: f64) -> Result<[f64; 4]> {
        if x == 0.0 {
            return Err(Error::Pole("lambda is singular at x = 0"));
        }
        Ok(self.jet(x).derivatives())
    }
}

pub fn lambda(x: f64, params: LambdaParams) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole("lambda is singular at x = 0"));
    }
    let x2 = x * x;
    Ok((params.c0 + params.c2 * x2) / (x2 * (1.0 + x2) * (1.0 + x2)))
}

/// Left minus right side of `λ'(y)F(x,y) + 2λ(y)G(x,y) = λ'(x)F(y,x) + 2λ(x)G(y,x)`.
pub fn commutation_residual(x: f64, y: f64, lam: &LambdaCurve) -> Result<f64> {
    let (fxy, gxy) = kernels(x, y)?;
    let (fyx, gyx) = kernels(y, x)?;
    let lx = lam.derivatives(x)?;
    let ly = lam.derivatives(y)?;
    Ok(ly[1] * fxy + 2.0 * ly[0] * gxy - lx[1] * fyx - 2.0 * lx[0] * gyx)
}

/// Residual of `x²(1+x²)²λ''' + 6x(1+x²)(1+3x²)λ'' + 6(1+12x²+15x⁴)λ' + 24x(2+5x²)λ`.
pub fn lambda_ode_residual(x: f64, lam: &LambdaCurve) -> Result<f64> {
    let [l0, l1, l2, l3] = lam.derivatives(x)?;
    let x2 = x * x;
    let s = 1.0 + x2;
    Ok(x2 * s * s * l3 + 6.0 * x * s * (1.0 + 3.0 * x2) * l2 + 6.0 * (1.0 + 12.0 * x2 + 15.0 * x2 * x2) * l1 + 24.0 * x * (2.0 + 5.0 * x2) * l0)
}

/// `λ(sin θ/(1+cos θ)) − ν(θ)(1+cos θ)²`.
pub fn lambda_nu_residual(theta: f64, law: RestrictionLaw) -> Result<f64> {
    let params = LambdaParams { c0: 2.0 * law.beta, c2: 2.0 * law.beta - 4.0 * law.alpha };
    let c = 2.0 * (0.5 * theta).cos().powi(2);
    Ok(lambda((0.5 * theta).tan(), params)? - nu(theta, law)? * c * c)
}

/// Largest residuals of the kernel layer over a grid, plus the two
/// negative controls (which must stay large).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub commutation: f64,
    pub lambda_ode: f64,
    pub lambda_nu: f64,
    /// Commutation residual with a `c1|x|` term added.
    pub control_linear: f64,
    /// λ-ODE residual with a cubic term in `P`.
    pub control_cubic: f64,
}

/// Residual sweep for the given laws: the commutation relation and the
/// λ-ODE on `grid × grid`, the λ–ν identity at `θ = πk/64`, `0 < k < 128`.
pub fn residual_report(laws: &[RestrictionLaw], grid: &[f64]) -> Result<ResidualReport> {
    let (mut commutation, mut lambda_ode, mut lambda_nu) = (0.0f64, 0.0f64, 0.0f64);
    for &law in laws {
        let lam = LambdaParams::from_law(law)?.curve();
        for &x in grid {
            lambda_ode = lambda_ode.max(lambda_ode_residual(x, &lam)?.abs());
            for &y in grid {
                if x != y {
                    commutation = commutation.max(commutation_residual(x, y, &lam)?.abs());
                }
            }
        }
        for k in 1..128 {
            if k != 64 {
                lambda_nu = lambda_nu.max(lambda_nu_residual(PI * k as f64 / 64.0, law)?.abs());
            }
        }
    }
    let linear = LambdaCurve { c0: 1.25, c1: 0.1, c2: 0.8, c3: 0.0 };
    let cubic = LambdaCurve { c0: 1.25, c1: 0.0, c2: 0.8, c3: 0.1 };
    Ok(ResidualReport {
        commutation,
        lambda_ode,
        lambda_nu,
        control_linear: control_linear(&linear)?,
        control_cubic: lambda_ode_residual(0.7, &cubic)?.abs(),
    })
}

/// Largest commutation residual of a `c1|x|` curve over pairs with `x > 0 > y`.
fn control_linear(lam: &LambdaCurve) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in [0.3, 0.5, 1.0] {
        for y in [-0.3, -0.5, -1.0, -2.0] {
            worst = worst.max(commutation_residual(x, y, lam)?.abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HullKind {
    Empty,
    /// Hull of the perfect curve `W^θ` run for time `t`.
    Perfect {
        theta: f64,
        t: f64,
    },
    /// Image of the half-disc B(x,ε) ⊂ H under the inverse Cayley map.
    HalfDisc {
        x: f64,
        eps: f64,
    },
    Generic,
}

/// A hull A ∈ 𝒜^r with cached `d0 = |Φ'_A(0)|` and `d1 = Φ'_A(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialHull {
    pub d0: f64,
    pub d1: f64,
    pub kind: HullKind,
}

impl RadialHull {
    pub fn empty() -> Self {
        RadialHull { d0: 1.0, d1: 1.0, kind: HullKind::Empty }
    }

    pub fn perfect(theta: f64, t: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0 * PI && t >= 0.0) {
            return Err(Error::invalid(format!("perfect hull needs theta in (0, 2π) and t >= 0, got {theta}, {t}")));
        }
        Ok(RadialHull { d0: t.exp(), d1: (-t / (1.0 - theta.cos())).exp(), kind: HullKind::Perfect { theta, t } })
    }

    pub fn half_disc(x: f64, eps: f64) -> Result<Self> {
        let f = f_map(x, eps)?;
        let (_, di) = f.eval(I)?;
        let (_, d1) = f.eval(C::new(0.0, 0.0))?;
        Ok(RadialHull { d0: di.norm(), d1: d1.re, kind: HullKind::HalfDisc { x, eps } })
    }

    /// Hull generated by a radial driver up to time `t`.
    pub fn from_driver(w: &DrivingPath, t: f64) -> Result<Self> {
        let (d0, d1) = hull_derivatives(w, t)?;
        Ok(RadialHull { d0, d1, kind: HullKind::Generic })
    }

    /// Hull given as a polyline rooted on the unit circle (and ending on it
    /// when `region` is set).
    pub fn from_polyline(points: &[C], region: bool) -> Result<Self> {
        let g = disc_hull_map(points, region)?;
        let (d0, d1) = chain_derivatives(&g)?;
        Ok(RadialHull { d0, d1, kind: HullKind::Generic })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0 >= 1.0 - 1e-12 && self.d1 > 0.0 && self.d1 <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!("hull derivatives out of range: d0={}, d1={}", self.d0, self.d1)));
        }
        Ok(())
    }
}

/// `(|G'(0)|, |G'(1)|)` of a disc chain fixing 0.
pub fn chain_derivatives(g: &SlitMapChain) -> Result<(f64, f64)> {
    let (_, d0) = g.eval(C::new(0.0, 0.0))?;
    let (_, d1) = g.eval(C::new(1.0, 0.0))?;
    Ok((d0.norm(), d1.norm()))
}

/// `d0 = e^T` and `d1 = |g'_T(1)|` from the variational Loewner ODE.
pub fn hull_derivatives(w: &DrivingPath, t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((1.0, 1.0));
    }
    let r = radial_flow(w, C::new(1.0, 0.0), t)?;
    if r.swallowed {
        return Err(Error::domain("the hull touches the base point 1"));
    }
    Ok((t.exp(), r.log_derivative.re.exp()))
}

pub fn avoidance_probability(hull: &RadialHull, law: RestrictionLaw) -> f64 {
    hull.d0.powf(law.alpha) * hull.d1.powf(law.beta)
}

/// `Φ_ε`, the `⌈ε⁻²⌉`-fold composition of `f_{x,ε}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AEps {
    pub x: f64,
    pub eps: f64,
    pub n: u64,
    pub factor: SlitMapChain,
}

impl AEps {
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        let (mut v, mut d) = (z, C::new(1.0, 0.0));
        for _ in 0..self.n {
            let (nv, nd) = self.factor.eval(v)?;
            v = nv;
            d *= nd;
        }
        Ok((v, d))
    }

    /// The tops `f^{-k}(x + iε)` of the successive half-discs, `k < n`,
    /// preceded by the root `x`.
    pub fn skeleton(&self) -> alloc::vec::Vec<C> {
        let mut pts = alloc::vec![C::new(self.x, 0.0)];
        let mut p = C::new(self.x, self.eps);
        for _ in 0..self.n {
            pts.push(p);
            p = self.factor.inverse(p);
        }
        pts
    }
}

/// `A_ε(x)`: returns the composition and its capacity seen from i.
pub fn build_a_eps(x: f64, eps: f64) -> Result<(AEps, f64)> {
    let factor = f_map(x, eps)?;
    let n = (1.0 / (eps * eps)).ceil() as u64;
    let (_, di) = factor.eval(I)?;
    let a = AEps { x, eps, n, factor };
    Ok((a, n as f64 * di.norm().ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Domain;
    use alloc::vec::Vec;

    #[test]
    fn exponent_values() {
        assert!((xi(5.0 / 8.0).unwrap() - 5.0 / 48.0).abs() < 1e-15);
        assert!((xi(35.0 / 24.0).unwrap() - 7.0 / 16.0).abs() < 1e-15);
        assert!((xi(2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(rho_of_beta(5.0 / 8.0).unwrap().abs() < 1e-15);
        assert!((rho_of_beta(2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(xi(-0.1).is_err() && rho_of_beta(-0.1).is_err());
        let (a, g, b) = exponents_of_rho(2.0).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-15 && (g - 0.625).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
        assert_eq!(exponents_of_rho(0.0).unwrap(), (5.0 / 48.0, 0.0, 5.0 / 8.0));
    }

    #[test]
    fn alpha_is_xi_of_beta() {
        for k in 0..=60 {
            let rho = 0.1 * k as f64;
            let (a, _, b) = exponents_of_rho(rho).unwrap();
            assert!((a - xi(b).unwrap()).abs() < 1e-12);
            assert!((b - beta_of_rho(rho)).abs() < 1e-12);
            assert!((rho_of_beta(b).unwrap() - rho).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_and_lambda_identities() {
        let law = RestrictionLaw::new(5.0 / 48.0, 5.0 / 8.0);
        assert!((nu(PI, law).unwrap() - 5.0 / 24.0).abs() < 1e-15);
        let p = LambdaParams::from_law(law).unwrap();
        assert!((lambda(1.0, p).unwrap() - (law.beta - law.alpha)).abs() < 1e-15);
        assert!((lambda(0.7, p).unwrap() - lambda(-0.7, p).unwrap()).abs() < 1e-15);
        for k in 1..64 {
            let th = PI * k as f64 / 64.0;
            assert!(lambda_nu_residual(th, law).unwrap().abs() < 1e-12);
        }
        let (th, t) = (1.2, 0.3);
        let h = RadialHull::perfect(th, t).unwrap();
        let lhs = nu(th, law).unwrap() * t;
        let rhs = -law.alpha * h.d0.ln() - law.beta * h.d1.ln();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn jet_matches_closed_derivative() {
        let lam = LambdaCurve { c0: 1.3, c1: 0.0, c2: 0.4, c3: 0.0 };
        let x: f64 = 0.8;
        let d = lam.derivatives(x).unwrap();
        let h = 1e-5;
        let fd = (lam.derivatives(x + h).unwrap()[0] - lam.derivatives(x - h).unwrap()[0]) / (2.0 * h);
        assert!((fd - d[1]).abs() < 1e-7);
    }

    #[test]
    fn commutation_and_ode_residuals() {
        let grid = [-3.0, -1.0, -0.3, 0.3, 1.0, 3.0];
        for &(c0, c2) in &[(1.25, 0.8333333333333333), (4.0, 1.3333333333333333), (0.5, 2.0)] {
            let lam = LambdaParams::new(c0, c2).unwrap().curve();
            for &x in &grid {
                assert!(lambda_ode_residual(x, &lam).unwrap().abs() < 1e-9);
                for &y in &grid {
                    if x != y {
                        assert!(commutation_residual(x, y, &lam).unwrap().abs() < 1e-9, "{x} {y}");
                    }
                }
            }
        }
        let zero = LambdaCurve { c0: 0.0, c1: 0.0, c2: 0.0, c3: 0.0 };
        assert_eq!(commutation_residual(1.0, 2.0, &zero).unwrap(), 0.0);
        let bad = LambdaCurve { c0: 1.25, c1: 0.1, c2: 0.8, c3: 0.0 };
        assert!(commutation_residual(1.0, -2.0, &bad).unwrap().abs() > 1e-3);
        let cubic = LambdaCurve { c0: 1.25, c1: 0.0, c2: 0.8, c3: 0.1 };
        assert!(lambda_ode_residual(0.7, &cubic).unwrap().abs() > 1e-3);
    }

    #[test]
    fn residual_sweep() {
        let laws = [RestrictionLaw::new(5.0 / 48.0, 0.625), RestrictionLaw::new(2.0 / 3.0, 2.0), RestrictionLaw::new(-0.5, 1.0)];
        let r = residual_report(&laws, &[-3.0, -1.0, -0.3, 0.3, 1.0, 3.0]).unwrap();
        assert!(r.commutation < 1e-9 && r.lambda_ode < 1e-9 && r.lambda_nu < 1e-12, "{r:?}");
        assert!(r.control_linear > 1e-3 && r.control_cubic > 1e-3, "{r:?}");
    }

    #[test]
    fn avoidance_values() {
        let law = RestrictionLaw::new(5.0 / 48.0, 5.0 / 8.0);
        let h = RadialHull::perfect(0.5 * PI, 0.2).unwrap();
        let p = avoidance_probability(&h, law);
        assert!((p - (-25.0 * 0.2 / 48.0f64).exp()).abs() < 1e-14);
        assert!((p - 0.9011).abs() < 1e-4);
        assert_eq!(avoidance_probability(&RadialHull::empty(), law), 1.0);
        assert_eq!(avoidance_probability(&h, RestrictionLaw::new(0.0, 0.0)), 1.0);
    }

    #[test]
    fn perfect_hull_derivatives_from_ode() {
        for &(th, t) in &[(0.5 * PI, 0.3), (PI, 0.2), (2.0, 0.15)] {
            let w = crate::sle::perfect_driver(th, t, 1e-3).unwrap();
            let (d0, d1) = hull_derivatives(&w, t).unwrap();
            assert!((d0 - t.exp()).abs() < 1e-12);
            assert!((d1 - (-t / (1.0 - f64::cos(th))).exp()).abs() < 1e-5);
        }
        let w = crate::sle::perfect_driver(1.0, 0.1, 1e-3).unwrap();
        assert_eq!(hull_derivatives(&w, 0.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn half_disc_hull_derivatives() {
        use crate::conformal::{cayley, Direction};
        use crate::zipper::zipper_encode;
        let (x, eps) = (2.0, 0.01);
        let exact = RadialHull::half_disc(x, eps).unwrap();
        // the semicircle without its closing point, encoded by radial slits
        let arc: Vec<C> = (0..400)
            .map(|k| {
                let a = PI * (1.0 - k as f64 / 400.0);
                cayley(C::new(x, 0.0) + C::from_polar(eps, a), Direction::Inverse).unwrap()
            })
            .collect();
        let enc = zipper_encode(&arc, Domain::Disc).unwrap();
        let dt = enc.capacity() / 2000.0;
        let w = enc.to_driving_path(dt).unwrap();
        let (_, d1) = hull_derivatives(&w, w.horizon()).unwrap();
        assert!((d1 - exact.d1).abs() / exact.d1 < 1e-4);
        let mut closed = arc.clone();
        closed.push(cayley(C::new(x + eps, 0.0), Direction::Inverse).unwrap());
        let poly = RadialHull::from_polyline(&closed, true).unwrap();
        assert!((poly.d1 - exact.d1).abs() < 1e-8);
        assert!((poly.d0 - exact.d0).abs() < 1e-8);
    }

    #[test]
    fn admissible_products_are_probabilities() {
        let mut hulls = Vec::new();
        for k in 1..20 {
            let th = PI * k as f64 / 10.0;
            hulls.push(RadialHull::perfect(th, 0.05 * k as f64).unwrap());
            let (x, eps) = (0.4 * k as f64 - 4.1, 0.02 * k as f64);
            if eps < 0.9 * x.abs() {
                hulls.push(RadialHull::half_disc(x, eps).unwrap());
            }
        }
        for h in &hulls {
            h.validate().unwrap();
            for j in 0..50 {
                let beta = 5.0 / 8.0 + 0.1 * j as f64;
                for law in [RestrictionLaw::maximal(beta).unwrap(), RestrictionLaw::new(0.0, beta), RestrictionLaw::new(-1.0, beta)] {
                    assert!(law.is_admissible());
                    let p = avoidance_probability(h, law);
                    assert!(p > 0.0 && p <= 1.0 + 1e-12, "{h:?} {law:?}");
                }
            }
        }
        assert!(!RestrictionLaw::new(1.0, 5.0 / 8.0).is_admissible());
    }

    #[test]
    fn a_eps_approximates_the_perfect_curve() {
        use crate::conformal::{cayley, Direction};
        use crate::geometry::hausdorff;
        use crate::loewner::extract_trace;
        // x = 1, θ = π/2; the stacked half-discs carry Loewner time t_x/2 = 1/2
        let w = crate::sle::perfect_driver(0.5 * PI, 0.5, 1e-3).unwrap();
        let tr = extract_trace(&w, Domain::Disc, 0.0).unwrap();
        let eta: Vec<C> = tr.points.iter().map(|&p| cayley(p, Direction::DiscToHalfPlane).unwrap()).collect();
        let (mut errs, mut dists) = (Vec::new(), Vec::new());
        for &eps in &[0.2, 0.1, 0.05] {
            let (a, cap) = build_a_eps(1.0, eps).unwrap();
            let (v0, _) = a.eval(C::new(0.0, 0.0)).unwrap();
            let (vi, _) = a.eval(I).unwrap();
            assert!(v0.norm() < 1e-9 && (vi - I).norm() < 1e-9);
            errs.push((cap - 0.5).abs() / eps);
            dists.push(hausdorff(&a.skeleton(), &eta));
        }
        assert!(errs.iter().all(|&e| e < 0.1), "{errs:?}");
        assert!(dists[0] > dists[1] && dists[1] > dists[2] && dists[2] < 5e-3, "{dists:?}");
    }
}
