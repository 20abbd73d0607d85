//! Test hulls as polylines in the closed disc, with analytic targets where
//! they exist.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::conformal::{cayley, Direction, SlitMapChain};
use crate::loewner::extract_trace;
use crate::restriction::{chain_derivatives, RadialHull};
use crate::sle::perfect_driver;
use crate::zipper::disc_hull_map;
use crate::{Domain, Error, Result, C};

/// Loewner steps used to draw a perfect hull.
pub const PERFECT_STEPS: usize = 1024;
/// Vertices on a half-disc arc.
pub const ARC_POINTS: usize = 257;

/// A connected piece of a hull: a polyline rooted on the unit circle, which
/// also ends on the circle when `region` is set (the piece is then the
/// domain cut off by the polyline).
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub points: Vec<C>,
    pub region: bool,
}

impl Component {
    pub fn new(points: Vec<C>, region: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a hull component needs at least two points"));
        }
        let on = |p: C| (p.norm() - 1.0).abs() < 1e-9;
        if !on(points[0]) || (region && !on(points[points.len() - 1])) {
            return Err(Error::invalid("hull components must be rooted on the unit circle"));
        }
        if points.iter().any(|p| !(p.norm() <= 1.0 + 1e-9)) {
            return Err(Error::invalid("hull points must lie in the closed unit disc"));
        }
        let mut points = points;
        let r0 = points[0].norm();
        points[0] /= r0;
        if region {
            let n = points.len() - 1;
            let rn = points[n].norm();
            points[n] /= rn;
        }
        Ok(Component { points, region })
    }

    /// Polygon of a region piece closed along the boundary arc.
    pub fn polygon(&self) -> Vec<C> {
        let mut poly = self.points.clone();
        if self.region {
            let a = self.points[self.points.len() - 1].arg();
            let b = self.points[0].arg();
            let mut d = b - a;
            // the arc under a region piece is the short one
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            for k in 1..16 {
                poly.push(C::from_polar(1.0, a + d * k as f64 / 16.0));
            }
        }
        poly
    }

    /// `p` lies in the hull piece.
    pub fn contains(&self, p: C) -> bool {
        self.region && crate::geometry::point_in_polygon(p, &self.polygon())
    }
}

/// A hull `A` given by its components, with cached `|Φ'_A(0)|`, `Φ'_A(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestHull {
    pub name: String,
    pub components: Vec<Component>,
    /// Derivatives from closed forms when available, otherwise from the
    /// zipper map of the polylines.
    pub derivatives: RadialHull,
}

impl TestHull {
    pub fn empty() -> Self {
        TestHull { name: "empty".into(), components: Vec::new(), derivatives: RadialHull::empty() }
    }

    /// Hull of the perfect curve `W^θ` up to time `t`.
    pub fn perfect(theta: f64, t: f64) -> Result<Self> {
        let derivatives = RadialHull::perfect(theta, t)?;
        if t == 0.0 {
            return Ok(TestHull { name: format!("perfect({theta},{t})"), components: Vec::new(), derivatives });
        }
        let w = perfect_driver(theta, t, t / PERFECT_STEPS as f64)?;
        let tr = extract_trace(&w, Domain::Disc, 0.0)?;
        Ok(TestHull { name: format!("perfect({theta},{t})"), components: alloc::vec![Component::new(tr.points, false)?], derivatives })
    }

    /// The half-disc `B(x, ε) ∩ H` carried to U by the inverse Cayley map.
    pub fn half_disc(x: f64, eps: f64) -> Result<Self> {
        let derivatives = RadialHull::half_disc(x, eps)?;
        let pts = (0..ARC_POINTS)
            .map(|k| {
                let a = PI * (1.0 - k as f64 / (ARC_POINTS - 1) as f64);
                let mut z = C::new(x, 0.0) + C::from_polar(eps, a);
                if k == 0 || k + 1 == ARC_POINTS {
                    z.im = 0.0;
                }
                cayley(z, Direction::Inverse)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TestHull { name: format!("halfdisc({x},{eps})"), components: alloc::vec![Component::new(pts, true)?], derivatives })
    }

    pub fn polyline(name: &str, points: Vec<C>, region: bool) -> Result<Self> {
        let c = Component::new(points, region)?;
        let derivatives = RadialHull::from_polyline(&c.points, region)?;
        Ok(TestHull { name: name.into(), components: alloc::vec![c], derivatives })
    }

    /// The normalized map `Φ_A` as a chain.
    pub fn map(&self) -> Result<SlitMapChain> {
        components_map(&self.components)
    }

    /// `A ∪ Φ_A^{-1}(B)` with `Φ_A(0) = 0`, `Φ_A(1) = 1`; derivatives come
    /// from the zipper.
    pub fn with_preimage(&self, b: &TestHull) -> Result<Self> {
        let phi = self.map()?;
        let q = phi.value(C::new(1.0, 0.0))?;
        let q = q / q.norm();
        let mut components = self.components.clone();
        for c in &b.components {
            let pts: Vec<C> = c.points.iter().map(|&p| phi.inverse(p * q)).collect();
            components.push(Component::new(pts, c.region)?);
        }
        let g = components_map(&components)?;
        let (d0, d1) = chain_derivatives(&g)?;
        let derivatives = RadialHull { d0, d1, kind: crate::restriction::HullKind::Generic };
        Ok(TestHull { name: format!("{}+pre({})", self.name, b.name), components, derivatives })
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Map from U minus all components onto U fixing 0 with positive
/// derivative, built by zipping the components one after another.
pub fn components_map(components: &[Component]) -> Result<SlitMapChain> {
    let mut chain = SlitMapChain::identity(Domain::Disc);
    for c in components {
        let pts = c
            .points
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let v = chain.value(p)?;
                let on = k == 0 || (c.region && k + 1 == c.points.len());
                Ok(if on { v / v.norm() } else { v })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = disc_hull_map(&pts, c.region)?;
        let prev = chain.normalization;
        chain.maps.push(crate::conformal::Elementary::Mobius(prev));
        chain.maps.extend(g.maps);
        chain.normalization = g.normalization;
    }
    Ok(chain)
}
