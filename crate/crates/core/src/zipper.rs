//! Zipper encodings of boundary-attached arcs.
//!
//! [`zipper_encode`] unzips an arc with vertical (chordal) or radial slit
//! steps, so the result is exactly a piecewise-constant Loewner driver.
//! [`disc_hull_map`] uses geodesic steps instead, which follow polygonal
//! hulls much more closely and is the one used to evaluate derivatives.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::conformal::{cayley, Direction, Elementary, Mobius, SlitMapChain};
use crate::geometry;
use crate::loewner::{slit, DrivingPath};
use crate::{Domain, Error, Result, C};

/// Piecewise-constant driver recovered by unzipping an arc.
#[derive(Clone, Debug, PartialEq)]
pub struct ZipperEncoding {
    pub domain: Domain,
    /// Driver at time 0 (root of the arc).
    pub start: f64,
    /// `(w, dt)` per vertex after the root.
    pub steps: Vec<(f64, f64)>,
}

impl ZipperEncoding {
    pub fn capacity(&self) -> f64 {
        self.steps.iter().map(|s| s.1).sum()
    }

    /// The uniformizing map of the encoded hull as a slit chain.
    pub fn chain(&self) -> SlitMapChain {
        let mut c = SlitMapChain::identity(self.domain);
        for &(w, h) in &self.steps {
            c.push(slit(self.domain, w, h));
        }
        c
    }

    /// Samples the step function on a uniform grid.
    pub fn to_driving_path(&self, dt: f64) -> Result<DrivingPath> {
        let total = self.capacity();
        let n = crate::loewner::grid_steps(total, dt)?;
        let mut values = Vec::with_capacity(n + 1);
        values.push(self.start);
        let mut k = 0;
        let mut end = self.steps.first().map_or(0.0, |s| s.1);
        for j in 1..=n {
            let t = j as f64 * dt;
            while k + 1 < self.steps.len() && end < t - 1e-12 * dt {
                k += 1;
                end += self.steps[k].1;
            }
            values.push(self.steps.get(k).map_or(self.start, |s| s.0));
        }
        DrivingPath::new(dt, values)
    }
}

/// Unzips `arc` (root on the boundary, remaining vertices in the open
/// domain) into vertical or radial slit steps.
pub fn zipper_encode(arc: &[C], domain: Domain) -> Result<ZipperEncoding> {
    if arc.len() < 2 {
        return Err(Error::invalid("arc needs a root and at least one vertex"));
    }
    let root = arc[0];
    let start = match domain {
        Domain::HalfPlane => {
            if root.im.abs() > 1e-9 {
                return Err(Error::invalid("arc root is not on the real line"));
            }
            root.re
        }
        Domain::Disc => {
            if (root.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("arc root is not on the unit circle"));
            }
            root.arg()
        }
    };
    if !geometry::is_simple(arc) {
        return Err(Error::Zipper { vertex: 0, reason: "arc is self-intersecting".into() });
    }
    let mut img: Vec<C> = arc[1..].to_vec();
    let mut steps = Vec::with_capacity(img.len());
    let mut prev = start;
    for k in 0..img.len() {
        let p = img[k];
        let (w, h) = match domain {
            Domain::HalfPlane => {
                if !(p.im > 0.0) {
                    return Err(Error::Zipper { vertex: k + 1, reason: format!("vertex swallowed out of order ({p})") });
                }
                (p.re, 0.25 * p.im * p.im)
            }
            Domain::Disc => {
                let r = p.norm();
                if !(r < 1.0 && r > 0.0) {
                    return Err(Error::Zipper { vertex: k + 1, reason: format!("vertex swallowed out of order ({p})") });
                }
                let mut w = p.arg();
                w += 2.0 * PI * ((prev - w) / (2.0 * PI)).round();
                (w, ((1.0 + r) * (1.0 + r) / (4.0 * r)).ln())
            }
        };
        let map = slit(domain, w, h);
        for q in img[k + 1..].iter_mut() {
            *q = map.value(*q)?;
        }
        prev = w;
        steps.push((w, h));
    }
    Ok(ZipperEncoding { domain, start, steps })
}

/// Geodesic zipper for a hull in H: `points[0]` is the root on R, interior
/// vertices follow; with `closing = Some(q)` the hull is the region cut off
/// by the arc ending at `q ∈ R`. The returned chain maps H minus the hull
/// onto H and sends the last interior vertex to 0.
pub fn geodesic_zip(points: &[C], closing: Option<C>) -> Result<SlitMapChain> {
    let mut chain = SlitMapChain::identity(Domain::HalfPlane);
    if points.is_empty() {
        return Ok(chain);
    }
    let root = points[0];
    chain.push(Elementary::Mobius(Mobius { b: C::new(-root.re, 0.0), ..Mobius::identity() }));
    let mut img: Vec<C> = points[1..].iter().map(|p| p - root.re).collect();
    let mut close = closing.map(|q| q - root.re);
    for k in 0..img.len() {
        let p = img[k];
        if !(p.im > 0.0) || !p.re.is_finite() {
            return Err(Error::Zipper { vertex: k + 1, reason: format!("vertex swallowed out of order ({p})") });
        }
        let step = Elementary::Geodesic { p };
        for q in img[k + 1..].iter_mut() {
            *q = step.value(*q)?;
        }
        if let Some(q) = close.as_mut() {
            *q = step.value(*q)?;
        }
        chain.push(step);
    }
    if let (Some(q0), Some(q)) = (closing, close) {
        // The remaining crosscut runs from the tip at 0 to q and meets R at
        // right angles at both ends; send q to ∞ so it becomes the imaginary
        // axis, then open up the quadrant that is left.
        let side = if q0.re - root.re > 0.0 { 1.0 } else { -1.0 };
        let q = q.re;
        if q.is_finite() && q.abs() < 1e12 && q.abs() > 0.0 {
            chain.push(Elementary::Mobius(Mobius { c: C::new(-1.0 / q, 0.0), ..Mobius::identity() }));
        }
        chain.push(Elementary::Square { sign: -side });
    }
    Ok(chain)
}

/// Conformal map from U∖A onto U fixing 0 with positive derivative, for a
/// hull A given by a polyline rooted on the unit circle. For a region hull
/// the last vertex lies on the circle as well and A is the part of U cut off
/// by the polyline.
pub fn disc_hull_map(polyline: &[C], region: bool) -> Result<SlitMapChain> {
    if polyline.len() < 2 {
        return Ok(SlitMapChain::identity(Domain::Disc));
    }
    let base = polyline[0] / polyline[0].norm();
    let to_h = |z: C| cayley(z / base, Direction::DiscToHalfPlane);
    let (interior, closing) = if region {
        let n = polyline.len();
        (&polyline[..n - 1], Some(to_h(polyline[n - 1])?))
    } else {
        (polyline, None)
    };
    let pts = interior.iter().map(|&z| to_h(z)).collect::<Result<Vec<_>>>()?;
    let mut pts = pts;
    pts[0] = C::new(0.0, 0.0);
    let h = geodesic_zip(&pts, closing.map(|q| C::new(q.re, 0.0)))?;
    // φ₀(z/b) = i(b − z)/(b + z)
    let t = Mobius { a: -crate::conformal::I, b: crate::conformal::I * base, c: C::new(1.0, 0.0), d: base };
    let mut chain = SlitMapChain::identity(Domain::Disc);
    chain.push(Elementary::Mobius(t));
    chain.maps.extend(h.maps);
    let (wi, _) = chain.eval(C::new(0.0, 0.0))?;
    chain.normalization = Mobius::half_plane_to_disc(wi, 0.0);
    let (_, d) = chain.eval(C::new(0.0, 0.0))?;
    chain.normalization = Mobius::half_plane_to_disc(wi, -d.arg());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{radial_slit_eval, radial_slit_tip};
    use crate::loewner::extract_trace;

    #[test]
    fn vertical_slit_encodes_constant_driver() {
        let arc: Vec<C> = (0..=20).map(|k| C::new(0.0, 0.1 * k as f64)).collect();
        let enc = zipper_encode(&arc, Domain::HalfPlane).unwrap();
        assert!((enc.capacity() - 1.0).abs() < 1e-12);
        assert!(enc.steps.iter().all(|s| s.0.abs() < 1e-12));
    }

    #[test]
    fn radial_slit_from_minus_one() {
        let arc: Vec<C> = (0..=20).map(|k| C::new(-1.0 + 0.03 * k as f64, 0.0)).collect();
        let enc = zipper_encode(&arc, Domain::Disc).unwrap();
        assert!(enc.steps.iter().all(|s| (s.0 - PI).abs() < 1e-9));
        let r: f64 = 0.4;
        assert!((enc.capacity() - ((1.0 + r) * (1.0 + r) / (4.0 * r)).ln()).abs() < 1e-12);
    }

    #[test]
    fn brownian_round_trip() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dt = 1e-3;
        let mut v = alloc::vec![0.0];
        for _ in 0..300 {
            let z: f64 = StandardNormal.sample(&mut rng);
            let last = *v.last().unwrap();
            v.push(last + (8.0 / 3.0 * dt).sqrt() * z);
        }
        let w = DrivingPath::new(dt, v).unwrap();
        let tr = extract_trace(&w, Domain::HalfPlane, 0.0).unwrap();
        let enc = zipper_encode(&tr.points, Domain::HalfPlane).unwrap();
        let back = enc.to_driving_path(dt).unwrap();
        let mids = w.midpoint_steps(w.horizon()).unwrap();
        let mut err: f64 = 0.0;
        for (k, &(m, _)) in mids.iter().enumerate() {
            err = err.max((enc.steps[k].0 - m).abs());
            err = err.max((back.values()[k + 1] - m).abs());
        }
        assert!(err < 5e-2, "{err}");
        assert!((enc.capacity() - w.horizon()).abs() < 1e-4);
    }

    #[test]
    fn geodesic_map_of_radial_slit_is_exact() {
        let t = 0.3;
        let r = radial_slit_tip(t);
        let poly: Vec<C> = (0..=40).map(|k| C::new(-1.0 + (1.0 - r) * k as f64 / 40.0, 0.0)).collect();
        let g = disc_hull_map(&poly, false).unwrap();
        let (_, d0) = g.eval(C::new(0.0, 0.0)).unwrap();
        assert!((d0.re - t.exp()).abs() < 1e-9 && d0.im.abs() < 1e-9);
        for &z in &[C::new(0.3, 0.2), C::new(-0.5, 0.4), C::new(0.9, 0.0)] {
            let exact = radial_slit_eval(PI, t, z).unwrap().0;
            assert!((g.value(z).unwrap() - exact).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn geodesic_map_of_half_disc() {
        // half-disc B(2, 0.3) in H, carried to U by the inverse Cayley map
        let (x, eps) = (2.0, 0.3);
        let arc: Vec<C> = (0..=400)
            .map(|k| {
                let a = PI * (1.0 - k as f64 / 400.0);
                cayley(C::new(x, 0.0) + C::from_polar(eps, a), Direction::Inverse).unwrap()
            })
            .collect();
        let g = disc_hull_map(&arc, true).unwrap();
        let f = crate::conformal::f_map(x, eps).unwrap();
        // exact d0 = |f'(i)| and d1 = f'(0) through the Cayley conjugation
        let (_, fi) = f.eval(crate::conformal::I).unwrap();
        let (_, f0) = f.eval(C::new(0.0, 0.0)).unwrap();
        let (_, d0) = g.eval(C::new(0.0, 0.0)).unwrap();
        let (_, d1) = g.eval(C::new(1.0, 0.0)).unwrap();
        assert!((d0.norm() - fi.norm()).abs() < 1e-5, "{} vs {}", d0.norm(), fi.norm());
        assert!((d1.norm() - f0.norm()).abs() < 1e-5, "{} vs {}", d1.norm(), f0.norm());
    }
}
