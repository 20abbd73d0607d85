//! Planar polyline and polygon predicates.

#[allow(unused_imports)]
use num_traits::Float;

use crate::C;

#[inline]
fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Closed segments `[a,b]` and `[c,d]` share a point.
pub fn segments_intersect(a: C, b: C, c: C, d: C) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on =
        |p: C, q: C, r: C, o: f64| o == 0.0 && r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im);
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

pub fn point_segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).re * ab.re + (p - a).im * ab.im) / l2;
    (p - (a + ab * s.clamp(0.0, 1.0))).norm()
}

pub fn segment_distance(a: C, b: C, c: C, d: C) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d).min(point_segment_distance(b, c, d)).min(point_segment_distance(c, a, b)).min(point_segment_distance(d, a, b))
}

/// Distance from `p` to an open polyline.
pub fn polyline_distance(p: C, poly: &[C]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (p - poly[0]).norm(),
        _ => poly.windows(2).map(|s| point_segment_distance(p, s[0], s[1])).fold(f64::INFINITY, f64::min),
    }
}

/// Even-odd containment; the polygon is closed implicitly.
pub fn point_in_polygon(p: C, poly: &[C]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Winding number of the closed polyline around `p` (closed implicitly).
pub fn winding_number(poly: &[C], p: C) -> i32 {
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = poly[i] - p;
        let b = poly[(i + 1) % n] - p;
        total += (b / a).arg();
    }
    (total / (2.0 * core::f64::consts::PI)).round() as i32
}

/// Any segment of `a` meets any segment of `b`.
pub fn polylines_intersect(a: &[C], b: &[C]) -> bool {
    let bb = BBox::of(b);
    a.windows(2).any(|s| bb.overlaps_segment(s[0], s[1], 0.0) && b.windows(2).any(|t| segments_intersect(s[0], s[1], t[0], t[1])))
}

/// Symmetric Hausdorff distance between two polylines, measured from each
/// vertex set to the other polyline.
pub fn hausdorff(a: &[C], b: &[C]) -> f64 {
    let ab = a.iter().map(|&p| polyline_distance(p, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|&p| polyline_distance(p, a)).fold(0.0, f64::max);
    ab.max(ba)
}

/// No two non-adjacent segments meet.
pub fn is_simple(poly: &[C]) -> bool {
    let n = poly.len();
    for i in 0..n.saturating_sub(1) {
        for j in i + 2..n.saturating_sub(1) {
            if segments_intersect(poly[i], poly[i + 1], poly[j], poly[j + 1]) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub lo: C,
    pub hi: C,
}

impl BBox {
    pub fn of(points: &[C]) -> Self {
        let mut lo = C::new(f64::INFINITY, f64::INFINITY);
        let mut hi = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = C::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = C::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        BBox { lo, hi }
    }

    pub fn inflate(&self, m: f64) -> Self {
        BBox { lo: self.lo - C::new(m, m), hi: self.hi + C::new(m, m) }
    }

    pub fn contains(&self, p: C) -> bool {
        p.re >= self.lo.re && p.re <= self.hi.re && p.im >= self.lo.im && p.im <= self.hi.im
    }

    pub fn overlaps(&self, o: &BBox) -> bool {
        self.lo.re <= o.hi.re && o.lo.re <= self.hi.re && self.lo.im <= o.hi.im && o.lo.im <= self.hi.im
    }

    /// The segment's own box meets this box inflated by `m`.
    pub fn overlaps_segment(&self, a: C, b: C, m: f64) -> bool {
        a.re.min(b.re) <= self.hi.re + m && a.re.max(b.re) >= self.lo.re - m && a.im.min(b.im) <= self.hi.im + m && a.im.max(b.im) >= self.lo.im - m
    }

    /// Lower bound on the distance from `p` to anything inside the box.
    pub fn distance(&self, p: C) -> f64 {
        let dx = (self.lo.re - p.re).max(0.0).max(p.re - self.hi.re);
        let dy = (self.lo.im - p.im).max(0.0).max(p.im - self.hi.im);
        dx.hypot(dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn intersections() {
        let o = C::new(0.0, 0.0);
        assert!(segments_intersect(o, C::new(1.0, 1.0), C::new(0.0, 1.0), C::new(1.0, 0.0)));
        assert!(!segments_intersect(o, C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(1.0, 1.0)));
        assert!(segments_intersect(o, C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(2.0, 3.0)));
    }

    #[test]
    fn polygon_predicates() {
        let sq = vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 1.0), C::new(0.0, 1.0)];
        assert!(point_in_polygon(C::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(C::new(1.5, 0.5), &sq));
        assert_eq!(winding_number(&sq, C::new(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, C::new(2.5, 0.5)), 0);
        assert!(is_simple(&sq));
        let bow = vec![C::new(0.0, 0.0), C::new(1.0, 1.0), C::new(1.0, 0.0), C::new(0.0, 1.0)];
        assert!(!is_simple(&bow));
        assert!((polyline_distance(C::new(0.5, 2.0), &sq) - 1.0).abs() < 1e-15);
    }
}
