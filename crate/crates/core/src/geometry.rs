//! Exact planar geometry over rational payoff vectors: convex hulls,
//! membership, and clipping by axis-aligned half-planes.

use crate::rational::Rational;
use num_traits::{Signed, Zero};

pub type Point = (Rational, Rational);

/// Convex polygon in counterclockwise order with no repeated or collinear
/// vertices. One vertex is a point, two a segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffPolygon {
    vertices: Vec<Point>,
}

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

impl PayoffPolygon {
    /// Convex hull of a nonempty point set (Andrew's monotone chain).
    pub fn hull(points: &[Point]) -> Self {
        assert!(!points.is_empty(), "hull of an empty point set");
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() <= 2 {
            return Self { vertices: pts };
        }
        let mut lower: Vec<Point> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Point> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub(crate) fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Closed-set membership, exact.
    pub fn contains(&self, p: &Point) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => &self.vertices[0] == p,
            2 => {
                let (a, b) = (&self.vertices[0], &self.vertices[1]);
                cross(a, b, p).is_zero()
                    && p.0 >= a.0.clone().min(b.0.clone())
                    && p.0 <= a.0.clone().max(b.0.clone())
                    && p.1 >= a.1.clone().min(b.1.clone())
                    && p.1 <= a.1.clone().max(b.1.clone())
            }
            n => (0..n).all(|i| !cross(&self.vertices[i], &self.vertices[(i + 1) % n], p).is_negative()),
        }
    }

    /// Intersection with `{ coord(p) >= bound }` where `coord` picks u (axis 0)
    /// or v (axis 1).
    pub fn clip_min(&self, axis: usize, bound: &Rational) -> Self {
        let coord = |p: &Point| if axis == 0 { p.0.clone() } else { p.1.clone() };
        let inside = |p: &Point| coord(p) >= *bound;
        let n = self.vertices.len();
        if n == 0 {
            return Self::empty();
        }
        let mut out: Vec<Point> = Vec::new();
        if n == 1 {
            return if inside(&self.vertices[0]) { self.clone() } else { Self::empty() };
        }
        // walk the closed boundary (for a segment, there and back)
        for i in 0..n {
            let cur = &self.vertices[i];
            let next = &self.vertices[(i + 1) % n];
            let (ci, ni) = (inside(cur), inside(next));
            if ci {
                out.push(cur.clone());
            }
            if ci != ni {
                let (c0, c1) = (coord(cur), coord(next));
                let t = (bound - &c0) / (&c1 - &c0);
                let x = &cur.0 + &t * (&next.0 - &cur.0);
                let y = &cur.1 + &t * (&next.1 - &cur.1);
                out.push((x, y));
            }
        }
        if out.is_empty() {
            Self::empty()
        } else {
            Self::hull(&out)
        }
    }

    /// `self ∩ { u >= u_min, v >= v_min }`.
    pub fn clip_quadrant(&self, u_min: &Rational, v_min: &Rational) -> Self {
        self.clip_min(0, u_min).clip_min(1, v_min)
    }

    /// Largest v over the polygon, with the largest u attaining it.
    pub fn top_point(&self) -> Option<Point> {
        self.vertices.iter().max_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0))).cloned()
    }

    /// Largest u over the polygon, with the largest v attaining it.
    pub fn right_point(&self) -> Option<Point> {
        self.vertices.iter().max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1))).cloned()
    }

    pub fn min_max(&self) -> Option<(Point, Point)> {
        let first = self.vertices.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for (u, v) in &self.vertices {
            lo.0 = lo.0.min(u.clone());
            lo.1 = lo.1.min(v.clone());
            hi.0 = hi.0.max(u.clone());
            hi.1 = hi.1.max(v.clone());
        }
        Some((lo, hi))
    }
}
