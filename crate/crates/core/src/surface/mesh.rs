//! Triangulated base polygons for graph surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of one side of the base region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SideShape {
    Segment { from: [f64; 2], to: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
}

impl SideShape {
    /// Euclidean outward unit normal at `p` (base region to the left of the traversal).
    pub fn outward_normal(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            SideShape::Segment { from, to } => {
                let d = [to[0] - from[0], to[1] - from[1]];
                let l = d[0].hypot(d[1]);
                [d[1] / l, -d[0] / l]
            }
            SideShape::Circle { center, .. } => {
                let d = [p[0] - center[0], p[1] - center[1]];
                let l = d[0].hypot(d[1]);
                [d[0] / l, d[1] / l]
            }
        }
    }

    /// Distance from `p` to the side curve.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            SideShape::Segment { from, to } => {
                let d = [to[0] - from[0], to[1] - from[1]];
                let l2 = d[0] * d[0] + d[1] * d[1];
                let s = (((p[0] - from[0]) * d[0] + (p[1] - from[1]) * d[1]) / l2).clamp(0.0, 1.0);
                (p[0] - from[0] - s * d[0]).hypot(p[1] - from[1] - s * d[1])
            }
            SideShape::Circle { center, radius } => ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub side: usize,
}

/// Triangulated base region with boundary edges partitioned by side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges oriented with the region on their left.
    pub boundary: Vec<BoundaryEdge>,
    /// Corner vertices, one per polygon vertex, in boundary order.
    pub corners: Vec<usize>,
    pub sides: Vec<SideShape>,
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
    #[serde(skip)]
    vertex_sides: Vec<Vec<usize>>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl BaseMesh {
    /// Assembles a mesh and checks its invariants.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
        corners: Vec<usize>,
        sides: Vec<SideShape>,
    ) -> Result<Self> {
        let mut m = BaseMesh { vertices, triangles, boundary, corners, sides, neighbors: vec![], vertex_sides: vec![] };
        m.finish()?;
        Ok(m)
    }

    fn finish(&mut self) -> Result<()> {
        let nv = self.vertices.len();
        for t in &self.triangles {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::Invalid("triangle references a missing vertex".into()));
            }
            if cross(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]) <= 0.0 {
                return Err(Error::Invalid(format!("triangle {t:?} is not positively oriented")));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nb = vec![Vec::new(); nv];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for v in nb.iter_mut() {
            v.sort_unstable();
            v.dedup();
        }
        let mut vs = vec![Vec::new(); nv];
        for e in &self.boundary {
            if edge_count.get(&(e.a.min(e.b), e.a.max(e.b))) != Some(&1) {
                return Err(Error::Invalid(format!("boundary edge {}-{} is not on exactly one triangle", e.a, e.b)));
            }
            if e.side >= self.sides.len() {
                return Err(Error::Invalid(format!("boundary edge references missing side {}", e.side)));
            }
            for v in [e.a, e.b] {
                if !vs[v].contains(&e.side) {
                    vs[v].push(e.side);
                }
            }
        }
        let open = edge_count.values().filter(|&&c| c == 1).count();
        if open != self.boundary.len() {
            return Err(Error::Invalid(format!(
                "{} open edges but {} listed boundary edges",
                open,
                self.boundary.len()
            )));
        }
        for &c in &self.corners {
            if vs.get(c).map(|s| s.len()) != Some(2) {
                return Err(Error::Invalid(format!("corner vertex {c} must lie on exactly two sides")));
            }
        }
        self.neighbors = nb;
        self.vertex_sides = vs;
        Ok(())
    }

    /// Recomputes derived adjacency after deserialization.
    pub fn rebuilt(mut self) -> Result<Self> {
        self.finish()?;
        Ok(self)
    }

    /// `nx × ny` grid on `[lo, hi]`, every cell split along its rising diagonal.
    /// Equal dual areas matter: alternating splits leave a checkerboard in loaded solutions.
    /// Sides: 0 bottom, 1 right, 2 top, 3 left.
    pub fn rectangle(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || !(lo[0] < hi[0] && lo[1] < hi[1]) {
            return Err(Error::InvalidParameter("rectangle mesh needs nx, ny ≥ 1 and lo < hi".into()));
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx { hi[0] } else { lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64 };
                let y = if j == ny { hi[1] } else { lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64 };
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut boundary = Vec::new();
        for i in 0..nx {
            boundary.push(BoundaryEdge { a: id(i, 0), b: id(i + 1, 0), side: 0 });
        }
        for j in 0..ny {
            boundary.push(BoundaryEdge { a: id(nx, j), b: id(nx, j + 1), side: 1 });
        }
        for i in (0..nx).rev() {
            boundary.push(BoundaryEdge { a: id(i + 1, ny), b: id(i, ny), side: 2 });
        }
        for j in (0..ny).rev() {
            boundary.push(BoundaryEdge { a: id(0, j + 1), b: id(0, j), side: 3 });
        }
        let p = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
        let sides = (0..4).map(|k| SideShape::Segment { from: p[k], to: p[(k + 1) % 4] }).collect();
        let corners = vec![id(0, 0), id(nx, 0), id(nx, ny), id(0, ny)];
        Self::from_parts(vertices, triangles, boundary, corners, sides)
    }

    /// Convex polygon (counter-clockwise vertices). Triangles are subdivided directly
    /// into `n²` pieces; other polygons use a central fan of subdivided triangles.
    pub fn polygon(poly: &[[f64; 2]], n: usize) -> Result<Self> {
        let k = poly.len();
        if k < 3 || n == 0 {
            return Err(Error::InvalidParameter("polygon mesh needs ≥ 3 vertices and n ≥ 1".into()));
        }
        for i in 0..k {
            if cross(poly[i], poly[(i + 1) % k], poly[(i + 2) % k]) <= 0.0 {
                return Err(Error::InvalidParameter("polygon must be strictly convex and counter-clockwise".into()));
            }
        }
        let sides: Vec<SideShape> =
            (0..k).map(|i| SideShape::Segment { from: poly[i], to: poly[(i + 1) % k] }).collect();
        if k == 3 {
            return Self::subdivided_triangle(poly, n, sides);
        }
        let c = {
            let mut s = [0.0, 0.0];
            for p in poly {
                s[0] += p[0] / k as f64;
                s[1] += p[1] / k as f64;
            }
            s
        };
        #[derive(Hash, PartialEq, Eq, Clone, Copy)]
        enum Key {
            Center,
            Spoke(usize, usize),
            Side(usize, usize),
            Inner(usize, usize, usize),
        }
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        for i in 0..k {
            let (a, b, cc) = (c, poly[i], poly[(i + 1) % k]);
            let key = |p: usize, q: usize| {
                if p + q == 0 {
                    Key::Center
                } else if q == 0 {
                    Key::Spoke(i, p)
                } else if p == 0 {
                    Key::Spoke((i + 1) % k, q)
                } else if p + q == n {
                    Key::Side(i, q)
                } else {
                    Key::Inner(i, p, q)
                }
            };
            let mut vid = |p: usize, q: usize, vertices: &mut Vec<[f64; 2]>| {
                *index.entry(key(p, q)).or_insert_with(|| {
                    let s = p as f64 / n as f64;
                    let t = q as f64 / n as f64;
                    vertices.push([
                        a[0] + s * (b[0] - a[0]) + t * (cc[0] - a[0]),
                        a[1] + s * (b[1] - a[1]) + t * (cc[1] - a[1]),
                    ]);
                    vertices.len() - 1
                })
            };
            for q in 0..n {
                for p in 0..n - q {
                    let v0 = vid(p, q, &mut vertices);
                    let v1 = vid(p + 1, q, &mut vertices);
                    let v2 = vid(p, q + 1, &mut vertices);
                    triangles.push([v0, v1, v2]);
                    if p + q + 2 <= n {
                        let v3 = vid(p + 1, q + 1, &mut vertices);
                        triangles.push([v1, v3, v2]);
                    }
                }
            }
            for q in 0..n {
                let va = vid(n - q, q, &mut vertices);
                let vb = vid(n - q - 1, q + 1, &mut vertices);
                boundary.push(BoundaryEdge { a: va, b: vb, side: i });
            }
        }
        let corners = (0..k).map(|i| index[&Key::Spoke(i, n)]).collect();
        Self::from_parts(vertices, triangles, boundary, corners, sides)
    }

    fn subdivided_triangle(poly: &[[f64; 2]], n: usize, sides: Vec<SideShape>) -> Result<Self> {
        let (a, b, c) = (poly[0], poly[1], poly[2]);
        let mut ids = vec![vec![usize::MAX; n + 1]; n + 1];
        let mut vertices = Vec::new();
        for q in 0..=n {
            for p in 0..=n - q {
                let s = p as f64 / n as f64;
                let t = q as f64 / n as f64;
                let pt = if p == n {
                    b
                } else if q == n {
                    c
                } else {
                    [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
                };
                ids[p][q] = vertices.len();
                vertices.push(pt);
            }
        }
        let mut triangles = Vec::new();
        for q in 0..n {
            for p in 0..n - q {
                triangles.push([ids[p][q], ids[p + 1][q], ids[p][q + 1]]);
                if p + q + 2 <= n {
                    triangles.push([ids[p + 1][q], ids[p + 1][q + 1], ids[p][q + 1]]);
                }
            }
        }
        let mut boundary = Vec::new();
        for p in 0..n {
            boundary.push(BoundaryEdge { a: ids[p][0], b: ids[p + 1][0], side: 0 });
        }
        for q in 0..n {
            boundary.push(BoundaryEdge { a: ids[n - q][q], b: ids[n - q - 1][q + 1], side: 1 });
        }
        for q in (0..n).rev() {
            boundary.push(BoundaryEdge { a: ids[0][q + 1], b: ids[0][q], side: 2 });
        }
        let corners = vec![ids[0][0], ids[n][0], ids[0][n]];
        Self::from_parts(vertices, triangles, boundary, corners, sides)
    }

    /// Regular `k`-gon inscribed in the circle of radius `r` about `center`, first vertex at angle `phase`.
    pub fn regular_polygon_vertices(k: usize, r: f64, center: [f64; 2], phase: f64) -> Vec<[f64; 2]> {
        (0..k)
            .map(|i| {
                let a = phase + 2.0 * PI * i as f64 / k as f64;
                [center[0] + r * a.cos(), center[1] + r * a.sin()]
            })
            .collect()
    }

    /// Disk of radius `r` with `rings` equally spaced rings of `6i` vertices each; one circular side, no corners.
    pub fn disk(center: [f64; 2], r: f64, rings: usize) -> Result<Self> {
        if rings == 0 || !(r > 0.0) {
            return Err(Error::InvalidParameter("disk mesh needs rings ≥ 1 and r > 0".into()));
        }
        let radii: Vec<f64> = (1..=rings).map(|i| r * i as f64 / rings as f64).collect();
        Self::disk_with_radii(center, &radii)
    }

    /// Disk whose `i`-th ring (1-based) has `6i` vertices at radius `radii[i-1]` (strictly increasing).
    pub fn disk_with_radii(center: [f64; 2], radii: &[f64]) -> Result<Self> {
        if radii.is_empty() || !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("disk radii must be positive and increasing".into()));
        }
        let rings = radii.len();
        let r = radii[rings - 1];
        let mut vertices = vec![center];
        let mut ring_start = vec![0usize];
        let mut ring_len = vec![1usize];
        for i in 1..=rings {
            ring_start.push(vertices.len());
            let m = 6 * i;
            ring_len.push(m);
            let rad = radii[i - 1];
            for j in 0..m {
                let a = 2.0 * PI * j as f64 / m as f64;
                vertices.push([center[0] + rad * a.cos(), center[1] + rad * a.sin()]);
            }
        }
        let mut triangles = Vec::new();
        for j in 0..6 {
            triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
        }
        for i in 2..=rings {
            let (si, mi) = (ring_start[i - 1], ring_len[i - 1]);
            let (so, mo) = (ring_start[i], ring_len[i]);
            // zipper by angle between ring i-1 (inner) and ring i (outer)
            let (mut a, mut b) = (0usize, 0usize);
            while a < mi || b < mo {
                let ang_in = (a + 1) as f64 / mi as f64;
                let ang_out = (b + 1) as f64 / mo as f64;
                let ia = si + a % mi;
                let ob = so + b % mo;
                if b < mo && (a >= mi || ang_out <= ang_in) {
                    triangles.push([ia, ob, so + (b + 1) % mo]);
                    b += 1;
                } else {
                    triangles.push([ia, ob, si + (a + 1) % mi]);
                    a += 1;
                }
            }
        }
        let (so, mo) = (ring_start[rings], ring_len[rings]);
        let boundary = (0..mo).map(|j| BoundaryEdge { a: so + j, b: so + (j + 1) % mo, side: 0 }).collect();
        Self::from_parts(vertices, triangles, boundary, vec![], vec![SideShape::Circle { center, radius: r }])
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Sides the vertex lies on (empty for interior vertices).
    pub fn vertex_sides(&self, v: usize) -> &[usize] {
        &self.vertex_sides[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        !self.vertex_sides[v].is_empty()
    }

    /// Vertices within two edges of `v`, excluding `v`.
    pub fn two_ring(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.neighbors[v].clone();
        for &w in &self.neighbors[v] {
            out.extend_from_slice(&self.neighbors[w]);
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&w| w != v);
        out
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Mean edge length.
    pub fn mean_edge_length(&self) -> f64 {
        let mut s = 0.0;
        let mut c = 0usize;
        for (v, nb) in self.neighbors.iter().enumerate() {
            for &w in nb {
                if w > v {
                    let p = self.vertices[v];
                    let q = self.vertices[w];
                    s += (p[0] - q[0]).hypot(p[1] - q[1]);
                    c += 1;
                }
            }
        }
        s / c.max(1) as f64
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Euler characteristic `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Boundary vertices of one side in traversal order (corners included).
    pub fn side_vertices(&self, side: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in self.boundary.iter().filter(|e| e.side == side) {
            if out.last() != Some(&e.a) {
                out.push(e.a);
            }
            out.push(e.b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_is_a_disk() {
        let m = BaseMesh::rectangle([0.0, 0.0], [1.0, 2.0], 4, 3).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.area() - 2.0).abs() < 1e-14);
        assert_eq!(m.corners.len(), 4);
        assert_eq!(m.side_vertices(1).len(), 4);
    }

    #[test]
    fn fan_polygon_deduplicates_spokes() {
        let poly = BaseMesh::regular_polygon_vertices(6, 1.0, [0.0, 0.0], 0.0);
        let m = BaseMesh::polygon(&poly, 5).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.triangles.len(), 6 * 25);
        let expected = 3.0 * 3f64.sqrt() / 2.0;
        assert!((m.area() - expected).abs() < 1e-12);
    }

    #[test]
    fn triangle_and_disk_are_disks() {
        let t = BaseMesh::polygon(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]], 6).unwrap();
        assert_eq!(t.euler_characteristic(), 1);
        assert_eq!(t.corners.len(), 3);
        let d = BaseMesh::disk([0.0, 0.0], 1.0, 5).unwrap();
        assert_eq!(d.euler_characteristic(), 1);
        assert_eq!(d.boundary.len(), 30);
    }
}
