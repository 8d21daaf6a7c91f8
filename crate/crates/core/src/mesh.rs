//! Mixed triangle/quadrilateral meshes.
//!
//! Elements store their vertices counterclockwise. Triangles are parametrized
//! over the reference triangle by `F(u,v) = (1-u-v) V0 + u V1 + v V2`, quads
//! over the unit square by `F(u,v) = (1-u)(1-v) V0 + u(1-v) V1 + u v V2 + (1-u) v V3`.
//! Local edge `k` joins local vertices `k` and `k+1 (mod n)`.
//!
//! Edges are derived from the element vertex lists: each edge is keyed by its
//! sorted vertex pair, and edges are numbered in lexicographic key order. The
//! canonical orientation of an edge runs from the lower to the higher vertex
//! index.
//!
//! Elements are numbered with all triangles first (in input order), followed
//! by all quads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Triangle,
    Quad,
}

impl ElementKind {
    pub fn num_vertices(self) -> usize {
        match self {
            ElementKind::Triangle => 3,
            ElementKind::Quad => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Element {
    pub fn local_vertex(&self, global: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == global)
    }

    pub fn local_edge(&self, global: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == global)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// `(lower, higher)` vertex indices; also the canonical orientation.
    pub vertices: [usize; 2],
    pub elements: Vec<usize>,
    pub boundary: bool,
}

#[derive(Clone, Debug)]
pub struct MixedMesh<T> {
    vertices: Vec<[T; 2]>,
    elements: Vec<Element>,
    edges: Vec<Edge>,
    vertex_elements: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
    num_triangles: usize,
}

/// On-disk mesh description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub quads: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
}

pub fn load_mesh<T: Real>(source: &str) -> Result<MixedMesh<T>> {
    let file: MeshFile = serde_json::from_str(source).map_err(|e| Error::MalformedMesh(e.to_string()))?;
    MixedMesh::from_file(&file)
}

/// Meshes shipped with the crate, each containing quad-quad, quad-triangle
/// and triangle-triangle interfaces.
pub const DESK_MESHES: [(&str, &str); 3] = [
    ("desk1", include_str!("../meshes/desk1.json")),
    ("desk2", include_str!("../meshes/desk2.json")),
    ("desk3", include_str!("../meshes/desk3.json")),
];

/// A shipped mesh by name, with or without the `.json` suffix.
pub fn desk_mesh<T: Real>(name: &str) -> Option<Result<MixedMesh<T>>> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    DESK_MESHES.iter().find(|(n, _)| *n == name).map(|(_, src)| load_mesh(src))
}

fn cross<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

fn sub<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm<T: Real>(a: [T; 2]) -> T {
    a[0].hypot(a[1])
}

/// Interior angles of the triangle `(a, b, c)`.
fn triangle_angles<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> [T; 3] {
    let angle = |p: [T; 2], q: [T; 2], r: [T; 2]| {
        let u = sub(q, p);
        let w = sub(r, p);
        cross(u, w).abs().atan2(u[0] * w[0] + u[1] * w[1])
    };
    [angle(a, b, c), angle(b, c, a), angle(c, a, b)]
}

const MIN_ANGLE: f64 = 1e-6;

impl<T: Real> MixedMesh<T> {
    pub fn from_file(file: &MeshFile) -> Result<Self> {
        let vertices = file.vertices.iter().map(|v| [lit(v[0]), lit(v[1])]).collect();
        let triangles: Vec<Vec<usize>> = file.triangles.iter().map(|t| t.to_vec()).collect();
        let quads: Vec<Vec<usize>> = file.quads.iter().map(|q| q.to_vec()).collect();
        let mesh = Self::new(vertices, &triangles, &quads)?;
        if let Some(edges) = &file.edges {
            let mut given: Vec<[usize; 2]> = edges.iter().map(|e| [e[0].min(e[1]), e[0].max(e[1])]).collect();
            given.sort_unstable();
            given.dedup();
            let derived: Vec<[usize; 2]> = mesh.edges.iter().map(|e| e.vertices).collect();
            if given != derived {
                return Err(Error::MalformedMesh("edge list does not match the element edges".into()));
            }
        }
        Ok(mesh)
    }

    pub fn to_file(&self) -> MeshFile {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        MeshFile {
            vertices: self.vertices.iter().map(|v| [f(v[0]), f(v[1])]).collect(),
            triangles: self.triangles().map(|e| [e.vertices[0], e.vertices[1], e.vertices[2]]).collect(),
            quads: self.quads().map(|e| [e.vertices[0], e.vertices[1], e.vertices[2], e.vertices[3]]).collect(),
            edges: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("mesh serialization")
    }

    /// Builds and validates a mesh. Triangles are numbered before quads.
    pub fn new(vertices: Vec<[T; 2]>, triangles: &[Vec<usize>], quads: &[Vec<usize>]) -> Result<Self> {
        let nv = vertices.len();
        if nv == 0 || triangles.len() + quads.len() == 0 {
            return Err(Error::MalformedMesh("mesh needs vertices and at least one element".into()));
        }
        if let Some(i) = vertices.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::MalformedMesh(format!("vertex {i} has non-finite coordinates")));
        }
        let mut elements = Vec::with_capacity(triangles.len() + quads.len());
        for (kind, list) in [(ElementKind::Triangle, triangles), (ElementKind::Quad, quads)] {
            for verts in list {
                if verts.len() != kind.num_vertices() {
                    return Err(Error::MalformedMesh(format!("{kind:?} with {} vertices", verts.len())));
                }
                if let Some(&bad) = verts.iter().find(|&&v| v >= nv) {
                    return Err(Error::MalformedMesh(format!("vertex index {bad} out of range")));
                }
                for a in 0..verts.len() {
                    for b in a + 1..verts.len() {
                        if verts[a] == verts[b] {
                            return Err(Error::MalformedMesh(format!("element repeats vertex {}", verts[a])));
                        }
                    }
                }
                elements.push(Element { kind, vertices: verts.clone(), edges: Vec::new() });
            }
        }

        Self::check_duplicate_vertices(&vertices)?;

        for (ei, el) in elements.iter().enumerate() {
            let p: Vec<[T; 2]> = el.vertices.iter().map(|&v| vertices[v]).collect();
            let n = p.len();
            for k in 0..n {
                let c = cross(sub(p[(k + 1) % n], p[k]), sub(p[(k + n - 1) % n], p[k]));
                if !(c > T::zero()) {
                    return Err(Error::InconsistentOrientation(format!(
                        "element {ei} is not counterclockwise and convex at local vertex {k}"
                    )));
                }
            }
        }

        let mut edge_map: BTreeMap<[usize; 2], Vec<(usize, bool)>> = BTreeMap::new();
        for (ei, el) in elements.iter().enumerate() {
            let n = el.vertices.len();
            for k in 0..n {
                let (a, b) = (el.vertices[k], el.vertices[(k + 1) % n]);
                edge_map.entry([a.min(b), a.max(b)]).or_default().push((ei, a < b));
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_index = BTreeMap::new();
        for (key, inc) in &edge_map {
            if inc.len() > 2 {
                return Err(Error::NonManifoldEdge(key[0], key[1]));
            }
            if inc.len() == 2 && inc[0].1 == inc[1].1 {
                return Err(Error::InconsistentOrientation(format!(
                    "elements {} and {} traverse edge ({}, {}) in the same direction",
                    inc[0].0, inc[1].0, key[0], key[1]
                )));
            }
            edge_index.insert(*key, edges.len());
            let mut els: Vec<usize> = inc.iter().map(|x| x.0).collect();
            els.sort_unstable();
            edges.push(Edge { vertices: *key, boundary: els.len() == 1, elements: els });
        }
        for el in elements.iter_mut() {
            let n = el.vertices.len();
            el.edges = (0..n)
                .map(|k| {
                    let (a, b) = (el.vertices[k], el.vertices[(k + 1) % n]);
                    edge_index[&[a.min(b), a.max(b)]]
                })
                .collect();
        }

        let mut vertex_elements = vec![Vec::new(); nv];
        for (ei, el) in elements.iter().enumerate() {
            for &v in &el.vertices {
                vertex_elements[v].push(ei);
            }
        }
        let mut vertex_edges = vec![Vec::new(); nv];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e.vertices[0]].push(ei);
            vertex_edges[e.vertices[1]].push(ei);
        }
        if let Some(v) = vertex_elements.iter().position(Vec::is_empty) {
            return Err(Error::MalformedMesh(format!("vertex {v} belongs to no element")));
        }

        let mesh = Self { vertices, elements, edges, vertex_elements, vertex_edges, num_triangles: triangles.len() };
        mesh.check_hanging_vertices()?;
        for ei in 0..mesh.elements.len() {
            if !(mesh.element_min_angle(ei) > lit(MIN_ANGLE)) {
                return Err(Error::DegenerateElement(ei));
            }
        }
        Ok(mesh)
    }

    fn diameter(vertices: &[[T; 2]]) -> T {
        let (mut lo, mut hi) = (vertices[0], vertices[0]);
        for v in vertices {
            lo = [lo[0].min(v[0]), lo[1].min(v[1])];
            hi = [hi[0].max(v[0]), hi[1].max(v[1])];
        }
        norm(sub(hi, lo))
    }

    fn check_duplicate_vertices(vertices: &[[T; 2]]) -> Result<()> {
        let tol = Self::diameter(vertices) * lit(1e-12);
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| vertices[a][0].partial_cmp(&vertices[b][0]).unwrap().then(a.cmp(&b)));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if vertices[b][0] - vertices[a][0] > tol {
                    break;
                }
                if (vertices[b][1] - vertices[a][1]).abs() <= tol {
                    return Err(Error::DuplicateVertex(a.min(b), a.max(b)));
                }
            }
        }
        Ok(())
    }

    fn check_hanging_vertices(&self) -> Result<()> {
        let tol = Self::diameter(&self.vertices) * lit(1e-10);
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].partial_cmp(&self.vertices[b][0]).unwrap().then(a.cmp(&b)));
        let xs: Vec<T> = order.iter().map(|&i| self.vertices[i][0]).collect();
        for e in &self.edges {
            let [a, b] = e.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let lo = pa[0].min(pb[0]) - tol;
            let hi = pa[0].max(pb[0]) + tol;
            let first = xs.partition_point(|&x| x < lo);
            let d = sub(pb, pa);
            let len2 = d[0] * d[0] + d[1] * d[1];
            for &v in &order[first..] {
                let pv = self.vertices[v];
                if pv[0] > hi {
                    break;
                }
                if v == a || v == b {
                    continue;
                }
                let w = sub(pv, pa);
                let t = (w[0] * d[0] + w[1] * d[1]) / len2;
                if t > T::zero() && t < T::one() && cross(d, w).abs() / len2.sqrt() <= tol {
                    return Err(Error::HangingVertex { vertex: v, a, b });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> [T; 2] {
        self.vertices[i]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.num_triangles
    }

    pub fn num_quads(&self) -> usize {
        self.elements.len() - self.num_triangles
    }

    pub fn triangles(&self) -> impl Iterator<Item = &Element> {
        self.elements[..self.num_triangles].iter()
    }

    pub fn quads(&self) -> impl Iterator<Item = &Element> {
        self.elements[self.num_triangles..].iter()
    }

    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_edges[v].iter().any(|&e| self.edges[e].boundary)
    }

    pub fn element_points(&self, e: usize) -> Vec<[T; 2]> {
        self.elements[e].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e].vertices;
        norm(sub(self.vertices[b], self.vertices[a]))
    }

    pub fn element_area(&self, e: usize) -> T {
        let p = self.element_points(e);
        let n = p.len();
        let twice: T = (0..n).map(|k| cross(p[k], p[(k + 1) % n])).sum();
        twice / lit(2.0)
    }

    pub fn area(&self) -> T {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    pub fn element_diameter(&self, e: usize) -> T {
        let p = self.element_points(e);
        let mut d = T::zero();
        for a in 0..p.len() {
            for b in a + 1..p.len() {
                d = d.max(norm(sub(p[a], p[b])));
            }
        }
        d
    }

    fn element_min_angle(&self, e: usize) -> T {
        let p = self.element_points(e);
        let tris: Vec<[usize; 3]> = match self.elements[e].kind {
            ElementKind::Triangle => vec![[0, 1, 2]],
            ElementKind::Quad => vec![[0, 1, 2], [0, 2, 3], [1, 2, 3], [1, 3, 0]],
        };
        let mut rho = T::infinity();
        for [a, b, c] in tris {
            if !(cross(sub(p[b], p[a]), sub(p[c], p[a])) > T::zero()) {
                return T::zero();
            }
            for ang in triangle_angles(p[a], p[b], p[c]) {
                rho = rho.min(ang);
            }
        }
        rho
    }

    /// Smallest angle over all triangles and over the four triangles obtained
    /// from the two diagonal splits of every quad.
    pub fn shape_regularity(&self) -> Result<T> {
        let mut rho = T::infinity();
        for e in 0..self.elements.len() {
            if self.element_area(e) <= T::zero() {
                return Err(Error::DegenerateElement(e));
            }
            let r = self.element_min_angle(e);
            if r <= T::zero() {
                return Err(Error::DegenerateElement(e));
            }
            rho = rho.min(r);
        }
        Ok(rho)
    }

    pub fn longest_edge(&self) -> T {
        (0..self.edges.len()).map(|e| self.edge_length(e)).fold(T::zero(), T::max)
    }

    /// Uniform refinement: triangles split at edge midpoints, quads split at
    /// the bilinear images of the parameter midpoints and the center.
    pub fn refine(&self) -> Result<Self> {
        let half: T = lit(0.5);
        let mut vertices = self.vertices.clone();
        let mut midpoint = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let [a, b] = e.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            midpoint.push(vertices.len());
            vertices.push([(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]);
        }
        let mut triangles = Vec::with_capacity(4 * self.num_triangles);
        for el in self.triangles() {
            let v = &el.vertices;
            let m: Vec<usize> = el.edges.iter().map(|&e| midpoint[e]).collect();
            triangles.push(vec![v[0], m[0], m[2]]);
            triangles.push(vec![m[0], v[1], m[1]]);
            triangles.push(vec![m[2], m[1], v[2]]);
            triangles.push(vec![m[0], m[1], m[2]]);
        }
        let mut quads = Vec::with_capacity(4 * self.num_quads());
        for el in self.quads() {
            let v = &el.vertices;
            let m: Vec<usize> = el.edges.iter().map(|&e| midpoint[e]).collect();
            let p: Vec<[T; 2]> = v.iter().map(|&i| self.vertices[i]).collect();
            let quarter: T = lit(0.25);
            let c = vertices.len();
            vertices.push([
                (p[0][0] + p[1][0] + p[2][0] + p[3][0]) * quarter,
                (p[0][1] + p[1][1] + p[2][1] + p[3][1]) * quarter,
            ]);
            quads.push(vec![v[0], m[0], c, m[3]]);
            quads.push(vec![m[0], v[1], m[1], c]);
            quads.push(vec![c, m[1], v[2], m[2]]);
            quads.push(vec![m[3], c, m[2], v[3]]);
        }
        Self::new(vertices, &triangles, &quads)
    }

    /// Refines `levels` times.
    pub fn refined(&self, levels: usize) -> Result<Self> {
        let mut m = self.clone();
        for _ in 0..levels {
            m = m.refine()?;
        }
        Ok(m)
    }

    /// Casts the coordinates to another scalar type.
    pub fn cast<U: Real>(&self) -> MixedMesh<U> {
        let conv = |x: T| U::from_f64(x.to_f64().unwrap()).unwrap();
        MixedMesh {
            vertices: self.vertices.iter().map(|v| [conv(v[0]), conv(v[1])]).collect(),
            elements: self.elements.clone(),
            edges: self.edges.clone(),
            vertex_elements: self.vertex_elements.clone(),
            vertex_edges: self.vertex_edges.clone(),
            num_triangles: self.num_triangles,
        }
    }
}
