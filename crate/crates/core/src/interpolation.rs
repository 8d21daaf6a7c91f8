//! Hermite interpolation into the spline space.
//!
//! An element patch is determined by
//! - the value, gradient and Hessian at each of its vertices,
//! - on each edge, `p - 5` values and `p - 4` normal derivatives at fixed
//!   points (the edge normal is `(V2 - V1)^⊥ / |V2 - V1|` with `V1` the lower
//!   vertex index),
//! - `(p - 3)^2` values inside a quad or `C(p - 4, 2)` inside a triangle.
//!
//! Along every edge the value trace `θ` (degree `p`) and the normal
//! derivative `ω` (degree `p - 1`) are Hermite fits of that data. They fix
//! the two ordinate rows next to the edge; the remaining ordinates come from
//! collocation at the interior points.

use std::sync::Arc;

use log::{debug, warn};
use rayon::prelude::*;

use crate::bernstein::{basis, basis_derivative, ordinate_indices, BasisJets, Patch};
use crate::error::{Error, Result};
use crate::functions::{C2Function, Jet};
use crate::geometry::{dot2, perp, Frame, GeometryMap, SideCoupling};
use crate::linalg::{DenseMatrix, Lu};
use crate::mesh::{ElementKind, MixedMesh};
use crate::scalar::{count, lit, to_f64, Real};
use crate::space::SplineFunction;

pub const COND_WARN: f64 = 1e8;
pub const COND_FAIL: f64 = 1e12;

pub(crate) fn check_degree(p: usize) -> Result<()> {
    if p < 5 {
        Err(Error::DegreeTooLow(p))
    } else {
        Ok(())
    }
}

/// Equidistant candidates `2/p + (l/m)(p-4)/p`, `l = 1..m-1`, `m = 2⌊p/2⌋ - 2`.
pub fn candidate_parameters<T: Real>(p: usize) -> Vec<T> {
    let m = 2 * (p / 2) - 2;
    let pp: T = count(p);
    (1..m)
        .map(|l| lit::<T>(2.0) / pp + count::<T>(l) / count::<T>(m) * count::<T>(p - 4) / pp)
        .collect()
}

/// Edge parameters (measured from `V1`) of the value points `R` and the
/// normal-derivative points `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeParameters<T> {
    pub r: Vec<T>,
    pub s: Vec<T>,
}

pub fn edge_parameters<T: Real>(p: usize) -> Result<EdgeParameters<T>> {
    check_degree(p)?;
    let cand = candidate_parameters::<T>(p);
    // candidates are 1-based below
    let at = |l: usize| cand[l - 1];
    let (r, s) = if p % 2 == 1 {
        let r = (1..=(p - 5) / 2).map(at).chain(((p - 3) / 2..=p - 5).map(|l| at(l + 1))).collect();
        let s = (1..=p - 4).map(at).collect();
        (r, s)
    } else {
        let mut r: Vec<T> = (1..=(p - 6) / 2).map(at).collect();
        r.push(at((p - 2) / 2));
        r.extend(((p - 2) / 2..=p - 5).map(|l| at(l + 2)));
        let s = (1..=(p - 4) / 2).map(at).chain(((p - 2) / 2..=p - 4).map(|l| at(l + 1))).collect();
        (r, s)
    };
    Ok(EdgeParameters { r, s })
}

/// Reference grid indices `(l, k)` of the interior points, matching the
/// interior ordinates.
pub fn interior_indices(kind: ElementKind, p: usize) -> Vec<(usize, usize)> {
    match kind {
        ElementKind::Quad => (2..=p.saturating_sub(2)).flat_map(|l| (2..=p - 2).map(move |k| (l, k))).collect(),
        ElementKind::Triangle => {
            if p < 6 {
                Vec::new()
            } else {
                (2..=p - 4).flat_map(|l| (2..=p - 2 - l).map(move |k| (l, k))).collect()
            }
        }
    }
}

pub fn num_interior(kind: ElementKind, p: usize) -> usize {
    match kind {
        ElementKind::Quad => (p - 3) * (p - 3),
        ElementKind::Triangle => (p - 4) * (p - 5) / 2,
    }
}

/// Collocation system for the interior ordinates of one element kind.
#[derive(Debug)]
pub struct InteriorSystem<T> {
    pub kind: ElementKind,
    pub degree: usize,
    /// Reference points, one per interior ordinate.
    pub points: Vec<(T, T)>,
    pub interior: Vec<usize>,
    pub known: Vec<usize>,
    /// Basis values at the points for the known ordinates.
    coupling: DenseMatrix<T>,
    lu: Option<Lu<T>>,
    pub condition: T,
    pub perturbed: bool,
}

impl<T: Real> InteriorSystem<T> {
    pub fn new(kind: ElementKind, p: usize) -> Result<Self> {
        check_degree(p)?;
        let grid = interior_indices(kind, p);
        let probe = Patch::<T>::zeros(kind, p);
        let interior: Vec<usize> = grid.iter().map(|&(i, j)| probe.index(i, j)).collect();
        let mut is_interior = vec![false; probe.ordinates.len()];
        for &k in &interior {
            is_interior[k] = true;
        }
        let known: Vec<usize> = (0..probe.ordinates.len()).filter(|&k| !is_interior[k]).collect();
        let pp: T = count(p);
        let mut points: Vec<(T, T)> = grid.iter().map(|&(l, k)| (count::<T>(l) / pp, count::<T>(k) / pp)).collect();
        let mut sys = Self::assemble(kind, p, points.clone(), interior.clone(), known.clone())?;
        if sys.condition > lit(COND_WARN) && kind == ElementKind::Triangle {
            let third: T = lit(1.0 / 3.0);
            let shrink: T = lit(0.9);
            points = points.iter().map(|&(u, v)| (third + shrink * (u - third), third + shrink * (v - third))).collect();
            warn!(
                "interior collocation for degree {p} triangles has condition {:.3e}; moving points toward the barycenter",
                to_f64(sys.condition)
            );
            sys = Self::assemble(kind, p, points, interior, known)?;
            sys.perturbed = true;
        }
        if sys.condition > lit(COND_FAIL) {
            return Err(Error::IllConditioned { element: usize::MAX, cond: to_f64(sys.condition) });
        }
        debug!("{kind:?} degree {p}: interior collocation condition {:.3e}", to_f64(sys.condition));
        Ok(sys)
    }

    fn assemble(kind: ElementKind, p: usize, points: Vec<(T, T)>, interior: Vec<usize>, known: Vec<usize>) -> Result<Self> {
        let n = interior.len();
        let mut a = DenseMatrix::zeros(n, n);
        let mut coupling = DenseMatrix::zeros(n, known.len());
        for (r, &(u, v)) in points.iter().enumerate() {
            let b = BasisJets::new(kind, p, u, v).value;
            for (c, &k) in interior.iter().enumerate() {
                a[(r, c)] = b[k];
            }
            for (c, &k) in known.iter().enumerate() {
                coupling[(r, c)] = b[k];
            }
        }
        let (lu, condition) = if n == 0 {
            (None, T::one())
        } else {
            let lu = Lu::factor(&a).map_err(|_| Error::IllConditioned { element: usize::MAX, cond: f64::INFINITY })?;
            let cond = lu.condition_number();
            (Some(lu), cond)
        };
        Ok(Self { kind, degree: p, points, interior, known, coupling, lu, condition, perturbed: false })
    }

    /// Fills the interior ordinates of `patch` so that it takes `values` at
    /// the interior points.
    pub fn solve(&self, patch: &mut Patch<T>, values: &[T]) {
        let Some(lu) = &self.lu else { return };
        let known: Vec<T> = self.known.iter().map(|&k| patch.ordinates[k]).collect();
        let shift = self.coupling.mul_vec(&known);
        let rhs: Vec<T> = values.iter().zip(&shift).map(|(&y, &s)| y - s).collect();
        for (&k, x) in self.interior.iter().zip(lu.solve(&rhs)) {
            patch.ordinates[k] = x;
        }
    }
}

/// Inverse Hermite matrices mapping endpoint data and samples to Bernstein
/// coefficients of `θ` and `ω`.
#[derive(Debug)]
pub struct EdgeSystem<T> {
    pub degree: usize,
    pub params: EdgeParameters<T>,
    theta: DenseMatrix<T>,
    omega: DenseMatrix<T>,
}

fn hermite_matrix<T: Real>(p: usize, order: usize, nodes: &[T]) -> DenseMatrix<T> {
    let n = p + 1;
    let mut rows = Vec::with_capacity(n * n);
    for k in 0..=order {
        rows.extend(basis_derivative(p, k, T::zero()));
    }
    for k in 0..=order {
        rows.extend(basis_derivative(p, k, T::one()));
    }
    for &t in nodes {
        rows.extend(basis(p, t));
    }
    DenseMatrix::from_rows(n, n, rows)
}

impl<T: Real> EdgeSystem<T> {
    pub fn new(p: usize) -> Result<Self> {
        let params = edge_parameters::<T>(p)?;
        let theta = Lu::factor(&hermite_matrix(p, 2, &params.r))?.inverse();
        let omega = Lu::factor(&hermite_matrix(p - 1, 1, &params.s))?.inverse();
        Ok(Self { degree: p, params, theta, omega })
    }

    /// `θ` coefficients from `[θ(0), θ'(0), θ''(0), θ(1), θ'(1), θ''(1), R...]`.
    pub fn theta(&self, data: &[T]) -> Vec<T> {
        self.theta.mul_vec(data)
    }

    /// `ω` coefficients from `[ω(0), ω'(0), ω(1), ω'(1), S...]`.
    pub fn omega(&self, data: &[T]) -> Vec<T> {
        self.omega.mul_vec(data)
    }
}

/// Precomputed per-degree systems shared by all elements.
#[derive(Debug)]
pub struct Systems<T> {
    pub degree: usize,
    pub edge: EdgeSystem<T>,
    pub triangle: InteriorSystem<T>,
    pub quad: InteriorSystem<T>,
}

impl<T: Real> Systems<T> {
    pub fn new(p: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self {
            degree: p,
            edge: EdgeSystem::new(p)?,
            triangle: InteriorSystem::new(ElementKind::Triangle, p)?,
            quad: InteriorSystem::new(ElementKind::Quad, p)?,
        }))
    }

    pub fn interior(&self, kind: ElementKind) -> &InteriorSystem<T> {
        match kind {
            ElementKind::Triangle => &self.triangle,
            ElementKind::Quad => &self.quad,
        }
    }
}

/// Rows 0 and 1 of a patch next to the edge `u = 0`, from the value trace
/// `c` (degree `p`) and the scaled normal-derivative trace `d` (degree
/// `p - 1`). `alpha` and `beta` hold the side's coupling at `v = 0, 1`.
pub fn edge_rows<T: Real>(kind: ElementKind, alpha: [T; 2], beta: [T; 2], c: &[T], d: &[T]) -> (Vec<T>, Vec<T>) {
    let p = c.len() - 1;
    let pp: T = count(p);
    let cc = |j: isize| -> T {
        if j < 0 || j as usize > p {
            T::zero()
        } else {
            c[j as usize]
        }
    };
    let dd = |j: isize| -> T {
        if j < 0 || j as usize >= p {
            T::zero()
        } else {
            d[j as usize]
        }
    };
    let row0 = c.to_vec();
    let row1 = match kind {
        ElementKind::Quad => (0..=p)
            .map(|j| {
                let ji = j as isize;
                let (pj, jj): (T, T) = (count(p - j), count(j));
                let a = (pj * alpha[0] * dd(ji) + jj * alpha[1] * dd(ji - 1)) / pp;
                let b = pj * beta[0] * (cc(ji + 1) - cc(ji)) + jj * beta[1] * (cc(ji) - cc(ji - 1));
                c[j] + (a + b) / pp
            })
            .collect(),
        ElementKind::Triangle => {
            (0..p).map(|j| c[j] + beta[0] * (c[j + 1] - c[j]) + alpha[0] * d[j] / pp).collect()
        }
    };
    (row0, row1)
}

/// Per-element geometric data for the local construction.
#[derive(Clone, Debug)]
pub struct ElementConstructor<T> {
    pub element: usize,
    pub kind: ElementKind,
    pub degree: usize,
    pub map: GeometryMap<T>,
    /// Global vertex ids in local order.
    pub vertices: Vec<usize>,
    pub edges: Vec<LocalEdge<T>>,
    systems: Arc<Systems<T>>,
}

#[derive(Clone, Debug)]
pub struct LocalEdge<T> {
    pub global: usize,
    pub frame: Frame,
    pub coupling: SideCoupling<T>,
    /// Local vertices at `V1` and `V2`.
    pub ends: [usize; 2],
    pub start: [T; 2],
    pub vector: [T; 2],
    pub normal: [T; 2],
}

impl<T: Real> LocalEdge<T> {
    pub fn point(&self, t: T) -> [T; 2] {
        [self.start[0] + t * self.vector[0], self.start[1] + t * self.vector[1]]
    }
}

/// Sizes of the local data blocks of an element.
pub fn local_layout(kind: ElementKind, p: usize) -> (usize, usize, usize) {
    let n = kind.num_vertices();
    (6 * n, (2 * p - 9) * n, num_interior(kind, p))
}

impl<T: Real> ElementConstructor<T> {
    pub fn new(mesh: &MixedMesh<T>, e: usize, systems: Arc<Systems<T>>) -> Self {
        let el = mesh.element(e);
        let map = GeometryMap::from_element(mesh, e);
        let edges = el
            .edges
            .iter()
            .map(|&g| {
                let frame = Frame::for_edge(mesh, e, g);
                let coupling = SideCoupling::from_map(&frame.map(&map));
                let [a, b] = mesh.edge(g).vertices;
                let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
                let vector = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = dot2(vector, vector).sqrt();
                let np = perp(vector);
                LocalEdge {
                    global: g,
                    ends: [el.local_vertex(a).unwrap(), el.local_vertex(b).unwrap()],
                    frame,
                    coupling,
                    start: pa,
                    vector,
                    normal: [np[0] / len, np[1] / len],
                }
            })
            .collect();
        Self { element: e, kind: el.kind, degree: systems.degree, map, vertices: el.vertices.clone(), edges, systems }
    }

    pub fn local_len(&self) -> usize {
        let (a, b, c) = local_layout(self.kind, self.degree);
        a + b + c
    }

    pub fn interior_system(&self) -> &InteriorSystem<T> {
        self.systems.interior(self.kind)
    }

    pub fn edge_parameters(&self) -> &EdgeParameters<T> {
        &self.systems.edge.params
    }

    /// Physical interior points.
    pub fn interior_points(&self) -> Vec<[T; 2]> {
        self.interior_system().points.iter().map(|&(u, v)| self.map.eval(u, v)).collect()
    }

    /// Local data vector of `f`: vertex jets, edge samples, interior values.
    pub fn local_data<F: C2Function<T> + ?Sized>(&self, mesh: &MixedMesh<T>, f: &F) -> Vec<T> {
        let mut out = Vec::with_capacity(self.local_len());
        for &v in &self.vertices {
            let x = mesh.vertex(v);
            out.extend(f.jet(x[0], x[1]).to_array());
        }
        let params = self.edge_parameters();
        for edge in &self.edges {
            out.extend(edge_samples(edge, params, f));
        }
        for x in self.interior_points() {
            out.push(f.value(x[0], x[1]));
        }
        out
    }

    /// The element patch for the given local data, together with the largest
    /// disagreement between two edges on a shared corner ordinate.
    pub fn construct_checked(&self, data: &[T]) -> Result<(Patch<T>, T)> {
        let p = self.degree;
        if data.len() != self.local_len() {
            return Err(Error::DimensionMismatch(format!("{} local values, expected {}", data.len(), self.local_len())));
        }
        let n = self.kind.num_vertices();
        let (nv, ne, _) = local_layout(self.kind, p);
        let per_edge = 2 * p - 9;
        let mut patch: Patch<T> = Patch::zeros(self.kind, p);
        let mut set = vec![false; patch.ordinates.len()];
        let mut defect = T::zero();
        let systems = &self.systems;
        for (k, edge) in self.edges.iter().enumerate() {
            let ja = Jet::from_array(vertex_block(data, edge.ends[0]));
            let jb = Jet::from_array(vertex_block(data, edge.ends[1]));
            let samples = &data[nv + k * per_edge..nv + (k + 1) * per_edge];
            let (r, s) = samples.split_at(p - 5);
            let (c, d) = edge_trace(&systems.edge, edge, &ja, &jb, r, s);
            let (row0, row1) = edge_rows(self.kind, edge.coupling.alpha, edge.coupling.beta, &c, &d);
            for (i, row) in [row0, row1].into_iter().enumerate() {
                for (j, value) in row.into_iter().enumerate() {
                    let (a, b) = edge.frame.ordinate(p, i, j);
                    let idx = patch.index(a, b);
                    if set[idx] {
                        let scale = T::one().max(value.abs());
                        defect = defect.max((patch.ordinates[idx] - value).abs() / scale);
                    } else {
                        patch.ordinates[idx] = value;
                        set[idx] = true;
                    }
                }
            }
        }
        debug_assert_eq!(nv, 6 * n);
        self.interior_system().solve(&mut patch, &data[nv + ne..]);
        Ok((patch, defect))
    }

    pub fn construct(&self, data: &[T]) -> Result<Patch<T>> {
        self.construct_checked(data).map(|r| r.0)
    }

    /// Columns are the patches of the unit local data vectors.
    pub fn extraction(&self) -> Result<DenseMatrix<T>> {
        let n = self.local_len();
        let rows = crate::bernstein::num_ordinates(self.kind, self.degree);
        let mut e = DenseMatrix::zeros(rows, n);
        let mut unit = vec![T::zero(); n];
        for k in 0..n {
            unit[k] = T::one();
            let patch = self.construct(&unit)?;
            e.set_column(k, &patch.ordinates);
            unit[k] = T::zero();
        }
        Ok(e)
    }
}

fn vertex_block<T: Real>(data: &[T], local_vertex: usize) -> [T; 6] {
    let mut out = [T::zero(); 6];
    out.copy_from_slice(&data[6 * local_vertex..6 * local_vertex + 6]);
    out
}

/// Edge samples of `f`: values at the `R` points, then normal derivatives at
/// the `S` points.
pub fn edge_samples<T: Real, F: C2Function<T> + ?Sized>(edge: &LocalEdge<T>, params: &EdgeParameters<T>, f: &F) -> Vec<T> {
    let mut out = Vec::with_capacity(params.r.len() + params.s.len());
    for &t in &params.r {
        let x = edge.point(t);
        out.push(f.value(x[0], x[1]));
    }
    for &t in &params.s {
        let x = edge.point(t);
        out.push(dot2(edge.normal, f.jet(x[0], x[1]).grad));
    }
    out
}

/// Bernstein coefficients `(c, d)` of the value trace and of the normal
/// derivative divided by the edge length.
pub fn edge_trace<T: Real>(
    sys: &EdgeSystem<T>,
    edge: &LocalEdge<T>,
    ja: &Jet<T>,
    jb: &Jet<T>,
    r: &[T],
    s: &[T],
) -> (Vec<T>, Vec<T>) {
    let e = edge.vector;
    let n = edge.normal;
    let hess = |j: &Jet<T>, a: [T; 2], b: [T; 2]| {
        a[0] * (j.hess[0] * b[0] + j.hess[1] * b[1]) + a[1] * (j.hess[1] * b[0] + j.hess[2] * b[1])
    };
    let mut td = vec![ja.value, dot2(ja.grad, e), hess(ja, e, e), jb.value, dot2(jb.grad, e), hess(jb, e, e)];
    td.extend_from_slice(r);
    let mut od = vec![dot2(ja.grad, n), hess(ja, n, e), dot2(jb.grad, n), hess(jb, n, e)];
    od.extend_from_slice(s);
    let c = sys.theta(&td);
    let len = dot2(e, e).sqrt();
    let d = sys.omega(&od).into_iter().map(|x| x / len).collect();
    (c, d)
}

/// Interpolation points of the whole mesh.
#[derive(Clone, Debug)]
pub struct InterpolationPoints<T> {
    pub r: Vec<Vec<[T; 2]>>,
    pub s: Vec<Vec<[T; 2]>>,
    pub normals: Vec<[T; 2]>,
    pub q: Vec<Vec<[T; 2]>>,
}

pub fn interpolation_points<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Result<InterpolationPoints<T>> {
    let systems = Systems::new(p)?;
    let params = &systems.edge.params;
    let mut out = InterpolationPoints { r: Vec::new(), s: Vec::new(), normals: Vec::new(), q: Vec::new() };
    for ed in mesh.edges() {
        let [a, b] = ed.vertices;
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        let at = |t: T| [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
        out.r.push(params.r.iter().map(|&t| at(t)).collect());
        out.s.push(params.s.iter().map(|&t| at(t)).collect());
        let np = perp([pb[0] - pa[0], pb[1] - pa[1]]);
        let len = dot2(np, np).sqrt();
        out.normals.push([np[0] / len, np[1] / len]);
    }
    for e in 0..mesh.num_elements() {
        let map = GeometryMap::from_element(mesh, e);
        let sys = systems.interior(mesh.element(e).kind);
        out.q.push(sys.points.iter().map(|&(u, v)| map.eval(u, v)).collect());
    }
    Ok(out)
}

/// Element constructors for every element of the mesh.
pub fn constructors<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Result<Vec<ElementConstructor<T>>> {
    let systems = Systems::new(p)?;
    Ok((0..mesh.num_elements()).map(|e| ElementConstructor::new(mesh, e, systems.clone())).collect())
}

/// The interpolant of `f` restricted to element `e`, computed from that
/// element's own data only.
pub fn local_project<T: Real, F: C2Function<T> + ?Sized>(f: &F, mesh: &MixedMesh<T>, e: usize, p: usize) -> Result<Patch<T>> {
    let ctor = ElementConstructor::new(mesh, e, Systems::new(p)?);
    ctor.construct(&ctor.local_data(mesh, f))
}

/// The interpolant of `f` in the spline space of degree `p`.
pub fn project<T: Real, F: C2Function<T> + ?Sized>(f: &F, mesh: &MixedMesh<T>, p: usize) -> Result<SplineFunction<T>> {
    let ctors = constructors(mesh, p)?;
    project_with(f, mesh, &ctors)
}

pub fn project_with<T: Real, F: C2Function<T> + ?Sized>(
    f: &F,
    mesh: &MixedMesh<T>,
    ctors: &[ElementConstructor<T>],
) -> Result<SplineFunction<T>> {
    let p = ctors.first().map(|c| c.degree).unwrap_or(5);
    let patches = ctors
        .par_iter()
        .map(|c| c.construct(&c.local_data(mesh, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SplineFunction::new(p, patches))
}

/// Reference ordinates of every element patch as `(i, j)` pairs.
pub fn ordinate_layout(kind: ElementKind, p: usize) -> Vec<(usize, usize)> {
    ordinate_indices(kind, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Polynomial, Trig};
    use crate::mesh::load_mesh;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn point_counts_and_choices() {
        let p5 = edge_parameters::<f64>(5).unwrap();
        assert!(p5.r.is_empty());
        assert_eq!(p5.s.len(), 1);
        assert!(close(p5.s[0], 0.5, 1e-15));
        assert_eq!(interior_indices(ElementKind::Quad, 5).len(), 4);
        assert!(interior_indices(ElementKind::Triangle, 5).is_empty());

        let c6 = candidate_parameters::<f64>(6);
        let p6 = edge_parameters::<f64>(6).unwrap();
        assert_eq!(p6.r, vec![c6[1]]);
        assert_eq!(p6.s, vec![c6[0], c6[2]]);

        let c9 = candidate_parameters::<f64>(9);
        let p9 = edge_parameters::<f64>(9).unwrap();
        assert_eq!(p9.r, vec![c9[0], c9[1], c9[3], c9[4]]);
        assert_eq!(p9.s, c9[..5].to_vec());

        for p in 5..=10 {
            let e = edge_parameters::<f64>(p).unwrap();
            assert_eq!((e.r.len(), e.s.len()), (p - 5, p - 4));
            assert_eq!(interior_indices(ElementKind::Quad, p).len(), num_interior(ElementKind::Quad, p));
            assert_eq!(interior_indices(ElementKind::Triangle, p).len(), num_interior(ElementKind::Triangle, p));
        }
        assert!(edge_parameters::<f64>(4).is_err());
    }

    #[test]
    fn interior_systems_are_well_conditioned() {
        for p in 5..=10 {
            for kind in [ElementKind::Triangle, ElementKind::Quad] {
                let sys = InteriorSystem::<f64>::new(kind, p).unwrap();
                assert!(sys.condition < COND_WARN, "{kind:?} p={p}: {}", sys.condition);
                assert!(!sys.perturbed);
            }
        }
    }

    fn mixed_mesh() -> MixedMesh<f64> {
        load_mesh(
            r#"{"vertices": [[0,0],[1,0],[2.1,0.1],[0,1],[1.1,0.9],[2,1.2],[1.2,2]],
                "quads": [[0,1,4,3],[1,2,5,4]], "triangles": [[3,4,6],[4,5,6]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn corner_ordinates_agree_between_edges() {
        let mesh = mixed_mesh();
        for p in [5, 6, 7, 9] {
            for ctor in constructors(&mesh, p).unwrap() {
                let (_, defect) = ctor.construct_checked(&ctor.local_data(&mesh, &Trig)).unwrap();
                assert!(defect < 1e-12, "p={p} element {}: {defect}", ctor.element);
            }
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let mesh = mixed_mesh();
        for p in [5, 6, 8] {
            let f = Polynomial::<f64>::dense(p);
            let s = project(&f, &mesh, p).unwrap();
            for e in 0..mesh.num_elements() {
                let map = GeometryMap::from_element(&mesh, e);
                for &(u, v) in &[(0.1, 0.2), (0.3, 0.3), (0.0, 0.5), (0.05, 0.9)] {
                    if mesh.element(e).kind == ElementKind::Triangle && u + v > 1.0 {
                        continue;
                    }
                    let x = map.eval(u, v);
                    assert!(close(s.patches[e].eval(u, v).unwrap(), f.value(x[0], x[1]), 1e-10));
                }
            }
        }
    }

    #[test]
    fn local_projection_examples() {
        let mesh = mixed_mesh();
        let c = Polynomial::new([((0, 0), 2.5)]);
        let patch = local_project(&c, &mesh, 0, 6).unwrap();
        assert!(patch.ordinates.iter().all(|&b| close(b, 2.5, 1e-12)));
        // linear f on a bilinear quad gives f ∘ F, whose ordinates are f at the bilinear control net
        let lin = Polynomial::new([((1, 0), 1.0), ((0, 1), -0.5), ((0, 0), 0.25)]);
        let q = local_project(&lin, &mesh, 2, 5).unwrap();
        let map = GeometryMap::from_element(&mesh, 2);
        for (k, (i, j)) in ordinate_indices(ElementKind::Quad, 5).into_iter().enumerate() {
            let x = map.eval(i as f64 / 5.0, j as f64 / 5.0);
            assert!(close(q.ordinates[k], lin.value(x[0], x[1]), 1e-12));
        }
    }

    #[test]
    fn edge_rows_constant_function() {
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let c = vec![1.0; 7];
            let d = vec![0.0; 6];
            let (r0, r1) = edge_rows(kind, [0.7, -0.3], [0.2, 0.4], &c, &d);
            assert!(r0.iter().all(|&x| x == 1.0));
            let expected_len = if kind == ElementKind::Quad { 7 } else { 6 };
            assert_eq!(r1.len(), expected_len);
            assert!(r1.iter().all(|&x| close(x, 1.0, 1e-15)), "{kind:?} {r1:?}");
        }
    }
}
