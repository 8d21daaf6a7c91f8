//! Degrees of freedom, element extraction and the cardinal basis.
//!
//! Global DOFs are numbered vertex by vertex (six each, physical derivatives
//! in the order `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`), then edge by
//! edge (`p - 5` values followed by `p - 4` normal derivatives), then element
//! by element (interior values on the reference grid).
//!
//! The edge trace coefficients `d_j` are the Bernstein coefficients of the
//! normal derivative divided by the edge length, so that the physical normal
//! derivative along an edge of length `|e|` is `|e| Σ d_j B_j^{p-1}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::{basis, num_ordinates, Patch};
use crate::error::{Error, Result};
use crate::functions::C2Function;
use crate::geometry::{dot2, CanonicalInterface, GeometryMap, GluingData};
use crate::interpolation::{constructors, edge_rows, interior_indices, num_interior, ElementConstructor};
use crate::linalg::{least_squares, DenseMatrix};
use crate::mesh::{ElementKind, MixedMesh};
use crate::scalar::{count, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DofDescriptor {
    Vertex { vertex: usize, order: (usize, usize) },
    EdgeValue { edge: usize, index: usize },
    EdgeNormal { edge: usize, index: usize },
    Interior { element: usize, grid: (usize, usize) },
}

pub const VERTEX_ORDERS: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// The four terms of the dimension count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dimension {
    pub vertex: usize,
    pub edge: usize,
    pub quad: usize,
    pub triangle: usize,
}

impl Dimension {
    pub fn total(&self) -> usize {
        self.vertex + self.edge + self.quad + self.triangle
    }
}

pub fn dimension_terms<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Result<Dimension> {
    if p < 5 {
        return Err(Error::DegreeTooLow(p));
    }
    Ok(Dimension {
        vertex: 6 * mesh.num_vertices(),
        edge: (2 * p - 9) * mesh.num_edges(),
        quad: num_interior(ElementKind::Quad, p) * mesh.num_quads(),
        triangle: num_interior(ElementKind::Triangle, p) * mesh.num_triangles(),
    })
}

pub fn dimension<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Result<usize> {
    dimension_terms(mesh, p).map(|d| d.total())
}

/// One polynomial patch per element.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineFunction<T> {
    pub degree: usize,
    pub patches: Vec<Patch<T>>,
}

impl<T: Real> SplineFunction<T> {
    pub fn new(degree: usize, patches: Vec<Patch<T>>) -> Self {
        Self { degree, patches }
    }

    pub fn zero(mesh: &MixedMesh<T>, p: usize) -> Self {
        Self::new(p, mesh.elements().iter().map(|e| Patch::zeros(e.kind, p)).collect())
    }

    /// Value at reference point `(u, v)` of element `e`.
    pub fn eval(&self, e: usize, u: T, v: T) -> Result<T> {
        self.patches[e].eval(u, v)
    }

    /// Physical value, gradient and Hessian at reference point `(u, v)` of
    /// element `e`.
    pub fn physical_jet(&self, mesh: &MixedMesh<T>, e: usize, u: T, v: T) -> Result<crate::functions::Jet<T>> {
        GeometryMap::from_element(mesh, e).physical_jet(u, v, self.patches[e].jet(u, v))
    }

    pub fn max_abs(&self) -> T {
        self.patches.iter().map(|p| p.max_abs()).fold(T::zero(), T::max)
    }

    pub fn max_difference(&self, other: &Self) -> T {
        self.patches
            .iter()
            .zip(&other.patches)
            .flat_map(|(a, b)| a.ordinates.iter().zip(&b.ordinates).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max)
    }
}

/// A spline seen as a function of physical coordinates. Points are located
/// by inverting element maps, so this is meant for sampling, not for hot
/// loops.
pub struct PhysicalSpline<'a, T> {
    pub spline: &'a SplineFunction<T>,
    pub mesh: &'a MixedMesh<T>,
    maps: Vec<GeometryMap<T>>,
}

impl<'a, T: Real> PhysicalSpline<'a, T> {
    pub fn new(spline: &'a SplineFunction<T>, mesh: &'a MixedMesh<T>) -> Self {
        let maps = (0..mesh.num_elements()).map(|e| GeometryMap::from_element(mesh, e)).collect();
        Self { spline, mesh, maps }
    }

    /// Element and reference coordinates of `x`, clamped onto the element.
    pub fn locate(&self, x: [T; 2]) -> Option<(usize, T, T)> {
        let tol: T = lit(1e-9);
        self.maps.iter().enumerate().find_map(|(e, map)| {
            let (u, v) = map.inverse(x).ok()?;
            let inside = match map.kind {
                ElementKind::Triangle => u >= -tol && v >= -tol && u + v <= T::one() + tol,
                ElementKind::Quad => u >= -tol && v >= -tol && u <= T::one() + tol && v <= T::one() + tol,
            };
            if !inside {
                return None;
            }
            let (u, v) = (u.max(T::zero()), v.max(T::zero()));
            let (u, v) = match map.kind {
                ElementKind::Triangle if u + v > T::one() => (u / (u + v), v / (u + v)),
                _ => (u.min(T::one()), v.min(T::one())),
            };
            Some((e, u, v))
        })
    }
}

impl<T: Real> C2Function<T> for PhysicalSpline<'_, T> {
    /// Panics outside the mesh.
    fn jet(&self, x: T, y: T) -> crate::functions::Jet<T> {
        let (e, u, v) = self.locate([x, y]).expect("point outside the mesh");
        self.maps[e].physical_jet(u, v, self.spline.patches[e].jet(u, v)).expect("regular element map")
    }
}

/// A cardinal basis function, stored over the elements of its support.
#[derive(Clone, Debug)]
pub struct BasisFunction<T> {
    pub dof: DofDescriptor,
    pub support: Vec<(usize, Patch<T>)>,
}

impl<T: Real> BasisFunction<T> {
    pub fn to_spline(&self, mesh: &MixedMesh<T>, p: usize) -> SplineFunction<T> {
        let mut s = SplineFunction::zero(mesh, p);
        for (e, patch) in &self.support {
            s.patches[*e] = patch.clone();
        }
        s
    }
}

/// The spline space of degree `p` over a mesh together with element
/// extraction operators.
#[derive(Debug)]
pub struct SplineSpace<T> {
    mesh: MixedMesh<T>,
    degree: usize,
    dofs: Vec<DofDescriptor>,
    element_dofs: Vec<Vec<usize>>,
    extraction: Vec<DenseMatrix<T>>,
    constructors: Vec<ElementConstructor<T>>,
}

impl<T: Real> SplineSpace<T> {
    pub fn new(mesh: &MixedMesh<T>, p: usize) -> Result<Self> {
        let dim = dimension_terms(mesh, p)?;
        let ctors = constructors(mesh, p).map_err(|err| match err {
            Error::IllConditioned { cond, .. } => Error::IllConditioned { element: 0, cond },
            other => other,
        })?;
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let per_edge = 2 * p - 9;
        let mut dofs = Vec::with_capacity(dim.total());
        for v in 0..nv {
            dofs.extend(VERTEX_ORDERS.iter().map(|&order| DofDescriptor::Vertex { vertex: v, order }));
        }
        for e in 0..ne {
            dofs.extend((1..=p - 5).map(|index| DofDescriptor::EdgeValue { edge: e, index }));
            dofs.extend((1..=p - 4).map(|index| DofDescriptor::EdgeNormal { edge: e, index }));
        }
        let mut interior_offset = Vec::with_capacity(mesh.num_elements());
        for (e, el) in mesh.elements().iter().enumerate() {
            interior_offset.push(dofs.len());
            dofs.extend(interior_indices(el.kind, p).into_iter().map(|grid| DofDescriptor::Interior { element: e, grid }));
        }
        debug_assert_eq!(dofs.len(), dim.total());
        let element_dofs: Vec<Vec<usize>> = mesh
            .elements()
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let mut out: Vec<usize> = el.vertices.iter().flat_map(|&v| 6 * v..6 * v + 6).collect();
                for &g in &el.edges {
                    let start = 6 * nv + per_edge * g;
                    out.extend(start..start + per_edge);
                }
                let start = interior_offset[e];
                out.extend(start..start + num_interior(el.kind, p));
                out
            })
            .collect();
        let extraction = ctors
            .par_iter()
            .map(|c| {
                c.extraction().map_err(|err| match err {
                    Error::IllConditioned { cond, .. } => Error::IllConditioned { element: c.element, cond },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh: mesh.clone(), degree: p, dofs, element_dofs, extraction, constructors: ctors })
    }

    pub fn mesh(&self) -> &MixedMesh<T> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[DofDescriptor] {
        &self.dofs
    }

    /// Global DOF index of each local data slot of element `e`.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e]
    }

    /// Maps local data of element `e` to its Bernstein ordinates.
    pub fn extraction(&self, e: usize) -> &DenseMatrix<T> {
        &self.extraction[e]
    }

    pub fn constructor(&self, e: usize) -> &ElementConstructor<T> {
        &self.constructors[e]
    }

    pub fn constructors(&self) -> &[ElementConstructor<T>] {
        &self.constructors
    }

    /// DOF functionals applied to `f`.
    pub fn dof_values<F: C2Function<T> + ?Sized>(&self, f: &F) -> Vec<T> {
        let local: Vec<Vec<T>> = self.constructors.par_iter().map(|c| c.local_data(&self.mesh, f)).collect();
        let mut out = vec![T::zero(); self.dim()];
        for (e, data) in local.into_iter().enumerate() {
            for (&g, x) in self.element_dofs[e].iter().zip(data) {
                out[g] = x;
            }
        }
        out
    }

    /// The spline with the given DOF values.
    pub fn function(&self, coeffs: &[T]) -> Result<SplineFunction<T>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for a space of dimension {}", coeffs.len(), self.dim())));
        }
        let patches = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let local: Vec<T> = self.element_dofs[e].iter().map(|&g| coeffs[g]).collect();
                Patch { kind: self.mesh.element(e).kind, degree: self.degree, ordinates: self.extraction[e].mul_vec(&local) }
            })
            .collect();
        Ok(SplineFunction::new(self.degree, patches))
    }

    pub fn interpolate<F: C2Function<T> + ?Sized>(&self, f: &F) -> SplineFunction<T> {
        self.function(&self.dof_values(f)).expect("dimension matches by construction")
    }

    /// DOFs attached to boundary vertices and boundary edges.
    pub fn boundary_dofs(&self) -> Vec<bool> {
        self.dofs
            .iter()
            .map(|d| match *d {
                DofDescriptor::Vertex { vertex, .. } => self.mesh.is_boundary_vertex(vertex),
                DofDescriptor::EdgeValue { edge, .. } | DofDescriptor::EdgeNormal { edge, .. } => self.mesh.edge(edge).boundary,
                DofDescriptor::Interior { .. } => false,
            })
            .collect()
    }

    /// Elements carrying each DOF.
    pub fn dof_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.dim()];
        for (e, dofs) in self.element_dofs.iter().enumerate() {
            for &g in dofs {
                out[g].push(e);
            }
        }
        out
    }

    pub fn basis_function(&self, k: usize) -> BasisFunction<T> {
        let support = self
            .element_dofs
            .iter()
            .enumerate()
            .filter_map(|(e, dofs)| {
                let slot = dofs.iter().position(|&g| g == k)?;
                let kind = self.mesh.element(e).kind;
                Some((e, Patch { kind, degree: self.degree, ordinates: self.extraction[e].column(slot) }))
            })
            .collect();
        BasisFunction { dof: self.dofs[k], support }
    }

    pub fn basis(&self) -> Vec<BasisFunction<T>> {
        (0..self.dim()).into_par_iter().map(|k| self.basis_function(k)).collect()
    }
}

/// The cardinal basis of the spline space.
pub fn build_basis<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Result<Vec<BasisFunction<T>>> {
    Ok(SplineSpace::new(mesh, p)?.basis())
}

/// Value trace `c` (degree `p`) and scaled normal-derivative trace `d`
/// (degree `p - 1`) along an edge. Entries beyond either end count as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTrace<T> {
    pub c: Vec<T>,
    pub d: Vec<T>,
}

/// First two ordinate rows `[row0, row1]` of each side, in canonical
/// indexing.
pub type InterfaceRows<T> = [[Vec<T>; 2]; 2];

pub fn interface_ordinates<T: Real>(
    iface: &CanonicalInterface<T>,
    glue: &GluingData<T>,
    trace: &EdgeTrace<T>,
) -> InterfaceRows<T> {
    let linear = |f: &crate::bernstein::UnivariateBernstein<T>| {
        let c = f.elevate(1.max(f.degree())).coeffs;
        [c[0], c[c.len() - 1]]
    };
    let couplings = [(linear(&glue.alpha1), linear(&glue.beta1)), (linear(&glue.alpha2), linear(&glue.beta2))];
    let side = |k: usize| {
        let (alpha, beta) = couplings[k];
        let (r0, r1) = edge_rows(iface.sides[k].map.kind, alpha, beta, &trace.c, &trace.d);
        [r0, r1]
    };
    [side(0), side(1)]
}

/// Largest defects found by [`check_membership`]. Each is divided by the
/// size of the compared quantity over the whole spline, where a derivative
/// of order `k` is never taken smaller than the value scale over `h^k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MembershipReport {
    pub value: f64,
    pub gradient: f64,
    pub hessian: f64,
    pub normal_fit: f64,
}

impl MembershipReport {
    pub fn passes(&self, interface_tol: f64, hessian_tol: f64, fit_tol: f64) -> bool {
        self.value < interface_tol && self.gradient < interface_tol && self.hessian < hessian_tol && self.normal_fit < fit_tol
    }
}

const EDGE_SAMPLES: usize = 33;

fn edge_param<T: Real>(mesh: &MixedMesh<T>, e: usize, edge: usize, t: T) -> (T, T) {
    crate::geometry::Frame::for_edge(mesh, e, edge).param(T::zero(), t)
}

/// Samples C⁰ and C¹ agreement across interior edges, C² agreement at
/// vertices, and how far each edge's normal derivative is from degree `p - 1`.
pub fn check_membership<T: Real>(spline: &SplineFunction<T>, mesh: &MixedMesh<T>) -> Result<MembershipReport> {
    if spline.patches.len() != mesh.num_elements() {
        return Err(Error::MeshMismatch(format!("{} patches for {} elements", spline.patches.len(), mesh.num_elements())));
    }
    let p = spline.degree;
    if let Some(bad) = spline.patches.iter().position(|pt| pt.degree != p) {
        return Err(Error::DimensionMismatch(format!("patch {bad} has degree {}, expected {p}", spline.patches[bad].degree)));
    }
    let maps: Vec<GeometryMap<T>> = (0..mesh.num_elements()).map(|e| GeometryMap::from_element(mesh, e)).collect();
    let jet = |e: usize, (u, v): (T, T)| maps[e].physical_jet(u, v, spline.patches[e].jet(u, v));
    let ts: Vec<T> = (0..EDGE_SAMPLES).map(|k| count::<T>(k) / count::<T>(EDGE_SAMPLES - 1)).collect();

    let per_edge = (0..mesh.num_edges())
        .into_par_iter()
        .map(|g| -> Result<[T; 5]> {
            let ed = mesh.edge(g);
            let [a, b] = ed.vertices;
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            let ev = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = dot2(ev, ev).sqrt();
            let n = [ev[1] / len, -ev[0] / len];
            let mut out = [T::zero(); 5];
            let mut normals: Vec<Vec<T>> = Vec::new();
            let mut jets = Vec::new();
            for &e in &ed.elements {
                let mut side = Vec::with_capacity(ts.len());
                let mut dn = Vec::with_capacity(ts.len());
                for &t in &ts {
                    let j = jet(e, edge_param(mesh, e, g, t))?;
                    dn.push(dot2(n, j.grad));
                    out[3] = out[3].max(j.value.abs());
                    out[4] = out[4].max(j.grad[0].abs().max(j.grad[1].abs()));
                    side.push(j);
                }
                normals.push(dn);
                jets.push(side);
            }
            if jets.len() == 2 {
                for (x, y) in jets[0].iter().zip(&jets[1]) {
                    out[0] = out[0].max((x.value - y.value).abs());
                    out[1] = out[1].max((x.grad[0] - y.grad[0]).abs().max((x.grad[1] - y.grad[1]).abs()));
                }
            }
            let design = DenseMatrix::from_fn(ts.len(), p, |r, c| basis(p - 1, ts[r])[c]);
            for dn in &normals {
                let (_, residual) = least_squares(&design, dn)?;
                out[2] = out[2].max(residual.iter().fold(T::zero(), |m, r| m.max(r.abs())));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let per_vertex = (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| -> Result<[T; 2]> {
            let mut jets = Vec::new();
            for &e in mesh.vertex_elements(v) {
                let el = mesh.element(e);
                let lv = el.local_vertex(v).expect("vertex of incident element");
                let (u, w) = match (el.kind, lv) {
                    (_, 0) => (T::zero(), T::zero()),
                    (ElementKind::Triangle, 1) | (ElementKind::Quad, 1) => (T::one(), T::zero()),
                    (ElementKind::Triangle, _) => (T::zero(), T::one()),
                    (ElementKind::Quad, 2) => (T::one(), T::one()),
                    (ElementKind::Quad, _) => (T::zero(), T::one()),
                };
                jets.push(jet(e, (u, w))?);
            }
            let mut defect = T::zero();
            let mut scale = T::zero();
            for j in &jets {
                for k in 0..3 {
                    scale = scale.max(j.hess[k].abs());
                    defect = defect.max((j.hess[k] - jets[0].hess[k]).abs());
                }
            }
            Ok([defect, scale])
        })
        .collect::<Result<Vec<_>>>()?;

    let ratio = |d: T, s: T| -> f64 {
        if s > T::zero() {
            crate::scalar::to_f64(d / s)
        } else {
            crate::scalar::to_f64(d)
        }
    };
    let fold = |k: usize| per_edge.iter().fold(T::zero(), |m, r| m.max(r[k]));
    let h = mesh.longest_edge();
    let value_scale = fold(3).max(spline.max_abs());
    let grad_scale = fold(4).max(value_scale / h);
    let hess_scale = per_vertex.iter().fold(T::zero(), |m, r| m.max(r[1])).max(grad_scale / h);
    let hess = per_vertex.iter().fold(T::zero(), |m, r| m.max(r[0]));
    Ok(MembershipReport {
        value: ratio(fold(0), value_scale),
        gradient: ratio(fold(1), grad_scale),
        hessian: ratio(hess, hess_scale),
        normal_fit: ratio(fold(2), grad_scale),
    })
}

/// Number of Bernstein ordinates of every element, for sizing buffers.
pub fn ordinate_counts<T: Real>(mesh: &MixedMesh<T>, p: usize) -> Vec<usize> {
    mesh.elements().iter().map(|e| num_ordinates(e.kind, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Polynomial, Trig};
    use crate::geometry::{canonical_interface, gluing_data};
    use crate::interpolation::project;
    use crate::mesh::load_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> MixedMesh<f64> {
        load_mesh(r#"{"vertices": [[0,0],[1,0],[0,1]], "triangles": [[0,1,2]]}"#).unwrap()
    }

    fn quad() -> MixedMesh<f64> {
        load_mesh(r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "quads": [[0,1,2,3]]}"#).unwrap()
    }

    fn split_square() -> MixedMesh<f64> {
        load_mesh(r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "triangles": [[0,1,2],[0,2,3]]}"#).unwrap()
    }

    fn mixed() -> MixedMesh<f64> {
        load_mesh(
            r#"{"vertices": [[0,0],[1,0],[2.1,0.1],[0,1],[1.1,0.9],[2,1.2],[1.2,2],[0.1,2.1]],
                "quads": [[0,1,4,3],[1,2,5,4]], "triangles": [[3,4,6],[4,5,6],[3,6,7]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn physical_spline_matches_vertex_data() {
        let m = mixed();
        let s = SplineSpace::new(&m, 5).unwrap();
        let interp = s.interpolate(&Trig);
        let phys = PhysicalSpline::new(&interp, &m);
        for &x in m.vertices() {
            let (a, b) = (phys.jet(x[0], x[1]), Trig.jet(x[0], x[1]));
            assert!((a.value - b.value).abs() < 1e-12);
            for k in 0..3 {
                assert!((a.hess[k] - b.hess[k]).abs() < 1e-10);
            }
        }
        assert!(phys.locate([5.0, 5.0]).is_none());
        // inside a quad away from its vertices
        let (e, u, v) = phys.locate(GeometryMap::from_element(&m, 3).eval(0.3, 0.6)).unwrap();
        assert_eq!(e, 3);
        assert!((u - 0.3).abs() < 1e-12 && (v - 0.6).abs() < 1e-12);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(&triangle(), 5).unwrap(), 21);
        assert_eq!(dimension(&quad(), 5).unwrap(), 32);
        assert_eq!(dimension(&split_square(), 6).unwrap(), 41);
        assert!(matches!(dimension(&triangle(), 4), Err(Error::DegreeTooLow(4))));
    }

    #[test]
    fn space_size_matches_formula() {
        let m = mixed();
        for p in 5..=8 {
            let s = SplineSpace::new(&m, p).unwrap();
            assert_eq!(s.dim(), dimension(&m, p).unwrap());
            for e in 0..m.num_elements() {
                assert_eq!(s.element_dofs(e).len(), s.constructor(e).local_len());
            }
        }
    }

    #[test]
    fn extraction_agrees_with_local_construction() {
        let m = mixed();
        for p in [5, 7] {
            let s = SplineSpace::new(&m, p).unwrap();
            let a = s.interpolate(&Trig);
            let b = project(&Trig, &m, p).unwrap();
            let diff = a.max_difference(&b);
            assert!(diff < 1e-11, "p={p}: {diff}");
        }
    }

    #[test]
    fn basis_membership_and_support() {
        let m = mixed();
        let s = SplineSpace::new(&m, 6).unwrap();
        for (k, bf) in s.basis().into_iter().enumerate() {
            let r = check_membership(&bf.to_spline(&m, 6), &m).unwrap();
            assert!(r.passes(1e-9, 1e-8, 1e-10), "dof {k} {:?}: {r:?}", bf.dof);
            let allowed: Vec<usize> = match bf.dof {
                DofDescriptor::Vertex { vertex, .. } => m.vertex_elements(vertex).to_vec(),
                DofDescriptor::EdgeValue { edge, .. } | DofDescriptor::EdgeNormal { edge, .. } => m.edge(edge).elements.clone(),
                DofDescriptor::Interior { element, .. } => vec![element],
            };
            assert!(bf.support.iter().all(|(e, _)| allowed.contains(e)));
        }
    }

    #[test]
    fn interior_basis_vanishes_on_boundary_rows() {
        let m = mixed();
        let s = SplineSpace::new(&m, 7).unwrap();
        let k = s.dofs().iter().position(|d| matches!(d, DofDescriptor::Interior { element: 3, .. })).unwrap();
        let bf = s.basis_function(k);
        assert_eq!(bf.support.len(), 1);
        let patch = &bf.support[0].1;
        for i in 0..=7 {
            for j in 0..=7 {
                if i <= 1 || j <= 1 || i >= 6 || j >= 6 {
                    assert_eq!(patch.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn perturbed_ordinates_are_detected() {
        let m = mixed();
        let p = 6;
        let mut s = project(&Trig, &m, p).unwrap();
        let clean = check_membership(&s, &m).unwrap();
        let x = s.patches[3].get(3, 3);
        s.patches[3].set(3, 3, x + 0.1);
        let interior = check_membership(&s, &m).unwrap();
        assert!(interior.value <= clean.value + 1e-15 && interior.gradient <= clean.gradient + 1e-15);
        // element 3 is the first quad; its edge to the second quad is at u = 1
        let x = s.patches[3].get(p - 1, 3);
        s.patches[3].set(p - 1, 3, x + 0.1);
        let row = check_membership(&s, &m).unwrap();
        assert!(row.gradient > 1e-4, "{row:?}");
    }

    #[test]
    fn constant_trace_gives_constant_rows() {
        let m = mixed();
        for g in 0..m.num_edges() {
            if m.edge(g).boundary {
                continue;
            }
            let iface = canonical_interface(&m, g).unwrap();
            let glue = gluing_data(&iface).unwrap();
            let trace = EdgeTrace { c: vec![1.0; 7], d: vec![0.0; 6] };
            for side in interface_ordinates(&iface, &glue, &trace) {
                assert!(side[0].iter().all(|&x| x == 1.0));
                assert!(side[1].iter().all(|&x| (x - 1.0).abs() < 1e-14), "{:?}", side[1]);
            }
        }
    }

    #[test]
    fn random_traces_glue_smoothly() {
        let m = mixed();
        let p = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in 0..m.num_edges() {
            if m.edge(g).boundary {
                continue;
            }
            let iface = canonical_interface(&m, g).unwrap();
            let glue = gluing_data(&iface).unwrap();
            // a trace produced by a true C1 function keeps both rows consistent
            let f = Polynomial::new((0..=p).flat_map(|a| (0..=p - a).map(move |b| (a, b))).map(|k| (k, rng.random_range(-1.0..1.0))));
            let s = project(&f, &m, p).unwrap();
            let [e1, e2] = [iface.sides[0].element, iface.sides[1].element];
            let c1 = iface.sides[0].frame.to_canonical(&s.patches[e1]);
            let c2 = iface.sides[1].frame.to_canonical(&s.patches[e2]);
            let c = c1.edge_row(0);
            let rows = interface_ordinates(&iface, &glue, &EdgeTrace { c: c.clone(), d: derived_d(&c1, &iface, p) });
            let got1 = c1.edge_row(1);
            let got2 = c2.edge_row(1);
            for (x, y) in rows[0][1].iter().zip(&got1) {
                assert!((x - y).abs() < 1e-8, "{x} {y}");
            }
            for (x, y) in rows[1][1].iter().zip(&got2) {
                assert!((x - y).abs() < 1e-8, "{x} {y}");
            }
        }
    }

    // normal-derivative trace divided by the edge length, fitted from samples of side 1
    fn derived_d(c1: &Patch<f64>, iface: &CanonicalInterface<f64>, p: usize) -> Vec<f64> {
        let map = &iface.sides[0].map;
        let a = map.eval(0.0, 0.0);
        let b = map.eval(0.0, 1.0);
        let e = [b[0] - a[0], b[1] - a[1]];
        let len2 = e[0] * e[0] + e[1] * e[1];
        let n = [e[1] / len2.sqrt(), -e[0] / len2.sqrt()];
        let ts: Vec<f64> = (0..p).map(|k| k as f64 / (p - 1) as f64).collect();
        let design = DenseMatrix::from_fn(p, p, |r, c| basis(p - 1, ts[r])[c]);
        let rhs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let j = map.physical_jet(0.0, t, c1.jet(0.0, t)).unwrap();
                (n[0] * j.grad[0] + n[1] * j.grad[1]) / len2.sqrt()
            })
            .collect();
        crate::linalg::solve_dense(&design, &rhs).unwrap()
    }
}
