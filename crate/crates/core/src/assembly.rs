//! Galerkin matrices, least-squares fitting and the biharmonic Dirichlet
//! problem.
//!
//! Element matrices are formed in the Bernstein basis and mapped to DOF
//! space with the element extraction operator, `E^T K E`. Elements are
//! processed in parallel and merged in element order, so the assembled
//! matrices do not depend on the thread count.

use log::debug;
use rayon::prelude::*;

use crate::bernstein::{BasisJets, Patch};
use crate::error::{Error, Result};
use crate::functions::{Biharmonic, C2Function, Jet};
use crate::geometry::{dot2, perp, GeometryMap};
use crate::linalg::{dot, CsrMatrix, DenseMatrix, EnvelopeCholesky};
use crate::quadrature::QuadratureRule;
use crate::scalar::{lit, to_f64, Real};
use crate::space::{DofDescriptor, SplineFunction, SplineSpace};

/// Physical value, gradient and Hessian of a patch at reference point
/// `(u, v)`.
pub fn physical_derivatives<T: Real>(map: &GeometryMap<T>, patch: &Patch<T>, u: T, v: T) -> Result<Jet<T>> {
    map.physical_jet(u, v, patch.jet(u, v))
}

/// Basis values and physical Laplacians at the quadrature points of one
/// element, with `weight * |det J|` per point.
pub struct ElementTables<T> {
    pub points: Vec<[T; 2]>,
    pub weights: Vec<T>,
    pub values: DenseMatrix<T>,
    pub laplacians: DenseMatrix<T>,
}

pub fn element_tables<T: Real>(space: &SplineSpace<T>, e: usize, rule: &QuadratureRule<T>) -> Result<ElementTables<T>> {
    let mesh = space.mesh();
    let p = space.degree();
    let kind = mesh.element(e).kind;
    let map = GeometryMap::from_element(mesh, e);
    let n = crate::bernstein::num_ordinates(kind, p);
    let nq = rule.len();
    let mut values = DenseMatrix::zeros(nq, n);
    let mut laplacians = DenseMatrix::zeros(nq, n);
    let mut weights = Vec::with_capacity(nq);
    let mut points = Vec::with_capacity(nq);
    for (q, (&(u, v), &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let j = map.jacobian(u, v)?;
        weights.push(w * j.det.abs());
        points.push(map.eval(u, v));
        let b = BasisJets::new(kind, p, u, v);
        for k in 0..n {
            let jet = map.physical_jet_with(&j, [b.value[k], b.du[k], b.dv[k], b.duu[k], b.duv[k], b.dvv[k]]);
            values[(q, k)] = b.value[k];
            laplacians[(q, k)] = jet.laplacian();
        }
    }
    Ok(ElementTables { points, weights, values, laplacians })
}

fn weighted_gram<T: Real>(a: &DenseMatrix<T>, w: &[T]) -> DenseMatrix<T> {
    let n = a.cols();
    let mut out = DenseMatrix::zeros(n, n);
    for q in 0..a.rows() {
        let row = a.row(q);
        for i in 0..n {
            let wi = w[q] * row[i];
            if wi == T::zero() {
                continue;
            }
            for j in 0..n {
                out[(i, j)] = out[(i, j)] + wi * row[j];
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Mass,
    Bilaplacian,
}

/// Element matrix in DOF space.
pub fn element_matrix<T: Real>(space: &SplineSpace<T>, e: usize, form: Form) -> Result<DenseMatrix<T>> {
    let kind = space.mesh().element(e).kind;
    let rule = QuadratureRule::for_degree(kind, space.degree());
    let t = element_tables(space, e, &rule)?;
    let k = match form {
        Form::Mass => weighted_gram(&t.values, &t.weights),
        Form::Bilaplacian => weighted_gram(&t.laplacians, &t.weights),
    };
    Ok(k.congruence(space.extraction(e)))
}

pub fn assemble<T: Real>(space: &SplineSpace<T>, form: Form) -> Result<CsrMatrix<T>> {
    let n_el = space.mesh().num_elements();
    let locals = (0..n_el).into_par_iter().map(|e| element_matrix(space, e, form)).collect::<Result<Vec<_>>>()?;
    let mut triplets = Vec::new();
    for (e, k) in locals.iter().enumerate() {
        let dofs = space.element_dofs(e);
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                triplets.push((i, j, k[(a, b)]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(space.dim(), space.dim(), &triplets))
}

/// `M_ab = ∫ φ_a φ_b`.
pub fn assemble_mass<T: Real>(space: &SplineSpace<T>) -> Result<CsrMatrix<T>> {
    assemble(space, Form::Mass)
}

/// `B_ab = ∫ Δφ_a Δφ_b`.
pub fn assemble_bilaplacian<T: Real>(space: &SplineSpace<T>) -> Result<CsrMatrix<T>> {
    assemble(space, Form::Bilaplacian)
}

/// `(∫ g φ_a)_a`.
pub fn load_vector<T: Real>(space: &SplineSpace<T>, g: impl Fn(T, T) -> T + Sync) -> Result<Vec<T>> {
    let n_el = space.mesh().num_elements();
    let locals = (0..n_el)
        .into_par_iter()
        .map(|e| {
            let kind = space.mesh().element(e).kind;
            let rule = QuadratureRule::for_degree(kind, space.degree());
            let t = element_tables(space, e, &rule)?;
            let gw: Vec<T> = t.points.iter().zip(&t.weights).map(|(x, &w)| w * g(x[0], x[1])).collect();
            Ok(space.extraction(e).tr_mul_vec(&t.values.tr_mul_vec(&gw)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![T::zero(); space.dim()];
    for (e, local) in locals.into_iter().enumerate() {
        for (&g, x) in space.element_dofs(e).iter().zip(local) {
            out[g] = out[g] + x;
        }
    }
    Ok(out)
}

/// Coefficients and spline of a discrete solution.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub coeffs: Vec<T>,
    pub spline: SplineFunction<T>,
}

/// The spline minimizing `∫ (s - f)^2`.
pub fn l2_fit<T: Real, F: C2Function<T> + ?Sized>(f: &F, space: &SplineSpace<T>) -> Result<Solution<T>> {
    let m = assemble_mass(space)?;
    let b = load_vector(space, |x, y| f.value(x, y))?;
    let chol = EnvelopeCholesky::factor(&m)?;
    debug!("mass matrix: {} dofs, envelope {}", space.dim(), chol.envelope_size());
    let coeffs = chol.solve(&b);
    let spline = space.function(&coeffs)?;
    Ok(Solution { coeffs, spline })
}

/// Result of a biharmonic solve.
#[derive(Clone, Debug)]
pub struct BiharmonicSolution<T> {
    pub coeffs: Vec<T>,
    pub spline: SplineFunction<T>,
    /// `|û^T B̂ û - û^T r| / |û^T r|` for the reduced system `B̂ û = r`.
    pub energy_defect: f64,
}

/// Solves `Δ²u = g` with `u` and `∂_n u` prescribed on the boundary; `g`
/// is the bi-Laplacian of `exact`. DOFs on boundary vertices and edges take
/// the values of `exact`, except for Hessian directions that neither trace
/// sees (see [`free_directions`]), which are solved for.
pub fn solve_biharmonic<T: Real, F: Biharmonic<T> + ?Sized>(exact: &F, space: &SplineSpace<T>) -> Result<BiharmonicSolution<T>> {
    let b = assemble_bilaplacian(space)?;
    let load = load_vector(space, |x, y| exact.bilaplacian(x, y))?;
    let boundary = space.boundary_dofs();
    let data = space.dof_values(exact);
    let mut coeffs: Vec<T> = (0..space.dim()).map(|k| if boundary[k] { data[k] } else { T::zero() }).collect();
    let dirs = free_directions(space);
    let mut energy_defect = 0.0;
    if !dirs.is_empty() {
        let shift = b.mul_vec(&coeffs);
        let residual: Vec<T> = load.iter().zip(&shift).map(|(&l, &s)| l - s).collect();
        let reduced = b.congruence(&dirs);
        let rhs: Vec<T> = dirs.iter().map(|col| col.iter().fold(T::zero(), |s, &(k, w)| s + w * residual[k])).collect();
        let chol = EnvelopeCholesky::factor(&reduced).map_err(|err| match err {
            Error::NotPositiveDefinite { index, value } => Error::NotPositiveDefinite { index: dirs[index][0].0, value },
            other => other,
        })?;
        let x = chol.solve(&rhs);
        let (energy, work) = (reduced.quadratic_form(&x), dot(&x, &rhs));
        energy_defect = to_f64((energy - work).abs() / work.abs().max(T::min_positive_value()));
        for (col, &xa) in dirs.iter().zip(&x) {
            for &(k, w) in col {
                coeffs[k] = coeffs[k] + w * xa;
            }
        }
    }
    let spline = space.function(&coeffs)?;
    Ok(BiharmonicSolution { coeffs, spline, energy_defect })
}

/// Directions in DOF space that leave `u` and `∂_n u` on the boundary
/// untouched: every interior DOF, and at a boundary vertex whose boundary
/// edges are collinear, the Hessian direction `n n^T`, which neither trace
/// sees. Fixing the latter as well would over-constrain the solution.
pub fn free_directions<T: Real>(space: &SplineSpace<T>) -> Vec<Vec<(usize, T)>> {
    let mesh = space.mesh();
    let boundary = space.boundary_dofs();
    let mut out: Vec<Vec<(usize, T)>> = (0..space.dim()).filter(|&k| !boundary[k]).map(|k| vec![(k, T::one())]).collect();
    let mut hessian = vec![[usize::MAX; 3]; mesh.num_vertices()];
    for (k, d) in space.dofs().iter().enumerate() {
        if let DofDescriptor::Vertex { vertex, order } = *d {
            match order {
                (2, 0) => hessian[vertex][0] = k,
                (1, 1) => hessian[vertex][1] = k,
                (0, 2) => hessian[vertex][2] = k,
                _ => {}
            }
        }
    }
    let tol: T = lit(1e-9);
    for v in 0..mesh.num_vertices() {
        if !mesh.is_boundary_vertex(v) {
            continue;
        }
        let x = mesh.vertex(v);
        let tangents: Vec<[T; 2]> = mesh
            .vertex_edges(v)
            .iter()
            .filter(|&&e| mesh.edge(e).boundary)
            .map(|&e| {
                let [a, b] = mesh.edge(e).vertices;
                let y = mesh.vertex(if a == v { b } else { a });
                let t = [y[0] - x[0], y[1] - x[1]];
                let len = dot2(t, t).sqrt();
                [t[0] / len, t[1] / len]
            })
            .collect();
        let Some(&t0) = tangents.first() else { continue };
        let n = perp(t0);
        let z = [n[0] * n[0], n[0] * n[1], n[1] * n[1]];
        // z in (H_xx, H_xy, H_yy); both t^T H t and n^T H t must vanish on it
        let unseen = tangents.iter().all(|&t| {
            let m = perp(t);
            let tt = t[0] * t[0] * z[0] + lit::<T>(2.0) * t[0] * t[1] * z[1] + t[1] * t[1] * z[2];
            let nt = m[0] * t[0] * z[0] + (m[0] * t[1] + m[1] * t[0]) * z[1] + m[1] * t[1] * z[2];
            tt.abs() <= tol && nt.abs() <= tol
        });
        if unseen {
            out.push(hessian[v].iter().zip(z).map(|(&k, w)| (k, w)).collect());
        }
    }
    out
}
