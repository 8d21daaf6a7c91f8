//! Element geometry maps, physical derivatives and gluing data.
//!
//! Triangles use `F(u,v) = (1-u-v) C0 + u C1 + v C2`, quads use
//! `F(u,v) = (1-u)(1-v) C0 + u(1-v) C1 + u v C2 + (1-u) v C3`, where `C` are
//! the corners in storage order.
//!
//! Continuity across an edge is expressed in a canonical frame in which the
//! edge is `u = 0` and `F(0, v)` runs from the lower to the higher global
//! vertex index. A [`Frame`] is the affine symmetry of the reference element
//! that takes canonical parameters and ordinates to the element's own.

use crate::bernstein::{num_ordinates, ordinate_indices, Patch, UnivariateBernstein};
use crate::error::{Error, Result};
use crate::functions::Jet;
use crate::mesh::{ElementKind, MixedMesh};
use crate::scalar::{lit, to_f64, Real};

#[inline]
pub fn perp<T: Real>(a: [T; 2]) -> [T; 2] {
    [a[1], -a[0]]
}

#[inline]
pub fn det2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dot2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn sub<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian<T> {
    /// `[∂_u F, ∂_v F]`.
    pub columns: [[T; 2]; 2],
    pub det: T,
    /// Rows of `J^{-1}`.
    pub inverse: [[T; 2]; 2],
}

impl<T: Real> Jacobian<T> {
    fn new(fu: [T; 2], fv: [T; 2]) -> Result<Self> {
        let det = det2(fu, fv);
        let scale = (dot2(fu, fu) + dot2(fv, fv)).max(T::min_positive_value());
        if !(det.abs() > scale * lit(1e-14)) {
            return Err(Error::SingularJacobian(to_f64(det)));
        }
        let inverse = [[fv[1] / det, -fv[0] / det], [-fu[1] / det, fu[0] / det]];
        Ok(Self { columns: [fu, fv], det, inverse })
    }

    /// `J[r][c] = ∂x_r / ∂u_c`.
    pub fn entry(&self, r: usize, c: usize) -> T {
        self.columns[c][r]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryMap<T> {
    pub kind: ElementKind,
    pub corners: Vec<[T; 2]>,
}

impl<T: Real> GeometryMap<T> {
    pub fn linear(c0: [T; 2], c1: [T; 2], c2: [T; 2]) -> Self {
        Self { kind: ElementKind::Triangle, corners: vec![c0, c1, c2] }
    }

    pub fn bilinear(c0: [T; 2], c1: [T; 2], c2: [T; 2], c3: [T; 2]) -> Self {
        Self { kind: ElementKind::Quad, corners: vec![c0, c1, c2, c3] }
    }

    /// Bilinear map `(1-u)(1-v) a + (1-u) v b + u v c + u (1-v) d`, i.e. with
    /// the corners listed so that `v` runs along the first side.
    pub fn bilinear_v_first(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> Self {
        Self::bilinear(a, d, c, b)
    }

    pub fn from_element(mesh: &MixedMesh<T>, e: usize) -> Self {
        Self { kind: mesh.element(e).kind, corners: mesh.element_points(e) }
    }

    pub fn eval(&self, u: T, v: T) -> [T; 2] {
        let c = &self.corners;
        let one = T::one();
        let w: Vec<T> = match self.kind {
            ElementKind::Triangle => vec![one - u - v, u, v],
            ElementKind::Quad => vec![(one - u) * (one - v), u * (one - v), u * v, (one - u) * v],
        };
        let mut out = [T::zero(); 2];
        for (wk, ck) in w.iter().zip(c) {
            out[0] = out[0] + *wk * ck[0];
            out[1] = out[1] + *wk * ck[1];
        }
        out
    }

    /// `(∂_u F, ∂_v F)` at `(u, v)`.
    pub fn tangents(&self, u: T, v: T) -> ([T; 2], [T; 2]) {
        let c = &self.corners;
        match self.kind {
            ElementKind::Triangle => (sub(c[1], c[0]), sub(c[2], c[0])),
            ElementKind::Quad => {
                let one = T::one();
                let fu = [
                    (one - v) * (c[1][0] - c[0][0]) + v * (c[2][0] - c[3][0]),
                    (one - v) * (c[1][1] - c[0][1]) + v * (c[2][1] - c[3][1]),
                ];
                let fv = [
                    (one - u) * (c[3][0] - c[0][0]) + u * (c[2][0] - c[1][0]),
                    (one - u) * (c[3][1] - c[0][1]) + u * (c[2][1] - c[1][1]),
                ];
                (fu, fv)
            }
        }
    }

    pub fn jacobian(&self, u: T, v: T) -> Result<Jacobian<T>> {
        let (fu, fv) = self.tangents(u, v);
        Jacobian::new(fu, fv)
    }

    /// Mixed derivative `∂_u ∂_v F`; the pure second derivatives vanish.
    pub fn mixed_derivative(&self) -> [T; 2] {
        match self.kind {
            ElementKind::Triangle => [T::zero(); 2],
            ElementKind::Quad => {
                let c = &self.corners;
                [c[0][0] - c[1][0] + c[2][0] - c[3][0], c[0][1] - c[1][1] + c[2][1] - c[3][1]]
            }
        }
    }

    /// Hessians `[uu, uv, vv]` of both coordinate functions.
    pub fn second_derivatives(&self) -> [[T; 3]; 2] {
        let m = self.mixed_derivative();
        [[T::zero(), m[0], T::zero()], [T::zero(), m[1], T::zero()]]
    }

    /// Newton inversion of the map.
    pub fn inverse(&self, x: [T; 2]) -> Result<(T, T)> {
        let third: T = lit(1.0 / 3.0);
        let half: T = lit(0.5);
        let (mut u, mut v) = match self.kind {
            ElementKind::Triangle => (third, third),
            ElementKind::Quad => (half, half),
        };
        let scale = self.corners.iter().fold(T::one(), |m, c| m.max(c[0].abs()).max(c[1].abs()));
        for _ in 0..50 {
            let f = self.eval(u, v);
            let r = sub(x, f);
            let j = self.jacobian(u, v)?;
            let du = j.inverse[0][0] * r[0] + j.inverse[0][1] * r[1];
            let dv = j.inverse[1][0] * r[0] + j.inverse[1][1] * r[1];
            u = u + du;
            v = v + dv;
            if (du.abs() + dv.abs()) < lit::<T>(1e-12) * scale.max(T::one()) {
                // one more step: convergence is quadratic, so this reaches roundoff
                let r = sub(x, self.eval(u, v));
                let j = self.jacobian(u, v)?;
                u = u + j.inverse[0][0] * r[0] + j.inverse[0][1] * r[1];
                v = v + j.inverse[1][0] * r[0] + j.inverse[1][1] * r[1];
                let f = self.eval(u, v);
                if (f[0] - x[0]).abs() + (f[1] - x[1]).abs() < lit::<T>(1e-10) * scale {
                    return Ok((u, v));
                }
            }
        }
        Err(Error::SingularSystem("map inversion did not converge".into()))
    }

    /// Physical value, gradient and Hessian of `f ∘ F^{-1}` from the
    /// parametric jet `[f, f_u, f_v, f_uu, f_uv, f_vv]`.
    pub fn physical_jet(&self, u: T, v: T, f: [T; 6]) -> Result<Jet<T>> {
        let j = self.jacobian(u, v)?;
        Ok(self.physical_jet_with(&j, f))
    }

    pub fn physical_jet_with(&self, j: &Jacobian<T>, f: [T; 6]) -> Jet<T> {
        let inv = &j.inverse;
        // ∇φ = J^{-T} ∇f
        let gx = inv[0][0] * f[1] + inv[1][0] * f[2];
        let gy = inv[0][1] * f[1] + inv[1][1] * f[2];
        let m = self.mixed_derivative();
        // H_f - φ_x H_{F1} - φ_y H_{F2}; only the mixed entry of H_F is nonzero
        let a = [[f[3], f[4] - gx * m[0] - gy * m[1]], [f[4] - gx * m[0] - gy * m[1], f[5]]];
        // J^{-T} A J^{-1}
        let mut h = [[T::zero(); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let mut s = T::zero();
                for k in 0..2 {
                    for l in 0..2 {
                        s = s + inv[k][r] * a[k][l] * inv[l][c];
                    }
                }
                h[r][c] = s;
            }
        }
        Jet { value: f[0], grad: [gx, gy], hess: [h[0][0], h[0][1], h[1][1]] }
    }

    /// Parametric jet `[f, f_u, f_v, f_uu, f_uv, f_vv]` of `φ ∘ F` from the
    /// physical jet of `φ`.
    pub fn parametric_jet(&self, u: T, v: T, phi: &Jet<T>) -> [T; 6] {
        let (fu, fv) = self.tangents(u, v);
        let m = self.mixed_derivative();
        let g = phi.grad;
        let h = [[phi.hess[0], phi.hess[1]], [phi.hess[1], phi.hess[2]]];
        let quad = |a: [T; 2], b: [T; 2]| -> T {
            a[0] * (h[0][0] * b[0] + h[0][1] * b[1]) + a[1] * (h[1][0] * b[0] + h[1][1] * b[1])
        };
        [
            phi.value,
            dot2(g, fu),
            dot2(g, fv),
            quad(fu, fu),
            quad(fu, fv) + dot2(g, m),
            quad(fv, fv),
        ]
    }

    /// Physical gradient of `f ∘ F^{-1}` written as
    /// `(f_u (∂_v F)^⊥ - f_v (∂_u F)^⊥) / det J`.
    pub fn directional_derivative_field(&self, patch: &Patch<T>, u: T, v: T) -> Result<[T; 2]> {
        let (fu, fv) = self.tangents(u, v);
        let j = Jacobian::new(fu, fv)?;
        let jet = patch.jet(u, v);
        let (a, b) = (perp(fv), perp(fu));
        Ok([(jet[1] * a[0] - jet[2] * b[0]) / j.det, (jet[1] * a[1] - jet[2] * b[1]) / j.det])
    }
}

/// Affine symmetry of the reference element placing one of its edges at
/// `u = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: ElementKind,
    /// Local vertex at canonical corner `k` (storage order of the canonical map).
    pub corners: Vec<usize>,
    origin: [i64; 2],
    eu: [i64; 2],
    ev: [i64; 2],
}

fn reference_corner(kind: ElementKind, k: usize) -> [i64; 2] {
    match kind {
        ElementKind::Triangle => [[0, 0], [1, 0], [0, 1]][k],
        ElementKind::Quad => [[0, 0], [1, 0], [1, 1], [0, 1]][k],
    }
}

impl Frame {
    /// Frame for the edge from local vertex `first` to local vertex `second`;
    /// the two must be adjacent.
    pub fn new(kind: ElementKind, first: usize, second: usize) -> Self {
        let n = kind.num_vertices();
        assert!(first < n && second < n, "local vertex out of range");
        assert!((first + 1) % n == second || (second + 1) % n == first, "local vertices are not adjacent");
        let other = if (first + 1) % n == second { (first + n - 1) % n } else { (first + 1) % n };
        let corners = match kind {
            ElementKind::Triangle => vec![first, other, second],
            ElementKind::Quad => vec![first, other, (first + 2) % n, second],
        };
        let o = reference_corner(kind, first);
        let pc = reference_corner(kind, other);
        let pb = reference_corner(kind, second);
        Self { kind, corners, origin: o, eu: [pc[0] - o[0], pc[1] - o[1]], ev: [pb[0] - o[0], pb[1] - o[1]] }
    }

    /// Frame of element `e` for the global edge `edge`, oriented from its
    /// lower to its higher vertex index.
    pub fn for_edge<T: Real>(mesh: &MixedMesh<T>, e: usize, edge: usize) -> Self {
        let el = mesh.element(e);
        let [a, b] = mesh.edge(edge).vertices;
        let la = el.local_vertex(a).expect("edge vertex not in element");
        let lb = el.local_vertex(b).expect("edge vertex not in element");
        Self::new(el.kind, la, lb)
    }

    /// Element parameters of the canonical point `(u, v)`.
    pub fn param<T: Real>(&self, u: T, v: T) -> (T, T) {
        let c = |x: i64| -> T { lit(x as f64) };
        (
            c(self.origin[0]) + u * c(self.eu[0]) + v * c(self.ev[0]),
            c(self.origin[1]) + u * c(self.eu[1]) + v * c(self.ev[1]),
        )
    }

    /// Element ordinate `(i, j)` of the canonical ordinate `(i', j')`.
    pub fn ordinate(&self, p: usize, i: usize, j: usize) -> (usize, usize) {
        let p = p as i64;
        let (i, j) = (i as i64, j as i64);
        let a = p * self.origin[0] + i * self.eu[0] + j * self.ev[0];
        let b = p * self.origin[1] + i * self.eu[1] + j * self.ev[1];
        debug_assert!(a >= 0 && b >= 0);
        (a as usize, b as usize)
    }

    /// `table[k]` is the element storage index of canonical storage index `k`.
    pub fn index_table(&self, p: usize) -> Vec<usize> {
        let probe = Patch::<f64>::zeros(self.kind, p);
        ordinate_indices(self.kind, p)
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = self.ordinate(p, i, j);
                probe.index(a, b)
            })
            .collect()
    }

    pub fn to_canonical<T: Real>(&self, patch: &Patch<T>) -> Patch<T> {
        let table = self.index_table(patch.degree);
        Patch { kind: patch.kind, degree: patch.degree, ordinates: table.iter().map(|&k| patch.ordinates[k]).collect() }
    }

    pub fn from_canonical<T: Real>(&self, patch: &Patch<T>) -> Patch<T> {
        let table = self.index_table(patch.degree);
        let mut out = vec![T::zero(); num_ordinates(patch.kind, patch.degree)];
        for (k, &e) in table.iter().enumerate() {
            out[e] = patch.ordinates[k];
        }
        Patch { kind: patch.kind, degree: patch.degree, ordinates: out }
    }

    pub fn map<T: Real>(&self, element_map: &GeometryMap<T>) -> GeometryMap<T> {
        GeometryMap { kind: self.kind, corners: self.corners.iter().map(|&k| element_map.corners[k]).collect() }
    }
}

/// Coupling coefficients of one element along an edge, in its canonical
/// frame: `α(v) = det J(0, v)` and `β(v) = <e, ∂_u F(0, v)> / |e|^2` with
/// `e = V2 - V1`. Both are linear; stored as values at `v = 0` and `v = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideCoupling<T> {
    pub alpha: [T; 2],
    pub beta: [T; 2],
}

impl<T: Real> SideCoupling<T> {
    pub fn from_map(canonical: &GeometryMap<T>) -> Self {
        let e = sub(canonical.eval(T::zero(), T::one()), canonical.eval(T::zero(), T::zero()));
        let len2 = dot2(e, e);
        let at = |v: T| {
            let (fu, fv) = canonical.tangents(T::zero(), v);
            (det2(fu, fv), dot2(e, fu) / len2)
        };
        let (a0, b0) = at(T::zero());
        let (a1, b1) = at(T::one());
        Self { alpha: [a0, a1], beta: [b0, b1] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfaceCase {
    QuadTriangle,
    TriangleTriangle,
    QuadQuad,
}

#[derive(Clone, Debug)]
pub struct InterfaceSide<T> {
    pub element: usize,
    pub frame: Frame,
    pub map: GeometryMap<T>,
}

#[derive(Clone, Debug)]
pub struct CanonicalInterface<T> {
    pub edge: usize,
    pub case: InterfaceCase,
    pub sides: [InterfaceSide<T>; 2],
}

/// Orders the two elements of an interior edge (a quad first when mixed,
/// otherwise by index) and builds both canonical frames.
pub fn canonical_interface<T: Real>(mesh: &MixedMesh<T>, edge: usize) -> Result<CanonicalInterface<T>> {
    let ed = mesh.edge(edge);
    if ed.boundary {
        return Err(Error::BoundaryEdge(edge));
    }
    let (mut e1, mut e2) = (ed.elements[0], ed.elements[1]);
    let (k1, k2) = (mesh.element(e1).kind, mesh.element(e2).kind);
    if k1 == ElementKind::Triangle && k2 == ElementKind::Quad {
        std::mem::swap(&mut e1, &mut e2);
    }
    let case = match (mesh.element(e1).kind, mesh.element(e2).kind) {
        (ElementKind::Quad, ElementKind::Quad) => InterfaceCase::QuadQuad,
        (ElementKind::Triangle, ElementKind::Triangle) => InterfaceCase::TriangleTriangle,
        _ => InterfaceCase::QuadTriangle,
    };
    let side = |e: usize| {
        let frame = Frame::for_edge(mesh, e, edge);
        let map = frame.map(&GeometryMap::from_element(mesh, e));
        InterfaceSide { element: e, frame, map }
    };
    let sides = [side(e1), side(e2)];
    let scale = mesh.edge_length(edge);
    for k in 0..=8 {
        let v: T = lit(k as f64 / 8.0);
        let (a, b) = (sides[0].map.eval(T::zero(), v), sides[1].map.eval(T::zero(), v));
        if (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > scale * lit(1e-13) {
            return Err(Error::InconsistentOrientation(format!("canonical maps disagree along edge {edge}")));
        }
    }
    Ok(CanonicalInterface { edge, case, sides })
}

/// Gluing functions of an interface, as Bernstein polynomials in the edge
/// parameter `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingData<T> {
    pub case: InterfaceCase,
    pub alpha1: UnivariateBernstein<T>,
    pub alpha2: UnivariateBernstein<T>,
    pub alpha3: UnivariateBernstein<T>,
    pub beta: T,
    pub beta1: UnivariateBernstein<T>,
    pub beta2: UnivariateBernstein<T>,
}

fn ub<T: Real>(c: Vec<T>) -> UnivariateBernstein<T> {
    UnivariateBernstein::new(c)
}

/// Gluing data from the closed-form vertex formulas of each case.
///
/// Vertex labels: `V1`, `V2` are the edge endpoints. For a quad on side
/// `ℓ`, `V(2+2ℓ)` is the neighbour of `V1` and `V(1+2ℓ)` the neighbour of
/// `V2`; for a triangle the apex is `V3` on side 1 and `V5` on side 2.
pub fn gluing_data<T: Real>(iface: &CanonicalInterface<T>) -> Result<GluingData<T>> {
    let m1 = &iface.sides[0].map.corners;
    let m2 = &iface.sides[1].map.corners;
    let (v1, v2) = (m1[0], *m1.last().unwrap());
    let e = sub(v2, v1);
    let len2 = dot2(e, e);
    if !(len2 > T::zero()) {
        return Err(Error::ZeroLengthEdge(iface.edge));
    }
    let beta = len2.sqrt();
    let b = |w: [T; 2]| dot2(e, w) / len2;
    let g = match iface.case {
        InterfaceCase::QuadTriangle => {
            let (v4, v3, v5) = (m1[1], m1[2], m2[1]);
            GluingData {
                case: iface.case,
                alpha1: ub(vec![det2(sub(v4, v1), e), det2(sub(v3, v2), e)]),
                alpha2: ub(vec![det2(sub(v5, v1), e)]),
                alpha3: ub(vec![det2(sub(v5, v1), sub(v4, v1)), det2(sub(v5, v1), sub(v3, v2))]),
                beta,
                beta1: ub(vec![b(sub(v4, v1)), b(sub(v3, v2))]),
                beta2: ub(vec![b(sub(v5, v1))]),
            }
        }
        InterfaceCase::TriangleTriangle => {
            let (v3, v5) = (m1[1], m2[1]);
            GluingData {
                case: iface.case,
                alpha1: ub(vec![det2(sub(v3, v1), e)]),
                alpha2: ub(vec![det2(sub(v5, v1), e)]),
                alpha3: ub(vec![det2(sub(v5, v1), sub(v3, v1))]),
                beta,
                beta1: ub(vec![b(sub(v3, v1))]),
                beta2: ub(vec![b(sub(v5, v1))]),
            }
        }
        InterfaceCase::QuadQuad => {
            let (v4, v3, v6, v5) = (m1[1], m1[2], m2[1], m2[2]);
            let (a0, a1) = (sub(v6, v1), sub(v5, v2));
            let (b0, b1) = (sub(v4, v1), sub(v3, v2));
            let half: T = lit(0.5);
            GluingData {
                case: iface.case,
                alpha1: ub(vec![det2(sub(v4, v1), e), det2(sub(v3, v2), e)]),
                alpha2: ub(vec![det2(sub(v6, v1), e), det2(sub(v5, v2), e)]),
                alpha3: ub(vec![det2(a0, b0), half * (det2(a0, b1) + det2(a1, b0)), det2(a1, b1)]),
                beta,
                beta1: ub(vec![b(sub(v4, v1)), b(sub(v3, v2))]),
                beta2: ub(vec![b(sub(v6, v1)), b(sub(v5, v2))]),
            }
        }
    };
    Ok(g)
}

/// Gluing data computed directly from the Jacobians of the canonical maps.
pub fn gluing_from_maps<T: Real>(case: InterfaceCase, f1: &GeometryMap<T>, f2: &GeometryMap<T>) -> GluingData<T> {
    let s1 = SideCoupling::from_map(f1);
    let s2 = SideCoupling::from_map(f2);
    let alpha3 = |v: T| {
        let (a, _) = f2.tangents(T::zero(), v);
        let (b, _) = f1.tangents(T::zero(), v);
        det2(a, b)
    };
    let (q0, q1, qh) = (alpha3(T::zero()), alpha3(T::one()), alpha3(lit(0.5)));
    let two: T = lit(2.0);
    let four: T = lit(4.0);
    let e = sub(f1.eval(T::zero(), T::one()), f1.eval(T::zero(), T::zero()));
    GluingData {
        case,
        alpha1: ub(s1.alpha.to_vec()),
        alpha2: ub(s2.alpha.to_vec()),
        alpha3: ub(vec![q0, (four * qh - q0 - q1) / two, q1]),
        beta: dot2(e, e).sqrt(),
        beta1: ub(s1.beta.to_vec()),
        beta2: ub(s2.beta.to_vec()),
    }
}

impl<T: Real> GluingData<T> {
    /// Coefficients of `α2 β1 - α1 β2 - α3` at degree 2.
    pub fn identity_defect(&self) -> Vec<T> {
        let lhs = self.alpha2.mul(&self.beta1).sub(&self.alpha1.mul(&self.beta2));
        lhs.elevate(2).sub(&self.alpha3.elevate(2)).coeffs
    }
}

/// Residual of the vector identity
/// `det J2 (∂_u F1)^⊥ - det J1 (∂_u F2)^⊥ - det[∂_u F2, ∂_u F1] (∂_v F1)^⊥`
/// at `(0, v)`.
pub fn lemma_residual<T: Real>(f1: &GeometryMap<T>, f2: &GeometryMap<T>, v: T) -> [T; 2] {
    let (u1, w1) = f1.tangents(T::zero(), v);
    let (u2, w2) = f2.tangents(T::zero(), v);
    let (d1, d2) = (det2(u1, w1), det2(u2, w2));
    let a3 = det2(u2, u1);
    let (p1, p2, q1) = (perp(u1), perp(u2), perp(w1));
    [d2 * p1[0] - d1 * p2[0] - a3 * q1[0], d2 * p1[1] - d1 * p2[1] - a3 * q1[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::tri_index;
    use crate::mesh::load_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn jacobian_examples() {
        let q = GeometryMap::bilinear([0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]);
        let j = q.jacobian(0.3, 0.6).unwrap();
        assert_eq!(j.columns, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(j.det, 1.0);
        let t = GeometryMap::linear([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert_eq!(t.jacobian(0.2, 0.2).unwrap().det, 1.0);
        let m = GeometryMap::bilinear_v_first([0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]);
        let j = m.jacobian(0.0, 0.0).unwrap();
        assert_eq!(j.columns, [[-1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(j.det, -1.0);
        let flat = GeometryMap::linear([0.0, 0.0], [1.0, 0.0], [2.0, 0.0]);
        assert!(matches!(flat.jacobian(0.1, 0.1), Err(Error::SingularJacobian(_))));
    }

    #[test]
    fn bilinear_jacobian_is_affine() {
        let q = GeometryMap::bilinear([0.0, 0.0], [2.0, 0.1], [1.7, 1.4], [-0.2, 0.9]);
        let det = |u: f64, v: f64| q.jacobian(u, v).unwrap().det;
        let (a, b, c) = (det(0.0, 0.0), det(1.0, 0.0), det(0.0, 1.0));
        for (u, v) in [(0.3, 0.4), (0.9, 0.9), (0.5, 0.1)] {
            assert!(close(det(u, v), a + (b - a) * u + (c - a) * v, 1e-14));
        }
    }

    #[test]
    fn second_derivative_examples() {
        let t = GeometryMap::linear([0.3, 0.0], [1.0, 0.2], [0.0, 1.0]);
        assert_eq!(t.second_derivatives(), [[0.0; 3]; 2]);
        let par = GeometryMap::bilinear([0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [1.0, 1.0]);
        assert_eq!(par.second_derivatives(), [[0.0; 3]; 2]);
        let q = GeometryMap::bilinear_v_first([0.0, 0.0], [0.0, 1.0], [2.0, 1.0], [1.0, 0.0]);
        assert_eq!(q.second_derivatives()[0][1], 1.0);
    }

    #[test]
    fn frames_reproduce_remapped_maps() {
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let n = kind.num_vertices();
            let corners: Vec<[f64; 2]> = match kind {
                ElementKind::Triangle => vec![[0.0, 0.0], [1.3, 0.2], [0.4, 1.1]],
                ElementKind::Quad => vec![[0.0, 0.0], [1.3, 0.2], [1.5, 1.2], [-0.1, 0.9]],
            };
            let map = GeometryMap { kind, corners };
            for a in 0..n {
                for b in [(a + 1) % n, (a + n - 1) % n] {
                    let frame = Frame::new(kind, a, b);
                    let canon = frame.map(&map);
                    for (u, v) in [(0.0, 0.0), (0.2, 0.3), (0.0, 0.7), (0.25, 0.5)] {
                        let (s, t) = frame.param(u, v);
                        let (x, y) = (canon.eval(u, v), map.eval(s, t));
                        assert!(close(x[0], y[0], 1e-14) && close(x[1], y[1], 1e-14));
                    }
                    assert_eq!(canon.eval(0.0, 0.0), map.corners[a]);
                    assert_eq!(canon.eval(0.0, 1.0), map.corners[b]);
                }
            }
        }
    }

    #[test]
    fn frames_permute_patches_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let n = kind.num_vertices();
            let p = 5;
            let ords: Vec<f64> = (0..num_ordinates(kind, p)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let patch = Patch::new(kind, p, ords).unwrap();
            for a in 0..n {
                for b in [(a + 1) % n, (a + n - 1) % n] {
                    let frame = Frame::new(kind, a, b);
                    let canon = frame.to_canonical(&patch);
                    assert_eq!(frame.from_canonical(&canon), patch);
                    for (u, v) in [(0.1, 0.2), (0.0, 0.5), (0.3, 0.6)] {
                        let (s, t) = frame.param(u, v);
                        assert!(close(canon.eval(u, v).unwrap(), patch.eval(s, t).unwrap(), 1e-13));
                    }
                }
            }
        }
        // triangle edge ordinates land on the edge
        let f = Frame::new(ElementKind::Triangle, 1, 2);
        assert_eq!(f.ordinate(5, 0, 0), (5, 0));
        assert_eq!(f.ordinate(5, 0, 5), (0, 5));
        assert_eq!(f.index_table(5)[tri_index(5, 0, 0)], tri_index(5, 5, 0));
    }

    fn quad_triangle_mesh() -> MixedMesh<f64> {
        // quad (0,0),(0,1),(-1,1),(-1,0) listed counterclockwise, triangle apex (1,0)
        load_mesh(r#"{"vertices": [[0,0],[0,1],[-1,1],[-1,0],[1,0]],
                      "quads": [[0,1,2,3]], "triangles": [[4,1,0]]}"#)
        .unwrap()
    }

    #[test]
    fn quad_triangle_example() {
        let mesh = quad_triangle_mesh();
        let edge = mesh.edges().iter().position(|e| e.vertices == [0, 1]).unwrap();
        let iface = canonical_interface(&mesh, edge).unwrap();
        assert_eq!(iface.case, InterfaceCase::QuadTriangle);
        assert_eq!(mesh.element(iface.sides[0].element).kind, ElementKind::Quad);
        let g = gluing_data(&iface).unwrap();
        assert_eq!(g.alpha1.coeffs, vec![-1.0, -1.0]);
        assert_eq!(g.alpha2.coeffs, vec![1.0]);
        assert_eq!(g.alpha3.coeffs, vec![0.0, 0.0]);
        assert_eq!(g.beta, 1.0);
        assert_eq!(g.beta1.coeffs, vec![0.0, 0.0]);
        assert_eq!(g.beta2.coeffs, vec![0.0]);
        // the quad is stored with the shared edge first, so its frame is the identity up to transposition
        assert_eq!(iface.sides[0].frame.corners, vec![0, 3, 2, 1]);
    }

    #[test]
    fn nontrivial_remap_passes_continuity() {
        // shared edge is the quad's top side (v = 1 in its own parameters)
        let mesh: MixedMesh<f64> = load_mesh(
            r#"{"vertices": [[0,0],[1,0],[1,1],[0,1],[0.5,1.8]],
                "quads": [[0,1,2,3]], "triangles": [[3,2,4]]}"#,
        )
        .unwrap();
        let edge = mesh.edges().iter().position(|e| e.vertices == [2, 3]).unwrap();
        let iface = canonical_interface(&mesh, edge).unwrap();
        assert_ne!(iface.sides[0].frame.corners, vec![0, 1, 2, 3]);
        let g = gluing_data(&iface).unwrap();
        let h = gluing_from_maps(iface.case, &iface.sides[0].map, &iface.sides[1].map);
        assert!(g.identity_defect().iter().all(|d| d.abs() < 1e-14));
        assert!(close(g.alpha2.coeffs[0], h.alpha2.coeffs[0], 1e-14));
    }

    #[test]
    fn boundary_edge_is_rejected() {
        let mesh = quad_triangle_mesh();
        let edge = mesh.edges().iter().position(|e| e.boundary).unwrap();
        assert!(matches!(canonical_interface(&mesh, edge), Err(Error::BoundaryEdge(_))));
    }

    #[test]
    fn mirror_triangles() {
        // apexes mirrored across the edge (0,0)-(0,1): α flips sign, β is unchanged
        let mesh: MixedMesh<f64> = load_mesh(
            r#"{"vertices": [[0,0],[0,1],[-0.8,0.3],[0.8,0.3]], "triangles": [[0,1,2],[1,0,3]]}"#,
        )
        .unwrap();
        let edge = mesh.edges().iter().position(|e| !e.boundary).unwrap();
        let iface = canonical_interface(&mesh, edge).unwrap();
        assert_eq!(iface.case, InterfaceCase::TriangleTriangle);
        let g = gluing_data(&iface).unwrap();
        assert!(close(g.alpha1.coeffs[0], -g.alpha2.coeffs[0], 1e-15));
        assert!(close(g.beta1.coeffs[0], g.beta2.coeffs[0], 1e-15));
        assert!(close(g.beta1.coeffs[0], 0.3, 1e-15));
    }

    #[test]
    fn explicit_and_jacobian_gluing_agree() {
        let mesh: MixedMesh<f64> = load_mesh(
            r#"{"vertices": [[0,0],[1,0],[2.1,0.1],[0,1],[1.1,0.9],[2,1.2],[1.2,2]],
                "quads": [[0,1,4,3],[1,2,5,4]], "triangles": [[3,4,6],[4,5,6]]}"#,
        )
        .unwrap();
        for edge in 0..mesh.num_edges() {
            if mesh.edge(edge).boundary {
                continue;
            }
            let iface = canonical_interface(&mesh, edge).unwrap();
            let g = gluing_data(&iface).unwrap();
            let h = gluing_from_maps(iface.case, &iface.sides[0].map, &iface.sides[1].map);
            for (a, b) in [(&g.alpha1, &h.alpha1), (&g.alpha2, &h.alpha2), (&g.alpha3, &h.alpha3), (&g.beta1, &h.beta1), (&g.beta2, &h.beta2)] {
                let d = a.sub(b);
                assert!(d.coeffs.iter().all(|c| c.abs() < 1e-13), "{:?}: {a:?} vs {b:?}", iface.case);
            }
            assert!(g.identity_defect().iter().all(|d| d.abs() < 1e-13));
        }
    }

    #[test]
    fn physical_jet_examples() {
        let t = GeometryMap::linear([0.0, 0.0], [2.0, 0.5], [0.3, 1.0]);
        // f = u
        let jet = t.physical_jet(0.2, 0.3, [0.2, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let j = t.jacobian(0.2, 0.3).unwrap();
        assert!(close(jet.grad[0], j.inverse[0][0], 1e-15) && close(jet.grad[1], j.inverse[0][1], 1e-15));
        assert_eq!(jet.hess, [0.0; 3]);
    }

    #[test]
    fn parametric_and_physical_jets_invert() {
        let q = GeometryMap::bilinear([0.0, 0.0], [2.0, 0.1], [1.7, 1.4], [-0.2, 0.9]);
        let phi = Jet { value: 0.3, grad: [1.2, -0.7], hess: [0.4, 2.2, -1.1] };
        let f = q.parametric_jet(0.3, 0.8, &phi);
        let back = q.physical_jet(0.3, 0.8, f).unwrap();
        for k in 0..2 {
            assert!(close(back.grad[k], phi.grad[k], 1e-13));
        }
        for k in 0..3 {
            assert!(close(back.hess[k], phi.hess[k], 1e-13));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let q = GeometryMap::bilinear([0.0, 0.0], [2.0, 0.1], [1.7, 1.4], [-0.2, 0.9]);
        let x = q.eval(0.37, 0.81);
        let (u, v) = q.inverse(x).unwrap();
        assert!(close(u, 0.37, 1e-12) && close(v, 0.81, 1e-12));
    }

    #[test]
    fn directional_field_examples() {
        let id = GeometryMap::bilinear([0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]);
        let c = Patch::constant(ElementKind::Quad, 5, 3.0f64);
        let g = id.directional_derivative_field(&c, 0.3, 0.4).unwrap();
        assert!(g[0].abs() < 1e-13 && g[1].abs() < 1e-13);
        // f = u on the tensor patch: ordinates i/p
        let mut u = Patch::zeros(ElementKind::Quad, 5);
        for i in 0..=5 {
            for j in 0..=5 {
                u.set(i, j, i as f64 / 5.0);
            }
        }
        let g = id.directional_derivative_field(&u, 0.3, 0.4).unwrap();
        assert!(close(g[0], 1.0, 1e-14) && close(g[1], 0.0, 1e-14));
    }
}
