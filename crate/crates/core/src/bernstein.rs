//! Univariate, triangular and tensor-product Bernstein polynomials.
//!
//! Triangular ordinates `b[i,j,k]` with `i + j + k = p` are stored flat in
//! lexicographic `(i, j)` order, `k = p - i - j`; see [`tri_index`]. The
//! reference triangle is `u, v >= 0, u + v <= 1` and `B[i,j,k] = p!/(i!j!k!)
//! u^i v^j (1-u-v)^k`. Tensor ordinates `b[i,j]` multiply `B_i(u) B_j(v)` and
//! are stored at `i * (p + 1) + j`.
//!
//! Evaluation uses de Casteljau. Derivatives are obtained from tabulated
//! basis jets, which is what quadrature loops want anyway.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Lu};
use crate::mesh::ElementKind;
use crate::scalar::{count, Real, Scalar};

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn multinomial(p: usize, i: usize, j: usize) -> u64 {
    binomial(p, i) * binomial(p - i, j)
}

#[inline]
pub fn tri_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i + j <= p);
    i * (p + 1) - i * i.saturating_sub(1) / 2 + j
}

#[inline]
pub fn tensor_index(p: usize, i: usize, j: usize) -> usize {
    i * (p + 1) + j
}

pub fn num_ordinates(kind: ElementKind, p: usize) -> usize {
    match kind {
        ElementKind::Triangle => (p + 1) * (p + 2) / 2,
        ElementKind::Quad => (p + 1) * (p + 1),
    }
}

/// `(i, j)` of every ordinate in storage order.
pub fn ordinate_indices(kind: ElementKind, p: usize) -> Vec<(usize, usize)> {
    match kind {
        ElementKind::Triangle => (0..=p).flat_map(|i| (0..=p - i).map(move |j| (i, j))).collect(),
        ElementKind::Quad => (0..=p).flat_map(|i| (0..=p).map(move |j| (i, j))).collect(),
    }
}

fn powers<T: Scalar>(t: T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    for k in 0..n {
        out.push(out[k] * t);
    }
    out
}

/// All degree-`p` univariate basis values at `t`.
pub fn basis<T: Scalar>(p: usize, t: T) -> Vec<T> {
    let a = powers(t, p);
    let b = powers(T::one() - t, p);
    (0..=p).map(|i| count::<T>(binomial(p, i) as usize) * a[i] * b[p - i]).collect()
}

/// `k`-th derivatives of all degree-`p` basis functions at `t`.
pub fn basis_derivative<T: Scalar>(p: usize, k: usize, t: T) -> Vec<T> {
    let mut out = vec![T::zero(); p + 1];
    if k > p {
        return out;
    }
    let lower = basis(p - k, t);
    let mut scale = T::one();
    for r in 0..k {
        scale = scale * count(p - r);
    }
    // forward difference operator applied k times, with alternating binomial weights
    for (m, &b) in lower.iter().enumerate() {
        for r in 0..=k {
            let w = count::<T>(binomial(k, r) as usize) * scale * b;
            if (k - r) % 2 == 0 {
                out[m + r] = out[m + r] + w;
            } else {
                out[m + r] = out[m + r] - w;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateBernstein<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> UnivariateBernstein<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(value: T) -> Self {
        Self::new(vec![value])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: T) -> T {
        let mut b = self.coeffs.clone();
        let s = T::one() - t;
        for r in 1..b.len() {
            for i in 0..b.len() - r {
                b[i] = s * b[i] + t * b[i + 1];
            }
        }
        b[0]
    }

    pub fn derivative(&self) -> Self {
        let p = self.degree();
        if p == 0 {
            return Self::constant(T::zero());
        }
        let scale: T = count(p);
        Self::new((0..p).map(|i| scale * (self.coeffs[i + 1] - self.coeffs[i])).collect())
    }

    pub fn elevate(&self, to: usize) -> Self {
        let mut c = self.coeffs.clone();
        while c.len() - 1 < to {
            let n = c.len();
            let q: T = count(n);
            let mut next = Vec::with_capacity(n + 1);
            next.push(c[0]);
            for i in 1..n {
                let a: T = count(i);
                next.push((a * c[i - 1] + (q - a) * c[i]) / q);
            }
            next.push(c[n - 1]);
            c = next;
        }
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (m, n) = (self.degree(), other.degree());
        let mut out = vec![T::zero(); m + n + 1];
        let denom = |k: usize| count::<T>(binomial(m + n, k) as usize);
        for i in 0..=m {
            for j in 0..=n {
                let w: T = count::<T>((binomial(m, i) * binomial(n, j)) as usize);
                out[i + j] = out[i + j] + w * self.coeffs[i] * other.coeffs[j];
            }
        }
        for (k, c) in out.iter_mut().enumerate() {
            *c = *c / denom(k);
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let d = self.degree().max(other.degree());
        let (a, b) = (self.elevate(d), other.elevate(d));
        Self::new(a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| x - y).collect())
    }
}

impl<T: Real> UnivariateBernstein<T> {
    /// Smallest `d` such that the polynomial has degree at most `d`, using
    /// forward differences with relative tolerance `tol`.
    pub fn effective_degree(&self, tol: T) -> usize {
        let scale = self.coeffs.iter().fold(T::one(), |m, c| m.max(c.abs()));
        let mut diffs = self.coeffs.clone();
        let p = self.degree();
        // the k-th difference vanishes iff degree < k
        let mut deg = 0;
        for k in 1..=p {
            diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
            if diffs.iter().any(|d| d.abs() > tol * scale) {
                deg = k;
            }
        }
        deg
    }
}

/// Solves the Hermite-type interpolation problem for a degree-`p`
/// polynomial on `[0, 1]`.
///
/// `left[k]` and `right[k]` prescribe the `k`-th derivative at `t = 0` and
/// `t = 1`; `samples` holds interior `(t, value)` pairs. The total number of
/// conditions must be `p + 1`.
pub fn hermite_fit<T: Real>(p: usize, left: &[T], right: &[T], samples: &[(T, T)]) -> Result<UnivariateBernstein<T>> {
    let n = p + 1;
    if left.len() + right.len() + samples.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} conditions for a degree-{p} fit",
            left.len() + right.len() + samples.len()
        )));
    }
    let mut rows = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for (k, &y) in left.iter().enumerate() {
        rows.extend(basis_derivative(p, k, T::zero()));
        rhs.push(y);
    }
    for (k, &y) in right.iter().enumerate() {
        rows.extend(basis_derivative(p, k, T::one()));
        rhs.push(y);
    }
    for &(t, y) in samples {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::SingularSystem(format!("interior node {t} not in (0, 1)")));
        }
        rows.extend(basis(p, t));
        rhs.push(y);
    }
    let a = DenseMatrix::from_rows(n, n, rows);
    let lu = Lu::factor(&a).map_err(|_| Error::SingularSystem("Hermite fit with repeated nodes".into()))?;
    Ok(UnivariateBernstein::new(lu.solve(&rhs)))
}

/// Values and first/second partial derivatives of every basis function at a
/// point, in ordinate storage order.
#[derive(Clone, Debug)]
pub struct BasisJets<T> {
    pub value: Vec<T>,
    pub du: Vec<T>,
    pub dv: Vec<T>,
    pub duu: Vec<T>,
    pub duv: Vec<T>,
    pub dvv: Vec<T>,
}

/// Triangular basis of degree `q` at barycentric `(u, v, w)`; entries for
/// negative indices are treated as zero by the callers.
fn tri_basis<T: Scalar>(q: usize, u: T, v: T) -> Vec<T> {
    let w = T::one() - u - v;
    let (pu, pv, pw) = (powers(u, q), powers(v, q), powers(w, q));
    let mut out = Vec::with_capacity((q + 1) * (q + 2) / 2);
    for i in 0..=q {
        for j in 0..=q - i {
            out.push(count::<T>(multinomial(q, i, j) as usize) * pu[i] * pv[j] * pw[q - i - j]);
        }
    }
    out
}

impl<T: Scalar> BasisJets<T> {
    pub fn new(kind: ElementKind, p: usize, u: T, v: T) -> Self {
        match kind {
            ElementKind::Quad => Self::tensor(p, u, v),
            ElementKind::Triangle => Self::triangle(p, u, v),
        }
    }

    fn tensor(p: usize, u: T, v: T) -> Self {
        let bu = [basis(p, u), basis_derivative(p, 1, u), basis_derivative(p, 2, u)];
        let bv = [basis(p, v), basis_derivative(p, 1, v), basis_derivative(p, 2, v)];
        let n = (p + 1) * (p + 1);
        let mut jets = Self::zeros(n);
        for i in 0..=p {
            for j in 0..=p {
                let k = tensor_index(p, i, j);
                jets.value[k] = bu[0][i] * bv[0][j];
                jets.du[k] = bu[1][i] * bv[0][j];
                jets.dv[k] = bu[0][i] * bv[1][j];
                jets.duu[k] = bu[2][i] * bv[0][j];
                jets.duv[k] = bu[1][i] * bv[1][j];
                jets.dvv[k] = bu[0][i] * bv[2][j];
            }
        }
        jets
    }

    fn triangle(p: usize, u: T, v: T) -> Self {
        let n = (p + 1) * (p + 2) / 2;
        let mut jets = Self::zeros(n);
        jets.value = tri_basis(p, u, v);
        let b1 = if p >= 1 { tri_basis(p - 1, u, v) } else { Vec::new() };
        let b2 = if p >= 2 { tri_basis(p - 2, u, v) } else { Vec::new() };
        let at = |b: &[T], q: usize, i: isize, j: isize| -> T {
            if i < 0 || j < 0 || (i + j) as usize > q {
                T::zero()
            } else {
                b[tri_index(q, i as usize, j as usize)]
            }
        };
        let p1: T = count(p);
        let p2: T = if p >= 1 { p1 * count(p - 1) } else { T::zero() };
        for i in 0..=p {
            for j in 0..=p - i {
                let k = tri_index(p, i, j);
                let (ii, jj) = (i as isize, j as isize);
                if p >= 1 {
                    // B^{q}_{i,j,k} with k implied; lowering k means keeping (i, j)
                    let q = p - 1;
                    jets.du[k] = p1 * (at(&b1, q, ii - 1, jj) - at(&b1, q, ii, jj));
                    jets.dv[k] = p1 * (at(&b1, q, ii, jj - 1) - at(&b1, q, ii, jj));
                }
                if p >= 2 {
                    let q = p - 2;
                    let two: T = count(2);
                    jets.duu[k] = p2 * (at(&b2, q, ii - 2, jj) - two * at(&b2, q, ii - 1, jj) + at(&b2, q, ii, jj));
                    jets.duv[k] = p2
                        * (at(&b2, q, ii - 1, jj - 1) - at(&b2, q, ii - 1, jj) - at(&b2, q, ii, jj - 1)
                            + at(&b2, q, ii, jj));
                    jets.dvv[k] = p2 * (at(&b2, q, ii, jj - 2) - two * at(&b2, q, ii, jj - 1) + at(&b2, q, ii, jj));
                }
            }
        }
        jets
    }

    fn zeros(n: usize) -> Self {
        let z = vec![T::zero(); n];
        Self { value: z.clone(), du: z.clone(), dv: z.clone(), duu: z.clone(), duv: z.clone(), dvv: z }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    /// `[f, f_u, f_v, f_uu, f_uv, f_vv]` for the given ordinates.
    pub fn apply(&self, ordinates: &[T]) -> [T; 6] {
        let mut out = [T::zero(); 6];
        for (k, &b) in ordinates.iter().enumerate() {
            out[0] = out[0] + self.value[k] * b;
            out[1] = out[1] + self.du[k] * b;
            out[2] = out[2] + self.dv[k] * b;
            out[3] = out[3] + self.duu[k] * b;
            out[4] = out[4] + self.duv[k] * b;
            out[5] = out[5] + self.dvv[k] * b;
        }
        out
    }
}

/// A polynomial on a reference element in Bernstein form.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch<T> {
    pub kind: ElementKind,
    pub degree: usize,
    pub ordinates: Vec<T>,
}

pub(crate) fn inside_reference<T: Scalar>(kind: ElementKind, u: T, v: T) -> bool {
    let eps: T = T::from_f64(1e-12).unwrap_or_else(T::zero);
    let one = T::one();
    match kind {
        ElementKind::Quad => u + eps >= T::zero() && v + eps >= T::zero() && u <= one + eps && v <= one + eps,
        ElementKind::Triangle => u + eps >= T::zero() && v + eps >= T::zero() && u + v <= one + eps,
    }
}

impl<T: Scalar> Patch<T> {
    pub fn zeros(kind: ElementKind, degree: usize) -> Self {
        Self { kind, degree, ordinates: vec![T::zero(); num_ordinates(kind, degree)] }
    }

    pub fn constant(kind: ElementKind, degree: usize, value: T) -> Self {
        Self { kind, degree, ordinates: vec![value; num_ordinates(kind, degree)] }
    }

    pub fn new(kind: ElementKind, degree: usize, ordinates: Vec<T>) -> Result<Self> {
        if ordinates.len() != num_ordinates(kind, degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} ordinates for a degree-{degree} {kind:?} patch",
                ordinates.len()
            )));
        }
        Ok(Self { kind, degree, ordinates })
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        match self.kind {
            ElementKind::Triangle => tri_index(self.degree, i, j),
            ElementKind::Quad => tensor_index(self.degree, i, j),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.ordinates[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.index(i, j);
        self.ordinates[k] = value;
    }

    pub fn eval(&self, u: T, v: T) -> Result<T> {
        if !inside_reference(self.kind, u, v) {
            return Err(Error::OutsideReference {
                u: u.to_f64().unwrap_or(f64::NAN),
                v: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.eval_unchecked(u, v))
    }

    /// de Casteljau evaluation without the domain check.
    pub fn eval_unchecked(&self, u: T, v: T) -> T {
        let p = self.degree;
        match self.kind {
            ElementKind::Quad => {
                let column: Vec<T> = (0..=p)
                    .map(|i| {
                        let row = &self.ordinates[i * (p + 1)..(i + 1) * (p + 1)];
                        UnivariateBernstein { coeffs: row.to_vec() }.eval(v)
                    })
                    .collect();
                UnivariateBernstein { coeffs: column }.eval(u)
            }
            ElementKind::Triangle => {
                let w = T::one() - u - v;
                let mut b = self.ordinates.clone();
                for q in (0..p).rev() {
                    let mut next = Vec::with_capacity((q + 1) * (q + 2) / 2);
                    for i in 0..=q {
                        for j in 0..=q - i {
                            let up = b[tri_index(q + 1, i + 1, j)];
                            let vp = b[tri_index(q + 1, i, j + 1)];
                            let wp = b[tri_index(q + 1, i, j)];
                            next.push(u * up + v * vp + w * wp);
                        }
                    }
                    b = next;
                }
                b[0]
            }
        }
    }

    /// Direct evaluation via the explicit basis formula.
    pub fn eval_direct(&self, u: T, v: T) -> T {
        let b = BasisJets::new(self.kind, self.degree, u, v);
        b.value.iter().zip(&self.ordinates).fold(T::zero(), |s, (&x, &c)| s + x * c)
    }

    /// `[f, f_u, f_v, f_uu, f_uv, f_vv]` at `(u, v)`.
    pub fn jet(&self, u: T, v: T) -> [T; 6] {
        BasisJets::new(self.kind, self.degree, u, v).apply(&self.ordinates)
    }

    /// Ordinates along the edge `u = 0`, ordered by increasing `v`.
    pub fn edge_row(&self, row: usize) -> Vec<T> {
        let p = self.degree;
        match self.kind {
            ElementKind::Quad => (0..=p).map(|j| self.get(row, j)).collect(),
            ElementKind::Triangle => (0..=p - row).map(|j| self.get(row, j)).collect(),
        }
    }

    /// Bernstein coefficients of `∂_u f(0, v)`.
    pub fn trace_du(&self) -> UnivariateBernstein<T> {
        let p = self.degree;
        let s: T = count(p);
        let (r0, r1) = (self.edge_row(0), self.edge_row(1));
        let n = r1.len();
        UnivariateBernstein::new((0..n).map(|j| s * (r1[j] - r0[j])).collect())
    }

    /// Bernstein coefficients of `∂_v f(0, v)` (degree `p - 1`).
    pub fn trace_dv(&self) -> UnivariateBernstein<T> {
        UnivariateBernstein::new(self.edge_row(0)).derivative()
    }
}

impl<T: Real> Patch<T> {
    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(self.ordinates.iter().copied())
    }
}

/// Reference points `(u, v)` sampled on a uniform grid with `n` intervals.
pub fn reference_grid<T: Real>(kind: ElementKind, n: usize) -> Vec<(T, T)> {
    let h = T::one() / count::<T>(n);
    match kind {
        ElementKind::Quad => (0..=n).flat_map(|i| (0..=n).map(move |j| (count::<T>(i) * h, count::<T>(j) * h))).collect(),
        ElementKind::Triangle => {
            (0..=n).flat_map(|i| (0..=n - i).map(move |j| (count::<T>(i) * h, count::<T>(j) * h))).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn index_maps_are_dense() {
        for p in 0..8 {
            let idx: Vec<usize> = ordinate_indices(ElementKind::Triangle, p).iter().map(|&(i, j)| tri_index(p, i, j)).collect();
            assert_eq!(idx, (0..num_ordinates(ElementKind::Triangle, p)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            for kind in [ElementKind::Triangle, ElementKind::Quad] {
                let s: f64 = BasisJets::new(kind, 7, u, v).value.iter().sum();
                assert!((s - 1.0).abs() < 1e-13);
                assert!((Patch::constant(kind, 7, 1.0).eval(u, v).unwrap() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn partition_of_unity_exact() {
        let b = BasisJets::new(ElementKind::Triangle, 6, q(1, 3), q(1, 5));
        assert_eq!(b.value.iter().fold(q(0, 1), |a, &x| a + x), q(1, 1));
        assert_eq!(b.du.iter().fold(q(0, 1), |a, &x| a + x), q(0, 1));
        assert_eq!(b.duv.iter().fold(q(0, 1), |a, &x| a + x), q(0, 1));
    }

    #[test]
    fn corner_interpolation() {
        let mut patch = Patch::zeros(ElementKind::Quad, 5);
        patch.set(0, 0, 1.0);
        assert_eq!(patch.eval(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(patch.eval(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn triangle_u_squared() {
        let mut patch = Patch::zeros(ElementKind::Triangle, 2);
        patch.set(2, 0, q(1, 1));
        assert_eq!(patch.eval(q(1, 2), q(1, 4)).unwrap(), q(1, 4));
        assert_eq!(patch.eval_direct(q(1, 2), q(1, 4)), q(1, 4));
    }

    #[test]
    fn outside_reference_is_error() {
        let patch = Patch::constant(ElementKind::Triangle, 5, 1.0);
        assert!(matches!(patch.eval(0.7, 0.7), Err(Error::OutsideReference { .. })));
        assert!(Patch::constant(ElementKind::Quad, 5, 1.0).eval(0.7, 0.7).is_ok());
        assert!(Patch::constant(ElementKind::Quad, 5, 1.0).eval(-0.1, 0.5).is_err());
    }

    /// Ordinates of a monomial `u^a v^b` in degree-`p` Bernstein form, using
    /// the blossom: `u^a v^b` has ordinate `C(i,a) C(j,b) / (C(p,a) C(p-a,b))`
    /// on triangles and `C(i,a) C(j,b) / (C(p,a) C(p,b))` on quads.
    fn monomial_ordinates(kind: ElementKind, p: usize, a: usize, b: usize) -> Vec<f64> {
        ordinate_indices(kind, p)
            .into_iter()
            .map(|(i, j)| {
                let num = (binomial(i, a) * binomial(j, b)) as f64;
                match kind {
                    ElementKind::Triangle => num / (binomial(p, a) * binomial(p - a, b)) as f64,
                    ElementKind::Quad => num / (binomial(p, a) * binomial(p, b)) as f64,
                }
            })
            .collect()
    }

    #[test]
    fn random_polynomials_match_monomial_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let p = 6;
            let mut terms = Vec::new();
            let mut ords = vec![0.0; num_ordinates(kind, p)];
            for a in 0..=p {
                for b in 0..=p {
                    if kind == ElementKind::Triangle && a + b > p {
                        continue;
                    }
                    let c: f64 = rng.random_range(-1.0..1.0);
                    terms.push((a, b, c));
                    for (o, m) in ords.iter_mut().zip(monomial_ordinates(kind, p, a, b)) {
                        *o += c * m;
                    }
                }
            }
            let patch = Patch::new(kind, p, ords).unwrap();
            for _ in 0..30 {
                let (u, v): (f64, f64) = (rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
                let exact: f64 = terms.iter().map(|&(a, b, c)| c * u.powi(a as i32) * v.powi(b as i32)).sum();
                let scale = terms.iter().map(|t| t.2.abs()).sum::<f64>();
                assert!((patch.eval(u, v).unwrap() - exact).abs() < 1e-12 * scale);
                assert!((patch.eval_direct(u, v) - exact).abs() < 1e-12 * scale);
                let du: f64 = terms
                    .iter()
                    .filter(|t| t.0 > 0)
                    .map(|&(a, b, c)| c * a as f64 * u.powi(a as i32 - 1) * v.powi(b as i32))
                    .sum();
                let duv: f64 = terms
                    .iter()
                    .filter(|t| t.0 > 0 && t.1 > 0)
                    .map(|&(a, b, c)| c * (a * b) as f64 * u.powi(a as i32 - 1) * v.powi(b as i32 - 1))
                    .sum();
                let jet = patch.jet(u, v);
                assert!((jet[1] - du).abs() < 1e-10 * scale);
                assert!((jet[4] - duv).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let ords: Vec<f64> = (0..num_ordinates(kind, 5)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let patch = Patch::new(kind, 5, ords).unwrap();
            let (u, v) = (0.31, 0.22);
            let h = 1e-4;
            let f = |a: f64, b: f64| patch.eval_unchecked(a, b);
            let jet = patch.jet(u, v);
            let fuu = (f(u + h, v) - 2.0 * f(u, v) + f(u - h, v)) / (h * h);
            let fvv = (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h);
            let fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
            assert!((jet[3] - fuu).abs() < 1e-5);
            assert!((jet[4] - fuv).abs() < 1e-5);
            assert!((jet[5] - fvv).abs() < 1e-5);
        }
    }

    #[test]
    fn trace_examples() {
        let zero = Patch::constant(ElementKind::Quad, 5, 2.5);
        assert!(zero.trace_du().coeffs.iter().all(|&c| c == 0.0));
        assert!(zero.trace_dv().coeffs.iter().all(|&c| c == 0.0));

        let mut t = Patch::zeros(ElementKind::Quad, 5);
        for j in 0..=5 {
            t.set(1, j, 1.0);
        }
        assert_eq!(t.trace_du().coeffs, vec![5.0; 6]);

        let mut tri = Patch::zeros(ElementKind::Triangle, 5);
        for j in 0..=5 {
            tri.set(0, j, q(j as i64, 5));
        }
        assert_eq!(tri.trace_dv().coeffs, vec![q(1, 1); 5]);
    }

    #[test]
    fn traces_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in [ElementKind::Triangle, ElementKind::Quad] {
            let ords: Vec<f64> = (0..num_ordinates(kind, 6)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let patch = Patch::new(kind, 6, ords).unwrap();
            let (du, dv) = (patch.trace_du(), patch.trace_dv());
            let h = 1e-5;
            for k in 1..10 {
                let v = k as f64 / 11.0;
                let fd_u = (patch.eval_unchecked(h, v) - patch.eval_unchecked(-h, v)) / (2.0 * h);
                let fd_v = (patch.eval_unchecked(0.0, v + h) - patch.eval_unchecked(0.0, v - h)) / (2.0 * h);
                assert!((du.eval(v) - fd_u).abs() < 1e-6);
                assert!((dv.eval(v) - fd_v).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn elevate_and_multiply_exact() {
        let a = UnivariateBernstein::new(vec![q(1, 1), q(3, 1)]);
        let b = UnivariateBernstein::new(vec![q(2, 1), q(-1, 1)]);
        let prod = a.mul(&b);
        for t in [q(0, 1), q(1, 3), q(1, 2), q(1, 1)] {
            assert_eq!(prod.eval(t), a.eval(t) * b.eval(t));
            assert_eq!(a.elevate(4).eval(t), a.eval(t));
        }
    }

    #[test]
    fn hermite_fit_monomial() {
        // t^5: value/derivatives 0 at t=0, (1, 5, 20) at t=1
        let fit = hermite_fit(5, &[0.0, 0.0, 0.0], &[1.0, 5.0, 20.0], &[]).unwrap();
        for (c, e) in fit.coeffs.iter().zip([0.0f64, 0.0, 0.0, 0.0, 0.0, 1.0]) {
            assert!((c - e).abs() < 1e-12);
        }
        let zero = hermite_fit(6, &[0.0; 3], &[0.0; 3], &[(0.5, 0.0)]).unwrap();
        assert!(zero.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn hermite_fit_rejects_repeated_nodes() {
        let err = hermite_fit(7, &[0.0; 3], &[0.0; 3], &[(0.4, 1.0), (0.4, 2.0)]);
        assert!(matches!(err, Err(Error::SingularSystem(_))));
        assert!(hermite_fit(7, &[0.0; 3], &[0.0; 3], &[(0.4, 1.0)]).is_err());
    }

    #[test]
    fn hermite_fit_sin_matches_monomial_oracle() {
        let nodes = [0.3, 0.6];
        let fit = hermite_fit(
            7,
            &[0.0, 1.0, 0.0],
            &[1f64.sin(), 1f64.cos(), -1f64.sin()],
            &[(nodes[0], nodes[0].sin()), (nodes[1], nodes[1].sin())],
        )
        .unwrap();
        // the same conditions in the monomial basis
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mono = |t: f64, k: usize| -> Vec<f64> {
            (0..8)
                .map(|n| if n < k { 0.0 } else { (0..k).map(|r| (n - r) as f64).product::<f64>() * t.powi((n - k) as i32) })
                .collect()
        };
        for (t, d, y) in [
            (0.0, 0, 0.0),
            (0.0, 1, 1.0),
            (0.0, 2, 0.0),
            (1.0, 0, 1f64.sin()),
            (1.0, 1, 1f64.cos()),
            (1.0, 2, -1f64.sin()),
            (nodes[0], 0, nodes[0].sin()),
            (nodes[1], 0, nodes[1].sin()),
        ] {
            rows.extend(mono(t, d));
            rhs.push(y);
        }
        let a = nalgebra::DMatrix::from_row_slice(8, 8, &rows);
        let c = a.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for k in 0..20 {
            let t = k as f64 / 19.0;
            let m: f64 = (0..8).map(|n| c[n] * t.powi(n as i32)).sum();
            assert!((fit.eval(t) - m).abs() < 1e-9);
        }
    }

    #[test]
    fn effective_degree_detects_linear() {
        let lin = UnivariateBernstein::new(vec![1.0, 2.0]).elevate(5);
        assert_eq!(lin.effective_degree(1e-12), 1);
        let quad = UnivariateBernstein::new(vec![0.0, 0.0, 1.0]).elevate(4);
        assert_eq!(quad.effective_degree(1e-12), 2);
    }
}
