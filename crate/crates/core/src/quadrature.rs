//! Gauss–Legendre rules on the reference square and collapsed rules on the
//! reference triangle.

use crate::error::{Error, Result};
use crate::mesh::ElementKind;
use crate::scalar::{count, lit, Real};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    for i in 0..(n + 1) / 2 {
        // Tricomi's initial guess, then Newton on P_n
        let mut x: T = lit((std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos());
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), x);
            for k in 2..=n {
                let kk: T = count(k);
                let p2 = ((two * kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            let nn: T = count(n);
            let (pn, pm) = (p1, p0);
            dp = nn * (x * pn - pm) / (x * x - T::one());
            let dx = pn / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() {
                break;
            }
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        nodes[i] = half * (T::one() - x);
        nodes[n - 1 - i] = half * (T::one() + x);
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// Points and positive weights on a reference element.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    pub kind: ElementKind,
    pub points: Vec<(T, T)>,
    pub weights: Vec<T>,
    /// Total degree integrated exactly on triangles, degree per direction on
    /// quads.
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// Tensor rule with `n` points per direction, exact to degree `2n - 1`
    /// in each variable.
    pub fn quad(n: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                points.push((x[i], x[j]));
                weights.push(w[i] * w[j]);
            }
        }
        Self { kind: ElementKind::Quad, points, weights, degree: 2 * n - 1 }
    }

    /// Collapsed rule `u = s, v = (1 - s) t` with `n` points per direction,
    /// exact to total degree `2n - 2`.
    pub fn triangle(n: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                points.push((x[i], (T::one() - x[i]) * x[j]));
                weights.push(w[i] * w[j] * (T::one() - x[i]));
            }
        }
        Self { kind: ElementKind::Triangle, points, weights, degree: 2 * n - 2 }
    }

    pub fn new(kind: ElementKind, n: usize) -> Self {
        match kind {
            ElementKind::Quad => Self::quad(n),
            ElementKind::Triangle => Self::triangle(n),
        }
    }

    /// `p + 2` points per direction, enough for products of two degree-`p`
    /// patches times an affine Jacobian determinant.
    pub fn for_degree(kind: ElementKind, p: usize) -> Self {
        Self::new(kind, p + 2)
    }

    /// Fails unless the rule integrates degree `degree` exactly.
    pub fn require(&self, degree: usize) -> Result<()> {
        if self.degree < degree {
            Err(Error::QuadratureTooWeak { points: self.points.len(), degree })
        } else {
            Ok(())
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T, T) -> T) -> T {
        self.points.iter().zip(&self.weights).fold(T::zero(), |s, (&(u, v), &w)| s + w * f(u, v))
    }
}
