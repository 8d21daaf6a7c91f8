//! Functions with exact value, gradient and Hessian, used as interpolation
//! data and manufactured solutions.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::scalar::{count, lit, Real};

/// Value, gradient and Hessian `[xx, xy, yy]` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub grad: [T; 2],
    pub hess: [T; 3],
}

impl<T: Real> Jet<T> {
    pub fn zero() -> Self {
        Self { value: T::zero(), grad: [T::zero(); 2], hess: [T::zero(); 3] }
    }

    /// The six vertex data in order `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
    pub fn to_array(&self) -> [T; 6] {
        [self.value, self.grad[0], self.grad[1], self.hess[0], self.hess[1], self.hess[2]]
    }

    pub fn from_array(a: [T; 6]) -> Self {
        Self { value: a[0], grad: [a[1], a[2]], hess: [a[3], a[4], a[5]] }
    }

    pub fn laplacian(&self) -> T {
        self.hess[0] + self.hess[2]
    }
}

pub trait C2Function<T: Real>: Sync {
    fn jet(&self, x: T, y: T) -> Jet<T>;

    fn value(&self, x: T, y: T) -> T {
        self.jet(x, y).value
    }
}

/// A function whose bi-Laplacian is known, for manufactured solutions.
pub trait Biharmonic<T: Real>: C2Function<T> {
    fn bilaplacian(&self, x: T, y: T) -> T;
}

impl<T: Real, F: C2Function<T> + ?Sized> C2Function<T> for &F {
    fn jet(&self, x: T, y: T) -> Jet<T> {
        (**self).jet(x, y)
    }
}

/// `4 cos(2x/3) sin(2y/3)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Trig;

impl<T: Real> C2Function<T> for Trig {
    fn jet(&self, x: T, y: T) -> Jet<T> {
        let a: T = lit(2.0 / 3.0);
        let four: T = lit(4.0);
        let (sx, cx) = (a * x).sin_cos();
        let (sy, cy) = (a * y).sin_cos();
        Jet {
            value: four * cx * sy,
            grad: [-four * a * sx * sy, four * a * cx * cy],
            hess: [-four * a * a * cx * sy, -four * a * a * sx * cy, -four * a * a * cx * sy],
        }
    }
}

impl<T: Real> Biharmonic<T> for Trig {
    fn bilaplacian(&self, x: T, y: T) -> T {
        let a: T = lit(2.0 / 3.0);
        let four: T = lit(4.0);
        four * a.powi(4) * self.value(x, y)
    }
}

/// Bivariate polynomial `sum c[a,b] x^a y^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    terms: BTreeMap<(usize, usize), T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: impl IntoIterator<Item = ((usize, usize), T)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            let e = map.entry(k).or_insert_with(T::zero);
            *e = *e + c;
        }
        Self { terms: map }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &T)> {
        self.terms.iter()
    }

    /// A fixed polynomial of total degree `p` with all monomials present.
    pub fn dense(p: usize) -> Self {
        Self::new((0..=p).flat_map(|a| (0..=p - a).map(move |b| (a, b))).map(|(a, b)| {
            let c = ((a * 3 + b * 5 + 1) % 7) as f64 - 3.0;
            ((a, b), lit::<T>(c / (a + b + 1) as f64))
        }))
    }

    fn derivative(&self, dx: usize, dy: usize) -> Self {
        let falling = |n: usize, k: usize| -> usize { (0..k).map(|r| n - r).product() };
        Self::new(self.terms.iter().filter(|(&(a, b), _)| a >= dx && b >= dy).map(|(&(a, b), &c)| {
            ((a - dx, b - dy), c * count::<T>(falling(a, dx) * falling(b, dy)))
        }))
    }

    pub fn eval(&self, x: T, y: T) -> T {
        self.terms.iter().fold(T::zero(), |s, (&(a, b), &c)| s + c * x.powi(a as i32) * y.powi(b as i32))
    }
}

impl<T: Real> C2Function<T> for Polynomial<T> {
    fn jet(&self, x: T, y: T) -> Jet<T> {
        let d = |i, j| self.derivative(i, j).eval(x, y);
        Jet { value: self.eval(x, y), grad: [d(1, 0), d(0, 1)], hess: [d(2, 0), d(1, 1), d(0, 2)] }
    }
}

impl<T: Real> Biharmonic<T> for Polynomial<T> {
    fn bilaplacian(&self, x: T, y: T) -> T {
        let two: T = lit(2.0);
        self.derivative(4, 0).eval(x, y) + two * self.derivative(2, 2).eval(x, y) + self.derivative(0, 4).eval(x, y)
    }
}

/// Derivatives by central differences of a value-only function. Accuracy is
/// roughly `step^2` for the gradient and the Hessian.
pub struct FiniteDifference<F, T> {
    pub f: F,
    pub step: T,
}

impl<T: Real, F: Fn(T, T) -> T + Sync> C2Function<T> for FiniteDifference<F, T> {
    fn jet(&self, x: T, y: T) -> Jet<T> {
        let h = self.step;
        let two: T = lit(2.0);
        let four: T = lit(4.0);
        let f = &self.f;
        let c = f(x, y);
        let (xp, xm, yp, ym) = (f(x + h, y), f(x - h, y), f(x, y + h), f(x, y - h));
        let xy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (four * h * h);
        Jet {
            value: c,
            grad: [(xp - xm) / (two * h), (yp - ym) / (two * h)],
            hess: [(xp - two * c + xm) / (h * h), xy, (yp - two * c + ym) / (h * h)],
        }
    }
}

/// Test functions selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionId {
    Trig,
    Poly(usize),
    Linear,
    Quadratic,
}

impl FromStr for FunctionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "trig" => Ok(FunctionId::Trig),
            "linear" => Ok(FunctionId::Linear),
            "quadratic" => Ok(FunctionId::Quadratic),
            _ => {
                if let Some(rest) = s.strip_prefix("poly") {
                    let deg = if rest.is_empty() { 5 } else { rest.parse().map_err(|_| format!("bad degree in {s:?}"))? };
                    Ok(FunctionId::Poly(deg))
                } else {
                    Err(format!("unknown function {s:?} (expected paper, poly<N>, linear or quadratic)"))
                }
            }
        }
    }
}

/// A boxed function with known bi-Laplacian.
pub fn make<T: Real>(id: FunctionId) -> Box<dyn Biharmonic<T>> {
    match id {
        FunctionId::Trig => Box::new(Trig),
        FunctionId::Poly(p) => Box::new(Polynomial::<T>::dense(p)),
        FunctionId::Linear => Box::new(Polynomial::new([((0, 0), lit(0.5)), ((1, 0), T::one()), ((0, 1), lit(-2.0))])),
        FunctionId::Quadratic => Box::new(Polynomial::new([((2, 0), T::one()), ((0, 2), T::one())])),
    }
}

impl<T: Real> C2Function<T> for Box<dyn Biharmonic<T>> {
    fn jet(&self, x: T, y: T) -> Jet<T> {
        (**self).jet(x, y)
    }
}

impl<T: Real> Biharmonic<T> for Box<dyn Biharmonic<T>> {
    fn bilaplacian(&self, x: T, y: T) -> T {
        (**self).bilaplacian(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_matches_finite_differences() {
        let fd = FiniteDifference { f: |x: f64, y: f64| Trig.value(x, y), step: 1e-4 };
        for (x, y) in [(0.3, 0.7), (1.5, -0.2), (2.0, 2.0)] {
            let (a, b) = (Trig.jet(x, y), fd.jet(x, y));
            assert!((a.grad[0] - b.grad[0]).abs() < 1e-7);
            assert!((a.grad[1] - b.grad[1]).abs() < 1e-7);
            for k in 0..3 {
                assert!((a.hess[k] - b.hess[k]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn trig_bilaplacian() {
        let (x, y) = (0.4f64, 1.1f64);
        assert!((Trig.bilaplacian(x, y) - 64.0 / 81.0 * Trig.value(x, y)).abs() < 1e-14);
    }

    #[test]
    fn polynomial_derivatives() {
        // x^2 y^3 - 2 x
        let p = Polynomial::new([((2, 3), 1.0), ((1, 0), -2.0)]);
        let j = p.jet(2.0, 1.0);
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad, [2.0, 12.0]);
        assert_eq!(j.hess, [2.0, 12.0, 24.0]);
        let q = Polynomial::new([((2, 2), 1.0)]);
        assert_eq!(q.bilaplacian(0.3, 0.9), 8.0);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("paper".parse::<FunctionId>().unwrap(), FunctionId::Trig);
        assert_eq!("poly7".parse::<FunctionId>().unwrap(), FunctionId::Poly(7));
        assert!("bogus".parse::<FunctionId>().is_err());
        assert_eq!(Polynomial::<f64>::dense(6).degree(), 6);
    }
}
