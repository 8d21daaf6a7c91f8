//! Error norms and convergence studies under uniform refinement.

use std::fmt::Write as _;
use std::str::FromStr;

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{l2_fit, solve_biharmonic};
use crate::error::{Error, Result};
use crate::functions::{make, Biharmonic, C2Function, FunctionId};
use crate::geometry::GeometryMap;
use crate::mesh::{ElementKind, MixedMesh};
use crate::quadrature::QuadratureRule;
use crate::scalar::{count, to_f64, Real};
use crate::space::{SplineFunction, SplineSpace};

/// Uniform samples per direction on each element for the maximum error.
pub const LINF_SAMPLES: usize = 51;

/// Errors below this are at the floating point floor and carry no rate.
pub const RATE_FLOOR: f64 = 1e-13;

/// Reference points of the maximum-error grid: `51^2` on quads and
/// `C(52, 2)` on triangles.
pub fn linf_grid<T: Real>(kind: ElementKind) -> Vec<(T, T)> {
    let n = LINF_SAMPLES - 1;
    let step = |i: usize| count::<T>(i) / count::<T>(n);
    match kind {
        ElementKind::Quad => (0..=n).flat_map(|i| (0..=n).map(move |j| (step(i), step(j)))).collect(),
        ElementKind::Triangle => (0..=n).flat_map(|i| (0..=n - i).map(move |j| (step(i), step(j)))).collect(),
    }
}

/// `max |f - s|` over the sampling grid of every element.
pub fn error_linf<T: Real, F: C2Function<T> + ?Sized>(s: &SplineFunction<T>, f: &F, mesh: &MixedMesh<T>) -> T {
    let grids = [linf_grid::<T>(ElementKind::Triangle), linf_grid::<T>(ElementKind::Quad)];
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let kind = mesh.element(e).kind;
            let map = GeometryMap::from_element(mesh, e);
            let grid = &grids[(kind == ElementKind::Quad) as usize];
            grid.iter().fold(T::zero(), |m, &(u, v)| {
                let x = map.eval(u, v);
                m.max((f.value(x[0], x[1]) - s.patches[e].eval_unchecked(u, v)).abs())
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

/// Squared `L2` norm, `H1` and `H2` seminorms of `f - s`; the `H2` integrand
/// is `e_xx^2 + 2 e_xy^2 + e_yy^2`.
pub fn sobolev_squares<T: Real, F: C2Function<T> + ?Sized>(s: &SplineFunction<T>, f: &F, mesh: &MixedMesh<T>) -> Result<[T; 3]> {
    let rules = [
        QuadratureRule::<T>::new(ElementKind::Triangle, s.degree + 4),
        QuadratureRule::<T>::new(ElementKind::Quad, s.degree + 4),
    ];
    let two: T = crate::scalar::lit(2.0);
    let per_element = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| -> Result<[T; 3]> {
            let kind = mesh.element(e).kind;
            let map = GeometryMap::from_element(mesh, e);
            let rule = &rules[(kind == ElementKind::Quad) as usize];
            let mut acc = [T::zero(); 3];
            for (&(u, v), &w) in rule.points.iter().zip(&rule.weights) {
                let j = map.jacobian(u, v)?;
                let x = map.eval(u, v);
                let a = map.physical_jet_with(&j, s.patches[e].jet(u, v));
                let b = f.jet(x[0], x[1]);
                let wd = w * j.det.abs();
                let dv = b.value - a.value;
                let dg = [b.grad[0] - a.grad[0], b.grad[1] - a.grad[1]];
                let dh = [b.hess[0] - a.hess[0], b.hess[1] - a.hess[1], b.hess[2] - a.hess[2]];
                acc[0] = acc[0] + wd * dv * dv;
                acc[1] = acc[1] + wd * (dg[0] * dg[0] + dg[1] * dg[1]);
                acc[2] = acc[2] + wd * (dh[0] * dh[0] + two * dh[1] * dh[1] + dh[2] * dh[2]);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_element.into_iter().fold([T::zero(); 3], |s, a| [s[0] + a[0], s[1] + a[1], s[2] + a[2]]))
}

/// `L2` norm (order 0) or `H1` / `H2` seminorm (order 1, 2) of `f - s`.
pub fn error_sobolev<T: Real, F: C2Function<T> + ?Sized>(
    s: &SplineFunction<T>,
    f: &F,
    mesh: &MixedMesh<T>,
    order: usize,
) -> Result<T> {
    if order > 2 {
        return Err(Error::DimensionMismatch(format!("Sobolev order {order} is not supported")));
    }
    Ok(sobolev_squares(s, f, mesh)?[order].sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Interpolation,
    L2Fit,
    Biharmonic,
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "interpolation" | "interpolate" => Ok(Self::Interpolation),
            "l2fit" | "l2" => Ok(Self::L2Fit),
            "biharmonic" => Ok(Self::Biharmonic),
            _ => Err(format!("unknown experiment {s:?} (expected interpolation, l2fit or biharmonic)")),
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Interpolation => "interpolation",
            Self::L2Fit => "l2fit",
            Self::Biharmonic => "biharmonic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Norm {
    Linf,
    L2,
    H1,
    H2,
}

impl Norm {
    pub const ALL: [Norm; 4] = [Norm::Linf, Norm::L2, Norm::H1, Norm::H2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["linf", "l2", "h1", "h2"][self.index()]
    }
}

/// Parses a comma separated list such as `linf,l2`.
pub fn parse_norms(s: &str) -> std::result::Result<Vec<Norm>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let n = match part {
            "linf" | "inf" => Norm::Linf,
            "l2" => Norm::L2,
            "h1" => Norm::H1,
            "h2" => Norm::H2,
            "all" => {
                out.extend(Norm::ALL);
                continue;
            }
            _ => return Err(format!("unknown norm {part:?} (expected linf, l2, h1, h2 or all)")),
        };
        out.push(n);
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("no norms selected".into());
    }
    Ok(out)
}

/// A parsed `--norms` list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormList(pub Vec<Norm>);

impl FromStr for NormList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_norms(s).map(NormList)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub experiment: Experiment,
    pub degree: usize,
    /// Number of meshes: the input mesh and `levels - 1` refinements.
    pub levels: usize,
    pub function: FunctionId,
    pub norms: Vec<Norm>,
}

impl StudyConfig {
    pub fn new(experiment: Experiment, degree: usize, levels: usize, function: FunctionId) -> Self {
        Self { experiment, degree, levels, function, norms: Norm::ALL.to_vec() }
    }
}

/// One refinement level of a study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    /// Absolute errors indexed by [`Norm::index`].
    pub errors: [Option<f64>; 4],
    /// Norms of the exact function over the mesh, for relative errors.
    pub reference: [Option<f64>; 4],
    pub gammas: [Option<f64>; 4],
}

impl LevelResult {
    pub fn relative(&self, n: Norm) -> Option<f64> {
        let (e, r) = (self.errors[n.index()]?, self.reference[n.index()]?);
        (r > 0.0).then(|| e / r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub experiment: Experiment,
    pub degree: usize,
    pub levels: Vec<LevelResult>,
}

/// Decay exponent between consecutive levels, or `None` when either error is
/// at the floating point floor.
pub fn decay_exponent(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > RATE_FLOOR && fine > RATE_FLOOR).then(|| (coarse / fine).log2())
}

pub const CSV_HEADER: &str = "level,h,ndof,err_linf,err_l2,err_h1,err_h2,gamma_linf,gamma_l2,gamma_h1,gamma_h2";

fn field(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

impl ErrorReport {
    pub fn last(&self) -> Option<&LevelResult> {
        self.levels.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.levels {
            let cols: Vec<String> = r.errors.iter().chain(&r.gammas).map(|&x| field(x)).collect();
            let _ = writeln!(out, "{},{:e},{},{}", r.level, r.h, r.ndof, cols.join(","));
        }
        out
    }

    /// Reads back the table written by [`ErrorReport::to_csv`].
    pub fn parse_csv(text: &str) -> Result<Vec<LevelResult>> {
        let bad = |msg: String| Error::DimensionMismatch(format!("bad CSV: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(bad("unexpected header".into()));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(format!("not a number: {s:?}")))
            }
        };
        lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let c: Vec<&str> = line.split(',').collect();
                if c.len() != 11 {
                    return Err(bad(format!("{} columns", c.len())));
                }
                let mut errors = [None; 4];
                let mut gammas = [None; 4];
                for k in 0..4 {
                    errors[k] = opt(c[3 + k])?;
                    gammas[k] = opt(c[7 + k])?;
                }
                Ok(LevelResult {
                    level: c[0].parse().map_err(|_| bad(format!("level {:?}", c[0])))?,
                    h: c[1].parse().map_err(|_| bad(format!("h {:?}", c[1])))?,
                    ndof: c[2].parse().map_err(|_| bad(format!("ndof {:?}", c[2])))?,
                    errors,
                    reference: [None; 4],
                    gammas,
                })
            })
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} study, degree {}\n", self.experiment, self.degree);
        let _ = writeln!(out, "{:>5} {:>10} {:>8}  {:>22} {:>22} {:>22} {:>22}", "level", "h", "ndof", "linf", "l2", "h1", "h2");
        for r in &self.levels {
            let cells: Vec<String> = (0..4)
                .map(|k| match (r.errors[k], r.gammas[k]) {
                    (Some(e), Some(g)) => format!("{e:.4e} ({g:5.2})"),
                    (Some(e), None) => format!("{e:.4e}"),
                    _ => "-".into(),
                })
                .collect();
            let _ = writeln!(out, "{:>5} {:>10.4e} {:>8}  {:>22} {:>22} {:>22} {:>22}", r.level, r.h, r.ndof, cells[0], cells[1], cells[2], cells[3]);
        }
        out
    }
}

/// Acceptable band for the final decay exponent of a norm.
pub fn rate_band(experiment: Experiment, p: usize, norm: Norm) -> Option<(f64, f64)> {
    let p = p as f64;
    match experiment {
        Experiment::Interpolation => (norm == Norm::Linf).then_some((p + 0.7, p + 1.3)),
        Experiment::L2Fit => matches!(norm, Norm::Linf | Norm::L2).then_some((p + 1.0 - 0.35, p + 1.0 + 0.35)),
        Experiment::Biharmonic => match norm {
            Norm::L2 => Some((p + 1.0 - 0.35, p + 1.0 + 0.35)),
            Norm::H1 => Some((p - 0.35, p + 0.35)),
            Norm::H2 => Some((p - 1.0 - 0.35, p - 1.0 + 0.35)),
            Norm::Linf => None,
        },
    }
}

/// Messages for every final-level rate outside its band. A norm whose
/// errors all sit at the floating point floor passes.
pub fn check_rates(report: &ErrorReport) -> Vec<String> {
    let Some(last) = report.last() else { return vec!["empty report".into()] };
    let mut failures = Vec::new();
    for n in Norm::ALL {
        let Some((lo, hi)) = rate_band(report.experiment, report.degree, n) else { continue };
        let Some(err) = last.errors[n.index()] else { continue };
        match last.gammas[n.index()] {
            Some(g) if g >= lo && g <= hi => {}
            Some(g) => failures.push(format!("{} rate {g:.3} outside [{lo:.2}, {hi:.2}]", n.name())),
            None if err <= RATE_FLOOR => {}
            None => failures.push(format!("{} rate unavailable", n.name())),
        }
    }
    failures
}

/// The discrete approximation of `f` for one experiment.
pub fn approximate<T: Real, F: Biharmonic<T> + ?Sized>(experiment: Experiment, f: &F, space: &SplineSpace<T>) -> Result<SplineFunction<T>> {
    Ok(match experiment {
        Experiment::Interpolation => space.interpolate(f),
        Experiment::L2Fit => l2_fit(f, space)?.spline,
        Experiment::Biharmonic => solve_biharmonic(f, space)?.spline,
    })
}

/// Runs one experiment on `mesh` and its successive refinements.
pub fn convergence_study<T: Real>(mesh: &MixedMesh<T>, config: &StudyConfig) -> Result<ErrorReport> {
    if config.levels == 0 {
        return Err(Error::DimensionMismatch("a study needs at least one level".into()));
    }
    let f = make::<T>(config.function);
    let mut levels: Vec<LevelResult> = Vec::with_capacity(config.levels);
    let mut current = mesh.clone();
    for level in 0..config.levels {
        if level > 0 {
            current = current.refine()?;
        }
        let space = SplineSpace::new(&current, config.degree)?;
        let s = approximate(config.experiment, &f, &space)?;
        let mut errors = [None; 4];
        let mut reference = [None; 4];
        if config.norms.contains(&Norm::Linf) {
            errors[0] = Some(to_f64(error_linf(&s, &f, &current)));
            reference[0] = Some(to_f64(error_linf(&SplineFunction::zero(&current, config.degree), &f, &current)));
        }
        if config.norms.iter().any(|&n| n != Norm::Linf) {
            let sq = sobolev_squares(&s, &f, &current)?;
            let rq = sobolev_squares(&SplineFunction::zero(&current, config.degree), &f, &current)?;
            for n in [Norm::L2, Norm::H1, Norm::H2] {
                if config.norms.contains(&n) {
                    errors[n.index()] = Some(to_f64(sq[n.index() - 1].sqrt()));
                    reference[n.index()] = Some(to_f64(rq[n.index() - 1].sqrt()));
                }
            }
        }
        let mut gammas = [None; 4];
        if let Some(prev) = levels.last() {
            for k in 0..4 {
                if let (Some(a), Some(b)) = (prev.errors[k], errors[k]) {
                    gammas[k] = decay_exponent(a, b);
                }
            }
        }
        let row = LevelResult { level, h: to_f64(current.longest_edge()), ndof: space.dim(), errors, reference, gammas };
        info!("{} p={} level {level}: ndof {} errors {:?}", config.experiment, config.degree, row.ndof, row.errors);
        levels.push(row);
    }
    Ok(ErrorReport { experiment: config.experiment, degree: config.degree, levels })
}
