//! Command line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    approximate, check_rates, convergence_study, error_linf, sobolev_squares, NormList, Experiment, Norm, StudyConfig,
};
use crate::bernstein::Patch;
use crate::error::Error;
use crate::functions::{make, FunctionId};
use crate::geometry::canonical_interface;
use crate::mesh::{desk_mesh, ElementKind, MixedMesh};
use crate::space::{dimension_terms, SplineFunction, SplineSpace};

pub const THREADS_ENV: &str = "C1MIXED_THREADS";

/// Exit code when `--assert-rates` finds a rate outside its band.
pub const EXIT_RATES: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "c1mixed", version, about = "C1 spline spaces on mixed triangle/quadrilateral meshes")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the dimension of the spline space and its four terms.
    Dim(MeshDegree),
    /// Check a mesh and report its interfaces.
    Validate(MeshOnly),
    /// Refine a mesh uniformly.
    Refine(RefineArgs),
    /// Interpolate a test function and report its errors.
    Interpolate(SolveArgs),
    /// Least-squares fit of a test function.
    L2fit(SolveArgs),
    /// Solve the biharmonic problem with a manufactured solution.
    Biharmonic(SolveArgs),
    /// Convergence study over refinement levels.
    Study(StudyArgs),
    /// Write the interpolant of a test function as JSON.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct MeshOnly {
    /// Mesh JSON file, or one of the shipped names desk1, desk2, desk3.
    #[arg(long)]
    pub mesh: PathBuf,
}

#[derive(Args, Debug)]
pub struct MeshDegree {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Test function: paper, polyN, linear or quadratic.
    #[arg(long = "fn", default_value = "paper")]
    pub function: FunctionId,
    /// Refinements applied to the mesh first.
    #[arg(long, default_value_t = 0)]
    pub levels: usize,
    #[arg(long, default_value = "all")]
    pub norms: NormList,
    /// Write the resulting spline as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[arg(long, default_value = "interpolation")]
    pub exp: Experiment,
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Number of meshes, starting with the input mesh.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long = "fn", default_value = "paper")]
    pub function: FunctionId,
    #[arg(long, default_value = "all")]
    pub norms: NormList,
    /// CSV output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 if a final rate falls outside its expected band.
    #[arg(long)]
    pub assert_rates: bool,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long = "fn", default_value = "paper")]
    pub function: FunctionId,
    #[arg(long)]
    pub out: PathBuf,
}

/// Loads a mesh from a file, falling back to the shipped meshes by name when
/// no such file exists.
pub fn read_mesh(path: &Path) -> anyhow::Result<MixedMesh<f64>> {
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return crate::mesh::load_mesh(&text).with_context(|| format!("loading {}", path.display()));
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if path.components().count() == 1 {
        if let Some(mesh) = desk_mesh(name) {
            return Ok(mesh?);
        }
    }
    bail!("mesh file {} not found", path.display())
}

/// Hex SHA-256 of the canonical JSON form of a mesh.
pub fn mesh_hash(mesh: &MixedMesh<f64>) -> String {
    Sha256::digest(mesh.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportedPatch {
    pub kind: String,
    pub ordinates: Vec<f64>,
}

/// Spline file: ordinates of every element in storage order (row `i` of a
/// quad holds `b_{i,0..p}`; a triangle stores `b_{i,j}` for `i = 0..p`, then
/// `j = 0..p-i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportedSpline {
    pub degree: usize,
    pub mesh_sha256: String,
    pub patches: Vec<ExportedPatch>,
}

pub fn export_spline(spline: &SplineFunction<f64>, mesh: &MixedMesh<f64>) -> ExportedSpline {
    ExportedSpline {
        degree: spline.degree,
        mesh_sha256: mesh_hash(mesh),
        patches: spline
            .patches
            .iter()
            .map(|p| ExportedPatch {
                kind: match p.kind {
                    ElementKind::Triangle => "triangle".into(),
                    ElementKind::Quad => "quad".into(),
                },
                ordinates: p.ordinates.clone(),
            })
            .collect(),
    }
}

pub fn import_spline(file: &ExportedSpline, mesh: &MixedMesh<f64>) -> crate::Result<SplineFunction<f64>> {
    let hash = mesh_hash(mesh);
    if file.mesh_sha256 != hash {
        return Err(Error::MeshMismatch(format!("spline was written for mesh {}, not {hash}", file.mesh_sha256)));
    }
    if file.patches.len() != mesh.num_elements() {
        return Err(Error::MeshMismatch(format!("{} patches for {} elements", file.patches.len(), mesh.num_elements())));
    }
    let patches = file
        .patches
        .iter()
        .zip(mesh.elements())
        .map(|(p, el)| {
            let kind = match p.kind.as_str() {
                "triangle" => ElementKind::Triangle,
                "quad" => ElementKind::Quad,
                other => return Err(Error::MalformedMesh(format!("unknown patch kind {other:?}"))),
            };
            if kind != el.kind {
                return Err(Error::MeshMismatch("patch kind differs from element kind".into()));
            }
            Patch::new(kind, file.degree, p.ordinates.clone())
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(SplineFunction::new(file.degree, patches))
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_dim(args: &MeshDegree) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?;
    let d = dimension_terms(&mesh, args.p)?;
    println!("vertices  {:>8}  (6 x {})", d.vertex, mesh.num_vertices());
    println!("edges     {:>8}  ({} x {})", d.edge, 2 * args.p - 9, mesh.num_edges());
    println!("quads     {:>8}  ({} x {})", d.quad, (args.p - 3) * (args.p - 3), mesh.num_quads());
    println!("triangles {:>8}  ({} x {})", d.triangle, (args.p - 4) * (args.p - 5) / 2, mesh.num_triangles());
    println!("total     {:>8}", d.total());
    Ok(())
}

fn cmd_validate(args: &MeshOnly) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?;
    let mut cases = std::collections::BTreeMap::new();
    for g in 0..mesh.num_edges() {
        if !mesh.edge(g).boundary {
            *cases.entry(format!("{:?}", canonical_interface(&mesh, g)?.case)).or_insert(0usize) += 1;
        }
    }
    println!(
        "{} vertices, {} edges, {} triangles, {} quads",
        mesh.num_vertices(),
        mesh.num_edges(),
        mesh.num_triangles(),
        mesh.num_quads()
    );
    for (case, n) in cases {
        println!("{case}: {n} interfaces");
    }
    println!("shape regularity {:.4}", mesh.shape_regularity()?);
    println!("area {:.6}", mesh.area());
    Ok(())
}

fn cmd_refine(args: &RefineArgs) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?.refined(args.levels)?;
    write_output(args.out.as_deref(), &(mesh.to_json() + "\n"))
}

fn cmd_solve(experiment: Experiment, args: &SolveArgs) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?.refined(args.levels)?;
    let f = make::<f64>(args.function);
    let space = SplineSpace::new(&mesh, args.p)?;
    let s = approximate(experiment, &f, &space)?;
    println!("{experiment}: p={} ndof={} elements={}", args.p, space.dim(), mesh.num_elements());
    if args.norms.0.contains(&Norm::Linf) {
        println!("err_linf {:e}", error_linf(&s, &f, &mesh));
    }
    let sq = sobolev_squares(&s, &f, &mesh)?;
    for n in [Norm::L2, Norm::H1, Norm::H2] {
        if args.norms.0.contains(&n) {
            println!("err_{} {:e}", n.name(), sq[n.index() - 1].sqrt());
        }
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string(&export_spline(&s, &mesh))?;
        std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn cmd_study(args: &StudyArgs) -> anyhow::Result<i32> {
    let mesh = read_mesh(&args.mesh)?;
    let mut config = StudyConfig::new(args.exp, args.p, args.levels, args.function);
    config.norms = args.norms.0.clone();
    let report = convergence_study(&mesh, &config)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", report.summary());
        }
        None => {
            print!("{csv}");
            eprint!("{}", report.summary());
        }
    }
    if args.assert_rates {
        let failures = check_rates(&report);
        if !failures.is_empty() {
            for f in &failures {
                eprintln!("rate check failed: {f}");
            }
            return Ok(EXIT_RATES);
        }
        eprintln!("rate check passed");
    }
    Ok(0)
}

fn cmd_export(args: &ExportArgs) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?;
    let space = SplineSpace::new(&mesh, args.p)?;
    let s = space.interpolate(&make::<f64>(args.function));
    let json = serde_json::to_string(&export_spline(&s, &mesh))?;
    std::fs::write(&args.out, json).with_context(|| format!("writing {}", args.out.display()))
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Dim(a) => cmd_dim(a)?,
        Command::Validate(a) => cmd_validate(a)?,
        Command::Refine(a) => cmd_refine(a)?,
        Command::Interpolate(a) => cmd_solve(Experiment::Interpolation, a)?,
        Command::L2fit(a) => cmd_solve(Experiment::L2Fit, a)?,
        Command::Biharmonic(a) => cmd_solve(Experiment::Biharmonic, a)?,
        Command::Study(a) => return cmd_study(a),
        Command::Export(a) => cmd_export(a)?,
    }
    Ok(0)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
