//! The `resinv` command line: mesh handling, forward solves, inversions and
//! gradient checks over a benchmark spec file.
//!
//! Every file written starts with a metadata line
//! `# resinv <version> spec=<digest> scalar=<kind>`, in whatever comment
//! syntax the format allows.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::elasticity::{assemble_neumann_load, BoundaryField, ElasticityError};
use crate::inverse::{
    build_aggregation, check_gradient, invert_normal, invert_variational, random_wall_vector, Inversion, InversionConfig,
    InverseError, Method,
};
use crate::mesh::msh::{import_msh, write_msh, MshError, TagDictionary};
use crate::mesh::native::{read_native, write_native};
use crate::mesh::vtk::write_vtk;
use crate::mesh::{validate, BoundaryTag, Mesh, MeshError, Point};
use crate::partition::{BlockOperators, PartitionError};
use crate::scalar::{vecops, Scalar, ScalarKind};
use crate::solvers::Termination;
use crate::synthetic::{block_field, wall_vector, Benchmark, BenchmarkSpec, SyntheticError};
use crate::xprec::DoubleDouble;
use crate::VERSION;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    MeshFile { path: PathBuf, source: MshError },
    #[error("{path}: {source}")]
    SpecFile { path: PathBuf, source: SyntheticError },
    #[error("mesh is invalid ({0} violations)")]
    InvalidMesh(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Elasticity(#[from] ElasticityError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
    #[error("{scalar} solve ended in {termination}; partial outputs were written")]
    SolverBreakdown { scalar: ScalarKind, termination: Termination },
    #[error("gradient check failed: max relative error {max:e} exceeds threshold {threshold:e}")]
    GradientCheck { max: f64, threshold: f64 },
}

impl CliError {
    /// Process exit status: 1 usage, 2 data or validation, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Inverse(InverseError::Config(_)) => 1,
            CliError::Inverse(InverseError::Solver(_)) => 3,
            CliError::Partition(PartitionError::Solver(_)) => 3,
            CliError::Synthetic(SyntheticError::Partition(PartitionError::Solver(_))) => 3,
            CliError::SolverBreakdown { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "resinv", version, about = "Recover cavity-wall traction from surface displacement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate, import, validate or export meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Surface displacement for a given wall traction.
    Forward(ForwardArgs),
    /// Reconstruct the wall traction from surface displacement.
    Invert(InvertArgs),
    /// Finite-difference check of the cost gradient.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Build the box-with-cavity mesh described by a spec file.
    Generate {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Native mesh output.
        #[arg(long, default_value = "mesh.txt")]
        out: PathBuf,
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Convert a Gmsh MSH 2.2 file to the native format.
    Import {
        msh: PathBuf,
        #[arg(long, default_value = "mesh.txt")]
        out: PathBuf,
        /// Physical-group mapping such as `1=ClampedBase,4=ReservoirWall`.
        #[arg(long)]
        tags: Option<String>,
    },
    /// Print every violated mesh invariant.
    Validate { mesh: PathBuf },
    /// Write a mesh as VTK and/or MSH.
    Export {
        mesh: PathBuf,
        #[arg(long)]
        vtk: Option<PathBuf>,
        #[arg(long)]
        msh: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Benchmark spec file; the built-in standard benchmark when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Use this mesh (native or `.msh`) instead of generating one.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Wall traction CSV; the spec's Gaussian truth when omitted.
    #[arg(long)]
    pub traction: Option<PathBuf>,
    #[arg(long, default_value = "extended")]
    pub precision: ScalarKind,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Observed surface displacement CSV; synthetic data from the spec when
    /// omitted.
    #[arg(long)]
    pub observation: Option<PathBuf>,
    /// One or more of double, extended (comma separated for paired runs).
    #[arg(long, value_delimiter = ',', default_value = "extended")]
    pub precision: Vec<ScalarKind>,
    #[arg(long, default_value = "variational")]
    pub method: Method,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
    /// Stop once the relative residual reaches this value.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Aggregate wall nodes into at most K clusters.
    #[arg(long, value_name = "K")]
    pub aggregate: Option<usize>,
    /// Run paired precisions concurrently.
    #[arg(long)]
    pub parallel_runs: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "extended")]
    pub precision: ScalarKind,
    /// Number of random directions.
    #[arg(long, default_value_t = 4)]
    pub directions: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Finite-difference step relative to the norm of g.
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mesh(cmd) => mesh_command(cmd),
        Command::Forward(args) => forward(args),
        Command::Invert(args) => invert(args),
        Command::Gradcheck(args) => gradcheck(args),
    }
}

fn header(digest: &str, scalar: Option<ScalarKind>) -> String {
    let scalar = scalar.map_or("none", ScalarKind::name);
    format!("resinv {VERSION} spec={digest} scalar={scalar}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_spec(path: Option<&Path>) -> Result<BenchmarkSpec, CliError> {
    let Some(path) = path else { return Ok(BenchmarkSpec::standard()) };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    BenchmarkSpec::parse(&text).map_err(|source| CliError::SpecFile { path: path.to_path_buf(), source })
}

/// Reads a native mesh, or MSH 2.2 when the extension is `.msh`.
fn load_mesh(path: &Path, dict: &TagDictionary) -> Result<Mesh, CliError> {
    let r = open(path)?;
    let is_msh = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("msh"));
    let mesh = if is_msh { import_msh(r, dict) } else { read_native(r) };
    mesh.map_err(|source| CliError::MeshFile { path: path.to_path_buf(), source })
}

fn parse_tags(text: &str) -> Result<TagDictionary, CliError> {
    let mut dict = TagDictionary { surfaces: Default::default(), volume: TagDictionary::default().volume };
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (id, name) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("tag mapping `{item}` is not id=TagName")))?;
        let id: i64 = id.trim().parse().map_err(|_| CliError::Usage(format!("bad physical id `{id}`")))?;
        let tag: BoundaryTag = name.trim().parse().map_err(|e: MeshError| CliError::Usage(e.to_string()))?;
        dict.surfaces.insert(id, tag);
    }
    Ok(dict)
}

fn mesh_summary(mesh: &Mesh) -> String {
    let mut s = format!("nodes {} tets {} boundary triangles {}", mesh.nodes.len(), mesh.tets.len(), mesh.boundary.len());
    for tag in BoundaryTag::ALL {
        let n = mesh.boundary.iter().filter(|t| t.tag == tag).count();
        s.push_str(&format!(" {tag} {n}"));
    }
    s
}

fn write_native_with_header(path: &Path, mesh: &Mesh, meta: &str) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_native(mesh, &mut buf).expect("writing to memory");
    let text = String::from_utf8(buf).expect("ascii output");
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    write_file(path, |w| write!(w, "{first}\n# {meta}\n{rest}"))
}

fn write_msh_with_header(path: &Path, mesh: &Mesh, meta: &str) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_msh(mesh, &TagDictionary::default(), &mut buf).expect("writing to memory");
    let text = String::from_utf8(buf).expect("ascii output");
    let split = text.find("$EndMeshFormat\n").map_or(0, |i| i + "$EndMeshFormat\n".len());
    write_file(path, |w| write!(w, "{}$Comments\n# {meta}\n$EndComments\n{}", &text[..split], &text[split..]))
}

fn mesh_command(cmd: MeshCommand) -> Result<(), CliError> {
    match cmd {
        MeshCommand::Generate { spec, out, vtk } => {
            let spec = load_spec(spec.as_deref())?;
            let mesh = crate::mesh::generate_box_with_cavity(&spec.mesh)?;
            let meta = header(&spec.digest(), None);
            write_native_with_header(&out, &mesh, &meta)?;
            if let Some(path) = vtk {
                write_file(&path, |w| write_vtk(&mesh, &meta, &[], w))?;
            }
            println!("{}", mesh_summary(&mesh));
            Ok(())
        }
        MeshCommand::Import { msh, out, tags } => {
            let dict = tags.as_deref().map(parse_tags).transpose()?.unwrap_or_default();
            let r = open(&msh)?;
            let mesh = import_msh(r, &dict).map_err(|source| CliError::MeshFile { path: msh.clone(), source })?;
            write_native_with_header(&out, &mesh, &header("none", None))?;
            println!("{}", mesh_summary(&mesh));
            Ok(())
        }
        MeshCommand::Validate { mesh } => {
            let m = load_mesh(&mesh, &TagDictionary::default())?;
            let violations = validate(&m);
            println!("{}", mesh_summary(&m));
            for v in &violations {
                println!("violation: {v}");
            }
            if violations.is_empty() {
                println!("valid");
                Ok(())
            } else {
                Err(CliError::InvalidMesh(violations.len()))
            }
        }
        MeshCommand::Export { mesh, vtk, msh } => {
            if vtk.is_none() && msh.is_none() {
                return Err(CliError::Usage("mesh export needs --vtk and/or --msh".into()));
            }
            let m = load_mesh(&mesh, &TagDictionary::default())?;
            let meta = header("none", None);
            if let Some(path) = vtk {
                write_file(&path, |w| write_vtk(&m, &meta, &[], w))?;
            }
            if let Some(path) = msh {
                write_msh_with_header(&path, &m, &meta)?;
            }
            Ok(())
        }
    }
}

fn load_benchmark(problem: &ProblemArgs) -> Result<Benchmark, CliError> {
    let spec = load_spec(problem.spec.as_deref())?;
    match &problem.mesh {
        Some(path) => Ok(Benchmark::from_mesh(&spec, load_mesh(path, &TagDictionary::default())?)?),
        None => Ok(Benchmark::build(&spec)?),
    }
}

/// A node-major block vector spread over all mesh nodes, zero elsewhere.
fn nodal_points(mesh: &Mesh, nodes: &[usize], block: &[f64]) -> Vec<Point> {
    let mut out = vec![[0.0; 3]; mesh.num_nodes()];
    for (k, &v) in nodes.iter().enumerate() {
        out[v] = [block[3 * k], block[3 * k + 1], block[3 * k + 2]];
    }
    out
}

/// Wall load coefficients divided by the lumped surface mass, giving a
/// traction in physical units.
fn physical_traction(bench: &Benchmark, g: &[f64]) -> Vec<f64> {
    let area = bench.mesh.lumped_area(BoundaryTag::ReservoirWall);
    let nodes = &bench.partition.wall_nodes;
    g.iter().enumerate().map(|(i, &v)| v / area[nodes[i / 3]]).collect()
}

fn forward(args: ForwardArgs) -> Result<(), CliError> {
    let bench = load_benchmark(&args.problem)?;
    let g = match &args.traction {
        Some(path) => {
            let field = BoundaryField::read_csv(BoundaryTag::ReservoirWall, &bench.mesh, open(path)?)?;
            wall_vector(&bench.partition, &assemble_neumann_load(&bench.mesh, &field)?)
        }
        None => bench.g_star.clone(),
    };
    let full = match args.precision {
        ScalarKind::Double => forward_field::<f64>(&bench, &g)?,
        ScalarKind::Extended => forward_field::<DoubleDouble>(&bench, &g)?,
    };
    let meta = header(&bench.spec.digest(), Some(args.precision));
    let surface: Vec<f64> = bench.partition.surface_nodes.iter().flat_map(|&v| full[3 * v..3 * v + 3].to_vec()).collect();
    let field = block_field(&bench.partition.surface_nodes, BoundaryTag::ObservationSurface, &surface);
    write_file(&args.out_dir.join("surface_displacement.csv"), |w| field.write_csv(&bench.mesh, &meta, w))?;
    let points: Vec<Point> = full.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    write_file(&args.out_dir.join("displacement.vtk"), |w| {
        write_vtk(&bench.mesh, &meta, &[("displacement", &points)], w)
    })?;
    println!("surface nodes {} max |u| {:e}", bench.partition.surface_nodes.len(), max_abs(&surface));
    Ok(())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Displacement at every mesh node (clamped nodes zero).
fn forward_field<S: Scalar>(bench: &Benchmark, g: &[f64]) -> Result<Vec<f64>, CliError> {
    let ops = bench.operators::<S>()?;
    let u = ops.solve_wall_load(&vecops::promote::<S>(g));
    Ok(vecops::demote(&bench.dofs.extend(&u)))
}

/// The Λ₃ observation vector, from a file or synthesized in extended
/// arithmetic.
fn observation(
    bench: &Benchmark,
    path: Option<&Path>,
    ext: Option<&BlockOperators<DoubleDouble>>,
) -> Result<Vec<f64>, CliError> {
    if let Some(path) = path {
        let field = BoundaryField::read_csv(BoundaryTag::ObservationSurface, &bench.mesh, open(path)?)?;
        let mut u = Vec::with_capacity(bench.partition.n3());
        for &v in &bench.partition.surface_nodes {
            let p = field.values.get(&v).ok_or_else(|| {
                CliError::Usage(format!("{}: no value for surface node {v}", path.display()))
            })?;
            u.extend_from_slice(p);
        }
        return Ok(u);
    }
    match ext {
        Some(ops) => Ok(bench.observation(ops)?),
        None => Ok(bench.observation(&bench.operators::<DoubleDouble>()?)?),
    }
}

fn invert(args: InvertArgs) -> Result<(), CliError> {
    let mut kinds: Vec<ScalarKind> = Vec::new();
    for &k in &args.precision {
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(CliError::Usage("--precision needs at least one value".into()));
    }
    let bench = load_benchmark(&args.problem)?;
    let ext = if kinds.contains(&ScalarKind::Extended) { Some(bench.operators::<DoubleDouble>()?) } else { None };
    let dbl = if kinds.contains(&ScalarKind::Double) { Some(bench.operators::<f64>()?) } else { None };
    let synthetic = args.observation.is_none();
    let u_star = observation(&bench, args.observation.as_deref(), ext.as_ref())?;
    let agg = args.aggregate.map(|k| build_aggregation(&bench.mesh, &bench.partition, k)).transpose()?;
    let truth = synthetic.then_some(bench.g_star.as_slice());

    let config_for = |scalar: ScalarKind| {
        let mut c = InversionConfig::new(args.method, scalar, args.max_iter);
        c.tolerance = args.tol;
        c.aggregation = agg.as_ref().map(|a| a.num_clusters());
        c
    };
    let solve = |scalar: ScalarKind| -> Result<Inversion, InverseError> {
        let config = config_for(scalar);
        match (scalar, args.method) {
            (ScalarKind::Double, Method::Variational) => {
                invert_variational(dbl.as_ref().expect("double operators"), &u_star, &config, agg.as_ref(), truth)
            }
            (ScalarKind::Double, Method::NormalEquation) => {
                invert_normal(dbl.as_ref().expect("double operators"), &u_star, &config, agg.as_ref(), truth)
            }
            (ScalarKind::Extended, Method::Variational) => {
                invert_variational(ext.as_ref().expect("extended operators"), &u_star, &config, agg.as_ref(), truth)
            }
            (ScalarKind::Extended, Method::NormalEquation) => {
                invert_normal(ext.as_ref().expect("extended operators"), &u_star, &config, agg.as_ref(), truth)
            }
        }
    };
    let results: Vec<(ScalarKind, Result<Inversion, InverseError>)> = if args.parallel_runs && kinds.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = kinds.iter().map(|&k| (k, s.spawn(move || solve(k)))).collect();
            handles.into_iter().map(|(k, h)| (k, h.join().expect("inversion thread panicked"))).collect()
        })
    } else {
        kinds.iter().map(|&k| (k, solve(k))).collect()
    };

    let digest = bench.spec.digest();
    let mut failure = None;
    for (kind, result) in results {
        let inv = result?;
        write_inversion(&args, &bench, &digest, kind, &config_for(kind), &inv, truth)?;
        let last = inv.record.last().expect("record holds iteration 0");
        let err = last.traction_err.map_or(String::new(), |e| format!(" traction_err {e:e}"));
        println!(
            "{kind} {}: {} iterations, {}, residual {:e}{err}",
            args.method, inv.report.iterations, inv.report.termination, last.residual
        );
        if inv.report.termination == Termination::Breakdown && failure.is_none() {
            failure = Some(CliError::SolverBreakdown { scalar: kind, termination: inv.report.termination });
        }
    }
    failure.map_or(Ok(()), Err)
}

fn write_inversion(
    args: &InvertArgs,
    bench: &Benchmark,
    digest: &str,
    kind: ScalarKind,
    config: &InversionConfig,
    inv: &Inversion,
    truth: Option<&[f64]>,
) -> Result<(), CliError> {
    let meta = header(digest, Some(kind));
    let dir = &args.out_dir;
    let wall = &bench.partition.wall_nodes;
    write_file(&dir.join(format!("run_{kind}.txt")), |w| {
        write!(w, "# {meta}\n{}{}", config.describe(), bench.spec.to_text())
    })?;
    write_file(&dir.join(format!("convergence_{kind}.csv")), |w| {
        writeln!(w, "# {meta}")?;
        inv.record.write_csv(w)
    })?;
    let load = block_field(wall, BoundaryTag::ReservoirWall, &inv.estimate);
    write_file(&dir.join(format!("estimate_load_{kind}.csv")), |w| {
        load.write_csv(&bench.mesh, &format!("{meta} values=load_coefficients"), w)
    })?;
    let traction = physical_traction(bench, &inv.estimate);
    let field = block_field(wall, BoundaryTag::ReservoirWall, &traction);
    write_file(&dir.join(format!("estimate_traction_{kind}.csv")), |w| {
        field.write_csv(&bench.mesh, &format!("{meta} values=traction_lumped_mass"), w)
    })?;
    let estimate = nodal_points(&bench.mesh, wall, &traction);
    let mut fields: Vec<(&str, Vec<Point>)> = vec![("estimate", estimate.clone())];
    if let Some(t) = truth {
        let truth_pts = nodal_points(&bench.mesh, wall, &physical_traction(bench, t));
        let diff = estimate.iter().zip(&truth_pts).map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]]).collect();
        fields = vec![("truth", truth_pts), ("estimate", estimate), ("difference", diff)];
    }
    let refs: Vec<(&str, &[Point])> = fields.iter().map(|(n, v)| (*n, v.as_slice())).collect();
    write_file(&dir.join(format!("traction_{kind}.vtk")), |w| write_vtk(&bench.mesh, &meta, &refs, w))
}

fn gradcheck(args: GradcheckArgs) -> Result<(), CliError> {
    if args.directions == 0 {
        return Err(CliError::Usage("--directions must be at least 1".into()));
    }
    let bench = load_benchmark(&args.problem)?;
    let ext = bench.operators::<DoubleDouble>()?;
    let u_star = bench.observation(&ext)?;
    let g = random_wall_vector(bench.partition.n1(), args.seed);
    let check = match args.precision {
        ScalarKind::Double => {
            check_gradient(&bench.operators::<f64>()?, &g, &u_star, args.directions, args.step, args.seed)?
        }
        ScalarKind::Extended => check_gradient(&ext, &g, &u_star, args.directions, args.step, args.seed)?,
    };
    println!("# {}", header(&bench.spec.digest(), Some(args.precision)));
    for (k, e) in check.errors.iter().enumerate() {
        println!("direction {k} relative_error {e:e}");
    }
    let max = check.max_error();
    println!("max_relative_error {max:e}");
    if max > args.threshold || max.is_nan() {
        return Err(CliError::GradientCheck { max, threshold: args.threshold });
    }
    Ok(())
}
