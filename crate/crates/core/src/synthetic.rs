//! Synthetic benchmark: a Gaussian traction on the reservoir wall and the
//! surface displacement it produces.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::elasticity::{
    apply_clamp, assemble_neumann_load, assemble_stiffness, BoundaryField, DofMap, ElasticityError, MaterialParams,
    SparseSymmetricMatrix,
};
use crate::mesh::{generate_box_with_cavity, BoundaryTag, BoxMeshSpec, Ellipsoid, Mesh, MeshError, Point, SurfaceBump};
use crate::partition::{BlockOperators, DofPartition, PartitionError};
use crate::scalar::{vecops, Scalar};
use crate::xprec::DoubleDouble;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Elasticity(#[from] ElasticityError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("refined observation: surface node {node} has no match on the refined mesh")]
    RefinementMismatch { node: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TractionDirection {
    /// Per-node outward normal of the elastic body (pointing into the cavity).
    OutwardNormal,
    Fixed(Point),
}

impl TractionDirection {
    fn to_text(self) -> String {
        match self {
            TractionDirection::OutwardNormal => "outward-normal".into(),
            TractionDirection::Fixed(d) => format!("{:?} {:?} {:?}", d[0], d[1], d[2]),
        }
    }
}

/// Gaussian traction `amplitude · exp(-‖x - center‖² / 2 width²) · direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTraction {
    pub center: Point,
    pub width: f64,
    pub amplitude: f64,
    pub direction: TractionDirection,
}

/// Nodal truth traction on the reservoir wall.
pub fn make_truth_traction(mesh: &Mesh, traction: &GaussianTraction) -> BoundaryField {
    let normals = mesh.nodal_normals(BoundaryTag::ReservoirWall);
    let mut field = BoundaryField::new(BoundaryTag::ReservoirWall);
    let w2 = 2.0 * traction.width * traction.width;
    for v in mesh.nodes_with_tag(BoundaryTag::ReservoirWall) {
        let p = mesh.nodes[v];
        let r2: f64 = (0..3).map(|c| (p[c] - traction.center[c]).powi(2)).sum();
        let s = traction.amplitude * (-r2 / w2).exp();
        let d = match traction.direction {
            TractionDirection::OutwardNormal => normals[v],
            TractionDirection::Fixed(d) => d,
        };
        field.values.insert(v, d.map(|x| s * x));
    }
    field
}

/// `A g*` evaluated in extended precision and rounded to double, so the
/// observation carries no error beyond the final rounding.
pub fn make_observation(ops: &BlockOperators<DoubleDouble>, g_star: &[f64]) -> Vec<f64> {
    vecops::demote(&ops.apply_forward(&vecops::promote::<DoubleDouble>(g_star)))
}

/// Adds seeded Gaussian noise with standard deviation
/// `level · ‖u‖ / √n` per entry, so the perturbation's expected relative
/// norm is `level`.
pub fn add_noise(u: &[f64], level: f64, seed: u64) -> Vec<f64> {
    if level == 0.0 || u.is_empty() {
        return u.to_vec();
    }
    let sigma = level * vecops::norm_f64(u) / (u.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    u.iter()
        .map(|&x| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x + sigma * e
        })
        .collect()
}

/// Everything that determines a synthetic run: mesh, material, truth and
/// observation options.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub mesh: BoxMeshSpec,
    pub material: MaterialParams,
    pub traction: GaussianTraction,
    pub noise_level: f64,
    pub seed: u64,
    /// `1` observes on the inversion mesh; `r > 1` computes the observation
    /// on a mesh refined `r` times in every direction.
    pub observation_refinement: usize,
}

impl BenchmarkSpec {
    /// The standard desk benchmark.
    pub fn standard() -> Self {
        BenchmarkSpec {
            mesh: BoxMeshSpec {
                extents: [4.0; 3],
                divisions: [17; 3],
                cavity: Some(Ellipsoid { center: [0.0, 0.0, -0.2], semiaxes: [0.8, 0.62, 0.45] }),
                bump: Some(SurfaceBump { amplitude: 0.3, width: 1.0 }),
            },
            material: MaterialParams::new(1.0, 1.0),
            traction: GaussianTraction {
                center: [0.0, 0.0, 0.3],
                width: 0.6,
                amplitude: 1.0,
                direction: TractionDirection::OutwardNormal,
            },
            noise_level: 0.0,
            seed: 0,
            observation_refinement: 1,
        }
    }

    /// Canonical `key = value` text; parsing it gives back the same spec.
    pub fn to_text(&self) -> String {
        let v = |p: Point| format!("{:?} {:?} {:?}", p[0], p[1], p[2]);
        let m = &self.mesh;
        let mut s = String::new();
        let _ = writeln!(s, "extents = {}", v(m.extents));
        let _ = writeln!(s, "divisions = {} {} {}", m.divisions[0], m.divisions[1], m.divisions[2]);
        match m.cavity {
            Some(c) => {
                let _ = writeln!(s, "cavity_center = {}", v(c.center));
                let _ = writeln!(s, "cavity_semiaxes = {}", v(c.semiaxes));
            }
            None => s.push_str("cavity = none\n"),
        }
        match m.bump {
            Some(b) => {
                let _ = writeln!(s, "bump_amplitude = {:?}", b.amplitude);
                let _ = writeln!(s, "bump_width = {:?}", b.width);
            }
            None => s.push_str("bump = none\n"),
        }
        let _ = writeln!(s, "lambda = {:?}", self.material.lambda);
        let _ = writeln!(s, "mu = {:?}", self.material.mu);
        let t = &self.traction;
        let _ = writeln!(s, "traction_center = {}", v(t.center));
        let _ = writeln!(s, "traction_width = {:?}", t.width);
        let _ = writeln!(s, "traction_amplitude = {:?}", t.amplitude);
        let _ = writeln!(s, "traction_direction = {}", t.direction.to_text());
        let _ = writeln!(s, "noise_level = {:?}", self.noise_level);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "observation_refinement = {}", self.observation_refinement);
        s
    }

    /// Hex SHA-256 prefix of the canonical text.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Parses `key = value` lines. Keys not given keep their standard
    /// value; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SyntheticError> {
        let mut spec = BenchmarkSpec::standard();
        let mut cavity = spec.mesh.cavity.expect("standard benchmark has a cavity");
        let mut has_cavity = true;
        let mut bump = spec.mesh.bump.expect("standard benchmark has a bump");
        let mut has_bump = true;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| SyntheticError::Parse { line, message };
            let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "extents" => spec.mesh.extents = triple(value).map_err(err)?,
                "divisions" => {
                    let d: Point = triple(value).map_err(err)?;
                    if d.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
                        return Err(err(format!("divisions must be positive integers, got `{value}`")));
                    }
                    spec.mesh.divisions = d.map(|x| x as usize);
                }
                "cavity" if value == "none" => has_cavity = false,
                "cavity_center" => cavity.center = triple(value).map_err(err)?,
                "cavity_semiaxes" => {
                    cavity.semiaxes = triple(value).map_err(err)?;
                    has_cavity = true;
                }
                "bump" if value == "none" => has_bump = false,
                "bump_amplitude" => bump.amplitude = number(value).map_err(err)?,
                "bump_width" => bump.width = number(value).map_err(err)?,
                "lambda" => spec.material.lambda = number(value).map_err(err)?,
                "mu" => spec.material.mu = number(value).map_err(err)?,
                "traction_center" => spec.traction.center = triple(value).map_err(err)?,
                "traction_width" => spec.traction.width = number(value).map_err(err)?,
                "traction_amplitude" => spec.traction.amplitude = number(value).map_err(err)?,
                "traction_direction" => {
                    spec.traction.direction = if value == "outward-normal" {
                        TractionDirection::OutwardNormal
                    } else {
                        TractionDirection::Fixed(triple(value).map_err(err)?)
                    }
                }
                "noise_level" => spec.noise_level = number(value).map_err(err)?,
                "seed" => spec.seed = value.parse().map_err(|_| err(format!("bad seed `{value}`")))?,
                "observation_refinement" => {
                    spec.observation_refinement = value
                        .parse()
                        .ok()
                        .filter(|&r: &usize| r >= 1)
                        .ok_or_else(|| err(format!("bad refinement `{value}`")))?
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        spec.mesh.cavity = has_cavity.then_some(cavity);
        spec.mesh.bump = (has_bump && bump.amplitude != 0.0).then_some(bump);
        if !(spec.traction.width > 0.0) {
            return Err(SyntheticError::Parse { line: 0, message: "traction_width must be positive".into() });
        }
        if !(spec.noise_level >= 0.0) {
            return Err(SyntheticError::Parse { line: 0, message: "noise_level must be non-negative".into() });
        }
        Ok(spec)
    }
}

fn number(s: &str) -> Result<f64, String> {
    f64::from_str(s).map_err(|_| format!("expected a number, got `{s}`"))
}

fn triple(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != 3 {
        return Err(format!("expected three numbers, got `{s}`"));
    }
    Ok([number(parts[0])?, number(parts[1])?, number(parts[2])?])
}

/// A built benchmark: mesh, clamped stiffness, partition and truth.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub spec: BenchmarkSpec,
    pub mesh: Mesh,
    pub stiffness: SparseSymmetricMatrix,
    pub dofs: DofMap,
    pub partition: DofPartition,
    pub truth: BoundaryField,
    /// True wall load on Λ₁.
    pub g_star: Vec<f64>,
}

impl Benchmark {
    pub fn build(spec: &BenchmarkSpec) -> Result<Self, SyntheticError> {
        let mesh = generate_box_with_cavity(&spec.mesh)?;
        Self::from_mesh(spec, mesh)
    }

    pub fn from_mesh(spec: &BenchmarkSpec, mesh: Mesh) -> Result<Self, SyntheticError> {
        let k = assemble_stiffness(&mesh, &spec.material)?;
        let (stiffness, dofs) = apply_clamp(&k, &mesh)?;
        let partition = crate::partition::partition_dofs(&mesh, &dofs, &stiffness)?;
        let truth = make_truth_traction(&mesh, &spec.traction);
        let load = assemble_neumann_load(&mesh, &truth)?;
        let g_star = wall_vector(&partition, &load);
        Ok(Benchmark { spec: spec.clone(), mesh, stiffness, dofs, partition, truth, g_star })
    }

    pub fn operators<S: Scalar>(&self) -> Result<BlockOperators<S>, PartitionError> {
        BlockOperators::new(self.stiffness.clone(), self.partition.clone())
    }

    /// Observation on Λ₃ per the spec: noiseless inverse-crime data unless
    /// refinement or noise is requested.
    pub fn observation(&self, ext: &BlockOperators<DoubleDouble>) -> Result<Vec<f64>, SyntheticError> {
        let u = if self.spec.observation_refinement == 1 {
            make_observation(ext, &self.g_star)
        } else {
            self.refined_observation()?
        };
        Ok(add_noise(&u, self.spec.noise_level, self.spec.seed))
    }

    fn refined_observation(&self) -> Result<Vec<f64>, SyntheticError> {
        let r = self.spec.observation_refinement;
        let mut fine_spec = self.spec.clone();
        fine_spec.mesh.divisions = self.spec.mesh.divisions.map(|d| d * r);
        fine_spec.observation_refinement = 1;
        let fine = Benchmark::build(&fine_spec)?;
        let ops = fine.operators::<f64>()?;
        let u3 = ops.apply_forward(&fine.g_star);
        let key = |p: Point| p.map(|c| (c * 1e7).round() as i64);
        let lookup: HashMap<[i64; 3], usize> =
            fine.partition.surface_nodes.iter().enumerate().map(|(k, &v)| (key(fine.mesh.nodes[v]), k)).collect();
        let mut out = Vec::with_capacity(self.partition.n3());
        for &v in &self.partition.surface_nodes {
            let k = *lookup.get(&key(self.mesh.nodes[v])).ok_or(SyntheticError::RefinementMismatch { node: v })?;
            out.extend_from_slice(&u3[3 * k..3 * k + 3]);
        }
        Ok(out)
    }
}

/// Restriction of a full `3 · nodes` vector to the wall block.
pub fn wall_vector(partition: &DofPartition, full: &[f64]) -> Vec<f64> {
    partition.wall_nodes.iter().flat_map(|&v| full[3 * v..3 * v + 3].iter().copied()).collect()
}

/// Node-major block vector back to a boundary field.
pub fn block_field(nodes: &[usize], tag: BoundaryTag, values: &[f64]) -> BoundaryField {
    let mut f = BoundaryField::new(tag);
    for (k, &v) in nodes.iter().enumerate() {
        f.values.insert(v, [values[3 * k], values[3 * k + 1], values[3 * k + 2]]);
    }
    f
}
