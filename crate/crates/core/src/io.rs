//! Interchange formats: complexes, vertex maps, tower manifests, stage maps
//! and lift problems, plus content digests for golden tests.
//!
//! Complexes are serialised by maximal faces only; downward closure is
//! recomputed on load. Digests are taken over a canonical text form, so they
//! are independent of JSON formatting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complex::{ComplexError, ComplexRef, SimplicialComplex, VertexId};
use crate::maps::{MapMode, VertexMap};
use crate::noebeling::{noebeling_step, NoebelingError, NoebelingStep};
use crate::stagemap::StageMap;
use crate::tower::Tower;

#[derive(Error, Debug)]
pub enum IoError {
    #[error("malformed file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid vertex name `{0}`: allowed are letters, digits, `_` and `-`")]
    BadVertexName(String),
    #[error("declared dim {declared} does not match computed dim {computed}")]
    DimMismatch { declared: usize, computed: usize },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("digest mismatch for {name}: manifest {expected}, file {found}")]
    DigestMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Construction(#[from] NoebelingError),
    #[error("bad map mode `{0}`")]
    BadMode(String),
}

/// On-disk complex: vertex names and maximal faces.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ComplexFile {
    pub vertices: Vec<String>,
    pub simplices: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

fn name_ok(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn complex_from_file(file: &ComplexFile) -> Result<ComplexRef, IoError> {
    for v in &file.vertices {
        if !name_ok(v) {
            return Err(IoError::BadVertexName(v.clone()));
        }
    }
    let complex = SimplicialComplex::from_generators(&file.vertices, &file.simplices)?;
    if let (Some(declared), Some(computed)) = (file.dim, complex.dim()) {
        if declared != computed {
            return Err(IoError::DimMismatch { declared, computed });
        }
    }
    Ok(complex)
}

pub fn complex_to_file(complex: &SimplicialComplex) -> ComplexFile {
    let mut vertices: Vec<String> = complex
        .vertex_ids()
        .map(|v| complex.label(v).to_string())
        .collect();
    vertices.sort();
    let mut simplices: Vec<Vec<String>> = complex
        .maximal_faces()
        .into_iter()
        .map(|s| {
            let mut names: Vec<String> = s
                .vertices()
                .iter()
                .map(|v| complex.label(*v).to_string())
                .collect();
            names.sort();
            names
        })
        .collect();
    simplices.sort();
    ComplexFile {
        vertices,
        simplices,
        dim: complex.dim(),
    }
}

pub fn read_complex(text: &str) -> Result<ComplexRef, IoError> {
    let file: ComplexFile = serde_json::from_str(text)?;
    complex_from_file(&file)
}

pub fn write_complex(complex: &SimplicialComplex) -> String {
    serde_json::to_string_pretty(&complex_to_file(complex)).expect("serialisable")
}

/// Hex digest of the canonical text form of a complex.
pub fn complex_digest(complex: &SimplicialComplex) -> String {
    let mut hasher = Sha256::new();
    hasher.update(complex.canonical_text().as_bytes());
    format!("{:x}", hasher.finalize())
}

/// On-disk vertex map between two referenced complexes.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct VertexMapFile {
    pub domain: String,
    pub codomain: String,
    pub assignment: BTreeMap<String, String>,
    pub mode: String,
}

pub fn map_mode(file: &VertexMapFile) -> Result<MapMode, IoError> {
    match file.mode.as_str() {
        "simplicial" => Ok(MapMode::Simplicial),
        "quasi" => Ok(MapMode::QuasiSimplicial),
        other => Err(IoError::BadMode(other.to_string())),
    }
}

pub fn vertex_map_from_file(
    file: &VertexMapFile,
    domain: &ComplexRef,
    codomain: &ComplexRef,
) -> Result<VertexMap, IoError> {
    let mut assignment = Vec::with_capacity(domain.vertex_count());
    for v in domain.vertex_ids() {
        let name = domain.label(v);
        let target = file
            .assignment
            .get(name)
            .ok_or_else(|| IoError::UnknownVertex(name.to_string()))?;
        let w = codomain
            .vertex_id(target)
            .ok_or_else(|| IoError::UnknownVertex(target.clone()))?;
        assignment.push(w);
    }
    Ok(VertexMap::new(domain.clone(), codomain.clone(), assignment))
}

pub fn vertex_map_to_file(map: &VertexMap, domain_ref: &str, codomain_ref: &str) -> VertexMapFile {
    let assignment = map
        .domain()
        .vertex_ids()
        .map(|v| {
            (
                map.domain().label(v).to_string(),
                map.codomain().label(map.apply(v)).to_string(),
            )
        })
        .collect();
    VertexMapFile {
        domain: domain_ref.to_string(),
        codomain: codomain_ref.to_string(),
        assignment,
        mode: "simplicial".to_string(),
    }
}

/// Per-stage record of a tower manifest.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct StageRecord {
    pub file: String,
    pub vertices: usize,
    pub simplices: usize,
    pub by_dim: Vec<usize>,
    pub digest: String,
}

/// The tower manifest: seed reference, parameters, per-stage counts and
/// digests.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TowerManifest {
    pub seed: String,
    pub n: usize,
    pub kappa: u32,
    pub depth: usize,
    pub rng_seed: u64,
    pub stages: Vec<StageRecord>,
}

pub fn manifest_for_tower(tower: &Tower, seed_ref: &str, rng_seed: u64) -> TowerManifest {
    let stages = tower
        .stages()
        .iter()
        .enumerate()
        .map(|(i, k)| StageRecord {
            file: format!("stage_{i}.json"),
            vertices: k.vertex_count(),
            simplices: k.simplex_count(),
            by_dim: k.census(),
            digest: complex_digest(k),
        })
        .collect();
    TowerManifest {
        seed: seed_ref.to_string(),
        n: tower.n(),
        kappa: tower.kappa(),
        depth: tower.depth(),
        rng_seed,
        stages,
    }
}

/// Serialised stage map: assignment from domain labels (at a subdivision
/// level of the test space) to stage vertex labels.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct StageMapFile {
    pub space: String,
    pub level: usize,
    pub stage: usize,
    pub assignment: BTreeMap<String, String>,
}

pub fn stage_map_to_file(map: &StageMap, space_ref: &str) -> StageMapFile {
    let assignment = map
        .map
        .domain()
        .vertex_ids()
        .map(|v| {
            (
                map.map.domain().label(v).to_string(),
                map.map.codomain().label(map.map.apply(v)).to_string(),
            )
        })
        .collect();
    StageMapFile {
        space: space_ref.to_string(),
        level: map.level,
        stage: map.stage,
        assignment,
    }
}

/// A lift problem in file form: inline complexes by id, the step parameters,
/// and the commuting-square assignment tables.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct LiftProblemFile {
    pub complexes: BTreeMap<String, ComplexFile>,
    /// seed id plus parameters of the step to lift through
    pub step_seed: String,
    pub n: usize,
    pub kappa: u32,
    /// id of the domain complex `A`
    pub a: String,
    /// vertices of the subcomplex `B`
    pub b_vertices: Vec<String>,
    /// prescribed values on `B`: vertex of `A` -> result vertex label
    pub g: BTreeMap<String, String>,
    /// quasi-simplicial leg: vertex of `A` -> barycentre label of the
    /// subdivided seed
    pub big_g: BTreeMap<String, String>,
}

/// Materialised lift problem: the built step plus resolved tables.
pub struct LoadedLiftProblem {
    pub step: NoebelingStep,
    pub a: ComplexRef,
    pub b_vertices: std::collections::BTreeSet<VertexId>,
    pub g: BTreeMap<VertexId, VertexId>,
    pub big_g: VertexMap,
}

pub fn load_lift_problem(file: &LiftProblemFile, budget: u128) -> Result<LoadedLiftProblem, IoError> {
    let seed_file = file
        .complexes
        .get(&file.step_seed)
        .ok_or_else(|| IoError::UnknownReference(file.step_seed.clone()))?;
    let seed = complex_from_file(seed_file)?;
    let step = noebeling_step(&seed, file.n, file.kappa, budget)?;
    let a_file = file
        .complexes
        .get(&file.a)
        .ok_or_else(|| IoError::UnknownReference(file.a.clone()))?;
    let a = complex_from_file(a_file)?;

    let mut b_vertices = std::collections::BTreeSet::new();
    for name in &file.b_vertices {
        let v = a
            .vertex_id(name)
            .ok_or_else(|| IoError::UnknownVertex(name.clone()))?;
        b_vertices.insert(v);
    }
    let mut g = BTreeMap::new();
    for (name, target) in &file.g {
        let v = a
            .vertex_id(name)
            .ok_or_else(|| IoError::UnknownVertex(name.clone()))?;
        let w = step
            .result()
            .vertex_id(target)
            .ok_or_else(|| IoError::UnknownVertex(target.clone()))?;
        g.insert(v, w);
    }
    let beta = step.subdivision().complex().clone();
    let mut assignment = Vec::with_capacity(a.vertex_count());
    for v in a.vertex_ids() {
        let name = a.label(v);
        let target = file
            .big_g
            .get(name)
            .ok_or_else(|| IoError::UnknownVertex(name.to_string()))?;
        let w = beta
            .vertex_id(target)
            .ok_or_else(|| IoError::UnknownVertex(target.clone()))?;
        assignment.push(w);
    }
    let big_g = VertexMap::new(a.clone(), beta, assignment);
    Ok(LoadedLiftProblem {
        step,
        a,
        b_vertices,
        g,
        big_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{solve_lift, LiftProblem};

    fn edge_file() -> ComplexFile {
        ComplexFile {
            vertices: vec!["a".into(), "b".into()],
            simplices: vec![vec!["a".into(), "b".into()]],
            dim: None,
        }
    }

    #[test]
    fn round_trip_is_identical() {
        let k = complex_from_file(&edge_file()).unwrap();
        let text = write_complex(&k);
        let back = read_complex(&text).unwrap();
        assert!(back.same_complex(&k));
        assert_eq!(complex_digest(&back), complex_digest(&k));
    }

    #[test]
    fn rejects_reserved_characters() {
        let file = ComplexFile {
            vertices: vec!["a.b".into()],
            simplices: vec![],
            dim: None,
        };
        assert!(matches!(
            complex_from_file(&file),
            Err(IoError::BadVertexName(_))
        ));
    }

    #[test]
    fn dim_validated_when_present() {
        let file = ComplexFile {
            vertices: vec!["a".into(), "b".into()],
            simplices: vec![vec!["a".into(), "b".into()]],
            dim: Some(2),
        };
        assert!(matches!(
            complex_from_file(&file),
            Err(IoError::DimMismatch {
                declared: 2,
                computed: 1
            })
        ));
    }

    #[test]
    fn vertex_map_file_round_trip() {
        let k = complex_from_file(&edge_file()).unwrap();
        let id = VertexMap::identity(&k);
        let file = vertex_map_to_file(&id, "k", "k");
        let back = vertex_map_from_file(&file, &k, &k).unwrap();
        for v in k.vertex_ids() {
            assert_eq!(back.apply(v), v);
        }
    }

    #[test]
    fn lift_problem_file_loads_and_solves() {
        let mut complexes = BTreeMap::new();
        complexes.insert("edge".to_string(), edge_file());
        complexes.insert(
            "three_points".to_string(),
            ComplexFile {
                vertices: vec!["p0".into(), "p1".into(), "p2".into()],
                simplices: vec![],
                dim: None,
            },
        );
        let big_g: BTreeMap<String, String> = [
            ("p0".to_string(), "{a}".to_string()),
            ("p1".to_string(), "{a}".to_string()),
            ("p2".to_string(), "{a}".to_string()),
        ]
        .into();
        let file = LiftProblemFile {
            complexes,
            step_seed: "edge".to_string(),
            n: 1,
            kappa: 3,
            a: "three_points".to_string(),
            b_vertices: vec![],
            g: BTreeMap::new(),
            big_g,
        };
        let text = serde_json::to_string(&file).unwrap();
        let parsed: LiftProblemFile = serde_json::from_str(&text).unwrap();
        let loaded = load_lift_problem(&parsed, 1_000_000).unwrap();
        let prob = LiftProblem {
            step: &loaded.step,
            a: loaded.a.clone(),
            b_vertices: loaded.b_vertices.clone(),
            g: loaded.g.clone(),
            big_g: loaded.big_g.clone(),
        };
        let lift = solve_lift(&prob).unwrap();
        assert!(lift.is_injective());
    }
}
