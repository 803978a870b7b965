//! Command-line driver: builds towers, verifies their combinatorial
//! invariants, emits drawings, and runs the universality refinement loop.

mod emit;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use noebeling::complex::{ComplexRef, SimplicialComplex, VertexId};
use noebeling::covers::{mesh_hops_of, refinement_certificate_over};
use noebeling::io::{
    complex_digest, manifest_for_tower, read_complex, stage_map_to_file, vertex_map_from_file,
    write_complex, ComplexFile, TowerManifest, VertexMapFile,
};
use noebeling::maps::{MapMode, VertexMap};
use noebeling::metric::QuadExt;
use noebeling::noebeling::is_n_regular_into_subdivision;
use noebeling::refine::{embedding_certificate, universality_run};
use noebeling::stagemap::StageMap;
use noebeling::subdivision::{barycentric, Subdivision};
use noebeling::tower::build_tower;

const DEFAULT_BUDGET: u128 = 5_000_000;

#[derive(Parser)]
#[command(
    name = "noebeling",
    about = "Finite-depth towers of copy complexes over simplicial seeds, \
             with exhaustive checks of their combinatorial invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tower over a seed complex and write stages plus a manifest.
    Tower {
        /// Seed complex file (JSON: vertices + maximal faces).
        #[arg(long)]
        seed: PathBuf,
        /// Dimension bound of the construction.
        #[arg(long)]
        n: usize,
        /// Copies per barycentre.
        #[arg(long)]
        kappa: u32,
        /// Number of construction steps.
        #[arg(long)]
        depth: usize,
        /// Simplex budget per stage (overrides NOEBELING_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
        /// Output directory.
        #[arg(long, default_value = "tower")]
        out: PathBuf,
        /// Recorded in the manifest for reproducibility.
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Re-check a written tower: digests, bond structure, fiber fullness,
    /// cover refinement and mesh bounds. Nonzero exit on any failure.
    Verify {
        /// Tower manifest file.
        manifest: PathBuf,
    },
    /// Emit a drawing of one stage.
    Emit {
        /// Tower manifest file.
        manifest: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long, value_enum)]
        format: EmitFormat,
        /// Output file (defaults to `stage_<i>.<ext>` beside the manifest).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the strong-universality refinement loop for a test complex.
    Universality {
        /// Tower manifest to refine into.
        #[arg(long)]
        seed: PathBuf,
        /// Test complex file.
        #[arg(long)]
        space: PathBuf,
        /// Number of refinement stages.
        #[arg(long)]
        depth: usize,
        /// Recorded in the report for reproducibility.
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Optional starting map file (vertex map into stage 0); the default
        /// is the constant map to the least vertex.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Output directory (defaults to the manifest directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Dot,
    Svg,
}

fn budget_from(flag: Option<u128>) -> u128 {
    flag.or_else(|| {
        std::env::var("NOEBELING_BUDGET")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_BUDGET)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Tower {
            seed,
            n,
            kappa,
            depth,
            budget,
            out,
            rng_seed,
        } => cmd_tower(&seed, n, kappa, depth, budget_from(budget), &out, rng_seed),
        Command::Verify { manifest } => cmd_verify(&manifest),
        Command::Emit {
            manifest,
            stage,
            format,
            out,
        } => cmd_emit(&manifest, stage, format, out),
        Command::Universality {
            seed,
            space,
            depth,
            rng_seed,
            map,
            out,
        } => cmd_universality(&seed, &space, depth, rng_seed, map.as_deref(), out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_tower(
    seed_path: &Path,
    n: usize,
    kappa: u32,
    depth: usize,
    budget: u128,
    out: &Path,
    rng_seed: u64,
) -> Result<bool> {
    let text = fs::read_to_string(seed_path)
        .with_context(|| format!("reading seed {}", seed_path.display()))?;
    let seed = read_complex(&text)?;
    let tower = build_tower(&seed, n, kappa, depth, budget)?;

    fs::create_dir_all(out)?;
    for (i, stage) in tower.stages().iter().enumerate() {
        fs::write(out.join(format!("stage_{i}.json")), write_complex(stage))?;
    }
    let manifest = manifest_for_tower(&tower, &seed_path.display().to_string(), rng_seed);
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    for (i, record) in manifest.stages.iter().enumerate() {
        println!(
            "stage {i}: V={} simplices={} digest={}",
            record.vertices, record.simplices, record.digest
        );
    }
    println!("manifest written to {}", out.join("manifest.json").display());
    Ok(true)
}

struct LoadedTower {
    manifest: TowerManifest,
    stages: Vec<ComplexRef>,
}

fn load_tower(manifest_path: &Path) -> Result<LoadedTower> {
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let manifest: TowerManifest =
        serde_json::from_str(&fs::read_to_string(manifest_path).with_context(|| {
            format!("reading manifest {}", manifest_path.display())
        })?)?;
    let mut stages = Vec::with_capacity(manifest.stages.len());
    for record in &manifest.stages {
        let text = fs::read_to_string(dir.join(&record.file))
            .with_context(|| format!("reading stage file {}", record.file))?;
        let complex = read_stage(&text)?;
        let digest = complex_digest(&complex);
        if digest != record.digest {
            bail!(
                "digest mismatch for {}: manifest {}, file {}",
                record.file,
                record.digest,
                digest
            );
        }
        stages.push(complex);
    }
    Ok(LoadedTower { manifest, stages })
}

/// Stage files carry construction labels (braces, dots, hashes), so they are
/// parsed without the seed-name restrictions.
fn read_stage(text: &str) -> Result<ComplexRef> {
    let file: ComplexFile = serde_json::from_str(text)?;
    let complex = SimplicialComplex::from_generators(&file.vertices, &file.simplices)?;
    if let (Some(declared), Some(computed)) = (file.dim, complex.dim()) {
        if declared != computed {
            bail!("declared dim {declared} does not match computed dim {computed}");
        }
    }
    Ok(complex)
}

/// Reconstructs the bond of one loaded stage from its vertex labels: each
/// `base#copy` label points at a barycentre of the coarser stage.
fn bond_from_labels(fine: &ComplexRef, coarse_sub: &Subdivision) -> Result<Vec<VertexId>> {
    let beta = coarse_sub.complex();
    let mut base_of = Vec::with_capacity(fine.vertex_count());
    for v in fine.vertex_ids() {
        let label = fine.label(v);
        let (base, _copy) = emit::split_copy_label(label)
            .ok_or_else(|| anyhow!("vertex `{label}` lacks copy structure"))?;
        let b = beta
            .vertex_id(base)
            .ok_or_else(|| anyhow!("vertex `{label}`: unknown barycentre `{base}`"))?;
        base_of.push(b);
    }
    Ok(base_of)
}

fn cmd_verify(manifest_path: &Path) -> Result<bool> {
    let loaded = load_tower(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let n = loaded.manifest.n;
    let mut all_ok = true;
    let report = |name: &str, stage: usize, ok: bool, detail: String| {
        println!(
            "{name}: stage {stage}: {} {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        ok
    };

    for (i, stage) in loaded.stages.iter().enumerate() {
        let hops = mesh_hops_of(stage);
        all_ok &= report("mesh", i, hops <= 2, format!("(mesh = {hops} * 2^(-{i}/2))"));
        if i == 0 {
            continue;
        }
        let sub = barycentric(&loaded.stages[i - 1]);
        let base_of = match bond_from_labels(stage, &sub) {
            Ok(b) => b,
            Err(e) => {
                all_ok &= report("bond", i, false, format!("({e})"));
                continue;
            }
        };
        let bond = VertexMap::new(stage.clone(), sub.complex().clone(), base_of.clone());
        match bond.verify(MapMode::Simplicial) {
            Ok(()) => {
                all_ok &= report("bond", i, true, "(quasi-simplicial)".to_string());
            }
            Err(v) => {
                all_ok &= report("bond", i, false, format!("(not quasi-simplicial: {v})"));
                continue;
            }
        }
        match is_n_regular_into_subdivision(&bond, &sub, n) {
            Ok(true) => {
                all_ok &= report("fibers", i, true, "(full over every simplex)".to_string());
            }
            Ok(false) => {
                let detail = first_bad_fiber(&bond, &sub, n)
                    .map(|s| format!("(fiber over {s} not full)"))
                    .unwrap_or_default();
                all_ok &= report("fibers", i, false, detail);
            }
            Err(e) => {
                all_ok &= report("fibers", i, false, format!("({e})"));
            }
        }
        match refinement_certificate_over(stage, &base_of, &sub, i) {
            Ok(cert) => {
                let path = dir.join(format!("refinement_{i}.cert"));
                fs::write(&path, cert.dump_lines(stage, &loaded.stages[i - 1]))?;
                all_ok &= report(
                    "refinement",
                    i,
                    true,
                    format!("({} pairs, certificate {})", cert.entries.len(), path.display()),
                );
            }
            Err(e) => {
                all_ok &= report("refinement", i, false, format!("({e})"));
            }
        }
    }
    Ok(all_ok)
}

/// Locates the subdivision simplex with the first non-full fiber, for the
/// failure report.
fn first_bad_fiber(bond: &VertexMap, sub: &Subdivision, n: usize) -> Option<String> {
    let beta = sub.complex();
    let domain = bond.domain();
    let mut preimages: Vec<Vec<VertexId>> = vec![Vec::new(); beta.vertex_count()];
    for v in domain.vertex_ids() {
        preimages[bond.apply(v).0 as usize].push(v);
    }
    for delta in beta.simplices() {
        let mut fiber: Vec<VertexId> = Vec::new();
        for b in delta.vertices() {
            fiber.extend_from_slice(&preimages[b.0 as usize]);
        }
        if fiber.is_empty() || !subsets_span(domain, &fiber, n + 1) {
            return Some(beta.simplex_name(delta));
        }
    }
    None
}

fn subsets_span(domain: &ComplexRef, fiber: &[VertexId], max_size: usize) -> bool {
    fn rec(
        domain: &ComplexRef,
        fiber: &[VertexId],
        start: usize,
        chosen: &mut Vec<VertexId>,
        left: usize,
    ) -> bool {
        if chosen.len() >= 2 && !domain.spans(chosen) {
            return false;
        }
        if left == 0 {
            return true;
        }
        for i in start..fiber.len() {
            chosen.push(fiber[i]);
            if !rec(domain, fiber, i + 1, chosen, left - 1) {
                return false;
            }
            chosen.pop();
        }
        true
    }
    let mut chosen = Vec::new();
    rec(domain, fiber, 0, &mut chosen, max_size.min(fiber.len()))
}

fn cmd_emit(
    manifest_path: &Path,
    stage: usize,
    format: EmitFormat,
    out: Option<PathBuf>,
) -> Result<bool> {
    let loaded = load_tower(manifest_path)?;
    if stage >= loaded.stages.len() {
        bail!(
            "stage {stage} out of range, tower has {} stages",
            loaded.stages.len()
        );
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let (content, ext) = match format {
        EmitFormat::Dot => (emit::dot_of_stage(&loaded.stages[stage], stage), "dot"),
        EmitFormat::Svg => {
            if loaded.manifest.n != 1 {
                bail!(
                    "unsupported dimension for svg: n = {} (only graphs are drawn)",
                    loaded.manifest.n
                );
            }
            (
                emit::svg_of_stage(&loaded.stages, loaded.manifest.kappa, stage)?,
                "svg",
            )
        }
    };
    let path = out.unwrap_or_else(|| dir.join(format!("stage_{stage}.{ext}")));
    fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn cmd_universality(
    manifest_path: &Path,
    space_path: &Path,
    depth: usize,
    rng_seed: u64,
    map_path: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let loaded = load_tower(manifest_path)?;
    if depth > loaded.manifest.depth {
        bail!(
            "requested depth {depth} exceeds the tower depth {}",
            loaded.manifest.depth
        );
    }
    // rebuild the tower from the seed stage and confirm it matches the files
    let budget = budget_from(None);
    let tower = build_tower(
        &loaded.stages[0],
        loaded.manifest.n,
        loaded.manifest.kappa,
        loaded.manifest.depth,
        budget,
    )?;
    for (i, stage) in tower.stages().iter().enumerate() {
        if complex_digest(stage) != loaded.manifest.stages[i].digest {
            bail!("rebuilt stage {i} does not match the manifest digest");
        }
    }

    let space = read_complex(&fs::read_to_string(space_path)?)?;
    if let Some(dy) = space.dim() {
        if dy > loaded.manifest.n {
            bail!(
                "test space has dimension {dy}, tower bound is {}",
                loaded.manifest.n
            );
        }
    }
    let k0 = tower.stage(0).clone();
    let f0_map = match map_path {
        Some(p) => {
            let file: VertexMapFile = serde_json::from_str(&fs::read_to_string(p)?)?;
            let map = vertex_map_from_file(&file, &space, &k0)?;
            map.verify(MapMode::Simplicial)
                .map_err(|v| anyhow!("starting map not simplicial: {v}"))?;
            map
        }
        None => {
            let mut labels: Vec<(String, VertexId)> = k0
                .vertex_ids()
                .map(|v| (k0.label(v).to_string(), v))
                .collect();
            labels.sort();
            VertexMap::constant(space.clone(), k0.clone(), labels[0].1)
        }
    };
    let f0 = StageMap::new(0, 0, f0_map);

    let run = universality_run(&tower, f0, 0, depth)?;
    let radii: Vec<QuadExt> = (1..=depth.max(1) as u32)
        .map(QuadExt::inv_sqrt2_pow)
        .collect();
    let cert = embedding_certificate(&tower, &run, &radii)?;

    let out_dir = out.unwrap_or_else(|| {
        manifest_path
            .parent()
            .unwrap_or(Path::new("."))
            .to_path_buf()
    });
    fs::create_dir_all(&out_dir)?;

    let injective = run.final_map().is_injective();
    let mut report = String::new();
    report.push_str(&format!(
        "universality run: space={} depth={} rng_seed={}\n",
        space_path.display(),
        depth,
        rng_seed
    ));
    report.push_str(&run.report());
    report.push_str(&format!("final map injective: {injective}\n"));
    report.push_str(&cert.table);
    fs::write(out_dir.join("universality_report.txt"), &report)?;
    fs::write(
        out_dir.join("final_map.json"),
        serde_json::to_string_pretty(&stage_map_to_file(
            run.final_map(),
            &space_path.display().to_string(),
        ))?,
    )?;
    // the subdivided domain makes the final map standalone
    fs::write(
        out_dir.join("final_map_domain.json"),
        write_complex(run.final_map().map.domain()),
    )?;
    println!(
        "stages: {}",
        run.diags
            .iter()
            .map(|d| format!("{}@L{}", d.strategy, d.level))
            .collect::<Vec<_>>()
            .join(", ")
    );
    print!("{}", run.report());
    println!("final map injective: {injective}");
    println!(
        "certificate: monotone={} separation={} st3={} => {}",
        cert.monotone_ok,
        cert.separation_ok,
        cert.st3_ok,
        if cert.pass { "PASS" } else { "FAIL" }
    );
    println!(
        "report written to {}",
        out_dir.join("universality_report.txt").display()
    );

    Ok(run.small_steps_ok && cert.pass && injective)
}
