//! End-to-end behaviour of the command-line driver, including the mutation
//! cases: a verified tower must fail loudly and precisely after tampering.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use noebeling::complex::SimplicialComplex;
use noebeling::io::{complex_digest, ComplexFile, TowerManifest};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_noebeling")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("noebeling-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_edge_seed(dir: &Path) -> PathBuf {
    let path = dir.join("edge.json");
    fs::write(
        &path,
        "{ \"vertices\": [\"a\", \"b\"], \"simplices\": [[\"a\", \"b\"]] }",
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn build_edge_tower(dir: &Path, depth: usize) -> PathBuf {
    let seed = write_edge_seed(dir);
    let out = dir.join("tower");
    let output = run(&[
        "tower",
        "--seed",
        seed.to_str().unwrap(),
        "--n",
        "1",
        "--kappa",
        "3",
        "--depth",
        &depth.to_string(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    out.join("manifest.json")
}

/// Rewrites one stage file through a mutation and patches the manifest
/// digest so verification reaches the lemma checks.
fn mutate_stage(manifest_path: &Path, stage: usize, mutate: impl Fn(&mut ComplexFile)) {
    let dir = manifest_path.parent().unwrap();
    let stage_path = dir.join(format!("stage_{stage}.json"));
    let mut file: ComplexFile =
        serde_json::from_str(&fs::read_to_string(&stage_path).unwrap()).unwrap();
    mutate(&mut file);
    fs::write(&stage_path, serde_json::to_string_pretty(&file).unwrap()).unwrap();

    let complex = SimplicialComplex::from_generators(&file.vertices, &file.simplices).unwrap();
    let mut manifest: TowerManifest =
        serde_json::from_str(&fs::read_to_string(manifest_path).unwrap()).unwrap();
    manifest.stages[stage].digest = complex_digest(&complex);
    manifest.stages[stage].vertices = complex.vertex_count();
    manifest.stages[stage].simplices = complex.simplex_count();
    fs::write(
        manifest_path,
        serde_json::to_string_pretty(&manifest).unwrap(),
    )
    .unwrap();
}

#[test]
fn fresh_tower_verifies_clean() {
    let dir = temp_dir("verify-ok");
    let manifest = build_edge_tower(&dir, 2);
    let output = run(&["verify", manifest.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "verify failed:\n{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert!(dir.join("tower/refinement_1.cert").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn deleted_edge_is_reported_as_fiber_failure() {
    let dir = temp_dir("verify-edge");
    let manifest = build_edge_tower(&dir, 1);
    mutate_stage(&manifest, 1, |file| {
        // drop the edge between two copies over the barycentre of {a}
        let before = file.simplices.len();
        file.simplices
            .retain(|s| s != &vec!["{a}#0".to_string(), "{a}#1".to_string()]);
        assert_eq!(file.simplices.len(), before - 1);
    });
    let output = run(&["verify", manifest.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(!output.status.success());
    assert!(
        stdout.contains("fibers: stage 1: FAIL") && stdout.contains("{a}"),
        "unexpected report:\n{stdout}"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn corrupted_bond_is_reported_as_not_quasi_simplicial() {
    let dir = temp_dir("verify-bond");
    let manifest = build_edge_tower(&dir, 1);
    mutate_stage(&manifest, 1, |file| {
        // rewire one copy over {a} to claim a base over {b}
        for v in &mut file.vertices {
            if v == "{a}#0" {
                *v = "{b}#9".to_string();
            }
        }
        for s in &mut file.simplices {
            for v in s {
                if v == "{a}#0" {
                    *v = "{b}#9".to_string();
                }
            }
        }
    });
    let output = run(&["verify", manifest.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(!output.status.success());
    assert!(
        stdout.contains("not quasi-simplicial"),
        "unexpected report:\n{stdout}"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn stale_digest_is_rejected_before_lemma_checks() {
    let dir = temp_dir("verify-digest");
    let manifest = build_edge_tower(&dir, 1);
    // tamper with the stage file without fixing the manifest
    let stage_path = dir.join("tower/stage_1.json");
    let mut file: ComplexFile =
        serde_json::from_str(&fs::read_to_string(&stage_path).unwrap()).unwrap();
    file.simplices.pop();
    fs::write(&stage_path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let output = run(&["verify", manifest.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("digest mismatch"), "stderr: {stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn budget_guard_reports_estimate() {
    let dir = temp_dir("budget");
    let seed = write_edge_seed(&dir);
    let output = run(&[
        "tower",
        "--seed",
        seed.to_str().unwrap(),
        "--n",
        "1",
        "--kappa",
        "3",
        "--depth",
        "2",
        "--budget",
        "40",
        "--out",
        dir.join("t").to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("budget exceeded") && stderr.contains("estimated"));

    // the environment variable drives the same guard
    let output = Command::new(bin())
        .env("NOEBELING_BUDGET", "40")
        .args([
            "tower",
            "--seed",
            seed.to_str().unwrap(),
            "--n",
            "1",
            "--kappa",
            "3",
            "--depth",
            "2",
            "--out",
            dir.join("t2").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn depth_zero_manifest_holds_only_the_seed() {
    let dir = temp_dir("depth0");
    let manifest_path = build_edge_tower(&dir, 0);
    let manifest: TowerManifest =
        serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest.depth, 0);
    assert_eq!(manifest.stages.len(), 1);
    assert_eq!(manifest.stages[0].vertices, 2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn svg_requires_dimension_one() {
    let dir = temp_dir("svg-dim");
    let seed = dir.join("triangle.json");
    fs::write(
        &seed,
        "{ \"vertices\": [\"a\",\"b\",\"c\"], \"simplices\": [[\"a\",\"b\",\"c\"]] }",
    )
    .unwrap();
    let out = dir.join("tower");
    let output = run(&[
        "tower",
        "--seed",
        seed.to_str().unwrap(),
        "--n",
        "2",
        "--kappa",
        "3",
        "--depth",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let output = run(&[
        "emit",
        out.join("manifest.json").to_str().unwrap(),
        "--stage",
        "1",
        "--format",
        "svg",
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unsupported dimension"));
    // dot emits the 1-skeleton regardless of dimension
    let output = run(&[
        "emit",
        out.join("manifest.json").to_str().unwrap(),
        "--stage",
        "1",
        "--format",
        "dot",
    ]);
    assert!(output.status.success());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn refinement_certificate_matches_golden() {
    let dir = temp_dir("cert-golden");
    let manifest = build_edge_tower(&dir, 1);
    let output = run(&["verify", manifest.to_str().unwrap()]);
    assert!(output.status.success());
    let cert = fs::read_to_string(dir.join("tower/refinement_1.cert")).unwrap();
    assert_eq!(cert, include_str!("goldens/edge_refinement_1.cert"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn manifests_are_byte_identical_across_reruns() {
    let dir = temp_dir("manifest-stable");
    let seed = write_edge_seed(&dir);
    let build = |out: &str| {
        let out_dir = dir.join(out);
        let output = run(&[
            "tower",
            "--seed",
            seed.to_str().unwrap(),
            "--n",
            "1",
            "--kappa",
            "3",
            "--depth",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(output.status.success());
        (
            fs::read(out_dir.join("manifest.json")).unwrap(),
            fs::read(out_dir.join("stage_2.json")).unwrap(),
        )
    };
    assert_eq!(build("first"), build("second"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn dot_output_is_byte_stable_across_runs() {
    let dir = temp_dir("stable");
    let manifest = build_edge_tower(&dir, 1);
    let emit = |target: &str| {
        let out = dir.join(target);
        let output = run(&[
            "emit",
            manifest.to_str().unwrap(),
            "--stage",
            "1",
            "--format",
            "dot",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(emit("first.dot"), emit("second.dot"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn universality_depth_capped_by_manifest() {
    let dir = temp_dir("univ-depth");
    let manifest = build_edge_tower(&dir, 1);
    let space = dir.join("point.json");
    fs::write(&space, "{ \"vertices\": [\"p\"], \"simplices\": [] }").unwrap();
    let output = run(&[
        "universality",
        "--seed",
        manifest.to_str().unwrap(),
        "--space",
        space.to_str().unwrap(),
        "--depth",
        "5",
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("exceeds the tower depth"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn universality_twelve_gon_run_passes_end_to_end() {
    let dir = temp_dir("univ-12gon");
    let seed = dir.join("triangle.json");
    fs::write(
        &seed,
        "{ \"vertices\": [\"a\",\"b\",\"c\"], \
           \"simplices\": [[\"a\",\"b\"],[\"b\",\"c\"],[\"a\",\"c\"]] }",
    )
    .unwrap();
    let out = dir.join("tower");
    let output = run(&[
        "tower",
        "--seed",
        seed.to_str().unwrap(),
        "--n",
        "1",
        "--kappa",
        "3",
        "--depth",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let names: Vec<String> = (0..12).map(|i| format!("y{i}")).collect();
    let gens: Vec<Vec<String>> = (0..12)
        .map(|i| vec![names[i].clone(), names[(i + 1) % 12].clone()])
        .collect();
    let space_file = serde_json::json!({ "vertices": names, "simplices": gens });
    let space = dir.join("twelvegon.json");
    fs::write(&space, space_file.to_string()).unwrap();
    let targets = ["a", "b", "c"];
    let assignment: serde_json::Map<String, serde_json::Value> = (0..12)
        .map(|i| {
            (
                format!("y{i}"),
                serde_json::Value::String(targets[i % 3].to_string()),
            )
        })
        .collect();
    let map_file = serde_json::json!({
        "domain": "twelvegon",
        "codomain": "stage0",
        "mode": "simplicial",
        "assignment": assignment,
    });
    let map = dir.join("wrap.json");
    fs::write(&map, map_file.to_string()).unwrap();

    let output = run(&[
        "universality",
        "--seed",
        out.join("manifest.json").to_str().unwrap(),
        "--space",
        space.to_str().unwrap(),
        "--depth",
        "3",
        "--map",
        map.to_str().unwrap(),
        "--out",
        dir.join("run").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "run failed:\n{stdout}");
    assert!(stdout.contains("final map injective: true"));
    assert!(stdout.contains("=> PASS"));
    let report = fs::read_to_string(dir.join("run/universality_report.txt")).unwrap();
    assert!(report.contains("stage 3: mesh="));
    assert!(report.contains("small steps: ok"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn universality_point_run_is_trivial() {
    let dir = temp_dir("univ-point");
    let manifest = build_edge_tower(&dir, 2);
    let space = dir.join("point.json");
    fs::write(&space, "{ \"vertices\": [\"p\"], \"simplices\": [] }").unwrap();
    let output = run(&[
        "universality",
        "--seed",
        manifest.to_str().unwrap(),
        "--space",
        space.to_str().unwrap(),
        "--depth",
        "2",
        "--out",
        dir.join("run").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "run failed:\n{stdout}");
    assert!(stdout.contains("mesh=0"));
    assert!(dir.join("run/universality_report.txt").exists());
    assert!(dir.join("run/final_map.json").exists());
    fs::remove_dir_all(&dir).ok();
}
