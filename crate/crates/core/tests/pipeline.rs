use std::fs;
use std::path::Path;

use linklab::evaluation::Averaging;
use linklab::features::Feature;
use linklab::format;
use linklab::generators::{Model, ModelKind};
use linklab::graph;
use linklab::pipeline::{
    run_grid, run_pipeline, run_pipeline_in, score_observed, ExperimentGrid, PipelineConfig,
};
use linklab::prediction::CandidatePolicy;
use linklab::segmentation::DEFAULT_MAX_ITER;

fn ws_config(n: usize, k: usize) -> PipelineConfig {
    PipelineConfig {
        model: Model::WattsStrogatz {
            ring_k: 5,
            p_rewire: 0.1,
        },
        n,
        rho: 0.25,
        k,
        scorer: Feature::Authority,
        policy: CandidatePolicy::IntraCluster,
        top_n: 10,
        seeds: (1..=5).collect(),
        kmeans_max_iter: DEFAULT_MAX_ITER,
        averaging: Averaging::Micro,
    }
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn resumed_run_reuses_stages_and_matches() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seeds: vec![3, 4],
        ..ws_config(400, 4)
    };
    let first = run_pipeline_in(&cfg, dir.path()).unwrap();
    assert!(first.reused.is_empty());
    let mean = read(dir.path(), "report-mean.csv");
    let seed3 = read(dir.path(), "report-seed-3.csv");

    let second = run_pipeline_in(&cfg, dir.path()).unwrap();
    // graph, observed, heldout, scores, clusters, recs for both seeds
    assert_eq!(second.reused.len(), 12);
    assert_eq!(second.mean, first.mean);
    assert_eq!(read(dir.path(), "report-mean.csv"), mean);

    fs::remove_file(dir.path().join("seed-3/recs-authority-intra-k4.csv")).unwrap();
    fs::remove_file(dir.path().join("seed-3/clusters-k4.csv")).unwrap();
    let third = run_pipeline_in(&cfg, dir.path()).unwrap();
    assert_eq!(third.reused.len(), 10);
    assert_eq!(read(dir.path(), "report-seed-3.csv"), seed3);
    assert_eq!(read(dir.path(), "report-mean.csv"), mean);
}

#[test]
fn cached_and_in_memory_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seeds: vec![7],
        scorer: Feature::Transitivity,
        ..ws_config(300, 3)
    };
    let disk = run_pipeline_in(&cfg, dir.path()).unwrap();
    let cached = run_pipeline_in(&cfg, dir.path()).unwrap();
    let memory = run_pipeline(&cfg).unwrap();
    assert_eq!(disk.mean.rows, memory.mean.rows);
    assert_eq!(cached.mean.rows, memory.mean.rows);
}

#[test]
fn changed_parameters_invalidate_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seeds: vec![1],
        ..ws_config(300, 3)
    };
    run_pipeline_in(&cfg, dir.path()).unwrap();
    let other = PipelineConfig { rho: 0.1, ..cfg };
    let out = run_pipeline_in(&other, dir.path()).unwrap();
    // Only the generated graph is independent of rho.
    assert_eq!(out.reused.len(), 1);
    assert_eq!(out.mean, run_pipeline(&other).unwrap().mean);
}

#[test]
fn scores_are_computed_on_the_observed_graph() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seeds: vec![2],
        scorer: Feature::Degree,
        ..ws_config(300, 3)
    };
    run_pipeline_in(&cfg, dir.path()).unwrap();
    let seed_dir = dir.path().join("seed-2");
    let observed = graph::read_graph(seed_dir.join("observed.txt")).unwrap();
    let original = graph::read_graph(seed_dir.join("graph.txt")).unwrap();
    let stored = format::load_scores(Feature::Degree, seed_dir.join("scores-degree.csv")).unwrap();
    assert_eq!(stored, score_observed(&observed, Feature::Degree).unwrap());
    assert_ne!(stored, score_observed(&original, Feature::Degree).unwrap());
}

#[test]
fn every_csv_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seeds: vec![5],
        ..ws_config(200, 3)
    };
    run_pipeline_in(&cfg, dir.path()).unwrap();
    for name in [
        "report-mean.csv",
        "report-seed-5.csv",
        "seed-5/scores-authority.csv",
        "seed-5/clusters-k3.csv",
    ] {
        let line = format::read_provenance(dir.path().join(name)).unwrap();
        assert!(
            line.contains("rho=0.25") && line.contains("n=200"),
            "{name}: {line}"
        );
        assert!(
            line.contains("seed=5") || line.contains("seeds=5"),
            "{name}: {line}"
        );
    }
}

#[test]
fn more_clusters_help_on_small_world_graphs() {
    let k3 = run_pipeline(&ws_config(1000, 3))
        .unwrap()
        .mean
        .precision_at(10);
    let k7 = run_pipeline(&ws_config(1000, 7))
        .unwrap()
        .mean
        .precision_at(10);
    assert!(k7 > k3, "k=7 {k7} vs k=3 {k3}");
}

fn small_grid() -> ExperimentGrid {
    ExperimentGrid {
        n: 400,
        seeds: vec![1, 2],
        ..ExperimentGrid::default()
    }
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
        - 1
}

#[test]
fn single_cell_grid_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ExperimentGrid {
        models: vec![ModelKind::BarabasiAlbert],
        k_values: vec![4],
        rho_values: vec![0.25],
        scorers: vec![Feature::Degree],
        ..small_grid()
    };
    let res = run_grid(&grid, dir.path()).unwrap();
    assert_eq!(res.cells.len(), 1);
    assert_eq!(res.cells[0].per_seed.len(), 2);
    assert_eq!(data_rows(&dir.path().join("table-ba-rho0.25.csv")), 1);
}

#[test]
fn default_grid_shape_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let grid = small_grid();
    run_grid(&grid, dir.path()).unwrap();
    let mut tables: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    tables.sort();
    assert_eq!(tables.len(), 6);
    for t in &tables {
        assert_eq!(data_rows(t), 15, "{}", t.display());
    }
    let before: Vec<Vec<u8>> = tables.iter().map(|t| fs::read(t).unwrap()).collect();

    // A lost unit is recomputed; the tables come out byte-identical.
    fs::remove_file(
        dir.path()
            .join("cells")
            .read_dir()
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path(),
    )
    .unwrap();
    run_grid(&grid, dir.path()).unwrap();
    let after: Vec<Vec<u8>> = tables.iter().map(|t| fs::read(t).unwrap()).collect();
    assert_eq!(before, after);

    let fresh = tempfile::tempdir().unwrap();
    run_grid(&grid, fresh.path()).unwrap();
    for t in &tables {
        let name = t.file_name().unwrap();
        assert_eq!(
            fs::read(t).unwrap(),
            fs::read(fresh.path().join(name)).unwrap()
        );
    }
}
