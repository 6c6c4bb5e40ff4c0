//! End-to-end experiment wiring: generate → prune → score → segment →
//! recommend → evaluate, and the grid runner over models, pruning rates,
//! cluster counts and scorers.
//!
//! Scores and clusters are always computed on the observed graph. Scores are
//! quantized to the ten significant digits stored in score files before
//! ranking, so a run resumed from cached artifacts ranks exactly like a fresh
//! one.
//!
//! Stage seeds come from [`derive_seed`] applied to each experiment seed; the
//! generator stream does not depend on `rho` or `k`, so cells that differ
//! only in those parameters share the same graph.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result, StageExt};
use crate::evaluation::{evaluate, Averaging, EvalReport};
use crate::features::{compute_feature, Feature, VertexScores};
use crate::format::{self, kv, provenance, round_sig10};
use crate::generators::{GenSpec, Model, ModelKind};
use crate::graph::{self, Graph};
use crate::prediction::{prune, recommend, CandidatePolicy, PruneSplit};
use crate::rng::{derive_seed, Stage};
use crate::segmentation::{segment_kmeans_arcs, Partition, DEFAULT_MAX_ITER};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub model: Model,
    pub n: usize,
    pub rho: f64,
    pub k: usize,
    pub scorer: Feature,
    pub policy: CandidatePolicy,
    pub top_n: usize,
    pub seeds: Vec<u64>,
    pub kmeans_max_iter: usize,
    pub averaging: Averaging,
}

impl PipelineConfig {
    fn validate(&self) -> Result<()> {
        GenSpec {
            model: self.model,
            n: self.n,
            seed: 0,
        }
        .validate()?;
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::param(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::param(format!(
                "k must satisfy 1 <= k <= n, got {}",
                self.k
            )));
        }
        if self.top_n < 1 {
            return Err(Error::param("list length must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("at least one seed is required"));
        }
        Ok(())
    }

    fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .model
            .describe()
            .split_whitespace()
            .filter_map(|s| s.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        out.extend([
            kv("n", self.n),
            kv("rho", self.rho),
            kv("k", self.k),
            kv("scorer", self.scorer),
            kv("policy", self.policy),
            kv("top_n", self.top_n),
            kv("kmeans_max_iter", self.kmeans_max_iter),
            kv("averaging", format!("{:?}", self.averaging).to_lowercase()),
        ]);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub per_seed: Vec<(u64, EvalReport)>,
    pub mean: EvalReport,
    /// Stage artifacts loaded from disk instead of recomputed.
    pub reused: Vec<PathBuf>,
}

struct Cache<'a> {
    dir: Option<&'a Path>,
    reused: Vec<PathBuf>,
}

impl Cache<'_> {
    /// Loads `file` when its provenance line matches, otherwise computes and
    /// (if caching) saves it.
    fn stage<T>(
        &mut self,
        file: &str,
        prov: &str,
        load: impl FnOnce(&Path) -> Result<T>,
        compute: impl FnOnce() -> Result<T>,
        save: impl FnOnce(&T, &Path) -> Result<()>,
    ) -> Result<T> {
        let Some(dir) = self.dir else {
            return compute();
        };
        let path = dir.join(file);
        if format::read_provenance(&path).as_deref() == Some(prov) {
            if let Ok(v) = load(&path) {
                self.reused.push(path);
                return Ok(v);
            }
        }
        let v = compute()?;
        save(&v, &path)?;
        Ok(v)
    }

    /// The observed and held-out halves are cached as two edge-list files and
    /// reused only together.
    fn split_stage(
        &mut self,
        prune_prov: &str,
        held_prov: &str,
        n: usize,
        rho: f64,
        prune_seed: u64,
        compute: impl FnOnce() -> Result<PruneSplit>,
    ) -> Result<PruneSplit> {
        let Some(dir) = self.dir else {
            return compute();
        };
        let obs_path = dir.join("observed.txt");
        let held_path = dir.join("heldout.txt");
        let fresh =
            |path: &Path, prov: &str| format::read_provenance(path).as_deref() == Some(prov);
        if fresh(&obs_path, prune_prov) && fresh(&held_path, held_prov) {
            let loaded = graph::read_graph(&obs_path)
                .and_then(|observed| Ok((observed, graph::read_graph(&held_path)?.edge_list())));
            if let Ok((observed, held_out)) = loaded {
                let split = PruneSplit {
                    observed,
                    held_out,
                    rho,
                    seed: prune_seed,
                };
                self.reused.push(obs_path);
                self.reused.push(held_path);
                return Ok(split);
            }
        }
        let split = compute()?;
        graph::save_edge_list_with(&split.observed, &[prune_prov.to_string()], &obs_path)?;
        let held = Graph::from_edges(n, &split.held_out)?;
        graph::save_edge_list_with(&held, &[held_prov.to_string()], &held_path)?;
        Ok(split)
    }
}

pub fn generate_for_seed(model: Model, n: usize, seed: u64) -> Result<Graph> {
    GenSpec {
        model,
        n,
        seed: derive_seed(seed, Stage::Generate),
    }
    .generate()
}

pub fn prune_for_seed(g: &Graph, rho: f64, seed: u64) -> Result<PruneSplit> {
    prune(g, rho, derive_seed(seed, Stage::Prune))
}

/// Scores on `observed`, quantized to file precision.
pub fn score_observed(observed: &Graph, feature: Feature) -> Result<VertexScores> {
    Ok(compute_feature(observed, feature)?.map(round_sig10))
}

pub fn segment_for_seed(
    observed: &Graph,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<Partition> {
    segment_kmeans_arcs(observed, k, derive_seed(seed, Stage::Segment), max_iter)
}

fn run_seed(
    cfg: &PipelineConfig,
    seed: u64,
    dir: Option<&Path>,
) -> Result<(EvalReport, Vec<PathBuf>)> {
    let mut cache = Cache {
        dir,
        reused: Vec::new(),
    };
    let n = cfg.n;
    let gen_prov = format!("{} n={n} seed={seed} stage=generate", cfg.model.describe());
    let original = cache
        .stage(
            "graph.txt",
            &gen_prov,
            |p| graph::read_graph(p),
            || generate_for_seed(cfg.model, n, seed),
            |g, p| graph::save_edge_list_with(g, std::slice::from_ref(&gen_prov), p),
        )
        .stage("generate")?;

    let prune_prov = format!("{gen_prov} rho={} stage=prune", cfg.rho);
    let held_prov = format!("{prune_prov} part=heldout");
    let split = cache
        .split_stage(
            &prune_prov,
            &held_prov,
            n,
            cfg.rho,
            derive_seed(seed, Stage::Prune),
            || prune_for_seed(&original, cfg.rho, seed),
        )
        .stage("prune")?;

    let score_prov = format!("{prune_prov} feature={} stage=score", cfg.scorer);
    let scores = cache
        .stage(
            &format!("scores-{}.csv", cfg.scorer),
            &score_prov,
            |p| format::load_scores(cfg.scorer, p),
            || score_observed(&split.observed, cfg.scorer),
            |s, p| format::save_scores(s, &score_prov, p),
        )
        .stage("score")?;

    let seg_prov = format!(
        "{prune_prov} k={} kmeans_max_iter={} stage=segment",
        cfg.k, cfg.kmeans_max_iter
    );
    let partition = cache
        .stage(
            &format!("clusters-k{}.csv", cfg.k),
            &seg_prov,
            |p| format::load_partition(p),
            || segment_for_seed(&split.observed, cfg.k, seed, cfg.kmeans_max_iter),
            |part, p| format::save_partition(part, &seg_prov, p),
        )
        .stage("segment")?;

    let rec_prov = format!(
        "{seg_prov} feature={} policy={} top_n={} stage=recommend",
        cfg.scorer, cfg.policy, cfg.top_n
    );
    let recs = cache
        .stage(
            &format!("recs-{}-{}-k{}.csv", cfg.scorer, cfg.policy, cfg.k),
            &rec_prov,
            |p| format::load_recommendations(p),
            || recommend(&split.observed, &partition, &scores, cfg.policy, cfg.top_n),
            |r, p| format::save_recommendations(r, &rec_prov, p),
        )
        .stage("recommend")?;

    let mut echo = cfg.echo();
    echo.push(kv("seed", seed));
    let report = evaluate(&recs, &split.held_out, cfg.averaging).stage("evaluate")?;
    echo.push(kv("targets", report.targets));
    Ok((report.with_config(echo), cache.reused))
}

/// Runs every seed in memory and averages the reports.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    run_pipeline_impl(cfg, None)
}

/// Like [`run_pipeline`], but stores every stage artifact under
/// `out_dir/seed-<s>/` and reuses artifacts whose provenance matches.
/// Writes `report-seed-<s>.csv` and `report-mean.csv`.
pub fn run_pipeline_in(cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutcome> {
    run_pipeline_impl(cfg, Some(out_dir))
}

fn run_pipeline_impl(cfg: &PipelineConfig, out_dir: Option<&Path>) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let seed_dirs: Vec<Option<PathBuf>> = cfg
        .seeds
        .iter()
        .map(|s| out_dir.map(|d| d.join(format!("seed-{s}"))))
        .collect();
    for d in seed_dirs.iter().flatten() {
        fs::create_dir_all(d)?;
    }
    let runs = cfg
        .seeds
        .par_iter()
        .zip(seed_dirs.par_iter())
        .map(|(&seed, dir)| run_seed(cfg, seed, dir.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let mut reused = Vec::new();
    let mut per_seed = Vec::with_capacity(runs.len());
    for (&seed, (report, r)) in cfg.seeds.iter().zip(runs) {
        reused.extend(r);
        per_seed.push((seed, report));
    }
    let reports: Vec<EvalReport> = per_seed.iter().map(|(_, r)| r.clone()).collect();
    let mut echo = cfg.echo();
    echo.push(kv(
        "seeds",
        cfg.seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    ));
    let mean = EvalReport::mean(&reports)?.with_config(echo);
    if let Some(dir) = out_dir {
        for (seed, report) in &per_seed {
            format::save_report(report, dir.join(format!("report-seed-{seed}.csv")))?;
        }
        format::save_report(&mean, dir.join("report-mean.csv"))?;
    }
    Ok(PipelineOutcome {
        per_seed,
        mean,
        reused,
    })
}

/// Parameter grid reproducing the P@10 / R@10 tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub models: Vec<ModelKind>,
    pub n: usize,
    pub ring_k: usize,
    pub p_rewire: f64,
    pub m_attach: usize,
    /// Erdős–Rényi edge budget; `None` matches the Watts–Strogatz count `n * ring_k`.
    pub er_edges: Option<usize>,
    pub k_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub scorers: Vec<Feature>,
    pub seeds: Vec<u64>,
    pub policy: CandidatePolicy,
    pub kmeans_max_iter: usize,
}

/// List depth the grid tables report.
pub const GRID_DEPTH: usize = 10;

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid {
            models: ModelKind::ALL.to_vec(),
            n: 10_000,
            ring_k: 5,
            p_rewire: 0.1,
            m_attach: 5,
            er_edges: None,
            k_values: (3..=7).collect(),
            rho_values: vec![0.10, 0.25],
            scorers: Feature::ALL.to_vec(),
            seeds: (1..=5).collect(),
            policy: CandidatePolicy::IntraCluster,
            kmeans_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl ExperimentGrid {
    pub fn model(&self, kind: ModelKind) -> Model {
        match kind {
            ModelKind::ErdosRenyi => Model::ErdosRenyi {
                m_edges: self.er_edges.unwrap_or(self.n * self.ring_k),
            },
            ModelKind::WattsStrogatz => Model::WattsStrogatz {
                ring_k: self.ring_k,
                p_rewire: self.p_rewire,
            },
            ModelKind::BarabasiAlbert => Model::BarabasiAlbert {
                m_attach: self.m_attach,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("models", self.models.is_empty()),
            ("k_values", self.k_values.is_empty()),
            ("rho_values", self.rho_values.is_empty()),
            ("scorers", self.scorers.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(Error::param(format!("grid list `{name}` is empty")));
        }
        for &kind in &self.models {
            GenSpec {
                model: self.model(kind),
                n: self.n,
                seed: 0,
            }
            .validate()?;
        }
        if let Some(&rho) = self.rho_values.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::param(format!("rho must lie in [0, 1], got {rho}")));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k < 1 || k > self.n) {
            return Err(Error::param(format!("k must satisfy 1 <= k <= n, got {k}")));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        provenance(&[
            kv("n", self.n),
            kv("ring_k", self.ring_k),
            kv("p_rewire", self.p_rewire),
            kv("m_attach", self.m_attach),
            kv("er_edges", self.er_edges.unwrap_or(self.n * self.ring_k)),
            kv(
                "k_values",
                join(self.k_values.iter().map(|k| k.to_string()).collect()),
            ),
            kv(
                "scorers",
                join(self.scorers.iter().map(|s| s.to_string()).collect()),
            ),
            kv(
                "seeds",
                join(self.seeds.iter().map(|s| s.to_string()).collect()),
            ),
            kv("policy", self.policy),
            kv("top_n", GRID_DEPTH),
            kv("kmeans_max_iter", self.kmeans_max_iter),
        ])
    }
}

/// P@10 and R@10 of one table cell, one entry per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub model: ModelKind,
    pub rho: f64,
    pub k: usize,
    pub scorer: Feature,
    pub per_seed: Vec<(u64, f64, f64)>,
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl CellResult {
    pub fn precision(&self) -> (f64, f64) {
        mean_sd(self.per_seed.iter().map(|s| s.1))
    }

    pub fn recall(&self) -> (f64, f64) {
        mean_sd(self.per_seed.iter().map(|s| s.2))
    }

    pub fn mean_precision(&self) -> f64 {
        self.precision().0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResults {
    pub cells: Vec<CellResult>,
}

impl GridResults {
    pub fn cell(
        &self,
        model: ModelKind,
        rho: f64,
        k: usize,
        scorer: Feature,
    ) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.rho == rho && c.k == k && c.scorer == scorer)
    }
}

/// (k, scorer, P@10, R@10) for every cell of one (model, rho, seed) unit.
type UnitRows = Vec<(usize, Feature, f64, f64)>;

fn run_unit(grid: &ExperimentGrid, kind: ModelKind, rho: f64, seed: u64) -> Result<UnitRows> {
    let g = generate_for_seed(grid.model(kind), grid.n, seed).stage("generate")?;
    let split = prune_for_seed(&g, rho, seed).stage("prune")?;
    let scores = grid
        .scorers
        .iter()
        .map(|&f| score_observed(&split.observed, f))
        .collect::<Result<Vec<_>>>()
        .stage("score")?;
    let mut rows = Vec::with_capacity(grid.k_values.len() * grid.scorers.len());
    for &k in &grid.k_values {
        let partition =
            segment_for_seed(&split.observed, k, seed, grid.kmeans_max_iter).stage("segment")?;
        for s in &scores {
            let recs = recommend(&split.observed, &partition, s, grid.policy, GRID_DEPTH)
                .stage("recommend")?;
            let report = evaluate(&recs, &split.held_out, Averaging::Micro).stage("evaluate")?;
            rows.push((
                k,
                s.feature,
                round_sig10(report.precision_at(GRID_DEPTH)),
                round_sig10(report.recall_at(GRID_DEPTH)),
            ));
        }
    }
    Ok(rows)
}

fn unit_file(dir: &Path, kind: ModelKind, rho: f64, seed: u64) -> PathBuf {
    dir.join(format!("{kind}-rho{rho}-seed{seed}.csv"))
}

fn unit_provenance(grid: &ExperimentGrid, kind: ModelKind, rho: f64, seed: u64) -> String {
    format!(
        "{} rho={rho} seed={seed} {}",
        grid.model(kind).describe(),
        grid.describe()
    )
}

fn save_unit(path: &Path, prov: &str, rows: &UnitRows) -> Result<()> {
    let mut text = format!("# {prov}\nscorer,k,p_at_10,r_at_10\n");
    for (k, f, p, r) in rows {
        text.push_str(&format!(
            "{f},{k},{},{}\n",
            format::fmt_sig(*p, 10),
            format::fmt_sig(*r, 10)
        ));
    }
    // Write-then-rename so an interrupted run never leaves a partial cell.
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_unit(path: &Path) -> Result<UnitRows> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or_default();
        let bad = |what: &str| Error::Parse {
            line: rec.position().map_or(0, |p| p.line() as usize),
            message: format!("bad {what} in grid cell file"),
        };
        rows.push((
            get(1).parse().map_err(|_| bad("k"))?,
            get(0).parse()?,
            get(2).parse().map_err(|_| bad("precision"))?,
            get(3).parse().map_err(|_| bad("recall"))?,
        ));
    }
    Ok(rows)
}

fn assemble(grid: &ExperimentGrid, units: &[((ModelKind, f64, u64), UnitRows)]) -> GridResults {
    let mut cells = Vec::new();
    for &model in &grid.models {
        for &rho in &grid.rho_values {
            for &scorer in &grid.scorers {
                for &k in &grid.k_values {
                    let per_seed = units
                        .iter()
                        .filter(|((m, r, _), _)| *m == model && *r == rho)
                        .filter_map(|((_, _, seed), rows)| {
                            rows.iter()
                                .find(|row| row.0 == k && row.1 == scorer)
                                .map(|row| (*seed, row.2, row.3))
                        })
                        .collect();
                    cells.push(CellResult {
                        model,
                        rho,
                        k,
                        scorer,
                        per_seed,
                    });
                }
            }
        }
    }
    GridResults { cells }
}

fn units_of(grid: &ExperimentGrid) -> Vec<(ModelKind, f64, u64)> {
    let mut out = Vec::new();
    for &m in &grid.models {
        for &rho in &grid.rho_values {
            for &seed in &grid.seeds {
                out.push((m, rho, seed));
            }
        }
    }
    out
}

/// Runs the grid in memory.
pub fn evaluate_grid(grid: &ExperimentGrid) -> Result<GridResults> {
    grid.validate()?;
    let units = units_of(grid)
        .into_par_iter()
        .map(|u| Ok((u, run_unit(grid, u.0, u.1, u.2)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(grid, &units))
}

/// Runs the grid, writing one table per (model, rho) to `out_dir`:
/// `table-<model>-rho<rho>.csv` with rows (scorer, k) and the mean and
/// standard deviation of P@10 / R@10 across seeds.
///
/// Each (model, rho, seed) unit is persisted under `out_dir/cells/` as soon
/// as it finishes; a rerun reuses units whose provenance matches.
pub fn run_grid(grid: &ExperimentGrid, out_dir: &Path) -> Result<GridResults> {
    grid.validate()?;
    let cell_dir = out_dir.join("cells");
    fs::create_dir_all(&cell_dir)?;
    let units = units_of(grid)
        .into_par_iter()
        .map(|u| {
            let (kind, rho, seed) = u;
            let path = unit_file(&cell_dir, kind, rho, seed);
            let prov = unit_provenance(grid, kind, rho, seed);
            if format::read_provenance(&path).as_deref() == Some(prov.as_str()) {
                if let Ok(rows) = load_unit(&path) {
                    return Ok((u, rows));
                }
            }
            let rows = run_unit(grid, kind, rho, seed)?;
            save_unit(&path, &prov, &rows)?;
            Ok((u, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let results = assemble(grid, &units);
    for &model in &grid.models {
        for &rho in &grid.rho_values {
            let mut text = format!(
                "# {} rho={rho} {}\nscorer,k,p_at_10,r_at_10,p_at_10_sd,r_at_10_sd,seeds\n",
                grid.model(model).describe(),
                grid.describe()
            );
            for cell in results
                .cells
                .iter()
                .filter(|c| c.model == model && c.rho == rho)
            {
                let (p, psd) = cell.precision();
                let (r, rsd) = cell.recall();
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    cell.scorer,
                    cell.k,
                    format::fmt_sig(p, 10),
                    format::fmt_sig(r, 10),
                    format::fmt_sig(psd, 10),
                    format::fmt_sig(rsd, 10),
                    cell.per_seed.len()
                ));
            }
            fs::write(out_dir.join(format!("table-{model}-rho{rho}.csv")), text)?;
        }
    }
    Ok(results)
}
