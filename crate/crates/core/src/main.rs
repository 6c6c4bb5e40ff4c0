use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linklab::error::{Error, Result};
use linklab::evaluation::{build_instances, evaluate, rank_features, Averaging};
use linklab::features::{Feature, FeatureSet};
use linklab::format::{self, kv, provenance};
use linklab::generators::{Model, ModelKind};
use linklab::graph::{self, Graph};
use linklab::pipeline::{self, ExperimentGrid, PipelineConfig};
use linklab::prediction::{recommend, CandidatePolicy, PruneSplit};
use linklab::rng::{derive_seed, Stage};
use linklab::segmentation::DEFAULT_MAX_ITER;

/// Link prediction on synthetic networks: generators, vertex scores, arc
/// clustering, intra-cluster recommendation and P@N / R@N evaluation.
#[derive(Parser)]
#[command(name = "linklab", version)]
struct Cli {
    /// Suppress progress and summaries on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ER, WS or BA graph as an edge list.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every vertex of a graph.
    Score {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        feature: Feature,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster vertices by k-means over their arc lists.
    Segment {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hold out a fraction of the edges.
    Prune {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_observed: PathBuf,
        #[arg(long)]
        out_heldout: PathBuf,
    },
    /// Rank candidates for every vertex.
    Recommend {
        #[arg(long)]
        observed: PathBuf,
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value_t = CandidatePolicy::IntraCluster)]
        policy: CandidatePolicy,
        /// Length of each list.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision and recall at N = 1..10.
    Evaluate {
        #[arg(long)]
        recs: PathBuf,
        #[arg(long)]
        heldout: PathBuf,
        /// Average per-target ratios instead of the ratio of sums.
        #[arg(long)]
        per_target: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Information gain of endpoint features on labelled pairs.
    Infogain {
        #[arg(long)]
        observed: PathBuf,
        #[arg(long)]
        heldout: PathBuf,
        #[arg(long, default_value_t = 1)]
        neg_ratio: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate, prune, score, segment, recommend and evaluate for each seed.
    Pipeline(PipelineArgs),
    /// Run the model × rho × k × scorer grid and write one table per (model, rho).
    Grid(GridArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: ModelKind,
    /// ER edge budget.
    #[arg(long)]
    m_edges: Option<usize>,
    /// WS neighbours on each side of the ring.
    #[arg(long)]
    ring_k: Option<usize>,
    #[arg(long)]
    p_rewire: Option<f64>,
    /// BA edges added per new vertex.
    #[arg(long)]
    m_attach: Option<usize>,
}

impl ModelArgs {
    /// Builds the model; with `defaults`, missing parameters fall back to the
    /// grid defaults instead of being an error.
    fn model(&self, n: usize, defaults: bool) -> Result<Model> {
        let base = ExperimentGrid::default();
        let need = |v: Option<usize>, name: &str, d: usize| -> Result<usize> {
            match v {
                Some(v) => Ok(v),
                None if defaults => Ok(d),
                None => Err(Error::InvalidParameter(format!(
                    "--{name} is required for model {}",
                    self.model
                ))),
            }
        };
        Ok(match self.model {
            ModelKind::ErdosRenyi => Model::ErdosRenyi {
                m_edges: need(
                    self.m_edges,
                    "m-edges",
                    n * self.ring_k.unwrap_or(base.ring_k),
                )?,
            },
            ModelKind::WattsStrogatz => Model::WattsStrogatz {
                ring_k: need(self.ring_k, "ring-k", base.ring_k)?,
                p_rewire: match self.p_rewire {
                    Some(p) => p,
                    None if defaults => base.p_rewire,
                    None => {
                        return Err(Error::InvalidParameter(
                            "--p-rewire is required for model ws".into(),
                        ))
                    }
                },
            },
            ModelKind::BarabasiAlbert => Model::BarabasiAlbert {
                m_attach: need(self.m_attach, "m-attach", base.m_attach)?,
            },
        })
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = Feature::Authority)]
    scorer: Feature,
    #[arg(long, default_value_t = CandidatePolicy::IntraCluster)]
    policy: CandidatePolicy,
    /// Length of each recommendation list.
    #[arg(long, default_value_t = 10)]
    top_n: usize,
    /// Comma-separated experiment seeds.
    #[arg(long = "seed", alias = "seeds", value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    kmeans_max_iter: usize,
    #[arg(long)]
    per_target: bool,
    /// Directory for stage artifacts and reports; omitted, nothing is written.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = ModelKind::ALL)]
    models: Vec<ModelKind>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    ring_k: usize,
    #[arg(long, default_value_t = 0.1)]
    p_rewire: f64,
    #[arg(long, default_value_t = 5)]
    m_attach: usize,
    /// ER edge budget; defaults to n * ring-k.
    #[arg(long)]
    m_edges: Option<usize>,
    #[arg(long = "k", value_delimiter = ',', default_values_t = [3usize, 4, 5, 6, 7])]
    k_values: Vec<usize>,
    #[arg(long = "rho", value_delimiter = ',', default_values_t = [0.10, 0.25])]
    rho_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = Feature::ALL)]
    scorers: Vec<Feature>,
    #[arg(long = "seed", alias = "seeds", value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = CandidatePolicy::IntraCluster)]
    policy: CandidatePolicy,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    kmeans_max_iter: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.quiet) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::Stage { stage, source } => eprintln!("error [{stage}]: {source}"),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn save_graph(g: &Graph, prov: &str, path: &Path) -> Result<()> {
    graph::save_edge_list_with(g, &[prov.to_string()], path)
}

/// Feature named in a score file's provenance, if any.
fn feature_of(path: &Path) -> Feature {
    format::read_provenance(path)
        .and_then(|line| {
            line.split_whitespace()
                .filter_map(|t| t.strip_prefix("feature="))
                .find_map(|f| f.parse().ok())
        })
        .unwrap_or(Feature::Degree)
}

fn run(command: Command, quiet: bool) -> Result<()> {
    let say = |msg: String| {
        if !quiet {
            println!("{msg}");
        }
    };
    match command {
        Command::Generate {
            model,
            n,
            seed,
            out,
        } => {
            let model = model.model(n, false)?;
            let g = stage("generate", pipeline::generate_for_seed(model, n, seed))?;
            let prov = format!("{} n={n} seed={seed} stage=generate", model.describe());
            stage("generate", save_graph(&g, &prov, &out))?;
            say(format!(
                "{} vertices, {} edges",
                g.vertex_count(),
                g.edge_count()
            ));
        }
        Command::Score {
            graph: path,
            feature,
            out,
        } => {
            let g = stage("load", graph::read_graph(&path))?;
            let scores = stage("score", pipeline::score_observed(&g, feature))?;
            let prov = provenance(&[
                kv("graph", path.display()),
                kv("feature", feature),
                kv("stage", "score"),
            ]);
            stage("score", format::save_scores(&scores, &prov, &out))?;
            say(format!("scored {} vertices by {feature}", scores.len()));
        }
        Command::Segment {
            graph: path,
            k,
            seed,
            max_iter,
            out,
        } => {
            let g = stage("load", graph::read_graph(&path))?;
            let p = stage("segment", pipeline::segment_for_seed(&g, k, seed, max_iter))?;
            let prov = provenance(&[
                kv("graph", path.display()),
                kv("k", k),
                kv("seed", seed),
                kv("kmeans_max_iter", max_iter),
                kv("stage", "segment"),
            ]);
            stage("segment", format::save_partition(&p, &prov, &out))?;
            say(format!("cluster sizes {:?}", p.sizes));
        }
        Command::Prune {
            graph: path,
            rho,
            seed,
            out_observed,
            out_heldout,
        } => {
            let g = stage("load", graph::read_graph(&path))?;
            let split = stage("prune", pipeline::prune_for_seed(&g, rho, seed))?;
            let prov = provenance(&[
                kv("graph", path.display()),
                kv("rho", rho),
                kv("seed", seed),
                kv("stage", "prune"),
            ]);
            let held = stage(
                "prune",
                Graph::from_edges(g.vertex_count(), &split.held_out),
            )?;
            stage("prune", save_graph(&split.observed, &prov, &out_observed))?;
            stage(
                "prune",
                save_graph(&held, &format!("{prov} part=heldout"), &out_heldout),
            )?;
            say(format!(
                "{} observed, {} held out",
                split.observed.edge_count(),
                split.held_out.len()
            ));
        }
        Command::Recommend {
            observed,
            clusters,
            scores,
            policy,
            n,
            out,
        } => {
            let g = stage("load", graph::read_graph(&observed))?;
            let p = stage("load", format::load_partition(&clusters))?;
            let s = stage("load", format::load_scores(feature_of(&scores), &scores))?;
            let recs = stage("recommend", recommend(&g, &p, &s, policy, n))?;
            let prov = provenance(&[
                kv("observed", observed.display()),
                kv("clusters", clusters.display()),
                kv("scores", scores.display()),
                kv("feature", s.feature),
                kv("policy", policy),
                kv("top_n", n),
                kv("stage", "recommend"),
            ]);
            stage(
                "recommend",
                format::save_recommendations(&recs, &prov, &out),
            )?;
            say(format!("ranked candidates for {} vertices", recs.targets()));
        }
        Command::Evaluate {
            recs,
            heldout,
            per_target,
            out,
        } => {
            let r = stage("load", format::load_recommendations(&recs))?;
            let (_, held) = stage("load", graph::load_edge_list(&heldout))?;
            let averaging = if per_target {
                Averaging::PerTarget
            } else {
                Averaging::Micro
            };
            let report = stage("evaluate", evaluate(&r, &held, averaging))?;
            let config = vec![
                kv("recs", recs.display()),
                kv("heldout", heldout.display()),
                kv("averaging", if per_target { "pertarget" } else { "micro" }),
                kv("targets", report.targets),
            ];
            let report = report.with_config(config);
            stage("evaluate", format::save_report(&report, &out))?;
            say(format!(
                "P@10={} R@10={}",
                format::fmt_sig(report.precision_at(10), 4),
                format::fmt_sig(report.recall_at(10), 4)
            ));
        }
        Command::Infogain {
            observed,
            heldout,
            neg_ratio,
            bins,
            seed,
            out,
        } => {
            let g = stage("load", graph::read_graph(&observed))?;
            let (_, held) = stage("load", graph::load_edge_list(&heldout))?;
            let split = PruneSplit {
                observed: g,
                held_out: held,
                rho: f64::NAN,
                seed,
            };
            let features = stage("score", FeatureSet::compute(&split.observed))?;
            let inst = stage(
                "instances",
                build_instances(
                    &split,
                    &features,
                    neg_ratio,
                    derive_seed(seed, Stage::Instances),
                ),
            )?;
            let ranked = stage("infogain", rank_features(&inst, bins))?;
            let prov = provenance(&[
                kv("observed", observed.display()),
                kv("heldout", heldout.display()),
                kv("neg_ratio", neg_ratio),
                kv("bins", bins),
                kv("seed", seed),
                kv("stage", "infogain"),
            ]);
            stage("infogain", format::save_infogain(&ranked, &prov, &out))?;
            for (f, ig) in &ranked {
                say(format!("{:<16}{}", f.name(), format::fmt_sig(*ig, 4)));
            }
        }
        Command::Pipeline(a) => {
            let cfg = PipelineConfig {
                model: a.model.model(a.n, true)?,
                n: a.n,
                rho: a.rho,
                k: a.k,
                scorer: a.scorer,
                policy: a.policy,
                top_n: a.top_n,
                seeds: a.seeds,
                kmeans_max_iter: a.kmeans_max_iter,
                averaging: if a.per_target {
                    Averaging::PerTarget
                } else {
                    Averaging::Micro
                },
            };
            let outcome = match &a.out {
                Some(dir) => pipeline::run_pipeline_in(&cfg, dir)?,
                None => pipeline::run_pipeline(&cfg)?,
            };
            for (seed, r) in &outcome.per_seed {
                say(format!(
                    "seed {seed}: P@10={} R@10={}",
                    format::fmt_sig(r.precision_at(10), 4),
                    format::fmt_sig(r.recall_at(10), 4)
                ));
            }
            say(format!(
                "mean:   P@10={} R@10={}",
                format::fmt_sig(outcome.mean.precision_at(10), 4),
                format::fmt_sig(outcome.mean.recall_at(10), 4)
            ));
        }
        Command::Grid(a) => {
            let grid = ExperimentGrid {
                models: a.models,
                n: a.n,
                ring_k: a.ring_k,
                p_rewire: a.p_rewire,
                m_attach: a.m_attach,
                er_edges: a.m_edges,
                k_values: a.k_values,
                rho_values: a.rho_values,
                scorers: a.scorers,
                seeds: a.seeds,
                policy: a.policy,
                kmeans_max_iter: a.kmeans_max_iter,
            };
            let results = pipeline::run_grid(&grid, &a.out)?;
            say(format!(
                "{} cells written to {}",
                results.cells.len(),
                a.out.display()
            ));
        }
    }
    Ok(())
}
