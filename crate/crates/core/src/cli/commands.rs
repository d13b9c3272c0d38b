use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use super::manifest::{hash_bytes, Recorder};
use super::{Failure, Manifest};
use crate::classifier::{self, head, split, Partition, SplitSpec, TrainParams};
use crate::cluster::{self, ClusterParams};
use crate::corpus::{self, qemb, tsv, AlignedCorpus, EmbeddingSet, Label, LabelRecord, LabelSource, QueryRecord};
use crate::error::Error;
use crate::interpret::{self, MergeMap, SummaryOptions};
use crate::reduce::{self, ReducerConfig};
use crate::sampling;
use crate::search::{self, DbcvSpace, GridSpec, SweepContext, SweepOptions};
use crate::validate;

type Outcome = Result<Manifest, Failure>;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align queries, embeddings and optional labels on their common ids.
    Ingest(IngestArgs),
    /// Pick annotation candidates by k-means++ seeding or centroid snapping.
    Sample(SampleArgs),
    /// Turn repeated weak-label votes into majority labels.
    Votes(VotesArgs),
    /// Stratified train / validation / test split of a label file.
    Split(SplitArgs),
    /// Fit the logistic head on the training partition.
    Train(TrainArgs),
    /// Confusion metrics, bootstrap intervals and optional rater agreement.
    Eval(EvalArgs),
    /// Label every query with a trained head and report the positive share.
    Predict(PredictArgs),
    /// Per-class first-word frequency tables.
    Firstwords(FirstwordsArgs),
    /// UMAP projection of an embedding file.
    Reduce(ReduceArgs),
    /// HDBSCAN over an embedding file.
    Cluster(ClusterArgs),
    /// DBCV of a cluster labelling.
    Dbcv(DbcvArgs),
    /// Score every cell of the UMAP x HDBSCAN grid.
    Grid(GridArgs),
    /// Re-run top grid cells under several seeds.
    Consistency(ConsistencyArgs),
    /// Choose a configuration and seed from consistency results.
    Select(SelectArgs),
    /// Per-cluster review sheets: representative query, terms, samples.
    Interpret(InterpretArgs),
    /// Merge clusters into categories and themes and export the taxonomy.
    Export(ExportArgs),
}

impl Command {
    pub fn execute(&self) -> Outcome {
        match self {
            Command::Ingest(a) => ingest(a),
            Command::Sample(a) => sample(a),
            Command::Votes(a) => votes(a),
            Command::Split(a) => split_cmd(a),
            Command::Train(a) => train(a),
            Command::Eval(a) => eval(a),
            Command::Predict(a) => predict(a),
            Command::Firstwords(a) => firstwords(a),
            Command::Reduce(a) => reduce_cmd(a),
            Command::Cluster(a) => cluster_cmd(a),
            Command::Dbcv(a) => dbcv(a),
            Command::Grid(a) => grid(a),
            Command::Consistency(a) => consistency(a),
            Command::Select(a) => select(a),
            Command::Interpret(a) => interpret_cmd(a),
            Command::Export(a) => export(a),
        }
    }
}

// ---- shared loaders ----

fn load_embeddings(rec: &mut Recorder, role: &str, path: &Path) -> Result<EmbeddingSet, Failure> {
    Ok(qemb::decode(&rec.read(role, path)?)?)
}

fn load_queries(rec: &mut Recorder, path: &Path) -> Result<Vec<QueryRecord>, Failure> {
    Ok(tsv::parse_queries(&rec.read_text("queries", path)?)?)
}

fn load_labels(rec: &mut Recorder, role: &str, path: &Path) -> Result<Vec<LabelRecord>, Failure> {
    Ok(tsv::parse_labels(&rec.read_text(role, path)?)?)
}

fn load_cluster_labels(rec: &mut Recorder, path: &Path) -> Result<Vec<(u64, i32)>, Failure> {
    Ok(cluster::parse_cluster_labels(&rec.read_text("labels", path)?)?)
}

fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serialises");
    s.push('\n');
    s.into_bytes()
}

/// Embeddings restricted to ids with query text, when a query file is given.
fn corpus_embeddings(
    rec: &mut Recorder,
    corpus: &Path,
    queries: Option<&PathBuf>,
) -> Result<EmbeddingSet, Failure> {
    let emb = load_embeddings(rec, "corpus", corpus)?;
    match queries {
        Some(q) => {
            let queries = load_queries(rec, q)?;
            Ok(corpus::align(&queries, &emb, None)?.embeddings)
        }
        None => Ok(emb),
    }
}

/// Cluster labels in the row order of `ids`; every id needs one.
fn labels_for(ids: &[u64], pairs: &[(u64, i32)]) -> Result<Vec<i32>, Failure> {
    let by_id: HashMap<u64, i32> = pairs.iter().copied().collect();
    ids.iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| Failure::new("FormatError", format!("no cluster label for id {id}")))
        })
        .collect()
}

fn aligned_with_clusters(
    rec: &mut Recorder,
    queries: &Path,
    corpus: &Path,
    labels: &Path,
) -> Result<(AlignedCorpus, Vec<i32>), Failure> {
    let q = load_queries(rec, queries)?;
    let emb = load_embeddings(rec, "corpus", corpus)?;
    let aligned = corpus::align(&q, &emb, None)?;
    let pairs = load_cluster_labels(rec, labels)?;
    let labels = labels_for(aligned.embeddings.ids(), &pairs)?;
    Ok((aligned, labels))
}

/// Rows of `emb` holding `ids`, in that order.
fn rows_of(emb: &EmbeddingSet, ids: &[u64]) -> Result<Vec<usize>, Failure> {
    let index: HashMap<u64, usize> = emb.ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
    ids.iter()
        .map(|id| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Failure::new("FormatError", format!("id {id} has no embedding")))
        })
        .collect()
}

fn label_map(records: &[LabelRecord]) -> HashMap<u64, Label> {
    records.iter().map(|r| (r.id, r.label)).collect()
}

fn gold_of(labels: &HashMap<u64, Label>, ids: &[u64]) -> Result<Vec<Label>, Failure> {
    ids.iter()
        .map(|id| {
            labels
                .get(id)
                .copied()
                .ok_or_else(|| Failure::new("FormatError", format!("id {id} has no label")))
        })
        .collect()
}

/// Ids in one partition of a split file, in file order.
fn partition_ids(rec: &mut Recorder, path: &Path, part: Partition) -> Result<Vec<u64>, Failure> {
    let rows = split::parse_split(&rec.read_text("split", path)?)?;
    Ok(rows.into_iter().filter(|r| r.1 == part).map(|r| r.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionArg {
    Train,
    Val,
    Test,
}

impl From<PartitionArg> for Partition {
    fn from(p: PartitionArg) -> Self {
        match p {
            PartitionArg::Train => Partition::Train,
            PartitionArg::Val => Partition::Val,
            PartitionArg::Test => Partition::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceArg {
    Reduced,
    Original,
}

impl From<SpaceArg> for DbcvSpace {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Reduced => DbcvSpace::Reduced,
            SpaceArg::Original => DbcvSpace::Original,
        }
    }
}

// ---- corpus ----

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub queries: PathBuf,
    /// Embedding file (.qemb).
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out_queries: PathBuf,
    #[arg(long)]
    pub out_corpus: PathBuf,
    #[arg(long, requires = "labels")]
    pub out_labels: Option<PathBuf>,
    /// Require the embedding file to be one row per query, in query order,
    /// at this dimension (checks an encoder's output).
    #[arg(long)]
    pub expect_dim: Option<usize>,
}

fn ingest(a: &IngestArgs) -> Outcome {
    let mut rec = Recorder::new("ingest", a);
    let queries = load_queries(&mut rec, &a.queries)?;
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    if let Some(dim) = a.expect_dim {
        qemb::check_encoded(&emb, dim, &queries)?;
    }
    let labels = match &a.labels {
        Some(p) => Some(load_labels(&mut rec, "labels", p)?),
        None => None,
    };
    let aligned = corpus::align(&queries, &emb, labels.as_deref())?;
    rec.write("queries", &a.out_queries, tsv::format_queries(&aligned.queries).as_bytes())?;
    rec.write("corpus", &a.out_corpus, &qemb::encode(&aligned.embeddings))?;
    let labelled: Vec<LabelRecord> = aligned
        .queries
        .iter()
        .filter_map(|q| aligned.labels.as_ref()?.get(&q.id).cloned())
        .collect();
    if let Some(p) = &a.out_labels {
        rec.write("labels", p, tsv::format_labels(&labelled).as_bytes())?;
    }
    Ok(rec.finish(json!({
        "n": aligned.len(),
        "dim": aligned.embeddings.dim(),
        "dropped": aligned.dropped,
        "labelled": aligned.labels.as_ref().map(|_| labelled.len()),
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct FirstwordsArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Keep this many rows per class.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn firstwords(a: &FirstwordsArgs) -> Outcome {
    let mut rec = Recorder::new("firstwords", a);
    let queries = load_queries(&mut rec, &a.queries)?;
    let labels = load_labels(&mut rec, "labels", &a.labels)?;
    let mut stats = corpus::first_word_stats(&queries, &label_map(&labels));
    if let Some(top) = a.top {
        stats.tables.iter_mut().for_each(|t| t.rows.truncate(top));
    }
    rec.write("table", &a.out, &json_bytes(&stats))?;
    let totals: BTreeMap<String, usize> = stats
        .tables
        .iter()
        .map(|t| (t.label.to_string(), t.total))
        .collect();
    Ok(rec.finish(json!({ "per_class": totals, "unlabelled": stats.unlabelled })))
}

// ---- sampling ----

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of k-means++ picks.
    #[arg(long, required_unless_present = "centroids", conflicts_with = "centroids")]
    pub k: Option<usize>,
    /// Snap these centroids (.qemb) to their nearest queries instead.
    #[arg(long)]
    pub centroids: Option<PathBuf>,
    #[arg(long, required_unless_present = "centroids")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn sample(a: &SampleArgs) -> Outcome {
    let mut rec = Recorder::new("sample", a);
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let (rows, duplicates) = match (&a.centroids, a.k, a.seed) {
        (Some(c), _, _) => {
            let centroids = load_embeddings(&mut rec, "centroids", c)?;
            let snapped = sampling::snap_to_nearest(centroids.matrix(), emb.matrix())?;
            (snapped.unique(), snapped.duplicates.len())
        }
        (None, Some(k), Some(seed)) => (sampling::kmeanspp_select(emb.matrix(), k, seed)?, 0),
        _ => unreachable!("clap enforces k and seed without centroids"),
    };
    let ids: Vec<u64> = rows.iter().map(|&r| emb.ids()[r]).collect();
    rec.write("ids", &a.out, sampling::format_id_list(&ids).as_bytes())?;
    Ok(rec.finish(json!({ "selected": ids.len(), "duplicate_snaps": duplicates })))
}

#[derive(Debug, Args, Serialize)]
pub struct VotesArgs {
    /// `id\tvote1..voteN` file; rows with `abstain` are skipped.
    #[arg(long)]
    pub votes: PathBuf,
    /// Positive votes needed; defaults to a strict majority.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn votes(a: &VotesArgs) -> Outcome {
    let mut rec = Recorder::new("votes", a);
    let table = sampling::parse_votes(&rec.read_text("votes", &a.votes)?)?;
    let summary = sampling::aggregate_votes(&table, a.threshold)?;
    rec.write("labels", &a.out, tsv::format_labels(&summary.labels).as_bytes())?;
    let positives = summary.labels.iter().filter(|r| r.label.is_positive()).count();
    Ok(rec.finish(json!({
        "labelled": summary.labels.len(),
        "positives": positives,
        "abstained": summary.abstained,
        "histogram": summary.histogram,
    })))
}

// ---- classifier ----

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub train_n: usize,
    #[arg(long, default_value_t = 200)]
    pub val_n: usize,
    #[arg(long, default_value_t = 800)]
    pub test_n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn split_cmd(a: &SplitArgs) -> Outcome {
    let mut rec = Recorder::new("split", a);
    let labels = load_labels(&mut rec, "labels", &a.labels)?;
    let classes: Vec<Label> = labels.iter().map(|r| r.label).collect();
    let ids: Vec<u64> = labels.iter().map(|r| r.id).collect();
    let spec = SplitSpec {
        train_n: a.train_n,
        val_n: a.val_n,
        test_n: a.test_n,
        seed: a.seed,
    };
    let s = classifier::stratified_split(&classes, &spec)?;
    rec.write("split", &a.out, split::format_split(&ids, &s).as_bytes())?;
    let pos = |rows: &[usize]| rows.iter().filter(|&&r| classes[r].is_positive()).count();
    Ok(rec.finish(json!({
        "train": { "n": s.train.len(), "positives": pos(&s.train) },
        "val": { "n": s.val.len(), "positives": pos(&s.val) },
        "test": { "n": s.test.len(), "positives": pos(&s.test) },
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long, value_enum, default_value_t = PartitionArg::Train)]
    pub partition: PartitionArg,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 2e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn train(a: &TrainArgs) -> Outcome {
    let mut rec = Recorder::new("train", a);
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let labels = label_map(&load_labels(&mut rec, "labels", &a.labels)?);
    let ids = partition_ids(&mut rec, &a.split, a.partition.into())?;
    let rows = rows_of(&emb, &ids)?;
    let gold = gold_of(&labels, &ids)?;
    let features = emb.select(&rows);
    let params = TrainParams {
        epochs: a.epochs,
        learning_rate: a.lr,
        batch_size: a.batch_size,
        seed: a.seed,
    };
    let (model, report) = classifier::train_head(features.matrix(), &gold, &params)?;
    rec.write("model", &a.out, &head::encode_model(&model))?;
    Ok(rec.finish(json!({
        "n_train": ids.len(),
        "dim": model.dim(),
        "losses": report.losses,
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Gold labels.
    #[arg(long)]
    pub labels: PathBuf,
    /// Evaluate one partition of this split; otherwise every labelled query.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PartitionArg::Test)]
    pub partition: PartitionArg,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub seed: u64,
    /// Second rater's labels; Cohen's kappa against `--labels` on shared ids.
    #[arg(long)]
    pub agreement: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn eval(a: &EvalArgs) -> Outcome {
    let mut rec = Recorder::new("eval", a);
    let model = head::decode_model(&rec.read("model", &a.model)?)?;
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let gold_records = load_labels(&mut rec, "labels", &a.labels)?;
    let labels = label_map(&gold_records);
    let ids: Vec<u64> = match &a.split {
        Some(p) => partition_ids(&mut rec, p, a.partition.into())?,
        None => gold_records.iter().map(|r| r.id).collect(),
    };
    let rows = rows_of(&emb, &ids)?;
    let gold = gold_of(&labels, &ids)?;
    let preds = classifier::predict(&model, &emb.select(&rows))?;
    let pred: Vec<Label> = preds.iter().map(|p| p.label).collect();
    let metrics = classifier::evaluate(&pred, &gold)?;
    let ci = classifier::bootstrap_ci(&pred, &gold, a.resamples, a.level, a.seed)?;
    let kappa = match &a.agreement {
        Some(p) => {
            let other = label_map(&load_labels(&mut rec, "agreement", p)?);
            let shared: Vec<u64> = gold_records.iter().map(|r| r.id).filter(|id| other.contains_key(id)).collect();
            if shared.is_empty() {
                return Err(Error::NoOverlap.into());
            }
            let x = gold_of(&labels, &shared)?;
            let y = gold_of(&other, &shared)?;
            Some(json!({ "n": shared.len(), "kappa": classifier::cohens_kappa(&x, &y)? }))
        }
        None => None,
    };
    let report = json!({ "n": ids.len(), "metrics": metrics, "bootstrap": ci, "agreement": kappa });
    rec.write("metrics", &a.out, &json_bytes(&report))?;
    Ok(rec.finish(json!({
        "n": ids.len(),
        "accuracy": metrics.accuracy,
        "f1": metrics.f1,
        "kappa": kappa.as_ref().map(|k| k["kappa"].clone()),
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Predicted labels, in label-file format.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional `id\tprobability` file.
    #[arg(long)]
    pub probabilities: Option<PathBuf>,
}

fn predict(a: &PredictArgs) -> Outcome {
    let mut rec = Recorder::new("predict", a);
    let model = head::decode_model(&rec.read("model", &a.model)?)?;
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let preds = classifier::predict(&model, &emb)?;
    let records: Vec<LabelRecord> = preds
        .iter()
        .map(|p| LabelRecord::new(p.id, p.label, LabelSource::Predicted, None).expect("valid predicted record"))
        .collect();
    rec.write("labels", &a.out, tsv::format_labels(&records).as_bytes())?;
    if let Some(p) = &a.probabilities {
        let mut text = String::from("id\tprobability\n");
        for pr in &preds {
            text.push_str(&format!("{}\t{}\n", pr.id, pr.probability));
        }
        rec.write("probabilities", p, text.as_bytes())?;
    }
    let positives = preds.iter().filter(|p| p.label.is_positive()).count();
    let total = preds.len();
    let share = if total == 0 { 0.0 } else { positives as f64 / total as f64 * 100.0 };
    log::info!("{positives} of {total} queries predicted positive ({share:.1}%)");
    Ok(rec.finish(json!({
        "positives": positives,
        "total": total,
        "positive_share_percent": share,
    })))
}

// ---- reduce / cluster / validate ----

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub dims: usize,
    #[arg(long)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    pub min_dist: f64,
    /// Defaults to 500, or 200 above 10,000 points.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn reduce_cmd(a: &ReduceArgs) -> Outcome {
    let mut rec = Recorder::new("reduce", a);
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let cfg = ReducerConfig {
        out_dims: a.dims,
        n_neighbors: a.neighbors,
        min_dist: a.min_dist,
        n_epochs: a.epochs,
        seed: a.seed,
    };
    let reduced = reduce::reduce(&emb, &cfg)?;
    let out = reduced.to_embedding_set(emb.ids())?;
    rec.write("reduced", &a.out, &qemb::encode(&out))?;
    Ok(rec.finish(json!({
        "n": out.len(),
        "dims": out.dim(),
        "epochs": cfg.epochs_for(emb.len()),
        "init": reduced.init,
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    /// Usually a reduced embedding file.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub min_cluster_size: usize,
    /// Defaults to the minimum cluster size.
    #[arg(long)]
    pub min_samples: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Condensed tree as JSON.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

fn cluster_cmd(a: &ClusterArgs) -> Outcome {
    let mut rec = Recorder::new("cluster", a);
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let params = ClusterParams::new(a.min_cluster_size, a.min_samples.unwrap_or(a.min_cluster_size));
    let h = cluster::hdbscan(emb.matrix(), &params)?;
    let labels = &h.labels.labels;
    rec.write("labels", &a.out, cluster::format_cluster_labels(emb.ids(), labels)?.as_bytes())?;
    if let Some(p) = &a.tree {
        rec.write("tree", p, &json_bytes(&h.tree_export()))?;
    }
    let m = cluster::cluster_metrics(labels)?;
    Ok(rec.finish(json!({
        "n": labels.len(),
        "n_clusters": m.n_clusters,
        "noise_fraction": m.noise_fraction,
        "median_cluster_size": m.median_cluster_size,
        "sizes": h.labels.sizes,
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct DbcvArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// `id\tcluster` file.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn dbcv(a: &DbcvArgs) -> Outcome {
    let mut rec = Recorder::new("dbcv", a);
    let emb = load_embeddings(&mut rec, "corpus", &a.corpus)?;
    let pairs = load_cluster_labels(&mut rec, &a.labels)?;
    let labels = labels_for(emb.ids(), &pairs)?;
    let report = validate::dbcv(emb.matrix(), &labels)?;
    rec.write("report", &a.out, &json_bytes(&report))?;
    Ok(rec.finish(json!({ "dbcv": report.overall, "n_clusters": report.per_cluster.len() })))
}

// ---- search ----

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SpaceArg::Reduced)]
    pub dbcv_space: SpaceArg,
    #[arg(long, default_value_t = 0.1)]
    pub min_dist: f64,
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl SweepArgs {
    fn options(&self) -> SweepOptions {
        SweepOptions {
            dbcv_space: self.dbcv_space.into(),
            min_dist: self.min_dist,
            n_epochs: self.epochs,
        }
    }
}

/// The grid CSV hash ignores timings so reruns hash identically.
fn grid_hash(results: &[search::ConfigResult]) -> String {
    let timeless: Vec<search::ConfigResult> = results
        .iter()
        .cloned()
        .map(|mut r| {
            r.wall_time_s = 0.0;
            r
        })
        .collect();
    hash_bytes(search::format_grid_csv(&timeless).as_bytes())
}

fn write_grid(rec: &mut Recorder, role: &str, path: &Path, results: &[search::ConfigResult]) -> Result<(), Failure> {
    let text = search::format_grid_csv(results);
    rec.write_hashed(role, path, text.as_bytes(), grid_hash(results), vec!["wall_time_s".into()])
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Restrict to queries present in this file.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [10, 25, 50])]
    pub neighbors: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [25, 50, 100, 200])]
    pub min_cluster_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 1.0])]
    pub min_samples_fractions: Vec<f64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 10)]
    pub min_clusters: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Top-ranked rows, same format as `--out`.
    #[arg(long)]
    pub top_out: Option<PathBuf>,
}

fn grid(a: &GridArgs) -> Outcome {
    let mut rec = Recorder::new("grid", a);
    let emb = corpus_embeddings(&mut rec, &a.corpus, a.queries.as_ref())?;
    let spec = GridSpec {
        dims: a.dims.clone(),
        neighbors: a.neighbors.clone(),
        min_cluster_sizes: a.min_cluster_sizes.clone(),
        min_samples_fractions: a.min_samples_fractions.clone(),
        seed: a.seed,
    };
    let configs = search::enumerate_grid(&spec)?;
    let ctx = SweepContext::for_grid(&emb, &spec, a.sweep.options())?;
    let results = ctx.run_grid(&configs, &[a.seed]);
    write_grid(&mut rec, "grid", &a.out, &results)?;
    let top = search::rank_top(&results, a.top_k, a.min_clusters);
    if let Some(p) = &a.top_out {
        write_grid(&mut rec, "top", p, &top)?;
    }
    Ok(rec.finish(json!({
        "rows": results.len(),
        "failed": results.iter().filter(|r| r.error.is_some()).count(),
        "top_config_ids": top.iter().map(|r| r.config_id).collect::<Vec<_>>(),
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct ConsistencyArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Grid CSV the configurations are taken from.
    #[arg(long)]
    pub grid: PathBuf,
    /// Config ids to re-run; defaults to the grid's top-ranked cells.
    #[arg(long, value_delimiter = ',')]
    pub configs: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 10)]
    pub min_clusters: usize,
    /// Seeds every configuration is re-run under, e.g. `0,1,2,3,4,42`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Every (config, seed) row, in grid CSV format.
    #[arg(long)]
    pub seed_results: PathBuf,
}

fn consistency(a: &ConsistencyArgs) -> Outcome {
    let mut rec = Recorder::new("consistency", a);
    let emb = corpus_embeddings(&mut rec, &a.corpus, a.queries.as_ref())?;
    let grid = search::parse_grid_csv(&rec.read_text("grid", &a.grid)?)?;
    let chosen: Vec<search::ConfigResult> = match &a.configs {
        Some(ids) => ids
            .iter()
            .map(|id| {
                grid.iter()
                    .find(|r| r.config_id == *id)
                    .cloned()
                    .ok_or_else(|| Failure::new("ConfigError", format!("config {id} is not in the grid file")))
            })
            .collect::<Result<_, _>>()?,
        None => search::rank_top(&grid, a.top_k, a.min_clusters),
    };
    if chosen.is_empty() {
        return Err(Failure::new("ConfigError", "no grid cell qualifies for a consistency run"));
    }
    let configs: Vec<search::GridConfig> = chosen.iter().map(|r| r.config()).collect();
    if a.seeds.len() < 2 {
        return Err(Error::Config("consistency needs at least two seeds".into()).into());
    }
    let max_neighbors = configs.iter().map(|c| c.umap_neighbors).max().unwrap_or(2);
    let ctx = SweepContext::new(&emb, max_neighbors, a.sweep.options())?;
    let results = ctx.run_grid(&configs, &a.seeds);
    let reports = configs
        .iter()
        .map(|c| search::ConsistencyReport::from_results(c, &results))
        .collect::<crate::Result<Vec<_>>>()?;
    rec.write("consistency", &a.out, search::format_consistency_csv(&reports).as_bytes())?;
    write_grid(&mut rec, "seed_results", &a.seed_results, &results)?;
    Ok(rec.finish(json!({
        "configs": configs.iter().map(|c| c.config_id).collect::<Vec<_>>(),
        "seeds": a.seeds,
        "runs": results.len(),
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub consistency: PathBuf,
    /// Per-seed rows written by `consistency`; enables seed choice.
    #[arg(long)]
    pub seed_results: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn select(a: &SelectArgs) -> Outcome {
    let mut rec = Recorder::new("select", a);
    let reports = search::parse_consistency_csv(&rec.read_text("consistency", &a.consistency)?)?;
    let selection = search::select_config(&reports, a.threshold)?;
    let config = reports
        .iter()
        .find(|r| r.config.config_id == selection.config_id)
        .map(|r| r.config)
        .expect("selected config comes from the reports");
    let seed = match &a.seed_results {
        Some(p) => {
            let rows = search::parse_grid_csv(&rec.read_text("seed_results", p)?)?;
            let per_seed: Vec<(u64, f64)> = rows
                .iter()
                .filter(|r| r.config_id == selection.config_id)
                .filter_map(|r| r.dbcv.map(|d| (r.seed, d)))
                .collect();
            Some(search::select_seed(&per_seed)?)
        }
        None => None,
    };
    let doc = json!({ "config": config, "selection": selection, "seed": seed });
    rec.write("selection", &a.out, &json_bytes(&doc))?;
    Ok(rec.finish(json!({
        "config_id": selection.config_id,
        "seed": seed.as_ref().map(|s| s.seed),
    })))
}

// ---- interpret ----

#[derive(Debug, Args, Serialize)]
pub struct InterpretArgs {
    #[arg(long)]
    pub queries: PathBuf,
    /// Original-space embeddings.
    #[arg(long)]
    pub corpus: PathBuf,
    /// `id\tcluster` file.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub terms: usize,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Markdown review document.
    #[arg(long)]
    pub out: PathBuf,
    /// Same content as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn interpret_cmd(a: &InterpretArgs) -> Outcome {
    let mut rec = Recorder::new("interpret", a);
    let (aligned, labels) = aligned_with_clusters(&mut rec, &a.queries, &a.corpus, &a.labels)?;
    let opts = SummaryOptions {
        n_terms: a.terms,
        n_samples: a.samples,
        seed: a.seed,
    };
    let summaries = interpret::summarize(&aligned.queries, &aligned.embeddings, &labels, &opts)?;
    rec.write("review", &a.out, interpret::export_markdown(&summaries).as_bytes())?;
    if let Some(p) = &a.csv {
        rec.write("review_csv", p, interpret::export_csv(&summaries)?.as_bytes())?;
    }
    let noise = labels.iter().filter(|&&l| l == interpret::NOISE).count();
    Ok(rec.finish(json!({
        "n": labels.len(),
        "clusters": summaries.iter().filter(|s| s.cluster_id != interpret::NOISE).count(),
        "noise": noise,
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// `cluster_id\tcategory\ttheme`; without it every cluster is its own
    /// category under `--default-theme`.
    #[arg(long)]
    pub merge_map: Option<PathBuf>,
    /// Declared theme list; merge-map themes outside it are rejected.
    #[arg(long, value_delimiter = ',')]
    pub themes: Option<Vec<String>>,
    #[arg(long, default_value = "unassigned")]
    pub default_theme: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Theme shares (noise included) as JSON.
    #[arg(long)]
    pub shares: Option<PathBuf>,
}

fn export(a: &ExportArgs) -> Outcome {
    let mut rec = Recorder::new("export", a);
    let (aligned, labels) = aligned_with_clusters(&mut rec, &a.queries, &a.corpus, &a.labels)?;
    let map = match &a.merge_map {
        Some(p) => interpret::parse_merge_map(&rec.read_text("merge_map", p)?)?,
        None => MergeMap::identity(labels.iter().copied(), &a.default_theme),
    };
    if let Some(themes) = &a.themes {
        map.check_themes(themes)?;
    }
    let taxonomy = interpret::build_taxonomy(&aligned.queries, &aligned.embeddings, &labels, &map)?;
    let mut doc = interpret::export_taxonomy_json(&taxonomy);
    doc.push('\n');
    rec.write("taxonomy", &a.out, doc.as_bytes())?;
    let shares = interpret::theme_shares(&taxonomy, labels.len())?;
    if let Some(p) = &a.shares {
        rec.write("shares", p, &json_bytes(&shares))?;
    }
    Ok(rec.finish(json!({
        "themes": taxonomy.themes.len(),
        "categories": taxonomy.themes.iter().map(|t| t.children.len()).sum::<usize>(),
        "noise": taxonomy.noise,
        "total": taxonomy.total,
        "noise_percent": shares.noise_percent,
    })))
}
