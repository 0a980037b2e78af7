use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use leakbench::dataio::{
    self, generate_synthetic_cohort, load_records, preprocess, split_early_late, Format, RecordSet,
};
use leakbench::evaluate::{
    rank_features, run_pipeline, sampler_search, EvalError, PipelineSpec, Placement, SearchMode,
};
use leakbench::features::{extract_feature_matrix, ExtractionReport, FeatureMatrix};
use leakbench::io::{fmt_f64, write_atomic};
use leakbench::oversample::SamplerConfig;
use leakbench::rng::RNG_NAME;
use leakbench::synthexp::{toy2d_figure_data, uniform_leakage_experiment};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::CliError;

pub struct Context {
    pub cfg: ExperimentConfig,
    out: PathBuf,
    resolved: Value,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, out: PathBuf) -> Result<Self, CliError> {
        let resolved = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Context { cfg, out, resolved })
    }

    fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out).map_err(|source| CliError::Io {
            path: self.out.clone(),
            source,
        })?;
        Ok(self.out.join(name))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name)?;
        write_atomic(&path, bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn metadata(&self) -> Value {
        json!({ "leakbench_version": leakbench::VERSION, "rng": RNG_NAME, "config": self.resolved })
    }

    fn write_json(&self, name: &str, result: &impl Serialize) -> Result<(), CliError> {
        let mut doc = self.metadata();
        doc["result"] =
            serde_json::to_value(result).map_err(|e| CliError::Config(e.to_string()))?;
        let mut text =
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn comments(&self) -> Vec<String> {
        vec![
            format!("leakbench_version={}", leakbench::VERSION),
            format!("rng={RNG_NAME}"),
            format!("config={}", self.resolved),
        ]
    }
}

fn load(ctx: &Context) -> Result<RecordSet, CliError> {
    let t = Instant::now();
    let set = match &ctx.cfg.input.path {
        Some(dir) => load_records(dir, Format::CsvV1)?,
        None => generate_synthetic_cohort(&ctx.cfg.cohort_spec())?,
    };
    info!("loaded {} records in {:.1?}", set.len(), t.elapsed());
    Ok(set)
}

fn extract_from(
    ctx: &Context,
    set: &RecordSet,
) -> Result<(FeatureMatrix, ExtractionReport), CliError> {
    let specs = ctx.cfg.feature_specs()?;
    let t = Instant::now();
    let clean = preprocess(set, &ctx.cfg.preprocessing)?;
    info!(
        "preprocessed {} records in {:.1?}",
        clean.len(),
        t.elapsed()
    );
    let t = Instant::now();
    let (m, report) = extract_feature_matrix(&clean, &specs)?;
    info!(
        "extracted {} x {} features in {:.1?}, {} values imputed",
        m.n_rows(),
        m.n_features(),
        t.elapsed(),
        report.imputation_count
    );
    Ok((m, report))
}

fn feature_matrix(ctx: &Context) -> Result<FeatureMatrix, CliError> {
    match &ctx.cfg.input.features {
        Some(path) => Ok(FeatureMatrix::read_csv(path)?),
        None => Ok(extract_from(ctx, &load(ctx)?)?.0),
    }
}

pub fn synth(ctx: &Context) -> Result<(), CliError> {
    let t = Instant::now();
    let set = generate_synthetic_cohort(&ctx.cfg.cohort_spec())?;
    info!("generated {} records in {:.1?}", set.len(), t.elapsed());
    let dir = ctx.path("cohort")?;
    dataio::save_records_with_metadata(&set, &dir, ctx.metadata())?;
    info!("wrote {}", dir.display());
    Ok(())
}

pub fn extract(ctx: &Context) -> Result<(), CliError> {
    ctx.cfg.feature_specs()?;
    let (m, report) = extract_from(ctx, &load(ctx)?)?;
    ctx.write("features.csv", m.to_csv(&ctx.comments()).as_bytes())?;
    ctx.write_json("imputation.json", &report)
}

fn ranking_csv(
    ctx: &Context,
    group: &str,
    m: &FeatureMatrix,
    n_boot: usize,
) -> Result<String, CliError> {
    let (neg, pos) = m.class_counts();
    let mut comments = ctx.comments();
    comments.push(format!(
        "group={group} n_negative={neg} n_positive={pos} n_boot={n_boot}"
    ));
    let mut s: String = comments.iter().map(|c| format!("# {c}\n")).collect();
    s.push_str("rank,feature,mean_auc,std_auc,distance\n");
    if m.has_both_classes() {
        for (i, r) in rank_features(m, n_boot, ctx.cfg.seed)?.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                r.feature,
                fmt_f64(r.mean_auc),
                fmt_f64(r.std_auc),
                fmt_f64(r.distance)
            ));
        }
    } else {
        log::warn!("group {group} lacks a class; AUC fields left empty");
        for name in m.feature_names() {
            s.push_str(&format!(",{name},,,\n"));
        }
    }
    Ok(s)
}

fn subset(m: &FeatureMatrix, set: &RecordSet) -> FeatureMatrix {
    let ids: BTreeSet<&str> = set.iter().map(|r| r.id()).collect();
    let rows: Vec<usize> = (0..m.n_rows())
        .filter(|&i| ids.contains(m.sample_ids()[i].as_str()))
        .collect();
    m.select_rows(&rows)
}

pub fn rank(ctx: &Context) -> Result<(), CliError> {
    ctx.cfg.feature_specs()?;
    let n_boot = ctx.cfg.rank.n_boot;
    if n_boot == 0 {
        return Err(CliError::Config("rank.n_boot must be at least 1".into()));
    }
    let set = load(ctx)?;
    let m = match &ctx.cfg.input.features {
        Some(path) => FeatureMatrix::read_csv(path)?,
        None => extract_from(ctx, &set)?.0,
    };
    let (early, late) = split_early_late(&set);
    for (group, part) in [
        ("all", m.clone()),
        ("early", subset(&m, &early)),
        ("late", subset(&m, &late)),
    ] {
        let t = Instant::now();
        let csv = ranking_csv(ctx, group, &part, n_boot)?;
        info!(
            "ranked group {group} ({} rows) in {:.1?}",
            part.n_rows(),
            t.elapsed()
        );
        ctx.write(&format!("ranking_{group}.csv"), csv.as_bytes())?;
    }
    Ok(())
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let spec = ctx.cfg.pipeline_spec();
    spec.validate()?;
    let m = feature_matrix(ctx)?;
    let report = run_pipeline(&m, &spec)?;
    info!(
        "pipeline finished in {:.1?}\n{}",
        report.wall_time,
        report.to_text()
    );
    let mut roc: String = ctx.comments().iter().map(|c| format!("# {c}\n")).collect();
    roc.push_str("fold,threshold,fpr,tpr\n");
    for (fold, p) in report.roc()? {
        roc.push_str(&format!(
            "{fold},{},{},{}\n",
            fmt_f64(p.threshold),
            fmt_f64(p.fpr),
            fmt_f64(p.tpr)
        ));
    }
    ctx.write_json("metrics.json", &report)?;
    ctx.write("roc.csv", roc.as_bytes())
}

pub fn leakage_demo(ctx: &Context) -> Result<(), CliError> {
    let params = ctx.cfg.leakage_params();
    params.sampler.validate().map_err(EvalError::from)?;
    params.classifier.validate().map_err(EvalError::from)?;
    let t = Instant::now();
    let result = uniform_leakage_experiment(&params)?;
    info!(
        "auc none {:.4} before-split {:.4} after-split {:.4} in {:.1?}",
        result.auc_none,
        result.auc_before,
        result.auc_after,
        t.elapsed()
    );
    let toy = &ctx.cfg.leakage.toy;
    let toy2d = toy2d_figure_data(toy.n, toy.n_pos, &toy.sampler, ctx.cfg.seed)?;
    ctx.write_json("leakage.json", &result)?;
    ctx.write("toy2d.csv", toy2d.to_csv(&ctx.comments()).as_bytes())
}

#[derive(Serialize)]
struct SearchRow {
    classifier: leakbench::classify::ClassifierSpec,
    none: leakbench::evaluate::MetricsReport,
    default: leakbench::evaluate::MetricsReport,
    tuned: leakbench::evaluate::SearchReport,
    best: leakbench::evaluate::SearchReport,
}

pub fn search(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let first = &cfg.search.grids[0];
    let default_sampler = SamplerConfig {
        standardize: first.standardize,
        ..SamplerConfig::new(first.algorithm)
    };
    for c in &cfg.search.classifiers {
        c.validate().map_err(EvalError::from)?;
    }
    for g in &cfg.search.grids {
        for cand in g.candidates() {
            cand.validate().map_err(EvalError::from)?;
        }
    }
    if cfg.search.inner_folds < 2 {
        return Err(CliError::Config(
            "search.inner_folds must be at least 2".into(),
        ));
    }
    let m = feature_matrix(ctx)?;
    let base = cfg.pipeline_spec();
    let mut rows = Vec::new();
    for classifier in &cfg.search.classifiers {
        let t = Instant::now();
        let spec = |placement, sampler: SamplerConfig| PipelineSpec {
            classifier: classifier.clone(),
            placement,
            sampler,
            allow_leakage: false,
            ..base.clone()
        };
        let none = run_pipeline(&m, &spec(Placement::None, SamplerConfig::default()))?;
        let default = run_pipeline(&m, &spec(Placement::AfterSplit, default_sampler.clone()))?;
        let tuned = sampler_search(&m, &cfg.search_spec(classifier, SearchMode::TunedSame))?;
        let best = sampler_search(&m, &cfg.search_spec(classifier, SearchMode::BestOverall))?;
        info!(
            "{}: none {:.3} default {:.3} tuned {:.3} best {:.3} in {:.1?}",
            classifier.kind(),
            none.aggregate.auc.mean,
            default.aggregate.auc.mean,
            tuned.outer_auc.mean,
            best.outer_auc.mean,
            t.elapsed()
        );
        rows.push(SearchRow {
            classifier: classifier.clone(),
            none,
            default,
            tuned,
            best,
        });
    }

    let mut csv: String = ctx.comments().iter().map(|c| format!("# {c}\n")).collect();
    csv.push_str(
        "classifier,none_auc,none_std,default_auc,default_std,tuned_auc,tuned_std,best_auc,best_std,default_sampler,tuned_sampler,best_sampler\n",
    );
    for r in &rows {
        let cells = [
            r.none.aggregate.auc.mean,
            r.none.aggregate.auc.std,
            r.default.aggregate.auc.mean,
            r.default.aggregate.auc.std,
            r.tuned.outer_auc.mean,
            r.tuned.outer_auc.std,
            r.best.outer_auc.mean,
            r.best.outer_auc.std,
        ]
        .map(fmt_f64)
        .join(",");
        csv.push_str(&format!(
            "{},{cells},\"{}\",\"{}\",\"{}\"\n",
            r.classifier.kind(),
            default_sampler.label(),
            r.tuned.best_config.label(),
            r.best.best_config.label()
        ));
    }
    ctx.write("search.csv", csv.as_bytes())?;
    ctx.write_json("search.json", &rows)
}
