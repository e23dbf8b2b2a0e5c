use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::config::{AuditConfig, PipelineConfig, PostprocessConfig, PreprocessConfig, ProbeSource};
use super::report::{
    ComparisonRow, DataSummary, DatasetMetrics, Knobs, ModelMetrics, PipelineReport, PreprocessSummary, RoutingReport,
};
use super::{Artifacts, PipelineError, TOOL, VERSION};
use crate::audit::{findings_jsonl, Auditor, Probe};
use crate::classifiers::{train, TrainerConfig};
use crate::data::{bin_numeric, empirical_joint, generate_synthetic, load_csv, BinEdges, ColumnKind, Dataset, Schema};
use crate::massage::massage;
use crate::metrics::{consistency_on_points, disparate_impact, FairnessReport};
use crate::neighbors::FeatureSpace;
use crate::optimize::{apply_repair, check_repair_map, solve_repair_map};
use crate::postprocess::{decisions_csv, ensemble_disagreement, reject_option, Decisions, RejectOptionConfig};
use crate::rng::{keyed_rng, streams};
use crate::routing::{simulate, verify_blindness, RoutingConfig};
use crate::smote::{equalizing_count, smote_augment};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: PipelineReport,
    /// Everything except the manifest, keyed by file name.
    pub artifacts: Artifacts,
    /// Human-readable stage log.
    pub log: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub rows: Vec<ComparisonRow>,
    /// `comparison.csv` plus each stack's artifacts under `stacks/`.
    pub artifacts: Artifacts,
    pub log: Vec<String>,
}

struct Prepared {
    source: String,
    generated: bool,
    rows: usize,
    train: Dataset,
    test: Dataset,
}

impl Prepared {
    fn eval(&self) -> &Dataset {
        if self.test.is_empty() {
            &self.train
        } else {
            &self.test
        }
    }
}

struct Stack<'a> {
    pre: Option<&'a PreprocessConfig>,
    train: Option<&'a TrainerConfig>,
    post: Option<&'a PostprocessConfig>,
    audit: Option<AuditConfig>,
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact serializes");
    out.push(b'\n');
    out
}

fn ingest(config: &PipelineConfig) -> Result<Prepared, PipelineError> {
    let fail = |e: &dyn std::fmt::Display| PipelineError::stage("ingest", e);
    let (data, source, generated) = match (&config.data.generate, &config.data.csv) {
        (Some(g), _) => (generate_synthetic(g).map_err(|e| fail(&e))?, "generate".to_string(), true),
        (None, Some(csv)) => {
            let schema = Schema::load(&csv.schema).map_err(|e| fail(&e))?;
            let data = load_csv(&csv.path, &schema).map_err(|e| fail(&format!("{}: {e}", csv.path.display())))?;
            (data, format!("csv:{}", csv.path.display()), false)
        }
        (None, None) => return Err(fail(&"no data source")),
    };
    let fraction = config.data.test_fraction;
    let (mut train_pos, mut test_pos) = (Vec::new(), Vec::new());
    for i in 0..data.len() {
        let u: f64 = keyed_rng(config.seed, streams::SPLIT, data.row_id(i)).gen();
        if u < fraction {
            test_pos.push(i);
        } else {
            train_pos.push(i);
        }
    }
    if train_pos.len() < 2 || (fraction > 0.0 && test_pos.is_empty()) {
        return Err(fail(&format!(
            "test_fraction {fraction} leaves {} training and {} test rows",
            train_pos.len(),
            test_pos.len()
        )));
    }
    Ok(Prepared { source, generated, rows: data.len(), train: data.subset(&train_pos), test: data.subset(&test_pos) })
}

fn fairness(data: &Dataset, outcomes: &[bool], truth: Option<&[bool]>, k: usize) -> Result<FairnessReport, String> {
    let parity = disparate_impact(outcomes, &data.groups()).map_err(|e| e.to_string())?;
    let mut report = FairnessReport::from_parity(&parity);
    if let Some(t) = truth {
        report.accuracy = Some(crate::metrics::accuracy(outcomes, t).map_err(|e| e.to_string())?);
    }
    let space = FeatureSpace::fit(data).map_err(|e| e.to_string())?;
    let points = space.encode_all(data);
    let preds: Vec<f64> = outcomes.iter().map(|&b| b as u8 as f64).collect();
    report.consistency = Some(consistency_on_points(&preds, &points, data.row_ids(), k).map_err(|e| e.to_string())?);
    Ok(report)
}

fn sample_probes(data: &Dataset, max: Option<usize>, seed: u64) -> Vec<Probe> {
    let mut positions: Vec<usize> = (0..data.len()).collect();
    if let Some(m) = max.filter(|&m| m < data.len()) {
        positions.shuffle(&mut keyed_rng(seed, streams::PROBES, 0));
        positions.truncate(m);
        positions.sort_unstable();
    }
    positions.into_iter().map(|i| Probe::from_row(data, i)).collect()
}

fn run_stack(
    config: &PipelineConfig,
    prep: &Prepared,
    stack: &Stack,
) -> Result<(PipelineReport, Artifacts, Vec<String>), PipelineError> {
    let seed = config.seed;
    let k = config.metrics.k;
    let mut artifacts = Artifacts::new();
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut stages = vec!["ingest".to_string()];
    log.push(format!(
        "ingest: {} rows from {} ({} train, {} test)",
        prep.rows,
        prep.source,
        prep.train.len(),
        prep.test.len()
    ));

    let mut original = prep.train.clone();
    let mut eval = prep.eval().clone();
    let mut bin_edges: Vec<BinEdges> = Vec::new();
    let pre_fail = |e: &dyn std::fmt::Display| PipelineError::stage("preprocess", e);
    let (repaired, pre_summary) = match stack.pre {
        None | Some(PreprocessConfig::None) => (None, None),
        Some(PreprocessConfig::Massage) => {
            let out = massage(&original).map_err(|e| pre_fail(&e))?;
            warnings.extend(out.warnings.iter().cloned());
            artifacts.insert("massage_plan.json".into(), json_bytes(&out.plan));
            let summary = PreprocessSummary::Massage {
                m: out.plan.m,
                promotions: out.plan.promotions.len(),
                demotions: out.plan.demotions.len(),
            };
            (Some(out.data), Some(summary))
        }
        Some(PreprocessConfig::Optimize { features, problem }) => {
            let features = match features {
                Some(f) => f.clone(),
                None if prep.generated => vec![crate::data::PROXY_COLUMN.to_string()],
                None => return Err(pre_fail(&"`features` is required for CSV input")),
            };
            let schema = original.schema();
            let needs_bins = features.iter().any(|f| {
                schema.index_of(f).is_some_and(|i| schema.columns()[i].kind == ColumnKind::Numeric)
            });
            if needs_bins {
                let (b, edges) = bin_numeric(&original, config.data.bins, None).map_err(|e| pre_fail(&e))?;
                let (e, _) = bin_numeric(&eval, config.data.bins, Some(&edges)).map_err(|e| pre_fail(&e))?;
                original = b;
                eval = e;
                bin_edges = edges;
            }
            let joint = empirical_joint(&original, &features).map_err(|e| pre_fail(&e))?;
            let mut problem = problem.clone();
            problem.seed = seed;
            let outcome = solve_repair_map(&joint, &problem).map_err(|e| pre_fail(&e))?;
            let check = check_repair_map(&joint, &problem, &outcome.map, problem.tolerance).map_err(|e| pre_fail(&e))?;
            if !check.passed() {
                warnings.push(format!("repair map fails the constraint check: {}", check.violations.join("; ")));
            }
            warnings.extend(outcome.warnings.iter().cloned());
            let data = apply_repair(&original, &outcome.map, seed).map_err(|e| pre_fail(&e))?;
            #[derive(Serialize)]
            struct MapArtifact<'a> {
                features: &'a [String],
                objective: f64,
                max_violation: f64,
                converged: bool,
                iterations: usize,
                map: &'a crate::optimize::RepairMap,
                check: &'a crate::optimize::CheckReport,
            }
            artifacts.insert(
                "repair_map.json".into(),
                json_bytes(&MapArtifact {
                    features: &features,
                    objective: outcome.objective,
                    max_violation: outcome.max_violation,
                    converged: outcome.converged,
                    iterations: outcome.iterations,
                    map: &outcome.map,
                    check: &check,
                }),
            );
            let summary = PreprocessSummary::Optimize {
                features,
                objective: outcome.objective,
                max_violation: outcome.max_violation,
                converged: outcome.converged,
                iterations: outcome.iterations,
                check_passed: check.passed(),
            };
            (Some(data), Some(summary))
        }
        Some(PreprocessConfig::Smote { k: sk, cell, count }) => {
            let count = count.unwrap_or_else(|| equalizing_count(&original, *cell));
            let out = smote_augment(&original, *sk, *cell, count, seed).map_err(|e| pre_fail(&e))?;
            warnings.extend(out.warnings.iter().cloned());
            #[derive(Serialize)]
            struct SmoteArtifact<'a> {
                cell: crate::smote::Cell,
                k_used: usize,
                added_ids: &'a [u64],
            }
            artifacts.insert(
                "smote_rows.json".into(),
                json_bytes(&SmoteArtifact { cell: *cell, k_used: out.k_used, added_ids: &out.added_ids }),
            );
            let summary = PreprocessSummary::Smote {
                privileged: cell.privileged,
                favorable: cell.favorable,
                added: out.added_ids.len(),
                k_used: out.k_used,
            };
            (Some(out.data), Some(summary))
        }
    };
    if let Some(p) = stack.pre {
        stages.push(format!("preprocess:{}", p.name()));
        log.push(format!("preprocess: {}", p.name()));
    }
    let training = repaired.as_ref().unwrap_or(&original);

    let eval_labels = eval.labels();
    let eval_groups = eval.groups();
    let mut model_metrics = None;
    let mut model = None;
    if let Some(tc) = stack.train {
        stages.push(format!("train:{}", tc.name()));
        let m = train(tc, training).map_err(|e| PipelineError::stage("train", e))?;
        let pred = m.predict(&eval).map_err(|e| PipelineError::stage("train", e))?;
        warnings.extend(pred.warnings.iter().cloned());
        log.push(format!("train: {} on {} rows", tc.name(), training.len()));
        let raw = Decisions::thresholded(&pred.scores);
        let mut score_columns = vec![("raw_score".to_string(), pred.scores.clone())];
        let post_fail = |e: &dyn std::fmt::Display| PipelineError::stage("postprocess", e);
        let final_decisions = match stack.post {
            None => raw.clone(),
            Some(PostprocessConfig::RejectOption { theta }) => {
                reject_option(&pred.scores, &eval_groups, &RejectOptionConfig { theta: *theta }).map_err(|e| post_fail(&e))?
            }
            Some(PostprocessConfig::Ensemble { members }) => {
                let mut sets = vec![raw.decisions.clone()];
                for (i, mc) in members.iter().enumerate() {
                    let mm = train(mc, training).map_err(|e| post_fail(&e))?;
                    let p = mm.predict(&eval).map_err(|e| post_fail(&e))?;
                    sets.push(p.decisions());
                    score_columns.push((format!("score_{}_{}", i + 1, mc.name()), p.scores));
                }
                ensemble_disagreement(&sets, &eval_groups).map_err(|e| post_fail(&e))?
            }
        };
        if let Some(p) = stack.post {
            stages.push(format!("postprocess:{}", p.name()));
            log.push(format!("postprocess: {} changed {} decisions", p.name(), final_decisions.intervention_count()));
        }
        artifacts.insert(
            "decisions.csv".into(),
            decisions_csv(eval.row_ids(), &score_columns, &final_decisions).into_bytes(),
        );
        artifacts.insert("model.json".into(), json_bytes(&m));
        let metric_fail = |e: String| PipelineError::stage("metrics", e);
        model_metrics = Some(ModelMetrics {
            trainer: tc.name().to_string(),
            raw: fairness(&eval, &raw.decisions, Some(&eval_labels), k).map_err(metric_fail)?,
            final_: fairness(&eval, &final_decisions.decisions, Some(&eval_labels), k).map_err(metric_fail)?,
            postprocess: stack.post.map(|p| p.name().to_string()),
            interventions: final_decisions.intervention_count(),
        });
        model = Some(m);
    }

    stages.push("metrics".into());
    let metric_fail = |e: String| PipelineError::stage("metrics", e);
    let dataset = DatasetMetrics {
        original: fairness(&original, &original.labels(), None, k).map_err(metric_fail)?,
        repaired: match &repaired {
            Some(r) => Some(fairness(r, &r.labels(), None, k).map_err(metric_fail)?),
            None => None,
        },
    };
    log.push(format!("metrics: training-label ratio {:.4}", dataset.original.disparate_impact_ratio));

    let mut audit = None;
    if let Some(ac) = &stack.audit {
        stages.push("audit".into());
        let trainer = ac.trainer.clone().or_else(|| stack.train.cloned()).unwrap_or_default();
        let probe_data = match ac.probes {
            ProbeSource::Test => &eval,
            ProbeSource::Train => &original,
        };
        let probes = sample_probes(probe_data, ac.max_probes, seed);
        let auditor = Auditor::new(&original, training, ac.k, &trainer).map_err(|e| PipelineError::stage("audit", e))?;
        let (findings, summary) = auditor.sweep(&probes).map_err(|e| PipelineError::stage("audit", e))?;
        artifacts.insert("audit_findings.jsonl".into(), findings_jsonl(&findings).into_bytes());
        artifacts.insert("audit_summary.json".into(), json_bytes(&summary));
        log.push(format!(
            "audit: {} probes, mean flip rate {:.4}, decision-change rate {:.4}",
            summary.count, summary.mean_flip_rate, summary.decision_change_rate
        ));
        audit = Some(summary);
    }

    let mut routing = None;
    if let (Some(sc), Some(m)) = (&config.simulate, &model) {
        stages.push("simulate".into());
        let rc = RoutingConfig {
            consent_rate: sc.consent_rate,
            ai_fraction_cap: sc.ai_fraction_cap,
            human_model: sc.human_model.clone(),
            policy: sc.policy,
            seed,
            n_matters: sc.n_matters,
        };
        let result = simulate(&eval, m, &rc).map_err(|e| PipelineError::stage("simulate", e))?;
        let blindness = verify_blindness(&result);
        if !blindness.passed {
            warnings.push(format!("blindness check failed on fields {:?}", blindness.offending_fields));
        }
        artifacts.insert("routing_trace.jsonl".into(), result.trace_jsonl().into_bytes());
        let rr = RoutingReport { summary: result.summary.clone(), blindness };
        artifacts.insert("routing.json".into(), json_bytes(&rr));
        log.push(format!(
            "simulate: {} matters, human workload {}, AI final {}",
            rr.summary.n, rr.summary.human_workload, rr.summary.ai_final
        ));
        routing = Some(rr);
    }

    let report = PipelineReport {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        seed,
        stages,
        knobs: Knobs::collect(config, stack.pre, stack.train, stack.post),
        data: DataSummary {
            source: prep.source.clone(),
            rows: prep.rows,
            train_rows: prep.train.len(),
            test_rows: prep.test.len(),
            evaluated_on: if prep.test.is_empty() { "train" } else { "test" }.to_string(),
            bin_edges,
        },
        dataset,
        preprocess: pre_summary,
        model: model_metrics,
        audit,
        routing,
        warnings,
    };
    artifacts.insert("report.json".into(), json_bytes(&report));
    artifacts.insert("report.csv".into(), report.to_csv().into_bytes());
    Ok((report, artifacts, log))
}

/// Runs the single stack described by the top-level sections.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    let prep = ingest(config)?;
    let stack = Stack {
        pre: config.preprocess.as_ref(),
        train: config.train.as_ref(),
        post: config.postprocess.as_ref(),
        audit: config.audit.clone(),
    };
    let (report, artifacts, log) = run_stack(config, &prep, &stack)?;
    Ok(RunOutcome { report, artifacts, log })
}

/// Runs every `[[sweep]]` stack on the same data and split, audited with the
/// top-level `[audit]` settings (defaults when absent).
pub fn compare_interventions(config: &PipelineConfig) -> Result<CompareOutcome, PipelineError> {
    if config.sweep.len() < 2 {
        return Err(PipelineError::ConfigParse {
            path: "sweep".into(),
            message: format!("compare needs at least 2 stacks, found {}", config.sweep.len()),
        });
    }
    let prep = ingest(config)?;
    let default_train = config.train.clone().unwrap_or_default();
    let audit = config.audit.clone().unwrap_or_default();
    let results: Vec<Result<_, PipelineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .sweep
            .iter()
            .map(|s| {
                let prep = &prep;
                let default_train = &default_train;
                let audit = audit.clone();
                scope.spawn(move || {
                    let stack = Stack {
                        pre: s.preprocess.as_ref(),
                        train: Some(s.train.as_ref().unwrap_or(default_train)),
                        post: s.postprocess.as_ref(),
                        audit: Some(audit),
                    };
                    run_stack(config, prep, &stack)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("stack thread panicked")).collect()
    });
    let mut rows = Vec::new();
    let mut artifacts = Artifacts::new();
    let mut log = Vec::new();
    for (i, (s, result)) in config.sweep.iter().zip(results).enumerate() {
        let (report, stack_artifacts, stack_log) = result?;
        let dir = format!("stacks/{:02}_{}", i + 1, s.name);
        for (name, bytes) in stack_artifacts {
            artifacts.insert(format!("{dir}/{name}"), bytes);
        }
        log.extend(stack_log.into_iter().map(|l| format!("[{}] {l}", s.name)));
        let model = report.model.as_ref().expect("sweep stacks always train");
        let fin = &model.final_;
        rows.push(ComparisonRow {
            stack: s.name.clone(),
            preprocess: s.preprocess.as_ref().map_or("none", |p| p.name()).to_string(),
            train: model.trainer.clone(),
            postprocess: s.postprocess.as_ref().map_or("none", |p| p.name()).to_string(),
            accuracy: fin.accuracy.unwrap_or(f64::NAN),
            disparate_impact_ratio: fin.disparate_impact_ratio,
            statistical_parity_difference: fin.statistical_parity_difference,
            consistency: fin.consistency.unwrap_or(f64::NAN),
            audit_decision_change_rate: report.audit.as_ref().map_or(0.0, |a| a.decision_change_rate),
        });
    }
    artifacts.insert("comparison.csv".into(), ComparisonRow::to_csv(&rows).into_bytes());
    Ok(CompareOutcome { rows, artifacts, log })
}
