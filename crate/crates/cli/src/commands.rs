use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use dialkit::analysis::{
    dst_samples, fine_grained_report, ic_samples, nlg_samples, summ_samples, Aspect, BucketSpec,
    CorpusMetrics, NlgBucketMetrics,
};
use dialkit::ingest::{ingest_path, load_canonical, AdapterKind};
use dialkit::metrics::{
    evaluate_dst, evaluate_ic, evaluate_nlg, evaluate_summ, final_states, ConstraintSource,
    EntityDb, MetricReport, PredictionSet,
};
use dialkit::promptc::{compile_corpus, write_records, CompileStats, TemplateSet};
use dialkit::splits::{
    k_per_intent, leave_one_domain_out, percent_subsample, unit_ids, Protocol, Selection,
    SplitManifest, SplitUnit,
};
use dialkit::{Dialogue, TaskKind};
use serde_json::json;

use crate::args::{
    AdapterArg, AnalyzeArgs, Command, CompileArgs, ConstraintArg, EvalTask, EvaluateArgs,
    InputArgs, ManifestArgs, ProtocolArg, SplitArgs, StatsArgs, UnitArg,
};

/// Why a command did not finish.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable inputs.
    Usage(String),
    /// Inputs were readable but their content was rejected.
    Data(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

impl From<dialkit::Error> for Failure {
    fn from(e: dialkit::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// Runs a command and returns the human-readable report for stdout.
pub fn run(command: Command) -> Outcome<String> {
    match command {
        Command::Compile(a) => compile(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Analyze(a) => analyze(a),
        Command::Split(a) => split(a),
        Command::Stats(a) => stats(a),
    }
}

fn readable(path: &Path, flag: &str) -> Outcome<()> {
    if path.is_file() && File::open(path).is_ok() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "{flag}: cannot read {}",
            path.display()
        )))
    }
}

fn missing(flag: &str, protocol: &str) -> Failure {
    Failure::Usage(format!("{flag} is required for --protocol {protocol}"))
}

fn adapter_kind(a: AdapterArg) -> AdapterKind {
    match a {
        AdapterArg::Canonical => AdapterKind::Canonical,
        AdapterArg::Wizard => AdapterKind::Wizard,
        AdapterArg::IntentTable => AdapterKind::IntentTable,
        AdapterArg::SummPair => AdapterKind::SummPair,
    }
}

fn ingest(input: &InputArgs, rejections: Option<&Path>) -> Outcome<(Vec<Dialogue>, usize)> {
    readable(&input.input, "--in")?;
    let dataset = input.dataset.clone().unwrap_or_else(|| {
        input.input.file_stem().map_or_else(
            || "corpus".to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    });
    let (dialogues, stats) = ingest_path(&input.input, adapter_kind(input.adapter), &dataset)?;
    if let Some(path) = rejections {
        stats.write_rejection_log(path)?;
    }
    Ok((dialogues, stats.dialogues_rejected))
}

/// Gold dialogues must load without a single rejection.
fn load_gold(path: &Path) -> Outcome<Vec<Dialogue>> {
    readable(path, "--gold")?;
    let (dialogues, stats) = load_canonical(path)?;
    if let Some(r) = stats.rejections.first() {
        return Err(Failure::Data(format!(
            "{}: record {} rejected: {}",
            path.display(),
            r.ordinal,
            r.reason
        )));
    }
    Ok(dialogues)
}

fn selection(args: &ManifestArgs) -> Outcome<Option<Selection>> {
    let (Some(path), Some(partition)) = (&args.manifest, &args.partition) else {
        return Ok(None);
    };
    readable(path, "--manifest")?;
    let manifest = SplitManifest::load(path)?;
    manifest.validate(None)?;
    Ok(Some(Selection::new(&manifest, partition)?))
}

fn write_text(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn compile(a: CompileArgs) -> Outcome<String> {
    let tasks = if a.tasks.trim() == "all" {
        TaskKind::ALL.into_iter().collect()
    } else {
        TaskKind::parse_list(&a.tasks).map_err(|e| Failure::Usage(format!("--tasks: {e}")))?
    };
    if tasks.is_empty() {
        return Err(Failure::Usage("--tasks: no task given".into()));
    }
    let templates = match &a.templates {
        Some(path) => {
            readable(path, "--templates")?;
            TemplateSet::load(path)?
        }
        None => TemplateSet::default(),
    };
    let selection = selection(&a.manifest)?;
    let (mut dialogues, rejected) = ingest(&a.input, a.rejections.as_deref())?;
    if let Some(sel) = &selection {
        dialogues.retain(|d| sel.has_dialogue(&d.id));
    }

    let (mut records, mut stats) = compile_corpus(&dialogues, &tasks, &templates, a.neg_k, a.seed)?;
    if let Some(sel) = &selection {
        records.retain(|r| sel.contains(&r.dialogue_id, r.turn));
        stats = CompileStats {
            dialogues: dialogues.len(),
            per_task: tasks
                .iter()
                .map(|t| (*t, records.iter().filter(|r| r.task == *t).count()))
                .collect(),
        };
    }

    let file = File::create(&a.out)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;
    write_records(BufWriter::new(file), &records)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;

    let mut out = String::new();
    let _ = writeln!(out, "dialogues  {}", stats.dialogues);
    let _ = writeln!(out, "rejected   {rejected}");
    for (task, n) in &stats.per_task {
        let _ = writeln!(out, "{:<10} {n}", task.as_str());
    }
    let _ = writeln!(out, "records    {}", stats.total());
    Ok(out)
}

fn eval_task_kind(t: EvalTask) -> TaskKind {
    match t {
        EvalTask::Nlg => TaskKind::Nlg,
        EvalTask::Dst => TaskKind::Dst,
        EvalTask::Ic => TaskKind::Ic,
        EvalTask::Summ => TaskKind::Summ,
    }
}

fn load_predictions(
    path: &Path,
    task: TaskKind,
    gold: &[Dialogue],
    restricted: bool,
) -> Outcome<PredictionSet> {
    readable(path, "--pred")?;
    let preds = PredictionSet::load(path, task)?;
    if !restricted {
        preds.check_against(gold)?;
    }
    Ok(preds)
}

fn load_db(path: Option<&Path>) -> Outcome<EntityDb> {
    match path {
        Some(p) => {
            readable(p, "--db")?;
            Ok(EntityDb::load(p)?)
        }
        None => Ok(EntityDb::new()),
    }
}

/// Keeps selected dialogues; for turn-level selections also strips the
/// state and intent labels of unselected turns so they are not scored.
fn restrict(dialogues: Vec<Dialogue>, sel: &Selection) -> Vec<Dialogue> {
    dialogues
        .into_iter()
        .filter(|d| sel.has_dialogue(&d.id))
        .map(|mut d| {
            let id = d.id.clone();
            for t in &mut d.turns {
                if !sel.contains(&id, Some(t.index)) {
                    t.belief = None;
                    t.intent = None;
                }
            }
            d
        })
        .collect()
}

fn evaluate(a: EvaluateArgs) -> Outcome<String> {
    let task = eval_task_kind(a.task);
    if a.db_constraints == ConstraintArg::Generated && a.dst_pred.is_none() {
        return Err(Failure::Usage(
            "--dst-pred is required for --db-constraints generated".into(),
        ));
    }
    let sel = selection(&a.manifest)?;
    let mut gold = load_gold(&a.gold)?;
    if let Some(sel) = &sel {
        gold = restrict(gold, sel);
    }
    let preds = load_predictions(&a.pred, task, &gold, sel.is_some())?;

    let report: MetricReport = match a.task {
        EvalTask::Nlg => {
            let db = load_db(a.db.as_deref())?;
            let states = match (a.db_constraints, &a.dst_pred) {
                (ConstraintArg::Goal, _) => None,
                (ConstraintArg::Gold, _) => Some(final_states(&gold, None)),
                (ConstraintArg::Generated, Some(path)) => {
                    readable(path, "--dst-pred")?;
                    let dst = PredictionSet::load(path, TaskKind::Dst)?;
                    Some(final_states(&gold, Some(&dst)))
                }
                (ConstraintArg::Generated, None) => unreachable!("checked above"),
            };
            let constraints = states
                .as_ref()
                .map_or(ConstraintSource::Goal, ConstraintSource::States);
            evaluate_nlg(&gold, &preds, &db, constraints)?
        }
        EvalTask::Dst => evaluate_dst(&gold, &preds),
        EvalTask::Ic => evaluate_ic(&gold, &preds)?,
        EvalTask::Summ => evaluate_summ(&gold, &preds)?,
    };
    report.check()?;
    if let Some(path) = &a.out {
        write_text(path, &(report.to_json() + "\n"))?;
    }
    Ok(report.render_table())
}

fn analysis_specs(a: &AnalyzeArgs) -> Outcome<Vec<BucketSpec>> {
    let from_file = match &a.buckets {
        Some(path) => {
            readable(path, "--buckets")?;
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Usage(format!("--buckets: {e}")))?;
            BucketSpec::parse_file(&text)?
        }
        None => Vec::new(),
    };
    let aspects: Vec<Aspect> = match &a.aspects {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e: dialkit::Error| Failure::Usage(format!("--aspects: {e}")))
            })
            .collect::<Outcome<_>>()?,
        None if !from_file.is_empty() => from_file.iter().map(|s| s.aspect).collect(),
        None if a.task == EvalTask::Summ => Aspect::ALL.to_vec(),
        None => vec![Aspect::Sp1Len, Aspect::Sp2Len, Aspect::UtrNum],
    };
    if aspects.is_empty() {
        return Err(Failure::Usage("--aspects: no aspect given".into()));
    }
    Ok(aspects
        .into_iter()
        .map(|aspect| {
            from_file
                .iter()
                .find(|s| s.aspect == aspect)
                .cloned()
                .unwrap_or_else(|| BucketSpec::default_for(aspect))
        })
        .collect())
}

fn analyze(a: AnalyzeArgs) -> Outcome<String> {
    let specs = analysis_specs(&a)?;
    let gold = load_gold(&a.gold)?;
    let task = eval_task_kind(a.task);
    let preds = load_predictions(&a.pred, task, &gold, false)?;
    let db = load_db(a.db.as_deref())?;

    let nlg_metrics;
    let (samples, corpus): (_, Option<&dyn CorpusMetrics>) = match a.task {
        EvalTask::Dst => (dst_samples(&gold, &preds), None),
        EvalTask::Ic => (ic_samples(&gold, &preds), None),
        EvalTask::Summ => (summ_samples(&gold, &preds)?, None),
        EvalTask::Nlg => {
            nlg_metrics = NlgBucketMetrics::new(&gold, &preds, &db, ConstraintSource::Goal);
            (nlg_samples(&gold), Some(&nlg_metrics))
        }
    };
    let report = fine_grained_report(&samples, &specs, corpus)?;
    let csv = report.to_csv();
    if let Some(path) = &a.out {
        write_text(path, &csv)?;
    }
    if let Some(path) = &a.json {
        write_text(path, &(report.to_json() + "\n"))?;
    }
    Ok(csv)
}

fn split(a: SplitArgs) -> Outcome<String> {
    let seed = a.seed;
    let (protocol, mut parameters, unit) = match a.protocol {
        ProtocolArg::Percent => {
            let pct = a.pct.ok_or_else(|| missing("--pct", "percent"))?;
            if !(pct > 0.0 && pct <= 100.0) {
                return Err(Failure::Usage(format!(
                    "--pct must be in (0, 100], got {pct}"
                )));
            }
            let unit = match a.unit {
                UnitArg::Dialogue => SplitUnit::Dialogue,
                UnitArg::Turn => SplitUnit::Turn,
            };
            (
                Protocol::Percent,
                BTreeMap::from([("pct".to_string(), json!(pct))]),
                unit,
            )
        }
        ProtocolArg::PerIntent => {
            let k = a.k.ok_or_else(|| missing("--k", "per_intent"))?;
            if k == 0 {
                return Err(Failure::Usage("--k must be at least 1".into()));
            }
            (
                Protocol::PerIntent,
                BTreeMap::from([("k".to_string(), json!(k))]),
                SplitUnit::Turn,
            )
        }
        ProtocolArg::DomainTransfer => {
            let target = a
                .target
                .clone()
                .ok_or_else(|| missing("--target", "domain_transfer"))?;
            (
                Protocol::DomainTransfer,
                BTreeMap::from([("target".to_string(), json!(target))]),
                SplitUnit::Dialogue,
            )
        }
    };

    readable(&a.input, "--in")?;
    let (dialogues, stats) = load_canonical(&a.input)?;
    if let Some(r) = stats.rejections.first() {
        return Err(Failure::Data(format!(
            "{}: record {} rejected: {}",
            a.input.display(),
            r.ordinal,
            r.reason
        )));
    }

    let mut partitions = BTreeMap::new();
    match protocol {
        Protocol::Percent => {
            let ids = unit_ids(&dialogues, unit);
            partitions.insert(
                "train".to_string(),
                percent_subsample(&ids, a.pct.unwrap_or_default(), seed)?,
            );
        }
        Protocol::PerIntent => {
            let examples: Vec<(String, &str)> = dialogues
                .iter()
                .flat_map(|d| {
                    d.turns.iter().filter_map(move |t| {
                        t.intent
                            .as_deref()
                            .map(|i| (format!("{}#{}", d.id, t.index), i))
                    })
                })
                .collect();
            if examples.is_empty() {
                return Err(Failure::Data(format!(
                    "{}: no turn carries an intent label",
                    a.input.display()
                )));
            }
            partitions.insert(
                "train".to_string(),
                k_per_intent(&examples, a.k.unwrap_or(1), seed)?,
            );
        }
        Protocol::DomainTransfer => {
            let target = a.target.as_deref().unwrap_or_default();
            let s = leave_one_domain_out(&dialogues, target, seed)?;
            parameters.insert("excluded_multi_domain".to_string(), json!(s.excluded));
            partitions.insert("source_train".to_string(), s.source_train);
            partitions.insert("source_validation".to_string(), s.source_validation);
            partitions.insert("target_test".to_string(), s.target_test);
        }
    }

    let manifest = SplitManifest {
        protocol,
        seed,
        unit,
        parameters,
        partitions,
    };
    let source: HashSet<String> = unit_ids(&dialogues, unit).into_iter().collect();
    manifest.validate(Some(&source))?;
    manifest.write(&a.out)?;

    let mut out = String::new();
    let _ = writeln!(out, "protocol  {protocol}");
    let _ = writeln!(out, "seed      {seed}");
    for (name, ids) in &manifest.partitions {
        let _ = writeln!(out, "{name:<18} {}", ids.len());
    }
    Ok(out)
}

#[derive(Default)]
struct DatasetRow {
    dialogues: usize,
    utterances: usize,
    domains: BTreeSet<String>,
}

fn stats(a: StatsArgs) -> Outcome<String> {
    let (dialogues, rejected) = ingest(&a.input, None)?;
    let mut rows: BTreeMap<&str, DatasetRow> = BTreeMap::new();
    let mut total = DatasetRow::default();
    for d in &dialogues {
        for row in [rows.entry(d.dataset.as_str()).or_default(), &mut total] {
            row.dialogues += 1;
            row.utterances += d.turns.len();
            row.domains.extend(d.domains.iter().cloned());
        }
    }

    let tasks: BTreeSet<TaskKind> = TaskKind::ALL.into_iter().collect();
    let (records, _) = compile_corpus(&dialogues, &tasks, &TemplateSet::default(), 0, 0)?;
    let mut coverage: BTreeMap<TaskKind, (BTreeSet<&str>, usize)> =
        tasks.iter().map(|t| (*t, (BTreeSet::new(), 0))).collect();
    for r in &records {
        let entry = coverage.get_mut(&r.task).expect("all tasks present");
        entry.0.insert(r.dialogue_id.as_str());
        entry.1 += 1;
    }

    let domain_cell = |row: &DatasetRow| {
        if row
            .domains
            .iter()
            .all(|d| d == dialkit::schema::OPEN_DOMAIN)
        {
            "-".to_string()
        } else {
            row.domains
                .iter()
                .filter(|d| *d != dialkit::schema::OPEN_DOMAIN)
                .count()
                .to_string()
        }
    };
    let width = rows.keys().map(|k| k.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>10}  {:>7}",
        "dataset", "dialogues", "utterances", "domains"
    );
    for (name, row) in &rows {
        let _ = writeln!(
            out,
            "{name:<width$}  {:>9}  {:>10}  {:>7}",
            row.dialogues,
            row.utterances,
            domain_cell(row)
        );
    }
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>10}  {:>7}",
        "total",
        total.dialogues,
        total.utterances,
        domain_cell(&total)
    );
    let _ = writeln!(out, "rejected {rejected}");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<6}  {:>9}  {:>8}  {:>8}",
        "task", "dialogues", "coverage", "examples"
    );
    for (task, (ids, n)) in &coverage {
        let pct = if dialogues.is_empty() {
            0.0
        } else {
            100.0 * ids.len() as f64 / dialogues.len() as f64
        };
        let _ = writeln!(
            out,
            "{:<6}  {:>9}  {:>7.1}%  {:>8}",
            task.as_str(),
            ids.len(),
            pct,
            n
        );
    }
    Ok(out)
}
