use super::episodic::EpisodeFlags;
use super::single::{score_decision, score_grounding, score_retrieval, PredictionLine, SingleStepCase};
use crate::agent::{ActionKind, EpisodeTrace, EvalMode};
use crate::datagen::QARecord;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

/// Count, mean and population standard deviation. Values are summed in
/// sorted order so the result does not depend on input order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
        dev.sort_by(f64::total_cmp);
        let var = dev.iter().sum::<f64>() / n;
        Self {
            n: v.len(),
            mean: Some(mean),
            std: Some(var.sqrt()),
        }
    }
}

fn rate(hits: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| hits as f64 / n as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SingleStepReport {
    pub cases: usize,
    /// Predictions that failed to parse or were missing.
    pub invalid_predictions: usize,
    /// Prediction-file lines that were not prediction objects.
    pub malformed_lines: usize,
    pub decision_accuracy: Option<f64>,
    pub retrieval_accuracy: Option<f64>,
    /// Keyed by action kind, plus `all`.
    pub grounding: BTreeMap<String, Stat>,
}

pub fn summarize_single(cases: &[SingleStepCase], malformed_lines: usize) -> SingleStepReport {
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for k in [ActionKind::NavToPoint, ActionKind::Pick, ActionKind::Place] {
        per.insert(k.as_str().to_string(), Vec::new());
    }
    let mut all = Vec::new();
    for c in cases.iter().filter(|c| c.gt_point.is_some()) {
        let s = score_grounding(c);
        per.entry(c.gt_kind.as_str().to_string()).or_default().push(s);
        all.push(s);
    }
    let mut grounding: BTreeMap<String, Stat> = per.iter().map(|(k, v)| (k.clone(), Stat::of(v))).collect();
    grounding.insert("all".into(), Stat::of(&all));
    SingleStepReport {
        cases: cases.len(),
        invalid_predictions: cases.iter().filter(|c| c.prediction.is_err()).count(),
        malformed_lines,
        decision_accuracy: score_decision(cases),
        retrieval_accuracy: score_retrieval(cases),
        grounding,
    }
}

/// Scores predictions against stored records, matched by record id. A
/// record without a prediction counts as an invalid answer.
pub fn eval_single(records: &[QARecord], predictions: &[PredictionLine], malformed_lines: usize) -> SingleStepReport {
    let mut by_id: HashMap<&str, &str> = HashMap::new();
    for p in predictions {
        by_id.entry(p.record_id.as_str()).or_insert(p.raw_text.as_str());
    }
    let cases: Vec<SingleStepCase> = records
        .iter()
        .map(|r| SingleStepCase::from_record(r, by_id.get(r.record_id.as_str()).copied()))
        .collect();
    summarize_single(&cases, malformed_lines)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodicReport {
    pub mode: EvalMode,
    pub episodes: usize,
    pub full_task: Option<f64>,
    pub retrieval_object: Option<f64>,
    pub retrieval_goal: Option<f64>,
    pub robot_close_object: Option<f64>,
    pub robot_close_goal: Option<f64>,
    pub object_picked: Option<f64>,
    pub dead_loop_count: usize,
    pub dead_loop_total: usize,
    pub mean_steps: Option<f64>,
}

pub fn summarize_episodes(flags: &[EpisodeFlags], mode: EvalMode) -> EpisodicReport {
    let n = flags.len();
    let count = |f: &dyn Fn(&EpisodeFlags) -> bool| flags.iter().filter(|x| f(x)).count();
    let opt_rate = |f: &dyn Fn(&EpisodeFlags) -> Option<bool>| {
        let defined: Vec<bool> = flags.iter().filter_map(f).collect();
        rate(defined.iter().filter(|b| **b).count(), defined.len())
    };
    let steps: Vec<f64> = flags.iter().map(|f| f.steps as f64).collect();
    EpisodicReport {
        mode,
        episodes: n,
        full_task: rate(count(&|f| f.full_task), n),
        retrieval_object: opt_rate(&|f| f.retrieval_object),
        retrieval_goal: opt_rate(&|f| f.retrieval_goal),
        robot_close_object: rate(count(&|f| f.robot_close_object), n),
        robot_close_goal: rate(count(&|f| f.robot_close_goal), n),
        object_picked: rate(count(&|f| f.object_picked), n),
        dead_loop_count: count(&|f| f.dead_loop),
        dead_loop_total: n,
        mean_steps: Stat::of(&steps).mean,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single: Option<SingleStepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodic: Option<EpisodicReport>,
}

/// Wall-clock per decision. Kept apart from the report so reports stay
/// reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub decisions: usize,
    pub seconds: Stat,
    pub max_seconds: Option<f64>,
}

pub fn timing_report(traces: &[EpisodeTrace]) -> TimingReport {
    let all: Vec<f64> = traces.iter().flat_map(|t| t.decision_seconds.iter().copied()).collect();
    TimingReport {
        decisions: all.len(),
        seconds: Stat::of(&all),
        max_seconds: all.iter().copied().reduce(f64::max),
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", v * 100.0))
}

fn mean_std(s: &Stat) -> String {
    match (s.mean, s.std) {
        (Some(m), Some(d)) => format!("{m:.4} (±{d:.4})"),
        _ => "n/a".to_string(),
    }
}

/// Plain-text tables for a report.
pub fn render_table(r: &MetricsReport) -> String {
    let mut out = String::new();
    if let Some(s) = &r.single {
        let _ = writeln!(
            out,
            "Single-step evaluation ({} cases, {} invalid, {} malformed lines)",
            s.cases, s.invalid_predictions, s.malformed_lines
        );
        let _ = writeln!(out, "  {:<28} {}", "decision accuracy", pct(s.decision_accuracy));
        let _ = writeln!(out, "  {:<28} {}", "image retrieval accuracy", pct(s.retrieval_accuracy));
        for (k, st) in &s.grounding {
            let _ = writeln!(out, "  {:<28} {}  n={}", format!("grounding {k}"), mean_std(st), st.n);
        }
    }
    if let Some(e) = &r.episodic {
        let mode = match e.mode {
            EvalMode::Strict => "strict",
            EvalMode::Lenient => "lenient",
        };
        let _ = writeln!(out, "Episodic evaluation ({} episodes, {mode})", e.episodes);
        for (name, v) in [
            ("full task success", e.full_task),
            ("retrieval object", e.retrieval_object),
            ("retrieval goal", e.retrieval_goal),
            ("robot close to object", e.robot_close_object),
            ("robot close to goal", e.robot_close_goal),
            ("object picked", e.object_picked),
        ] {
            let _ = writeln!(out, "  {name:<28} {}", pct(v));
        }
        let _ = writeln!(out, "  {:<28} {}/{}", "dead loop", e.dead_loop_count, e.dead_loop_total);
    }
    if r.single.is_none() && r.episodic.is_none() {
        out.push_str("empty report\n");
    }
    out
}

pub fn render_timing(t: &TimingReport) -> String {
    format!(
        "decisions {}  mean {}  max {}\n",
        t.decisions,
        t.seconds.mean.map_or("n/a".into(), |m| format!("{m:.4}s")),
        t.max_seconds.map_or("n/a".into(), |m| format!("{m:.4}s"))
    )
}
