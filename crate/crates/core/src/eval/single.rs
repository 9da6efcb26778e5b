use crate::agent::{parse_action, ActionKind, Command, HighLevelAction, ParseError};
use crate::datagen::QARecord;
use crate::sim::{bbox_center, from_norm};
use serde::{Deserialize, Serialize};

/// Ground truth and prediction for one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleStepCase {
    pub gt_kind: ActionKind,
    /// Raw-pixel target for box actions.
    pub gt_point: Option<[f64; 2]>,
    pub gt_frame: Option<usize>,
    pub prediction: Result<HighLevelAction, ParseError>,
    pub image_size: [u32; 2],
}

impl SingleStepCase {
    pub fn predicted_kind(&self) -> Option<ActionKind> {
        self.prediction.as_ref().ok().map(|a| a.kind())
    }

    /// Builds a case from a stored record and a model's raw output.
    pub fn from_record(r: &QARecord, raw: Option<&str>) -> Self {
        let gt = r.parsed_answer().expect("stored answers parse");
        let size = r.robot.image_size;
        let gt_point = gt.command.bbox().map(|b| {
            let (u, v) = bbox_center(&from_norm(&b, size));
            [u, v]
        });
        let prediction = match raw {
            Some(t) => parse_action(t),
            None => Err(ParseError::MalformedJson("no prediction".into())),
        };
        Self {
            gt_kind: gt.kind(),
            gt_point,
            gt_frame: gt.command.frame_index(),
            prediction,
            image_size: size,
        }
    }
}

/// `1 - |center - gt| / diagonal` when the predicted kind matches and the
/// box is well formed, else 0.
pub fn score_grounding(case: &SingleStepCase) -> f64 {
    let (Some(gt), Ok(pred)) = (case.gt_point, case.prediction.as_ref()) else {
        return 0.0;
    };
    if pred.kind() != case.gt_kind {
        return 0.0;
    }
    let Some(b) = pred.command.bbox() else {
        return 0.0;
    };
    if b[0] > b[2] || b[1] > b[3] || b.iter().any(|&c| c > 1000) {
        return 0.0;
    }
    let (u, v) = bbox_center(&from_norm(&b, case.image_size));
    let [w, h] = case.image_size.map(f64::from);
    let diag = w.hypot(h);
    let d = (u - gt[0]).hypot(v - gt[1]);
    (1.0 - d / diag).clamp(0.0, 1.0)
}

/// Share of cases whose predicted kind equals the ground-truth kind.
pub fn score_decision(cases: &[SingleStepCase]) -> Option<f64> {
    if cases.is_empty() {
        return None;
    }
    let hits = cases.iter().filter(|c| c.predicted_kind() == Some(c.gt_kind)).count();
    Some(hits as f64 / cases.len() as f64)
}

/// Share of retrieval cases that picked the ground-truth frame.
pub fn score_retrieval(cases: &[SingleStepCase]) -> Option<f64> {
    let relevant: Vec<&SingleStepCase> = cases
        .iter()
        .filter(|c| c.gt_kind == ActionKind::SearchSceneFrame)
        .collect();
    if relevant.is_empty() {
        return None;
    }
    let hits = relevant
        .iter()
        .filter(|c| match (&c.prediction, c.gt_frame) {
            (Ok(a), Some(k)) => a.command == Command::SearchSceneFrame(k),
            _ => false,
        })
        .count();
    Some(hits as f64 / relevant.len() as f64)
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub record_id: String,
    pub raw_text: String,
}

/// Parses a prediction file; lines that are not prediction objects are
/// counted and otherwise ignored.
pub fn parse_predictions(text: &str) -> (Vec<PredictionLine>, usize) {
    let mut out = Vec::new();
    let mut bad = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match serde_json::from_str::<PredictionLine>(line) {
            Ok(p) => out.push(p),
            Err(_) => bad += 1,
        }
    }
    (out, bad)
}
