use super::keysteps::{KeyRole, KeyStep};
use super::templates::{Bindings, Phrasing, TemplateBank, TemplateError};
use crate::agent::{parse_action, ActionKind, Command, FrameRef, HighLevelAction, ObjectState};
use crate::sim::{BasePose, RobotState};
use crate::world::{SceneSpec, TaskInstance};
use serde::{Deserialize, Serialize};

/// An image slot of a record, identified by the pose it is rendered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRef {
    pub name: String,
    pub pose: BasePose,
}

/// One instruction-tuning sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub record_id: String,
    pub episode_id: String,
    pub scene_id: String,
    pub step: usize,
    pub checkpoint: usize,
    pub role: KeyRole,
    pub task_description: String,
    pub context_description: String,
    /// Scene frames in index order, then the ego view.
    pub images: Vec<ImageRef>,
    pub question: String,
    pub answer: String,
    pub action_information: String,
    pub object_label: String,
    pub robot: RobotState,
    pub objects: Vec<ObjectState>,
    pub frames: Vec<FrameRef>,
    pub task: TaskInstance,
}

impl QARecord {
    pub fn kind(&self) -> ActionKind {
        self.role.kind()
    }

    /// The supervised action parsed back from the answer.
    pub fn parsed_answer(&self) -> Result<HighLevelAction, crate::agent::ParseError> {
        parse_action(&self.answer)
    }
}

/// The argument of an action in the published answer form.
pub fn action_information(c: &Command) -> String {
    match c {
        Command::SearchSceneFrame(k) => k.to_string(),
        Command::NavToPoint(b) | Command::Pick(b) | Command::Place(b) => {
            format!("[[{}, {}, {}, {}]]", b[0], b[1], b[2], b[3])
        }
    }
}

/// Rewrites free text of a record. Never sees the action argument.
pub trait Augmenter: Sync {
    fn paraphrase(&self, text: &str) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityAugmenter;

impl Augmenter for IdentityAugmenter {
    fn paraphrase(&self, text: &str) -> String {
        text.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRecord {
    pub episode_id: String,
    pub step: usize,
    pub checkpoint: usize,
    pub error: TemplateError,
}

fn label_of(scene: &SceneSpec, id: &str) -> Option<String> {
    scene
        .receptacle(id)
        .map(|r| r.label.clone())
        .or_else(|| scene.object(id).map(|o| o.label.clone()))
}

fn bindings(step: &KeyStep, scene: &SceneSpec) -> Bindings {
    let mut b = Bindings::new()
        .set("instruction", &step.task.instruction)
        .set("history", &step.history)
        .set("n_frames", step.frames.len());
    for (k, id) in [("object", &step.task.object), ("start", &step.task.start_rec), ("goal", &step.task.goal_rec)] {
        if let Some(l) = label_of(scene, id) {
            b = b.set(k, l);
        }
    }
    if let Some(f) = step.answer.frame_index() {
        b = b.set("frame", f);
    }
    b
}

/// Builds one record per key step. `steps` must be grouped per episode in
/// step order; records missing a template binding are skipped.
pub fn build_qa_records(
    steps: &[KeyStep],
    scenes: &[SceneSpec],
    bank: &TemplateBank,
    phrasing: Phrasing,
    augmenter: &dyn Augmenter,
) -> (Vec<QARecord>, Vec<SkippedRecord>) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for step in steps {
        let Some(scene) = scenes.iter().find(|s| s.scene_id == step.scene_id) else {
            skipped.push(SkippedRecord {
                episode_id: step.episode_id.clone(),
                step: step.step,
                checkpoint: step.checkpoint,
                error: TemplateError::Hole("scene".into()),
            });
            continue;
        };
        let b = bindings(step, scene);
        let (rs, ss) = step.phase.slots();
        let key = step.task.task_id.as_str();
        let built = (|| -> Result<QARecord, TemplateError> {
            let question = bank.question(phrasing, key, &b)?;
            let reasoning = bank.reasoning(rs, phrasing, key, &b)?;
            let summary = bank.summarization(ss, phrasing, key, &b)?;
            let object_label = b.get("object").ok_or_else(|| TemplateError::Hole("object".into()))?.to_string();
            let action = HighLevelAction::new(step.answer, augmenter.paraphrase(&reasoning), augmenter.paraphrase(&summary));
            let mut images: Vec<ImageRef> = step
                .frames
                .iter()
                .map(|f| ImageRef {
                    name: format!("scene_frame_{}", f.index),
                    pose: f.pose,
                })
                .collect();
            images.push(ImageRef {
                name: "ego".into(),
                pose: step.robot.base,
            });
            Ok(QARecord {
                record_id: format!("{}-s{:02}-c{:03}", step.episode_id, step.step, step.checkpoint),
                episode_id: step.episode_id.clone(),
                scene_id: step.scene_id.clone(),
                step: step.step,
                checkpoint: step.checkpoint,
                role: step.role,
                task_description: step.task.instruction.clone(),
                context_description: augmenter.paraphrase(&step.history),
                images,
                question,
                answer: action.to_json(),
                action_information: action_information(&step.answer),
                object_label,
                robot: step.robot.clone(),
                objects: step.objects.clone(),
                frames: step.frames.clone(),
                task: step.task.clone(),
            })
        })();
        match built {
            Ok(r) => records.push(r),
            Err(error) => skipped.push(SkippedRecord {
                episode_id: step.episode_id.clone(),
                step: step.step,
                checkpoint: step.checkpoint,
                error,
            }),
        }
    }
    (records, skipped)
}

/// Records whose context does not equal the summarization emitted at the
/// previous step of the same episode, as `(record_id, expected, found)`.
pub fn chain_violations(records: &[QARecord]) -> Vec<(String, String, String)> {
    use std::collections::BTreeMap;
    let mut by_step: BTreeMap<(&str, usize), String> = BTreeMap::new();
    for r in records {
        if let Ok(a) = r.parsed_answer() {
            by_step.insert((r.episode_id.as_str(), r.step), a.summarization);
        }
    }
    let mut bad = Vec::new();
    for r in records {
        let expected = if r.step == 0 {
            Some(crate::agent::INITIAL_HISTORY.to_string())
        } else {
            by_step.get(&(r.episode_id.as_str(), r.step - 1)).cloned()
        };
        if let Some(e) = expected {
            if e != r.context_description {
                bad.push((r.record_id.clone(), e, r.context_description.clone()));
            }
        }
    }
    bad
}
