use super::collect::DatagenError;
use super::records::QARecord;
use crate::agent::ActionKind;
use crate::canonical;
use crate::world::{SceneSpec, SceneSplit, LABEL_BANK};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Which scenes and object labels belong to the held-out split.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_scenes: BTreeSet<String>,
    pub test_object_labels: BTreeSet<String>,
}

impl SplitConfig {
    /// Test scenes from the scenes' own split tags, test labels from the
    /// bundled label bank.
    pub fn from_scenes(scenes: &[SceneSpec]) -> Self {
        Self {
            test_scenes: scenes
                .iter()
                .filter(|s| s.split == SceneSplit::Test)
                .map(|s| s.scene_id.clone())
                .collect(),
            test_object_labels: LABEL_BANK.objects.test.iter().cloned().collect(),
        }
    }

    pub fn split_of(&self, scene_id: &str) -> SceneSplit {
        if self.test_scenes.contains(scene_id) {
            SceneSplit::Test
        } else {
            SceneSplit::Train
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub records: usize,
    pub per_kind: BTreeMap<String, usize>,
    pub scenes: usize,
    pub episodes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub ok: bool,
    pub leaked_labels: Vec<String>,
    pub shared_labels: Vec<String>,
    pub shared_scenes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub train: SplitCounts,
    pub test: SplitCounts,
    pub leakage: LeakageReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub yield_stats: Option<super::YieldStats>,
    pub skipped_records: usize,
}

fn counts(records: &[&QARecord]) -> SplitCounts {
    let mut per_kind: BTreeMap<String, usize> = ActionKind::ALL.iter().map(|k| (k.as_str().to_string(), 0)).collect();
    for r in records {
        *per_kind.entry(r.kind().as_str().to_string()).or_default() += 1;
    }
    SplitCounts {
        records: records.len(),
        per_kind,
        scenes: records.iter().map(|r| &r.scene_id).collect::<BTreeSet<_>>().len(),
        episodes: records.iter().map(|r| &r.episode_id).collect::<BTreeSet<_>>().len(),
    }
}

/// Train records carrying held-out labels, and overlap between the splits.
pub fn check_leakage(records: &[QARecord], cfg: &SplitConfig) -> LeakageReport {
    let mut train_labels = BTreeSet::new();
    let mut test_labels = BTreeSet::new();
    let mut train_scenes = BTreeSet::new();
    let mut test_scenes = BTreeSet::new();
    for r in records {
        match cfg.split_of(&r.scene_id) {
            SceneSplit::Test => {
                test_labels.insert(r.object_label.clone());
                test_scenes.insert(r.scene_id.clone());
            }
            _ => {
                train_labels.insert(r.object_label.clone());
                train_scenes.insert(r.scene_id.clone());
            }
        }
    }
    let leaked: Vec<String> = train_labels.intersection(&cfg.test_object_labels).cloned().collect();
    let shared: Vec<String> = train_labels.intersection(&test_labels).cloned().collect();
    let shared_scenes: Vec<String> = train_scenes.intersection(&test_scenes).cloned().collect();
    LeakageReport {
        ok: leaked.is_empty() && shared.is_empty() && shared_scenes.is_empty(),
        leaked_labels: leaked,
        shared_labels: shared,
        shared_scenes,
    }
}

/// Records in export order: scene, episode, step, checkpoint.
pub fn sort_records(records: &mut [QARecord]) {
    records.sort_by(|a, b| {
        (&a.scene_id, &a.episode_id, a.step, a.checkpoint).cmp(&(&b.scene_id, &b.episode_id, b.step, b.checkpoint))
    });
}

pub fn to_jsonl(records: &[&QARecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&canonical::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_records(text: &str) -> Result<Vec<QARecord>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

/// Writes `train.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
/// Nothing is written when a held-out label leaks into train.
pub fn export_jsonl(records: &[QARecord], dir: &Path, cfg: &SplitConfig) -> Result<Manifest, DatagenError> {
    let leakage = check_leakage(records, cfg);
    if !leakage.ok {
        let mut labels = leakage.leaked_labels.clone();
        labels.extend(leakage.shared_labels.iter().cloned());
        labels.extend(leakage.shared_scenes.iter().map(|s| format!("scene {s}")));
        return Err(DatagenError::Leakage(labels));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let (test, train): (Vec<&QARecord>, Vec<&QARecord>) =
        sorted.iter().partition(|r| cfg.split_of(&r.scene_id) == SceneSplit::Test);
    let manifest = Manifest {
        train: counts(&train),
        test: counts(&test),
        leakage,
        yield_stats: None,
        skipped_records: 0,
    };
    let io = |e: std::io::Error| DatagenError::Io(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("train.jsonl"), to_jsonl(&train)).map_err(io)?;
    std::fs::write(dir.join("test.jsonl"), to_jsonl(&test)).map_err(io)?;
    write_manifest(&manifest, dir)?;
    Ok(manifest)
}

pub fn write_manifest(m: &Manifest, dir: &Path) -> Result<(), DatagenError> {
    let text = canonical::to_string(m).map_err(|e| DatagenError::Io(e.to_string()))? + "\n";
    std::fs::write(dir.join("manifest.json"), text).map_err(|e| DatagenError::Io(e.to_string()))
}
