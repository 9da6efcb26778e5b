use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningSlot {
    SearchStart,
    ApproachObject,
    Pick,
    SearchGoal,
    ApproachGoal,
    Place,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummarySlot {
    Start,
    Approach,
    Picked,
    ApproachGoal,
    Placed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template references unbound placeholder {{{0}}}")]
    Hole(String),
    #[error("unterminated placeholder in {0:?}")]
    Unterminated(String),
    #[error("template bank has no phrasings for {0}")]
    EmptySlot(String),
    #[error("template bank: {0}")]
    Load(String),
}

/// Phrasings for every text slot the oracle and the data pipeline fill in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateBank {
    pub version: u32,
    pub question: Vec<String>,
    pub reasoning: BTreeMap<ReasoningSlot, Vec<String>>,
    pub summarization: BTreeMap<SummarySlot, Vec<String>>,
}

pub static TEMPLATE_BANK: LazyLock<TemplateBank> = LazyLock::new(|| {
    TemplateBank::from_json(include_str!("../../data/templates.json")).expect("bundled template bank is valid")
});

/// Which phrasing of a slot to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "seed")]
pub enum Phrasing {
    /// Always the first phrasing.
    #[default]
    Canonical,
    /// A phrasing picked by hashing the seed with a caller key.
    Varied(u64),
}

impl Phrasing {
    pub fn pick(&self, key: &str, n: usize) -> usize {
        match *self {
            Phrasing::Canonical => 0,
            Phrasing::Varied(seed) => {
                let mut h = Sha256::new();
                h.update(seed.to_le_bytes());
                h.update(key.as_bytes());
                let d = h.finalize();
                let v = u64::from_le_bytes(d[..8].try_into().expect("8 bytes"));
                (v % n as u64) as usize
            }
        }
    }
}

/// Entity names bound into templates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    vars: BTreeMap<String, String>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.vars.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.vars.get(key).map(String::as_str)
    }
}

/// Substitutes `{name}` placeholders.
pub fn render(template: &str, b: &Bindings) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| TemplateError::Unterminated(template.to_string()))?;
        let name = &after[..close];
        let value = b.get(name).ok_or_else(|| TemplateError::Hole(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl TemplateBank {
    pub fn from_json(text: &str) -> Result<Self, TemplateError> {
        let bank: TemplateBank = serde_json::from_str(text).map_err(|e| TemplateError::Load(e.to_string()))?;
        if bank.question.is_empty() {
            return Err(TemplateError::EmptySlot("question".into()));
        }
        for (k, v) in &bank.reasoning {
            if v.is_empty() {
                return Err(TemplateError::EmptySlot(format!("{k:?}")));
            }
        }
        for (k, v) in &bank.summarization {
            if v.is_empty() {
                return Err(TemplateError::EmptySlot(format!("{k:?}")));
            }
        }
        Ok(bank)
    }

    fn choose<'a>(list: Option<&'a Vec<String>>, name: &str, ph: Phrasing, key: &str) -> Result<&'a str, TemplateError> {
        let list = list
            .filter(|l| !l.is_empty())
            .ok_or_else(|| TemplateError::EmptySlot(name.to_string()))?;
        Ok(&list[ph.pick(&format!("{name}/{key}"), list.len())])
    }

    pub fn reasoning(&self, slot: ReasoningSlot, ph: Phrasing, key: &str, b: &Bindings) -> Result<String, TemplateError> {
        render(Self::choose(self.reasoning.get(&slot), &format!("{slot:?}"), ph, key)?, b)
    }

    pub fn summarization(&self, slot: SummarySlot, ph: Phrasing, key: &str, b: &Bindings) -> Result<String, TemplateError> {
        render(Self::choose(self.summarization.get(&slot), &format!("{slot:?}"), ph, key)?, b)
    }

    pub fn question(&self, ph: Phrasing, key: &str, b: &Bindings) -> Result<String, TemplateError> {
        render(Self::choose(Some(&self.question), "question", ph, key)?, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_bank_has_all_slots() {
        let bank = &*TEMPLATE_BANK;
        assert_eq!(bank.reasoning.len(), 6);
        assert_eq!(bank.summarization.len(), 5);
        for v in bank.summarization.values() {
            assert!(v.len() >= 8);
            assert!(v.iter().all(|s| s.starts_with("The task has started and")));
        }
    }

    #[test]
    fn render_fills_and_reports_holes() {
        let b = Bindings::new().set("object", "cup").set("start", "table");
        assert_eq!(render("a {object} on the {start}.", &b).unwrap(), "a cup on the table.");
        assert_eq!(render("{goal}", &b), Err(TemplateError::Hole("goal".into())));
        assert!(matches!(render("{oops", &b), Err(TemplateError::Unterminated(_))));
    }

    #[test]
    fn canonical_picks_first_and_varied_is_stable() {
        let b = Bindings::new().set("object", "cup").set("start", "table").set("goal", "sofa");
        let bank = &*TEMPLATE_BANK;
        let s = bank.summarization(SummarySlot::ApproachGoal, Phrasing::Canonical, "k", &b).unwrap();
        assert_eq!(
            s,
            "The task has started and I have navigated to table and picked up the cup, \
             I am getting closer to sofa where I should place cup."
        );
        let v1 = bank.summarization(SummarySlot::Picked, Phrasing::Varied(9), "ep-3", &b).unwrap();
        let v2 = bank.summarization(SummarySlot::Picked, Phrasing::Varied(9), "ep-3", &b).unwrap();
        assert_eq!(v1, v2);
        let distinct: std::collections::BTreeSet<usize> =
            (0..64).map(|k| Phrasing::Varied(k).pick("x", 8)).collect();
        assert!(distinct.len() > 4);
    }
}
