use serde::Deserialize;
use std::sync::LazyLock;

/// Descriptive receptacle and object names shipped with the crate.
#[derive(Debug, Clone, Deserialize)]
pub struct LabelBank {
    pub version: u32,
    pub receptacles: Vec<String>,
    pub objects: ObjectLabels,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ObjectLabels {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl LabelBank {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn is_test_object(&self, label: &str) -> bool {
        self.objects.test.iter().any(|l| l == label)
    }

    pub fn all_objects(&self) -> Vec<String> {
        self.objects.train.iter().chain(&self.objects.test).cloned().collect()
    }
}

pub static LABEL_BANK: LazyLock<LabelBank> = LazyLock::new(|| {
    LabelBank::from_json(include_str!("../../data/labels.json")).expect("bundled label bank parses")
});

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn bundled_bank_is_disjoint_and_unique() {
        let bank = &*LABEL_BANK;
        let train: HashSet<_> = bank.objects.train.iter().collect();
        let test: HashSet<_> = bank.objects.test.iter().collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.len(), bank.objects.train.len());
        let recs: HashSet<_> = bank.receptacles.iter().collect();
        assert_eq!(recs.len(), bank.receptacles.len());
        assert!(bank.receptacles.iter().any(|r| r == "Hisa Wooden Console"));
    }
}
