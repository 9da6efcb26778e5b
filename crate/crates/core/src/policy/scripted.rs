use super::{Policy, PolicyDescriptor, PolicyError};
use crate::agent::{AgentContext, Command, GroundTruth, HighLevelAction};
use serde::{Deserialize, Serialize};

/// Retrieves the same scene frame forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatSearchPolicy {
    pub frame: usize,
}

impl Policy for RepeatSearchPolicy {
    fn decide(&self, ctx: &AgentContext, _truth: &GroundTruth) -> Result<String, PolicyError> {
        let a = HighLevelAction::new(
            Command::SearchSceneFrame(self.frame),
            format!("The target should be in scene frame {}.", self.frame),
            ctx.history,
        );
        Ok(a.to_json())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("repeat-search", self)
    }
}

/// Always answers with text that is not JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidJsonPolicy;

impl Policy for InvalidJsonPolicy {
    fn decide(&self, _ctx: &AgentContext, _truth: &GroundTruth) -> Result<String, PolicyError> {
        Ok("I think I should pick up the object.".to_string())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("invalid-json", self)
    }
}

/// Returns the same text at every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedTextPolicy {
    pub text: String,
}

impl Policy for FixedTextPolicy {
    fn decide(&self, _ctx: &AgentContext, _truth: &GroundTruth) -> Result<String, PolicyError> {
        Ok(self.text.clone())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("fixed", self)
    }
}
