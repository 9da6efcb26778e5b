use crate::canonical;
use crate::sim::BboxNorm;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    SearchSceneFrame,
    NavToPoint,
    Pick,
    Place,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::SearchSceneFrame,
        ActionKind::NavToPoint,
        ActionKind::Pick,
        ActionKind::Place,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::SearchSceneFrame => "search_scene_frame",
            ActionKind::NavToPoint => "nav_to_point",
            ActionKind::Pick => "pick",
            ActionKind::Place => "place",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The action together with its single argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", content = "arg", rename_all = "snake_case")]
pub enum Command {
    SearchSceneFrame(usize),
    NavToPoint(BboxNorm),
    Pick(BboxNorm),
    Place(BboxNorm),
}

impl Command {
    pub fn kind(&self) -> ActionKind {
        match self {
            Command::SearchSceneFrame(_) => ActionKind::SearchSceneFrame,
            Command::NavToPoint(_) => ActionKind::NavToPoint,
            Command::Pick(_) => ActionKind::Pick,
            Command::Place(_) => ActionKind::Place,
        }
    }

    pub fn bbox(&self) -> Option<BboxNorm> {
        match *self {
            Command::SearchSceneFrame(_) => None,
            Command::NavToPoint(b) | Command::Pick(b) | Command::Place(b) => Some(b),
        }
    }

    pub fn frame_index(&self) -> Option<usize> {
        match *self {
            Command::SearchSceneFrame(k) => Some(k),
            _ => None,
        }
    }

    pub fn with_bbox(kind: ActionKind, b: BboxNorm) -> Option<Self> {
        match kind {
            ActionKind::NavToPoint => Some(Command::NavToPoint(b)),
            ActionKind::Pick => Some(Command::Pick(b)),
            ActionKind::Place => Some(Command::Place(b)),
            ActionKind::SearchSceneFrame => None,
        }
    }

    /// The supervision target as it appears in answers: a bare index or a
    /// nested box.
    pub fn args_value(&self) -> Value {
        match *self {
            Command::SearchSceneFrame(k) => json!(k),
            Command::NavToPoint(b) | Command::Pick(b) | Command::Place(b) => json!([b]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighLevelAction {
    pub command: Command,
    pub reasoning: String,
    pub summarization: String,
}

impl HighLevelAction {
    pub fn new(command: Command, reasoning: impl Into<String>, summarization: impl Into<String>) -> Self {
        Self {
            command,
            reasoning: reasoning.into(),
            summarization: summarization.into(),
        }
    }

    pub fn kind(&self) -> ActionKind {
        self.command.kind()
    }

    pub fn to_value(&self) -> Value {
        json!({
            "reasoning": self.reasoning,
            "action": {"name": self.kind().as_str(), "args": self.command.args_value()},
            "summarization": self.summarization,
        })
    }

    /// Policy-output form of the action.
    pub fn to_json(&self) -> String {
        canonical::value_to_string(&self.to_value())
    }

    /// Checks arguments that depend on the episode, i.e. the frame index.
    pub fn validate(&self, n_frames: usize) -> Result<(), ParseError> {
        match self.command {
            Command::SearchSceneFrame(k) if k >= n_frames => Err(ParseError::BadArguments(format!(
                "frame index {k} out of range for {n_frames} frames"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("bad arguments: {0}")]
    BadArguments(String),
}

fn as_int(v: &Value) -> Option<u64> {
    v.as_u64()
}

fn parse_bbox(args: &Value) -> Result<BboxNorm, ParseError> {
    let bad = |m: &str| ParseError::BadArguments(format!("{m}: {args}"));
    let arr = args.as_array().ok_or_else(|| bad("expected [[x1, y1, x2, y2]]"))?;
    let flat = match arr.as_slice() {
        [inner] if inner.is_array() => inner.as_array().expect("checked"),
        _ => arr,
    };
    if flat.len() != 4 {
        return Err(bad("expected four coordinates"));
    }
    let mut b = [0u32; 4];
    for (slot, v) in b.iter_mut().zip(flat) {
        let n = as_int(v).ok_or_else(|| bad("coordinates must be non-negative integers"))?;
        if n > 1000 {
            return Err(bad("coordinate outside [0, 1000]"));
        }
        *slot = n as u32;
    }
    if b[0] > b[2] || b[1] > b[3] {
        return Err(bad("corners out of order"));
    }
    Ok(b)
}

/// Parses raw policy output of the form
/// `{"reasoning": .., "action": {"name": .., "args": ..}, "summarization": ..}`.
pub fn parse_action(text: &str) -> Result<HighLevelAction, ParseError> {
    let v: Value = serde_json::from_str(text.trim()).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| ParseError::MalformedJson("top level is not an object".into()))?;
    let text_field = |key: &str| -> Result<String, ParseError> {
        obj.get(key)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ParseError::MalformedJson(format!("missing string field {key:?}")))
    };
    let reasoning = text_field("reasoning")?;
    let summarization = text_field("summarization")?;
    let action = obj
        .get("action")
        .and_then(Value::as_object)
        .ok_or_else(|| ParseError::MalformedJson("missing object field \"action\"".into()))?;
    let name = action
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| ParseError::MalformedJson("missing action name".into()))?;
    let kind = ActionKind::from_name(name).ok_or_else(|| ParseError::UnknownAction(name.to_string()))?;
    let args = action.get("args").unwrap_or(&Value::Null);
    let command = match kind {
        ActionKind::SearchSceneFrame => {
            let k = as_int(args).ok_or_else(|| {
                ParseError::BadArguments(format!("frame index must be a non-negative integer: {args}"))
            })?;
            Command::SearchSceneFrame(k as usize)
        }
        k => Command::with_bbox(k, parse_bbox(args)?).expect("bbox kinds"),
    };
    Ok(HighLevelAction {
        command,
        reasoning,
        summarization,
    })
}

/// Schema description sent to remote policies.
pub const ACTION_SCHEMA_DOC: &str = "Reply with one JSON object: \
{\"reasoning\": string, \"action\": {\"name\": NAME, \"args\": ARGS}, \"summarization\": string}. \
NAME is one of search_scene_frame, nav_to_point, pick, place. \
For search_scene_frame ARGS is the integer index of a scene frame. \
For the other actions ARGS is [[x1, y1, x2, y2]], integers in [0, 1000] on the current ego frame, \
top-left origin, x1 <= x2 and y1 <= y2. \
summarization becomes the robot history at the next step.";

#[cfg(test)]
mod tests {
    use super::*;

    fn wrap(action: &str) -> String {
        format!(r#"{{"reasoning": "r", "action": {action}, "summarization": "s"}}"#)
    }

    #[test]
    fn nested_pick_box() {
        let a = parse_action(&wrap(r#"{"name":"pick","args":[[68,755,239,967]]}"#)).unwrap();
        assert_eq!(a.command, Command::Pick([68, 755, 239, 967]));
    }

    #[test]
    fn flat_box_also_accepted() {
        let a = parse_action(&wrap(r#"{"name":"place","args":[447,539,999,999]}"#)).unwrap();
        assert_eq!(a.command, Command::Place([447, 539, 999, 999]));
    }

    #[test]
    fn search_with_index() {
        let a = parse_action(&wrap(r#"{"name":"search_scene_frame","args":4}"#)).unwrap();
        assert_eq!(a.command, Command::SearchSceneFrame(4));
        assert!(a.validate(5).is_ok());
        assert!(matches!(a.validate(4), Err(ParseError::BadArguments(_))));
    }

    #[test]
    fn error_kinds_are_distinct() {
        assert!(matches!(parse_action("not json at all"), Err(ParseError::MalformedJson(_))));
        assert!(matches!(
            parse_action(&wrap(r#"{"name":"fly","args":1}"#)),
            Err(ParseError::UnknownAction(_))
        ));
        for args in ["[[1,2,3]]", "[[10,10,5,20]]", "[[0,0,1001,5]]", "[[0.5,0,1,1]]", "\"4\""] {
            let r = parse_action(&wrap(&format!(r#"{{"name":"nav_to_point","args":{args}}}"#)));
            assert!(matches!(r, Err(ParseError::BadArguments(_))), "{args}");
        }
        assert!(matches!(
            parse_action(&wrap(r#"{"name":"search_scene_frame","args":-1}"#)),
            Err(ParseError::BadArguments(_))
        ));
    }

    #[test]
    fn render_round_trips() {
        let a = HighLevelAction::new(Command::NavToPoint([1, 2, 300, 400]), "why", "so far");
        assert_eq!(parse_action(&a.to_json()).unwrap(), a);
        assert_eq!(
            a.to_json(),
            r#"{"action":{"args":[[1,2,300,400]],"name":"nav_to_point"},"reasoning":"why","summarization":"so far"}"#
        );
    }
}
