//! Instruction-text parsing into a structured task description.
//!
//! Agents only ever see the instruction text; this parser is the agent-side
//! reading of it. Instruction grammars are fixed per task family, so parsing
//! is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EnvId, Instruction};

/// House task family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HouseTaskKind {
    PickPlace,
    HeatPlace,
    CoolPlace,
    CleanPlace,
    ExamineLight,
    PickTwo,
}

impl HouseTaskKind {
    /// The state-changing verb required before placement, if any.
    pub fn device_verb(self) -> Option<&'static str> {
        match self {
            HouseTaskKind::HeatPlace => Some("heat"),
            HouseTaskKind::CoolPlace => Some("cool"),
            HouseTaskKind::CleanPlace => Some("clean"),
            _ => None,
        }
    }
}

/// Structured reading of an instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskSpec {
    House {
        kind: HouseTaskKind,
        target_class: String,
        /// Placement destination; None for examine-in-light.
        destination: Option<String>,
    },
    Craft {
        target_item: String,
    },
    Grid,
}

fn strip_article(s: &str) -> &str {
    for prefix in ["a ", "an ", "the "] {
        if let Some(rest) = s.strip_prefix(prefix) {
            return rest;
        }
    }
    s
}

/// Parse an instruction into its task structure.
pub fn parse_task(instruction: &Instruction) -> Result<TaskSpec> {
    let text = instruction.text.trim_end_matches('.');
    match instruction.env_id {
        EnvId::Grid => Ok(TaskSpec::Grid),
        EnvId::Craft => {
            let rest = text
                .strip_prefix("craft 1 ")
                .ok_or_else(|| Error::InvalidInput(format!("unparseable craft task: {text}")))?;
            Ok(TaskSpec::Craft {
                target_item: rest.to_string(),
            })
        }
        EnvId::House => {
            if let Some(rest) = text.strip_prefix("put two ") {
                // "put two apples in shelf 1"
                let (plural, dest) = rest
                    .split_once(" in ")
                    .ok_or_else(|| Error::InvalidInput(format!("unparseable task: {text}")))?;
                let class = plural.strip_suffix('s').unwrap_or(plural);
                return Ok(TaskSpec::House {
                    kind: HouseTaskKind::PickTwo,
                    target_class: class.to_string(),
                    destination: Some(dest.to_string()),
                });
            }
            if let Some(rest) = text.strip_prefix("put ") {
                // "put a cup in shelf 1"
                let (class, dest) = rest
                    .split_once(" in ")
                    .ok_or_else(|| Error::InvalidInput(format!("unparseable task: {text}")))?;
                return Ok(TaskSpec::House {
                    kind: HouseTaskKind::PickPlace,
                    target_class: strip_article(class).to_string(),
                    destination: Some(dest.to_string()),
                });
            }
            for (prefix, kind) in [
                ("heat ", HouseTaskKind::HeatPlace),
                ("cool ", HouseTaskKind::CoolPlace),
                ("clean ", HouseTaskKind::CleanPlace),
            ] {
                if let Some(rest) = text.strip_prefix(prefix) {
                    // "heat an egg and put it in garbagecan 1"
                    let (class, dest) = rest
                        .split_once(" and put it in ")
                        .ok_or_else(|| Error::InvalidInput(format!("unparseable task: {text}")))?;
                    return Ok(TaskSpec::House {
                        kind,
                        target_class: strip_article(class).to_string(),
                        destination: Some(dest.to_string()),
                    });
                }
            }
            if let Some(rest) = text.strip_prefix("examine ") {
                // "examine the book under the desklamp"
                let class = rest
                    .strip_suffix(" under the desklamp")
                    .ok_or_else(|| Error::InvalidInput(format!("unparseable task: {text}")))?;
                return Ok(TaskSpec::House {
                    kind: HouseTaskKind::ExamineLight,
                    target_class: strip_article(class).to_string(),
                    destination: None,
                });
            }
            Err(Error::InvalidInput(format!("unparseable task: {text}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instr(text: &str, env: EnvId) -> Instruction {
        Instruction::new(text, env, "t", 0)
    }

    #[test]
    fn parses_each_house_family() {
        let spec = parse_task(&instr("put a cup in shelf 1.", EnvId::House)).unwrap();
        assert_eq!(
            spec,
            TaskSpec::House {
                kind: HouseTaskKind::PickPlace,
                target_class: "cup".into(),
                destination: Some("shelf 1".into()),
            }
        );

        let spec = parse_task(&instr("heat an egg and put it in garbagecan 1.", EnvId::House)).unwrap();
        assert_eq!(
            spec,
            TaskSpec::House {
                kind: HouseTaskKind::HeatPlace,
                target_class: "egg".into(),
                destination: Some("garbagecan 1".into()),
            }
        );

        let spec = parse_task(&instr("examine the book under the desklamp.", EnvId::House)).unwrap();
        assert_eq!(
            spec,
            TaskSpec::House {
                kind: HouseTaskKind::ExamineLight,
                target_class: "book".into(),
                destination: None,
            }
        );

        let spec = parse_task(&instr("put two apples in fridge 1.", EnvId::House)).unwrap();
        assert_eq!(
            spec,
            TaskSpec::House {
                kind: HouseTaskKind::PickTwo,
                target_class: "apple".into(),
                destination: Some("fridge 1".into()),
            }
        );
    }

    #[test]
    fn parses_craft_target() {
        let spec = parse_task(&instr("craft 1 stone table.", EnvId::Craft)).unwrap();
        assert_eq!(
            spec,
            TaskSpec::Craft {
                target_item: "stone table".into()
            }
        );
    }
}
