//! Prompt assembly from versioned template assets.
//!
//! Templates live under `assets/prompts/` and are compiled into the binary.
//! Rendering is deterministic text assembly: role skeleton, global-knowledge
//! block when present, cognitive-map block when present, focus points,
//! history suffix, and the action-format instruction. Distinct inputs render
//! to distinct text (every block is fully serialized under a labeled
//! header).

use crate::error::Result;
use crate::types::{CognitiveMap, EnvId, GlobalKnowledge};

use super::{PromptContext, RoleTemplate};

/// Bumped whenever any template asset changes shape.
pub const PROMPT_VERSION: u32 = 1;

const SCOUT_HOUSE: &str = include_str!("../../assets/prompts/scout_house.txt");
const SCOUT_CRAFT: &str = include_str!("../../assets/prompts/scout_craft.txt");
const SCOUT_GRID: &str = include_str!("../../assets/prompts/scout_grid.txt");
const EXECUTOR_HOUSE: &str = include_str!("../../assets/prompts/executor_house.txt");
const EXECUTOR_CRAFT: &str = include_str!("../../assets/prompts/executor_craft.txt");
const EXECUTOR_GRID: &str = include_str!("../../assets/prompts/executor_grid.txt");
const COMAP_STRATEGY: &str = include_str!("../../assets/prompts/comap_strategy.txt");
const FOCUS_ANALYZER: &str = include_str!("../../assets/prompts/focus_analyzer.txt");
const DISTILLER: &str = include_str!("../../assets/prompts/distiller.txt");
const REFLECTOR: &str = include_str!("../../assets/prompts/reflector.txt");
const EXTRACTOR: &str = include_str!("../../assets/prompts/extractor.txt");
const EXPLORER: &str = include_str!("../../assets/prompts/explorer.txt");

const CONTEXT_MARKER: &str = "{context_blocks}";

fn executor_template(env_id: EnvId) -> &'static str {
    match env_id {
        EnvId::House => EXECUTOR_HOUSE,
        EnvId::Craft => EXECUTOR_CRAFT,
        EnvId::Grid => EXECUTOR_GRID,
    }
}

fn scout_template(env_id: EnvId) -> &'static str {
    match env_id {
        EnvId::House => SCOUT_HOUSE,
        EnvId::Craft => SCOUT_CRAFT,
        EnvId::Grid => SCOUT_GRID,
    }
}

fn knowledge_block(kg: &GlobalKnowledge) -> String {
    let mut out = String::from("Global Knowledge:\n");
    let section = |title: &str, rules: &[crate::types::Rule], out: &mut String| {
        if rules.is_empty() {
            return;
        }
        out.push_str(title);
        out.push('\n');
        for rule in rules {
            out.push_str("- ");
            out.push_str(&rule.statement);
            out.push('\n');
        }
    };
    section("Action Syntax:", &kg.action_syntax, &mut out);
    section("Interaction Rules:", &kg.interaction_rules, &mut out);
    section("Error Patterns:", &kg.error_patterns, &mut out);
    out
}

fn map_block(map: &CognitiveMap) -> String {
    let mut out = String::from("Cognitive Map:\n");
    if map.is_empty() {
        out.push_str("(no entries yet)\n");
        return out;
    }
    for entry in map.entries() {
        out.push_str(&format!(
            "{} | {} | {} | {}\n",
            match entry.kind {
                crate::types::KnowledgeKind::Spatial => "spatial",
                crate::types::KnowledgeKind::Affordance => "affordance",
                crate::types::KnowledgeKind::Rule => "rule",
                crate::types::KnowledgeKind::Negative => "negative",
            },
            entry.subject,
            entry.relation,
            entry.object
        ));
    }
    out
}

fn history_block(ctx: &PromptContext) -> String {
    if ctx.history.is_empty() {
        return String::new();
    }
    let mut out = String::from("History:\n");
    for step in ctx.history {
        if let Some(thought) = &step.thought {
            out.push_str(&format!("Thought: {thought}\n"));
        }
        out.push_str(&format!("Action: {}\n", step.action.text));
        out.push_str(&format!("Observation: {}\n", step.observation.text));
    }
    out
}

fn focus_block(ctx: &PromptContext) -> String {
    match ctx.focus_points {
        Some(points) if !points.is_empty() => {
            let mut out = String::from("Focus Points:\n");
            for (i, p) in points.iter().enumerate() {
                out.push_str(&format!("{}. {p}\n", i + 1));
            }
            out
        }
        _ => String::new(),
    }
}

/// Render the full prompt for a context.
pub fn render_prompt(ctx: &PromptContext) -> Result<String> {
    ctx.validate()?;
    let env_id = ctx.instruction.env_id;
    let mut out = String::new();

    match ctx.role {
        RoleTemplate::Scout => {
            out.push_str(scout_template(env_id));
            if let Some(kg) = ctx.global_knowledge {
                out.push_str(&knowledge_block(kg));
            }
        }
        RoleTemplate::ExecutorMap => {
            let mut blocks = String::new();
            if let Some(kg) = ctx.global_knowledge {
                blocks.push_str(&knowledge_block(kg));
            }
            if let Some(map) = ctx.cognitive_map {
                blocks.push_str(&map_block(map));
            }
            out.push_str(&executor_template(env_id).replace(CONTEXT_MARKER, &blocks));
        }
        RoleTemplate::ExecutorReact => {
            out.push_str(&executor_template(env_id).replace(CONTEXT_MARKER, ""));
        }
        RoleTemplate::ExecutorComap => {
            let mut blocks = String::from(COMAP_STRATEGY);
            if let Some(map) = ctx.cognitive_map {
                blocks.push_str(&map_block(map));
            }
            out.push_str(&executor_template(env_id).replace(CONTEXT_MARKER, &blocks));
        }
        RoleTemplate::FocusAnalyzer => out.push_str(FOCUS_ANALYZER),
        RoleTemplate::Distiller => out.push_str(DISTILLER),
        RoleTemplate::Reflector => out.push_str(REFLECTOR),
        RoleTemplate::Extractor => out.push_str(EXTRACTOR),
        RoleTemplate::Explorer => {
            out.push_str(EXPLORER);
            if let Some(kg) = ctx.global_knowledge {
                out.push_str(&knowledge_block(kg));
            }
        }
    }

    out.push_str(&focus_block(ctx));
    out.push_str(&format!("Task: {}\n", ctx.instruction.text));
    out.push_str(&history_block(ctx));

    match ctx.role {
        RoleTemplate::Scout
        | RoleTemplate::Explorer
        | RoleTemplate::ExecutorMap
        | RoleTemplate::ExecutorReact
        | RoleTemplate::ExecutorComap => {
            out.push_str("Reply with your reasoning, then one final line of the form \"Action: <command>\".\n");
        }
        _ => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::*;

    fn kg_with(statements: &[&str]) -> GlobalKnowledge {
        GlobalKnowledge {
            env_id: Some(EnvId::House),
            action_syntax: statements
                .iter()
                .map(|s| Rule {
                    statement: s.to_string(),
                    evidence: vec![Evidence {
                        trajectory: "t".into(),
                        step: 0,
                    }],
                })
                .collect(),
            interaction_rules: Vec::new(),
            error_patterns: Vec::new(),
        }
    }

    #[test]
    fn scout_prompt_carries_priorities_and_constraint() {
        let instr = Instruction::new("put a cup in shelf 1.", EnvId::House, "pick_place", 1);
        let ctx = PromptContext::new(RoleTemplate::Scout, &instr);
        let text = render_prompt(&ctx).unwrap();
        assert!(text.contains("1. Map the environmental distribution"));
        assert!(text.contains("2. Probe action consequences"));
        assert!(text.contains("3. Record task-relevant affordances"));
        assert!(text.contains("Gather information rather than complete the task"));
    }

    #[test]
    fn executor_map_carries_rules_verbatim_in_order() {
        let instr = Instruction::new("put a cup in shelf 1.", EnvId::House, "pick_place", 1);
        let kg = kg_with(&["rule alpha", "rule beta", "rule gamma"]);
        let map = CognitiveMap::new(EnvId::House, "t");
        let mut ctx = PromptContext::new(RoleTemplate::ExecutorMap, &instr);
        ctx.global_knowledge = Some(&kg);
        ctx.cognitive_map = Some(&map);
        let text = render_prompt(&ctx).unwrap();
        let a = text.find("rule alpha").unwrap();
        let b = text.find("rule beta").unwrap();
        let c = text.find("rule gamma").unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn react_prompt_has_no_knowledge_or_map_block() {
        let instr = Instruction::new("put a cup in shelf 1.", EnvId::House, "pick_place", 1);
        let ctx = PromptContext::new(RoleTemplate::ExecutorReact, &instr);
        let text = render_prompt(&ctx).unwrap();
        assert!(!text.contains("Global Knowledge:"));
        assert!(!text.contains("Cognitive Map:"));
        assert!(!text.contains(CONTEXT_MARKER));
    }

    #[test]
    fn react_rejects_injected_context() {
        let instr = Instruction::new("x", EnvId::House, "pick_place", 1);
        let kg = kg_with(&["r"]);
        let mut ctx = PromptContext::new(RoleTemplate::ExecutorReact, &instr);
        ctx.global_knowledge = Some(&kg);
        assert!(render_prompt(&ctx).is_err());
    }

    #[test]
    fn rendering_is_injective_across_context_changes() {
        let instr = Instruction::new("put a cup in shelf 1.", EnvId::House, "pick_place", 1);
        let mut map1 = CognitiveMap::new(EnvId::House, "t");
        map1.insert(KnowledgeEntry::observed(
            KnowledgeKind::Spatial,
            "cup 2",
            "at",
            "countertop 1",
            0,
        ));
        let mut map2 = map1.clone();
        map2.insert(KnowledgeEntry::observed(
            KnowledgeKind::Spatial,
            "plate 1",
            "at",
            "shelf 1",
            0,
        ));
        let kg = kg_with(&["r"]);
        let mut texts = Vec::new();
        for map in [&map1, &map2] {
            let mut ctx = PromptContext::new(RoleTemplate::ExecutorMap, &instr);
            ctx.global_knowledge = Some(&kg);
            ctx.cognitive_map = Some(map);
            texts.push(render_prompt(&ctx).unwrap());
        }
        assert_ne!(texts[0], texts[1]);
    }
}
