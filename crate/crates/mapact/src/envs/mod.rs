//! Deterministic, seedable desk-scale environments with hidden ground-truth
//! state, perturbation hooks, and exact observation grammars.
//!
//! Three engines share one interface:
//! - [`house`]: household object-manipulation tasks (pick/place, heat, cool,
//!   clean, examine under a lamp, pick-two);
//! - [`craft`]: recipe crafting with gatherable raw materials spread over
//!   resource locations;
//! - [`grid`]: a maze game on a colored pixel grid with a move counter and
//!   patrolling hazards, where action semantics are latent.
//!
//! Determinism contract: (seed, action sequence) fully determines every
//! observation byte. All generation flows through a ChaCha stream seeded
//! from the task coordinate.

pub mod craft;
pub mod grid;
pub mod house;
mod task;

pub use task::{parse_task, HouseTaskKind, TaskSpec};

use serde::{Deserialize, Serialize};

use crate::canon::stable_hash;
use crate::error::{Error, Result};
use crate::types::{Action, EnvId, Instruction, KnowledgeEntry, KnowledgeKind, Observation};

/// Result of applying one action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub done: bool,
    pub success: bool,
}

/// Mid-episode relocation of an object, used by the perturbation harness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// Number of acting steps completed when the relocation fires.
    pub trigger_step: usize,
    pub object: String,
    pub new_location: String,
}

/// Frozen engine state plus the complete derived fact set.
///
/// Facts use the same schema as cognitive-map entries so map precision and
/// recall reduce to set operations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthSnapshot {
    pub env_id: EnvId,
    pub seed: u64,
    /// Frozen copy of the hidden engine state.
    pub state: serde_json::Value,
    /// Complete enumeration of true spatial/affordance/negative (and, for
    /// grid, rule) facts.
    pub facts: Vec<KnowledgeEntry>,
    /// Every reachable location in the instance.
    pub locations: Vec<String>,
}

impl GroundTruthSnapshot {
    /// Identity set for precision/recall checks.
    pub fn fact_identities(&self) -> std::collections::BTreeSet<(KnowledgeKind, String, String, String)> {
        self.facts
            .iter()
            .map(|f| (f.kind, f.subject.clone(), f.relation.clone(), f.object.clone()))
            .collect()
    }

    pub fn facts_of(&self, kind: KnowledgeKind) -> impl Iterator<Item = &KnowledgeEntry> {
        self.facts.iter().filter(move |f| f.kind == kind)
    }
}

/// Common interface implemented by every engine.
///
/// Instances are single-owner: the harness may run many environments
/// concurrently, each confined to one worker. Snapshots are immutable and
/// freely shareable.
pub trait Env: Send {
    fn env_id(&self) -> EnvId;
    fn instruction(&self) -> &Instruction;
    fn initial_observation(&self) -> Observation;

    /// Apply one action. Inadmissible actions return the engine's fixed
    /// failure observation with `error_flag` set and never move objects.
    fn step(&mut self, action: &Action) -> Result<StepOutcome>;

    /// Exactly the actions whose `step()` would not set `error_flag`,
    /// sorted lexicographically by surface text. Empty at terminal states.
    fn admissible_actions(&self) -> Vec<Action>;

    /// Relocate an object mid-episode. The caller fires this when its acting
    /// step count equals `spec.trigger_step`; the engine re-checks that the
    /// trigger is not in the past.
    fn apply_perturbation(&mut self, spec: &PerturbationSpec) -> Result<()>;

    fn ground_truth(&self) -> GroundTruthSnapshot;
    fn is_terminal(&self) -> bool;

    /// Steps taken since reset (mapping and acting both count).
    fn step_counter(&self) -> usize;

    /// Steps taken since the acting stage began.
    fn acting_steps(&self) -> usize;

    /// Transition from the mapping stage to the acting stage and return the
    /// observation the acting loop starts from. The grid engine restarts the
    /// level attempt (player, counter, hazard phase); house and craft return
    /// the current view unchanged.
    fn begin_acting(&mut self) -> Observation;

    fn clone_env(&self) -> Box<dyn Env>;
}

/// Generate a world instance. The hidden solvability check regenerates with
/// derived sub-seeds a bounded number of times before giving up.
pub fn reset(env_id: EnvId, seed: u64, template: TaskTemplate) -> Result<Box<dyn Env>> {
    if template.env_id() != env_id {
        return Err(Error::InvalidInput(format!(
            "task template {template} belongs to {}, not {env_id}",
            template.env_id()
        )));
    }
    match env_id {
        EnvId::House => house::HouseEnv::generate(seed, template).map(|e| Box::new(e) as Box<dyn Env>),
        EnvId::Craft => craft::CraftEnv::generate(seed, template).map(|e| Box::new(e) as Box<dyn Env>),
        EnvId::Grid => grid::GridEnv::generate(seed, template).map(|e| Box::new(e) as Box<dyn Env>),
    }
}

/// Task families per environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskTemplate {
    PickPlace,
    HeatPlace,
    CoolPlace,
    CleanPlace,
    ExamineLight,
    PickTwo,
    CraftDepth1,
    CraftDepth2,
    Maze1,
    Maze2,
    Maze3,
}

impl TaskTemplate {
    pub fn env_id(self) -> EnvId {
        match self {
            TaskTemplate::PickPlace
            | TaskTemplate::HeatPlace
            | TaskTemplate::CoolPlace
            | TaskTemplate::CleanPlace
            | TaskTemplate::ExamineLight
            | TaskTemplate::PickTwo => EnvId::House,
            TaskTemplate::CraftDepth1 | TaskTemplate::CraftDepth2 => EnvId::Craft,
            TaskTemplate::Maze1 | TaskTemplate::Maze2 | TaskTemplate::Maze3 => EnvId::Grid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskTemplate::PickPlace => "pick_place",
            TaskTemplate::HeatPlace => "heat_place",
            TaskTemplate::CoolPlace => "cool_place",
            TaskTemplate::CleanPlace => "clean_place",
            TaskTemplate::ExamineLight => "examine_light",
            TaskTemplate::PickTwo => "pick_two",
            TaskTemplate::CraftDepth1 => "craft_1",
            TaskTemplate::CraftDepth2 => "craft_2",
            TaskTemplate::Maze1 => "maze_1",
            TaskTemplate::Maze2 => "maze_2",
            TaskTemplate::Maze3 => "maze_3",
        }
    }

    /// Default rotation used when a config does not pin templates.
    pub fn defaults_for(env_id: EnvId) -> &'static [TaskTemplate] {
        match env_id {
            EnvId::House => &[
                TaskTemplate::PickPlace,
                TaskTemplate::HeatPlace,
                TaskTemplate::CoolPlace,
                TaskTemplate::CleanPlace,
                TaskTemplate::ExamineLight,
                TaskTemplate::PickTwo,
            ],
            EnvId::Craft => &[TaskTemplate::CraftDepth1, TaskTemplate::CraftDepth2],
            EnvId::Grid => &[TaskTemplate::Maze1, TaskTemplate::Maze2, TaskTemplate::Maze3],
        }
    }
}

impl std::fmt::Display for TaskTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = match s {
            "pick_place" => TaskTemplate::PickPlace,
            "heat_place" => TaskTemplate::HeatPlace,
            "cool_place" => TaskTemplate::CoolPlace,
            "clean_place" => TaskTemplate::CleanPlace,
            "examine_light" => TaskTemplate::ExamineLight,
            "pick_two" => TaskTemplate::PickTwo,
            "craft_1" => TaskTemplate::CraftDepth1,
            "craft_2" => TaskTemplate::CraftDepth2,
            "maze_1" => TaskTemplate::Maze1,
            "maze_2" => TaskTemplate::Maze2,
            "maze_3" => TaskTemplate::Maze3,
            other => {
                return Err(Error::InvalidInput(format!("unknown task template: {other}")))
            }
        };
        Ok(t)
    }
}

/// Derive the generation stream seed for a task coordinate.
pub(crate) fn world_seed(env_id: EnvId, template: TaskTemplate, seed: u64, attempt: u32) -> u64 {
    stable_hash(&format!("{env_id}:{template}:{seed}:{attempt}"))
}

/// Rotate a seed into the default template list for an env.
pub fn template_for_seed(env_id: EnvId, seed: u64) -> TaskTemplate {
    let templates = TaskTemplate::defaults_for(env_id);
    templates[(seed % templates.len() as u64) as usize]
}

/// One replay record: the action taken and the observation it produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReplayRecord {
    pub action: Action,
    pub observation: Observation,
}

/// Re-execute a recorded (action, observation) sequence against a freshly
/// generated instance and verify byte-identical observations.
///
/// `acting_from` marks the step index at which the acting stage began (the
/// engine's stage transition is replayed at that boundary); `None` replays
/// the whole sequence as a single stage.
pub fn replay(
    instruction: &Instruction,
    template: TaskTemplate,
    records: &[ReplayRecord],
    acting_from: Option<usize>,
    perturbation: Option<&PerturbationSpec>,
) -> Result<()> {
    let mut env = reset(instruction.env_id, instruction.seed, template)?;
    for (idx, record) in records.iter().enumerate() {
        if acting_from == Some(idx) {
            env.begin_acting();
        }
        if let Some(spec) = perturbation {
            let acting_started = acting_from.map_or(true, |from| idx >= from);
            if acting_started && env.acting_steps() == spec.trigger_step {
                env.apply_perturbation(spec)?;
            }
        }
        let outcome = env.step(&record.action)?;
        if outcome.observation.text != record.observation.text {
            return Err(Error::InvalidInput(format!(
                "replay divergence at step {idx}: expected {:?}, got {:?}",
                record.observation.text, outcome.observation.text
            )));
        }
    }
    Ok(())
}

/// Helper shared by the engines: build the room-listing style enumeration
/// "a cabinet 1, a countertop 1, and a shelf 1".
pub(crate) fn list_phrase(names: &[String]) -> String {
    match names.len() {
        0 => "nothing".to_string(),
        1 => format!("a {}", names[0]),
        _ => {
            let head = names[..names.len() - 1]
                .iter()
                .map(|n| format!("a {n}"))
                .collect::<Vec<_>>()
                .join(", ");
            format!("{head}, and a {}", names[names.len() - 1])
        }
    }
}
