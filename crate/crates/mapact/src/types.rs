//! Core domain types shared by every stage of the harness.
//!
//! All types here are plain data: immutable after construction, cheap to
//! clone, and safe to hand across worker threads. Builders produce new
//! values rather than mutating shared state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::canonicalize_observation;
use crate::error::{Error, Result};

/// Environment family identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvId {
    House,
    Craft,
    Grid,
}

impl EnvId {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::House => "house",
            EnvId::Craft => "craft",
            EnvId::Grid => "grid",
        }
    }
}

impl std::str::FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "house" => Ok(EnvId::House),
            "craft" => Ok(EnvId::Craft),
            "grid" => Ok(EnvId::Grid),
            other => Err(Error::InvalidInput(format!("unknown env id: {other}"))),
        }
    }
}

impl std::fmt::Display for EnvId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A task posed to the agent. The seed fully determines the generated world
/// instance, so (env_id, task_id, seed) is a replayable coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub text: String,
    pub env_id: EnvId,
    pub task_id: String,
    pub seed: u64,
}

impl Instruction {
    pub fn new(text: impl Into<String>, env_id: EnvId, task_id: impl Into<String>, seed: u64) -> Self {
        let text = text.into();
        debug_assert!(!text.is_empty(), "instruction text must be non-empty");
        Self {
            text,
            env_id,
            task_id: task_id.into(),
            seed,
        }
    }

    /// Stable identifier used for trajectory references and evidence pointers.
    pub fn run_id(&self) -> String {
        format!("{}-{}-{}", self.env_id, self.task_id, self.seed)
    }
}

/// Coarse action classification used for metric accounting (re-exploration
/// detection keys on `Navigate`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Navigate,
    Interact,
    Observe,
    Craft,
    GridAction,
    Noop,
}

/// A surface command sent to an environment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub text: String,
    pub kind: ActionKind,
}

impl Action {
    /// Build an action, normalizing interior whitespace.
    pub fn new(text: &str, kind: ActionKind) -> Self {
        let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
        debug_assert!(!normalized.is_empty(), "action text must be non-empty");
        Self {
            text: normalized,
            kind,
        }
    }
}

/// An observation returned by an environment step (or reset).
///
/// `canonical_key` is a pure function of the canonicalized text; two
/// observations with the same key render to the same canonical string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    pub canonical_key: u64,
    pub step_index: usize,
    pub error_flag: bool,
}

impl Observation {
    pub fn new(text: impl Into<String>, step_index: usize, error_flag: bool) -> Self {
        let text = text.into();
        let (_, canonical_key) = canonicalize_observation(&text);
        Self {
            text,
            canonical_key,
            step_index,
            error_flag,
        }
    }
}

/// Pipeline stage a step was recorded under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    GlobalExplore,
    TaskMap,
    Act,
}

/// One (action, observation) exchange with optional reasoning text and token
/// accounting. Stage is fixed at recording time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub action: Action,
    pub observation: Observation,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thought: Option<String>,
    pub tokens_in: u64,
    pub tokens_out: u64,
}

/// An ordered interaction record: the instruction plus every step taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub instruction: Instruction,
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_success: Option<bool>,
}

impl Trajectory {
    pub fn new(instruction: Instruction) -> Self {
        Self {
            instruction,
            steps: Vec::new(),
            terminal_success: None,
        }
    }

    /// Append a step, enforcing strictly increasing step indices from 0.
    pub fn push(&mut self, mut step: StepRecord) {
        step.observation.step_index = self.steps.len();
        self.steps.push(step);
    }

    /// Record the terminal outcome. At most one assignment is allowed.
    pub fn finish(&mut self, success: bool) -> Result<()> {
        if self.terminal_success.is_some() {
            return Err(Error::InvalidInput(
                "terminal_success already assigned".into(),
            ));
        }
        self.terminal_success = Some(success);
        Ok(())
    }

    pub fn run_id(&self) -> String {
        self.instruction.run_id()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Knowledge entry category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeKind {
    Spatial,
    Affordance,
    Rule,
    Negative,
}

/// Whether an entry was directly observed or inferred from transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Observed,
    Inferred,
}

/// A single structured fact. Identity within a map is the
/// (kind, subject, relation, object) tuple; source and confidence are
/// metadata and do not participate in deduplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub kind: KnowledgeKind,
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub source_step: usize,
    pub confidence: Confidence,
}

impl KnowledgeEntry {
    pub fn observed(
        kind: KnowledgeKind,
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: impl Into<String>,
        source_step: usize,
    ) -> Self {
        Self {
            kind,
            subject: subject.into(),
            relation: relation.into(),
            object: object.into(),
            source_step,
            confidence: Confidence::Observed,
        }
    }

    pub fn inferred(
        kind: KnowledgeKind,
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: impl Into<String>,
        source_step: usize,
    ) -> Self {
        Self {
            confidence: Confidence::Inferred,
            ..Self::observed(kind, subject, relation, object, source_step)
        }
    }

    /// Deduplication key.
    pub fn identity(&self) -> (KnowledgeKind, &str, &str, &str) {
        (self.kind, &self.subject, &self.relation, &self.object)
    }
}

type EntryKey = (KnowledgeKind, String, String, String);

/// A task-specific structured map: a set of distinct knowledge entries.
///
/// Insertion is monotone; entries are never retracted, which keeps per-step
/// entry-count deltas non-negative during a mapping episode. Entries are held
/// in a sorted structure so serialization and iteration order are stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "MapRepr", into = "MapRepr")]
pub struct CognitiveMap {
    pub env_id: EnvId,
    /// Reference to the trajectory the map was built from.
    pub built_from: String,
    entries: BTreeMap<EntryKey, (usize, Confidence)>,
}

/// Wire shape for [`CognitiveMap`]: entries as a sorted list.
#[derive(Serialize, Deserialize)]
struct MapRepr {
    env_id: EnvId,
    built_from: String,
    entries: Vec<KnowledgeEntry>,
}

impl From<CognitiveMap> for MapRepr {
    fn from(map: CognitiveMap) -> Self {
        MapRepr {
            env_id: map.env_id,
            built_from: map.built_from.clone(),
            entries: map.entries().collect(),
        }
    }
}

impl From<MapRepr> for CognitiveMap {
    fn from(repr: MapRepr) -> Self {
        let mut map = CognitiveMap::new(repr.env_id, repr.built_from);
        for entry in repr.entries {
            map.insert(entry);
        }
        map
    }
}

impl CognitiveMap {
    pub fn new(env_id: EnvId, built_from: impl Into<String>) -> Self {
        Self {
            env_id,
            built_from: built_from.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Insert an entry. Returns true when the entry was new. Re-inserting an
    /// existing identity keeps the earliest source step.
    pub fn insert(&mut self, entry: KnowledgeEntry) -> bool {
        let key = (entry.kind, entry.subject, entry.relation, entry.object);
        match self.entries.get(&key) {
            Some(_) => false,
            None => {
                self.entries.insert(key, (entry.source_step, entry.confidence));
                true
            }
        }
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, kind: KnowledgeKind, subject: &str, relation: &str, object: &str) -> bool {
        self.entries
            .contains_key(&(kind, subject.to_string(), relation.to_string(), object.to_string()))
    }

    /// Iterate entries in stable sorted order.
    pub fn entries(&self) -> impl Iterator<Item = KnowledgeEntry> + '_ {
        self.entries.iter().map(|((kind, s, r, o), (step, conf))| KnowledgeEntry {
            kind: *kind,
            subject: s.clone(),
            relation: r.clone(),
            object: o.clone(),
            source_step: *step,
            confidence: *conf,
        })
    }

    /// Entries of one kind, in stable order.
    pub fn entries_of(&self, kind: KnowledgeKind) -> Vec<KnowledgeEntry> {
        self.entries().filter(|e| e.kind == kind).collect()
    }

    /// A copy with one entire entry kind removed (ablation switch).
    pub fn without_kind(&self, kind: KnowledgeKind) -> Self {
        let mut out = Self::new(self.env_id, self.built_from.clone());
        for entry in self.entries().filter(|e| e.kind != kind) {
            out.insert(entry);
        }
        out
    }
}

/// Number of distinct entries gained between two snapshots of a map.
///
/// Builders never retract, so this is non-negative for builder outputs;
/// hand-assembled maps may legitimately produce negative values.
pub fn map_diff_count(current: &CognitiveMap, previous: &CognitiveMap) -> Result<i64> {
    if current.env_id != previous.env_id {
        return Err(Error::EnvMismatch {
            expected: previous.env_id.to_string(),
            got: current.env_id.to_string(),
        });
    }
    Ok(current.entry_count() as i64 - previous.entry_count() as i64)
}

/// Evidence pointer: which trajectory and step a rule was distilled from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub trajectory: String,
    pub step: usize,
}

/// One distilled environment-general rule with its supporting evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub statement: String,
    pub evidence: Vec<Evidence>,
}

/// Maximum number of rules retained after distillation.
pub const MAX_GLOBAL_RULES: usize = 15;

/// Environment-level prior distilled once per family: action syntax,
/// interaction rules, and recurring error patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalKnowledge {
    pub env_id: Option<EnvId>,
    pub action_syntax: Vec<Rule>,
    pub interaction_rules: Vec<Rule>,
    pub error_patterns: Vec<Rule>,
}

impl GlobalKnowledge {
    pub fn rule_count(&self) -> usize {
        self.action_syntax.len() + self.interaction_rules.len() + self.error_patterns.len()
    }

    /// All rules in section order.
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.action_syntax
            .iter()
            .chain(self.interaction_rules.iter())
            .chain(self.error_patterns.iter())
    }

    /// Check the structural invariants: rule cap and evidence presence.
    pub fn validate(&self) -> Result<()> {
        if self.rule_count() > MAX_GLOBAL_RULES {
            return Err(Error::InvalidInput(format!(
                "global knowledge holds {} rules, cap is {MAX_GLOBAL_RULES}",
                self.rule_count()
            )));
        }
        if let Some(rule) = self.rules().find(|r| r.evidence.is_empty()) {
            return Err(Error::InvalidInput(format!(
                "rule without evidence: {}",
                rule.statement
            )));
        }
        Ok(())
    }
}

/// Per-episode outcome record; the input row for every metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub instruction: Instruction,
    pub success: bool,
    pub mapping_steps: usize,
    pub acting_steps: usize,
    pub tokens_map: u64,
    pub tokens_act: u64,
    pub tokens_total: u64,
    /// Number of acting steps completed when the perturbation fired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_perturb: Option<usize>,
    /// Length of the acting rollout the perturbation metrics are taken over.
    pub rollout_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reexplored: Option<bool>,
    /// Highest grid level completed; None for non-grid runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(kind: KnowledgeKind, s: &str, r: &str, o: &str) -> KnowledgeEntry {
        KnowledgeEntry::observed(kind, s, r, o, 0)
    }

    #[test]
    fn map_insert_is_set_semantics() {
        let mut map = CognitiveMap::new(EnvId::House, "t");
        assert!(map.insert(entry(KnowledgeKind::Spatial, "cup 2", "at", "countertop 1")));
        assert!(!map.insert(entry(KnowledgeKind::Spatial, "cup 2", "at", "countertop 1")));
        assert!(map.insert(entry(KnowledgeKind::Affordance, "cup 2", "at", "countertop 1")));
        assert_eq!(map.entry_count(), 2);
    }

    #[test]
    fn map_diff_subtraction_and_env_check() {
        let mut a = CognitiveMap::new(EnvId::House, "t");
        let mut b = CognitiveMap::new(EnvId::House, "t");
        for i in 0..7 {
            a.insert(entry(KnowledgeKind::Spatial, &format!("o{i}"), "at", "x"));
        }
        for i in 0..5 {
            b.insert(entry(KnowledgeKind::Spatial, &format!("o{i}"), "at", "x"));
        }
        assert_eq!(map_diff_count(&a, &b).unwrap(), 2);
        assert_eq!(map_diff_count(&a, &a.clone()).unwrap(), 0);

        let c = CognitiveMap::new(EnvId::Craft, "t");
        assert!(map_diff_count(&a, &c).is_err());
    }

    #[test]
    fn trajectory_indices_and_single_terminal() {
        let instr = Instruction::new("do it", EnvId::House, "pick_place", 1);
        let mut t = Trajectory::new(instr);
        for i in 0..3 {
            t.push(StepRecord {
                action: Action::new("look", ActionKind::Observe),
                observation: Observation::new(format!("obs {i}"), 99, false),
                stage: Stage::Act,
                thought: None,
                tokens_in: 1,
                tokens_out: 1,
            });
        }
        let indices: Vec<usize> = t.steps.iter().map(|s| s.observation.step_index).collect();
        assert_eq!(indices, vec![0, 1, 2]);
        assert!(t.finish(true).is_ok());
        assert!(t.finish(false).is_err());
    }

    #[test]
    fn global_knowledge_cap_enforced() {
        let mut kg = GlobalKnowledge::default();
        for i in 0..16 {
            kg.action_syntax.push(Rule {
                statement: format!("rule {i}"),
                evidence: vec![Evidence {
                    trajectory: "t".into(),
                    step: 0,
                }],
            });
        }
        assert!(kg.validate().is_err());
        kg.action_syntax.truncate(15);
        assert!(kg.validate().is_ok());
    }

    #[test]
    fn action_text_is_whitespace_normalized() {
        let a = Action::new("  go  to   fridge 1 ", ActionKind::Navigate);
        assert_eq!(a.text, "go to fridge 1");
    }
}
