//! Decision backends behind every stage.
//!
//! Two backends speak one interface: deterministic scripted oracles for
//! desk-scale verification, and an optional remote chat-model client. Both
//! render the same role prompts, so transcripts and token accounting are
//! uniform regardless of who decides.

pub mod oracle;
pub mod prompts;
pub mod remote;

use serde::{Deserialize, Serialize};

use crate::envs::Env;
use crate::error::{Error, Result};
use crate::types::{
    Action, ActionKind, CognitiveMap, EnvId, GlobalKnowledge, Instruction, KnowledgeEntry,
    Observation, StepRecord,
};

/// Role a prompt is rendered for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleTemplate {
    FocusAnalyzer,
    Explorer,
    Reflector,
    Distiller,
    Scout,
    Extractor,
    ExecutorMap,
    ExecutorReact,
    ExecutorComap,
}

impl RoleTemplate {
    pub fn as_str(self) -> &'static str {
        match self {
            RoleTemplate::FocusAnalyzer => "focus_analyzer",
            RoleTemplate::Explorer => "explorer",
            RoleTemplate::Reflector => "reflector",
            RoleTemplate::Distiller => "distiller",
            RoleTemplate::Scout => "scout",
            RoleTemplate::Extractor => "extractor",
            RoleTemplate::ExecutorMap => "executor_map",
            RoleTemplate::ExecutorReact => "executor_react",
            RoleTemplate::ExecutorComap => "executor_comap",
        }
    }
}

impl std::fmt::Display for RoleTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a decision is conditioned on.
#[derive(Debug, Clone, Copy)]
pub struct PromptContext<'a> {
    pub role: RoleTemplate,
    pub instruction: &'a Instruction,
    pub global_knowledge: Option<&'a GlobalKnowledge>,
    pub cognitive_map: Option<&'a CognitiveMap>,
    /// Suffix of the trajectory so far.
    pub history: &'a [StepRecord],
    pub focus_points: Option<&'a [String]>,
}

impl<'a> PromptContext<'a> {
    pub fn new(role: RoleTemplate, instruction: &'a Instruction) -> Self {
        Self {
            role,
            instruction,
            global_knowledge: None,
            cognitive_map: None,
            history: &[],
            focus_points: None,
        }
    }

    /// Check the role's context requirements.
    pub fn validate(&self) -> Result<()> {
        match self.role {
            RoleTemplate::ExecutorReact | RoleTemplate::ExecutorComap => {
                if self.global_knowledge.is_some() {
                    return Err(Error::InvalidInput(format!(
                        "{} forbids global knowledge injection",
                        self.role
                    )));
                }
                if self.role == RoleTemplate::ExecutorReact && self.cognitive_map.is_some() {
                    return Err(Error::InvalidInput(
                        "executor_react forbids cognitive map injection".into(),
                    ));
                }
                Ok(())
            }
            RoleTemplate::ExecutorMap => {
                // Ablations may drop either block, but dropping both would
                // make this the map-free baseline in disguise.
                if self.global_knowledge.is_none() && self.cognitive_map.is_none() {
                    return Err(Error::MissingContext("cognitive_map"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of one decision.
#[derive(Debug, Clone)]
pub struct PolicyDecision {
    pub action: Action,
    pub thought: Option<String>,
    /// Structured facts asserted by the policy (scout/explorer roles only).
    pub emitted_entries: Vec<KnowledgeEntry>,
    pub tokens_in: u64,
    pub tokens_out: u64,
    /// Rendered prompt, retained for transcripts.
    pub prompt: Option<String>,
}

/// Which backend decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Oracle,
    Remote,
}

/// Backend configuration. Oracle mode ignores the network fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    pub retry_count: u32,
    /// Optional transcript file: `record:PATH` or `replay:PATH`.
    pub transcript: Option<String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Oracle,
            endpoint: String::new(),
            model_name: String::new(),
            temperature: 0.0,
            max_tokens: 512,
            timeout_secs: 60,
            retry_count: 2,
            transcript: None,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature < 0.0 {
            return Err(Error::Config("temperature must be >= 0".into()));
        }
        if self.kind == BackendKind::Remote && self.endpoint.is_empty() {
            return Err(Error::Config("remote backend requires an endpoint".into()));
        }
        Ok(())
    }
}

/// Deterministic token-count proxy used when no model reports usage:
/// whitespace-delimited tokens of prompt and completion text.
pub fn whitespace_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Read-only view of an environment handed to deciders. Policies see the
/// agent-facing surface (admissible commands), never hidden state.
pub struct EnvView<'a> {
    env: &'a dyn Env,
}

impl<'a> EnvView<'a> {
    pub fn new(env: &'a dyn Env) -> Self {
        Self { env }
    }

    pub fn admissible(&self) -> Vec<Action> {
        self.env.admissible_actions()
    }

    pub fn env_id(&self) -> EnvId {
        self.env.env_id()
    }
}

/// Classify a surface command for metric accounting.
pub fn classify_action(env_id: EnvId, text: &str) -> ActionKind {
    if text == "noop" {
        return ActionKind::Noop;
    }
    match env_id {
        EnvId::Grid => ActionKind::GridAction,
        _ => {
            if text.starts_with("go to ") {
                ActionKind::Navigate
            } else if text == "look" || text == "inventory" || text.starts_with("examine ") {
                ActionKind::Observe
            } else if text.starts_with("craft ") {
                ActionKind::Craft
            } else {
                ActionKind::Interact
            }
        }
    }
}

/// A per-episode decision maker.
pub trait Decider: Send {
    fn decide(&mut self, ctx: &PromptContext, view: &EnvView) -> Result<PolicyDecision>;
}

/// Build a decider for one episode. The oracle needs the observation the
/// episode starts from; the remote backend is stateless per call.
pub fn make_decider(
    config: &BackendConfig,
    env_id: EnvId,
    start_obs: &Observation,
) -> Result<Box<dyn Decider>> {
    config.validate()?;
    match config.kind {
        BackendKind::Oracle => Ok(Box::new(oracle::OracleBackend::new(env_id, start_obs.clone()))),
        BackendKind::Remote => Ok(Box::new(remote::RemoteDecider::new(config)?)),
    }
}
