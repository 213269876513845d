//! Household object-manipulation world.
//!
//! A flat room of named receptacles (some openable, some devices), a pool of
//! portable objects, and an agent with a one-item hand. Task families:
//! pick & place, heat/cool/clean & place, examine under the desklamp, and
//! pick-two. The observation grammar is exact and stable so observation
//! identity, replay, and text extraction are all well-defined.
//!
//! Failed or inadmissible actions return the fixed failure observation
//! "Nothing happens." with the error flag set and never move objects.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    Action, ActionKind, EnvId, Instruction, KnowledgeEntry, KnowledgeKind, Observation,
};

use super::task::HouseTaskKind;
use super::{list_phrase, world_seed, Env, GroundTruthSnapshot, PerturbationSpec, StepOutcome, TaskTemplate};

pub const FAILURE_TEXT: &str = "Nothing happens.";

/// Placement value for an object in the agent's hand.
pub const HELD: &str = "agent";

/// What a device receptacle does to the held object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Device {
    Heat,
    Cool,
    Clean,
    Lamp,
}

impl Device {
    pub fn verb(self) -> &'static str {
        match self {
            Device::Heat => "heat",
            Device::Cool => "cool",
            Device::Clean => "clean",
            Device::Lamp => "use",
        }
    }

    pub fn effect_phrase(self) -> &'static str {
        match self {
            Device::Heat => "heat the held object",
            Device::Cool => "cool the held object",
            Device::Clean => "clean the held object",
            Device::Lamp => "examine the held object in light",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Receptacle {
    openable: bool,
    open: bool,
    device: Option<Device>,
    /// Whether objects can rest in/on it.
    holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObjectState {
    class: String,
    hot: bool,
    cold: bool,
    clean: bool,
}

/// Serializable view of the hidden world state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldState {
    pub env_id: EnvId,
    pub seed: u64,
    pub location_graph: BTreeMap<String, Vec<String>>,
    pub object_placement: BTreeMap<String, String>,
    pub object_states: BTreeMap<String, ObjectFlags>,
    pub agent_position: Option<String>,
    pub agent_inventory: Vec<String>,
    pub step_counter: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectFlags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<bool>,
    pub hot: bool,
    pub cold: bool,
    pub clean: bool,
}

const CLASS_POOL: &[&str] = &[
    "apple", "book", "bowl", "cup", "egg", "knife", "mug", "pen", "plate", "potato", "tomato",
    "watch",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HouseEnv {
    instruction: Instruction,
    template: TaskTemplate,
    task_kind: HouseTaskKind,
    target_class: String,
    destination: Option<String>,
    receptacles: BTreeMap<String, Receptacle>,
    objects: BTreeMap<String, ObjectState>,
    /// object name -> receptacle name, or [`HELD`].
    placement: BTreeMap<String, String>,
    agent_at: Option<String>,
    holding: Option<String>,
    examined_in_light: bool,
    steps: usize,
    acting_steps: usize,
    done: bool,
    success: bool,
    perturb_event: Option<(usize, String, String, String)>,
    seed: u64,
}

impl HouseEnv {
    pub fn generate(seed: u64, template: TaskTemplate) -> Result<Self> {
        let task_kind = match template {
            TaskTemplate::PickPlace => HouseTaskKind::PickPlace,
            TaskTemplate::HeatPlace => HouseTaskKind::HeatPlace,
            TaskTemplate::CoolPlace => HouseTaskKind::CoolPlace,
            TaskTemplate::CleanPlace => HouseTaskKind::CleanPlace,
            TaskTemplate::ExamineLight => HouseTaskKind::ExamineLight,
            TaskTemplate::PickTwo => HouseTaskKind::PickTwo,
            other => {
                return Err(Error::InvalidInput(format!(
                    "template {other} is not a house task"
                )))
            }
        };
        for attempt in 0..8 {
            let env = Self::generate_attempt(seed, template, task_kind, attempt);
            if env.internal_plan_len().is_some_and(|n| n <= 50) {
                return Ok(env);
            }
        }
        Err(Error::Unsolvable { seed, attempts: 8 })
    }

    fn generate_attempt(seed: u64, template: TaskTemplate, task_kind: HouseTaskKind, attempt: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(world_seed(EnvId::House, template, seed, attempt));

        let mut receptacles = BTreeMap::new();
        let add = |name: &str, openable: bool, device: Option<Device>, holds: bool,
                       receptacles: &mut BTreeMap<String, Receptacle>| {
            receptacles.insert(
                name.to_string(),
                Receptacle {
                    openable,
                    open: false,
                    device,
                    holds,
                },
            );
        };
        add("countertop 1", false, None, true, &mut receptacles);
        add("shelf 1", false, None, true, &mut receptacles);
        add("sidetable 1", false, None, true, &mut receptacles);
        add("garbagecan 1", false, None, true, &mut receptacles);
        add("sinkbasin 1", false, Some(Device::Clean), true, &mut receptacles);
        add("fridge 1", true, Some(Device::Cool), true, &mut receptacles);
        add("microwave 1", true, Some(Device::Heat), true, &mut receptacles);
        add("desklamp 1", false, Some(Device::Lamp), false, &mut receptacles);
        add("cabinet 1", true, None, true, &mut receptacles);
        if rng.gen_bool(0.5) {
            add("cabinet 2", true, None, true, &mut receptacles);
        }
        if rng.gen_bool(0.5) {
            add("drawer 1", true, None, true, &mut receptacles);
        }
        if rng.gen_bool(0.5) {
            add("countertop 2", false, None, true, &mut receptacles);
        }

        // Openable containers start mostly closed so container probing is a
        // real part of exploration.
        let names: Vec<String> = receptacles.keys().cloned().collect();
        for name in &names {
            let r = receptacles.get_mut(name).unwrap();
            if r.openable {
                r.open = rng.gen_bool(0.25);
            }
        }

        let target_class = CLASS_POOL[rng.gen_range(0..CLASS_POOL.len())].to_string();
        let target_count = if task_kind == HouseTaskKind::PickTwo { 2 } else { 1 };

        let holders: Vec<String> = receptacles
            .iter()
            .filter(|(_, r)| r.holds)
            .map(|(n, _)| n.clone())
            .collect();

        let destination = match task_kind {
            HouseTaskKind::ExamineLight => None,
            _ => Some(holders[rng.gen_range(0..holders.len())].clone()),
        };

        // Target instances go anywhere except the destination.
        let mut class_counts: BTreeMap<String, u32> = BTreeMap::new();
        let mut objects = BTreeMap::new();
        let mut placement = BTreeMap::new();
        let target_holders: Vec<&String> = holders
            .iter()
            .filter(|h| Some(h.as_str()) != destination.as_deref())
            .collect();
        for _ in 0..target_count {
            let idx = class_counts.entry(target_class.clone()).or_insert(0);
            *idx += 1;
            let name = format!("{target_class} {idx}");
            let place = target_holders[rng.gen_range(0..target_holders.len())].clone();
            objects.insert(
                name.clone(),
                ObjectState {
                    class: target_class.clone(),
                    hot: false,
                    cold: false,
                    clean: false,
                },
            );
            placement.insert(name, place);
        }

        let distractor_count = rng.gen_range(4..=6);
        for _ in 0..distractor_count {
            let class = CLASS_POOL[rng.gen_range(0..CLASS_POOL.len())].to_string();
            let idx = class_counts.entry(class.clone()).or_insert(0);
            *idx += 1;
            let name = format!("{class} {idx}");
            let place = holders[rng.gen_range(0..holders.len())].clone();
            objects.insert(
                name.clone(),
                ObjectState {
                    class,
                    hot: false,
                    cold: false,
                    clean: false,
                },
            );
            placement.insert(name, place);
        }

        let article = |class: &str| {
            if "aeiou".contains(class.chars().next().unwrap_or('x')) {
                "an"
            } else {
                "a"
            }
        };
        let text = match task_kind {
            HouseTaskKind::PickPlace => format!(
                "put {} {target_class} in {}.",
                article(&target_class),
                destination.as_ref().unwrap()
            ),
            HouseTaskKind::HeatPlace => format!(
                "heat {} {target_class} and put it in {}.",
                article(&target_class),
                destination.as_ref().unwrap()
            ),
            HouseTaskKind::CoolPlace => format!(
                "cool {} {target_class} and put it in {}.",
                article(&target_class),
                destination.as_ref().unwrap()
            ),
            HouseTaskKind::CleanPlace => format!(
                "clean {} {target_class} and put it in {}.",
                article(&target_class),
                destination.as_ref().unwrap()
            ),
            HouseTaskKind::ExamineLight => {
                format!("examine the {target_class} under the desklamp.")
            }
            HouseTaskKind::PickTwo => format!(
                "put two {target_class}s in {}.",
                destination.as_ref().unwrap()
            ),
        };
        let instruction = Instruction::new(text, EnvId::House, template.as_str(), seed);

        HouseEnv {
            instruction,
            template,
            task_kind,
            target_class,
            destination,
            receptacles,
            objects,
            placement,
            agent_at: None,
            holding: None,
            examined_in_light: false,
            steps: 0,
            acting_steps: 0,
            done: false,
            success: false,
            perturb_event: None,
            seed,
        }
    }

    fn world_state(&self) -> WorldState {
        let names: Vec<String> = self.receptacles.keys().cloned().collect();
        let mut location_graph = BTreeMap::new();
        for name in &names {
            location_graph.insert(
                name.clone(),
                names.iter().filter(|n| *n != name).cloned().collect(),
            );
        }
        let mut object_states = BTreeMap::new();
        for (name, o) in &self.objects {
            object_states.insert(
                name.clone(),
                ObjectFlags {
                    open: None,
                    hot: o.hot,
                    cold: o.cold,
                    clean: o.clean,
                },
            );
        }
        for (name, r) in &self.receptacles {
            if r.openable {
                object_states.insert(
                    name.clone(),
                    ObjectFlags {
                        open: Some(r.open),
                        hot: false,
                        cold: false,
                        clean: false,
                    },
                );
            }
        }
        WorldState {
            env_id: EnvId::House,
            seed: self.seed,
            location_graph,
            object_placement: self.placement.clone(),
            object_states,
            agent_position: self.agent_at.clone(),
            agent_inventory: self.holding.iter().cloned().collect(),
            step_counter: self.steps,
        }
    }

    fn contents_of(&self, recep: &str) -> Vec<String> {
        self.placement
            .iter()
            .filter(|(_, p)| p.as_str() == recep)
            .map(|(o, _)| o.clone())
            .collect()
    }

    fn contents_visible(&self, recep: &str) -> bool {
        let r = &self.receptacles[recep];
        !r.openable || r.open
    }

    fn preposition(recep: &Receptacle) -> &'static str {
        if recep.openable {
            "In"
        } else {
            "On"
        }
    }

    fn room_description(&self, prefix: &str) -> String {
        let names: Vec<String> = self.receptacles.keys().cloned().collect();
        format!(
            "{prefix} Looking around you, you see {}.",
            list_phrase(&names)
        )
    }

    fn location_description(&self, recep_name: &str, arriving: bool) -> String {
        let r = &self.receptacles[recep_name];
        let lead = if arriving {
            format!("You arrive at the {recep_name}.")
        } else {
            format!("You are at the {recep_name}.")
        };
        if r.device == Some(Device::Lamp) {
            return format!("{lead} It is a desklamp.");
        }
        if r.openable && !r.open {
            return format!("{lead} The {recep_name} is closed.");
        }
        let contents = self.contents_of(recep_name);
        let state = if r.openable {
            format!(" The {recep_name} is open.")
        } else {
            String::new()
        };
        format!(
            "{lead}{state} {} the {recep_name}, you see {}.",
            Self::preposition(r),
            list_phrase(&contents)
        )
    }

    fn check_success(&mut self) {
        let placed_count = |class: &str, dest: &str| {
            self.objects
                .iter()
                .filter(|(name, o)| o.class == class && self.placement.get(*name).map(String::as_str) == Some(dest))
                .count()
        };
        let achieved = match self.task_kind {
            HouseTaskKind::PickPlace => {
                placed_count(&self.target_class, self.destination.as_deref().unwrap()) >= 1
            }
            HouseTaskKind::PickTwo => {
                placed_count(&self.target_class, self.destination.as_deref().unwrap()) >= 2
            }
            HouseTaskKind::HeatPlace | HouseTaskKind::CoolPlace | HouseTaskKind::CleanPlace => {
                let dest = self.destination.as_deref().unwrap();
                self.objects.iter().any(|(name, o)| {
                    o.class == self.target_class
                        && self.placement.get(name).map(String::as_str) == Some(dest)
                        && match self.task_kind {
                            HouseTaskKind::HeatPlace => o.hot,
                            HouseTaskKind::CoolPlace => o.cold,
                            HouseTaskKind::CleanPlace => o.clean,
                            _ => unreachable!(),
                        }
                })
            }
            HouseTaskKind::ExamineLight => self.examined_in_light,
        };
        if achieved {
            self.success = true;
            self.done = true;
        }
    }

    fn failure(&mut self) -> StepOutcome {
        StepOutcome {
            observation: Observation::new(FAILURE_TEXT, self.steps - 1, true),
            done: false,
            success: false,
        }
    }

    fn ok_obs(&mut self, text: String) -> StepOutcome {
        StepOutcome {
            observation: Observation::new(text, self.steps - 1, false),
            done: self.done,
            success: self.success,
        }
    }

    fn object_description(&self, name: &str) -> String {
        let o = &self.objects[name];
        let mut adjectives = Vec::new();
        if o.clean {
            adjectives.push("clean");
        }
        if o.cold {
            adjectives.push("cold");
        }
        if o.hot {
            adjectives.push("hot");
        }
        let qualified = if adjectives.is_empty() {
            o.class.clone()
        } else {
            format!("{} {}", adjectives.join(" "), o.class)
        };
        format!("You look at the {name}. It is a {qualified}.")
    }

    /// Length of a canonical optimal plan from the current state, if the
    /// task is still completable. Used as the hidden solvability check.
    fn internal_plan_len(&self) -> Option<usize> {
        let closed = |r: &str| {
            let rec = &self.receptacles[r];
            usize::from(rec.openable && !rec.open)
        };
        let instances: Vec<(&String, &String)> = self
            .objects
            .iter()
            .filter(|(_, o)| o.class == self.target_class)
            .filter_map(|(name, _)| self.placement.get(name).map(|p| (name, p)))
            .filter(|(_, p)| p.as_str() != HELD)
            .collect();
        let fetch_cost = |loc: &str| 2 + closed(loc); // go + maybe open + take
        match self.task_kind {
            HouseTaskKind::PickPlace => {
                let dest = self.destination.as_deref().unwrap();
                instances
                    .iter()
                    .map(|(_, loc)| fetch_cost(loc) + 2 + closed(dest))
                    .min()
            }
            HouseTaskKind::HeatPlace | HouseTaskKind::CoolPlace | HouseTaskKind::CleanPlace => {
                let dest = self.destination.as_deref().unwrap();
                let device = match self.task_kind {
                    HouseTaskKind::HeatPlace => "microwave 1",
                    HouseTaskKind::CoolPlace => "fridge 1",
                    _ => "sinkbasin 1",
                };
                instances
                    .iter()
                    .map(|(_, loc)| {
                        let mut n = fetch_cost(loc);
                        if loc.as_str() != device {
                            n += 1; // go to device
                        }
                        n += 1; // apply device verb
                        if device != dest {
                            n += 1; // go to destination
                        }
                        n + closed(dest) + 1 // maybe open + move
                    })
                    .min()
            }
            HouseTaskKind::ExamineLight => instances
                .iter()
                .map(|(_, loc)| fetch_cost(loc) + 2) // go to desklamp + use
                .min(),
            HouseTaskKind::PickTwo => {
                if instances.len() < 2 {
                    return None;
                }
                let dest = self.destination.as_deref().unwrap();
                // Two cheapest fetch-deliver legs; the destination is opened
                // at most once.
                let mut costs: Vec<usize> = instances
                    .iter()
                    .map(|(_, loc)| fetch_cost(loc) + 2)
                    .collect();
                costs.sort_unstable();
                Some(costs[0] + costs[1] + closed(dest))
            }
        }
    }
}

impl Env for HouseEnv {
    fn env_id(&self) -> EnvId {
        EnvId::House
    }

    fn instruction(&self) -> &Instruction {
        &self.instruction
    }

    fn initial_observation(&self) -> Observation {
        Observation::new(
            self.room_description("You are in the middle of the room."),
            0,
            false,
        )
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::Terminal);
        }
        self.steps += 1;
        self.acting_steps += 1;
        let text = action.text.as_str();

        if text == "look" {
            let obs = match &self.agent_at {
                Some(r) => self.location_description(r, false),
                None => self.room_description("You are in the middle of the room."),
            };
            return Ok(self.ok_obs(obs));
        }
        if text == "inventory" {
            let obs = match &self.holding {
                Some(o) => format!("You are carrying: a {o}."),
                None => "You are not carrying anything.".to_string(),
            };
            return Ok(self.ok_obs(obs));
        }
        if let Some(recep) = text.strip_prefix("go to ") {
            if self.receptacles.contains_key(recep) && self.agent_at.as_deref() != Some(recep) {
                self.agent_at = Some(recep.to_string());
                let obs = self.location_description(recep, true);
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure());
        }
        if let Some(recep) = text.strip_prefix("open ") {
            let at = self.agent_at.as_deref() == Some(recep);
            if at && self.receptacles.get(recep).is_some_and(|r| r.openable && !r.open) {
                self.receptacles.get_mut(recep).unwrap().open = true;
                let contents = self.contents_of(recep);
                let obs = format!(
                    "You open the {recep}. In the {recep}, you see {}.",
                    list_phrase(&contents)
                );
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure());
        }
        if let Some(recep) = text.strip_prefix("close ") {
            let at = self.agent_at.as_deref() == Some(recep);
            if at && self.receptacles.get(recep).is_some_and(|r| r.openable && r.open) {
                self.receptacles.get_mut(recep).unwrap().open = false;
                return Ok(self.ok_obs(format!("You close the {recep}.")));
            }
            return Ok(self.failure());
        }
        if let Some(rest) = text.strip_prefix("take ") {
            if let Some((obj, recep)) = rest.split_once(" from ") {
                let valid = self.agent_at.as_deref() == Some(recep)
                    && self.holding.is_none()
                    && self.placement.get(obj).map(String::as_str) == Some(recep)
                    && self.contents_visible(recep);
                if valid {
                    self.placement.insert(obj.to_string(), HELD.to_string());
                    self.holding = Some(obj.to_string());
                    return Ok(self.ok_obs(format!("You pick up the {obj} from the {recep}.")));
                }
            }
            return Ok(self.failure());
        }
        if let Some(rest) = text.strip_prefix("move ") {
            if let Some((obj, recep)) = rest.split_once(" to ") {
                let valid = self.agent_at.as_deref() == Some(recep)
                    && self.holding.as_deref() == Some(obj)
                    && self.receptacles.get(recep).is_some_and(|r| r.holds)
                    && self.contents_visible(recep);
                if valid {
                    self.placement.insert(obj.to_string(), recep.to_string());
                    self.holding = None;
                    self.check_success();
                    return Ok(self.ok_obs(format!("You move the {obj} to the {recep}.")));
                }
            }
            return Ok(self.failure());
        }
        for (verb, device) in [
            ("heat ", Device::Heat),
            ("cool ", Device::Cool),
            ("clean ", Device::Clean),
        ] {
            if let Some(rest) = text.strip_prefix(verb) {
                if let Some((obj, recep)) = rest.split_once(" with ") {
                    let valid = self.agent_at.as_deref() == Some(recep)
                        && self.holding.as_deref() == Some(obj)
                        && self.receptacles.get(recep).is_some_and(|r| r.device == Some(device));
                    if valid {
                        let o = self.objects.get_mut(obj).unwrap();
                        match device {
                            Device::Heat => {
                                o.hot = true;
                                o.cold = false;
                            }
                            Device::Cool => {
                                o.cold = true;
                                o.hot = false;
                            }
                            Device::Clean => o.clean = true,
                            Device::Lamp => unreachable!(),
                        }
                        let obs = format!("You {} the {obj} using the {recep}.", verb.trim());
                        return Ok(self.ok_obs(obs));
                    }
                }
                return Ok(self.failure());
            }
        }
        if let Some(recep) = text.strip_prefix("use ") {
            let valid = self.agent_at.as_deref() == Some(recep)
                && self.receptacles.get(recep).is_some_and(|r| r.device == Some(Device::Lamp));
            if valid {
                if let Some(held) = self.holding.clone() {
                    if self.objects[&held].class == self.target_class
                        && self.task_kind == HouseTaskKind::ExamineLight
                    {
                        self.examined_in_light = true;
                    }
                    self.check_success();
                    let obs =
                        format!("You turn on the {recep} and examine the {held} in the light.");
                    return Ok(self.ok_obs(obs));
                }
                return Ok(self.ok_obs(format!("You turn on the {recep}.")));
            }
            return Ok(self.failure());
        }
        if let Some(name) = text.strip_prefix("examine ") {
            if let Some(r) = self.receptacles.get(name) {
                if self.agent_at.as_deref() == Some(name) {
                    let obs = match r.device {
                        Some(d) => format!("The {name} can be used to {}.", d.effect_phrase()),
                        None => {
                            format!("You look at the {name}. There is nothing special about it.")
                        }
                    };
                    return Ok(self.ok_obs(obs));
                }
                return Ok(self.failure());
            }
            let visible = self.holding.as_deref() == Some(name)
                || (self.agent_at.as_deref().is_some_and(|at| {
                    self.placement.get(name).map(String::as_str) == Some(at)
                        && self.contents_visible(at)
                }));
            if visible {
                let obs = self.object_description(name);
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure());
        }
        Ok(self.failure())
    }

    fn admissible_actions(&self) -> Vec<Action> {
        if self.done {
            return Vec::new();
        }
        let mut actions = Vec::new();
        let nav = |t: String| Action::new(&t, ActionKind::Navigate);
        let act = |t: String| Action::new(&t, ActionKind::Interact);
        let obs = |t: String| Action::new(&t, ActionKind::Observe);

        actions.push(obs("look".into()));
        actions.push(obs("inventory".into()));
        for name in self.receptacles.keys() {
            if self.agent_at.as_deref() != Some(name) {
                actions.push(nav(format!("go to {name}")));
            }
        }
        if let Some(at) = self.agent_at.as_deref() {
            let r = &self.receptacles[at];
            actions.push(obs(format!("examine {at}")));
            if r.openable && !r.open {
                actions.push(act(format!("open {at}")));
            }
            if r.openable && r.open {
                actions.push(act(format!("close {at}")));
            }
            if self.contents_visible(at) {
                for obj in self.contents_of(at) {
                    if self.holding.is_none() {
                        actions.push(act(format!("take {obj} from {at}")));
                    }
                    actions.push(obs(format!("examine {obj}")));
                }
            }
            if let Some(held) = self.holding.as_deref() {
                if r.holds && self.contents_visible(at) {
                    actions.push(act(format!("move {held} to {at}")));
                }
                if let Some(d) = r.device {
                    if d != Device::Lamp {
                        actions.push(act(format!("{} {held} with {at}", d.verb())));
                    }
                }
            }
            if r.device == Some(Device::Lamp) {
                actions.push(act(format!("use {at}")));
            }
        }
        if let Some(held) = self.holding.as_deref() {
            actions.push(obs(format!("examine {held}")));
        }
        actions.sort_by(|a, b| a.text.cmp(&b.text));
        actions.dedup_by(|a, b| a.text == b.text);
        actions
    }

    fn apply_perturbation(&mut self, spec: &PerturbationSpec) -> Result<()> {
        if self.done {
            return Err(Error::Terminal);
        }
        if self.perturb_event.is_some() {
            return Err(Error::InvalidInput("perturbation already applied".into()));
        }
        if spec.trigger_step < 1 || spec.trigger_step < self.acting_steps {
            return Err(Error::InvalidInput(format!(
                "trigger step {} is in the past (acting step {})",
                spec.trigger_step, self.acting_steps
            )));
        }
        let current = self
            .placement
            .get(&spec.object)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no such object: {}", spec.object)))?;
        let dest_ok = self
            .receptacles
            .get(&spec.new_location)
            .is_some_and(|r| r.holds);
        if !dest_ok {
            return Err(Error::InvalidInput(format!(
                "no such location: {}",
                spec.new_location
            )));
        }
        if current == spec.new_location {
            return Err(Error::InvalidInput(
                "relocation target equals current location".into(),
            ));
        }
        if current == HELD {
            self.holding = None;
        }
        self.placement
            .insert(spec.object.clone(), spec.new_location.clone());
        self.perturb_event = Some((
            self.acting_steps,
            spec.object.clone(),
            current,
            spec.new_location.clone(),
        ));
        Ok(())
    }

    fn ground_truth(&self) -> GroundTruthSnapshot {
        let mut facts = Vec::new();
        for name in self.receptacles.keys() {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Spatial,
                name.clone(),
                "reachable",
                "yes",
                self.steps,
            ));
        }
        for (obj, place) in &self.placement {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Spatial,
                obj.clone(),
                "at",
                place.clone(),
                self.steps,
            ));
        }
        for (name, r) in &self.receptacles {
            if r.openable {
                facts.push(KnowledgeEntry::observed(
                    KnowledgeKind::Affordance,
                    name.clone(),
                    "can be",
                    "opened",
                    self.steps,
                ));
            }
            if let Some(d) = r.device {
                facts.push(KnowledgeEntry::observed(
                    KnowledgeKind::Affordance,
                    name.clone(),
                    "can be used to",
                    d.effect_phrase(),
                    self.steps,
                ));
            }
        }
        let mut classes: Vec<String> = self.objects.values().map(|o| o.class.clone()).collect();
        classes.sort();
        classes.dedup();
        for (name, r) in &self.receptacles {
            if !r.openable {
                continue;
            }
            let contents = self.contents_of(name);
            for class in &classes {
                let present = contents.iter().any(|o| self.objects[o].class == *class);
                if !present {
                    facts.push(KnowledgeEntry::observed(
                        KnowledgeKind::Negative,
                        class.clone(),
                        "not in",
                        name.clone(),
                        self.steps,
                    ));
                }
            }
        }
        GroundTruthSnapshot {
            env_id: EnvId::House,
            seed: self.seed,
            state: serde_json::to_value(self.world_state()).expect("world state serializes"),
            facts,
            locations: self.receptacles.keys().cloned().collect(),
        }
    }

    fn is_terminal(&self) -> bool {
        self.done
    }

    fn step_counter(&self) -> usize {
        self.steps
    }

    fn acting_steps(&self) -> usize {
        self.acting_steps
    }

    fn begin_acting(&mut self) -> Observation {
        self.acting_steps = 0;
        let text = match &self.agent_at {
            Some(r) => self.location_description(r, false),
            None => self.room_description("You are in the middle of the room."),
        };
        Observation::new(text, self.steps, false)
    }

    fn clone_env(&self) -> Box<dyn Env> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh(seed: u64, template: TaskTemplate) -> HouseEnv {
        HouseEnv::generate(seed, template).unwrap()
    }

    fn nav(t: &str) -> Action {
        Action::new(t, ActionKind::Navigate)
    }

    fn act(t: &str) -> Action {
        Action::new(t, ActionKind::Interact)
    }

    #[test]
    fn generation_is_deterministic() {
        let a = fresh(7, TaskTemplate::PickPlace);
        let b = fresh(7, TaskTemplate::PickPlace);
        assert_eq!(a.instruction, b.instruction);
        assert_eq!(a.initial_observation().text, b.initial_observation().text);
        assert_eq!(a.placement, b.placement);
    }

    #[test]
    fn open_enumerates_contents() {
        let mut env = fresh(3, TaskTemplate::PickPlace);
        // Find an openable closed container and one of its occupants.
        let (name, contents) = env
            .receptacles
            .iter()
            .filter(|(_, r)| r.openable && !r.open)
            .map(|(n, _)| (n.clone(), env.contents_of(n)))
            .next()
            .expect("some closed container");
        env.step(&nav(&format!("go to {name}"))).unwrap();
        let out = env.step(&act(&format!("open {name}"))).unwrap();
        assert!(!out.observation.error_flag);
        for obj in &contents {
            assert!(
                out.observation.text.contains(obj.as_str()),
                "{} missing from {:?}",
                obj,
                out.observation.text
            );
        }
    }

    #[test]
    fn take_while_holding_fails_and_preserves_state() {
        let mut env = fresh(11, TaskTemplate::PickTwo);
        // Find two objects on visible (non-openable) receptacles.
        let visible: Vec<(String, String)> = env
            .placement
            .iter()
            .filter(|(_, p)| !env.receptacles[*p].openable)
            .map(|(o, p)| (o.clone(), p.clone()))
            .collect();
        assert!(visible.len() >= 2, "seed should place visible objects");
        let (o1, p1) = visible[0].clone();
        let (o2, p2) = visible
            .iter()
            .find(|(o, _)| *o != o1)
            .cloned()
            .expect("second object");
        env.step(&nav(&format!("go to {p1}"))).unwrap();
        let out = env.step(&act(&format!("take {o1} from {p1}"))).unwrap();
        assert!(!out.observation.error_flag);
        if p2 != p1 {
            env.step(&nav(&format!("go to {p2}"))).unwrap();
        }
        let before = env.placement.clone();
        let out = env.step(&act(&format!("take {o2} from {p2}"))).unwrap();
        assert!(out.observation.error_flag);
        assert_eq!(out.observation.text, FAILURE_TEXT);
        assert_eq!(env.placement, before);
        assert_eq!(env.holding.as_deref(), Some(o1.as_str()));
    }

    #[test]
    fn admissible_actions_sound_and_complete() {
        // Soundness: every admissible action executes without the error flag.
        // Completeness: every failing surface form is absent from the list.
        let env = fresh(5, TaskTemplate::HeatPlace);
        let mut env_nav = env.clone();
        env_nav.step(&nav("go to countertop 1")).unwrap();
        for probe in [env, env_nav] {
            let admissible = probe.admissible_actions();
            for action in &admissible {
                let mut copy = probe.clone();
                let out = copy.step(action).unwrap();
                assert!(
                    !out.observation.error_flag,
                    "admissible action failed: {}",
                    action.text
                );
            }
            let texts: Vec<&str> = admissible.iter().map(|a| a.text.as_str()).collect();
            let mut sorted = texts.clone();
            sorted.sort_unstable();
            assert_eq!(texts, sorted, "admissible actions must be sorted");
        }
    }

    #[test]
    fn closed_container_excludes_take_includes_open() {
        let mut env = fresh(3, TaskTemplate::PickPlace);
        let closed: String = env
            .receptacles
            .iter()
            .find(|(_, r)| r.openable && !r.open)
            .map(|(n, _)| n.clone())
            .expect("closed container");
        env.step(&nav(&format!("go to {closed}"))).unwrap();
        let actions = env.admissible_actions();
        assert!(actions.iter().any(|a| a.text == format!("open {closed}")));
        assert!(!actions.iter().any(|a| a.text.starts_with("take ")));
    }

    #[test]
    fn perturbation_moves_object_and_stale_take_fails() {
        let mut env = fresh(9, TaskTemplate::PickPlace);
        let (obj, old) = env
            .placement
            .iter()
            .map(|(o, p)| (o.clone(), p.clone()))
            .find(|(_, p)| !env.receptacles[p].openable)
            .expect("placed object");
        let new_loc = env
            .receptacles
            .iter()
            .filter(|(n, r)| r.holds && **n != old)
            .map(|(n, _)| n.clone())
            .next()
            .unwrap();
        env.step(&nav(&format!("go to {old}"))).unwrap();
        env.apply_perturbation(&PerturbationSpec {
            trigger_step: 1,
            object: obj.clone(),
            new_location: new_loc.clone(),
        })
        .unwrap();
        let out = env.step(&act(&format!("take {obj} from {old}"))).unwrap();
        assert!(out.observation.error_flag);
        assert_eq!(env.placement[&obj], new_loc);

        // A second perturbation is rejected.
        assert!(env
            .apply_perturbation(&PerturbationSpec {
                trigger_step: 9,
                object: obj,
                new_location: old,
            })
            .is_err());
    }

    #[test]
    fn snapshot_reflects_relocation_and_regenerates_identically() {
        let env = fresh(13, TaskTemplate::CoolPlace);
        let env2 = fresh(13, TaskTemplate::CoolPlace);
        assert_eq!(
            env.ground_truth().fact_identities(),
            env2.ground_truth().fact_identities()
        );
    }

    #[test]
    fn snapshot_fact_count_matches_brute_force() {
        let env = fresh(21, TaskTemplate::PickPlace);
        let snap = env.ground_truth();
        // Independent enumeration: receptacles + placements + openable +
        // device affordances + per-(class, container) negatives.
        let receps = env.receptacles.len();
        let placements = env.placement.len();
        let openable = env.receptacles.values().filter(|r| r.openable).count();
        let devices = env.receptacles.values().filter(|r| r.device.is_some()).count();
        let mut classes: Vec<&str> = env.objects.values().map(|o| o.class.as_str()).collect();
        classes.sort_unstable();
        classes.dedup();
        let mut negatives = 0;
        for (name, r) in &env.receptacles {
            if !r.openable {
                continue;
            }
            for class in &classes {
                let present = env
                    .contents_of(name)
                    .iter()
                    .any(|o| env.objects[o].class == *class);
                if !present {
                    negatives += 1;
                }
            }
        }
        assert_eq!(
            snap.facts.len(),
            receps + placements + openable + devices + negatives
        );
    }

    #[test]
    fn terminal_state_has_no_admissible_actions() {
        let mut env = fresh(2, TaskTemplate::PickPlace);
        env.done = true;
        assert!(env.admissible_actions().is_empty());
        assert!(matches!(env.step(&nav("look")), Err(Error::Terminal)));
    }
}
