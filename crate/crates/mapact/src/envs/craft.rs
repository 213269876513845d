//! Recipe-crafting world.
//!
//! Raw materials live at named resource locations; crafting happens at the
//! crafting table with exact recipe commands; a storage chest may hold a few
//! pre-gathered items. Recipe commands are listed in the reset observation
//! (the recipe book is public), but material sources are only revealed by
//! visiting locations — that gap is what exploration buys.
//!
//! Failed actions return "Could not execute <action>." with the error flag
//! set and never change inventory or placement.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    Action, ActionKind, EnvId, Instruction, KnowledgeEntry, KnowledgeKind, Observation,
};

use super::{world_seed, Env, GroundTruthSnapshot, PerturbationSpec, StepOutcome, TaskTemplate};

pub const TABLE: &str = "crafting table";
pub const CHEST: &str = "storage chest 1";

/// Fixed material-to-source affinity. Instances draw a subset.
const MATERIAL_SOURCES: &[(&str, &str)] = &[
    ("clay", "pond"),
    ("iron ore", "mine"),
    ("oak log", "forest"),
    ("reed", "pond"),
    ("sand", "quarry"),
    ("stone", "quarry"),
    ("wheat", "field"),
];

/// One crafting recipe: output, amount produced per craft, ingredients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub output: String,
    pub yield_count: u32,
    pub ingredients: Vec<(u32, String)>,
}

impl Recipe {
    /// The exact surface command that crafts this recipe.
    pub fn command(&self) -> String {
        let ingredients = self
            .ingredients
            .iter()
            .map(|(q, item)| format!("{q} {item}"))
            .collect::<Vec<_>>()
            .join(", ");
        format!("craft {} {} using {}", self.yield_count, self.output, ingredients)
    }
}

fn recipe(output: &str, yield_count: u32, ingredients: &[(u32, &str)]) -> Recipe {
    Recipe {
        output: output.to_string(),
        yield_count,
        ingredients: ingredients.iter().map(|(q, i)| (*q, i.to_string())).collect(),
    }
}

fn tier1_recipes() -> Vec<Recipe> {
    vec![
        recipe("oak planks", 4, &[(1, "oak log")]),
        recipe("stone bricks", 2, &[(2, "stone")]),
        recipe("iron ingot", 1, &[(2, "iron ore")]),
        recipe("glass", 2, &[(2, "sand")]),
        recipe("bread", 1, &[(3, "wheat")]),
        recipe("clay brick", 2, &[(2, "clay")]),
        recipe("paper", 3, &[(2, "reed")]),
    ]
}

fn tier2_recipes() -> Vec<Recipe> {
    vec![
        recipe("ladder", 1, &[(3, "oak planks")]),
        recipe("stone table", 1, &[(2, "stone bricks"), (1, "oak planks")]),
        recipe("lantern", 1, &[(1, "glass"), (1, "iron ingot")]),
        recipe("book", 1, &[(2, "paper"), (1, "oak planks")]),
        recipe("brick oven", 1, &[(3, "clay brick"), (1, "stone bricks")]),
    ]
}

fn source_of(material: &str) -> &'static str {
    MATERIAL_SOURCES
        .iter()
        .find(|(m, _)| *m == material)
        .map(|(_, s)| *s)
        .expect("known material")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CraftEnv {
    instruction: Instruction,
    template: TaskTemplate,
    target: String,
    /// Recipe book for this instance, keyed by output.
    recipes: BTreeMap<String, Recipe>,
    /// material -> source location (perturbable).
    material_nodes: BTreeMap<String, String>,
    /// node -> sorted materials available there (derived, kept in sync).
    nodes: Vec<String>,
    chest: BTreeMap<String, u32>,
    chest_open: bool,
    inventory: BTreeMap<String, u32>,
    agent_at: Option<String>,
    steps: usize,
    acting_steps: usize,
    done: bool,
    success: bool,
    perturb_event: Option<(usize, String, String, String)>,
    seed: u64,
}

impl CraftEnv {
    pub fn generate(seed: u64, template: TaskTemplate) -> Result<Self> {
        let depth = match template {
            TaskTemplate::CraftDepth1 => 1,
            TaskTemplate::CraftDepth2 => 2,
            other => {
                return Err(Error::InvalidInput(format!(
                    "template {other} is not a craft task"
                )))
            }
        };
        for attempt in 0..8 {
            let env = Self::generate_attempt(seed, template, depth, attempt);
            if env.recipe_depth(&env.target) == depth && env.internal_plan_len().is_some_and(|n| n <= 50)
            {
                return Ok(env);
            }
        }
        Err(Error::Unsolvable { seed, attempts: 8 })
    }

    fn generate_attempt(seed: u64, template: TaskTemplate, depth: u32, attempt: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(world_seed(EnvId::Craft, template, seed, attempt));
        let tier1 = tier1_recipes();
        let tier2 = tier2_recipes();

        let target = if depth == 1 {
            tier1[rng.gen_range(0..tier1.len())].output.clone()
        } else {
            tier2[rng.gen_range(0..tier2.len())].output.clone()
        };

        // Book: everything the target needs, plus distractor recipes. One
        // distractor is forced to use a material from a different node so
        // every instance has at least two resource locations.
        let mut book: BTreeMap<String, Recipe> = BTreeMap::new();
        let all: Vec<Recipe> = tier1.iter().chain(tier2.iter()).cloned().collect();
        let include = |output: &str, book: &mut BTreeMap<String, Recipe>| {
            let mut stack = vec![output.to_string()];
            while let Some(item) = stack.pop() {
                if let Some(r) = all.iter().find(|r| r.output == item) {
                    if book.insert(item.clone(), r.clone()).is_none() {
                        for (_, ing) in &r.ingredients {
                            stack.push(ing.clone());
                        }
                    }
                }
            }
        };
        include(&target, &mut book);

        let node_of_book = |book: &BTreeMap<String, Recipe>| -> Vec<String> {
            let mut nodes: Vec<String> = book
                .values()
                .flat_map(|r| r.ingredients.iter())
                .filter(|(_, i)| !all.iter().any(|r| r.output == *i))
                .map(|(_, i)| source_of(i).to_string())
                .collect();
            nodes.sort();
            nodes.dedup();
            nodes
        };

        let mut candidates: Vec<&Recipe> = tier1.iter().filter(|r| !book.contains_key(&r.output)).collect();
        candidates.retain(|r| {
            let node = source_of(&r.ingredients[0].1);
            !node_of_book(&book).contains(&node.to_string())
        });
        if !candidates.is_empty() {
            let pick = candidates[rng.gen_range(0..candidates.len())].output.clone();
            include(&pick, &mut book);
        }
        // Maybe one more distractor for texture.
        let extras: Vec<&Recipe> = tier1.iter().filter(|r| !book.contains_key(&r.output)).collect();
        if !extras.is_empty() && rng.gen_bool(0.5) {
            let pick = extras[rng.gen_range(0..extras.len())].output.clone();
            include(&pick, &mut book);
        }

        let raw_materials: Vec<String> = {
            let mut raws: Vec<String> = book
                .values()
                .flat_map(|r| r.ingredients.iter())
                .filter(|(_, i)| !book.contains_key(i))
                .map(|(_, i)| i.clone())
                .collect();
            raws.sort();
            raws.dedup();
            raws
        };
        let material_nodes: BTreeMap<String, String> = raw_materials
            .iter()
            .map(|m| (m.clone(), source_of(m).to_string()))
            .collect();
        let mut nodes: Vec<String> = material_nodes.values().cloned().collect();
        nodes.sort();
        nodes.dedup();

        // Chest: 0-2 pre-gathered stacks from the instance universe.
        let mut chest = BTreeMap::new();
        let chest_count = rng.gen_range(0..=2);
        for _ in 0..chest_count {
            let m = &raw_materials[rng.gen_range(0..raw_materials.len())];
            *chest.entry(m.clone()).or_insert(0) += rng.gen_range(1..=2);
        }

        let instruction = Instruction::new(
            format!("craft 1 {target}."),
            EnvId::Craft,
            template.as_str(),
            seed,
        );

        CraftEnv {
            instruction,
            template,
            target,
            recipes: book,
            material_nodes,
            nodes,
            chest,
            chest_open: false,
            inventory: BTreeMap::new(),
            agent_at: None,
            steps: 0,
            acting_steps: 0,
            done: false,
            success: false,
            perturb_event: None,
            seed,
        }
    }

    /// Locations an agent can navigate to.
    pub fn locations(&self) -> Vec<String> {
        let mut locs = vec![TABLE.to_string(), CHEST.to_string()];
        locs.extend(self.nodes.iter().cloned());
        locs.sort();
        locs
    }

    fn materials_at(&self, node: &str) -> Vec<String> {
        self.material_nodes
            .iter()
            .filter(|(_, n)| n.as_str() == node)
            .map(|(m, _)| m.clone())
            .collect()
    }

    fn recipe_depth(&self, item: &str) -> u32 {
        match self.recipes.get(item) {
            None => 0,
            Some(r) => {
                1 + r
                    .ingredients
                    .iter()
                    .map(|(_, i)| self.recipe_depth(i))
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// Total raw-material counts needed to craft `count` of `item`, plus the
    /// number of craft operations per recipe output.
    fn expand_needs(&self, item: &str, count: u32, raws: &mut BTreeMap<String, u32>, ops: &mut BTreeMap<String, u32>) {
        match self.recipes.get(item) {
            None => *raws.entry(item.to_string()).or_insert(0) += count,
            Some(r) => {
                let n_ops = count.div_ceil(r.yield_count);
                *ops.entry(item.to_string()).or_insert(0) += n_ops;
                for (q, ing) in r.ingredients.clone() {
                    self.expand_needs(&ing, n_ops * q, raws, ops);
                }
            }
        }
    }

    /// Canonical plan length from the current state: visit each needed node
    /// in order, gather unit by unit, then craft bottom-up at the table.
    fn internal_plan_len(&self) -> Option<usize> {
        let mut raws = BTreeMap::new();
        let mut ops = BTreeMap::new();
        self.expand_needs(&self.target.clone(), 1, &mut raws, &mut ops);
        let mut steps = 0usize;
        let mut by_node: BTreeMap<String, u32> = BTreeMap::new();
        for (m, count) in &raws {
            let have = self.inventory.get(m).copied().unwrap_or(0);
            let need = count.saturating_sub(have);
            if need > 0 {
                let node = self.material_nodes.get(m)?;
                *by_node.entry(node.clone()).or_insert(0) += need;
            }
        }
        for (node, gathers) in &by_node {
            if self.agent_at.as_deref() != Some(node) {
                steps += 1;
            }
            steps += *gathers as usize;
        }
        let craft_ops: u32 = ops.values().sum();
        if craft_ops > 0 && self.agent_at.as_deref() != Some(TABLE) {
            steps += 1;
        }
        steps += craft_ops as usize;
        Some(steps)
    }

    fn failure(&mut self, action_text: &str) -> StepOutcome {
        StepOutcome {
            observation: Observation::new(
                format!("Could not execute {action_text}."),
                self.steps - 1,
                true,
            ),
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

    fn chest_contents_phrase(&self) -> String {
        if self.chest.is_empty() {
            "nothing".to_string()
        } else {
            self.chest
                .iter()
                .map(|(m, n)| format!("{n} {m}"))
                .collect::<Vec<_>>()
                .join(", ")
        }
    }

    fn recipe_listing(&self) -> String {
        self.recipes
            .values()
            .map(Recipe::command)
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn location_description(&self, loc: &str, arriving: bool) -> String {
        let lead = if arriving {
            format!("You arrive at the {loc}.")
        } else {
            format!("You are at the {loc}.")
        };
        if loc == TABLE {
            return format!("{lead} It is sturdy and ready for crafting.");
        }
        if loc == CHEST {
            if self.chest_open {
                return format!(
                    "{lead} The {CHEST} is open. In the {CHEST}, you see {}.",
                    self.chest_contents_phrase()
                );
            }
            return format!("{lead} The {CHEST} is closed.");
        }
        format!(
            "{lead} Available to gather: {}.",
            self.materials_at(loc).join(", ")
        )
    }

    fn inventory_phrase(&self) -> String {
        if self.inventory.is_empty() {
            "Your inventory is empty.".to_string()
        } else {
            format!(
                "You have: {}.",
                self.inventory
                    .iter()
                    .map(|(m, n)| format!("{n} {m}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
    }
}

impl Env for CraftEnv {
    fn env_id(&self) -> EnvId {
        EnvId::Craft
    }

    fn instruction(&self) -> &Instruction {
        &self.instruction
    }

    fn initial_observation(&self) -> Observation {
        let locs = self.locations();
        let listing = locs
            .iter()
            .map(|l| format!("a {l}"))
            .collect::<Vec<_>>()
            .join(", ");
        Observation::new(
            format!(
                "You are at the camp. Nearby you see: {listing}. Crafting commands: {}.",
                self.recipe_listing()
            ),
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
        let text = action.text.clone();

        if text == "look" {
            let obs = match &self.agent_at {
                Some(loc) => self.location_description(loc, false),
                None => self.initial_observation().text,
            };
            return Ok(self.ok_obs(obs));
        }
        if text == "inventory" {
            let obs = self.inventory_phrase();
            return Ok(self.ok_obs(obs));
        }
        if let Some(loc) = text.strip_prefix("go to ") {
            if self.locations().iter().any(|l| l == loc) && self.agent_at.as_deref() != Some(loc) {
                self.agent_at = Some(loc.to_string());
                let obs = self.location_description(loc, true);
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure(&text));
        }
        if let Some(material) = text.strip_prefix("gather ") {
            let at_node = self
                .agent_at
                .as_deref()
                .is_some_and(|at| self.materials_at(at).iter().any(|m| m == material));
            if at_node {
                let n = self.inventory.entry(material.to_string()).or_insert(0);
                *n += 1;
                let n = *n;
                return Ok(self.ok_obs(format!(
                    "You gather 1 {material}. You now have {n} {material}."
                )));
            }
            return Ok(self.failure(&text));
        }
        if text.starts_with("craft ") {
            let at_table = self.agent_at.as_deref() == Some(TABLE);
            let matched = self
                .recipes
                .values()
                .find(|r| r.command() == text)
                .cloned();
            if let (true, Some(r)) = (at_table, matched) {
                let available = r.ingredients.iter().all(|(q, item)| {
                    self.inventory.get(item).copied().unwrap_or(0) >= *q
                });
                if available {
                    for (q, item) in &r.ingredients {
                        let n = self.inventory.get_mut(item).unwrap();
                        *n -= q;
                        if *n == 0 {
                            self.inventory.remove(item);
                        }
                    }
                    *self.inventory.entry(r.output.clone()).or_insert(0) += r.yield_count;
                    if r.output == self.target {
                        self.done = true;
                        self.success = true;
                    }
                    let consumed = r
                        .ingredients
                        .iter()
                        .map(|(q, i)| format!("{q} {i}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let obs = format!(
                        "You craft {} {}. Consumed: {consumed}.",
                        r.yield_count, r.output
                    );
                    return Ok(self.ok_obs(obs));
                }
            }
            return Ok(self.failure(&text));
        }
        if text == format!("open {CHEST}") {
            if self.agent_at.as_deref() == Some(CHEST) && !self.chest_open {
                self.chest_open = true;
                let obs = format!(
                    "You open the {CHEST}. In the {CHEST}, you see {}.",
                    self.chest_contents_phrase()
                );
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure(&text));
        }
        if text == format!("close {CHEST}") {
            if self.agent_at.as_deref() == Some(CHEST) && self.chest_open {
                self.chest_open = false;
                return Ok(self.ok_obs(format!("You close the {CHEST}.")));
            }
            return Ok(self.failure(&text));
        }
        if let Some(rest) = text.strip_prefix("take ") {
            if let Some((item, loc)) = rest.split_once(" from ") {
                let valid = loc == CHEST
                    && self.agent_at.as_deref() == Some(CHEST)
                    && self.chest_open
                    && self.chest.get(item).copied().unwrap_or(0) >= 1;
                if valid {
                    let left = {
                        let n = self.chest.get_mut(item).unwrap();
                        *n -= 1;
                        *n
                    };
                    if left == 0 {
                        self.chest.remove(item);
                    }
                    let n = self.inventory.entry(item.to_string()).or_insert(0);
                    *n += 1;
                    let n = *n;
                    return Ok(self.ok_obs(format!(
                        "You take 1 {item} from the {CHEST}. You now have {n} {item}."
                    )));
                }
            }
            return Ok(self.failure(&text));
        }
        if let Some(loc) = text.strip_prefix("examine ") {
            if self.agent_at.as_deref() == Some(loc) {
                let obs = if loc == TABLE {
                    format!("The {TABLE} can be used to craft items from ingredients.")
                } else if loc == CHEST {
                    format!("You look at the {CHEST}. There is nothing special about it.")
                } else {
                    format!("The {loc} can be used to gather raw materials.")
                };
                return Ok(self.ok_obs(obs));
            }
            return Ok(self.failure(&text));
        }
        Ok(self.failure(&text))
    }

    fn admissible_actions(&self) -> Vec<Action> {
        if self.done {
            return Vec::new();
        }
        let mut actions = vec![
            Action::new("look", ActionKind::Observe),
            Action::new("inventory", ActionKind::Observe),
        ];
        for loc in self.locations() {
            if self.agent_at.as_deref() != Some(loc.as_str()) {
                actions.push(Action::new(&format!("go to {loc}"), ActionKind::Navigate));
            }
        }
        if let Some(at) = self.agent_at.as_deref() {
            actions.push(Action::new(&format!("examine {at}"), ActionKind::Observe));
            for m in self.materials_at(at) {
                actions.push(Action::new(&format!("gather {m}"), ActionKind::Interact));
            }
            if at == TABLE {
                for r in self.recipes.values() {
                    let available = r
                        .ingredients
                        .iter()
                        .all(|(q, item)| self.inventory.get(item).copied().unwrap_or(0) >= *q);
                    if available {
                        actions.push(Action::new(&r.command(), ActionKind::Craft));
                    }
                }
            }
            if at == CHEST {
                if self.chest_open {
                    actions.push(Action::new(&format!("close {CHEST}"), ActionKind::Interact));
                    for item in self.chest.keys() {
                        actions.push(Action::new(
                            &format!("take {item} from {CHEST}"),
                            ActionKind::Interact,
                        ));
                    }
                } else {
                    actions.push(Action::new(&format!("open {CHEST}"), ActionKind::Interact));
                }
            }
        }
        actions.sort_by(|a, b| a.text.cmp(&b.text));
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
            .material_nodes
            .get(&spec.object)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no such material: {}", spec.object)))?;
        if !self.nodes.contains(&spec.new_location) {
            return Err(Error::InvalidInput(format!(
                "no such node: {}",
                spec.new_location
            )));
        }
        if current == spec.new_location {
            return Err(Error::InvalidInput(
                "relocation target equals current location".into(),
            ));
        }
        self.material_nodes
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
        for loc in self.locations() {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Spatial,
                loc,
                "reachable",
                "yes",
                self.steps,
            ));
        }
        for (m, node) in &self.material_nodes {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Spatial,
                m.clone(),
                "at",
                node.clone(),
                self.steps,
            ));
        }
        for item in self.chest.keys() {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Spatial,
                item.clone(),
                "at",
                CHEST,
                self.steps,
            ));
        }
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Affordance,
            TABLE,
            "can be used to",
            "craft items from ingredients",
            self.steps,
        ));
        for node in &self.nodes {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Affordance,
                node.clone(),
                "can be used to",
                "gather raw materials",
                self.steps,
            ));
        }
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Affordance,
            CHEST,
            "can be",
            "opened",
            self.steps,
        ));
        for r in self.recipes.values() {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Affordance,
                r.output.clone(),
                "craft command",
                r.command(),
                self.steps,
            ));
        }
        // Universe of item names for negative knowledge about the chest.
        let mut universe: Vec<String> = self.recipes.keys().cloned().collect();
        universe.extend(
            self.recipes
                .values()
                .flat_map(|r| r.ingredients.iter().map(|(_, i)| i.clone())),
        );
        universe.extend(self.material_nodes.keys().cloned());
        universe.extend(self.chest.keys().cloned());
        universe.sort();
        universe.dedup();
        for name in &universe {
            if self.chest.get(name).copied().unwrap_or(0) == 0 {
                facts.push(KnowledgeEntry::observed(
                    KnowledgeKind::Negative,
                    name.clone(),
                    "not in",
                    CHEST,
                    self.steps,
                ));
            }
        }
        let state = serde_json::json!({
            "env_id": "craft",
            "seed": self.seed,
            "location_graph": self.locations().iter().map(|l| {
                (l.clone(), self.locations().into_iter().filter(|o| o != l).collect::<Vec<_>>())
            }).collect::<BTreeMap<_, _>>(),
            "object_placement": self.material_nodes,
            "chest": self.chest,
            "chest_open": self.chest_open,
            "agent_position": self.agent_at,
            "agent_inventory": self.inventory,
            "step_counter": self.steps,
        });
        GroundTruthSnapshot {
            env_id: EnvId::Craft,
            seed: self.seed,
            state,
            facts,
            locations: self.locations(),
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
            Some(loc) => self.location_description(loc, false),
            None => self.initial_observation().text,
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

    fn fresh(seed: u64, template: TaskTemplate) -> CraftEnv {
        CraftEnv::generate(seed, template).unwrap()
    }

    #[test]
    fn depth_two_targets_have_depth_two_trees() {
        for seed in 0..10 {
            let env = fresh(seed, TaskTemplate::CraftDepth2);
            assert_eq!(env.recipe_depth(&env.target), 2, "seed {seed}");
            let env = fresh(seed, TaskTemplate::CraftDepth1);
            assert_eq!(env.recipe_depth(&env.target), 1, "seed {seed}");
        }
    }

    #[test]
    fn every_instance_has_at_least_two_nodes() {
        for seed in 0..20 {
            let env = fresh(seed, TaskTemplate::CraftDepth1);
            assert!(env.nodes.len() >= 2, "seed {seed}: {:?}", env.nodes);
        }
    }

    #[test]
    fn gather_requires_the_right_node() {
        let mut env = fresh(4, TaskTemplate::CraftDepth1);
        let (material, node) = env
            .material_nodes
            .iter()
            .map(|(m, n)| (m.clone(), n.clone()))
            .next()
            .unwrap();
        let wrong = env.nodes.iter().find(|n| **n != node).cloned().unwrap();
        env.step(&Action::new(&format!("go to {wrong}"), ActionKind::Navigate))
            .unwrap();
        let out = env
            .step(&Action::new(&format!("gather {material}"), ActionKind::Interact))
            .unwrap();
        assert!(out.observation.error_flag);
        assert!(out.observation.text.starts_with("Could not execute"));

        env.step(&Action::new(&format!("go to {node}"), ActionKind::Navigate))
            .unwrap();
        let out = env
            .step(&Action::new(&format!("gather {material}"), ActionKind::Interact))
            .unwrap();
        assert!(!out.observation.error_flag);
        assert_eq!(env.inventory.get(&material), Some(&1));
    }

    #[test]
    fn exact_recipe_command_crafts_and_consumes() {
        let mut env = fresh(6, TaskTemplate::CraftDepth1);
        let recipe = env.recipes[&env.target].clone();
        // Stock the exact ingredients.
        for (q, item) in &recipe.ingredients {
            env.inventory.insert(item.clone(), *q);
        }
        env.step(&Action::new(&format!("go to {TABLE}"), ActionKind::Navigate))
            .unwrap();
        // A wrong command fails even with ingredients present.
        let out = env
            .step(&Action::new(
                &format!("craft 1 {} using 1 pebble", env.target),
                ActionKind::Craft,
            ))
            .unwrap();
        assert!(out.observation.error_flag);

        let out = env
            .step(&Action::new(&recipe.command(), ActionKind::Craft))
            .unwrap();
        assert!(!out.observation.error_flag);
        assert!(out.success, "crafting the target completes the task");
        for (_, item) in &recipe.ingredients {
            assert!(!env.inventory.contains_key(item), "{item} not consumed");
        }
    }

    #[test]
    fn admissible_actions_sound() {
        let mut env = fresh(8, TaskTemplate::CraftDepth2);
        env.step(&Action::new(
            &format!("go to {}", env.nodes[0]),
            ActionKind::Navigate,
        ))
        .unwrap();
        for action in env.admissible_actions() {
            let mut copy = env.clone();
            let out = copy.step(&action).unwrap();
            assert!(!out.observation.error_flag, "failed: {}", action.text);
        }
    }

    #[test]
    fn material_relocation_changes_gather_site() {
        let mut env = fresh(9, TaskTemplate::CraftDepth1);
        let (material, old) = env
            .material_nodes
            .iter()
            .map(|(m, n)| (m.clone(), n.clone()))
            .next()
            .unwrap();
        let new = env.nodes.iter().find(|n| **n != old).cloned().unwrap();
        env.apply_perturbation(&PerturbationSpec {
            trigger_step: 1,
            object: material.clone(),
            new_location: new.clone(),
        })
        .unwrap();
        env.step(&Action::new(&format!("go to {old}"), ActionKind::Navigate))
            .unwrap();
        let out = env
            .step(&Action::new(&format!("gather {material}"), ActionKind::Interact))
            .unwrap();
        assert!(out.observation.error_flag);
        assert_eq!(env.material_nodes[&material], new);
    }
}
