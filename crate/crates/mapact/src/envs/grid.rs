//! Maze game on a colored pixel grid.
//!
//! The full frame is visible every step, but the semantics are latent: which
//! colors are walkable, what the four actions do, how the move counter is
//! charged, and how hazards behave all have to be discovered through
//! interaction.
//!
//! Mechanics:
//! - `action1`..`action4` move the player one cell up/down/left/right;
//! - moves onto corridor cells succeed; straight moves cost 1 counter pixel,
//!   direction changes cost 2, blocked moves cost 1 and do not move the
//!   player;
//! - hazards patrol fixed corridor segments, advancing one cell per
//!   successful player move and bouncing at segment ends (period
//!   2 * (len - 1)); standing on a hazard cell after it advances ends the
//!   game;
//! - reaching the target cell completes the level; a counter at zero before
//!   that fails it.
//!
//! Colors: 0 background, 2 corridor, 5 wall, 6 counter pixel, 8/12 hazards,
//! 9 player, 14 target.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    Action, ActionKind, EnvId, Instruction, KnowledgeEntry, KnowledgeKind, Observation,
};

use super::{world_seed, Env, GroundTruthSnapshot, PerturbationSpec, StepOutcome, TaskTemplate};

pub const COLOR_BACKGROUND: u8 = 0;
pub const COLOR_CORRIDOR: u8 = 2;
pub const COLOR_WALL: u8 = 5;
pub const COLOR_COUNTER: u8 = 6;
pub const COLOR_HAZARD_A: u8 = 8;
pub const COLOR_PLAYER: u8 = 9;
pub const COLOR_HAZARD_B: u8 = 12;
pub const COLOR_TARGET: u8 = 14;

pub const FRAME_SIDE: usize = 64;
const COUNTER_INIT: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    pub fn from_action(text: &str) -> Option<Dir> {
        match text {
            "action1" => Some(Dir::Up),
            "action2" => Some(Dir::Down),
            "action3" => Some(Dir::Left),
            "action4" => Some(Dir::Right),
            _ => None,
        }
    }

    pub fn action_name(self) -> &'static str {
        match self {
            Dir::Up => "action1",
            Dir::Down => "action2",
            Dir::Left => "action3",
            Dir::Right => "action4",
        }
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Dir::Up => (-1, 0),
            Dir::Down => (1, 0),
            Dir::Left => (0, -1),
            Dir::Right => (0, 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dir::Up => "up",
            Dir::Down => "down",
            Dir::Left => "left",
            Dir::Right => "right",
        }
    }
}

/// Hazard patrolling a straight corridor segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hazard {
    pub path: Vec<(usize, usize)>,
    pub color: u8,
}

impl Hazard {
    pub fn period(&self) -> usize {
        2 * (self.path.len() - 1)
    }

    /// Triangle-wave position along the path for a given phase.
    pub fn position(&self, phase: usize) -> (usize, usize) {
        let p = self.period();
        let idx = phase % p;
        if idx < self.path.len() {
            self.path[idx]
        } else {
            self.path[p - idx]
        }
    }
}

/// Serializable view of the grid engine state, including the materialized
/// 64x64 frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridState {
    pub grid: Vec<Vec<u8>>,
    pub player_cell: (usize, usize),
    pub target_cell: (usize, usize),
    pub counter_pixels: u32,
    pub level: u32,
    pub hazard_cells: Vec<(Vec<(usize, usize)>, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Status {
    Start,
    Moved,
    Blocked,
    Invalid,
    LevelComplete,
    GameOver,
    CounterExhausted,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Start => "start",
            Status::Moved => "moved",
            Status::Blocked => "blocked",
            Status::Invalid => "invalid",
            Status::LevelComplete => "level complete",
            Status::GameOver => "game over",
            Status::CounterExhausted => "counter exhausted",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridEnv {
    instruction: Instruction,
    template: TaskTemplate,
    level: u32,
    /// true = corridor.
    cells: Vec<Vec<bool>>,
    side: usize,
    start: (usize, usize),
    target: (usize, usize),
    player: (usize, usize),
    hazards: Vec<Hazard>,
    counter: u32,
    last_dir: Option<Dir>,
    successful_moves: usize,
    status: Status,
    steps: usize,
    acting_steps: usize,
    done: bool,
    success: bool,
    seed: u64,
}

impl GridEnv {
    pub fn generate(seed: u64, template: TaskTemplate) -> Result<Self> {
        let (level, node_side, hazard_count) = match template {
            TaskTemplate::Maze1 => (1, 4, 0),
            TaskTemplate::Maze2 => (2, 5, 1),
            TaskTemplate::Maze3 => (3, 6, 2),
            other => {
                return Err(Error::InvalidInput(format!(
                    "template {other} is not a grid task"
                )))
            }
        };
        for attempt in 0..8 {
            let env = Self::generate_attempt(seed, template, level, node_side, hazard_count, attempt);
            // Solvable with headroom from a fresh attempt.
            if let Some((_, cost)) = plan_route(
                &env.cells,
                env.start,
                env.target,
                &env.hazards,
                0,
                None,
                env.counter,
            ) {
                if cost + 12 <= env.counter {
                    return Ok(env);
                }
            }
        }
        Err(Error::Unsolvable { seed, attempts: 8 })
    }

    fn generate_attempt(
        seed: u64,
        template: TaskTemplate,
        level: u32,
        node_side: usize,
        hazard_count: usize,
        attempt: u32,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(world_seed(EnvId::Grid, template, seed, attempt));
        let side = 2 * node_side + 1;
        let mut cells = vec![vec![false; side]; side];

        // Recursive-backtracker maze over the node lattice.
        let mut visited = vec![vec![false; node_side]; node_side];
        let mut stack = vec![(0usize, 0usize)];
        visited[0][0] = true;
        cells[1][1] = true;
        while let Some(&(r, c)) = stack.last() {
            let mut neighbors = Vec::new();
            if r > 0 && !visited[r - 1][c] {
                neighbors.push((r - 1, c));
            }
            if r + 1 < node_side && !visited[r + 1][c] {
                neighbors.push((r + 1, c));
            }
            if c > 0 && !visited[r][c - 1] {
                neighbors.push((r, c - 1));
            }
            if c + 1 < node_side && !visited[r][c + 1] {
                neighbors.push((r, c + 1));
            }
            if neighbors.is_empty() {
                stack.pop();
                continue;
            }
            let (nr, nc) = neighbors[rng.gen_range(0..neighbors.len())];
            visited[nr][nc] = true;
            cells[1 + 2 * nr][1 + 2 * nc] = true;
            cells[1 + r + nr][1 + c + nc] = true;
            stack.push((nr, nc));
        }
        // A few extra openings make loops, which gives hazards room and the
        // planner real choices.
        for _ in 0..node_side {
            let r = 1 + rng.gen_range(0..node_side * 2 - 1);
            let c = 1 + rng.gen_range(0..node_side * 2 - 1);
            if r < side - 1 && c < side - 1 && !cells[r][c] {
                let vertical_join = cells[r - 1][c] && cells[r + 1][c];
                let horizontal_join = cells[r][c - 1] && cells[r][c + 1];
                if vertical_join || horizontal_join {
                    cells[r][c] = true;
                }
            }
        }

        let start = (1, 1);
        let target = (side - 2, side - 2);

        // Hazard patrols: straight corridor runs that avoid start and target.
        let mut hazards = Vec::new();
        let mut candidates = straight_runs(&cells, 3);
        candidates.retain(|run| !run.contains(&start) && !run.contains(&target));
        let colors = [COLOR_HAZARD_A, COLOR_HAZARD_B];
        for color in colors.iter().take(hazard_count) {
            if candidates.is_empty() {
                break;
            }
            let idx = rng.gen_range(0..candidates.len());
            let path = candidates.swap_remove(idx);
            let taken: Vec<(usize, usize)> = path.clone();
            candidates.retain(|run| run.iter().all(|cell| !taken.contains(cell)));
            hazards.push(Hazard { path, color: *color });
        }

        let instruction = Instruction::new(
            "reach the goal tile of the maze.",
            EnvId::Grid,
            template.as_str(),
            seed,
        );

        GridEnv {
            instruction,
            template,
            level,
            cells,
            side,
            start,
            target,
            player: start,
            hazards,
            counter: COUNTER_INIT,
            last_dir: None,
            successful_moves: 0,
            status: Status::Start,
            steps: 0,
            acting_steps: 0,
            done: false,
            success: false,
            seed,
        }
    }

    pub fn is_corridor(&self, cell: (usize, usize)) -> bool {
        self.cells[cell.0][cell.1]
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn hazards(&self) -> &[Hazard] {
        &self.hazards
    }

    pub fn counter(&self) -> u32 {
        self.counter
    }

    fn hazard_positions(&self) -> Vec<(usize, usize)> {
        self.hazards
            .iter()
            .map(|h| h.position(self.successful_moves))
            .collect()
    }

    /// Render the textual frame shown to agents.
    fn frame_text(&self) -> String {
        let mut rows = Vec::with_capacity(self.side + 3);
        rows.push(format!("level {}", self.level));
        rows.push(format!("counter {}", self.counter));
        rows.push(format!("status {}", self.status.label()));
        let hazard_pos = self.hazard_positions();
        for r in 0..self.side {
            let mut row = String::with_capacity(self.side);
            for c in 0..self.side {
                let color = if (r, c) == self.player {
                    COLOR_PLAYER
                } else if let Some(i) = hazard_pos.iter().position(|&p| p == (r, c)) {
                    self.hazards[i].color
                } else if (r, c) == self.target {
                    COLOR_TARGET
                } else if self.cells[r][c] {
                    COLOR_CORRIDOR
                } else {
                    COLOR_WALL
                };
                row.push(char::from_digit(u32::from(color), 16).unwrap());
            }
            rows.push(row);
        }
        rows.join("\n")
    }

    /// Materialize the full 64x64 frame: maze at top-left, counter pixels
    /// along the bottom row drawn right-to-left.
    pub fn grid_state(&self) -> GridState {
        let mut grid = vec![vec![COLOR_BACKGROUND; FRAME_SIDE]; FRAME_SIDE];
        let hazard_pos = self.hazard_positions();
        for r in 0..self.side {
            for c in 0..self.side {
                grid[r][c] = if (r, c) == self.player {
                    COLOR_PLAYER
                } else if let Some(i) = hazard_pos.iter().position(|&p| p == (r, c)) {
                    self.hazards[i].color
                } else if (r, c) == self.target {
                    COLOR_TARGET
                } else if self.cells[r][c] {
                    COLOR_CORRIDOR
                } else {
                    COLOR_WALL
                };
            }
        }
        let lit = (self.counter as usize).min(FRAME_SIDE);
        for i in 0..lit {
            grid[FRAME_SIDE - 1][FRAME_SIDE - 1 - i] = COLOR_COUNTER;
        }
        GridState {
            grid,
            player_cell: self.player,
            target_cell: self.target,
            counter_pixels: self.counter,
            level: self.level,
            hazard_cells: self
                .hazards
                .iter()
                .map(|h| (h.path.clone(), self.successful_moves % h.period()))
                .collect(),
        }
    }

    fn observation(&self) -> Observation {
        let error = matches!(self.status, Status::Blocked | Status::Invalid);
        Observation::new(self.frame_text(), self.steps.saturating_sub(1), error)
    }
}

/// Maximal straight corridor runs (horizontal and vertical) of at least
/// `min_len` cells.
fn straight_runs(cells: &[Vec<bool>], min_len: usize) -> Vec<Vec<(usize, usize)>> {
    let side = cells.len();
    let mut runs = Vec::new();
    for r in 0..side {
        let mut run: Vec<(usize, usize)> = Vec::new();
        for c in 0..=side {
            if c < side && cells[r][c] {
                run.push((r, c));
            } else {
                if run.len() >= min_len {
                    runs.push(run.clone());
                }
                run.clear();
            }
        }
    }
    for c in 0..side {
        let mut run: Vec<(usize, usize)> = Vec::new();
        for r in 0..=side {
            if r < side && cells[r][c] {
                run.push((r, c));
            } else {
                if run.len() >= min_len {
                    runs.push(run.clone());
                }
                run.clear();
            }
        }
    }
    runs
}

/// Hazard-aware route search: minimize steps, then counter cost, subject to
/// the counter budget. States are (cell, facing, hazard phase).
///
/// Returns the action sequence and its counter cost.
pub fn plan_route(
    cells: &[Vec<bool>],
    from: (usize, usize),
    to: (usize, usize),
    hazards: &[Hazard],
    phase: usize,
    facing: Option<Dir>,
    budget: u32,
) -> Option<(Vec<Dir>, u32)> {
    use std::cmp::Reverse;
    use std::collections::{BinaryHeap, HashMap};

    let side = cells.len();
    let cycle = hazards.iter().map(Hazard::period).fold(1usize, lcm);
    let key = |pos: (usize, usize), dir: Option<Dir>, ph: usize| {
        (pos, dir.map(Dir::label), ph % cycle)
    };

    let mut best: HashMap<_, (usize, u32)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0usize, 0u32, from, facing, phase % cycle, Vec::new())));
    best.insert(key(from, facing, phase), (0, 0));
    while let Some(Reverse((steps, cost, pos, dir, ph, path))) = heap.pop() {
        if pos == to {
            return Some((path, cost));
        }
        if best.get(&key(pos, dir, ph)).is_some_and(|&(s, c)| (s, c) < (steps, cost)) {
            continue;
        }
        for next_dir in [Dir::Up, Dir::Down, Dir::Left, Dir::Right] {
            let (dr, dc) = next_dir.delta();
            let nr = pos.0 as isize + dr;
            let nc = pos.1 as isize + dc;
            if nr < 0 || nc < 0 || nr as usize >= side || nc as usize >= side {
                continue;
            }
            let next = (nr as usize, nc as usize);
            if !cells[next.0][next.1] {
                continue;
            }
            let move_cost = if dir == Some(next_dir) || dir.is_none() { 1 } else { 2 };
            let next_cost = cost + move_cost;
            if next_cost > budget {
                continue;
            }
            let next_phase = (ph + 1) % cycle;
            // The player may not share a cell with a hazard after it advances.
            if hazards.iter().any(|h| h.position(next_phase) == next) {
                continue;
            }
            let k = key(next, Some(next_dir), next_phase);
            let cand = (steps + 1, next_cost);
            if best.get(&k).is_none_or(|&prev| cand < prev) {
                best.insert(k, cand);
                let mut next_path = path.clone();
                next_path.push(next_dir);
                heap.push(Reverse((steps + 1, next_cost, next, Some(next_dir), next_phase, next_path)));
            }
        }
    }
    None
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    if a == 0 || b == 0 {
        a.max(b).max(1)
    } else {
        a / gcd(a, b) * b
    }
}

impl Env for GridEnv {
    fn env_id(&self) -> EnvId {
        EnvId::Grid
    }

    fn instruction(&self) -> &Instruction {
        &self.instruction
    }

    fn initial_observation(&self) -> Observation {
        Observation::new(self.frame_text(), 0, false)
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::Terminal);
        }
        self.steps += 1;
        self.acting_steps += 1;

        let Some(dir) = Dir::from_action(&action.text) else {
            self.status = Status::Invalid;
            return Ok(StepOutcome {
                observation: self.observation(),
                done: false,
                success: false,
            });
        };

        let (dr, dc) = dir.delta();
        let nr = self.player.0 as isize + dr;
        let nc = self.player.1 as isize + dc;
        let blocked = nr < 0
            || nc < 0
            || nr as usize >= self.side
            || nc as usize >= self.side
            || !self.cells[nr as usize][nc as usize];

        if blocked {
            // Blocked moves still consume counter but do not advance hazards.
            self.counter = self.counter.saturating_sub(1);
            self.status = Status::Blocked;
            if self.counter == 0 {
                self.status = Status::CounterExhausted;
                self.done = true;
            }
            return Ok(StepOutcome {
                observation: self.observation(),
                done: self.done,
                success: false,
            });
        }

        let cost = match self.last_dir {
            Some(d) if d != dir => 2,
            _ => 1,
        };
        self.counter = self.counter.saturating_sub(cost);
        self.player = (nr as usize, nc as usize);
        self.last_dir = Some(dir);
        self.successful_moves += 1;
        self.status = Status::Moved;

        if self.hazard_positions().contains(&self.player) {
            self.status = Status::GameOver;
            self.done = true;
        } else if self.player == self.target {
            self.status = Status::LevelComplete;
            self.done = true;
            self.success = true;
        } else if self.counter == 0 {
            self.status = Status::CounterExhausted;
            self.done = true;
        }

        Ok(StepOutcome {
            observation: self.observation(),
            done: self.done,
            success: self.success,
        })
    }

    fn admissible_actions(&self) -> Vec<Action> {
        if self.done {
            return Vec::new();
        }
        let mut actions = Vec::new();
        for dir in [Dir::Up, Dir::Down, Dir::Left, Dir::Right] {
            let (dr, dc) = dir.delta();
            let nr = self.player.0 as isize + dr;
            let nc = self.player.1 as isize + dc;
            if nr >= 0
                && nc >= 0
                && (nr as usize) < self.side
                && (nc as usize) < self.side
                && self.cells[nr as usize][nc as usize]
            {
                actions.push(Action::new(dir.action_name(), ActionKind::GridAction));
            }
        }
        actions.sort_by(|a, b| a.text.cmp(&b.text));
        actions
    }

    fn apply_perturbation(&mut self, _spec: &PerturbationSpec) -> Result<()> {
        Err(Error::InvalidInput(
            "grid world has no relocatable objects".into(),
        ))
    }

    fn ground_truth(&self) -> GroundTruthSnapshot {
        let mut facts = Vec::new();
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Spatial,
            "maze",
            "size",
            format!("{0}x{0}", self.side),
            self.steps,
        ));
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Spatial,
            "target",
            "at",
            format!("cell {},{}", self.target.0, self.target.1),
            self.steps,
        ));
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Spatial,
            "player start",
            "at",
            format!("cell {},{}", self.start.0, self.start.1),
            self.steps,
        ));
        for r in 0..self.side {
            for c in 0..self.side {
                if self.cells[r][c] {
                    facts.push(KnowledgeEntry::observed(
                        KnowledgeKind::Spatial,
                        format!("cell {r},{c}"),
                        "is",
                        "corridor",
                        self.steps,
                    ));
                }
            }
        }
        for dir in [Dir::Up, Dir::Down, Dir::Left, Dir::Right] {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Affordance,
                dir.action_name(),
                "moves player",
                dir.label(),
                self.steps,
            ));
        }
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Rule,
            "blocked move",
            "consumes",
            "1 counter pixel",
            self.steps,
        ));
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Rule,
            "straight move",
            "costs",
            "1 counter pixel",
            self.steps,
        ));
        facts.push(KnowledgeEntry::observed(
            KnowledgeKind::Rule,
            "turning move",
            "costs",
            "2 counter pixels",
            self.steps,
        ));
        if !self.hazards.is_empty() {
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Rule,
                "hazard",
                "advances",
                "one cell per successful move",
                self.steps,
            ));
        }
        for h in &self.hazards {
            let name = format!("hazard {}", h.color);
            for cell in &h.path {
                facts.push(KnowledgeEntry::observed(
                    KnowledgeKind::Rule,
                    name.clone(),
                    "visits",
                    format!("cell {},{}", cell.0, cell.1),
                    self.steps,
                ));
            }
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Rule,
                name.clone(),
                "period",
                h.period().to_string(),
                self.steps,
            ));
            facts.push(KnowledgeEntry::observed(
                KnowledgeKind::Rule,
                name,
                "patrols",
                h.path
                    .iter()
                    .map(|(r, c)| format!("{r},{c}"))
                    .collect::<Vec<_>>()
                    .join(";"),
                self.steps,
            ));
        }
        GroundTruthSnapshot {
            env_id: EnvId::Grid,
            seed: self.seed,
            state: serde_json::to_value(self.grid_state()).expect("grid state serializes"),
            facts,
            locations: (0..self.side)
                .flat_map(|r| (0..self.side).map(move |c| (r, c)))
                .filter(|&(r, c)| self.cells[r][c])
                .map(|(r, c)| format!("cell {r},{c}"))
                .collect(),
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

    /// Restart the level attempt: player, counter, hazard phase, and facing
    /// all reset; the maze layout is unchanged.
    fn begin_acting(&mut self) -> Observation {
        self.player = self.start;
        self.counter = COUNTER_INIT;
        self.last_dir = None;
        self.successful_moves = 0;
        self.done = false;
        self.success = false;
        self.status = Status::Start;
        self.acting_steps = 0;
        Observation::new(self.frame_text(), self.steps, false)
    }

    fn clone_env(&self) -> Box<dyn Env> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh(seed: u64, template: TaskTemplate) -> GridEnv {
        GridEnv::generate(seed, template).unwrap()
    }

    fn act(dir: Dir) -> Action {
        Action::new(dir.action_name(), ActionKind::GridAction)
    }

    #[test]
    fn initial_frame_has_one_player_and_one_target() {
        for seed in 0..12 {
            let env = fresh(seed, TaskTemplate::Maze1);
            let state = env.grid_state();
            let mut players = 0;
            let mut targets = 0;
            for row in &state.grid {
                for &c in row {
                    assert!(c < 16);
                    if c == COLOR_PLAYER {
                        players += 1;
                    }
                    if c == COLOR_TARGET {
                        targets += 1;
                    }
                }
            }
            assert_eq!(players, 1, "seed {seed}");
            assert_eq!(targets, 1, "seed {seed}");
        }
    }

    #[test]
    fn blocked_move_costs_one_and_does_not_move() {
        let mut env = fresh(3, TaskTemplate::Maze1);
        // (1,1) start: up and left are maze border walls.
        let before = env.counter;
        let pos = env.player;
        let out = env.step(&act(Dir::Up)).unwrap();
        assert!(out.observation.error_flag);
        assert_eq!(env.player, pos);
        assert_eq!(env.counter, before - 1);
    }

    #[test]
    fn straight_then_turn_costs() {
        let mut env = fresh(3, TaskTemplate::Maze1);
        // Find two successive admissible moves with a direction change.
        let first = env.admissible_actions()[0].clone();
        let before = env.counter;
        env.step(&first).unwrap();
        assert_eq!(env.counter, before - 1, "first move is straight-priced");
        let turn = env
            .admissible_actions()
            .into_iter()
            .find(|a| a.text != first.text)
            .expect("a turning move exists");
        let before = env.counter;
        let dir_changed = Dir::from_action(&turn.text) != env.last_dir;
        env.step(&turn).unwrap();
        let expected = if dir_changed { 2 } else { 1 };
        assert_eq!(env.counter, before - expected);
    }

    #[test]
    fn hazard_triangle_wave_has_the_stated_period() {
        let h = Hazard {
            path: vec![(1, 1), (1, 2), (1, 3), (1, 4)],
            color: COLOR_HAZARD_A,
        };
        assert_eq!(h.period(), 6);
        let positions: Vec<_> = (0..13).map(|p| h.position(p)).collect();
        assert_eq!(positions[0], (1, 1));
        assert_eq!(positions[3], (1, 4));
        assert_eq!(positions[4], (1, 3));
        assert_eq!(positions[6], (1, 1));
        assert_eq!(positions[12], (1, 1));
        for p in 0..6 {
            assert_eq!(positions[p], positions[p + 6]);
        }
    }

    #[test]
    fn plan_route_reaches_target_within_budget() {
        for seed in 0..10 {
            for template in [TaskTemplate::Maze1, TaskTemplate::Maze2, TaskTemplate::Maze3] {
                let env = fresh(seed, template);
                let (plan, cost) = plan_route(
                    &env.cells,
                    env.start,
                    env.target,
                    &env.hazards,
                    0,
                    None,
                    env.counter,
                )
                .expect("generated mazes are solvable");
                assert!(cost <= env.counter);
                // Execute the plan and confirm success.
                let mut sim = env.clone();
                let mut completed = false;
                for dir in plan {
                    let out = sim.step(&act(dir)).unwrap();
                    assert!(!out.observation.error_flag, "planned move blocked");
                    if out.done {
                        assert!(out.success, "plan must not die (seed {seed})");
                        completed = true;
                        break;
                    }
                }
                assert!(completed, "plan must finish the level (seed {seed})");
            }
        }
    }

    #[test]
    fn level_restart_resets_attempt_state() {
        let mut env = fresh(5, TaskTemplate::Maze2);
        let first = env.admissible_actions()[0].clone();
        env.step(&first).unwrap();
        assert_ne!(env.player, env.start);
        let obs = env.begin_acting();
        assert_eq!(env.player, env.start);
        assert_eq!(env.counter, COUNTER_INIT);
        assert_eq!(env.successful_moves, 0);
        assert!(obs.text.contains("status start"));
    }

    #[test]
    fn counter_exhaustion_fails_the_level() {
        let mut env = fresh(7, TaskTemplate::Maze1);
        env.counter = 1;
        let out = env.step(&act(Dir::Up)).unwrap(); // blocked at border
        assert!(out.done);
        assert!(!out.success);
        assert!(out.observation.text.contains("counter exhausted"));
    }
}
