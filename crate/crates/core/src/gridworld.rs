//! Grid-world family: ASCII map parsing, slip dynamics, coin/goal/danger
//! semantics, trajectory features, rule-based labels and ground-truth
//! weight synthesis.

use rand::Rng;

use crate::error::{Error, Result};
use crate::feedback::{softmax, stacked_class_logits, TrajectoryFeatures, WeightBlocks};
use crate::mdp::{sample_categorical, TabularMdp, Trajectory};
use crate::mle::{fit_mle, FeedbackDataset, SolverConfig};

pub const NUM_DIRECTIONS: usize = 4;
pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Goal,
    Danger,
    Coin(usize),
    Start,
}

/// Parsed grid map plus dynamics parameters.
#[derive(Debug, Clone)]
pub struct GridSpec {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    start: usize,
    goal: usize,
    danger: Option<usize>,
    /// Coin cell per coin id, numbered row-major.
    coins: Vec<usize>,
    /// Probability of moving in the intended direction.
    slip_intended: f64,
    horizon: usize,
}

/// Simulator state: agent cell plus collected-coin bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridState {
    pub cell: usize,
    pub mask: u32,
}

/// Parse a rectangular ASCII map. Symbols: `.` empty, `#` wall,
/// `S` start, `G` goal, `D` danger, `C` coin.
pub fn parse_grid_map(text: &str, horizon: usize) -> Result<GridSpec> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Parse { line: 1, col: 1, msg: "empty map".into() });
    }
    let width = lines[0].chars().count();
    let height = lines.len();
    let mut cells = Vec::with_capacity(width * height);
    let mut start = None;
    let mut goal = None;
    let mut danger = None;
    let mut coins = Vec::new();
    for (r, line) in lines.iter().enumerate() {
        if line.chars().count() != width {
            return Err(Error::Parse {
                line: r + 1,
                col: line.chars().count() + 1,
                msg: format!("row width {} != {}", line.chars().count(), width),
            });
        }
        for (c, ch) in line.chars().enumerate() {
            let idx = r * width + c;
            let cell = match ch {
                '.' => Cell::Empty,
                '#' => Cell::Wall,
                'S' => {
                    if start.replace(idx).is_some() {
                        return Err(Error::Parse {
                            line: r + 1,
                            col: c + 1,
                            msg: "duplicate start".into(),
                        });
                    }
                    Cell::Start
                }
                'G' => {
                    if goal.replace(idx).is_some() {
                        return Err(Error::Parse {
                            line: r + 1,
                            col: c + 1,
                            msg: "duplicate goal".into(),
                        });
                    }
                    Cell::Goal
                }
                'D' => {
                    if danger.replace(idx).is_some() {
                        return Err(Error::Parse {
                            line: r + 1,
                            col: c + 1,
                            msg: "more than one danger cell".into(),
                        });
                    }
                    Cell::Danger
                }
                'C' => {
                    coins.push(idx);
                    Cell::Coin(coins.len() - 1)
                }
                other => {
                    return Err(Error::Parse {
                        line: r + 1,
                        col: c + 1,
                        msg: format!("unknown symbol '{other}'"),
                    })
                }
            };
            cells.push(cell);
        }
    }
    let start = start.ok_or(Error::Parse { line: 1, col: 1, msg: "missing start".into() })?;
    let goal = goal.ok_or(Error::Parse { line: 1, col: 1, msg: "missing goal".into() })?;
    if coins.len() > 20 {
        return Err(Error::Capacity("more than 20 coins".into()));
    }
    Ok(GridSpec {
        width,
        height,
        cells,
        start,
        goal,
        danger,
        coins,
        slip_intended: 0.91,
        horizon,
    })
}

impl GridSpec {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_coins(&self) -> usize {
        self.coins.len()
    }

    pub fn goal_cell(&self) -> usize {
        self.goal
    }

    pub fn danger_cell(&self) -> Option<usize> {
        self.danger
    }

    pub fn start_cell(&self) -> usize {
        self.start
    }

    pub fn cell(&self, idx: usize) -> Cell {
        self.cells[idx]
    }

    /// Replace the intended-direction probability (1.0 = deterministic debug mode).
    pub fn with_slip(mut self, intended: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&intended) {
            return Err(Error::InvalidArgument("slip probability outside [0, 1]".into()));
        }
        self.slip_intended = intended;
        Ok(self)
    }

    pub fn feature_dim(&self) -> usize {
        4 + self.coins.len()
    }

    fn num_masks(&self) -> usize {
        1usize << self.coins.len()
    }

    pub fn initial_state(&self) -> GridState {
        GridState { cell: self.start, mask: 0 }
    }

    /// Product-state index used by the tabular MDP.
    pub fn state_index(&self, state: GridState) -> usize {
        state.cell * self.num_masks() + state.mask as usize
    }

    pub fn decode_state(&self, index: usize) -> GridState {
        let nm = self.num_masks();
        GridState { cell: index / nm, mask: (index % nm) as u32 }
    }

    fn direction_probs(&self, intended: usize) -> [f64; NUM_DIRECTIONS] {
        let other = (1.0 - self.slip_intended) / 3.0;
        let mut p = [other; NUM_DIRECTIONS];
        p[intended] = self.slip_intended;
        p
    }

    /// Deterministic effect of a realized direction: blocked moves stay
    /// in place, goal and danger are absorbing, entering a coin cell
    /// sets its bit.
    pub fn resolved_move(&self, state: GridState, direction: usize) -> GridState {
        let here = self.cells[state.cell];
        if here == Cell::Goal || here == Cell::Danger {
            return state;
        }
        let (r, c) = (state.cell / self.width, state.cell % self.width);
        let target = match direction {
            UP if r > 0 => Some(state.cell - self.width),
            DOWN if r + 1 < self.height => Some(state.cell + self.width),
            LEFT if c > 0 => Some(state.cell - 1),
            RIGHT if c + 1 < self.width => Some(state.cell + 1),
            _ => None,
        };
        let next_cell = match target {
            Some(t) if self.cells[t] != Cell::Wall => t,
            _ => state.cell,
        };
        let mut mask = state.mask;
        if let Cell::Coin(id) = self.cells[next_cell] {
            mask |= 1 << id;
        }
        GridState { cell: next_cell, mask }
    }

    /// One slip-dynamics step.
    pub fn grid_step<R: Rng>(&self, state: GridState, action: usize, rng: &mut R) -> GridState {
        let probs = self.direction_probs(action % NUM_DIRECTIONS);
        let realized = sample_categorical(&probs, rng);
        self.resolved_move(state, realized)
    }

    /// Expand the (cell x coin-bitmask) product space into a dense MDP.
    pub fn to_tabular_mdp(&self) -> Result<TabularMdp> {
        let num_states = self.width * self.height * self.num_masks();
        if num_states > 1_000_000 {
            return Err(Error::Capacity(format!(
                "product state space has {num_states} states (guard 10^6)"
            )));
        }
        let table_entries = num_states
            .checked_mul(NUM_DIRECTIONS)
            .and_then(|x| x.checked_mul(num_states));
        match table_entries {
            Some(e) if e <= 200_000_000 => {}
            _ => {
                return Err(Error::Capacity(
                    "dense transition table would exceed the memory guard".into(),
                ))
            }
        }
        let mut transition = vec![0.0; num_states * NUM_DIRECTIONS * num_states];
        for idx in 0..num_states {
            let state = self.decode_state(idx);
            for action in 0..NUM_DIRECTIONS {
                let row =
                    &mut transition[(idx * NUM_DIRECTIONS + action) * num_states..][..num_states];
                if state.mask as usize >= self.num_masks() {
                    unreachable!();
                }
                let probs = self.direction_probs(action);
                for (dir, &p) in probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let next = self.resolved_move(state, dir);
                    row[self.state_index(next)] += p;
                }
            }
        }
        let mut initial = vec![0.0; num_states];
        initial[self.state_index(self.initial_state())] = 1.0;
        TabularMdp::new(num_states, NUM_DIRECTIONS, self.horizon, transition, initial)
    }

    fn manhattan(&self, a: usize, b: usize) -> usize {
        let (ar, ac) = (a / self.width, a % self.width);
        let (br, bc) = (b / self.width, b % self.width);
        ar.abs_diff(br) + ac.abs_diff(bc)
    }

    /// (4+c)-dimensional trajectory features: normalized Manhattan
    /// distances to goal and danger at the final state, goal/danger
    /// indicators and one collected-indicator per coin; the whole
    /// vector is scaled by 1/sqrt(4+c) so ||phi||_2 <= 1.
    pub fn extract_features(&self, trajectory: &Trajectory) -> Result<TrajectoryFeatures> {
        let final_state = self.decode_state(trajectory.final_state());
        let dist_scale = (self.width - 1 + self.height - 1) as f64;
        let d_goal = self.manhattan(final_state.cell, self.goal) as f64 / dist_scale;
        let d_danger = match self.danger {
            Some(d) => self.manhattan(final_state.cell, d) as f64 / dist_scale,
            None => 1.0,
        };
        let at_goal = final_state.cell == self.goal;
        let at_danger = self.danger == Some(final_state.cell);
        let mut raw = Vec::with_capacity(self.feature_dim());
        raw.push(d_goal);
        raw.push(d_danger);
        raw.push(if at_goal { 1.0 } else { 0.0 });
        raw.push(if at_danger { 1.0 } else { 0.0 });
        for coin in 0..self.coins.len() {
            raw.push(if final_state.mask & (1 << coin) != 0 { 1.0 } else { 0.0 });
        }
        let scale = (self.feature_dim() as f64).sqrt();
        raw.iter_mut().for_each(|x| *x /= scale);
        TrajectoryFeatures::new(raw)
    }

    /// The rule mechanism behind the synthesized reward model: danger
    /// ends score 0, the top level needs all coins plus the goal, and
    /// intermediate coin counts map onto the remaining levels as
    /// min(floor((K-1) m / c), K-2).
    pub fn rule_based_label(&self, trajectory: &Trajectory, k: usize) -> Result<usize> {
        let c = self.coins.len();
        if k < c + 1 || k < 2 {
            return Err(Error::Config(format!(
                "need K >= max(2, coins + 1) = {}, got {k}",
                (c + 1).max(2)
            )));
        }
        let final_state = self.decode_state(trajectory.final_state());
        if self.danger == Some(final_state.cell) {
            return Ok(0);
        }
        let m = final_state.mask.count_ones() as usize;
        if m == c && final_state.cell == self.goal {
            return Ok(k - 1);
        }
        if c == 0 {
            return Ok(0);
        }
        Ok(((k - 1) * m / c).min(k - 2))
    }

    fn scripted_action(&self, state: GridState) -> usize {
        // walk toward the nearest uncollected coin, then the goal
        let target = self
            .coins
            .iter()
            .enumerate()
            .filter(|(id, _)| state.mask & (1 << id) == 0)
            .map(|(_, &cell)| cell)
            .min_by_key(|&cell| self.manhattan(state.cell, cell))
            .unwrap_or(self.goal);
        let (r, c) = (state.cell / self.width, state.cell % self.width);
        let (tr, tc) = (target / self.width, target % self.width);
        let mut prefs = Vec::with_capacity(4);
        if tr < r {
            prefs.push(UP);
        }
        if tr > r {
            prefs.push(DOWN);
        }
        if tc < c {
            prefs.push(LEFT);
        }
        if tc > c {
            prefs.push(RIGHT);
        }
        prefs.extend([UP, DOWN, LEFT, RIGHT]);
        for &a in &prefs {
            if self.resolved_move(state, a).cell != state.cell {
                return a;
            }
        }
        prefs[0]
    }

    /// Roll one episode under either a uniform-random or the scripted
    /// coin-then-goal policy, returning a trajectory in product-state indices.
    fn rollout<R: Rng>(&self, scripted: bool, rng: &mut R) -> Trajectory {
        let mut state = self.initial_state();
        let mut states = Vec::with_capacity(self.horizon + 1);
        let mut actions = Vec::with_capacity(self.horizon);
        states.push(self.state_index(state));
        for _ in 0..self.horizon {
            let a = if scripted {
                self.scripted_action(state)
            } else {
                rng.gen_range(0..NUM_DIRECTIONS)
            };
            actions.push(a);
            state = self.grid_step(state, a, rng);
            states.push(self.state_index(state));
        }
        Trajectory { states, actions }
    }

    /// Learn a ground-truth weight vector from the rule mechanism:
    /// label a mixed corpus of rollouts, fit the categorical model, and
    /// rescale the blocks to the per-block Assumption-2 budget. Retries
    /// with a doubled radius when held-out argmax agreement is below 90%.
    pub fn synthesize_true_weights<R: Rng>(
        &self,
        k: usize,
        bound: f64,
        rng: &mut R,
    ) -> Result<WeightBlocks> {
        const TOTAL: usize = 20_000;
        const AGREEMENT_THRESHOLD: f64 = 0.9;
        const MAX_DOUBLINGS: usize = 3;
        let d = self.feature_dim();
        let mut train = FeedbackDataset::new(k, d)?;
        let mut held_out: Vec<(Vec<f64>, usize)> = Vec::new();
        for i in 0..TOTAL {
            let scripted = i % 10 >= 7; // 70% uniform, 30% scripted
            let tau = self.rollout(scripted, rng);
            let phi = self.extract_features(&tau)?;
            let label = self.rule_based_label(&tau, k)?;
            if i % 5 == 4 {
                held_out.push((phi.phi().to_vec(), label));
            } else {
                train.push(phi.phi().to_vec(), label)?;
            }
        }
        let solver = SolverConfig { max_iters: 4000, ..SolverConfig::default() };
        let mut best_agreement = 0.0f64;
        for doubling in 0..=MAX_DOUBLINGS {
            let b_try = bound * (1u32 << doubling) as f64;
            let w = fit_mle(&train, b_try, &solver, None)?;
            let agreement = argmax_agreement(&w, k, &held_out);
            best_agreement = best_agreement.max(agreement);
            if agreement >= AGREEMENT_THRESHOLD {
                let blocks: Vec<Vec<f64>> =
                    w.chunks(d).map(|c| c.to_vec()).collect();
                // enforce the per-block contract ||w_i|| <= B/K by widening
                // the recorded radius rather than shrinking the blocks:
                // downscaling flattens the feedback probabilities toward
                // uniform and destroys the reward signal
                let worst = blocks
                    .iter()
                    .map(|b| crate::feedback::l2_norm(b))
                    .fold(0.0f64, f64::max);
                let b_final = b_try.max(worst * k as f64);
                return WeightBlocks::new(k, d, b_final, blocks);
            }
        }
        Err(Error::Synthesis { agreement: best_agreement, threshold: AGREEMENT_THRESHOLD })
    }
}

fn argmax_agreement(w: &[f64], k: usize, held_out: &[(Vec<f64>, usize)]) -> f64 {
    if held_out.is_empty() {
        return 0.0;
    }
    let hits = held_out
        .iter()
        .filter(|(phi, y)| {
            let probs = softmax(&stacked_class_logits(w, k, phi));
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            argmax == *y
        })
        .count();
    hits as f64 / held_out.len() as f64
}
