//! The repeated minority game.
//!
//! Each round every server picks [`Action::Active`] or [`Action::Inactive`]
//! without seeing anyone else's choice. The attendance is the number of
//! active servers; if it does not exceed the cutoff the active servers win,
//! otherwise the inactive ones do. Winners receive the configured reward,
//! everybody else receives nothing, and the winning action is appended to the
//! public history that strategy-based learners condition on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::policies::{Learner, PolicySpec, PolicyState};
use crate::rng;

/// Longest history any strategy table may condition on.
pub const MAX_MEMORY: u32 = 16;

/// A server's mode for one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Action {
    Inactive = 0,
    Active = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Inactive, Action::Active];

    pub fn from_index(index: usize) -> Action {
        if index == 0 {
            Action::Inactive
        } else {
            Action::Active
        }
    }

    pub fn from_bit(active: bool) -> Action {
        if active {
            Action::Active
        } else {
            Action::Inactive
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Action {
        match self {
            Action::Inactive => Action::Active,
            Action::Active => Action::Inactive,
        }
    }

    /// Uniform random action.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Action {
        Action::from_bit(rng.random::<bool>())
    }
}

/// Parameters of one game instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig {
    num_agents: usize,
    cutoff: usize,
    num_rounds: usize,
    reward: f64,
}

impl GameConfig {
    /// Validates the population invariants: the number of agents is odd,
    /// `0 < cutoff < agents`, and at least one round is played.
    pub fn new(num_agents: usize, cutoff: usize, num_rounds: usize) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::config("agents", "must be positive"));
        }
        if num_agents.is_multiple_of(2) {
            return Err(Error::config("agents", "must be odd"));
        }
        if cutoff == 0 || cutoff >= num_agents {
            return Err(Error::config(
                "cutoff",
                format!("must satisfy 0 < cutoff < agents ({num_agents})"),
            ));
        }
        if num_rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        Ok(GameConfig {
            num_agents,
            cutoff,
            num_rounds,
            reward: 1.0,
        })
    }

    /// The standard setting: 21 servers, cutoff 10, 10000 rounds.
    pub fn standard() -> Self {
        GameConfig::new(21, 10, 10_000).expect("valid default")
    }

    pub fn with_rounds(mut self, num_rounds: usize) -> Result<Self> {
        if num_rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        self.num_rounds = num_rounds;
        Ok(self)
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn num_rounds(&self) -> usize {
        self.num_rounds
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn winner(&self, attendance: usize) -> Result<Action> {
        determine_winner(attendance, self.cutoff, self.num_agents)
    }
}

/// Winning action for a round with `attendance` active servers.
///
/// Active wins iff `attendance <= cutoff`; the boundary case goes to active.
pub fn determine_winner(attendance: usize, cutoff: usize, num_agents: usize) -> Result<Action> {
    if attendance > num_agents {
        return Err(Error::invalid(format!(
            "attendance {attendance} exceeds population {num_agents}"
        )));
    }
    if cutoff == 0 || cutoff >= num_agents {
        return Err(Error::invalid(format!(
            "cutoff {cutoff} outside (0, {num_agents})"
        )));
    }
    Ok(Action::from_bit(attendance <= cutoff))
}

/// Reward vector for one round: `reward` for every agent that played the
/// winning action, 0 for everybody else.
pub fn assign_rewards(
    actions: &[Action],
    winning: Action,
    config: &GameConfig,
) -> Result<Vec<f64>> {
    if actions.len() != config.num_agents {
        return Err(Error::invalid(format!(
            "expected {} actions, got {}",
            config.num_agents,
            actions.len()
        )));
    }
    Ok(actions
        .iter()
        .map(|&a| if a == winning { config.reward } else { 0.0 })
        .collect())
}

/// Result of a single round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    pub round_index: usize,
    pub attendance: usize,
    pub winning_action: Action,
    pub rewards: Vec<f64>,
}

impl RoundOutcome {
    /// Number of agents that received a reward.
    pub fn winners(&self) -> usize {
        self.rewards.iter().filter(|&&r| r > 0.0).count()
    }
}

/// The public record of past winning actions.
///
/// Stored as a shift register: bit 0 is the most recent winner. The key a
/// strategy table of memory `s` reads is the low `s` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinHistory {
    bits: u32,
    len: usize,
    capacity: usize,
}

impl WinHistory {
    pub fn new(capacity: u32) -> Result<Self> {
        if capacity > MAX_MEMORY {
            return Err(Error::invalid(format!(
                "history capacity {capacity} exceeds {MAX_MEMORY}"
            )));
        }
        Ok(WinHistory {
            bits: 0,
            len: 0,
            capacity: capacity as usize,
        })
    }

    /// A full history of i.i.d. uniform winners.
    pub fn random<R: Rng + ?Sized>(capacity: u32, rng: &mut R) -> Result<Self> {
        let mut history = WinHistory::new(capacity)?;
        for _ in 0..capacity {
            history.push(Action::random(rng));
        }
        Ok(history)
    }

    pub fn push(&mut self, winner: Action) {
        if self.capacity == 0 {
            return;
        }
        let mask = low_mask(self.capacity);
        self.bits = ((self.bits << 1) | winner as u32) & mask;
        self.len = (self.len + 1).min(self.capacity);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Base-2 encoding of the `memory` most recent winners, or `None` when
    /// fewer than `memory` winners are recorded.
    pub fn key(&self, memory: u32) -> Option<usize> {
        let memory = memory as usize;
        (memory <= self.len).then(|| (self.bits & low_mask(memory)) as usize)
    }

    /// Recorded winners, oldest first.
    pub fn to_vec(&self) -> Vec<Action> {
        (0..self.len)
            .rev()
            .map(|k| Action::from_bit(self.bits >> k & 1 == 1))
            .collect()
    }
}

fn low_mask(width: usize) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

/// One server: its learner and its private random stream.
#[derive(Clone, Debug)]
pub struct Agent {
    pub policy: PolicyState,
    pub rng: ChaCha8Rng,
}

/// Everything one round produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundPlay {
    pub actions: Vec<Action>,
    pub outcome: RoundOutcome,
}

/// Plays one round: every agent selects against the shared history, then,
/// once all choices are in, every agent observes its own result and the
/// winner is appended to the history.
pub fn play_round(
    agents: &mut [Agent],
    history: &mut WinHistory,
    config: &GameConfig,
    round_index: usize,
) -> RoundPlay {
    debug_assert_eq!(agents.len(), config.num_agents);
    let actions: Vec<Action> = agents
        .iter_mut()
        .map(|agent| agent.policy.select(history, &mut agent.rng))
        .collect();
    let attendance = actions.iter().filter(|&&a| a == Action::Active).count();
    let winning_action = Action::from_bit(attendance <= config.cutoff);
    let rewards: Vec<f64> = actions
        .iter()
        .map(|&a| {
            if a == winning_action {
                config.reward
            } else {
                0.0
            }
        })
        .collect();
    for ((agent, &own), &reward) in agents.iter_mut().zip(&actions).zip(&rewards) {
        agent.policy.observe(history, own, winning_action, reward);
    }
    history.push(winning_action);
    RoundPlay {
        actions,
        outcome: RoundOutcome {
            round_index,
            attendance,
            winning_action,
            rewards,
        },
    }
}

/// A game in progress.
#[derive(Clone, Debug)]
pub struct Game {
    config: GameConfig,
    agents: Vec<Agent>,
    history: WinHistory,
    round: usize,
}

impl Game {
    /// `specs` holds one spec per agent, or a single spec shared by all.
    pub fn new(config: GameConfig, specs: &[PolicySpec], seed: u64) -> Result<Self> {
        let m = config.num_agents;
        if specs.len() != m && specs.len() != 1 {
            return Err(Error::invalid(format!(
                "expected 1 or {m} policy specs, got {}",
                specs.len()
            )));
        }
        let spec_for = |i: usize| {
            if specs.len() == 1 {
                &specs[0]
            } else {
                &specs[i]
            }
        };
        for i in 0..specs.len() {
            spec_for(i).validate()?;
        }
        let capacity = (0..m)
            .filter_map(|i| spec_for(i).memory())
            .max()
            .unwrap_or(0);
        let history = WinHistory::random(capacity, &mut rng::stream_rng(seed, rng::ENGINE_STREAM))?;
        let agents = (0..m)
            .map(|i| {
                let mut agent_rng = rng::agent_rng(seed, i);
                let policy = spec_for(i).build(&mut agent_rng)?;
                Ok(Agent {
                    policy,
                    rng: agent_rng,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Game {
            config,
            agents,
            history,
            round: 0,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn history(&self) -> &WinHistory {
        &self.history
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn rounds_played(&self) -> usize {
        self.round
    }

    pub fn step(&mut self) -> RoundPlay {
        let play = play_round(
            &mut self.agents,
            &mut self.history,
            &self.config,
            self.round,
        );
        self.round += 1;
        play
    }
}

/// The complete record of one seeded run.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTrace {
    pub config: GameConfig,
    pub seed: u64,
    pub outcomes: Vec<RoundOutcome>,
    /// Round-major: `actions[t * M + i]` is agent `i`'s action in round `t`.
    actions: Vec<Action>,
}

impl GameTrace {
    /// Builds a trace from a fixed action profile per round, scoring each
    /// round with the game's rules. Useful for forcing a known attendance.
    pub fn from_actions(config: GameConfig, seed: u64, rounds: &[Vec<Action>]) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::invalid("trace needs at least one round"));
        }
        let config = config.with_rounds(rounds.len())?;
        let mut outcomes = Vec::with_capacity(rounds.len());
        let mut actions = Vec::with_capacity(rounds.len() * config.num_agents);
        for (t, profile) in rounds.iter().enumerate() {
            let attendance = profile.iter().filter(|&&a| a == Action::Active).count();
            let winning_action = config.winner(attendance)?;
            let rewards = assign_rewards(profile, winning_action, &config)?;
            actions.extend_from_slice(profile);
            outcomes.push(RoundOutcome {
                round_index: t,
                attendance,
                winning_action,
                rewards,
            });
        }
        Ok(GameTrace {
            config,
            seed,
            outcomes,
            actions,
        })
    }

    pub fn num_rounds(&self) -> usize {
        self.outcomes.len()
    }

    pub fn action(&self, agent: usize, round: usize) -> Action {
        self.actions[round * self.config.num_agents + agent]
    }

    pub fn round_actions(&self, round: usize) -> &[Action] {
        let m = self.config.num_agents;
        &self.actions[round * m..(round + 1) * m]
    }

    pub fn attendance_series(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.attendance).collect()
    }
}

/// Runs a full game. A pure function of its arguments.
pub fn run_game(config: &GameConfig, specs: &[PolicySpec], seed: u64) -> Result<GameTrace> {
    let mut game = Game::new(config.clone(), specs, seed)?;
    let rounds = config.num_rounds;
    let mut outcomes = Vec::with_capacity(rounds);
    let mut actions = Vec::with_capacity(rounds * config.num_agents);
    for _ in 0..rounds {
        let play = game.step();
        actions.extend_from_slice(&play.actions);
        outcomes.push(play.outcome);
    }
    Ok(GameTrace {
        config: config.clone(),
        seed,
        outcomes,
        actions,
    })
}
