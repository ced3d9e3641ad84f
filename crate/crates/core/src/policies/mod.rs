//! Distributed learning rules.
//!
//! Every rule is driven through the same two calls per round: `select`
//! against the public history, then `observe` with the agent's own action,
//! the round's winner and the agent's reward.

pub mod adaptive;
pub mod automata;
pub mod qlearn;
pub mod rotherev;
pub mod spec;
pub mod strategy;
pub mod wsls;

use rand::Rng;

use crate::game::{Action, WinHistory};

pub use adaptive::AdaptiveState;
pub use automata::{AutomataForm, AutomataState};
pub use qlearn::{QState, QVariant};
pub use rotherev::RothErevState;
pub use spec::{PolicySpec, POLICY_NAMES};
pub use strategy::{LearningRate, ScoredStrategySet, Scoring, StrategyTable};
pub use wsls::WslsState;

/// The per-round interface the engine drives.
pub trait Learner {
    /// Picks this round's action. `history` holds the winners of past rounds.
    fn select<R: Rng + ?Sized>(&mut self, history: &WinHistory, rng: &mut R) -> Action;

    /// Feedback for the round just played. `history` is still the history
    /// the round was played against.
    fn observe(&mut self, history: &WinHistory, own: Action, winning: Action, reward: f64);
}

/// Learner state of one agent.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyState {
    Seminal(ScoredStrategySet),
    Exponential(ScoredStrategySet),
    QLearning(QState),
    Adaptive(AdaptiveState),
    Wsls(WslsState),
    RothErev(RothErevState),
    Automata(AutomataState),
    Random,
}

impl Learner for PolicyState {
    fn select<R: Rng + ?Sized>(&mut self, history: &WinHistory, rng: &mut R) -> Action {
        match self {
            PolicyState::Seminal(set) => set.seminal_select(history, rng),
            PolicyState::Exponential(set) => set.exponential_select(history, rng),
            PolicyState::QLearning(q) => q.select(history, rng),
            PolicyState::Adaptive(a) => a.select(rng),
            PolicyState::Wsls(w) => w.select(rng),
            PolicyState::RothErev(r) => r.select(rng),
            PolicyState::Automata(a) => a.select(rng),
            PolicyState::Random => random_select(rng),
        }
    }

    fn observe(&mut self, history: &WinHistory, own: Action, winning: Action, reward: f64) {
        let won = own == winning;
        match self {
            PolicyState::Seminal(set) | PolicyState::Exponential(set) => {
                set.update(history, winning)
            }
            PolicyState::QLearning(q) => q.observe(own, reward),
            PolicyState::Adaptive(a) => a.update(own, won, reward, winning),
            PolicyState::Wsls(w) => w.observe(own, won),
            PolicyState::RothErev(r) => r.update(own, reward),
            PolicyState::Automata(a) => a.update(own, reward),
            PolicyState::Random => {}
        }
    }
}

/// Fair coin between the two actions.
pub fn random_select<R: Rng + ?Sized>(rng: &mut R) -> Action {
    Action::random(rng)
}

/// Index of the largest value; exact ties are broken uniformly at random.
/// Draws from `rng` only when there is a tie.
pub fn argmax_uniform_tie<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == max).count();
    if ties <= 1 {
        return values.iter().position(|&v| v == max).unwrap_or(0);
    }
    let pick = rng.random_range(0..ties);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == max)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("tie index in range")
}
