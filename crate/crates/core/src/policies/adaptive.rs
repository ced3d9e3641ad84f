//! Adaptive attitude learner.
//!
//! Each action's attractiveness blends the public win-fraction of that action
//! with the agent's private payoff from it, weighted by an attitude that is
//! pushed up after wins and down after losses.

use std::collections::VecDeque;

use rand::Rng;

use super::argmax_uniform_tie;
use crate::error::{Error, Result};
use crate::game::Action;

/// Private utility assumed for an action that has never been played.
pub const INITIAL_UTILITY: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveState {
    attitudes: [f64; 2],
    last_utility: [f64; 2],
    a_plus: f64,
    a_minus: f64,
    /// `None` counts every round played so far.
    window: Option<usize>,
    recent_winners: VecDeque<Action>,
    win_counts: [u64; 2],
}

impl AdaptiveState {
    pub fn new(
        a_plus: f64,
        a_minus: f64,
        initial_attitude: f64,
        window: Option<usize>,
    ) -> Result<Self> {
        if !(a_plus >= 0.0 && a_plus.is_finite() && a_minus >= 0.0 && a_minus.is_finite()) {
            return Err(Error::invalid(
                "attitude increments must be finite and >= 0",
            ));
        }
        if !(0.0..=1.0).contains(&initial_attitude) {
            return Err(Error::invalid(format!(
                "initial attitude {initial_attitude} outside [0, 1]"
            )));
        }
        if window == Some(0) {
            return Err(Error::invalid("win-fraction window must be at least 1"));
        }
        Ok(AdaptiveState {
            attitudes: [initial_attitude; 2],
            last_utility: [INITIAL_UTILITY; 2],
            a_plus,
            a_minus,
            window,
            recent_winners: VecDeque::new(),
            win_counts: [0; 2],
        })
    }

    pub fn attitudes(&self) -> [f64; 2] {
        self.attitudes
    }

    pub fn last_utility(&self) -> [f64; 2] {
        self.last_utility
    }

    /// Fraction of recorded rounds won by `action`; 1/2 before any round.
    pub fn win_fraction(&self, action: Action) -> f64 {
        let total = self.win_counts[0] + self.win_counts[1];
        if total == 0 {
            0.5
        } else {
            self.win_counts[action.index()] as f64 / total as f64
        }
    }

    pub fn attractiveness(&self, action: Action) -> f64 {
        attractiveness(
            self.attitudes[action.index()],
            self.win_fraction(action),
            self.last_utility[action.index()],
        )
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let t = Action::ALL.map(|a| self.attractiveness(a));
        Action::from_index(argmax_uniform_tie(&t, rng))
    }

    pub fn update(&mut self, own: Action, won: bool, utility: f64, winning: Action) {
        let x = &mut self.attitudes[own.index()];
        *x = if won {
            *x + self.a_plus
        } else {
            *x - self.a_minus
        }
        .clamp(0.0, 1.0);
        self.last_utility[own.index()] = utility;
        self.record_winner(winning);
    }

    fn record_winner(&mut self, winning: Action) {
        self.win_counts[winning.index()] += 1;
        if let Some(w) = self.window {
            self.recent_winners.push_back(winning);
            if self.recent_winners.len() > w {
                let dropped = self.recent_winners.pop_front().expect("non-empty");
                self.win_counts[dropped.index()] -= 1;
            }
        }
    }
}

/// `(1 - x) h + x U`.
pub fn attractiveness(attitude: f64, win_fraction: f64, utility: f64) -> f64 {
    (1.0 - attitude) * win_fraction + attitude * utility
}
