//! Two-action learning automaton with reward and penalty rates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Action;

/// Which penalty term is applied to the action that was not played.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AutomataForm {
    /// `δ(1 − U)(½ − p)`, followed by renormalization (a loss leaves the raw
    /// vector summing to `1 − δ/2`).
    #[default]
    Verbatim,
    /// The mass-conserving linear reward-penalty term `δ(1 − U)(1 − p)`.
    Standard,
}

impl AutomataForm {
    pub fn name(self) -> &'static str {
        match self {
            AutomataForm::Verbatim => "verbatim",
            AutomataForm::Standard => "standard",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutomataState {
    probabilities: [f64; 2],
    reward_rate: f64,
    penalty_rate: f64,
    form: AutomataForm,
}

impl AutomataState {
    pub fn new(reward_rate: f64, penalty_rate: f64, form: AutomataForm) -> Result<Self> {
        for (name, v) in [("reward rate", reward_rate), ("penalty rate", penalty_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(AutomataState {
            probabilities: [0.5, 0.5],
            reward_rate,
            penalty_rate,
            form,
        })
    }

    pub fn probabilities(&self) -> [f64; 2] {
        self.probabilities
    }

    pub fn set_probabilities(&mut self, p: [f64; 2]) -> Result<()> {
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p[0] + p[1] - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "probabilities must lie in [0, 1] and sum to 1",
            ));
        }
        self.probabilities = p;
        Ok(())
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        Action::from_bit(rng.random::<f64>() >= self.probabilities[0])
    }

    /// Update without the final normalization.
    pub fn raw_update(&self, chosen: Action, utility: f64) -> [f64; 2] {
        let (g, d) = (self.reward_rate, self.penalty_rate);
        let target = match self.form {
            AutomataForm::Verbatim => 0.5,
            AutomataForm::Standard => 1.0,
        };
        let mut next = self.probabilities;
        for a in Action::ALL {
            let p = self.probabilities[a.index()];
            next[a.index()] = if a == chosen {
                p + g * utility * (1.0 - p) - d * (1.0 - utility) * p
            } else {
                p - g * utility * p + d * (1.0 - utility) * (target - p)
            };
        }
        next
    }

    pub fn update(&mut self, chosen: Action, utility: f64) {
        self.probabilities = normalize(self.raw_update(chosen, utility));
    }
}

/// Clamps negatives to zero and rescales to unit mass; an all-zero vector
/// becomes uniform.
fn normalize(raw: [f64; 2]) -> [f64; 2] {
    let clamped = raw.map(|p| if p.is_finite() { p.max(0.0) } else { 0.0 });
    let total = clamped[0] + clamped[1];
    if total <= 0.0 {
        return [0.5, 0.5];
    }
    let p0 = (clamped[0] / total).min(1.0);
    [p0, 1.0 - p0]
}
