//! ε-greedy Q-learning over either the two actions or a set of strategy
//! tables.

use rand::Rng;

use super::argmax_uniform_tie;
use super::strategy::StrategyTable;
use crate::error::{Error, Result};
use crate::game::{Action, WinHistory};

pub const INITIAL_Q: f64 = 0.5;

/// What the Q-values are attached to.
#[derive(Clone, Debug, PartialEq)]
pub enum QVariant {
    /// One value per action; history is ignored.
    ActionBased,
    /// One value per strategy table; the chosen table is read at the history.
    StrategyBased(Vec<StrategyTable>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    variant: QVariant,
    q_values: Vec<f64>,
    step_size: f64,
    exploration: f64,
    last_choice: Option<usize>,
}

impl QState {
    pub fn new(variant: QVariant, step_size: f64, exploration: f64) -> Result<Self> {
        if !(step_size > 0.0 && step_size <= 1.0) {
            return Err(Error::invalid(format!(
                "step size {step_size} outside (0, 1]"
            )));
        }
        if !(0.0..1.0).contains(&exploration) {
            return Err(Error::invalid(format!(
                "exploration {exploration} outside [0, 1)"
            )));
        }
        let n = match &variant {
            QVariant::ActionBased => 2,
            QVariant::StrategyBased(tables) => {
                if tables.len() < 2 {
                    return Err(Error::invalid("at least two strategies are required"));
                }
                tables.len()
            }
        };
        Ok(QState {
            variant,
            q_values: vec![INITIAL_Q; n],
            step_size,
            exploration,
            last_choice: None,
        })
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn set_q_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.q_values.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "Q-values must be finite and match the entry count",
            ));
        }
        self.q_values.copy_from_slice(values);
        Ok(())
    }

    pub fn memory(&self) -> Option<u32> {
        match &self.variant {
            QVariant::ActionBased => None,
            QVariant::StrategyBased(tables) => Some(tables[0].memory()),
        }
    }

    /// ε-greedy choice of an entry index (action or strategy).
    pub fn choose_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if rng.random::<f64>() < self.exploration {
            rng.random_range(0..self.q_values.len())
        } else {
            argmax_uniform_tie(&self.q_values, rng)
        }
    }

    pub fn select<R: Rng + ?Sized>(&mut self, history: &WinHistory, rng: &mut R) -> Action {
        let index = self.choose_index(rng);
        self.last_choice = Some(index);
        match &self.variant {
            QVariant::ActionBased => Action::from_index(index),
            QVariant::StrategyBased(tables) => {
                let key = history
                    .key(tables[index].memory())
                    .expect("history shorter than strategy memory");
                tables[index].action(key)
            }
        }
    }

    /// Moves the chosen entry toward `utility`; the others are untouched.
    pub fn update(&mut self, chosen: usize, utility: f64) {
        let q = &mut self.q_values[chosen];
        *q += self.step_size * (utility - *q);
    }

    /// Applies the update to whatever entry the last `select` chose.
    pub fn observe(&mut self, own: Action, utility: f64) {
        let chosen = match (&self.variant, self.last_choice.take()) {
            (_, Some(i)) => i,
            (QVariant::ActionBased, None) => own.index(),
            (QVariant::StrategyBased(_), None) => return,
        };
        self.update(chosen, utility);
    }
}
