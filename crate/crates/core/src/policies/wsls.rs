//! Win-stay lose-shift.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Action;

#[derive(Clone, Debug, PartialEq)]
pub struct WslsState {
    shift_probability: f64,
    last: Option<(Action, bool)>,
}

impl WslsState {
    pub fn new(shift_probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&shift_probability) {
            return Err(Error::invalid(format!(
                "shift probability {shift_probability} outside [0, 1]"
            )));
        }
        Ok(WslsState {
            shift_probability,
            last: None,
        })
    }

    pub fn shift_probability(&self) -> f64 {
        self.shift_probability
    }

    /// Overrides the remembered previous round.
    pub fn force_last(&mut self, action: Action, won: bool) {
        self.last = Some((action, won));
    }

    /// Repeats after a win; after a loss switches with the shift probability.
    /// Draws no randomness after a win.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self.last {
            None => Action::random(rng),
            Some((action, true)) => action,
            Some((action, false)) => {
                if rng.random::<f64>() < self.shift_probability {
                    action.other()
                } else {
                    action
                }
            }
        }
    }

    pub fn observe(&mut self, own: Action, won: bool) {
        self.last = Some((own, won));
    }
}
