//! Roth-Erev reinforcement with discounted action weights.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Action;

/// Below this total weight selection falls back to a fair coin.
pub const ZERO_MASS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RothErevState {
    weights: [f64; 2],
    discount: f64,
    initial_weight: f64,
}

impl RothErevState {
    pub fn new(discount: f64, initial_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&discount) {
            return Err(Error::invalid(format!(
                "discount {discount} outside [0, 1]"
            )));
        }
        if !(initial_weight > 0.0 && initial_weight.is_finite()) {
            return Err(Error::invalid(format!(
                "initial weight {initial_weight} must be positive"
            )));
        }
        Ok(RothErevState {
            weights: [initial_weight; 2],
            discount,
            initial_weight,
        })
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    pub fn initial_weight(&self) -> f64 {
        self.initial_weight
    }

    pub fn set_weights(&mut self, weights: [f64; 2]) -> Result<()> {
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("action weights must be finite and >= 0"));
        }
        self.weights = weights;
        Ok(())
    }

    /// Selection probabilities `q_a / sum(q)`, uniform when the mass vanishes.
    pub fn probabilities(&self) -> [f64; 2] {
        let total = self.weights[0] + self.weights[1];
        if total < ZERO_MASS {
            [0.5, 0.5]
        } else {
            let p0 = self.weights[0] / total;
            [p0, 1.0 - p0]
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let p = self.probabilities();
        Action::from_bit(rng.random::<f64>() >= p[0])
    }

    /// Both weights decay; the played action also collects `utility`.
    pub fn update(&mut self, chosen: Action, utility: f64) {
        for w in &mut self.weights {
            *w *= self.discount;
        }
        self.weights[chosen.index()] += utility;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_formula() {
        let mut s = RothErevState::new(0.2, 1.0).unwrap();
        s.update(Action::Active, 1.0);
        let w = s.weights();
        assert!((w[0] - 0.2).abs() < 1e-15);
        assert!((w[1] - 1.2).abs() < 1e-15);
        let p = s.probabilities();
        assert!((p[0] - 1.0 / 7.0).abs() < 1e-12);
        assert!((p[1] - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_utility_decays_geometrically() {
        let mut s = RothErevState::new(0.5, 1.0).unwrap();
        for k in 1..=10 {
            s.update(Action::Inactive, 0.0);
            assert_eq!(s.weights(), [0.5f64.powi(k); 2]);
        }
    }

    #[test]
    fn undiscounted_wins_accumulate() {
        let mut s = RothErevState::new(1.0, 1.0).unwrap();
        for k in 1..=5 {
            s.update(Action::Inactive, 1.0);
            assert_eq!(s.weights()[0], 1.0 + k as f64);
        }
    }

    #[test]
    fn degenerate_mass_is_uniform() {
        let mut s = RothErevState::new(0.2, 1.0).unwrap();
        s.set_weights([0.0, 0.0]).unwrap();
        assert_eq!(s.probabilities(), [0.5, 0.5]);
        s.set_weights([1.0, 1.0]).unwrap();
        assert_eq!(s.probabilities(), [0.5, 0.5]);
    }
}
