//! Strategy-table learners: the classic inductive scheme (play the best
//! scoring table) and its softmax relaxation (exponential learning).

use std::fmt;

use rand::Rng;

use super::argmax_uniform_tie;
use crate::error::{Error, Result};
use crate::game::{Action, WinHistory, MAX_MEMORY};

/// Maps each of the `2^s` possible recent-winner strings to an action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTable {
    memory: u32,
    entries: Vec<Action>,
}

impl StrategyTable {
    /// Draws a table with i.i.d. uniform entries.
    pub fn generate<R: Rng + ?Sized>(memory: u32, rng: &mut R) -> Result<Self> {
        if memory == 0 || memory > MAX_MEMORY {
            return Err(Error::invalid(format!(
                "memory size {memory} outside 1..={MAX_MEMORY}"
            )));
        }
        let entries = (0..1usize << memory).map(|_| Action::random(rng)).collect();
        Ok(StrategyTable { memory, entries })
    }

    pub fn from_entries(entries: Vec<Action>) -> Result<Self> {
        let n = entries.len();
        if n < 2 || !n.is_power_of_two() || n.trailing_zeros() > MAX_MEMORY {
            return Err(Error::invalid(format!(
                "strategy table needs 2^s entries with 1 <= s <= {MAX_MEMORY}, got {n}"
            )));
        }
        Ok(StrategyTable {
            memory: n.trailing_zeros(),
            entries,
        })
    }

    pub fn memory(&self) -> u32 {
        self.memory
    }

    pub fn entries(&self) -> &[Action] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Action prescribed for history key `key` (see [`WinHistory::key`]).
    pub fn action(&self, key: usize) -> Action {
        self.entries[key]
    }
}

/// Inverse temperature of the softmax over strategy scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearningRate {
    Finite(f64),
    /// Always play a top-scoring strategy.
    Infinite,
}

impl fmt::Display for LearningRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearningRate::Finite(g) => write!(f, "{g}"),
            LearningRate::Infinite => f.write_str("inf"),
        }
    }
}

/// How virtual points are awarded after each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scoring {
    /// +1 for predicting the winner, nothing otherwise.
    #[default]
    PlusOne,
    /// +1 for predicting the winner, -1 otherwise.
    PlusMinus,
}

impl Scoring {
    pub fn name(self) -> &'static str {
        match self {
            Scoring::PlusOne => "plus-one",
            Scoring::PlusMinus => "plus-minus",
        }
    }
}

/// An agent's strategy tables with their running virtual scores.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredStrategySet {
    strategies: Vec<StrategyTable>,
    scores: Vec<f64>,
    learning_rate: LearningRate,
    scoring: Scoring,
}

impl ScoredStrategySet {
    pub fn new(
        strategies: Vec<StrategyTable>,
        learning_rate: LearningRate,
        scoring: Scoring,
    ) -> Result<Self> {
        if strategies.len() < 2 {
            return Err(Error::invalid("at least two strategies are required"));
        }
        if strategies
            .iter()
            .any(|t| t.memory() != strategies[0].memory())
        {
            return Err(Error::invalid("strategy tables must share one memory size"));
        }
        if let LearningRate::Finite(g) = learning_rate {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("learning rate {g} must be >= 0")));
            }
        }
        let scores = vec![0.0; strategies.len()];
        Ok(ScoredStrategySet {
            strategies,
            scores,
            learning_rate,
            scoring,
        })
    }

    /// Draws `count` independent tables of memory `memory`.
    pub fn generate<R: Rng + ?Sized>(
        count: usize,
        memory: u32,
        learning_rate: LearningRate,
        scoring: Scoring,
        rng: &mut R,
    ) -> Result<Self> {
        let tables = (0..count)
            .map(|_| StrategyTable::generate(memory, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tables, learning_rate, scoring)
    }

    pub fn memory(&self) -> u32 {
        self.strategies[0].memory()
    }

    pub fn strategies(&self) -> &[StrategyTable] {
        &self.strategies
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn learning_rate(&self) -> LearningRate {
        self.learning_rate
    }

    pub fn set_scores(&mut self, scores: &[f64]) -> Result<()> {
        if scores.len() != self.scores.len() || scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid(
                "score vector must be finite and match the strategy count",
            ));
        }
        self.scores.copy_from_slice(scores);
        Ok(())
    }

    fn key(&self, history: &WinHistory) -> usize {
        history
            .key(self.memory())
            .expect("history shorter than strategy memory")
    }

    /// Index of a top-scoring strategy, ties broken uniformly.
    pub fn best_strategy<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        argmax_uniform_tie(&self.scores, rng)
    }

    /// Softmax selection probabilities over strategies.
    ///
    /// With an infinite rate the mass is spread evenly over the top scorers.
    pub fn strategy_probabilities(&self) -> Vec<f64> {
        let max = self
            .scores
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = match self.learning_rate {
            LearningRate::Finite(g) => self.scores.iter().map(|v| (g * (v - max)).exp()).collect(),
            LearningRate::Infinite => self
                .scores
                .iter()
                .map(|&v| if v == max { 1.0 } else { 0.0 })
                .collect(),
        };
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Samples a strategy index from the softmax of the scores.
    pub fn sample_strategy<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let gamma = match self.learning_rate {
            LearningRate::Infinite => return self.best_strategy(rng),
            LearningRate::Finite(g) => g,
        };
        let max = self
            .scores
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self
            .scores
            .iter()
            .map(|v| (gamma * (v - max)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        // Rounding left u marginally above the last weight.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    /// Plays the action of a top-scoring strategy.
    pub fn seminal_select<R: Rng + ?Sized>(&self, history: &WinHistory, rng: &mut R) -> Action {
        let key = self.key(history);
        self.strategies[self.best_strategy(rng)].action(key)
    }

    /// Plays the action of a softmax-sampled strategy. Identical to
    /// [`Self::seminal_select`] when the learning rate is infinite.
    pub fn exponential_select<R: Rng + ?Sized>(&self, history: &WinHistory, rng: &mut R) -> Action {
        let key = self.key(history);
        self.strategies[self.sample_strategy(rng)].action(key)
    }

    /// Scores every strategy against the winner of the round played at
    /// `history` (the history before the winner is appended).
    pub fn update(&mut self, history: &WinHistory, winning: Action) {
        let key = self.key(history);
        for (table, score) in self.strategies.iter().zip(self.scores.iter_mut()) {
            if table.action(key) == winning {
                *score += 1.0;
            } else if self.scoring == Scoring::PlusMinus {
                *score -= 1.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(bits: &[u8]) -> StrategyTable {
        StrategyTable::from_entries(bits.iter().map(|&b| Action::from_bit(b == 1)).collect())
            .unwrap()
    }

    fn history(winners: &[u8], capacity: u32) -> WinHistory {
        let mut h = WinHistory::new(capacity).unwrap();
        for &w in winners {
            h.push(Action::from_bit(w == 1));
        }
        h
    }

    #[test]
    fn table_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(StrategyTable::generate(1, &mut rng).unwrap().len(), 2);
        assert_eq!(StrategyTable::generate(3, &mut rng).unwrap().len(), 8);
        assert!(StrategyTable::generate(0, &mut rng).is_err());
        assert!(StrategyTable::generate(17, &mut rng).is_err());
    }

    #[test]
    fn table_entries_are_fair_coins() {
        // Chi-square on the active count over 10^4 tables of memory 3
        // (8 * 10^4 entries), one degree of freedom.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut active = 0usize;
        let draws = 10_000;
        for _ in 0..draws {
            let t = StrategyTable::generate(3, &mut rng).unwrap();
            active += t.entries().iter().filter(|&&a| a == Action::Active).count();
        }
        let n = (draws * 8) as f64;
        let expected = n / 2.0;
        let chi2 = 2.0 * (active as f64 - expected).powi(2) / expected;
        // 99.9% quantile of chi-square(1).
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn split_streams_give_different_tables() {
        let mut a = crate::rng::agent_rng(5, 0);
        let mut b = crate::rng::agent_rng(5, 1);
        let ta = StrategyTable::generate(6, &mut a).unwrap();
        let tb = StrategyTable::generate(6, &mut b).unwrap();
        assert_ne!(ta, tb);
    }

    #[test]
    fn seminal_plays_argmax() {
        let mut set = ScoredStrategySet::new(
            vec![table(&[1, 0]), table(&[0, 1])],
            LearningRate::Infinite,
            Scoring::PlusOne,
        )
        .unwrap();
        set.set_scores(&[5.0, 3.0]).unwrap();
        let h = history(&[1], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(set.seminal_select(&h, &mut rng), Action::Inactive);
        }
    }

    #[test]
    fn seminal_tie_is_a_coin_flip() {
        let set = ScoredStrategySet::new(
            vec![table(&[1, 1]), table(&[0, 0])],
            LearningRate::Infinite,
            Scoring::PlusOne,
        )
        .unwrap();
        let h = history(&[0], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20_000;
        let active = (0..n)
            .filter(|_| set.seminal_select(&h, &mut rng) == Action::Active)
            .count() as f64;
        let sd = (n as f64 * 0.25).sqrt();
        assert!((active - n as f64 / 2.0).abs() < 4.0 * sd);
    }

    #[test]
    fn infinite_rate_matches_seminal_draw_for_draw() {
        let mut set = ScoredStrategySet::generate(
            4,
            3,
            LearningRate::Infinite,
            Scoring::PlusOne,
            &mut ChaCha8Rng::seed_from_u64(4),
        )
        .unwrap();
        set.set_scores(&[2.0, 7.0, 7.0, 1.0]).unwrap();
        let h = history(&[1, 0, 1], 3);
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            assert_eq!(
                set.seminal_select(&h, &mut r1),
                set.exponential_select(&h, &mut r2)
            );
        }
    }

    #[test]
    fn softmax_probabilities() {
        let mk = |g: f64, scores: &[f64]| {
            let mut set = ScoredStrategySet::new(
                vec![table(&[0, 1]), table(&[1, 0])],
                LearningRate::Finite(g),
                Scoring::PlusOne,
            )
            .unwrap();
            set.set_scores(scores).unwrap();
            set.strategy_probabilities()
        };
        assert_eq!(mk(3.0, &[4.0, 4.0]), vec![0.5, 0.5]);
        assert_eq!(mk(0.0, &[9.0, 1.0]), vec![0.5, 0.5]);
        let p = mk(100.0, &[1.0, 0.0]);
        let tail = (-100.0f64).exp();
        assert!((p[0] - 1.0 / (1.0 + tail)).abs() < 1e-15);
        assert!((p[1] / (tail / (1.0 + tail)) - 1.0).abs() < 1e-12);
        assert!((p[1] - 3.72e-44).abs() < 0.01e-44);
        // Large scores must not overflow.
        let p = mk(100.0, &[1e6, 1e6 - 1.0]);
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn scoring_rewards_correct_predictions_only() {
        let mut set = ScoredStrategySet::new(
            vec![table(&[1, 1]), table(&[0, 1]), table(&[1, 0])],
            LearningRate::Infinite,
            Scoring::PlusOne,
        )
        .unwrap();
        let h = history(&[1], 1);
        set.update(&h, Action::Active);
        assert_eq!(set.scores(), &[1.0, 1.0, 0.0]);
        set.update(&h, Action::Inactive);
        assert_eq!(set.scores(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn plus_minus_scoring() {
        let mut set = ScoredStrategySet::new(
            vec![table(&[1, 1]), table(&[0, 0])],
            LearningRate::Infinite,
            Scoring::PlusMinus,
        )
        .unwrap();
        set.update(&history(&[0], 1), Action::Active);
        assert_eq!(set.scores(), &[1.0, -1.0]);
    }

    #[test]
    fn scores_bounded_by_round_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut set =
            ScoredStrategySet::generate(3, 4, LearningRate::Infinite, Scoring::PlusOne, &mut rng)
                .unwrap();
        let mut h = WinHistory::random(4, &mut rng).unwrap();
        for t in 1..=500 {
            let w = Action::random(&mut rng);
            set.update(&h, w);
            h.push(w);
            assert!(set.scores().iter().all(|&s| s <= t as f64 && s >= 0.0));
        }
    }
}
