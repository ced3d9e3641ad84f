//! Textual policy specifications: `name` or `name(key=value,...)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::adaptive::AdaptiveState;
use super::automata::{AutomataForm, AutomataState};
use super::qlearn::{QState, QVariant};
use super::rotherev::RothErevState;
use super::strategy::{LearningRate, ScoredStrategySet, Scoring, StrategyTable};
use super::wsls::WslsState;
use super::PolicyState;
use crate::error::{Error, Result};
use crate::game::MAX_MEMORY;

pub const DEFAULT_STRATEGIES: usize = 2;
pub const DEFAULT_MEMORY: u32 = 3;

/// A learning rule together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Seminal {
        strategies: usize,
        memory: u32,
        scoring: Scoring,
    },
    Exponential {
        strategies: usize,
        memory: u32,
        learning_rate: LearningRate,
        scoring: Scoring,
    },
    QAction {
        step_size: f64,
        exploration: f64,
    },
    QStrategy {
        strategies: usize,
        memory: u32,
        step_size: f64,
        exploration: f64,
    },
    Adaptive {
        a_plus: f64,
        a_minus: f64,
        initial_attitude: f64,
        window: Option<usize>,
    },
    Wsls {
        shift_probability: f64,
    },
    RothErev {
        discount: f64,
        initial_weight: f64,
    },
    Automata {
        reward_rate: f64,
        penalty_rate: f64,
        form: AutomataForm,
    },
    Random,
}

/// Rule names accepted by the parser.
pub const POLICY_NAMES: [&str; 9] = [
    "seminal",
    "exponential",
    "qlearn-action",
    "qlearn-strategy",
    "adaptive",
    "wsls",
    "rotherev",
    "automata",
    "random",
];

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Seminal { .. } => "seminal",
            PolicySpec::Exponential { .. } => "exponential",
            PolicySpec::QAction { .. } => "qlearn-action",
            PolicySpec::QStrategy { .. } => "qlearn-strategy",
            PolicySpec::Adaptive { .. } => "adaptive",
            PolicySpec::Wsls { .. } => "wsls",
            PolicySpec::RothErev { .. } => "rotherev",
            PolicySpec::Automata { .. } => "automata",
            PolicySpec::Random => "random",
        }
    }

    /// The standard parameterization.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "seminal" => PolicySpec::Seminal {
                strategies: DEFAULT_STRATEGIES,
                memory: DEFAULT_MEMORY,
                scoring: Scoring::PlusOne,
            },
            "exponential" => PolicySpec::Exponential {
                strategies: DEFAULT_STRATEGIES,
                memory: DEFAULT_MEMORY,
                learning_rate: LearningRate::Finite(100.0),
                scoring: Scoring::PlusOne,
            },
            "qlearn-action" => PolicySpec::QAction {
                step_size: 0.1,
                exploration: 0.01,
            },
            "qlearn-strategy" => PolicySpec::QStrategy {
                strategies: DEFAULT_STRATEGIES,
                memory: DEFAULT_MEMORY,
                step_size: 0.1,
                exploration: 0.01,
            },
            "adaptive" => PolicySpec::Adaptive {
                a_plus: 0.5,
                a_minus: 0.5,
                initial_attitude: 0.5,
                window: None,
            },
            "wsls" => PolicySpec::Wsls {
                shift_probability: 0.005,
            },
            "rotherev" => PolicySpec::RothErev {
                discount: 0.2,
                initial_weight: 1.0,
            },
            "automata" => PolicySpec::Automata {
                reward_rate: 0.2,
                penalty_rate: 0.3,
                form: AutomataForm::Verbatim,
            },
            "random" => PolicySpec::Random,
            other => return Err(Error::UnknownPolicy(other.to_string())),
        })
    }

    /// History length the rule conditions on; `None` for memoryless rules.
    pub fn memory(&self) -> Option<u32> {
        match self {
            PolicySpec::Seminal { memory, .. }
            | PolicySpec::Exponential { memory, .. }
            | PolicySpec::QStrategy { memory, .. } => Some(*memory),
            _ => None,
        }
    }

    pub fn is_memoryless(&self) -> bool {
        self.memory().is_none()
    }

    /// Same rule with memory size `s`; memoryless rules are returned as is.
    pub fn with_memory(&self, s: u32) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            PolicySpec::Seminal { memory, .. }
            | PolicySpec::Exponential { memory, .. }
            | PolicySpec::QStrategy { memory, .. } => *memory = s,
            _ => {}
        }
        spec
    }

    /// Checks every parameter range without building any state.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::PolicyParam {
            policy: self.name().to_string(),
            message,
        };
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(fail(format!("{name}={v} outside [0, 1]")))
            }
        };
        if let Some(s) = self.memory() {
            if s == 0 || s > MAX_MEMORY {
                return Err(fail(format!("s={s} outside 1..={MAX_MEMORY}")));
            }
        }
        match *self {
            PolicySpec::Seminal { strategies, .. }
            | PolicySpec::Exponential { strategies, .. }
            | PolicySpec::QStrategy { strategies, .. }
                if strategies < 2 =>
            {
                return Err(fail(format!("S={strategies} must be at least 2")));
            }
            _ => {}
        }
        match *self {
            PolicySpec::Exponential {
                learning_rate: LearningRate::Finite(g),
                ..
            } if !(g >= 0.0 && g.is_finite()) => Err(fail(format!("gamma={g} must be >= 0"))),
            PolicySpec::QAction {
                step_size,
                exploration,
            }
            | PolicySpec::QStrategy {
                step_size,
                exploration,
                ..
            } => {
                if !(step_size > 0.0 && step_size <= 1.0) {
                    Err(fail(format!("gamma={step_size} outside (0, 1]")))
                } else if !(0.0..1.0).contains(&exploration) {
                    Err(fail(format!("eps={exploration} outside [0, 1)")))
                } else {
                    Ok(())
                }
            }
            PolicySpec::Adaptive {
                a_plus,
                a_minus,
                initial_attitude,
                window,
            } => {
                if !(a_plus >= 0.0 && a_plus.is_finite()) {
                    Err(fail(format!("aplus={a_plus} must be finite and >= 0")))
                } else if !(a_minus >= 0.0 && a_minus.is_finite()) {
                    Err(fail(format!("aminus={a_minus} must be finite and >= 0")))
                } else if window == Some(0) {
                    Err(fail("window must be at least 1".to_string()))
                } else {
                    unit("x0", initial_attitude)
                }
            }
            PolicySpec::Wsls { shift_probability } => unit("p", shift_probability),
            PolicySpec::RothErev {
                discount,
                initial_weight,
            } => {
                if !(initial_weight > 0.0 && initial_weight.is_finite()) {
                    Err(fail(format!("w0={initial_weight} must be positive")))
                } else {
                    unit("lambda", discount)
                }
            }
            PolicySpec::Automata {
                reward_rate,
                penalty_rate,
                ..
            } => unit("gamma", reward_rate).and_then(|_| unit("delta", penalty_rate)),
            _ => Ok(()),
        }
    }

    /// Fresh learner state; strategy tables are drawn from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PolicyState> {
        self.validate()?;
        Ok(match *self {
            PolicySpec::Seminal {
                strategies,
                memory,
                scoring,
            } => PolicyState::Seminal(ScoredStrategySet::generate(
                strategies,
                memory,
                LearningRate::Infinite,
                scoring,
                rng,
            )?),
            PolicySpec::Exponential {
                strategies,
                memory,
                learning_rate,
                scoring,
            } => PolicyState::Exponential(ScoredStrategySet::generate(
                strategies,
                memory,
                learning_rate,
                scoring,
                rng,
            )?),
            PolicySpec::QAction {
                step_size,
                exploration,
            } => {
                PolicyState::QLearning(QState::new(QVariant::ActionBased, step_size, exploration)?)
            }
            PolicySpec::QStrategy {
                strategies,
                memory,
                step_size,
                exploration,
            } => {
                let tables = (0..strategies)
                    .map(|_| StrategyTable::generate(memory, rng))
                    .collect::<Result<Vec<_>>>()?;
                PolicyState::QLearning(QState::new(
                    QVariant::StrategyBased(tables),
                    step_size,
                    exploration,
                )?)
            }
            PolicySpec::Adaptive {
                a_plus,
                a_minus,
                initial_attitude,
                window,
            } => PolicyState::Adaptive(AdaptiveState::new(
                a_plus,
                a_minus,
                initial_attitude,
                window,
            )?),
            PolicySpec::Wsls { shift_probability } => {
                PolicyState::Wsls(WslsState::new(shift_probability)?)
            }
            PolicySpec::RothErev {
                discount,
                initial_weight,
            } => PolicyState::RothErev(RothErevState::new(discount, initial_weight)?),
            PolicySpec::Automata {
                reward_rate,
                penalty_rate,
                form,
            } => PolicyState::Automata(AutomataState::new(reward_rate, penalty_rate, form)?),
            PolicySpec::Random => PolicyState::Random,
        })
    }

    fn set_param(&mut self, key: &str, value: &str) -> Result<()> {
        let policy = self.name();
        let bad = |message: String| Error::PolicyParam {
            policy: policy.to_string(),
            message,
        };
        let real = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("{key}: expected a number, got `{v}`")))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| bad(format!("{key}: expected a non-negative integer, got `{v}`")))
        };
        let memory_value = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| bad(format!("{key}: expected a non-negative integer, got `{v}`")))
        };
        let unknown = || bad(format!("unknown parameter `{key}`"));

        match self {
            PolicySpec::Seminal {
                strategies,
                memory,
                scoring,
            } => match key {
                "S" => *strategies = count(value)?,
                "s" => *memory = memory_value(value)?,
                "scoring" => {
                    *scoring = parse_scoring(value)
                        .ok_or_else(|| bad(format!("scoring: unknown value `{value}`")))?
                }
                _ => return Err(unknown()),
            },
            PolicySpec::Exponential {
                strategies,
                memory,
                learning_rate,
                scoring,
            } => match key {
                "S" => *strategies = count(value)?,
                "s" => *memory = memory_value(value)?,
                "gamma" => {
                    *learning_rate = match value {
                        "inf" | "infinity" => LearningRate::Infinite,
                        v => LearningRate::Finite(real(v)?),
                    }
                }
                "scoring" => {
                    *scoring = parse_scoring(value)
                        .ok_or_else(|| bad(format!("scoring: unknown value `{value}`")))?
                }
                _ => return Err(unknown()),
            },
            PolicySpec::QAction {
                step_size,
                exploration,
            } => match key {
                "gamma" => *step_size = real(value)?,
                "eps" => *exploration = real(value)?,
                _ => return Err(unknown()),
            },
            PolicySpec::QStrategy {
                strategies,
                memory,
                step_size,
                exploration,
            } => match key {
                "S" => *strategies = count(value)?,
                "s" => *memory = memory_value(value)?,
                "gamma" => *step_size = real(value)?,
                "eps" => *exploration = real(value)?,
                _ => return Err(unknown()),
            },
            PolicySpec::Adaptive {
                a_plus,
                a_minus,
                initial_attitude,
                window,
            } => match key {
                "aplus" => *a_plus = real(value)?,
                "aminus" => *a_minus = real(value)?,
                "x0" => *initial_attitude = real(value)?,
                "window" => {
                    *window = match value {
                        "all" | "cumulative" => None,
                        v => Some(count(v)?),
                    }
                }
                _ => return Err(unknown()),
            },
            PolicySpec::Wsls { shift_probability } => match key {
                "p" => *shift_probability = real(value)?,
                _ => return Err(unknown()),
            },
            PolicySpec::RothErev {
                discount,
                initial_weight,
            } => match key {
                "lambda" => *discount = real(value)?,
                "w0" => *initial_weight = real(value)?,
                _ => return Err(unknown()),
            },
            PolicySpec::Automata {
                reward_rate,
                penalty_rate,
                form,
            } => match key {
                "gamma" => *reward_rate = real(value)?,
                "delta" => *penalty_rate = real(value)?,
                "form" | "automata_form" => {
                    *form = match value {
                        "verbatim" => AutomataForm::Verbatim,
                        "standard" => AutomataForm::Standard,
                        v => return Err(bad(format!("form: unknown value `{v}`"))),
                    }
                }
                _ => return Err(unknown()),
            },
            PolicySpec::Random => return Err(unknown()),
        }
        Ok(())
    }
}

fn parse_scoring(v: &str) -> Option<Scoring> {
    match v {
        "plus-one" => Some(Scoring::PlusOne),
        "plus-minus" => Some(Scoring::PlusMinus),
        _ => None,
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let malformed = |why: &str| Error::PolicyParam {
            policy: text.to_string(),
            message: why.to_string(),
        };
        let (name, params) = match text.find('(') {
            None => (text, None),
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| malformed("missing closing parenthesis"))?;
                (text[..open].trim_end(), Some(inner))
            }
        };
        if name.is_empty() {
            return Err(malformed("missing policy name"));
        }
        let mut spec = PolicySpec::default_for(name)?;
        let mut seen: Vec<&str> = Vec::new();
        if let Some(params) = params.filter(|p| !p.trim().is_empty()) {
            for item in params.split(',') {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| malformed("parameters must look like key=value"))?;
                let (key, value) = (key.trim(), value.trim());
                if key.is_empty() || value.is_empty() {
                    return Err(malformed("parameters must look like key=value"));
                }
                if seen.contains(&key) {
                    return Err(Error::PolicyParam {
                        policy: name.to_string(),
                        message: format!("duplicate parameter `{key}`"),
                    });
                }
                seen.push(key);
                spec.set_param(key, value)?;
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Canonical form listing every parameter; parses back to the same spec.
impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Seminal {
                strategies,
                memory,
                scoring,
            } => write!(
                f,
                "seminal(S={strategies},s={memory},scoring={})",
                scoring.name()
            ),
            PolicySpec::Exponential {
                strategies,
                memory,
                learning_rate,
                scoring,
            } => write!(
                f,
                "exponential(S={strategies},s={memory},gamma={learning_rate},scoring={})",
                scoring.name()
            ),
            PolicySpec::QAction {
                step_size,
                exploration,
            } => write!(f, "qlearn-action(gamma={step_size},eps={exploration})"),
            PolicySpec::QStrategy {
                strategies,
                memory,
                step_size,
                exploration,
            } => write!(
                f,
                "qlearn-strategy(S={strategies},s={memory},gamma={step_size},eps={exploration})"
            ),
            PolicySpec::Adaptive {
                a_plus,
                a_minus,
                initial_attitude,
                window,
            } => {
                write!(
                    f,
                    "adaptive(aplus={a_plus},aminus={a_minus},x0={initial_attitude},window="
                )?;
                match window {
                    Some(w) => write!(f, "{w})"),
                    None => f.write_str("all)"),
                }
            }
            PolicySpec::Wsls { shift_probability } => write!(f, "wsls(p={shift_probability})"),
            PolicySpec::RothErev {
                discount,
                initial_weight,
            } => write!(f, "rotherev(lambda={discount},w0={initial_weight})"),
            PolicySpec::Automata {
                reward_rate,
                penalty_rate,
                form,
            } => write!(
                f,
                "automata(gamma={reward_rate},delta={penalty_rate},form={})",
                form.name()
            ),
            PolicySpec::Random => f.write_str("random"),
        }
    }
}
