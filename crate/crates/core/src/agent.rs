//! Actor-critic learner.
//!
//! The actor maps an observation to one logit per action and acts through a
//! softmax. The critic estimates the state value. After every transition the
//! TD error `δ = r + γ·V(s') − V(s)` drives both networks: the critic regresses
//! `V(s)` toward the bootstrapped target (held fixed, semi-gradient TD(0)) and
//! the actor moves the logit of the action it took toward `logit + δ`.
//!
//! Both updates go through an [`UpdateRule`], which is where pseudorehearsal
//! plugs in.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::Action;
use crate::net::{Network, TrainExample};
use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AgentConfig {
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Hidden layer widths of the actor. Input width comes from the
    /// observation mode, output width is one logit per action.
    pub actor_hidden: Vec<usize>,
    /// Hidden layer widths of the critic. Output width is 1.
    pub critic_hidden: Vec<usize>,
    pub temperature: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.95,
            actor_lr: 0.01,
            critic_lr: 0.01,
            actor_hidden: vec![16],
            critic_hidden: vec![16],
            temperature: 1.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma", "must lie in (0, 1]"));
        }
        for (key, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("temperature", self.temperature),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, "must be finite and > 0"));
            }
        }
        if self.actor_hidden.contains(&0) {
            return Err(Error::config(
                "actor_hidden",
                "hidden layers need at least one unit",
            ));
        }
        if self.critic_hidden.contains(&0) {
            return Err(Error::config(
                "critic_hidden",
                "hidden layers need at least one unit",
            ));
        }
        Ok(())
    }

    pub fn actor_sizes(&self, input: usize) -> Vec<usize> {
        sizes(input, &self.actor_hidden, Action::ALL.len())
    }

    pub fn critic_sizes(&self, input: usize) -> Vec<usize> {
        sizes(input, &self.critic_hidden, 1)
    }
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = Vec::with_capacity(hidden.len() + 2);
    s.push(input);
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

/// One environment transition as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    /// `None` iff the transition ended the episode.
    pub next_observation: Option<Vec<f64>>,
}

impl Transition {
    pub fn is_terminal(&self) -> bool {
        self.next_observation.is_none()
    }
}

/// Which of the two networks an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Actor,
    Critic,
}

/// Applies one learning update to a network.
pub trait UpdateRule {
    fn update(
        &mut self,
        role: Role,
        net: &mut Network,
        example: &TrainExample,
        learning_rate: f64,
    ) -> Result<()>;
}

/// A single gradient step on the example alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainUpdate;

impl UpdateRule for PlainUpdate {
    fn update(
        &mut self,
        _role: Role,
        net: &mut Network,
        example: &TrainExample,
        learning_rate: f64,
    ) -> Result<()> {
        net.train_batch(core::slice::from_ref(example), learning_rate)
    }
}

fn check_actor(actor: &Network) -> Result<()> {
    if actor.output_len() != Action::ALL.len() {
        return Err(Error::Shape {
            context: "actor output",
            expected: Action::ALL.len(),
            actual: actor.output_len(),
        });
    }
    Ok(())
}

fn check_critic(critic: &Network) -> Result<()> {
    if critic.output_len() != 1 {
        return Err(Error::Shape {
            context: "critic output",
            expected: 1,
            actual: critic.output_len(),
        });
    }
    Ok(())
}

/// Softmax over two logits at the given temperature.
pub fn softmax_pair(logits: [f64; 2], temperature: f64) -> [f64; 2] {
    let a = logits[0] / temperature;
    let b = logits[1] / temperature;
    let m = if a > b { a } else { b };
    let ea = libm::exp(a - m);
    let eb = libm::exp(b - m);
    let z = ea + eb;
    [ea / z, eb / z]
}

/// Action probabilities `(push_left, push_right)` at `obs`.
pub fn policy_probs(actor: &Network, obs: &[f64], temperature: f64) -> Result<[f64; 2]> {
    check_actor(actor)?;
    let z = actor.output(obs)?;
    let p = softmax_pair([z[0], z[1]], temperature);
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::Numeric("policy produced non-finite probabilities"));
    }
    Ok(p)
}

/// Inverse-CDF draw: `push_left` iff `u < p_left` for `u` uniform on `[0, 1)`.
pub fn sample_action(probs: [f64; 2], rng: &mut Stream) -> Action {
    if rng::unit(rng) < probs[0] {
        Action::PushLeft
    } else {
        Action::PushRight
    }
}

/// Critic value of one observation.
pub fn value(critic: &Network, obs: &[f64]) -> Result<f64> {
    check_critic(critic)?;
    Ok(critic.output(obs)?[0])
}

/// Bootstrapped critic target `r + γ·V(s')`, with `V(s') = 0` at termination.
pub fn td_target(critic: &Network, t: &Transition, gamma: f64) -> Result<f64> {
    let next = match &t.next_observation {
        Some(next) => value(critic, next)?,
        None => 0.0,
    };
    Ok(t.reward + gamma * next)
}

/// `δ = r + γ·V(s') − V(s)`.
pub fn td_error(critic: &Network, t: &Transition, gamma: f64) -> Result<f64> {
    let target = td_target(critic, t, gamma)?;
    Ok(target - value(critic, &t.observation)?)
}

/// One TD(0) update of both networks. Returns the TD error computed before
/// either network changed.
///
/// With plain updates and `δ > 0` the probability of the taken action at
/// `t.observation` rises (falls for `δ < 0`) as long as the actor step stays
/// in the linear regime; the learning rate bound this implies is well above
/// the `0.01` default for freshly initialized networks.
pub fn learn_step(
    actor: &mut Network,
    critic: &mut Network,
    t: &Transition,
    cfg: &AgentConfig,
    rule: &mut dyn UpdateRule,
) -> Result<f64> {
    check_actor(actor)?;
    check_critic(critic)?;
    let target = td_target(critic, t, cfg.gamma)?;
    let delta = target - value(critic, &t.observation)?;
    if !delta.is_finite() {
        return Err(Error::Numeric("non-finite TD error"));
    }

    let critic_example = TrainExample::new(t.observation.clone(), vec![target]);
    rule.update(Role::Critic, critic, &critic_example, cfg.critic_lr)?;

    let mut logits = actor.output(&t.observation)?;
    logits[t.action.index()] += delta;
    let actor_example = TrainExample::new(t.observation.clone(), logits);
    rule.update(Role::Actor, actor, &actor_example, cfg.actor_lr)?;

    Ok(delta)
}

/// Actor and critic pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub actor: Network,
    pub critic: Network,
    pub config: AgentConfig,
}

impl Agent {
    /// Fresh networks for an observation of width `input`.
    pub fn new(
        config: AgentConfig,
        input: usize,
        actor_rng: &mut Stream,
        critic_rng: &mut Stream,
    ) -> Result<Self> {
        config.validate()?;
        let actor = Network::random(&config.actor_sizes(input), actor_rng)?;
        let critic = Network::random(&config.critic_sizes(input), critic_rng)?;
        Ok(Agent {
            actor,
            critic,
            config,
        })
    }

    pub fn probs(&self, obs: &[f64]) -> Result<[f64; 2]> {
        policy_probs(&self.actor, obs, self.config.temperature)
    }

    pub fn act(&self, obs: &[f64], rng: &mut Stream) -> Result<Action> {
        Ok(sample_action(self.probs(obs)?, rng))
    }

    pub fn learn(&mut self, t: &Transition, rule: &mut dyn UpdateRule) -> Result<f64> {
        learn_step(&mut self.actor, &mut self.critic, t, &self.config, rule)
    }
}
