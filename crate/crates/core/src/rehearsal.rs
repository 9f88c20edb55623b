//! Pseudorehearsal.
//!
//! A pseudopattern is a random input pushed through a network together with
//! the activations it produced at every layer. Rehearsing those input/output
//! pairs while learning something new pulls the network back toward the
//! function it computed when the patterns were taken, without storing any
//! real experience.
//!
//! Two strategies are provided:
//!
//! * [`Strategy::Batch`]: every real example is trained in a batch together
//!   with all current pseudopatterns (one real example, `pseudo_count`
//!   pseudo-examples, weight-normalized mean gradient).
//! * [`Strategy::Ortho`]: the real example is trained alone, then each
//!   pseudopattern is rehearsed with weight `(1 − |cos(real, pseudo)|)^k`.
//!   Patterns orthogonal to the new input are rehearsed at full strength;
//!   patterns collinear with it are skipped so rehearsal does not fight the
//!   new update head-on.
//!
//! Pseudo-inputs are drawn uniformly from `[0, 1]` per component, the bounding
//! box of the encoded observation domain. Only final-layer outputs serve as
//! rehearsal targets; the intermediate activations are kept for inspection.

use alloc::vec;
use alloc::vec::Vec;

use crate::agent::{Role, UpdateRule};
use crate::net::{ActivationRecord, Network, TrainExample};
use crate::rng::{self, Stream};
use crate::{Error, Result};

/// How real updates are combined with pseudopatterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    #[default]
    None,
    Batch,
    Ortho,
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Strategy::None),
            "batch" => Ok(Strategy::Batch),
            "ortho" => Ok(Strategy::Ortho),
            _ => Err(Error::config(
                "strategy",
                "expected one of none, batch, ortho",
            )),
        }
    }
}

impl core::fmt::Display for Strategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Strategy::None => "none",
            Strategy::Batch => "batch",
            Strategy::Ortho => "ortho",
        })
    }
}

/// Networks protected by rehearsal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ApplyTo {
    Actor,
    Critic,
    #[default]
    Both,
}

impl ApplyTo {
    pub fn covers(self, role: Role) -> bool {
        matches!(
            (self, role),
            (ApplyTo::Both, _) | (ApplyTo::Actor, Role::Actor) | (ApplyTo::Critic, Role::Critic)
        )
    }
}

impl core::str::FromStr for ApplyTo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "actor" => Ok(ApplyTo::Actor),
            "critic" => Ok(ApplyTo::Critic),
            "both" => Ok(ApplyTo::Both),
            _ => Err(Error::config(
                "apply_to",
                "expected one of actor, critic, both",
            )),
        }
    }
}

impl core::fmt::Display for ApplyTo {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            ApplyTo::Actor => "actor",
            ApplyTo::Critic => "critic",
            ApplyTo::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RehearsalConfig {
    pub strategy: Strategy,
    /// Pseudopatterns kept per protected network.
    pub pseudo_count: usize,
    /// Episodes between regenerations of the pseudopatterns.
    pub reinit_every: u32,
    /// Exponent `k` of the orthogonality weight `(1 − |cos|)^k`.
    pub ortho_exponent: f64,
    pub apply_to: ApplyTo,
}

impl Default for RehearsalConfig {
    fn default() -> Self {
        RehearsalConfig {
            strategy: Strategy::None,
            pseudo_count: 8,
            reinit_every: 10,
            ortho_exponent: 1.0,
            apply_to: ApplyTo::Both,
        }
    }
}

impl RehearsalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reinit_every == 0 {
            return Err(Error::config("reinit_every", "must be >= 1"));
        }
        if !(self.ortho_exponent.is_finite() && self.ortho_exponent >= 0.0) {
            return Err(Error::config("ortho_exponent", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Whether `role` is trained with rehearsal under this configuration.
    pub fn protects(&self, role: Role) -> bool {
        self.strategy != Strategy::None && self.apply_to.covers(role)
    }
}

/// A random input together with what a network made of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudopattern {
    pub input: Vec<f64>,
    pub layer_outputs: ActivationRecord,
    pub final_target: Vec<f64>,
}

impl Pseudopattern {
    pub fn example(&self) -> TrainExample {
        TrainExample::new(self.input.clone(), self.final_target.clone())
    }
}

/// Draw `count` uniform `[0, 1]` inputs and record `net`'s activations on them.
pub fn generate_pseudopatterns(
    net: &Network,
    count: usize,
    rng: &mut Stream,
) -> Vec<Pseudopattern> {
    (0..count)
        .map(|_| {
            let input: Vec<f64> = (0..net.input_len()).map(|_| rng::unit(rng)).collect();
            let (output, record) = net
                .forward(&input)
                .expect("pseudo-input has the network's input width");
            Pseudopattern {
                input,
                layer_outputs: record,
                final_target: output,
            }
        })
        .collect()
}

/// `[real, pseudo_1, …, pseudo_n]` with every pseudo-example at weight 1.
pub fn assemble_batch(real: &TrainExample, patterns: &[Pseudopattern]) -> Vec<TrainExample> {
    let mut batch = Vec::with_capacity(1 + patterns.len());
    batch.push(real.clone());
    batch.extend(patterns.iter().map(Pseudopattern::example));
    batch
}

/// `|cos|` at or above this counts as collinear.
const COLLINEAR: f64 = 1.0 - 1e-12;

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / libm::sqrt(na * nb)).clamp(-1.0, 1.0)
}

/// Rehearsal weight `(1 − |c|)^k`, always in `[0, 1]`.
pub fn ortho_weight(cos: f64, exponent: f64) -> f64 {
    let c = libm::fabs(cos);
    let gap = if c >= COLLINEAR { 0.0 } else { 1.0 - c };
    libm::pow(gap, exponent).clamp(0.0, 1.0)
}

/// Train on `real`, then rehearse each pattern at its orthogonality weight.
pub fn orthogonality_corrected_update(
    net: &mut Network,
    real: &TrainExample,
    patterns: &[Pseudopattern],
    learning_rate: f64,
    exponent: f64,
) -> Result<()> {
    net.train_batch(core::slice::from_ref(real), learning_rate)?;
    for p in patterns {
        let w = ortho_weight(cosine(&real.input, &p.input), exponent);
        if w > 0.0 {
            net.train_example(&p.example().weighted(w), learning_rate)?;
        }
    }
    Ok(())
}

/// Current pseudopatterns of the actor and the critic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RehearsalBuffer {
    pub actor: Vec<Pseudopattern>,
    pub critic: Vec<Pseudopattern>,
    /// Episodes started since the last regeneration.
    pub episodes_since_regen: u32,
}

impl RehearsalBuffer {
    pub fn patterns(&self, role: Role) -> &[Pseudopattern] {
        match role {
            Role::Actor => &self.actor,
            Role::Critic => &self.critic,
        }
    }

    /// Regenerate the protected networks' patterns when `episode_index` is a
    /// multiple of `reinit_every`. Returns whether a regeneration happened.
    pub fn maybe_reinitialize(
        &mut self,
        episode_index: u64,
        cfg: &RehearsalConfig,
        actor: &Network,
        critic: &Network,
        rng: &mut Stream,
    ) -> bool {
        if cfg.strategy == Strategy::None {
            return false;
        }
        if !episode_index.is_multiple_of(u64::from(cfg.reinit_every.max(1))) {
            self.episodes_since_regen += 1;
            return false;
        }
        self.actor = if cfg.apply_to.covers(Role::Actor) {
            generate_pseudopatterns(actor, cfg.pseudo_count, rng)
        } else {
            vec![]
        };
        self.critic = if cfg.apply_to.covers(Role::Critic) {
            generate_pseudopatterns(critic, cfg.pseudo_count, rng)
        } else {
            vec![]
        };
        self.episodes_since_regen = 0;
        true
    }
}

/// [`UpdateRule`] that applies the configured rehearsal strategy.
#[derive(Debug, Clone)]
pub struct Rehearser {
    pub config: RehearsalConfig,
    pub buffer: RehearsalBuffer,
    rng: Stream,
}

impl Rehearser {
    pub fn new(config: RehearsalConfig, rng: Stream) -> Result<Self> {
        config.validate()?;
        Ok(Rehearser {
            config,
            buffer: RehearsalBuffer::default(),
            rng,
        })
    }

    /// Episode-start hook.
    pub fn begin_episode(&mut self, episode_index: u64, actor: &Network, critic: &Network) -> bool {
        self.buffer
            .maybe_reinitialize(episode_index, &self.config, actor, critic, &mut self.rng)
    }
}

impl UpdateRule for Rehearser {
    fn update(
        &mut self,
        role: Role,
        net: &mut Network,
        example: &TrainExample,
        learning_rate: f64,
    ) -> Result<()> {
        let patterns = if self.config.protects(role) {
            self.buffer.patterns(role)
        } else {
            &[]
        };
        match self.config.strategy {
            _ if patterns.is_empty() => {
                net.train_batch(core::slice::from_ref(example), learning_rate)
            }
            Strategy::None => net.train_batch(core::slice::from_ref(example), learning_rate),
            Strategy::Batch => net.train_batch(&assemble_batch(example, patterns), learning_rate),
            Strategy::Ortho => orthogonality_corrected_update(
                net,
                example,
                patterns,
                learning_rate,
                self.config.ortho_exponent,
            ),
        }
    }
}

/// Setup of the isolated forgetting probe used by [`retention_drift`].
///
/// A network learns task A (a fixed set of random inputs with random targets),
/// pseudopatterns are taken, and the network then trains on a disjoint task B
/// for `interfering_steps` single-example updates. The probe reports how far
/// the outputs on task A moved.
#[derive(Debug, Clone, PartialEq)]
pub struct RetentionSetup {
    pub sizes: Vec<usize>,
    pub task_size: usize,
    pub pretrain_steps: usize,
    pub interfering_steps: usize,
    pub learning_rate: f64,
    pub pseudo_count: usize,
}

impl Default for RetentionSetup {
    fn default() -> Self {
        RetentionSetup {
            sizes: vec![6, 16, 1],
            task_size: 8,
            pretrain_steps: 4000,
            interfering_steps: 500,
            learning_rate: 0.05,
            pseudo_count: 8,
        }
    }
}

fn random_task(setup: &RetentionSetup, rng: &mut Stream) -> Vec<TrainExample> {
    let inputs = setup.sizes[0];
    let outputs = setup.sizes[setup.sizes.len() - 1];
    (0..setup.task_size)
        .map(|_| {
            let x = (0..inputs).map(|_| rng::unit(rng)).collect();
            let y = (0..outputs).map(|_| rng::uniform(rng, -0.8, 0.8)).collect();
            TrainExample::new(x, y)
        })
        .collect()
}

/// Mean squared change of task-A outputs caused by training on task B, with
/// task-B updates applied under `strategy`.
pub fn retention_drift(setup: &RetentionSetup, seed: u64, strategy: Strategy) -> Result<f64> {
    let mut data_rng = rng::from_seed(seed);
    let mut net = Network::random(&setup.sizes, &mut data_rng)?;
    let task_a = random_task(setup, &mut data_rng);
    let task_b = random_task(setup, &mut data_rng);

    for i in 0..setup.pretrain_steps {
        net.train_batch(
            core::slice::from_ref(&task_a[i % task_a.len()]),
            setup.learning_rate,
        )?;
    }
    let before: Vec<Vec<f64>> = task_a
        .iter()
        .map(|ex| net.output(&ex.input))
        .collect::<Result<_>>()?;

    let config = RehearsalConfig {
        strategy,
        pseudo_count: setup.pseudo_count,
        ..RehearsalConfig::default()
    };
    let mut rehearser = Rehearser::new(config, rng::from_seed(seed ^ 0x5eed))?;
    rehearser.begin_episode(0, &net, &net);
    for i in 0..setup.interfering_steps {
        rehearser.update(
            Role::Critic,
            &mut net,
            &task_b[i % task_b.len()],
            setup.learning_rate,
        )?;
    }

    let mut total = 0.0;
    let mut n = 0usize;
    for (ex, old) in task_a.iter().zip(&before) {
        for (new, old) in net.output(&ex.input)?.iter().zip(old) {
            total += (new - old) * (new - old);
            n += 1;
        }
    }
    Ok(total / n as f64)
}
