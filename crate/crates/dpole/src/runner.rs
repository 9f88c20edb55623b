//! Episode loop and single-run orchestration.

use std::time::Instant;

use dpole_core::agent::{Agent, Transition};
use dpole_core::dynamics::{self, CartPoleState};
use dpole_core::metrics::summarize;
use dpole_core::observe::encode_state;
use dpole_core::rehearsal::Rehearser;
use dpole_core::rng::{self, Purpose, Stream};

use crate::artifact::{self, EpisodeRecord, RunArtifact, TerminalCause};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Half-width of the uniform range the pole angles start in (rad).
pub const INITIAL_ANGLE_SPREAD: f64 = 0.05;

/// Everything that persists across the episodes of one run.
#[derive(Debug, Clone)]
pub struct Learner {
    pub agent: Agent,
    pub rehearser: Rehearser,
    policy_rng: Stream,
    start_rng: Stream,
}

impl Learner {
    /// Fresh agent and streams for `cfg`.
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let agent = Agent::new(
            cfg.agent.clone(),
            cfg.observation.width(),
            &mut rng::stream(cfg.seed, Purpose::ActorInit),
            &mut rng::stream(cfg.seed, Purpose::CriticInit),
        )
        .map_err(|e| HarnessError::from_core("agent", e))?;
        let rehearser = Rehearser::new(
            cfg.rehearsal.clone(),
            rng::stream(cfg.seed, Purpose::Pseudopatterns),
        )
        .map_err(|e| HarnessError::from_core("rehearsal", e))?;
        Ok(Learner {
            agent,
            rehearser,
            policy_rng: rng::stream(cfg.seed, Purpose::Policy),
            start_rng: rng::stream(cfg.seed, Purpose::InitialState),
        })
    }

    fn initial_state(&mut self) -> CartPoleState {
        let mut draw = || {
            rng::uniform(
                &mut self.start_rng,
                -INITIAL_ANGLE_SPREAD,
                INITIAL_ANGLE_SPREAD,
            )
        };
        let theta_1 = draw();
        let theta_2 = draw();
        CartPoleState::with_angles(theta_1, theta_2)
    }

    /// Play and learn one episode.
    ///
    /// If the rig fails on the last allowed step the episode is still recorded
    /// as `step_limit`; the failure is learned from all the same.
    pub fn run_episode(
        &mut self,
        episode_index: u64,
        cfg: &ExperimentConfig,
    ) -> Result<EpisodeRecord> {
        let started = Instant::now();
        let runtime = |e: dpole_core::Error, step: u64| {
            HarnessError::Runtime(format!("episode {episode_index}, step {step}: {e}"))
        };

        self.rehearser
            .begin_episode(episode_index, &self.agent.actor, &self.agent.critic);

        let mut state = self.initial_state();
        let mut obs = encode_state(&state, cfg.observation).values;
        let mut steps = 0u64;
        let mut abs_delta = 0.0;
        let cause = loop {
            let action = self
                .agent
                .act(&obs, &mut self.policy_rng)
                .map_err(|e| runtime(e, steps))?;
            let out =
                dynamics::step(&state, action, &cfg.physics).map_err(|e| runtime(e, steps))?;
            steps += 1;
            let next_obs =
                (!out.terminal).then(|| encode_state(&out.state, cfg.observation).values);
            let t = Transition {
                observation: obs,
                action,
                reward: out.reward,
                next_observation: next_obs,
            };
            let delta = self
                .agent
                .learn(&t, &mut self.rehearser)
                .map_err(|e| runtime(e, steps))?;
            abs_delta += delta.abs();

            if steps >= cfg.max_steps_per_episode {
                break TerminalCause::StepLimit;
            }
            if let Some(failure) = dynamics::failure_cause(&out.state, &cfg.physics) {
                break failure.into();
            }
            state = out.state;
            obs = t.next_observation.expect("non-terminal transition");
        };

        Ok(EpisodeRecord {
            episode_index,
            steps_survived: steps,
            terminal_cause: cause,
            compute_ns: started.elapsed().as_nanos() as u64,
            td_error_mean_abs: abs_delta / steps as f64,
        })
    }
}

/// Run `cfg.episodes` episodes with one continually learning agent and, when
/// `cfg.output` is set, write the artifact there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    let (artifact, _) = run_with_learner(cfg)?;
    Ok(artifact)
}

/// As [`run_experiment`], also returning the trained learner.
pub fn run_with_learner(cfg: &ExperimentConfig) -> Result<(RunArtifact, Learner)> {
    cfg.validate()?;
    if let Some(dir) = &cfg.output {
        artifact::prepare_output_dir(dir)?;
    }
    let started = Instant::now();
    let mut learner = Learner::new(cfg)?;
    let mut records = Vec::with_capacity(cfg.episodes as usize);
    for episode in 0..cfg.episodes {
        records.push(learner.run_episode(episode, cfg)?);
    }
    let steps: Vec<f64> = records.iter().map(|r| r.steps_survived as f64).collect();
    let summary = summarize(&steps).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let run = RunArtifact {
        config: cfg.clone(),
        records,
        summary,
        total_wall_ns: started.elapsed().as_nanos() as u64,
    };
    if let Some(dir) = &cfg.output {
        artifact::write_results_csv(&run, dir)?;
        artifact::write_networks(
            dir,
            &learner.agent.actor.to_snapshot(),
            &learner.agent.critic.to_snapshot(),
        )?;
    }
    Ok((run, learner))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(episodes: u64) -> ExperimentConfig {
        ExperimentConfig {
            episodes,
            seed: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn one_step_cap() {
        let cfg = ExperimentConfig {
            max_steps_per_episode: 1,
            ..small(3)
        };
        let run = run_experiment(&cfg).unwrap();
        for r in &run.records {
            assert_eq!(r.steps_survived, 1);
            assert_eq!(r.terminal_cause, TerminalCause::StepLimit);
        }
    }

    #[test]
    fn untrained_agent_terminates() {
        let run = run_experiment(&small(1)).unwrap();
        let r = &run.records[0];
        assert!(r.steps_survived >= 1);
        assert_ne!(r.terminal_cause, TerminalCause::StepLimit);
        assert_eq!(run.summary.step_volatility, 0.0);
    }

    #[test]
    fn episodes_are_reproducible() {
        let strip = |r: &EpisodeRecord| {
            (
                r.episode_index,
                r.steps_survived,
                r.terminal_cause,
                r.td_error_mean_abs,
            )
        };
        let a = run_experiment(&small(20)).unwrap();
        let b = run_experiment(&small(20)).unwrap();
        assert_eq!(
            a.records.iter().map(strip).collect::<Vec<_>>(),
            b.records.iter().map(strip).collect::<Vec<_>>()
        );
    }

    #[test]
    fn initial_angles_stay_in_range() {
        let mut learner = Learner::new(&small(1)).unwrap();
        for _ in 0..1000 {
            let s = learner.initial_state();
            assert!(s.theta.iter().all(|t| t.abs() <= INITIAL_ANGLE_SPREAD));
            assert_eq!((s.x, s.x_dot, s.theta_dot), (0.0, 0.0, [0.0, 0.0]));
        }
    }
}
