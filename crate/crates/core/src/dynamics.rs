//! Cart with two hinged poles of different lengths, driven by a bang-bang
//! horizontal force.
//!
//! Sign conventions: `x` grows to the right, a positive pole angle means the
//! pole leans to the right (clockwise from vertical), and a positive force
//! pushes the cart to the right. Pole lengths are full lengths; the equations
//! use half-lengths (pivot to centre of mass) of uniform rods.

use libm::{cos, sin};

use crate::{Error, Result};

/// Physical state of the cart and both poles.
///
/// `x_ddot` and `theta_ddot` are the accelerations from the most recent
/// derivative evaluation that produced this state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub x_ddot: f64,
    pub theta: [f64; 2],
    pub theta_dot: [f64; 2],
    pub theta_ddot: [f64; 2],
}

impl CartPoleState {
    /// Upright, motionless state at the track centre.
    pub const EQUILIBRIUM: CartPoleState = CartPoleState {
        x: 0.0,
        x_dot: 0.0,
        x_ddot: 0.0,
        theta: [0.0; 2],
        theta_dot: [0.0; 2],
        theta_ddot: [0.0; 2],
    };

    /// State at rest with the given pole angles.
    pub fn with_angles(theta_1: f64, theta_2: f64) -> Self {
        CartPoleState {
            theta: [theta_1, theta_2],
            ..Self::EQUILIBRIUM
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.x_dot.is_finite()
            && self.x_ddot.is_finite()
            && self.theta.iter().all(|v| v.is_finite())
            && self.theta_dot.iter().all(|v| v.is_finite())
            && self.theta_ddot.iter().all(|v| v.is_finite())
    }

    fn integrated(&self) -> [f64; 6] {
        [
            self.x,
            self.x_dot,
            self.theta[0],
            self.theta_dot[0],
            self.theta[1],
            self.theta_dot[1],
        ]
    }

    fn from_integrated(y: [f64; 6], d: &Derivatives) -> Self {
        CartPoleState {
            x: y[0],
            x_dot: y[1],
            x_ddot: d.x_ddot,
            theta: [y[2], y[4]],
            theta_dot: [y[3], y[5]],
            theta_ddot: d.theta_ddot,
        }
    }
}

/// Constants of the simulated rig.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PhysicsConfig {
    pub cart_mass: f64,
    pub pole_mass_1: f64,
    pub pole_length_1: f64,
    pub pole_mass_2: f64,
    pub pole_length_2: f64,
    pub gravity: f64,
    pub force_magnitude: f64,
    pub track_half_length: f64,
    pub failure_angle: f64,
    pub integration_substep: f64,
    pub control_interval: f64,
    pub cart_friction: f64,
    pub pole_friction: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            cart_mass: 1.0,
            pole_mass_1: 0.1,
            pole_length_1: 1.0,
            pole_mass_2: 0.01,
            pole_length_2: 0.1,
            gravity: 9.81,
            force_magnitude: 10.0,
            track_half_length: 2.4,
            failure_angle: core::f64::consts::PI / 5.0,
            integration_substep: 0.0025,
            control_interval: 0.02,
            cart_friction: 0.0,
            pole_friction: 0.0,
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 9] = [
            ("cart_mass", self.cart_mass),
            ("pole_mass_1", self.pole_mass_1),
            ("pole_length_1", self.pole_length_1),
            ("pole_mass_2", self.pole_mass_2),
            ("pole_length_2", self.pole_length_2),
            ("force_magnitude", self.force_magnitude),
            ("track_half_length", self.track_half_length),
            ("failure_angle", self.failure_angle),
            ("integration_substep", self.integration_substep),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, "must be finite and > 0"));
            }
        }
        if !(self.control_interval.is_finite() && self.control_interval > 0.0) {
            return Err(Error::config("control_interval", "must be finite and > 0"));
        }
        if !self.gravity.is_finite() {
            return Err(Error::config("gravity", "must be finite"));
        }
        for (key, value) in [
            ("cart_friction", self.cart_friction),
            ("pole_friction", self.pole_friction),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(key, "must be finite and >= 0"));
            }
        }
        if self.pole_length_1 == self.pole_length_2 {
            return Err(Error::config(
                "pole_length_2",
                "poles of equal length make the task a single-pole problem",
            ));
        }
        let ratio = self.control_interval / self.integration_substep;
        let rounded = libm::round(ratio);
        if rounded < 1.0 || libm::fabs(ratio - rounded) > 1e-9 * ratio {
            return Err(Error::config(
                "control_interval",
                "must be an integer multiple of integration_substep",
            ));
        }
        Ok(())
    }

    /// RK4 substeps per control interval.
    pub fn substeps(&self) -> usize {
        libm::round(self.control_interval / self.integration_substep) as usize
    }

    fn half_lengths(&self) -> [f64; 2] {
        [0.5 * self.pole_length_1, 0.5 * self.pole_length_2]
    }

    fn pole_masses(&self) -> [f64; 2] {
        [self.pole_mass_1, self.pole_mass_2]
    }
}

/// The two available actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    PushLeft,
    PushRight,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::PushLeft, Action::PushRight];

    /// Output head of the actor network for this action.
    pub fn index(self) -> usize {
        match self {
            Action::PushLeft => 0,
            Action::PushRight => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }

    /// Signed force applied by this action.
    pub fn force(self, cfg: &PhysicsConfig) -> f64 {
        match self {
            Action::PushLeft => -cfg.force_magnitude,
            Action::PushRight => cfg.force_magnitude,
        }
    }
}

/// Time derivatives of `(x, x_dot, theta_1, theta_dot_1, theta_2, theta_dot_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub x_dot: f64,
    pub x_ddot: f64,
    pub theta_dot: [f64; 2],
    pub theta_ddot: [f64; 2],
}

impl Derivatives {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.x_dot,
            self.x_ddot,
            self.theta_dot[0],
            self.theta_ddot[0],
            self.theta_dot[1],
            self.theta_ddot[1],
        ]
    }
}

#[inline]
fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn accelerations(y: &[f64; 6], force: f64, cfg: &PhysicsConfig) -> Derivatives {
    let half = cfg.half_lengths();
    let mass = cfg.pole_masses();
    let g = cfg.gravity;
    let mu_p = cfg.pole_friction;

    let theta = [y[2], y[4]];
    let theta_dot = [y[3], y[5]];

    // Effective force and mass each pole contributes to the cart.
    let mut eff_force = 0.0;
    let mut eff_mass = 0.0;
    let mut pivot_friction = [0.0; 2];
    let mut sin_t = [0.0; 2];
    let mut cos_t = [0.0; 2];
    for i in 0..2 {
        let (s, c) = (sin(theta[i]), cos(theta[i]));
        sin_t[i] = s;
        cos_t[i] = c;
        pivot_friction[i] = mu_p * theta_dot[i] / (mass[i] * half[i]);
        eff_force += mass[i] * half[i] * theta_dot[i] * theta_dot[i] * s
            + 0.75 * mass[i] * c * (pivot_friction[i] - g * s);
        eff_mass += mass[i] * (1.0 - 0.75 * c * c);
    }

    let x_ddot =
        (force - cfg.cart_friction * signum0(y[1]) + eff_force) / (cfg.cart_mass + eff_mass);

    let mut theta_ddot = [0.0; 2];
    for i in 0..2 {
        theta_ddot[i] = -0.75 * (x_ddot * cos_t[i] - g * sin_t[i] + pivot_friction[i]) / half[i];
    }

    Derivatives {
        x_dot: y[1],
        x_ddot,
        theta_dot,
        theta_ddot,
    }
}

/// Equations of motion evaluated at `state` under a constant `force`.
pub fn derivatives(state: &CartPoleState, force: f64, cfg: &PhysicsConfig) -> Result<Derivatives> {
    if !state.is_finite() {
        return Err(Error::InvalidState("non-finite cart/pole state"));
    }
    if !force.is_finite() || libm::fabs(force) > cfg.force_magnitude {
        return Err(Error::Argument(
            "force outside [-force_magnitude, force_magnitude]",
        ));
    }
    Ok(accelerations(&state.integrated(), force, cfg))
}

/// Why a state counts as failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Failure {
    Pole1,
    Pole2,
    Track,
}

/// First violated bound, checking pole 1, pole 2, then the track.
pub fn failure_cause(state: &CartPoleState, cfg: &PhysicsConfig) -> Option<Failure> {
    if libm::fabs(state.theta[0]) > cfg.failure_angle {
        Some(Failure::Pole1)
    } else if libm::fabs(state.theta[1]) > cfg.failure_angle {
        Some(Failure::Pole2)
    } else if libm::fabs(state.x) > cfg.track_half_length {
        Some(Failure::Track)
    } else {
        None
    }
}

/// `true` iff a pole has fallen past the failure angle or the cart left the track.
pub fn check_failure(state: &CartPoleState, cfg: &PhysicsConfig) -> bool {
    failure_cause(state, cfg).is_some()
}

/// Result of one control interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: CartPoleState,
    pub reward: f64,
    pub terminal: bool,
}

/// Reward handed out when the rig fails.
pub const FAILURE_REWARD: f64 = -1.0;

fn rk4(y: [f64; 6], force: f64, h: f64, cfg: &PhysicsConfig) -> [f64; 6] {
    let f = |y: &[f64; 6]| accelerations(y, force, cfg).as_array();
    let offset = |y: &[f64; 6], k: &[f64; 6], s: f64| {
        let mut out = *y;
        for (o, k) in out.iter_mut().zip(k) {
            *o += s * k;
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&offset(&y, &k1, 0.5 * h));
    let k3 = f(&offset(&y, &k2, 0.5 * h));
    let k4 = f(&offset(&y, &k3, h));
    let mut out = y;
    for i in 0..6 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrate `state` for `substeps` RK4 steps of length `h` under a constant force.
///
/// Unlike [`step`] this ignores failure bounds, which makes it usable for
/// convergence studies on arbitrary trajectories.
pub fn integrate(
    state: &CartPoleState,
    force: f64,
    h: f64,
    substeps: usize,
    cfg: &PhysicsConfig,
) -> Result<CartPoleState> {
    if !state.is_finite() {
        return Err(Error::InvalidState("non-finite cart/pole state"));
    }
    let mut y = state.integrated();
    for _ in 0..substeps {
        y = rk4(y, force, h, cfg);
    }
    let d = accelerations(&y, force, cfg);
    let next = CartPoleState::from_integrated(y, &d);
    if !next.is_finite() {
        return Err(Error::Numeric("integration produced a non-finite state"));
    }
    Ok(next)
}

/// Advance one control interval with the force of `action` held constant.
///
/// The accelerations cached on the returned state are evaluated at the end of
/// the interval under the applied force.
pub fn step(state: &CartPoleState, action: Action, cfg: &PhysicsConfig) -> Result<StepOutcome> {
    if !state.is_finite() {
        return Err(Error::InvalidState("non-finite cart/pole state"));
    }
    if check_failure(state, cfg) {
        return Err(Error::Protocol("step called on a failed state"));
    }
    let next = integrate(
        state,
        action.force(cfg),
        cfg.integration_substep,
        cfg.substeps(),
        cfg,
    )?;
    let terminal = check_failure(&next, cfg);
    Ok(StepOutcome {
        state: next,
        reward: if terminal { FAILURE_REWARD } else { 0.0 },
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PhysicsConfig {
        PhysicsConfig::default()
    }

    #[test]
    fn default_config_is_valid() {
        let c = cfg();
        c.validate().unwrap();
        assert_eq!(c.substeps(), 8);
    }

    #[test]
    fn rejects_equal_pole_lengths() {
        let c = PhysicsConfig {
            pole_length_2: 1.0,
            ..cfg()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::Config {
                key: "pole_length_2",
                ..
            })
        ));
    }

    #[test]
    fn rejects_non_multiple_control_interval() {
        let c = PhysicsConfig {
            control_interval: 0.021,
            ..cfg()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::Config {
                key: "control_interval",
                ..
            })
        ));
    }

    #[test]
    fn rejects_non_positive_mass() {
        let c = PhysicsConfig {
            cart_mass: 0.0,
            ..cfg()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::Config {
                key: "cart_mass",
                ..
            })
        ));
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let d = derivatives(&CartPoleState::EQUILIBRIUM, 0.0, &cfg()).unwrap();
        assert_eq!(d.as_array(), [0.0; 6]);
    }

    #[test]
    fn pushing_right_accelerates_right() {
        let d = derivatives(&CartPoleState::EQUILIBRIUM, 10.0, &cfg()).unwrap();
        assert!(d.x_ddot > 0.0);
        // The poles lag behind and start leaning left.
        assert!(d.theta_ddot[0] < 0.0 && d.theta_ddot[1] < 0.0);
    }

    #[test]
    fn tilted_state_matches_hand_evaluation() {
        // Frozen from an independent symbolic Lagrangian derivation (cart plus
        // two uniform rods) evaluated at m1 = 0.1, l1 = 0.5, m2 = 0.01,
        // l2 = 0.05 (half-lengths), M = 1, g = 9.81, F = 0.
        let state = CartPoleState::with_angles(0.1, -0.05);
        let d = derivatives(&state, 0.0, &cfg()).unwrap();
        assert_eq!(d.x_dot, 0.0);
        assert_eq!(d.theta_dot, [0.0, 0.0]);
        approx::assert_relative_eq!(d.x_ddot, -0.067_504_752_860_354_02, max_relative = 1e-12);
        approx::assert_relative_eq!(
            d.theta_ddot[0],
            1.569_799_991_366_250_2,
            max_relative = 1e-12
        );
        approx::assert_relative_eq!(d.theta_ddot[1], -6.343_128_915_722_67, max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_finite_state() {
        let mut s = CartPoleState::EQUILIBRIUM;
        s.theta_dot[1] = f64::NAN;
        assert!(matches!(
            derivatives(&s, 0.0, &cfg()),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn single_push_from_equilibrium() {
        let t = step(&CartPoleState::EQUILIBRIUM, Action::PushRight, &cfg()).unwrap();
        assert!(t.state.x_dot > 0.0);
        assert!(!t.terminal);
        assert_eq!(t.reward, 0.0);
    }

    #[test]
    fn stepping_a_failed_state_is_a_protocol_violation() {
        let c = cfg();
        let s = CartPoleState::with_angles(c.failure_angle + 0.1, 0.0);
        assert!(matches!(
            step(&s, Action::PushLeft, &c),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn failure_checks() {
        let c = cfg();
        assert!(!check_failure(&CartPoleState::EQUILIBRIUM, &c));
        let off_track = CartPoleState {
            x: c.track_half_length + 0.01,
            ..CartPoleState::EQUILIBRIUM
        };
        assert_eq!(failure_cause(&off_track, &c), Some(Failure::Track));
        let fallen = CartPoleState::with_angles(0.0, -(c.failure_angle + 0.01));
        assert_eq!(failure_cause(&fallen, &c), Some(Failure::Pole2));
    }

    #[test]
    fn failure_yields_negative_reward() {
        let c = cfg();
        let mut s = CartPoleState::with_angles(0.0, c.failure_angle - 1e-3);
        s.theta_dot[1] = 5.0;
        let t = step(&s, Action::PushLeft, &c).unwrap();
        assert!(t.terminal);
        assert_eq!(t.reward, FAILURE_REWARD);
    }
}
