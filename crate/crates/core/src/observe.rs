//! Observation encoding.
//!
//! Each observed parameter `i` owns two non-negative cells: cell `2i` holds its
//! normalized magnitude when the parameter is positive, cell `2i + 1` when it is
//! negative, and the unused cell is zero. Linear quantities are divided by 20;
//! angular quantities are converted to degrees and divided by 60.

use alloc::vec::Vec;

use crate::dynamics::CartPoleState;

/// Divisor applied to linear quantities (m, m/s, m/s²).
pub const LINEAR_SCALE: f64 = 20.0;

/// Divisor applied to angular quantities after conversion to degrees.
pub const ANGULAR_SCALE_DEG: f64 = 60.0;

/// Physical family of an observed parameter, which selects its divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Linear,
    Angular,
}

/// Which parameters the agent gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    /// Positions, velocities and accelerations of cart and both poles.
    #[default]
    Full,
    /// Cart position and the two pole angles only.
    Partial,
}

/// One observed quantity of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    X,
    XDot,
    XDdot,
    Theta1,
    ThetaDot1,
    ThetaDdot1,
    Theta2,
    ThetaDot2,
    ThetaDdot2,
}

impl Param {
    pub fn kind(self) -> Kind {
        match self {
            Param::X | Param::XDot | Param::XDdot => Kind::Linear,
            _ => Kind::Angular,
        }
    }

    pub fn read(self, s: &CartPoleState) -> f64 {
        match self {
            Param::X => s.x,
            Param::XDot => s.x_dot,
            Param::XDdot => s.x_ddot,
            Param::Theta1 => s.theta[0],
            Param::ThetaDot1 => s.theta_dot[0],
            Param::ThetaDdot1 => s.theta_ddot[0],
            Param::Theta2 => s.theta[1],
            Param::ThetaDot2 => s.theta_dot[1],
            Param::ThetaDdot2 => s.theta_ddot[1],
        }
    }
}

const FULL_LAYOUT: [Param; 9] = [
    Param::X,
    Param::XDot,
    Param::XDdot,
    Param::Theta1,
    Param::ThetaDot1,
    Param::ThetaDdot1,
    Param::Theta2,
    Param::ThetaDot2,
    Param::ThetaDdot2,
];

const PARTIAL_LAYOUT: [Param; 3] = [Param::X, Param::Theta1, Param::Theta2];

impl Mode {
    /// Parameter order for this mode. Slot `i` fills cells `2i` and `2i + 1`.
    pub fn layout(self) -> &'static [Param] {
        match self {
            Mode::Full => &FULL_LAYOUT,
            Mode::Partial => &PARTIAL_LAYOUT,
        }
    }

    /// Length of the encoded vector.
    pub fn width(self) -> usize {
        2 * self.layout().len()
    }
}

/// Encoded observation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    pub mode: Mode,
}

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Split one parameter into its `(positive, negative)` cells.
pub fn encode_component(value: f64, kind: Kind) -> (f64, f64) {
    let magnitude = match kind {
        Kind::Linear => libm::fabs(value) / LINEAR_SCALE,
        // |rad| * (180/pi) / 60, folded so that exact degree multiples of 60
        // stay exact.
        Kind::Angular => libm::fabs(value) * 3.0 / core::f64::consts::PI,
    };
    if value > 0.0 {
        (magnitude, 0.0)
    } else if value < 0.0 {
        (0.0, magnitude)
    } else {
        (0.0, 0.0)
    }
}

/// Encode `state` in the given mode.
pub fn encode_state(state: &CartPoleState, mode: Mode) -> Observation {
    let mut values = Vec::with_capacity(mode.width());
    for param in mode.layout() {
        let (pos, neg) = encode_component(param.read(state), param.kind());
        values.push(pos);
        values.push(neg);
    }
    Observation { values, mode }
}
