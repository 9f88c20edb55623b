use dpole_core::dynamics::{
    check_failure, derivatives, integrate, step, Action, CartPoleState, PhysicsConfig,
};
use proptest::prelude::*;

fn components(s: &CartPoleState) -> [f64; 6] {
    [
        s.x,
        s.x_dot,
        s.theta[0],
        s.theta_dot[0],
        s.theta[1],
        s.theta_dot[1],
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(a.abs()) || a == b
}

#[test]
fn alternating_pushes_match_fine_substep_oracle() {
    let cfg = PhysicsConfig::default();
    let fine = PhysicsConfig {
        integration_substep: cfg.integration_substep / 10.0,
        ..cfg.clone()
    };
    let mut coarse_state = CartPoleState::EQUILIBRIUM;
    let mut fine_state = CartPoleState::EQUILIBRIUM;
    let mut steps = 0;
    for k in 0..200 {
        let action = if k % 2 == 0 {
            Action::PushRight
        } else {
            Action::PushLeft
        };
        let a = step(&coarse_state, action, &cfg).unwrap();
        let b = step(&fine_state, action, &fine).unwrap();
        for (x, y) in components(&a.state).iter().zip(components(&b.state)) {
            assert!(close(*x, y, 1e-6), "step {k}: {x} vs {y}");
        }
        assert_eq!(a.terminal, b.terminal);
        steps += 1;
        if a.terminal {
            break;
        }
        coarse_state = a.state;
        fine_state = b.state;
    }
    assert!(steps > 0);
}

#[test]
fn halving_the_substep_converges_over_one_second() {
    let cfg = PhysicsConfig::default();
    let start = CartPoleState {
        theta: [0.02, -0.01],
        theta_dot: [0.0, 0.05],
        ..CartPoleState::EQUILIBRIUM
    };
    let h = cfg.integration_substep;
    // 1 s of alternating pushes, 50 control intervals.
    let run = |h: f64| {
        let per_interval = (cfg.control_interval / h).round() as usize;
        let mut s = start;
        for k in 0..50 {
            let force = if k % 2 == 0 { 10.0 } else { -10.0 };
            s = integrate(&s, force, h, per_interval, &cfg).unwrap();
        }
        s
    };
    let coarse = run(h);
    let half = run(h / 2.0);
    let reference = run(h / 10.0);
    for ((c, f), r) in components(&coarse)
        .iter()
        .zip(components(&half))
        .zip(components(&reference))
    {
        assert!(close(*c, f, 1e-6), "halving: {c} vs {f}");
        assert!(close(*c, r, 1e-6), "10x finer: {c} vs {r}");
    }
}

#[test]
fn equilibrium_is_exactly_fixed() {
    let cfg = PhysicsConfig::default();
    let d = derivatives(&CartPoleState::EQUILIBRIUM, 0.0, &cfg).unwrap();
    assert_eq!(d.as_array(), [0.0; 6]);
    let s = integrate(&CartPoleState::EQUILIBRIUM, 0.0, 0.01, 100, &cfg).unwrap();
    assert_eq!(s, CartPoleState::EQUILIBRIUM);
}

fn state_strategy() -> impl Strategy<Value = CartPoleState> {
    (
        -2.0..2.0f64,
        -3.0..3.0f64,
        -0.6..0.6f64,
        -4.0..4.0f64,
        -0.6..0.6f64,
        -4.0..4.0f64,
    )
        .prop_map(|(x, xd, t1, td1, t2, td2)| CartPoleState {
            x,
            x_dot: xd,
            theta: [t1, t2],
            theta_dot: [td1, td2],
            ..CartPoleState::EQUILIBRIUM
        })
}

fn mirrored(s: &CartPoleState) -> CartPoleState {
    CartPoleState {
        x: -s.x,
        x_dot: -s.x_dot,
        x_ddot: -s.x_ddot,
        theta: [-s.theta[0], -s.theta[1]],
        theta_dot: [-s.theta_dot[0], -s.theta_dot[1]],
        theta_ddot: [-s.theta_ddot[0], -s.theta_ddot[1]],
    }
}

proptest! {
    #[test]
    fn mirror_symmetry(s in state_strategy(), force in -10.0..10.0f64, frictions in proptest::bool::ANY) {
        let cfg = PhysicsConfig {
            cart_friction: if frictions { 0.0005 } else { 0.0 },
            pole_friction: if frictions { 0.000002 } else { 0.0 },
            ..PhysicsConfig::default()
        };
        let d = derivatives(&s, force, &cfg).unwrap().as_array();
        let m = derivatives(&mirrored(&s), -force, &cfg).unwrap().as_array();
        for (a, b) in d.iter().zip(m) {
            prop_assert!((a + b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn failure_is_monotone(s in state_strategy(), grow in 0.0..1.0f64) {
        let cfg = PhysicsConfig::default();
        if check_failure(&s, &cfg) {
            let bigger = CartPoleState {
                x: s.x * (1.0 + grow) + s.x.signum() * 1e-9,
                theta: [
                    s.theta[0] * (1.0 + grow) + s.theta[0].signum() * 1e-9,
                    s.theta[1] * (1.0 + grow) + s.theta[1].signum() * 1e-9,
                ],
                ..s
            };
            prop_assert!(check_failure(&bigger, &cfg));
        }
    }

    #[test]
    fn steps_stay_finite(s in state_strategy(), right in proptest::bool::ANY) {
        let cfg = PhysicsConfig::default();
        prop_assume!(!check_failure(&s, &cfg));
        let action = if right { Action::PushRight } else { Action::PushLeft };
        let out = step(&s, action, &cfg).unwrap();
        prop_assert!(out.state.is_finite());
        prop_assert_eq!(out.terminal, check_failure(&out.state, &cfg));
        prop_assert_eq!(out.reward, if out.terminal { -1.0 } else { 0.0 });
    }
}
