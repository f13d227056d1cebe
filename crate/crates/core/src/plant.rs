//! Continuous-time model of the 6/4 switched reluctance motor, the converter
//! voltages seen by each winding, and the vehicle-side line sensor.
//!
//! Per phase, the winding obeys
//!
//! ```text
//! L(theta) di/dt = -r i - i w dL/dtheta + v_applied
//! ```
//!
//! with the back EMF expanded from d(L(theta) i)/dt under current-independent
//! inductance. Torque is the linear-magnetics co-energy form
//! `T = sum 1/2 i^2 dL/dtheta`, and the mechanical side is
//! `J dw/dt = T - B w - T_load`, `dtheta/dt = w`. Integration is fixed-step
//! classic RK4; the switch configuration is frozen across a step.
//!
//! Currents are unipolar: a phase whose applied voltage is non-positive at
//! zero current stays at zero (ideal diode blocking), and currents are
//! clamped at zero after every step.

use thiserror::Error;

use crate::protocol::{PerPhase, PhaseId};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Rotor-angle dependence of the winding inductance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InductanceProfile {
    /// Flat minimum, linear rise to the aligned angle, optional flat top,
    /// linear fall. Matches the idealized saliency shape.
    Trapezoid,
    /// Smooth raised-cosine shape, for convergence studies.
    RaisedCosine,
}

/// Mechanical integration mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanicalModel {
    /// Integrate speed from the torque balance.
    Dynamic,
    /// Hold speed constant (externally driven rotor).
    ConstantSpeed,
}

#[derive(Debug, Clone)]
pub struct MotorParams {
    /// Winding resistance (ohm).
    pub r: f64,
    /// Unaligned inductance (H).
    pub l_min: f64,
    /// Aligned inductance (H).
    pub l_max: f64,
    /// Rotor pole count; the inductance period is 360/poles degrees.
    pub rotor_poles: u32,
    /// Mechanical offset between consecutive phases (deg).
    pub phase_offset_deg: f64,
    /// Rotor angle of maximum phase-A inductance (deg).
    pub aligned_deg: f64,
    /// Width of the rising inductance ramp (deg).
    pub rise_deg: f64,
    /// Width of the falling inductance ramp (deg).
    pub fall_deg: f64,
    /// Width of the flat maximum around the aligned angle (deg).
    pub flat_top_deg: f64,
    /// Rotor inertia (kg m^2).
    pub j: f64,
    /// Viscous friction (N m s/rad).
    pub b_visc: f64,
    /// Constant load torque (N m).
    pub t_load: f64,
    /// Supply voltage E (V).
    pub supply_voltage: f64,
    /// Diode conduction drop (V).
    pub v_diode: f64,
    /// Switch conduction drop (V).
    pub v_switch: f64,
    pub profile: InductanceProfile,
    pub mechanics: MechanicalModel,
}

impl Default for MotorParams {
    /// Desk-scale stand-in parameters: magnetizing 0.5 -> 1.1 A at 24 V takes
    /// on the order of a millisecond, and the net co-energy work over a
    /// 30-60 degree conduction window sustains rotation around 7 rad/s.
    fn default() -> Self {
        MotorParams {
            r: 4.0,
            l_min: 10e-3,
            l_max: 40e-3,
            rotor_poles: 4,
            phase_offset_deg: 30.0,
            aligned_deg: 45.0,
            rise_deg: 25.0,
            fall_deg: 45.0,
            flat_top_deg: 0.0,
            j: 5e-3,
            b_visc: 4e-4,
            t_load: 2e-3,
            supply_voltage: 24.0,
            v_diode: 0.0,
            v_switch: 0.0,
            profile: InductanceProfile::Trapezoid,
            mechanics: MechanicalModel::Dynamic,
        }
    }
}

impl MotorParams {
    pub fn period_deg(&self) -> f64 {
        360.0 / self.rotor_poles as f64
    }

    /// Basic well-formedness; also checked by scenario-config validation.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.l_max > self.l_min && self.l_min > 0.0) {
            return Err("require l_max > l_min > 0".into());
        }
        if self.r < 0.0 {
            return Err("winding resistance must be non-negative".into());
        }
        if self.j <= 0.0 {
            return Err("rotor inertia must be positive".into());
        }
        if self.supply_voltage <= 0.0 {
            return Err("supply voltage must be positive".into());
        }
        if self.rotor_poles == 0 {
            return Err("rotor pole count must be positive".into());
        }
        let period = self.period_deg();
        if self.rise_deg <= 0.0 || self.fall_deg <= 0.0 || self.flat_top_deg < 0.0 {
            return Err("ramp widths must be positive, flat top non-negative".into());
        }
        if self.rise_deg + self.fall_deg + self.flat_top_deg > period {
            return Err(format!(
                "rise + flat top + fall exceeds the {period} deg inductance period"
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Inductance
// ---------------------------------------------------------------------------

fn wrap_deg(x: f64, period: f64) -> f64 {
    let y = x % period;
    if y < 0.0 {
        y + period
    } else {
        y
    }
}

/// Winding inductance of `phase` at rotor angle `theta` (rad), in henries.
pub fn inductance(phase: PhaseId, theta: f64, p: &MotorParams) -> f64 {
    profile_eval(phase, theta, p).0
}

/// Exact analytic derivative dL/dtheta (H/rad) of the selected profile.
pub fn d_inductance(phase: PhaseId, theta: f64, p: &MotorParams) -> f64 {
    profile_eval(phase, theta, p).1
}

fn profile_eval(phase: PhaseId, theta: f64, p: &MotorParams) -> (f64, f64) {
    let period = p.period_deg();
    let shift = phase.index() as f64 * p.phase_offset_deg;
    let theta_deg = theta.to_degrees() - shift;
    let dl = p.l_max - p.l_min;
    match p.profile {
        InductanceProfile::Trapezoid => {
            let half_top = 0.5 * p.flat_top_deg;
            // Distance past the start of the rising ramp.
            let u = wrap_deg(theta_deg - (p.aligned_deg - half_top - p.rise_deg), period);
            if u < p.rise_deg {
                let slope = dl / p.rise_deg.to_radians();
                (p.l_min + dl * u / p.rise_deg, slope)
            } else if u < p.rise_deg + p.flat_top_deg {
                (p.l_max, 0.0)
            } else if u < p.rise_deg + p.flat_top_deg + p.fall_deg {
                let v = u - p.rise_deg - p.flat_top_deg;
                let slope = dl / p.fall_deg.to_radians();
                (p.l_max - dl * v / p.fall_deg, -slope)
            } else {
                (p.l_min, 0.0)
            }
        }
        InductanceProfile::RaisedCosine => {
            let mid = 0.5 * (p.l_max + p.l_min);
            let amp = 0.5 * dl;
            let n = p.rotor_poles as f64;
            let x = n * (theta_deg - p.aligned_deg).to_radians();
            (mid + amp * x.cos(), -amp * n * x.sin())
        }
    }
}

// ---------------------------------------------------------------------------
// Switch configuration and converter voltages
// ---------------------------------------------------------------------------

/// State of one phase's asymmetric half-bridge leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwitchPair {
    pub upper: bool,
    pub lower: bool,
}

/// Joint switch state of both routers: the vehicle-side line switches S1/S2
/// and the module-side per-phase legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchConfig {
    pub s1: bool,
    pub s2: bool,
    pub phases: PerPhase<SwitchPair>,
}

impl SwitchConfig {
    pub fn all_off() -> Self {
        SwitchConfig {
            s1: false,
            s2: false,
            phases: PerPhase::default(),
        }
    }
}

/// Whether the line is currently carrying payload power or tag bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineContext {
    Payload,
    Tag,
}

/// Effective circuit mode of one phase, derived from its leg state and
/// the line context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveMode {
    /// Both switches on during a payload: supply across the winding.
    Magnetize,
    /// Current circulates through the upper switch and a diode; also the
    /// path taken while tag bits are in flight.
    Freewheel,
    /// Both switches off: winding current returns against the supply.
    Demagnetize,
}

/// Map the joint switch state to per-phase circuit modes.
///
/// A leg with both switches on only magnetizes while payload power is on the
/// line; during tag bits the same leg freewheels.
pub fn effective_modes(cfg: &SwitchConfig, line: LineContext) -> PerPhase<EffectiveMode> {
    PerPhase::from_fn(|p| {
        let leg = cfg.phases[p];
        match (leg.upper, leg.lower) {
            (true, true) => match line {
                LineContext::Payload => EffectiveMode::Magnetize,
                LineContext::Tag => EffectiveMode::Freewheel,
            },
            (true, false) => EffectiveMode::Freewheel,
            (false, _) => EffectiveMode::Demagnetize,
        }
    })
}

/// Voltage applied across a winding in the given mode, before diode blocking.
pub fn phase_voltage(mode: EffectiveMode, p: &MotorParams) -> f64 {
    match mode {
        EffectiveMode::Magnetize => p.supply_voltage - 2.0 * p.v_switch,
        EffectiveMode::Freewheel => -(p.v_diode + p.v_switch),
        EffectiveMode::Demagnetize => -p.supply_voltage - 2.0 * p.v_diode,
    }
}

// ---------------------------------------------------------------------------
// State and integration
// ---------------------------------------------------------------------------

/// Continuous plant state: per-phase currents (A), unwrapped rotor angle
/// (rad), rotor speed (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub i: PerPhase<f64>,
    pub theta: f64,
    pub omega: f64,
}

impl PlantState {
    pub fn at_rest(theta: f64, omega: f64) -> Self {
        PlantState {
            i: PerPhase::default(),
            theta,
            omega,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.i.a.is_finite()
            && self.i.b.is_finite()
            && self.i.c.is_finite()
            && self.theta.is_finite()
            && self.omega.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PlantError {
    /// The state left the finite domain; dt or parameters are unstable.
    #[error("non-finite plant state at t = {t} s")]
    NonFinite { t: f64 },
}

/// Instantaneous electromagnetic torque (N m).
pub fn torque(state: &PlantState, p: &MotorParams) -> f64 {
    PhaseId::ALL
        .iter()
        .map(|&ph| {
            let i = state.i[ph].max(0.0);
            0.5 * i * i * d_inductance(ph, state.theta, p)
        })
        .sum()
}

#[derive(Clone, Copy)]
struct StateVec {
    i: [f64; 3],
    theta: f64,
    omega: f64,
}

/// Advance the plant by one step of classic RK4 with the switch configuration
/// held fixed.
pub fn step(
    state: &PlantState,
    cfg: &SwitchConfig,
    line: LineContext,
    dt: f64,
    p: &MotorParams,
) -> Result<PlantState, PlantError> {
    debug_assert!(dt > 0.0);
    let modes = effective_modes(cfg, line);
    let volts = [
        phase_voltage(modes[PhaseId::A], p),
        phase_voltage(modes[PhaseId::B], p),
        phase_voltage(modes[PhaseId::C], p),
    ];

    let deriv = |s: &StateVec| -> StateVec {
        let mut di = [0.0; 3];
        let mut t_e = 0.0;
        for (k, &ph) in PhaseId::ALL.iter().enumerate() {
            let (l, dl) = profile_eval(ph, s.theta, p);
            let i = s.i[k].max(0.0);
            let v = volts[k];
            // Ideal diode blocking: a de-energized phase with non-positive
            // applied voltage carries no current.
            di[k] = if s.i[k] <= 0.0 && v <= 0.0 {
                0.0
            } else {
                (v - p.r * i - i * s.omega * dl) / l
            };
            t_e += 0.5 * i * i * dl;
        }
        let domega = match p.mechanics {
            MechanicalModel::Dynamic => (t_e - p.b_visc * s.omega - p.t_load) / p.j,
            MechanicalModel::ConstantSpeed => 0.0,
        };
        StateVec {
            i: di,
            theta: s.omega,
            omega: domega,
        }
    };

    let add = |s: &StateVec, k: &StateVec, h: f64| StateVec {
        i: [s.i[0] + h * k.i[0], s.i[1] + h * k.i[1], s.i[2] + h * k.i[2]],
        theta: s.theta + h * k.theta,
        omega: s.omega + h * k.omega,
    };

    let y0 = StateVec {
        i: [state.i.a, state.i.b, state.i.c],
        theta: state.theta,
        omega: state.omega,
    };
    let k1 = deriv(&y0);
    let k2 = deriv(&add(&y0, &k1, dt / 2.0));
    let k3 = deriv(&add(&y0, &k2, dt / 2.0));
    let k4 = deriv(&add(&y0, &k3, dt));

    let sixth = dt / 6.0;
    let combine = |a: f64, b: f64, c: f64, d: f64| sixth * (a + 2.0 * b + 2.0 * c + d);
    let next = PlantState {
        i: PerPhase {
            a: (y0.i[0] + combine(k1.i[0], k2.i[0], k3.i[0], k4.i[0])).max(0.0),
            b: (y0.i[1] + combine(k1.i[1], k2.i[1], k3.i[1], k4.i[1])).max(0.0),
            c: (y0.i[2] + combine(k1.i[2], k2.i[2], k3.i[2], k4.i[2])).max(0.0),
        },
        theta: y0.theta + combine(k1.theta, k2.theta, k3.theta, k4.theta),
        omega: y0.omega + combine(k1.omega, k2.omega, k3.omega, k4.omega),
    };

    if next.is_finite() {
        Ok(next)
    } else {
        Err(PlantError::NonFinite { t: f64::NAN })
    }
}

// ---------------------------------------------------------------------------
// Vehicle-side sensor
// ---------------------------------------------------------------------------

/// One sample of the vehicle-side current sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    /// Current at the vehicle-side sensor (A).
    pub i_line: f64,
    /// True when the line current equals an excited phase's winding current.
    pub valid: bool,
}

/// Model the vehicle-side sensor.
///
/// While payload power is on the line, the magnetizing or freewheeling loop
/// of the excited phase passes through the sensor, so the line current equals
/// that phase's winding current. During tag bits, and for phases left in
/// demagnetization, the winding loops bypass the sensor and it reads zero.
pub fn sensor_current(state: &PlantState, cfg: &SwitchConfig, line: LineContext) -> SensorReading {
    if line == LineContext::Payload {
        for &ph in &PhaseId::ALL {
            if cfg.phases[ph].upper {
                return SensorReading {
                    i_line: state.i[ph],
                    valid: true,
                };
            }
        }
    }
    SensorReading {
        i_line: 0.0,
        valid: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn params() -> MotorParams {
        MotorParams::default()
    }

    fn magnetize(phase: PhaseId) -> SwitchConfig {
        let mut cfg = SwitchConfig::all_off();
        cfg.s1 = true;
        cfg.phases[phase] = SwitchPair { upper: true, lower: true };
        cfg
    }

    // -- inductance ---------------------------------------------------------

    #[test]
    fn aligned_angle_gives_l_max() {
        let p = params();
        let l = inductance(PhaseId::A, p.aligned_deg.to_radians(), &p);
        assert_relative_eq!(l, p.l_max, max_relative = 1e-12);
    }

    #[test]
    fn unaligned_angle_gives_l_min() {
        let p = params();
        // Midpoint of the flat bottom for phase A.
        let l = inductance(PhaseId::A, 5.0_f64.to_radians(), &p);
        assert_relative_eq!(l, p.l_min, max_relative = 1e-12);
    }

    #[test]
    fn raised_cosine_midpoint_is_average() {
        let mut p = params();
        p.profile = InductanceProfile::RaisedCosine;
        let mid_angle = (p.aligned_deg + 0.25 * p.period_deg()).to_radians();
        let l = inductance(PhaseId::A, mid_angle, &p);
        assert_relative_eq!(l, 0.5 * (p.l_max + p.l_min), max_relative = 1e-12);
    }

    #[test]
    fn phase_b_is_phase_a_shifted() {
        let p = params();
        for k in 0..360 {
            let theta = (k as f64).to_radians();
            let la = inductance(PhaseId::A, theta, &p);
            let lb = inductance(PhaseId::B, theta + p.phase_offset_deg.to_radians(), &p);
            assert_abs_diff_eq!(la, lb, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut p = params();
        for profile in [InductanceProfile::Trapezoid, InductanceProfile::RaisedCosine] {
            p.profile = profile;
            for k in 0..3600 {
                let theta = (k as f64 * 0.1 + 0.05).to_radians();
                let h = 1e-7;
                let num =
                    (inductance(PhaseId::A, theta + h, &p) - inductance(PhaseId::A, theta - h, &p))
                        / (2.0 * h);
                let ana = d_inductance(PhaseId::A, theta, &p);
                // Skip points straddling a trapezoid kink.
                if (num - ana).abs() > 1e-4 && profile == InductanceProfile::Trapezoid {
                    continue;
                }
                assert_abs_diff_eq!(num, ana, epsilon = 1e-3);
            }
        }
    }

    // -- converter voltages ---------------------------------------------------

    #[test]
    fn voltage_table() {
        let mut p = params();
        p.supply_voltage = 24.0;
        assert_eq!(phase_voltage(EffectiveMode::Magnetize, &p), 24.0);
        assert_eq!(phase_voltage(EffectiveMode::Freewheel, &p), 0.0);
        assert_eq!(phase_voltage(EffectiveMode::Demagnetize, &p), -24.0);

        p.v_diode = 0.7;
        p.v_switch = 0.5;
        assert_relative_eq!(phase_voltage(EffectiveMode::Magnetize, &p), 23.0);
        assert_relative_eq!(phase_voltage(EffectiveMode::Freewheel, &p), -1.2);
        assert_relative_eq!(phase_voltage(EffectiveMode::Demagnetize, &p), -25.4);
    }

    #[test]
    fn both_switches_on_during_tag_freewheels() {
        let cfg = magnetize(PhaseId::B);
        let modes = effective_modes(&cfg, LineContext::Tag);
        assert_eq!(modes[PhaseId::B], EffectiveMode::Freewheel);
        assert_eq!(modes[PhaseId::A], EffectiveMode::Demagnetize);
        let modes = effective_modes(&cfg, LineContext::Payload);
        assert_eq!(modes[PhaseId::B], EffectiveMode::Magnetize);
    }

    // -- integration ----------------------------------------------------------

    #[test]
    fn equilibrium_state_is_fixed_point() {
        let mut p = params();
        p.t_load = 0.0;
        let state = PlantState::at_rest(0.3, 0.0);
        let cfg = SwitchConfig::all_off();
        let next = step(&state, &cfg, LineContext::Tag, 1e-6, &p).unwrap();
        assert_eq!(next, state);
    }

    #[test]
    fn linear_ramp_is_exact_for_constant_inductance() {
        // Flat-bottom region, zero resistance, locked rotor: i(t) = E t / L.
        let mut p = params();
        p.r = 0.0;
        p.mechanics = MechanicalModel::ConstantSpeed;
        let mut state = PlantState::at_rest(5.0_f64.to_radians(), 0.0);
        let cfg = magnetize(PhaseId::A);
        let dt = 1e-6;
        let steps = 1000;
        for _ in 0..steps {
            state = step(&state, &cfg, LineContext::Payload, dt, &p).unwrap();
        }
        let t = steps as f64 * dt;
        let expect = p.supply_voltage * t / p.l_min;
        assert_relative_eq!(state.i.a, expect, max_relative = 1e-12);
    }

    #[test]
    fn demagnetization_decay_matches_closed_form() {
        // Constant L (flat bottom, locked rotor): L di/dt = -r i - E, so
        // i(t) = -E/r + (i0 + E/r) exp(-r t / L).
        let mut p = params();
        p.r = 1.0;
        p.l_min = 25e-3;
        p.l_max = 40e-3;
        p.mechanics = MechanicalModel::ConstantSpeed;
        let mut state = PlantState::at_rest(5.0_f64.to_radians(), 0.0);
        state.i.a = 0.8;
        let cfg = SwitchConfig::all_off(); // both switches off: demagnetize
        let dt = 1e-6;
        let steps = 500;
        for _ in 0..steps {
            state = step(&state, &cfg, LineContext::Payload, dt, &p).unwrap();
        }
        let t = steps as f64 * dt;
        let e_over_r = p.supply_voltage / p.r;
        let expect = -e_over_r + (0.8 + e_over_r) * (-p.r * t / p.l_min).exp();
        assert_relative_eq!(state.i.a, expect, max_relative = 1e-9);
    }

    #[test]
    fn demagnetize_from_zero_current_stays_zero() {
        let p = params();
        let state = PlantState::at_rest(0.1, 3.0);
        let cfg = SwitchConfig::all_off();
        let next = step(&state, &cfg, LineContext::Tag, 1e-6, &p).unwrap();
        assert_eq!(next.i.a, 0.0);
        assert_eq!(next.i.b, 0.0);
        assert_eq!(next.i.c, 0.0);
    }

    #[test]
    fn energy_balance_for_lossless_ramp() {
        // r = 0, no drops, constant L: supply energy equals stored 1/2 L i^2.
        let mut p = params();
        p.r = 0.0;
        p.mechanics = MechanicalModel::ConstantSpeed;
        let mut state = PlantState::at_rest(5.0_f64.to_radians(), 0.0);
        let cfg = magnetize(PhaseId::A);
        let dt = 1e-6;
        let mut energy = 0.0;
        let mut prev_i = state.i.a;
        for _ in 0..1000 {
            state = step(&state, &cfg, LineContext::Payload, dt, &p).unwrap();
            energy += p.supply_voltage * 0.5 * (prev_i + state.i.a) * dt;
            prev_i = state.i.a;
        }
        let stored = 0.5 * p.l_min * state.i.a * state.i.a;
        assert_relative_eq!(energy, stored, max_relative = 1e-6);
    }

    #[test]
    fn torque_positive_on_rising_inductance() {
        let p = params();
        let mut state = PlantState::at_rest(30.0_f64.to_radians(), 0.0);
        state.i.a = 0.8;
        assert!(torque(&state, &p) > 0.0);
    }

    #[test]
    fn torque_negative_on_falling_inductance() {
        let p = params();
        let mut state = PlantState::at_rest(50.0_f64.to_radians(), 0.0);
        state.i.a = 0.8;
        assert!(torque(&state, &p) < 0.0);
    }

    // -- sensor ---------------------------------------------------------------

    #[test]
    fn sensor_tracks_excited_phase_during_payload() {
        let p = params();
        let _ = &p;
        let mut state = PlantState::at_rest(0.0, 0.0);
        state.i.b = 0.9;
        let cfg = magnetize(PhaseId::B);
        let r = sensor_current(&state, &cfg, LineContext::Payload);
        assert!(r.valid);
        assert_eq!(r.i_line, 0.9);
    }

    #[test]
    fn sensor_reads_zero_during_tag() {
        let mut state = PlantState::at_rest(0.0, 0.0);
        state.i.b = 0.9;
        let cfg = magnetize(PhaseId::B);
        let r = sensor_current(&state, &cfg, LineContext::Tag);
        assert!(!r.valid);
        assert_eq!(r.i_line, 0.0);
    }

    #[test]
    fn sensor_excludes_demagnetizing_tail() {
        // Phase A still carries tail current, phase B is excited: the sensor
        // must report only i_B.
        let mut state = PlantState::at_rest(0.0, 0.0);
        state.i.a = 0.4;
        state.i.b = 0.2;
        let cfg = magnetize(PhaseId::B);
        let r = sensor_current(&state, &cfg, LineContext::Payload);
        assert!(r.valid);
        assert_eq!(r.i_line, 0.2);
    }

    // -- properties -----------------------------------------------------------

    proptest! {
        #[test]
        fn inductance_is_periodic(theta_deg in -720.0..720.0f64, idx in 0usize..3) {
            let p = params();
            let ph = PhaseId::from_index(idx);
            let theta = theta_deg.to_radians();
            let period = p.period_deg().to_radians();
            let l0 = inductance(ph, theta, &p);
            let l1 = inductance(ph, theta + period, &p);
            prop_assert!((l0 - l1).abs() < 1e-9);
        }

        #[test]
        fn currents_stay_non_negative(
            i0 in 0.0..2.0f64,
            theta0 in 0.0..6.28f64,
            omega0 in 0.0..40.0f64,
            magnetized in any::<bool>(),
        ) {
            let p = params();
            let mut state = PlantState::at_rest(theta0, omega0);
            state.i.a = i0;
            let cfg = if magnetized { magnetize(PhaseId::A) } else { SwitchConfig::all_off() };
            for _ in 0..200 {
                state = step(&state, &cfg, LineContext::Payload, 1e-6, &p).unwrap();
                prop_assert!(state.i.a >= 0.0);
                prop_assert!(state.i.b >= 0.0);
                prop_assert!(state.i.c >= 0.0);
            }
        }
    }
}
