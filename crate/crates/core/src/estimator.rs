//! Vehicle-side sensorless intelligence.
//!
//! Three layers, all fed exclusively from the vehicle-side sensor plus the
//! controller's own packet context:
//!
//! 1. `reconstruct` assigns the line-sensor current to the phase the current
//!    payload excites; every other phase is estimated as zero and flagged
//!    invalid (tags in flight, demagnetizing tails).
//! 2. `slope_of_cycle` fits the current slope of one magnetizing payload.
//! 3. `detect_turnoff` watches the per-cycle slope sequence: during a
//!    conduction interval the slope falls while the inductance rises and
//!    starts rising once the rotor passes the aligned angle, since
//!    `m_n * L(theta_n)` is approximately constant for one interval. The
//!    detector fires on the first confirmed run of slope increases.
//!
//! Rotor angles are attached to slope entries for evaluation only; detection
//! itself sees nothing but the slope values.

use thiserror::Error;

use crate::controller::ControllerContext;
use crate::plant::SensorReading;

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

/// Per-phase current estimates for one sample instant. At most one phase is
/// valid; non-active phases are estimated as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionSample {
    pub t: f64,
    /// Estimates indexed by phase (A, B, C), in amperes.
    pub est: [f64; 3],
    pub valid: [bool; 3],
}

/// Map one sensor reading onto per-phase estimates using the controller's
/// packet context. Valid only while payload power is on the line and the
/// sensor loop carries the excited winding's current.
pub fn reconstruct(reading: &SensorReading, ctx: &ControllerContext, t: f64) -> ReconstructionSample {
    let mut est = [0.0; 3];
    let mut valid = [false; 3];
    if reading.valid && ctx.in_payload {
        let k = ctx.active_phase.index();
        est[k] = reading.i_line;
        valid[k] = true;
    }
    ReconstructionSample { t, est, valid }
}

// ---------------------------------------------------------------------------
// Slope of one magnetizing cycle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SlopeError {
    #[error("magnetizing cycle has {got} valid samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
}

/// How the per-cycle slope is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeMethod {
    /// Least-squares fit over the cycle with the endpoints trimmed; robust to
    /// switching transients at the band edges.
    LeastSquares,
    /// Central difference around the reference-current crossing.
    PointSlope,
}

#[derive(Debug, Clone)]
pub struct SlopeConfig {
    pub method: SlopeMethod,
    /// Fraction of samples dropped at each end before fitting.
    pub trim_fraction: f64,
    /// Reference current whose crossing timestamps the cycle.
    pub i_ref: f64,
}

impl Default for SlopeConfig {
    fn default() -> Self {
        SlopeConfig {
            method: SlopeMethod::LeastSquares,
            trim_fraction: 0.1,
            i_ref: 0.8,
        }
    }
}

pub const MIN_CYCLE_SAMPLES: usize = 4;

/// Fit the current slope (A/s) of one magnetizing payload from its
/// `(t, i)` samples.
pub fn slope_of_cycle(samples: &[(f64, f64)], cfg: &SlopeConfig) -> Result<f64, SlopeError> {
    let n = samples.len();
    if n < MIN_CYCLE_SAMPLES {
        return Err(SlopeError::TooFewSamples { got: n, need: MIN_CYCLE_SAMPLES });
    }
    match cfg.method {
        SlopeMethod::LeastSquares => {
            let trim = ((n as f64) * cfg.trim_fraction) as usize;
            let window = &samples[trim..n - trim];
            Ok(least_squares_slope(window))
        }
        SlopeMethod::PointSlope => {
            let k = samples
                .iter()
                .position(|&(_, i)| i >= cfg.i_ref)
                .unwrap_or(n / 2);
            let w = (n / 20).max(1);
            let lo = k.saturating_sub(w);
            let hi = (k + w).min(n - 1);
            let (t0, i0) = samples[lo];
            let (t1, i1) = samples[hi];
            if t1 == t0 {
                return Err(SlopeError::TooFewSamples { got: 1, need: MIN_CYCLE_SAMPLES });
            }
            Ok((i1 - i0) / (t1 - t0))
        }
    }
}

fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let t_mean = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let i_mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, i) in samples {
        let dt = t - t_mean;
        num += dt * (i - i_mean);
        den += dt * dt;
    }
    num / den
}

// ---------------------------------------------------------------------------
// Slope sequence and turn-off detection
// ---------------------------------------------------------------------------

/// One completed magnetizing cycle of the active phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEntry {
    /// Cycle index within the current conduction interval.
    pub index: usize,
    /// Fitted current slope (A/s).
    pub slope: f64,
    /// Time of the reference-current crossing within the cycle (s).
    pub t_ref: f64,
    /// Ground-truth rotor angle at `t_ref` (deg, unwrapped). Attached for
    /// evaluation only; never read by the detector.
    pub theta_ref_deg: f64,
}

/// Slope history of the current conduction interval; cleared at commutation.
#[derive(Debug, Clone, Default)]
pub struct SlopeSequence {
    pub entries: Vec<SlopeEntry>,
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Cycles ignored at the start of each conduction interval.
    pub guard_cycles: usize,
    /// Number of consecutive slope increases required.
    pub confirm_count: usize,
    /// Relative margin an increase must clear.
    pub rel_epsilon: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { guard_cycles: 3, confirm_count: 2, rel_epsilon: 0.02 }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.guard_cycles < 1 {
            return Err("guard_cycles must be at least 1".into());
        }
        if self.confirm_count < 1 {
            return Err("confirm_count must be at least 1".into());
        }
        if self.rel_epsilon < 0.0 {
            return Err("rel_epsilon must be non-negative".into());
        }
        Ok(())
    }
}

/// Turn-off detection over a slope sequence.
///
/// Returns `(base, fired)` for the first index `base >= guard_cycles` such
/// that the following `confirm_count` steps are all relative increases:
/// `m[k+1] > m[k] * (1 + rel_epsilon)`. `base` is the cycle at the slope
/// minimum, i.e. the detector's estimate of the aligned-angle cycle;
/// `fired = base + confirm_count` is the cycle whose end makes the detection
/// actionable.
pub fn detect_turnoff(slopes: &[f64], cfg: &DetectorConfig) -> Option<(usize, usize)> {
    if slopes.len() <= cfg.guard_cycles + cfg.confirm_count {
        return None;
    }
    for base in cfg.guard_cycles..slopes.len() - cfg.confirm_count {
        let confirmed = (base..base + cfg.confirm_count)
            .all(|k| slopes[k + 1] > slopes[k] * (1.0 + cfg.rel_epsilon));
        if confirmed {
            return Some((base, base + cfg.confirm_count));
        }
    }
    None
}

/// A fired turn-off detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    /// Index of the slope-minimum cycle (the estimated aligned-angle cycle).
    pub base_index: usize,
    /// Index of the confirming cycle; the event fires at its end.
    pub fired_index: usize,
    /// Time at which the event fired (end of the confirming cycle).
    pub t: f64,
    /// Ground-truth angle at the base cycle's reference crossing (deg,
    /// unwrapped). Evaluation only.
    pub base_theta_deg: f64,
    /// Ground-truth angle when the event fired (deg, unwrapped). Evaluation
    /// only.
    pub event_theta_deg: f64,
}

// ---------------------------------------------------------------------------
// Incremental estimator driving the pieces above
// ---------------------------------------------------------------------------

/// Per-simulation estimator: accumulates magnetizing-payload samples, closes
/// cycles into slope entries, and runs turn-off detection. One detection is
/// reported per conduction interval; `reset_conduction` clears everything at
/// commutation.
#[derive(Debug)]
pub struct Estimator {
    slope_cfg: SlopeConfig,
    det_cfg: DetectorConfig,
    seq: SlopeSequence,
    cycle: Vec<(f64, f64, f64)>, // (t, i, theta_truth_deg)
    fired: bool,
}

impl Estimator {
    pub fn new(slope_cfg: SlopeConfig, det_cfg: DetectorConfig) -> Self {
        Estimator {
            slope_cfg,
            det_cfg,
            seq: SlopeSequence::default(),
            cycle: Vec::with_capacity(4096),
            fired: false,
        }
    }

    pub fn sequence(&self) -> &SlopeSequence {
        &self.seq
    }

    /// Accumulate one valid sample of a magnetizing payload.
    /// `theta_truth_deg` is carried for evaluation only.
    pub fn push_magnetizing_sample(&mut self, t: f64, i: f64, theta_truth_deg: f64) {
        self.cycle.push((t, i, theta_truth_deg));
    }

    /// Close the current magnetizing cycle (its footer just began). Returns
    /// the new slope entry, if the cycle had enough samples, and a detection
    /// event if this entry confirmed one.
    pub fn close_magnetizing_cycle(
        &mut self,
        t_end: f64,
        theta_truth_deg: f64,
    ) -> (Option<SlopeEntry>, Option<DetectionEvent>) {
        let entry = match slope_of_cycle(
            &self.cycle.iter().map(|&(t, i, _)| (t, i)).collect::<Vec<_>>(),
            &self.slope_cfg,
        ) {
            Ok(slope) => {
                let (t_ref, theta_ref_deg) = self.reference_crossing();
                let entry = SlopeEntry {
                    index: self.seq.entries.len(),
                    slope,
                    t_ref,
                    theta_ref_deg,
                };
                self.seq.entries.push(entry);
                Some(entry)
            }
            Err(SlopeError::TooFewSamples { .. }) => None,
        };
        self.cycle.clear();

        let mut event = None;
        if entry.is_some() && !self.fired {
            let slopes: Vec<f64> = self.seq.entries.iter().map(|e| e.slope).collect();
            if let Some((base, fired)) = detect_turnoff(&slopes, &self.det_cfg) {
                self.fired = true;
                event = Some(DetectionEvent {
                    base_index: base,
                    fired_index: fired,
                    t: t_end,
                    base_theta_deg: self.seq.entries[base].theta_ref_deg,
                    event_theta_deg: theta_truth_deg,
                });
            }
        }
        (entry, event)
    }

    /// Commutation: drop the slope history and any partial cycle.
    pub fn reset_conduction(&mut self) {
        self.seq.entries.clear();
        self.cycle.clear();
        self.fired = false;
    }

    fn reference_crossing(&self) -> (f64, f64) {
        let hit = self
            .cycle
            .iter()
            .find(|&&(_, i, _)| i >= self.slope_cfg.i_ref)
            .or_else(|| self.cycle.get(self.cycle.len() / 2))
            .expect("cycle has samples");
        (hit.0, hit.2)
    }
}
