//! Vehicle-side router controller.
//!
//! Owns the line: emits `header | payload | footer` sequences by toggling the
//! line switches S1/S2 (HIGH = S1 on, LOW = S2 on, payload = S1 held on) and
//! decides each header's command by hysteresis control over the reconstructed
//! current.
//!
//! Within a conduction interval the command alternates between `magnetize X`
//! and `freewheel X`: the footer of a magnetizing payload is sent at the
//! first sample at or above the upper band, the footer of a freewheeling
//! (empty) payload at the first sample at or below the lower band. Each
//! header's command is fixed from the previous payload's measurements; no
//! decision is taken while tag bits are in flight.
//!
//! Commutation requests (from the ground-truth angle watcher or from the
//! turn-off detector) are latched and executed at the next header boundary so
//! that the emitted sequence is always header, payload, footer, header, ...
//! A request arriving mid-payload forces the footer on the next step; a
//! request arriving during a tag lets the tag finish and rewrites the next
//! header. A payload always lasts at least one step, so a footer can never
//! pre-empt its header.

use crate::estimator::ReconstructionSample;
use crate::plant::LineContext;
use crate::protocol::{
    frame_header, CommandMode, LineLevel, PacketCommand, PhaseId, TagFrame, FRAME_BITS,
};

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    /// Hysteresis target current (A).
    pub i_ref: f64,
    /// Hysteresis half-band (A); the band is `i_ref +/- delta_i`.
    pub delta_i: f64,
    /// Tag bit-slot duration (s).
    pub t_bit: f64,
    /// Phase excited by the first packet.
    pub initial_phase: PhaseId,
}

/// Conduction submode: which payload type the controller is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Submode {
    Magnetizing,
    Freewheeling,
}

/// Where the line FSM is, for traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineFsmKind {
    Header,
    Payload,
    Footer,
}

#[derive(Debug, Clone)]
enum LineFsm {
    Header { frame: TagFrame, anchor: f64 },
    Payload { since: f64 },
    Footer { anchor: f64, next: PacketCommand },
}

/// Line drive for one simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineDrive {
    pub level: LineLevel,
    pub s1: bool,
    pub s2: bool,
    pub context: LineContext,
    pub fsm: LineFsmKind,
}

/// Events produced while advancing the line FSM.
#[derive(Debug, Clone, Copy, Default)]
pub struct DriveEvents {
    /// A new header started this step, carrying this command.
    pub packet_started: Option<PacketCommand>,
    /// A latched commutation took effect; the new active phase.
    pub commutation_executed: Option<PhaseId>,
    /// The line left a payload for a footer this step (band crossing or
    /// commutation).
    pub footer_started: bool,
}

/// Decision taken on one reconstructed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleAction {
    ContinuePayload,
    /// A footer begins on the next step. `closed_magnetizing` is true when it
    /// terminates a magnetizing payload, i.e. a slope cycle just completed.
    BeginFooter { closed_magnetizing: bool },
}

/// Controller knowledge handed to the reconstruction: which phase the current
/// packet excites and whether payload power is on the line.
#[derive(Debug, Clone, Copy)]
pub struct ControllerContext {
    pub active_phase: PhaseId,
    pub in_payload: bool,
    pub submode: Submode,
}

#[derive(Debug)]
pub struct VehicleController {
    cfg: ControllerConfig,
    active: PhaseId,
    submode: Submode,
    line: LineFsm,
    pending_commutation: bool,
}

impl VehicleController {
    /// Controller starting its first header (magnetize the initial phase) at
    /// time `t0`.
    pub fn new(cfg: ControllerConfig, t0: f64) -> Self {
        assert!(cfg.i_ref > cfg.delta_i && cfg.delta_i > 0.0);
        assert!(cfg.t_bit > 0.0);
        let first = PacketCommand::new(cfg.initial_phase, CommandMode::Magnetize);
        VehicleController {
            active: cfg.initial_phase,
            submode: Submode::Magnetizing,
            line: LineFsm::Header { frame: frame_header(first), anchor: t0 },
            pending_commutation: false,
            cfg,
        }
    }

    pub fn active_phase(&self) -> PhaseId {
        self.active
    }

    pub fn submode(&self) -> Submode {
        self.submode
    }

    pub fn context(&self) -> ControllerContext {
        ControllerContext {
            active_phase: self.active,
            in_payload: matches!(self.line, LineFsm::Payload { .. }),
            submode: self.submode,
        }
    }

    /// Request commutation to the successor phase. Takes effect at the next
    /// header boundary; idempotent until executed.
    pub fn commutate(&mut self) {
        self.pending_commutation = true;
    }

    /// Advance the line FSM to time `t` and return the drive for the step
    /// starting at `t`.
    pub fn drive(&mut self, t: f64) -> (LineDrive, DriveEvents) {
        let mut events = DriveEvents::default();
        let tag_len = FRAME_BITS as f64 * self.cfg.t_bit;
        loop {
            match &self.line {
                LineFsm::Header { anchor, .. } if t - *anchor >= tag_len => {
                    self.line = LineFsm::Payload { since: t };
                }
                LineFsm::Footer { anchor, next } if t - *anchor >= tag_len => {
                    let cmd = if self.pending_commutation {
                        self.pending_commutation = false;
                        self.active = self.active.successor();
                        self.submode = Submode::Magnetizing;
                        events.commutation_executed = Some(self.active);
                        PacketCommand::new(self.active, CommandMode::Magnetize)
                    } else {
                        *next
                    };
                    events.packet_started = Some(cmd);
                    self.line = LineFsm::Header { frame: frame_header(cmd), anchor: t };
                }
                LineFsm::Payload { since } if self.pending_commutation && t > *since => {
                    // Command content is irrelevant: the pending commutation
                    // rewrites it when the footer completes.
                    let next = PacketCommand::new(self.active, CommandMode::Magnetize);
                    self.line = LineFsm::Footer { anchor: t, next };
                    events.footer_started = true;
                }
                _ => break,
            }
        }

        let drive = match &self.line {
            LineFsm::Header { frame, anchor } => {
                let bit = (((t - anchor) / self.cfg.t_bit) as usize).min(FRAME_BITS - 1);
                let level = frame.level(bit);
                LineDrive {
                    level,
                    s1: level.is_high(),
                    s2: !level.is_high(),
                    context: LineContext::Tag,
                    fsm: LineFsmKind::Header,
                }
            }
            LineFsm::Payload { .. } => LineDrive {
                level: LineLevel::High,
                s1: true,
                s2: false,
                context: LineContext::Payload,
                fsm: LineFsmKind::Payload,
            },
            LineFsm::Footer { .. } => LineDrive {
                level: LineLevel::Low,
                s1: false,
                s2: true,
                context: LineContext::Tag,
                fsm: LineFsmKind::Footer,
            },
        };
        (drive, events)
    }

    /// Hysteresis decision on one reconstructed sample taken at time `t`.
    /// Invalid samples and samples outside a payload never trigger anything.
    pub fn on_sample(&mut self, est: &ReconstructionSample, t: f64) -> SampleAction {
        if !matches!(self.line, LineFsm::Payload { .. }) || self.pending_commutation {
            return SampleAction::ContinuePayload;
        }
        let idx = self.active.index();
        if !est.valid[idx] {
            return SampleAction::ContinuePayload;
        }
        let i = est.est[idx];
        match self.submode {
            Submode::Magnetizing if i >= self.cfg.i_ref + self.cfg.delta_i => {
                self.submode = Submode::Freewheeling;
                let next = PacketCommand::new(self.active, CommandMode::Freewheel);
                self.line = LineFsm::Footer { anchor: t, next };
                SampleAction::BeginFooter { closed_magnetizing: true }
            }
            Submode::Freewheeling if i <= self.cfg.i_ref - self.cfg.delta_i => {
                self.submode = Submode::Magnetizing;
                let next = PacketCommand::new(self.active, CommandMode::Magnetize);
                self.line = LineFsm::Footer { anchor: t, next };
                SampleAction::BeginFooter { closed_magnetizing: false }
            }
            _ => SampleAction::ContinuePayload,
        }
    }
}
