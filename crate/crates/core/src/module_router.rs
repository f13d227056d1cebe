//! Passive module-side router.
//!
//! The module sees nothing but the line voltage. A small state machine reads
//! tag bits (one midpoint sample per bit slot, slots anchored to the observed
//! edges), latches drive commands, and maps them to per-phase switch states:
//!
//! * `magnetize X`: leg X upper and lower ON, other legs OFF
//! * `freewheel X`: leg X upper ON, other legs OFF
//! * after footer end, through the next header: the latched leg keeps its
//!   upper switch ON so the winding current circulates during tag bits
//!
//! The router holds each gate state until the footer-end condition is read.
//! An unreadable command code leaves the outputs untouched. There is no
//! access of any kind to plant state; the only input is the line level.

use crate::protocol::{
    decode_command, BitFlipChannel, CommandMode, FooterDetector, LineLevel, PacketCommand,
    PerPhase, FRAME_BITS,
};
use crate::plant::SwitchPair;

/// Event surfaced by the router for tracing; the router itself acts on
/// everything internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouterEvent {
    CommandLatched(PacketCommand),
    InvalidHeader(u8),
    FooterEnd,
}

#[derive(Debug, Clone)]
enum Fsm {
    /// Waiting for a start bit. Outputs hold their tag-period state.
    Idle,
    /// Start bit seen at `anchor`; sampling command bits at slot midpoints.
    ReadingHeader {
        anchor: f64,
        next_bit: usize,
        bits: [bool; FRAME_BITS - 1],
    },
    /// Command latched; watching for the footer.
    Payload {
        footer_anchor: Option<f64>,
        next_slot: usize,
    },
}

#[derive(Debug)]
pub struct ModuleRouter {
    t_bit: f64,
    fsm: Fsm,
    latched: Option<PacketCommand>,
    outputs: PerPhase<SwitchPair>,
    footer: FooterDetector,
    channel: BitFlipChannel,
}

impl ModuleRouter {
    pub fn new(t_bit: f64, channel: BitFlipChannel) -> Self {
        assert!(t_bit > 0.0);
        ModuleRouter {
            t_bit,
            fsm: Fsm::Idle,
            latched: None,
            outputs: PerPhase::default(),
            footer: FooterDetector::new(),
            channel,
        }
    }

    /// Current gate outputs, one switch pair per phase.
    pub fn outputs(&self) -> PerPhase<SwitchPair> {
        self.outputs
    }

    /// Command currently latched, if any.
    pub fn latched(&self) -> Option<PacketCommand> {
        self.latched
    }

    /// Numeric code of the latched command for traces; -1 when none.
    pub fn latched_code(&self) -> i8 {
        self.latched
            .map(|c| crate::protocol::encode_command(c) as i8)
            .unwrap_or(-1)
    }

    /// Feed the line level observed over the simulation step starting at `t`.
    /// Must be called once per step, with steps no longer than a quarter bit
    /// slot.
    pub fn on_line_sample(&mut self, t: f64, level: LineLevel) -> Option<RouterEvent> {
        match &mut self.fsm {
            Fsm::Idle => {
                if level.is_high() {
                    // Rising edge anchors the header's bit-slot grid; the
                    // start bit itself is implied by the edge.
                    self.fsm = Fsm::ReadingHeader {
                        anchor: t,
                        next_bit: 1,
                        bits: [false; FRAME_BITS - 1],
                    };
                }
                None
            }
            Fsm::ReadingHeader { anchor, next_bit, bits } => {
                let midpoint = (*next_bit as f64 + 0.5) * self.t_bit;
                if t - *anchor < midpoint {
                    return None;
                }
                bits[*next_bit - 1] = self.channel.corrupt(level).is_high();
                *next_bit += 1;
                if *next_bit < FRAME_BITS {
                    return None;
                }
                let code = (bits[0] as u8) << 2 | (bits[1] as u8) << 1 | bits[2] as u8;
                match decode_command(code) {
                    Ok(cmd) => {
                        self.latched = Some(cmd);
                        self.outputs = payload_outputs(cmd);
                        self.footer.reset();
                        self.fsm = Fsm::Payload { footer_anchor: None, next_slot: 0 };
                        Some(RouterEvent::CommandLatched(cmd))
                    }
                    Err(_) => {
                        // Unreadable tag: hold the previous gate state.
                        self.fsm = Fsm::Idle;
                        Some(RouterEvent::InvalidHeader(code))
                    }
                }
            }
            Fsm::Payload { footer_anchor, next_slot } => {
                match footer_anchor {
                    None => {
                        if !level.is_high() {
                            // Falling edge re-anchors the slot grid for the
                            // footer bits.
                            *footer_anchor = Some(t);
                            *next_slot = 0;
                        }
                        None
                    }
                    Some(anchor) => {
                        let midpoint = (*next_slot as f64 + 0.5) * self.t_bit;
                        if t - *anchor < midpoint {
                            return None;
                        }
                        *next_slot += 1;
                        let sample = self.channel.corrupt(level);
                        if sample.is_high() {
                            // Spurious dip; back to payload watching.
                            self.footer.reset();
                            *footer_anchor = None;
                            None
                        } else if self.footer.on_slot(sample) {
                            self.on_footer_end();
                            Some(RouterEvent::FooterEnd)
                        } else {
                            None
                        }
                    }
                }
            }
        }
    }

    /// Packet end: move the latched leg onto the tag-period freewheel path
    /// and await the next header. Safe to call repeatedly.
    pub fn on_footer_end(&mut self) {
        self.outputs = tag_period_outputs(self.latched);
        self.footer.reset();
        self.fsm = Fsm::Idle;
    }
}

fn payload_outputs(cmd: PacketCommand) -> PerPhase<SwitchPair> {
    let mut out = PerPhase::<SwitchPair>::default();
    out[cmd.phase] = SwitchPair {
        upper: true,
        lower: cmd.mode == CommandMode::Magnetize,
    };
    out
}

fn tag_period_outputs(latched: Option<PacketCommand>) -> PerPhase<SwitchPair> {
    let mut out = PerPhase::<SwitchPair>::default();
    if let Some(cmd) = latched {
        out[cmd.phase] = SwitchPair { upper: true, lower: false };
    }
    out
}
