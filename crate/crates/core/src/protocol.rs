//! Power-packet information tags: drive command codes, header/footer framing,
//! footer detection, and an optional bit-read fault model.
//!
//! A packet on the line is `header | payload | footer`. The header occupies
//! four bit slots: a HIGH start bit followed by a 3-bit drive command. The
//! footer is four LOW bit slots. Each slot lasts `t_bit` seconds and the line
//! holds one voltage level per slot.
//!
//! Command table (code -> command):
//!
//! ```text
//! 000  invalid          100  magnetize B
//! 001  invalid          101  freewheel B
//! 010  magnetize A      110  magnetize C
//! 011  freewheel A      111  freewheel C
//! ```
//!
//! The LSB selects the mode (0 = magnetize, 1 = freewheel), the upper two
//! bits select the phase. Codes 000 and 001 are reserved so that a header
//! never degenerates into a run of LOW bits that could mimic a footer.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Number of bit slots in a header or footer frame.
pub const FRAME_BITS: usize = 4;

/// Number of consecutive LOW bit slots that terminate a packet.
pub const FOOTER_BITS: u32 = 4;

// ---------------------------------------------------------------------------
// Phases and commands
// ---------------------------------------------------------------------------

/// Motor phase identifier. The ordering A -> B -> C -> A is cyclic in the
/// rotation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseId {
    A,
    B,
    C,
}

impl PhaseId {
    pub const ALL: [PhaseId; 3] = [PhaseId::A, PhaseId::B, PhaseId::C];

    /// Next phase in the rotation direction.
    pub fn successor(self) -> PhaseId {
        match self {
            PhaseId::A => PhaseId::B,
            PhaseId::B => PhaseId::C,
            PhaseId::C => PhaseId::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            PhaseId::A => 0,
            PhaseId::B => 1,
            PhaseId::C => 2,
        }
    }

    pub fn from_index(idx: usize) -> PhaseId {
        Self::ALL[idx % 3]
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            PhaseId::A => 'A',
            PhaseId::B => 'B',
            PhaseId::C => 'C',
        };
        write!(f, "{c}")
    }
}

/// Container holding one value per phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PerPhase<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T> PerPhase<T> {
    pub fn from_fn(mut f: impl FnMut(PhaseId) -> T) -> Self {
        PerPhase {
            a: f(PhaseId::A),
            b: f(PhaseId::B),
            c: f(PhaseId::C),
        }
    }

    pub fn get(&self, p: PhaseId) -> &T {
        match p {
            PhaseId::A => &self.a,
            PhaseId::B => &self.b,
            PhaseId::C => &self.c,
        }
    }

    pub fn get_mut(&mut self, p: PhaseId) -> &mut T {
        match p {
            PhaseId::A => &mut self.a,
            PhaseId::B => &mut self.b,
            PhaseId::C => &mut self.c,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhaseId, &T)> {
        PhaseId::ALL.iter().map(move |&p| (p, self.get(p)))
    }
}

impl<T> std::ops::Index<PhaseId> for PerPhase<T> {
    type Output = T;
    fn index(&self, p: PhaseId) -> &T {
        self.get(p)
    }
}

impl<T> std::ops::IndexMut<PhaseId> for PerPhase<T> {
    fn index_mut(&mut self, p: PhaseId) -> &mut T {
        self.get_mut(p)
    }
}

/// Per-phase excitation mode of the output-stage converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationMode {
    Magnetize,
    Freewheel,
    Demagnetize,
}

/// Mode a drive command may carry. Demagnetization is the implied state of
/// every non-commanded phase and is never encoded in a header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandMode {
    Magnetize,
    Freewheel,
}

impl From<CommandMode> for ExcitationMode {
    fn from(m: CommandMode) -> ExcitationMode {
        match m {
            CommandMode::Magnetize => ExcitationMode::Magnetize,
            CommandMode::Freewheel => ExcitationMode::Freewheel,
        }
    }
}

/// Drive command carried in a packet header: one phase, one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PacketCommand {
    pub phase: PhaseId,
    pub mode: CommandMode,
}

impl PacketCommand {
    pub const ALL: [PacketCommand; 6] = [
        PacketCommand { phase: PhaseId::A, mode: CommandMode::Magnetize },
        PacketCommand { phase: PhaseId::A, mode: CommandMode::Freewheel },
        PacketCommand { phase: PhaseId::B, mode: CommandMode::Magnetize },
        PacketCommand { phase: PhaseId::B, mode: CommandMode::Freewheel },
        PacketCommand { phase: PhaseId::C, mode: CommandMode::Magnetize },
        PacketCommand { phase: PhaseId::C, mode: CommandMode::Freewheel },
    ];

    pub fn new(phase: PhaseId, mode: CommandMode) -> Self {
        PacketCommand { phase, mode }
    }
}

impl fmt::Display for PacketCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = match self.mode {
            CommandMode::Magnetize => "magnetize",
            CommandMode::Freewheel => "freewheel",
        };
        write!(f, "{verb} {}", self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProtocolError {
    /// One of the two reserved 3-bit codes was read from a header.
    #[error("invalid command code {0:03b}")]
    InvalidCode(u8),
}

/// Encode a drive command into its 3-bit code.
pub fn encode_command(cmd: PacketCommand) -> u8 {
    let phase_bits = (cmd.phase.index() as u8 + 1) << 1;
    let mode_bit = match cmd.mode {
        CommandMode::Magnetize => 0,
        CommandMode::Freewheel => 1,
    };
    phase_bits | mode_bit
}

/// Decode a 3-bit code read from header bits 1..=3.
///
/// Codes `000` and `001` signal a corrupted tag; the module-side router must
/// hold its previous switch state when this error is returned.
pub fn decode_command(code: u8) -> Result<PacketCommand, ProtocolError> {
    debug_assert!(code < 8, "command codes are 3 bits");
    if code < 2 {
        return Err(ProtocolError::InvalidCode(code));
    }
    let phase = PhaseId::from_index((code >> 1) as usize - 1);
    let mode = if code & 1 == 0 {
        CommandMode::Magnetize
    } else {
        CommandMode::Freewheel
    };
    Ok(PacketCommand { phase, mode })
}

/// The 3-bit code as levels, most significant bit first.
pub fn code_bits(code: u8) -> [bool; 3] {
    [code & 0b100 != 0, code & 0b010 != 0, code & 0b001 != 0]
}

/// Full code table, for documentation dumps. Reserved codes map to `None`.
pub fn command_table() -> [(u8, Option<PacketCommand>); 8] {
    let mut table = [(0u8, None); 8];
    for (code, entry) in table.iter_mut().enumerate() {
        *entry = (code as u8, decode_command(code as u8).ok());
    }
    table
}

// ---------------------------------------------------------------------------
// Frames and line levels
// ---------------------------------------------------------------------------

/// Voltage level of the line during one bit slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineLevel {
    High,
    Low,
}

impl LineLevel {
    pub fn is_high(self) -> bool {
        matches!(self, LineLevel::High)
    }

    pub fn from_bool(high: bool) -> LineLevel {
        if high {
            LineLevel::High
        } else {
            LineLevel::Low
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Header,
    Footer,
}

/// A 4-bit tag frame. Header bit 0 is always the HIGH start bit; a footer is
/// all LOW.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagFrame {
    pub kind: FrameKind,
    pub bits: [bool; FRAME_BITS],
}

impl TagFrame {
    pub fn level(&self, bit: usize) -> LineLevel {
        LineLevel::from_bool(self.bits[bit])
    }
}

/// Build the header frame for a command: start bit plus the 3-bit code.
pub fn frame_header(cmd: PacketCommand) -> TagFrame {
    let b = code_bits(encode_command(cmd));
    TagFrame {
        kind: FrameKind::Header,
        bits: [true, b[0], b[1], b[2]],
    }
}

/// The footer frame, `0000` regardless of command.
pub fn footer_frame() -> TagFrame {
    TagFrame {
        kind: FrameKind::Footer,
        bits: [false; FRAME_BITS],
    }
}

// ---------------------------------------------------------------------------
// Footer detection
// ---------------------------------------------------------------------------

/// Detects the packet-end condition: four consecutive LOW bit slots.
///
/// Fed one sample per bit slot (midpoint-sampled by the caller). Emits an
/// event on the fourth consecutive LOW and keeps emitting on every further
/// LOW slot of a stuck line; consumers treat repeats idempotently.
#[derive(Debug, Clone, Default)]
pub struct FooterDetector {
    low_run: u32,
}

impl FooterDetector {
    pub fn new() -> Self {
        FooterDetector { low_run: 0 }
    }

    /// Feed one bit-slot sample. Returns `true` when the footer-end condition
    /// holds at this slot.
    pub fn on_slot(&mut self, level: LineLevel) -> bool {
        match level {
            LineLevel::High => {
                self.low_run = 0;
                false
            }
            LineLevel::Low => {
                self.low_run = self.low_run.saturating_add(1);
                self.low_run >= FOOTER_BITS
            }
        }
    }

    pub fn reset(&mut self) {
        self.low_run = 0;
    }
}

// ---------------------------------------------------------------------------
// Bit-read fault model
// ---------------------------------------------------------------------------

/// Flips each sampled bit with a fixed probability, between the line and the
/// reader. Probability 0 draws nothing and is the noise-free default.
#[derive(Debug, Clone)]
pub struct BitFlipChannel {
    prob: f64,
    rng: ChaCha8Rng,
}

impl BitFlipChannel {
    pub fn new(prob: f64, rng: ChaCha8Rng) -> Self {
        assert!((0.0..=1.0).contains(&prob), "flip probability in [0, 1]");
        BitFlipChannel { prob, rng }
    }

    pub fn corrupt(&mut self, level: LineLevel) -> LineLevel {
        if self.prob > 0.0 && self.rng.gen::<f64>() < self.prob {
            match level {
                LineLevel::High => LineLevel::Low,
                LineLevel::Low => LineLevel::High,
            }
        } else {
            level
        }
    }
}
