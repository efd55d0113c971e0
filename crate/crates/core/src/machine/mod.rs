//! A small self-delimiting bytecode machine used as the reference prefix-free
//! computer.
//!
//! The machine reads its program tape strictly left to right, one bit at a
//! time, and only when the instruction pointer reaches an instruction it has
//! not decoded yet. Whether it halts therefore depends only on the bits it has
//! read, so the set of programs that halt after consuming exactly their own
//! length is prefix-free.
//!
//! Encoding: a 3-bit opcode, followed by Elias-gamma operands where noted.
//!
//! | code | instruction                | operands          | cost        |
//! |------|----------------------------|-------------------|-------------|
//! | 000  | `HALT`                     |                   | 1           |
//! | 001  | `LITERAL` (append, halt)   | γ(len+1), payload | 1 + len     |
//! | 010  | `APPEND0`                  |                   | 1           |
//! | 011  | `APPEND1`                  |                   | 1           |
//! | 100  | `DUP` (tape := tape tape)  |                   | 1 + \|tape\| |
//! | 101  | `NOOP`                     |                   | 1           |
//! | 110  | `JUMP` back                | γ(k)              | 1           |
//! | 111  | `JUMP_IF_SHORTER` back     | γ(k), γ(n)        | 1           |
//!
//! Jumps go to instruction `ip - (k - 1)`; a target before the first
//! instruction is a decode error. `JUMP_IF_SHORTER` jumps when the work tape
//! is shorter than `n`. The output is the work tape at halt.

mod table;

use std::collections::HashSet;

pub use table::{
    enumerate, enumerate_resume, kraft_sum, prefix_free_check, ComplexityTable, EnumerateLimits, HaltRecord,
};

use crate::ait::codec::BitString;

const OPCODE_BITS: u8 = 3;
/// Gamma codes with more leading zeros than this cannot fit a `u64`.
const MAX_GAMMA_ZEROS: u32 = 62;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Halt,
    Literal(Vec<bool>),
    Append(bool),
    Dup,
    Noop,
    Jump { back: u64 },
    JumpIfShorter { back: u64, len: u64 },
}

impl Op {
    fn opcode(&self) -> u8 {
        match self {
            Op::Halt => 0,
            Op::Literal(_) => 1,
            Op::Append(false) => 2,
            Op::Append(true) => 3,
            Op::Dup => 4,
            Op::Noop => 5,
            Op::Jump { .. } => 6,
            Op::JumpIfShorter { .. } => 7,
        }
    }

    fn encode_into(&self, out: &mut Vec<bool>) {
        let code = self.opcode();
        for i in (0..OPCODE_BITS).rev() {
            out.push(code >> i & 1 == 1);
        }
        match self {
            Op::Literal(payload) => {
                gamma_encode(payload.len() as u64 + 1, out);
                out.extend_from_slice(payload);
            }
            Op::Jump { back } => gamma_encode(*back, out),
            Op::JumpIfShorter { back, len } => {
                gamma_encode(*back, out);
                gamma_encode(*len, out);
            }
            _ => {}
        }
    }
}

/// Elias gamma code of `n >= 1`.
pub fn gamma_encode(n: u64, out: &mut Vec<bool>) {
    assert!(n >= 1, "gamma code needs a positive integer");
    let width = 64 - n.leading_zeros();
    out.extend(std::iter::repeat(false).take(width as usize - 1));
    for i in (0..width).rev() {
        out.push(n >> i & 1 == 1);
    }
}

/// Serializes a sequence of instructions into a program.
pub fn assemble(ops: &[Op]) -> BitString {
    let mut bits = Vec::new();
    for op in ops {
        op.encode_into(&mut bits);
    }
    BitString::from_bits(&bits)
}

/// The program `LITERAL s`, which halts with output `s`.
pub fn literal_program(s: &BitString) -> BitString {
    assemble(&[Op::Literal(s.bits().collect())])
}

/// `JUMP 1`: an instruction that jumps to itself forever.
pub fn diverging_program() -> BitString {
    assemble(&[Op::Jump { back: 1 }])
}

/// Why a program cannot halt on exactly its own bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvalidReason {
    /// The decoder needs more bits than the program has.
    Truncated,
    /// A jump targets an instruction before the start.
    BadJumpTarget,
    /// A gamma operand is too long to represent.
    OperandOverflow,
    /// The machine halted before reading every bit.
    TrailingBits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: BitString, steps: u64 },
    StillRunning,
    InvalidProgram(InvalidReason),
}

#[derive(Clone, Debug, Default)]
struct GammaReader {
    zeros: u32,
    value: Option<u64>,
    remaining: u32,
}

impl GammaReader {
    /// Returns the decoded value once complete.
    fn push(&mut self, bit: bool) -> Result<Option<u64>, InvalidReason> {
        match self.value {
            None if !bit => {
                self.zeros += 1;
                if self.zeros > MAX_GAMMA_ZEROS {
                    return Err(InvalidReason::OperandOverflow);
                }
                Ok(None)
            }
            None => {
                self.value = Some(1);
                self.remaining = self.zeros;
                Ok((self.remaining == 0).then_some(1))
            }
            Some(v) => {
                let v = v << 1 | u64::from(bit);
                self.value = Some(v);
                self.remaining -= 1;
                Ok((self.remaining == 0).then_some(v))
            }
        }
    }
}

/// Partially decoded instruction.
#[derive(Clone, Debug, Default)]
struct Pending {
    opcode: u8,
    opcode_bits: u8,
    operands: Vec<u64>,
    gamma: GammaReader,
    payload: Vec<bool>,
}

impl Pending {
    fn operands_needed(opcode: u8) -> usize {
        match opcode {
            1 | 6 => 1,
            7 => 2,
            _ => 0,
        }
    }

    /// Feeds one bit; returns the instruction once it is complete.
    fn push(&mut self, bit: bool) -> Result<Option<Op>, InvalidReason> {
        if self.opcode_bits < OPCODE_BITS {
            self.opcode = self.opcode << 1 | u8::from(bit);
            self.opcode_bits += 1;
            if self.opcode_bits < OPCODE_BITS || Self::operands_needed(self.opcode) > 0 {
                return Ok(None);
            }
            return Ok(Some(self.finish()));
        }
        if self.operands.len() < Self::operands_needed(self.opcode) {
            if let Some(v) = self.gamma.push(bit)? {
                self.operands.push(v);
                self.gamma = GammaReader::default();
                if self.operands.len() == Self::operands_needed(self.opcode) && !self.wants_payload() {
                    return Ok(Some(self.finish()));
                }
            }
            return Ok(None);
        }
        self.payload.push(bit);
        if self.wants_payload() {
            Ok(None)
        } else {
            Ok(Some(self.finish()))
        }
    }

    fn wants_payload(&self) -> bool {
        self.opcode == 1 && (self.payload.len() as u64) < self.operands[0] - 1
    }

    fn finish(&mut self) -> Op {
        let p = std::mem::take(self);
        match p.opcode {
            0 => Op::Halt,
            1 => Op::Literal(p.payload),
            2 => Op::Append(false),
            3 => Op::Append(true),
            4 => Op::Dup,
            5 => Op::Noop,
            6 => Op::Jump { back: p.operands[0] },
            _ => Op::JumpIfShorter { back: p.operands[0], len: p.operands[1] },
        }
    }
}

/// What the machine is waiting on after [`Machine::advance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    NeedBit,
    Halted,
    /// Provably never halts: an unconditional jump ran, or a conditional
    /// jump repeated with an unchanged work tape.
    Diverged,
    OutOfSteps,
}

/// Resumable machine state. Cloning it forks the computation, which is how
/// the enumerator explores the program tree.
#[derive(Clone, Debug, Default)]
pub struct Machine {
    program: Vec<Op>,
    pending: Pending,
    ip: usize,
    tape: Vec<bool>,
    steps: u64,
    consumed: usize,
    loop_states: HashSet<(usize, usize)>,
    halted: bool,
}

impl Machine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn output(&self) -> BitString {
        BitString::from_bits(&self.tape)
    }

    /// Feeds the next program bit. Only valid while the machine reports
    /// [`Status::NeedBit`].
    pub fn push_bit(&mut self, bit: bool) -> Result<(), InvalidReason> {
        self.consumed += 1;
        if let Some(op) = self.pending.push(bit)? {
            let index = self.program.len() as u64;
            let back = match op {
                Op::Jump { back } | Op::JumpIfShorter { back, .. } => Some(back),
                _ => None,
            };
            if back.is_some_and(|k| k - 1 > index) {
                return Err(InvalidReason::BadJumpTarget);
            }
            self.program.push(op);
        }
        Ok(())
    }

    fn charge(&mut self, cost: u64, max_steps: u64) -> bool {
        if self.steps + cost > max_steps {
            return false;
        }
        self.steps += cost;
        true
    }

    /// Runs until the machine halts, needs another program bit, provably
    /// diverges, or would exceed `max_steps`.
    pub fn advance(&mut self, max_steps: u64) -> Status {
        if self.halted {
            return Status::Halted;
        }
        loop {
            if self.ip == self.program.len() {
                return Status::NeedBit;
            }
            let tape_len = self.tape.len() as u64;
            let op = &self.program[self.ip];
            let cost = match op {
                Op::Literal(p) => 1 + p.len() as u64,
                Op::Dup => 1 + tape_len,
                _ => 1,
            };
            if !self.charge(cost, max_steps) {
                return Status::OutOfSteps;
            }
            match self.program[self.ip].clone() {
                Op::Halt => {
                    self.halted = true;
                    return Status::Halted;
                }
                Op::Literal(p) => {
                    self.tape.extend_from_slice(&p);
                    self.halted = true;
                    return Status::Halted;
                }
                Op::Append(b) => {
                    self.tape.push(b);
                    self.ip += 1;
                }
                Op::Dup => {
                    self.tape.extend_from_within(..);
                    self.ip += 1;
                }
                Op::Noop => self.ip += 1,
                Op::Jump { .. } => return Status::Diverged,
                Op::JumpIfShorter { back, len } => {
                    if tape_len < len {
                        if !self.loop_states.insert((self.ip, self.tape.len())) {
                            return Status::Diverged;
                        }
                        self.ip -= (back - 1) as usize;
                    } else {
                        self.ip += 1;
                    }
                }
            }
        }
    }
}

/// Runs `program` for at most `max_steps` steps.
pub fn run(program: &BitString, max_steps: u64) -> RunOutcome {
    let mut m = Machine::new();
    for bit in program.bits() {
        match m.advance(max_steps) {
            Status::NeedBit => {}
            Status::Halted => return RunOutcome::InvalidProgram(InvalidReason::TrailingBits),
            Status::Diverged | Status::OutOfSteps => return RunOutcome::StillRunning,
        }
        if let Err(reason) = m.push_bit(bit) {
            return RunOutcome::InvalidProgram(reason);
        }
    }
    match m.advance(max_steps) {
        Status::Halted => RunOutcome::Halted { output: m.output(), steps: m.steps() },
        Status::NeedBit => RunOutcome::InvalidProgram(InvalidReason::Truncated),
        Status::Diverged | Status::OutOfSteps => RunOutcome::StillRunning,
    }
}
