//! Byte layouts of the AODV control messages.
//!
//! All multi-byte fields are big-endian. The first byte is the message type
//! (RREQ = 1, RREP = 2, RERR = 3). Reserved bits are sent as zero and ignored
//! on receipt.
//!
//! ```text
//! RREQ   |type=1|J R G D U 0 0 0|reserved|hop count|  rreq id | dest | dest seq | orig | orig seq | [cost]
//! RREP   |type=2|R A 0 0 0 0 0 0|0 0 0 prefix(5)|hop count| dest | dest seq | orig | lifetime | [cost]
//! RERR   |type=3|N 0 0 0 0 0 0 0|reserved|dest count| (unreachable addr, unreachable seq) * count
//! ```
//!
//! The distance-cost routing variant appends one trailing 32-bit word to RREQ
//! and RREP holding the accumulated path cost in millimeters. Baseline
//! decoders never see it: a trailing word on a message is only accepted when
//! it is exactly one word long.
//!
//! Hello messages travel as an RREP whose destination and originator are both
//! the sender, with hop count zero.

use alloc::vec::Vec;
use core::fmt;

pub const TYPE_RREQ: u8 = 1;
pub const TYPE_RREP: u8 = 2;
pub const TYPE_RERR: u8 = 3;

pub const RREQ_LEN: usize = 24;
pub const RREP_LEN: usize = 20;
pub const RERR_HEADER_LEN: usize = 4;
pub const RERR_ENTRY_LEN: usize = 8;
/// Length of the trailing accumulated-cost word.
pub const COST_EXT_LEN: usize = 4;

pub const MAX_PREFIX_SIZE: u8 = 31;

const RREQ_J: u8 = 0x80;
const RREQ_R: u8 = 0x40;
const RREQ_G: u8 = 0x20;
const RREQ_D: u8 = 0x10;
const RREQ_U: u8 = 0x08;

const RREP_R: u8 = 0x80;
const RREP_A: u8 = 0x40;
const RREP_PREFIX_MASK: u8 = 0x1f;

const RERR_N: u8 = 0x80;

/// A 32-bit node address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Addr(pub u32);

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Addr {
    fn from(v: u32) -> Self {
        Addr(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RreqFlags {
    /// multicast join, carried but never acted on
    pub join: bool,
    /// multicast repair, carried but never acted on
    pub repair: bool,
    pub gratuitous: bool,
    pub destination_only: bool,
    pub unknown_seq: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rreq {
    pub flags: RreqFlags,
    pub hop_count: u8,
    pub rreq_id: u32,
    pub dest_addr: Addr,
    pub dest_seq: u32,
    pub orig_addr: Addr,
    pub orig_seq: u32,
    /// Accumulated path cost in millimeters (distance variant only).
    pub acc_cost: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RrepFlags {
    pub repair: bool,
    pub ack_required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rrep {
    pub flags: RrepFlags,
    /// Five-bit routing prefix length.
    pub prefix_size: u8,
    pub hop_count: u8,
    pub dest_addr: Addr,
    pub dest_seq: u32,
    pub orig_addr: Addr,
    /// Milliseconds.
    pub lifetime: u32,
    pub acc_cost: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unreachable {
    pub addr: Addr,
    pub seq: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rerr {
    pub no_delete: bool,
    pub destinations: Vec<Unreachable>,
}

/// Periodic one-hop liveness beacon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hello {
    pub origin_addr: Addr,
    pub origin_seq: u32,
    /// Milliseconds; allowed hello loss times the hello interval.
    pub lifetime: u32,
}

impl Hello {
    pub fn to_rrep(&self) -> Rrep {
        Rrep {
            flags: RrepFlags::default(),
            prefix_size: 0,
            hop_count: 0,
            dest_addr: self.origin_addr,
            dest_seq: self.origin_seq,
            orig_addr: self.origin_addr,
            lifetime: self.lifetime,
            acc_cost: None,
        }
    }

    /// Recognizes the hello form of an RREP received from `sender`.
    pub fn from_rrep(rrep: &Rrep, sender: Addr) -> Option<Hello> {
        (rrep.hop_count == 0 && rrep.dest_addr == sender && rrep.orig_addr == sender).then_some(
            Hello {
                origin_addr: sender,
                origin_seq: rrep.dest_seq,
                lifetime: rrep.lifetime,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Rreq(Rreq),
    Rrep(Rrep),
    Rerr(Rerr),
    /// Encodes as an RREP; [`decode`] always yields `Message::Rrep` for it.
    Hello(Hello),
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::Rreq(_) => TYPE_RREQ,
            Message::Rrep(_) | Message::Hello(_) => TYPE_RREP,
            Message::Rerr(_) => TYPE_RERR,
        }
    }

    /// Number of bytes [`encode`] produces.
    pub fn encoded_len(&self) -> usize {
        match self {
            Message::Rreq(m) => RREQ_LEN + m.acc_cost.map_or(0, |_| COST_EXT_LEN),
            Message::Rrep(m) => RREP_LEN + m.acc_cost.map_or(0, |_| COST_EXT_LEN),
            Message::Hello(_) => RREP_LEN,
            Message::Rerr(m) => RERR_HEADER_LEN + RERR_ENTRY_LEN * m.destinations.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireError {
    /// A value does not fit its field on the wire.
    FieldOverflow {
        field: &'static str,
    },
    /// An RERR must name at least one unreachable destination.
    EmptyDestinationList,
    UnknownType(u8),
    Truncated {
        expected: usize,
        actual: usize,
    },
    TrailingGarbage {
        expected: usize,
        actual: usize,
    },
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireError::FieldOverflow { field } => {
                write!(f, "field `{field}` exceeds its wire width")
            }
            WireError::EmptyDestinationList => write!(f, "RERR with zero destinations"),
            WireError::UnknownType(t) => write!(f, "unknown message type {t}"),
            WireError::Truncated { expected, actual } => {
                write!(f, "truncated message: need {expected} bytes, got {actual}")
            }
            WireError::TrailingGarbage { expected, actual } => {
                write!(
                    f,
                    "unexpected trailing bytes: expected {expected}, got {actual}"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for WireError {}

pub fn encode(msg: &Message) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::with_capacity(msg.encoded_len());
    encode_into(msg, &mut out)?;
    Ok(out)
}

pub fn encode_into(msg: &Message, out: &mut Vec<u8>) -> Result<(), WireError> {
    match msg {
        Message::Rreq(m) => encode_rreq(m, out),
        Message::Rrep(m) => encode_rrep(m, out),
        Message::Hello(h) => encode_rrep(&h.to_rrep(), out),
        Message::Rerr(m) => encode_rerr(m, out),
    }
}

fn encode_rreq(m: &Rreq, out: &mut Vec<u8>) -> Result<(), WireError> {
    let f = &m.flags;
    let mut bits = 0u8;
    for (set, mask) in [
        (f.join, RREQ_J),
        (f.repair, RREQ_R),
        (f.gratuitous, RREQ_G),
        (f.destination_only, RREQ_D),
        (f.unknown_seq, RREQ_U),
    ] {
        if set {
            bits |= mask;
        }
    }
    out.extend_from_slice(&[TYPE_RREQ, bits, 0, m.hop_count]);
    out.extend_from_slice(&m.rreq_id.to_be_bytes());
    out.extend_from_slice(&m.dest_addr.0.to_be_bytes());
    out.extend_from_slice(&m.dest_seq.to_be_bytes());
    out.extend_from_slice(&m.orig_addr.0.to_be_bytes());
    out.extend_from_slice(&m.orig_seq.to_be_bytes());
    if let Some(cost) = m.acc_cost {
        out.extend_from_slice(&cost.to_be_bytes());
    }
    Ok(())
}

fn encode_rrep(m: &Rrep, out: &mut Vec<u8>) -> Result<(), WireError> {
    if m.prefix_size > MAX_PREFIX_SIZE {
        return Err(WireError::FieldOverflow {
            field: "prefix_size",
        });
    }
    let mut bits = 0u8;
    if m.flags.repair {
        bits |= RREP_R;
    }
    if m.flags.ack_required {
        bits |= RREP_A;
    }
    out.extend_from_slice(&[TYPE_RREP, bits, m.prefix_size, m.hop_count]);
    out.extend_from_slice(&m.dest_addr.0.to_be_bytes());
    out.extend_from_slice(&m.dest_seq.to_be_bytes());
    out.extend_from_slice(&m.orig_addr.0.to_be_bytes());
    out.extend_from_slice(&m.lifetime.to_be_bytes());
    if let Some(cost) = m.acc_cost {
        out.extend_from_slice(&cost.to_be_bytes());
    }
    Ok(())
}

fn encode_rerr(m: &Rerr, out: &mut Vec<u8>) -> Result<(), WireError> {
    if m.destinations.is_empty() {
        return Err(WireError::EmptyDestinationList);
    }
    let count = u8::try_from(m.destinations.len()).map_err(|_| WireError::FieldOverflow {
        field: "dest_count",
    })?;
    let bits = if m.no_delete { RERR_N } else { 0 };
    out.extend_from_slice(&[TYPE_RERR, bits, 0, count]);
    for d in &m.destinations {
        out.extend_from_slice(&d.addr.0.to_be_bytes());
        out.extend_from_slice(&d.seq.to_be_bytes());
    }
    Ok(())
}

fn be32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Checks `len` against a fixed layout with an optional trailing cost word and
/// returns whether the word is present.
fn fixed_layout(len: usize, base: usize) -> Result<bool, WireError> {
    if len < base {
        Err(WireError::Truncated {
            expected: base,
            actual: len,
        })
    } else if len == base {
        Ok(false)
    } else if len == base + COST_EXT_LEN {
        Ok(true)
    } else {
        Err(WireError::TrailingGarbage {
            expected: base,
            actual: len,
        })
    }
}

pub fn decode(bytes: &[u8]) -> Result<Message, WireError> {
    let Some(&ty) = bytes.first() else {
        return Err(WireError::Truncated {
            expected: 1,
            actual: 0,
        });
    };
    match ty {
        TYPE_RREQ => {
            let ext = fixed_layout(bytes.len(), RREQ_LEN)?;
            let bits = bytes[1];
            Ok(Message::Rreq(Rreq {
                flags: RreqFlags {
                    join: bits & RREQ_J != 0,
                    repair: bits & RREQ_R != 0,
                    gratuitous: bits & RREQ_G != 0,
                    destination_only: bits & RREQ_D != 0,
                    unknown_seq: bits & RREQ_U != 0,
                },
                hop_count: bytes[3],
                rreq_id: be32(bytes, 4),
                dest_addr: Addr(be32(bytes, 8)),
                dest_seq: be32(bytes, 12),
                orig_addr: Addr(be32(bytes, 16)),
                orig_seq: be32(bytes, 20),
                acc_cost: ext.then(|| be32(bytes, RREQ_LEN)),
            }))
        }
        TYPE_RREP => {
            let ext = fixed_layout(bytes.len(), RREP_LEN)?;
            let bits = bytes[1];
            Ok(Message::Rrep(Rrep {
                flags: RrepFlags {
                    repair: bits & RREP_R != 0,
                    ack_required: bits & RREP_A != 0,
                },
                prefix_size: bytes[2] & RREP_PREFIX_MASK,
                hop_count: bytes[3],
                dest_addr: Addr(be32(bytes, 4)),
                dest_seq: be32(bytes, 8),
                orig_addr: Addr(be32(bytes, 12)),
                lifetime: be32(bytes, 16),
                acc_cost: ext.then(|| be32(bytes, RREP_LEN)),
            }))
        }
        TYPE_RERR => {
            if bytes.len() < RERR_HEADER_LEN {
                return Err(WireError::Truncated {
                    expected: RERR_HEADER_LEN,
                    actual: bytes.len(),
                });
            }
            let count = bytes[3] as usize;
            if count == 0 {
                return Err(WireError::EmptyDestinationList);
            }
            let expected = RERR_HEADER_LEN + RERR_ENTRY_LEN * count;
            if bytes.len() < expected {
                return Err(WireError::Truncated {
                    expected,
                    actual: bytes.len(),
                });
            }
            if bytes.len() > expected {
                return Err(WireError::TrailingGarbage {
                    expected,
                    actual: bytes.len(),
                });
            }
            let destinations = bytes[RERR_HEADER_LEN..]
                .chunks_exact(RERR_ENTRY_LEN)
                .map(|c| Unreachable {
                    addr: Addr(be32(c, 0)),
                    seq: be32(c, 4),
                })
                .collect();
            Ok(Message::Rerr(Rerr {
                no_delete: bytes[1] & RERR_N != 0,
                destinations,
            }))
        }
        other => Err(WireError::UnknownType(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_rreq() -> Rreq {
        Rreq {
            flags: RreqFlags {
                unknown_seq: true,
                ..RreqFlags::default()
            },
            hop_count: 0,
            rreq_id: 1,
            dest_addr: Addr(5),
            dest_seq: 0,
            orig_addr: Addr(1),
            orig_seq: 1,
            acc_cost: None,
        }
    }

    #[test]
    fn rreq_layout() {
        let bytes = encode(&Message::Rreq(sample_rreq())).unwrap();
        assert_eq!(bytes.len(), 24);
        assert_eq!(bytes[0], 0x01);
        assert_eq!(bytes[1], 0x08);
        assert_eq!(&bytes[4..8], &[0, 0, 0, 1]);
        assert_eq!(&bytes[8..12], &[0, 0, 0, 5]);
        assert_eq!(&bytes[16..20], &[0, 0, 0, 1]);

        let mut ext = sample_rreq();
        ext.acc_cost = Some(0x0102_0304);
        let bytes = encode(&Message::Rreq(ext)).unwrap();
        assert_eq!(bytes.len(), 28);
        assert_eq!(&bytes[24..], &[1, 2, 3, 4]);
    }

    #[test]
    fn rreq_flag_bits_in_figure_order() {
        let mut m = sample_rreq();
        m.flags = RreqFlags {
            join: true,
            repair: false,
            gratuitous: true,
            destination_only: true,
            unknown_seq: false,
        };
        let bytes = encode(&Message::Rreq(m.clone())).unwrap();
        assert_eq!(bytes[1], 0b1011_0000);
        assert_eq!(decode(&bytes).unwrap(), Message::Rreq(m));
    }

    #[test]
    fn rrep_layout() {
        let m = Rrep {
            flags: RrepFlags::default(),
            prefix_size: 0,
            hop_count: 0,
            dest_addr: Addr(1),
            dest_seq: 0,
            orig_addr: Addr(1),
            lifetime: 0,
            acc_cost: None,
        };
        let bytes = encode(&Message::Rrep(m.clone())).unwrap();
        assert_eq!(bytes.len(), 20);
        assert_eq!(bytes[0], 0x02);

        let m = Rrep {
            flags: RrepFlags {
                repair: true,
                ack_required: true,
            },
            prefix_size: 31,
            hop_count: 7,
            ..m
        };
        let bytes = encode(&Message::Rrep(m.clone())).unwrap();
        assert_eq!(&bytes[..4], &[0x02, 0xc0, 0x1f, 0x07]);
        assert_eq!(decode(&bytes).unwrap(), Message::Rrep(m));
    }

    #[test]
    fn prefix_size_overflow() {
        let m = Rrep {
            flags: RrepFlags::default(),
            prefix_size: 32,
            hop_count: 0,
            dest_addr: Addr(1),
            dest_seq: 0,
            orig_addr: Addr(1),
            lifetime: 0,
            acc_cost: None,
        };
        assert_eq!(
            encode(&Message::Rrep(m)),
            Err(WireError::FieldOverflow {
                field: "prefix_size"
            })
        );
    }

    #[test]
    fn rerr_layout() {
        let m = Rerr {
            no_delete: false,
            destinations: vec![
                Unreachable {
                    addr: Addr(7),
                    seq: 12,
                },
                Unreachable {
                    addr: Addr(9),
                    seq: 3,
                },
            ],
        };
        let bytes = encode(&Message::Rerr(m.clone())).unwrap();
        assert_eq!(bytes.len(), 20);
        assert_eq!(&bytes[..4], &[0x03, 0x00, 0x00, 0x02]);
        assert_eq!(&bytes[4..12], &[0, 0, 0, 7, 0, 0, 0, 12]);
        assert_eq!(decode(&bytes).unwrap(), Message::Rerr(m));
    }

    #[test]
    fn rerr_count_limits() {
        let empty = Rerr {
            no_delete: false,
            destinations: vec![],
        };
        assert_eq!(
            encode(&Message::Rerr(empty)),
            Err(WireError::EmptyDestinationList)
        );
        let big = Rerr {
            no_delete: false,
            destinations: vec![
                Unreachable {
                    addr: Addr(1),
                    seq: 1
                };
                256
            ],
        };
        assert_eq!(
            encode(&Message::Rerr(big)),
            Err(WireError::FieldOverflow {
                field: "dest_count"
            })
        );
        assert_eq!(decode(&[3, 0, 0, 0]), Err(WireError::EmptyDestinationList));
    }

    #[test]
    fn decode_errors() {
        assert_eq!(decode(&[0x07, 0, 0, 0]), Err(WireError::UnknownType(7)));
        assert_eq!(
            decode(&[]),
            Err(WireError::Truncated {
                expected: 1,
                actual: 0
            })
        );
        let mut bytes = encode(&Message::Rreq(sample_rreq())).unwrap();
        assert_eq!(
            decode(&bytes[..23]),
            Err(WireError::Truncated {
                expected: 24,
                actual: 23
            })
        );
        bytes.extend_from_slice(&[0, 0]);
        assert_eq!(
            decode(&bytes),
            Err(WireError::TrailingGarbage {
                expected: 24,
                actual: 26
            })
        );
        // a second RERR entry announced but missing
        assert_eq!(
            decode(&[3, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 1]),
            Err(WireError::Truncated {
                expected: 20,
                actual: 12
            })
        );
    }

    #[test]
    fn reserved_bits_are_ignored() {
        let mut bytes = encode(&Message::Rreq(sample_rreq())).unwrap();
        bytes[1] |= 0x07;
        bytes[2] = 0xff;
        assert_eq!(decode(&bytes).unwrap(), Message::Rreq(sample_rreq()));
    }

    #[test]
    fn hello_travels_as_rrep() {
        let hello = Hello {
            origin_addr: Addr(4),
            origin_seq: 9,
            lifetime: 2000,
        };
        let bytes = encode(&Message::Hello(hello)).unwrap();
        assert_eq!(bytes.len(), RREP_LEN);
        let Message::Rrep(rrep) = decode(&bytes).unwrap() else {
            panic!("hello must decode as an RREP");
        };
        assert_eq!(Hello::from_rrep(&rrep, Addr(4)), Some(hello));
        assert_eq!(Hello::from_rrep(&rrep, Addr(5)), None);
    }
}
