//! Hand-checked wire vectors and the messages they encode.

use aodv_core::wire::*;

pub fn vectors() -> Vec<(String, Vec<u8>)> {
    include_str!("../fixtures/golden_vectors.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (name, hexits) = l.split_once(':').unwrap();
            let compact: String = hexits.split_whitespace().collect();
            (name.trim().to_owned(), hex::decode(compact).unwrap())
        })
        .collect()
}

pub fn expected(name: &str) -> Message {
    match name {
        "rreq_baseline" => Message::Rreq(Rreq {
            flags: RreqFlags {
                unknown_seq: true,
                ..Default::default()
            },
            hop_count: 0,
            rreq_id: 1,
            dest_addr: Addr(5),
            dest_seq: 0,
            orig_addr: Addr(1),
            orig_seq: 1,
            acc_cost: None,
        }),
        "rreq_extended" => Message::Rreq(Rreq {
            flags: RreqFlags {
                join: true,
                destination_only: true,
                ..Default::default()
            },
            hop_count: 3,
            rreq_id: 0x0102_0304,
            dest_addr: Addr(0x0a00_0009),
            dest_seq: 0xdead_beef,
            orig_addr: Addr(0x0a00_0001),
            orig_seq: 7,
            acc_cost: Some(650_000),
        }),
        "rrep_baseline" => Message::Rrep(Rrep {
            flags: RrepFlags::default(),
            prefix_size: 0,
            hop_count: 0,
            dest_addr: Addr(1),
            dest_seq: 0,
            orig_addr: Addr(1),
            lifetime: 0,
            acc_cost: None,
        }),
        "rrep_extended" => Message::Rrep(Rrep {
            flags: RrepFlags {
                repair: true,
                ack_required: true,
            },
            prefix_size: 5,
            hop_count: 2,
            dest_addr: Addr(9),
            dest_seq: 4,
            orig_addr: Addr(3),
            lifetime: 3000,
            acc_cost: Some(410_000),
        }),
        "rerr_two" => Message::Rerr(Rerr {
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
        }),
        "rerr_no_delete" => Message::Rerr(Rerr {
            no_delete: true,
            destinations: vec![Unreachable {
                addr: Addr(10),
                seq: u32::MAX,
            }],
        }),
        "hello" => Message::Hello(Hello {
            origin_addr: Addr(4),
            origin_seq: 17,
            lifetime: 2000,
        }),
        other => panic!("no expectation for vector {other}"),
    }
}
