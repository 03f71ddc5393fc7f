//! Codec properties: round-trip identity and fragmentation-independent
//! stream reassembly over generated messages.

use e2_lite::{decode, encode, E2Message, FrameDecoder};
use proptest::prelude::*;
use sim_core::{KpmRecord, SchedPolicy, SchedulingProfile, SliceId, SlicingProfile};

fn arb_slice() -> impl Strategy<Value = SliceId> {
    prop_oneof![
        Just(SliceId::Embb),
        Just(SliceId::Mtc),
        Just(SliceId::Urllc)
    ]
}

fn arb_policy() -> impl Strategy<Value = SchedPolicy> {
    prop_oneof![
        Just(SchedPolicy::Rr),
        Just(SchedPolicy::Wf),
        Just(SchedPolicy::Pf)
    ]
}

fn arb_record() -> impl Strategy<Value = KpmRecord> {
    (
        (0u64..1 << 40, 0u32..100, 0u32..100, arb_slice()),
        (0.0f64..28.0, 0u64..1 << 30, 0u64..1 << 30, 0.0f64..1e8),
        (0u64..1 << 20, 0.0f64..15.0, 0u64..1 << 30, 0.0f64..1e7),
        (0u64..1000, 0u64..1 << 20, 0u64..1 << 20),
    )
        .prop_map(
            |(
                (timestamp_ms, bs_id, ue_id, slice),
                (dl_mcs, dl_tx_symbols, dl_buffer_bytes, dl_rate_bps),
                (dl_phy_tbs, dl_cqi, ul_buffer_bytes, ul_rate_bps),
                (ul_errors, granted_prbs, requested_prbs),
            )| KpmRecord {
                timestamp_ms,
                bs_id,
                ue_id,
                slice,
                dl_mcs,
                dl_tx_symbols,
                dl_buffer_bytes,
                dl_rate_bps,
                dl_phy_tbs,
                dl_cqi,
                ul_buffer_bytes,
                ul_rate_bps,
                ul_errors,
                granted_prbs,
                requested_prbs,
            },
        )
}

prop_compose! {
    fn arb_slicing()(a in 1u16..48, b in 1u16..48) -> SlicingProfile {
        let a = a.min(48);
        let b = b.min(49 - a.min(48));
        SlicingProfile::new(a, b.max(1), 50u16.saturating_sub(a + b.max(1)).max(1))
    }
}

fn arb_message() -> impl Strategy<Value = E2Message> {
    let sms = proptest::collection::vec(
        prop_oneof![Just(e2_lite::SmId::KpmReport), Just(e2_lite::SmId::RanControl)],
        0..3,
    );
    let trigger = prop_oneof![
        Just(e2_lite::TriggerKind::Periodic),
        Just(e2_lite::TriggerKind::OnEvent)
    ];
    let status = prop_oneof![
        Just(e2_lite::ControlStatus::Ok),
        Just(e2_lite::ControlStatus::Rejected)
    ];
    prop_oneof![
        (any::<u32>(), sms).prop_map(|(bs_id, supported_sm_ids)| E2Message::SetupRequest {
            bs_id,
            supported_sm_ids
        }),
        any::<bool>().prop_map(|accepted| E2Message::SetupResponse { accepted }),
        (any::<u64>(), any::<bool>(), 1u64..10_000, trigger).prop_map(
            |(sub_id, kpm, report_period_ms, trigger)| E2Message::SubscriptionRequest {
                sub_id,
                sm_id: if kpm {
                    e2_lite::SmId::KpmReport
                } else {
                    e2_lite::SmId::RanControl
                },
                report_period_ms,
                trigger,
            }
        ),
        (any::<u64>(), any::<bool>()).prop_map(|(sub_id, accepted)| {
            E2Message::SubscriptionResponse { sub_id, accepted }
        }),
        (
            any::<u64>(),
            any::<u32>(),
            any::<u64>(),
            proptest::collection::vec(arb_record(), 0..8)
        )
            .prop_map(|(sub_id, bs_id, seq_no, payload)| E2Message::Indication {
                sub_id,
                bs_id,
                seq_no,
                payload
            }),
        (any::<u32>(), any::<u64>(), arb_slicing(), arb_policy(), arb_policy(), arb_policy())
            .prop_map(|(bs_id, seq_no, slicing, a, b, c)| E2Message::ControlRequest {
                bs_id,
                seq_no,
                slicing,
                scheduling: SchedulingProfile::new(a, b, c),
            }),
        (any::<u64>(), status).prop_map(|(seq_no, status)| E2Message::ControlAck {
            seq_no,
            status
        }),
    ]
}

proptest! {
    #[test]
    fn roundtrip_identity(msg in arb_message()) {
        let bytes = encode(&msg).unwrap();
        let (back, used) = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(used, bytes.len());
    }

    #[test]
    fn encoding_is_canonical(msg in arb_message()) {
        prop_assert_eq!(encode(&msg).unwrap(), encode(&msg).unwrap());
    }

    /// Any byte-boundary fragmentation of a frame sequence reassembles to
    /// the same message sequence.
    #[test]
    fn fragmentation_independent_reassembly(
        msgs in proptest::collection::vec(arb_message(), 1..6),
        cuts in proptest::collection::vec(1usize..64, 0..12),
    ) {
        let mut stream = Vec::new();
        for m in &msgs {
            stream.extend_from_slice(&encode(m).unwrap());
        }
        // Turn the cut list into fragment boundaries over the stream.
        let mut decoder = FrameDecoder::new();
        let mut got = Vec::new();
        let mut pos = 0;
        let mut cut_iter = cuts.iter();
        while pos < stream.len() {
            let step = cut_iter.next().copied().unwrap_or(stream.len());
            let end = (pos + step).min(stream.len());
            decoder.push(&stream[pos..end]);
            while let Some(m) = decoder.next().unwrap() {
                got.push(m);
            }
            pos = end;
        }
        prop_assert_eq!(got, msgs);
    }
}

#[test]
fn indication_length_prefix_matches_body() {
    // Six records in, six records out, and the prefix equals the body size.
    let payload: Vec<KpmRecord> = (0..6)
        .map(|i| KpmRecord {
            timestamp_ms: 250,
            bs_id: 0,
            ue_id: i,
            slice: SliceId::ALL[(i % 3) as usize],
            dl_mcs: 14.0,
            dl_tx_symbols: 120,
            dl_buffer_bytes: 0,
            dl_rate_bps: 1e6,
            dl_phy_tbs: 10,
            dl_cqi: 8.0,
            ul_buffer_bytes: 0,
            ul_rate_bps: 1e4,
            ul_errors: 0,
            granted_prbs: 100,
            requested_prbs: 120,
        })
        .collect();
    let msg = E2Message::Indication {
        sub_id: 7,
        bs_id: 0,
        seq_no: 1,
        payload,
    };
    let bytes = encode(&msg).unwrap();
    let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    assert_eq!(len, bytes.len() - e2_lite::HEADER_LEN);
    let (back, _) = decode(&bytes).unwrap();
    match back {
        E2Message::Indication { payload, .. } => assert_eq!(payload.len(), 6),
        other => panic!("unexpected {other:?}"),
    }
}
