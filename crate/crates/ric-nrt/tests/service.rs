//! RIC service behavior over the in-process harness: registration,
//! routing, fan-out, queue bounds, control round-trips and timeouts.

use e2_lite::ControlStatus;
use ric_nrt::{
    Arbitration, ClosedLoop, ControlOutcome, Ric, RicConfig, RicError, XappEvent,
};
use sim_core::{ScenarioConfig, SchedPolicy, SchedulingProfile, SlicingProfile};

fn scenario(n_bs: u32) -> ScenarioConfig {
    ScenarioConfig {
        n_bs,
        rng_seed: 5,
        ..Default::default()
    }
}

fn drain<'a>(
    loop_: &'a mut ClosedLoop,
    xapp: ric_nrt::XappId,
) -> impl Iterator<Item = XappEvent> + 'a {
    std::iter::from_fn(move || loop_.poll_xapp(xapp))
}

#[test]
fn seven_nodes_register_once_each() {
    let loop_ = ClosedLoop::new(&scenario(7), RicConfig::default()).unwrap();
    assert_eq!(loop_.ric.registry().len(), 7);
    assert_eq!(loop_.ric.registry().bs_ids(), vec![0, 1, 2, 3, 4, 5, 6]);
}

#[test]
fn reregistration_replaces_old_session() {
    let mut loop_ = ClosedLoop::new(&scenario(2), RicConfig::default()).unwrap();
    // A second connection claiming bs 1 displaces the first.
    let conn = loop_.ric.node_connected();
    let setup = e2_lite::encode(&e2_lite::E2Message::SetupRequest {
        bs_id: 1,
        supported_sm_ids: e2_lite::SmId::ALL.to_vec(),
    })
    .unwrap();
    loop_.ric.node_bytes_in(loop_.now_ms(), conn, &setup);
    assert_eq!(loop_.ric.registry().len(), 2, "size unchanged");
    assert_eq!(loop_.ric.registry().get(1).unwrap().conn, conn);
    assert_eq!(loop_.ric.events.count("node_replaced"), 1);
}

#[test]
fn setup_with_empty_sm_list_is_rejected() {
    let mut ric = Ric::new(RicConfig::default());
    let conn = ric.node_connected();
    let setup = e2_lite::encode(&e2_lite::E2Message::SetupRequest {
        bs_id: 9,
        supported_sm_ids: vec![],
    })
    .unwrap();
    ric.node_bytes_in(0, conn, &setup);
    assert_eq!(ric.registry().len(), 0);
    // The rejection went back over the wire.
    let out = ric.drain_outbox();
    assert_eq!(out.len(), 1);
    let (msg, _) = e2_lite::decode(&out[0].1).unwrap();
    assert!(matches!(
        msg,
        e2_lite::E2Message::SetupResponse { accepted: false }
    ));
}

#[test]
fn subscription_routes_indications_to_owner_only() {
    let mut loop_ = ClosedLoop::new(&scenario(2), RicConfig::default()).unwrap();
    let xa = loop_.ric.attach_xapp("alpha");
    let xb = loop_.ric.attach_xapp("beta");
    // alpha watches bs 0, beta watches bs 1.
    let sub_a = loop_
        .ric
        .subscribe(0, xa, 0, e2_lite::SmId::KpmReport, 250)
        .unwrap();
    let sub_b = loop_
        .ric
        .subscribe(0, xb, 1, e2_lite::SmId::KpmReport, 250)
        .unwrap();
    loop_.run_ms(600);

    let mut a_events = 0;
    for ev in drain(&mut loop_, xa) {
        if let XappEvent::Indication { sub_id, bs_id, .. } = ev {
            assert_eq!(sub_id, sub_a);
            assert_eq!(bs_id, 0, "no cross-talk");
            a_events += 1;
        }
    }
    let mut b_events = 0;
    for ev in drain(&mut loop_, xb) {
        if let XappEvent::Indication { sub_id, bs_id, .. } = ev {
            assert_eq!(sub_id, sub_b);
            assert_eq!(bs_id, 1);
            b_events += 1;
        }
    }
    assert_eq!(a_events, 2, "600 ms at 250 ms period");
    assert_eq!(b_events, 2);
}

#[test]
fn two_xapps_subscribing_same_bs_both_receive_copies() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xa = loop_.ric.attach_xapp("alpha");
    let xb = loop_.ric.attach_xapp("beta");
    loop_.subscribe_all(xa, 250).unwrap();
    loop_.subscribe_all(xb, 250).unwrap();
    loop_.run_ms(300);

    let got_a: Vec<XappEvent> = drain(&mut loop_, xa).collect();
    let got_b: Vec<XappEvent> = drain(&mut loop_, xb).collect();
    let inds = |evs: &[XappEvent]| -> Vec<Vec<sim_core::KpmRecord>> {
        evs.iter()
            .filter_map(|e| match e {
                XappEvent::Indication { records, .. } => Some(records.clone()),
                _ => None,
            })
            .collect()
    };
    let (ia, ib) = (inds(&got_a), inds(&got_b));
    assert_eq!(ia.len(), 1);
    assert_eq!(ib.len(), 1);
    // Fan-out means copies of the same reporting window.
    assert_eq!(ia[0], ib[0]);
}

#[test]
fn unknown_sub_dropped_and_logged() {
    let mut ric = Ric::new(RicConfig::default());
    let delivered = ric.route_indication(999, 0, 1, vec![]);
    assert_eq!(delivered, 0);
    assert_eq!(ric.events.count("ind_unknown_sub"), 1);
}

#[test]
fn queue_overflow_keeps_bound_and_counts_drops() {
    let mut ric = Ric::new(RicConfig {
        xapp_queue_cap: 8,
        ..Default::default()
    });
    let xapp = ric.attach_xapp("flooded");
    // Install a route by hand and flood it.
    let conn = ric.node_connected();
    let setup = e2_lite::encode(&e2_lite::E2Message::SetupRequest {
        bs_id: 0,
        supported_sm_ids: e2_lite::SmId::ALL.to_vec(),
    })
    .unwrap();
    ric.node_bytes_in(0, conn, &setup);
    ric.drain_outbox();
    let sub = ric.subscribe(0, xapp, 0, e2_lite::SmId::KpmReport, 250).unwrap();
    // Pretend the node accepted.
    let accept = e2_lite::encode(&e2_lite::E2Message::SubscriptionResponse {
        sub_id: sub,
        accepted: true,
    })
    .unwrap();
    ric.node_bytes_in(0, conn, &accept);
    for i in 0..100 {
        ric.route_indication(sub, 0, i + 1, vec![]);
    }
    assert_eq!(ric.xapp_queue_len(xapp), 8, "bound holds");
    // One slot went to the SubscriptionResult event before the flood.
    assert_eq!(ric.xapp_drops(xapp), 93);
    assert_eq!(ric.events.count("queue_drop"), 93);
}

#[test]
fn control_roundtrip_applies_next_tti() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xapp = loop_.ric.attach_xapp("ctl");
    loop_.subscribe_all(xapp, 250).unwrap();
    loop_.run_ms(10);

    let target = SlicingProfile::new(24, 13, 13);
    let sched = SchedulingProfile::uniform(SchedPolicy::Pf);
    let before = loop_.cell(0).slicing();
    assert_ne!(before, target);
    let token = loop_.send_control(xapp, 0, target, sched).unwrap();

    // The ack arrives within the same millisecond; the profile flips at the
    // next TTI boundary.
    let result = std::iter::from_fn(|| loop_.poll_xapp(xapp))
        .find_map(|ev| match ev {
            XappEvent::ControlResult {
                token: t, outcome, ..
            } => Some((t, outcome)),
            _ => None,
        })
        .expect("control result queued");
    assert_eq!(result.0, token);
    assert_eq!(result.1, ControlOutcome::Acked(ControlStatus::Ok));
    assert_eq!(loop_.cell(0).slicing(), before, "not applied mid-TTI");
    loop_.step_ms();
    assert_eq!(loop_.cell(0).slicing(), target);
}

#[test]
fn malformed_profile_rejected_and_profile_retained() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xapp = loop_.ric.attach_xapp("ctl");
    loop_.run_ms(5);
    let before = loop_.cell(0).slicing();
    let bad = SlicingProfile::new(30, 30, 30);
    let token = loop_
        .send_control(xapp, 0, bad, SchedulingProfile::uniform(SchedPolicy::Rr))
        .unwrap();
    let ev = loop_.poll_xapp(xapp).expect("result");
    match ev {
        XappEvent::ControlResult {
            token: t, outcome, ..
        } => {
            assert_eq!(t, token);
            assert_eq!(outcome, ControlOutcome::Acked(ControlStatus::Rejected));
        }
        other => panic!("unexpected {other:?}"),
    }
    loop_.run_ms(5);
    assert_eq!(loop_.cell(0).slicing(), before);
}

#[test]
fn control_to_unresponsive_node_times_out() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xapp = loop_.ric.attach_xapp("ctl");
    loop_.responsive[0] = false;
    let token = loop_
        .send_control(
            xapp,
            0,
            SlicingProfile::new(24, 13, 13),
            SchedulingProfile::uniform(SchedPolicy::Rr),
        )
        .unwrap();
    // One control deadline (250 ms) later the timeout surfaces.
    loop_.run_ms(251);
    let mut saw_timeout = false;
    while let Some(ev) = loop_.poll_xapp(xapp) {
        if let XappEvent::ControlResult {
            token: t,
            outcome: ControlOutcome::Timeout,
            ..
        } = ev
        {
            assert_eq!(t, token);
            saw_timeout = true;
        }
    }
    assert!(saw_timeout);
}

#[test]
fn control_to_unknown_bs_is_no_such_node() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xapp = loop_.ric.attach_xapp("ctl");
    let err = loop_
        .send_control(
            xapp,
            42,
            SlicingProfile::new(24, 13, 13),
            SchedulingProfile::uniform(SchedPolicy::Rr),
        )
        .unwrap_err();
    assert!(matches!(err, RicError::NoSuchNode { bs_id: 42 }));
}

#[test]
fn subscribe_to_unknown_bs_is_no_such_node() {
    let mut ric = Ric::new(RicConfig::default());
    let xapp = ric.attach_xapp("x");
    let err = ric
        .subscribe(0, xapp, 7, e2_lite::SmId::KpmReport, 250)
        .unwrap_err();
    assert!(matches!(err, RicError::NoSuchNode { bs_id: 7 }));
}

#[test]
fn exclusive_arbitration_refuses_second_controller() {
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xa = loop_.ric.attach_xapp("alpha");
    let xb = loop_.ric.attach_xapp("beta");
    let p = SlicingProfile::new(24, 13, 13);
    let s = SchedulingProfile::uniform(SchedPolicy::Rr);
    loop_.send_control(xa, 0, p, s).unwrap();
    let err = loop_.send_control(xb, 0, p, s).unwrap_err();
    assert!(matches!(err, RicError::ControlConflict { .. }));
}

#[test]
fn last_writer_wins_allows_both_controllers() {
    let mut loop_ = ClosedLoop::new(
        &scenario(1),
        RicConfig {
            arbitration: Arbitration::LastWriterWins,
            ..Default::default()
        },
    )
    .unwrap();
    let xa = loop_.ric.attach_xapp("alpha");
    let xb = loop_.ric.attach_xapp("beta");
    let p = SlicingProfile::new(24, 13, 13);
    let s = SchedulingProfile::uniform(SchedPolicy::Rr);
    loop_.send_control(xa, 0, p, s).unwrap();
    loop_.send_control(xb, 0, p, s).unwrap();
}

#[test]
fn stale_node_evicted_with_routes() {
    let mut loop_ = ClosedLoop::new(
        &scenario(1),
        RicConfig {
            node_timeout_ms: 400,
            ..Default::default()
        },
    )
    .unwrap();
    let xapp = loop_.ric.attach_xapp("watcher");
    loop_.subscribe_all(xapp, 250).unwrap();
    loop_.run_ms(300);
    assert_eq!(loop_.ric.registry().len(), 1);
    // Node stops talking entirely.
    loop_.responsive[0] = false;
    loop_.run_ms(700);
    assert_eq!(loop_.ric.registry().len(), 0, "stale entry evicted");
    assert!(loop_.ric.routes().is_empty(), "routes cleared");
    let saw_gone = std::iter::from_fn(|| loop_.poll_xapp(xapp))
        .any(|ev| matches!(ev, XappEvent::NodeGone { bs_id: 0 }));
    assert!(saw_gone);
}

#[test]
fn indication_to_inference_to_apply_within_one_period() {
    // End-to-end loop latency: a control sent in reaction to an indication
    // is live in the cell within one reporting period of simulated time.
    let mut loop_ = ClosedLoop::new(&scenario(1), RicConfig::default()).unwrap();
    let xapp = loop_.ric.attach_xapp("loop");
    loop_.subscribe_all(xapp, 250).unwrap();
    let mut checked = 0;
    let mut flip = false;
    while checked < 20 {
        loop_.step_ms();
        let Some(ev) = loop_.poll_xapp(xapp) else {
            continue;
        };
        if let XappEvent::Indication { bs_id, .. } = ev {
            let t_indication = loop_.now_ms();
            let target = if flip {
                SlicingProfile::new(36, 3, 11)
            } else {
                SlicingProfile::new(16, 17, 17)
            };
            flip = !flip;
            loop_
                .send_control(
                    xapp,
                    bs_id,
                    target,
                    SchedulingProfile::uniform(SchedPolicy::Rr),
                )
                .unwrap();
            let mut applied_at = None;
            for _ in 0..250 {
                loop_.step_ms();
                if loop_.cell(bs_id).slicing() == target {
                    applied_at = Some(loop_.now_ms());
                    break;
                }
            }
            let applied = applied_at.expect("control applied");
            assert!(
                applied - t_indication <= 250,
                "latency {} ms",
                applied - t_indication
            );
            checked += 1;
        }
    }
}
