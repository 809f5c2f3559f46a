//! The integrated simulation: WLAN channel, queues, flows and the wired
//! backhaul wired together over one event queue.
//!
//! Topology: node 0 is the AP bridging the WLAN to the wired hosts.
//! Download data queues at the AP and is acknowledged by stations over the
//! WLAN; upload data queues at stations and is acknowledged by the AP.
//! Under EDCA, TCP ACKs ride a separate prioritized access class; under DCF
//! each node has a single class carrying everything.

use crate::bufsizing::{Admission, BufferController, PacketBytes, Queue};
use crate::harness::config::{BufferMode, MacMode, ScenarioConfig};
use crate::harness::metrics::{FlowMetrics, MetricsReport};
use crate::mac::{ChannelModel, FrameSource, MacClassParams, MacEntity, StepOutcome, TxGrant, Wlan, TCP_ACK_BYTES};
use crate::sim::{RngStream, Scheduler, SimTime, TraceKind, TraceRecord, TraceSink};
use crate::transport::{FifoLane, FlowDirection, RtoVerdict, TcpFlow, UdpFlow};

const ACK_QUEUE_LIMIT: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PacketKind {
    Data,
    Ack,
    Udp,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Packet {
    flow: u32,
    kind: PacketKind,
    bytes: u32,
    sent_at: f64,
    epoch: u32,
}

impl PacketBytes for Packet {
    fn wire_bytes(&self) -> u32 {
        self.bytes
    }
}

enum Flow {
    Tcp(TcpFlow),
    Udp(UdpFlow),
}

impl Flow {
    fn direction(&self) -> FlowDirection {
        match self {
            Flow::Tcp(f) => f.direction,
            Flow::Udp(f) => f.direction,
        }
    }

    fn station(&self) -> u16 {
        match self {
            Flow::Tcp(f) => f.station,
            Flow::Udp(f) => f.station,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    ChannelStep,
    TxComplete,
    WiredArrival { pkt: Packet },
    LossNotify { flow: u32, drop_time: f64, epoch: u32 },
    RtoCheck { flow: u32, gen: u32 },
    QueueTick { queue: usize },
    UdpSend { flow: u32 },
    StartUploads,
    StartUdp,
    ShortFlowStart { class: usize },
    WarmupBoundary,
}

/// Entity/queue indices for one node's access classes. Under DCF both point
/// at the same single queue.
#[derive(Debug, Clone, Copy, Default)]
struct NodePorts {
    data: Option<usize>,
    ack: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Route {
    data_queue: usize,
    ack_queue: usize,
}

struct QueueView<'a>(&'a [Queue<Packet>]);

impl FrameSource for QueueView<'_> {
    fn backlog(&self, entity: usize) -> usize {
        self.0[entity].occupancy()
    }
    fn frame_payload_bytes(&self, entity: usize, k: usize) -> u64 {
        self.0[entity].head_bytes(k)
    }
}

pub struct World {
    cfg: ScenarioConfig,
    sched: Scheduler<Ev>,
    now: f64,
    wlan: Wlan,
    queues: Vec<Queue<Packet>>,
    queue_node: Vec<u16>,
    controlled: Vec<bool>,
    sat_flow_of_queue: Vec<Option<u32>>,
    ports: Vec<NodePorts>,
    ap_data_q: usize,
    ap_ack_q: Option<usize>,
    flows: Vec<Flow>,
    active: Vec<bool>,
    routes: Vec<Route>,
    udp_rngs: Vec<Option<RngStream>>,
    lane_to_ap: FifoLane,
    lane_to_hosts: FifoLane,
    channel_pending: bool,
    in_flight_tx: Option<TxGrant>,
    trace: TraceSink,
    // accounting
    created: u64,
    delivered: u64,
    dropped: u64,
    in_wired: u64,
    notify_pending: Vec<u64>,
    delivered_pw: Vec<u64>,
    srtt_max_pw: Vec<f64>,
    ap_service_span: f64,
    ap_service_pkts: u64,
    congestion_events: Vec<(f64, f64)>,
    limit_rows: Vec<(f64, u16, f64, f64)>,
    short_classes: Vec<(u64, u16)>, // (size bytes, station)
}

impl World {
    pub fn new(cfg: &ScenarioConfig) -> World {
        World::with_trace(cfg, TraceSink::disabled())
    }

    pub fn with_trace(cfg: &ScenarioConfig, trace: TraceSink) -> World {
        let cfg = cfg.clone();
        let n_short = cfg.short_flows.as_ref().map_or(0, |s| s.sizes.len() as u32);
        let n_stations = cfg.downloads + cfg.uploads + cfg.udp_uploads + cfg.udp_downloads + n_short;

        // Station role spans (1-based node ids).
        let dl_first = 1u16;
        let ul_first = dl_first + cfg.downloads as u16;
        let udp_ul_first = ul_first + cfg.uploads as u16;
        let udp_dl_first = udp_ul_first + cfg.udp_uploads as u16;
        let short_first = udp_dl_first + cfg.udp_downloads as u16;

        let mut entities: Vec<MacEntity> = Vec::new();
        let mut queues: Vec<Queue<Packet>> = Vec::new();
        let mut queue_node: Vec<u16> = Vec::new();
        let mut controlled: Vec<bool> = Vec::new();
        let mut ports: Vec<NodePorts> = vec![NodePorts::default(); 1 + n_stations as usize];

        let mut add_port =
            |node: u16, class: MacClassParams, ctl: BufferController, dynamic: bool,
             entities: &mut Vec<MacEntity>,
             queues: &mut Vec<Queue<Packet>>,
             queue_node: &mut Vec<u16>,
             controlled: &mut Vec<bool>| {
                entities.push(MacEntity::new(node, class));
                queues.push(Queue::new(ctl));
                queue_node.push(node);
                controlled.push(dynamic);
                queues.len() - 1
            };

        let dynamic = |m: BufferMode| !matches!(m, BufferMode::Fixed(_));

        match cfg.mac_mode {
            MacMode::Edca => {
                let ap_data = add_port(
                    0,
                    MacClassParams::EDCA_DATA,
                    cfg.ctl.build(cfg.ap_buffer),
                    dynamic(cfg.ap_buffer),
                    &mut entities,
                    &mut queues,
                    &mut queue_node,
                    &mut controlled,
                );
                ports[0].data = Some(ap_data);
                if cfg.uploads > 0 {
                    let ap_ack = add_port(
                        0,
                        MacClassParams::EDCA_ACK,
                        BufferController::Fixed(ACK_QUEUE_LIMIT),
                        false,
                        &mut entities,
                        &mut queues,
                        &mut queue_node,
                        &mut controlled,
                    );
                    ports[0].ack = Some(ap_ack);
                }
                for s in 1..=n_stations as u16 {
                    let sources_data = (s >= ul_first && s < udp_ul_first)
                        || (s >= udp_ul_first && s < udp_dl_first);
                    let receives_downloads =
                        (s >= dl_first && s < ul_first) || s >= short_first;
                    if sources_data {
                        let q = add_port(
                            s,
                            MacClassParams::EDCA_DATA,
                            cfg.ctl.build(cfg.sta_buffer),
                            dynamic(cfg.sta_buffer),
                            &mut entities,
                            &mut queues,
                            &mut queue_node,
                            &mut controlled,
                        );
                        ports[s as usize].data = Some(q);
                    }
                    if receives_downloads {
                        let q = add_port(
                            s,
                            MacClassParams::EDCA_ACK,
                            BufferController::Fixed(ACK_QUEUE_LIMIT),
                            false,
                            &mut entities,
                            &mut queues,
                            &mut queue_node,
                            &mut controlled,
                        );
                        ports[s as usize].ack = Some(q);
                    }
                }
            }
            MacMode::Dcf => {
                let ap = add_port(
                    0,
                    MacClassParams::DCF,
                    cfg.ctl.build(cfg.ap_buffer),
                    dynamic(cfg.ap_buffer),
                    &mut entities,
                    &mut queues,
                    &mut queue_node,
                    &mut controlled,
                );
                ports[0] = NodePorts { data: Some(ap), ack: Some(ap) };
                for s in 1..=n_stations as u16 {
                    let transmits = (s >= ul_first && s < udp_dl_first)
                        || (s >= dl_first && s < ul_first)
                        || s >= short_first;
                    if transmits {
                        let q = add_port(
                            s,
                            MacClassParams::DCF,
                            cfg.ctl.build(cfg.sta_buffer),
                            dynamic(cfg.sta_buffer),
                            &mut entities,
                            &mut queues,
                            &mut queue_node,
                            &mut controlled,
                        );
                        ports[s as usize] = NodePorts { data: Some(q), ack: Some(q) };
                    }
                }
            }
        }

        let ap_data_q = ports[0].data.expect("AP always has a data port");
        let ap_ack_q = ports[0].ack.filter(|q| *q != ap_data_q || cfg.mac_mode == MacMode::Dcf);

        let channel = ChannelModel { ber: cfg.ber, aggregation_k: cfg.k_agg };
        let wlan = Wlan::new(cfg.phy, channel, entities, cfg.seed);

        let mut world = World {
            sched: Scheduler::new(),
            now: 0.0,
            wlan,
            sat_flow_of_queue: vec![None; queues.len()],
            queues,
            queue_node,
            controlled,
            ports,
            ap_data_q,
            ap_ack_q,
            flows: Vec::new(),
            active: Vec::new(),
            routes: Vec::new(),
            udp_rngs: Vec::new(),
            lane_to_ap: FifoLane::default(),
            lane_to_hosts: FifoLane::default(),
            channel_pending: false,
            in_flight_tx: None,
            trace,
            created: 0,
            delivered: 0,
            dropped: 0,
            in_wired: 0,
            notify_pending: Vec::new(),
            delivered_pw: Vec::new(),
            srtt_max_pw: Vec::new(),
            ap_service_span: 0.0,
            ap_service_pkts: 0,
            congestion_events: Vec::new(),
            limit_rows: Vec::new(),
            short_classes: Vec::new(),
            cfg,
        };

        // TCP downloads.
        for i in 0..world.cfg.downloads {
            let station = dl_first + i as u16;
            let f = TcpFlow::new_long(
                world.flows.len() as u32,
                FlowDirection::Download,
                station,
                world.cfg.awnd,
                world.cfg.beta,
                world.cfg.wired.rtt,
                0.0,
            );
            world.push_flow(Flow::Tcp(f), true, None);
        }
        // TCP uploads (possibly deferred).
        for i in 0..world.cfg.uploads {
            let station = ul_first + i as u16;
            let f = TcpFlow::new_long(
                world.flows.len() as u32,
                FlowDirection::Upload,
                station,
                world.cfg.awnd,
                world.cfg.beta,
                world.cfg.wired.rtt,
                world.cfg.upload_start,
            );
            world.push_flow(Flow::Tcp(f), world.cfg.upload_start <= 0.0, None);
        }
        // UDP flows (deferred to udp.start).
        for i in 0..world.cfg.udp_uploads {
            let station = udp_ul_first + i as u16;
            let f = UdpFlow::new(
                world.flows.len() as u32,
                FlowDirection::Upload,
                station,
                world.cfg.udp_packet_size,
                world.cfg.udp_interval,
            );
            world.push_flow(Flow::Udp(f), false, Some(world.cfg.seed));
        }
        for i in 0..world.cfg.udp_downloads {
            let station = udp_dl_first + i as u16;
            let f = UdpFlow::new(
                world.flows.len() as u32,
                FlowDirection::Download,
                station,
                world.cfg.udp_packet_size,
                world.cfg.udp_interval,
            );
            world.push_flow(Flow::Udp(f), false, Some(world.cfg.seed));
        }
        if let Some(sf) = world.cfg.short_flows.clone() {
            for (i, &size) in sf.sizes.iter().enumerate() {
                world.short_classes.push((size, short_first + i as u16));
            }
        }
        world
    }

    fn push_flow(&mut self, flow: Flow, active: bool, udp_seed: Option<u64>) {
        let id = self.flows.len();
        let route = self.route_for(&flow);
        self.routes.push(route);
        self.udp_rngs
            .push(udp_seed.map(|seed| RngStream::new(seed, 1000 + id as u64)));
        if let Flow::Udp(u) = &flow {
            if u.saturated() && u.direction == FlowDirection::Upload {
                self.sat_flow_of_queue[route.data_queue] = Some(id as u32);
            }
        }
        self.flows.push(flow);
        self.active.push(active);
        self.notify_pending.push(0);
        self.delivered_pw.push(0);
        self.srtt_max_pw.push(0.0);
    }

    fn route_for(&self, flow: &Flow) -> Route {
        let s = flow.station() as usize;
        match flow.direction() {
            FlowDirection::Download => Route {
                data_queue: self.ap_data_q,
                ack_queue: self.ports[s].ack.or(self.ports[s].data).unwrap_or(self.ap_data_q),
            },
            FlowDirection::Upload => Route {
                data_queue: self.ports[s].data.expect("upload station has a data port"),
                ack_queue: self.ap_ack_q.unwrap_or(self.ap_data_q),
            },
        }
    }

    fn tcp(&mut self, id: u32) -> &mut TcpFlow {
        match &mut self.flows[id as usize] {
            Flow::Tcp(f) => f,
            Flow::Udp(_) => panic!("flow {id} is not TCP"),
        }
    }

    fn at(&mut self, t: f64, ev: Ev) {
        self.sched
            .schedule(SimTime::from_secs(t.max(self.now)), ev)
            .expect("scheduling forward in time");
    }

    fn emit(&mut self, kind: TraceKind, station: u16, value: f64) {
        if self.trace.enabled() {
            self.trace.emit(TraceRecord {
                time: SimTime::from_secs(self.now),
                station,
                kind,
                value,
            });
        }
    }

    /// Run to `cfg.duration` and assemble the report.
    pub fn run(mut self) -> (MetricsReport, TraceSink) {
        let t_end = SimTime::from_secs(self.cfg.duration);
        // Kick off timers and initial traffic.
        for q in 0..self.queues.len() {
            self.at(self.cfg.ctl.interval, Ev::QueueTick { queue: q });
        }
        self.at(self.cfg.warmup, Ev::WarmupBoundary);
        if self.cfg.uploads > 0 && self.cfg.upload_start > 0.0 {
            self.at(self.cfg.upload_start, Ev::StartUploads);
        }
        if self.cfg.udp_uploads + self.cfg.udp_downloads > 0 {
            self.at(self.cfg.udp_start, Ev::StartUdp);
        }
        let classes = self.short_classes.len();
        if let Some(sf) = self.cfg.short_flows.clone() {
            for class in 0..classes {
                let stagger = sf.interval * class as f64 / classes as f64;
                self.at(self.cfg.warmup + stagger, Ev::ShortFlowStart { class });
            }
        }
        for id in 0..self.flows.len() as u32 {
            if self.active[id as usize] && matches!(self.flows[id as usize], Flow::Tcp(_)) {
                self.pump_tcp(id);
            }
        }

        while let Some((t, ev)) = self.sched.pop_due(t_end) {
            self.now = t.secs();
            self.dispatch(ev);
        }
        self.sched.finish_at(t_end);
        self.now = t_end.secs();
        self.wlan.finish(t_end);
        let report = self.build_report();
        let mut trace = self.trace;
        let _ = trace.flush();
        (report, trace)
    }

    fn dispatch(&mut self, ev: Ev) {
        match ev {
            Ev::ChannelStep => self.on_channel_step(),
            Ev::TxComplete => self.on_tx_complete(),
            Ev::WiredArrival { pkt } => self.on_wired_arrival(pkt),
            Ev::LossNotify { flow, drop_time, epoch } => self.on_loss_notify(flow, drop_time, epoch),
            Ev::RtoCheck { flow, gen } => self.on_rto_check(flow, gen),
            Ev::QueueTick { queue } => self.on_queue_tick(queue),
            Ev::UdpSend { flow } => self.on_udp_send(flow),
            Ev::StartUploads => self.on_start_uploads(),
            Ev::StartUdp => self.on_start_udp(),
            Ev::ShortFlowStart { class } => self.on_short_flow_start(class),
            Ev::WarmupBoundary => self.on_warmup(),
        }
    }

    // ---- channel ---------------------------------------------------------

    fn on_channel_step(&mut self) {
        self.channel_pending = false;
        let now = SimTime::from_secs(self.now);
        let outcome = {
            let view = QueueView(&self.queues);
            self.wlan.step(now, &view)
        };
        match outcome {
            StepOutcome::Quiescent => {}
            StepOutcome::IdleSlot { next_at } => {
                self.channel_pending = true;
                self.at(next_at.secs(), Ev::ChannelStep);
            }
            StepOutcome::Transmit(grant) => {
                self.emit(TraceKind::TxStart, self.queue_node[grant.entity], grant.packets as f64);
                self.in_flight_tx = Some(grant);
                self.channel_pending = true;
                self.at(grant.data_end.secs(), Ev::TxComplete);
                self.at(grant.channel_free_at.secs(), Ev::ChannelStep);
            }
            StepOutcome::Collision { participants, next_at } => {
                let n = participants.len() as f64;
                for &p in &participants {
                    self.emit(TraceKind::Collision, self.queue_node[p], n);
                }
                self.channel_pending = true;
                self.at(next_at.secs(), Ev::ChannelStep);
            }
        }
    }

    fn on_tx_complete(&mut self) {
        let grant = self.in_flight_tx.take().expect("tx completion without grant");
        let q = grant.entity;
        let now = SimTime::from_secs(self.now);
        if grant.error {
            let exhausted = self.wlan.finish_tx(q, true, true);
            if exhausted {
                let pkts = self.queues[q].drop_head_frame(grant.packets, now);
                let occ = self.queues[q].occupancy() as f64;
                for pkt in pkts {
                    self.emit(TraceKind::Drop, self.queue_node[q], occ);
                    self.on_packet_dropped(pkt);
                }
            }
            return;
        }
        let (pkts, (t_s, t_e)) = self.queues[q].complete_service(grant.packets, now);
        let span = t_e - t_s;
        self.emit(TraceKind::TxSuccess, self.queue_node[q], span);
        if q == self.ap_data_q && self.now >= self.cfg.warmup {
            self.ap_service_span += span;
            self.ap_service_pkts += pkts.len() as u64;
        }
        self.wlan.finish_tx(q, false, !self.queues[q].is_empty());
        let from_ap = self.queue_node[q] == 0;
        for pkt in pkts {
            self.deliver_frame_packet(from_ap, pkt);
        }
        if let Some(sat) = self.sat_flow_of_queue[q] {
            self.topup_saturated(sat);
        }
    }

    fn deliver_frame_packet(&mut self, from_ap: bool, pkt: Packet) {
        if from_ap {
            // AP -> station: terminal delivery.
            match pkt.kind {
                PacketKind::Data => {
                    self.count_delivery(&pkt);
                    let ack = Packet {
                        flow: pkt.flow,
                        kind: PacketKind::Ack,
                        bytes: TCP_ACK_BYTES,
                        sent_at: pkt.sent_at,
                        epoch: pkt.epoch,
                    };
                    self.created += 1;
                    let ack_q = self.routes[pkt.flow as usize].ack_queue;
                    self.enqueue(ack_q, ack);
                }
                PacketKind::Ack => {
                    self.count_delivery(&pkt);
                    self.handle_ack(pkt);
                }
                PacketKind::Udp => self.count_delivery(&pkt),
            }
        } else {
            // Station -> AP: bridge onto the wired link toward the hosts.
            self.in_wired += 1;
            let at = self.lane_to_hosts.arrival(&self.cfg.wired, self.now, pkt.bytes);
            self.at(at, Ev::WiredArrival { pkt });
        }
    }

    fn on_wired_arrival(&mut self, pkt: Packet) {
        self.in_wired -= 1;
        let dir = self.flows[pkt.flow as usize].direction();
        match (pkt.kind, dir) {
            // Download data or UDP reaching the AP from the wired side.
            (PacketKind::Data, FlowDirection::Download)
            | (PacketKind::Udp, FlowDirection::Download) => {
                let q = self.routes[pkt.flow as usize].data_queue;
                self.enqueue(q, pkt);
            }
            // Upload data delivered to the wired host: acknowledge.
            (PacketKind::Data, FlowDirection::Upload) => {
                self.count_delivery(&pkt);
                let ack = Packet {
                    flow: pkt.flow,
                    kind: PacketKind::Ack,
                    bytes: TCP_ACK_BYTES,
                    sent_at: pkt.sent_at,
                    epoch: pkt.epoch,
                };
                self.created += 1;
                self.in_wired += 1;
                let at = self.lane_to_ap.arrival(&self.cfg.wired, self.now, ack.bytes);
                self.at(at, Ev::WiredArrival { pkt: ack });
            }
            (PacketKind::Udp, FlowDirection::Upload) => self.count_delivery(&pkt),
            // Download ACK back at the wired sender.
            (PacketKind::Ack, FlowDirection::Download) => {
                self.count_delivery(&pkt);
                self.handle_ack(pkt);
            }
            // Upload ACK reaching the AP; it still has to cross the WLAN.
            (PacketKind::Ack, FlowDirection::Upload) => {
                let q = self.routes[pkt.flow as usize].ack_queue;
                self.enqueue(q, pkt);
            }
        }
    }

    // ---- queues ----------------------------------------------------------

    fn enqueue(&mut self, q: usize, pkt: Packet) {
        let now = SimTime::from_secs(self.now);
        match self.queues[q].try_enqueue(pkt, now) {
            Admission::Admitted(occ) => {
                self.emit(TraceKind::Enqueue, self.queue_node[q], occ as f64);
                if !self.channel_pending {
                    self.wlan.wake(now);
                    self.channel_pending = true;
                    self.at(self.now, Ev::ChannelStep);
                }
            }
            Admission::Dropped(occ) => {
                self.emit(TraceKind::Drop, self.queue_node[q], occ as f64);
                self.on_packet_dropped(pkt);
            }
        }
    }

    fn on_packet_dropped(&mut self, pkt: Packet) {
        self.dropped += 1;
        match &mut self.flows[pkt.flow as usize] {
            Flow::Udp(u) => u.dropped += 1,
            Flow::Tcp(f) => {
                f.dropped += 1;
                let delay = f.srtt();
                self.notify_pending[pkt.flow as usize] += 1;
                self.at(
                    self.now + delay,
                    Ev::LossNotify { flow: pkt.flow, drop_time: self.now, epoch: pkt.epoch },
                );
            }
        }
    }

    fn count_delivery(&mut self, pkt: &Packet) {
        self.delivered += 1;
        if pkt.kind == PacketKind::Ack {
            return;
        }
        match &mut self.flows[pkt.flow as usize] {
            Flow::Tcp(f) => f.delivered += 1,
            Flow::Udp(u) => u.delivered += 1,
        }
        if self.now >= self.cfg.warmup {
            self.delivered_pw[pkt.flow as usize] += 1;
        }
    }

    // ---- TCP -------------------------------------------------------------

    fn pump_tcp(&mut self, id: u32) {
        if !self.active[id as usize] {
            return;
        }
        let payload = self.cfg.payload;
        let now = self.now;
        loop {
            let (pkt, first_outstanding) = {
                let f = self.tcp(id);
                if !f.can_send() {
                    break;
                }
                f.register_send(now);
                let pkt = Packet {
                    flow: id,
                    kind: PacketKind::Data,
                    bytes: payload,
                    sent_at: now,
                    epoch: f.epoch(),
                };
                (pkt, f.in_flight() == 1)
            };
            self.created += 1;
            match self.flows[id as usize].direction() {
                FlowDirection::Download => {
                    self.in_wired += 1;
                    let at = self.lane_to_ap.arrival(&self.cfg.wired, now, pkt.bytes);
                    self.at(at, Ev::WiredArrival { pkt });
                }
                FlowDirection::Upload => {
                    let q = self.routes[id as usize].data_queue;
                    self.enqueue(q, pkt);
                }
            }
            if first_outstanding {
                let (gen, fire) = self.tcp(id).arm_rto(now);
                self.at(fire, Ev::RtoCheck { flow: id, gen });
            }
        }
    }

    fn handle_ack(&mut self, pkt: Packet) {
        let now = self.now;
        let warm = now >= self.cfg.warmup;
        let sample = now - pkt.sent_at;
        let f = self.tcp(pkt.flow);
        f.on_ack(now, sample, pkt.epoch);
        let srtt = f.srtt();
        if warm {
            let m = &mut self.srtt_max_pw[pkt.flow as usize];
            *m = m.max(srtt);
        }
        self.pump_tcp(pkt.flow);
    }

    fn on_loss_notify(&mut self, flow: u32, drop_time: f64, epoch: u32) {
        self.notify_pending[flow as usize] = self.notify_pending[flow as usize].saturating_sub(1);
        let backed_off = self.tcp(flow).on_loss_event(drop_time, epoch);
        if backed_off {
            self.record_congestion_event(flow);
        }
        self.pump_tcp(flow);
    }

    fn on_rto_check(&mut self, flow: u32, gen: u32) {
        match self.tcp(flow).rto_check(self.now, gen) {
            RtoVerdict::Disarm => {}
            RtoVerdict::Rearm(at) => self.at(at, Ev::RtoCheck { flow, gen }),
            RtoVerdict::TimedOut => {
                self.record_congestion_event(flow);
                self.pump_tcp(flow);
            }
        }
    }

    fn record_congestion_event(&mut self, flow: u32) {
        let station = self.flows[flow as usize].station();
        let cwnd = self.tcp(flow).cwnd;
        self.emit(TraceKind::CwndUpdate, station, cwnd);
        let limit = self.queues[self.ap_data_q].limit();
        match self.congestion_events.last() {
            Some((t, _)) if *t == self.now => {}
            _ => self.congestion_events.push((self.now, limit)),
        }
    }

    // ---- timers and generators -------------------------------------------

    fn on_queue_tick(&mut self, q: usize) {
        let now = SimTime::from_secs(self.now);
        self.queues[q].tick(now);
        if self.controlled[q] {
            let limit = self.queues[q].limit();
            self.emit(TraceKind::LimitUpdate, self.queue_node[q], limit);
        }
        if self.controlled[q] || q == self.ap_data_q {
            self.limit_rows.push((
                self.now,
                self.queue_node[q],
                self.queues[q].limit(),
                self.queues[q].occupancy() as f64,
            ));
        }
        self.at(self.now + self.cfg.ctl.interval, Ev::QueueTick { queue: q });
    }

    fn on_udp_send(&mut self, flow: u32) {
        if !self.active[flow as usize] {
            return;
        }
        let (pkt, next_gap, direction) = {
            let (size, dir, interval) = match &mut self.flows[flow as usize] {
                Flow::Udp(u) => {
                    u.sent += 1;
                    (u.packet_size, u.direction, u.interval)
                }
                Flow::Tcp(_) => unreachable!("UdpSend for a TCP flow"),
            };
            let gap = self.udp_rngs[flow as usize]
                .as_mut()
                .expect("udp flow has an arrival stream")
                .exp(interval);
            let pkt = Packet {
                flow,
                kind: PacketKind::Udp,
                bytes: size,
                sent_at: self.now,
                epoch: 0,
            };
            (pkt, gap, dir)
        };
        self.created += 1;
        match direction {
            FlowDirection::Upload => {
                let q = self.routes[flow as usize].data_queue;
                self.enqueue(q, pkt);
            }
            FlowDirection::Download => {
                self.in_wired += 1;
                let at = self.lane_to_ap.arrival(&self.cfg.wired, self.now, pkt.bytes);
                self.at(at, Ev::WiredArrival { pkt });
            }
        }
        self.at(self.now + next_gap, Ev::UdpSend { flow });
    }

    fn topup_saturated(&mut self, flow: u32) {
        if !self.active[flow as usize] {
            return;
        }
        let q = self.routes[flow as usize].data_queue;
        let (size, target) = match &self.flows[flow as usize] {
            Flow::Udp(u) => (u.packet_size, (2 * self.cfg.k_agg).max(2) as usize),
            Flow::Tcp(_) => return,
        };
        let now = SimTime::from_secs(self.now);
        while self.queues[q].occupancy() < target
            && (self.queues[q].occupancy() as f64) < self.queues[q].limit()
        {
            let pkt = Packet {
                flow,
                kind: PacketKind::Udp,
                bytes: size,
                sent_at: self.now,
                epoch: 0,
            };
            self.created += 1;
            match &mut self.flows[flow as usize] {
                Flow::Udp(u) => u.sent += 1,
                Flow::Tcp(_) => unreachable!(),
            }
            match self.queues[q].try_enqueue(pkt, now) {
                Admission::Admitted(occ) => {
                    self.emit(TraceKind::Enqueue, self.queue_node[q], occ as f64);
                    if !self.channel_pending {
                        self.wlan.wake(now);
                        self.channel_pending = true;
                        self.at(self.now, Ev::ChannelStep);
                    }
                }
                Admission::Dropped(_) => {
                    self.dropped += 1;
                    match &mut self.flows[flow as usize] {
                        Flow::Udp(u) => u.dropped += 1,
                        Flow::Tcp(_) => unreachable!(),
                    }
                    break;
                }
            }
        }
    }

    fn on_start_uploads(&mut self) {
        for id in 0..self.flows.len() as u32 {
            if let Flow::Tcp(f) = &self.flows[id as usize] {
                if f.direction == FlowDirection::Upload && !self.active[id as usize] {
                    self.active[id as usize] = true;
                    self.pump_tcp(id);
                }
            }
        }
    }

    fn on_start_udp(&mut self) {
        for id in 0..self.flows.len() as u32 {
            let (saturated, interval_flow) = match &self.flows[id as usize] {
                Flow::Udp(u) => (u.saturated(), !u.saturated()),
                Flow::Tcp(_) => continue,
            };
            if self.active[id as usize] {
                continue;
            }
            self.active[id as usize] = true;
            if saturated {
                self.topup_saturated(id);
            } else if interval_flow {
                self.at(self.now, Ev::UdpSend { flow: id });
            }
        }
    }

    fn on_short_flow_start(&mut self, class: usize) {
        let (size, station) = self.short_classes[class];
        let packets = size.div_ceil(self.cfg.payload as u64);
        let f = TcpFlow::new_short(
            self.flows.len() as u32,
            FlowDirection::Download,
            station,
            self.cfg.awnd,
            self.cfg.beta,
            self.cfg.wired.rtt,
            packets,
            self.now,
        );
        let id = self.flows.len() as u32;
        self.push_flow(Flow::Tcp(f), true, None);
        self.pump_tcp(id);
        let interval = self.cfg.short_flows.as_ref().map_or(10.0, |s| s.interval);
        self.at(self.now + interval, Ev::ShortFlowStart { class });
    }

    fn on_warmup(&mut self) {
        let now = SimTime::from_secs(self.now);
        for q in &mut self.queues {
            q.reset_stats(now);
        }
    }

    // ---- reporting ---------------------------------------------------------

    fn build_report(&mut self) -> MetricsReport {
        let cfg = &self.cfg;
        let span = cfg.duration - cfg.warmup;
        let now = SimTime::from_secs(cfg.duration);

        let mut flows = Vec::new();
        let mut down_bits = 0.0;
        let mut up_bits = 0.0;
        let mut max_srtt_down: f64 = 0.0;
        let mut max_srtt_up: f64 = 0.0;
        let mut rtos = 0;
        let mut sent_total = 0;
        for (i, fl) in self.flows.iter().enumerate() {
            let delivered_bits = match fl {
                Flow::Tcp(_) => self.delivered_pw[i] as f64 * 8.0 * cfg.payload as f64,
                Flow::Udp(u) => self.delivered_pw[i] as f64 * 8.0 * u.packet_size as f64,
            };
            let goodput = delivered_bits / span;
            match fl.direction() {
                FlowDirection::Download => down_bits += delivered_bits,
                FlowDirection::Upload => up_bits += delivered_bits,
            }
            let (class, drops, flow_rtos, completed, sent, acked, in_flight) = match fl {
                Flow::Tcp(f) => {
                    let class = match (f.direction, f.size_packets) {
                        (_, Some(_)) => {
                            let size = self
                                .short_classes
                                .iter()
                                .find(|(_, st)| *st == f.station)
                                .map_or(0, |(s, _)| *s);
                            format!("short-{size}")
                        }
                        (FlowDirection::Download, None) => "download".to_string(),
                        (FlowDirection::Upload, None) => "upload".to_string(),
                    };
                    if f.size_packets.is_none() {
                        match f.direction {
                            FlowDirection::Download => {
                                max_srtt_down = max_srtt_down.max(self.srtt_max_pw[i])
                            }
                            FlowDirection::Upload => {
                                max_srtt_up = max_srtt_up.max(self.srtt_max_pw[i])
                            }
                        }
                    }
                    rtos += f.rtos;
                    sent_total += f.sent;
                    let done = f.completed_at.map(|t| t - f.started_at);
                    (class, f.dropped, f.rtos, done, f.sent, f.acked, f.in_flight() as u64)
                }
                Flow::Udp(u) => {
                    let class = match u.direction {
                        FlowDirection::Download => "udp-down".to_string(),
                        FlowDirection::Upload => "udp-up".to_string(),
                    };
                    sent_total += u.sent;
                    (class, u.dropped, 0, None, u.sent, 0, 0)
                }
            };
            flows.push(FlowMetrics {
                flow: i as u32,
                class,
                direction: fl.direction(),
                goodput_bps: goodput,
                max_srtt: self.srtt_max_pw[i],
                drops,
                rtos: flow_rtos,
                completed,
                sent,
                acked,
                in_flight,
                notify_pending: self.notify_pending[i],
            });
        }

        let down_goodput = down_bits / span;
        let up_goodput = up_bits / span;
        let has_downloads =
            cfg.downloads + cfg.udp_downloads + self.short_classes.len() as u32 > 0;
        let ap_goodput = if has_downloads { down_goodput } else { up_goodput };

        let (mean_occ, max_occ, mean_limit) = self.queues[self.ap_data_q].stats(now);
        let resident: u64 =
            self.queues.iter().map(|q| q.occupancy() as u64).sum::<u64>() + self.in_wired;

        MetricsReport {
            duration: cfg.duration,
            warmup: cfg.warmup,
            measured_span: span,
            seed: cfg.seed,
            config_hash: cfg.hash(),
            traffic_key: cfg.traffic_key(),
            flows,
            download_goodput_bps: down_goodput,
            upload_goodput_bps: up_goodput,
            ap_goodput_bps: ap_goodput,
            efficiency: None,
            max_srtt_download: max_srtt_down,
            max_srtt_upload: max_srtt_up,
            ap_mean_occupancy: mean_occ,
            ap_max_occupancy: max_occ,
            ap_mean_limit: mean_limit,
            ap_drops: self.queues[self.ap_data_q].drops_since_reset(),
            limit_series: self
                .limit_rows
                .iter()
                .filter(|(_, node, _, _)| *node == 0)
                .map(|(t, _, l, o)| (*t, *l, *o))
                .collect(),
            limit_rows: std::mem::take(&mut self.limit_rows),
            congestion_events: std::mem::take(&mut self.congestion_events),
            ap_service_mean_s: if self.ap_service_pkts > 0 {
                self.ap_service_span / self.ap_service_pkts as f64
            } else {
                0.0
            },
            ap_service_packets: self.ap_service_pkts,
            drops: self.dropped,
            rtos,
            channel: self.wlan.stats(),
            packets_created: self.created,
            packets_delivered: self.delivered,
            packets_dropped: self.dropped,
            packets_resident: resident,
            packets_sent_sources: sent_total,
        }
    }
}

/// Run a scenario to completion and return its report.
pub fn run_scenario(cfg: &ScenarioConfig) -> MetricsReport {
    World::new(cfg).run().0
}

/// Run a scenario with a trace sink attached; returns the report and the
/// (flushed) sink.
pub fn run_scenario_traced(cfg: &ScenarioConfig, trace: TraceSink) -> (MetricsReport, TraceSink) {
    World::with_trace(cfg, trace).run()
}
