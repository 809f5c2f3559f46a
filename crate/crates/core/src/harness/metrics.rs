use std::io::{BufWriter, Write};
use std::path::Path;

use crate::mac::ChannelStats;
use crate::transport::FlowDirection;

/// Per-flow results over the post-warmup window.
#[derive(Debug, Clone)]
pub struct FlowMetrics {
    pub flow: u32,
    pub class: String,
    pub direction: FlowDirection,
    pub goodput_bps: f64,
    pub max_srtt: f64,
    pub drops: u64,
    pub rtos: u64,
    /// Completion time for finite transfers.
    pub completed: Option<f64>,
    pub sent: u64,
    pub acked: u64,
    pub in_flight: u64,
    pub notify_pending: u64,
}

/// Steady-state results of one simulation run. All rates and RTT maxima
/// exclude the warmup window.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub duration: f64,
    pub warmup: f64,
    pub measured_span: f64,
    pub seed: u64,
    pub config_hash: String,
    pub traffic_key: String,
    pub flows: Vec<FlowMetrics>,
    pub download_goodput_bps: f64,
    pub upload_goodput_bps: f64,
    /// AP-side goodput used for efficiency ratios: the download aggregate
    /// when any download-direction traffic is configured, otherwise the
    /// upload aggregate.
    pub ap_goodput_bps: f64,
    pub efficiency: Option<f64>,
    pub max_srtt_download: f64,
    pub max_srtt_upload: f64,
    pub ap_mean_occupancy: f64,
    pub ap_max_occupancy: usize,
    pub ap_mean_limit: f64,
    pub ap_drops: u64,
    /// `(time, limit, occupancy)` for the AP data queue, one sample per
    /// controller interval.
    pub limit_series: Vec<(f64, f64, f64)>,
    /// `(time, node, limit, occupancy)` for every controlled queue.
    pub limit_rows: Vec<(f64, u16, f64, f64)>,
    /// `(time, AP limit)` at TCP congestion events.
    pub congestion_events: Vec<(f64, f64)>,
    pub ap_service_mean_s: f64,
    pub ap_service_packets: u64,
    pub drops: u64,
    pub rtos: u64,
    pub channel: ChannelStats,
    pub packets_created: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub packets_resident: u64,
    pub packets_sent_sources: u64,
}

impl MetricsReport {
    /// Measured AP service rate `1/T_serv` in packets/s.
    pub fn ap_service_rate_pps(&self) -> f64 {
        if self.ap_service_mean_s > 0.0 {
            1.0 / self.ap_service_mean_s
        } else {
            0.0
        }
    }

    /// Mean AP limit over `[from, to]` from the sampled series.
    pub fn mean_limit_between(&self, from: f64, to: f64) -> f64 {
        let pts: Vec<f64> = self
            .limit_series
            .iter()
            .filter(|(t, _, _)| *t >= from && *t <= to)
            .map(|(_, l, _)| *l)
            .collect();
        if pts.is_empty() {
            return self.ap_mean_limit;
        }
        pts.iter().sum::<f64>() / pts.len() as f64
    }

    /// Exact packet conservation: everything created is delivered, dropped,
    /// or still resident in a queue or on the wired link.
    pub fn conservation_holds(&self) -> bool {
        self.packets_created == self.packets_delivered + self.packets_dropped + self.packets_resident
    }
}

/// Throughput efficiency of `report` against `reference` (AP goodput
/// ratio). The two runs must share the same traffic/PHY configuration.
pub fn efficiency(report: &MetricsReport, reference: &MetricsReport) -> Result<f64, String> {
    if report.traffic_key != reference.traffic_key {
        return Err("efficiency requires matching traffic/PHY configurations".to_string());
    }
    if reference.ap_goodput_bps <= 0.0 {
        return Err("reference run carried no traffic".to_string());
    }
    Ok(report.ap_goodput_bps / reference.ap_goodput_bps)
}

/// Mean completion time per connection-size bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortFlowBucket {
    pub size_bytes: u64,
    pub completed: u64,
    pub mean_completion_s: f64,
}

/// Aggregate short-flow completion times by size. Buckets with no finished
/// transfer are omitted.
pub fn short_flow_stats(report: &MetricsReport) -> Vec<ShortFlowBucket> {
    let mut buckets: Vec<(u64, u64, f64)> = Vec::new();
    for f in &report.flows {
        let Some(done) = f.completed else { continue };
        let Some(size) = f.class.strip_prefix("short-").and_then(|s| s.parse::<u64>().ok()) else {
            continue;
        };
        match buckets.iter_mut().find(|(s, _, _)| *s == size) {
            Some((_, n, sum)) => {
                *n += 1;
                *sum += done;
            }
            None => buckets.push((size, 1, done)),
        }
    }
    buckets.sort_by_key(|(s, _, _)| *s);
    buckets
        .into_iter()
        .map(|(size_bytes, n, sum)| ShortFlowBucket {
            size_bytes,
            completed: n,
            mean_completion_s: sum / n as f64,
        })
        .collect()
}

/// One row of `summary.csv`. Plain runs leave the axis fields empty.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub axis: String,
    pub value: String,
    pub replicate: u32,
    pub report: MetricsReport,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `summary.csv`: one row per run.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "axis,value,replicate,config,seed,download_goodput_bps,upload_goodput_bps,efficiency,\
         max_srtt_down_s,max_srtt_up_s,mean_limit_pkts,mean_occupancy_pkts,drops,rtos"
    )?;
    for row in rows {
        let r = &row.report;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.axis,
            row.value,
            row.replicate,
            r.config_hash,
            r.seed,
            r.download_goodput_bps,
            r.upload_goodput_bps,
            fmt_opt(r.efficiency),
            r.max_srtt_download,
            r.max_srtt_upload,
            r.ap_mean_limit,
            r.ap_mean_occupancy,
            r.drops,
            r.rtos
        )?;
    }
    w.flush()
}

/// Write `flows.csv`: one row per flow per run.
pub fn write_flows_csv(path: &Path, rows: &[SummaryRow]) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "config,seed,flow,direction,goodput_bps,max_srtt_s,drops,rtos")?;
    for row in rows {
        let r = &row.report;
        for f in &r.flows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.config_hash,
                r.seed,
                f.flow,
                f.class,
                f.goodput_bps,
                f.max_srtt,
                f.drops,
                f.rtos
            )?;
        }
    }
    w.flush()
}

/// Write `limits.csv`: `time,node,limit,occupancy` samples.
pub fn write_limits_csv(path: &Path, report: &MetricsReport) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "time,node,limit,occupancy")?;
    for (t, node, limit, occ) in &report.limit_rows {
        writeln!(w, "{t},{node},{limit},{occ}")?;
    }
    w.flush()
}
