use std::collections::BTreeMap;
use std::fmt;

use crate::bufsizing::{AltState, AstarState, BufferController, EbdpState};
use crate::mac::{PhyParams, PhyPreset};
use crate::transport::WiredLink;

/// Configuration problems carry the offending key so sweeps fail loudly.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, text: String },
    UnknownKey { key: String },
    BadValue { key: String, value: String, expect: &'static str },
    Invalid { key: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, text } => {
                write!(f, "config line {line}: expected `section.key = value`, got `{text}`")
            }
            ConfigError::UnknownKey { key } => write!(f, "unknown config key `{key}`"),
            ConfigError::BadValue { key, value, expect } => {
                write!(f, "config key `{key}`: bad value `{value}` (expected {expect})")
            }
            ConfigError::Invalid { key, msg } => write!(f, "config key `{key}`: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Flat `section.key = value` configuration text.
///
/// Lines are `key = value` pairs; `#` starts a comment; blank lines are
/// ignored. Later assignments override earlier ones, which is how CLI
/// `--set` overrides work.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Parse { line: i + 1, text: raw.trim().to_string() })?;
            cfg.set(k.trim(), v.trim());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    /// Canonical `key = value` listing (sorted), used for config hashing
    /// and for matching traffic configurations between runs.
    pub fn normalized(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Normalized text with the given key prefixes removed.
    pub fn normalized_without(&self, skip_prefixes: &[&str]) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            if skip_prefixes.iter().any(|p| k.starts_with(p)) {
                continue;
            }
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(v).ok_or(ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                expect: "a number",
            }),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().ok().or_else(|| parse_f64(v).map(|f| f as u64)).ok_or(
                ConfigError::BadValue { key: key.into(), value: v.into(), expect: "an integer" },
            ),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                expect: "true or false",
            }),
        }
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    let f: f64 = v.parse().ok()?;
    f.is_finite().then_some(f)
}

/// 64-bit FNV-1a over the normalized config (seed excluded), identifying a
/// configuration in summary rows.
pub fn config_hash(cfg: &Config) -> String {
    let text = cfg.normalized_without(&["sim.seed"]);
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Buffer policy for a node role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BufferMode {
    Fixed(f64),
    Ebdp,
    Alt,
    Astar,
}

impl BufferMode {
    pub fn parse(s: &str) -> Option<BufferMode> {
        match s {
            "ebdp" => Some(BufferMode::Ebdp),
            "alt" => Some(BufferMode::Alt),
            "astar" => Some(BufferMode::Astar),
            _ => {
                let inner = s.strip_prefix("fixed(")?.strip_suffix(')')?;
                let n: f64 = inner.trim().parse().ok()?;
                (n >= 1.0).then_some(BufferMode::Fixed(n))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            BufferMode::Fixed(n) => format!("fixed({n})"),
            BufferMode::Ebdp => "ebdp".into(),
            BufferMode::Alt => "alt".into(),
            BufferMode::Astar => "astar".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacMode {
    Dcf,
    Edca,
}

/// Queue-limit controller parameters shared by every controlled queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    pub a1: f64,
    pub b1: f64,
    pub interval: f64,
    pub q_thr: f64,
    pub t_max: f64,
    pub c: f64,
    pub w: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q0: f64,
    pub ebdp_q_max: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            a1: 10.0,
            b1: 1.0,
            interval: 1.0,
            q_thr: 0.0,
            t_max: 0.2,
            c: 5.0,
            w: 0.001,
            q_min: 5.0,
            q_max: 1600.0,
            q0: 30.0,
            ebdp_q_max: 1600.0,
        }
    }
}

impl ControllerParams {
    pub fn build(&self, mode: BufferMode) -> BufferController {
        match mode {
            BufferMode::Fixed(n) => BufferController::Fixed(n),
            BufferMode::Ebdp => {
                BufferController::Ebdp(EbdpState::new(self.t_max, self.c, self.w, self.ebdp_q_max))
            }
            BufferMode::Alt => BufferController::Alt(self.alt()),
            BufferMode::Astar => BufferController::Astar(AstarState {
                ebdp: EbdpState::new(self.t_max, self.c, self.w, self.ebdp_q_max),
                alt: self.alt(),
            }),
        }
    }

    fn alt(&self) -> AltState {
        AltState::new(self.a1, self.b1, self.interval, self.q_thr, self.q_min, self.q_max, self.q0)
    }
}

/// Short-flow generator: one station per connection size, a new transfer of
/// each size every `interval` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortFlowCfg {
    pub sizes: Vec<u64>,
    pub interval: f64,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub preset: PhyPreset,
    pub phy: PhyParams,
    pub payload: u32,
    pub downloads: u32,
    pub uploads: u32,
    pub upload_start: f64,
    pub wired: WiredLink,
    pub mac_mode: MacMode,
    pub ber: f64,
    pub k_agg: u32,
    pub ap_buffer: BufferMode,
    pub sta_buffer: BufferMode,
    pub duration: f64,
    pub warmup: f64,
    pub seed: u64,
    pub ctl: ControllerParams,
    pub awnd: f64,
    pub beta: f64,
    pub udp_uploads: u32,
    pub udp_downloads: u32,
    pub udp_packet_size: u32,
    pub udp_interval: f64,
    pub udp_start: f64,
    pub short_flows: Option<ShortFlowCfg>,
    raw: Config,
}

impl ScenarioConfig {
    pub fn from_config(raw: &Config) -> Result<ScenarioConfig, ConfigError> {
        let preset_name = raw.get("phy.preset").unwrap_or("54/6");
        let preset = PhyPreset::parse(preset_name).ok_or(ConfigError::BadValue {
            key: "phy.preset".into(),
            value: preset_name.into(),
            expect: "one of 1/1, 11/1, 54/6, 216/54",
        })?;
        let mut phy = preset.params();
        let payload = raw.u64_or("phy.payload", phy.payload_default as u64)? as u32;
        phy.payload_default = payload;
        phy.retry_limit = raw.u64_or("phy.retry_limit", phy.retry_limit as u64)? as u32;
        phy.validate().map_err(|msg| ConfigError::Invalid { key: "phy".into(), msg })?;

        let mac_mode = match raw.get("mac.mode").unwrap_or("edca") {
            "edca" => MacMode::Edca,
            "dcf" => MacMode::Dcf,
            v => {
                return Err(ConfigError::BadValue {
                    key: "mac.mode".into(),
                    value: v.into(),
                    expect: "dcf or edca",
                })
            }
        };

        let parse_buffer = |key: &str, default: &str| -> Result<BufferMode, ConfigError> {
            let v = raw.get(key).unwrap_or(default);
            BufferMode::parse(v).ok_or(ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                expect: "fixed(N), ebdp, alt or astar",
            })
        };

        let defaults = ControllerParams::default();
        let ctl = ControllerParams {
            a1: raw.f64_or("controller.a1", defaults.a1)?,
            b1: raw.f64_or("controller.b1", defaults.b1)?,
            interval: raw.f64_or("controller.interval", defaults.interval)?,
            q_thr: raw.f64_or("controller.q_thr", defaults.q_thr)?,
            t_max: raw.f64_or("controller.t_max", defaults.t_max)?,
            c: raw.f64_or("controller.c", defaults.c)?,
            w: raw.f64_or("controller.w", defaults.w)?,
            q_min: raw.f64_or("controller.q_min", defaults.q_min)?,
            q_max: raw.f64_or("controller.q_max", defaults.q_max)?,
            q0: raw.f64_or("controller.q0", defaults.q0)?,
            ebdp_q_max: raw.f64_or("controller.ebdp_q_max", raw.f64_or("controller.q_max", defaults.q_max)?)?,
        };
        for (key, ok) in [
            ("controller.a1", ctl.a1 > 0.0),
            ("controller.b1", ctl.b1 > 0.0),
            ("controller.interval", ctl.interval > 0.0),
            ("controller.w", ctl.w > 0.0 && ctl.w < 1.0),
            ("controller.q_min", ctl.q_min >= 0.0 && ctl.q_min <= ctl.q_max),
        ] {
            if !ok {
                return Err(ConfigError::Invalid { key: key.into(), msg: "out of range".into() });
            }
        }

        let short_flows = if raw.bool_or("shortflows.enabled", false)? {
            let sizes_text = raw.get("shortflows.sizes").unwrap_or("5120,20480,30720,102400");
            let mut sizes = Vec::new();
            for part in sizes_text.split(',') {
                let s: u64 = part.trim().parse().map_err(|_| ConfigError::BadValue {
                    key: "shortflows.sizes".into(),
                    value: sizes_text.into(),
                    expect: "comma-separated byte counts",
                })?;
                sizes.push(s);
            }
            Some(ShortFlowCfg { sizes, interval: raw.f64_or("shortflows.interval", 10.0)? })
        } else {
            None
        };

        let cfg = ScenarioConfig {
            preset,
            phy,
            payload,
            downloads: raw.u64_or("topology.downloads", 0)? as u32,
            uploads: raw.u64_or("topology.uploads", 0)? as u32,
            upload_start: raw.f64_or("topology.upload_start", 0.0)?,
            wired: WiredLink {
                bandwidth: raw.f64_or("wired.bandwidth", 100e6)?,
                rtt: raw.f64_or("wired.rtt", 0.2)?,
            },
            mac_mode,
            ber: raw.f64_or("channel.ber", 0.0)?,
            k_agg: raw.u64_or("channel.k_agg", preset.default_aggregation() as u64)? as u32,
            ap_buffer: parse_buffer("buffer.ap", "fixed(400)")?,
            sta_buffer: parse_buffer("buffer.sta", "fixed(400)")?,
            duration: raw.f64_or("sim.duration", 300.0)?,
            warmup: raw.f64_or("sim.warmup", 20.0)?,
            seed: raw.u64_or("sim.seed", 1)?,
            ctl,
            awnd: raw.f64_or("tcp.awnd", 4096.0)?,
            beta: raw.f64_or("tcp.beta", 0.5)?,
            udp_uploads: raw.u64_or("udp.uploads", 0)? as u32,
            udp_downloads: raw.u64_or("udp.downloads", 0)? as u32,
            udp_packet_size: raw.u64_or("udp.packet_size", 1000)? as u32,
            udp_interval: raw.f64_or("udp.interval", 0.0)?,
            udp_start: raw.f64_or("udp.start", 0.0)?,
            short_flows,
            raw: raw.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.duration <= self.warmup {
            return Err(ConfigError::Invalid {
                key: "sim.duration".into(),
                msg: format!("duration {} must exceed warmup {}", self.duration, self.warmup),
            });
        }
        let flows = self.downloads
            + self.uploads
            + self.udp_uploads
            + self.udp_downloads
            + self.short_flows.as_ref().map_or(0, |s| s.sizes.len() as u32);
        if flows == 0 {
            return Err(ConfigError::Invalid {
                key: "topology.downloads".into(),
                msg: "no traffic configured (need TCP, UDP, or short flows)".into(),
            });
        }
        if !(0.0..1.0).contains(&self.ber) {
            return Err(ConfigError::Invalid {
                key: "channel.ber".into(),
                msg: format!("bit error rate {} outside [0, 1)", self.ber),
            });
        }
        if self.k_agg < 1 {
            return Err(ConfigError::Invalid {
                key: "channel.k_agg".into(),
                msg: "aggregation must be >= 1 packet per frame".into(),
            });
        }
        if self.beta <= 0.0 || self.beta > 1.0 {
            return Err(ConfigError::Invalid {
                key: "tcp.beta".into(),
                msg: format!("backoff factor {} outside (0, 1]", self.beta),
            });
        }
        Ok(())
    }

    pub fn raw(&self) -> &Config {
        &self.raw
    }

    pub fn hash(&self) -> String {
        config_hash(&self.raw)
    }

    /// Key identifying the traffic/PHY side of the scenario: everything
    /// except buffer policy, seed, and controller tuning. Efficiency ratios
    /// are only meaningful between runs with equal keys.
    pub fn traffic_key(&self) -> String {
        self.raw.normalized_without(&["buffer.", "sim.seed", "controller."])
    }

    pub fn with_overrides(&self, pairs: &[(&str, &str)]) -> Result<ScenarioConfig, ConfigError> {
        let mut raw = self.raw.clone();
        for (k, v) in pairs {
            raw.set(k, v);
        }
        ScenarioConfig::from_config(&raw)
    }
}
