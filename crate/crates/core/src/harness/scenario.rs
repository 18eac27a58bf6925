//! Scenario description and the flat `key=value` config format.
//!
//! ```text
//! # comments and blank lines are ignored
//! layout=decentralised
//! clients=6
//! cross_size=100
//! policy=paced
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::{Layout, DEFAULT_QUEUE_CAPACITY};

/// Uniform reply jitter bound (seconds) of unpaced services.
pub const BASELINE_MX: f64 = 0.02;
/// Spacing between cross-traffic packets of one flow direction.
pub const CROSS_INTERVAL: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for key '{key}': {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid scenario: {key}: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Baseline,
    Paced,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Baseline => "baseline",
            PolicyKind::Paced => "paced",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" | "normal" => Ok(PolicyKind::Baseline),
            "paced" | "algorithm" => Ok(PolicyKind::Paced),
            other => Err(format!("unknown policy '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueueMode {
    /// Every link gets `queue_capacity`.
    Default,
    /// Links get at least the planner's required space.
    Planner,
}

impl fmt::Display for QueueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueueMode::Default => "default",
            QueueMode::Planner => "planner",
        })
    }
}

impl FromStr for QueueMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "default" => Ok(QueueMode::Default),
            "planner" => Ok(QueueMode::Planner),
            other => Err(format!("unknown queue mode '{other}'")),
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub layout: Layout,
    pub clients: usize,
    /// Cross-traffic packet size in bytes; 0 disables cross traffic.
    pub cross_size: u32,
    pub cross_interval: f64,
    pub cross_bidirectional: bool,
    pub policy: PolicyKind,
    /// Baseline jitter bound in seconds.
    pub mx: f64,
    /// Paced spacing override in seconds; planner value when `None`.
    pub interval: Option<f64>,
    /// Subtract the overlap credit when planning the interval.
    pub use_os: bool,
    pub queue_mode: QueueMode,
    pub queue_capacity: usize,
    pub seed: u64,
    pub sim_time: f64,
    pub request_time: f64,
    pub utilization_bin: f64,
    /// Skip the discovery exchange entirely (cross traffic only).
    pub discovery: bool,
}

impl Scenario {
    /// Reference scenario: baseline replies with default queues, or paced
    /// replies with planner queues.
    pub fn reference(layout: Layout, clients: usize, cross_size: u32, policy: PolicyKind) -> Self {
        let queue_mode = match policy {
            PolicyKind::Baseline => QueueMode::Default,
            PolicyKind::Paced => QueueMode::Planner,
        };
        let mut s = Scenario {
            name: String::new(),
            layout,
            clients,
            cross_size,
            cross_interval: CROSS_INTERVAL,
            cross_bidirectional: true,
            policy,
            mx: BASELINE_MX,
            interval: None,
            use_os: true,
            queue_mode,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            seed: 1,
            sim_time: 100.0,
            request_time: 10.0,
            utilization_bin: 0.25,
            discovery: true,
        };
        s.name = s.default_name();
        s
    }

    pub fn default_name(&self) -> String {
        format!(
            "{}_c{}_x{}_{}",
            self.layout, self.clients, self.cross_size, self.policy
        )
    }

    /// Same scenario with the other reply policy and its matching queue mode.
    pub fn counterpart(&self, policy: PolicyKind) -> Self {
        let renamed = self.name == self.default_name();
        let mut s = self.clone();
        s.policy = policy;
        s.queue_mode = match policy {
            PolicyKind::Baseline => QueueMode::Default,
            PolicyKind::Paced => QueueMode::Planner,
        };
        if renamed {
            s.name = s.default_name();
        } else {
            s.name = format!("{}_{}", self.name, policy);
        }
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: &str| {
            Err(ConfigError::Invalid {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if self.clients == 0 {
            return bad("clients", "must be at least 1");
        }
        if !positive(self.sim_time) {
            return bad("sim_time", "must be positive");
        }
        if !non_negative(self.request_time) || self.request_time >= self.sim_time {
            return bad("request_time", "must lie inside [0, sim_time)");
        }
        if !positive(self.utilization_bin) {
            return bad("bin", "must be positive");
        }
        if self.cross_size > 0 && !positive(self.cross_interval) {
            return bad("cross_interval", "must be positive");
        }
        if !non_negative(self.mx) {
            return bad("mx", "must be non-negative");
        }
        if matches!(self.interval, Some(i) if !non_negative(i)) {
            return bad("interval", "must be non-negative");
        }
        if self.queue_capacity == 0 {
            return bad("queue_capacity", "must be at least 1");
        }
        Ok(())
    }

    /// Parse a config file. Unset keys keep the reference defaults for a
    /// decentralised baseline run with six clients and no cross traffic.
    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let mut s = Scenario::reference(Layout::Decentralised, 6, 0, PolicyKind::Baseline);
        let mut name: Option<String> = None;
        let mut queue_mode: Option<QueueMode> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let err = |reason: String| ConfigError::Value {
                key: key.to_string(),
                value: value.to_string(),
                reason,
            };
            fn num<T: FromStr>(v: &str) -> Result<T, String>
            where
                T::Err: fmt::Display,
            {
                v.parse::<T>().map_err(|e| e.to_string())
            }
            fn flag(v: &str) -> Result<bool, String> {
                match v.to_ascii_lowercase().as_str() {
                    "1" | "true" | "yes" | "on" => Ok(true),
                    "0" | "false" | "no" | "off" => Ok(false),
                    other => Err(format!("expected a boolean, got '{other}'")),
                }
            }
            match key {
                "name" => name = Some(value.to_string()),
                "layout" => s.layout = value.parse().map_err(err)?,
                "clients" => s.clients = num(value).map_err(err)?,
                "cross_size" => s.cross_size = num(value).map_err(err)?,
                "cross_interval" => s.cross_interval = num(value).map_err(err)?,
                "cross_bidirectional" => s.cross_bidirectional = flag(value).map_err(err)?,
                "policy" => s.policy = value.parse().map_err(err)?,
                "mx" => s.mx = num(value).map_err(err)?,
                "interval" => {
                    s.interval = if value.eq_ignore_ascii_case("auto") {
                        None
                    } else {
                        Some(num(value).map_err(err)?)
                    }
                }
                "use_os" => s.use_os = flag(value).map_err(err)?,
                "queue_mode" => queue_mode = Some(value.parse().map_err(err)?),
                "queue_capacity" => s.queue_capacity = num(value).map_err(err)?,
                "seed" => s.seed = num(value).map_err(err)?,
                "sim_time" => s.sim_time = num(value).map_err(err)?,
                "request_time" => s.request_time = num(value).map_err(err)?,
                "bin" | "utilization_bin" => s.utilization_bin = num(value).map_err(err)?,
                "discovery" => s.discovery = flag(value).map_err(err)?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        s.queue_mode = queue_mode.unwrap_or(match s.policy {
            PolicyKind::Baseline => QueueMode::Default,
            PolicyKind::Paced => QueueMode::Planner,
        });
        s.name = name.unwrap_or_else(|| s.default_name());
        s.validate()?;
        Ok(s)
    }

    /// Render as a config file that parses back to the same scenario.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("name", self.name.clone());
        kv("layout", self.layout.to_string());
        kv("clients", self.clients.to_string());
        kv("cross_size", self.cross_size.to_string());
        kv("cross_interval", self.cross_interval.to_string());
        kv("cross_bidirectional", self.cross_bidirectional.to_string());
        kv("policy", self.policy.to_string());
        kv("mx", self.mx.to_string());
        kv(
            "interval",
            self.interval.map_or("auto".into(), |i| i.to_string()),
        );
        kv("use_os", self.use_os.to_string());
        kv("queue_mode", self.queue_mode.to_string());
        kv("queue_capacity", self.queue_capacity.to_string());
        kv("seed", self.seed.to_string());
        kv("sim_time", self.sim_time.to_string());
        kv("request_time", self.request_time.to_string());
        kv("bin", self.utilization_bin.to_string());
        kv("discovery", self.discovery.to_string());
        out
    }
}
