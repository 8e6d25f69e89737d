//! On-disk JSON instance format. See `docs/format.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AppGraph, DeviceProfile, Instance, RadioInterface};
use crate::error::{Error, Result, ValidationError};

/// The 14-component profile shipped with the crate.
pub const BUNDLED_PROFILE14: &str = include_str!("../../data/profile14.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    #[serde(rename = "s")]
    Seconds,
    #[serde(rename = "ms")]
    Milliseconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerUnit {
    #[serde(rename = "W")]
    Watts,
    #[serde(rename = "mW")]
    Milliwatts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateUnit {
    #[serde(rename = "bps")]
    Bps,
    #[serde(rename = "kbps")]
    Kbps,
    #[serde(rename = "Mbps")]
    Mbps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataUnit {
    #[serde(rename = "bit")]
    Bit,
    #[serde(rename = "kbit")]
    Kbit,
    #[serde(rename = "Mbit")]
    Mbit,
}

/// Units the numbers in a file are expressed in. Missing keys mean SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default = "seconds")]
    pub time: TimeUnit,
    #[serde(default = "watts")]
    pub power: PowerUnit,
    #[serde(default = "bps")]
    pub rate: RateUnit,
    #[serde(default = "bits")]
    pub data: DataUnit,
}

fn seconds() -> TimeUnit {
    TimeUnit::Seconds
}
fn watts() -> PowerUnit {
    PowerUnit::Watts
}
fn bps() -> RateUnit {
    RateUnit::Bps
}
fn bits() -> DataUnit {
    DataUnit::Bit
}

impl Default for Units {
    fn default() -> Self {
        Self::SI
    }
}

impl Units {
    pub const SI: Units = Units {
        time: TimeUnit::Seconds,
        power: PowerUnit::Watts,
        rate: RateUnit::Bps,
        data: DataUnit::Bit,
    };

    // Sub-unit conversions divide so that e.g. 340 ms becomes exactly 0.34 s.
    fn time(&self, v: f64) -> f64 {
        match self.time {
            TimeUnit::Seconds => v,
            TimeUnit::Milliseconds => v / 1000.0,
        }
    }

    fn power(&self, v: f64) -> f64 {
        match self.power {
            PowerUnit::Watts => v,
            PowerUnit::Milliwatts => v / 1000.0,
        }
    }

    fn rate(&self, v: f64) -> f64 {
        match self.rate {
            RateUnit::Bps => v,
            RateUnit::Kbps => v * 1e3,
            RateUnit::Mbps => v * 1e6,
        }
    }

    fn data(&self, v: f64) -> f64 {
        match self.data {
            DataUnit::Bit => v,
            DataUnit::Kbit => v * 1e3,
            DataUnit::Mbit => v * 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub alpha: Vec<Vec<u8>>,
    pub data: Vec<Vec<f64>>,
    pub local_time: Vec<f64>,
    pub cloud_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub active_power: Vec<f64>,
    pub idle_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub uplink_rate: f64,
    pub downlink_rate: f64,
    pub tx_power: f64,
    pub rx_power: f64,
    pub demand_rate: f64,
    #[serde(default)]
    pub rtt: f64,
}

/// Serialized form of an [`Instance`], numbers in the declared `units`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub units: Units,
    pub graph: GraphFile,
    pub device: DeviceFile,
    pub radios: Vec<RadioFile>,
    /// Deadline; `null` or absent means none.
    #[serde(default)]
    pub t_req: Option<f64>,
    /// Defaults to the first and last component.
    #[serde(default)]
    pub pinned_local: Option<Vec<usize>>,
    #[serde(default)]
    pub synthetic_fields: Vec<String>,
}

impl InstanceFile {
    /// Converts to SI and validates.
    pub fn into_instance(self) -> Result<Instance> {
        let u = self.units;
        let m = self.graph.alpha.len();
        let mut alpha = Vec::with_capacity(m);
        for (i, row) in self.graph.alpha.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => out.push(false),
                    1 => out.push(true),
                    value => return Err(ValidationError::NonBinaryDependency { from: i, to: j, value }.into()),
                }
            }
            alpha.push(out);
        }
        let data = self
            .graph
            .data
            .iter()
            .map(|row| row.iter().map(|&v| u.data(v)).collect())
            .collect();
        let local_time = self.graph.local_time.iter().map(|&v| u.time(v)).collect();
        let cloud_time = self.graph.cloud_time.iter().map(|&v| u.time(v)).collect();
        let graph = AppGraph::new(alpha, data, local_time, cloud_time)?;

        let device = DeviceProfile {
            active_power: self.device.active_power.iter().map(|&v| u.power(v)).collect(),
            idle_power: u.power(self.device.idle_power),
        };
        let radios = self
            .radios
            .iter()
            .enumerate()
            .map(|(k, r)| RadioInterface {
                name: if r.name.is_empty() {
                    format!("radio{k}")
                } else {
                    r.name.clone()
                },
                uplink_rate: u.rate(r.uplink_rate),
                downlink_rate: u.rate(r.downlink_rate),
                tx_power: u.power(r.tx_power),
                rx_power: u.power(r.rx_power),
                demand_rate: u.rate(r.demand_rate),
                rtt: u.time(r.rtt),
            })
            .collect();
        let t_req = self.t_req.map_or(f64::INFINITY, |t| u.time(t));
        let inst = match self.pinned_local {
            Some(pins) => Instance::new(graph, device, radios, t_req, pins)?,
            None => Instance::with_default_pins(graph, device, radios, t_req)?,
        };
        Ok(inst.with_synthetic_fields(self.synthetic_fields))
    }

    /// SI-unit file representation of an instance.
    pub fn from_instance(inst: &Instance) -> Self {
        let g = inst.graph();
        Self {
            units: Units::SI,
            graph: GraphFile {
                alpha: g
                    .alpha_matrix()
                    .iter()
                    .map(|row| row.iter().map(|&a| a as u8).collect())
                    .collect(),
                data: g.data_matrix().to_vec(),
                local_time: g.local_times().to_vec(),
                cloud_time: g.cloud_times().to_vec(),
            },
            device: DeviceFile {
                active_power: inst.device().active_power.clone(),
                idle_power: inst.device().idle_power,
            },
            radios: inst
                .radios()
                .iter()
                .map(|r| RadioFile {
                    name: r.name.clone(),
                    uplink_rate: r.uplink_rate,
                    downlink_rate: r.downlink_rate,
                    tx_power: r.tx_power,
                    rx_power: r.rx_power,
                    demand_rate: r.demand_rate,
                    rtt: r.rtt,
                })
                .collect(),
            t_req: inst.t_req().is_finite().then(|| inst.t_req()),
            pinned_local: Some(inst.pinned_local().iter().copied().collect()),
            synthetic_fields: inst.synthetic_fields().to_vec(),
        }
    }
}

impl Instance {
    /// Pretty-printed JSON in SI units.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("instance serializes")
    }

    /// The bundled 14-component profile.
    pub fn profile14() -> Instance {
        parse_instance(BUNDLED_PROFILE14).expect("bundled profile is valid")
    }
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(json)?;
    file.into_instance()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text)
}
