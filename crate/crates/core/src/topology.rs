//! Immutable network model and random topology generation.
//!
//! A topology holds monitoring points, sensor nodes and base stations on an
//! integer grid, the candidate sensor-to-base links implied by communication
//! ranges, and the derived coverage and reach indices. It is immutable after
//! construction and safe to share read-only across threads.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{BaseId, PointId, Rate, SensorId};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("region {width}x{height} cannot host {needed} distinct grid coordinates")]
    RegionTooSmall { width: i64, height: i64, needed: usize },
    #[error("unknown monitoring point id {0}")]
    UnknownPoint(PointId),
    #[error("invalid topology document: {0}")]
    InvalidDocument(String),
}

/// Grid coordinate in meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: i64,
    pub y: i64,
}

impl Coord {
    pub fn distance(&self, other: &Coord) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

/// A location whose data applications request. Each point serves exactly one
/// data type, which fixes the rate interval requests for it may use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitoringPoint {
    pub id: PointId,
    pub position: Coord,
    pub data_type: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: SensorId,
    pub position: Coord,
    pub sensing_range: f64,
    pub comm_range: f64,
    pub sensing_capacity: Rate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: BaseId,
    pub position: Coord,
    pub processing_capacity: Rate,
}

/// A possible sensor-to-base connection. Exists iff the base lies within the
/// sensor's communication range; all links share the same bandwidth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateLink {
    pub sensor_id: SensorId,
    pub base_id: BaseId,
    pub bandwidth: Rate,
}

/// Generation parameters. Defaults follow the evaluation setup: a 1000 m
/// square region, 300 points, 250 sensors, 30 bases, communication range
/// 200-250 m and sensing range 30-50 m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub region_width: i64,
    pub region_height: i64,
    pub num_points: usize,
    pub num_sensors: usize,
    pub num_bases: usize,
    /// Inclusive interval the communication range is drawn from, per sensor.
    pub comm_range: (f64, f64),
    /// Inclusive interval the sensing range is drawn from, per sensor.
    pub sensing_range: (f64, f64),
    pub sensing_capacity: Rate,
    pub link_bandwidth: Rate,
    pub processing_capacity: Rate,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            region_width: 1000,
            region_height: 1000,
            num_points: 300,
            num_sensors: 250,
            num_bases: 30,
            comm_range: (200.0, 250.0),
            sensing_range: (30.0, 50.0),
            sensing_capacity: 100.0,
            link_bandwidth: 100.0,
            processing_capacity: 1000.0,
        }
    }
}

/// Immutable network graph plus derived coverage/reach indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub params: TopologyParams,
    pub seed: u64,
    pub region: (i64, i64),
    pub points: Vec<MonitoringPoint>,
    pub sensors: Vec<SensorNode>,
    pub bases: Vec<BaseStation>,
    pub links: Vec<CandidateLink>,
    /// Per point, the sensors whose sensing range contains it (the set S_k),
    /// sorted by id.
    #[serde(skip)]
    pub coverage: Vec<Vec<SensorId>>,
    /// Per sensor, the bases it has a candidate link to, sorted by id.
    #[serde(skip)]
    pub reach: Vec<Vec<BaseId>>,
}

impl Topology {
    /// Builds a topology from explicit elements, deriving links, coverage
    /// and reach from the geometry.
    pub fn from_elements(
        params: TopologyParams,
        seed: u64,
        points: Vec<MonitoringPoint>,
        sensors: Vec<SensorNode>,
        bases: Vec<BaseStation>,
    ) -> Topology {
        let mut topo = Topology {
            region: (params.region_width, params.region_height),
            params,
            seed,
            points,
            sensors,
            bases,
            links: Vec::new(),
            coverage: Vec::new(),
            reach: Vec::new(),
        };
        topo.links = topo
            .sensors
            .iter()
            .flat_map(|s| {
                let bw = topo.params.link_bandwidth;
                topo.bases
                    .iter()
                    .filter(move |b| s.position.distance(&b.position) <= s.comm_range)
                    .map(move |b| CandidateLink {
                        sensor_id: s.id,
                        base_id: b.id,
                        bandwidth: bw,
                    })
            })
            .collect();
        topo.rebuild_indices();
        topo
    }

    /// Recomputes coverage and reach from points, sensors and links.
    pub fn rebuild_indices(&mut self) {
        self.coverage = self
            .points
            .iter()
            .map(|p| {
                self.sensors
                    .iter()
                    .filter(|s| s.position.distance(&p.position) <= s.sensing_range)
                    .map(|s| s.id)
                    .collect()
            })
            .collect();
        self.reach = vec![Vec::new(); self.sensors.len()];
        for link in &self.links {
            self.reach[link.sensor_id].push(link.base_id);
        }
        for bases in &mut self.reach {
            bases.sort_unstable();
        }
    }

    /// Exactly the sensors within sensing range of the point, sorted by id.
    pub fn coverage_of(&self, point: PointId) -> Result<&[SensorId], TopologyError> {
        self.coverage
            .get(point)
            .map(|v| v.as_slice())
            .ok_or(TopologyError::UnknownPoint(point))
    }

    /// Covering sensors that can also reach a base station. Only these are
    /// candidates for assignment; a sensor with no base in range cannot serve.
    pub fn assignable_sensors(&self, point: PointId) -> impl Iterator<Item = SensorId> + '_ {
        self.coverage
            .get(point)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |&s| !self.reach[s].is_empty())
    }

    pub fn link_bandwidth(&self) -> Rate {
        self.params.link_bandwidth
    }

    pub fn has_link(&self, sensor: SensorId, base: BaseId) -> bool {
        self.reach
            .get(sensor)
            .map_or(false, |bases| bases.binary_search(&base).is_ok())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn from_json(doc: &str) -> Result<Topology, TopologyError> {
        let mut topo: Topology = serde_json::from_str(doc)
            .map_err(|e| TopologyError::InvalidDocument(e.to_string()))?;
        topo.rebuild_indices();
        Ok(topo)
    }
}

/// Generates a random topology. Pure in `(params, seed)`: identical inputs
/// yield a bit-identical topology. Coordinates are drawn uniformly over the
/// integer grid of the region with rejection of duplicates; ranges are drawn
/// uniformly from their intervals.
pub fn generate_topology(params: &TopologyParams, seed: u64) -> Result<Topology, TopologyError> {
    let total = params.num_points + params.num_sensors + params.num_bases;
    let capacity = (params.region_width.max(0) as u128) * (params.region_height.max(0) as u128);
    if (total as u128) > capacity {
        return Err(TopologyError::RegionTooSmall {
            width: params.region_width,
            height: params.region_height,
            needed: total,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut used = HashSet::with_capacity(total);
    let mut coords = Vec::with_capacity(total);
    if (total as u128) * 2 > capacity {
        // Dense request: enumerate the grid and take a random sample instead
        // of rejection sampling.
        let all: Vec<Coord> = (0..params.region_width)
            .flat_map(|x| (0..params.region_height).map(move |y| Coord { x, y }))
            .collect();
        let picked = rand::seq::index::sample(&mut rng, all.len(), total);
        coords.extend(picked.iter().map(|i| all[i]));
    } else {
        while coords.len() < total {
            let c = Coord {
                x: rng.gen_range(0..params.region_width),
                y: rng.gen_range(0..params.region_height),
            };
            if used.insert(c) {
                coords.push(c);
            }
        }
    }

    let mut it = coords.into_iter();
    let points = (0..params.num_points)
        .map(|id| MonitoringPoint {
            id,
            position: it.next().unwrap(),
            data_type: rng.gen_range(0..3u8),
        })
        .collect();
    let sensors = (0..params.num_sensors)
        .map(|id| SensorNode {
            id,
            position: it.next().unwrap(),
            sensing_range: rng.gen_range(params.sensing_range.0..=params.sensing_range.1),
            comm_range: rng.gen_range(params.comm_range.0..=params.comm_range.1),
            sensing_capacity: params.sensing_capacity,
        })
        .collect();
    let bases = (0..params.num_bases)
        .map(|id| BaseStation {
            id,
            position: it.next().unwrap(),
            processing_capacity: params.processing_capacity,
        })
        .collect();

    Ok(Topology::from_elements(params.clone(), seed, points, sensors, bases))
}
