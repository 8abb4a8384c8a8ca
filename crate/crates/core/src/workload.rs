//! Application set generation: requests, arrival batches, deadlines, and the
//! six scenario parameter sweeps.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{Topology, TopologyParams};
use crate::{AppId, PointId, Rate, Time};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("applications request up to {requested} points but the topology has only {available}")]
    NotEnoughPoints { requested: usize, available: usize },
    #[error("unknown scenario id {0} (valid: 1..=6)")]
    UnknownScenario(u8),
    #[error("invalid workload document: {0}")]
    InvalidDocument(String),
}

/// Rate interval for each data type.
pub const DATA_TYPE_RATES: [(Rate, Rate); 3] = [(5.0, 20.0), (15.0, 40.0), (25.0, 60.0)];

/// One monitoring point an application wants sensed, at a rate drawn from the
/// point's data-type interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub point_id: PointId,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Application {
    pub id: AppId,
    pub requests: Vec<Request>,
    pub duration: Time,
    pub batch: u32,
    pub arrival_time: Time,
    pub deadline: Time,
}

impl Application {
    pub fn max_rate(&self) -> Rate {
        self.requests.iter().map(|r| r.rate).fold(0.0, Rate::max)
    }

    pub fn total_rate(&self) -> Rate {
        self.requests.iter().map(|r| r.rate).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadParams {
    pub app_count: usize,
    pub batch_count: u32,
    /// Inclusive range for the number of points per application.
    pub points_per_app: (usize, usize),
    /// Inclusive range for the application duration, integer seconds.
    pub duration_range: (Time, Time),
    /// Inclusive range for the deadline slack added to arrival + duration.
    pub slack_range: (Time, Time),
    /// Batch b arrives at `b * batch_interval`. Zero means all batches arrive
    /// at time 0.
    pub batch_interval: Time,
    /// When set, applications are spread over batches with sizes differing by
    /// at most one instead of uniform random batch membership.
    pub equal_batches: bool,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            app_count: 1000,
            batch_count: 25,
            points_per_app: (1, 3),
            duration_range: (50, 150),
            slack_range: (100, 200),
            batch_interval: 0,
            equal_batches: false,
        }
    }
}

/// Generates the application set. Deterministic in `(topology, params, seed)`.
pub fn generate_workload(
    topology: &Topology,
    params: &WorkloadParams,
    seed: u64,
) -> Result<Vec<Application>, WorkloadError> {
    let available = topology.points.len();
    if params.points_per_app.1 > available || (params.app_count > 0 && available == 0) {
        return Err(WorkloadError::NotEnoughPoints {
            requested: params.points_per_app.1,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut apps = Vec::with_capacity(params.app_count);
    for id in 0..params.app_count {
        let count = rng.gen_range(params.points_per_app.0..=params.points_per_app.1);
        let mut point_ids: Vec<PointId> = rand::seq::index::sample(&mut rng, available, count)
            .into_iter()
            .collect();
        point_ids.sort_unstable();
        let requests = point_ids
            .into_iter()
            .map(|point_id| {
                let (lo, hi) = DATA_TYPE_RATES[topology.points[point_id].data_type as usize];
                Request {
                    point_id,
                    rate: rng.gen_range(lo..=hi),
                }
            })
            .collect();
        let duration = rng.gen_range(params.duration_range.0..=params.duration_range.1);
        let batch = if params.equal_batches {
            ((id as u64 * params.batch_count as u64) / params.app_count.max(1) as u64) as u32
        } else {
            rng.gen_range(0..params.batch_count)
        };
        let arrival_time = batch as Time * params.batch_interval;
        let slack = rng.gen_range(params.slack_range.0..=params.slack_range.1);
        apps.push(Application {
            id,
            requests,
            duration,
            batch,
            arrival_time,
            deadline: arrival_time + duration + slack,
        });
    }
    Ok(apps)
}

pub fn workload_to_json(apps: &[Application]) -> String {
    serde_json::to_string_pretty(apps).expect("workload serializes")
}

pub fn workload_from_json(doc: &str) -> Result<Vec<Application>, WorkloadError> {
    serde_json::from_str(doc).map_err(|e| WorkloadError::InvalidDocument(e.to_string()))
}

/// The parameter swept by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweptParameter {
    AppCount,
    PointCount,
    PointsPerApp,
    CommRange,
    SensingRange,
    BatchCount,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario_id: u8,
    pub swept_parameter: SweptParameter,
    pub values: Vec<u64>,
}

impl ScenarioConfig {
    /// Applies one swept value onto the parameter sets.
    pub fn apply(&self, value: u64, topo: &mut TopologyParams, wl: &mut WorkloadParams) {
        match self.swept_parameter {
            SweptParameter::AppCount => wl.app_count = value as usize,
            SweptParameter::PointCount => topo.num_points = value as usize,
            SweptParameter::PointsPerApp => wl.points_per_app = (value as usize, value as usize),
            SweptParameter::CommRange => topo.comm_range = (value as f64, value as f64),
            SweptParameter::SensingRange => topo.sensing_range = (value as f64, value as f64),
            SweptParameter::BatchCount => {
                wl.batch_count = value as u32;
                wl.equal_batches = true;
            }
        }
    }
}

/// Returns the exact sweep for one of the six experiment scenarios.
pub fn scenario_sweep(scenario_id: u8) -> Result<ScenarioConfig, WorkloadError> {
    let (swept_parameter, values) = match scenario_id {
        1 => (SweptParameter::AppCount, (500..=1500).step_by(100).collect()),
        2 => (SweptParameter::PointCount, (50..=250).step_by(25).collect()),
        3 => (SweptParameter::PointsPerApp, (1..=7).collect()),
        4 => (SweptParameter::CommRange, (50..=250).step_by(50).collect()),
        5 => (SweptParameter::SensingRange, (30..=50).step_by(5).collect()),
        6 => (SweptParameter::BatchCount, vec![1, 2, 5, 10, 20, 25]),
        other => return Err(WorkloadError::UnknownScenario(other)),
    };
    Ok(ScenarioConfig {
        scenario_id,
        swept_parameter,
        values,
    })
}
