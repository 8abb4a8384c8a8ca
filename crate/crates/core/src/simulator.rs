//! Event-driven admission engine and the four run metrics.
//!
//! Applications are offered resources strictly in the scheduler-supplied
//! order among those that have arrived; a blocked application stalls the
//! queue until a release (or an arrival that precedes it in the order) lets
//! the engine make progress. Running applications are never preempted.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::resources::{unshared_demand, Assignment, NetworkState, SharingMode};
use crate::topology::Topology;
use crate::workload::Application;
use crate::{AppId, BaseId, PointId, Rate, SensorId, Time};

/// Per-point (sensor, base) choice, indexed by point id. `None` marks a
/// point with no valid pair.
pub type PointGenes = Vec<Option<(SensorId, BaseId)>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AssignmentPolicy {
    /// Dynamic worst-fit placement at admission time.
    WorstFit,
    /// Fixed per-point choices. A point active on a different pair keeps its
    /// active pair until released; the gene applies when the point is next
    /// activated from idle.
    FixedGenes(PointGenes),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    pub admission_order: Vec<AppId>,
    pub policy: AssignmentPolicy,
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub alpha: f64,
    pub beta: f64,
    pub record_trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            alpha: 1.0,
            beta: 1.0,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEventKind {
    Arrive,
    Admit,
    Release,
    Block,
}

/// One engine event. `deltas` carries assignment changes: `Some(pair)` for a
/// point newly bound on admit, `None` for a point dropped on release.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: Time,
    pub kind: TraceEventKind,
    pub app_id: AppId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<(PointId, Option<(SensorId, BaseId)>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppRecord {
    pub id: AppId,
    pub admit_time: Time,
    pub finish_time: Time,
    pub waited: Time,
    pub turnaround: Time,
    pub met_deadline: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Finish time of the last admitted application (0 when none).
    pub makespan: Time,
    pub avg_waiting: f64,
    pub avg_turnaround: f64,
    /// Fraction of all applications finishing at or before their deadline.
    /// Rejected applications count as missed. 1.0 for an empty workload.
    pub success_rate: f64,
    pub per_app: Vec<AppRecord>,
    /// Applications that cannot be served even on an empty network.
    pub rejected: Vec<AppId>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub trace: Vec<TraceEvent>,
}

pub(crate) fn placement(
    state: &NetworkState,
    app: &Application,
    policy: &AssignmentPolicy,
) -> Option<Assignment> {
    match policy {
        AssignmentPolicy::WorstFit => state.worst_fit_assign(app),
        AssignmentPolicy::FixedGenes(genes) => {
            let mut fragment = Assignment::new();
            for req in &app.requests {
                let pair = match state.assignment().get(&req.point_id) {
                    Some(&active_pair) => active_pair,
                    None => (*genes.get(req.point_id)?)?,
                };
                fragment.insert(req.point_id, pair);
            }
            match state.check_feasible(app, &fragment) {
                Ok(true) => Some(fragment),
                _ => None,
            }
        }
    }
}

/// Runs the schedule with unit coefficients and no trace.
pub fn run(
    topo: &Topology,
    apps: &[Application],
    schedule: &Schedule,
    mode: SharingMode,
) -> RunMetrics {
    run_with(topo, apps, schedule, mode, &SimOptions::default()).metrics
}

/// Runs the schedule. Deterministic: identical inputs yield identical
/// metrics and trace.
pub fn run_with(
    topo: &Topology,
    apps: &[Application],
    schedule: &Schedule,
    mode: SharingMode,
    opts: &SimOptions,
) -> RunOutcome {
    assert_eq!(
        schedule.admission_order.len(),
        apps.len(),
        "schedule must cover the workload"
    );
    let by_id: BTreeMap<AppId, &Application> = apps.iter().map(|a| (a.id, a)).collect();

    // An application unservable on an empty network can never be admitted.
    let empty = NetworkState::new(topo, mode, opts.alpha, opts.beta);
    let rejected: Vec<AppId> = schedule
        .admission_order
        .iter()
        .copied()
        .filter(|id| placement(&empty, by_id[id], &schedule.policy).is_none())
        .collect();

    let mut state = empty;
    let mut waiting: Vec<AppId> = schedule
        .admission_order
        .iter()
        .copied()
        .filter(|id| !rejected.contains(id))
        .collect();
    let mut releases: BinaryHeap<Reverse<(Time, AppId)>> = BinaryHeap::new();
    let mut records = Vec::with_capacity(waiting.len());
    let mut trace = Vec::new();

    let mut arrivals: Vec<(Time, AppId)> = waiting.iter().map(|&id| (by_id[&id].arrival_time, id)).collect();
    arrivals.sort_unstable();
    let mut next_arrival_idx = 0usize;

    let mut now: Time = 0;
    loop {
        if opts.record_trace {
            while next_arrival_idx < arrivals.len() && arrivals[next_arrival_idx].0 <= now {
                let (time, app_id) = arrivals[next_arrival_idx];
                trace.push(TraceEvent {
                    time,
                    kind: TraceEventKind::Arrive,
                    app_id,
                    deltas: Vec::new(),
                });
                next_arrival_idx += 1;
            }
        }
        // releases first at any instant; ties by app id via heap ordering
        while let Some(&Reverse((tf, id))) = releases.peek() {
            if tf > now {
                break;
            }
            releases.pop();
            let deltas: Vec<_> = if opts.record_trace {
                state.active_apps()[&id]
                    .requests
                    .iter()
                    .filter(|r| state.subscriptions()[&r.point_id].len() == 1)
                    .map(|r| (r.point_id, None))
                    .collect()
            } else {
                Vec::new()
            };
            state.release(id).expect("release of active app");
            if opts.record_trace {
                trace.push(TraceEvent {
                    time: tf,
                    kind: TraceEventKind::Release,
                    app_id: id,
                    deltas,
                });
            }
        }

        let arrived_pos = waiting
            .iter()
            .position(|&id| by_id[&id].arrival_time <= now);
        match arrived_pos {
            Some(pos) => {
                let id = waiting[pos];
                let app = by_id[&id];
                if let Some(fragment) = placement(&state, app, &schedule.policy) {
                    let deltas: Vec<_> = if opts.record_trace {
                        fragment
                            .iter()
                            .filter(|(k, _)| !state.assignment().contains_key(k))
                            .map(|(&k, &pair)| (k, Some(pair)))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    state.admit(app, &fragment, now).expect("placement is feasible");
                    let finish = now + app.duration;
                    records.push(AppRecord {
                        id,
                        admit_time: now,
                        finish_time: finish,
                        waited: now - app.arrival_time,
                        turnaround: finish - app.arrival_time,
                        met_deadline: finish <= app.deadline,
                    });
                    releases.push(Reverse((finish, id)));
                    if opts.record_trace {
                        trace.push(TraceEvent {
                            time: now,
                            kind: TraceEventKind::Admit,
                            app_id: id,
                            deltas,
                        });
                    }
                    waiting.remove(pos);
                } else {
                    if opts.record_trace {
                        trace.push(TraceEvent {
                            time: now,
                            kind: TraceEventKind::Block,
                            app_id: id,
                            deltas: Vec::new(),
                        });
                    }
                    let next_release = releases.peek().map(|&Reverse((tf, _))| tf);
                    let next_arrival = waiting
                        .iter()
                        .map(|&id| by_id[&id].arrival_time)
                        .filter(|&t| t > now)
                        .min();
                    now = match (next_release, next_arrival) {
                        (Some(r), Some(a)) => r.min(a),
                        (Some(r), None) => r,
                        (None, Some(a)) => a,
                        // cannot happen: a feasible-alone app becomes
                        // admissible once the network drains
                        (None, None) => unreachable!("blocked with no pending event"),
                    };
                }
            }
            None if !waiting.is_empty() => {
                now = waiting
                    .iter()
                    .map(|&id| by_id[&id].arrival_time)
                    .min()
                    .expect("waiting apps have arrivals");
            }
            None => {
                // drain remaining releases for the trace
                while let Some(Reverse((tf, id))) = releases.pop() {
                    let deltas: Vec<_> = if opts.record_trace {
                        state.active_apps()[&id]
                            .requests
                            .iter()
                            .filter(|r| state.subscriptions()[&r.point_id].len() == 1)
                            .map(|r| (r.point_id, None))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    state.release(id).expect("release of active app");
                    if opts.record_trace {
                        trace.push(TraceEvent {
                            time: tf,
                            kind: TraceEventKind::Release,
                            app_id: id,
                            deltas,
                        });
                    }
                }
                break;
            }
        }
    }

    let makespan = records.iter().map(|r| r.finish_time).max().unwrap_or(0);
    let n_admitted = records.len();
    let avg = |f: fn(&AppRecord) -> Time| {
        if n_admitted == 0 {
            0.0
        } else {
            records.iter().map(|r| f(r) as f64).sum::<f64>() / n_admitted as f64
        }
    };
    let success_rate = if apps.is_empty() {
        1.0
    } else {
        records.iter().filter(|r| r.met_deadline).count() as f64 / apps.len() as f64
    };
    RunOutcome {
        metrics: RunMetrics {
            makespan,
            avg_waiting: avg(|r| r.waited),
            avg_turnaround: avg(|r| r.turnaround),
            success_rate,
            per_app: records,
            rejected,
        },
        trace,
    }
}

/// Standalone constraint scan over raw subscription and assignment tables,
/// kept independent of the ledger's cached indices.
fn scan_constraints(
    topo: &Topology,
    subs: &BTreeMap<PointId, Vec<(AppId, Rate)>>,
    assignment: &Assignment,
    mode: SharingMode,
    alpha: f64,
    beta: f64,
) -> bool {
    const EPS: f64 = 1e-9;
    let demand = |point: PointId| -> Rate {
        let rates = subs.get(&point).into_iter().flatten().map(|&(_, r)| r);
        match mode {
            SharingMode::Shared => rates.fold(0.0, Rate::max),
            SharingMode::Unshared => rates.sum(),
        }
    };
    let usum = |point: PointId| -> Rate {
        unshared_demand(subs.get(&point).into_iter().flatten().map(|&(_, r)| r))
    };

    let mut sensor_load: BTreeMap<SensorId, Rate> = BTreeMap::new();
    let mut link_load: BTreeMap<(SensorId, BaseId), Rate> = BTreeMap::new();
    let mut base_load: BTreeMap<BaseId, Rate> = BTreeMap::new();
    for (&k, &(s, b)) in assignment {
        *sensor_load.entry(s).or_default() += demand(k);
        *link_load.entry((s, b)).or_default() += alpha * demand(k);
        *base_load.entry(b).or_default() += beta * usum(k);
    }
    sensor_load
        .iter()
        .all(|(&s, &l)| l <= topo.sensors[s].sensing_capacity + EPS)
        && link_load.values().all(|&l| l <= topo.link_bandwidth() + EPS)
        && base_load
            .iter()
            .all(|(&b, &l)| l <= topo.bases[b].processing_capacity + EPS)
}

/// Replays a trace, recomputing the sensing, bandwidth and processing
/// constraints at every event boundary. Returns `false` on any violation,
/// inconsistent event, or time regression.
pub fn audit(
    topo: &Topology,
    apps: &[Application],
    trace: &[TraceEvent],
    mode: SharingMode,
    alpha: f64,
    beta: f64,
) -> bool {
    let by_id: BTreeMap<AppId, &Application> = apps.iter().map(|a| (a.id, a)).collect();
    let mut state = NetworkState::new(topo, mode, alpha, beta);
    let mut last_time: Time = 0;
    for event in trace {
        if event.time < last_time {
            return false;
        }
        last_time = event.time;
        match event.kind {
            TraceEventKind::Arrive | TraceEventKind::Block => {}
            TraceEventKind::Admit => {
                let Some(app) = by_id.get(&event.app_id) else {
                    return false;
                };
                if event.time < app.arrival_time {
                    return false;
                }
                let deltas: BTreeMap<PointId, Option<(SensorId, BaseId)>> =
                    event.deltas.iter().copied().collect();
                let mut fragment = Assignment::new();
                for req in &app.requests {
                    let pair = match deltas.get(&req.point_id) {
                        Some(&Some(pair)) => pair,
                        Some(&None) => return false,
                        None => match state.assignment().get(&req.point_id) {
                            Some(&pair) => pair,
                            None => return false,
                        },
                    };
                    fragment.insert(req.point_id, pair);
                }
                match state.check_feasible(app, &fragment) {
                    Ok(true) => {}
                    _ => return false,
                }
                if state.admit(app, &fragment, event.time).is_err() {
                    return false;
                }
            }
            TraceEventKind::Release => {
                if state.release(event.app_id).is_err() {
                    return false;
                }
            }
        }
        if !scan_constraints(topo, state.subscriptions(), state.assignment(), mode, alpha, beta) {
            return false;
        }
        if !state.verify_invariants() {
            return false;
        }
    }
    true
}

pub fn trace_to_jsonl(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for event in trace {
        out.push_str(&serde_json::to_string(event).expect("trace event serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_from_jsonl(doc: &str) -> Result<Vec<TraceEvent>, serde_json::Error> {
    doc.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
