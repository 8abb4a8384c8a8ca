//! Time-varying resource ledger: subscription tracking, feasibility checks
//! under shared or unshared demand aggregation, worst-fit assignment, and
//! admit/release bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::topology::Topology;
use crate::workload::{Application, Request};
use crate::{AppId, BaseId, PointId, Rate, SensorId, Time};

/// Absorbs float summation noise in capacity comparisons.
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("assignment fragment does not cover exactly the application's points")]
    FragmentMismatch,
    #[error("sensor {sensor} does not cover point {point}")]
    NotCovering { point: PointId, sensor: SensorId },
    #[error("no candidate link from sensor {sensor} to base {base}")]
    NoLink { sensor: SensorId, base: BaseId },
    #[error("point {point} is active on a different (sensor, base) pair")]
    AssignmentConflict { point: PointId },
    #[error("application {0} is already active")]
    AlreadyActive(AppId),
    #[error("application {0} is not active")]
    NotActive(AppId),
    #[error("admission would violate a capacity constraint")]
    Infeasible,
}

/// Demand aggregation when several applications subscribe to one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize)]
pub enum SharingMode {
    /// One multiplexed sensing stream per point at the maximum requested
    /// rate. Applies to sensing and link load; processing always sums.
    Shared,
    /// Every subscription counted independently; demand is the sum of rates.
    Unshared,
}

impl std::str::FromStr for SharingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shared" | "s" => Ok(SharingMode::Shared),
            "unshared" | "u" => Ok(SharingMode::Unshared),
            other => Err(format!("unknown sharing mode '{other}'")),
        }
    }
}

impl std::fmt::Display for SharingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SharingMode::Shared => write!(f, "shared"),
            SharingMode::Unshared => write!(f, "unshared"),
        }
    }
}

/// Multiplexed demand of a point: the maximum of the active rates.
pub fn shared_demand<I: IntoIterator<Item = Rate>>(rates: I) -> Rate {
    rates.into_iter().fold(0.0, Rate::max)
}

/// Independent demand of a point: the sum of the active rates.
pub fn unshared_demand<I: IntoIterator<Item = Rate>>(rates: I) -> Rate {
    rates.into_iter().sum()
}

/// The (sensor, base) pair in force for each actively sensed point.
pub type Assignment = BTreeMap<PointId, (SensorId, BaseId)>;

#[derive(Debug, Clone, Serialize)]
pub struct ActiveApp {
    pub admit_time: Time,
    pub finish_time: Time,
    pub requests: Vec<Request>,
}

/// Resource ledger for one simulation run. Assignment entries are sticky: a
/// point keeps its (sensor, base) pair until its last subscriber leaves.
#[derive(Debug, Clone)]
pub struct NetworkState<'a> {
    topo: &'a Topology,
    mode: SharingMode,
    alpha: f64,
    beta: f64,
    active: BTreeMap<AppId, ActiveApp>,
    subs: BTreeMap<PointId, Vec<(AppId, Rate)>>,
    assignment: Assignment,
    sensor_points: BTreeMap<SensorId, BTreeSet<PointId>>,
    link_points: BTreeMap<(SensorId, BaseId), BTreeSet<PointId>>,
    base_points: BTreeMap<BaseId, BTreeSet<PointId>>,
}

impl<'a> NetworkState<'a> {
    pub fn new(topo: &'a Topology, mode: SharingMode, alpha: f64, beta: f64) -> Self {
        NetworkState {
            topo,
            mode,
            alpha,
            beta,
            active: BTreeMap::new(),
            subs: BTreeMap::new(),
            assignment: Assignment::new(),
            sensor_points: BTreeMap::new(),
            link_points: BTreeMap::new(),
            base_points: BTreeMap::new(),
        }
    }

    pub fn topology(&self) -> &'a Topology {
        self.topo
    }

    pub fn mode(&self) -> SharingMode {
        self.mode
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn active_apps(&self) -> &BTreeMap<AppId, ActiveApp> {
        &self.active
    }

    pub fn subscriptions(&self) -> &BTreeMap<PointId, Vec<(AppId, Rate)>> {
        &self.subs
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_empty()
    }

    fn demand_of(&self, rates: impl IntoIterator<Item = Rate>) -> Rate {
        match self.mode {
            SharingMode::Shared => shared_demand(rates),
            SharingMode::Unshared => unshared_demand(rates),
        }
    }

    /// Demand of a point with an optional extra pending rate mixed in.
    fn point_demand(&self, point: PointId, pending: Option<Rate>) -> Rate {
        let existing = self.subs.get(&point).into_iter().flatten().map(|&(_, r)| r);
        self.demand_of(existing.chain(pending))
    }

    fn point_usum(&self, point: PointId, pending: Option<Rate>) -> Rate {
        let existing = self.subs.get(&point).into_iter().flatten().map(|&(_, r)| r);
        unshared_demand(existing.chain(pending))
    }

    /// Current sensing load on a sensor under the active mode's demand.
    pub fn sensor_load(&self, sensor: SensorId) -> Rate {
        self.sensor_points
            .get(&sensor)
            .into_iter()
            .flatten()
            .map(|&k| self.point_demand(k, None))
            .sum()
    }

    pub fn link_load(&self, sensor: SensorId, base: BaseId) -> Rate {
        self.alpha
            * self
                .link_points
                .get(&(sensor, base))
                .into_iter()
                .flatten()
                .map(|&k| self.point_demand(k, None))
                .sum::<Rate>()
    }

    pub fn base_load(&self, base: BaseId) -> Rate {
        self.beta
            * self
                .base_points
                .get(&base)
                .into_iter()
                .flatten()
                .map(|&k| self.point_usum(k, None))
                .sum::<Rate>()
    }

    pub fn residual_sensing(&self, sensor: SensorId) -> Rate {
        self.topo.sensors[sensor].sensing_capacity - self.sensor_load(sensor)
    }

    pub fn residual_processing(&self, base: BaseId) -> Rate {
        self.topo.bases[base].processing_capacity - self.base_load(base)
    }

    fn check_structure(&self, app: &Application, fragment: &Assignment) -> Result<(), ResourceError> {
        if fragment.len() != app.requests.len() {
            return Err(ResourceError::FragmentMismatch);
        }
        for req in &app.requests {
            let &(sensor, base) = fragment
                .get(&req.point_id)
                .ok_or(ResourceError::FragmentMismatch)?;
            if !self.topo.coverage[req.point_id].contains(&sensor) {
                return Err(ResourceError::NotCovering {
                    point: req.point_id,
                    sensor,
                });
            }
            if !self.topo.has_link(sensor, base) {
                return Err(ResourceError::NoLink { sensor, base });
            }
            if let Some(&existing) = self.assignment.get(&req.point_id) {
                if existing != (sensor, base) {
                    return Err(ResourceError::AssignmentConflict { point: req.point_id });
                }
            }
        }
        Ok(())
    }

    /// True iff the application fits with its subscriptions added under the
    /// given per-point assignment. Pure: no state mutation. Structural
    /// violations (coverage/reach/stickiness) are errors, distinct from a
    /// plain `false`.
    pub fn check_feasible(&self, app: &Application, fragment: &Assignment) -> Result<bool, ResourceError> {
        self.check_structure(app, fragment)?;

        let pending: BTreeMap<PointId, Rate> =
            app.requests.iter().map(|r| (r.point_id, r.rate)).collect();
        let hyp_demand = |k: PointId| self.point_demand(k, pending.get(&k).copied());
        let hyp_usum = |k: PointId| self.point_usum(k, pending.get(&k).copied());

        let mut sensors = BTreeSet::new();
        let mut links = BTreeSet::new();
        let mut bases = BTreeSet::new();
        for &(s, b) in fragment.values() {
            sensors.insert(s);
            links.insert((s, b));
            bases.insert(b);
        }

        for &sensor in &sensors {
            let mut pts: BTreeSet<PointId> =
                self.sensor_points.get(&sensor).cloned().unwrap_or_default();
            pts.extend(fragment.iter().filter(|&(_, &(s, _))| s == sensor).map(|(&k, _)| k));
            let load: Rate = pts.iter().map(|&k| hyp_demand(k)).sum();
            if load > self.topo.sensors[sensor].sensing_capacity + FEAS_EPS {
                return Ok(false);
            }
        }
        for &(sensor, base) in &links {
            let mut pts: BTreeSet<PointId> = self
                .link_points
                .get(&(sensor, base))
                .cloned()
                .unwrap_or_default();
            pts.extend(
                fragment
                    .iter()
                    .filter(|&(_, &pair)| pair == (sensor, base))
                    .map(|(&k, _)| k),
            );
            let load: Rate = self.alpha * pts.iter().map(|&k| hyp_demand(k)).sum::<Rate>();
            if load > self.topo.link_bandwidth() + FEAS_EPS {
                return Ok(false);
            }
        }
        for &base in &bases {
            let mut pts: BTreeSet<PointId> = self.base_points.get(&base).cloned().unwrap_or_default();
            pts.extend(fragment.iter().filter(|&(_, &(_, b))| b == base).map(|(&k, _)| k));
            let load: Rate = self.beta * pts.iter().map(|&k| hyp_usum(k)).sum::<Rate>();
            if load > self.topo.bases[base].processing_capacity + FEAS_EPS {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Worst-fit placement for the application's points, in ascending point
    /// id order. Active points reuse their existing pair; new points go to
    /// the covering reachable sensor with the largest residual sensing
    /// capacity, then the reachable base with the largest residual
    /// processing capacity among those with link and processing headroom.
    /// Ties break to the lower id. All-or-nothing: `None` when the whole
    /// application cannot be placed now.
    pub fn worst_fit_assign(&self, app: &Application) -> Option<Assignment> {
        let mut fragment = Assignment::new();
        let mut placed: BTreeMap<PointId, Rate> = BTreeMap::new();

        // Loads including the points of this app placed so far.
        let tent_demand = |k: PointId, placed: &BTreeMap<PointId, Rate>| {
            self.point_demand(k, placed.get(&k).copied())
        };
        let tent_usum =
            |k: PointId, placed: &BTreeMap<PointId, Rate>| self.point_usum(k, placed.get(&k).copied());

        for req in &app.requests {
            let k = req.point_id;
            if let Some(&pair) = self.assignment.get(&k) {
                fragment.insert(k, pair);
                placed.insert(k, req.rate);
                continue;
            }

            let sensor_load = |s: SensorId, fragment: &Assignment, placed: &BTreeMap<PointId, Rate>| {
                let mut pts: BTreeSet<PointId> =
                    self.sensor_points.get(&s).cloned().unwrap_or_default();
                pts.extend(fragment.iter().filter(|&(_, &(si, _))| si == s).map(|(&p, _)| p));
                pts.iter().map(|&p| tent_demand(p, placed)).sum::<Rate>()
            };

            let mut best_sensor: Option<(SensorId, Rate)> = None;
            for s in self.topo.assignable_sensors(k) {
                let residual =
                    self.topo.sensors[s].sensing_capacity - sensor_load(s, &fragment, &placed);
                match best_sensor {
                    Some((_, r)) if residual <= r => {}
                    _ => best_sensor = Some((s, residual)),
                }
            }
            let (sensor, _) = best_sensor?;

            let mut best_base: Option<(BaseId, Rate)> = None;
            for &b in &self.topo.reach[sensor] {
                let link_pts: Rate = {
                    let mut pts: BTreeSet<PointId> =
                        self.link_points.get(&(sensor, b)).cloned().unwrap_or_default();
                    pts.extend(
                        fragment
                            .iter()
                            .filter(|&(_, &pair)| pair == (sensor, b))
                            .map(|(&p, _)| p),
                    );
                    pts.iter().map(|&p| tent_demand(p, &placed)).sum()
                };
                if self.alpha * (link_pts + req.rate) > self.topo.link_bandwidth() + FEAS_EPS {
                    continue;
                }
                let base_pts: Rate = {
                    let mut pts: BTreeSet<PointId> =
                        self.base_points.get(&b).cloned().unwrap_or_default();
                    pts.extend(fragment.iter().filter(|&(_, &(_, bi))| bi == b).map(|(&p, _)| p));
                    pts.iter().map(|&p| tent_usum(p, &placed)).sum()
                };
                if self.beta * (base_pts + req.rate)
                    > self.topo.bases[b].processing_capacity + FEAS_EPS
                {
                    continue;
                }
                let residual = self.topo.bases[b].processing_capacity - self.beta * base_pts;
                match best_base {
                    Some((_, r)) if residual <= r => {}
                    _ => best_base = Some((b, residual)),
                }
            }
            let (base, _) = best_base?;
            fragment.insert(k, (sensor, base));
            placed.insert(k, req.rate);
        }

        match self.check_feasible(app, &fragment) {
            Ok(true) => Some(fragment),
            _ => None,
        }
    }

    /// Admits the application at `now`: records its activity interval and
    /// adds its subscriptions. Requires `check_feasible` to hold.
    pub fn admit(
        &mut self,
        app: &Application,
        fragment: &Assignment,
        now: Time,
    ) -> Result<(), ResourceError> {
        if self.active.contains_key(&app.id) {
            return Err(ResourceError::AlreadyActive(app.id));
        }
        if !self.check_feasible(app, fragment)? {
            return Err(ResourceError::Infeasible);
        }
        for req in &app.requests {
            let &(sensor, base) = fragment.get(&req.point_id).unwrap();
            self.subs
                .entry(req.point_id)
                .or_default()
                .push((app.id, req.rate));
            self.assignment.insert(req.point_id, (sensor, base));
            self.sensor_points.entry(sensor).or_default().insert(req.point_id);
            self.link_points
                .entry((sensor, base))
                .or_default()
                .insert(req.point_id);
            self.base_points.entry(base).or_default().insert(req.point_id);
        }
        self.active.insert(
            app.id,
            ActiveApp {
                admit_time: now,
                finish_time: now + app.duration,
                requests: app.requests.clone(),
            },
        );
        Ok(())
    }

    /// Removes an active application's subscriptions. A point left with no
    /// subscriber drops its assignment entry.
    pub fn release(&mut self, app_id: AppId) -> Result<(), ResourceError> {
        let entry = self.active.remove(&app_id).ok_or(ResourceError::NotActive(app_id))?;
        for req in &entry.requests {
            let subs = self.subs.get_mut(&req.point_id).expect("subscribed point");
            let pos = subs.iter().position(|&(a, _)| a == app_id).expect("subscription");
            subs.remove(pos);
            if subs.is_empty() {
                self.subs.remove(&req.point_id);
                let (sensor, base) = self.assignment.remove(&req.point_id).expect("assigned point");
                let prune = |set: &mut BTreeMap<_, BTreeSet<PointId>>, key| {
                    if let Some(pts) = set.get_mut(&key) {
                        pts.remove(&req.point_id);
                        if pts.is_empty() {
                            set.remove(&key);
                        }
                    }
                };
                prune(&mut self.sensor_points, sensor);
                if let Some(pts) = self.link_points.get_mut(&(sensor, base)) {
                    pts.remove(&req.point_id);
                    if pts.is_empty() {
                        self.link_points.remove(&(sensor, base));
                    }
                }
                prune(&mut self.base_points, base);
            }
        }
        Ok(())
    }

    /// Full from-scratch audit of the ledger: index consistency plus the
    /// per-sensor, per-link and per-base capacity constraints.
    pub fn verify_invariants(&self) -> bool {
        // indices match subscriptions + assignment
        for (&k, _) in &self.subs {
            if !self.assignment.contains_key(&k) {
                return false;
            }
        }
        for (&k, &(s, b)) in &self.assignment {
            if !self.subs.contains_key(&k)
                || !self.sensor_points.get(&s).is_some_and(|p| p.contains(&k))
                || !self.link_points.get(&(s, b)).is_some_and(|p| p.contains(&k))
                || !self.base_points.get(&b).is_some_and(|p| p.contains(&k))
            {
                return false;
            }
        }
        let assigned: usize = self.assignment.len();
        let indexed: usize = self.sensor_points.values().map(|p| p.len()).sum();
        if assigned != indexed {
            return false;
        }
        // capacity constraints, recomputed from subscriptions
        for (&s, _) in &self.sensor_points {
            if self.sensor_load(s) > self.topo.sensors[s].sensing_capacity + FEAS_EPS {
                return false;
            }
        }
        for (&(s, b), _) in &self.link_points {
            if self.link_load(s, b) > self.topo.link_bandwidth() + FEAS_EPS {
                return false;
            }
        }
        for (&b, _) in &self.base_points {
            if self.base_load(b) > self.topo.bases[b].processing_capacity + FEAS_EPS {
                return false;
            }
        }
        true
    }

    /// JSON ledger snapshot for audit tooling.
    pub fn snapshot_json(&self) -> String {
        #[derive(Serialize)]
        struct Snapshot<'s> {
            mode: SharingMode,
            alpha: f64,
            beta: f64,
            active: &'s BTreeMap<AppId, ActiveApp>,
            subscriptions: &'s BTreeMap<PointId, Vec<(AppId, Rate)>>,
            assignment: &'s Assignment,
        }
        serde_json::to_string_pretty(&Snapshot {
            mode: self.mode,
            alpha: self.alpha,
            beta: self.beta,
            active: &self.active,
            subscriptions: &self.subs,
            assignment: &self.assignment,
        })
        .expect("snapshot serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{BaseStation, Coord, MonitoringPoint, SensorNode, Topology, TopologyParams};

    fn line_topology(num_points: usize, sensor_caps: &[Rate], base_caps: &[Rate]) -> Topology {
        // All points clustered at the origin; every sensor covers every point
        // and reaches every base.
        let points = (0..num_points)
            .map(|id| MonitoringPoint {
                id,
                position: Coord { x: id as i64, y: 0 },
                data_type: 0,
            })
            .collect();
        let sensors = sensor_caps
            .iter()
            .enumerate()
            .map(|(id, &cap)| SensorNode {
                id,
                position: Coord { x: id as i64, y: 10 },
                sensing_range: 1000.0,
                comm_range: 1000.0,
                sensing_capacity: cap,
            })
            .collect();
        let bases = base_caps
            .iter()
            .enumerate()
            .map(|(id, &cap)| BaseStation {
                id,
                position: Coord { x: id as i64, y: 20 },
                processing_capacity: cap,
            })
            .collect();
        let params = TopologyParams {
            link_bandwidth: 1000.0,
            ..TopologyParams::default()
        };
        Topology::from_elements(params, 0, points, sensors, bases)
    }

    fn app(id: AppId, reqs: &[(PointId, Rate)], duration: Time) -> Application {
        Application {
            id,
            requests: reqs
                .iter()
                .map(|&(point_id, rate)| Request { point_id, rate })
                .collect(),
            duration,
            batch: 0,
            arrival_time: 0,
            deadline: duration + 150,
        }
    }

    #[test]
    fn demand_functions() {
        assert_eq!(shared_demand([5.0, 20.0, 15.0]), 20.0);
        assert_eq!(shared_demand(std::iter::empty()), 0.0);
        assert_eq!(shared_demand([40.0]), 40.0);
        assert_eq!(unshared_demand([5.0, 20.0, 15.0]), 40.0);
        assert_eq!(unshared_demand(std::iter::empty()), 0.0);
        assert_eq!(unshared_demand([60.0]), 60.0);
    }

    #[test]
    fn sensing_capacity_exceeded() {
        let topo = line_topology(2, &[100.0], &[1000.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Unshared, 1.0, 1.0);
        let a = app(0, &[(0, 90.0)], 10);
        let frag = state.worst_fit_assign(&a).unwrap();
        state.admit(&a, &frag, 0).unwrap();
        let b = app(1, &[(1, 15.0)], 10);
        let frag_b = Assignment::from([(1, (0, 0))]);
        assert!(!state.check_feasible(&b, &frag_b).unwrap());
    }

    #[test]
    fn shared_mode_multiplexes_sensing() {
        let topo = line_topology(1, &[100.0], &[1000.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 20.0)], 10);
        let frag = state.worst_fit_assign(&a).unwrap();
        state.admit(&a, &frag, 0).unwrap();
        // a second subscriber at a lower rate adds no sensing load
        let b = app(1, &[(0, 15.0)], 10);
        let frag_b = Assignment::from([(0, (0, 0))]);
        assert!(state.check_feasible(&b, &frag_b).unwrap());
        assert_eq!(state.sensor_load(0), 20.0);
        state.admit(&b, &frag_b, 0).unwrap();
        assert_eq!(state.sensor_load(0), 20.0);
        assert_eq!(state.base_load(0), 35.0); // processing always sums
    }

    #[test]
    fn unshared_mode_sums_sensing() {
        let topo = line_topology(1, &[30.0], &[1000.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Unshared, 1.0, 1.0);
        let a = app(0, &[(0, 20.0)], 10);
        state.admit(&a, &state.worst_fit_assign(&a).unwrap(), 0).unwrap();
        let b = app(1, &[(0, 15.0)], 10);
        let frag_b = Assignment::from([(0, (0, 0))]);
        assert!(!state.check_feasible(&b, &frag_b).unwrap());
    }

    #[test]
    fn worst_fit_prefers_largest_residual() {
        let topo = line_topology(2, &[60.0, 40.0], &[1000.0]);
        let state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 10.0)], 10);
        let frag = state.worst_fit_assign(&a).unwrap();
        assert_eq!(frag[&0].0, 0);
    }

    #[test]
    fn worst_fit_tie_breaks_to_lower_id() {
        let topo = line_topology(1, &[50.0, 50.0], &[500.0, 500.0]);
        let state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let frag = state.worst_fit_assign(&app(0, &[(0, 10.0)], 5)).unwrap();
        assert_eq!(frag[&0], (0, 0));
    }

    #[test]
    fn worst_fit_infeasible_when_no_residual() {
        let topo = line_topology(1, &[10.0], &[1000.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Unshared, 1.0, 1.0);
        let a = app(0, &[(0, 8.0)], 10);
        state.admit(&a, &state.worst_fit_assign(&a).unwrap(), 0).unwrap();
        assert!(state.worst_fit_assign(&app(1, &[(0, 8.0)], 10)).is_none());
    }

    #[test]
    fn admit_release_restores_ledger() {
        let topo = line_topology(3, &[100.0, 100.0], &[500.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let base = state.snapshot_json();
        let a = app(0, &[(0, 20.0), (2, 30.0)], 10);
        let frag = state.worst_fit_assign(&a).unwrap();
        state.admit(&a, &frag, 0).unwrap();
        assert_eq!(state.active_apps()[&0].finish_time, 10);
        assert!(state.verify_invariants());
        state.release(0).unwrap();
        assert_eq!(state.snapshot_json(), base);
    }

    #[test]
    fn release_last_subscriber_drops_assignment() {
        let topo = line_topology(1, &[100.0], &[500.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 10.0)], 5);
        let b = app(1, &[(0, 12.0)], 8);
        state.admit(&a, &state.worst_fit_assign(&a).unwrap(), 0).unwrap();
        state.admit(&b, &state.worst_fit_assign(&b).unwrap(), 0).unwrap();
        state.release(0).unwrap();
        assert!(state.assignment().contains_key(&0));
        state.release(1).unwrap();
        assert!(!state.assignment().contains_key(&0));
    }

    #[test]
    fn admit_infeasible_errors() {
        let topo = line_topology(1, &[10.0], &[500.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 50.0)], 5);
        let frag = Assignment::from([(0, (0, 0))]);
        assert!(matches!(state.admit(&a, &frag, 0), Err(ResourceError::Infeasible)));
    }

    #[test]
    fn release_non_active_errors() {
        let topo = line_topology(1, &[10.0], &[500.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        assert!(matches!(state.release(3), Err(ResourceError::NotActive(3))));
    }

    #[test]
    fn structural_errors_distinct_from_infeasibility() {
        let topo = line_topology(2, &[100.0], &[500.0]);
        let state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 10.0)], 5);
        // wrong point set
        let bad = Assignment::from([(1, (0, 0))]);
        assert!(state.check_feasible(&a, &bad).is_err());
        // nonexistent link
        let bad = Assignment::from([(0, (0, 7))]);
        assert!(matches!(
            state.check_feasible(&a, &bad),
            Err(ResourceError::NoLink { .. })
        ));
    }

    #[test]
    fn sticky_assignment_conflict_is_structural() {
        let topo = line_topology(1, &[100.0, 100.0], &[500.0]);
        let mut state = NetworkState::new(&topo, SharingMode::Shared, 1.0, 1.0);
        let a = app(0, &[(0, 10.0)], 5);
        state.admit(&a, &Assignment::from([(0, (0, 0))]), 0).unwrap();
        let b = app(1, &[(0, 10.0)], 5);
        assert!(matches!(
            state.check_feasible(&b, &Assignment::from([(0, (1, 0))])),
            Err(ResourceError::AssignmentConflict { .. })
        ));
    }
}
