//! Exact solvers for small instances: exhaustive optimal scheduling over
//! admission orders and per-point assignments, and the multiway number
//! partitioning construction with unit capacities.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::resources::{NetworkState, SharingMode};
use crate::simulator::{self, AssignmentPolicy, PointGenes, Schedule};
use crate::topology::{BaseStation, Coord, MonitoringPoint, SensorNode, Topology, TopologyParams};
use crate::workload::{Application, Request};
use crate::{AppId, BaseId, PointId, SensorId, Time};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {apps} applications, exceeding the exhaustive-search guard of {limit}")]
    TooManyApps { apps: usize, limit: usize },
    #[error("point {point} has {choices} (sensor, base) choices, exceeding the guard of {limit}")]
    TooManyChoices {
        point: PointId,
        choices: usize,
        limit: usize,
    },
    #[error("no per-point assignment can serve every application")]
    NoFeasibleAssignment,
    #[error("multiway partitioning instance has {n} numbers, exceeding the guard of {limit}")]
    MnpTooLarge { n: usize, limit: usize },
    #[error("partition count must be at least 1")]
    ZeroPartitions,
}

/// Enumeration guards. Exhaustive search is exponential; instances beyond
/// these bounds are rejected rather than attempted.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceLimits {
    pub max_apps: usize,
    pub max_choices_per_point: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_apps: 8,
            max_choices_per_point: 4,
        }
    }
}

type Pair = (SensorId, BaseId);

fn requested_points(apps: &[Application]) -> Vec<PointId> {
    let set: BTreeSet<PointId> = apps
        .iter()
        .flat_map(|a| a.requests.iter().map(|r| r.point_id))
        .collect();
    set.into_iter().collect()
}

fn point_choices(topo: &Topology, point: PointId) -> Vec<Pair> {
    topo.assignable_sensors(point)
        .flat_map(|s| topo.reach[s].iter().map(move |&b| (s, b)))
        .collect()
}

fn genes_from(points: &[PointId], picks: &[Pair], num_points: usize) -> PointGenes {
    let mut genes: PointGenes = vec![None; num_points];
    for (&k, &pair) in points.iter().zip(picks) {
        genes[k] = Some(pair);
    }
    genes
}

fn check_guards(
    topo: &Topology,
    apps: &[Application],
    limits: &BruteForceLimits,
) -> Result<(Vec<PointId>, Vec<Vec<Pair>>), OracleError> {
    if apps.len() > limits.max_apps {
        return Err(OracleError::TooManyApps {
            apps: apps.len(),
            limit: limits.max_apps,
        });
    }
    let points = requested_points(apps);
    let mut choices = Vec::with_capacity(points.len());
    for &k in &points {
        let c = point_choices(topo, k);
        if c.is_empty() {
            return Err(OracleError::NoFeasibleAssignment);
        }
        if c.len() > limits.max_choices_per_point {
            return Err(OracleError::TooManyChoices {
                point: k,
                choices: c.len(),
                limit: limits.max_choices_per_point,
            });
        }
        choices.push(c);
    }
    Ok((points, choices))
}

/// Every application must be placeable alone on an empty network under
/// these genes, otherwise the combination cannot serve the whole workload.
fn combo_serves_all(
    topo: &Topology,
    apps: &[Application],
    genes: &PointGenes,
    mode: SharingMode,
) -> bool {
    let empty = NetworkState::new(topo, mode, 1.0, 1.0);
    let policy = AssignmentPolicy::FixedGenes(genes.clone());
    apps.iter()
        .all(|a| simulator::placement(&empty, a, &policy).is_some())
}

/// Exhaustive minimum makespan over all admission orders and all per-point
/// (sensor, base) assignments, with default guards.
pub fn brute_force_optimal(
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
) -> Result<Time, OracleError> {
    brute_force_optimal_with(topo, apps, mode, &BruteForceLimits::default())
}

/// As [`brute_force_optimal`], with explicit guards. Symmetric assignments
/// (interchangeable sensor/base pairs) and symmetric application orderings
/// are pruned; the pruning is cross-checked against the unpruned
/// enumeration in the test suite.
pub fn brute_force_optimal_with(
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    limits: &BruteForceLimits,
) -> Result<Time, OracleError> {
    let (points, choices) = check_guards(topo, apps, limits)?;
    if apps.is_empty() {
        return Ok(0);
    }

    let classes = pair_classes(topo, &points, &choices);
    let mut combos = Vec::new();
    enumerate_combos(&choices, &classes, &mut Vec::new(), &mut combos);

    // points requested by more than one application multiplex demand, which
    // invalidates the work-conservation bound
    let mut request_counts: BTreeMap<PointId, usize> = BTreeMap::new();
    for app in apps {
        for req in &app.requests {
            *request_counts.entry(req.point_id).or_default() += 1;
        }
    }
    let disjoint_points = request_counts.values().all(|&c| c <= 1);

    let duration_lb: Time = apps.iter().map(|a| a.duration).max().unwrap_or(0);
    let mut scored: Vec<(Time, Vec<Pair>)> = combos
        .into_iter()
        .map(|picks| {
            let lb = if disjoint_points {
                area_lower_bound(topo, apps, &points, &picks).max(duration_lb)
            } else {
                duration_lb
            };
            (lb, picks)
        })
        .collect();
    scored.sort_by_key(|(lb, _)| *lb);

    let mut best = Time::MAX;
    for (lb, picks) in scored {
        if lb >= best {
            break; // sorted ascending, nothing better remains
        }
        let genes = genes_from(&points, &picks, topo.points.len());
        if !combo_serves_all(topo, apps, &genes, mode) {
            continue;
        }
        let state = NetworkState::new(topo, mode, 1.0, 1.0);
        let remaining: Vec<AppId> = apps.iter().map(|a| a.id).collect();
        let by_id: BTreeMap<AppId, &Application> = apps.iter().map(|a| (a.id, a)).collect();
        search_orders(
            &by_id,
            &AssignmentPolicy::FixedGenes(genes),
            &state,
            &[],
            0,
            &remaining,
            0,
            &mut best,
        );
        if best <= duration_lb {
            break;
        }
    }
    if best == Time::MAX {
        return Err(OracleError::NoFeasibleAssignment);
    }
    Ok(best)
}

/// Plain full enumeration with no symmetry pruning. Exists to certify the
/// pruned search; only usable on very small instances.
pub fn brute_force_optimal_unpruned(
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    limits: &BruteForceLimits,
) -> Result<Time, OracleError> {
    let (points, choices) = check_guards(topo, apps, limits)?;
    if apps.is_empty() {
        return Ok(0);
    }
    let mut best = Time::MAX;
    let mut picks = Vec::new();
    enumerate_all_combos(&choices, &mut picks, &mut |picks| {
        let genes = genes_from(&points, picks, topo.points.len());
        let ids: Vec<AppId> = apps.iter().map(|a| a.id).collect();
        permute(ids, &mut |order| {
            let schedule = Schedule {
                admission_order: order.to_vec(),
                policy: AssignmentPolicy::FixedGenes(genes.clone()),
            };
            let metrics = simulator::run(topo, apps, &schedule, mode);
            if metrics.rejected.is_empty() && metrics.makespan < best {
                best = metrics.makespan;
            }
        });
    });
    if best == Time::MAX {
        return Err(OracleError::NoFeasibleAssignment);
    }
    Ok(best)
}

/// Groups interchangeable (sensor, base) pairs. Two pairs can be swapped
/// without changing any schedule when each sensor reaches exactly its own
/// base, each base is reached only by its own sensor, capacities match and
/// they cover the same points. Pairs not in such a class stay singleton.
fn pair_classes(
    topo: &Topology,
    points: &[PointId],
    choices: &[Vec<Pair>],
) -> BTreeMap<Pair, usize> {
    let all_pairs: BTreeSet<Pair> = choices.iter().flatten().copied().collect();
    let mut reached_by: BTreeMap<BaseId, Vec<SensorId>> = BTreeMap::new();
    for (s, bases) in topo.reach.iter().enumerate() {
        for &b in bases {
            reached_by.entry(b).or_default().push(s);
        }
    }
    let mut class_of: BTreeMap<Pair, usize> = BTreeMap::new();
    let mut keys: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut next_class = 0usize;
    for &pair in &all_pairs {
        let (s, b) = pair;
        let isolated = topo.reach[s] == [b] && reached_by.get(&b).map(Vec::as_slice) == Some(&[s]);
        if isolated {
            let mut key = vec![
                topo.sensors[s].sensing_capacity.to_bits(),
                topo.bases[b].processing_capacity.to_bits(),
            ];
            for (i, &k) in points.iter().enumerate() {
                key.push(u64::from(choices[i].contains(&pair)) + 2 * k as u64);
            }
            let class = *keys.entry(key).or_insert_with(|| {
                next_class += 1;
                next_class - 1
            });
            class_of.insert(pair, class);
        } else {
            class_of.insert(pair, next_class);
            next_class += 1;
        }
    }
    class_of
}

/// Enumerates gene combinations, restricting each interchangeable class to
/// pairs already used plus its first unused representative.
fn enumerate_combos(
    choices: &[Vec<Pair>],
    classes: &BTreeMap<Pair, usize>,
    picks: &mut Vec<Pair>,
    out: &mut Vec<Vec<Pair>>,
) {
    if picks.len() == choices.len() {
        out.push(picks.clone());
        return;
    }
    let level = picks.len();
    let used: BTreeSet<Pair> = picks.iter().copied().collect();
    let mut offered_classes = BTreeSet::new();
    for &pair in &choices[level] {
        let class = classes[&pair];
        let allowed = if used.contains(&pair) {
            true
        } else {
            // first unused member of this class, at most one fresh
            // representative per class
            let first_unused = choices[level]
                .iter()
                .find(|p| classes[p] == class && !used.contains(*p));
            first_unused == Some(&pair) && offered_classes.insert(class)
        };
        if allowed {
            picks.push(pair);
            enumerate_combos(choices, classes, picks, out);
            picks.pop();
        }
    }
}

fn enumerate_all_combos(choices: &[Vec<Pair>], picks: &mut Vec<Pair>, f: &mut impl FnMut(&[Pair])) {
    if picks.len() == choices.len() {
        f(picks);
        return;
    }
    for &pair in &choices[picks.len()] {
        picks.push(pair);
        enumerate_all_combos(choices, picks, f);
        picks.pop();
    }
}

fn permute(items: Vec<AppId>, f: &mut impl FnMut(&[AppId])) {
    fn rec(prefix: &mut Vec<AppId>, rest: &mut Vec<AppId>, f: &mut impl FnMut(&[AppId])) {
        if rest.is_empty() {
            f(prefix);
            return;
        }
        for i in 0..rest.len() {
            let item = rest.remove(i);
            prefix.push(item);
            rec(prefix, rest, f);
            rest.insert(i, prefix.pop().unwrap());
        }
    }
    rec(&mut Vec::new(), &mut items.clone(), f);
}

/// Work-conservation bound: total demand-time on a resource divided by its
/// capacity. Valid only when no point is requested by several applications.
fn area_lower_bound(topo: &Topology, apps: &[Application], points: &[PointId], picks: &[Pair]) -> Time {
    let pair_of: BTreeMap<PointId, Pair> = points.iter().copied().zip(picks.iter().copied()).collect();
    let mut sensor_work: BTreeMap<SensorId, f64> = BTreeMap::new();
    let mut link_work: BTreeMap<Pair, f64> = BTreeMap::new();
    let mut base_work: BTreeMap<BaseId, f64> = BTreeMap::new();
    for app in apps {
        for req in &app.requests {
            let (s, b) = pair_of[&req.point_id];
            let work = req.rate * app.duration as f64;
            *sensor_work.entry(s).or_default() += work;
            *link_work.entry((s, b)).or_default() += work;
            *base_work.entry(b).or_default() += work;
        }
    }
    let mut lb = 0f64;
    for (&s, &w) in &sensor_work {
        lb = lb.max(w / topo.sensors[s].sensing_capacity);
    }
    for &w in link_work.values() {
        lb = lb.max(w / topo.link_bandwidth());
    }
    for (&b, &w) in &base_work {
        lb = lb.max(w / topo.bases[b].processing_capacity);
    }
    (lb - 1e-9).ceil().max(0.0) as Time
}

/// Depth-first enumeration of admission orders, replaying the engine's
/// strict-order semantics incrementally. Prunes branches whose running
/// makespan already reaches the best found, and sibling applications that
/// are exact duplicates of one another.
#[allow(clippy::too_many_arguments)]
fn search_orders(
    apps: &BTreeMap<AppId, &Application>,
    policy: &AssignmentPolicy,
    state: &NetworkState,
    releases: &[(Time, AppId)],
    now: Time,
    remaining: &[AppId],
    current_max: Time,
    best: &mut Time,
) {
    if remaining.is_empty() {
        if current_max < *best {
            *best = current_max;
        }
        return;
    }
    // longest-first tends to find tight schedules early
    let mut order: Vec<AppId> = remaining.to_vec();
    order.sort_by_key(|id| std::cmp::Reverse(apps[id].duration));

    let mut tried: HashSet<(Time, Vec<(PointId, u64)>)> = HashSet::new();
    for &next in &order {
        let app = apps[&next];
        let signature = (
            app.duration,
            app.requests
                .iter()
                .map(|r| (r.point_id, r.rate.to_bits()))
                .collect::<Vec<_>>(),
        );
        if !tried.insert(signature) {
            continue;
        }

        let mut s = state.clone();
        let mut rel = releases.to_vec();
        let mut t = now.max(app.arrival_time);
        let admitted = loop {
            while let Some(&(tf, id)) = rel.first() {
                if tf > t {
                    break;
                }
                rel.remove(0);
                s.release(id).expect("active app releases");
            }
            if let Some(fragment) = simulator::placement(&s, app, policy) {
                s.admit(app, &fragment, t).expect("placement is feasible");
                break Some(t);
            }
            match rel.first() {
                Some(&(tf, _)) => t = tf, // next release
                None => break None,
            }
        };
        let Some(t0) = admitted else {
            continue; // unservable under this combo; combo pre-check makes this rare
        };
        let finish = t0 + app.duration;
        let new_max = current_max.max(finish);
        if new_max >= *best {
            continue;
        }
        let pos = rel.partition_point(|&(tf, id)| (tf, id) < (finish, next));
        rel.insert(pos, (finish, next));
        let rest: Vec<AppId> = remaining.iter().copied().filter(|&id| id != next).collect();
        search_orders(apps, policy, &s, &rel, t0, &rest, new_max, best);
    }
}

/// A multiway number partitioning instance: split `numbers` into `k` groups
/// minimizing the maximum group sum.
#[derive(Debug, Clone)]
pub struct MnpInstance {
    pub numbers: Vec<u64>,
    pub k: usize,
}

pub const MNP_EXHAUSTIVE_LIMIT: usize = 14;

/// Exact minimum over all k-partitions of the maximum subset sum.
pub fn mnp_optimal(instance: &MnpInstance) -> Result<u64, OracleError> {
    let n = instance.numbers.len();
    if n > MNP_EXHAUSTIVE_LIMIT {
        return Err(OracleError::MnpTooLarge {
            n,
            limit: MNP_EXHAUSTIVE_LIMIT,
        });
    }
    if instance.k == 0 {
        return Err(OracleError::ZeroPartitions);
    }
    let mut numbers = instance.numbers.clone();
    numbers.sort_unstable_by(|a, b| b.cmp(a));
    let mut sums = vec![0u64; instance.k];
    let mut best = numbers.iter().sum::<u64>();

    fn assign(numbers: &[u64], i: usize, sums: &mut [u64], best: &mut u64) {
        if i == numbers.len() {
            let max = *sums.iter().max().unwrap();
            if max < *best {
                *best = max;
            }
            return;
        }
        for j in 0..sums.len() {
            // identical partial sums are symmetric
            if j > 0 && sums[j] == sums[j - 1] {
                continue;
            }
            if sums[j] + numbers[i] >= *best {
                continue;
            }
            sums[j] += numbers[i];
            assign(numbers, i + 1, sums, best);
            sums[j] -= numbers[i];
        }
    }
    assign(&numbers, 0, &mut sums, &mut best);
    Ok(best)
}

/// Builds the scheduling instance the partitioning problem maps onto: one
/// single-point unit-rate application per number (duration = the number),
/// and `k` isolated sensor/base pairs with unit sensing, bandwidth and
/// processing capacity, every sensor covering every point.
pub fn mnp_to_instance(instance: &MnpInstance) -> (Topology, Vec<Application>) {
    let n = instance.numbers.len();
    let k = instance.k;
    let params = TopologyParams {
        region_width: 1000,
        region_height: 1000,
        num_points: n,
        num_sensors: k,
        num_bases: k,
        comm_range: (200.0, 200.0),
        sensing_range: (1000.0, 1000.0),
        sensing_capacity: 1.0,
        link_bandwidth: 1.0,
        processing_capacity: 1.0,
    };
    let points = (0..n)
        .map(|id| MonitoringPoint {
            id,
            position: Coord { x: id as i64, y: 0 },
            data_type: 0,
        })
        .collect();
    // sensor j sits exactly 200 m below base j and strictly farther from
    // every other base, so each sensor reaches exactly its own base
    let sensors = (0..k)
        .map(|id| SensorNode {
            id,
            position: Coord { x: id as i64, y: 10 },
            sensing_range: 1000.0,
            comm_range: 200.0,
            sensing_capacity: 1.0,
        })
        .collect();
    let bases = (0..k)
        .map(|id| BaseStation {
            id,
            position: Coord { x: id as i64, y: 210 },
            processing_capacity: 1.0,
        })
        .collect();
    let topo = Topology::from_elements(params, 0, points, sensors, bases);

    let apps = instance
        .numbers
        .iter()
        .enumerate()
        .map(|(id, &duration)| Application {
            id,
            requests: vec![Request {
                point_id: id,
                rate: 1.0,
            }],
            duration,
            batch: 0,
            arrival_time: 0,
            deadline: duration + 150,
        })
        .collect();
    (topo, apps)
}
