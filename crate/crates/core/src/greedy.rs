//! Admission-order policies: the three greedy orderings plus the FCFS and
//! SJF baselines. All of them are used with worst-fit assignment.

use serde::{Deserialize, Serialize};

use crate::workload::Application;
use crate::AppId;

/// Sort keys are static per application, so re-sorting the waiting queue at
/// a batch arrival is equivalent to restricting one global sort to the
/// applications that have arrived; the engine exploits exactly that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderingPolicy {
    /// Least monitoring points first.
    Lmpf,
    /// Least maximum sensing rate requirement first.
    Lmsf,
    /// Least total sensing rate requirement first.
    Ltsf,
    /// First come first served: (arrival time, id).
    Fcfs,
    /// Shortest job first: ascending duration.
    Sjf,
}

impl std::str::FromStr for OrderingPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lmpf" => Ok(OrderingPolicy::Lmpf),
            "lmsf" => Ok(OrderingPolicy::Lmsf),
            "ltsf" => Ok(OrderingPolicy::Ltsf),
            "fcfs" => Ok(OrderingPolicy::Fcfs),
            "sjf" => Ok(OrderingPolicy::Sjf),
            other => Err(format!("unknown ordering policy '{other}'")),
        }
    }
}

impl std::fmt::Display for OrderingPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            OrderingPolicy::Lmpf => "lmpf",
            OrderingPolicy::Lmsf => "lmsf",
            OrderingPolicy::Ltsf => "ltsf",
            OrderingPolicy::Fcfs => "fcfs",
            OrderingPolicy::Sjf => "sjf",
        };
        write!(f, "{name}")
    }
}

/// Stable ascending sort of the applications by the policy's key; equal keys
/// keep lower ids first.
pub fn order(policy: OrderingPolicy, apps: &[Application]) -> Vec<AppId> {
    let mut ids: Vec<AppId> = apps.iter().map(|a| a.id).collect();
    ids.sort_unstable(); // id tie-break baseline
    let by_id: std::collections::BTreeMap<AppId, &Application> =
        apps.iter().map(|a| (a.id, a)).collect();
    match policy {
        OrderingPolicy::Lmpf => ids.sort_by_key(|id| by_id[id].requests.len()),
        OrderingPolicy::Lmsf => ids.sort_by(|a, b| {
            by_id[a]
                .max_rate()
                .partial_cmp(&by_id[b].max_rate())
                .expect("rates are finite")
        }),
        OrderingPolicy::Ltsf => ids.sort_by(|a, b| {
            by_id[a]
                .total_rate()
                .partial_cmp(&by_id[b].total_rate())
                .expect("rates are finite")
        }),
        OrderingPolicy::Fcfs => ids.sort_by_key(|id| by_id[id].arrival_time),
        OrderingPolicy::Sjf => ids.sort_by_key(|id| by_id[id].duration),
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Request;
    use crate::{Rate, Time};

    fn app(id: AppId, rates: &[Rate], duration: Time, arrival: Time) -> Application {
        Application {
            id,
            requests: rates
                .iter()
                .enumerate()
                .map(|(i, &rate)| Request {
                    point_id: id * 10 + i,
                    rate,
                })
                .collect(),
            duration,
            batch: 0,
            arrival_time: arrival,
            deadline: arrival + duration + 150,
        }
    }

    #[test]
    fn lmpf_orders_by_point_count() {
        let apps = vec![
            app(0, &[1.0, 1.0, 1.0], 10, 0),
            app(1, &[1.0], 10, 0),
            app(2, &[1.0, 1.0], 10, 0),
        ];
        assert_eq!(order(OrderingPolicy::Lmpf, &apps), vec![1, 2, 0]);
    }

    #[test]
    fn lmsf_orders_by_max_rate() {
        let apps = vec![app(0, &[10.0, 30.0], 10, 0), app(1, &[25.0], 10, 0)];
        assert_eq!(order(OrderingPolicy::Lmsf, &apps), vec![1, 0]);
    }

    #[test]
    fn ltsf_orders_by_total_rate() {
        let apps = vec![app(0, &[10.0, 30.0], 10, 0), app(1, &[25.0], 10, 0)];
        assert_eq!(order(OrderingPolicy::Ltsf, &apps), vec![1, 0]);
    }

    #[test]
    fn fcfs_orders_by_arrival_then_id() {
        let apps = vec![app(0, &[1.0], 10, 5), app(1, &[1.0], 10, 0), app(2, &[1.0], 10, 0)];
        assert_eq!(order(OrderingPolicy::Fcfs, &apps), vec![1, 2, 0]);
    }

    #[test]
    fn sjf_orders_by_duration() {
        let apps = vec![app(0, &[1.0], 30, 0), app(1, &[1.0], 10, 0), app(2, &[1.0], 20, 0)];
        assert_eq!(order(OrderingPolicy::Sjf, &apps), vec![1, 2, 0]);
    }

    #[test]
    fn output_is_permutation_and_stable() {
        let apps: Vec<_> = (0..20).map(|i| app(i, &[5.0], 10, 0)).collect();
        for policy in [
            OrderingPolicy::Lmpf,
            OrderingPolicy::Lmsf,
            OrderingPolicy::Ltsf,
            OrderingPolicy::Fcfs,
            OrderingPolicy::Sjf,
        ] {
            let ids = order(policy, &apps);
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..20).collect::<Vec<_>>());
            // constant keys: id order preserved
            assert_eq!(ids, (0..20).collect::<Vec<_>>());
            assert_eq!(ids, order(policy, &apps));
        }
    }

    #[test]
    fn single_point_apps_make_lmpf_equal_fcfs() {
        let apps: Vec<_> = (0..30).map(|i| app(i, &[(i % 7) as Rate + 1.0], 10, 0)).collect();
        assert_eq!(
            order(OrderingPolicy::Lmpf, &apps),
            order(OrderingPolicy::Fcfs, &apps)
        );
    }

    #[test]
    fn empty_input() {
        assert!(order(OrderingPolicy::Lmpf, &[]).is_empty());
    }
}
