//! Scheduling toolkit and discrete-event simulator for multi-purpose
//! wireless sensor networks.
//!
//! A network of sensor nodes and base stations serves applications that
//! request monitoring points to be sensed at given rates for a period of
//! time. Admission order and point-to-(sensor, base) assignment are decided
//! by one of several schedulers: a genetic algorithm (GABAS), three greedy
//! policies (LMPF, LMSF, LTSF) and the FCFS/SJF baselines. Sensing of a
//! point requested by several applications can be multiplexed (shared mode)
//! or counted per application (unshared mode).

pub mod gabas;
pub mod greedy;
pub mod harness;
pub mod oracle;
pub mod resources;
pub mod simulator;
pub mod topology;
pub mod workload;

/// Ids are indices into the owning arrays.
pub type PointId = usize;
pub type SensorId = usize;
pub type BaseId = usize;
pub type AppId = usize;

/// Simulation time. Event-driven, integer units.
pub type Time = u64;
/// Sensing / bandwidth / processing rates.
pub type Rate = f64;
