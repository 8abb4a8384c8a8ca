//! Genetic algorithm scheduler: evolves an admission order together with a
//! per-point (sensor, base) choice against negated-makespan fitness.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::resources::{NetworkState, SharingMode};
use crate::simulator::{self, AssignmentPolicy, PointGenes, Schedule};
use crate::topology::Topology;
use crate::workload::Application;
use crate::{AppId, SensorId, Time};

#[derive(Debug, Error)]
pub enum GabasError {
    #[error("population size must be at least 1")]
    EmptyPopulation,
}

/// One individual: an application-order permutation plus joint sensor/base
/// genes per monitoring point. Points with no valid pair carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub app_genes: Vec<AppId>,
    pub point_genes: PointGenes,
}

impl Chromosome {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            admission_order: self.app_genes.clone(),
            policy: AssignmentPolicy::FixedGenes(self.point_genes.clone()),
        }
    }

    /// Permutation and coverage/reach validity.
    pub fn is_valid(&self, topo: &Topology, app_count: usize) -> bool {
        if self.app_genes.len() != app_count {
            return false;
        }
        let mut seen = vec![false; app_count];
        for &id in &self.app_genes {
            if id >= app_count || seen[id] {
                return false;
            }
            seen[id] = true;
        }
        self.point_genes.iter().enumerate().all(|(k, gene)| match *gene {
            None => true,
            Some((sensor, base)) => {
                topo.coverage[k].contains(&sensor) && topo.has_link(sensor, base)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    pub tournament_fraction: f64,
    pub uniform_rate: f64,
    pub mutation_rate: f64,
    pub stagnation_limit: u32,
    pub elitism: bool,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 200,
            tournament_fraction: 0.05,
            uniform_rate: 0.5,
            mutation_rate: 0.05,
            stagnation_limit: 7,
            elitism: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationStats {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best: Chromosome,
    pub best_fitness: f64,
    pub generations: u32,
    pub log: Vec<GenerationStats>,
}

/// Assignable (covering, base-reaching) sensors per point.
fn candidates(topo: &Topology) -> Vec<Vec<SensorId>> {
    (0..topo.points.len())
        .map(|k| topo.assignable_sensors(k).collect())
        .collect()
}

fn random_point_genes(
    topo: &Topology,
    cands: &[Vec<SensorId>],
    rng: &mut impl Rng,
) -> PointGenes {
    cands
        .iter()
        .map(|sensors| {
            if sensors.is_empty() {
                None
            } else {
                let sensor = sensors[rng.gen_range(0..sensors.len())];
                let bases = &topo.reach[sensor];
                Some((sensor, bases[rng.gen_range(0..bases.len())]))
            }
        })
        .collect()
}

/// Random initial population: shuffled identity permutations and uniform
/// joint sensor/base draws per point. Applications requesting a point no
/// sensor can serve are tolerated; every schedule rejects them alike.
pub fn init_population(
    topo: &Topology,
    apps: &[Application],
    params: &GaParams,
    rng: &mut impl Rng,
) -> Result<Vec<Chromosome>, GabasError> {
    if params.population_size == 0 {
        return Err(GabasError::EmptyPopulation);
    }
    let cands = candidates(topo);
    Ok((0..params.population_size)
        .map(|_| {
            let mut app_genes: Vec<AppId> = apps.iter().map(|a| a.id).collect();
            app_genes.shuffle(rng);
            Chromosome {
                app_genes,
                point_genes: random_point_genes(topo, &cands, rng),
            }
        })
        .collect())
}

/// Negated makespan of the chromosome's schedule. An application this
/// chromosome's genes cannot serve at all, although some gene choice could,
/// is charged a penalty larger than any makespan so that dropping
/// applications never looks like an improvement.
pub fn fitness(
    chromosome: &Chromosome,
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    baseline_rejected: &[AppId],
) -> f64 {
    let metrics = simulator::run(topo, apps, &chromosome.schedule(), mode);
    let penalty_unit: Time = apps.iter().map(|a| a.duration).sum::<Time>() + 1;
    let extra = metrics
        .rejected
        .iter()
        .filter(|id| !baseline_rejected.contains(id))
        .count() as Time;
    -((metrics.makespan + extra * penalty_unit) as f64)
}

/// Tournament selection: samples `ceil(fraction * n)` individuals with
/// replacement; ties replace the incumbent, keeping the later of equals.
pub fn tournament_select(
    fitnesses: &[f64],
    params: &GaParams,
    rng: &mut impl Rng,
) -> usize {
    let n = fitnesses.len();
    assert!(n > 0, "population must be non-empty");
    let size = ((params.tournament_fraction * n as f64).ceil() as usize).max(1);
    let mut best = rng.gen_range(0..n);
    for _ in 1..size {
        let i = rng.gen_range(0..n);
        if fitnesses[i] >= fitnesses[best] {
            best = i;
        }
    }
    best
}

/// Uniform crossover with gene repair. Application genes inherit per
/// position; each second occurrence of a duplicated id is replaced by a
/// missing id, missing ids consumed in ascending order. Sensor and base
/// genes are inherited together per point.
pub fn crossover(
    parent1: &Chromosome,
    parent2: &Chromosome,
    params: &GaParams,
    rng: &mut impl Rng,
) -> Chromosome {
    let n = parent1.app_genes.len();
    let mut app_genes: Vec<AppId> = (0..n)
        .map(|i| {
            if rng.gen::<f64>() <= params.uniform_rate {
                parent1.app_genes[i]
            } else {
                parent2.app_genes[i]
            }
        })
        .collect();
    repair_permutation(&mut app_genes, n);

    let point_genes = parent1
        .point_genes
        .iter()
        .zip(&parent2.point_genes)
        .map(|(&a, &b)| if rng.gen::<f64>() <= params.uniform_rate { a } else { b })
        .collect();

    Chromosome {
        app_genes,
        point_genes,
    }
}

/// Replaces second occurrences of duplicated ids (scanning left to right)
/// with the missing ids in ascending order.
pub fn repair_permutation(genes: &mut [AppId], id_count: usize) {
    let mut seen = vec![false; id_count];
    let mut duplicate_positions = Vec::new();
    for (pos, &id) in genes.iter().enumerate() {
        if seen[id] {
            duplicate_positions.push(pos);
        } else {
            seen[id] = true;
        }
    }
    let mut missing = (0..id_count).filter(|&id| !seen[id]);
    for pos in duplicate_positions {
        genes[pos] = missing.next().expect("one missing id per duplicate");
    }
}

/// With probability `mutation_rate`, swaps two random admission-order
/// positions; independently re-draws each point's joint sensor/base gene
/// with the same probability.
pub fn mutate(
    chromosome: &Chromosome,
    topo: &Topology,
    cands: &[Vec<SensorId>],
    params: &GaParams,
    rng: &mut impl Rng,
) -> Chromosome {
    let mut out = chromosome.clone();
    if !out.app_genes.is_empty() && rng.gen::<f64>() <= params.mutation_rate {
        let i = rng.gen_range(0..out.app_genes.len());
        let j = rng.gen_range(0..out.app_genes.len());
        out.app_genes.swap(i, j);
    }
    for (k, gene) in out.point_genes.iter_mut().enumerate() {
        if cands[k].is_empty() {
            continue;
        }
        if rng.gen::<f64>() <= params.mutation_rate {
            let sensor = cands[k][rng.gen_range(0..cands[k].len())];
            let bases = &topo.reach[sensor];
            *gene = Some((sensor, bases[rng.gen_range(0..bases.len())]));
        }
    }
    out
}

/// Generational loop: tournament selection, uniform crossover with repair,
/// mutation, optional elitism; terminates once the global best has not
/// strictly improved for `stagnation_limit` consecutive generations.
/// Deterministic for a fixed seed; fitness evaluations run in parallel but
/// all random draws happen on the driving thread.
pub fn evolve(
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    params: &GaParams,
    seed: u64,
) -> Result<GaResult, GabasError> {
    let cands = candidates(topo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population = init_population(topo, apps, params, &mut rng)?;

    // Applications no gene choice can serve; everything else must be served.
    let empty = NetworkState::new(topo, mode, 1.0, 1.0);
    let baseline_rejected: Vec<AppId> = apps
        .iter()
        .filter(|a| empty.worst_fit_assign(a).is_none())
        .map(|a| a.id)
        .collect();

    let evaluate = |pop: &[Chromosome]| -> Vec<f64> {
        pop.par_iter()
            .map(|c| fitness(c, topo, apps, mode, &baseline_rejected))
            .collect()
    };
    let mut fitnesses = evaluate(&population);

    let mut best: Option<(Chromosome, f64)> = None;
    let mut stagnation = 0u32;
    let mut generation = 0u32;
    let mut log = Vec::new();
    loop {
        let gen_best_idx = argmax(&fitnesses);
        let gen_best_fit = fitnesses[gen_best_idx];
        match &best {
            Some((_, f)) if gen_best_fit <= *f => stagnation += 1,
            _ => {
                best = Some((population[gen_best_idx].clone(), gen_best_fit));
                stagnation = 0;
            }
        }
        log.push(GenerationStats {
            generation,
            best_fitness: gen_best_fit,
            mean_fitness: fitnesses.iter().sum::<f64>() / fitnesses.len().max(1) as f64,
        });
        if stagnation >= params.stagnation_limit {
            break;
        }

        let mut offspring: Vec<Chromosome> = Vec::with_capacity(population.len());
        for individual in &population {
            let mate = tournament_select(&fitnesses, params, &mut rng);
            let child = crossover(individual, &population[mate], params, &mut rng);
            offspring.push(mutate(&child, topo, &cands, params, &mut rng));
        }
        let mut offspring_fitnesses = evaluate(&offspring);
        if params.elitism {
            let worst = argmin(&offspring_fitnesses);
            offspring[worst] = population[gen_best_idx].clone();
            offspring_fitnesses[worst] = gen_best_fit;
        }
        population = offspring;
        fitnesses = offspring_fitnesses;
        generation += 1;
    }

    let (best, best_fitness) = best.expect("at least one generation evaluated");
    Ok(GaResult {
        best,
        best_fitness,
        generations: generation,
        log,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}
