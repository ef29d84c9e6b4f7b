//! Genetic-algorithm optimal power flow minimizing total real line loss.
//!
//! Each candidate is decoded into control values, written into a copy of the
//! network and solved with Newton-Raphson. Fitness is `1 / (1 + loss_pu)` for
//! converged cases and [`NON_CONVERGED_FITNESS`] otherwise, so roulette
//! selection always sees positive weights.
//!
//! Fitness evaluations within a generation run in parallel; all random draws
//! happen on one seeded stream in a fixed order, so the result depends only on
//! the network, the config and the solver options.

mod config;
mod encoding;
mod operators;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ieee30_controls, GaConfig};
pub use encoding::{apply_controls, chromosome_length, decode, Chromosome, ControlKind, ControlVariable};
pub use operators::{
    crossover, crossover_at, init_population, mutate, mutation_rate, random_chromosome, select_index,
    select_parent,
};

use crate::error::{Error, Result};
use crate::losses::analyze;
use crate::network::Network;
use crate::solver::{solve, LoadFlowSolution, SolverOptions};

pub const NON_CONVERGED_FITNESS: f64 = 1e-9;

/// Outcome of one fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    /// `None` when the load flow did not converge.
    pub loss_mw: Option<f64>,
}

pub fn fitness_from_loss(loss_pu: f64) -> f64 {
    1.0 / (1.0 + loss_pu)
}

/// Decode, apply and solve one candidate.
pub fn evaluate(
    network: &Network,
    controls: &[ControlVariable],
    chromosome: &Chromosome,
    options: &SolverOptions,
) -> Result<Evaluation> {
    let values = decode(chromosome, controls);
    let candidate = apply_controls(network, controls, &values)?;
    Ok(evaluate_network(&candidate, options).0)
}

fn evaluate_network(network: &Network, options: &SolverOptions) -> (Evaluation, Option<LoadFlowSolution>) {
    match solve(network, options) {
        Ok(sol) if sol.converged => {
            let report = analyze(network, &sol);
            let loss_pu = report.total_p_loss_pu(network.base_mva);
            let eval = Evaluation { fitness: fitness_from_loss(loss_pu), loss_mw: Some(report.total_p_loss_mw) };
            (eval, Some(sol))
        }
        Ok(sol) => (Evaluation { fitness: NON_CONVERGED_FITNESS, loss_mw: None }, Some(sol)),
        Err(_) => (Evaluation { fitness: NON_CONVERGED_FITNESS, loss_mw: None }, None),
    }
}

pub fn fitness(
    network: &Network,
    controls: &[ControlVariable],
    chromosome: &Chromosome,
    options: &SolverOptions,
) -> Result<f64> {
    evaluate(network, controls, chromosome, options).map(|e| e.fitness)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Lowest loss in the population, MW (infinite if nothing converged).
    pub best_loss_mw: f64,
    /// Mean loss over converged members, MW.
    pub mean_loss_mw: f64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub converged_members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfResult {
    pub best_chromosome: Chromosome,
    pub best_controls: Vec<f64>,
    pub best_loss_mw: f64,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    /// Network with the best controls applied.
    pub network: Network,
    pub solution: LoadFlowSolution,
    /// Number of distinct candidates solved.
    pub evaluations: usize,
}

pub fn run_ga(network: &Network, config: &GaConfig, options: &SolverOptions) -> Result<OpfResult> {
    run(network, config, options)
}

/// As [`run_ga`], on a dedicated pool of `workers` threads.
pub fn run_ga_with_workers(
    network: &Network,
    config: &GaConfig,
    options: &SolverOptions,
    workers: usize,
) -> Result<OpfResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run(network, config, options))
}

fn run(network: &Network, config: &GaConfig, options: &SolverOptions) -> Result<OpfResult> {
    config.validate()?;
    options.validate()?;
    // reject dangling control references before spending any solves
    let probe: Vec<f64> = config.controls.iter().map(|c| c.lower).collect();
    apply_controls(network, &config.controls, &probe)?;

    let length = chromosome_length(&config.controls);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut population = init_population(config.population_size, length, &mut rng);
    let mut cache: HashMap<Chromosome, Evaluation> = HashMap::new();
    let mut history = Vec::with_capacity(config.max_generations + 1);
    let mut best: Option<(Chromosome, Evaluation)> = None;

    for generation in 0..=config.max_generations {
        let fresh: Vec<Chromosome> = {
            let mut seen = std::collections::HashSet::new();
            population
                .iter()
                .filter(|c| !cache.contains_key(*c) && seen.insert((*c).clone()))
                .cloned()
                .collect()
        };
        let results: Vec<Evaluation> = fresh
            .par_iter()
            .map(|c| evaluate(network, &config.controls, c, options))
            .collect::<Result<_>>()?;
        cache.extend(fresh.into_iter().zip(results));

        let evals: Vec<Evaluation> = population.iter().map(|c| cache[c]).collect();
        let fitnesses: Vec<f64> = evals.iter().map(|e| e.fitness).collect();
        history.push(generation_stats(generation, &evals));

        for (c, e) in population.iter().zip(&evals) {
            if best.as_ref().map_or(true, |(_, b)| e.fitness > b.fitness) {
                best = Some((c.clone(), *e));
            }
        }

        if generation == config.max_generations {
            break;
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
        let mut next: Vec<Chromosome> =
            order[..config.elite_count].iter().map(|&i| population[i].clone()).collect();
        let rate = mutation_rate(generation, config.mutation_initial, config.beta);
        while next.len() < config.population_size {
            let a = select_parent(&population, &fitnesses, &mut rng);
            let b = select_parent(&population, &fitnesses, &mut rng);
            let (c1, c2) = crossover(a, b, config.crossover_rate, &mut rng);
            next.push(mutate(&c1, rate, &mut rng));
            if next.len() < config.population_size {
                next.push(mutate(&c2, rate, &mut rng));
            }
        }
        population = next;
    }

    let (best_chromosome, best_eval) = best.expect("population is never empty");
    let best_controls = decode(&best_chromosome, &config.controls);
    let best_network = apply_controls(network, &config.controls, &best_controls)?;
    let solution = match evaluate_network(&best_network, options).1 {
        Some(sol) => sol,
        None => crate::solver::solve(&best_network, &SolverOptions { max_iterations: 1, ..*options })?,
    };
    Ok(OpfResult {
        best_chromosome,
        best_controls,
        best_loss_mw: best_eval.loss_mw.unwrap_or(f64::INFINITY),
        best_fitness: best_eval.fitness,
        history,
        network: best_network,
        solution,
        evaluations: cache.len(),
    })
}

fn generation_stats(generation: usize, evals: &[Evaluation]) -> GenerationStats {
    let losses: Vec<f64> = evals.iter().filter_map(|e| e.loss_mw).collect();
    let best_loss_mw = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_loss_mw = if losses.is_empty() {
        f64::INFINITY
    } else {
        losses.iter().sum::<f64>() / losses.len() as f64
    };
    GenerationStats {
        generation,
        best_loss_mw,
        mean_loss_mw,
        best_fitness: evals.iter().map(|e| e.fitness).fold(0.0, f64::max),
        mean_fitness: evals.iter().map(|e| e.fitness).sum::<f64>() / evals.len() as f64,
        converged_members: losses.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitness_transform() {
        assert_eq!(fitness_from_loss(0.0), 1.0);
        assert!((fitness_from_loss(0.17557) - 1.0 / 1.17557).abs() < 1e-15);
        assert!(NON_CONVERGED_FITNESS < fitness_from_loss(1e6));
    }
}
