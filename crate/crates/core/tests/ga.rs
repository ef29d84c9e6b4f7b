use gridloss::cases::ieee30;
use gridloss::ga::{
    chromosome_length, decode, evaluate, fitness_from_loss, ieee30_controls, mutation_rate, random_chromosome,
    run_ga, run_ga_with_workers, Chromosome, ControlKind, ControlVariable, GaConfig, NON_CONVERGED_FITNESS,
};
use gridloss::{analyze, solve, SolverOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> GaConfig {
    GaConfig { population_size: 12, max_generations: 6, rng_seed: seed, ..GaConfig::default() }
}

#[test]
fn identical_across_worker_counts() {
    let net = ieee30();
    let opts = SolverOptions::default();
    let one = run_ga_with_workers(&net, &small(5), &opts, 1).unwrap();
    let four = run_ga_with_workers(&net, &small(5), &opts, 4).unwrap();
    let default_pool = run_ga(&net, &small(5), &opts).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, default_pool);
    assert_eq!(one.best_loss_mw.to_bits(), four.best_loss_mw.to_bits());
}

#[test]
fn seed_changes_the_search() {
    let net = ieee30();
    let opts = SolverOptions::default();
    let a = run_ga(&net, &small(1), &opts).unwrap();
    let b = run_ga(&net, &small(2), &opts).unwrap();
    assert_ne!(a.best_chromosome, b.best_chromosome);
}

#[test]
fn zero_generations_is_best_of_initial_population() {
    let net = ieee30();
    let opts = SolverOptions::default();
    let cfg = GaConfig { max_generations: 0, ..small(9) };
    let result = run_ga(&net, &cfg, &opts).unwrap();
    assert_eq!(result.history.len(), 1);
    assert_eq!(result.history[0].best_loss_mw, result.best_loss_mw);

    // reproduce the initial population from the same stream
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let length = chromosome_length(&cfg.controls);
    let best = (0..cfg.population_size)
        .map(|_| random_chromosome(length, &mut rng))
        .map(|c| evaluate(&net, &cfg.controls, &c, &opts).unwrap().loss_mw.unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best, result.best_loss_mw);
}

#[test]
fn history_is_elitist_and_result_consistent() {
    let net = ieee30();
    let opts = SolverOptions::default();
    let cfg = GaConfig { max_generations: 15, ..small(3) };
    let result = run_ga(&net, &cfg, &opts).unwrap();
    assert_eq!(result.history.len(), 16);
    for w in result.history.windows(2) {
        assert!(w[1].best_loss_mw <= w[0].best_loss_mw, "{} > {}", w[1].best_loss_mw, w[0].best_loss_mw);
        assert!(w[1].best_fitness >= w[0].best_fitness);
    }
    assert_eq!(result.history.last().unwrap().best_loss_mw, result.best_loss_mw);

    // the reported network and solution belong to the best chromosome
    assert_eq!(decode(&result.best_chromosome, &cfg.controls), result.best_controls);
    let report = analyze(&result.network, &result.solution);
    assert!((report.total_p_loss_mw - result.best_loss_mw).abs() < 1e-9);
    assert!((result.best_fitness - fitness_from_loss(result.best_loss_mw / 100.0)).abs() < 1e-12);
}

#[test]
fn empty_control_set_evaluates_the_base_case() {
    let net = ieee30();
    let opts = SolverOptions::default();
    let eval = evaluate(&net, &[], &Chromosome(Vec::new()), &opts).unwrap();
    let base = analyze(&net, &solve(&net, &opts).unwrap()).total_p_loss_mw;
    assert_eq!(eval.loss_mw, Some(base));
    // 1 / (1 + 0.17557) with the loss reproduced to within 0.1 MW
    assert!((eval.fitness - 0.850_66).abs() < 1e-3, "{}", eval.fitness);
}

#[test]
fn non_convergence_is_penalized() {
    let mut net = ieee30();
    for b in &mut net.buses {
        b.p_demand *= 40.0;
    }
    let opts = SolverOptions { max_iterations: 5, ..SolverOptions::default() };
    let eval = evaluate(&net, &[], &Chromosome(Vec::new()), &opts).unwrap();
    assert_eq!(eval.fitness, NON_CONVERGED_FITNESS);
    assert_eq!(eval.loss_mw, None);
}

#[test]
fn dangling_control_is_rejected_before_solving() {
    let cfg = GaConfig {
        controls: vec![ControlVariable::new(ControlKind::TransformerTap { from_bus: 1, to_bus: 2 }, 0.9, 1.1)],
        ..small(1)
    };
    let mut net = ieee30();
    net.branches.retain(|b| !(b.from_bus == 1 && b.to_bus == 2));
    assert!(run_ga(&net, &cfg, &SolverOptions::default()).is_err());
}

#[test]
fn decode_and_decay_are_exact() {
    let v = ControlVariable::new(ControlKind::GeneratorVoltage { bus: 2 }, 0.95, 1.10);
    let c = |s: &str| Chromosome::parse(s).unwrap();
    assert!((decode(&c("00000"), std::slice::from_ref(&v))[0] - 0.95).abs() < 1e-12);
    assert!((decode(&c("11111"), std::slice::from_ref(&v))[0] - 1.10).abs() < 1e-12);
    assert!((decode(&c("10000"), std::slice::from_ref(&v))[0] - (0.95 + 0.15 * 16.0 / 31.0)).abs() < 1e-12);
    assert!((mutation_rate(0, 0.9, 0.05) - 0.9).abs() < 1e-12);
    assert!((mutation_rate(20, 0.9, 0.05) - 0.9 * (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn default_controls_reference_the_fixture() {
    let controls = ieee30_controls();
    assert_eq!(controls.len(), 14);
    assert_eq!(chromosome_length(&controls), 70);
    let lows: Vec<f64> = controls.iter().map(|c| c.lower).collect();
    let highs: Vec<f64> = controls.iter().map(|c| c.upper).collect();
    let net = ieee30();
    assert!(gridloss::ga::apply_controls(&net, &controls, &lows).is_ok());
    assert!(gridloss::ga::apply_controls(&net, &controls, &highs).is_ok());
}

proptest! {
    #[test]
    fn decoded_controls_stay_in_bounds(seed in any::<u64>()) {
        let controls = ieee30_controls();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_chromosome(chromosome_length(&controls), &mut rng);
        for (v, ctl) in decode(&c, &controls).iter().zip(&controls) {
            prop_assert!(*v >= ctl.lower && *v <= ctl.upper);
        }
        // and the grid is reproduced by encode
        let values = decode(&c, &controls);
        prop_assert_eq!(Chromosome::encode(&values, &controls), c);
    }

    #[test]
    fn config_text_round_trip(pop in 2usize..40, gens in 0usize..200, seed in any::<u64>(), beta in 0.0f64..1.0) {
        let cfg = GaConfig { population_size: pop * 2, max_generations: gens, rng_seed: seed, beta, ..GaConfig::default() };
        prop_assert_eq!(GaConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
