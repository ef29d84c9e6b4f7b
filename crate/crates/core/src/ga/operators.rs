//! Selection, crossover and mutation. Every random draw comes from the
//! caller's generator, in a fixed order, so a seeded run is reproducible.

use rand::Rng;

use super::encoding::Chromosome;

pub fn random_chromosome<R: Rng + ?Sized>(length: usize, rng: &mut R) -> Chromosome {
    Chromosome((0..length).map(|_| rng.gen::<bool>()).collect())
}

pub fn init_population<R: Rng + ?Sized>(size: usize, length: usize, rng: &mut R) -> Vec<Chromosome> {
    (0..size).map(|_| random_chromosome(length, rng)).collect()
}

/// Roulette wheel: index `i` is returned with probability
/// `fitness[i] / sum(fitness)`. Fitnesses must be positive.
pub fn select_index<R: Rng + ?Sized>(fitnesses: &[f64], rng: &mut R) -> usize {
    assert!(!fitnesses.is_empty(), "empty population");
    let total: f64 = fitnesses.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (i, f) in fitnesses.iter().enumerate() {
        if target < *f {
            return i;
        }
        target -= f;
    }
    fitnesses.len() - 1
}

pub fn select_parent<'a, R: Rng + ?Sized>(
    population: &'a [Chromosome],
    fitnesses: &[f64],
    rng: &mut R,
) -> &'a Chromosome {
    assert_eq!(population.len(), fitnesses.len());
    &population[select_index(fitnesses, rng)]
}

/// Swap the suffixes of two parents starting at bit `cut`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    assert_eq!(a.len(), b.len(), "parents differ in length");
    let mut c1 = a.0[..cut].to_vec();
    c1.extend_from_slice(&b.0[cut..]);
    let mut c2 = b.0[..cut].to_vec();
    c2.extend_from_slice(&a.0[cut..]);
    (Chromosome(c1), Chromosome(c2))
}

/// Single-point crossover with probability `rate`, cut uniform in
/// `[1, len - 1]`; otherwise the children are copies of the parents.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    rate: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    assert_eq!(a.len(), b.len(), "parents differ in length");
    if rng.gen::<f64>() < rate && a.len() >= 2 {
        let cut = rng.gen_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        (a.clone(), b.clone())
    }
}

/// `initial * exp(-beta * generation)`.
pub fn mutation_rate(generation: usize, initial: f64, beta: f64) -> f64 {
    initial * (-beta * generation as f64).exp()
}

/// Flip every bit independently with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(chromosome: &Chromosome, rate: f64, rng: &mut R) -> Chromosome {
    Chromosome(
        chromosome
            .0
            .iter()
            .map(|&b| if rng.gen::<f64>() < rate { !b } else { b })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn population_sizing_and_determinism() {
        let a = init_population(50, 70, &mut rng());
        let b = init_population(50, 70, &mut rng());
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|c| c.len() == 70));
        assert_eq!(a, b);
    }

    #[test]
    fn bit_frequency_is_balanced() {
        let pop = init_population(10_000, 20, &mut rng());
        for pos in 0..20 {
            let ones = pop.iter().filter(|c| c.0[pos]).count() as f64 / 10_000.0;
            assert!((ones - 0.5).abs() < 0.02, "position {pos}: {ones}");
        }
    }

    #[test]
    fn roulette_proportions() {
        let mut r = rng();
        let draws = 100_000;
        let hits = (0..draws).filter(|_| select_index(&[3.0, 1.0], &mut r) == 0).count();
        assert!((hits as f64 / draws as f64 - 0.75).abs() < 0.01);
        let hits = (0..draws).filter(|_| select_index(&[1.0, 1.0], &mut r) == 0).count();
        assert!((hits as f64 / draws as f64 - 0.5).abs() < 0.01);
        assert!((0..100).all(|_| select_index(&[0.2], &mut r) == 0));
    }

    #[test]
    fn crossover_cases() {
        let a = Chromosome::parse("00000").unwrap();
        let b = Chromosome::parse("11111").unwrap();
        let (c1, c2) = crossover_at(&a, &b, 2);
        assert_eq!(c1.to_string(), "00111");
        assert_eq!(c2.to_string(), "11000");

        let mut r = rng();
        for _ in 0..20 {
            assert_eq!(crossover(&a, &b, 0.0, &mut r), (a.clone(), b.clone()));
            assert_eq!(crossover(&a, &a, 1.0, &mut r), (a.clone(), a.clone()));
        }
        // rate 1 always cuts strictly inside
        for _ in 0..50 {
            let (c1, _) = crossover(&a, &b, 1.0, &mut r);
            assert!(!c1.0[0] && c1.0[4]);
        }
    }

    #[test]
    fn mutation_decay() {
        assert_eq!(mutation_rate(0, 0.9, 0.05), 0.9);
        assert!((mutation_rate(20, 0.9, 0.05) - 0.9 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((mutation_rate(20, 0.9, 0.05) - 0.331_091).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for g in 0..500 {
            let m = mutation_rate(g, 0.9, 0.05);
            assert!(m < prev && m > 0.0);
            prev = m;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn mutate_extremes() {
        let mut r = rng();
        let c = random_chromosome(64, &mut r);
        assert_eq!(mutate(&c, 0.0, &mut r), c);
        let flipped = mutate(&c, 1.0, &mut r);
        assert!(c.0.iter().zip(&flipped.0).all(|(a, b)| a != b));
        let zeros = Chromosome(vec![false; 10_000]);
        let m = mutate(&zeros, 0.5, &mut r);
        let frac = m.0.iter().filter(|b| **b).count() as f64 / 10_000.0;
        assert!((frac - 0.5).abs() < 0.02);
    }
}
