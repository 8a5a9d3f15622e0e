//! GA-clustering: a population of center sets encoded as flat real vectors,
//! evolved with roulette selection, single-point crossover and mutation.
//!
//! Fitness evaluation also performs one k-means refinement of the encoded
//! centers and writes the refined centers back into the chromosome.

use rand::Rng;

use crate::error::{ClusterError, Result};
use crate::matrix::Matrix;
use crate::metric::{assign, compute_jc, ClusterModel, MetricMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub fitness: f64,
    pub jc: f64,
}

/// `k` centers of dimension `d` concatenated into `k·d` genes.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    genes: Vec<f64>,
    score: Option<Score>,
}

impl Chromosome {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes, score: None }
    }

    pub fn from_centers(centers: &Matrix) -> Self {
        Self::new(centers.as_slice().to_vec())
    }

    /// Attaches a precomputed score.
    pub fn with_score(mut self, score: Score) -> Self {
        self.score = Some(score);
        self
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn score(&self) -> Option<Score> {
        self.score
    }

    pub fn fitness(&self) -> Option<f64> {
        self.score.map(|s| s.fitness)
    }

    pub fn centers(&self, d: usize) -> Result<Matrix> {
        if d == 0 || self.genes.len() % d != 0 {
            return Err(ClusterError::DimensionMismatch {
                expected: d,
                found: self.genes.len(),
            });
        }
        Matrix::new(self.genes.len() / d, d, self.genes.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub generations: usize,
    /// Number of best individuals copied unchanged into the next generation.
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 15,
            crossover_prob: 0.8,
            mutation_prob: 0.001,
            generations: 100,
            elitism: 1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(ClusterError::invalid("population size must be at least 2"));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ClusterError::invalid(format!("{name} probability must be in [0, 1], got {p}")));
            }
        }
        if self.elitism > self.population_size {
            return Err(ClusterError::invalid("elitism cannot exceed the population size"));
        }
        Ok(())
    }
}

/// Each chromosome encodes `k` distinct data points, drawn independently per
/// chromosome.
pub fn init_population<R: Rng + ?Sized>(
    points: &Matrix,
    k: usize,
    params: &GaParams,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    (0..params.population_size)
        .map(|_| crate::kmeans::init_random(points, k, rng).map(|c| Chromosome::from_centers(&c)))
        .collect()
}

/// Decodes the centers, assigns every point, moves each non-empty cluster's
/// center to its members' mean (written back into the genes) and scores the
/// chromosome with fitness `1 / (1 + Jc)`.
pub fn evaluate_fitness(c: &mut Chromosome, points: &Matrix, mode: MetricMode) -> Result<f64> {
    let d = points.cols();
    let mut centers = c.centers(d)?;
    let assignment = assign(points, &centers)?;

    let k = centers.rows();
    let mut sums = Matrix::zeros(k, d);
    for (p, &j) in points.iter_rows().zip(assignment.cluster_of()) {
        for (s, v) in sums.row_mut(j).iter_mut().zip(p) {
            *s += v;
        }
    }
    for (j, &count) in assignment.counts().iter().enumerate() {
        if count > 0 {
            let row = centers.row_mut(j);
            for (dst, s) in row.iter_mut().zip(sums.row(j)) {
                *dst = s / count as f64;
            }
        }
    }
    let jc = compute_jc(points, &centers, &assignment, mode)?;
    let fitness = 1.0 / (1.0 + jc);
    c.genes = centers.into_vec();
    c.score = Some(Score { fitness, jc });
    Ok(fitness)
}

fn evaluate_all(pop: &mut [Chromosome], points: &Matrix, mode: MetricMode) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pop.par_iter_mut()
            .filter(|c| c.score.is_none())
            .try_for_each(|c| evaluate_fitness(c, points, mode).map(|_| ()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        pop.iter_mut()
            .filter(|c| c.score.is_none())
            .try_for_each(|c| evaluate_fitness(c, points, mode).map(|_| ()))
    }
}

/// Draws `count` individuals with replacement, each with probability
/// proportional to its fitness.
pub fn roulette_select<R: Rng + ?Sized>(pop: &[Chromosome], count: usize, rng: &mut R) -> Result<Vec<Chromosome>> {
    let mut cumulative = Vec::with_capacity(pop.len());
    let mut total = 0.0;
    for c in pop {
        let f = c.fitness().ok_or(ClusterError::NotEvaluated)?;
        if !(f >= 0.0) || !f.is_finite() {
            return Err(ClusterError::invalid(format!("fitness must be finite and non-negative, got {f}")));
        }
        total += f;
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(ClusterError::DegenerateRoulette);
    }
    Ok((0..count)
        .map(|_| {
            let r = rng.gen::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= r).min(pop.len() - 1);
            pop[i].clone()
        })
        .collect())
}

/// Swaps the gene suffixes starting at `cut`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if cut == 0 || cut >= a.len() {
        return Err(ClusterError::invalid(format!("cut {cut} must lie in [1, {}]", a.len().saturating_sub(1))));
    }
    let mut x = a.genes[..cut].to_vec();
    x.extend_from_slice(&b.genes[cut..]);
    let mut y = b.genes[..cut].to_vec();
    y.extend_from_slice(&a.genes[cut..]);
    Ok((Chromosome::new(x), Chromosome::new(y)))
}

/// With probability `pc` exchanges suffixes after a cut drawn uniformly from
/// `1..L`; otherwise returns copies of the parents.
pub fn crossover_single_point<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    pc: f64,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(ClusterError::invalid("crossover needs chromosomes of length >= 2"));
    }
    if rng.gen_bool(pc) {
        let cut = rng.gen_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        Ok((a.clone(), b.clone()))
    }
}

/// Perturbs each gene independently with probability `pm`: `v` becomes
/// `v ± 2δv` with δ uniform in [0, 1), or `±2δ` when `v` is zero. Returns the
/// number of genes touched.
pub fn mutate<R: Rng + ?Sized>(c: &mut Chromosome, pm: f64, rng: &mut R) -> usize {
    let mut touched = 0;
    for g in &mut c.genes {
        if rng.gen_bool(pm) {
            let delta: f64 = rng.gen();
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            *g = if *g == 0.0 { sign * 2.0 * delta } else { *g + sign * 2.0 * delta * *g };
            touched += 1;
        }
    }
    if touched > 0 {
        c.score = None;
    }
    touched
}

fn best_index(pop: &[Chromosome]) -> usize {
    // first maximum wins, so ties resolve to the lower index
    let mut best = 0;
    for (i, c) in pop.iter().enumerate().skip(1) {
        if c.fitness() > pop[best].fitness() {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaReport {
    pub model: ClusterModel,
    pub best: Chromosome,
    /// Best Jc of the initial population, before any generation ran.
    pub initial_best_jc: f64,
    /// Best-ever fitness after each generation (index 0 is the initial
    /// population).
    pub best_fitness_history: Vec<f64>,
}

pub fn ga_cluster<R: Rng + ?Sized>(
    points: &Matrix,
    k: usize,
    params: &GaParams,
    mode: MetricMode,
    rng: &mut R,
) -> Result<ClusterModel> {
    ga_cluster_traced(points, k, params, mode, &[], rng).map(|r| r.model)
}

/// Runs the generation loop for `params.generations` generations.
///
/// `seeds` are center sets placed into the initial population in place of
/// the first random individuals. Each generation: keep the `elitism` best,
/// select by roulette, cross over consecutive pairs, mutate, evaluate, then
/// the elites replace the worst offspring. The returned model is the
/// best-ever chromosome, reassigned and scored afresh.
pub fn ga_cluster_traced<R: Rng + ?Sized>(
    points: &Matrix,
    k: usize,
    params: &GaParams,
    mode: MetricMode,
    seeds: &[Matrix],
    rng: &mut R,
) -> Result<GaReport> {
    params.validate()?;
    if k == 0 {
        return Err(ClusterError::invalid("k must be at least 1"));
    }
    let mut pop = init_population(points, k, params, rng)?;
    for (slot, seed) in pop.iter_mut().zip(seeds) {
        if seed.rows() != k || seed.cols() != points.cols() {
            return Err(ClusterError::DimensionMismatch {
                expected: k * points.cols(),
                found: seed.rows() * seed.cols(),
            });
        }
        *slot = Chromosome::from_centers(seed);
    }
    evaluate_all(&mut pop, points, mode)?;

    let mut best = pop[best_index(&pop)].clone();
    let initial_best_jc = best.score.map_or(f64::INFINITY, |s| s.jc);
    let mut history = vec![best.fitness().unwrap_or(0.0)];

    for _ in 0..params.generations {
        let mut ranked: Vec<usize> = (0..pop.len()).collect();
        ranked.sort_by(|&a, &b| pop[b].fitness().partial_cmp(&pop[a].fitness()).unwrap_or(std::cmp::Ordering::Equal));
        let elites: Vec<Chromosome> = ranked.iter().take(params.elitism).map(|&i| pop[i].clone()).collect();

        let selected = roulette_select(&pop, params.population_size, rng)?;
        let mut next = Vec::with_capacity(params.population_size);
        let mut pairs = selected.chunks_exact(2);
        for pair in &mut pairs {
            if pair[0].len() >= 2 {
                let (x, y) = crossover_single_point(&pair[0], &pair[1], params.crossover_prob, rng)?;
                next.push(x);
                next.push(y);
            } else {
                next.extend_from_slice(pair);
            }
        }
        next.extend_from_slice(pairs.remainder());
        for c in &mut next {
            mutate(c, params.mutation_prob, rng);
        }
        evaluate_all(&mut next, points, mode)?;

        let mut worst_first: Vec<usize> = (0..next.len()).collect();
        worst_first.sort_by(|&a, &b| next[a].fitness().partial_cmp(&next[b].fitness()).unwrap_or(std::cmp::Ordering::Equal));
        for (e, &slot) in elites.into_iter().zip(&worst_first) {
            next[slot] = e;
        }
        pop = next;

        let gen_best = &pop[best_index(&pop)];
        if gen_best.fitness() > best.fitness() {
            best = gen_best.clone();
        }
        history.push(best.fitness().unwrap_or(0.0));
    }

    let model = ClusterModel::evaluate(points, best.centers(points.cols())?, mode)?;
    Ok(GaReport {
        model,
        best,
        initial_best_jc,
        best_fitness_history: history,
    })
}
