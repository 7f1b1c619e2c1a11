//! Monte Carlo ensembles over disorder realizations: averaged distributions,
//! moment and variance series, similarity, and shot-noise sampling.
//!
//! Maps are generated and evolved in parallel, but partial results are merged
//! in map-index order with compensated summation, so a summary is bitwise
//! reproducible for a given `DisorderSpec` regardless of thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::disorder::{CoinLabel, CoinMap, DisorderError, DisorderSpec};
use crate::rng::Stream;
use crate::walk::{CoinOperator, Distribution, WalkError, WalkerState};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
    #[error("distribution sums to {sum}, expected 1 within 1e-6")]
    Unnormalized { sum: f64 },
    #[error("central moment order 2n supported for n in 1..=3, got n = {0}")]
    BadMomentOrder(u32),
    #[error("distributions live on different grids ({0} vs {1} sites)")]
    GridMismatch(usize, usize),
}

/// Averaged results of one disorder ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub spec: DisorderSpec,
    /// `(t, averaged P(·, t))` for each recorded step, in recorded order.
    pub averaged_distributions: Vec<(usize, Distribution)>,
    /// `(t, σ²(t))` computed from the averaged distributions.
    pub variance_series: Vec<(f64, f64)>,
    pub maps_completed: usize,
}

impl EnsembleSummary {
    /// The averaged distribution at step `t`, if it was recorded.
    pub fn distribution_at(&self, t: usize) -> Option<&Distribution> {
        self.averaged_distributions
            .iter()
            .find(|(step, _)| *step == t)
            .map(|(_, d)| d)
    }

    /// Summary of a single explicit coin map (no averaging). Useful for
    /// forced configurations that the seeded generator would never produce.
    pub fn from_single_map(
        map: &CoinMap,
        recorded_steps: &[usize],
    ) -> Result<EnsembleSummary, EnsembleError> {
        let recorded = evolve_map(map, recorded_steps)?;
        let variance_series = recorded
            .iter()
            .map(|(t, d)| Ok((*t as f64, variance(d)?)))
            .collect::<Result<Vec<_>, EnsembleError>>()?;
        let prov = map.provenance();
        Ok(EnsembleSummary {
            spec: DisorderSpec::new(
                prov.p,
                1,
                map.steps(),
                recorded_steps.to_vec(),
                prov.master_seed,
            )?,
            averaged_distributions: recorded,
            variance_series,
            maps_completed: 1,
        })
    }
}

fn label_index(label: CoinLabel) -> usize {
    match label {
        CoinLabel::Identity => 0,
        CoinLabel::Balanced => 1,
        CoinLabel::Reflection => 2,
    }
}

/// Evolve a walker from `|x=0, coin 0⟩` under one coin map, returning the
/// position distribution at each requested step.
pub fn evolve_map(
    map: &CoinMap,
    recorded_steps: &[usize],
) -> Result<Vec<(usize, Distribution)>, EnsembleError> {
    let table: [CoinOperator; 3] = [
        CoinLabel::Identity.operator(),
        CoinLabel::Balanced.operator(),
        CoinLabel::Reflection.operator(),
    ];
    let half_width = map.half_width();
    let width = 2 * half_width + 1;
    let mut state = WalkerState::new(half_width);
    let mut row = Vec::with_capacity(width);
    let mut recorded = Vec::with_capacity(recorded_steps.len());
    for t in 1..=map.steps() {
        row.clear();
        row.extend((0..width).map(|i| table[label_index(map.labels()[(t - 1) * width + i])]));
        state.step(&row)?;
        if recorded_steps.contains(&t) {
            recorded.push((t, state.probability_distribution(false)));
        }
    }
    recorded.sort_by_key(|(t, _)| *t);
    Ok(recorded)
}

/// Kahan-compensated accumulator for one probability vector.
struct Accumulator {
    sum: Vec<f64>,
    carry: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator {
            sum: vec![0.0; len],
            carry: vec![0.0; len],
        }
    }

    fn add(&mut self, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            let y = v - self.carry[i];
            let t = self.sum[i] + y;
            self.carry[i] = (t - self.sum[i]) - y;
            self.sum[i] = t;
        }
    }

    fn into_mean(self, n: usize) -> Vec<f64> {
        self.sum.into_iter().map(|s| s / n as f64).collect()
    }
}

/// Run the full ensemble for `spec`: generate each map from
/// `(master_seed, map_index)`, evolve it, and average the recorded
/// distributions pointwise over maps.
pub fn run_ensemble(spec: &DisorderSpec) -> Result<EnsembleSummary, EnsembleError> {
    spec.validate()?;
    let mut recorded_steps = spec.recorded_steps.clone();
    recorded_steps.sort_unstable();
    recorded_steps.dedup();
    let half_width = spec.steps;
    let width = 2 * half_width + 1;

    let per_map: Vec<Vec<Vec<f64>>> = (0..spec.maps as u64)
        .into_par_iter()
        .map(|index| {
            let map = CoinMap::generate(
                spec.master_seed,
                index,
                spec.p,
                half_width,
                spec.steps,
                spec.resample,
            )?;
            let recorded = evolve_map(&map, &recorded_steps)?;
            Ok(recorded
                .into_iter()
                .map(|(_, d)| d.probs().to_vec())
                .collect())
        })
        .collect::<Result<_, EnsembleError>>()?;

    let mut accumulators: Vec<Accumulator> = recorded_steps
        .iter()
        .map(|_| Accumulator::new(width))
        .collect();
    for map_result in &per_map {
        for (acc, probs) in accumulators.iter_mut().zip(map_result) {
            acc.add(probs);
        }
    }

    let averaged_distributions = recorded_steps
        .iter()
        .zip(accumulators)
        .map(|(&t, acc)| {
            let probs = acc.into_mean(spec.maps);
            Ok((t, Distribution::from_probs(half_width, probs)?))
        })
        .collect::<Result<Vec<_>, EnsembleError>>()?;

    let variance_series = averaged_distributions
        .iter()
        .map(|(t, d)| Ok((*t as f64, variance(d)?)))
        .collect::<Result<Vec<_>, EnsembleError>>()?;

    Ok(EnsembleSummary {
        spec: spec.clone(),
        averaged_distributions,
        variance_series,
        maps_completed: spec.maps,
    })
}

fn check_normalized(dist: &Distribution) -> Result<(), EnsembleError> {
    let sum = dist.total();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(EnsembleError::Unnormalized { sum });
    }
    Ok(())
}

/// Central second moment `Σ x²P(x) - (Σ xP(x))²`.
pub fn variance(dist: &Distribution) -> Result<f64, EnsembleError> {
    check_normalized(dist)?;
    let mean: f64 = dist.iter().map(|(x, p)| x as f64 * p).sum();
    let second: f64 = dist.iter().map(|(x, p)| (x as f64) * (x as f64) * p).sum();
    Ok(second - mean * mean)
}

/// Central moment `Σ (x - mean)^{2n} P(x)` for `n ∈ {1, 2, 3}`.
pub fn even_central_moment(dist: &Distribution, n: u32) -> Result<f64, EnsembleError> {
    if !(1..=3).contains(&n) {
        return Err(EnsembleError::BadMomentOrder(n));
    }
    check_normalized(dist)?;
    let mean: f64 = dist.iter().map(|(x, p)| x as f64 * p).sum();
    Ok(dist
        .iter()
        .map(|(x, p)| (x as f64 - mean).powi(2 * n as i32) * p)
        .sum())
}

/// Bhattacharyya coefficient `Σ sqrt(P(x)·Q(x))`, 1 for identical
/// distributions and 0 for disjoint supports.
pub fn similarity(p: &Distribution, q: &Distribution) -> Result<f64, EnsembleError> {
    if p.half_width() != q.half_width() {
        return Err(EnsembleError::GridMismatch(
            2 * p.half_width() + 1,
            2 * q.half_width() + 1,
        ));
    }
    check_normalized(p)?;
    check_normalized(q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(&a, &b)| (a * b).sqrt())
        .sum())
}

/// Integer detection counts per position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountHistogram {
    half_width: usize,
    counts: Vec<u64>,
    total_events: u64,
}

impl CountHistogram {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }

    pub fn count(&self, x: i64) -> u64 {
        self.counts[(x + self.half_width as i64) as usize]
    }

    /// Empirical frequencies; all-zero for an empty histogram.
    pub fn frequencies(&self) -> Vec<f64> {
        if self.total_events == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total_events as f64)
            .collect()
    }
}

/// Draw `events` independent detections from `dist` (multinomial sampling),
/// emulating Poissonian counting statistics.
pub fn sample_counts(dist: &Distribution, events: u64, seed: u64) -> CountHistogram {
    let mut cumulative = Vec::with_capacity(dist.probs().len());
    let mut running = 0.0;
    for &p in dist.probs() {
        running += p;
        cumulative.push(running);
    }
    let stream = Stream::new(seed);
    let mut counts = vec![0u64; dist.probs().len()];
    let last = counts.len() - 1;
    for e in 0..events {
        let u = stream.unit_f64(e) * running;
        let bin = cumulative.partition_point(|&c| c <= u);
        counts[bin.min(last)] += 1;
    }
    CountHistogram {
        half_width: dist.half_width(),
        counts,
        total_events: events,
    }
}
