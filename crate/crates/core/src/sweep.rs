//! Data-parallel batch work: many scenario runs, coverage grids and
//! Monte Carlo loss estimates. Each work item owns a named RNG stream, so
//! results do not depend on thread count or scheduling.

use crate::exec::Strategy;
use crate::radio::{rssi_dbm, Delivery, LinkModel};
use crate::rng::RngStream;
use crate::scenario::Scenario;
use crate::sim::{run, RunOptions, RunOutput, SimError};

/// Draws per Monte Carlo chunk; chunk `i` uses stream `<id>.<i>`.
pub const CHUNK: usize = 4096;

pub fn run_batch(scenarios: &[Scenario], opts: RunOptions, strategy: Strategy) -> Vec<Result<RunOutput, SimError>> {
    strategy.map(scenarios, |sc| run(sc, opts))
}

/// The same scenario under each seed.
pub fn seed_sweep(sc: &Scenario, seeds: &[u64], opts: RunOptions, strategy: Strategy) -> Vec<Result<RunOutput, SimError>> {
    let variants: Vec<Scenario> = seeds.iter().map(|&seed| Scenario { seed, ..sc.clone() }).collect();
    run_batch(&variants, opts, strategy)
}

/// Fraction of `draws` transmissions at distance `d` that are lost.
pub fn empirical_loss(model: &LinkModel, d: f64, draws: usize, seed: u64, stream: &str, strategy: Strategy) -> f64 {
    if draws == 0 {
        return 0.0;
    }
    let chunks: Vec<(usize, usize)> = (0..draws.div_ceil(CHUNK)).map(|i| (i, CHUNK.min(draws - i * CHUNK))).collect();
    let lost: usize = strategy
        .map(&chunks, |&(i, n)| {
            let mut loss = RngStream::new(seed, format!("{stream}.{i}.loss"));
            let mut lat = RngStream::new(seed, format!("{stream}.{i}.latency"));
            (0..n)
                .filter(|_| model.sample_delivery(d, &model.latency, &mut loss, &mut lat) == Delivery::Lost)
                .count()
        })
        .into_iter()
        .sum();
    lost as f64 / draws as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub rsu: String,
    pub distance: f64,
    pub rssi_dbm: f64,
    pub p_loss: f64,
    pub empirical_loss: f64,
}

/// Loss and signal strength against distance for every RSU of a scenario,
/// out to its nominal range in `step_m` increments.
pub fn coverage(sc: &Scenario, step_m: f64, draws: usize, strategy: Strategy) -> Vec<CoverageRow> {
    let mut grid = Vec::new();
    for spec in &sc.rsus {
        let model = sc.access_model(spec);
        let reach = model.range.unwrap_or(0.0);
        let n = (reach / step_m).floor() as usize;
        for i in 0..=n {
            grid.push((spec.id.clone(), model.clone(), i, i as f64 * step_m));
        }
    }
    // the grid is small; the draws inside each point carry the work
    Strategy::Sequential.map(&grid, |(rsu, model, i, d)| CoverageRow {
        rsu: rsu.clone(),
        distance: *d,
        rssi_dbm: rssi_dbm(*d, &sc.rssi),
        p_loss: model.p_loss(*d),
        empirical_loss: empirical_loss(model, *d, draws, sc.seed, &format!("coverage.{rsu}.{i}"), strategy),
    })
}
