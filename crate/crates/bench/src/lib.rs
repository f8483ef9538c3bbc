//! Fixtures shared by the benchmarks.

use wdrcc::experiments::{gen_portfolio, gen_transportation, ExperimentConfig};
use wdrcc::ChanceProgram;

/// Transportation instance with `samples` demand scenarios at radius `theta`.
pub fn transport(samples: usize, theta: f64) -> ChanceProgram {
    let mut cfg = ExperimentConfig::transport_desk(7);
    cfg.samples = samples;
    gen_transportation(&cfg, cfg.instance_seed(0)).unwrap().program.with_radius(theta).unwrap()
}

/// Portfolio instance with `samples` return scenarios.
pub fn portfolio(samples: usize) -> ChanceProgram {
    let mut cfg = ExperimentConfig::portfolio_desk(7);
    cfg.samples = samples;
    gen_portfolio(&cfg, cfg.instance_seed(0)).unwrap().program
}
