//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use fspde_core::fraccalc::TimeGrid;
use fspde_core::levy::{JumpLaw, LevySpec};
use fspde_core::params::ProblemParams;
use fspde_core::solver::{Noise, ProblemData};
use fspde_core::torus::{Field, TorusGrid};

/// One-dimensional linear problem with Wiener and jump noise.
pub struct LinearCase {
    pub params: ProblemParams,
    pub grid: TorusGrid,
    pub time: TimeGrid,
    pub data: ProblemData,
    pub noise: Noise,
}

pub fn linear_case(n: usize, steps: usize) -> LinearCase {
    let grid = TorusGrid::new(1, n, 2.0 * PI).expect("valid grid");
    let time = TimeGrid::new(1.0, steps).expect("valid time grid");
    let params = ProblemParams::new(0.8, 0.6, 0.7, 2.0).expect("admissible");
    let u0 = Field::from_fn(grid, |x| x[0].cos());
    let g = Field::from_fn(grid, |x| (2.0 * x[0]).sin());
    let h = Field::from_fn(grid, |x| 1.0 + 0.5 * (3.0 * x[0]).cos());
    let data = ProblemData {
        u0,
        v0: None,
        f: None,
        g: vec![std::sync::Arc::new(move |_| g.clone())],
        h: vec![vec![std::sync::Arc::new(move |_| h.clone())]],
    };
    let levy = LevySpec::new(4.0, JumpLaw::TwoPoint, 1.0, 1, 1).expect("valid law");
    let noise = Noise::sample(time, 1, Some(&levy), 1).expect("noise");
    LinearCase { params, grid, time, data, noise }
}
