//! Fixtures shared by the benchmarks.

use hhalf_core::experiments::{make_initial_data, InitialDataSpec};
use hhalf_core::{Grid, SpectralVelocity};

/// Broadband random field with unit `Ḣ^{1/2}` norm on an `n³` grid.
pub fn random_field(n: usize) -> SpectralVelocity {
    let g = Grid::periodic(n).expect("valid grid size");
    make_initial_data(&InitialDataSpec::random(1.0, 7, -2.0), &g).expect("random data")
}

/// Taylor–Green vortex of unit amplitude on an `n³` grid.
pub fn taylor_green(n: usize) -> SpectralVelocity {
    let g = Grid::periodic(n).expect("valid grid size");
    make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).expect("taylor-green data")
}
