//! Shared inputs for the benchmarks.

use gdof_core::rational::parse_rational;
use gdof_core::sls::VertexSolver;
use gdof_core::{ChannelMatrix, SlsParams, SlsScheme};

pub fn sample() -> ChannelMatrix {
    ChannelMatrix::from_ratios(&[
        &[(6, 5), (11, 10), (9, 10)],
        &[(9, 10), (13, 10), (7, 10)],
        &[(7, 10), (9, 10), (1, 1)],
    ])
    .expect("valid channel")
}

pub fn sample_params() -> SlsParams {
    let r = |s| parse_rational(s).expect("literal");
    SlsParams::new(r("0.9"), r("0.2"), r("0"), r("0"))
}

/// The certified scheme for the corner `(1.2, 0.2, 0.1)` of the sample channel.
pub fn corner_scheme() -> SlsScheme {
    let solver = VertexSolver::new(&sample()).expect("three users");
    let v: Vec<_> = ["1.2", "0.2", "0.1"].iter().map(|s| parse_rational(s).expect("literal")).collect();
    let cert = solver.certify(&v).expect("solver").expect("corner is achievable");
    solver.scheme(&cert)
}
