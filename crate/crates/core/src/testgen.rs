//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::channel::{conditions_hold, ChannelMatrix};
use crate::rational::{ratio, Rational};

pub fn sixteenths(max: i64) -> impl Strategy<Value = Rational> {
    (0..=max).prop_map(|n| ratio(n, 16))
}

pub fn channel(max: i64) -> impl Strategy<Value = ChannelMatrix> {
    proptest::collection::vec(sixteenths(max), 9)
        .prop_map(|v| ChannelMatrix::new(v.chunks(3).map(|c| c.to_vec()).collect()).unwrap())
}

fn assemble(diag: &[i64], cross: &[i64], clamp: bool) -> ChannelMatrix {
    let mut it = cross.iter();
    let rows = (0..3)
        .map(|k| {
            (0..3)
                .map(|m| {
                    if k == m {
                        return ratio(diag[k], 16);
                    }
                    let c = *it.next().expect("six cross entries");
                    ratio(if clamp { c.min(diag[k]).min(diag[m]) } else { c }, 16)
                })
                .collect()
        })
        .collect();
    ChannelMatrix::new(rows).unwrap()
}

/// Three-user channels meeting the SLS conditions with the identity antenna
/// order; half are drawn near the boundary of the conditions.
pub fn conforming_channel() -> impl Strategy<Value = ChannelMatrix> {
    let safe = (proptest::collection::vec(16i64..=32, 3), proptest::collection::vec(0i64..=8, 6))
        .prop_map(|(d, c)| assemble(&d, &c, false));
    let edge = (proptest::collection::vec(0i64..=24, 3), proptest::collection::vec(0i64..=24, 6))
        .prop_map(|(d, c)| assemble(&d, &c, true))
        .prop_filter("SLS conditions", conditions_hold);
    prop_oneof![safe, edge]
}
