//! Shared fixtures for the criterion benches.

use rwn_core::neighborhoods::Backend;
use rwn_core::synth::clustered;
use rwn_core::{Dataset, DistanceSpec};

/// Clustered numeric data with `p` columns and its distance.
pub fn fixture(n: usize, p: usize) -> (Dataset, DistanceSpec) {
    let d = clustered(n, p, 0x5eed);
    let spec = DistanceSpec::from_dataset(&d);
    (d, spec)
}

/// The backends compared at each size, labelled for reports.
pub fn backends(m: usize, u: usize) -> Vec<(&'static str, Backend)> {
    vec![
        ("exact", Backend::Exact),
        (
            "pool",
            Backend::Pool {
                m,
                fresh_pool_per_point: false,
            },
        ),
        ("pair-sample", Backend::PairSample { m }),
        (
            "partitioned",
            Backend::Partitioned {
                u,
                inner: Box::new(Backend::Exact),
            },
        ),
    ]
}
