//! Taylor-Hood convergence for linear mixed elasticity with an intact
//! phase field.

mod common;

use common::mms::rates;

#[test]
fn taylor_hood_rates_compressible() {
    let (ru, rp) = rates(0.3);
    eprintln!("u rates {ru:?}, p rates {rp:?}");
    assert!(ru.iter().all(|&r| r >= 2.7), "u rates {ru:?}");
    assert!(rp.iter().all(|&r| r >= 1.7), "p rates {rp:?}");
}

#[test]
fn taylor_hood_rates_nearly_incompressible() {
    let (ru, rp) = rates(0.4999);
    assert!(ru.iter().all(|&r| r >= 2.7), "u rates {ru:?}");
    assert!(rp.iter().all(|&r| r >= 1.7), "p rates {rp:?}");
}
