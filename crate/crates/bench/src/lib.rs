//! Shared workloads for the benchmarks.

use rabi2p::catqec::{stabilize_target, CodeCoefficients, ProtocolConfig, TargetState};
use rabi2p::liouvillian::{build_effective, parity_blocks, EffectiveParams, Superoperator};

/// Parity-blocked effective Liouvillian with the default truncation.
pub fn effective(g: f64, zeta: f64) -> Superoperator {
    let params = EffectiveParams::with_default_truncation(g, zeta).expect("valid parameters");
    parity_blocks(build_effective(&params).expect("builds")).expect("blocks")
}

/// Default protocol at `zeta` with its stationary cat target.
pub fn protocol(g_err: f64, zeta: f64) -> (ProtocolConfig, TargetState) {
    let config = ProtocolConfig::new(g_err, zeta);
    let target = stabilize_target(&config, CodeCoefficients::default()).expect("stationary target");
    (config, target)
}
