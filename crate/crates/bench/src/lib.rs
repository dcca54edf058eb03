//! Fixtures shared by the benchmarks.

use tapered_lp::{InnovationSpec, RegimeSpec, TailIndex};

/// Case defaults with standard Gaussian innovations.
pub fn gaussian(j: u8) -> RegimeSpec {
    RegimeSpec::defaults(j).expect("case defaults are valid")
}

/// Case defaults with Pareto innovations of index `alpha`.
pub fn pareto(j: u8, alpha: f64) -> RegimeSpec {
    let a = TailIndex::new(alpha).expect("valid tail index");
    gaussian(j).with_innovation(InnovationSpec::stable_pareto(a))
}
