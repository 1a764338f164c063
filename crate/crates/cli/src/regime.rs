//! Qualitative outcome of the competition, read off the stable feasible equilibria.

use std::fmt;

use serde::{Deserialize, Serialize};
use twodrug::{ClassifiedSet, EquilibriumKind, StabilityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeClass {
    Extinction,
    Exclusion1,
    Exclusion2,
    BistableExclusion,
    Coexistence,
    Degenerate,
    NonHyperbolicBoundary,
    /// No feasible equilibrium is stable.
    NoFeasibleAttractor,
    /// Sweep cell whose parameters failed validation.
    Invalid,
}

impl RegimeClass {
    pub const ALL: [RegimeClass; 9] = [
        Self::Extinction,
        Self::Exclusion1,
        Self::Exclusion2,
        Self::BistableExclusion,
        Self::Coexistence,
        Self::Degenerate,
        Self::NonHyperbolicBoundary,
        Self::NoFeasibleAttractor,
        Self::Invalid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Extinction => "Extinction",
            Self::Exclusion1 => "Exclusion1",
            Self::Exclusion2 => "Exclusion2",
            Self::BistableExclusion => "BistableExclusion",
            Self::Coexistence => "Coexistence",
            Self::Degenerate => "Degenerate",
            Self::NonHyperbolicBoundary => "NonHyperbolicBoundary",
            Self::NoFeasibleAttractor => "NoFeasibleAttractor",
            Self::Invalid => "Invalid",
        }
    }
}

impl fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kinds of the feasible equilibria that are linearly stable, in set order.
pub fn stable_kinds(set: &ClassifiedSet) -> Vec<EquilibriumKind> {
    set.feasible().filter(|p| p.stability.class.is_stable()).map(|p| p.equilibrium.kind).collect()
}

/// Checks run in order: continuum, non-hyperbolic feasible point, stable
/// interior point, then the stable boundary points.
pub fn regime_of(set: &ClassifiedSet) -> RegimeClass {
    use EquilibriumKind::*;
    if set.degenerate() {
        return RegimeClass::Degenerate;
    }
    if set.feasible().any(|p| !p.stability.hyperbolic || p.stability.class == StabilityClass::Center) {
        return RegimeClass::NonHyperbolicBoundary;
    }
    let stable = stable_kinds(set);
    if stable.contains(&Interior) {
        return RegimeClass::Coexistence;
    }
    match (stable.contains(&Origin), stable.contains(&Axis1), stable.contains(&Axis2)) {
        // A stable origin needs r1, r2 < 0, which keeps both axis points infeasible.
        (true, _, _) => RegimeClass::Extinction,
        (false, true, true) => RegimeClass::BistableExclusion,
        (false, true, false) => RegimeClass::Exclusion1,
        (false, false, true) => RegimeClass::Exclusion2,
        (false, false, false) => RegimeClass::NoFeasibleAttractor,
    }
}
