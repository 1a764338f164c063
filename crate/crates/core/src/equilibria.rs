//! Closed-form fixed points of the reduced system.

use serde::{Deserialize, Serialize};

use crate::model::{LVCoefficients, ReducedState};

/// Relative threshold on `|a11 a22 - a12 a21|` below which the interior
/// system is treated as singular.
pub const DET_EPS: f64 = 1e-12;

/// Points closer than `DEDUP_EPS * N` are considered the same equilibrium.
pub const DEDUP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Origin,
    Axis1,
    Axis2,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub location: ReducedState,
    /// Both components nonnegative and `d1 + d2 <= N`.
    pub feasible: bool,
    pub nonnegative: bool,
    pub within_population: bool,
}

impl Equilibrium {
    pub fn new(kind: EquilibriumKind, location: ReducedState, n_total: f64) -> Self {
        let slack = DEDUP_EPS * n_total;
        let nonnegative = location.d1 >= -slack && location.d2 >= -slack;
        let within_population = location.d1 + location.d2 <= n_total + slack;
        Self { kind, location, feasible: nonnegative && within_population, nonnegative, within_population }
    }
}

/// A line of equilibria `a d1 + b d2 = c`, or the whole plane when all three vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ContinuumLine {
    pub fn is_plane(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    /// Distance of a point from the line (zero everywhere for the plane case).
    pub fn distance(&self, p: ReducedState) -> f64 {
        if self.is_plane() {
            return 0.0;
        }
        (self.a * p.d1 + self.b * p.d2 - self.c).abs() / self.a.hypot(self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InteriorOutcome {
    Point(Equilibrium),
    NoInterior,
    DegenerateContinuum(ContinuumLine),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub points: Vec<Equilibrium>,
    /// Present when the interior system is singular but consistent.
    pub continuum: Option<ContinuumLine>,
}

impl EquilibriumSet {
    pub fn degenerate(&self) -> bool {
        self.continuum.is_some()
    }

    pub fn get(&self, kind: EquilibriumKind) -> Option<&Equilibrium> {
        self.points.iter().find(|e| e.kind == kind)
    }

    pub fn feasible(&self) -> impl Iterator<Item = &Equilibrium> {
        self.points.iter().filter(|e| e.feasible)
    }
}

/// Fixed points on the coordinate axes, omitted when the self-competition
/// coefficient vanishes (`beta_i = 0`).
pub fn axis_equilibria(c: &LVCoefficients) -> Vec<Equilibrium> {
    let n = c.n_total;
    let mut out = Vec::with_capacity(2);
    if c.a11 != 0.0 {
        out.push(Equilibrium::new(EquilibriumKind::Axis1, ReducedState::new(c.r1 * n / c.a11, 0.0), n));
    }
    if c.a22 != 0.0 {
        out.push(Equilibrium::new(EquilibriumKind::Axis2, ReducedState::new(0.0, c.r2 * n / c.a22), n));
    }
    out
}

/// Solves `a11 d1 + a12 d2 = r1 N`, `a21 d1 + a22 d2 = r2 N` by Cramer's rule.
pub fn interior_equilibrium(c: &LVCoefficients) -> InteriorOutcome {
    let n = c.n_total;
    let (b1, b2) = (c.r1 * n, c.r2 * n);
    let diag = c.a11 * c.a22;
    let cross = c.a12 * c.a21;
    let det = diag - cross;
    if det.abs() > DET_EPS * diag.abs().max(cross.abs()) {
        let d1 = (b1 * c.a22 - c.a12 * b2) / det;
        let d2 = (c.a11 * b2 - c.a21 * b1) / det;
        return InteriorOutcome::Point(Equilibrium::new(EquilibriumKind::Interior, ReducedState::new(d1, d2), n));
    }

    // Singular: consistent iff the augmented 2x3 matrix also has rank <= 1.
    let minor1 = (b1 * c.a22, c.a12 * b2);
    let minor2 = (c.a11 * b2, c.a21 * b1);
    let rank_one = |(x, y): (f64, f64)| (x - y).abs() <= DET_EPS * x.abs().max(y.abs());
    let row1_zero = c.a11 == 0.0 && c.a12 == 0.0;
    let row2_zero = c.a21 == 0.0 && c.a22 == 0.0;
    let consistent = rank_one(minor1) && rank_one(minor2) && !(row1_zero && b1 != 0.0) && !(row2_zero && b2 != 0.0);
    if !consistent {
        return InteriorOutcome::NoInterior;
    }
    let line = if !row1_zero {
        ContinuumLine { a: c.a11, b: c.a12, c: b1 }
    } else if !row2_zero {
        ContinuumLine { a: c.a21, b: c.a22, c: b2 }
    } else {
        ContinuumLine { a: 0.0, b: 0.0, c: 0.0 }
    };
    InteriorOutcome::DegenerateContinuum(line)
}

/// All fixed points, deduplicated with precedence Origin > Axis > Interior.
pub fn equilibria(c: &LVCoefficients) -> EquilibriumSet {
    let n = c.n_total;
    let mut points = vec![Equilibrium::new(EquilibriumKind::Origin, ReducedState::ORIGIN, n)];
    let mut continuum = None;
    let mut candidates = axis_equilibria(c);
    match interior_equilibrium(c) {
        InteriorOutcome::Point(e) => candidates.push(e),
        InteriorOutcome::NoInterior => {}
        InteriorOutcome::DegenerateContinuum(line) => continuum = Some(line),
    }
    let tol = DEDUP_EPS * n;
    for e in candidates {
        if points.iter().all(|p| p.location.distance(e.location) > tol) {
            points.push(e);
        }
    }
    EquilibriumSet { points, continuum }
}
