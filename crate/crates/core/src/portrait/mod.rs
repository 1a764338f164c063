//! Phase-plane geometry for the reduced model: nullclines, classified
//! equilibria, saddle separatrices and a grid of trajectories.

mod svg;

pub use svg::{render_svg, SvgStyle};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibria::{ContinuumLine, Equilibrium};
use crate::integrator::{
    integrate, integrate_until, IntegrateError, IntegratorOptions, ReducedSystem, Reversed, TerminalReason, Trajectory,
};
use crate::model::{LVCoefficients, ReducedState};
use crate::stability::{classify_equilibria, ClassifiedEquilibrium, StabilityClass, DEFAULT_HYPERBOLIC_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PortraitError {
    #[error("window has zero or negative extent: {0:?}")]
    EmptyWindow(Window),
    #[error("equilibrium at ({}, {}) is not a saddle", .0.d1, .0.d2)]
    NotASaddle(ReducedState),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Rectangle `[d1.0, d1.1] x [d2.0, d2.1]` in persons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub d1: (f64, f64),
    pub d2: (f64, f64),
}

impl Window {
    pub fn new(d1: (f64, f64), d2: (f64, f64)) -> Self {
        Self { d1, d2 }
    }

    /// `[0, n]^2`.
    pub fn square(n: f64) -> Self {
        Self::new((0.0, n), (0.0, n))
    }

    pub fn width(&self) -> f64 {
        self.d1.1 - self.d1.0
    }

    pub fn height(&self) -> f64 {
        self.d2.1 - self.d2.0
    }

    pub fn check(&self) -> Result<(), PortraitError> {
        let ok = [self.d1.0, self.d1.1, self.d2.0, self.d2.1].iter().all(|v| v.is_finite())
            && self.width() > 0.0
            && self.height() > 0.0;
        if ok {
            Ok(())
        } else {
            Err(PortraitError::EmptyWindow(*self))
        }
    }

    pub fn contains(&self, p: [f64; 2], slack: f64) -> bool {
        p[0] >= self.d1.0 - slack && p[0] <= self.d1.1 + slack && p[1] >= self.d2.0 - slack && p[1] <= self.d2.1 + slack
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new((self.d1.0 * k, self.d1.1 * k), (self.d2.0 * k, self.d2.1 * k))
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.d1.0 + self.d1.1), 0.5 * (self.d2.0 + self.d2.1)]
    }

    /// Clips the line `a x + b y = c` to the window. `None` if it misses or
    /// only touches a corner.
    pub fn clip_line(&self, a: f64, b: f64, c: f64) -> Option<[[f64; 2]; 2]> {
        let mut hits: Vec<[f64; 2]> = Vec::with_capacity(4);
        let tol = 1e-12 * self.width().max(self.height());
        if b != 0.0 {
            for x in [self.d1.0, self.d1.1] {
                hits.push([x, (c - a * x) / b]);
            }
        }
        if a != 0.0 {
            for y in [self.d2.0, self.d2.1] {
                hits.push([(c - b * y) / a, y]);
            }
        }
        hits.retain(|p| self.contains(*p, tol));
        // Order along the line direction (-b, a) and take the extremes.
        let along = |p: &[f64; 2]| -b * p[0] + a * p[1];
        hits.sort_by(|p, q| along(p).total_cmp(&along(q)));
        let (first, last) = (*hits.first()?, *hits.last()?);
        if (first[0] - last[0]).hypot(first[1] - last[1]) <= tol {
            return None;
        }
        Some([first, last])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullclineKind {
    /// `d1 = 0`, where `dD1/dt` vanishes on the axis.
    D1Axis,
    /// `d2 = 0`.
    D2Axis,
    /// `a11 d1 + a12 d2 = r1 N`.
    D1Interior,
    /// `a21 d1 + a22 d2 = r2 N`.
    D2Interior,
}

impl NullclineKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::D1Axis => "D1-axis",
            Self::D2Axis => "D2-axis",
            Self::D1Interior => "D1-interior",
            Self::D2Interior => "D2-interior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nullcline {
    pub kind: NullclineKind,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// Nullcline segments clipped to `window`, plus notes on omitted lines.
pub fn nullclines(c: &LVCoefficients, window: &Window) -> (Vec<Nullcline>, Vec<String>) {
    let n = c.n_total;
    let lines = [
        (NullclineKind::D1Axis, 1.0, 0.0, 0.0),
        (NullclineKind::D2Axis, 0.0, 1.0, 0.0),
        (NullclineKind::D1Interior, c.a11, c.a12, c.r1 * n),
        (NullclineKind::D2Interior, c.a21, c.a22, c.r2 * n),
    ];
    let mut out = Vec::with_capacity(4);
    let mut notes = Vec::new();
    for (kind, a, b, rhs) in lines {
        if a == 0.0 && b == 0.0 {
            notes.push(format!("{} nullcline omitted: both competition coefficients are zero", kind.label()));
            continue;
        }
        match window.clip_line(a, b, rhs) {
            Some([start, end]) => out.push(Nullcline { kind, start, end }),
            None => notes.push(format!("{} nullcline lies outside the window", kind.label())),
        }
    }
    (out, notes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Manifold {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separatrix {
    pub saddle: ReducedState,
    pub manifold: Manifold,
    /// Which way along the eigenvector the branch was seeded (+1 or -1).
    pub sign: i8,
    /// Ordered away from the saddle.
    pub points: Vec<[f64; 2]>,
    pub terminal_reason: TerminalReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixOptions {
    /// Seed offset from the saddle, relative to N.
    pub epsilon: f64,
    pub integrator: IntegratorOptions,
}

impl SeparatrixOptions {
    pub fn for_population(n_total: f64) -> Self {
        Self { epsilon: 1e-4, integrator: IntegratorOptions::for_population(n_total).with_t_max(1000.0) }
    }
}

/// The four half-branches of a saddle's stable and unstable manifolds.
///
/// Unstable branches are integrated forward, stable branches backward, until
/// they leave the window or converge. Seeds outside the window are skipped.
pub fn separatrices(
    c: &LVCoefficients,
    saddle: &ClassifiedEquilibrium,
    window: &Window,
    opts: &SeparatrixOptions,
) -> Result<(Vec<Separatrix>, Vec<String>), PortraitError> {
    let report = &saddle.stability;
    let at = saddle.equilibrium.location;
    let not_saddle = || PortraitError::NotASaddle(at);
    if report.class != StabilityClass::Saddle || report.eigen.vectors.len() != 2 {
        return Err(not_saddle());
    }
    window.check()?;
    let values = report.eigen.values;
    let (stable, unstable) = if values[0].re < 0.0 { (0, 1) } else { (1, 0) };

    let span = window.width().max(window.height());
    let margin = 1e-3 * span;
    let seed_slack = 1e-12 * span;
    let eps = opts.epsilon * c.n_total;
    let outside = |x: &[f64; 2]| !window.contains(*x, margin);
    let system = ReducedSystem(*c);

    let mut out = Vec::with_capacity(4);
    let mut notes = Vec::new();
    for (manifold, idx) in [(Manifold::Unstable, unstable), (Manifold::Stable, stable)] {
        let v = report.eigen.vectors[idx];
        for sign in [1i8, -1] {
            let s = f64::from(sign);
            let seed = [at.d1 + s * eps * v[0], at.d2 + s * eps * v[1]];
            if !window.contains(seed, seed_slack) || seed.iter().any(|x| *x < 0.0) {
                notes.push(format!(
                    "{manifold:?} branch ({sign:+}) at ({:.3}, {:.3}) starts outside the window",
                    at.d1, at.d2
                ));
                continue;
            }
            let traj = match manifold {
                Manifold::Unstable => integrate_until(&system, seed, &opts.integrator, outside)?,
                Manifold::Stable => integrate_until(&Reversed(system), seed, &opts.integrator, outside)?,
            };
            let mut points = vec![at.to_array()];
            points.extend(traj.samples.iter().map(|s| s.x));
            out.push(Separatrix { saddle: at, manifold, sign, points, terminal_reason: traj.terminal_reason });
        }
    }
    Ok((out, notes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridLayout {
    /// Cell centres: `min + (k + 1/2) w / m`; never on the window edge.
    #[default]
    CellCentered,
    /// Evenly spaced including both edges (the centre when `m = 1`).
    Inclusive,
}

pub fn grid_points(window: &Window, m: usize, layout: GridLayout) -> Vec<[f64; 2]> {
    let coord = |lo: f64, hi: f64, k: usize| match layout {
        GridLayout::CellCentered => lo + (k as f64 + 0.5) * (hi - lo) / m as f64,
        GridLayout::Inclusive if m == 1 => 0.5 * (lo + hi),
        GridLayout::Inclusive => lo + k as f64 * (hi - lo) / (m - 1) as f64,
    };
    // Row-major: d2 rows, d1 varies fastest.
    (0..m)
        .flat_map(|row| {
            (0..m).map(move |col| [coord(window.d1.0, window.d1.1, col), coord(window.d2.0, window.d2.1, row)])
        })
        .collect()
}

/// Integrates the reduced system from every grid point.
///
/// Step failures stay inside the individual trajectories; only invalid
/// options or an empty grid abort the bundle.
pub fn trajectory_bundle(
    c: &LVCoefficients,
    window: &Window,
    m: usize,
    layout: GridLayout,
    opts: &IntegratorOptions,
) -> Result<Vec<Trajectory<2>>, PortraitError> {
    window.check()?;
    if m == 0 {
        return Err(IntegrateError::InvalidOptions("grid size must be at least 1".into()).into());
    }
    opts.validate()?;
    let system = ReducedSystem(*c);
    grid_points(window, m, layout)
        .par_iter()
        .map(|x0| {
            let x0 = x0.map(|v| v.max(0.0));
            integrate(&system, x0, opts).map_err(PortraitError::from)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitOptions {
    pub grid: usize,
    pub layout: GridLayout,
    pub integrator: IntegratorOptions,
    pub separatrix: SeparatrixOptions,
    pub hyperbolic_tol: f64,
}

impl PortraitOptions {
    pub fn for_population(n_total: f64) -> Self {
        Self {
            grid: 5,
            layout: GridLayout::CellCentered,
            integrator: IntegratorOptions::for_population(n_total).with_t_max(500.0),
            separatrix: SeparatrixOptions::for_population(n_total),
            hyperbolic_tol: DEFAULT_HYPERBOLIC_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePortrait {
    pub window: Window,
    pub coefficients: LVCoefficients,
    pub nullclines: Vec<Nullcline>,
    pub equilibria: Vec<ClassifiedEquilibrium>,
    pub continuum: Option<ContinuumLine>,
    pub separatrices: Vec<Separatrix>,
    pub trajectories: Vec<Trajectory<2>>,
    pub notes: Vec<String>,
}

impl PhasePortrait {
    /// Equilibria that get a marker: feasible, inside the window and not on
    /// a continuum of equilibria.
    pub fn marked_equilibria(&self) -> impl Iterator<Item = &ClassifiedEquilibrium> {
        let slack = 1e-9 * self.coefficients.n_total;
        self.equilibria.iter().filter(move |e| {
            let p = e.equilibrium.location;
            e.equilibrium.feasible
                && self.window.contains(p.to_array(), slack)
                && self.continuum.is_none_or(|line| line.distance(p) > slack)
        })
    }
}

fn is_feasible_saddle(e: &ClassifiedEquilibrium) -> bool {
    e.equilibrium.feasible && e.stability.class == StabilityClass::Saddle
}

pub fn build_portrait(
    c: &LVCoefficients,
    window: &Window,
    opts: &PortraitOptions,
) -> Result<PhasePortrait, PortraitError> {
    window.check()?;
    let set = classify_equilibria(c, opts.hyperbolic_tol);
    let (nullclines, mut notes) = nullclines(c, window);

    let mut separatrix_list = Vec::new();
    for saddle in set.points.iter().filter(|e| is_feasible_saddle(e)) {
        let (branches, more) = separatrices(c, saddle, window, &opts.separatrix)?;
        separatrix_list.extend(branches);
        notes.extend(more);
    }
    let trajectories = if opts.grid > 0 {
        trajectory_bundle(c, window, opts.grid, opts.layout, &opts.integrator)?
    } else {
        Vec::new()
    };
    if set.degenerate() {
        notes.push("interior system is singular: a continuum of equilibria".into());
    }
    Ok(PhasePortrait {
        window: *window,
        coefficients: *c,
        nullclines,
        equilibria: set.points,
        continuum: set.continuum,
        separatrices: separatrix_list,
        trajectories,
        notes,
    })
}

/// Equilibrium plus stability for a single point, for callers that build
/// saddles by hand.
pub fn classified(c: &LVCoefficients, e: Equilibrium, tol: f64) -> ClassifiedEquilibrium {
    ClassifiedEquilibrium { equilibrium: e, stability: crate::stability::stability_at(c, e.location, tol) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::EquilibriumKind;
    use crate::model::{reduced_coefficients, ModelParameters};

    fn baseline() -> LVCoefficients {
        reduced_coefficients(&ModelParameters::baseline().validate().unwrap())
    }

    fn find(set: &[Nullcline], kind: NullclineKind) -> Nullcline {
        *set.iter().find(|n| n.kind == kind).unwrap()
    }

    fn has_endpoint(n: &Nullcline, p: [f64; 2], tol: f64) -> bool {
        [n.start, n.end].iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) < tol)
    }

    #[test]
    fn baseline_nullcline_intercepts() {
        let (lines, notes) = nullclines(&baseline(), &Window::square(1e4));
        assert_eq!(lines.len(), 4);
        assert!(notes.is_empty());
        let d1 = find(&lines, NullclineKind::D1Interior);
        assert!(has_endpoint(&d1, [5757.576, 0.0], 1e-3));
        assert!(has_endpoint(&d1, [0.0, 4418.605], 1e-3));
        let d2 = find(&lines, NullclineKind::D2Interior);
        assert!(has_endpoint(&d2, [8666.667, 0.0], 1e-3));
        assert!(has_endpoint(&d2, [0.0, 7090.909], 1e-3));
        let axis = find(&lines, NullclineKind::D1Axis);
        assert_eq!((axis.start, axis.end), ([0.0, 0.0], [0.0, 1e4]));
    }

    #[test]
    fn zero_growth_nullcline_through_origin() {
        let c = LVCoefficients { r1: 0.0, ..baseline() };
        let (lines, _) = nullclines(&c, &Window::new((-1e4, 1e4), (-1e4, 1e4)));
        let d1 = find(&lines, NullclineKind::D1Interior);
        // The origin lies on the segment: its endpoints are opposite multiples of one direction.
        let cross = d1.start[0] * d1.end[1] - d1.start[1] * d1.end[0];
        let dot = d1.start[0] * d1.end[0] + d1.start[1] * d1.end[1];
        assert!(cross.abs() < 1e-6 && dot < 0.0);
        // In the nonnegative quadrant the line only touches the corner.
        let (lines, notes) = nullclines(&c, &Window::square(1e4));
        assert!(lines.iter().all(|l| l.kind != NullclineKind::D1Interior));
        assert_eq!(notes.len(), 1);
    }

    #[test]
    fn degenerate_nullcline_omitted_with_note() {
        let c = LVCoefficients { a11: 0.0, a12: 0.0, ..baseline() };
        let (lines, notes) = nullclines(&c, &Window::square(1e4));
        assert_eq!(lines.len(), 3);
        assert_eq!(notes.len(), 1);
    }

    #[test]
    fn empty_window_rejected() {
        let w = Window::square(0.0);
        assert!(matches!(w.check(), Err(PortraitError::EmptyWindow(_))));
        let opts = PortraitOptions::for_population(1e4);
        assert!(build_portrait(&baseline(), &w, &opts).is_err());
    }

    #[test]
    fn origin_is_not_a_saddle() {
        let c = baseline();
        let set = classify_equilibria(&c, DEFAULT_HYPERBOLIC_TOL);
        let origin = set.points.iter().find(|e| e.equilibrium.kind == EquilibriumKind::Origin);
        let err = separatrices(&c, origin.unwrap(), &Window::square(1e4), &SeparatrixOptions::for_population(1e4));
        assert!(matches!(err, Err(PortraitError::NotASaddle(_))));
    }

    #[test]
    fn baseline_separatrices() {
        let c = baseline();
        let set = classify_equilibria(&c, DEFAULT_HYPERBOLIC_TOL);
        let saddle = set.points.iter().find(|e| e.equilibrium.kind == EquilibriumKind::Axis1).unwrap();
        let (branches, notes) =
            separatrices(&c, saddle, &Window::square(1e4), &SeparatrixOptions::for_population(1e4)).unwrap();
        // One unstable seed points into d2 < 0.
        assert_eq!(branches.len(), 3);
        assert_eq!(notes.len(), 1);
        let unstable = branches.iter().find(|b| b.manifold == Manifold::Unstable).unwrap();
        let end = unstable.points.last().unwrap();
        assert!(end[0].hypot(end[1] - 7090.909) < 1.0, "{end:?}");
        for b in branches.iter().filter(|b| b.manifold == Manifold::Stable) {
            assert!(b.points.iter().all(|p| p[1] == 0.0));
        }
    }

    #[test]
    fn grid_layouts() {
        let w = Window::square(10.0);
        assert_eq!(grid_points(&w, 1, GridLayout::CellCentered), vec![[5.0, 5.0]]);
        assert_eq!(grid_points(&w, 1, GridLayout::Inclusive), vec![[5.0, 5.0]]);
        let g = grid_points(&w, 2, GridLayout::Inclusive);
        assert_eq!(g, vec![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]);
        let g = grid_points(&w, 5, GridLayout::CellCentered);
        assert_eq!(g.len(), 25);
        assert_eq!(g[1], [3.0, 1.0]);
    }

    #[test]
    fn single_centre_trajectory_reaches_stable_node() {
        let c = baseline();
        let opts = IntegratorOptions::for_population(1e4).with_t_max(500.0);
        let b = trajectory_bundle(&c, &Window::square(1e4), 1, GridLayout::CellCentered, &opts).unwrap();
        assert_eq!(b.len(), 1);
        let end = b[0].final_state();
        assert!(end[0].hypot(end[1] - 7090.909) < 1.0);
    }

    #[test]
    fn clip_misses_window() {
        let w = Window::square(1.0);
        assert!(w.clip_line(1.0, 1.0, 5.0).is_none());
        assert!(w.clip_line(1.0, 1.0, 2.0).is_none()); // touches a corner only
        let seg = w.clip_line(1.0, 1.0, 1.0).unwrap();
        assert!(seg.contains(&[0.0, 1.0]) && seg.contains(&[1.0, 0.0]));
    }
}
