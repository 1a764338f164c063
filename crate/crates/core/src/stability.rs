//! Jacobians, closed-form 2x2 eigen-decomposition and fixed-point classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibria, ContinuumLine, Equilibrium};
use crate::model::{theta, Drug, LVCoefficients, ReducedState, ValidatedParameters};

/// Default hyperbolicity tolerance, 1/year.
pub const DEFAULT_HYPERBOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
}

impl Jacobian2 {
    pub fn new(j11: f64, j12: f64, j21: f64, j22: f64) -> Self {
        Self { j11, j12, j21, j22 }
    }

    pub fn trace(&self) -> f64 {
        self.j11 + self.j22
    }

    pub fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.j11 * self.j11 + self.j12 * self.j12 + self.j21 * self.j21 + self.j22 * self.j22).sqrt()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.j11 * v[0] + self.j12 * v[1], self.j21 * v[0] + self.j22 * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        [self.j11, self.j12, self.j21, self.j22].iter().all(|x| x.is_finite())
    }
}

pub fn jacobian_at(c: &LVCoefficients, d: ReducedState) -> Jacobian2 {
    let n = c.n_total;
    Jacobian2 {
        j11: c.r1 - (2.0 * c.a11 * d.d1 + c.a12 * d.d2) / n,
        j12: -c.a12 * d.d1 / n,
        j21: -c.a21 * d.d2 / n,
        j22: c.r2 - (c.a21 * d.d1 + 2.0 * c.a22 * d.d2) / n,
    }
}

/// Eigenvalues and, where meaningful, unit eigenvectors of a 2x2 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigen2 {
    pub values: [Complex64; 2],
    /// Two directions for real distinct eigenvalues (in the order of
    /// `values`) or a scalar matrix, one for a defective matrix, none when
    /// the eigenvalues are complex.
    pub vectors: Vec<[f64; 2]>,
}

impl Eigen2 {
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }
}

/// Unit vector with its first nonzero component positive.
fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    let n = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -n } else { n };
    [v[0] / n + 0.0, v[1] / n + 0.0]
}

/// Null direction of `J - lambda I`, picking the better conditioned row.
fn eigenvector(j: &Jacobian2, lambda: f64) -> Option<[f64; 2]> {
    let from_row1 = [j.j12, lambda - j.j11];
    let from_row2 = [lambda - j.j22, j.j21];
    let n1 = from_row1[0].hypot(from_row1[1]);
    let n2 = from_row2[0].hypot(from_row2[1]);
    match (n1 > 0.0, n2 > 0.0) {
        (false, false) => None,
        _ if n1 >= n2 => Some(unit(from_row1)),
        _ => Some(unit(from_row2)),
    }
}

pub fn eigen2(j: &Jacobian2) -> Eigen2 {
    // Triangular: the diagonal, exactly.
    let (l1, l2) = if j.j12 == 0.0 || j.j21 == 0.0 {
        (Complex64::new(j.j11, 0.0), Complex64::new(j.j22, 0.0))
    } else {
        let half_tr = 0.5 * j.trace();
        let half_gap = 0.5 * (j.j11 - j.j22);
        let disc = half_gap * half_gap + j.j12 * j.j21;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
            let small = if big != 0.0 { j.det() / big } else { half_tr - s };
            let (lo, hi) = if big <= small { (big, small) } else { (small, big) };
            (Complex64::new(lo, 0.0), Complex64::new(hi, 0.0))
        } else {
            let w = (-disc).sqrt();
            (Complex64::new(half_tr, -w), Complex64::new(half_tr, w))
        }
    };

    let mut vectors = Vec::new();
    if l1.im == 0.0 {
        let scale = j.norm().max(f64::MIN_POSITIVE);
        let repeated = (l1.re - l2.re).abs() <= 1e-12 * scale;
        let scalar = j.j12 == 0.0 && j.j21 == 0.0 && j.j11 == j.j22;
        if scalar {
            vectors = vec![[1.0, 0.0], [0.0, 1.0]];
        } else if repeated {
            vectors.extend(eigenvector(j, l1.re));
        } else {
            vectors.extend(eigenvector(j, l1.re));
            vectors.extend(eigenvector(j, l2.re));
        }
    }
    Eigen2 { values: [l1, l2], vectors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    UnstableNode,
    Saddle,
    StableSpiral,
    UnstableSpiral,
    Center,
    NonHyperbolic,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, Self::StableNode | Self::StableSpiral)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::StableNode => "stable node",
            Self::UnstableNode => "unstable node",
            Self::Saddle => "saddle",
            Self::StableSpiral => "stable spiral",
            Self::UnstableSpiral => "unstable spiral",
            Self::Center => "center",
            Self::NonHyperbolic => "non-hyperbolic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub jacobian: Jacobian2,
    pub eigen: Eigen2,
    pub class: StabilityClass,
    pub hyperbolic: bool,
}

/// Trace-determinant classification with tolerance `tol` on eigenvalue real parts.
pub fn classify(j: &Jacobian2, tol: f64) -> StabilityReport {
    let eigen = eigen2(j);
    let [l1, l2] = eigen.values;
    let det = j.det();
    let class = if !eigen.is_real() {
        if l1.re.abs() <= tol {
            StabilityClass::Center
        } else if l1.re < 0.0 {
            StabilityClass::StableSpiral
        } else {
            StabilityClass::UnstableSpiral
        }
    } else if l1.re.abs() <= tol || l2.re.abs() <= tol || det.abs() <= tol * tol {
        StabilityClass::NonHyperbolic
    } else if det < 0.0 {
        StabilityClass::Saddle
    } else if l1.re < 0.0 {
        StabilityClass::StableNode
    } else {
        StabilityClass::UnstableNode
    };
    let hyperbolic = !matches!(class, StabilityClass::Center | StabilityClass::NonHyperbolic);
    StabilityReport { jacobian: *j, eigen, class, hyperbolic }
}

pub fn stability_at(c: &LVCoefficients, d: ReducedState, tol: f64) -> StabilityReport {
    classify(&jacobian_at(c, d), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedEquilibrium {
    pub equilibrium: Equilibrium,
    pub stability: StabilityReport,
}

/// Every fixed point together with its linear stability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedSet {
    pub points: Vec<ClassifiedEquilibrium>,
    pub continuum: Option<ContinuumLine>,
}

impl ClassifiedSet {
    pub fn degenerate(&self) -> bool {
        self.continuum.is_some()
    }

    pub fn feasible(&self) -> impl Iterator<Item = &ClassifiedEquilibrium> {
        self.points.iter().filter(|p| p.equilibrium.feasible)
    }
}

pub fn classify_equilibria(c: &LVCoefficients, tol: f64) -> ClassifiedSet {
    let set = equilibria(c);
    let points = set
        .points
        .into_iter()
        .map(|equilibrium| ClassifiedEquilibrium { equilibrium, stability: stability_at(c, equilibrium.location, tol) })
        .collect();
    ClassifiedSet { points, continuum: set.continuum }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginCase {
    /// Both `theta_i < mu`.
    StableNode,
    /// Both `theta_i > mu`.
    UnstableNode,
    /// One above, one below.
    Saddle,
    /// Some `theta_i = mu` within tolerance.
    NonHyperbolic,
}

impl OriginCase {
    pub fn as_class(self) -> StabilityClass {
        match self {
            Self::StableNode => StabilityClass::StableNode,
            Self::UnstableNode => StabilityClass::UnstableNode,
            Self::Saddle => StabilityClass::Saddle,
            Self::NonHyperbolic => StabilityClass::NonHyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginAnalysis {
    pub theta1: f64,
    pub theta2: f64,
    pub mu: f64,
    pub case: OriginCase,
}

impl OriginAnalysis {
    /// Origin eigenvalues `theta_i - mu`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        [self.theta1 - self.mu, self.theta2 - self.mu]
    }
}

/// Classifies the origin by comparing each `theta_i` with the mortality rate.
pub fn origin_analysis(params: &ValidatedParameters, tol: f64) -> OriginAnalysis {
    let mu = params.get().mu;
    let theta1 = theta(params, Drug::One);
    let theta2 = theta(params, Drug::Two);
    let sign = |t: f64| {
        let lambda = t - mu;
        if lambda.abs() <= tol {
            0
        } else if lambda > 0.0 {
            1
        } else {
            -1
        }
    };
    let case = match (sign(theta1), sign(theta2)) {
        (0, _) | (_, 0) => OriginCase::NonHyperbolic,
        (-1, -1) => OriginCase::StableNode,
        (1, 1) => OriginCase::UnstableNode,
        _ => OriginCase::Saddle,
    };
    OriginAnalysis { theta1, theta2, mu, case }
}
