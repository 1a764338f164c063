//! Parameters, states and the reduced Lotka-Volterra coefficients.
//!
//! All other modules derive their algebra from [`reduced_coefficients`] and
//! [`theta`], so the linear growth terms are computed in exactly one place.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute/relative tolerance pair used by comparisons across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// `|a - b| <= abs + rel * max(|a|, |b|)`
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }
}

/// Raw model rates (fractions per year) and the population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu: f64,
    #[serde(rename = "N")]
    pub n_total: f64,
}

/// Names of the nine rate parameters, in a fixed order.
pub const RATE_NAMES: [&str; 9] = ["beta1", "beta2", "gamma1", "gamma2", "delta1", "delta2", "alpha1", "alpha2", "mu"];

impl ModelParameters {
    /// The demonstration parameter set used in the simulation study.
    pub fn baseline() -> Self {
        Self {
            beta1: 0.3,
            beta2: 0.5,
            gamma1: 0.03,
            gamma2: 0.04,
            delta1: 0.2,
            delta2: 0.3,
            alpha1: 0.2,
            alpha2: 0.3,
            mu: 0.1,
            n_total: 10_000.0,
        }
    }

    pub fn rate(&self, name: &str) -> Option<f64> {
        Some(match name {
            "beta1" => self.beta1,
            "beta2" => self.beta2,
            "gamma1" => self.gamma1,
            "gamma2" => self.gamma2,
            "delta1" => self.delta1,
            "delta2" => self.delta2,
            "alpha1" => self.alpha1,
            "alpha2" => self.alpha2,
            "mu" => self.mu,
            _ => return None,
        })
    }

    /// Returns a copy with the named rate replaced, or `None` for an unknown name.
    pub fn with_rate(mut self, name: &str, value: f64) -> Option<Self> {
        let slot = match name {
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "delta1" => &mut self.delta1,
            "delta2" => &mut self.delta2,
            "alpha1" => &mut self.alpha1,
            "alpha2" => &mut self.alpha2,
            "mu" => &mut self.mu,
            _ => return None,
        };
        *slot = value;
        Some(self)
    }

    fn rates(&self) -> [(&'static str, f64); 9] {
        let mut out = [("", 0.0); 9];
        for (slot, name) in out.iter_mut().zip(RATE_NAMES) {
            *slot = (name, self.rate(name).unwrap_or(f64::NAN));
        }
        out
    }

    pub fn validate(&self) -> Result<ValidatedParameters, ValidationErrors> {
        validate_parameters(self)
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum ValidationError {
    #[error("rate {name} = {value} is outside [0, 1]")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("population size N = {0} must be positive and finite")]
    NonPositivePopulation(f64),
    #[error("delta{drug} + mu = 0: the recovered-class closure is undefined")]
    SingularClosure { drug: u8 },
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("invalid parameters: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationErrors(pub Vec<ValidationError>);

/// Special parameter regimes worth reporting alongside a valid parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecialCase {
    /// Some rate is exactly zero.
    ZeroRate { name: &'static str },
    /// `alpha_i = 0`: users of the other drug never switch to drug `i`.
    OneWaySwitching { drug: u8 },
    /// `gamma_i = delta_i = 0`: drug `i` behaves like an incurable disease.
    FatalDisease { drug: u8 },
}

/// Parameters that passed [`validate_parameters`]. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedParameters {
    params: ModelParameters,
    flags: Vec<SpecialCase>,
}

impl ValidatedParameters {
    pub fn get(&self) -> &ModelParameters {
        &self.params
    }

    pub fn flags(&self) -> &[SpecialCase] {
        &self.flags
    }

    pub fn n_total(&self) -> f64 {
        self.params.n_total
    }

    /// `gamma_i / (delta_i + mu)`, the recovered-to-addicted ratio at steady state.
    pub fn recovered_ratio(&self, drug: Drug) -> f64 {
        let p = &self.params;
        match drug {
            Drug::One => p.gamma1 / (p.delta1 + p.mu),
            Drug::Two => p.gamma2 / (p.delta2 + p.mu),
        }
    }

    /// Same parameters with a different population size.
    pub fn with_population(&self, n_total: f64) -> Result<Self, ValidationErrors> {
        ModelParameters { n_total, ..self.params }.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Drug {
    One,
    Two,
}

pub fn validate_parameters(raw: &ModelParameters) -> Result<ValidatedParameters, ValidationErrors> {
    let mut errors = Vec::new();
    for (name, value) in raw.rates() {
        if !(0.0..=1.0).contains(&value) {
            errors.push(ValidationError::RateOutOfRange { name, value });
        }
    }
    if !(raw.n_total.is_finite() && raw.n_total > 0.0) {
        errors.push(ValidationError::NonPositivePopulation(raw.n_total));
    }
    if raw.delta1 + raw.mu == 0.0 {
        errors.push(ValidationError::SingularClosure { drug: 1 });
    }
    if raw.delta2 + raw.mu == 0.0 {
        errors.push(ValidationError::SingularClosure { drug: 2 });
    }
    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }

    let mut flags: Vec<SpecialCase> =
        raw.rates().into_iter().filter(|&(_, v)| v == 0.0).map(|(name, _)| SpecialCase::ZeroRate { name }).collect();
    if raw.alpha1 == 0.0 {
        flags.push(SpecialCase::OneWaySwitching { drug: 1 });
    }
    if raw.alpha2 == 0.0 {
        flags.push(SpecialCase::OneWaySwitching { drug: 2 });
    }
    if raw.gamma1 == 0.0 && raw.delta1 == 0.0 {
        flags.push(SpecialCase::FatalDisease { drug: 1 });
    }
    if raw.gamma2 == 0.0 && raw.delta2 == 0.0 {
        flags.push(SpecialCase::FatalDisease { drug: 2 });
    }
    Ok(ValidatedParameters { params: *raw, flags })
}

/// Full five-compartment state, in persons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub s: f64,
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state component {name} = {value} is negative or not finite")]
    Negative { name: &'static str, value: f64 },
    #[error("compartments sum to {sum}, expected N = {n_total}")]
    PopulationMismatch { sum: f64, n_total: f64 },
    #[error("addicted and recovered compartments sum to {sum}, exceeding N = {n_total}")]
    ExceedsPopulation { sum: f64, n_total: f64 },
}

pub(crate) fn check_nonnegative(names: &[&'static str], values: &[f64]) -> Result<(), StateError> {
    for (&name, &value) in names.iter().zip(values) {
        if !(value.is_finite() && value >= 0.0) {
            return Err(StateError::Negative { name, value });
        }
    }
    Ok(())
}

impl PopulationState {
    pub fn new(s: f64, d1: f64, d2: f64, r1: f64, r2: f64) -> Self {
        Self { s, d1, d2, r1, r2 }
    }

    pub fn total(&self) -> f64 {
        self.s + self.d1 + self.d2 + self.r1 + self.r2
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s, self.d1, self.d2, self.r1, self.r2]
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    /// Checks nonnegativity and that the compartments add up to `N`.
    pub fn check(&self, params: &ValidatedParameters, tol: Tolerance) -> Result<(), StateError> {
        check_nonnegative(&["S", "D1", "D2", "R1", "R2"], &self.to_array())?;
        let n_total = params.n_total();
        let sum = self.total();
        if !tol.close(sum, n_total) {
            return Err(StateError::PopulationMismatch { sum, n_total });
        }
        Ok(())
    }
}

/// State of the reduced two-dimensional model.
///
/// Not restricted to the nonnegative quadrant: infeasible equilibrium
/// candidates are reported with negative components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub d1: f64,
    pub d2: f64,
}

impl ReducedState {
    pub const ORIGIN: Self = Self { d1: 0.0, d2: 0.0 };

    pub fn new(d1: f64, d2: f64) -> Self {
        Self { d1, d2 }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.d1, self.d2]
    }

    pub fn from_array(x: [f64; 2]) -> Self {
        Self::new(x[0], x[1])
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::new(self.d1 * k, self.d2 * k)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.d1 - other.d1).hypot(self.d2 - other.d2)
    }

    pub fn check(&self, n_total: f64) -> Result<(), StateError> {
        check_nonnegative(&["D1", "D2"], &self.to_array())?;
        let sum = self.d1 + self.d2;
        if sum > n_total * (1.0 + 1e-12) {
            return Err(StateError::ExceedsPopulation { sum, n_total });
        }
        Ok(())
    }
}

/// Competitive Lotka-Volterra form of the reduced model:
/// `dD_i/dt = r_i D_i - (D_i / N)(a_i1 D_1 + a_i2 D_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LVCoefficients {
    pub r1: f64,
    pub r2: f64,
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub n_total: f64,
}

impl LVCoefficients {
    pub fn growth(&self) -> [f64; 2] {
        [self.r1, self.r2]
    }

    pub fn competition(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn with_population(self, n_total: f64) -> Self {
        Self { n_total, ..self }
    }
}

/// `theta_i = beta_i - gamma_i + delta_i gamma_i / (delta_i + mu)`.
///
/// The origin eigenvalue for drug `i` is `theta_i - mu`; [`reduced_coefficients`]
/// uses this same function so that identity holds bit for bit.
pub fn theta(params: &ValidatedParameters, drug: Drug) -> f64 {
    let p = params.get();
    let (beta, gamma, delta) = match drug {
        Drug::One => (p.beta1, p.gamma1, p.delta1),
        Drug::Two => (p.beta2, p.gamma2, p.delta2),
    };
    beta - gamma + delta * gamma / (delta + p.mu)
}

pub fn reduced_coefficients(params: &ValidatedParameters) -> LVCoefficients {
    let p = params.get();
    let k1 = params.recovered_ratio(Drug::One);
    let k2 = params.recovered_ratio(Drug::Two);
    LVCoefficients {
        r1: theta(params, Drug::One) - p.mu,
        r2: theta(params, Drug::Two) - p.mu,
        a11: p.beta1 * (1.0 + k1),
        a12: p.beta1 * (1.0 + k2) + p.alpha2 - p.alpha1,
        a21: p.beta2 * (1.0 + k1) + p.alpha1 - p.alpha2,
        a22: p.beta2 * (1.0 + k2),
        n_total: p.n_total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ValidatedParameters {
        ModelParameters::baseline().validate().unwrap()
    }

    #[test]
    fn baseline_is_valid_without_flags() {
        assert!(baseline().flags().is_empty());
    }

    #[test]
    fn negative_rate_rejected() {
        let p = ModelParameters { beta1: -0.1, ..ModelParameters::baseline() };
        let err = p.validate().unwrap_err();
        assert_eq!(err.0, vec![ValidationError::RateOutOfRange { name: "beta1", value: -0.1 }]);
    }

    #[test]
    fn rate_above_one_and_nan_rejected() {
        let p = ModelParameters { gamma2: 1.5, alpha1: f64::NAN, ..ModelParameters::baseline() };
        let err = p.validate().unwrap_err();
        assert_eq!(err.0.len(), 2);
    }

    #[test]
    fn singular_closure() {
        let p = ModelParameters { delta1: 0.0, mu: 0.0, ..ModelParameters::baseline() };
        let err = p.validate().unwrap_err();
        assert!(err.0.contains(&ValidationError::SingularClosure { drug: 1 }));
        assert!(!err.0.contains(&ValidationError::SingularClosure { drug: 2 }));
    }

    #[test]
    fn non_positive_population() {
        for n in [0.0, -5.0, f64::INFINITY] {
            let p = ModelParameters { n_total: n, ..ModelParameters::baseline() };
            assert!(matches!(p.validate().unwrap_err().0[0], ValidationError::NonPositivePopulation(_)));
        }
    }

    #[test]
    fn boundary_rates_accepted_and_flagged() {
        let p = ModelParameters { alpha1: 0.0, gamma2: 0.0, delta2: 0.0, beta1: 1.0, ..ModelParameters::baseline() };
        let v = p.validate().unwrap();
        let flags = v.flags();
        assert!(flags.contains(&SpecialCase::ZeroRate { name: "alpha1" }));
        assert!(flags.contains(&SpecialCase::OneWaySwitching { drug: 1 }));
        assert!(flags.contains(&SpecialCase::FatalDisease { drug: 2 }));
        assert!(!flags.contains(&SpecialCase::FatalDisease { drug: 1 }));
    }

    #[test]
    fn baseline_coefficients() {
        let c = reduced_coefficients(&baseline());
        let tol = Tolerance::new(1e-12, 0.0);
        assert!(tol.close(c.r1, 0.19), "{}", c.r1);
        assert!(tol.close(c.r2, 0.39), "{}", c.r2);
        assert!(tol.close(c.a11, 0.33));
        assert!(tol.close(c.a12, 0.43));
        assert!(tol.close(c.a21, 0.45));
        assert!(tol.close(c.a22, 0.55));
        assert!((c.r1 * c.n_total / c.a11 - 5757.576).abs() < 1e-3);
    }

    #[test]
    fn symmetric_parameters_give_equal_coefficients() {
        let p = ModelParameters { beta2: 0.3, gamma2: 0.03, delta2: 0.2, alpha2: 0.2, ..ModelParameters::baseline() };
        let c = reduced_coefficients(&p.validate().unwrap());
        assert_eq!(c.r1, c.r2);
        assert_eq!(c.a11, c.a12);
        assert_eq!(c.a12, c.a21);
        assert_eq!(c.a21, c.a22);
    }

    #[test]
    fn rate_accessors_roundtrip() {
        let p = ModelParameters::baseline();
        for name in RATE_NAMES {
            let q = p.with_rate(name, 0.77).unwrap();
            assert_eq!(q.rate(name), Some(0.77));
        }
        assert!(p.with_rate("N", 1.0).is_none());
        assert!(p.rate("beta3").is_none());
    }

    #[test]
    fn population_state_check() {
        let v = baseline();
        let ok = PopulationState::new(9800.0, 100.0, 100.0, 0.0, 0.0);
        assert!(ok.check(&v, Tolerance::default()).is_ok());
        let off = PopulationState::new(9000.0, 100.0, 100.0, 0.0, 0.0);
        assert!(matches!(off.check(&v, Tolerance::default()), Err(StateError::PopulationMismatch { .. })));
        let neg = PopulationState::new(10000.0, -1.0, 1.0, 0.0, 0.0);
        assert!(matches!(neg.check(&v, Tolerance::default()), Err(StateError::Negative { .. })));
    }

    #[test]
    fn config_keys_use_capital_n() {
        let json = r#"{"beta1":0.3,"beta2":0.5,"gamma1":0.03,"gamma2":0.04,"delta1":0.2,
            "delta2":0.3,"alpha1":0.2,"alpha2":0.3,"mu":0.1,"N":10000}"#;
        let p: ModelParameters = serde_json::from_str(json).unwrap();
        assert_eq!(p, ModelParameters::baseline());
        let bad = json.replace("\"N\"", "\"n_total\"");
        assert!(serde_json::from_str::<ModelParameters>(&bad).is_err());
    }
}
