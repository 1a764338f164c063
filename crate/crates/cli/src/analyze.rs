use std::fmt::Write as _;

use serde::Serialize;
use twodrug::equilibria::ContinuumLine;
use twodrug::model::SpecialCase;
use twodrug::stability::DEFAULT_HYPERBOLIC_TOL;
use twodrug::{
    classify_equilibria, origin_analysis, reduced_coefficients, ClassifiedEquilibrium, EquilibriumKind, LVCoefficients,
    ModelParameters, OriginAnalysis,
};

use crate::config::Context;
use crate::regime::{regime_of, stable_kinds, RegimeClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub parameters: ModelParameters,
    pub normalized: bool,
    pub special_cases: Vec<SpecialCase>,
    pub coefficients: LVCoefficients,
    pub equilibria: Vec<ClassifiedEquilibrium>,
    pub continuum: Option<ContinuumLine>,
    pub origin: OriginAnalysis,
    pub regime: RegimeClass,
    pub stable_equilibria: Vec<EquilibriumKind>,
}

pub fn analyze(ctx: &Context) -> AnalysisReport {
    let c = reduced_coefficients(&ctx.params);
    let set = classify_equilibria(&c, DEFAULT_HYPERBOLIC_TOL);
    AnalysisReport {
        parameters: *ctx.params.get(),
        normalized: ctx.normalized,
        special_cases: ctx.params.flags().to_vec(),
        coefficients: c,
        regime: regime_of(&set),
        stable_equilibria: stable_kinds(&set),
        origin: origin_analysis(&ctx.params, DEFAULT_HYPERBOLIC_TOL),
        equilibria: set.points,
        continuum: set.continuum,
    }
}

fn kind_label(k: EquilibriumKind) -> &'static str {
    match k {
        EquilibriumKind::Origin => "origin",
        EquilibriumKind::Axis1 => "D1-axis",
        EquilibriumKind::Axis2 => "D2-axis",
        EquilibriumKind::Interior => "interior",
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let p = &self.parameters;
        let c = &self.coefficients;
        let mut s = String::new();
        let unit = if self.normalized { "fraction of N" } else { "persons" };
        let _ = writeln!(s, "Two-drug model analysis");
        let _ = writeln!(
            s,
            "parameters: beta=({}, {}) gamma=({}, {}) delta=({}, {}) alpha=({}, {}) mu={} N={}",
            p.beta1, p.beta2, p.gamma1, p.gamma2, p.delta1, p.delta2, p.alpha1, p.alpha2, p.mu, p.n_total
        );
        for f in &self.special_cases {
            let _ = writeln!(s, "special case: {f:?}");
        }
        let _ = writeln!(s, "\nreduced system");
        let _ = writeln!(s, "  r   = ({:.6}, {:.6}) per year", c.r1, c.r2);
        let _ = writeln!(s, "  a11 = {:.6}  a12 = {:.6}", c.a11, c.a12);
        let _ = writeln!(s, "  a21 = {:.6}  a22 = {:.6}", c.a21, c.a22);
        let o = &self.origin;
        let _ = writeln!(s, "\norigin: theta = ({:.6}, {:.6}), mu = {} -> {:?}", o.theta1, o.theta2, o.mu, o.case);
        let _ = writeln!(s, "\nequilibria ({unit})");
        for e in &self.equilibria {
            let q = &e.equilibrium;
            let st = &e.stability;
            let [l1, l2] = st.eigen.values;
            let _ = writeln!(
                s,
                "  {:<8} ({:.6}, {:.6}) {:<10} {:<15} eigenvalues {:.6}{:+.6}i, {:.6}{:+.6}i",
                kind_label(q.kind),
                q.location.d1,
                q.location.d2,
                if q.feasible { "feasible" } else { "infeasible" },
                st.class.label(),
                l1.re,
                l1.im,
                l2.re,
                l2.im
            );
        }
        if let Some(line) = &self.continuum {
            let _ = writeln!(s, "  continuum of equilibria: {} d1 + {} d2 = {}", line.a, line.b, line.c);
        }
        let stable: Vec<&str> = self.stable_equilibria.iter().map(|k| kind_label(*k)).collect();
        let _ = writeln!(
            s,
            "\nregime: {} (stable feasible: {})",
            self.regime,
            if stable.is_empty() { "none".into() } else { stable.join(", ") }
        );
        s
    }
}
