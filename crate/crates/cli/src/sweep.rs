//! Regime maps over one or two rate parameters.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use twodrug::stability::DEFAULT_HYPERBOLIC_TOL;
use twodrug::{
    classify_equilibria, reduced_coefficients, ClassifiedEquilibrium, ClassifiedSet, EquilibriumKind, ModelParameters,
};

use crate::config::{Context, SweepConfig};
use crate::error::CliError;
use crate::output::num;
use crate::regime::{regime_of, stable_kinds, RegimeClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    /// One value per axis, in axis order.
    pub values: Vec<f64>,
    pub regime: RegimeClass,
    pub stable: Vec<EquilibriumKind>,
    pub equilibria: Option<ClassifiedSet>,
    /// Validation message for `Invalid` cells.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub names: Vec<String>,
    pub shape: Vec<usize>,
    /// Row-major: the last axis varies fastest.
    pub cells: Vec<SweepCell>,
}

fn evaluate(base: &ModelParameters, names: &[String], values: Vec<f64>, normalized: bool) -> SweepCell {
    let mut p = *base;
    for (name, v) in names.iter().zip(&values) {
        p = p.with_rate(name, *v).expect("axis names are checked on load");
    }
    let validated = p.validate().and_then(|v| if normalized { v.with_population(1.0) } else { Ok(v) });
    match validated {
        Ok(v) => {
            let set = classify_equilibria(&reduced_coefficients(&v), DEFAULT_HYPERBOLIC_TOL);
            SweepCell {
                values,
                regime: regime_of(&set),
                stable: stable_kinds(&set),
                equilibria: Some(set),
                error: None,
            }
        }
        Err(e) => SweepCell {
            values,
            regime: RegimeClass::Invalid,
            stable: Vec::new(),
            equilibria: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_sweep(ctx: &Context, config: &SweepConfig, parallel: bool) -> SweepOutput {
    let names: Vec<String> = config.axes.iter().map(|a| a.parameter.clone()).collect();
    let axes: Vec<Vec<f64>> = config.axes.iter().map(|a| a.values()).collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let points: Vec<Vec<f64>> = match axes.as_slice() {
        [a] => a.iter().map(|&x| vec![x]).collect(),
        [a, b] => a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect(),
        _ => unreachable!("axis count is checked on load"),
    };
    let base = ctx.config.parameters;
    let eval = |v: Vec<f64>| evaluate(&base, &names, v, ctx.normalized);
    let cells =
        if parallel { points.into_par_iter().map(eval).collect() } else { points.into_iter().map(eval).collect() };
    SweepOutput { names, shape, cells }
}

pub fn sweep(ctx: &Context) -> Result<SweepOutput, CliError> {
    let Some(config) = &ctx.config.sweep else {
        return Err(CliError::Config("sweep needs a \"sweep\" section".into()));
    };
    Ok(run_sweep(ctx, config, config.parallel))
}

fn point(set: &ClassifiedSet, kind: EquilibriumKind) -> Option<&ClassifiedEquilibrium> {
    set.points.iter().find(|p| p.equilibrium.kind == kind)
}

impl SweepOutput {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for n in &self.names {
            s.push_str(n);
            s.push(',');
        }
        s.push_str(
            "regime,stable,origin_class,axis1_d1,axis1_class,axis2_d2,axis2_class,\
             interior_d1,interior_d2,interior_class,interior_feasible\n",
        );
        for cell in &self.cells {
            for v in &cell.values {
                let _ = write!(s, "{v},");
            }
            let stable: Vec<String> = cell.stable.iter().map(|k| format!("{k:?}")).collect();
            let _ = write!(s, "{},{}", cell.regime, stable.join(";"));
            let mut fields = vec![String::new(); 9];
            if let Some(set) = &cell.equilibria {
                let class = |e: &ClassifiedEquilibrium| format!("{:?}", e.stability.class);
                if let Some(o) = point(set, EquilibriumKind::Origin) {
                    fields[0] = class(o);
                }
                if let Some(a) = point(set, EquilibriumKind::Axis1) {
                    fields[1] = num(a.equilibrium.location.d1);
                    fields[2] = class(a);
                }
                if let Some(a) = point(set, EquilibriumKind::Axis2) {
                    fields[3] = num(a.equilibrium.location.d2);
                    fields[4] = class(a);
                }
                if let Some(i) = point(set, EquilibriumKind::Interior) {
                    fields[5] = num(i.equilibrium.location.d1);
                    fields[6] = num(i.equilibrium.location.d2);
                    fields[7] = class(i);
                    fields[8] = i.equilibrium.feasible.to_string();
                }
            }
            for f in fields {
                s.push(',');
                s.push_str(&f);
            }
            s.push('\n');
        }
        s
    }

    /// Colour-coded grid: first axis horizontal, second axis (if any) vertical.
    pub fn to_svg(&self) -> String {
        const CELL: f64 = 32.0;
        const MARGIN: f64 = 80.0;
        const LEGEND: f64 = 220.0;
        let nx = self.shape[0];
        let ny = self.shape.get(1).copied().unwrap_or(1);
        let plot_w = CELL * nx as f64;
        let plot_h = CELL * ny as f64;
        let width = plot_w + 2.0 * MARGIN + LEGEND;
        let height = (plot_h + 2.0 * MARGIN).max(MARGIN + 24.0 * RegimeClass::ALL.len() as f64);
        let mut s = String::new();
        let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>");
        for (k, cell) in self.cells.iter().enumerate() {
            let (i, j) = (k / ny, k % ny);
            let x = MARGIN + CELL * i as f64;
            let y = MARGIN + plot_h - CELL * (j + 1) as f64;
            let _ = writeln!(
                s,
                "<rect class=\"cell\" data-regime=\"{}\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{CELL:.2}\" height=\"{CELL:.2}\" fill=\"{}\" stroke=\"#fff\"/>",
                cell.regime,
                colour(cell.regime)
            );
        }
        let first = |k: usize| self.cells[k].values[0];
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{} ({} to {})</text>",
            MARGIN + plot_w / 2.0,
            MARGIN + plot_h + 36.0,
            self.names[0],
            first(0),
            first(self.cells.len() - 1)
        );
        if ny > 1 {
            let _ = writeln!(
                s,
                "<text transform=\"translate({:.2},{:.2}) rotate(-90)\" text-anchor=\"middle\">{} ({} to {})</text>",
                MARGIN - 24.0,
                MARGIN + plot_h / 2.0,
                self.names[1],
                self.cells[0].values[1],
                self.cells[ny - 1].values[1]
            );
        }
        let lx = MARGIN + plot_w + 40.0;
        for (k, r) in RegimeClass::ALL.iter().enumerate() {
            let y = MARGIN + 24.0 * k as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"16\" height=\"16\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\">{r}</text>",
                y,
                colour(*r),
                lx + 24.0,
                y + 12.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn colour(r: RegimeClass) -> &'static str {
    match r {
        RegimeClass::Extinction => "#bdbdbd",
        RegimeClass::Exclusion1 => "#1f77b4",
        RegimeClass::Exclusion2 => "#d62728",
        RegimeClass::BistableExclusion => "#9467bd",
        RegimeClass::Coexistence => "#2ca02c",
        RegimeClass::Degenerate => "#ff7f0e",
        RegimeClass::NonHyperbolicBoundary => "#8c564b",
        RegimeClass::NoFeasibleAttractor => "#17becf",
        RegimeClass::Invalid => "#000000",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{RunConfig, SweepAxis};
    use twodrug::StabilityClass;

    fn axis(p: &str, steps: usize) -> SweepAxis {
        SweepAxis { parameter: p.into(), min: 0.0, max: 1.0, steps }
    }

    fn ctx(params: ModelParameters, axes: Vec<SweepAxis>) -> Context {
        let mut config = RunConfig::baseline();
        config.parameters = params;
        config.sweep = Some(SweepConfig { axes, heatmap: true, parallel: true });
        Context::new(config, false).unwrap()
    }

    #[test]
    fn beta2_sweep_midpoint_is_exclusion2() {
        let out = sweep(&ctx(ModelParameters::baseline(), vec![axis("beta2", 11)])).unwrap();
        assert_eq!(out.cells.len(), 11);
        let mid = &out.cells[5];
        assert_eq!(mid.values, vec![0.5]);
        assert_eq!(mid.regime, RegimeClass::Exclusion2);
        let csv = out.to_csv();
        assert!(csv.starts_with("beta2,regime,stable,"));
        assert!(csv.lines().nth(6).unwrap().starts_with("0.5,Exclusion2,Axis2,UnstableNode,"));
    }

    #[test]
    fn without_drug1_influence_drug1_never_wins() {
        let p = ModelParameters { beta1: 0.0, ..ModelParameters::baseline() };
        let out = sweep(&ctx(p, vec![axis("beta2", 21)])).unwrap();
        for cell in &out.cells {
            assert!(!matches!(cell.regime, RegimeClass::Exclusion1 | RegimeClass::BistableExclusion), "{cell:?}");
            let set = cell.equilibria.as_ref().unwrap();
            assert!(set.points.iter().all(|p| p.equilibrium.kind != EquilibriumKind::Axis1));
        }
    }

    #[test]
    fn switching_sweep_leaves_origin_alone() {
        let out = sweep(&ctx(ModelParameters::baseline(), vec![axis("alpha1", 6), axis("alpha2", 6)])).unwrap();
        assert_eq!(out.cells.len(), 36);
        assert_eq!(out.cells[1].values, vec![0.0, 0.2]);
        for cell in &out.cells {
            let origin = &cell.equilibria.as_ref().unwrap().points[0];
            assert_eq!(origin.equilibrium.kind, EquilibriumKind::Origin);
            assert_eq!(origin.stability.class, StabilityClass::UnstableNode);
            assert_eq!(
                origin.stability.eigen.values,
                out.cells[0].equilibria.as_ref().unwrap().points[0].stability.eigen.values
            );
        }
    }

    #[test]
    fn invalid_cells_are_reported() {
        let p = ModelParameters { delta1: 0.0, ..ModelParameters::baseline() };
        let out = sweep(&ctx(p, vec![axis("mu", 3)])).unwrap();
        assert_eq!(out.cells[0].regime, RegimeClass::Invalid);
        assert!(out.cells[0].error.as_ref().unwrap().contains("delta1"));
        assert_ne!(out.cells[1].regime, RegimeClass::Invalid);
        assert!(out.to_csv().lines().nth(1).unwrap().starts_with("0,Invalid,,,"));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = ctx(ModelParameters::baseline(), vec![axis("beta1", 7), axis("gamma2", 5)]);
        let cfg = c.config.sweep.clone().unwrap();
        let a = run_sweep(&c, &cfg, true);
        let b = run_sweep(&c, &cfg, false);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_svg(), b.to_svg());
    }

    #[test]
    fn heatmap_has_one_rect_per_cell() {
        let out = sweep(&ctx(ModelParameters::baseline(), vec![axis("beta1", 4), axis("beta2", 3)])).unwrap();
        let svg = out.to_svg();
        assert_eq!(svg.matches("class=\"cell\"").count(), 12);
        assert!(svg.ends_with("</svg>\n"));
    }
}
