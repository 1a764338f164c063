use twodrug::portrait::SeparatrixOptions;
use twodrug::stability::DEFAULT_HYPERBOLIC_TOL;
use twodrug::{
    build_portrait, reduced_coefficients, render_svg, IntegratorOptions, PhasePortrait, PortraitOptions, SvgStyle,
};

use crate::config::Context;
use crate::error::CliError;

pub fn options(ctx: &Context) -> PortraitOptions {
    let n = ctx.n_total();
    let p = &ctx.config.portrait;
    PortraitOptions {
        grid: p.grid,
        layout: p.layout,
        integrator: IntegratorOptions::for_population(n).with_t_max(p.t_max),
        separatrix: SeparatrixOptions::for_population(n),
        hyperbolic_tol: DEFAULT_HYPERBOLIC_TOL,
    }
}

/// Geometry and its SVG rendering.
pub fn portrait(ctx: &Context) -> Result<(PhasePortrait, String), CliError> {
    let c = reduced_coefficients(&ctx.params);
    let portrait = build_portrait(&c, &ctx.window(), &options(ctx))?;
    let svg = render_svg(&portrait, &SvgStyle::default())?;
    Ok((portrait, svg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use twodrug::{ModelParameters, PortraitError, Window};

    fn markers(svg: &str) -> usize {
        svg.matches("class=\"equilibrium ").count()
    }

    #[test]
    fn baseline_portrait() {
        let mut config = RunConfig::baseline();
        config.portrait.grid = 2;
        let (p, svg) = portrait(&Context::new(config, false).unwrap()).unwrap();
        assert_eq!(markers(&svg), 3);
        assert_eq!(p.nullclines.len(), 4);
        assert_eq!(p.trajectories.len(), 4);
        let saddle = p.separatrices[0].saddle;
        assert!((saddle.d1 - 5757.576).abs() < 1e-3 && saddle.d2 == 0.0);
    }

    #[test]
    fn no_drug1_influence_drops_a_marker() {
        let mut config = RunConfig::baseline();
        config.parameters = ModelParameters { beta1: 0.0, ..config.parameters };
        config.portrait.grid = 0;
        let (_, svg) = portrait(&Context::new(config, false).unwrap()).unwrap();
        assert_eq!(markers(&svg), 2);
    }

    #[test]
    fn empty_window_is_rejected() {
        let mut config = RunConfig::baseline();
        config.portrait.window = Some(Window::new((0.0, 0.0), (0.0, 0.0)));
        let err = portrait(&Context::new(config, false).unwrap()).unwrap_err();
        assert!(matches!(err, CliError::Portrait(PortraitError::EmptyWindow(_))));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn normalized_axes_are_fractions() {
        let mut config = RunConfig::baseline();
        config.portrait.grid = 0;
        let (p, svg) = portrait(&Context::new(config, true).unwrap()).unwrap();
        assert_eq!(p.window, Window::square(1.0));
        assert!(svg.contains("fraction of N"));
        assert_eq!(markers(&svg), 3);
    }
}
