//! The multiplier weight g(ρ) = ∫₀^ρ (1+bτ²)⁻¹ dτ = arctan(√b ρ)/√b with
//! analytic derivatives, the change of variables x(ρ) it induces, and the
//! checker for the structural conditions a weight must satisfy (increasing,
//! centered, bounded, inverse-polynomial tails).

use serde::Serialize;

use crate::exec;
use crate::report::{ConditionCheck, ConditionReport, Witness};
use crate::{Error, Result};

/// The arctan multiplier family, parametrized by the width b > 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierG {
    b: f64,
}

impl MultiplierG {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Usage(format!("b = {b} must be positive")));
        }
        Ok(MultiplierG { b })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// sup |g| = π/(2√b).
    pub fn sup_g(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.b.sqrt()
    }
}

/// Weight and derivatives g, g', g'', g''' at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GSample {
    pub rho: f64,
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

/// A smooth radial weight with three analytic derivatives. Implemented by
/// [`MultiplierG`]; user-supplied weights plug into the same checkers and
/// into the generic shooting machinery.
pub trait SmoothWeight: Send + Sync {
    fn eval(&self, rho: f64) -> GSample;

    /// Analytic bound on sup |g|, when one is known.
    fn sup_bound(&self) -> Option<f64> {
        None
    }
}

impl SmoothWeight for MultiplierG {
    fn eval(&self, rho: f64) -> GSample {
        let b = self.b;
        let sb = b.sqrt();
        let d = 1.0 + b * rho * rho;
        GSample {
            rho,
            g: (sb * rho).atan() / sb,
            g1: 1.0 / d,
            g2: -2.0 * b * rho / (d * d),
            g3: (6.0 * b * b * rho * rho - 2.0 * b) / (d * d * d),
        }
    }

    fn sup_bound(&self) -> Option<f64> {
        Some(self.sup_g())
    }
}

pub fn eval_g(mult: &MultiplierG, rho: f64) -> GSample {
    mult.eval(rho)
}

/// x(ρ) = ∫₀^ρ dτ/g'(τ) = ρ + bρ³/3, the flattening change of variables.
pub fn x_of_rho(mult: &MultiplierG, rho: f64) -> f64 {
    rho + mult.b * rho * rho * rho / 3.0
}

/// Inverse of [`x_of_rho`] by safeguarded Newton;
/// |x_of_rho(result) − x| ≤ 1e−12·(1+|x|).
pub fn rho_of_x(mult: &MultiplierG, x: f64) -> f64 {
    let b = mult.b;
    let f = |r: f64| r + b * r * r * r / 3.0 - x;

    let mut r = if (b * x * x).abs() > 1.0 {
        (3.0 * x / b).cbrt()
    } else {
        x
    };
    let (mut lo, mut hi);
    if f(r) >= 0.0 {
        hi = r;
        lo = r - 1.0;
        let mut step = 2.0;
        while f(lo) > 0.0 {
            hi = lo;
            lo -= step;
            step *= 2.0;
        }
    } else {
        lo = r;
        hi = r + 1.0;
        let mut step = 2.0;
        while f(hi) < 0.0 {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
    }
    for _ in 0..100 {
        let fv = f(r);
        if fv.abs() <= 1e-13 * (1.0 + x.abs()) {
            break;
        }
        if fv > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let mut next = r - fv / (1.0 + b * r * r);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == r {
            break;
        }
        r = next;
    }
    r
}

/// Options for the weight checker. The envelope fit runs over
/// |ρ| ≥ `rho_asym` against the exponents α+1−i with α = `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct WeightCheckOptions {
    pub rho_asym: f64,
    pub alpha: f64,
    pub max_envelope_ratio: f64,
}

impl Default for WeightCheckOptions {
    fn default() -> Self {
        WeightCheckOptions {
            rho_asym: 100.0,
            alpha: -2.0,
            max_envelope_ratio: 10.0,
        }
    }
}

/// Check conditions on the arctan weight with default options.
pub fn check_g_conditions(mult: &MultiplierG, grid: &[f64]) -> Result<ConditionReport> {
    check_weight_conditions(mult, grid, &WeightCheckOptions::default())
}

/// Check a generic smooth weight: g' > 0 on the grid, g(0) = 0, boundedness
/// (against the declared bound when one exists, otherwise a growth
/// heuristic at the grid edges), and the inverse-polynomial envelope
/// c_i ρ^(α+1−i) ≤ g^(i) ≤ C_i ρ^(α+1−i) fitted over the far region.
pub fn check_weight_conditions(
    weight: &dyn SmoothWeight,
    grid: &[f64],
    opts: &WeightCheckOptions,
) -> Result<ConditionReport> {
    if grid.is_empty() {
        return Err(Error::Usage("empty grid".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let samples = exec::map(&sorted, |&rho| weight.eval(rho));
    let mut report = ConditionReport::default();

    // increasing
    match samples.iter().find(|s| s.g1 <= 0.0) {
        Some(s) => report.push(ConditionCheck::fail(
            "increasing",
            Some(Witness {
                rho: s.rho,
                value: s.g1,
            }),
            "g' not positive".into(),
        )),
        None => report.push(ConditionCheck::pass(
            "increasing",
            format!(
                "min g' = {:.3e}",
                samples.iter().map(|s| s.g1).fold(f64::INFINITY, f64::min)
            ),
        )),
    }

    // centered at the trapped surface
    let g0 = weight.eval(0.0).g;
    if g0.abs() <= 1e-14 {
        report.push(ConditionCheck::pass("centered", format!("g(0) = {g0:e}")));
    } else {
        report.push(ConditionCheck::fail(
            "centered",
            Some(Witness {
                rho: 0.0,
                value: g0,
            }),
            "g(0) != 0".into(),
        ));
    }

    // bounded
    let sup = samples.iter().map(|s| s.g.abs()).fold(0.0, f64::max);
    match weight.sup_bound() {
        Some(bound) => {
            if sup <= bound * (1.0 + 1e-12) {
                report.push(ConditionCheck::pass(
                    "bounded",
                    format!("sup |g| = {sup:.6} within the declared bound {bound:.6}"),
                ));
            } else {
                report.push(ConditionCheck::fail(
                    "bounded",
                    None,
                    format!("sup |g| = {sup:.6} exceeds the declared bound {bound:.6}"),
                ));
            }
        }
        None => {
            // no declared bound: require |g| to have stopped growing at the edges
            let edge = sorted[sorted.len() - 1];
            let probe = |r: f64| weight.eval(r).g.abs();
            let grew = probe(edge) > 1.02 * probe(0.8 * edge)
                || probe(sorted[0]) > 1.02 * probe(0.8 * sorted[0]);
            if grew {
                report.push(ConditionCheck::fail(
                    "bounded",
                    Some(Witness {
                        rho: edge,
                        value: probe(edge),
                    }),
                    "|g| still growing at the grid edge and no bound declared".into(),
                ));
            } else {
                report.push(ConditionCheck::pass(
                    "bounded",
                    format!("|g| saturated at {sup:.6} near the grid edge"),
                ));
            }
        }
    }

    // inverse polynomial envelope on the far region
    for i in 1..=3u32 {
        report.push(envelope_check(&samples, i, opts));
    }

    Ok(report)
}

/// Fit c_i, C_i in c_i ρ^(α+1−i) ≤ g^(i) ≤ C_i ρ^(α+1−i) over |ρ| ≥ rho_asym
/// and report the least-squares log-log slope alongside.
fn envelope_check(samples: &[GSample], i: u32, opts: &WeightCheckOptions) -> ConditionCheck {
    let name = format!("envelope-g{i}");
    let expo = opts.alpha + 1.0 - i as f64;
    let far: Vec<&GSample> = samples
        .iter()
        .filter(|s| s.rho.abs() >= opts.rho_asym)
        .collect();
    if far.len() < 8 {
        return ConditionCheck::fail(
            &name,
            None,
            format!(
                "only {} grid points beyond |rho| = {}; extend the grid",
                far.len(),
                opts.rho_asym
            ),
        );
    }
    let deriv = |s: &GSample| match i {
        1 => s.g1,
        2 => s.g2,
        _ => s.g3,
    };
    // signed ratio g^(i) / rho^expo; the envelope requires it pinched
    // between constants of one sign
    let ratios: Vec<f64> = far
        .iter()
        .map(|s| deriv(s) / s.rho.abs().powf(expo) * sign_power(s.rho, i))
        .collect();
    let c = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let cc = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // log-log slope over the positive side, informational
    let pts: Vec<(f64, f64)> = far
        .iter()
        .filter(|s| s.rho > 0.0 && deriv(s) != 0.0)
        .map(|s| (s.rho.ln(), deriv(s).abs().ln()))
        .collect();
    let slope = ls_slope(&pts);
    let detail = format!(
        "c = {c:.4e}, C = {cc:.4e} against rho^{expo}; log-log slope {slope:.3} \
         (expected {expo:.1})"
    );
    if c <= 0.0 && cc >= 0.0 {
        return ConditionCheck::fail(
            &name,
            None,
            format!("{detail}; ratio changes sign, no envelope of one sign"),
        );
    }
    let spread = (cc / c).abs().max((c / cc).abs());
    if spread > opts.max_envelope_ratio {
        ConditionCheck::fail(
            &name,
            None,
            format!(
                "{detail}; spread C/c = {spread:.2} exceeds {}; the asymptotic regime \
                 may not be reached at |rho| >= {} (increase rho_asym or the grid extent)",
                opts.max_envelope_ratio, opts.rho_asym
            ),
        )
    } else {
        ConditionCheck::pass(&name, format!("{detail}; spread C/c = {spread:.3}"))
    }
}

/// Parity factor so the envelope ratio has one sign on both tails:
/// g', g''' are even, g'' is odd.
fn sign_power(rho: f64, i: u32) -> f64 {
    if i == 2 && rho < 0.0 {
              -1.0
    } else {
        1.0
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, BackgroundModel, QuadraticProfile};
    use crate::{linspace, quad};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn g01() -> MultiplierG {
        MultiplierG::new(0.1).unwrap()
    }

    #[test]
    fn values_at_origin() {
        let s = eval_g(&g01(), 0.0);
        assert_eq!(s.g, 0.0);
        assert_eq!(s.g1, 1.0);
        assert_eq!(s.g2, 0.0);
        assert_relative_eq!(s.g3, -0.2, epsilon = 1e-15);
    }

    #[test]
    fn tail_decay_rates() {
        let m = g01();
        let s = eval_g(&m, 1000.0);
        assert!(s.g < m.sup_g());
        assert!(m.sup_g() - s.g < 0.011);
        assert_relative_eq!(m.sup_g(), 4.967294132898051, epsilon = 1e-12);
        assert_relative_eq!(s.g1, 1.0 / (0.1 * 1e6), max_relative = 2e-5);
        // g''' ~ 6/(b rho^4) within 1%
        assert_relative_eq!(s.g3, 6.0 / (0.1 * 1e12), max_relative = 1e-2);
    }

    #[test]
    fn g_matches_quadrature_oracle() {
        let m = g01();
        for &rho in &[-7.0, -0.5, 1.0, 42.0] {
            let oracle = quad::adaptive_simpson(|t| 1.0 / (1.0 + 0.1 * t * t), 0.0, rho, 1e-14);
            assert_relative_eq!(eval_g(&m, rho).g, oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = g01();
        for &rho in &[-20.0, -1.3, 0.4, 7.7] {
            let h = 1e-4;
            let at = |r: f64| eval_g(&m, r);
            let fd1 = (at(rho + h).g - at(rho - h).g) / (2.0 * h);
            let fd2 = (at(rho + h).g1 - at(rho - h).g1) / (2.0 * h);
            let fd3 = (at(rho + h).g2 - at(rho - h).g2) / (2.0 * h);
            let s = at(rho);
            assert_relative_eq!(s.g1, fd1, max_relative = 1e-7);
            assert_relative_eq!(s.g2, fd2, max_relative = 1e-6, epsilon = 1e-10);
            assert_relative_eq!(s.g3, fd3, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    #[test]
    fn x_map_closed_form_and_quadrature() {
        let m = g01();
        assert_eq!(x_of_rho(&m, 0.0), 0.0);
        assert_relative_eq!(x_of_rho(&m, -3.0), -3.9, epsilon = 1e-14);
        let x1000 = x_of_rho(&m, 1000.0);
        assert_relative_eq!(x1000, 1000.0 + 0.1e9 / 3.0, max_relative = 1e-15);
        // oracle: 1/g' = 1 + b tau^2, Simpson is exact for quadratics
        let oracle = quad::simpson(|t| 1.0 + 0.1 * t * t, 0.0, 1000.0, 2);
        assert_relative_eq!(x1000, oracle, max_relative = 1e-14);
    }

    #[test]
    fn x_map_inverts() {
        let m = g01();
        assert_eq!(rho_of_x(&m, 0.0), 0.0);
        assert_relative_eq!(rho_of_x(&m, 3.9), 3.0, epsilon = 1e-12);
        assert_relative_eq!(rho_of_x(&m, 1000.0 + 0.1e9 / 3.0), 1000.0, max_relative = 1e-12);
        for &x in &[-3.3343e7, -12.0, 0.25, 9.9e5] {
            let rho = rho_of_x(&m, x);
            assert!((x_of_rho(&m, rho) - x).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn parity_structure() {
        let m = g01();
        for &rho in linspace(0.0, 500.0, 101).iter() {
            let p = eval_g(&m, rho);
            let n = eval_g(&m, -rho);
            assert!((p.g + n.g).abs() <= 1e-14 * (1.0 + p.g.abs()));
            assert!((p.g1 - n.g1).abs() <= 1e-14);
            assert!((p.g2 + n.g2).abs() <= 1e-14);
            assert!((p.g3 - n.g3).abs() <= 1e-14);
        }
    }

    #[test]
    fn conditions_pass_for_reference_width() {
        let grid = linspace(-1000.0, 1000.0, 4001);
        let rep = check_g_conditions(&g01(), &grid).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.first_failure());
        // far-region envelope is tight for g'
        let detail = &rep.get("envelope-g1").unwrap().detail;
        assert!(detail.contains("spread"), "{detail}");
    }

    #[test]
    fn unbounded_weight_fails_boundedness() {
        struct Identity;
        impl SmoothWeight for Identity {
            fn eval(&self, rho: f64) -> GSample {
                GSample {
                    rho,
                    g: rho,
                    g1: 1.0,
                    g2: 0.0,
                    g3: 0.0,
                }
            }
        }
        let grid = linspace(-1000.0, 1000.0, 2001);
        let rep =
            check_weight_conditions(&Identity, &grid, &WeightCheckOptions::default()).unwrap();
        assert!(!rep.get("bounded").unwrap().passed);
    }

    #[test]
    fn envelope_flags_unreached_asymptotics() {
        // b rho^2 stays < 0.01 over the whole grid: far from the tail regime
        let m = MultiplierG::new(1e-8).unwrap();
        let grid = linspace(-1000.0, 1000.0, 2001);
        let rep = check_g_conditions(&m, &grid).unwrap();
        let env = rep.get("envelope-g1").unwrap();
        assert!(!env.passed);
        assert!(env.detail.contains("rho_asym"), "{}", env.detail);
    }

    /// Sign structure feeding Term III: g(ρ)·dV_L(ρ) ≤ 0 everywhere, since
    /// g changes sign where the angular potential peaks.
    #[test]
    fn g_times_dvl_nonpositive() {
        let m = g01();
        let schw = BackgroundModel::schwarzschild(1.0).unwrap();
        let wp = BackgroundModel::warped(Arc::new(QuadraticProfile { r0: 1.0 }), 3.0).unwrap();
        for model in [&schw, &wp] {
            for &rho in linspace(-300.0, 300.0, 1201).iter() {
                let g = eval_g(&m, rho).g;
                let dvl = geometry::sample_potentials(model, rho).dv_l;
                assert!(g * dvl <= 0.0, "rho = {rho}: g dV_L = {}", g * dvl);
            }
        }
    }
}
