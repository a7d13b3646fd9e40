//! Background geometry: the Schwarzschild exterior in tortoise coordinates
//! and spherically symmetric warped products, together with the potentials
//! V, V_L and the semilinear coefficient f they induce.
//!
//! All derivatives are analytic. Near the horizon the inversion works in the
//! horizon distance s = r - 2M (solved in log form), so the factor
//! 1 - 2M/r = s/r keeps full relative precision where r itself would round
//! to 2M.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::exec;
use crate::report::{ConditionCheck, ConditionReport, Witness};
use crate::{Error, Result};

/// Radius profile derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct ProfileDerivs {
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    pub d3r: f64,
}

/// Analytic radius profile r(ρ) of a warped-product background.
///
/// The third derivative is required: ∂ρV = r'''/r − r''r'/r² enters the
/// multiplier identity and the spectral ODE, and profiles are never
/// differenced numerically.
pub trait RadialProfile: Send + Sync {
    fn eval(&self, rho: f64) -> ProfileDerivs;
    fn name(&self) -> &'static str {
        "custom"
    }
}

/// r(ρ) = r0 + ρ², the model profile with a single closed geodesic surface.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticProfile {
    pub r0: f64,
}

impl RadialProfile for QuadraticProfile {
    fn eval(&self, rho: f64) -> ProfileDerivs {
        ProfileDerivs {
            r: self.r0 + rho * rho,
            dr: 2.0 * rho,
            d2r: 2.0,
            d3r: 0.0,
        }
    }
    fn name(&self) -> &'static str {
        "quadratic"
    }
}

/// r(ρ) = offset + cos ρ. Periodic, so the angular potential has critical
/// points at every multiple of π; exercises the checker's failure paths.
#[derive(Debug, Clone, Copy)]
pub struct CosineProfile {
    pub offset: f64,
}

impl RadialProfile for CosineProfile {
    fn eval(&self, rho: f64) -> ProfileDerivs {
        ProfileDerivs {
            r: self.offset + rho.cos(),
            dr: -rho.sin(),
            d2r: -rho.cos(),
            d3r: rho.sin(),
        }
    }
    fn name(&self) -> &'static str {
        "cosine"
    }
}

#[derive(Clone)]
pub enum ModelKind {
    /// Exterior Schwarzschild with mass M in tortoise coordinates.
    Schwarzschild { mass: f64 },
    /// Warped product with an analytic radius profile.
    WarpedProduct { profile: Arc<dyn RadialProfile> },
    /// V ≡ v0, V_L ≡ 0, f ≡ 0. Not a geometry; a fixture for free-wave and
    /// dispersion tests.
    Uniform { v0: f64 },
}

/// A background model together with the semilinearity exponent p.
#[derive(Clone)]
pub struct BackgroundModel {
    kind: ModelKind,
    p: f64,
}

impl fmt::Debug for BackgroundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::Schwarzschild { mass } => {
                write!(f, "Schwarzschild {{ mass: {mass}, p: {} }}", self.p)
            }
            ModelKind::WarpedProduct { profile } => {
                write!(f, "WarpedProduct {{ profile: {}, p: {} }}", profile.name(), self.p)
            }
            ModelKind::Uniform { v0 } => write!(f, "Uniform {{ v0: {v0} }}"),
        }
    }
}

impl BackgroundModel {
    /// Schwarzschild exterior with the cubic semilinearity (p = 3), the only
    /// exponent for which the reduction to the model equation is exact.
    pub fn schwarzschild(mass: f64) -> Result<Self> {
        Self::with_p(ModelKind::Schwarzschild { mass }, 3.0)
    }

    pub fn warped(profile: Arc<dyn RadialProfile>, p: f64) -> Result<Self> {
        Self::with_p(ModelKind::WarpedProduct { profile }, p)
    }

    pub fn uniform(v0: f64) -> Self {
        BackgroundModel {
            kind: ModelKind::Uniform { v0 },
            p: 3.0,
        }
    }

    /// Free wave fixture: all potentials vanish.
    pub fn flat() -> Self {
        Self::uniform(0.0)
    }

    pub fn with_p(kind: ModelKind, p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 3.0) {
            return Err(Error::Usage(format!("p = {p} outside (1, 3]")));
        }
        if let ModelKind::Schwarzschild { mass } = kind {
            if !(mass > 0.0) {
                return Err(Error::Usage(format!("mass = {mass} must be positive")));
            }
        }
        Ok(BackgroundModel { kind, p })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mass(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Schwarzschild { mass } => Some(mass),
            _ => None,
        }
    }

    fn require_mass(&self) -> Result<f64> {
        self.mass()
            .ok_or_else(|| Error::Usage("operation requires a Schwarzschild model".into()))
    }
}

/// Tortoise coordinate of the areal radius r > 2M:
/// ρ(r) = r − 3M + 2M ln((r − 2M)/M), normalized so ρ(3M) = 0.
pub fn rho_of_r(model: &BackgroundModel, r: f64) -> Result<f64> {
    let m = model.require_mass()?;
    if r <= 2.0 * m {
        return Err(Error::Domain(format!(
            "r = {r} is at or inside the horizon r = {}",
            2.0 * m
        )));
    }
    Ok(r - 3.0 * m + 2.0 * m * ((r - 2.0 * m) / m).ln())
}

/// Tortoise coordinate expressed in the horizon distance s = r − 2M.
/// Exact where r itself would round to 2M.
pub fn rho_of_horizon_distance(model: &BackgroundModel, s: f64) -> Result<f64> {
    let m = model.require_mass()?;
    if s <= 0.0 {
        return Err(Error::Domain(format!("horizon distance s = {s} must be positive")));
    }
    Ok(s - m + 2.0 * m * (s / m).ln())
}

/// Solve e^L + 2L = rho/M + 1 for L = ln(s/M). The left side is smooth,
/// strictly increasing and convex, so safeguarded Newton converges from the
/// asymptotic initial guesses for any finite rho.
fn solve_log_horizon(m: f64, rho: f64) -> f64 {
    let t = rho / m + 1.0;
    let h = |l: f64| l.exp() + 2.0 * l - t;

    let mut l = if t > 3.0 {
        t.ln()
    } else if t < -1.0 {
        0.5 * t
    } else {
        (t - 1.0) / 3.0
    };

    // Bracket the root for the bisection safeguard.
    let (mut lo, mut hi);
    if h(l) >= 0.0 {
        hi = l;
        lo = l - 1.0;
        let mut step = 2.0;
        while h(lo) > 0.0 {
            hi = lo;
            lo -= step;
            step *= 2.0;
        }
    } else {
        lo = l;
        hi = l + 1.0;
        let mut step = 2.0;
        while h(hi) < 0.0 {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
    }

    for _ in 0..100 {
        let el = l.exp();
        let hv = el + 2.0 * l - t;
        if hv.abs() <= 8.0 * f64::EPSILON * (el + 2.0 * l.abs() + t.abs() + 1.0) {
            break;
        }
        if hv > 0.0 {
            hi = l;
        } else {
            lo = l;
        }
        let mut next = l - hv / (el + 2.0);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == l {
            break;
        }
        l = next;
    }
    l
}

/// Horizon distance s(ρ) = r(ρ) − 2M at full relative precision.
pub fn horizon_distance(model: &BackgroundModel, rho: f64) -> Result<f64> {
    let m = model.require_mass()?;
    Ok(m * solve_log_horizon(m, rho).exp())
}

/// Areal radius r(ρ), the inverse of [`rho_of_r`]. A bijection from the real
/// line onto (2M, ∞); for ρ far below zero the result rounds to 2M, in which
/// case [`horizon_distance`] carries the information.
pub fn areal_radius(model: &BackgroundModel, rho: f64) -> Result<f64> {
    let m = model.require_mass()?;
    Ok(2.0 * m + horizon_distance(model, rho)?)
}

/// Round-trip defect |ρ(r(ρ)) − ρ| evaluated in the representation that is
/// exact at the given point: through r directly, or through the horizon
/// distance once s is small enough that r would round to 2M.
pub fn tortoise_round_trip_error(model: &BackgroundModel, rho: f64) -> Result<f64> {
    let m = model.require_mass()?;
    let s = horizon_distance(model, rho)?;
    let back = if s < 1e-3 * m {
        rho_of_horizon_distance(model, s)?
    } else {
        rho_of_r(model, 2.0 * m + s)?
    };
    Ok((back - rho).abs())
}

/// Potentials and their ρ-derivatives at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PotentialSample {
    pub rho: f64,
    pub r: f64,
    pub v: f64,
    pub dv: f64,
    pub v_l: f64,
    pub dv_l: f64,
    pub f: f64,
    pub df: f64,
}

/// Evaluate V, V_L, f and their ρ-derivatives.
///
/// Schwarzschild: V = (2M/r³)(1 − 2M/r), V_L = (1 − 2M/r)/r², with the
/// chain rule dX/dρ = (1 − 2M/r)·dX/dr. Warped product: V = r''/r,
/// V_L = r⁻². Both families satisfy f = V_L^((p−1)/2) by construction.
pub fn sample_potentials(model: &BackgroundModel, rho: f64) -> PotentialSample {
    let p = model.p();
    match model.kind() {
        ModelKind::Schwarzschild { mass } => {
            let m = *mass;
            let s = m * solve_log_horizon(m, rho).exp();
            let r = 2.0 * m + s;
            let fac = s / r; // 1 - 2M/r without cancellation
            let v = 2.0 * m / (r * r * r) * fac;
            let v_l = fac / (r * r);
            // dV/dr = (2M/r^5)(8M - 3r); dV_L/dr = (2/r^4)(3M - r).
            let dv_dr = 2.0 * m / r.powi(5) * (8.0 * m - 3.0 * r);
            let dvl_dr = 2.0 / r.powi(4) * (3.0 * m - r);
            let (f, df) = semilinear(v_l, fac * dvl_dr, p);
            PotentialSample {
                rho,
                r,
                v,
                dv: fac * dv_dr,
                v_l,
                dv_l: fac * dvl_dr,
                f,
                df,
            }
        }
        ModelKind::WarpedProduct { profile } => {
            let pd = profile.eval(rho);
            let r = pd.r;
            let v = pd.d2r / r;
            let dv = pd.d3r / r - pd.d2r * pd.dr / (r * r);
            let v_l = 1.0 / (r * r);
            let dv_l = -2.0 * pd.dr / (r * r * r);
            let (f, df) = semilinear(v_l, dv_l, p);
            PotentialSample {
                rho,
                r,
                v,
                dv,
                v_l,
                dv_l,
                f,
                df,
            }
        }
        ModelKind::Uniform { v0 } => PotentialSample {
            rho,
            r: 1.0,
            v: *v0,
            dv: 0.0,
            v_l: 0.0,
            dv_l: 0.0,
            f: 0.0,
            df: 0.0,
        },
    }
}

/// f = V_L^((p-1)/2) and its ρ-derivative. p = 3 short-circuits to f = V_L
/// so the Schwarzschild cubic case stays bit-exact.
fn semilinear(v_l: f64, dv_l: f64, p: f64) -> (f64, f64) {
    let q = 0.5 * (p - 1.0);
    if (q - 1.0).abs() < 1e-15 {
        (v_l, dv_l)
    } else if v_l == 0.0 {
        (0.0, 0.0)
    } else {
        (v_l.powf(q), q * v_l.powf(q - 1.0) * dv_l)
    }
}

/// Sample the potentials over a grid, in parallel when enabled.
pub fn sample_grid(model: &BackgroundModel, grid: &[f64]) -> Vec<PotentialSample> {
    exec::map(grid, |&rho| sample_potentials(model, rho))
}

/// Sequential twin of [`sample_grid`] for the benchmark suite.
pub fn sample_grid_seq(model: &BackgroundModel, grid: &[f64]) -> Vec<PotentialSample> {
    exec::map_seq(grid, |&rho| sample_potentials(model, rho))
}

/// Check the structural conditions on the potentials over a grid: positivity
/// of V and V_L, a unique angular-potential maximum at the trapped surface
/// ρ = 0, boundedness and decay of ∂ρV, and the semilinear coupling
/// f = V_L^((p−1)/2).
pub fn check_potential_conditions(
    model: &BackgroundModel,
    grid: &[f64],
) -> Result<ConditionReport> {
    if grid.is_empty() {
        return Err(Error::Usage("empty grid".into()));
    }
    if matches!(model.kind(), ModelKind::Uniform { .. }) {
        return Err(Error::Usage(
            "uniform fixture has no geometry to check".into(),
        ));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let samples = sample_grid(model, &sorted);
    let mut report = ConditionReport::default();

    report.push(ConditionCheck::pass(
        "radial",
        "potentials are functions of rho only by construction".into(),
    ));

    // Positivity of V and V_L (degenerating to zero only in the limits).
    let neg = samples.iter().find(|s| s.v < 0.0 || s.v_l < 0.0);
    match neg {
        Some(s) => report.push(ConditionCheck::fail(
            "positive-potentials",
            Some(Witness {
                rho: s.rho,
                value: s.v.min(s.v_l),
            }),
            "V or V_L negative on the grid".into(),
        )),
        None => report.push(ConditionCheck::pass(
            "positive-potentials",
            format!(
                "min V = {:.3e}, min V_L = {:.3e} over {} points",
                samples.iter().map(|s| s.v).fold(f64::INFINITY, f64::min),
                samples.iter().map(|s| s.v_l).fold(f64::INFINITY, f64::min),
                samples.len()
            ),
        )),
    }

    // Warped products additionally need r > 0 everywhere sampled.
    if matches!(model.kind(), ModelKind::WarpedProduct { .. }) {
        match samples.iter().find(|s| s.r <= 0.0) {
            Some(s) => report.push(ConditionCheck::fail(
                "positive-radius",
                Some(Witness {
                    rho: s.rho,
                    value: s.r,
                }),
                "radius profile not positive everywhere".into(),
            )),
            None => report.push(ConditionCheck::pass(
                "positive-radius",
                "r > 0 on the grid".into(),
            )),
        }
    }

    // Unique critical point of V_L, a maximum at rho = 0: dV_L changes sign
    // from + to - exactly once, within one grid cell of the origin.
    report.push(check_trapping(&sorted, &samples));

    // dV bounded with decay at the grid endpoints.
    let sup_dv = samples.iter().map(|s| s.dv.abs()).fold(0.0, f64::max);
    let edge = samples[0]
        .dv
        .abs()
        .max(samples[samples.len() - 1].dv.abs());
    if !sup_dv.is_finite() {
        let s = samples.iter().find(|s| !s.dv.is_finite()).unwrap();
        report.push(ConditionCheck::fail(
            "dv-bounded-decaying",
            Some(Witness {
                rho: s.rho,
                value: s.dv,
            }),
            "dV not finite".into(),
        ));
    } else if edge > 1e-3 * sup_dv {
        report.push(ConditionCheck::fail(
            "dv-bounded-decaying",
            Some(Witness {
                rho: sorted[sorted.len() - 1],
                value: edge,
            }),
            format!("|dV| at the grid edge is {edge:.3e}, sup is {sup_dv:.3e}; no decay"),
        ));
    } else {
        report.push(ConditionCheck::pass(
            "dv-bounded-decaying",
            format!("sup |dV| = {sup_dv:.3e}, edge value {edge:.3e}"),
        ));
    }

    // Semilinear coupling, re-evaluated independently of the cached f.
    let q = 0.5 * (model.p() - 1.0);
    let coupling = samples.iter().find(|s| {
        let want = if s.v_l == 0.0 { 0.0 } else { s.v_l.powf(q) };
        (s.f - want).abs() > 1e-12 * want.abs().max(1.0)
    });
    match coupling {
        Some(s) => report.push(ConditionCheck::fail(
            "semilinear-coupling",
            Some(Witness {
                rho: s.rho,
                value: s.f,
            }),
            "f deviates from V_L^((p-1)/2)".into(),
        )),
        None => report.push(ConditionCheck::pass(
            "semilinear-coupling",
            "f = V_L^((p-1)/2) to 1e-12 pointwise".into(),
        )),
    }

    Ok(report)
}

fn check_trapping(grid: &[f64], samples: &[PotentialSample]) -> ConditionCheck {
    let name = "unique-trapping-maximum";
    let cell = cell_width(grid);
    // dV_L may only vanish next to the trapped surface
    if let Some(z) = samples
        .iter()
        .find(|s| s.dv_l == 0.0 && s.rho.abs() > cell)
    {
        return ConditionCheck::fail(
            name,
            Some(Witness {
                rho: z.rho,
                value: 0.0,
            }),
            "dV_L vanishes away from the trapped surface".into(),
        );
    }
    let last_pos = samples.iter().rposition(|s| s.dv_l > 0.0);
    let first_neg = samples.iter().position(|s| s.dv_l < 0.0);
    match (last_pos, first_neg) {
        (Some(lp), Some(fneg)) if lp < fneg => {
            let (lo, hi) = (samples[lp].rho, samples[fneg].rho);
            if lo <= cell && hi >= -cell {
                ConditionCheck::pass(
                    name,
                    format!("dV_L changes sign once, + to -, inside [{lo:.3e}, {hi:.3e}]"),
                )
            } else {
                ConditionCheck::fail(
                    name,
                    Some(Witness {
                        rho: lo,
                        value: samples[lp].dv_l,
                    }),
                    "the sign change of dV_L is not at the origin".into(),
                )
            }
        }
        (Some(_), Some(fneg)) => ConditionCheck::fail(
            name,
            Some(Witness {
                rho: samples[fneg].rho,
                value: samples[fneg].dv_l,
            }),
            "multiple critical points of V_L on the grid".into(),
        ),
        _ => ConditionCheck::fail(
            name,
            None,
            "dV_L does not change sign from + to - on the grid".into(),
        ),
    }
}

fn cell_width(grid: &[f64]) -> f64 {
    grid.windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{linspace, quad};
    use approx::assert_relative_eq;

    fn schw() -> BackgroundModel {
        BackgroundModel::schwarzschild(1.0).unwrap()
    }

    #[test]
    fn tortoise_zero_at_photon_sphere() {
        assert_eq!(rho_of_r(&schw(), 3.0).unwrap(), 0.0);
        assert_eq!(areal_radius(&schw(), 0.0).unwrap(), 3.0);
    }

    #[test]
    fn tortoise_closed_form_matches_quadrature() {
        // independent oracle: integrate dr/(1 - 2M/r) from 3 to 4
        let oracle = quad::adaptive_simpson(|r| 1.0 / (1.0 - 2.0 / r), 3.0, 4.0, 1e-14);
        let v = rho_of_r(&schw(), 4.0).unwrap();
        assert_relative_eq!(v, 1.0 + 2.0 * 2.0f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(v, oracle, epsilon = 1e-11);
    }

    #[test]
    fn tortoise_diverges_logarithmically_at_horizon() {
        let r = 2.0 + 1e-9;
        let v = rho_of_r(&schw(), r).unwrap();
        // ~ -1 + 2 ln(1e-9); the loose tolerance absorbs the rounding of r
        assert_relative_eq!(v, -1.0 + 2.0 * 1e-9f64.ln(), max_relative = 1e-4);
        // against the representable horizon distance the map is exact
        let s = r - 2.0;
        assert_relative_eq!(v, s - 1.0 + 2.0 * s.ln(), epsilon = 1e-13);
        assert!(rho_of_r(&schw(), 2.0).is_err());
        assert!(rho_of_r(&schw(), 1.5).is_err());
    }

    #[test]
    fn areal_radius_inverts_the_closed_form() {
        let m = schw();
        let r = areal_radius(&m, 1.0 + 2.0 * 2.0f64.ln()).unwrap();
        assert_relative_eq!(r, 4.0, epsilon = 1e-10);
        // far field: r ~ rho - 2 ln rho + 3
        let r = areal_radius(&m, 1000.0).unwrap();
        assert!(r / 1000.0 > 0.98 && r / 1000.0 < 1.01, "r = {r}");
        assert_relative_eq!(rho_of_r(&m, r).unwrap(), 1000.0, epsilon = 1e-9);
    }

    #[test]
    fn round_trip_over_working_domain() {
        let m = schw();
        for &rho in linspace(-50.0, 1000.0, 421).iter() {
            let err = tortoise_round_trip_error(&m, rho).unwrap();
            assert!(
                err <= 1e-10 * (1.0 + rho.abs()),
                "rho = {rho}, err = {err:.3e}"
            );
        }
        // the shifted variable stays accurate deep into the horizon region
        for &rho in linspace(-1000.0, -50.0, 96).iter() {
            let err = tortoise_round_trip_error(&m, rho).unwrap();
            assert!(err <= 1e-10 * (1.0 + rho.abs()));
        }
    }

    #[test]
    fn areal_radius_strictly_increasing() {
        let m = schw();
        let grid = linspace(-200.0, 200.0, 1601);
        let mut prev = f64::NEG_INFINITY;
        for &rho in &grid {
            let s = horizon_distance(&m, rho).unwrap();
            assert!(s > prev, "not increasing at rho = {rho}");
            prev = s;
        }
    }

    #[test]
    fn potentials_at_the_trapped_surface() {
        let s = sample_potentials(&schw(), 0.0);
        assert_relative_eq!(s.v, 2.0 / 81.0, epsilon = 1e-15);
        assert_relative_eq!(s.v_l, 1.0 / 27.0, epsilon = 1e-15);
        // trapping: dV_L vanishes exactly at r = 3M
        assert!(s.dv_l.abs() <= 1e-12, "dv_l = {:e}", s.dv_l);
        assert_eq!(s.f, s.v_l); // p = 3
    }

    #[test]
    fn warped_quadratic_potentials() {
        let m = BackgroundModel::warped(Arc::new(QuadraticProfile { r0: 1.0 }), 3.0).unwrap();
        let s = sample_potentials(&m, 0.0);
        assert_eq!(s.v, 2.0);
        assert_eq!(s.v_l, 1.0);
        assert_eq!(s.dv_l, 0.0);
        let s1 = sample_potentials(&m, 2.0);
        assert_relative_eq!(s1.v, 2.0 / 5.0, epsilon = 1e-15);
        assert_relative_eq!(s1.dv, -4.0 * 2.0 / 25.0, epsilon = 1e-15);
    }

    /// Analytic derivatives agree with centered differences at O(h^2):
    /// Richardson ratio of the defect under h -> h/2 is close to 4.
    #[test]
    fn derivative_consistency_richardson() {
        let m = schw();
        for &rho in &[-5.0, -1.0, 0.7, 3.0, 25.0] {
            for (get, getd) in [
                (
                    (|s: &PotentialSample| s.v) as fn(&PotentialSample) -> f64,
                    (|s: &PotentialSample| s.dv) as fn(&PotentialSample) -> f64,
                ),
                (|s| s.v_l, |s| s.dv_l),
                (|s| s.f, |s| s.df),
            ] {
                let d = getd(&sample_potentials(&m, rho));
                let fd = |h: f64| {
                    (get(&sample_potentials(&m, rho + h)) - get(&sample_potentials(&m, rho - h)))
                        / (2.0 * h)
                };
                let e1 = (fd(1e-3) - d).abs();
                let e2 = (fd(5e-4) - d).abs();
                if e1 > 1e-13 * d.abs().max(1e-3) {
                    let ratio = e1 / e2;
                    assert!(
                        (3.5..4.5).contains(&ratio),
                        "rho = {rho}: ratio {ratio}, e1 = {e1:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn horizon_decay_is_exponential() {
        let m = schw();
        // V(rho-1)/V(rho) approx exp(-1/2M) below rho = -30
        let mut ratios = Vec::new();
        for &rho in &[-30.0, -40.0, -60.0, -100.0] {
            let a = sample_potentials(&m, rho - 1.0);
            let b = sample_potentials(&m, rho);
            assert!(a.v > 0.0 && a.v_l > 0.0 && a.f > 0.0);
            assert!(a.v < b.v);
            ratios.push(a.v / b.v);
        }
        for r in &ratios {
            assert!(*r > 0.5 && *r < 0.7, "ratio {r}");
        }
        for w in ratios.windows(2) {
            assert!((w[0] - w[1]).abs() < 0.02);
        }
    }

    #[test]
    fn conditions_pass_on_schwarzschild_and_quadratic() {
        let grid = linspace(-1000.0, 1000.0, 4001);
        let rep = check_potential_conditions(&schw(), &grid).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.first_failure());

        let wp = BackgroundModel::warped(Arc::new(QuadraticProfile { r0: 1.0 }), 3.0).unwrap();
        let rep = check_potential_conditions(&wp, &grid).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.first_failure());
    }

    #[test]
    fn cosine_profile_fails_trapping_with_witness() {
        let m = BackgroundModel::warped(Arc::new(CosineProfile { offset: 2.0 }), 3.0).unwrap();
        let grid = linspace(-30.0, 30.0, 1201);
        let rep = check_potential_conditions(&m, &grid).unwrap();
        assert!(!rep.all_passed());
        let fail = rep.get("unique-trapping-maximum").unwrap();
        assert!(!fail.passed);
        assert!(fail.witness.is_some());
    }

    #[test]
    fn empty_grid_is_a_usage_error() {
        assert!(matches!(
            check_potential_conditions(&schw(), &[]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BackgroundModel::schwarzschild(0.0).is_err());
        assert!(BackgroundModel::schwarzschild(-1.0).is_err());
        assert!(
            BackgroundModel::with_p(ModelKind::Schwarzschild { mass: 1.0 }, 1.0).is_err()
        );
        assert!(
            BackgroundModel::with_p(ModelKind::Schwarzschild { mass: 1.0 }, 3.5).is_err()
        );
    }
}
