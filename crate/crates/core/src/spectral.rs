//! Certification of the positivity condition behind the multiplier estimate.
//!
//! The object of interest is the operator
//!
//! ```text
//! A = -(2 - eps1) d/dρ g' d/dρ  -  g'''/2  -  g V'  -  eps1 χ₁
//! ```
//!
//! Nonnegativity of its quadratic form follows from the existence of an
//! everywhere-positive solution of A ψ = 0 (ground-state transform). That
//! solution is produced by shooting from the truncation radius ρ₀ down to
//! −ρ₀ with an initial slope read off the slower power-law solution of the
//! limiting operator, and the continuation into the uncomputed tails is
//! guaranteed by a matching inequality on the endpoint slope. A symmetric
//! tridiagonal discretization of A provides an independent eigenvalue
//! cross-check.

use serde::Serialize;

use crate::geometry::{self, BackgroundModel};
use crate::multiplier::{self, MultiplierG, SmoothWeight};
use crate::ode::Dopri5;
use crate::{exec, quad, tridiag, Error, Result};

/// State magnitude at which the shooting loop renormalizes.
const RENORM_LIMIT: f64 = 1e150;

/// The localizer χ₁. Defaults to zero; a smooth compactly supported bump of
/// unit height is available for quadratic-form experiments.
#[derive(Debug, Clone, Copy)]
pub enum Chi1 {
    Zero,
    Bump { lo: f64, hi: f64 },
}

impl Chi1 {
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            Chi1::Zero => 0.0,
            Chi1::Bump { lo, hi } => {
                let t = (2.0 * rho - (lo + hi)) / (hi - lo);
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
        }
    }
}

/// The canonical second-order operator −k ∂ρ(w ∂ρ ψ) + Q ψ that all
/// verification routines work with. [`SpectralProblem`] implements it with
/// k = 2−ε₁, w = g', Q = −(g‴/2 + gV′ + ε₁χ₁); toy problems in tests plug
/// in their own coefficients so the shooting solver and the eigenvalue
/// oracle can be exercised against each other on the same operator.
pub trait SturmOperator: Sync {
    fn kinetic(&self) -> f64;
    /// The weight and its derivative, (w, w').
    fn weight(&self, rho: f64) -> (f64, f64);
    /// The multiplication part Q of the operator.
    fn potential(&self, rho: f64) -> f64;

    /// ψ'' from A ψ = 0 expanded in ρ.
    fn psi_dd(&self, rho: f64, psi: f64, dpsi: f64) -> f64 {
        let k = self.kinetic();
        let (w, dw) = self.weight(rho);
        (self.potential(rho) * psi - k * dw * dpsi) / (k * w)
    }
}

#[derive(Clone)]
pub struct SpectralProblem {
    pub model: BackgroundModel,
    pub mult: MultiplierG,
    pub eps1: f64,
    pub chi1: Chi1,
    pub rho0: f64,
}

impl SpectralProblem {
    pub fn new(
        model: BackgroundModel,
        mult: MultiplierG,
        eps1: f64,
        chi1: Chi1,
        rho0: f64,
    ) -> Result<Self> {
        if !(eps1 > 0.0 && eps1 < 2.0) {
            return Err(Error::Usage(format!(
                "eps1 = {eps1} outside (0, 2); the kinetic coefficient 2 - eps1 must stay positive"
            )));
        }
        if !(rho0 > 0.0) {
            return Err(Error::Usage(format!("rho0 = {rho0} must be positive")));
        }
        Ok(SpectralProblem {
            model,
            mult,
            eps1,
            chi1,
            rho0,
        })
    }

    /// ε of the matching analysis: the relative width of the band pinching
    /// g′g‴ around its power-law model at the truncation radius.
    pub fn matching_eps(&self) -> f64 {
        2.0 / (1.0 + self.mult.b() * self.rho0 * self.rho0)
    }

    /// ε′ = 3ε; the power-law exponents are trustworthy for ε′ < 1/100.
    pub fn eps_prime(&self) -> f64 {
        3.0 * self.matching_eps()
    }

    pub fn asymptotics_valid(&self) -> bool {
        self.eps_prime() < 0.01
    }
}

impl SturmOperator for SpectralProblem {
    fn kinetic(&self) -> f64 {
        2.0 - self.eps1
    }

    fn weight(&self, rho: f64) -> (f64, f64) {
        let s = self.mult.eval(rho);
        (s.g1, s.g2)
    }

    fn potential(&self, rho: f64) -> f64 {
        let s = self.mult.eval(rho);
        let pot = geometry::sample_potentials(&self.model, rho);
        -(0.5 * s.g3 + s.g * pot.dv + self.eps1 * self.chi1.eval(rho))
    }
}

/// ψ'' of A ψ = 0 at a point. Errors when the weight is not positive there
/// (a broken increasing-weight condition).
pub fn ode_rhs(prob: &SpectralProblem, rho: f64, psi: f64, dpsi: f64) -> Result<f64> {
    let (w, _) = prob.weight(rho);
    if w <= 0.0 {
        return Err(Error::Numerical(format!(
            "g'({rho}) = {w} is not positive; the multiplier weight must be increasing"
        )));
    }
    Ok(prob.psi_dd(rho, psi, dpsi))
}

/// Exponents of the power-law solutions x^α of the limiting operator
/// −2∂ₓ² − (1+ε′)/(3x²), larger first. Real for ε′ ≤ 1/2.
pub fn asymptotic_exponents(eps_prime: f64) -> Result<(f64, f64)> {
    if eps_prime < 0.0 {
        return Err(Error::Usage("eps_prime must be nonnegative".into()));
    }
    let disc = 4.0 - (8.0 + 8.0 * eps_prime) / 3.0;
    if disc < 0.0 {
        return Err(Error::Usage(format!(
            "eps_prime = {eps_prime} exceeds 1/2; the exponents turn complex"
        )));
    }
    let root = disc.sqrt();
    Ok((0.5 + 0.25 * root, 0.5 - 0.25 * root))
}

fn alpha2() -> f64 {
    asymptotic_exponents(0.0).unwrap().1
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    pub rho: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub scale_log: f64,
}

impl TrajectorySample {
    /// True value, saturating if the accumulated scale overflows f64 range.
    pub fn psi_reconstructed(&self) -> f64 {
        let factor = self.scale_log.exp();
        if factor.is_infinite() {
            self.psi.signum() * f64::MAX
        } else {
            self.psi * factor
        }
    }

    pub fn dpsi_reconstructed(&self) -> f64 {
        let factor = self.scale_log.exp();
        if factor.is_infinite() {
            self.dpsi.signum() * f64::MAX
        } else {
            self.dpsi * factor
        }
    }
}

/// Dense samples of the shooting solution, ascending in ρ. Stored values are
/// the renormalized state; the true solution is value × exp(scale_log), and
/// renormalization preserves signs, so positivity can be read off directly.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Final accumulated renormalization (zero unless the state exceeded
    /// 1e150 somewhere).
    pub scale_log: f64,
}

impl Trajectory {
    /// (positive everywhere on the samples, minimum reconstructed value).
    pub fn positivity(&self) -> (bool, f64) {
        let mut positive = true;
        let mut min = f64::INFINITY;
        for s in &self.samples {
            if s.psi <= 0.0 {
                positive = false;
            }
            min = min.min(s.psi_reconstructed());
        }
        (positive, min)
    }

    /// Leftmost sample (ρ = −ρ₀ for a full shot).
    pub fn left(&self) -> &TrajectorySample {
        self.samples.first().expect("empty trajectory")
    }

    pub fn right(&self) -> &TrajectorySample {
        self.samples.last().expect("empty trajectory")
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rho,psi,dpsi,scale_log")?;
        for s in &self.samples {
            writeln!(out, "{},{},{},{}", s.rho, s.psi, s.dpsi, s.scale_log)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub margin: f64,
    /// Spacing of the dense output samples.
    pub resolution: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            margin: 2.0,
            resolution: 0.25,
            rtol: 1e-10,
            atol: 1e-14,
        }
    }
}

/// Integrate A ψ = 0 from ρ₀ down to −ρ₀ with ψ(ρ₀) = 1 and
/// ψ'(ρ₀) = margin · α₂ · 3/ρ₀, the initial slope that saturates the
/// right-end matching inequality with the given margin.
pub fn shoot(prob: &SpectralProblem, margin: f64) -> Result<Trajectory> {
    if margin < 1.0 {
        return Err(Error::Usage(format!(
            "margin = {margin} below 1: the initial slope would undercut the matching condition"
        )));
    }
    shoot_with_options(prob, &ShootOptions {
        margin,
        ..ShootOptions::default()
    })
}

pub fn shoot_with_options(prob: &SpectralProblem, opts: &ShootOptions) -> Result<Trajectory> {
    shoot_operator(prob, prob.rho0, opts)
}

/// Shooting on a generic operator; `opts.margin` may be any value here
/// (toy problems use 0 for a constant solution).
pub fn shoot_operator(
    op: &impl SturmOperator,
    rho0: f64,
    opts: &ShootOptions,
) -> Result<Trajectory> {
    let slope = opts.margin * alpha2() * 3.0 / rho0;
    let rhs = |rho: f64, y: &[f64; 2]| [y[1], op.psi_dd(rho, y[0], y[1])];
    let mut solver = Dopri5::new(rhs, rho0, [1.0, slope], -1e-2, opts.rtol, opts.atol);

    let target = -rho0;
    let res = opts.resolution;
    let mut scale_log = 0.0_f64;
    let mut samples = Vec::with_capacity((2.0 * rho0 / res) as usize + 2);
    samples.push(TrajectorySample {
        rho: rho0,
        psi: 1.0,
        dpsi: slope,
        scale_log,
    });
    let mut next = rho0 - res;

    while solver.t() > target {
        solver.step_towards(target)?;
        let t_new = solver.t();
        while next >= t_new && next > target {
            let y = solver.dense(next);
            samples.push(TrajectorySample {
                rho: next,
                psi: y[0],
                dpsi: y[1],
                scale_log,
            });
            next -= res;
        }
        let y = *solver.y();
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Integration {
                last_rho: t_new,
                reason: "state is not finite".into(),
            });
        }
        let mag = y[0].abs().max(y[1].abs());
        if mag > RENORM_LIMIT {
            scale_log += mag.ln();
            solver.set_state([y[0] / mag, y[1] / mag]);
        }
    }
    let y = *solver.y();
    samples.push(TrajectorySample {
        rho: target,
        psi: y[0],
        dpsi: y[1],
        scale_log,
    });
    samples.reverse();
    Ok(Trajectory {
        samples,
        scale_log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Endpoint slope threshold of the matching inequality. On the right the
/// test is ψ'(ρ₀) ≥ threshold; on the left the signs reverse (growth toward
/// −∞ requires a sufficiently negative slope) and the test is
/// ψ'(−ρ₀) ≤ threshold.
pub fn matching_threshold(
    side: Side,
    psi_end: f64,
    rho0: f64,
    eps: f64,
    margin: f64,
) -> Result<f64> {
    if psi_end <= 0.0 {
        return Err(Error::Numerical(
            "matching threshold undefined: endpoint value is not positive".into(),
        ));
    }
    if !(rho0 > 0.0) {
        return Err(Error::Usage("rho0 must be positive".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Usage(format!("eps = {eps} outside [0, 1)")));
    }
    let base = margin / (1.0 - eps) * alpha2() * psi_end * 3.0 / rho0;
    Ok(match side {
        Side::Right => base,
        Side::Left => -base,
    })
}

/// Outcome of the positivity verification.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityCertificate {
    pub positive_everywhere: bool,
    pub min_psi: f64,
    pub psi_left: f64,
    pub dpsi_left: f64,
    /// Left matching threshold at the configured margin (the authoritative
    /// test).
    pub threshold_left: f64,
    /// Same threshold at margin 1, recorded for reference.
    pub threshold_left_base: f64,
    pub matching_left_ok: bool,
    pub psi_right: f64,
    pub dpsi_right: f64,
    pub threshold_right: f64,
    pub matching_right_ok: bool,
    pub matching_eps: f64,
    pub eps_prime: f64,
    /// Whether ε′ < 1/100 so the power-law matching analysis applies at this
    /// truncation radius.
    pub asymptotics_valid: bool,
    pub oracle_min_eigenvalue: Option<f64>,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub margin: f64,
    pub resolution: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Attach the discretized minimum eigenvalue on this many interior
    /// nodes.
    pub oracle_n: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            margin: 2.0,
            resolution: 0.25,
            rtol: 1e-10,
            atol: 1e-14,
            oracle_n: None,
        }
    }
}

/// Shoot and certify with the default tolerances.
pub fn verify_condition11(prob: &SpectralProblem, margin: f64) -> Result<PositivityCertificate> {
    let (cert, _) = verify_with_options(prob, &VerifyOptions {
        margin,
        ..VerifyOptions::default()
    })?;
    Ok(cert)
}

/// Shoot and certify, returning the trajectory alongside the certificate.
pub fn verify_with_options(
    prob: &SpectralProblem,
    opts: &VerifyOptions,
) -> Result<(PositivityCertificate, Trajectory)> {
    let traj = shoot_with_options(prob, &ShootOptions {
        margin: opts.margin,
        resolution: opts.resolution,
        rtol: opts.rtol,
        atol: opts.atol,
    })?;
    let cert = certify(prob, &traj, opts)?;
    Ok((cert, traj))
}

/// Evaluate the certificate checks on an existing trajectory.
///
/// The configured margin scales the imposed initial slope and the left-end
/// test, matching how the run was set up; the right-end test uses the bare
/// (margin 1) necessary threshold, which the initial condition then clears
/// with margin·(1−ε) ≥ 1 of headroom.
pub fn certify(
    prob: &SpectralProblem,
    traj: &Trajectory,
    opts: &VerifyOptions,
) -> Result<PositivityCertificate> {
    let (positive, min_psi) = traj.positivity();
    let left = traj.left();
    let right = traj.right();
    let eps = prob.matching_eps();

    // Matching decisions run on stored (renormalized) values: threshold and
    // slope share the scale factor, so the inequality is unaffected.
    let (matching_left_ok, thr_left, thr_left_base) = if left.psi > 0.0 {
        let thr_stored = matching_threshold(Side::Left, left.psi, prob.rho0, eps, opts.margin)?;
        let ok = left.dpsi <= thr_stored;
        let recon = left.psi_reconstructed();
        (
            ok,
            matching_threshold(Side::Left, recon, prob.rho0, eps, opts.margin)?,
            matching_threshold(Side::Left, recon, prob.rho0, eps, 1.0)?,
        )
    } else {
        (false, f64::NAN, f64::NAN)
    };
    let (matching_right_ok, thr_right) = if right.psi > 0.0 {
        let thr = matching_threshold(Side::Right, right.psi, prob.rho0, eps, 1.0)?;
        (right.dpsi >= thr, thr)
    } else {
        (false, f64::NAN)
    };

    let oracle = match opts.oracle_n {
        Some(n) => Some(
            discretized_min_eigenvalue(prob, n, (-prob.rho0, prob.rho0))?.value,
        ),
        None => None,
    };

    let asymptotics_valid = prob.asymptotics_valid();
    Ok(PositivityCertificate {
        positive_everywhere: positive,
        min_psi,
        psi_left: left.psi_reconstructed(),
        dpsi_left: left.dpsi_reconstructed(),
        threshold_left: thr_left,
        threshold_left_base: thr_left_base,
        matching_left_ok,
        psi_right: right.psi_reconstructed(),
        dpsi_right: right.dpsi_reconstructed(),
        threshold_right: thr_right,
        matching_right_ok,
        matching_eps: eps,
        eps_prime: prob.eps_prime(),
        asymptotics_valid,
        oracle_min_eigenvalue: oracle,
        verified: positive && matching_left_ok && matching_right_ok && asymptotics_valid,
    })
}

/// The Schrödinger-form potential W(x) = g′(ρ(x))·Q(ρ(x)) after the
/// flattening change of variables; W → 0 as x → ±∞.
pub fn potential_w(prob: &SpectralProblem, x: f64) -> f64 {
    let rho = multiplier::rho_of_x(&prob.mult, x);
    let (w, _) = prob.weight(rho);
    w * prob.potential(rho)
}

#[derive(Debug, Clone, Copy)]
pub struct FormValue {
    pub value: f64,
    /// False when the support pokes beyond the certified window [−ρ₀, ρ₀].
    pub support_certified: bool,
}

/// Quadratic form ⟨ψ, Aψ⟩ = ∫ (2−ε₁) g′ |ψ′|² + Q |ψ|² dρ of a test
/// function given as ρ ↦ (value, derivative), by adaptive quadrature.
pub fn quadratic_form_value(
    prob: &SpectralProblem,
    test: impl Fn(f64) -> (f64, f64),
    support: (f64, f64),
) -> Result<FormValue> {
    let (a, b) = support;
    if !(b > a) {
        return Err(Error::Usage("empty support interval".into()));
    }
    let k = prob.kinetic();
    let integrand = |rho: f64| {
        let (v, dv) = test(rho);
        let (w, _) = prob.weight(rho);
        k * w * dv * dv + prob.potential(rho) * v * v
    };
    // scale-aware absolute tolerance for the adaptive pass
    let mut scale = 0.0_f64;
    for i in 0..=16 {
        let rho = a + (b - a) * i as f64 / 16.0;
        scale = scale.max(integrand(rho).abs());
    }
    let tol = 1e-13 * (scale * (b - a)).max(1e-30);
    let value = quad::adaptive_simpson(integrand, a, b, tol);
    Ok(FormValue {
        value,
        support_certified: a >= -prob.rho0 && b <= prob.rho0,
    })
}

/// Result of the discretized eigenvalue oracle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleEigenvalue {
    pub value: f64,
    pub spacing: f64,
    /// Heuristic: spacing ≤ 0.1 resolves the central potential well.
    pub well_resolved: bool,
}

/// Smallest eigenvalue of the symmetric tridiagonal discretization of A
/// with Dirichlet ends, assembled in flux form on a uniform ρ-grid with `n`
/// interior nodes. Dirichlet truncation only raises the spectrum, so a
/// nonnegative result is consistent with the certificate while a clearly
/// negative one refutes it.
pub fn discretized_min_eigenvalue(
    prob: &SpectralProblem,
    n: usize,
    domain: (f64, f64),
) -> Result<OracleEigenvalue> {
    if domain.0 < -prob.rho0 - 1e-9 || domain.1 > prob.rho0 + 1e-9 {
        return Err(Error::Usage(format!(
            "oracle domain [{}, {}] exceeds the certified window [-{}, {}]",
            domain.0, domain.1, prob.rho0, prob.rho0
        )));
    }
    discretized_min_eigenvalue_operator(prob, n, domain)
}

/// Oracle on a generic operator (toy problems included).
pub fn discretized_min_eigenvalue_operator(
    op: &impl SturmOperator,
    n: usize,
    domain: (f64, f64),
) -> Result<OracleEigenvalue> {
    if n < 100 {
        return Err(Error::Usage(format!("oracle needs n >= 100, got {n}")));
    }
    let (diag, off, h) = assemble_operator(op, domain, n);
    let value = tridiag::smallest_eigenvalue(&diag, &off);
    Ok(OracleEigenvalue {
        value,
        spacing: h,
        well_resolved: h <= 0.1,
    })
}

/// Flux-form assembly: kinetic part −k·D⁻(w_{i+1/2} D⁺) with the weight at
/// cell midpoints, potential on the diagonal. Returns (diag, off, spacing).
pub fn assemble_operator(
    op: &impl SturmOperator,
    domain: (f64, f64),
    n: usize,
) -> (Vec<f64>, Vec<f64>, f64) {
    let (a, b) = domain;
    let h = (b - a) / (n as f64 + 1.0);
    let k = op.kinetic();
    let mids: Vec<f64> = (0..=n).map(|i| a + (i as f64 + 0.5) * h).collect();
    let w_mid = exec::map(&mids, |&rho| op.weight(rho).0);
    let nodes: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
    let q = exec::map(&nodes, |&rho| op.potential(rho));
    build_tridiag(k, &w_mid, &q, h)
}

/// Sequential twin of [`assemble_operator`] for the benchmark suite.
pub fn assemble_operator_seq(
    op: &impl SturmOperator,
    domain: (f64, f64),
    n: usize,
) -> (Vec<f64>, Vec<f64>, f64) {
    let (a, b) = domain;
    let h = (b - a) / (n as f64 + 1.0);
    let k = op.kinetic();
    let mids: Vec<f64> = (0..=n).map(|i| a + (i as f64 + 0.5) * h).collect();
    let w_mid = exec::map_seq(&mids, |&rho| op.weight(rho).0);
    let nodes: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
    let q = exec::map_seq(&nodes, |&rho| op.potential(rho));
    build_tridiag(k, &w_mid, &q, h)
}

fn build_tridiag(k: f64, w_mid: &[f64], q: &[f64], h: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let n = q.len();
    let h2 = h * h;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n {
        diag.push(k * (w_mid[i] + w_mid[i + 1]) / h2 + q[i]);
        if i + 1 < n {
            off.push(-k * w_mid[i + 1] / h2);
        }
    }
    (diag, off, h)
}

/// Hermite evaluation of a trajectory between its samples. ψ uses the
/// stored slopes; ψ′ uses second derivatives recomputed from the operator,
/// so both channels interpolate at fourth order.
pub fn eval_trajectory(
    op: &impl SturmOperator,
    traj: &Trajectory,
    rho: f64,
) -> Result<(f64, f64)> {
    let s = &traj.samples;
    if s.len() < 2 || rho < s[0].rho || rho > s[s.len() - 1].rho {
        return Err(Error::Usage(format!(
            "rho = {rho} outside the trajectory range"
        )));
    }
    let idx = match s.binary_search_by(|smp| smp.rho.partial_cmp(&rho).unwrap()) {
        Ok(i) => return Ok((s[i].psi, s[i].dpsi)),
        Err(i) => i - 1,
    };
    let l = &s[idx];
    let r = &s[idx + 1];
    // bring the right endpoint to the left sample's scale
    let factor = (r.scale_log - l.scale_log).exp();
    let (psi_r, dpsi_r) = (r.psi * factor, r.dpsi * factor);
    let dd_l = op.psi_dd(l.rho, l.psi, l.dpsi);
    let dd_r = op.psi_dd(r.rho, psi_r, dpsi_r);
    let dx = r.rho - l.rho;
    let t = (rho - l.rho) / dx;
    let psi = hermite(t, dx, l.psi, l.dpsi, psi_r, dpsi_r);
    let dpsi = hermite(t, dx, l.dpsi, dd_l, dpsi_r, dd_r);
    Ok((psi, dpsi))
}

fn hermite(t: f64, dx: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * dx * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * dx * d1
}

/// Ground-state transform identity: for φ = φ₀·u with B φ₀ = 0,
/// ⟨φ, Bφ⟩ = (2−ε₁) ∫ φ₀² |∂ₓu|² dx. Both sides are computed independently
/// by Simpson quadrature on `n_quad` panels over the support (in x), with
/// φ₀ taken from the shot trajectory; returns the relative residual.
pub fn ground_state_identity_check(
    prob: &SpectralProblem,
    phi0: &Trajectory,
    u: impl Fn(f64) -> (f64, f64),
    support_x: (f64, f64),
    n_quad: usize,
) -> Result<f64> {
    let (a, b) = support_x;
    if !(b > a) {
        return Err(Error::Usage("empty support".into()));
    }
    let n = if n_quad % 2 == 0 { n_quad } else { n_quad + 1 };
    let k = prob.kinetic();
    let hx = (b - a) / n as f64;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..=n {
        let x = a + i as f64 * hx;
        let rho = multiplier::rho_of_x(&prob.mult, x);
        let (psi, dpsi) = eval_trajectory(prob, phi0, rho)?;
        if psi <= 0.0 {
            return Err(Error::Numerical(format!(
                "phi0 is not positive at rho = {rho} inside the support"
            )));
        }
        let (w, _) = prob.weight(rho);
        let dphi_dx = w * dpsi;
        let (uv, du) = u(x);
        let wpot = w * prob.potential(rho);
        let li = k * (dphi_dx * uv + psi * du).powi(2) + wpot * (psi * uv).powi(2);
        let ri = k * psi * psi * du * du;
        let wq = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        lhs += wq * li;
        rhs += wq * ri;
    }
    lhs *= hx / 3.0;
    rhs *= hx / 3.0;
    Ok((lhs - rhs).abs() / (rhs.abs() + 1e-300))
}
