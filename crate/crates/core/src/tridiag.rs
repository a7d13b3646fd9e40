//! Symmetric tridiagonal eigenvalue machinery: Sturm-sequence counting,
//! bisection for the smallest eigenvalue, the generalized pencil variant,
//! and a Thomas solve for inverse iteration.

/// Count eigenvalues strictly below `lambda` via the LDLT Sturm sequence:
/// the number of negative pivots of T − λI.
pub fn count_below(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    debug_assert!(n == 0 || off.len() == n - 1);
    if n == 0 {
        return 0;
    }
    let guard = f64::MIN_POSITIVE;
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue by bisection inside the Gershgorin interval.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    assert!(n > 0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let e_left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let e_right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - e_left - e_right);
        hi = hi.max(diag[i] + e_left + e_right);
    }
    lo -= 1.0;
    hi += 1.0;
    bisect(lo, hi, |mid| count_below(diag, off, mid) >= 1)
}

/// Smallest eigenvalue of the pencil A v = λ B v with B symmetric positive
/// definite, both tridiagonal. Sylvester's law gives the count below λ as
/// the number of negative LDLT pivots of A − λB.
pub fn pencil_smallest_eigenvalue(
    a_diag: &[f64],
    a_off: &[f64],
    b_diag: &[f64],
    b_off: &[f64],
    lo: f64,
    hi: f64,
) -> f64 {
    let n = a_diag.len();
    let shifted_count = |lambda: f64| {
        let d: Vec<f64> = (0..n).map(|i| a_diag[i] - lambda * b_diag[i]).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| a_off[i] - lambda * b_off[i]).collect();
        count_below(&d, &e, 0.0)
    };
    // widen until the bracket actually straddles the first eigenvalue
    let mut lo = lo;
    let mut hi = hi;
    while shifted_count(lo) > 0 {
        lo -= (hi - lo).max(1.0);
    }
    let mut tries = 0;
    while shifted_count(hi) == 0 && tries < 60 {
        hi += (hi - lo).max(1.0);
        tries += 1;
    }
    bisect(lo, hi, |mid| shifted_count(mid) >= 1)
}

fn bisect(mut lo: f64, mut hi: f64, above: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= 4.0 * f64::EPSILON * mid.abs().max(1e-30) {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Thomas solve of (T − shift·S) x = rhs for tridiagonal T, S. No pivoting;
/// callers shift slightly off an eigenvalue, which keeps pivots nonzero.
#[allow(clippy::too_many_arguments)]
pub fn solve_shifted(
    t_diag: &[f64],
    t_off: &[f64],
    s_diag: &[f64],
    s_off: &[f64],
    shift: f64,
    rhs: &[f64],
    x: &mut [f64],
) {
    let n = t_diag.len();
    let guard = 1e-300;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let dia = |i: usize| t_diag[i] - shift * s_diag[i];
    let off = |i: usize| t_off[i] - shift * s_off[i];
    let mut denom = dia(0);
    if denom.abs() < guard {
        denom = guard;
    }
    c[0] = off(0) / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        let mut den = dia(i) - off(i - 1) * c[i - 1];
        if den.abs() < guard {
            den = guard;
        }
        if i < n - 1 {
            c[i] = off(i) / den;
        }
        d[i] = (rhs[i] - off(i - 1) * d[i - 1]) / den;
    }
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
}

/// Eigenvector of the smallest pencil eigenvalue by inverse iteration.
pub fn pencil_smallest_eigenvector(
    a_diag: &[f64],
    a_off: &[f64],
    b_diag: &[f64],
    b_off: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let n = a_diag.len();
    let shift = lambda - 1e-8 * lambda.abs().max(1e-8);
    let mut v = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    for _ in 0..4 {
        // rhs = B v
        rhs[0] = b_diag[0] * v[0] + if n > 1 { b_off[0] * v[1] } else { 0.0 };
        for i in 1..n {
            rhs[i] = b_off[i - 1] * v[i - 1]
                + b_diag[i] * v[i]
                + if i + 1 < n { b_off[i] * v[i + 1] } else { 0.0 };
        }
        let mut x = vec![0.0; n];
        solve_shifted(a_diag, a_off, b_diag, b_off, shift, &rhs, &mut x);
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (vi, xi) in v.iter_mut().zip(&x) {
            *vi = xi / norm;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_known_spectrum() {
        // [[1,-1],[-1,3]]: eigenvalues 2 -/+ sqrt(2)
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(count_below(&d, &e, 0.0), 0);
        assert_eq!(count_below(&d, &e, 1.0), 1);
        assert_eq!(count_below(&d, &e, 4.0), 2);
        let min = smallest_eigenvalue(&d, &e);
        assert_relative_eq!(min, 2.0 - 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_laplacian_ground_state() {
        // -u'' on [0, pi]: lowest eigenvalue 1; n interior nodes
        let n = 10_000;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let min = smallest_eigenvalue(&diag, &off);
        assert_relative_eq!(min, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn diagonal_shift_moves_spectrum_exactly() {
        let n = 500;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * 0.1).sin()).collect();
        let off = vec![-0.7; n - 1];
        let a = smallest_eigenvalue(&diag, &off);
        let shifted: Vec<f64> = diag.iter().map(|d| d - 1.0).collect();
        let b = smallest_eigenvalue(&shifted, &off);
        assert_relative_eq!(b, a - 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pencil_reduces_to_standard_for_identity_b() {
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
        let off = vec![-0.3; n - 1];
        let b_diag = vec![1.0; n];
        let b_off = vec![0.0; n - 1];
        let lam = pencil_smallest_eigenvalue(&diag, &off, &b_diag, &b_off, 0.0, 10.0);
        assert_relative_eq!(lam, smallest_eigenvalue(&diag, &off), epsilon = 1e-10);
    }

    #[test]
    fn inverse_iteration_finds_the_ground_mode() {
        let n = 200;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let b_diag = vec![1.0; n];
        let b_off = vec![0.0; n - 1];
        let lam = smallest_eigenvalue(&diag, &off);
        let v = pencil_smallest_eigenvector(&diag, &off, &b_diag, &b_off, lam);
        // ground mode of the Dirichlet Laplacian is sin(x), one sign
        let signs = v.iter().filter(|x| x.abs() > 1e-8).map(|x| x.signum());
        let first = v[n / 2].signum();
        assert!(signs.clone().all(|s| s == first));
        let mid = (std::f64::consts::FRAC_PI_2 / h).round() as usize - 1;
        assert!(v[mid].abs() > v[10].abs());
    }
}
