//! Adaptive Dormand-Prince 5(4) integration with quartic dense output.
//!
//! Integrates in either direction (the step size carries the sign). The
//! caller drives the loop one accepted step at a time, which is what the
//! shooting solver needs: it samples the dense interpolant inside each step
//! and renormalizes the state between steps to keep magnitudes
//! representable.

use crate::{Error, Result};

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// 5th-order weights (row 7 of A, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Difference to the embedded 4th-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Dense-output weights for the quartic interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub struct Dopri5<const N: usize, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    pub rtol: f64,
    pub atol: f64,
    // last accepted step, for dense output
    t_prev: f64,
    h_prev: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    /// `h0` sets the integration direction by its sign.
    pub fn new(mut f: F, t0: f64, y0: [f64; N], h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = f(t0, &y0);
        Dopri5 {
            f,
            t: t0,
            y: y0,
            k1,
            h: h0,
            rtol,
            atol,
            t_prev: t0,
            h_prev: 0.0,
            cont: [[0.0; N]; 5],
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    /// Replace the state (used for renormalization); refreshes the cached
    /// derivative.
    pub fn set_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.k1 = (self.f)(self.t, &self.y);
    }

    /// Take one accepted step, not moving past `t_limit`. Rejected trials are
    /// retried internally with a smaller step.
    pub fn step_towards(&mut self, t_limit: f64) -> Result<()> {
        let dir = (t_limit - self.t).signum();
        if dir == 0.0 {
            return Ok(());
        }
        self.h = self.h.abs().max(f64::MIN_POSITIVE) * dir;
        loop {
            if self.h.abs() > (t_limit - self.t).abs() {
                self.h = t_limit - self.t;
            }
            let h = self.h;
            if h.abs() <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::Integration {
                    last_rho: self.t,
                    reason: "step size underflow".into(),
                });
            }

            let mut k = [[0.0; N]; 7];
            k[0] = self.k1;
            for stage in 0..6 {
                let mut ys = self.y;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for n in 0..N {
                            ys[n] += h * a * kj[n];
                        }
                    }
                }
                k[stage + 1] = (self.f)(self.t + C[stage] * h, &ys);
            }
            // k[6] is f at the 5th-order solution (FSAL)
            let mut y_new = self.y;
            for (j, kj) in k.iter().enumerate() {
                if B[j] != 0.0 {
                    for n in 0..N {
                        y_new[n] += h * B[j] * kj[n];
                    }
                }
            }

            let mut err: f64 = 0.0;
            for n in 0..N {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[n];
                }
                e *= h;
                let sc = self.atol + self.rtol * self.y[n].abs().max(y_new[n].abs());
                err += (e / sc) * (e / sc);
            }
            err = (err / N as f64).sqrt();

            if err <= 1.0 {
                // dense-output coefficients of the accepted step
                let mut ydiff = [0.0; N];
                let mut bspl = [0.0; N];
                for n in 0..N {
                    ydiff[n] = y_new[n] - self.y[n];
                    bspl[n] = h * k[0][n] - ydiff[n];
                }
                for n in 0..N {
                    self.cont[0][n] = self.y[n];
                    self.cont[1][n] = ydiff[n];
                    self.cont[2][n] = bspl[n];
                    self.cont[3][n] = ydiff[n] - h * k[6][n] - bspl[n];
                    let mut d = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        d += D[j] * kj[n];
                    }
                    self.cont[4][n] = h * d;
                }
                self.t_prev = self.t;
                self.h_prev = h;
                self.t += h;
                self.y = y_new;
                self.k1 = k[6];
                let scale = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                self.h = h * scale;
                return Ok(());
            }

            if !err.is_finite() {
                return Err(Error::Integration {
                    last_rho: self.t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let scale = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            self.h = h * scale;
        }
    }

    /// Evaluate the dense interpolant of the last accepted step at `t`,
    /// which must lie within that step.
    pub fn dense(&self, t: f64) -> [f64; N] {
        debug_assert!(self.h_prev != 0.0);
        let theta = (t - self.t_prev) / self.h_prev;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for n in 0..N {
            out[n] = self.cont[0][n]
                + theta
                    * (self.cont[1][n]
                        + th1
                            * (self.cont[2][n]
                                + theta * (self.cont[3][n] + th1 * self.cont[4][n])));
        }
        out
    }
}
