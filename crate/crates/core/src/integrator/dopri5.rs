//! Dormand-Prince 5(4) step kernel with fourth-order dense output.
//! Branch switching lives a level up; this file only knows how to take,
//! grade, and interpolate one smooth step.

use crate::error::Result;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// Fifth-order weights (also the last stage row: first-same-as-last).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference to the embedded fourth-order solution.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ORDER_EXP: f64 = 0.2; // 1 / (order of the error estimator + 1)

/// Quartic interpolant over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn new(n: usize) -> Self {
        DenseStep {
            t0: 0.0,
            h: 0.0,
            rcont: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluate the interpolant at t in [t0, t0 + h].
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
    }
}

/// Scratch buffers reused across steps. `k[0]` doubles as the
/// first-same-as-last cache: valid whenever `k1_valid` is set.
pub struct Workspace {
    pub k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    pub y_new: Vec<f64>,
    err: Vec<f64>,
    pub k1_valid: bool,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
            k1_valid: false,
        }
    }

    /// Fill the first stage at (t, y). Call after any discontinuity.
    pub fn prime<F>(&mut self, f: &mut F, t: f64, y: &[f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        f(t, y, &mut self.k[0])?;
        self.k1_valid = true;
        Ok(())
    }
}

pub struct StepReport {
    /// Step-size suggestion for the next attempt.
    pub h_next: f64,
    pub accepted: bool,
}

/// Attempt one step of size h from (t, y). On acceptance `ws.y_new` holds
/// the fifth-order result, `dense` the interpolant, and `ws.k[0]` the
/// derivative at the new point.
pub fn try_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    last_rejected: bool,
    ws: &mut Workspace,
    dense: &mut DenseStep,
) -> Result<StepReport>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    debug_assert!(ws.k1_valid, "workspace must be primed before stepping");

    macro_rules! stage {
        ($ks:expr, $c:expr, $($a:expr => $kj:expr),+) => {{
            for i in 0..n {
                let mut acc = 0.0;
                $(acc += $a * ws.k[$kj][i];)+
                ws.y_stage[i] = y[i] + h * acc;
            }
            f(t + $c * h, &ws.y_stage, &mut ws.k[$ks])?;
        }};
    }

    stage!(1, C2, A21 => 0);
    stage!(2, C3, A31 => 0, A32 => 1);
    stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);

    // Sixth stage lands on the solution; the seventh evaluates there.
    for i in 0..n {
        ws.y_new[i] = y[i]
            + h * (B1 * ws.k[0][i]
                + B3 * ws.k[2][i]
                + B4 * ws.k[3][i]
                + B5 * ws.k[4][i]
                + B6 * ws.k[5][i]);
    }
    let (y_new, rest) = {
        let (a, b) = ws.k.split_at_mut(6);
        (&ws.y_new, (&a[..6], &mut b[0]))
    };
    f(t + h, y_new, rest.1)?;
    let _ = rest.0;

    let mut err_sq = 0.0;
    let mut finite = true;
    for i in 0..n {
        ws.err[i] = h
            * (E1 * ws.k[0][i]
                + E3 * ws.k[2][i]
                + E4 * ws.k[3][i]
                + E5 * ws.k[4][i]
                + E6 * ws.k[5][i]
                + E7 * ws.k[6][i]);
        let scale = abs_tol + rel_tol * y[i].abs().max(ws.y_new[i].abs());
        let r = ws.err[i] / scale;
        err_sq += r * r;
        finite &= ws.y_new[i].is_finite() && ws.err[i].is_finite();
    }
    let err = (err_sq / n as f64).sqrt();

    if !finite || !err.is_finite() {
        // State blew up inside the step; retry shorter.
        return Ok(StepReport {
            h_next: 0.5 * h,
            accepted: false,
        });
    }

    if err <= 1.0 {
        let mut fac = if err == 0.0 {
            FAC_MAX
        } else {
            (SAFETY * err.powf(-ORDER_EXP)).clamp(FAC_MIN, FAC_MAX)
        };
        if last_rejected {
            fac = fac.min(1.0);
        }
        dense.t0 = t;
        dense.h = h;
        for i in 0..n {
            let dy = ws.y_new[i] - y[i];
            dense.rcont[0][i] = y[i];
            dense.rcont[1][i] = dy;
            dense.rcont[2][i] = h * ws.k[0][i] - dy;
            dense.rcont[3][i] = dy - h * ws.k[6][i] - dense.rcont[2][i];
            dense.rcont[4][i] = h
                * (D1 * ws.k[0][i]
                    + D3 * ws.k[2][i]
                    + D4 * ws.k[3][i]
                    + D5 * ws.k[4][i]
                    + D6 * ws.k[5][i]
                    + D7 * ws.k[6][i]);
        }
        // First-same-as-last: the derivative at y_new seeds the next step.
        ws.k.swap(0, 6);
        Ok(StepReport {
            h_next: fac * h,
            accepted: true,
        })
    } else {
        let fac = (SAFETY * err.powf(-ORDER_EXP)).clamp(FAC_MIN, 1.0);
        Ok(StepReport {
            h_next: fac * h,
            accepted: false,
        })
    }
}

/// Starting step-size heuristic: balance the initial derivative against the
/// state scale, refine with one explicit Euler probe.
pub fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..n {
        let sk = abs_tol + rel_tol * y0[i].abs();
        d0 += (y0[i] / sk).powi(2);
        d1 += (f0[i] / sk).powi(2);
    }
    d0 = (d0 / n as f64).sqrt();
    d1 = (d1 / n as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(max_step);

    let mut y1 = vec![0.0; n];
    for i in 0..n {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; n];
    f(t0 + h0, &y1, &mut f1)?;
    let mut d2 = 0.0;
    for i in 0..n {
        let sk = abs_tol + rel_tol * y0[i].abs();
        d2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    d2 = (d2 / n as f64).sqrt() / h0;

    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(ORDER_EXP)
    };
    Ok(h0.min(h1).min(max_step).max(1e-12))
}

/// One fixed fifth-order step without error control. Used by convergence
/// checks that need the bare tableau.
pub fn fixed_step<F>(f: &mut F, t: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut ws = Workspace::new(n);
    ws.prime(f, t, y)?;
    let mut dense = DenseStep::new(n);
    // Force acceptance by grading against an infinite tolerance.
    let report = try_step(f, t, y, h, 1e300, 1e300, false, &mut ws, &mut dense)?;
    debug_assert!(report.accepted);
    out.copy_from_slice(&ws.y_new);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(_t: f64, y: &[f64], out: &mut [f64]) -> crate::error::Result<()> {
        out[0] = -y[1];
        out[1] = y[0];
        Ok(())
    }

    #[test]
    fn single_step_beats_embedded_error_bound() {
        let y = [1.0, 0.0];
        let mut f = circle;
        let mut ws = Workspace::new(2);
        ws.prime(&mut f, 0.0, &y).unwrap();
        let mut dense = DenseStep::new(2);
        let rep = try_step(&mut f, 0.0, &y, 0.05, 1e-8, 1e-10, false, &mut ws, &mut dense).unwrap();
        assert!(rep.accepted);
        let exact = (0.05f64.cos(), 0.05f64.sin());
        assert!((ws.y_new[0] - exact.0).abs() < 1e-11);
        assert!((ws.y_new[1] - exact.1).abs() < 1e-11);
    }

    #[test]
    fn dense_output_interpolates_midpoint() {
        let y = [1.0, 0.0];
        let mut f = circle;
        let mut ws = Workspace::new(2);
        ws.prime(&mut f, 0.0, &y).unwrap();
        let mut dense = DenseStep::new(2);
        let h = 0.1;
        let rep = try_step(&mut f, 0.0, &y, h, 1e-6, 1e-10, false, &mut ws, &mut dense).unwrap();
        assert!(rep.accepted);
        let mut mid = [0.0; 2];
        dense.eval(0.5 * h, &mut mid);
        // Quartic interpolant: midpoint error ~3e-9 at this step size.
        assert!((mid[0] - (0.05f64).cos()).abs() < 1e-8);
        assert!((mid[1] - (0.05f64).sin()).abs() < 1e-8);
        // Endpoints reproduce exactly.
        let mut end = [0.0; 2];
        dense.eval(h, &mut end);
        assert_eq!(end, [ws.y_new[0], ws.y_new[1]]);
        let mut start = [0.0; 2];
        dense.eval(0.0, &mut start);
        assert_eq!(start, [1.0, 0.0]);
    }

    #[test]
    fn rejects_oversized_step() {
        // Stiff-ish decay: a huge step must be rejected, and the suggestion
        // must shrink.
        let mut f = |_t: f64, y: &[f64], out: &mut [f64]| -> crate::error::Result<()> {
            out[0] = -50.0 * y[0];
            Ok(())
        };
        let y = [1.0];
        let mut ws = Workspace::new(1);
        ws.prime(&mut f, 0.0, &y).unwrap();
        let mut dense = DenseStep::new(1);
        let rep = try_step(&mut f, 0.0, &y, 1.0, 1e-8, 1e-10, false, &mut ws, &mut dense).unwrap();
        assert!(!rep.accepted);
        assert!(rep.h_next < 1.0);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        // Global error over [0, 1] should shrink ~32x when h halves.
        let run = |n: usize| -> f64 {
            let mut y = vec![1.0, 0.0];
            let mut out = vec![0.0, 0.0];
            let h = 1.0 / n as f64;
            let mut f = circle;
            for i in 0..n {
                fixed_step(&mut f, i as f64 * h, &y, h, &mut out).unwrap();
                y.copy_from_slice(&out);
            }
            ((y[0] - 1f64.cos()).powi(2) + (y[1] - 1f64.sin()).powi(2)).sqrt()
        };
        let e1 = run(50);
        let e2 = run(100);
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 5.5, "observed order {order}");
    }
}

