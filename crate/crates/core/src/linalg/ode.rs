//! Adaptive Dormand-Prince 5(4) integration of linear systems `y' = A y`.

use super::{LinearOperator, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 5_000_000 }
    }
}

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// difference between the fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        *o = y[i] + h * acc;
    }
}

fn err_norm(y: &[C64], y_new: &[C64], err: &[C64], opts: &OdeOptions) -> f64 {
    let n = y.len().max(1) as f64;
    let s: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = op(y)` and returns the state at every grid time.
///
/// The grid must start at 0 and be strictly increasing. Fails with
/// [`Error::Stiffness`] when the step size collapses or the step budget runs
/// out; such problems are better served by spectral propagation.
pub fn integrate_ode(op: &dyn LinearOperator, y0: &[C64], t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>> {
    let n = op.dim();
    if y0.len() != n {
        return Err(Error::Shape(format!("initial vector has length {}, operator dimension {n}", y0.len())));
    }
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(Error::Argument("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Argument("time grid must be finite and strictly increasing".into()));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Argument("tolerances must be positive".into()));
    }

    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0.to_vec());
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    op.apply(&y, &mut k1);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    // Hairer's starting-step heuristic
    let d0 = err_norm(&y, &y, &y, opts);
    let d1 = err_norm(&y, &y, &k1, opts);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };

    let mut t = 0.0_f64;
    let mut steps = 0usize;
    for &t_next in &t_grid[1..] {
        while t < t_next {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Stiffness(format!(
                    "step budget of {} exhausted at t = {t:.6e}; use spectral propagation for this generator",
                    opts.max_steps
                )));
            }
            let remaining = t_next - t;
            let last = h >= remaining;
            let h_step = if last { remaining } else { h };
            if h_step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness(format!(
                    "step size underflow ({h_step:.3e}) at t = {t:.6e}; use spectral propagation for this generator"
                )));
            }

            combo(&y, h_step, &[(A21, &k1)], &mut tmp);
            op.apply(&tmp, &mut k2);
            combo(&y, h_step, &[(A31, &k1), (A32, &k2)], &mut tmp);
            op.apply(&tmp, &mut k3);
            combo(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut tmp);
            op.apply(&tmp, &mut k4);
            combo(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut tmp);
            op.apply(&tmp, &mut k5);
            combo(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &mut tmp);
            op.apply(&tmp, &mut k6);
            combo(&y, h_step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], &mut y_new);
            op.apply(&y_new, &mut k7);
            for i in 0..n {
                err[i] = h_step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let e = err_norm(&y, &y_new, &err, opts);
            if !e.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {t:.6e}")));
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            if e <= 1.0 {
                t = if last { t_next } else { t + h_step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // a step shortened to land on the grid says little about the next one
                if !last || factor < 1.0 {
                    h = h_step * factor;
                }
            } else {
                h = h_step * factor.min(1.0);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    #[test]
    fn zero_generator_is_constant() {
        let a = ComplexMatrix::zeros(3, 3);
        let y0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.5)];
        let traj = integrate_ode(&a, &y0, &[0.0, 1.0, 10.0], &OdeOptions::default()).unwrap();
        assert!(traj.iter().all(|y| *y == y0));
    }

    #[test]
    fn scalar_decay() {
        let a = ComplexMatrix::identity(2).scale_real(-1.0);
        let y0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let traj = integrate_ode(&a, &y0, &[0.0, 1.0], &OdeOptions::default()).unwrap();
        assert!((traj[1][0].re - (-1.0f64).exp()).abs() < 1e-8 * (-1.0f64).exp() * 10.0);
    }

    #[test]
    fn rotation_keeps_norm() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let y0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let traj = integrate_ode(&a, &y0, &grid, &OdeOptions::default()).unwrap();
        for (t, y) in grid.iter().zip(&traj) {
            assert!((y[0].re - t.cos()).abs() < 1e-7);
            assert!((y[1].re - t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        let a = ComplexMatrix::zeros(1, 1);
        let y0 = vec![C64::new(1.0, 0.0)];
        assert!(integrate_ode(&a, &y0, &[0.5, 1.0], &OdeOptions::default()).is_err());
        assert!(integrate_ode(&a, &y0, &[0.0, 1.0, 1.0], &OdeOptions::default()).is_err());
    }

    #[test]
    fn stiffness_is_reported() {
        let a = ComplexMatrix::identity(1).scale_real(-1e8);
        let y0 = vec![C64::new(1.0, 0.0)];
        let opts = OdeOptions { max_steps: 1000, ..Default::default() };
        assert!(matches!(integrate_ode(&a, &y0, &[0.0, 1.0], &opts), Err(Error::Stiffness(_))));
    }
}
