//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) for
//! complex state blocks driven by a time-dependent right-hand side.

use crate::cmat::CBlock;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-11, h_init: 1e-3, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("step budget exhausted at t = {0}")]
    TooManySteps(f64),
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combo(y: &CBlock, h: f64, ks: &[&CBlock], ws: &[f64]) -> CBlock {
    let mut out = y.clone();
    for (k, w) in ks.iter().zip(ws) {
        if *w != 0.0 {
            out.axpy(Complex64::new(h * w, 0.0), k);
        }
    }
    out
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` (`t1 > t0`).
///
/// `observer`, when present, is called after each accepted step with the new
/// time, the step size just taken, and the new state; it also sees the initial
/// state with step size zero.
pub fn integrate<F>(
    y0: &CBlock,
    t0: f64,
    t1: f64,
    mut rhs: F,
    opts: &OdeOptions,
    mut observer: Option<&mut dyn FnMut(f64, f64, &CBlock)>,
) -> Result<(CBlock, OdeStats), OdeError>
where
    F: FnMut(f64, &CBlock) -> CBlock,
{
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.clone();
    let mut h = opts.h_init.min(t1 - t0).min(opts.h_max);
    if let Some(obs) = observer.as_deref_mut() {
        obs(t, 0.0, &y);
    }
    let mut k1 = rhs(t, &y);
    stats.rhs_evals += 1;

    while t < t1 {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(OdeError::TooManySteps(t));
        }
        if h < 1e-14 * (t1 - t0) {
            return Err(OdeError::StepUnderflow(t));
        }
        if t + h > t1 {
            h = t1 - t;
        }

        let y2 = combo(&y, h, &[&k1], &A2);
        let k2 = rhs(t + C[1] * h, &y2);
        let y3 = combo(&y, h, &[&k1, &k2], &A3);
        let k3 = rhs(t + C[2] * h, &y3);
        let y4 = combo(&y, h, &[&k1, &k2, &k3], &A4);
        let k4 = rhs(t + C[3] * h, &y4);
        let y5 = combo(&y, h, &[&k1, &k2, &k3, &k4], &A5);
        let k5 = rhs(t + C[4] * h, &y5);
        let y6 = combo(&y, h, &[&k1, &k2, &k3, &k4, &k5], &A6);
        let k6 = rhs(t + C[5] * h, &y6);
        let ynew = combo(&y, h, &[&k1, &k2, &k3, &k4, &k5, &k6], &B);
        let k7 = rhs(t + h, &ynew);
        stats.rhs_evals += 6;

        let mut err = CBlock::zeros(y.dim(), y.cols());
        for (k, w) in [&k1, &k2, &k3, &k4, &k5, &k6, &k7].iter().zip(E) {
            if w != 0.0 {
                err.axpy(Complex64::new(h * w, 0.0), k);
            }
        }
        // amplitudes are bounded by 1 for unitary evolution, so a fixed scale
        // of atol + rtol per component is appropriate
        let scale = opts.atol + opts.rtol;
        let errn = err.rms() / scale;

        if errn <= 1.0 {
            t += h;
            y = ynew;
            k1 = k7; // FSAL
            stats.accepted += 1;
            if let Some(obs) = observer.as_deref_mut() {
                obs(t, h, &y);
            }
            let grow = if errn == 0.0 { 5.0 } else { (0.9 * errn.powf(-0.2)).min(5.0) };
            h = (h * grow).min(opts.h_max);
        } else {
            stats.rejected += 1;
            h *= (0.9 * errn.powf(-0.2)).max(0.2);
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    // i dpsi/dt = w psi  ->  psi(t) = e^{-i w t} psi(0)
    #[test]
    fn phase_evolution_exact() {
        let w = 2.7;
        let y0 = CBlock::basis_columns(1, &[0]);
        let rhs = |_t: f64, y: &CBlock| y.scaled(Complex64::new(0.0, -w));
        let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let (y, stats) = integrate(&y0, 0.0, 10.0, rhs, &opts, None).unwrap();
        let want = Complex64::new(0.0, -w * 10.0).exp();
        assert!((y.get(0, 0) - want).norm() < 1e-8, "got {} want {}", y.get(0, 0), want);
        assert!(stats.accepted > 10);
    }

    // two-level Rabi problem against the analytic solution
    #[test]
    fn rabi_oscillation() {
        let omega = 0.35;
        let h = array![[0.0, omega / 2.0], [omega / 2.0, 0.0]];
        let rhs = move |_t: f64, y: &CBlock| {
            y.apply_real(&h).scaled(Complex64::new(0.0, -1.0))
        };
        let y0 = CBlock::basis_columns(2, &[0]);
        let t = 7.3;
        let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let (y, _) = integrate(&y0, 0.0, t, rhs, &opts, None).unwrap();
        let p1 = y.get(1, 0).norm_sqr();
        let want = (omega * t / 2.0).sin().powi(2);
        assert!((p1 - want).abs() < 1e-8);
    }

    #[test]
    fn observer_sees_endpoints() {
        let y0 = CBlock::basis_columns(1, &[0]);
        let rhs = |_t: f64, y: &CBlock| y.scaled(Complex64::new(0.0, -1.0));
        let mut times = Vec::new();
        let mut obs = |t: f64, _h: f64, _y: &CBlock| times.push(t);
        integrate(&y0, 0.0, 1.0, rhs, &OdeOptions::default(), Some(&mut obs)).unwrap();
        assert_eq!(times.first().copied(), Some(0.0));
        assert!((times.last().copied().unwrap() - 1.0).abs() < 1e-14);
    }
}
