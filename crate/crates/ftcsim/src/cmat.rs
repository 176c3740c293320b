//! Complex state blocks stored as split real/imaginary `f64` matrices.
//!
//! Time evolution in this crate is "real Hamiltonian times complex state". Keeping
//! the state as two real matrices lets every hot operation go through
//! `ndarray`'s f64 matrix product instead of a scalar complex loop.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// A D x k block of complex amplitudes (k state columns side by side).
#[derive(Debug, Clone)]
pub struct CBlock {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl CBlock {
    pub fn zeros(dim: usize, cols: usize) -> Self {
        CBlock { re: Array2::zeros((dim, cols)), im: Array2::zeros((dim, cols)) }
    }

    /// Columns = unit vectors at the given basis indices.
    pub fn basis_columns(dim: usize, indices: &[usize]) -> Self {
        let mut b = CBlock::zeros(dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            b.re[[i, c]] = 1.0;
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn cols(&self) -> usize {
        self.re.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[[i, j]], self.im[[i, j]])
    }

    /// `self += s * other` with a complex scalar `s`.
    pub fn axpy(&mut self, s: Complex64, other: &CBlock) {
        self.re.scaled_add(s.re, &other.re);
        self.re.scaled_add(-s.im, &other.im);
        self.im.scaled_add(s.re, &other.im);
        self.im.scaled_add(s.im, &other.re);
    }

    pub fn scaled(&self, s: Complex64) -> CBlock {
        let mut out = CBlock::zeros(self.dim(), self.cols());
        out.axpy(s, self);
        out
    }

    /// Real matrix times complex block.
    pub fn apply_real(&self, m: &Array2<f64>) -> CBlock {
        CBlock { re: m.dot(&self.re), im: m.dot(&self.im) }
    }

    /// Multiply column-wise by `e^{i phase[r]}` per row r (diagonal phase).
    pub fn phase_rows(&mut self, cos_p: &Array1<f64>, sin_p: &Array1<f64>) {
        let (n, k) = self.re.dim();
        for r in 0..n {
            let (c, s) = (cos_p[r], sin_p[r]);
            for col in 0..k {
                let re = self.re[[r, col]];
                let im = self.im[[r, col]];
                self.re[[r, col]] = c * re - s * im;
                self.im[[r, col]] = c * im + s * re;
            }
        }
    }

    /// Max column-norm deviation from 1 (unitarity proxy for propagated bases).
    pub fn max_norm_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for col in 0..self.cols() {
            let mut n2 = 0.0;
            for r in 0..self.dim() {
                n2 += self.re[[r, col]].powi(2) + self.im[[r, col]].powi(2);
            }
            worst = worst.max((n2 - 1.0).abs());
        }
        worst
    }

    /// Column populations |psi_r|^2 accumulated into `acc` with weight `w`.
    pub fn accumulate_populations(&self, w: f64, acc: &mut Array2<f64>) {
        let (n, k) = self.re.dim();
        for r in 0..n {
            for col in 0..k {
                acc[[r, col]] += w * (self.re[[r, col]].powi(2) + self.im[[r, col]].powi(2));
            }
        }
    }

    /// RMS over all entries, used for error norms.
    pub fn rms(&self) -> f64 {
        let n = (self.dim() * self.cols()) as f64;
        let s: f64 = self
            .re
            .iter()
            .zip(self.im.iter())
            .map(|(a, b)| a * a + b * b)
            .sum();
        (s / n).sqrt()
    }

    /// Normalize every column to unit norm (closed-system projection after
    /// an integrator step).
    pub fn renormalize_columns(&mut self) -> f64 {
        let (n, k) = self.re.dim();
        let mut worst = 0.0f64;
        for col in 0..k {
            let mut n2 = 0.0;
            for r in 0..n {
                n2 += self.re[[r, col]].powi(2) + self.im[[r, col]].powi(2);
            }
            worst = worst.max((n2 - 1.0).abs());
            if n2 > 0.0 {
                let inv = 1.0 / n2.sqrt();
                for r in 0..n {
                    self.re[[r, col]] *= inv;
                    self.im[[r, col]] *= inv;
                }
            }
        }
        worst
    }

    pub fn to_complex(&self) -> Array2<Complex64> {
        let (n, k) = self.re.dim();
        Array2::from_shape_fn((n, k), |(i, j)| Complex64::new(self.re[[i, j]], self.im[[i, j]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn axpy_matches_complex_arithmetic() {
        let mut a = CBlock::basis_columns(2, &[0]);
        let b = CBlock::basis_columns(2, &[1]);
        a.axpy(Complex64::new(0.0, 2.0), &b);
        assert_eq!(a.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(a.get(1, 0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn phase_rows_rotates() {
        let mut a = CBlock::basis_columns(2, &[0, 1]);
        let p = array![std::f64::consts::FRAC_PI_2, 0.0];
        a.phase_rows(&p.mapv(f64::cos), &p.mapv(f64::sin));
        assert!((a.get(0, 0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((a.get(1, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_real_multiplies_both_parts() {
        let m = array![[0.0, 1.0], [1.0, 0.0]];
        let mut a = CBlock::basis_columns(2, &[0]);
        a.im[[1, 0]] = 0.5;
        let out = a.apply_real(&m);
        assert_eq!(out.re[[1, 0]], 1.0);
        assert_eq!(out.im[[0, 0]], 0.5);
    }
}
