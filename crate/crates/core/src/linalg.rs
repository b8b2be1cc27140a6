//! Dense complex LU with partial pivoting.
//!
//! Determinants are returned in log-magnitude/phase form so that large
//! Nyström systems never overflow. The smallest singular value is estimated
//! by inverse iteration on `AᴴA`, reusing the factorization.

use num_complex::Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data must be n × n");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `det = exp(log_abs) · phase`, with `|phase| = 1`; an exactly singular
/// matrix has `log_abs = -∞` and `phase = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        if self.log_abs == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_abs.exp()
        }
    }

    pub fn is_singular(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

/// `P A = L U`, packed in place.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn factor(a: Matrix) -> Self {
        let n = a.n;
        let mut lu = a.data;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (p, pivot_abs) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            let (top, bottom) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            for row in bottom.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for (x, &y) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= factor * y;
                }
            }
        }
        Self {
            n,
            lu,
            perm,
            swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn log_det(&self) -> LogDet {
        if self.singular {
            return LogDet {
                log_abs: f64::NEG_INFINITY,
                phase: Complex64::new(0.0, 0.0),
            };
        }
        let mut log_abs = 0.0;
        let mut phase = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.n {
            let d = self.lu[k * self.n + k];
            let m = d.norm();
            log_abs += m.ln();
            phase *= d / m;
            // Renormalize so rounding in the phase cannot accumulate.
            phase /= phase.norm();
        }
        LogDet { log_abs, phase }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        // Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ z = b, then Lᴴ w = z, then x = Pᵀ w.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.lu[k * n + i].conj() * z[k];
            }
            z[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i].conj() * z[k];
            }
            z[i] = s;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Smallest singular value by inverse iteration on `AᴴA`.
    pub fn smallest_singular_value(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        // Deterministic start with no special alignment to structured matrices.
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.3 * ((i * 7 % 11) as f64)))
            .collect();
        normalize(&mut x);
        let mut estimate = f64::INFINITY;
        for _ in 0..200 {
            let w = self.solve_adjoint(&x);
            let mut z = self.solve(&w);
            // Rayleigh quotient of (AᴴA)⁻¹ at x, i.e. ‖A⁻ᴴ x‖².
            let rayleigh: f64 = w.iter().map(|c| c.norm_sqr()).sum();
            let next = 1.0 / rayleigh.sqrt();
            let norm = normalize(&mut z);
            if !norm.is_finite() || norm == 0.0 {
                return 0.0;
            }
            x = z;
            if (estimate - next).abs() <= 1e-13 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in x.iter_mut() {
        *c /= norm;
    }
    norm
}
