//! Symmetric banded matrix with in-place Cholesky factorization.

/// Lower-triangle band storage: `data[i * (hb + 1) + k]` holds entry
/// `(i, i - k)` for `k <= hb`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    dim: usize,
    hb: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(dim: usize, half_bandwidth: usize) -> Self {
        Self {
            dim,
            hb: half_bandwidth,
            data: vec![0.0; dim * (half_bandwidth + 1)],
        }
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.hb + 1) + (i - j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * (self.hb + 1) + (i - j)] = value;
    }

    /// Adds `value` at `(i, j)`; only the lower triangle is stored, so the
    /// caller passes each symmetric pair once with `i >= j`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i >= j && i - j <= self.hb, "entry ({i}, {j}) outside band");
        self.data[i * (self.hb + 1) + (i - j)] += value;
    }

    /// Largest absolute entry; used for conditioning diagnostics.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// True when every stored entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// In-place Cholesky `H = L L^T`. Fails on a non-positive pivot.
    pub fn cholesky(&mut self) -> Result<(), usize> {
        for i in 0..self.dim {
            let j0 = i.saturating_sub(self.hb);
            for j in j0..=i {
                let mut s = self.get(i, j);
                let k0 = j0.max(j.saturating_sub(self.hb));
                for k in k0..j {
                    s -= self.get(i, k) * self.get(j, k);
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(i);
                    }
                    self.set(i, i, s.sqrt());
                } else {
                    self.set(i, j, s / self.get(j, j));
                }
            }
        }
        Ok(())
    }

    /// Solves `L L^T x = b` in place after [`Self::cholesky`].
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let j0 = i.saturating_sub(self.hb);
            let mut s = b[i];
            for j in j0..i {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            let j1 = (i + self.hb).min(n - 1);
            for j in (i + 1)..=j1 {
                s -= self.get(j, i) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_and_solves_a_tridiagonal_system() {
        // -1, 2, -1 Laplacian of size 5, known SPD.
        let n = 5;
        let mut m = BandMatrix::new(n, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        m.cholesky().unwrap();
        let mut b = vec![1.0; n];
        m.solve(&mut b);
        // verify residual against the original matrix
        for i in 0..n {
            let mut r = 2.0 * b[i] - 1.0;
            if i > 0 {
                r -= b[i - 1];
            }
            if i + 1 < n {
                r -= b[i + 1];
            }
            assert!(r.abs() < 1e-12, "residual {r} at row {i}");
        }
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let mut m = BandMatrix::new(2, 1);
        m.add(0, 0, 1.0);
        m.add(1, 0, 3.0);
        m.add(1, 1, 1.0);
        assert!(m.cholesky().is_err());
    }
}
