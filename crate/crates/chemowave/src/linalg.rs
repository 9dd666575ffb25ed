//! Banded LU with partial pivoting.
//!
//! Storage follows the LAPACK band convention: entry (i, j) of the logical
//! matrix lives at band row `kl + ku + i - j`, and an extra `kl` rows on top
//! hold the fill produced by row swaps.

use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// Band matrix with `kl` sub- and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// (2*kl + ku + 1) x n, column-major: `bands[col * ldab + band_row]`.
    bands: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            bands: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + (self.kl + self.ku + i - j)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.bands[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Set an in-band entry. Out-of-band writes are a logic error.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.bands[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.bands[k] += value;
    }

    /// Dense copy, for small-matrix cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// In-band LU factorization (row swaps recorded in `ipiv`).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

/// Factor a banded matrix with partial pivoting. Fill is confined to
/// `kl + ku` superdiagonals, which the storage already reserves.
pub fn banded_lu_factor(matrix: &BandedMatrix) -> Result<BandedLu> {
    let n = matrix.n;
    let kl = matrix.kl;
    let ku = matrix.ku;
    let kv = kl + ku;
    let ldab = 2 * kl + ku + 1;
    let mut ab = matrix.bands.clone();
    let mut ipiv = vec![0usize; n];

    for j in 0..n {
        let km = kl.min(n - 1 - j);
        // pivot search in column j, rows j..=j+km
        let mut jp = j;
        let mut pmax = ab[j * ldab + kv].abs();
        for i in (j + 1)..=(j + km) {
            let v = ab[j * ldab + (kv + i - j)].abs();
            if v > pmax {
                pmax = v;
                jp = i;
            }
        }
        ipiv[j] = jp;
        if pmax < PIVOT_FLOOR {
            return Err(Error::SingularMatrix { pivot: j });
        }
        let last_col = (j + kv).min(n - 1);
        if jp != j {
            for col in j..=last_col {
                let a = col * ldab + (kv + j - col);
                let b = col * ldab + (kv + jp - col);
                ab.swap(a, b);
            }
        }
        let piv = ab[j * ldab + kv];
        for i in (j + 1)..=(j + km) {
            ab[j * ldab + (kv + i - j)] /= piv;
        }
        for col in (j + 1)..=last_col {
            let ujc = ab[col * ldab + (kv + j - col)];
            if ujc != 0.0 {
                for i in (j + 1)..=(j + km) {
                    let l = ab[j * ldab + (kv + i - j)];
                    ab[col * ldab + (kv + i - col)] -= l * ujc;
                }
            }
        }
    }

    Ok(BandedLu { n, kl, ku, ab, ipiv })
}

impl BandedLu {
    /// Solve `A x = rhs` using the stored factorization.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} != matrix dimension {}",
                rhs.len(),
                self.n
            )));
        }
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = 2 * self.kl + self.ku + 1;
        let mut x = rhs.to_vec();

        // forward: apply swaps and L
        for j in 0..n {
            let jp = self.ipiv[j];
            if jp != j {
                x.swap(j, jp);
            }
            let km = kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for i in (j + 1)..=(j + km) {
                    x[i] -= self.ab[j * ldab + (kv + i - j)] * xj;
                }
            }
        }
        // backward: U
        for j in (0..n).rev() {
            let lo = j.saturating_sub(kv);
            x[j] /= self.ab[j * ldab + kv];
            let xj = x[j];
            if xj != 0.0 {
                for i in lo..j {
                    x[i] -= self.ab[j * ldab + (kv + i - j)] * xj;
                }
            }
        }
        Ok(x)
    }
}

/// Factor-and-solve convenience for a single right-hand side.
pub fn banded_solve(matrix: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    banded_lu_factor(matrix)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting; the independent
    /// oracle for the banded path.
    pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for j in 0..n {
            let (jp, pmax) = (j..n)
                .map(|i| (i, m[i][j].abs()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
            if pmax == 0.0 {
                return None;
            }
            m.swap(j, jp);
            x.swap(j, jp);
            for i in (j + 1)..n {
                let l = m[i][j] / m[j][j];
                if l != 0.0 {
                    for k in j..n {
                        m[i][k] -= l * m[j][k];
                    }
                    x[i] -= l * x[j];
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= m[j][j];
            for i in 0..j {
                x[i] -= m[i][j] * x[j];
            }
        }
        Some(x)
    }

    fn random_band_system(rng: &mut ChaCha8Rng, n: usize, hw: usize) -> (BandedMatrix, Vec<f64>) {
        let mut a = BandedMatrix::zeros(n, hw, hw);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in i.saturating_sub(hw)..=(i + hw).min(n - 1) {
                if j != i {
                    let v = rng.gen_range(-1.0..1.0);
                    a.set(i, j, v);
                    row_sum += v.abs();
                }
            }
            // diagonally dominant
            a.set(i, i, row_sum + 1.0 + rng.gen_range(0.0..1.0));
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (a, b)
    }

    #[test]
    fn identity_solves_trivially() {
        let mut a = BandedMatrix::zeros(5, 3, 3);
        for i in 0..5 {
            a.set(i, i, 1.0);
        }
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let x = banded_solve(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(b.iter()) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn three_by_three_matches_dense_oracle() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 2.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 3.0);
        a.set(1, 2, 1.0);
        a.set(2, 1, 1.0);
        a.set(2, 2, 2.0);
        let b = vec![1.0, 2.0, 3.0];
        let x = banded_solve(&a, &b).unwrap();
        let xd = dense_solve(&a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(xd.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn random_diagonally_dominant_systems_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=200);
            let (a, b) = random_band_system(&mut rng, n, 3);
            let x = banded_solve(&a, &b).unwrap();
            let xd = dense_solve(&a.to_dense(), &b).unwrap();
            let err = x
                .iter()
                .zip(xd.iter())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12, "n={n} err={err:e}");
        }
    }

    #[test]
    fn residual_small_on_dominant_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=150);
            let (a, b) = random_band_system(&mut rng, n, 3);
            let x = banded_solve(&a, &b).unwrap();
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                let mut r = -b[i];
                for j in i.saturating_sub(3)..=(i + 3).min(n - 1) {
                    r += a.get(i, j) * x[j];
                }
                assert!(r.abs() <= 1e-12 * (1.0 + bnorm));
            }
        }
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 0.0);
        a.set(2, 2, 1.0);
        match banded_lu_factor(&a) {
            Err(Error::SingularMatrix { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn rhs_length_checked() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        for i in 0..3 {
            a.set(i, i, 1.0);
        }
        let f = banded_lu_factor(&a).unwrap();
        assert!(matches!(
            f.solve(&[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pivoting_handles_non_dominant_rows() {
        // small diagonal forces a swap
        let mut a = BandedMatrix::zeros(4, 2, 2);
        a.set(0, 0, 1e-14);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 1.0);
        a.set(1, 2, 0.5);
        a.set(2, 1, 0.25);
        a.set(2, 2, 2.0);
        a.set(2, 3, 1.0);
        a.set(3, 2, 1.0);
        a.set(3, 3, 3.0);
        let b = vec![1.0, 0.0, 2.0, -1.0];
        let x = banded_solve(&a, &b).unwrap();
        let xd = dense_solve(&a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(xd.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
