use super::{column_ranks, RawSample};
use crate::error::{Error, Result};

/// The two empirical copulas of a raw sample.
///
/// * rank based: `C_n(u) = (1/n) #{i : F_n^j(U_ij) ≤ u_j for all j}`
/// * quantile based: `C̃_n(u) = (1/n) #{i : U_ij ≤ F_n^{j−}(u_j) for all j}`,
///   with `F_n^{j−}(u) = inf{x : F_n^j(x) ≥ u}` (so `F_n^{j−}(0) = −∞`).
///
/// They agree on the grid `{k/n}^d` and differ by at most `d/n` anywhere.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    n: usize,
    d: usize,
    /// Row-major `U`.
    values: Vec<f64>,
    /// Row-major ranks.
    ranks: Vec<usize>,
    /// Sorted columns.
    sorted: Vec<Vec<f64>>,
}

impl EmpiricalCopula {
    pub fn new(raw: &RawSample) -> Self {
        let u = raw.values();
        let (n, d) = u.dim();
        let mut ranks = vec![0; n * d];
        let mut sorted = Vec::with_capacity(d);
        for j in 0..d {
            for (i, r) in column_ranks(u.column(j)).into_iter().enumerate() {
                ranks[i * d + j] = r;
            }
            let mut col = u.column(j).to_vec();
            col.sort_by(f64::total_cmp);
            sorted.push(col);
        }
        Self {
            n,
            d,
            values: u.iter().copied().collect(),
            ranks,
            sorted,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: u.len(),
            });
        }
        match u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            Some(&value) => Err(Error::OutsideUnitCube { value }),
            None => Ok(()),
        }
    }

    /// `C_n(u)`.
    pub fn rank_based(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let nf = self.n as f64;
        let count = self
            .ranks
            .chunks_exact(self.d)
            .filter(|row| row.iter().zip(u).all(|(&r, &uj)| r as f64 / nf <= uj))
            .count();
        Ok(count as f64 / nf)
    }

    /// `C̃_n(u)`.
    pub fn quantile_based(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let mut thresholds = Vec::with_capacity(self.d);
        for (j, &uj) in u.iter().enumerate() {
            match self.quantile_index(uj) {
                0 => return Ok(0.0),
                k => thresholds.push(self.sorted[j][k - 1]),
            }
        }
        let count = self
            .values
            .chunks_exact(self.d)
            .filter(|row| row.iter().zip(&thresholds).all(|(x, t)| x <= t))
            .count();
        Ok(count as f64 / self.n as f64)
    }

    /// Smallest `k ∈ {0, …, n}` with `k/n ≥ u`; `k = 0` stands for `−∞`.
    fn quantile_index(&self, u: f64) -> usize {
        let nf = self.n as f64;
        let mut k = ((u * nf).ceil().max(0.0) as usize).min(self.n);
        while k > 0 && (k - 1) as f64 / nf >= u {
            k -= 1;
        }
        while k < self.n && (k as f64) / nf < u {
            k += 1;
        }
        k
    }
}

/// `(C_n(u), C̃_n(u))` for a raw sample.
pub fn empirical_copulas(raw: &RawSample, u: &[f64]) -> Result<(f64, f64)> {
    let ec = EmpiricalCopula::new(raw);
    Ok((ec.rank_based(u)?, ec.quantile_based(u)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> RawSample {
        RawSample::new(array![[0.9, 0.2], [0.1, 0.6], [0.5, 0.4], [0.3, 0.8]]).unwrap()
    }

    #[test]
    fn full_mass_at_the_top_corner() {
        assert_eq!(empirical_copulas(&sample(), &[1.0, 1.0]).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn grounded_at_zero() {
        let (cn, ct) = empirical_copulas(&sample(), &[0.0, 0.7]).unwrap();
        assert_eq!((cn, ct), (0.0, 0.0));
    }

    #[test]
    fn agree_on_the_rank_grid() {
        let ec = EmpiricalCopula::new(&sample());
        for a in 0..=4 {
            for b in 0..=4 {
                let u = [a as f64 / 4.0, b as f64 / 4.0];
                assert_eq!(ec.rank_based(&u).unwrap(), ec.quantile_based(&u).unwrap());
            }
        }
    }

    #[test]
    fn off_grid_values_by_hand() {
        // Rank pairs (4,1) (1,3) (3,2) (2,4). At u = (0.6, 0.6) the rank
        // version needs both ranks ≤ 2 (none), the quantile version ≤ 3 (two).
        let ec = EmpiricalCopula::new(&sample());
        assert_eq!(ec.rank_based(&[0.6, 0.6]).unwrap(), 0.0);
        assert_eq!(ec.quantile_based(&[0.6, 0.6]).unwrap(), 0.5);
    }
}
