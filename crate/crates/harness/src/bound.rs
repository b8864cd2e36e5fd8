use crate::error::{HarnessError, Result};

/// C0·u_f(n)·log n/n + C1·log n/n + C2/n, logs base two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedundancyBound {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

fn features(n: u64, uf: u64) -> [f64; 3] {
    let n = n as f64;
    let l = n.log2();
    [uf as f64 * l / n, l / n, 1.0 / n]
}

impl RedundancyBound {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if [c0, c1, c2].iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(HarnessError::Config("bound constants must be finite and nonnegative".into()));
        }
        Ok(RedundancyBound { c0, c1, c2 })
    }

    pub fn eval(&self, n: u64, uf: u64) -> f64 {
        let f = features(n, uf);
        self.c0 * f[0] + self.c1 * f[1] + self.c2 * f[2]
    }

    /// Nonnegative least squares over (n, u_f(n), redundancy) points, by
    /// solving every active set and keeping the best feasible one.
    pub fn fit(points: &[(u64, u64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(HarnessError::Config("no points to fit".into()));
        }
        let rows: Vec<([f64; 3], f64)> = points.iter().map(|&(n, uf, r)| (features(n, uf), r)).collect();
        let mut best: Option<([f64; 3], f64)> = None;
        for set in 0u8..8 {
            let idx: Vec<usize> = (0..3).filter(|i| set >> i & 1 == 1).collect();
            let Some(sol) = solve_subset(&rows, &idx) else { continue };
            if sol.iter().any(|c| *c < 0.0) {
                continue;
            }
            let mut c = [0.0; 3];
            for (j, &i) in idx.iter().enumerate() {
                c[i] = sol[j];
            }
            let res: f64 = rows.iter().map(|(f, r)| (f[0] * c[0] + f[1] * c[1] + f[2] * c[2] - r).powi(2)).sum();
            if best.as_ref().is_none_or(|b| res < b.1 - 1e-15) {
                best = Some((c, res));
            }
        }
        let (c, _) = best.expect("the empty active set is always feasible");
        RedundancyBound::new(c[0], c[1], c[2])
    }

    /// The curve decreases from every grid point past `from` to the next.
    pub fn decreasing_after(&self, grid: &[(u64, u64)], from: u64) -> bool {
        grid.windows(2)
            .filter(|w| w[0].0 >= from)
            .all(|w| self.eval(w[1].0, w[1].1) <= self.eval(w[0].0, w[0].1))
    }
}

/// Normal equations on the chosen columns, by Gaussian elimination.
fn solve_subset(rows: &[([f64; 3], f64)], idx: &[usize]) -> Option<Vec<f64>> {
    let m = idx.len();
    if m == 0 {
        return Some(vec![]);
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (f, r) in rows {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += f[idx[i]] * f[idx[j]];
            }
            a[i][m] += f[idx[i]] * r;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..m {
            if row != col {
                let f = a[row][col] / a[col][col];
                for j in col..=m {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}
