//! Dense kernels: thin QR, null-space projection, triangular solves, the
//! BFGS factor stack `B = I + S Vᵀ` and its regularized Woodbury inverse.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold used by every triangular solve.
pub const RANK_TOL: f64 = 1e-12;

/// Limit on the 1-norm condition estimate of the inner Woodbury system.
pub const SMW_COND_LIMIT: f64 = 1e14;

/// Thin QR factorization `M = Q R` of an `n × m` matrix with `n ≥ m`.
///
/// `Q` is `n × m` with orthonormal columns and `R` is `m × m` upper
/// triangular. For `m = 0` both factors are empty and the projector is the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl ThinQr {
    /// Householder factorization truncated to the leading `m` columns.
    pub fn factor(m: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if cols > rows {
            return Err(Error::Dimension {
                what: "thin QR (columns must not exceed rows)",
                expected: rows,
                got: cols,
            });
        }
        if cols == 0 {
            return Ok(Self::empty(rows));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(
                "non-finite entry in matrix passed to thin QR".into(),
            ));
        }
        let qr = m.clone().qr();
        let q = qr.q().columns(0, cols).into_owned();
        let r = qr.r().view((0, 0), (cols, cols)).upper_triangle();
        Ok(Self { q, r })
    }

    /// Factors of an `n × 0` matrix: `P = I`.
    pub fn empty(n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, 0),
            r: DMatrix::zeros(0, 0),
        }
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Number of rows of the factored matrix.
    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    /// Number of factored columns (constraints).
    pub fn ncols(&self) -> usize {
        self.q.ncols()
    }

    /// `v − Q(Qᵀv)`.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        apply_projection(&self.q, v)
    }

    /// Fails when some `|R_ii|` is below `RANK_TOL · max_j |R_jj|`.
    pub fn check_rank(&self) -> Result<()> {
        check_pivots(&self.r)
    }

    /// Solves `Rᵀ d = rhs`.
    pub fn solve_rt(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        solve_rt_lower(&self.r, rhs)
    }

    /// Solves `R x = rhs`.
    pub fn solve_r(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        solve_r_upper(&self.r, rhs)
    }

    /// Minimum-norm solution of `Mᵀ x = rhs`, i.e. `Q R⁻ᵀ rhs`.
    ///
    /// With `M = Aᵀ` this is `A† rhs` for a full-row-rank `A`.
    pub fn min_norm_solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let w = self.solve_rt(rhs)?;
        Ok(&self.q * w)
    }
}

/// Convenience wrapper around [`ThinQr::factor`].
pub fn thin_qr(m: &DMatrix<f64>) -> Result<ThinQr> {
    ThinQr::factor(m)
}

/// Applies `P = I − Q Qᵀ` to `v` without forming `P`.
pub fn apply_projection(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    let coeffs = q.tr_mul(v);
    v - q * coeffs
}

fn check_pivots(r: &DMatrix<f64>) -> Result<()> {
    let m = r.nrows();
    if m == 0 {
        return Ok(());
    }
    let max = (0..m).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    let threshold = RANK_TOL * max;
    for i in 0..m {
        let pivot = r[(i, i)].abs();
        if !(pivot > threshold) || pivot == 0.0 {
            return Err(Error::RankDeficiency {
                index: i,
                pivot,
                threshold,
            });
        }
    }
    Ok(())
}

/// Forward substitution for `Rᵀ d = rhs` with `R` upper triangular.
pub fn solve_rt_lower(r: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let m = r.nrows();
    if rhs.len() != m {
        return Err(Error::Dimension {
            what: "triangular solve right-hand side",
            expected: m,
            got: rhs.len(),
        });
    }
    check_pivots(r)?;
    let mut d = DVector::zeros(m);
    for i in 0..m {
        let mut acc = rhs[i];
        for j in 0..i {
            acc -= r[(j, i)] * d[j];
        }
        d[i] = acc / r[(i, i)];
    }
    Ok(d)
}

/// Back substitution for `R x = rhs` with `R` upper triangular.
pub fn solve_r_upper(r: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let m = r.nrows();
    if rhs.len() != m {
        return Err(Error::Dimension {
            what: "triangular solve right-hand side",
            expected: m,
            got: rhs.len(),
        });
    }
    check_pivots(r)?;
    let mut x = DVector::zeros(m);
    for i in (0..m).rev() {
        let mut acc = rhs[i];
        for j in i + 1..m {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    Ok(x)
}

/// Full QR of a square matrix, kept for repeated solves.
#[derive(Debug, Clone)]
pub struct DenseQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl DenseQr {
    pub fn factor(b: &DMatrix<f64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::Dimension {
                what: "dense QR (matrix must be square)",
                expected: b.nrows(),
                got: b.ncols(),
            });
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(
                "non-finite entry in matrix passed to dense QR".into(),
            ));
        }
        let qr = b.clone().qr();
        let r = qr.r();
        check_pivots(&r)?;
        Ok(Self { q: qr.q(), r })
    }

    /// The identity factorization (`Q = R = I`).
    pub fn identity(n: usize) -> Self {
        Self {
            q: DMatrix::identity(n, n),
            r: DMatrix::identity(n, n),
        }
    }

    /// Solves `B d = rhs` as `R d = Qᵀ rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.q.nrows() {
            return Err(Error::Dimension {
                what: "dense QR right-hand side",
                expected: self.q.nrows(),
                got: rhs.len(),
            });
        }
        solve_r_upper(&self.r, &self.q.tr_mul(rhs))
    }
}

/// Solves `B d = rhs` by a full QR factorization of `B`.
pub fn dense_qr_solve(b: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    DenseQr::factor(b)?.solve(rhs)
}

/// Low-rank factors of the BFGS matrix `B = I + S Vᵀ`.
///
/// Column pairs are appended two at a time; a rejected curvature pair
/// appends two zero columns. A fresh stack holds one zero column pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsFactors {
    n: usize,
    s_cols: Vec<DVector<f64>>,
    v_cols: Vec<DVector<f64>>,
}

impl BfgsFactors {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            s_cols: vec![DVector::zeros(n)],
            v_cols: vec![DVector::zeros(n)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored column count `p`, zero columns included.
    pub fn width(&self) -> usize {
        self.s_cols.len()
    }

    /// Number of stored columns that are not zero placeholders.
    pub fn active_width(&self) -> usize {
        self.active_indices().len()
    }

    fn active_indices(&self) -> Vec<usize> {
        (0..self.s_cols.len())
            .filter(|&i| {
                self.s_cols[i].iter().any(|&x| x != 0.0) || self.v_cols[i].iter().any(|&x| x != 0.0)
            })
            .collect()
    }

    fn assemble(cols: &[DVector<f64>], idx: &[usize], n: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            out.set_column(j, &cols[i]);
        }
        out
    }

    /// `S` with every stored column.
    pub fn s_matrix(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.width()).collect();
        Self::assemble(&self.s_cols, &all, self.n)
    }

    /// `V` with every stored column.
    pub fn v_matrix(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.width()).collect();
        Self::assemble(&self.v_cols, &all, self.n)
    }

    /// `(S, V)` with the zero column pairs dropped. `S Vᵀ` is unchanged.
    pub fn compact(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let idx = self.active_indices();
        (
            Self::assemble(&self.s_cols, &idx, self.n),
            Self::assemble(&self.v_cols, &idx, self.n),
        )
    }

    /// `B x = x + S (Vᵀ x)`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = x.clone();
        for (s, v) in self.s_cols.iter().zip(&self.v_cols) {
            let coeff = v.dot(x);
            if coeff != 0.0 {
                out.axpy(coeff, s, 1.0);
            }
        }
        out
    }

    /// Dense reconstruction `I + S Vᵀ`.
    pub fn dense(&self) -> DMatrix<f64> {
        let (s, v) = self.compact();
        DMatrix::identity(self.n, self.n) + s * v.transpose()
    }

    /// Appends the BFGS pair for step `s` and gradient change `y`.
    ///
    /// When `yᵀs > 0` the pair `[y/√(sᵀy), m/√(sᵀm)]` goes into `S` and
    /// `[y/√(sᵀy), −m/√(sᵀm)]` into `V`, with `m = B s`. Otherwise two zero
    /// columns are appended and `B` is unchanged.
    pub fn append(&self, s: &DVector<f64>, y: &DVector<f64>) -> Result<Self> {
        if s.len() != self.n || y.len() != self.n {
            return Err(Error::Dimension {
                what: "BFGS pair",
                expected: self.n,
                got: if s.len() != self.n { s.len() } else { y.len() },
            });
        }
        let mut next = self.clone();
        let ys = y.dot(s);
        if ys > 0.0 {
            let m_vec = self.apply(s);
            let sm = s.dot(&m_vec);
            if !(sm > 0.0) {
                return Err(Error::NumericalBreakdown(format!(
                    "BFGS update with sᵀBs = {sm:e} ≤ 0; previous factors lost positive definiteness"
                )));
            }
            let y_col = y / ys.sqrt();
            let m_col = m_vec / sm.sqrt();
            next.s_cols.push(y_col.clone());
            next.s_cols.push(m_col.clone());
            next.v_cols.push(y_col);
            next.v_cols.push(-m_col);
        } else {
            for _ in 0..2 {
                next.s_cols.push(DVector::zeros(self.n));
                next.v_cols.push(DVector::zeros(self.n));
            }
        }
        Ok(next)
    }
}

/// Convenience wrapper around [`BfgsFactors::append`].
pub fn bfgs_append(factors: &BfgsFactors, s: &DVector<f64>, y: &DVector<f64>) -> Result<BfgsFactors> {
    factors.append(s, y)
}

/// Computes `(σI + I + S Vᵀ)⁻¹ v` through the Woodbury identity
///
/// `(1/(1+σ)) (v − S ((1+σ)I + VᵀS)⁻¹ Vᵀ v)`.
pub fn smw_apply_inverse(factors: &BfgsFactors, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("regularization σ = {sigma} must be positive")));
    }
    if v.len() != factors.dim() {
        return Err(Error::Dimension {
            what: "Woodbury right-hand side",
            expected: factors.dim(),
            got: v.len(),
        });
    }
    let shift = 1.0 + sigma;
    let (s, vm) = factors.compact();
    let p = s.ncols();
    if p == 0 {
        return Ok(v / shift);
    }
    let inner = DMatrix::identity(p, p) * shift + vm.tr_mul(&s);
    let inv = inner
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let condition = one_norm(&inner) * one_norm(&inv);
    if !condition.is_finite() || condition > SMW_COND_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    let w = inv * vm.tr_mul(v);
    Ok((v - s * w) / shift)
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖v‖∞`, zero for an empty vector.
pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Entrywise max magnitude of a matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn qr_of_identity() {
        let qr = thin_qr(&DMatrix::identity(3, 3)).unwrap();
        let recon = qr.q() * qr.r();
        assert!((recon - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-15);
        for i in 0..3 {
            assert!((qr.r()[(i, i)].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn qr_three_four_five() {
        let qr = thin_qr(&dmatrix![3.0; 4.0]).unwrap();
        let sign = qr.r()[(0, 0)].signum();
        assert!((qr.r()[(0, 0)] * sign - 5.0).abs() < 1e-14);
        assert!((qr.q()[(0, 0)] * sign - 0.6).abs() < 1e-15);
        assert!((qr.q()[(1, 0)] * sign - 0.8).abs() < 1e-15);
    }

    #[test]
    fn qr_rejects_wide_input() {
        assert!(matches!(
            thin_qr(&DMatrix::zeros(2, 3)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn projection_onto_coordinate() {
        let qr = thin_qr(&dmatrix![1.0; 0.0]).unwrap();
        let p = qr.project(&dvector![3.0, 7.0]);
        assert!(p[0].abs() < 1e-15);
        assert!((p[1] - 7.0).abs() < 1e-15);
    }

    #[test]
    fn projection_with_no_constraints_is_identity() {
        let v = dvector![1.0, -2.0, 3.5];
        assert_eq!(ThinQr::empty(3).project(&v), v);
    }

    #[test]
    fn rt_solve_examples() {
        let d = solve_rt_lower(&DMatrix::identity(2, 2), &dvector![1.0, 2.0]).unwrap();
        assert_eq!(d, dvector![1.0, 2.0]);
        let r = dmatrix![2.0, 1.0; 0.0, 3.0];
        let d = solve_rt_lower(&r, &dvector![4.0, 5.0]).unwrap();
        // Rᵀ = [[2,0],[1,3]]: 2 d1 = 4, d1 + 3 d2 = 5
        assert!((d[0] - 2.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rt_solve_tiny_pivot() {
        let r = dmatrix![1.0, 0.0; 0.0, 1e-15];
        assert!(matches!(
            solve_rt_lower(&r, &dvector![1.0, 1.0]),
            Err(Error::RankDeficiency { index: 1, .. })
        ));
    }

    #[test]
    fn dense_qr_diagonal() {
        assert_eq!(
            dense_qr_solve(&DMatrix::identity(2, 2), &dvector![3.0, -1.0]).unwrap(),
            dvector![3.0, -1.0]
        );
        let d = dense_qr_solve(&dmatrix![2.0, 0.0; 0.0, 4.0], &dvector![2.0, 8.0]).unwrap();
        assert!((d - dvector![1.0, 2.0]).amax() < 1e-14);
    }

    #[test]
    fn dense_qr_singular() {
        assert!(matches!(
            dense_qr_solve(&dmatrix![1.0, 1.0; 1.0, 1.0], &dvector![1.0, 1.0]),
            Err(Error::RankDeficiency { .. })
        ));
    }

    #[test]
    fn fresh_factors_are_identity() {
        let f = BfgsFactors::new(3);
        assert_eq!(f.width(), 1);
        assert_eq!(f.active_width(), 0);
        assert_eq!(f.dense(), DMatrix::identity(3, 3));
    }

    #[test]
    fn bfgs_single_update() {
        let f = BfgsFactors::new(2)
            .append(&dvector![1.0, 0.0], &dvector![2.0, 0.0])
            .unwrap();
        assert_eq!(f.width(), 3);
        assert!((f.dense() - dmatrix![2.0, 0.0; 0.0, 1.0]).abs().max() < 1e-15);
    }

    #[test]
    fn bfgs_skip_branch() {
        let f0 = BfgsFactors::new(2)
            .append(&dvector![1.0, 0.0], &dvector![2.0, 0.0])
            .unwrap();
        let f1 = f0.append(&dvector![1.0, 0.0], &dvector![0.0, 3.0]).unwrap();
        assert_eq!(f1.width(), 5);
        assert_eq!(f1.active_width(), 2);
        assert_eq!(f1.dense(), f0.dense());
    }

    #[test]
    fn bfgs_breakdown_on_indefinite_prior() {
        // Hand-built indefinite B = I − 2 e1 e1ᵀ
        let bad = BfgsFactors {
            n: 2,
            s_cols: vec![dvector![1.0, 0.0]],
            v_cols: vec![dvector![-2.0, 0.0]],
        };
        assert!(matches!(
            bad.append(&dvector![1.0, 0.0], &dvector![1.0, 0.0]),
            Err(Error::NumericalBreakdown(_))
        ));
    }

    #[test]
    fn smw_identity_case() {
        let out = smw_apply_inverse(&BfgsFactors::new(2), 1.0, &dvector![2.0, 4.0]).unwrap();
        assert_eq!(out, dvector![1.0, 2.0]);
    }

    #[test]
    fn smw_after_one_update() {
        let f = BfgsFactors::new(2)
            .append(&dvector![1.0, 0.0], &dvector![2.0, 0.0])
            .unwrap();
        let out = smw_apply_inverse(&f, 0.5, &dvector![5.0, 3.0]).unwrap();
        assert!((out - dvector![2.0, 2.0]).amax() < 1e-14);
    }

    #[test]
    fn smw_rejects_nonpositive_sigma() {
        assert!(smw_apply_inverse(&BfgsFactors::new(2), 0.0, &dvector![1.0, 1.0]).is_err());
    }
}
