//! Two-view regularized canonical correlation analysis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    pub epsilon: f64,
    pub mean_v: Vec<f64>,
    pub mean_p: Vec<f64>,
    /// `d_v x d_e` projection of the first view.
    pub proj_v: Matrix,
    /// `d_p x d_e` projection of the second view.
    pub proj_p: Matrix,
    /// Canonical correlations, descending.
    pub correlations: Vec<f64>,
}

fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let d = rows[0].len();
    DMatrix::from_fn(n, d, |i, j| rows[i][j])
}

fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(x.ncols(), |j, _| x.column(j).mean())
}

fn center(x: &mut DMatrix<f64>, mean: &DVector<f64>) {
    for j in 0..x.ncols() {
        x.column_mut(j).add_scalar_mut(-mean[j]);
    }
}

/// `(S + eps I)^(-1/2)` for a symmetric positive semi-definite `S`.
fn inverse_sqrt(s: DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    let d = s.nrows();
    let eig = SymmetricEigen::new(s + DMatrix::identity(d, d) * eps);
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l <= 0.0 || !l.is_finite()) {
        return Err(Error::Numerical(format!(
            "covariance is not positive definite (eigenvalue {bad:e}); increase epsilon"
        )));
    }
    let inv = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
}

fn to_matrix(m: &DMatrix<f64>) -> Matrix {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect();
    Matrix::from_vec(m.nrows(), m.ncols(), data)
}

/// Fit projections of two paired views onto their `d_e` most correlated
/// directions.
///
/// Each view is centered and whitened with `(Sigma_ii + eps I)^(-1/2)`; the
/// top singular directions of the whitened cross-covariance give the
/// projections. Each direction's sign is fixed so that the largest-magnitude
/// entry of the first view's singular vector is positive.
pub fn fit_fusion(v: &[Vec<f64>], p: &[Vec<f64>], d_e: usize, epsilon: f64) -> Result<FusionModel> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("fusion epsilon must be positive, got {epsilon}")));
    }
    if d_e == 0 {
        return Err(Error::Config("fusion output dimension must be at least 1".into()));
    }
    if v.len() != p.len() {
        return Err(Error::Domain(format!(
            "{} first-view samples but {} second-view samples",
            v.len(),
            p.len()
        )));
    }
    if v.len() < d_e + 1 {
        return Err(Error::Domain(format!(
            "fusion to {d_e} dimensions needs at least {} samples, got {}",
            d_e + 1,
            v.len()
        )));
    }
    let (dv, dp) = (v[0].len(), p[0].len());
    if v.iter().any(|r| r.len() != dv) || p.iter().any(|r| r.len() != dp) {
        return Err(Error::Domain("fusion samples differ in dimension".into()));
    }
    if d_e > dv.min(dp) {
        return Err(Error::Config(format!(
            "fusion output dimension {d_e} exceeds the smaller view dimension {}",
            dv.min(dp)
        )));
    }

    let n = v.len() as f64;
    let mut x = to_dmatrix(v);
    let mut y = to_dmatrix(p);
    let mx = column_means(&x);
    let my = column_means(&y);
    center(&mut x, &mx);
    center(&mut y, &my);
    let sxx = x.transpose() * &x / (n - 1.0);
    let syy = y.transpose() * &y / (n - 1.0);
    let sxy = x.transpose() * &y / (n - 1.0);
    let wx = inverse_sqrt(sxx, epsilon)?;
    let wy = inverse_sqrt(syy, epsilon)?;
    let m = &wx * sxy * &wy;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let mut uk = DMatrix::zeros(dv, d_e);
    let mut vk = DMatrix::zeros(dp, d_e);
    let mut correlations = Vec::with_capacity(d_e);
    for (k, &idx) in order.iter().take(d_e).enumerate() {
        let mut ucol = u.column(idx).into_owned();
        let mut vcol = vt.row(idx).transpose();
        let lead = ucol
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        uk.set_column(k, &ucol);
        vk.set_column(k, &vcol);
        correlations.push(svd.singular_values[idx]);
    }
    let proj_v = &wx * uk;
    let proj_p = &wy * vk;
    if proj_v.iter().chain(proj_p.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("fusion projections are not finite".into()));
    }
    Ok(FusionModel {
        epsilon,
        mean_v: mx.iter().copied().collect(),
        mean_p: my.iter().copied().collect(),
        proj_v: to_matrix(&proj_v),
        proj_p: to_matrix(&proj_p),
        correlations,
    })
}

fn project(x: &[f64], mean: &[f64], proj: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; proj.cols()];
    for (i, (&xi, &mi)) in x.iter().zip(mean).enumerate() {
        let c = xi - mi;
        for (o, &w) in out.iter_mut().zip(proj.row(i)) {
            *o += c * w;
        }
    }
    out
}

impl FusionModel {
    pub fn dim(&self) -> usize {
        self.proj_v.cols()
    }

    pub fn project_v(&self, v: &[f64]) -> Vec<f64> {
        project(v, &self.mean_v, &self.proj_v)
    }

    pub fn project_p(&self, p: &[f64]) -> Vec<f64> {
        project(p, &self.mean_p, &self.proj_p)
    }

    /// Average of the two projected views.
    pub fn fuse(&self, v: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.mean_v.len() || p.len() != self.mean_p.len() {
            return Err(Error::Config(format!(
                "fusion expects views of {} and {} dimensions, got {} and {}",
                self.mean_v.len(),
                self.mean_p.len(),
                v.len(),
                p.len()
            )));
        }
        let a = self.project_v(v);
        let b = self.project_p(p);
        Ok(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect())
    }
}

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
