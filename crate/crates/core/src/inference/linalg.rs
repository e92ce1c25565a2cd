use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest accepted ratio of singular values of the column-normalized,
/// centered design.
const RANK_TOL: f64 = 1e-8;
const LOADING_TOL: f64 = 0.1;

/// Names the columns involved in an (affine) linear dependency, if any.
/// Columns are centered, so a constant column counts as collinear.
pub fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Option<Vec<String>> {
    let (n, p) = x.shape();
    if p == 0 {
        return None;
    }
    let mut z = x.clone();
    let mut constant = Vec::new();
    for j in 0..p {
        let mut col = z.column_mut(j);
        let m = col.sum() / n as f64;
        col.add_scalar_mut(-m);
        let norm = col.norm();
        if norm <= 1e-12 * (1.0 + m.abs()) * (n as f64).sqrt() {
            constant.push(names[j].clone());
        } else {
            col /= norm;
        }
    }
    if !constant.is_empty() {
        return Some(constant);
    }
    if n < p + 1 {
        return Some(names.to_vec());
    }
    let svd = z.svd(false, true);
    let sv = &svd.singular_values;
    let (kmin, smin) = sv
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let smax = sv.max();
    if smin > RANK_TOL * smax {
        return None;
    }
    let v_t = svd.v_t.expect("requested right singular vectors");
    let loading = v_t.row(kmin);
    let named: Vec<String> = (0..p)
        .filter(|&j| loading[j].abs() > LOADING_TOL)
        .map(|j| names[j].clone())
        .collect();
    Some(if named.is_empty() { names.to_vec() } else { named })
}

pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    a.clone().lu().solve(b)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inverse_spd(a: &DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>> {
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.inverse()),
        None => Err(Error::Singular(names.to_vec())),
    }
}

/// `vᵀ A v`.
pub fn quad_form(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(a * v))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}
