use nalgebra::{DMatrix, DVector};

use super::design_matrix;
use super::linalg::collinear_columns;
use super::ModelSpec;
use crate::error::{Error, Result};
use crate::panel::PanelTable;

/// Variance inflation factors `1 / (1 - R²_j)`, each from the least-squares
/// regression of column `j` on an intercept and the remaining columns.
pub fn vif(x: &DMatrix<f64>, names: &[String]) -> Result<Vec<f64>> {
    let (n, p) = x.shape();
    if p < 2 {
        return Err(Error::InvalidData(format!("VIF needs at least 2 covariates, got {p}")));
    }
    if let Some(cols) = collinear_columns(x, names) {
        return Err(Error::Singular(cols));
    }
    (0..p)
        .map(|j| {
            let y: DVector<f64> = x.column(j).into_owned();
            let others = DMatrix::from_fn(n, p, |i, c| match c {
                0 => 1.0,
                c if c <= j => x[(i, c - 1)],
                c => x[(i, c)],
            });
            let svd = others.clone().svd(true, true);
            let coef = svd
                .solve(&y, 1e-12)
                .map_err(|_| Error::Singular(names.to_vec()))?;
            let fitted = &others * coef;
            let my = y.mean();
            let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
            let ssr: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
            let r2 = 1.0 - ssr / sst;
            if !(r2 < 1.0) {
                return Err(Error::Singular(vec![names[j].clone()]));
            }
            Ok(1.0 / (1.0 - r2))
        })
        .collect()
}

/// VIFs of a model's design, paired with the term names.
pub fn vif_for_spec(panel: &PanelTable, spec: &ModelSpec) -> Result<Vec<(String, f64)>> {
    let (work, terms) = spec.prepare(panel)?;
    let x = design_matrix(&work, &terms)?;
    Ok(terms.iter().cloned().zip(vif(&x, &terms)?).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn orthogonal_columns() {
        let col = |i: usize, j: usize| -> f64 {
            let a = [1.0, -1.0, 1.0, -1.0];
            let b = [1.0, 1.0, -1.0, -1.0];
            if j == 0 { a[i % 4] } else { b[i % 4] }
        };
        let x = DMatrix::from_fn(8, 2, col);
        for v in vif(&x, &names(2)).unwrap() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn near_collinear_is_large() {
        let x = DMatrix::from_fn(50, 2, |i, j| {
            let base = (i as f64 * 0.37).sin();
            if j == 0 { base } else { base + 1e-3 * (i as f64 * 1.7).cos() }
        });
        assert!(vif(&x, &names(2)).unwrap().iter().all(|v| *v > 10.0));
    }

    #[test]
    fn rank_deficient_is_error() {
        let x = DMatrix::from_fn(10, 3, |i, j| match j {
            0 => i as f64,
            1 => (i * i) as f64,
            _ => 2.0 * i as f64 + 1.0,
        });
        assert!(matches!(vif(&x, &names(3)), Err(Error::Singular(_))));
        assert!(vif(&DMatrix::from_element(5, 1, 1.0), &names(1)).is_err());
    }
}
