use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::linalg::{collinear_columns, inverse_spd, quad_form, solve_spd, to_rows};
use super::{design_matrix, Coefficient, ModelFit, ModelKind, ModelSpec, LOGLIK_TOLERANCE};
use crate::error::{Error, Result};
use crate::panel::PanelTable;
use crate::stats::chi2_upper_p;

pub const INTERCEPT: &str = "_cons";
/// Fitted linear predictors beyond this magnitude mean probabilities of 0 or 1.
const SEPARATION_ETA: f64 = 30.0;
/// Largest plausible |log odds ratio| per standard deviation of a covariate.
const SEPARATION_EFFECT: f64 = 20.0;
const MAX_HALVINGS: usize = 40;

/// Binary outcome data; `x` excludes the intercept, which the fit adds.
#[derive(Debug, Clone)]
pub struct LogitData {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Vec<bool>,
    pub clusters: Vec<String>,
}

impl LogitData {
    pub fn new(names: Vec<String>, x: DMatrix<f64>, y: Vec<bool>, clusters: Vec<String>) -> Result<Self> {
        if y.len() != x.nrows() || names.len() != x.ncols() {
            return Err(Error::InvalidData("logit data dimensions disagree".into()));
        }
        if clusters.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} cluster ids for {} observations",
                clusters.len(),
                y.len()
            )));
        }
        if let Some(i) = clusters.iter().position(|c| c.is_empty()) {
            return Err(Error::InvalidData(format!("observation {i} has an empty cluster id")));
        }
        Ok(LogitData { names, x, y, clusters })
    }

    pub fn from_panel(panel: &PanelTable, terms: &[String]) -> Result<Self> {
        LogitData::new(
            terms.to_vec(),
            design_matrix(panel, terms)?,
            panel.rows.iter().map(|r| r.event).collect(),
            panel.rows.iter().map(|r| r.startup_id.clone()).collect(),
        )
    }

    fn with_intercept(&self) -> DMatrix<f64> {
        let (n, p) = self.x.shape();
        DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { self.x[(i, j - 1)] })
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn loglik(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let eta = x * beta;
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let p = x.ncols();
    let mut ll = 0.0;
    let mut grad = DVector::zeros(p);
    let mut info = DMatrix::zeros(p, p);
    for i in 0..x.nrows() {
        let e = eta[i];
        let yi = y[i] as u8 as f64;
        ll += yi * e - softplus(e);
        let mu = sigmoid(e);
        let xi = x.row(i).transpose();
        grad.axpy(yi - mu, &xi, 1.0);
        info.ger(mu * (1.0 - mu), &xi, &xi, 1.0);
    }
    Ok((ll, grad, info))
}

/// Scores `x_i (y_i - p_i)` for every observation, one row each.
fn scores(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = x * beta;
    let mut s = x.clone();
    for i in 0..x.nrows() {
        let r = y[i] as u8 as f64 - sigmoid(eta[i]);
        s.row_mut(i).scale_mut(r);
    }
    s
}

/// Heteroskedasticity-robust (HC0) sandwich: `A⁻¹ (Σ s_i s_iᵀ) A⁻¹`.
pub fn hc0_covariance(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>, bread: &DMatrix<f64>) -> DMatrix<f64> {
    let s = scores(x, y, beta);
    let meat = s.transpose() * &s;
    bread * meat * bread
}

/// Cluster-robust sandwich without small-sample correction:
/// `A⁻¹ (Σ_g u_g u_gᵀ) A⁻¹` with `u_g` the summed scores of cluster `g`.
pub fn cluster_covariance(
    x: &DMatrix<f64>,
    y: &[bool],
    beta: &DVector<f64>,
    bread: &DMatrix<f64>,
    clusters: &[String],
) -> DMatrix<f64> {
    let s = scores(x, y, beta);
    let p = x.ncols();
    let mut sums: BTreeMap<&str, DVector<f64>> = BTreeMap::new();
    for (i, c) in clusters.iter().enumerate() {
        let row = s.row(i).transpose();
        *sums.entry(c.as_str()).or_insert_with(|| DVector::zeros(p)) += row;
    }
    let mut meat = DMatrix::zeros(p, p);
    for u in sums.values() {
        meat.ger(1.0, u, u, 1.0);
    }
    bread * meat * bread
}

/// Maximum-likelihood logit with an intercept and startup-clustered standard errors.
pub fn logit_fit_data(data: &LogitData, name: &str, max_iter: usize, tol: f64) -> Result<ModelFit> {
    let n = data.y.len();
    let n1 = data.y.iter().filter(|v| **v).count();
    if n1 == 0 || n1 == n {
        return Err(Error::Separation(format!(
            "model '{name}': outcome is constant ({n1} events in {n} observations)"
        )));
    }
    if let Some(cols) = collinear_columns(&data.x, &data.names) {
        return Err(Error::Singular(cols));
    }
    let x = data.with_intercept();
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(data.names.iter().cloned());
    let p = x.ncols();

    let mut beta = DVector::zeros(p);
    let (mut ll, mut grad, mut info) = loglik(&x, &data.y, &beta)?;
    let mut path = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    for iter in 1..=max_iter {
        iterations = iter;
        let step = solve_spd(&info, &grad).ok_or_else(|| Error::Singular(names.clone()))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = &beta + &step * scale;
            match loglik(&x, &data.y, &candidate) {
                Ok(eval) if eval.0 >= ll - 1e-12 * ll.abs().max(1.0) => {
                    accepted = Some((candidate, eval));
                    break;
                }
                Ok(_) | Err(Error::NonFinite) => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((next, (nll, ngrad, ninfo))) = accepted else {
            break;
        };
        let max_step = (&next - &beta).amax();
        let dll = (nll - ll).abs();
        beta = next;
        ll = nll;
        grad = ngrad;
        info = ninfo;
        path.push(ll);
        if max_step < tol || dll < LOGLIK_TOLERANCE {
            converged = true;
            break;
        }
    }
    let eta = &x * &beta;
    let extreme = (0..data.x.ncols()).any(|j| {
        let col: Vec<f64> = data.x.column(j).iter().copied().collect();
        beta[j + 1].abs() * crate::stats::population_sd(&col) > SEPARATION_EFFECT
    });
    if extreme || eta.amax() > SEPARATION_ETA {
        return Err(Error::Separation(format!(
            "model '{name}': fitted probabilities of 0 or 1"
        )));
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            last: beta.iter().copied().collect(),
        });
    }

    let bread = inverse_spd(&info, &names)?;
    let cov = cluster_covariance(&x, &data.y, &beta, &bread, &data.clusters);
    let coefficients: Vec<Coefficient> = (0..p)
        .map(|j| Coefficient::new(&names[j], beta[j], cov[(j, j)].sqrt()))
        .collect();

    let pbar = n1 as f64 / n as f64;
    let null_loglik = n1 as f64 * pbar.ln() + (n - n1) as f64 * (1.0 - pbar).ln();
    let lr = (2.0 * (ll - null_loglik)).max(0.0);
    let k = p - 1;
    let wald = if k == 0 {
        0.0
    } else {
        let sub = cov.view((1, 1), (k, k)).into_owned();
        let b = beta.rows(1, k).into_owned();
        match sub.clone().cholesky() {
            Some(ch) => quad_form(&ch.inverse(), &b),
            None => f64::NAN,
        }
    };
    let kf = p as f64;
    Ok(ModelFit {
        name: name.to_string(),
        kind: ModelKind::Logit,
        ties: None,
        coefficients,
        covariance: to_rows(&cov),
        loglik: ll,
        null_loglik,
        aic: 2.0 * kf - 2.0 * ll,
        bic: kf * (n as f64).ln() - 2.0 * ll,
        lr_chi2: lr,
        lr_df: k,
        lr_p: chi2_upper_p(lr, k),
        wald_chi2: wald,
        wald_p: chi2_upper_p(wald, k),
        pseudo_r2: Some(1.0 - ll / null_loglik),
        n_obs: n,
        n_events: n1,
        n_clusters: Some(data.clusters.iter().collect::<std::collections::BTreeSet<_>>().len()),
        iterations,
        converged,
        loglik_path: path,
    })
}

/// Pooled logit of the event flag on the spec's terms, clustered by startup.
pub fn logit_fit(panel: &PanelTable, spec: &ModelSpec) -> Result<ModelFit> {
    let (work, terms) = spec.prepare(panel)?;
    let data = LogitData::from_panel(&work, &terms)?;
    logit_fit_data(&data, &spec.name, spec.max_iter, spec.tolerance)
}
