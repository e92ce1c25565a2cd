use nalgebra::{DMatrix, DVector};

use super::linalg::{collinear_columns, inverse_spd, quad_form, solve_spd, to_rows};
use super::{design_matrix, Coefficient, ModelFit, ModelKind, ModelSpec, TiesMethod, LOGLIK_TOLERANCE};
use crate::error::{Error, Result};
use crate::panel::PanelTable;
use crate::stats::chi2_upper_p;

const MAX_HALVINGS: usize = 40;
/// Largest plausible |log hazard ratio| per standard deviation of a covariate.
const MONOTONE_EFFECT: f64 = 20.0;

/// Counting-process survival data: row `i` is at risk on `(start[i], stop[i]]`
/// and has an event at `stop[i]` when `event[i]`.
#[derive(Debug, Clone)]
pub struct CoxData {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub start: Vec<f64>,
    pub stop: Vec<f64>,
    pub event: Vec<bool>,
    groups: Vec<EventGroup>,
}

#[derive(Debug, Clone)]
struct EventGroup {
    time: f64,
    events: Vec<usize>,
    risk: Vec<usize>,
}

impl CoxData {
    pub fn new(
        names: Vec<String>,
        x: DMatrix<f64>,
        start: Vec<f64>,
        stop: Vec<f64>,
        event: Vec<bool>,
    ) -> Result<Self> {
        let n = x.nrows();
        if start.len() != n || stop.len() != n || event.len() != n || names.len() != x.ncols() {
            return Err(Error::InvalidData("survival data dimensions disagree".into()));
        }
        if let Some(i) = (0..n).find(|&i| !(start[i] < stop[i])) {
            return Err(Error::InvalidData(format!(
                "row {i}: interval ({}, {}] is empty",
                start[i], stop[i]
            )));
        }
        let mut times: Vec<f64> = (0..n).filter(|&i| event[i]).map(|i| stop[i]).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let groups = times
            .into_iter()
            .map(|t| EventGroup {
                time: t,
                events: (0..n).filter(|&i| event[i] && stop[i] == t).collect(),
                risk: (0..n).filter(|&i| start[i] < t && t <= stop[i]).collect(),
            })
            .collect();
        Ok(CoxData {
            names,
            x,
            start,
            stop,
            event,
            groups,
        })
    }

    pub fn from_panel(panel: &PanelTable, terms: &[String]) -> Result<Self> {
        CoxData::new(
            terms.to_vec(),
            design_matrix(panel, terms)?,
            panel.rows.iter().map(|r| r.t_start).collect(),
            panel.rows.iter().map(|r| r.t_stop).collect(),
            panel.rows.iter().map(|r| r.event).collect(),
        )
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_events(&self) -> usize {
        self.event.iter().filter(|e| **e).count()
    }

    /// Rescales column `j` by `c`.
    pub fn scale_column(&mut self, j: usize, c: f64) {
        self.x.column_mut(j).scale_mut(c);
    }
}

/// Log partial likelihood with its analytic gradient and Hessian.
pub fn cox_partial_loglik(
    beta: &DVector<f64>,
    data: &CoxData,
    ties: TiesMethod,
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let p = data.x.ncols();
    let eta = &data.x * beta;
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut ll = 0.0;
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);

    for g in &data.groups {
        if g.risk.is_empty() {
            return Err(Error::EmptyRiskSet(g.time));
        }
        // Shift by the largest predictor in the risk set; it cancels in the ratios.
        let c = g.risk.iter().map(|&i| eta[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut s0 = 0.0;
        let mut s1 = DVector::zeros(p);
        let mut s2 = DMatrix::zeros(p, p);
        for &i in &g.risk {
            let w = (eta[i] - c).exp();
            let xi = data.x.row(i).transpose();
            s0 += w;
            s1.axpy(w, &xi, 1.0);
            s2.ger(w, &xi, &xi, 1.0);
        }
        let mut e0 = 0.0;
        let mut e1 = DVector::zeros(p);
        let mut e2 = DMatrix::zeros(p, p);
        for &i in &g.events {
            let w = (eta[i] - c).exp();
            let xi = data.x.row(i).transpose();
            ll += eta[i];
            grad += &xi;
            e0 += w;
            e1.axpy(w, &xi, 1.0);
            e2.ger(w, &xi, &xi, 1.0);
        }
        let d = g.events.len() as f64;
        for l in 0..g.events.len() {
            let frac = match ties {
                TiesMethod::Efron => l as f64 / d,
                TiesMethod::Breslow => 0.0,
            };
            let a0 = s0 - frac * e0;
            let a1 = &s1 - &e1 * frac;
            let a2 = &s2 - &e2 * frac;
            if !(a0 > 0.0) {
                return Err(Error::NonFinite);
            }
            ll -= a0.ln() + c;
            grad.axpy(-1.0 / a0, &a1, 1.0);
            hess -= a2 / a0;
            hess.ger(1.0 / (a0 * a0), &a1, &a1, 1.0);
        }
    }
    if !ll.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((ll, grad, hess))
}

struct Optimum {
    beta: DVector<f64>,
    loglik: f64,
    hessian: DMatrix<f64>,
    iterations: usize,
    path: Vec<f64>,
}

fn newton(data: &CoxData, ties: TiesMethod, max_iter: usize, tol: f64) -> Result<Optimum> {
    let p = data.x.ncols();
    let mut beta = DVector::zeros(p);
    let (mut ll, mut grad, mut hess) = cox_partial_loglik(&beta, data, ties)?;
    let mut path = vec![ll];
    if p == 0 {
        return Ok(Optimum {
            beta,
            loglik: ll,
            hessian: hess,
            iterations: 0,
            path,
        });
    }
    for iter in 1..=max_iter {
        let info = -&hess;
        let step = solve_spd(&info, &grad).ok_or_else(|| Error::Singular(data.names.clone()))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = &beta + &step * scale;
            match cox_partial_loglik(&candidate, data, ties) {
                Ok(eval) if eval.0 >= ll - 1e-12 * ll.abs().max(1.0) => {
                    accepted = Some((candidate, eval));
                    break;
                }
                Ok(_) | Err(Error::NonFinite) => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((next, (nll, ngrad, nhess))) = accepted else {
            return Err(Error::NonConvergence {
                iterations: iter,
                last: beta.iter().copied().collect(),
            });
        };
        let max_step = (&next - &beta).amax();
        let dll = (nll - ll).abs();
        beta = next;
        ll = nll;
        grad = ngrad;
        hess = nhess;
        path.push(ll);
        if max_step < tol || dll < LOGLIK_TOLERANCE {
            return Ok(Optimum {
                beta,
                loglik: ll,
                hessian: hess,
                iterations: iter,
                path,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last: beta.iter().copied().collect(),
    })
}

/// Maximizes the partial likelihood by Newton-Raphson with step-halving.
pub fn cox_fit_data(
    data: &CoxData,
    name: &str,
    ties: TiesMethod,
    max_iter: usize,
    tol: f64,
) -> Result<ModelFit> {
    if data.n_events() == 0 {
        return Err(Error::InvalidData(format!("model '{name}': no events in the panel")));
    }
    if let Some(cols) = collinear_columns(&data.x, &data.names) {
        return Err(Error::Singular(cols));
    }
    let opt = newton(data, ties, max_iter, tol)?;
    let p = data.x.ncols();
    // A monotone likelihood creeps towards infinity in small log-likelihood
    // steps and can satisfy the stopping rule; flag absurd effect sizes.
    let diverged: Vec<String> = (0..p)
        .filter(|&j| {
            let col: Vec<f64> = data.x.column(j).iter().copied().collect();
            opt.beta[j].abs() * crate::stats::population_sd(&col) > MONOTONE_EFFECT
        })
        .map(|j| data.names[j].clone())
        .collect();
    if !diverged.is_empty() {
        return Err(Error::Separation(format!(
            "monotone partial likelihood in {}",
            diverged.join(", ")
        )));
    }
    let info = -&opt.hessian;
    let cov = if p == 0 {
        DMatrix::zeros(0, 0)
    } else {
        inverse_spd(&info, &data.names)?
    };
    let coefficients = (0..p)
        .map(|j| Coefficient::new(&data.names[j], opt.beta[j], cov[(j, j)].sqrt()))
        .collect();
    let null_loglik = opt.path[0];
    let lr = (2.0 * (opt.loglik - null_loglik)).max(0.0);
    let wald = quad_form(&info, &opt.beta);
    let n = data.n_obs() as f64;
    let k = p as f64;
    Ok(ModelFit {
        name: name.to_string(),
        kind: ModelKind::Cox,
        ties: Some(ties),
        coefficients,
        covariance: to_rows(&cov),
        loglik: opt.loglik,
        null_loglik,
        aic: 2.0 * k - 2.0 * opt.loglik,
        bic: k * n.ln() - 2.0 * opt.loglik,
        lr_chi2: lr,
        lr_df: p,
        lr_p: chi2_upper_p(lr, p),
        wald_chi2: wald,
        wald_p: chi2_upper_p(wald, p),
        pseudo_r2: None,
        n_obs: data.n_obs(),
        n_events: data.n_events(),
        n_clusters: None,
        iterations: opt.iterations,
        converged: true,
        loglik_path: opt.path,
    })
}

pub fn cox_fit(panel: &PanelTable, spec: &ModelSpec, default_ties: TiesMethod) -> Result<ModelFit> {
    let (work, terms) = spec.prepare(panel)?;
    let data = CoxData::from_panel(&work, &terms)?;
    let mut fit = cox_fit_data(
        &data,
        &spec.name,
        spec.ties.unwrap_or(default_ties),
        spec.max_iter,
        spec.tolerance,
    )?;
    fit.n_clusters = Some(work.startups().len());
    Ok(fit)
}
