//! Cox proportional-hazards and clustered logit estimation on the panel.

mod cox;
mod linalg;
mod logit;
mod report;
mod vif;

pub use cox::{cox_fit, cox_fit_data, cox_partial_loglik, CoxData};
pub use logit::{cluster_covariance, hc0_covariance, logit_fit, logit_fit_data, LogitData};
pub use report::ModelReport;
pub use vif::{vif, vif_for_spec};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{outlier_filter, PanelTable};
use crate::stats::stars;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Secondary stopping rule on the change in log-likelihood.
pub const LOGLIK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiesMethod {
    #[default]
    Efron,
    Breslow,
}

impl std::str::FromStr for TiesMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "efron" => Ok(TiesMethod::Efron),
            "breslow" => Ok(TiesMethod::Breslow),
            other => Err(Error::Config(format!(
                "unknown ties method '{other}' (expected efron or breslow)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Cox,
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierRule {
    pub variable: String,
    pub k: f64,
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// One model to estimate. `topic_*` in `covariates` expands to every topic column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub interactions: Vec<(String, String)>,
    /// Falls back to the run-wide setting when absent.
    #[serde(default)]
    pub ties: Option<TiesMethod>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub outlier_filter: Option<OutlierRule>,
}

impl ModelSpec {
    pub fn cox(name: &str, covariates: &[&str]) -> Self {
        ModelSpec {
            name: name.to_string(),
            kind: ModelKind::Cox,
            covariates: covariates.iter().map(|s| s.to_string()).collect(),
            interactions: Vec::new(),
            ties: None,
            max_iter: DEFAULT_MAX_ITER,
            tolerance: DEFAULT_TOLERANCE,
            outlier_filter: None,
        }
    }

    pub fn logit(name: &str, covariates: &[&str]) -> Self {
        ModelSpec {
            kind: ModelKind::Logit,
            ..ModelSpec::cox(name, covariates)
        }
    }

    pub fn with_interaction(mut self, a: &str, b: &str) -> Self {
        self.interactions.push((a.to_string(), b.to_string()));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "model '{}': tolerance must be positive",
                self.name
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config(format!(
                "model '{}': max_iter must be at least 1",
                self.name
            )));
        }
        if let Some(rule) = &self.outlier_filter {
            if !(rule.k > 0.0) {
                return Err(Error::Config(format!(
                    "model '{}': outlier k must be positive",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Column names of the design, in order: expanded covariates, then interactions.
    pub fn terms(&self, panel: &PanelTable) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.covariates {
            if c == "topic_*" {
                out.extend(panel.topic_columns());
            } else {
                panel.column_index(c)?;
                out.push(c.clone());
            }
        }
        for (a, b) in &self.interactions {
            panel.column_index(a)?;
            panel.column_index(b)?;
            out.push(interaction_name(a, b));
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &out {
            if !seen.insert(t) {
                return Err(Error::Config(format!(
                    "model '{}': term '{t}' listed twice",
                    self.name
                )));
            }
        }
        Ok(out)
    }

    /// Applies the outlier rule and interactions, returning the working panel and terms.
    pub fn prepare(&self, panel: &PanelTable) -> Result<(PanelTable, Vec<String>)> {
        self.validate()?;
        let terms = self.terms(panel)?;
        let mut work = match &self.outlier_filter {
            Some(rule) => outlier_filter(panel, &rule.variable, rule.k)?,
            None => panel.clone(),
        };
        let pairs: Vec<(&str, &str)> = self
            .interactions
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        work = interaction_terms(&work, &pairs)?;
        Ok((work, terms))
    }
}

pub fn interaction_name(a: &str, b: &str) -> String {
    format!("{a}*{b}")
}

/// Appends the elementwise product of each pair as a column named `a*b`.
/// Pairs whose column already exists are left alone.
pub fn interaction_terms(panel: &PanelTable, pairs: &[(&str, &str)]) -> Result<PanelTable> {
    let mut out = panel.clone();
    for (a, b) in pairs {
        let name = interaction_name(a, b);
        let (ca, cb) = (out.column(a)?, out.column(b)?);
        if out.covariate_names.contains(&name) {
            continue;
        }
        let prod = ca.iter().zip(&cb).map(|(x, y)| x * y).collect();
        out.push_column(&name, prod)?;
    }
    Ok(out)
}

/// Row-major design matrix for the named columns.
pub fn design_matrix(panel: &PanelTable, terms: &[String]) -> Result<DMatrix<f64>> {
    let idx: Vec<usize> = terms
        .iter()
        .map(|t| panel.column_index(t))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(panel.len(), idx.len(), |i, j| {
        panel.rows[i].covariates[idx[j]]
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    /// Hazard ratio for Cox, odds ratio for logit.
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub ratio_se: f64,
}

impl Coefficient {
    pub fn new(term: &str, estimate: f64, std_error: f64) -> Self {
        let z = estimate / std_error;
        let ratio = estimate.exp();
        Coefficient {
            term: term.to_string(),
            estimate,
            std_error,
            z,
            p: crate::stats::normal_two_sided_p(z),
            ratio,
            ratio_se: ratio * std_error,
        }
    }

    pub fn stars(&self) -> &'static str {
        stars(self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub name: String,
    pub kind: ModelKind,
    pub ties: Option<TiesMethod>,
    pub coefficients: Vec<Coefficient>,
    /// Row-major covariance of the estimates, in `coefficients` order.
    pub covariance: Vec<Vec<f64>>,
    pub loglik: f64,
    pub null_loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub lr_chi2: f64,
    pub lr_df: usize,
    pub lr_p: f64,
    pub wald_chi2: f64,
    pub wald_p: f64,
    pub pseudo_r2: Option<f64>,
    pub n_obs: usize,
    pub n_events: usize,
    pub n_clusters: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted Newton step, starting value first.
    pub loglik_path: Vec<f64>,
}

impl ModelFit {
    pub fn coefficient(&self, term: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == term)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

/// Fits `spec` on `panel`; `ties` applies when the spec does not set its own.
pub fn fit_model(panel: &PanelTable, spec: &ModelSpec, ties: TiesMethod) -> Result<ModelFit> {
    match spec.kind {
        ModelKind::Cox => cox_fit(panel, spec, ties),
        ModelKind::Logit => logit_fit(panel, spec),
    }
}

/// Models mirroring the published specification set: controls with
/// favorability, each memorability component alone, the composite, the four
/// interactions, plus the robustness variants (clustered logit, plain news
/// count, composite with news count, and the composite with memorability
/// outliers removed).
pub fn default_models() -> Vec<ModelSpec> {
    use crate::panel::{
        ACADEMIC_PREVALENCE, ACADEMIC_SPINOFF, CONNECTIVITY, DISTINCTIVENESS, FAVORABILITY, LONDON,
        MEMORABILITY, NEWS_COUNT, PATENTS, PREVALENCE, PUBLICATIONS, TEAM_HETEROGENEITY,
    };
    let controls = [
        LONDON,
        TEAM_HETEROGENEITY,
        ACADEMIC_PREVALENCE,
        PATENTS,
        PUBLICATIONS,
        ACADEMIC_SPINOFF,
        "topic_*",
        FAVORABILITY,
    ];
    let with = |extra: &[&'static str]| -> Vec<&'static str> {
        controls.iter().copied().chain(extra.iter().copied()).collect()
    };
    let mut models = vec![ModelSpec::cox("model_1", &controls)];
    for (i, m) in [PREVALENCE, DISTINCTIVENESS, CONNECTIVITY, MEMORABILITY]
        .iter()
        .enumerate()
    {
        models.push(ModelSpec::cox(&format!("model_{}", i + 2), &with(&[m])));
    }
    for (i, m) in [PREVALENCE, DISTINCTIVENESS, CONNECTIVITY, MEMORABILITY]
        .iter()
        .enumerate()
    {
        models.push(
            ModelSpec::cox(&format!("model_{}", i + 6), &with(&[m])).with_interaction(m, FAVORABILITY),
        );
    }
    models.push(ModelSpec::logit("logit_memorability", &with(&[MEMORABILITY])));
    models.push(ModelSpec::cox("news_count", &with(&[NEWS_COUNT])));
    models.push(ModelSpec::cox(
        "memorability_news_count",
        &with(&[MEMORABILITY, NEWS_COUNT]),
    ));
    let mut filtered = ModelSpec::cox("memorability_no_outliers", &with(&[MEMORABILITY]));
    filtered.outlier_filter = Some(OutlierRule {
        variable: MEMORABILITY.to_string(),
        k: 3.0,
    });
    models.push(filtered);
    models
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::PanelRow;

    fn panel() -> PanelTable {
        PanelTable {
            covariate_names: vec!["a".into(), "b".into(), "z".into(), "topic_1".into(), "topic_2".into()],
            rows: vec![
                PanelRow {
                    startup_id: "s1".into(),
                    year: 2000,
                    t_start: 0.0,
                    t_stop: 1.0,
                    event: false,
                    covariates: vec![1.0, 3.0, 0.0, 0.5, 0.1],
                },
                PanelRow {
                    startup_id: "s1".into(),
                    year: 2001,
                    t_start: 1.0,
                    t_stop: 2.0,
                    event: true,
                    covariates: vec![2.0, 4.0, 0.0, 0.2, 0.3],
                },
            ],
        }
    }

    #[test]
    fn interaction_examples() {
        let p = interaction_terms(&panel(), &[("a", "b"), ("a", "z"), ("a", "a")]).unwrap();
        assert_eq!(p.column("a*b").unwrap(), vec![3.0, 8.0]);
        assert_eq!(p.column("a*z").unwrap(), vec![0.0, 0.0]);
        assert_eq!(p.column("a*a").unwrap(), vec![1.0, 4.0]);
        assert!(matches!(
            interaction_terms(&panel(), &[("a", "nope")]),
            Err(Error::UnknownCovariate(n)) if n == "nope"
        ));
    }

    #[test]
    fn topic_wildcard_and_interaction_terms() {
        let spec = ModelSpec::cox("m", &["a", "topic_*"]).with_interaction("a", "b");
        assert_eq!(spec.terms(&panel()).unwrap(), vec!["a", "topic_1", "topic_2", "a*b"]);
        let (work, terms) = spec.prepare(&panel()).unwrap();
        let x = design_matrix(&work, &terms).unwrap();
        assert_eq!(x[(1, 3)], 8.0);
    }

    #[test]
    fn spec_validation() {
        let mut s = ModelSpec::cox("m", &["a"]);
        s.tolerance = 0.0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        assert!(matches!(
            ModelSpec::cox("m", &["missing"]).terms(&panel()),
            Err(Error::UnknownCovariate(_))
        ));
        assert!(ModelSpec::cox("m", &["a", "a"]).terms(&panel()).is_err());
    }

    #[test]
    fn default_suite_shape() {
        let models = default_models();
        assert_eq!(models.len(), 13);
        assert_eq!(models[8].interactions, vec![("memorability".into(), "media_favorability".into())]);
        assert!(models.iter().all(|m| m.validate().is_ok()));
    }

    #[test]
    fn spec_from_toml() {
        let s: ModelSpec = toml::from_str(
            "name = \"m9\"\ncovariates = [\"memorability\"]\ninteractions = [[\"memorability\", \"media_favorability\"]]\nties = \"breslow\"\n",
        )
        .unwrap();
        assert_eq!(s.ties, Some(TiesMethod::Breslow));
        assert_eq!(s.max_iter, DEFAULT_MAX_ITER);
        assert_eq!(s.kind, ModelKind::Cox);
    }
}
