use std::fmt::Write as _;

use serde::Serialize;

use super::{ModelFit, ModelKind};
use crate::stats::stars;
use crate::table::fmt6;

/// A set of fitted models rendered side by side.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ModelReport {
    pub fits: Vec<ModelFit>,
    /// Variance inflation factors of one model's design, if computed.
    pub vif: Option<(String, Vec<(String, f64)>)>,
    pub warnings: Vec<String>,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        fmt6(x)
    } else {
        "NA".to_string()
    }
}

fn pval(p: f64) -> String {
    if p.is_finite() {
        format!("{p:.6e}")
    } else {
        "NA".to_string()
    }
}

fn fix3(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.3}");
        if s == "-0.000" {
            "0.000".into()
        } else {
            s
        }
    } else {
        "NA".to_string()
    }
}

impl ModelReport {
    pub fn new(fits: Vec<ModelFit>) -> Self {
        ModelReport {
            fits,
            ..Default::default()
        }
    }

    pub fn fit(&self, name: &str) -> Option<&ModelFit> {
        self.fits.iter().find(|f| f.name == name)
    }

    /// One row per (model, term).
    pub fn coefficients_csv(&self) -> String {
        let mut out =
            String::from("model,kind,term,estimate,std_error,ratio,ratio_se,z,p,stars\n");
        for f in &self.fits {
            for c in &f.coefficients {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    f.name,
                    kind_name(f.kind),
                    c.term,
                    num(c.estimate),
                    num(c.std_error),
                    num(c.ratio),
                    num(c.ratio_se),
                    num(c.z),
                    pval(c.p),
                    c.stars()
                );
            }
        }
        out
    }

    /// One row per model with the fit statistics.
    pub fn fit_stats_csv(&self) -> String {
        let mut out = String::from(
            "model,kind,ties,n_obs,n_events,n_clusters,loglik,null_loglik,aic,bic,lr_chi2,lr_df,lr_p,wald_chi2,wald_p,pseudo_r2,iterations\n",
        );
        for f in &self.fits {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                f.name,
                kind_name(f.kind),
                f.ties.map_or("", |t| match t {
                    super::TiesMethod::Efron => "efron",
                    super::TiesMethod::Breslow => "breslow",
                }),
                f.n_obs,
                f.n_events,
                f.n_clusters.map_or(String::new(), |c| c.to_string()),
                num(f.loglik),
                num(f.null_loglik),
                num(f.aic),
                num(f.bic),
                num(f.lr_chi2),
                f.lr_df,
                pval(f.lr_p),
                num(f.wald_chi2),
                pval(f.wald_p),
                f.pseudo_r2.map_or(String::new(), num),
                f.iterations
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned text table: ratios with standard errors in parentheses, one
    /// column per model, fit statistics in the footer.
    pub fn to_text(&self) -> String {
        if self.fits.is_empty() {
            let mut out = String::from("No models specified.\n");
            for w in &self.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            return out;
        }
        let mut terms: Vec<&str> = Vec::new();
        for f in &self.fits {
            for c in &f.coefficients {
                if !terms.contains(&c.term.as_str()) {
                    terms.push(&c.term);
                }
            }
        }
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["VARIABLES".to_string()];
        header.extend(self.fits.iter().map(|f| format!("{} ({})", f.name, kind_name(f.kind))));
        rows.push(header);
        for t in &terms {
            let mut row = vec![t.to_string()];
            for f in &self.fits {
                row.push(match f.coefficient(t) {
                    Some(c) => format!("{}{} ({})", fix3(c.ratio), c.stars(), fix3(c.ratio_se)),
                    None => String::new(),
                });
            }
            rows.push(row);
        }
        let footer: [(&str, fn(&ModelFit) -> String); 8] = [
            ("Observations", |f| f.n_obs.to_string()),
            ("Events", |f| f.n_events.to_string()),
            ("Log likelihood", |f| fix3(f.loglik)),
            ("AIC", |f| fix3(f.aic)),
            ("BIC", |f| fix3(f.bic)),
            ("LR chi2", |f| format!("{}{}", fix3(f.lr_chi2), stars(f.lr_p))),
            ("Wald chi2", |f| format!("{}{}", fix3(f.wald_chi2), stars(f.wald_p))),
            ("Pseudo R2", |f| f.pseudo_r2.map_or(String::new(), fix3)),
        ];
        let separator = rows.len();
        for (label, get) in footer {
            let mut row = vec![label.to_string()];
            row.extend(self.fits.iter().map(get));
            rows.push(row);
        }

        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let rule: String = "-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1));
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            if i == 1 || i == separator {
                out.push_str(&rule);
                out.push('\n');
            }
            let mut line = String::new();
            for (c, cell) in r.iter().enumerate() {
                if c == 0 {
                    let _ = write!(line, "{:<w$}", cell, w = widths[c]);
                } else {
                    let _ = write!(line, "  {:>w$}", cell, w = widths[c]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str(
            "Hazard ratios (odds ratios for logit), standard errors in parentheses. *** p<.01, ** p<.05, * p<.1\n",
        );
        if let Some((model, vifs)) = &self.vif {
            let mean = vifs.iter().map(|(_, v)| v).sum::<f64>() / vifs.len() as f64;
            let _ = writeln!(out, "\nVIF ({model}), mean {}:", fix3(mean));
            for (t, v) in vifs {
                let _ = writeln!(out, "  {t}: {}", fix3(*v));
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn kind_name(k: ModelKind) -> &'static str {
    match k {
        ModelKind::Cox => "cox",
        ModelKind::Logit => "logit",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{Coefficient, TiesMethod};

    fn fit(name: &str, terms: &[(&str, f64, f64)]) -> ModelFit {
        ModelFit {
            name: name.into(),
            kind: ModelKind::Cox,
            ties: Some(TiesMethod::Efron),
            coefficients: terms.iter().map(|(t, b, se)| Coefficient::new(t, *b, *se)).collect(),
            covariance: vec![],
            loglik: -300.0,
            null_loglik: -320.0,
            aic: 604.0,
            bic: 615.0,
            lr_chi2: 40.0,
            lr_df: terms.len(),
            lr_p: 1e-9,
            wald_chi2: 38.0,
            wald_p: 1e-8,
            pseudo_r2: None,
            n_obs: 100,
            n_events: 20,
            n_clusters: Some(30),
            iterations: 5,
            converged: true,
            loglik_path: vec![-320.0, -300.0],
        }
    }

    #[test]
    fn text_layout() {
        let r = ModelReport::new(vec![
            fit("m1", &[("london", 0.1, 0.2)]),
            fit("m2", &[("london", 0.1, 0.2), ("memorability", 0.5112, 0.1)]),
        ]);
        let text = r.to_text();
        let mem = text.lines().find(|l| l.starts_with("memorability")).unwrap();
        assert!(mem.contains("1.667*** (0.167)"), "{mem}");
        assert!(text.contains("LR chi2"));
        assert!(text.contains("40.000***"));
        assert_eq!(r.coefficients_csv().lines().count(), 4);
        assert_eq!(r.fit_stats_csv().lines().count(), 3);
    }

    #[test]
    fn empty_report() {
        let mut r = ModelReport::default();
        r.warnings.push("no models".into());
        assert!(r.to_text().starts_with("No models specified."));
        assert_eq!(r.coefficients_csv().lines().count(), 1);
    }
}
