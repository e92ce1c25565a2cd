//! Descriptive statistics, group t-tests, correlations and the outlier filter.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::stats::{mean, population_sd, sample_variance, stars, t_two_sided_p};
use crate::table::fmt6;

use super::PanelTable;

/// Panel variables in reporting order: the funding flag and age, then the covariates.
fn variables(panel: &PanelTable) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![
        (
            "first_vc_funding".to_string(),
            panel.rows.iter().map(|r| r.event as u8 as f64).collect(),
        ),
        ("age".to_string(), panel.rows.iter().map(|r| r.t_start).collect()),
    ];
    for (j, name) in panel.covariate_names.iter().enumerate() {
        out.push((name.clone(), panel.rows.iter().map(|r| r.covariates[j]).collect()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Summary {
                n: 0,
                mean: f64::NAN,
                sd: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        Summary {
            n: xs.len(),
            mean: mean(xs),
            sd: population_sd(xs),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

impl TTest {
    /// `ns` when not significant at the 10% level.
    pub fn flag(&self) -> &'static str {
        match stars(self.p) {
            "" => "ns",
            s => s,
        }
    }
}

/// Welch two-sample t-test with Welch–Satterthwaite degrees of freedom.
/// Groups with no difference in means give `t = 0, p = 1`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> TTest {
    if a.len() < 2 || b.len() < 2 {
        return TTest {
            t: f64::NAN,
            df: f64::NAN,
            p: f64::NAN,
        };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mean(a) - mean(b);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    if diff == 0.0 {
        return TTest {
            t: 0.0,
            df: f64::NAN,
            p: 1.0,
        };
    }
    if se2 == 0.0 {
        return TTest {
            t: diff.signum() * f64::INFINITY,
            df: f64::NAN,
            p: 0.0,
        };
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    TTest {
        t,
        df,
        p: t_two_sided_p(t, df),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSummary {
    pub name: String,
    pub all: Summary,
    /// Rows of startups that are ever funded, the rest, and their comparison.
    pub groups: Option<(Summary, Summary, TTest)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveTable {
    pub startups: usize,
    pub funded_startups: usize,
    pub variables: Vec<VariableSummary>,
}

/// Mean, population sd, min and max of every panel variable over rows.
/// With `group_by_funded`, rows are split by whether their startup is ever
/// funded and the groups are compared with a Welch t-test.
pub fn descriptive_stats(panel: &PanelTable, group_by_funded: bool) -> DescriptiveTable {
    let funded: BTreeSet<&str> = panel
        .rows
        .iter()
        .filter(|r| r.event)
        .map(|r| r.startup_id.as_str())
        .collect();
    let in_funded: Vec<bool> = panel
        .rows
        .iter()
        .map(|r| funded.contains(r.startup_id.as_str()))
        .collect();
    let variables = variables(panel)
        .into_iter()
        .map(|(name, xs)| {
            let groups = group_by_funded.then(|| {
                let (a, b): (Vec<(f64, bool)>, Vec<(f64, bool)>) =
                    xs.iter().copied().zip(in_funded.iter().copied()).partition(|(_, f)| *f);
                let a: Vec<f64> = a.into_iter().map(|(x, _)| x).collect();
                let b: Vec<f64> = b.into_iter().map(|(x, _)| x).collect();
                (Summary::of(&a), Summary::of(&b), welch_t_test(&a, &b))
            });
            VariableSummary {
                name,
                all: Summary::of(&xs),
                groups,
            }
        })
        .collect();
    DescriptiveTable {
        startups: panel.startups().len(),
        funded_startups: funded.len(),
        variables,
    }
}

fn fmt3(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else {
        let s = format!("{x:.3}");
        if s == "-0.000" {
            "0.000".to_string()
        } else {
            s
        }
    }
}

fn markdown(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain(std::iter::once(header[c].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::from("|");
        for (c, cell) in cells.iter().enumerate() {
            if c == 0 {
                let _ = write!(s, " {:<w$} |", cell, w = widths[c]);
            } else {
                let _ = write!(s, " {:>w$} |", cell, w = widths[c]);
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header);
    out.push('|');
    for (c, w) in widths.iter().enumerate() {
        out.push_str(if c == 0 { " :" } else { " " });
        out.push_str(&"-".repeat(w.saturating_sub(1)));
        out.push_str(if c == 0 { " |" } else { ": |" });
    }
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

impl DescriptiveTable {
    fn grouped(&self) -> bool {
        self.variables.first().is_some_and(|v| v.groups.is_some())
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["variable".to_string()];
        let mut block = |prefix: &str| {
            for s in ["mean", "sd", "min", "max"] {
                h.push(format!("{prefix}{s}"));
            }
        };
        block("");
        if self.grouped() {
            block("funded_");
            block("unfunded_");
            h.push("t".into());
            h.push("diff".into());
        }
        h
    }

    fn cells(&self, fmt: fn(f64) -> String) -> Vec<Vec<String>> {
        self.variables
            .iter()
            .map(|v| {
                let mut row = vec![v.name.clone()];
                let mut push = |s: &Summary| {
                    row.extend([fmt(s.mean), fmt(s.sd), fmt(s.min), fmt(s.max)]);
                };
                push(&v.all);
                if let Some((a, b, t)) = &v.groups {
                    push(a);
                    push(b);
                    row.push(fmt(t.t));
                    row.push(t.flag().to_string());
                }
                row
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let fmt = |x: f64| if x.is_nan() { "NA".to_string() } else { fmt6(x) };
        let mut out = self.header().join(",");
        out.push('\n');
        for r in self.cells(fmt) {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "Descriptive statistics ({} startups, {} funded)\n\n",
            self.startups, self.funded_startups
        );
        out.push_str(&markdown(&self.header(), &self.cells(fmt3)));
        if self.grouped() {
            out.push_str("\nWelch t-test: *** p<0.01, ** p<0.05, * p<0.1, ns otherwise\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// `None` where a column has zero variance.
    pub r: Vec<Vec<Option<f64>>>,
    /// Two-sided p < 0.05 with `n - 2` degrees of freedom.
    pub significant: Vec<Vec<bool>>,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlations between all panel variables.
pub fn correlation_matrix(panel: &PanelTable) -> Result<CorrelationMatrix> {
    let n = panel.len();
    if n < 3 {
        return Err(Error::InvalidData(format!(
            "correlation matrix needs at least 3 rows, panel has {n}"
        )));
    }
    let vars = variables(panel);
    let m = vars.len();
    let mut r = vec![vec![None; m]; m];
    let mut significant = vec![vec![false; m]; m];
    let df = n as f64 - 2.0;
    for i in 0..m {
        r[i][i] = Some(1.0);
        for j in 0..i {
            let v = pearson(&vars[i].1, &vars[j].1);
            r[i][j] = v;
            r[j][i] = v;
            if let Some(v) = v {
                let sig = if v.abs() >= 1.0 {
                    true
                } else {
                    let t = v * (df / (1.0 - v * v)).sqrt();
                    t_two_sided_p(t, df) < 0.05
                };
                significant[i][j] = sig;
                significant[j][i] = sig;
            }
        }
    }
    Ok(CorrelationMatrix {
        names: vars.into_iter().map(|(n, _)| n).collect(),
        r,
        significant,
    })
}

impl CorrelationMatrix {
    fn cell(&self, i: usize, j: usize, fmt: fn(f64) -> String) -> String {
        match self.r[i][j] {
            Some(v) => format!("{}{}", fmt(v), if self.significant[i][j] { "*" } else { "" }),
            None => "NA".to_string(),
        }
    }

    /// Full symmetric matrix.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("variable");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for i in 0..self.names.len() {
            out.push_str(&self.names[i]);
            for j in 0..self.names.len() {
                out.push(',');
                out.push_str(&self.cell(i, j, fmt6));
            }
            out.push('\n');
        }
        out
    }

    /// Lower triangle with numbered columns.
    pub fn to_markdown(&self) -> String {
        let m = self.names.len();
        let mut header = vec!["variable".to_string()];
        header.extend((1..=m).map(|k| format!("({k})")));
        let rows: Vec<Vec<String>> = (0..m)
            .map(|i| {
                let mut row = vec![format!("({}) {}", i + 1, self.names[i])];
                row.extend((0..m).map(|j| if j <= i { self.cell(i, j, fmt3) } else { String::new() }));
                row
            })
            .collect();
        let mut out = markdown(&header, &rows);
        out.push_str("\n* p<0.05\n");
        out
    }
}

/// Drops rows whose `variable` exceeds `mean + k * sd`, with population sd
/// computed on the input table.
pub fn outlier_filter(panel: &PanelTable, variable: &str, k: f64) -> Result<PanelTable> {
    if !(k > 0.0) {
        return Err(Error::Config(format!("outlier threshold must be positive, got {k}")));
    }
    let j = panel.column_index(variable)?;
    let col = panel.column(variable)?;
    if col.is_empty() {
        return Ok(panel.clone());
    }
    let threshold = mean(&col) + k * population_sd(&col);
    Ok(PanelTable {
        covariate_names: panel.covariate_names.clone(),
        rows: panel
            .rows
            .iter()
            .filter(|r| r.covariates[j] <= threshold)
            .cloned()
            .collect(),
    })
}
