use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::pairs::PairTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    Exp,
    Log,
    Sqrt,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Exp => x.exp(),
            Transform::Log => x.ln(),
            Transform::Sqrt => x.sqrt(),
        }
    }
}

/// Which predictor columns enter the design besides the intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTerms {
    Geographic,
    Lexical,
    Additive,
    #[default]
    Interaction,
}

impl ModelTerms {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            ModelTerms::Geographic => &["intercept", "geographic"],
            ModelTerms::Lexical => &["intercept", "lexical"],
            ModelTerms::Additive => &["intercept", "geographic", "lexical"],
            ModelTerms::Interaction => &["intercept", "geographic", "lexical", "interaction"],
        }
    }

    fn row(self, g: f64, l: f64) -> Vec<f64> {
        match self {
            ModelTerms::Geographic => vec![1.0, g],
            ModelTerms::Lexical => vec![1.0, l],
            ModelTerms::Additive => vec![1.0, g, l],
            ModelTerms::Interaction => vec![1.0, g, l, g * l],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub response: Transform,
    pub geographic: Transform,
    pub lexical: Transform,
    pub terms: ModelTerms,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            response: Transform::Exp,
            geographic: Transform::Sqrt,
            lexical: Transform::Exp,
            terms: ModelTerms::Interaction,
        }
    }
}

/// Ordinary least squares summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub r_squared: f64,
    /// `1 − (1−R²)(n−1)/(n−p−1)` with `p` predictors besides the intercept.
    pub adjusted_r_squared: f64,
    pub residuals: Vec<f64>,
    pub df: usize,
}

/// OLS via Householder QR of the column-scaled design. The first column of
/// `x` is assumed to be the intercept.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("design has {n} rows, response {}", y.len())));
    }
    if n <= k {
        return Err(Error::InsufficientSamples(format!("{n} rows for {k} coefficients")));
    }
    let scale: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::CollinearDesign);
    }
    let mut xs = x.clone();
    for (j, s) in scale.iter().enumerate() {
        xs.column_mut(j).unscale_mut(*s);
    }
    let qr = xs.clone().qr();
    let r = qr.r();
    if (0..k).any(|j| r[(j, j)].abs() < 1e-10) {
        return Err(Error::CollinearDesign);
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta_s = r.solve_upper_triangular(&qty).ok_or(Error::CollinearDesign)?;
    let fitted = &xs * &beta_s;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(Error::ConstantInput("response"));
    }
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let df = n - k;
    let sigma2 = rss / df as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::CollinearDesign)?;
    let coefficients: Vec<f64> = (0..k).map(|j| beta_s[j] / scale[j]).collect();
    let std_errors: Vec<f64> = (0..k)
        .map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt() / scale[j])
        .collect();
    let t_values = coefficients.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let r_squared = 1.0 - rss / tss;
    let adjusted_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df as f64;
    Ok(OlsFit { coefficients, std_errors, t_values, r_squared, adjusted_r_squared, residuals, df })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub spec: ModelSpec,
    pub terms: Vec<String>,
    #[serde(flatten)]
    pub ols: OlsFit,
    /// Pair-table row of each residual.
    pub rows: Vec<usize>,
}

impl RegressionFit {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.ols.coefficients[i])
    }

    pub fn t_value(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.ols.t_values[i])
    }

    /// Fitted response (on the transformed scale) at raw geographic and
    /// lexical distances; the model's transforms are applied here.
    pub fn predict(&self, geographic: f64, lexical: f64) -> f64 {
        let g = self.spec.geographic.apply(geographic);
        let l = self.spec.lexical.apply(lexical);
        self.spec.terms.row(g, l).iter().zip(&self.ols.coefficients).map(|(x, b)| x * b).sum()
    }

    /// `sqrt(max(adjusted R², 0))`.
    pub fn model_correlation(&self) -> f64 {
        self.ols.adjusted_r_squared.max(0.0).sqrt()
    }
}

pub const MIN_REGRESSION_ROWS: usize = 10;

/// `exp(embedding) ~ 1 + sqrt(geo) + exp(lex) + sqrt(geo)·exp(lex)`.
pub fn fit_interaction_model(t: &PairTable) -> Result<RegressionFit> {
    fit_model(t, &ModelSpec::default())
}

/// Fits `spec` over the rows carrying a lexical distance.
pub fn fit_model(t: &PairTable, spec: &ModelSpec) -> Result<RegressionFit> {
    let rows: Vec<usize> = t.with_lexical().map(|(i, _)| i).collect();
    if rows.len() < MIN_REGRESSION_ROWS {
        return Err(Error::InsufficientSamples(format!(
            "regression needs {MIN_REGRESSION_ROWS} pairs with all distances, got {}",
            rows.len()
        )));
    }
    let names = spec.terms.names();
    let mut design = DMatrix::zeros(rows.len(), names.len());
    let mut y = Vec::with_capacity(rows.len());
    for (a, &i) in rows.iter().enumerate() {
        let r = &t.rows[i];
        let g = spec.geographic.apply(r.geographic);
        let l = spec.lexical.apply(r.lexical.expect("filtered"));
        let e = spec.response.apply(r.embedding);
        if !(g.is_finite() && l.is_finite() && e.is_finite()) {
            return Err(Error::InvalidArgument(format!("transform of pair {}-{} is not finite", r.l1, r.l2)));
        }
        for (j, v) in spec.terms.row(g, l).into_iter().enumerate() {
            design[(a, j)] = v;
        }
        y.push(e);
    }
    let ols = ols(&design, &y)?;
    Ok(RegressionFit { spec: *spec, terms: names.iter().map(|s| s.to_string()).collect(), ols, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub l1: String,
    pub l2: String,
    pub residual: f64,
}

/// The `k` largest and `k` smallest residuals, ties ordered by pair label.
pub fn residual_outliers(fit: &RegressionFit, t: &PairTable, k: usize) -> Result<(Vec<Outlier>, Vec<Outlier>)> {
    if 2 * k > fit.rows.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds half of {} rows", fit.rows.len())));
    }
    let mut all: Vec<Outlier> = fit
        .rows
        .iter()
        .zip(&fit.ols.residuals)
        .map(|(&i, &residual)| Outlier { l1: t.rows[i].l1.clone(), l2: t.rows[i].l2.clone(), residual })
        .collect();
    let label = |o: &Outlier| (o.l1.clone(), o.l2.clone());
    all.sort_by(|a, b| b.residual.total_cmp(&a.residual).then_with(|| label(a).cmp(&label(b))));
    let positive = all[..k].to_vec();
    all.sort_by(|a, b| a.residual.total_cmp(&b.residual).then_with(|| label(a).cmp(&label(b))));
    let negative = all[..k].to_vec();
    Ok((positive, negative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pairs::PairRow;

    fn table(points: &[(f64, f64, f64)]) -> PairTable {
        PairTable {
            rows: points
                .iter()
                .enumerate()
                .map(|(i, &(e, l, g))| PairRow {
                    l1: format!("a{i:03}"),
                    l2: format!("b{i:03}"),
                    embedding: e,
                    lexical: Some(l),
                    geographic: g,
                    same_family: false,
                })
                .collect(),
        }
    }

    #[test]
    fn planted_noiseless_recovery() {
        let beta = [0.7, 0.004, 0.3, -0.001];
        let pts: Vec<(f64, f64, f64)> = (0..40)
            .map(|i| {
                let l = 0.3 + 0.02 * i as f64;
                let g = 50.0 + 97.0 * ((i * 7) % 40) as f64;
                let (sg, el) = (g.sqrt(), l.exp());
                let y = beta[0] + beta[1] * sg + beta[2] * el + beta[3] * sg * el;
                (y.ln(), l, g)
            })
            .collect();
        let fit = fit_interaction_model(&table(&pts)).unwrap();
        for (b, p) in fit.ols.coefficients.iter().zip(beta) {
            assert!((b - p).abs() < 1e-8, "{b} vs {p}");
        }
        assert!((fit.ols.adjusted_r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.ols.df, 36);
    }

    #[test]
    fn collinear_and_constant() {
        let pts: Vec<(f64, f64, f64)> = (0..12).map(|i| (i as f64 * 0.1, 0.5, i as f64 + 1.0)).collect();
        assert!(matches!(fit_interaction_model(&table(&pts)), Err(Error::CollinearDesign)));
        let pts: Vec<(f64, f64, f64)> = (0..12).map(|i| (0.4, i as f64 * 0.1, (i * i) as f64 + 1.0)).collect();
        assert!(matches!(fit_interaction_model(&table(&pts)), Err(Error::ConstantInput(_))));
        assert!(fit_interaction_model(&table(&pts[..9])).is_err());
    }

    #[test]
    fn outliers_three_rows() {
        let t = table(&[(0.0, 0.0, 0.0); 3]);
        let fit = RegressionFit {
            spec: ModelSpec::default(),
            terms: vec![],
            ols: OlsFit {
                coefficients: vec![],
                std_errors: vec![],
                t_values: vec![],
                r_squared: 0.0,
                adjusted_r_squared: 0.0,
                residuals: vec![0.0, 2.0, -2.0],
                df: 0,
            },
            rows: vec![0, 1, 2],
        };
        let (pos, neg) = residual_outliers(&fit, &t, 1).unwrap();
        assert_eq!((pos[0].l1.as_str(), pos[0].residual), ("a001", 2.0));
        assert_eq!((neg[0].l1.as_str(), neg[0].residual), ("a002", -2.0));
        assert!(residual_outliers(&fit, &t, 2).is_err());
    }
}
