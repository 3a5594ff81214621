use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::container::{self, Container};
use crate::corpus::EmbeddingSet;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    Pca,
    Lda,
}

/// A fitted linear map `x ↦ (x − mean)·basis`.
///
/// Basis columns have unit norm and are ordered by non-increasing
/// eigenvalue (explained variance for PCA, Fisher criterion for LDA). Each
/// column's sign is fixed so its largest-magnitude coordinate is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub kind: ProjectionKind,
    pub mean: Vec<f64>,
    /// input_dim × output_dim.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Trace of the covariance (PCA) or of the regularised within-class
    /// scatter (LDA).
    pub total: f64,
}

impl Projection {
    pub fn input_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Explained-variance fraction per PCA component.
    pub fn explained_fraction(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| if self.total > 0.0 { e / self.total } else { 0.0 }).collect()
    }

    /// Keeps only the leading `n` components.
    pub fn truncated(&self, n: usize) -> Projection {
        let n = n.min(self.output_dim());
        Projection {
            kind: self.kind,
            mean: self.mean.clone(),
            basis: self.basis.columns(0, n).into_owned(),
            eigenvalues: self.eigenvalues[..n].to_vec(),
            total: self.total,
        }
    }

    /// GLEM1 container: JSON header, then the basis as column-major f32.
    pub fn write_binary(&self, out: &mut impl Write) -> Result<()> {
        let header = json!({
            "version": 1,
            "kind": "projection",
            "projection": self.kind,
            "input_dim": self.input_dim(),
            "output_dim": self.output_dim(),
            "layout": "column-major",
            "mean": self.mean,
            "eigenvalues": self.eigenvalues,
            "total": self.total,
        });
        let payload: Vec<f32> = self.basis.as_slice().iter().map(|&v| v as f32).collect();
        container::write_f32(out, header, &payload)
    }

    pub fn read_binary(bytes: &[u8]) -> Result<Projection> {
        let c = Container::parse(bytes)?;
        if c.str_field("kind")? != "projection" {
            return Err(Error::MalformedHeader("not a projection container".into()));
        }
        let input = c.usize_field("input_dim")?;
        let output = c.usize_field("output_dim")?;
        let field = |k: &str| -> Result<serde_json::Value> {
            c.header.get(k).cloned().ok_or_else(|| Error::MalformedHeader(format!("missing {k:?}")))
        };
        let parse_err = |e: serde_json::Error| Error::MalformedHeader(e.to_string());
        let kind: ProjectionKind = serde_json::from_value(field("projection")?).map_err(parse_err)?;
        let mean: Vec<f64> = serde_json::from_value(field("mean")?).map_err(parse_err)?;
        let eigenvalues: Vec<f64> = serde_json::from_value(field("eigenvalues")?).map_err(parse_err)?;
        let total = field("total")?.as_f64().unwrap_or(0.0);
        if mean.len() != input || eigenvalues.len() != output {
            return Err(Error::DimensionMismatch("projection header vectors disagree with dims".into()));
        }
        let basis = DMatrix::from_column_slice(input, output, &c.values_f64(input * output)?);
        Ok(Projection { kind, mean, basis, eigenvalues, total })
    }
}

/// Σ (x − c(x))(x − c(x))ᵀ over all rows, where `center(i)` gives the
/// centre subtracted from row `i`. Accumulated in fixed-size chunks.
pub(crate) fn centered_scatter<'a>(
    set: &'a EmbeddingSet,
    center: impl Fn(usize) -> &'a [f64] + Sync + Send,
) -> DMatrix<f64> {
    let d = set.dim();
    let partials = par::map_chunks(set.len(), |range| {
        let rows = range.len();
        let mut block = DMatrix::<f64>::zeros(rows, d);
        for (r, i) in range.enumerate() {
            let c = center(i);
            for (k, &v) in set.row(i).iter().enumerate() {
                block[(r, k)] = v as f64 - c[k];
            }
        }
        // Explicit transpose so the product goes through the blocked GEMM kernel.
        block.transpose() * &block
    });
    partials.into_iter().fold(DMatrix::zeros(d, d), |acc, p| acc + p)
}

pub(crate) fn column_mean(set: &EmbeddingSet, rows: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; set.dim()];
    for &i in rows {
        for (m, &v) in mean.iter_mut().zip(set.row(i)) {
            *m += v as f64;
        }
    }
    let n = rows.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Eigenpairs sorted by non-increasing eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Normalises each column and flips it so the largest-magnitude coordinate
/// is positive (first such coordinate on ties).
fn canonicalise_columns(basis: &mut DMatrix<f64>) {
    for mut col in basis.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        let mut best = 0usize;
        for (k, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = k;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn numeric_rank(eigenvalues: &[f64], rel_tol: f64) -> usize {
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    eigenvalues.iter().take_while(|&&e| e > rel_tol * max).count()
}

pub fn fit_pca(set: &EmbeddingSet, n_components: usize) -> Result<Projection> {
    let (n, d) = (set.len(), set.dim());
    if n < 2 || n_components == 0 || n_components > (n - 1).min(d) {
        return Err(Error::InvalidArgument(format!(
            "n_components must be in 1..={} for {n} rows of dim {d}",
            n.saturating_sub(1).min(d)
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let mean = column_mean(set, &all);
    let cov = centered_scatter(set, |_| &mean) / (n as f64 - 1.0);
    let total = cov.trace();
    let (values, vectors) = sorted_eigen(cov);
    let rank = numeric_rank(&values, 1e-10);
    if n_components > rank {
        return Err(Error::InsufficientRank { requested: n_components, rank });
    }
    let mut basis = vectors.columns(0, n_components).into_owned();
    canonicalise_columns(&mut basis);
    Ok(Projection {
        kind: ProjectionKind::Pca,
        mean,
        basis,
        eigenvalues: values[..n_components].iter().map(|e| e.max(0.0)).collect(),
        total,
    })
}

/// Regularisation added to the within-class scatter before solving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ridge {
    /// `1e-6 · trace(Sw) / d`.
    Auto,
    Fixed(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Auto
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LdaOptions {
    pub ridge: Ridge,
    /// Upper bound on output dimensions; `None` means K − 1.
    pub max_components: Option<usize>,
}

/// Within- and between-class scatter matrices of a labelled set.
pub struct Scatter {
    pub within: DMatrix<f64>,
    pub between: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub classes: usize,
}

pub fn class_scatter(set: &EmbeddingSet) -> Result<Scatter> {
    let groups = set.language_groups();
    if groups.len() < 2 {
        return Err(Error::TooFewLanguages(format!("LDA needs at least 2 classes, got {}", groups.len())));
    }
    if let Some((lang, rows)) = groups.iter().find(|(_, r)| r.len() < 2) {
        return Err(Error::InsufficientSamples(format!("{lang} has {} sample(s); LDA needs 2", rows.len())));
    }
    let all: Vec<usize> = (0..set.len()).collect();
    let mean = column_mean(set, &all);
    let class_means: Vec<Vec<f64>> = groups.values().map(|rows| column_mean(set, rows)).collect();
    let mut class_of = vec![0usize; set.len()];
    for (c, rows) in groups.values().enumerate() {
        for &i in rows {
            class_of[i] = c;
        }
    }
    let within = centered_scatter(set, |i| &class_means[class_of[i]]);
    let d = set.dim();
    let mut between = DMatrix::zeros(d, d);
    for (rows, cm) in groups.values().zip(&class_means) {
        let diff = DVector::from_iterator(d, cm.iter().zip(&mean).map(|(a, b)| a - b));
        between.ger(rows.len() as f64, &diff, &diff, 1.0);
    }
    Ok(Scatter { within, between, mean, classes: groups.len() })
}

impl Scatter {
    /// Fisher criterion `vᵀ Sb v / vᵀ Sw v`.
    pub fn fisher_criterion(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let num = v.dot(&(&self.between * &v));
        let den = v.dot(&(&self.within * &v));
        num / den
    }
}

/// Linear discriminant analysis as the generalised symmetric eigenproblem
/// `Sb v = λ (Sw + ridge·I) v`, solved through a Cholesky factor of the
/// regularised within-class scatter.
pub fn fit_lda(set: &EmbeddingSet, opts: LdaOptions) -> Result<Projection> {
    let scatter = class_scatter(set)?;
    fit_lda_from_scatter(scatter, opts)
}

pub fn fit_lda_from_scatter(scatter: Scatter, opts: LdaOptions) -> Result<Projection> {
    let Scatter { mut within, between, mean, classes } = scatter;
    let d = within.nrows();
    let ridge = match opts.ridge {
        Ridge::Auto => 1e-6 * within.trace() / d as f64,
        Ridge::Fixed(r) if r >= 0.0 && r.is_finite() => r,
        Ridge::Fixed(r) => return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {r}"))),
    };
    for k in 0..d {
        within[(k, k)] += ridge;
    }
    let total = within.trace();
    let max_diag = (0..d).map(|k| within[(k, k)]).fold(0.0, f64::max);
    let chol = within.cholesky().ok_or(Error::SingularScatter)?;
    let l = chol.l();
    let min_pivot = (0..d).map(|k| l[(k, k)] * l[(k, k)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-12 * max_diag) {
        return Err(Error::SingularScatter);
    }
    // C = L⁻¹ Sb L⁻ᵀ
    let left = l.solve_lower_triangular(&between).ok_or(Error::SingularScatter)?;
    let mut c = l.solve_lower_triangular(&left.transpose()).ok_or(Error::SingularScatter)?;
    c = (&c + c.transpose()) * 0.5;
    let (values, vectors) = sorted_eigen(c);
    let cap = opts.max_components.unwrap_or(usize::MAX).min(classes - 1).min(d);
    let out = cap.min(numeric_rank(&values, 1e-10)).max(1);
    let top = vectors.columns(0, out).into_owned();
    let mut basis = l.transpose().solve_upper_triangular(&top).ok_or(Error::SingularScatter)?;
    canonicalise_columns(&mut basis);
    Ok(Projection {
        kind: ProjectionKind::Lda,
        mean,
        basis,
        eigenvalues: values[..out].iter().map(|e| e.max(0.0)).collect(),
        total,
    })
}

/// Applies a projection row by row; records are carried unchanged.
pub fn project(set: &EmbeddingSet, proj: &Projection) -> Result<EmbeddingSet> {
    let rows = project_rows(set, proj)?;
    let data = rows.into_iter().map(|v| v as f32).collect();
    set.with_matrix(proj.output_dim(), data)
}

/// Projected coordinates in f64, row-major.
pub fn project_rows(set: &EmbeddingSet, proj: &Projection) -> Result<Vec<f64>> {
    let (d, k) = (set.dim(), proj.output_dim());
    if d != proj.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "set has dim {d} but projection expects {}",
            proj.input_dim()
        )));
    }
    let blocks = par::map_chunks(set.len(), |range| {
        let mut block = DMatrix::<f64>::zeros(range.len(), d);
        for (r, i) in range.enumerate() {
            for (c, &v) in set.row(i).iter().enumerate() {
                block[(r, c)] = v as f64 - proj.mean[c];
            }
        }
        let out = block * &proj.basis;
        // row-major
        let mut flat = Vec::with_capacity(out.len());
        for r in 0..out.nrows() {
            flat.extend(out.row(r).iter().copied());
        }
        flat
    });
    let mut data = Vec::with_capacity(set.len() * k);
    blocks.into_iter().for_each(|b| data.extend(b));
    Ok(data)
}
