use std::fmt::Write as _;

use super::svg::{escape, Svg, PALETTE};
use crate::error::{Error, Result};
use crate::phylo::RobustnessCurve;
use crate::stats::{loess_smooth, CumulativeCurve};

/// Columnar view of a curve: an x column and named y series.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub x_name: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl From<&CumulativeCurve> for CurveTable {
    fn from(c: &CumulativeCurve) -> Self {
        let col = |f: fn(&crate::stats::CurvePoint) -> f64| c.points.iter().map(f).collect::<Vec<f64>>();
        CurveTable {
            x_name: "n".into(),
            x: c.points.iter().map(|p| p.n as f64).collect(),
            series: vec![
                ("r_geographic".into(), col(|p| p.correlations.r_geographic)),
                ("r_lexical".into(), col(|p| p.correlations.r_lexical)),
                ("model_correlation".into(), col(|p| p.correlations.model_correlation)),
                ("model_correlation_raw".into(), vec![c.baseline_model_correlation; c.points.len()]),
            ],
        }
    }
}

impl From<&RobustnessCurve> for CurveTable {
    fn from(c: &RobustnessCurve) -> Self {
        let mut series = vec![("mean".to_string(), c.mean.clone()), ("std".to_string(), c.std.clone())];
        series.extend(c.languages.iter().zip(&c.per_language).map(|(l, v)| (l.clone(), v.clone())));
        CurveTable { x_name: "n".into(), x: c.sizes.iter().map(|&s| s as f64).collect(), series }
    }
}

impl CurveTable {
    pub fn to_tsv(&self) -> String {
        let mut out = self.x_name.clone();
        for (name, _) in &self.series {
            out.push('\t');
            out.push_str(name);
        }
        out.push('\n');
        for (k, x) in self.x.iter().enumerate() {
            let _ = write!(out, "{x}");
            for (_, v) in &self.series {
                let _ = write!(out, "\t{}", v[k]);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<CurveTable> {
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next().ok_or_else(|| Error::MalformedHeader("empty curve file".into()))?.split('\t').collect();
        let mut t = CurveTable {
            x_name: head[0].to_string(),
            x: Vec::new(),
            series: head[1..].iter().map(|h| (h.to_string(), Vec::new())).collect(),
        };
        for (k, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != head.len() {
                return Err(Error::MalformedRecord { line: k + 2, msg: format!("{} cells, expected {}", cells.len(), head.len()) });
            }
            let parse = |c: &str| c.parse::<f64>().map_err(|e| Error::MalformedRecord { line: k + 2, msg: e.to_string() });
            t.x.push(parse(cells[0])?);
            for (s, c) in t.series.iter_mut().zip(&cells[1..]) {
                s.1.push(parse(c)?);
            }
        }
        Ok(t)
    }
}

/// Plotted series: LOESS-smoothed with `span` when given and the curve has
/// enough points, otherwise the raw values.
pub fn plotted_series(t: &CurveTable, span: Option<f64>) -> Result<Vec<(String, Vec<f64>)>> {
    t.series
        .iter()
        .map(|(name, ys)| {
            let ys = match span {
                Some(s) if t.x.len() >= 5 => loess_smooth(&t.x, ys, s)?,
                _ => ys.clone(),
            };
            Ok((name.clone(), ys))
        })
        .collect()
}

/// Line chart of `series` (names listed in `include`, or all) against x.
/// Returns the SVG and the plotted values.
pub fn emit_curves(t: &CurveTable, span: Option<f64>, include: Option<&[&str]>) -> Result<(String, Vec<(String, Vec<f64>)>)> {
    if t.x.is_empty() {
        return Err(Error::InvalidArgument("curve has no points".into()));
    }
    let plotted: Vec<(String, Vec<f64>)> = plotted_series(t, span)?
        .into_iter()
        .filter(|(n, _)| include.is_none_or(|inc| inc.contains(&n.as_str())))
        .collect();
    let (w, h, m) = (640.0, 400.0, 50.0);
    let (x0, x1) = t.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (y0, y1) = plotted
        .iter()
        .flat_map(|(_, v)| v.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (xw, yw) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    let sx = |x: f64| m + (x - x0) / xw * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / yw * (h - 2.0 * m);
    let mut svg = Svg::new(w + 160.0, h);
    svg.raw(&format!(
        "<g class=\"axes\"><line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/><line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/></g>",
        b = h - m,
        r = w - m
    ));
    svg.text(w / 2.0, h - 12.0, 12.0, "middle", &t.x_name);
    svg.text(m, m - 10.0, 10.0, "start", &format!("y: {y0:.3} – {y1:.3}"));
    for (k, (name, ys)) in plotted.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        if ys.len() == 1 {
            svg.raw(&format!(
                "<circle class=\"marker\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"{colour}\" data-series=\"{}\"/>",
                sx(t.x[0]),
                sy(ys[0]),
                escape(name)
            ));
        } else {
            let pts: Vec<String> = t.x.iter().zip(ys).map(|(&x, &y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
            let values: Vec<String> = ys.iter().map(|v| v.to_string()).collect();
            svg.raw(&format!(
                "<polyline class=\"series\" fill=\"none\" stroke=\"{colour}\" data-series=\"{}\" data-values=\"{}\" points=\"{}\"/>",
                escape(name),
                values.join(" "),
                pts.join(" ")
            ));
        }
        svg.text(w, m + 14.0 * k as f64, 10.0, "start", name);
    }
    Ok((svg.finish(), plotted))
}
