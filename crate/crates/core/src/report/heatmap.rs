use std::collections::BTreeMap;

use super::svg::{escape, ramp, Svg, PALETTE};
use crate::corpus::LanguageTable;
use crate::distance::DistanceMatrix;
use crate::embedspace::LanguageEmbedding;
use crate::error::{Error, Result};

/// Row order grouped by family, then subfamily, then ISO.
pub fn heatmap_order(m: &DistanceMatrix, meta: &LanguageTable) -> Result<Vec<usize>> {
    let mut keyed = Vec::with_capacity(m.len());
    for (i, l) in m.labels().iter().enumerate() {
        let r = meta.require(l)?;
        keyed.push(((r.family.clone(), r.subfamily.clone().unwrap_or_default(), l.clone()), i));
    }
    keyed.sort();
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

pub struct Heatmap {
    pub svg: String,
    pub csv: String,
    pub order: Vec<usize>,
}

/// Family-sorted heatmap with `n²` cells (class `cell`) and the reordered
/// matrix as CSV.
pub fn emit_heatmap(m: &DistanceMatrix, meta: &LanguageTable) -> Result<Heatmap> {
    let order = heatmap_order(m, meta)?;
    let n = m.len();
    let cell = (600.0 / n.max(1) as f64).clamp(2.0, 24.0);
    let margin = 60.0;
    let (lo, hi) = m.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo.min(0.0), hi.max(lo)) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let side = margin + cell * n as f64;
    let mut svg = Svg::new(side + 120.0, side + 20.0);
    for (r, &i) in order.iter().enumerate() {
        let li = &m.labels()[i];
        svg.text(margin - 4.0, margin + cell * (r as f64 + 0.75), cell.min(10.0), "end", li);
        for (c, &j) in order.iter().enumerate() {
            let v = if i == j { 0.0 } else { m.get(i, j) };
            let title = format!("{} – {}: {}", li, m.labels()[j], v);
            svg.rect("cell", margin + cell * c as f64, margin + cell * r as f64, cell, cell, &ramp((v - lo) / span), Some(&title));
        }
    }
    // Legend: five swatches spanning the colour scale.
    svg.raw(&format!(
        "<g class=\"legend\"><desc>Colour scale: linear from white at {} to dark blue at {} ({})</desc>",
        lo,
        hi,
        escape(m.kind().as_str())
    ));
    for k in 0..5 {
        let t = k as f64 / 4.0;
        let y = margin + 22.0 * k as f64;
        svg.rect("legend-swatch", side + 20.0, y, 16.0, 16.0, &ramp(t), None);
        svg.text(side + 42.0, y + 12.0, 10.0, "start", &format!("{:.3}", lo + t * span));
    }
    svg.raw("</g>");
    let mut csv = Vec::new();
    m.write_csv(&mut csv, Some(&order))?;
    Ok(Heatmap { svg: svg.finish(), csv: String::from_utf8(csv).expect("csv is utf-8"), order })
}

/// `(x_min, x_max, y_min, y_max)` covering all points plus a 5% margin.
pub fn scatter_bounds(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let fold = |f: fn(&(f64, f64)) -> f64| {
        points.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let pad = |(a, b): (f64, f64)| {
        let w = if b > a { b - a } else { 1.0 };
        (a - 0.05 * w, b + 0.05 * w)
    };
    let (x0, x1) = pad(fold(|p| p.0));
    let (y0, y1) = pad(fold(|p| p.1));
    (x0, x1, y0, y1)
}

/// Language centroids on the first two discriminants, coloured by family
/// and labelled by ISO.
pub fn emit_scatter_lda(centroids: &[LanguageEmbedding], meta: &LanguageTable) -> Result<String> {
    if centroids.is_empty() || centroids.iter().any(|c| c.vector.len() < 2) {
        return Err(Error::InvalidArgument("scatter needs at least 2 discriminant dimensions".into()));
    }
    let families: BTreeMap<&str, usize> = {
        let mut names: Vec<&str> = centroids.iter().map(|c| meta.require(&c.iso).map(|m| m.family.as_str())).collect::<Result<_>>()?;
        names.sort_unstable();
        names.dedup();
        names.into_iter().enumerate().map(|(k, f)| (f, k)).collect()
    };
    let pts: Vec<(f64, f64)> = centroids.iter().map(|c| (c.vector[0], c.vector[1])).collect();
    let (x0, x1, y0, y1) = scatter_bounds(&pts);
    let (w, h, m) = (640.0, 480.0, 50.0);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut svg = Svg::new(w + 140.0, h);
    svg.raw(&format!(
        "<g class=\"axes\" data-x-range=\"{x0} {x1}\" data-y-range=\"{y0} {y1}\"><line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/><line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/></g>",
        b = h - m,
        r = w - m
    ));
    svg.text(w / 2.0, h - 12.0, 12.0, "middle", "LD1");
    svg.text(14.0, h / 2.0, 12.0, "middle", "LD2");
    for (c, &(x, y)) in centroids.iter().zip(&pts) {
        let fam = &meta.require(&c.iso)?.family;
        let colour = PALETTE[families[fam.as_str()] % PALETTE.len()];
        svg.raw(&format!(
            "<circle class=\"point\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{colour}\"><title>{}</title></circle>",
            sx(x),
            sy(y),
            escape(&c.iso)
        ));
        svg.text(sx(x) + 5.0, sy(y) - 5.0, 9.0, "start", &c.iso);
    }
    for (f, &k) in &families {
        let y = m + 16.0 * k as f64;
        svg.rect("legend-swatch", w, y, 10.0, 10.0, PALETTE[k % PALETTE.len()], None);
        svg.text(w + 14.0, y + 9.0, 10.0, "start", f);
    }
    Ok(svg.finish())
}
