use crate::error::{Error, Result};

/// Locally weighted linear regression evaluated at every `xs[i]`, using
/// the `ceil(span·n)` nearest points with tricube weights.
pub fn loess_smooth(xs: &[f64], ys: &[f64], span: f64) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!("loess: {} xs vs {} ys", xs.len(), ys.len())));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::InvalidArgument(format!("loess span {span} outside (0, 1]")));
    }
    if xs.len() < 5 {
        return Err(Error::InvalidArgument(format!("loess needs >= 5 points, got {}", xs.len())));
    }
    let n = xs.len();
    let q = ((span * n as f64).ceil() as usize).clamp(2, n);
    Ok(xs.iter().map(|&x0| local_fit(xs, ys, x0, q)).collect())
}

fn local_fit(xs: &[f64], ys: &[f64], x0: f64, q: usize) -> f64 {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| (xs[a] - x0).abs().total_cmp(&(xs[b] - x0).abs()).then(a.cmp(&b)));
    let window = &idx[..q];
    let h = window.iter().map(|&i| (xs[i] - x0).abs()).fold(0.0, f64::max);
    let window_mean = || window.iter().map(|&i| ys[i]).sum::<f64>() / q as f64;
    if h == 0.0 {
        return window_mean();
    }
    // Widen slightly so the farthest neighbour keeps a tiny positive weight.
    let h = h * (1.0 + 1e-10);
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let w: Vec<f64> = window.iter().map(|&i| (1.0 - ((xs[i] - x0).abs() / h).powi(3)).powi(3)).collect();
    for (k, &i) in window.iter().enumerate() {
        sw += w[k];
        sx += w[k] * xs[i];
        sy += w[k] * ys[i];
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (k, &i) in window.iter().enumerate() {
        sxx += w[k] * (xs[i] - mx).powi(2);
        sxy += w[k] * (xs[i] - mx) * (ys[i] - my);
    }
    if sxx <= 1e-12 * sw * h * h {
        return my;
    }
    my + sxy / sxx * (x0 - mx)
}
