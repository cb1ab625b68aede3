//! Ordinary least squares on (ln x, ln |y|).

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit, CliError> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(CliError::DegenerateFit(format!("need at least 3 points, got {}", xs.len().min(ys.len()))));
    }
    if let Some(i) = ys.iter().position(|y| *y == 0.0 || !y.is_finite()) {
        return Err(CliError::DegenerateFit(format!("value at point {i} is {}; cannot take its logarithm", ys[i])));
    }
    if let Some(i) = xs.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(CliError::DegenerateFit(format!("abscissa at point {i} is {}", xs[i])));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if lx.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(PowerFit { slope, intercept, stderr })
}
