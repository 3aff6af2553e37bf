use crate::error::{Error, Result};

const BCE_CLAMP: f64 = 1e-7;

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.is_empty() {
        return Err(Error::Config("mse loss over an empty vector".into()));
    }
    if pred.len() != target.len() {
        return Err(Error::Config(format!(
            "mse loss length mismatch: {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let diff = p - t;
            loss += diff * diff;
            2.0 * diff / n
        })
        .collect();
    Ok((loss / n, grad))
}

/// Mean binary cross-entropy with predictions clamped to `[1e-7, 1-1e-7]`.
pub fn bce_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.is_empty() {
        return Err(Error::Config("bce loss over an empty vector".into()));
    }
    if pred.len() != target.len() {
        return Err(Error::Config(format!(
            "bce loss length mismatch: {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    if let Some(bad) = target.iter().find(|&&t| t != 0.0 && t != 1.0) {
        return Err(Error::Config(format!("bce target {bad} is not 0 or 1")));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            (p - t) / (p * (1.0 - p)) / n
        })
        .collect();
    Ok((loss / n, grad))
}
