use super::tensor::{cst, Scalar};
use super::NnError;

/// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]` before the log.
pub const BCE_EPS: f64 = 1e-7;

fn check_label(y: u8) -> Result<(), NnError> {
    if y > 1 {
        return Err(NnError::Label(y));
    }
    Ok(())
}

fn clamp_p<T: Scalar>(p: T) -> T {
    let eps = cst::<T>(BCE_EPS);
    p.max(eps).min(T::one() - eps)
}

/// `-[y ln p + (1 - y) ln(1 - p)]` on the clamped probability.
pub fn bce<T: Scalar>(p: T, y: u8) -> Result<T, NnError> {
    check_label(y)?;
    let p = clamp_p(p);
    Ok(if y == 1 { -p.ln() } else { -(T::one() - p).ln() })
}

/// Mean loss over a batch and its gradient with respect to each probability.
/// Inside the clamp interval the gradient is `(p - y) / (p (1 - p)) / n`;
/// outside it is zero, matching the clamped loss.
pub fn bce_batch<T: Scalar>(p: &[T], y: &[u8]) -> Result<(T, Vec<T>), NnError> {
    if p.len() != y.len() {
        return Err(NnError::Shape(format!("{} probabilities, {} labels", p.len(), y.len())));
    }
    if p.is_empty() {
        return Ok((T::zero(), Vec::new()));
    }
    let n = cst::<T>(p.len() as f64);
    let eps = cst::<T>(BCE_EPS);
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &yi) in p.iter().zip(y) {
        total = total + bce(pi, yi)?;
        let inside = pi > eps && pi < T::one() - eps;
        let yt = cst::<T>(yi as f64);
        grad.push(if inside { (pi - yt) / (pi * (T::one() - pi)) / n } else { T::zero() });
    }
    Ok((total / n, grad))
}

/// Gradient of `bce(sigmoid(z), y)` with respect to the logit `z`, computed
/// from the sigmoid output `p`. This is the unclamped composite derivative,
/// which keeps saturated wrong predictions trainable.
pub fn bce_logit_grad<T: Scalar>(p: T, y: u8) -> Result<T, NnError> {
    check_label(y)?;
    Ok(p - cst::<T>(y as f64))
}
