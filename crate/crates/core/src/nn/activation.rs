use rand::Rng;

use super::tensor::{cst, Scalar, Tensor};
use super::NnError;

fn map<T: Scalar>(x: &Tensor<T>, f: impl Fn(T) -> T) -> Tensor<T> {
    Tensor::raw(x.shape().to_vec(), x.data().iter().map(|&v| f(v)).collect())
}

fn check_same<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, what: &str) -> Result<(), NnError> {
    if a.shape() != b.shape() {
        return Err(NnError::Shape(format!("{what}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

pub fn relu_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    map(x, |v| if v > T::zero() { v } else { T::zero() })
}

/// Gradient is passed where the forward input was strictly positive.
pub fn relu_backward<T: Scalar>(input: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    check_same(input, grad_out, "relu backward")?;
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Ok(Tensor::raw(input.shape().to_vec(), data))
}

#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

pub fn sigmoid_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    map(x, sigmoid)
}

/// Uses the forward output: `dσ/dz = σ (1 - σ)`.
pub fn sigmoid_backward<T: Scalar>(output: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    check_same(output, grad_out, "sigmoid backward")?;
    let data = output
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&s, &g)| g * s * (T::one() - s))
        .collect();
    Ok(Tensor::raw(output.shape().to_vec(), data))
}

/// Inverted dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask<T: Scalar, R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<T> {
    let keep = cst::<T>(1.0 / (1.0 - rate));
    (0..len)
        .map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep })
        .collect()
}

pub fn apply_mask<T: Scalar>(x: &Tensor<T>, mask: &[T]) -> Result<Tensor<T>, NnError> {
    if mask.len() != x.len() {
        return Err(NnError::Cache("dropout mask length".into()));
    }
    let data = x.data().iter().zip(mask).map(|(&v, &m)| v * m).collect();
    Ok(Tensor::raw(x.shape().to_vec(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigmoid_of_zero() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert_eq!(sigmoid(0.0f32), 0.5);
    }

    #[test]
    fn relu_values_and_gradient() {
        let x = Tensor::raw(vec![3], vec![-1.0f64, 0.0, 2.0]);
        assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 2.0]);
        let g = relu_backward(&x, &Tensor::raw(vec![3], vec![5.0, 5.0, 5.0])).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn dropout_mask_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m: Vec<f64> = dropout_mask(10_000, 0.5, &mut rng);
        let zeros = m.iter().filter(|&&v| v == 0.0).count();
        assert!((4_700..5_300).contains(&zeros), "{zeros}");
        assert!(m.iter().all(|&v| v == 0.0 || v == 2.0));
        let none: Vec<f64> = dropout_mask(100, 0.0, &mut rng);
        assert!(none.iter().all(|&v| v == 1.0));
    }
}
