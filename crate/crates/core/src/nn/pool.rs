use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Non-overlapping max pooling over the length axis of `[length, channels]`.
/// Returns the pooled tensor and, per output cell, the flat input index that
/// won (first index on ties).
pub fn maxpool1d_forward<T: Scalar>(x: &Tensor<T>, pool: usize) -> Result<(Tensor<T>, Vec<usize>), NnError> {
    let (len, c) = match x.shape() {
        [l, c] => (*l, *c),
        s => return Err(NnError::Shape(format!("maxpool1d expects [L, C], got {s:?}"))),
    };
    if pool == 0 || len < pool {
        return Err(NnError::Shape(format!("maxpool1d: length {len} < pool {pool}")));
    }
    let out_len = len / pool;
    let xd = x.data();
    let mut out = Vec::with_capacity(out_len * c);
    let mut argmax = Vec::with_capacity(out_len * c);
    for o in 0..out_len {
        for ch in 0..c {
            let mut best = o * pool * c + ch;
            for p in 1..pool {
                let i = (o * pool + p) * c + ch;
                if xd[i] > xd[best] {
                    best = i;
                }
            }
            out.push(xd[best]);
            argmax.push(best);
        }
    }
    Ok((Tensor::raw(vec![out_len, c], out), argmax))
}

pub fn maxpool1d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor<T>, NnError> {
    if grad_out.len() != argmax.len() {
        return Err(NnError::Cache("maxpool1d argmax / gradient length".into()));
    }
    let n: usize = input_shape.iter().product();
    let mut gx = vec![T::zero(); n];
    for (&i, &g) in argmax.iter().zip(grad_out.data()) {
        if i >= n {
            return Err(NnError::Cache("maxpool1d argmax out of range".into()));
        }
        gx[i] = gx[i] + g;
    }
    Ok(Tensor::raw(input_shape.to_vec(), gx))
}
