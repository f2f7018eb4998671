//! Cached FFT plans. The forward transform is unnormalized and the inverse
//! carries the `1/n` factor, matching the DFT pair used by the modem.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{lit, Real};

thread_local! {
    static PLANS: RefCell<HashMap<(TypeId, usize, bool), Box<dyn Any>>> = RefCell::new(HashMap::new());
}

fn plan<T: Real>(len: usize, inverse: bool) -> Arc<dyn Fft<T>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((TypeId::of::<T>(), len, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::<T>::new();
                let p = if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                };
                Box::new(p)
            })
            .downcast_ref::<Arc<dyn Fft<T>>>()
            .expect("plan cache keyed by scalar type")
            .clone()
    })
}

/// In-place unnormalized forward DFT: `X(l) = sum_n x(n) e^{-j2pi ln/N}`.
pub fn forward_in_place<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        plan::<T>(buf.len(), false).process(buf);
    }
}

/// In-place unnormalized inverse DFT: `x(n) = sum_l X(l) e^{+j2pi ln/N}`.
pub fn inverse_unnormalized_in_place<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        plan::<T>(buf.len(), true).process(buf);
    }
}

/// Forward DFT of `x`.
pub fn dft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = x.to_vec();
    forward_in_place(&mut out);
    out
}

/// Inverse DFT of `x`, including the `1/N` factor.
pub fn idft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = x.to_vec();
    inverse_unnormalized_in_place(&mut out);
    let scale: T = lit(1.0 / x.len().max(1) as f64);
    out.iter_mut().for_each(|v| *v = *v * scale);
    out
}
