use num_complex::Complex;

use crate::basis::eigenfunction_eval;
use crate::level::LevelIndex;
use crate::scalar::Real;

/// Truncated eigenfunction sum sum_{m <= m_max} phi_{k,m}(x) conj(phi_{k,m}(y)).
pub fn kernel_by_sum<T: Real>(k: u32, x: [T; 2], y: [T; 2], m_max: u32) -> Complex<T> {
    let idx = LevelIndex::planar(k);
    let mut acc = Complex::new(T::zero(), T::zero());
    for m in 0..=m_max {
        let a = eigenfunction_eval(idx, m, x).unwrap();
        let b = eigenfunction_eval(idx, m, y).unwrap();
        acc = acc + a * b.conj();
    }
    acc
}
