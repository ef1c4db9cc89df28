use crate::scalar::Scalar;

pub const ECC_WORDS: usize = 24;
pub const ECC_BITS: usize = 12;

/// Target parameters of the frequency-modulation sound model.
pub const FM_TARGET: [f64; 6] = [1.0, 5.0, 1.5, 4.8, 2.0, 4.9];

pub const SYS_LIN_EQ_A: [[f64; 10]; 10] = [
    [5.0, 4.0, 5.0, 2.0, 9.0, 5.0, 4.0, 2.0, 3.0, 1.0],
    [9.0, 7.0, 1.0, 1.0, 7.0, 2.0, 2.0, 6.0, 6.0, 9.0],
    [3.0, 1.0, 8.0, 6.0, 9.0, 7.0, 4.0, 2.0, 1.0, 6.0],
    [8.0, 3.0, 7.0, 3.0, 7.0, 5.0, 3.0, 9.0, 9.0, 5.0],
    [9.0, 5.0, 1.0, 6.0, 3.0, 4.0, 2.0, 3.0, 3.0, 9.0],
    [1.0, 2.0, 3.0, 1.0, 7.0, 6.0, 6.0, 3.0, 3.0, 3.0],
    [1.0, 5.0, 7.0, 8.0, 1.0, 4.0, 7.0, 8.0, 4.0, 8.0],
    [9.0, 3.0, 8.0, 6.0, 3.0, 4.0, 7.0, 1.0, 8.0, 1.0],
    [8.0, 2.0, 8.0, 5.0, 3.0, 8.0, 7.0, 2.0, 7.0, 5.0],
    [2.0, 1.0, 2.0, 2.0, 9.0, 8.0, 7.0, 4.0, 4.0, 1.0],
];

pub const SYS_LIN_EQ_B: [f64; 10] = [40.0, 50.0, 47.0, 59.0, 45.0, 35.0, 53.0, 50.0, 55.0, 40.0];

/// Minimum of the Watson objective over [-2, 2]^6, located numerically.
pub(super) const WATSON_MINIMUM: f64 = 2.28767e-3;

fn fm_signal<T: Scalar>(x: &[T], t: T, theta: T) -> T {
    let tt = t * theta;
    x[0] * (x[1] * tt + x[2] * (x[3] * tt + x[4] * (x[5] * tt).sin()).sin()).sin()
}

pub(super) fn freq_mod<T: Scalar>(x: &[T]) -> T {
    let theta = T::lit(2.0 * std::f64::consts::PI / 100.0);
    let target: [T; 6] = FM_TARGET.map(T::lit);
    (0..=100)
        .map(|t| {
            let t = T::lit(t as f64);
            let d = fm_signal(x, t, theta) - fm_signal(&target, t, theta);
            d * d
        })
        .sum()
}

/// Hamming distance between code words `i` and `j` of a 24 x 12 bit genome.
pub fn ecc_codeword_distance<T: Scalar>(x: &[T], i: usize, j: usize) -> usize {
    let a = &x[i * ECC_BITS..(i + 1) * ECC_BITS];
    let b = &x[j * ECC_BITS..(j + 1) * ECC_BITS];
    a.iter().zip(b).filter(|(p, q)| (**p > T::lit(0.5)) != (**q > T::lit(0.5))).count()
}

/// `1 / sum_{i != j} d_ij^-2`; any repeated code word gives 0.
pub(super) fn ecc<T: Scalar>(x: &[T]) -> T {
    let mut words = [0u16; ECC_WORDS];
    for (w, word) in words.iter_mut().enumerate() {
        for b in 0..ECC_BITS {
            if x[w * ECC_BITS + b] > T::lit(0.5) {
                *word |= 1 << b;
            }
        }
    }
    let mut total = 0.0f64;
    for i in 0..ECC_WORDS {
        for j in (i + 1)..ECC_WORDS {
            let d = (words[i] ^ words[j]).count_ones();
            if d == 0 {
                return T::zero();
            }
            // ordered pairs: each unordered pair counted twice
            total += 2.0 / (d * d) as f64;
        }
    }
    T::lit(1.0 / total)
}

/// `sum_i |(A x)_i - b_i|`.
pub(super) fn sys_lin_eq<T: Scalar>(x: &[T]) -> T {
    SYS_LIN_EQ_A
        .iter()
        .zip(SYS_LIN_EQ_B)
        .map(|(row, b)| {
            let ax: T = row.iter().zip(x).map(|(&a, &xj)| T::lit(a) * xj).sum();
            (ax - T::lit(b)).abs()
        })
        .sum()
}

pub(super) fn rastrigin<T: Scalar>(x: &[T]) -> T {
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    T::lit(10.0 * x.len() as f64) + x.iter().map(|&v| v * v - T::lit(10.0) * (two_pi * v).cos()).sum::<T>()
}

pub(super) fn griewangk<T: Scalar>(x: &[T]) -> T {
    let sum: T = x.iter().map(|&v| v * v).sum();
    let prod = x
        .iter()
        .enumerate()
        .fold(T::one(), |acc, (i, &v)| acc * (v / T::lit(((i + 1) as f64).sqrt())).cos());
    sum / T::lit(4000.0) - prod + T::one()
}

pub(super) fn watson<T: Scalar>(x: &[T]) -> T {
    let mut total = T::zero();
    for i in 1..=30 {
        let a = T::lit((i - 1) as f64 / 29.0);
        let mut deriv = T::zero();
        let mut pow = T::one();
        for j in 1..=5 {
            deriv += T::lit(j as f64) * pow * x[j];
            pow *= a;
        }
        let mut poly = T::zero();
        let mut pow = T::one();
        for &xj in x.iter().take(6) {
            poly += pow * xj;
            pow *= a;
        }
        let r = deriv - poly * poly - T::one();
        total += r * r;
    }
    total + x[0] * x[0]
}

#[cfg(test)]
mod tests {
    use super::super::Problem;
    use super::*;

    #[test]
    fn optima_at_origin_or_ones() {
        assert_eq!(Problem::Rastrigin.evaluate(&[0.0f64; 20]).unwrap().objective, 0.0);
        assert_eq!(Problem::Griewangk.evaluate(&[0.0f64; 10]).unwrap().objective, 0.0);
        assert_eq!(Problem::SysLinEq.evaluate(&[1.0f64; 10]).unwrap().objective, 0.0);
        assert_eq!(Problem::FreqMod.evaluate(&FM_TARGET).unwrap().objective, 0.0);
    }

    #[test]
    fn sys_lin_eq_rows_sum_to_b() {
        for (row, b) in SYS_LIN_EQ_A.iter().zip(SYS_LIN_EQ_B) {
            assert_eq!(row.iter().sum::<f64>(), b);
        }
        // absolute residuals: perturbing any coordinate raises the objective
        let mut x = [1.0f64; 10];
        x[3] = 0.5;
        assert!(Problem::SysLinEq.evaluate(&x).unwrap().objective > 0.0);
        x[3] = 1.5;
        assert!(Problem::SysLinEq.evaluate(&x).unwrap().objective > 0.0);
    }

    #[test]
    fn ecc_repeated_word_scores_zero() {
        let x = vec![0.0f64; 288];
        assert_eq!(Problem::Ecc.evaluate(&x).unwrap().objective, 0.0);
    }

    #[test]
    fn watson_small_near_minimizer() {
        let x = [-0.0157258f64, 1.01243481, -0.23299134, 1.26042537, -1.51372141, 0.99299173];
        let f = Problem::Watson.evaluate(&x).unwrap().objective;
        assert!((f - WATSON_MINIMUM).abs() < 1e-8, "{f}");
    }
}
