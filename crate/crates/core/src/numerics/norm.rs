//! Matrix p-norm estimation by Higham's power method (the p-norm analogue of
//! Boyd's iteration), working only through products with A and A^H.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PNormEstimate {
    pub value: f64,
    pub iterations: usize,
}

fn vec_norm(v: &[C64], p: f64) -> f64 {
    if p == 2.0 {
        return v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    // scaled so that large exponents (p near 1 gives q huge) stay finite
    let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|z| (z.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// dual_p(y): the vector attaining equality in Hölder's inequality for y,
/// with unit norm in the conjugate exponent.
fn dual(y: &[C64], p: f64) -> Vec<C64> {
    let ny = vec_norm(y, p);
    if ny == 0.0 {
        return vec![C64::new(0.0, 0.0); y.len()];
    }
    y.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                (z / r) * (r / ny).powf(p - 1.0)
            }
        })
        .collect()
}

fn run(apply: &dyn Fn(&[C64]) -> Vec<C64>, apply_adj: &dyn Fn(&[C64]) -> Vec<C64>, x0: Vec<C64>, p: f64) -> PNormEstimate {
    let q = p / (p - 1.0);
    let n0 = vec_norm(&x0, p);
    let mut x: Vec<C64> = x0.iter().map(|z| z / n0).collect();
    let mut gamma = 0.0;
    for it in 1..=100 {
        let y = apply(&x);
        let g = vec_norm(&y, p);
        let z = apply_adj(&dual(&y, p));
        let zq = vec_norm(&z, q);
        let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        let improved = g > gamma * (1.0 + 1e-12);
        gamma = gamma.max(g);
        if zq <= zx * (1.0 + 1e-10) || !improved || zq == 0.0 {
            return PNormEstimate { value: gamma, iterations: it };
        }
        x = dual(&z, q);
    }
    PNormEstimate { value: gamma, iterations: 100 }
}

/// Lower estimate of ‖A‖_p for the operator given by `apply` (x ↦ Ax) and
/// `apply_adj` (x ↦ A^H x). Two deterministic starts are used (all ones and a
/// seeded random vector); the larger result is returned.
pub fn p_norm_estimate(
    n: usize,
    p: f64,
    apply: &dyn Fn(&[C64]) -> Vec<C64>,
    apply_adj: &dyn Fn(&[C64]) -> Vec<C64>,
    seed: u64,
) -> PNormEstimate {
    let ones = vec![C64::new(1.0, 0.0); n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_start: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let a = run(apply, apply_adj, ones, p);
    let b = run(apply, apply_adj, rand_start, p);
    if a.value >= b.value {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_norm_is_exact() {
        let d = [C64::new(1.0, 0.0), C64::new(-3.0, 0.0), C64::new(0.0, 2.0)];
        let ap = |x: &[C64]| x.iter().zip(&d).map(|(a, b)| a * b).collect::<Vec<_>>();
        let ad = |x: &[C64]| x.iter().zip(&d).map(|(a, b)| a * b.conj()).collect::<Vec<_>>();
        for p in [1.5, 2.0, 3.0] {
            let e = p_norm_estimate(3, p, &ap, &ad, 1);
            assert!((e.value - 3.0).abs() < 1e-9, "p={p}: {}", e.value);
        }
    }

    #[test]
    fn one_norm_limit_of_column_sums() {
        // for p close to 1 the estimate approaches the maximal column sum
        let m = [[1.0, 2.0], [3.0, -4.0]];
        let ap = |x: &[C64]| (0..2).map(|i| (0..2).map(|j| x[j] * m[i][j]).sum()).collect::<Vec<C64>>();
        let ad = |x: &[C64]| (0..2).map(|j| (0..2).map(|i| x[i] * m[i][j]).sum()).collect::<Vec<C64>>();
        let e = p_norm_estimate(2, 1.0001, &ap, &ad, 3);
        assert!((e.value - 6.0).abs() < 0.01, "{}", e.value);
    }
}
