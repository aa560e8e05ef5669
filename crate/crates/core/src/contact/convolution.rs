use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Lower envelope of the parabolas `f[q] + c (p - q)^2`, evaluated at every
/// integer `p` (Felzenszwalb-Huttenlocher).
fn lower_envelope(f: &[f64], c: f64, out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |q: usize| f[q] + c * (q * q) as f64;
    for q in 1..n {
        let mut s = (key(q) - key(v[k])) / (2.0 * c * (q - v[k]) as f64);
        // z[0] = -inf stops the walk at k = 0.
        while s <= z[k] {
            k -= 1;
            s = (key(q) - key(v[k])) / (2.0 * c * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (p, o) in out.iter_mut().enumerate() {
        while z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        let dq = p.abs_diff(q) as f64;
        *o = f[q] + c * dq * dq;
    }
}

/// `u_eps(x0) = min_x u(x) + |x - x0|^2 / eps` over the grid nodes, computed
/// exactly by separable lower envelopes.
pub fn inf_convolution(u: &ScalarField, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let d = *u.domain();
    let c = d.h() * d.h() / eps;
    let n0 = d.n_pts()[0];
    let n1 = if d.dim() == 2 { d.n_pts()[1] } else { 1 };
    let mut a = u.values().to_vec();
    if n1 > 1 {
        let mut row = vec![0.0; n1];
        for i in 0..n0 {
            lower_envelope(&a[i * n1..(i + 1) * n1], c, &mut row);
            a[i * n1..(i + 1) * n1].copy_from_slice(&row);
        }
    }
    let mut col = vec![0.0; n0];
    let mut out = vec![0.0; n0];
    for j in 0..n1 {
        for i in 0..n0 {
            col[i] = a[i * n1 + j];
        }
        lower_envelope(&col, c, &mut out);
        for i in 0..n0 {
            a[i * n1 + j] = out[i];
        }
    }
    ScalarField::new(d, a)
}

/// `-inf_convolution(-u, eps)`.
pub fn sup_convolution(u: &ScalarField, eps: f64) -> Result<ScalarField> {
    Ok(inf_convolution(&u.neg(), eps)?.neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(u: &ScalarField, eps: f64) -> Vec<f64> {
        let d = u.domain();
        (0..d.len())
            .map(|i| {
                (0..d.len())
                    .map(|j| u.get(j) + (d.coord(j) - d.coord(i)).norm_sq() / eps)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dims in [1, 2] {
            for _ in 0..5 {
                let d = if dims == 1 {
                    GridDomain::interval(-1.0, 1.0, 37).unwrap()
                } else {
                    GridDomain::square(-1.0, 1.0, 15).unwrap()
                };
                let u =
                    ScalarField::new(d, (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                        .unwrap();
                let eps = rng.gen_range(0.01..1.0);
                let fast = inf_convolution(&u, eps).unwrap();
                for (a, b) in fast.values().iter().zip(brute(&u, eps)) {
                    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn constant_and_affine() {
        let d = GridDomain::square(-1.0, 1.0, 41).unwrap();
        let c = ScalarField::constant(d, 3.0);
        assert_eq!(inf_convolution(&c, 0.1).unwrap(), c);
        assert_eq!(sup_convolution(&c, 0.1).unwrap(), c);
        let (a0, a1, b) = (0.5, -0.25, 0.1);
        let eps = 0.2;
        let u = ScalarField::from_fn(d, |x| a0 * x[0] + a1 * x[1] + b).unwrap();
        let ue = inf_convolution(&u, eps).unwrap();
        let shift = eps * (a0 * a0 + a1 * a1) / 4.0;
        let h = d.h();
        let inner = crate::field::RegionMask::ball(d, crate::linalg::Vector::new2(0.0, 0.0), 0.5);
        for i in inner.indices() {
            let exact = u.get(i) - shift;
            assert!((ue.get(i) - exact).abs() <= h * h / eps + 1e-12);
        }
    }

    #[test]
    fn monotone_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = GridDomain::square(0.0, 1.0, 21).unwrap();
        let u =
            ScalarField::new(d, (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let u1 = inf_convolution(&u, 0.05).unwrap();
        let u2 = inf_convolution(&u, 0.2).unwrap();
        let s1 = sup_convolution(&u, 0.05).unwrap();
        let s2 = sup_convolution(&u, 0.2).unwrap();
        for i in 0..d.len() {
            assert!(u2.get(i) <= u1.get(i) && u1.get(i) <= u.get(i));
            assert!(s2.get(i) >= s1.get(i) && s1.get(i) >= u.get(i));
        }
    }
}
