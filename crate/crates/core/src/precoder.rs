//! Beamformer construction: conjugate beamforming for one user, zero-forcing
//! from (possibly quantized) channel directions for several.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feedback::inner;

/// Largest condition number of the stacked directions accepted by ZF.
pub const MAX_CONDITION_NUMBER: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// One unit-norm beamformer per user.
    pub vectors: Vec<Vec<Complex64>>,
    /// Directions the beamformers were designed for.
    pub built_from: Vec<Vec<Complex64>>,
    /// Condition number of the stacked direction matrix.
    pub condition_number: f64,
}

impl BeamformerSet {
    pub fn users(&self) -> usize {
        self.vectors.len()
    }

    /// Desired power `|h_k* v_k|²` and interference `Σ_{i≠k} |h_k* v_i|²`
    /// seen by a receiver with channel `h` served by beam `k`.
    pub fn received_powers(&self, h: &[Complex64], k: usize) -> (f64, f64) {
        let mut desired = 0.0;
        let mut interference = 0.0;
        for (i, v) in self.vectors.iter().enumerate() {
            let p = inner(h, v).norm_sqr();
            if i == k {
                desired = p;
            } else {
                interference += p;
            }
        }
        (desired, interference)
    }
}

/// `h / ‖h‖`, the power-maximizing single-user beamformer.
pub fn conjugate_beamformer(h: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateInput("zero channel has no beamforming direction".into()));
    }
    if !norm.is_finite() {
        return Err(Error::Numeric("channel has non-finite coefficients".into()));
    }
    Ok(h.iter().map(|c| c / norm).collect())
}

/// Zero-forcing beamformers for `K` directions of length `Nₜ`.
///
/// Beam `i` is column `i` of the right pseudo-inverse of the matrix whose
/// rows are the conjugated directions, normalized to unit norm, so that
/// `ĥ_k* v_i = 0` for `k ≠ i`.
pub fn zf_beamformers(directions: &[Vec<Complex64>]) -> Result<BeamformerSet> {
    let users = directions.len();
    if users == 0 {
        return Err(Error::Parameter("zero-forcing needs at least one direction".into()));
    }
    let n_t = directions[0].len();
    if directions.iter().any(|d| d.len() != n_t) {
        return Err(Error::Parameter("directions have different lengths".into()));
    }
    if users > n_t {
        return Err(Error::Parameter(format!(
            "{users} users exceed {n_t} transmit antennas"
        )));
    }

    let stacked = DMatrix::from_fn(users, n_t, |r, c| directions[r][c].conj());
    let svd = stacked.svd(true, true);
    let sv = &svd.singular_values;
    let largest = sv.max();
    let smallest = sv.min();
    let condition_number = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
    if !(condition_number <= MAX_CONDITION_NUMBER) {
        return Err(Error::Conditioning { condition_number });
    }
    let pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::Numeric(e.to_string()))?;

    let vectors = (0..users)
        .map(|i| {
            let col = pinv.column(i);
            let norm = col.norm();
            col.iter().map(|c| c / norm).collect()
        })
        .collect();
    Ok(BeamformerSet {
        vectors,
        built_from: directions.to_vec(),
        condition_number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{complex_normal, ChannelVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn conjugate_basis_vector() {
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(conjugate_beamformer(&e1).unwrap(), e1);
    }

    #[test]
    fn conjugate_hand_computed() {
        let h = vec![c(0.0, 0.0), c(1.0, 1.0)];
        let v = conjugate_beamformer(&h).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[1] - c(s, s)).norm() < 1e-15);
        assert!((inner(&h, &v).norm_sqr() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_phase_covariance() {
        let h = vec![c(0.3, -0.2), c(1.5, 0.7), c(-0.4, 0.9)];
        let alpha = c(-2.0, 3.0);
        let scaled: Vec<_> = h.iter().map(|x| x * alpha).collect();
        let a = conjugate_beamformer(&scaled).unwrap();
        let phase = alpha / alpha.norm();
        let b = conjugate_beamformer(&h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y * phase).norm() < 1e-14);
        }
    }

    #[test]
    fn conjugate_zero_channel() {
        assert!(matches!(
            conjugate_beamformer(&[c(0.0, 0.0); 2]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn single_user_zf_is_the_direction() {
        let h = ChannelVector::new(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.2, 0.2)]).unwrap();
        let set = zf_beamformers(std::slice::from_ref(&h.direction)).unwrap();
        for (x, y) in set.vectors[0].iter().zip(&h.direction) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn orthonormal_directions_pass_through() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = vec![
            vec![c(s, 0.0), c(0.0, s), c(0.0, 0.0)],
            vec![c(0.0, s), c(s, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        ];
        let set = zf_beamformers(&d).unwrap();
        for (v, dir) in set.vectors.iter().zip(&d) {
            for (x, y) in v.iter().zip(dir) {
                assert!((x - y).norm() < 1e-14);
            }
        }
        assert!((set.condition_number - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_directions_are_nulled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d: Vec<Vec<Complex64>> = (0..2)
                .map(|_| {
                    ChannelVector::new((0..4).map(|_| complex_normal(&mut rng)).collect())
                        .unwrap()
                        .direction
                })
                .collect();
            let set = zf_beamformers(&d).unwrap();
            for (i, v) in set.vectors.iter().enumerate() {
                assert!((norm(v) - 1.0).abs() < 1e-12);
                for (k, dk) in d.iter().enumerate() {
                    if k != i {
                        assert!(inner(dk, v).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_deficient_rejected() {
        let d = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let e = vec![c(0.0, 1.0), c(0.0, 1.0)]; // same line as d
        match zf_beamformers(&[d, e]) {
            Err(Error::Conditioning { condition_number }) => assert!(condition_number > 1e10),
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }

    #[test]
    fn too_many_users() {
        let d = vec![vec![c(1.0, 0.0), c(0.0, 0.0)]; 3];
        assert!(matches!(zf_beamformers(&d), Err(Error::Parameter(_))));
    }

    #[test]
    fn received_powers_split() {
        let set = BeamformerSet {
            vectors: vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            built_from: vec![],
            condition_number: 1.0,
        };
        let (d, i) = set.received_powers(&[c(2.0, 0.0), c(0.0, 1.0)], 0);
        assert_eq!((d, i), (4.0, 1.0));
    }
}
