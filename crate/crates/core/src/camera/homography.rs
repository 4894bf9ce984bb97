//! Plane-to-plane projective mappings and their estimation from point
//! correspondences (normalized direct linear transform).

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};

/// A 3×3 projective map between two planes, defined up to scale and stored
/// normalized so the bottom-right element is 1 whenever it is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography {
    pub m: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Homography {
            m: Matrix3::identity(),
        }
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.determinant().abs() < 1e-15 {
            return Err(Error::Geometry("homography matrix is singular".into()));
        }
        Ok(Homography { m }.normalized())
    }

    /// Rescales so `m[2][2] = 1` when nonzero, unit Frobenius norm otherwise.
    pub fn normalized(&self) -> Self {
        let h33 = self.m[(2, 2)];
        let m = if h33.abs() > 1e-12 {
            self.m / h33
        } else {
            self.m / self.m.norm()
        };
        Homography { m }
    }

    /// Applies the map to a point; `None` when the point maps to infinity.
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let q = self.m * Vector3::new(p[0], p[1], 1.0);
        if q.z.abs() < 1e-15 {
            return None;
        }
        Some([q.x / q.z, q.y / q.z])
    }

    pub fn inverse(&self) -> Result<Homography> {
        let inv = self
            .m
            .try_inverse()
            .ok_or_else(|| Error::Geometry("homography is singular and cannot be inverted".into()))?;
        Ok(Homography { m: inv }.normalized())
    }

    /// Composition `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        Homography { m: self.m * other.m }.normalized()
    }
}

/// Isotropic normalization: translate the centroid to the origin and scale
/// the mean distance to √2.
fn hartley_normalization(pts: &[[f64; 2]]) -> Result<Matrix3<f64>> {
    let n = pts.len() as f64;
    let (mut cx, mut cy) = (0.0, 0.0);
    for p in pts {
        cx += p[0];
        cy += p[1];
    }
    cx /= n;
    cy /= n;
    let mean_dist = pts
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if mean_dist < 1e-12 {
        return Err(Error::Geometry(
            "correspondence points coincide; homography is underdetermined".into(),
        ));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn apply_affine(t: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    [
        t[(0, 0)] * p[0] + t[(0, 2)],
        t[(1, 1)] * p[1] + t[(1, 2)],
    ]
}

fn collinear(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let scale = ((b[0] - a[0]).hypot(b[1] - a[1])) * ((c[0] - a[0]).hypot(c[1] - a[1]));
    cross.abs() <= 1e-12 * scale.max(1e-12)
}

/// Estimates the homography mapping `pairs[i].0` to `pairs[i].1` with the
/// normalized DLT. Exactly four exact pairs are reproduced to machine
/// precision; more pairs give the algebraic least-squares solution.
pub fn homography_from_correspondences(pairs: &[([f64; 2], [f64; 2])]) -> Result<Homography> {
    if pairs.len() < 4 {
        return Err(Error::Geometry(format!(
            "homography estimation needs at least 4 correspondences, got {}",
            pairs.len()
        )));
    }
    let src: Vec<[f64; 2]> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<[f64; 2]> = pairs.iter().map(|p| p.1).collect();
    // With exactly four pairs any collinear source triple is degenerate;
    // larger sets tolerate collinear triples and are covered by the rank
    // test below.
    if src.len() == 4 {
        for i in 0..src.len() {
            for j in i + 1..src.len() {
                for k in j + 1..src.len() {
                    if collinear(src[i], src[j], src[k]) {
                        return Err(Error::Geometry(format!(
                            "source points {i}, {j}, {k} are collinear; homography is degenerate"
                        )));
                    }
                }
            }
        }
    }

    let t_src = hartley_normalization(&src)?;
    let t_dst = hartley_normalization(&dst)?;

    let mut a = DMatrix::<f64>::zeros(2 * pairs.len(), 9);
    for (i, (s, d)) in pairs.iter().enumerate() {
        let [x, y] = apply_affine(&t_src, *s);
        let [xp, yp] = apply_affine(&t_dst, *d);
        a[(2 * i, 0)] = -x;
        a[(2 * i, 1)] = -y;
        a[(2 * i, 2)] = -1.0;
        a[(2 * i, 6)] = xp * x;
        a[(2 * i, 7)] = xp * y;
        a[(2 * i, 8)] = xp;
        a[(2 * i + 1, 3)] = -x;
        a[(2 * i + 1, 4)] = -y;
        a[(2 * i + 1, 5)] = -1.0;
        a[(2 * i + 1, 6)] = yp * x;
        a[(2 * i + 1, 7)] = yp * y;
        a[(2 * i + 1, 8)] = yp;
    }

    // Smallest eigenvector of AᵀA is the DLT nullspace (or least-squares
    // direction). AᵀA is 9×9 symmetric, so the full eigenbasis is available
    // regardless of how many correspondences were provided.
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .abs()
            .partial_cmp(&eig.eigenvalues[j].abs())
            .unwrap()
    });
    let smallest = order[0];
    let second = order[1];
    let scale = eig.eigenvalues[order[8]].abs().max(1e-30);
    if eig.eigenvalues[second].abs() / scale < 1e-14 {
        return Err(Error::Geometry(
            "correspondences are rank-deficient; homography is degenerate".into(),
        ));
    }
    let h = eig.eigenvectors.column(smallest);
    let h_norm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);

    let t_dst_inv = t_dst
        .try_inverse()
        .expect("normalization transforms are invertible by construction");
    let m = t_dst_inv * h_norm * t_src;
    if m.determinant().abs() < 1e-15 {
        return Err(Error::Geometry(
            "estimated homography is singular; correspondences are degenerate".into(),
        ));
    }
    Ok(Homography { m }.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    fn unit_square() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn identity_from_fixed_points() {
        let pairs: Vec<_> = unit_square().iter().map(|&p| (p, p)).collect();
        let h = homography_from_correspondences(&pairs).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(h.m[(i, j)], expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn pure_translation_is_recovered() {
        let pairs: Vec<_> = unit_square()
            .iter()
            .map(|&p| (p, [p[0] + 1.0, p[1] + 2.0]))
            .collect();
        let h = homography_from_correspondences(&pairs).unwrap();
        assert_relative_eq!(h.m[(0, 2)], 1.0, epsilon = 1e-9);
        assert_relative_eq!(h.m[(1, 2)], 2.0, epsilon = 1e-9);
        assert_relative_eq!(h.m[(0, 0)], 1.0, epsilon = 1e-9);
        assert_relative_eq!(h.m[(0, 1)], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn random_projective_maps_are_recovered_to_high_precision() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for _ in 0..25 {
            let truth = Matrix3::new(
                1.0 + rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-0.3..0.3),
                1.0 + rng.gen_range(-0.3..0.3),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.01..0.01),
                1.0,
            );
            let truth = Homography::from_matrix(truth).unwrap();
            let src = [[0.0, 0.0], [10.0, 1.0], [9.0, 11.0], [-1.0, 8.0]];
            let pairs: Vec<_> = src.iter().map(|&p| (p, truth.apply(p).unwrap())).collect();
            let est = homography_from_correspondences(&pairs).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_relative_eq!(est.m[(i, j)], truth.m[(i, j)], epsilon = 1e-9);
                }
            }
            // Reprojection of the defining points is exact to 1e-9.
            for (s, d) in &pairs {
                let p = est.apply(*s).unwrap();
                assert!((p[0] - d[0]).abs() < 1e-9 && (p[1] - d[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn collinear_sources_are_rejected() {
        let pairs = vec![
            ([0.0, 0.0], [0.0, 0.0]),
            ([1.0, 1.0], [1.0, 0.0]),
            ([2.0, 2.0], [1.0, 1.0]),
            ([3.0, 1.0], [0.0, 1.0]),
        ];
        let err = homography_from_correspondences(&pairs).unwrap_err();
        assert!(err.to_string().contains("collinear"), "{err}");
    }

    #[test]
    fn too_few_points_are_rejected() {
        let pairs = vec![([0.0, 0.0], [0.0, 0.0]); 3];
        assert!(homography_from_correspondences(&pairs).is_err());
    }

    #[test]
    fn overdetermined_consistent_systems_stay_exact() {
        let truth = Homography::from_matrix(Matrix3::new(
            2.0, 0.1, 3.0, -0.2, 1.5, -1.0, 0.001, -0.002, 1.0,
        ))
        .unwrap();
        let src = [
            [0.0, 0.0],
            [10.0, 0.0],
            [10.0, 10.0],
            [0.0, 10.0],
            [5.0, 3.0],
            [2.0, 8.0],
        ];
        let pairs: Vec<_> = src.iter().map(|&p| (p, truth.apply(p).unwrap())).collect();
        let est = homography_from_correspondences(&pairs).unwrap();
        for (s, d) in &pairs {
            let p = est.apply(*s).unwrap();
            assert!((p[0] - d[0]).abs() < 1e-8 && (p[1] - d[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn inverse_and_compose_behave_projectively() {
        let h = Homography::from_matrix(Matrix3::new(
            1.2, 0.1, 4.0, -0.3, 0.9, 2.0, 0.002, 0.001, 1.0,
        ))
        .unwrap();
        let inv = h.inverse().unwrap();
        let round = h.compose(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(round.m[(i, j)], expect, epsilon = 1e-9);
            }
        }
        let p = [3.0, -2.0];
        let q = h.apply(p).unwrap();
        assert_relative_eq!(inv.apply(q).unwrap()[0], p[0], epsilon = 1e-9);
    }
}
