//! Double description method for cones `{x : A x ≤ 0}`.
//!
//! The iteration starts from the whole space (lineality = standard basis, no
//! rays) and intersects one halfspace at a time. While some lineality vector
//! is not orthogonal to the new row it is used as a pivot: the remaining
//! lineality vectors and rays are projected onto the row's hyperplane and the
//! pivot becomes a ray. Otherwise rays are split by sign and adjacent
//! positive/negative pairs are combined, with adjacency decided
//! combinatorially from zero sets.

use super::linalg::{dot, normalize_max_abs, orthonormal_basis, project_out, span_basis};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeGenerators {
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

#[derive(Clone)]
struct Ray {
    v: Vec<f64>,
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn count(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn is_superset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == *y)
}

/// Generators of `{x ∈ R^dim : a·x ≤ 0 for every row a}`.
pub fn cone_generators(rows: &[Vec<f64>], dim: usize) -> ConeGenerators {
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .filter_map(|r| {
            let mut r = r.clone();
            normalize_max_abs(&mut r, tol::DD_ZERO).then_some(r)
        })
        .collect();
    let words = rows.len().div_ceil(64).max(1);
    let mut lineality: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, a) in rows.iter().enumerate() {
        let pivot = lineality
            .iter()
            .enumerate()
            .map(|(i, l)| (i, dot(a, l)))
            .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, b)) if b.abs() >= s.abs() => best,
                _ => Some((i, s)),
            });
        if let Some((i, al)) = pivot.filter(|(_, s)| s.abs() > tol::DD_ZERO) {
            let l = lineality.remove(i);
            for other in lineality.iter_mut() {
                let f = dot(a, other) / al;
                other.iter_mut().zip(&l).for_each(|(x, y)| *x -= f * y);
                normalize_max_abs(other, 0.0);
            }
            rays.retain_mut(|r| {
                let f = dot(a, &r.v) / al;
                r.v.iter_mut().zip(&l).for_each(|(x, y)| *x -= f * y);
                set_bit(&mut r.zeros, k);
                normalize_max_abs(&mut r.v, tol::DD_ZERO)
            });
            let sign = if al > 0.0 { -1.0 } else { 1.0 };
            let mut v: Vec<f64> = l.iter().map(|x| sign * x).collect();
            normalize_max_abs(&mut v, 0.0);
            let mut zeros = vec![0u64; words];
            for j in 0..k {
                set_bit(&mut zeros, j);
            }
            rays.push(Ray { v, zeros });
            continue;
        }

        let signs: Vec<f64> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| signs[i] > tol::DD_ZERO).collect();
        if pos.is_empty() {
            for (r, s) in rays.iter_mut().zip(&signs) {
                if s.abs() <= tol::DD_ZERO {
                    set_bit(&mut r.zeros, k);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| signs[i] < -tol::DD_ZERO).collect();
        let min_common = (dim - lineality.len()).saturating_sub(2);
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for (i, r) in rays.iter().enumerate() {
            if signs[i] <= tol::DD_ZERO {
                let mut r = r.clone();
                if signs[i] >= -tol::DD_ZERO {
                    set_bit(&mut r.zeros, k);
                }
                next.push(r);
            }
        }
        let mut common = vec![0u64; words];
        for &p in &pos {
            for &n in &neg {
                for w in 0..words {
                    common[w] = rays[p].zeros[w] & rays[n].zeros[w];
                }
                if count(&common) < min_common {
                    continue;
                }
                let adjacent = !rays
                    .iter()
                    .enumerate()
                    .any(|(j, r)| j != p && j != n && is_superset(&r.zeros, &common));
                if !adjacent {
                    continue;
                }
                let (sp, sn) = (signs[p], signs[n]);
                let mut v: Vec<f64> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(x, y)| sp * x - sn * y)
                    .collect();
                if !normalize_max_abs(&mut v, tol::DD_ZERO) {
                    continue;
                }
                let mut zeros = common.clone();
                set_bit(&mut zeros, k);
                next.push(Ray { v, zeros });
            }
        }
        rays = next;
    }

    canonicalize(rays.into_iter().map(|r| r.v).collect(), lineality, dim)
}

/// Rays projected orthogonally to the lineality space, normalized,
/// deduplicated and sorted; lineality in reduced echelon form.
pub fn canonicalize(rays: Vec<Vec<f64>>, lineality: Vec<Vec<f64>>, dim: usize) -> ConeGenerators {
    let lineality = span_basis(&lineality, dim, tol::DD_ZERO);
    let ortho = orthonormal_basis(&lineality, tol::DD_ZERO);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in rays {
        project_out(&mut v, &ortho);
        if !normalize_max_abs(&mut v, 1e-7) {
            continue;
        }
        for x in v.iter_mut() {
            if x.abs() < 1e-12 {
                *x = 0.0;
            }
        }
        if !out
            .iter()
            .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-7))
        {
            out.push(v);
        }
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    ConeGenerators {
        rays: out,
        lineality,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant() {
        let g = cone_generators(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2);
        assert!(g.lineality.is_empty());
        assert_eq!(g.rays, vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn halfspace_has_lineality() {
        let g = cone_generators(&[vec![1.0, 1.0]], 2);
        assert_eq!(g.lineality.len(), 1);
        assert_eq!(g.rays.len(), 1);
        assert!((g.rays[0][0] + 1.0).abs() < 1e-12 && (g.rays[0][1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_rows_is_whole_space() {
        let g = cone_generators(&[], 3);
        assert!(g.rays.is_empty());
        assert_eq!(g.lineality.len(), 3);
    }

    #[test]
    fn pointed_square_cone_in_three_dimensions() {
        // {x : |x1| <= -x3, |x2| <= -x3} has four extreme rays.
        let rows = vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, -1.0, 1.0],
        ];
        let g = cone_generators(&rows, 3);
        assert!(g.lineality.is_empty());
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert!((r[2] + 1.0).abs() < 1e-12);
            assert!((r[0].abs() - 1.0).abs() < 1e-12 && (r[1].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cone() {
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let g = cone_generators(&rows, 2);
        assert!(g.rays.is_empty() && g.lineality.is_empty());
    }
}
