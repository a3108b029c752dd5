//! Small dense linear-algebra helpers on row vectors.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scales `v` to max-abs 1. Returns false (leaving `v` untouched) when `v`
/// is zero within `tol`.
pub fn normalize_max_abs(v: &mut [f64], tol: f64) -> bool {
    let m = max_abs(v);
    if m <= tol {
        return false;
    }
    for x in v.iter_mut() {
        *x /= m;
        if x.abs() < 1e-15 {
            *x = 0.0;
        }
    }
    true
}

/// Flips `v` so that its first entry above `tol` in magnitude is positive.
pub fn orient(v: &mut [f64], tol: f64) {
    if let Some(first) = v.iter().find(|x| x.abs() > tol) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Reduced row echelon form in place with partial pivoting. Returns the
/// pivot columns; rows beyond the rank are zeroed and truncated.
pub fn rref(rows: &mut Vec<Vec<f64>>, ncols: usize, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let (best, val) = (r..rows.len())
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            for row in rows.iter_mut().skip(r) {
                row[c] = 0.0;
            }
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][c];
        rows[r].iter_mut().for_each(|x| *x /= p);
        rows[r][c] = 1.0;
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            if x.abs() <= tol {
                *x = 0.0;
            }
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<f64>], ncols: usize, tol: f64) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols, tol).len()
}

/// Basis of `{z : A z = 0}`, one vector per free column, normalized to
/// max-abs 1 with a positive first nonzero entry.
pub fn kernel_basis(a: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut m = a.to_vec();
    let pivots = rref(&mut m, ncols, tol);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0.0; ncols];
        v[free] = 1.0;
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -row[free];
        }
        normalize_max_abs(&mut v, 0.0);
        orient(&mut v, tol);
        basis.push(v);
    }
    basis
}

/// Canonical basis of the span of `vectors`: the nonzero rows of their
/// reduced echelon form, normalized to max-abs 1.
pub fn span_basis(vectors: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut m = vectors.to_vec();
    rref(&mut m, ncols, tol);
    for v in m.iter_mut() {
        normalize_max_abs(v, 0.0);
        orient(v, tol);
    }
    m
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt).
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let n = dot(&w, &w).sqrt();
        if n > tol {
            w.iter_mut().for_each(|x| *x /= n);
            out.push(w);
        }
    }
    out
}

/// Removes from `v` its component in the span of the orthonormal `basis`.
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(v, q);
        v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_single_row() {
        let k = kernel_basis(&[vec![1.0, 2.0]], 2, 1e-12);
        assert_eq!(k.len(), 1);
        assert!((k[0][0] - 1.0).abs() < 1e-12 && (k[0][1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 1.0]];
        assert_eq!(rank(&rows, 3, 1e-12), 2);
    }

    #[test]
    fn span_basis_is_canonical() {
        let a = span_basis(&[vec![2.0, -2.0]], 2, 1e-12);
        let b = span_basis(&[vec![-0.5, 0.5]], 2, 1e-12);
        assert_eq!(a, b);
    }
}
