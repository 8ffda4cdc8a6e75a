//! Dense linear algebra over `F_p` on row-major `Vec<Vec<u32>>` matrices.

use crate::coeff_ring::inv_mod;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<u32>], p: u32) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let inv = inv_mod(m[r][c], p);
        for v in m[r].iter_mut() {
            *v = ((*v as u64 * inv as u64) % p as u64) as u32;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = (p - row[c]) as u64;
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = ((*x as u64 + f * y as u64) % p as u64) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<u32>], p: u32) -> usize {
    let mut a = m.to_vec();
    rref(&mut a, p).len()
}

/// Rank of the span of the given column vectors.
pub fn rank_of_columns(cols: &[Vec<u32>], p: u32) -> usize {
    rank(cols, p)
}

/// Basis of `{v : m v = 0}`.
pub fn kernel(m: &[Vec<u32>], cols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a, p);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u32; cols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[r][f]) % p;
            }
            v
        })
        .collect()
}

/// Columns of `m` as vectors.
pub fn columns(m: &[Vec<u32>], cols: usize) -> Vec<Vec<u32>> {
    (0..cols).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

pub fn mul_vec(m: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    m.iter()
        .map(|row| {
            (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p as u64) as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel() {
        let m = vec![vec![1, 2, 0], vec![2, 4, 0]];
        assert_eq!(rank(&m, 5), 1);
        let k = kernel(&m, 3, 5);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(mul_vec(&m, v, 5).iter().all(|&x| x == 0));
        }
        assert_eq!(rank(&[vec![1, 1], vec![1, 1]], 2), 1);
        assert_eq!(rank(&[vec![1, 1], vec![0, 1]], 2), 2);
    }
}
