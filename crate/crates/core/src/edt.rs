//! Exact Euclidean distance transform.
//!
//! The separable transform runs one lower-envelope-of-parabolas pass per axis
//! (Felzenszwalb–Huttenlocher). Parabola intersections are kept as exact
//! rationals, so the squared distances it returns are exact integers in units
//! of `h^2` and match the all-pairs oracle bit for bit.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GridSpec};

const INF: u32 = u32::MAX;

/// Per-cell distance from the cell center to the nearest occupied center.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    grid: GridSpec,
    sq: Vec<u32>,
}

impl DistanceField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Squared distances in units of `h^2`, linear cell order.
    pub fn squared_cells(&self) -> &[u32] {
        &self.sq
    }

    /// Euclidean distance at linear index `lin`.
    pub fn dist(&self, lin: usize) -> f64 {
        (self.sq[lin] as f64).sqrt() * self.grid.h()
    }

    pub fn max_dist(&self) -> f64 {
        self.sq.iter().copied().max().map_or(0.0, |m| (m as f64).sqrt() * self.grid.h())
    }
}

/// Rational bound `num / den` with `den > 0`, or an infinity.
#[derive(Clone, Copy, Debug)]
enum Bound {
    NegInf,
    At(i64, i64),
    PosInf,
}

impl Bound {
    fn cmp_bound(self, other: Bound) -> Ordering {
        match (self, other) {
            (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, Bound::PosInf) => Ordering::Equal,
            (Bound::NegInf, _) | (_, Bound::PosInf) => Ordering::Less,
            (_, Bound::NegInf) | (Bound::PosInf, _) => Ordering::Greater,
            (Bound::At(a, b), Bound::At(c, d)) => (a as i128 * d as i128).cmp(&(c as i128 * b as i128)),
        }
    }

    fn less_than_int(self, q: i64) -> bool {
        match self {
            Bound::NegInf => true,
            Bound::PosInf => false,
            Bound::At(num, den) => (num as i128) < q as i128 * den as i128,
        }
    }
}

#[derive(Default)]
struct Scratch {
    f: Vec<u32>,
    v: Vec<usize>,
    z: Vec<Bound>,
}

/// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`.
fn envelope_1d(f: &[u32], out: &mut [u32], v: &mut Vec<usize>, z: &mut Vec<Bound>) {
    v.clear();
    z.clear();
    let key = |p: usize| f[p] as i64 + (p * p) as i64;
    for q in 0..f.len() {
        if f[q] == INF {
            continue;
        }
        if v.is_empty() {
            v.push(q);
            z.push(Bound::NegInf);
            z.push(Bound::PosInf);
            continue;
        }
        loop {
            let p = *v.last().unwrap();
            let s = Bound::At(key(q) - key(p), 2 * (q - p) as i64);
            let k = v.len() - 1;
            if k > 0 && s.cmp_bound(z[k]) != Ordering::Greater {
                v.pop();
                z.pop();
            } else {
                *z.last_mut().unwrap() = s;
                z.push(Bound::PosInf);
                v.push(q);
                break;
            }
        }
    }
    if v.is_empty() {
        out.fill(INF);
        return;
    }
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        while z[k + 1].less_than_int(q as i64) {
            k += 1;
        }
        let p = v[k];
        let d = q.abs_diff(p) as u64;
        *slot = (d * d + f[p] as u64) as u32;
    }
}

fn pass_rows(buf: &mut [u32], n: usize) {
    buf.par_chunks_mut(n).for_each_init(Scratch::default, |scr, row| {
        scr.f.clear();
        scr.f.extend_from_slice(row);
        envelope_1d(&scr.f, row, &mut scr.v, &mut scr.z);
    });
}

/// Cyclic axis permutation so that the old second axis becomes the fastest.
fn rotate_axes(src: &[u32], dst: &mut [u32], n: usize, dim: usize) {
    match dim {
        2 => dst.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = src[i + n * j];
            }
        }),
        _ => dst.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
            let (k, i) = (r % n, r / n);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = src[i + n * (j + n * k)];
            }
        }),
    }
}

/// Exact Euclidean distance transform of `mask`.
pub fn exact_edt(mask: &BinaryMask) -> Result<DistanceField> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid().clone();
    let (n, dim) = (grid.n(), grid.dim());
    let mut buf: Vec<u32> = mask.cells().iter().map(|&c| if c { 0 } else { INF }).collect();
    let mut tmp = vec![0u32; buf.len()];
    for _ in 0..dim {
        pass_rows(&mut buf, n);
        rotate_axes(&buf, &mut tmp, n, dim);
        std::mem::swap(&mut buf, &mut tmp);
    }
    Ok(DistanceField { grid, sq: buf })
}

/// All-pairs minimum over occupied cells; the reference the fast transform is
/// tested against. Cost is `cells × seeds`.
pub fn brute_edt(mask: &BinaryMask) -> Result<DistanceField> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid().clone();
    let seeds: Vec<[usize; 3]> = mask.occupied().collect();
    let sq = (0..grid.len())
        .into_par_iter()
        .map(|lin| {
            let c = grid.unlinear(lin);
            seeds
                .iter()
                .map(|s| (0..3).map(|a| (c[a].abs_diff(s[a]) as u64).pow(2)).sum::<u64>())
                .min()
                .unwrap() as u32
        })
        .collect();
    Ok(DistanceField { grid, sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, BoundingBox};

    fn grid(n: usize, dim: usize) -> GridSpec {
        make_grid(&BoundingBox::cube(dim, 0.0, n as f64), n, dim).unwrap()
    }

    #[test]
    fn single_seed_is_zero() {
        let g = grid(5, 2);
        let mut m = BinaryMask::empty(g.clone());
        m.set([2, 3, 0]);
        let f = exact_edt(&m).unwrap();
        assert_eq!(f.squared_cells()[g.linear([2, 3, 0])], 0);
        assert_eq!(f, brute_edt(&m).unwrap());
    }

    #[test]
    fn two_corner_seeds() {
        let g = grid(8, 2);
        let mut m = BinaryMask::empty(g.clone());
        m.set([0, 0, 0]);
        m.set([7, 7, 0]);
        let f = exact_edt(&m).unwrap();
        // (0,7): 7h from either seed.
        assert_eq!(f.squared_cells()[g.linear([0, 7, 0])], 49);
        assert_eq!(f.dist(g.linear([0, 7, 0])), 7.0);
        assert_eq!(f, brute_edt(&m).unwrap());
    }

    #[test]
    fn hand_checked_4x4() {
        let g = grid(4, 2);
        let mut m = BinaryMask::empty(g.clone());
        m.set([0, 0, 0]);
        m.set([3, 1, 0]);
        let f = brute_edt(&m).unwrap();
        #[rustfmt::skip]
        let expect = [
            0, 1, 2, 1,
            1, 2, 1, 0,
            4, 5, 2, 1,
            9, 8, 5, 4,
        ];
        assert_eq!(f.squared_cells(), &expect);
        assert_eq!(exact_edt(&m).unwrap(), f);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let m = BinaryMask::empty(grid(4, 2));
        assert!(matches!(exact_edt(&m), Err(Error::EmptyMask)));
        assert!(matches!(brute_edt(&m), Err(Error::EmptyMask)));
    }

    #[test]
    fn three_dimensional_line() {
        let g = grid(6, 3);
        let mut m = BinaryMask::empty(g.clone());
        for k in 0..6 {
            m.set([1, 4, k]);
        }
        let f = exact_edt(&m).unwrap();
        assert_eq!(f, brute_edt(&m).unwrap());
        assert_eq!(f.squared_cells()[g.linear([5, 0, 3])], 16 + 16);
    }

    #[test]
    fn envelope_with_ties() {
        let f = [0, INF, 0, INF, INF, 0];
        let mut out = [0u32; 6];
        envelope_1d(&f, &mut out, &mut Vec::new(), &mut Vec::new());
        assert_eq!(out, [0, 1, 0, 1, 1, 0]);
    }
}
