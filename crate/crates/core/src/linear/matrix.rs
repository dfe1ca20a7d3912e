//! Dense matrices over the prime field `F_p`.

use std::fmt;

use crate::error::{NucaError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = FpMatrix::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Entries are reduced mod `p`.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NucaError::Mismatch("matrix rows have different lengths".into()));
        }
        let data = rows.iter().flatten().map(|&v| v.rem_euclid(p as i64) as u32).collect();
        Ok(FpMatrix { p, rows: rows.len(), cols, data })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows || self.p != other.p {
            return Err(NucaError::Mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, j) as u64) % self.p as u64) as u32;
                }
            }
        }
        Ok(out)
    }

    /// `M v` for a column vector.
    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        (0..self.rows)
            .map(|i| {
                let s: u64 = (0..self.cols).map(|j| self.get(i, j) as u64 * v[j] as u64).sum();
                (s % self.p as u64) as u32
            })
            .collect()
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (a + b) % self.p).collect();
        FpMatrix { data, ..self.clone() }
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let p = self.p as u64;
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else { continue };
            for j in 0..m.cols {
                m.data.swap(pivot * m.cols + j, rank * m.cols + j);
            }
            let inv = mod_inverse(m.get(rank, col) as u64, p);
            for j in 0..m.cols {
                let v = m.get(rank, j) as u64 * inv % p;
                m.set(rank, j, v as u32);
            }
            for r in 0..m.rows {
                let factor = m.get(r, col) as u64;
                if r == rank || factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = (m.get(r, j) as u64 + p * p - factor * m.get(rank, j) as u64 % p) % p;
                    m.set(r, j, v as u32);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p is prime
    let mut result = 1;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

impl fmt::Display for FpMatrix {
    /// `[[1,0],[0,1]]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_products() {
        let a = FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(a.rank(), 1);
        assert_eq!(a.mul(&a).unwrap(), FpMatrix::zeros(2, 2, 2));
        let b = FpMatrix::from_rows(3, &[vec![1, 2], vec![0, 1]]).unwrap();
        assert!(b.is_invertible());
        assert_eq!(b.transpose().transpose(), b);
        assert_eq!(b.mul_vec(&[1, 1]), vec![0, 1]);
        assert_eq!(FpMatrix::identity(5, 3).rank(), 3);
        assert_eq!(b.to_string(), "[[1,2],[0,1]]");
    }
}
