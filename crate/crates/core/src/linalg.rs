//! Exact sparse linear algebra: fraction-free incremental echelon form over
//! the integers, with rational reduction of query vectors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::Q;

/// Sparse vector: strictly increasing column indices, nonzero entries.
pub type SparseQ = Vec<(usize, Q)>;
type SparseZ = Vec<(usize, BigInt)>;

fn to_primitive(v: &[(usize, Q)]) -> SparseZ {
    let mut l = BigInt::one();
    for (_, c) in v {
        l = l.lcm(c.denom());
    }
    let mut out: SparseZ = v
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (*i, c.numer() * (&l / c.denom())))
        .collect();
    make_primitive(&mut out);
    out
}

/// Divides out the content and makes the leading entry positive.
fn make_primitive(v: &mut SparseZ) {
    let Some((_, first)) = v.first() else {
        return;
    };
    let mut g = BigInt::zero();
    for (_, c) in v.iter() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    if first.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, c) in v.iter_mut() {
            *c = &*c / &g;
        }
    }
}

/// `a·v − b·r` for integer sparse rows.
fn combine(a: &BigInt, v: &SparseZ, b: &BigInt, r: &SparseZ) -> SparseZ {
    let mut out = Vec::with_capacity(v.len() + r.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < r.len() {
        let take_v = j >= r.len() || (i < v.len() && v[i].0 < r[j].0);
        let take_r = i >= v.len() || (j < r.len() && r[j].0 < v[i].0);
        if take_v {
            out.push((v[i].0, a * &v[i].1));
            i += 1;
        } else if take_r {
            out.push((r[j].0, -(b * &r[j].1)));
            j += 1;
        } else {
            let c = a * &v[i].1 - b * &r[j].1;
            if !c.is_zero() {
                out.push((v[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rows with pairwise distinct leading columns, each row primitive with a
/// positive leading entry. The leading column of a row is its smallest one.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SparseZ>,
    pivots: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a vector to the row space; returns whether the rank grew.
    pub fn insert(&mut self, v: &[(usize, Q)]) -> bool {
        let mut row = to_primitive(v);
        while let Some(&(lead, _)) = row.first() {
            let Some(&ri) = self.pivots.get(&lead) else {
                break;
            };
            let r = &self.rows[ri];
            let a = r[0].1.clone();
            let b = row[0].1.clone();
            let g = a.gcd(&b);
            row = combine(&(&a / &g), &row, &(&b / &g), r);
            make_primitive(&mut row);
        }
        match row.first() {
            None => false,
            Some(&(lead, _)) => {
                self.pivots.insert(lead, self.rows.len());
                self.rows.push(row);
                true
            }
        }
    }

    /// Remainder of `v` after eliminating every pivot column; zero iff `v`
    /// lies in the row space. Independent of insertion order.
    pub fn reduce(&self, v: &[(usize, Q)]) -> SparseQ {
        let mut cur: BTreeMap<usize, Q> = v.iter().filter(|(_, c)| !c.is_zero()).cloned().collect();
        let mut from = 0usize;
        loop {
            let next = cur
                .range(from..)
                .map(|(k, _)| *k)
                .find(|k| self.pivots.contains_key(k));
            let Some(col) = next else {
                break;
            };
            let r = &self.rows[self.pivots[&col]];
            let factor = cur[&col].clone() / Q::from_integer(r[0].1.clone());
            for (j, c) in r {
                let e = cur.entry(*j).or_insert_with(Q::zero);
                *e -= &factor * Q::from_integer(c.clone());
                if e.is_zero() {
                    cur.remove(j);
                }
            }
            from = col + 1;
        }
        cur.into_iter().collect()
    }

    pub fn contains(&self, v: &[(usize, Q)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Reduced row echelon form: rows sorted by leading column, every pivot
    /// column cleared in the other rows, each row a primitive integer vector
    /// with positive leading entry. Unique for a given row space.
    pub fn reduced_rows(&self) -> Vec<SparseQ> {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.rows[i][0].0);
        let mut rows: Vec<BTreeMap<usize, Q>> = order
            .iter()
            .map(|&i| {
                self.rows[i]
                    .iter()
                    .map(|(c, x)| (*c, Q::from_integer(x.clone())))
                    .collect()
            })
            .collect();
        for i in (0..rows.len()).rev() {
            let (lead, lv) = {
                let (k, v) = rows[i].iter().next().expect("nonzero row");
                (*k, v.clone())
            };
            let pivot_row = rows[i].clone();
            for row in rows.iter_mut().take(i) {
                let Some(x) = row.get(&lead).cloned() else {
                    continue;
                };
                let f = x / &lv;
                for (c, y) in &pivot_row {
                    let e = row.entry(*c).or_insert_with(Q::zero);
                    *e -= &f * y;
                    if e.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        rows.into_iter()
            .map(|r| {
                let v: SparseQ = r.into_iter().collect();
                to_primitive(&v)
                    .into_iter()
                    .map(|(c, x)| (c, Q::from_integer(x)))
                    .collect()
            })
            .collect()
    }

    /// Rows as (leading column, entries).
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[(usize, BigInt)])> {
        self.rows.iter().map(|r| (r[0].0, r.as_slice()))
    }
}

/// Rank of a set of sparse vectors.
pub fn rank(vectors: &[SparseQ]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Basis of `{x : Σ x_j col_j = 0}` for sparse column vectors, by eliminating
/// `[col_j | e_j]` with the tag block ordered after every image coordinate.
pub fn kernel(columns: &[SparseQ]) -> Vec<SparseQ> {
    let offset = columns
        .iter()
        .flat_map(|c| c.iter().map(|(i, _)| *i + 1))
        .max()
        .unwrap_or(0);
    let mut e = Echelon::new();
    for (j, c) in columns.iter().enumerate() {
        let mut v = c.clone();
        v.push((offset + j, Q::one()));
        e.insert(&v);
    }
    e.rows()
        .filter(|(lead, _)| *lead >= offset)
        .map(|(_, r)| {
            r.iter()
                .map(|(i, c)| (i - offset, Q::from_integer(c.clone())))
                .collect()
        })
        .collect()
}
