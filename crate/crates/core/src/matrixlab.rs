//! Exact integer matrices: Smith normal form, cokernels of `I − Aᵗ`, and
//! elementary strong shift equivalence of 0-1 matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Matrix("rows have different lengths".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[BigInt]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Matrix(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Matrix("shape mismatch in subtraction".into()));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn is_zero_one(&self) -> bool {
        self.data.iter().all(|x| x.is_zero() || x.is_one())
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Matrix("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let x = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = x / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(if n == 0 { BigInt::one() } else { sign * &a[n - 1][n - 1] })
    }

    /// Row-major nested arrays; entries outside `i64` are written as strings.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.to_rows()
                .into_iter()
                .map(|row| {
                    Value::Array(
                        row.iter().map(int_value).collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let Value::Array(rows) = v else {
            return Err(Error::Parse("matrix must be an array of rows".into()));
        };
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let Value::Array(entries) = row else {
                return Err(Error::Parse("matrix row must be an array".into()));
            };
            let mut r = Vec::with_capacity(entries.len());
            for e in entries {
                let x = match e {
                    Value::Number(n) if n.is_i64() => BigInt::from(n.as_i64().expect("checked")),
                    Value::Number(n) if n.is_u64() => BigInt::from(n.as_u64().expect("checked")),
                    Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))?,
                    other => return Err(Error::Parse(format!("matrix entries must be integers, got {other}"))),
                };
                r.push(x);
            }
            out.push(r);
        }
        Self::from_rows(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q · row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let x = q * &self.data[src * self.cols + j];
            self.data[dst * self.cols + j] += x;
        }
    }

    /// col[dst] += q · col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let x = q * &self.data[i * self.cols + src];
            self.data[i * self.cols + dst] += x;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let x = -std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = x;
        }
    }
}

fn int_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

fn serialize_ints<S: serde::Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    Value::Array(xs.iter().map(int_value).collect()).serialize(s)
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json_value())
    }
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal with each
/// diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero diagonal entries of `D`, in divisibility order.
    #[serde(serialize_with = "serialize_ints")]
    pub invariant_factors: Vec<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

/// Position of the nonzero entry of smallest absolute value in the
/// submatrix starting at `(t, t)`, ties broken in row-major order.
fn pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            let x = d.get(i, j);
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let mut t = 0;
    while t < m.rows.min(m.cols) {
        let Some((pi, pj)) = pivot(&d, t) else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let p = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..d.rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -(d.get(i, t) / &p);
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..d.cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -(d.get(t, j) / &p);
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if clean {
                let offender = (t + 1..d.rows)
                    .find(|&i| (t + 1..d.cols).any(|j| !d.get(i, j).is_multiple_of(&p)));
                match offender {
                    None => break,
                    Some(i) => {
                        d.add_row(t, i, &BigInt::one());
                        u.add_row(t, i, &BigInt::one());
                    }
                }
            }
            // a remainder is now smaller than the pivot: move it into place
            let (pi, pj) = pivot(&d, t).expect("pivot row is nonzero");
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    let invariant_factors = (0..m.rows.min(m.cols)).map(|i| d.get(i, i).clone()).filter(|x| !x.is_zero()).collect();
    SmithForm { d, u, v, invariant_factors }
}

/// The cokernel `Zⁿ / im(M)` as torsion coefficients plus free rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CokernelInvariant {
    /// Invariant factors greater than 1.
    #[serde(serialize_with = "serialize_ints")]
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl CokernelInvariant {
    pub fn of_matrix(m: &IntMatrix) -> Self {
        let snf = smith_normal_form(m);
        CokernelInvariant {
            torsion: snf.invariant_factors.iter().filter(|x| !x.is_one()).cloned().collect(),
            free_rank: m.rows - snf.rank(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }
}

impl fmt::Display for CokernelInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Cokernel of `I − Aᵗ` for the adjacency matrix `A` of a graph with finitely
/// many edges and no sinks.
pub fn cokernel_invariant(g: &Graph) -> Result<CokernelInvariant> {
    let Some(a) = g.finite_adjacency() else {
        return Err(Error::Precondition("cokernel needs finite multiplicities".into()));
    };
    if let Some(v) = g.sinks().first() {
        return Err(Error::Precondition(format!("cokernel needs a graph without sinks, but `{v}` is a sink")));
    }
    let n = a.len();
    let mut m = IntMatrix::identity(n);
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let e = m.get(j, i) - BigInt::from(x);
            m.set(j, i, e);
        }
    }
    Ok(CokernelInvariant::of_matrix(&m))
}

/// Adjacency of a graph as an integer matrix, when every bundle is finite.
pub fn adjacency_int(g: &Graph) -> Option<IntMatrix> {
    let a = g.finite_adjacency()?;
    let rows = a.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    Some(IntMatrix::from_rows(rows).expect("square adjacency"))
}

/// `true` exactly when `A = RS` and `B = SR`.
pub fn esse_matrix_verify(a: &IntMatrix, b: &IntMatrix, r: &IntMatrix, s: &IntMatrix) -> Result<bool> {
    for (name, m) in [("A", a), ("B", b), ("R", r), ("S", s)] {
        if !m.is_zero_one() {
            return Err(Error::Matrix(format!("{name} is not a 0-1 matrix")));
        }
    }
    let (n, m) = (a.rows, b.rows);
    if !a.is_square() || !b.is_square() {
        return Err(Error::Matrix("A and B must be square".into()));
    }
    if (r.rows, r.cols) != (n, m) || (s.rows, s.cols) != (m, n) {
        return Err(Error::Matrix(format!(
            "expected R {n}x{m} and S {m}x{n}, got R {}x{} and S {}x{}",
            r.rows, r.cols, s.rows, s.cols
        )));
    }
    Ok(&r.mul(s)? == a && &s.mul(r)? == b)
}

/// Outcome of a single-link ESSE search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EsseSearch {
    Found { r: IntMatrix, s: IntMatrix, examined: u64 },
    /// Every candidate pair was examined.
    ProvenNone { examined: u64 },
    BudgetExhausted { examined: u64 },
}

/// Decodes candidate `code` as a 0-1 matrix, column by column with the
/// least significant bit at the top left.
fn decode(code: u64, rows: usize, cols: usize) -> IntMatrix {
    let mut m = IntMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            if code >> (j * rows + i) & 1 == 1 {
                m.set(i, j, BigInt::one());
            }
        }
    }
    m
}

/// Searches for `(R, S)` with `A = RS`, `B = SR`.
///
/// The inner dimension of `RS` is forced to be `dim B`, so only that size is
/// searched, and it must not exceed `m_max`. Candidates are visited with `R`
/// in the outer loop and `S` in the inner loop, each counted up in binary
/// column by column; the first witness in that order is returned.
pub fn esse_matrix_search(a: &IntMatrix, b: &IntMatrix, m_max: usize, budget: u64) -> Result<EsseSearch> {
    if !a.is_zero_one() || !b.is_zero_one() {
        return Err(Error::Matrix("ESSE search needs 0-1 matrices".into()));
    }
    if !a.is_square() || !b.is_square() {
        return Err(Error::Matrix("A and B must be square".into()));
    }
    let (n, m) = (a.rows, b.rows);
    if m > m_max {
        return Err(Error::Matrix(format!("inner dimension {m} exceeds the limit {m_max}")));
    }
    let bits = n * m;
    if bits > 31 {
        return Err(Error::Matrix(format!("search space 2^{} is too large", 2 * bits)));
    }
    let space = 1u64 << bits;
    let mut examined = 0u64;
    for rc in 0..space {
        let r = decode(rc, n, m);
        for sc in 0..space {
            if examined == budget {
                return Ok(EsseSearch::BudgetExhausted { examined });
            }
            examined += 1;
            let s = decode(sc, m, n);
            if &r.mul(&s)? == a && &s.mul(&r)? == b {
                return Ok(EsseSearch::Found { r, s, examined });
            }
        }
    }
    Ok(EsseSearch::ProvenNone { examined })
}
